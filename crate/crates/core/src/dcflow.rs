//! Susceptance (Laplacian) matrices, DC power flow, and Kron reduction.
//!
//! The DC model treats the grid as a resistive circuit: nodal injections play
//! the role of current sources, voltage angles the role of potentials, and
//! `P = Bθ` ties them together through the weighted graph Laplacian `B` built
//! from line susceptances. Deleting the reference row/column leaves a positive
//! definite matrix whenever the in-service grid is connected, which is what
//! every solve in this crate factorizes.
//!
//! Angles are kept in radians and per-unit power internally; line flows are
//! reported in MW using the case MVA base. The supported scale is dense
//! factorization up to a few thousand buses.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use thiserror::Error;

use crate::netmodel::{BusId, GridCase};

/// Relative imbalance above which `solve_dc_flow` warns before assigning the
/// residual to the reference bus.
pub const BALANCE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum DcFlowError {
    #[error("grid is disconnected or degenerate: {0}")]
    Singular(String),
    #[error("injection vector has {got} entries, case has {want} buses")]
    DimensionMismatch { got: usize, want: usize },
    #[error("unknown bus {0}")]
    UnknownBus(BusId),
    #[error("terminal set is empty")]
    NoTerminals,
}

/// Full nodal susceptance matrix: the weighted Laplacian over in-service
/// lines, in per-unit. Symmetric, zero row sums, nonpositive off-diagonals.
#[derive(Debug, Clone)]
pub struct SusceptanceMatrix {
    matrix: DMatrix<f64>,
    bus_ids: Vec<BusId>,
}

impl SusceptanceMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn bus_ids(&self) -> &[BusId] {
        &self.bus_ids
    }

    pub fn n(&self) -> usize {
        self.bus_ids.len()
    }

    pub fn position_of(&self, bus: BusId) -> Option<usize> {
        self.bus_ids.iter().position(|&b| b == bus)
    }
}

/// `B` with the reference row/column deleted, held as a Cholesky
/// factorization ready for repeated solves. Successful construction doubles
/// as the positive-definiteness (connectivity) check.
#[derive(Clone)]
pub struct ReducedSusceptance {
    chol: Cholesky<f64, Dyn>,
    bus_ids: Vec<BusId>,
    ref_pos: usize,
}

impl std::fmt::Debug for ReducedSusceptance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReducedSusceptance")
            .field("n", &self.bus_ids.len())
            .field("reference", &self.bus_ids[self.ref_pos])
            .finish()
    }
}

impl ReducedSusceptance {
    pub fn reference_bus(&self) -> BusId {
        self.bus_ids[self.ref_pos]
    }

    /// The reduced (n-1)x(n-1) matrix, reassembled from the factorization's
    /// target. Mostly useful for inspection and tests.
    pub fn matrix(&self) -> DMatrix<f64> {
        let l = self.chol.l();
        &l * l.transpose()
    }

    /// Solves `B_red θ_red = p_red` for angles, then reinserts the reference
    /// angle 0. `p` is the full per-bus injection vector in per-unit; the
    /// reference entry is ignored (it absorbs the residual).
    pub fn solve_angles(&self, p: &[f64]) -> Vec<f64> {
        let n = self.bus_ids.len();
        debug_assert_eq!(p.len(), n);
        let mut rhs = DVector::zeros(n - 1);
        let mut k = 0;
        for (i, &pi) in p.iter().enumerate() {
            if i != self.ref_pos {
                rhs[k] = pi;
                k += 1;
            }
        }
        self.chol.solve_mut(&mut rhs);
        let mut theta = vec![0.0; n];
        let mut k = 0;
        for (i, t) in theta.iter_mut().enumerate() {
            if i != self.ref_pos {
                *t = rhs[k];
                k += 1;
            }
        }
        theta
    }

    /// Dense inverse of the reduced matrix. Used to assemble shift factors.
    pub fn inverse(&self) -> DMatrix<f64> {
        self.chol.inverse()
    }
}

/// Solved DC state: angles in radians (reference pinned at 0), injections and
/// signed line flows in MW. Flow sign follows the line's from→to orientation.
#[derive(Debug, Clone)]
pub struct DcState {
    pub theta: Vec<f64>,
    pub injections_mw: Vec<f64>,
    pub flows_mw: Vec<f64>,
}

/// Builds the per-unit nodal susceptance Laplacian over in-service lines,
/// ordered by the case's bus order. Out-of-service lines contribute nothing.
pub fn build_susceptance(case: &GridCase) -> SusceptanceMatrix {
    let n = case.buses.len();
    let mut m = DMatrix::zeros(n, n);
    for line in case.in_service_lines() {
        let i = case.bus_pos(line.from_bus).expect("validated case");
        let j = case.bus_pos(line.to_bus).expect("validated case");
        let b = line.susceptance;
        m[(i, i)] += b;
        m[(j, j)] += b;
        m[(i, j)] -= b;
        m[(j, i)] -= b;
    }
    SusceptanceMatrix { matrix: m, bus_ids: case.buses.iter().map(|b| b.id).collect() }
}

/// Deletes the reference row/column and factorizes. Fails when the in-service
/// grid is disconnected (the reduced matrix is then only semidefinite).
pub fn reduce_reference(b: &SusceptanceMatrix, ref_bus: BusId) -> Result<ReducedSusceptance, DcFlowError> {
    let ref_pos = b.position_of(ref_bus).ok_or(DcFlowError::UnknownBus(ref_bus))?;
    let n = b.n();
    let keep: Vec<usize> = (0..n).filter(|&i| i != ref_pos).collect();
    let reduced = b.matrix.select_rows(keep.iter()).select_columns(keep.iter());
    let chol = Cholesky::new(reduced).ok_or_else(|| {
        DcFlowError::Singular("reduced susceptance matrix is not positive definite".into())
    })?;
    Ok(ReducedSusceptance { chol, bus_ids: b.bus_ids.clone(), ref_pos })
}

/// Solves the DC power flow `P = Bθ` for a per-bus MW injection vector.
/// Injections that do not balance within [`BALANCE_TOL`] of total |injection|
/// are warned about; the reference bus absorbs the residual either way.
pub fn solve_dc_flow(case: &GridCase, injections_mw: &[f64]) -> Result<DcState, DcFlowError> {
    let n = case.buses.len();
    if injections_mw.len() != n {
        return Err(DcFlowError::DimensionMismatch { got: injections_mw.len(), want: n });
    }
    let total: f64 = injections_mw.iter().sum();
    let scale: f64 = injections_mw.iter().map(|p| p.abs()).sum();
    if total.abs() > BALANCE_TOL * scale.max(1.0) {
        log::warn!(
            "injections sum to {total:.6} MW; residual assigned to reference bus {}",
            case.reference_bus()
        );
    }
    let b = build_susceptance(case);
    let reduced = reduce_reference(&b, case.reference_bus())?;
    let p_pu: Vec<f64> = injections_mw.iter().map(|p| p / case.base_mva).collect();
    let theta = reduced.solve_angles(&p_pu);
    let flows_mw = line_flows_mw(case, &theta);
    Ok(DcState { theta, injections_mw: injections_mw.to_vec(), flows_mw })
}

/// Signed MW flow on every line (0 for out-of-service) given bus angles.
pub fn line_flows_mw(case: &GridCase, theta: &[f64]) -> Vec<f64> {
    case.lines
        .iter()
        .map(|line| {
            if !line.in_service {
                return 0.0;
            }
            let i = case.bus_pos(line.from_bus).expect("validated case");
            let j = case.bus_pos(line.to_bus).expect("validated case");
            case.base_mva * line.susceptance * (theta[i] - theta[j])
        })
        .collect()
}

/// Kron reduction: Schur complement that eliminates all non-terminal buses,
/// returning the electrically equivalent Laplacian over the terminals. For any
/// injection supported on the terminals, terminal angle differences are the
/// same in the reduced and the original network.
pub fn kron_reduce(b: &SusceptanceMatrix, terminals: &[BusId]) -> Result<SusceptanceMatrix, DcFlowError> {
    if terminals.is_empty() {
        return Err(DcFlowError::NoTerminals);
    }
    let mut term_pos = Vec::with_capacity(terminals.len());
    for &t in terminals {
        term_pos.push(b.position_of(t).ok_or(DcFlowError::UnknownBus(t))?);
    }
    // Keep the matrix's own ordering so the result is deterministic.
    term_pos.sort_unstable();
    term_pos.dedup();
    let interior: Vec<usize> = (0..b.n()).filter(|i| !term_pos.contains(i)).collect();
    let term_ids: Vec<BusId> = term_pos.iter().map(|&i| b.bus_ids[i]).collect();

    if interior.is_empty() {
        return Ok(SusceptanceMatrix { matrix: b.matrix.clone(), bus_ids: term_ids });
    }

    let b_tt = b.matrix.select_rows(term_pos.iter()).select_columns(term_pos.iter());
    let b_ti = b.matrix.select_rows(term_pos.iter()).select_columns(interior.iter());
    let b_it = b.matrix.select_rows(interior.iter()).select_columns(term_pos.iter());
    let b_ii = b.matrix.select_rows(interior.iter()).select_columns(interior.iter());

    let chol = Cholesky::new(b_ii).ok_or_else(|| {
        DcFlowError::Singular("interior block is singular; an interior component has no terminal".into())
    })?;
    let solved = chol.solve(&b_it);
    let mut schur = b_tt - b_ti * solved;
    // Symmetrize away factorization round-off so the result stays a Laplacian.
    let schur_t = schur.transpose();
    schur = 0.5 * (schur + schur_t);
    Ok(SusceptanceMatrix { matrix: schur, bus_ids: term_ids })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{Bus, GenId, Generator, Line, LineId};
    use approx::assert_abs_diff_eq;

    fn case_from_edges(n: u32, edges: &[(u32, u32, f64)]) -> GridCase {
        let buses = (1..=n)
            .map(|i| Bus { id: BusId(i), load: 0.0, is_reference: i == 1 })
            .collect();
        let lines = edges
            .iter()
            .enumerate()
            .map(|(k, &(f, t, b))| Line {
                id: LineId(k as u32 + 1),
                from_bus: BusId(f),
                to_bus: BusId(t),
                susceptance: b,
                limit: None,
                in_service: true,
            })
            .collect();
        GridCase::new(
            "fixture",
            100.0,
            buses,
            lines,
            vec![Generator { id: GenId(1), at_bus: BusId(1), p_min: 0.0, p_max: 1e3, cost: 1.0, cost_points: None }],
        )
        .unwrap()
    }

    #[test]
    fn two_bus_laplacian() {
        let case = case_from_edges(2, &[(1, 2, 10.0)]);
        let b = build_susceptance(&case);
        let expect = DMatrix::from_row_slice(2, 2, &[10.0, -10.0, -10.0, 10.0]);
        assert_eq!(b.matrix(), &expect);
    }

    #[test]
    fn triangle_laplacian_and_reduction() {
        let case = case_from_edges(3, &[(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)]);
        let b = build_susceptance(&case);
        for i in 0..3 {
            assert_abs_diff_eq!(b.matrix().row(i).sum(), 0.0, epsilon = 1e-12);
            assert_eq!(b.matrix()[(i, i)], 2.0);
        }
        // Reference bus 3: reduced matrix [[2,-1],[-1,2]] with eigenvalues 1 and 3.
        let red = reduce_reference(&b, BusId(3)).unwrap();
        let m = red.matrix();
        assert_abs_diff_eq!(m[(0, 0)], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m[(0, 1)], -1.0, epsilon = 1e-12);
        let eig = m.symmetric_eigenvalues();
        let mut vals: Vec<f64> = eig.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn two_bus_reduction_scalar() {
        let case = case_from_edges(2, &[(1, 2, 10.0)]);
        let b = build_susceptance(&case);
        let red = reduce_reference(&b, BusId(2)).unwrap();
        assert_abs_diff_eq!(red.matrix()[(0, 0)], 10.0, epsilon = 1e-12);
    }

    #[test]
    fn islanded_case_fails_reduction() {
        let case = case_from_edges(4, &[(1, 2, 1.0), (3, 4, 1.0)]);
        let b = build_susceptance(&case);
        assert!(matches!(reduce_reference(&b, BusId(1)), Err(DcFlowError::Singular(_))));
    }

    #[test]
    fn series_flow() {
        let case = case_from_edges(2, &[(1, 2, 10.0)]);
        let state = solve_dc_flow(&case, &[100.0, -100.0]).unwrap();
        assert_abs_diff_eq!(state.flows_mw[0], 100.0, epsilon = 1e-9);
        assert_eq!(state.theta[0], 0.0, "reference angle pinned");
    }

    #[test]
    fn triangle_split_oracle() {
        // Inject 90 at bus 1, withdraw 90 at bus 3, all susceptances equal.
        // Solving the 2x2 reduced system by hand: direct line 1-3 carries 60,
        // the detour 1-2-3 carries 30.
        let case = case_from_edges(3, &[(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)]);
        let state = solve_dc_flow(&case, &[90.0, 0.0, -90.0]).unwrap();
        assert_abs_diff_eq!(state.flows_mw[2], 60.0, epsilon = 1e-9);
        assert_abs_diff_eq!(state.flows_mw[0], 30.0, epsilon = 1e-9);
        assert_abs_diff_eq!(state.flows_mw[1], 30.0, epsilon = 1e-9);
    }

    #[test]
    fn zero_injection_zero_flow() {
        let case = case_from_edges(3, &[(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)]);
        let state = solve_dc_flow(&case, &[0.0, 0.0, 0.0]).unwrap();
        assert!(state.flows_mw.iter().all(|f| f.abs() < 1e-12));
    }

    #[test]
    fn superposition() {
        let case = case_from_edges(4, &[(1, 2, 2.0), (2, 3, 1.0), (3, 4, 3.0), (1, 4, 1.5), (2, 4, 0.7)]);
        let p1 = [50.0, -20.0, -30.0, 0.0];
        let p2 = [-10.0, 25.0, 0.0, -15.0];
        let sum: Vec<f64> = p1.iter().zip(&p2).map(|(a, b)| a + b).collect();
        let s1 = solve_dc_flow(&case, &p1).unwrap();
        let s2 = solve_dc_flow(&case, &p2).unwrap();
        let s12 = solve_dc_flow(&case, &sum).unwrap();
        for k in 0..case.lines.len() {
            let lhs = s1.flows_mw[k] + s2.flows_mw[k];
            assert!((lhs - s12.flows_mw[k]).abs() <= 1e-9 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn energy_form_nonnegative() {
        let case = case_from_edges(4, &[(1, 2, 2.0), (2, 3, 1.0), (3, 4, 3.0), (1, 4, 1.5)]);
        let b = build_susceptance(&case);
        let state = solve_dc_flow(&case, &[40.0, -10.0, -25.0, -5.0]).unwrap();
        let theta = DVector::from_vec(state.theta.clone());
        let quad = (theta.transpose() * b.matrix() * &theta)[(0, 0)];
        assert!(quad > 0.0, "nonzero angle differences absorb power");
        let flat = DVector::from_element(4, 0.3);
        let quad0 = (flat.transpose() * b.matrix() * &flat)[(0, 0)];
        assert_abs_diff_eq!(quad0, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn kron_series_pair() {
        let case = case_from_edges(3, &[(1, 2, 1.0), (2, 3, 1.0)]);
        let b = build_susceptance(&case);
        let red = kron_reduce(&b, &[BusId(1), BusId(3)]).unwrap();
        // Two unit susceptances in series combine to 1/2.
        assert_abs_diff_eq!(red.matrix()[(0, 1)], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(red.matrix()[(0, 0)], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn kron_all_terminals_is_identity_operation() {
        let case = case_from_edges(3, &[(1, 2, 1.0), (2, 3, 1.0), (1, 3, 1.0)]);
        let b = build_susceptance(&case);
        let red = kron_reduce(&b, &[BusId(1), BusId(2), BusId(3)]).unwrap();
        assert_eq!(red.matrix(), b.matrix());
    }

    #[test]
    fn kron_terminal_angles_match_original() {
        // Ladder graph, terminals {1, 4, 6}; compare terminal angle
        // differences under a terminal-supported injection.
        let case = case_from_edges(
            6,
            &[(1, 2, 1.0), (2, 3, 2.0), (3, 4, 1.0), (4, 5, 2.0), (5, 6, 1.0), (1, 6, 0.5), (2, 5, 1.0)],
        );
        let b = build_susceptance(&case);
        let terminals = [BusId(1), BusId(4), BusId(6)];
        let red = kron_reduce(&b, &terminals).unwrap();

        let inj_full = [30.0, 0.0, 0.0, -12.0, 0.0, -18.0];
        let full = solve_dc_flow(&case, &inj_full).unwrap();

        let red_reduced = reduce_reference(&red, BusId(1)).unwrap();
        let theta_red = red_reduced.solve_angles(&[0.30, -0.12, -0.18]);

        let pos = |bus: BusId| case.bus_pos(bus).unwrap();
        for (a, b2) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let d_full = full.theta[pos(terminals[a])] - full.theta[pos(terminals[b2])];
            let d_red = theta_red[a] - theta_red[b2];
            assert_abs_diff_eq!(d_full, d_red, epsilon = 1e-9);
        }
    }

    #[test]
    fn kron_singular_interior_rejected() {
        let case = case_from_edges(4, &[(1, 2, 1.0), (3, 4, 1.0)]);
        let b = build_susceptance(&case);
        // Interior component {3,4} has no terminal.
        assert!(matches!(kron_reduce(&b, &[BusId(1), BusId(2)]), Err(DcFlowError::Singular(_))));
    }
}
