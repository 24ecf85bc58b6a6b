//! Bounded-variable revised simplex with dual extraction.
//!
//! Solves `min cᵀx  s.t.  Ax = b,  l ≤ x ≤ u` where bounds may be infinite.
//! The optimal power flow module needs exact basic duals — nodal prices are
//! the duals of the balance rows and shadow prices the reduced costs of the
//! flow variables — so the solver reports row duals and reduced costs for
//! every column, not just the primal point.
//!
//! Implementation notes:
//! - two phases; phase 1 starts from an all-artificial basis and minimizes
//!   total infeasibility, remaining basic artificials are driven out or left
//!   pinned at zero on redundant rows;
//! - basis kept as a dense LU factorization plus product-form eta updates,
//!   refactorized (and the basic solution recomputed) every
//!   [`REFACTOR_EVERY`] pivots;
//! - Dantzig pricing with the lowest column index breaking ties, falling back
//!   to Bland's rule after a run of degenerate pivots, which keeps the solver
//!   deterministic and cycle-free.

use thiserror::Error;

/// Reduced-cost tolerance (scaled by the largest |cost|).
const DUAL_TOL: f64 = 1e-9;
/// Smallest pivot magnitude accepted in the ratio test.
const PIVOT_TOL: f64 = 1e-8;
/// Phase-1 objective below this is declared feasible.
const FEAS_TOL: f64 = 1e-7;
/// Step length under which an iteration counts as degenerate.
const DEGEN_STEP: f64 = 1e-10;
/// Consecutive degenerate pivots before switching to Bland's rule.
const BLAND_TRIGGER: usize = 64;
const REFACTOR_EVERY: usize = 100;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("basis factorization failed: {0}")]
    Numerical(String),
    #[error("iteration limit {0} exceeded")]
    IterationLimit(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Equality-form LP. Build columns against a fixed number of rows; inequality
/// constraints are modeled by the caller with explicit bounded slack columns.
#[derive(Debug, Clone)]
pub struct Problem {
    nrows: usize,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cols: Vec<Vec<(usize, f64)>>,
    rhs: Vec<f64>,
}

impl Problem {
    pub fn new(nrows: usize) -> Self {
        Problem {
            nrows,
            cost: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            cols: Vec::new(),
            rhs: vec![0.0; nrows],
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn set_rhs(&mut self, row: usize, value: f64) {
        self.rhs[row] = value;
    }

    /// Adds a column and returns its index. Entries must reference valid rows;
    /// duplicate rows within one column are not allowed.
    pub fn add_column(&mut self, cost: f64, lower: f64, upper: f64, entries: &[(usize, f64)]) -> usize {
        debug_assert!(lower <= upper);
        debug_assert!(entries.iter().all(|&(r, _)| r < self.nrows));
        self.cost.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.cols.push(entries.to_vec());
        self.cols.len() - 1
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: Status,
    /// Primal values, one per column (meaningful for `Optimal`).
    pub x: Vec<f64>,
    pub objective: f64,
    /// Row duals `y` of the final basis: `∂objective/∂rhs`.
    pub duals: Vec<f64>,
    /// Reduced costs `d_j = c_j − yᵀA_j`; zero on basic columns, ≥ 0 at lower
    /// bounds, ≤ 0 at upper bounds.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl Solution {
    /// Dual objective `yᵀb + Σ_{j@lower} d_j l_j + Σ_{j@upper} d_j u_j`.
    /// Equals the primal objective at an optimum (strong duality).
    pub fn dual_objective(&self, p: &Problem) -> f64 {
        let mut v: f64 = self.duals.iter().zip(&p.rhs).map(|(y, b)| y * b).sum();
        for j in 0..p.ncols() {
            let d = self.reduced_costs[j];
            if d.abs() < 1e-12 {
                continue;
            }
            if d > 0.0 {
                v += d * p.lower[j];
            } else {
                v += d * p.upper[j];
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLower,
    AtUpper,
    /// Nonbasic free variable, held at zero.
    Free,
}

/// Compact dense LU with partial pivoting; solves both `Ax=b` and `Aᵀx=b`.
struct DenseLu {
    n: usize,
    a: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    fn factorize(mut a: Vec<f64>, n: usize) -> Option<DenseLu> {
        let mut piv = vec![0usize; n];
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best < 1e-12 {
                return None;
            }
            piv[k] = p;
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
            }
            let diag = a[k * n + k];
            for i in k + 1..n {
                let m = a[i * n + k] / diag;
                a[i * n + k] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        a[i * n + j] -= m * a[k * n + j];
                    }
                }
            }
        }
        Some(DenseLu { n, a, piv })
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            x.swap(k, self.piv[k]);
        }
        for k in 0..n {
            let xk = x[k];
            if xk != 0.0 {
                for i in k + 1..n {
                    x[i] -= self.a[i * n + k] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            x[k] /= self.a[k * n + k];
            let xk = x[k];
            if xk != 0.0 {
                for i in 0..k {
                    x[i] -= self.a[i * n + k] * xk;
                }
            }
        }
    }

    fn solve_transpose_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        // A = P⁻¹LU, so Aᵀx = b means Uᵀ(Lᵀ(Px)) = b.
        for k in 0..n {
            let mut s = x[k];
            for i in 0..k {
                s -= self.a[i * n + k] * x[i];
            }
            x[k] = s / self.a[k * n + k];
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for i in k + 1..n {
                s -= self.a[i * n + k] * x[i];
            }
            x[k] = s;
        }
        for k in (0..n).rev() {
            x.swap(k, self.piv[k]);
        }
    }
}

/// Product-form update: basis column `slot` was replaced; `col` holds the
/// inverse eta vector.
struct Eta {
    slot: usize,
    col: Vec<f64>,
}

pub fn solve(p: &Problem) -> Result<Solution, LpError> {
    let m = p.nrows;
    let n = p.ncols();
    let max_iter = 200 * (m + n) + 20_000;

    // Nonbasic starting point: finite lower, else finite upper, else free at 0.
    let mut state: Vec<VarState> = (0..n)
        .map(|j| {
            if p.lower[j].is_finite() {
                VarState::AtLower
            } else if p.upper[j].is_finite() {
                VarState::AtUpper
            } else {
                VarState::Free
            }
        })
        .collect();

    // Residual b − A·x_init decides each artificial's orientation.
    let mut residual = p.rhs.clone();
    for j in 0..n {
        let v = match state[j] {
            VarState::AtLower => p.lower[j],
            VarState::AtUpper => p.upper[j],
            _ => 0.0,
        };
        if v != 0.0 {
            for &(r, a) in &p.cols[j] {
                residual[r] -= a * v;
            }
        }
    }

    let mut art_cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    let mut lower = p.lower.clone();
    let mut upper = p.upper.clone();
    let mut cost1 = vec![0.0; n];
    let mut basis = Vec::with_capacity(m);
    let mut xb = Vec::with_capacity(m);
    for (r, &res) in residual.iter().enumerate() {
        let sign = if res >= 0.0 { 1.0 } else { -1.0 };
        art_cols.push(vec![(r, sign)]);
        lower.push(0.0);
        upper.push(f64::INFINITY);
        cost1.push(1.0);
        let j = n + r;
        basis.push(j);
        xb.push(res.abs());
        state.push(VarState::Basic(r));
    }

    let mut s = Core {
        p,
        art_cols,
        cost: cost1,
        lower,
        upper,
        state,
        basis,
        xb,
        lu: None,
        etas: Vec::new(),
        iterations: 0,
        degen_run: 0,
        max_iter,
    };
    s.refactorize()?;

    // Phase 1: minimize total infeasibility.
    if !s.iterate()? {
        return Err(LpError::Numerical("phase-1 ray found; this objective is bounded below".into()));
    }
    let infeas: f64 = s
        .basis
        .iter()
        .enumerate()
        .filter(|&(_, &j)| j >= n)
        .map(|(slot, _)| s.xb[slot].abs())
        .sum();
    if infeas > FEAS_TOL {
        return Ok(Solution {
            status: Status::Infeasible,
            x: vec![0.0; n],
            objective: f64::NAN,
            duals: vec![0.0; m],
            reduced_costs: vec![0.0; n],
            iterations: s.iterations,
        });
    }

    // Pin artificials to zero and try to drive basic ones out.
    for j in n..n + m {
        s.lower[j] = 0.0;
        s.upper[j] = 0.0;
    }
    s.drive_out_artificials()?;

    // Phase 2: real costs.
    for j in 0..n {
        s.cost[j] = p.cost[j];
    }
    for j in n..n + m {
        s.cost[j] = 0.0;
    }
    s.refactorize()?;
    let unbounded = !s.iterate()?;
    if unbounded {
        return Ok(Solution {
            status: Status::Unbounded,
            x: vec![0.0; n],
            objective: f64::NEG_INFINITY,
            duals: vec![0.0; m],
            reduced_costs: vec![0.0; n],
            iterations: s.iterations,
        });
    }

    let mut x = vec![0.0; n];
    for (j, xv) in x.iter_mut().enumerate() {
        *xv = s.value_of(j);
    }
    let objective = x.iter().zip(&p.cost).map(|(xi, ci)| xi * ci).sum();
    let duals = s.duals();
    let mut reduced_costs = vec![0.0; n];
    for (j, rc) in reduced_costs.iter_mut().enumerate() {
        if matches!(s.state[j], VarState::Basic(_)) {
            *rc = 0.0;
        } else {
            *rc = s.cost[j] - sparse_dot(&duals, &p.cols[j]);
        }
    }
    Ok(Solution { status: Status::Optimal, x, objective, duals, reduced_costs, iterations: s.iterations })
}

fn sparse_dot(dense: &[f64], sparse: &[(usize, f64)]) -> f64 {
    sparse.iter().map(|&(r, a)| dense[r] * a).sum()
}

struct Core<'a> {
    p: &'a Problem,
    art_cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    xb: Vec<f64>,
    lu: Option<DenseLu>,
    etas: Vec<Eta>,
    iterations: usize,
    degen_run: usize,
    max_iter: usize,
}

impl<'a> Core<'a> {
    fn n(&self) -> usize {
        self.p.ncols()
    }

    fn m(&self) -> usize {
        self.p.nrows
    }

    fn col(&self, j: usize) -> &[(usize, f64)] {
        if j < self.n() {
            &self.p.cols[j]
        } else {
            &self.art_cols[j - self.n()]
        }
    }

    fn value_of(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Basic(slot) => self.xb[slot],
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::Free => 0.0,
        }
    }

    /// Rebuilds the LU factorization of the basis and recomputes the basic
    /// solution from scratch, flushing accumulated round-off.
    fn refactorize(&mut self) -> Result<(), LpError> {
        let m = self.m();
        self.etas.clear();
        if m == 0 {
            self.lu = None;
            return Ok(());
        }
        let mut dense = vec![0.0; m * m];
        for (slot, &j) in self.basis.iter().enumerate() {
            for &(r, a) in self.col(j) {
                dense[r * m + slot] = a;
            }
        }
        let lu = DenseLu::factorize(dense, m)
            .ok_or_else(|| LpError::Numerical("singular basis matrix".into()))?;
        // x_B = B⁻¹ (b − A_N x_N)
        let mut rhs = self.p.rhs.clone();
        for j in 0..self.n() + m {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let v = self.value_of(j);
            if v != 0.0 {
                for &(r, a) in self.col(j) {
                    rhs[r] -= a * v;
                }
            }
        }
        lu.solve_in_place(&mut rhs);
        self.xb = rhs;
        self.lu = Some(lu);
        Ok(())
    }

    fn ftran(&self, rhs: &mut Vec<f64>) {
        if let Some(lu) = &self.lu {
            lu.solve_in_place(rhs);
        }
        for eta in &self.etas {
            let t = rhs[eta.slot];
            if t != 0.0 {
                for (i, &e) in eta.col.iter().enumerate() {
                    if i == eta.slot {
                        rhs[i] = e * t;
                    } else if e != 0.0 {
                        rhs[i] += e * t;
                    }
                }
            } else {
                rhs[eta.slot] = 0.0;
            }
        }
    }

    fn btran(&self, rhs: &mut Vec<f64>) {
        for eta in self.etas.iter().rev() {
            let mut s = 0.0;
            for (i, &e) in eta.col.iter().enumerate() {
                if e != 0.0 {
                    s += e * rhs[i];
                }
            }
            rhs[eta.slot] = s;
        }
        if let Some(lu) = &self.lu {
            lu.solve_transpose_in_place(rhs);
        }
    }

    fn duals(&self) -> Vec<f64> {
        let mut cb: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        self.btran(&mut cb);
        cb
    }

    /// Primal simplex loop for the current cost vector. Returns `false` when
    /// the problem is unbounded in this phase, `true` at an optimum.
    fn iterate(&mut self) -> Result<bool, LpError> {
        let ntot = self.n() + self.m();
        let cost_scale = self.cost.iter().fold(1.0f64, |acc, c| acc.max(c.abs()));
        let dual_tol = DUAL_TOL * cost_scale;
        loop {
            self.iterations += 1;
            if self.iterations > self.max_iter {
                return Err(LpError::IterationLimit(self.max_iter));
            }
            let y = self.duals();
            let bland = self.degen_run > BLAND_TRIGGER;

            // Entering column: largest dual violation (or lowest index under
            // Bland's rule). σ = +1 when the variable wants to increase.
            let mut entering: Option<(usize, f64, f64)> = None; // (col, score, sigma)
            for j in 0..ntot {
                let st = self.state[j];
                if matches!(st, VarState::Basic(_)) {
                    continue;
                }
                if self.lower[j] == self.upper[j] {
                    continue; // fixed column can never improve
                }
                let d = self.cost[j] - sparse_dot(&y, self.col(j));
                let (viol, sigma) = match st {
                    VarState::AtLower => (-d, 1.0),
                    VarState::AtUpper => (d, -1.0),
                    VarState::Free => (d.abs(), if d < 0.0 { 1.0 } else { -1.0 }),
                    VarState::Basic(_) => unreachable!(),
                };
                if viol > dual_tol {
                    if bland {
                        entering = Some((j, viol, sigma));
                        break;
                    }
                    match entering {
                        Some((_, best, _)) if best >= viol => {}
                        _ => entering = Some((j, viol, sigma)),
                    }
                }
            }
            let Some((q, _, sigma)) = entering else {
                return Ok(true); // optimal for this phase
            };

            // Direction of basic variables: w = B⁻¹ A_q; x_B ← x_B − σ t w.
            let mut w = vec![0.0; self.m()];
            for &(r, a) in self.col(q) {
                w[r] = a;
            }
            self.ftran(&mut w);

            // Ratio test. The entering variable itself is bounded by its range.
            let mut t_max = self.upper[q] - self.lower[q]; // inf for free/one-sided
            if matches!(self.state[q], VarState::Free) {
                t_max = f64::INFINITY;
            }
            let mut leaving: Option<(usize, f64, bool)> = None; // (slot, |pivot|, hits_upper)
            for (slot, &wi) in w.iter().enumerate() {
                let delta = sigma * wi;
                if delta.abs() <= PIVOT_TOL {
                    continue;
                }
                let jb = self.basis[slot];
                let (room, hits_upper) = if delta > 0.0 {
                    (self.xb[slot] - self.lower[jb], false) // variable decreases
                } else {
                    (self.upper[jb] - self.xb[slot], true) // variable increases
                };
                if !room.is_finite() {
                    continue;
                }
                let ratio = (room.max(0.0)) / delta.abs();
                if ratio < t_max - 1e-12 {
                    t_max = ratio;
                    leaving = Some((slot, wi.abs(), hits_upper));
                } else if (ratio - t_max).abs() <= 1e-12 {
                    // Tie: prefer the larger pivot for stability, then the
                    // lower basis column index for determinism.
                    let replace = match leaving {
                        None => true,
                        Some((cur_slot, cur_piv, _)) => {
                            wi.abs() > cur_piv + 1e-12
                                || (wi.abs() >= cur_piv - 1e-12 && self.basis[slot] < self.basis[cur_slot])
                        }
                    };
                    if replace {
                        t_max = t_max.min(ratio);
                        leaving = Some((slot, wi.abs(), hits_upper));
                    }
                }
            }

            if !t_max.is_finite() {
                return Ok(false); // unbounded ray
            }
            self.degen_run = if t_max <= DEGEN_STEP { self.degen_run + 1 } else { 0 };

            // Apply the step to the basic variables.
            let step = sigma * t_max;
            if step != 0.0 {
                for (slot, &wi) in w.iter().enumerate() {
                    if wi != 0.0 {
                        self.xb[slot] -= step * wi;
                    }
                }
            }

            match leaving {
                None => {
                    // Bound flip: entering moves across its range, basis unchanged.
                    self.state[q] = match self.state[q] {
                        VarState::AtLower => VarState::AtUpper,
                        VarState::AtUpper => VarState::AtLower,
                        other => other,
                    };
                }
                Some((slot, pivot_abs, hits_upper)) => {
                    if pivot_abs <= PIVOT_TOL {
                        return Err(LpError::Numerical("pivot below tolerance".into()));
                    }
                    let leaving_col = self.basis[slot];
                    self.state[leaving_col] = if hits_upper { VarState::AtUpper } else { VarState::AtLower };
                    // Entering value = nonbasic start + σ·t.
                    let start = match self.state[q] {
                        VarState::AtLower => self.lower[q],
                        VarState::AtUpper => self.upper[q],
                        VarState::Free => 0.0,
                        VarState::Basic(_) => unreachable!(),
                    };
                    self.basis[slot] = q;
                    self.state[q] = VarState::Basic(slot);
                    self.xb[slot] = start + step;

                    // Record the eta for the replaced basis column.
                    let wr = w[slot];
                    let mut eta = vec![0.0; self.m()];
                    for (i, e) in eta.iter_mut().enumerate() {
                        if i == slot {
                            *e = 1.0 / wr;
                        } else {
                            *e = -w[i] / wr;
                        }
                    }
                    self.etas.push(Eta { slot, col: eta });
                    if self.etas.len() >= REFACTOR_EVERY {
                        self.refactorize()?;
                    }
                }
            }
        }
    }

    /// After phase 1, swap basic artificials for structural columns where a
    /// nonzero pivot exists; redundant rows keep their artificial pinned at 0.
    fn drive_out_artificials(&mut self) -> Result<(), LpError> {
        let n = self.n();
        let slots: Vec<usize> = (0..self.m()).filter(|&s| self.basis[s] >= n).collect();
        if slots.is_empty() {
            return Ok(());
        }
        for slot in slots {
            // Find a structural nonbasic column with a usable pivot in this row.
            let mut er = vec![0.0; self.m()];
            er[slot] = 1.0;
            self.btran(&mut er); // row `slot` of B⁻¹
            let mut found = None;
            for j in 0..n {
                if matches!(self.state[j], VarState::Basic(_)) || self.lower[j] == self.upper[j] {
                    continue;
                }
                let alpha = sparse_dot(&er, self.col(j));
                if alpha.abs() > 1e-7 {
                    found = Some(j);
                    break;
                }
            }
            if let Some(q) = found {
                let mut w = vec![0.0; self.m()];
                for &(r, a) in self.col(q) {
                    w[r] = a;
                }
                self.ftran(&mut w);
                let old = self.basis[slot];
                self.state[old] = VarState::AtLower; // artificial, pinned [0,0]
                self.basis[slot] = q;
                let start = match self.state[q] {
                    VarState::AtLower => self.lower[q],
                    VarState::AtUpper => self.upper[q],
                    VarState::Free => 0.0,
                    VarState::Basic(_) => unreachable!(),
                };
                self.state[q] = VarState::Basic(slot);
                // Degenerate swap: the artificial sat at 0, so values move by 0.
                self.xb[slot] = start;
                let wr = w[slot];
                let mut eta = vec![0.0; self.m()];
                for (i, e) in eta.iter_mut().enumerate() {
                    if i == slot {
                        *e = 1.0 / wr;
                    } else {
                        *e = -w[i] / wr;
                    }
                }
                self.etas.push(Eta { slot, col: eta });
                if self.etas.len() >= REFACTOR_EVERY {
                    self.refactorize()?;
                }
            }
        }
        self.refactorize()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn merit_order_dispatch() {
        // min 10a + 20b  s.t. a + b = 100, a ∈ [0,200], b ∈ [0,100]
        let mut p = Problem::new(1);
        p.set_rhs(0, 100.0);
        p.add_column(10.0, 0.0, 200.0, &[(0, 1.0)]);
        p.add_column(20.0, 0.0, 100.0, &[(0, 1.0)]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_abs_diff_eq!(s.x[0], 100.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 0.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.objective, 1000.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.duals[0], 10.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.reduced_costs[1], 10.0, epsilon = 1e-9);
    }

    #[test]
    fn upper_bound_duals() {
        // min -x1 - 2 x2  s.t. x1 + x2 = 1.5, x ∈ [0,1]²
        let mut p = Problem::new(1);
        p.set_rhs(0, 1.5);
        p.add_column(-1.0, 0.0, 1.0, &[(0, 1.0)]);
        p.add_column(-2.0, 0.0, 1.0, &[(0, 1.0)]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_abs_diff_eq!(s.x[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.duals[0], -1.0, epsilon = 1e-9);
        assert!(s.reduced_costs[1] <= 1e-9, "at upper bound, d ≤ 0");
        assert_abs_diff_eq!(s.objective, s.dual_objective(&p), epsilon = 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // x = 5 with x ∈ [0,1]
        let mut p = Problem::new(1);
        p.set_rhs(0, 5.0);
        p.add_column(1.0, 0.0, 1.0, &[(0, 1.0)]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        // min -x, x ≥ 0, no rows
        let mut p = Problem::new(0);
        p.add_column(-1.0, 0.0, f64::INFINITY, &[]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Unbounded);
    }

    #[test]
    fn free_variables() {
        // min x + y  s.t. x − t = 3, y + t = 2; x,y ≥ 0, t free.
        let mut p = Problem::new(2);
        p.set_rhs(0, 3.0);
        p.set_rhs(1, 2.0);
        p.add_column(1.0, 0.0, f64::INFINITY, &[(0, 1.0)]);
        p.add_column(1.0, 0.0, f64::INFINITY, &[(1, 1.0)]);
        p.add_column(0.0, f64::NEG_INFINITY, f64::INFINITY, &[(0, -1.0), (1, 1.0)]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_abs_diff_eq!(s.objective, 5.0, epsilon = 1e-9);
    }

    #[test]
    fn negative_rhs_rows() {
        // Balance row written with negative rhs exercises artificial signs.
        // min x  s.t. -x = -4, x ∈ [0, 10]
        let mut p = Problem::new(1);
        p.set_rhs(0, -4.0);
        p.add_column(1.0, 0.0, 10.0, &[(0, -1.0)]);
        let s = solve(&p).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert_abs_diff_eq!(s.x[0], 4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.duals[0], -1.0, epsilon = 1e-9);
    }

    /// Random feasible LPs: verify KKT conditions, which certify optimality
    /// independently of the pivoting path.
    #[test]
    fn random_lps_satisfy_kkt() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..300 {
            let m = rng.gen_range(1..6);
            let n = rng.gen_range(m..m + 7);
            let mut p = Problem::new(m);
            // Feasible by construction: pick x0 in bounds, set b = A x0.
            let mut x0 = Vec::with_capacity(n);
            let mut cols = Vec::new();
            for _ in 0..n {
                let lo = rng.gen_range(-5.0..0.0);
                let hi = lo + rng.gen_range(0.5..6.0);
                let lo = if rng.gen_bool(0.15) { f64::NEG_INFINITY } else { lo };
                let hi = if rng.gen_bool(0.15) { f64::INFINITY } else { hi };
                let x = match (lo.is_finite(), hi.is_finite()) {
                    (true, true) => rng.gen_range(lo..=hi),
                    (true, false) => lo + rng.gen_range(0.0..3.0),
                    (false, true) => hi - rng.gen_range(0.0..3.0),
                    (false, false) => rng.gen_range(-2.0..2.0),
                };
                let mut entries = Vec::new();
                for r in 0..m {
                    if rng.gen_bool(0.7) {
                        entries.push((r, rng.gen_range(-3.0..3.0)));
                    }
                }
                x0.push(x);
                cols.push((rng.gen_range(-4.0..4.0), lo, hi, entries));
            }
            let mut b = vec![0.0; m];
            for (j, (_, _, _, entries)) in cols.iter().enumerate() {
                for &(r, a) in entries {
                    b[r] += a * x0[j];
                }
            }
            for (r, &v) in b.iter().enumerate() {
                p.set_rhs(r, v);
            }
            for (c, lo, hi, entries) in &cols {
                p.add_column(*c, *lo, *hi, entries);
            }
            let s = solve(&p).unwrap();
            match s.status {
                Status::Optimal => {
                    // Primal feasibility.
                    let mut ax = vec![0.0; m];
                    for (j, (_, lo, hi, entries)) in cols.iter().enumerate() {
                        assert!(s.x[j] >= lo - 1e-6 && s.x[j] <= hi + 1e-6, "trial {trial}: bound violated");
                        for &(r, a) in entries {
                            ax[r] += a * s.x[j];
                        }
                    }
                    for r in 0..m {
                        assert!((ax[r] - b[r]).abs() < 1e-6, "trial {trial}: row {r} violated");
                    }
                    // Dual feasibility + complementary slackness.
                    for (j, (c, lo, hi, entries)) in cols.iter().enumerate() {
                        let d = c - sparse_dot(&s.duals, entries);
                        let at_lower = lo.is_finite() && (s.x[j] - lo).abs() < 1e-6;
                        let at_upper = hi.is_finite() && (hi - s.x[j]).abs() < 1e-6;
                        if !at_lower && !at_upper {
                            assert!(d.abs() < 1e-6, "trial {trial}: interior var with d={d}");
                        } else if at_lower && !at_upper {
                            assert!(d > -1e-6, "trial {trial}: at lower with d={d}");
                        } else if at_upper && !at_lower {
                            assert!(d < 1e-6, "trial {trial}: at upper with d={d}");
                        }
                    }
                    // Strong duality.
                    let gap = (s.objective - s.dual_objective(&p)).abs();
                    assert!(gap <= 1e-6 * (1.0 + s.objective.abs()), "trial {trial}: duality gap {gap}");
                }
                Status::Unbounded => {} // legal with free vars and random costs
                Status::Infeasible => panic!("trial {trial}: constructed-feasible LP reported infeasible"),
            }
        }
    }
}
