//! DC-power-flow sensitivity analysis and vertex-cut grid decomposition.
//!
//! The crate models a transmission grid as a weighted graph, solves DC optimal
//! power flow as an LP with full dual (LMP / shadow price) extraction, computes
//! the standard sensitivity factors (injection shift factors, PTDFs, LODFs),
//! and uses an LMP-driven vertex-cut decomposition to restrict the search space
//! of greedy transmission-switching heuristics.
//!
//! Modules mirror the processing pipeline:
//!
//! - [`netmodel`] — grid data model, validation, MATPOWER / JSON case ingestion
//! - [`dcflow`] — susceptance (Laplacian) matrices, DC power flow, Kron reduction
//! - [`sensitivity`] — shift factor matrix Ψ, PTDFs, LODF matrix ζ
//! - [`lp`] — bounded-variable revised simplex with dual extraction
//! - [`dcopf`] — DC optimal power flow, LMPs, shadow prices, MAS benchmarks
//! - [`graphdecomp`] — cut vertices, pseudo biconnected components, LMP decomposition
//! - [`topocontrol`] — Standard and Local Greedy switching heuristics
//! - [`montecarlo`] — seeded Monte Carlo benchmark harness
//! - [`synth`] — random connected test grids for property checks and benchmarks

pub mod dcflow;
pub mod lp;
pub mod netmodel;

pub use dcflow::{DcState, ReducedSusceptance, SusceptanceMatrix};
pub use netmodel::{Bus, BusId, Diagnostic, GenId, Generator, GridCase, Line, LineId};
