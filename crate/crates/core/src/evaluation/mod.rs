//! Performance metrics, the NSGA-II baseline and the numerical oracles.

mod metrics;
mod nsga2;
mod oracles;

pub use metrics::{
    break_even_from_parts, break_even_time, effective_runtime, relative_dominated_volume, BreakEvenResult, RecordRow,
    RunRecord,
};
pub use nsga2::{nsgaii_run, Nsga2Config};
pub use oracles::{
    integrate, integrate_lower_tail, oracle_mc_evi, oracle_mc_hypervolume, oracle_mc_pnd, quadrature_i1,
    quadrature_i2, quadrature_i3, McEstimate,
};
