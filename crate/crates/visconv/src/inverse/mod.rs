//! The viscosity inverse problem: loss functional, a-priori condition
//! calculator, the contractive update map and its fixed-point loop, and the
//! full-state energy-balance oracle.

mod average;
mod bounds;
mod direct;
mod recover;

pub use average::exp_weighted_average;
pub use bounds::{bounds_report, mode_sum_exact, BoundsReport, LOG_CONST_C};
pub use direct::direct_viscosity;
pub use recover::{
    gamma_update, loss, recover_viscosity, RecoveryState, RecoveryStatus,
};
