//! Uncoded communication against a correlated jammer: finite game model,
//! equilibrium conditions, best-response solvers, the scalar Gaussian case
//! and a Monte Carlo simulator.

// `!(a < b)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod game;
pub mod gaussian;
pub mod matching;
pub mod model;
pub mod sim;
pub mod simplex;
pub mod systems;

pub use error::{Error, Result};
pub use game::{
    block_jammer_lp, distortion_cost_curve, jammer_best_response, nash_gap,
    user_best_response_single_letter, BlockJammerPolicy, GameReport, NashOptions,
};
pub use gaussian::{GaussianSystem, LinearGaussianProfile};
pub use matching::{check_matched, MatchReport, Verdict};
pub use model::{CondKernel, JammedChannel, JsccsjSystem, Pmf, StrategyProfile};
pub use sim::{SimConfig, SimResult};
