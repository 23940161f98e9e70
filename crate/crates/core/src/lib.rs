//! Joint CSIT acquisition for FDD massive MIMO.
//!
//! Users feed their raw downlink pilot observations back over an analog
//! uplink, and the base station recovers the whole `K x M` channel matrix at
//! once by exploiting its low rank. The crate covers the channel model, the
//! training/feedback chain, singular-value-projection solvers, the per-user
//! least-squares baseline, and a seeded Monte Carlo harness.

pub mod baselines;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod pilot;
pub mod random;
pub mod svp;

pub use baselines::{ls_per_user, LsEstimate};
pub use channel::{
    assemble_channel, gen_gain_matrix, make_aod_grid, random_aods, steering_vector, AodGrid, AodMode, ArrayGeometry,
    ChannelScene,
};
pub use error::{Error, Result};
pub use experiment::{nmse, run_trial, ExperimentConfig, Method, TrialRecord};
pub use linalg::CMatrix;
pub use num_complex::Complex64;
pub use pilot::{downlink_observe, gen_pilot_matrix, recover_observation, uplink_feedback, ObservationSet, PilotMatrix, Snr};
pub use svp::{cost, gradient, newton_solution, optimal_step, solve, svp, SolverState, SvpConfig, SvpMode};
