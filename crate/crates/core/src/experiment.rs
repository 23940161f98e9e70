//! Seeded Monte Carlo studies: NMSE against iteration count and against the
//! number of training channel uses.
//!
//! Every random draw of trial `i` comes from a stream keyed by
//! `(base_seed, i, role)` (see [`crate::random`]), so the channel and noise
//! realizations do not depend on which methods are enabled or on scheduling.
//! Trials run in parallel and are merged in index order.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::baselines::ls_per_user;
use crate::channel::{assemble_channel, gen_gain_matrix, make_aod_grid, random_aods, AodMode, ArrayGeometry, ChannelScene};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::pilot::{gen_pilot_matrix, observe_and_feed_back, ObservationSet, PilotMatrix, Snr};
use crate::random::{stream_rng, trial_seed, StreamRole};
use crate::svp::{solve_with_observer, SvpConfig, SvpMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Ls,
    SvpG,
    SvpN,
    SvpH,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Ls, Method::SvpG, Method::SvpN, Method::SvpH];

    pub fn label(self) -> &'static str {
        match self {
            Method::Ls => "LS",
            Method::SvpG => "SVP-G",
            Method::SvpN => "SVP-N",
            Method::SvpH => "SVP-H",
        }
    }

    pub fn solver_mode(self) -> Option<SvpMode> {
        match self {
            Method::Ls => None,
            Method::SvpG => Some(SvpMode::Gradient),
            Method::SvpN => Some(SvpMode::Newton),
            Method::SvpH => Some(SvpMode::Hybrid),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        Method::ALL
            .into_iter()
            .find(|m| m.label() == upper || m.label().replace('-', "") == upper)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{}'", s.trim())))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub num_antennas: usize,
    pub num_users: usize,
    pub num_paths: usize,
    pub rank: usize,
    pub spacing_ratio: f64,
    /// Training length for the iteration study and single trials.
    pub num_uses: usize,
    /// Training lengths for the sweep.
    pub t_sweep: Vec<usize>,
    pub max_iters: usize,
    pub downlink_snr: Snr,
    pub uplink_snr: Snr,
    pub num_trials: usize,
    pub base_seed: u64,
    pub methods: Vec<Method>,
    pub aod_mode: AodMode,
    pub rel_tol: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            num_antennas: 64,
            num_users: 20,
            num_paths: 10,
            rank: 6,
            spacing_ratio: 0.3,
            num_uses: 85,
            t_sweep: (65..=97).step_by(4).collect(),
            max_iters: 250,
            downlink_snr: Snr::Db(25.0),
            uplink_snr: Snr::Db(25.0),
            num_trials: 100,
            base_seed: 1,
            methods: Method::ALL.to_vec(),
            aod_mode: AodMode::Grid,
            rel_tol: 0.0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.num_antennas == 0 || self.num_users == 0 || self.num_paths == 0 {
            return bad("M, K and P must all be at least 1".into());
        }
        if self.num_antennas < self.num_users {
            return Err(Error::FeedbackRankDeficiency {
                antennas: self.num_antennas,
                users: self.num_users,
            });
        }
        if self.rank == 0 || self.rank > self.num_users.min(self.num_antennas) {
            return bad(format!("q = {} must lie in 1..=min(K, M)", self.rank));
        }
        if self.num_uses == 0 || self.t_sweep.contains(&0) {
            return bad("training length T must be at least 1".into());
        }
        if self.max_iters == 0 {
            return bad("i_max must be at least 1".into());
        }
        if self.num_trials == 0 {
            return bad("need at least one trial".into());
        }
        if self.methods.is_empty() {
            return bad("method set is empty".into());
        }
        if !(self.rel_tol >= 0.0 && self.rel_tol.is_finite()) {
            return bad("rel_tol must be >= 0".into());
        }
        ArrayGeometry::new(self.num_antennas, self.spacing_ratio)?;
        Ok(())
    }

    fn solver_config(&self, mode: SvpMode) -> SvpConfig {
        SvpConfig {
            rank: self.rank,
            max_iters: self.max_iters,
            mode,
            rel_tol: self.rel_tol,
        }
    }
}

/// `||H_est - H||_F^2 / ||H||_F^2`.
pub fn nmse(estimate: &CMatrix, truth: &CMatrix) -> Result<f64> {
    if estimate.shape() != truth.shape() {
        return Err(Error::dims(
            "nmse",
            format!("{}x{}", truth.nrows(), truth.ncols()),
            format!("{}x{}", estimate.nrows(), estimate.ncols()),
        ));
    }
    let energy = linalg::frobenius_sq(truth);
    if energy == 0.0 {
        return Err(Error::InvalidParameter("NMSE undefined for an all-zero channel".into()));
    }
    Ok(linalg::frobenius_sq(&(estimate - truth)) / energy)
}

/// Outcome of one method on one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub trial_seed: u64,
    pub method: Method,
    pub num_uses: usize,
    /// One entry per iteration for solvers (padded with the last value if the
    /// solver stopped early); a single entry for LS.
    pub nmse_trace: Vec<f64>,
    pub final_nmse: f64,
    pub duration: Duration,
}

impl TrialRecord {
    /// NMSE after `iteration` (1-based); LS is iteration independent.
    pub fn nmse_at(&self, iteration: usize) -> f64 {
        let idx = iteration.saturating_sub(1).min(self.nmse_trace.len() - 1);
        self.nmse_trace[idx]
    }
}

/// Realizations shared by all methods of one trial.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub trial_seed: u64,
    pub scene: ChannelScene,
    pub pilots: PilotMatrix,
    pub observations: ObservationSet,
}

pub fn prepare_trial(config: &ExperimentConfig, trial_index: usize, num_uses: usize) -> Result<TrialData> {
    let seed = trial_seed(config.base_seed, trial_index as u64);
    let geometry = ArrayGeometry::new(config.num_antennas, config.spacing_ratio)?;
    let grid = match config.aod_mode {
        AodMode::Grid => make_aod_grid(config.num_paths)?,
        AodMode::Random => random_aods(config.num_paths, &mut stream_rng(seed, StreamRole::Angles))?,
    };
    let gains = gen_gain_matrix(config.num_users, config.num_paths, &mut stream_rng(seed, StreamRole::Gains))?;
    let scene = assemble_channel(gains, grid, geometry)?;
    let pilots = gen_pilot_matrix(config.num_antennas, num_uses, &mut stream_rng(seed, StreamRole::Pilots))?;
    let observations = observe_and_feed_back(
        scene.channel(),
        &pilots,
        config.downlink_snr,
        config.uplink_snr,
        &mut stream_rng(seed, StreamRole::DownlinkNoise),
        &mut stream_rng(seed, StreamRole::UplinkChannel),
        &mut stream_rng(seed, StreamRole::UplinkNoise),
    )?;
    Ok(TrialData {
        trial_seed: seed,
        scene,
        pilots,
        observations,
    })
}

/// Runs every configured method on one prepared trial.
///
/// Solvers consume the BS-side `Y_hat`; LS consumes the users' own `Y`.
pub fn run_methods(config: &ExperimentConfig, trial_index: usize, data: &TrialData) -> Result<Vec<TrialRecord>> {
    let truth = data.scene.channel();
    let phi = data.pilots.phi();
    config
        .methods
        .iter()
        .map(|&method| {
            let started = Instant::now();
            let (nmse_trace, final_nmse) = match method.solver_mode() {
                None => {
                    let est = ls_per_user(&data.observations.y, phi)?;
                    let e = nmse(&est.channel, truth)?;
                    (vec![e], e)
                }
                Some(mode) => {
                    let mut trace = Vec::with_capacity(config.max_iters);
                    let mut trace_err = None;
                    let (est, _) = solve_with_observer(
                        &data.observations.y_hat,
                        phi,
                        &config.solver_config(mode),
                        None,
                        |view| match nmse(view.projected, truth) {
                            Ok(e) => trace.push(e),
                            Err(e) => trace_err = Some(e),
                        },
                    )?;
                    if let Some(e) = trace_err {
                        return Err(e);
                    }
                    let e = nmse(&est, truth)?;
                    if trace.is_empty() {
                        trace.push(e);
                    }
                    trace.resize(config.max_iters, e);
                    (trace, e)
                }
            };
            if !final_nmse.is_finite() || nmse_trace.iter().any(|e| !e.is_finite()) {
                return Err(Error::NumericalFailure {
                    iteration: 0,
                    reason: format!("non-finite NMSE for {method}"),
                });
            }
            Ok(TrialRecord {
                trial_index,
                trial_seed: data.trial_seed,
                method,
                num_uses: phi.ncols(),
                nmse_trace,
                final_nmse,
                duration: started.elapsed(),
            })
        })
        .collect()
}

/// One trial at the configured training length.
pub fn run_trial(config: &ExperimentConfig, trial_index: usize) -> Result<Vec<TrialRecord>> {
    run_trial_at(config, trial_index, config.num_uses)
}

pub fn run_trial_at(config: &ExperimentConfig, trial_index: usize, num_uses: usize) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let wrap = |e: Error| Error::Trial {
        trial: trial_index,
        source: Box::new(e),
    };
    let data = prepare_trial(config, trial_index, num_uses).map_err(wrap)?;
    run_methods(config, trial_index, &data).map_err(wrap)
}

/// All trials at one training length, in trial order. Any failure aborts the run.
pub fn run_trials(config: &ExperimentConfig, num_uses: usize) -> Result<Vec<Vec<TrialRecord>>> {
    config.validate()?;
    (0..config.num_trials)
        .into_par_iter()
        .map(|i| run_trial_at(config, i, num_uses))
        .collect()
}

/// Arithmetic mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRow {
    pub method: Method,
    pub iteration: usize,
    pub mean_nmse: f64,
    pub std_nmse: f64,
    pub num_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub method: Method,
    pub num_uses: usize,
    pub mean_final_nmse: f64,
    pub std: f64,
    pub num_trials: usize,
}

fn records_for(trials: &[Vec<TrialRecord>], method: Method) -> Vec<&TrialRecord> {
    trials.iter().flat_map(|t| t.iter().filter(move |r| r.method == method)).collect()
}

/// Mean and spread of NMSE per method and iteration at `config.num_uses`.
pub fn iteration_study(config: &ExperimentConfig) -> Result<Vec<IterationRow>> {
    let trials = run_trials(config, config.num_uses)?;
    let mut rows = Vec::with_capacity(config.methods.len() * config.max_iters);
    for &method in &config.methods {
        let records = records_for(&trials, method);
        for iteration in 1..=config.max_iters {
            let values: Vec<f64> = records.iter().map(|r| r.nmse_at(iteration)).collect();
            let (mean_nmse, std_nmse) = mean_std(&values);
            rows.push(IterationRow {
                method,
                iteration,
                mean_nmse,
                std_nmse,
                num_trials: values.len(),
            });
        }
    }
    Ok(rows)
}

/// Final NMSE per method and training length.
pub fn t_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if config.t_sweep.is_empty() {
        return Err(Error::InvalidParameter("T sweep list is empty".into()));
    }
    let mut rows = Vec::new();
    for &t in &config.t_sweep {
        let trials = run_trials(config, t)?;
        for &method in &config.methods {
            let values: Vec<f64> = records_for(&trials, method).iter().map(|r| r.final_nmse).collect();
            let (mean, std) = mean_std(&values);
            rows.push(SweepRow {
                method,
                num_uses: t,
                mean_final_nmse: mean,
                std,
                num_trials: values.len(),
            });
        }
    }
    Ok(rows)
}

pub const ITERATION_HEADER: &str = "method,iteration,mean_nmse,std_nmse,num_trials";
pub const SWEEP_HEADER: &str = "method,T,mean_final_nmse,std,num_trials";
pub const TRIAL_HEADER: &str = "method,iteration,nmse";

/// Thirteen significant digits in scientific notation.
pub fn format_value(v: f64) -> String {
    format!("{v:.12e}")
}

pub fn iteration_csv(rows: &[IterationRow]) -> String {
    let mut out = String::with_capacity(48 * (rows.len() + 1));
    out.push_str(ITERATION_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.method,
            r.iteration,
            format_value(r.mean_nmse),
            format_value(r.std_nmse),
            r.num_trials
        );
    }
    out
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.method,
            r.num_uses,
            format_value(r.mean_final_nmse),
            format_value(r.std),
            r.num_trials
        );
    }
    out
}

/// Per-iteration dump of one trial. LS is reported once, at iteration 0.
pub fn trial_csv(records: &[TrialRecord]) -> String {
    let mut out = String::new();
    out.push_str(TRIAL_HEADER);
    out.push('\n');
    for r in records {
        if r.method == Method::Ls {
            let _ = writeln!(out, "{},0,{}", r.method, format_value(r.final_nmse));
            continue;
        }
        for (i, e) in r.nmse_trace.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", r.method, i + 1, format_value(*e));
        }
    }
    out
}

pub fn run_iteration_study(config: &ExperimentConfig) -> Result<String> {
    Ok(iteration_csv(&iteration_study(config)?))
}

pub fn run_t_sweep(config: &ExperimentConfig) -> Result<String> {
    Ok(sweep_csv(&t_sweep(config)?))
}

/// Mean NMSE curve of one method, indexed by iteration - 1.
pub fn mean_curve(rows: &[IterationRow], method: Method) -> Vec<f64> {
    rows.iter().filter(|r| r.method == method).map(|r| r.mean_nmse).collect()
}

/// First iteration (1-based) whose value is within `rel` of the curve's last value.
pub fn iterations_to_within(curve: &[f64], rel: f64) -> Option<usize> {
    let last = *curve.last()?;
    curve.iter().position(|&v| v <= last * (1.0 + rel)).map(|i| i + 1)
}

/// Smallest swept `T` at which `method` reaches mean NMSE `<= threshold`.
pub fn first_t_reaching(rows: &[SweepRow], method: Method, threshold: f64) -> Option<usize> {
    rows.iter()
        .filter(|r| r.method == method && r.mean_final_nmse <= threshold)
        .map(|r| r.num_uses)
        .min()
}
