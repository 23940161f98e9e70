use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use jointcsit_core::experiment::{ExperimentConfig, Method};
use jointcsit_core::{AodMode, Snr};

use crate::config_file;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "jointcsit", version, about = "Joint CSIT acquisition experiments for FDD massive MIMO")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// NMSE against iteration count at a fixed training length.
    Iters(ExperimentArgs),
    /// Final NMSE against the training length T.
    #[command(name = "sweep-t")]
    SweepT(ExperimentArgs),
    /// Per-iteration dump of a single trial.
    Trial {
        #[command(flatten)]
        args: ExperimentArgs,
        /// Index of the trial to run.
        #[arg(long, default_value_t = 0)]
        trial_index: usize,
    },
}

/// Flags override values from `--config`, which override the built-in defaults.
#[derive(Debug, Args, Default, Clone)]
pub struct ExperimentArgs {
    /// Plain-text file of `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// BS antennas M.
    #[arg(long)]
    pub m: Option<String>,
    /// Users K.
    #[arg(long)]
    pub k: Option<String>,
    /// Propagation paths P.
    #[arg(long)]
    pub p: Option<String>,
    /// Projection rank q.
    #[arg(long)]
    pub q: Option<String>,
    /// Training length T.
    #[arg(long)]
    pub t: Option<String>,
    /// Comma-separated training lengths for sweep-t.
    #[arg(long = "t-list")]
    pub t_list: Option<String>,
    /// Iterations per solve.
    #[arg(long)]
    pub imax: Option<String>,
    /// Downlink SNR in dB, or `inf`.
    #[arg(long = "snr-dl")]
    pub snr_dl: Option<String>,
    /// Uplink SNR in dB, or `inf`.
    #[arg(long = "snr-ul")]
    pub snr_ul: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Comma-separated subset of LS, SVP-G, SVP-N, SVP-H.
    #[arg(long)]
    pub methods: Option<String>,
    /// `grid` or `random`.
    #[arg(long = "aod-mode")]
    pub aod_mode: Option<String>,
    /// Antenna spacing over wavelength.
    #[arg(long)]
    pub spacing: Option<String>,
    /// Early-stop threshold on relative cost change; 0 disables.
    #[arg(long = "rel-tol")]
    pub rel_tol: Option<String>,
    /// Output CSV path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T, CliError> {
    v.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("invalid value '{v}' for {key}")))
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, CliError> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_num(key, s)).collect()
}

fn parse_aod_mode(v: &str) -> Result<AodMode, CliError> {
    match v.trim().to_ascii_lowercase().as_str() {
        "grid" => Ok(AodMode::Grid),
        "random" => Ok(AodMode::Random),
        other => Err(CliError::Config(format!("aod-mode must be 'grid' or 'random', got '{other}'"))),
    }
}

fn parse_snr(key: &str, v: &str) -> Result<Snr, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("invalid SNR '{v}' for {key}")))
}

impl ExperimentArgs {
    fn flag_entries(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("m", &self.m),
            ("k", &self.k),
            ("p", &self.p),
            ("q", &self.q),
            ("t", &self.t),
            ("t-list", &self.t_list),
            ("imax", &self.imax),
            ("snr-dl", &self.snr_dl),
            ("snr-ul", &self.snr_ul),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("methods", &self.methods),
            ("aod-mode", &self.aod_mode),
            ("spacing", &self.spacing),
            ("rel-tol", &self.rel_tol),
        ]
    }

    /// Merged configuration and output path.
    pub fn resolve(&self) -> Result<(ExperimentConfig, Option<PathBuf>), CliError> {
        let mut values: BTreeMap<String, String> = match &self.config {
            Some(path) => config_file::load(path)?,
            None => BTreeMap::new(),
        };
        for (key, flag) in self.flag_entries() {
            if let Some(v) = flag {
                values.insert(key.to_string(), v.clone());
            }
        }
        let mut out = values.remove("out").map(PathBuf::from);
        if let Some(path) = &self.out {
            out = Some(path.clone());
        }

        let mut cfg = ExperimentConfig::default();
        for (key, v) in &values {
            match key.as_str() {
                "m" => cfg.num_antennas = parse_num(key, v)?,
                "k" => cfg.num_users = parse_num(key, v)?,
                "p" => cfg.num_paths = parse_num(key, v)?,
                "q" => cfg.rank = parse_num(key, v)?,
                "t" => cfg.num_uses = parse_num(key, v)?,
                "t-list" => cfg.t_sweep = parse_list(key, v)?,
                "imax" => cfg.max_iters = parse_num(key, v)?,
                "snr-dl" => cfg.downlink_snr = parse_snr(key, v)?,
                "snr-ul" => cfg.uplink_snr = parse_snr(key, v)?,
                "trials" => cfg.num_trials = parse_num(key, v)?,
                "seed" => cfg.base_seed = parse_num(key, v)?,
                "methods" => {
                    let mut methods: Vec<Method> = parse_list(key, v)?;
                    methods.dedup();
                    cfg.methods = methods;
                }
                "aod-mode" => cfg.aod_mode = parse_aod_mode(v)?,
                "spacing" => cfg.spacing_ratio = parse_num(key, v)?,
                "rel-tol" => cfg.rel_tol = parse_num(key, v)?,
                other => return Err(CliError::Config(format!("unknown key '{other}'"))),
            }
        }
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok((cfg, out))
    }
}
