mod args;
mod config_file;
mod error;

use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use jointcsit_core::experiment::{
    iteration_csv, iteration_study, iterations_to_within, mean_curve, prepare_trial, run_methods, sweep_csv, t_sweep,
    trial_csv, ExperimentConfig, Method,
};
use jointcsit_core::Error;

use args::{Cli, Command};
use error::CliError;

fn write_output(csv: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, csv)?,
        None => std::io::stdout().lock().write_all(csv.as_bytes())?,
    }
    Ok(())
}

fn describe(cfg: &ExperimentConfig) {
    eprintln!(
        "M={} K={} P={} q={} i_max={} SNR dl/ul={}/{} dB trials={} seed={} aod={:?}",
        cfg.num_antennas,
        cfg.num_users,
        cfg.num_paths,
        cfg.rank,
        cfg.max_iters,
        cfg.downlink_snr,
        cfg.uplink_snr,
        cfg.num_trials,
        cfg.base_seed,
        cfg.aod_mode
    );
    if cfg.methods.contains(&Method::Ls) {
        eprintln!("note: LS estimates from each user's own downlink observation (feedback of the estimate is ideal)");
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Iters(args) => {
            let (cfg, out) = args.resolve()?;
            describe(&cfg);
            let rows = iteration_study(&cfg)?;
            for &m in &cfg.methods {
                let curve = mean_curve(&rows, m);
                let last = curve.last().copied().unwrap_or(f64::NAN);
                match m {
                    Method::Ls => eprintln!("{m}: mean NMSE {last:.4e}"),
                    _ => eprintln!(
                        "{m}: final mean NMSE {last:.4e}, within 5% of final after {} iterations",
                        iterations_to_within(&curve, 0.05).unwrap_or(0)
                    ),
                }
            }
            write_output(&iteration_csv(&rows), out.as_deref())
        }
        Command::SweepT(args) => {
            let (cfg, out) = args.resolve()?;
            describe(&cfg);
            eprintln!("T sweep: {:?}", cfg.t_sweep);
            let rows = t_sweep(&cfg)?;
            write_output(&sweep_csv(&rows), out.as_deref())
        }
        Command::Trial { args, trial_index } => {
            let (cfg, out) = args.resolve()?;
            describe(&cfg);
            let wrap = |e: Error| Error::Trial {
                trial: trial_index,
                source: Box::new(e),
            };
            let data = prepare_trial(&cfg, trial_index, cfg.num_uses).map_err(wrap)?;
            let records = run_methods(&cfg, trial_index, &data).map_err(wrap)?;
            eprintln!(
                "trial {trial_index}: seed {:#018x}, T={}, sigma_n={:.4e}, sigma_w={:.4e}, rank(H)={}",
                data.trial_seed,
                cfg.num_uses,
                data.observations.sigma_n,
                data.observations.sigma_w,
                data.scene.numerical_rank()?
            );
            for r in &records {
                eprintln!("{}: final NMSE {:.4e} in {:.2?}", r.method, r.final_nmse, r.duration);
            }
            write_output(&trial_csv(&records), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
