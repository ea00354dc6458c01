//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::execute;
use crate::config::{load_config, CaseStudySection, Config, MeanFieldSection, OptimizerSection, OutputSection};
use crate::error::CliError;
use crate::formats::DataFormat;
use crate::summary::{Command, RunManifest, RunSummary};

pub const OUT_ENV: &str = "LANCHESTER_OUT";
pub const WORKERS_ENV: &str = "LANCHESTER_WORKERS";

#[derive(Debug, Parser)]
#[command(
    name = "lanchester",
    version,
    about = "Networked Lanchester battles: simulate, optimize, sweep"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Configuration file (TOML, or JSON by extension).
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, env = OUT_ENV, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for independent jobs; 0 picks one per core.
    #[arg(short, long, env = WORKERS_ENV, default_value_t = 0)]
    pub workers: usize,
    /// Format of tabular outputs.
    #[arg(long, value_enum, default_value_t = DataFormat::Csv)]
    pub format: DataFormat,
    /// Overrides the configuration's seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Integrate one battle and write its trajectory.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Steps between trajectory samples.
        #[arg(long)]
        record_every: Option<usize>,
    },
    /// Hill-climb Red's networks for one trade-off value.
    Optimize {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Optimize replicas over lambda and Red kill-rate grids.
    Sweep {
        #[command(flatten)]
        common: Common,
    },
    /// Battle outcome over a grid of two rate parameters.
    Heatmap {
        #[command(flatten)]
        common: Common,
    },
    /// The two-versus-four reserve study.
    Casestudy {
        #[command(flatten)]
        common: Common,
        /// 1: equal plus reserves, 2: equal total, 3: extra reserves.
        #[arg(long)]
        case: Option<u32>,
        #[arg(long = "f-r")]
        f_r: Option<f64>,
        #[arg(long = "kappa-r")]
        kappa_r: Option<f64>,
    },
    /// Two-group mean-field tables.
    Meanfield {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "kappa-r")]
        kappa_r: Option<f64>,
        #[arg(long = "kappa-b")]
        kappa_b: Option<f64>,
    },
    /// Check a configuration file and print it with defaults filled in.
    Validate { config: PathBuf },
    /// Repeat a run from its summary.json.
    Rerun {
        summary: PathBuf,
        /// Output directory; the original one when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(short, long, env = WORKERS_ENV)]
        workers: Option<usize>,
    },
}

fn base_config(common: &Common) -> Result<Config, CliError> {
    let mut config = match &common.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn manifest(command: Command, common: &Common, config: &Config) -> RunManifest {
    RunManifest {
        command,
        config_path: common.config.clone(),
        output_dir: common.out.clone(),
        seed: config.seed,
        workers: common.workers,
        format: common.format,
    }
}

fn set<T>(slot: &mut Option<T>, value: Option<T>) -> bool {
    match value {
        Some(v) => {
            *slot = Some(v);
            true
        }
        None => false,
    }
}

/// Applies flags to the configuration and returns what to run.
pub fn prepare(cmd: Cmd) -> Result<(RunManifest, Config), CliError> {
    let (command, common, config) = match cmd {
        Cmd::Simulate { common, record_every } => {
            let mut config = base_config(&common)?;
            if record_every.is_some() {
                let out = config.output.get_or_insert_with(OutputSection::default);
                set(&mut out.record_every, record_every);
            }
            (Command::Simulate, common, config)
        }
        Cmd::Optimize {
            common,
            lambda,
            iterations,
        } => {
            let mut config = base_config(&common)?;
            if lambda.is_some() || iterations.is_some() {
                let opt = match (&mut config.optimizer, iterations) {
                    (Some(opt), _) => opt,
                    (slot @ None, Some(iterations)) => slot.insert(OptimizerSection {
                        lambda: None,
                        iterations,
                        moves: Default::default(),
                    }),
                    (None, None) => {
                        return Err(CliError::config(
                            "--lambda needs --iterations or an [optimizer] section",
                        ))
                    }
                };
                set(&mut opt.lambda, lambda);
                if let Some(i) = iterations {
                    opt.iterations = i;
                }
            }
            (Command::Optimize, common, config)
        }
        Cmd::Sweep { common } => {
            let config = base_config(&common)?;
            (Command::Sweep, common, config)
        }
        Cmd::Heatmap { common } => {
            let config = base_config(&common)?;
            (Command::Heatmap, common, config)
        }
        Cmd::Casestudy {
            common,
            case,
            f_r,
            kappa_r,
        } => {
            let mut config = base_config(&common)?;
            match &mut config.casestudy {
                Some(cs) => {
                    cs.case = case.unwrap_or(cs.case);
                    cs.f_r = f_r.unwrap_or(cs.f_r);
                    cs.kappa_red = kappa_r.unwrap_or(cs.kappa_red);
                }
                None => {
                    let (Some(case), Some(f_r), Some(kappa_red)) = (case, f_r, kappa_r) else {
                        return Err(CliError::config(
                            "casestudy needs --case, --f-r and --kappa-r or a [casestudy] section",
                        ));
                    };
                    config.casestudy = Some(CaseStudySection {
                        case,
                        f_r,
                        kappa_red,
                        red_wiring: lanchester_core::scenarios::DEFAULT_RESERVE_WIRING
                            .iter()
                            .map(|&(a, b)| [a, b])
                            .collect(),
                        curve: None,
                    });
                }
            }
            (Command::Casestudy, common, config)
        }
        Cmd::Meanfield {
            common,
            n,
            kappa_r,
            kappa_b,
        } => {
            let mut config = base_config(&common)?;
            if config.meanfield.is_none() {
                let Some(n) = n else {
                    return Err(CliError::config("meanfield needs --n or a [meanfield] section"));
                };
                config.meanfield = Some(MeanFieldSection {
                    n,
                    kappa_red: 1.0,
                    kappa_blue: 1.0,
                    r0: 1.0,
                    b0: 1.0,
                    split: None,
                    dt: 0.01,
                    steps: 1000,
                });
            }
            let mf = config.meanfield.as_mut().expect("set above");
            mf.n = n.unwrap_or(mf.n);
            mf.kappa_red = kappa_r.unwrap_or(mf.kappa_red);
            mf.kappa_blue = kappa_b.unwrap_or(mf.kappa_blue);
            (Command::Meanfield, common, config)
        }
        Cmd::Validate { .. } | Cmd::Rerun { .. } => unreachable!("handled by run"),
    };
    config.revalidate()?;
    Ok((manifest(command, &common, &config), config))
}

/// Executes parsed arguments, printing a one-line result or the resolved
/// configuration.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Cmd::Validate { config } => {
            let parsed = load_config(&config)?;
            print!("{}", parsed.to_toml());
            Ok(())
        }
        Cmd::Rerun { summary, out, workers } => {
            let previous = RunSummary::read(&summary)?;
            previous.config.revalidate()?;
            let mut manifest = previous.manifest.clone();
            if let Some(out) = out {
                manifest.output_dir = out;
            }
            if let Some(w) = workers {
                manifest.workers = w;
            }
            let s = execute(&manifest, &previous.config)?;
            report(&s);
            Ok(())
        }
        cmd => {
            let (manifest, config) = prepare(cmd)?;
            let s = execute(&manifest, &config)?;
            report(&s);
            Ok(())
        }
    }
}

fn report(s: &RunSummary) {
    println!(
        "{} finished in {:.2}s; wrote {} files to {}",
        s.manifest.command.as_str(),
        s.elapsed_seconds,
        s.artifacts.len() + 1,
        s.manifest.output_dir.display()
    );
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            e.exit_code()
        }
    }
}
