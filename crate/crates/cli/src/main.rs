use std::path::PathBuf;
use std::process::ExitCode;

use aid_cli::commands::{self, synthetic_panel};
use aid_cli::config::{with_workers, RunConfig};
use aid_cli::dataset::{parse_dataset, write_dataset};
use aid_cli::output::{create, write_table};
use aid_core::simgen::StockoutLength;
use aid_core::SmoothMethod;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "aid",
    version,
    about = "Demand classification, stockout detection and forecasting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long, value_enum)]
    smoother: Option<Smoother>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    frequency: Option<usize>,
}

#[derive(Args)]
struct ForecastArgs {
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    origins: Option<usize>,
    #[arg(long)]
    fourier_order: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Smoother {
    Supsmu,
    Lowess,
}

#[derive(Subcommand)]
enum Command {
    /// Classify every series of a long-format CSV.
    Classify {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a simulation study.
    Simulate {
        #[command(subcommand)]
        study: Study,
    },
    /// Forecast every series with each approach and report RMSSE.
    Forecast {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        fc: ForecastArgs,
    },
    /// Order-up-to inventory simulation on top of the forecasts.
    Inventory {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        fc: ForecastArgs,
        /// Comma-separated target service levels.
        #[arg(long, value_delimiter = ',')]
        service_levels: Option<Vec<f64>>,
    },
}

#[derive(Subcommand)]
enum Study {
    /// Stockout detection ROC for scenario 1 to 4.
    Scenario {
        #[arg(long)]
        scenario: u8,
        #[arg(long)]
        replications: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Classification accuracy on the six generators.
    Dgp {
        #[arg(long)]
        replications: Option<usize>,
        /// Also run on promotion-contaminated series.
        #[arg(long)]
        promo: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Write a labelled synthetic panel in the input format.
    Panel {
        #[arg(long, default_value_t = 100)]
        per_kind: usize,
        #[arg(long, default_value_t = 120)]
        length: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::from_file(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = common.nu {
        cfg.nu = v;
    }
    if let Some(s) = common.smoother {
        cfg.smoother = match s {
            Smoother::Supsmu => SmoothMethod::Supsmu,
            Smoother::Lowess => SmoothMethod::Lowess,
        };
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.workers {
        cfg.workers = v;
    }
    if let Some(v) = common.frequency {
        cfg.frequency = v;
    }
    Ok(cfg)
}

fn apply_forecast(cfg: &mut RunConfig, fc: &ForecastArgs) {
    if let Some(v) = fc.horizon {
        cfg.horizon = v;
        cfg.origins = cfg.origins.min(v);
    }
    if let Some(v) = fc.origins {
        cfg.origins = v;
    }
    if let Some(v) = fc.fourier_order {
        cfg.fourier_order = v;
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Classify { input, common } => {
            let cfg = load(&common)?;
            cfg.validate()?;
            let data = parse_dataset(&input, cfg.frequency)?;
            let report = with_workers(cfg.workers, || commands::cmd_classify(&data, &cfg))?;
            commands::write_classify(&report, &common.out)?;
            eprintln!(
                "classified {} series ({} failed) into {}",
                report.series.len(),
                report.failures,
                common.out.display()
            );
        }
        Command::Simulate { study } => match study {
            Study::Scenario {
                scenario,
                replications,
                common,
            } => {
                let mut cfg = load(&common)?;
                if let Some(r) = replications {
                    cfg.replications = r;
                }
                cfg.validate()?;
                let settings =
                    with_workers(cfg.workers, || commands::cmd_simulate_scenario(scenario, &cfg))??;
                commands::write_scenario(&settings, &common.out)?;
                for s in &settings {
                    eprintln!(
                        "scenario {scenario} {}={}: AUC {:.3}",
                        s.parameter, s.value, s.curve.auc
                    );
                }
            }
            Study::Dgp {
                replications,
                promo,
                common,
            } => {
                let mut cfg = load(&common)?;
                if let Some(r) = replications {
                    cfg.replications = r;
                }
                cfg.promo |= promo;
                cfg.validate()?;
                let rows = with_workers(cfg.workers, || commands::cmd_simulate_dgp(&cfg))??;
                commands::write_accuracy(&rows, &common.out)?;
                eprintln!("wrote {} accuracy rows", rows.len());
            }
            Study::Panel {
                per_kind,
                length,
                common,
            } => {
                let cfg = load(&common)?;
                cfg.validate()?;
                let (data, truth) = synthetic_panel(
                    per_kind,
                    length,
                    2,
                    StockoutLength::Range(3, 8),
                    cfg.seed,
                    cfg.frequency,
                )?;
                write_dataset(create(&common.out.join("panel.csv"))?, &data, None)?;
                let rows: Vec<Vec<String>> = data
                    .series
                    .iter()
                    .zip(&truth)
                    .flat_map(|(s, t)| {
                        t.iter().enumerate().map(move |(i, f)| {
                            vec![s.id().to_string(), (i + 1).to_string(), u8::from(*f).to_string()]
                        })
                    })
                    .collect();
                write_table(
                    &common.out.join("panel_truth.csv"),
                    &["series_id", "period", "stockout"],
                    &rows,
                )?;
                eprintln!("wrote {} series", data.len());
            }
        },
        Command::Forecast { input, common, fc } => {
            let mut cfg = load(&common)?;
            apply_forecast(&mut cfg, &fc);
            cfg.validate()?;
            let data = parse_dataset(&input, cfg.frequency)?;
            let report = with_workers(cfg.workers, || commands::cmd_forecast(&data, &cfg))??;
            commands::write_forecast(&report, &common.out)?;
            eprintln!(
                "forecast {} series ({} skipped)",
                report.series_ids.len(),
                report.skipped.len()
            );
        }
        Command::Inventory {
            input,
            common,
            fc,
            service_levels,
        } => {
            let mut cfg = load(&common)?;
            apply_forecast(&mut cfg, &fc);
            if let Some(l) = service_levels {
                cfg.service_levels = l;
            }
            cfg.validate()?;
            let data = parse_dataset(&input, cfg.frequency)?;
            let report = with_workers(cfg.workers, || commands::cmd_inventory(&data, &cfg))??;
            commands::write_inventory(&report, &common.out)?;
            eprintln!("wrote {} inventory rows", report.rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
