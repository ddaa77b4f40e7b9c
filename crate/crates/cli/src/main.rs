use clap::{Parser, Subcommand};
use lqec_cli::commands::{cmd_analyze, cmd_fit, cmd_ladder, cmd_run, AnalyzeOp};
use lqec_cli::config::ExperimentConfig;
use lqec_cli::{default_out_root, exit_code, figures};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "lqec",
    version,
    about = "Leakage-aware QEC circuit simulator and analysis toolkit"
)]
struct Cli {
    /// Output root directory (default: $LQEC_OUTPUT_DIR or ./out).
    #[arg(long, global = true)]
    out_root: Option<PathBuf>,
    /// Worker threads (default: all cores). Results are identical for any
    /// worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build circuits, run shot batches, persist records and summaries.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the configured shot count.
        #[arg(long)]
        shots: Option<usize>,
    },
    /// Post-process executed run directories.
    Analyze {
        /// Point directories produced by `run`.
        #[arg(long, required = true)]
        run: Vec<PathBuf>,
        /// Comma-separated: detection,pij,correlations,logical,events.
        #[arg(long)]
        ops: String,
    },
    /// Two-transmon gate model: transport matrices and phase report.
    Ladder {
        /// Solve the operating point for this |30>-|12> transport.
        #[arg(long)]
        calibrate: Option<f64>,
        /// Coupling in rad/ns (with --eta).
        #[arg(long)]
        g: Option<f64>,
        /// Anharmonicity in rad/ns.
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, default_value_t = 25.0)]
        t_hold: f64,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Emit the relative (with-gate minus baseline) matrix.
        #[arg(long)]
        relative: bool,
        /// CSV output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a model to x,y CSV data.
    Fit {
        /// power | gompertz | linear
        #[arg(long)]
        model: String,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Injection sweep with suppression-ratio analysis (fig5c-style config).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        shots: Option<usize>,
    },
    /// Produce a bundled figure data set by id.
    Figure {
        /// fig1c fig3a fig3c fig4a fig5a fig5b fig5c figS4 figS5 figS6
        /// correlations
        #[arg(long)]
        id: String,
        #[arg(long)]
        shots: Option<usize>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
        {
            eprintln!("error: worker pool: {e}");
            std::process::exit(2);
        }
    }
    let out_root = cli.out_root.unwrap_or_else(default_out_root);
    let result = (|| -> lqec_core::Result<()> {
        match cli.cmd {
            Cmd::Run { config, shots } => {
                let mut cfg = ExperimentConfig::load(&config)?;
                if let Some(s) = shots {
                    cfg.shots = s;
                }
                let summary = cmd_run(&cfg, &out_root)?;
                println!("run {} -> {}", summary.config_hash, summary.dir.display());
                for p in &summary.points {
                    match &p.logical {
                        Some(l) => println!(
                            "  {}: logical {:.5} [{:.5}, {:.5}]",
                            p.label, l.p, l.ci_low, l.ci_high
                        ),
                        None => println!("  {}: populations written", p.label),
                    }
                }
            }
            Cmd::Analyze { run, ops } => {
                let ops = AnalyzeOp::parse_list(&ops)?;
                cmd_analyze(&run, &ops)?;
                println!("analyzed {} run(s)", run.len());
            }
            Cmd::Ladder { calibrate, g, eta, t_hold, levels, relative, out } => {
                let report =
                    cmd_ladder(calibrate, g, eta, t_hold, levels, relative, out.as_deref())?;
                print!("{report}");
            }
            Cmd::Fit { model, data, out } => {
                let report = cmd_fit(&model, &data, out.as_deref())?;
                print!("{report}");
            }
            Cmd::Sweep { config, shots } => {
                let mut cfg = ExperimentConfig::load(&config)?;
                if let Some(s) = shots {
                    cfg.shots = s;
                }
                if cfg.lambda_distances.is_none() {
                    return Err(lqec_core::Error::InvalidParam(
                        "sweep needs sweep.lambda_distances in the config".into(),
                    ));
                }
                // The sweep pipeline is the fig5c machinery over an
                // arbitrary config; stage it through a temp bundle dir.
                let summary = lqec_cli::figures::run_sweep_config(&cfg, &out_root)?;
                print!("{summary}");
            }
            Cmd::Figure { id, shots } => {
                let line = figures::run_figure(&id, &out_root, shots)?;
                println!("{line}");
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
