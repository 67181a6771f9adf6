use clap::{Parser, Subcommand};
use inductor_draw::harness::config::{AgentKind, RunConfig, CONFIG_ENV};
use inductor_draw::harness::report::{report_sim_growth, write_report, RunTrace};
use inductor_draw::harness::{export_svg, run_training, run_transfer, HarnessError};
use inductor_draw::layout_file::LayoutRecord;
use inductor_draw::reward;
use inductor_draw::simulator::{simulate, MaterialParams};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "inductor-draw", version, about = "Draw planar inductors on a grid with RL, GA or random search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent until its simulation budget is spent.
    Train {
        #[arg(long, env = CONFIG_ENV)]
        config: PathBuf,
        #[arg(long)]
        agent: Option<AgentKind>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pre-train, fine-tune and compare against a scratch agent.
    Transfer {
        #[arg(long, env = CONFIG_ENV)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the surrogate metrics of a layout file as JSON.
    Simulate {
        #[arg(long)]
        layout: PathBuf,
    },
    /// Render a layout file to SVG.
    ExportSvg {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize simulation growth over run directories.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(config: &PathBuf, seed: Option<u64>, out: &PathBuf) -> Result<RunConfig, HarnessError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.output_dir = Some(out.clone());
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train { config, agent, seed, out } => {
            let mut cfg = load(&config, seed, &out)?;
            if let Some(a) = agent {
                cfg.agent = a;
            }
            let o = run_training(&cfg)?;
            println!("{}", serde_json::to_string(&o.summary).map_err(std::io::Error::other)?);
        }
        Command::Transfer { config, seed, out } => {
            let cfg = load(&config, seed, &out)?;
            let o = run_transfer(&cfg)?;
            println!("{}", serde_json::to_string(&o.summary).map_err(std::io::Error::other)?);
        }
        Command::Simulate { layout } => {
            let record = LayoutRecord::read(&layout)?;
            let l = record.to_layout()?;
            let m = simulate(&l, &MaterialParams::default())?;
            let mut v = serde_json::to_value(m).map_err(std::io::Error::other)?;
            if let Some(t) = &record.target {
                let r = reward::reward(&m, t).map_err(|e| HarnessError::Config(e.to_string()))?;
                v["reward"] = serde_json::json!(r);
            }
            println!("{v}");
        }
        Command::ExportSvg { layout, out } => export_svg(&layout, &out)?,
        Command::Report { runs, out } => {
            let traces = runs
                .iter()
                .map(|d| RunTrace::load(d))
                .collect::<Result<Vec<_>, _>>()?;
            let report = report_sim_growth(&traces)?;
            let slopes = write_report(&report, &out)?;
            print!("{}", report.slopes_csv);
            log::info!("wrote {} and {}", out.display(), slopes.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({"error": e.kind(), "message": e.to_string()});
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
