use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::error;

use cgplus::cli::{self, CliError, Config};

#[derive(Parser)]
#[command(name = "cgplus", version, about = "Goal synthesis and task planning on augmented contact graphs")]
struct Args {
    /// Config file (JSON); any subset of the settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a goal from a rough goal and plan towards it.
    Plan {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        goal: PathBuf,
    },
    /// Synthesize a physically valid goal scene from a rough goal.
    SynthGoal {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        goal: PathBuf,
    },
    /// Replay a plan file against a scene.
    Validate {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        plan: PathBuf,
    },
    /// Plate stacking benchmark; writes a deterministic CSV and a timing CSV.
    BenchStack {
        /// Plate counts, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8,10")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Timing CSV; next to --out (or stderr) if omitted.
        #[arg(long)]
        timings: Option<PathBuf>,
    },
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(args: Args) -> Result<(), CliError> {
    let out = args.out.as_deref();
    match args.command {
        Command::Plan { scene, goal } => {
            let cfg = Config::load(args.config.as_deref(), Config::default())?.with_seed(args.seed);
            let plan = cli::cmd_plan(&scene, &goal, &cfg, args.seed)?;
            emit(out, &plan.to_canonical())
        }
        Command::SynthGoal { scene, goal } => {
            let cfg = Config::load(args.config.as_deref(), Config::default())?.with_seed(args.seed);
            let file = cli::cmd_synth_goal(&scene, &goal, &cfg)?;
            emit(out, &file.to_canonical())
        }
        Command::Validate { scene, plan } => {
            let report = cli::cmd_validate(&scene, &plan)?;
            match report.failure {
                None => {
                    emit(out, &format!("ok: {} steps replayed to the goal\n", report.steps))?;
                    Ok(())
                }
                Some((step, why)) => Err(CliError::Validation(format!("step {step}: {why}"))),
            }
        }
        Command::BenchStack { n, repeats, timings } => {
            let cfg = Config::load(args.config.as_deref(), Config::bench_default())?;
            let report = cli::cmd_bench_stack(&n, repeats, args.seed, &cfg)?;
            emit(out, &report.to_csv())?;
            let timing_path = timings.or_else(|| out.map(|p| p.with_extension("timings.csv")));
            match timing_path {
                Some(p) => std::fs::write(p, report.timings_csv())?,
                None => eprint!("{}", report.timings_csv()),
            }
            for &k in &n {
                let (s, p, g) = report.medians(k);
                eprintln!("n={k}: median structure {s:.3} s, poses {p:.3} s, planning {g:.3} s");
            }
            let failed = report.rows.iter().filter(|r| !r.valid).count();
            if failed > 0 {
                return Err(CliError::Validation(format!("{failed} of {} runs failed", report.rows.len())));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    env_logger::Builder::new().filter_level(args.log_level).format_timestamp(None).init();
    match run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
