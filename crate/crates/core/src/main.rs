use clap::Parser;
use msekit::cli::{parse_problem, run, run_corpus, Mode, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum Command {
    Check,
    Solve,
    Conjugate,
    Diverge,
    Rnoid,
    Scherk,
    Corpus,
}

impl Command {
    fn mode(self) -> Option<Mode> {
        Some(match self {
            Command::Check => Mode::Check,
            Command::Solve => Mode::Solve,
            Command::Conjugate => Mode::Conjugate,
            Command::Diverge => Mode::Diverge,
            Command::Rnoid => Mode::Rnoid,
            Command::Scherk => Mode::Scherk,
            Command::Corpus => return None,
        })
    }
}

/// Minimal-surface toolkit. Exit codes: 0 when every check passed, 1 on runtime errors,
/// 2 on bad input, 3 when a run finished but a check failed. Solvability verdicts never
/// change the exit code.
#[derive(Debug, Parser)]
#[command(name = "msekit", version)]
struct Args {
    #[arg(value_enum)]
    mode: Command,
    /// Problem spec (JSON).
    #[arg(long, required_unless_present = "dir")]
    spec: Option<PathBuf>,
    /// Spec directory for corpus mode.
    #[arg(long)]
    dir: Option<PathBuf>,
    #[arg(long, default_value = "msekit-out")]
    out: PathBuf,
    /// Worker threads for corpus mode.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("MSEKIT_LOG", "warn")).init();
    let args = Args::parse();
    let Some(mode) = args.mode.mode() else {
        let Some(dir) = args.dir else {
            eprintln!("corpus mode needs --dir");
            return ExitCode::from(2);
        };
        return match run_corpus(&dir, &args.out, args.jobs, args.seed) {
            Ok(entries) => {
                for e in &entries {
                    let status = match (&e.error, e.passed) {
                        (Some(err), _) => format!("error: {err}"),
                        (None, true) => "ok".into(),
                        (None, false) => "check failed".into(),
                    };
                    println!("{:<40} {status}", e.spec);
                }
                if entries.iter().all(|e| e.passed) {
                    ExitCode::SUCCESS
                } else if entries.iter().any(|e| e.error.is_some()) {
                    ExitCode::from(1)
                } else {
                    ExitCode::from(3)
                }
            }
            Err(e) => {
                eprintln!("{e}");
                ExitCode::from(e.exit_code() as u8)
            }
        };
    };
    let Some(path) = args.spec else {
        eprintln!("--spec is required");
        return ExitCode::from(2);
    };
    let spec = match parse_problem(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if spec.mode != mode {
        eprintln!("spec {} is a {} problem, not {}", path.display(), spec.mode.name(), mode.name());
        return ExitCode::from(2);
    }
    let opts = RunOptions {
        out: args.out,
        seed: args.seed,
    };
    match run(&spec, &opts) {
        Ok(report) => {
            println!("{}", report.to_json());
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
