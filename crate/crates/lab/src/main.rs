use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stochtrace::{registry, report::report, run_experiment, ExperimentConfig, LabError};

#[derive(Parser)]
#[command(name = "stochtrace", version, about = "Run stochastic-mechanics experiments and collect their checks")]
struct Cli {
    /// List registered experiments (same as the `list` command).
    #[arg(long)]
    list: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `out_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed; overrides `seed` in the config.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print every check of the given run directories as CSV.
    Report { dirs: Vec<PathBuf> },
    /// List registered experiments.
    List,
}

fn list() -> ExitCode {
    for e in registry() {
        println!("{:>2}  {:<22} {}", e.criterion, e.name, e.about);
        for p in e.params {
            println!("        {:<18} {:?}  {}", p.key, p.default, p.help);
        }
    }
    ExitCode::SUCCESS
}

fn fail(e: LabError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn run(config: PathBuf, out: Option<PathBuf>, seed: Option<u64>) -> ExitCode {
    let cfg = match ExperimentConfig::load(&config) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    match run_experiment(&cfg, out.as_deref(), seed) {
        Ok(s) => {
            for c in &s.checks {
                println!("{} {} = {:e} {} {:e}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.relation.symbol(), c.tolerance);
            }
            println!("{} seed {} in {:.2} s", s.experiment, s.seed, s.wall_time_s);
            if s.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => fail(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match (cli.command, cli.list) {
        (Some(Command::List), _) | (None, true) => list(),
        (Some(Command::Run { config, out, seed }), _) => run(config, out, seed),
        (Some(Command::Report { dirs }), _) => {
            let refs: Vec<&std::path::Path> = dirs.iter().map(PathBuf::as_path).collect();
            match report(&refs, std::io::stdout().lock()) {
                Ok(true) => ExitCode::SUCCESS,
                Ok(false) => ExitCode::from(1),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(3)
                }
            }
        }
        (None, false) => {
            eprintln!("nothing to do; try `stochtrace --help`");
            ExitCode::from(2)
        }
    }
}
