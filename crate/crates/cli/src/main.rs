use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cutfem::analysis::{write_csv, write_json};
use cutfem::assembly::DEFAULT_GHOST_PENALTY as DEFAULT_GHOST;
use cutfem::{convergence_study, run_case, CaseId, RunConfig};

#[derive(Parser)]
#[command(name = "cutfem", version, about = "Unfitted Nitsche finite elements on level-set domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one manufactured problem and report errors and diagnostics.
    Solve {
        #[arg(long)]
        case: CaseId,
        #[arg(long)]
        p: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "gamma-g", default_value_t = DEFAULT_GHOST)]
        gamma_g: f64,
        /// JSON output path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a refinement study over n0, 2 n0, 4 n0, ... and write a CSV table.
    Converge {
        #[arg(long)]
        case: CaseId,
        #[arg(long, value_delimiter = ',', required = true)]
        p: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<usize>,
        #[arg(long)]
        n0: usize,
        #[arg(long)]
        levels: usize,
        #[arg(long = "gamma-g", default_value_t = DEFAULT_GHOST)]
        gamma_g: f64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(command: Command) -> cutfem::Result<()> {
    match command {
        Command::Solve {
            case,
            p,
            k,
            n,
            gamma_g,
            out,
        } => {
            let record = run_case(&RunConfig::new(case, p, k, n).with_ghost_penalty(gamma_g))?;
            match out {
                Some(path) => write_json(BufWriter::new(File::create(path)?), std::slice::from_ref(&record))?,
                None => {
                    write_json(io::stdout().lock(), std::slice::from_ref(&record))?;
                    println!();
                }
            }
        }
        Command::Converge {
            case,
            p,
            k,
            n0,
            levels,
            gamma_g,
            out,
        } => {
            let tables = convergence_study(case, &p, &k, n0, levels, gamma_g)?;
            write_csv(BufWriter::new(File::create(&out)?), &tables)?;
            for t in &tables {
                if let Some(r) = t.rates {
                    println!(
                        "{} p={} k={}: rates l2 {:.2} h1 {:.2} triple {:.2}",
                        t.case, t.p, t.k, r.l2, r.h1_semi, r.triple
                    );
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
