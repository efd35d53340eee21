//! `crested-markov`: build, analyze and simulate crested products and
//! Insect chains described by a JSON spec document.

mod commands;
mod document;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use crested_markov::insect::AlphaRule;

use commands::Outcome;
use document::{read_input, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "crested-markov",
    version,
    about = "Crested products of Markov chains over posets",
    after_help = "Spec document (JSON):\n  \
        {\"poset\": {\"n\": 3, \"covers\": [[2, 1], [3, 1]]},\n   \
         \"components\": [{\"index\": 1, \"size\": 2, \"matrix\": [[0.5, 0.5], [0.5, 0.5]], \"sigma\": [0.5, 0.5]}, ...],\n   \
         \"p0\": [0.2, 0.3, 0.5], \"mode\": \"crested\", \"base_point\": [0, 0, 0]}\n\
        covers are [lower, upper] with 1-based labels; matrix and p0 are omitted in insect mode.\n\n\
        Exit codes: 0 success, 2 schema error, 3 math validation failure, 4 size cap exceeded.\n\
        Environment: CRESTED_MARKOV_SEED sets the default --seed of `simulate`."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Rule {
    FirstPassage,
    LeafReturn,
}

impl From<Rule> for AlphaRule {
    fn from(r: Rule) -> Self {
        match r {
            Rule::FirstPassage => AlphaRule::FirstPassage,
            Rule::LeafReturn => AlphaRule::LeafReturn,
        }
    }
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Spec document.
    spec: PathBuf,
    /// How climbing probabilities treat steps down to the leaf level
    /// (insect mode).
    #[arg(long, value_enum, default_value_t = Rule::FirstPassage)]
    rule: Rule,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write the assembled transition matrix as CSV.
    Build {
        #[command(flatten)]
        common: Common,
        /// Output file (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// List eigenvalues by antichain and multi-index, checked against a
    /// dense eigen-solve.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// k-step transition probability from the spectral formula.
    Kstep {
        #[command(flatten)]
        common: Common,
        /// Start state, e.g. `010` or `0,1,0`.
        #[arg(long)]
        from: String,
        /// End state.
        #[arg(long)]
        to: String,
        #[arg(long)]
        k: u32,
        /// Compare with the k-th matrix power.
        #[arg(long)]
        verify: bool,
    },
    /// Tree, climbing probabilities, level weights and eigenvalues of the
    /// Insect chain.
    Insect {
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo walks on the tree; prints an end-state histogram.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, env = "CRESTED_MARKOV_SEED", default_value_t = 0)]
        seed: u64,
        /// Start leaf (defaults to base_point, else all zeros).
        #[arg(long)]
        start: Option<String>,
    },
    /// Run every invariant check for one spec.
    Verify {
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> CliResult<(Outcome, Option<PathBuf>)> {
    Ok(match cli.command {
        Command::Build { common, out } => {
            let input = read_input(&common.spec)?;
            (commands::build(&input, common.rule.into())?, out)
        }
        Command::Spectrum { common } => {
            let input = read_input(&common.spec)?;
            (commands::spectrum(&input, common.rule.into())?, None)
        }
        Command::Kstep {
            common,
            from,
            to,
            k,
            verify,
        } => {
            let input = read_input(&common.spec)?;
            (
                commands::kstep(&input, common.rule.into(), &from, &to, k, verify)?,
                None,
            )
        }
        Command::Insect { common } => {
            let input = read_input(&common.spec)?;
            (commands::insect(&input, common.rule.into())?, None)
        }
        Command::Simulate {
            common,
            trials,
            seed,
            start,
        } => {
            let input = read_input(&common.spec)?;
            (
                commands::simulate(&input, common.rule.into(), trials, seed, start.as_deref())?,
                None,
            )
        }
        Command::Verify { common } => {
            let input = read_input(&common.spec)?;
            (commands::verify(&input, common.rule.into())?, None)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((outcome, path)) => {
            let written = match path {
                Some(p) => std::fs::write(&p, &outcome.text).map_err(|e| format!("{}: {e}", p.display())),
                None => std::io::stdout()
                    .write_all(outcome.text.as_bytes())
                    .map_err(|e| e.to_string()),
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
