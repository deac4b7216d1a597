use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Exact analysis of classical random access codes.
///
/// Strategy files are JSON objects {"n": .., "d": .., "rows": [[..], ..]}
/// holding Bob's d x n decoding matrix with 0-based letters. Row, column and
/// letter indices given on the command line are 0-based as well. Text output
/// writes letters and indices in the 1-based alphabet {1, ..., d}.
///
/// Exit status: 0 on success, 2 for invalid input, 3 when a computation would
/// exceed the enumeration cap.
#[derive(Debug, Parser)]
#[command(name = "racopt", version)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,

    /// Significant digits in decimal renderings.
    #[arg(long, default_value_t = racopt::rational::DEFAULT_DIGITS,
          value_parser = parse_digits, global = true)]
    pub digits: usize,

    /// Lift the enumeration caps on word and matrix spaces.
    #[arg(long, global = true)]
    pub force: bool,

    /// Maximum number of words a value computation may enumerate.
    #[arg(long, env = "RACOPT_CAP", default_value_t = racopt::game::DEFAULT_WORD_CAP, global = true)]
    pub cap: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact value of a strategy under Alice's best response.
    Value { file: PathBuf },

    /// Optimal value of the (n, d) game, or a full table of optimal values.
    OptimalValue {
        #[arg(required_unless_present = "table")]
        n: Option<u32>,
        #[arg(required_unless_present = "table")]
        d: Option<u32>,
        /// Every 1 <= n <= N_MAX, 1 <= d <= D_MAX (each at most 1000).
        #[arg(long, num_args = 2, value_names = ["N_MAX", "D_MAX"], conflicts_with_all = ["n", "d"])]
        table: Option<Vec<u32>>,
    },

    /// Certify whether a strategy is optimal.
    Check { file: PathBuf },

    /// Improve a strategy step by step until it is optimal.
    Improve { file: PathBuf },

    /// Number of optimal deterministic strategies.
    Count {
        n: u32,
        d: u32,
        /// Also count by scoring every decoding matrix.
        #[arg(long)]
        oracle: bool,
    },

    /// Words that certify strict losses.
    #[command(subcommand)]
    Witness(WitnessCommand),
}

#[derive(Debug, Subcommand)]
pub enum WitnessCommand {
    /// A word that loses when cell (ROW, COLUMN) is overwritten with the letter
    /// of OTHER_ROW in the same column. Needs every column to be a permutation,
    /// n > 2, and d > 2 or odd n.
    Merge {
        file: PathBuf,
        #[arg(long)]
        column: usize,
        #[arg(long)]
        row: usize,
        #[arg(long)]
        other_row: usize,
    },
    /// A word no row approximates in more than n/2 - 1 positions, for d = 2,
    /// even n > 2 and at least two non-permutation columns.
    Binary { file: PathBuf },
}

fn parse_digits(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
