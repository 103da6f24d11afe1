use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ternary_au::arith::FactorConfig;
use ternary_au::generate::GeneratorConfig;
use ternary_au_cli::commands::{self, EXIT_USAGE};
use ternary_au_cli::{Format, GenerateOptions, Options, Output};

#[derive(Parser)]
#[command(name = "ternary-au", version, about = "Almost universality of ternary inhomogeneous quadratic polynomials with conductor 2")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize an instance and decide almost universality.
    Classify {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// List the integers up to the bound that H misses.
    Enumerate {
        file: PathBuf,
        #[arg(long, default_value_t = commands::DEFAULT_BOUND)]
        bound: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Classify, enumerate, and check that the two agree.
    Verify {
        file: PathBuf,
        #[arg(long, default_value_t = commands::DEFAULT_BOUND)]
        bound: u64,
        #[arg(long, default_value_t = commands::DEFAULT_QLIMIT)]
        qlimit: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Write a seeded corpus of valid lattice-form instance files.
    Generate {
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        entry_bound: i64,
        /// Rescale samples by powers of 2 to reach every alpha - beta.
        #[arg(long)]
        dyadic: bool,
        #[arg(long, default_value_t = 1_000_000)]
        max_rejections: u64,
        #[arg(long, default_value = "corpus")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Trial division limit for factoring the determinant.
    #[arg(long)]
    factor_limit: Option<u64>,
    /// Search budget for clause (4) and the spectrum.
    #[arg(long)]
    enum_budget: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Machine,
}

impl Common {
    fn options(&self, bound: u64, q_limit: u64) -> Options {
        let mut factor = FactorConfig::default();
        if let Some(n) = self.factor_limit {
            factor.trial_limit = n;
        }
        Options {
            format: match self.format {
                FormatArg::Text => Format::Text,
                FormatArg::Machine => Format::Machine,
            },
            factor,
            enum_budget: self.enum_budget,
            bound,
            q_limit,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { 0 });
        }
    };
    let out: Output = match cli.command {
        Command::Classify { file, common } => commands::cmd_classify(&file, &common.options(commands::DEFAULT_BOUND, commands::DEFAULT_QLIMIT)),
        Command::Enumerate { file, bound, common } => commands::cmd_enumerate(&file, &common.options(bound, commands::DEFAULT_QLIMIT)),
        Command::Verify { file, bound, qlimit, common } => commands::cmd_verify(&file, &common.options(bound, qlimit)),
        Command::Generate { count, seed, entry_bound, dyadic, max_rejections, out } => commands::cmd_generate(&GenerateOptions {
            config: GeneratorConfig { count, seed, entry_bound, max_rejections, dyadic },
            out,
        }),
    };
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    ExitCode::from(out.code as u8)
}
