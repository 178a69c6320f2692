use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use toric_score::exact::parse_rational;
use toric_score::io::{
    parse_problem_file, run_queries, ClassSpec, ParseError, Problem, QuerySpec, RayRef, RunOptions,
};
use toric_score::score::ScoreOptions;

/// Exact polymology products on smooth toric varieties and their complete
/// intersections.
#[derive(Parser, Debug)]
#[command(name = "toric-score", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run every query in the problem file.
    Run(Common),
    /// Check the fan, the deformation and the hypersurfaces.
    Validate(Common),
    /// Show the ideal SR(V, E) and the graded dimensions of the quotient.
    Ring(Common),
    /// Evaluate the product of n classes on V.
    Product {
        #[command(flatten)]
        common: Common,
        /// Class as comma-separated rationals, or `d:RAY` for a toric divisor.
        #[arg(long = "sigma", required = true)]
        sigmas: Vec<String>,
    },
    /// Evaluate a product on the complete intersection of the file's hypersurfaces.
    Score {
        #[command(flatten)]
        common: Common,
        #[arg(long = "sigma")]
        sigmas: Vec<String>,
        /// Restrict to these hypersurface labels, in this order.
        #[arg(long = "hypersurface")]
        hypersurfaces: Vec<String>,
    },
    /// Classical intersection number of n divisor classes.
    Intersect {
        #[command(flatten)]
        common: Common,
        #[arg(long = "class", required = true)]
        classes: Vec<String>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Problem file (JSON).
    file: PathBuf,
    #[arg(long, value_enum, default_value_t = Output::Json)]
    output: Output,
    /// Evaluate complete intersections with m > n - 3 anyway; the warning is
    /// reported either way.
    #[arg(
        long,
        action = clap::ArgAction::Set,
        num_args = 0..=1,
        default_value_t = true,
        default_missing_value = "true"
    )]
    allow_hypothesis_violations: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Text,
}

fn parse_class(s: &str) -> Result<ClassSpec, String> {
    if let Some(ray) = s.strip_prefix("d:") {
        let r = match ray.parse::<usize>() {
            Ok(i) => RayRef::Index(i),
            Err(_) => RayRef::Label(ray.to_string()),
        };
        return Ok(ClassSpec::Divisor(r));
    }
    s.split(',')
        .map(|c| parse_rational(c.trim()).map_err(|e| format!("{s:?}: {e}")))
        .collect::<Result<_, _>>()
        .map(ClassSpec::Vector)
}

fn parse_classes(list: &[String]) -> Result<Vec<ClassSpec>, String> {
    list.iter().map(|s| parse_class(s)).collect()
}

/// The file's queries, or the single query named on the command line.
fn selected_query(command: &Command) -> Result<Option<QuerySpec>, String> {
    Ok(match command {
        Command::Run(_) => None,
        Command::Validate(_) => Some(QuerySpec::Validate),
        Command::Ring(_) => Some(QuerySpec::Ring),
        Command::Product { sigmas, .. } => Some(QuerySpec::Product {
            sigmas: parse_classes(sigmas)?,
        }),
        Command::Score {
            sigmas,
            hypersurfaces,
            ..
        } => Some(QuerySpec::Score {
            sigmas: parse_classes(sigmas)?,
            hypersurfaces: (!hypersurfaces.is_empty()).then(|| hypersurfaces.clone()),
        }),
        Command::Intersect { classes, .. } => Some(QuerySpec::Intersect {
            classes: parse_classes(classes)?,
        }),
    })
}

fn load(common: &Common, query: Option<QuerySpec>) -> Result<Problem, ParseError> {
    let problem = parse_problem_file(&common.file)?;
    match query {
        None => Ok(problem),
        Some(q) => {
            let mut file = problem.file;
            file.queries = vec![q];
            toric_score::io::resolve(file, problem.digest)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Run(c) | Command::Validate(c) | Command::Ring(c) => c,
        Command::Product { common, .. }
        | Command::Score { common, .. }
        | Command::Intersect { common, .. } => common,
    };
    let query = match selected_query(&cli.command) {
        Ok(q) => q,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let problem = match load(common, query) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}: {e}", common.file.display());
            return ExitCode::from(2);
        }
    };
    let options = RunOptions {
        score: ScoreOptions {
            allow_hypothesis_violations: common.allow_hypothesis_violations,
        },
    };
    let report = run_queries(&problem, &options);
    match common.output {
        Output::Json => print!("{}", report.to_json_string()),
        Output::Text => print!("{}", report.to_text()),
    }
    if report.validation_failed() {
        ExitCode::from(2)
    } else if !report.all_ok() {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}
