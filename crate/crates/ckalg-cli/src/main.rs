//! Command-line frontend. Each subcommand reads a system file (and for
//! `extend`/`verify` a series document), runs the corresponding library
//! operation, and writes either a series document or a textual report.
//!
//! Success exits 0. Failures print a one-line JSON error object to
//! stderr and exit with a code determined by the error kind, so scripts
//! can dispatch without parsing prose.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ckalg::{parse_rational, pipeline, Rat, SeriesDocument, SystemFile};

#[derive(Parser)]
#[command(
    name = "ckalg",
    version,
    about = "Exact power-series solver and symbolic toolkit for PDE systems"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a system in normal form as truncated power series.
    Solve {
        /// System file (directives: derivations, unknown, eq, init, ...).
        system: PathBuf,
        /// Truncation order; overrides the file's `order` directive.
        #[arg(long)]
        order: Option<u32>,
        /// Expansion point "c1,...,cm"; overrides the `point` directive.
        #[arg(long)]
        point: Option<String>,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Extend a solved (m-1)-variable document to m variables.
    Extend {
        /// System file over m derivations describing the new direction.
        system: PathBuf,
        /// Series document with the lower-dimensional solution.
        lower: PathBuf,
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Report leader, order, and separant of a single relation.
    Separant {
        system: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Search for a unimodular change of derivations making every
    /// relation integral on its witness.
    ChangeDerivations {
        system: PathBuf,
        /// Max absolute entry tried for the shear vector.
        #[arg(long)]
        lambda_bound: Option<i64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Rewrite `expr` lines modulo the file's relation, eliminating
    /// excess d1-derivatives.
    Reduce {
        system: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recheck the residuals of a series document against the system
    /// recorded inside it.
    Verify {
        document: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Expand the file's `expr` lines (coefficient functions) as series.
    Expand {
        system: PathBuf,
        #[arg(long)]
        order: Option<u32>,
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    Io(PathBuf, std::io::Error),
    Lib(ckalg::Error),
}

impl From<ckalg::Error> for Failure {
    fn from(e: ckalg::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn kind(&self) -> &'static str {
        match self {
            Failure::Io(..) => "io",
            Failure::Lib(e) => e.kind(),
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Io(path, e) => format!("{}: {e}", path.display()),
            Failure::Lib(e) => e.to_string(),
        }
    }

    fn exit_code(&self) -> u8 {
        // 0 = success, 2 = usage (clap), 3 = I/O; library kinds get
        // stable codes from 10 up.
        match self.kind() {
            "io" => 3,
            "dimension-mismatch" => 10,
            "context-mismatch" => 11,
            "insufficient-order" => 12,
            "pole" => 13,
            "restriction-vanishes" => 14,
            "division-by-zero" => 15,
            "no-leader" => 16,
            "not-integral" => 17,
            "matrix" => 18,
            "search-exhausted" => 19,
            "normal-form" => 20,
            "denominator-vanishes" => 21,
            "underdetermined" => 22,
            "singular-prolongation" => 23,
            "consistency" => 24,
            "parse" => 25,
            "verification-failed" => 26,
            _ => 1,
        }
    }

    fn to_json(&self) -> String {
        let mut inner = serde_json::Map::new();
        inner.insert("kind".to_string(), self.kind().into());
        inner.insert("message".to_string(), self.message().into());
        let mut obj = serde_json::Map::new();
        obj.insert("error".to_string(), serde_json::Value::Object(inner));
        serde_json::Value::Object(obj).to_string()
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn parse_point(text: Option<&str>) -> Result<Option<Vec<Rat>>, Failure> {
    let Some(text) = text else { return Ok(None) };
    let mut out = Vec::new();
    for piece in text.split(',').flat_map(str::split_whitespace) {
        out.push(parse_rational(piece)?);
    }
    Ok(Some(out))
}

fn load_system(path: &Path) -> Result<SystemFile, Failure> {
    Ok(SystemFile::parse(&read_file(path)?)?)
}

/// Runs one subcommand, returning the full output text and where to
/// put it. All output is deterministic: documents are canonical JSON,
/// reports are newline-terminated plain text.
fn run(cmd: &Cmd) -> Result<(String, Option<PathBuf>), Failure> {
    match cmd {
        Cmd::Solve {
            system,
            order,
            point,
            output,
        } => {
            let file = load_system(system)?;
            let point = parse_point(point.as_deref())?;
            let doc = pipeline::solve(&file, *order, point)?;
            Ok((doc.to_json(), output.clone()))
        }
        Cmd::Extend {
            system,
            lower,
            order,
            point,
            output,
        } => {
            let file = load_system(system)?;
            let lower_doc = SeriesDocument::from_json(&read_file(lower)?)?;
            let point = parse_point(point.as_deref())?;
            let doc = pipeline::extend(&file, &lower_doc, *order, point)?;
            Ok((doc.to_json(), output.clone()))
        }
        Cmd::Separant { system, output } => {
            let file = load_system(system)?;
            Ok((pipeline::separant_report(&file)?, output.clone()))
        }
        Cmd::ChangeDerivations {
            system,
            lambda_bound,
            output,
        } => {
            let file = load_system(system)?;
            Ok((pipeline::change_derivations(&file, *lambda_bound)?, output.clone()))
        }
        Cmd::Reduce { system, output } => {
            let file = load_system(system)?;
            Ok((pipeline::reduce(&file)?, output.clone()))
        }
        Cmd::Verify { document, output } => {
            let doc = SeriesDocument::from_json(&read_file(document)?)?;
            Ok((pipeline::verify(&doc)?, output.clone()))
        }
        Cmd::Expand {
            system,
            order,
            point,
            output,
        } => {
            let file = load_system(system)?;
            let point = parse_point(point.as_deref())?;
            let doc = pipeline::expand(&file, *order, point)?;
            Ok((doc.to_json(), output.clone()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.cmd) {
        Ok((text, dest)) => match dest {
            None => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Some(path) => match fs::write(&path, &text) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    let f = Failure::Io(path, e);
                    eprintln!("{}", f.to_json());
                    ExitCode::from(f.exit_code())
                }
            },
        },
        Err(f) => {
            eprintln!("{}", f.to_json());
            ExitCode::from(f.exit_code())
        }
    }
}
