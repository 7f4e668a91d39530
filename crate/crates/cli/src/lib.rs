//! Command-line front end for `sheaf_sampling`.
//!
//! Exit codes: 0 success, 1 domain failure (violations, ill-conditioned
//! ranks, a verdict other than PERFECT or CLEAR), 2 usage or parse error.

pub mod commands;
pub mod document;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sheaf_sampling::{Tolerance, Vertex};

pub use document::Document;

#[derive(Debug, Parser)]
#[command(
    name = "sheafsamp",
    version,
    about = "Cellular sheaf cohomology and sampling analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check functoriality of the sheaf and commutativity of the morphism.
    Validate {
        file: PathBuf,
        /// Relative deviation allowed before a check fails.
        #[arg(long, default_value_t = commands::DEFAULT_VALIDATE_TOL)]
        tolerance: f64,
        #[arg(long)]
        json: bool,
    },
    /// Dimensions and bases of the sheaf cohomology groups.
    Cohomology {
        file: PathBuf,
        /// Highest degree reported; defaults to the dimension of the complex.
        #[arg(long)]
        max_degree: Option<usize>,
        #[command(flatten)]
        numeric: NumericArgs,
        /// Print basis cochains grouped by face.
        #[arg(long)]
        basis: bool,
        /// Report ill-conditioned ranks without failing.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        json: bool,
    },
    /// Ambiguity and redundancy of a sampling of the sheaf.
    Nyquist {
        file: PathBuf,
        /// Sampled vertices; defaults to the document's sample_support.
        #[arg(long, value_delimiter = ',')]
        support: Option<Vec<Vertex>>,
        /// Document whose morphism section samples the sheaf.
        #[arg(long, conflicts_with = "full_stalk")]
        morphism: Option<PathBuf>,
        /// Keep every stalk on the support.
        #[arg(long)]
        full_stalk: bool,
        #[command(flatten)]
        numeric: NumericArgs,
        #[arg(long)]
        json: bool,
    },
    /// Whether sections vanishing on the support rule out recovery.
    Obstruction {
        file: PathBuf,
        #[arg(long, value_delimiter = ',')]
        support: Option<Vec<Vertex>>,
        #[command(flatten)]
        numeric: NumericArgs,
        #[arg(long)]
        json: bool,
    },
    /// Write a document for one of the built-in sheaf families.
    Zoo {
        #[command(subcommand)]
        family: Family,
        /// Output file; standard output when omitted.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
        /// Sample support stored in the document.
        #[arg(long, global = true, value_delimiter = ',')]
        support: Option<Vec<Vertex>>,
    },
}

#[derive(Debug, Subcommand)]
pub enum Family {
    /// Sliding windows of length `window` over a path of `n` vertices.
    Grouping {
        n: usize,
        #[arg(long)]
        window: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, value_enum, default_value_t = Field::Real)]
        field: Field,
    },
    /// Piecewise-linear functions on the graph of a document.
    Pl {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = Field::Real)]
        field: Field,
    },
    /// Helmholtz traveling waves on a metric graph document.
    Transmission {
        #[arg(long)]
        graph: PathBuf,
        /// `re,im`
        #[arg(long, allow_hyphen_values = true)]
        wavenumber: Wavenumber,
    },
    /// Polynomial splines on a path of `n` knots.
    Spline {
        n: usize,
        #[arg(long)]
        degree: usize,
        #[arg(long)]
        spacing: f64,
        #[arg(long, value_enum, default_value_t = Field::Real)]
        field: Field,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Field {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wavenumber(pub f64, pub f64);

impl FromStr for Wavenumber {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(',').collect();
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
        match parts.as_slice() {
            [re] => Ok(Wavenumber(num(re)?, 0.0)),
            [re, im] => Ok(Wavenumber(num(re)?, num(im)?)),
            _ => Err("expected re,im".into()),
        }
    }
}

#[derive(Clone, Copy, Debug, Args)]
pub struct NumericArgs {
    /// Singular-value threshold: `auto` or an absolute value.
    #[arg(long, default_value = "auto")]
    pub tolerance: TolArg,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TolArg(pub Tolerance);

impl FromStr for TolArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(TolArg(Tolerance::Auto));
        }
        match s.parse::<f64>() {
            Ok(t) if t >= 0.0 && t.is_finite() => Ok(TolArg(Tolerance::Absolute(t))),
            _ => Err(format!(
                "expected `auto` or a non-negative number, got {s:?}"
            )),
        }
    }
}
