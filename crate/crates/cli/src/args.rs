use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dehn_core::filling::FillingCoefficient;
use dehn_core::tube::LengthConvention;

use crate::config::FileConfig;

#[derive(Debug, Parser)]
#[command(name = "dehn", version, about = "Dehn filling rigidity toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// JSON file with default values for the flags below
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Decimal digits for high-precision work [env: DEHN_PRECISION]
    #[arg(long, visible_alias = "prec", global = true, value_name = "DIGITS")]
    pub precision: Option<u32>,
    /// Newton stopping tolerance
    #[arg(long, global = true)]
    pub solver_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Coefficient bound for relation searches
    #[arg(long, global = true)]
    pub bound: Option<u64>,
    /// Worker threads for scans and sweeps
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Collision and comparison tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Write JSON here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

impl GlobalArgs {
    pub fn as_file_config(&self) -> FileConfig {
        FileConfig {
            precision: self.precision,
            solver_tol: self.solver_tol,
            max_iter: self.max_iter,
            bound: self.bound,
            threads: self.threads,
            tol: self.tol,
            out: self.out.clone(),
        }
    }
}

/// A descriptor path, or `fixture:NAME` for a bundled one.
#[derive(Debug, Args)]
pub struct ManifoldArg {
    #[arg(long, value_name = "FILE")]
    pub manifold: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the filling equations for one coefficient
    Solve {
        #[command(flatten)]
        manifold: ManifoldArg,
        #[arg(long, allow_hyphen_values = true)]
        filling: FillingCoefficient,
    },
    /// Scan holonomy products over a range of fillings
    Scan {
        #[command(flatten)]
        manifold: ManifoldArg,
        #[arg(long)]
        min: i64,
        #[arg(long)]
        max: i64,
        /// Exponents m_i of the product, one per cusp
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        exponents: Vec<i64>,
        /// Also write every product as CSV
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
    /// Pseudo complex volume of a filling
    Pvol {
        #[command(flatten)]
        manifold: ManifoldArg,
        #[arg(long, allow_hyphen_values = true)]
        filling: FillingCoefficient,
    },
    /// Integer relation searches
    #[command(subcommand)]
    Relations(RelationsCommand),
    /// Search for an integer Möbius map between two cusp shapes
    Symmetry {
        #[arg(long, allow_hyphen_values = true, value_name = "RE,IM")]
        tau_i: DecimalPair,
        #[arg(long, allow_hyphen_values = true, value_name = "RE,IM")]
        tau_j: DecimalPair,
    },
    /// Absolute logarithmic height of an algebraic number
    Height {
        /// Minimal polynomial coefficients, leading first
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        minpoly: Vec<i64>,
        /// Approximate root selecting the conjugate
        #[arg(long, allow_hyphen_values = true, value_name = "RE,IM")]
        root: DecimalPair,
    },
    /// Classify a rank-2 integer 2x4 matrix
    Classify {
        #[arg(long, allow_hyphen_values = true, value_name = "A,B,C,D;E,F,G,H")]
        matrix: Matrix2x4,
        #[arg(long, allow_hyphen_values = true, value_name = "RE,IM")]
        tau: DecimalPair,
        /// Shape of the second cusp when it differs from the first
        #[arg(long, allow_hyphen_values = true, value_name = "RE,IM")]
        tau2: Option<DecimalPair>,
    },
    /// Classify a codimension-2 subgroup against the anomalous forms
    Anomalous {
        #[command(flatten)]
        manifold: ManifoldArg,
        #[arg(long, value_name = "FILE")]
        lattice: PathBuf,
    },
    /// Tube geometry
    #[command(subcommand)]
    Tube(TubeCommand),
    /// Run the acceptance suite on the bundled descriptors
    VerifyAll,
}

#[derive(Debug, Subcommand)]
pub enum RelationsCommand {
    /// Relations among log t_i modulo 2πi
    MultIndep {
        #[command(flatten)]
        manifold: ManifoldArg,
        #[arg(long, allow_hyphen_values = true)]
        filling: FillingCoefficient,
    },
    /// Relations among pseudo volumes modulo iπ²
    Pvol {
        #[command(flatten)]
        manifold: ManifoldArg,
        /// JSON array of filling strings
        #[arg(long, value_name = "FILE")]
        fillings: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum TubeCommand {
    /// Volume of a tube
    Volume {
        #[arg(long, allow_hyphen_values = true, value_name = "RE,IM")]
        length: DecimalPair,
        #[arg(long)]
        radius: f64,
    },
    /// Boundary torus modulus of a tube
    Modulus {
        #[arg(long, allow_hyphen_values = true, value_name = "RE,IM")]
        length: DecimalPair,
        #[arg(long)]
        radius: f64,
        /// Also reduce to the fundamental domain
        #[arg(long)]
        reduce: bool,
    },
    /// Compare the tubes of two fillings of a one-cusp manifold
    Replay {
        #[command(flatten)]
        manifold: ManifoldArg,
        #[arg(long, allow_hyphen_values = true)]
        f1: FillingCoefficient,
        #[arg(long, allow_hyphen_values = true)]
        f2: FillingCoefficient,
        #[arg(long)]
        cusp_volume: f64,
        #[arg(
            long = "length-convention",
            visible_alias = "convention",
            default_value = "derivative"
        )]
        convention: LengthConvention,
    },
}

/// `re,im` as decimal strings.
#[derive(Clone, Debug, PartialEq)]
pub struct DecimalPair {
    pub re: String,
    pub im: String,
}

impl std::str::FromStr for DecimalPair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (re, im) = s.split_once(',').ok_or_else(|| format!("expected RE,IM, got {s:?}"))?;
        let (re, im) = (re.trim(), im.trim());
        for part in [re, im] {
            part.parse::<f64>()
                .map_err(|_| format!("not a decimal number: {part:?}"))?;
        }
        Ok(DecimalPair {
            re: re.into(),
            im: im.into(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Matrix2x4(pub [[i64; 4]; 2]);

impl std::str::FromStr for Matrix2x4 {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let rows: Vec<&str> = s.split(';').collect();
        if rows.len() != 2 {
            return Err(format!("expected two rows separated by ';', got {}", rows.len()));
        }
        let mut m = [[0i64; 4]; 2];
        for (row, text) in m.iter_mut().zip(rows) {
            let vals: Vec<i64> = text
                .split(',')
                .map(|x| x.trim().parse::<i64>().map_err(|_| format!("not an integer: {x:?}")))
                .collect::<Result<_, _>>()?;
            *row = vals
                .try_into()
                .map_err(|v: Vec<i64>| format!("expected 4 entries per row, got {}", v.len()))?;
        }
        Ok(Matrix2x4(m))
    }
}
