use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "regulus",
    version,
    about = "Certify or refute r-regularity of sampled shapes"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "REGULUS_THREADS")]
    pub threads: Option<usize>,
    /// Dimensionless discretization budget; default 2h/r.
    #[arg(long, global = true)]
    pub tol_geo: Option<f64>,
    /// Relative tolerance for closed-form comparisons.
    #[arg(long, global = true, default_value_t = regulus::tolerance::DEFAULT_REL)]
    pub tol_rel: f64,
    /// Add wall-clock timing to the JSON report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a builtin or implicit shape to CSV.
    Gen(Box<GenArgs>),
    /// Check both conditions and the tangent-ball oracle at one radius.
    Certify(CertifyArgs),
    /// Bracket the largest certified radius.
    EstimateR(EstimateArgs),
    /// Shortest boundary path between two samples.
    Geodesic(GeodesicArgs),
    /// Pairs with the largest intrinsic/Euclidean ratio.
    AnalyzePairs(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeName {
    Circle,
    Ellipse,
    Annulus,
    RoundedRectangle,
    Dumbbell,
    Implicit,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Shape description in TOML (`shape = "ellipse"`, `a = 2`, ...).
    #[arg(long, conflicts_with = "shape")]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "spec")]
    pub shape: Option<ShapeName>,
    #[arg(long)]
    pub radius: Option<f64>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub r_in: Option<f64>,
    #[arg(long)]
    pub r_out: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long)]
    pub fillet: Option<f64>,
    #[arg(long)]
    pub disk_r: Option<f64>,
    #[arg(long)]
    pub center_gap: Option<f64>,
    #[arg(long)]
    pub neck_gap: Option<f64>,
    /// Implicit function of x and y, negative inside.
    #[arg(long)]
    pub expr: Option<String>,
    /// Box for the implicit contour: x0,y0,x1,y1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub bounds: Option<Vec<f64>>,
    /// Marching-squares cells per axis.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Number of samples.
    #[arg(long)]
    pub n: Option<usize>,
    /// Length of the scaled normals.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Write a JSON summary here ("-" for stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Input {
    /// Boundary file (.csv, .obj or .off).
    #[arg(long = "in")]
    pub path: PathBuf,
    /// Override the format guessed from the extension.
    #[arg(long)]
    pub format: Option<String>,
    /// JSON report destination; stdout when omitted or "-".
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub input: Input,
    /// Radius to test; defaults to the length of the stored normals.
    #[arg(long)]
    pub r: Option<f64>,
    /// Draw the boundary and the evidence as SVG.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: Input,
    /// Initial upper end of the bracket; grows while it still certifies.
    #[arg(long)]
    pub hi: Option<f64>,
    /// Stop once (r_hi - r_lo) / r_hi drops to this.
    #[arg(long, default_value_t = 1e-3)]
    pub rel_gap: f64,
}

#[derive(Debug, Args)]
pub struct GeodesicArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub from: usize,
    #[arg(long)]
    pub to: usize,
    /// Also build the chord-doubling polygon to this depth.
    #[arg(long)]
    pub chord_double: Option<usize>,
    /// Radius for the curvature certificate and the arctan bound.
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long, default_value_t = 10)]
    pub top: usize,
}
