use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Comma-separated list of reals, e.g. `1,0,-2.5`.
#[derive(Debug, Clone, PartialEq)]
pub struct Floats(pub Vec<f64>);

impl FromStr for Floats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Floats(Vec::new()));
        }
        s.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", t.trim())))
            .collect::<Result<Vec<_>, _>>()
            .map(Floats)
    }
}

/// Semicolon-separated list of points, e.g. `1,0;0.5,2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Points(pub Vec<Vec<f64>>);

impl FromStr for Points {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split(';')
            .filter(|t| !t.trim().is_empty())
            .map(|t| t.parse::<Floats>().map(|f| f.0))
            .collect::<Result<Vec<_>, _>>()
            .map(Points)
    }
}

#[derive(Debug, Parser)]
#[command(name = "curvlab", version, about = "Curvature diagnostics for graph hypersurfaces and foliations")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Graph frame at a point: W, N, G, B, A and principal curvatures.
    #[command(args_override_self = true)]
    Frame(FrameArgs),
    /// Newton tensors, S_r and trace identities at a point.
    #[command(args_override_self = true)]
    Newton(NewtonArgs),
    /// Support functions f, g and the operators L_r g, L_r f at a point.
    #[command(args_override_self = true)]
    Lr(LrArgs),
    /// Divergence oracle for L_r g and L_r f over a step-size sweep.
    #[command(name = "check-lr", args_override_self = true)]
    CheckLr(CheckLrArgs),
    /// Truncated integrals of |∇u − V| over growing balls.
    #[command(args_override_self = true)]
    Integrability(IntegrabilityArgs),
    /// Growth of |Hess u|² / (1 + |∇u|²) over nested boxes.
    #[command(name = "hessian-bound", args_override_self = true)]
    HessianBound(HessianArgs),
    /// Boundary flux of P_r applied to the tangential part of U.
    #[command(args_override_self = true)]
    Yau(YauArgs),
    /// Rank and relative nullity of the shape operator at sample points.
    #[command(args_override_self = true)]
    Nullity(NullityArgs),
    /// Full Bernstein-type classification pipeline.
    #[command(args_override_self = true)]
    Bernstein(BernsteinArgs),
    /// Leaf data and divergence identities of a foliation at a point.
    #[command(args_override_self = true)]
    Foliation(FoliationArgs),
    /// r-minimality audit of the concentric-cylinder foliation.
    #[command(args_override_self = true)]
    Audit(AuditArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Frame(_) => "frame",
            Command::Newton(_) => "newton",
            Command::Lr(_) => "lr",
            Command::CheckLr(_) => "check-lr",
            Command::Integrability(_) => "integrability",
            Command::HessianBound(_) => "hessian-bound",
            Command::Yau(_) => "yau",
            Command::Nullity(_) => "nullity",
            Command::Bernstein(_) => "bernstein",
            Command::Foliation(_) => "foliation",
            Command::Audit(_) => "audit",
        }
    }
}

pub const COMMAND_NAMES: [&str; 11] = [
    "frame",
    "newton",
    "lr",
    "check-lr",
    "integrability",
    "hessian-bound",
    "yau",
    "nullity",
    "bernstein",
    "foliation",
    "audit",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BuiltinName {
    ProductDegenerate,
    Paraboloid,
    Affine,
    AffinePlusGaussian,
}

/// Where `u` comes from. Exactly one of `--expr` and `--builtin`.
#[derive(Debug, Clone, Args)]
pub struct FieldArgs {
    /// Expression text over x1..xn.
    #[arg(long)]
    pub expr: Option<String>,

    /// Named example family.
    #[arg(long, value_enum)]
    pub builtin: Option<BuiltinName>,

    /// Dimension n of the domain.
    #[arg(long)]
    pub n: usize,

    /// Split index of the product-degenerate family; defaults to `--r` where the command has one.
    #[arg(long)]
    pub split: Option<usize>,

    /// Coefficients α_{split+1}..α_n of the product-degenerate family; default all 1.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<Floats>,

    /// Linear part of the affine families; defaults to `--V`.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<Floats>,

    /// Offset of the affine family.
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    MinusDn,
    PlusDn,
}

#[derive(Debug, Clone, Args)]
pub struct FrameArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Floats,
}

#[derive(Debug, Clone, Args)]
pub struct NewtonArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Floats,
    /// Shape-operator sign; the frame convention `A = −D̄N` by default.
    #[arg(long, value_enum, default_value_t = SignArg::MinusDn)]
    pub shape_sign: SignArg,
}

#[derive(Debug, Clone, Args)]
pub struct LrArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Floats,
    /// Constant vector V; zero by default.
    #[arg(long = "V", visible_alias = "v", allow_hyphen_values = true)]
    pub v: Option<Floats>,
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    /// Step of the derivative of S_{r+1} along U⊤.
    #[arg(long, default_value_t = 1e-3)]
    pub h: f64,
    /// Shape-operator sign; the calibrated sign by default.
    #[arg(long, value_enum)]
    pub shape_sign: Option<SignArg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WhichArg {
    F,
    G,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct CheckLrArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub point: Floats,
    #[arg(long = "V", visible_alias = "v", allow_hyphen_values = true)]
    pub v: Option<Floats>,
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[arg(long, value_enum, default_value_t = WhichArg::Both)]
    pub which: WhichArg,
    /// Step sizes, coarse to fine.
    #[arg(long, default_value = "4e-3,2e-3,1e-3")]
    pub h: Floats,
    #[arg(long, value_enum)]
    pub shape_sign: Option<SignArg>,
}

#[derive(Debug, Clone, Args)]
pub struct IntegrabilityArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long = "V", visible_alias = "v", allow_hyphen_values = true)]
    pub v: Option<Floats>,
    /// Increasing radius schedule.
    #[arg(long, default_value = "1,2,4,8")]
    pub radii: Floats,
    /// Gauss–Legendre order per panel.
    #[arg(long, default_value_t = 6)]
    pub order: usize,
}

#[derive(Debug, Clone, Args)]
pub struct HessianArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Box centre; the origin by default.
    #[arg(long, allow_hyphen_values = true)]
    pub center: Option<Floats>,
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 9)]
    pub points_per_axis: usize,
    /// Candidate constant C to test `ratio ≤ C`.
    #[arg(long)]
    pub candidate_c: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct YauArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long = "V", visible_alias = "v", allow_hyphen_values = true)]
    pub v: Option<Floats>,
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[arg(long, default_value = "1,2,4,8")]
    pub radii: Floats,
    #[arg(long, default_value_t = 6)]
    pub order: usize,
    #[arg(long, value_enum)]
    pub shape_sign: Option<SignArg>,
}

#[derive(Debug, Clone, Args)]
pub struct NullityArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    /// Explicit sample points; a centred grid otherwise.
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<Points>,
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 5)]
    pub points_per_axis: usize,
    #[arg(long, default_value_t = curvlab::analysis::DEFAULT_TOL_RANK)]
    pub tol_rank: f64,
}

#[derive(Debug, Clone, Args)]
pub struct BernsteinArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[arg(long = "V", visible_alias = "v", allow_hyphen_values = true)]
    pub v: Option<Floats>,
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[arg(long)]
    pub radii: Option<Floats>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub tol_rank: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    GraphTranslates,
    ConcentricCylinders,
    GeodesicSpheres,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrientationArg {
    Outward,
    Inward,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IdentityArg {
    Leaf,
    Ambient,
}

#[derive(Debug, Clone, Args)]
pub struct FoliationArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Leaf function of the graph-translate family.
    #[arg(long)]
    pub expr: Option<String>,
    #[arg(long, value_enum)]
    pub builtin: Option<BuiltinName>,
    /// Leaf dimension n.
    #[arg(long)]
    pub n: usize,
    /// Cylinder index, or split index of the product-degenerate family; defaults to 1.
    #[arg(long)]
    pub split: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<Floats>,
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<Floats>,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub b: f64,
    /// Ambient point.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<Floats>,
    /// Geodesic distance from the pole (geodesic-spheres only).
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, value_enum, default_value_t = OrientationArg::Outward)]
    pub orientation: OrientationArg,
    #[arg(long, default_value_t = 0)]
    pub r: usize,
    #[arg(long, value_enum, default_value_t = IdentityArg::Leaf)]
    pub identity: IdentityArg,
    /// Step sizes, coarse to fine.
    #[arg(long, default_value = "4e-3,2e-3,1e-3")]
    pub h: Floats,
}

#[derive(Debug, Clone, Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub n: usize,
    /// Cylinder index r of S^r × R^{n−r}.
    #[arg(long)]
    pub r: usize,
    /// Cylinder radii, one sample point each.
    #[arg(long, default_value = "0.5,1,2")]
    pub radii: Floats,
    /// Explicit ambient sample points; overrides `--radii`.
    #[arg(long, allow_hyphen_values = true)]
    pub points: Option<Points>,
    #[arg(long, value_enum, default_value_t = OrientationArg::Outward)]
    pub orientation: OrientationArg,
}
