//! Numerical checks of the global hypotheses and conclusions: integrability
//! of `|∇u − V|`, Hessian growth, flux decay, relative nullity, Bernstein
//! classification and definiteness of `P_1`.

mod bernstein;
mod definiteness;
mod hessian;
mod integrability;
mod nullity;
mod yau;

pub use bernstein::{bernstein_classify, BernsteinConfig, BernsteinReport, Classification, SignSummary};
pub use definiteness::{p1_definiteness, DefinitenessReport, DEFINITENESS_TOL};
pub use hessian::{
    hessian_bound, hessian_ratio, HessianBoundReport, HessianLevel, HessianVerdict, SampleBox, GROWTH_FACTOR,
    MAX_GRID_POINTS, STABLE_TOL,
};
pub use integrability::{l1_integrability, IntegrabilityReport, IntegrabilityVerdict, INCREMENT_TOL};
pub use nullity::{
    analyse_shape, nullity_report, shape_rank, NullityReport, NullitySample, ShapeNullity, CASCADE_SLACK, CASCADE_TOL,
    DEFAULT_TOL_RANK,
};
pub use yau::{yau_flux_diagnostic, YauReport, YauVerdict, FLUX_TOL};
