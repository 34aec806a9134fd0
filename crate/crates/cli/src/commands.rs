use curvlab::analysis::{
    bernstein_classify, hessian_bound, l1_integrability, nullity_report, p1_definiteness, yau_flux_diagnostic,
    BernsteinConfig, SampleBox,
};
use curvlab::curvature::{
    gradients_fg, graph_frame, lr_divergence_check, lr_f, lr_g, resolve_gradient_assignment, resolve_lr_shape_sign,
    support_data, GradientReading, ShapeSign, TestFunction,
};
use curvlab::field::{parse, Builtin, ScalarField};
use curvlab::foliation::{
    calibrate_sigma, convergence_order, leaf_identity_rhs, r_minimal_audit, residual_sweep, sample, FoliationSpec,
    Identity, Orientation,
};
use curvlab::jet::jet2;
use curvlab::quadrature::MONTE_CARLO_SEED;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::output::{format_f64, point_cell};

pub const SCHEMA_VERSION: u32 = 1;

/// Why a run failed, and the matching exit status.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numeric(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            RunError::Config(m) | RunError::Numeric(m) => m,
        }
    }
}

impl From<curvlab::Error> for RunError {
    fn from(e: curvlab::Error) -> Self {
        use curvlab::Error::*;
        match e {
            EigenFailure(_) | SingularSet { .. } | Internal(_) => RunError::Numeric(e.to_string()),
            _ => RunError::Config(e.to_string()),
        }
    }
}

type Run<T> = std::result::Result<T, RunError>;

fn config_err<T>(msg: impl Into<String>) -> Run<T> {
    Err(RunError::Config(msg.into()))
}

/// A finished computation: the JSON result and, for sweeps, CSV rows.
pub struct Report {
    pub input: Value,
    pub result: Value,
    pub orientation: Orientation,
    pub csv: Option<(Vec<&'static str>, Vec<Vec<String>>)>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize to JSON")
}

fn matrix(m: &DMatrix<f64>) -> Value {
    json!((0..m.nrows()).map(|i| m.row(i).iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn vector(v: &DVector<f64>) -> Value {
    json!(v.iter().copied().collect::<Vec<_>>())
}

fn sign_of(arg: SignArg) -> ShapeSign {
    match arg {
        SignArg::MinusDn => ShapeSign::MinusDN,
        SignArg::PlusDn => ShapeSign::PlusDN,
    }
}

fn calibrated_sign(arg: Option<SignArg>) -> Run<ShapeSign> {
    match arg {
        Some(a) => Ok(sign_of(a)),
        None => Ok(resolve_lr_shape_sign()?.sign),
    }
}

fn orientation_of(arg: OrientationArg) -> Orientation {
    match arg {
        OrientationArg::Outward => Orientation::Outward,
        OrientationArg::Inward => Orientation::Inward,
    }
}

fn check_len(name: &str, v: &[f64], n: usize) -> Run<()> {
    if v.len() != n {
        return config_err(format!("--{name} has {} components, expected {n}", v.len()));
    }
    Ok(())
}

fn vector_or_zero(name: &str, v: &Option<Floats>, n: usize) -> Run<Vec<f64>> {
    match v {
        Some(f) => {
            check_len(name, &f.0, n)?;
            Ok(f.0.clone())
        }
        None => Ok(vec![0.0; n]),
    }
}

struct FieldSource<'a> {
    expr: &'a Option<String>,
    builtin: Option<BuiltinName>,
    n: usize,
    split: Option<usize>,
    alpha: &'a Option<Floats>,
    coeffs: &'a Option<Floats>,
    b: f64,
}

impl<'a> From<&'a FieldArgs> for FieldSource<'a> {
    fn from(a: &'a FieldArgs) -> Self {
        FieldSource {
            expr: &a.expr,
            builtin: a.builtin,
            n: a.n,
            split: a.split,
            alpha: &a.alpha,
            coeffs: &a.coeffs,
            b: a.b,
        }
    }
}

impl FieldSource<'_> {
    /// Builds `u`. `default_split` and `default_v` fill in family parameters
    /// the caller did not give explicitly.
    fn build(&self, default_split: Option<usize>, default_v: &[f64]) -> Run<(ScalarField, Value)> {
        let n = self.n;
        if n == 0 {
            return config_err("--n must be at least 1");
        }
        match (self.expr, self.builtin) {
            (Some(_), Some(_)) => config_err("give exactly one of --expr and --builtin"),
            (None, None) => config_err("missing field source: give --expr or --builtin"),
            (Some(text), None) => {
                let u = parse(text, n)?;
                Ok((u, json!({"expr": text, "n": n})))
            }
            (None, Some(name)) => {
                let coeffs = match self.coeffs {
                    Some(c) => {
                        check_len("coeffs", &c.0, n)?;
                        c.0.clone()
                    }
                    None => default_v.to_vec(),
                };
                let (u, desc) = match name {
                    BuiltinName::Paraboloid => (Builtin::paraboloid(n)?, json!({"builtin": "paraboloid", "n": n})),
                    BuiltinName::Affine => (
                        Builtin::affine(coeffs.clone(), self.b)?,
                        json!({"builtin": "affine", "n": n, "coeffs": coeffs, "b": self.b}),
                    ),
                    BuiltinName::AffinePlusGaussian => (
                        Builtin::affine_plus_gaussian(coeffs.clone())?,
                        json!({"builtin": "affine-plus-gaussian", "n": n, "coeffs": coeffs}),
                    ),
                    BuiltinName::ProductDegenerate => {
                        let Some(split) = self.split.or(default_split) else {
                            return config_err("product-degenerate needs --split");
                        };
                        let alpha = match self.alpha {
                            Some(a) => a.0.clone(),
                            None => vec![1.0; n.saturating_sub(split)],
                        };
                        (
                            Builtin::product_degenerate(n, split, alpha.clone())?,
                            json!({"builtin": "product-degenerate", "n": n, "split": split, "alpha": alpha}),
                        )
                    }
                };
                Ok((u, desc))
            }
        }
    }
}

fn frame(a: &FrameArgs) -> Run<Report> {
    let (u, field) = FieldSource::from(&a.field).build(None, &vec![0.0; a.field.n])?;
    check_len("point", &a.point.0, a.field.n)?;
    let jet = jet2(&u, &a.point.0)?;
    let f = graph_frame(&jet)?;
    Ok(Report {
        input: json!({"field": field, "point": a.point.0}),
        result: json!({
            "value": jet.value,
            "gradient": jet.gradient,
            "hessian": matrix(&jet.hessian_matrix()),
            "W": f.w,
            "normal": vector(&f.normal),
            "metric": matrix(&f.metric),
            "secondFundamentalForm": matrix(&f.second_ff),
            "shape": matrix(&f.shape),
            "principalCurvatures": f.principal_curvatures,
            "eigenResidual": f.eigen_residual(),
            "selfAdjointnessDefect": f.self_adjointness_defect(),
        }),
        orientation: Orientation::Outward,
        csv: None,
    })
}

fn newton(a: &NewtonArgs) -> Run<Report> {
    let (u, field) = FieldSource::from(&a.field).build(None, &vec![0.0; a.field.n])?;
    check_len("point", &a.point.0, a.field.n)?;
    let sign = sign_of(a.shape_sign);
    let f = graph_frame(&jet2(&u, &a.point.0)?)?;
    let st = f.newton_stack(sign);
    let n = f.dim();
    let lambda = f.principal_curvatures_with(sign);
    let traces: Vec<Value> = (0..=n)
        .map(|r| {
            let t = st.trace_residuals(r);
            json!({"r": r, "relativeResidual": t.max_relative()})
        })
        .collect();
    Ok(Report {
        input: json!({"field": field, "point": a.point.0, "shapeSign": sign}),
        result: json!({
            "principalCurvatures": lambda,
            "S": st.s,
            "P": st.p.iter().map(matrix).collect::<Vec<_>>(),
            "normBound": st.norm_bound,
            "traceIdentities": traces,
            "polynomialFormDefect": st.polynomial_form_defect(),
            "cayleyHamiltonDefect": st.cayley_hamilton_defect(),
            "p1Definiteness": to_value(&p1_definiteness(&lambda, 1.0)?),
        }),
        orientation: Orientation::Outward,
        csv: None,
    })
}

fn lr(a: &LrArgs) -> Run<Report> {
    let n = a.field.n;
    let v = vector_or_zero("V", &a.v, n)?;
    let (u, field) = FieldSource::from(&a.field).build(Some(a.r), &v)?;
    check_len("point", &a.point.0, n)?;
    let sign = calibrated_sign(a.shape_sign)?;
    let jet = jet2(&u, &a.point.0)?;
    let f = graph_frame(&jet)?;
    let st = f.newton_stack(sign);
    let s = support_data(&f, &a.point.0, jet.value, &v)?;
    let grads = gradients_fg(&f, &s, gradient_reading()?);
    Ok(Report {
        input: json!({"field": field, "point": a.point.0, "V": v, "r": a.r, "h": a.h, "shapeSign": sign}),
        result: json!({
            "f": s.f,
            "g": s.g,
            "fSign": s.f_sign,
            "utanAmbient": vector(&s.utan_ambient),
            "utanChart": vector(&s.utan_chart),
            "gradF": vector(&grads.grad_f),
            "gradG": vector(&grads.grad_g),
            "S": st.s,
            "LrG": lr_g(&f, &st, &s, a.r)?,
            "LrF": lr_f(&u, &f, &st, &s, a.r, a.h, sign)?,
        }),
        orientation: Orientation::Outward,
        csv: None,
    })
}

fn check_steps(h: &[f64]) -> Run<()> {
    if h.is_empty() || h.iter().any(|x| !(*x > 0.0)) {
        return config_err("--h needs one or more positive step sizes");
    }
    Ok(())
}

fn check_lr(a: &CheckLrArgs) -> Run<Report> {
    let n = a.field.n;
    let v = vector_or_zero("V", &a.v, n)?;
    let (u, field) = FieldSource::from(&a.field).build(Some(a.r), &v)?;
    check_len("point", &a.point.0, n)?;
    check_steps(&a.h.0)?;
    let sign = calibrated_sign(a.shape_sign)?;
    let which: &[TestFunction] = match a.which {
        WhichArg::F => &[TestFunction::F],
        WhichArg::G => &[TestFunction::G],
        WhichArg::Both => &[TestFunction::G, TestFunction::F],
    };
    let mut rows = Vec::new();
    let mut csv_rows = Vec::new();
    for &w in which {
        let mut prev: Option<(f64, f64)> = None;
        for &h in &a.h.0 {
            let c = lr_divergence_check(&u, &a.point.0, &v, a.r, w, h, sign)?;
            let order = prev.and_then(|(h0, r0)| convergence_order(h0, r0, h, c.residual));
            prev = Some((h, c.residual));
            csv_rows.push(vec![
                to_value(&w).as_str().unwrap_or_default().to_string(),
                point_cell(&a.point.0),
                a.r.to_string(),
                format_f64(h),
                format_f64(c.discretized),
                format_f64(c.closed_form),
                format_f64(c.residual),
                order.map(format_f64).unwrap_or_default(),
            ]);
            rows.push(json!({
                "testFunction": w,
                "h": h,
                "discretized": c.discretized,
                "closedForm": c.closed_form,
                "residual": c.residual,
                "orderEstimate": order,
            }));
        }
    }
    Ok(Report {
        input: json!({"field": field, "point": a.point.0, "V": v, "r": a.r, "h": a.h.0, "shapeSign": sign}),
        result: json!({"rows": rows}),
        orientation: Orientation::Outward,
        csv: Some((
            vec!["test-function", "point", "r", "h", "discretized", "closed-form", "residual", "order-estimate"],
            csv_rows,
        )),
    })
}

fn integrability(a: &IntegrabilityArgs) -> Run<Report> {
    let n = a.field.n;
    let v = vector_or_zero("V", &a.v, n)?;
    let (u, field) = FieldSource::from(&a.field).build(None, &v)?;
    let rep = l1_integrability(&u, &v, &a.radii.0, a.order)?;
    let csv = rep
        .radii
        .iter()
        .zip(&rep.truncated_integrals)
        .zip(&rep.sphere_sups)
        .map(|((r, i), s)| vec![format_f64(*r), format_f64(*i), format_f64(*s)])
        .collect();
    Ok(Report {
        input: json!({"field": field, "V": v, "radii": a.radii.0, "order": a.order}),
        result: to_value(&rep),
        orientation: Orientation::Outward,
        csv: Some((vec!["radius", "truncated-integral", "sphere-sup"], csv)),
    })
}

fn hessian(a: &HessianArgs) -> Run<Report> {
    let n = a.field.n;
    let (u, field) = FieldSource::from(&a.field).build(None, &vec![0.0; n])?;
    let center = vector_or_zero("center", &a.center, n)?;
    let domain = SampleBox { center, half_width: a.half_width, points_per_axis: a.points_per_axis };
    let rep = hessian_bound(&u, &domain, a.candidate_c)?;
    Ok(Report {
        input: json!({"field": field, "box": domain, "candidateC": a.candidate_c}),
        result: to_value(&rep),
        orientation: Orientation::Outward,
        csv: None,
    })
}

fn yau(a: &YauArgs) -> Run<Report> {
    let n = a.field.n;
    let v = vector_or_zero("V", &a.v, n)?;
    let (u, field) = FieldSource::from(&a.field).build(Some(a.r), &v)?;
    let sign = calibrated_sign(a.shape_sign)?;
    let rep = yau_flux_diagnostic(&u, &v, a.r, &a.radii.0, a.order, sign)?;
    Ok(Report {
        input: json!({"field": field, "V": v, "r": a.r, "radii": a.radii.0, "order": a.order, "shapeSign": sign}),
        result: to_value(&rep),
        orientation: Orientation::Outward,
        csv: None,
    })
}

fn nullity(a: &NullityArgs) -> Run<Report> {
    let n = a.field.n;
    let (u, field) = FieldSource::from(&a.field).build(Some(a.r), &vec![0.0; n])?;
    let points = match &a.points {
        Some(p) => {
            for q in &p.0 {
                check_len("points", q, n)?;
            }
            p.0.clone()
        }
        None => SampleBox::centered(n, a.half_width, a.points_per_axis).points(),
    };
    let rep = nullity_report(&u, &points, a.tol_rank, a.r)?;
    Ok(Report {
        input: json!({"field": field, "r": a.r, "tolRank": a.tol_rank, "sampleCount": points.len()}),
        result: to_value(&rep),
        orientation: Orientation::Outward,
        csv: None,
    })
}

fn bernstein(a: &BernsteinArgs) -> Run<Report> {
    let n = a.field.n;
    let v = vector_or_zero("V", &a.v, n)?;
    let (u, field) = FieldSource::from(&a.field).build(Some(a.r), &v)?;
    let mut config = BernsteinConfig::default_for(n);
    config.r = a.r;
    if let Some(r) = &a.radii {
        config.radii = r.0.clone();
    }
    if let Some(o) = a.order {
        config.quadrature_order = o;
    }
    if let Some(t) = a.tol_rank {
        config.tol_rank = t;
    }
    let rep = bernstein_classify(&u, &v, &config)?;
    Ok(Report {
        input: json!({"field": field, "V": v, "config": config}),
        result: to_value(&rep),
        orientation: Orientation::Outward,
        csv: None,
    })
}

const SWEEP_COLUMNS: [&str; 8] = ["family", "point", "r", "h", "lhs", "rhs", "residual", "order-estimate"];

fn foliation(a: &FoliationArgs) -> Run<Report> {
    let o = orientation_of(a.orientation);
    let split = a.split.unwrap_or(1);
    let (spec, field) = match a.family {
        FamilyArg::GraphTranslates => {
            let src = FieldSource {
                expr: &a.expr,
                builtin: a.builtin,
                n: a.n,
                split: Some(split),
                alpha: &a.alpha,
                coeffs: &a.coeffs,
                b: a.b,
            };
            let (u, field) = src.build(None, &vec![0.0; a.n])?;
            (FoliationSpec::graph_translates(u, o), field)
        }
        FamilyArg::ConcentricCylinders => {
            (FoliationSpec::concentric_cylinders(a.n, split, o)?, json!({"cylinderIndex": split}))
        }
        FamilyArg::GeodesicSpheres => (FoliationSpec::geodesic_spheres(a.n, o)?, Value::Null),
    };
    if a.family != FamilyArg::GraphTranslates && (a.expr.is_some() || a.builtin.is_some()) {
        return config_err("--expr and --builtin only apply to graph-translates");
    }
    let point = match (&a.point, a.t) {
        (Some(_), Some(_)) => return config_err("give one of --point and --t"),
        (Some(p), None) => p.0.clone(),
        (None, Some(t)) if a.family == FamilyArg::GeodesicSpheres => {
            let mut omega = vec![0.0; a.n + 1];
            omega[0] = 1.0;
            FoliationSpec::sphere_point(t, &omega)
        }
        (None, Some(_)) => return config_err("--t only applies to geodesic-spheres"),
        (None, None) => return config_err("missing --point"),
    };
    check_len("point", &point, spec.ambient_dim())?;
    check_steps(&a.h.0)?;
    let sigma = calibrate_sigma()?.sigma;
    let s = sample(&spec, &point)?;
    let rhs = leaf_identity_rhs(&s, a.r, sigma)?;
    let identity = match a.identity {
        IdentityArg::Leaf => Identity::Leaf,
        IdentityArg::Ambient => Identity::Ambient,
    };
    let rows = residual_sweep(&spec, &point, a.r, &a.h.0, identity, sigma)?;
    let csv = rows
        .iter()
        .map(|row| {
            vec![
                row.family.clone(),
                point_cell(&row.point),
                row.r.to_string(),
                format_f64(row.h),
                format_f64(row.lhs),
                format_f64(row.rhs),
                format_f64(row.residual),
                row.order_estimate.map(format_f64).unwrap_or_default(),
            ]
        })
        .collect();
    Ok(Report {
        input: json!({
            "family": spec.family_name(),
            "n": a.n,
            "field": field,
            "point": point,
            "r": a.r,
            "identity": identity,
            "h": a.h.0,
        }),
        result: json!({
            "sample": to_value(&s.report()),
            "leafIdentityRhs": to_value(&rhs),
            "sweep": to_value(&rows),
        }),
        orientation: o,
        csv: Some((SWEEP_COLUMNS.to_vec(), csv)),
    })
}

fn audit(a: &AuditArgs) -> Run<Report> {
    let o = orientation_of(a.orientation);
    let spec = FoliationSpec::concentric_cylinders(a.n, a.r, o)?;
    let points = match &a.points {
        Some(p) => p.0.clone(),
        None => a
            .radii
            .0
            .iter()
            .map(|&rho| {
                let mut p = vec![0.0; a.n + 1];
                p[0] = rho;
                p
            })
            .collect(),
    };
    for p in &points {
        check_len("points", p, a.n + 1)?;
    }
    let rep = r_minimal_audit(&spec, a.r, &points)?;
    Ok(Report {
        input: json!({"n": a.n, "r": a.r, "points": points}),
        result: to_value(&rep),
        orientation: o,
        csv: None,
    })
}

pub fn dispatch(command: &Command) -> Run<Report> {
    match command {
        Command::Frame(a) => frame(a),
        Command::Newton(a) => newton(a),
        Command::Lr(a) => lr(a),
        Command::CheckLr(a) => check_lr(a),
        Command::Integrability(a) => integrability(a),
        Command::HessianBound(a) => hessian(a),
        Command::Yau(a) => yau(a),
        Command::Nullity(a) => nullity(a),
        Command::Bernstein(a) => bernstein(a),
        Command::Foliation(a) => foliation(a),
        Command::Audit(a) => audit(a),
    }
}

/// Reading of the gradient formulas for `f` and `g`, fixed by a
/// finite-difference match on the paraboloid.
pub fn gradient_reading() -> Run<GradientReading> {
    let u = Builtin::paraboloid(2)?;
    Ok(resolve_gradient_assignment(&u, &[0.4, -0.3], &[0.2, 0.1], 1e-4)?.reading)
}

/// Conventions every JSON report carries.
pub fn metadata(orientation: Orientation) -> Run<Value> {
    Ok(json!({
        "orientation": orientation,
        "sigma": calibrate_sigma()?.sigma,
        "gradientAssignment": gradient_reading()?,
        "lrShapeSign": resolve_lr_shape_sign()?.sign,
        "frameShapeSign": ShapeSign::MinusDN,
        "seed": MONTE_CARLO_SEED,
    }))
}

pub fn envelope(command: &str, report: &Report) -> Run<Value> {
    Ok(json!({
        "schemaVersion": SCHEMA_VERSION,
        "command": command,
        "metadata": metadata(report.orientation)?,
        "input": report.input,
        "result": report.result,
    }))
}
