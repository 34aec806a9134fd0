//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use curvlab::analysis::{
    analyse_shape, bernstein_classify, hessian_bound, l1_integrability, nullity_report, p1_definiteness,
    BernsteinConfig, Classification, HessianVerdict, IntegrabilityVerdict, SampleBox, DEFAULT_TOL_RANK,
};
use curvlab::curvature::{
    graph_frame, lr_divergence_check, newton_stack, resolve_gradient_assignment, GradientReading, ShapeSign,
    TestFunction,
};
use curvlab::field::{parse, Builtin, ScalarField};
use curvlab::foliation::{
    leaf_identity_lhs, leaf_identity_rhs, r_minimal_audit, residual_sweep, sample, FoliationSpec, Identity,
    Orientation, CURVATURE_SIGN,
};
use curvlab::jet::jet2;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEPS: [f64; 3] = [4e-3, 2e-3, 1e-3];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&m + m.transpose()) * 0.5
}

fn random_orthogonal(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q()
}

fn sorted_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut l: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    l.sort_by(f64::total_cmp);
    l
}

/// Worst measured order over consecutive step pairs, or `None` when the
/// finest residual is already below `floor`.
fn worst_order(res: &[f64], floor: f64) -> Option<f64> {
    if res[res.len() - 1] <= floor {
        return None;
    }
    (1..res.len()).map(|i| (res[i - 1] / res[i]).ln() / (STEPS[i - 1] / STEPS[i]).ln()).reduce(f64::min)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut poly, mut trace, mut cayley, mut poly_abs) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for k in 0..200 {
        let n = 2 + k % 7;
        let a = random_symmetric(&mut rng, n);
        let st = newton_stack(&a, &sorted_eigenvalues(&a)).unwrap();
        let scale = st.p.iter().map(|m| m.amax()).fold(1.0, f64::max);
        poly = poly.max(st.polynomial_form_defect() / scale);
        poly_abs = poly_abs.max(st.polynomial_form_defect());
        for r in 0..=n {
            trace = trace.max(st.trace_residuals(r).max_relative());
        }
        cayley = cayley.max(st.cayley_hamilton_defect());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        poly <= 1e-10 && trace <= 1e-9 && cayley <= 1e-9 && secs < 5.0,
        format!(
            "expansion defect {poly:.2e} (absolute {poly_abs:.2e}), trace identities {trace:.2e}, P_n {cayley:.2e}, {secs:.2}s"
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let cases: Vec<(ScalarField, Vec<f64>, Vec<f64>)> = vec![
        (Builtin::paraboloid(1).unwrap(), vec![0.7], vec![0.3]),
        (Builtin::paraboloid(2).unwrap(), vec![0.5, -0.4], vec![0.2, 0.1]),
        (Builtin::paraboloid(3).unwrap(), vec![0.3, -0.2, 0.4], vec![0.1, 0.0, -0.2]),
        (Builtin::product_degenerate(2, 1, vec![1.0]).unwrap(), vec![0.6, 0.5], vec![0.1, -0.3]),
        (Builtin::product_degenerate(3, 1, vec![1.0, 1.0]).unwrap(), vec![0.4, 0.3, 0.5], vec![0.2, 0.1, 0.0]),
        (Builtin::product_degenerate(3, 2, vec![0.5]).unwrap(), vec![0.3, -0.4, 0.6], vec![0.0, 0.2, 0.1]),
    ];
    let mut worst = f64::INFINITY;
    let mut floored = 0;
    let mut measured = 0;
    let mut failures = Vec::new();
    for (u, p, v) in &cases {
        for r in 0..u.dim() {
            for which in [TestFunction::G, TestFunction::F] {
                let checks: Vec<_> = STEPS
                    .iter()
                    .map(|&h| lr_divergence_check(u, p, v, r, which, h, ShapeSign::PlusDN).unwrap())
                    .collect();
                let res: Vec<f64> = checks.iter().map(|c| c.residual).collect();
                let floor = 1e-9 * checks[2].closed_form.abs().max(1.0);
                match worst_order(&res, floor) {
                    None => floored += 1,
                    Some(o) => {
                        measured += 1;
                        worst = worst.min(o);
                        if o < 1.8 {
                            failures.push(format!("{u} r={r} {which:?}: order {o:.2}"));
                        }
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        failures.is_empty() && secs < 30.0,
        format!(
            "{measured} measured (worst order {worst:.3}), {floored} at roundoff floor, {secs:.2}s {}",
            failures.join("; ")
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let families = [
        Builtin::paraboloid(2).unwrap(),
        Builtin::product_degenerate(3, 1, vec![1.0, 1.0]).unwrap(),
        Builtin::affine_plus_gaussian(vec![0.5, -0.5]).unwrap(),
    ];
    let mut readings = Vec::new();
    let mut worst = 0.0f64;
    for u in &families {
        let n = u.dim();
        for _ in 0..20 {
            let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let res = resolve_gradient_assignment(u, &p, &v, 1e-4).unwrap();
            worst = worst.max(res.residual);
            readings.push(res.reading);
        }
    }
    let consistent = readings.iter().all(|r| *r == readings[0]);
    let label = match readings[0] {
        GradientReading::Swapped => "grad f = -A(U^T), grad g = U^T",
        GradientReading::AsPrinted => "grad f = U^T, grad g = -A(U^T)",
    };
    outcome(
        consistent && worst <= 1e-5,
        format!(
            "{} points, assignment {label}, identical everywhere: {consistent}, worst residual {worst:.2e}",
            readings.len()
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (n, r) = (3, 1);
    let u = Builtin::product_degenerate(n, r, vec![1.0, 1.0]).unwrap();
    let mut samples = Vec::new();
    while samples.len() < 50 {
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        if (p[1] + p[2]).abs() > 0.1 {
            samples.push(p);
        }
    }
    let mut worst_s = 0.0f64;
    for p in &samples {
        let st = graph_frame(&jet2(&u, p).unwrap()).unwrap().newton_stack(ShapeSign::MinusDN);
        worst_s = worst_s.max(st.s_at(r + 1).abs()).max(st.s_at(r + 2).abs());
    }
    let nul = nullity_report(&u, &samples, DEFAULT_TOL_RANK, r).unwrap();
    let nu_ok = nul.samples.iter().filter(|s| s.shape.nullity == n - r).count();
    let hess = hessian_bound(&u, &SampleBox::centered(n, 2.0, 9), None).unwrap();
    let l1 = l1_integrability(&u, &[0.0; 3], &[1.0, 2.0, 4.0, 8.0], 6).unwrap();
    let par = Builtin::paraboloid(2).unwrap();
    let phess = hessian_bound(&par, &SampleBox::centered(2, 2.0, 9), Some(8.0)).unwrap();
    let pl1 = l1_integrability(&par, &[0.0, 0.0], &[1.0, 2.0, 4.0, 8.0], 6).unwrap();
    let parts = [
        (worst_s <= 1e-12, format!("max |S_2|,|S_3| = {worst_s:.3e}")),
        (nu_ok == samples.len(), format!("nullity n-r at {nu_ok}/{} samples", samples.len())),
        (hess.verdict == HessianVerdict::Unbounded, format!("Hessian {:?}", hess.verdict)),
        (l1.verdict == IntegrabilityVerdict::Diverging, format!("L1 {:?}", l1.verdict)),
        (phess.sup_ratio <= 8.0, format!("paraboloid supRatio {}", phess.sup_ratio)),
        (pl1.verdict == IntegrabilityVerdict::Diverging, format!("paraboloid L1 {:?}", pl1.verdict)),
    ];
    let detail = parts.iter().map(|(ok, d)| format!("{}{d}", if *ok { "" } else { "[x] " })).collect::<Vec<_>>();
    outcome(parts.iter().all(|p| p.0), detail.join(", "))
}

fn criterion_5() -> Outcome {
    let u = Builtin::affine_plus_gaussian(vec![0.0]).unwrap();
    let rep = l1_integrability(&u, &[0.0], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 8).unwrap();
    let last = *rep.truncated_integrals.last().unwrap();
    outcome(
        rep.verdict == IntegrabilityVerdict::Converged && (last - 2.0).abs() <= 1e-6,
        format!("I(6) = {last:.15}, verdict {:?}", rep.verdict),
    )
}

fn criterion_6() -> Outcome {
    let v = vec![0.3, -0.7];
    let affine =
        bernstein_classify(&Builtin::affine(v.clone(), 2.0).unwrap(), &v, &BernsteinConfig::default_for(2)).unwrap();
    let par =
        bernstein_classify(&Builtin::paraboloid(2).unwrap(), &[0.0, 0.0], &BernsteinConfig::default_for(2)).unwrap();
    let pd = bernstein_classify(
        &Builtin::product_degenerate(3, 1, vec![1.0, 1.0]).unwrap(),
        &[0.0; 3],
        &BernsteinConfig::default_for(3),
    )
    .unwrap();
    outcome(
        affine.classification == Classification::HyperplaneOrthogonalToU
            && par.classification == Classification::HypothesesNotMet
            && pd.classification == Classification::HypothesesNotMet,
        format!(
            "affine {:?}, paraboloid {:?}, product-degenerate {:?}",
            affine.classification, par.classification, pd.classification
        ),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut draws, mut counterexamples, mut oracle_disagreements) = (0, 0, 0);
    while draws < 10_000 {
        let n = rng.random_range(2..=8);
        let lambda: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let s1: f64 = lambda.iter().sum();
        let s2 = (s1 * s1 - lambda.iter().map(|l| l * l).sum::<f64>()) / 2.0;
        if s2 <= 0.0 {
            continue;
        }
        draws += 1;
        let rep = match p1_definiteness(&lambda, 1.0) {
            Ok(rep) => rep,
            Err(_) => {
                counterexamples += 1;
                continue;
            }
        };
        if !rep.is_positive_definite {
            counterexamples += 1;
        }
        // brute force: P_1 = tr(A) I − A for A with spectrum ±λ, in a random basis
        let sign = if s1 < 0.0 { -1.0 } else { 1.0 };
        let q = random_orthogonal(&mut rng, n);
        let d = DMatrix::from_diagonal(&DVector::from_iterator(n, lambda.iter().map(|l| l * sign)));
        let a = &q * d * q.transpose();
        let p1 = DMatrix::identity(n, n) * a.trace() - &a;
        let min = sorted_eigenvalues(&p1)[0];
        if (min > 0.0) != rep.is_positive_definite {
            oracle_disagreements += 1;
        }
    }
    outcome(
        counterexamples == 0 && oracle_disagreements == 0,
        format!("{draws} draws with S_2 > 0, {counterexamples} counterexamples, {oracle_disagreements} oracle disagreements"),
    )
}

fn criterion_8() -> Outcome {
    let mut failures = Vec::new();
    // concentric cylinders
    let mut cyl_worst = 0.0f64;
    for (n, r) in [(2, 1), (3, 1), (3, 2)] {
        let spec = FoliationSpec::concentric_cylinders(n, r, Orientation::Outward).unwrap();
        let pts: Vec<Vec<f64>> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&rho| {
                let mut p = vec![0.25; n + 1];
                p[..=r].iter_mut().for_each(|c| *c = 0.0);
                p[0] = rho;
                p
            })
            .collect();
        for p in &pts {
            let s = sample(&spec, p).unwrap();
            for k in 0..n {
                let lhs = leaf_identity_lhs(&spec, p, k, 1e-3).unwrap();
                let rhs = leaf_identity_rhs(&s, k, CURVATURE_SIGN).unwrap().total;
                cyl_worst = cyl_worst.max(lhs.abs()).max(rhs.abs());
            }
        }
        if !r_minimal_audit(&spec, r, &pts).unwrap().passed {
            failures.push(format!("audit (n={n}, r={r})"));
        }
    }
    if cyl_worst > 1e-10 {
        failures.push(format!("cylinder identity {cyl_worst:.2e}"));
    }
    // geodesic spheres against the closed forms with κ = −cot t
    let mut sph_worst = 0.0f64;
    for n in [2, 3] {
        let spec = FoliationSpec::geodesic_spheres(n, Orientation::Outward).unwrap();
        for t in [PI / 6.0, PI / 4.0, PI / 3.0] {
            let mut omega = vec![0.0; n + 1];
            omega[n] = 1.0;
            let s = sample(&spec, &FoliationSpec::sphere_point(t, &omega)).unwrap();
            let kappa = -t.cos() / t.sin();
            let csc2 = 1.0 / t.sin().powi(2);
            for r in 0..n {
                let c = binomial(n - 1, r) * n as f64;
                let tr_p = c * kappa.powi(r as i32);
                let tr_a2p = c * kappa.powi(r as i32 + 2);
                let ns = binomial(n, r + 1) * (r + 1) as f64 * kappa.powi(r as i32) * csc2;
                let rhs = leaf_identity_rhs(&s, r, CURVATURE_SIGN).unwrap();
                let scale = ns.abs().max(1.0);
                sph_worst = sph_worst
                    .max((rhs.curvature_term - tr_p).abs() / scale)
                    .max((rhs.trace_a2p - tr_a2p).abs() / scale)
                    .max((rhs.normal_derivative - ns).abs() / scale)
                    .max((tr_p + tr_a2p - ns).abs() / scale);
            }
        }
    }
    if sph_worst > 1e-12 {
        failures.push(format!("sphere closed forms {sph_worst:.2e}"));
    }
    // graph-translates
    let graphs: Vec<(ScalarField, Vec<f64>)> = vec![
        (Builtin::paraboloid(1).unwrap(), vec![1.0, 1.0]),
        (Builtin::paraboloid(2).unwrap(), vec![0.5, 0.5, 0.5]),
        (parse("x1^2 + x2^2*0.5 + x1*x3 + x3^2", 3).unwrap(), vec![0.4, -0.3, 0.2, 0.0]),
    ];
    let mut worst_order_seen = f64::INFINITY;
    let mut floored = 0;
    for (u, p) in &graphs {
        let spec = FoliationSpec::graph_translates(u.clone(), Orientation::Outward);
        for r in 0..u.dim().min(2) {
            for identity in [Identity::Leaf, Identity::Ambient] {
                let rows = residual_sweep(&spec, p, r, &STEPS, identity, CURVATURE_SIGN).unwrap();
                let res: Vec<f64> = rows.iter().map(|row| row.residual).collect();
                let floor = 1e-9 * rows[2].rhs.abs().max(1.0);
                match worst_order(&res, floor) {
                    None => floored += 1,
                    Some(o) => {
                        worst_order_seen = worst_order_seen.min(o);
                        if o < 1.8 {
                            failures.push(format!("{u} r={r} {identity:?} order {o:.2}"));
                        }
                    }
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "cylinders max |lhs|,|rhs| {cyl_worst:.1e}; sphere closed forms {sph_worst:.1e}; graph-translates worst order {worst_order_seen:.3} ({floored} at floor) {}",
            failures.join("; ")
        ),
    )
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `½ xᵀQx` as expression text.
fn quadratic_form(q: &DMatrix<f64>) -> String {
    let n = q.nrows();
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            terms.push(format!("{:?}*x{}*x{}", 0.5 * q[(i, j)], i + 1, j + 1));
        }
    }
    terms.join(" + ")
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut worst_s, mut nullity_failures, mut cascade_failures) = (0.0f64, 0, 0);
    for _ in 0..1000 {
        let n = rng.random_range(2..=8);
        let r = rng.random_range(0..n);
        let rank = rng.random_range(0..=r);
        let basis = random_orthogonal(&mut rng, n);
        let mut q = DMatrix::zeros(n, n);
        for k in 0..rank {
            let c: f64 = rng.random_range(0.2..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            let v = basis.column(k);
            q += v * v.transpose() * c;
        }
        // the operator itself
        let st = newton_stack(&q, &sorted_eigenvalues(&q)).unwrap();
        for j in r + 1..=n {
            worst_s = worst_s.max(st.s[j].abs());
        }
        let sh = analyse_shape(&q, &st.s, st.norm_bound, r, DEFAULT_TOL_RANK);
        if sh.nullity < n - r {
            nullity_failures += 1;
        }
        // the graph of ½ xᵀQx at a random point
        let u = parse(&quadratic_form(&q), n).unwrap();
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rep = nullity_report(&u, std::slice::from_ref(&p), DEFAULT_TOL_RANK, r).unwrap();
        if rep.verdict_nullity_lower_bound < n - r {
            nullity_failures += 1;
        }
        for j in r + 1..=n {
            worst_s = worst_s.max(rep.samples[0].s[j].abs());
        }
        if !rep.cascade_holds || !sh.cascade_holds {
            cascade_failures += 1;
        }
    }
    outcome(
        worst_s <= 1e-9 && nullity_failures == 0 && cascade_failures == 0,
        format!("1000 operators: max |S_j| (j > r) {worst_s:.2e}, nullity failures {nullity_failures}, cascade failures {cascade_failures}"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("newton-stack algebra", criterion_1),
        ("divergence oracle for L_r g and L_r f", criterion_2),
        ("gradient assignment of f and g", criterion_3),
        ("product-degenerate and paraboloid examples", criterion_4),
        ("L1 quadrature accuracy", criterion_5),
        ("Bernstein pipeline", criterion_6),
        ("P_1 definiteness", criterion_7),
        ("foliation identities", criterion_8),
        ("vanishing cascade", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(run))
            .unwrap_or_else(|e| outcome(false, format!("panicked: {:?}", e.downcast_ref::<String>())));
        let tag = if result.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {} ({name}): {}", i + 1, result.detail);
        if !result.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
