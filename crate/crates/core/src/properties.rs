//! Randomised invariants across modules.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{analyse_shape, l1_integrability, p1_definiteness, IntegrabilityVerdict, DEFAULT_TOL_RANK};
use crate::curvature::{graph_frame, lr_divergence_check, newton_stack, support_data, ShapeSign, TestFunction};
use crate::field::{Builtin, ScalarField};
use crate::foliation::{residual_sweep, sample, FoliationSpec, Identity, Orientation, CURVATURE_SIGN};
use crate::jet::{fd_jet2, jet2, Jet2, SymMatrix};

fn arb_jet() -> impl Strategy<Value = Jet2> {
    (2usize..=8).prop_flat_map(|n| {
        (prop::collection::vec(-3.0f64..3.0, n), prop::collection::vec(-3.0f64..3.0, n * (n + 1) / 2)).prop_map(
            move |(gradient, entries)| {
                let mut hessian = SymMatrix::zeros(n);
                let mut k = 0;
                for i in 0..n {
                    for j in i..n {
                        hessian.set(i, j, entries[k]);
                        k += 1;
                    }
                }
                Jet2 { point: vec![0.0; n], value: 0.0, gradient, hessian }
            },
        )
    })
}

fn arb_symmetric(max_norm: f64) -> impl Strategy<Value = DMatrix<f64>> {
    (2usize..=8).prop_flat_map(move |n| {
        prop::collection::vec(-1.0f64..1.0, n * n).prop_map(move |e| {
            let m = DMatrix::from_vec(n, n, e);
            let s = (&m + m.transpose()) * 0.5;
            let norm = s.clone().symmetric_eigen().eigenvalues.amax();
            if norm > max_norm {
                s * (max_norm / norm)
            } else {
                s
            }
        })
    })
}

fn eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let mut l: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    l.sort_by(f64::total_cmp);
    l
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn all_builtins() -> Vec<ScalarField> {
    vec![
        Builtin::paraboloid(2).unwrap(),
        Builtin::paraboloid(3).unwrap(),
        Builtin::product_degenerate(3, 1, vec![0.5, 1.5]).unwrap(),
        Builtin::product_degenerate(2, 1, vec![1.0]).unwrap(),
        Builtin::affine(vec![1.0, -2.0], 0.5).unwrap(),
        Builtin::affine_plus_gaussian(vec![0.3]).unwrap(),
        Builtin::affine_plus_gaussian(vec![0.3, -0.1]).unwrap(),
    ]
}

fn random_point(rng: &mut ChaCha8Rng, n: usize, radius: f64) -> Vec<f64> {
    loop {
        let p: Vec<f64> = (0..n).map(|_| rng.random_range(-radius..radius)).collect();
        if p.iter().map(|x| x * x).sum::<f64>() <= radius * radius {
            return p;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn frame_and_newton_invariants(jet in arb_jet()) {
        let f = graph_frame(&jet).unwrap();
        let n = jet.dim();
        let g = jet.gradient_vector();
        prop_assert!((f.w * f.w - 1.0 - g.norm_squared()).abs() <= 1e-12 * f.w * f.w);
        prop_assert!((f.normal.norm() - 1.0).abs() <= 1e-12);
        for i in 0..n {
            prop_assert!((f.normal[i] + g[i] / f.w).abs() <= 1e-12);
        }
        prop_assert!((f.normal[n] - 1.0 / f.w).abs() <= 1e-12);
        let metric = DMatrix::identity(n, n) + &g * g.transpose();
        prop_assert!((&f.metric - &metric).amax() <= 1e-12 * metric.amax());
        prop_assert!((&f.second_ff - jet.hessian_matrix() / f.w).amax() <= 1e-12);
        prop_assert!((&f.metric * &f.shape - &f.second_ff).amax() <= 1e-9 * f.second_ff.amax().max(1.0));
        prop_assert!(f.self_adjointness_defect() <= 1e-10);
        prop_assert!(f.eigen_residual() <= 1e-9);
        prop_assert!(f.principal_curvatures.windows(2).all(|w| w[0] <= w[1]));

        let st = f.newton_stack(ShapeSign::MinusDN);
        prop_assert_eq!(st.s[0], 1.0);
        for r in 1..=n {
            let rec = DMatrix::identity(n, n) * st.s[r] - &st.shape * &st.p[r - 1];
            prop_assert!((&st.p[r] - rec).amax() <= 1e-12 * st.p[r].amax().max(1.0));
        }
        let scale = st.p.iter().map(|m| m.amax()).fold(1.0, f64::max);
        prop_assert!(st.polynomial_form_defect() <= 1e-10 * scale);
        for r in 0..=n {
            prop_assert!(st.trace_residuals(r).max_relative() <= 1e-9);
        }
        prop_assert!(st.cayley_hamilton_defect() <= 1e-9 * scale);
    }

    #[test]
    fn operator_norm_bounds_every_newton_tensor(a in arb_symmetric(1.0), seed in any::<u64>()) {
        let n = a.nrows();
        let st = newton_stack(&a, &eigenvalues(&a)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
        for r in 0..=n {
            prop_assert!((&st.p[r] * &v).norm() <= st.norm_bound * v.norm() + 1e-12);
            // |S_k| ≤ C(n,k) and ‖A^j‖ ≤ 1 when ‖A‖ ≤ 1
            let crude: f64 = (0..=r).map(|j| binomial(n, r - j)).sum();
            let op = st.p[r].clone().symmetric_eigen().eigenvalues.amax();
            prop_assert!(op <= crude + 1e-12);
            prop_assert!(op <= st.norm_bound + 1e-12);
        }
    }

    #[test]
    fn support_data_invariants(jet in arb_jet(), seed in any::<u64>()) {
        let n = jet.dim();
        let f = graph_frame(&jet).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let s = support_data(&f, &jet.point, jet.value, &v).unwrap();
        prop_assert!(s.utan_ambient.dot(&f.normal).abs() <= 1e-12 * s.u_vec.norm().max(1.0));
        let zero = support_data(&f, &jet.point, jet.value, &vec![0.0; n]).unwrap();
        prop_assert!(zero.f > 0.0 && (zero.f - 1.0 / f.w).abs() <= 1e-15);
        let bound = jet.gradient_vector().norm() / f.w;
        prop_assert!(zero.utan_norm <= bound + 1e-12);
    }

    #[test]
    fn affine_graphs_are_totally_geodesic(
        v in prop::collection::vec(-5.0f64..5.0, 1..6),
        b in -5.0f64..5.0,
        scale in 0.1f64..10.0,
        q in prop::collection::vec(-10.0f64..10.0, 6),
    ) {
        let n = v.len();
        // u(s·x) is affine again with linear part s·V
        let scaled: Vec<f64> = v.iter().map(|c| c * scale).collect();
        for coeffs in [&v, &scaled] {
            let u = Builtin::affine(coeffs.clone(), b).unwrap();
            let f = graph_frame(&jet2(&u, &q[..n]).unwrap()).unwrap();
            let st = f.newton_stack(ShapeSign::MinusDN);
            prop_assert!(st.s[1..].iter().all(|s| *s == 0.0));
        }
    }

    #[test]
    fn vanishing_cascade(
        n in 2usize..=8,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = rng.random_range(0..n);
        let rank = rng.random_range(0..=r);
        let q = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q();
        let mut a = DMatrix::zeros(n, n);
        for k in 0..rank {
            let c = rng.random_range(0.1..3.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            a += q.column(k) * q.column(k).transpose() * c;
        }
        let st = newton_stack(&a, &eigenvalues(&a)).unwrap();
        if st.s_at(r + 1).abs() <= 1e-12 && st.s_at(r + 2).abs() <= 1e-12 {
            for j in r + 1..=n {
                prop_assert!(st.s[j].abs() <= 1e-9);
            }
            let sh = analyse_shape(&a, &st.s, st.norm_bound, r, DEFAULT_TOL_RANK);
            prop_assert!(sh.rank <= r);
            prop_assert_eq!(sh.rank + sh.nullity, n);
            prop_assert!(sh.cascade_holds);
        }
    }

    #[test]
    fn foliation_samples_have_unit_normal_and_tangent_x(
        family in 0usize..3,
        n in 1usize..=3,
        coords in prop::collection::vec(-2.0f64..2.0, 5),
        inward in any::<bool>(),
    ) {
        let o = if inward { Orientation::Inward } else { Orientation::Outward };
        let (spec, point) = match family {
            0 => (
                FoliationSpec::graph_translates(Builtin::paraboloid(n).unwrap(), o),
                coords[..=n].to_vec(),
            ),
            1 => {
                let n = n.max(2);
                let spec = FoliationSpec::concentric_cylinders(n, 1, o).unwrap();
                let mut p = coords[..=n].to_vec();
                if p[0].hypot(p[1]) < 0.1 {
                    p[0] += 0.5;
                }
                (spec, p)
            }
            _ => {
                let mut p = coords[..n + 2].to_vec();
                let len = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                if len < 0.1 || p[n + 1].abs() > 0.99 * len {
                    p[0] += 1.0;
                }
                let len = p.iter().map(|x| x * x).sum::<f64>().sqrt();
                p.iter_mut().for_each(|x| *x /= len);
                (FoliationSpec::geodesic_spheres(n, o).unwrap(), p)
            }
        };
        let s = sample(&spec, &point).unwrap();
        prop_assert!((s.normal_norm() - 1.0).abs() <= 1e-12);
        prop_assert!(s.x_dot_normal().abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 10_000, max_global_rejects: 1_000_000, ..ProptestConfig::default() })]

    #[test]
    fn p1_is_definite_whenever_s2_is_positive(
        lambda in prop::collection::vec(-3.0f64..3.0, 2..=8),
    ) {
        let s1: f64 = lambda.iter().sum();
        let s2 = (s1 * s1 - lambda.iter().map(|l| l * l).sum::<f64>()) / 2.0;
        prop_assume!(s2 > 0.0);
        prop_assert!(p1_definiteness(&lambda, 1.0).unwrap().is_positive_definite);
        prop_assert!(p1_definiteness(&lambda, -1.0).unwrap().is_positive_definite);
    }
}

#[test]
fn jet_finite_differences_converge_at_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let hs = [1e-2, 1e-3, 1e-4];
    for u in all_builtins() {
        for _ in 0..100 {
            let p = random_point(&mut rng, u.dim(), 3.0);
            let exact = jet2(&u, &p).unwrap();
            let scale = exact.hessian.packed().iter().chain(&exact.gradient).fold(1.0f64, |m, x| m.max(x.abs()));
            let err: Vec<f64> = hs.iter().map(|&h| fd_jet2(&u, &p, h).unwrap().max_derivative_diff(&exact)).collect();
            // Second differences lose ~eps/h² to roundoff, so the order is read
            // off the first pair and the last step only has to stay small.
            let floor = 1e-9 * scale;
            if err[1] > floor {
                let order = (err[0] / err[1]).log10();
                assert!(order >= 1.9, "{u} at {p:?}: order {order}, errors {err:?}");
            }
            assert!(err[2] <= 1e-6 * scale, "{u} at {p:?}: errors {err:?}");
        }
    }
}

#[test]
fn divergence_oracle_converges_on_every_builtin() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let steps = [4e-3, 2e-3, 1e-3];
    for u in all_builtins() {
        let n = u.dim();
        for _ in 0..20 {
            let p = random_point(&mut rng, n, 1.0);
            let v = random_point(&mut rng, n, 1.0);
            for r in 0..n {
                for which in [TestFunction::G, TestFunction::F] {
                    let res: Vec<_> = steps
                        .iter()
                        .map(|&h| lr_divergence_check(&u, &p, &v, r, which, h, ShapeSign::PlusDN).unwrap())
                        .collect();
                    let floor = 1e-8 * res[2].closed_form.abs().max(1.0);
                    if res[2].residual <= floor {
                        continue;
                    }
                    for i in 1..3 {
                        let order = (res[i - 1].residual / res[i].residual).log2();
                        assert!(order >= 1.8, "{u} r={r} {which:?} at {p:?}: order {order}");
                    }
                }
            }
        }
    }
}

#[test]
fn translate_identities_converge_at_second_order() {
    let steps = [4e-3, 2e-3, 1e-3];
    let cases = [
        (Builtin::paraboloid(1).unwrap(), vec![0.8, 0.0]),
        (Builtin::affine_plus_gaussian(vec![0.5, 0.2]).unwrap(), vec![0.3, -0.6, 1.0]),
        (Builtin::product_degenerate(3, 1, vec![1.0, -0.5]).unwrap(), vec![0.4, 0.2, 0.7, 0.0]),
    ];
    for (u, p) in cases {
        let spec = FoliationSpec::graph_translates(u.clone(), Orientation::Outward);
        for r in 0..u.dim().min(2) {
            for identity in [Identity::Leaf, Identity::Ambient] {
                let rows = residual_sweep(&spec, &p, r, &steps, identity, CURVATURE_SIGN).unwrap();
                if rows[2].residual <= 1e-9 * rows[2].rhs.abs().max(1.0) {
                    continue;
                }
                for row in &rows[1..] {
                    let order = row.order_estimate.unwrap();
                    assert!(order >= 1.8, "{u} r={r} {identity:?}: order {order}");
                }
            }
        }
    }
}

#[test]
fn integrability_verdicts_are_stable_under_doubling_the_order() {
    let cases = [
        (Builtin::affine_plus_gaussian(vec![0.0]).unwrap(), vec![0.0]),
        (Builtin::affine_plus_gaussian(vec![1.0, -1.0]).unwrap(), vec![1.0, -1.0]),
        (Builtin::paraboloid(2).unwrap(), vec![0.0, 0.0]),
        (Builtin::product_degenerate(2, 1, vec![1.0]).unwrap(), vec![0.0, 0.0]),
    ];
    let radii = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    for (u, v) in cases {
        let lo = l1_integrability(&u, &v, &radii, 6).unwrap();
        let hi = l1_integrability(&u, &v, &radii, 12).unwrap();
        assert_eq!(lo.verdict, hi.verdict, "{u}");
        if lo.verdict == IntegrabilityVerdict::Converged {
            let (a, b) = (lo.limit_estimate.unwrap(), hi.limit_estimate.unwrap());
            assert!((a - b).abs() <= 1e-5, "{u}: {a} vs {b}");
        }
    }
}
