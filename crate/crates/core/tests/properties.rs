mod common;

use carleman_core::applications::radial_minimal_profile;
use carleman_core::funcjet::{make_family, FunctionJet3};
use carleman_core::geometry::WarpedCylinder;
use carleman_core::quad::QuadConfig;
use carleman_core::regimes::{parse_growth, CaseId, CaseParams, CorollaryCase};
use carleman_core::verifier::{
    mode_carleman_report, weighted_integral_with_shift, BumpKind, RadialTestFunction, ReportOptions,
};
use proptest::prelude::*;

use common::*;

fn family_at() -> impl Strategy<Value = (FunctionJet3, f64)> {
    let pick = |name: &'static str, params: Vec<f64>| make_family(name, &params).unwrap();
    prop_oneof![
        (-3.0..3.0f64, 0.5..50.0f64).prop_map(move |(b, r)| (pick("power", vec![b]), r)),
        (-3.0..3.0f64, 0.5..50.0f64).prop_map(move |(c, r)| (pick("linear", vec![c]), r)),
        (1.5..50.0f64).prop_map(move |r| (pick("log", vec![]), r)),
        (3.0..50.0f64).prop_map(move |r| (pick("loglog", vec![]), r)),
        (0.5..3.0f64, 3.0..50.0f64).prop_map(move |(g, r)| (pick("logpow", vec![g]), r)),
        (-2.0..3.0f64, -2.0..3.0f64, 3.0..50.0f64).prop_map(move |(p, q, r)| (pick("powlog", vec![p, q]), r)),
        (0.2..2.0f64, 0.5..10.0f64).prop_map(move |(a, r)| (pick("sinh", vec![a]), r)),
        (0.2..2.0f64, 0.5..10.0f64).prop_map(move |(a, r)| (pick("cosh", vec![a]), r)),
        (0.2..2.0f64, 0.5..10.0f64).prop_map(move |(b, r)| (pick("exp_rbeta", vec![b]), r)),
        prop_oneof![0.05..0.95f64, 1.05..1.95f64, 2.05..3.0f64]
            .prop_map(move |t| (pick("smoothstep", vec![]), t)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn jets_match_differences((f, r) in family_at()) {
        let e = jet_fd_mismatch(&f, r);
        prop_assert!(e < 1e-6, "{f} at {r}: {e}");
    }

    #[test]
    fn jets_are_linear((f, r) in family_at(), (g, _) in family_at(), a in -5.0..5.0f64, b in -5.0..5.0f64) {
        prop_assume!(g.eval(r).is_ok_and(|j| j.is_finite()));
        let sum = f.scale(a) + g.scale(b);
        let (jf, jg, js) = (f.eval(r).unwrap(), g.eval(r).unwrap(), sum.eval(r).unwrap());
        for k in 0..4 {
            let want = a * jf.d(k) + b * jg.d(k);
            let scale = (a * jf.d(k)).abs() + (b * jg.d(k)).abs();
            prop_assert!((js.d(k) - want).abs() <= 1e-14 * scale.max(1e-300));
        }
    }

    #[test]
    fn a_matches_product_rule_form((id, p, n) in case_strategy(), te in 0.0..3.0f64, re in 0.0..3.0f64) {
        let drawn = draw_weights(id, p, n, te, re);
        prop_assume!(drawn.is_some());
        let (_, w, r) = drawn.unwrap();
        let (want, scale) = a_oracle(&w, r);
        let got = w.at(r).unwrap().a;
        prop_assert!((got - want).abs() <= 1e-10 * scale, "{id} p={p} n={n} r={r}: {got} vs {want}");
    }

    #[test]
    fn growth_round_trip(text in growth_text()) {
        let s = parse_growth(&text).unwrap();
        let back = parse_growth(&s.render()).unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn growth_preorder(a in growth_text(), b in growth_text(), c in growth_text()) {
        let (a, b, c) = (parse_growth(&a).unwrap(), parse_growth(&b).unwrap(), parse_growth(&c).unwrap());
        prop_assert!(preorder_laws(&a, &b, &c).is_ok(), "{:?}", preorder_laws(&a, &b, &c));
    }
}

fn hyperbolic_report_inputs(beta: f64, tau: f64) -> carleman_core::weights::CarlemanWeights {
    let case = CorollaryCase::build(CaseId::HypA, CaseParams::new(beta, 3)).unwrap();
    case.family.at(tau).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn margin_is_homogeneous(beta in 1.0..2.0f64, tau in 5.0..40.0f64, k in 0..3usize, lam in 0usize..4) {
        let w = hyperbolic_report_inputs(beta, tau);
        let rho = RadialTestFunction::new(4.0, 7.0, BumpKind::ALL[k]).unwrap();
        let lambda = w.cyl.spectrum.first(4)[lam];
        let q = QuadConfig::default();
        let o = ReportOptions::default();
        let base = mode_carleman_report(&w, lambda, &rho, &q, &o).unwrap().margin;
        for s in [1e-3, 1e3] {
            let m = mode_carleman_report(&w, lambda, &rho.scaled(s), &q, &o).unwrap().margin;
            prop_assert!((m - base).abs() <= 1e-10, "{m} vs {base}");
        }
    }

    #[test]
    fn weighted_integral_is_shift_invariant(tau in 1.0..500.0f64, a in 1.0..5.0f64, len in 0.5..3.0f64, d in -50.0..50.0f64) {
        let h = FunctionJet3::power(1.0).scale(2.0 * tau);
        let sigma = FunctionJet3::sinh();
        let q = QuadConfig::default();
        let f = |r: f64| Ok(1.0 + r.sin().powi(2));
        let free = weighted_integral_with_shift(f, &h, &sigma, 3, a, a + len, &q, None).unwrap();
        let forced = weighted_integral_with_shift(f, &h, &sigma, 3, a, a + len, &q, Some(free.shift + d)).unwrap();
        let l1 = free.value_scaled.ln() + free.shift;
        let l2 = forced.value_scaled.ln() + forced.shift;
        prop_assert!((l1 - l2).abs() <= 1e-12 * l1.abs().max(1.0), "{l1} {l2}");
    }

    #[test]
    fn lambda_dependence_is_the_expanded_square(beta in 1.0..2.0f64, tau in 5.0..40.0f64, k in 0..3usize, l1 in 0usize..4, l2 in 0usize..4) {
        let w = hyperbolic_report_inputs(beta, tau);
        let rho = RadialTestFunction::new(4.0, 7.0, BumpKind::ALL[k]).unwrap();
        let spec = w.cyl.spectrum.first(4);
        let (la, lb) = (spec[l1], spec[l2]);
        let q = QuadConfig { tol: 1e-13, ..QuadConfig::default() };
        let o = ReportOptions::default();
        let ra = mode_carleman_report(&w, la, &rho, &q, &o).unwrap();
        let rb = mode_carleman_report(&w, lb, &rho, &q, &o).unwrap();
        prop_assert_eq!(ra.shift, rb.shift);
        let m = (w.cyl.n - 1) as f64;
        let cross = |r: f64| {
            let [p0, p1, p2] = rho.jet(r);
            let s = w.cyl.log_sigma(r)?;
            Ok((p2 + m * s.r1 * p1) * p0 * (-2.0 * s.ln_value).exp())
        };
        let quartic = |r: f64| {
            let p0 = rho.jet(r)[0];
            let s = w.cyl.log_sigma(r)?;
            Ok(p0 * p0 * (-4.0 * s.ln_value).exp())
        };
        let i1 = weighted_integral_with_shift(cross, &w.h, &w.cyl.sigma, w.cyl.n, rho.a, rho.b, &q, Some(ra.shift)).unwrap();
        let i2 = weighted_integral_with_shift(quartic, &w.h, &w.cyl.sigma, w.cyl.n, rho.a, rho.b, &q, Some(ra.shift)).unwrap();
        let want = -2.0 * (lb - la) * i1.value_scaled + (lb * lb - la * la) * i2.value_scaled;
        let got = rb.lhs - ra.lhs;
        prop_assert!((got - want).abs() <= 1e-10 * ra.lhs.max(rb.lhs), "{got} vs {want}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn asymptote_increases_with_flux(n in 2usize..=4, c1 in 0.05..0.9f64, c2 in 0.05..0.9f64) {
        prop_assume!((c1 - c2).abs() > 1e-3);
        let cyl = WarpedCylinder::over_sphere(n, FunctionJet3::sinh(), 0.0, 1).unwrap();
        let r_start = 1.0;
        let cap = 1f64.sinh().powi(n as i32 - 1);
        let (lo, hi) = (c1.min(c2) * cap, c1.max(c2) * cap);
        let a = radial_minimal_profile(&cyl, lo, r_start, 8.0, 1e-10).unwrap();
        let b = radial_minimal_profile(&cyl, hi, r_start, 8.0, 1e-10).unwrap();
        prop_assert!(b.asymptote > a.asymptote);
        prop_assert!(a.max_flux_error <= 1e-10 && b.max_flux_error <= 1e-10);
    }
}
