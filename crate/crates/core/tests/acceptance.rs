mod common;

use std::cell::{Cell, RefCell};
use std::process::ExitCode;
use std::time::Instant;

use carleman_core::applications::{catenoid_decay_report, conformal_necessity, yamabe_constant, ConformalOutcome};
use carleman_core::funcjet::{make_family, FunctionJet3};
use carleman_core::geometry::{cutoff_ladder, curvature_at, ricci_quadratic_check, WarpedCylinder};
use carleman_core::grid;
use carleman_core::quad::QuadConfig;
use carleman_core::regimes::{
    admissible_tau0, corollary_certificate, parse_growth, AsymptoticSymbol, CaseId, CaseParams, CertificateOptions,
    CorollaryCase,
};
use carleman_core::verifier::{mode_carleman_report, run_battery, BumpKind, RadialTestFunction, ReportOptions};
use carleman_core::weights::{admissibility_scan, leading_order, K2Choice, Quantity};
use carleman_core::Error;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        max_global_rejects: 100_000,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

fn weight_identities() -> Outcome {
    let draws = Cell::new(0usize);
    let worst_a = Cell::new(0.0f64);
    let worst_fd = Cell::new(0.0f64);
    let strategy = (case_strategy(), 0.0..3.0f64, 0.0..3.0f64);
    runner(200)
        .run(&strategy, |((id, p, n), te, re)| {
            let Some((case, w, r)) = draw_weights(id, p, n, te, re) else {
                return Err(TestCaseError::reject("outside f64 range"));
            };
            let (want, scale) = a_oracle(&w, r);
            let got = w.at(r).map_err(|e| TestCaseError::fail(e.to_string()))?.a;
            let err = (got - want).abs() / scale;
            worst_a.set(worst_a.get().max(err));
            if err > 1e-10 {
                return Err(TestCaseError::fail(format!("{id} p={p} n={n} r={r}: A error {err:e}")));
            }
            let mut jets = vec![w.h.clone(), w.g.clone(), w.cyl.sigma.clone()];
            if let K2Choice::Jet(fam) = &case.family.k2 {
                jets.push(fam.at(w.tau));
            }
            for f in &jets {
                let e = jet_fd_mismatch(f, r);
                worst_fd.set(worst_fd.get().max(e));
                if e > 1e-6 {
                    return Err(TestCaseError::fail(format!("{id} jet {f} at r={r}: mismatch {e:e}")));
                }
            }
            draws.set(draws.get() + 1);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "{} draws, max A error {:.2e}, max jet mismatch {:.2e}",
        draws.get(),
        worst_a.get(),
        worst_fd.get()
    ))
}

fn leading_order_regression() -> Outcome {
    let tau = 100.0;
    let mut lines = Vec::new();
    for beta in [1.0, 4.0 / 3.0, 2.0] {
        let case = CorollaryCase::build(CaseId::EuA, CaseParams::new(beta, 3)).map_err(|e| e.to_string())?;
        let fit = leading_order(&case.family, Quantity::K2L, tau, case.window).map_err(|e| e.to_string())?;
        let (exp_want, coef_want) = (2.0 * beta - 2.0, 2.0 * beta * beta * tau * tau);
        let exp_gap = if exp_want == 0.0 {
            fit.exponent.abs()
        } else {
            (fit.exponent / exp_want - 1.0).abs()
        };
        let coef_gap = (fit.coefficient / coef_want - 1.0).abs();
        if exp_gap > 0.02 || coef_gap > 0.05 {
            return Err(format!(
                "Eu-a beta={beta}: exponent {} vs {exp_want}, coefficient {} vs {coef_want}",
                fit.exponent, fit.coefficient
            ));
        }
        lines.push(format!("beta={beta:.4}: exp gap {exp_gap:.1e}, coef gap {coef_gap:.1e}"));
    }
    let mut worst_hyp = 0.0f64;
    for beta in [1.0, 1.5, 2.0] {
        let case = CorollaryCase::build(CaseId::HypA, CaseParams::new(beta, 3)).map_err(|e| e.to_string())?;
        for t in [1.0, 10.0, 100.0] {
            let w = case.family.at(t).map_err(|e| e.to_string())?;
            for r in grid::geometric(0.5, 30.0, 25) {
                let want = t * beta * r.powf(beta - 1.0) + 0.5 * (3.0 - 1.0) / r.tanh() - 0.5;
                let got = w.at(r).map_err(|e| e.to_string())?.f;
                worst_hyp = worst_hyp.max((got - want).abs() / want.abs());
            }
        }
    }
    let mut worst_exb = 0.0f64;
    for beta in [0.5, 1.0, 2.0] {
        let n = 3;
        let case = CorollaryCase::build(CaseId::ExB, CaseParams::new(beta, n)).map_err(|e| e.to_string())?;
        for t in [1.0, 10.0, 100.0] {
            let w = case.family.at(t).map_err(|e| e.to_string())?;
            for r in grid::geometric(0.5, 10.0, 25) {
                let want = 0.5 * (t + n as f64 - 2.0) * beta * r.powf(beta - 1.0);
                let got = w.at(r).map_err(|e| e.to_string())?.f;
                worst_exb = worst_exb.max((got - want).abs() / want.abs());
            }
        }
    }
    if worst_hyp > 1e-12 || worst_exb > 1e-12 {
        return Err(format!("F closed forms: hyperbolic {worst_hyp:e}, exotic b {worst_exb:e}"));
    }
    Ok(format!(
        "{}; F hyperbolic {worst_hyp:.1e}, F exotic b {worst_exb:.1e}",
        lines.join("; ")
    ))
}

fn battery_sweep() -> Outcome {
    let quad = QuadConfig::default();
    let opts = CertificateOptions::default();
    let (mut n_tests, mut n_fail, mut n_err, mut n_degen) = (0, 0, 0, 0);
    let mut min_margin = f64::INFINITY;
    let mut worst_scaling = 0.0f64;
    for id in CaseId::ALL {
        for p in id.samples() {
            let params = CaseParams::new(p, 3);
            let tau0 = admissible_tau0(id, params, 10.0, &opts)
                .map_err(|e| e.to_string())?
                .ok_or_else(|| format!("{id} {p}: no admissible ladder"))?;
            let taus = [tau0, 2.0 * tau0, 4.0 * tau0];
            let case = CorollaryCase::build(id, params).map_err(|e| e.to_string())?;
            let mut r0 = 0.0f64;
            for &t in &taus {
                let w = case.family.at(t).map_err(|e| e.to_string())?;
                let lo = 2.0f64.max(1.05 * w.domain_min());
                let scan = admissibility_scan(&w, lo, 1e5, 256).map_err(|e| e.to_string())?;
                r0 = r0.max(scan.first_admissible_r.ok_or("no admissible radius")?);
            }
            let a = 1.25 * r0;
            let bumps = BumpKind::ALL
                .iter()
                .map(|&k| RadialTestFunction::new(a, 2.0 * a, k))
                .collect::<Result<Vec<_>, Error>>()
                .map_err(|e| e.to_string())?;
            let lambdas = case.family.cyl.spectrum.first(4);
            let summary = run_battery(id.name(), &case.family, &taus, &lambdas, &bumps, &quad);
            n_tests += summary.n_tests;
            n_fail += summary.n_failures;
            n_err += summary.n_errors;
            n_degen += summary.n_degenerate;
            if let Some(m) = summary.min_margin {
                min_margin = min_margin.min(m);
            }

            let w = case.family.at(tau0).map_err(|e| e.to_string())?;
            for rho in &bumps {
                let o = ReportOptions::default();
                let base = mode_carleman_report(&w, lambdas[1], rho, &quad, &o).map_err(|e| e.to_string())?;
                for s in [1e3, 1e-3] {
                    let m = mode_carleman_report(&w, lambdas[1], &rho.scaled(s), &quad, &o)
                        .map_err(|e| e.to_string())?;
                    worst_scaling = worst_scaling.max((m.margin - base.margin).abs());
                }
            }
        }
    }
    let detail = format!(
        "{n_tests} instances, {n_fail} violations, {n_err} errors, {n_degen} degenerate, min margin {min_margin:.3}, amplitude drift {worst_scaling:.1e}"
    );
    if n_tests >= 180 && n_fail == 0 && n_err == 0 && n_degen == 0 && worst_scaling <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn certificate_suite() -> Outcome {
    let base = CertificateOptions::default();
    let mut passed = 0;
    let mut failures = Vec::new();
    let mut raised = Vec::new();
    for id in CaseId::ALL {
        for p in id.samples() {
            let params = CaseParams::new(p, 3);
            let tau0 = admissible_tau0(id, params, 10.0, &base)
                .map_err(|e| e.to_string())?
                .unwrap_or(10.0);
            if tau0 != 10.0 {
                raised.push(format!("{id} {p}: tau0 = {tau0}"));
            }
            match corollary_certificate(id, params, &CertificateOptions::with_tau0(tau0)) {
                Ok(c) if c.verdict => passed += 1,
                Ok(c) => failures.push(format!("{id} {p}: {}", c.failing_stage().unwrap_or("?"))),
                Err(e) => failures.push(format!("{id} {p}: {e}")),
            }
        }
    }
    let hyp = corollary_certificate(CaseId::HypB, CaseParams::new(3.0, 3), &base).map_err(|e| e.to_string())?;
    let conditions = &hyp.stage("conditions").ok_or("no conditions stage")?.details;
    let by_name = |name: &str| {
        conditions
            .as_array()
            .and_then(|a| a.iter().find(|v| v["condition"] == name))
            .cloned()
            .unwrap_or_default()
    };
    let growth_bound_fails = by_name("growth-bound")["symbolic"] == "fails";
    let gradient_holds = by_name("gradient-decay")["symbolic"] == "holds";
    let demands = hyp.notes.iter().any(|n| n.contains("gradient growth condition must be assumed"));
    let rejected = matches!(
        corollary_certificate(CaseId::EuA, CaseParams::new(3.0, 3), &base),
        Err(Error::ParamRange { ref hint, .. }) if hint.contains("Eu-c")
    );
    let detail = format!(
        "{passed}/21 certificates pass{}; Hyp-b beta=3 growth bound fails: {growth_bound_fails}, gradient condition demanded: {demands} and met: {gradient_holds}; Eu-a beta=3 redirected to Eu-c: {rejected}",
        if raised.is_empty() { String::new() } else { format!(" ({})", raised.join(", ")) }
    );
    if passed == 21 && failures.is_empty() && growth_bound_fails && gradient_holds && demands && rejected {
        Ok(detail)
    } else {
        Err(format!("{detail}; failures: {failures:?}"))
    }
}

fn cutoff_suite() -> Outcome {
    let profile = make_family("smoothstep", &[]).map_err(|e| e.to_string())?;
    let sigmas = [
        ("r", FunctionJet3::power(1.0)),
        ("sinh", FunctionJet3::sinh()),
        ("exp(r^2)", FunctionJet3::exp_rbeta(2.0).map_err(|e| e.to_string())?),
    ];
    let mut parts = Vec::new();
    for (name, sigma) in sigmas {
        let cyl = WarpedCylinder::over_sphere(3, sigma, 0.0, 1).map_err(|e| e.to_string())?;
        let ladder = cutoff_ladder(&cyl, &[10.0, 100.0, 1000.0], &profile).map_err(|e| e.to_string())?;
        let g0 = ladder.reports[0].grad_sup_scaled;
        let spread = ladder
            .reports
            .iter()
            .map(|c| (c.grad_sup_scaled - g0).abs() / g0)
            .fold(0.0, f64::max);
        if !ladder.verdict || spread > 1e-12 {
            return Err(format!(
                "sigma = {name}: bounded {} (slope {:.3}), grad spread {spread:e}",
                ladder.verdict, ladder.max_growth_exponent
            ));
        }
        parts.push(format!("{name}: C = {:.4}", ladder.fitted_constant));
    }
    Ok(parts.join(", "))
}

fn curvature_suite() -> Outcome {
    let mut worst = 0.0f64;
    for b in [0.0, -1.0, -4.0] {
        let sigma = FunctionJet3::space_form(b).map_err(|e| e.to_string())?;
        let cyl = WarpedCylinder::over_sphere(3, sigma, 0.0, 1).map_err(|e| e.to_string())?;
        for r in grid::geometric(0.2, 10.0, 20) {
            let c = curvature_at(&cyl, r).map_err(|e| e.to_string())?;
            for k in [c.sect_radial, c.sect_tangential] {
                worst = worst.max((k - b).abs() / b.abs().max(1.0));
            }
        }
    }
    let cyl = WarpedCylinder::over_sphere(3, FunctionJet3::exp_rbeta(2.0).map_err(|e| e.to_string())?, 0.0, 1)
        .map_err(|e| e.to_string())?;
    let ricci = ricci_quadratic_check(&cyl, 1e3).map_err(|e| e.to_string())?;
    let detail = format!(
        "space forms max error {worst:.1e}; Ric >= -C(1+r^2) for exp(r^2) with C = {:.4}, stabilized {}",
        ricci.estimate, ricci.verdict
    );
    if worst <= 1e-12 && ricci.verdict && ricci.estimate.is_finite() {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn catenoid_suite() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in 2..=5 {
        let rep = catenoid_decay_report(n, 14.0, &QuadConfig::default()).map_err(|e| e.to_string())?;
        ok &= rep.relative_gap < 0.01
            && rep.max_flux_error <= 1e-10
            && rep.max_residual <= 1e-8
            && rep.q_relative_gap < 0.02;
        parts.push(format!(
            "n={n}: rate {:.5} (gap {:.1e}), q rate {:.4}, flux {:.1e}, residual {:.1e}",
            rep.fitted_rate, rep.relative_gap, rep.q_rate, rep.max_flux_error, rep.max_residual
        ));
    }
    if ok {
        Ok(parts.join("; "))
    } else {
        Err(parts.join("; "))
    }
}

fn conformal_suite() -> Outcome {
    let c3 = yamabe_constant(3);
    let alpha = FunctionJet3::power(2.0);
    let a_sym = AsymptoticSymbol::monomial(1.0, 2.0, 0.0);
    let mut ok = c3 == 0.125;
    for n in 3..=6 {
        let tight = AsymptoticSymbol::exp_power(1.0, -(n as f64 - 2.0) / 4.0, 2.0).map_err(|e| e.to_string())?;
        let slow = parse_growth("exp(-1*r)").map_err(|e| e.to_string())?;
        let v1 = conformal_necessity(n, &alpha, &a_sym, &tight).map_err(|e| e.to_string())?;
        let v2 = conformal_necessity(n, &alpha, &a_sym, &slow).map_err(|e| e.to_string())?;
        ok &= v1.outcome == ConformalOutcome::Contradiction && v2.outcome == ConformalOutcome::NotExcluded;
    }
    let detail = format!("C(3) = {c3}, verdicts for n = 3..6 as expected: {ok}");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn growth_algebra() -> Outcome {
    let trials = 10_000;
    runner(trials)
        .run(&growth_text(), |text| {
            let s = parse_growth(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
            let back = parse_growth(&s.render()).map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert_eq!(back, s);
            Ok(())
        })
        .map_err(|e| format!("round trip: {e}"))?;
    runner(trials)
        .run(&(growth_text(), growth_text(), growth_text()), |(a, b, c)| {
            let parse = |t: &str| parse_growth(t).map_err(|e| TestCaseError::fail(e.to_string()));
            preorder_laws(&parse(&a)?, &parse(&b)?, &parse(&c)?).map_err(TestCaseError::fail)
        })
        .map_err(|e| format!("preorder: {e}"))?;
    Ok(format!("{trials} round-trip trials and {trials} preorder triples"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("weight identities", weight_identities),
        ("leading-order regression", leading_order_regression),
        ("Carleman battery", battery_sweep),
        ("certificate suite", certificate_suite),
        ("cutoff suite", cutoff_suite),
        ("curvature suite", curvature_suite),
        ("catenoid sharpness", catenoid_suite),
        ("conformal necessity", conformal_suite),
        ("growth algebra", growth_algebra),
    ];
    let failed = RefCell::new(Vec::new());
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail}) [{secs:.1}s]", i + 1),
            Err(detail) => {
                println!("criterion {} {name}: FAIL ({detail}) [{secs:.1}s]", i + 1);
                failed.borrow_mut().push(i + 1);
            }
        }
    }
    let failed = failed.into_inner();
    if failed.is_empty() {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
