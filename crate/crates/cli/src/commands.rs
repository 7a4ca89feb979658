use std::collections::BTreeMap;

use carleman_core::applications::{catenoid_decay_report, conformal_necessity, yamabe_constant};
use carleman_core::funcjet::FunctionJet3;
use carleman_core::geometry::{check_sigma_growth, curvature_at, cutoff_ladder, ricci_quadratic_check, WarpedCylinder};
use carleman_core::grid;
use carleman_core::quad::QuadConfig;
use carleman_core::regimes::growth::symbol_of;
use carleman_core::regimes::{
    admissible_tau0, compare_growth, corollary_certificate, parse_growth, CaseId, CaseParams, CertificateOptions,
    CorollaryCase,
};
use carleman_core::report::{to_json, Table};
use carleman_core::verifier::{run_battery, verify_extended, BumpKind, RadialTestFunction, TailProfile};
use carleman_core::weights::{admissibility_scan, tau_ladder, K2Choice, TauFamily, WeightFamily};
use serde::Serialize;

use crate::config::Settings;
use crate::error::{AtStage, CliError, Invalid};
use crate::selfcheck;

pub struct Ctx {
    pub quad: QuadConfig,
    pub timing: bool,
    pub seed: u64,
}

impl Ctx {
    pub fn from_settings(s: &Settings) -> Result<Ctx, CliError> {
        let tol = s.f64("quad-tol")?;
        if !(tol > 0.0 && tol < 1e-2) {
            return Err(CliError::usage(format!("--quad-tol must lie in (0, 1e-2), got {tol}")));
        }
        Ok(Ctx {
            quad: QuadConfig {
                tol,
                ..QuadConfig::default()
            },
            timing: !s.bool("no-timing")?,
            seed: s.u64("seed")?,
        })
    }
}

pub struct Artifact {
    pub name: &'static str,
    pub content: String,
}

#[derive(Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: Vec<String>,
    /// Negative verdict, reported after the artifacts are written.
    pub failure: Option<CliError>,
}

impl Outcome {
    fn fail_if(&mut self, bad: bool, stage: &str, detail: impl FnOnce() -> String) {
        if bad && self.failure.is_none() {
            self.failure = Some(CliError::stage(stage, detail()));
        }
    }
}

type Job = Box<dyn FnOnce(&Ctx) -> Result<Outcome, CliError>>;

/// A validated command, ready to run.
pub struct Planned {
    pub artifacts: Vec<&'static str>,
    pub run: Job,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    settings: &'a BTreeMap<&'static str, String>,
    result: &'a T,
}

fn json<T: Serialize>(s: &Settings, result: &T) -> Result<String, CliError> {
    to_json(&Envelope {
        command: s.command,
        settings: &s.recorded(),
        result,
    })
    .at("report")
}

pub fn plan(s: &Settings) -> Result<Planned, CliError> {
    match s.command {
        "weights" => plan_weights(s),
        "scan" => plan_scan(s),
        "verify" => plan_verify(s),
        "extended" => plan_extended(s),
        "certify" => plan_certify(s),
        "curvature" => plan_curvature(s),
        "cutoff" => plan_cutoff(s),
        "catenoid" => plan_catenoid(s),
        "conformal" => plan_conformal(s),
        "growth" => plan_growth(s),
        other => Err(CliError::usage(format!("unknown command `{other}`"))),
    }
}

fn case_params(s: &Settings) -> Result<(CaseId, CaseParams), CliError> {
    let id: CaseId = s.str("case")?.parse().invalid("--case")?;
    let (want, other) = if id == CaseId::EuB {
        ("gamma", "beta")
    } else {
        ("beta", "gamma")
    };
    if s.has(other) {
        return Err(CliError::usage(format!("case {id} takes --{want}, not --{other}")));
    }
    let p = s.f64(want)?;
    let n = s.usize("n")?;
    let params = CaseParams::new(p, n);
    CorollaryCase::build(id, params).invalid("case")?;
    Ok((id, params))
}

fn build_case(s: &Settings) -> Result<CorollaryCase, CliError> {
    let (id, params) = case_params(s)?;
    CorollaryCase::build(id, params).invalid("case")
}

fn descriptor(s: &Settings, key: &str) -> Result<FunctionJet3, CliError> {
    FunctionJet3::parse(s.str(key)?).invalid(&format!("--{key}"))
}

/// The registry case, or a custom bundle with `k2 = max(min(k2L, k2R), 0)`.
fn weight_family(s: &Settings) -> Result<WeightFamily, CliError> {
    match (s.has("case"), s.has("sigma") || s.has("h")) {
        (true, true) => Err(CliError::usage("give either --case or --sigma/--h, not both")),
        (true, false) => Ok(build_case(s)?.family),
        (false, true) => {
            let n = s.usize("n")?;
            let cyl = WarpedCylinder::over_sphere(n, descriptor(s, "sigma")?, s.f64("r0")?, 4).invalid("geometry")?;
            Ok(WeightFamily {
                cyl,
                h: TauFamily::proportional(descriptor(s, "h")?),
                g: descriptor(s, "g")?,
                k2: K2Choice::HalfMin,
            })
        }
        (false, false) => Err(CliError::usage("give --case, or --sigma and --h for a custom bundle")),
    }
}

fn radial_window(s: &Settings, family: &WeightFamily, tau: f64) -> Result<(f64, f64), CliError> {
    let w = family.at(tau).invalid("--tau")?;
    let lo = match s.opt_f64("r-min")? {
        Some(v) => v,
        None => 2f64.max(1.05 * w.domain_min()),
    };
    let hi = s.f64("r-max")?;
    if !(lo > w.domain_min() && hi > lo) {
        return Err(CliError::usage(format!(
            "radial window [{lo}, {hi}] must satisfy {} < r-min < r-max",
            w.domain_min()
        )));
    }
    Ok((lo, hi))
}

fn positive_count(s: &Settings, key: &str, min: usize) -> Result<usize, CliError> {
    let v = s.usize(key)?;
    if v < min {
        return Err(CliError::usage(format!("--{key} must be at least {min}, got {v}")));
    }
    Ok(v)
}

fn positive(s: &Settings, key: &str) -> Result<f64, CliError> {
    let v = s.f64(key)?;
    if !(v > 0.0) {
        return Err(CliError::usage(format!("--{key} must be positive, got {v}")));
    }
    Ok(v)
}

fn plan_weights(s: &Settings) -> Result<Planned, CliError> {
    let family = weight_family(s)?;
    let tau = positive(s, "tau")?;
    let (lo, hi) = radial_window(s, &family, tau)?;
    let points = positive_count(s, "points", 2)?;
    Ok(Planned {
        artifacts: vec!["weights.csv"],
        run: Box::new(move |_| {
            let w = family.at(tau).at("weights")?;
            let mut table = Table::new(&["r", "F", "F1", "F2", "A", "A1", "k2L", "k2R", "k2", "k2_prime", "k1max"]);
            for r in grid::geometric(lo, hi, points) {
                let p = w.at(r).at("weights")?;
                table.push_floats(&[p.r, p.f, p.f1, p.f2, p.a, p.a1, p.k2l, p.k2r, p.k2, p.k2_prime, p.k1max]);
            }
            Ok(Outcome {
                artifacts: vec![Artifact {
                    name: "weights.csv",
                    content: table.to_csv().at("report")?,
                }],
                summary: vec![format!("{points} radii in [{lo}, {hi}] at tau = {tau}")],
                failure: None,
            })
        }),
    })
}

fn plan_scan(s: &Settings) -> Result<Planned, CliError> {
    let family = weight_family(s)?;
    let tau = positive(s, "tau")?;
    let (lo, hi) = radial_window(s, &family, tau)?;
    let points = positive_count(s, "points", 2)?;
    let s = s.clone();
    Ok(Planned {
        artifacts: vec!["scan.json", "scan.csv"],
        run: Box::new(move |_| {
            let w = family.at(tau).at("admissibility")?;
            let scan = admissibility_scan(&w, lo, hi, points).at("admissibility")?;
            let mut table = Table::new(&["r", "k2L", "k2R", "two_min", "k2", "k1max"]);
            for row in &scan.rows {
                table.push_floats(&[row.r, row.k2l, row.k2r, row.two_min, row.k2, row.k1max]);
            }
            let mut out = Outcome {
                artifacts: vec![
                    Artifact {
                        name: "scan.json",
                        content: json(&s, &scan)?,
                    },
                    Artifact {
                        name: "scan.csv",
                        content: table.to_csv().at("report")?,
                    },
                ],
                summary: vec![match scan.first_admissible_r {
                    Some(r) => format!("admissible from r = {r} on [{lo}, {hi}]"),
                    None => format!("no admissible tail on [{lo}, {hi}]"),
                }],
                failure: None,
            };
            out.fail_if(scan.first_admissible_r.is_none(), "admissibility", || {
                format!("weights are not admissible at the end of [{lo}, {hi}] for tau = {tau}")
            });
            Ok(out)
        }),
    })
}

/// Largest first-admissible radius over the ladder.
fn admissible_radius(case: &CorollaryCase, taus: &[f64]) -> Result<f64, CliError> {
    let mut r0 = 0.0f64;
    for &t in taus {
        let w = case.family.at(t).at("admissibility")?;
        let lo = 2f64.max(1.05 * w.domain_min());
        let scan = admissibility_scan(&w, lo, 1e5, 256).at("admissibility")?;
        let r = scan
            .first_admissible_r
            .ok_or_else(|| CliError::stage("admissibility", format!("no admissible tail below 1e5 at tau = {t}")))?;
        r0 = r0.max(r);
    }
    Ok(r0)
}

fn bump_kinds(s: &Settings) -> Result<Vec<BumpKind>, CliError> {
    s.str("bumps")?
        .split(',')
        .map(|name| {
            let name = name.trim();
            BumpKind::ALL
                .into_iter()
                .find(|k| k.name() == name)
                .ok_or_else(|| CliError::usage(format!("unknown bump `{name}` (expected exp-bump, quintic-bump or shifted-sine-squared)")))
        })
        .collect()
}

fn plan_verify(s: &Settings) -> Result<Planned, CliError> {
    let case = build_case(s)?;
    let taus = tau_ladder(positive(s, "tau0")?, positive_count(s, "steps", 1)?);
    let lambdas = case.family.cyl.spectrum.first(positive_count(s, "modes", 1)?);
    let kinds = bump_kinds(s)?;
    let support = match s.opt_list("support")? {
        None => None,
        Some(v) if v.len() == 2 && v[0] > case.family.cyl.r0 && v[1] > v[0] => Some((v[0], v[1])),
        Some(v) => {
            return Err(CliError::usage(format!(
                "--support expects a,b with r0 = {} < a < b, got {v:?}",
                case.family.cyl.r0
            )))
        }
    };
    let s = s.clone();
    Ok(Planned {
        artifacts: vec!["verify.json"],
        run: Box::new(move |ctx| {
            let (a, b) = match support {
                Some(ab) => ab,
                None => {
                    let r0 = admissible_radius(&case, &taus)?;
                    (1.25 * r0, 2.5 * r0)
                }
            };
            let bumps = kinds
                .iter()
                .map(|&k| RadialTestFunction::new(a, b, k))
                .collect::<Result<Vec<_>, _>>()
                .at("battery")?;
            let mut battery = run_battery(case.id.name(), &case.family, &taus, &lambdas, &bumps, &ctx.quad);
            if !ctx.timing {
                battery = battery.without_timing();
            }
            let mut out = Outcome {
                summary: vec![format!(
                    "{} instances on [{a}, {b}]: {} violations, {} errors, {} degenerate, min margin {}",
                    battery.n_tests,
                    battery.n_failures,
                    battery.n_errors,
                    battery.n_degenerate,
                    battery.min_margin.map_or("none".into(), |m| format!("{m:.4}")),
                )],
                ..Outcome::default()
            };
            out.fail_if(
                battery.no_tests || battery.n_failures + battery.n_errors + battery.n_degenerate > 0,
                "battery",
                || out_of_battery(&battery),
            );
            out.artifacts.push(Artifact {
                name: "verify.json",
                content: json(&s, &battery)?,
            });
            Ok(out)
        }),
    })
}

fn out_of_battery(b: &carleman_core::verifier::BatterySummary) -> String {
    match b.failures().next() {
        Some(c) => format!(
            "{} failing cell(s); first at tau = {}, lambda = {}, {}: {}",
            b.failures().count(),
            c.tau,
            c.lambda,
            c.bump,
            c.error.clone().unwrap_or_else(|| "margin below quadrature noise or degenerate".into())
        ),
        None => "empty battery".into(),
    }
}

fn plan_extended(s: &Settings) -> Result<Planned, CliError> {
    let case = build_case(s)?;
    let tau = positive(s, "tau")?;
    let big_lambda = s.f64("lambda")?;
    if !(big_lambda >= 0.0) {
        return Err(CliError::usage(format!("--lambda must be >= 0, got {big_lambda}")));
    }
    let tail = TailProfile {
        c: positive(s, "tail-c")?,
        beta: positive(s, "tail-beta")?,
    };
    let start = s.opt_f64("start")?;
    let radii = s.opt_list("radii")?;
    if let (Some(a), Some(rs)) = (start, &radii) {
        if rs.iter().any(|&r| !(r > a + 1.0)) {
            return Err(CliError::usage(format!("--radii must exceed start + 1 = {}", a + 1.0)));
        }
    }
    let s = s.clone();
    Ok(Planned {
        artifacts: vec!["extended.json"],
        run: Box::new(move |ctx| {
            let w = case.family.at(tau).at("extended")?;
            let start = match start {
                Some(a) => a,
                None => 1.25 * admissible_radius(&case, &[tau])?,
            };
            let radii = radii.unwrap_or_else(|| vec![4.0 * start, 8.0 * start, 16.0 * start]);
            let k2 = case.k2_symbol(tau);
            let rep = verify_extended(&w, &k2, big_lambda, tail, start, &radii, &ctx.quad).at("extended")?;
            let mut out = Outcome {
                summary: vec![format!(
                    "smallest workable Lambda {:.6e} (stabilized: {}), holds for Lambda = {big_lambda}: {}",
                    rep.lambda_min_estimate, rep.stabilized, rep.holds
                )],
                ..Outcome::default()
            };
            out.fail_if(!rep.holds, "extended", || {
                format!(
                    "Lambda = {big_lambda} is below the ratio {:.6e} reached by the truncations",
                    rep.lambda_min_estimate
                )
            });
            out.artifacts.push(Artifact {
                name: "extended.json",
                content: json(&s, &rep)?,
            });
            Ok(out)
        }),
    })
}

fn plan_certify(s: &Settings) -> Result<Planned, CliError> {
    let (id, params) = case_params(s)?;
    let tau0 = positive(s, "tau0")?;
    let auto = s.bool("auto-tau0")?;
    let modes = positive_count(s, "modes", 1)?;
    let s = s.clone();
    Ok(Planned {
        artifacts: vec!["certificate.json"],
        run: Box::new(move |ctx| {
            let options = |t: f64| CertificateOptions {
                modes,
                quad: ctx.quad,
                timing: ctx.timing,
                ..CertificateOptions::with_tau0(t)
            };
            let tau0 = if auto {
                admissible_tau0(id, params, tau0, &options(tau0))
                    .at("admissibility")?
                    .ok_or_else(|| CliError::stage("admissibility", format!("no tau0 in {tau0} * 2^0..6 fits the scan window")))?
            } else {
                tau0
            };
            let cert = corollary_certificate(id, params, &options(tau0)).at("certificate")?;
            let mut out = Outcome {
                summary: cert
                    .stages
                    .iter()
                    .map(|st| format!("{}: {}", st.name, if st.verdict { "pass" } else { "FAIL" }))
                    .collect(),
                ..Outcome::default()
            };
            if let Some(stage) = cert.failing_stage() {
                out.failure = Some(CliError::stage(stage, format!("{id} {} = {}", id.param_name(), params.param)));
            }
            out.artifacts.push(Artifact {
                name: "certificate.json",
                content: json(&s, &cert)?,
            });
            Ok(out)
        }),
    })
}

fn cylinder(s: &Settings, sigma: FunctionJet3) -> Result<WarpedCylinder, CliError> {
    let n = s.usize("n")?;
    WarpedCylinder::over_sphere(n, sigma, 0.0, 1).invalid("geometry")
}

#[derive(Serialize)]
struct CurvatureSummary {
    sigma: String,
    kappa: carleman_core::geometry::GrowthCheck,
    ricci: carleman_core::geometry::GrowthCheck,
}

fn plan_curvature(s: &Settings) -> Result<Planned, CliError> {
    let sigma = match s.opt_f64("space-form")? {
        Some(b) => FunctionJet3::space_form(b).invalid("--space-form")?,
        None => descriptor(s, "sigma")?,
    };
    let cyl = cylinder(s, sigma)?;
    let r_max = s.f64("r-max")?;
    let lo = 0.1f64.max(1.05 * cyl.sigma.domain_min());
    if !(r_max > 2.0 * lo.max(1.0)) {
        return Err(CliError::usage(format!("--r-max must exceed {}", 2.0 * lo.max(1.0))));
    }
    let points = positive_count(s, "points", 2)?;
    let s = s.clone();
    Ok(Planned {
        artifacts: vec!["curvature.json", "curvature.csv"],
        run: Box::new(move |_| {
            let mut table = Table::new(&["r", "sect_radial", "sect_tangential", "ricci_radial", "ricci_tangential"]);
            for r in grid::geometric(lo, r_max, points) {
                let c = curvature_at(&cyl, r).at("curvature")?;
                table.push_floats(&[r, c.sect_radial, c.sect_tangential, c.ricci_radial, c.ricci_tangential]);
            }
            let summary = CurvatureSummary {
                sigma: cyl.sigma.descriptor(),
                kappa: check_sigma_growth(&cyl, r_max).at("sigma_growth")?,
                ricci: ricci_quadratic_check(&cyl, r_max).at("ricci_quadratic")?,
            };
            let mut out = Outcome {
                summary: vec![format!(
                    "kappa ~ {:.6} (settled: {}), Ric >= -C (1 + r^2) with C ~ {:.6} (settled: {})",
                    summary.kappa.estimate, summary.kappa.verdict, summary.ricci.estimate, summary.ricci.verdict
                )],
                ..Outcome::default()
            };
            out.fail_if(!summary.kappa.verdict, "sigma_growth", || {
                "|(log sigma)'| / r does not settle on the grid".into()
            });
            out.fail_if(!summary.ricci.verdict, "ricci_quadratic", || {
                "Ric / (1 + r^2) does not settle on the grid".into()
            });
            out.artifacts.push(Artifact {
                name: "curvature.json",
                content: json(&s, &summary)?,
            });
            out.artifacts.push(Artifact {
                name: "curvature.csv",
                content: table.to_csv().at("report")?,
            });
            Ok(out)
        }),
    })
}

fn plan_cutoff(s: &Settings) -> Result<Planned, CliError> {
    let cyl = cylinder(s, descriptor(s, "sigma")?)?;
    let profile = descriptor(s, "profile")?;
    let radii = s.opt_list("radii")?.unwrap_or_default();
    if radii.len() < 2 || radii.iter().any(|&r| !(r > cyl.r0)) {
        return Err(CliError::usage("--radii needs at least two radii inside the end"));
    }
    let s = s.clone();
    Ok(Planned {
        artifacts: vec!["cutoff.json"],
        run: Box::new(move |_| {
            let ladder = cutoff_ladder(&cyl, &radii, &profile).at("cutoff")?;
            let mut out = Outcome {
                summary: vec![format!(
                    "sup |Delta phi_R| <= {:.6}, largest growth exponent {:.3e}",
                    ladder.fitted_constant, ladder.max_growth_exponent
                )],
                ..Outcome::default()
            };
            out.fail_if(!ladder.verdict, "cutoff", || {
                format!("sup |Delta phi_R| grows like R^{:.3}", ladder.max_growth_exponent)
            });
            out.artifacts.push(Artifact {
                name: "cutoff.json",
                content: json(&s, &ladder)?,
            });
            Ok(out)
        }),
    })
}

const RATE_TOL: f64 = 0.01;
const Q_RATE_TOL: f64 = 0.02;
const FLUX_TOL: f64 = 1e-10;
const RESIDUAL_TOL: f64 = 1e-8;

fn plan_catenoid(s: &Settings) -> Result<Planned, CliError> {
    let n = positive_count(s, "n", 2)?;
    let r_end = s.f64("r-end")?;
    if !(r_end >= 3.0) {
        return Err(CliError::usage(format!(
            "--r-end = {r_end} leaves no fit window; the profile starts at r = 1 and needs r-end >= 3"
        )));
    }
    let s = s.clone();
    Ok(Planned {
        artifacts: vec!["catenoid.json", "catenoid.csv"],
        run: Box::new(move |ctx| {
            let rep = catenoid_decay_report(n, r_end, &ctx.quad).at("catenoid")?;
            let q: BTreeMap<u64, f64> = rep.q.samples.iter().map(|&(r, q)| (r.to_bits(), q)).collect();
            let mut table = Table::new(&["r", "u", "u_prime", "H_minus_u", "q"]);
            for p in &rep.profile.samples {
                let qv = match q.get(&p.r.to_bits()) {
                    Some(&v) => v,
                    None if p.u_prime.is_infinite() => f64::INFINITY,
                    None => f64::NAN,
                };
                table.push_floats(&[p.r, p.u, p.u_prime, p.h_minus_u, qv]);
            }
            let mut out = Outcome {
                summary: vec![format!(
                    "rate {:.6} (expected {}), q rate {:.6} (expected {}), H = {:.12}",
                    rep.fitted_rate, rep.expected_rate, rep.q_rate, rep.expected_q_rate, rep.asymptote
                )],
                ..Outcome::default()
            };
            out.fail_if(rep.relative_gap > RATE_TOL, "decay_rate", || {
                format!("fitted rate {} vs {}", rep.fitted_rate, rep.expected_rate)
            });
            out.fail_if(rep.q_relative_gap > Q_RATE_TOL, "q_rate", || {
                format!("q rate {} vs {}", rep.q_rate, rep.expected_q_rate)
            });
            out.fail_if(rep.max_flux_error > FLUX_TOL, "flux", || {
                format!("flux drift {:e}", rep.max_flux_error)
            });
            out.fail_if(rep.max_residual > RESIDUAL_TOL, "residual", || {
                format!("mean-curvature residual {:e}", rep.max_residual)
            });
            out.artifacts.push(Artifact {
                name: "catenoid.json",
                content: json(&s, &rep)?,
            });
            out.artifacts.push(Artifact {
                name: "catenoid.csv",
                content: table.to_csv().at("report")?,
            });
            Ok(out)
        }),
    })
}

fn plan_conformal(s: &Settings) -> Result<Planned, CliError> {
    let n = positive_count(s, "n", 3)?;
    let alpha = descriptor(s, "alpha")?;
    let alpha_symbol = match s.raw("alpha-symbol") {
        Some(t) => parse_growth(t).invalid("--alpha-symbol")?,
        None => symbol_of(&alpha).invalid("--alpha")?,
    };
    let envelope = parse_growth(s.str("envelope")?).invalid("--envelope")?;
    let s = s.clone();
    Ok(Planned {
        artifacts: vec!["conformal.json"],
        run: Box::new(move |_| {
            let verdict = conformal_necessity(n, &alpha, &alpha_symbol, &envelope).map_err(|e| match e {
                carleman_core::Error::Precondition(m) => CliError::usage(m),
                other => CliError::stage("conformal", other),
            })?;
            Ok(Outcome {
                summary: vec![format!("C({n}) = {}: {}", yamabe_constant(n), verdict.message)],
                artifacts: vec![Artifact {
                    name: "conformal.json",
                    content: json(&s, &verdict)?,
                }],
                failure: None,
            })
        }),
    })
}

#[derive(Serialize)]
struct GrowthReport {
    expr: String,
    leading: String,
    other: Option<String>,
    comparison: Option<String>,
    self_check: Option<selfcheck::Summary>,
}

fn plan_growth(s: &Settings) -> Result<Planned, CliError> {
    let a = parse_growth(s.str("expr")?).invalid("expression")?;
    let b = s.raw("other").map(|t| parse_growth(t).invalid("second expression")).transpose()?;
    let trials = s.usize("trials")?;
    let s = s.clone();
    Ok(Planned {
        artifacts: vec!["growth.json"],
        run: Box::new(move |ctx| {
            let self_check = (trials > 0).then(|| selfcheck::run(trials, ctx.seed));
            let comparison = b.as_ref().map(|b| compare_growth(&a, b).to_string());
            let report = GrowthReport {
                expr: a.render(),
                leading: a.leading_symbol().render(),
                other: b.as_ref().map(|b| b.render()),
                comparison: comparison.clone(),
                self_check: self_check.clone(),
            };
            let mut out = Outcome {
                summary: vec![match &comparison {
                    Some(c) => format!("{}  vs  {}: {c}", report.expr, report.other.as_deref().unwrap_or("")),
                    None => format!("{} (leading {})", report.expr, report.leading),
                }],
                ..Outcome::default()
            };
            if let Some(sc) = &self_check {
                out.summary.push(format!("{} trials, {} violations", sc.trials, sc.violations.len()));
                out.fail_if(!sc.violations.is_empty(), "growth_self_check", || sc.violations[0].clone());
            }
            out.artifacts.push(Artifact {
                name: "growth.json",
                content: json(&s, &report)?,
            });
            Ok(out)
        }),
    })
}
