//! Mode-reduced numerical checks of the Carleman estimate
//! `int v^2 k1 e^h + int |grad v|^2 k2 e^h <= int (Delta v)^2 e^h`
//! for separated test functions `v = rho(r) Y(x)` with `Delta_N Y = -lambda Y`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcjet::{FunctionJet3, Jet};
use crate::geometry::WarpedCylinder;
use crate::grid;
use crate::quad::{integrate_vec, QuadConfig};
use crate::regimes::growth::{symbol_of, AsymptoticSymbol};
use crate::weights::{CarlemanWeights, WeightFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BumpKind {
    /// `e * exp(-1 / (1 - x^2))` on the rescaled support.
    ExpBump,
    /// Quintic smoothstep up to the midpoint and back down; C^2.
    QuinticBump,
    /// `sin^4(pi t)`, the square of a shifted sine-squared pulse; C^3.
    SineSquared,
}

impl BumpKind {
    pub const ALL: [BumpKind; 3] = [BumpKind::ExpBump, BumpKind::QuinticBump, BumpKind::SineSquared];

    pub fn name(self) -> &'static str {
        match self {
            BumpKind::ExpBump => "exp-bump",
            BumpKind::QuinticBump => "quintic-bump",
            BumpKind::SineSquared => "shifted-sine-squared",
        }
    }
}

impl fmt::Display for BumpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BumpKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BumpKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Precondition(format!("unknown bump profile `{s}`")))
    }
}

/// A compactly supported radial profile `rho` on `[a, b]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadialTestFunction {
    pub a: f64,
    pub b: f64,
    pub kind: BumpKind,
    pub amplitude: f64,
}

fn quintic_up(t: f64) -> [f64; 3] {
    [
        t * t * t * (10.0 + t * (-15.0 + 6.0 * t)),
        30.0 * t * t * (1.0 - t) * (1.0 - t),
        60.0 * t * (1.0 - 3.0 * t + 2.0 * t * t),
    ]
}

impl RadialTestFunction {
    pub fn new(a: f64, b: f64, kind: BumpKind) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::Precondition(format!("bump support [{a}, {b}] is empty")));
        }
        Ok(RadialTestFunction {
            a,
            b,
            kind,
            amplitude: 1.0,
        })
    }

    pub fn scaled(self, s: f64) -> Self {
        RadialTestFunction {
            amplitude: self.amplitude * s,
            ..self
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            BumpKind::QuinticBump => vec![0.5 * (self.a + self.b)],
            _ => Vec::new(),
        }
    }

    /// `(rho, rho', rho'')` at `r`.
    pub fn jet(&self, r: f64) -> [f64; 3] {
        if !(r > self.a && r < self.b) {
            return [0.0; 3];
        }
        let len = self.b - self.a;
        let out = match self.kind {
            BumpKind::ExpBump => {
                let x = (2.0 * r - self.a - self.b) / len;
                if 1.0 - x * x < 1.0 / 700.0 {
                    return [0.0; 3];
                }
                let xj = Jet([x, 2.0 / len, 0.0, 0.0]);
                let u = Jet::constant(1.0) - xj * xj;
                let e = (Jet::constant(1.0) - u.recip()).exp();
                [e.d(0), e.d(1), e.d(2)]
            }
            BumpKind::QuinticBump => {
                let mid = 0.5 * (self.a + self.b);
                let half = 0.5 * len;
                if r <= mid {
                    let s = quintic_up((r - self.a) / half);
                    [s[0], s[1] / half, s[2] / (half * half)]
                } else {
                    let s = quintic_up((self.b - r) / half);
                    [s[0], -s[1] / half, s[2] / (half * half)]
                }
            }
            BumpKind::SineSquared => {
                let k = std::f64::consts::PI / len;
                let (s, c) = (k * (r - self.a)).sin_cos();
                [
                    s.powi(4),
                    4.0 * s.powi(3) * c * k,
                    (12.0 * s * s * c * c - 4.0 * s.powi(4)) * k * k,
                ]
            }
        };
        out.map(|v| self.amplitude * v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightedIntegral {
    /// Integral with the weight divided by `exp(shift)`.
    pub value_scaled: f64,
    pub shift: f64,
    /// Absolute error estimate of `value_scaled`.
    pub error: f64,
}

/// `h + (n - 1) log sigma` at `r`.
fn log_weight(h: &FunctionJet3, sigma: &FunctionJet3, n: usize, r: f64) -> Result<f64> {
    Ok(h.eval(r)?.value() + (n - 1) as f64 * sigma.log_ratios(r)?.ln_value)
}

fn coarse_shift<F>(log_w: F, a: f64, b: f64, points: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut best = f64::NEG_INFINITY;
    for r in grid::linear(a, b, points.max(2)) {
        best = best.max(log_w(r)?);
    }
    if !best.is_finite() {
        return Err(Error::NonFinite { r: a });
    }
    Ok(best)
}

const PEAK_ZOOMS: usize = 40;
/// Geometric breakpoints placed on each side of the integrand peak.
const PEAK_LAYERS: i32 = 20;

/// Maximum of `log_f` on `[a, b]` and where it sits: a grid scan followed by
/// repeated zooms on the neighbours of the best node. `-inf` values are skipped.
fn log_peak<F>(log_f: F, a: f64, b: f64, points: usize) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let points = points.max(3);
    let (mut lo, mut hi) = (a, b);
    let (mut best, mut at) = (f64::NEG_INFINITY, a);
    for _ in 0..PEAK_ZOOMS {
        let step = (hi - lo) / (points - 1) as f64;
        for r in grid::linear(lo, hi, points) {
            let v = log_f(r)?;
            if v > best {
                (best, at) = (v, r);
            }
        }
        if !best.is_finite() || step <= f64::EPSILON * at.abs() {
            break;
        }
        (lo, hi) = ((at - step).max(a), (at + step).min(b));
    }
    if !best.is_finite() {
        return Err(Error::NonFinite { r: a });
    }
    Ok((best, at))
}

/// `int_a^b f(r) e^(h(r) - shift) sigma(r)^(n-1) dr` with an overflow-safe shift.
pub fn weighted_integral<F>(
    f: F,
    h: &FunctionJet3,
    sigma: &FunctionJet3,
    n: usize,
    a: f64,
    b: f64,
    quad: &QuadConfig,
) -> Result<WeightedIntegral>
where
    F: Fn(f64) -> Result<f64>,
{
    weighted_integral_with_shift(f, h, sigma, n, a, b, quad, None)
}

/// As [`weighted_integral`], optionally forcing the shift.
#[allow(clippy::too_many_arguments)]
pub fn weighted_integral_with_shift<F>(
    f: F,
    h: &FunctionJet3,
    sigma: &FunctionJet3,
    n: usize,
    a: f64,
    b: f64,
    quad: &QuadConfig,
    shift: Option<f64>,
) -> Result<WeightedIntegral>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a < b) {
        return Err(Error::Precondition(format!("integration interval [{a}, {b}] is empty")));
    }
    let shift = match shift {
        Some(s) => s,
        None => coarse_shift(|r| log_weight(h, sigma, n, r), a, b, quad.shift_grid)?,
    };
    let out = integrate_vec(
        |r| {
            let v = f(r)?;
            if v == 0.0 {
                return Ok([0.0]);
            }
            Ok([v * (log_weight(h, sigma, n, r)? - shift).exp()])
        },
        a,
        b,
        &[],
        quad,
    )?;
    Ok(WeightedIntegral {
        value_scaled: out.values[0],
        shift,
        error: out.errors[0],
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InequalityReport {
    pub lambda: f64,
    pub lhs: f64,
    pub rhs_k1: f64,
    pub rhs_k2_radial: f64,
    pub rhs_k2_angular: f64,
    pub rhs_total: f64,
    /// `(lhs - rhs_total) / lhs`.
    pub margin: f64,
    /// Summed absolute quadrature error relative to `lhs`.
    pub quad_error: f64,
    pub shift: f64,
    /// Set when `lhs` is too small for the margin to carry information.
    pub degenerate: bool,
}

impl InequalityReport {
    /// Whether the margin is negative beyond three quadrature error estimates.
    pub fn violates(&self) -> bool {
        self.margin < -3.0 * self.quad_error
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReportOptions {
    /// Multiplier applied to `max(k1max, 0)`; 1 for the genuine check.
    pub k1_scale: f64,
    /// Grid size of the admissibility pre-check on the support.
    pub admissibility_grid: usize,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions {
            k1_scale: 1.0,
            admissibility_grid: 256,
        }
    }
}

const DEGENERATE_LHS: f64 = 1e-280;

/// Refuses supports on which the weights are not admissible.
pub fn check_support_admissible(w: &CarlemanWeights, a: f64, b: f64, points: usize) -> Result<()> {
    for r in grid::linear(a, b, points.max(2)) {
        let p = w.at(r)?;
        let slack = 1e-12 * (p.k2.abs() + p.two_min().abs());
        if p.k2 < -slack {
            return Err(Error::Inadmissible {
                r,
                condition: format!("k2 = {} < 0", p.k2),
            });
        }
        if p.k2 > p.two_min() + slack {
            return Err(Error::Inadmissible {
                r,
                condition: format!("k2 = {} > 2 min(k2L, k2R) = {}", p.k2, p.two_min()),
            });
        }
        if p.k1max < 0.0 {
            return Err(Error::Inadmissible {
                r,
                condition: format!("k1 bound {} < 0", p.k1max),
            });
        }
    }
    Ok(())
}

/// Both sides of the mode-reduced estimate for `v = rho Y`, `||Y||_2 = 1`.
pub fn mode_carleman_report(
    w: &CarlemanWeights,
    lambda: f64,
    rho: &RadialTestFunction,
    quad: &QuadConfig,
    opts: &ReportOptions,
) -> Result<InequalityReport> {
    let cyl = &w.cyl;
    if !(rho.a > cyl.r0) {
        return Err(Error::SupportOutsideEnd { a: rho.a, r0: cyl.r0 });
    }
    if !(lambda >= 0.0) {
        return Err(Error::Precondition(format!("eigenvalue must be >= 0, got {lambda}")));
    }
    check_support_admissible(w, rho.a, rho.b, opts.admissibility_grid)?;
    let n = cyl.n;
    let m = cyl.dim_factor();
    let unit = RadialTestFunction { amplitude: 1.0, ..*rho };
    let (shift, peak) = log_peak(
        |r| {
            let size = unit.jet(r).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if size == 0.0 {
                return Ok(f64::NEG_INFINITY);
            }
            Ok(log_weight(&w.h, &cyl.sigma, n, r)? + 2.0 * size.ln())
        },
        rho.a,
        rho.b,
        quad.shift_grid,
    )?;
    let mut breaks = rho.breakpoints();
    let len = rho.b - rho.a;
    breaks.push(peak);
    for k in 1..=PEAK_LAYERS {
        let d = len * 0.25f64.powi(k);
        breaks.extend([peak - d, peak + d]);
    }
    breaks.retain(|&r| r > rho.a && r < rho.b);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let out = integrate_vec(
        |r| {
            let jet = rho.jet(r);
            let size = jet.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if size == 0.0 {
                return Ok([0.0; 4]);
            }
            let [p0, p1, p2] = jet.map(|v| v / size);
            let s = cyl.log_sigma(r)?;
            let wp = w.at(r)?;
            let weight = (w.h.eval(r)?.value() + m * s.ln_value + 2.0 * size.ln() - shift).exp();
            let inv_sigma2 = (-2.0 * s.ln_value).exp();
            let lap = p2 + m * s.r1 * p1 - lambda * inv_sigma2 * p0;
            let k1 = opts.k1_scale * wp.k1max.max(0.0);
            Ok([
                lap * lap * weight,
                k1 * p0 * p0 * weight,
                wp.k2 * p1 * p1 * weight,
                wp.k2 * lambda * inv_sigma2 * p0 * p0 * weight,
            ])
        },
        rho.a,
        rho.b,
        &breaks,
        quad,
    )?;
    let [lhs, rhs_k1, rhs_k2_radial, rhs_k2_angular] = out.values;
    let rhs_total = rhs_k1 + rhs_k2_radial + rhs_k2_angular;
    let denom = lhs.max(f64::MIN_POSITIVE);
    let margin = if lhs == 0.0 && rhs_total == 0.0 {
        0.0
    } else {
        (lhs - rhs_total) / denom
    };
    Ok(InequalityReport {
        lambda,
        lhs,
        rhs_k1,
        rhs_k2_radial,
        rhs_k2_angular,
        rhs_total,
        margin,
        quad_error: out.errors.iter().sum::<f64>() / denom,
        shift,
        degenerate: lhs < DEGENERATE_LHS,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct BatteryCell {
    pub label: String,
    pub tau: f64,
    pub lambda: f64,
    pub bump: BumpKind,
    pub support: (f64, f64),
    pub report: Option<InequalityReport>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BatterySummary {
    pub n_tests: usize,
    /// Reports with margin below `-3 * quad_error`.
    pub n_failures: usize,
    /// Cells that raised an error instead of producing a report.
    pub n_errors: usize,
    /// Reports whose weighted integrals underflowed; they carry no verdict.
    pub n_degenerate: usize,
    pub min_margin: Option<f64>,
    pub max_quad_error: Option<f64>,
    pub wall_time_ms: Option<u64>,
    pub no_tests: bool,
    pub cells: Vec<BatteryCell>,
}

impl BatterySummary {
    fn from_cells(cells: Vec<BatteryCell>, wall_time_ms: Option<u64>) -> Self {
        let reports: Vec<&InequalityReport> = cells.iter().filter_map(|c| c.report.as_ref()).collect();
        BatterySummary {
            n_tests: cells.len(),
            n_failures: reports.iter().filter(|r| r.violates()).count(),
            n_errors: cells.iter().filter(|c| c.error.is_some()).count(),
            n_degenerate: reports.iter().filter(|r| r.degenerate).count(),
            min_margin: reports.iter().filter(|r| !r.degenerate).map(|r| r.margin).reduce(f64::min),
            max_quad_error: reports.iter().map(|r| r.quad_error).reduce(f64::max),
            wall_time_ms,
            no_tests: cells.is_empty(),
            cells,
        }
    }

    pub fn merge(parts: Vec<BatterySummary>) -> Self {
        let wall = parts.iter().map(|p| p.wall_time_ms).try_fold(0u64, |acc, w| w.map(|w| acc + w));
        let cells = parts.into_iter().flat_map(|p| p.cells).collect();
        Self::from_cells(cells, wall)
    }

    /// Drops the timing field so reports are reproducible byte for byte.
    pub fn without_timing(mut self) -> Self {
        self.wall_time_ms = None;
        self
    }

    pub fn failures(&self) -> impl Iterator<Item = &BatteryCell> {
        self.cells
            .iter()
            .filter(|c| c.error.is_some() || c.report.as_ref().is_some_and(|r| r.violates() || r.degenerate))
    }
}

/// Runs the cross product `tau x lambda x bump` in parallel; cell order is
/// deterministic and errors are isolated to their cell.
pub fn run_battery(
    label: &str,
    family: &WeightFamily,
    taus: &[f64],
    lambdas: &[f64],
    bumps: &[RadialTestFunction],
    quad: &QuadConfig,
) -> BatterySummary {
    let start = Instant::now();
    let mut jobs = Vec::with_capacity(taus.len() * lambdas.len() * bumps.len());
    for &tau in taus {
        for &lambda in lambdas {
            for bump in bumps {
                jobs.push((tau, lambda, *bump));
            }
        }
    }
    let opts = ReportOptions::default();
    let cells: Vec<BatteryCell> = jobs
        .into_par_iter()
        .map(|(tau, lambda, bump)| {
            let res = family
                .at(tau)
                .and_then(|w| mode_carleman_report(&w, lambda, &bump, quad, &opts));
            let (report, error) = match res {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            BatteryCell {
                label: label.to_string(),
                tau,
                lambda,
                bump: bump.kind,
                support: (bump.a, bump.b),
                report,
                error,
            }
        })
        .collect();
    BatterySummary::from_cells(cells, Some(start.elapsed().as_millis() as u64))
}

/// `exp(-c r^beta)` tail attached to the test function of the extended estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailProfile {
    pub c: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExtendedRow {
    pub radius: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`, the smallest constant that works for this truncation.
    pub ratio: f64,
    pub margin: f64,
    pub quad_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtendedReport {
    pub big_lambda: f64,
    pub tail: TailProfile,
    pub start: f64,
    pub rows: Vec<ExtendedRow>,
    pub lambda_min_estimate: f64,
    pub workable_lambda: f64,
    pub stabilized: bool,
    pub holds: bool,
}

/// Symbolic check that `w^2 (1 + k2) e^h` and its derivative weights are
/// integrable along the end.
fn tail_integrable(w: &CarlemanWeights, tail: &TailProfile, k2: &AsymptoticSymbol) -> Result<bool> {
    let h = symbol_of(&w.h)?.exp_of()?;
    let sigma = symbol_of(&w.cyl.sigma)?.leading_powf(w.cyl.dim_factor())?;
    let t2 = AsymptoticSymbol::exp_power(1.0, -2.0 * tail.c, tail.beta)?;
    // polynomial slack covering derivatives of the tail and of the cutoff
    let slack = AsymptoticSymbol::monomial(1.0, 4.0 * tail.beta + 4.0, 0.0);
    let weight = h
        .mul(&sigma)
        .mul(&t2)
        .mul(&AsymptoticSymbol::constant(1.0).add(k2))
        .mul(&slack);
    Ok(weight.is_integrable_at_infinity())
}

/// Evaluates both sides of the extended estimate for
/// `w_R = inner * exp(-c r^beta) * Phi(r / R)` along truncation radii `R`.
///
/// `inner` rises from 0 at `start` to 1 at `start + 1` (quintic smoothstep);
/// `Phi` is the quintic cutoff profile.
pub fn verify_extended(
    w: &CarlemanWeights,
    k2_symbol: &AsymptoticSymbol,
    big_lambda: f64,
    tail: TailProfile,
    start: f64,
    truncations: &[f64],
    quad: &QuadConfig,
) -> Result<ExtendedReport> {
    let cyl: &WarpedCylinder = &w.cyl;
    if !(big_lambda >= 0.0) {
        return Err(Error::Precondition(format!("Lambda must be >= 0, got {big_lambda}")));
    }
    if !(tail.c > 0.0 && tail.beta > 0.0) {
        return Err(Error::Precondition("tail needs c > 0 and beta > 0".into()));
    }
    if !(start > cyl.r0) {
        return Err(Error::SupportOutsideEnd { a: start, r0: cyl.r0 });
    }
    if truncations.is_empty() || truncations.iter().any(|&r| !(r > start + 1.0)) {
        return Err(Error::Precondition(format!(
            "truncation radii must exceed start + 1 = {}",
            start + 1.0
        )));
    }
    if !tail_integrable(w, &tail, k2_symbol)? {
        return Err(Error::Precondition(format!(
            "tail exp(-{} r^{}) is not square integrable against the weight",
            tail.c, tail.beta
        )));
    }
    let r_top = truncations.iter().fold(0.0f64, |a, &b| a.max(b));
    check_support_admissible(w, start, 2.0 * r_top, 1024)?;
    let phi = crate::funcjet::make_family("smoothstep", &[])?;
    let m = cyl.dim_factor();
    let log_tail = FunctionJet3::power(tail.beta).scale(-tail.c);
    let mut rows = Vec::with_capacity(truncations.len());
    for &radius in truncations {
        let b = 2.0 * radius;
        let log_w = |r: f64| -> Result<f64> {
            Ok(w.h.eval(r)?.value() + m * cyl.log_sigma(r)?.ln_value + 2.0 * log_tail.eval(r)?.value())
        };
        let shift = coarse_shift(log_w, start, b, 4 * quad.shift_grid)?;
        let out = integrate_vec(
            |r| {
                let t = (r - start).clamp(0.0, 1.0);
                let inner = if r >= start + 1.0 {
                    [1.0, 0.0, 0.0]
                } else {
                    quintic_up(t)
                };
                let cut = phi.eval(r / radius)?;
                let v = [
                    inner[0] * cut.d(0),
                    inner[1] * cut.d(0) + inner[0] * cut.d(1) / radius,
                    inner[2] * cut.d(0)
                        + 2.0 * inner[1] * cut.d(1) / radius
                        + inner[0] * cut.d(2) / (radius * radius),
                ];
                if v == [0.0; 3] {
                    return Ok([0.0; 2]);
                }
                let lt = log_tail.eval(r)?;
                let (t1, t2) = (lt.d(1), lt.d(2));
                let w0 = v[0];
                let w1 = v[1] + t1 * v[0];
                let w2 = v[2] + 2.0 * t1 * v[1] + (t2 + t1 * t1) * v[0];
                let s = cyl.log_sigma(r)?;
                let p = w.at(r)?;
                let weight = (log_w(r)? - shift).exp();
                let lap = w2 + m * s.r1 * w1;
                Ok([
                    (p.k1max.max(0.0) * w0 * w0 + p.k2 * w1 * w1) * weight,
                    lap * lap * weight,
                ])
            },
            start,
            b,
            &[start + 1.0, radius],
            quad,
        )?;
        let [lhs, rhs] = out.values;
        let scale = (big_lambda * rhs).max(lhs).max(f64::MIN_POSITIVE);
        rows.push(ExtendedRow {
            radius,
            lhs,
            rhs,
            ratio: lhs / rhs.max(f64::MIN_POSITIVE),
            margin: (big_lambda * rhs - lhs) / scale,
            quad_error: (out.errors[0] + big_lambda.max(1.0) * out.errors[1]) / scale,
        });
    }
    let lambda_min_estimate = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let stabilized = match rows.as_slice() {
        [.., x, y] => (y.ratio - x.ratio).abs() <= 1e-2 * y.ratio.abs().max(f64::MIN_POSITIVE),
        _ => true,
    };
    let holds = rows.iter().all(|r| r.margin >= -3.0 * r.quad_error);
    Ok(ExtendedReport {
        big_lambda,
        tail,
        start,
        rows,
        lambda_min_estimate,
        workable_lambda: lambda_min_estimate.max(1.0),
        stabilized,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{build_weights, K2Choice, TauFamily};

    fn eu_a(beta: f64, tau: f64) -> CarlemanWeights {
        let cyl = WarpedCylinder::over_sphere(3, FunctionJet3::power(1.0), 0.0, 4).unwrap();
        build_weights(
            &cyl,
            &FunctionJet3::power(beta).scale(2.0 * tau),
            &FunctionJet3::log().scale(3.0 - 2.0 * beta),
            tau,
            &K2Choice::Jet(TauFamily::proportional(
                FunctionJet3::power(beta - 2.0).scale(beta * beta),
            )),
        )
        .unwrap()
    }

    fn fd_check(rho: &RadialTestFunction) {
        for i in 1..40 {
            let r = rho.a + (rho.b - rho.a) * i as f64 / 40.0;
            if rho.breakpoints().contains(&r) {
                continue;
            }
            let h = 1e-5 * (rho.b - rho.a);
            let (lo, hi) = (rho.jet(r - h), rho.jet(r + h));
            let j = rho.jet(r);
            for k in 0..2 {
                let fd = (hi[k] - lo[k]) / (2.0 * h);
                assert!((fd - j[k + 1]).abs() < 1e-5 * (1.0 + j[k + 1].abs()), "{:?} r={r} k={k}", rho.kind);
            }
        }
    }

    #[test]
    fn bumps_are_consistent_and_vanish_at_ends() {
        for kind in BumpKind::ALL {
            let rho = RadialTestFunction::new(10.0, 20.0, kind).unwrap();
            fd_check(&rho);
            for r in [10.0, 20.0, 9.0, 25.0] {
                assert_eq!(rho.jet(r), [0.0; 3]);
            }
            let near = rho.jet(10.0 + 1e-6);
            assert!(near.iter().all(|v| v.abs() < 1e-5), "{kind:?} {near:?}");
        }
    }

    #[test]
    fn weighted_integral_examples() {
        let q = QuadConfig::default();
        let sigma = FunctionJet3::power(1.0);
        let zero = weighted_integral(|_| Ok(0.0), &FunctionJet3::zero(), &sigma, 3, 1.0, 2.0, &q)
            .unwrap();
        assert_eq!(zero.value_scaled, 0.0);
        let one = weighted_integral(|_| Ok(1.0), &FunctionJet3::zero(), &sigma, 3, 1.0, 2.0, &q)
            .unwrap();
        let total = one.value_scaled * one.shift.exp();
        assert!((total - 7.0 / 3.0).abs() < 1e-14);

        let h = FunctionJet3::power(1.0).scale(1000.0);
        let big = weighted_integral(|_| Ok(1.0), &h, &FunctionJet3::sinh(), 3, 5.0, 6.0, &q).unwrap();
        assert!(big.value_scaled.is_finite() && big.value_scaled > 0.0);
        assert!((big.shift - (6000.0 + 2.0 * 6f64.sinh().ln())).abs() < 1e-9);
        // closed form of int e^{1000 r} sinh^2 r dr relative to the shift
        let g = |r: f64, k: f64| ((k * r) - big.shift).exp() / k;
        let exact = 0.25 * (g(6.0, 1002.0) - g(5.0, 1002.0)) + 0.25 * (g(6.0, 998.0) - g(5.0, 998.0))
            - 0.5 * (g(6.0, 1000.0) - g(5.0, 1000.0));
        assert!((big.value_scaled - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn euclidean_example_holds() {
        let w = eu_a(4.0 / 3.0, 50.0);
        let rho = RadialTestFunction::new(10.0, 20.0, BumpKind::ExpBump).unwrap();
        let rep = mode_carleman_report(&w, 0.0, &rho, &QuadConfig::default(), &ReportOptions::default())
            .unwrap();
        assert!(!rep.violates(), "{rep:?}");
        assert!(rep.quad_error < 1e-8);
    }

    #[test]
    fn amplitude_invariance() {
        let w = eu_a(1.0, 10.0);
        let base = RadialTestFunction::new(5.0, 9.0, BumpKind::SineSquared).unwrap();
        let q = QuadConfig::default();
        let o = ReportOptions::default();
        let m0 = mode_carleman_report(&w, 2.0, &base, &q, &o).unwrap().margin;
        for s in [1e-3, 1e3] {
            let m = mode_carleman_report(&w, 2.0, &base.scaled(s), &q, &o).unwrap().margin;
            assert!((m - m0).abs() < 1e-10, "{m} {m0}");
        }
        let tiny = mode_carleman_report(&w, 2.0, &base.scaled(1e-160), &q, &o).unwrap();
        assert!(tiny.degenerate);
    }

    #[test]
    fn refuses_bad_supports() {
        let w = eu_a(1.0, 10.0);
        let q = QuadConfig::default();
        let o = ReportOptions::default();
        let out = RadialTestFunction::new(0.0, 3.0, BumpKind::ExpBump).unwrap();
        assert!(matches!(
            mode_carleman_report(&w, 0.0, &out, &q, &o),
            Err(Error::SupportOutsideEnd { .. })
        ));
    }

    #[test]
    fn empty_battery() {
        let fam = WeightFamily {
            cyl: WarpedCylinder::over_sphere(3, FunctionJet3::power(1.0), 0.0, 4).unwrap(),
            h: TauFamily::proportional(FunctionJet3::power(1.0).scale(2.0)),
            g: FunctionJet3::log(),
            k2: K2Choice::Zero,
        };
        let s = run_battery("x", &fam, &[10.0], &[0.0], &[], &QuadConfig::default());
        assert!(s.no_tests && s.n_tests == 0 && s.min_margin.is_none());
    }

    fn hyperbolic(tau: f64) -> CarlemanWeights {
        let cyl = WarpedCylinder::over_sphere(3, FunctionJet3::sinh(), 0.0, 4).unwrap();
        build_weights(
            &cyl,
            &FunctionJet3::power(1.0).scale(2.0 * tau),
            &FunctionJet3::power(1.0),
            tau,
            &K2Choice::Jet(TauFamily::proportional(FunctionJet3::constant(1.0))),
        )
        .unwrap()
    }

    #[test]
    fn steep_weight_keeps_the_peak() {
        use crate::regimes::{CaseId, CaseParams, CorollaryCase};
        let case = CorollaryCase::build(CaseId::HypB, CaseParams::new(4.0, 3)).unwrap();
        let w = case.family.at(20.0).unwrap();
        let rho = RadialTestFunction::new(9.5, 19.0, BumpKind::ExpBump).unwrap();
        let o = ReportOptions::default();
        let rep = mode_carleman_report(&w, 0.0, &rho, &QuadConfig::default(), &o).unwrap();
        assert!(!rep.degenerate && rep.lhs > 0.0, "{rep:?}");
        let tight = QuadConfig {
            tol: 1e-10,
            max_panels: 400_000,
            shift_grid: 1025,
        };
        let fine = mode_carleman_report(&w, 0.0, &rho, &tight, &o).unwrap();
        let ln_lhs = |r: &InequalityReport| r.lhs.ln() + r.shift;
        assert!((ln_lhs(&rep) - ln_lhs(&fine)).abs() < 1e-7, "{rep:?} {fine:?}");
        assert!(rep.margin > 0.5);
    }

    #[test]
    fn extended_estimate_stabilizes_for_gaussian_tail() {
        let tau = 10.0;
        let w = hyperbolic(tau);
        let k2 = AsymptoticSymbol::constant(tau);
        let tail = TailProfile { c: 0.5, beta: 2.0 };
        let rep = verify_extended(&w, &k2, 1.0, tail, 3.0, &[20.0, 40.0, 80.0], &QuadConfig::default())
            .unwrap();
        assert!(rep.stabilized, "{rep:?}");
        assert!(rep.holds, "{rep:?}");
        assert!(rep.workable_lambda >= 1.0);
        assert!(rep.rows.iter().all(|r| r.lhs > 0.0 && r.rhs > 0.0));

        let zero = verify_extended(&w, &k2, 0.0, tail, 3.0, &[20.0, 40.0], &QuadConfig::default()).unwrap();
        assert!(!zero.holds);
    }

    #[test]
    fn extended_estimate_rejects_slow_tails() {
        let tau = 10.0;
        let w = hyperbolic(tau);
        let k2 = AsymptoticSymbol::constant(tau);
        for c in [1.0, tau] {
            let e = verify_extended(
                &w,
                &k2,
                1.0,
                TailProfile { c, beta: 1.0 },
                3.0,
                &[20.0],
                &QuadConfig::default(),
            )
            .unwrap_err();
            assert!(matches!(e, Error::Precondition(_)), "{e}");
        }
    }
}
