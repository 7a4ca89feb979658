//! Globally adaptive Gauss-Kronrod (7, 15) quadrature for small vectors of
//! integrands sharing one panel tree.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadConfig {
    /// Target relative error.
    pub tol: f64,
    pub max_panels: usize,
    /// Coarse grid size used to locate the exponent shift.
    pub shift_grid: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            tol: 1e-9,
            max_panels: 20_000,
            shift_grid: 129,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VecIntegral<const K: usize> {
    pub values: [f64; K],
    /// Absolute error estimates per component.
    pub errors: [f64; K],
    pub panels: usize,
}

struct Panel<const K: usize> {
    a: f64,
    b: f64,
    value: [f64; K],
    error: [f64; K],
    priority: f64,
}

impl<const K: usize> PartialEq for Panel<K> {
    fn eq(&self, o: &Self) -> bool {
        self.priority.total_cmp(&o.priority) == Ordering::Equal
    }
}
impl<const K: usize> Eq for Panel<K> {}
impl<const K: usize> PartialOrd for Panel<K> {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl<const K: usize> Ord for Panel<K> {
    fn cmp(&self, o: &Self) -> Ordering {
        // ties broken by position so the refinement order is deterministic
        self.priority
            .total_cmp(&o.priority)
            .then_with(|| o.a.total_cmp(&self.a))
    }
}

fn gk15<const K: usize, F>(f: &F, a: f64, b: f64) -> Result<([f64; K], [f64; K])>
where
    F: Fn(f64) -> Result<[f64; K]>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = [0.0; K];
    let mut gauss = [0.0; K];
    let mut add = |x: f64, wk: f64, wg: f64| -> Result<()> {
        let v = f(x)?;
        for k in 0..K {
            if !v[k].is_finite() {
                return Err(Error::NonFinite { r: x });
            }
            kron[k] += wk * v[k];
            gauss[k] += wg * v[k];
        }
        Ok(())
    };
    add(c, WGK[7], WG[3])?;
    for i in 0..7 {
        let wg = if i % 2 == 1 { WG[i / 2] } else { 0.0 };
        let dx = h * XGK[i];
        add(c - dx, WGK[i], wg)?;
        add(c + dx, WGK[i], wg)?;
    }
    let mut err = [0.0; K];
    for k in 0..K {
        kron[k] *= h;
        gauss[k] *= h;
        err[k] = (kron[k] - gauss[k]).abs();
    }
    Ok((kron, err))
}

/// Integrates a vector of functions over `[a, b]`, split first at `breaks`.
///
/// Refinement stops once the summed absolute error is at most `tol` times
/// the largest component magnitude.
pub fn integrate_vec<const K: usize, F>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<VecIntegral<K>>
where
    F: Fn(f64) -> Result<[f64; K]>,
{
    let mut cuts = vec![a];
    cuts.extend(breaks.iter().copied().filter(|x| *x > a && *x < b));
    cuts.push(b);
    // a few uniform panels first so narrow features are not missed entirely
    let mut edges = Vec::new();
    for w in cuts.windows(2) {
        let pieces = 8;
        for i in 0..pieces {
            edges.push(w[0] + (w[1] - w[0]) * i as f64 / pieces as f64);
        }
    }
    edges.push(b);
    let mut heap = BinaryHeap::new();
    for w in edges.windows(2) {
        let (value, error) = gk15(&f, w[0], w[1])?;
        heap.push(Panel {
            a: w[0],
            b: w[1],
            value,
            error,
            priority: error.iter().sum(),
        });
    }
    let totals = |heap: &BinaryHeap<Panel<K>>| {
        let mut v = [0.0; K];
        let mut e = [0.0; K];
        for p in heap.iter() {
            for k in 0..K {
                v[k] += p.value[k];
                e[k] += p.error[k];
            }
        }
        (v, e)
    };
    loop {
        let (v, e) = totals(&heap);
        let scale = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let err: f64 = e.iter().sum();
        if err <= cfg.tol * scale || err == 0.0 {
            return Ok(VecIntegral {
                values: v,
                errors: e,
                panels: heap.len(),
            });
        }
        if heap.len() >= cfg.max_panels {
            return Err(Error::QuadratureBudget {
                panels: heap.len(),
                achieved: err / scale.max(f64::MIN_POSITIVE),
            });
        }
        let splits = (heap.len() / 8).max(1);
        for _ in 0..splits {
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) {
                heap.push(worst);
                return Err(Error::QuadratureBudget {
                    panels: heap.len(),
                    achieved: err / scale.max(f64::MIN_POSITIVE),
                });
            }
            for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
                let (value, error) = gk15(&f, lo, hi)?;
                heap.push(Panel {
                    a: lo,
                    b: hi,
                    value,
                    error,
                    priority: error.iter().sum(),
                });
            }
            if heap.len() >= cfg.max_panels {
                break;
            }
        }
    }
}

/// Scalar convenience wrapper; returns `(value, absolute error)`.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<f64>,
{
    let out = integrate_vec(|x| Ok([f(x)?]), a, b, &[], cfg)?;
    Ok((out.values[0], out.errors[0]))
}

const PEAK_LEVELS: i32 = 48;
const EXPONENT_NOISE: f64 = 100.0;

/// `log int_a^b exp(log_f(r)) dr` for integrands spanning many orders of
/// magnitude; returns `(log value, relative error)`, with `-inf` for an
/// integrand that vanishes numerically.
///
/// `log_f` returns the exponent together with the summed magnitude of the
/// terms that formed it; the tolerance is floored at the relative noise that
/// rounding in those terms implies.
pub fn integrate_log<F>(log_f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let count = cfg.shift_grid.max(2);
    let mut shift = f64::NEG_INFINITY;
    let mut peak = a;
    let mut magnitude = 0.0f64;
    for i in 0..count {
        let r = a + (b - a) * i as f64 / (count - 1) as f64;
        let (v, scale) = log_f(r)?;
        if v.is_nan() {
            return Err(Error::NonFinite { r });
        }
        if v > shift {
            shift = v;
            peak = r;
        }
        if scale.is_finite() {
            magnitude = magnitude.max(scale.abs());
        }
    }
    if shift == f64::NEG_INFINITY {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    if !shift.is_finite() {
        return Err(Error::NonFinite { r: a });
    }
    // panels shrink geometrically towards the peak so a steep exponential
    // is resolved even when it sits at an endpoint
    let mut breaks = vec![peak];
    for k in 1..=PEAK_LEVELS {
        let d = (b - a) * 0.5f64.powi(k);
        breaks.extend([peak - d, peak + d]);
    }
    breaks.sort_by(f64::total_cmp);
    // rounding in an exponent of size M perturbs the integrand by about M eps
    let cfg = QuadConfig {
        tol: cfg.tol.max(EXPONENT_NOISE * f64::EPSILON * magnitude),
        ..*cfg
    };
    let out = integrate_vec(|r| Ok([(log_f(r)?.0 - shift).exp()]), a, b, &breaks, &cfg)?;
    let (v, e) = (out.values[0], out.errors[0]);
    if v <= 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    Ok((v.ln() + shift, e / v))
}
