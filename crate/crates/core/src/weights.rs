//! The Carleman weight bundle `F, A, k2L, k2R, k2, k1max` built from a warped
//! end, a weight `h`, a gauge `G` and the parameter `tau`.

use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcjet::FunctionJet3;
use crate::geometry::WarpedCylinder;
use crate::grid;

/// A function affine in `tau`: `tau * scaled + fixed`.
#[derive(Clone, Debug, PartialEq)]
pub struct TauFamily {
    pub scaled: FunctionJet3,
    pub fixed: FunctionJet3,
}

impl TauFamily {
    pub fn new(scaled: FunctionJet3, fixed: FunctionJet3) -> Self {
        TauFamily { scaled, fixed }
    }

    pub fn proportional(scaled: FunctionJet3) -> Self {
        TauFamily {
            scaled,
            fixed: FunctionJet3::zero(),
        }
    }

    pub fn at(&self, tau: f64) -> FunctionJet3 {
        self.scaled.scale(tau) + self.fixed.clone()
    }
}

/// How `k2` is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum K2Choice {
    Jet(TauFamily),
    Zero,
    /// `max(min(k2L, k2R), 0)`, differentiated by central differences.
    HalfMin,
}

#[derive(Clone, Debug, PartialEq)]
enum K2Resolved {
    Jet(FunctionJet3),
    Zero,
    HalfMin,
}

/// Relative step of the central difference used for the `HalfMin` derivative.
pub const HALF_MIN_STEP: f64 = 1e-5;

/// All bundle values at one radius.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WeightPoint {
    pub r: f64,
    pub f: f64,
    pub f1: f64,
    pub f2: f64,
    pub a: f64,
    pub a1: f64,
    pub k2l: f64,
    pub k2r: f64,
    pub k2: f64,
    pub k2_prime: f64,
    pub k1max: f64,
}

impl WeightPoint {
    pub fn two_min(&self) -> f64 {
        2.0 * self.k2l.min(self.k2r)
    }

    pub fn admissible(&self) -> bool {
        self.k2 >= 0.0 && self.k2 <= self.two_min() && self.k1max >= 0.0
    }
}

#[derive(Clone, Debug)]
pub struct CarlemanWeights {
    pub cyl: WarpedCylinder,
    pub h: FunctionJet3,
    pub g: FunctionJet3,
    pub tau: f64,
    k2: K2Resolved,
}

struct Core {
    f: f64,
    f1: f64,
    f2: f64,
    a: f64,
    a1: f64,
    k2l: f64,
    k2r: f64,
    g1: f64,
}

/// Builds the bundle at fixed `tau`.
pub fn build_weights(
    cyl: &WarpedCylinder,
    h: &FunctionJet3,
    g: &FunctionJet3,
    tau: f64,
    k2: &K2Choice,
) -> Result<CarlemanWeights> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidTau(tau));
    }
    let k2 = match k2 {
        K2Choice::Jet(fam) => K2Resolved::Jet(fam.at(tau)),
        K2Choice::Zero => K2Resolved::Zero,
        K2Choice::HalfMin => K2Resolved::HalfMin,
    };
    Ok(CarlemanWeights {
        cyl: cyl.clone(),
        h: h.clone(),
        g: g.clone(),
        tau,
        k2,
    })
}

impl CarlemanWeights {
    pub fn domain_min(&self) -> f64 {
        self.cyl
            .r0
            .max(self.h.domain_min())
            .max(self.g.domain_min())
    }

    fn core(&self, r: f64) -> Result<Core> {
        if !(r > self.cyl.r0) {
            return Err(Error::Domain { r, min: self.cyl.r0 });
        }
        let s = self.cyl.log_sigma(r)?;
        let l1 = s.r1;
        let l2 = s.r2 - l1 * l1;
        let l3 = s.r3 - 3.0 * l1 * s.r2 + 2.0 * l1 * l1 * l1;
        let h = self.h.eval(r)?;
        let g = self.g.eval(r)?;
        let m = self.cyl.dim_factor();
        let f = 0.5 * (h.d(1) + m * l1 - g.d(1));
        let f1 = 0.5 * (h.d(2) + m * l2 - g.d(2));
        let f2 = 0.5 * (h.d(3) + m * l3 - g.d(3));
        let a = f * f * f - f * f1 - m * l1 * f * f;
        let a1 = 3.0 * f * f * f1 - f1 * f1 - f * f2 - m * (l2 * f * f + 2.0 * l1 * f * f1);
        let g1 = g.d(1);
        Ok(Core {
            f,
            f1,
            f2,
            a,
            a1,
            k2l: 2.0 * f * f - 2.0 * m * f * l1 + f1 + f * g1,
            k2r: -f1 - f * g1 + 2.0 * f * l1,
            g1,
        })
    }

    fn half_min(&self, r: f64) -> Result<f64> {
        let c = self.core(r)?;
        Ok(c.k2l.min(c.k2r).max(0.0))
    }

    /// The chosen `k2` and its derivative.
    pub fn k2_jet(&self, r: f64) -> Result<(f64, f64)> {
        match &self.k2 {
            K2Resolved::Zero => Ok((0.0, 0.0)),
            K2Resolved::Jet(f) => {
                let j = f.eval(r)?;
                Ok((j.d(0), j.d(1)))
            }
            K2Resolved::HalfMin => {
                let step = HALF_MIN_STEP * r.max(1.0);
                let lo = (r - step).max(self.domain_min() + 0.5 * (r - self.domain_min()));
                let hi = r + step;
                let d = (self.half_min(hi)? - self.half_min(lo)?) / (hi - lo);
                Ok((self.half_min(r)?, d))
            }
        }
    }

    pub fn at(&self, r: f64) -> Result<WeightPoint> {
        let c = self.core(r)?;
        let (k2, k2p) = self.k2_jet(r)?;
        let k1max = 2.0 * (c.a1 + c.a * c.g1)
            - k2 * c.f * c.f
            - c.g1 * k2 * c.f
            - k2p * c.f
            - k2 * c.f1;
        let p = WeightPoint {
            r,
            f: c.f,
            f1: c.f1,
            f2: c.f2,
            a: c.a,
            a1: c.a1,
            k2l: c.k2l,
            k2r: c.k2r,
            k2,
            k2_prime: k2p,
            k1max,
        };
        if [p.f, p.f1, p.f2, p.a, p.a1, p.k2l, p.k2r, p.k2, p.k2_prime, p.k1max]
            .iter()
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite { r });
        }
        Ok(p)
    }

    pub fn quantity(&self, q: Quantity, r: f64) -> Result<f64> {
        let p = self.at(r)?;
        Ok(match q {
            Quantity::F => p.f,
            Quantity::A => p.a,
            Quantity::K2L => p.k2l,
            Quantity::K2R => p.k2r,
            Quantity::K2 => p.k2,
            Quantity::K1Max => p.k1max,
        })
    }
}

/// A weight bundle parameterized by `tau`.
#[derive(Clone, Debug)]
pub struct WeightFamily {
    pub cyl: WarpedCylinder,
    pub h: TauFamily,
    pub g: FunctionJet3,
    pub k2: K2Choice,
}

impl WeightFamily {
    pub fn at(&self, tau: f64) -> Result<CarlemanWeights> {
        build_weights(&self.cyl, &self.h.at(tau), &self.g, tau, &self.k2)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Quantity {
    F,
    A,
    K2L,
    K2R,
    K2,
    K1Max,
}

impl Quantity {
    pub fn name(self) -> &'static str {
        match self {
            Quantity::F => "F",
            Quantity::A => "A",
            Quantity::K2L => "k2L",
            Quantity::K2R => "k2R",
            Quantity::K2 => "k2",
            Quantity::K1Max => "k1max",
        }
    }
}

impl FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "F" | "f" => Quantity::F,
            "A" | "a" => Quantity::A,
            "k2L" | "k2l" => Quantity::K2L,
            "k2R" | "k2r" => Quantity::K2R,
            "k2" => Quantity::K2,
            "k1max" | "k1" => Quantity::K1Max,
            _ => {
                return Err(Error::Precondition(format!(
                    "unknown quantity `{s}` (expected F, A, k2L, k2R, k2 or k1max)"
                )))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub r: f64,
    pub k2l: f64,
    pub k2r: f64,
    pub two_min: f64,
    pub k2: f64,
    pub k1max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    /// Smallest grid radius from which every later grid point is admissible.
    pub first_admissible_r: Option<f64>,
    /// `min(k2, 2 min(k2L, k2R) - k2)` over the grid.
    pub min_margin_k2: f64,
    /// `min k1max` over the grid.
    pub min_margin_k1: f64,
    /// The same margins restricted to the admissible tail.
    pub tail_margin_k2: Option<f64>,
    pub tail_margin_k1: Option<f64>,
}

/// Evaluates admissibility of the bundle on a geometric grid.
pub fn admissibility_scan(
    w: &CarlemanWeights,
    r_lo: f64,
    r_hi: f64,
    grid_size: usize,
) -> Result<ScanReport> {
    if grid_size == 0 {
        return Err(Error::EmptyGrid);
    }
    if !(r_lo > w.cyl.r0) || !(r_hi >= r_lo) {
        return Err(Error::Precondition(format!(
            "scan window [{r_lo}, {r_hi}] must lie above r0 = {}",
            w.cyl.r0
        )));
    }
    let points = grid::geometric(r_lo, r_hi, grid_size)
        .into_iter()
        .map(|r| w.at(r))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ScanRow> = points
        .iter()
        .map(|p| ScanRow {
            r: p.r,
            k2l: p.k2l,
            k2r: p.k2r,
            two_min: p.two_min(),
            k2: p.k2,
            k1max: p.k1max,
        })
        .collect();
    let margin_k2 = |p: &WeightPoint| p.k2.min(p.two_min() - p.k2);
    let mut start = points.len();
    while start > 0 && points[start - 1].admissible() {
        start -= 1;
    }
    let tail = &points[start..];
    let min_of = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
    Ok(ScanReport {
        first_admissible_r: tail.first().map(|p| p.r),
        min_margin_k2: min_of(&mut points.iter().map(margin_k2)),
        min_margin_k1: min_of(&mut points.iter().map(|p| p.k1max)),
        tail_margin_k2: (!tail.is_empty()).then(|| min_of(&mut tail.iter().map(margin_k2))),
        tail_margin_k1: (!tail.is_empty()).then(|| min_of(&mut tail.iter().map(|p| p.k1max))),
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LeadingOrder {
    pub coefficient: f64,
    pub exponent: f64,
    pub r_squared: f64,
}

const FIT_POINTS: usize = 64;

/// Log-log least-squares fit `quantity ~ coefficient * r^exponent` on a window.
pub fn leading_order(
    family: &WeightFamily,
    quantity: Quantity,
    tau: f64,
    window: (f64, f64),
) -> Result<LeadingOrder> {
    let w = family.at(tau)?;
    let (lo, hi) = window;
    if !(lo > w.cyl.r0) || !(hi > lo) {
        return Err(Error::FitWindow(format!(
            "window [{lo}, {hi}] must satisfy r0 < lo < hi"
        )));
    }
    let rs = grid::geometric(lo, hi, FIT_POINTS);
    let mut xs = Vec::with_capacity(rs.len());
    let mut ys = Vec::with_capacity(rs.len());
    for r in rs {
        let v = w.quantity(quantity, r)?;
        if !(v > 0.0) {
            return Err(Error::NonPositive {
                quantity: quantity.name().to_string(),
                r,
            });
        }
        xs.push(r.ln());
        ys.push(v.ln());
    }
    let (a, b, r_squared) = grid::linear_fit(&xs, &ys);
    Ok(LeadingOrder {
        coefficient: a.exp(),
        exponent: b,
        r_squared,
    })
}

/// Default geometric ladder `tau0 * 2^k`, `k = 0..steps`.
pub fn tau_ladder(tau0: f64, steps: usize) -> Vec<f64> {
    (0..steps).map(|k| tau0 * 2f64.powi(k as i32)).collect()
}
