//! The seven worked corollary configurations: geometry, weight, gauge, `k2`,
//! source envelopes `q1, q2`, decay envelope of `u`, and the closed forms the
//! derivations state for `F`, `k2L` and the `k1` bound.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcjet::{make_family, FunctionJet3};
use crate::geometry::WarpedCylinder;
use crate::regimes::growth::{symbol_of, AsymptoticSymbol};
use crate::weights::{K2Choice, TauFamily, WeightFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CaseId {
    #[serde(rename = "Eu-a")]
    EuA,
    #[serde(rename = "Eu-b")]
    EuB,
    #[serde(rename = "Eu-c")]
    EuC,
    #[serde(rename = "Hyp-a")]
    HypA,
    #[serde(rename = "Hyp-b")]
    HypB,
    #[serde(rename = "Ex-a")]
    ExA,
    #[serde(rename = "Ex-b")]
    ExB,
}

impl CaseId {
    pub const ALL: [CaseId; 7] = [
        CaseId::EuA,
        CaseId::EuB,
        CaseId::EuC,
        CaseId::HypA,
        CaseId::HypB,
        CaseId::ExA,
        CaseId::ExB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::EuA => "Eu-a",
            CaseId::EuB => "Eu-b",
            CaseId::EuC => "Eu-c",
            CaseId::HypA => "Hyp-a",
            CaseId::HypB => "Hyp-b",
            CaseId::ExA => "Ex-a",
            CaseId::ExB => "Ex-b",
        }
    }

    /// `"gamma"` for Eu-b, `"beta"` otherwise.
    pub fn param_name(self) -> &'static str {
        if self == CaseId::EuB {
            "gamma"
        } else {
            "beta"
        }
    }

    pub fn range_text(self) -> &'static str {
        match self {
            CaseId::EuA | CaseId::ExB => "0 < beta <= 2",
            CaseId::EuB => "gamma > 1",
            CaseId::EuC | CaseId::HypB => "beta > 2",
            CaseId::HypA => "1 <= beta <= 2",
            CaseId::ExA => "0 < beta < 1",
        }
    }

    pub fn in_range(self, p: f64) -> bool {
        p.is_finite()
            && match self {
                CaseId::EuA | CaseId::ExB => p > 0.0 && p <= 2.0,
                CaseId::EuB => p > 1.0,
                CaseId::EuC | CaseId::HypB => p > 2.0,
                CaseId::HypA => (1.0..=2.0).contains(&p),
                CaseId::ExA => p > 0.0 && p < 1.0,
            }
    }

    fn range_hint(self, p: f64) -> String {
        let redirect = match self {
            CaseId::EuA if p > 2.0 => Some(CaseId::EuC),
            CaseId::EuC if p > 0.0 && p <= 2.0 => Some(CaseId::EuA),
            CaseId::HypA if p > 2.0 => Some(CaseId::HypB),
            CaseId::HypB if (1.0..=2.0).contains(&p) => Some(CaseId::HypA),
            CaseId::ExA if (1.0..=2.0).contains(&p) => Some(CaseId::ExB),
            _ => None,
        };
        match redirect {
            Some(c) => format!(
                "requires {}; use case {} ({})",
                self.range_text(),
                c.name(),
                c.range_text()
            ),
            None => format!("requires {}", self.range_text()),
        }
    }

    /// Three in-range parameter samples.
    pub fn samples(self) -> [f64; 3] {
        match self {
            CaseId::EuA => [1.0, 4.0 / 3.0, 2.0],
            CaseId::EuB => [1.5, 4.0 / 3.0, 2.0],
            CaseId::EuC => [2.5, 3.0, 4.0],
            CaseId::HypA => [1.0, 1.5, 2.0],
            CaseId::HypB => [2.5, 3.0, 4.0],
            CaseId::ExA => [0.25, 0.5, 0.75],
            CaseId::ExB => [0.5, 1.0, 2.0],
        }
    }

    /// Whether the `growth-bound` condition is expected to fail, so the gradient
    /// condition has to be assumed separately.
    pub fn needs_gradient_hypothesis(self) -> bool {
        matches!(self, CaseId::EuC | CaseId::HypB)
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Precondition(format!(
                    "unknown case `{s}` (expected one of Eu-a, Eu-b, Eu-c, Hyp-a, Hyp-b, Ex-a, Ex-b)"
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CaseParams {
    /// `beta`, or `gamma` for Eu-b.
    pub param: f64,
    pub n: usize,
    pub c1: f64,
    pub c2: f64,
}

impl CaseParams {
    pub fn new(param: f64, n: usize) -> Self {
        CaseParams {
            param,
            n,
            c1: 1.0,
            c2: 1.0,
        }
    }
}

/// `poly(tau) * r^p * (log r)^q` with `poly` given by ascending coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StatedForm {
    pub tau_poly: [f64; 4],
    pub p: f64,
    pub q: f64,
}

impl StatedForm {
    fn tau_power(c: f64, k: usize, p: f64, q: f64) -> Self {
        let mut tau_poly = [0.0; 4];
        tau_poly[k] = c;
        StatedForm { tau_poly, p, q }
    }

    pub fn coefficient(&self, tau: f64) -> f64 {
        self.tau_poly.iter().rev().fold(0.0, |acc, c| acc * tau + c)
    }

    pub fn eval(&self, tau: f64, r: f64) -> f64 {
        let lr = r.ln();
        let log_part = if self.q == 0.0 { 1.0 } else { lr.powf(self.q) };
        self.coefficient(tau) * r.powf(self.p) * log_part
    }

    pub fn symbol(&self, tau: f64) -> AsymptoticSymbol {
        AsymptoticSymbol::monomial(self.coefficient(tau), self.p, self.q)
    }

    /// Degree of the polynomial in `tau`.
    pub fn tau_degree(&self) -> usize {
        self.tau_poly.iter().rposition(|c| *c != 0.0).unwrap_or(0)
    }
}

/// One fully assembled corollary configuration.
#[derive(Clone, Debug)]
pub struct CorollaryCase {
    pub id: CaseId,
    pub params: CaseParams,
    pub family: WeightFamily,
    /// `h = tau * h_scaled`.
    pub h_scaled: AsymptoticSymbol,
    /// `k2 = tau * k2_scaled + k2_fixed`.
    pub k2_scaled: AsymptoticSymbol,
    pub k2_fixed: AsymptoticSymbol,
    pub sigma_symbol: AsymptoticSymbol,
    pub q1: AsymptoticSymbol,
    /// `None` when the inequality has no gradient source term.
    pub q2: Option<AsymptoticSymbol>,
    /// `u = O(exp(-tau_tilde * psi))`.
    pub decay_profile: FunctionJet3,
    pub decay_symbol: AsymptoticSymbol,
    pub k1_stated: StatedForm,
    pub k2l_stated: StatedForm,
    /// Radius window on which the scans and batteries run.
    pub window: (f64, f64),
}

impl CorollaryCase {
    pub fn build(id: CaseId, params: CaseParams) -> Result<Self> {
        let p = params.param;
        if !id.in_range(p) {
            return Err(Error::ParamRange {
                case: id.name().to_string(),
                param: id.param_name().to_string(),
                value: p,
                hint: id.range_hint(p),
            });
        }
        if params.n < 2 {
            return Err(Error::ParamRange {
                case: id.name().to_string(),
                param: "n".into(),
                value: params.n as f64,
                hint: "requires n >= 2".into(),
            });
        }
        for (name, c) in [("C1", params.c1), ("C2", params.c2)] {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::ParamRange {
                    case: id.name().to_string(),
                    param: name.into(),
                    value: c,
                    hint: "requires a finite non-negative constant".into(),
                });
            }
        }
        let n = params.n;
        let nf = n as f64;
        let (c1, c2) = (params.c1, params.c2);
        let mono = AsymptoticSymbol::monomial;
        let case = match id {
            CaseId::EuA | CaseId::EuC => CorollaryCase {
                id,
                params,
                family: WeightFamily {
                    cyl: WarpedCylinder::over_sphere(n, FunctionJet3::power(1.0), 0.0, 4)?,
                    h: TauFamily::proportional(FunctionJet3::power(p).scale(2.0)),
                    g: FunctionJet3::log().scale(3.0 - 2.0 * p),
                    k2: K2Choice::Jet(TauFamily::proportional(
                        FunctionJet3::power(p - 2.0).scale(p * p),
                    )),
                },
                h_scaled: mono(2.0, p, 0.0),
                k2_scaled: mono(p * p, p - 2.0, 0.0),
                k2_fixed: AsymptoticSymbol::zero(),
                sigma_symbol: mono(1.0, 1.0, 0.0),
                q1: mono(c1, 1.5 * p - 2.0, 0.0),
                q2: Some(mono(c2, 0.5 * p - 1.0, 0.0)),
                decay_profile: FunctionJet3::power(p),
                decay_symbol: mono(1.0, p, 0.0),
                k1_stated: StatedForm::tau_power(p.powi(4), 3, 3.0 * p - 4.0, 0.0),
                k2l_stated: StatedForm::tau_power(2.0 * p * p, 2, 2.0 * p - 2.0, 0.0),
                window: (4.0, 400.0),
            },
            CaseId::EuB => CorollaryCase {
                id,
                params,
                family: WeightFamily {
                    cyl: WarpedCylinder::over_sphere(n, FunctionJet3::power(1.0), 0.0, 4)?,
                    h: TauFamily::proportional(make_family("logpow", &[p])?),
                    g: FunctionJet3::log().scale(3.0)
                        - make_family("loglog", &[])?.scale(2.0 * p - 2.0),
                    k2: K2Choice::Jet(TauFamily::proportional(
                        make_family("powlog", &[-2.0, p - 2.0])?.scale(0.5 * p * (p - 1.0)),
                    )),
                },
                h_scaled: mono(1.0, 0.0, p),
                k2_scaled: mono(0.5 * p * (p - 1.0), -2.0, p - 2.0),
                k2_fixed: AsymptoticSymbol::zero(),
                sigma_symbol: mono(1.0, 1.0, 0.0),
                q1: mono(c1, -2.0, 1.5 * p - 2.0),
                q2: Some(mono(c2, -1.0, 0.5 * p - 1.0)),
                decay_profile: make_family("logpow", &[p])?,
                decay_symbol: mono(1.0, 0.0, p),
                k1_stated: StatedForm::tau_power(p.powi(3) * (p - 1.0) / 8.0, 3, -4.0, 3.0 * p - 4.0),
                k2l_stated: StatedForm::tau_power(0.5 * p * p, 2, -2.0, 2.0 * p - 2.0),
                window: (20.0, 2.0e3),
            },
            CaseId::HypA | CaseId::HypB => CorollaryCase {
                id,
                params,
                family: WeightFamily {
                    cyl: WarpedCylinder::over_sphere(n, FunctionJet3::sinh(), 0.0, 4)?,
                    h: TauFamily::proportional(FunctionJet3::power(p).scale(2.0)),
                    g: FunctionJet3::power(1.0),
                    k2: K2Choice::Jet(TauFamily::proportional(
                        FunctionJet3::power(p - 1.0).scale(p),
                    )),
                },
                h_scaled: mono(2.0, p, 0.0),
                k2_scaled: mono(p, p - 1.0, 0.0),
                k2_fixed: AsymptoticSymbol::zero(),
                sigma_symbol: symbol_of(&FunctionJet3::sinh())?,
                q1: mono(c1, 1.5 * p - 1.5, 0.0),
                q2: Some(mono(c2, 0.5 * p - 0.5, 0.0)),
                decay_profile: FunctionJet3::power(p),
                decay_symbol: mono(1.0, p, 0.0),
                k1_stated: StatedForm::tau_power(p.powi(3), 3, 3.0 * p - 3.0, 0.0),
                k2l_stated: StatedForm::tau_power(2.0 * p * p, 2, 2.0 * p - 2.0, 0.0),
                window: (4.0, 200.0),
            },
            CaseId::ExA => {
                let e = (4.0 - p) / 3.0;
                CorollaryCase {
                    id,
                    params,
                    family: WeightFamily {
                        cyl: WarpedCylinder::over_sphere(n, FunctionJet3::exp_rbeta(p)?, 0.0, 4)?,
                        h: TauFamily::proportional(FunctionJet3::power(e)),
                        g: FunctionJet3::power(p),
                        k2: K2Choice::Zero,
                    },
                    h_scaled: mono(1.0, e, 0.0),
                    k2_scaled: AsymptoticSymbol::zero(),
                    k2_fixed: AsymptoticSymbol::zero(),
                    sigma_symbol: AsymptoticSymbol::exp_power(1.0, 1.0, p)?,
                    q1: AsymptoticSymbol::constant(c1),
                    q2: None,
                    decay_profile: FunctionJet3::power(e),
                    decay_symbol: mono(1.0, e, 0.0),
                    k1_stated: StatedForm::tau_power(p * (4.0 - p).powi(3) / 216.0, 3, 0.0, 0.0),
                    k2l_stated: StatedForm::tau_power(
                        (4.0 - p).powi(2) / 18.0,
                        2,
                        (2.0 - 2.0 * p) / 3.0,
                        0.0,
                    ),
                    window: (4.0, 400.0),
                }
            }
            CaseId::ExB => {
                let d = nf - 2.0;
                let b4 = p.powi(4) / 8.0;
                CorollaryCase {
                    id,
                    params,
                    family: WeightFamily {
                        cyl: WarpedCylinder::over_sphere(n, FunctionJet3::exp_rbeta(p)?, 0.0, 4)?,
                        h: TauFamily::proportional(FunctionJet3::power(p)),
                        g: FunctionJet3::power(p),
                        k2: K2Choice::Jet(TauFamily::new(
                            FunctionJet3::power(2.0 * p - 2.0).scale(0.5 * p * p),
                            FunctionJet3::power(2.0 * p - 2.0).scale(0.5 * d * p * p),
                        )),
                    },
                    h_scaled: mono(1.0, p, 0.0),
                    k2_scaled: mono(0.5 * p * p, 2.0 * p - 2.0, 0.0),
                    k2_fixed: mono(0.5 * d * p * p, 2.0 * p - 2.0, 0.0),
                    sigma_symbol: AsymptoticSymbol::exp_power(1.0, 1.0, p)?,
                    q1: mono(c1, 2.0 * p - 2.0, 0.0),
                    q2: Some(mono(c2, p - 1.0, 0.0)),
                    decay_profile: FunctionJet3::power(p),
                    decay_symbol: mono(1.0, p, 0.0),
                    k1_stated: StatedForm {
                        tau_poly: [d.powi(3) * b4, 3.0 * d * d * b4, 3.0 * d * b4, b4],
                        p: 4.0 * p - 4.0,
                        q: 0.0,
                    },
                    k2l_stated: StatedForm {
                        tau_poly: [0.5 * d * d * p * p, d * p * p, 0.5 * p * p, 0.0],
                        p: 2.0 * p - 2.0,
                        q: 0.0,
                    },
                    window: (4.0, 400.0),
                }
            }
        };
        Ok(case)
    }

    pub fn k2_symbol(&self, tau: f64) -> AsymptoticSymbol {
        self.k2_scaled.scale(tau).add(&self.k2_fixed)
    }

    pub fn h_symbol(&self, tau: f64) -> AsymptoticSymbol {
        self.h_scaled.scale(tau)
    }

    /// The closed form of `F` the derivation states for this case.
    pub fn f_closed_form(&self, tau: f64, r: f64) -> f64 {
        let p = self.params.param;
        let nf = self.params.n as f64;
        match self.id {
            CaseId::EuA | CaseId::EuC => p * tau * r.powf(p - 1.0) + (nf - 4.0 + 2.0 * p) / (2.0 * r),
            CaseId::EuB => {
                let l = r.ln();
                (tau * p * l.powf(p - 1.0) + nf - 4.0 + (2.0 * p - 2.0) / l) / (2.0 * r)
            }
            CaseId::HypA | CaseId::HypB => {
                tau * p * r.powf(p - 1.0) + 0.5 * (nf - 1.0) / r.tanh() - 0.5
            }
            CaseId::ExA => {
                tau * (4.0 - p) / 6.0 * r.powf((1.0 - p) / 3.0)
                    + 0.5 * (nf - 2.0) * p * r.powf(p - 1.0)
            }
            CaseId::ExB => 0.5 * (tau + nf - 2.0) * p * r.powf(p - 1.0),
        }
    }
}
