//! Closed-form scalar function families of the radius with exact derivative
//! stacks through third order.
//!
//! A [`FunctionJet3`] is a structural linear combination of registered
//! families. Every family codes its derivatives analytically (directly or by
//! the chain rule on [`Jet`]s), so third derivatives are exact up to rounding.
//! Families that overflow at large radius (`sinh`, `cosh`, `exp_rbeta`) also
//! report a log-scaled jet, which is what the weight and quadrature code use.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Value and first three derivatives `(f, f', f'', f''')` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet(pub [f64; 4]);

impl Jet {
    pub const ZERO: Jet = Jet([0.0; 4]);

    pub fn constant(c: f64) -> Self {
        Jet([c, 0.0, 0.0, 0.0])
    }

    /// The identity map evaluated at `r`.
    pub fn variable(r: f64) -> Self {
        Jet([r, 1.0, 0.0, 0.0])
    }

    pub fn value(&self) -> f64 {
        self.0[0]
    }

    pub fn d(&self, k: usize) -> f64 {
        self.0[k]
    }

    /// Chain rule: `outer` holds the derivatives of the outer function
    /// evaluated at `self.value()`.
    pub fn compose(self, outer: [f64; 4]) -> Jet {
        let [_, a, b, c] = self.0;
        let [p0, p1, p2, p3] = outer;
        Jet([
            p0,
            p1 * a,
            p2 * a * a + p1 * b,
            p3 * a * a * a + 3.0 * p2 * a * b + p1 * c,
        ])
    }

    pub fn recip(self) -> Jet {
        let v = self.0[0];
        let i = 1.0 / v;
        self.compose([i, -i * i, 2.0 * i * i * i, -6.0 * i * i * i * i])
    }

    pub fn powf(self, p: f64) -> Jet {
        let v = self.0[0];
        self.compose([
            v.powf(p),
            p * v.powf(p - 1.0),
            p * (p - 1.0) * v.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * v.powf(p - 3.0),
        ])
    }

    pub fn exp(self) -> Jet {
        let e = self.0[0].exp();
        self.compose([e; 4])
    }

    pub fn ln(self) -> Jet {
        let v = self.0[0];
        self.compose([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)])
    }

    pub fn scale(self, k: f64) -> Jet {
        Jet(self.0.map(|x| k * x))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| self.0[k] + o.0[k]))
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|k| self.0[k] - o.0[k]))
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let [f0, f1, f2, f3] = self.0;
        let [g0, g1, g2, g3] = o.0;
        Jet([
            f0 * g0,
            f1 * g0 + f0 * g1,
            f2 * g0 + 2.0 * f1 * g1 + f0 * g2,
            f3 * g0 + 3.0 * f2 * g1 + 3.0 * f1 * g2 + f0 * g3,
        ])
    }
}

/// A jet whose true value is `exp(log_scale) * jet`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledJet {
    pub log_scale: f64,
    pub jet: Jet,
}

impl ScaledJet {
    fn unscaled(jet: Jet) -> Self {
        ScaledJet {
            log_scale: 0.0,
            jet,
        }
    }

    pub fn to_jet(self) -> Jet {
        if self.log_scale == 0.0 {
            self.jet
        } else {
            self.jet.scale(self.log_scale.exp())
        }
    }
}

/// `ln f` and the logarithmic derivative ratios `f'/f, f''/f, f'''/f`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogRatios {
    pub ln_value: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

/// Registered closed-form families.
#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `c`
    Const { c: f64 },
    /// `r^beta`
    Power { beta: f64 },
    /// `c * r`
    Linear { c: f64 },
    /// `log r`
    Log,
    /// `log log r`
    LogLog,
    /// `(log r)^gamma`
    LogPow { gamma: f64 },
    /// `r^p (log r)^q`
    PowLog { p: f64, q: f64 },
    /// `sinh(a r)`
    Sinh { a: f64 },
    /// `cosh(a r)`
    Cosh { a: f64 },
    /// `exp(r^beta)`, `beta > 0`
    ExpPow { beta: f64 },
    /// Quintic smoothstep cutoff profile: 1 on `[0, 1]`, 0 on `[2, inf)`, C^2.
    Smoothstep,
    /// C^inf cutoff profile built from `exp(-1/x)`: 1 on `[0, 1]`, 0 on `[2, inf)`.
    ExpStep,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Const { .. } => "const",
            Family::Power { .. } => "power",
            Family::Linear { .. } => "linear",
            Family::Log => "log",
            Family::LogLog => "loglog",
            Family::LogPow { .. } => "logpow",
            Family::PowLog { .. } => "powlog",
            Family::Sinh { .. } => "sinh",
            Family::Cosh { .. } => "cosh",
            Family::ExpPow { .. } => "exp_rbeta",
            Family::Smoothstep => "smoothstep",
            Family::ExpStep => "expstep",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Family::Const { c } | Family::Linear { c } => vec![c],
            Family::Power { beta } | Family::ExpPow { beta } => vec![beta],
            Family::LogPow { gamma } => vec![gamma],
            Family::PowLog { p, q } => vec![p, q],
            Family::Sinh { a } | Family::Cosh { a } => vec![a],
            Family::Log | Family::LogLog | Family::Smoothstep | Family::ExpStep => vec![],
        }
    }

    /// Builds a family from its registry name and parameter list.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Family> {
        let arity = |expected: &str, ok: bool| -> Result<()> {
            if ok {
                Ok(())
            } else {
                Err(Error::Arity {
                    family: name.to_string(),
                    expected: expected.to_string(),
                    got: params.len(),
                })
            }
        };
        if let Some(p) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::ParamDomain {
                family: name.to_string(),
                reason: format!("non-finite parameter {p}"),
            });
        }
        let positive = |v: f64, what: &str| -> Result<f64> {
            if v > 0.0 {
                Ok(v)
            } else {
                Err(Error::ParamDomain {
                    family: name.to_string(),
                    reason: format!("{what} must be > 0, got {v}"),
                })
            }
        };
        let fam = match name {
            "const" => {
                arity("1", params.len() == 1)?;
                Family::Const { c: params[0] }
            }
            "power" => {
                arity("1", params.len() == 1)?;
                Family::Power { beta: params[0] }
            }
            "linear" => {
                arity("1", params.len() == 1)?;
                Family::Linear { c: params[0] }
            }
            "log" => {
                arity("0", params.is_empty())?;
                Family::Log
            }
            "loglog" => {
                arity("0", params.is_empty())?;
                Family::LogLog
            }
            "logpow" => {
                arity("1", params.len() == 1)?;
                Family::LogPow { gamma: params[0] }
            }
            "powlog" => {
                arity("2", params.len() == 2)?;
                Family::PowLog {
                    p: params[0],
                    q: params[1],
                }
            }
            "sinh" | "cosh" => {
                arity("0 or 1", params.len() <= 1)?;
                let a = positive(params.first().copied().unwrap_or(1.0), "rate a")?;
                if name == "sinh" {
                    Family::Sinh { a }
                } else {
                    Family::Cosh { a }
                }
            }
            "exp_rbeta" => {
                arity("1", params.len() == 1)?;
                Family::ExpPow {
                    beta: positive(params[0], "beta")?,
                }
            }
            "smoothstep" => {
                arity("0", params.is_empty())?;
                Family::Smoothstep
            }
            "expstep" => {
                arity("0", params.is_empty())?;
                Family::ExpStep
            }
            _ => return Err(Error::UnknownFamily(name.to_string())),
        };
        Ok(fam)
    }

    pub fn domain_min(&self) -> f64 {
        match self {
            // keeps log log r and negative powers of log r real and bounded
            Family::LogLog | Family::LogPow { .. } | Family::PowLog { .. } => std::f64::consts::E,
            _ => 0.0,
        }
    }

    fn eval_scaled(&self, r: f64) -> ScaledJet {
        match *self {
            Family::Const { c } => ScaledJet::unscaled(Jet::constant(c)),
            Family::Power { beta } => {
                if beta == 0.0 {
                    ScaledJet::unscaled(Jet::constant(1.0))
                } else {
                    ScaledJet::unscaled(Jet([
                        r.powf(beta),
                        beta * r.powf(beta - 1.0),
                        beta * (beta - 1.0) * r.powf(beta - 2.0),
                        beta * (beta - 1.0) * (beta - 2.0) * r.powf(beta - 3.0),
                    ]))
                }
            }
            Family::Linear { c } => ScaledJet::unscaled(Jet([c * r, c, 0.0, 0.0])),
            Family::Log => ScaledJet::unscaled(Jet([
                r.ln(),
                1.0 / r,
                -1.0 / (r * r),
                2.0 / (r * r * r),
            ])),
            Family::LogLog => ScaledJet::unscaled(Jet::variable(r).ln().ln()),
            Family::LogPow { gamma } => ScaledJet::unscaled(Jet::variable(r).ln().powf(gamma)),
            Family::PowLog { p, q } => {
                let x = Jet::variable(r);
                ScaledJet::unscaled(x.powf(p) * x.ln().powf(q))
            }
            Family::Sinh { a } | Family::Cosh { a } => {
                let x = a * r;
                let odd = matches!(self, Family::Sinh { .. });
                if x <= 1.0 {
                    let (s, c) = (x.sinh(), x.cosh());
                    let (even_part, odd_part) = if odd { (s, c) } else { (c, s) };
                    ScaledJet::unscaled(Jet([
                        even_part,
                        a * odd_part,
                        a * a * even_part,
                        a * a * a * odd_part,
                    ]))
                } else {
                    // sinh x = e^x (1 - e^{-2x}) / 2, cosh x = e^x (1 + e^{-2x}) / 2
                    let s = -(-2.0 * x).exp_m1() / 2.0;
                    let c = (1.0 + (-2.0 * x).exp()) / 2.0;
                    let (even_part, odd_part) = if odd { (s, c) } else { (c, s) };
                    ScaledJet {
                        log_scale: x,
                        jet: Jet([
                            even_part,
                            a * odd_part,
                            a * a * even_part,
                            a * a * a * odd_part,
                        ]),
                    }
                }
            }
            Family::ExpPow { beta } => {
                let p = Jet::variable(r).powf(beta);
                let ls = p.value();
                let shifted = Jet([0.0, p.0[1], p.0[2], p.0[3]]);
                ScaledJet {
                    log_scale: ls,
                    jet: shifted.exp(),
                }
            }
            Family::Smoothstep => ScaledJet::unscaled(smoothstep_profile(r)),
            Family::ExpStep => ScaledJet::unscaled(expstep_profile(r)),
        }
    }
}

fn smoothstep_profile(t: f64) -> Jet {
    if t <= 1.0 {
        return Jet::constant(1.0);
    }
    if t >= 2.0 {
        return Jet::ZERO;
    }
    let x = t - 1.0;
    let s = x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
    let s1 = 30.0 * x * x * (1.0 - 2.0 * x + x * x);
    let s2 = 60.0 * x * (1.0 - 3.0 * x + 2.0 * x * x);
    let s3 = 60.0 - 360.0 * x + 360.0 * x * x;
    Jet([1.0 - s, -s1, -s2, -s3])
}

/// `exp(-1/x)` for `x > 0`, extended by zero.
fn psi(x: Jet) -> Jet {
    if x.value() < 1e-3 {
        // exp(-1000) underflows; all derivatives vanish to machine precision
        return Jet::ZERO;
    }
    (-x.recip()).exp()
}

fn expstep_profile(t: f64) -> Jet {
    if t <= 1.0 {
        return Jet::constant(1.0);
    }
    if t >= 2.0 {
        return Jet::ZERO;
    }
    let a = psi(Jet([2.0 - t, -1.0, 0.0, 0.0]));
    let b = psi(Jet([t - 1.0, 1.0, 0.0, 0.0]));
    a * (a + b).recip()
}

/// A scalar function of the radius: a structural linear combination of
/// registered families, each with an analytically coded derivative stack.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionJet3 {
    terms: Vec<(f64, Family)>,
}

impl FunctionJet3 {
    pub fn from_family(family: Family) -> Self {
        FunctionJet3 {
            terms: vec![(1.0, family)],
        }
    }

    pub fn zero() -> Self {
        FunctionJet3 { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_family(Family::Const { c })
    }

    pub fn power(beta: f64) -> Self {
        Self::from_family(Family::Power { beta })
    }

    pub fn log() -> Self {
        Self::from_family(Family::Log)
    }

    pub fn sinh() -> Self {
        Self::from_family(Family::Sinh { a: 1.0 })
    }

    pub fn exp_rbeta(beta: f64) -> Result<Self> {
        Ok(Self::from_family(Family::from_name("exp_rbeta", &[beta])?))
    }

    /// Warping function of the constant-curvature space form with curvature
    /// `b <= 0`: `r` for `b = 0`, `sinh(sqrt(-b) r) / sqrt(-b)` otherwise.
    pub fn space_form(b: f64) -> Result<Self> {
        if b == 0.0 {
            Ok(Self::power(1.0))
        } else if b < 0.0 {
            let a = (-b).sqrt();
            Ok(Self::from_family(Family::Sinh { a }).scale(1.0 / a))
        } else {
            Err(Error::ParamDomain {
                family: "space_form".into(),
                reason: format!("curvature must be <= 0, got {b}"),
            })
        }
    }

    pub fn terms(&self) -> &[(f64, Family)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|(c, _)| *c == 0.0)
    }

    pub fn scale(&self, k: f64) -> Self {
        FunctionJet3 {
            terms: self.terms.iter().map(|(c, f)| (k * c, f.clone())).collect(),
        }
    }

    pub fn domain_min(&self) -> f64 {
        self.terms
            .iter()
            .map(|(_, f)| f.domain_min())
            .fold(0.0, f64::max)
    }

    fn check_domain(&self, r: f64) -> Result<()> {
        let min = self.domain_min();
        if !(r > min) || !r.is_finite() {
            return Err(Error::Domain { r, min });
        }
        Ok(())
    }

    /// Log-scaled evaluation; never overflows for the registered families.
    pub fn eval_scaled(&self, r: f64) -> Result<ScaledJet> {
        self.check_domain(r)?;
        let parts: Vec<(f64, ScaledJet)> = self
            .terms
            .iter()
            .filter(|(c, _)| *c != 0.0)
            .map(|(c, f)| (*c, f.eval_scaled(r)))
            .collect();
        if parts.is_empty() {
            return Ok(ScaledJet::unscaled(Jet::ZERO));
        }
        let top = parts
            .iter()
            .map(|(_, s)| s.log_scale)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut acc = Jet::ZERO;
        for (c, s) in &parts {
            let w = if s.log_scale == top {
                *c
            } else {
                c * (s.log_scale - top).exp()
            };
            acc = acc + s.jet.scale(w);
        }
        Ok(ScaledJet {
            log_scale: top,
            jet: acc,
        })
    }

    pub fn eval(&self, r: f64) -> Result<Jet> {
        Ok(self.eval_scaled(r)?.to_jet())
    }

    /// The first `order + 1` entries of the derivative stack.
    pub fn eval_jet(&self, r: f64, order: usize) -> Result<Vec<f64>> {
        if order > 3 {
            return Err(Error::ParamDomain {
                family: "eval_jet".into(),
                reason: format!("order must be <= 3, got {order}"),
            });
        }
        let j = self.eval(r)?;
        Ok(j.0[..=order].to_vec())
    }

    /// Logarithm and log-derivative ratios; requires a positive value.
    pub fn log_ratios(&self, r: f64) -> Result<LogRatios> {
        let s = self.eval_scaled(r)?;
        let v = s.jet.value();
        if !(v > 0.0) {
            return Err(Error::NonPositiveSigma { r });
        }
        Ok(LogRatios {
            ln_value: s.log_scale + v.ln(),
            r1: s.jet.0[1] / v,
            r2: s.jet.0[2] / v,
            r3: s.jet.0[3] / v,
        })
    }

    /// Parses a descriptor such as `2*power(1.3333) + 0.5*log()`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut p = DescriptorParser {
            src: text.as_bytes(),
            pos: 0,
        };
        let out = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(out)
    }

    /// Canonical descriptor; parsing it reproduces identical terms.
    pub fn descriptor(&self) -> String {
        if self.terms.is_empty() {
            return "0*const(0.0)".to_string();
        }
        self.terms
            .iter()
            .map(|(c, f)| {
                let params: Vec<String> = f.params().iter().map(|p| format!("{p:?}")).collect();
                format!("{c:?}*{}({})", f.name(), params.join(","))
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Builds a registered family by name, e.g. `make_family("power", &[1.0])`.
pub fn make_family(name: &str, params: &[f64]) -> Result<FunctionJet3> {
    Ok(FunctionJet3::from_family(Family::from_name(name, params)?))
}

impl Add for FunctionJet3 {
    type Output = FunctionJet3;
    fn add(mut self, o: FunctionJet3) -> FunctionJet3 {
        self.terms.extend(o.terms);
        self
    }
}

impl Sub for FunctionJet3 {
    type Output = FunctionJet3;
    fn sub(self, o: FunctionJet3) -> FunctionJet3 {
        self + o.scale(-1.0)
    }
}

impl Mul<FunctionJet3> for f64 {
    type Output = FunctionJet3;
    fn mul(self, f: FunctionJet3) -> FunctionJet3 {
        f.scale(self)
    }
}

impl fmt::Display for FunctionJet3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.descriptor())
    }
}

impl FromStr for FunctionJet3 {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FunctionJet3::parse(s)
    }
}

// EXPR ::= TERM (('+' | '-') TERM)*
// TERM ::= NUMBER '*' TERM | NUMBER | NAME '(' [NUMBER (',' NUMBER)*] ')' | '(' EXPR ')'
struct DescriptorParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl DescriptorParser<'_> {
    fn error(&self, message: &str) -> Error {
        Error::Parse {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, b: u8) -> Result<()> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", b as char)))
        }
    }

    fn expr(&mut self) -> Result<FunctionJet3> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc + self.term()?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<FunctionJet3> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() => self.call(),
            Some(_) => {
                let k = self.number()?;
                if self.peek() == Some(b'*') {
                    self.pos += 1;
                    Ok(self.term()?.scale(k))
                } else {
                    Ok(FunctionJet3::constant(k))
                }
            }
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn call(&mut self) -> Result<FunctionJet3> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        let name = name.to_string();
        self.expect(b'(')?;
        let mut params = Vec::new();
        if self.peek() != Some(b')') {
            loop {
                params.push(self.number()?);
                if self.peek() == Some(b',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(b')')?;
        let fam = Family::from_name(&name, &params).map_err(|e| match e {
            Error::UnknownFamily(_) => Error::Parse {
                offset: start,
                message: format!("unknown family `{name}`"),
            },
            other => other,
        })?;
        Ok(FunctionJet3::from_family(fam))
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let s = self.src;
        let mut i = self.pos;
        if i < s.len() && (s[i] == b'+' || s[i] == b'-') {
            i += 1;
        }
        let digits_start = i;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i == digits_start {
            return Err(self.error("expected a number"));
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            let exp_digits = j;
            while j < s.len() && s[j].is_ascii_digit() {
                j += 1;
            }
            if j > exp_digits {
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).unwrap_or_default();
        match text.parse::<f64>() {
            Ok(v) => {
                self.pos = i;
                Ok(v)
            }
            Err(_) => Err(self.error("malformed number")),
        }
    }
}
