//! Formal growth symbols `sum coeff * r^p * (log r)^q * exp(sum c r^beta + sum d (log r)^gamma)`
//! with a total dominance preorder as `r -> inf`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcjet::{Family, FunctionJet3};

/// `c * r^beta` inside the exponential, `beta > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpAtom {
    pub c: f64,
    pub beta: f64,
}

/// `d * (log r)^gamma` inside the exponential, `gamma > 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogExpAtom {
    pub d: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub coeff: f64,
    pub p: f64,
    pub q: f64,
    pub exp_atoms: Vec<ExpAtom>,
    pub log_exp_atoms: Vec<LogExpAtom>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct AsymptoticSymbol {
    terms: Vec<Term>,
}

/// Outcome of comparing two growth symbols.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Comparison {
    /// `a = o(b)`
    ALittleOB,
    /// `a = Theta(b)`
    Theta,
    /// `b = o(a)`
    BLittleOA,
    Incomparable,
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparison::ALittleOB => "a = o(b)",
            Comparison::Theta => "a = Theta(b)",
            Comparison::BLittleOA => "b = o(a)",
            Comparison::Incomparable => "incomparable",
        })
    }
}

/// Lexicographic comparison of two exponent parts listed by decreasing scale.
fn cmp_parts(a: &[(f64, f64)], b: &[(f64, f64)]) -> Ordering {
    let sign = |c: f64| c.partial_cmp(&0.0).unwrap_or(Ordering::Equal);
    let (mut i, mut j) = (0, 0);
    loop {
        match (a.get(i), b.get(j)) {
            (None, None) => return Ordering::Equal,
            (Some(x), None) => return sign(x.1),
            (None, Some(y)) => return sign(y.1).reverse(),
            (Some(x), Some(y)) => {
                if x.0 > y.0 {
                    return sign(x.1);
                }
                if y.0 > x.0 {
                    return sign(y.1).reverse();
                }
                match x.1.total_cmp(&y.1) {
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                    }
                    o => return o,
                }
            }
        }
    }
}

impl Term {
    pub fn constant(c: f64) -> Self {
        Term {
            coeff: c,
            p: 0.0,
            q: 0.0,
            exp_atoms: Vec::new(),
            log_exp_atoms: Vec::new(),
        }
    }

    fn exp_part(&self) -> Vec<(f64, f64)> {
        self.exp_atoms.iter().map(|a| (a.beta, a.c)).collect()
    }

    fn log_exp_part(&self) -> Vec<(f64, f64)> {
        self.log_exp_atoms.iter().map(|a| (a.gamma, a.d)).collect()
    }

    /// Growth order of `|term|`, ignoring the coefficient.
    pub fn dominance_cmp(&self, other: &Term) -> Ordering {
        cmp_parts(&self.exp_part(), &other.exp_part())
            .then_with(|| cmp_parts(&self.log_exp_part(), &other.log_exp_part()))
            .then_with(|| self.p.total_cmp(&other.p))
            .then_with(|| self.q.total_cmp(&other.q))
    }

    fn normalize_atoms(&mut self) {
        let mut exp: Vec<ExpAtom> = Vec::new();
        for a in &self.exp_atoms {
            match exp.iter_mut().find(|e| e.beta == a.beta) {
                Some(e) => e.c += a.c,
                None => exp.push(*a),
            }
        }
        exp.retain(|e| e.c != 0.0);
        exp.sort_by(|x, y| y.beta.total_cmp(&x.beta));
        self.exp_atoms = exp;
        let mut logs: Vec<LogExpAtom> = Vec::new();
        for a in &self.log_exp_atoms {
            match logs.iter_mut().find(|e| e.gamma == a.gamma) {
                Some(e) => e.d += a.d,
                None => logs.push(*a),
            }
        }
        logs.retain(|e| e.d != 0.0);
        logs.sort_by(|x, y| y.gamma.total_cmp(&x.gamma));
        self.log_exp_atoms = logs;
        if self.p == 0.0 {
            self.p = 0.0;
        }
        if self.q == 0.0 {
            self.q = 0.0;
        }
    }

    fn mul(&self, o: &Term) -> Term {
        let mut t = Term {
            coeff: self.coeff * o.coeff,
            p: self.p + o.p,
            q: self.q + o.q,
            exp_atoms: self.exp_atoms.iter().chain(&o.exp_atoms).copied().collect(),
            log_exp_atoms: self
                .log_exp_atoms
                .iter()
                .chain(&o.log_exp_atoms)
                .copied()
                .collect(),
        };
        t.normalize_atoms();
        t
    }

    fn render(&self) -> String {
        let mut parts = vec![format!("{:?}", self.coeff)];
        if self.p != 0.0 {
            parts.push(format!("r^{:?}", self.p));
        }
        if self.q != 0.0 {
            parts.push(format!("(log r)^{:?}", self.q));
        }
        if !self.exp_atoms.is_empty() || !self.log_exp_atoms.is_empty() {
            let inner: Vec<String> = self
                .exp_atoms
                .iter()
                .map(|a| format!("{:?}*r^{:?}", a.c, a.beta))
                .chain(
                    self.log_exp_atoms
                        .iter()
                        .map(|a| format!("{:?}*(log r)^{:?}", a.d, a.gamma)),
                )
                .collect();
            parts.push(format!("exp({})", inner.join(" + ")));
        }
        parts.join("*")
    }
}

impl AsymptoticSymbol {
    pub fn zero() -> Self {
        AsymptoticSymbol { terms: Vec::new() }
    }

    pub fn from_terms(terms: Vec<Term>) -> Self {
        let mut s = AsymptoticSymbol { terms };
        s.normalize();
        s
    }

    pub fn constant(c: f64) -> Self {
        Self::from_terms(vec![Term::constant(c)])
    }

    /// `coeff * r^p * (log r)^q`.
    pub fn monomial(coeff: f64, p: f64, q: f64) -> Self {
        Self::from_terms(vec![Term {
            p,
            q,
            ..Term::constant(coeff)
        }])
    }

    /// `coeff * exp(c r^beta)`.
    pub fn exp_power(coeff: f64, c: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0) {
            return Err(Error::ParamDomain {
                family: "exp atom".into(),
                reason: format!("beta must be > 0, got {beta}"),
            });
        }
        Ok(Self::from_terms(vec![Term {
            exp_atoms: vec![ExpAtom { c, beta }],
            ..Term::constant(coeff)
        }]))
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<&Term> {
        self.terms.first()
    }

    fn normalize(&mut self) {
        for t in &mut self.terms {
            t.normalize_atoms();
        }
        let mut merged: Vec<Term> = Vec::new();
        for t in self.terms.drain(..) {
            match merged
                .iter_mut()
                .find(|m| m.dominance_cmp(&t) == Ordering::Equal)
            {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        merged.sort_by(|a, b| b.dominance_cmp(a));
        self.terms = merged;
    }

    pub fn add(&self, o: &AsymptoticSymbol) -> Self {
        Self::from_terms(self.terms.iter().chain(&o.terms).cloned().collect())
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .map(|t| Term {
                    coeff: k * t.coeff,
                    ..t.clone()
                })
                .collect(),
        )
    }

    pub fn mul(&self, o: &AsymptoticSymbol) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for a in &self.terms {
            for b in &o.terms {
                terms.push(a.mul(b));
            }
        }
        Self::from_terms(terms)
    }

    /// The leading term alone.
    pub fn leading_symbol(&self) -> Self {
        AsymptoticSymbol {
            terms: self.terms.first().cloned().into_iter().collect(),
        }
    }

    /// Real power of the leading term; the coefficient must be positive.
    pub fn leading_powf(&self, e: f64) -> Result<Self> {
        let Some(t) = self.leading() else {
            return if e > 0.0 {
                Ok(Self::zero())
            } else {
                Err(Error::Precondition("power of the zero symbol".into()))
            };
        };
        if !(t.coeff > 0.0) {
            return Err(Error::Precondition(format!(
                "real power of a term with non-positive coefficient {}",
                t.coeff
            )));
        }
        Ok(Self::from_terms(vec![Term {
            coeff: t.coeff.powf(e),
            p: t.p * e,
            q: t.q * e,
            exp_atoms: t
                .exp_atoms
                .iter()
                .map(|a| ExpAtom { c: a.c * e, beta: a.beta })
                .collect(),
            log_exp_atoms: t
                .log_exp_atoms
                .iter()
                .map(|a| LogExpAtom { d: a.d * e, gamma: a.gamma })
                .collect(),
        }]))
    }

    /// Exact derivative in `r`; the class is closed under differentiation.
    pub fn derivative(&self) -> Self {
        let mut out = Vec::new();
        for t in &self.terms {
            let base = |coeff: f64, dp: f64, dq: f64| Term {
                coeff: t.coeff * coeff,
                p: t.p + dp,
                q: t.q + dq,
                ..t.clone()
            };
            if t.p != 0.0 {
                out.push(base(t.p, -1.0, 0.0));
            }
            if t.q != 0.0 {
                out.push(base(t.q, -1.0, -1.0));
            }
            for a in &t.exp_atoms {
                out.push(base(a.c * a.beta, a.beta - 1.0, 0.0));
            }
            for a in &t.log_exp_atoms {
                out.push(base(a.d * a.gamma, -1.0, a.gamma - 1.0));
            }
        }
        Self::from_terms(out)
    }

    /// `exp(self)`, when every term is an admissible exponent piece.
    pub fn exp_of(&self) -> Result<Self> {
        let mut t = Term::constant(1.0);
        for s in &self.terms {
            let not_rep = || {
                Error::Precondition(format!(
                    "exp of `{}` is outside the growth grammar",
                    s.render()
                ))
            };
            if !s.exp_atoms.is_empty() || !s.log_exp_atoms.is_empty() {
                return Err(not_rep());
            }
            match (s.p, s.q) {
                (p, q) if p == 0.0 && q == 0.0 => t.coeff *= s.coeff.exp(),
                (p, q) if p > 0.0 && q == 0.0 => t.exp_atoms.push(ExpAtom { c: s.coeff, beta: p }),
                (p, q) if p == 0.0 && q == 1.0 => t.p += s.coeff,
                (p, q) if p == 0.0 && q > 1.0 => t.log_exp_atoms.push(LogExpAtom { d: s.coeff, gamma: q }),
                _ => return Err(not_rep()),
            }
        }
        Ok(Self::from_terms(vec![t]))
    }

    /// Whether `int^inf self dr` converges, judged on the leading term.
    pub fn is_integrable_at_infinity(&self) -> bool {
        let Some(t) = self.leading() else {
            return true;
        };
        if let Some(a) = t.exp_atoms.first() {
            return a.c < 0.0;
        }
        if let Some(a) = t.log_exp_atoms.first() {
            return a.d < 0.0;
        }
        t.p < -1.0 || (t.p == -1.0 && t.q < -1.0)
    }

    /// Whether the symbol tends to zero.
    pub fn tends_to_zero(&self) -> bool {
        compare_growth(self, &AsymptoticSymbol::constant(1.0)) == Comparison::ALittleOB
    }

    /// Whether the leading term tends to `+inf`.
    pub fn tends_to_plus_infinity(&self) -> bool {
        match self.leading() {
            Some(t) => {
                t.coeff > 0.0
                    && compare_growth(self, &AsymptoticSymbol::constant(1.0))
                        == Comparison::BLittleOA
            }
            None => false,
        }
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(Term::render)
            .collect::<Vec<_>>()
            .join(" + ")
    }

    /// Evaluates the symbol at a radius `r > 1`.
    pub fn eval(&self, r: f64) -> f64 {
        let lr = r.ln();
        self.terms
            .iter()
            .map(|t| {
                let e: f64 = t.exp_atoms.iter().map(|a| a.c * r.powf(a.beta)).sum::<f64>()
                    + t.log_exp_atoms.iter().map(|a| a.d * lr.powf(a.gamma)).sum::<f64>();
                t.coeff * (t.p * lr + t.q * lr.ln() + e).exp()
            })
            .sum()
    }
}

impl fmt::Display for AsymptoticSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl FromStr for AsymptoticSymbol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_growth(s)
    }
}

/// Compares the growth of `|a|` and `|b|` through their leading terms.
pub fn compare_growth(a: &AsymptoticSymbol, b: &AsymptoticSymbol) -> Comparison {
    match (a.leading(), b.leading()) {
        (None, None) => Comparison::Theta,
        (None, Some(_)) => Comparison::ALittleOB,
        (Some(_), None) => Comparison::BLittleOA,
        (Some(x), Some(y)) => match x.dominance_cmp(y) {
            Ordering::Less => Comparison::ALittleOB,
            Ordering::Equal => Comparison::Theta,
            Ordering::Greater => Comparison::BLittleOA,
        },
    }
}

/// Growth symbol of a registered function, exact for every family except
/// the iterated logarithm, which the grammar cannot express.
pub fn symbol_of(f: &FunctionJet3) -> Result<AsymptoticSymbol> {
    let mut acc = AsymptoticSymbol::zero();
    for (c, fam) in f.terms() {
        let s = match *fam {
            Family::Const { c } => AsymptoticSymbol::constant(c),
            Family::Power { beta } => AsymptoticSymbol::monomial(1.0, beta, 0.0),
            Family::Linear { c } => AsymptoticSymbol::monomial(c, 1.0, 0.0),
            Family::Log => AsymptoticSymbol::monomial(1.0, 0.0, 1.0),
            Family::LogPow { gamma } => AsymptoticSymbol::monomial(1.0, 0.0, gamma),
            Family::PowLog { p, q } => AsymptoticSymbol::monomial(1.0, p, q),
            Family::Sinh { a } => AsymptoticSymbol::exp_power(0.5, a, 1.0)?
                .add(&AsymptoticSymbol::exp_power(-0.5, -a, 1.0)?),
            Family::Cosh { a } => AsymptoticSymbol::exp_power(0.5, a, 1.0)?
                .add(&AsymptoticSymbol::exp_power(0.5, -a, 1.0)?),
            Family::ExpPow { beta } => AsymptoticSymbol::exp_power(1.0, 1.0, beta)?,
            Family::Smoothstep | Family::ExpStep => AsymptoticSymbol::zero(),
            Family::LogLog => {
                return Err(Error::Precondition(
                    "log log r has no growth symbol in the grammar".into(),
                ))
            }
        };
        acc = acc.add(&s.scale(*c));
    }
    Ok(acc)
}

/// Parses a growth expression.
///
/// ```text
/// SUM    ::= TERM (('+' | '-') TERM)*
/// TERM   ::= FACTOR ('*' FACTOR)*
/// FACTOR ::= NUMBER | 'r' ['^' NUMBER] | '(log r)' ['^' NUMBER] | 'exp(' SUM ')'
/// ```
///
/// Inside `exp(...)` every term must be a constant, `c*r^B` with `B > 0`,
/// `c*(log r)` or `c*(log r)^G` with `G > 1`.
pub fn parse_growth(text: &str) -> Result<AsymptoticSymbol> {
    let mut p = GrowthParser {
        src: text.as_bytes(),
        pos: 0,
    };
    let terms = p.sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(AsymptoticSymbol::from_terms(
        terms.into_iter().map(|(_, t, _)| t).collect(),
    ))
}

struct GrowthParser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl GrowthParser<'_> {
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

    fn eat(&mut self, lit: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, lit: &str) -> Result<()> {
        if self.eat(lit) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{lit}`")))
        }
    }

    /// Terms with their starting offsets and whether `r` appears explicitly.
    fn sum(&mut self) -> Result<Vec<(usize, Term, bool)>> {
        let mut out = Vec::new();
        self.skip_ws();
        let start = self.pos;
        let (t, has_r) = self.term()?;
        out.push((start, t, has_r));
        loop {
            let sign = match self.peek() {
                Some(b'+') => 1.0,
                Some(b'-') => -1.0,
                _ => return Ok(out),
            };
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            let (mut t, has_r) = self.term()?;
            t.coeff *= sign;
            out.push((start, t, has_r));
        }
    }

    fn term(&mut self) -> Result<(Term, bool)> {
        let (mut t, mut has_r) = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            let (f, r) = self.factor()?;
            t = t.mul(&f);
            has_r |= r;
        }
        Ok((t, has_r))
    }

    fn factor(&mut self) -> Result<(Term, bool)> {
        if self.eat("exp(") {
            let inner = self.sum()?;
            self.expect(")")?;
            return Ok((self.exp_factor(inner)?, false));
        }
        if self.eat("(log r)") || self.eat("(log(r))") {
            let q = if self.eat("^") { self.number()? } else { 1.0 };
            return Ok((
                Term {
                    q,
                    ..Term::constant(1.0)
                },
                false,
            ));
        }
        match self.peek() {
            Some(b'r') => {
                self.pos += 1;
                let p = if self.eat("^") { self.number()? } else { 1.0 };
                Ok((
                    Term {
                        p,
                        ..Term::constant(1.0)
                    },
                    true,
                ))
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.sum()?;
                self.expect(")")?;
                if inner.len() != 1 {
                    return Err(self.error("parenthesized sums must be expanded"));
                }
                let (_, t, has_r) = inner.into_iter().next().expect("one term");
                Ok((t, has_r))
            }
            Some(_) => Ok((Term::constant(self.number()?), false)),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn exp_factor(&self, inner: Vec<(usize, Term, bool)>) -> Result<Term> {
        let mut t = Term::constant(1.0);
        for (offset, s, has_r) in inner {
            let fail = |message: &str| Error::Parse {
                offset,
                message: message.to_string(),
            };
            if !s.exp_atoms.is_empty() || !s.log_exp_atoms.is_empty() {
                return Err(fail("nested exp is not supported"));
            }
            if s.p != 0.0 && s.q != 0.0 {
                return Err(fail("mixed r and log r powers inside exp"));
            }
            if s.q == 0.0 {
                if s.p == 0.0 && !has_r {
                    t.coeff *= s.coeff.exp();
                } else if s.p > 0.0 {
                    t.exp_atoms.push(ExpAtom { c: s.coeff, beta: s.p });
                } else {
                    return Err(fail("exponent beta of r inside exp must be > 0"));
                }
            } else if s.q == 1.0 {
                t.p += s.coeff;
            } else if s.q > 1.0 {
                t.log_exp_atoms.push(LogExpAtom {
                    d: s.coeff,
                    gamma: s.q,
                });
            } else {
                return Err(fail("power of log r inside exp must be 1 or > 1"));
            }
        }
        t.normalize_atoms();
        Ok(t)
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let s = self.src;
        let start = self.pos;
        let mut i = self.pos;
        if i < s.len() && (s[i] == b'+' || s[i] == b'-') {
            i += 1;
        }
        let digits = i;
        while i < s.len() && (s[i].is_ascii_digit() || s[i] == b'.') {
            i += 1;
        }
        if i == digits {
            return Err(self.error("expected a number"));
        }
        if i < s.len() && (s[i] == b'e' || s[i] == b'E') {
            let mut j = i + 1;
            if j < s.len() && (s[j] == b'+' || s[j] == b'-') {
                j += 1;
            }
            let k = j;
            while j < s.len() && s[j].is_ascii_digit() {
                j += 1;
            }
            if j > k {
                i = j;
            }
        }
        let text = std::str::from_utf8(&s[start..i]).unwrap_or_default();
        let v: f64 = text.parse().map_err(|_| self.error("malformed number"))?;
        if !v.is_finite() {
            return Err(self.error("number out of range"));
        }
        self.pos = i;
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(s: &str) -> AsymptoticSymbol {
        parse_growth(s).unwrap()
    }

    #[test]
    fn grammar_echo() {
        let s = sym("2*r^1.5*exp(-3*r^2)");
        assert_eq!(
            s.terms(),
            &[Term {
                coeff: 2.0,
                p: 1.5,
                q: 0.0,
                exp_atoms: vec![ExpAtom { c: -3.0, beta: 2.0 }],
                log_exp_atoms: vec![],
            }]
        );
    }

    #[test]
    fn dominance_order() {
        let s = sym("exp(-1*r^1.3333) + 5*r^-2");
        assert_eq!(s.terms().len(), 2);
        assert_eq!(s.terms()[0].p, -2.0);
        assert_eq!(s.terms()[0].coeff, 5.0);
    }

    #[test]
    fn syntax_error_offset() {
        match parse_growth("r^") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_growth("exp(2*r^-1)"),
            Err(Error::Parse { offset: 4, .. })
        ));
        assert!(parse_growth("exp(r^0)").is_err());
    }

    #[test]
    fn comparisons() {
        assert_eq!(
            compare_growth(&sym("exp(-1*r^1.3333333)"), &sym("r^-2")),
            Comparison::ALittleOB
        );
        assert_eq!(
            compare_growth(&sym("20000*r^0.6666667"), &sym("1000000*r^-0.6666667")),
            Comparison::BLittleOA
        );
        assert_eq!(
            compare_growth(&sym("r*(log r)^2"), &sym("r*(log r)^2")),
            Comparison::Theta
        );
        assert_eq!(
            compare_growth(&sym("exp(2*(log r)^1.5)"), &sym("r^100")),
            Comparison::BLittleOA
        );
        assert_eq!(compare_growth(&sym("0"), &sym("r^-5")), Comparison::ALittleOB);
    }

    #[test]
    fn log_inside_exp_becomes_power() {
        assert_eq!(sym("exp(3*(log r))"), sym("r^3"));
        assert_eq!(sym("exp(2)").terms()[0].coeff, 2f64.exp());
    }

    #[test]
    fn round_trip_render() {
        let s = sym("2*r^1.5*exp(-3*r^2 + 4*r) - 0.5*(log r)^-2 + 7*exp(-1*(log r)^2.5)");
        assert_eq!(parse_growth(&s.render()).unwrap(), s);
    }

    #[test]
    fn derivative_is_exact() {
        let s = sym("3*r^2*(log r)^1.5*exp(-0.5*r^1.2 + 2*(log r)^1.7)");
        let d = s.derivative();
        for r in [5.0, 20.0] {
            let h = 1e-5 * r;
            let fd = (s.eval(r + h) - s.eval(r - h)) / (2.0 * h);
            assert!((d.eval(r) - fd).abs() < 1e-7 * fd.abs(), "{} {}", d.eval(r), fd);
        }
    }

    #[test]
    fn integrability() {
        assert!(sym("r^-1.5").is_integrable_at_infinity());
        assert!(!sym("r^-1").is_integrable_at_infinity());
        assert!(sym("r^-1*(log r)^-2").is_integrable_at_infinity());
        assert!(sym("r^50*exp(-0.001*r^0.5)").is_integrable_at_infinity());
        assert!(!sym("r^-50*exp(0.001*(log r)^1.1)").is_integrable_at_infinity());
    }

    #[test]
    fn symbols_of_jets() {
        let s = symbol_of(&FunctionJet3::sinh()).unwrap();
        assert_eq!(s.terms().len(), 2);
        assert_eq!(s.leading().unwrap().coeff, 0.5);
        let h = FunctionJet3::power(2.0).scale(6.0);
        let e = symbol_of(&h).unwrap().exp_of().unwrap();
        assert_eq!(e, sym("exp(6*r^2)"));
        assert!(symbol_of(&crate::funcjet::make_family("loglog", &[]).unwrap()).is_err());
    }
}
