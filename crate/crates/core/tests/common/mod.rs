#![allow(dead_code)]

use carleman_core::funcjet::{FunctionJet3, Jet};
use carleman_core::regimes::{compare_growth, AsymptoticSymbol, CaseId, CaseParams, Comparison, CorollaryCase};
use carleman_core::weights::CarlemanWeights;
use proptest::prelude::*;

/// Sampling interval for each case parameter, kept inside the stated range.
pub fn param_interval(id: CaseId) -> (f64, f64) {
    match id {
        CaseId::EuA => (0.2, 2.0),
        CaseId::EuB => (1.1, 3.0),
        CaseId::EuC => (2.1, 4.0),
        CaseId::HypA => (1.0, 2.0),
        CaseId::HypB => (2.1, 4.0),
        CaseId::ExA => (0.1, 0.9),
        CaseId::ExB => (0.2, 2.0),
    }
}

pub fn case_strategy() -> impl Strategy<Value = (CaseId, f64, usize)> {
    (0..CaseId::ALL.len(), 0.0..=1.0f64, 2usize..=6).prop_map(|(i, u, n)| {
        let id = CaseId::ALL[i];
        let (lo, hi) = param_interval(id);
        (id, lo + u * (hi - lo), n)
    })
}

/// A registry case at a random `tau` and radius, or `None` when the draw
/// leaves the range of `f64`.
pub fn draw_weights(id: CaseId, p: f64, n: usize, tau_exp: f64, r_exp: f64) -> Option<(CorollaryCase, CarlemanWeights, f64)> {
    let case = CorollaryCase::build(id, CaseParams::new(p, n)).ok()?;
    let tau = 10f64.powf(tau_exp);
    let w = case.family.at(tau).ok()?;
    let floor = 2.0f64.max(1.05 * w.domain_min());
    let r = floor * 10f64.powf(r_exp);
    let ls = w.cyl.log_sigma(r).ok()?;
    if ls.ln_value.is_nan() || ls.ln_value.abs() >= 300.0 {
        return None;
    }
    w.at(r).ok()?;
    Some((case, w, r))
}

fn shift(j: Jet) -> Jet {
    Jet([j.0[1], j.0[2], j.0[3], 0.0])
}

/// `A = F^3 - F (sigma^m F)' / sigma^m` by forward-mode products on the
/// scaled warping function; the scale cancels in the ratio.
pub fn a_oracle(w: &CarlemanWeights, r: f64) -> (f64, f64) {
    let m = (w.cyl.n - 1) as f64;
    let s = w.cyl.sigma.eval_scaled(r).unwrap().jet;
    let h = w.h.eval(r).unwrap();
    let g = w.g.eval(r).unwrap();
    let f = (shift(h) + shift(s.ln()).scale(m) - shift(g)).scale(0.5);
    let sm = s.powf(m);
    let prod = sm * f;
    let fv = f.value();
    let second = fv * prod.d(1) / sm.value();
    (fv * fv * fv - second, (fv * fv * fv).abs().max(second.abs()))
}

/// Richardson-extrapolated central difference of `g` at `r`.
pub fn richardson<G: Fn(f64) -> f64>(g: G, r: f64, h: f64) -> f64 {
    let d = |h: f64| (g(r + h) - g(r - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// Largest scaled mismatch between `d^{k+1}` and the difference quotient of `d^k`.
pub fn jet_fd_mismatch(f: &FunctionJet3, r: f64) -> f64 {
    let mut worst = 0.0f64;
    let j = f.eval(r).unwrap();
    for k in 0..3 {
        let rate = (j.d(k + 1) / j.d(k)).abs();
        let h = 1e-3 * r.min(1.0) / (1.0 + if rate.is_finite() { rate } else { 0.0 });
        let fd = richardson(|x| f.eval(x).unwrap().d(k), r, h);
        let scale = j.d(k + 1).abs().max(j.d(k).abs() / r).max(1e-300);
        worst = worst.max((fd - j.d(k + 1)).abs() / scale);
    }
    worst
}

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        (-40i32..=40).prop_map(|k| k as f64 / 8.0),
        -1e3..1e3f64,
        (-6i32..6, 1.0..10.0f64).prop_map(|(e, m)| m * 10f64.powi(e)),
    ]
}

fn positive() -> impl Strategy<Value = f64> {
    prop_oneof![(1i32..=24).prop_map(|k| k as f64 / 8.0), 0.01..5.0f64]
}

fn gamma() -> impl Strategy<Value = f64> {
    prop_oneof![(9i32..=24).prop_map(|k| k as f64 / 8.0), 1.01..4.0f64]
}

fn term_text() -> impl Strategy<Value = String> {
    (
        number().prop_filter("nonzero", |c| *c != 0.0),
        prop::option::of(number()),
        prop::option::of(number()),
        prop::collection::vec((number(), positive()), 0..3),
        prop::option::of((number(), gamma())),
    )
        .prop_map(|(c, p, q, atoms, logatom)| {
            let mut s = format!("{c:?}");
            if let Some(p) = p {
                s += &format!("*r^{p:?}");
            }
            if let Some(q) = q {
                s += &format!("*(log r)^{q:?}");
            }
            let mut inner: Vec<String> = atoms.iter().map(|(a, b)| format!("{a:?}*r^{b:?}")).collect();
            if let Some((d, g)) = logatom {
                inner.push(format!("{d:?}*(log r)^{g:?}"));
            }
            if !inner.is_empty() {
                s += &format!("*exp({})", inner.join(" + "));
            }
            s
        })
}

/// Grammar-valid growth expressions with one to four terms.
pub fn growth_text() -> impl Strategy<Value = String> {
    prop::collection::vec(term_text(), 1..5).prop_map(|ts| ts.join(" + "))
}

fn flip(c: Comparison) -> Comparison {
    match c {
        Comparison::ALittleOB => Comparison::BLittleOA,
        Comparison::BLittleOA => Comparison::ALittleOB,
        other => other,
    }
}

fn rank(c: Comparison) -> i32 {
    match c {
        Comparison::ALittleOB => -1,
        Comparison::Theta => 0,
        Comparison::BLittleOA => 1,
        Comparison::Incomparable => 99,
    }
}

/// Reflexivity, antisymmetry and transitivity of the growth preorder.
pub fn preorder_laws(a: &AsymptoticSymbol, b: &AsymptoticSymbol, c: &AsymptoticSymbol) -> Result<(), String> {
    for x in [a, b, c] {
        if compare_growth(x, x) != Comparison::Theta {
            return Err(format!("{x} is not Theta of itself"));
        }
    }
    let (ab, bc, ac) = (compare_growth(a, b), compare_growth(b, c), compare_growth(a, c));
    if compare_growth(b, a) != flip(ab) {
        return Err(format!("antisymmetry fails for {a} vs {b}"));
    }
    if [ab, bc, ac].contains(&Comparison::Incomparable) {
        return Err("incomparable verdict inside the grammar".into());
    }
    let (x, y, z) = (rank(ab), rank(bc), rank(ac));
    if x <= 0 && y <= 0 && z != x.min(y) {
        return Err(format!("transitivity fails: a~b {ab:?}, b~c {bc:?}, a~c {ac:?}"));
    }
    if x >= 0 && y >= 0 && z != x.max(y) {
        return Err(format!("transitivity fails: a~b {ab:?}, b~c {bc:?}, a~c {ac:?}"));
    }
    Ok(())
}
