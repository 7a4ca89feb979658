//! Warped cylindrical ends `(r0, inf) x N` with metric `dr^2 + sigma(r)^2 g_N`.
//!
//! The cross-section `N` enters only through its Laplace spectrum and a
//! constant sectional curvature, which is all the mode reduction and the
//! Bishop-O'Neill formulas consume.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::funcjet::{FunctionJet3, LogRatios};
use crate::grid;

/// How the section eigenvalues are generated.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectrumGenerator {
    /// Round unit sphere of dimension `dim`: `lambda_j = j (j + dim - 1)`.
    Sphere { dim: usize },
    /// Flat torus `R^dim / (2 pi Z)^dim`: `lambda = |k|^2`, `k` integral.
    FlatTorus { dim: usize },
    Explicit,
}

/// Eigenvalues of `-Delta_N` with multiplicities, sorted ascending.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionSpectrum {
    pub generator: SpectrumGenerator,
    /// Number of distinct eigenvalues retained.
    pub cutoff: usize,
    pub eigen: Vec<(f64, usize)>,
}

fn binomial(n: i64, k: i64) -> usize {
    if k < 0 || n < k {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

impl SectionSpectrum {
    pub fn sphere(dim: usize, cutoff: usize) -> Result<Self> {
        if dim == 0 || cutoff == 0 {
            return Err(Error::InvalidGeometry(
                "sphere spectrum needs dim >= 1 and cutoff >= 1".into(),
            ));
        }
        let m = dim as i64;
        let eigen = (0..cutoff as i64)
            .map(|j| {
                let lambda = (j * (j + m - 1)) as f64;
                let mult = binomial(m + j, m) - binomial(m + j - 2, m);
                (lambda, mult)
            })
            .collect();
        Ok(SectionSpectrum {
            generator: SpectrumGenerator::Sphere { dim },
            cutoff,
            eigen,
        })
    }

    pub fn flat_torus(dim: usize, cutoff: usize) -> Result<Self> {
        if dim == 0 || cutoff == 0 {
            return Err(Error::InvalidGeometry(
                "torus spectrum needs dim >= 1 and cutoff >= 1".into(),
            ));
        }
        // |k|^2 <= K^2 covers the first `cutoff` distinct values once K^2 >= cutoff
        let bound = ((cutoff as f64).sqrt().ceil() as i64) + 1;
        let mut counts = std::collections::BTreeMap::<u64, usize>::new();
        let mut k = vec![-bound; dim];
        loop {
            let norm: i64 = k.iter().map(|x| x * x).sum();
            *counts.entry(norm as u64).or_default() += 1;
            let mut i = 0;
            loop {
                if i == dim {
                    let eigen: Vec<(f64, usize)> = counts
                        .into_iter()
                        .filter(|(v, _)| (*v as i64) <= bound * bound)
                        .take(cutoff)
                        .map(|(v, m)| (v as f64, m))
                        .collect();
                    return Ok(SectionSpectrum {
                        generator: SpectrumGenerator::FlatTorus { dim },
                        cutoff: eigen.len(),
                        eigen,
                    });
                }
                k[i] += 1;
                if k[i] > bound {
                    k[i] = -bound;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    pub fn explicit(eigen: Vec<(f64, usize)>) -> Result<Self> {
        if eigen.is_empty() || eigen[0].0 != 0.0 {
            return Err(Error::InvalidGeometry(
                "explicit spectrum must start with eigenvalue 0".into(),
            ));
        }
        if eigen.windows(2).any(|w| !(w[0].0 <= w[1].0)) {
            return Err(Error::InvalidGeometry(
                "explicit spectrum must be sorted ascending".into(),
            ));
        }
        if eigen.iter().any(|(l, m)| !l.is_finite() || *m == 0) {
            return Err(Error::InvalidGeometry(
                "eigenvalues must be finite with positive multiplicity".into(),
            ));
        }
        Ok(SectionSpectrum {
            generator: SpectrumGenerator::Explicit,
            cutoff: eigen.len(),
            eigen,
        })
    }

    /// The first `m` distinct eigenvalues.
    pub fn first(&self, m: usize) -> Vec<f64> {
        self.eigen.iter().take(m).map(|(l, _)| *l).collect()
    }
}

#[derive(Clone, Debug)]
pub struct WarpedCylinder {
    pub n: usize,
    pub sigma: FunctionJet3,
    pub r0: f64,
    pub spectrum: SectionSpectrum,
    pub section_curvature: f64,
}

impl WarpedCylinder {
    pub fn new(
        n: usize,
        sigma: FunctionJet3,
        r0: f64,
        spectrum: SectionSpectrum,
        section_curvature: f64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGeometry(format!("dimension must be >= 2, got {n}")));
        }
        if !(r0 >= 0.0) || !r0.is_finite() {
            return Err(Error::InvalidGeometry(format!("r0 must be finite and >= 0, got {r0}")));
        }
        if r0 < sigma.domain_min() {
            return Err(Error::InvalidGeometry(format!(
                "r0 = {r0} lies below the warping function domain ({})",
                sigma.domain_min()
            )));
        }
        let cyl = WarpedCylinder {
            n,
            sigma,
            r0,
            spectrum,
            section_curvature,
        };
        let start = if r0 > 0.0 { r0 } else { 1e-3 };
        for r in grid::geometric(start * (1.0 + 1e-9), start.max(1.0) * 1e3, 64) {
            cyl.log_sigma(r)?;
        }
        Ok(cyl)
    }

    /// Cylinder over the unit sphere `S^(n-1)` keeping `modes` distinct eigenvalues.
    pub fn over_sphere(n: usize, sigma: FunctionJet3, r0: f64, modes: usize) -> Result<Self> {
        let spectrum = SectionSpectrum::sphere(n.saturating_sub(1).max(1), modes)?;
        Self::new(n, sigma, r0, spectrum, 1.0)
    }

    fn check_r(&self, r: f64) -> Result<()> {
        if !(r > self.r0) {
            return Err(Error::Domain { r, min: self.r0 });
        }
        Ok(())
    }

    /// `ln sigma` and `sigma^(k) / sigma` at `r`.
    pub fn log_sigma(&self, r: f64) -> Result<LogRatios> {
        self.sigma.log_ratios(r)
    }

    pub fn dim_factor(&self) -> f64 {
        (self.n - 1) as f64
    }
}

/// Radial mode Laplacian `rho'' + (n-1)(sigma'/sigma) rho' - lambda rho / sigma^2`.
pub fn mode_laplacian(cyl: &WarpedCylinder, rho: [f64; 3], lambda: f64, r: f64) -> Result<f64> {
    cyl.check_r(r)?;
    if !(lambda >= 0.0) {
        return Err(Error::Precondition(format!("eigenvalue must be >= 0, got {lambda}")));
    }
    let s = cyl.log_sigma(r)?;
    let angular = if lambda == 0.0 {
        0.0
    } else {
        lambda * (-2.0 * s.ln_value).exp() * rho[0]
    };
    Ok(rho[2] + cyl.dim_factor() * s.r1 * rho[1] - angular)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Christoffel {
    /// `Gamma^0_ij = radial_coeff * g_ij`, i.e. `-(sigma'/sigma)`.
    pub radial_coeff: f64,
    /// `Gamma^k_0j = mixed_coeff * delta^k_j`, i.e. `sigma'/sigma`.
    pub mixed_coeff: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureData {
    pub r: f64,
    pub sect_radial: f64,
    pub sect_tangential: f64,
    pub ricci_radial: f64,
    pub ricci_tangential: f64,
    pub christoffel: Christoffel,
    /// Coefficient of `(g o g)/2` in `R_i0j0`.
    pub riemann_radial_block: f64,
    /// `(K_N / sigma^2, -(sigma'/sigma)^2)`: the section part and the warping
    /// part of the tangential block, in the normalization of the sectional curvature.
    pub riemann_tangential_block: (f64, f64),
}

/// Bishop-O'Neill curvature of the warped end at radius `r`.
pub fn curvature_at(cyl: &WarpedCylinder, r: f64) -> Result<CurvatureData> {
    cyl.check_r(r)?;
    let s = cyl.log_sigma(r)?;
    let section = cyl.section_curvature * (-2.0 * s.ln_value).exp();
    let warp = -s.r1 * s.r1;
    let sect_radial = -s.r2;
    let sect_tangential = section + warp;
    let m = cyl.dim_factor();
    Ok(CurvatureData {
        r,
        sect_radial,
        sect_tangential,
        ricci_radial: m * sect_radial,
        ricci_tangential: sect_radial + (m - 1.0) * sect_tangential,
        christoffel: Christoffel {
            radial_coeff: -s.r1,
            mixed_coeff: s.r1,
        },
        riemann_radial_block: sect_radial,
        riemann_tangential_block: (section, warp),
    })
}

/// One grid row of an asymptotic scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSample {
    pub r: f64,
    pub value: f64,
    pub running_sup: f64,
}

fn samples_from(rs: &[f64], values: &[f64]) -> Vec<GridSample> {
    let sup = grid::running_sup(values);
    rs.iter()
        .zip(values)
        .zip(sup)
        .map(|((&r, &value), running_sup)| GridSample {
            r,
            value,
            running_sup,
        })
        .collect()
}

/// Whether the running sup moved by less than 1% over the last doubling of `r`.
fn stabilized(samples: &[GridSample]) -> bool {
    let Some(last) = samples.last() else {
        return false;
    };
    let half = last.r / 2.0;
    let before = samples
        .iter()
        .take_while(|s| s.r <= half * (1.0 + 1e-12))
        .last()
        .map(|s| s.running_sup)
        .unwrap_or(samples[0].running_sup);
    let now = last.running_sup;
    (now - before).abs() <= 0.01 * before.abs().max(now.abs()).max(1e-300) || now == before
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthCheck {
    pub estimate: f64,
    pub verdict: bool,
    pub samples: Vec<GridSample>,
}

const PER_DOUBLING: usize = 16;

/// Estimates `kappa` in `|(log sigma)'| <= kappa r`.
///
/// The estimate is the sup over the last doubling `[r_max/2, r_max]`, which is
/// the asymptotic quantity; the verdict asks that the running sup over the
/// whole grid settles.
pub fn check_sigma_growth(cyl: &WarpedCylinder, r_max: f64) -> Result<GrowthCheck> {
    let lo = cyl.r0.max(1.0);
    if !(r_max > lo) {
        return Err(Error::Precondition(format!("r_max must exceed {lo}, got {r_max}")));
    }
    let lo = if cyl.r0 >= 1.0 { lo * (1.0 + 1e-9) } else { lo };
    let rs = grid::per_doubling(lo, r_max, PER_DOUBLING);
    let values = rs
        .iter()
        .map(|&r| Ok(cyl.log_sigma(r)?.r1.abs() / r))
        .collect::<Result<Vec<f64>>>()?;
    let samples = samples_from(&rs, &values);
    let estimate = samples
        .iter()
        .filter(|s| s.r >= r_max / 2.0)
        .map(|s| s.value)
        .fold(0.0, f64::max);
    Ok(GrowthCheck {
        estimate,
        verdict: stabilized(&samples),
        samples,
    })
}

/// Estimates `C` in `Ric >= -C (1 + r^2)`.
pub fn ricci_quadratic_check(cyl: &WarpedCylinder, r_max: f64) -> Result<GrowthCheck> {
    let lo = if cyl.r0 > 0.0 {
        cyl.r0 * (1.0 + 1e-9)
    } else {
        1e-3
    };
    if !(r_max > lo) {
        return Err(Error::Precondition(format!("r_max must exceed {lo}, got {r_max}")));
    }
    let rs = grid::per_doubling(lo, r_max, PER_DOUBLING);
    let values = rs
        .iter()
        .map(|&r| {
            let c = curvature_at(cyl, r)?;
            Ok((-c.ricci_radial).max(-c.ricci_tangential) / (1.0 + r * r))
        })
        .collect::<Result<Vec<f64>>>()?;
    let samples = samples_from(&rs, &values);
    let estimate = samples.last().map(|s| s.running_sup).unwrap_or(0.0).max(0.0);
    Ok(GrowthCheck {
        estimate,
        verdict: stabilized(&samples),
        samples,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffReport {
    pub radius: f64,
    /// `R * sup |grad phi_R|` over `[R, 2R]`.
    pub grad_sup_scaled: f64,
    /// `sup |Delta phi_R|` over `[R, 2R]`.
    pub lap_sup: f64,
    /// Rows `(r, |grad phi_R|, |Delta phi_R|)`.
    pub samples: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CutoffLadder {
    pub reports: Vec<CutoffReport>,
    /// Largest `sup |Delta phi_R|` over the ladder.
    pub fitted_constant: f64,
    /// Largest log-log slope of `sup |Delta phi_R|` between consecutive radii.
    pub max_growth_exponent: f64,
    pub verdict: bool,
}

const CUTOFF_GRID: usize = 401;

fn check_profile(profile: &FunctionJet3) -> Result<()> {
    for t in grid::linear(0.01, 1.0, 50) {
        let v = profile.eval(t)?.value();
        if (v - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "cutoff profile must equal 1 on [0,1]; value {v} at t = {t}"
            )));
        }
    }
    for t in grid::linear(2.0, 3.0, 50) {
        let v = profile.eval(t)?.value();
        if v.abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "cutoff profile must vanish on [2,inf); value {v} at t = {t}"
            )));
        }
    }
    for t in grid::linear(1.0, 2.0, 201) {
        let v = profile.eval(t)?.value();
        if !(-1e-12..=1.0 + 1e-12).contains(&v) {
            return Err(Error::Precondition(format!(
                "cutoff profile must take values in [0,1]; value {v} at t = {t}"
            )));
        }
    }
    Ok(())
}

/// Gradient and Laplacian of `phi_R = Phi(r / R)` on its transition annulus.
pub fn cutoff_family(
    cyl: &WarpedCylinder,
    radius: f64,
    profile: &FunctionJet3,
) -> Result<CutoffReport> {
    if !(radius > cyl.r0) {
        return Err(Error::Precondition(format!(
            "cutoff radius {radius} must exceed r0 = {}",
            cyl.r0
        )));
    }
    check_profile(profile)?;
    let m = cyl.dim_factor();
    let mut samples = Vec::with_capacity(CUTOFF_GRID);
    let mut grad_unit_sup = 0.0f64;
    let mut lap_sup = 0.0f64;
    for t in grid::linear(1.0, 2.0, CUTOFF_GRID) {
        let phi = profile.eval(t)?;
        let r = radius * t;
        let s1 = cyl.log_sigma(r)?.r1;
        let grad = phi.d(1).abs() / radius;
        let lap = (phi.d(2) / (radius * radius) + m * s1 * phi.d(1) / radius).abs();
        grad_unit_sup = grad_unit_sup.max(phi.d(1).abs());
        lap_sup = lap_sup.max(lap);
        samples.push((r, grad, lap));
    }
    Ok(CutoffReport {
        radius,
        grad_sup_scaled: grad_unit_sup,
        lap_sup,
        samples,
    })
}

/// Runs [`cutoff_family`] along a ladder of radii and decides whether
/// `sup |Delta phi_R|` admits an `R`-independent bound.
pub fn cutoff_ladder(
    cyl: &WarpedCylinder,
    radii: &[f64],
    profile: &FunctionJet3,
) -> Result<CutoffLadder> {
    if radii.len() < 2 {
        return Err(Error::Precondition("cutoff ladder needs at least two radii".into()));
    }
    let reports = radii
        .iter()
        .map(|&r| cutoff_family(cyl, r, profile))
        .collect::<Result<Vec<_>>>()?;
    let fitted_constant = reports.iter().map(|c| c.lap_sup).fold(0.0, f64::max);
    let max_growth_exponent = reports
        .windows(2)
        .map(|w| (w[1].lap_sup / w[0].lap_sup).ln() / (w[1].radius / w[0].radius).ln())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(CutoffLadder {
        verdict: max_growth_exponent <= 0.05 && fitted_constant.is_finite(),
        reports,
        fitted_constant,
        max_growth_exponent,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Ingredient {
    pub name: &'static str,
    pub sup: f64,
    pub sup_last_doubling: f64,
    pub bounded: bool,
}

/// Sup scans of the ingredients of `|D Riem|`: curvature components,
/// Christoffel coefficients, `sigma'/sigma` and its derivative.
pub fn riemann_ingredient_scan(cyl: &WarpedCylinder, r_lo: f64, r_hi: f64) -> Result<Vec<Ingredient>> {
    if !(r_lo > cyl.r0) || !(r_hi > 2.0 * r_lo) {
        return Err(Error::Precondition(format!(
            "ingredient scan needs r0 < r_lo and 2 r_lo < r_hi, got [{r_lo}, {r_hi}]"
        )));
    }
    let names = [
        "sigma'/sigma",
        "(sigma'/sigma)'",
        "riemann_radial",
        "riemann_section",
        "riemann_warp",
        "(sigma''/sigma)'",
    ];
    let rs = grid::per_doubling(r_lo, r_hi, PER_DOUBLING);
    let mut rows = Vec::with_capacity(rs.len());
    for &r in &rs {
        let s = cyl.log_sigma(r)?;
        let c = curvature_at(cyl, r)?;
        rows.push([
            s.r1,
            s.r2 - s.r1 * s.r1,
            c.riemann_radial_block,
            c.riemann_tangential_block.0,
            c.riemann_tangential_block.1,
            s.r3 - s.r1 * s.r2,
        ]);
    }
    Ok(names
        .iter()
        .enumerate()
        .map(|(k, &name)| {
            let sup = rows.iter().map(|row| row[k].abs()).fold(0.0, f64::max);
            let sup_last_doubling = rs
                .iter()
                .zip(&rows)
                .filter(|(r, _)| **r >= r_hi / 2.0)
                .map(|(_, row)| row[k].abs())
                .fold(0.0, f64::max);
            let sup_before = rs
                .iter()
                .zip(&rows)
                .filter(|(r, _)| **r < r_hi / 2.0)
                .map(|(_, row)| row[k].abs())
                .fold(0.0, f64::max);
            Ingredient {
                name,
                sup,
                sup_last_doubling,
                bounded: sup.is_finite() && sup_last_doubling <= 1.01 * sup_before + 1e-12,
            }
        })
        .collect())
}
