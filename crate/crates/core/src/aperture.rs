//! Aperture admittance of an open-ended rectangular waveguide radiating into a
//! half-space, by spectral-domain quadrature.
//!
//! The aperture field is expanded in the symmetric TE_m0 modes (odd `m`). The
//! half-space admittance between modes `i` and `j` is
//!
//! ```text
//! Y_ij = (2/ab) (1/ωμ0) (1/4π²) ∫∫ (k² − kx²)/kz · C0²(ky) Ci(kx) Cj(kx) dky dkx
//! ```
//!
//! with `kz = sqrt(k² − kx² − ky²)` on the branch `Im kz <= 0`. The integrand is
//! even in both `kx` and `ky`, so only the first quadrant is integrated, in polar
//! coordinates. Inside the visible circle the substitution `kρ = k sin t` removes
//! the `1/kz` branch point; just outside it `kρ = k cosh u` does the same, and the
//! rest of the evanescent region up to `k_rho_max · k` uses uniform Gauss panels.
//!
//! Higher-order modes are eliminated with the single-step coupling
//! `D_m = −Y_m1 / (Y_mm + Y_m0)`, which gives the normalized admittance
//!
//! ```text
//! y_ap = Y11/Y10 + 2 Σ D_m Y_m1/Y10 + Σ D_m² (Y_mm + Y_m0)/Y10
//! ```
//!
//! Guide admittances are TE wave admittances `β_m/(ωμ0)`, the same normalization
//! the half-space term uses for unit-power mode functions.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::PanelRule;
use crate::waveguide::{modal_params, FrequencyPoint, GuideSection, MU0};

/// Dimensionless guard band around removable singularities.
const GUARD: f64 = 1e-6;
/// Points per Gauss panel in every direction.
const PANEL: usize = 8;
/// Refinement ceiling: the rule is doubled at most this many times.
const MAX_DOUBLINGS: u32 = 5;

/// `b · sin(ky b/2) / (ky b/2)`.
pub fn c0(ky: f64, b: f64) -> f64 {
    let x = 0.5 * ky * b;
    if x.abs() < GUARD {
        b * (1.0 - x * x / 6.0)
    } else {
        b * x.sin() / x
    }
}

/// Fourier transform of `cos(mπx/a)` over the guide width.
pub fn cm(kx: f64, a: f64, m: u32) -> Complex64 {
    Complex64::new(cm_real(kx, a, m), 0.0)
}

/// `2mπa j^(m−1) cos(kx a/2) / ((mπ)² − (kx a)²)`; real for odd `m`.
fn cm_real(kx: f64, a: f64, m: u32) -> f64 {
    let mpi = m as f64 * PI;
    let x = kx * a;
    if (x.abs() - mpi).abs() < GUARD {
        // sin(mπ/2) j^(m−1) = 1 for every odd m.
        return 0.5 * a;
    }
    let sign = if (m / 2) % 2 == 0 { 1.0 } else { -1.0 };
    2.0 * mpi * a * sign * (0.5 * x).cos() / (mpi * mpi - x * x)
}

/// Odd TE_m0 indices retained in the aperture field expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSet(Vec<u32>);

impl ModeSet {
    pub fn new(modes: Vec<u32>) -> Result<Self> {
        if modes.first() != Some(&1) {
            return Err(Error::invalid("modes", "mode set must start with 1"));
        }
        if modes.iter().any(|m| m % 2 == 0) {
            return Err(Error::invalid("modes", format!("all modes must be odd: {modes:?}")));
        }
        if modes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid(
                "modes",
                format!("modes must be strictly increasing: {modes:?}"),
            ));
        }
        Ok(Self(modes))
    }

    pub fn modes(&self) -> &[u32] {
        &self.0
    }
}

impl Default for ModeSet {
    fn default() -> Self {
        Self(vec![1, 3, 5])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Gauss nodes across the visible region (radially and per angular panel group).
    pub nodes_visible: usize,
    /// Radial nodes per decade of `kρ/k` in the evanescent region.
    pub nodes_evanescent: usize,
    /// Truncation radius as a multiple of `k`.
    pub k_rho_max: f64,
    pub rel_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_visible: 32,
            nodes_evanescent: 128,
            k_rho_max: 40.0,
            rel_tol: 1e-3,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.nodes_visible < 8 {
            return Err(Error::invalid("quadrature.nodes_visible", "must be >= 8"));
        }
        if self.nodes_evanescent < 8 {
            return Err(Error::invalid("quadrature.nodes_evanescent", "must be >= 8"));
        }
        if !(self.k_rho_max >= 5.0 && self.k_rho_max.is_finite()) {
            return Err(Error::invalid("quadrature.k_rho_max", "must be >= 5"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 0.1) {
            return Err(Error::invalid("quadrature.rel_tol", "must be in (0, 0.1]"));
        }
        Ok(())
    }

    pub fn doubled(&self) -> Self {
        Self {
            nodes_visible: 2 * self.nodes_visible,
            nodes_evanescent: 2 * self.nodes_evanescent,
            ..*self
        }
    }
}

/// Symmetric half-space admittances `Y_ij` for every pair in a mode list.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix {
    modes: Vec<u32>,
    values: Vec<Complex64>,
}

impl AdmittanceMatrix {
    fn index(&self, i: u32, j: u32) -> Option<usize> {
        let n = self.modes.len();
        let p = self.modes.iter().position(|&m| m == i)?;
        let q = self.modes.iter().position(|&m| m == j)?;
        let (p, q) = if p <= q { (p, q) } else { (q, p) };
        Some(p * n - p * (p + 1) / 2 + q)
    }

    pub fn get(&self, i: u32, j: u32) -> Option<Complex64> {
        self.index(i, j).map(|k| self.values[k])
    }

    pub fn modes(&self) -> &[u32] {
        &self.modes
    }

    fn max_rel_change(&self, other: &Self) -> f64 {
        let scale = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let diff = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }

    fn worst_pair(&self, other: &Self) -> usize {
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .max_by(|(_, (a, b)), (_, (c, d))| (*a - *b).norm().total_cmp(&(*c - *d).norm()))
            .map(|(k, _)| k)
            .unwrap_or(0)
    }
}

/// One fixed-resolution evaluation of the polar rule over the first quadrant.
fn polar_estimate(
    geom: &GuideSection,
    fp: &FrequencyPoint,
    modes: &[u32],
    q: &QuadratureSpec,
) -> AdmittanceMatrix {
    let (a, b) = (geom.width_a, geom.height_b);
    let k = fp.k0;
    let n = modes.len();
    let npairs = n * (n + 1) / 2;

    let radial = PanelRule::new(PANEL);
    let angular = PanelRule::new((q.nodes_visible / 4).max(PANEL / 2));
    let span = a.max(b);

    let mut cms = vec![0.0; n];
    let mut ang = vec![0.0; npairs];
    // Angular integral at radius kρ, accumulated into `ang`.
    let mut angular_sum = |k_rho: f64, ang: &mut [f64]| {
        ang.iter_mut().for_each(|v| *v = 0.0);
        let panels = 1 + (k_rho * span / (2.0 * PI)).ceil() as usize;
        angular.for_each(0.0, 0.5 * PI, panels, |phi, w| {
            let (s, c) = phi.sin_cos();
            let (kx, ky) = (k_rho * c, k_rho * s);
            let c0v = c0(ky, b);
            let base = w * (k * k - kx * kx) * c0v * c0v;
            for (slot, &m) in cms.iter_mut().zip(modes) {
                *slot = cm_real(kx, a, m);
            }
            let mut p = 0;
            for i in 0..n {
                let bi = base * cms[i];
                for j in i..n {
                    ang[p] += bi * cms[j];
                    p += 1;
                }
            }
        });
    };

    let mut visible = vec![0.0; npairs];
    let mut evanescent = vec![0.0; npairs];

    // Visible disc: kρ = k sin t, kρ dkρ / kz = k sin t dt.
    let vis_panels = (q.nodes_visible / PANEL).max(1);
    radial.for_each(0.0, 0.5 * PI, vis_panels, |t, w| {
        angular_sum(k * t.sin(), &mut ang);
        let jac = w * k * t.sin();
        visible.iter_mut().zip(&ang).for_each(|(acc, v)| *acc += jac * v);
    });

    // Evanescent ring near the branch circle: kρ = k cosh u, kρ dkρ / |kz| = k cosh u du.
    let r_max = q.k_rho_max;
    let inner = 2.0_f64.min(r_max);
    let panels_for = |r0: f64, r1: f64| -> usize {
        let nodes = (q.nodes_evanescent as f64 * (r1 / r0).log10()).ceil() as usize;
        nodes.div_ceil(PANEL).max(1)
    };
    radial.for_each(0.0, inner.acosh(), panels_for(1.0, inner), |u, w| {
        angular_sum(k * u.cosh(), &mut ang);
        let jac = w * k * u.cosh();
        evanescent.iter_mut().zip(&ang).for_each(|(acc, v)| *acc += jac * v);
    });

    // Remaining tail, decade by decade, uniform in kρ.
    let mut r0 = inner;
    let mut edge: f64 = 10.0;
    while r0 < r_max {
        let r1 = edge.min(r_max);
        if r1 > r0 {
            radial.for_each(k * r0, k * r1, panels_for(r0, r1), |k_rho, w| {
                angular_sum(k_rho, &mut ang);
                let jac = w * k_rho / (k_rho * k_rho - k * k).sqrt();
                evanescent.iter_mut().zip(&ang).for_each(|(acc, v)| *acc += jac * v);
            });
            r0 = r1;
        }
        edge *= 10.0;
    }

    // Four quadrants; 1/kz = j/|kz| outside the visible circle.
    let pref = 4.0 * (2.0 / (a * b)) / (fp.omega * MU0) / (4.0 * PI * PI);
    let values = visible
        .iter()
        .zip(&evanescent)
        .map(|(v, e)| Complex64::new(pref * v, pref * e))
        .collect();
    AdmittanceMatrix {
        modes: modes.to_vec(),
        values,
    }
}

/// Half-space admittances for every mode pair, refined by node doubling until
/// successive estimates agree to `q.rel_tol`.
pub fn admittance_matrix(
    geom: &GuideSection,
    fp: &FrequencyPoint,
    modes: &[u32],
    q: &QuadratureSpec,
) -> Result<AdmittanceMatrix> {
    geom.validate()?;
    q.validate()?;
    if modes.is_empty() || modes.iter().any(|m| m % 2 == 0) {
        return Err(Error::invalid("modes", format!("need odd modes, got {modes:?}")));
    }
    let mut spec = *q;
    let mut prev = polar_estimate(geom, fp, modes, &spec);
    for _ in 0..MAX_DOUBLINGS {
        spec = spec.doubled();
        let next = polar_estimate(geom, fp, modes, &spec);
        if next.max_rel_change(&prev) <= q.rel_tol {
            return Ok(next);
        }
        prev = next;
    }
    let last = polar_estimate(geom, fp, modes, &spec.doubled());
    let k = last.worst_pair(&prev);
    Err(Error::QuadratureFailure {
        previous: prev.values[k],
        last: last.values[k],
    })
}

pub fn mutual_admittance(
    i: u32,
    j: u32,
    geom: &GuideSection,
    fp: &FrequencyPoint,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    let modes = if i == j { vec![i] } else { vec![i.min(j), i.max(j)] };
    let y = admittance_matrix(geom, fp, &modes, q)?;
    Ok(y.get(i, j).expect("pair present by construction"))
}

/// TE_m0 wave admittance `β_m/(ωμ0)` of the aperture guide.
pub fn guide_mode_admittance(geom: &GuideSection, fp: &FrequencyPoint, m: u32) -> Result<Complex64> {
    let mp = modal_params(geom, fp, m)?;
    Ok(mp.y_char * (2.0 * geom.height_b / geom.width_a))
}

pub fn mode_coupling_dm(y_m1: Complex64, y_mm: Complex64, y_m0: Complex64) -> Result<Complex64> {
    let den = y_mm + y_m0;
    if den.norm() == 0.0 {
        return Err(Error::DegenerateResonance);
    }
    Ok(-y_m1 / den)
}

/// Normalized aperture admittance seen by the dominant mode.
pub fn aperture_admittance(
    geom: &GuideSection,
    fp: &FrequencyPoint,
    modes: &ModeSet,
    q: &QuadratureSpec,
) -> Result<Complex64> {
    let cutoff_hz = geom.cutoff_hz(1);
    if fp.f <= cutoff_hz {
        return Err(Error::BelowCutoff {
            freq_hz: fp.f,
            cutoff_hz,
        });
    }
    let y = admittance_matrix(geom, fp, modes.modes(), q)?;
    let y10 = guide_mode_admittance(geom, fp, 1)?;
    let y11 = y.get(1, 1).expect("mode 1 is always present");

    let mut y_ap = y11 / y10;
    let mut cross = Complex64::new(0.0, 0.0);
    let mut self_terms = Complex64::new(0.0, 0.0);
    for &m in &modes.modes()[1..] {
        let y_m1 = y.get(m, 1).expect("mode present");
        let y_mm = y.get(m, m).expect("mode present");
        let y_m0 = guide_mode_admittance(geom, fp, m)?;
        let d = mode_coupling_dm(y_m1, y_mm, y_m0)?;
        cross += d * y_m1 / y10;
        self_terms += d * d * (y_mm / y10 + y_m0 / y10);
    }
    if modes.modes().len() > 1 {
        y_ap += 2.0 * cross + self_terms;
    }
    Ok(y_ap)
}

pub fn aperture_reflection(y_ap: Complex64) -> Result<Complex64> {
    let den = 1.0 + y_ap;
    if den.norm() == 0.0 {
        return Err(Error::AperturePole);
    }
    Ok((1.0 - y_ap) / den)
}

/// Tabulated aperture admittance and reflection on a frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ApertureModel {
    pub geometry: GuideSection,
    pub grid: Vec<FrequencyPoint>,
    pub y_ap: Vec<Complex64>,
    pub gamma_ap: Vec<Complex64>,
}

impl ApertureModel {
    /// A model with prescribed reflections, bypassing the quadrature.
    pub fn from_reflections(
        geometry: GuideSection,
        grid: Vec<FrequencyPoint>,
        gamma_ap: Vec<Complex64>,
    ) -> Result<Self> {
        if grid.len() != gamma_ap.len() {
            return Err(Error::invalid("gamma_ap", "one value per grid point required"));
        }
        let y_ap = gamma_ap
            .iter()
            .map(|g| (1.0 - g) / (1.0 + g))
            .collect();
        Ok(Self {
            geometry,
            grid,
            y_ap,
            gamma_ap,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

pub fn build_aperture_model(
    geom: &GuideSection,
    grid: &[FrequencyPoint],
    modes: &ModeSet,
    q: &QuadratureSpec,
) -> Result<ApertureModel> {
    let y_ap = grid
        .par_iter()
        .map(|fp| aperture_admittance(geom, fp, modes, q).map_err(|e| e.at_frequency(fp.f)))
        .collect::<Result<Vec<_>>>()?;
    let gamma_ap = y_ap
        .iter()
        .zip(grid)
        .map(|(y, fp)| aperture_reflection(*y).map_err(|e| e.at_frequency(fp.f)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ApertureModel {
        geometry: *geom,
        grid: grid.to_vec(),
        y_ap,
        gamma_ap,
    })
}
