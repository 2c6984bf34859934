//! Rectangular-waveguide modal parameters and wave-amplitude transmission matrices.
//!
//! Matrices map the waves at the aperture-side port (port 2) onto the waves at the
//! feed-side port (port 1):
//!
//! ```text
//! [b1]   [t11 t12] [a2]
//! [a1] = [t21 t22] [b2]
//! ```
//!
//! where `a` are waves travelling into a port and `b` waves leaving it. With this
//! convention a matching network is the left-to-right product of its sections,
//! feed first, and the reflection at the feed is the bilinear map in [`gamma_in`].
//! Waves are power-normalized, so every lossless reciprocal element has unit
//! determinant.

use std::f64::consts::PI;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const MU0: f64 = 4.0e-7 * PI;

const J: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyPoint {
    pub f: f64,
    pub omega: f64,
    pub k0: f64,
}

impl FrequencyPoint {
    pub fn new(f: f64) -> Result<Self> {
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::invalid("frequency", format!("{f} Hz must be finite and > 0")));
        }
        let omega = 2.0 * PI * f;
        Ok(Self {
            f,
            omega,
            k0: omega / SPEED_OF_LIGHT,
        })
    }
}

/// One uniform piece of rectangular waveguide, filled with a homogeneous dielectric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuideSection {
    pub width_a: f64,
    pub height_b: f64,
    pub length_l: f64,
    pub eps_r: f64,
    pub loss_tangent: f64,
}

impl GuideSection {
    pub fn new(width_a: f64, height_b: f64, length_l: f64, eps_r: f64) -> Result<Self> {
        let sec = Self {
            width_a,
            height_b,
            length_l,
            eps_r,
            loss_tangent: 0.0,
        };
        sec.validate()?;
        Ok(sec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.width_a.is_finite() && self.width_a > 0.0) {
            return Err(Error::invalid("width_a", format!("{} m must be > 0", self.width_a)));
        }
        if !(self.height_b.is_finite() && self.height_b > 0.0) {
            return Err(Error::invalid("height_b", format!("{} m must be > 0", self.height_b)));
        }
        if !(self.length_l.is_finite() && self.length_l >= 0.0) {
            return Err(Error::invalid("length_l", format!("{} m must be >= 0", self.length_l)));
        }
        if !(self.eps_r.is_finite() && self.eps_r >= 1.0) {
            return Err(Error::invalid("eps_r", format!("{} must be >= 1", self.eps_r)));
        }
        if !(self.loss_tangent.is_finite() && self.loss_tangent >= 0.0) {
            return Err(Error::invalid(
                "loss_tangent",
                format!("{} must be >= 0", self.loss_tangent),
            ));
        }
        Ok(())
    }

    pub fn with_length(self, length_l: f64) -> Self {
        Self { length_l, ..self }
    }

    pub fn with_height(self, height_b: f64) -> Self {
        Self { height_b, ..self }
    }

    pub fn with_eps(self, eps_r: f64, loss_tangent: f64) -> Self {
        Self {
            eps_r,
            loss_tangent,
            ..self
        }
    }

    /// Cutoff frequency of the TE_m0 mode in hertz.
    pub fn cutoff_hz(&self, m: u32) -> f64 {
        m as f64 * SPEED_OF_LIGHT / (2.0 * self.width_a * self.eps_r.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalParams {
    pub mode_m: u32,
    /// Propagation constant; real positive above cutoff, negative imaginary below.
    pub beta: Complex64,
    /// Power-voltage impedance.
    pub z_pv: Complex64,
    pub y_char: Complex64,
}

/// Modal parameters of TE_m0 in `sec` at `fp`.
pub fn modal_params(sec: &GuideSection, fp: &FrequencyPoint, m: u32) -> Result<ModalParams> {
    if m == 0 || m % 2 == 0 {
        return Err(Error::invalid("mode", format!("TE{m}0 must have odd positive m")));
    }
    sec.validate()?;
    let kc = m as f64 * PI / sec.width_a;
    let beta = if sec.loss_tangent == 0.0 {
        let arg = sec.eps_r * fp.k0 * fp.k0 - kc * kc;
        if arg == 0.0 {
            return Err(Error::DegenerateMode { mode: m, freq_hz: fp.f });
        }
        if arg > 0.0 {
            Complex64::new(arg.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, -(-arg).sqrt())
        }
    } else {
        let eps = Complex64::new(sec.eps_r, -sec.eps_r * sec.loss_tangent);
        decaying_sqrt(eps * fp.k0 * fp.k0 - kc * kc)
    };
    let z_pv = fp.omega * MU0 / beta * (2.0 * sec.height_b / sec.width_a);
    Ok(ModalParams {
        mode_m: m,
        beta,
        z_pv,
        y_char: ONE / z_pv,
    })
}

/// Square root on the branch Im <= 0, with Re >= 0 when the imaginary part vanishes.
pub(crate) fn decaying_sqrt(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.im > 0.0 || (s.im == 0.0 && s.re < 0.0) {
        -s
    } else {
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionMatrix {
    pub t11: Complex64,
    pub t12: Complex64,
    pub t21: Complex64,
    pub t22: Complex64,
}

impl TransmissionMatrix {
    pub fn new(t11: Complex64, t12: Complex64, t21: Complex64, t22: Complex64) -> Self {
        Self { t11, t12, t21, t22 }
    }

    pub fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub fn det(&self) -> Complex64 {
        self.t11 * self.t22 - self.t12 * self.t21
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        Some(Self::new(self.t22 / d, -self.t12 / d, -self.t21 / d, self.t11 / d))
    }

    pub fn is_finite(&self) -> bool {
        self.t11.is_finite() && self.t12.is_finite() && self.t21.is_finite() && self.t22.is_finite()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        [
            self.t11 - other.t11,
            self.t12 - other.t12,
            self.t21 - other.t21,
            self.t22 - other.t22,
        ]
        .iter()
        .map(|d| d.norm())
        .fold(0.0, f64::max)
    }
}

impl Mul for TransmissionMatrix {
    type Output = TransmissionMatrix;

    fn mul(self, rhs: Self) -> Self {
        Self {
            t11: self.t11 * rhs.t11 + self.t12 * rhs.t21,
            t12: self.t11 * rhs.t12 + self.t12 * rhs.t22,
            t21: self.t21 * rhs.t11 + self.t22 * rhs.t21,
            t22: self.t21 * rhs.t12 + self.t22 * rhs.t22,
        }
    }
}

/// Homogeneous line section carrying the dominant mode.
pub fn t_hw(sec: &GuideSection, fp: &FrequencyPoint) -> Result<TransmissionMatrix> {
    let mp = modal_params(sec, fp, 1)?;
    let phase = J * mp.beta * sec.length_l;
    Ok(TransmissionMatrix::new((-phase).exp(), ZERO, ZERO, phase.exp()))
}

/// Ideal impedance step from a line of impedance `z_left` to one of `z_right`.
pub fn t_interface(z_left: Complex64, z_right: Complex64) -> Result<TransmissionMatrix> {
    let ok = |z: Complex64| z.is_finite() && z.norm() > 0.0;
    if !ok(z_left) || !ok(z_right) {
        return Err(Error::invalid(
            "impedance",
            format!("junction impedances must be nonzero and finite ({z_left}, {z_right})"),
        ));
    }
    let sum = z_left + z_right;
    if sum.norm() == 0.0 {
        return Err(Error::SingularJunction { z_left, z_right });
    }
    // Written through sqrt(z) ratios so that steps compose exactly for any branch.
    let r = z_right.sqrt() / z_left.sqrt();
    let ch = (r + ONE / r) * 0.5;
    let sh = (r - ONE / r) * 0.5;
    Ok(TransmissionMatrix::new(ch, sh, sh, ch))
}

/// Shunt element of normalized admittance `y` across a uniform line.
pub fn t_shunt(y: Complex64) -> TransmissionMatrix {
    TransmissionMatrix::new((2.0 - y) * 0.5, -y * 0.5, y * 0.5, (2.0 + y) * 0.5)
}

pub fn cascade(matrices: &[TransmissionMatrix]) -> Result<TransmissionMatrix> {
    let (first, rest) = matrices.split_first().ok_or(Error::EmptyCascade)?;
    Ok(rest.iter().fold(*first, |acc, m| acc * *m))
}

pub fn gamma_in(t: &TransmissionMatrix, gamma_ap: Complex64) -> Result<Complex64> {
    let den = t.t21 * gamma_ap + t.t22;
    if den.norm() < 1e-30 || !den.is_finite() {
        return Err(Error::SingularNetwork(den.norm()));
    }
    Ok((t.t11 * gamma_ap + t.t12) / den)
}

/// Which height a section of the matching network runs at.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeightRef {
    Antenna,
    B1,
    B2,
    B3,
}

/// Section heights for l1..l5, in feed-to-aperture order.
pub const DEFAULT_LAYOUT: [HeightRef; 5] = [
    HeightRef::Antenna,
    HeightRef::Antenna,
    HeightRef::B1,
    HeightRef::B2,
    HeightRef::B3,
];

/// Index of the air-filled section among l1..l5.
pub const AIR_GAP_SECTION: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkOptions {
    pub layout: [HeightRef; 5],
    /// Add a first-order E-plane step shunt susceptance at every height change.
    pub step_susceptance: bool,
}

impl Default for NetworkOptions {
    fn default() -> Self {
        Self {
            layout: DEFAULT_LAYOUT,
            step_susceptance: false,
        }
    }
}

/// The optimization vector: five lengths and three heights, plus the fixed antenna guide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchingConfig {
    pub l: [f64; 5],
    pub bh: [f64; 3],
    /// Antenna guide; `length_l` is ignored.
    pub antenna: GuideSection,
}

impl MatchingConfig {
    /// Zero-length network at full antenna height; reduces to the identity.
    pub fn degenerate(antenna: GuideSection) -> Self {
        Self {
            l: [0.0; 5],
            bh: [antenna.height_b; 3],
            antenna,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.antenna.validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for (i, &l) in self.l.iter().enumerate() {
            if !(l.is_finite() && l >= 0.0) {
                return Err(Error::InvalidConfig(format!("l{} = {l} m must be >= 0", i + 1)));
            }
        }
        for (i, &b) in self.bh.iter().enumerate() {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::InvalidConfig(format!("b{} = {b} m must be > 0", i + 1)));
            }
            if b > self.antenna.height_b * (1.0 + 1e-12) {
                return Err(Error::InvalidConfig(format!(
                    "b{} = {b} m exceeds the antenna height {} m",
                    i + 1,
                    self.antenna.height_b
                )));
            }
        }
        Ok(())
    }

    fn height(&self, h: HeightRef) -> f64 {
        match h {
            HeightRef::Antenna => self.antenna.height_b,
            HeightRef::B1 => self.bh[0],
            HeightRef::B2 => self.bh[1],
            HeightRef::B3 => self.bh[2],
        }
    }

    /// The five uniform sections in feed-to-aperture order.
    pub fn sections(&self, layout: &[HeightRef; 5]) -> [GuideSection; 5] {
        std::array::from_fn(|i| {
            let sec = self
                .antenna
                .with_length(self.l[i])
                .with_height(self.height(layout[i]));
            if i == AIR_GAP_SECTION {
                sec.with_eps(1.0, 0.0)
            } else {
                sec
            }
        })
    }
}

pub fn build_network(cfg: &MatchingConfig, fp: &FrequencyPoint) -> Result<TransmissionMatrix> {
    build_network_with(cfg, fp, &NetworkOptions::default())
}

/// Assembles `hw1 ad1 hw2 ad2 hw3 es1 hw4 es2 hw5`.
pub fn build_network_with(
    cfg: &MatchingConfig,
    fp: &FrequencyPoint,
    opts: &NetworkOptions,
) -> Result<TransmissionMatrix> {
    cfg.validate()?;
    let sections = cfg.sections(&opts.layout);
    let modes = sections
        .iter()
        .map(|s| modal_params(s, fp, 1))
        .collect::<Result<Vec<_>>>()?;

    let mut factors = Vec::with_capacity(9);
    for i in 0..5 {
        factors.push(t_hw(&sections[i], fp)?);
        if i + 1 < 5 {
            factors.push(junction(
                (&sections[i], &modes[i]),
                (&sections[i + 1], &modes[i + 1]),
                opts.step_susceptance,
            )?);
        }
    }
    cascade(&factors)
}

fn junction(
    left: (&GuideSection, &ModalParams),
    right: (&GuideSection, &ModalParams),
    step_susceptance: bool,
) -> Result<TransmissionMatrix> {
    let step = t_interface(left.1.z_pv, right.1.z_pv)?;
    if !step_susceptance || left.0.height_b == right.0.height_b {
        return Ok(step);
    }
    let left_is_taller = left.0.height_b > right.0.height_b;
    let (tall, tall_mode, short) = if left_is_taller {
        (left.0, left.1, right.0)
    } else {
        (right.0, right.1, left.0)
    };
    let shunt = t_shunt(J * step_susceptance_norm(tall, tall_mode, short.height_b));
    Ok(if left_is_taller {
        shunt * step
    } else {
        step * shunt
    })
}

/// First-order susceptance of an E-plane step, normalized to the taller guide:
/// `B/Y0 = (2b/λg) ln csc(πα/2)` with `α` the height ratio.
fn step_susceptance_norm(tall: &GuideSection, tall_mode: &ModalParams, short_height: f64) -> f64 {
    let alpha = short_height / tall.height_b;
    let lambda_g = 2.0 * PI / tall_mode.beta.norm();
    2.0 * tall.height_b / lambda_g * (1.0 / (PI * alpha / 2.0).sin()).ln()
}
