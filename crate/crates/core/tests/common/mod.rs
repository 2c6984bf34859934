//! Test-only oracles, independent of the library's quadrature and network code.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

pub const C0: f64 = 299_792_458.0;
pub const MU0: f64 = 4.0e-7 * PI;

/// Brute-force half-space admittances `Y_ij` (i <= j, row-major over `modes`).
///
/// First quadrant on a uniform `n × n` midpoint grid over `[0, K]²`, restricted to
/// the disc `kρ <= K`. Cells straddling a region boundary are split into 16 × 16
/// sub-cells. The annulus `|kρ − k| < k/2` around the branch circle is excluded
/// from the grid and integrated in polar coordinates with the `kρ/|kz|` factor
/// integrated exactly per radial cell.
pub fn cartesian_admittances(
    a: f64,
    b: f64,
    freq_hz: f64,
    modes: &[u32],
    k_rho_max: f64,
    n: usize,
) -> Vec<Complex64> {
    let omega = 2.0 * PI * freq_hz;
    let k = omega / C0;
    let big_k = k_rho_max * k;
    let (r_in, r_out) = (0.5 * k, 1.5 * k);
    let npairs = modes.len() * (modes.len() + 1) / 2;

    let smooth = |kx: f64, ky: f64, out: &mut [f64], w: f64| {
        let sy = sinc(0.5 * ky * b) * b;
        let base = w * (k * k - kx * kx) * sy * sy;
        let c: Vec<f64> = modes.iter().map(|&m| mode_ft(kx, a, m)).collect();
        let mut p = 0;
        for i in 0..c.len() {
            for j in i..c.len() {
                out[p] += base * c[i] * c[j];
                p += 1;
            }
        }
    };

    let inside = |r: f64| r <= big_k && !(r > r_in && r < r_out);

    let mut re = vec![0.0; npairs];
    let mut im = vec![0.0; npairs];
    let h = big_k / n as f64;
    let sub = 16;
    for ix in 0..n {
        for iy in 0..n {
            let (x0, y0) = (ix as f64 * h, iy as f64 * h);
            let rmin = (x0 * x0 + y0 * y0).sqrt();
            let rmax = ((x0 + h).powi(2) + (y0 + h).powi(2)).sqrt();
            if rmin > big_k {
                continue;
            }
            let straddles = [r_in, r_out, big_k]
                .iter()
                .any(|&edge| rmin < edge && rmax > edge);
            let (m, hs) = if straddles { (sub, h / sub as f64) } else { (1, h) };
            for sx in 0..m {
                for sy in 0..m {
                    let kx = x0 + (sx as f64 + 0.5) * hs;
                    let ky = y0 + (sy as f64 + 0.5) * hs;
                    let r = (kx * kx + ky * ky).sqrt();
                    if !inside(r) {
                        continue;
                    }
                    let kz2 = k * k - r * r;
                    if kz2 > 0.0 {
                        smooth(kx, ky, &mut re, hs * hs / kz2.sqrt());
                    } else {
                        smooth(kx, ky, &mut im, hs * hs / (-kz2).sqrt());
                    }
                }
            }
        }
    }

    // Annulus: polar cells, smooth part at the cell centre, r/|kz| integrated exactly.
    let nr = 800;
    let nphi = 2000;
    let dr = (r_out - r_in) / nr as f64;
    let dphi = 0.5 * PI / nphi as f64;
    for ir in 0..nr {
        let r0 = r_in + ir as f64 * dr;
        let r1 = r0 + dr;
        let rm = 0.5 * (r0 + r1);
        let (weight, target) = if rm < k {
            ((k * k - r0 * r0).max(0.0).sqrt() - (k * k - r1 * r1).max(0.0).sqrt(), &mut re)
        } else {
            ((r1 * r1 - k * k).max(0.0).sqrt() - (r0 * r0 - k * k).max(0.0).sqrt(), &mut im)
        };
        for ip in 0..nphi {
            let phi = (ip as f64 + 0.5) * dphi;
            smooth(rm * phi.cos(), rm * phi.sin(), target, weight * dphi);
        }
    }

    let pref = 4.0 * (2.0 / (a * b)) / (omega * MU0) / (4.0 * PI * PI);
    re.iter()
        .zip(&im)
        .map(|(r, i)| Complex64::new(pref * r, pref * i))
        .collect()
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// ∫_{-a/2}^{a/2} cos(mπx/a) cos(kx x) dx, evaluated directly from the
/// product-to-sum form.
fn mode_ft(kx: f64, a: f64, m: u32) -> f64 {
    let p = m as f64 * PI / a;
    let half = |q: f64| {
        if q.abs() < 1e-12 {
            0.5 * a
        } else {
            (q * 0.5 * a).sin() / q
        }
    };
    half(p - kx) + half(p + kx)
}

/// TE10 wave admittance of a guide filled with `eps_r`, `β/(ωμ0)`.
pub fn te_admittance(a: f64, eps_r: f64, freq_hz: f64, m: u32) -> Complex64 {
    let omega = 2.0 * PI * freq_hz;
    let k0 = omega / C0;
    let arg = eps_r * k0 * k0 - (m as f64 * PI / a).powi(2);
    let beta = if arg >= 0.0 {
        Complex64::new(arg.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, -(-arg).sqrt())
    };
    beta / (omega * MU0)
}

/// Normalized aperture admittance from an admittance list in (i <= j) order.
pub fn compose_y_ap(
    y: &[Complex64],
    modes: &[u32],
    a: f64,
    eps_r: f64,
    freq_hz: f64,
) -> Complex64 {
    let n = modes.len();
    let idx = |p: usize, q: usize| p * n - p * (p + 1) / 2 + q;
    let y10 = te_admittance(a, eps_r, freq_hz, 1);
    let mut out = y[idx(0, 0)] / y10;
    for p in 1..n {
        let ym1 = y[idx(0, p)];
        let ymm = y[idx(p, p)];
        let ym0 = te_admittance(a, eps_r, freq_hz, modes[p]);
        out -= ym1 * ym1 / (ymm + ym0) / y10;
    }
    out
}

/// Input impedance of a line of impedance `z0` and electrical length `theta`
/// terminated in `zl`.
pub fn line_input_impedance(z0: Complex64, zl: Complex64, theta: Complex64) -> Complex64 {
    let j = Complex64::new(0.0, 1.0);
    let t = theta.tan();
    z0 * (zl + j * z0 * t) / (z0 + j * zl * t)
}
