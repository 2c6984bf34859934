use num_complex::Complex64;

use crate::aperture::{build_aperture_model, ApertureModel};
use crate::error::{Error, Result};
use crate::io::config::RunConfig;
use crate::waveguide::{build_network_with, gamma_in, FrequencyPoint, MatchingConfig, NetworkOptions};

/// Lowest value reported in the dB column.
pub const DB_FLOOR: f64 = -200.0;

/// Relative offset applied to grid points that land exactly on a cutoff.
const CUTOFF_NUDGE: f64 = 1e-9;

/// Uniform grid including both edges; points exactly on a cutoff are nudged up.
pub fn frequency_grid(f_start: f64, f_stop: f64, n: usize, cutoffs: &[f64]) -> Result<Vec<FrequencyPoint>> {
    if n < 2 {
        return Err(Error::invalid("band.points", "need at least 2 points"));
    }
    if !(f_start < f_stop) {
        return Err(Error::invalid("band", "need start < stop"));
    }
    let step = (f_stop - f_start) / (n - 1) as f64;
    (0..n)
        .map(|i| {
            let mut f = if i == n - 1 { f_stop } else { f_start + step * i as f64 };
            if cutoffs.contains(&f) {
                f *= 1.0 + CUTOFF_NUDGE;
            }
            FrequencyPoint::new(f)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub freq_hz: f64,
    pub gamma: Complex64,
}

impl SweepRow {
    pub fn mag(&self) -> f64 {
        self.gamma.norm()
    }

    pub fn mag_db(&self) -> f64 {
        let m = self.mag();
        if m > 0.0 {
            (20.0 * m.log10()).max(DB_FLOOR)
        } else {
            DB_FLOOR
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn max_mag(&self) -> f64 {
        self.rows.iter().map(SweepRow::mag).fold(0.0, f64::max)
    }
}

impl RunConfig {
    pub fn grid(&self) -> Result<Vec<FrequencyPoint>> {
        frequency_grid(self.f_start, self.f_stop, self.n_points, &self.cutoffs())
    }

    pub fn aperture_model(&self) -> Result<ApertureModel> {
        build_aperture_model(&self.antenna, &self.grid()?, &self.modes, &self.quadrature)
    }
}

/// `Γ_in` of `matching` (or the bare aperture when `None`) on a precomputed model.
pub fn sweep_model(
    model: &ApertureModel,
    matching: Option<&MatchingConfig>,
    network: &NetworkOptions,
) -> Result<SweepResult> {
    let rows = model
        .grid
        .iter()
        .zip(&model.gamma_ap)
        .map(|(fp, g_ap)| {
            let gamma = match matching {
                Some(cfg) => {
                    let t = build_network_with(cfg, fp, network).map_err(|e| e.at_frequency(fp.f))?;
                    gamma_in(&t, *g_ap).map_err(|e| e.at_frequency(fp.f))?
                }
                None => *g_ap,
            };
            Ok(SweepRow { freq_hz: fp.f, gamma })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

pub fn sweep(cfg: &RunConfig, matching: Option<&MatchingConfig>) -> Result<SweepResult> {
    if let Some(m) = matching {
        m.validate()?;
    }
    sweep_model(&cfg.aperture_model()?, matching, &cfg.network)
}
