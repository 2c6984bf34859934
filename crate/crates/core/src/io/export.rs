//! CSV and Touchstone writers. Numbers use Rust's shortest round-trip formatting,
//! lines end in `\n`.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::aperture::ApertureModel;
use crate::error::{Error, Result};
use crate::ga::GenerationRecord;
use crate::io::sweep::{SweepResult, SweepRow};

pub const SWEEP_HEADER: &str = "freq_hz,re,im,mag,mag_db";
pub const HISTORY_HEADER: &str = "generation,best,mean,l1_mm,l2_mm,l3_mm,l4_mm,l5_mm,b1_mm,b2_mm,b3_mm";
pub const APERTURE_HEADER: &str = "freq_hz,y_re,y_im,gamma_mag";

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn sweep_csv(result: &SweepResult) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in &result.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.freq_hz,
            r.gamma.re,
            r.gamma.im,
            r.mag(),
            r.mag_db()
        );
    }
    s
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write_file(path, &sweep_csv(result))
}

pub fn parse_csv(text: &str) -> Result<SweepResult> {
    let mut lines = text.lines();
    match lines.next().map(str::trim) {
        Some(SWEEP_HEADER) => {}
        other => {
            return Err(Error::Format(format!(
                "expected header {SWEEP_HEADER:?}, got {other:?}"
            )))
        }
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(Error::Format(format!("row {}: expected 5 columns", i + 1)));
        }
        let num = |j: usize| -> Result<f64> {
            cols[j]
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("row {}: bad number {:?}", i + 1, cols[j])))
        };
        rows.push(SweepRow {
            freq_hz: num(0)?,
            gamma: Complex64::new(num(1)?, num(2)?),
        });
    }
    Ok(SweepResult { rows })
}

pub fn read_csv(path: &Path) -> Result<SweepResult> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(&text)
}

/// One-port Touchstone text: comments, option line `# GHz S RI R z_ref`, data.
pub fn touchstone(result: &SweepResult, z_ref: f64, comments: &[String]) -> Result<String> {
    if !(z_ref.is_finite() && z_ref > 0.0) {
        return Err(Error::invalid("z_ref", "must be a positive finite impedance"));
    }
    if result.rows.is_empty() {
        return Err(Error::Format("no data rows".into()));
    }
    if result.rows.windows(2).any(|w| !(w[0].freq_hz < w[1].freq_hz)) {
        return Err(Error::Format("frequencies must be strictly increasing".into()));
    }
    let mut s = String::new();
    for c in comments {
        for line in c.lines() {
            let _ = writeln!(s, "! {line}");
        }
    }
    let _ = writeln!(s, "! reference impedance {z_ref} ohm");
    let _ = writeln!(s, "# GHz S RI R {z_ref}");
    for r in &result.rows {
        let _ = writeln!(s, "{} {} {}", r.freq_hz / 1e9, r.gamma.re, r.gamma.im);
    }
    Ok(s)
}

pub fn write_touchstone(result: &SweepResult, path: &Path, z_ref: f64, comments: &[String]) -> Result<()> {
    write_file(path, &touchstone(result, z_ref, comments)?)
}

pub fn history_csv(history: &[GenerationRecord]) -> String {
    let mut s = String::from(HISTORY_HEADER);
    s.push('\n');
    for h in history {
        let _ = write!(s, "{},{},{}", h.generation, h.best, h.mean);
        for v in h.best_config.l.iter().chain(&h.best_config.bh) {
            let _ = write!(s, ",{}", v * 1e3);
        }
        s.push('\n');
    }
    s
}

pub fn write_history(history: &[GenerationRecord], path: &Path) -> Result<()> {
    write_file(path, &history_csv(history))
}

pub fn aperture_csv(model: &ApertureModel) -> String {
    let mut s = String::from(APERTURE_HEADER);
    s.push('\n');
    for ((fp, y), g) in model.grid.iter().zip(&model.y_ap).zip(&model.gamma_ap) {
        let _ = writeln!(s, "{},{},{},{}", fp.f, y.re, y.im, g.norm());
    }
    s
}

pub fn write_aperture_csv(model: &ApertureModel, path: &Path) -> Result<()> {
    write_file(path, &aperture_csv(model))
}
