//! Flat `key = value` run configuration.
//!
//! Lengths are given in millimeters and frequencies in gigahertz; both are
//! converted to SI here and nowhere else. Lines starting with `#` and blank lines
//! are ignored; a `#` after a value starts a trailing comment.
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `antenna.a_mm`, `antenna.b_mm` | guide width and feed height | required |
//! | `antenna.eps_r` | relative permittivity of the fill | required |
//! | `antenna.loss_tangent` | dielectric loss tangent | 0 |
//! | `band.start_ghz`, `band.stop_ghz` | band edges | required (or center/span) |
//! | `band.center_ghz`, `band.span_ghz` | alternative band form | |
//! | `band.points` | grid size, inclusive of both edges | 21 |
//! | `aperture.modes` | odd TE_m0 modes, comma separated | 1,3,5 |
//! | `quadrature.*` | `nodes_visible`, `nodes_evanescent`, `k_rho_max`, `rel_tol` | 32, 128, 40, 1e-3 |
//! | `bounds.l1_mm` … `bounds.b3_mm` | `lower, upper` per parameter | 0,15 / 1,b |
//! | `ga.*` | `population`, `generations`, `crossover_rate`, `mutation_rate`, `elite_count`, `tournament_size`, `seed`, `stagnation_window`, `workers`, `coding`, `aggregator` | see [`GaParams`] |
//! | `network.step_susceptance` | E-plane step susceptance correction | false |
//! | `network.layout` | heights of l1..l5 (`antenna`, `b1`, `b2`, `b3`) | antenna,antenna,b1,b2,b3 |
//! | `matching.lengths_mm`, `matching.heights_mm` | explicit network for `sweep` | none |
//! | `output.sweep_csv`, `output.touchstone`, `output.history`, `output.aperture_csv` | output files | none |
//! | `touchstone.z_ref_ohm` | reference impedance written to `.s1p` | TE10 impedance at band center |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::aperture::{ModeSet, QuadratureSpec};
use crate::error::{Error, Result};
use crate::ga::{Aggregator, GaParams, GeneCoding, ParameterBounds, PARAM_NAMES};
use crate::waveguide::{
    modal_params, FrequencyPoint, GuideSection, HeightRef, MatchingConfig, NetworkOptions,
};

/// Environment variable naming the directory searched for relative config paths.
pub const CONFIG_DIR_ENV: &str = "MLAMATCH_CONFIG_DIR";

pub const DEFAULT_POINTS: usize = 21;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputPaths {
    pub sweep_csv: Option<PathBuf>,
    pub touchstone: Option<PathBuf>,
    pub history: Option<PathBuf>,
    pub aperture_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Antenna guide (`length_l` unused).
    pub antenna: GuideSection,
    pub f_start: f64,
    pub f_stop: f64,
    pub n_points: usize,
    pub modes: ModeSet,
    pub quadrature: QuadratureSpec,
    pub bounds: ParameterBounds,
    pub ga: GaParams,
    pub coding: GeneCoding,
    pub aggregator: Aggregator,
    pub network: NetworkOptions,
    pub matching: Option<([f64; 5], [f64; 3])>,
    pub z_ref: Option<f64>,
    pub outputs: OutputPaths,
}

impl RunConfig {
    pub fn band_center(&self) -> f64 {
        0.5 * (self.f_start + self.f_stop)
    }

    /// Explicit matching network from the `matching.*` keys, if present.
    pub fn matching_config(&self) -> Option<MatchingConfig> {
        self.matching.map(|(l, bh)| MatchingConfig {
            l,
            bh,
            antenna: self.antenna,
        })
    }

    /// Cutoff frequencies a sweep grid must avoid landing on exactly.
    pub fn cutoffs(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .modes
            .modes()
            .iter()
            .map(|&m| self.antenna.cutoff_hz(m))
            .collect();
        out.push(self.antenna.with_eps(1.0, 0.0).cutoff_hz(1));
        out
    }

    /// TE10 power-voltage impedance of the feed guide at band center.
    pub fn feed_impedance(&self) -> Result<f64> {
        let fp = FrequencyPoint::new(self.band_center())?;
        Ok(modal_params(&self.antenna, &fp, 1)?.z_pv.re)
    }

    pub fn validate(&self) -> Result<()> {
        self.antenna.validate()?;
        if !(self.f_start.is_finite() && self.f_stop.is_finite() && self.f_start < self.f_stop) {
            return Err(Error::invalid(
                "band",
                format!("need start < stop, got {} .. {} Hz", self.f_start, self.f_stop),
            ));
        }
        if self.n_points < 2 {
            return Err(Error::invalid("band.points", "need at least 2 points"));
        }
        let cutoff = self.antenna.cutoff_hz(1);
        if self.f_start <= cutoff {
            return Err(Error::invalid(
                "band.start_ghz",
                format!(
                    "{} GHz is not above the TE10 cutoff {} GHz of the antenna guide",
                    self.f_start / 1e9,
                    cutoff / 1e9
                ),
            ));
        }
        self.quadrature.validate()?;
        self.bounds.validate(&self.antenna)?;
        self.ga.validate()?;
        if let Some(cfg) = self.matching_config() {
            cfg.validate()?;
        }
        if let Some(z) = self.z_ref {
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::invalid("touchstone.z_ref_ohm", "must be > 0"));
            }
        }
        let o = &self.outputs;
        for (key, path) in [
            ("output.sweep_csv", &o.sweep_csv),
            ("output.touchstone", &o.touchstone),
            ("output.history", &o.history),
            ("output.aperture_csv", &o.aperture_csv),
        ] {
            if let Some(p) = path {
                check_writable(key, p)?;
            }
        }
        Ok(())
    }

    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("antenna.a_mm", fmt_from_si(self.antenna.width_a, Unit::Mm));
        kv("antenna.b_mm", fmt_from_si(self.antenna.height_b, Unit::Mm));
        kv("antenna.eps_r", format!("{}", self.antenna.eps_r));
        kv("antenna.loss_tangent", format!("{}", self.antenna.loss_tangent));
        kv("band.start_ghz", fmt_from_si(self.f_start, Unit::Ghz));
        kv("band.stop_ghz", fmt_from_si(self.f_stop, Unit::Ghz));
        kv("band.points", self.n_points.to_string());
        kv("aperture.modes", join(self.modes.modes().iter().map(|m| m.to_string())));
        let q = &self.quadrature;
        kv("quadrature.nodes_visible", q.nodes_visible.to_string());
        kv("quadrature.nodes_evanescent", q.nodes_evanescent.to_string());
        kv("quadrature.k_rho_max", format!("{}", q.k_rho_max));
        kv("quadrature.rel_tol", format!("{}", q.rel_tol));
        for (name, (lo, hi)) in PARAM_NAMES.iter().zip(self.bounds.ranges) {
            kv(
                &format!("bounds.{name}_mm"),
                format!("{}, {}", fmt_from_si(lo, Unit::Mm), fmt_from_si(hi, Unit::Mm)),
            );
        }
        let g = &self.ga;
        kv("ga.population", g.population_m.to_string());
        kv("ga.generations", g.generations_max.to_string());
        kv("ga.crossover_rate", format!("{}", g.crossover_rate));
        kv("ga.mutation_rate", format!("{}", g.mutation_rate));
        kv("ga.elite_count", g.elite_count.to_string());
        kv("ga.tournament_size", g.tournament_size.to_string());
        kv("ga.seed", g.seed.to_string());
        kv("ga.stagnation_window", g.stagnation_window.to_string());
        kv("ga.workers", g.workers.to_string());
        kv(
            "ga.coding",
            match self.coding {
                GeneCoding::Binary => "binary".into(),
                GeneCoding::Gray => "gray".into(),
            },
        );
        kv("ga.aggregator", self.aggregator.as_str().into());
        kv("network.step_susceptance", self.network.step_susceptance.to_string());
        kv(
            "network.layout",
            join(self.network.layout.iter().map(|h| {
                match h {
                    HeightRef::Antenna => "antenna",
                    HeightRef::B1 => "b1",
                    HeightRef::B2 => "b2",
                    HeightRef::B3 => "b3",
                }
                .to_string()
            })),
        );
        if let Some((l, bh)) = &self.matching {
            kv("matching.lengths_mm", join(l.iter().map(|v| fmt_from_si(*v, Unit::Mm))));
            kv("matching.heights_mm", join(bh.iter().map(|v| fmt_from_si(*v, Unit::Mm))));
        }
        if let Some(z) = self.z_ref {
            kv("touchstone.z_ref_ohm", format!("{z}"));
        }
        let o = &self.outputs;
        for (key, path) in [
            ("output.sweep_csv", &o.sweep_csv),
            ("output.touchstone", &o.touchstone),
            ("output.history", &o.history),
            ("output.aperture_csv", &o.aperture_csv),
        ] {
            if let Some(p) = path {
                kv(key, p.display().to_string());
            }
        }
        s
    }
}

fn join(items: impl Iterator<Item = String>) -> String {
    items.collect::<Vec<_>>().join(", ")
}

fn check_writable(key: &'static str, path: &Path) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(Error::invalid(
            key,
            format!("directory {} does not exist", parent.display()),
        ));
    }
    if path.is_dir() {
        return Err(Error::invalid(key, format!("{} is a directory", path.display())));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Unit {
    Mm,
    Ghz,
}

fn to_si(x: f64, unit: Unit) -> f64 {
    match unit {
        Unit::Mm => x / 1000.0,
        Unit::Ghz => x * 1e9,
    }
}

/// Shortest decimal in boundary units that converts back to exactly `v`.
fn fmt_from_si(v: f64, unit: Unit) -> String {
    let guess = match unit {
        Unit::Mm => v * 1000.0,
        Unit::Ghz => v / 1e9,
    };
    let mut candidates = vec![guess];
    let (mut up, mut down) = (guess, guess);
    for _ in 0..4 {
        up = up.next_up();
        down = down.next_down();
        candidates.push(up);
        candidates.push(down);
    }
    let best = candidates
        .into_iter()
        .find(|c| to_si(*c, unit) == v)
        .unwrap_or(guess);
    format!("{best}")
}

/// Resolves `path` against [`CONFIG_DIR_ENV`] when it is relative and absent.
pub fn resolve_config_path(path: &Path) -> PathBuf {
    if path.is_relative() && !path.exists() {
        if let Some(dir) = std::env::var_os(CONFIG_DIR_ENV) {
            let candidate = Path::new(&dir).join(path);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    path.to_path_buf()
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let path = resolve_config_path(path);
    let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    parse_config(&text).map_err(|e| Error::Config {
        path,
        message: e.to_string(),
    })
}

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key)
    }

    fn required(&mut self, key: &'static str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| Error::invalid(key, "missing mandatory key"))
    }

    fn f64_or(&mut self, key: &'static str, default: f64) -> Result<f64> {
        self.take(key).map_or(Ok(default), |v| parse_f64(key, &v))
    }

    fn usize_or(&mut self, key: &'static str, default: usize) -> Result<usize> {
        self.take(key).map_or(Ok(default), |v| {
            v.parse()
                .map_err(|_| Error::invalid(key, format!("expected a non-negative integer, got {v:?}")))
        })
    }
}

fn parse_f64(key: &'static str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::invalid(key, format!("expected a number, got {v:?}")))?;
    if !x.is_finite() {
        return Err(Error::invalid(key, "must be finite"));
    }
    Ok(x)
}

fn parse_list(key: &'static str, v: &str, n: usize) -> Result<Vec<f64>> {
    let items = v
        .split(',')
        .map(|s| parse_f64(key, s.trim()))
        .collect::<Result<Vec<_>>>()?;
    if items.len() != n {
        return Err(Error::invalid(key, format!("expected {n} values, got {}", items.len())));
    }
    Ok(items)
}

fn parse_bool(key: &'static str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::invalid(key, format!("expected true or false, got {v:?}"))),
    }
}

const BOUND_KEYS: [&str; 8] = [
    "bounds.l1_mm",
    "bounds.l2_mm",
    "bounds.l3_mm",
    "bounds.l4_mm",
    "bounds.l5_mm",
    "bounds.b1_mm",
    "bounds.b2_mm",
    "bounds.b3_mm",
];

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Format(format!("line {}: expected key = value, got {raw:?}", lineno + 1))
        })?;
        let k = k.trim().to_string();
        if map.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Format(format!("line {}: duplicate key {k}", lineno + 1)));
        }
    }
    let mut e = Entries(map);

    let a = to_si(parse_f64("antenna.a_mm", &e.required("antenna.a_mm")?)?, Unit::Mm);
    let b = to_si(parse_f64("antenna.b_mm", &e.required("antenna.b_mm")?)?, Unit::Mm);
    let eps_r = parse_f64("antenna.eps_r", &e.required("antenna.eps_r")?)?;
    let loss_tangent = e.f64_or("antenna.loss_tangent", 0.0)?;
    let antenna = GuideSection {
        width_a: a,
        height_b: b,
        length_l: 0.0,
        eps_r,
        loss_tangent,
    };
    antenna.validate()?;

    let (f_start, f_stop) = match (
        e.take("band.start_ghz"),
        e.take("band.stop_ghz"),
        e.take("band.center_ghz"),
        e.take("band.span_ghz"),
    ) {
        (Some(s), Some(t), None, None) => (
            to_si(parse_f64("band.start_ghz", &s)?, Unit::Ghz),
            to_si(parse_f64("band.stop_ghz", &t)?, Unit::Ghz),
        ),
        (None, None, Some(c), Some(w)) => {
            let c = parse_f64("band.center_ghz", &c)?;
            let w = parse_f64("band.span_ghz", &w)?;
            (to_si(c - 0.5 * w, Unit::Ghz), to_si(c + 0.5 * w, Unit::Ghz))
        }
        _ => {
            return Err(Error::invalid(
                "band",
                "give either band.start_ghz and band.stop_ghz, or band.center_ghz and band.span_ghz",
            ))
        }
    };
    let n_points = e.usize_or("band.points", DEFAULT_POINTS)?;

    let modes = match e.take("aperture.modes") {
        Some(v) => ModeSet::new(
            v.split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::invalid("aperture.modes", format!("bad mode {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?,
        )?,
        None => ModeSet::default(),
    };

    let qd = QuadratureSpec::default();
    let quadrature = QuadratureSpec {
        nodes_visible: e.usize_or("quadrature.nodes_visible", qd.nodes_visible)?,
        nodes_evanescent: e.usize_or("quadrature.nodes_evanescent", qd.nodes_evanescent)?,
        k_rho_max: e.f64_or("quadrature.k_rho_max", qd.k_rho_max)?,
        rel_tol: e.f64_or("quadrature.rel_tol", qd.rel_tol)?,
    };

    let mut bounds = ParameterBounds::default_for(&antenna);
    for (g, key) in BOUND_KEYS.iter().enumerate() {
        if let Some(v) = e.take(key) {
            let r = parse_list(key, &v, 2)?;
            bounds.ranges[g] = (to_si(r[0], Unit::Mm), to_si(r[1], Unit::Mm));
        }
    }

    let gd = GaParams::default();
    let ga = GaParams {
        population_m: e.usize_or("ga.population", gd.population_m)?,
        generations_max: e.usize_or("ga.generations", gd.generations_max)?,
        crossover_rate: e.f64_or("ga.crossover_rate", gd.crossover_rate)?,
        mutation_rate: e.f64_or("ga.mutation_rate", gd.mutation_rate)?,
        elite_count: e.usize_or("ga.elite_count", gd.elite_count)?,
        tournament_size: e.usize_or("ga.tournament_size", gd.tournament_size)?,
        seed: match e.take("ga.seed") {
            Some(v) => v
                .parse()
                .map_err(|_| Error::invalid("ga.seed", format!("expected a 64-bit integer, got {v:?}")))?,
            None => gd.seed,
        },
        stagnation_window: e.usize_or("ga.stagnation_window", gd.stagnation_window)?,
        workers: e.usize_or("ga.workers", gd.workers)?,
    };
    let coding = match e.take("ga.coding").as_deref() {
        None | Some("binary") => GeneCoding::Binary,
        Some("gray") => GeneCoding::Gray,
        Some(other) => {
            return Err(Error::invalid("ga.coding", format!("expected binary or gray, got {other:?}")))
        }
    };
    let aggregator = match e.take("ga.aggregator") {
        Some(v) => v.parse().map_err(|_| {
            Error::invalid("ga.aggregator", format!("expected max or mean, got {v:?}"))
        })?,
        None => Aggregator::Max,
    };

    let mut network = NetworkOptions::default();
    if let Some(v) = e.take("network.step_susceptance") {
        network.step_susceptance = parse_bool("network.step_susceptance", &v)?;
    }
    if let Some(v) = e.take("network.layout") {
        let items: Vec<HeightRef> = v
            .split(',')
            .map(|s| match s.trim().to_ascii_lowercase().as_str() {
                "antenna" | "b" => Ok(HeightRef::Antenna),
                "b1" => Ok(HeightRef::B1),
                "b2" => Ok(HeightRef::B2),
                "b3" => Ok(HeightRef::B3),
                other => Err(Error::invalid("network.layout", format!("unknown height {other:?}"))),
            })
            .collect::<Result<_>>()?;
        network.layout = items
            .try_into()
            .map_err(|_| Error::invalid("network.layout", "expected 5 entries"))?;
    }

    let matching = match (e.take("matching.lengths_mm"), e.take("matching.heights_mm")) {
        (None, None) => None,
        (Some(l), Some(h)) => {
            let l = parse_list("matching.lengths_mm", &l, 5)?;
            let h = parse_list("matching.heights_mm", &h, 3)?;
            Some((
                std::array::from_fn(|i| to_si(l[i], Unit::Mm)),
                std::array::from_fn(|i| to_si(h[i], Unit::Mm)),
            ))
        }
        _ => {
            return Err(Error::invalid(
                "matching",
                "matching.lengths_mm and matching.heights_mm must be given together",
            ))
        }
    };

    let z_ref = match e.take("touchstone.z_ref_ohm") {
        Some(v) => Some(parse_f64("touchstone.z_ref_ohm", &v)?),
        None => None,
    };

    let outputs = OutputPaths {
        sweep_csv: e.take("output.sweep_csv").map(PathBuf::from),
        touchstone: e.take("output.touchstone").map(PathBuf::from),
        history: e.take("output.history").map(PathBuf::from),
        aperture_csv: e.take("output.aperture_csv").map(PathBuf::from),
    };

    if let Some(unknown) = e.0.keys().next() {
        return Err(Error::Format(format!("unknown key {unknown}")));
    }

    let cfg = RunConfig {
        antenna,
        f_start,
        f_stop,
        n_points,
        modes,
        quadrature,
        bounds,
        ga,
        coding,
        aggregator,
        network,
        matching,
        z_ref,
        outputs,
    };
    cfg.validate()?;
    Ok(cfg)
}
