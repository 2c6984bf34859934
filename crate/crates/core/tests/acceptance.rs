//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.

mod common;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mlamatch::aperture::*;
use mlamatch::ga::*;
use mlamatch::io::export::{parse_csv, sweep_csv, touchstone};
use mlamatch::io::*;
use mlamatch::waveguide::*;

type Check = std::result::Result<String, String>;

fn example_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/example.cfg")
}

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> std::result::Result<(), String> {
    ensure(elapsed < limit, format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn rel_diff(a: &TransmissionMatrix, b: &TransmissionMatrix) -> f64 {
    let scale = [a.t11, a.t12, a.t21, a.t22]
        .iter()
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    a.max_abs_diff(b) / scale
}

fn random_config(rng: &mut ChaCha8Rng) -> MatchingConfig {
    let antenna = GuideSection::new(0.017, 0.011, 0.0, rng.gen_range(1.5..10.0)).unwrap();
    MatchingConfig {
        l: std::array::from_fn(|_| rng.gen_range(0.0..0.015)),
        bh: std::array::from_fn(|_| rng.gen_range(0.001..0.011)),
        antenna,
    }
}

fn cascade_algebra() -> Check {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let id = TransmissionMatrix::identity();
    for _ in 0..200 {
        let fp = FrequencyPoint::new(rng.gen_range(9.0e9..11.0e9)).unwrap();
        let [a, b, c] = [0; 3].map(|_| build_network(&random_config(&mut rng), &fp).unwrap());
        worst = worst.max((a.det() - 1.0).norm());
        let left = cascade(&[cascade(&[a, b]).unwrap(), c]).unwrap();
        let right = cascade(&[a, cascade(&[b, c]).unwrap()]).unwrap();
        worst = worst.max(rel_diff(&left, &right));

        let sec = random_config(&mut rng).antenna;
        worst = worst.max(rel_diff(&t_hw(&sec.with_length(0.0), &fp).unwrap(), &id));
        let (l1, l2) = (rng.gen_range(0.0..0.02), rng.gen_range(0.0..0.02));
        let split = t_hw(&sec.with_length(l1), &fp).unwrap() * t_hw(&sec.with_length(l2), &fp).unwrap();
        worst = worst.max(rel_diff(&split, &t_hw(&sec.with_length(l1 + l2), &fp).unwrap()));

        let z1 = Complex64::new(rng.gen_range(10.0..1000.0), 0.0);
        let z2 = Complex64::new(rng.gen_range(10.0..1000.0), rng.gen_range(-200.0..200.0));
        let back = t_interface(z1, z2).unwrap() * t_interface(z2, z1).unwrap();
        worst = worst.max(rel_diff(&back, &id));
    }
    ensure(worst <= 1e-12, format!("worst deviation {worst:e}"))?;
    within(t0.elapsed(), Duration::from_secs(1))?;
    Ok(format!("worst deviation {worst:.1e} in {:.2?}", t0.elapsed()))
}

fn quarter_wave() -> Check {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let b_in = rng.gen_range(0.004..0.02);
        let b_out = rng.gen_range(0.1..1.0) * b_in;
        let eps = rng.gen_range(1.5..10.0);
        let antenna = GuideSection::new(0.017, b_in, 0.0, eps).unwrap();
        let fp = FrequencyPoint::new(rng.gen_range(9.0e9..11.0e9)).unwrap();
        let beta = modal_params(&antenna, &fp, 1).unwrap().beta.re;
        let cfg = MatchingConfig {
            l: [0.0, 0.0, PI / (2.0 * beta), 0.0, 0.0],
            bh: [(b_in * b_out).sqrt(), b_out, b_out],
            antenna,
        };
        let g = gamma_in(&build_network(&cfg, &fp).unwrap(), Complex64::new(0.0, 0.0)).unwrap();
        worst = worst.max(g.norm());
    }
    ensure(worst < 1e-10, format!("worst |Γ_in| {worst:e}"))?;
    within(t0.elapsed(), Duration::from_secs(1))?;
    Ok(format!("worst |Γ_in| {worst:.1e} in {:.2?}", t0.elapsed()))
}

fn band_grid() -> Vec<FrequencyPoint> {
    frequency_grid(9.75e9 * 0.95, 9.75e9 * 1.05, 11, &[]).unwrap()
}

fn aperture_quadrature() -> Check {
    let geom = GuideSection::new(0.017, 0.011, 0.0, 2.55).unwrap();
    let modes = ModeSet::default();
    let q = QuadratureSpec::default();
    let mut lib_time = Duration::ZERO;
    let (mut worst_doubling, mut worst_oracle) = (0.0f64, 0.0f64);
    for fp in band_grid() {
        let t0 = Instant::now();
        let y = aperture_admittance(&geom, &fp, &modes, &q).map_err(|e| e.to_string())?;
        let yd = aperture_admittance(&geom, &fp, &modes, &q.doubled()).map_err(|e| e.to_string())?;
        lib_time += t0.elapsed();
        worst_doubling = worst_doubling.max((yd - y).norm() / y.norm());

        let raw = common::cartesian_admittances(0.017, 0.011, fp.f, modes.modes(), q.k_rho_max, 2000);
        let oracle = common::compose_y_ap(&raw, modes.modes(), 0.017, 2.55, fp.f);
        worst_oracle = worst_oracle.max((y - oracle).norm() / oracle.norm());
    }
    ensure(worst_doubling < 1e-3, format!("doubling change {worst_doubling:e}"))?;
    ensure(worst_oracle < 5e-3, format!("oracle deviation {worst_oracle:e}"))?;
    within(lib_time, Duration::from_secs(60))?;
    Ok(format!(
        "doubling {worst_doubling:.1e}, oracle {worst_oracle:.1e}, {lib_time:.2?}"
    ))
}

fn passivity() -> Check {
    let q = QuadratureSpec::default();
    let mut n = 0;
    for eps in [1.0, 2.55, 4.0] {
        for (a, b) in [(0.017, 0.011), (0.02286, 0.01016), (0.012, 0.006)] {
            let geom = GuideSection::new(a, b, 0.0, eps).unwrap();
            let fc = geom.cutoff_hz(1);
            for f in (0..8).map(|i| fc * (1.05 + 0.15 * i as f64)) {
                let fp = FrequencyPoint::new(f).unwrap();
                let y = aperture_admittance(&geom, &fp, &ModeSet::default(), &q).map_err(|e| e.to_string())?;
                let g = aperture_reflection(y).map_err(|e| e.to_string())?;
                ensure(y.re > 0.0, format!("Re y_ap = {} at {f:e} Hz", y.re))?;
                ensure(g.norm() < 1.0, format!("|Γ_ap| = {} at {f:e} Hz", g.norm()))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} frequency/geometry points"))
}

fn modal_truncation() -> Check {
    let geom = GuideSection::new(0.017, 0.011, 0.0, 2.55).unwrap();
    let fp = FrequencyPoint::new(9.75e9).unwrap();
    let q = QuadratureSpec::default();
    let sets = [vec![1, 3], vec![1, 3, 5], vec![1, 3, 5, 7]];
    let y: Vec<Complex64> = sets
        .iter()
        .map(|m| aperture_admittance(&geom, &fp, &ModeSet::new(m.clone()).unwrap(), &q))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let d1 = (y[1] - y[0]).norm();
    let d2 = (y[2] - y[1]).norm();
    ensure(d2 < d1, format!("changes {d1:e} then {d2:e}"))?;
    Ok(format!("changes {d1:.2e} then {d2:.2e}"))
}

fn parse_line(stdout: &str, prefix: &str) -> std::result::Result<f64, String> {
    stdout
        .lines()
        .find_map(|l| l.strip_prefix(prefix))
        .and_then(|v| v.trim().parse().ok())
        .ok_or_else(|| format!("no {prefix:?} line in output"))
}

fn ga_end_to_end() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t0 = Instant::now();
    let run = |tag: &str| -> std::result::Result<(Vec<u8>, Vec<u8>, Vec<u8>), String> {
        let hist = dir.path().join(format!("history_{tag}.csv"));
        let sweep = dir.path().join(format!("sweep_{tag}.csv"));
        let out = Command::new(env!("CARGO_BIN_EXE_mlamatch"))
            .arg("optimize")
            .arg("--config")
            .arg(example_path())
            .arg("--seed")
            .arg("42")
            .arg("--history")
            .arg(&hist)
            .arg("--out")
            .arg(&sweep)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(out.status.success(), String::from_utf8_lossy(&out.stderr))?;
        let read = |p: &Path| std::fs::read(p).map_err(|e| e.to_string());
        Ok((out.stdout, read(&hist)?, read(&sweep)?))
    };
    let first = run("a")?;
    let elapsed = t0.elapsed();
    let second = run("b")?;
    ensure(first == second, "repeat run differs")?;

    let stdout = String::from_utf8_lossy(&first.0);
    let baseline = parse_line(&stdout, "baseline max |Γ_ap| = ")?;
    let best = parse_line(&stdout, "best max |Γ_in| = ")?;
    let generations = parse_line(&stdout, "generations ")?;
    ensure(generations <= 200.0, format!("{generations} generations"))?;
    ensure(
        best <= 0.5 * baseline,
        format!("minimax |Γ_in| {best} vs baseline {baseline}"),
    )?;
    within(elapsed, Duration::from_secs(300))?;
    Ok(format!(
        "minimax |Γ_in| {best:.4} vs baseline {baseline:.4} after {generations} generations, {elapsed:.2?}"
    ))
}

fn ga_invariants() -> Check {
    let cfg = load_config(&example_path()).map_err(|e| e.to_string())?;
    let space = SearchSpace::new(cfg.bounds, cfg.antenna).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..1000 {
        let c = Chromosome::random(&mut rng, N_GENES);
        let back = encode(&decode(&c, &space).unwrap(), &space).map_err(|e| e.to_string())?;
        ensure(back == c, "chromosome round-trip")?;

        let v: [f64; 8] = std::array::from_fn(|g| {
            let (lo, hi) = space.bounds.ranges[g];
            rng.gen_range(lo..=hi)
        });
        let m = MatchingConfig {
            l: [v[0], v[1], v[2], v[3], v[4]],
            bh: [v[5], v[6], v[7]],
            antenna: space.antenna,
        };
        let q = decode(&encode(&m, &space).unwrap(), &space).unwrap();
        for (g, (x, y)) in v.iter().zip(q.l.iter().chain(&q.bh)).enumerate() {
            let half = 0.5 * space.bounds.lsb(g);
            ensure((x - y).abs() <= half * (1.0 + 1e-9), format!("gene {g} off by {}", (x - y).abs()))?;
        }
    }

    let problem = Problem::new(space, cfg.aperture_model().map_err(|e| e.to_string())?, cfg.aggregator)
        .map_err(|e| e.to_string())?;
    let params = GaParams {
        generations_max: 200,
        stagnation_window: 0,
        ..cfg.ga
    };
    let mut runs = Vec::new();
    for workers in [1, 2, 8] {
        let out = optimize(&problem, &GaParams { workers, ..params }).map_err(|e| e.to_string())?;
        ensure(out.history.len() == 201, "history length")?;
        ensure(
            out.history.windows(2).all(|w| w[1].best <= w[0].best),
            "best-so-far increased",
        )?;
        runs.push((out.best_chromosome, out.history));
    }
    ensure(runs[0] == runs[1] && runs[0] == runs[2], "worker count changed the result")?;
    Ok("round-trips, half-LSB bound, monotone history, workers 1/2/8 identical".into())
}

fn io_round_trips() -> Check {
    let cfg = load_config(&example_path()).map_err(|e| e.to_string())?;
    ensure(
        parse_config(&cfg.to_config_string()).map_err(|e| e.to_string())? == cfg,
        "config round-trip",
    )?;

    let model = cfg.aperture_model().map_err(|e| e.to_string())?;
    let bare = sweep_model(&model, None, &cfg.network).map_err(|e| e.to_string())?;
    let degenerate = MatchingConfig::degenerate(cfg.antenna);
    let matched = sweep_model(&model, Some(&degenerate), &cfg.network).map_err(|e| e.to_string())?;
    for ((a, b), g) in bare.rows.iter().zip(&matched.rows).zip(&model.gamma_ap) {
        ensure(a.gamma == *g, "bare sweep differs from aperture model")?;
        ensure((a.gamma - b.gamma).norm() < 1e-12, "degenerate network changes Γ")?;
    }

    let text = sweep_csv(&matched);
    ensure(text.starts_with("freq_hz,re,im,mag,mag_db\n"), "CSV header")?;
    ensure(!text.contains('\r'), "CSV line endings")?;
    ensure(parse_csv(&text).map_err(|e| e.to_string())? == matched, "CSV round-trip")?;

    let z_ref = cfg.feed_impedance().map_err(|e| e.to_string())?;
    let ts = touchstone(&matched, z_ref, &["acceptance".into()]).map_err(|e| e.to_string())?;
    let lines: Vec<&str> = ts.lines().collect();
    let opt = lines.iter().position(|l| l.starts_with('#')).ok_or("no option line")?;
    ensure(lines[..opt].iter().all(|l| l.starts_with('!')), "comments precede option line")?;
    ensure(lines[opt] == format!("# GHz S RI R {z_ref}"), "option line")?;
    for (l, row) in lines[opt + 1..].iter().zip(&matched.rows) {
        let v: Vec<f64> = l.split(' ').map(|s| s.parse().unwrap_or(f64::NAN)).collect();
        ensure(v.len() == 3, "Touchstone row width")?;
        ensure((v[0] * 1e9 - row.freq_hz).abs() < 1e-3, "Touchstone frequency")?;
        ensure(v[1] == row.gamma.re && v[2] == row.gamma.im, "Touchstone data")?;
    }
    let mut unsorted = matched.clone();
    unsorted.rows.swap(0, 1);
    ensure(touchstone(&unsorted, z_ref, &[]).is_err(), "unsorted grid accepted")?;
    Ok("config, CSV, Touchstone, baseline equivalence".into())
}

fn main() {
    let checks: [(&str, fn() -> Check); 8] = [
        ("cascade algebra", cascade_algebra),
        ("quarter-wave oracle", quarter_wave),
        ("aperture quadrature", aperture_quadrature),
        ("passivity", passivity),
        ("modal truncation", modal_truncation),
        ("GA end-to-end", ga_end_to_end),
        ("GA invariants", ga_invariants),
        ("I/O", io_round_trips),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(reason) => {
                failed += 1;
                println!("FAIL  {name}: {reason}");
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
