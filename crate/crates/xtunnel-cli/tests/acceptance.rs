//! Acceptance run over the shipped configs: one PASS/FAIL line per criterion,
//! non-zero exit if any fails.

use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::{Duration, Instant};

use xtunnel::experiments::*;
use xtunnel::fit::loglog_fit;
use xtunnel_cli::RunConfig;

struct Outcome {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> RunConfig {
    load_with(name, &[])
}

fn load_with(name: &str, overrides: &[&str]) -> RunConfig {
    let text = std::fs::read_to_string(configs().join(name)).expect("config readable");
    let overrides: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    RunConfig::load(&text, &overrides).expect("config valid")
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn analytic_spectra() -> Result<Outcome, String> {
    let harmonic = load("harmonic.json");
    let (r, t_osc) = timed(|| spectrum_report(&harmonic.model(), 6));
    let r = r.map_err(|e| e.to_string())?;
    let worst_osc = r.energies.iter().enumerate().map(|(k, e)| rel(*e, k as f64 + 0.5)).fold(0.0, f64::max);

    let boxed = load("box.json");
    let (b, t_box) = timed(|| spectrum_report(&boxed.model(), 1));
    let b = b.map_err(|e| e.to_string())?;
    let exact = std::f64::consts::PI.powi(2) / 2.0;
    let box_rel = rel(b.energies[0], exact);

    // box-size doubling at fixed spacing leaves the levels alone
    let wide = load_with("harmonic.json", &["grid.half_width=16", "grid.resolution.points=7999"]);
    let w = spectrum_report(&wide.model(), 6).map_err(|e| e.to_string())?;
    let doubling = w.energies.iter().zip(&r.energies).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    let slow = t_osc.max(t_box);
    let pass = worst_osc <= 1e-4 && box_rel <= 1e-4 && doubling <= 1e-9 && slow < Duration::from_secs(5);
    Ok(verdict(
        pass,
        format!(
            "harmonic n={} worst rel {worst_osc:.2e}, box E1 rel {box_rel:.2e}, box doubling {doubling:.1e}, slowest solve {:.2}s",
            r.n,
            slow.as_secs_f64()
        ),
    ))
}

fn wkb_exponent() -> Result<Outcome, String> {
    let cfg = load("splitting.json");
    let spec = cfg.scan_spec().map_err(|e| e.to_string())?;
    let (r, t) = timed(|| scan_hbar_splitting(&spec));
    let r = r.map_err(|e| e.to_string())?;
    let s = r.action.action;
    let (lo, hi) = (s / spec.values[spec.values.len() - 1], s / spec.values[0]);
    let err = rel(-r.fit.slope, s);
    let pass = err <= 0.03 && r.fit.r2 >= 0.999 && lo >= 6.0 - 1e-9 && hi <= 20.0 + 1e-9 && t < Duration::from_secs(120);
    Ok(verdict(
        pass,
        format!(
            "slope {:.4} vs -S {:.4} (rel {err:.2e}), R² {:.6}, S/ħ in [{lo:.2}, {hi:.2}], {:.1}s",
            r.fit.slope,
            -s,
            r.fit.r2,
            t.as_secs_f64()
        ),
    ))
}

fn parabola_action() -> Result<Outcome, String> {
    let cfg = load("wkb_parabola.json");
    let r = wkb_report(&cfg.model(), cfg.options.energy, cfg.options.bracket).map_err(|e| e.to_string())?;
    let exact = std::f64::consts::PI * (2.0 - 0.5);
    let err = rel(r.action, exact);
    Ok(verdict(err <= 1e-3, format!("S {:.8} vs {exact:.8}, rel {err:.1e}", r.action)))
}

fn distance_law() -> Result<Outcome, String> {
    let cfg = load("distance.json");
    let spec = cfg.scan_spec().map_err(|e| e.to_string())?;
    match scan_distance_exchange(&spec, cfg.options.distance) {
        Ok(r) => {
            let mono = r.monopole_ratio.iter().copied().fold(0.0, f64::max);
            let pass = (r.fit.slope + 2.0).abs() <= 0.2 && r.fit.r2 >= 0.99 && mono <= 1e-6;
            Ok(verdict(pass, format!("slope {:.3}, R² {:.4}, monopole/G ≤ {mono:.1e}", r.fit.slope, r.fit.r2)))
        }
        Err(e) => {
            // same points with the delocalization check off, for the record
            let off = DistanceOptions { min_side_weight: 0.0 };
            let diag = spec
                .values
                .iter()
                .map(|&l| spec.base.at(ScanParameter::Separation, l).and_then(|m| distance_point(&m, off)))
                .collect::<Result<Vec<_>, _>>();
            let extra = match diag {
                Ok(points) => {
                    let ls: Vec<f64> = points.iter().map(|p| p.l).collect();
                    let gs: Vec<f64> = points.iter().map(|p| p.g).collect();
                    let mono = points.iter().map(|p| p.monopole_ratio).fold(0.0, f64::max);
                    let weight = points.last().map_or(0.0, |p| p.side_weight);
                    match loglog_fit(&ls, &gs) {
                        Ok(f) => format!(
                            "unchecked slope {:.2} (R² {:.4}), far-side weight at l={} is {weight:.1e}, monopole/G ≤ {mono:.1e}",
                            f.slope,
                            f.r2,
                            ls[ls.len() - 1]
                        ),
                        Err(e) => format!("unchecked fit failed: {e}"),
                    }
                }
                Err(e) => format!("unchecked rerun failed: {e}"),
            };
            Ok(verdict(false, format!("{e}; {extra}")))
        }
    }
}

fn case2_exponent() -> Result<Outcome, String> {
    let cfg = load("case2.json");
    let params = cfg.options.case2.ok_or("config lacks options.case2")?;
    let spec = cfg.scan_spec().map_err(|e| e.to_string())?;
    let r = scan_case2(&spec, &params).map_err(|e| e.to_string())?;
    let err = rel(r.fit.slope, r.expected_slope);
    Ok(verdict(err <= 0.01, format!("slope {:.8} vs {:.8}, rel {err:.1e}", r.fit.slope, r.expected_slope)))
}

fn case_discrimination() -> Result<Outcome, String> {
    let c1 = load("case1.json");
    let c3 = load("case3.json");
    let s1 = c1.scan_spec().map_err(|e| e.to_string())?;
    let s3 = c3.scan_spec().map_err(|e| e.to_string())?;
    if s1.values != s3.values {
        return Ok(verdict(false, "case-1 and case-3 ħ ranges differ".into()));
    }
    let r1 = scan_hbar_exchange_case1(&s1, &c1.options.case1).map_err(|e| e.to_string())?;
    let r3 = scan_hbar_exchange_case3(&s3, &c3.options.case3).map_err(|e| e.to_string())?;
    let ratio = r3.semilog.slope.abs() / r1.semilog.slope.abs();
    let pass = r1.semilog.slope < 0.0 && r1.semilog.r2 >= 0.98 && ratio <= 0.05 && r3.loglog.r2 >= 0.99;
    Ok(verdict(
        pass,
        format!(
            "case 1 slope {:.3} (R² {:.4}), case 3 slope {:.4} ({:.1}% of case 1), case 3 log-log R² {:.5}",
            r1.semilog.slope,
            r1.semilog.r2,
            r3.semilog.slope,
            100.0 * ratio,
            r3.loglog.r2
        ),
    ))
}

fn hf_tail_law() -> Result<Outcome, String> {
    let cfg = load("hf_tail.json");
    let r = hf_tail(&cfg.model(), &cfg.options.hf).map_err(|e| e.to_string())?;
    let (a, b) = (r.base.tail.fit.slope, r.refined.tail.fit.slope);
    let pass = (a + 2.0).abs() <= 0.3
        && (b + 2.0).abs() <= 0.3
        && r.slope_change <= 0.05
        && r.base.excess_increasing
        && r.refined.excess_increasing;
    Ok(verdict(
        pass,
        format!(
            "slopes {a:.3} (n={}) and {b:.3} (n={}), change {:.4}, excess increasing {}/{}",
            r.base.n, r.refined.n, r.slope_change, r.base.excess_increasing, r.refined.excess_increasing
        ),
    ))
}

fn oracle_consistency() -> Result<Outcome, String> {
    let cfg = load("oracle2p.json");
    let r = oracle_report(&cfg.model(), &cfg.options.oracle).map_err(|e| e.to_string())?;
    let free = (r.free_energy - r.e0_plus_e1).abs();
    let agree = (1.0 / 3.0..=3.0).contains(&r.prediction_ratio);
    let pass = r.enhancement >= 10.0 && agree && free <= 1e-8;
    Ok(verdict(
        pass,
        format!(
            "enhancement {:.3} (need ≥ 10), occupation/prediction {:.3}, free-limit energy error {free:.1e}",
            r.enhancement, r.prediction_ratio
        ),
    ))
}

/// Every command on its config, twice, both formats.
const RUNS: [(&str, &str); 11] = [
    ("spectrum", "harmonic.json"),
    ("spectrum", "box.json"),
    ("wkb", "wkb_parabola.json"),
    ("exchange", "exchange.json"),
    ("hf-tail", "hf_tail.json"),
    ("oracle2p", "oracle2p.json"),
    ("scan-hbar-splitting", "splitting.json"),
    ("scan-distance", "distance.json"),
    ("scan-case1", "case1.json"),
    ("scan-case2", "case2.json"),
    ("scan-case3", "case3.json"),
];

fn determinism() -> Result<Outcome, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut differing = Vec::new();
    let mut failed = Vec::new();
    for (command, name) in RUNS {
        for format in ["json", "csv"] {
            let out = dir.path().join(format!("{command}.{format}"));
            let once = || {
                let _ = std::fs::remove_file(&out);
                let o = Process::new(env!("CARGO_BIN_EXE_xtunnel"))
                    .args([command, "--config", &configs().join(name).to_string_lossy(), "--format", format])
                    .args(["--out", &out.to_string_lossy()])
                    .output()
                    .map_err(|e| e.to_string())?;
                let written = std::fs::read(&out).unwrap_or_default();
                Ok::<_, String>((o.status.code(), written, o.stderr))
            };
            let (a, b) = (once()?, once()?);
            if a != b {
                differing.push(format!("{command} {format}"));
            }
            if a.0 != Some(0) {
                failed.push(format!("{command} exit {}", a.0.unwrap_or(-1)));
            }
        }
    }
    failed.dedup();
    let note = if failed.is_empty() { String::new() } else { format!("; non-zero exits reproduced too: {}", failed.join(", ")) };
    Ok(verdict(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} runs byte-identical{note}", 2 * RUNS.len())
        } else {
            format!("differing: {}", differing.join(", "))
        },
    ))
}

type Check = fn() -> Result<Outcome, String>;

fn main() {
    let criteria: [(&str, Check); 9] = [
        ("analytic spectra", analytic_spectra),
        ("WKB exponent of the splitting", wkb_exponent),
        ("inverted-parabola action", parabola_action),
        ("exchange distance law", distance_law),
        ("case-2 exponent", case2_exponent),
        ("case-1 vs case-3 discrimination", case_discrimination),
        ("HF power-law tail", hf_tail_law),
        ("two-particle oracle consistency", oracle_consistency),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = check().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        if !outcome.pass {
            failures += 1;
        }
        println!("{} {}. {name}: {}", if outcome.pass { "PASS" } else { "FAIL" }, i + 1, outcome.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
