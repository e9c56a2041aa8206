//! Acceptance suite. Prints one line per criterion and fails if any is red.

mod common;

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{run, stderr, stdout};
use depthstroke_core::features::fft_in_place;
use depthstroke_core::filters::{
    fisheye, hysteresis, low_pass, median_filter, moving_average, sigmoid_gate, FisheyeParams, HysteresisParams,
    LowPassParams, SigmoidParams, WindowParams,
};
use depthstroke_core::formats::{load_stroke, save_stroke, stroke_to_json};
use depthstroke_core::mlp::{self, Batch, Network};
use depthstroke_core::pipeline::{process, reassign_landing_lifting, PipelineConfig, Suppressor};
use depthstroke_core::smoothing::{smooth, SmoothingMethod, SmoothingSpec};
use depthstroke_core::synth::{generate, random_spec, synth_stroke};
use depthstroke_core::{run_chain, Curve3D, CurveClass, LabeledDataset, PressureProfile, ProjectionParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn cli(dir: &Path, args: &[&str]) -> Result<String, String> {
    let o = run(dir, args);
    ensure(o.status.success(), || format!("`{}` failed: {}", args.join(" "), stderr(&o).trim()))?;
    Ok(stdout(&o))
}

struct FullScaleRun {
    train_out: String,
    eval_out: String,
    elapsed: Duration,
}

fn full_scale_run(dir: &Path) -> Result<FullScaleRun, String> {
    let start = Instant::now();
    cli(dir, &["gen", "--spiral", "49", "--forward", "65", "--backward", "67", "--seed", "42", "--out", "train.jsonl"])?;
    cli(dir, &["gen", "--spiral", "100", "--forward", "100", "--backward", "100", "--seed", "7", "--out", "test.jsonl"])?;
    let train_out = cli(dir, &["train", "--data", "train.jsonl", "--out", "model.json", "--topology", "50:35:3"])?;
    let eval_out = cli(dir, &["eval", "--model", "model.json", "--data", "test.jsonl"])?;
    Ok(FullScaleRun {
        train_out,
        eval_out,
        elapsed: start.elapsed(),
    })
}

fn field<'a>(text: &'a str, key: &str) -> Result<&'a str, String> {
    text.lines()
        .find_map(|l| l.strip_prefix(key))
        .map(str::trim)
        .ok_or_else(|| format!("no `{key}` line in output"))
}

/// `(class, tested, correct)` rows of the eval table.
fn eval_rows(text: &str) -> Vec<(String, usize, usize)> {
    text.lines()
        .filter_map(|l| {
            let cols: Vec<&str> = l.split_whitespace().collect();
            let class = *cols.first()?;
            if cols.len() != 8 || !["backward", "forward", "spiral"].contains(&class) {
                return None;
            }
            Some((class.to_string(), cols[1].parse().ok()?, cols[5].parse().ok()?))
        })
        .collect()
}

fn criterion_1(r: &FullScaleRun) -> Outcome {
    let rows = eval_rows(&r.eval_out);
    ensure(rows.len() == 3, || format!("expected 3 class rows, got {}", rows.len()))?;
    let mut parts = Vec::new();
    for (class, tested, correct) in &rows {
        ensure(*tested == 100, || format!("{class}: tested {tested}, expected 100"))?;
        let rate = *correct as f64 / *tested as f64;
        ensure(rate >= 0.90, || format!("{class} accuracy {:.1}% < 90%", rate * 100.0))?;
        parts.push(format!("{class} {:.1}%", rate * 100.0));
    }
    ensure(r.elapsed < Duration::from_secs(300), || format!("took {:?}", r.elapsed))?;
    Ok(format!("{} in {:.1?}", parts.join(", "), r.elapsed))
}

fn criterion_2(r: &FullScaleRun) -> Outcome {
    let mse: f64 = field(&r.train_out, "final_mse:")?.parse().map_err(|e| format!("final_mse: {e}"))?;
    let epochs: usize = field(&r.train_out, "epochs:")?.parse().map_err(|e| format!("epochs: {e}"))?;
    ensure(mse <= 0.01, || format!("final MSE {mse:e} > 0.01"))?;
    ensure(epochs <= 30000, || format!("{epochs} epochs > 30000"))?;
    Ok(format!("final MSE {mse:.3e} after {epochs} epochs"))
}

fn criterion_3(r: &FullScaleRun) -> Outcome {
    let misc = r.eval_out.contains("misclassifications:");
    ensure(misc, || "eval output lacks the misclassification breakdown".into())?;
    let trend = field(&r.eval_out, "trend:")?;
    Ok(format!("breakdown present; trend: {trend}"))
}

fn gradient_batch(rng: &mut ChaCha8Rng, rows: usize) -> Batch {
    let inputs = (0..rows).map(|_| (0..5).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
    let targets = (0..rows)
        .map(|_| {
            let mut t = vec![0.0; 3];
            t[rng.random_range(0..3)] = 1.0;
            t
        })
        .collect();
    Batch::new(inputs, targets).unwrap()
}

fn criterion_4() -> Outcome {
    const STEP: f64 = 1e-5;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let net = Network::random(&[5, 4, 3], seed).map_err(|e| e.to_string())?;
        let batch = gradient_batch(&mut rng, 7);
        let (_, grad) = net.batch_gradient(&batch);
        let base = net.parameters().to_vec();
        let mut probe = net.clone();
        for i in 0..base.len() {
            let mut shifted = base.clone();
            shifted[i] = base[i] + STEP;
            probe.set_parameters(&shifted).unwrap();
            let up = probe.batch_mse(&batch);
            shifted[i] = base[i] - STEP;
            probe.set_parameters(&shifted).unwrap();
            let down = probe.batch_mse(&batch);
            let numeric = (up - down) / (2.0 * STEP);
            let denom = grad[i].abs().max(numeric.abs()).max(1e-7);
            worst = worst.max((grad[i] - numeric).abs() / denom);
        }
    }
    ensure(worst <= 1e-4, || format!("worst relative error {worst:e} > 1e-4"))?;
    ensure(start.elapsed() < Duration::from_secs(1), || format!("took {:?}", start.elapsed()))?;
    Ok(format!("worst relative error {worst:.2e} over 20 networks"))
}

fn direct_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(j, &v)| v * Complex64::from_polar(1.0, -2.0 * PI * ((k * j) % n) as f64 / n as f64))
                .sum()
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let n = 1usize << (trial % 7);
        let signal: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let mut fast = signal.clone();
        fft_in_place(&mut fast).map_err(|e| e.to_string())?;
        for (a, b) in fast.iter().zip(direct_dft(&signal)) {
            worst = worst.max((a - b).norm());
        }
    }
    ensure(worst <= 1e-9, || format!("worst deviation {worst:e} > 1e-9"))?;
    ensure(start.elapsed() < Duration::from_secs(1), || format!("took {:?}", start.elapsed()))?;
    Ok(format!("worst deviation {worst:.2e} over 100 signals of length 1..64"))
}

fn table_fisheyes() -> Vec<FisheyeParams> {
    let cfg = PipelineConfig::default();
    [cfg.spiral.suppressor, cfg.forward.suppressor, cfg.backward.suppressor]
        .into_iter()
        .filter_map(|s| match s {
            Suppressor::Fisheye(f) => Some(f),
            Suppressor::Hysteresis(_) => None,
        })
        .collect()
}

fn table_sigmoids() -> Vec<SigmoidParams> {
    let cfg = PipelineConfig::default();
    vec![cfg.forward.sigmoid, cfg.backward.sigmoid]
}

fn random_profile(rng: &mut ChaCha8Rng) -> PressureProfile {
    let n = rng.random_range(1..300);
    PressureProfile::new((0..n).map(|_| rng.random_range(0.0..=1.0)).collect()).unwrap()
}

fn filter_checks(x: &PressureProfile, rng: &mut ChaCha8Rng) -> Result<(), String> {
    let e = |e: depthstroke_core::Error| e.to_string();
    ensure(low_pass(x, LowPassParams { alpha: 1.0 }).map_err(e)? == *x, || "low-pass alpha=1 is not identity".into())?;
    ensure(median_filter(x, WindowParams { width: 1 }).map_err(e)? == *x, || "median width=1 is not identity".into())?;
    ensure(moving_average(x, WindowParams { width: 1 }).map_err(e)? == *x, || {
        "moving average width=1 is not identity".into()
    })?;
    let h = hysteresis(x, HysteresisParams { band: 0.0 }).map_err(e)?;
    ensure(h.values().iter().zip(x.values()).all(|(a, b)| (a - b).abs() <= 1e-15), || {
        "hysteresis band=0 is not identity".into()
    })?;

    let window = WindowParams { width: 2 * rng.random_range(0..8) + 1 };
    let alpha = rng.random_range(0.01..=1.0);
    let (lo, hi) = (x.min(), x.max());
    for (name, out) in [
        ("low-pass", low_pass(x, LowPassParams { alpha }).map_err(e)?),
        ("median", median_filter(x, window).map_err(e)?),
        ("moving average", moving_average(x, window).map_err(e)?),
    ] {
        ensure(out.values().iter().all(|&v| v >= lo && v <= hi), || format!("{name} leaves the input range"))?;
    }
    let band = rng.random_range(0.0..0.5);
    let mut unit = vec![hysteresis(x, HysteresisParams { band }).map_err(e)?];
    for s in table_sigmoids() {
        unit.push(sigmoid_gate(x, s).map_err(e)?);
    }
    for f in table_fisheyes() {
        unit.push(fisheye(x, f).map_err(e)?);
    }
    for out in unit {
        ensure(out.len() == x.len() && out.values().iter().all(|v| (0.0..=1.0).contains(v)), || {
            "filter output leaves [0, 1] or changes length".into()
        })?;
    }
    Ok(())
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..500 {
        let x = random_profile(&mut rng);
        filter_checks(&x, &mut rng)?;
    }
    let grid: Vec<f64> = (0..=2000).map(|i| i as f64 / 2000.0).collect();
    for s in table_sigmoids() {
        ensure(grid.windows(2).all(|w| s.apply(w[0]) < s.apply(w[1])), || {
            format!("sigmoid {s:?} is not monotone")
        })?;
    }
    for f in table_fisheyes() {
        let d = f.displacement;
        ensure(f.transfer(d) == d, || format!("fisheye fixed point fails at {d}"))?;
        for &p in &grid {
            let h = f.transfer(p);
            ensure((h - d).abs() <= (p - d).abs() && (h - d) * (p - d) >= 0.0, || {
                format!("fisheye at focus {d} does not contract {p} -> {h}")
            })?;
        }
    }
    ensure(start.elapsed() < Duration::from_secs(5), || format!("took {:?}", start.elapsed()))?;
    Ok("identities, bounds, sigmoid monotonicity, fisheye fixed point and contraction hold".into())
}

fn criterion_7() -> Outcome {
    let cases: [(Vec<f64>, Vec<f64>); 3] = [
        (vec![0.1, 0.3, 0.5, 0.5, 0.6, 0.4, 0.2], vec![0.5, 0.5, 0.5, 0.5, 0.6, 0.6, 0.6]),
        (vec![0.4; 10], vec![0.4; 10]),
        (vec![0.2, 0.8, 0.8, 0.3], vec![0.8, 0.8, 0.8, 0.8]),
    ];
    for (input, expected) in cases {
        let p = PressureProfile::new(input.clone()).map_err(|e| e.to_string())?;
        let out = reassign_landing_lifting(&p).map_err(|e| e.to_string())?;
        ensure(out.profile.values() == expected.as_slice(), || {
            format!("{input:?} -> {:?}, expected {expected:?}", out.profile.values())
        })?;
    }
    Ok("3 of 3 worked cases reproduce exactly".into())
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let params = ProjectionParams::default();
    let cfg = PipelineConfig::default();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let mut spec = random_spec(CurveClass::Spiral, &mut rng);
        let magnitude = rng.random_range(0.05..=0.15);
        let offset = if rng.random_bool(0.5) { magnitude } else { -magnitude };
        spec.edge_offset = if spec.base + offset < 0.0 { magnitude } else { offset };
        let stroke = synth_stroke(&generate(&spec).map_err(|e| e.to_string())?, CurveClass::Spiral);
        let r = run_chain(&stroke, CurveClass::Spiral, &cfg, &params, None).map_err(|e| e.to_string())?;
        let pts = r.curve.points();
        worst = worst.max((pts[0][2] - pts[pts.len() - 1][2]).abs());
    }
    let bound = 0.05 * params.depth_scale;
    ensure(worst <= bound, || format!("worst |z(first) - z(last)| {worst:.4} > {bound}"))?;
    Ok(format!("worst |z(first) - z(last)| {worst:.4} <= {bound} over 100 spirals"))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let cfg = PipelineConfig::default();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let spec = random_spec(CurveClass::Backward, &mut rng);
        let out = process(&generate(&spec).map_err(|e| e.to_string())?, CurveClass::Backward, &cfg)
            .map_err(|e| e.to_string())?;
        let v = out.values.values();
        worst = worst.max((v[0] - v[v.len() - 1]).abs());
    }
    ensure(worst <= 0.05, || format!("worst end gap {worst:.4} > 0.05"))?;
    Ok(format!("worst end gap {worst:.4} <= 0.05 over 100 backward strokes"))
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull (monotone chain).
fn hull(points: &[[f64; 3]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.iter().map(|p| [p[0], p[1]]).collect();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    let mut chain: Vec<[f64; 2]> = Vec::new();
    for pass in [pts.clone(), pts.iter().rev().copied().collect()] {
        let floor = chain.len();
        for p in pass {
            while chain.len() >= floor + 2 && cross(chain[chain.len() - 2], chain[chain.len() - 1], p) <= 0.0 {
                chain.pop();
            }
            chain.push(p);
        }
        chain.pop();
    }
    chain
}

fn inside_hull(h: &[[f64; 2]], p: [f64; 3]) -> bool {
    // tolerance scaled to the coordinate range used below
    (0..h.len()).all(|i| cross(h[i], h[(i + 1) % h.len()], [p[0], p[1]]) >= -1e-7)
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let spec = |method, samples_per_segment| SmoothingSpec { method, samples_per_segment };
    for _ in 0..200 {
        let n = rng.random_range(4..24);
        let pts: Vec<[f64; 3]> = (0..n)
            .map(|_| [rng.random_range(-100.0..100.0), rng.random_range(-100.0..100.0), 0.0])
            .collect();
        let curve = Curve3D::new(pts.clone()).map_err(|e| e.to_string())?;
        let s = rng.random_range(1..10);
        let cr = smooth(&curve, &spec(SmoothingMethod::CatmullRom, s)).map_err(|e| e.to_string())?;
        for (i, p) in pts.iter().enumerate() {
            let q = cr.points()[i * s];
            ensure((0..3).all(|k| (q[k] - p[k]).abs() <= 1e-9), || format!("catmull-rom misses control {i}"))?;
        }
        let h = hull(&pts);
        if h.len() >= 3 {
            for m in [SmoothingMethod::Chaikin4, SmoothingMethod::Chaikin8, SmoothingMethod::BSpline] {
                let out = smooth(&curve, &spec(m, s)).map_err(|e| e.to_string())?;
                ensure(out.points().iter().all(|&q| inside_hull(&h, q)), || format!("{m} leaves the control hull"))?;
            }
        }
        let origin = [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)];
        let u = {
            let d: [f64; 3] = [rng.random_range(0.2..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            [d[0] / norm, d[1] / norm, d[2] / norm]
        };
        let line: Vec<[f64; 3]> = (0..n)
            .map(|_| {
                let t: f64 = rng.random_range(-10.0..10.0);
                [origin[0] + t * u[0], origin[1] + t * u[1], origin[2] + t * u[2]]
            })
            .collect();
        let line = Curve3D::new(line).map_err(|e| e.to_string())?;
        for m in SmoothingMethod::ALL {
            let out = smooth(&line, &SmoothingSpec::new(m)).map_err(|e| e.to_string())?;
            for q in out.points() {
                let d = [q[0] - origin[0], q[1] - origin[1], q[2] - origin[2]];
                let along = d[0] * u[0] + d[1] * u[1] + d[2] * u[2];
                let off = (0..3).map(|k| (d[k] - along * u[k]).powi(2)).sum::<f64>().sqrt();
                ensure(off <= 1e-9, || format!("{m} moves a collinear point {off:e} off the line"))?;
            }
        }
    }
    Ok("interpolation, hull containment and collinearity hold on 200 random inputs".into())
}

fn criterion_11(dir: &Path) -> Outcome {
    let e = |e: depthstroke_core::Error| e.to_string();
    let io = |e: std::io::Error| e.to_string();

    let model_path = dir.join("model.json");
    let model = mlp::load_model(&model_path).map_err(e)?;
    let resaved = dir.join("model-resaved.json");
    mlp::save_model(&model, &resaved).map_err(e)?;
    let reloaded = mlp::load_model(&resaved).map_err(e)?;
    ensure(reloaded.network().parameters() == model.network().parameters(), || "model weights drift".into())?;
    let data = LabeledDataset::load(&dir.join("test.jsonl")).map_err(e)?;
    for (profile, _) in data.items() {
        let a = model.classify(profile).map_err(e)?.scores;
        let b = reloaded.classify(profile).map_err(e)?.scores;
        ensure(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()), || "forward outputs differ after reload".into())?;
    }
    ensure(std::fs::read(&model_path).map_err(io)? == std::fs::read(&resaved).map_err(io)?, || {
        "model file is not byte-stable".into()
    })?;

    let original = std::fs::read(dir.join("test.jsonl")).map_err(io)?;
    data.save(&dir.join("test-resaved.jsonl")).map_err(e)?;
    ensure(original == std::fs::read(dir.join("test-resaved.jsonl")).map_err(io)?, || {
        "dataset file does not round-trip".into()
    })?;

    let stroke = synth_stroke(&data.items()[0].0, data.items()[0].1);
    save_stroke(&dir.join("stroke.json"), &stroke).map_err(e)?;
    let loaded = load_stroke(&dir.join("stroke.json")).map_err(e)?;
    ensure(stroke_to_json(&loaded) == std::fs::read_to_string(dir.join("stroke.json")).map_err(io)?, || {
        "stroke file does not round-trip".into()
    })?;

    let invocations: [&[&str]; 4] = [
        &["gen", "--seed", "11", "--out", "OUT"],
        &["train", "--data", "train.jsonl", "--out", "OUT", "--max-iters", "200"],
        &["process", "--model", "model.json", "--stroke", "stroke.json", "--out", "OUT", "--trace-out", "OUT.trace"],
        &["eval", "--model", "model.json", "--data", "test.jsonl"],
    ];
    for args in invocations {
        let mut captures = Vec::new();
        for round in 0..2 {
            let out = format!("out-{round}");
            let trace = format!("out-{round}.trace");
            let argv: Vec<&str> = args
                .iter()
                .map(|&a| match a {
                    "OUT" => out.as_str(),
                    "OUT.trace" => trace.as_str(),
                    a => a,
                })
                .collect();
            let text = cli(dir, &argv)?;
            let files: Vec<Option<Vec<u8>>> = [&out, &trace].iter().map(|f| std::fs::read(dir.join(f)).ok()).collect();
            let _ = std::fs::remove_file(dir.join(&out));
            let _ = std::fs::remove_file(dir.join(&trace));
            captures.push((text, files));
        }
        ensure(captures[0] == captures[1], || format!("`{}` is not byte-deterministic", args[0]))?;
    }
    Ok("model bit-exact; dataset and stroke byte-identical; gen/train/process/eval deterministic".into())
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().expect("temp dir");
    let full = full_scale_run(dir.path());
    let from_run = |f: fn(&FullScaleRun) -> Outcome| match &full {
        Ok(r) => f(r),
        Err(e) => Err(e.clone()),
    };
    let results: Vec<(u32, Outcome)> = vec![
        (1, from_run(criterion_1)),
        (2, from_run(criterion_2)),
        (3, from_run(criterion_3)),
        (4, criterion_4()),
        (5, criterion_5()),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
        (10, criterion_10()),
        (11, if full.is_ok() { criterion_11(dir.path()) } else { Err("full-scale run failed".into()) }),
    ];
    let mut failed = 0;
    for (n, outcome) in &results {
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
