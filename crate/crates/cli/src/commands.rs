use std::io::Write;
use std::ops::RangeInclusive;
use std::path::Path;

use depthstroke_core::features::FeatureConfig;
use depthstroke_core::formats::{load_stroke, save_curve};
use depthstroke_core::mlp::{self, Evaluation, MlpModel, NetworkTopology, TrainingConfig};
use depthstroke_core::synth::{generate_dataset, ClassCounts};
use depthstroke_core::{run_chain, CurveClass, LabeledDataset, PipelineConfig, ProjectionParams, SmoothingSpec};

use crate::args::{
    ClassifyArgs, Cli, Command, ConfigArgs, EvalArgs, FeatureArgs, GenArgs, ProcessArgs, ProjectionArgs, TrainArgs,
};
use crate::error::CliError;
use crate::service;
use crate::wire::ProcessResponse;

pub type CmdResult = Result<(), CliError>;

pub fn run(cli: Cli, out: &mut dyn Write) -> CmdResult {
    match cli.command {
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Eval(a) => cmd_eval(&a, out),
        Command::Classify(a) => cmd_classify(&a, out),
        Command::Process(a) => cmd_process(&a, out),
        Command::Config(a) => cmd_config(&a, out),
        Command::Serve(a) => service::run_blocking(service::ServiceConfig::from_args(&a)),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> CmdResult {
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn write_file(path: &Path, text: &str) -> CmdResult {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> CmdResult {
    let counts = ClassCounts {
        spiral: a.spiral,
        forward: a.forward,
        backward: a.backward,
    };
    let ds = generate_dataset(counts, a.seed)?;
    ds.save(&a.out)?;
    let [s, f, b] = ds.class_counts();
    emit(
        out,
        &format!("spiral: {s}\nforward: {f}\nbackward: {b}\ntotal: {}\n", ds.len()),
    )
}

/// Parses `a..b` or `a..=b`, both inclusive of `b`.
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>, CliError> {
    let bad = || CliError::Usage(format!("invalid range `{s}`; expected e.g. 1..100"));
    let (lo, hi) = s.split_once("..").ok_or_else(bad)?;
    let hi = hi.strip_prefix('=').unwrap_or(hi);
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> CmdResult {
    let feature = FeatureConfig {
        fft_len: a.fft_len,
        n_features: a.features,
        ..FeatureConfig::default()
    };
    feature.validate()?;
    let cfg = TrainingConfig {
        max_iterations: a.max_iters,
        target_mse: a.target_mse,
        lr_initial: a.lr,
        lr_up: a.lr_up,
        lr_down: a.lr_down,
        seed: a.seed,
    };
    cfg.validate()?;
    let data = LabeledDataset::load(&a.data)?;

    if let Some(range) = &a.sweep {
        let report = mlp::topology_sweep(&data, &feature, &cfg, parse_range(range)?)?;
        let mut text = String::from("rank  topology      final_mse       epochs\n");
        for (i, row) in report.rows.iter().enumerate() {
            text.push_str(&format!(
                "{:>4}  {:<12}  {:<14.6e}  {:>6}\n",
                i + 1,
                row.topology,
                row.final_mse,
                row.epochs
            ));
        }
        text.push_str(&format!("two-thirds rule candidate: {} hidden\n", report.two_thirds_candidate));
        if let Some(path) = &a.report {
            write_file(path, &serde_json::to_string_pretty(&report).expect("report serializes"))?;
        }
        return emit(out, &text);
    }

    let topology = match &a.topology {
        Some(t) => NetworkTopology::parse(t, feature.n_features)?,
        None => NetworkTopology::single_hidden(
            feature.n_features,
            mlp::two_thirds_rule(feature.n_features, mlp::N_CLASSES),
        )?,
    };
    if a.max_iters == 0 {
        log::warn!("--max-iters 0: writing an untrained model");
    }
    let (model, report) = mlp::train_with_restarts(&data, &topology, &feature, &cfg, a.restarts)?;
    let path = a.out.as_ref().expect("clap requires --out without --sweep");
    mlp::save_model(&model, path)?;
    if let Some(report_path) = &a.report {
        write_file(report_path, &serde_json::to_string(&report).expect("report serializes"))?;
    }
    let stop = match report.stop {
        mlp::StopReason::TargetReached => "target_reached",
        mlp::StopReason::MaxIterations => "max_iterations",
    };
    emit(
        out,
        &format!(
            "topology: {topology}\nfinal_mse: {}\nepochs: {}\nstop: {stop}\n",
            report.final_mse, report.epochs
        ),
    )
}

fn load_model(path: &Path, expected: &FeatureArgs) -> Result<MlpModel, CliError> {
    let model = mlp::load_model(path)?;
    let have = model.feature_config();
    let fft_ok = expected.fft_len.is_none_or(|n| n == have.fft_len);
    let feat_ok = expected.features.is_none_or(|n| n == have.n_features);
    if !(fft_ok && feat_ok) {
        return Err(CliError::Validation(format!(
            "feature config mismatch: model {} uses fft_len={} features={}, flags ask for fft_len={} features={}",
            path.display(),
            have.fft_len,
            have.n_features,
            expected.fft_len.map_or("-".into(), |v| v.to_string()),
            expected.features.map_or("-".into(), |v| v.to_string()),
        )));
    }
    Ok(model)
}

/// Rows in backward, forward, spiral order with the classified-curve
/// columns in the same order.
const REPORT_ORDER: [CurveClass; 3] = [CurveClass::Backward, CurveClass::Forward, CurveClass::Spiral];

pub fn format_evaluation(topology: &NetworkTopology, eval: &Evaluation) -> String {
    let mut t = format!("classification result for {topology}\n");
    t.push_str(&format!(
        "{:<10} {:>6} {:>9} {:>8} {:>7} {:>8} {:>14} {:>8}\n",
        "class", "tested", "backward", "forward", "spiral", "correct", "misclassified", "rate"
    ));
    for truth in REPORT_ORDER {
        let total = eval.row_total(truth);
        let correct = eval.correct(truth);
        let rate = eval
            .accuracy(truth)
            .map_or("-".to_string(), |r| format!("{:.1}%", 100.0 * r));
        t.push_str(&format!(
            "{:<10} {:>6} {:>9} {:>8} {:>7} {:>8} {:>14} {:>8}\n",
            truth.as_str(),
            total,
            eval.count(truth, CurveClass::Backward),
            eval.count(truth, CurveClass::Forward),
            eval.count(truth, CurveClass::Spiral),
            correct,
            total - correct,
            rate
        ));
    }
    t.push_str(&format!("overall: {:.1}%\n", 100.0 * eval.overall_accuracy()));
    t.push_str("misclassifications:\n");
    let mut any = false;
    for truth in REPORT_ORDER {
        for predicted in REPORT_ORDER {
            let n = eval.count(truth, predicted);
            if truth != predicted && n > 0 {
                any = true;
                t.push_str(&format!("  {truth} -> {predicted}: {n}\n"));
            }
        }
    }
    if !any {
        t.push_str("  none\n");
    }
    t.push_str(&format!("trend: {}\n", trend_comparison(eval)));
    t
}

/// Compares forward-curve errors with the reference trend (errors go to
/// spiral, never to backward).
pub fn trend_comparison(eval: &Evaluation) -> String {
    let to_spiral = eval.count(CurveClass::Forward, CurveClass::Spiral);
    let to_backward = eval.count(CurveClass::Forward, CurveClass::Backward);
    let verdict = match (to_spiral, to_backward) {
        (0, 0) => "no forward errors to compare",
        (_, 0) => "consistent",
        _ => "inconsistent",
    };
    format!(
        "forward errors -> spiral {to_spiral}, -> backward {to_backward} (reference: spiral only, never backward): {verdict}"
    )
}

pub fn cmd_eval(a: &EvalArgs, out: &mut dyn Write) -> CmdResult {
    let model = load_model(&a.model, &a.feature)?;
    let data = LabeledDataset::load(&a.data)?;
    let eval = mlp::evaluate(&model, &data)?;
    let trend = trend_comparison(&eval);
    if trend.ends_with("inconsistent") {
        log::warn!("misclassification trend differs from reference: {trend}");
    } else {
        log::info!("misclassification trend: {trend}");
    }
    emit(out, &format_evaluation(model.topology(), &eval))
}

fn format_scores(scores: &[f64; 3]) -> String {
    CurveClass::ALL
        .iter()
        .zip(scores)
        .map(|(c, s)| format!("{c}={s}"))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn cmd_classify(a: &ClassifyArgs, out: &mut dyn Write) -> CmdResult {
    let model = load_model(&a.model, &a.feature)?;
    let stroke = load_stroke(&a.stroke)?;
    let c = model.classify(&depthstroke_core::stroke::extract_profile(&stroke))?;
    emit(out, &format!("class: {}\nscores: {}\n", c.class, format_scores(&c.scores)))
}

pub fn load_pipeline(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            PipelineConfig::from_json(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))
        }
    }
}

pub fn projection_params(a: &ProjectionArgs) -> Result<ProjectionParams, CliError> {
    let p = ProjectionParams {
        depth_scale: a.depth_scale,
        invert: a.invert,
    };
    p.validate()?;
    Ok(p)
}

pub fn cmd_process(a: &ProcessArgs, out: &mut dyn Write) -> CmdResult {
    let pipeline = load_pipeline(a.config.as_deref())?;
    let projection = projection_params(&a.projection)?;
    let stroke = load_stroke(&a.stroke)?;
    let (class, scores) = match (a.class, &a.model) {
        (Some(class), _) => (class, None),
        (None, Some(path)) => {
            let model = load_model(path, &a.feature)?;
            let c = model.classify(&depthstroke_core::stroke::extract_profile(&stroke))?;
            (c.class, Some(c.scores))
        }
        (None, None) => return Err(CliError::Usage("either --model or --class is required".into())),
    };
    let spec = a.smooth.map(|method| SmoothingSpec {
        method,
        samples_per_segment: a.samples_per_segment,
    });
    let result = run_chain(&stroke, class, &pipeline, &projection, spec)?;
    save_curve(&a.out, &result.curve)?;
    if let Some(path) = &a.smoothed_out {
        save_curve(path, &result.smoothed)?;
    }
    if let Some(path) = &a.trace_out {
        let dump = ProcessResponse::new(scores, &result, true);
        write_file(path, &serde_json::to_string(&dump).expect("trace serializes"))?;
    }
    let mut text = format!("class: {class}\n");
    if let Some(s) = &scores {
        text.push_str(&format!("scores: {}\n", format_scores(s)));
    }
    text.push_str(&format!(
        "points: {}\nsmoothing: {}\nsmoothed_points: {}\n",
        result.curve.len(),
        result.smoothing.method,
        result.smoothed.len()
    ));
    for flag in &result.processed.flags {
        text.push_str(&format!("flag: {flag}\n"));
    }
    emit(out, &text)
}

pub fn cmd_config(a: &ConfigArgs, out: &mut dyn Write) -> CmdResult {
    let cfg = load_pipeline(a.file.as_deref())?;
    let mut text = cfg.to_json_pretty();
    text.push('\n');
    emit(out, &text)
}
