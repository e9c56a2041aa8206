#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use depthstroke_core::mlp::{self, MlpModel};
use depthstroke_core::synth::{generate_dataset, ClassCounts};
use depthstroke_core::{FeatureConfig, NetworkTopology, TrainingConfig};

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_depthstroke")
}

pub fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(dir)
        .env("DEPTHSTROKE_LOG", "warn")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Classifier trained once per test binary on the default synthetic
/// training set.
pub fn trained_model() -> &'static MlpModel {
    static MODEL: OnceLock<MlpModel> = OnceLock::new();
    MODEL.get_or_init(|| {
        let data = generate_dataset(ClassCounts::TRAINING, 42).unwrap();
        let topology = NetworkTopology::parse("50:35:3", 50).unwrap();
        mlp::train(&data, &topology, &FeatureConfig::default(), &TrainingConfig::default())
            .unwrap()
            .0
    })
}

pub fn write_model(dir: &Path) -> PathBuf {
    let path = dir.join("model.json");
    mlp::save_model(trained_model(), &path).unwrap();
    path
}
