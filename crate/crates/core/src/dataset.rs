//! Labeled pressure profiles and their line-delimited file format.
//!
//! Each line is one record: `{"class":"spiral","pressure":[...]}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stroke::{CurveClass, PressureProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    items: Vec<(PressureProfile, CurveClass)>,
}

#[derive(Serialize, Deserialize)]
struct Record {
    class: CurveClass,
    pressure: Vec<f64>,
}

impl LabeledDataset {
    pub fn new(items: Vec<(PressureProfile, CurveClass)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::Dataset("dataset is empty".into()));
        }
        Ok(Self { items })
    }

    pub fn items(&self) -> &[(PressureProfile, CurveClass)] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Item counts in spiral, forward, backward order.
    pub fn class_counts(&self) -> [usize; 3] {
        let mut counts = [0; 3];
        for (_, c) in &self.items {
            counts[c.index()] += 1;
        }
        counts
    }

    /// Training needs every class represented.
    pub fn check_trainable(&self) -> Result<()> {
        let counts = self.class_counts();
        if let Some(missing) = CurveClass::ALL.iter().find(|c| counts[c.index()] == 0) {
            return Err(Error::Dataset(format!("no `{missing}` items to train on")));
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (profile, class) in &self.items {
            let rec = Record {
                class: *class,
                pressure: profile.values().to_vec(),
            };
            out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// Parses line-delimited records; blank lines are skipped and errors
    /// carry the 1-based line number.
    pub fn from_jsonl(text: &str) -> Result<Self> {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |reason: String| Error::Dataset(format!("line {}: {reason}", i + 1));
            let rec: Record = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
            let profile = PressureProfile::new(rec.pressure).map_err(|e| bad(e.to_string()))?;
            items.push((profile, rec.class));
        }
        Self::new(items)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_jsonl(&text)
    }
}
