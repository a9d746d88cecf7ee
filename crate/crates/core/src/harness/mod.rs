//! Deterministic experiment runners. Each writes one or more CSV tables and a
//! JSON summary; sweep points run in parallel but rows are assembled in sweep
//! order.

mod config;
mod experiments;
mod table;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

pub use config::ExperimentConfig;
pub use experiments::{
    classical_gap, mode_sweep, AdaptiveExp, AdversaryExp, AuditExp, ClassicalExp, ComposeExp, DephasingExp, HwNoiseExp,
    ParetoExp, SpectrumExp, SweepRow, TradeoffExp,
};
pub use table::{Cell, Table};

/// A named pass/fail threshold evaluated by a runner.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub experiment: String,
    pub tables: Vec<Table>,
    pub summary: Map<String, Value>,
    pub checks: Vec<Check>,
    /// Extra artifacts as (file name, contents).
    pub files: Vec<(String, String)>,
}

impl RunOutput {
    pub fn new(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            tables: Vec::new(),
            summary: Map::new(),
            checks: Vec::new(),
            files: Vec::new(),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.summary.insert(key.to_string(), v);
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn summary_f64(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(Value::as_f64)
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn summary_json(&self) -> Result<String> {
        let mut m = self.summary.clone();
        m.insert("experiment".into(), Value::from(self.experiment.clone()));
        m.insert("checks".into(), serde_json::to_value(&self.checks)?);
        Ok(serde_json::to_string_pretty(&Value::Object(m))?)
    }

    /// Writes `{exp}_{table}.csv`, `{exp}_summary.json` and any extra files.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, body: &str| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            written.push(path);
            Ok(())
        };
        for t in &self.tables {
            put(format!("{}_{}.csv", self.experiment, t.name), &t.to_csv())?;
        }
        put(format!("{}_summary.json", self.experiment), &self.summary_json()?)?;
        for (name, body) in &self.files {
            put(name.clone(), body)?;
        }
        Ok(written)
    }
}

pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn run(&self, cfg: &ExperimentConfig) -> Result<RunOutput>;
}

pub fn experiments() -> Vec<Arc<dyn Experiment>> {
    vec![
        Arc::new(TradeoffExp),
        Arc::new(SpectrumExp),
        Arc::new(ParetoExp),
        Arc::new(HwNoiseExp),
        Arc::new(ComposeExp),
        Arc::new(AdversaryExp),
        Arc::new(AdaptiveExp),
        Arc::new(DephasingExp),
        Arc::new(ClassicalExp),
        Arc::new(AuditExp),
    ]
}

pub fn experiment(name: &str) -> Result<Arc<dyn Experiment>> {
    experiments()
        .into_iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| Error::Unknown { kind: "experiment", name: name.to_string() })
}
