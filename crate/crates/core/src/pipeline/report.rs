use serde_json::{json, Map, Value};

use super::Module;
use crate::numfmt::json_float;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub module: Module,
    pub name: String,
    pub passed: bool,
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub note: Option<String>,
}

impl Check {
    /// `residual ≤ tolerance`; NaN never passes.
    pub fn residual(module: Module, name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            module,
            name: name.into(),
            passed: residual <= tolerance,
            residual: Some(residual),
            tolerance: Some(tolerance),
            note: None,
        }
    }

    pub fn flag(module: Module, name: impl Into<String>, passed: bool) -> Self {
        Check {
            module,
            name: name.into(),
            passed,
            residual: None,
            tolerance: None,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("module".into(), Value::from(self.module.name()));
        m.insert("name".into(), Value::from(self.name.clone()));
        m.insert("passed".into(), Value::from(self.passed));
        if let Some(r) = self.residual {
            m.insert("residual".into(), json_float(r));
        }
        if let Some(t) = self.tolerance {
            m.insert("tolerance".into(), json_float(t));
        }
        if let Some(n) = &self.note {
            m.insert("note".into(), Value::from(n.clone()));
        }
        Value::Object(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepStatus {
    Passed,
    Failed,
    Skipped,
    NotApplicable,
}

impl StepStatus {
    pub fn tag(self) -> &'static str {
        match self {
            StepStatus::Passed => "passed",
            StepStatus::Failed => "failed",
            StepStatus::Skipped => "skipped",
            StepStatus::NotApplicable => "not_applicable",
        }
    }
}

pub const STEP_NAMES: [&str; 5] = ["built", "checked", "derived", "reduced", "constructed"];

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub name: &'static str,
    pub status: StepStatus,
    pub checks: Vec<Check>,
    pub data: Map<String, Value>,
}

impl Step {
    pub fn new(name: &'static str) -> Self {
        Step {
            name,
            status: StepStatus::Passed,
            checks: Vec::new(),
            data: Map::new(),
        }
    }

    pub fn set(&mut self, key: &str, v: Value) {
        self.data.insert(key.into(), v);
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "status": self.status.tag(),
            "checks": self.checks.iter().map(Check::to_json).collect::<Vec<_>>(),
            "data": Value::Object(self.data.clone()),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub config_name: String,
    pub config_hash: String,
    pub scalar: &'static str,
    pub mode: &'static str,
    pub only: Option<Module>,
    pub steps: Vec<Step>,
    pub reduced_groupoid: Option<Value>,
    pub presentation: Option<String>,
}

impl PipelineReport {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.steps.iter().flat_map(|s| s.checks.iter())
    }

    pub fn passed(&self) -> bool {
        self.checks().all(|c| c.passed)
    }

    pub fn step(&self, name: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks().find(|c| c.name == name)
    }

    /// 0 when every check that ran passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> Value {
        let failed: Vec<Value> = self
            .checks()
            .filter(|c| !c.passed)
            .map(|c| Value::from(format!("{}: {}", c.module.name(), c.name)))
            .collect();
        let total = self.checks().count();
        json!({
            "tool": {"name": "sgq", "version": env!("CARGO_PKG_VERSION")},
            "config": {"name": self.config_name, "sha256": self.config_hash},
            "scalar": self.scalar,
            "mode": self.mode,
            "only": self.only.map(|m| m.name()),
            "steps": self.steps.iter().map(Step::to_json).collect::<Vec<_>>(),
            "reduced_groupoid": self.reduced_groupoid,
            "presentation": self.presentation,
            "verification": {
                "checks": total,
                "passed": total - failed.len(),
                "failed": failed,
                "ok": self.passed(),
            },
        })
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("report serializes");
        s.push('\n');
        s
    }
}
