use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
    NodeLimit,
    Error,
    Skipped,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "Optimal",
            Status::Feasible => "Feasible",
            Status::Infeasible => "Infeasible",
            Status::TimeLimit => "TimeLimit",
            Status::NodeLimit => "NodeLimit",
            Status::Error => "Error",
            Status::Skipped => "Skipped",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "optimal" => Status::Optimal,
            "feasible" => Status::Feasible,
            "infeasible" => Status::Infeasible,
            "timelimit" => Status::TimeLimit,
            "nodelimit" => Status::NodeLimit,
            "error" => Status::Error,
            "skipped" => Status::Skipped,
            _ => return Err(format!("unknown status {s:?}")),
        })
    }
}

/// Outcome of one solve, from the built-in solver or an external backend.
///
/// `gap` is `(objective - bound) / objective`; `None` stands for an infinite
/// gap (no incumbent).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub backend: String,
    pub status: Status,
    pub objective: Option<f64>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub nodes: u64,
    pub wall_time_s: f64,
    /// Number of batches per processing-time structure, ascending time order.
    pub feedback_flows: Vec<u64>,
    /// `(node, objective)` each time the incumbent improved.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub improvements: Vec<(u64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

impl SolveReport {
    pub fn empty(backend: impl Into<String>, status: Status) -> Self {
        Self {
            backend: backend.into(),
            status,
            objective: None,
            bound: None,
            gap: None,
            nodes: 0,
            wall_time_s: 0.0,
            feedback_flows: Vec::new(),
            improvements: Vec::new(),
            message: None,
        }
    }

    pub fn with_message(mut self, message: impl Into<String>) -> Self {
        self.message = Some(message.into());
        self
    }

    /// Pretty JSON with fields in declaration order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Relative gap against the incumbent; `None` when there is no incumbent.
pub fn relative_gap(objective: Option<f64>, bound: Option<f64>) -> Option<f64> {
    let obj = objective?;
    let bound = bound?;
    if obj.abs() < 1e-12 {
        return Some(if (obj - bound).abs() < 1e-12 { 0.0 } else { f64::INFINITY });
    }
    Some(((obj - bound) / obj).max(0.0))
}
