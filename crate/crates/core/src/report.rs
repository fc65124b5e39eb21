//! JSON run reports.
//!
//! Reports echo the full configuration and are byte-identical across runs
//! with the same config. Wall-clock timing breaks that, so it is opt-in.

use serde::Serialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Report<C: Serialize, R: Serialize> {
    pub schema_version: u32,
    pub command: String,
    pub config: C,
    pub results: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<u64>,
}

impl<C: Serialize, R: Serialize> Report<C, R> {
    pub fn new(command: &str, config: C, results: R) -> Report<C, R> {
        Report { schema_version: SCHEMA_VERSION, command: command.to_string(), config, results, timing_ms: None }
    }

    pub fn with_timing(mut self, ms: Option<u64>) -> Report<C, R> {
        self.timing_ms = ms;
        self
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn timing_is_omitted_by_default() {
        let r = Report::new("wieferich", serde_json::json!({"p": 2}), vec![1093u64, 3511]);
        let s = r.to_json();
        assert!(s.contains("\"schema_version\": 1"));
        assert!(!s.contains("timing_ms"));
        assert!(r.clone().with_timing(Some(5)).to_json().contains("\"timing_ms\": 5"));
        assert_eq!(s, Report::new("wieferich", serde_json::json!({"p": 2}), vec![1093u64, 3511]).to_json());
    }
}
