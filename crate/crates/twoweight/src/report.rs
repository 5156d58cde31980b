//! Structured certification reports with deterministic serialization.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportParams {
    #[serde(rename = "N")]
    pub n: u32,
    pub rho: String,
    /// sigma truncation generations
    #[serde(rename = "n")]
    pub n_gens: u32,
    /// omega stage depth
    pub m: u32,
    pub depth: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct DepthPoint {
    pub depth: u32,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub params: ReportParams,
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value_exact: Option<String>,
    pub bound_proxy: f64,
    pub pass: bool,
    #[serde(default)]
    pub witnesses: Vec<String>,
    #[serde(default)]
    pub per_depth: Vec<DepthPoint>,
    pub runtime_ms: u64,
    pub seed: u64,
}

impl CheckReport {
    /// Fixed-precision rounding so serialized floats are reproducible and
    /// human-diffable.
    pub fn canonicalize(&mut self) {
        self.value = round12(self.value);
        self.bound_proxy = round12(self.bound_proxy);
        for p in &mut self.per_depth {
            p.value = round12(p.value);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// CSV rows of the per-depth series: `name,depth,value`.
    pub fn per_depth_csv(&self) -> String {
        let mut out = String::from("name,depth,value\n");
        for p in &self.per_depth {
            out.push_str(&format!("{},{},{:.12e}\n", self.name, p.depth, p.value));
        }
        out
    }
}

pub fn round12(v: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    format!("{v:.12e}").parse().unwrap_or(v)
}

/// Boundedness proxy for a ratio series over increasing depths: max/min
/// within `spread_limit` and each of the final `tail` relative increments
/// below `increment_limit`.
#[derive(Clone, Debug)]
pub struct SeriesCheck {
    pub max_over_min: f64,
    pub tail_increments: Vec<f64>,
    pub pass: bool,
}

pub fn bounded_series_proxy(
    values: &[f64],
    spread_limit: f64,
    increment_limit: f64,
    tail: usize,
) -> SeriesCheck {
    if values.is_empty() {
        return SeriesCheck { max_over_min: f64::NAN, tail_increments: vec![], pass: false };
    }
    let max = values.iter().cloned().fold(f64::MIN, f64::max);
    let min = values.iter().cloned().fold(f64::MAX, f64::min);
    let max_over_min = if min > 0.0 { max / min } else { f64::INFINITY };
    let mut tail_increments = Vec::new();
    let k = values.len().saturating_sub(tail);
    for w in values.windows(2).skip(k.saturating_sub(1)) {
        if w[0] != 0.0 {
            tail_increments.push((w[1] - w[0]) / w[0]);
        }
    }
    let pass = values.len() == 1
        || (max_over_min <= spread_limit && tail_increments.iter().all(|d| *d < increment_limit));
    SeriesCheck { max_over_min, tail_increments, pass }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_proxy_accepts_stable_and_rejects_growth() {
        let stable = [1.0, 1.1, 1.05, 1.06, 1.06];
        let chk = bounded_series_proxy(&stable, 10.0, 0.05, 2);
        assert!(chk.pass, "{chk:?}");

        let growing = [1.0, 2.0, 4.0, 8.0, 16.0];
        let chk = bounded_series_proxy(&growing, 10.0, 0.05, 2);
        assert!(!chk.pass);
    }

    #[test]
    fn canonical_json_is_reproducible() {
        let mut r = CheckReport {
            name: "demo".into(),
            params: ReportParams { n: 16, rho: "3/4".into(), n_gens: 6, m: 8, depth: 8 },
            value: 0.1 + 0.2,
            value_exact: None,
            bound_proxy: 10.0,
            pass: true,
            witnesses: vec![],
            per_depth: vec![DepthPoint { depth: 4, value: 1.0 / 3.0 }],
            runtime_ms: 5,
            seed: 1,
        };
        r.canonicalize();
        let a = r.to_json();
        r.canonicalize();
        assert_eq!(a, r.to_json());
        assert!(a.contains("\"N\": 16"));
    }
}
