//! Run manifests: the fully resolved configuration of a run, written next to
//! every output. Re-invoking the tool with the recorded flags reproduces the
//! outputs byte-for-byte on the same build; nothing time- or host-dependent
//! is recorded.

use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool_version: &'static str,
    pub subcommand: &'static str,
    /// Canonical law spec (parses back to the identical law).
    pub law: String,
    pub lambda: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quad_rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_events: Option<usize>,
    /// Files this run writes, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, law: &str, lambda: f64) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION"),
            subcommand,
            law: law.to_string(),
            lambda,
            horizon: None,
            seed: None,
            replicas: None,
            k_max: None,
            q: None,
            t_min: None,
            numeric: None,
            quad_rel_tol: None,
            max_events: None,
            outputs: Vec::new(),
        }
    }

    pub fn horizon(mut self, v: f64) -> Self {
        self.horizon = Some(v);
        self
    }
    pub fn seed(mut self, v: u64) -> Self {
        self.seed = Some(v);
        self
    }
    pub fn replicas(mut self, v: u32) -> Self {
        self.replicas = Some(v);
        self
    }
    pub fn k_max(mut self, v: Option<u32>) -> Self {
        self.k_max = v;
        self
    }
    pub fn q(mut self, v: f64) -> Self {
        self.q = Some(v);
        self
    }
    pub fn t_min(mut self, v: f64) -> Self {
        self.t_min = Some(v);
        self
    }
    pub fn numeric(mut self, v: bool) -> Self {
        self.numeric = Some(v);
        self
    }
    pub fn quad_rel_tol(mut self, v: Option<f64>) -> Self {
        self.quad_rel_tol = v;
        self
    }
    pub fn max_events(mut self, v: usize) -> Self {
        self.max_events = Some(v);
        self
    }
    pub fn outputs(mut self, v: Vec<String>) -> Self {
        self.outputs = v;
        self
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }
}
