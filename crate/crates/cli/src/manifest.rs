//! Run manifests: the full description of a run, emitted alongside every
//! result, sufficient to reproduce it bit-identically.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::spec_json::SpecConfig;

/// Everything a run needs. Replaying a manifest re-executes the same
/// request under the same seed; results are identical for any thread
/// count, so `threads` is advisory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub request: Request,
    pub seed: u64,
    pub threads: usize,
    pub format: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Request {
    Estimate {
        spec: SpecConfig,
        n_values: Vec<u64>,
        theta: Vec<f64>,
        epsilon: f64,
        trials: u64,
    },
    Depth {
        spec: SpecConfig,
        theta: Vec<f64>,
        epsilon: f64,
        dirs: u64,
        trials: u64,
    },
    Bounds {
        d: u64,
        alpha: f64,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        n: Option<u64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        m: Option<u64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        p_m: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        rho3: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        m3: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        norm_bound: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        eps: Option<f64>,
    },
    Cubature {
        spec: SpecConfig,
        mode: String,
        ell: u64,
        max_k: u32,
        tol: f64,
        max_iter: u64,
    },
    Interior {
        spec: SpecConfig,
        alpha: f64,
        epsilon: f64,
        delta: f64,
        trials: u64,
    },
    Reproduce {
        suite: String,
        options: BTreeMap<String, serde_json::Value>,
    },
}

impl Request {
    pub fn command_name(&self) -> &'static str {
        match self {
            Request::Estimate { .. } => "estimate",
            Request::Depth { .. } => "depth",
            Request::Bounds { .. } => "bounds",
            Request::Cubature { .. } => "cubature",
            Request::Interior { .. } => "interior",
            Request::Reproduce { .. } => "reproduce",
        }
    }
}

impl RunManifest {
    pub fn new(request: Request, seed: u64, threads: usize, format: &str, out: Option<String>) -> Self {
        RunManifest {
            command: request.command_name().to_string(),
            request,
            seed,
            threads,
            format: format.to_string(),
            out,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serialization") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| format!("manifest: {e}"))
    }
}
