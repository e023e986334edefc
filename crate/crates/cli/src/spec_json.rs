//! JSON format for distribution specs — the contract behind `--spec`.
//!
//! One object per spec, tagged by `kind`:
//!
//! ```json
//! {"kind": "gaussian", "dim": 2}
//! {"kind": "rademacher", "dim": 3}
//! {"kind": "two_point", "epsilon": 0.1}
//! {"kind": "spiked_box", "dim": 2, "epsilon": 0.2}
//! {"kind": "trig", "dim": 3}
//! {"kind": "empirical", "dim": 2, "points": [[0,0],[1,0],[0,1]], "weights": [0.5,0.25,0.25]}
//! {"kind": "smoothed", "base": {"kind": "gaussian", "dim": 2}, "radius": 0.1}
//! ```
//!
//! `weights` may be omitted for uniform empirical measures; `smoothed`
//! nests an arbitrary base spec.

use randhull_core::dist::DistributionSpec;
use randhull_core::geom::{PointSet, WeightedMeasure};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpecConfig {
    Gaussian { dim: usize },
    Rademacher { dim: usize },
    TwoPoint { epsilon: f64 },
    SpikedBox { dim: usize, epsilon: f64 },
    Trig { dim: usize },
    Empirical {
        dim: usize,
        points: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Smoothed { base: Box<SpecConfig>, radius: f64 },
}

impl SpecConfig {
    /// Validate and build the sampleable spec.
    pub fn build(&self) -> Result<DistributionSpec, String> {
        match self {
            SpecConfig::Gaussian { dim } => {
                DistributionSpec::gaussian(*dim).map_err(|e| format!("dim: {e}"))
            }
            SpecConfig::Rademacher { dim } => {
                DistributionSpec::rademacher(*dim).map_err(|e| format!("dim: {e}"))
            }
            SpecConfig::TwoPoint { epsilon } => {
                DistributionSpec::two_point(*epsilon).map_err(|e| format!("epsilon: {e}"))
            }
            SpecConfig::SpikedBox { dim, epsilon } => {
                DistributionSpec::spiked_box(*dim, *epsilon)
                    .map_err(|e| format!("dim/epsilon: {e}"))
            }
            SpecConfig::Trig { dim } => {
                DistributionSpec::trig(*dim).map_err(|e| format!("dim: {e}"))
            }
            SpecConfig::Empirical { dim, points, weights } => {
                let mut flat = Vec::with_capacity(points.len() * dim);
                for (i, p) in points.iter().enumerate() {
                    if p.len() != *dim {
                        return Err(format!(
                            "points[{i}]: expected {dim} coordinates, got {}",
                            p.len()
                        ));
                    }
                    flat.extend_from_slice(p);
                }
                let support =
                    PointSet::from_flat(*dim, flat).map_err(|e| format!("points: {e}"))?;
                let measure = match weights {
                    None => WeightedMeasure::uniform(support),
                    Some(w) => WeightedMeasure::new(support, w.clone())
                        .map_err(|e| format!("weights: {e}"))?,
                };
                Ok(DistributionSpec::empirical(measure))
            }
            SpecConfig::Smoothed { base, radius } => {
                let b = base.build()?;
                b.smooth(*radius).map_err(|e| format!("radius: {e}"))
            }
        }
    }
}

/// Parse `--spec`: a path to a JSON file, or inline JSON (starts with '{').
pub fn parse_spec_arg(arg: &str) -> Result<(SpecConfig, DistributionSpec), String> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| format!("spec: cannot read {arg}: {e}"))?
    };
    let config: SpecConfig =
        serde_json::from_str(&text).map_err(|e| format!("spec: {e}"))?;
    let spec = config.build().map_err(|e| format!("spec: {e}"))?;
    Ok((config, spec))
}
