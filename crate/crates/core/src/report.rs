//! Machine-readable summary of a CLI run.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::consistency::Witness;
use crate::construct::{JordanSummary, SignedMeasure, VerifyReport};
use crate::scalar::{Mode, Scalar};

/// Fields are present only for stages that ran.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunReport {
    pub input_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consistency: Option<ConsistencyResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub construction: Option<ConstructionStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<VerifyReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhv: Option<LhvSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expectation: Option<String>,
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    pub fn for_input(bytes: &[u8]) -> Self {
        RunReport {
            input_digest: format!("sha256:{}", hex::encode(Sha256::digest(bytes))),
            ..Default::default()
        }
    }

    /// Runs `f` and records its wall time under `stage`.
    pub fn time<R>(&mut self, stage: &str, f: impl FnOnce() -> R) -> R {
        let start = Instant::now();
        let out = f();
        self.timings_ms
            .insert(stage.to_string(), start.elapsed().as_secs_f64() * 1e3);
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencyResult {
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
}

/// [`Witness`] with 1-based labels.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub site_subset: Vec<usize>,
    pub common_settings: Vec<[usize; 2]>,
    pub tuple_a: String,
    pub tuple_b: String,
    pub max_discrepancy: f64,
}

impl From<&Witness> for WitnessReport {
    fn from(w: &Witness) -> Self {
        WitnessReport {
            site_subset: w.site_subset.iter().map(|s| s + 1).collect(),
            common_settings: w.common_settings.iter().map(|&(n, s)| [n + 1, s + 1]).collect(),
            tuple_a: w.tuple_a.key(),
            tuple_b: w.tuple_b.key(),
            max_discrepancy: w.max_discrepancy,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstructionStats {
    pub atoms: usize,
    /// Exact value in the run's arithmetic mode.
    pub normalization: String,
    pub min_atom: String,
    pub total_variation: String,
    pub jordan: JordanSummary,
}

impl ConstructionStats {
    pub fn of<T: Scalar>(measure: &SignedMeasure<T>) -> Self {
        let jordan = measure.jordan();
        ConstructionStats {
            atoms: measure.atoms().len(),
            normalization: measure.total().to_string(),
            min_atom: measure.min_atom().to_string(),
            total_variation: jordan.total_variation.to_string(),
            jordan: jordan.summary(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LhvSummary {
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_valid: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_gap: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_verified: Option<bool>,
}
