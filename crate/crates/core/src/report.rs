//! Deterministic verification reports: one entry per named invariant with
//! its measured worst residual, tolerance and verdict.

use serde::{Deserialize, Serialize};

/// Configuration of a verification run. A fixed seed makes reports
/// byte-identical across runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Overrides every check's sample count when set.
    pub samples: Option<usize>,
    /// Overrides every check's tolerance when set.
    pub tolerance: Option<f64>,
    /// Dimensions of the random instances.
    pub dims: Vec<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            samples: None,
            tolerance: None,
            dims: vec![2, 3, 4],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Worst residual measured across all samples and dimensions.
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    pub fn measure(name: &str, residual: f64, tolerance: f64, samples: usize) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
            samples,
            detail: None,
        }
    }

    pub fn with_detail(mut self, detail: String) -> Self {
        self.detail = Some(detail);
        self
    }

    /// For checks that must detect a violation (a passing probe is a suite
    /// error): `detected` flips into the verdict.
    pub fn expect_violation(name: &str, detected: bool, margin: f64, samples: usize) -> Self {
        Self {
            name: name.into(),
            residual: margin,
            tolerance: f64::INFINITY,
            passed: detected,
            samples,
            detail: Some(if detected {
                "violation detected as required".into()
            } else {
                "expected violation was NOT detected".into()
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub tool_version: String,
    pub seed: u64,
    pub dims: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples_override: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance_override: Option<f64>,
    /// Sorted by check name; independent of execution order.
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
}

impl Report {
    pub fn assemble(cfg: &SuiteConfig, mut checks: Vec<CheckResult>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        let passed = checks.iter().filter(|c| c.passed).count();
        let failed = checks.len() - passed;
        Self {
            tool_version: env!("CARGO_PKG_VERSION").into(),
            seed: cfg.seed,
            dims: cfg.dims.clone(),
            samples_override: cfg.samples,
            tolerance_override: cfg.tolerance,
            checks,
            passed,
            failed,
        }
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }
}

/// Stable per-check RNG stream: mixes the run seed with the check name so
/// results do not depend on execution order.
pub fn check_seed(run_seed: u64, name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h ^ run_seed.rotate_left(17)
}
