//! Experiment manifests: a measure plus command-specific grids.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::grid::GridValue;
use fbx::jacobi::BarrierSpec;
use fbx::measures::MeasureSpec;
use fbx::scaling::Averaging;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guard: Option<usize>,
    /// Pass/fail threshold written to experiment summaries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variation: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<GridValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<GridValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<GridValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<GridValue>,
    /// `[k_min, k_max]` for cylinder estimates, or a single level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_grid: Option<GridValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<GridValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub averaging: Option<Averaging>,
    /// `auto`, `moments` or `discrete` (jacobi command).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub route: Option<String>,
    /// Atomic level for the discrete route and for fb_direct.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    /// Zeros of `p_n` used as equilibrium measure (dims command).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equilibrium: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<serde_json::Value>>,
    /// First contraction ratios of generated class members.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub barrier: Option<BarrierSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

/// Problems with the manifest itself (exit code 2).
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestError(pub String);

impl Manifest {
    pub fn load(path: &std::path::Path) -> Result<Self, ManifestError> {
        let text = std::fs::read_to_string(path).map_err(|e| ManifestError(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| ManifestError(format!("{}: {e}", path.display())))
    }

    /// SHA-256 of the canonical serialization of the effective manifest.
    /// The output directory is left out: it does not change any result.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&Manifest { out: None, ..self.clone() }).expect("manifest serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Parsed measure; `None` when the manifest has none.
    pub fn measure(&self) -> Result<Option<MeasureSpec>, fbx::Error> {
        self.measure.as_ref().map(MeasureSpec::from_json_value).transpose()
    }

    pub fn grid(&self, name: &str, value: &Option<GridValue>, default: Option<&str>) -> Result<Vec<f64>, ManifestError> {
        match (value, default) {
            (Some(v), _) => v.values().map_err(|e| ManifestError(format!("{name}: {e}"))),
            (None, Some(d)) => crate::grid::parse_grid(d).map_err(|e| ManifestError(format!("{name}: {e}"))),
            (None, None) => Err(ManifestError(format!("manifest needs {name}"))),
        }
    }
}
