//! Shared result types for both solvers.

use crate::critical::ConfigurationId;
use serde::{Deserialize, Serialize};

/// Which solver produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Source {
    Wkb,
    Oracle,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::Wkb => write!(f, "wkb"),
            Source::Oracle => write!(f, "oracle"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtremumKind {
    Min,
    Max,
}

impl std::fmt::Display for ExtremumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtremumKind::Min => write!(f, "min"),
            ExtremumKind::Max => write!(f, "max"),
        }
    }
}

/// A real eigenvalue with its certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub value: f64,
    /// The configuration cell whose window produced it (WKB) or `None` for
    /// oracle values.
    pub window: Option<ConfigurationId>,
    /// |Q| (WKB) or |normalized Wronskian| (oracle) at the root.
    pub residual: f64,
    pub source: Source,
}

/// Parameter point where two real eigenvalues merge. The extremum kind (a
/// minimum of `Q` pulled up through zero versus a maximum pulled down) is
/// known for WKB detections; the shooting solver only sees the pair-off.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Degeneracy {
    pub alpha: f64,
    pub l: f64,
    pub energy: f64,
    pub extremum_kind: Option<ExtremumKind>,
    pub source: Source,
}

/// Parameter point where the degeneracy mechanism switches (inflection
/// tangency of the quantisation condition).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cusp {
    pub alpha: f64,
    pub l: f64,
    pub energy: f64,
    /// Residuals (|Q|, |dQ/dE|, |d2Q/dE2|) at the reported point.
    pub residuals: [f64; 3],
}

/// A complex-conjugate eigenvalue pair (reported with `im_e > 0`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexPair {
    pub alpha: f64,
    pub l: f64,
    pub re_e: f64,
    pub im_e: f64,
    pub source: Source,
}

/// Aggregated output of the spectral searches.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<Eigenvalue>,
    pub degeneracies: Vec<Degeneracy>,
    pub cusps: Vec<Cusp>,
    pub complex_pairs: Vec<ComplexPair>,
    /// Per-point diagnostics from partial failures.
    pub notes: Vec<String>,
}

impl SpectrumResult {
    pub fn merge(&mut self, other: SpectrumResult) {
        self.eigenvalues.extend(other.eigenvalues);
        self.degeneracies.extend(other.degeneracies);
        self.cusps.extend(other.cusps);
        self.complex_pairs.extend(other.complex_pairs);
        self.notes.extend(other.notes);
    }

    /// Sorted real eigenvalues.
    pub fn sorted_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigenvalues.iter().map(|e| e.value).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }
}
