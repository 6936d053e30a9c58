//! Machine-readable command reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use speclat::ToleranceConfig;

use crate::doc::ElementDocument;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Verdict {
    pub fn new(check: impl Into<String>, pass: bool) -> Self {
        Self {
            check: check.into(),
            pass,
            residual: None,
            tolerance: None,
            detail: None,
        }
    }

    /// Passes iff `residual <= tolerance`.
    pub fn bounded(check: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            residual: Some(residual),
            tolerance: Some(tolerance),
            ..Self::new(check, residual <= tolerance)
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub check: String,
    pub elements: Vec<(String, ElementDocument)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub eps_eig: f64,
    pub eps_proj: f64,
    pub eps_recon: f64,
}

impl From<&ToleranceConfig> for Tolerances {
    fn from(t: &ToleranceConfig) -> Self {
        Self {
            eps_eig: t.eps_eig,
            eps_proj: t.eps_proj,
            eps_recon: t.eps_recon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    /// SHA-256 over the input files, in argument order.
    pub inputs_digest: String,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub verdicts: Vec<Verdict>,
    pub witnesses: Vec<Witness>,
    pub flags: Vec<String>,
    pub result: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, seed: u64, tol: &ToleranceConfig) -> Self {
        Self {
            command: command.into(),
            inputs_digest: digest(&[]),
            seed,
            tolerances: tol.into(),
            verdicts: Vec::new(),
            witnesses: Vec::new(),
            flags: Vec::new(),
            result: serde_json::Value::Null,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.verdicts {
            let _ = write!(out, "{}: {}", v.check, v.pass);
            if let (Some(r), Some(t)) = (v.residual, v.tolerance) {
                let _ = write!(out, " (residual {r:.3e}, tolerance {t:.1e})");
            }
            if let Some(d) = &v.detail {
                let _ = write!(out, " [{d}]");
            }
            out.push('\n');
        }
        for w in &self.witnesses {
            let labels: Vec<&str> = w.elements.iter().map(|(l, _)| l.as_str()).collect();
            let _ = writeln!(out, "witness for {}: {}", w.check, labels.join(", "));
        }
        for f in &self.flags {
            let _ = writeln!(out, "note: {f}");
        }
        if !self.result.is_null() {
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&self.result).expect("values serialize")
            );
        }
        out
    }
}

pub fn digest(inputs: &[Vec<u8>]) -> String {
    let mut h = Sha256::new();
    for bytes in inputs {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}
