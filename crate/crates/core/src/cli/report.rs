use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::config::Scenario;
use crate::galerkin::SpaceSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    /// SHA-256 of the config and problem documents.
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
}

pub fn version_and_provenance(
    config: &[u8],
    problem: &[u8],
    seed: u64,
    threads: usize,
) -> Provenance {
    let mut h = Sha256::new();
    for part in [config, problem] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part);
    }
    Provenance {
        tool: "veldt",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: hex::encode(h.finalize()),
        seed,
        threads,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl AuditLine {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    AuditFailure,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSummary {
    pub name: String,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N")]
    pub components: usize,
    pub constraints: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretizationSummary {
    pub spec: SpaceSpec,
    pub dim: usize,
    pub fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub provenance: Provenance,
    pub scenario: Scenario,
    /// Theory items exercised by the scenario.
    pub anchors: Vec<&'static str>,
    pub problem: ProblemSummary,
    pub discretization: DiscretizationSummary,
    pub status: Status,
    pub audits: Vec<AuditLine>,
    pub files: Vec<String>,
    pub result: Value,
    pub error: Option<String>,
}

pub fn anchors(s: Scenario) -> Vec<&'static str> {
    match s {
        Scenario::Validate => vec![
            "growth-hypothesis",
            "derived-growth-bounds",
            "gradient-hessian-assembly",
            "principal-compact-split",
            "garding-inequality",
        ],
        Scenario::Spectrum => vec!["pencil-eigenspaces", "morse-index-formula", "index-jump"],
        Scenario::Reduce => vec![
            "complement-equation",
            "psi-vanishes-at-origin",
            "lipschitz-bound",
            "reduced-functional",
            "reduced-hessian-identity",
        ],
        Scenario::Bifurcate => vec![
            "necessary-condition",
            "sufficient-conditions",
            "bifurcation-alternatives",
            "index-jump",
            "translation-orbits",
        ],
        Scenario::Morse => vec!["morse-inequalities", "morse-identity"],
    }
}

impl Report {
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let p = &self.provenance;
        let _ = writeln!(
            s,
            "{} {} scenario {}",
            p.tool,
            p.version,
            self.scenario.name()
        );
        let _ = writeln!(s, "config sha256 {}", p.config_sha256);
        let _ = writeln!(s, "seed {} threads {}", p.seed, p.threads);
        let _ = writeln!(
            s,
            "problem {} (n={}, m={}, N={}), dim {}",
            self.problem.name,
            self.problem.n,
            self.problem.m,
            self.problem.components,
            self.discretization.dim
        );
        let _ = writeln!(s, "anchors {}", self.anchors.join(", "));
        let status = match self.status {
            Status::Pass => "pass",
            Status::AuditFailure => "audit failure",
            Status::Error => "error",
        };
        let _ = writeln!(s, "status {status}");
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error {e}");
        }
        for a in &self.audits {
            let _ = writeln!(
                s,
                "[{}] {}: {}",
                if a.passed { "pass" } else { "FAIL" },
                a.name,
                a.detail
            );
        }
        for f in &self.files {
            let _ = writeln!(s, "wrote {f}");
        }
        s
    }
}
