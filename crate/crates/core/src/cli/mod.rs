//! Configuration-driven front end: load a problem document, run one scenario,
//! write `report.json`, `summary.txt` and CSV plot data.

mod config;
mod report;
mod scenario;

use std::path::{Path, PathBuf};

pub use config::{
    load, Bound, DiscretizationDoc, DomainDoc, IntegrandDoc, Loaded, ProblemDoc, RunConfig,
    Scenario, Settings,
};
pub use report::{
    anchors, version_and_provenance, AuditLine, DiscretizationSummary, ProblemSummary, Provenance,
    Report, Status,
};

use crate::error::{Result, VeldtError};
use crate::galerkin::build_space;
use crate::reduction::ParamFunctional;

pub const EXIT_OK: i32 = 0;
pub const EXIT_AUDIT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

pub const CONFIG_SCHEMA: &str = include_str!("../../schema/run_config.schema.json");
pub const PROBLEM_SCHEMA: &str = include_str!("../../schema/problem.schema.json");

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub config: PathBuf,
    pub out: PathBuf,
    /// Overrides the seed in the config.
    pub seed: Option<u64>,
    /// Recorded in the provenance; all scenarios run on one thread.
    pub threads: usize,
    /// Audit failures exit with status 2 instead of 0.
    pub strict: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub report: Option<Report>,
    pub message: Option<String>,
}

fn config_error(e: VeldtError) -> Outcome {
    Outcome {
        exit_code: EXIT_CONFIG,
        report: None,
        message: Some(e.to_string()),
    }
}

fn is_config(e: &VeldtError) -> bool {
    matches!(e, VeldtError::Configuration(_))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

/// Runs one scenario and writes its artifacts into `opts.out`.
pub fn run(opts: &RunOptions) -> Outcome {
    let loaded = match load(&opts.config) {
        Ok(l) => l,
        Err(e) => return config_error(e),
    };
    let seed = opts.seed.unwrap_or(loaded.config.seed);
    let built = (|| {
        let spec = loaded.space_spec()?;
        let lag = loaded.principal()?;
        let g = loaded.constraints()?;
        let disc = build_space(&spec)?;
        Ok::<_, VeldtError>((lag, g, disc))
    })();
    let (lag, g, disc) = match built {
        Ok(b) => b,
        Err(e) => return config_error(e),
    };
    if let Err(e) = std::fs::create_dir_all(&opts.out) {
        return config_error(VeldtError::Configuration(format!(
            "cannot create {}: {e}",
            opts.out.display()
        )));
    }
    let problem = ProblemSummary {
        name: lag.name().to_string(),
        n: lag.n(),
        m: lag.m(),
        components: lag.components(),
        constraints: g.iter().map(|c| c.name().to_string()).collect(),
    };
    let discretization = DiscretizationSummary {
        spec: disc.spec().clone(),
        dim: disc.dim(),
        fingerprint: disc.fingerprint().to_string(),
    };
    let scenario = loaded.config.scenario;
    let settings = &loaded.config.settings;
    let outputs = match scenario {
        Scenario::Validate => scenario::validate(&loaded, &lag, &disc, seed),
        _ => match ParamFunctional::new(lag.clone(), g, disc.clone()) {
            Err(e) => Err(e),
            Ok(fam) => match scenario {
                Scenario::Spectrum => scenario::spectrum(&fam, settings, &opts.out),
                Scenario::Reduce => scenario::reduce(&fam, settings, &opts.out, seed),
                Scenario::Bifurcate => scenario::bifurcate(&fam, settings, &opts.out, seed),
                Scenario::Morse => scenario::morse(&fam, settings, seed),
                Scenario::Validate => unreachable!(),
            },
        },
    };
    let provenance = version_and_provenance(
        &loaded.config_bytes,
        &loaded.problem_bytes,
        seed,
        opts.threads,
    );
    let (status, exit_code, audits, files, result, error) = match outputs {
        Ok(o) => {
            let ok = o.audits.iter().all(|a| a.passed);
            let code = if ok || !opts.strict {
                EXIT_OK
            } else {
                EXIT_AUDIT
            };
            let status = if ok {
                Status::Pass
            } else {
                Status::AuditFailure
            };
            (status, code, o.audits, o.files, o.result, None)
        }
        Err(e) => {
            let code = if is_config(&e) {
                EXIT_CONFIG
            } else {
                EXIT_AUDIT
            };
            (
                Status::Error,
                code,
                Vec::new(),
                Vec::new(),
                serde_json::Value::Null,
                Some(e.to_string()),
            )
        }
    };
    let report = Report {
        provenance,
        scenario,
        anchors: anchors(scenario),
        problem,
        discretization,
        status,
        audits,
        files,
        result,
        error,
    };
    let written = serde_json::to_string_pretty(&report)
        .map_err(VeldtError::from)
        .and_then(|json| write_text(&opts.out.join("report.json"), &(json + "\n")))
        .and_then(|_| write_text(&opts.out.join("summary.txt"), &report.summary()));
    if let Err(e) = written {
        return config_error(e);
    }
    Outcome {
        exit_code,
        message: report.error.clone(),
        report: Some(report),
    }
}
