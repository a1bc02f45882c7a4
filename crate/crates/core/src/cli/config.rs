use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VeldtError};
use crate::galerkin::{BoundaryCondition, Domain, SpaceSpec};
use crate::lagrangian::{
    catalog, enumerate_multi_indices, GrowthSpec, Lagrangian, Polynomial, PolynomialIntegrand,
};

/// Interval endpoint: a number or an expression such as `"pi"`, `"2pi"`, `"-pi/2"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Bound {
    Number(f64),
    Expr(String),
}

impl Bound {
    pub fn value(&self) -> Result<f64> {
        match self {
            Bound::Number(v) => Ok(*v),
            Bound::Expr(s) => parse_bound(s),
        }
    }
}

fn parse_bound(s: &str) -> Result<f64> {
    let bad = || VeldtError::Configuration(format!("cannot read domain bound {s:?}"));
    let t: String = s
        .chars()
        .filter(|c| !c.is_whitespace() && *c != '*')
        .collect::<String>()
        .to_lowercase();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.to_string(), b.parse::<f64>().map_err(|_| bad())?),
        None => (t.clone(), 1.0),
    };
    let v = match num.strip_suffix("pi") {
        Some("") | Some("+") => PI,
        Some("-") => -PI,
        Some(c) => c.parse::<f64>().map_err(|_| bad())? * PI,
        None => num.parse::<f64>().map_err(|_| bad())?,
    };
    let v = v / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainDoc {
    pub lower: Vec<Bound>,
    pub upper: Vec<Bound>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscretizationDoc {
    pub domain: DomainDoc,
    pub bc: BoundaryCondition,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(default)]
    pub quad_order: Option<usize>,
}

/// A catalog name or an explicit polynomial in the flattened jet `(i·M + a)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum IntegrandDoc {
    Catalog(String),
    Polynomial(Polynomial),
}

/// The problem document: the principal functional and the constraint functionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    #[serde(default)]
    pub name: Option<String>,
    pub n: usize,
    pub m: usize,
    #[serde(rename = "N", default = "one")]
    pub components: usize,
    pub integrand: IntegrandDoc,
    /// Defaults to a single `½|u|²`.
    #[serde(default)]
    pub g: Vec<IntegrandDoc>,
    #[serde(default)]
    pub growth: Option<GrowthSpec>,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Validate,
    Spectrum,
    Reduce,
    Bifurcate,
    Morse,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Validate => "validate",
            Scenario::Spectrum => "spectrum",
            Scenario::Reduce => "reduce",
            Scenario::Bifurcate => "bifurcate",
            Scenario::Morse => "morse",
        }
    }
}

/// Scenario parameters. Each scenario reads the fields it needs and ignores the rest.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// validate: random jets for the growth scan.
    pub samples: Option<usize>,
    /// validate: jet radius; morse: largest start norm.
    pub radius: Option<f64>,
    /// validate: random fields for the derivative and split checks.
    pub fields: Option<usize>,
    /// validate: relative tolerance of the derivative checks.
    pub tolerance: Option<f64>,
    /// spectrum: parameters at which Morse indices are reported.
    pub lambdas: Option<Vec<f64>>,
    /// reduce: reference eigenvalue; defaults to the smallest positive one.
    pub lambda_star: Option<f64>,
    pub kernel_dim_hint: Option<usize>,
    /// reduce: kernel coordinate range and point count along the first kernel direction.
    pub z_range: Option<(f64, f64)>,
    pub z_points: Option<usize>,
    /// bifurcate: parameter window and grid size.
    pub window: Option<(f64, f64)>,
    pub grid: Option<usize>,
    pub starts: Option<usize>,
    pub min_amplitude: Option<f64>,
    pub amplitude_cap: Option<f64>,
    /// morse: parameter value, optional level window and structured start modes.
    pub lambda: Option<f64>,
    pub levels: Option<(f64, f64)>,
    pub modes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Problem document, relative to the config file.
    pub problem: PathBuf,
    pub scenario: Scenario,
    pub discretization: DiscretizationDoc,
    #[serde(default)]
    pub settings: Settings,
    #[serde(default)]
    pub seed: u64,
}

/// Everything read from disk, with the raw bytes kept for hashing.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub config: RunConfig,
    pub problem: ProblemDoc,
    pub config_bytes: Vec<u8>,
    pub problem_bytes: Vec<u8>,
}

fn read(path: &Path, what: &str) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| {
        VeldtError::Configuration(format!("cannot read {what} {}: {e}", path.display()))
    })
}

fn parse<T: for<'de> Deserialize<'de>>(bytes: &[u8], path: &Path) -> Result<T> {
    serde_json::from_slice(bytes)
        .map_err(|e| VeldtError::Configuration(format!("{}: {e}", path.display())))
}

pub fn load(config_path: &Path) -> Result<Loaded> {
    let config_bytes = read(config_path, "config")?;
    let config: RunConfig = parse(&config_bytes, config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let problem_path = base.join(&config.problem);
    let problem_bytes = read(&problem_path, "problem document")?;
    let problem: ProblemDoc = parse(&problem_bytes, &problem_path)?;
    let loaded = Loaded {
        config,
        problem,
        config_bytes,
        problem_bytes,
    };
    loaded.validate()?;
    Ok(loaded)
}

fn positive(name: &str, v: Option<f64>) -> Result<()> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(VeldtError::Configuration(format!(
            "{name} must be positive, got {x}"
        ))),
        _ => Ok(()),
    }
}

fn ordered(name: &str, v: Option<(f64, f64)>) -> Result<()> {
    match v {
        Some((a, b)) if !(a < b && a.is_finite() && b.is_finite()) => Err(
            VeldtError::Configuration(format!("{name} must be an increasing pair, got ({a}, {b})")),
        ),
        _ => Ok(()),
    }
}

impl Loaded {
    fn validate(&self) -> Result<()> {
        let s = &self.config.settings;
        positive("radius", s.radius)?;
        positive("tolerance", s.tolerance)?;
        positive("min_amplitude", s.min_amplitude)?;
        positive("amplitude_cap", s.amplitude_cap)?;
        ordered("window", s.window)?;
        ordered("z_range", s.z_range)?;
        ordered("levels", s.levels)?;
        for (name, v) in [
            ("samples", s.samples),
            ("fields", s.fields),
            ("grid", s.grid),
            ("starts", s.starts),
            ("z_points", s.z_points),
        ] {
            if v == Some(0) {
                return Err(VeldtError::Configuration(format!(
                    "{name} must be at least 1"
                )));
            }
        }
        if self.config.scenario == Scenario::Bifurcate && s.window.is_none() {
            return Err(VeldtError::Configuration(
                "bifurcate needs settings.window".into(),
            ));
        }
        if self.config.scenario == Scenario::Morse && s.lambda.is_none() {
            return Err(VeldtError::Configuration(
                "morse needs settings.lambda".into(),
            ));
        }
        self.space_spec()?;
        Ok(())
    }

    pub fn space_spec(&self) -> Result<SpaceSpec> {
        let d = &self.config.discretization;
        let lower = d
            .domain
            .lower
            .iter()
            .map(Bound::value)
            .collect::<Result<Vec<_>>>()?;
        let upper = d
            .domain
            .upper
            .iter()
            .map(Bound::value)
            .collect::<Result<Vec<_>>>()?;
        if lower.len() != self.problem.n || upper.len() != self.problem.n {
            return Err(VeldtError::Configuration(format!(
                "domain has {} / {} bounds, problem has n = {}",
                lower.len(),
                upper.len(),
                self.problem.n
            )));
        }
        let mut spec = SpaceSpec::new(Domain { lower, upper }, self.problem.m, d.bc, d.k)
            .with_components(self.problem.components);
        if let Some(q) = d.quad_order {
            spec = spec.with_quad_order(q);
        }
        Ok(spec)
    }

    pub fn principal(&self) -> Result<Lagrangian> {
        let p = &self.problem;
        let lag = build_integrand(&p.integrand, p, p.name.as_deref().unwrap_or("F"))?;
        match &p.growth {
            Some(g) => lag.with_growth(g.clone()),
            None => Ok(lag),
        }
    }

    pub fn constraints(&self) -> Result<Vec<Lagrangian>> {
        let p = &self.problem;
        if p.g.is_empty() {
            return Ok(vec![catalog::mass(p.n, p.m, p.components)?]);
        }
        p.g.iter()
            .enumerate()
            .map(|(j, doc)| build_integrand(doc, p, &format!("G{}", j + 1)))
            .collect()
    }
}

fn build_integrand(doc: &IntegrandDoc, p: &ProblemDoc, name: &str) -> Result<Lagrangian> {
    let mismatch = |what: &str| {
        VeldtError::Configuration(format!(
            "catalog entry {what} does not fit n = {}, m = {}, N = {}",
            p.n, p.m, p.components
        ))
    };
    match doc {
        IntegrandDoc::Catalog(c) => {
            let scalar_first_order = p.m == 1 && p.components == 1;
            match c.as_str() {
                "p1" if scalar_first_order => catalog::p1(p.n),
                "p2" if scalar_first_order => catalog::p2(p.n),
                "p3" if scalar_first_order => catalog::p3(p.n),
                "p1_periodic" if scalar_first_order && p.n == 1 => catalog::p1_periodic(),
                "p4" if p.n == 1 && p.m == 2 && p.components == 1 => catalog::p4(),
                "dirichlet" if p.components == 1 => catalog::dirichlet_only(p.n, p.m),
                "mass" => catalog::mass(p.n, p.m, p.components),
                "p1" | "p2" | "p3" | "p1_periodic" | "p4" | "dirichlet" => Err(mismatch(c)),
                other => Err(VeldtError::Configuration(format!(
                    "unknown catalog entry {other:?}"
                ))),
            }
        }
        IntegrandDoc::Polynomial(poly) => {
            let dim = p.components * enumerate_multi_indices(p.n, p.m).len();
            let integrand = PolynomialIntegrand::new(dim, poly.clone())?;
            Lagrangian::new(
                name,
                p.n,
                p.m,
                p.components,
                Arc::new(integrand),
                p.growth.clone().unwrap_or_else(GrowthSpec::quadratic),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_accept_pi_expressions() {
        for (s, v) in [
            ("pi", PI),
            ("2pi", 2.0 * PI),
            ("-pi", -PI),
            ("pi/2", PI / 2.0),
            ("2*pi", 2.0 * PI),
            ("1.5", 1.5),
        ] {
            assert!((parse_bound(s).unwrap() - v).abs() < 1e-15, "{s}");
        }
        assert!(parse_bound("tau").is_err());
        assert!(parse_bound("pi/0").is_err());
    }

    #[test]
    fn config_rejects_unknown_fields() {
        let doc = r#"{"problem": "p.json", "scenario": "spectrum", "discretization":
            {"domain": {"lower": [0], "upper": ["pi"]}, "bc": "dirichlet_m", "K": 8}, "bogus": 1}"#;
        assert!(serde_json::from_str::<RunConfig>(doc).is_err());
        let ok = doc.replace(r#", "bogus": 1"#, "");
        let cfg: RunConfig = serde_json::from_str(&ok).unwrap();
        assert_eq!(cfg.scenario, Scenario::Spectrum);
        assert_eq!(cfg.discretization.k, 8);
    }

    #[test]
    fn problem_documents_parse_both_forms() {
        let cat: ProblemDoc =
            serde_json::from_str(r#"{"n": 1, "m": 1, "integrand": {"catalog": "p2"}}"#).unwrap();
        assert_eq!(cat.components, 1);
        let poly: ProblemDoc = serde_json::from_str(
            r#"{"n": 1, "m": 1, "integrand": {"polynomial": {"terms": [{"coef": 0.5, "powers": [0, 2]}]}}}"#,
        )
        .unwrap();
        let lag = build_integrand(&poly.integrand, &poly, "F").unwrap();
        assert_eq!(lag.jet_dim(), 2);
        let bad = ProblemDoc { m: 2, ..cat };
        assert!(build_integrand(&bad.integrand, &bad, "F").is_err());
    }
}
