use crate::disk::DiskPoint;
use crate::error::{Error, Result};
use crate::funclib::{catalogue, make_test_function, AnalyticFn, TestFunctionSpec};
use crate::operators::WitnessGrids;
use crate::quadrature::DEFAULT_RADII;
use crate::semigroup::{generator_catalogue, load_generator_catalogue, GeneratorSpec};
use crate::spaces::{admissible_check, Classification, NormForm, SpaceParams};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    Norm,
    Flow,
    Continuity,
    BlochCheck,
    SymbolClass,
    Witness,
}

impl Pipeline {
    pub fn as_str(self) -> &'static str {
        match self {
            Pipeline::Norm => "norm",
            Pipeline::Flow => "flow",
            Pipeline::Continuity => "continuity",
            Pipeline::BlochCheck => "bloch-check",
            Pipeline::SymbolClass => "symbol-class",
            Pipeline::Witness => "witness",
        }
    }

    fn needs_params(self) -> bool {
        matches!(self, Pipeline::Norm | Pipeline::Continuity | Pipeline::SymbolClass | Pipeline::Witness)
    }

    fn needs_generator(self) -> bool {
        matches!(self, Pipeline::Flow | Pipeline::Continuity | Pipeline::BlochCheck)
    }

    fn needs_functions(self) -> bool {
        matches!(self, Pipeline::Norm | Pipeline::Continuity | Pipeline::SymbolClass | Pipeline::Witness)
    }
}

/// A catalogue name (`e_3`, `log1m`, `koenigs_log`, ...) or an inline
/// [`TestFunctionSpec`] table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionRef {
    Name(String),
    Spec(TestFunctionSpec),
}

impl FunctionRef {
    pub fn label(&self) -> String {
        match self {
            FunctionRef::Name(n) => n.clone(),
            FunctionRef::Spec(s) => serde_json::to_string(s).unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Relative paths are taken from the config file's directory.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// File stem; defaults to the scenario name.
    #[serde(default)]
    pub stem: Option<String>,
}

fn default_tol() -> f64 {
    1e-6
}

fn default_angles() -> usize {
    64
}

fn default_n_max() -> usize {
    3
}

/// One experiment, as read from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub pipeline: Pipeline,
    #[serde(default)]
    pub generator: Option<String>,
    /// Extra generator catalogue (TOML) searched before the built-in one.
    #[serde(default)]
    pub catalogue: Option<PathBuf>,
    #[serde(default)]
    pub params: Option<SpaceParams>,
    #[serde(default)]
    pub functions: Vec<FunctionRef>,
    #[serde(default)]
    pub forms: Vec<NormForm>,
    /// Flow start points `[re, im]`.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default = "default_angles")]
    pub angles: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub log_weighted: bool,
    #[serde(default)]
    pub univalent_hint: bool,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// Search grids for the witness pipeline; `tol` is taken from the scenario.
    #[serde(default)]
    pub witness: Option<WitnessGrids>,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory of the config file, for relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn config_err(field: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        field: field.into(),
        message: message.into(),
    }
}

/// Resolves a function name against the test-function catalogue.
pub fn resolve_function_name(name: &str) -> Result<AnalyticFn> {
    if let Some((_, spec)) = catalogue().into_iter().find(|(n, _)| n == name) {
        return make_test_function(&spec);
    }
    let spec = match name {
        "koenigs_log" | "H" => TestFunctionSpec::KoenigsLog,
        "koebe" => TestFunctionSpec::Koebe,
        "identity" => TestFunctionSpec::Monomial { n: 1 },
        _ => match name.strip_prefix("e_").and_then(|n| n.parse().ok()) {
            Some(n) => TestFunctionSpec::Monomial { n },
            None => {
                return Err(Error::Unknown {
                    kind: "function",
                    name: name.into(),
                })
            }
        },
    };
    make_test_function(&spec)
}

fn check_point(w: DiskPoint, field: &str) -> Result<()> {
    DiskPoint::new(w.re, w.im).map(|_| ()).map_err(|e| config_err(field, e.to_string()))
}

impl Scenario {
    /// Parses and validates a scenario; `base_dir` anchors relative paths.
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut sc: Scenario = toml::from_str(text).map_err(|e| Error::from_toml(text, &e))?;
        sc.base_dir = base_dir.into();
        sc.validate()?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(config_err("name", "must not be empty"));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(config_err("tol", format!("must be positive, got {}", self.tol)));
        }
        if self.angles == 0 {
            return Err(config_err("angles", "must be positive"));
        }
        match self.params {
            Some(p) => {
                let adm = admissible_check(p);
                let ok = adm.admissible || (self.pipeline == Pipeline::Norm && adm.classification == Classification::CollapsedToDps);
                if !ok {
                    return Err(config_err("params", format!("{p:?} is not admissible ({:?})", adm.classification)));
                }
            }
            None if self.pipeline.needs_params() => return Err(config_err("params", "required by this pipeline")),
            None => {}
        }
        if self.pipeline.needs_generator() {
            self.generator_spec()?;
        }
        if self.pipeline.needs_functions() && self.functions.is_empty() {
            return Err(config_err("functions", "required by this pipeline"));
        }
        self.resolve_functions()?;
        if let Some(radii) = &self.radii {
            if let Some(r) = radii.iter().find(|r| !(**r >= 0.0 && **r < 1.0)) {
                return Err(config_err("radii", format!("radius {r} outside [0, 1)")));
            }
        }
        if let Some(t) = self.t_grid.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
            return Err(config_err("t_grid", format!("time {t} must be finite and non-negative")));
        }
        for (i, z) in self.points.iter().enumerate() {
            check_point(DiskPoint { re: z[0], im: z[1] }, &format!("points[{i}]"))?;
        }
        match self.pipeline {
            Pipeline::Flow if self.points.is_empty() || self.t_grid.is_empty() => Err(config_err("points", "flow needs points and t_grid")),
            Pipeline::Continuity if self.t_grid.is_empty() => Err(config_err("t_grid", "required by this pipeline")),
            _ => Ok(()),
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        self.radii.clone().unwrap_or_else(|| DEFAULT_RADII.to_vec())
    }

    /// The referenced generator, looked up in `catalogue` first.
    pub fn generator_spec(&self) -> Result<GeneratorSpec> {
        let name = self.generator.as_deref().ok_or_else(|| config_err("generator", "required by this pipeline"))?;
        let mut pool = Vec::new();
        if let Some(path) = &self.catalogue {
            let full = self.base_dir.join(path);
            let text = std::fs::read_to_string(&full).map_err(|e| config_err("catalogue", format!("{}: {e}", full.display())))?;
            pool = load_generator_catalogue(&text)?;
        }
        pool.extend(generator_catalogue()?);
        pool.into_iter()
            .find(|g| g.name == name)
            .ok_or_else(|| config_err("generator", format!("unknown generator `{name}`")))
    }

    pub fn resolve_functions(&self) -> Result<Vec<(String, AnalyticFn)>> {
        self.functions
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let field = format!("functions[{i}]");
                let f = match r {
                    FunctionRef::Name(n) => resolve_function_name(n),
                    FunctionRef::Spec(spec) => {
                        match spec {
                            TestFunctionSpec::LogTest { w } | TestFunctionSpec::PowerTest { w, .. } | TestFunctionSpec::BetaTest { w, .. } => {
                                check_point(*w, &field)?
                            }
                            _ => {}
                        }
                        make_test_function(spec)
                    }
                }
                .map_err(|e| config_err(&field, e.to_string()))?;
                Ok((r.label(), f))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_flow() {
        let sc = Scenario::from_toml(
            "name = \"f\"\npipeline = \"flow\"\ngenerator = \"neg_z\"\npoints = [[0.5, 0.0]]\nt_grid = [1.0]\n",
            ".",
        )
        .unwrap();
        assert_eq!(sc.pipeline, Pipeline::Flow);
        assert_eq!(sc.tol, 1e-6);
        assert_eq!(sc.radii(), DEFAULT_RADII.to_vec());
    }

    #[test]
    fn rejects_inadmissible_params() {
        let text = "name = \"n\"\npipeline = \"continuity\"\ngenerator = \"neg_z\"\nfunctions = [\"e_1\"]\nt_grid = [0.1]\nparams = { p = 2.0, s = 1.0, alpha = 0.75 }\n";
        match Scenario::from_toml(text, ".") {
            Err(Error::Config { field, .. }) => assert_eq!(field, "params"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_references_name_the_field() {
        let text = "name = \"n\"\npipeline = \"bloch-check\"\ngenerator = \"spiral\"\n";
        assert!(matches!(Scenario::from_toml(text, "."), Err(Error::Config { field, .. }) if field == "generator"));
        let text = "name = \"n\"\npipeline = \"norm\"\nfunctions = [\"e_1\", \"nope\"]\nparams = { p = 2.0, s = 1.0, alpha = 0.0 }\n";
        assert!(matches!(Scenario::from_toml(text, "."), Err(Error::Config { field, .. }) if field == "functions[1]"));
    }

    #[test]
    fn parse_errors_carry_lines() {
        let text = "name = \"n\"\npipeline = \"flow\"\nbogus = 1\n";
        assert!(matches!(Scenario::from_toml(text, "."), Err(Error::Parse { line: 3, .. })));
        let text = "name = \"n\"\npipeline = \"teleport\"\n";
        assert!(matches!(Scenario::from_toml(text, "."), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn inline_function_specs() {
        let text = r#"
name = "n"
pipeline = "norm"
params = { p = 2.0, s = 1.0, alpha = 0.0 }
functions = ["e_2", { kind = "log_test", w = { re = 0.5, im = 0.0 } }]
"#;
        let sc = Scenario::from_toml(text, ".").unwrap();
        assert_eq!(sc.resolve_functions().unwrap().len(), 2);
        let bad = text.replace("re = 0.5", "re = 1.5");
        assert!(matches!(Scenario::from_toml(&bad, "."), Err(Error::Config { .. })));
    }
}
