use super::GeneratorSpec;
use crate::disk::ClosedDiskPoint;
use crate::error::{Error, Result};
use crate::funclib::AnalyticFn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Built-in generators, in the same format accepted by
/// [`load_generator_catalogue`].
pub const DEFAULT_CATALOGUE: &str = r#"
[[generator]]
name = "neg_z"
closed_form = "linear"

[[generator]]
name = "neg_2z"
closed_form = "linear"
parameters = { lambda_re = 2.0 }

[[generator]]
name = "rotation"
closed_form = "linear"
parameters = { lambda_re = 0.0, lambda_im = -1.0 }

[[generator]]
name = "logistic"
closed_form = "logistic"

[[generator]]
name = "parabolic"
closed_form = "parabolic"
berkson_porta = { tau = [1.0, 0.0], p = "one" }

[[generator]]
name = "hyperbolic"
closed_form = "hyperbolic"
berkson_porta = { tau = [1.0, 0.0], p = "cayley" }
parameters = { scale = 0.5 }
"#;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogueFile {
    #[serde(default)]
    generator: Vec<GeneratorEntry>,
}

/// One catalogue record: a closed-form id, Berkson–Porta data, or both.
///
/// Closed forms: `linear` (`-λz`, parameters `lambda_re`, `lambda_im`),
/// `logistic` (`-z(1 - z)`), `parabolic` (`(τ̄z - 1)(z - τ)` with
/// `τ = e^{i angle}`), `hyperbolic` (`(1 - z²)/2`), `zero`.
/// Herglotz ids: `one`, `constant` (`c_re`, `c_im`), `cayley`
/// (`scale (1 + z)/(1 - z)`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    pub name: String,
    #[serde(default)]
    pub closed_form: Option<String>,
    #[serde(default)]
    pub berkson_porta: Option<BerksonPortaEntry>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BerksonPortaEntry {
    pub tau: [f64; 2],
    pub p: String,
}

impl GeneratorEntry {
    fn param(&self, key: &str, default: f64) -> f64 {
        self.parameters.get(key).copied().unwrap_or(default)
    }

    fn closed(&self, id: &str, field: &str) -> Result<GeneratorSpec> {
        let one = Complex64::new(1.0, 0.0);
        let name = self.name.clone();
        Ok(match id {
            "linear" => GeneratorSpec::linear(name, Complex64::new(self.param("lambda_re", 1.0), self.param("lambda_im", 0.0))),
            "zero" => GeneratorSpec::linear(name, Complex64::new(0.0, 0.0)),
            "logistic" => {
                let g = AnalyticFn::closed_form("-z(1-z)", move |z| (-z * (one - z), 2.0 * z - one));
                GeneratorSpec::from_generator(name, g).with_closed_flow(move |z, t| {
                    let q = (-t).exp();
                    let d = one + (q - 1.0) * z;
                    (q * z / d, q / (d * d))
                })
            }
            "parabolic" => {
                let u = Complex64::from_polar(1.0, self.param("angle", 0.0));
                let ub = u.conj();
                let g = AnalyticFn::closed_form("(1-ūz)²u", move |z| {
                    let w = one - ub * z;
                    (u * w * w, -2.0 * w)
                });
                GeneratorSpec::from_generator(name, g).with_closed_flow(move |z, t| {
                    // conjugate of (w + t(1 - w))/(1 + t(1 - w)) by the rotation
                    let w = ub * z;
                    let d = one + t * (one - w);
                    (u * (w + t * (one - w)) / d, one / (d * d))
                })
            }
            "hyperbolic" => {
                let g = AnalyticFn::closed_form("(1-z²)/2", move |z| (0.5 * (one - z * z), -z));
                GeneratorSpec::from_generator(name, g).with_closed_flow(move |z, t| {
                    let v = (0.5 * t + z.atanh()).tanh();
                    (v, (one - v * v) / (one - z * z))
                })
            }
            other => {
                return Err(Error::Config {
                    field: field.into(),
                    message: format!("unknown closed form `{other}`"),
                })
            }
        })
    }

    fn herglotz(&self, id: &str, field: &str) -> Result<AnalyticFn> {
        let one = Complex64::new(1.0, 0.0);
        Ok(match id {
            "one" => AnalyticFn::constant(one),
            "constant" => {
                let c = Complex64::new(self.param("c_re", 1.0), self.param("c_im", 0.0));
                if c.re < 0.0 {
                    return Err(Error::Config {
                        field: field.into(),
                        message: format!("Herglotz constant must have Re ≥ 0, got {c}"),
                    });
                }
                AnalyticFn::constant(c)
            }
            "cayley" => {
                let k = self.param("scale", 1.0);
                AnalyticFn::closed_form("cayley", move |z| {
                    let d = one - z;
                    (k * (one + z) / d, 2.0 * k / (d * d))
                })
            }
            other => {
                return Err(Error::Config {
                    field: field.into(),
                    message: format!("unknown Herglotz function `{other}`"),
                })
            }
        })
    }

    /// Resolves the record into a generator.
    pub fn build(&self, index: usize) -> Result<GeneratorSpec> {
        let base = format!("generator[{index}]");
        let bp = match &self.berkson_porta {
            Some(e) => {
                let tau = Complex64::new(e.tau[0], e.tau[1]);
                let field = format!("{base}.berkson_porta.tau");
                if !(tau.norm() <= 1.0 + 1e-12) {
                    return Err(Error::Config {
                        field,
                        message: format!("|tau| = {} exceeds 1", tau.norm()),
                    });
                }
                let tau = ClosedDiskPoint::classify(tau, 1e-12).map_err(|e| Error::Config { field, message: e.to_string() })?;
                Some((tau, self.herglotz(&e.p, &format!("{base}.berkson_porta.p"))?))
            }
            None => None,
        };
        match (&self.closed_form, bp) {
            (Some(id), None) => self.closed(id, &format!("{base}.closed_form")),
            (None, Some((tau, p))) => Ok(GeneratorSpec::from_berkson_porta(self.name.clone(), tau, p)),
            (Some(id), Some((tau, p))) => {
                let closed = self.closed(id, &format!("{base}.closed_form"))?;
                let flow = closed.closed_flow.clone();
                let mut spec = GeneratorSpec::with_both(self.name.clone(), closed.g, tau, p).map_err(|e| Error::Config {
                    field: base.clone(),
                    message: e.to_string(),
                })?;
                spec.closed_flow = flow;
                Ok(spec)
            }
            (None, None) => Err(Error::Config {
                field: base,
                message: "needs `closed_form` or `berkson_porta`".into(),
            }),
        }
    }
}

/// Parses a TOML generator catalogue (`[[generator]]` tables).
pub fn load_generator_catalogue(text: &str) -> Result<Vec<GeneratorSpec>> {
    let file: CatalogueFile = toml::from_str(text).map_err(|e| Error::from_toml(text, &e))?;
    file.generator.iter().enumerate().map(|(i, e)| e.build(i)).collect()
}

pub fn generator_catalogue() -> Result<Vec<GeneratorSpec>> {
    load_generator_catalogue(DEFAULT_CATALOGUE)
}

/// Looks a generator up by name in the built-in catalogue.
pub fn generator_by_name(name: &str) -> Result<GeneratorSpec> {
    generator_catalogue()?.into_iter().find(|g| g.name == name).ok_or_else(|| Error::Unknown {
        kind: "generator",
        name: name.into(),
    })
}
