//! JSON model files.

use std::collections::BTreeMap;
use std::path::Path;

use dirac_core::dynamics::ChartSpec;
use dirac_core::legendre::{ModelSpec, Sign, Stratum};
use dirac_core::symexpr::RationalExpr;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    #[serde(default)]
    pub description: Option<String>,
    pub coordinates: Vec<String>,
    pub lagrangian: String,
    #[serde(default)]
    pub parameters: Vec<String>,
    #[serde(default)]
    pub algebraic_parameters: Vec<AlgebraicParameter>,
    #[serde(default)]
    pub symmetries: Vec<SymmetryEntry>,
    /// Pieces of the constraint set in phase space.
    #[serde(default)]
    pub strata: Vec<StratumEntry>,
    /// Rank strata of configuration space; derived when absent.
    #[serde(default)]
    pub configuration_strata: Option<Vec<StratumEntry>>,
    #[serde(default)]
    pub reduction_chart: Option<ChartEntry>,
    #[serde(default)]
    pub initial_data: Vec<String>,
    /// First class functions used to separate orbits.
    #[serde(default)]
    pub orbit_functions: Vec<String>,
    #[serde(default)]
    pub known: Option<Known>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraicParameter {
    pub name: String,
    pub relation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymmetryEntry {
    pub name: String,
    pub components: BTreeMap<String, String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StratumEntry {
    pub name: String,
    #[serde(default)]
    pub equalities: Vec<String>,
    #[serde(default)]
    pub nonvanishing: Vec<String>,
    #[serde(default)]
    pub signs: Vec<SignEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignEntry {
    pub expr: String,
    pub sign: SignName,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignName {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartEntry {
    pub qbar: String,
    pub pbar: String,
    pub j: String,
    /// Expected reduced Hamiltonian in `qbar`, `pbar`, `mu`.
    #[serde(default)]
    pub h_reduced: Option<String>,
    /// Configuration stratum the chart lives on; the first one when absent.
    #[serde(default)]
    pub stratum: Option<String>,
}

/// Expected results checked by `verify`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Known {
    /// Configuration stratum name to primary constraint generators.
    #[serde(default)]
    pub constraints: BTreeMap<String, Vec<String>>,
    /// Configuration stratum name to Hamiltonian.
    #[serde(default)]
    pub hamiltonians: BTreeMap<String, String>,
    #[serde(default)]
    pub brackets: Vec<KnownBracket>,
    #[serde(default)]
    pub modified: Vec<KnownModified>,
    #[serde(default)]
    pub first_class: Vec<String>,
    #[serde(default)]
    pub not_first_class: Vec<String>,
    #[serde(default)]
    pub orbits: Option<usize>,
    #[serde(default)]
    pub reduced_classes: Option<usize>,
    /// Printed closed form of first class extensions, compared and warned on.
    #[serde(default)]
    pub extension_template: Option<ExtensionTemplate>,
    /// Printed derivative conditions for first class functions, compared
    /// with the tangency test and warned on.
    #[serde(default)]
    pub printed_conditions: Vec<PrintedCondition>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnownBracket {
    pub f: String,
    pub g: String,
    pub value: String,
    #[serde(default)]
    pub dirac: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KnownModified {
    pub f: String,
    pub value: String,
}

/// `scale * f + sum_k (sum_v coefficients[k][v] * df/dv) * c_k` over the
/// generators `c_k` of the first constraint system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtensionTemplate {
    pub scale: String,
    pub coefficients: Vec<BTreeMap<String, String>>,
    pub functions: Vec<String>,
}

/// Derivatives of a first class function printed as vanishing on a stratum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrintedCondition {
    pub stratum: String,
    pub vanishing_derivatives: Vec<String>,
}

/// A parsed model.
#[derive(Clone, Debug)]
pub struct Model {
    pub file: ModelFile,
    pub spec: ModelSpec,
    pub chart: Option<ChartSpec>,
    pub orbit_functions: Vec<RationalExpr>,
}

fn input<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> CliError + '_ {
    move |e| CliError::Input(format!("{context}: {e}"))
}

impl ModelFile {
    pub fn read(path: &Path) -> Result<ModelFile, CliError> {
        let text = std::fs::read_to_string(path).map_err(input(&path.display().to_string()))?;
        serde_json::from_str(&text).map_err(input(&path.display().to_string()))
    }
}

impl Model {
    pub fn load(path: &Path) -> Result<Model, CliError> {
        Model::from_file(ModelFile::read(path)?)
    }

    pub fn from_file(file: ModelFile) -> Result<Model, CliError> {
        let coords: Vec<&str> = file.coordinates.iter().map(String::as_str).collect();
        if coords.is_empty() {
            return Err(CliError::Input("model declares no coordinates".into()));
        }
        let mut spec = ModelSpec::new(&coords).map_err(input("coordinates"))?;
        for p in &file.parameters {
            spec.add_parameter(p).map_err(input("parameters"))?;
        }
        for a in &file.algebraic_parameters {
            spec.add_algebraic(&a.name, &a.relation).map_err(input(&format!("algebraic parameter {}", a.name)))?;
        }
        if file.reduction_chart.is_some() {
            for p in ["qbar", "pbar", "mu"] {
                if spec.symbols.get(p).is_none() {
                    spec.add_parameter(p).map_err(input("reduction_chart"))?;
                }
            }
        }
        spec.set_lagrangian(&file.lagrangian).map_err(input("lagrangian"))?;
        for s in &file.symmetries {
            let comps: Vec<(&str, &str)> = s.components.iter().map(|(k, v)| (k.as_str(), v.as_str())).collect();
            spec.add_symmetry(&s.name, &comps).map_err(input(&format!("symmetry {}", s.name)))?;
        }
        spec.constraint_strata = file.strata.iter().map(|s| stratum(&spec, s)).collect::<Result<_, _>>()?;
        if let Some(cs) = &file.configuration_strata {
            spec.configuration_strata = Some(cs.iter().map(|s| stratum(&spec, s)).collect::<Result<_, _>>()?);
        }
        spec.initial_data = file.initial_data.iter().map(|e| parse(&spec, e, "initial_data")).collect::<Result<_, _>>()?;
        let orbit_functions = file.orbit_functions.iter().map(|e| parse(&spec, e, "orbit_functions")).collect::<Result<_, _>>()?;
        let chart = match &file.reduction_chart {
            None => None,
            Some(c) => {
                let sym = |n: &str| spec.symbols.lookup(n).map_err(input("reduction_chart"));
                Some(ChartSpec {
                    qbar: parse(&spec, &c.qbar, "reduction_chart.qbar")?,
                    pbar: parse(&spec, &c.pbar, "reduction_chart.pbar")?,
                    j: parse(&spec, &c.j, "reduction_chart.j")?,
                    template: c.h_reduced.as_deref().map(|t| parse(&spec, t, "reduction_chart.h_reduced")).transpose()?,
                    qbar_sym: sym("qbar")?,
                    pbar_sym: sym("pbar")?,
                    mu_sym: sym("mu")?,
                })
            }
        };
        let model = Model { file, spec, chart, orbit_functions };
        if let Some(k) = &model.file.known {
            model.check_known(k)?;
        }
        Ok(model)
    }

    pub fn parse(&self, text: &str) -> Result<RationalExpr, CliError> {
        parse(&self.spec, text, "expression")
    }

    fn check_known(&self, k: &Known) -> Result<(), CliError> {
        let exprs = k
            .constraints
            .values()
            .flatten()
            .chain(k.hamiltonians.values())
            .chain(k.brackets.iter().flat_map(|b| [&b.f, &b.g, &b.value]))
            .chain(k.modified.iter().flat_map(|m| [&m.f, &m.value]))
            .chain(&k.first_class)
            .chain(&k.not_first_class);
        for e in exprs {
            parse(&self.spec, e, "known")?;
        }
        if let Some(t) = &k.extension_template {
            parse(&self.spec, &t.scale, "known.extension_template")?;
            for e in t.coefficients.iter().flat_map(|c| c.values()).chain(&t.functions) {
                parse(&self.spec, e, "known.extension_template")?;
            }
            for v in t.coefficients.iter().flat_map(|c| c.keys()) {
                self.spec.symbols.lookup(v).map_err(input("known.extension_template"))?;
            }
        }
        for c in &k.printed_conditions {
            for v in &c.vanishing_derivatives {
                self.spec.symbols.lookup(v).map_err(input("known.printed_conditions"))?;
            }
        }
        Ok(())
    }
}

fn parse(spec: &ModelSpec, text: &str, context: &str) -> Result<RationalExpr, CliError> {
    spec.parse(text).map_err(|e| CliError::Input(format!("{context}: cannot parse {text:?}: {e}")))
}

fn stratum(spec: &ModelSpec, e: &StratumEntry) -> Result<Stratum, CliError> {
    let ctx = format!("stratum {}", e.name);
    let mut s = Stratum::new(e.name.clone());
    for t in &e.equalities {
        s = s.equal_zero(parse(spec, t, &ctx)?);
    }
    for t in &e.nonvanishing {
        s = s.nonzero(parse(spec, t, &ctx)?);
    }
    for t in &e.signs {
        let sign = match t.sign {
            SignName::Positive => Sign::Positive,
            SignName::Negative => Sign::Negative,
        };
        s = s.signed(parse(spec, &t.expr, &ctx)?, sign);
    }
    Ok(s)
}
