//! Run configuration, read from a TOML file with unknown keys rejected.

use crate::catalog;
use crate::darboux::{transform, DarbouxResult, Recipe, TransformationSpec};
use crate::error::{Error, Result};
use crate::grid::{Interval, DEFAULT_NODES};
use crate::ode::OdeOptions;
use crate::potential::Potential;
use crate::scenario::{Scenario, GENERIC_ENERGIES};
use crate::spectrum::Rectangle;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

type C64 = Complex64;

/// A real number or a `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexValue {
    pub fn value(&self) -> C64 {
        match *self {
            ComplexValue::Real(r) => C64::new(r, 0.0),
            ComplexValue::Pair([re, im]) => C64::new(re, im),
        }
    }
}

impl From<C64> for ComplexValue {
    fn from(z: C64) -> Self {
        ComplexValue::Pair([z.re, z.im])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Spectrum,
    Transform,
    Diagnose,
    Reproduce,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::Transform => "transform",
            Task::Diagnose => "diagnose",
            Task::Reproduce => "reproduce",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalConfig {
    #[serde(default = "minus_pi")]
    pub a: f64,
    #[serde(default = "plus_pi")]
    pub b: f64,
    #[serde(default = "default_nodes")]
    pub n_nodes: usize,
}

fn minus_pi() -> f64 {
    -std::f64::consts::PI
}
fn plus_pi() -> f64 {
    std::f64::consts::PI
}
fn default_nodes() -> usize {
    DEFAULT_NODES
}

impl Default for IntervalConfig {
    fn default() -> Self {
        Self {
            a: minus_pi(),
            b: plus_pi(),
            n_nodes: DEFAULT_NODES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RecipeConfig {
    Eigenfunction {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        index: Option<usize>,
    },
    InitialData {
        y_a: ComplexValue,
        dy_a: ComplexValue,
    },
    Combination {
        c: ComplexValue,
    },
}

impl RecipeConfig {
    fn recipe(&self) -> Recipe {
        match self {
            RecipeConfig::Eigenfunction { index } => Recipe::Eigenfunction { index: *index },
            RecipeConfig::InitialData { y_a, dy_a } => Recipe::InitialData {
                y_a: y_a.value(),
                dy_a: dy_a.value(),
            },
            RecipeConfig::Combination { c } => Recipe::Combination { c: c.value() },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepConfig {
    pub alpha1: ComplexValue,
    pub u1: RecipeConfig,
    pub alpha2: ComplexValue,
    pub u2: RecipeConfig,
}

impl StepConfig {
    pub fn spec(&self) -> TransformationSpec {
        TransformationSpec {
            alpha1: self.alpha1.value(),
            u1: self.u1.recipe(),
            alpha2: self.alpha2.value(),
            u2: self.u2.recipe(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialConfig {
    /// `zero`, `constant`, `v1ex`, `v1_forward`, `v2`, `example3` or `table`.
    pub id: String,
    #[serde(default)]
    pub params: Vec<f64>,
    /// Table file for `id = "table"`, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Transformation steps applied on top of the base, in order.
    #[serde(default)]
    pub steps: Vec<StepConfig>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    /// `[e_min, e_max]` for a real search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<[f64; 2]>,
    /// `[re_min, re_max, im_min, im_max]` for a complex search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rectangle: Option<[f64; 4]>,
    #[serde(default)]
    pub eigenfunctions: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<ComplexValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rectangle: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    #[serde(default = "generic_energies")]
    pub intertwining_energies: Vec<ComplexValue>,
}

fn generic_energies() -> Vec<ComplexValue> {
    GENERIC_ENERGIES.iter().map(|&z| z.into()).collect()
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            intertwining_energies: generic_energies(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceConfig {
    pub scenario: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
}

fn default_rtol() -> f64 {
    OdeOptions::default().rtol
}
fn default_atol() -> f64 {
    OdeOptions::default().atol
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: default_rtol(),
            atol: default_atol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: Task,
    #[serde(default)]
    pub interval: IntervalConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialConfig>,
    #[serde(default)]
    pub spectrum: SpectrumConfig,
    #[serde(default)]
    pub diagnose: DiagnoseConfig,
    #[serde(default)]
    pub transform: TransformConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reproduce: Option<ReproduceConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn interval(&self) -> Result<Interval> {
        Interval::new(self.interval.a, self.interval.b, self.interval.n_nodes)
    }

    pub fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.tolerances.rtol,
            atol: self.tolerances.atol,
            ..OdeOptions::default()
        }
    }

    fn potential_config(&self) -> Result<&PotentialConfig> {
        self.potential
            .as_ref()
            .ok_or_else(|| Error::Config(format!("task {} needs a [potential] table", self.task.name())))
    }

    /// The base potential, before any transformation step.
    pub fn base_potential(&self, base_dir: &Path) -> Result<Potential> {
        let pc = self.potential_config()?;
        let g = self.interval()?;
        let p = &pc.params;
        let want = |n: usize| -> Result<()> {
            if p.len() == n {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "potential {:?} takes {n} parameter(s), got {}",
                    pc.id,
                    p.len()
                )))
            }
        };
        let v = match pc.id.as_str() {
            "zero" => {
                want(0)?;
                Potential::zero(g)
            }
            "constant" => {
                if p.is_empty() || p.len() > 2 {
                    return Err(Error::Config("constant takes [re] or [re, im]".into()));
                }
                Potential::constant(g, C64::new(p[0], p.get(1).copied().unwrap_or(0.0)))
            }
            "v1ex" => {
                want(2)?;
                catalog::v1ex(p[0], p[1], g)?
            }
            "v1_forward" => {
                want(2)?;
                catalog::v1_forward(p[0], p[1], g)?
            }
            "v2" => {
                want(1)?;
                if !catalog::kappa_in_window(p[0]) {
                    return Err(Error::Config(format!(
                        "v2: kappa = {} outside the regularity window 0.5 <= kappa <= 1.5, kappa != 1",
                        p[0]
                    )));
                }
                catalog::v2(p[0], g)?
            }
            "example3" => {
                want(0)?;
                catalog::example3(g)?
            }
            "table" => {
                let path = pc
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("table potential needs `path`".into()))?;
                let (xs, vs) = read_table(&base_dir.join(path))?;
                Potential::tabulated(g, &xs, &vs)?
            }
            other => return Err(Error::Config(format!("unknown potential id {other:?}"))),
        };
        Ok(v.with_options(self.ode_options()))
    }

    /// Base potential followed by every configured step.
    pub fn build_chain(&self, base_dir: &Path) -> Result<(Potential, Vec<DarbouxResult>)> {
        let base = self.base_potential(base_dir)?;
        let mut steps = Vec::new();
        let mut current = base.clone();
        for step in &self.potential_config()?.steps {
            let r = transform(&current, &step.spec())?;
            current = r.potential.clone();
            steps.push(r);
        }
        Ok((base, steps))
    }

    /// The potential the task works on: the last step, or the base.
    pub fn final_potential(&self, base_dir: &Path) -> Result<Potential> {
        let (base, steps) = self.build_chain(base_dir)?;
        Ok(steps.last().map(|s| s.potential.clone()).unwrap_or(base))
    }

    pub fn scenario(&self) -> Result<Scenario> {
        let r = self
            .reproduce
            .as_ref()
            .ok_or_else(|| Error::Config("task reproduce needs [reproduce] scenario = ...".into()))?;
        r.scenario.parse()
    }

    /// Semantic checks beyond the schema.
    pub fn validate(&self) -> Result<()> {
        self.interval()?;
        if !(self.tolerances.rtol > 0.0 && self.tolerances.atol > 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if let Some(pc) = &self.potential {
            for (k, s) in pc.steps.iter().enumerate() {
                let (a1, a2) = (s.alpha1.value(), s.alpha2.value());
                if (a1 - a2).norm() <= 1e-14 * a1.norm().max(1.0) {
                    return Err(Error::Config(format!(
                        "step {}: factorization energies must differ (alpha1 = alpha2 = {a1})",
                        k + 1
                    )));
                }
            }
        }
        match self.task {
            Task::Spectrum => {
                if self.spectrum.window.is_none() && self.spectrum.rectangle.is_none() {
                    return Err(Error::Config("[spectrum] needs `window` or `rectangle`".into()));
                }
                if let Some(r) = self.spectrum.rectangle {
                    rectangle(r)?;
                }
                self.potential_config()?;
            }
            Task::Diagnose => {
                if self.diagnose.energy.is_none() && self.diagnose.rectangle.is_none() {
                    return Err(Error::Config("[diagnose] needs `energy` or `rectangle`".into()));
                }
                if let Some(r) = self.diagnose.rectangle {
                    rectangle(r)?;
                }
                self.potential_config()?;
            }
            Task::Transform => {
                if self.potential_config()?.steps.is_empty() {
                    return Err(Error::Config("task transform needs at least one [[potential.steps]]".into()));
                }
            }
            Task::Reproduce => {
                self.scenario()?;
            }
        }
        Ok(())
    }
}

pub fn rectangle(r: [f64; 4]) -> Result<Rectangle> {
    Rectangle::new(r[0], r[1], r[2], r[3]).map_err(|e| Error::Config(e.to_string()))
}

/// `#` comment lines, then rows `x, re V[, im V]`.
pub fn read_table(path: &Path) -> Result<(Vec<f64>, Vec<C64>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read table {}: {e}", path.display())))?;
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let num = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Config(format!("{}:{}: bad number {s:?}", path.display(), n + 1)))
        };
        if cols.len() < 2 || cols.len() > 3 {
            return Err(Error::Config(format!(
                "{}:{}: expected `x, re[, im]`",
                path.display(),
                n + 1
            )));
        }
        xs.push(num(cols[0])?);
        let im = if cols.len() == 3 { num(cols[2])? } else { 0.0 };
        vs.push(C64::new(num(cols[1])?, im));
    }
    if xs.len() < 4 {
        return Err(Error::Config(format!("{}: table needs at least 4 rows", path.display())));
    }
    Ok((xs, vs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::parse(
            r#"
task = "spectrum"
[potential]
id = "zero"
[spectrum]
window = [0.0, 20.0]
"#,
        )
        .unwrap();
        assert_eq!(c.interval.n_nodes, 2001);
        assert_eq!(c.tolerances, Tolerances::default());
        c.validate().unwrap();
        let again = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = RunConfig::parse("task = \"spectrum\"\nbogus = 1\n").unwrap_err();
        assert!(e.to_string().contains("bogus"), "{e}");
        let e = RunConfig::parse("task = \"spectrum\"\n[interval]\nn = 5\n").unwrap_err();
        assert!(e.is_config());
    }

    #[test]
    fn equal_energies_are_rejected() {
        let c = RunConfig::parse(
            r#"
task = "transform"
[potential]
id = "zero"
[[potential.steps]]
alpha1 = 1.0
u1 = { kind = "eigenfunction", index = 2 }
alpha2 = [1.0, 0.0]
u2 = { kind = "combination", c = 0.5 }
"#,
        )
        .unwrap();
        assert!(c.validate().unwrap_err().is_config());
    }
}
