//! End-to-end runs of the worked examples: build the transformation
//! functions, transform, compute spectra and chains, compare with the
//! closed forms.

use crate::catalog::{
    dim3_u2, example3, example3_value, kappa_in_window, pt_defect, v1_forward_value, v1ex, v1ex_value, v2,
    v2_value,
};
use crate::darboux::{darboux_potential, second_solution_check, transform, DarbouxResult, Recipe, TransformationSpec};
use crate::error::{Error, Result};
use crate::grid::Interval;
use crate::jordan::{
    background_emergence_check, diagnose_level_unchecked, JordanReport, BOUNDARY_TOL, CHAIN_TOL, NILPOTENCY_TOL,
};
use crate::numerics::apply_h_minus_e;
use crate::potential::Potential;
use crate::spectrum::{characteristic, find_complex_spectrum, find_real_spectrum, Rectangle, SpectrumReport};
use crate::wave::{inner, WaveSolution};
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

type C64 = Complex64;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Energies away from every spectrum in the examples.
pub const GENERIC_ENERGIES: [C64; 5] = [
    C64::new(0.7, 0.3),
    C64::new(1.9, 0.0),
    C64::new(3.3, -0.2),
    C64::new(5.1, 0.1),
    C64::new(8.6, 0.0),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    ForwardB2,
    ForwardBgeneric { b: f64 },
    BackwardV2 { kappa: f64 },
    ChainDim3,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scenario::ForwardB2 => write!(f, "forward-B2"),
            Scenario::ForwardBgeneric { b } => write!(f, "forward-Bgeneric({b})"),
            Scenario::BackwardV2 { kappa } => write!(f, "backward-V2({kappa})"),
            Scenario::ChainDim3 => write!(f, "chain-dim3"),
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    /// `forward-B2`, `forward-Bgeneric(1.3)`, `backward-V2(1.2)`, `chain-dim3`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], Some(&s[i + 1..s.len() - 1])),
            _ => (s, None),
        };
        let number = |what: &str| -> Result<f64> {
            let a = arg.ok_or_else(|| Error::Config(format!("scenario {head} needs a parameter: {head}({what})")))?;
            a.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad {what} in scenario id {s:?}")))
        };
        let no_arg = |sc: Scenario| {
            if arg.is_some() {
                Err(Error::Config(format!("scenario {head} takes no parameter")))
            } else {
                Ok(sc)
            }
        };
        match head {
            "forward-B2" => no_arg(Scenario::ForwardB2),
            "chain-dim3" => no_arg(Scenario::ChainDim3),
            "forward-Bgeneric" => Ok(Scenario::ForwardBgeneric { b: number("B")? }),
            "backward-V2" => Ok(Scenario::BackwardV2 { kappa: number("kappa")? }),
            _ => Err(Error::Config(format!(
                "unknown scenario {s:?} (expected forward-B2, forward-Bgeneric(B), backward-V2(kappa), chain-dim3)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    AtMost,
    AtLeast,
    Equals,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub threshold: f64,
    pub passed: bool,
    pub note: String,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Self::make(name, value, Bound::AtMost, threshold, value <= threshold)
    }

    pub fn at_least(name: &str, value: f64, threshold: f64) -> Self {
        Self::make(name, value, Bound::AtLeast, threshold, value >= threshold)
    }

    pub fn equals(name: &str, value: usize, expected: usize) -> Self {
        Self::make(name, value as f64, Bound::Equals, expected as f64, value == expected)
    }

    pub fn flag(name: &str, ok: bool) -> Self {
        Self::make(name, if ok { 1.0 } else { 0.0 }, Bound::Equals, 1.0, ok)
    }

    fn make(name: &str, value: f64, bound: Bound, threshold: f64, passed: bool) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            threshold,
            passed,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone)]
pub struct StageFailure {
    pub stage: String,
    pub message: String,
}

/// Checks, failures and intermediate artifacts of one scenario run.
#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub checks: Vec<Check>,
    pub failures: Vec<StageFailure>,
    pub potentials: Vec<(String, Potential)>,
    pub spectra: Vec<(String, SpectrumReport)>,
    pub chains: Vec<(String, JordanReport)>,
    /// Reported quantities that are not pass/fail.
    pub notes: Vec<(String, String)>,
}

impl ScenarioReport {
    fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            checks: Vec::new(),
            failures: Vec::new(),
            potentials: Vec::new(),
            spectra: Vec::new(),
            chains: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Option<T> {
        match f() {
            Ok(v) => Some(v),
            Err(e) => {
                self.failures.push(StageFailure {
                    stage: name.into(),
                    message: e.to_string(),
                });
                None
            }
        }
    }

    fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    fn note(&mut self, key: &str, value: impl fmt::Display) {
        self.notes.push((key.into(), value.to_string()));
    }
}

/// Run a scenario on `[-pi, pi]` with `n_nodes` nodes. Only parameter
/// errors are returned as `Err`; stage failures land in the report.
pub fn reproduce_scenario(scenario: &Scenario, interval: Interval) -> Result<ScenarioReport> {
    match *scenario {
        Scenario::ForwardB2 => Ok(forward(scenario, 2.0, interval)),
        Scenario::ForwardBgeneric { b } => {
            if !(b > 0.0) || 2.0 * b == 1.0 {
                return Err(Error::Config(format!("B = {b} must be positive and differ from 1/2")));
            }
            Ok(forward(scenario, b, interval))
        }
        Scenario::BackwardV2 { kappa } => {
            if !kappa_in_window(kappa) {
                return Err(Error::Config(format!(
                    "kappa = {kappa} outside the regularity window 0.5 <= kappa <= 1.5, kappa != 1"
                )));
            }
            Ok(backward(scenario, kappa, interval))
        }
        Scenario::ChainDim3 => Ok(chain_dim3(scenario, interval)),
    }
}

/// First step on `V0 = 0`: `u1` the level at `1`, `u2 ~ exp(-iBx)` at `B^2`.
pub fn forward_spec(b: f64) -> TransformationSpec {
    TransformationSpec {
        alpha1: c(1.0),
        u1: Recipe::Eigenfunction { index: Some(2) },
        alpha2: c(b * b),
        u2: Recipe::Combination { c: c(1.0 / b) },
    }
}

/// Second step on the first-step potential: `u1` the level at `4`, `u2` the
/// left-vanishing solution at `kappa^2`.
pub fn backward_spec(kappa: f64) -> TransformationSpec {
    TransformationSpec {
        alpha1: c(4.0),
        u1: Recipe::Eigenfunction { index: None },
        alpha2: c(kappa * kappa),
        u2: Recipe::InitialData {
            y_a: c(0.0),
            dy_a: c(1.0),
        },
    }
}

/// `max |V(x) - f(x)|` over nodes where both are finite.
pub fn max_deviation(v: &Potential, f: impl Fn(f64) -> C64) -> f64 {
    v.interval()
        .nodes()
        .iter()
        .map(|&x| (v.eval(x) - f(x)).norm())
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max)
}

/// Expected levels with multiplicities, compared one-to-one with `found`.
/// Returns the largest energy deviation, or infinity on a count or
/// multiplicity mismatch.
pub fn spectrum_deviation(found: &SpectrumReport, expected: &[(f64, usize)]) -> f64 {
    if found.levels.len() != expected.len() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for (level, (e, m)) in found.levels.iter().zip(expected) {
        if level.algebraic_multiplicity != *m {
            return f64::INFINITY;
        }
        worst = worst.max((level.energy - c(*e)).norm());
    }
    worst
}

fn describe(s: &SpectrumReport) -> String {
    s.levels
        .iter()
        .map(|l| {
            if l.algebraic_multiplicity > 1 {
                format!("{:.10}(x{})", l.energy.re, l.algebraic_multiplicity)
            } else {
                format!("{:.10}", l.energy.re)
            }
        })
        .collect::<Vec<_>>()
        .join(", ")
}

fn max_imag(s: &SpectrumReport) -> f64 {
    s.levels.iter().fold(0.0, |m, l| m.max(l.energy.im.abs()))
}

/// `|D(E)|` against the largest `|D|` on a circle of radius `r` around `E`.
pub fn local_gap(potential: &Potential, e: C64, r: f64) -> Result<f64> {
    let d0 = characteristic(potential, e)?.d.norm();
    let mut scale: f64 = 0.0;
    for k in 0..8 {
        let z = e + C64::from_polar(r, std::f64::consts::PI * k as f64 / 4.0);
        scale = scale.max(characteristic(potential, z)?.d.norm());
    }
    Ok(d0 / scale.max(1e-300))
}

/// Rayleigh quotient `<u, h u> / <u, u>` with the finite-difference `h`, and
/// the relative residual of `(h - E) u` at that energy.
pub fn fit_energy(potential: &Potential, u: &WaveSolution) -> (C64, f64) {
    let g = potential.interval();
    let hu = apply_h_minus_e(potential, c(0.0), &u.values, 1);
    let e = inner(&u.values, &hu, &g) / inner(&u.values, &u.values, &g);
    let r = crate::numerics::fd_residual(potential, e, &u.values, None, u.max_norm());
    (e, r)
}

/// Undo a step with its own exceptional solutions: `u1/W` at `alpha2`
/// and `u2/W` at `alpha1` transform `V1` back to the parent.
pub fn exceptional_return(step: &DarbouxResult) -> Result<(Potential, f64)> {
    let (at_alpha1, at_alpha2) = step.exceptional();
    let back = darboux_potential(&at_alpha2, &at_alpha1, &step.potential)?;
    let parent = step.parent.clone();
    let dev = max_deviation(&back.potential, |x| parent.eval(x));
    Ok((back.potential, dev))
}

/// `max |V2(kappa, x)|` over the interior nodes, and at `x = -pi/2`.
pub fn kappa_probe(kappa: f64, interval: Interval) -> (f64, f64) {
    let n = interval.n_nodes;
    let max = (1..n - 1)
        .map(|i| v2_value(kappa, interval.node(i)).abs())
        .fold(0.0, f64::max);
    (max, v2_value(kappa, -std::f64::consts::FRAC_PI_2).abs())
}

fn chain_checks(report: &mut ScenarioReport, tag: &str, r: &JordanReport, length: usize) {
    report.push(Check::equals(&format!("{tag}: chain length"), r.chain.len(), length));
    report.push(Check::at_most(&format!("{tag}: chain residual"), r.max_residual(), CHAIN_TOL));
    report.push(
        Check::at_most(&format!("{tag}: nilpotency"), r.nilpotency.value, NILPOTENCY_TOL).with_note(format!(
            "stride {}, span [{:.4}, {:.4}]",
            r.nilpotency.stride, r.nilpotency.span.0, r.nilpotency.span.1
        )),
    );
    report.push(Check::at_most(&format!("{tag}: boundary values"), r.max_boundary(), BOUNDARY_TOL));
    if let Some(d) = r.inhomogeneous {
        report.push(Check::at_most(&format!("{tag}: inhomogeneous-solve agreement"), d, 1e-6));
    }
    if let Some(d) = r.upstream {
        report.push(Check::at_most(&format!("{tag}: upstream image agreement"), d, 1e-6));
    }
}

fn forward(scenario: &Scenario, b: f64, g: Interval) -> ScenarioReport {
    let mut report = ScenarioReport::new(*scenario);
    let v0 = Potential::zero(g);
    let spec = forward_spec(b);
    let Some(step) = report.stage("transform", || transform(&v0, &spec)) else {
        return report;
    };
    let v1 = step.potential.clone();
    report.potentials.push(("v1_pipeline".into(), v1.clone()));
    if let Some(closed) = report.stage("closed form", || v1ex(1.0, b, g)) {
        report.push(Check::at_most("closed form: PT symmetry", pt_defect(&closed), 1e-10));
        report.potentials.push(("v1_closed_form".into(), closed));
    }
    report.push(Check::at_most(
        "pipeline vs v1ex closed form",
        max_deviation(&v1, |x| v1ex_value(1.0, b, x)),
        1e-8,
    ));
    report.push(
        Check::at_most(
            "pipeline vs conjugate closed form",
            max_deviation(&v1, |x| v1_forward_value(1.0, b, x)),
            1e-8,
        )
        .with_note("denominator A cos(Ax) + iB sin(Ax)"),
    );
    if let Some(r) = report.stage("intertwining", || step.verify_intertwining(&GENERIC_ENERGIES)) {
        report.push(Check::at_most("intertwining residual", r.max(), 1e-6));
    }

    // Levels n^2/4 of V0 below 7, minus the removed level 1, plus B^2.
    let mut expected: Vec<(f64, usize)> = (1..=5)
        .map(|n| (n as f64 * n as f64 / 4.0, 1))
        .filter(|(e, _)| *e != 1.0)
        .collect();
    let b2 = b * b;
    if b2 > 0.1 && b2 < 7.0 {
        match expected.iter_mut().find(|(e, _)| (*e - b2).abs() < 1e-12) {
            Some(level) => level.1 += 1,
            None => expected.push((b2, 1)),
        }
    }
    expected.sort_by(|p, q| p.0.total_cmp(&q.0));
    let rect = Rectangle::new(0.1, 7.0, -1.0, 1.0).expect("valid rectangle");
    if let Some(s) = report.stage("spectrum", || find_complex_spectrum(&v1, &rect)) {
        report.note("spectrum", describe(&s));
        report.push(Check::at_most("spectrum matches expected set", spectrum_deviation(&s, &expected), 1e-8));
        report.push(Check::at_most("spectrum is real", max_imag(&s), 1e-8));
        report.spectra.push(("v1".into(), s));
    }

    let (at_alpha1, _) = step.exceptional();
    if let Some(s) = report.stage("level removal", || second_solution_check(&v1, &at_alpha1)) {
        report.push(Check::flag("removed level: no Dirichlet solution at 1", !s.is_eigenvalue));
    }
    if let Some(gap) = report.stage("level removal gap", || local_gap(&v1, c(1.0), 0.25)) {
        report.push(Check::at_least("removed level: |D(1)| / local scale", gap, 0.01));
    }

    if (b2 - 4.0).abs() < 1e-12 {
        if let Some(r) = report.stage("jordan chain at 4", || diagnose_level_unchecked(&v1, c(4.0))) {
            report.push(Check::equals("multiplicity at 4", r.algebraic_multiplicity, 2));
            chain_checks(&mut report, "E=4", &r, 2);
            report.chains.push(("v1 at 4".into(), r));
        }
        if let Some((_, dev)) = report.stage("exceptional return", || exceptional_return(&step)) {
            report.push(Check::at_most("return to V0 through exceptional solutions", dev, 1e-7));
        }
    }
    report
}

fn backward(scenario: &Scenario, kappa: f64, g: Interval) -> ScenarioReport {
    let mut report = ScenarioReport::new(*scenario);
    let Some(v1) = report.stage("first potential", || v1ex(1.0, 2.0, g)) else {
        return report;
    };
    report.potentials.push(("v1".into(), v1.clone()));
    let spec = backward_spec(kappa);
    let Some(em) = report.stage("second transform", || background_emergence_check(&v1, c(4.0), &spec)) else {
        return report;
    };
    let v2p = em.step.potential.clone();
    report.potentials.push(("v2_pipeline".into(), v2p.clone()));
    report.push(Check::equals("multiplicity at 4 before", em.before, 2));
    report.push(Check::equals("multiplicity at 4 after", em.after, 1));
    report.push(Check::at_most("L2 chi: eigenfunction residual", em.image_residual, 1e-6));
    report.push(Check::at_most(
        "L2 chi: boundary values",
        em.image_boundary.0.max(em.image_boundary.1),
        1e-7,
    ));
    report.push(Check::at_most("L2 phi vanishes", em.kernel_residual, 1e-8));
    if let Some(d) = em.eigenfunction_distance {
        report.push(Check::at_most("L2 chi proportional to the eigenfunction", d, 1e-6));
    }
    report.chains.push(("v1 at 4".into(), em.chain.clone()));
    report.push(Check::at_most("real potential", v2p.max_imag(), 1e-8));
    report.push(
        Check::at_most(
            "pipeline vs closed form",
            max_deviation(&v2p, |x| c(v2_value(kappa, x))),
            1e-7,
        )
        .with_note("reported separately from the spectral checks"),
    );
    if let Some(closed) = report.stage("closed form", || v2(kappa, g)) {
        if let Some(s) = report.stage("closed-form spectrum", || find_real_spectrum(&closed, 0.1, 7.0)) {
            report.note("closed-form spectrum", describe(&s));
            report.spectra.push(("v2_closed_form".into(), s));
        }
        report.potentials.push(("v2_closed_form".into(), closed));
    }

    let k2 = kappa * kappa;
    let mut expected = vec![(0.25, 1), (2.25, 1), (4.0, 1), (6.25, 1)];
    expected.push((k2, 1));
    expected.sort_by(|p, q| p.0.total_cmp(&q.0));
    let rect = Rectangle::new(0.1, 7.0, -0.5, 0.5).expect("valid rectangle");
    if let Some(s) = report.stage("spectrum", || find_complex_spectrum(&v2p, &rect)) {
        report.note("spectrum", describe(&s));
        report.push(Check::at_most("spectrum matches expected set", spectrum_deviation(&s, &expected), 1e-7));
        report.push(Check::flag(
            "diagonalizable",
            s.levels.iter().all(|l| l.algebraic_multiplicity == 1),
        ));
        if let Some(closed) = report.spectra.iter().find(|(n, _)| n == "v2_closed_form") {
            let pairs: Vec<(f64, usize)> = closed.1.levels.iter().map(|l| (l.energy.re, 1)).collect();
            report.push(Check::at_most(
                "pipeline spectrum agrees with closed-form spectrum",
                spectrum_deviation(&s, &pairs),
                1e-7,
            ));
        }
        report.spectra.push(("v2".into(), s));
    }
    if let Ok(s) = characteristic(&v2p, c(k2)) {
        report.note("|D2(kappa^2)|", format!("{:.6e}", s.d.norm()));
    }
    report
}

fn chain_dim3(scenario: &Scenario, g: Interval) -> ScenarioReport {
    let mut report = ScenarioReport::new(*scenario);
    let v0 = Potential::zero(g);
    let Some(first) = report.stage("first transform", || transform(&v0, &forward_spec(2.0))) else {
        return report;
    };
    let v1 = first.potential.clone();
    report.potentials.push(("v1".into(), v1.clone()));

    let u2 = WaveSolution::from_fn(c(4.0), g, Arc::new(dim3_u2));
    let (e_fit, residual) = fit_energy(&v1, &u2);
    report.note("fitted energy of u2", e_fit);
    report.push(Check::at_most("u2 solves h1 at the fitted energy", residual, 1e-6));
    report.push(Check::at_most("fitted energy is 4", (e_fit - c(4.0)).norm(), 1e-8));
    let u2 = WaveSolution::from_fn(e_fit, g, Arc::new(dim3_u2));
    let spec = TransformationSpec {
        alpha1: c(0.25),
        u1: Recipe::Eigenfunction { index: Some(1) },
        alpha2: e_fit,
        u2: Recipe::Given(u2),
    };
    let Some(second) = report.stage("second transform", || transform(&v1, &spec)) else {
        return report;
    };
    let v2p = second.potential.clone();
    report.potentials.push(("v2_pipeline".into(), v2p.clone()));
    report.push(Check::at_most("pipeline vs closed form", max_deviation(&v2p, example3_value), 1e-7));
    if let Some(closed) = report.stage("closed form", || example3(g)) {
        report.push(Check::at_most("closed form: PT symmetry", pt_defect(&closed), 1e-10));
        report.potentials.push(("v2_closed_form".into(), closed));
    }
    if let Some(r) = report.stage("intertwining", || second.verify_intertwining(&GENERIC_ENERGIES)) {
        report.push(Check::at_most("intertwining residual", r.max(), 1e-6));
    }

    let rect = Rectangle::new(0.1, 10.0, -1.0, 1.0).expect("valid rectangle");
    let expected = [(2.25, 1), (4.0, 3), (6.25, 1), (9.0, 1)];
    if let Some(s) = report.stage("spectrum", || find_complex_spectrum(&v2p, &rect)) {
        report.note("spectrum", describe(&s));
        report.push(Check::at_most("spectrum matches expected set", spectrum_deviation(&s, &expected), 1e-8));
        report.spectra.push(("v2".into(), s));
    }
    for e in [0.25, 1.0] {
        if let Ok(s) = characteristic(&v2p, c(e)) {
            report.push(Check::at_least(&format!("|D({e})| (not a level)"), s.d.norm(), 0.01));
        }
    }
    if let Some(r) = report.stage("jordan chain at 4", || diagnose_level_unchecked(&v2p, c(4.0))) {
        report.push(Check::equals("multiplicity at 4", r.algebraic_multiplicity, 3));
        chain_checks(&mut report, "E=4", &r, 3);
        report.chains.push(("v2 at 4".into(), r));
    }
    report
}
