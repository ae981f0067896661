//! Root subspaces of a single level: multiplicities, the chain
//! `(h - E) chi_j = chi_{j-1}` with `chi_0 = phi`, and its residual checks.

use crate::darboux::{transform, DarbouxResult, Recipe, TransformationSpec};
use crate::error::{Error, Result};
use crate::numerics::{apply_h_minus_e_power, fd_residual, integrate_taylor, solve_inhomogeneous};
use crate::potential::Potential;
use crate::spectrum::{
    characteristic, eigenfunction, find_complex_spectrum, polish_root, root_multiplicity, root_tolerance,
    Rectangle,
};
use crate::wave::{inner, WaveSolution};
use num_complex::Complex64;
use rayon::prelude::*;

type C64 = Complex64;

/// `||(h - E) chi_j - chi_{j-1}|| <= CHAIN_TOL ||chi_{j-1}||`.
pub const CHAIN_TOL: f64 = 1e-6;
/// `||(h - E)^m chi_{m-1}|| <= NILPOTENCY_TOL ||chi_{m-1}||`.
pub const NILPOTENCY_TOL: f64 = 1e-5;
/// `|chi_j(a)|, |chi_j(b)| <= BOUNDARY_TOL ||chi_j||`.
pub const BOUNDARY_TOL: f64 = 1e-7;
/// Longest chain we build.
pub const MAX_CHAIN: usize = 4;

/// Half-width of the centered stencil used for powers of `h - E`.
const POWER_HALF_WIDTH: usize = 8;
/// Sum of `|weights|` of that stencil, in units of `1 / H^2`.
const POWER_STENCIL_GAIN: f64 = 6.5;

/// `(h - E)^m` applied to the top of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Nilpotency {
    pub power: usize,
    /// `||(h - E)^m chi_{m-1}|| / ||chi_{m-1}||` over the covered nodes.
    pub value: f64,
    /// Grid stride of the subgrid the stencil runs on.
    pub stride: usize,
    /// `[x_lo, x_hi]` reached by the `m`-fold stencil.
    pub span: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct JordanReport {
    pub energy: C64,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    /// `[phi, chi_1, ...]`, with `||phi||_2 = 1` and every `chi_j` orthogonal to `phi`.
    pub chain: Vec<WaveSolution>,
    /// Relative residual of each member's defining equation.
    pub residuals: Vec<f64>,
    /// `(|chi_j(a)|, |chi_j(b)|) / ||chi_j||` per member.
    pub boundary_residuals: Vec<(f64, f64)>,
    pub nilpotency: Nilpotency,
    /// Distance to the chain rebuilt by repeated inhomogeneous solves.
    pub inhomogeneous: Option<f64>,
    /// Distance of `chi_1` to the image of the parent's energy derivative,
    /// for Darboux-derived potentials.
    pub upstream: Option<f64>,
}

impl JordanReport {
    pub fn is_diagonalizable(&self) -> bool {
        self.algebraic_multiplicity == self.geometric_multiplicity
    }

    pub fn chain_ok(&self) -> bool {
        self.residuals.iter().all(|r| *r <= CHAIN_TOL)
    }

    pub fn boundary_ok(&self) -> bool {
        self.boundary_residuals
            .iter()
            .all(|(a, b)| *a <= BOUNDARY_TOL && *b <= BOUNDARY_TOL)
    }

    pub fn nilpotency_ok(&self) -> bool {
        self.nilpotency.value <= NILPOTENCY_TOL
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(*r))
    }

    pub fn max_boundary(&self) -> f64 {
        self.boundary_residuals.iter().fold(0.0, |m, (a, b)| m.max(*a).max(*b))
    }
}

/// Diagnose the level at `e0`; fails when the chain residuals are out of tolerance.
pub fn diagnose_level(potential: &Potential, e0: C64) -> Result<JordanReport> {
    let report = diagnose_level_unchecked(potential, e0)?;
    if !report.chain_ok() {
        return Err(Error::ChainResidual(format!(
            "max chain residual {:.3e} at E = {} (multiplicity {})",
            report.max_residual(),
            report.energy,
            report.algebraic_multiplicity
        )));
    }
    if !report.boundary_ok() {
        return Err(Error::ChainResidual(format!(
            "boundary value {:.3e} at E = {}",
            report.max_boundary(),
            report.energy
        )));
    }
    Ok(report)
}

/// Like [`diagnose_level`] but returns the report whatever the residuals.
pub fn diagnose_level_unchecked(potential: &Potential, e0: C64) -> Result<JordanReport> {
    let m = root_multiplicity(potential, e0, None)?;
    if m == 0 {
        return Err(Error::NotSpectralPoint(e0));
    }
    diagnose_with_multiplicity(potential, e0, m)
}

fn diagnose_with_multiplicity(potential: &Potential, e0: C64, m: usize) -> Result<JordanReport> {
    if m > MAX_CHAIN {
        return Err(Error::Unsupported(format!(
            "root subspace of dimension {m} (at most {MAX_CHAIN})"
        )));
    }
    let energy = polish_root(potential, e0, m)?;
    let energy = if (energy - e0).norm() <= crate::spectrum::default_radius(e0) {
        energy
    } else {
        e0
    };
    chain_report(potential, energy, m)
}

/// Chain at exactly `energy`, no polishing.
fn chain_report(potential: &Potential, energy: C64, m: usize) -> Result<JordanReport> {
    if m == 1 {
        let s = characteristic(potential, energy)?;
        if s.d.norm() >= root_tolerance(energy, s.d_prime) {
            return Err(Error::NotSpectralPoint(energy));
        }
    }

    let zero = C64::new(0.0, 0.0);
    let raw = integrate_taylor(potential, energy, zero, C64::new(1.0, 0.0), m - 1)?;
    let norm = raw[0].l2_norm();
    let chain = gauge_fix(
        raw.iter()
            .map(|w| w.scaled(C64::new(1.0 / norm, 0.0)))
            .collect(),
    );

    let residuals = chain_residuals(potential, energy, &chain);
    let boundary_residuals = chain
        .iter()
        .map(|c| {
            let s = c.max_norm().max(1e-300);
            (c.at_a().norm() / s, c.at_b().norm() / s)
        })
        .collect();
    let nilpotency = nilpotency(potential, energy, &chain[m - 1], m);
    let inhomogeneous = if m > 1 {
        inhomogeneous_distance(potential, energy, &chain).ok()
    } else {
        None
    };
    let upstream = if m > 1 {
        upstream_distance(potential, energy, &chain)?
    } else {
        None
    };

    Ok(JordanReport {
        energy,
        algebraic_multiplicity: m,
        geometric_multiplicity: 1,
        chain,
        residuals,
        boundary_residuals,
        nilpotency,
        inhomogeneous,
        upstream,
    })
}

/// Make every `chi_j`, `j >= 1`, L2-orthogonal to `phi` by subtracting
/// shifted copies of the chain.
fn gauge_fix(mut chain: Vec<WaveSolution>) -> Vec<WaveSolution> {
    let g = chain[0].interval;
    let pp = inner(&chain[0].values, &chain[0].values, &g);
    for j in 1..chain.len() {
        let lambda = inner(&chain[0].values, &chain[j].values, &g) / pp;
        let old = chain.clone();
        for k in j..chain.len() {
            chain[k] = chain[k].combine(C64::new(1.0, 0.0), &old[k - j], -lambda);
        }
    }
    chain
}

fn remove_phi(f: &WaveSolution, phi: &WaveSolution) -> WaveSolution {
    let g = phi.interval;
    let lambda = inner(&phi.values, &f.values, &g) / inner(&phi.values, &phi.values, &g);
    f.combine(C64::new(1.0, 0.0), phi, -lambda)
}

fn chain_residuals(potential: &Potential, energy: C64, chain: &[WaveSolution]) -> Vec<f64> {
    (0..chain.len())
        .map(|j| {
            if j == 0 {
                fd_residual(potential, energy, &chain[0].values, None, chain[0].max_norm())
            } else {
                let prev = &chain[j - 1];
                fd_residual(potential, energy, &chain[j].values, Some(&prev.values), prev.max_norm())
            }
        })
        .collect()
}

/// Subgrid spacing at which `m` passes of the stencil keep roundoff near
/// `1e-15 C^m / H^(2m)` below `1e-6`.
fn power_stride(h: f64, m: usize) -> usize {
    let target = (1e-15 * POWER_STENCIL_GAIN.powi(m as i32) / 1e-6).powf(1.0 / (2 * m) as f64);
    (target / h).ceil().max(1.0) as usize
}

fn nilpotency(potential: &Potential, energy: C64, top: &WaveSolution, m: usize) -> Nilpotency {
    let g = potential.interval();
    let stride = power_stride(g.spacing(), m);
    let (idx, out) = apply_h_minus_e_power(potential, energy, &top.values, stride, POWER_HALF_WIDTH, m);
    let value = out
        .iter()
        .filter(|z| z.re.is_finite() && z.im.is_finite())
        .fold(0.0f64, |acc, z| acc.max(z.norm()))
        / top.max_norm().max(1e-300);
    let span = match (idx.first(), idx.last()) {
        (Some(&lo), Some(&hi)) => (g.node(lo), g.node(hi)),
        _ => (f64::NAN, f64::NAN),
    };
    let value = if out.is_empty() { f64::NAN } else { value };
    Nilpotency {
        power: m,
        value,
        stride,
        span,
    }
}

/// Rebuild the chain by `solve_inhomogeneous` and compare after fixing the gauge.
fn inhomogeneous_distance(potential: &Potential, energy: C64, chain: &[WaveSolution]) -> Result<f64> {
    let zero = C64::new(0.0, 0.0);
    let phi = &chain[0];
    let mut prev = phi.clone();
    let mut worst: f64 = 0.0;
    for member in &chain[1..] {
        let y = solve_inhomogeneous(potential, energy, &prev, zero, zero)?;
        let y = remove_phi(&y, phi);
        let scale = member.max_norm().max(1e-300);
        let d = y
            .values
            .iter()
            .zip(&member.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        worst = worst.max(d / scale);
        prev = y;
    }
    Ok(worst)
}

/// `chi_1` against `L psi~ / lambda`, where `psi~` is the energy derivative
/// of the parent's solution `psi` and `L psi = lambda phi`.
fn upstream_distance(potential: &Potential, energy: C64, chain: &[WaveSolution]) -> Result<Option<f64>> {
    let step = match DarbouxResult::from_potential(potential) {
        Some(s) => s,
        None => return Ok(None),
    };
    let psi = integrate_taylor(&step.parent, energy, C64::new(0.0, 0.0), C64::new(1.0, 0.0), 1)?;
    let l_psi = step.apply_operator(&psi[0], None)?;
    let l_tilde = step.apply_operator(&psi[1], Some(&psi[0]))?;
    let phi = &chain[0];
    let g = phi.interval;
    let lambda = inner(&phi.values, &l_psi.values, &g) / inner(&phi.values, &phi.values, &g);
    if lambda.norm() <= 1e-10 * l_psi.max_norm() {
        return Ok(None);
    }
    let up = remove_phi(&l_tilde.scaled(1.0 / lambda), phi);
    let chi = &chain[1];
    let d = up
        .values
        .iter()
        .zip(&chi.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
    Ok(Some(d / chi.max_norm().max(1e-300)))
}

#[derive(Debug, Clone)]
pub struct Diagonalizability {
    pub diagonalizable: bool,
    pub levels: Vec<JordanReport>,
    pub warnings: Vec<String>,
}

/// True iff every root of `D` inside `rect` is simple.
pub fn is_diagonalizable(potential: &Potential, rect: &Rectangle) -> Result<Diagonalizability> {
    let spectrum = find_complex_spectrum(potential, rect)?;
    let levels = spectrum
        .levels
        .par_iter()
        .map(|l| diagnose_with_multiplicity(potential, l.energy, l.algebraic_multiplicity))
        .collect::<Result<Vec<_>>>()?;
    Ok(Diagonalizability {
        diagonalizable: levels.iter().all(|r| r.algebraic_multiplicity == 1),
        levels,
        warnings: spectrum.warnings,
    })
}

/// A second step built on the eigenfunction of a degenerate level.
#[derive(Debug, Clone)]
pub struct EmergenceReport {
    pub energy: C64,
    pub before: usize,
    pub after: usize,
    /// Chain of the first potential at the level.
    pub chain: JordanReport,
    pub step: DarbouxResult,
    /// `L2 chi`, an eigenfunction of the new potential at `energy`.
    pub image: WaveSolution,
    /// `||(h2 - E) L2 chi|| / ||L2 chi||`.
    pub image_residual: f64,
    /// `(|L2 chi (a)|, |L2 chi (b)|) / ||L2 chi||`.
    pub image_boundary: (f64, f64),
    /// `||L2 phi|| / ||L2 chi||`.
    pub kernel_residual: f64,
    /// Distance of `L2 chi` to the Dirichlet eigenfunction of `h2` after the best scalar fit.
    pub eigenfunction_distance: Option<f64>,
}

/// Transform `v1` by `second` (with `u1` the eigenfunction at `e_l`) and check
/// that the associated function at `e_l` becomes an eigenfunction.
pub fn background_emergence_check(
    v1: &Potential,
    e_l: C64,
    second: &TransformationSpec,
) -> Result<EmergenceReport> {
    // Same integrator settings as the transformation functions, so the
    // chain and u1 agree to roundoff.
    let tight = crate::darboux::tightened(v1);
    let v1 = &tight;
    let before = root_multiplicity(v1, e_l, None)?;
    if before == 0 {
        return Err(Error::NotSpectralPoint(e_l));
    }
    // The chain must be built at the factorization energy itself: L2 only
    // annihilates u1 exactly, and the map cancels to O(t^3) near a common zero.
    if (second.alpha1 - e_l).norm() > crate::spectrum::default_radius(e_l) {
        return Err(Error::AlphaMismatch {
            alpha: second.alpha1,
            index: 0,
            detail: format!("first factorization energy must be the level {e_l}"),
        });
    }
    let chain = chain_report(v1, second.alpha1, before.min(MAX_CHAIN))?;
    if before < 2 {
        return Err(Error::Unsupported(format!(
            "level {e_l} is simple; there is no associated function to promote"
        )));
    }
    // Reuse the chain's own phi as u1 so that L2 annihilates it to roundoff.
    let mut second = second.clone();
    if matches!(second.u1, Recipe::Eigenfunction { .. }) {
        second.u1 = Recipe::Given(chain.chain[0].clone());
    }
    let step = transform(v1, &second)?;
    let h2 = &step.potential;
    let energy = chain.energy;
    let after = root_multiplicity(h2, energy, None)?;
    if after + 1 != before {
        return Err(Error::ChainDidNotShorten { before, after });
    }

    let (phi, chi) = (&chain.chain[0], &chain.chain[1]);
    let image = step.apply_operator(chi, Some(phi))?;
    let scale = image.max_norm().max(1e-300);
    let image_residual = fd_residual(h2, energy, &image.values, None, scale);
    let image_boundary = (image.at_a().norm() / scale, image.at_b().norm() / scale);
    let kernel_residual = step.apply_operator(phi, None)?.max_norm() / scale;

    let eigenfunction_distance = eigenfunction(h2, energy).ok().map(|e| {
        let g = e.interval;
        let c = inner(&e.values, &image.values, &g) / inner(&e.values, &e.values, &g);
        image
            .values
            .iter()
            .zip(&e.values)
            .fold(0.0f64, |m, (a, b)| m.max((a - b * c).norm()))
            / scale
    });

    Ok(EmergenceReport {
        energy,
        before,
        after,
        chain,
        step,
        image,
        image_residual,
        image_boundary,
        kernel_residual,
        eigenfunction_distance,
    })
}
