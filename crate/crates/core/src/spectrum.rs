//! Dirichlet spectra through the characteristic function `D(E) = psi_E(b)`,
//! where `psi_E(a) = 0`, `psi_E'(a) = 1`.

use crate::error::{Error, Result};
use crate::numerics::{endpoint_taylor, integrate};
use crate::potential::Potential;
use crate::wave::WaveSolution;
use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

type C64 = Complex64;

/// Default energy step of the real scan.
pub const SCAN_STEP: f64 = 0.05;
/// Relative root tolerance: `|D| < ROOT_TOL * (1 + |D'| |E|)`.
pub const ROOT_TOL: f64 = 1e-8;
/// Allowed distance of a winding number from the nearest integer.
pub const WINDING_SLACK: f64 = 0.05;
const CONTOUR_RETRIES: usize = 5;

#[derive(Debug, Clone, Copy)]
pub struct CharacteristicSample {
    pub energy: C64,
    pub d: C64,
    pub d_prime: C64,
}

impl CharacteristicSample {
    pub fn is_root(&self) -> bool {
        self.d.norm() < root_tolerance(self.energy, self.d_prime)
    }
}

pub fn root_tolerance(energy: C64, d_prime: C64) -> f64 {
    ROOT_TOL * (1.0 + d_prime.norm() * energy.norm())
}

/// `D(E)` and `dD/dE` from one pass of the augmented system.
pub fn characteristic(potential: &Potential, energy: C64) -> Result<CharacteristicSample> {
    let t = endpoint_taylor(potential, energy, 1)?;
    Ok(CharacteristicSample {
        energy,
        d: t[0],
        d_prime: t[1],
    })
}

/// Taylor coefficients `D^(j)(E) / j!` for `j = 0..=order`.
pub fn characteristic_taylor(potential: &Potential, energy: C64, order: usize) -> Result<Vec<C64>> {
    endpoint_taylor(potential, energy, order)
}

#[derive(Debug, Clone)]
pub struct Level {
    pub energy: C64,
    pub algebraic_multiplicity: usize,
    pub geometric_multiplicity: usize,
    pub eigenfunction: WaveSolution,
    /// `|D(E)|` at the reported energy.
    pub d_abs: f64,
    /// Interior sign changes of the eigenfunction (real potentials only).
    pub node_count: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct SpectrumReport {
    pub levels: Vec<Level>,
    pub warnings: Vec<String>,
}

impl SpectrumReport {
    pub fn energies(&self) -> Vec<C64> {
        self.levels.iter().map(|l| l.energy).collect()
    }

    /// Total count with multiplicity.
    pub fn total_multiplicity(&self) -> usize {
        self.levels.iter().map(|l| l.algebraic_multiplicity).sum()
    }

    /// Level nearest to `e`.
    pub fn nearest(&self, e: C64) -> Option<&Level> {
        self.levels
            .iter()
            .min_by(|a, b| (a.energy - e).norm().total_cmp(&(b.energy - e).norm()))
    }

    fn sort(&mut self) {
        self.levels.sort_by(|a, b| {
            a.energy
                .re
                .total_cmp(&b.energy.re)
                .then(a.energy.im.total_cmp(&b.energy.im))
        });
    }
}

/// Closed rectangle `[re_min, re_max] x [im_min, im_max]` in the energy plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rectangle {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rectangle {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        if !(re_min < re_max && im_min < im_max) {
            return Err(Error::Config(format!(
                "degenerate rectangle [{re_min}, {re_max}] x [{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    fn corners(&self) -> [C64; 4] {
        [
            C64::new(self.re_min, self.im_min),
            C64::new(self.re_max, self.im_min),
            C64::new(self.re_max, self.im_max),
            C64::new(self.re_min, self.im_max),
        ]
    }

    fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    fn center(&self) -> C64 {
        C64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    fn grown(&self, d: f64) -> Self {
        Self {
            re_min: self.re_min - d,
            re_max: self.re_max + d * 0.731,
            im_min: self.im_min - d * 0.613,
            im_max: self.im_max + d * 0.877,
        }
    }
}

/// Memoized `D, D'` evaluations; batches run in parallel.
struct Evaluator<'a> {
    potential: &'a Potential,
    cache: Mutex<HashMap<(u64, u64), CharacteristicSample>>,
}

impl<'a> Evaluator<'a> {
    fn new(potential: &'a Potential) -> Self {
        Self {
            potential,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn key(z: C64) -> (u64, u64) {
        (z.re.to_bits(), z.im.to_bits())
    }

    fn batch(&self, points: &[C64]) -> Result<Vec<CharacteristicSample>> {
        let missing: Vec<C64> = {
            let cache = self.cache.lock().expect("cache lock");
            points
                .iter()
                .copied()
                .filter(|z| !cache.contains_key(&Self::key(*z)))
                .collect()
        };
        let fresh: Vec<Result<CharacteristicSample>> = missing
            .par_iter()
            .map(|&z| characteristic(self.potential, z))
            .collect();
        let mut cache = self.cache.lock().expect("cache lock");
        for s in fresh {
            let s = s?;
            cache.insert(Self::key(s.energy), s);
        }
        Ok(points.iter().map(|z| cache[&Self::key(*z)]).collect())
    }

    fn one(&self, z: C64) -> Result<CharacteristicSample> {
        Ok(self.batch(&[z])?[0])
    }
}

/// Result of the argument principle along a closed polygon.
#[derive(Debug, Clone, Copy)]
pub struct Winding {
    /// Trapezoid estimate of `(1/2 pi i) oint D'/D dE`.
    pub value: C64,
    /// Accumulated branch-tracked `arg D` change over `2 pi`.
    pub tracked: f64,
    pub segments: usize,
}

impl Winding {
    /// Nearest integer, provided both estimates agree with it.
    pub fn count(&self) -> Result<usize> {
        let n = self.tracked.round();
        if (self.value.re - n).abs() > WINDING_SLACK
            || self.value.im.abs() > WINDING_SLACK
            || n < 0.0
        {
            return Err(Error::AmbiguousWinding { value: self.value });
        }
        Ok(n as usize)
    }
}

const MAX_SEGMENTS: usize = 40_000;

fn winding_polygon(ev: &Evaluator, vertices: &[C64]) -> Result<Winding> {
    let scale = vertices.iter().fold(1.0f64, |m, z| m.max(z.norm()));
    let min_len = 1e-12 * scale;
    // Each edge starts with 8 pieces.
    let mut pending: Vec<(C64, C64)> = Vec::new();
    for k in 0..vertices.len() {
        let (z0, z1) = (vertices[k], vertices[(k + 1) % vertices.len()]);
        for j in 0..8 {
            let t0 = j as f64 / 8.0;
            let t1 = (j + 1) as f64 / 8.0;
            pending.push((z0 + (z1 - z0) * t0, z0 + (z1 - z0) * t1));
        }
    }
    let mut total_t = C64::default();
    let mut total_l = 0.0;
    let mut accepted = 0usize;
    while !pending.is_empty() {
        let mut pts: Vec<C64> = pending.iter().flat_map(|(a, b)| [*a, *b]).collect();
        pts.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        pts.dedup();
        ev.batch(&pts)?;
        let mut next = Vec::new();
        for (z0, z1) in pending {
            let s0 = ev.one(z0)?;
            let s1 = ev.one(z1)?;
            if s0.d.norm() == 0.0 || s1.d.norm() == 0.0 {
                return Err(Error::RootOnContour {
                    near: if s0.d.norm() == 0.0 { z0 } else { z1 },
                    retries: 0,
                });
            }
            let l = (s1.d / s0.d).ln();
            let t = (z1 - z0) * 0.5 * (s0.d_prime / s0.d + s1.d_prime / s1.d);
            if l.im.abs() <= 0.5 && (t - l).norm() <= 1e-3 {
                total_t += t;
                total_l += l.im;
                accepted += 1;
            } else {
                if (z1 - z0).norm() < min_len || accepted + next.len() > MAX_SEGMENTS {
                    return Err(Error::RootOnContour {
                        near: (z0 + z1) * 0.5,
                        retries: 0,
                    });
                }
                let m = (z0 + z1) * 0.5;
                next.push((z0, m));
                next.push((m, z1));
            }
        }
        pending = next;
    }
    Ok(Winding {
        value: total_t / C64::new(0.0, 2.0 * PI),
        tracked: total_l / (2.0 * PI),
        segments: accepted,
    })
}

fn circle_vertices(center: C64, radius: f64) -> Vec<C64> {
    (0..16)
        .map(|k| center + C64::from_polar(radius, 2.0 * PI * k as f64 / 16.0))
        .collect()
}

pub fn default_radius(e0: C64) -> f64 {
    1e-3 * e0.norm().max(1.0)
}

/// Winding number of `D` around `|E - E0| = radius`.
pub fn root_multiplicity(potential: &Potential, e0: C64, radius: Option<f64>) -> Result<usize> {
    let ev = Evaluator::new(potential);
    let r = radius.unwrap_or_else(|| default_radius(e0));
    winding_polygon(&ev, &circle_vertices(e0, r))?.count()
}

/// Raw winding around a circle, for diagnostics.
pub fn circle_winding(potential: &Potential, e0: C64, radius: f64) -> Result<Winding> {
    let ev = Evaluator::new(potential);
    winding_polygon(&ev, &circle_vertices(e0, radius))
}

/// Winding of `D` along the boundary of a rectangle.
pub fn rectangle_winding(potential: &Potential, rect: &Rectangle) -> Result<Winding> {
    let ev = Evaluator::new(potential);
    winding_polygon(&ev, &rect.corners())
}

/// Newton iteration on `D^(m-1)`, converging to a root of multiplicity `m`.
pub fn polish_root(potential: &Potential, start: C64, multiplicity: usize) -> Result<C64> {
    let m = multiplicity.max(1);
    let mut e = start;
    for _ in 0..60 {
        let c = characteristic_taylor(potential, e, m)?;
        if c[m].norm() == 0.0 {
            break;
        }
        let step = c[m - 1] / (c[m] * m as f64);
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        e -= step;
        if step.norm() < 1e-14 * e.norm().max(1.0) {
            break;
        }
    }
    Ok(e)
}

/// Unit L2-norm Dirichlet eigenfunction with `psi'(a)` real positive.
pub fn eigenfunction(potential: &Potential, energy: C64) -> Result<WaveSolution> {
    let s = characteristic(potential, energy)?;
    let tol = root_tolerance(energy, s.d_prime);
    if s.d.norm() >= tol {
        return Err(Error::NotAnEigenvalue {
            energy,
            residual: s.d.norm(),
            tolerance: tol,
        });
    }
    let psi = integrate(potential, energy, C64::new(0.0, 0.0), C64::new(1.0, 0.0))?;
    let n = psi.l2_norm();
    Ok(psi.scaled(C64::new(1.0 / n, 0.0)))
}

/// Interior sign changes of `Re psi`, ignoring samples below `1e-9 max |psi|`.
pub fn node_count(values: &[C64]) -> usize {
    let scale = values.iter().fold(0.0f64, |m, z| m.max(z.re.abs()));
    let floor = 1e-9 * scale;
    let mut last = 0.0f64;
    let mut count = 0;
    for z in &values[1..values.len() - 1] {
        if z.re.abs() <= floor {
            continue;
        }
        if last != 0.0 && last.signum() != z.re.signum() {
            count += 1;
        }
        last = z.re;
    }
    count
}

fn check_real(potential: &Potential) -> Result<()> {
    let max_imag = potential.max_imag();
    if max_imag >= 1e-12 * potential.max_abs().max(1.0) {
        return Err(Error::NotReal { max_imag });
    }
    Ok(())
}

/// Real Dirichlet spectrum of a real potential in `[e_min, e_max]`.
pub fn find_real_spectrum(potential: &Potential, e_min: f64, e_max: f64) -> Result<SpectrumReport> {
    find_real_spectrum_with_step(potential, e_min, e_max, SCAN_STEP)
}

pub fn find_real_spectrum_with_step(
    potential: &Potential,
    e_min: f64,
    e_max: f64,
    step: f64,
) -> Result<SpectrumReport> {
    let mut report = SpectrumReport::default();
    if e_min >= e_max {
        return Ok(report);
    }
    check_real(potential)?;
    let n = ((e_max - e_min) / step).ceil().max(1.0) as usize;
    let es: Vec<f64> = (0..=n)
        .map(|k| if k == n { e_max } else { e_min + k as f64 * step })
        .collect();
    let samples: Vec<CharacteristicSample> = es
        .par_iter()
        .map(|&e| characteristic(potential, C64::new(e, 0.0)))
        .collect::<Result<_>>()?;

    let mut roots = Vec::new();
    for k in 0..n {
        let (s0, s1) = (&samples[k], &samples[k + 1]);
        if s0.d.re == 0.0 {
            roots.push(es[k]);
            continue;
        }
        if s0.d.re.signum() != s1.d.re.signum() && s1.d.re != 0.0 {
            roots.push(refine_bracket(potential, es[k], es[k + 1], s0, s1)?);
        }
    }
    if samples[n].d.re == 0.0 {
        roots.push(es[n]);
    }

    let levels: Vec<Level> = roots
        .par_iter()
        .map(|&e| {
            let e = C64::new(e, 0.0);
            let psi = integrate(potential, e, C64::new(0.0, 0.0), C64::new(1.0, 0.0))?;
            let d_abs = psi.at_b().norm();
            let eig = psi.scaled(C64::new(1.0 / psi.l2_norm(), 0.0));
            Ok(Level {
                energy: e,
                algebraic_multiplicity: 1,
                geometric_multiplicity: 1,
                node_count: Some(node_count(&eig.values)),
                eigenfunction: eig,
                d_abs,
            })
        })
        .collect::<Result<_>>()?;
    report.levels = levels;
    report.sort();
    for w in report.levels.windows(2) {
        let (a, b) = (w[0].node_count.unwrap_or(0), w[1].node_count.unwrap_or(0));
        if b > a + 1 {
            report.warnings.push(format!(
                "scan step too coarse: {} level(s) missing between {} and {}",
                b - a - 1,
                w[0].energy.re,
                w[1].energy.re
            ));
        }
    }
    Ok(report)
}

/// Safeguarded Newton inside a sign-change bracket of `Re D`.
fn refine_bracket(
    potential: &Potential,
    mut lo: f64,
    mut hi: f64,
    s_lo: &CharacteristicSample,
    s_hi: &CharacteristicSample,
) -> Result<f64> {
    let f_lo = s_lo.d.re;
    let _ = s_hi;
    let mut e = 0.5 * (lo + hi);
    for _ in 0..200 {
        let s = characteristic(potential, C64::new(e, 0.0))?;
        let f = s.d.re;
        if f == 0.0 {
            return Ok(e);
        }
        if f.signum() == f_lo.signum() {
            lo = e;
        } else {
            hi = e;
        }
        let newton = e - f / s.d_prime.re;
        let next = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let moved = (next - e).abs();
        e = next;
        if moved < 1e-14 * e.abs().max(1.0) || hi - lo < 1e-13 {
            break;
        }
    }
    Ok(e)
}

/// Roots of `D` inside `rect`, counted with multiplicity by winding numbers.
pub fn find_complex_spectrum(potential: &Potential, rect: &Rectangle) -> Result<SpectrumReport> {
    let ev = Evaluator::new(potential);
    let mut region = *rect;
    let mut total = None;
    let mut last_near = rect.center();
    for attempt in 0..=CONTOUR_RETRIES {
        match winding_polygon(&ev, &region.corners()).and_then(|w| w.count()) {
            Ok(n) => {
                total = Some(n);
                break;
            }
            Err(Error::RootOnContour { near, .. }) => {
                last_near = near;
                let d = 1e-3 * (attempt + 1) as f64 * region.width().max(region.height());
                region = rect.grown(d);
            }
            Err(e) => return Err(e),
        }
    }
    let total = total.ok_or(Error::RootOnContour {
        near: last_near,
        retries: CONTOUR_RETRIES,
    })?;

    let mut found: Vec<(C64, usize)> = Vec::new();
    let mut warnings = Vec::new();
    if region != *rect {
        warnings.push(format!(
            "contour perturbed to [{}, {}] x [{}, {}]",
            region.re_min, region.re_max, region.im_min, region.im_max
        ));
    }
    locate(&ev, potential, region, total, 0, &mut found)?;

    let real = check_real(potential).is_ok();
    let mut report = SpectrumReport {
        levels: Vec::new(),
        warnings,
    };
    for (e, m) in found {
        let psi = integrate(potential, e, C64::new(0.0, 0.0), C64::new(1.0, 0.0))?;
        let d_abs = psi.at_b().norm();
        let eig = psi.scaled(C64::new(1.0 / psi.l2_norm(), 0.0));
        report.levels.push(Level {
            energy: e,
            algebraic_multiplicity: m,
            geometric_multiplicity: 1,
            node_count: real.then(|| node_count(&eig.values)),
            eigenfunction: eig,
            d_abs,
        });
    }
    report.sort();
    Ok(report)
}

const SPLIT_RATIOS: [f64; 4] = [0.5371, 0.4629, 0.6113, 0.3887];

fn locate(
    ev: &Evaluator,
    potential: &Potential,
    cell: Rectangle,
    n: usize,
    depth: usize,
    out: &mut Vec<(C64, usize)>,
) -> Result<()> {
    if n == 0 {
        return Ok(());
    }
    let center = cell.center();
    let size = cell.width().max(cell.height());
    if n <= 3 {
        if let Some(root) = try_polish(ev, potential, &cell, n)? {
            out.push((root, n));
            return Ok(());
        }
    }
    if size < 2.0 * default_radius(center) || depth > 60 {
        out.push((center, n));
        return Ok(());
    }
    let split_re = cell.width() >= cell.height();
    let mut last_err = None;
    for ratio in SPLIT_RATIOS {
        let (c1, c2) = if split_re {
            let s = cell.re_min + ratio * cell.width();
            (
                Rectangle { re_max: s, ..cell },
                Rectangle { re_min: s, ..cell },
            )
        } else {
            let s = cell.im_min + ratio * cell.height();
            (
                Rectangle { im_max: s, ..cell },
                Rectangle { im_min: s, ..cell },
            )
        };
        let w1 = winding_polygon(ev, &c1.corners()).and_then(|w| w.count());
        let w2 = winding_polygon(ev, &c2.corners()).and_then(|w| w.count());
        match (w1, w2) {
            (Ok(n1), Ok(n2)) if n1 + n2 == n => {
                locate(ev, potential, c1, n1, depth + 1, out)?;
                locate(ev, potential, c2, n2, depth + 1, out)?;
                return Ok(());
            }
            (Ok(n1), Ok(n2)) => {
                last_err = Some(Error::AmbiguousWinding {
                    value: C64::new((n1 + n2) as f64, n as f64),
                });
            }
            (Err(e), _) | (_, Err(e)) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or(Error::AmbiguousWinding {
        value: C64::new(n as f64, 0.0),
    }))
}

/// Newton from the cell center; accepted when the polished point lies in the
/// cell and the default circle around it winds exactly `n` times.
fn try_polish(ev: &Evaluator, potential: &Potential, cell: &Rectangle, n: usize) -> Result<Option<C64>> {
    let root = match polish_root(potential, cell.center(), n) {
        Ok(r) => r,
        Err(_) => return Ok(None),
    };
    if !(root.re.is_finite() && root.im.is_finite()) || !cell.contains(root) {
        return Ok(None);
    }
    let r = default_radius(root);
    match winding_polygon(ev, &circle_vertices(root, r)).and_then(|w| w.count()) {
        Ok(m) if m == n => Ok(Some(root)),
        _ => Ok(None),
    }
}
