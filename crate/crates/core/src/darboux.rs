//! Second-order Darboux transformations built from two solutions `u1`, `u2`
//! of `h0` at energies `alpha1 != alpha2`.
//!
//! With `W = u1 u2' - u1' u2` the new potential is
//! `V1 = V0 - 2 (log W)''`. Every second derivative is taken from the
//! equation, so `W' = (alpha1 - alpha2) u1 u2` and
//! `W'' = (alpha1 - alpha2)(u1' u2 + u1 u2')`.

use crate::error::{Error, Result};
use crate::numerics::{self, first_derivative, fd_residual, gauss6, integrate};
use crate::potential::{DerivedInfo, Endpoint, Potential, ScalarFn};
use crate::spectrum::{eigenfunction, node_count};
use crate::wave::{max_abs, PairFn, WaveSolution};
use num_complex::Complex64;
use std::sync::Arc;

type C64 = Complex64;

/// Relative residual allowed for mapped solutions, checked by finite differences.
pub const MAP_RESIDUAL_TOL: f64 = 1e-6;
/// Relative tolerance of the Wronskian-derivative gate.
pub const WRONSKIAN_GATE_TOL: f64 = 1e-6;

/// How a transformation function is obtained from the parent potential.
#[derive(Debug, Clone)]
pub enum Recipe {
    /// Dirichlet eigenfunction at `alpha`; `index` is the 1-based level number
    /// (checked through the node count for real potentials).
    Eigenfunction { index: Option<usize> },
    /// IVP solution with the given data at `a`.
    InitialData { y_a: C64, dy_a: C64 },
    /// `base + i c partner`, with `base(a) = 0, base'(a) = 1` and
    /// `partner(a) = 1, partner'(a) = 0`.
    Combination { c: C64 },
    /// A solution supplied by the caller; its energy must equal `alpha`.
    Given(WaveSolution),
}

#[derive(Debug, Clone)]
pub struct TransformationSpec {
    pub alpha1: C64,
    pub u1: Recipe,
    pub alpha2: C64,
    pub u2: Recipe,
}

/// Integrator tolerances for transformation functions. The quotients in
/// `V1` amplify relative errors near common zeros of `u1`, `u2`.
pub(crate) fn tightened(potential: &Potential) -> Potential {
    let mut o = *potential.options();
    o.rtol = o.rtol.min(1e-12);
    o.atol = o.atol.min(1e-15);
    potential.clone().with_options(o)
}

/// Solution of `h u = alpha u` on the parent potential following `recipe`.
pub fn build_transformation_function(
    potential: &Potential,
    alpha: C64,
    recipe: &Recipe,
) -> Result<WaveSolution> {
    let tight = tightened(potential);
    let potential = &tight;
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match recipe {
        Recipe::Eigenfunction { index } => {
            if *index == Some(0) {
                return Err(Error::IndexOutOfRange(0));
            }
            let phi = eigenfunction(potential, alpha).map_err(|e| match e {
                Error::NotAnEigenvalue { residual, .. } => Error::AlphaMismatch {
                    alpha,
                    index: index.unwrap_or(0),
                    detail: format!("|D(alpha)| = {residual:.3e}"),
                },
                other => other,
            })?;
            if let Some(n) = index {
                let real = potential.max_imag() < 1e-12 * potential.max_abs().max(1.0);
                if real && alpha.im == 0.0 {
                    let nodes = node_count(&phi.values);
                    if nodes + 1 != *n {
                        return Err(Error::AlphaMismatch {
                            alpha,
                            index: *n,
                            detail: format!("eigenfunction at alpha is level {}", nodes + 1),
                        });
                    }
                }
            }
            Ok(phi)
        }
        Recipe::InitialData { y_a, dy_a } => integrate(potential, alpha, *y_a, *dy_a),
        Recipe::Combination { c } => {
            let base = integrate(potential, alpha, zero, one)?;
            if c.norm() == 0.0 {
                return Ok(base);
            }
            let partner = integrate(potential, alpha, one, zero)?;
            Ok(base.combine(one, &partner, C64::new(0.0, 1.0) * c))
        }
        Recipe::Given(u) => {
            if (u.energy - alpha).norm() > 1e-12 * alpha.norm().max(1.0) {
                return Err(Error::AlphaMismatch {
                    alpha,
                    index: 0,
                    detail: format!("supplied solution has energy {}", u.energy),
                });
            }
            if !u.interval.same_grid(&potential.interval()) {
                return Err(Error::GridMismatch("supplied transformation function".into()));
            }
            Ok(u.clone())
        }
    }
}

/// Outcome of one transformation step.
#[derive(Clone)]
pub struct DarbouxResult {
    pub potential: Potential,
    pub parent: Arc<Potential>,
    pub wronskian: Vec<C64>,
    pub u1: WaveSolution,
    pub u2: WaveSolution,
    pub alpha1: C64,
    pub alpha2: C64,
    pub nodeless: bool,
    pub spec: Option<TransformationSpec>,
    w_eval: ScalarFn,
}

impl std::fmt::Debug for DarbouxResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DarbouxResult")
            .field("alpha1", &self.alpha1)
            .field("alpha2", &self.alpha2)
            .field("nodeless", &self.nodeless)
            .field("potential", &self.potential)
            .finish()
    }
}

/// Shared pieces for evaluating the intertwining operator at any `x`.
#[derive(Clone)]
struct Kernel {
    u1: PairFn,
    u2: PairFn,
    w: ScalarFn,
    a1: C64,
    a2: C64,
}

fn pair_of(u: &WaveSolution) -> PairFn {
    match u.continuous() {
        Some(f) => f.clone(),
        None => {
            let u = u.clone();
            Arc::new(move |x| u.eval(x))
        }
    }
}

impl Kernel {
    /// `(L f, (L f)')` for `f'' = (V0 - E) f - g`.
    fn apply(&self, x: f64, e: C64, f: C64, df: C64, g: C64, dg: C64) -> (C64, C64) {
        let (u1, du1) = (self.u1)(x);
        let (u2, du2) = (self.u2)(x);
        let w = (self.w)(x);
        let d = self.a1 - self.a2;
        let a = e * w + self.a2 * du1 * u2 - self.a1 * u1 * du2;
        let b = d * u1 * u2;
        let db = d * (du1 * u2 + u1 * du2);
        let phi = (a * f + b * df) / w;
        let dn = -d * du1 * du2 * f + (a + db) * df - b * g;
        let dphi = (dn - phi * b) / w;
        (phi + g, dphi + dg)
    }
}

/// `(f, f', g, g')` at `x`.
type SourceFn = Arc<dyn Fn(f64) -> (C64, C64, C64, C64) + Send + Sync>;

/// The map near a common zero of `u1`, `u2` at `a`. With
/// `W_i = W(u_i, f)` the numerator of `L f` is
/// `(E - alpha2) u2 W_1 - (E - alpha1) u1 W_2`, and
/// `W_i' = (alpha_i - E) u_i f - u_i g` is integrated from `a`, so the
/// `O(t^3)` Wronskians carry no cancellation.
struct NearLeft {
    x_end: f64,
    interval: crate::grid::Interval,
    source: SourceFn,
    w_a: [C64; 2],
    cum: [Vec<C64>; 2],
}

impl NearLeft {
    fn new(k: &Kernel, g: crate::grid::Interval, e: C64, source: SourceFn) -> Self {
        let cells = near_left_cells(&g);
        let mut cum = [vec![C64::default(); cells + 1], vec![C64::default(); cells + 1]];
        let mut w_a = [C64::default(); 2];
        let (y, dy, _, _) = source(g.a);
        for (i, u) in [&k.u1, &k.u2].into_iter().enumerate() {
            let (ua, dua) = u(g.a);
            w_a[i] = ua * dy - dua * y;
            let rate = Self::rate(k, i, e, &source);
            for c in 0..cells {
                cum[i][c + 1] = cum[i][c] + gauss6(&rate, g.node(c), g.node(c + 1));
            }
        }
        Self {
            x_end: g.node(cells),
            interval: g,
            source,
            w_a,
            cum,
        }
    }

    /// `W(u_i, f)'` as a function of `x`.
    fn rate<'a>(k: &'a Kernel, i: usize, e: C64, source: &'a SourceFn) -> impl Fn(f64) -> C64 + 'a {
        let (u, alpha) = if i == 0 { (&k.u1, k.a1) } else { (&k.u2, k.a2) };
        move |x| {
            let (y, _, s, _) = source(x);
            let ux = u(x).0;
            (alpha - e) * ux * y - ux * s
        }
    }

    fn apply(&self, k: &Kernel, x: f64, e: C64) -> (C64, C64) {
        let (_, _, g, dg) = (self.source)(x);
        let c = self.interval.cell_of(x).min(self.cum[0].len() - 2);
        let mut wi = [C64::default(); 2];
        let mut dwi = [C64::default(); 2];
        for i in 0..2 {
            let rate = Self::rate(k, i, e, &self.source);
            wi[i] = self.w_a[i] + self.cum[i][c] + gauss6(&rate, self.interval.node(c), x);
            dwi[i] = rate(x);
        }
        let (u1, du1) = (k.u1)(x);
        let (u2, du2) = (k.u2)(x);
        let (c1, c2) = (e - k.a2, e - k.a1);
        let n = c1 * u2 * wi[0] - c2 * u1 * wi[1];
        let dn = c1 * (du2 * wi[0] + u2 * dwi[0]) - c2 * (du1 * wi[1] + u1 * dwi[1]);
        let w = (k.w)(x);
        let dw = (k.a1 - k.a2) * u1 * u2;
        let phi = n / w;
        ((phi + g), (dn - phi * dw) / w + dg)
    }
}

fn sample_pair(interval: crate::grid::Interval, energy: C64, f: PairFn) -> WaveSolution {
    WaveSolution::from_fn(energy, interval, f)
}

impl DarbouxResult {
    /// Recover the step that produced a Darboux-derived potential.
    pub fn from_potential(potential: &Potential) -> Option<DarbouxResult> {
        let info = potential.derived_info()?;
        let g = potential.interval();
        let w_eval = info.wronskian.clone();
        Some(DarbouxResult {
            potential: potential.clone(),
            parent: info.parent.clone(),
            wronskian: g.nodes().iter().map(|&x| w_eval(x)).collect(),
            u1: info.u1.clone(),
            u2: info.u2.clone(),
            alpha1: info.u1.energy,
            alpha2: info.u2.energy,
            nodeless: true,
            spec: None,
            w_eval,
        })
    }

    /// `W(u1, u2)` at any `x`.
    pub fn w(&self, x: f64) -> C64 {
        (self.w_eval)(x)
    }

    pub fn w_fn(&self) -> ScalarFn {
        self.w_eval.clone()
    }

    fn kernel(&self) -> Kernel {
        Kernel {
            u1: pair_of(&self.u1),
            u2: pair_of(&self.u2),
            w: self.w_eval.clone(),
            a1: self.alpha1,
            a2: self.alpha2,
        }
    }

    /// Image of a solution of `h0` at `psi.energy`, residual-checked against `h1`.
    pub fn map(&self, psi: &WaveSolution) -> Result<WaveSolution> {
        let phi = self.map_unchecked(psi)?;
        let scale = phi.max_norm();
        if scale > 0.0 {
            let r = fd_residual(&self.potential, phi.energy, &phi.values, None, scale);
            if r > MAP_RESIDUAL_TOL {
                return Err(Error::Residual {
                    what: format!("mapped solution at E = {}", phi.energy),
                    value: r,
                    tolerance: MAP_RESIDUAL_TOL,
                });
            }
        }
        Ok(phi)
    }

    pub fn map_unchecked(&self, psi: &WaveSolution) -> Result<WaveSolution> {
        let e = psi.energy;
        let tol = 1e-14 * e.norm().max(1.0);
        if (e - self.alpha1).norm() < tol || (e - self.alpha2).norm() < tol {
            return Err(Error::ExceptionalEnergy(e));
        }
        self.apply_operator(psi, None)
    }

    /// `L f` for `f'' = (V0 - E) f - g`, where `E = f.energy` and `g` is the
    /// optional forcing (zero when `f` solves `h0`).
    pub fn apply_operator(&self, f: &WaveSolution, forcing: Option<&WaveSolution>) -> Result<WaveSolution> {
        let g = self.potential.interval();
        if !f.interval.same_grid(&g) {
            return Err(Error::GridMismatch("mapped function".into()));
        }
        let k = self.kernel();
        let e = f.energy;
        let fp = pair_of(f);
        let gp = forcing.map(pair_of);
        let source: SourceFn = Arc::new(move |x: f64| {
            let (y, dy) = fp(x);
            let (s, ds) = match &gp {
                Some(p) => p(x),
                None => (C64::default(), C64::default()),
            };
            (y, dy, s, ds)
        });
        let near = if self.potential.left().is_regular() {
            None
        } else {
            Some(NearLeft::new(&k, g, e, source.clone()))
        };
        let out: PairFn = Arc::new(move |x| match &near {
            Some(nl) if x < nl.x_end => nl.apply(&k, x, e),
            _ => {
                let (y, dy, s, ds) = source(x);
                k.apply(x, e, y, dy, s, ds)
            }
        });
        let mut sol = sample_pair(g, e, out);
        // The map is continuous up to a zero endpoint of W; take the limit there.
        self.fix_singular_nodes(&mut sol);
        Ok(sol)
    }

    fn fix_singular_nodes(&self, sol: &mut WaveSolution) {
        let n = sol.values.len();
        for i in [0, n - 1] {
            let bad = |z: C64| !(z.re.is_finite() && z.im.is_finite());
            if bad(sol.values[i]) || bad(sol.derivs[i]) {
                sol.values[i] = C64::default();
                sol.derivs[i] = C64::default();
            }
        }
    }

    /// `(u2 / W, u1 / W)`: solutions of `h1` at `alpha1` and `alpha2`.
    pub fn exceptional(&self) -> (WaveSolution, WaveSolution) {
        let g = self.potential.interval();
        let k = self.kernel();
        let quotient = |num: PairFn| -> PairFn {
            let k = k.clone();
            Arc::new(move |x| {
                let (u, du) = num(x);
                let (u1, _) = (k.u1)(x);
                let (u2, _) = (k.u2)(x);
                let w = (k.w)(x);
                let dw = (k.a1 - k.a2) * u1 * u2;
                (u / w, du / w - u * dw / (w * w))
            })
        };
        let f1 = quotient(k.u2.clone());
        let f2 = quotient(k.u1.clone());
        (
            sample_pair(g, self.alpha1, f1),
            sample_pair(g, self.alpha2, f2),
        )
    }

    /// Largest relative residual `||(h1 - E) phi|| / ||phi||` over two
    /// independent solutions of `h0` at each energy.
    pub fn verify_intertwining(&self, energies: &[C64]) -> Result<IntertwiningReport> {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let mut residuals = Vec::new();
        for &e in energies {
            let mut worst: f64 = 0.0;
            let mut data = vec![(zero, one)];
            // Only the solution vanishing at a maps into the regular branch of a singular end.
            if self.parent.left().is_regular() && self.potential.left().is_regular() {
                data.push((one, zero));
            }
            for (ya, dya) in data {
                let psi = integrate(&self.parent, e, ya, dya)?;
                let phi = self.map_unchecked(&psi)?;
                let r = fd_residual(&self.potential, e, &phi.values, None, phi.max_norm());
                worst = worst.max(r);
            }
            residuals.push((e, worst));
        }
        Ok(IntertwiningReport { residuals })
    }
}

#[derive(Debug, Clone)]
pub struct IntertwiningReport {
    pub residuals: Vec<(C64, f64)>,
}

impl IntertwiningReport {
    pub fn max(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, (_, r)| m.max(*r))
    }
}

/// Cells next to a common zero at `a` where integral forms replace products.
fn near_left_cells(g: &crate::grid::Interval) -> usize {
    ((g.n_nodes - 1) / 20).max(1)
}

fn both_vanish(u1: &WaveSolution, u2: &WaveSolution, i: usize) -> bool {
    let z1 = u1.values[i].norm() <= 1e-12 * u1.max_norm();
    let z2 = u2.values[i].norm() <= 1e-12 * u2.max_norm();
    z1 && z2
}

/// Build `V1` from `(u1, u2)` on `v0`.
pub fn darboux_potential(
    u1: &WaveSolution,
    u2: &WaveSolution,
    v0: &Potential,
) -> Result<DarbouxResult> {
    let g = v0.interval();
    let (a1, a2) = (u1.energy, u2.energy);
    if (a1 - a2).norm() <= 1e-14 * a1.norm().max(1.0) {
        return Err(Error::EqualFactorizationEnergies(a1));
    }
    if !u1.interval.same_grid(&g) || !u2.interval.same_grid(&g) {
        return Err(Error::GridMismatch("transformation functions vs potential".into()));
    }
    let d = a1 - a2;
    let n = g.n_nodes;

    if both_vanish(u1, u2, n - 1) && v0.right().is_regular() {
        return Err(Error::Unsupported(
            "both transformation functions vanish at the right endpoint".into(),
        ));
    }
    if !v0.right().is_regular() {
        return Err(Error::Unsupported("singular right endpoint".into()));
    }
    let nu0 = match v0.left() {
        Endpoint::Regular => 0.0,
        Endpoint::InverseSquare { nu } => nu,
    };
    let zero_left = both_vanish(u1, u2, 0) || !v0.left().is_regular();

    // Wronskian-derivative identity, with W' by finite differences.
    let w_nodes = numerics::wronskian2(u1, u2)?;
    let dw_fd = first_derivative(&w_nodes, g.spacing());
    let dw: Vec<C64> = (0..n).map(|i| d * u1.values[i] * u2.values[i]).collect();
    let gate_scale = max_abs(&dw).max(1e-300);
    let gate = (0..n)
        .map(|i| (dw_fd[i] - dw[i]).norm())
        .filter(|r| r.is_finite())
        .fold(0.0f64, f64::max)
        / gate_scale;
    if gate > WRONSKIAN_GATE_TOL {
        return Err(Error::Residual {
            what: "Wronskian-derivative identity".into(),
            value: gate,
            tolerance: WRONSKIAN_GATE_TOL,
        });
    }

    let p1 = pair_of(u1);
    let p2 = pair_of(u2);
    let direct: ScalarFn = {
        let (p1, p2) = (p1.clone(), p2.clone());
        Arc::new(move |x| {
            let (y1, d1) = p1(x);
            let (y2, d2) = p2(x);
            y1 * d2 - d1 * y2
        })
    };
    let w_eval: ScalarFn = if zero_left {
        // Near a common zero, W = (alpha1 - alpha2) int_a^x u1 u2 avoids cancellation.
        let half = near_left_cells(&g);
        let prod = {
            let (p1, p2) = (p1.clone(), p2.clone());
            move |x: f64| p1(x).0 * p2(x).0
        };
        let mut cum = vec![C64::default(); half + 1];
        for i in 0..half {
            cum[i + 1] = cum[i] + gauss6(&prod, g.node(i), g.node(i + 1));
        }
        let x_half = g.node(half);
        let direct = direct.clone();
        Arc::new(move |x: f64| {
            if x >= x_half {
                return direct(x);
            }
            let i = g.cell_of(x).min(half - 1);
            d * (cum[i] + gauss6(&prod, g.node(i), x))
        })
    } else {
        direct
    };

    let w_grid: Vec<C64> = g.nodes().iter().map(|&x| w_eval(x)).collect();
    let power = if zero_left { 2.0 * nu0 + 3.0 } else { 0.0 };
    check_nodeless(&w_eval, &g, power)?;

    let parent = Arc::new(v0.clone());
    let func: ScalarFn = {
        let (p1, p2, w, v0) = (p1.clone(), p2.clone(), w_eval.clone(), parent.clone());
        Arc::new(move |x| {
            let (y1, d1) = p1(x);
            let (y2, d2) = p2(x);
            let w = w(x);
            let q1 = d * (d1 * y2 + y1 * d2) / w;
            let q0 = d * y1 * y2 / w;
            v0.eval(x) - 2.0 * (q1 - q0 * q0)
        })
    };
    let left = if zero_left {
        Endpoint::InverseSquare { nu: nu0 + 2.0 }
    } else {
        Endpoint::Regular
    };
    let info = DerivedInfo {
        parent: parent.clone(),
        u1: u1.clone(),
        u2: u2.clone(),
        wronskian: w_eval.clone(),
    };
    let potential = Potential::derived(info, func, left, Endpoint::Regular)?;
    Ok(DarbouxResult {
        potential,
        parent,
        wronskian: w_grid,
        u1: u1.clone(),
        u2: u2.clone(),
        alpha1: a1,
        alpha2: a2,
        nodeless: true,
        spec: None,
        w_eval,
    })
}

/// Scan `|W| / t^power` on the grid and refine suspicious cells by 64-point
/// resampling; `t` is the distance to `a` (only used when `power > 0`).
fn check_nodeless(w: &ScalarFn, g: &crate::grid::Interval, power: f64) -> Result<()> {
    let scaled = |x: f64| -> C64 {
        if power > 0.0 {
            w(x) / (x - g.a).powf(power)
        } else {
            w(x)
        }
    };
    let n = g.n_nodes;
    let first = if power > 0.0 { 1 } else { 0 };
    let vals: Vec<C64> = (0..n).map(|i| if i < first { C64::default() } else { scaled(g.node(i)) }).collect();
    let mut mags: Vec<f64> = vals[first..].iter().map(|z| z.norm()).collect();
    mags.sort_by(f64::total_cmp);
    let median = mags[mags.len() / 2];
    if !(median > 0.0) {
        return Err(Error::WronskianVanishes { x: g.a });
    }
    let real = vals[first..].iter().all(|z| z.im.abs() <= 1e-12 * median);
    let mut suspicious = Vec::new();
    for i in first..n {
        let z = vals[i];
        if !(z.norm() >= 1e-3 * median) {
            suspicious.push(i);
        }
        if i + 1 < n {
            let z1 = vals[i + 1];
            if real && z.re.signum() != z1.re.signum() {
                return Err(Error::WronskianVanishes {
                    x: 0.5 * (g.node(i) + g.node(i + 1)),
                });
            }
            if (z1 / z).arg().abs() > 0.5 {
                suspicious.push(i);
            }
        }
    }
    for i in suspicious {
        let lo = g.node(i.saturating_sub(1).max(first));
        let hi = g.node((i + 1).min(n - 1));
        let mut best = (f64::INFINITY, lo);
        for k in 0..=64 {
            let x = lo + (hi - lo) * k as f64 / 64.0;
            if power > 0.0 && x <= g.a {
                continue;
            }
            let m = scaled(x).norm();
            if !(m >= best.0) {
                best = (m, x);
            }
        }
        if !(best.0 >= 1e-8 * median) {
            return Err(Error::WronskianVanishes { x: best.1 });
        }
    }
    Ok(())
}

/// Build both transformation functions from `spec` and transform `parent`.
pub fn transform(parent: &Potential, spec: &TransformationSpec) -> Result<DarbouxResult> {
    if (spec.alpha1 - spec.alpha2).norm() <= 1e-14 * spec.alpha1.norm().max(1.0) {
        return Err(Error::EqualFactorizationEnergies(spec.alpha1));
    }
    let u1 = build_transformation_function(parent, spec.alpha1, &spec.u1)?;
    let u2 = build_transformation_function(parent, spec.alpha2, &spec.u2)?;
    let mut r = darboux_potential(&u1, &u2, parent)?;
    r.spec = Some(spec.clone());
    Ok(r)
}

/// `L psi` for a solution `psi` of `h0` (see [`DarbouxResult::map`]).
pub fn darboux_map(result: &DarbouxResult, psi: &WaveSolution) -> Result<WaveSolution> {
    result.map(psi)
}

/// `(u2 / W, u1 / W)`.
pub fn darboux_exceptional(result: &DarbouxResult) -> (WaveSolution, WaveSolution) {
    result.exceptional()
}

/// Reduction-of-order companion `phi2 = phi1 int_a^x phi1^-2`.
#[derive(Debug, Clone)]
pub struct SecondSolution {
    pub solution: WaveSolution,
    pub value_at_b: C64,
    /// True when `phi2(b)` vanishes, i.e. the energy is a Dirichlet eigenvalue.
    pub is_eigenvalue: bool,
}

pub fn second_solution_check(potential: &Potential, phi1: &WaveSolution) -> Result<SecondSolution> {
    let g = potential.interval();
    if !phi1.interval.same_grid(&g) {
        return Err(Error::GridMismatch("reference solution".into()));
    }
    let scale = phi1.max_norm();
    for (i, v) in phi1.values.iter().enumerate() {
        if !(v.norm() > 1e-8 * scale) {
            return Err(Error::NodeInSolution { x: g.node(i) });
        }
    }
    let p = pair_of(phi1);
    let inv2 = |x: f64| {
        let y = p(x).0;
        1.0 / (y * y)
    };
    let n = g.n_nodes;
    let mut cum = vec![C64::default(); n];
    for i in 0..n - 1 {
        cum[i + 1] = cum[i] + gauss6(inv2, g.node(i), g.node(i + 1));
    }
    let values: Vec<C64> = (0..n).map(|i| phi1.values[i] * cum[i]).collect();
    let derivs: Vec<C64> = (0..n)
        .map(|i| phi1.derivs[i] * cum[i] + 1.0 / phi1.values[i])
        .collect();
    let solution = WaveSolution::new(phi1.energy, g, values, derivs);
    let value_at_b = solution.at_b();
    let is_eigenvalue = value_at_b.norm() < 1e-8 * solution.max_norm();
    Ok(SecondSolution {
        solution,
        value_at_b,
        is_eigenvalue,
    })
}
