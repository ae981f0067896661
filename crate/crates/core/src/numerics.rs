//! Initial-value integration of `-y'' + V y = E y` and its energy-derivative
//! and inhomogeneous companions, Wronskians, quadrature and
//! finite-difference application of `h - E`.

use crate::error::{Error, Result};
use crate::grid::Interval;
use crate::ode::{self, DenseTrack, OdeSystem};
use crate::potential::{Endpoint, Potential};
use crate::wave::{PairFn, WaveSolution};
use num_complex::Complex64;
use std::sync::Arc;

type C64 = Complex64;

/// Distance (as a fraction of the interval length) from an inverse-square
/// endpoint at which integration starts from the regular power solution.
pub const SINGULAR_OFFSET_FRACTION: f64 = 1.6e-4;

/// `psi_j'' = (V - E) psi_j - psi_{j-1} - [j == 0] f`, for `j = 0..=order`.
///
/// `psi_j` is the `j`-th energy derivative of `psi_0` divided by `j!`, so the
/// chain satisfies `(h - E) psi_j = psi_{j-1}`.
struct Schrodinger<'a> {
    potential: &'a Potential,
    energy: C64,
    order: usize,
    forcing: Option<&'a (dyn Fn(f64) -> C64 + Sync)>,
}

impl OdeSystem for Schrodinger<'_> {
    fn dim(&self) -> usize {
        2 * (self.order + 1)
    }

    fn rhs(&self, x: f64, y: &[C64], dy: &mut [C64]) {
        let w = self.potential.eval(x) - self.energy;
        dy[0] = y[1];
        dy[1] = w * y[0];
        if let Some(f) = self.forcing {
            dy[1] -= f(x);
        }
        for j in 1..=self.order {
            dy[2 * j] = y[2 * j + 1];
            dy[2 * j + 1] = w * y[2 * j] - y[2 * j - 2];
        }
    }
}

/// Starting abscissa and data for an IVP posed at `a`.
///
/// For an inverse-square left endpoint only the regular branch is
/// admissible: `y_a` must vanish and `dy_a` scales `t^(nu+1)`.
fn start_data(potential: &Potential, y_a: C64, dy_a: C64) -> Result<(f64, C64, C64, f64)> {
    let g = potential.interval();
    match potential.left() {
        Endpoint::Regular => Ok((g.a, y_a, dy_a, 0.0)),
        Endpoint::InverseSquare { nu } => {
            if y_a.norm() != 0.0 {
                return Err(Error::Unsupported(
                    "singular left endpoint admits only the regular solution (y_a = 0)".into(),
                ));
            }
            let t0 = SINGULAR_OFFSET_FRACTION * g.length();
            Ok((
                g.a + t0,
                dy_a * t0.powf(nu + 1.0),
                dy_a * ((nu + 1.0) * t0.powf(nu)),
                nu,
            ))
        }
    }
}

fn require_regular_right(potential: &Potential) -> Result<()> {
    if potential.right().is_regular() {
        Ok(())
    } else {
        Err(Error::Unsupported("singular right endpoint".into()))
    }
}

/// Integrate the energy-Taylor chain `psi_0..=psi_order` on the grid.
pub fn integrate_taylor(
    potential: &Potential,
    energy: C64,
    y_a: C64,
    dy_a: C64,
    order: usize,
) -> Result<Vec<WaveSolution>> {
    integrate_on_grid(potential, energy, y_a, dy_a, order, None)
}

fn integrate_on_grid(
    potential: &Potential,
    energy: C64,
    y_a: C64,
    dy_a: C64,
    order: usize,
    forcing: Option<&(dyn Fn(f64) -> C64 + Sync)>,
) -> Result<Vec<WaveSolution>> {
    require_regular_right(potential)?;
    let g = potential.interval();
    let (x0, y0, dy0, nu) = start_data(potential, y_a, dy_a)?;
    let sys = Schrodinger {
        potential,
        energy,
        order,
        forcing,
    };
    let dim = sys.dim();
    let mut init = vec![C64::default(); dim];
    init[0] = y0;
    init[1] = dy0;

    let nodes = g.nodes();
    let first = nodes.partition_point(|&x| x <= x0);
    let stops = &nodes[first..];
    let traj = ode::integrate(&sys, x0, &init, g.b, stops, true, potential.options())?;
    let dense = Arc::new(traj.dense.expect("dense output requested"));

    let singular = x0 > g.a;
    let power = move |x: f64| -> (C64, C64) {
        let t = (x - g.a).max(0.0);
        (dy_a * t.powf(nu + 1.0), dy_a * ((nu + 1.0) * t.powf(nu)))
    };

    let mut out = Vec::with_capacity(order + 1);
    for j in 0..=order {
        let mut values = Vec::with_capacity(g.n_nodes);
        let mut derivs = Vec::with_capacity(g.n_nodes);
        for x in &nodes[..first] {
            let (v, d) = if singular && j == 0 {
                power(*x)
            } else if singular {
                (C64::default(), C64::default())
            } else {
                (init[2 * j], init[2 * j + 1])
            };
            values.push(v);
            derivs.push(d);
        }
        for state in &traj.at_stops {
            values.push(state[2 * j]);
            derivs.push(state[2 * j + 1]);
        }
        let track: Arc<DenseTrack> = dense.clone();
        let cont: PairFn = Arc::new(move |x: f64| {
            if x < x0 {
                if j == 0 {
                    power(x)
                } else {
                    (C64::default(), C64::default())
                }
            } else {
                (track.eval(x, 2 * j), track.eval(x, 2 * j + 1))
            }
        });
        out.push(WaveSolution::new(energy, g, values, derivs).with_continuous(cont));
    }
    Ok(out)
}

/// IVP solution with `psi(a) = y_a`, `psi'(a) = dy_a`, sampled on the grid.
pub fn integrate(potential: &Potential, energy: C64, y_a: C64, dy_a: C64) -> Result<WaveSolution> {
    Ok(integrate_taylor(potential, energy, y_a, dy_a, 0)?.remove(0))
}

/// `(psi, d psi / dE)` from the augmented system; the derivative has zero initial data.
pub fn integrate_with_energy_derivative(
    potential: &Potential,
    energy: C64,
    y_a: C64,
    dy_a: C64,
) -> Result<(WaveSolution, WaveSolution)> {
    let mut v = integrate_taylor(potential, energy, y_a, dy_a, 1)?;
    let d = v.pop().expect("order 1");
    let p = v.pop().expect("order 0");
    Ok((p, d))
}

/// Solve `-y'' + V y - E y = f` with `y(a) = y_a`, `y'(a) = dy_a`.
pub fn solve_inhomogeneous(
    potential: &Potential,
    energy: C64,
    forcing: &WaveSolution,
    y_a: C64,
    dy_a: C64,
) -> Result<WaveSolution> {
    if !forcing.interval.same_grid(&potential.interval()) {
        return Err(Error::GridMismatch("forcing sampled on a different grid".into()));
    }
    let f = |x: f64| forcing.eval(x).0;
    Ok(integrate_on_grid(potential, energy, y_a, dy_a, 0, Some(&f))?.remove(0))
}

/// Endpoint values `psi_j(b)` of the Taylor chain started from `psi(a)=0, psi'(a)=1`.
///
/// Entry 0 is the characteristic function `D(E)`, entry `j` is `D^(j)(E) / j!`.
pub fn endpoint_taylor(potential: &Potential, energy: C64, order: usize) -> Result<Vec<C64>> {
    require_regular_right(potential)?;
    let g = potential.interval();
    let (x0, y0, dy0, _) = start_data(potential, C64::new(0.0, 0.0), C64::new(1.0, 0.0))?;
    let sys = Schrodinger {
        potential,
        energy,
        order,
        forcing: None,
    };
    let mut init = vec![C64::default(); sys.dim()];
    init[0] = y0;
    init[1] = dy0;
    let traj = ode::integrate(&sys, x0, &init, g.b, &[], false, potential.options())?;
    Ok((0..=order).map(|j| traj.y_end[2 * j]).collect())
}

/// `W(x) = u1 u2' - u1' u2` at every node, from the integrated derivatives.
pub fn wronskian2(u1: &WaveSolution, u2: &WaveSolution) -> Result<Vec<C64>> {
    if !u1.interval.same_grid(&u2.interval) {
        return Err(Error::GridMismatch("Wronskian of solutions on different grids".into()));
    }
    Ok((0..u1.values.len())
        .map(|i| u1.values[i] * u2.derivs[i] - u1.derivs[i] * u2.values[i])
        .collect())
}

const GL6_X: [f64; 3] = [0.238_619_186_083_196_9, 0.661_209_386_466_264_5, 0.932_469_514_203_152_1];
const GL6_W: [f64; 3] = [0.467_913_934_572_691, 0.360_761_573_048_138_6, 0.171_324_492_379_170_4];

/// Six-point Gauss-Legendre rule on `[lo, hi]`.
pub fn gauss6<F: Fn(f64) -> C64>(f: F, lo: f64, hi: f64) -> C64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = C64::default();
    for k in 0..3 {
        let dx = half * GL6_X[k];
        acc += (f(mid - dx) + f(mid + dx)) * GL6_W[k];
    }
    acc * half
}

/// Residual of the integral form of the ODE over each grid cell:
/// `psi'(x1) - psi'(x0) = int (V-E) psi` and `psi(x1) - psi(x0) = int psi'`,
/// relative to `max |psi|`. Second derivatives come from the equation itself.
pub fn ode_residual(potential: &Potential, sol: &WaveSolution) -> f64 {
    let g = sol.interval;
    let scale = sol.max_norm().max(1e-300);
    let skip_first = !potential.left().is_regular();
    let mut worst: f64 = 0.0;
    for i in 0..g.n_nodes - 1 {
        if skip_first && i == 0 {
            continue;
        }
        let (x0, x1) = (g.node(i), g.node(i + 1));
        let dd = gauss6(|x| (potential.eval(x) - sol.energy) * sol.eval(x).0, x0, x1);
        let dv = gauss6(|x| sol.eval(x).1, x0, x1);
        let r1 = (sol.derivs[i + 1] - sol.derivs[i] - dd).norm();
        let r2 = (sol.values[i + 1] - sol.values[i] - dv).norm();
        worst = worst.max(r1.max(r2));
    }
    worst / scale
}

const EDGE0: [f64; 8] = [938.0, -4014.0, 7911.0, -9490.0, 7380.0, -3618.0, 1019.0, -126.0];
const EDGE1: [f64; 8] = [126.0, -70.0, -486.0, 855.0, -670.0, 324.0, -90.0, 11.0];
const EDGE2: [f64; 8] = [-11.0, 214.0, -378.0, 130.0, 85.0, -54.0, 16.0, -2.0];
const CENTER: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];

/// Sixth-order centered `f''` at `f[i]` (needs three neighbours each side).
fn centered6(f: &[C64], i: usize) -> C64 {
    CENTER
        .iter()
        .enumerate()
        .map(|(k, c)| f[i + k - 3] * *c)
        .sum::<C64>()
}

/// Sixth-order second derivative on equispaced samples: centered 7-point
/// stencil inside, one-sided 8-point closures on the three nodes nearest
/// each end. Needs at least 8 samples.
pub fn second_derivative(f: &[C64], h: f64) -> Vec<C64> {
    let n = f.len();
    assert!(n >= 8, "need at least 8 samples");
    let e = 1.0 / (180.0 * h * h);
    let mut out = vec![C64::default(); n];
    for (i, o) in out.iter_mut().enumerate().take(n - 3).skip(3) {
        *o = centered6(f, i) * e;
    }
    let edge = |w: &[f64; 8], at: &dyn Fn(usize) -> C64| -> C64 {
        w.iter().enumerate().map(|(k, c)| at(k) * *c).sum::<C64>() * e
    };
    for (j, w) in [&EDGE0, &EDGE1, &EDGE2].into_iter().enumerate() {
        out[j] = edge(w, &|k| f[k]);
        out[n - 1 - j] = edge(w, &|k| f[n - 1 - k]);
    }
    out
}

/// Fourth-order first derivative; one-sided 5-point stencils at the ends.
pub fn first_derivative(f: &[C64], h: f64) -> Vec<C64> {
    let n = f.len();
    assert!(n >= 5, "need at least 5 samples");
    let s = 1.0 / (12.0 * h);
    let mut out = vec![C64::default(); n];
    out[0] = (-f[0] * 25.0 + f[1] * 48.0 - f[2] * 36.0 + f[3] * 16.0 - f[4] * 3.0) * s;
    out[1] = (-f[0] * 3.0 - f[1] * 10.0 + f[2] * 18.0 - f[3] * 6.0 + f[4]) * s;
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - f[i - 1] * 8.0 + f[i + 1] * 8.0 - f[i + 2]) * s;
    }
    let r = |k: usize| f[n - 1 - k];
    out[n - 1] = -(-r(0) * 25.0 + r(1) * 48.0 - r(2) * 36.0 + r(3) * 16.0 - r(4) * 3.0) * s;
    out[n - 2] = -(-r(0) * 3.0 - r(1) * 10.0 + r(2) * 18.0 - r(3) * 6.0 + r(4)) * s;
    out
}

/// `(h - E) f = -f'' + (V - E) f` on every `stride`-th node, with the
/// stencils of [`second_derivative`]. Nodes where `V` is not
/// finite (singular endpoints) come back as NaN.
pub fn apply_h_minus_e(potential: &Potential, energy: C64, f: &[C64], stride: usize) -> Vec<C64> {
    let g = potential.interval();
    assert_eq!(f.len(), g.n_nodes, "samples must live on the potential's grid");
    let idx: Vec<usize> = (0..g.n_nodes).step_by(stride.max(1)).collect();
    let sub: Vec<C64> = idx.iter().map(|&i| f[i]).collect();
    let h = g.spacing() * stride.max(1) as f64;
    let d2 = second_derivative(&sub, h);
    let v = potential.sample();
    idx.iter()
        .zip(d2)
        .zip(&sub)
        .map(|((&i, d2), fi)| -d2 + (v[i] - energy) * fi)
        .collect()
}

/// Weights of the centered second-derivative stencil of half-width `p`
/// (order `2p`), indexed `0..=2p`; divide by `h^2`.
pub fn centered_weights(p: usize) -> Vec<f64> {
    let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
    let mut w = vec![0.0; 2 * p + 1];
    for k in 1..=p {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let c = 2.0 * sign * fact(p) * fact(p) / ((k * k) as f64 * fact(p - k) * fact(p + k));
        w[p + k] = c;
        w[p - k] = c;
        w[p] -= 2.0 / (k * k) as f64;
    }
    w
}

/// Apply `(h - E)` `times` times with the centered stencil of half-width
/// `half_width` on every `stride`-th node. Each pass drops `half_width`
/// subgrid nodes at each end. Returns `(node indices, values)`.
pub fn apply_h_minus_e_power(
    potential: &Potential,
    energy: C64,
    f: &[C64],
    stride: usize,
    half_width: usize,
    times: usize,
) -> (Vec<usize>, Vec<C64>) {
    let g = potential.interval();
    let stride = stride.max(1);
    let p = half_width.max(1);
    let w = centered_weights(p);
    let mut idx: Vec<usize> = (0..g.n_nodes).step_by(stride).collect();
    let mut cur: Vec<C64> = idx.iter().map(|&i| f[i]).collect();
    let h2 = (g.spacing() * stride as f64).powi(2);
    for _ in 0..times {
        if cur.len() < 2 * p + 1 {
            return (Vec::new(), Vec::new());
        }
        let next: Vec<C64> = (p..cur.len() - p)
            .map(|i| {
                let d2 = w
                    .iter()
                    .enumerate()
                    .map(|(k, c)| cur[i + k - p] * *c)
                    .sum::<C64>()
                    / h2;
                -d2 + (potential.eval(g.node(idx[i])) - energy) * cur[i]
            })
            .collect();
        idx = idx[p..idx.len() - p].to_vec();
        cur = next;
    }
    (idx, cur)
}

/// Max-norm relative residual `||(h - E) f - rhs|| / scale` over finite nodes.
pub fn fd_residual(
    potential: &Potential,
    energy: C64,
    f: &[C64],
    rhs: Option<&[C64]>,
    scale: f64,
) -> f64 {
    let applied = apply_h_minus_e(potential, energy, f, 1);
    let mut worst: f64 = 0.0;
    for (i, v) in applied.iter().enumerate() {
        let r = match rhs {
            Some(r) => v - r[i],
            None => *v,
        };
        if r.re.is_finite() && r.im.is_finite() {
            worst = worst.max(r.norm());
        }
    }
    worst / scale.max(1e-300)
}

/// Node spacing helper for tests and callers that only hold an interval.
pub fn spacing(interval: &Interval) -> f64 {
    interval.spacing()
}
