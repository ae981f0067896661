//! Solutions sampled on a grid, optionally backed by a continuous evaluator.

use crate::grid::Interval;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

type C64 = Complex64;

/// Shared callable `x -> (y(x), y'(x))`.
pub type PairFn = Arc<dyn Fn(f64) -> (C64, C64) + Send + Sync>;

/// Complex `(psi, psi')` on the grid of `interval`, tagged with its energy.
#[derive(Clone)]
pub struct WaveSolution {
    pub energy: C64,
    pub interval: Interval,
    pub values: Vec<C64>,
    pub derivs: Vec<C64>,
    continuous: Option<PairFn>,
}

impl fmt::Debug for WaveSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveSolution")
            .field("energy", &self.energy)
            .field("interval", &self.interval)
            .field("continuous", &self.continuous.is_some())
            .finish()
    }
}

impl WaveSolution {
    pub fn new(energy: C64, interval: Interval, values: Vec<C64>, derivs: Vec<C64>) -> Self {
        assert_eq!(values.len(), interval.n_nodes);
        assert_eq!(derivs.len(), interval.n_nodes);
        Self {
            energy,
            interval,
            values,
            derivs,
            continuous: None,
        }
    }

    /// Build from an analytic `(y, y')` pair, sampled at the grid nodes.
    pub fn from_fn(energy: C64, interval: Interval, f: PairFn) -> Self {
        let (values, derivs) = interval.nodes().into_iter().map(|x| f(x)).unzip();
        Self {
            energy,
            interval,
            values,
            derivs,
            continuous: Some(f),
        }
    }

    pub fn with_continuous(mut self, f: PairFn) -> Self {
        self.continuous = Some(f);
        self
    }

    pub fn has_continuous(&self) -> bool {
        self.continuous.is_some()
    }

    pub fn continuous(&self) -> Option<&PairFn> {
        self.continuous.as_ref()
    }

    /// `(y, y')` at any `x`; cubic Hermite on the samples when no evaluator is attached.
    pub fn eval(&self, x: f64) -> (C64, C64) {
        if let Some(f) = &self.continuous {
            return f(x);
        }
        let g = self.interval;
        let i = g.cell_of(x);
        let h = g.spacing();
        let t = (x - g.node(i)) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivs[i] * h, self.derivs[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let y = y0 * (2.0 * t3 - 3.0 * t2 + 1.0)
            + d0 * (t3 - 2.0 * t2 + t)
            + y1 * (-2.0 * t3 + 3.0 * t2)
            + d1 * (t3 - t2);
        let dy = (y0 * (6.0 * t2 - 6.0 * t)
            + d0 * (3.0 * t2 - 4.0 * t + 1.0)
            + y1 * (-6.0 * t2 + 6.0 * t)
            + d1 * (3.0 * t2 - 2.0 * t))
            / h;
        (y, dy)
    }

    pub fn scaled(&self, c: C64) -> Self {
        let continuous = self.continuous.clone().map(|f| -> PairFn {
            Arc::new(move |x| {
                let (y, d) = f(x);
                (y * c, d * c)
            })
        });
        Self {
            energy: self.energy,
            interval: self.interval,
            values: self.values.iter().map(|v| v * c).collect(),
            derivs: self.derivs.iter().map(|v| v * c).collect(),
            continuous,
        }
    }

    /// `a * self + b * other`, keeping `self`'s energy.
    pub fn combine(&self, a: C64, other: &WaveSolution, b: C64) -> Self {
        assert!(self.interval.same_grid(&other.interval), "grid mismatch");
        let continuous = match (&self.continuous, &other.continuous) {
            (Some(f), Some(g)) => {
                let (f, g) = (f.clone(), g.clone());
                Some(Arc::new(move |x: f64| {
                    let (y1, d1) = f(x);
                    let (y2, d2) = g(x);
                    (y1 * a + y2 * b, d1 * a + d2 * b)
                }) as PairFn)
            }
            _ => None,
        };
        Self {
            energy: self.energy,
            interval: self.interval,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(u, v)| u * a + v * b)
                .collect(),
            derivs: self
                .derivs
                .iter()
                .zip(&other.derivs)
                .map(|(u, v)| u * a + v * b)
                .collect(),
            continuous,
        }
    }

    pub fn max_norm(&self) -> f64 {
        max_abs(&self.values)
    }

    pub fn l2_norm(&self) -> f64 {
        l2_norm(&self.values, &self.interval)
    }

    pub fn at_a(&self) -> C64 {
        self.values[0]
    }

    pub fn at_b(&self) -> C64 {
        self.values[self.values.len() - 1]
    }
}

/// Largest finite modulus.
pub fn max_abs(v: &[C64]) -> f64 {
    v.iter()
        .filter(|z| z.re.is_finite() && z.im.is_finite())
        .fold(0.0, |m, z| m.max(z.norm()))
}

/// Composite Simpson estimate of `(integral |f|^2)^(1/2)` on the grid.
pub fn l2_norm(values: &[C64], interval: &Interval) -> f64 {
    let w: Vec<f64> = values.iter().map(|z| z.norm_sqr()).collect();
    integrate_samples(&w, interval.spacing()).sqrt()
}

/// Composite Simpson on equispaced real samples (trapezoid on a trailing odd cell).
pub fn integrate_samples(w: &[f64], h: f64) -> f64 {
    let n = w.len();
    if n < 3 {
        return w.windows(2).map(|p| 0.5 * h * (p[0] + p[1])).sum();
    }
    let m = if (n - 1) % 2 == 0 { n } else { n - 1 };
    let mut s = w[0] + w[m - 1];
    for (i, v) in w.iter().enumerate().take(m - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = s * h / 3.0;
    if m < n {
        total += 0.5 * h * (w[n - 2] + w[n - 1]);
    }
    total
}

/// Hermitian inner product `integral conj(f) g` by composite Simpson.
pub fn inner(f: &[C64], g: &[C64], interval: &Interval) -> C64 {
    let re: Vec<f64> = f.iter().zip(g).map(|(a, b)| (a.conj() * b).re).collect();
    let im: Vec<f64> = f.iter().zip(g).map(|(a, b)| (a.conj() * b).im).collect();
    let h = interval.spacing();
    C64::new(integrate_samples(&re, h), integrate_samples(&im, h))
}
