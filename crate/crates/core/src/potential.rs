//! Complex potentials `V(x)` on a finite interval.

use crate::error::{Error, Result};
use crate::grid::Interval;
use crate::ode::OdeOptions;
use crate::wave::WaveSolution;
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

type C64 = Complex64;

/// Shared scalar callable `x -> V(x)`.
pub type ScalarFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

/// Magnitude above which a sampled value counts as a pole.
const POLE_BOUND: f64 = 1e12;

/// Behaviour of the potential at an endpoint.
///
/// `InverseSquare { nu }` means `V ~ nu (nu + 1) / t^2` with `t` the distance
/// to the endpoint; the Dirichlet condition then selects the `t^(nu+1)`
/// solution. This arises when both transformation functions of a Darboux
/// step vanish at the same endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Regular,
    InverseSquare { nu: f64 },
}

impl Endpoint {
    pub fn is_regular(&self) -> bool {
        matches!(self, Endpoint::Regular)
    }
}

/// Data kept by a Darboux-derived potential so that downstream code can
/// reapply the intertwining operator.
#[derive(Clone)]
pub struct DerivedInfo {
    pub parent: Arc<Potential>,
    pub u1: WaveSolution,
    pub u2: WaveSolution,
    pub wronskian: ScalarFn,
}

#[derive(Clone)]
pub enum PotentialKind {
    ClosedForm { id: String, params: Vec<f64> },
    Tabulated { samples: usize },
    Derived(Arc<DerivedInfo>),
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialKind::ClosedForm { id, params } => {
                write!(f, "ClosedForm({id}, {params:?})")
            }
            PotentialKind::Tabulated { samples } => write!(f, "Tabulated({samples} samples)"),
            PotentialKind::Derived(d) => write!(
                f,
                "Derived(alpha1={}, alpha2={}, parent={:?})",
                d.u1.energy, d.u2.energy, d.parent.kind
            ),
        }
    }
}

/// A potential evaluable at any `x` in its interval.
#[derive(Clone)]
pub struct Potential {
    interval: Interval,
    kind: PotentialKind,
    func: ScalarFn,
    left: Endpoint,
    right: Endpoint,
    options: OdeOptions,
}

impl fmt::Debug for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Potential")
            .field("interval", &self.interval)
            .field("kind", &self.kind)
            .field("left", &self.left)
            .field("right", &self.right)
            .finish()
    }
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Classify an endpoint of a closed-form potential by probing `t^2 V`.
fn classify_endpoint(f: &ScalarFn, x_end: f64, inward: f64) -> Result<Endpoint> {
    let v = f(x_end);
    if finite(v) && v.norm() < POLE_BOUND {
        return Ok(Endpoint::Regular);
    }
    let probe = |t: f64| f(x_end + inward * t) * (t * t);
    let (c1, c2) = (probe(1e-3), probe(2e-3));
    let consistent = finite(c1)
        && finite(c2)
        && (c1 - c2).norm() <= 1e-3 * c1.norm().max(1e-300)
        && c1.im.abs() <= 1e-6 * c1.norm()
        && c1.re > 0.0;
    if !consistent {
        return Err(Error::Regularity(format!("pole at endpoint x = {x_end}")));
    }
    Ok(Endpoint::InverseSquare {
        nu: nu_from_strength(c1.re),
    })
}

/// Solve `nu (nu + 1) = c`, snapping to an integer when within 1e-3.
pub(crate) fn nu_from_strength(c: f64) -> f64 {
    let nu = 0.5 * (-1.0 + (1.0 + 4.0 * c).sqrt());
    if (nu - nu.round()).abs() < 1e-3 {
        nu.round()
    } else {
        nu
    }
}

impl Potential {
    /// Closed-form potential. Every interior node must evaluate finite;
    /// endpoints may carry an inverse-square singularity.
    pub fn closed_form<F>(id: &str, params: &[f64], interval: Interval, f: F) -> Result<Self>
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        let func: ScalarFn = Arc::new(f);
        let left = classify_endpoint(&func, interval.a, 1.0)?;
        let right = classify_endpoint(&func, interval.b, -1.0)?;
        let p = Self {
            interval,
            kind: PotentialKind::ClosedForm {
                id: id.to_string(),
                params: params.to_vec(),
            },
            func,
            left,
            right,
            options: OdeOptions::default(),
        };
        p.check_interior()?;
        Ok(p)
    }

    /// `V = 0` on `interval`.
    pub fn zero(interval: Interval) -> Self {
        Self::constant(interval, C64::new(0.0, 0.0))
    }

    pub fn constant(interval: Interval, c: C64) -> Self {
        Self {
            interval,
            kind: PotentialKind::ClosedForm {
                id: "constant".into(),
                params: vec![c.re, c.im],
            },
            func: Arc::new(move |_| c),
            left: Endpoint::Regular,
            right: Endpoint::Regular,
            options: OdeOptions::default(),
        }
    }

    /// Natural cubic spline through `(xs, values)`; `interval` must lie inside the table.
    pub fn tabulated(interval: Interval, xs: &[f64], values: &[C64]) -> Result<Self> {
        let spline = CubicSpline::new(xs, values)?;
        if interval.a < xs[0] - 1e-12 || interval.b > xs[xs.len() - 1] + 1e-12 {
            return Err(Error::Regularity(format!(
                "interval [{}, {}] exceeds table range [{}, {}]",
                interval.a,
                interval.b,
                xs[0],
                xs[xs.len() - 1]
            )));
        }
        let samples = xs.len();
        let p = Self {
            interval,
            kind: PotentialKind::Tabulated { samples },
            func: Arc::new(move |x| spline.eval(x)),
            left: Endpoint::Regular,
            right: Endpoint::Regular,
            options: OdeOptions::default(),
        };
        p.check_interior()?;
        Ok(p)
    }

    pub(crate) fn derived(
        info: DerivedInfo,
        func: ScalarFn,
        left: Endpoint,
        right: Endpoint,
    ) -> Result<Self> {
        let p = Self {
            interval: info.parent.interval,
            options: info.parent.options,
            kind: PotentialKind::Derived(Arc::new(info)),
            func,
            left,
            right,
        };
        p.check_interior()?;
        Ok(p)
    }

    fn check_interior(&self) -> Result<()> {
        let g = self.interval;
        for i in 0..g.n_nodes {
            let at_left = i == 0;
            let at_right = i + 1 == g.n_nodes;
            if (at_left && !self.left.is_regular()) || (at_right && !self.right.is_regular()) {
                continue;
            }
            let x = g.node(i);
            let v = (self.func)(x);
            if !finite(v) || v.norm() > POLE_BOUND {
                return Err(Error::Regularity(format!(
                    "potential singular at x = {x:.6} (|V| = {:.3e})",
                    v.norm()
                )));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> C64 {
        (self.func)(x)
    }

    pub fn func(&self) -> &ScalarFn {
        &self.func
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    pub fn left(&self) -> Endpoint {
        self.left
    }

    pub fn right(&self) -> Endpoint {
        self.right
    }

    pub fn options(&self) -> &OdeOptions {
        &self.options
    }

    pub fn with_options(mut self, options: OdeOptions) -> Self {
        self.options = options;
        self
    }

    /// Same potential sampled on a different node count.
    pub fn with_nodes(mut self, n_nodes: usize) -> Result<Self> {
        self.interval = self.interval.with_nodes(n_nodes)?;
        Ok(self)
    }

    /// `V + c`.
    pub fn shifted(&self, c: C64) -> Self {
        let f = self.func.clone();
        Self {
            func: Arc::new(move |x| f(x) + c),
            ..self.clone()
        }
    }

    pub fn derived_info(&self) -> Option<&DerivedInfo> {
        match &self.kind {
            PotentialKind::Derived(d) => Some(d),
            _ => None,
        }
    }

    /// Values at the grid nodes; singular endpoints are reported as NaN.
    pub fn sample(&self) -> Vec<C64> {
        let g = self.interval;
        (0..g.n_nodes)
            .map(|i| {
                if (i == 0 && !self.left.is_regular())
                    || (i + 1 == g.n_nodes && !self.right.is_regular())
                {
                    C64::new(f64::NAN, f64::NAN)
                } else {
                    self.eval(g.node(i))
                }
            })
            .collect()
    }

    /// Largest `|Im V|` over the finite grid samples.
    pub fn max_imag(&self) -> f64 {
        self.sample()
            .iter()
            .filter(|v| finite(**v))
            .fold(0.0, |m, v| m.max(v.im.abs()))
    }

    /// Largest `|V|` over the finite grid samples.
    pub fn max_abs(&self) -> f64 {
        self.sample()
            .iter()
            .filter(|v| finite(**v))
            .fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match &self.kind {
            PotentialKind::ClosedForm { id, params } => format!("{id}{params:?}"),
            PotentialKind::Tabulated { samples } => format!("table[{samples}]"),
            PotentialKind::Derived(d) => format!(
                "darboux({}; alpha1={}, alpha2={})",
                d.parent.label(),
                d.u1.energy,
                d.u2.energy
            ),
        }
    }
}

/// Natural cubic spline with complex ordinates.
#[derive(Debug, Clone)]
struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<C64>,
    m: Vec<C64>,
}

impl CubicSpline {
    fn new(xs: &[f64], ys: &[C64]) -> Result<Self> {
        let n = xs.len();
        if n < 3 || ys.len() != n {
            return Err(Error::Regularity("table needs >= 3 matching samples".into()));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Regularity("table abscissae must increase strictly".into()));
        }
        if ys.iter().any(|y| !finite(*y)) {
            return Err(Error::Regularity("table contains non-finite values".into()));
        }
        // Tridiagonal system for second derivatives, natural ends.
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![C64::default(); n];
        diag[0] = 1.0;
        diag[n - 1] = 1.0;
        let mut lower = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = xs[i] - xs[i - 1];
            let h1 = xs[i + 1] - xs[i];
            lower[i] = h0 / 6.0;
            diag[i] = (h0 + h1) / 3.0;
            upper[i] = h1 / 6.0;
            rhs[i] = (ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0;
        }
        // Thomas algorithm.
        for i in 1..n {
            let w = lower[i] / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            let prev = rhs[i - 1];
            rhs[i] -= prev * w;
        }
        let mut m = vec![C64::default(); n];
        m[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (rhs[i] - m[i + 1] * upper[i]) / diag[i];
        }
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            m,
        })
    }

    fn eval(&self, x: f64) -> C64 {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&v| v <= x).clamp(1, n - 1) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let a = (self.xs[i + 1] - x) / h;
        let b = (x - self.xs[i]) / h;
        self.ys[i] * a
            + self.ys[i + 1] * b
            + (self.m[i] * (a * a * a - a) + self.m[i + 1] * (b * b * b - b)) * (h * h / 6.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_pole_is_a_construction_error() {
        let g = Interval::new(-1.0, 1.0, 201).unwrap();
        let err = Potential::closed_form("pole", &[], g, |x| C64::new(1.0 / x, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Regularity(_)));
    }

    #[test]
    fn inverse_square_endpoint_is_classified() {
        let g = Interval::new(0.0, 1.0, 101).unwrap();
        let p = Potential::closed_form("isq", &[], g, |x| C64::new(6.0 / (x * x) + 1.0, 0.0))
            .unwrap();
        assert_eq!(p.left(), Endpoint::InverseSquare { nu: 2.0 });
        assert_eq!(p.right(), Endpoint::Regular);
        assert!(p.sample()[0].re.is_nan());
    }

    #[test]
    fn spline_reproduces_cubic_interior_and_nodes() {
        let xs: Vec<f64> = (0..41).map(|i| i as f64 * 0.05).collect();
        let ys: Vec<C64> = xs.iter().map(|x| C64::new(x.sin(), x.cos())).collect();
        let g = Interval::new(0.0, 2.0, 21).unwrap();
        let p = Potential::tabulated(g, &xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((p.eval(*x) - y).norm() < 1e-14);
        }
        let x = 1.0123;
        assert!((p.eval(x) - C64::new(x.sin(), x.cos())).norm() < 1e-5);
    }

    #[test]
    fn shifted_adds_constant() {
        let g = Interval::symmetric_pi();
        let p = Potential::zero(g).shifted(C64::new(0.5, 0.0));
        assert_eq!(p.eval(0.3), C64::new(0.5, 0.0));
    }
}
