//! Adaptive Dormand-Prince 5(4) integrator for complex first-order systems,
//! with the classic 5-coefficient continuous extension.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C64 = Complex64;

/// Integrator tolerances and guards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Abort once `|y0| + |y1|` exceeds this bound.
    pub blowup: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            blowup: 1e120,
            max_steps: 2_000_000,
        }
    }
}

/// A first-order system `y' = f(x, y)` over complex state.
pub trait OdeSystem: Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, x: f64, y: &[C64], dy: &mut [C64]);
}

const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step's interpolation data.
#[derive(Debug, Clone)]
struct Segment {
    x0: f64,
    h: f64,
    /// `5 * dim` coefficients, laid out coefficient-major.
    cont: Vec<C64>,
}

/// Piecewise continuous extension over all accepted steps.
#[derive(Debug, Clone)]
pub struct DenseTrack {
    dim: usize,
    segments: Vec<Segment>,
}

impl DenseTrack {
    pub fn start(&self) -> f64 {
        self.segments.first().map(|s| s.x0).unwrap_or(f64::NAN)
    }

    pub fn end(&self) -> f64 {
        self.segments.last().map(|s| s.x0 + s.h).unwrap_or(f64::NAN)
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    fn segment_for(&self, x: f64) -> &Segment {
        let idx = self.segments.partition_point(|s| s.x0 <= x);
        &self.segments[idx.saturating_sub(1)]
    }

    /// Interpolated component `comp` at `x` (clamped to the covered range).
    pub fn eval(&self, x: f64, comp: usize) -> C64 {
        let seg = self.segment_for(x);
        let s = ((x - seg.x0) / seg.h).clamp(0.0, 1.0);
        let s1 = 1.0 - s;
        let c = |k: usize| seg.cont[k * self.dim + comp];
        c(0) + (c(1) + (c(2) + (c(3) + c(4) * s1) * s) * s1) * s
    }
}

/// Output of one integration.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub y_end: Vec<C64>,
    /// State at each requested stop, in order.
    pub at_stops: Vec<Vec<C64>>,
    pub dense: Option<DenseTrack>,
    pub steps: usize,
}

fn axpy(out: &mut [C64], base: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..out.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (w, k) in terms {
            acc += k[i] * *w;
        }
        out[i] = base[i] + acc * h;
    }
}

fn check_finite(x: f64, dy: &[C64]) -> Result<()> {
    if dy.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Singular {
            x,
            detail: "non-finite right-hand side".into(),
        })
    }
}

/// Integrate `sys` from `x0` to `x_end > x0`, landing exactly on every
/// point of `stops` (ascending, inside `(x0, x_end]`).
pub fn integrate<S: OdeSystem>(
    sys: &S,
    x0: f64,
    y0: &[C64],
    x_end: f64,
    stops: &[f64],
    keep_dense: bool,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    let n = sys.dim();
    assert_eq!(y0.len(), n, "state dimension mismatch");
    assert!(x_end > x0, "integration runs left to right");

    let span = x_end - x0;
    let mut x = x0;
    let mut y = y0.to_vec();
    let mut k1 = vec![C64::default(); n];
    let mut k2 = vec![C64::default(); n];
    let mut k3 = vec![C64::default(); n];
    let mut k4 = vec![C64::default(); n];
    let mut k5 = vec![C64::default(); n];
    let mut k6 = vec![C64::default(); n];
    let mut k7 = vec![C64::default(); n];
    let mut tmp = vec![C64::default(); n];
    let mut y_new = vec![C64::default(); n];

    sys.rhs(x, &y, &mut k1);
    check_finite(x, &k1)?;

    let mut h = (span * 1e-3).min(1e-2);
    let mut at_stops = Vec::with_capacity(stops.len());
    let mut segments = Vec::new();
    let mut next_stop = 0usize;
    let mut steps = 0usize;
    let mut rejected_last = false;

    while x < x_end {
        if steps >= opts.max_steps {
            return Err(Error::StepSizeUnderflow { x });
        }
        // Land exactly on the next stop (or the end).
        let target = if next_stop < stops.len() {
            stops[next_stop]
        } else {
            x_end
        };
        let mut landing = false;
        let h_try = h;
        if x + h >= target - 1e-14 * span {
            h = target - x;
            landing = true;
        }
        if h <= 1e-14 * span.max(x.abs()) {
            return Err(Error::StepSizeUnderflow { x });
        }

        axpy(&mut tmp, &y, h, &[(A21, &k1)]);
        sys.rhs(x + C2 * h, &tmp, &mut k2);
        axpy(&mut tmp, &y, h, &[(A31, &k1), (A32, &k2)]);
        sys.rhs(x + C3 * h, &tmp, &mut k3);
        axpy(&mut tmp, &y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        sys.rhs(x + C4 * h, &tmp, &mut k4);
        axpy(&mut tmp, &y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        sys.rhs(x + C5 * h, &tmp, &mut k5);
        axpy(
            &mut tmp,
            &y,
            h,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        let x_new = if landing { target } else { x + h };
        sys.rhs(x_new, &tmp, &mut k6);
        axpy(
            &mut y_new,
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        sys.rhs(x_new, &y_new, &mut k7);
        let finite = [&k2, &k3, &k4, &k5, &k6, &k7]
            .iter()
            .all(|k| k.iter().all(|v| v.re.is_finite() && v.im.is_finite()));

        let err = if finite {
            let mut acc = 0.0;
            for i in 0..n {
                let e = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6
                    + k7[i] * E7)
                    * h;
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                acc += (e.norm() / sc).powi(2);
            }
            (acc / n as f64).sqrt()
        } else {
            f64::INFINITY
        };

        if err <= 1.0 {
            steps += 1;
            if keep_dense {
                let mut cont = vec![C64::default(); 5 * n];
                for i in 0..n {
                    let ydiff = y_new[i] - y[i];
                    let bspl = k1[i] * h - ydiff;
                    cont[i] = y[i];
                    cont[n + i] = ydiff;
                    cont[2 * n + i] = bspl;
                    cont[3 * n + i] = ydiff - k7[i] * h - bspl;
                    cont[4 * n + i] = (k1[i] * D1
                        + k3[i] * D3
                        + k4[i] * D4
                        + k5[i] * D5
                        + k6[i] * D6
                        + k7[i] * D7)
                        * h;
                }
                segments.push(Segment { x0: x, h, cont });
            }
            x = x_new;
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            if n >= 2 && y[0].norm() + y[1].norm() > opts.blowup {
                return Err(Error::Singular {
                    x,
                    detail: "solution blow-up".into(),
                });
            }
            if landing && next_stop < stops.len() {
                at_stops.push(y.clone());
                next_stop += 1;
            }
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            let fac = if rejected_last { fac.min(1.0) } else { fac };
            // A landing step is usually truncated; don't let it shrink the next one.
            h *= fac;
            if landing && !rejected_last {
                h = h.max(h_try.min(h_try * fac));
            }
            rejected_last = false;
        } else {
            if !finite && h < 1e-12 * span {
                return Err(Error::Singular {
                    x,
                    detail: "non-finite right-hand side".into(),
                });
            }
            rejected_last = true;
            let fac = if err.is_finite() {
                (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
            } else {
                0.25
            };
            h *= fac;
        }
    }

    Ok(Trajectory {
        y_end: y,
        at_stops,
        dense: keep_dense.then_some(DenseTrack { dim: n, segments }),
        steps,
    })
}
