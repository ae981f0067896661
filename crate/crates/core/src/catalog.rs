//! Closed-form potentials of the worked examples on `[-pi, pi]`.

use crate::error::{Error, Result};
use crate::grid::Interval;
use crate::potential::Potential;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);

/// Parameters of the worked examples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExampleParams {
    /// Wavenumber of the first transformation function.
    pub a: f64,
    /// Wavenumber of the second transformation function.
    pub b: f64,
    /// Square root of the second factorization energy in the backward step.
    pub kappa: f64,
    /// Combination coefficient.
    pub c: f64,
}

impl Default for ExampleParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 2.0,
            kappa: 1.2,
            c: 0.5,
        }
    }
}

/// `2 A^2 (A^2 - B^2) / [cos(Ax) - i B sin(Ax)]^2`.
pub fn v1ex_value(a: f64, b: f64, x: f64) -> C64 {
    let den = C64::new((a * x).cos(), -b * (a * x).sin());
    C64::new(2.0 * a * a * (a * a - b * b), 0.0) / (den * den)
}

pub fn v1ex(a: f64, b: f64, interval: Interval) -> Result<Potential> {
    Potential::closed_form("v1ex", &[a, b], interval, move |x| v1ex_value(a, b, x))
}

/// `2 A^2 (A^2 - B^2) / [A cos(Ax) + i B sin(Ax)]^2`: the potential the
/// forward step actually produces from `sin(A(x + pi))` and `exp(-iBx)`.
/// For `A = 1` it is the complex conjugate of [`v1ex_value`].
pub fn v1_forward_value(a: f64, b: f64, x: f64) -> C64 {
    let den = C64::new(a * (a * x).cos(), b * (a * x).sin());
    C64::new(2.0 * a * a * (a * a - b * b), 0.0) / (den * den)
}

pub fn v1_forward(a: f64, b: f64, interval: Interval) -> Result<Potential> {
    Potential::closed_form("v1_forward", &[a, b], interval, move |x| v1_forward_value(a, b, x))
}

/// Regularity window for the backward-step potential.
pub fn kappa_in_window(kappa: f64) -> bool {
    (0.5..=1.5).contains(&kappa) && kappa != 1.0
}

/// `sum_{n>=1} (-1)^n c_n t^(2n+1) / (2n+1)!` for small `t`.
fn odd_series(t: f64, coef: impl Fn(i32) -> f64) -> f64 {
    let mut sum = 0.0;
    let mut term = t; // t^(2n+1) / (2n+1)!
    for n in 1..40 {
        let k = (2 * n) as f64;
        term *= -t * t / (k * (k + 1.0));
        let add = term * coef(n);
        sum += add;
        if add.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// The backward-step potential without any parameter check.
///
/// With `t = x + pi` the expanded form becomes
/// `2 (k^2 - 1) (k sin t - sin kt)(k sin t + sin kt) / (sin kt cos t - k cos kt sin t)^2`;
/// near `t = 0` both small factors are summed as series to avoid cancellation.
pub fn v2_value(kappa: f64, x: f64) -> f64 {
    let k = kappa;
    let t = x + std::f64::consts::PI;
    let (diff, den) = if t.abs() < 1.0 {
        let diff = odd_series(t, |n| k - k.powi(2 * n + 1));
        let den = odd_series(t, |n| {
            0.5 * ((1.0 - k) * (k + 1.0).powi(2 * n + 1) + (1.0 + k) * (k - 1.0).powi(2 * n + 1))
        });
        (diff, den)
    } else {
        (
            k * t.sin() - (k * t).sin(),
            (k * t).sin() * t.cos() - k * (k * t).cos() * t.sin(),
        )
    };
    2.0 * (k * k - 1.0) * diff * (k * t.sin() + (k * t).sin()) / (den * den)
}

/// The expanded form, evaluated literally.
pub fn v2_value_expanded(kappa: f64, x: f64) -> f64 {
    let k2 = kappa * kappa;
    let s = kappa * (x + std::f64::consts::PI);
    let num = (k2 - 1.0) * (k2 - 1.0 - k2 * (2.0 * x).cos() + (2.0 * s).cos());
    let den = kappa * s.cos() * x.sin() - s.sin() * x.cos();
    num / (den * den)
}

pub fn v2(kappa: f64, interval: Interval) -> Result<Potential> {
    if kappa == 1.0 {
        return Err(Error::Regularity(
            "kappa = 1 is degenerate: build the second step from the exceptional solutions u2/W, u1/W instead"
                .into(),
        ));
    }
    if !kappa_in_window(kappa) {
        return Err(Error::Regularity(format!(
            "kappa = {kappa} outside the regularity window [0.5, 1.5]"
        )));
    }
    Potential::closed_form("v2", &[kappa], interval, move |x| {
        C64::new(v2_value(kappa, x), 0.0)
    })
}

/// The potential with a three-dimensional root subspace at `E = 4`.
pub fn example3_value(x: f64) -> C64 {
    let e = |k: f64| (I * (k * x)).exp();
    let num = e(1.0) * 25.0 + e(2.0) * 324.0 + e(3.0) * 1350.0 + e(4.0) * 2500.0 + e(5.0) * 2025.0;
    let den = e(1.0) * 25.0 + e(2.0) * 81.0 + e(3.0) * 75.0 + 3.0;
    num * 6.0 / (den * den)
}

pub fn example3(interval: Interval) -> Result<Potential> {
    Potential::closed_form("example3", &[], interval, example3_value)
}

/// `(9 - e^{-2ix}) / (1 - 3 e^{2ix})` and its derivative.
pub fn dim3_u2(x: f64) -> (C64, C64) {
    let em = (-I * (2.0 * x)).exp();
    let ep = (I * (2.0 * x)).exp();
    let num = 9.0 - em;
    let den = 1.0 - 3.0 * ep;
    let dnum = 2.0 * I * em;
    let dden = -6.0 * I * ep;
    (num / den, (dnum * den - num * dden) / (den * den))
}

/// `max |V(-x) - conj V(x)|` over the grid.
pub fn pt_defect(potential: &Potential) -> f64 {
    let g = potential.interval();
    g.nodes()
        .iter()
        .map(|&x| (potential.eval(-x) - potential.eval(x).conj()).norm())
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Endpoint;
    use std::f64::consts::PI;

    fn g() -> Interval {
        Interval::symmetric_pi()
    }

    #[test]
    fn v1ex_values() {
        let v = v1ex(1.0, 2.0, g()).unwrap();
        assert!((v.eval(0.0) - C64::new(-6.0, 0.0)).norm() < 1e-14);
        assert!((v.eval(PI / 2.0) - C64::new(1.5, 0.0)).norm() < 1e-14);
        let flat = v1ex(1.3, 1.3, g()).unwrap();
        assert!(flat.max_abs() == 0.0);
        assert!(pt_defect(&v) < 1e-10);
    }

    #[test]
    fn forward_form_is_the_conjugate_for_unit_a() {
        for x in [-3.0, -1.0, 0.2, 2.5] {
            assert!((v1_forward_value(1.0, 2.0, x) - v1ex_value(1.0, 2.0, x).conj()).norm() < 1e-13);
        }
    }

    #[test]
    fn v1ex_without_b_hits_a_pole() {
        assert!(v1ex(1.0, 0.0, g()).is_err());
    }

    #[test]
    fn v2_window() {
        assert!(v2(0.4, g()).is_err());
        assert!(v2(1.0, g()).is_err());
        let v = v2(1.2, g()).unwrap();
        assert_eq!(v.max_imag(), 0.0);
        assert_eq!(v.left(), Endpoint::InverseSquare { nu: 2.0 });
        assert!(v.right().is_regular());
    }

    #[test]
    fn stable_v2_agrees_with_expanded_form() {
        for k in [0.5, 0.8, 1.2, 1.5] {
            for x in [-2.5, -1.0, 0.0, 0.7, 2.0, 3.0] {
                let (a, b) = (v2_value(k, x), v2_value_expanded(k, x));
                assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "k={k} x={x}: {a} {b}");
            }
            // Inverse-square behaviour 6/t^2 at the left end.
            let t = 1e-4;
            assert!((v2_value(k, -PI + t) * t * t - 6.0).abs() < 1e-6);
        }
    }

    #[test]
    fn example3_is_pt_symmetric() {
        let v = example3(g()).unwrap();
        assert!(pt_defect(&v) < 1e-10);
    }

    #[test]
    fn dim3_derivative_matches_difference_quotient() {
        let x = 0.37;
        let h = 1e-6;
        let fd = (dim3_u2(x + h).0 - dim3_u2(x - h).0) / (2.0 * h);
        assert!((fd - dim3_u2(x).1).norm() < 1e-8);
    }
}
