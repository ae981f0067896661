use darboux_susy::catalog::{dim3_u2, v1_forward_value, v1ex, v1ex_value};
use darboux_susy::darboux::transform;
use darboux_susy::numerics::{integrate, integrate_with_energy_derivative};
use darboux_susy::scenario::{fit_energy, forward_spec, max_deviation};
use darboux_susy::spectrum::{characteristic, find_real_spectrum, root_multiplicity};
use darboux_susy::{Complex64 as C64, Interval, Potential, WaveSolution};
use std::f64::consts::PI;
use std::sync::Arc;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[test]
fn free_ivp_is_sine_over_k() {
    let g = Interval::symmetric_pi();
    let v0 = Potential::zero(g);
    for e in [c(0.25), c(3.1), C64::new(2.0, 0.7), C64::new(-1.5, 0.2)] {
        let k = e.sqrt();
        let s = integrate(&v0, e, c(0.0), c(1.0)).unwrap();
        let dev = (0..g.n_nodes)
            .map(|i| {
                let t = g.node(i) + PI;
                (s.values[i] - (k * t).sin() / k).norm()
            })
            .fold(0.0, f64::max);
        assert!(dev < 1e-9, "E = {e}: {dev:e}");
    }
}

#[test]
fn energy_derivative_of_the_free_solution() {
    // psi = sin(k t)/k; d psi/dE at b = t cos(k t)/(2k^2) - sin(k t)/(2k^3) = -4 pi at E = 1/4.
    let v0 = Potential::zero(Interval::symmetric_pi());
    let (psi, dpsi) = integrate_with_energy_derivative(&v0, c(0.25), c(0.0), c(1.0)).unwrap();
    assert!(psi.at_b().norm() < 1e-10);
    assert!((dpsi.at_b() - c(-4.0 * PI)).norm() < 1e-8, "{}", dpsi.at_b());
}

#[test]
fn characteristic_of_free_particle() {
    let v0 = Potential::zero(Interval::symmetric_pi());
    for e in [c(0.6), C64::new(1.3, -0.4)] {
        let k = e.sqrt();
        let exact = (k * 2.0 * PI).sin() / k;
        let d = characteristic(&v0, e).unwrap().d;
        assert!((d - exact).norm() < 1e-9);
    }
}

#[test]
fn free_levels_and_node_counts() {
    let v0 = Potential::zero(Interval::symmetric_pi());
    let s = find_real_spectrum(&v0, 0.0, 20.0).unwrap();
    assert_eq!(s.levels.len(), 8);
    for (k, l) in s.levels.iter().enumerate() {
        let n = (k + 1) as f64;
        assert!((l.energy - c(n * n / 4.0)).norm() < 1e-9);
        assert_eq!(l.node_count, Some(k));
        assert_eq!(l.algebraic_multiplicity, 1);
    }
}

#[test]
fn constant_potential_shifts_levels() {
    let v = Potential::constant(Interval::symmetric_pi(), c(1.5));
    let s = find_real_spectrum(&v, 0.0, 5.0).unwrap();
    let expected: Vec<f64> = (1..=3).map(|n| n as f64 * n as f64 / 4.0 + 1.5).collect();
    let got: Vec<f64> = s.levels.iter().map(|l| l.energy.re).collect();
    assert_eq!(got.len(), expected.len());
    for (a, b) in got.iter().zip(&expected) {
        assert!((a - b).abs() < 1e-9);
    }
}

#[test]
fn tabulated_zero_matches_closed_zero() {
    let g = Interval::symmetric_pi().with_nodes(401).unwrap();
    let xs: Vec<f64> = (0..801).map(|i| -PI + 2.0 * PI * i as f64 / 800.0).collect();
    let vals = vec![c(0.0); xs.len()];
    let v = Potential::tabulated(g, &xs, &vals).unwrap();
    let s = find_real_spectrum(&v, 0.0, 5.0).unwrap();
    assert_eq!(s.levels.len(), 4);
    assert!((s.levels[1].energy - c(1.0)).norm() < 1e-9);
}

#[test]
fn forward_step_gives_the_conjugate_closed_form() {
    let g = Interval::symmetric_pi();
    let v0 = Potential::zero(g);
    for b in [2.0, 1.3] {
        let step = transform(&v0, &forward_spec(b)).unwrap();
        assert!(step.nodeless);
        let dev = max_deviation(&step.potential, |x| v1_forward_value(1.0, b, x));
        assert!(dev < 1e-8, "B = {b}: {dev:e}");
        // v1ex is the complex conjugate.
        let conj = max_deviation(&step.potential, |x| v1ex_value(1.0, b, x).conj());
        assert!(conj < 1e-8, "B = {b}: {conj:e}");
    }
}

#[test]
fn forward_wronskian_matches_closed_form() {
    // W(sin x, e^{-2ix}) = -e^{-2ix}(cos x + 2i sin x), up to the normalization of u1, u2.
    let g = Interval::symmetric_pi();
    let step = transform(&Potential::zero(g), &forward_spec(2.0)).unwrap();
    let exact = |x: f64| -(C64::new(0.0, -2.0 * x)).exp() * (C64::new(x.cos(), 2.0 * x.sin()));
    let ratio = step.wronskian[g.n_nodes / 3] / exact(g.node(g.n_nodes / 3));
    let dev = (0..g.n_nodes)
        .map(|i| (step.wronskian[i] - ratio * exact(g.node(i))).norm())
        .fold(0.0, f64::max);
    assert!(dev < 1e-9 * ratio.norm(), "{dev:e}");
}

#[test]
fn dim3_transformation_function_solves_the_pipeline_potential() {
    let g = Interval::symmetric_pi();
    let step = transform(&Potential::zero(g), &forward_spec(2.0)).unwrap();
    let u = WaveSolution::from_fn(c(4.0), g, Arc::new(dim3_u2));
    let (e, residual) = fit_energy(&step.potential, &u);
    assert!((e - c(4.0)).norm() < 1e-8, "{e}");
    assert!(residual < 1e-6, "{residual:e}");
}

#[test]
fn double_level_of_the_closed_form() {
    let v = v1ex(1.0, 2.0, Interval::symmetric_pi()).unwrap();
    assert_eq!(root_multiplicity(&v, c(4.0), None).unwrap(), 2);
    assert_eq!(root_multiplicity(&v, c(2.25), None).unwrap(), 1);
    assert_eq!(root_multiplicity(&v, c(1.0), None).unwrap(), 0);
}
