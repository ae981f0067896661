use darboux_susy::catalog::{pt_defect, v1_forward, v1ex};
use darboux_susy::darboux::{darboux_potential, transform};
use darboux_susy::numerics::{integrate, wronskian2};
use darboux_susy::scenario::{forward_spec, max_deviation};
use darboux_susy::spectrum::{characteristic, root_multiplicity};
use darboux_susy::{Complex64 as C64, Interval, Potential};
use proptest::prelude::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn small_grid() -> Interval {
    Interval::symmetric_pi().with_nodes(401).unwrap()
}

fn complex(re: std::ops::Range<f64>, im: std::ops::Range<f64>) -> impl Strategy<Value = C64> {
    (re, im).prop_map(|(a, b)| C64::new(a, b))
}

fn unit_scale() -> impl Strategy<Value = C64> {
    (0.2f64..5.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| C64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn abel_wronskian_is_constant(e in complex(0.0..9.0, -0.5..0.5), y in complex(-1.0..1.0, -1.0..1.0)) {
        let v = v1ex(1.0, 2.0, small_grid()).unwrap();
        let p = integrate(&v, e, c(0.0), c(1.0)).unwrap();
        let q = integrate(&v, e, c(1.0), y).unwrap();
        let w = wronskian2(&p, &q).unwrap();
        let spread = w.iter().map(|z| (z - w[0]).norm()).fold(0.0, f64::max);
        prop_assert!(spread <= 1e-9 * w[0].norm(), "spread {spread:e}");
    }

    #[test]
    fn integration_is_linear_in_the_initial_data(e in complex(0.0..9.0, -0.5..0.5), s in unit_scale()) {
        let v = v1ex(1.0, 2.0, small_grid()).unwrap();
        let p = integrate(&v, e, c(0.3), c(1.0)).unwrap();
        let q = integrate(&v, e, s * 0.3, s).unwrap();
        let dev = (0..p.values.len())
            .map(|i| (q.values[i] - s * p.values[i]).norm())
            .fold(0.0, f64::max);
        prop_assert!(dev <= 1e-9 * s.norm() * p.max_norm(), "{dev:e}");
    }

    #[test]
    fn wronskian_derivative_identity(
        a1 in complex(0.0..6.0, -0.5..0.5),
        a2 in complex(0.0..6.0, -0.5..0.5),
        d in complex(-1.0..1.0, -1.0..1.0),
    ) {
        prop_assume!((a1 - a2).norm() > 0.1);
        let g = small_grid();
        let v = Potential::zero(g);
        let u1 = integrate(&v, a1, c(0.0), c(1.0)).unwrap();
        let u2 = integrate(&v, a2, c(1.0), d).unwrap();
        let w = wronskian2(&u1, &u2).unwrap();
        let h = g.spacing();
        let mut acc = w[0];
        let mut dev: f64 = 0.0;
        for i in 1..g.n_nodes {
            let xm = 0.5 * (g.node(i - 1) + g.node(i));
            let f = |k: usize| u1.values[k] * u2.values[k];
            let mid = u1.eval(xm).0 * u2.eval(xm).0;
            acc += (a1 - a2) * h / 6.0 * (f(i - 1) + 4.0 * mid + f(i));
            dev = dev.max((acc - w[i]).norm());
        }
        let scale = w.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        prop_assert!(dev <= 1e-7 * scale, "dev {dev:e}");
    }

    #[test]
    fn rescaling_leaves_the_potential_unchanged(s1 in unit_scale(), s2 in unit_scale()) {
        let v0 = Potential::zero(small_grid());
        let step = transform(&v0, &forward_spec(2.0)).unwrap();
        let other = darboux_potential(&step.u1.scaled(s1), &step.u2.scaled(s2), &v0).unwrap();
        let d = max_deviation(&other.potential, |x| step.potential.eval(x));
        prop_assert!(d <= 1e-12 * step.potential.max_abs(), "{d:e}");
    }

    #[test]
    fn closed_forms_are_pt_symmetric(a in 0.5f64..1.5, b in 0.3f64..3.0) {
        let g = small_grid();
        prop_assert!(pt_defect(&v1ex(a, b, g).unwrap()) < 1e-10);
        prop_assert!(pt_defect(&v1_forward(a, b, g).unwrap()) < 1e-10);
    }

    #[test]
    fn darboux_map_is_linear(e in complex(0.5..8.0, -0.5..0.5), s in unit_scale(), t in unit_scale()) {
        let v0 = Potential::zero(small_grid());
        let step = transform(&v0, &forward_spec(2.0)).unwrap();
        let p = integrate(&v0, e, c(0.0), c(1.0)).unwrap();
        let q = integrate(&v0, e, c(1.0), c(0.0)).unwrap();
        let lp = step.map_unchecked(&p).unwrap();
        let lq = step.map_unchecked(&q).unwrap();
        let lpq = step.map_unchecked(&p.combine(s, &q, t)).unwrap();
        let dev = (0..lp.values.len())
            .map(|i| (lpq.values[i] - s * lp.values[i] - t * lq.values[i]).norm())
            .fold(0.0, f64::max);
        let scale = s.norm() * lp.max_norm() + t.norm() * lq.max_norm();
        prop_assert!(dev <= 1e-10 * scale, "{dev:e}");
    }

    #[test]
    fn shifting_the_potential_shifts_the_characteristic(shift in complex(-2.0..2.0, -1.0..1.0), e in complex(0.3..6.0, -0.5..0.5)) {
        let v = v1ex(1.0, 2.0, small_grid()).unwrap();
        let d0 = characteristic(&v, e).unwrap().d;
        let d1 = characteristic(&v.shifted(shift), e + shift).unwrap().d;
        prop_assert!((d0 - d1).norm() <= 1e-9 * (1.0 + d0.norm()), "{d0} vs {d1}");
    }

    #[test]
    fn free_levels_are_simple(n in 1usize..7) {
        let v0 = Potential::zero(small_grid());
        let e = c((n * n) as f64 / 4.0);
        prop_assert_eq!(root_multiplicity(&v0, e, None).unwrap(), 1);
    }

    #[test]
    fn intertwining_holds_off_the_factorization_energies(e in complex(0.3..9.0, -0.8..0.8)) {
        prop_assume!((e - c(1.0)).norm() > 0.1 && (e - c(4.0)).norm() > 0.1);
        let v0 = Potential::zero(Interval::symmetric_pi());
        let step = transform(&v0, &forward_spec(2.0)).unwrap();
        let r = step.verify_intertwining(&[e]).unwrap();
        prop_assert!(r.max() < 1e-6, "{:e}", r.max());
    }
}
