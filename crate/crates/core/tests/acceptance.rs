// Acceptance table. Prints one PASS/FAIL line per criterion; exits nonzero
// only when ACCEPTANCE_STRICT=1.

use darboux_susy::catalog::{example3, pt_defect, v1_forward_value, v1ex, v1ex_value};
use darboux_susy::darboux::{second_solution_check, transform, Recipe};
use darboux_susy::jordan::{diagnose_level, BOUNDARY_TOL, CHAIN_TOL, NILPOTENCY_TOL};
use darboux_susy::numerics::{integrate, wronskian2};
use darboux_susy::scenario::{
    backward_spec, exceptional_return, forward_spec, kappa_probe, local_gap, max_deviation, reproduce_scenario,
    spectrum_deviation, Bound, Scenario, GENERIC_ENERGIES,
};
use darboux_susy::spectrum::{
    characteristic_taylor, find_complex_spectrum, find_real_spectrum, root_multiplicity, root_tolerance,
    Rectangle, SpectrumReport,
};
use darboux_susy::{Complex64 as C64, Interval, Potential, Result};
use std::time::Instant;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

struct Line {
    id: String,
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Default)]
struct Table {
    lines: Vec<Line>,
}

impl Table {
    fn record(&mut self, id: &str, name: &str, passed: bool, detail: String) {
        println!("{:<5} {:<4} {} | {}", id, if passed { "PASS" } else { "FAIL" }, name, detail);
        self.lines.push(Line {
            id: id.into(),
            name: name.into(),
            passed,
            detail,
        });
    }

    fn at_most(&mut self, id: &str, name: &str, value: f64, tol: f64) {
        self.record(id, name, value <= tol, format!("{value:.3e} <= {tol:.1e}"));
    }

    fn at_least(&mut self, id: &str, name: &str, value: f64, tol: f64) {
        self.record(id, name, value >= tol, format!("{value:.3e} >= {tol:.1e}"));
    }

    fn equals(&mut self, id: &str, name: &str, value: usize, expected: usize) {
        self.record(id, name, value == expected, format!("{value} == {expected}"));
    }

    fn guard<T>(&mut self, id: &str, name: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.record(id, name, false, format!("error: {e}"));
                None
            }
        }
    }
}

fn grid() -> Interval {
    Interval::symmetric_pi()
}

fn max_imag(s: &SpectrumReport) -> f64 {
    s.levels.iter().fold(0.0, |m, l| m.max(l.energy.im.abs()))
}

fn base_spectrum(t: &mut Table) {
    let v0 = Potential::zero(grid());
    let Some(s) = t.guard("1", "free spectrum", find_real_spectrum(&v0, 0.1, 16.5)) else {
        return;
    };
    t.equals("1", "free spectrum: level count", s.levels.len(), 8);
    let dev = s
        .levels
        .iter()
        .take(8)
        .enumerate()
        .map(|(k, l)| {
            let n = (k + 1) as f64;
            (l.energy - c(n * n / 4.0)).norm()
        })
        .fold(0.0, f64::max);
    t.at_most("1", "free spectrum: max |E_n - n^2/4|", dev, 1e-9);
}

fn forward_closed_form(t: &mut Table) {
    let v0 = Potential::zero(grid());
    let Some(step) = t.guard("2", "forward transform", transform(&v0, &forward_spec(2.0))) else {
        return;
    };
    t.at_most(
        "2",
        "pipeline V1 vs v1ex closed form",
        max_deviation(&step.potential, |x| v1ex_value(1.0, 2.0, x)),
        1e-8,
    );
    t.at_most(
        "2b",
        "pipeline V1 vs conjugate closed form",
        max_deviation(&step.potential, |x| v1_forward_value(1.0, 2.0, x)),
        1e-8,
    );
}

fn non_diagonalizable(t: &mut Table) {
    let Some(v1) = t.guard("3", "closed form V1", v1ex(1.0, 2.0, grid())) else {
        return;
    };
    if let Some(m) = t.guard("3", "multiplicity at 4", root_multiplicity(&v1, c(4.0), None)) {
        t.equals("3", "winding multiplicity at 4", m, 2);
    }
    if let Some(d) = t.guard("3", "Taylor coefficients of D at 4", characteristic_taylor(&v1, c(4.0), 2)) {
        let e = c(4.0);
        let tol_d = root_tolerance(e, d[1]);
        let tol_dp = root_tolerance(e, d[2] * 2.0);
        t.at_most("3", "|D(4)| (scale-aware)", d[0].norm(), tol_d);
        t.at_most("3", "|D'(4)| (scale-aware)", d[1].norm(), tol_dp);
    }
    let rect = Rectangle::new(0.1, 7.0, -1.0, 1.0).expect("rectangle");
    if let Some(s) = t.guard("3", "complex spectrum", find_complex_spectrum(&v1, &rect)) {
        let expected = [(0.25, 1), (2.25, 1), (4.0, 2), (6.25, 1)];
        t.at_most("3", "spectrum {0.25, 2.25, 4(x2), 6.25}", spectrum_deviation(&s, &expected), 1e-8);
        t.at_most("3", "spectrum: max |Im E|", max_imag(&s), 1e-8);
    }
}

fn diagonalizable_branch(t: &mut Table) {
    let Some(v1) = t.guard("4", "closed form V1 (B=1.3)", v1ex(1.0, 1.3, grid())) else {
        return;
    };
    let rect = Rectangle::new(0.1, 7.0, -1.0, 1.0).expect("rectangle");
    let Some(s) = t.guard("4", "complex spectrum", find_complex_spectrum(&v1, &rect)) else {
        return;
    };
    let simple = s.levels.iter().all(|l| l.algebraic_multiplicity == 1);
    t.record("4", "all multiplicities 1", simple, format!("{} levels", s.levels.len()));
    let extra = s
        .nearest(c(1.69))
        .map(|l| (l.energy - c(1.69)).norm())
        .unwrap_or(f64::INFINITY);
    t.at_most("4", "extra level at B^2 = 1.69", extra, 1e-8);
}

fn chain_residuals(t: &mut Table) {
    let Some(v1) = t.guard("5", "closed form V1", v1ex(1.0, 2.0, grid())) else {
        return;
    };
    let Some(r) = t.guard("5", "diagnosis at 4", diagnose_level(&v1, c(4.0))) else {
        return;
    };
    t.equals("5", "chain length", r.chain.len(), 2);
    t.at_most("5", "||(h-4) chi - phi|| / ||phi||", r.max_residual(), CHAIN_TOL);
    t.at_most("5", "||(h-4)^2 chi|| / ||chi||", r.nilpotency.value, NILPOTENCY_TOL);
    t.at_most("5", "|chi(+-pi)| / ||chi||", r.max_boundary(), BOUNDARY_TOL);
}

fn level_removal(t: &mut Table) {
    let v0 = Potential::zero(grid());
    let Some(step) = t.guard("6", "forward transform", transform(&v0, &forward_spec(2.0))) else {
        return;
    };
    let (at_alpha1, _) = step.exceptional();
    if let Some(s) = t.guard("6", "second solution", second_solution_check(&step.potential, &at_alpha1)) {
        t.record(
            "6",
            "second_solution_check is false at 1",
            !s.is_eigenvalue,
            format!("|phi2(b)| = {:.3e}", s.value_at_b.norm()),
        );
    }
    if let Some(gap) = t.guard("6", "local gap", local_gap(&step.potential, c(1.0), 0.25)) {
        t.at_least("6", "|D1(1)| / local scale", gap, 0.01);
    }
}

fn backward(t: &mut Table) {
    let Some(r) = t.guard(
        "7",
        "backward scenario",
        reproduce_scenario(&Scenario::BackwardV2 { kappa: 1.2 }, grid()),
    ) else {
        return;
    };
    for f in &r.failures {
        t.record("7", &format!("stage {}", f.stage), false, f.message.clone());
    }
    let rows = [
        ("7", "real potential", "real potential"),
        ("7", "spectrum {0.25, 1.44, 2.25, 4, 6.25}", "spectrum matches expected set"),
        ("7", "simple spectrum", "diagonalizable"),
        ("7", "multiplicity at 4 before", "multiplicity at 4 before"),
        ("7", "multiplicity at 4 after", "multiplicity at 4 after"),
        ("7", "L2 chi eigenfunction residual", "L2 chi: eigenfunction residual"),
        ("7", "L2 chi boundary values", "L2 chi: boundary values"),
        ("7b", "pipeline V2 vs closed form", "pipeline vs closed form"),
    ];
    for (id, label, key) in rows {
        match r.check(key) {
            Some(ch) => {
                let detail = match ch.bound {
                    Bound::Equals => format!("{} == {}", ch.value, ch.threshold),
                    Bound::AtMost => format!("{:.3e} <= {:.1e}", ch.value, ch.threshold),
                    Bound::AtLeast => format!("{:.3e} >= {:.1e}", ch.value, ch.threshold),
                };
                t.record(id, label, ch.passed, detail);
            }
            None => t.record(id, label, false, "check missing".into()),
        }
    }
}

fn degenerate_backward(t: &mut Table) {
    for kappa in [1.0 - 1e-4, 1.0 + 1e-4] {
        let (max, mid) = kappa_probe(kappa, grid());
        t.record(
            "8",
            &format!("max |V2| at kappa = {kappa}"),
            max < 1e-2,
            format!("{max:.3e} < 1.0e-2 (|V2(-pi/2)| = {mid:.3e})"),
        );
    }
    let v0 = Potential::zero(grid());
    if let Some(step) = t.guard("8b", "forward transform", transform(&v0, &forward_spec(2.0))) {
        if let Some((_, dev)) = t.guard("8b", "exceptional return", exceptional_return(&step)) {
            t.at_most("8b", "V1 -> V0 through exceptional solutions", dev, 1e-7);
        }
    }
}

fn dimension_three(t: &mut Table) {
    let Some(v) = t.guard("9", "closed form example", example3(grid())) else {
        return;
    };
    let rect = Rectangle::new(0.1, 10.0, -1.0, 1.0).expect("rectangle");
    if let Some(s) = t.guard("9", "complex spectrum", find_complex_spectrum(&v, &rect)) {
        let expected = [(2.25, 1), (4.0, 3), (6.25, 1), (9.0, 1)];
        t.at_most("9", "spectrum {2.25, 4(x3), 6.25, 9}", spectrum_deviation(&s, &expected), 1e-8);
    }
    if let Some(m) = t.guard("9", "multiplicity at 4", root_multiplicity(&v, c(4.0), None)) {
        t.equals("9", "winding multiplicity at 4", m, 3);
    }
    if let Some(r) = t.guard("9", "diagnosis at 4", diagnose_level(&v, c(4.0))) {
        t.equals("9", "chain length", r.chain.len(), 3);
        let ok = r.chain_ok() && r.boundary_ok() && r.nilpotency_ok();
        t.record(
            "9",
            "chain residual-verified",
            ok,
            format!(
                "residual {:.3e}, boundary {:.3e}, nilpotency {:.3e}",
                r.max_residual(),
                r.max_boundary(),
                r.nilpotency.value
            ),
        );
    }
}

fn wronskian_spread(w: &[C64]) -> f64 {
    let w0 = w[0];
    w.iter().map(|z| (z - w0).norm()).fold(0.0, f64::max) / w0.norm().max(1e-300)
}

fn properties(t: &mut Table) {
    let g = grid();
    let v1 = match v1ex(1.0, 2.0, g) {
        Ok(v) => v,
        Err(e) => return t.record("10", "closed form V1", false, e.to_string()),
    };

    // Two independent solutions at one energy: W constant.
    let mut abel: f64 = 0.0;
    for e in GENERIC_ENERGIES {
        let pair = integrate(&v1, e, c(0.0), c(1.0)).and_then(|p| Ok((p, integrate(&v1, e, c(1.0), c(0.0))?)));
        match pair.and_then(|(p, q)| wronskian2(&p, &q)) {
            Ok(w) => abel = abel.max(wronskian_spread(&w)),
            Err(_) => abel = f64::INFINITY,
        }
    }
    t.at_most("10", "Abel: relative spread of W", abel, 1e-9);

    // W(u1, u2)' = (alpha1 - alpha2) u1 u2, integrated node to node.
    let v0 = Potential::zero(g);
    match transform(&v0, &forward_spec(2.0)) {
        Ok(step) => {
            let n = g.n_nodes;
            let h = g.spacing();
            let (a1, a2) = (step.alpha1, step.alpha2);
            let prod: Vec<C64> = (0..n).map(|i| step.u1.values[i] * step.u2.values[i]).collect();
            let mut acc = step.wronskian[0];
            let mut dev: f64 = 0.0;
            for i in 1..n {
                // Simpson per cell, midpoint from the continuous solutions.
                let xm = 0.5 * (g.node(i - 1) + g.node(i));
                let mid = step.u1.eval(xm).0 * step.u2.eval(xm).0;
                acc += (a1 - a2) * h / 6.0 * (prod[i - 1] + 4.0 * mid + prod[i]);
                dev = dev.max((acc - step.wronskian[i]).norm());
            }
            let scale = step.wronskian.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
            t.at_most("10", "Wronskian-derivative identity (relative)", dev / scale, 1e-6);

            let mut rescaled = forward_spec(2.0);
            rescaled.u1 = Recipe::Given(step.u1.scaled(C64::new(-3.7, 1.1)));
            rescaled.u2 = Recipe::Given(step.u2.scaled(C64::new(0.2, -5.0)));
            match transform(&v0, &rescaled) {
                Ok(other) => {
                    let d = max_deviation(&other.potential, |x| step.potential.eval(x));
                    t.at_most("10", "rescaling invariance of V1", d / step.potential.max_abs(), 1e-12);
                }
                Err(e) => t.record("10", "rescaling invariance of V1", false, e.to_string()),
            }
            match step.verify_intertwining(&GENERIC_ENERGIES) {
                Ok(r) => t.at_most("10", "intertwining residual, first step", r.max(), 1e-6),
                Err(e) => t.record("10", "intertwining residual, first step", false, e.to_string()),
            }
        }
        Err(e) => t.record("10", "forward transform", false, e.to_string()),
    }

    t.at_most("10", "PT symmetry of V1 closed form", pt_defect(&v1), 1e-10);
    match example3(g) {
        Ok(v) => t.at_most("10", "PT symmetry of example closed form", pt_defect(&v), 1e-10),
        Err(e) => t.record("10", "PT symmetry of example closed form", false, e.to_string()),
    }

    let second = backward_spec(1.2);
    let chained = transform(&v0, &forward_spec(2.0)).and_then(|s| transform(&s.potential, &second));
    match chained.and_then(|s| s.verify_intertwining(&GENERIC_ENERGIES)) {
        Ok(r) => t.at_most("10", "intertwining residual, second step", r.max(), 1e-6),
        Err(e) => t.record("10", "intertwining residual, second step", false, e.to_string()),
    }
}

fn main() {
    let start = Instant::now();
    let mut table = Table::default();
    let criteria: [(&str, fn(&mut Table)); 10] = [
        ("base spectrum", base_spectrum),
        ("forward closed form", forward_closed_form),
        ("non-diagonalizable level", non_diagonalizable),
        ("diagonalizable branch", diagonalizable_branch),
        ("jordan chain residuals", chain_residuals),
        ("level removal", level_removal),
        ("backward transform", backward),
        ("degenerate backward case", degenerate_backward),
        ("dimension-three root subspace", dimension_three),
        ("property suites", properties),
    ];
    for (k, (title, run)) in criteria.iter().enumerate() {
        println!("-- criterion {}: {title}", k + 1);
        run(&mut table);
    }

    let failed: Vec<&Line> = table.lines.iter().filter(|l| !l.passed).collect();
    println!();
    println!(
        "{} checks, {} passed, {} failed ({:.1?})",
        table.lines.len(),
        table.lines.len() - failed.len(),
        failed.len(),
        start.elapsed()
    );
    for l in &failed {
        println!("  FAIL {} {}: {}", l.id, l.name, l.detail);
    }
    let strict = std::env::var("ACCEPTANCE_STRICT").map(|v| v == "1").unwrap_or(false);
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
