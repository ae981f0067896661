// Second step on the double level: the associated function comes out as an eigenfunction.
use darboux_susy::catalog::v1ex;
use darboux_susy::jordan::background_emergence_check;
use darboux_susy::scenario::backward_spec;
use darboux_susy::spectrum::{find_complex_spectrum, Rectangle};
use darboux_susy::{Complex64, Interval};

fn main() -> darboux_susy::Result<()> {
    let kappa = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1.2);
    let v1 = v1ex(1.0, 2.0, Interval::symmetric_pi())?;
    let em = background_emergence_check(&v1, Complex64::new(4.0, 0.0), &backward_spec(kappa))?;
    println!("multiplicity at 4: {} -> {}", em.before, em.after);
    println!("L chi residual {:.2e}, L phi {:.2e}", em.image_residual, em.kernel_residual);
    println!("max |Im V2| = {:.2e}", em.step.potential.max_imag());
    let rect = Rectangle::new(0.1, 7.0, -0.5, 0.5)?;
    let s = find_complex_spectrum(&em.step.potential, &rect)?;
    for l in &s.levels {
        println!("  E = {:.10} (m = {})", l.energy.re, l.algebraic_multiplicity);
    }
    Ok(())
}
