// L maps solutions of h0 to solutions of h1 at the same energy.
use darboux_susy::darboux::transform;
use darboux_susy::numerics::{integrate, ode_residual};
use darboux_susy::scenario::forward_spec;
use darboux_susy::{Complex64, Interval, Potential};

fn main() -> darboux_susy::Result<()> {
    let v0 = Potential::zero(Interval::symmetric_pi());
    let step = transform(&v0, &forward_spec(2.0))?;
    for e in [Complex64::new(0.7, 0.3), Complex64::new(2.25, 0.0), Complex64::new(5.1, -0.1)] {
        let psi = integrate(&v0, e, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))?;
        let image = step.map(&psi)?;
        println!(
            "E = {e:.2}: |L psi| = {:.3e}, residual on V1 = {:.2e}, L psi at ends {:.1e} {:.1e}",
            image.max_norm(),
            ode_residual(&step.potential, &image),
            image.at_a().norm(),
            image.at_b().norm()
        );
    }
    Ok(())
}
