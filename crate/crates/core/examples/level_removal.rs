// The level at 1 disappears after the first step.
use darboux_susy::darboux::{second_solution_check, transform};
use darboux_susy::scenario::{forward_spec, local_gap};
use darboux_susy::spectrum::characteristic;
use darboux_susy::{Complex64, Interval, Potential};

fn main() -> darboux_susy::Result<()> {
    let v0 = Potential::zero(Interval::symmetric_pi());
    let step = transform(&v0, &forward_spec(2.0))?;
    let (at_alpha1, _) = step.exceptional();
    println!("|u2/W| at a, b: {:.4e} {:.4e}", at_alpha1.at_a().norm(), at_alpha1.at_b().norm());
    let s = second_solution_check(&step.potential, &at_alpha1)?;
    println!("second solution at b: {:.4e}, eigenvalue: {}", s.value_at_b.norm(), s.is_eigenvalue);
    let one = Complex64::new(1.0, 0.0);
    println!("D1(1) = {:.6}", characteristic(&step.potential, one)?.d);
    println!("relative gap: {:.4}", local_gap(&step.potential, one, 0.25)?);
    Ok(())
}
