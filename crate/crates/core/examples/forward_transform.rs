// First step: u1 = sin x at 1, u2 = exp(-2ix) at 4, on V = 0.
use darboux_susy::catalog::{v1_forward_value, v1ex_value};
use darboux_susy::darboux::transform;
use darboux_susy::scenario::{forward_spec, max_deviation, GENERIC_ENERGIES};
use darboux_susy::{Interval, Potential};

fn main() -> darboux_susy::Result<()> {
    let b = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2.0);
    let v0 = Potential::zero(Interval::symmetric_pi());
    let step = transform(&v0, &forward_spec(b))?;
    println!("B = {b}, nodeless W: {}", step.nodeless);
    for x in [-3.0, -1.5, 0.0, 1.5, 3.0] {
        println!("  V1({x:>5}) = {:.10}", step.potential.eval(x));
    }
    println!(
        "vs A cos Ax + iB sin Ax form: {:.3e}",
        max_deviation(&step.potential, |x| v1_forward_value(1.0, b, x))
    );
    println!(
        "vs A cos Ax - iB sin Ax form: {:.3e}",
        max_deviation(&step.potential, |x| v1ex_value(1.0, b, x))
    );
    let r = step.verify_intertwining(&GENERIC_ENERGIES)?;
    println!("intertwining residual: {:.3e}", r.max());
    Ok(())
}
