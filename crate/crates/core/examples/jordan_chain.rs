// Eigenfunction and associated function at the double level E = 4.
use darboux_susy::catalog::v1ex;
use darboux_susy::jordan::diagnose_level;
use darboux_susy::{Complex64, Interval};

fn main() -> darboux_susy::Result<()> {
    let v = v1ex(1.0, 2.0, Interval::symmetric_pi())?;
    let r = diagnose_level(&v, Complex64::new(4.0, 0.0))?;
    println!("E = {:.12}", r.energy);
    println!("algebraic {} / geometric {}", r.algebraic_multiplicity, r.geometric_multiplicity);
    for (j, (res, (ba, bb))) in r.residuals.iter().zip(&r.boundary_residuals).enumerate() {
        println!("  member {j}: residual {res:.2e}, ends {ba:.2e} {bb:.2e}");
    }
    println!(
        "(h-E)^{} chi: {:.2e} (stride {}, span [{:.3}, {:.3}])",
        r.nilpotency.power, r.nilpotency.value, r.nilpotency.stride, r.nilpotency.span.0, r.nilpotency.span.1
    );
    let chi = &r.chain[1];
    for x in [-1.5, 1.5] {
        println!("chi({x}) = {:.8}", chi.eval(x).0);
    }
    Ok(())
}
