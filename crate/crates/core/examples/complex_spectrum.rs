// Winding-number spectra on a rectangle: a Jordan level at B = 2, simple levels at B = 1.3.
use darboux_susy::catalog::v1ex;
use darboux_susy::jordan::is_diagonalizable;
use darboux_susy::spectrum::{find_complex_spectrum, Rectangle};
use darboux_susy::Interval;

fn main() -> darboux_susy::Result<()> {
    let rect = Rectangle::new(0.1, 7.0, -1.0, 1.0)?;
    for b in [2.0, 1.3] {
        let v = v1ex(1.0, b, Interval::symmetric_pi())?;
        let s = find_complex_spectrum(&v, &rect)?;
        println!("B = {b}");
        for l in &s.levels {
            println!("  {:.10} m = {}", l.energy, l.algebraic_multiplicity);
        }
        let d = is_diagonalizable(&v, &rect)?;
        println!("  diagonalizable: {}", d.diagonalizable);
        for w in &d.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
