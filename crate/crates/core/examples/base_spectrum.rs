// Dirichlet levels of V = 0 on [-pi, pi].
use darboux_susy::spectrum::find_real_spectrum;
use darboux_susy::{Interval, Potential};

fn main() -> darboux_susy::Result<()> {
    let v0 = Potential::zero(Interval::symmetric_pi());
    let s = find_real_spectrum(&v0, 0.0, 20.0)?;
    println!("{:>4} {:>16} {:>12} {:>6}", "n", "E", "n^2/4", "nodes");
    for (k, l) in s.levels.iter().enumerate() {
        let n = (k + 1) as f64;
        println!(
            "{:>4} {:>16.12} {:>12.4} {:>6}",
            k + 1,
            l.energy.re,
            n * n / 4.0,
            l.node_count.unwrap_or(0)
        );
    }
    Ok(())
}
