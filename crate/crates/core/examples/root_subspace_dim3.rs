// Two steps that grow the root subspace at 4 from dimension two to three.
use darboux_susy::scenario::{reproduce_scenario, Scenario};
use darboux_susy::Interval;

fn main() -> darboux_susy::Result<()> {
    let r = reproduce_scenario(&Scenario::ChainDim3, Interval::symmetric_pi())?;
    for (k, v) in &r.notes {
        println!("{k}: {v}");
    }
    for c in &r.checks {
        println!("[{}] {} = {:.3e}", if c.passed { "ok" } else { "FAIL" }, c.name, c.value);
    }
    for f in &r.failures {
        println!("stage {} failed: {}", f.stage, f.message);
    }
    Ok(())
}
