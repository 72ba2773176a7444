//! Checkpoint a running simulation to JSON, restore it, and verify the
//! resumed run is bit-identical to an uninterrupted one.
//!
//! ```bash
//! cargo run -p spikemesh --example checkpoint_resume
//! ```

use spikemesh::report::report_json;
use spikemesh::sim::{Checkpoint, SimOptions, Simulation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let sys = spikemesh::config::load_system_config(&format!("{root}/configs/board48.json"))?;
    let net = spikemesh::network::load_network(&format!("{root}/configs/demo_net.json"))?;

    let mut reference = Simulation::new(&sys, &net, SimOptions::default())?;
    reference.run(100);

    let mut first = Simulation::new(&sys, &net, SimOptions::default())?;
    first.run(40);
    let snapshot = serde_json::to_string(&first.checkpoint())?;
    println!("checkpoint at t=40: {} bytes of JSON", snapshot.len());

    let restored: Checkpoint = serde_json::from_str(&snapshot)?;
    let mut second = Simulation::restore(&sys, &net, SimOptions::default(), &restored)?;
    second.run(60);

    let a = report_json(&reference.report());
    let b = report_json(&second.report());
    assert_eq!(a, b, "resumed run diverged");
    println!(
        "resumed run matches the uninterrupted one: {} spikes, {} J total",
        second.counters().spikes_emitted,
        second.ledger().total().to_joules()
    );
    Ok(())
}
