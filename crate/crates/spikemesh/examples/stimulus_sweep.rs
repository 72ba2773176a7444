//! Energy proportionality: sweep external stimulus rates on one board and
//! watch per-core DVFS stretch the quiet cases down to the slow, low-voltage
//! operating points.
//!
//! ```bash
//! cargo run --release -p spikemesh --example stimulus_sweep
//! ```

use spikemesh::network::parse_network;
use spikemesh::sim::{SimOptions, Simulation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let sys = spikemesh::config::load_system_config(&format!("{root}/configs/board48.json"))?;
    let steps = 200;

    println!("rate_hz  spikes     non_leakage_j   leakage_j       mean_mhz");
    for rate in [0.0, 100.0, 250.0, 500.0, 1000.0] {
        let net = parse_network(&format!(
            r#"{{"populations":[{{"name":"a","size":2000}},{{"name":"b","size":2000}}],
                "projections":[{{"source":"a","target":"b",
                                "connectivity":{{"p":0.01}},"weight":0.05}}],
                "stimuli":[{{"target":"a","rate_hz":{rate}}}]}}"#
        ))?;
        let mut sim = Simulation::new(
            &sys,
            &net,
            SimOptions {
                record_core_trace: true,
                trace_cap: Some(1_000_000),
                ..Default::default()
            },
        )?;
        sim.run(steps);
        let trace = sim.core_trace();
        let mean_mhz: f64 = trace
            .iter()
            .map(|p| sys.perf_levels[p.level_idx].mhz)
            .sum::<f64>()
            / trace.len() as f64;
        println!(
            "{rate:7} {:9} {:15.9} {:15.9} {mean_mhz:8.1}",
            sim.counters().spikes_emitted,
            sim.ledger().total_non_leakage().to_joules(),
            sim.ledger().total_core_leakage().to_joules(),
        );
    }
    Ok(())
}
