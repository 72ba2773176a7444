//! Run the shipped demo network on the 48-core board config and write a
//! report, a per-timestep CSV, and a spike raster.
//!
//! ```bash
//! cargo run --release -p spikemesh --example run_network
//! ```

use spikemesh::report::emit_report;
use spikemesh::sim::{run_simulation, SimOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let sys = spikemesh::config::load_system_config(&format!("{root}/configs/board48.json"))?;
    let net = spikemesh::network::load_network(&format!("{root}/configs/demo_net.json"))?;

    let report = run_simulation(
        &sys,
        &net,
        500,
        SimOptions {
            record_series: true,
            record_raster: true,
            ..Default::default()
        },
    )?;

    let out_dir = std::env::temp_dir().join("spikemesh-demo");
    std::fs::create_dir_all(&out_dir)?;
    let json = out_dir.join("report.json");
    let csv = out_dir.join("series.csv");
    let raster = out_dir.join("raster.csv");
    emit_report(
        &report,
        json.to_str().unwrap(),
        Some(csv.to_str().unwrap()),
        Some(raster.to_str().unwrap()),
    )?;

    println!(
        "{} timesteps, {} spikes emitted, {} delivered packets, {} dropped",
        report.timesteps,
        report.totals.counters.spikes_emitted,
        report.totals.counters.packets_delivered,
        report.totals.counters.packets_dropped
    );
    println!(
        "energy: dynamic {} J, leakage {} J, link {} J",
        report.totals.core_dynamic.joules,
        report.totals.core_leakage.joules,
        report.totals.link.joules
    );
    println!("wrote {}", out_dir.display());
    Ok(())
}
