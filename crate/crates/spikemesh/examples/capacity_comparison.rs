//! Compare the shipped first- and second-generation machine configs: core
//! count scaling times per-core throughput scaling gives the modeled
//! capacity ratio.
//!
//! ```bash
//! cargo run -p spikemesh --example capacity_comparison
//! ```

use spikemesh::sim::{capacity_ratio, ReferenceWorkload};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../..");
    let gen1 = spikemesh::config::load_system_config(&format!("{root}/configs/gen1.json"))?;
    let gen2 = spikemesh::config::load_system_config(&format!("{root}/configs/gen2.json"))?;

    let r = capacity_ratio(&gen1, &gen2, ReferenceWorkload::default());
    println!(
        "cores:              {} -> {} (x{})",
        r.cores_a, r.cores_b, r.core_ratio
    );
    println!(
        "max frequency:      {} MHz -> {} MHz (x{})",
        r.max_mhz_a, r.max_mhz_b, r.frequency_ratio
    );
    println!(
        "cycles per event:   {} -> {} (x{})",
        r.syn_cycles_a, r.syn_cycles_b, r.syn_cycle_ratio
    );
    println!("per-core throughput: x{}", r.per_core_throughput_ratio);
    println!("modeled capacity:    x{}", r.capacity_ratio);
    println!(
        "reference workload ({} events, {} neurons): {} -> {} cycles per timestep",
        r.workload.synaptic_events, r.workload.neurons, r.workload_cycles_a, r.workload_cycles_b
    );
    Ok(())
}
