//! Offload a dense layer to the MAC array: the host core keeps simulating
//! spikes while the array multiplies the previous timestep's spike vector
//! through an 8x32 weight matrix on its own energy ledger line.
//!
//! ```bash
//! cargo run -p spikemesh --example mac_offload
//! ```

use spikemesh::sim::{SimOptions, Simulation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = spikemesh::parse_system_config(
        r#"{"mesh":{"width":1,"height":1},"cores_per_chip":2,
            "perf_levels":[{"mhz":100,"volts":0.5},{"mhz":200,"volts":0.6}],
            "max_neurons_per_core":64,"seed":11}"#,
    )?;
    // 32 stimulated neurons feed an 8-row readout layer on core 1.
    let weights: Vec<Vec<i8>> = (0..8)
        .map(|r| (0..32).map(|c| ((r * 7 + c * 3) % 11) as i8 - 5).collect())
        .collect();
    let net = spikemesh::parse_network(&format!(
        r#"{{"populations":[{{"name":"a","size":32}}],
            "stimuli":[{{"target":"a","rate_hz":800.0}}],
            "dense_layers":[{{"name":"readout","rows":8,"cols":32,
                             "weights":{},
                             "input":{{"pop":"a"}},
                             "core":{{"chip":[0,0],"core":1}}}}]}}"#,
        serde_json::to_string(&weights)?
    ))?;

    let mut sim = Simulation::new(
        &sys,
        &net,
        SimOptions {
            record_mac_outputs: true,
            ..Default::default()
        },
    )?;
    sim.run(5);

    for point in sim.mac_trace() {
        println!(
            "t={} layer={} cycles={} output={:?}",
            point.t, point.layer, point.cycles, point.output
        );
    }
    println!(
        "mac energy: {} J across {} timesteps (dynamic core energy: {} J)",
        sim.ledger().total_mac().to_joules(),
        sim.timestep(),
        sim.ledger().total_core_dynamic().to_joules()
    );
    Ok(())
}
