//! Phase-A parallelism is invisible in the results: run the same board with
//! 1, 2, 4, and 8 workers and verify the reports are byte-identical.
//! Speedup depends on the workload shape (neuron updates parallelize, the
//! exchange barrier is a single merge), so a compute-heavy, spike-light
//! board is used here.
//!
//! ```bash
//! cargo run --release -p spikemesh --example worker_scaling
//! ```

use std::time::Instant;

use spikemesh::report::report_json;
use spikemesh::sim::{run_simulation, SimOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = spikemesh::parse_system_config(
        r#"{"mesh":{"width":2,"height":2},"cores_per_chip":4,
            "perf_levels":[{"mhz":50,"volts":0.5},{"mhz":150,"volts":0.6},
                           {"mhz":300,"volts":0.7}],
            "max_neurons_per_core":4000,
            "fabric":{"key_bits":{"chip_x":8,"chip_y":8,"core":4,"neuron":12}},
            "seed":5}"#,
    )?;
    let mut pops = String::from("[");
    let mut stims = String::from("[");
    for i in 0..16 {
        if i > 0 {
            pops.push(',');
            stims.push(',');
        }
        pops.push_str(&format!("{{\"name\":\"p{i}\",\"size\":4000}}"));
        stims.push_str(&format!("{{\"target\":\"p{i}\",\"rate_hz\":25.0}}"));
    }
    pops.push(']');
    stims.push(']');
    let net = spikemesh::parse_network(&format!(r#"{{"populations":{pops},"stimuli":{stims}}}"#))?;
    let steps = 300;

    let mut baseline: Option<String> = None;
    for workers in [1usize, 2, 4, 8] {
        let start = Instant::now();
        let report = run_simulation(
            &sys,
            &net,
            steps,
            SimOptions {
                workers,
                ..Default::default()
            },
        )?;
        let json = report_json(&report);
        let elapsed = start.elapsed();
        match &baseline {
            None => baseline = Some(json),
            Some(expected) => assert_eq!(expected, &json, "results must not depend on workers"),
        }
        println!(
            "workers={workers}: {elapsed:?} for {steps} steps x 64k neurons ({} spikes): report identical",
            report.totals.counters.spikes_emitted
        );
    }
    Ok(())
}
