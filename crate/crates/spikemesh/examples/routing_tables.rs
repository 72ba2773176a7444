//! Build multicast routing tables for a small two-chip network, print them
//! in the dump format, and trace one packet across the mesh.
//!
//! ```bash
//! cargo run -p spikemesh --example routing_tables
//! ```

use spikemesh::fabric::{build_routing_tables, dump_tables, route_packet, SpikePacket};
use spikemesh::place::{place_and_build, Geometry, KeyFields};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let sys = spikemesh::parse_system_config(
        r#"{"mesh":{"width":2,"height":2},"cores_per_chip":2,
            "perf_levels":[{"mhz":100,"volts":0.5}],
            "max_neurons_per_core":8,"seed":3}"#,
    )?;
    let net = spikemesh::parse_network(
        r#"{"populations":[{"name":"sensors","size":8},
                           {"name":"relay","size":16},
                           {"name":"motors","size":8}],
            "projections":[{"source":"sensors","target":"motors",
                            "connectivity":{"p":1.0},"weight":0.25},
                           {"source":"sensors","target":"relay",
                            "connectivity":{"p":0.5},"weight":0.125}]}"#,
    )?;

    let built = place_and_build(&net, &sys)?;
    let geom = Geometry::of(&sys);
    let tables = build_routing_tables(
        &built.placement,
        &built.keyspace,
        &built.synapses,
        &geom,
        sys.fabric.table_capacity,
    )?;

    println!("{}", dump_tables(&tables, &geom));

    let key = built.keyspace.encode(KeyFields {
        chip_x: 0,
        chip_y: 0,
        core: 0,
        neuron: 0,
    });
    let out = route_packet(
        &SpikePacket {
            key,
            emit_timestep: 0,
        },
        &tables,
        &built.keyspace,
        &geom,
    );
    println!(
        "packet {key:#010x}: {} destination cores, {} hops",
        out.destinations.len(),
        out.hops
    );
    for core in &out.destinations {
        let (chip, c) = geom.split_core(*core);
        let (x, y) = geom.chip_coords(chip);
        println!("  -> chip ({x},{y}) core {c}");
    }
    Ok(())
}
