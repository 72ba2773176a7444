//! Shared test oracles and fixtures.
//!
//! `FlatSim` is an independent single-loop reference simulator: no DVFS, no
//! routing tables, no per-core phases. It consumes the same built network
//! (placement-derived streams, expanded synapses, exp-unit decay factors,
//! all contractual) but implements the dynamics and delivery on its own, so
//! agreement with the distributed engine checks the machinery end to end.

use std::collections::BTreeMap;

use spikemesh::accel::{self, RngStream};
use spikemesh::config::SystemConfig;
use spikemesh::engine;
use spikemesh::fixed::Fixed;
use spikemesh::network::NetworkDesc;
use spikemesh::place::{self, streams, Built, Geometry};

struct FlatNeuron {
    v: i32,
    alpha: i64,
    threshold: i32,
    reset: i32,
    stim_threshold: u64,
    key: u32,
}

/// One core's neurons in the flat model (needed only to replay the
/// per-core stimulus streams in the right order).
struct FlatCore {
    rng: RngStream,
    neurons: Vec<usize>,
}

pub struct FlatSim {
    neurons: Vec<FlatNeuron>,
    cores: Vec<FlatCore>,
    /// Global fan-out: source key -> (global neuron, weight raw).
    fanout: BTreeMap<u32, Vec<(usize, i32)>>,
    /// (global target neuron, weight) events pending for the next step.
    pending: Vec<(usize, i32)>,
    frac_bits: u32,
    max_raw: i64,
    min_raw: i64,
}

impl FlatSim {
    pub fn new(sys: &SystemConfig, net: &NetworkDesc, built: &Built) -> FlatSim {
        let geom = Geometry::of(sys);
        let fmt = sys.accel.formats.state;
        let dt = sys.timestep_secs();

        let mut pop_rate = vec![0.0f64; net.populations.len()];
        for stim in &net.stimuli {
            let idx = net.population_index(&stim.target).unwrap();
            pop_rate[idx] += stim.rate_hz;
        }

        // Global neuron order mirrors core-slot order.
        let mut neurons = Vec::new();
        let mut cores = Vec::new();
        let mut global_of: BTreeMap<(u64, u32), usize> = BTreeMap::new();
        for plan in &built.placement.cores {
            let (chip, core) = geom.split_core(plan.core_linear);
            let (chip_x, chip_y) = geom.chip_coords(chip);
            let mut members = Vec::new();
            for (local, &(pop, _)) in plan.neurons.iter().enumerate() {
                let p = &net.populations[pop as usize].neuron_params;
                let alpha = accel::exp(Fixed::from_f64(
                    accel::exp_clamp(-dt / (p.tau_m_ms * 1e-3)),
                    fmt,
                ))
                .unwrap()
                .raw() as i64;
                let global = neurons.len();
                global_of.insert((plan.core_linear, local as u32), global);
                members.push(global);
                neurons.push(FlatNeuron {
                    v: Fixed::from_f64(p.v_rest, fmt).raw(),
                    alpha,
                    threshold: Fixed::from_f64(p.v_threshold, fmt).raw(),
                    reset: Fixed::from_f64(p.v_reset, fmt).raw(),
                    stim_threshold: engine::stimulus_threshold(pop_rate[pop as usize], dt),
                    key: built.keyspace.encode(place::KeyFields {
                        chip_x,
                        chip_y,
                        core,
                        neuron: local as u32,
                    }),
                });
            }
            cores.push(FlatCore {
                rng: streams::stimulus(sys.seed, plan.core_linear),
                neurons: members,
            });
        }

        let mut fanout: BTreeMap<u32, Vec<(usize, i32)>> = BTreeMap::new();
        for (slot, table) in built.synapses.per_core.iter().enumerate() {
            let core_linear = built.placement.cores[slot].core_linear;
            for (&key, targets) in table {
                let list = fanout.entry(key).or_default();
                for &(local, weight) in targets {
                    list.push((global_of[&(core_linear, local)], weight));
                }
            }
        }

        FlatSim {
            neurons,
            cores,
            fanout,
            pending: Vec::new(),
            frac_bits: fmt.frac_bits as u32,
            max_raw: fmt.max_raw() as i64,
            min_raw: fmt.min_raw() as i64,
        }
    }

    /// Advance one timestep; returns the emitted keys in ascending order.
    pub fn step(&mut self, weight_frac_bits: u32) -> Vec<u32> {
        let mut acc = vec![0i64; self.neurons.len()];
        let shift = self.frac_bits - weight_frac_bits;
        for &(target, weight) in &self.pending {
            acc[target] += (weight as i64) << shift;
        }
        let mut forced = vec![false; self.neurons.len()];
        for core in &mut self.cores {
            for &g in &core.neurons {
                if self.neurons[g].stim_threshold > 0 {
                    forced[g] = core.rng.bernoulli(self.neurons[g].stim_threshold);
                }
            }
        }
        let half = 1i64 << (self.frac_bits - 1);
        let mut spikes = Vec::new();
        for (g, n) in self.neurons.iter_mut().enumerate() {
            let decayed = (n.alpha * n.v as i64 + half) >> self.frac_bits;
            let mut v = (decayed + acc[g]).clamp(self.min_raw, self.max_raw) as i32;
            if forced[g] && v < n.threshold {
                v = n.threshold;
            }
            if v >= n.threshold {
                spikes.push(n.key);
                v = n.reset;
            }
            n.v = v;
        }
        self.pending.clear();
        for &key in &spikes {
            if let Some(list) = self.fanout.get(&key) {
                self.pending.extend_from_slice(list);
            }
        }
        spikes.sort_unstable();
        spikes
    }
}

/// Independent recursive table walker used as the routing oracle.
pub fn oracle_route(
    key: u32,
    sys: &SystemConfig,
    built: &Built,
    tables: &spikemesh::fabric::RoutingTables,
) -> Vec<u64> {
    let geom = Geometry::of(sys);
    let fields = built.keyspace.decode(key);
    let mut seen = std::collections::BTreeSet::new();
    let mut dests = std::collections::BTreeSet::new();
    walk(
        key,
        geom.chip_linear(fields.chip_x, fields.chip_y),
        &geom,
        tables,
        &mut seen,
        &mut dests,
    );
    dests.into_iter().collect()
}

fn walk(
    key: u32,
    chip: u64,
    geom: &Geometry,
    tables: &spikemesh::fabric::RoutingTables,
    seen: &mut std::collections::BTreeSet<u64>,
    dests: &mut std::collections::BTreeSet<u64>,
) {
    if !seen.insert(chip) {
        return;
    }
    let entry = tables.per_chip[chip as usize]
        .entries()
        .iter()
        .find(|e| key & e.mask == e.key);
    let Some(entry) = entry else { return };
    for core in 0..64u32 {
        if entry.route.cores & (1u64 << core) != 0 {
            dests.insert(geom.core_linear(chip, core));
        }
    }
    let (x, y) = geom.chip_coords(chip);
    let steps: [(u8, Option<u64>); 4] = [
        (0, (x + 1 < geom.width).then(|| geom.chip_linear(x + 1, y))),
        (1, (y + 1 < geom.height).then(|| geom.chip_linear(x, y + 1))),
        (2, (x > 0).then(|| geom.chip_linear(x - 1, y))),
        (3, (y > 0).then(|| geom.chip_linear(x, y - 1))),
    ];
    for (bit, next) in steps {
        if entry.route.dirs & (1 << bit) != 0 {
            if let Some(next) = next {
                walk(key, next, geom, tables, seen, dests);
            }
        }
    }
}

/// Every key a built network can emit.
pub fn all_keys(sys: &SystemConfig, built: &Built) -> Vec<u32> {
    let geom = Geometry::of(sys);
    let mut keys = Vec::new();
    for plan in &built.placement.cores {
        let (chip, core) = geom.split_core(plan.core_linear);
        let (chip_x, chip_y) = geom.chip_coords(chip);
        for n in 0..plan.neurons.len() as u32 {
            keys.push(built.keyspace.encode(place::KeyFields {
                chip_x,
                chip_y,
                core,
                neuron: n,
            }));
        }
    }
    keys
}

/// Target core set implied directly by the synapse tables.
pub fn implied_destinations(key: u32, built: &Built) -> Vec<u64> {
    built
        .synapses
        .per_core
        .iter()
        .enumerate()
        .filter(|(_, t)| t.contains_key(&key))
        .map(|(slot, _)| built.placement.cores[slot].core_linear)
        .collect()
}

/// Deterministic random network for mesh/routing sweeps: mixed excitatory
/// and inhibitory weights, occasional full (p = 1) projections so merged
/// wildcard routing entries get exercised, and varied neuron parameters.
pub fn random_net(seed: u64, max_pop: u32, pops: usize) -> NetworkDesc {
    let mut rng = RngStream::new(seed, 0x7e57);
    let mut doc = String::from("{\"populations\":[");
    for i in 0..pops {
        let size = 1 + rng.next_u32() % max_pop;
        if i > 0 {
            doc.push(',');
        }
        let threshold = 0.6 + (rng.next_u32() % 8) as f64 / 10.0;
        let tau = [5.0, 10.0, 20.0][rng.next_u32() as usize % 3];
        doc.push_str(&format!(
            "{{\"name\":\"p{i}\",\"size\":{size},\
             \"neuron_params\":{{\"v_threshold\":{threshold},\"tau_m_ms\":{tau}}}}}"
        ));
    }
    doc.push_str("],\"projections\":[");
    let mut first = true;
    for s in 0..pops {
        for t in 0..pops {
            if rng.next_u32() % 100 < 40 {
                if !first {
                    doc.push(',');
                }
                first = false;
                let p = if rng.next_u32().is_multiple_of(5) {
                    1.0
                } else {
                    (rng.next_u32() % 100) as f64 / 100.0
                };
                let mut w = 0.05 + (rng.next_u32() % 100) as f64 / 400.0;
                if rng.next_u32().is_multiple_of(4) {
                    w = -w;
                }
                doc.push_str(&format!(
                    "{{\"source\":\"p{s}\",\"target\":\"p{t}\",\
                     \"connectivity\":{{\"p\":{p}}},\"weight\":{w}}}"
                ));
            }
        }
    }
    doc.push_str("],\"stimuli\":[");
    for i in 0..pops {
        if i > 0 {
            doc.push(',');
        }
        let rate = 100 + rng.next_u32() % 900;
        doc.push_str(&format!("{{\"target\":\"p{i}\",\"rate_hz\":{rate}}}"));
    }
    doc.push_str("]}");
    spikemesh::network::parse_network(&doc).unwrap()
}

/// The 48-core board workload: one population per core, ring-coupled.
pub fn board48_net(rate_hz: f64) -> NetworkDesc {
    let pops = 48;
    let mut doc = String::from("{\"populations\":[");
    for i in 0..pops {
        if i > 0 {
            doc.push(',');
        }
        doc.push_str(&format!(
            "{{\"name\":\"p{i}\",\"size\":1000,\
             \"neuron_params\":{{\"v_threshold\":1.0,\"tau_m_ms\":10.0}}}}"
        ));
    }
    doc.push_str("],\"projections\":[");
    for i in 0..pops {
        if i > 0 {
            doc.push(',');
        }
        let next = (i + 1) % pops;
        doc.push_str(&format!(
            "{{\"source\":\"p{i}\",\"target\":\"p{next}\",\
             \"connectivity\":{{\"p\":0.005}},\"weight\":0.02}}"
        ));
    }
    doc.push_str("],\"stimuli\":[");
    if rate_hz > 0.0 {
        for i in 0..pops {
            if i > 0 {
                doc.push(',');
            }
            doc.push_str(&format!("{{\"target\":\"p{i}\",\"rate_hz\":{rate_hz}}}"));
        }
    }
    doc.push_str("]}");
    spikemesh::network::parse_network(&doc).unwrap()
}

pub fn load_config(name: &str) -> SystemConfig {
    let path = format!("{}/../../configs/{name}", env!("CARGO_MANIFEST_DIR"));
    spikemesh::config::load_system_config(&path).unwrap()
}
