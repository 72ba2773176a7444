//! The barrier-synchronous timestep loop.
//!
//! Each simulated millisecond runs in two phases. Phase A is data-parallel
//! over cores: stimulus draws, DVFS selection, the LIF update, energy, and
//! any hosted MAC layers. Phase B is the barrier: every packet emitted at t
//! is routed into inboxes for t+1 and link energy is charged. Results are
//! merged in core order, so output is bit-identical for any worker count.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::accel::{self, RngStream};
use crate::config::SystemConfig;
use crate::engine::{
    self, CoreRuntime, CoreState, NeuronConfig, StepParams, SynapticEvent, TimestepOutcome,
};
use crate::error::{Error, Result};
use crate::fabric::{build_routing_tables, exchange_phase, LinkArray, RoutingTables, SpikePacket};
use crate::fixed::Fixed;
use crate::ledger::{Counters, EnergyAmount, EnergyLedger};
use crate::network::NetworkDesc;
use crate::place::{place_and_build, streams, Built, Geometry, KeyFields, KeySpace, Placement};
use crate::report::{CoreRow, EnergyBreakdown, ReportTotals, SimReport};

/// Run controls; everything defaults off except a single worker.
#[derive(Debug, Clone)]
pub struct SimOptions {
    pub workers: usize,
    /// Record one per-timestep totals row (feeds the CSV series).
    pub record_series: bool,
    /// Record (t, key) for every emitted spike, up to the trace cap.
    pub record_raster: bool,
    /// Record per-core DVFS decisions, up to the trace cap.
    pub record_core_trace: bool,
    /// Record MAC layer outputs per timestep, up to the trace cap.
    pub record_mac_outputs: bool,
    /// Overrides the config's trace cap when set.
    pub trace_cap: Option<usize>,
    /// Overrides the config's seed when set.
    pub seed_override: Option<u64>,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            workers: 1,
            record_series: false,
            record_raster: false,
            record_core_trace: false,
            record_mac_outputs: false,
            trace_cap: None,
            seed_override: None,
        }
    }
}

/// Per-timestep totals, one row of the CSV series.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: u64,
    pub spikes: u64,
    pub dynamic: EnergyAmount,
    pub leakage: EnergyAmount,
    pub link: EnergyAmount,
    pub mac: EnergyAmount,
    pub misses: u64,
}

/// One DVFS decision, recorded when core tracing is on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoreTracePoint {
    pub t: u64,
    pub core_linear: u64,
    pub estimated_cycles: u64,
    pub actual_cycles: u64,
    pub level_idx: usize,
    pub miss: bool,
}

/// One MAC activation, recorded when MAC tracing is on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MacTracePoint {
    pub t: u64,
    pub layer: String,
    pub output: Vec<i32>,
    pub cycles: u64,
}

enum LayerFeed {
    Constant(Vec<i8>),
    /// Keys of the source population's neurons, in population order.
    Pop(Vec<u32>),
}

struct LayerPlan {
    weights: Vec<Vec<i8>>,
    feed: LayerFeed,
    /// (target slot, target locals base) for the experimental inject hook.
    inject: Option<InjectPlan>,
    name: String,
}

struct InjectPlan {
    /// (slot, core-local index) per target population neuron.
    targets: Vec<(usize, u32)>,
    shift: u8,
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// A fully built simulation ready to step.
pub struct Simulation {
    sys: SystemConfig,
    geom: Geometry,
    keyspace: KeySpace,
    placement: Placement,
    synapses: crate::place::SynapseTables,
    tables: RoutingTables,
    runtimes: Vec<CoreRuntime>,
    layers: Vec<LayerPlan>,
    options: SimOptions,
    digest: String,
    pool: Option<rayon::ThreadPool>,

    // Dynamic state.
    t: u64,
    cores: Vec<CoreState>,
    links: LinkArray,
    ledger: EnergyLedger,
    last_emitted: HashSet<u32>,

    // Optional recordings.
    series: Vec<SeriesPoint>,
    raster: Vec<(u64, u32)>,
    raster_truncated: bool,
    core_trace: Vec<CoreTracePoint>,
    core_trace_truncated: bool,
    mac_trace: Vec<MacTracePoint>,
    mac_trace_truncated: bool,
}

impl Simulation {
    pub fn new(sys: &SystemConfig, net: &NetworkDesc, options: SimOptions) -> Result<Simulation> {
        let mut sys = sys.clone();
        if let Some(seed) = options.seed_override {
            sys.seed = seed;
        }
        if let Some(cap) = options.trace_cap {
            sys.trace_cap = cap;
        }
        let digest = config_digest(&sys, net);

        let Built {
            placement,
            keyspace,
            synapses,
        } = place_and_build(net, &sys)?;
        let geom = Geometry::of(&sys);
        let tables = build_routing_tables(
            &placement,
            &keyspace,
            &synapses,
            &geom,
            sys.fabric.table_capacity,
        )?;

        // Per-population statics.
        let state_fmt = sys.accel.formats.state;
        let dt = sys.timestep_secs();
        let pop_alpha: Vec<i32> = net
            .populations
            .iter()
            .map(|p| {
                let x = accel::exp_clamp(-dt / (p.neuron_params.tau_m_ms * 1e-3));
                accel::exp(Fixed::from_f64(x, state_fmt))
                    .expect("decay exponent is non-positive")
                    .raw()
            })
            .collect();
        let pop_threshold: Vec<i32> = net
            .populations
            .iter()
            .map(|p| Fixed::from_f64(p.neuron_params.v_threshold, state_fmt).raw())
            .collect();
        let pop_reset: Vec<i32> = net
            .populations
            .iter()
            .map(|p| Fixed::from_f64(p.neuron_params.v_reset, state_fmt).raw())
            .collect();
        let pop_init: Vec<i32> = net
            .populations
            .iter()
            .map(|p| Fixed::from_f64(p.neuron_params.v_rest, state_fmt).raw())
            .collect();
        let mut pop_rate = vec![0.0f64; net.populations.len()];
        for stim in &net.stimuli {
            let idx = net
                .population_index(&stim.target)
                .expect("validated stimulus target");
            pop_rate[idx] += stim.rate_hz;
        }
        let pop_stim_threshold: Vec<u64> = pop_rate
            .iter()
            .map(|&rate| engine::stimulus_threshold(rate, dt))
            .collect();

        // Core runtimes in placement order.
        let mut runtimes: Vec<CoreRuntime> = placement
            .cores
            .iter()
            .map(|plan| {
                let (chip, core) = geom.split_core(plan.core_linear);
                let (chip_x, chip_y) = geom.chip_coords(chip);
                let neurons = plan
                    .neurons
                    .iter()
                    .enumerate()
                    .map(|(local, &(pop, _))| NeuronConfig {
                        alpha_raw: pop_alpha[pop as usize],
                        threshold_raw: pop_threshold[pop as usize],
                        reset_raw: pop_reset[pop as usize],
                        init_raw: pop_init[pop as usize],
                        stim_threshold: pop_stim_threshold[pop as usize],
                        key: keyspace.encode(KeyFields {
                            chip_x,
                            chip_y,
                            core,
                            neuron: local as u32,
                        }),
                    })
                    .collect();
                CoreRuntime {
                    core_linear: plan.core_linear,
                    neurons,
                    layers: Vec::new(),
                }
            })
            .collect();

        // Dense layers.
        let mut layers = Vec::with_capacity(net.dense_layers.len());
        for (layer_idx, layer) in net.dense_layers.iter().enumerate() {
            let host_core = placement.layer_cores[layer_idx];
            let host_slot = placement
                .core_slot(host_core)
                .expect("layer hosts are active cores");
            runtimes[host_slot].layers.push(layer_idx);
            let feed = match (&layer.input.pop, &layer.input.constant) {
                (Some(pop), None) => {
                    let pop_idx = net.population_index(pop).expect("validated layer input");
                    let keys = (0..net.populations[pop_idx].size)
                        .map(|i| {
                            let (core_linear, local) = placement
                                .locate(pop_idx, i)
                                .expect("placed layer input neuron");
                            let (chip, core) = geom.split_core(core_linear);
                            let (chip_x, chip_y) = geom.chip_coords(chip);
                            keyspace.encode(KeyFields {
                                chip_x,
                                chip_y,
                                core,
                                neuron: local,
                            })
                        })
                        .collect();
                    LayerFeed::Pop(keys)
                }
                (None, Some(constant)) => LayerFeed::Constant(constant.clone()),
                _ => unreachable!("validated layer input"),
            };
            let inject = layer.inject.as_ref().map(|hook| {
                let pop_idx = net
                    .population_index(&hook.target)
                    .expect("validated inject target");
                let targets = (0..net.populations[pop_idx].size)
                    .map(|i| {
                        let (core_linear, local) =
                            placement.locate(pop_idx, i).expect("placed inject target");
                        let slot = placement.core_slot(core_linear).expect("active core");
                        (slot, local)
                    })
                    .collect();
                InjectPlan {
                    targets,
                    shift: hook.scale_shift,
                }
            });
            layers.push(LayerPlan {
                weights: layer.weights.clone(),
                feed,
                inject,
                name: layer.name.clone(),
            });
        }

        let cores: Vec<CoreState> = runtimes
            .iter()
            .map(|rt| CoreState::new(rt, streams::stimulus(sys.seed, rt.core_linear)))
            .collect();
        let links = LinkArray::new(&geom);
        let ledger = EnergyLedger::new(cores.len(), links.states.len(), layers.len());

        let pool = if options.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(options.workers)
                    .build()
                    .map_err(|e| Error::Internal(format!("thread pool: {e}")))?,
            )
        } else {
            None
        };

        Ok(Simulation {
            sys,
            geom,
            keyspace,
            placement,
            synapses,
            tables,
            runtimes,
            layers,
            options,
            digest,
            pool,
            t: 0,
            cores,
            links,
            ledger,
            last_emitted: HashSet::new(),
            series: Vec::new(),
            raster: Vec::new(),
            raster_truncated: false,
            core_trace: Vec::new(),
            core_trace_truncated: false,
            mac_trace: Vec::new(),
            mac_trace_truncated: false,
        })
    }

    pub fn timestep(&self) -> u64 {
        self.t
    }

    pub fn ledger(&self) -> &EnergyLedger {
        &self.ledger
    }

    pub fn counters(&self) -> &Counters {
        &self.ledger.counters
    }

    pub fn series(&self) -> &[SeriesPoint] {
        &self.series
    }

    pub fn raster(&self) -> &[(u64, u32)] {
        &self.raster
    }

    pub fn core_trace(&self) -> &[CoreTracePoint] {
        &self.core_trace
    }

    pub fn mac_trace(&self) -> &[MacTracePoint] {
        &self.mac_trace
    }

    pub fn digest(&self) -> &str {
        &self.digest
    }

    pub fn keyspace(&self) -> &KeySpace {
        &self.keyspace
    }

    pub fn placement(&self) -> &Placement {
        &self.placement
    }

    pub fn synapses(&self) -> &crate::place::SynapseTables {
        &self.synapses
    }

    pub fn routing_tables(&self) -> &RoutingTables {
        &self.tables
    }

    pub fn perf_level_count(&self) -> usize {
        self.sys.perf_levels.len()
    }

    /// Run `n` timesteps.
    pub fn run(&mut self, n: u64) {
        for _ in 0..n {
            self.advance_timestep();
        }
    }

    /// One millisecond: phase A over all cores, then the exchange barrier.
    pub fn advance_timestep(&mut self) {
        let t = self.t;
        let params = StepParams {
            levels: &self.sys.perf_levels,
            cost: &self.sys.cost,
            energy: &self.sys.energy,
            timestep_us: self.sys.timestep_us,
            timestep_s: self.sys.timestep_secs(),
            abb_enabled: self.sys.abb_enabled,
            accel_enabled: self.sys.accel.exp_unit,
            state_fmt: self.sys.accel.formats.state,
            weight_fmt: self.sys.accel.formats.weight,
        };

        // Layer input vectors come from the previous timestep's spikes.
        let layer_inputs: Vec<Vec<i8>> = self
            .layers
            .iter()
            .map(|layer| match &layer.feed {
                LayerFeed::Constant(v) => v.clone(),
                LayerFeed::Pop(keys) => keys
                    .iter()
                    .map(|k| self.last_emitted.contains(k) as i8)
                    .collect(),
            })
            .collect();

        struct PhaseA {
            outcome: TimestepOutcome,
            mac: Vec<(usize, Vec<i32>, u64, f64)>,
        }
        let runtimes = &self.runtimes;
        let layers = &self.layers;
        let sys = &self.sys;
        let run_one = |(rt, st): (&CoreRuntime, &mut CoreState)| -> PhaseA {
            let outcome = engine::step_core(rt, st, &params);
            let mut mac = Vec::new();
            for &layer_idx in &rt.layers {
                let layer = &layers[layer_idx];
                let (output, cycles, energy_j) = engine::mac_offload(
                    &layer.weights,
                    &layer_inputs[layer_idx],
                    &sys.accel.mac,
                    &sys.perf_levels[outcome.level_idx],
                    &sys.energy,
                )
                .expect("layer dimensions validated at build");
                mac.push((layer_idx, output, cycles, energy_j));
            }
            PhaseA { outcome, mac }
        };

        let outs: Vec<PhaseA> = match &self.pool {
            Some(pool) => pool.install(|| {
                runtimes
                    .par_iter()
                    .zip(self.cores.par_iter_mut())
                    .map(run_one)
                    .collect()
            }),
            None => runtimes
                .iter()
                .zip(self.cores.iter_mut())
                .map(run_one)
                .collect(),
        };

        // Merge phase-A results in core order.
        let mut packets: Vec<SpikePacket> = Vec::new();
        let mut step_spikes = 0u64;
        let mut step_misses = 0u64;
        let mut step_dynamic = EnergyAmount::ZERO;
        let mut step_leakage = EnergyAmount::ZERO;
        let mut step_mac = EnergyAmount::ZERO;
        let mut injections: Vec<(usize, u32, i64)> = Vec::new();
        self.last_emitted.clear();
        for (slot, phase) in outs.iter().enumerate() {
            let o = &phase.outcome;
            let dynamic = EnergyAmount::from_joules(o.dynamic_j);
            let leakage = EnergyAmount::from_joules(o.leakage_j);
            self.ledger.core_dynamic[slot] += dynamic;
            self.ledger.core_leakage[slot] += leakage;
            self.ledger.core_spikes[slot] += o.emitted.len() as u64;
            self.ledger.core_misses[slot] += o.miss as u64;
            step_dynamic += dynamic;
            step_leakage += leakage;
            step_spikes += o.emitted.len() as u64;
            step_misses += o.miss as u64;
            let c = &mut self.ledger.counters;
            c.spikes_emitted += o.emitted.len() as u64;
            c.synaptic_events += o.synaptic_events;
            c.stimulus_events += o.stimulus_events;
            c.deadline_misses += o.miss as u64;
            c.fixed_point_saturations += o.saturations;
            for &key in &o.emitted {
                packets.push(SpikePacket {
                    key,
                    emit_timestep: t,
                });
                self.last_emitted.insert(key);
                if self.options.record_raster {
                    if self.raster.len() < self.sys.trace_cap {
                        self.raster.push((t, key));
                    } else {
                        self.raster_truncated = true;
                    }
                }
            }
            if self.options.record_core_trace {
                if self.core_trace.len() < self.sys.trace_cap {
                    self.core_trace.push(CoreTracePoint {
                        t,
                        core_linear: self.runtimes[slot].core_linear,
                        estimated_cycles: o.estimated_cycles,
                        actual_cycles: o.actual_cycles,
                        level_idx: o.level_idx,
                        miss: o.miss,
                    });
                } else {
                    self.core_trace_truncated = true;
                }
            }
            for (layer_idx, output, cycles, energy_j) in &phase.mac {
                let amount = EnergyAmount::from_joules(*energy_j);
                self.ledger.mac[*layer_idx] += amount;
                step_mac += amount;
                if self.options.record_mac_outputs {
                    if self.mac_trace.len() < self.sys.trace_cap {
                        self.mac_trace.push(MacTracePoint {
                            t,
                            layer: self.layers[*layer_idx].name.clone(),
                            output: output.clone(),
                            cycles: *cycles,
                        });
                    } else {
                        self.mac_trace_truncated = true;
                    }
                }
                if let Some(inject) = &self.layers[*layer_idx].inject {
                    for (i, &(slot, local)) in inject.targets.iter().enumerate() {
                        injections.push((slot, local, (output[i] >> inject.shift) as i64));
                    }
                }
            }
        }

        // Phase B: the exchange barrier.
        let result = exchange_phase(
            &mut packets,
            &self.tables,
            &self.keyspace,
            &self.geom,
            &self.placement,
            &self.synapses,
            self.sys.fabric.packet_bits,
            &mut self.links,
        );
        debug_assert_eq!(
            result.delivered_packets + result.dropped_packets,
            packets.len() as u64
        );
        let mut step_link = EnergyAmount::ZERO;
        for (idx, link) in self.links.states.iter_mut().enumerate() {
            if link.bits_this_step > 0 {
                let amount = EnergyAmount::from_joules(link.phase_energy(&self.sys.energy));
                self.ledger.link[idx] += amount;
                step_link += amount;
            }
            link.end_phase();
        }
        {
            let c = &mut self.ledger.counters;
            c.packets_delivered += result.delivered_packets;
            c.packets_dropped += result.dropped_packets;
            c.core_deliveries += result.core_deliveries;
            c.link_hops += result.hops;
            c.link_wakes += result.wakes;
        }
        for (slot, inbox) in result.inboxes.into_iter().enumerate() {
            self.cores[slot].inbox = inbox;
        }
        for (slot, local, delta) in injections {
            self.cores[slot].injected.push((local, delta));
        }

        if self.options.record_series {
            self.series.push(SeriesPoint {
                t,
                spikes: step_spikes,
                dynamic: step_dynamic,
                leakage: step_leakage,
                link: step_link,
                mac: step_mac,
                misses: step_misses,
            });
        }
        self.t += 1;
    }

    /// Assemble the run report.
    pub fn report(&self) -> SimReport {
        let per_core = self
            .placement
            .cores
            .iter()
            .enumerate()
            .map(|(slot, plan)| {
                let (chip, core) = self.geom.split_core(plan.core_linear);
                let (chip_x, chip_y) = self.geom.chip_coords(chip);
                CoreRow {
                    chip: (chip_x, chip_y),
                    core,
                    neurons: plan.neurons.len() as u32,
                    spikes: self.ledger.core_spikes[slot],
                    misses: self.ledger.core_misses[slot],
                    dynamic: self.ledger.core_dynamic[slot],
                    leakage: self.ledger.core_leakage[slot],
                }
            })
            .collect();
        SimReport {
            version: 1,
            config_digest: self.digest.clone(),
            timesteps: self.t,
            totals: ReportTotals {
                core_dynamic: EnergyBreakdown::of(self.ledger.total_core_dynamic()),
                core_leakage: EnergyBreakdown::of(self.ledger.total_core_leakage()),
                link: EnergyBreakdown::of(self.ledger.total_link()),
                mac: EnergyBreakdown::of(self.ledger.total_mac()),
                total: EnergyBreakdown::of(self.ledger.total()),
                counters: self.ledger.counters,
            },
            per_core,
            series: if self.options.record_series {
                Some(self.series.clone())
            } else {
                None
            },
            raster: if self.options.record_raster {
                Some(self.raster.iter().map(|&(t, k)| (t, k)).collect())
            } else {
                None
            },
            raster_truncated: self.raster_truncated,
            mac_outputs: if self.options.record_mac_outputs {
                Some(self.mac_trace.clone())
            } else {
                None
            },
        }
    }

    /// Snapshot the dynamic state for bit-exact resume.
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            config_digest: self.digest.clone(),
            t: self.t,
            cores: self
                .cores
                .iter()
                .zip(&self.runtimes)
                .map(|(st, rt)| CoreCheckpoint {
                    core_linear: rt.core_linear,
                    v: st.v.clone(),
                    rng_state: st.rng.state(),
                    level_idx: st.level_idx as u32,
                    deadline_miss_count: st.deadline_miss_count,
                    saturations: st.saturations,
                    inbox: st
                        .inbox
                        .iter()
                        .map(|e| (e.source_key, e.target, e.weight_raw))
                        .collect(),
                    injected: st.injected.clone(),
                })
                .collect(),
            links: self.links.clone(),
            ledger: self.ledger.clone(),
            last_emitted: {
                let mut v: Vec<u32> = self.last_emitted.iter().copied().collect();
                v.sort_unstable();
                v
            },
        }
    }

    /// Rebuild a simulation from (sys, net) and restore checkpointed state.
    pub fn restore(
        sys: &SystemConfig,
        net: &NetworkDesc,
        options: SimOptions,
        ck: &Checkpoint,
    ) -> Result<Simulation> {
        let mut sim = Simulation::new(sys, net, options)?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::CheckpointMismatch(format!(
                "version {} (expected {CHECKPOINT_VERSION})",
                ck.version
            )));
        }
        if ck.config_digest != sim.digest {
            return Err(Error::CheckpointMismatch(format!(
                "config digest {} does not match inputs {}",
                ck.config_digest, sim.digest
            )));
        }
        if ck.cores.len() != sim.cores.len() || ck.links.states.len() != sim.links.states.len() {
            return Err(Error::CheckpointMismatch(
                "component counts do not match the built machine".into(),
            ));
        }
        sim.t = ck.t;
        for ((st, rt), cck) in sim.cores.iter_mut().zip(&sim.runtimes).zip(&ck.cores) {
            if cck.core_linear != rt.core_linear || cck.v.len() != st.v.len() {
                return Err(Error::CheckpointMismatch(format!(
                    "core {} layout does not match",
                    cck.core_linear
                )));
            }
            st.v = cck.v.clone();
            st.rng = RngStream::from_parts(cck.rng_state, streams::stimulus_id(rt.core_linear));
            st.level_idx = cck.level_idx as usize;
            st.deadline_miss_count = cck.deadline_miss_count;
            st.saturations = cck.saturations;
            st.inbox = cck
                .inbox
                .iter()
                .map(|&(source_key, target, weight_raw)| SynapticEvent {
                    source_key,
                    target,
                    weight_raw,
                })
                .collect();
            st.injected = cck.injected.clone();
        }
        sim.links = ck.links.clone();
        sim.ledger = ck.ledger.clone();
        sim.last_emitted = ck.last_emitted.iter().copied().collect();
        Ok(sim)
    }
}

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoreCheckpoint {
    pub core_linear: u64,
    pub v: Vec<i32>,
    pub rng_state: u64,
    pub level_idx: u32,
    pub deadline_miss_count: u64,
    pub saturations: u64,
    pub inbox: Vec<(u32, u32, i32)>,
    pub injected: Vec<(u32, i64)>,
}

/// Versioned snapshot of everything that changes during a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub config_digest: String,
    pub t: u64,
    pub cores: Vec<CoreCheckpoint>,
    pub links: LinkArray,
    pub ledger: EnergyLedger,
    pub last_emitted: Vec<u32>,
}

/// Stable digest of the effective inputs (after seed override).
pub fn config_digest(sys: &SystemConfig, net: &NetworkDesc) -> String {
    // The trace cap only bounds recordings, never the simulation itself, so
    // it is normalized out: a checkpoint stays restorable under any cap.
    let mut sys = sys.clone();
    sys.trace_cap = 0;
    let sys_json = serde_json::to_string(&sys).expect("config serializes");
    let net_json = serde_json::to_string(net).expect("network serializes");
    let mut bytes = Vec::with_capacity(sys_json.len() + net_json.len() + 1);
    bytes.extend_from_slice(sys_json.as_bytes());
    bytes.push(0);
    bytes.extend_from_slice(net_json.as_bytes());
    format!("{:016x}", fnv1a64(&bytes))
}

/// Build, run `n_timesteps`, and report.
pub fn run_simulation(
    sys: &SystemConfig,
    net: &NetworkDesc,
    n_timesteps: u64,
    options: SimOptions,
) -> Result<SimReport> {
    let mut sim = Simulation::new(sys, net, options)?;
    sim.run(n_timesteps);
    Ok(sim.report())
}

/// Analytic workload for capacity comparisons.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReferenceWorkload {
    pub synaptic_events: u64,
    pub neurons: u64,
}

impl Default for ReferenceWorkload {
    fn default() -> Self {
        ReferenceWorkload {
            synaptic_events: 1000,
            neurons: 100,
        }
    }
}

/// Capacity comparison of two machine configs; pure arithmetic, no
/// simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacityReport {
    pub cores_a: u64,
    pub cores_b: u64,
    pub core_ratio: f64,
    pub max_mhz_a: f64,
    pub max_mhz_b: f64,
    pub frequency_ratio: f64,
    pub syn_cycles_a: u64,
    pub syn_cycles_b: u64,
    pub syn_cycle_ratio: f64,
    pub per_core_throughput_ratio: f64,
    pub capacity_ratio: f64,
    pub workload: ReferenceWorkload,
    pub workload_cycles_a: u64,
    pub workload_cycles_b: u64,
}

/// Core-count ratio times per-core throughput ratio, where throughput is
/// max frequency times the per-synaptic-event cycle discount under each
/// config's accelerator setting.
pub fn capacity_ratio(
    sys_a: &SystemConfig,
    sys_b: &SystemConfig,
    workload: ReferenceWorkload,
) -> CapacityReport {
    let syn_cycles = |sys: &SystemConfig| {
        if sys.accel.exp_unit {
            sys.cost.c_syn_acc
        } else {
            sys.cost.c_syn_sw
        }
    };
    let max_mhz = |sys: &SystemConfig| {
        sys.perf_levels
            .last()
            .map(|l| l.mhz)
            .expect("validated non-empty perf_levels")
    };
    let cores_a = sys_a.n_cores();
    let cores_b = sys_b.n_cores();
    let core_ratio = cores_b as f64 / cores_a as f64;
    let (mhz_a, mhz_b) = (max_mhz(sys_a), max_mhz(sys_b));
    let frequency_ratio = mhz_b / mhz_a;
    let (syn_a, syn_b) = (syn_cycles(sys_a), syn_cycles(sys_b));
    let syn_cycle_ratio = syn_a as f64 / syn_b as f64;
    let per_core_throughput_ratio = frequency_ratio * syn_cycle_ratio;
    CapacityReport {
        cores_a,
        cores_b,
        core_ratio,
        max_mhz_a: mhz_a,
        max_mhz_b: mhz_b,
        frequency_ratio,
        syn_cycles_a: syn_a,
        syn_cycles_b: syn_b,
        syn_cycle_ratio,
        per_core_throughput_ratio,
        capacity_ratio: core_ratio * per_core_throughput_ratio,
        workload,
        workload_cycles_a: engine::estimate_cycles(
            workload.synaptic_events,
            workload.neurons,
            &sys_a.cost,
            sys_a.accel.exp_unit,
        ),
        workload_cycles_b: engine::estimate_cycles(
            workload.synaptic_events,
            workload.neurons,
            &sys_b.cost,
            sys_b.accel.exp_unit,
        ),
    }
}
