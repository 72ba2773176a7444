//! Placement of neurons onto cores, multicast key assignment, and
//! expansion of projections into per-core synapse tables.
//!
//! Everything here is a pure function of (network, system config): greedy
//! row-major placement, and probabilistic connectivity expanded from the
//! global seed through a dedicated stream per projection.

use std::collections::BTreeMap;

use crate::config::{KeyLayout, SystemConfig};
use crate::error::{Error, Result};
use crate::fixed::Fixed;
use crate::network::NetworkDesc;

/// Machine addressing: chips in row-major order, cores within chips.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Geometry {
    pub width: u32,
    pub height: u32,
    pub cores_per_chip: u32,
}

impl Geometry {
    pub fn of(sys: &SystemConfig) -> Geometry {
        Geometry {
            width: sys.mesh.width,
            height: sys.mesh.height,
            cores_per_chip: sys.cores_per_chip,
        }
    }

    pub fn n_chips(&self) -> u64 {
        self.width as u64 * self.height as u64
    }

    pub fn n_cores(&self) -> u64 {
        self.n_chips() * self.cores_per_chip as u64
    }

    pub fn chip_linear(&self, x: u32, y: u32) -> u64 {
        y as u64 * self.width as u64 + x as u64
    }

    pub fn chip_coords(&self, chip_linear: u64) -> (u32, u32) {
        (
            (chip_linear % self.width as u64) as u32,
            (chip_linear / self.width as u64) as u32,
        )
    }

    pub fn core_linear(&self, chip_linear: u64, core: u32) -> u64 {
        chip_linear * self.cores_per_chip as u64 + core as u64
    }

    pub fn split_core(&self, core_linear: u64) -> (u64, u32) {
        (
            core_linear / self.cores_per_chip as u64,
            (core_linear % self.cores_per_chip as u64) as u32,
        )
    }
}

/// Decoded multicast key fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyFields {
    pub chip_x: u32,
    pub chip_y: u32,
    pub core: u32,
    pub neuron: u32,
}

/// Bijection between placed neurons and 32-bit multicast keys.
#[derive(Debug, Clone, Copy)]
pub struct KeySpace {
    layout: KeyLayout,
}

impl KeySpace {
    pub fn new(layout: KeyLayout) -> KeySpace {
        KeySpace { layout }
    }

    pub fn layout(&self) -> KeyLayout {
        self.layout
    }

    pub fn encode(&self, f: KeyFields) -> u32 {
        let l = self.layout;
        let mut key = f.chip_x;
        key = (key << l.chip_y) | f.chip_y;
        key = (key << l.core) | f.core;
        (key << l.neuron) | f.neuron
    }

    pub fn decode(&self, key: u32) -> KeyFields {
        let l = self.layout;
        let neuron = key & Self::low_mask(l.neuron);
        let rest = key >> l.neuron;
        let core = rest & Self::low_mask(l.core);
        let rest = rest >> l.core;
        let chip_y = rest & Self::low_mask(l.chip_y);
        let chip_x = rest >> l.chip_y;
        KeyFields {
            chip_x,
            chip_y,
            core,
            neuron,
        }
    }

    /// Mask selecting everything but the neuron-index bits; a key ANDed with
    /// this identifies the source core.
    pub fn core_prefix_mask(&self) -> u32 {
        !Self::low_mask(self.layout.neuron)
    }

    fn low_mask(bits: u8) -> u32 {
        if bits >= 32 {
            u32::MAX
        } else {
            (1u32 << bits) - 1
        }
    }
}

/// A contiguous run of one population's neurons on one core.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlacementSegment {
    /// First population-local neuron index in this run.
    pub first: u32,
    pub count: u32,
    pub core_linear: u64,
    /// Core-local index of `first`.
    pub local_start: u32,
}

/// One simulated core's share of the network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorePlan {
    pub core_linear: u64,
    /// (population index, index within population), in core-local order.
    pub neurons: Vec<(u32, u32)>,
}

/// Where every neuron and dense layer lives.
#[derive(Debug, Clone)]
pub struct Placement {
    /// Active cores, ascending by `core_linear`.
    pub cores: Vec<CorePlan>,
    /// Per population: its segments in placement order.
    pub segments: Vec<Vec<PlacementSegment>>,
    /// Per dense layer: host core.
    pub layer_cores: Vec<u64>,
}

impl Placement {
    /// Index into `cores` for a given core_linear id.
    pub fn core_slot(&self, core_linear: u64) -> Option<usize> {
        self.cores
            .binary_search_by_key(&core_linear, |c| c.core_linear)
            .ok()
    }

    /// (core_linear, core-local index) of a population neuron.
    pub fn locate(&self, pop: usize, idx: u32) -> Option<(u64, u32)> {
        let segs = self.segments.get(pop)?;
        let at = segs.partition_point(|s| s.first + s.count <= idx);
        let seg = segs.get(at)?;
        if idx < seg.first {
            return None;
        }
        Some((seg.core_linear, seg.local_start + (idx - seg.first)))
    }
}

/// Per-core synapse tables: source key to (core-local target, weight raw).
#[derive(Debug, Clone, Default)]
pub struct SynapseTables {
    /// Indexed like `Placement::cores`.
    pub per_core: Vec<BTreeMap<u32, Vec<(u32, i32)>>>,
}

impl SynapseTables {
    pub fn total_entries(&self) -> u64 {
        self.per_core
            .iter()
            .flat_map(|t| t.values())
            .map(|v| v.len() as u64)
            .sum()
    }
}

/// Everything `place_and_build` produces.
#[derive(Debug)]
pub struct Built {
    pub placement: Placement,
    pub keyspace: KeySpace,
    pub synapses: SynapseTables,
}

/// Stream-id policy: projections and per-core stimulus draws get disjoint
/// id spaces under the one global seed.
pub mod streams {
    use crate::accel::RngStream;

    const PROJECTION_TAG: u64 = 1 << 56;
    const STIMULUS_TAG: u64 = 2 << 56;

    pub fn projection_id(projection_idx: usize) -> u64 {
        PROJECTION_TAG | projection_idx as u64
    }

    pub fn stimulus_id(core_linear: u64) -> u64 {
        STIMULUS_TAG | core_linear
    }

    pub fn projection(seed: u64, projection_idx: usize) -> RngStream {
        RngStream::new(seed, projection_id(projection_idx))
    }

    pub fn stimulus(seed: u64, core_linear: u64) -> RngStream {
        RngStream::new(seed, stimulus_id(core_linear))
    }
}

/// Place the network onto the machine and expand its connectivity.
///
/// Placement is greedy: cores fill to `max_neurons_per_core` in row-major
/// chip order, populations split wherever a core fills up. Probabilistic
/// projections draw from a per-projection stream seeded by the global seed,
/// so the result depends only on (net, sys).
pub fn place_and_build(net: &NetworkDesc, sys: &SystemConfig) -> Result<Built> {
    sys.validate()?;
    net.validate()?;
    let geom = Geometry::of(sys);
    let keyspace = KeySpace::new(sys.fabric.key_bits);
    let capacity = sys.neuron_capacity();
    let per_core_cap = sys.max_neurons_per_core;

    // Greedy sequential fill.
    let mut cores: Vec<CorePlan> = Vec::new();
    let mut segments: Vec<Vec<PlacementSegment>> = Vec::new();
    let mut cursor_core: u64 = 0;
    let mut used_in_core: u32 = 0;
    let mut placed_total: u64 = 0;
    for (pop_idx, pop) in net.populations.iter().enumerate() {
        if placed_total + pop.size as u64 > capacity {
            return Err(Error::CapacityExceeded {
                population: pop.name.clone(),
                needed: placed_total + pop.size as u64 - capacity,
                capacity,
            });
        }
        let mut segs = Vec::new();
        let mut remaining = pop.size;
        let mut next_idx: u32 = 0;
        while remaining > 0 {
            if used_in_core == per_core_cap {
                cursor_core += 1;
                used_in_core = 0;
            }
            let take = remaining.min(per_core_cap - used_in_core);
            if cores.last().map(|c| c.core_linear) != Some(cursor_core) {
                cores.push(CorePlan {
                    core_linear: cursor_core,
                    neurons: Vec::new(),
                });
            }
            let plan = cores.last_mut().expect("just pushed");
            segs.push(PlacementSegment {
                first: next_idx,
                count: take,
                core_linear: cursor_core,
                local_start: used_in_core,
            });
            for i in 0..take {
                plan.neurons.push((pop_idx as u32, next_idx + i));
            }
            used_in_core += take;
            next_idx += take;
            remaining -= take;
            placed_total += take as u64;
        }
        segments.push(segs);
    }

    // Dense layers may land on cores that hold no neurons; those cores are
    // still simulated (they run the MAC and leak).
    let mut layer_cores = Vec::with_capacity(net.dense_layers.len());
    for layer in &net.dense_layers {
        let (cx, cy) = layer.core.chip;
        if cx >= geom.width || cy >= geom.height || layer.core.core >= geom.cores_per_chip {
            return Err(Error::Validation(format!(
                "layer \"{}\": core ({cx},{cy})/{} outside the machine",
                layer.name, layer.core.core
            )));
        }
        let linear = geom.core_linear(geom.chip_linear(cx, cy), layer.core.core);
        layer_cores.push(linear);
        if cores
            .binary_search_by_key(&linear, |c| c.core_linear)
            .is_err()
        {
            let at = cores.partition_point(|c| c.core_linear < linear);
            cores.insert(
                at,
                CorePlan {
                    core_linear: linear,
                    neurons: Vec::new(),
                },
            );
        }
    }

    let placement = Placement {
        cores,
        segments,
        layer_cores,
    };

    // Expand projections into per-core synapse tables.
    let weight_fmt = sys.accel.formats.weight;
    let mut per_core: Vec<BTreeMap<u32, Vec<(u32, i32)>>> =
        vec![BTreeMap::new(); placement.cores.len()];
    for (proj_idx, proj) in net.projections.iter().enumerate() {
        let src = net
            .population_index(&proj.source)
            .expect("validated projection source");
        let tgt = net
            .population_index(&proj.target)
            .expect("validated projection target");
        let weight_raw = Fixed::from_f64(proj.weight, weight_fmt).raw();
        let push = |s: u32, t: u32, tables: &mut [BTreeMap<u32, Vec<(u32, i32)>>]| {
            let (src_core, src_local) = placement.locate(src, s).expect("placed source");
            let (tgt_core, tgt_local) = placement.locate(tgt, t).expect("placed target");
            let (chip, core) = geom.split_core(src_core);
            let (chip_x, chip_y) = geom.chip_coords(chip);
            let key = keyspace.encode(KeyFields {
                chip_x,
                chip_y,
                core,
                neuron: src_local,
            });
            let slot = placement.core_slot(tgt_core).expect("active target core");
            tables[slot]
                .entry(key)
                .or_default()
                .push((tgt_local, weight_raw));
        };
        match (&proj.connectivity.pairs, proj.connectivity.p) {
            (Some(pairs), None) => {
                for &(s, t) in pairs {
                    push(s, t, &mut per_core);
                }
            }
            (None, Some(p)) => {
                let mut stream = streams::projection(sys.seed, proj_idx);
                let threshold = (p * 4294967296.0).round() as u64;
                let ns = net.populations[src].size;
                let nt = net.populations[tgt].size;
                for s in 0..ns {
                    for t in 0..nt {
                        if stream.bernoulli(threshold) {
                            push(s, t, &mut per_core);
                        }
                    }
                }
            }
            _ => unreachable!("validated connectivity"),
        }
    }
    for table in &mut per_core {
        for targets in table.values_mut() {
            targets.sort_unstable();
        }
    }

    Ok(Built {
        placement,
        keyspace,
        synapses: SynapseTables { per_core },
    })
}
