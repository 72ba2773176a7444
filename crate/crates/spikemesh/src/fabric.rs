//! Multicast spike transport over the 2D chip mesh.
//!
//! Per-chip key/mask tables route packets along dimension-ordered (X then Y)
//! trees built from the synapse tables. Delivery is barrier-synchronous:
//! everything emitted at t lands in target inboxes before t+1 starts. Links
//! power up on first traffic in a timestep and back down at the barrier, so
//! idle links cost nothing.

use serde::{Deserialize, Serialize};

use crate::config::EnergyCoefficients;
use crate::engine::SynapticEvent;
use crate::error::{Error, Result};
use crate::place::{Geometry, KeySpace, Placement, SynapseTables};

/// Mesh link directions. Four are wired; Up and Down are reserved route
/// bits for richer topologies and never populated by the table builder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    East = 0,
    North = 1,
    West = 2,
    South = 3,
    Up = 4,
    Down = 5,
}

impl Direction {
    pub const WIRED: [Direction; 4] = [
        Direction::East,
        Direction::North,
        Direction::West,
        Direction::South,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Direction::East => "E",
            Direction::North => "N",
            Direction::West => "W",
            Direction::South => "S",
            Direction::Up => "U",
            Direction::Down => "D",
        }
    }
}

/// Route bitset: up to six link directions plus local core ids.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct RouteSet {
    pub dirs: u8,
    pub cores: u64,
}

impl RouteSet {
    pub fn is_empty(&self) -> bool {
        self.dirs == 0 && self.cores == 0
    }

    pub fn add_dir(&mut self, d: Direction) {
        self.dirs |= 1 << d as u8;
    }

    pub fn has_dir(&self, d: Direction) -> bool {
        self.dirs & (1 << d as u8) != 0
    }

    pub fn add_core(&mut self, core: u32) {
        debug_assert!(core < 64);
        self.cores |= 1 << core;
    }

    pub fn core_ids(&self) -> impl Iterator<Item = u32> + '_ {
        (0..64).filter(|&c| self.cores & (1 << c) != 0)
    }
}

/// One ternary match rule: a packet matches when `key & mask == key`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoutingEntry {
    pub key: u32,
    pub mask: u32,
    pub route: RouteSet,
}

impl RoutingEntry {
    pub fn matches(&self, key: u32) -> bool {
        key & self.mask == self.key
    }
}

/// Ordered entries of one chip; the first match fires.
///
/// Lookups go through a mask-grouped index: one hash probe per distinct
/// mask, taking the earliest-position hit. That is exactly linear-scan
/// first-match semantics, without the linear scan.
#[derive(Debug, Clone, Default)]
pub struct RoutingTable {
    entries: Vec<RoutingEntry>,
    by_mask: Vec<(u32, std::collections::HashMap<u32, usize>)>,
}

impl RoutingTable {
    pub fn from_entries(entries: Vec<RoutingEntry>) -> RoutingTable {
        let mut by_mask: Vec<(u32, std::collections::HashMap<u32, usize>)> = Vec::new();
        for (idx, entry) in entries.iter().enumerate() {
            debug_assert_eq!(entry.key & !entry.mask, 0, "key bits outside mask");
            debug_assert!(!entry.route.is_empty(), "route must be nonempty");
            let bucket = match by_mask.iter_mut().find(|(m, _)| *m == entry.mask) {
                Some((_, map)) => map,
                None => {
                    by_mask.push((entry.mask, std::collections::HashMap::new()));
                    &mut by_mask.last_mut().expect("just pushed").1
                }
            };
            // First occurrence wins, matching scan order.
            bucket.entry(entry.key).or_insert(idx);
        }
        RoutingTable { entries, by_mask }
    }

    pub fn entries(&self) -> &[RoutingEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, key: u32) -> Option<&RoutingEntry> {
        let mut best: Option<usize> = None;
        for (mask, map) in &self.by_mask {
            if let Some(&idx) = map.get(&(key & mask)) {
                if best.is_none_or(|b| idx < b) {
                    best = Some(idx);
                }
            }
        }
        best.map(|idx| &self.entries[idx])
    }
}

/// All per-chip tables, indexed by chip linear id.
#[derive(Debug, Clone)]
pub struct RoutingTables {
    pub per_chip: Vec<RoutingTable>,
}

impl RoutingTables {
    pub fn total_entries(&self) -> usize {
        self.per_chip.iter().map(|t| t.len()).sum()
    }
}

/// A spike on the wire: multicast key plus emission timestep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpikePacket {
    pub key: u32,
    pub emit_timestep: u64,
}

fn neighbor(geom: &Geometry, chip: u64, dir: Direction) -> Option<u64> {
    let (x, y) = geom.chip_coords(chip);
    match dir {
        Direction::East if x + 1 < geom.width => Some(geom.chip_linear(x + 1, y)),
        Direction::West if x > 0 => Some(geom.chip_linear(x - 1, y)),
        Direction::North if y + 1 < geom.height => Some(geom.chip_linear(x, y + 1)),
        Direction::South if y > 0 => Some(geom.chip_linear(x, y - 1)),
        _ => None,
    }
}

/// Dimension-ordered step: move along X to the target column, then along Y.
fn dimension_order_step(geom: &Geometry, from: u64, to: u64) -> Direction {
    let (fx, fy) = geom.chip_coords(from);
    let (tx, ty) = geom.chip_coords(to);
    if fx < tx {
        Direction::East
    } else if fx > tx {
        Direction::West
    } else if fy < ty {
        Direction::North
    } else {
        debug_assert!(fy > ty);
        Direction::South
    }
}

/// Multicast tree of one source neuron: route bits per chip it touches.
fn build_tree(
    geom: &Geometry,
    source_chip: u64,
    targets: &[u64],
) -> std::collections::BTreeMap<u64, RouteSet> {
    let mut tree: std::collections::BTreeMap<u64, RouteSet> = std::collections::BTreeMap::new();
    for &target_core in targets {
        let (target_chip, core_in_chip) = geom.split_core(target_core);
        let mut at = source_chip;
        while at != target_chip {
            let dir = dimension_order_step(geom, at, target_chip);
            tree.entry(at).or_default().add_dir(dir);
            at = neighbor(geom, at, dir).expect("dimension-ordered step stays on the mesh");
        }
        tree.entry(target_chip).or_default().add_core(core_in_chip);
    }
    tree
}

/// Build per-chip routing tables covering every source neuron's multicast
/// tree. When all neurons of a source core share one tree, their entries
/// merge into a single wildcard entry whose mask drops the neuron bits.
pub fn build_routing_tables(
    placement: &Placement,
    keyspace: &KeySpace,
    synapses: &SynapseTables,
    geom: &Geometry,
    table_capacity: usize,
) -> Result<RoutingTables> {
    // Target core sets per source key.
    let mut dests: std::collections::BTreeMap<u32, Vec<u64>> = std::collections::BTreeMap::new();
    for (slot, table) in synapses.per_core.iter().enumerate() {
        let core_linear = placement.cores[slot].core_linear;
        for &key in table.keys() {
            dests.entry(key).or_default().push(core_linear);
        }
    }
    for targets in dests.values_mut() {
        targets.sort_unstable();
    }

    let n_chips = geom.n_chips() as usize;
    let mut per_chip: Vec<Vec<RoutingEntry>> = vec![Vec::new(); n_chips];
    for plan in &placement.cores {
        if plan.neurons.is_empty() {
            continue;
        }
        let (chip, core) = geom.split_core(plan.core_linear);
        let (chip_x, chip_y) = geom.chip_coords(chip);
        let keys: Vec<u32> = (0..plan.neurons.len() as u32)
            .map(|neuron| {
                keyspace.encode(crate::place::KeyFields {
                    chip_x,
                    chip_y,
                    core,
                    neuron,
                })
            })
            .collect();
        let trees: Vec<_> = keys
            .iter()
            .map(|key| build_tree(geom, chip, dests.get(key).map(Vec::as_slice).unwrap_or(&[])))
            .collect();

        let mergeable = trees.windows(2).all(|w| w[0] == w[1]);
        if mergeable {
            let prefix_mask = keyspace.core_prefix_mask();
            for (&at, &route) in &trees[0] {
                per_chip[at as usize].push(RoutingEntry {
                    key: keys[0] & prefix_mask,
                    mask: prefix_mask,
                    route,
                });
            }
        } else {
            for (key, tree) in keys.iter().zip(&trees) {
                for (&at, &route) in tree {
                    per_chip[at as usize].push(RoutingEntry {
                        key: *key,
                        mask: u32::MAX,
                        route,
                    });
                }
            }
        }
    }

    for (chip, entries) in per_chip.iter().enumerate() {
        if entries.len() > table_capacity {
            let (x, y) = geom.chip_coords(chip as u64);
            return Err(Error::TableCapacityExceeded {
                chip_x: x as u16,
                chip_y: y as u16,
                entries: entries.len(),
                capacity: table_capacity,
            });
        }
    }
    Ok(RoutingTables {
        per_chip: per_chip
            .into_iter()
            .map(RoutingTable::from_entries)
            .collect(),
    })
}

/// Result of walking one packet through the tables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RouteOutcome {
    /// Destination cores (core linear ids), ascending.
    pub destinations: Vec<u64>,
    /// Directed links traversed: (chip linear, direction index 0..4).
    pub links: Vec<(u64, u8)>,
    /// Total link hops.
    pub hops: u64,
    /// True when the packet reached no core.
    pub dropped: bool,
}

/// Reusable walk buffers: the exchange loop routes millions of packets, so
/// visited flags use an epoch counter instead of reallocation.
struct RouteScratch {
    visited: Vec<u32>,
    epoch: u32,
    stack: Vec<u64>,
}

impl RouteScratch {
    fn new(n_chips: usize) -> RouteScratch {
        RouteScratch {
            visited: vec![0; n_chips],
            epoch: 0,
            stack: Vec::new(),
        }
    }
}

fn route_packet_into(
    packet: &SpikePacket,
    tables: &RoutingTables,
    keyspace: &KeySpace,
    geom: &Geometry,
    scratch: &mut RouteScratch,
    out: &mut RouteOutcome,
) {
    out.destinations.clear();
    out.links.clear();
    out.hops = 0;
    let fields = keyspace.decode(packet.key);
    scratch.epoch += 1;
    scratch.stack.clear();
    scratch
        .stack
        .push(geom.chip_linear(fields.chip_x, fields.chip_y));
    while let Some(chip) = scratch.stack.pop() {
        if std::mem::replace(&mut scratch.visited[chip as usize], scratch.epoch) == scratch.epoch {
            continue;
        }
        let Some(entry) = tables.per_chip[chip as usize].lookup(packet.key) else {
            continue;
        };
        for core in entry.route.core_ids() {
            out.destinations.push(geom.core_linear(chip, core));
        }
        for dir in Direction::WIRED {
            if entry.route.has_dir(dir) {
                if let Some(next) = neighbor(geom, chip, dir) {
                    out.links.push((chip, dir as u8));
                    out.hops += 1;
                    scratch.stack.push(next);
                }
            }
        }
    }
    out.destinations.sort_unstable();
    out.dropped = out.destinations.is_empty();
}

/// Walk a packet from its home chip. At each chip the first matching entry
/// fires and the packet is replicated along every route bit; a chip with no
/// match terminates that branch. A packet that reaches no core counts as
/// dropped.
pub fn route_packet(
    packet: &SpikePacket,
    tables: &RoutingTables,
    keyspace: &KeySpace,
    geom: &Geometry,
) -> RouteOutcome {
    let mut scratch = RouteScratch::new(geom.n_chips() as usize);
    let mut out = RouteOutcome::default();
    route_packet_into(packet, tables, keyspace, geom, &mut scratch, &mut out);
    out
}

/// One directed chip-to-chip link's per-timestep state.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkState {
    pub bits_this_step: u64,
    pub powered: bool,
    pub woke_this_step: bool,
    pub wake_count: u64,
    pub bits_total: u64,
}

impl LinkState {
    fn add_bits(&mut self, bits: u64) {
        if !self.powered {
            self.powered = true;
            self.woke_this_step = true;
            self.wake_count += 1;
        }
        self.bits_this_step += bits;
        self.bits_total += bits;
    }

    /// Energy accrued this timestep: proportional to bits, plus the wake.
    pub fn phase_energy(&self, energy: &EnergyCoefficients) -> f64 {
        link_energy(self.bits_this_step, self.woke_this_step as u64, energy)
    }

    /// Barrier: links power down at the end of every exchange.
    pub fn end_phase(&mut self) {
        self.bits_this_step = 0;
        self.woke_this_step = false;
        self.powered = false;
    }
}

/// `E = e_bit * bits + e_wake * wakes`; zero when idle.
pub fn link_energy(bits: u64, wakes: u64, energy: &EnergyCoefficients) -> f64 {
    bits as f64 * energy.e_bit + wakes as f64 * energy.e_wake
}

/// Per-link states for the whole mesh, indexed chip_linear * 4 + direction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkArray {
    pub states: Vec<LinkState>,
}

impl LinkArray {
    pub fn new(geom: &Geometry) -> LinkArray {
        LinkArray {
            states: vec![LinkState::default(); geom.n_chips() as usize * 4],
        }
    }

    pub fn index(chip: u64, dir: u8) -> usize {
        chip as usize * 4 + dir as usize
    }
}

/// What one exchange produced.
#[derive(Debug, Default)]
pub struct ExchangeResult {
    /// Inboxes for t+1, indexed like `Placement::cores`, sorted by
    /// (source key, target neuron).
    pub inboxes: Vec<Vec<SynapticEvent>>,
    pub delivered_packets: u64,
    pub dropped_packets: u64,
    pub core_deliveries: u64,
    pub synaptic_events: u64,
    pub hops: u64,
    pub wakes: u64,
}

/// Deliver every packet emitted at t into inboxes for t+1 and charge links.
/// Packets are processed in sorted key order, so the result is a pure
/// function of the packet multiset.
#[allow(clippy::too_many_arguments)]
pub fn exchange_phase(
    packets: &mut [SpikePacket],
    tables: &RoutingTables,
    keyspace: &KeySpace,
    geom: &Geometry,
    placement: &Placement,
    synapses: &SynapseTables,
    packet_bits: u64,
    links: &mut LinkArray,
) -> ExchangeResult {
    packets.sort_unstable_by_key(|p| p.key);
    let mut result = ExchangeResult {
        inboxes: vec![Vec::new(); placement.cores.len()],
        ..Default::default()
    };
    let mut scratch = RouteScratch::new(geom.n_chips() as usize);
    let mut outcome = RouteOutcome::default();
    for packet in packets.iter() {
        route_packet_into(packet, tables, keyspace, geom, &mut scratch, &mut outcome);
        for &(chip, dir) in &outcome.links {
            links.states[LinkArray::index(chip, dir)].add_bits(packet_bits);
        }
        result.hops += outcome.hops;
        if outcome.dropped {
            result.dropped_packets += 1;
            continue;
        }
        result.delivered_packets += 1;
        for &core in &outcome.destinations {
            result.core_deliveries += 1;
            let slot = placement
                .core_slot(core)
                .expect("routing tables only point at active cores");
            if let Some(targets) = synapses.per_core[slot].get(&packet.key) {
                for &(target, weight_raw) in targets {
                    result.inboxes[slot].push(SynapticEvent {
                        source_key: packet.key,
                        target,
                        weight_raw,
                    });
                    result.synaptic_events += 1;
                }
            }
        }
    }
    for inbox in &mut result.inboxes {
        inbox.sort_unstable();
    }
    result.wakes = links.states.iter().filter(|l| l.woke_this_step).count() as u64;
    result
}

/// Text dump of all tables, one line per entry:
/// `chip=(x,y) key=0x… mask=0x… route=[…]`.
pub fn dump_tables(tables: &RoutingTables, geom: &Geometry) -> String {
    let mut out = String::new();
    for (chip, table) in tables.per_chip.iter().enumerate() {
        let (x, y) = geom.chip_coords(chip as u64);
        for entry in table.entries() {
            let mut parts: Vec<String> = Direction::WIRED
                .iter()
                .chain([Direction::Up, Direction::Down].iter())
                .filter(|d| entry.route.has_dir(**d))
                .map(|d| d.label().to_string())
                .collect();
            parts.extend(entry.route.core_ids().map(|c| format!("c{c}")));
            out.push_str(&format!(
                "chip=({x},{y}) key={:#010x} mask={:#010x} route=[{}]\n",
                entry.key,
                entry.mask,
                parts.join(",")
            ));
        }
    }
    out
}
