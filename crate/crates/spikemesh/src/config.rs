//! Machine description: geometry, DVFS table, energy and cycle-cost
//! coefficients, accelerator parameters, and fabric sizing.
//!
//! Configs are UTF-8 JSON with unknown keys rejected; see `docs/formats.md`
//! for the schema. `mesh`, `cores_per_chip`, and `perf_levels` are required,
//! everything else has documented defaults.

use serde::{Deserialize, Serialize};

use crate::accel::MacArrayConfig;
use crate::error::{Error, Result};
use crate::fixed::FxFormat;

/// One DVFS operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerfLevel {
    pub mhz: f64,
    pub volts: f64,
}

impl PerfLevel {
    pub fn freq_hz(&self) -> f64 {
        self.mhz * 1e6
    }

    /// Cycle budget for one timestep at this level. MHz times microseconds
    /// is cycles, so integer-valued configs give exact budgets.
    pub fn cycle_budget(&self, timestep_us: f64) -> u64 {
        (self.mhz * timestep_us).floor() as u64
    }
}

/// Energy model coefficients, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyCoefficients {
    /// Core switching energy, joules per (cycle * volt^2).
    pub c_eff: f64,
    /// Core leakage, watts per volt.
    pub k_leak: f64,
    /// Leakage multiplier applied when body biasing is enabled.
    pub abb_leak_factor: f64,
    /// Link energy per transmitted bit, joules.
    pub e_bit: f64,
    /// Link power-up event energy, joules.
    pub e_wake: f64,
    /// MAC array switching energy, joules per (cycle * volt^2).
    pub c_eff_mac: f64,
}

impl Default for EnergyCoefficients {
    fn default() -> Self {
        // Order-of-magnitude defaults for a low-power 22nm-class core;
        // experiments override them from config.
        EnergyCoefficients {
            c_eff: 1e-11,
            k_leak: 1e-3,
            abb_leak_factor: 0.5,
            e_bit: 1e-12,
            e_wake: 1e-10,
            c_eff_mac: 2e-12,
        }
    }
}

/// Cycle costs of the software loop and its accelerated variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CycleCostCoefficients {
    /// Per-timestep overhead.
    pub c_fixed: u64,
    /// Per neuron update, software path.
    pub c_neuron_sw: u64,
    /// Per neuron update with the exp unit.
    pub c_neuron_acc: u64,
    /// Per synaptic event, software path.
    pub c_syn_sw: u64,
    /// Per synaptic event, accelerated path.
    pub c_syn_acc: u64,
}

impl Default for CycleCostCoefficients {
    fn default() -> Self {
        CycleCostCoefficients {
            c_fixed: 1000,
            c_neuron_sw: 50,
            c_neuron_acc: 30,
            c_syn_sw: 20,
            c_syn_acc: 5,
        }
    }
}

/// Fixed-point formats for membrane state and synaptic weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FixedPointFormats {
    pub state: FxFormat,
    pub weight: FxFormat,
}

impl Default for FixedPointFormats {
    fn default() -> Self {
        FixedPointFormats {
            state: FxFormat::STATE,
            weight: FxFormat::WEIGHT,
        }
    }
}

/// Accelerator block configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcceleratorConfig {
    /// Whether the numerical accelerators are present. Gates the `_acc`
    /// cycle-cost coefficients.
    pub exp_unit: bool,
    pub mac: MacArrayConfig,
    pub formats: FixedPointFormats,
}

impl Default for AcceleratorConfig {
    fn default() -> Self {
        AcceleratorConfig {
            exp_unit: true,
            mac: MacArrayConfig::default(),
            formats: FixedPointFormats::default(),
        }
    }
}

/// Bit widths of the 32-bit multicast key, MSB first:
/// [chip_x | chip_y | core | neuron].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeyLayout {
    pub chip_x: u8,
    pub chip_y: u8,
    pub core: u8,
    pub neuron: u8,
}

impl Default for KeyLayout {
    fn default() -> Self {
        KeyLayout {
            chip_x: 8,
            chip_y: 8,
            core: 5,
            neuron: 11,
        }
    }
}

impl KeyLayout {
    pub fn total_bits(&self) -> u32 {
        self.chip_x as u32 + self.chip_y as u32 + self.core as u32 + self.neuron as u32
    }
}

/// Fabric sizing: router table capacity, packet framing, key layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FabricConfig {
    /// Max routing entries per chip.
    pub table_capacity: usize,
    /// Bits charged per packet per link hop (32-bit key + framing).
    pub packet_bits: u64,
    pub key_bits: KeyLayout,
}

impl Default for FabricConfig {
    fn default() -> Self {
        FabricConfig {
            table_capacity: 16384,
            packet_bits: 40,
            key_bits: KeyLayout::default(),
        }
    }
}

/// Chip mesh dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshDims {
    pub width: u32,
    pub height: u32,
}

fn default_timestep_us() -> f64 {
    1000.0
}

fn default_max_neurons_per_core() -> u32 {
    1000
}

fn default_trace_cap() -> usize {
    100_000
}

/// The full machine description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub mesh: MeshDims,
    pub cores_per_chip: u32,
    pub perf_levels: Vec<PerfLevel>,
    #[serde(default = "default_timestep_us")]
    pub timestep_us: f64,
    #[serde(default)]
    pub energy: EnergyCoefficients,
    #[serde(default)]
    pub cost: CycleCostCoefficients,
    #[serde(default)]
    pub accel: AcceleratorConfig,
    #[serde(default)]
    pub abb_enabled: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_neurons_per_core")]
    pub max_neurons_per_core: u32,
    #[serde(default)]
    pub fabric: FabricConfig,
    #[serde(default = "default_trace_cap")]
    pub trace_cap: usize,
}

impl SystemConfig {
    pub fn n_chips(&self) -> u64 {
        self.mesh.width as u64 * self.mesh.height as u64
    }

    pub fn n_cores(&self) -> u64 {
        self.n_chips() * self.cores_per_chip as u64
    }

    pub fn neuron_capacity(&self) -> u64 {
        self.n_cores() * self.max_neurons_per_core as u64
    }

    pub fn timestep_secs(&self) -> f64 {
        self.timestep_us * 1e-6
    }

    /// Minimum permissible core voltage: body biasing buys reliable
    /// operation down to 0.40 V, otherwise 0.50 V.
    pub fn v_min(&self) -> f64 {
        if self.abb_enabled {
            0.40
        } else {
            0.50
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh.width < 1 || self.mesh.height < 1 {
            return Err(Error::Validation("mesh dimensions must be >= 1".into()));
        }
        if self.cores_per_chip < 1 {
            return Err(Error::Validation("cores_per_chip must be >= 1".into()));
        }
        if self.cores_per_chip > 64 {
            return Err(Error::Validation(
                "cores_per_chip above 64 exceeds the route bitset".into(),
            ));
        }
        if self.timestep_us.is_nan() || self.timestep_us <= 0.0 {
            return Err(Error::Validation("timestep must be > 0".into()));
        }
        if self.perf_levels.is_empty() {
            return Err(Error::Validation("perf_levels must be non-empty".into()));
        }
        for pair in self.perf_levels.windows(2) {
            if pair[1].mhz.is_nan() || pair[1].mhz <= pair[0].mhz {
                return Err(Error::Validation(format!(
                    "perf_levels not ascending: {} MHz does not exceed {} MHz",
                    pair[1].mhz, pair[0].mhz
                )));
            }
            if pair[1].volts < pair[0].volts {
                return Err(Error::Validation(format!(
                    "perf_levels voltage descending: {} V after {} V",
                    pair[1].volts, pair[0].volts
                )));
            }
        }
        let v_min = self.v_min();
        for (i, level) in self.perf_levels.iter().enumerate() {
            if level.mhz.is_nan() || level.mhz <= 0.0 {
                return Err(Error::Validation(format!(
                    "perf level {i} frequency must be > 0"
                )));
            }
            if level.volts.is_nan() || level.volts <= 0.0 {
                return Err(Error::Validation(format!(
                    "perf level {i} voltage must be > 0"
                )));
            }
            if level.volts < v_min {
                return Err(Error::Validation(format!(
                    "voltage below v_min: level {i} is {} V, v_min is {} V (abb_enabled={})",
                    level.volts, v_min, self.abb_enabled
                )));
            }
        }
        let e = &self.energy;
        for (name, v) in [
            ("c_eff", e.c_eff),
            ("k_leak", e.k_leak),
            ("abb_leak_factor", e.abb_leak_factor),
            ("e_bit", e.e_bit),
            ("e_wake", e.e_wake),
            ("c_eff_mac", e.c_eff_mac),
        ] {
            if v.is_nan() || v < 0.0 {
                return Err(Error::Validation(format!(
                    "energy coefficient {name} must be >= 0, got {v}"
                )));
            }
        }
        let c = &self.cost;
        if c.c_neuron_acc > c.c_neuron_sw {
            return Err(Error::Validation(
                "c_neuron_acc must be <= c_neuron_sw".into(),
            ));
        }
        if c.c_syn_acc > c.c_syn_sw {
            return Err(Error::Validation("c_syn_acc must be <= c_syn_sw".into()));
        }
        self.accel.mac.validate()?;
        for (name, fmt) in [
            ("state", self.accel.formats.state),
            ("weight", self.accel.formats.weight),
        ] {
            if !fmt.is_valid() {
                return Err(Error::Validation(format!(
                    "{name} fixed-point format {fmt} invalid: int+frac bits must be in 1..=31"
                )));
            }
            if fmt.frac_bits == 0 {
                return Err(Error::Validation(format!(
                    "{name} fixed-point format {fmt} needs at least one fraction bit"
                )));
            }
        }
        if self.accel.formats.weight.frac_bits > self.accel.formats.state.frac_bits {
            return Err(Error::Validation(format!(
                "weight format {} has more fraction bits than state format {}; \
                 synaptic accumulation would lose precision",
                self.accel.formats.weight, self.accel.formats.state
            )));
        }
        let keys = &self.fabric.key_bits;
        if keys.total_bits() != 32 {
            return Err(Error::Validation(format!(
                "key layout bit widths must sum to 32, got {}",
                keys.total_bits()
            )));
        }
        let fits = |value: u64, bits: u8| bits < 64 && value <= (1u64 << bits);
        if !fits(self.mesh.width as u64, keys.chip_x) {
            return Err(Error::Validation(format!(
                "mesh width {} does not fit {} chip_x key bits",
                self.mesh.width, keys.chip_x
            )));
        }
        if !fits(self.mesh.height as u64, keys.chip_y) {
            return Err(Error::Validation(format!(
                "mesh height {} does not fit {} chip_y key bits",
                self.mesh.height, keys.chip_y
            )));
        }
        if !fits(self.cores_per_chip as u64, keys.core) {
            return Err(Error::Validation(format!(
                "cores_per_chip {} does not fit {} core key bits",
                self.cores_per_chip, keys.core
            )));
        }
        if !fits(self.max_neurons_per_core as u64, keys.neuron) {
            return Err(Error::Validation(format!(
                "max_neurons_per_core {} does not fit {} neuron key bits",
                self.max_neurons_per_core, keys.neuron
            )));
        }
        if self.max_neurons_per_core < 1 {
            return Err(Error::Validation(
                "max_neurons_per_core must be >= 1".into(),
            ));
        }
        if self.fabric.table_capacity < 1 {
            return Err(Error::Validation("table_capacity must be >= 1".into()));
        }
        if self.fabric.packet_bits < 1 {
            return Err(Error::Validation("packet_bits must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parse and validate a system config document.
pub fn parse_system_config(text: &str) -> Result<SystemConfig> {
    let cfg: SystemConfig = serde_json::from_str(text).map_err(|source| Error::Syntax {
        context: "system config".into(),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Read, parse, and validate a system config file.
pub fn load_system_config(path: &str) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cfg: SystemConfig = serde_json::from_str(&text).map_err(|source| Error::Syntax {
        context: format!("system config {path}"),
        source,
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let cfg = parse_system_config(
            r#"{"mesh":{"width":1,"height":1},"cores_per_chip":2,
                "perf_levels":[{"mhz":100,"volts":0.5}]}"#,
        )
        .unwrap();
        assert_eq!(cfg.n_chips(), 1);
        assert_eq!(cfg.n_cores(), 2);
        assert_eq!(cfg.timestep_us, 1000.0);
        assert_eq!(cfg.max_neurons_per_core, 1000);
        assert!(cfg.accel.exp_unit);
    }

    #[test]
    fn descending_levels_rejected() {
        let err = parse_system_config(
            r#"{"mesh":{"width":1,"height":1},"cores_per_chip":1,
                "perf_levels":[{"mhz":200,"volts":0.5},{"mhz":100,"volts":0.6}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("perf_levels not ascending"));
    }

    #[test]
    fn abb_lowers_the_voltage_floor() {
        let doc = |abb: bool| {
            format!(
                r#"{{"mesh":{{"width":1,"height":1}},"cores_per_chip":1,
                    "perf_levels":[{{"mhz":100,"volts":0.45}}],"abb_enabled":{abb}}}"#
            )
        };
        assert!(parse_system_config(&doc(true)).is_ok());
        let err = parse_system_config(&doc(false)).unwrap_err();
        assert!(err.to_string().contains("voltage below v_min"));
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = parse_system_config(
            r#"{"mesh":{"width":1,"height":1},"cores_per_chip":1,
                "perf_levels":[{"mhz":100,"volts":0.5}],"bogus":1}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Syntax { .. }));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_system_config("{\"mesh\": }").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("column"), "position missing from: {msg}");
    }

    #[test]
    fn key_layout_must_cover_geometry() {
        let err = parse_system_config(
            r#"{"mesh":{"width":300,"height":1},"cores_per_chip":1,
                "perf_levels":[{"mhz":100,"volts":0.5}]}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("chip_x"));
    }

    #[test]
    fn malformed_documents_never_panic() {
        let valid = br#"{"mesh":{"width":2,"height":2},"cores_per_chip":4,
            "perf_levels":[{"mhz":100,"volts":0.5},{"mhz":200,"volts":0.6}],
            "abb_enabled":true,"seed":9}"#
            .to_vec();
        let mut rng = crate::accel::RngStream::new(0xC0FF, 1);
        for _ in 0..300 {
            let mut doc = valid.clone();
            for _ in 0..1 + (rng.next_u32() % 4) as usize {
                let pos = rng.next_u32() as usize % doc.len();
                doc[pos] = (rng.next_u32() & 0xff) as u8;
            }
            if let Ok(text) = std::str::from_utf8(&doc) {
                let _ = parse_system_config(text);
            }
        }
    }

    #[test]
    fn cycle_budget_is_exact_for_integer_configs() {
        let level = PerfLevel {
            mhz: 100.0,
            volts: 0.5,
        };
        assert_eq!(level.cycle_budget(1000.0), 100_000);
        assert_eq!(level.cycle_budget(250.0), 25_000);
    }
}
