//! Network description: populations, projections, stimuli, and dense
//! (MAC-offloaded) layers.
//!
//! Parsing validates references and ranges but does not expand probabilistic
//! connectivity; expansion is seeded and happens in `place_and_build` so the
//! result is a pure function of (network, system config).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// LIF parameters for one population. Potentials are dimensionless values
/// in the configured state format; the membrane decays toward zero with
/// time constant `tau_m_ms`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NeuronParams {
    /// Initial membrane potential.
    pub v_rest: f64,
    /// Potential after a spike.
    pub v_reset: f64,
    /// Spike threshold, inclusive.
    pub v_threshold: f64,
    /// Membrane time constant in milliseconds.
    pub tau_m_ms: f64,
    /// Refractory period; only 0 (none) is supported.
    pub refractory_ms: f64,
}

impl Default for NeuronParams {
    fn default() -> Self {
        NeuronParams {
            v_rest: 0.0,
            v_reset: 0.0,
            v_threshold: 1.0,
            tau_m_ms: 10.0,
            refractory_ms: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Population {
    pub name: String,
    pub size: u32,
    #[serde(default)]
    pub neuron_params: NeuronParams,
}

/// Either an explicit pair list or a fixed connection probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Connectivity {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<(u32, u32)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
}

fn default_delay() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Projection {
    pub source: String,
    pub target: String,
    pub connectivity: Connectivity,
    /// Synaptic weight; quantized to the configured weight format at build.
    pub weight: f64,
    /// Spikes emitted at t arrive at t+1; other delays are unsupported.
    #[serde(default = "default_delay")]
    pub delay_timesteps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stimulus {
    pub target: String,
    /// Poisson rate per neuron, Hz.
    pub rate_hz: f64,
}

/// Where a dense layer's input vector comes from each timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerInput {
    /// Spike indicator vector (0/1) of this population's previous timestep.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pop: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<Vec<i8>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreRef {
    pub chip: (u32, u32),
    pub core: u32,
}

/// Experimental: feed MAC outputs back as synaptic input.
/// `output >> scale_shift` is added (in state-format raw units) to the
/// target population's membrane next timestep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InjectHook {
    pub target: String,
    pub scale_shift: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseLayer {
    pub name: String,
    pub rows: u32,
    pub cols: u32,
    /// rows x cols operand matrix, raw 8-bit values.
    pub weights: Vec<Vec<i8>>,
    pub input: LayerInput,
    pub core: CoreRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inject: Option<InjectHook>,
}

/// The full workload description.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkDesc {
    pub populations: Vec<Population>,
    pub projections: Vec<Projection>,
    pub stimuli: Vec<Stimulus>,
    pub dense_layers: Vec<DenseLayer>,
}

impl NetworkDesc {
    pub fn total_neurons(&self) -> u64 {
        self.populations.iter().map(|p| p.size as u64).sum()
    }

    pub fn population_index(&self, name: &str) -> Option<usize> {
        self.populations.iter().position(|p| p.name == name)
    }

    fn resolve(&self, kind: &'static str, name: &str) -> Result<usize> {
        self.population_index(name)
            .ok_or_else(|| Error::UnknownReference {
                kind,
                name: name.to_string(),
            })
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for pop in &self.populations {
            if !seen.insert(pop.name.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate population name \"{}\"",
                    pop.name
                )));
            }
            if pop.size < 1 {
                return Err(Error::Validation(format!(
                    "population \"{}\" size must be >= 1",
                    pop.name
                )));
            }
            let np = &pop.neuron_params;
            for (field, v) in [
                ("v_rest", np.v_rest),
                ("v_reset", np.v_reset),
                ("v_threshold", np.v_threshold),
                ("tau_m_ms", np.tau_m_ms),
            ] {
                if !v.is_finite() {
                    return Err(Error::Validation(format!(
                        "population \"{}\" {field} must be finite",
                        pop.name
                    )));
                }
            }
            if np.tau_m_ms.is_nan() || np.tau_m_ms <= 0.0 {
                return Err(Error::Validation(format!(
                    "population \"{}\" tau_m_ms must be > 0",
                    pop.name
                )));
            }
            if np.refractory_ms != 0.0 {
                return Err(Error::Validation(format!(
                    "population \"{}\": refractory periods are not supported",
                    pop.name
                )));
            }
        }
        for (i, proj) in self.projections.iter().enumerate() {
            let src = self.resolve("population", &proj.source)?;
            let tgt = self.resolve("population", &proj.target)?;
            match (&proj.connectivity.pairs, proj.connectivity.p) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(Error::Validation(format!(
                        "projection {i}: connectivity needs exactly one of `pairs` or `p`"
                    )));
                }
                (Some(pairs), None) => {
                    let (ns, nt) = (self.populations[src].size, self.populations[tgt].size);
                    for &(s, t) in pairs {
                        if s >= ns || t >= nt {
                            return Err(Error::Validation(format!(
                                "projection {i}: pair ({s},{t}) out of range {ns}x{nt}"
                            )));
                        }
                    }
                }
                (None, Some(p)) => {
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::Validation(format!(
                            "projection {i}: probability {p} outside [0, 1]"
                        )));
                    }
                }
            }
            if !proj.weight.is_finite() {
                return Err(Error::Validation(format!(
                    "projection {i}: weight must be finite"
                )));
            }
            if proj.delay_timesteps != 1 {
                return Err(Error::Validation(format!(
                    "projection {i}: only delay_timesteps=1 is supported"
                )));
            }
        }
        for (i, stim) in self.stimuli.iter().enumerate() {
            self.resolve("population", &stim.target)?;
            if !stim.rate_hz.is_finite() || stim.rate_hz < 0.0 {
                return Err(Error::Validation(format!(
                    "stimulus {i}: rate_hz must be finite and >= 0"
                )));
            }
        }
        let mut layer_names = std::collections::HashSet::new();
        for layer in &self.dense_layers {
            if !layer_names.insert(layer.name.as_str()) {
                return Err(Error::Validation(format!(
                    "duplicate dense layer name \"{}\"",
                    layer.name
                )));
            }
            if layer.rows < 1 || layer.cols < 1 {
                return Err(Error::Validation(format!(
                    "layer \"{}\": rows and cols must be >= 1",
                    layer.name
                )));
            }
            if layer.weights.len() != layer.rows as usize
                || layer.weights.iter().any(|r| r.len() != layer.cols as usize)
            {
                return Err(Error::Validation(format!(
                    "layer \"{}\": weights must be {}x{}",
                    layer.name, layer.rows, layer.cols
                )));
            }
            match (&layer.input.pop, &layer.input.constant) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(Error::Validation(format!(
                        "layer \"{}\": input needs exactly one of `pop` or `constant`",
                        layer.name
                    )));
                }
                (Some(pop), None) => {
                    let idx = self.resolve("population", pop)?;
                    if self.populations[idx].size != layer.cols {
                        return Err(Error::Validation(format!(
                            "layer \"{}\": input population \"{pop}\" size {} != cols {}",
                            layer.name, self.populations[idx].size, layer.cols
                        )));
                    }
                }
                (None, Some(constant)) => {
                    if constant.len() != layer.cols as usize {
                        return Err(Error::Validation(format!(
                            "layer \"{}\": constant input length {} != cols {}",
                            layer.name,
                            constant.len(),
                            layer.cols
                        )));
                    }
                }
            }
            if let Some(inject) = &layer.inject {
                let idx = self.resolve("population", &inject.target)?;
                if self.populations[idx].size != layer.rows {
                    return Err(Error::Validation(format!(
                        "layer \"{}\": inject target \"{}\" size {} != rows {}",
                        layer.name, inject.target, self.populations[idx].size, layer.rows
                    )));
                }
                if inject.scale_shift > 31 {
                    return Err(Error::Validation(format!(
                        "layer \"{}\": scale_shift must be <= 31",
                        layer.name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Parse and validate a network document.
pub fn parse_network(text: &str) -> Result<NetworkDesc> {
    let net: NetworkDesc = serde_json::from_str(text).map_err(|source| Error::Syntax {
        context: "network".into(),
        source,
    })?;
    net.validate()?;
    Ok(net)
}

/// Read, parse, and validate a network file.
pub fn load_network(path: &str) -> Result<NetworkDesc> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let net: NetworkDesc = serde_json::from_str(&text).map_err(|source| Error::Syntax {
        context: format!("network {path}"),
        source,
    })?;
    net.validate()?;
    Ok(net)
}

/// Canonical serialization; `parse_network(serialize_network(n))` is
/// structurally equal to `n`.
pub fn serialize_network(net: &NetworkDesc) -> String {
    serde_json::to_string_pretty(net).expect("network serialization cannot fail")
}
