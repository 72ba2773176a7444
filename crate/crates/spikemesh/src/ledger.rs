//! Exact energy accounting.
//!
//! Amounts are 128-bit fixed-point picojoules (raw / 2^32 pJ). Every
//! per-event energy is quantized once on entry and accumulated in integers,
//! so ledger totals are exact sums of their components and a checkpointed
//! run continues bit-identically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const FRAC_BITS: u32 = 32;
const FRAC_MASK: u128 = (1u128 << FRAC_BITS) - 1;

/// Non-negative energy in Q.32 picojoules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct EnergyAmount(i128);

impl EnergyAmount {
    pub const ZERO: EnergyAmount = EnergyAmount(0);

    /// Quantize a joule value (round to nearest Q.32 picojoule).
    pub fn from_joules(joules: f64) -> EnergyAmount {
        debug_assert!(joules >= 0.0, "energies are non-negative");
        let pj = joules * 1e12;
        EnergyAmount((pj * (1u64 << FRAC_BITS) as f64).round().max(0.0) as i128)
    }

    pub fn from_raw(raw: i128) -> EnergyAmount {
        EnergyAmount(raw)
    }

    pub fn raw(&self) -> i128 {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0 == 0
    }

    pub fn to_joules(&self) -> f64 {
        self.0 as f64 / (1u64 << FRAC_BITS) as f64 * 1e-12
    }

    /// Exact decimal picojoule string, e.g. "40", "1.5", "0.25".
    pub fn pj_string(&self) -> String {
        let raw = self.0 as u128;
        let int = raw >> FRAC_BITS;
        let mut frac = raw & FRAC_MASK;
        if frac == 0 {
            return int.to_string();
        }
        let mut digits = String::new();
        while frac != 0 {
            frac *= 10;
            digits.push(char::from(b'0' + (frac >> FRAC_BITS) as u8));
            frac &= FRAC_MASK;
        }
        format!("{int}.{digits}")
    }

    /// Exact decimal joule string (the picojoule value shifted 12 places).
    pub fn joules_string(&self) -> String {
        let pj = self.pj_string();
        let (int_part, frac_part) = match pj.split_once('.') {
            Some((i, f)) => (i, f),
            None => (pj.as_str(), ""),
        };
        let digits: String = format!("{int_part}{frac_part}");
        let point = int_part.len() as isize - 12;
        let mut out = if point > 0 {
            let (i, f) = digits.split_at(point as usize);
            format!("{i}.{f}")
        } else {
            format!("0.{}{}", "0".repeat((-point) as usize), digits)
        };
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
        out
    }

    /// Parse an exact decimal joule string produced by `joules_string`.
    pub fn parse_joules_str(s: &str) -> Result<EnergyAmount> {
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i.to_string(), f.to_string()),
            None => (s.to_string(), String::new()),
        };
        let mut frac = frac_part;
        while frac.len() < 12 {
            frac.push('0');
        }
        let (to_int, rest) = frac.split_at(12);
        let mut pj = format!("{int_part}{to_int}");
        if !rest.is_empty() {
            pj.push('.');
            pj.push_str(rest);
        }
        // Strip leading zeros the integer parser would choke on style-wise.
        let trimmed = pj.trim_start_matches('0');
        let pj = if trimmed.is_empty() || trimmed.starts_with('.') {
            format!("0{trimmed}")
        } else {
            trimmed.to_string()
        };
        EnergyAmount::parse_pj(&pj)
    }

    /// Parse an exact decimal picojoule string produced by `pj_string`.
    pub fn parse_pj(s: &str) -> Result<EnergyAmount> {
        let bad = || Error::Validation(format!("invalid energy literal \"{s}\""));
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        let int: u128 = int_part.parse().map_err(|_| bad())?;
        if frac_part.len() > 40 || frac_part.bytes().any(|b| !b.is_ascii_digit()) {
            return Err(bad());
        }
        let mut frac: u128 = 0;
        for b in frac_part.bytes().rev() {
            frac += ((b - b'0') as u128) << FRAC_BITS;
            if !frac.is_multiple_of(10) {
                // Not representable in Q.32; only our own output round-trips.
                return Err(bad());
            }
            frac /= 10;
        }
        Ok(EnergyAmount(((int << FRAC_BITS) + frac) as i128))
    }
}

impl std::ops::Add for EnergyAmount {
    type Output = EnergyAmount;
    fn add(self, rhs: EnergyAmount) -> EnergyAmount {
        EnergyAmount(self.0 + rhs.0)
    }
}

impl std::ops::AddAssign for EnergyAmount {
    fn add_assign(&mut self, rhs: EnergyAmount) {
        self.0 += rhs.0;
    }
}

impl std::iter::Sum for EnergyAmount {
    fn sum<I: Iterator<Item = EnergyAmount>>(iter: I) -> EnergyAmount {
        iter.fold(EnergyAmount::ZERO, |a, b| a + b)
    }
}

impl From<EnergyAmount> for String {
    fn from(e: EnergyAmount) -> String {
        e.pj_string()
    }
}

impl TryFrom<String> for EnergyAmount {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<EnergyAmount, String> {
        EnergyAmount::parse_pj(&s).map_err(|e| e.to_string())
    }
}

/// Event counters for a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    pub spikes_emitted: u64,
    /// Packets that reached at least one core.
    pub packets_delivered: u64,
    /// Packets that reached no core.
    pub packets_dropped: u64,
    /// Individual (packet, core) deliveries; multicast counts each core.
    pub core_deliveries: u64,
    pub synaptic_events: u64,
    pub stimulus_events: u64,
    pub deadline_misses: u64,
    pub link_wakes: u64,
    pub link_hops: u64,
    pub fixed_point_saturations: u64,
}

/// Per-component accumulated energy plus run counters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    /// Indexed by active-core slot.
    pub core_dynamic: Vec<EnergyAmount>,
    pub core_leakage: Vec<EnergyAmount>,
    /// Indexed by directed link id (chip_linear * 4 + direction).
    pub link: Vec<EnergyAmount>,
    /// Indexed by dense layer.
    pub mac: Vec<EnergyAmount>,
    /// Per active-core slot.
    pub core_spikes: Vec<u64>,
    pub core_misses: Vec<u64>,
    pub counters: Counters,
}

impl EnergyLedger {
    pub fn new(n_cores: usize, n_links: usize, n_layers: usize) -> EnergyLedger {
        EnergyLedger {
            core_dynamic: vec![EnergyAmount::ZERO; n_cores],
            core_leakage: vec![EnergyAmount::ZERO; n_cores],
            link: vec![EnergyAmount::ZERO; n_links],
            mac: vec![EnergyAmount::ZERO; n_layers],
            core_spikes: vec![0; n_cores],
            core_misses: vec![0; n_cores],
            counters: Counters::default(),
        }
    }

    pub fn total_core_dynamic(&self) -> EnergyAmount {
        self.core_dynamic.iter().copied().sum()
    }

    pub fn total_core_leakage(&self) -> EnergyAmount {
        self.core_leakage.iter().copied().sum()
    }

    pub fn total_link(&self) -> EnergyAmount {
        self.link.iter().copied().sum()
    }

    pub fn total_mac(&self) -> EnergyAmount {
        self.mac.iter().copied().sum()
    }

    pub fn total(&self) -> EnergyAmount {
        self.total_core_dynamic() + self.total_core_leakage() + self.total_link() + self.total_mac()
    }

    /// Everything that scales with activity rather than time.
    pub fn total_non_leakage(&self) -> EnergyAmount {
        self.total_core_dynamic() + self.total_link() + self.total_mac()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joule_round_trip() {
        let e = EnergyAmount::from_joules(2.5e-7);
        assert!((e.to_joules() - 2.5e-7).abs() < 1e-18);
    }

    #[test]
    fn pj_strings_are_exact() {
        assert_eq!(EnergyAmount::from_raw(40i128 << 32).pj_string(), "40");
        assert_eq!(EnergyAmount::from_raw(3i128 << 31).pj_string(), "1.5");
        assert_eq!(
            EnergyAmount::from_raw(1).pj_string(),
            "0.00000000023283064365386962890625"
        );
    }

    #[test]
    fn pj_string_round_trip() {
        for raw in [0i128, 1, 7, 40 << 32, (3 << 31) + 5, 123_456_789_012_345] {
            let e = EnergyAmount::from_raw(raw);
            assert_eq!(EnergyAmount::parse_pj(&e.pj_string()).unwrap(), e);
        }
    }

    #[test]
    fn foreign_inexact_literal_rejected() {
        assert!(EnergyAmount::parse_pj("0.1").is_err());
        assert!(EnergyAmount::parse_pj("nonsense").is_err());
    }

    #[test]
    fn joule_strings_shift_the_point() {
        let forty_pj = EnergyAmount::from_raw(40i128 << 32);
        assert_eq!(forty_pj.joules_string(), "0.00000000004");
        assert_eq!(
            EnergyAmount::parse_joules_str("0.00000000004").unwrap(),
            forty_pj
        );
        let quarter_uj = EnergyAmount::from_joules(0.25e-6);
        assert_eq!(quarter_uj.joules_string(), "0.00000025");
        assert_eq!(EnergyAmount::ZERO.joules_string(), "0");
        for raw in [1i128, 3 << 31, (1234567i128 << 32) + 99] {
            let e = EnergyAmount::from_raw(raw);
            assert_eq!(
                EnergyAmount::parse_joules_str(&e.joules_string()).unwrap(),
                e
            );
        }
    }

    #[test]
    fn sums_are_exact() {
        let parts: Vec<EnergyAmount> = (0..1000)
            .map(|i| EnergyAmount::from_raw(i * 3 + 1))
            .collect();
        let total: EnergyAmount = parts.iter().copied().sum();
        assert_eq!(total.raw(), parts.iter().map(|e| e.raw()).sum::<i128>());
    }
}
