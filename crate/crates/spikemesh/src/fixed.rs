//! Saturating signed fixed-point arithmetic.
//!
//! All membrane state, decay factors, and synaptic weights live in `Fixed`
//! values: a raw `i32` interpreted as `raw / 2^frac_bits`. Formats are
//! config-visible; the defaults are s16.15 for state and s8.8 for weights.
//! Arithmetic saturates at the format bounds instead of wrapping, and callers
//! that care count saturation events.

use serde::{Deserialize, Serialize};

/// A signed fixed-point format: one sign bit, `int_bits` integer bits,
/// `frac_bits` fraction bits. `int_bits + frac_bits` must be ≤ 31.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FxFormat {
    pub int_bits: u8,
    pub frac_bits: u8,
}

impl FxFormat {
    /// Membrane-state default: s16.15.
    pub const STATE: FxFormat = FxFormat {
        int_bits: 16,
        frac_bits: 15,
    };

    /// Synaptic-weight default: s8.8.
    pub const WEIGHT: FxFormat = FxFormat {
        int_bits: 8,
        frac_bits: 8,
    };

    pub fn is_valid(&self) -> bool {
        (1..=31).contains(&(self.int_bits as u32 + self.frac_bits as u32))
    }

    /// Largest representable raw value.
    pub fn max_raw(&self) -> i32 {
        ((1i64 << (self.int_bits as u32 + self.frac_bits as u32)) - 1) as i32
    }

    /// Smallest (most negative) representable raw value.
    pub fn min_raw(&self) -> i32 {
        (-(1i64 << (self.int_bits as u32 + self.frac_bits as u32))) as i32
    }

    /// Value of one least-significant bit.
    pub fn ulp(&self) -> f64 {
        1.0 / (1i64 << self.frac_bits) as f64
    }

    /// Clamp a wide intermediate to the format bounds. Returns the clamped
    /// raw value and whether clamping occurred.
    pub fn saturate(&self, wide: i64) -> (i32, bool) {
        let max = self.max_raw() as i64;
        let min = self.min_raw() as i64;
        if wide > max {
            (max as i32, true)
        } else if wide < min {
            (min as i32, true)
        } else {
            (wide as i32, false)
        }
    }
}

impl std::fmt::Display for FxFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "s{}.{}", self.int_bits, self.frac_bits)
    }
}

/// A fixed-point number: `raw / 2^fmt.frac_bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fixed {
    raw: i32,
    fmt: FxFormat,
}

impl Fixed {
    pub fn from_raw(raw: i32, fmt: FxFormat) -> Fixed {
        Fixed { raw, fmt }
    }

    pub fn zero(fmt: FxFormat) -> Fixed {
        Fixed { raw: 0, fmt }
    }

    pub fn one(fmt: FxFormat) -> Fixed {
        // 1.0 saturates if the format has no integer bits.
        let (raw, _) = fmt.saturate(1i64 << fmt.frac_bits);
        Fixed { raw, fmt }
    }

    /// Round-to-nearest conversion, saturating at the format bounds.
    /// Ties round away from zero (the behavior of `f64::round`).
    pub fn from_f64(value: f64, fmt: FxFormat) -> Fixed {
        let scaled = value * (1i64 << fmt.frac_bits) as f64;
        let rounded = scaled.round();
        let wide = if rounded >= i64::MAX as f64 {
            i64::MAX
        } else if rounded <= i64::MIN as f64 {
            i64::MIN
        } else {
            rounded as i64
        };
        let (raw, _) = fmt.saturate(wide);
        Fixed { raw, fmt }
    }

    pub fn raw(&self) -> i32 {
        self.raw
    }

    pub fn format(&self) -> FxFormat {
        self.fmt
    }

    pub fn to_f64(&self) -> f64 {
        self.raw as f64 / (1i64 << self.fmt.frac_bits) as f64
    }

    /// Widen to an i64 expressed in `target` fraction bits. Lossless when the
    /// target has at least as many fraction bits; otherwise rounds to nearest.
    pub fn widen_to_frac(&self, target_frac: u8) -> i64 {
        let raw = self.raw as i64;
        let here = self.fmt.frac_bits;
        if target_frac >= here {
            raw << (target_frac - here) as u32
        } else {
            let shift = (here - target_frac) as u32;
            let half = 1i64 << (shift - 1);
            (raw + half) >> shift
        }
    }

    /// Saturating addition; both operands must share a format.
    pub fn saturating_add(self, other: Fixed) -> (Fixed, bool) {
        debug_assert_eq!(self.fmt, other.fmt);
        let (raw, sat) = self.fmt.saturate(self.raw as i64 + other.raw as i64);
        (Fixed { raw, fmt: self.fmt }, sat)
    }

    /// Fixed-point multiply with round-to-nearest, result in `self`'s format.
    /// The intermediate product is widened to i64, so no precision is lost
    /// before the final shift.
    pub fn saturating_mul(self, other: Fixed) -> (Fixed, bool) {
        let prod = self.raw as i64 * other.raw as i64;
        let shift = other.fmt.frac_bits as u32;
        let rounded = if shift == 0 {
            prod
        } else {
            (prod + (1i64 << (shift - 1))) >> shift
        };
        let (raw, sat) = self.fmt.saturate(rounded);
        (Fixed { raw, fmt: self.fmt }, sat)
    }

    /// Convert to another format, rounding to nearest and saturating.
    pub fn rescale(self, fmt: FxFormat) -> (Fixed, bool) {
        if fmt == self.fmt {
            return (self, false);
        }
        let wide = self.widen_to_frac(fmt.frac_bits);
        let (raw, sat) = fmt.saturate(wide);
        (Fixed { raw, fmt }, sat)
    }
}

impl PartialOrd for Fixed {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        if self.fmt == other.fmt {
            self.raw.partial_cmp(&other.raw)
        } else {
            None
        }
    }
}

impl std::fmt::Display for Fixed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}
