//! MAC array emulation for dense-layer offload.
//!
//! Operands are 8-bit signed, the accumulator is 32-bit signed. The array
//! processes tiles of `rows x cols` operands per pass; a full matrix-vector
//! product costs `ceil(M/rows) * ceil(N/cols)` passes plus a fixed setup.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// MAC array geometry and its cycle-cost parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MacArrayConfig {
    pub rows: u32,
    pub cols: u32,
    pub pass_cycles: u64,
    pub setup_cycles: u64,
}

impl Default for MacArrayConfig {
    fn default() -> Self {
        MacArrayConfig {
            rows: 16,
            cols: 16,
            pass_cycles: 16,
            setup_cycles: 4,
        }
    }
}

impl MacArrayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::Validation(
                "mac array rows and cols must be >= 1".into(),
            ));
        }
        // One pass accumulates up to rows*cols products of magnitude <= 2^14;
        // the 32-bit accumulator must absorb that without overflow.
        let worst = self.rows as u64 * self.cols as u64 * (1u64 << 14);
        if worst > i32::MAX as u64 {
            return Err(Error::Validation(format!(
                "mac array {}x{} can overflow its 32-bit accumulator in one pass",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    pub fn layer_cycles(&self, m: usize, n: usize) -> u64 {
        let passes = (m as u64).div_ceil(self.rows as u64) * (n as u64).div_ceil(self.cols as u64);
        passes
            .saturating_mul(self.pass_cycles)
            .saturating_add(self.setup_cycles)
    }
}

/// Matrix-vector product on the MAC array: `output[i] = sum_j w[i][j] * x[j]`.
///
/// Returns the M-vector of 32-bit accumulator values and the cycle count.
/// Sums that exceed the 32-bit accumulator clamp at its bounds, mirroring
/// the hardware register width; validated configs never reach that in a
/// single pass.
pub fn mac_layer(
    weights: &[Vec<i8>],
    input: &[i8],
    cfg: &MacArrayConfig,
) -> Result<(Vec<i32>, u64)> {
    let m = weights.len();
    let n = input.len();
    if m == 0 || n == 0 {
        return Err(Error::MacDimension(format!(
            "weights {m} rows, input length {n}; both must be >= 1"
        )));
    }
    for (i, row) in weights.iter().enumerate() {
        if row.len() != n {
            return Err(Error::MacDimension(format!(
                "weights row {i} has {} columns, input has {n}",
                row.len()
            )));
        }
    }
    let output = weights
        .iter()
        .map(|row| {
            let sum: i64 = row
                .iter()
                .zip(input)
                .map(|(&w, &x)| w as i64 * x as i64)
                .sum();
            sum.clamp(i32::MIN as i64, i32::MAX as i64) as i32
        })
        .collect();
    Ok((output, cfg.layer_cycles(m, n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_passes_input_through() {
        let n = 8;
        let weights: Vec<Vec<i8>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1 } else { 0 }).collect())
            .collect();
        let input: Vec<i8> = (0..n).map(|i| i as i8 - 3).collect();
        let (out, _) = mac_layer(&weights, &input, &MacArrayConfig::default()).unwrap();
        assert_eq!(out, input.iter().map(|&x| x as i32).collect::<Vec<_>>());
    }

    #[test]
    fn two_by_two_example() {
        let weights = vec![vec![1i8, 2], vec![3, 4]];
        let input = vec![5i8, 6];
        let (out, _) = mac_layer(&weights, &input, &MacArrayConfig::default()).unwrap();
        assert_eq!(out, vec![17, 39]);
    }

    #[test]
    fn cycle_formula() {
        let cfg = MacArrayConfig {
            rows: 16,
            cols: 16,
            pass_cycles: 16,
            setup_cycles: 4,
        };
        assert_eq!(cfg.layer_cycles(16, 16), 20);
        assert_eq!(cfg.layer_cycles(17, 16), 36); // two row tiles
        assert_eq!(cfg.layer_cycles(32, 33), 2 * 3 * 16 + 4);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let weights = vec![vec![1i8, 2], vec![3]];
        assert!(mac_layer(&weights, &[1, 2], &MacArrayConfig::default()).is_err());
        assert!(mac_layer(&[], &[1, 2], &MacArrayConfig::default()).is_err());
    }

    #[test]
    fn oversized_array_rejected() {
        let cfg = MacArrayConfig {
            rows: 1024,
            cols: 1024,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
