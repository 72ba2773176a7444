//! Per-core accelerator emulations: exponential unit, random-number
//! source, and the MAC array for dense-layer offload.

mod exp;
mod mac;
mod rng;

pub use exp::{exp, exp_clamp};
pub use mac::{mac_layer, MacArrayConfig};
pub use rng::RngStream;
