//! Exercise the fixed-point exponential unit: decay factors for LIF time
//! constants, plus a sweep of its worst-case error against f64.
//!
//! ```bash
//! cargo run --release -p spikemesh --example exp_unit
//! ```

use spikemesh::accel;
use spikemesh::fixed::{Fixed, FxFormat};

fn main() {
    let fmt = FxFormat::STATE;
    println!("decay factors exp(-dt/tau) at dt = 1 ms:");
    for tau_ms in [2.0, 5.0, 10.0, 20.0, 100.0] {
        let x = Fixed::from_f64(-1.0 / tau_ms, fmt);
        let alpha = accel::exp(x).unwrap();
        println!(
            "  tau = {tau_ms:>5} ms: alpha = {:.6} (raw {}), f64 says {:.6}",
            alpha.to_f64(),
            alpha.raw(),
            (-1.0f64 / tau_ms).exp()
        );
    }

    let mut worst_rel: f64 = 0.0;
    let mut worst_at = 0.0;
    for raw in (-524288..=0i32).step_by(7) {
        let x = Fixed::from_raw(raw, fmt);
        let out = accel::exp(x).unwrap().to_f64();
        let truth = x.to_f64().exp();
        if truth >= 2f64.powi(-6) {
            let rel = (out - truth).abs() / truth;
            if rel > worst_rel {
                worst_rel = rel;
                worst_at = x.to_f64();
            }
        }
    }
    println!("worst relative error where exp(x) >= 2^-6: {worst_rel:.3e} at x = {worst_at:.4}");
    println!("(bound: 2^-10 = {:.3e})", 2f64.powi(-10));
}
