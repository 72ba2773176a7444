//! Deterministic per-core random number streams.
//!
//! The hardware derives entropy from clock-generator thermal noise; that is
//! not reproducible, so this simulator substitutes a PCG32 generator with one
//! independent stream per consumer. The substitution is load-bearing for
//! testing: every run is replayable from (seed, stream id) alone.

use serde::{Deserialize, Serialize};

const PCG_MUL: u64 = 6364136223846793005;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// One PCG32 stream: 64-bit state plus a stream-selecting increment.
/// Distinct stream ids yield statistically independent sequences even under
/// the same global seed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngStream {
    state: u64,
    inc: u64,
}

impl RngStream {
    /// Build the stream for (global seed, stream id).
    pub fn new(seed: u64, stream_id: u64) -> RngStream {
        let mut s = RngStream {
            state: 0,
            inc: (stream_id << 1) | 1,
        };
        s.step();
        s.state = s.state.wrapping_add(splitmix64(seed));
        s.step();
        s
    }

    /// Restore a stream from checkpointed state.
    pub fn from_parts(state: u64, stream_id: u64) -> RngStream {
        RngStream {
            state,
            inc: (stream_id << 1) | 1,
        }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    fn step(&mut self) -> u64 {
        let old = self.state;
        self.state = old.wrapping_mul(PCG_MUL).wrapping_add(self.inc);
        old
    }

    /// Next 32-bit draw (PCG32 XSH-RR output function).
    pub fn next_u32(&mut self) -> u32 {
        let old = self.step();
        let xorshifted = (((old >> 18) ^ old) >> 27) as u32;
        let rot = (old >> 59) as u32;
        xorshifted.rotate_right(rot)
    }

    /// Bernoulli draw against a threshold in [0, 2^32].
    pub fn bernoulli(&mut self, threshold: u64) -> bool {
        (self.next_u32() as u64) < threshold
    }
}
