//! Scrambled Halton points used as sample streams for greedy nets.

use rand::Rng as _;

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Halton sequence with a random Cranley-Patterson shift per dimension.
#[derive(Debug, Clone)]
pub struct Halton {
    dim: usize,
    index: u64,
    shift: [f64; 8],
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim >= 1 && dim <= PRIMES.len(), "Halton dimension out of range");
        let mut rng = crate::par::rng(seed);
        let mut shift = [0.0; 8];
        for s in shift.iter_mut().take(dim) {
            *s = rng.gen::<f64>();
        }
        Halton { dim, index: 0, shift }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes the next point into `out[..dim]`.
    pub fn next_into(&mut self, out: &mut [f64]) {
        self.index += 1;
        for d in 0..self.dim {
            let v = radical_inverse(self.index, PRIMES[d]) + self.shift[d];
            out[d] = if v >= 1.0 { v - 1.0 } else { v };
        }
    }
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += (i % b) as f64 * f;
        i /= b;
        f *= inv;
    }
    r
}
