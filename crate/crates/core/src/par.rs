//! Deterministic work splitting and per-worker random streams.
//!
//! Worker `w` always receives seed `seed + w` and the same index range,
//! whether the chunks run on threads (`std`) or one after another.

use alloc::vec::Vec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn worker_rng(seed: u64, worker: usize) -> Rng {
    rng(seed.wrapping_add(worker as u64))
}

/// Half-open index range handled by `worker` out of `workers` for `n` items.
pub fn chunk(n: usize, workers: usize, worker: usize) -> (usize, usize) {
    let workers = workers.max(1);
    let base = n / workers;
    let extra = n % workers;
    let start = worker * base + worker.min(extra);
    let len = base + usize::from(worker < extra);
    (start, start + len)
}

/// Runs `f(worker)` for every worker and returns results in worker order.
#[cfg(feature = "std")]
pub fn run<T, F>(workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = workers.max(1);
    if workers == 1 {
        return alloc::vec![f(0)];
    }
    std::thread::scope(|s| {
        let f = &f;
        let handles: Vec<_> = (0..workers).map(|w| s.spawn(move || f(w))).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

#[cfg(not(feature = "std"))]
pub fn run<T, F>(workers: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..workers.max(1)).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunks_partition() {
        for n in [0usize, 1, 7, 100] {
            for w in 1..6 {
                let mut next = 0;
                for k in 0..w {
                    let (a, b) = chunk(n, w, k);
                    assert_eq!(a, next);
                    next = b;
                }
                assert_eq!(next, n);
            }
        }
    }
}
