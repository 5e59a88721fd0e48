//! Parallel sampling with scheduling-independent results.

use rand::Rng;
use rayon::prelude::*;
use rayon::ThreadPool;

use crate::error::{Error, Result};
use crate::rng::{chunks, stream};

/// Builds a pool with `workers` threads (0 selects the rayon default).
pub fn thread_pool(workers: usize) -> Result<ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start worker pool: {e}")))
}

/// Stream id of chunk `chunk` within task `task`.
pub fn stream_id(task: u64, chunk: u64) -> u64 {
    (task << 32) | chunk
}

/// Runs `trials` in chunks, each on its own random stream, and returns the
/// per-chunk results in chunk order. The callback receives the stream, the
/// chunk index and the chunk length.
pub fn run_chunks<T, F>(pool: &ThreadPool, seed: u64, task: u64, trials: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut rand_chacha::ChaCha8Rng, u64, u64) -> Result<T> + Sync,
{
    let jobs: Vec<(u64, u64)> = chunks(trials).collect();
    pool.install(|| {
        jobs.par_iter()
            .map(|&(chunk, len)| f(&mut stream(seed, stream_id(task, chunk)), chunk, len))
            .collect()
    })
}

/// Discrete distribution proportional to non-negative weights.
#[derive(Clone, Debug)]
pub struct Categorical {
    cdf: Vec<f64>,
}

impl Categorical {
    pub fn new(weights: &[f64]) -> Result<Self> {
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(weights.len());
        for &w in weights {
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!("invalid weight {w}")));
            }
            acc += w;
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::ZeroProbability);
        }
        Ok(Self { cdf })
    }

    pub fn total(&self) -> f64 {
        *self.cdf.last().expect("non-empty")
    }

    pub fn len(&self) -> usize {
        self.cdf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cdf.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u = rng.random::<f64>() * self.total();
        let i = self.cdf.partition_point(|&c| c <= u);
        // Guard against landing on a trailing zero-weight category.
        let mut i = i.min(self.cdf.len() - 1);
        while i > 0 && self.cdf[i] == self.cdf[i - 1] {
            i -= 1;
        }
        i
    }
}

/// Draws `n` samples and returns the count per category.
pub fn draw_counts(pool: &ThreadPool, dist: &Categorical, n: u64, seed: u64, task: u64) -> Result<Vec<u64>> {
    let parts = run_chunks(pool, seed, task, n, |rng, _, len| {
        let mut counts = vec![0u64; dist.len()];
        for _ in 0..len {
            counts[dist.sample(rng)] += 1;
        }
        Ok(counts)
    })?;
    let mut total = vec![0u64; dist.len()];
    for part in parts {
        for (t, c) in total.iter_mut().zip(part) {
            *t += c;
        }
    }
    Ok(total)
}
