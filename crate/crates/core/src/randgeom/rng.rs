use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Samples drawn per independent substream.
pub const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMethod {
    Rejection,
    HitAndRun,
    /// Direct sampling: simplices of the cone decomposition, or the affine ball.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub n_samples: usize,
    /// Hit-and-run steps discarded per chain; `None` means `10 n^2`.
    pub burn_in: Option<usize>,
    /// Hit-and-run steps between kept samples; `None` means `n`.
    pub thinning: Option<usize>,
    pub method: SampleMethod,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 0,
            n_samples: 100_000,
            burn_in: None,
            thinning: None,
            method: SampleMethod::Exact,
        }
    }
}

impl SampleConfig {
    pub fn new(seed: u64, n_samples: usize) -> Self {
        SampleConfig {
            seed,
            n_samples,
            ..Default::default()
        }
    }

    pub fn with_method(mut self, method: SampleMethod) -> Self {
        self.method = method;
        self
    }

    pub fn burn_in_for(&self, n: usize) -> usize {
        self.burn_in.unwrap_or(10 * n * n)
    }

    pub fn thinning_for(&self, n: usize) -> usize {
        self.thinning.unwrap_or(n).max(1)
    }

    /// A derived config whose stream is independent of this one.
    pub fn fork(&self, tag: u64) -> Self {
        let mut c = self.clone();
        c.seed = mix(self.seed, tag);
        c
    }
}

/// SplitMix64 finalizer, used to derive child seeds.
pub fn mix(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(0x6A09_E667_F3BC_C908);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for chunk `index` of the stream rooted at `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(index);
    r
}

/// Evaluate `f` on every chunk index, possibly in parallel, returning results in index order.
pub fn map_chunks<T, F>(chunks: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..chunks).map(f).collect()
    }
}

/// Split `total` into chunk sizes of at most `CHUNK`.
pub fn chunk_sizes(total: usize) -> Vec<usize> {
    let full = total / CHUNK;
    let mut v = vec![CHUNK; full];
    if total % CHUNK != 0 {
        v.push(total % CHUNK);
    }
    v
}
