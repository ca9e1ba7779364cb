//! Volumes, seeded sampling and moments.

mod moments;
mod rng;
mod sample;
mod volume;

pub use moments::{isotropic_constant, isotropic_map, isotropic_transform, iq_functional, l_mu, moments, MomentSummary};
pub use rng::{chunk_sizes, map_chunks, mix, substream, SampleConfig, SampleMethod, CHUNK};
pub use sample::{chord, hit_and_run_chain, sample_uniform, BallCut};
pub use volume::{exact_volume, mc_volume, MAX_EXACT_DIM};
