// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Seeded sampling from the Δ-fold union of uniform perfect matchings.
//!
//! The stream is pinned so fixtures never drift: matching `i` is a
//! Fisher–Yates shuffle driven by `ChaCha8Rng` (rand_chacha 0.3) seeded with
//! `sub_seed(seed, i)`, where `sub_seed` is one SplitMix64 step over
//! `seed + (i + 1) * 0x9E3779B97F4A7C15`. Bounded draws use plain rejection on
//! `next_u64`, so the output depends only on the ChaCha8 keystream.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BipartiteGraph;
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n: usize,
    pub delta: usize,
    pub seed: u64,
}

impl SampleConfig {
    pub fn new(n: usize, delta: usize, seed: u64) -> Result<Self> {
        if n == 0 || delta == 0 {
            return Err(Error::Precondition(format!(
                "sampling needs n >= 1 and delta >= 1 (got n={n}, delta={delta})"
            )));
        }
        Ok(SampleConfig { n, delta, seed })
    }
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th independent stream under `seed`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Uniform integer in `0..bound` by rejection.
fn below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = u64::MAX - (u64::MAX % bound);
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// Uniform random permutation of `0..n`.
pub fn random_permutation(n: usize, seed: u64) -> Vec<u32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<u32> = (0..n as u32).collect();
    for i in (1..n).rev() {
        let j = below(&mut rng, i as u64 + 1) as usize;
        perm.swap(i, j);
    }
    perm
}

pub fn sample_graph(cfg: &SampleConfig) -> BipartiteGraph {
    let matchings = (0..cfg.delta as u64)
        .map(|i| random_permutation(cfg.n, sub_seed(cfg.seed, i)))
        .collect();
    BipartiteGraph::new(cfg.n, cfg.delta, matchings).expect("shuffles are permutations")
}

/// One graph per seed, in seed order.
pub fn sample_graphs(n: usize, delta: usize, seeds: &[u64]) -> Result<Vec<BipartiteGraph>> {
    SampleConfig::new(n, delta, 0)?;
    Ok(par::map_slice(seeds, |&seed| {
        sample_graph(&SampleConfig { n, delta, seed })
    }))
}
