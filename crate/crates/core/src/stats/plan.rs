use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    Exhaustive,
    MonteCarlo,
}

/// How an expectation over random partitionwise maps is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub mode: SamplingMode,
    /// Number of draws in Monte Carlo mode.
    pub samples: u64,
    /// Largest enumeration allowed in exhaustive mode.
    pub work_cap: u64,
    pub seed: u64,
}

impl SamplingPlan {
    pub const DEFAULT_WORK_CAP: u64 = 1 << 22;

    pub fn exhaustive(work_cap: u64) -> Self {
        SamplingPlan { mode: SamplingMode::Exhaustive, samples: 0, work_cap, seed: 0 }
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Self {
        SamplingPlan { mode: SamplingMode::MonteCarlo, samples, work_cap: Self::DEFAULT_WORK_CAP, seed }
    }

    pub fn with_samples(self, samples: u64) -> Self {
        SamplingPlan { samples, ..self }
    }

    /// The same plan on an independent random stream.
    pub fn stream(self, k: u64) -> Self {
        SamplingPlan { seed: splitmix(self.seed ^ splitmix(k.wrapping_add(0x5851_f42d_4c95_7f2d))), ..self }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
