//! Seeded synthetic single-arm trials.
//!
//! The generator is xoshiro256** seeded through SplitMix64, both implemented
//! here so that a seed produces the same stream on every platform. Event and
//! censoring times are drawn by inversion, `T = -ln(U) / λ`, with `libm::log`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use libm::log;

use crate::error::{Error, Result};
use crate::fragility::{fragility_index, FragilityIndex};
use crate::survival::{AnalysisConfig, Observation, SurvivalDataset};

/// SplitMix64 step (Steele, Lea & Flood).
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A source of uniform draws on the open interval `(0, 1)`.
pub trait UniformSource {
    fn next_uniform(&mut self) -> f64;
}

/// xoshiro256** 1.0 (Blackman & Vigna).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Xoshiro256StarStar {
    s: [u64; 4],
}

impl Xoshiro256StarStar {
    pub fn seed_from_u64(seed: u64) -> Self {
        let mut sm = seed;
        let s = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        Self { s }
    }

    pub fn next_u64(&mut self) -> u64 {
        let result = self.s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }
}

impl UniformSource for Xoshiro256StarStar {
    fn next_uniform(&mut self) -> f64 {
        // top 53 bits, shifted half a step so 0 and 1 are never produced
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }
}

/// Seed for substream `index` of a base seed.
pub fn substream_seed(seed: u64, index: u64) -> u64 {
    let mut s = index.wrapping_add(1);
    let mut t = seed ^ splitmix64(&mut s);
    splitmix64(&mut t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CensorMechanism {
    None,
    /// Follow-up stops at `cutoff`; later events are censored there.
    Administrative {
        cutoff: f64,
    },
    /// Independent exponential censoring times with the given rate.
    Exponential {
        rate: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSpec {
    pub n: usize,
    pub event_rate: f64,
    pub censoring: CensorMechanism,
    pub seed: u64,
}

impl SimSpec {
    pub fn new(n: usize, event_rate: f64, censoring: CensorMechanism, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("simulated trial needs n >= 1"));
        }
        let positive = |what, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain { what, value: v })
            }
        };
        positive("event rate must be finite and positive", event_rate)?;
        match censoring {
            CensorMechanism::None => {}
            CensorMechanism::Administrative { cutoff } => {
                positive("censoring cutoff must be finite and positive", cutoff)?
            }
            CensorMechanism::Exponential { rate } => {
                positive("censoring rate must be finite and positive", rate)?
            }
        }
        Ok(Self {
            n,
            event_rate,
            censoring,
            seed,
        })
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

fn exponential_draw<R: UniformSource>(rng: &mut R, rate: f64) -> f64 {
    -log(rng.next_uniform()) / rate
}

/// Draws one trial from `spec` using the spec's own seed.
pub fn simulate_trial(spec: &SimSpec) -> SurvivalDataset {
    let mut rng = Xoshiro256StarStar::seed_from_u64(spec.seed);
    simulate_trial_with(spec, &mut rng)
}

/// Draws one trial from an arbitrary uniform source. For each subject the
/// event time is drawn first, then (for exponential censoring) the censoring
/// time.
pub fn simulate_trial_with<R: UniformSource>(spec: &SimSpec, rng: &mut R) -> SurvivalDataset {
    let obs: Vec<Observation> = (0..spec.n)
        .map(|_| {
            let t = exponential_draw(rng, spec.event_rate);
            let (time, event) = match spec.censoring {
                CensorMechanism::None => (t, true),
                CensorMechanism::Administrative { cutoff } => {
                    if t > cutoff {
                        (cutoff, false)
                    } else {
                        (t, true)
                    }
                }
                CensorMechanism::Exponential { rate } => {
                    let c = exponential_draw(rng, rate);
                    if t <= c {
                        (t, true)
                    } else {
                        (c, false)
                    }
                }
            };
            Observation::new(time, event).expect("inversion draws are positive and finite")
        })
        .collect();
    SurvivalDataset::new(obs).expect("n >= 1 is enforced by SimSpec")
}

/// Counts of fragility outcomes over simulated replications.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FiHistogram {
    pub replications: usize,
    pub not_applicable: usize,
    /// Attained FI value → count.
    pub attained: BTreeMap<usize, usize>,
    pub not_attained: usize,
    /// Numerical failures.
    pub errors: usize,
}

impl FiHistogram {
    pub fn total(&self) -> usize {
        self.not_applicable
            + self.attained.values().sum::<usize>()
            + self.not_attained
            + self.errors
    }

    fn record(&mut self, outcome: &Result<FragilityIndex>) {
        match outcome {
            Ok(FragilityIndex::Attained(k)) => *self.attained.entry(*k).or_default() += 1,
            Ok(FragilityIndex::NotAttained { .. }) => self.not_attained += 1,
            Err(Error::NotFragileApplicable { .. }) => self.not_applicable += 1,
            Err(_) => self.errors += 1,
        }
    }
}

/// Fragility outcome of replication `index`, which always draws from
/// substream `index` of `spec.seed`.
pub fn fi_replication(
    spec: &SimSpec,
    config: &AnalysisConfig,
    index: usize,
) -> Result<FragilityIndex> {
    let rep = spec.with_seed(substream_seed(spec.seed, index as u64));
    fragility_index(&simulate_trial(&rep), config).map(|r| r.fi)
}

pub fn fi_distribution(
    spec: &SimSpec,
    config: &AnalysisConfig,
    replications: usize,
) -> Result<FiHistogram> {
    if replications == 0 {
        return Err(Error::Invalid("need at least one replication"));
    }
    let mut hist = FiHistogram {
        replications,
        ..FiHistogram::default()
    };
    for i in 0..replications {
        hist.record(&fi_replication(spec, config, i));
    }
    Ok(hist)
}
