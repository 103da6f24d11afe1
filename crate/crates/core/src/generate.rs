//! Seeded random instances for consistency sweeps.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arith::FactorConfig;
use crate::coset::{normalize, CosetInstance, InstanceInput};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub count: usize,
    pub seed: u64,
    pub entry_bound: i64,
    /// Consecutive rejected samples tolerated before giving up.
    pub max_rejections: u64,
    /// Rescale the sampled Gram by `s D G D` with `D` diagonal in
    /// `{1, 2, 4}` and `s` in `{1, 2, 4}`, which reaches larger `alpha - beta`.
    /// Entries may then exceed `entry_bound`.
    pub dyadic: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig { count: 100, seed: 1, entry_bound: 12, max_rejections: 1_000_000, dyadic: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("gave up after {rejections} consecutive rejections with {produced} of {requested} instances")]
pub struct GiveUp {
    pub rejections: u64,
    pub produced: usize,
    pub requested: usize,
}

const UPPER: [(usize, usize); 6] = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];

/// Rejection-samples Gram matrices with entries in `[-E, E]` and
/// `w` in `{0,1}^3 \ {0}`, keeping the ones that normalize.
pub fn generate(cfg: &GeneratorConfig) -> Result<Vec<(InstanceInput, CosetInstance)>, GiveUp> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let factor = FactorConfig::default();
    let e = cfg.entry_bound.max(0);
    let mut out = Vec::with_capacity(cfg.count);
    let mut rejections = 0;
    while out.len() < cfg.count {
        if rejections >= cfg.max_rejections {
            return Err(GiveUp { rejections, produced: out.len(), requested: cfg.count });
        }
        let mut gram = [0i64; 6];
        for v in &mut gram {
            *v = rng.gen_range(-e..=e);
        }
        // a positive diagonal is necessary; sampling it directly saves rejections
        for i in [0, 3, 5] {
            gram[i] = rng.gen_range(1..=e.max(1));
        }
        if cfg.dyadic {
            let d: [i64; 3] = std::array::from_fn(|_| [1, 1, 2, 4][rng.gen_range(0..4)]);
            let s = [1, 2, 4][rng.gen_range(0..3)];
            for (v, (i, j)) in gram.iter_mut().zip(UPPER) {
                *v *= d[i] * d[j] * s;
            }
        }
        let wbits = rng.gen_range(1..8u8);
        let w = [wbits & 1, (wbits >> 1) & 1, (wbits >> 2) & 1].map(i64::from);
        let input = InstanceInput::Lattice { gram: gram.map(BigInt::from), w: w.map(BigInt::from) };
        match normalize(&input, &factor) {
            Ok(inst) => {
                out.push((input, inst));
                rejections = 0;
            }
            Err(_) => rejections += 1,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let cfg = GeneratorConfig { count: 20, seed: 7, ..Default::default() };
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        assert_eq!(a.len(), 20);
        assert_eq!(a, b);
        for (input, inst) in &a {
            assert_eq!(&normalize(input, &FactorConfig::default()).unwrap(), inst);
        }
    }

    #[test]
    fn dyadic_reaches_alpha_beta_3() {
        let cfg = GeneratorConfig { count: 200, seed: 3, entry_bound: 6, dyadic: true, ..Default::default() };
        assert!(generate(&cfg).unwrap().iter().any(|(_, i)| i.alpha == i.beta + 3));
    }

    #[test]
    fn gives_up_explicitly() {
        let cfg = GeneratorConfig { count: 1, seed: 1, entry_bound: 0, max_rejections: 1000, dyadic: false };
        let err = generate(&cfg).unwrap_err();
        assert_eq!(err.produced, 0);
    }
}
