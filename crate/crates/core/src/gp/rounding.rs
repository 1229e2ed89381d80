//! Dependent randomized rounding of fractional caching variables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Network, Strategy};

/// Values within this distance of 0 or 1 are treated as integral.
const INTEGRAL_TOL: f64 = 1e-12;

/// Rounds one node's item probabilities to 0/1 decisions.
///
/// Fractional items are paired off: the pair `(p, q)` becomes `(p + q, 0)`
/// or `(0, p + q)` when `p + q <= 1`, and `(1, p + q - 1)` or
/// `(p + q - 1, 1)` otherwise, with probabilities chosen so each item keeps
/// its marginal. The surviving fractional value is carried into the next
/// pair, and the last one is a plain Bernoulli draw. The number of cached
/// items is therefore `floor` or `ceil` of `sum(y)`.
pub fn round_items<R: Rng>(y: &[f64], rng: &mut R) -> Vec<bool> {
    let mut x = vec![false; y.len()];
    let mut carry: Option<(usize, f64)> = None;
    for (b, &q) in y.iter().enumerate() {
        if q >= 1.0 - INTEGRAL_TOL {
            x[b] = true;
            continue;
        }
        if q <= INTEGRAL_TOL {
            continue;
        }
        let Some((a, p)) = carry else {
            carry = Some((b, q));
            continue;
        };
        let sum = p + q;
        carry = if sum <= 1.0 {
            if rng.random::<f64>() < p / sum {
                Some((a, sum))
            } else {
                Some((b, sum))
            }
        } else if rng.random::<f64>() < (1.0 - q) / (2.0 - sum) {
            x[a] = true;
            Some((b, sum - 1.0))
        } else {
            x[b] = true;
            Some((a, sum - 1.0))
        };
        if let Some((c, v)) = carry {
            if v >= 1.0 - INTEGRAL_TOL {
                x[c] = true;
                carry = None;
            } else if v <= INTEGRAL_TOL {
                carry = None;
            }
        }
    }
    if let Some((a, p)) = carry {
        x[a] = rng.random::<f64>() < p;
    }
    x
}

/// Integral caching decision in the caching-vector layout of [`Strategy`].
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CacheDecision {
    pub ci: Vec<bool>,
    pub di: Vec<bool>,
}

impl CacheDecision {
    /// Items cached per node.
    pub fn counts(&self, n: usize) -> Vec<usize> {
        let mut out = vec![0; n];
        for (idx, &x) in self.ci.iter().enumerate() {
            out[idx % n] += x as usize;
        }
        for (idx, &x) in self.di.iter().enumerate() {
            out[idx % n] += x as usize;
        }
        out
    }
}

/// Rounds every node's items independently; node `i` draws from ChaCha
/// stream `i` of `seed`, so the result is deterministic given the seed.
pub fn randomized_round(net: &Network, s: &Strategy, seed: u64) -> CacheDecision {
    let n = net.n();
    let mut out = CacheDecision { ci: vec![false; s.ci_y.len()], di: vec![false; s.di_y.len()] };
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let items: Vec<f64> = (0..net.n_ci())
            .map(|c| s.ci_y[c * n + i])
            .chain((0..net.n_di()).map(|k| s.di_y[k * n + i]))
            .collect();
        let x = round_items(&items, &mut rng);
        for c in 0..net.n_ci() {
            out.ci[c * n + i] = x[c];
        }
        for k in 0..net.n_di() {
            out.di[k * n + i] = x[net.n_ci() + k];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn integral_input_is_kept() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..10 {
            assert_eq!(round_items(&[1.0, 0.0, 0.0], &mut rng), vec![true, false, false]);
        }
    }

    #[test]
    fn two_halves_give_exactly_one_item() {
        let mut hits = [0usize; 2];
        for seed in 0..2000 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = round_items(&[0.5, 0.5], &mut rng);
            assert_eq!(x.iter().filter(|&&b| b).count(), 1);
            hits[x[1] as usize] += 1;
        }
        assert!(hits[0] > 900 && hits[1] > 900);
    }

    proptest! {
        #[test]
        fn count_is_floor_or_ceil(y in proptest::collection::vec(0.0f64..=1.0, 0..12), seed: u64) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = round_items(&y, &mut rng);
            let total: f64 = y.iter().sum();
            let count = x.iter().filter(|&&b| b).count() as f64;
            prop_assert!(count >= (total - 1e-9).floor() && count <= (total + 1e-9).ceil());
        }
    }
}
