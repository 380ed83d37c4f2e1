use rand::Rng;

use super::Candidate;
use crate::error::{Error, Result};
use crate::lm::{LanguageModel, NextTokenDistribution, Sequence, TokenId};
use crate::rng::{draw, seeded};

/// Every outcome in id order.
pub(crate) fn all_outcomes(dist: &NextTokenDistribution) -> Vec<TokenId> {
    (0..dist.len() as TokenId).collect()
}

/// Samples one string. At each step `truncate` picks the admissible tokens;
/// the draw is proportional to their probabilities, walked in id order. The
/// returned log-probability is under the unmodified model.
pub(crate) fn sample_from<M, R, F>(model: &M, rng: &mut R, mut truncate: F) -> Candidate
where
    M: LanguageModel + ?Sized,
    R: Rng + ?Sized,
    F: FnMut(&NextTokenDistribution) -> Vec<TokenId>,
{
    let eos = model.vocab().eos_id();
    let mut prefix = Vec::new();
    let mut log_prob = 0.0;
    loop {
        let dist = model.next(&prefix);
        let mut allowed = truncate(&dist);
        allowed.sort_unstable();
        let token = draw(rng, dist.probs(), &allowed);
        log_prob += dist.prob(token).ln();
        if token == eos {
            break;
        }
        prefix.push(token);
    }
    Candidate {
        sequence: Sequence::from_interior_unchecked(prefix),
        log_prob,
    }
}

/// Draws each token from the unmodified conditional.
pub fn ancestral_sample<M: LanguageModel + ?Sized>(model: &M, seed: u64) -> Candidate {
    sample_from(model, &mut seeded(seed), all_outcomes)
}

/// The `k` most probable outcomes (ties to the lowest id), or the whole
/// support when it is smaller.
pub(crate) fn top_k_set(dist: &NextTokenDistribution, k: usize) -> Vec<TokenId> {
    let mut ranked = dist.ranked();
    ranked.truncate(k);
    ranked
}

/// Smallest prefix of the descending-probability order whose mass reaches `p`.
pub(crate) fn nucleus_set(dist: &NextTokenDistribution, p: f64) -> Vec<TokenId> {
    let ranked = dist.ranked();
    let mut mass = 0.0;
    for (i, &t) in ranked.iter().enumerate() {
        mass += dist.prob(t);
        // Rounding can leave the full sum a hair under 1.
        if mass >= p - 1e-12 {
            return ranked[..=i].to_vec();
        }
    }
    ranked
}

/// Top-k sampling: renormalize over the `k` most probable tokens each step.
pub fn top_k_sample<M: LanguageModel + ?Sized>(model: &M, k: usize, seed: u64) -> Result<Candidate> {
    if k == 0 {
        return Err(Error::InvalidParameter("top-k needs k ≥ 1".into()));
    }
    Ok(sample_from(model, &mut seeded(seed), |d| top_k_set(d, k)))
}

/// Nucleus (top-p) sampling.
pub fn nucleus_sample<M: LanguageModel + ?Sized>(model: &M, p: f64, seed: u64) -> Result<Candidate> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "nucleus mass must lie in (0, 1], got {p}"
        )));
    }
    Ok(sample_from(model, &mut seeded(seed), |d| nucleus_set(d, p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoding::greedy_decode;
    use crate::lm::{sequence_log_prob, train_ngram, IidModel, Vocabulary};

    fn four_way() -> IidModel {
        IidModel::new(
            Vocabulary::new(["a", "b", "c", "d"]).unwrap(),
            vec![0.5, 0.3, 0.15, 0.05],
            1,
        )
        .unwrap()
    }

    #[test]
    fn truncation_sets() {
        let d = NextTokenDistribution::new(vec![0.5, 0.3, 0.15, 0.05, 0.0]).unwrap();
        assert_eq!(top_k_set(&d, 2), vec![0, 1]);
        assert_eq!(top_k_set(&d, 10), vec![0, 1, 2, 3]);
        assert_eq!(nucleus_set(&d, 0.85), vec![0, 1, 2]);
        assert_eq!(nucleus_set(&d, 1.0), vec![0, 1, 2, 3]);
        assert_eq!(nucleus_set(&d, 0.4), vec![0]);
        let tie = NextTokenDistribution::new(vec![0.25, 0.25, 0.25, 0.25]).unwrap();
        assert_eq!(top_k_set(&tie, 2), vec![0, 1]);
    }

    #[test]
    fn degenerate_model_always_yields_its_sequence() {
        let m = train_ngram(&["abc"], 2, 0.0, 5).unwrap();
        for seed in 0..20 {
            let c = ancestral_sample(&m, seed);
            assert_eq!(c.sequence.text(m.vocab()), "abc");
            assert_eq!(c.log_prob, 0.0);
        }
    }

    #[test]
    fn samplers_are_reproducible() {
        let m = train_ngram(&["abca", "abcb", "bca", "cab", "ab"], 2, 0.1, 8).unwrap();
        for seed in 0..10 {
            assert_eq!(ancestral_sample(&m, seed), ancestral_sample(&m, seed));
            assert_eq!(top_k_sample(&m, 2, seed).unwrap(), top_k_sample(&m, 2, seed).unwrap());
            assert_eq!(nucleus_sample(&m, 0.85, seed).unwrap(), nucleus_sample(&m, 0.85, seed).unwrap());
        }
    }

    #[test]
    fn sample_log_probs_rescore() {
        let m = train_ngram(&["abca", "abcb", "bca", "cab", "ab"], 3, 0.1, 8).unwrap();
        for seed in 0..50 {
            for c in [
                ancestral_sample(&m, seed),
                top_k_sample(&m, 2, seed).unwrap(),
                nucleus_sample(&m, 0.7, seed).unwrap(),
            ] {
                assert_eq!(c.log_prob, sequence_log_prob(&m, &c.sequence).unwrap());
            }
        }
    }

    #[test]
    fn top_one_and_tiny_nucleus_are_greedy() {
        let m = train_ngram(&["abca", "abcb", "bca", "cab", "ab"], 2, 0.1, 8).unwrap();
        let greedy = greedy_decode(&m);
        for seed in 0..20 {
            assert_eq!(top_k_sample(&m, 1, seed).unwrap(), greedy);
            assert_eq!(nucleus_sample(&m, 1e-6, seed).unwrap(), greedy);
        }
    }

    #[test]
    fn full_top_k_reproduces_ancestral_draws() {
        let m = train_ngram(&["abca", "abcb", "bca", "cab", "ab"], 2, 0.1, 8).unwrap();
        let all = m.vocab().outcomes();
        for seed in 0..50 {
            assert_eq!(top_k_sample(&m, all, seed).unwrap(), ancestral_sample(&m, seed));
        }
    }

    #[test]
    fn top_two_renormalizes() {
        let m = four_way();
        let n = 10_000;
        let mut counts = [0usize; 4];
        for seed in 0..n {
            let c = top_k_sample(&m, 2, seed).unwrap();
            counts[c.sequence.interior()[0] as usize] += 1;
        }
        assert_eq!(counts[2] + counts[3], 0);
        let freq = counts[0] as f64 / n as f64;
        // 0.625 ± 3 binomial standard deviations.
        let sd = (0.625f64 * 0.375 / n as f64).sqrt();
        assert!((freq - 0.625).abs() < 3.0 * sd, "{freq}");
    }

    #[test]
    fn nucleus_drops_the_tail() {
        let m = four_way();
        let n = 10_000;
        let mut counts = [0usize; 4];
        for seed in 0..n {
            let c = nucleus_sample(&m, 0.85, seed).unwrap();
            counts[c.sequence.interior()[0] as usize] += 1;
        }
        assert_eq!(counts[3], 0);
        for (i, expected) in [0.5 / 0.95, 0.3 / 0.95, 0.15 / 0.95].into_iter().enumerate() {
            let freq = counts[i] as f64 / n as f64;
            let sd = (expected * (1.0 - expected) / n as f64).sqrt();
            assert!((freq - expected).abs() < 4.0 * sd, "token {i}: {freq} vs {expected}");
        }
    }

    #[test]
    fn coin_heads_frequency() {
        let coin = IidModel::coin(0.6, 1).unwrap();
        let heads = (0..10_000u64)
            .filter(|&s| ancestral_sample(&coin, s).sequence.interior()[0] == 0)
            .count();
        let freq = heads as f64 / 10_000.0;
        assert!((freq - 0.6).abs() < 0.015, "{freq}");
    }

    #[test]
    fn invalid_parameters() {
        let coin = IidModel::coin(0.6, 1).unwrap();
        assert!(top_k_sample(&coin, 0, 1).is_err());
        assert!(nucleus_sample(&coin, 0.0, 1).is_err());
        assert!(nucleus_sample(&coin, 1.5, 1).is_err());
    }
}
