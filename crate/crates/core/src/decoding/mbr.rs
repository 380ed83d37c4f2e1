use std::collections::{HashMap, HashSet};

use super::sampling::{all_outcomes, sample_from};
use super::Candidate;
use crate::error::{Error, Result};
use crate::lm::{sequence_log_prob, LanguageModel, Sequence, TokenId};
use crate::rng::seeded;

/// Minimum Bayes risk decoding.
///
/// Draws `samples` ancestral strings as pseudo-references. The candidate set
/// is the deduplicated samples plus `extras`; the winner maximizes mean
/// `utility(candidate, reference)` over all references (duplicates included).
/// Ties go to the higher log-probability, then to the lexicographically
/// smaller sequence.
pub fn mbr_decode<M, U>(
    model: &M,
    samples: usize,
    seed: u64,
    utility: U,
    extras: &[Sequence],
) -> Result<Candidate>
where
    M: LanguageModel + ?Sized,
    U: Fn(&Sequence, &Sequence) -> f64,
{
    if samples == 0 {
        return Err(Error::InvalidParameter("MBR needs at least one sample".into()));
    }
    let mut rng = seeded(seed);
    let references: Vec<Candidate> = (0..samples)
        .map(|_| sample_from(model, &mut rng, all_outcomes))
        .collect();

    let mut seen = HashSet::new();
    let mut candidates = Vec::new();
    for c in &references {
        if seen.insert(c.sequence.clone()) {
            candidates.push(c.clone());
        }
    }
    for extra in extras {
        if seen.insert(extra.clone()) {
            candidates.push(Candidate {
                sequence: extra.clone(),
                log_prob: sequence_log_prob(model, extra)?,
            });
        }
    }

    let references: Vec<Sequence> = references.into_iter().map(|c| c.sequence).collect();
    Ok(mbr_select(candidates, &references, utility).expect("at least one sample was drawn"))
}

/// Picks the candidate with the highest mean utility against `references`,
/// with the tie-breaks of [`mbr_decode`]. `None` when there are no candidates.
pub fn mbr_select<U>(candidates: Vec<Candidate>, references: &[Sequence], utility: U) -> Option<Candidate>
where
    U: Fn(&Sequence, &Sequence) -> f64,
{
    let mut best: Option<(f64, Candidate)> = None;
    for cand in candidates {
        let expected = references
            .iter()
            .map(|r| utility(&cand.sequence, r))
            .sum::<f64>()
            / references.len() as f64;
        let better = match &best {
            None => true,
            Some((u, b)) => expected
                .total_cmp(u)
                .then(cand.log_prob.total_cmp(&b.log_prob))
                .then(b.sequence.cmp(&cand.sequence))
                .is_gt(),
        };
        if better {
            best = Some((expected, cand));
        }
    }
    best.map(|(_, c)| c)
}

fn ngram_counts(tokens: &[TokenId], n: usize) -> HashMap<&[TokenId], usize> {
    let mut counts = HashMap::new();
    for w in tokens.windows(n) {
        *counts.entry(w).or_insert(0) += 1;
    }
    counts
}

/// Mean clipped n-gram precision of `a` against `b` for n = 1..=max_n.
///
/// Orders longer than `a` are skipped. An empty `a` scores 1 against an empty
/// `b` and 0 otherwise.
pub fn utility_ngram_overlap(a: &Sequence, b: &Sequence, max_n: usize) -> f64 {
    let (a, b) = (a.interior(), b.interior());
    if a.is_empty() {
        return if b.is_empty() { 1.0 } else { 0.0 };
    }
    let mut total = 0.0;
    let mut orders = 0;
    for n in 1..=max_n.min(a.len()) {
        let ours = ngram_counts(a, n);
        let theirs = ngram_counts(b, n);
        let clipped: usize = ours
            .iter()
            .map(|(g, &c)| c.min(theirs.get(g).copied().unwrap_or(0)))
            .sum();
        total += clipped as f64 / (a.len() + 1 - n) as f64;
        orders += 1;
    }
    total / orders as f64
}
