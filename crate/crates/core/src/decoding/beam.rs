use std::cmp::Ordering;

use super::Candidate;
use crate::error::{Error, Result};
use crate::lm::{LanguageModel, Sequence, TokenId};

/// Argmax at every step, ties to the lowest token id.
pub fn greedy_decode<M: LanguageModel + ?Sized>(model: &M) -> Candidate {
    let eos = model.vocab().eos_id();
    let mut prefix = Vec::new();
    let mut log_prob = 0.0;
    loop {
        let dist = model.next(&prefix);
        let token = dist.argmax();
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

#[derive(Debug, Clone)]
struct Hypothesis {
    tokens: Vec<TokenId>,
    log_prob: f64,
    /// Selection score: the log-probability minus accumulated diversity
    /// penalties.
    score: f64,
}

fn by_score(a: &Hypothesis, b: &Hypothesis) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.tokens.cmp(&b.tokens))
}

/// One beam of fixed width with its pool of finished hypotheses.
struct Beam {
    width: usize,
    active: Vec<Hypothesis>,
    finished: Vec<Hypothesis>,
}

impl Beam {
    fn new(width: usize) -> Self {
        Beam {
            width,
            active: vec![Hypothesis {
                tokens: Vec::new(),
                log_prob: 0.0,
                score: 0.0,
            }],
            finished: Vec::new(),
        }
    }

    fn done(&self) -> bool {
        if self.active.is_empty() {
            return true;
        }
        // Scores never increase, so once the best live hypothesis falls below
        // the width-th finished one nothing can change the result.
        if self.finished.len() < self.width {
            return false;
        }
        let best_active = self
            .active
            .iter()
            .map(|h| h.score)
            .fold(f64::NEG_INFINITY, f64::max);
        best_active < self.finished[self.width - 1].score
    }

    /// Expands every live hypothesis by every positive-probability token and
    /// keeps the `width` best expansions. Expansions ending in EOS retire into
    /// the finished pool. Returns the tokens chosen at this step.
    fn step<M, P>(&mut self, model: &M, penalty: P) -> Vec<TokenId>
    where
        M: LanguageModel + ?Sized,
        P: Fn(TokenId) -> f64,
    {
        let eos = model.vocab().eos_id();
        let mut expansions = Vec::new();
        for hyp in &self.active {
            let dist = model.next(&hyp.tokens);
            for (t, &p) in dist.probs().iter().enumerate() {
                if p <= 0.0 {
                    continue;
                }
                let t = t as TokenId;
                let lp = p.ln();
                let mut tokens = Vec::with_capacity(hyp.tokens.len() + 1);
                tokens.extend_from_slice(&hyp.tokens);
                tokens.push(t);
                expansions.push(Hypothesis {
                    tokens,
                    log_prob: hyp.log_prob + lp,
                    score: hyp.score + lp - penalty(t),
                });
            }
        }
        expansions.sort_by(by_score);
        expansions.truncate(self.width);

        let chosen = expansions.iter().map(|h| *h.tokens.last().unwrap()).collect();
        self.active.clear();
        for mut hyp in expansions {
            if *hyp.tokens.last().unwrap() == eos {
                hyp.tokens.pop();
                self.finished.push(hyp);
            } else {
                self.active.push(hyp);
            }
        }
        self.finished.sort_by(by_score);
        chosen
    }

    fn into_candidates(mut self) -> Vec<Candidate> {
        self.finished.sort_by(by_score);
        self.finished
            .into_iter()
            .take(self.width)
            .map(|h| Candidate {
                sequence: Sequence::from_interior_unchecked(h.tokens),
                log_prob: h.log_prob,
            })
            .collect()
    }
}

/// Width-`k` beam search over raw total log-probability.
///
/// Returns up to `k` finished hypotheses, best first; ties are ordered
/// lexicographically by token id.
pub fn beam_search<M: LanguageModel + ?Sized>(model: &M, k: usize) -> Result<Vec<Candidate>> {
    if k == 0 {
        return Err(Error::InvalidParameter("beam width must be at least 1".into()));
    }
    let mut beam = Beam::new(k);
    while !beam.done() {
        beam.step(model, |_| 0.0);
    }
    Ok(beam.into_candidates())
}

/// Diverse beam search with a Hamming diversity term.
///
/// `groups` beams of width `k / groups` advance in lockstep. At each step a
/// group scores token `t` as `log q(t | ·) − λ·c(t)`, where `c(t)` counts how
/// often earlier groups selected `t` at this step. Returned candidates are
/// grouped in group order, each group best first by its penalized score; the
/// stored log-probability is always the unpenalized one.
pub fn diverse_beam_search<M: LanguageModel + ?Sized>(
    model: &M,
    k: usize,
    groups: usize,
    lambda: f64,
) -> Result<Vec<Candidate>> {
    if k == 0 || groups == 0 || groups > k || !k.is_multiple_of(groups) {
        return Err(Error::InvalidParameter(format!(
            "group count {groups} must divide beam width {k}"
        )));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "diversity penalty must be non-negative, got {lambda}"
        )));
    }
    let width = k / groups;
    let mut beams: Vec<Beam> = (0..groups).map(|_| Beam::new(width)).collect();
    let mut counts = vec![0usize; model.vocab().outcomes()];
    // No early stopping here: a group's selections keep penalizing later
    // groups until its hypotheses all finish.
    while beams.iter().any(|b| !b.active.is_empty()) {
        counts.iter_mut().for_each(|c| *c = 0);
        for beam in beams.iter_mut().filter(|b| !b.active.is_empty()) {
            let chosen = beam.step(model, |t| lambda * counts[t as usize] as f64);
            for t in chosen {
                counts[t as usize] += 1;
            }
        }
    }
    Ok(beams.into_iter().flat_map(Beam::into_candidates).collect())
}
