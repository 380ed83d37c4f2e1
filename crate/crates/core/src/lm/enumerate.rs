use super::{validate_sequence, LanguageModel, Sequence, TokenId};
use crate::error::{Error, Result};

/// Chain-rule log-probability of `y` in nats, including the EOS step.
///
/// Returns `-inf` when some step has zero probability.
pub fn sequence_log_prob<M: LanguageModel + ?Sized>(model: &M, y: &Sequence) -> Result<f64> {
    validate_sequence(model, y)?;
    let interior = y.interior();
    let mut total = 0.0;
    for t in 0..=interior.len() {
        let next = interior.get(t).copied().unwrap_or(model.vocab().eos_id());
        total += model.next(&interior[..t]).prob(next).ln();
    }
    Ok(total)
}

/// Depth-first walk over every sequence with positive probability.
///
/// `visit` receives the interior tokens and the log-probability of each
/// complete sequence. Zero-probability branches are pruned. Returns the number
/// of sequences visited, or [`Error::SupportTooLarge`] as soon as more than
/// `cap` sequences are found (the visitor has then seen the first `cap`).
pub fn for_each_sequence<M, F>(model: &M, cap: usize, mut visit: F) -> Result<usize>
where
    M: LanguageModel + ?Sized,
    F: FnMut(&[TokenId], f64),
{
    if cap == 0 {
        return Err(Error::InvalidParameter("enumeration cap must be at least 1".into()));
    }
    let mut prefix = Vec::with_capacity(model.max_length());
    let mut count = 0;
    walk(model, cap, &mut prefix, 0.0, &mut count, &mut visit)?;
    Ok(count)
}

fn walk<M, F>(
    model: &M,
    cap: usize,
    prefix: &mut Vec<TokenId>,
    log_prob: f64,
    count: &mut usize,
    visit: &mut F,
) -> Result<()>
where
    M: LanguageModel + ?Sized,
    F: FnMut(&[TokenId], f64),
{
    let dist = model.next(prefix);
    let eos = model.vocab().eos_id();
    for (token, &p) in dist.probs().iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let lp = log_prob + p.ln();
        if token as TokenId == eos {
            *count += 1;
            if *count > cap {
                return Err(Error::SupportTooLarge {
                    cap,
                    reached: *count,
                });
            }
            visit(prefix, lp);
        } else {
            prefix.push(token as TokenId);
            walk(model, cap, prefix, lp, count, visit)?;
            prefix.pop();
        }
    }
    Ok(())
}

/// Collects the full support as `(sequence, log-probability)` pairs in
/// depth-first order.
pub fn enumerate_support<M: LanguageModel + ?Sized>(
    model: &M,
    cap: usize,
) -> Result<Vec<(Sequence, f64)>> {
    let mut out = Vec::new();
    for_each_sequence(model, cap, |interior, lp| {
        out.push((Sequence::from_interior_unchecked(interior.to_vec()), lp))
    })?;
    Ok(out)
}
