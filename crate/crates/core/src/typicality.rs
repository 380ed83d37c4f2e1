//! Typical sets and local typicality, computed exactly by enumeration.
//!
//! All bands are in nats on total information. For a fixed-length i.i.d.
//! model of length `L`, a per-symbol half-width `ε` corresponds to the total
//! half-width `L·ε`.
//!
//! Local typicality checks every length-`n` window of a string against the
//! marginal distribution of windows at that position: the window is in band
//! when `|−log p(window) − H(window)| ≤ n·ε`, where `H(window)` is the joint
//! entropy of the `n` positions. For variable-length models, strings too
//! short to cover a window position count as one extra outcome of that
//! position's marginal.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::information::exact_entropy;
use crate::lm::{for_each_sequence, validate_sequence, IidModel, LanguageModel, MarkovModel, Sequence, TokenId};

/// Absolute slack on every band edge.
pub const BAND_TOLERANCE: f64 = 1e-9;

/// Default enumeration cap: all binary strings up to length 22.
pub const DEFAULT_CAP: usize = 1 << 22;

fn in_band(information: f64, center: f64, half_width: f64) -> bool {
    (information - center).abs() <= half_width + BAND_TOLERANCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalMember {
    pub text: String,
    pub information: f64,
}

/// The set of strings whose information lies in `[H − ε, H + ε]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalSetReport {
    /// Half-width of the band on total information (nats).
    pub epsilon: f64,
    /// Exact entropy H.
    pub entropy: f64,
    pub band: [f64; 2],
    pub support_size: usize,
    pub member_count: usize,
    pub member_mass: f64,
    /// Mass of the support outside the band.
    pub outside_mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<TypicalMember>>,
}

/// Exact typical set of `model` with total half-width `epsilon`.
pub fn typical_set<M: LanguageModel + ?Sized>(
    model: &M,
    epsilon: f64,
    cap: usize,
    list_members: bool,
) -> Result<TypicalSetReport> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "band half-width must be non-negative, got {epsilon}"
        )));
    }
    let entropy = exact_entropy(model, cap)?.entropy;
    let mut members = list_members.then(Vec::new);
    let (mut member_count, mut member_mass, mut outside_mass) = (0, 0.0, 0.0);
    let support_size = for_each_sequence(model, cap, |interior, lp| {
        let info = -lp;
        if in_band(info, entropy, epsilon) {
            member_count += 1;
            member_mass += lp.exp();
            if let Some(list) = members.as_mut() {
                list.push(TypicalMember {
                    text: model.vocab().decode(interior),
                    information: info,
                });
            }
        } else {
            outside_mass += lp.exp();
        }
    })?;
    Ok(TypicalSetReport {
        epsilon,
        entropy,
        band: [entropy - epsilon, entropy + epsilon],
        support_size,
        member_count,
        member_mass,
        outside_mass,
        members,
    })
}

/// Typical-set mass of a fixed-length i.i.d. process at one length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassAtLength {
    pub length: usize,
    pub epsilon_total: f64,
    pub member_count: usize,
    pub mass: f64,
}

/// Typical-set mass at each length with a per-symbol half-width.
pub fn typical_mass_growth(
    model: &IidModel,
    epsilon_per_symbol: f64,
    lengths: &[usize],
    cap: usize,
) -> Result<Vec<MassAtLength>> {
    lengths
        .iter()
        .map(|&length| {
            let epsilon_total = epsilon_per_symbol * length as f64;
            let report = typical_set(&model.with_length(length), epsilon_total, cap, false)?;
            Ok(MassAtLength {
                length,
                epsilon_total,
                member_count: report.member_count,
                mass: report.member_mass,
            })
        })
        .collect()
}

/// Band check of one window of a string.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowBandCheck {
    /// Zero-based position of the window's first symbol.
    pub start: usize,
    pub order: usize,
    /// Marginal probability of the window's symbols at this position.
    pub marginal: f64,
    /// Joint entropy of the positions covered by the window (nats).
    pub entropy: f64,
    pub in_band: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalTypicality {
    pub windows: Vec<WindowBandCheck>,
    pub locally_typical: bool,
}

#[derive(Debug, Clone)]
struct PositionMarginal {
    probs: HashMap<u64, f64>,
    entropy: f64,
}

/// Exact marginal distributions of every length-`n` window position.
#[derive(Debug, Clone)]
pub struct WindowMarginals {
    order: usize,
    radix: u64,
    positions: Vec<PositionMarginal>,
}

impl WindowMarginals {
    /// Enumerates the support once and accumulates window marginals at every
    /// start position.
    pub fn new<M: LanguageModel + ?Sized>(model: &M, order: usize, cap: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidParameter("window order must be at least 1".into()));
        }
        let radix = model.vocab().len() as u64;
        if (radix as f64).powi(order as i32) >= u64::MAX as f64 / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "windows of order {order} over {radix} symbols are too many to index"
            )));
        }
        let max_len = model.max_length();
        let starts = (max_len + 1).saturating_sub(order);
        let mut tables: Vec<HashMap<u64, f64>> = vec![HashMap::new(); starts];
        let mut short_mass = vec![0.0; starts];
        for_each_sequence(model, cap, |interior, lp| {
            let p = lp.exp();
            for (start, table) in tables.iter_mut().enumerate() {
                match interior.get(start..start + order) {
                    Some(window) => *table.entry(encode(window, radix)).or_insert(0.0) += p,
                    None => short_mass[start] += p,
                }
            }
        })?;
        let positions = tables
            .into_iter()
            .zip(short_mass)
            .map(|(probs, short)| {
                let entropy = probs
                    .values()
                    .chain(std::iter::once(&short))
                    .filter(|&&p| p > 0.0)
                    .map(|&p| -p * p.ln())
                    .sum();
                PositionMarginal { probs, entropy }
            })
            .collect();
        Ok(WindowMarginals {
            order,
            radix,
            positions,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Marginal probability and joint entropy of `window` at `start`.
    pub fn marginal(&self, start: usize, window: &[TokenId]) -> Option<(f64, f64)> {
        let pos = self.positions.get(start)?;
        let p = pos.probs.get(&encode(window, self.radix)).copied().unwrap_or(0.0);
        Some((p, pos.entropy))
    }

    /// Checks every window of `interior`; `epsilon` is per symbol, so each
    /// window gets half-width `order·ε`.
    pub fn check(&self, interior: &[TokenId], epsilon: f64) -> Result<LocalTypicality> {
        if self.order > interior.len() {
            return Err(Error::InvalidParameter(format!(
                "window order {} exceeds the string length {}",
                self.order,
                interior.len()
            )));
        }
        let mut windows = Vec::with_capacity(interior.len() + 1 - self.order);
        for start in 0..=interior.len() - self.order {
            let (marginal, entropy) = self
                .marginal(start, &interior[start..start + self.order])
                .ok_or_else(|| Error::SequenceTooLong {
                    length: interior.len(),
                    max: self.positions.len() + self.order - 1,
                })?;
            windows.push(WindowBandCheck {
                start,
                order: self.order,
                marginal,
                entropy,
                in_band: marginal > 0.0
                    && in_band(-marginal.ln(), entropy, self.order as f64 * epsilon),
            });
        }
        let locally_typical = windows.iter().all(|w| w.in_band);
        Ok(LocalTypicality {
            windows,
            locally_typical,
        })
    }

    /// Same as [`check`](Self::check) without building the window list.
    fn is_typical(&self, interior: &[TokenId], epsilon: f64) -> bool {
        let half_width = self.order as f64 * epsilon;
        (0..=interior.len().saturating_sub(self.order)).all(|start| {
            let pos = &self.positions[start];
            let p = pos
                .probs
                .get(&encode(&interior[start..start + self.order], self.radix))
                .copied()
                .unwrap_or(0.0);
            p > 0.0 && in_band(-p.ln(), pos.entropy, half_width)
        })
    }
}

fn encode(window: &[TokenId], radix: u64) -> u64 {
    window.iter().fold(0u64, |acc, &t| acc * radix + t as u64)
}

/// Local typicality of `y` at window order `n` with per-symbol `epsilon`.
pub fn locally_typical_check<M: LanguageModel + ?Sized>(
    model: &M,
    y: &Sequence,
    n: usize,
    epsilon: f64,
    cap: usize,
) -> Result<LocalTypicality> {
    validate_sequence(model, y)?;
    if n == 0 || n > y.len() {
        return Err(Error::InvalidParameter(format!(
            "window order {n} must be between 1 and the string length {}",
            y.len()
        )));
    }
    WindowMarginals::new(model, n, cap)?.check(y.interior(), epsilon)
}

/// Counts of the local and global typical sets over the whole support.
///
/// The global band is `|I(y) − H| ≤ |y|·ε`, the same per-symbol half-width as
/// the windows. Strings shorter than `n` are never locally typical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypicalityCensus {
    pub order: usize,
    pub epsilon: f64,
    pub entropy: f64,
    pub support_size: usize,
    pub local_count: usize,
    pub local_mass: f64,
    pub global_count: usize,
    pub global_mass: f64,
    /// Globally typical strings that are not locally typical.
    pub global_only: usize,
    /// Locally typical strings that are not globally typical.
    pub local_only: usize,
    /// First globally typical, locally atypical string found.
    pub witness: Option<String>,
}

pub fn typicality_census<M: LanguageModel + ?Sized>(
    model: &M,
    n: usize,
    epsilon: f64,
    cap: usize,
) -> Result<TypicalityCensus> {
    let windows = WindowMarginals::new(model, n, cap)?;
    let entropy = exact_entropy(model, cap)?.entropy;
    let mut census = TypicalityCensus {
        order: n,
        epsilon,
        entropy,
        support_size: 0,
        local_count: 0,
        local_mass: 0.0,
        global_count: 0,
        global_mass: 0.0,
        global_only: 0,
        local_only: 0,
        witness: None,
    };
    census.support_size = for_each_sequence(model, cap, |interior, lp| {
        let p = lp.exp();
        let local = interior.len() >= n && windows.is_typical(interior, epsilon);
        let global = in_band(-lp, entropy, interior.len() as f64 * epsilon);
        if local {
            census.local_count += 1;
            census.local_mass += p;
        }
        if global {
            census.global_count += 1;
            census.global_mass += p;
        }
        match (local, global) {
            (false, true) => {
                census.global_only += 1;
                if census.witness.is_none() {
                    census.witness = Some(model.vocab().decode(interior));
                }
            }
            (true, false) => census.local_only += 1,
            _ => {}
        }
    })?;
    Ok(census)
}

/// Result of checking the local-to-global inclusion at one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionAtLength {
    pub length: usize,
    pub entropy: f64,
    /// Strings locally typical at orders `m` and `m − 1`.
    pub locally_typical: usize,
    /// Bound on `|I(y) − H|` implied by local typicality (nats).
    pub derived_tolerance: f64,
    /// Largest `|I(y) − H|` over the locally typical strings.
    pub empirical_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub length: usize,
    pub text: String,
    pub deviation: f64,
    pub derived_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InclusionReport {
    pub order: usize,
    pub epsilon: f64,
    pub lengths: Vec<InclusionAtLength>,
    pub counterexample: Option<Counterexample>,
}

impl InclusionReport {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Bound on `|I(y) − H|` for a length-`length` string of an order-`order`
/// chain that is locally typical at orders `order` and `order − 1`.
///
/// By the chain rule `I(y)` is the sum of the `L − m + 1` order-`m` window
/// informations minus the `L − m` interior order-`(m − 1)` window informations,
/// and `H` decomposes the same way over window entropies, so the window
/// deviations add up.
pub fn derived_inclusion_tolerance(order: usize, length: usize, epsilon: f64) -> f64 {
    let m = order;
    let full = (length + 1 - m) * m;
    let overlap = (length - m) * (m - 1);
    (full + overlap) as f64 * epsilon
}

/// Exhaustively checks, for every length from `order` to `max_length`, that
/// strings locally typical at orders `m` and `m − 1` are globally typical
/// within the derived tolerance. Stops at the first violation.
pub fn verify_local_global_inclusion(
    model: &MarkovModel,
    max_length: usize,
    epsilon: f64,
    cap: usize,
) -> Result<InclusionReport> {
    let m = model.order();
    let mut report = InclusionReport {
        order: m,
        epsilon,
        lengths: Vec::new(),
        counterexample: None,
    };
    for length in m.max(1)..=max_length {
        let chain = model.with_length(length);
        let upper = WindowMarginals::new(&chain, m, cap)?;
        let lower = if m > 1 {
            Some(WindowMarginals::new(&chain, m - 1, cap)?)
        } else {
            None
        };
        let entropy = exact_entropy(&chain, cap)?.entropy;
        let derived = derived_inclusion_tolerance(m, length, epsilon);
        let mut at = InclusionAtLength {
            length,
            entropy,
            locally_typical: 0,
            derived_tolerance: derived,
            empirical_tolerance: 0.0,
        };
        let mut violation = None;
        for_each_sequence(&chain, cap, |interior, lp| {
            let local = upper.is_typical(interior, epsilon)
                && lower.as_ref().is_none_or(|w| w.is_typical(interior, epsilon));
            if !local {
                return;
            }
            at.locally_typical += 1;
            let deviation = (-lp - entropy).abs();
            at.empirical_tolerance = at.empirical_tolerance.max(deviation);
            if deviation > derived + BAND_TOLERANCE && violation.is_none() {
                violation = Some(Counterexample {
                    length,
                    text: chain.vocab().decode(interior),
                    deviation,
                    derived_tolerance: derived,
                });
            }
        })?;
        report.lengths.push(at);
        if violation.is_some() {
            report.counterexample = violation;
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lm::{TableModel, Vocabulary};

    fn binomial(n: u64, k: u64) -> f64 {
        (1..=k).map(|i| (n + 1 - i) as f64 / i as f64).product()
    }

    #[test]
    fn uniform_table_is_all_typical() {
        let t = TableModel::uniform(Vocabulary::new(["a", "b"]).unwrap(), &["a", "b", "ab", "ba"]).unwrap();
        for eps in [0.0, 0.3] {
            let r = typical_set(&t, eps, 100, true).unwrap();
            assert_eq!(r.member_count, 4);
            assert!((r.member_mass - 1.0).abs() < 1e-12);
            assert_eq!(r.members.unwrap().len(), 4);
        }
    }

    #[test]
    fn coin_typical_set_matches_binomial_oracle() {
        let coin = IidModel::coin(0.6, 10).unwrap();
        let r = typical_set(&coin, 0.5, DEFAULT_CAP, false).unwrap();
        // I(y) = 9.163 − 0.4055·heads, so the band admits 5, 6 or 7 heads.
        let count: f64 = [5, 6, 7].iter().map(|&h| binomial(10, h)).sum();
        let mass: f64 = [5, 6, 7]
            .iter()
            .map(|&h| binomial(10, h) * 0.6f64.powi(h as i32) * 0.4f64.powi(10 - h as i32))
            .sum();
        assert_eq!(r.member_count, 582);
        assert_eq!(r.member_count as f64, count);
        assert!((r.member_mass - mass).abs() < 1e-12);
        assert!((r.member_mass + r.outside_mass - 1.0).abs() < 1e-6);
    }

    #[test]
    fn zero_width_band_on_biased_coin() {
        // 0.6·L heads is not an integer at L = 3, so no string sits at H.
        let coin = IidModel::coin(0.6, 3).unwrap();
        let r = typical_set(&coin, 0.0, DEFAULT_CAP, false).unwrap();
        assert_eq!(r.member_count, 0);
        assert_eq!(r.member_mass, 0.0);
        // At L = 10 the strings with exactly 6 heads carry information H.
        let coin = IidModel::coin(0.6, 10).unwrap();
        let r = typical_set(&coin, 0.0, DEFAULT_CAP, false).unwrap();
        assert_eq!(r.member_count as f64, binomial(10, 6));
    }

    #[test]
    fn fair_coin_mass_is_one_at_every_length() {
        let fair = IidModel::coin(0.5, 1).unwrap();
        for m in typical_mass_growth(&fair, 0.01, &[1, 4, 9], DEFAULT_CAP).unwrap() {
            assert!((m.mass - 1.0).abs() < 1e-9, "{m:?}");
        }
    }

    #[test]
    fn wide_band_covers_everything() {
        let coin = IidModel::coin(0.6, 1).unwrap();
        for m in typical_mass_growth(&coin, 0.2433, &[1, 3, 8], DEFAULT_CAP).unwrap() {
            assert!((m.mass - 1.0).abs() < 1e-9, "{m:?}");
        }
    }

    #[test]
    fn mass_grows_with_length() {
        let coin = IidModel::coin(0.6, 1).unwrap();
        let m = typical_mass_growth(&coin, 0.05, &[5, 12], DEFAULT_CAP).unwrap();
        assert!(m[1].mass > m[0].mass, "{m:?}");
        assert!((m[0].mass - 0.3456).abs() < 1e-12);
    }

    #[test]
    fn uniform_iid_is_locally_typical() {
        let u = IidModel::uniform(&["a", "b", "c"], 4).unwrap();
        let y = Sequence::parse(u.vocab(), "abca").unwrap();
        for n in 1..=4 {
            let r = locally_typical_check(&u, &y, n, 0.0, DEFAULT_CAP).unwrap();
            assert!(r.locally_typical, "order {n}: {r:?}");
            assert_eq!(r.windows.len(), 5 - n);
            for w in r.windows {
                assert!((w.marginal - 3f64.powi(-(n as i32))).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn biased_coin_unigram_windows() {
        let coin = IidModel::coin(0.6, 5).unwrap();
        let y = Sequence::parse(coin.vocab(), "HTHHT").unwrap();
        let narrow = locally_typical_check(&coin, &y, 1, 0.1, DEFAULT_CAP).unwrap();
        assert!(narrow.windows.iter().all(|w| !w.in_band));
        let wide = locally_typical_check(&coin, &y, 1, 0.25, DEFAULT_CAP).unwrap();
        assert!(wide.locally_typical);
        let h1 = -(0.6f64 * 0.6f64.ln() + 0.4 * 0.4f64.ln());
        assert!((wide.windows[0].entropy - h1).abs() < 1e-12);
        assert!((wide.windows[0].marginal - 0.6).abs() < 1e-12);
    }

    #[test]
    fn window_order_must_fit() {
        let coin = IidModel::coin(0.6, 3).unwrap();
        let y = Sequence::parse(coin.vocab(), "HT").unwrap();
        assert!(locally_typical_check(&coin, &y, 3, 0.1, 100).is_err());
        assert!(locally_typical_check(&coin, &y, 0, 0.1, 100).is_err());
    }

    #[test]
    fn full_window_reduces_to_global_membership() {
        let coin = IidModel::coin(0.6, 8).unwrap();
        let eps_total = 0.7;
        let global = typical_set(&coin, eps_total, DEFAULT_CAP, true).unwrap();
        let members: std::collections::HashSet<String> =
            global.members.unwrap().into_iter().map(|m| m.text).collect();
        let windows = WindowMarginals::new(&coin, 8, DEFAULT_CAP).unwrap();
        for_each_sequence(&coin, DEFAULT_CAP, |interior, _| {
            let local = windows.check(interior, eps_total / 8.0).unwrap().locally_typical;
            assert_eq!(local, members.contains(&coin.vocab().decode(interior)));
        })
        .unwrap();
    }

    #[test]
    fn variable_length_models_count_short_strings_as_an_outcome() {
        let vocab = Vocabulary::new(["a", "b"]).unwrap();
        let t = TableModel::new(
            vocab.clone(),
            vec![
                (Sequence::parse(&vocab, "a").unwrap(), 0.5),
                (Sequence::parse(&vocab, "ab").unwrap(), 0.5),
            ],
        )
        .unwrap();
        let w = WindowMarginals::new(&t, 1, 10).unwrap();
        let (p, h) = w.marginal(1, &[1]).unwrap();
        assert_eq!(p, 0.5);
        assert!((h - 2f64.ln()).abs() < 1e-12);
        let (p0, h0) = w.marginal(0, &[0]).unwrap();
        assert_eq!((p0, h0), (1.0, 0.0));
    }

    #[test]
    fn derived_tolerance_formula() {
        // i.i.d.: one window per symbol.
        assert_eq!(derived_inclusion_tolerance(1, 7, 0.1), 7.0 * 0.1);
        // bigram, L = 4: three 2-windows and two interior 1-windows.
        assert!((derived_inclusion_tolerance(2, 4, 0.1) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn uniform_chain_inclusion_is_exact() {
        let vocab = Vocabulary::new(["0", "1"]).unwrap();
        let chain = MarkovModel::bigram(vocab, vec![0.5, 0.5], vec![vec![0.5, 0.5]; 2], 2).unwrap();
        let r = verify_local_global_inclusion(&chain, 8, 0.05, DEFAULT_CAP).unwrap();
        assert!(r.holds());
        assert_eq!(r.lengths.len(), 7);
        for at in &r.lengths {
            assert_eq!(at.locally_typical, 1 << at.length);
            assert!(at.empirical_tolerance < 1e-9);
        }
    }

    #[test]
    fn uniform_iid_inclusion_holds() {
        let vocab = Vocabulary::new(["0", "1", "2"]).unwrap();
        let chain = MarkovModel::new(vocab, 1, 1, vec![(vec![], vec![1.0 / 3.0; 3])]).unwrap();
        assert!(verify_local_global_inclusion(&chain, 6, 0.0, DEFAULT_CAP).unwrap().holds());
    }
}
