//! Ground-truth SC error and the per-question bounds.
//!
//! `exact_mode_error` sums multinomial probabilities over every count vector,
//! `mc_mode_error` simulates the vote, `thm1_bound` is the exponential margin
//! bound `exp(-x m)` and `kl_lower_bound_samples` is the KL sample-complexity
//! lower bound for any δ-correct stopping rule.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::answer_model::AnswerDist;
use crate::error::{Error, Result};
use crate::rng::substream;
use crate::specfun::ln_factorial;

/// Largest number of count vectors `exact_mode_error` will enumerate.
pub const ENUMERATION_LIMIT: u128 = 250_000;

/// Reps simulated per Monte Carlo substream.
const MC_BLOCK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimateMethod {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    pub value: f64,
    pub stderr: f64,
    pub method: EstimateMethod,
}

impl ErrorEstimate {
    fn exact(value: f64) -> Self {
        Self {
            value: value.clamp(0.0, 1.0),
            stderr: 0.0,
            method: EstimateMethod::Exact,
        }
    }
}

/// Number of count vectors of `x` votes over `support` answers.
pub fn composition_count(x: u64, support: usize) -> u128 {
    if support == 0 {
        return 0;
    }
    let k = (support - 1) as u128;
    let n = x as u128 + k;
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) / (i + 1);
        if c > u64::MAX as u128 {
            return c;
        }
    }
    c
}

/// Probability that the empirical mode of `x` draws differs from the mode
/// (index 0) of `dist`, with random tie-breaking.
///
/// A count vector whose maximum is shared by `k` answers costs `(k-1)/k` when
/// the true mode is among them and 1 otherwise.
pub fn exact_mode_error(dist: &AnswerDist, x: u64) -> Result<ErrorEstimate> {
    if x == 0 {
        return Err(Error::Domain("exact_mode_error needs x >= 1".into()));
    }
    let s = dist.positive_support();
    if s == 1 {
        return Ok(ErrorEstimate::exact(0.0));
    }
    let compositions = composition_count(x, s);
    if compositions > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            compositions,
            limit: ENUMERATION_LIMIT,
        });
    }
    let ln_p: Vec<f64> = dist.probs()[..s].iter().map(|p| p.ln()).collect();
    let ln_fact: Vec<f64> = (0..=x).map(ln_factorial).collect();
    let mut counts = vec![0u64; s];
    let mut err = 0.0;
    enumerate(
        &mut counts,
        0,
        x,
        ln_fact[x as usize],
        &ln_p,
        &ln_fact,
        &mut err,
    );
    Ok(ErrorEstimate::exact(err))
}

fn enumerate(
    counts: &mut [u64],
    pos: usize,
    remaining: u64,
    ln_w: f64,
    ln_p: &[f64],
    ln_fact: &[f64],
    err: &mut f64,
) {
    let last = counts.len() - 1;
    if pos == last {
        counts[pos] = remaining;
        let ln_prob = ln_w + remaining as f64 * ln_p[pos] - ln_fact[remaining as usize];
        let max = *counts.iter().max().expect("non-empty");
        let ties = counts.iter().filter(|&&c| c == max).count();
        let cost = if counts[0] == max {
            (ties - 1) as f64 / ties as f64
        } else {
            1.0
        };
        if cost > 0.0 {
            *err += cost * ln_prob.exp();
        }
        return;
    }
    for n in 0..=remaining {
        counts[pos] = n;
        let w = ln_w + n as f64 * ln_p[pos] - ln_fact[n as usize];
        enumerate(counts, pos + 1, remaining - n, w, ln_p, ln_fact, err);
    }
}

/// Draw a multinomial count vector by sequential conditional binomials.
pub(crate) fn sample_counts<R: Rng + ?Sized>(
    probs: &[f64],
    x: u64,
    rng: &mut R,
    out: &mut [u64],
) {
    let mut remaining = x;
    let mut mass = 1.0;
    let last = probs.len() - 1;
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            out[i] = 0;
            continue;
        }
        if i == last {
            out[i] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
        let k = Binomial::new(remaining, q)
            .expect("probability clamped to [0,1]")
            .sample(rng);
        out[i] = k;
        remaining -= k;
        mass -= p;
    }
}

/// Mode of a raw count vector with uniform tie-breaking.
pub(crate) fn mode_of_counts<R: Rng + ?Sized>(counts: &[u64], rng: &mut R) -> usize {
    let max = *counts.iter().max().expect("non-empty counts");
    let ties = counts.iter().filter(|&&c| c == max).count();
    let pick = if ties == 1 { 0 } else { rng.random_range(0..ties) };
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == max)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("pick < ties")
}

/// Monte Carlo estimate of the mode error from `reps` simulated votes.
///
/// Reps are split into fixed blocks, each with its own substream of `seed`,
/// so the value depends only on `(seed, reps)`.
pub fn mc_mode_error(dist: &AnswerDist, x: u64, reps: u64, seed: u64) -> Result<ErrorEstimate> {
    if reps == 0 {
        return Err(Error::Domain("mc_mode_error needs reps >= 1".into()));
    }
    if x == 0 {
        return Err(Error::Domain("mc_mode_error needs x >= 1".into()));
    }
    let s = dist.positive_support();
    let blocks = reps.div_ceil(MC_BLOCK);
    let failures: u64 = if s == 1 {
        0
    } else {
        let probs = &dist.probs()[..s];
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let n = MC_BLOCK.min(reps - b * MC_BLOCK);
                let mut rng = substream(seed, b);
                let mut counts = vec![0u64; s];
                let mut fails = 0u64;
                for _ in 0..n {
                    sample_counts(probs, x, &mut rng, &mut counts);
                    if mode_of_counts(&counts, &mut rng) != 0 {
                        fails += 1;
                    }
                }
                fails
            })
            .collect::<Vec<_>>()
            .into_iter()
            .sum()
    };
    let v = failures as f64 / reps as f64;
    Ok(ErrorEstimate {
        value: v,
        stderr: (v * (1.0 - v) / reps as f64).sqrt(),
        method: EstimateMethod::MonteCarlo,
    })
}

/// Exact when enumeration is feasible, Monte Carlo otherwise.
pub fn mode_error(dist: &AnswerDist, x: u64, reps: u64, seed: u64) -> Result<ErrorEstimate> {
    match exact_mode_error(dist, x) {
        Err(Error::TooLarge { .. }) => mc_mode_error(dist, x, reps, seed),
        other => other,
    }
}

/// `exp(-x m)`: the exponential margin bound with the vanishing correction dropped.
pub fn thm1_bound(dist: &AnswerDist, x: u64) -> f64 {
    (-(x as f64) * dist.margin()).exp()
}

/// `KL(p || q)` over entries with `p_i > 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / qi).ln())
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    /// Lower bound on the expected number of samples.
    pub samples: f64,
    /// Smallest KL to a distribution whose mode differs.
    pub kl: f64,
    /// Set when `ln(1/(2.4δ)) <= 0` and the bound is vacuous.
    pub degenerate: bool,
}

/// `ln(1/(2.4δ)) / min_ρ KL(μ, ρ)` over `ρ` with a flipped mode.
///
/// The minimizer averages the mode with one rival answer and leaves every
/// other entry unchanged; the minimum runs over the rival.
pub fn kl_lower_bound_samples(dist: &AnswerDist, delta: f64) -> Result<LowerBound> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0,1), got {delta}")));
    }
    if !dist.has_unique_mode() {
        return Err(Error::Domain("mode is not unique".into()));
    }
    let kl = min_flip_kl(dist);
    let log_factor = (1.0 / (2.4 * delta)).ln();
    if log_factor <= 0.0 {
        return Ok(LowerBound {
            samples: 0.0,
            kl,
            degenerate: true,
        });
    }
    Ok(LowerBound {
        samples: log_factor / kl,
        kl,
        degenerate: false,
    })
}

fn min_flip_kl(dist: &AnswerDist) -> f64 {
    // Rivals include zero-probability labels: moving half the mode's mass
    // onto one of them is also a flip.
    let p = dist.probs();
    let mut rho = p.to_vec();
    (1..p.len())
        .map(|j| {
            let avg = 0.5 * (p[0] + p[j]);
            rho[0] = avg;
            rho[j] = avg;
            let kl = kl_divergence(p, &rho);
            rho[0] = p[0];
            rho[j] = p[j];
            kl
        })
        .fold(f64::INFINITY, f64::min)
}
