use rand::Rng;

use super::{EscConfig, KRule, StoppingConfig};
use crate::answer_model::{AnswerDist, EmpiricalCounts};
use crate::specfun::{beta_pdf, ln_beta_pdf_half, ln_reg_inc_beta_half, reg_inc_beta_half, BetaParams};

fn shapes(c: &EmpiricalCounts) -> BetaParams {
    BetaParams::from_counts(c.n1(), c.n2())
}

/// ASC statistic `I_{1/2}(n1 + 1, n2 + 1)`; smaller means more confident.
pub fn asc_confidence(c: &EmpiricalCounts) -> f64 {
    reg_inc_beta_half(shapes(c))
}

pub fn ln_asc_statistic(c: &EmpiricalCounts) -> f64 {
    ln_reg_inc_beta_half(shapes(c))
}

/// PPR-1v1 statistic `(K − 1) Beta(1/2; n1 + 1, n2 + 1)` with `K = max(2, K̂)`.
///
/// With fewer than two samples the statistic is `+∞`.
pub fn ppr_confidence(c: &EmpiricalCounts) -> f64 {
    ppr_confidence_with(c, KRule::Max)
}

pub fn ppr_confidence_with(c: &EmpiricalCounts, rule: KRule) -> f64 {
    if c.total() <= 1 {
        return f64::INFINITY;
    }
    let k = rule.effective_k(c.distinct());
    (k as f64 - 1.0) * beta_pdf(0.5, shapes(c)).expect("1/2 lies in [0,1]")
}

pub fn ln_ppr_statistic(c: &EmpiricalCounts, rule: KRule) -> f64 {
    if c.total() <= 1 {
        return f64::INFINITY;
    }
    let k = rule.effective_k(c.distinct());
    if k <= 1 {
        return f64::NEG_INFINITY;
    }
    (k as f64 - 1.0).ln() + ln_beta_pdf_half(shapes(c))
}

pub fn ppr_stop(c: &EmpiricalCounts, cfg: &StoppingConfig) -> bool {
    c.total() >= 2 && ppr_confidence_with(c, cfg.k_rule) <= cfg.delta
}

pub fn asc_stop(c: &EmpiricalCounts, cfg: &StoppingConfig) -> bool {
    c.total() >= 1 && asc_confidence(c) <= cfg.tau
}

#[derive(Debug, Clone, PartialEq)]
pub struct PprOutcome {
    pub prediction: usize,
    pub samples: u64,
    pub capped: bool,
}

/// Sample one question until `ppr_stop` fires or the configured cap is hit.
pub fn run_ppr_uncapped<R: Rng + ?Sized>(
    dist: &AnswerDist,
    cfg: &StoppingConfig,
    rng: &mut R,
) -> PprOutcome {
    let cap = cfg.max_per_question.unwrap_or(u64::MAX);
    let mut counts = EmpiricalCounts::new(dist.len());
    while counts.total() < cap {
        counts.add(dist.draw_index(rng));
        if ppr_stop(&counts, cfg) {
            break;
        }
    }
    let capped = !ppr_stop(&counts, cfg);
    PprOutcome {
        prediction: counts.mode(rng).expect("at least one sample"),
        samples: counts.total(),
        capped,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscOutcome {
    pub prediction: usize,
    pub samples: u64,
    pub windows: u64,
    pub counts: EmpiricalCounts,
}

/// Early-stopping SC: draw windows of `w` until one is unanimous or the cap
/// is reached, then predict the mode of every drawn sample.
pub fn esc_run<R: Rng + ?Sized>(q: &AnswerDist, cfg: &EscConfig, rng: &mut R) -> EscOutcome {
    let mut counts = EmpiricalCounts::new(q.len());
    let mut windows = 0;
    while counts.total() < cfg.max_per_question {
        let size = cfg.window.min(cfg.max_per_question - counts.total());
        let first = q.draw_index(rng);
        counts.add(first);
        let mut unanimous = true;
        for _ in 1..size {
            let d = q.draw_index(rng);
            unanimous &= d == first;
            counts.add(d);
        }
        windows += 1;
        if unanimous && size == cfg.window {
            break;
        }
    }
    EscOutcome {
        prediction: counts.mode(rng).expect("at least one window"),
        samples: counts.total(),
        windows,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use approx::assert_relative_eq;

    fn counts(n1: u64, n2: u64) -> EmpiricalCounts {
        EmpiricalCounts::from_counts(vec![n1, n2])
    }

    #[test]
    fn asc_examples() {
        assert_relative_eq!(asc_confidence(&counts(3, 0)), 0.0625, max_relative = 1e-14);
        assert_eq!(asc_confidence(&counts(4, 4)), 0.5);
        assert_eq!(asc_confidence(&counts(0, 0)), 0.5);
    }

    #[test]
    fn asc_decreases_with_n1() {
        for n2 in 0..20 {
            for n1 in n2..60 {
                assert!(asc_confidence(&counts(n1 + 1, n2)) < asc_confidence(&counts(n1, n2)));
            }
        }
    }

    #[test]
    fn ppr_examples() {
        assert_relative_eq!(ppr_confidence(&counts(3, 0)), 0.5, max_relative = 1e-13);
        assert_relative_eq!(ppr_confidence(&counts(1, 1)), 1.5, max_relative = 1e-13);
        assert_eq!(ppr_confidence(&counts(0, 0)), f64::INFINITY);
        assert_eq!(ppr_confidence(&counts(1, 0)), f64::INFINITY);
        let three = EmpiricalCounts::from_counts(vec![3, 0, 1]);
        // K̂ = 2 here; a third answer doubles the statistic.
        let four = EmpiricalCounts::from_counts(vec![3, 1, 1]);
        assert_relative_eq!(ppr_confidence(&four), 2.0 * beta_pdf(0.5, BetaParams::from_counts(3, 1)).unwrap(), max_relative = 1e-13);
        assert_relative_eq!(ppr_confidence(&three), beta_pdf(0.5, BetaParams::from_counts(3, 1)).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn ppr_stop_examples() {
        let cfg = StoppingConfig::default();
        let c = counts(10, 0);
        assert_relative_eq!(ppr_confidence(&c), 11.0 / 1024.0, max_relative = 1e-13);
        assert!(ppr_stop(&c, &cfg));
        for n in 1..200 {
            assert!(!ppr_stop(&counts(n, n), &cfg));
        }
        let half = StoppingConfig { delta: 0.5, ..Default::default() };
        assert!(ppr_stop(&counts(3, 0), &half));
        assert!(!ppr_stop(&counts(1, 0), &half));
    }

    #[test]
    fn literal_min_rule() {
        let c = counts(2, 0);
        assert_eq!(ppr_confidence_with(&c, KRule::LiteralMin), 0.0);
        assert_eq!(ln_ppr_statistic(&c, KRule::LiteralMin), f64::NEG_INFINITY);
        let cfg = StoppingConfig { k_rule: KRule::LiteralMin, ..Default::default() };
        assert!(ppr_stop(&c, &cfg));
    }

    #[test]
    fn log_statistics_agree() {
        for n1 in 0..30 {
            for n2 in 0..=n1 {
                let c = counts(n1, n2);
                assert_relative_eq!(ln_asc_statistic(&c).exp(), asc_confidence(&c), max_relative = 1e-11);
                if c.total() >= 2 {
                    assert_relative_eq!(ln_ppr_statistic(&c, KRule::Max).exp(), ppr_confidence(&c), max_relative = 1e-11);
                }
            }
        }
    }

    #[test]
    fn esc_degenerate_stops_after_one_window() {
        let d = AnswerDist::new([("A", 1.0)], None).unwrap();
        let out = esc_run(&d, &EscConfig::default(), &mut substream(1, 0));
        assert_eq!(out.samples, 8);
        assert_eq!(out.windows, 1);
        assert_eq!(out.prediction, 0);
    }

    #[test]
    fn esc_expected_windows_half_half() {
        let d = AnswerDist::binary(0.5).unwrap();
        let cfg = EscConfig { window: 2, max_per_question: 1 << 20 };
        let mut rng = substream(2, 0);
        let runs = 100_000;
        let total: u64 = (0..runs).map(|_| esc_run(&d, &cfg, &mut rng).windows).sum();
        let mean = total as f64 / runs as f64;
        // Geometric(1/2): mean 2, variance 2.
        assert!((mean - 2.0).abs() <= 3.0 * (2.0 / runs as f64).sqrt(), "{mean}");
    }

    #[test]
    fn esc_cap_returns_mode_of_all_samples() {
        let d = AnswerDist::new([("A", 0.4), ("B", 0.35), ("C", 0.25)], None).unwrap();
        let cfg = EscConfig { window: 64, max_per_question: 100 };
        let mut rng = substream(3, 0);
        for _ in 0..50 {
            let out = esc_run(&d, &cfg, &mut rng);
            assert_eq!(out.samples, 100);
            assert!(out.counts.argmax().contains(&out.prediction));
        }
    }

    #[test]
    fn ppr_run_stops_on_degenerate() {
        let d = AnswerDist::new([("A", 1.0)], None).unwrap();
        let out = run_ppr_uncapped(&d, &StoppingConfig::default(), &mut substream(4, 0));
        // (n + 1) 2^{-n} <= 0.05 first at n = 8.
        assert_eq!(out.samples, 8);
        assert!(!out.capped);
    }
}
