//! Monte Carlo error curves, scaling fits and efficiency tables.
//!
//! Replicate `r` of a curve uses seed `derive_seed(seed, r)`; within a
//! replicate question `i` draws from stream `i`. Replicates run in parallel
//! and are reduced in index order, so results do not depend on the number of
//! worker threads.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::answer_model::{AnswerDist, EmpiricalCounts, QuestionSet};
use crate::error::{Error, Result};
use crate::oracle_bounds::{kl_lower_bound_samples, mode_error};
use crate::policies::{
    convexify_curve, esc_run, greedy_fixed_allocation, run_dynamic, run_ppr_uncapped, Allocation,
    ConvexCurve, DynamicPolicy, EscConfig, StoppingConfig,
};
use crate::rng::{derive_seed, substream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    /// Prediction differs from the mode of the answer distribution.
    #[default]
    ModeError,
    /// Prediction differs from the gold answer; questions without gold are skipped.
    GoldAccuracyError,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::ModeError => "mode-error",
            Metric::GoldAccuracyError => "gold-accuracy-error",
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mode-error" => Ok(Metric::ModeError),
            "gold-accuracy-error" | "gold-error" => Ok(Metric::GoldAccuracyError),
            _ => Err(Error::Config(format!("unknown metric `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub policy: String,
    pub metric: Metric,
    pub budgets: Vec<f64>,
    pub errors: Vec<f64>,
    pub stderrs: Vec<f64>,
    #[serde(default)]
    pub dataset: String,
    #[serde(default)]
    pub seed: u64,
}

impl ErrorCurve {
    pub fn new(
        policy: impl Into<String>,
        metric: Metric,
        budgets: Vec<f64>,
        errors: Vec<f64>,
        stderrs: Vec<f64>,
    ) -> Result<Self> {
        let c = Self {
            policy: policy.into(),
            metric,
            budgets,
            errors,
            stderrs,
            dataset: String::new(),
            seed: 0,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_meta(mut self, dataset: impl Into<String>, seed: u64) -> Self {
        self.dataset = dataset.into();
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.budgets.len() != self.errors.len() || self.errors.len() != self.stderrs.len() {
            return Err(Error::Domain("curve lists differ in length".into()));
        }
        if self.budgets.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("curve budgets must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.budgets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.budgets.is_empty()
    }

    /// Error at exactly `budget`, if it is a checkpoint.
    pub fn error_at(&self, budget: f64) -> Option<f64> {
        self.budgets
            .iter()
            .position(|&b| (b - budget).abs() <= 1e-9 * budget.abs().max(1.0))
            .map(|i| self.errors[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Policy {
    Vanilla,
    FixedOracle,
    Asc,
    Ppr,
    Blend,
    Esc,
}

impl Policy {
    pub fn name(self) -> &'static str {
        match self {
            Policy::Vanilla => "vanilla",
            Policy::FixedOracle => "fixed-oracle",
            Policy::Asc => "asc",
            Policy::Ppr => "ppr",
            Policy::Blend => "blend",
            Policy::Esc => "esc",
        }
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "vanilla" | "sc" => Policy::Vanilla,
            "fixed-oracle" | "oracle" => Policy::FixedOracle,
            "asc" => Policy::Asc,
            "ppr" | "ppr-1v1" => Policy::Ppr,
            "blend" | "blend-asc" => Policy::Blend,
            "esc" => Policy::Esc,
            _ => return Err(Error::Config(format!("unknown policy `{s}`"))),
        })
    }
}

/// Settings shared by every policy in a simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub metric: Metric,
    pub stopping: StoppingConfig,
    pub esc: EscConfig,
    /// ESC window sizes, one curve point each.
    pub esc_windows: Vec<u64>,
    /// Monte Carlo reps for oracle curves where exact enumeration is too large.
    pub oracle_reps: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            metric: Metric::ModeError,
            stopping: StoppingConfig::default(),
            esc: EscConfig::default(),
            esc_windows: vec![2, 3, 4, 6, 8, 12, 16],
            oracle_reps: 20_000,
        }
    }
}

/// Expected error of the empirical mode of `c` against `target`, averaging
/// over ties. Without samples every label is tied.
pub fn expected_error(c: &EmpiricalCounts, target: Option<usize>) -> f64 {
    let Some(t) = target else { return 1.0 };
    let ties = if c.total() == 0 {
        c.counts().len()
    } else {
        let n1 = c.n1();
        if c.counts()[t] != n1 {
            return 1.0;
        }
        c.counts().iter().filter(|&&v| v == n1).count()
    };
    1.0 - 1.0 / ties as f64
}

/// Indices of scored questions and their target answer.
fn targets(qs: &QuestionSet, metric: Metric) -> Vec<(usize, Option<usize>)> {
    qs.iter()
        .enumerate()
        .filter_map(|(i, q)| match metric {
            Metric::ModeError => Some((i, Some(0))),
            Metric::GoldAccuracyError => q.dist.gold().map(|g| (i, q.dist.index_of(g))),
        })
        .collect()
}

fn dataset_error(counts: &[EmpiricalCounts], scored: &[(usize, Option<usize>)]) -> f64 {
    if scored.is_empty() {
        return 0.0;
    }
    scored.iter().map(|&(i, t)| expected_error(&counts[i], t)).sum::<f64>() / scored.len() as f64
}

/// Total sample count for average budget `x̄` over `n` questions.
pub fn total_for_average(avg: f64, n: usize) -> u64 {
    (avg * n as f64 - 1e-9).ceil().max(0.0) as u64
}

fn mean_and_stderr(rows: &[Vec<f64>], k: usize) -> (f64, f64) {
    let reps = rows.len() as f64;
    let mean = rows.iter().map(|r| r[k]).sum::<f64>() / reps;
    let var = rows.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / reps;
    (mean, (var / reps).sqrt())
}

/// Sample nested allocations question by question and score each checkpoint.
fn score_nested(qs: &QuestionSet, allocs: &[Allocation], seed: u64, scored: &[(usize, Option<usize>)]) -> Vec<f64> {
    let mut errors = vec![0.0; allocs.len()];
    for &(i, target) in scored {
        let dist = &qs.questions()[i].dist;
        let mut rng = substream(seed, i as u64);
        let mut c = EmpiricalCounts::new(dist.len());
        for (k, a) in allocs.iter().enumerate() {
            while c.total() < a.counts[i] {
                c.add(dist.draw_index(&mut rng));
            }
            errors[k] += expected_error(&c, target);
        }
    }
    if !scored.is_empty() {
        for e in &mut errors {
            *e /= scored.len() as f64;
        }
    }
    errors
}

/// Mode-error curve of one question on the oracle grid, convexified.
pub fn oracle_question_curve(dist: &AnswerDist, max_x: u64, reps: u64, seed: u64) -> Result<ConvexCurve> {
    let mut grid: Vec<u64> = (1..=16).collect();
    let mut x = 16.0f64;
    while (x as u64) < max_x {
        x *= 1.25;
        grid.push((x.round() as u64).min(max_x.max(17)));
    }
    grid.dedup();
    let mut pts = vec![(0.0, 1.0 - 1.0 / dist.len() as f64)];
    for &x in &grid {
        pts.push((x as f64, mode_error(dist, x, reps, derive_seed(seed, x))?.value));
    }
    convexify_curve(&pts)
}

/// Error-versus-average-budget curve of `policy` on `qs`.
pub fn error_curve(
    policy: Policy,
    qs: &QuestionSet,
    budgets: &[f64],
    reps: u64,
    seed: u64,
    cfg: &SimConfig,
) -> Result<ErrorCurve> {
    if reps == 0 {
        return Err(Error::Config("reps must be >= 1".into()));
    }
    if policy == Policy::Esc {
        return esc_curve(qs, &cfg.esc_windows, reps, seed, cfg);
    }
    if budgets.is_empty() || budgets.iter().any(|&b| !(b > 0.0)) {
        return Err(Error::Config("budgets must be non-empty and positive".into()));
    }
    if budgets.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("budgets must be strictly increasing".into()));
    }
    let n = qs.len();
    let totals: Vec<u64> = budgets.iter().map(|&b| total_for_average(b, n)).collect();
    if totals.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("budgets collapse to the same sample total".into()));
    }
    let scored = targets(qs, cfg.metric);
    let rep_seed = |r: u64| derive_seed(seed, r);

    let rows: Vec<Vec<f64>> = match policy {
        Policy::Vanilla => {
            let allocs: Vec<Allocation> = totals.iter().map(|&t| Allocation::even_split(n, t)).collect();
            (0..reps)
                .into_par_iter()
                .map(|r| score_nested(qs, &allocs, rep_seed(r), &scored))
                .collect()
        }
        Policy::FixedOracle => {
            let max_avg = budgets[budgets.len() - 1];
            let max_x = ((max_avg * 16.0).ceil() as u64).max(64);
            let curves = qs
                .questions()
                .par_iter()
                .enumerate()
                .map(|(i, q)| oracle_question_curve(&q.dist, max_x, cfg.oracle_reps, derive_seed(seed ^ 0x0f1c, i as u64)))
                .collect::<Result<Vec<_>>>()?;
            let allocs: Vec<Allocation> = totals.iter().map(|&t| greedy_fixed_allocation(&curves, t)).collect();
            (0..reps)
                .into_par_iter()
                .map(|r| score_nested(qs, &allocs, rep_seed(r), &scored))
                .collect()
        }
        Policy::Asc | Policy::Ppr => {
            let dp = if policy == Policy::Asc { DynamicPolicy::Asc } else { DynamicPolicy::Ppr };
            let total = totals[totals.len() - 1];
            (0..reps)
                .into_par_iter()
                .map(|r| {
                    let traj = run_dynamic(dp, qs, total, &totals, rep_seed(r), &cfg.stopping)?;
                    Ok(traj.snapshots.iter().map(|s| dataset_error(&s.counts, &scored)).collect())
                })
                .collect::<Result<Vec<_>>>()?
        }
        Policy::Blend => {
            // The blend weight t/T depends on T, so each checkpoint is its own run.
            let cells: Vec<(u64, usize)> = (0..reps).flat_map(|r| (0..totals.len()).map(move |k| (r, k))).collect();
            let flat = cells
                .par_iter()
                .map(|&(r, k)| {
                    let traj = run_dynamic(DynamicPolicy::Blend, qs, totals[k], &[], rep_seed(r), &cfg.stopping)?;
                    Ok(dataset_error(&traj.snapshots[0].counts, &scored))
                })
                .collect::<Result<Vec<f64>>>()?;
            flat.chunks(totals.len()).map(<[f64]>::to_vec).collect()
        }
        Policy::Esc => unreachable!("handled above"),
    };
    let (errors, stderrs): (Vec<f64>, Vec<f64>) = (0..budgets.len()).map(|k| mean_and_stderr(&rows, k)).unzip();
    ErrorCurve::new(policy.name(), cfg.metric, budgets.to_vec(), errors, stderrs).map(|c| c.with_meta("", seed))
}

/// ESC curve: one point per window size at its mean samples per question.
pub fn esc_curve(qs: &QuestionSet, windows: &[u64], reps: u64, seed: u64, cfg: &SimConfig) -> Result<ErrorCurve> {
    if windows.is_empty() {
        return Err(Error::Config("ESC needs at least one window size".into()));
    }
    let scored = targets(qs, cfg.metric);
    let mut points = Vec::with_capacity(windows.len());
    for (wi, &w) in windows.iter().enumerate() {
        let esc = EscConfig { window: w, ..cfg.esc };
        esc.validate()?;
        let rows: Vec<(f64, f64)> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let s = derive_seed(derive_seed(seed, r), 1 + wi as u64);
                let outs: Vec<_> = qs
                    .iter()
                    .enumerate()
                    .map(|(i, q)| esc_run(&q.dist, &esc, &mut substream(s, i as u64)))
                    .collect();
                let used = outs.iter().map(|o| o.samples).sum::<u64>() as f64 / qs.len() as f64;
                let counts: Vec<EmpiricalCounts> = outs.into_iter().map(|o| o.counts).collect();
                (used, dataset_error(&counts, &scored))
            })
            .collect();
        let n = rows.len() as f64;
        let budget = rows.iter().map(|r| r.0).sum::<f64>() / n;
        let mean = rows.iter().map(|r| r.1).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r.1 - mean).powi(2)).sum::<f64>() / n;
        points.push((budget, mean, (var / n).sqrt()));
    }
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    ErrorCurve::new(
        Policy::Esc.name(),
        cfg.metric,
        points.iter().map(|p| p.0).collect(),
        points.iter().map(|p| p.1).collect(),
        points.iter().map(|p| p.2).collect(),
    )
    .map(|c| c.with_meta("", seed))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub floor: f64,
    pub points: usize,
}

/// Limiting error subtracted before a log-log fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Floor {
    #[default]
    None,
    Value(f64),
    /// Error at the largest budget of the curve.
    LargestBudget,
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    (slope, my - slope * mx, r2)
}

/// Least squares on `(ln x̄, ln(err − floor))` over budgets in `[lo, hi]`.
pub fn fit_power_law(curve: &ErrorCurve, range: Option<(f64, f64)>, floor: Floor) -> Result<PowerLawFit> {
    let (lo, hi) = range.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let f = match floor {
        Floor::None => 0.0,
        Floor::Value(v) => v,
        Floor::LargestBudget => *curve.errors.last().ok_or_else(|| Error::Fit("empty curve".into()))?,
    };
    let pts: Vec<(f64, f64)> = curve
        .budgets
        .iter()
        .zip(&curve.errors)
        .filter(|(&b, &e)| b >= lo && b <= hi && b > 0.0 && e - f > 0.0)
        .map(|(&b, &e)| (b.ln(), (e - f).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!("{} usable points in range, need 3", pts.len())));
    }
    let (slope, intercept, r_squared) = least_squares(&pts);
    Ok(PowerLawFit {
        slope,
        intercept,
        r_squared,
        x_lo: pts[0].0.exp(),
        x_hi: pts[pts.len() - 1].0.exp(),
        floor: f,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub rate: f64,
    pub amplitude: f64,
    pub x_min: f64,
    pub points: usize,
}

/// Least squares on `(x, ln err)` over positive points with `x >= x_min`.
pub fn fit_exp_decay(points: &[(f64, f64)], x_min: f64) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.0 >= x_min && p.1 > 0.0)
        .map(|p| (p.0, p.1.ln()))
        .collect();
    if pts.len() < 3 {
        return Err(Error::Fit(format!("{} positive points beyond x_min, need 3", pts.len())));
    }
    let (slope, intercept, _) = least_squares(&pts);
    Ok(DecayFit {
        rate: -slope,
        amplitude: intercept.exp(),
        x_min,
        points: pts.len(),
    })
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let sab: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let saa: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let sbb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    if saa <= 0.0 || sbb <= 0.0 {
        return Err(Error::Fit("correlation undefined for zero variance".into()));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation between each question's margin and its fitted decay rate.
pub fn margin_decay_correlation(qs: &QuestionSet, xs: &[u64], x_min: f64, reps: u64, seed: u64) -> Result<f64> {
    let fits: Vec<Option<(f64, f64)>> = qs
        .questions()
        .par_iter()
        .enumerate()
        .map(|(i, q)| {
            let pts = xs
                .iter()
                .map(|&x| Ok((x as f64, mode_error(&q.dist, x, reps, derive_seed(derive_seed(seed, i as u64), x))?.value)))
                .collect::<Result<Vec<_>>>()?;
            Ok(fit_exp_decay(&pts, x_min).ok().map(|f| (q.dist.margin(), f.rate)))
        })
        .collect::<Result<Vec<_>>>()?;
    let (m, beta): (Vec<f64>, Vec<f64>) = fits.into_iter().flatten().unzip();
    if m.len() < 3 {
        return Err(Error::Fit(format!("{} questions with valid fits, need 3", m.len())));
    }
    pearson(&m, &beta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyRow {
    pub policy: String,
    pub target: u64,
    pub reference_error: f64,
    pub matched_budget: u64,
    pub improvement: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyTable {
    pub rows: Vec<EfficiencyRow>,
    /// Mean improvement per policy, in first-seen order.
    pub average_improvement: Vec<(String, f64)>,
}

fn matched_budget(curve: &ErrorCurve, reference: f64, cap: u64) -> u64 {
    let b = &curve.budgets;
    let e = &curve.errors;
    let Some(j) = e.iter().position(|&v| v <= reference) else { return cap };
    let x = if j == 0 {
        b[0]
    } else {
        b[j - 1] + (e[j - 1] - reference) / (e[j - 1] - e[j]) * (b[j] - b[j - 1])
    };
    ((x - 1e-9).ceil().max(1.0) as u64).min(cap)
}

/// Smallest average budget at which each policy matches SC at `n` samples.
pub fn efficiency_table(curves: &[ErrorCurve], sc: &ErrorCurve, targets: &[u64]) -> Result<EfficiencyTable> {
    let mut rows = Vec::new();
    let mut order: Vec<String> = Vec::new();
    for &n in targets {
        let reference = sc
            .error_at(n as f64)
            .ok_or_else(|| Error::Fit(format!("SC curve has no point at budget {n}")))?;
        for c in curves {
            if c.metric != sc.metric {
                return Err(Error::Fit(format!("curve `{}` uses a different metric", c.policy)));
            }
            let matched = matched_budget(c, reference, n);
            if !order.contains(&c.policy) {
                order.push(c.policy.clone());
            }
            rows.push(EfficiencyRow {
                policy: c.policy.clone(),
                target: n,
                reference_error: reference,
                matched_budget: matched,
                improvement: n as f64 / matched as f64,
            });
        }
    }
    let average_improvement = order
        .into_iter()
        .map(|p| {
            let v: Vec<f64> = rows.iter().filter(|r| r.policy == p).map(|r| r.improvement).collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            (p, mean)
        })
        .collect();
    Ok(EfficiencyTable { rows, average_improvement })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub delta: f64,
    pub ratio: f64,
    pub stderr: f64,
    /// Mean stopped-mode error across questions and runs.
    pub error: f64,
    pub questions: usize,
}

/// Mean over questions of `E[samples to PPR stop] / lower bound`, per δ.
///
/// Each question runs `reps` uncapped stopping runs. δ values with a vacuous
/// bound are skipped with a warning.
pub fn ppr_optimality_ratio(
    qs: &QuestionSet,
    deltas: &[f64],
    reps: u64,
    seed: u64,
    cfg: &StoppingConfig,
) -> Result<Vec<RatioPoint>> {
    if reps == 0 {
        return Err(Error::Config("reps must be >= 1".into()));
    }
    if let Some(q) = qs.iter().find(|q| !q.dist.has_unique_mode()) {
        return Err(Error::Domain(format!("question `{}` has a tied mode", q.id)));
    }
    let mut out = Vec::new();
    for (di, &delta) in deltas.iter().enumerate() {
        let probe = kl_lower_bound_samples(&qs.questions()[0].dist, delta)?;
        if probe.degenerate {
            log::warn!("skipping delta = {delta}: lower bound is vacuous");
            continue;
        }
        let stop = StoppingConfig { delta, ..*cfg };
        let per_q = qs
            .questions()
            .par_iter()
            .enumerate()
            .map(|(i, q)| {
                let lb = kl_lower_bound_samples(&q.dist, delta)?;
                if !(lb.samples > 0.0 && lb.samples.is_finite()) {
                    return Ok(None);
                }
                let base = derive_seed(derive_seed(seed, di as u64), i as u64);
                let mut rng = substream(base, 0);
                let mut sum = 0.0;
                let mut sq = 0.0;
                let mut wrong = 0u64;
                for _ in 0..reps {
                    let o = run_ppr_uncapped(&q.dist, &stop, &mut rng);
                    let s = o.samples as f64;
                    sum += s;
                    sq += s * s;
                    wrong += u64::from(o.prediction != 0);
                }
                let mean = sum / reps as f64;
                let var = (sq / reps as f64 - mean * mean).max(0.0);
                Ok(Some((mean / lb.samples, (var / reps as f64).sqrt() / lb.samples, wrong as f64 / reps as f64)))
            })
            .collect::<Result<Vec<_>>>()?;
        let used: Vec<(f64, f64, f64)> = per_q.into_iter().flatten().collect();
        if used.is_empty() {
            log::warn!("skipping delta = {delta}: no question has a finite lower bound");
            continue;
        }
        let k = used.len() as f64;
        out.push(RatioPoint {
            delta,
            ratio: used.iter().map(|u| u.0).sum::<f64>() / k,
            stderr: used.iter().map(|u| u.1 * u.1).sum::<f64>().sqrt() / k,
            error: used.iter().map(|u| u.2).sum::<f64>() / k,
            questions: used.len(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::answer_model::QuestionInstance;
    use crate::oracle_bounds::exact_mode_error;
    use approx::assert_relative_eq;

    fn set(dists: Vec<AnswerDist>) -> QuestionSet {
        QuestionSet::new(
            dists
                .into_iter()
                .enumerate()
                .map(|(i, d)| QuestionInstance::new(format!("q{i}"), d))
                .collect(),
        )
        .unwrap()
    }

    fn curve(budgets: Vec<f64>, errors: Vec<f64>) -> ErrorCurve {
        let n = budgets.len();
        ErrorCurve::new("p", Metric::ModeError, budgets, errors, vec![0.0; n]).unwrap()
    }

    fn binary_with_gold(p: f64, gold: &str) -> AnswerDist {
        AnswerDist::binary(p).unwrap().with_gold(Some(gold.into()))
    }

    #[test]
    fn expected_error_cases() {
        let c = EmpiricalCounts::from_counts(vec![2, 2, 1]);
        assert_eq!(expected_error(&c, Some(0)), 0.5);
        assert_eq!(expected_error(&c, Some(2)), 1.0);
        assert_eq!(expected_error(&c, None), 1.0);
        assert_relative_eq!(expected_error(&EmpiricalCounts::new(3), Some(1)), 2.0 / 3.0);
    }

    #[test]
    fn degenerate_dataset_has_zero_error() {
        let qs = set(vec![AnswerDist::new([("A", 1.0)], None).unwrap(); 5]);
        for p in [Policy::Vanilla, Policy::FixedOracle, Policy::Asc, Policy::Ppr, Policy::Blend, Policy::Esc] {
            let c = error_curve(p, &qs, &[1.0, 2.0, 4.0], 3, 1, &SimConfig::default()).unwrap();
            assert!(c.errors.iter().all(|&e| e == 0.0), "{p:?}");
        }
    }

    #[test]
    fn vanilla_matches_exact_oracle() {
        let qs = set(vec![AnswerDist::binary(0.6).unwrap()]);
        let reps = 200_000;
        let c = error_curve(Policy::Vanilla, &qs, &[3.0], reps, 4, &SimConfig::default()).unwrap();
        let sigma = (0.352f64 * 0.648 / reps as f64).sqrt();
        assert!((c.errors[0] - 0.352).abs() <= 3.0 * sigma, "{}", c.errors[0]);
        assert_relative_eq!(c.stderrs[0], sigma, max_relative = 0.02);
    }

    #[test]
    fn vanilla_small_dataset_mean_of_exact() {
        let dists = vec![
            AnswerDist::binary(0.7).unwrap(),
            AnswerDist::new([("A", 0.5), ("B", 0.3), ("C", 0.2)], None).unwrap(),
            AnswerDist::binary(0.55).unwrap(),
        ];
        let qs = set(dists.clone());
        let budgets = [1.0, 2.0, 5.0, 9.0];
        let c = error_curve(Policy::Vanilla, &qs, &budgets, 40_000, 11, &SimConfig::default()).unwrap();
        for (k, &b) in budgets.iter().enumerate() {
            let exact = dists.iter().map(|d| exact_mode_error(d, b as u64).unwrap().value).sum::<f64>() / 3.0;
            assert!((c.errors[k] - exact).abs() <= 3.0 * c.stderrs[k] + 1e-12, "b={b}");
        }
    }

    #[test]
    fn doubling_reps_halves_variance() {
        let qs = set(vec![AnswerDist::binary(0.6).unwrap(); 4]);
        let a = error_curve(Policy::Vanilla, &qs, &[3.0], 20_000, 5, &SimConfig::default()).unwrap();
        let b = error_curve(Policy::Vanilla, &qs, &[3.0], 40_000, 6, &SimConfig::default()).unwrap();
        let ratio = (a.stderrs[0] / b.stderrs[0]).powi(2);
        assert!((ratio - 2.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn metrics_agree_on_aligned_sets() {
        let qs = set(vec![binary_with_gold(0.7, "A"), binary_with_gold(0.6, "A"), binary_with_gold(0.9, "A")]);
        for p in [Policy::Vanilla, Policy::Asc, Policy::Blend] {
            let mode = error_curve(p, &qs, &[2.0, 5.0], 50, 3, &SimConfig::default()).unwrap();
            let cfg = SimConfig { metric: Metric::GoldAccuracyError, ..Default::default() };
            let gold = error_curve(p, &qs, &[2.0, 5.0], 50, 3, &cfg).unwrap();
            assert_eq!(mode.errors, gold.errors);
        }
    }

    #[test]
    fn gold_metric_skips_questions_without_gold() {
        let qs = set(vec![binary_with_gold(0.9, "B"), AnswerDist::binary(0.9).unwrap().with_gold(None)]);
        let cfg = SimConfig { metric: Metric::GoldAccuracyError, ..Default::default() };
        let c = error_curve(Policy::Vanilla, &qs, &[1.0, 21.0], 2000, 3, &cfg).unwrap();
        assert!(c.errors[1] > 0.99);
    }

    #[test]
    fn fixed_oracle_not_worse_than_vanilla() {
        let dists: Vec<AnswerDist> = [0.99, 0.9, 0.75, 0.6, 0.52, 0.51].iter().map(|&p| AnswerDist::binary(p).unwrap()).collect();
        let qs = set(dists.clone());
        let cfg = SimConfig::default();
        let v = error_curve(Policy::Vanilla, &qs, &[8.0, 16.0], 4000, 2, &cfg).unwrap();
        let f = error_curve(Policy::FixedOracle, &qs, &[8.0, 16.0], 4000, 2, &cfg).unwrap();
        for k in 0..2 {
            assert!(f.errors[k] <= v.errors[k] + 2.0 * (f.stderrs[k] + v.stderrs[k]), "{k}");
        }
    }

    #[test]
    fn curve_validation() {
        assert!(ErrorCurve::new("p", Metric::ModeError, vec![1.0, 1.0], vec![0.1, 0.1], vec![0.0, 0.0]).is_err());
        assert!(ErrorCurve::new("p", Metric::ModeError, vec![1.0], vec![0.1, 0.1], vec![0.0]).is_err());
    }

    #[test]
    fn power_law_exact() {
        let xs: Vec<f64> = (1..20).map(|i| 10.0 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 4.0 / x.sqrt()).collect();
        let f = fit_power_law(&curve(xs, ys), None, Floor::None).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-9);
        assert!((f.r_squared - 1.0).abs() < 1e-9);
        assert!((f.intercept - 4f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn power_law_with_floor() {
        let xs: Vec<f64> = (1..20).map(|i| 10.0 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 0.2 + 3.0 / x).collect();
        let f = fit_power_law(&curve(xs.clone(), ys.clone()), None, Floor::Value(0.2)).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-9);
        let flat = curve(xs, vec![0.3; 19]);
        assert!(matches!(fit_power_law(&flat, None, Floor::LargestBudget), Err(Error::Fit(_))));
        let short = curve(vec![1.0, 2.0], vec![0.5, 0.4]);
        assert!(fit_power_law(&short, None, Floor::None).is_err());
    }

    #[test]
    fn exp_decay_examples() {
        let pts: Vec<(f64, f64)> = (0..40).map(|x| (x as f64, 2.0 * (-0.16 * x as f64).exp())).collect();
        let f = fit_exp_decay(&pts, 16.0).unwrap();
        assert!((f.rate - 0.16).abs() < 1e-9);
        assert!((f.amplitude - 2.0).abs() < 1e-9);
        assert_eq!(f.points, 24);
        let mut with_zero = pts.clone();
        with_zero.push((50.0, 0.0));
        assert_eq!(fit_exp_decay(&with_zero, 16.0).unwrap().points, 24);
        assert!(fit_exp_decay(&pts, 38.0).is_err());
    }

    #[test]
    fn exp_decay_on_exact_binary_errors() {
        let d = AnswerDist::binary(0.6).unwrap();
        let m = d.margin();
        assert!((m - 0.020204).abs() < 1e-6);
        // Independent oracle: P(Bin(x, 0.4) > x/2) for odd x.
        let binom_tail = |x: u64| -> f64 {
            let mut ln_c = 0.0f64;
            let mut total = 0.0;
            for k in 0..=x {
                if k > 0 {
                    ln_c += ((x - k + 1) as f64).ln() - (k as f64).ln();
                }
                if 2 * k > x {
                    total += (ln_c + k as f64 * 0.4f64.ln() + (x - k) as f64 * 0.6f64.ln()).exp();
                }
            }
            total
        };
        let pts: Vec<(f64, f64)> = (17..=41).step_by(2).map(|x| (x as f64, exact_mode_error(&d, x).unwrap().value)).collect();
        for &(x, e) in &pts {
            assert_relative_eq!(e, binom_tail(x as u64), max_relative = 1e-10);
        }
        let f = fit_exp_decay(&pts, 16.0).unwrap();
        // The x^{-1/2} prefactor steepens the local log-slope beyond the
        // asymptotic rate -ln(2 sqrt(p1 p2)), which in turn exceeds m.
        let chernoff = -(2.0 * 0.24f64.sqrt()).ln();
        assert!(chernoff > m);
        assert!(f.rate > chernoff && f.rate < chernoff + 1.0 / 17.0, "{}", f.rate);
        assert!((f.rate - 0.0300).abs() < 5e-4, "{}", f.rate);
    }

    #[test]
    fn margin_correlation() {
        let qs = set([0.05, 0.1, 0.2, 0.4].iter().map(|&m| crate::synth::margin_to_dist(m).unwrap()).collect());
        let xs: Vec<u64> = (17..=41).step_by(2).collect();
        let r = margin_decay_correlation(&qs, &xs, 16.0, 10_000, 3).unwrap();
        assert!(r >= 0.9, "{r}");
        let same = set(vec![crate::synth::margin_to_dist(0.1).unwrap(); 4]);
        assert!(margin_decay_correlation(&same, &xs, 16.0, 10_000, 3).is_err());
    }

    #[test]
    fn pearson_bounds() {
        assert_relative_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        assert_relative_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn efficiency_examples() {
        let b = vec![8.0, 16.0, 32.0, 64.0, 128.0];
        let sc = curve(b.clone(), vec![0.4, 0.3, 0.25, 0.22, 0.2]);
        let mut same = sc.clone();
        same.policy = "same".into();
        let mut better = curve(b.clone(), vec![0.3, 0.24, 0.21, 0.2, 0.19]);
        better.policy = "better".into();
        let mut worse = curve(b.clone(), vec![0.5, 0.45, 0.4, 0.35, 0.3]);
        worse.policy = "worse".into();
        let t = efficiency_table(&[same, better, worse], &sc, &[64, 128]).unwrap();
        let get = |p: &str, n: u64| t.rows.iter().find(|r| r.policy == p && r.target == n).unwrap().clone();
        assert_eq!(get("same", 64).matched_budget, 64);
        assert_eq!(get("same", 128).improvement, 1.0);
        // 0.22 lies between 0.24 at 16 and 0.21 at 32: 16 + 2/3 · 16 = 26.67 → 27.
        assert_eq!(get("better", 64).matched_budget, 27);
        assert!(get("better", 128).matched_budget < 128);
        assert_eq!(get("worse", 64).matched_budget, 64);
        assert_eq!(get("worse", 128).matched_budget, 128);
        assert_eq!(t.average_improvement[0], ("same".to_string(), 1.0));
        assert!(efficiency_table(std::slice::from_ref(&sc), &sc, &[100]).is_err());
    }

    #[test]
    fn ppr_ratio_at_least_one() {
        let qs = set(vec![AnswerDist::binary(0.6).unwrap(), AnswerDist::binary(0.8).unwrap(), AnswerDist::binary(1.0).unwrap()]);
        let pts = ppr_optimality_ratio(&qs, &[0.5, 0.1, 0.01], 400, 9, &StoppingConfig::default()).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!(pts[0].questions, 3);
        for p in &pts {
            assert!(p.ratio >= 1.0 - 2.0 * p.stderr, "{p:?}");
        }
        let tied = set(vec![AnswerDist::binary(0.5).unwrap()]);
        assert!(ppr_optimality_ratio(&tied, &[0.1], 10, 1, &StoppingConfig::default()).is_err());
    }
}
