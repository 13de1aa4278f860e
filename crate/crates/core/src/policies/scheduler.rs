use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stopping::{ln_asc_statistic, ln_ppr_statistic};
use super::{Allocation, StoppingConfig};
use crate::answer_model::{EmpiricalCounts, QuestionSet};
use crate::error::{Error, Result};
use crate::rng::{substream, StreamRng};

/// Blend-ASC skips questions holding more than this multiple of the average count.
pub const BLEND_EXCLUSION_FACTOR: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DynamicPolicy {
    Asc,
    Ppr,
    Blend,
}

impl DynamicPolicy {
    pub fn name(self) -> &'static str {
        match self {
            DynamicPolicy::Asc => "asc",
            DynamicPolicy::Ppr => "ppr",
            DynamicPolicy::Blend => "blend",
        }
    }
}

/// Ordering key: least confident first, then fewer samples, then lower index.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Key {
    confidence: f64,
    total: u64,
    index: usize,
}

impl Eq for Key {}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.confidence
            .total_cmp(&other.confidence)
            .then(self.total.cmp(&other.total))
            .then(self.index.cmp(&other.index))
    }
}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ranking of questions by one confidence, kept sorted under point updates.
#[derive(Debug, Clone)]
struct Ranking {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl Ranking {
    fn new(n: usize) -> Self {
        Self {
            order: (0..n).collect(),
            rank: (0..n).collect(),
        }
    }

    fn update(&mut self, i: usize, key_of: impl Fn(usize) -> Key) {
        let old = self.rank[i];
        self.order.remove(old);
        let key = key_of(i);
        let new = self.order.partition_point(|&j| key_of(j) < key);
        self.order.insert(new, i);
        for p in old.min(new)..=old.max(new) {
            self.rank[self.order[p]] = p;
        }
    }
}

/// Per-question counts and confidences of a budgeted run.
///
/// Confidences are negated log stopping statistics, `−∞` before the first
/// sample (and, for PPR-1v1, before the second). Only the statistics the
/// policy uses are kept current.
#[derive(Debug, Clone)]
pub struct SchedulerState {
    pub counts: Vec<EmpiricalCounts>,
    pub confidence: Vec<f64>,
    pub asc_confidence: Vec<f64>,
    pub ppr_confidence: Vec<f64>,
    pub t: u64,
    pub total_budget: u64,
    pub frozen: Vec<bool>,
    policy: DynamicPolicy,
    cfg: StoppingConfig,
    r1: Ranking,
    r2: Ranking,
}

impl SchedulerState {
    pub fn new(supports: &[usize], total_budget: u64, policy: DynamicPolicy, cfg: StoppingConfig) -> Self {
        let n = supports.len();
        Self {
            counts: supports.iter().map(|&s| EmpiricalCounts::new(s)).collect(),
            confidence: vec![f64::NEG_INFINITY; n],
            asc_confidence: vec![f64::NEG_INFINITY; n],
            ppr_confidence: vec![f64::NEG_INFINITY; n],
            t: 0,
            total_budget,
            frozen: vec![false; n],
            policy,
            cfg,
            r1: Ranking::new(n),
            r2: Ranking::new(n),
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    fn key(&self, conf: &[f64], i: usize) -> Key {
        Key {
            confidence: conf[i],
            total: self.counts[i].total(),
            index: i,
        }
    }

    /// 1-based rank by ASC statistic (1 = least confident).
    pub fn asc_rank(&self, i: usize) -> usize {
        self.r1.rank[i] + 1
    }

    /// 1-based rank by PPR-1v1 statistic.
    pub fn ppr_rank(&self, i: usize) -> usize {
        self.r2.rank[i] + 1
    }

    fn capped(&self, i: usize) -> bool {
        self.cfg
            .max_per_question
            .is_some_and(|cap| self.counts[i].total() >= cap)
    }

    /// Record one draw of answer `answer` for question `i`.
    pub fn record(&mut self, i: usize, answer: usize) {
        self.counts[i].add(answer);
        self.t += 1;
        let c = &self.counts[i];
        if self.policy != DynamicPolicy::Ppr {
            self.asc_confidence[i] = -ln_asc_statistic(c);
        }
        if self.policy != DynamicPolicy::Asc {
            self.ppr_confidence[i] = -ln_ppr_statistic(c, self.cfg.k_rule);
        }
        self.confidence[i] = match self.policy {
            DynamicPolicy::Ppr => self.ppr_confidence[i],
            _ => self.asc_confidence[i],
        };
        if self.policy == DynamicPolicy::Blend {
            let asc = std::mem::take(&mut self.asc_confidence);
            let ppr = std::mem::take(&mut self.ppr_confidence);
            let mut r1 = std::mem::replace(&mut self.r1, Ranking::new(0));
            let mut r2 = std::mem::replace(&mut self.r2, Ranking::new(0));
            r1.update(i, |j| self.key(&asc, j));
            r2.update(i, |j| self.key(&ppr, j));
            self.r1 = r1;
            self.r2 = r2;
            self.asc_confidence = asc;
            self.ppr_confidence = ppr;
        }
    }
}

/// Blend-ASC choice: argmin of `(1 − t/T) R1 + (t/T) R2` over questions
/// holding at most `16 max(1, t/N)` samples, ties to the lowest index.
///
/// When every question is excluded the least-sampled one is returned.
pub fn blend_step(state: &mut SchedulerState) -> usize {
    let n = state.len();
    let w = state.t as f64 / state.total_budget.max(1) as f64;
    let limit = BLEND_EXCLUSION_FACTOR * (state.t as f64 / n as f64).max(1.0);
    let mut best: Option<(f64, usize)> = None;
    for i in 0..n {
        let excluded = state.counts[i].total() as f64 > limit || state.capped(i);
        state.frozen[i] = excluded;
        if excluded {
            continue;
        }
        let score = (1.0 - w) * state.asc_rank(i) as f64 + w * state.ppr_rank(i) as f64;
        if best.is_none_or(|(s, _)| score < s) {
            best = Some((score, i));
        }
    }
    match best {
        Some((_, i)) => i,
        None => (0..n)
            .filter(|&i| !state.capped(i))
            .min_by_key(|&i| (state.counts[i].total(), i))
            .unwrap_or(0),
    }
}

/// Counts of every question at one budget checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: u64,
    pub counts: Vec<EmpiricalCounts>,
}

impl Snapshot {
    pub fn allocation(&self) -> Allocation {
        Allocation::new(self.counts.iter().map(EmpiricalCounts::total).collect())
    }

    /// Empirical modes with random tie-breaking; `None` for unsampled questions.
    pub fn predictions<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Option<usize>> {
        self.counts.iter().map(|c| c.mode(rng).ok()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub policy: DynamicPolicy,
    pub total_budget: u64,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    pub fn final_allocation(&self) -> Allocation {
        self.snapshots.last().expect("at least one snapshot").allocation()
    }
}

/// Drive `policy` to exactly `total_budget` samples.
///
/// `checkpoints` are sample totals at which counts are recorded; empty means
/// only `total_budget`. Question `i` draws from stream `i` of `seed`.
pub fn run_dynamic(
    policy: DynamicPolicy,
    qs: &QuestionSet,
    total_budget: u64,
    checkpoints: &[u64],
    seed: u64,
    cfg: &StoppingConfig,
) -> Result<Trajectory> {
    let n = qs.len() as u64;
    if total_budget < n {
        return Err(Error::Budget(format!(
            "total budget {total_budget} is below the number of questions {n}"
        )));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Budget("checkpoints must be strictly increasing".into()));
    }
    if checkpoints.last().is_some_and(|&c| c > total_budget) {
        return Err(Error::Budget("checkpoint beyond the total budget".into()));
    }
    let checkpoints: Vec<u64> = if checkpoints.is_empty() { vec![total_budget] } else { checkpoints.to_vec() };
    let supports: Vec<usize> = qs.iter().map(|q| q.dist.len()).collect();
    let mut state = SchedulerState::new(&supports, total_budget, policy, *cfg);
    let mut rngs: Vec<StreamRng> = (0..n).map(|i| substream(seed, i)).collect();
    let mut heap: BinaryHeap<Reverse<Key>> = (0..qs.len())
        .map(|i| Reverse(state.key(&state.confidence, i)))
        .collect();
    let mut snapshots = Vec::with_capacity(checkpoints.len());
    let mut next = 0;
    while next < checkpoints.len() && checkpoints[next] == 0 {
        snapshots.push(Snapshot { t: 0, counts: state.counts.clone() });
        next += 1;
    }
    let questions = qs.questions();
    while state.t < total_budget {
        let i = match policy {
            DynamicPolicy::Blend => {
                let i = blend_step(&mut state);
                if state.capped(i) {
                    return Err(Error::Budget("every question reached its sample cap".into()));
                }
                i
            }
            _ => match heap.pop() {
                Some(Reverse(k)) => k.index,
                None => return Err(Error::Budget("every question reached its sample cap".into())),
            },
        };
        let answer = questions[i].dist.draw_index(&mut rngs[i]);
        state.record(i, answer);
        if policy != DynamicPolicy::Blend && !state.capped(i) {
            heap.push(Reverse(state.key(&state.confidence, i)));
        }
        if next < checkpoints.len() && state.t == checkpoints[next] {
            snapshots.push(Snapshot { t: state.t, counts: state.counts.clone() });
            next += 1;
        }
    }
    Ok(Trajectory {
        policy,
        total_budget,
        snapshots,
    })
}
