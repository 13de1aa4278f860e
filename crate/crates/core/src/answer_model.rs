//! Categorical answer distributions, vote counts and the mode.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accepted deviation of `Σ probs` from one on ingestion.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// An answer distribution `μ(·|q)` with an optional gold label.
///
/// Entries are kept in descending probability order (ties broken by label),
/// so index 0 is the mode and `probs()[0] >= probs()[1] >= ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnswerDist {
    labels: Vec<String>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
    gold: Option<String>,
}

impl AnswerDist {
    pub fn new<L: Into<String>>(
        entries: impl IntoIterator<Item = (L, f64)>,
        gold: Option<String>,
    ) -> Result<Self> {
        let mut entries: Vec<(String, f64)> =
            entries.into_iter().map(|(l, p)| (l.into(), p)).collect();
        if entries.is_empty() {
            return Err(Error::InvalidDistribution("no answers".into()));
        }
        let mut seen = HashSet::new();
        for (label, p) in &entries {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate label {label:?}"
                )));
            }
            if !p.is_finite() || *p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "probability for {label:?} is {p}"
                )));
            }
        }
        let total: f64 = entries.iter().map(|(_, p)| p).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        entries.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let (labels, probs): (Vec<_>, Vec<_>) = entries.into_iter().unzip();
        let cdf = build_cdf(&probs);
        Ok(Self {
            labels,
            probs,
            cdf,
            gold,
        })
    }

    /// Two-answer distribution `("A", p)`, `("B", 1 - p)` with gold on the mode.
    pub fn binary(p: f64) -> Result<Self> {
        let (hi, lo) = if p >= 0.5 { (p, 1.0 - p) } else { (1.0 - p, p) };
        Self::new([("A", hi), ("B", lo)], Some("A".into()))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn gold(&self) -> Option<&str> {
        self.gold.as_deref()
    }

    pub fn with_gold(mut self, gold: Option<String>) -> Self {
        self.gold = gold;
        self
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn p1(&self) -> f64 {
        self.probs[0]
    }

    pub fn p2(&self) -> f64 {
        self.probs.get(1).copied().unwrap_or(0.0)
    }

    /// Number of answers with positive probability.
    pub fn positive_support(&self) -> usize {
        self.probs.iter().take_while(|&&p| p > 0.0).count()
    }

    /// True when the mode is strictly more likely than every other answer.
    pub fn has_unique_mode(&self) -> bool {
        self.p1() > self.p2()
    }

    /// Index of a single categorical draw.
    pub fn draw_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        if self.cdf.len() == 1 {
            return 0;
        }
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u)
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> &str {
        &self.labels[self.draw_index(rng)]
    }

    /// `(√p1 − √p2)²`.
    pub fn margin(&self) -> f64 {
        let d = self.p1().sqrt() - self.p2().sqrt();
        d * d
    }

    /// Merge the tail `i >= k` into one answer, for the smallest `k` whose
    /// tail mass drops below `p2`.
    pub fn tail_bucket(&self) -> TailBucket {
        let p2 = self.p2();
        let n = self.len();
        if p2 <= 0.0 || n <= 2 {
            return TailBucket {
                dist: self.clone(),
                k: n + 1,
            };
        }
        // suffix[i] = Σ_{j >= i} p_j over 0-based indices
        let mut suffix = vec![0.0; n + 1];
        for i in (0..n).rev() {
            suffix[i] = suffix[i + 1] + self.probs[i];
        }
        // 1-based k starts at 3: the top two are never merged.
        let k0 = (2..=n).find(|&i| suffix[i] < p2).unwrap_or(n);
        let k = k0 + 1;
        if n - k0 <= 1 {
            return TailBucket {
                dist: self.clone(),
                k,
            };
        }
        let mut entries: Vec<(String, f64)> = self.labels[..k0]
            .iter()
            .cloned()
            .zip(self.probs[..k0].iter().copied())
            .collect();
        let tail: f64 = self.probs[k0..].iter().sum();
        entries.push((format!("<tail:{k}>"), tail));
        let dist = AnswerDist::new(entries, self.gold.clone())
            .expect("bucketing preserves a valid distribution");
        TailBucket { dist, k }
    }
}

fn build_cdf(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    for c in &mut cdf[last_positive..] {
        *c = 1.0;
    }
    cdf
}

/// Result of [`AnswerDist::tail_bucket`]: the bucketed distribution and the
/// 1-based index `k` of the first merged answer (`len + 1` when nothing merges).
#[derive(Debug, Clone, PartialEq)]
pub struct TailBucket {
    pub dist: AnswerDist,
    pub k: usize,
}

/// Vote tallies over the answer indices of one [`AnswerDist`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalCounts {
    counts: Vec<u64>,
    total: u64,
    distinct: usize,
    top: Option<usize>,
    second: Option<usize>,
}

impl EmpiricalCounts {
    pub fn new(support: usize) -> Self {
        Self {
            counts: vec![0; support],
            total: 0,
            distinct: 0,
            top: None,
            second: None,
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        let mut c = Self::new(counts.len());
        for (i, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                c.add(i);
            }
        }
        c
    }

    pub fn add(&mut self, index: usize) {
        if self.counts[index] == 0 {
            self.distinct += 1;
        }
        self.counts[index] += 1;
        self.total += 1;
        let c = &self.counts;
        match (self.top, self.second) {
            (None, _) => self.top = Some(index),
            (Some(t), _) if t == index => {}
            (Some(t), Some(s)) if s == index => {
                if c[s] > c[t] {
                    self.top = Some(s);
                    self.second = Some(t);
                }
            }
            (Some(t), s) => {
                if s.is_none_or(|s| c[index] > c[s]) {
                    self.second = Some(index);
                    if c[index] > c[t] {
                        self.top = Some(index);
                        self.second = Some(t);
                    }
                }
            }
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Largest count.
    pub fn n1(&self) -> u64 {
        self.top.map_or(0, |i| self.counts[i])
    }

    /// Second-largest count (0 when at most one answer has been seen).
    pub fn n2(&self) -> u64 {
        self.second.map_or(0, |i| self.counts[i])
    }

    /// `K̂`: number of answers seen at least once.
    pub fn distinct(&self) -> usize {
        self.distinct
    }

    /// Indices attaining the maximum count.
    pub fn argmax(&self) -> Vec<usize> {
        let n1 = self.n1();
        if n1 == 0 {
            return Vec::new();
        }
        (0..self.counts.len())
            .filter(|&i| self.counts[i] == n1)
            .collect()
    }

    /// Empirical mode with uniform random tie-breaking.
    pub fn mode<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        empirical_mode(self, rng)
    }
}

pub fn empirical_mode<R: Rng + ?Sized>(counts: &EmpiricalCounts, rng: &mut R) -> Result<usize> {
    if counts.total() == 0 {
        return Err(Error::EmptyCounts);
    }
    let n1 = counts.n1();
    let ties = counts.counts().iter().filter(|&&c| c == n1).count();
    if ties == 1 {
        return Ok(counts.top.expect("non-empty counts have a top answer"));
    }
    let pick = rng.random_range(0..ties);
    Ok(counts
        .counts()
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == n1)
        .nth(pick)
        .map(|(i, _)| i)
        .expect("pick < ties"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alignment {
    Aligned,
    Misaligned,
    NoGold,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuestionInstance {
    pub id: String,
    pub dist: AnswerDist,
}

impl QuestionInstance {
    pub fn new(id: impl Into<String>, dist: AnswerDist) -> Self {
        Self {
            id: id.into(),
            dist,
        }
    }

    /// Aligned iff the gold label is the unique mode; a top tie is misaligned.
    pub fn alignment(&self) -> Alignment {
        classify_alignment(self)
    }
}

pub fn classify_alignment(q: &QuestionInstance) -> Alignment {
    match q.dist.gold() {
        None => Alignment::NoGold,
        Some(gold) if q.dist.has_unique_mode() && q.dist.label(0) == gold => Alignment::Aligned,
        Some(_) => Alignment::Misaligned,
    }
}

/// A dataset of questions with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionSet {
    questions: Vec<QuestionInstance>,
}

impl QuestionSet {
    pub fn new(questions: Vec<QuestionInstance>) -> Result<Self> {
        if questions.is_empty() {
            return Err(Error::InvalidDistribution("question set is empty".into()));
        }
        let mut seen = HashSet::new();
        for q in &questions {
            if !seen.insert(q.id.as_str()) {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate question id {:?}",
                    q.id
                )));
            }
        }
        Ok(Self { questions })
    }

    pub fn questions(&self) -> &[QuestionInstance] {
        &self.questions
    }

    pub fn len(&self) -> usize {
        self.questions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.questions.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &QuestionInstance> {
        self.questions.iter()
    }

    /// The aligned subset, or `None` if no question is aligned.
    pub fn aligned(&self) -> Option<QuestionSet> {
        let qs: Vec<_> = self
            .questions
            .iter()
            .filter(|q| q.alignment() == Alignment::Aligned)
            .cloned()
            .collect();
        QuestionSet::new(qs).ok()
    }

    pub fn alignment_summary(&self) -> AlignmentSummary {
        let mut s = AlignmentSummary::default();
        for q in &self.questions {
            match q.alignment() {
                Alignment::Aligned => s.aligned += 1,
                Alignment::Misaligned => s.misaligned += 1,
                Alignment::NoGold => s.no_gold += 1,
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentSummary {
    pub aligned: usize,
    pub misaligned: usize,
    pub no_gold: usize,
}
