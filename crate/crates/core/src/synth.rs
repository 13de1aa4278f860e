//! Synthetic dataset families and Laplace-transform error curves.
//!
//! Datasets are described by the distribution of their top-two probabilities
//! `(p1, p2)` over the region `A = {0 <= p2 <= p1 <= 1, p1 + p2 <= 1}`:
//!
//! * D1: uniform on `A`;
//! * D2: density proportional to `(p1 + p2)^n`;
//! * D3: density proportional to `(√p1 − √p2)^{2n}`, i.e. to `m^n`.
//!
//! Under the error model `err(x, q) = exp(-m x)` the expected dataset error
//! is the Laplace transform of the margin density, `∫ e^{-mx} p(m) dm`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::answer_model::{AnswerDist, QuestionInstance, QuestionSet};
use crate::error::{Error, Result};
use crate::harness::{ErrorCurve, Metric};
use crate::quadrature::{composite, gauss_panel, geometric_breaks};
use crate::specfun::lower_inc_gamma_half;

/// Split point between the log-substituted and the direct quadrature region.
pub const QUADRATURE_SPLIT: f64 = 1e-6;

/// Most tail answers `with-tail` conversion will create.
pub const MAX_TAIL_ANSWERS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopTwoSample {
    pub p1: f64,
    pub p2: f64,
}

impl TopTwoSample {
    pub fn margin(&self) -> f64 {
        let d = self.p1.sqrt() - self.p2.sqrt();
        d * d
    }

    pub fn in_region(&self) -> bool {
        0.0 <= self.p2 && self.p2 <= self.p1 && self.p1 <= 1.0 && self.p1 + self.p2 <= 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    D1,
    D2 { n: f64 },
    D3 { n: f64 },
}

fn sample_weighted<R: Rng + ?Sized>(
    n: usize,
    rng: &mut R,
    weight: impl Fn(&TopTwoSample) -> f64,
) -> Vec<TopTwoSample> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let s = TopTwoSample {
            p1: u.max(v),
            p2: u.min(v),
        };
        if s.p1 + s.p2 > 1.0 {
            continue;
        }
        let w = weight(&s);
        if w >= 1.0 || rng.random::<f64>() < w {
            out.push(s);
        }
    }
    out
}

/// Uniform points on `A` by rejection from the triangle `p2 <= p1`.
pub fn sample_d1<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<TopTwoSample> {
    sample_weighted(n, rng, |_| 1.0)
}

/// Points with density proportional to `(p1 + p2)^n_exp` (weight <= 1 on `A`).
pub fn sample_d2<R: Rng + ?Sized>(n: usize, n_exp: f64, rng: &mut R) -> Result<Vec<TopTwoSample>> {
    if !(n_exp > 0.0) {
        return Err(Error::Domain(format!("D2 exponent must be > 0, got {n_exp}")));
    }
    Ok(sample_weighted(n, rng, |s| (s.p1 + s.p2).powf(n_exp)))
}

/// Points with density proportional to `(√p1 − √p2)^{2 n_exp}`.
pub fn sample_d3<R: Rng + ?Sized>(n: usize, n_exp: f64, rng: &mut R) -> Result<Vec<TopTwoSample>> {
    if !(n_exp > 0.0) {
        return Err(Error::Domain(format!("D3 exponent must be > 0, got {n_exp}")));
    }
    Ok(sample_weighted(n, rng, |s| s.margin().powf(n_exp)))
}

pub fn sample_family<R: Rng + ?Sized>(
    family: Family,
    n: usize,
    rng: &mut R,
) -> Result<Vec<TopTwoSample>> {
    match family {
        Family::D1 => Ok(sample_d1(n, rng)),
        Family::D2 { n: e } => sample_d2(n, e, rng),
        Family::D3 { n: e } => sample_d3(n, e, rng),
    }
}

/// Margin density of D1.
pub fn d1_margin_pdf(m: f64) -> Result<f64> {
    if !(m > 0.0 && m <= 1.0) {
        return Err(Error::Domain(format!("d1_margin_pdf requires m in (0,1], got {m}")));
    }
    Ok(d1_pdf_unchecked(m))
}

fn d1_pdf_unchecked(m: f64) -> f64 {
    let s = (2.0 - m).sqrt();
    let r = m.sqrt();
    (s * s * s) / (3.0 * r) - r * s + 2.0 * m / 3.0
}

/// Margin CDF of D1: `(2/3)√m (2 − m)^{3/2} + m²/3`.
pub fn d1_margin_cdf(m: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::Domain(format!("d1_margin_cdf requires m in [0,1], got {m}")));
    }
    Ok(2.0 / 3.0 * m.sqrt() * (2.0 - m).powf(1.5) + m * m / 3.0)
}

/// Margins from `p(m) = (1 − α) m^{−α}` via `m = U^{1/(1−α)}`.
pub fn power_margin_sample<R: Rng + ?Sized>(alpha: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let inv = 1.0 / (1.0 - alpha);
    Ok((0..n)
        .map(|_| {
            let u = 1.0 - rng.random::<f64>();
            u.powf(inv)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DistStyle {
    /// Two answers with `p1 + p2 = 1` and the requested margin.
    #[default]
    Binary,
    /// Keep `(p1, p2)` and spread the rest over equal tail answers.
    WithTail,
}

/// Two-answer distribution with margin `m`; gold is the mode.
pub fn margin_to_dist(m: f64) -> Result<AnswerDist> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::Domain(format!("margin must lie in [0,1], got {m}")));
    }
    // √p1 − √p2 = √m with p1 + p2 = 1 gives p1 p2 = ((1 − m)/2)².
    let root = (m * (2.0 - m)).sqrt();
    let p1 = 0.5 * (1.0 + root);
    AnswerDist::new([("A", p1), ("B", 1.0 - p1)], Some("A".into()))
}

/// Concrete distribution for a top-two sample.
///
/// `WithTail` uses two equal tail answers, or more when two would outrank
/// `p2`; more than [`MAX_TAIL_ANSWERS`] is reported as infeasible.
pub fn top_two_to_dist(s: &TopTwoSample, style: DistStyle) -> Result<AnswerDist> {
    match style {
        DistStyle::Binary => margin_to_dist(s.margin()),
        DistStyle::WithTail => {
            if !s.in_region() {
                return Err(Error::Domain(format!("{s:?} is outside the top-two region")));
            }
            let rest = (1.0 - s.p1 - s.p2).max(0.0);
            let mut entries = vec![("A".to_string(), s.p1), ("B".to_string(), s.p2)];
            if rest > 0.0 {
                let needed = if s.p2 > 0.0 { (rest / s.p2).ceil() as usize } else { usize::MAX };
                let k = needed.max(2);
                if k > MAX_TAIL_ANSWERS {
                    return Err(Error::Domain(format!(
                        "tail mass {rest} needs {k} answers below p2 = {}",
                        s.p2
                    )));
                }
                let each = rest / k as f64;
                entries.extend((0..k).map(|i| (format!("T{i}"), each)));
            }
            AnswerDist::new(entries, Some("A".into()))
        }
    }
}

/// Question set from top-two samples; infeasible `with-tail` points are an error.
pub fn question_set_from_samples(samples: &[TopTwoSample], style: DistStyle) -> Result<QuestionSet> {
    let qs = samples
        .iter()
        .enumerate()
        .map(|(i, s)| Ok(QuestionInstance::new(format!("q{i:05}"), top_two_to_dist(s, style)?)))
        .collect::<Result<Vec<_>>>()?;
    QuestionSet::new(qs)
}

/// Draw a synthetic question set. With `WithTail`, points whose tail cannot
/// be split below `p2` are redrawn.
pub fn synthetic_question_set<R: Rng + ?Sized>(
    family: Family,
    n: usize,
    style: DistStyle,
    rng: &mut R,
) -> Result<QuestionSet> {
    let mut samples = Vec::with_capacity(n);
    while samples.len() < n {
        for s in sample_family(family, n - samples.len(), rng)? {
            if style == DistStyle::Binary || top_two_to_dist(&s, style).is_ok() {
                samples.push(s);
            }
        }
    }
    question_set_from_samples(&samples, style)
}

/// Question set with power-law margins, two answers each.
pub fn power_law_question_set<R: Rng + ?Sized>(alpha: f64, n: usize, rng: &mut R) -> Result<QuestionSet> {
    let qs = power_margin_sample(alpha, n, rng)?
        .into_iter()
        .enumerate()
        .map(|(i, m)| Ok(QuestionInstance::new(format!("q{i:05}"), margin_to_dist(m)?)))
        .collect::<Result<Vec<_>>>()?;
    QuestionSet::new(qs)
}

/// A margin density on `(0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MarginPdfSpec {
    /// Closed-form D1 density.
    D1Closed,
    /// D3 density `m^n p_D1(m) / Z`; the D3 weight depends on the margin only.
    D3 { n: f64, norm: f64 },
    /// `(1 − α) m^{−α}`.
    PowerLaw { alpha: f64 },
    /// Gaussian KDE reflected at 0 and 1.
    Kde { samples: Vec<f64>, bandwidth: f64 },
    /// Piecewise-linear density through `(m, density)` knots, zero outside.
    Tabulated { m: Vec<f64>, density: Vec<f64> },
}

impl MarginPdfSpec {
    pub fn power_law(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")));
        }
        Ok(Self::PowerLaw { alpha })
    }

    pub fn d3(n: f64) -> Result<Self> {
        if !(n > 0.0) {
            return Err(Error::Domain(format!("D3 exponent must be > 0, got {n}")));
        }
        let unnormalized = Self::D3 { n, norm: 1.0 };
        let norm = laplace_transform(&unnormalized, 0.0)?;
        Ok(Self::D3 { n, norm })
    }

    pub fn tabulated(m: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if m.len() < 2 || m.len() != density.len() {
            return Err(Error::Domain("tabulated density needs >= 2 matching knots".into()));
        }
        if m.windows(2).any(|w| w[0] >= w[1]) || m[0] < 0.0 || m[m.len() - 1] > 1.0 {
            return Err(Error::Domain("tabulated knots must increase within [0,1]".into()));
        }
        if density.iter().any(|d| !(*d >= 0.0)) {
            return Err(Error::Domain("tabulated density must be non-negative".into()));
        }
        Ok(Self::Tabulated { m, density })
    }

    pub fn pdf(&self, m: f64) -> f64 {
        if !(m > 0.0 && m <= 1.0) {
            return 0.0;
        }
        match self {
            Self::D1Closed => d1_pdf_unchecked(m),
            Self::D3 { n, norm } => m.powf(*n) * d1_pdf_unchecked(m) / norm,
            Self::PowerLaw { alpha } => (1.0 - alpha) * m.powf(-alpha),
            Self::Kde { samples, bandwidth } => kde_eval(samples, *bandwidth, m),
            Self::Tabulated { m: knots, density } => {
                if m < knots[0] || m > knots[knots.len() - 1] {
                    return 0.0;
                }
                let i = knots.partition_point(|&k| k <= m).clamp(1, knots.len() - 1);
                let (m0, m1) = (knots[i - 1], knots[i]);
                let t = (m - m0) / (m1 - m0);
                density[i - 1] * (1.0 - t) + density[i] * t
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Tabulated { m, .. } => m.clone(),
            _ => Vec::new(),
        }
    }
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn kde_eval(samples: &[f64], h: f64, m: f64) -> f64 {
    let k = |z: f64| INV_SQRT_2PI * (-0.5 * z * z).exp();
    let sum: f64 = samples
        .iter()
        .map(|&s| k((m - s) / h) + k((m + s) / h) + k((m - (2.0 - s)) / h))
        .sum();
    sum / (samples.len() as f64 * h)
}

/// Gaussian KDE of margins reflected at both ends of `[0, 1]`.
///
/// The default bandwidth is Silverman's `1.06 σ̂ n^{-1/5}`; identical samples
/// fall back to `1e-3`.
pub fn kde_margin_pdf(samples: &[f64], bandwidth: Option<f64>) -> Result<MarginPdfSpec> {
    if samples.len() < 2 {
        return Err(Error::Domain("KDE needs at least two samples".into()));
    }
    if samples.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::Domain("KDE margins must lie in [0,1]".into()));
    }
    let n = samples.len() as f64;
    let h = match bandwidth {
        Some(h) if h > 0.0 => h,
        Some(h) => return Err(Error::Domain(format!("bandwidth must be > 0, got {h}"))),
        None => {
            let mean = samples.iter().sum::<f64>() / n;
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let h = 1.06 * var.sqrt() * n.powf(-0.2);
            if h > 0.0 {
                h
            } else {
                1e-3
            }
        }
    };
    Ok(MarginPdfSpec::Kde {
        samples: samples.to_vec(),
        bandwidth: h,
    })
}

/// `∫₀¹ e^{−m x} p(m) dm`.
///
/// Below [`QUADRATURE_SPLIT`] the integral runs in `u = ln m`; above it a
/// composite Gauss rule runs on geometric panels. Mass below the log region
/// is closed with a local power-law fit, which fails for non-integrable
/// densities.
pub fn laplace_transform(spec: &MarginPdfSpec, x: f64) -> Result<f64> {
    const LOG_SPAN: f64 = 60.0;
    let m0 = QUADRATURE_SPLIT;
    let direct = |m: f64| (-m * x).exp() * spec.pdf(m);
    let breaks = geometric_breaks(m0, 1.0, 20, &spec.breakpoints());
    let upper = composite(&direct, &breaks);

    let u_hi = m0.ln();
    let u_lo = u_hi - LOG_SPAN;
    let in_log = |u: f64| {
        let m = u.exp();
        (-m * x).exp() * spec.pdf(m) * m
    };
    let lower: f64 = (0..LOG_SPAN as usize)
        .map(|k| gauss_panel(&in_log, u_lo + k as f64, u_lo + k as f64 + 1.0))
        .sum();

    let m_lo = u_lo.exp();
    let p_lo = spec.pdf(m_lo);
    let tail = if p_lo != 0.0 {
        let p_hi = spec.pdf(m_lo * std::f64::consts::E);
        let beta = if p_lo / p_hi > 0.0 { (p_lo / p_hi).ln() } else { 0.0 };
        if beta >= 1.0 {
            return Err(Error::Integration(format!(
                "density behaves like m^-{beta:.3} near 0 and is not integrable"
            )));
        }
        p_lo * m_lo / (1.0 - beta)
    } else {
        0.0
    };
    let total = upper + lower + tail;
    if !total.is_finite() {
        return Err(Error::Integration(format!("non-finite Laplace transform at x = {x}")));
    }
    Ok(total)
}

/// Laplace-transform error curve over the budgets `xs` (strictly increasing).
pub fn laplace_error_curve(spec: &MarginPdfSpec, xs: &[f64]) -> Result<ErrorCurve> {
    let errors = xs
        .iter()
        .map(|&x| laplace_transform(spec, x))
        .collect::<Result<Vec<_>>>()?;
    ErrorCurve::new("laplace", Metric::ModeError, xs.to_vec(), errors, vec![0.0; xs.len()])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Params {
    pub a: f64,
    pub b: f64,
}

impl Lemma1Params {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0) || !(b > 0.0 && b <= 1.0) {
            return Err(Error::Domain(format!("need a > 0 and b in (0,1], got ({a}, {b})")));
        }
        Ok(Self { a, b })
    }
}

/// `(a/√x) γ(1/2, b x)`: Laplace transform of `a m^{-1/2}` on `(0, b]`.
pub fn lemma1_curve(params: Lemma1Params, xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter()
        .map(|&x| {
            if x < 0.0 {
                return Err(Error::Domain(format!("x must be >= 0, got {x}")));
            }
            if x == 0.0 {
                return Ok(2.0 * params.a * params.b.sqrt());
            }
            Ok(params.a / x.sqrt() * lower_inc_gamma_half(params.b * x)?)
        })
        .collect()
}
