use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::Allocation;
use crate::answer_model::{EmpiricalCounts, QuestionSet};
use crate::error::{Error, Result};
use crate::rng::substream;

/// Vanilla SC: `x` draws per question, prediction is the empirical mode.
///
/// Question `i` draws from stream `i` of `seed`.
pub fn vanilla_sc(qs: &QuestionSet, x: u64, seed: u64) -> Result<(Vec<usize>, Allocation)> {
    if x == 0 {
        return Err(Error::Domain("vanilla SC needs x >= 1".into()));
    }
    let predictions = qs
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let mut rng = substream(seed, i as u64);
            let mut c = EmpiricalCounts::new(q.dist.len());
            for _ in 0..x {
                c.add(q.dist.draw_index(&mut rng));
            }
            c.mode(&mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((predictions, Allocation::uniform(qs.len(), x)))
}

/// Budget of the threshold allocation at `λ` under `p(m) = (1 − α) m^{−α}`.
pub fn lagrangian_budget(alpha: f64, lambda: f64) -> f64 {
    let c = (1.0 - alpha) / alpha;
    c / alpha * (lambda.powf(-alpha) - 1.0) + c * lambda.ln()
}

/// Dataset error of the threshold allocation at `λ`.
pub fn lagrangian_error(alpha: f64, lambda: f64) -> f64 {
    lambda.powf(1.0 - alpha) / alpha - (1.0 - alpha) / alpha * lambda
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagrangianAllocation {
    pub lambda: f64,
    pub alpha: f64,
}

impl LagrangianAllocation {
    /// Samples for a question of margin `m`: `(ln m − ln λ)/m` above `λ`, else 0.
    pub fn x_m(&self, m: f64) -> f64 {
        if m >= self.lambda {
            (m.ln() - self.lambda.ln()) / m
        } else {
            0.0
        }
    }

    pub fn budget(&self) -> f64 {
        lagrangian_budget(self.alpha, self.lambda)
    }

    pub fn error(&self) -> f64 {
        lagrangian_error(self.alpha, self.lambda)
    }
}

/// Solve the budget equation for `λ` by bisection in `ln λ`.
pub fn lagrangian_allocation(alpha: f64, budget: f64) -> Result<LagrangianAllocation> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha must lie in (0,1), got {alpha}")));
    }
    if !(budget > 0.0 && budget.is_finite()) {
        return Err(Error::Domain(format!("budget must be > 0, got {budget}")));
    }
    let residual = |u: f64| lagrangian_budget(alpha, u.exp()) - budget;
    // Budget decreases in λ and vanishes at λ = 1.
    let (mut lo, mut hi) = (-700.0f64, 0.0f64);
    if !(residual(lo) > 0.0) {
        return Err(Error::Numeric(format!(
            "budget {budget} is not bracketed for alpha = {alpha}"
        )));
    }
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        let r = residual(mid);
        if r.abs() <= 1e-9 {
            return Ok(LagrangianAllocation { lambda: mid.exp(), alpha });
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
            break;
        }
    }
    // For large budgets 1e-9 is below the resolution of the budget itself.
    let u = [lo, 0.5 * (lo + hi), hi]
        .into_iter()
        .min_by(|a, b| residual(*a).abs().total_cmp(&residual(*b).abs()))
        .unwrap();
    if residual(u).abs() <= 1e-9f64.max(64.0 * f64::EPSILON * budget) {
        Ok(LagrangianAllocation { lambda: u.exp(), alpha })
    } else {
        Err(Error::Numeric(format!("bisection stalled at residual {}", residual(u))))
    }
}

/// Per-question error as a function of its sample count.
pub trait ErrorModel {
    fn error(&self, x: u64) -> f64;
}

impl<F: Fn(u64) -> f64> ErrorModel for F {
    fn error(&self, x: u64) -> f64 {
        self(x)
    }
}

/// Nonincreasing convex curve: piecewise linear through hull knots, linear
/// extrapolation to the left and `y_k e^{−β(x − x_k)}` to the right.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexCurve {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub tail_rate: f64,
}

impl ConvexCurve {
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 {
            let y = self.ys[0];
            return if x <= self.xs[0] { y } else { y * (-self.tail_rate * (x - self.xs[0])).exp() };
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1] * (-self.tail_rate * (x - self.xs[n - 1])).exp();
        }
        let i = self.xs.partition_point(|&k| k <= x).clamp(1, n - 1);
        let (x0, x1, y0, y1) = (self.xs[i - 1], self.xs[i], self.ys[i - 1], self.ys[i]);
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// Tail amplitude `A` with the tail written as `A e^{−βx}`.
    pub fn tail_amplitude(&self) -> f64 {
        let k = self.xs.len() - 1;
        self.ys[k] * (self.tail_rate * self.xs[k]).exp()
    }
}

impl ErrorModel for ConvexCurve {
    fn error(&self, x: u64) -> f64 {
        self.eval(x as f64)
    }
}

fn isotonic_nonincreasing(ys: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(ys.len());
    for &y in ys {
        blocks.push((y, 1));
        while blocks.len() >= 2 {
            let (s1, n1) = blocks[blocks.len() - 1];
            let (s0, n0) = blocks[blocks.len() - 2];
            if s1 / n1 as f64 > s0 / n0 as f64 {
                blocks.pop();
                *blocks.last_mut().expect("two blocks") = (s0 + s1, n0 + n1);
            } else {
                break;
            }
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, n)| std::iter::repeat_n(s / n as f64, n))
        .collect()
}

fn lower_hull(xs: &[f64], ys: &[f64]) -> Vec<usize> {
    let mut h: Vec<usize> = Vec::with_capacity(xs.len());
    for i in 0..xs.len() {
        while h.len() >= 2 {
            let (o, a) = (h[h.len() - 2], h[h.len() - 1]);
            let cross = (xs[a] - xs[o]) * (ys[i] - ys[o]) - (ys[a] - ys[o]) * (xs[i] - xs[o]);
            if cross <= 0.0 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(i);
    }
    h
}

/// Isotonic-decreasing regression, lower convex hull, then an exponential
/// tail fitted to the last hull knots and clamped to keep convexity.
pub fn convexify_curve(points: &[(f64, f64)]) -> Result<ConvexCurve> {
    if points.len() < 2 {
        return Err(Error::Domain("convexify_curve needs at least two points".into()));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::Domain("curve x values must be strictly increasing".into()));
    }
    if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::Domain("curve points must be finite".into()));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let ys = isotonic_nonincreasing(&points.iter().map(|p| p.1).collect::<Vec<_>>());
    let hull = lower_hull(&xs, &ys);
    let hx: Vec<f64> = hull.iter().map(|&i| xs[i]).collect();
    let hy: Vec<f64> = hull.iter().map(|&i| ys[i]).collect();
    let k = hx.len() - 1;
    let last_slope = (hy[k] - hy[k - 1]) / (hx[k] - hx[k - 1]);
    let tail_rate = if hy[k] <= 0.0 || last_slope >= 0.0 {
        0.0
    } else {
        let cap = -last_slope / hy[k];
        let fit: Vec<(f64, f64)> = (k.saturating_sub(3)..=k)
            .filter(|&i| hy[i] > 0.0)
            .map(|i| (hx[i], hy[i].ln()))
            .collect();
        let fitted = if fit.len() >= 2 {
            let n = fit.len() as f64;
            let mx = fit.iter().map(|p| p.0).sum::<f64>() / n;
            let my = fit.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = fit.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = fit.iter().map(|p| (p.0 - mx).powi(2)).sum();
            -sxy / sxx
        } else {
            cap
        };
        fitted.clamp(0.0, cap)
    };
    Ok(ConvexCurve { xs: hx, ys: hy, tail_rate })
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Gain {
    value: f64,
    index: usize,
}

impl Eq for Gain {}

impl Ord for Gain {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then_with(|| Reverse(self.index).cmp(&Reverse(other.index)))
    }
}

impl PartialOrd for Gain {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Hand out `budget` samples one at a time to the largest marginal gain,
/// ties to the lowest index. Optimal when every curve is convex.
pub fn greedy_fixed_allocation<M: ErrorModel>(curves: &[M], budget: u64) -> Allocation {
    let mut counts = vec![0u64; curves.len()];
    if curves.is_empty() {
        return Allocation::new(counts);
    }
    let gain = |i: usize, x: u64| curves[i].error(x) - curves[i].error(x + 1);
    let mut heap: BinaryHeap<Gain> = (0..curves.len())
        .map(|i| Gain { value: gain(i, 0), index: i })
        .collect();
    for _ in 0..budget {
        let top = heap.pop().expect("heap holds every question");
        let i = top.index;
        counts[i] += 1;
        heap.push(Gain { value: gain(i, counts[i]), index: i });
    }
    Allocation::new(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::answer_model::{AnswerDist, QuestionInstance};
    use crate::oracle_bounds::exact_mode_error;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn exhaustive<M: ErrorModel>(curves: &[M], budget: u64) -> f64 {
        fn rec<M: ErrorModel>(curves: &[M], left: u64, acc: f64, best: &mut f64) {
            if curves.len() == 1 {
                *best = best.min(acc + curves[0].error(left));
                return;
            }
            for x in 0..=left {
                rec(&curves[1..], left - x, acc + curves[0].error(x), best);
            }
        }
        let mut best = f64::INFINITY;
        rec(curves, budget, 0.0, &mut best);
        best
    }

    fn total_error<M: ErrorModel>(curves: &[M], a: &Allocation) -> f64 {
        curves.iter().zip(&a.counts).map(|(c, &x)| c.error(x)).sum()
    }

    #[test]
    fn vanilla_single_draw_and_uniform() {
        let d = AnswerDist::new([("A", 0.5), ("B", 0.3), ("C", 0.2)], None).unwrap();
        let qs = QuestionSet::new(vec![QuestionInstance::new("q", d.clone())]).unwrap();
        let (pred, alloc) = vanilla_sc(&qs, 1, 9).unwrap();
        assert_eq!(pred[0], d.draw_index(&mut substream(9, 0)));
        assert_eq!(alloc.counts, vec![1]);
        assert!(vanilla_sc(&qs, 0, 9).is_err());
    }

    #[test]
    fn vanilla_error_matches_exact() {
        let d = AnswerDist::binary(0.6).unwrap();
        let qs = QuestionSet::new(vec![QuestionInstance::new("q", d)]).unwrap();
        let runs = 100_000;
        let wrong = (0..runs)
            .filter(|&s| vanilla_sc(&qs, 3, s).unwrap().0[0] != 0)
            .count() as f64
            / runs as f64;
        let sigma = (0.352f64 * 0.648 / runs as f64).sqrt();
        assert!((wrong - 0.352).abs() <= 3.0 * sigma, "{wrong}");
    }

    #[test]
    fn lagrangian_examples() {
        let a = LagrangianAllocation { lambda: (-2.0f64).exp(), alpha: 0.5 };
        assert_relative_eq!(a.x_m((-1.0f64).exp()), std::f64::consts::E, max_relative = 1e-14);
        assert_eq!(a.x_m(a.lambda), 0.0);
        assert_eq!(a.x_m(a.lambda / 2.0), 0.0);
        assert_relative_eq!(lagrangian_budget(0.5, 0.01), 18.0 + 0.01f64.ln(), max_relative = 1e-12);
        assert!((lagrangian_budget(0.5, 0.01) - 13.395).abs() < 1e-3);
        assert_relative_eq!(lagrangian_error(0.5, 0.01), 0.19, max_relative = 1e-12);
    }

    #[test]
    fn lagrangian_bisection_residual() {
        for alpha in [0.1, 0.3, 0.5, 0.7, 0.9] {
            for budget in [0.5, 1.0, 10.0, 100.0, 1e3, 1e4] {
                let a = lagrangian_allocation(alpha, budget).unwrap();
                assert!((a.budget() - budget).abs() <= 1e-9, "alpha={alpha} budget={budget}");
                assert!(a.lambda > 0.0 && a.lambda <= 1.0);
            }
        }
        assert!(lagrangian_allocation(0.5, 0.0).is_err());
        assert!(lagrangian_allocation(1.0, 1.0).is_err());
    }

    #[test]
    fn lagrangian_error_matches_quadrature() {
        use crate::quadrature::{composite, geometric_breaks};
        for alpha in [0.3, 0.5, 0.8] {
            let a = lagrangian_allocation(alpha, 50.0).unwrap();
            let p = |m: f64| (1.0 - alpha) * m.powf(-alpha);
            let breaks = geometric_breaks(a.lambda, 1.0, 40, &[]);
            let above = composite(&|m| (-m * a.x_m(m)).exp() * p(m), &breaks);
            let below = a.lambda.powf(1.0 - alpha);
            let spent = composite(&|m| a.x_m(m) * p(m), &breaks);
            assert_relative_eq!(above + below, a.error(), max_relative = 1e-8);
            assert_relative_eq!(spent, 50.0, max_relative = 1e-8);
        }
    }

    #[test]
    fn convexify_keeps_exponential() {
        let pts: Vec<(f64, f64)> = (0..20).map(|i| (i as f64, (-(i as f64)).exp())).collect();
        let c = convexify_curve(&pts).unwrap();
        for &(x, y) in &pts {
            assert!((c.eval(x) - y).abs() < 1e-9);
        }
        assert_relative_eq!(c.tail_rate, 1.0, max_relative = 1e-9);
        assert!((c.eval(25.0) - (-25.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn convexify_flat_and_errors() {
        let c = convexify_curve(&[(1.0, 0.3), (2.0, 0.3), (5.0, 0.3)]).unwrap();
        for x in 0..20 {
            assert_eq!(c.error(x) - c.error(x + 1), 0.0);
        }
        assert!(convexify_curve(&[(1.0, 0.3)]).is_err());
        assert!(convexify_curve(&[(1.0, 0.3), (1.0, 0.2)]).is_err());
    }

    proptest! {
        #[test]
        fn convexify_is_monotone_convex(ys in proptest::collection::vec(0.0f64..1.0, 2..30)) {
            let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (1.0 + 2.0 * i as f64, y)).collect();
            let c = convexify_curve(&pts).unwrap();
            let vals: Vec<f64> = (0..120).map(|x| c.error(x)).collect();
            let gains: Vec<f64> = vals.windows(2).map(|w| w[0] - w[1]).collect();
            prop_assert!(gains.iter().all(|&g| g >= -1e-12));
            prop_assert!(gains.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }

        #[test]
        fn greedy_matches_exhaustive(
            params in proptest::collection::vec((0.05f64..1.0, 0.01f64..2.0, 0.0f64..0.3), 1..=4),
            budget in 0u64..=12,
        ) {
            let curves: Vec<_> = params
                .iter()
                .map(|&(a, b, c)| move |x: u64| a * (-b * x as f64).exp() + c)
                .collect();
            let alloc = greedy_fixed_allocation(&curves, budget);
            prop_assert_eq!(alloc.total(), budget);
            prop_assert!((total_error(&curves, &alloc) - exhaustive(&curves, budget)).abs() <= 1e-12);
        }
    }

    #[test]
    fn greedy_examples() {
        let curves = [|x: u64| (-(x as f64)).exp(), |x: u64| (-0.1 * x as f64).exp()];
        let curves: Vec<&dyn Fn(u64) -> f64> = vec![&curves[0], &curves[1]];
        let a = greedy_fixed_allocation(&curves, 4);
        assert_eq!(a.counts, vec![2, 2]);
        let err = total_error(&curves, &a);
        assert!((err - ((-2.0f64).exp() + (-0.2f64).exp())).abs() < 1e-12);
        assert!((err - 0.9540).abs() < 1e-4);
        assert!((err - exhaustive(&curves, 4)).abs() < 1e-15);
        assert_eq!(greedy_fixed_allocation(&curves, 0).counts, vec![0, 0]);
        let same = [|x: u64| (-0.3 * x as f64).exp(); 3];
        assert_eq!(greedy_fixed_allocation(&same, 9).counts, vec![3, 3, 3]);
    }

    #[test]
    fn greedy_on_convexified_exact_curves() {
        let dists = [0.9, 0.7, 0.55].map(|p| AnswerDist::binary(p).unwrap());
        let curves: Vec<ConvexCurve> = dists
            .iter()
            .map(|d| {
                let pts: Vec<(f64, f64)> = (1..=15).map(|x| (x as f64, exact_mode_error(d, x).unwrap().value)).collect();
                convexify_curve(&pts).unwrap()
            })
            .collect();
        let a = greedy_fixed_allocation(&curves, 12);
        assert_eq!(a.total(), 12);
        assert!((total_error(&curves, &a) - exhaustive(&curves, 12)).abs() <= 1e-12);
    }
}
