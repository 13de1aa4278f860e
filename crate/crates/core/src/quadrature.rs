//! Gauss–Legendre quadrature on panels.

use std::sync::OnceLock;

/// Nodes and weights of the `n`-point rule on [-1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j + 1) as f64 * z * p2 - j as f64 * p3) / (j + 1) as f64;
            }
            dp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn rule20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// 20-point Gauss–Legendre on `[a, b]`.
pub fn gauss_panel(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = rule20();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Composite rule over consecutive breakpoints.
pub fn composite(f: &impl Fn(f64) -> f64, breaks: &[f64]) -> f64 {
    breaks.windows(2).map(|w| gauss_panel(f, w[0], w[1])).sum()
}

/// Geometric panel edges from `lo` to `hi` with `per_decade` panels per decade,
/// merged with the extra breakpoints that fall inside `(lo, hi)`.
pub fn geometric_breaks(lo: f64, hi: f64, per_decade: usize, extra: &[f64]) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let ratio = (hi / lo).powf(1.0 / n as f64);
    let mut out: Vec<f64> = (0..=n).map(|k| lo * ratio.powi(k as i32)).collect();
    out[n] = hi;
    out.extend(extra.iter().copied().filter(|&e| e > lo && e < hi));
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * b.abs());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let f = |x: f64| 3.0 * x.powi(7) - x.powi(2) + 1.0;
        let exact = 3.0 / 8.0 - 1.0 / 3.0 + 1.0;
        assert!((gauss_panel(&f, 0.0, 1.0) - exact).abs() < 1e-14);
        let (_, w) = gauss_legendre(20);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn geometric_breaks_cover_range() {
        let b = geometric_breaks(1e-6, 1.0, 10, &[0.5, 2.0]);
        assert_eq!(b[0], 1e-6);
        assert_eq!(*b.last().unwrap(), 1.0);
        assert!(b.contains(&0.5));
        assert!(b.windows(2).all(|w| w[0] < w[1]));
    }
}
