//! Python bindings: distributions are passed as probability lists.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sc_scaling::harness::{self, Floor, Policy, SimConfig};
use sc_scaling::policies::{self, convexify_curve};
use sc_scaling::synth::{self, Lemma1Params, MarginPdfSpec};
use sc_scaling::{oracle_bounds, AnswerDist, EmpiricalCounts, QuestionInstance, QuestionSet};

fn py_err(e: sc_scaling::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn dist(probs: &[f64]) -> PyResult<AnswerDist> {
    AnswerDist::new(probs.iter().enumerate().map(|(i, &p)| (format!("a{i}"), p)), None).map_err(py_err)
}

#[pyfunction]
fn margin(probs: Vec<f64>) -> PyResult<f64> {
    Ok(dist(&probs)?.margin())
}

#[pyfunction]
fn exact_mode_error(probs: Vec<f64>, x: u64) -> PyResult<f64> {
    Ok(oracle_bounds::exact_mode_error(&dist(&probs)?, x).map_err(py_err)?.value)
}

#[pyfunction]
#[pyo3(signature = (probs, x, reps=100_000, seed=0))]
fn mc_mode_error(probs: Vec<f64>, x: u64, reps: u64, seed: u64) -> PyResult<(f64, f64)> {
    let e = oracle_bounds::mc_mode_error(&dist(&probs)?, x, reps, seed).map_err(py_err)?;
    Ok((e.value, e.stderr))
}

#[pyfunction]
fn thm1_bound(probs: Vec<f64>, x: u64) -> PyResult<f64> {
    Ok(oracle_bounds::thm1_bound(&dist(&probs)?, x))
}

#[pyfunction]
fn kl_lower_bound(probs: Vec<f64>, delta: f64) -> PyResult<f64> {
    Ok(oracle_bounds::kl_lower_bound_samples(&dist(&probs)?, delta).map_err(py_err)?.samples)
}

#[pyfunction]
fn asc_confidence(n1: u64, n2: u64) -> f64 {
    policies::asc_confidence(&EmpiricalCounts::from_counts(vec![n1, n2]))
}

#[pyfunction]
fn ppr_confidence(counts: Vec<u64>) -> f64 {
    policies::ppr_confidence(&EmpiricalCounts::from_counts(counts))
}

/// Returns `(lambda, predicted_error)`.
#[pyfunction]
fn lagrangian_allocation(alpha: f64, budget: f64) -> PyResult<(f64, f64)> {
    let a = policies::lagrangian_allocation(alpha, budget).map_err(py_err)?;
    Ok((a.lambda, a.error()))
}

/// `kind` is `d1`, `d3` (with `param` = n) or `power-law` (with `param` = α).
#[pyfunction]
#[pyo3(signature = (kind, xs, param=1.0))]
fn laplace_error_curve(kind: &str, xs: Vec<f64>, param: f64) -> PyResult<Vec<f64>> {
    let spec = match kind {
        "d1" => MarginPdfSpec::D1Closed,
        "d3" => MarginPdfSpec::d3(param).map_err(py_err)?,
        "power-law" => MarginPdfSpec::power_law(param).map_err(py_err)?,
        _ => return Err(PyValueError::new_err(format!("unknown density `{kind}`"))),
    };
    Ok(synth::laplace_error_curve(&spec, &xs).map_err(py_err)?.errors)
}

#[pyfunction]
fn lemma1_curve(a: f64, b: f64, xs: Vec<f64>) -> PyResult<Vec<f64>> {
    synth::lemma1_curve(Lemma1Params::new(a, b).map_err(py_err)?, &xs).map_err(py_err)
}

/// Returns `(slope, intercept, r_squared)`.
#[pyfunction]
fn fit_power_law(budgets: Vec<f64>, errors: Vec<f64>) -> PyResult<(f64, f64, f64)> {
    let n = budgets.len();
    let c = harness::ErrorCurve::new("py", harness::Metric::ModeError, budgets, errors, vec![0.0; n]).map_err(py_err)?;
    let f = harness::fit_power_law(&c, None, Floor::None).map_err(py_err)?;
    Ok((f.slope, f.intercept, f.r_squared))
}

/// Greedy allocation over per-question `(x, err)` point lists.
#[pyfunction]
fn greedy_allocation(curves: Vec<Vec<(f64, f64)>>, budget: u64) -> PyResult<Vec<u64>> {
    let curves = curves.iter().map(|c| convexify_curve(c)).collect::<Result<Vec<_>, _>>().map_err(py_err)?;
    Ok(policies::greedy_fixed_allocation(&curves, budget).counts)
}

/// Mode-error curve of `policy` on a set of questions; returns `(errors, stderrs)`.
#[pyfunction]
#[pyo3(signature = (policy, dists, budgets, reps=10, seed=0))]
fn simulate(policy: &str, dists: Vec<Vec<f64>>, budgets: Vec<f64>, reps: u64, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let p: Policy = policy.parse().map_err(py_err)?;
    let qs = dists
        .iter()
        .enumerate()
        .map(|(i, d)| Ok(QuestionInstance::new(format!("q{i}"), dist(d)?)))
        .collect::<PyResult<Vec<_>>>()?;
    let qs = QuestionSet::new(qs).map_err(py_err)?;
    let c = harness::error_curve(p, &qs, &budgets, reps, seed, &SimConfig::default()).map_err(py_err)?;
    Ok((c.errors, c.stderrs))
}

#[pymodule]
fn sc_scaling_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(margin, m)?)?;
    m.add_function(wrap_pyfunction!(exact_mode_error, m)?)?;
    m.add_function(wrap_pyfunction!(mc_mode_error, m)?)?;
    m.add_function(wrap_pyfunction!(thm1_bound, m)?)?;
    m.add_function(wrap_pyfunction!(kl_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(asc_confidence, m)?)?;
    m.add_function(wrap_pyfunction!(ppr_confidence, m)?)?;
    m.add_function(wrap_pyfunction!(lagrangian_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_error_curve, m)?)?;
    m.add_function(wrap_pyfunction!(lemma1_curve, m)?)?;
    m.add_function(wrap_pyfunction!(fit_power_law, m)?)?;
    m.add_function(wrap_pyfunction!(greedy_allocation, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
