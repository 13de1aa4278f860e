//! Command-line front end.
//!
//! Every subcommand writes its outputs under `--out DIR` through atomic
//! renames and finishes with a `manifest.json` holding the resolved
//! configuration hash, the seed and the crate version.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::answer_model::QuestionSet;
use crate::collector::{self, CacheMode, CollectSpec};
use crate::data_io::{self, Format};
use crate::error::{Error, Result};
use crate::harness::{self, ErrorCurve, Floor, Metric, Policy, SimConfig};
use crate::policies::{greedy_fixed_allocation, lagrangian_allocation, EscConfig, StoppingConfig};
use crate::rng::substream;
use crate::synth::{self, DistStyle, Family};

#[derive(Debug, Parser)]
#[command(name = "sc-scaling", version, about = "Self-consistency allocation experiments")]
pub struct Cli {
    /// Worker threads for parallel replicates (default: available cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic question set.
    GenSynth(GenSynthArgs),
    /// Turn recorded samples into a distribution file.
    Ingest(IngestArgs),
    /// Simulate error curves from a run config.
    Simulate(SimulateArgs),
    /// Fixed allocation by greedy marginal gain or the Lagrangian closed form.
    AllocateFixed(AllocateArgs),
    /// Power-law or exponential fits of curve files.
    Fit(FitArgs),
    /// Budget needed to match SC at target sample counts.
    Efficiency(EfficiencyArgs),
    /// PPR-1v1 samples relative to the KL lower bound.
    PprRatio(PprRatioArgs),
    /// Gather samples from a chat-completions endpoint.
    Collect(CollectArgs),
    /// Serve a local mock chat-completions endpoint.
    MockServer(MockArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    D1,
    D2,
    D3,
    PowerLaw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StyleArg {
    Binary,
    WithTail,
}

impl From<StyleArg> for DistStyle {
    fn from(s: StyleArg) -> Self {
        match s {
            StyleArg::Binary => DistStyle::Binary,
            StyleArg::WithTail => DistStyle::WithTail,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenSynthArgs {
    #[arg(long, value_enum)]
    pub family: FamilyName,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Exponent `n` of D2/D3.
    #[arg(long, default_value_t = 1.0)]
    pub exponent: f64,
    /// Power-law exponent α.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = StyleArg::Binary)]
    pub style: StyleArg,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub samples: PathBuf,
    #[arg(long)]
    pub trim: bool,
    #[arg(long)]
    pub lowercase: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub reps: Option<u64>,
    /// Comma-separated policies, overriding the config.
    #[arg(long, value_delimiter = ',')]
    pub policies: Option<Vec<String>>,
    /// Comma-separated average budgets, overriding the config.
    #[arg(long, value_delimiter = ',')]
    pub checkpoints: Option<Vec<f64>>,
    /// Distribution file, overriding the configured dataset.
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    pub metric: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AllocateArgs {
    #[arg(long)]
    pub dist: PathBuf,
    /// Average samples per question.
    #[arg(long)]
    pub budget: f64,
    /// Use the closed-form allocation for margin density `(1 − α) m^{−α}`.
    #[arg(long)]
    pub lagrangian: Option<f64>,
    #[arg(long, default_value_t = 20_000)]
    pub oracle_reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitKind {
    PowerLaw,
    ExpDecay,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub curves: PathBuf,
    #[arg(long, value_enum, default_value_t = FitKind::PowerLaw)]
    pub kind: FitKind,
    /// Budget range `lo,hi` for power-law fits.
    #[arg(long, value_delimiter = ',')]
    pub range: Option<Vec<f64>>,
    /// `none`, `largest`, or a number.
    #[arg(long, default_value = "none")]
    pub floor: String,
    #[arg(long, default_value_t = 16.0)]
    pub x_min: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    #[arg(long, num_args = 1.., required = true)]
    pub curves: Vec<PathBuf>,
    /// Policy name of the SC reference curve.
    #[arg(long, default_value = "vanilla")]
    pub sc_policy: String,
    #[arg(long, value_delimiter = ',', default_values_t = vec![64u64, 128])]
    pub targets: Vec<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PprRatioArgs {
    #[arg(long)]
    pub dist: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.1, 0.05, 0.01, 0.001])]
    pub deltas: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    /// Collect spec (TOML).
    #[arg(long)]
    pub spec: PathBuf,
    /// Prompts file: one `{question_id, text, gold}` per line.
    #[arg(long)]
    pub prompts: PathBuf,
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Serve only from the cache.
    #[arg(long)]
    pub replay: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MockArgs {
    #[arg(long, default_value_t = 8000)]
    pub port: u16,
}

/// Dataset of a run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSource {
    File {
        path: PathBuf,
    },
    Synthetic {
        family: FamilyName,
        n: usize,
        #[serde(default = "one")]
        exponent: f64,
        #[serde(default = "half")]
        alpha: f64,
        #[serde(default)]
        style: DistStyle,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

fn half() -> f64 {
    0.5
}

fn default_replicates() -> u64 {
    1
}

fn default_policies() -> Vec<Policy> {
    vec![Policy::Vanilla]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSource,
    #[serde(default = "default_policies")]
    pub policies: Vec<Policy>,
    #[serde(default)]
    pub stopping: StoppingConfig,
    #[serde(default)]
    pub esc: EscConfig,
    #[serde(default)]
    pub esc_windows: Option<Vec<u64>>,
    /// Average budgets per question.
    pub checkpoints: Vec<f64>,
    #[serde(default = "default_replicates")]
    pub replicates: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub metric: Metric,
    /// Keep only questions whose gold answer is the mode.
    #[serde(default)]
    pub aligned_only: bool,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be >= 1".into()));
        }
        if self.checkpoints.is_empty() || self.checkpoints.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("checkpoints must be non-empty and strictly increasing".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::Config("at least one policy is required".into()));
        }
        self.stopping.validate()?;
        self.esc.validate()
    }
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: String,
    seed: u64,
    version: &'a str,
    outputs: Vec<String>,
}

fn hash_json<T: Serialize>(v: &T) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(v)?)))
}

fn finish<T: Serialize>(out: &Path, command: &str, config: &T, seed: u64, outputs: &[&str]) -> Result<()> {
    let m = Manifest {
        command,
        config_hash: hash_json(config)?,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    data_io::write_json(&out.join("manifest.json"), &m)
}

fn load_dataset(src: &DatasetSource) -> Result<(QuestionSet, String)> {
    match src {
        DatasetSource::File { path } => {
            let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok((data_io::read_distributions(path)?, name))
        }
        DatasetSource::Synthetic { family, n, exponent, alpha, style, seed } => {
            let qs = synthesize(*family, *n, *exponent, *alpha, *style, *seed)?;
            Ok((qs, format!("{family:?}").to_lowercase()))
        }
    }
}

fn synthesize(family: FamilyName, n: usize, exponent: f64, alpha: f64, style: DistStyle, seed: u64) -> Result<QuestionSet> {
    let mut rng = substream(seed, 0);
    match family {
        FamilyName::D1 => synth::synthetic_question_set(Family::D1, n, style, &mut rng),
        FamilyName::D2 => synth::synthetic_question_set(Family::D2 { n: exponent }, n, style, &mut rng),
        FamilyName::D3 => synth::synthetic_question_set(Family::D3 { n: exponent }, n, style, &mut rng),
        FamilyName::PowerLaw => synth::power_law_question_set(alpha, n, &mut rng),
    }
}

fn gen_synth(a: &GenSynthArgs) -> Result<()> {
    let qs = synthesize(a.family, a.n, a.exponent, a.alpha, a.style.into(), a.seed)?;
    data_io::write_distributions(&a.out.join("distributions.jsonl"), &qs)?;
    let cfg = serde_json::json!({
        "family": a.family, "n": a.n, "exponent": a.exponent, "alpha": a.alpha,
        "style": DistStyle::from(a.style),
    });
    finish(&a.out, "gen-synth", &cfg, a.seed, &["distributions.jsonl"])
}

fn ingest(a: &IngestArgs) -> Result<()> {
    let norm = data_io::Normalization { trim: a.trim, lowercase: a.lowercase };
    let recs: Vec<_> = data_io::read_samples(&a.samples)?.iter().map(|r| r.normalized(norm)).collect();
    let qs = data_io::build_question_set(&recs)?;
    data_io::write_distributions(&a.out.join("distributions.jsonl"), &qs)?;
    data_io::write_json(&a.out.join("alignment.json"), &qs.alignment_summary())?;
    let cfg = serde_json::json!({"samples": a.samples, "normalization": norm});
    finish(&a.out, "ingest", &cfg, 0, &["distributions.jsonl", "alignment.json"])
}

/// Resolve a run config with flag overrides applied.
pub fn resolve_run_config(a: &SimulateArgs) -> Result<RunConfig> {
    let text = std::fs::read_to_string(&a.config).map_err(|e| Error::io(&a.config, e))?;
    let mut cfg = RunConfig::from_toml(&text)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(r) = a.reps {
        cfg.replicates = r;
    }
    if let Some(p) = &a.policies {
        cfg.policies = p.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    }
    if let Some(c) = &a.checkpoints {
        cfg.checkpoints = c.clone();
    }
    if let Some(d) = &a.dataset {
        cfg.dataset = DatasetSource::File { path: d.clone() };
    }
    if let Some(m) = &a.metric {
        cfg.metric = m.parse()?;
    }
    if let Some(o) = &a.out {
        cfg.out = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Run every configured policy and return its curve.
pub fn simulate_curves(cfg: &RunConfig) -> Result<Vec<ErrorCurve>> {
    let (mut qs, name) = load_dataset(&cfg.dataset)?;
    if cfg.aligned_only {
        qs = qs.aligned().ok_or_else(|| Error::Config("dataset has no aligned questions".into()))?;
    }
    let sim = SimConfig {
        metric: cfg.metric,
        stopping: cfg.stopping,
        esc: cfg.esc,
        esc_windows: cfg.esc_windows.clone().unwrap_or_else(|| SimConfig::default().esc_windows),
        ..SimConfig::default()
    };
    cfg.policies
        .iter()
        .map(|&p| {
            harness::error_curve(p, &qs, &cfg.checkpoints, cfg.replicates, cfg.seed, &sim)
                .map(|c| c.with_meta(name.clone(), cfg.seed))
        })
        .collect()
}

fn simulate(a: &SimulateArgs) -> Result<()> {
    let cfg = resolve_run_config(a)?;
    let out = cfg
        .out
        .clone()
        .ok_or_else(|| Error::Config("no output directory: pass --out or set `out`".into()))?;
    let curves = simulate_curves(&cfg)?;
    data_io::write_results(&out.join("curves.csv"), &curves, Format::Csv)?;
    data_io::write_results(&out.join("curves.json"), &curves, Format::Json)?;
    let mut hashed = cfg.clone();
    hashed.out = None;
    finish(&out, "simulate", &hashed, cfg.seed, &["curves.csv", "curves.json"])
}

#[derive(Debug, Serialize)]
struct AllocationRow {
    question_id: String,
    margin: f64,
    samples: f64,
}

fn allocate_fixed(a: &AllocateArgs) -> Result<()> {
    let qs = data_io::read_distributions(&a.dist)?;
    let mut rows = Vec::with_capacity(qs.len());
    let summary = match a.lagrangian {
        Some(alpha) => {
            let la = lagrangian_allocation(alpha, a.budget)?;
            for q in qs.iter() {
                let m = q.dist.margin();
                rows.push(AllocationRow { question_id: q.id.clone(), margin: m, samples: la.x_m(m) });
            }
            serde_json::json!({"method": "lagrangian", "alpha": alpha, "lambda": la.lambda,
                "budget": la.budget(), "predicted_error": la.error()})
        }
        None => {
            let total = harness::total_for_average(a.budget, qs.len());
            let max_x = ((a.budget * 16.0).ceil() as u64).max(64);
            let curves = qs
                .iter()
                .enumerate()
                .map(|(i, q)| harness::oracle_question_curve(&q.dist, max_x, a.oracle_reps, crate::rng::derive_seed(a.seed, i as u64)))
                .collect::<Result<Vec<_>>>()?;
            let alloc = greedy_fixed_allocation(&curves, total);
            let predicted: f64 = curves.iter().zip(&alloc.counts).map(|(c, &x)| c.eval(x as f64)).sum::<f64>() / qs.len() as f64;
            for (q, &x) in qs.iter().zip(&alloc.counts) {
                rows.push(AllocationRow { question_id: q.id.clone(), margin: q.dist.margin(), samples: x as f64 });
            }
            serde_json::json!({"method": "greedy", "total": total, "average": alloc.average,
                "predicted_error": predicted})
        }
    };
    data_io::atomic_write(&a.out.join("allocation.csv"), &data_io::rows_to_csv(&rows)?)?;
    data_io::write_json(&a.out.join("allocation.json"), &serde_json::json!({"summary": summary, "questions": rows}))?;
    let cfg = serde_json::json!({"dist": a.dist, "budget": a.budget, "lagrangian": a.lagrangian, "oracle_reps": a.oracle_reps});
    finish(&a.out, "allocate-fixed", &cfg, a.seed, &["allocation.csv", "allocation.json"])
}

#[derive(Debug, Serialize)]
struct FitRow {
    policy: String,
    dataset: String,
    metric: Metric,
    kind: FitKind,
    value: f64,
    intercept: f64,
    r_squared: Option<f64>,
    points: usize,
}

fn fit(a: &FitArgs) -> Result<()> {
    let curves = data_io::read_curves(&a.curves)?;
    let floor = match a.floor.as_str() {
        "none" => Floor::None,
        "largest" => Floor::LargestBudget,
        v => Floor::Value(v.parse().map_err(|_| Error::Config(format!("invalid floor `{v}`")))?),
    };
    let range = match a.range.as_deref() {
        None => None,
        Some(&[lo, hi]) if lo < hi => Some((lo, hi)),
        Some(r) => return Err(Error::Config(format!("--range needs `lo,hi` with lo < hi, got {r:?}"))),
    };
    let mut rows = Vec::new();
    for c in &curves {
        let row = match a.kind {
            FitKind::PowerLaw => harness::fit_power_law(c, range, floor).map(|f| FitRow {
                policy: c.policy.clone(),
                dataset: c.dataset.clone(),
                metric: c.metric,
                kind: a.kind,
                value: f.slope,
                intercept: f.intercept,
                r_squared: Some(f.r_squared),
                points: f.points,
            }),
            FitKind::ExpDecay => {
                let pts: Vec<(f64, f64)> = c.budgets.iter().copied().zip(c.errors.iter().copied()).collect();
                harness::fit_exp_decay(&pts, a.x_min).map(|f| FitRow {
                    policy: c.policy.clone(),
                    dataset: c.dataset.clone(),
                    metric: c.metric,
                    kind: a.kind,
                    value: f.rate,
                    intercept: f.amplitude,
                    r_squared: None,
                    points: f.points,
                })
            }
        };
        match row {
            Ok(r) => rows.push(r),
            Err(e @ Error::Fit(_)) if curves.len() > 1 => log::warn!("skipping `{}`: {e}", c.policy),
            Err(e) => return Err(e),
        }
    }
    if rows.is_empty() {
        return Err(Error::Fit("no curve could be fit".into()));
    }
    data_io::atomic_write(&a.out.join("fits.csv"), &data_io::rows_to_csv(&rows)?)?;
    data_io::write_json(&a.out.join("fits.json"), &rows)?;
    let cfg = serde_json::json!({"curves": a.curves, "kind": a.kind, "range": a.range, "floor": a.floor, "x_min": a.x_min});
    finish(&a.out, "fit", &cfg, 0, &["fits.csv", "fits.json"])
}

fn efficiency(a: &EfficiencyArgs) -> Result<()> {
    let mut curves = Vec::new();
    for p in &a.curves {
        curves.extend(data_io::read_curves(p)?);
    }
    let sc_name: Policy = a.sc_policy.parse()?;
    let sc = curves
        .iter()
        .find(|c| c.policy == sc_name.name() || c.policy == a.sc_policy)
        .cloned()
        .ok_or_else(|| Error::Config(format!("no `{}` curve among the inputs", a.sc_policy)))?;
    let table = harness::efficiency_table(&curves, &sc, &a.targets)?;
    data_io::atomic_write(&a.out.join("efficiency.csv"), &data_io::rows_to_csv(&table.rows)?)?;
    data_io::write_json(&a.out.join("efficiency.json"), &table)?;
    let cfg = serde_json::json!({"curves": a.curves, "sc_policy": a.sc_policy, "targets": a.targets});
    finish(&a.out, "efficiency", &cfg, 0, &["efficiency.csv", "efficiency.json"])
}

fn ppr_ratio(a: &PprRatioArgs) -> Result<()> {
    let qs = data_io::read_distributions(&a.dist)?;
    let pts = harness::ppr_optimality_ratio(&qs, &a.deltas, a.reps, a.seed, &StoppingConfig::default())?;
    data_io::atomic_write(&a.out.join("ppr_ratio.csv"), &data_io::rows_to_csv(&pts)?)?;
    data_io::write_json(&a.out.join("ppr_ratio.json"), &pts)?;
    let cfg = serde_json::json!({"dist": a.dist, "deltas": a.deltas, "reps": a.reps});
    finish(&a.out, "ppr-ratio", &cfg, a.seed, &["ppr_ratio.csv", "ppr_ratio.json"])
}

fn collect(a: &CollectArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.spec).map_err(|e| Error::io(&a.spec, e))?;
    let mut spec: CollectSpec = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
    if let Some(e) = &a.endpoint {
        spec.endpoint = e.clone();
    }
    if let Some(d) = &a.cache_dir {
        spec.cache_dir = Some(d.clone());
    }
    if a.replay {
        spec.cache_mode = CacheMode::ReplayOnly;
    }
    let prompts = collector::read_prompts(&a.prompts)?;
    let report = collector::collect(&spec, &prompts)?;
    log::info!("{} network calls, {} cache hits", report.network_calls, report.cache_hits);
    data_io::write_samples(&a.out.join("samples.jsonl"), &report.records)?;
    let mut hashed = spec.clone();
    hashed.cache_mode = CacheMode::Record;
    let cfg = serde_json::json!({"spec": hashed, "prompts": a.prompts});
    finish(&a.out, "collect", &cfg, 0, &["samples.jsonl"])
}

fn mock_server(a: &MockArgs) -> Result<()> {
    let addr = format!("127.0.0.1:{}", a.port);
    let server = collector::mock::MockServer::bind(&addr, collector::mock::MockConfig::default())
        .map_err(|e| Error::Config(format!("cannot bind {addr}: {e}")))?;
    println!("{}", server.url());
    server.wait();
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers {
        if w == 0 {
            return Err(Error::Config("--workers must be >= 1".into()));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::GenSynth(a) => gen_synth(a),
        Command::Ingest(a) => ingest(a),
        Command::Simulate(a) => simulate(a),
        Command::AllocateFixed(a) => allocate_fixed(a),
        Command::Fit(a) => fit(a),
        Command::Efficiency(a) => efficiency(a),
        Command::PprRatio(a) => ppr_ratio(a),
        Command::Collect(a) => collect(a),
        Command::MockServer(a) => mock_server(a),
    })
}

pub fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CFG: &str = r#"
seed = 3
replicates = 2
checkpoints = [1.0, 2.0, 4.0]
policies = ["vanilla", "asc"]

[dataset]
kind = "synthetic"
family = "d1"
n = 20
"#;

    #[test]
    fn parses_run_config() {
        let c = RunConfig::from_toml(CFG).unwrap();
        assert_eq!(c.policies, vec![Policy::Vanilla, Policy::Asc]);
        assert_eq!(c.replicates, 2);
        assert!(matches!(c.dataset, DatasetSource::Synthetic { n: 20, .. }));
        c.validate().unwrap();
        assert!(RunConfig::from_toml(&format!("{CFG}\nbogus = 1")).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        let c = RunConfig::from_toml(&CFG.replace("[1.0, 2.0, 4.0]", "[2.0, 1.0]")).unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::from_toml(&CFG.replace("replicates = 2", "replicates = 0")).unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn simulate_curves_runs() {
        let c = RunConfig::from_toml(CFG).unwrap();
        let curves = simulate_curves(&c).unwrap();
        assert_eq!(curves.len(), 2);
        assert_eq!(curves[0].dataset, "d1");
        assert_eq!(curves[1].policy, "asc");
    }
}
