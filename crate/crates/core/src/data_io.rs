//! File formats.
//!
//! * samples: one `{question_id, gold, samples}` object per line;
//! * distributions: one `{question_id, gold, answers: [{label, prob}]}` per line;
//! * curves: CSV with `policy, metric, budget_avg, error, stderr, seed, dataset`
//!   or JSON mirroring [`ErrorCurve`].
//!
//! Every writer goes through a temporary file in the target directory and an
//! atomic rename.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::answer_model::{AnswerDist, QuestionInstance, QuestionSet};
use crate::error::{Error, Result};
use crate::harness::{ErrorCurve, Metric};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleRecord {
    pub question_id: String,
    #[serde(default)]
    pub gold: Option<String>,
    pub samples: Vec<String>,
}

/// Optional answer clean-up applied before counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Normalization {
    pub trim: bool,
    pub lowercase: bool,
}

impl Normalization {
    pub fn apply(&self, s: &str) -> String {
        let s = if self.trim { s.trim() } else { s };
        if self.lowercase {
            s.to_lowercase()
        } else {
            s.to_string()
        }
    }
}

impl SampleRecord {
    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.question_id.is_empty() {
            return Err("question_id is empty".into());
        }
        if self.samples.is_empty() {
            return Err("samples is empty".into());
        }
        Ok(())
    }

    pub fn normalized(&self, n: Normalization) -> SampleRecord {
        SampleRecord {
            question_id: self.question_id.clone(),
            gold: self.gold.as_deref().map(|g| n.apply(g)),
            samples: self.samples.iter().map(|s| n.apply(s)).collect(),
        }
    }
}

fn read_lines<T>(path: &Path, parse: impl Fn(&str) -> std::result::Result<T, String>) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse(&line).map_err(|message| Error::Schema { line: i + 1, message })?);
    }
    Ok(out)
}

pub fn read_samples(path: &Path) -> Result<Vec<SampleRecord>> {
    read_lines(path, |line| {
        let rec: SampleRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        rec.validate()?;
        Ok(rec)
    })
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for item in items {
        serde_json::to_writer(&mut buf, &item)?;
        buf.push(b'\n');
    }
    Ok(buf)
}

pub fn write_samples(path: &Path, records: &[SampleRecord]) -> Result<()> {
    atomic_write(path, &jsonl(records)?)
}

/// Empirical distribution of the record's samples, labels ordered by
/// descending frequency then lexicographically.
pub fn build_question(rec: &SampleRecord) -> Result<QuestionInstance> {
    let mut tally: BTreeMap<&str, u64> = BTreeMap::new();
    for s in &rec.samples {
        *tally.entry(s.as_str()).or_default() += 1;
    }
    let n = rec.samples.len() as f64;
    let dist = AnswerDist::new(tally.into_iter().map(|(l, c)| (l, c as f64 / n)), rec.gold.clone())?;
    Ok(QuestionInstance::new(rec.question_id.clone(), dist))
}

pub fn build_question_set(records: &[SampleRecord]) -> Result<QuestionSet> {
    QuestionSet::new(records.iter().map(build_question).collect::<Result<Vec<_>>>()?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerEntry {
    label: String,
    prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistRecord {
    question_id: String,
    #[serde(default)]
    gold: Option<String>,
    answers: Vec<AnswerEntry>,
}

pub fn read_distributions(path: &Path) -> Result<QuestionSet> {
    let qs = read_lines(path, |line| {
        let rec: DistRecord = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if rec.question_id.is_empty() {
            return Err("question_id is empty".into());
        }
        let dist = AnswerDist::new(rec.answers.into_iter().map(|a| (a.label, a.prob)), rec.gold)
            .map_err(|e| e.to_string())?;
        Ok(QuestionInstance::new(rec.question_id, dist))
    })?;
    QuestionSet::new(qs)
}

pub fn distributions_to_bytes(qs: &QuestionSet) -> Result<Vec<u8>> {
    jsonl(qs.iter().map(|q| DistRecord {
        question_id: q.id.clone(),
        gold: q.dist.gold().map(str::to_string),
        answers: q
            .dist
            .labels()
            .iter()
            .zip(q.dist.probs())
            .map(|(l, &p)| AnswerEntry { label: l.clone(), prob: p })
            .collect(),
    }))
}

pub fn write_distributions(path: &Path, qs: &QuestionSet) -> Result<()> {
    atomic_write(path, &distributions_to_bytes(qs)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CurveRow {
    policy: String,
    metric: Metric,
    budget_avg: f64,
    error: f64,
    stderr: f64,
    seed: u64,
    dataset: String,
}

pub fn curves_to_csv(curves: &[ErrorCurve]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    // Header is written by the first row; emit it explicitly for empty input.
    if curves.iter().all(ErrorCurve::is_empty) {
        w.write_record(["policy", "metric", "budget_avg", "error", "stderr", "seed", "dataset"])?;
    }
    for c in curves {
        for k in 0..c.len() {
            w.serialize(CurveRow {
                policy: c.policy.clone(),
                metric: c.metric,
                budget_avg: c.budgets[k],
                error: c.errors[k],
                stderr: c.stderrs[k],
                seed: c.seed,
                dataset: c.dataset.clone(),
            })?;
        }
    }
    w.into_inner().map_err(|e| Error::Io {
        path: "<memory>".into(),
        source: e.into_error(),
    })
}

pub fn write_curves_csv(path: &Path, curves: &[ErrorCurve]) -> Result<()> {
    atomic_write(path, &curves_to_csv(curves)?)
}

/// Curves from CSV, grouped by `(policy, metric, dataset, seed)` in first-seen order.
pub fn read_curves_csv(path: &Path) -> Result<Vec<ErrorCurve>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::Reader::from_reader(file);
    let mut curves: Vec<ErrorCurve> = Vec::new();
    for (i, row) in r.deserialize::<CurveRow>().enumerate() {
        let row = row.map_err(|e| Error::Schema { line: i + 2, message: e.to_string() })?;
        let pos = curves.iter().position(|c| {
            c.policy == row.policy && c.metric == row.metric && c.dataset == row.dataset && c.seed == row.seed
        });
        let c = match pos {
            Some(p) => &mut curves[p],
            None => {
                curves.push(ErrorCurve {
                    policy: row.policy.clone(),
                    metric: row.metric,
                    budgets: Vec::new(),
                    errors: Vec::new(),
                    stderrs: Vec::new(),
                    dataset: row.dataset.clone(),
                    seed: row.seed,
                });
                curves.last_mut().expect("just pushed")
            }
        };
        c.budgets.push(row.budget_avg);
        c.errors.push(row.error);
        c.stderrs.push(row.stderr);
    }
    for c in &curves {
        c.validate()?;
    }
    Ok(curves)
}

/// Curves from a `.json` file (array of curves) or CSV otherwise.
pub fn read_curves(path: &Path) -> Result<Vec<ErrorCurve>> {
    if path.extension().is_some_and(|e| e == "json") {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let curves: Vec<ErrorCurve> = serde_json::from_str(&text)?;
        for c in &curves {
            c.validate()?;
        }
        Ok(curves)
    } else {
        read_curves_csv(path)
    }
}

pub fn to_json_bytes<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut buf = serde_json::to_vec_pretty(value)?;
    buf.push(b'\n');
    Ok(buf)
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    atomic_write(path, &to_json_bytes(value)?)
}

/// Rows of any serializable record type as CSV.
pub fn rows_to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io {
        path: "<memory>".into(),
        source: e.into_error(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Write curves in the requested format.
pub fn write_results(path: &Path, curves: &[ErrorCurve], format: Format) -> Result<()> {
    match format {
        Format::Csv => write_curves_csv(path, curves),
        Format::Json => write_json(path, curves),
    }
}

/// Write `bytes` to a temporary sibling of `path`, then rename over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn rec(id: &str, gold: Option<&str>, samples: &[&str]) -> SampleRecord {
        SampleRecord {
            question_id: id.into(),
            gold: gold.map(str::to_string),
            samples: samples.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn empty_file_reads_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        fs::write(&p, "").unwrap();
        assert!(read_samples(&p).unwrap().is_empty());
    }

    #[test]
    fn missing_samples_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        fs::write(&p, "{\"question_id\":\"a\",\"gold\":null,\"samples\":[\"x\"]}\n{\"question_id\":\"b\"}\n").unwrap();
        match read_samples(&p) {
            Err(Error::Schema { line, message }) => {
                assert_eq!(line, 2);
                assert!(message.contains("samples"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        fs::write(&p, "{\"question_id\":\"a\",\"samples\":[]}\n").unwrap();
        assert!(matches!(read_samples(&p), Err(Error::Schema { line: 1, .. })));
    }

    #[test]
    fn samples_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.jsonl");
        let recs = vec![rec("a", Some("1"), &["1", "2", "1"]), rec("b", None, &["x"])];
        write_samples(&p, &recs).unwrap();
        assert_eq!(read_samples(&p).unwrap(), recs);
        assert!(fs::read(&p).unwrap().ends_with(b"\n"));
    }

    #[test]
    fn build_question_examples() {
        let q = build_question(&rec("q", Some("A"), &["A", "A", "B", "A"])).unwrap();
        assert_eq!(q.dist.labels(), ["A", "B"]);
        assert_eq!(q.dist.probs(), [0.75, 0.25]);
        let same: Vec<&str> = vec!["z"; 100];
        assert_eq!(build_question(&rec("q", None, &same)).unwrap().dist.len(), 1);
        let mut s = vec!["A"; 60];
        s.extend(vec!["B"; 40]);
        let q = build_question(&rec("q", None, &s)).unwrap();
        assert_relative_eq!(q.dist.margin(), 0.020204, epsilon = 1e-6);
        let tie = build_question(&rec("q", None, &["b", "a"])).unwrap();
        assert_eq!(tie.dist.labels(), ["a", "b"]);
    }

    #[test]
    fn normalization_is_opt_in() {
        let r = rec("q", Some(" A"), &["A ", "a", "A"]);
        assert_eq!(build_question(&r).unwrap().dist.len(), 3);
        let n = r.normalized(Normalization { trim: true, lowercase: true });
        assert_eq!(build_question(&n).unwrap().dist.len(), 1);
        assert_eq!(n.gold.as_deref(), Some("a"));
    }

    #[test]
    fn distributions_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        let recs = vec![rec("a", Some("1"), &["1", "2", "1", "3", "3", "3"]), rec("b", None, &["x", "y"])];
        let qs = build_question_set(&recs).unwrap();
        write_distributions(&p, &qs).unwrap();
        let back = read_distributions(&p).unwrap();
        for (a, b) in qs.iter().zip(back.iter()) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.dist.labels(), b.dist.labels());
            assert_eq!(a.dist.gold(), b.dist.gold());
            for (x, y) in a.dist.probs().iter().zip(b.dist.probs()) {
                assert!((x - y).abs() <= 1e-12);
            }
        }
        write_distributions(&p, &back).unwrap();
        assert_eq!(fs::read(&p).unwrap(), distributions_to_bytes(&qs).unwrap());
    }

    #[test]
    fn distribution_schema_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.jsonl");
        fs::write(&p, "{\"question_id\":\"a\",\"answers\":[{\"label\":\"x\",\"prob\":0.5}]}\n").unwrap();
        assert!(matches!(read_distributions(&p), Err(Error::Schema { line: 1, .. })));
    }

    fn curve(policy: &str, k: usize) -> ErrorCurve {
        ErrorCurve::new(
            policy,
            Metric::ModeError,
            (1..=k).map(|i| i as f64).collect(),
            (1..=k).map(|i| 1.0 / i as f64).collect(),
            vec![0.01; k],
        )
        .unwrap()
        .with_meta("d1", 7)
    }

    #[test]
    fn curve_csv_shape_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        let curves = vec![curve("asc", 4), curve("ppr", 3)];
        write_results(&p, &curves, Format::Csv).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 8);
        assert_eq!(lines[0], "policy,metric,budget_avg,error,stderr,seed,dataset");
        assert!(text.ends_with('\n'));
        let back = read_curves_csv(&p).unwrap();
        assert_eq!(back, curves);
        let policies: std::collections::HashSet<&str> = lines[1..].iter().map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(policies.len(), 2);
    }

    #[test]
    fn curve_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        let curves = vec![curve("blend", 5)];
        write_results(&p, &curves, Format::Json).unwrap();
        assert_eq!(read_curves(&p).unwrap(), curves);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("x.txt");
        atomic_write(&p, b"one\n").unwrap();
        atomic_write(&p, b"two\n").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two\n");
        assert_eq!(fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
