//! Attack reports, scoring, corpus layout and campaign aggregation.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attack::{attack, AttackError, AttackOptions, AttackOutcome, BitSource, PhaseTimes};
use crate::gen::{benchmark_suite, generate, GenSpec};
use crate::lock::{bits_to_string, lock, parse_bits, Family, LockError, LockSpec, Manifest, Secrets, Technique};
use crate::netlist::{emit_bench, parse_bench_named, Circuit, NetlistError};
use crate::resynth::Recipe;
use crate::sat::{check_equivalence, substitute_key, SatError};
use crate::sim::{Oracle, TernaryPattern};

pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{path}: malformed key `{key}`")]
    Key { path: PathBuf, key: String },
    #[error(transparent)]
    Netlist(#[from] NetlistError),
    #[error(transparent)]
    Lock(#[from] LockError),
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error("bad campaign config: {0}")]
    Config(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ReportError + '_ {
    move |source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> ReportError + '_ {
    move |source| ReportError::Json {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verification {
    Equivalent,
    NotEquivalent,
    /// No complete key or no reference circuit.
    Skipped,
}

/// Public record of one attack run. Never holds the planted key.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub schema: u32,
    pub circuit: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub technique: Option<Technique>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub recipe: Option<Recipe>,
    pub family: Family,
    pub key_size: usize,
    pub recovered_key: TernaryPattern,
    pub structural_key: TernaryPattern,
    pub per_bit_source: Vec<BitSource>,
    pub oracle_less: bool,
    pub complete: bool,
    pub dip_count: usize,
    pub oracle_queries: u64,
    pub wall_time: PhaseTimes,
    pub anchors: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mapping: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub accuracy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub precision: Option<f64>,
    pub verification: Verification,
}

impl AttackReport {
    /// Unscored report for an outcome.
    pub fn draft(circuit: &str, outcome: &AttackOutcome) -> Self {
        AttackReport {
            schema: REPORT_SCHEMA,
            circuit: circuit.to_string(),
            technique: None,
            seed: None,
            recipe: None,
            family: outcome.family,
            key_size: outcome.key.width(),
            recovered_key: outcome.key.clone(),
            structural_key: outcome.structural.clone(),
            per_bit_source: outcome.sources.clone(),
            oracle_less: outcome.oracle_less(),
            complete: outcome.complete(),
            dip_count: outcome.dip_count,
            oracle_queries: outcome.oracle_queries,
            wall_time: outcome.times,
            anchors: outcome.anchors.clone(),
            mapping: (!outcome.mapping.is_empty()).then(|| bits_to_string(&outcome.mapping)),
            accuracy: None,
            precision: None,
            verification: Verification::Skipped,
        }
    }

    pub fn sources(&self, s: BitSource) -> usize {
        self.per_bit_source.iter().filter(|b| **b == s).count()
    }

    pub fn total_time(&self) -> f64 {
        self.wall_time.structural + self.wall_time.sat
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Fills accuracy, precision and the equivalence verdict. `locked` is the
/// netlist the planted key belongs to; the reference is that netlist with
/// the planted key tied in. A key that passes equivalence counts every bit
/// as correct, since a locked circuit may have many correct keys.
pub fn score(mut report: AttackReport, planted: &[bool], locked: &Circuit) -> Result<AttackReport, ReportError> {
    let reference = substitute_key(locked, &TernaryPattern::from_bools(planted))?;
    report.verification = match report.recovered_key.to_bools() {
        Some(k) => {
            let cand = substitute_key(locked, &TernaryPattern::from_bools(&k))?;
            if check_equivalence(&reference, &cand)?.is_equivalent() {
                Verification::Equivalent
            } else {
                Verification::NotEquivalent
            }
        }
        None => Verification::Skipped,
    };
    let n = planted.len().max(1) as f64;
    if report.verification == Verification::Equivalent {
        report.accuracy = Some(1.0);
        report.precision = Some(1.0);
        return Ok(report);
    }
    let agree = |t: &crate::sim::Ternary, p: &bool| t.to_bool() == Some(*p);
    let correct = report.recovered_key.0.iter().zip(planted).filter(|(t, p)| agree(t, p)).count();
    report.accuracy = Some(correct as f64 / n);
    let asserted: Vec<(usize, bool)> = report
        .structural_key
        .0
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.to_bool().map(|b| (i, b)))
        .collect();
    report.precision = (!asserted.is_empty()).then(|| {
        asserted.iter().filter(|(i, b)| planted[*i] == *b).count() as f64 / asserted.len() as f64
    });
    Ok(report)
}

/// One locked instance on disk.
#[derive(Clone, Debug)]
pub struct Trial {
    pub dir: PathBuf,
    pub locked: Circuit,
    pub manifest: Manifest,
    pub secrets: Secrets,
}

impl Trial {
    pub fn key(&self) -> Result<Vec<bool>, ReportError> {
        parse_bits(&self.secrets.key).ok_or_else(|| ReportError::Key {
            path: self.dir.join("secret.key"),
            key: self.secrets.key.clone(),
        })
    }
}

/// `corpus/<circuit>/<technique>/<seed>-k<key size>`.
pub fn trial_dir(corpus: &Path, circuit: &str, technique: Technique, key_size: usize, seed: u64) -> PathBuf {
    corpus
        .join(circuit)
        .join(technique.name())
        .join(format!("{seed}-k{key_size}"))
}

pub fn write_trial(
    dir: &Path,
    locked: &Circuit,
    manifest: &Manifest,
    secrets: &Secrets,
) -> Result<(), ReportError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let p = dir.join("locked.bench");
    fs::write(&p, emit_bench(locked)).map_err(io_err(&p))?;
    let p = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).map_err(json_err(&p))?;
    fs::write(&p, text).map_err(io_err(&p))?;
    let p = dir.join("secret.key");
    let text = serde_json::to_string_pretty(secrets).map_err(json_err(&p))?;
    fs::write(&p, text).map_err(io_err(&p))?;
    Ok(())
}

pub fn read_trial(dir: &Path) -> Result<Trial, ReportError> {
    let p = dir.join("locked.bench");
    let text = fs::read_to_string(&p).map_err(io_err(&p))?;
    let locked = parse_bench_named(&text, "locked")?;
    let p = dir.join("manifest.json");
    let text = fs::read_to_string(&p).map_err(io_err(&p))?;
    let manifest: Manifest = serde_json::from_str(&text).map_err(json_err(&p))?;
    let p = dir.join("secret.key");
    let text = fs::read_to_string(&p).map_err(io_err(&p))?;
    let secrets: Secrets = serde_json::from_str(&text).map_err(json_err(&p))?;
    Ok(Trial {
        dir: dir.to_path_buf(),
        locked,
        manifest,
        secrets,
    })
}

fn report_name(recipe: Option<Recipe>) -> String {
    match recipe {
        Some(r) => format!("report-{}.json", r.name()),
        None => "report.json".to_string(),
    }
}

/// Campaign matrix, read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CampaignConfig {
    pub corpus: PathBuf,
    /// Generated circuits; defaults to the four-circuit benchmark suite.
    #[serde(default = "benchmark_suite")]
    pub circuits: Vec<GenSpec>,
    #[serde(default = "all_techniques")]
    pub techniques: Vec<Technique>,
    #[serde(default = "default_key_sizes")]
    pub key_sizes: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    /// Resynthesis recipes applied to each locked netlist before the attack,
    /// in addition to the unmodified netlist.
    #[serde(default)]
    pub recipes: Vec<Recipe>,
    #[serde(default = "yes")]
    pub oracle: bool,
    #[serde(default = "one")]
    pub workers: usize,
}

fn all_techniques() -> Vec<Technique> {
    Technique::ALL.to_vec()
}

fn default_key_sizes() -> Vec<usize> {
    vec![16, 32, 64]
}

fn default_seeds() -> u64 {
    20
}

fn yes() -> bool {
    true
}

fn one() -> usize {
    1
}

impl CampaignConfig {
    pub fn new(corpus: impl Into<PathBuf>) -> Self {
        CampaignConfig {
            corpus: corpus.into(),
            circuits: benchmark_suite(),
            techniques: all_techniques(),
            key_sizes: default_key_sizes(),
            seeds: default_seeds(),
            recipes: Vec::new(),
            oracle: true,
            workers: 1,
        }
    }
}

/// Locks one instance and stores it; existing trials are reused.
pub fn ensure_trial(
    corpus: &Path,
    original: &Circuit,
    circuit: &str,
    technique: Technique,
    key_size: usize,
    seed: u64,
) -> Result<Trial, ReportError> {
    let dir = trial_dir(corpus, circuit, technique, key_size, seed);
    if dir.join("secret.key").exists() {
        return read_trial(&dir);
    }
    let art = lock(original, &LockSpec::new(technique, key_size, seed))?;
    write_trial(&dir, &art.locked, &art.manifest(circuit), &art.secrets())?;
    read_trial(&dir)
}

/// Attacks a stored trial, optionally after a recipe, and scores it.
pub fn run_trial(trial: &Trial, recipe: Option<Recipe>, use_oracle: bool) -> Result<AttackReport, ReportError> {
    let key = trial.key()?;
    let target = match recipe {
        Some(r) => r.apply(&trial.locked),
        None => trial.locked.clone(),
    };
    let oracle = use_oracle.then(|| Oracle::with_key(trial.locked.clone(), key.clone()));
    let opts = AttackOptions {
        num_pp: trial.manifest.num_pp.max(1),
        ..AttackOptions::default()
    };
    let started = Instant::now();
    let mut report = match attack(&target, oracle.as_ref(), &opts) {
        Ok(o) => AttackReport::draft(&trial.manifest.circuit, &o),
        Err(AttackError::Sat(e)) => return Err(e.into()),
        Err(AttackError::Netlist(e)) => return Err(e.into()),
        Err(_) => failed_report(&trial.manifest, started),
    };
    report.technique = Some(trial.manifest.technique);
    report.seed = Some(trial.manifest.seed);
    report.recipe = recipe;
    score(report, &key, &trial.locked)
}

fn failed_report(m: &Manifest, started: Instant) -> AttackReport {
    let x = TernaryPattern::all_x(m.key_size);
    AttackReport {
        schema: REPORT_SCHEMA,
        circuit: m.circuit.clone(),
        technique: Some(m.technique),
        seed: Some(m.seed),
        recipe: None,
        family: m.technique.family(),
        key_size: m.key_size,
        recovered_key: x.clone(),
        structural_key: x,
        per_bit_source: vec![BitSource::Unresolved; m.key_size],
        oracle_less: false,
        complete: false,
        dip_count: 0,
        oracle_queries: 0,
        wall_time: PhaseTimes {
            structural: started.elapsed().as_secs_f64(),
            sat: 0.0,
        },
        anchors: Vec::new(),
        mapping: None,
        accuracy: None,
        precision: None,
        verification: Verification::Skipped,
    }
}

pub fn write_report(dir: &Path, report: &AttackReport) -> Result<PathBuf, ReportError> {
    let p = dir.join(report_name(report.recipe));
    fs::write(&p, report.to_json()).map_err(io_err(&p))?;
    Ok(p)
}

/// Locks, attacks and scores the whole matrix, writing one report per
/// trial and recipe. Returns the reports in matrix order.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Vec<AttackReport>, ReportError> {
    if cfg.workers == 0 {
        return Err(ReportError::Config("workers must be at least 1".into()));
    }
    let mut jobs = Vec::new();
    for spec in &cfg.circuits {
        let original = generate(spec);
        for &t in &cfg.techniques {
            for &k in &cfg.key_sizes {
                for seed in 0..cfg.seeds {
                    jobs.push(ensure_trial(&cfg.corpus, &original, &spec.name, t, k, seed)?);
                }
            }
        }
    }
    let mut variants: Vec<Option<Recipe>> = vec![None];
    variants.extend(cfg.recipes.iter().copied().map(Some));
    let work: Vec<(&Trial, Option<Recipe>)> = jobs
        .iter()
        .flat_map(|t| variants.iter().map(move |r| (t, *r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| ReportError::Config(e.to_string()))?;
    pool.install(|| {
        work.par_iter()
            .map(|(t, r)| {
                let rep = run_trial(t, *r, cfg.oracle)?;
                write_report(&t.dir, &rep)?;
                Ok(rep)
            })
            .collect()
    })
}

/// Every stored report under a corpus directory, sorted by path.
pub fn collect_reports(corpus: &Path) -> Result<Vec<AttackReport>, ReportError> {
    let mut paths = Vec::new();
    let mut stack = vec![corpus.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).map_err(io_err(&d))? {
            let e = e.map_err(io_err(&d))?;
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with("report") && n.ends_with(".json"))
            {
                paths.push(p);
            }
        }
    }
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(io_err(p))?;
            serde_json::from_str(&text).map_err(json_err(p))
        })
        .collect()
}

/// One cell of the aggregate table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub circuit: String,
    pub technique: String,
    pub key_size: usize,
    pub recipe: String,
    pub trials: usize,
    pub recovered: usize,
    pub mean_time: f64,
    pub min_time: f64,
    pub max_time: f64,
    pub oracle_less_fraction: f64,
    pub dip_min: usize,
    pub dip_max: usize,
}

pub fn aggregate(reports: &[AttackReport]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(String, String, usize, String), Vec<&AttackReport>> = BTreeMap::new();
    for r in reports {
        let key = (
            r.circuit.clone(),
            r.technique.map(|t| t.name().to_string()).unwrap_or_else(|| "-".into()),
            r.key_size,
            r.recipe.map(|x| x.name().to_string()).unwrap_or_else(|| "none".into()),
        );
        cells.entry(key).or_default().push(r);
    }
    cells
        .into_iter()
        .map(|((circuit, technique, key_size, recipe), rs)| {
            let times: Vec<f64> = rs.iter().map(|r| r.total_time()).collect();
            let n = rs.len();
            AggregateRow {
                circuit,
                technique,
                key_size,
                recipe,
                trials: n,
                recovered: rs.iter().filter(|r| r.verification == Verification::Equivalent).count(),
                mean_time: times.iter().sum::<f64>() / n as f64,
                min_time: times.iter().copied().fold(f64::INFINITY, f64::min),
                max_time: times.iter().copied().fold(0.0, f64::max),
                oracle_less_fraction: rs.iter().filter(|r| r.oracle_less && r.complete).count() as f64 / n as f64,
                dip_min: rs.iter().map(|r| r.dip_count).min().unwrap_or(0),
                dip_max: rs.iter().map(|r| r.dip_count).max().unwrap_or(0),
            }
        })
        .collect()
}

pub fn to_csv(rows: &[AggregateRow]) -> String {
    let mut s = String::from(
        "circuit,technique,key_size,recipe,trials,recovered,mean_time_s,min_time_s,max_time_s,oracle_less_fraction,dip_min,dip_max\n",
    );
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{:.4},{:.4},{:.4},{:.3},{},{}\n",
            r.circuit,
            r.technique,
            r.key_size,
            r.recipe,
            r.trials,
            r.recovered,
            r.mean_time,
            r.min_time,
            r.max_time,
            r.oracle_less_fraction,
            r.dip_min,
            r.dip_max
        ));
    }
    s
}
