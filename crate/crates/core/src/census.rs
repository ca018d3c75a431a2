//! Enumeration and parallel classification of curves over `F_q`, with
//! CSV/JSON reports.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::curves::{check_record_fields, CaseType, ClassificationRecord, Curve, CurveError, EllipticCurve, Genus2Curve};
use crate::fields::{FieldElement, FieldError, Poly, PrimeSpec};
use crate::Height;

/// Exhaustive enumeration is allowed while `q^(deg+1)` stays within this.
pub const EXHAUSTIVE_CAP: u64 = 10_000_000;

pub const CSV_HEADER: &str = "p,f,p_rank,a_number,height,case,a1,a2";

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("exhaustive census over F_{q} in degree {degree} has {count} candidates, above the cap {cap}; use sampled mode")]
    CapExceeded { q: u64, degree: usize, count: u64, cap: u64 },
    #[error("invalid census configuration: {0}")]
    Config(String),
    #[error("oracle disagreement: {0}")]
    Oracle(CurveError),
    #[error("classification of y^2 = {curve} failed: {source}")]
    Classify { curve: String, source: CurveError },
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusConfig {
    pub p: u32,
    pub field_deg: usize,
    pub genus: u32,
    /// Degrees of `f` for genus 2; ignored for genus 1.
    pub degrees: Vec<usize>,
    pub verify: bool,
    pub jobs: usize,
    /// `Some(n)` draws `n` curves at random instead of enumerating all.
    pub samples: Option<usize>,
    pub seed: u64,
}

impl CensusConfig {
    pub fn genus2(p: u32, degrees: &[usize]) -> Self {
        CensusConfig {
            p,
            field_deg: 1,
            genus: 2,
            degrees: degrees.to_vec(),
            verify: false,
            jobs: 1,
            samples: None,
            seed: 0,
        }
    }

    pub fn genus1(p: u32) -> Self {
        CensusConfig { genus: 1, degrees: vec![3], ..CensusConfig::genus2(p, &[]) }
    }

    fn validate(&self) -> Result<&'static PrimeSpec, CensusError> {
        let spec = PrimeSpec::extension(self.p, self.field_deg)?;
        match self.genus {
            1 => {}
            2 if !self.degrees.is_empty() && self.degrees.iter().all(|d| *d == 5 || *d == 6) => {}
            2 => return Err(CensusError::Config(format!("genus-2 degrees must be 5 or 6, got {:?}", self.degrees))),
            g => return Err(CensusError::Config(format!("genus must be 1 or 2, got {g}"))),
        }
        if self.jobs == 0 {
            return Err(CensusError::Config("jobs must be at least 1".into()));
        }
        Ok(spec)
    }

    fn degree_list(&self) -> Vec<usize> {
        if self.genus == 1 {
            return vec![3];
        }
        let mut d = self.degrees.clone();
        d.sort_unstable();
        d.dedup();
        d
    }
}

/// Candidate tuples in a fixed order: by degree, then leading coefficient,
/// then lower coefficients as base-`q` digits (constant term fastest).
#[derive(Debug, Clone)]
struct Candidates {
    spec: &'static PrimeSpec,
    genus: u32,
    blocks: Vec<(usize, Vec<FieldElement>)>,
}

impl Candidates {
    fn new(spec: &'static PrimeSpec, cfg: &CensusConfig) -> Self {
        let units: Vec<FieldElement> = spec.elements().filter(|e| !e.is_zero()).collect();
        let blocks = cfg
            .degree_list()
            .into_iter()
            .map(|d| {
                let leads = match d {
                    6 => vec![spec.one(), spec.first_nonsquare()],
                    5 => units.clone(),
                    _ => vec![spec.one()],
                };
                (d, leads)
            })
            .collect();
        Candidates { spec, genus: cfg.genus, blocks }
    }

    fn block_size(&self, d: usize, leads: usize) -> u64 {
        let lower = if self.genus == 1 { 2 } else { d };
        leads as u64 * self.spec.order().pow(lower as u32)
    }

    fn len(&self) -> u64 {
        self.blocks.iter().map(|(d, l)| self.block_size(*d, l.len())).sum()
    }

    fn check_cap(&self) -> Result<(), CensusError> {
        let q = self.spec.order();
        for (d, _) in &self.blocks {
            let count = q.checked_pow(*d as u32 + 1).unwrap_or(u64::MAX);
            if count > EXHAUSTIVE_CAP {
                return Err(CensusError::CapExceeded { q, degree: *d, count, cap: EXHAUSTIVE_CAP });
            }
        }
        Ok(())
    }

    fn curve_from(&self, d: usize, lead: FieldElement, mut code: u64) -> Option<Curve> {
        let q = self.spec.order();
        if self.genus == 1 {
            let a = self.spec.from_index(code % q);
            let b = self.spec.from_index(code / q % q);
            return EllipticCurve::new(a, b).ok().map(Curve::Elliptic);
        }
        let mut coeffs = Vec::with_capacity(d + 1);
        for _ in 0..d {
            coeffs.push(self.spec.from_index(code % q));
            code /= q;
        }
        coeffs.push(lead);
        Genus2Curve::new(Poly::new(self.spec, coeffs)).ok().map(Curve::Genus2)
    }

    /// The curve at position `idx`, or `None` for a singular candidate.
    fn get(&self, mut idx: u64) -> Option<Curve> {
        for (d, leads) in &self.blocks {
            let size = self.block_size(*d, leads.len());
            if idx < size {
                let per_lead = size / leads.len() as u64;
                return self.curve_from(*d, leads[(idx / per_lead) as usize], idx % per_lead);
            }
            idx -= size;
        }
        None
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Option<Curve> {
        use rand::Rng;
        let idx = rng.gen_range(0..self.len());
        self.get(idx)
    }
}

/// Bound on rejection-sampling attempts per requested curve.
const SAMPLE_ATTEMPTS_PER_CURVE: usize = 64;

/// The configured curves, in a deterministic order.
pub fn enumerate_curves(cfg: &CensusConfig) -> Result<Box<dyn Iterator<Item = Curve> + Send>, CensusError> {
    let spec = cfg.validate()?;
    let cands = Candidates::new(spec, cfg);
    match cfg.samples {
        None => {
            cands.check_cap()?;
            let n = cands.len();
            Ok(Box::new((0..n).filter_map(move |i| cands.get(i))))
        }
        Some(n) => Ok(Box::new(sample(&cands, n, cfg.seed)?.into_iter())),
    }
}

fn sample(cands: &Candidates, n: usize, seed: u64) -> Result<Vec<Curve>, CensusError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n {
        attempts += 1;
        if attempts > n.max(1) * SAMPLE_ATTEMPTS_PER_CURVE {
            return Err(CensusError::Config("too many singular candidates while sampling".into()));
        }
        if let Some(c) = cands.random(&mut rng) {
            out.push(c);
        }
    }
    Ok(out)
}

/// One classified curve as written to reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub p: u32,
    pub genus: u32,
    pub f: String,
    pub p_rank: u32,
    pub a_number: u32,
    pub height: Height,
    pub case: CaseType,
    pub a1: Option<i64>,
    pub a2: Option<i64>,
}

impl CensusRow {
    pub fn from_record(r: &ClassificationRecord) -> Self {
        CensusRow {
            p: r.p(),
            genus: r.genus,
            f: r.f.to_string(),
            p_rank: r.p_rank,
            a_number: r.a_number,
            height: r.height,
            case: r.case_type,
            a1: r.a1(),
            a2: r.a2(),
        }
    }

    pub fn check_invariants(&self) -> Result<(), String> {
        check_record_fields(self.genus, self.p_rank, self.a_number, self.height, self.case)
            .map_err(|e| format!("y^2 = {}: {e}", self.f))
    }

    pub fn stratum(&self) -> Stratum {
        Stratum { p_rank: self.p_rank, a_number: self.a_number, height: self.height, case: self.case }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Stratum {
    pub p_rank: u32,
    pub a_number: u32,
    pub height: Height,
    pub case: CaseType,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusReport {
    pub p: u32,
    pub field_deg: usize,
    pub genus: u32,
    pub degrees: Vec<usize>,
    pub verify: bool,
    pub sampled: bool,
    pub strata: BTreeMap<Stratum, u64>,
    pub total: u64,
    pub oracle_agreements: u64,
    pub oracle_disagreements: u64,
    pub elapsed_secs: f64,
    pub rows: Vec<CensusRow>,
}

impl CensusReport {
    /// Equality ignoring `elapsed_secs`.
    pub fn same_content(&self, other: &CensusReport) -> bool {
        CensusReport { elapsed_secs: 0.0, ..self.clone() } == CensusReport { elapsed_secs: 0.0, ..other.clone() }
    }

    pub fn count(&self, pred: impl Fn(&Stratum) -> bool) -> u64 {
        self.strata.iter().filter(|(s, _)| pred(s)).map(|(_, n)| n).sum()
    }

    /// Stratum counts partition the total and every row is consistent.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.strata.values().sum::<u64>() != self.total || self.rows.len() as u64 != self.total {
            return Err("stratum counts do not sum to the total".into());
        }
        let by_height = |h: Height| self.count(|s| s.height == h);
        if self.genus == 2 && by_height(Height::Finite(1)) + by_height(Height::Finite(2)) + by_height(Height::Infinite) != self.total {
            return Err("heights do not partition the census".into());
        }
        if self.count(|s| s.case == CaseType::Superspecial) != self.count(|s| s.a_number == self.genus) {
            return Err("superspecial count differs from the a-number count".into());
        }
        if self.verify && self.oracle_agreements != self.total {
            return Err("oracle tally does not cover every curve".into());
        }
        self.rows.iter().try_for_each(CensusRow::check_invariants)
    }

    fn tally(rows: &[CensusRow]) -> BTreeMap<Stratum, u64> {
        let mut strata = BTreeMap::new();
        for r in rows {
            *strata.entry(r.stratum()).or_insert(0) += 1;
        }
        strata
    }
}

fn classify_one(c: &Curve, verify: bool) -> Result<CensusRow, CensusError> {
    let record = c.classify(verify).map_err(|e| match e {
        e @ CurveError::OracleDisagreement { .. } => CensusError::Oracle(e),
        e => CensusError::Classify { curve: c.rhs().to_string(), source: e },
    })?;
    let row = CensusRow::from_record(&record);
    row.check_invariants().map_err(CensusError::Invariant)?;
    Ok(row)
}

/// Classifies every configured curve on `cfg.jobs` workers; rows keep the
/// enumeration order, so the report does not depend on `jobs`.
pub fn run_census(cfg: &CensusConfig) -> Result<CensusReport, CensusError> {
    let start = Instant::now();
    let spec = cfg.validate()?;
    let curves: Vec<Curve> = enumerate_curves(cfg)?.collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CensusError::Config(e.to_string()))?;
    let rows: Vec<CensusRow> =
        pool.install(|| curves.par_iter().map(|c| classify_one(c, cfg.verify)).collect::<Result<_, _>>())?;
    let total = rows.len() as u64;
    let report = CensusReport {
        p: cfg.p,
        field_deg: cfg.field_deg,
        genus: cfg.genus,
        degrees: cfg.degree_list(),
        verify: cfg.verify,
        sampled: cfg.samples.is_some(),
        strata: CensusReport::tally(&rows),
        total,
        oracle_agreements: if cfg.verify { total } else { 0 },
        oracle_disagreements: 0,
        elapsed_secs: start.elapsed().as_secs_f64(),
        rows,
    };
    report.check_invariants().map_err(CensusError::Invariant)?;
    log_diagnostics(&report, spec);
    Ok(report)
}

fn log_diagnostics(r: &CensusReport, spec: &PrimeSpec) {
    if r.total == 0 {
        return;
    }
    let q = spec.order() as f64;
    let frac = |n: u64| n as f64 / r.total as f64;
    let tall = r.count(|s| s.height != Height::Finite(1));
    let infinite = r.count(|s| s.height.is_infinite() || (r.genus == 1 && s.p_rank == 0));
    log::info!(
        "census over F_{}: {} curves in {:.2}s; fraction with h >= 2: {:.4} (1/q = {:.4}); \
         fraction with p-rank 0: {:.4} (1/q^2 = {:.4})",
        spec.order(),
        r.total,
        r.elapsed_secs,
        frac(tall),
        1.0 / q,
        frac(infinite),
        1.0 / (q * q)
    );
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    p: u32,
    f: String,
    p_rank: u32,
    a_number: u32,
    height: String,
    case: CaseType,
    a1: Option<i64>,
    a2: Option<i64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRow {
    p: u32,
    genus: u32,
    f: String,
    p_rank: u32,
    a_number: u32,
    height: Option<u32>,
    height_is_infinite: bool,
    case: CaseType,
    a1: Option<i64>,
    a2: Option<i64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonStratum {
    p_rank: u32,
    a_number: u32,
    height: Option<u32>,
    height_is_infinite: bool,
    case: CaseType,
    count: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonReport {
    p: u32,
    field_deg: usize,
    genus: u32,
    degrees: Vec<usize>,
    verify: bool,
    sampled: bool,
    total: u64,
    oracle_agreements: u64,
    oracle_disagreements: u64,
    elapsed_secs: f64,
    strata: Vec<JsonStratum>,
    records: Vec<JsonRow>,
}

fn height_from_json(h: Option<u32>, inf: bool) -> Result<Height, String> {
    match (h, inf) {
        (None, true) => Ok(Height::Infinite),
        (Some(h), false) if h >= 1 => Ok(Height::Finite(h)),
        _ => Err(format!("inconsistent height fields {h:?}, infinite = {inf}")),
    }
}

impl From<&CensusReport> for JsonReport {
    fn from(r: &CensusReport) -> Self {
        JsonReport {
            p: r.p,
            field_deg: r.field_deg,
            genus: r.genus,
            degrees: r.degrees.clone(),
            verify: r.verify,
            sampled: r.sampled,
            total: r.total,
            oracle_agreements: r.oracle_agreements,
            oracle_disagreements: r.oracle_disagreements,
            elapsed_secs: r.elapsed_secs,
            strata: r
                .strata
                .iter()
                .map(|(s, &count)| JsonStratum {
                    p_rank: s.p_rank,
                    a_number: s.a_number,
                    height: s.height.finite(),
                    height_is_infinite: s.height.is_infinite(),
                    case: s.case,
                    count,
                })
                .collect(),
            records: r
                .rows
                .iter()
                .map(|row| JsonRow {
                    p: row.p,
                    genus: row.genus,
                    f: row.f.clone(),
                    p_rank: row.p_rank,
                    a_number: row.a_number,
                    height: row.height.finite(),
                    height_is_infinite: row.height.is_infinite(),
                    case: row.case,
                    a1: row.a1,
                    a2: row.a2,
                })
                .collect(),
        }
    }
}

impl TryFrom<JsonReport> for CensusReport {
    type Error = String;

    fn try_from(j: JsonReport) -> Result<Self, String> {
        let rows = j
            .records
            .into_iter()
            .map(|r| {
                Ok(CensusRow {
                    p: r.p,
                    genus: r.genus,
                    f: r.f,
                    p_rank: r.p_rank,
                    a_number: r.a_number,
                    height: height_from_json(r.height, r.height_is_infinite)?,
                    case: r.case,
                    a1: r.a1,
                    a2: r.a2,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let strata = j
            .strata
            .into_iter()
            .map(|s| {
                let height = height_from_json(s.height, s.height_is_infinite)?;
                Ok((Stratum { p_rank: s.p_rank, a_number: s.a_number, height, case: s.case }, s.count))
            })
            .collect::<Result<BTreeMap<_, _>, String>>()?;
        Ok(CensusReport {
            p: j.p,
            field_deg: j.field_deg,
            genus: j.genus,
            degrees: j.degrees,
            verify: j.verify,
            sampled: j.sampled,
            strata,
            total: j.total,
            oracle_agreements: j.oracle_agreements,
            oracle_disagreements: j.oracle_disagreements,
            elapsed_secs: j.elapsed_secs,
            rows,
        })
    }
}

/// Writes the per-curve rows as CSV with header [`CSV_HEADER`].
pub fn write_csv<W: Write>(rows: &[CensusRow], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in rows {
        w.serialize(CsvRow {
            p: r.p,
            f: r.f.clone(),
            p_rank: r.p_rank,
            a_number: r.a_number,
            height: r.height.to_string(),
            case: r.case,
            a1: r.a1,
            a2: r.a2,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(report: &CensusReport, mut out: W) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(&mut out, &JsonReport::from(report))?;
    out.write_all(b"\n").map_err(serde_json::Error::io)
}

/// Writes `report` to `path` in `format`.
pub fn emit_report(report: &CensusReport, format: Format, path: &Path) -> Result<(), CensusError> {
    let io_err = |source| CensusError::Io { path: path.to_path_buf(), source };
    let file = BufWriter::new(File::create(path).map_err(io_err)?);
    match format {
        Format::Csv => write_csv(&report.rows, file).map_err(|source| CensusError::Csv { path: path.to_path_buf(), source }),
        Format::Json => write_json(report, file).map_err(|source| CensusError::Json { path: path.to_path_buf(), source }),
    }
}

/// Reads rows written by [`write_csv`]; the genus is recovered from `deg f`.
pub fn read_csv(path: &Path, field_deg: usize) -> Result<Vec<CensusRow>, CensusError> {
    let csv_err = |source| CensusError::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(CensusError::Invariant(format!("{}: unexpected header {:?}", path.display(), header)));
    }
    let mut rows = Vec::new();
    for rec in reader.deserialize::<CsvRow>() {
        let r = rec.map_err(csv_err)?;
        let spec = PrimeSpec::extension(r.p, field_deg)?;
        let f = Poly::parse(spec, &r.f).map_err(|e| CensusError::Invariant(format!("bad polynomial {:?}: {e}", r.f)))?;
        let genus = if f.degree() == Some(3) { 1 } else { 2 };
        let height = r.height.parse().map_err(|e| CensusError::Invariant(format!("{e}")))?;
        rows.push(CensusRow {
            p: r.p,
            genus,
            f: r.f,
            p_rank: r.p_rank,
            a_number: r.a_number,
            height,
            case: r.case,
            a1: r.a1,
            a2: r.a2,
        });
    }
    Ok(rows)
}

pub fn read_json(path: &Path) -> Result<CensusReport, CensusError> {
    let file = File::open(path).map_err(|source| CensusError::Io { path: path.to_path_buf(), source })?;
    let j: JsonReport = serde_json::from_reader(io::BufReader::new(file))
        .map_err(|source| CensusError::Json { path: path.to_path_buf(), source })?;
    CensusReport::try_from(j).map_err(CensusError::Invariant)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quintic_candidates_over_f3() {
        let cfg = CensusConfig::genus2(3, &[5]);
        let spec = cfg.validate().unwrap();
        assert_eq!(Candidates::new(spec, &cfg).len(), 486);
        let curves: Vec<Curve> = enumerate_curves(&cfg).unwrap().collect();
        assert!(!curves.is_empty() && curves.len() < 486);
        assert!(curves.iter().all(|c| c.rhs().is_squarefree() && c.rhs().degree() == Some(5)));
    }

    #[test]
    fn elliptic_candidates_over_f3() {
        // 4a^3 + 27b^2 = a^3 in characteristic 3: singular iff a = 0.
        let curves: Vec<Curve> = enumerate_curves(&CensusConfig::genus1(3)).unwrap().collect();
        assert_eq!(curves.len(), 9 - 3);
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = CensusConfig { field_deg: 2, ..CensusConfig::genus2(7, &[6]) };
        assert!(matches!(enumerate_curves(&cfg), Err(CensusError::CapExceeded { .. })));
        let sampled = CensusConfig { samples: Some(5), seed: 3, ..cfg };
        assert_eq!(enumerate_curves(&sampled).unwrap().count(), 5);
    }

    #[test]
    fn sampling_is_deterministic() {
        let cfg = CensusConfig { samples: Some(20), seed: 42, ..CensusConfig::genus2(5, &[5, 6]) };
        let a: Vec<Curve> = enumerate_curves(&cfg).unwrap().collect();
        let b: Vec<Curve> = enumerate_curves(&cfg).unwrap().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_configs() {
        assert!(matches!(run_census(&CensusConfig::genus2(3, &[4])), Err(CensusError::Config(_))));
        assert!(matches!(run_census(&CensusConfig { jobs: 0, ..CensusConfig::genus1(3) }), Err(CensusError::Config(_))));
        assert!(matches!(run_census(&CensusConfig::genus1(2)), Err(CensusError::Field(_))));
    }

    #[test]
    fn small_census_invariants() {
        let cfg = CensusConfig { verify: true, ..CensusConfig::genus2(3, &[5]) };
        let r = run_census(&cfg).unwrap();
        r.check_invariants().unwrap();
        assert_eq!(r.oracle_agreements, r.total);
        assert_eq!(r.oracle_disagreements, 0);
    }

    #[test]
    fn empty_census_writes_header_only() {
        let mut out = Vec::new();
        write_csv(&[], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn infinite_height_is_inf_in_csv() {
        let cfg = CensusConfig::genus2(3, &[5]);
        let r = run_census(&cfg).unwrap();
        let mut out = Vec::new();
        write_csv(&r.rows, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.lines().any(|l| l.split(',').nth(4) == Some("inf")));
        // a1, a2 are empty without verification
        assert!(text.lines().skip(1).all(|l| l.ends_with(",,")));
    }
}
