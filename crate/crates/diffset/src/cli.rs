//! Survey drivers, certificate persistence, and report emission.
//!
//! Certificates are one JSON object per line (JSONL, `"schema":1`), which
//! doubles as an append-only journal: an interrupted run can resume by
//! skipping the parameter sets already on disk. Markdown reports are
//! regenerated from the full record set and are byte-identical for equal
//! configurations (record timing lives only in the JSONL lines).

use crate::battery::{run_battery, BatteryConfig, Certificate, Status, Verdict};
use crate::constructions::{known_family, KnownFamilyTag};
use crate::contraction::ContractionProblem;
use crate::error::Error;
use crate::hadamard::{hadamard_scan, HadamardConfig, HadamardReport, HadamardStatus};
use crate::multipliers::is_w_multiplier;
use crate::numtheory::factor;
use crate::params::{enumerate_params, make_params, ParamSet};
use crate::planar::{ppc_scan, PpcConfig, PpcOutcome, PpcReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const CERTIFICATE_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Markdown,
    Jsonl,
    Both,
}

impl OutputFormat {
    fn wants_md(self) -> bool {
        matches!(self, OutputFormat::Markdown | OutputFormat::Both)
    }
    fn wants_jsonl(self) -> bool {
        matches!(self, OutputFormat::Jsonl | OutputFormat::Both)
    }
}

/// Full survey configuration. Equal configs produce identical reports,
/// independent of worker count.
#[derive(Debug, Clone)]
pub struct SurveyConfig {
    pub k_min: u64,
    pub k_max: u64,
    pub battery: BatteryConfig,
    /// Restrict the report to rows with gcd(v, n) > 1 (Ryser's conjecture
    /// universe); certificates are still written for every row scanned.
    pub ryser_only: bool,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub resume: bool,
}

impl Default for SurveyConfig {
    fn default() -> Self {
        Self {
            k_min: 2,
            k_max: 150,
            battery: BatteryConfig::with_contraction(),
            ryser_only: false,
            out: None,
            format: OutputFormat::Both,
            resume: false,
        }
    }
}

/// One serialized certificate line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateRecord {
    pub schema: u32,
    pub v: u64,
    pub k: u64,
    pub lambda: u64,
    pub n: u64,
    pub status: String,
    pub tests: Vec<TestRecord>,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestRecord {
    pub name: String,
    pub verdict: String,
    pub witness: Option<crate::battery::Witness>,
}

impl CertificateRecord {
    pub fn from_certificate(cert: &Certificate, elapsed_ms: u64) -> Self {
        Self {
            schema: CERTIFICATE_SCHEMA,
            v: cert.params.v,
            k: cert.params.k,
            lambda: cert.params.lambda,
            n: cert.params.n,
            status: cert.status.to_string(),
            tests: cert
                .results
                .iter()
                .map(|r| TestRecord {
                    name: r.test.to_string(),
                    verdict: r.verdict.to_string(),
                    witness: r.witness.clone(),
                })
                .collect(),
            elapsed_ms,
        }
    }

    pub fn key(&self) -> (u64, u64, u64) {
        (self.v, self.k, self.lambda)
    }

    pub fn is_excluded(&self) -> bool {
        self.status.starts_with("excluded")
    }

    pub fn excluding_test(&self) -> Option<&str> {
        self.status.strip_prefix("excluded:")
    }
}

/// Run the battery and upgrade the status through the known-family lookup.
/// A known family that the battery excluded is a soundness violation and
/// is reported instead of silently upgraded.
pub fn certify(ps: ParamSet, battery: &BatteryConfig) -> (Certificate, Option<KnownFamilyTag>) {
    let mut cert = run_battery(ps, battery);
    let family = known_family(ps);
    if let Some(tag) = family {
        match cert.status {
            Status::Open => cert.status = Status::Exists { family: tag },
            Status::Excluded { .. } => return (cert, family), // violation, caller handles
            Status::Exists { .. } => {}
        }
    }
    (cert, family)
}

#[derive(Debug, Default)]
pub struct RunOutcome {
    pub records: Vec<CertificateRecord>,
    /// Certificates produced in this run (resumed records are not re-run,
    /// so they have no certificate here).
    pub certificates: Vec<Certificate>,
    /// Parameter sets a construction realizes that some test excluded.
    pub soundness_violations: Vec<ParamSet>,
}

fn read_journal(path: &Path) -> Result<Vec<CertificateRecord>, Error> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut records = Vec::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let record: CertificateRecord =
            serde_json::from_str(line).map_err(|e| Error::Domain(format!(
                "{}: malformed journal line: {e}",
                path.display()
            )))?;
        records.push(record);
    }
    Ok(records)
}

fn append_lines(path: &Path, records: &[CertificateRecord]) -> Result<(), Error> {
    let io_err = |source: std::io::Error| Error::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err)?;
    let mut buf = String::new();
    for record in records {
        buf.push_str(&serde_json::to_string(record).expect("records serialize"));
        buf.push('\n');
    }
    file.write_all(buf.as_bytes()).map_err(io_err)?;
    Ok(())
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Enumerate parameters for the configured k range, run the battery over
/// each, and write certificates (JSONL journal) plus a markdown table.
/// With `resume`, parameter sets already journaled are skipped.
pub fn run_survey(config: &SurveyConfig) -> Result<RunOutcome, Error> {
    let jsonl_path = config.out.as_ref().map(|p| p.with_extension("jsonl"));
    let md_path = config.out.as_ref().map(|p| p.with_extension("md"));

    let mut existing = Vec::new();
    if let Some(path) = &jsonl_path {
        if config.resume {
            existing = read_journal(path)?;
        } else if path.exists() {
            write_text(path, "")?;
        }
    }
    let done: HashSet<(u64, u64, u64)> = existing.iter().map(|r| r.key()).collect();

    let mut outcome = RunOutcome {
        records: existing,
        ..Default::default()
    };
    for k in config.k_min..=config.k_max {
        let batch: Vec<ParamSet> = enumerate_params(k, k)
            .filter(|ps| !done.contains(&(ps.v, ps.k, ps.lambda)))
            .collect();
        if batch.is_empty() {
            continue;
        }
        let mut certified: Vec<(CertificateRecord, Option<KnownFamilyTag>, Certificate)> = batch
            .into_par_iter()
            .map(|ps| {
                let start = Instant::now();
                let (cert, family) = certify(ps, &config.battery);
                let elapsed = start.elapsed().as_millis() as u64;
                (
                    CertificateRecord::from_certificate(&cert, elapsed),
                    family,
                    cert,
                )
            })
            .collect();
        certified.sort_by_key(|(r, _, _)| r.v);
        if let Some(path) = &jsonl_path {
            if config.format.wants_jsonl() {
                let new_records: Vec<CertificateRecord> =
                    certified.iter().map(|(r, _, _)| r.clone()).collect();
                append_lines(path, &new_records)?;
            }
        }
        for (record, family, cert) in certified {
            if family.is_some() && matches!(cert.status, Status::Excluded { .. }) {
                outcome
                    .soundness_violations
                    .push(make_params(record.v, record.k, record.lambda)?);
            }
            outcome.records.push(record);
            outcome.certificates.push(cert);
        }
    }

    outcome.records.sort_by_key(|r| (r.k, r.v));
    if let Some(path) = &md_path {
        if config.format.wants_md() {
            let kind = if config.ryser_only {
                ReportKind::Ryser
            } else {
                ReportKind::Survey
            };
            write_text(path, &emit_markdown(&outcome.records, kind))?;
        }
    }
    Ok(outcome)
}

/// Full battery with no short-circuit for one triple, plus the
/// constructions lookup, rendered both as a certificate and as text.
pub fn run_check(
    v: u64,
    k: u64,
    lambda: u64,
    battery: &BatteryConfig,
) -> Result<(Certificate, String), Error> {
    let ps = make_params(v, k, lambda)?;
    let full = BatteryConfig {
        short_circuit: false,
        ..battery.clone()
    };
    let (cert, family) = certify(ps, &full);
    let mut text = format!("({}, {}, {})  n = {}\n", ps.v, ps.k, ps.lambda, ps.n);
    for result in &cert.results {
        let witness = result
            .witness
            .as_ref()
            .map(|w| format!("  {}", describe_witness(w)))
            .unwrap_or_default();
        text.push_str(&format!(
            "  {:<14} {}{}\n",
            result.test.to_string(),
            result.verdict,
            witness
        ));
    }
    if let Some(tag) = family {
        if matches!(cert.status, Status::Excluded { .. }) {
            text.push_str(&format!(
                "  WARNING: parameters realized by the {tag} family were excluded; \
                 this is a soundness violation\n"
            ));
        }
    }
    text.push_str(&format!("  status: {}\n", cert.status));
    Ok((cert, text))
}

fn describe_witness(w: &crate::battery::Witness) -> String {
    use crate::battery::Witness;
    match w {
        Witness::Schutzenberger { n } => format!("(n = {n} is not a square)"),
        Witness::Bcr { place } => format!("(fails at place {place})"),
        Witness::Mann { w, p, j } => format!("(w = {w}, p = {p}, j = {j})"),
        Witness::Lms { p, a, g } => format!("(n = {p}^{a}, gcd(n, v) = {g})"),
        Witness::Arasu { p, w, u } => format!("(p = {p}, w = {w}, u = {u})"),
        Witness::SchmidtBound { f } => format!("(F = {f})"),
        Witness::Contraction {
            w,
            t,
            orbit_sizes,
            count45,
            survivors,
            ..
        } => format!(
            "(w = {w}, t = {t}, orbits {orbit_sizes}, {count45} solutions, {survivors} survive)"
        ),
    }
}

/// Outcome of one `contract` invocation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContractOutcome {
    pub v: u64,
    pub k: u64,
    pub lambda: u64,
    pub w: u64,
    pub t: u64,
    pub orbit_sizes: String,
    pub count45: u64,
    pub completed: bool,
    /// None when the run was count-only.
    pub survivors: Option<u64>,
    pub excluded: Option<bool>,
}

/// Count solutions of the linear and square equations for (v,k,λ,w,t), and
/// unless `count_only`, filter them by autocorrelation.
pub fn run_contract(
    v: u64,
    k: u64,
    lambda: u64,
    w: u64,
    t: u64,
    count_only: bool,
    node_budget: u64,
    filter_ops_budget: u64,
) -> Result<ContractOutcome, Error> {
    let ps = make_params(v, k, lambda)?;
    if !is_w_multiplier(t, w, &factor(ps.n))? {
        return Err(Error::Domain(format!(
            "t = {t} is not a certified {w}-multiplier for order {}",
            ps.n
        )));
    }
    let problem = ContractionProblem::new(ps, w, t)?;
    let orbit_sizes = problem.orbit_structure.size_signature();
    if count_only {
        let sweep = problem.count_solutions(node_budget);
        return Ok(ContractOutcome {
            v,
            k,
            lambda,
            w,
            t,
            orbit_sizes,
            count45: sweep.count,
            completed: sweep.completed,
            survivors: None,
            excluded: None,
        });
    }
    let result = crate::contraction::eliminate_by_contraction(
        ps,
        w,
        t,
        node_budget,
        filter_ops_budget,
    )?;
    match result.witness {
        Some(crate::battery::Witness::Contraction {
            count45,
            survivors,
            completed,
            ..
        }) => Ok(ContractOutcome {
            v,
            k,
            lambda,
            w,
            t,
            orbit_sizes,
            count45,
            completed,
            survivors: Some(survivors),
            excluded: Some(result.verdict == Verdict::Excluded),
        }),
        _ => unreachable!("contraction always carries its witness"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportKind {
    Survey,
    Ryser,
    Hadamard,
    Ppc,
    Contraction,
}

/// Serialize records as JSONL, one object per line (idempotent).
pub fn emit_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(record).expect("records serialize"));
        out.push('\n');
    }
    out
}

/// Render survey records as a markdown table in the survey layouts.
pub fn emit_markdown(records: &[CertificateRecord], kind: ReportKind) -> String {
    let mut out = String::new();
    match kind {
        ReportKind::Survey => {
            out.push_str("| v | k | lambda | n | status | test |\n");
            out.push_str("|---|---|--------|---|--------|------|\n");
            for r in records {
                let test = r.excluding_test().unwrap_or("");
                let status = r.status.split(':').next().unwrap_or(&r.status);
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} |\n",
                    r.v, r.k, r.lambda, r.n, status, test
                ));
            }
        }
        ReportKind::Ryser => {
            out.push_str("| v | k | lambda | n | gcd(v,n) | status |\n");
            out.push_str("|---|---|--------|---|----------|--------|\n");
            for r in records {
                let g = crate::numtheory::gcd(r.v, r.n);
                if g <= 1 {
                    continue;
                }
                let status = r.status.split(':').next().unwrap_or(&r.status);
                out.push_str(&format!(
                    "| {} | {} | {} | {} | {} | {} |\n",
                    r.v, r.k, r.lambda, r.n, g, status
                ));
            }
        }
        _ => unreachable!("emit_markdown handles survey-shaped records"),
    }
    out
}

/// Render a contraction run as the elimination-table row shape
/// (v, k, λ, multiplier, w, solution count).
pub fn emit_contract_markdown(rows: &[ContractOutcome]) -> String {
    let mut out = String::new();
    out.push_str("| v | k | lambda | multiplier | w | solutions |\n");
    out.push_str("|---|---|--------|------------|---|-----------|\n");
    for r in rows {
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} |\n",
            r.v, r.k, r.lambda, r.t, r.w, r.count45
        ));
    }
    out
}

/// One serialized Hadamard scan row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HadamardRecord {
    pub schema: u32,
    pub v: u64,
    pub status: String,
    pub tags: Vec<String>,
    pub certificate: Option<CertificateRecord>,
}

pub fn hadamard_records(report: &HadamardReport) -> Vec<HadamardRecord> {
    report
        .rows
        .iter()
        .map(|row| {
            let (status, tags) = match &row.status {
                HadamardStatus::KnownFamily { tags } => (
                    "known_family".to_string(),
                    tags.iter().map(|t| t.to_string()).collect(),
                ),
                HadamardStatus::Excluded { by } => (format!("excluded:{by}"), Vec::new()),
                HadamardStatus::Survivor => ("survivor".to_string(), Vec::new()),
            };
            HadamardRecord {
                schema: CERTIFICATE_SCHEMA,
                v: row.v,
                status,
                tags,
                certificate: row
                    .certificate
                    .as_ref()
                    .map(|c| CertificateRecord::from_certificate(c, 0)),
            }
        })
        .collect()
}

pub fn emit_hadamard_markdown(report: &HadamardReport) -> String {
    let mut out = String::new();
    out.push_str("| v | k | lambda | status | comment |\n");
    out.push_str("|---|---|--------|--------|---------|\n");
    for row in &report.rows {
        let k = (row.v - 1) / 2;
        let lambda = (row.v - 3) / 4;
        let (status, comment) = match &row.status {
            HadamardStatus::KnownFamily { tags } => (
                "known_family".to_string(),
                tags.iter()
                    .map(|t| t.to_string())
                    .collect::<Vec<_>>()
                    .join(", "),
            ),
            HadamardStatus::Excluded { by } => ("no".to_string(), format!("{by}")),
            HadamardStatus::Survivor => ("open".to_string(), String::new()),
        };
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} |\n",
            row.v, k, lambda, status, comment
        ));
    }
    out
}

/// One serialized PPC scan row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PpcRecord {
    pub schema: u32,
    pub n: u64,
    pub v: u64,
    pub outcome: String,
    pub witness: Option<crate::planar::ContradictionWitness>,
    pub certificate: Option<CertificateRecord>,
}

pub fn ppc_records(report: &PpcReport) -> Vec<PpcRecord> {
    report
        .rows
        .iter()
        .map(|row| {
            let (outcome, witness, certificate) = match &row.outcome {
                PpcOutcome::Battery { by, certificate } => (
                    format!("battery:{by}"),
                    None,
                    Some(CertificateRecord::from_certificate(certificate, 0)),
                ),
                PpcOutcome::EvansMann { witness, .. } => (
                    "evans_mann".to_string(),
                    Some(witness.as_ref().clone()),
                    None,
                ),
                PpcOutcome::Survivor => ("survivor".to_string(), None, None),
            };
            PpcRecord {
                schema: CERTIFICATE_SCHEMA,
                n: row.n,
                v: row.v,
                outcome,
                witness,
                certificate,
            }
        })
        .collect()
}

pub fn emit_ppc_markdown(report: &PpcReport) -> String {
    let mut out = String::new();
    out.push_str("| n | v | eliminated by | detail |\n");
    out.push_str("|---|---|---------------|--------|\n");
    for row in &report.rows {
        let (by, detail) = match &row.outcome {
            PpcOutcome::Battery { by, .. } => ("battery".to_string(), by.to_string()),
            PpcOutcome::EvansMann { witness, .. } => (
                "evans_mann".to_string(),
                format!(
                    "d = {}, lcm = {}",
                    witness.d, witness.lcm_value
                ),
            ),
            PpcOutcome::Survivor => ("SURVIVOR".to_string(), String::new()),
        };
        out.push_str(&format!("| {} | {} | {} | {} |\n", row.n, row.v, by, detail));
    }
    out
}

/// Drive a Hadamard scan and write its reports.
pub fn run_hadamard(
    v_max: u64,
    config: &HadamardConfig,
    out: Option<&Path>,
    format: OutputFormat,
) -> Result<HadamardReport, Error> {
    let report = hadamard_scan(v_max, config)?;
    if let Some(base) = out {
        if format.wants_jsonl() {
            write_text(
                &base.with_extension("jsonl"),
                &emit_jsonl(&hadamard_records(&report)),
            )?;
        }
        if format.wants_md() {
            write_text(&base.with_extension("md"), &emit_hadamard_markdown(&report))?;
        }
    }
    Ok(report)
}

/// Drive a PPC scan and write its reports.
pub fn run_ppc(
    n_min: u64,
    n_max: u64,
    config: &PpcConfig,
    out: Option<&Path>,
    format: OutputFormat,
) -> Result<PpcReport, Error> {
    let report = ppc_scan(n_min, n_max, config)?;
    if let Some(base) = out {
        if format.wants_jsonl() {
            write_text(
                &base.with_extension("jsonl"),
                &emit_jsonl(&ppc_records(&report)),
            )?;
        }
        if format.wants_md() {
            write_text(&base.with_extension("md"), &emit_ppc_markdown(&report))?;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        let ps = make_params(39, 19, 9).unwrap();
        let cert = run_battery(ps, &BatteryConfig::default());
        let record = CertificateRecord::from_certificate(&cert, 7);
        let line = serde_json::to_string(&record).unwrap();
        let parsed: CertificateRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(parsed, record);
        assert!(line.starts_with("{\"schema\":1,\"v\":39,\"k\":19,\"lambda\":9,\"n\":10,"));
        assert_eq!(record.excluding_test(), Some("mann"));
    }

    #[test]
    fn survey_tiny_range() {
        let config = SurveyConfig {
            k_min: 3,
            k_max: 5,
            battery: BatteryConfig::default(),
            ..Default::default()
        };
        let outcome = run_survey(&config).unwrap();
        let keys: Vec<(u64, u64, u64)> = outcome.records.iter().map(|r| r.key()).collect();
        assert!(keys.contains(&(7, 3, 1)));
        assert!(keys.contains(&(11, 5, 2)));
        // known families upgrade to exists, never excluded
        let fano = outcome
            .records
            .iter()
            .find(|r| r.key() == (7, 3, 1))
            .unwrap();
        assert_eq!(fano.status, "exists:qr_prime");
        assert!(outcome.soundness_violations.is_empty());
    }

    #[test]
    fn journal_resume_no_dup_no_missing() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("survey");
        let config = SurveyConfig {
            k_min: 3,
            k_max: 6,
            battery: BatteryConfig::default(),
            out: Some(base.clone()),
            format: OutputFormat::Both,
            ..Default::default()
        };
        let full = run_survey(&config).unwrap();

        // Simulate an interrupted run: keep only the first two journal lines.
        let jsonl = base.with_extension("jsonl");
        let text = fs::read_to_string(&jsonl).unwrap();
        let partial: Vec<&str> = text.lines().take(2).collect();
        fs::write(&jsonl, format!("{}\n", partial.join("\n"))).unwrap();

        let resumed = run_survey(&SurveyConfig {
            resume: true,
            ..config
        })
        .unwrap();
        let mut full_keys: Vec<_> = full.records.iter().map(|r| r.key()).collect();
        let mut resumed_keys: Vec<_> = resumed.records.iter().map(|r| r.key()).collect();
        full_keys.sort_unstable();
        resumed_keys.sort_unstable();
        assert_eq!(full_keys, resumed_keys);
        let dedup: HashSet<_> = resumed_keys.iter().collect();
        assert_eq!(dedup.len(), resumed_keys.len());
    }

    #[test]
    fn markdown_deterministic() {
        let config = SurveyConfig {
            k_min: 3,
            k_max: 8,
            battery: BatteryConfig::default(),
            ..Default::default()
        };
        let a = run_survey(&config).unwrap();
        let b = run_survey(&config).unwrap();
        assert_eq!(
            emit_markdown(&a.records, ReportKind::Survey),
            emit_markdown(&b.records, ReportKind::Survey)
        );
    }

    #[test]
    fn empty_range_empty_report() {
        let config = SurveyConfig {
            k_min: 2,
            k_max: 2,
            battery: BatteryConfig::default(),
            ..Default::default()
        };
        let outcome = run_survey(&config).unwrap();
        assert!(outcome.records.is_empty());
        let md = emit_markdown(&outcome.records, ReportKind::Survey);
        assert_eq!(md.lines().count(), 2); // header only
    }

    #[test]
    fn check_fano() {
        let (cert, text) = run_check(7, 3, 1, &BatteryConfig::with_contraction()).unwrap();
        assert!(matches!(cert.status, Status::Exists { .. }));
        assert!(text.contains("exists:qr_prime"));
    }

    #[test]
    fn contract_429() {
        let out = run_contract(429, 108, 27, 143, 3, false, u64::MAX, u64::MAX).unwrap();
        assert_eq!(out.count45, 14896);
        assert_eq!(out.survivors, Some(0));
        assert_eq!(out.excluded, Some(true));
        let md = emit_contract_markdown(&[out]);
        assert!(md.contains("| 429 | 108 | 27 | 3 | 143 | 14896 |"));
    }
}
