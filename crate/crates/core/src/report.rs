//! Audit report document, plot-ready flat table, and report re-validation.
//!
//! The report is a single JSON document; its layout is described in
//! `docs/report-schema.md`. Everything in it is a deterministic function
//! of the inputs and the [`AuditConfig`].

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::indefinite::IDENTITY_TOLERANCE;
use crate::ingest::{DatasetSummary, LabelMapping};
use crate::notion::{GapSite, IndefiniteKind, NotionKind};
use crate::oracle::UndefinedCells;
use crate::simulator::Stats;

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Which records statistical-parity rates are computed from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpMode {
    /// The critic's own records.
    #[default]
    PerCritic,
    /// Every distinct profile in the dataset.
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub sp_mode: SpMode,
    pub smoothing_alpha: f64,
    pub undefined_cells: UndefinedCells,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            sp_mode: SpMode::PerCritic,
            smoothing_alpha: 0.0,
            undefined_cells: UndefinedCells::Drop,
        }
    }
}

/// Every setting that changes report numbers, plus a digest of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint {
    pub config: AuditConfig,
    /// `None` when records came pre-labelled (interchange input).
    pub label_mapping: Option<LabelMapping>,
    pub source: String,
    pub sha256: String,
}

impl Fingerprint {
    pub fn new(config: AuditConfig, label_mapping: Option<LabelMapping>, source: String) -> Self {
        let sha256 = Self::digest(&config, &label_mapping, &source);
        Self {
            config,
            label_mapping,
            source,
            sha256,
        }
    }

    fn digest(config: &AuditConfig, mapping: &Option<LabelMapping>, source: &str) -> String {
        let canonical = serde_json::to_string(&(config, mapping, source)).expect("serializable");
        let hash = Sha256::digest(canonical.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn is_consistent(&self) -> bool {
        self.sha256 == Self::digest(&self.config, &self.label_mapping, &self.source)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefiniteEntry {
    pub kind: NotionKind,
    pub value: Option<f64>,
    pub true_value: Option<f64>,
    pub error: Option<f64>,
    pub argmax_label: Option<usize>,
    pub argmax_pair: Option<(usize, usize)>,
    pub excluded_cells: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndefiniteEntry {
    pub kind: IndefiniteKind,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub estimate: Option<f64>,
    pub true_value: Option<f64>,
    pub error: Option<f64>,
    pub lower_site: Option<GapSite>,
    pub upper_site: Option<GapSite>,
    pub excluded_cells: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticReport {
    pub critic_id: String,
    pub records: usize,
    /// Undefined `(group, label)` cells of this critic's rate table.
    pub undefined_rate_cells: usize,
    pub definite: Vec<DefiniteEntry>,
    pub indefinite: Vec<IndefiniteEntry>,
    /// Notions that could not be computed, with the reason.
    pub issues: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateEntry {
    pub kind: NotionKind,
    /// Statistics of the absolute error over critics where it is defined.
    pub error: Stats,
    /// Statistics of the estimate (indefinite) or value (definite).
    pub estimate: Stats,
    pub estimate_median: Option<f64>,
    pub true_value: Stats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub format_version: u32,
    pub tool: String,
    pub fingerprint: Fingerprint,
    pub groups: Vec<String>,
    pub labels: Vec<String>,
    pub summary: DatasetSummary,
    pub critics: Vec<CriticReport>,
    pub aggregate: Vec<AggregateEntry>,
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Per-notion statistics over `critics`.
pub fn aggregate(critics: &[CriticReport]) -> Vec<AggregateEntry> {
    let mut out = Vec::new();
    for kind in NotionKind::ALL {
        let mut errors = Vec::new();
        let mut estimates = Vec::new();
        let mut truths = Vec::new();
        for c in critics {
            let (est, truth, err) = match IndefiniteKind::try_from(kind) {
                Ok(ik) => match c.indefinite.iter().find(|e| e.kind == ik) {
                    Some(e) => (e.estimate, e.true_value, e.error),
                    None => continue,
                },
                Err(_) => match c.definite.iter().find(|e| e.kind == kind) {
                    Some(e) => (e.value, e.true_value, e.error),
                    None => continue,
                },
            };
            estimates.extend(est);
            truths.extend(truth);
            errors.extend(err);
        }
        out.push(AggregateEntry {
            kind,
            error: Stats::of(&errors),
            estimate: Stats::of(&estimates),
            estimate_median: median(&mut estimates),
            true_value: Stats::of(&truths),
        });
    }
    out
}

impl AuditReport {
    pub fn aggregate_for(&self, kind: NotionKind) -> Option<&AggregateEntry> {
        self.aggregate.iter().find(|a| a.kind == kind)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Plot-ready table: `critic_id,notion,true,lower,upper,estimate,error`
    /// plus the fingerprint digest on every row. Definite notions leave
    /// `lower`/`upper` empty and put their value in `estimate`. Undefined
    /// values are empty cells.
    pub fn write_flat_table<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "critic_id",
            "notion",
            "true",
            "lower",
            "upper",
            "estimate",
            "error",
            "fingerprint",
        ])?;
        let digest = self.fingerprint.sha256.as_str();
        let f = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for c in &self.critics {
            for d in &c.definite {
                w.write_record([
                    c.critic_id.as_str(),
                    d.kind.code(),
                    &f(d.true_value),
                    "",
                    "",
                    &f(d.value),
                    &f(d.error),
                    digest,
                ])?;
            }
            for e in &c.indefinite {
                w.write_record([
                    c.critic_id.as_str(),
                    e.kind.code(),
                    &f(e.true_value),
                    &f(e.lower),
                    &f(e.upper),
                    &f(e.estimate),
                    &f(e.error),
                    digest,
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportViolation {
    pub critic_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportValidation {
    pub critics_checked: usize,
    pub violations: Vec<ReportViolation>,
}

impl ReportValidation {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= IDENTITY_TOLERANCE
}

/// Re-checks the invariants every audit report must satisfy.
pub fn validate_report(report: &AuditReport) -> ReportValidation {
    let mut out = ReportValidation {
        critics_checked: report.critics.len(),
        violations: Vec::new(),
    };
    let mut flag = |critic: Option<&str>, message: String| {
        out.violations.push(ReportViolation {
            critic_id: critic.map(str::to_string),
            message,
        })
    };
    if report.format_version != REPORT_FORMAT_VERSION {
        flag(None, format!("unsupported format_version {}", report.format_version));
    }
    if !report.fingerprint.is_consistent() {
        flag(None, "fingerprint digest does not match its settings".into());
    }
    let mut ids: Vec<&str> = report.critics.iter().map(|c| c.critic_id.as_str()).collect();
    if ids.windows(2).any(|w| w[0] >= w[1]) {
        flag(None, "critics are not sorted by unique id".into());
    }
    ids.clear();

    for c in &report.critics {
        let id = Some(c.critic_id.as_str());
        for d in &c.definite {
            let k = d.kind;
            if let Some(v) = d.value {
                if !(0.0..=1.0).contains(&v) {
                    flag(id, format!("{k} value {v} outside [0, 1]"));
                }
            }
            match (d.value, d.true_value, d.error) {
                (Some(v), Some(t), Some(e)) => {
                    if !(e >= 0.0 && close(e, (v - t).abs())) {
                        flag(id, format!("{k} error {e} != |{v} - {t}|"));
                    }
                }
                (_, _, Some(e)) => flag(id, format!("{k} error {e} without value and truth")),
                _ => {}
            }
        }
        for e in &c.indefinite {
            let k = e.kind;
            match (e.lower, e.upper, e.estimate) {
                (Some(l), Some(u), Some(x)) => {
                    if !(l <= x && x <= u) {
                        flag(id, format!("{k} estimate {x} outside bounds [{l}, {u}]"));
                    }
                    if !close(x, 0.5 * (l + u)) {
                        flag(id, format!("{k} estimate {x} is not the midpoint of [{l}, {u}]"));
                    }
                    if !(l >= -1.0 && u <= 1.0) {
                        flag(id, format!("{k} bounds [{l}, {u}] outside [-1, 1]"));
                    }
                }
                (None, None, None) => {}
                _ => flag(id, format!("{k} has a partial bound triple")),
            }
            match (e.estimate, e.true_value, e.error) {
                (Some(x), Some(t), Some(err)) => {
                    if !(err >= 0.0 && close(err, (x - t).abs())) {
                        flag(id, format!("{k} error {err} != |{x} - {t}|"));
                    }
                }
                (_, _, Some(err)) => flag(id, format!("{k} error {err} without estimate and truth")),
                _ => {}
            }
        }
    }

    let expected = aggregate(&report.critics);
    for exp in &expected {
        let Some(got) = report.aggregate_for(exp.kind) else {
            flag(None, format!("aggregate block missing {}", exp.kind));
            continue;
        };
        if got.error.count != exp.error.count || !close(got.error.mean, exp.error.mean) {
            flag(
                None,
                format!(
                    "{} aggregate mean error {} over {} critics, recomputed {} over {}",
                    exp.kind, got.error.mean, got.error.count, exp.error.mean, exp.error.count
                ),
            );
        }
        if got.estimate.count != exp.estimate.count || !close(got.estimate.mean, exp.estimate.mean) {
            flag(None, format!("{} aggregate estimate statistics differ", exp.kind));
        }
    }
    out
}
