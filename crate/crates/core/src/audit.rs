//! The audit pipeline: per-critic rate tables, definite notions, bounded
//! indefinite notions, and oracle comparison, assembled into an
//! [`AuditReport`].

use std::path::Path;

use rayon::prelude::*;

use crate::definite::{accuracy_equality, calibration, statistical_parity};
use crate::error::{Error, Result};
use crate::indefinite::bounded_notion;
use crate::ingest::{
    distinct_outputs, join_responses, load_profiles, load_responses, read_interchange,
    summarize_dataset, LabelMapping, SchemaConfig,
};
use crate::label::{AuditRecord, CriticFeedback, GroupPartition, LabelSpace};
use crate::notion::{IndefiniteKind, NotionKind, NotionValue};
use crate::oracle::{aligned_comparison, true_notion, JointTable};
use crate::rates::RateTable;
use crate::report::{
    aggregate, AuditConfig, AuditReport, CriticReport, DefiniteEntry, Fingerprint, IndefiniteEntry,
    SpMode, REPORT_FORMAT_VERSION,
};

/// Everything the pipeline needs, independent of where it was loaded from.
#[derive(Debug, Clone, PartialEq)]
pub struct AuditInput {
    pub labels: LabelSpace,
    pub label_names: Vec<String>,
    pub groups: GroupPartition,
    pub critics: Vec<CriticFeedback>,
    /// One record per distinct audited input, for pooled SP tables.
    pub pool: Vec<AuditRecord>,
    pub label_mapping: Option<LabelMapping>,
    pub source: String,
}

impl AuditInput {
    /// Profiles + responses + schema. The SP pool is every loaded profile.
    pub fn from_files(profiles: &Path, responses: &Path, schema: &SchemaConfig) -> Result<Self> {
        let set = load_profiles(profiles, schema)?;
        let rows = load_responses(responses, schema)?;
        let critics = join_responses(&set, &rows)?;
        let pool = set
            .rows
            .iter()
            .map(|p| AuditRecord::feedback_only(p.group, p.system_label, false))
            .collect();
        Ok(Self {
            labels: set.labels,
            label_names: schema.labels.names.clone(),
            groups: set.groups,
            critics,
            pool,
            label_mapping: Some(schema.label_mapping()),
            source: format!(
                "profiles={} responses={}",
                file_name(profiles),
                file_name(responses)
            ),
        })
    }

    /// Canonical interchange file. Label and group counts default to the
    /// largest indices present; pass them to cover unobserved values.
    pub fn from_interchange(
        path: &Path,
        labels: Option<usize>,
        groups: Option<usize>,
    ) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let data = read_interchange(file, path)?;
        let k = labels.unwrap_or(data.label_count);
        let m = groups.unwrap_or(data.group_count);
        Self::from_critics(data.critics, LabelSpace::new(k)?, GroupPartition::anonymous(m)?)
            .map(|mut input| {
                input.source = format!("interchange={}", file_name(path));
                input
            })
    }

    /// In-memory critics with anonymous labels; the SP pool is the set of
    /// distinct record ids.
    pub fn from_critics(
        critics: Vec<CriticFeedback>,
        labels: LabelSpace,
        groups: GroupPartition,
    ) -> Result<Self> {
        for c in &critics {
            crate::label::validate_records(c.records(), labels, &groups)
                .into_result()
                .map_err(|e| Error::Input(format!("critic {:?}: {e}", c.critic_id())))?;
        }
        Ok(Self {
            labels,
            label_names: labels.labels().map(|k| k.to_string()).collect(),
            pool: distinct_outputs(&critics),
            groups,
            critics,
            label_mapping: None,
            source: "memory".into(),
        })
    }
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| p.display().to_string())
}

fn definite_entry(
    kind: NotionKind,
    value: Result<NotionValue>,
    truth: Option<Result<NotionValue>>,
    issues: &mut Vec<String>,
) -> DefiniteEntry {
    let value = value
        .map_err(|e| issues.push(format!("{kind}: {e}")))
        .ok();
    let truth = truth.and_then(|t| {
        t.map_err(|e| issues.push(format!("{kind} (oracle): {e}")))
            .ok()
    });
    let error = match (&value, &truth) {
        (Some(v), Some(t)) => Some((v.value - t.value).abs()),
        _ => None,
    };
    DefiniteEntry {
        kind,
        argmax_label: value.as_ref().and_then(|v| v.argmax_label),
        argmax_pair: value.as_ref().map(|v| v.argmax_pair),
        excluded_cells: value.as_ref().map(|v| v.excluded_cells),
        value: value.map(|v| v.value),
        true_value: truth.map(|t| t.value),
        error,
    }
}

fn indefinite_entry(
    kind: IndefiniteKind,
    table: &RateTable,
    joint: Option<&JointTable>,
    config: &AuditConfig,
    issues: &mut Vec<String>,
) -> IndefiniteEntry {
    let mut entry = IndefiniteEntry {
        kind,
        lower: None,
        upper: None,
        estimate: None,
        true_value: None,
        error: None,
        lower_site: None,
        upper_site: None,
        excluded_cells: None,
    };
    let compared = joint.map(|j| aligned_comparison(table, j, kind, config.undefined_cells));
    let bounded = match compared {
        Some(Ok(cmp)) => {
            entry.true_value = Some(cmp.truth.value);
            entry.error = Some(cmp.error);
            Ok(cmp.bounded)
        }
        Some(Err(e)) => {
            issues.push(format!("{kind} (oracle): {e}"));
            bounded_notion(table, kind)
        }
        None => bounded_notion(table, kind),
    };
    match bounded {
        Ok(b) => {
            entry.lower = Some(b.gf_lower);
            entry.upper = Some(b.gf_upper);
            entry.estimate = Some(b.gf_estimate);
            entry.lower_site = Some(b.lower_site);
            entry.upper_site = Some(b.upper_site);
            entry.excluded_cells = Some(b.excluded_cells);
        }
        Err(e) => issues.push(format!("{kind}: {e}")),
    }
    entry
}

/// Runs the full pipeline for one critic.
pub fn audit_critic(
    critic: &CriticFeedback,
    input: &AuditInput,
    pooled: Option<&RateTable>,
    config: &AuditConfig,
) -> Result<CriticReport> {
    let records = critic.records();
    let own = RateTable::from_records(records, input.labels, &input.groups, config.smoothing_alpha)?;
    let table = match pooled {
        Some(p) => own.with_pooled_sp(p)?,
        None => own,
    };
    let joint = if records.iter().all(|r| r.intrinsic_label.is_some()) {
        Some(JointTable::from_records(records, input.labels, &input.groups)?)
    } else {
        None
    };
    let mode = config.undefined_cells;
    let truth = |kind| joint.as_ref().map(|j| true_notion(j, kind, mode));

    let mut issues = Vec::new();
    let definite = vec![
        definite_entry(
            NotionKind::StatisticalParity,
            statistical_parity(&table),
            truth(NotionKind::StatisticalParity),
            &mut issues,
        ),
        definite_entry(
            NotionKind::AccuracyEquality,
            accuracy_equality(&table),
            truth(NotionKind::AccuracyEquality),
            &mut issues,
        ),
        definite_entry(
            NotionKind::Calibration,
            calibration(&table),
            truth(NotionKind::Calibration),
            &mut issues,
        ),
    ];
    let indefinite = IndefiniteKind::ALL
        .into_iter()
        .map(|kind| indefinite_entry(kind, &table, joint.as_ref(), config, &mut issues))
        .collect();
    Ok(CriticReport {
        critic_id: critic.critic_id().to_string(),
        records: records.len(),
        undefined_rate_cells: table.undefined_cells(),
        definite,
        indefinite,
        issues,
    })
}

/// Audits every critic (in parallel) and assembles the report, ordered by
/// critic id.
pub fn run_audit(input: &AuditInput, config: &AuditConfig) -> Result<AuditReport> {
    if !(config.smoothing_alpha.is_finite() && config.smoothing_alpha >= 0.0) {
        return Err(Error::InvalidSmoothing(config.smoothing_alpha));
    }
    let pooled = match config.sp_mode {
        SpMode::PerCritic => None,
        SpMode::Pooled => Some(RateTable::from_records(
            &input.pool,
            input.labels,
            &input.groups,
            config.smoothing_alpha,
        )?),
    };
    let mut critics = input
        .critics
        .par_iter()
        .map(|c| audit_critic(c, input, pooled.as_ref(), config))
        .collect::<Result<Vec<_>>>()?;
    critics.sort_by(|a, b| a.critic_id.cmp(&b.critic_id));

    Ok(AuditReport {
        format_version: REPORT_FORMAT_VERSION,
        tool: format!("dissent {}", env!("CARGO_PKG_VERSION")),
        fingerprint: Fingerprint::new(config.clone(), input.label_mapping.clone(), input.source.clone()),
        groups: input.groups.names().to_vec(),
        labels: input.label_names.clone(),
        summary: summarize_dataset(&input.critics, input.labels, &input.groups),
        aggregate: aggregate(&critics),
        critics,
    })
}
