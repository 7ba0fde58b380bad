//! Label space, group partition, and the observation records every other
//! module consumes.
//!
//! Labels and groups are dense indices. Mapping raw attribute strings onto
//! them is the job of [`crate::ingest`]; nothing in here touches strings
//! except display names.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output space of the audited classifier: labels `0..size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct LabelSpace(usize);

impl LabelSpace {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 {
            return Err(Error::TooFewLabels(size));
        }
        Ok(Self(size))
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn check(self, label: usize) -> Result<()> {
        if label < self.0 {
            Ok(())
        } else {
            Err(Error::LabelOutOfRange {
                label,
                size: self.0,
            })
        }
    }

    pub fn labels(self) -> std::ops::Range<usize> {
        0..self.0
    }
}

impl TryFrom<usize> for LabelSpace {
    type Error = Error;

    fn try_from(size: usize) -> Result<Self> {
        Self::new(size)
    }
}

impl From<LabelSpace> for usize {
    fn from(ls: LabelSpace) -> usize {
        ls.0
    }
}

/// Partition of the input population into `M >= 2` named groups.
///
/// Group `non_sensitive` is the reference group (index 0 unless configured
/// otherwise). Multi-attribute partitions are flattened by ingestion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPartition {
    names: Vec<String>,
    non_sensitive: usize,
}

impl GroupPartition {
    pub fn new(names: Vec<String>, non_sensitive: usize) -> Result<Self> {
        if names.len() < 2 {
            return Err(Error::TooFewGroups(names.len()));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidPartition(format!(
                    "duplicate group name {name:?}"
                )));
            }
        }
        if non_sensitive >= names.len() {
            return Err(Error::InvalidPartition(format!(
                "non-sensitive index {non_sensitive} >= group count {}",
                names.len()
            )));
        }
        Ok(Self {
            names,
            non_sensitive,
        })
    }

    /// Groups named `g0`, `g1`, ... with group 0 as the reference.
    pub fn anonymous(count: usize) -> Result<Self> {
        Self::new((0..count).map(|m| format!("g{m}")).collect(), 0)
    }

    pub fn count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, group: usize) -> Option<&str> {
        self.names.get(group).map(String::as_str)
    }

    pub fn non_sensitive_index(&self) -> usize {
        self.non_sensitive
    }

    pub fn check(&self, group: usize) -> Result<()> {
        if group < self.names.len() {
            Ok(())
        } else {
            Err(Error::GroupOutOfRange {
                group,
                count: self.names.len(),
            })
        }
    }
}

/// One observation: the group of the input, the label the system gave it,
/// whether the critic disagreed, and (when known) the critic's own label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AuditRecord {
    pub group: usize,
    pub system_label: usize,
    pub disagreement: bool,
    pub intrinsic_label: Option<usize>,
}

impl AuditRecord {
    /// Record with the disagreement bit derived from both labels.
    pub fn from_labels(group: usize, system_label: usize, intrinsic_label: usize) -> Self {
        Self {
            group,
            system_label,
            disagreement: system_label != intrinsic_label,
            intrinsic_label: Some(intrinsic_label),
        }
    }

    /// Record carrying only the disagreement bit.
    pub fn feedback_only(group: usize, system_label: usize, disagreement: bool) -> Self {
        Self {
            group,
            system_label,
            disagreement,
            intrinsic_label: None,
        }
    }
}

/// Disagreement bit for a critic whose intrinsic label is `intrinsic`
/// facing system output `system`. For two labels this is XOR.
pub fn derive_disagreement(labels: LabelSpace, system: usize, intrinsic: usize) -> Result<bool> {
    labels.check(system)?;
    labels.check(intrinsic)?;
    Ok(system != intrinsic)
}

/// Records contributed by one critic, each paired with its source record id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticFeedback {
    critic_id: String,
    record_ids: Vec<String>,
    records: Vec<AuditRecord>,
}

impl CriticFeedback {
    pub fn new(
        critic_id: impl Into<String>,
        record_ids: Vec<String>,
        records: Vec<AuditRecord>,
    ) -> Result<Self> {
        let critic_id = critic_id.into();
        if records.is_empty() {
            return Err(Error::Input(format!("critic {critic_id:?} has no records")));
        }
        if record_ids.len() != records.len() {
            return Err(Error::Input(format!(
                "critic {critic_id:?}: {} record ids for {} records",
                record_ids.len(),
                records.len()
            )));
        }
        Ok(Self {
            critic_id,
            record_ids,
            records,
        })
    }

    pub fn critic_id(&self) -> &str {
        &self.critic_id
    }

    pub fn records(&self) -> &[AuditRecord] {
        &self.records
    }

    pub fn record_ids(&self) -> &[String] {
        &self.record_ids
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &AuditRecord)> {
        self.record_ids
            .iter()
            .map(String::as_str)
            .zip(self.records.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IssueKind {
    GroupOutOfRange { group: usize },
    SystemLabelOutOfRange { label: usize },
    IntrinsicLabelOutOfRange { label: usize },
    /// `disagreement` does not match `system_label != intrinsic_label`.
    Inconsistent {
        system_label: usize,
        intrinsic_label: usize,
        disagreement: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordIssue {
    pub index: usize,
    #[serde(flatten)]
    pub kind: IssueKind,
}

impl fmt::Display for RecordIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "record {}: ", self.index)?;
        match &self.kind {
            IssueKind::GroupOutOfRange { group } => write!(f, "group {group} out of range"),
            IssueKind::SystemLabelOutOfRange { label } => {
                write!(f, "system label {label} out of range")
            }
            IssueKind::IntrinsicLabelOutOfRange { label } => {
                write!(f, "intrinsic label {label} out of range")
            }
            IssueKind::Inconsistent {
                system_label,
                intrinsic_label,
                disagreement,
            } => write!(
                f,
                "disagreement={} but system label {system_label} vs intrinsic label {intrinsic_label}",
                u8::from(*disagreement)
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<RecordIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    /// Converts a dirty report into [`Error::InvalidRecords`].
    pub fn into_result(self) -> Result<()> {
        if self.is_clean() {
            return Ok(());
        }
        let shown: Vec<String> = self.issues.iter().take(5).map(ToString::to_string).collect();
        let more = self.issues.len().saturating_sub(shown.len());
        let mut msg = shown.join("; ");
        if more > 0 {
            msg.push_str(&format!("; and {more} more"));
        }
        Err(Error::InvalidRecords(msg))
    }
}

/// Lists every index-range violation and every disagreement/intrinsic-label
/// inconsistency in `records`.
pub fn validate_records(
    records: &[AuditRecord],
    labels: LabelSpace,
    groups: &GroupPartition,
) -> ValidationReport {
    let mut issues = Vec::new();
    for (index, r) in records.iter().enumerate() {
        if groups.check(r.group).is_err() {
            issues.push(RecordIssue {
                index,
                kind: IssueKind::GroupOutOfRange { group: r.group },
            });
        }
        let system_ok = labels.check(r.system_label).is_ok();
        if !system_ok {
            issues.push(RecordIssue {
                index,
                kind: IssueKind::SystemLabelOutOfRange {
                    label: r.system_label,
                },
            });
        }
        if let Some(z) = r.intrinsic_label {
            if labels.check(z).is_err() {
                issues.push(RecordIssue {
                    index,
                    kind: IssueKind::IntrinsicLabelOutOfRange { label: z },
                });
            } else if system_ok && (z != r.system_label) != r.disagreement {
                issues.push(RecordIssue {
                    index,
                    kind: IssueKind::Inconsistent {
                        system_label: r.system_label,
                        intrinsic_label: z,
                        disagreement: r.disagreement,
                    },
                });
            }
        }
    }
    ValidationReport { issues }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ls(k: usize) -> LabelSpace {
        LabelSpace::new(k).unwrap()
    }

    #[test]
    fn disagreement_examples() {
        assert!(derive_disagreement(ls(2), 1, 0).unwrap());
        assert!(!derive_disagreement(ls(4), 3, 3).unwrap());
        assert!(matches!(
            derive_disagreement(ls(2), 2, 0),
            Err(Error::LabelOutOfRange { label: 2, size: 2 })
        ));
    }

    #[test]
    fn four_labels_have_four_agreeing_pairs() {
        // Enumerate all 16 (y, z) pairs by hand.
        let mut agree = 0;
        for y in 0..4 {
            for z in 0..4 {
                if !derive_disagreement(ls(4), y, z).unwrap() {
                    agree += 1;
                }
            }
        }
        assert_eq!(agree, 4);
    }

    #[test]
    fn binary_disagreement_is_xor() {
        for y in 0..2usize {
            for z in 0..2usize {
                assert_eq!(derive_disagreement(ls(2), y, z).unwrap(), (y ^ z) == 1);
            }
        }
    }

    #[test]
    fn label_space_rejects_unary() {
        assert!(matches!(LabelSpace::new(1), Err(Error::TooFewLabels(1))));
        assert!(LabelSpace::new(2).is_ok());
    }

    #[test]
    fn partition_rules() {
        assert!(GroupPartition::anonymous(1).is_err());
        assert!(GroupPartition::new(vec!["a".into(), "a".into()], 0).is_err());
        assert!(GroupPartition::new(vec!["a".into(), "b".into()], 2).is_err());
        let gp = GroupPartition::new(vec!["a".into(), "b".into()], 1).unwrap();
        assert_eq!(gp.non_sensitive_index(), 1);
        assert_eq!(gp.name(1), Some("b"));
    }

    #[test]
    fn validation_flags_inconsistency() {
        let gp = GroupPartition::anonymous(2).unwrap();
        let bad = AuditRecord {
            group: 0,
            system_label: 1,
            disagreement: true,
            intrinsic_label: Some(1),
        };
        let report = validate_records(&[bad], ls(2), &gp);
        assert_eq!(report.issues.len(), 1);
        assert!(matches!(report.issues[0].kind, IssueKind::Inconsistent { .. }));
    }

    #[test]
    fn validation_flags_range() {
        let gp = GroupPartition::anonymous(2).unwrap();
        let recs = [
            AuditRecord::feedback_only(2, 0, false),
            AuditRecord::feedback_only(0, 5, false),
            AuditRecord {
                group: 0,
                system_label: 0,
                disagreement: true,
                intrinsic_label: Some(9),
            },
        ];
        let report = validate_records(&recs, ls(2), &gp);
        assert_eq!(report.issues.len(), 3);
        assert_eq!(
            report.issues[0].kind,
            IssueKind::GroupOutOfRange { group: 2 }
        );
        assert!(report.into_result().is_err());
    }

    #[test]
    fn clean_records_pass() {
        let gp = GroupPartition::anonymous(3).unwrap();
        let recs: Vec<_> = (0..30)
            .map(|i| AuditRecord::from_labels(i % 3, i % 4, (i / 2) % 4))
            .collect();
        assert!(validate_records(&recs, ls(4), &gp).is_clean());
    }

    #[test]
    fn feedback_requires_records() {
        assert!(CriticFeedback::new("c", vec![], vec![]).is_err());
        assert!(CriticFeedback::new(
            "c",
            vec!["a".into()],
            vec![AuditRecord::feedback_only(0, 0, false); 2]
        )
        .is_err());
    }
}
