//! Ground-truth fairness computed from full `(y, z)` pairs.
//!
//! The oracle never reads disagreement bits; it recomputes every notion from
//! the joint tally of system and intrinsic labels so it can serve as an
//! independent check on the disagreement-based path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::indefinite::{bounded_from_cells, BoundedNotion, CellBounds, IDENTITY_TOLERANCE};
use crate::label::{validate_records, AuditRecord, GroupPartition, LabelSpace};
use crate::notion::{
    notion_from_grid, notion_from_groups, CellGrid, IndefiniteKind, NotionKind, NotionValue,
};
use crate::rates::RateTable;

/// How cells with an empty conditioning event enter the oracle maxima.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UndefinedCells {
    /// Excluded, and the matching bound cells are excluded too.
    #[default]
    Drop,
    /// Counted as rate 0 in every non-empty group.
    Zero,
}

/// Tallies `j_{m,y,z}`, row-major in `(group, system label, intrinsic label)`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    labels: LabelSpace,
    groups: usize,
    mass: Vec<f64>,
}

impl JointTable {
    /// Every record must carry an intrinsic label.
    pub fn from_records(
        records: &[AuditRecord],
        labels: LabelSpace,
        groups: &GroupPartition,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyRecords);
        }
        if let Some(index) = records.iter().position(|r| r.intrinsic_label.is_none()) {
            return Err(Error::MissingIntrinsicLabel { index });
        }
        // consistency of s is irrelevant here, only index ranges matter
        let ranges = validate_records(records, labels, groups);
        if ranges.issues.iter().any(|i| {
            !matches!(i.kind, crate::label::IssueKind::Inconsistent { .. })
        }) {
            ranges.into_result()?;
        }
        let k = labels.size();
        let mut mass = vec![0.0; groups.count() * k * k];
        for r in records {
            let z = r.intrinsic_label.expect("checked above");
            mass[(r.group * k + r.system_label) * k + z] += 1.0;
        }
        Ok(Self {
            labels,
            groups: groups.count(),
            mass,
        })
    }

    /// Builds from per-group `K x K` matrices (row = system label).
    pub fn from_masses(labels: LabelSpace, groups: usize, mass: Vec<f64>) -> Result<Self> {
        if groups < 2 {
            return Err(Error::TooFewGroups(groups));
        }
        let k = labels.size();
        if mass.len() != groups * k * k {
            return Err(Error::ShapeMismatch);
        }
        if mass.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::Input("joint masses must be finite and >= 0".into()));
        }
        Ok(Self {
            labels,
            groups,
            mass,
        })
    }

    pub fn labels(&self) -> LabelSpace {
        self.labels
    }

    pub fn group_count(&self) -> usize {
        self.groups
    }

    /// `j_{m,y,z}`
    pub fn get(&self, m: usize, y: usize, z: usize) -> f64 {
        let k = self.labels.size();
        self.mass[(m * k + y) * k + z]
    }

    pub fn group_total(&self, m: usize) -> f64 {
        let kk = self.labels.size() * self.labels.size();
        self.mass[m * kk..(m + 1) * kk].iter().sum()
    }

    /// `n_{m,y}`: tally of system label `y` in group `m`.
    pub fn system_marginal(&self, m: usize, y: usize) -> f64 {
        self.labels.labels().map(|z| self.get(m, y, z)).sum()
    }

    /// Tally of intrinsic label `z` in group `m`.
    pub fn intrinsic_marginal(&self, m: usize, z: usize) -> f64 {
        self.labels.labels().map(|y| self.get(m, y, z)).sum()
    }

    /// The rate table the disagreement path would see for the same data.
    pub fn rate_table(&self, alpha: f64) -> Result<RateTable> {
        let k = self.labels.size();
        let mut cell = Vec::with_capacity(self.groups * k);
        let mut disagree = Vec::with_capacity(self.groups * k);
        for m in 0..self.groups {
            for y in 0..k {
                cell.push(self.system_marginal(m, y));
                disagree.push((0..k).filter(|&z| z != y).map(|z| self.get(m, y, z)).sum());
            }
        }
        RateTable::from_tallies(self.labels, self.groups, cell, disagree, alpha)
    }

    fn ratio(num: f64, den: f64) -> Option<f64> {
        (den > 0.0).then(|| num / den)
    }

    /// Per-cell oracle rate:
    /// SP `P(y=k|m)`, CAL `P(z=k|y=k,m)`, EO `P(y=k|z=k,m)`,
    /// PE `P(y=k|z≠k,m)`, OMR `P(y≠k|z=k,m)`.
    pub fn cell_rate(&self, kind: NotionKind, m: usize, k: usize) -> Result<Option<f64>> {
        if m >= self.groups {
            return Err(Error::GroupOutOfRange {
                group: m,
                count: self.groups,
            });
        }
        self.labels.check(k)?;
        let n = self.group_total(m);
        let kk = self.get(m, k, k);
        let row = self.system_marginal(m, k);
        let col = self.intrinsic_marginal(m, k);
        Ok(match kind {
            NotionKind::StatisticalParity => Self::ratio(row, n),
            NotionKind::Calibration => Self::ratio(kk, row),
            NotionKind::EqualOpportunity => Self::ratio(kk, col),
            NotionKind::OverallMisclassification => Self::ratio(col - kk, col),
            NotionKind::PredictiveEquality => {
                // y = k and z != k over z != k
                Self::ratio(row - kk, n - col)
            }
            NotionKind::AccuracyEquality => {
                return Err(Error::Input("accuracy equality has no per-label cells".into()))
            }
        })
    }

    /// Cell rates of `kind` with undefined cells handled per `mode`.
    pub fn cell_rates(&self, kind: NotionKind, mode: UndefinedCells) -> Result<CellGrid> {
        let mut grid = CellGrid::new(self.groups, self.labels.size());
        for m in 0..self.groups {
            let nonempty = self.group_total(m) > 0.0;
            for k in self.labels.labels() {
                let rate = match (self.cell_rate(kind, m, k)?, mode) {
                    (None, UndefinedCells::Zero) if nonempty => Some(0.0),
                    (r, _) => r,
                };
                grid.set(m, k, rate);
            }
        }
        Ok(grid)
    }

    /// `AE_m = P(y = z | m)` per group.
    pub fn accuracy_rates(&self) -> Vec<Option<f64>> {
        (0..self.groups)
            .map(|m| {
                let agree: f64 = self.labels.labels().map(|k| self.get(m, k, k)).sum();
                Self::ratio(agree, self.group_total(m))
            })
            .collect()
    }

    fn nonempty_groups(&self) -> usize {
        (0..self.groups).filter(|&m| self.group_total(m) > 0.0).count()
    }
}

/// Ground-truth value of `kind`.
pub fn true_notion(joint: &JointTable, kind: NotionKind, mode: UndefinedCells) -> Result<NotionValue> {
    let nonempty = joint.nonempty_groups();
    if nonempty < 2 {
        return Err(Error::InsufficientGroups(nonempty));
    }
    match kind {
        NotionKind::AccuracyEquality => notion_from_groups(kind, &joint.accuracy_rates()),
        _ => notion_from_grid(kind, &joint.cell_rates(kind, mode)?),
    }
}

/// `|true - estimate|`.
pub fn estimation_error(truth: &NotionValue, estimate: &BoundedNotion) -> Result<f64> {
    if truth.kind != estimate.kind.notion() {
        return Err(Error::KindMismatch {
            expected: truth.kind.to_string(),
            found: estimate.kind.to_string(),
        });
    }
    Ok((truth.value - estimate.gf_estimate).abs())
}

/// True value and bounds of one indefinite notion computed over the same
/// set of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedComparison {
    pub truth: NotionValue,
    pub bounded: BoundedNotion,
    pub error: f64,
}

/// Compares the bound-based estimate from `table` with the oracle on
/// `joint`. With [`UndefinedCells::Drop`] both sides use only cells defined
/// on both sides; with [`UndefinedCells::Zero`] the oracle zero-fills its
/// undefined cells and the bounds keep their own cells.
pub fn aligned_comparison(
    table: &RateTable,
    joint: &JointTable,
    kind: IndefiniteKind,
    mode: UndefinedCells,
) -> Result<AlignedComparison> {
    let nonempty = joint.nonempty_groups();
    if nonempty < 2 {
        return Err(Error::InsufficientGroups(nonempty));
    }
    let mut grid = joint.cell_rates(kind.notion(), mode)?;
    let mut cells = CellBounds::from_table(table, kind);
    if mode == UndefinedCells::Drop {
        cells.restrict_to(&grid);
        grid = grid.masked(|m, k| cells.is_defined(m, k));
    }
    let truth = notion_from_grid(kind.notion(), &grid)?;
    let bounded = bounded_from_cells(kind, &cells)?;
    let error = estimation_error(&truth, &bounded)?;
    Ok(AlignedComparison {
        truth,
        bounded,
        error,
    })
}

/// Cells where both the bound and the oracle rate are defined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Containment {
    pub checked: usize,
    pub violations: usize,
}

/// Counts cells whose oracle rate falls outside `[lower, upper]` by more
/// than [`IDENTITY_TOLERANCE`].
pub fn containment(table: &RateTable, joint: &JointTable, kind: IndefiniteKind) -> Result<Containment> {
    let cells = CellBounds::from_table(table, kind);
    let grid = joint.cell_rates(kind.notion(), UndefinedCells::Drop)?;
    let mut out = Containment::default();
    for m in 0..cells.groups() {
        for k in 0..cells.labels() {
            if let (Some((l, u)), Some(r)) = (cells.get(m, k), grid.get(m, k)) {
                out.checked += 1;
                if r < l - IDENTITY_TOLERANCE || r > u + IDENTITY_TOLERANCE {
                    out.violations += 1;
                }
            }
        }
    }
    Ok(out)
}
