//! Empirical statistical-parity and disagreement rate tables.
//!
//! Tables keep raw tallies and divide only when a rate is read, so
//! identities between rates (for example `DR_m = sum_k DR_{m,k} SP_{m,k}`)
//! hold to rounding error. Tallies are stored as `f64`; tables built from
//! records hold integral values, tables built from an exact joint
//! distribution hold probability masses.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{validate_records, AuditRecord, GroupPartition, LabelSpace};

/// Where the statistical-parity tallies of a table came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpSource {
    /// The same records that produced the disagreement tallies.
    Records,
    /// A separate (usually larger) pool of system outputs.
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateKind {
    /// `SP_{m,k} = P(y = k | m)`
    Sp,
    /// `DR_{m,k} = P(s = 1 | y = k, m)`
    DrCell,
    /// `DR_m = P(s = 1 | m)`
    DrGroup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    labels: LabelSpace,
    groups: usize,
    alpha: f64,
    sp_source: SpSource,
    /// `n_{m,k}`: records with group m and system label k.
    cell: Vec<f64>,
    /// `d_{m,k}`: those among them with s = 1.
    disagree: Vec<f64>,
    /// Tallies SP is read from; equal to `cell` unless pooled.
    sp_cell: Vec<f64>,
}

impl RateTable {
    /// Tallies `records` into a table. `alpha` is additive smoothing
    /// (0 disables it; any positive value makes every cell defined).
    pub fn from_records(
        records: &[AuditRecord],
        labels: LabelSpace,
        groups: &GroupPartition,
        alpha: f64,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptyRecords);
        }
        validate_records(records, labels, groups).into_result()?;
        let k = labels.size();
        let mut cell = vec![0.0; groups.count() * k];
        let mut disagree = vec![0.0; groups.count() * k];
        for r in records {
            let i = r.group * k + r.system_label;
            cell[i] += 1.0;
            if r.disagreement {
                disagree[i] += 1.0;
            }
        }
        Self::from_tallies(labels, groups.count(), cell, disagree, alpha)
    }

    /// Builds a table from row-major `(group, label)` tallies.
    pub fn from_tallies(
        labels: LabelSpace,
        groups: usize,
        cell: Vec<f64>,
        disagree: Vec<f64>,
        alpha: f64,
    ) -> Result<Self> {
        if groups < 2 {
            return Err(Error::TooFewGroups(groups));
        }
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::InvalidSmoothing(alpha));
        }
        let len = groups * labels.size();
        if cell.len() != len || disagree.len() != len {
            return Err(Error::ShapeMismatch);
        }
        for (&n, &d) in cell.iter().zip(&disagree) {
            if !(n.is_finite() && d.is_finite() && d >= 0.0 && d <= n) {
                return Err(Error::Input(format!(
                    "invalid tally pair (cell {n}, disagree {d})"
                )));
            }
        }
        Ok(Self {
            labels,
            groups,
            alpha,
            sp_source: SpSource::Records,
            sp_cell: cell.clone(),
            cell,
            disagree,
        })
    }

    /// Copy of this table whose statistical-parity rates come from `pooled`.
    /// Disagreement rates are untouched.
    pub fn with_pooled_sp(&self, pooled: &RateTable) -> Result<Self> {
        if pooled.labels != self.labels || pooled.groups != self.groups {
            return Err(Error::ShapeMismatch);
        }
        Ok(Self {
            sp_cell: pooled.sp_cell.clone(),
            sp_source: SpSource::Pooled,
            ..self.clone()
        })
    }

    /// Sums the tallies of two tables built over the same domain.
    pub fn merge(&self, other: &RateTable) -> Result<Self> {
        if other.labels != self.labels
            || other.groups != self.groups
            || other.alpha != self.alpha
            || self.sp_source != SpSource::Records
            || other.sp_source != SpSource::Records
        {
            return Err(Error::ShapeMismatch);
        }
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect::<Vec<_>>();
        Self::from_tallies(
            self.labels,
            self.groups,
            add(&self.cell, &other.cell),
            add(&self.disagree, &other.disagree),
            self.alpha,
        )
    }

    pub fn labels(&self) -> LabelSpace {
        self.labels
    }

    pub fn label_count(&self) -> usize {
        self.labels.size()
    }

    pub fn group_count(&self) -> usize {
        self.groups
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sp_source(&self) -> SpSource {
        self.sp_source
    }

    fn idx(&self, m: usize, k: usize) -> usize {
        debug_assert!(m < self.groups && k < self.labels.size());
        m * self.labels.size() + k
    }

    fn check(&self, m: usize, k: Option<usize>) -> Result<()> {
        if m >= self.groups {
            return Err(Error::GroupOutOfRange {
                group: m,
                count: self.groups,
            });
        }
        if let Some(k) = k {
            self.labels.check(k)?;
        }
        Ok(())
    }

    /// `n_{m,k}`
    pub fn count(&self, m: usize, k: usize) -> f64 {
        self.cell[self.idx(m, k)]
    }

    /// `d_{m,k}`
    pub fn disagree_count(&self, m: usize, k: usize) -> f64 {
        self.disagree[self.idx(m, k)]
    }

    /// `n_m`
    pub fn group_total(&self, m: usize) -> f64 {
        let k = self.labels.size();
        self.cell[m * k..(m + 1) * k].iter().sum()
    }

    fn sp_total(&self, m: usize) -> f64 {
        let k = self.labels.size();
        self.sp_cell[m * k..(m + 1) * k].iter().sum()
    }

    /// Group has a defined statistical-parity row.
    pub fn group_defined(&self, m: usize) -> bool {
        self.sp_total(m) + self.alpha * self.labels.size() as f64 > 0.0
    }

    /// Groups with a defined statistical-parity row.
    pub fn defined_groups(&self) -> Vec<usize> {
        (0..self.groups).filter(|&m| self.group_defined(m)).collect()
    }

    pub fn sp(&self, m: usize, k: usize) -> Option<f64> {
        let k_count = self.labels.size() as f64;
        let den = self.sp_total(m) + self.alpha * k_count;
        (den > 0.0).then(|| (self.sp_cell[self.idx(m, k)] + self.alpha) / den)
    }

    pub fn dr(&self, m: usize, k: usize) -> Option<f64> {
        let i = self.idx(m, k);
        let den = self.cell[i] + 2.0 * self.alpha;
        (den > 0.0).then(|| (self.disagree[i] + self.alpha) / den)
    }

    /// Group disagreement rate. For unsmoothed tables whose SP comes from
    /// the same records this is the exact ratio `d_m / n_m`; otherwise it is
    /// `sum_k DR_{m,k} SP_{m,k}` over cells where both are defined.
    pub fn dr_group(&self, m: usize) -> Option<f64> {
        if self.alpha == 0.0 && self.sp_source == SpSource::Records {
            let n = self.group_total(m);
            let k = self.labels.size();
            let d: f64 = self.disagree[m * k..(m + 1) * k].iter().sum();
            return (n > 0.0).then(|| d / n);
        }
        if !self.group_defined(m) {
            return None;
        }
        Some(
            self.labels
                .labels()
                .filter_map(|k| Some(self.dr(m, k)? * self.sp(m, k)?))
                .sum(),
        )
    }

    /// Both SP and DR are defined at `(m, k)`.
    pub fn cell_defined(&self, m: usize, k: usize) -> bool {
        self.sp(m, k).is_some() && self.dr(m, k).is_some()
    }

    /// Number of `(m, k)` cells where DR or SP is undefined.
    pub fn undefined_cells(&self) -> usize {
        (0..self.groups)
            .flat_map(|m| self.labels.labels().map(move |k| (m, k)))
            .filter(|&(m, k)| !self.cell_defined(m, k))
            .count()
    }

    /// Reads one rate. `Ok(None)` marks an undefined rate (zero denominator).
    pub fn rate_at(&self, kind: RateKind, m: usize, k: Option<usize>) -> Result<Option<f64>> {
        match kind {
            RateKind::Sp | RateKind::DrCell => {
                let k = k.ok_or_else(|| {
                    Error::Input(format!("{kind:?} needs a label index"))
                })?;
                self.check(m, Some(k))?;
                Ok(if kind == RateKind::Sp {
                    self.sp(m, k)
                } else {
                    self.dr(m, k)
                })
            }
            RateKind::DrGroup => {
                self.check(m, k)?;
                Ok(self.dr_group(m))
            }
        }
    }

    /// Row-major `n_{m,k}` tallies.
    pub fn cell_tallies(&self) -> &[f64] {
        &self.cell
    }

    /// Row-major `d_{m,k}` tallies.
    pub fn disagree_tallies(&self) -> &[f64] {
        &self.disagree
    }
}
