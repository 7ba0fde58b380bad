//! Bounds and midpoint estimates for notions that disagreement feedback
//! cannot pin down exactly: equal opportunity, predictive equality, and
//! overall misclassification rate.
//!
//! Each per-cell rate `R_{m,k}` gets a lower bound `L_{m,k}` derived from
//! `DR_{m,k}` and the statistical-parity row of group `m`:
//!
//! | notion | rate                  | lower bound     |
//! |--------|-----------------------|-----------------|
//! | EO     | `P(y=k \| z=k, m)`    | `φ / (φ + Ω)`   |
//! | PE     | `P(y=k \| z≠k, m)`    | `μ / (μ + Ω)`   |
//! | OMR    | `P(y≠k \| z=k, m)`    | `Ω / (φ + Ω)`   |
//!
//! with `φ = (1 - DR) SP`, `μ = DR SP`, and `Ω = 1 - SP`. Upper bounds
//! default to 1. Cell bounds are then lifted to bounds on the
//! max-over-pairs gap, and the estimate is their midpoint.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::notion::{max_pair_gap, CellGrid, GapSite, IndefiniteKind};
use crate::rates::RateTable;

/// Tolerance used when checking identities and containment in floating point.
pub const IDENTITY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxTerms {
    /// `(1 - DR_{m,k}) SP_{m,k}`
    pub phi: f64,
    /// `DR_{m,k} SP_{m,k}`
    pub mu: f64,
    /// `sum_{l != k} SP_{m,l}`, computed as `1 - SP_{m,k}`.
    pub omega: f64,
}

/// `None` when cell `(m, k)` is undefined in `table`.
pub fn aux_terms(table: &RateTable, m: usize, k: usize) -> Result<Option<AuxTerms>> {
    check_index(table, m, k)?;
    let (Some(sp), Some(dr)) = (table.sp(m, k), table.dr(m, k)) else {
        return Ok(None);
    };
    Ok(Some(AuxTerms {
        phi: (1.0 - dr) * sp,
        mu: dr * sp,
        omega: 1.0 - sp,
    }))
}

fn check_index(table: &RateTable, m: usize, k: usize) -> Result<()> {
    if m >= table.group_count() {
        return Err(Error::GroupOutOfRange {
            group: m,
            count: table.group_count(),
        });
    }
    table.labels().check(k)
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

impl AuxTerms {
    /// Lower bound on the cell rate of `kind`. `None` when the bound's
    /// denominator vanishes, which happens exactly when the conditioning
    /// event of the rate has zero probability.
    pub fn lower_bound(&self, kind: IndefiniteKind) -> Option<f64> {
        match kind {
            IndefiniteKind::EqualOpportunity => ratio(self.phi, self.phi + self.omega),
            IndefiniteKind::PredictiveEquality => ratio(self.mu, self.mu + self.omega),
            IndefiniteKind::OverallMisclassification => ratio(self.omega, self.phi + self.omega),
        }
    }
}

pub fn lower_bound(
    table: &RateTable,
    kind: IndefiniteKind,
    m: usize,
    k: usize,
) -> Result<Option<f64>> {
    Ok(aux_terms(table, m, k)?.and_then(|aux| aux.lower_bound(kind)))
}

pub fn eo_lower_bound(table: &RateTable, m: usize, k: usize) -> Result<Option<f64>> {
    lower_bound(table, IndefiniteKind::EqualOpportunity, m, k)
}

pub fn pe_lower_bound(table: &RateTable, m: usize, k: usize) -> Result<Option<f64>> {
    lower_bound(table, IndefiniteKind::PredictiveEquality, m, k)
}

pub fn omr_lower_bound(table: &RateTable, m: usize, k: usize) -> Result<Option<f64>> {
    lower_bound(table, IndefiniteKind::OverallMisclassification, m, k)
}

/// Per-cell `(lower, upper)` bounds; `None` marks an undefined cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellBounds {
    groups: usize,
    labels: usize,
    cells: Vec<Option<(f64, f64)>>,
}

impl CellBounds {
    pub fn new(groups: usize, labels: usize) -> Self {
        Self {
            groups,
            labels,
            cells: vec![None; groups * labels],
        }
    }

    /// Lower bounds of `kind` from `table`, with every upper bound set to 1.
    pub fn from_table(table: &RateTable, kind: IndefiniteKind) -> Self {
        let mut bounds = Self::new(table.group_count(), table.label_count());
        for m in 0..bounds.groups {
            for k in 0..bounds.labels {
                if let Some(l) = aux_terms(table, m, k).ok().flatten().and_then(|a| a.lower_bound(kind)) {
                    bounds.cells[m * bounds.labels + k] = Some((l, 1.0));
                }
            }
        }
        bounds
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn get(&self, m: usize, k: usize) -> Option<(f64, f64)> {
        self.cells[m * self.labels + k]
    }

    pub fn lower(&self, m: usize, k: usize) -> Option<f64> {
        self.get(m, k).map(|(l, _)| l)
    }

    pub fn upper(&self, m: usize, k: usize) -> Option<f64> {
        self.get(m, k).map(|(_, u)| u)
    }

    /// Sets cell `(m, k)`. Both values must lie in `[0, 1]` with `lower <= upper`.
    pub fn set(&mut self, m: usize, k: usize, lower: f64, upper: f64) -> Result<()> {
        if m >= self.groups {
            return Err(Error::GroupOutOfRange {
                group: m,
                count: self.groups,
            });
        }
        if k >= self.labels {
            return Err(Error::LabelOutOfRange {
                label: k,
                size: self.labels,
            });
        }
        if !(0.0..=1.0).contains(&lower) || !(0.0..=1.0).contains(&upper) {
            return Err(Error::Input(format!(
                "cell bounds ({lower}, {upper}) outside [0, 1]"
            )));
        }
        if lower > upper {
            return Err(Error::InvertedBounds { lower, upper });
        }
        self.cells[m * self.labels + k] = Some((lower, upper));
        Ok(())
    }

    /// Replaces the upper bound of an already defined cell.
    pub fn set_upper(&mut self, m: usize, k: usize, upper: f64) -> Result<()> {
        let (lower, _) = self
            .get(m, k)
            .ok_or_else(|| Error::Input(format!("cell ({m}, {k}) is undefined")))?;
        self.set(m, k, lower, upper)
    }

    pub fn clear(&mut self, m: usize, k: usize) {
        self.cells[m * self.labels + k] = None;
    }

    /// Drops every cell that is undefined in `grid`.
    pub fn restrict_to(&mut self, grid: &CellGrid) {
        for m in 0..self.groups {
            for k in 0..self.labels {
                if !grid.is_defined(m, k) {
                    self.clear(m, k);
                }
            }
        }
    }

    pub fn is_defined(&self, m: usize, k: usize) -> bool {
        self.get(m, k).is_some()
    }

    pub fn undefined_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }
}

/// Bounds on a max-over-pairs gap, with the cells that attain them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GfBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_site: GapSite,
    pub upper_site: GapSite,
}

/// `max_k max_{m,m'} (L_{m,k} - U_{m',k}) <= GF <= max_k max_{m,m'} (U_{m,k} - L_{m',k})`.
/// Only labels defined in at least two groups take part.
pub fn gf_bounds(cells: &CellBounds) -> Result<GfBounds> {
    let (g, l) = (cells.groups, cells.labels);
    let (lower, lower_site) =
        max_pair_gap(g, l, |m, k| cells.lower(m, k), |m, k| cells.upper(m, k))
            .ok_or(Error::NoComparableLabel)?;
    let (upper, upper_site) =
        max_pair_gap(g, l, |m, k| cells.upper(m, k), |m, k| cells.lower(m, k))
            .ok_or(Error::NoComparableLabel)?;
    Ok(GfBounds {
        lower,
        upper,
        lower_site,
        upper_site,
    })
}

/// Midpoint of `[lower, upper]`. NaN bounds count as inverted.
pub fn gf_estimate(lower: f64, upper: f64) -> Result<f64> {
    match lower.partial_cmp(&upper) {
        Some(std::cmp::Ordering::Less | std::cmp::Ordering::Equal) => Ok(0.5 * (lower + upper)),
        _ => Err(Error::InvertedBounds { lower, upper }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedNotion {
    pub kind: IndefiniteKind,
    pub gf_lower: f64,
    pub gf_upper: f64,
    pub gf_estimate: f64,
    pub lower_site: GapSite,
    pub upper_site: GapSite,
    pub excluded_cells: usize,
}

impl BoundedNotion {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.gf_upper - self.gf_lower)
    }

    pub fn contains(&self, value: f64) -> bool {
        self.gf_lower <= value && value <= self.gf_upper
    }
}

/// Bounds and estimate of `kind` from arbitrary cell bounds.
pub fn bounded_from_cells(kind: IndefiniteKind, cells: &CellBounds) -> Result<BoundedNotion> {
    let b = gf_bounds(cells)?;
    Ok(BoundedNotion {
        kind,
        gf_lower: b.lower,
        gf_upper: b.upper,
        gf_estimate: gf_estimate(b.lower, b.upper)?,
        lower_site: b.lower_site,
        upper_site: b.upper_site,
        excluded_cells: cells.undefined_count(),
    })
}

/// Bounds and estimate of `kind` from a rate table, with `U_{m,k} = 1`.
pub fn bounded_notion(table: &RateTable, kind: IndefiniteKind) -> Result<BoundedNotion> {
    let n = table.defined_groups().len();
    if n < 2 {
        return Err(Error::InsufficientGroups(n));
    }
    bounded_from_cells(kind, &CellBounds::from_table(table, kind))
}
