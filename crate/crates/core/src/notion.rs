//! Notion kinds, per-cell rate grids, and the max-over-labels-and-pairs gap
//! shared by every group-fairness notion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NotionKind {
    #[serde(rename = "SP")]
    StatisticalParity,
    #[serde(rename = "AE")]
    AccuracyEquality,
    #[serde(rename = "CAL")]
    Calibration,
    #[serde(rename = "EO")]
    EqualOpportunity,
    #[serde(rename = "PE")]
    PredictiveEquality,
    #[serde(rename = "OMR")]
    OverallMisclassification,
}

impl NotionKind {
    pub const ALL: [NotionKind; 6] = [
        NotionKind::StatisticalParity,
        NotionKind::AccuracyEquality,
        NotionKind::Calibration,
        NotionKind::EqualOpportunity,
        NotionKind::PredictiveEquality,
        NotionKind::OverallMisclassification,
    ];

    pub fn code(self) -> &'static str {
        match self {
            NotionKind::StatisticalParity => "SP",
            NotionKind::AccuracyEquality => "AE",
            NotionKind::Calibration => "CAL",
            NotionKind::EqualOpportunity => "EO",
            NotionKind::PredictiveEquality => "PE",
            NotionKind::OverallMisclassification => "OMR",
        }
    }
}

impl fmt::Display for NotionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for NotionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        NotionKind::ALL
            .into_iter()
            .find(|k| k.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Input(format!("unknown notion {s:?}")))
    }
}

/// Notions that can only be bounded from disagreement feedback.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum IndefiniteKind {
    #[serde(rename = "EO")]
    EqualOpportunity,
    #[serde(rename = "PE")]
    PredictiveEquality,
    #[serde(rename = "OMR")]
    OverallMisclassification,
}

impl IndefiniteKind {
    pub const ALL: [IndefiniteKind; 3] = [
        IndefiniteKind::EqualOpportunity,
        IndefiniteKind::PredictiveEquality,
        IndefiniteKind::OverallMisclassification,
    ];

    pub fn notion(self) -> NotionKind {
        match self {
            IndefiniteKind::EqualOpportunity => NotionKind::EqualOpportunity,
            IndefiniteKind::PredictiveEquality => NotionKind::PredictiveEquality,
            IndefiniteKind::OverallMisclassification => NotionKind::OverallMisclassification,
        }
    }

    pub fn code(self) -> &'static str {
        self.notion().code()
    }
}

impl fmt::Display for IndefiniteKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl TryFrom<NotionKind> for IndefiniteKind {
    type Error = Error;

    fn try_from(kind: NotionKind) -> Result<Self> {
        match kind {
            NotionKind::EqualOpportunity => Ok(IndefiniteKind::EqualOpportunity),
            NotionKind::PredictiveEquality => Ok(IndefiniteKind::PredictiveEquality),
            NotionKind::OverallMisclassification => Ok(IndefiniteKind::OverallMisclassification),
            other => Err(Error::Input(format!("{other} is not an indefinite notion"))),
        }
    }
}

/// One fairness score: the largest gap over labels and ordered group pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotionValue {
    pub kind: NotionKind,
    pub value: f64,
    /// `None` for label-free notions (accuracy equality).
    pub argmax_label: Option<usize>,
    /// `(m, m')` with the larger rate first.
    pub argmax_pair: (usize, usize),
    pub excluded_cells: usize,
}

/// Rates indexed by `(group, label)`; `None` marks an undefined cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellGrid {
    groups: usize,
    labels: usize,
    cells: Vec<Option<f64>>,
}

impl CellGrid {
    pub fn new(groups: usize, labels: usize) -> Self {
        Self {
            groups,
            labels,
            cells: vec![None; groups * labels],
        }
    }

    pub fn from_fn(groups: usize, labels: usize, mut f: impl FnMut(usize, usize) -> Option<f64>) -> Self {
        let mut grid = Self::new(groups, labels);
        for m in 0..groups {
            for k in 0..labels {
                grid.cells[m * labels + k] = f(m, k);
            }
        }
        grid
    }

    pub fn groups(&self) -> usize {
        self.groups
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn get(&self, m: usize, k: usize) -> Option<f64> {
        self.cells[m * self.labels + k]
    }

    pub fn set(&mut self, m: usize, k: usize, value: Option<f64>) {
        self.cells[m * self.labels + k] = value;
    }

    pub fn is_defined(&self, m: usize, k: usize) -> bool {
        self.get(m, k).is_some()
    }

    pub fn undefined_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_none()).count()
    }

    /// Copy with every cell undefined where `keep(m, k)` is false.
    pub fn masked(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Self {
        Self::from_fn(self.groups, self.labels, |m, k| {
            if keep(m, k) {
                self.get(m, k)
            } else {
                None
            }
        })
    }
}

/// Position of a gap: label and the ordered group pair `(high, low)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapSite {
    pub label: usize,
    pub high: usize,
    pub low: usize,
}

/// `max_k max_{m != m'} (high(m, k) - low(m', k))` over labels where at
/// least two groups are defined in both grids. Returns `None` when no
/// label qualifies. Ties keep the first site in (k, m, m') order.
pub(crate) fn max_pair_gap(
    groups: usize,
    labels: usize,
    high: impl Fn(usize, usize) -> Option<f64>,
    low: impl Fn(usize, usize) -> Option<f64>,
) -> Option<(f64, GapSite)> {
    let mut best: Option<(f64, GapSite)> = None;
    for k in 0..labels {
        let defined = (0..groups)
            .filter(|&m| high(m, k).is_some() && low(m, k).is_some())
            .count();
        if defined < 2 {
            continue;
        }
        for m in 0..groups {
            let Some(h) = high(m, k) else { continue };
            if low(m, k).is_none() {
                continue;
            }
            for m2 in 0..groups {
                if m2 == m || high(m2, k).is_none() {
                    continue;
                }
                let Some(l) = low(m2, k) else { continue };
                let gap = h - l;
                if best.is_none_or(|(b, _)| gap > b) {
                    best = Some((
                        gap,
                        GapSite {
                            label: k,
                            high: m,
                            low: m2,
                        },
                    ));
                }
            }
        }
    }
    best
}

/// Largest gap of a per-cell rate over labels and ordered group pairs.
pub fn notion_from_grid(kind: NotionKind, grid: &CellGrid) -> Result<NotionValue> {
    let (value, site) = max_pair_gap(
        grid.groups(),
        grid.labels(),
        |m, k| grid.get(m, k),
        |m, k| grid.get(m, k),
    )
    .ok_or(Error::NoComparableLabel)?;
    Ok(NotionValue {
        kind,
        value,
        argmax_label: Some(site.label),
        argmax_pair: (site.high, site.low),
        excluded_cells: grid.undefined_count(),
    })
}

/// Largest gap of a per-group scalar over ordered group pairs.
pub fn notion_from_groups(kind: NotionKind, rates: &[Option<f64>]) -> Result<NotionValue> {
    let defined = rates.iter().filter(|r| r.is_some()).count();
    if defined < 2 {
        return Err(Error::InsufficientGroups(defined));
    }
    let (value, site) = max_pair_gap(rates.len(), 1, |m, _| rates[m], |m, _| rates[m])
        .ok_or(Error::InsufficientGroups(defined))?;
    Ok(NotionValue {
        kind,
        value,
        argmax_label: None,
        argmax_pair: (site.high, site.low),
        excluded_cells: 0,
    })
}
