//! Notions computed exactly from a [`RateTable`]: statistical parity,
//! accuracy equality, and calibration.

use crate::error::{Error, Result};
use crate::notion::{notion_from_grid, notion_from_groups, CellGrid, NotionKind, NotionValue};
use crate::rates::RateTable;

fn require_two_groups(table: &RateTable) -> Result<()> {
    let n = table.defined_groups().len();
    if n < 2 {
        return Err(Error::InsufficientGroups(n));
    }
    Ok(())
}

/// `max_k max_{m,m'} SP_{m,k} - SP_{m',k}`. Ignores disagreement tallies.
pub fn statistical_parity(table: &RateTable) -> Result<NotionValue> {
    require_two_groups(table)?;
    let grid = CellGrid::from_fn(table.group_count(), table.label_count(), |m, k| table.sp(m, k));
    notion_from_grid(NotionKind::StatisticalParity, &grid)
}

/// Per-group agreement probability `AE_m = 1 - sum_k DR_{m,k} SP_{m,k}`,
/// summed over cells where both rates are defined.
pub fn accuracy_rates(table: &RateTable) -> Vec<Option<f64>> {
    (0..table.group_count())
        .map(|m| {
            if !table.group_defined(m) {
                return None;
            }
            let disagree: f64 = table
                .labels()
                .labels()
                .filter_map(|k| Some(table.dr(m, k)? * table.sp(m, k)?))
                .sum();
            Some(1.0 - disagree)
        })
        .collect()
}

/// Largest gap in agreement probability between two groups.
pub fn accuracy_equality(table: &RateTable) -> Result<NotionValue> {
    require_two_groups(table)?;
    let mut value = notion_from_groups(NotionKind::AccuracyEquality, &accuracy_rates(table))?;
    value.excluded_cells = table.undefined_cells();
    Ok(value)
}

/// `max_k max_{m,m'} DR_{m,k} - DR_{m',k}`, which equals the largest
/// calibration gap because `C_{m,k} = 1 - DR_{m,k}`. The reported pair
/// lists the group with the higher disagreement rate first.
pub fn calibration(table: &RateTable) -> Result<NotionValue> {
    let grid = CellGrid::from_fn(table.group_count(), table.label_count(), |m, k| {
        if table.cell_defined(m, k) {
            table.dr(m, k)
        } else {
            None
        }
    });
    notion_from_grid(NotionKind::Calibration, &grid)
}
