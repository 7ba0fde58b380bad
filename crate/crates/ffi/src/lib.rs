//! C ABI over the `dissent` audit library.
//!
//! Tables are opaque handles created from plain record arrays and released
//! with the matching `_free` function. Every fallible call returns a
//! [`DissentStatus`]; on failure a message for the calling thread is
//! available from [`dissent_last_error`]. Output parameters are written only
//! on `DISSENT_STATUS_OK`. Enum arguments must hold one of the declared
//! values.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, UnwindSafe};
use std::ptr;

use dissent::definite::{accuracy_equality, calibration, statistical_parity};
use dissent::indefinite::{bounded_notion, lower_bound};
use dissent::label::derive_disagreement;
use dissent::oracle::true_notion;
use dissent::{
    AuditRecord, Error, GroupPartition, IndefiniteKind, JointTable, LabelSpace, NotionKind,
    RateKind, RateTable, UndefinedCells,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissentStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    /// The requested value has a zero denominator or too few groups.
    Undefined = 3,
    Panic = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissentNotion {
    Sp = 0,
    Ae = 1,
    Cal = 2,
    Eo = 3,
    Pe = 4,
    Omr = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissentRate {
    /// `P(y = k | m)`
    Sp = 0,
    /// `P(s = 1 | y = k, m)`
    DrCell = 1,
    /// `P(s = 1 | m)`; the label argument is ignored.
    DrGroup = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DissentUndefinedCells {
    Drop = 0,
    Zero = 1,
}

/// One audited input. `intrinsic_label < 0` means the critic's own label is
/// unknown; otherwise `disagreement` is ignored and derived from the labels.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DissentRecord {
    pub group: u32,
    pub system_label: u32,
    pub disagreement: bool,
    pub intrinsic_label: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DissentNotionValue {
    pub value: f64,
    /// -1 for group-level notions.
    pub argmax_label: i32,
    pub argmax_high: u32,
    pub argmax_low: u32,
    pub excluded_cells: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DissentBounds {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
    pub excluded_cells: u32,
}

/// Opaque rate table.
pub struct DissentRateTable(RateTable);

/// Opaque oracle table built from full `(y, z)` pairs.
pub struct DissentJoint(JointTable);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: DissentStatus, msg: impl Into<String>) -> DissentStatus {
    set_error(msg.into());
    status
}

fn status_of(e: &Error) -> DissentStatus {
    match e {
        Error::InsufficientGroups(_) | Error::NoComparableLabel => DissentStatus::Undefined,
        _ => DissentStatus::InvalidArgument,
    }
}

fn from_error(e: Error) -> DissentStatus {
    fail(status_of(&e), e.to_string())
}

fn guard(f: impl FnOnce() -> DissentStatus + UnwindSafe) -> DissentStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(f).unwrap_or_else(|_| fail(DissentStatus::Panic, "internal panic"))
}

fn notion_kind(n: DissentNotion) -> NotionKind {
    match n {
        DissentNotion::Sp => NotionKind::StatisticalParity,
        DissentNotion::Ae => NotionKind::AccuracyEquality,
        DissentNotion::Cal => NotionKind::Calibration,
        DissentNotion::Eo => NotionKind::EqualOpportunity,
        DissentNotion::Pe => NotionKind::PredictiveEquality,
        DissentNotion::Omr => NotionKind::OverallMisclassification,
    }
}

fn indefinite(n: DissentNotion) -> Result<IndefiniteKind, DissentStatus> {
    IndefiniteKind::try_from(notion_kind(n)).map_err(from_error)
}

unsafe fn records<'a>(ptr: *const DissentRecord, len: usize) -> Result<&'a [DissentRecord], DissentStatus> {
    if ptr.is_null() {
        return Err(fail(DissentStatus::NullPointer, "records is null"));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

fn convert(recs: &[DissentRecord]) -> Vec<AuditRecord> {
    recs.iter()
        .map(|r| {
            let (g, y) = (r.group as usize, r.system_label as usize);
            if r.intrinsic_label < 0 {
                AuditRecord::feedback_only(g, y, r.disagreement)
            } else {
                AuditRecord::from_labels(g, y, r.intrinsic_label as usize)
            }
        })
        .collect()
}

fn domain(labels: u32, groups: u32) -> Result<(LabelSpace, GroupPartition), DissentStatus> {
    let ls = LabelSpace::new(labels as usize).map_err(from_error)?;
    let gp = GroupPartition::anonymous(groups as usize).map_err(from_error)?;
    Ok((ls, gp))
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(DissentStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn dissent_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dissent_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub unsafe extern "C" fn dissent_derive_disagreement(
    labels: u32,
    system_label: u32,
    intrinsic_label: u32,
    out: *mut bool,
) -> DissentStatus {
    guard(|| {
        non_null!(out);
        let ls = try_status!(LabelSpace::new(labels as usize).map_err(from_error));
        let s = try_status!(
            derive_disagreement(ls, system_label as usize, intrinsic_label as usize).map_err(from_error)
        );
        *out = s;
        DissentStatus::Ok
    })
}

/// Builds a rate table. `alpha` is additive smoothing (0 disables it).
#[no_mangle]
pub unsafe extern "C" fn dissent_rate_table_new(
    records_ptr: *const DissentRecord,
    len: usize,
    labels: u32,
    groups: u32,
    alpha: f64,
    out: *mut *mut DissentRateTable,
) -> DissentStatus {
    guard(|| {
        non_null!(out);
        let recs = try_status!(records(records_ptr, len));
        let (ls, gp) = try_status!(domain(labels, groups));
        let table = try_status!(RateTable::from_records(&convert(recs), ls, &gp, alpha).map_err(from_error));
        *out = Box::into_raw(Box::new(DissentRateTable(table)));
        DissentStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn dissent_rate_table_free(table: *mut DissentRateTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Replaces the statistical-parity rates of `table` with those of `pooled`.
#[no_mangle]
pub unsafe extern "C" fn dissent_rate_table_use_pooled_sp(
    table: *mut DissentRateTable,
    pooled: *const DissentRateTable,
) -> DissentStatus {
    guard(|| {
        non_null!(table, pooled);
        let next = try_status!((*table).0.with_pooled_sp(&(*pooled).0).map_err(from_error));
        (*table).0 = next;
        DissentStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn dissent_rate(
    table: *const DissentRateTable,
    kind: DissentRate,
    group: u32,
    label: u32,
    out: *mut f64,
) -> DissentStatus {
    guard(|| {
        non_null!(table, out);
        let (kind, label) = match kind {
            DissentRate::Sp => (RateKind::Sp, Some(label as usize)),
            DissentRate::DrCell => (RateKind::DrCell, Some(label as usize)),
            DissentRate::DrGroup => (RateKind::DrGroup, None),
        };
        match (*table).0.rate_at(kind, group as usize, label) {
            Ok(Some(v)) => {
                *out = v;
                DissentStatus::Ok
            }
            Ok(None) => fail(DissentStatus::Undefined, "rate has a zero denominator"),
            Err(e) => from_error(e),
        }
    })
}

/// Statistical parity, accuracy equality or calibration.
#[no_mangle]
pub unsafe extern "C" fn dissent_definite_notion(
    table: *const DissentRateTable,
    notion: DissentNotion,
    out: *mut DissentNotionValue,
) -> DissentStatus {
    guard(|| {
        non_null!(table, out);
        let t = &(*table).0;
        let v = match notion {
            DissentNotion::Sp => statistical_parity(t),
            DissentNotion::Ae => accuracy_equality(t),
            DissentNotion::Cal => calibration(t),
            _ => return fail(DissentStatus::InvalidArgument, "not a definite notion"),
        };
        let v = try_status!(v.map_err(from_error));
        *out = DissentNotionValue {
            value: v.value,
            argmax_label: v.argmax_label.map_or(-1, |k| k as i32),
            argmax_high: v.argmax_pair.0 as u32,
            argmax_low: v.argmax_pair.1 as u32,
            excluded_cells: v.excluded_cells as u32,
        };
        DissentStatus::Ok
    })
}

/// Per-cell lower bound of equal opportunity, predictive equality or
/// overall misclassification.
#[no_mangle]
pub unsafe extern "C" fn dissent_lower_bound(
    table: *const DissentRateTable,
    notion: DissentNotion,
    group: u32,
    label: u32,
    out: *mut f64,
) -> DissentStatus {
    guard(|| {
        non_null!(table, out);
        let kind = try_status!(indefinite(notion));
        match lower_bound(&(*table).0, kind, group as usize, label as usize) {
            Ok(Some(v)) => {
                *out = v;
                DissentStatus::Ok
            }
            Ok(None) => fail(DissentStatus::Undefined, "cell bound is undefined"),
            Err(e) => from_error(e),
        }
    })
}

/// Gap bounds and midpoint estimate of an indefinite notion.
#[no_mangle]
pub unsafe extern "C" fn dissent_bounded_notion(
    table: *const DissentRateTable,
    notion: DissentNotion,
    out: *mut DissentBounds,
) -> DissentStatus {
    guard(|| {
        non_null!(table, out);
        let kind = try_status!(indefinite(notion));
        let b = try_status!(bounded_notion(&(*table).0, kind).map_err(from_error));
        *out = DissentBounds {
            lower: b.gf_lower,
            upper: b.gf_upper,
            estimate: b.gf_estimate,
            excluded_cells: b.excluded_cells as u32,
        };
        DissentStatus::Ok
    })
}

/// Oracle table; every record needs `intrinsic_label >= 0`.
#[no_mangle]
pub unsafe extern "C" fn dissent_joint_new(
    records_ptr: *const DissentRecord,
    len: usize,
    labels: u32,
    groups: u32,
    out: *mut *mut DissentJoint,
) -> DissentStatus {
    guard(|| {
        non_null!(out);
        let recs = try_status!(records(records_ptr, len));
        let (ls, gp) = try_status!(domain(labels, groups));
        let joint = try_status!(JointTable::from_records(&convert(recs), ls, &gp).map_err(from_error));
        *out = Box::into_raw(Box::new(DissentJoint(joint)));
        DissentStatus::Ok
    })
}

#[no_mangle]
pub unsafe extern "C" fn dissent_joint_free(joint: *mut DissentJoint) {
    if !joint.is_null() {
        drop(Box::from_raw(joint));
    }
}

/// Ground-truth value of any notion from full label pairs.
#[no_mangle]
pub unsafe extern "C" fn dissent_true_notion(
    joint: *const DissentJoint,
    notion: DissentNotion,
    cells: DissentUndefinedCells,
    out: *mut f64,
) -> DissentStatus {
    guard(|| {
        non_null!(joint, out);
        let mode = match cells {
            DissentUndefinedCells::Drop => UndefinedCells::Drop,
            DissentUndefinedCells::Zero => UndefinedCells::Zero,
        };
        let v = try_status!(true_notion(&(*joint).0, notion_kind(notion), mode).map_err(from_error));
        *out = v.value;
        DissentStatus::Ok
    })
}
