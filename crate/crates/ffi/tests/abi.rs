use std::ffi::CStr;
use std::ptr;

use dissent_ffi::*;

fn rec(group: u32, y: u32, z: i32) -> DissentRecord {
    DissentRecord {
        group,
        system_label: y,
        disagreement: false,
        intrinsic_label: z,
    }
}

/// Two groups, two labels; group 1 has a 50% disagreement rate on label 1.
fn records() -> Vec<DissentRecord> {
    vec![
        rec(0, 0, 0),
        rec(0, 0, 0),
        rec(0, 1, 1),
        rec(0, 1, 1),
        rec(1, 0, 0),
        rec(1, 1, 1),
        rec(1, 1, 0),
        rec(1, 1, 1),
    ]
}

unsafe fn table(recs: &[DissentRecord]) -> *mut DissentRateTable {
    let mut t = ptr::null_mut();
    assert_eq!(dissent_rate_table_new(recs.as_ptr(), recs.len(), 2, 2, 0.0, &mut t), DissentStatus::Ok);
    t
}

unsafe fn last_error() -> String {
    let p = dissent_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

#[test]
fn rates_and_notions() {
    unsafe {
        let t = table(&records());
        let mut v = 0.0;
        assert_eq!(dissent_rate(t, DissentRate::Sp, 1, 1, &mut v), DissentStatus::Ok);
        assert_eq!(v, 0.75);
        assert_eq!(dissent_rate(t, DissentRate::DrCell, 1, 1, &mut v), DissentStatus::Ok);
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(dissent_rate(t, DissentRate::DrGroup, 1, 99, &mut v), DissentStatus::Ok);
        assert_eq!(v, 0.25);

        let mut n = DissentNotionValue::default();
        assert_eq!(dissent_definite_notion(t, DissentNotion::Sp, &mut n), DissentStatus::Ok);
        assert_eq!(n.value, 0.25);
        assert_eq!(n.argmax_label, 0);
        assert_eq!(dissent_definite_notion(t, DissentNotion::Ae, &mut n), DissentStatus::Ok);
        assert_eq!(n.value, 0.25);
        assert_eq!(n.argmax_label, -1);
        assert_eq!(dissent_definite_notion(t, DissentNotion::Eo, &mut n), DissentStatus::InvalidArgument);

        let mut b = DissentBounds::default();
        assert_eq!(dissent_bounded_notion(t, DissentNotion::Eo, &mut b), DissentStatus::Ok);
        assert!(b.lower <= b.estimate && b.estimate <= b.upper);
        assert_eq!(b.estimate, 0.5 * (b.lower + b.upper));

        let (mut eo, mut omr) = (0.0, 0.0);
        assert_eq!(dissent_lower_bound(t, DissentNotion::Eo, 1, 1, &mut eo), DissentStatus::Ok);
        assert_eq!(dissent_lower_bound(t, DissentNotion::Omr, 1, 1, &mut omr), DissentStatus::Ok);
        assert!((eo + omr - 1.0).abs() < 1e-12);
        dissent_rate_table_free(t);
    }
}

#[test]
fn oracle_matches_identities() {
    unsafe {
        let recs = records();
        let t = table(&recs);
        let mut joint = ptr::null_mut();
        assert_eq!(dissent_joint_new(recs.as_ptr(), recs.len(), 2, 2, &mut joint), DissentStatus::Ok);
        for notion in [DissentNotion::Ae, DissentNotion::Cal] {
            let mut n = DissentNotionValue::default();
            let mut truth = 0.0;
            assert_eq!(dissent_definite_notion(t, notion, &mut n), DissentStatus::Ok);
            assert_eq!(
                dissent_true_notion(joint, notion, DissentUndefinedCells::Drop, &mut truth),
                DissentStatus::Ok
            );
            assert!((n.value - truth).abs() < 1e-12);
        }
        dissent_joint_free(joint);
        dissent_rate_table_free(t);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut t = ptr::null_mut();
        assert_eq!(
            dissent_rate_table_new(ptr::null(), 0, 2, 2, 0.0, &mut t),
            DissentStatus::NullPointer
        );
        assert!(t.is_null());
        let bad = [rec(5, 0, 0)];
        assert_eq!(
            dissent_rate_table_new(bad.as_ptr(), 1, 2, 2, 0.0, &mut t),
            DissentStatus::InvalidArgument
        );
        assert!(last_error().contains("group"));

        // One non-empty group: notions are undefined.
        let one = [rec(0, 0, -1), rec(0, 1, -1)];
        let t = table(&one);
        let mut b = DissentBounds::default();
        assert_eq!(dissent_bounded_notion(t, DissentNotion::Pe, &mut b), DissentStatus::Undefined);
        let mut v = 0.0;
        assert_eq!(dissent_rate(t, DissentRate::Sp, 1, 0, &mut v), DissentStatus::Undefined);
        assert_eq!(dissent_rate(t, DissentRate::Sp, 0, 0, &mut v), DissentStatus::Ok);
        assert!(dissent_last_error().is_null());
        dissent_rate_table_free(t);
        dissent_rate_table_free(ptr::null_mut());
    }
}

#[test]
fn disagreement_and_version() {
    unsafe {
        let mut s = true;
        assert_eq!(dissent_derive_disagreement(3, 2, 2, &mut s), DissentStatus::Ok);
        assert!(!s);
        assert_eq!(dissent_derive_disagreement(3, 0, 2, &mut s), DissentStatus::Ok);
        assert!(s);
        assert_eq!(dissent_derive_disagreement(3, 0, 3, &mut s), DissentStatus::InvalidArgument);
        assert_eq!(dissent_derive_disagreement(3, 0, 1, ptr::null_mut()), DissentStatus::NullPointer);
        let v = CStr::from_ptr(dissent_version()).to_str().unwrap();
        assert_eq!(v, env!("CARGO_PKG_VERSION"));
    }
}
