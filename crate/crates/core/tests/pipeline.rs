//! End-to-end audit checked against a from-scratch recomputation on the raw
//! `(group, y, z)` triples.

use std::path::Path;

use dissent::ingest::write_interchange;
use dissent::report::{validate_report, IndefiniteEntry};
use dissent::simulator::simulated_critics;
use dissent::{
    run_audit, AuditConfig, AuditInput, AuditRecord, IndefiniteKind, NotionKind, ScenarioSpec,
};

const TOL: f64 = 1e-12;

fn scenario(name: &str) -> ScenarioSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures/scenarios")
        .join(name);
    ScenarioSpec::load(&path).unwrap()
}

struct Expected {
    truth: f64,
    lower: f64,
    upper: f64,
}

/// Cell rate and bound straight from counts; `None` when either is undefined.
fn cell(kind: IndefiniteKind, n: &[Vec<f64>], k: usize) -> Option<(f64, f64)> {
    let total: f64 = n.iter().flatten().sum();
    let row: f64 = n[k].iter().sum();
    let col: f64 = n.iter().map(|r| r[k]).sum();
    let hit = n[k][k];
    if total == 0.0 || row == 0.0 {
        return None;
    }
    let sp = row / total;
    let dr = (row - hit) / row;
    let (phi, mu, omega) = ((1.0 - dr) * sp, dr * sp, 1.0 - sp);
    let ratio = |a: f64, b: f64| (b > 0.0).then(|| a / b);
    let (truth, bound) = match kind {
        IndefiniteKind::EqualOpportunity => (ratio(hit, col), ratio(phi, phi + omega)),
        IndefiniteKind::PredictiveEquality => (ratio(row - hit, total - col), ratio(mu, mu + omega)),
        IndefiniteKind::OverallMisclassification => (ratio(col - hit, col), ratio(omega, phi + omega)),
    };
    Some((truth?, bound?))
}

fn expected(kind: IndefiniteKind, k: usize, m: usize, recs: &[AuditRecord]) -> Option<Expected> {
    let mut n = vec![vec![vec![0.0; k]; k]; m];
    for r in recs {
        n[r.group][r.system_label][r.intrinsic_label.unwrap()] += 1.0;
    }
    let cells: Vec<Vec<Option<(f64, f64)>>> =
        (0..m).map(|g| (0..k).map(|y| cell(kind, &n[g], y)).collect()).collect();
    let mut out: Option<Expected> = None;
    for y in 0..k {
        for a in 0..m {
            for b in 0..m {
                let (Some((ta, la)), Some((tb, lb))) = (cells[a][y], cells[b][y]) else {
                    continue;
                };
                if a == b {
                    continue;
                }
                let e = out.get_or_insert(Expected {
                    truth: f64::MIN,
                    lower: f64::MIN,
                    upper: f64::MIN,
                });
                e.truth = e.truth.max(ta - tb);
                e.lower = e.lower.max(la - 1.0);
                e.upper = e.upper.max(1.0 - lb);
            }
        }
    }
    out
}

fn check_entry(e: &IndefiniteEntry, want: Option<Expected>) {
    let Some(want) = want else {
        assert!(e.true_value.is_none(), "{}: expected undefined", e.kind);
        return;
    };
    let close = |a: Option<f64>, b: f64| (a.unwrap() - b).abs() <= TOL;
    assert!(close(e.true_value, want.truth), "{} truth", e.kind);
    assert!(close(e.lower, want.lower), "{} lower", e.kind);
    assert!(close(e.upper, want.upper), "{} upper", e.kind);
    let est = 0.5 * (want.lower + want.upper);
    assert!(close(e.estimate, est), "{} estimate", e.kind);
    assert!(close(e.error, (est - want.truth).abs()), "{} error", e.kind);
}

fn audit_via_interchange(spec: &ScenarioSpec, critics: usize) -> (Vec<dissent::CriticFeedback>, dissent::AuditReport) {
    let feedback = simulated_critics(spec, critics).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sim.csv");
    write_interchange(std::fs::File::create(&path).unwrap(), &feedback).unwrap();
    let input = AuditInput::from_interchange(&path, Some(spec.labels), Some(spec.groups)).unwrap();
    let report = run_audit(&input, &AuditConfig::default()).unwrap();
    (feedback, report)
}

#[test]
fn simulated_export_matches_independent_oracle() {
    for name in ["baseline.toml", "binary_four_groups.toml", "diagonal.toml"] {
        let spec = scenario(name);
        let (feedback, report) = audit_via_interchange(&spec, 12);
        assert!(validate_report(&report).passed(), "{name}");
        assert_eq!(report.critics.len(), feedback.len());
        for (fb, cr) in feedback.iter().zip(&report.critics) {
            assert_eq!(fb.critic_id(), cr.critic_id);
            for e in &cr.indefinite {
                check_entry(e, expected(e.kind, spec.labels, spec.groups, fb.records()));
            }
            for d in &cr.definite {
                assert_eq!(d.error.map(|x| x <= TOL), Some(true), "{name} {}", d.kind);
            }
        }
    }
}

#[test]
fn aggregate_error_is_mean_of_critic_errors() {
    let (_, report) = audit_via_interchange(&scenario("baseline.toml"), 9);
    for kind in IndefiniteKind::ALL {
        let errors: Vec<f64> = report
            .critics
            .iter()
            .filter_map(|c| c.indefinite.iter().find(|e| e.kind == kind)?.error)
            .collect();
        let agg = report.aggregate_for(kind.notion()).unwrap();
        let mean = errors.iter().sum::<f64>() / errors.len() as f64;
        assert!((agg.error.mean - mean).abs() <= TOL);
        assert_eq!(agg.error.count, errors.len());
    }
}

#[test]
fn echoing_critics_have_zero_definite_notions() {
    let spec = scenario("diagonal.toml");
    let (_, report) = audit_via_interchange(&spec, 4);
    for c in &report.critics {
        for d in &c.definite {
            if d.kind != NotionKind::StatisticalParity {
                assert_eq!(d.value, Some(0.0), "{} {}", c.critic_id, d.kind);
            }
        }
        for e in &c.indefinite {
            let est = e.estimate.unwrap();
            assert!((e.error.unwrap() - (e.true_value.unwrap() - est).abs()).abs() <= TOL);
        }
    }
}

#[test]
fn audit_is_deterministic() {
    let spec = scenario("binary_four_groups.toml");
    let (_, a) = audit_via_interchange(&spec, 6);
    let (_, b) = audit_via_interchange(&spec, 6);
    assert_eq!(a.to_json(), b.to_json());
}
