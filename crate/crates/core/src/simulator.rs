//! Synthetic populations with known per-group joint distributions
//! `P(y, z | m)`, used to exercise the bounds and identities at controlled
//! scales.
//!
//! Sampling uses ChaCha8 from `rand_chacha`, seeded with `seed_from_u64`.
//! Trial `i` of a campaign uses seed `base + i`; the independent second
//! sample of a cross-sample trial uses the same seed on ChaCha stream 1.

use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::definite::{accuracy_equality, calibration};
use crate::error::{Error, Result};
use crate::indefinite::IDENTITY_TOLERANCE;
use crate::label::{AuditRecord, CriticFeedback, GroupPartition, LabelSpace};
use crate::notion::{IndefiniteKind, NotionKind};
use crate::oracle::{aligned_comparison, containment, true_notion, JointTable, UndefinedCells};
use crate::rates::RateTable;

pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.3), seed_from_u64";

/// Per-group joint matrices must sum to 1 within this tolerance.
const SIMPLEX_TOLERANCE: f64 = 1e-9;

fn default_name() -> String {
    "scenario".into()
}

/// Scenario file contents. `joint[m]` is the row-major `K x K` matrix of
/// group `m`: entry `y * K + z` is `P(y, z | m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default = "default_name")]
    pub name: String,
    pub labels: usize,
    pub groups: usize,
    pub samples_per_group: usize,
    pub seed: u64,
    pub joint: Vec<Vec<f64>>,
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::InvalidScenario(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| Error::Config {
            path: path.to_owned(),
            message: e.to_string(),
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if self.labels < 2 {
            return bad(format!("labels = {} (need >= 2)", self.labels));
        }
        if self.groups < 2 {
            return bad(format!("groups = {} (need >= 2)", self.groups));
        }
        if self.samples_per_group == 0 {
            return bad("samples_per_group must be positive".into());
        }
        if self.joint.len() != self.groups {
            return bad(format!(
                "joint has {} matrices for {} groups",
                self.joint.len(),
                self.groups
            ));
        }
        let kk = self.labels * self.labels;
        for (m, p) in self.joint.iter().enumerate() {
            if p.len() != kk {
                return bad(format!("joint[{m}] has {} entries, expected {kk}", p.len()));
            }
            if p.iter().any(|&x| !(x.is_finite() && x >= 0.0)) {
                return bad(format!("joint[{m}] has a negative or non-finite entry"));
            }
            let total: f64 = p.iter().sum();
            if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
                return bad(format!("joint[{m}] sums to {total}, not 1"));
            }
        }
        Ok(())
    }

    pub fn label_space(&self) -> LabelSpace {
        LabelSpace::new(self.labels).expect("validated")
    }

    pub fn partition(&self) -> GroupPartition {
        GroupPartition::anonymous(self.groups).expect("validated")
    }

    /// Copy with a different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }
}

fn sample_with(spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> Result<Vec<AuditRecord>> {
    let k = spec.labels;
    let mut out = Vec::with_capacity(spec.groups * spec.samples_per_group);
    for (m, p) in spec.joint.iter().enumerate() {
        let dist = WeightedIndex::new(p).map_err(|e| Error::InvalidScenario(format!("joint[{m}]: {e}")))?;
        for _ in 0..spec.samples_per_group {
            let cell = dist.sample(rng);
            out.push(AuditRecord::from_labels(m, cell / k, cell % k));
        }
    }
    Ok(out)
}

/// `samples_per_group` i.i.d. draws from each group's joint, group by group.
pub fn sample_population(spec: &ScenarioSpec) -> Result<Vec<AuditRecord>> {
    spec.validate()?;
    sample_with(spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))
}

fn sample_stream(spec: &ScenarioSpec, stream: u64) -> Result<Vec<AuditRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(stream);
    sample_with(spec, &mut rng)
}

/// One simulated critic per seed `spec.seed + i`, each judging a fresh
/// population sample. Samples are not shared, so record ids carry the
/// critic index: `c{i}-r{j}`.
pub fn simulated_critics(spec: &ScenarioSpec, critics: usize) -> Result<Vec<CriticFeedback>> {
    let width = critics.saturating_sub(1).to_string().len();
    (0..critics)
        .map(|i| {
            let records = sample_population(&spec.with_seed(spec.seed.wrapping_add(i as u64)))?;
            let ids = (0..records.len()).map(|j| format!("c{i}-r{j}")).collect();
            CriticFeedback::new(format!("critic-{i:0width$}"), ids, records)
        })
        .collect()
}

/// Exact population quantities of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRates {
    /// Rate table holding probability masses instead of counts.
    pub table: RateTable,
    /// Joint holding `P(y, z | m)`; its cell rates are the exact notion rates.
    pub joint: JointTable,
}

pub fn population_rates(spec: &ScenarioSpec) -> Result<PopulationRates> {
    spec.validate()?;
    let joint = JointTable::from_masses(spec.label_space(), spec.groups, spec.joint.concat())?;
    let table = joint.rate_table(0.0)?;
    Ok(PopulationRates { table, joint })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::default();
        }
        Self {
            count: values.len(),
            mean: values.iter().sum::<f64>() / values.len() as f64,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NotionTrialSummary {
    pub kind: IndefiniteKind,
    /// Cells checked for `lower <= true <= upper` on the same sample.
    pub cells_checked: usize,
    pub containment_violations: usize,
    /// Rates from one sample, oracle from an independent one. Reported only.
    pub cross_sample_cells: usize,
    pub cross_sample_violations: usize,
    /// Trials where the estimate was not the midpoint inside its bounds, or
    /// the error exceeded half the bound width.
    pub midpoint_violations: usize,
    pub error: Stats,
    pub estimate: Stats,
    pub half_width: Stats,
    /// Trials where the comparison was undefined (e.g. no shared label).
    pub undefined_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefiniteTrialSummary {
    pub kind: NotionKind,
    pub value: Stats,
    /// Largest `|table value - oracle value|` over trials.
    pub max_identity_gap: f64,
    pub undefined_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub tool: String,
    pub scenario: String,
    pub rng: String,
    pub base_seed: u64,
    pub seed_rule: String,
    pub trials: usize,
    pub samples_per_group: usize,
    /// Cells where `EO + OMR` lower bounds differ from 1 by more than the
    /// identity tolerance.
    pub complement_violations: usize,
    pub indefinite: Vec<NotionTrialSummary>,
    pub definite: Vec<DefiniteTrialSummary>,
}

impl TrialSummary {
    pub fn containment_violations(&self) -> usize {
        self.indefinite.iter().map(|n| n.containment_violations).sum()
    }

    pub fn midpoint_violations(&self) -> usize {
        self.indefinite.iter().map(|n| n.midpoint_violations).sum()
    }

    pub fn notion(&self, kind: IndefiniteKind) -> Option<&NotionTrialSummary> {
        self.indefinite.iter().find(|n| n.kind == kind)
    }
}

#[derive(Debug, Clone, Default)]
struct TrialOutcome {
    complement_violations: usize,
    containment: [(usize, usize); 3],
    cross: [(usize, usize); 3],
    /// (error, estimate, half width, midpoint ok)
    comparison: [Option<(f64, f64, f64, bool)>; 3],
    /// (table value, identity gap)
    definite: [Option<(f64, f64)>; 2],
}

fn run_trial(spec: &ScenarioSpec) -> Result<TrialOutcome> {
    let (ls, gp) = (spec.label_space(), spec.partition());
    let records = sample_stream(spec, 0)?;
    let table = RateTable::from_records(&records, ls, &gp, 0.0)?;
    let joint = JointTable::from_records(&records, ls, &gp)?;
    let other = JointTable::from_records(&sample_stream(spec, 1)?, ls, &gp)?;

    let mut out = TrialOutcome::default();
    for m in 0..spec.groups {
        for k in 0..spec.labels {
            let eo = crate::indefinite::eo_lower_bound(&table, m, k)?;
            let omr = crate::indefinite::omr_lower_bound(&table, m, k)?;
            if let (Some(a), Some(b)) = (eo, omr) {
                if (a + b - 1.0).abs() > IDENTITY_TOLERANCE {
                    out.complement_violations += 1;
                }
            } else if eo.is_some() != omr.is_some() {
                out.complement_violations += 1;
            }
        }
    }
    for (i, kind) in IndefiniteKind::ALL.into_iter().enumerate() {
        let c = containment(&table, &joint, kind)?;
        out.containment[i] = (c.checked, c.violations);
        let x = containment(&table, &other, kind)?;
        out.cross[i] = (x.checked, x.violations);
        if let Ok(cmp) = aligned_comparison(&table, &joint, kind, UndefinedCells::Drop) {
            let b = &cmp.bounded;
            let ok = b.gf_lower <= b.gf_estimate
                && b.gf_estimate <= b.gf_upper
                && b.gf_estimate == 0.5 * (b.gf_lower + b.gf_upper)
                && cmp.error <= b.half_width() + IDENTITY_TOLERANCE;
            out.comparison[i] = Some((cmp.error, b.gf_estimate, b.half_width(), ok));
        }
    }
    let definite = [
        (accuracy_equality(&table), NotionKind::AccuracyEquality),
        (calibration(&table), NotionKind::Calibration),
    ];
    for (i, (value, kind)) in definite.into_iter().enumerate() {
        if let (Ok(v), Ok(t)) = (value, true_notion(&joint, kind, UndefinedCells::Drop)) {
            out.definite[i] = Some((v.value, (v.value - t.value).abs()));
        }
    }
    Ok(out)
}

/// Runs `trials` seeded populations of `spec` (trial `i` uses seed
/// `spec.seed + i`) and tallies containment, complement, and midpoint
/// checks. Trials run in parallel; the summary does not depend on
/// scheduling.
pub fn containment_trial(spec: &ScenarioSpec, trials: usize) -> Result<TrialSummary> {
    spec.validate()?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(&spec.with_seed(spec.seed.wrapping_add(i as u64))))
        .collect::<Result<Vec<_>>>()?;

    let indefinite = IndefiniteKind::ALL
        .into_iter()
        .enumerate()
        .map(|(i, kind)| {
            let defined: Vec<_> = outcomes.iter().filter_map(|o| o.comparison[i]).collect();
            let pick = |f: fn(&(f64, f64, f64, bool)) -> f64| defined.iter().map(f).collect::<Vec<_>>();
            NotionTrialSummary {
                kind,
                cells_checked: outcomes.iter().map(|o| o.containment[i].0).sum(),
                containment_violations: outcomes.iter().map(|o| o.containment[i].1).sum(),
                cross_sample_cells: outcomes.iter().map(|o| o.cross[i].0).sum(),
                cross_sample_violations: outcomes.iter().map(|o| o.cross[i].1).sum(),
                midpoint_violations: defined.iter().filter(|c| !c.3).count(),
                error: Stats::of(&pick(|c| c.0)),
                estimate: Stats::of(&pick(|c| c.1)),
                half_width: Stats::of(&pick(|c| c.2)),
                undefined_trials: trials - defined.len(),
            }
        })
        .collect();
    let definite = [NotionKind::AccuracyEquality, NotionKind::Calibration]
        .into_iter()
        .enumerate()
        .map(|(i, kind)| {
            let defined: Vec<_> = outcomes.iter().filter_map(|o| o.definite[i]).collect();
            DefiniteTrialSummary {
                kind,
                value: Stats::of(&defined.iter().map(|d| d.0).collect::<Vec<_>>()),
                max_identity_gap: defined.iter().map(|d| d.1).fold(0.0, f64::max),
                undefined_trials: trials - defined.len(),
            }
        })
        .collect();
    Ok(TrialSummary {
        tool: format!("dissent {}", env!("CARGO_PKG_VERSION")),
        scenario: spec.name.clone(),
        rng: RNG_ALGORITHM.into(),
        base_seed: spec.seed,
        seed_rule: "trial i uses seed base_seed + i; cross-sample draw uses ChaCha stream 1".into(),
        trials,
        samples_per_group: spec.samples_per_group,
        complement_violations: outcomes.iter().map(|o| o.complement_violations).sum(),
        indefinite,
        definite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diagonal(k: usize, m: usize) -> ScenarioSpec {
        let mut p = vec![0.0; k * k];
        for i in 0..k {
            p[i * k + i] = 1.0 / k as f64;
        }
        ScenarioSpec {
            name: "diag".into(),
            labels: k,
            groups: m,
            samples_per_group: 200,
            seed: 7,
            joint: vec![p; m],
        }
    }

    #[test]
    fn diagonal_joint_never_disagrees() {
        let recs = sample_population(&diagonal(3, 2)).unwrap();
        assert_eq!(recs.len(), 400);
        assert!(recs.iter().all(|r| !r.disagreement));
    }

    #[test]
    fn off_diagonal_joint_always_disagrees() {
        let k = 3;
        let mut p = vec![1.0 / 6.0; k * k];
        for i in 0..k {
            p[i * k + i] = 0.0;
        }
        let mut spec = diagonal(k, 2);
        spec.joint = vec![p; 2];
        assert!(sample_population(&spec).unwrap().iter().all(|r| r.disagreement));
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let spec = diagonal(4, 3);
        assert_eq!(sample_population(&spec).unwrap(), sample_population(&spec).unwrap());
        let other = sample_population(&spec.with_seed(8)).unwrap();
        assert_ne!(sample_population(&spec).unwrap(), other);
    }

    #[test]
    fn invalid_specs() {
        let mut spec = diagonal(2, 2);
        spec.joint[1][0] += 0.1;
        assert!(matches!(sample_population(&spec), Err(Error::InvalidScenario(_))));
        let mut spec = diagonal(2, 2);
        spec.joint.pop();
        assert!(spec.validate().is_err());
        let mut spec = diagonal(2, 2);
        spec.joint[0] = vec![1.5, -0.5, 0.0, 0.0];
        assert!(spec.validate().is_err());
    }

    #[test]
    fn population_rates_by_hand() {
        let spec = ScenarioSpec {
            name: "hand".into(),
            labels: 2,
            groups: 2,
            samples_per_group: 10,
            seed: 0,
            joint: vec![vec![0.4, 0.1, 0.2, 0.3]; 2],
        };
        let pop = population_rates(&spec).unwrap();
        let close = |a: f64, b: f64| assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        close(pop.table.sp(0, 0).unwrap(), 0.5);
        close(pop.table.sp(0, 1).unwrap(), 0.5);
        close(pop.table.dr(1, 0).unwrap(), 0.2);
        close(pop.table.dr(1, 1).unwrap(), 0.4);
        close(
            pop.joint.cell_rate(NotionKind::EqualOpportunity, 0, 0).unwrap().unwrap(),
            0.4 / 0.6,
        );

        let diag = population_rates(&diagonal(3, 2)).unwrap();
        for k in 0..3 {
            assert_eq!(diag.table.dr(0, k), Some(0.0));
            assert_eq!(
                diag.joint.cell_rate(NotionKind::EqualOpportunity, 1, k).unwrap(),
                Some(1.0)
            );
        }
    }

    #[test]
    fn toml_round_trip() {
        let spec = diagonal(2, 2);
        assert_eq!(ScenarioSpec::from_toml(&spec.to_toml()).unwrap(), spec);
        assert!(ScenarioSpec::from_toml("labels = 2").is_err());
    }

    #[test]
    fn diagonal_campaign() {
        let s = containment_trial(&diagonal(3, 2), 10).unwrap();
        assert_eq!(s.complement_violations, 0);
        for kind in [IndefiniteKind::EqualOpportunity, IndefiniteKind::PredictiveEquality] {
            let n = s.notion(kind).unwrap();
            assert_eq!(n.containment_violations, 0, "{kind}");
            assert_eq!(n.midpoint_violations, 0, "{kind}");
        }
        // A perfect critic has OMR = 0 everywhere while Ω/(φ+Ω) = 1 - SP > 0,
        // so every OMR cell sits below its bound.
        let omr = s.notion(IndefiniteKind::OverallMisclassification).unwrap();
        assert_eq!(omr.containment_violations, omr.cells_checked);
        for d in &s.definite {
            assert_eq!(d.value.max, 0.0);
        }
    }
}
