//! Seeded random search over inputs of the form `2^e + delta`, the region where
//! the binary64 rebalancer loses tasks, and differential checking of the
//! integer rebalancer against the exact reference on the same corpus.

use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::batch::{iteration_rng, run_batched};
use crate::hexfloat;
use crate::rebalance::{
    exact_bounds, rebalance_float, rebalance_int_traced, rebalance_rational, RebalanceError,
    TaskDistribution, FLOAT_EXACT_LIMIT,
};
use crate::{GENERATOR_NAME, SCHEMA_VERSION};

/// Upper limit on `exponent_max`, keeping `2^e + delta` inside 63 bits.
pub const MAX_EXPONENT: u32 = 61;
/// Upper limit on `delta_bound`.
pub const MAX_DELTA: i64 = 1 << 40;
/// Redraws allowed for one iteration before it is counted as skipped.
const MAX_TUPLE_ATTEMPTS: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FuzzConfigError {
    #[error("exponent_max must be in 0..={MAX_EXPONENT} (got {0})")]
    ExponentMax(u32),
    #[error("delta_bound must be in 0..={MAX_DELTA} (got {0})")]
    DeltaBound(i64),
    #[error("node_count must be >= 1")]
    NodeCount,
    #[error("iterations must be >= 1")]
    Iterations,
    #[error("time budget must be a non-negative number of seconds")]
    TimeBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub exponent_max: u32,
    pub delta_bound: i64,
    pub node_count: usize,
    pub iterations: u64,
    /// Wall-clock budget in seconds; `None` means iterations alone bound the run.
    pub time_budget: Option<f64>,
    pub seed: u64,
    /// Worker threads. Does not affect results.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            exponent_max: 40,
            delta_bound: 100,
            node_count: 2,
            iterations: 1_000_000,
            time_budget: Some(60.0),
            seed: 0,
            jobs: 1,
        }
    }
}

impl FuzzConfig {
    pub fn validate(&self) -> Result<(), FuzzConfigError> {
        if self.exponent_max > MAX_EXPONENT {
            return Err(FuzzConfigError::ExponentMax(self.exponent_max));
        }
        if !(0..=MAX_DELTA).contains(&self.delta_bound) {
            return Err(FuzzConfigError::DeltaBound(self.delta_bound));
        }
        if self.node_count == 0 {
            return Err(FuzzConfigError::NodeCount);
        }
        if self.iterations == 0 {
            return Err(FuzzConfigError::Iterations);
        }
        if let Some(t) = self.time_budget {
            if !(t.is_finite() && t >= 0.0) {
                return Err(FuzzConfigError::TimeBudget);
            }
        }
        Ok(())
    }

    fn budget(&self) -> Option<Duration> {
        self.time_budget.map(Duration::from_secs_f64)
    }
}

/// `2^exponent + delta`, or `None` outside the signed 64-bit range.
pub fn lattice_value(exponent: u32, delta: i64) -> Option<i64> {
    let v = (1i128 << exponent.min(126)) + delta as i128;
    i64::try_from(v).ok()
}

/// Draws `2^e + delta` with `e` uniform in `[0, exponent_max]` and `delta`
/// uniform in `[-delta_bound, delta_bound]`, redrawing non-positive results.
/// Returns the value and the number of redraws.
pub fn sample_value<R: Rng + ?Sized>(config: &FuzzConfig, rng: &mut R) -> (i64, u32) {
    let mut redraws = 0;
    loop {
        let e = rng.gen_range(0..=config.exponent_max);
        let delta = rng.gen_range(-config.delta_bound..=config.delta_bound);
        match lattice_value(e, delta) {
            Some(v) if v > 0 => return (v, redraws),
            _ => redraws += 1,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct DrawStats {
    nonpositive_redraws: u64,
    invalid_tuples: u64,
}

/// Draws `node_count` task counts and a new total from the lattice. Tuples
/// rejected by `accept` are redrawn whole.
fn draw_tuple<R: Rng>(
    config: &FuzzConfig,
    rng: &mut R,
    accept: impl Fn(&TaskDistribution, i64) -> bool,
    stats: &mut DrawStats,
) -> Option<(TaskDistribution, i64)> {
    for _ in 0..MAX_TUPLE_ATTEMPTS {
        let mut tasks = Vec::with_capacity(config.node_count);
        for _ in 0..config.node_count {
            let (v, redraws) = sample_value(config, rng);
            stats.nonpositive_redraws += redraws as u64;
            tasks.push(v);
        }
        let (new_total, redraws) = sample_value(config, rng);
        stats.nonpositive_redraws += redraws as u64;
        match TaskDistribution::new(tasks) {
            Ok(dist) if accept(&dist, new_total) => return Some((dist, new_total)),
            _ => stats.invalid_tuples += 1,
        }
    }
    None
}

fn float_exact(dist: &TaskDistribution, new_total: i64) -> bool {
    dist.total() <= FLOAT_EXACT_LIMIT && new_total <= FLOAT_EXACT_LIMIT
}

/// An input on which [`rebalance_float`] does not hand out exactly `new_total`
/// tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RebalanceCounterexample {
    pub tasks: Vec<i64>,
    pub new_total: i64,
    pub final_rest: f64,
    /// `new_total - sum(new_tasks)`; negative for a surplus.
    pub lost: i64,
}

impl RebalanceCounterexample {
    /// Re-runs the float rebalancer and checks `final_rest` bit for bit.
    pub fn replays(&self) -> bool {
        let Ok(dist) = TaskDistribution::new(self.tasks.clone()) else {
            return false;
        };
        match rebalance_float(&dist, self.new_total) {
            Ok(out) => {
                out.final_rest.to_bits() == self.final_rest.to_bits()
                    && out.lost(self.new_total) == self.lost as i128
            }
            Err(_) => false,
        }
    }

    pub fn is_surplus(&self) -> bool {
        self.lost < 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub schema_version: u32,
    pub generator: String,
    pub config: FuzzConfig,
    pub iterations_completed: u64,
    pub budget_exhausted: bool,
    /// Draws of `2^e + delta` that were not positive.
    pub nonpositive_redraws: u64,
    /// Whole tuples redrawn because they were not valid float inputs.
    pub invalid_tuples: u64,
    pub skipped_iterations: u64,
    pub shortfall_count: u64,
    pub surplus_count: u64,
    pub counterexamples: Vec<RebalanceCounterexample>,
}

pub const CSV_HEADER: [&str; 5] = [
    "s_values",
    "new_total",
    "final_rest_hex",
    "final_rest_dec",
    "lost",
];

impl FuzzReport {
    /// `;`-separated rows, one per counterexample, under [`CSV_HEADER`].
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .delimiter(b';')
            .from_writer(Vec::new());
        w.write_record(CSV_HEADER).expect("write to memory");
        for cx in &self.counterexamples {
            let s_values = cx
                .tasks
                .iter()
                .map(i64::to_string)
                .collect::<Vec<_>>()
                .join(",");
            w.write_record([
                s_values,
                cx.new_total.to_string(),
                hexfloat::format_f64(cx.final_rest),
                cx.final_rest.to_string(),
                cx.lost.to_string(),
            ])
            .expect("write to memory");
        }
        String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii output")
    }
}

/// Runs the binary64 rebalancer on lattice inputs and records every input whose
/// output does not sum to the new total.
pub fn find_float_counterexamples(config: &FuzzConfig) -> Result<FuzzReport, FuzzConfigError> {
    config.validate()?;
    let mut report = FuzzReport {
        schema_version: SCHEMA_VERSION,
        generator: GENERATOR_NAME.to_string(),
        config: config.clone(),
        iterations_completed: 0,
        budget_exhausted: false,
        nonpositive_redraws: 0,
        invalid_tuples: 0,
        skipped_iterations: 0,
        shortfall_count: 0,
        surplus_count: 0,
        counterexamples: Vec::new(),
    };
    let eval = |i: u64| {
        let mut rng = iteration_rng(config.seed, i);
        let mut stats = DrawStats::default();
        let found = draw_tuple(config, &mut rng, float_exact, &mut stats).map(|(dist, t)| {
            let out = rebalance_float(&dist, t).expect("tuple accepted as float input");
            let lost = out.lost(t);
            (lost != 0).then(|| RebalanceCounterexample {
                tasks: dist.tasks().to_vec(),
                new_total: t,
                final_rest: out.final_rest,
                lost: lost as i64,
            })
        });
        (found, stats)
    };
    let summary = run_batched(
        config.iterations,
        config.budget(),
        config.jobs,
        eval,
        |_, (found, stats)| {
            report.nonpositive_redraws += stats.nonpositive_redraws;
            report.invalid_tuples += stats.invalid_tuples;
            match found {
                None => report.skipped_iterations += 1,
                Some(None) => {}
                Some(Some(cx)) => {
                    if cx.is_surplus() {
                        report.surplus_count += 1;
                    } else {
                        report.shortfall_count += 1;
                    }
                    report.counterexamples.push(cx);
                }
            }
        },
    );
    report.iterations_completed = summary.completed;
    report.budget_exhausted = summary.budget_exhausted;
    Ok(report)
}

/// Outcome of checking the integer rebalancer on one input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropertyCheck {
    /// The result sums to the new total.
    pub exact_sum: bool,
    /// Every entry lies between the exact floor and ceiling of its share.
    pub within_bounds: bool,
    /// Equal element for element to the exact rational reference.
    pub matches_rational: bool,
    /// `0 <= rest < total` after every iteration and `rest = 0` at exit.
    pub rest_invariant: bool,
}

impl PropertyCheck {
    pub fn all_hold(&self) -> bool {
        self.exact_sum && self.within_bounds && self.matches_rational && self.rest_invariant
    }
}

pub fn check_properties(
    dist: &TaskDistribution,
    new_total: i64,
) -> Result<PropertyCheck, RebalanceError> {
    let (out, trace) = rebalance_int_traced(dist, new_total)?;
    let reference = rebalance_rational(dist, new_total)?;
    let bounds = exact_bounds(dist, new_total);
    let total = dist.total();
    Ok(PropertyCheck {
        exact_sum: out.sum() == new_total as i128,
        within_bounds: out
            .new_tasks
            .iter()
            .zip(&bounds)
            .all(|(&t, &(lo, hi))| lo <= t as i128 && t as i128 <= hi),
        matches_rational: out.new_tasks == reference.new_tasks,
        rest_invariant: trace
            .iter()
            .all(|s| 0 <= s.rest_after && s.rest_after < total)
            && out.final_rest == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyViolation {
    pub tasks: Vec<i64>,
    pub new_total: i64,
    pub check: PropertyCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferentialReport {
    pub schema_version: u32,
    pub generator: String,
    pub config: FuzzConfig,
    pub iterations_completed: u64,
    pub budget_exhausted: bool,
    pub checked: u64,
    pub invalid_tuples: u64,
    pub skipped_iterations: u64,
    pub sum_violations: u64,
    pub bound_violations: u64,
    pub equivalence_violations: u64,
    pub rest_violations: u64,
    pub violations: Vec<PropertyViolation>,
}

impl DifferentialReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks sum, bounds, rational equivalence and the rest invariant of the
/// integer rebalancer on lattice inputs. Violations are reported, not raised.
pub fn differential_fuzz(config: &FuzzConfig) -> Result<DifferentialReport, FuzzConfigError> {
    config.validate()?;
    let mut report = DifferentialReport {
        schema_version: SCHEMA_VERSION,
        generator: GENERATOR_NAME.to_string(),
        config: config.clone(),
        iterations_completed: 0,
        budget_exhausted: false,
        checked: 0,
        invalid_tuples: 0,
        skipped_iterations: 0,
        sum_violations: 0,
        bound_violations: 0,
        equivalence_violations: 0,
        rest_violations: 0,
        violations: Vec::new(),
    };
    let eval = |i: u64| {
        let mut rng = iteration_rng(config.seed, i);
        let mut stats = DrawStats::default();
        let checked = draw_tuple(config, &mut rng, |_, _| true, &mut stats).map(|(dist, t)| {
            let check =
                check_properties(&dist, t).expect("lattice tuples satisfy the preconditions");
            (dist, t, check)
        });
        (checked, stats)
    };
    let summary = run_batched(
        config.iterations,
        config.budget(),
        config.jobs,
        eval,
        |_, (checked, stats)| {
            report.invalid_tuples += stats.invalid_tuples;
            let Some((dist, new_total, check)) = checked else {
                report.skipped_iterations += 1;
                return;
            };
            report.checked += 1;
            report.sum_violations += !check.exact_sum as u64;
            report.bound_violations += !check.within_bounds as u64;
            report.equivalence_violations += !check.matches_rational as u64;
            report.rest_violations += !check.rest_invariant as u64;
            if !check.all_hold() {
                report.violations.push(PropertyViolation {
                    tasks: dist.tasks().to_vec(),
                    new_total,
                    check,
                });
            }
        },
    );
    report.iterations_completed = summary.completed;
    report.budget_exhausted = summary.budget_exhausted;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick(iterations: u64) -> FuzzConfig {
        FuzzConfig {
            iterations,
            time_budget: None,
            ..FuzzConfig::default()
        }
    }

    #[test]
    fn lattice_examples() {
        assert_eq!(lattice_value(0, 0), Some(1));
        assert_eq!(lattice_value(20, 51), Some(1048627));
        assert_eq!(lattice_value(40, 96), Some(1099511627872));
        assert_eq!(lattice_value(3, -100), Some(-92));
        assert_eq!(lattice_value(63, 0), None);
    }

    #[test]
    fn sample_value_stays_on_positive_lattice() {
        let config = FuzzConfig {
            exponent_max: 3,
            delta_bound: 20,
            ..FuzzConfig::default()
        };
        let mut rng = iteration_rng(1, 0);
        for _ in 0..2000 {
            let (v, _) = sample_value(&config, &mut rng);
            assert!(v > 0);
            assert!((0..=3).any(|e| ((1i64 << e) - v).abs() <= 20));
        }
    }

    #[test]
    fn config_validation() {
        assert!(FuzzConfig::default().validate().is_ok());
        let bad = |f: fn(&mut FuzzConfig)| {
            let mut c = FuzzConfig::default();
            f(&mut c);
            c.validate().unwrap_err()
        };
        assert_eq!(
            bad(|c| c.exponent_max = 62),
            FuzzConfigError::ExponentMax(62)
        );
        assert_eq!(bad(|c| c.delta_bound = -1), FuzzConfigError::DeltaBound(-1));
        assert_eq!(bad(|c| c.node_count = 0), FuzzConfigError::NodeCount);
        assert_eq!(bad(|c| c.iterations = 0), FuzzConfigError::Iterations);
        assert_eq!(
            bad(|c| c.time_budget = Some(-1.0)),
            FuzzConfigError::TimeBudget
        );
    }

    #[test]
    fn default_lattice_finds_counterexamples_that_replay() {
        let report = find_float_counterexamples(&quick(100_000)).unwrap();
        assert!(!report.counterexamples.is_empty());
        assert!(report
            .counterexamples
            .iter()
            .all(RebalanceCounterexample::replays));
        assert_eq!(
            report.shortfall_count + report.surplus_count,
            report.counterexamples.len() as u64
        );
    }

    #[test]
    fn degenerate_lattice_is_exact() {
        let config = FuzzConfig {
            exponent_max: 0,
            delta_bound: 0,
            ..quick(5000)
        };
        let report = find_float_counterexamples(&config).unwrap();
        assert!(report.counterexamples.is_empty());
        assert_eq!(report.iterations_completed, 5000);
    }

    #[test]
    fn reruns_are_identical_and_jobs_do_not_matter() {
        let a = find_float_counterexamples(&quick(20_000)).unwrap();
        let b = find_float_counterexamples(&FuzzConfig {
            jobs: 4,
            ..quick(20_000)
        })
        .unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn csv_layout() {
        let report = FuzzReport {
            counterexamples: vec![RebalanceCounterexample {
                tasks: vec![1048627, 524206],
                new_total: 1099511627744,
                final_rest: 0.9998779296875,
                lost: 1,
            }],
            ..find_float_counterexamples(&FuzzConfig {
                exponent_max: 0,
                delta_bound: 0,
                ..quick(1)
            })
            .unwrap()
        };
        assert_eq!(
            report.to_csv(),
            "s_values;new_total;final_rest_hex;final_rest_dec;lost\n\
             1048627,524206;1099511627744;0x1.fffp-1;0.9998779296875;1\n"
        );
    }

    #[test]
    fn unrepresentable_tuples_are_redrawn() {
        let config = FuzzConfig {
            exponent_max: 61,
            ..quick(2000)
        };
        let report = find_float_counterexamples(&config).unwrap();
        assert!(report.invalid_tuples > 0);
        assert!(report
            .counterexamples
            .iter()
            .all(RebalanceCounterexample::replays));
    }

    #[test]
    fn single_input_properties() {
        let check = check_properties(&TaskDistribution::new(vec![1, 1, 1]).unwrap(), 4).unwrap();
        assert!(check.all_hold());
        let check = check_properties(&TaskDistribution::new(vec![0, 5]).unwrap(), 3).unwrap();
        assert!(check.all_hold());
    }

    #[test]
    fn differential_run_is_clean() {
        let report = differential_fuzz(&FuzzConfig {
            node_count: 4,
            ..quick(20_000)
        })
        .unwrap();
        assert!(report.is_clean(), "{:?}", report.violations.first());
        assert_eq!(report.checked, 20_000);
    }
}
