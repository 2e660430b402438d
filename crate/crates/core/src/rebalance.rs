//! Proportional task rebalancing: given per-node task counts `s_i` summing to
//! `s` and a new total `t`, produce counts `t_i` summing to `t` with `t_i`
//! close to `s_i * t / s`.
//!
//! Three semantics are provided. [`rebalance_float`] is the original binary64
//! routine, reproduced with its flaws. [`rebalance_int`] is the integer
//! revision that never loses a task. [`rebalance_rational`] runs the original
//! control flow over exact rationals and is the reference the integer revision
//! must match element for element.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::rational::{self, Rational};

/// Absolute tolerance of the near-equality test: binary32 `FLT_EPSILON`, 2^-23.
pub const NEARLY_EQUAL_EPSILON: f64 = 1.0 / 8_388_608.0;

/// Largest magnitude accepted by [`rebalance_float`]; every integer up to 2^53
/// is exact in binary64.
pub const FLOAT_EXACT_LIMIT: i64 = 1 << 53;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RebalanceError {
    #[error("precondition violated: length tasks >= 1")]
    Empty,
    #[error("precondition violated: tasks[{index}] >= 0 (got {value})")]
    NegativeTask { index: usize, value: i64 },
    #[error("precondition violated: 0 < total_tasks")]
    ZeroTotal,
    #[error("precondition violated: 0 <= new_total_tasks (got {0})")]
    NegativeNewTotal(i64),
    #[error("total_tasks exceeds the 63-bit input bound")]
    TotalOverflow,
    #[error("{what} = {value} is not exactly representable in binary64 (limit 2^53)")]
    NotRepresentable { what: &'static str, value: i64 },
}

/// Task counts per node. Non-empty, non-negative, with a positive total that
/// fits in 63 bits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskDistribution {
    tasks: Vec<i64>,
    total: i64,
}

impl TaskDistribution {
    pub fn new(tasks: Vec<i64>) -> Result<Self, RebalanceError> {
        if tasks.is_empty() {
            return Err(RebalanceError::Empty);
        }
        let mut total: i64 = 0;
        for (index, &value) in tasks.iter().enumerate() {
            if value < 0 {
                return Err(RebalanceError::NegativeTask { index, value });
            }
            total = total
                .checked_add(value)
                .ok_or(RebalanceError::TotalOverflow)?;
        }
        if total == 0 {
            return Err(RebalanceError::ZeroTotal);
        }
        Ok(Self { tasks, total })
    }

    pub fn tasks(&self) -> &[i64] {
        &self.tasks
    }

    pub fn total(&self) -> i64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// New per-node counts plus the remainder accumulator left at exit. `R` is
/// `f64`, `i64` or [`Rational`] depending on the producing semantics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RebalanceOutput<R> {
    pub new_tasks: Vec<i64>,
    pub final_rest: R,
}

impl<R> RebalanceOutput<R> {
    pub fn sum(&self) -> i128 {
        self.new_tasks.iter().map(|&t| t as i128).sum()
    }

    /// `new_total - sum`: positive when tasks were lost, negative on surplus.
    pub fn lost(&self, new_total: i64) -> i128 {
        new_total as i128 - self.sum()
    }
}

/// One loop iteration of [`rebalance_int_traced`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub index: usize,
    pub floor_size: i64,
    pub rest_after: i64,
}

/// `|a - b| < 2^-23` evaluated in binary64. NaN compares unequal to everything.
pub fn is_nearly_equal(a: f64, b: f64) -> bool {
    (a - b).abs() < NEARLY_EQUAL_EPSILON
}

fn check_new_total(new_total: i64) -> Result<(), RebalanceError> {
    if new_total < 0 {
        Err(RebalanceError::NegativeNewTotal(new_total))
    } else {
        Ok(())
    }
}

/// The original binary64 algorithm, bug for bug: the fractional parts are
/// accumulated in `rest` and a task is added only when `rest` is nearly 1. The
/// sum of the result may differ from `new_total`.
pub fn rebalance_float(
    dist: &TaskDistribution,
    new_total: i64,
) -> Result<RebalanceOutput<f64>, RebalanceError> {
    check_new_total(new_total)?;
    let representable = |what, value: i64| {
        if value <= FLOAT_EXACT_LIMIT {
            Ok(())
        } else {
            Err(RebalanceError::NotRepresentable { what, value })
        }
    };
    for &t in dist.tasks() {
        representable("tasks[i]", t)?;
    }
    representable("total_tasks", dist.total())?;
    representable("new_total_tasks", new_total)?;

    let total = dist.total() as f64;
    let target = new_total as f64;
    let mut rest = 0.0f64;
    let mut new_tasks = Vec::with_capacity(dist.len());
    for &tasks in dist.tasks() {
        let share = tasks as f64 / total;
        let real_size = share * target;
        let floor_size = real_size.floor();
        rest += real_size - floor_size;
        let mut assigned = floor_size as i64;
        if is_nearly_equal(rest, 1.0) {
            assigned += 1;
            rest -= 1.0;
        }
        new_tasks.push(assigned);
    }
    Ok(RebalanceOutput {
        new_tasks,
        final_rest: rest,
    })
}

/// The integer revision. `rest` holds the accumulated remainders scaled by
/// `total_tasks`; the product `new_total * tasks[i]` is formed in 128 bits, so
/// any input accepted by [`TaskDistribution`] is safe.
pub fn rebalance_int(
    dist: &TaskDistribution,
    new_total: i64,
) -> Result<RebalanceOutput<i64>, RebalanceError> {
    rebalance_int_impl(dist, new_total, |_| {})
}

/// [`rebalance_int`] that also records `(i, floor_size, rest)` after every
/// iteration.
pub fn rebalance_int_traced(
    dist: &TaskDistribution,
    new_total: i64,
) -> Result<(RebalanceOutput<i64>, Vec<TraceStep>), RebalanceError> {
    let mut trace = Vec::with_capacity(dist.len());
    let out = rebalance_int_impl(dist, new_total, |step| trace.push(step))?;
    Ok((out, trace))
}

fn rebalance_int_impl(
    dist: &TaskDistribution,
    new_total: i64,
    mut observe: impl FnMut(TraceStep),
) -> Result<RebalanceOutput<i64>, RebalanceError> {
    check_new_total(new_total)?;
    let total = dist.total() as i128;
    let mut rest: i128 = 0;
    let mut new_tasks = Vec::with_capacity(dist.len());
    for (index, &tasks) in dist.tasks().iter().enumerate() {
        let scaled = new_total as i128 * tasks as i128;
        // scaled <= new_total * total, so the quotient fits in i64.
        let mut floor_size = (scaled / total) as i64;
        rest += scaled % total;
        if rest >= total {
            floor_size += 1;
            rest -= total;
        }
        new_tasks.push(floor_size);
        observe(TraceStep {
            index,
            floor_size,
            rest_after: rest as i64,
        });
    }
    Ok(RebalanceOutput {
        new_tasks,
        final_rest: rest as i64,
    })
}

/// The original control flow over exact rationals, with the near-equality test
/// replaced by `rest >= 1`.
pub fn rebalance_rational(
    dist: &TaskDistribution,
    new_total: i64,
) -> Result<RebalanceOutput<Rational>, RebalanceError> {
    check_new_total(new_total)?;
    let total = BigInt::from(dist.total());
    let target = rational::from_int(new_total);
    let one = Rational::one();
    let mut rest = Rational::zero();
    let mut new_tasks = Vec::with_capacity(dist.len());
    for &tasks in dist.tasks() {
        let share = Rational::new(BigInt::from(tasks), total.clone());
        let real_size = share * &target;
        let floor_size = real_size.floor();
        rest += &real_size - &floor_size;
        let mut assigned = floor_size
            .to_integer()
            .to_i64()
            .expect("floor of a share of new_total fits in i64");
        if rest >= one {
            assigned += 1;
            rest -= &one;
        }
        new_tasks.push(assigned);
    }
    Ok(RebalanceOutput {
        new_tasks,
        final_rest: rest,
    })
}

/// `floor(s_i * t / s)` and `ceil(s_i * t / s)` for every node, evaluated over
/// exact rationals.
pub fn exact_bounds(dist: &TaskDistribution, new_total: i64) -> Vec<(i128, i128)> {
    let total = BigInt::from(dist.total());
    let target = BigInt::from(new_total);
    let to_i128 = |r: Rational| r.to_integer().to_i128().expect("bound fits in i128");
    dist.tasks()
        .iter()
        .map(|&s| {
            let exact = Rational::new(BigInt::from(s) * &target, total.clone());
            (to_i128(exact.floor()), to_i128(exact.ceil()))
        })
        .collect()
}
