//! Directed search for inputs on which the floating-point orientation
//! predicates disagree with the exact one, and an SMT-LIB2 encoding of the same
//! question for external solvers.

mod generate;
mod model;
pub mod sexp;
mod smt;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::batch::{iteration_rng, run_batched};
use crate::geometry::{
    orient_base_width, orient_exact, Base, FloatWidth, MajorityVote, OrientationSign, Point3,
};
use crate::{GENERATOR_NAME, SCHEMA_VERSION};

pub use generate::{gen_near_coplanar, NearCoplanar};
pub use model::{parse_model, replay_model, ModelError};
pub use smt::{emit_smt, smt_script, CoordinateName, FixedCoordinate, SmtOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    /// Some base evaluation disagrees with the exact sign.
    SingleBase,
    /// The majority vote disagrees with the exact sign.
    Majority,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("exponent band is empty: e_min {e_min} > e_max {e_max}")]
    EmptyBand { e_min: i32, e_max: i32 },
    #[error("exponent {0} outside the supported range -{1}..={1} for this width")]
    ExponentRange(i32, i32),
    #[error("ulp radius must be in 1..={MAX_ULP_RADIUS} (got {0})")]
    UlpRadius(u32),
    #[error("iterations must be >= 1")]
    Iterations,
    #[error("time budget must be a non-negative number of seconds")]
    TimeBudget,
    #[error("no near-coplanar sample found in {0} attempts")]
    NoSample(u32),
    #[error("fixed coordinate {name} = {value} is not exactly representable at this width")]
    FixedValue { name: String, value: f64 },
}

pub const MAX_ULP_RADIUS: u32 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientSearchConfig {
    pub float_width: FloatWidth,
    /// Coordinates of the spanning points have magnitude in `[2^e_min, 2^(e_max+1))`.
    pub e_min: i32,
    pub e_max: i32,
    /// The fourth point is moved off the plane by at most this many ulps.
    pub ulp_radius: u32,
    pub iterations: u64,
    pub time_budget: Option<f64>,
    pub seed: u64,
    pub mode: SearchMode,
    /// Recorded counterexamples are capped; statistics always cover every sample.
    pub max_fixtures: usize,
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for OrientSearchConfig {
    fn default() -> Self {
        Self {
            float_width: FloatWidth::Binary64,
            e_min: 0,
            e_max: 2,
            ulp_radius: 4,
            iterations: 1_000_000,
            time_budget: Some(300.0),
            seed: 0,
            mode: SearchMode::SingleBase,
            max_fixtures: 100,
            jobs: 1,
        }
    }
}

impl OrientSearchConfig {
    /// Largest `|e|` accepted for coordinates; keeps every product of three
    /// differences finite and normal.
    pub fn exponent_limit(width: FloatWidth) -> i32 {
        match width {
            FloatWidth::Binary32 => 30,
            FloatWidth::Binary64 => 250,
        }
    }

    /// Whether `v` is zero or has magnitude in `[2^e_min, 2^(e_max+1))`, the
    /// same constraint the SMT query places on every coordinate.
    pub fn in_band(&self, v: f64) -> bool {
        let a = v.abs();
        a == 0.0 || (2f64.powi(self.e_min) <= a && a < 2f64.powi(self.e_max + 1))
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        if self.e_min > self.e_max {
            return Err(SearchError::EmptyBand {
                e_min: self.e_min,
                e_max: self.e_max,
            });
        }
        let limit = Self::exponent_limit(self.float_width);
        for e in [self.e_min, self.e_max] {
            if e.abs() > limit {
                return Err(SearchError::ExponentRange(e, limit));
            }
        }
        if !(1..=MAX_ULP_RADIUS).contains(&self.ulp_radius) {
            return Err(SearchError::UlpRadius(self.ulp_radius));
        }
        if self.iterations == 0 {
            return Err(SearchError::Iterations);
        }
        if let Some(t) = self.time_budget {
            if !(t.is_finite() && t >= 0.0) {
                return Err(SearchError::TimeBudget);
            }
        }
        Ok(())
    }
}

/// A quadruple on which a floating-point evaluation gets the sign wrong.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientCounterexample {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iteration: Option<u64>,
    pub a: Point3,
    pub b: Point3,
    pub c: Point3,
    pub d: Point3,
    pub per_base: [OrientationSign; 3],
    pub majority: OrientationSign,
    pub tie: bool,
    pub exact: OrientationSign,
    pub float_width: FloatWidth,
}

impl OrientCounterexample {
    /// Evaluates all predicates on the four points.
    pub fn evaluate(points: [Point3; 4], width: FloatWidth) -> Self {
        let [a, b, c, d] = points;
        let vote = MajorityVote::from_signs(
            Base::ALL.map(|base| orient_base_width(&a, &b, &c, &d, base, width)),
        );
        Self {
            iteration: None,
            a,
            b,
            c,
            d,
            per_base: vote.per_base,
            majority: vote.sign,
            tie: vote.tie,
            exact: orient_exact(&a, &b, &c, &d),
            float_width: width,
        }
    }

    pub fn base_errors(&self) -> usize {
        self.per_base.iter().filter(|&&s| s != self.exact).count()
    }

    pub fn is_disagreement(&self, mode: SearchMode) -> bool {
        match mode {
            SearchMode::SingleBase => self.base_errors() > 0,
            SearchMode::Majority => self.majority != self.exact,
        }
    }

    /// Recomputes every recorded sign from the stored coordinates.
    pub fn replays(&self) -> bool {
        let fresh = Self::evaluate([self.a, self.b, self.c, self.d], self.float_width);
        fresh.per_base == self.per_base
            && fresh.majority == self.majority
            && fresh.tie == self.tie
            && fresh.exact == self.exact
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    pub samples: u64,
    pub generation_failures: u64,
    pub exact_above: u64,
    pub exact_below: u64,
    pub per_base_errors: [u64; 3],
    pub per_base_error_rate: [f64; 3],
    pub one_or_more_base_errors: u64,
    pub two_or_more_base_errors: u64,
    pub majority_errors: u64,
    pub ties: u64,
}

impl SearchStats {
    /// `majority errors <= >=2 base errors <= >=1 base error`. A wrong majority
    /// needs two wrong bases: two equal wrong signs, or a tie where two of the
    /// three signs differ from the (never coplanar) exact sign.
    pub fn is_monotone(&self) -> bool {
        self.majority_errors <= self.two_or_more_base_errors
            && self.two_or_more_base_errors <= self.one_or_more_base_errors
    }

    fn record(&mut self, cx: &OrientCounterexample) {
        self.samples += 1;
        match cx.exact {
            OrientationSign::Above => self.exact_above += 1,
            OrientationSign::Below => self.exact_below += 1,
            OrientationSign::Coplanar => {}
        }
        for (count, sign) in self.per_base_errors.iter_mut().zip(cx.per_base) {
            *count += (sign != cx.exact) as u64;
        }
        let errors = cx.base_errors();
        self.one_or_more_base_errors += (errors >= 1) as u64;
        self.two_or_more_base_errors += (errors >= 2) as u64;
        self.majority_errors += (cx.majority != cx.exact) as u64;
        self.ties += cx.tie as u64;
    }

    fn finish(&mut self) {
        if self.samples > 0 {
            self.per_base_error_rate = self.per_base_errors.map(|e| e as f64 / self.samples as f64);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub schema_version: u32,
    pub generator: String,
    pub config: OrientSearchConfig,
    pub iterations_completed: u64,
    pub budget_exhausted: bool,
    pub stats: SearchStats,
    pub counterexamples: Vec<OrientCounterexample>,
}

/// Samples near-coplanar quadruples and records those on which the configured
/// floating-point evaluation disagrees with the exact sign.
pub fn search_disagreement(config: &OrientSearchConfig) -> Result<SearchReport, SearchError> {
    config.validate()?;
    let mut report = SearchReport {
        schema_version: SCHEMA_VERSION,
        generator: GENERATOR_NAME.to_string(),
        config: config.clone(),
        iterations_completed: 0,
        budget_exhausted: false,
        stats: SearchStats::default(),
        counterexamples: Vec::new(),
    };
    let eval = |i: u64| {
        let mut rng = iteration_rng(config.seed, i);
        gen_near_coplanar(config, &mut rng).ok().map(|s| {
            let mut cx = OrientCounterexample::evaluate([s.a, s.b, s.c, s.d], config.float_width);
            debug_assert_eq!(cx.exact, s.exact_sign);
            cx.iteration = Some(i);
            cx
        })
    };
    let budget = config.time_budget.map(Duration::from_secs_f64);
    let summary = run_batched(config.iterations, budget, config.jobs, eval, |_, sample| {
        let Some(cx) = sample else {
            report.stats.generation_failures += 1;
            return;
        };
        report.stats.record(&cx);
        if cx.is_disagreement(config.mode) && report.counterexamples.len() < config.max_fixtures {
            report.counterexamples.push(cx);
        }
    });
    report.stats.finish();
    report.iterations_completed = summary.completed;
    report.budget_exhausted = summary.budget_exhausted;
    Ok(report)
}
