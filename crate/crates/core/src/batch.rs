//! Deterministic batched iteration shared by the seeded searches.
//!
//! Iterations are evaluated in fixed-size batches, possibly on several worker
//! threads, and handed to a sequential sink in iteration order. The time budget
//! is only checked between batches, so a run always covers a whole-batch prefix
//! of the iteration space.

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const BATCH_SIZE: u64 = 4096;

/// Generator for one iteration; independent of worker count and scheduling.
pub(crate) fn iteration_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BatchSummary {
    pub completed: u64,
    pub budget_exhausted: bool,
}

pub(crate) fn run_batched<T, F, S>(
    iterations: u64,
    time_budget: Option<Duration>,
    jobs: usize,
    eval: F,
    mut sink: S,
) -> BatchSummary
where
    T: Send,
    F: Fn(u64) -> T + Sync,
    S: FnMut(u64, T),
{
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .ok();

    let mut next = 0u64;
    while next < iterations {
        if let Some(budget) = time_budget {
            if next > 0 && start.elapsed() >= budget {
                return BatchSummary {
                    completed: next,
                    budget_exhausted: true,
                };
            }
        }
        let end = (next + BATCH_SIZE).min(iterations);
        let results: Vec<T> = match (&pool, jobs) {
            (Some(pool), j) if j > 1 => {
                pool.install(|| (next..end).into_par_iter().map(&eval).collect())
            }
            _ => (next..end).map(&eval).collect(),
        };
        for (offset, item) in results.into_iter().enumerate() {
            sink(next + offset as u64, item);
        }
        next = end;
    }
    BatchSummary {
        completed: next,
        budget_exhausted: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn worker_count_does_not_change_results() {
        let draw = |i: u64| iteration_rng(7, i).gen::<u64>();
        let mut single = Vec::new();
        run_batched(10_000, None, 1, draw, |_, v| single.push(v));
        let mut multi = Vec::new();
        run_batched(10_000, None, 4, draw, |_, v| multi.push(v));
        assert_eq!(single, multi);
    }

    #[test]
    fn sink_sees_iterations_in_order() {
        let mut seen = Vec::new();
        let summary = run_batched(
            9000,
            None,
            3,
            |i| i,
            |i, v| {
                assert_eq!(i, v);
                seen.push(i);
            },
        );
        assert_eq!(summary.completed, 9000);
        assert!(seen.windows(2).all(|w| w[0] + 1 == w[1]));
    }

    #[test]
    fn zero_budget_stops_after_first_batch() {
        let summary = run_batched(100_000, Some(Duration::ZERO), 1, |i| i, |_, _| {});
        assert!(summary.budget_exhausted);
        assert_eq!(summary.completed, BATCH_SIZE);
    }
}
