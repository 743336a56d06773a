//! Independent runs sharded across threads.
//!
//! With the `parallel` feature each job runs on the rayon pool; without it
//! the same calls run in order on the caller's thread. Every engine instance
//! stays on one thread either way, and results come back in job order.

use crate::error::Error;
use crate::harness::{run, RunConfig, RunReport};
use crate::trace::{generate, GenSpec, Trace};

/// One generated trace run under one configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    pub config: RunConfig,
    pub spec: GenSpec,
}

impl Job {
    pub fn new(config: RunConfig, spec: GenSpec) -> Self {
        Self { config, spec }
    }

    pub fn trace(&self) -> Result<Trace, Error> {
        generate(&self.spec)
    }

    pub fn run(&self) -> Result<RunReport, Error> {
        run(self.config, &self.trace()?)
    }
}

/// Applies `f` to every item, in parallel when the feature is on.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Applies `f` to every item in order on the current thread.
pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

pub fn run_jobs(jobs: &[Job]) -> Vec<Result<RunReport, Error>> {
    map(jobs, Job::run)
}

pub fn run_jobs_sequential(jobs: &[Job]) -> Vec<Result<RunReport, Error>> {
    map_sequential(jobs, Job::run)
}

/// Jobs for `seeds` consecutive seeds starting at `spec.seed`.
pub fn seed_sweep(config: RunConfig, spec: &GenSpec, seeds: u64) -> Vec<Job> {
    (0..seeds).map(|k| Job::new(config, GenSpec { seed: spec.seed + k, ..*spec })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Epsilon, Params};
    use crate::harness::Mode;
    use crate::trace::GenKind;

    #[test]
    fn parallel_and_sequential_agree() {
        let params = Params::new(10, 8, 2, 1, Epsilon::new(1, 1).unwrap()).unwrap().with_alpha_max(2);
        let spec = GenSpec::new(GenKind::Random, 10, 80, 3, 2).with_queries(0.2);
        let jobs = seed_sweep(RunConfig::new(Mode::ColourForest, params), &spec, 6);
        let hashes = |rs: Vec<Result<RunReport, Error>>| -> Vec<_> {
            rs.into_iter().map(|r| {
                let r = r.unwrap();
                (r.state_hash, r.answers)
            }).collect()
        };
        assert_eq!(hashes(run_jobs(&jobs)), hashes(run_jobs_sequential(&jobs)));
    }
}
