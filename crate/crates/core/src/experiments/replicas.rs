//! Replica execution: data-parallel with rayon under the `parallel` feature,
//! plain sequential otherwise. Results are collected in replica order and
//! folded sequentially, so aggregates do not depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Runs `count` independent replicas of `job(replica_index)` and returns the
/// results in replica order.
pub fn run_replicas<T, F>(count: usize, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..count as u64).into_par_iter().map(job).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..count as u64).map(job).collect()
    }
}

/// The sequential reference used by the benchmark suite regardless of
/// features.
pub fn run_replicas_sequential<T, F>(count: usize, job: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..count as u64).map(job).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree_elementwise() {
        let job = |r: u64| {
            let mut acc = 0.0_f64;
            for k in 0..100 {
                acc += ((r * 31 + k) as f64).sin();
            }
            acc
        };
        let a = run_replicas(64, job);
        let b = run_replicas_sequential(64, job);
        assert_eq!(a, b);
    }
}
