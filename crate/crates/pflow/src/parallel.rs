//! Level-parallel execution of a study. Levels are independent
//! trajectories; results are collected in level order, so the output does
//! not depend on the worker count.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use pflow_core::harness::{run_level, HarnessError, LevelResult, StudyConfig};

/// Environment variable capping the number of worker threads.
pub const THREADS_VAR: &str = "PFLOW_THREADS";

/// `PFLOW_THREADS` if set to a positive integer, else the available
/// parallelism.
pub fn worker_count() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

type Slot = Mutex<Option<Result<LevelResult, HarnessError>>>;

/// Runs every planned level on up to `workers` threads. On failure the
/// error of the lowest failing level is returned.
pub fn run_levels(cfg: &StudyConfig, workers: usize) -> Result<Vec<LevelResult>, HarnessError> {
    let plans = cfg.plan()?;
    let slots: Vec<Slot> = plans.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    // largest levels first, so the slowest trajectory starts immediately
    let order: Vec<usize> = (0..plans.len()).rev().collect();
    thread::scope(|s| {
        for _ in 0..workers.clamp(1, plans.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&idx) = order.get(i) else { break };
                let result = run_level(cfg, &plans[idx]);
                *slots[idx].lock().expect("no panics while holding the lock") = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|m| m.into_inner().expect("workers joined").expect("every level ran"))
        .collect()
}
