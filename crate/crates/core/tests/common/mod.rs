//! Shared fixtures and independent oracles for the integration suites.
//!
//! The oracles here recompute expected values from first principles
//! (exhaustive enumeration) and must stay independent of the solver code
//! paths they check.
#![allow(dead_code)] // each test target uses a different subset

use std::collections::BTreeSet;

use num_traits::Zero;
use precsched::rational::rat;
use precsched::{Instance, Job, Rat};

pub fn job(p: i64, w: i64) -> Job {
    Job {
        processing_time: rat(p),
        weight: rat(w),
    }
}

/// Four jobs, w = (1,2,1,1), p = (6,4,3,5), one precedence 0 -> 1, one
/// machine.
pub fn four_job_chain() -> Instance {
    Instance::new(
        1,
        vec![job(6, 1), job(4, 2), job(3, 1), job(5, 1)],
        vec![(0, 1)],
    )
    .unwrap()
}

/// Six jobs on three machines, p = (9,9,12,12,9,3), w = (1,1,1,6,5,1),
/// precedences {(0,4),(1,4),(1,5),(2,5),(3,5)}.
pub fn six_job_instance() -> Instance {
    Instance::new(
        3,
        vec![
            job(9, 1),
            job(9, 1),
            job(12, 1),
            job(12, 6),
            job(9, 5),
            job(3, 1),
        ],
        vec![(0, 4), (1, 4), (1, 5), (2, 5), (3, 5)],
    )
    .unwrap()
}

pub fn all_jobs(inst: &Instance) -> BTreeSet<usize> {
    (0..inst.job_count()).collect()
}

/// Independent largest-breakpoint oracle: enumerate every successor-closed
/// subset J of the unfinished set; its cut costs |F \ J| + λ·w(J), so the
/// minimum cut reaches m exactly at λ* = max over J with w(J) > 0 of
/// (m − |F \ J|) / w(J). Returns `None` when some zero-weight closed subset
/// keeps the minimum cut below m forever.
pub fn enumeration_breakpoint_lambda(
    inst: &Instance,
    unfinished: &BTreeSet<usize>,
    machines: usize,
) -> Option<Rat> {
    let jobs: Vec<usize> = unfinished.iter().copied().collect();
    let k = jobs.len();
    assert!(k <= 20, "enumeration oracle is exponential in |U|");
    let available = inst.available_set(unfinished);
    let edges: Vec<(usize, usize)> = inst
        .edges()
        .iter()
        .copied()
        .filter(|(a, b)| unfinished.contains(a) && unfinished.contains(b))
        .collect();
    let index_of = |j: usize| jobs.iter().position(|&x| x == j).unwrap();

    let m = rat(machines as i64);
    let mut best: Option<Rat> = None;
    for mask in 0u32..(1u32 << k) {
        let contains = |j: usize| mask & (1 << index_of(j)) != 0;
        if edges.iter().any(|&(a, b)| contains(a) && !contains(b)) {
            continue; // not successor-closed
        }
        let crossing_hubs = available.iter().filter(|&&j| !contains(j)).count();
        let weight: Rat = jobs
            .iter()
            .filter(|&&j| contains(j))
            .map(|&j| inst.weight(j).clone())
            .sum();
        let intercept = rat(crossing_hubs as i64);
        if weight.is_zero() {
            if intercept < m {
                return None; // constant cut below m: no finite breakpoint
            }
            continue;
        }
        let candidate = (m.clone() - intercept) / weight;
        if best.as_ref().is_none_or(|b| candidate > *b) {
            best = Some(candidate);
        }
    }
    best
}

/// Objective of scheduling `order` back to back on one machine.
pub fn sequential_objective(inst: &Instance, order: &[usize]) -> Rat {
    let mut now = Rat::zero();
    let mut obj = Rat::zero();
    for &j in order {
        now += inst.processing_time(j);
        obj += inst.weight(j) * &now;
    }
    obj
}
