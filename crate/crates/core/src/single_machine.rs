//! Weighted round-robin scheduling on a single machine.
//!
//! Each available job collects the weight of the unfinished jobs assigned to
//! it by a depth-first-search forest and is processed at a rate proportional
//! to that collected weight. Simulating this rule with known processing
//! times yields a virtual schedule; list scheduling in virtual completion
//! order gives a non-preemptive schedule whose total weighted completion
//! time is at most twice the optimum.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::Rat;
use crate::schedule::{simulate_virtual, MachineSchedule, RateVector, Segment, VirtualSchedule};

/// Partition of the unfinished jobs among the available jobs: tree `T(i)`
/// collects `i` and those of its not-yet-assigned successors, iterating over
/// the available jobs in ascending index order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DfsForest {
    pub assignment: BTreeMap<usize, BTreeSet<usize>>,
    pub order: Vec<usize>,
}

/// Builds the DFS forest over `unfinished`.
pub fn dfs_forest(inst: &Instance, unfinished: &BTreeSet<usize>) -> DfsForest {
    let available = inst.available_set(unfinished);
    let mut remaining = inst.job_set_mask(unfinished);
    let mut assignment = BTreeMap::new();
    let mut order = Vec::with_capacity(available.len());
    for &i in &available {
        let members = inst.closure_in_set(i, &remaining);
        for &j in &members {
            remaining[j / 64] &= !(1 << (j % 64));
        }
        assignment.insert(i, members.into_iter().collect());
        order.push(i);
    }
    debug_assert!(remaining.iter().all(|&w| w == 0), "trees must partition U");
    DfsForest { assignment, order }
}

/// Total weight w(T(i)) per available job, in ascending index order.
pub(crate) fn tree_weights(inst: &Instance, unfinished: &BTreeSet<usize>) -> Vec<(usize, Rat)> {
    let forest = dfs_forest(inst, unfinished);
    forest
        .order
        .iter()
        .map(|&i| (i, inst.total_weight(&forest.assignment[&i])))
        .collect()
}

pub(crate) fn rate_map_single(inst: &Instance, unfinished: &BTreeSet<usize>) -> BTreeMap<usize, Rat> {
    let total = inst.total_weight(unfinished);
    if total.is_zero() {
        // Zero total weight: work-conserving fallback, run the lowest-index
        // available job at full rate.
        let available = inst.available_set(unfinished);
        let first = *available.iter().next().expect("unfinished set is nonempty");
        return available
            .into_iter()
            .map(|j| (j, if j == first { Rat::one() } else { Rat::zero() }))
            .collect();
    }
    tree_weights(inst, unfinished)
        .into_iter()
        .map(|(i, w)| (i, w / &total))
        .collect()
}

/// Processing rates at one instant on a single machine: each available job
/// runs at w(T(i)) / w(U).
pub fn rates_single(inst: &Instance, unfinished: &BTreeSet<usize>) -> RateVector {
    assert!(!unfinished.is_empty(), "unfinished set must be nonempty");
    RateVector {
        time: Rat::zero(),
        rates: rate_map_single(inst, unfinished),
    }
}

/// Simulates the round-robin rates to a full virtual schedule. The machine
/// count of the instance is ignored; the total rate budget is 1.
pub fn virtual_schedule_single(inst: &Instance) -> VirtualSchedule {
    simulate_virtual(inst, rate_map_single)
}

/// Non-preemptive list scheduling of all jobs in the given order, which must
/// be a linear extension of the precedence DAG. The single machine runs the
/// jobs back to back without idle time.
pub fn list_schedule(inst: &Instance, order: &[usize]) -> Result<MachineSchedule> {
    let n = inst.job_count();
    let mut position = vec![usize::MAX; n];
    for (pos, &j) in order.iter().enumerate() {
        if j >= n || position[j] != usize::MAX {
            let count = order.iter().filter(|&&k| k == j).count();
            return Err(Error::NotAPermutation { job: j, count });
        }
        position[j] = pos;
    }
    if order.len() != n {
        let missing = (0..n).find(|&j| position[j] == usize::MAX).unwrap_or(0);
        return Err(Error::NotAPermutation { job: missing, count: 0 });
    }
    for &(a, b) in inst.edges() {
        if position[a] > position[b] {
            return Err(Error::PrecedenceViolated { pred: a, succ: b });
        }
    }

    let mut now = Rat::zero();
    let mut segments = Vec::new();
    let mut completions = vec![Rat::zero(); n];
    for &j in order {
        let start = now.clone();
        now += inst.processing_time(j);
        completions[j] = now.clone();
        if start != now {
            segments.push(Segment {
                machine: 0,
                job: j,
                start,
                end: now.clone(),
            });
        }
    }
    Ok(MachineSchedule::from_parts(inst, segments, completions))
}

/// Full single-machine solve: virtual schedule, then list scheduling in
/// virtual completion order. Every final completion time is bounded by the
/// corresponding virtual one.
pub fn solve_single(inst: &Instance) -> Result<(VirtualSchedule, MachineSchedule)> {
    if inst.machines() != 1 {
        return Err(Error::SingleMachineRequired(inst.machines()));
    }
    let vs = virtual_schedule_single(inst);
    let order = vs.completion_order();
    let schedule = list_schedule(inst, &order)?;
    debug_assert!((0..inst.job_count()).all(|j| schedule.completions[j] <= vs.completions[j]));
    Ok((vs, schedule))
}
