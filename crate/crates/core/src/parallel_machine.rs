//! Scheduling on identical parallel machines.
//!
//! When at most `m` jobs are available each runs at rate 1. Otherwise the
//! rates come from a maximum flow in the scheduling network at the
//! largest-breakpoint price: the flow entering each available job node is
//! its processing rate. The resulting virtual schedule is realized with
//! McNaughton's wrap-around rule per event interval, giving a preemptive
//! schedule with at most O(n²) preemptions whose total weighted completion
//! time is at most three times the optimum. On a single machine the rates
//! coincide exactly with the weighted round-robin rule.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::flow::{build_network, largest_breakpoint, max_flow_guided, Flow};
use crate::instance::Instance;
use crate::rational::{rat, Rat};
use crate::schedule::{
    simulate_virtual, MachineSchedule, RateVector, Segment, VirtualSchedule,
};
use crate::single_machine::tree_weights;

/// Per-job split of the virtual completion time into active time (the job
/// or one of its available ancestors ran at rate < 1) and inactive time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActiveTimeAccount {
    /// μ_j: total active time before completion.
    pub active: Vec<Rat>,
    /// λ_j: total inactive time before completion; bounded by the longest
    /// chain ending at j.
    pub inactive: Vec<Rat>,
}

/// Pricing details of one rate computation through the flow network.
#[derive(Clone, Debug)]
pub struct Pricing {
    /// λ used for the capacities.
    pub lambda: Rat,
    /// π = 1/λ*, present when the breakpoint search succeeded. `None` when
    /// the minimum cut saturates below m (possible only with zero-weight
    /// successor-closed job sets) and the rates were topped up instead.
    pub price: Option<Rat>,
    /// Canonical maximum flow at `lambda`.
    pub flow: Flow,
    /// Newton updates used by the breakpoint search.
    pub newton_updates: usize,
}

/// Rates plus the pricing evidence, when the flow branch was taken.
#[derive(Clone, Debug)]
pub struct DetailedRates {
    pub rates: BTreeMap<usize, Rat>,
    pub pricing: Option<Pricing>,
}

/// Water-filling of `m` machines over the forest tree weights: every job
/// whose proportional share reaches 1 is capped there and the remainder is
/// redistributed over the rest.
pub(crate) fn wdeq_targets(weights: &[(usize, Rat)], machines: usize) -> BTreeMap<usize, Rat> {
    let mut targets: BTreeMap<usize, Rat> = BTreeMap::new();
    let mut remaining: Vec<(usize, Rat)> = weights.to_vec();
    let mut budget = rat(machines as i64);
    loop {
        let total: Rat = remaining.iter().map(|(_, w)| w.clone()).sum();
        if total.is_zero() || budget.is_zero() {
            for (j, _) in &remaining {
                targets.insert(*j, Rat::zero());
            }
            return targets;
        }
        let mut capped = false;
        remaining.retain(|(j, w)| {
            if w * &budget >= total {
                targets.insert(*j, Rat::one());
                capped = true;
                false
            } else {
                true
            }
        });
        if capped {
            budget = rat(machines as i64) - rat(targets.len() as i64);
            continue;
        }
        for (j, w) in &remaining {
            targets.insert(*j, w * &budget / &total);
        }
        return targets;
    }
}

pub(crate) fn rate_map_parallel(inst: &Instance, unfinished: &BTreeSet<usize>) -> BTreeMap<usize, Rat> {
    rates_parallel_detailed(inst, unfinished).rates
}

/// Rates at one instant on `m` machines, together with the price and flow
/// when the flow branch was taken.
pub fn rates_parallel_detailed(inst: &Instance, unfinished: &BTreeSet<usize>) -> DetailedRates {
    assert!(!unfinished.is_empty(), "unfinished set must be nonempty");
    let m = inst.machines();
    let available = inst.available_set(unfinished);

    if available.len() <= m {
        return DetailedRates {
            rates: available.into_iter().map(|j| (j, Rat::one())).collect(),
            pricing: None,
        };
    }

    let total = inst.total_weight(unfinished);
    if total.is_zero() {
        // Zero total weight: run the m lowest-index available jobs.
        let rates = available
            .iter()
            .enumerate()
            .map(|(pos, &j)| (j, if pos < m { Rat::one() } else { Rat::zero() }))
            .collect();
        return DetailedRates { rates, pricing: None };
    }

    let net = build_network(inst, unfinished);
    let targets = wdeq_targets(&tree_weights(inst, unfinished), m);
    match largest_breakpoint(&net) {
        Ok(bp) => {
            let (flow, _) = max_flow_guided(&net, &bp.lambda, &targets);
            let rates: BTreeMap<usize, Rat> =
                available.iter().map(|&j| (j, flow.hub_flow(j))).collect();
            debug_assert_eq!(
                rates.values().cloned().sum::<Rat>(),
                rat(m as i64),
                "flow rates must use the full machine capacity"
            );
            DetailedRates {
                rates,
                pricing: Some(Pricing {
                    lambda: bp.lambda,
                    price: Some(bp.price),
                    flow,
                    newton_updates: bp.newton_updates,
                }),
            }
        }
        Err(Error::PriceSaturated { lambda }) => {
            // The flow cannot use all m machines (zero-weight successor-closed
            // sets absorb nothing). Take the canonical flow at the limiting λ
            // and top the leftover capacity up over available jobs in index
            // order; this only advances jobs whose remaining successors all
            // have zero weight, so it is objective-neutral.
            let (flow, _) = max_flow_guided(&net, &lambda, &targets);
            let mut rates: BTreeMap<usize, Rat> =
                available.iter().map(|&j| (j, flow.hub_flow(j))).collect();
            let mut leftover = rat(m as i64) - flow.value();
            for r in rates.values_mut() {
                if leftover.is_zero() {
                    break;
                }
                let slack = Rat::one() - &*r;
                let add = slack.min(leftover.clone());
                *r += &add;
                leftover -= add;
            }
            debug_assert!(leftover.is_zero());
            DetailedRates {
                rates,
                pricing: Some(Pricing {
                    lambda,
                    price: None,
                    flow,
                    newton_updates: 0,
                }),
            }
        }
        Err(e) => unreachable!("breakpoint search cannot fail otherwise: {e}"),
    }
}

/// Processing rates at one instant on identical parallel machines.
pub fn rates_parallel(inst: &Instance, unfinished: &BTreeSet<usize>) -> RateVector {
    RateVector {
        time: Rat::zero(),
        rates: rate_map_parallel(inst, unfinished),
    }
}

/// Simulates the parallel rates to a virtual schedule and accounts active
/// and inactive time per job.
pub fn virtual_schedule_parallel(inst: &Instance) -> (VirtualSchedule, ActiveTimeAccount) {
    let vs = simulate_virtual(inst, rate_map_parallel);
    let account = account_active_time(inst, &vs);
    (vs, account)
}

/// Splits every job's virtual completion time into active and inactive
/// parts. A job is active during an event iff it or one of its ancestors is
/// processed at a rate smaller than 1 (unavailable jobs are not processed,
/// so only available ancestors matter).
pub fn account_active_time(inst: &Instance, vs: &VirtualSchedule) -> ActiveTimeAccount {
    let n = inst.job_count();
    let mut active = vec![Rat::zero(); n];
    let mut inactive = vec![Rat::zero(); n];
    let mut unfinished: BTreeSet<usize> = (0..n).collect();
    for event in &vs.events {
        let len = event.length();
        if !len.is_zero() {
            let slow: Vec<usize> = event
                .rates
                .iter()
                .filter(|(_, r)| **r < Rat::one())
                .map(|(&j, _)| j)
                .collect();
            for &j in &unfinished {
                let ancestor_mask = inst.ancestor_mask(j);
                let is_active = slow
                    .iter()
                    .any(|&s| Instance::mask_contains(ancestor_mask, s));
                if is_active {
                    active[j] += &len;
                } else {
                    inactive[j] += &len;
                }
            }
        }
        unfinished.remove(&event.completed);
    }
    ActiveTimeAccount { active, inactive }
}

/// McNaughton's wrap-around rule applied per event interval of the virtual
/// schedule: within `[t, C'_j)` the unfinished jobs' processed amounts are
/// laid out in virtual-completion order, filling machine after machine and
/// wrapping the overflow. No job runs on two machines at once because its
/// amount never exceeds the interval length.
pub fn wrap_around(inst: &Instance, vs: &VirtualSchedule) -> Result<MachineSchedule> {
    let n = inst.job_count();
    let m = inst.machines();
    let order = vs.completion_order();
    let mut segments: Vec<Segment> = Vec::new();
    let mut last_end: Vec<Option<Rat>> = vec![None; n];

    for (k, event) in vs.events.iter().enumerate() {
        let len = event.length();
        if len.is_zero() {
            continue;
        }
        let amount =
            |j: usize| -> Rat { vs.elapsed[k + 1][j].clone() - &vs.elapsed[k][j] };
        let total: Rat = order[k..].iter().map(|&j| amount(j)).sum();
        if total > rat(m as i64) * &len {
            return Err(Error::Internal(format!(
                "interval [{}, {}) holds more work than {m} machines admit",
                event.start, event.end
            )));
        }

        let mut machine = 0usize;
        let mut cursor = event.start.clone();
        for &j in &order[k..] {
            let mut remaining = amount(j);
            if remaining.is_zero() {
                continue;
            }
            if remaining > len {
                return Err(Error::Internal(format!(
                    "job {j} exceeds rate 1 within [{}, {})",
                    event.start, event.end
                )));
            }
            loop {
                let fits = cursor.clone() + &remaining;
                if fits <= event.end {
                    segments.push(Segment {
                        machine,
                        job: j,
                        start: cursor.clone(),
                        end: fits.clone(),
                    });
                    last_end[j] = Some(match last_end[j].take() {
                        Some(prev) => prev.max(fits.clone()),
                        None => fits.clone(),
                    });
                    cursor = fits;
                    break;
                }
                // Wrap: fill this machine to the interval end, continue on
                // the next one from the interval start.
                if cursor < event.end {
                    let first_piece_start = cursor.clone();
                    segments.push(Segment {
                        machine,
                        job: j,
                        start: cursor.clone(),
                        end: event.end.clone(),
                    });
                    remaining -= event.end.clone() - &cursor;
                    last_end[j] = Some(match last_end[j].take() {
                        Some(prev) => prev.max(event.end.clone()),
                        None => event.end.clone(),
                    });
                    // The wrapped piece ends before the first piece starts.
                    debug_assert!(event.start.clone() + &remaining <= first_piece_start);
                }
                machine += 1;
                if machine >= m {
                    return Err(Error::Internal(
                        "wrap-around spilled past the last machine".into(),
                    ));
                }
                cursor = event.start.clone();
            }
        }
    }

    let completions: Vec<Rat> = (0..n)
        .map(|j| match &last_end[j] {
            Some(end) => end.clone(),
            None => vs.completions[j].clone(),
        })
        .collect();
    Ok(MachineSchedule::from_parts(inst, segments, completions))
}

/// Full parallel-machine solve: virtual schedule, wrap-around realization,
/// and the active/inactive account.
pub fn solve_parallel(
    inst: &Instance,
) -> Result<(VirtualSchedule, MachineSchedule, ActiveTimeAccount)> {
    let (vs, account) = virtual_schedule_parallel(inst);
    let schedule = wrap_around(inst, &vs)?;
    debug_assert!((0..inst.job_count()).all(|j| schedule.completions[j] <= vs.completions[j]));
    Ok((vs, schedule, account))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Job;
    use crate::rational::ratio;
    use crate::single_machine::{rates_single, virtual_schedule_single};

    fn job(p: i64, w: i64) -> Job {
        Job {
            processing_time: rat(p),
            weight: rat(w),
        }
    }

    fn six_job_instance() -> Instance {
        Instance::new(
            3,
            vec![job(9, 1), job(9, 1), job(12, 1), job(12, 6), job(9, 5), job(3, 1)],
            vec![(0, 4), (1, 4), (1, 5), (2, 5), (3, 5)],
        )
        .unwrap()
    }

    fn all_jobs(n: usize) -> BTreeSet<usize> {
        (0..n).collect()
    }

    #[test]
    fn rates_six_jobs_at_time_zero() {
        let inst = six_job_instance();
        let detailed = rates_parallel_detailed(&inst, &all_jobs(6));
        let pricing = detailed.pricing.as_ref().unwrap();
        assert_eq!(pricing.price.as_ref().unwrap(), &ratio(9, 2));
        assert_eq!(detailed.rates[&0], rat(1));
        assert_eq!(detailed.rates[&1], ratio(2, 3));
        assert_eq!(detailed.rates[&2], ratio(1, 3));
        assert_eq!(detailed.rates[&3], rat(1));
        let sum: Rat = detailed.rates.values().cloned().sum();
        assert_eq!(sum, rat(3));
        assert!(detailed.rates.values().all(|r| *r <= rat(1)));
    }

    #[test]
    fn rates_few_available_jobs() {
        let inst = Instance::new(3, vec![job(4, 1), job(2, 9)], vec![]).unwrap();
        let rv = rates_parallel(&inst, &all_jobs(2));
        assert_eq!(rv.rate(0), rat(1));
        assert_eq!(rv.rate(1), rat(1));
    }

    #[test]
    fn rates_match_single_machine_on_one_machine() {
        let inst = Instance::new(
            1,
            vec![job(6, 1), job(4, 2), job(3, 1), job(5, 1)],
            vec![(0, 1)],
        )
        .unwrap();
        let all = all_jobs(4);
        let parallel = rates_parallel(&inst, &all);
        let single = rates_single(&inst, &all);
        assert_eq!(parallel.rates, single.rates);
    }

    #[test]
    fn virtual_schedule_six_jobs() {
        let inst = six_job_instance();
        let (vs, account) = virtual_schedule_parallel(&inst);
        assert_eq!(
            vs.completions,
            vec![rat(9), rat(12), rat(18), rat(12), rat(21), rat(21)]
        );
        assert_eq!(vs.objective, rat(237));
        // Job 3 runs at rate 1 throughout and has no predecessors.
        assert_eq!(account.active[3], rat(0));
        assert_eq!(account.inactive[3], rat(12));
        // μ + λ = C' and λ bounded by the chain bound, for every job.
        let chains = inst.chain_bounds();
        for j in 0..6 {
            assert_eq!(
                account.active[j].clone() + &account.inactive[j],
                vs.completions[j]
            );
            assert!(account.inactive[j] <= chains[j]);
        }
    }

    #[test]
    fn independent_jobs_all_rate_one() {
        let inst = Instance::new(3, vec![job(5, 1), job(3, 2), job(1, 7)], vec![]).unwrap();
        let (vs, account) = virtual_schedule_parallel(&inst);
        for j in 0..3 {
            assert_eq!(vs.completions[j], *inst.processing_time(j));
            assert_eq!(account.active[j], rat(0));
        }
    }

    #[test]
    fn wrap_around_six_jobs_first_interval() {
        let inst = six_job_instance();
        let (vs, _) = virtual_schedule_parallel(&inst);
        let sched = wrap_around(&inst, &vs).unwrap();
        sched.validate(&inst).unwrap();
        let first: Vec<&Segment> = sched
            .segments
            .iter()
            .filter(|s| s.start < rat(9))
            .collect();
        let expect = [
            (0usize, 0usize, rat(0), rat(9)),
            (1, 1, rat(0), rat(6)),
            (1, 3, rat(6), rat(9)),
            (2, 3, rat(0), rat(6)),
            (2, 2, rat(6), rat(9)),
        ];
        assert_eq!(first.len(), expect.len());
        for (machine, j, start, end) in expect {
            assert!(
                first.iter().any(|s| s.machine == machine
                    && s.job == j
                    && s.start == start
                    && s.end == end),
                "missing segment: machine {machine}, job {j}, [{start}, {end})"
            );
        }
    }

    #[test]
    fn wrap_around_trivia() {
        let lone = Instance::new(1, vec![job(5, 2)], vec![]).unwrap();
        let (vs, _) = virtual_schedule_parallel(&lone);
        let sched = wrap_around(&lone, &vs).unwrap();
        assert_eq!(sched.segments.len(), 1);
        assert_eq!(sched.completions, vec![rat(5)]);

        // Two jobs each filling the whole interval on two machines: no wrap.
        let pair = Instance::new(2, vec![job(4, 1), job(4, 1)], vec![]).unwrap();
        let (vs, _) = virtual_schedule_parallel(&pair);
        let sched = wrap_around(&pair, &vs).unwrap();
        sched.validate(&pair).unwrap();
        assert_eq!(sched.segments.len(), 2);
        assert!(sched.segments.iter().all(|s| s.start == rat(0)));
    }

    #[test]
    fn solve_parallel_six_jobs() {
        let inst = six_job_instance();
        let (vs, sched, _) = solve_parallel(&inst).unwrap();
        sched.validate(&inst).unwrap();
        for j in 0..6 {
            assert!(sched.completions[j] <= vs.completions[j]);
        }
        assert_eq!(
            sched.completions,
            vec![rat(9), rat(12), rat(18), rat(12), rat(21), rat(21)]
        );
        let n = 6;
        assert!(sched.segments.len() <= 2 * n * n + n);
        assert!(sched.objective <= vs.objective);
    }

    #[test]
    fn parallel_on_one_machine_matches_single() {
        let inst = Instance::new(
            1,
            vec![job(6, 1), job(4, 2), job(3, 1), job(5, 1)],
            vec![(0, 1)],
        )
        .unwrap();
        let (vs_parallel, _) = virtual_schedule_parallel(&inst);
        let vs_single = virtual_schedule_single(&inst);
        assert_eq!(vs_parallel.completion_order(), vs_single.completion_order());
        assert_eq!(vs_parallel.completions, vs_single.completions);
    }

    #[test]
    fn zero_weight_unfinished_set() {
        let inst = Instance::new(1, vec![job(1, 0), job(2, 0), job(3, 0)], vec![]).unwrap();
        let (vs, _, _) = solve_parallel(&inst).ok().map(|t| t).unwrap();
        assert_eq!(vs.completions, vec![rat(1), rat(3), rat(6)]);
    }

    #[test]
    fn saturated_rates_top_up() {
        // Zero-weight available jobs whose closures carry no weight cap the
        // flow below m; the rates are topped up in index order.
        let inst = Instance::new(2, vec![job(1, 0), job(1, 0), job(4, 5)], vec![]).unwrap();
        let detailed = rates_parallel_detailed(&inst, &all_jobs(3));
        let pricing = detailed.pricing.as_ref().unwrap();
        assert!(pricing.price.is_none());
        let sum: Rat = detailed.rates.values().cloned().sum();
        assert_eq!(sum, rat(2));
        assert_eq!(detailed.rates[&2], rat(1), "the weighted job keeps its full rate");
        assert_eq!(detailed.rates[&0], rat(1), "lowest index absorbs the leftover");
        // The schedule still terminates.
        let (vs, sched, _) = solve_parallel(&inst).unwrap();
        sched.validate(&inst).unwrap();
        assert_eq!(vs.completions[2], rat(4));
    }

    #[test]
    fn active_saturation_of_sink_arcs() {
        let inst = six_job_instance();
        let detailed = rates_parallel_detailed(&inst, &all_jobs(6));
        let pricing = detailed.pricing.unwrap();
        let lambda = &pricing.lambda;
        // Active jobs at time zero: 1 and 2 run below rate 1; 4 and 5 wait
        // on them. Each must saturate its sink arc.
        for j in [1usize, 2, 4, 5] {
            assert_eq!(pricing.flow.sink_flow(j), lambda * inst.weight(j));
        }
    }

    #[test]
    fn wdeq_water_filling() {
        let weights = vec![(0, rat(6)), (1, rat(2)), (2, rat(1)), (3, rat(6))];
        let targets = wdeq_targets(&weights, 3);
        assert_eq!(targets[&0], rat(1));
        assert_eq!(targets[&1], ratio(2, 3));
        assert_eq!(targets[&2], ratio(1, 3));
        assert_eq!(targets[&3], rat(1));

        let flat = wdeq_targets(&[(0, rat(1)), (1, rat(1)), (2, rat(1))], 2);
        assert_eq!(flat[&0], ratio(2, 3));
    }
}
