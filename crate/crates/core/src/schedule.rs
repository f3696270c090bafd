//! Schedule representations: rate vectors, virtual (fractional-rate)
//! schedules, and executable machine schedules, plus the event-loop
//! simulator shared by the single- and parallel-machine solvers.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::{format_decimal, JsonRat, Rat};

/// Processing rates at one instant: `rates[j] = R_j(t)` for every available
/// job `j` (rate 0 entries are included for available jobs).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RateVector {
    /// The time the rates apply at; filled in by the simulator, zero when a
    /// rate computation is invoked standalone.
    pub time: Rat,
    pub rates: BTreeMap<usize, Rat>,
}

impl RateVector {
    pub fn sum(&self) -> Rat {
        self.rates.values().cloned().sum()
    }

    pub fn rate(&self, j: usize) -> Rat {
        self.rates.get(&j).cloned().unwrap_or_else(Rat::zero)
    }
}

/// One event interval `[start, end)` of a virtual schedule. Exactly one job
/// completes at `end`. Ties and zero-length jobs appear as zero-length
/// events (with an empty rate map) at the same time point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleEvent {
    pub start: Rat,
    pub end: Rat,
    pub rates: BTreeMap<usize, Rat>,
    pub completed: usize,
}

impl ScheduleEvent {
    pub fn length(&self) -> Rat {
        self.end.clone() - &self.start
    }
}

/// The piecewise-constant rate schedule produced by simulating a
/// non-clairvoyant rate rule with known processing times.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VirtualSchedule {
    pub events: Vec<ScheduleEvent>,
    /// `elapsed[k][j]` = Y_j at the k-th event boundary; `elapsed[0]` is all
    /// zeros at time 0, `elapsed[k]` is taken at `events[k-1].end`.
    pub elapsed: Vec<Vec<Rat>>,
    /// Virtual completion time C'_j per job.
    pub completions: Vec<Rat>,
    /// Sum of w_j * C'_j.
    pub objective: Rat,
}

impl VirtualSchedule {
    /// Jobs in completion order (one per event).
    pub fn completion_order(&self) -> Vec<usize> {
        self.events.iter().map(|e| e.completed).collect()
    }

    pub fn to_json(&self) -> String {
        let raw = VirtualScheduleJson {
            objective: JsonRat(self.objective.clone()),
            completions: self.completions.iter().cloned().map(JsonRat).collect(),
            events: self
                .events
                .iter()
                .map(|e| EventJson {
                    start: JsonRat(e.start.clone()),
                    end: JsonRat(e.end.clone()),
                    completed: e.completed,
                    rates: e
                        .rates
                        .iter()
                        .map(|(j, r)| (j.to_string(), JsonRat(r.clone())))
                        .collect(),
                })
                .collect(),
            elapsed: self
                .elapsed
                .iter()
                .map(|ys| ys.iter().cloned().map(JsonRat).collect())
                .collect(),
        };
        let mut s = serde_json::to_string(&raw).expect("serialization cannot fail");
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
struct VirtualScheduleJson {
    objective: JsonRat,
    completions: Vec<JsonRat>,
    events: Vec<EventJson>,
    elapsed: Vec<Vec<JsonRat>>,
}

#[derive(Serialize)]
struct EventJson {
    start: JsonRat,
    end: JsonRat,
    completed: usize,
    rates: BTreeMap<String, JsonRat>,
}

/// A contiguous run of one job on one machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub machine: usize,
    pub job: usize,
    pub start: Rat,
    pub end: Rat,
}

/// Final executable schedule: machine-assigned segments plus completion
/// times. Machines are 0-indexed like jobs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MachineSchedule {
    pub segments: Vec<Segment>,
    pub completions: Vec<Rat>,
    pub objective: Rat,
}

impl MachineSchedule {
    pub(crate) fn from_parts(inst: &Instance, segments: Vec<Segment>, completions: Vec<Rat>) -> Self {
        let objective = completions
            .iter()
            .enumerate()
            .map(|(j, c)| inst.weight(j) * c)
            .sum();
        MachineSchedule {
            segments,
            completions,
            objective,
        }
    }

    /// Canonical schedule JSON: objective, completions, segments, rationals
    /// as lowest-terms strings.
    pub fn to_json(&self) -> String {
        let raw = ScheduleJson {
            objective: JsonRat(self.objective.clone()),
            completions: self.completions.iter().cloned().map(JsonRat).collect(),
            segments: self
                .segments
                .iter()
                .map(|s| SegmentJson {
                    machine: s.machine,
                    job: s.job,
                    start: JsonRat(s.start.clone()),
                    end: JsonRat(s.end.clone()),
                })
                .collect(),
        };
        let mut s = serde_json::to_string(&raw).expect("serialization cannot fail");
        s.push('\n');
        s
    }

    /// Gantt CSV export: one row per segment, rationals rendered as decimal
    /// strings to 12 significant digits. For plotting only; JSON stays exact.
    pub fn to_gantt_csv(&self) -> String {
        let mut out = String::from("machine,job,start,end\n");
        for s in &self.segments {
            out.push_str(&format!(
                "{},{},{},{}\n",
                s.machine,
                s.job,
                format_decimal(&s.start, 12),
                format_decimal(&s.end, 12)
            ));
        }
        out
    }

    /// Checks the structural invariants of a machine schedule against its
    /// instance: per-machine and per-job non-overlap, total segment length
    /// equal to the processing time, completions at the latest segment end,
    /// and precedence feasibility.
    pub fn validate(&self, inst: &Instance) -> Result<()> {
        let n = inst.job_count();
        let fail = |msg: String| Err(Error::Internal(msg));
        if self.completions.len() != n {
            return fail("completion count mismatch".into());
        }
        for s in &self.segments {
            if s.start >= s.end {
                return fail(format!("empty or reversed segment for job {}", s.job));
            }
            if s.machine >= inst.machines() {
                return fail(format!("segment on machine {} out of range", s.machine));
            }
        }
        // Non-overlap per machine.
        let mut by_machine: BTreeMap<usize, Vec<&Segment>> = BTreeMap::new();
        for s in &self.segments {
            by_machine.entry(s.machine).or_default().push(s);
        }
        for (m, mut segs) in by_machine {
            segs.sort_by(|a, b| a.start.cmp(&b.start));
            for w in segs.windows(2) {
                if w[0].end > w[1].start {
                    return fail(format!("overlapping segments on machine {m}"));
                }
            }
        }
        // Non-overlap per job across machines, total length, completion time.
        for j in 0..n {
            let mut segs: Vec<&Segment> = self.segments.iter().filter(|s| s.job == j).collect();
            segs.sort_by(|a, b| a.start.cmp(&b.start));
            for w in segs.windows(2) {
                if w[0].end > w[1].start {
                    return fail(format!("job {j} runs on two machines at once"));
                }
            }
            let total: Rat = segs.iter().map(|s| s.end.clone() - &s.start).sum();
            if &total != inst.processing_time(j) {
                return fail(format!("job {j} processed {total}, expected {}", inst.processing_time(j)));
            }
            if let Some(last) = segs.last() {
                if self.completions[j] != last.end {
                    return fail(format!("job {j} completion is not its latest segment end"));
                }
            }
        }
        // Precedence feasibility.
        for &(a, b) in inst.edges() {
            if self.completions[b] < self.completions[a] {
                return fail(format!("successor {b} completes before predecessor {a}"));
            }
            for s in self.segments.iter().filter(|s| s.job == b) {
                if s.start < self.completions[a] {
                    return fail(format!("job {b} starts before predecessor {a} completes"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct ScheduleJson {
    objective: JsonRat,
    completions: Vec<JsonRat>,
    segments: Vec<SegmentJson>,
}

#[derive(Serialize)]
struct SegmentJson {
    machine: usize,
    job: usize,
    start: JsonRat,
    end: JsonRat,
}

/// Runs the event loop: between completions every job keeps the constant
/// rate produced by `rate_fn`; the available job with the smallest remaining
/// time over rate completes at the event boundary (lowest index on ties,
/// with tied and zero-length jobs cascading as zero-length events).
pub(crate) fn simulate_virtual<F>(inst: &Instance, mut rate_fn: F) -> VirtualSchedule
where
    F: FnMut(&Instance, &BTreeSet<usize>) -> BTreeMap<usize, Rat>,
{
    let n = inst.job_count();
    let mut unfinished: BTreeSet<usize> = (0..n).collect();
    let mut now = Rat::zero();
    let mut elapsed_now: Vec<Rat> = vec![Rat::zero(); n];
    let mut events = Vec::with_capacity(n);
    let mut elapsed = vec![elapsed_now.clone()];
    let mut completions = vec![Rat::zero(); n];

    while !unfinished.is_empty() {
        let available = inst.available_set(&unfinished);
        debug_assert!(!available.is_empty(), "DAG must expose an available job");

        // Jobs already at their processing time complete immediately as
        // zero-length events at the current time point.
        if let Some(&j) = available
            .iter()
            .find(|&&j| elapsed_now[j] == *inst.processing_time(j))
        {
            events.push(ScheduleEvent {
                start: now.clone(),
                end: now.clone(),
                rates: BTreeMap::new(),
                completed: j,
            });
            unfinished.remove(&j);
            completions[j] = now.clone();
            elapsed.push(elapsed_now.clone());
            continue;
        }

        let rates = rate_fn(inst, &unfinished);
        debug_assert!(rates.keys().all(|j| available.contains(j)));

        let mut winner: Option<(usize, Rat)> = None;
        for (&j, r) in &rates {
            if r.is_zero() {
                continue;
            }
            let tau = (inst.processing_time(j) - &elapsed_now[j]) / r;
            match &winner {
                Some((_, best)) if *best <= tau => {}
                _ => winner = Some((j, tau)),
            }
        }
        let (completed, tau) = winner.expect("some available job must have positive rate");

        for (&j, r) in &rates {
            if !r.is_zero() {
                elapsed_now[j] += r * &tau;
            }
        }
        let end = now.clone() + &tau;
        debug_assert_eq!(elapsed_now[completed], *inst.processing_time(completed));
        events.push(ScheduleEvent {
            start: now.clone(),
            end: end.clone(),
            rates,
            completed,
        });
        unfinished.remove(&completed);
        completions[completed] = end.clone();
        now = end;
        elapsed.push(elapsed_now.clone());
    }

    let objective = completions
        .iter()
        .enumerate()
        .map(|(j, c)| inst.weight(j) * c)
        .sum();
    VirtualSchedule {
        events,
        elapsed,
        completions,
        objective,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Job;
    use crate::rational::rat;

    #[test]
    fn gantt_csv_shape() {
        let inst = Instance::new(
            2,
            vec![
                Job { processing_time: rat(1), weight: rat(1) },
                Job { processing_time: rat(2), weight: rat(1) },
            ],
            vec![],
        )
        .unwrap();
        let sched = MachineSchedule::from_parts(
            &inst,
            vec![
                Segment { machine: 0, job: 0, start: rat(0), end: rat(1) },
                Segment { machine: 1, job: 1, start: rat(0), end: rat(2) },
            ],
            vec![rat(1), rat(2)],
        );
        assert_eq!(
            sched.to_gantt_csv(),
            "machine,job,start,end\n0,0,0,1\n1,1,0,2\n"
        );
        sched.validate(&inst).unwrap();
        assert_eq!(sched.objective, rat(3));
    }

    #[test]
    fn validate_catches_overlap() {
        let inst = Instance::new(
            1,
            vec![
                Job { processing_time: rat(2), weight: rat(1) },
                Job { processing_time: rat(2), weight: rat(1) },
            ],
            vec![],
        )
        .unwrap();
        let sched = MachineSchedule::from_parts(
            &inst,
            vec![
                Segment { machine: 0, job: 0, start: rat(0), end: rat(2) },
                Segment { machine: 0, job: 1, start: rat(1), end: rat(3) },
            ],
            vec![rat(2), rat(3)],
        );
        assert!(sched.validate(&inst).is_err());
    }
}
