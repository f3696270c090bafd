//! Problem instances: jobs with rational processing times and weights, a
//! precedence DAG, and the reachability/availability machinery shared by all
//! solvers.
//!
//! Jobs are 0-indexed everywhere, in files and in APIs. Instances are
//! immutable after construction; the constructor validates the DAG and
//! precomputes successor/ancestor closures as bitmasks so that the solvers'
//! inner loops stay cheap.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{JsonRat, Rat};

/// One job: processing time `p >= 0` and weight `w >= 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Job {
    pub processing_time: Rat,
    pub weight: Rat,
}

/// A scheduling instance on `machines` identical machines.
#[derive(Clone, Debug)]
pub struct Instance {
    machines: usize,
    jobs: Vec<Job>,
    /// Precedence arcs (pred, succ), sorted and deduplicated.
    edges: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    /// closure[j] = bitmask of j and everything reachable from j.
    closure: Vec<Mask>,
    /// ancestors[j] = bitmask of j and everything that reaches j.
    ancestors: Vec<Mask>,
    /// preds_mask[j] = bitmask of the direct predecessors of j.
    preds_mask: Vec<Mask>,
}

type Mask = Vec<u64>;

fn mask_new(n: usize) -> Mask {
    vec![0; n.div_ceil(64)]
}

fn mask_set(m: &mut Mask, i: usize) {
    m[i / 64] |= 1 << (i % 64);
}

fn mask_test(m: &Mask, i: usize) -> bool {
    m[i / 64] & (1 << (i % 64)) != 0
}

fn mask_or(dst: &mut Mask, src: &Mask) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d |= s;
    }
}

fn mask_intersects(a: &Mask, b: &Mask) -> bool {
    a.iter().zip(b).any(|(x, y)| x & y != 0)
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.machines == other.machines && self.jobs == other.jobs && self.edges == other.edges
    }
}

impl Eq for Instance {}

impl Instance {
    /// Validates and builds an instance. The precedence relation must be a
    /// DAG without self-loops or duplicate edges; `machines >= 1`; all
    /// processing times and weights nonnegative.
    pub fn new(machines: usize, jobs: Vec<Job>, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        if machines < 1 {
            return Err(Error::MachineCount(machines));
        }
        let n = jobs.len();
        for (i, job) in jobs.iter().enumerate() {
            if job.processing_time.is_negative() {
                return Err(Error::NegativeValue {
                    field: format!("jobs[{i}].p"),
                });
            }
            if job.weight.is_negative() {
                return Err(Error::NegativeValue {
                    field: format!("jobs[{i}].w"),
                });
            }
        }
        for (index, &(a, b)) in edges.iter().enumerate() {
            for job in [a, b] {
                if job >= n {
                    return Err(Error::EdgeOutOfRange { index, job, jobs: n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop { job: a });
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateEdge {
                pred: w[0].0,
                succ: w[0].1,
            });
        }

        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(a, b) in &edges {
            succs[a].push(b);
            preds[b].push(a);
        }

        let topo = topological_order(n, &preds, &succs)?;

        // Successor closures by reverse topological DP.
        let mut closure = vec![mask_new(n); n];
        for &j in topo.iter().rev() {
            let mut m = mask_new(n);
            mask_set(&mut m, j);
            for &k in &succs[j] {
                let succ_closure = closure[k].clone();
                mask_or(&mut m, &succ_closure);
            }
            closure[j] = m;
        }
        let mut ancestors = vec![mask_new(n); n];
        for (a, reach) in closure.iter().enumerate() {
            for (j, anc) in ancestors.iter_mut().enumerate() {
                if mask_test(reach, j) {
                    mask_set(anc, a);
                }
            }
        }
        let mut preds_mask = vec![mask_new(n); n];
        for (j, pj) in preds.iter().enumerate() {
            for &a in pj {
                mask_set(&mut preds_mask[j], a);
            }
        }

        Ok(Instance {
            machines,
            jobs,
            edges,
            preds,
            succs,
            closure,
            ancestors,
            preds_mask,
        })
    }

    pub fn job_count(&self) -> usize {
        self.jobs.len()
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn job(&self, j: usize) -> &Job {
        &self.jobs[j]
    }

    pub fn processing_time(&self, j: usize) -> &Rat {
        &self.jobs[j].processing_time
    }

    pub fn weight(&self, j: usize) -> &Rat {
        &self.jobs[j].weight
    }

    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    /// Precedence arcs (pred, succ), sorted.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn predecessors(&self, j: usize) -> &[usize] {
        &self.preds[j]
    }

    pub fn successors(&self, j: usize) -> &[usize] {
        &self.succs[j]
    }

    /// S(j): the job itself plus every job reachable from it along
    /// precedence arcs.
    pub fn successor_closure(&self, j: usize) -> BTreeSet<usize> {
        (0..self.job_count())
            .filter(|&k| mask_test(&self.closure[j], k))
            .collect()
    }

    /// True iff `a == j` or there is a directed path from `a` to `j`.
    pub fn is_ancestor(&self, a: usize, j: usize) -> bool {
        mask_test(&self.ancestors[j], a)
    }

    pub(crate) fn ancestor_mask(&self, j: usize) -> &Mask {
        &self.ancestors[j]
    }

    pub(crate) fn job_set_mask(&self, jobs: &BTreeSet<usize>) -> Mask {
        let mut m = mask_new(self.job_count());
        for &j in jobs {
            mask_set(&mut m, j);
        }
        m
    }

    pub(crate) fn mask_contains(mask: &Mask, j: usize) -> bool {
        mask_test(mask, j)
    }

    pub(crate) fn closure_in_set(&self, j: usize, set: &Mask) -> Vec<usize> {
        self.closure[j]
            .iter()
            .zip(set)
            .enumerate()
            .flat_map(|(word, (c, s))| {
                let mut bits = c & s;
                std::iter::from_fn(move || {
                    if bits == 0 {
                        None
                    } else {
                        let b = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        Some(word * 64 + b)
                    }
                })
            })
            .collect()
    }

    /// F_t: the jobs of `unfinished` all of whose predecessors are finished.
    pub fn available_set(&self, unfinished: &BTreeSet<usize>) -> BTreeSet<usize> {
        let u_mask = self.job_set_mask(unfinished);
        unfinished
            .iter()
            .copied()
            .filter(|&j| !mask_intersects(&self.preds_mask[j], &u_mask))
            .collect()
    }

    /// Maximum total processing time over all precedence chains ending at
    /// `j`, including `p_j` itself.
    pub fn chain_bound(&self, j: usize) -> Rat {
        self.chain_bounds().swap_remove(j)
    }

    /// Chain bounds for all jobs at once (longest-path DP over a topological
    /// order).
    pub fn chain_bounds(&self) -> Vec<Rat> {
        let n = self.job_count();
        let topo = topological_order(n, &self.preds, &self.succs).expect("validated DAG");
        let mut bound: Vec<Rat> = vec![Rat::zero(); n];
        for &j in &topo {
            let best_pred = self.preds[j]
                .iter()
                .map(|&a| bound[a].clone())
                .max()
                .unwrap_or_else(Rat::zero);
            bound[j] = best_pred + &self.jobs[j].processing_time;
        }
        bound
    }

    /// w(J): total weight of a set of jobs.
    pub fn total_weight<'a, I: IntoIterator<Item = &'a usize>>(&self, jobs: I) -> Rat {
        jobs.into_iter()
            .map(|&j| self.jobs[j].weight.clone())
            .sum()
    }

    /// Sum of all processing times.
    pub fn total_processing_time(&self) -> Rat {
        self.jobs.iter().map(|j| j.processing_time.clone()).sum()
    }

    /// Parses the canonical instance JSON.
    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let raw: InstanceJson =
            serde_json::from_slice(bytes).map_err(|e| Error::Json(e.to_string()))?;
        let jobs = raw
            .jobs
            .into_iter()
            .map(|j| Job {
                processing_time: j.p.0,
                weight: j.w.0,
            })
            .collect();
        Instance::new(raw.machines, jobs, raw.precedences)
    }

    /// Serializes to canonical JSON: keys in fixed order, rationals as
    /// lowest-terms strings, edges sorted, trailing newline.
    pub fn to_json(&self) -> String {
        let raw = InstanceJson {
            machines: self.machines,
            jobs: self
                .jobs
                .iter()
                .map(|j| JobJson {
                    p: JsonRat(j.processing_time.clone()),
                    w: JsonRat(j.weight.clone()),
                })
                .collect(),
            precedences: self.edges.clone(),
        };
        let mut s = serde_json::to_string(&raw).expect("serialization cannot fail");
        s.push('\n');
        s
    }
}

fn topological_order(n: usize, preds: &[Vec<usize>], succs: &[Vec<usize>]) -> Result<Vec<usize>> {
    let mut indegree: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut queue: BTreeSet<usize> = (0..n).filter(|&j| indegree[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&j) = queue.iter().next() {
        queue.remove(&j);
        order.push(j);
        for &k in &succs[j] {
            indegree[k] -= 1;
            if indegree[k] == 0 {
                queue.insert(k);
            }
        }
    }
    if order.len() < n {
        let stuck: Vec<usize> = (0..n).filter(|&j| indegree[j] > 0).collect();
        return Err(Error::Cycle { jobs: stuck });
    }
    Ok(order)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    machines: usize,
    jobs: Vec<JobJson>,
    precedences: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JobJson {
    p: JsonRat,
    w: JsonRat,
}
