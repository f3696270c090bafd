//! Max-flow/min-cut engine over the scheduling network and the
//! largest-breakpoint price search.
//!
//! The network for an unfinished set `U` with available jobs `F` has nodes
//! `A`, `B`, `Z` and one node per job of `U`; arcs `(A,B)` of capacity `m`,
//! `(B,j)` of capacity 1 for `j ∈ F`, the precedence arcs inside `U` with
//! unbounded capacity, and sink arcs `(j,Z)` of capacity `λ·w_j`. The price
//! of processor rate is `π = 1/λ*`, where `λ*` is the smallest `λ` at which
//! the minimum cut reaches `m` — found by discrete Newton iteration (one
//! max-flow per step) instead of a full parametric-flow sweep, since only
//! the largest breakpoint is needed.
//!
//! Flows are canonicalized in two stages so that downstream rate vectors are
//! reproducible: first the hub arcs are capped at the water-filling targets
//! derived from the round-robin forest weights and flow is pushed along
//! shortest augmenting paths (ties broken by lexicographically smallest node
//! sequence under A < B < job 0 < job 1 < … < Z); then the hub caps are
//! relaxed back to 1 and augmentation continues to a maximum flow.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::rational::{format_rat, rat, Rat};

/// Node of the scheduling network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum NodeId {
    /// Source `A`.
    Source,
    /// Hub `B`, the single outlet of the source.
    Hub,
    /// Job node.
    Job(usize),
    /// Sink `Z`.
    Sink,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            NodeId::Source => write!(f, "A"),
            NodeId::Hub => write!(f, "B"),
            NodeId::Job(j) => write!(f, "{j}"),
            NodeId::Sink => write!(f, "Z"),
        }
    }
}

/// Arc kinds of the network, in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArcKind {
    /// (A, B), capacity m.
    SourceHub,
    /// (B, j) for available j, capacity 1 (or a guided target).
    HubJob(usize),
    /// Precedence arc (j, k) within the unfinished set, unbounded capacity.
    Prec(usize, usize),
    /// (j, Z), capacity λ·w_j.
    JobSink(usize),
}

impl ArcKind {
    pub fn endpoints(&self) -> (NodeId, NodeId) {
        match *self {
            ArcKind::SourceHub => (NodeId::Source, NodeId::Hub),
            ArcKind::HubJob(j) => (NodeId::Hub, NodeId::Job(j)),
            ArcKind::Prec(j, k) => (NodeId::Job(j), NodeId::Job(k)),
            ArcKind::JobSink(j) => (NodeId::Job(j), NodeId::Sink),
        }
    }
}

/// The scheduling network for one unfinished set, with capacities
/// parameterized by λ.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    machines: usize,
    unfinished: Vec<usize>,
    available: Vec<usize>,
    weights: BTreeMap<usize, Rat>,
    arcs: Vec<ArcKind>,
}

impl FlowNetwork {
    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn unfinished(&self) -> &[usize] {
        &self.unfinished
    }

    pub fn available(&self) -> &[usize] {
        &self.available
    }

    pub fn weight(&self, j: usize) -> &Rat {
        &self.weights[&j]
    }

    pub fn total_weight(&self) -> Rat {
        self.weights.values().cloned().sum()
    }

    pub fn arcs(&self) -> &[ArcKind] {
        &self.arcs
    }

    pub fn node_count(&self) -> usize {
        self.unfinished.len() + 3
    }

    /// Capacity of an arc at parameter λ; `None` for the unbounded
    /// precedence arcs.
    pub fn capacity(&self, arc: &ArcKind, lambda: &Rat) -> Option<Rat> {
        match arc {
            ArcKind::SourceHub => Some(rat(self.machines as i64)),
            ArcKind::HubJob(_) => Some(Rat::one()),
            ArcKind::Prec(..) => None,
            ArcKind::JobSink(j) => Some(lambda * &self.weights[j]),
        }
    }

    fn node_index(&self, node: NodeId) -> usize {
        match node {
            NodeId::Source => 0,
            NodeId::Hub => 1,
            NodeId::Job(j) => {
                2 + self
                    .unfinished
                    .binary_search(&j)
                    .expect("job is in the unfinished set")
            }
            NodeId::Sink => self.node_count() - 1,
        }
    }

    fn node_at(&self, index: usize) -> NodeId {
        if index == 0 {
            NodeId::Source
        } else if index == 1 {
            NodeId::Hub
        } else if index == self.node_count() - 1 {
            NodeId::Sink
        } else {
            NodeId::Job(self.unfinished[index - 2])
        }
    }
}

/// Builds the network for the given unfinished set.
pub fn build_network(inst: &Instance, unfinished: &BTreeSet<usize>) -> FlowNetwork {
    assert!(!unfinished.is_empty(), "unfinished set must be nonempty");
    let available: Vec<usize> = inst.available_set(unfinished).into_iter().collect();
    let unfinished_sorted: Vec<usize> = unfinished.iter().copied().collect();
    let weights = unfinished_sorted
        .iter()
        .map(|&j| (j, inst.weight(j).clone()))
        .collect();

    let mut arcs = vec![ArcKind::SourceHub];
    arcs.extend(available.iter().map(|&j| ArcKind::HubJob(j)));
    arcs.extend(
        inst.edges()
            .iter()
            .filter(|(a, b)| unfinished.contains(a) && unfinished.contains(b))
            .map(|&(a, b)| ArcKind::Prec(a, b)),
    );
    arcs.extend(unfinished_sorted.iter().map(|&j| ArcKind::JobSink(j)));

    FlowNetwork {
        machines: inst.machines(),
        unfinished: unfinished_sorted,
        available,
        weights,
        arcs,
    }
}

/// A feasible A-Z flow at a fixed λ.
#[derive(Clone, Debug)]
pub struct Flow {
    lambda: Rat,
    value: Rat,
    /// Per arc (aligned with the network's arc list): flow and capacity,
    /// capacity `None` for precedence arcs.
    arc_flows: Vec<(ArcKind, Rat, Option<Rat>)>,
}

impl Flow {
    pub fn lambda(&self) -> &Rat {
        &self.lambda
    }

    /// Flow leaving the source.
    pub fn value(&self) -> &Rat {
        &self.value
    }

    pub fn arc_flows(&self) -> &[(ArcKind, Rat, Option<Rat>)] {
        &self.arc_flows
    }

    /// Flow on the hub arc (B, j): the processing rate of available job j.
    pub fn hub_flow(&self, j: usize) -> Rat {
        self.kind_flow(&ArcKind::HubJob(j))
    }

    /// Flow on the sink arc (j, Z).
    pub fn sink_flow(&self, j: usize) -> Rat {
        self.kind_flow(&ArcKind::JobSink(j))
    }

    fn kind_flow(&self, kind: &ArcKind) -> Rat {
        self.arc_flows
            .iter()
            .find(|(k, _, _)| k == kind)
            .map(|(_, f, _)| f.clone())
            .unwrap_or_else(Rat::zero)
    }

    /// Checks capacity and conservation constraints exactly.
    pub fn validate(&self, net: &FlowNetwork) -> Result<()> {
        let mut balance: BTreeMap<usize, Rat> = BTreeMap::new();
        for (kind, flow, cap) in &self.arc_flows {
            if flow < &Rat::zero() {
                return Err(Error::Internal(format!("negative flow on {kind:?}")));
            }
            if let Some(cap) = cap {
                if flow > cap {
                    return Err(Error::Internal(format!("flow exceeds capacity on {kind:?}")));
                }
            }
            let (from, to) = kind.endpoints();
            *balance.entry(net.node_index(from)).or_insert_with(Rat::zero) -= flow;
            *balance.entry(net.node_index(to)).or_insert_with(Rat::zero) += flow;
        }
        for (node, b) in &balance {
            let id = net.node_at(*node);
            match id {
                NodeId::Source => {
                    if *b != -self.value.clone() {
                        return Err(Error::Internal("source imbalance".into()));
                    }
                }
                NodeId::Sink => {
                    if *b != self.value {
                        return Err(Error::Internal("sink imbalance".into()));
                    }
                }
                _ => {
                    if !b.is_zero() {
                        return Err(Error::Internal(format!("conservation violated at {id}")));
                    }
                }
            }
        }
        Ok(())
    }
}

/// An A-Z cut: the node set on the source side and its capacity at the λ of
/// the solve that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cut {
    pub source_side: BTreeSet<NodeId>,
    pub capacity: Rat,
}

impl Cut {
    /// True iff the cut is the trivial one separating only the source.
    pub fn is_source_only(&self) -> bool {
        self.source_side.len() == 1
    }

    /// Job nodes on the source side.
    pub fn source_jobs(&self) -> BTreeSet<usize> {
        self.source_side
            .iter()
            .filter_map(|n| match n {
                NodeId::Job(j) => Some(*j),
                _ => None,
            })
            .collect()
    }
}

struct SolverArc {
    from: usize,
    to: usize,
    cap: Rat,
    flow: Rat,
}

/// Dense residual-graph solver. Precedence arcs get a finite sentinel
/// capacity strictly larger than any finite cut, so they can never be
/// saturated or crossed by a minimum cut.
struct Solver<'a> {
    net: &'a FlowNetwork,
    lambda: Rat,
    arcs: Vec<SolverArc>,
    out: Vec<Vec<usize>>,
    into: Vec<Vec<usize>>,
    nodes: usize,
}

impl<'a> Solver<'a> {
    fn new(net: &'a FlowNetwork, lambda: &Rat, hub_caps: Option<&BTreeMap<usize, Rat>>) -> Self {
        let nodes = net.node_count();
        // Strictly greater than m + |F| + λ·w(U), the total finite capacity.
        let sentinel =
            rat((net.machines + net.available.len()) as i64) + lambda * net.total_weight() + Rat::one();
        let mut arcs = Vec::with_capacity(net.arcs.len());
        let mut out = vec![Vec::new(); nodes];
        let mut into = vec![Vec::new(); nodes];
        for kind in &net.arcs {
            let cap = match (kind, hub_caps) {
                (ArcKind::HubJob(j), Some(caps)) => caps[j].clone(),
                _ => net
                    .capacity(kind, lambda)
                    .unwrap_or_else(|| sentinel.clone()),
            };
            let (from, to) = kind.endpoints();
            let (from, to) = (net.node_index(from), net.node_index(to));
            out[from].push(arcs.len());
            into[to].push(arcs.len());
            arcs.push(SolverArc {
                from,
                to,
                cap,
                flow: Rat::zero(),
            });
        }
        Solver {
            net,
            lambda: lambda.clone(),
            arcs,
            out,
            into,
            nodes,
        }
    }

    /// Residual neighbors of `node` in ascending node order: (neighbor,
    /// arc id, forward?).
    fn residual_neighbors(&self, node: usize) -> Vec<(usize, usize, bool)> {
        let mut result = Vec::new();
        for &a in &self.out[node] {
            let arc = &self.arcs[a];
            if arc.flow < arc.cap {
                result.push((arc.to, a, true));
            }
        }
        for &a in &self.into[node] {
            let arc = &self.arcs[a];
            if arc.flow > Rat::zero() {
                result.push((arc.from, a, false));
            }
        }
        result.sort_by_key(|&(v, _, _)| v);
        result
    }

    fn dist_from_source(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes];
        dist[0] = Some(0);
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for (v, _, _) in self.residual_neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(dist[u].unwrap() + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Pushes flow along shortest augmenting paths, lexicographically
    /// smallest first, until no augmenting path remains.
    fn run(&mut self) {
        loop {
            let dist_s = self.dist_from_source();
            let sink = self.nodes - 1;
            let Some(total) = dist_s[sink] else { break };
            let dist_t = self.reverse_dist();
            // Lexicographically smallest shortest path: greedy walk keeping
            // to nodes on some shortest path.
            let mut path: Vec<(usize, bool)> = Vec::new();
            let mut cur = 0usize;
            while cur != sink {
                let next = self
                    .residual_neighbors(cur)
                    .into_iter()
                    .find(|&(v, _, _)| {
                        dist_s[v] == Some(dist_s[cur].unwrap() + 1)
                            && dist_t[v].map(|d| dist_s[v].unwrap() + d) == Some(total)
                    })
                    .expect("greedy walk stays on a shortest path");
                path.push((next.1, next.2));
                cur = next.0;
            }
            let mut bottleneck: Option<Rat> = None;
            for &(a, forward) in &path {
                let arc = &self.arcs[a];
                let residual = if forward {
                    arc.cap.clone() - &arc.flow
                } else {
                    arc.flow.clone()
                };
                if bottleneck.as_ref().is_none_or(|b| residual < *b) {
                    bottleneck = Some(residual);
                }
            }
            let delta = bottleneck.expect("augmenting path is nonempty");
            for &(a, forward) in &path {
                if forward {
                    self.arcs[a].flow += &delta;
                } else {
                    self.arcs[a].flow -= &delta;
                }
            }
        }
    }

    fn reverse_dist(&self) -> Vec<Option<usize>> {
        let sink = self.nodes - 1;
        let mut dist = vec![None; self.nodes];
        dist[sink] = Some(0);
        let mut queue = VecDeque::from([sink]);
        while let Some(v) = queue.pop_front() {
            let mut preds = Vec::new();
            for &a in &self.into[v] {
                let arc = &self.arcs[a];
                if arc.flow < arc.cap {
                    preds.push(arc.from);
                }
            }
            for &a in &self.out[v] {
                let arc = &self.arcs[a];
                if arc.flow > Rat::zero() {
                    preds.push(arc.to);
                }
            }
            for u in preds {
                if dist[u].is_none() {
                    dist[u] = Some(dist[v].unwrap() + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    fn value(&self) -> Rat {
        self.arcs[0].flow.clone()
    }

    /// Minimal min cut: nodes reachable from the source in the residual
    /// graph.
    fn min_cut(&self) -> Cut {
        let dist = self.dist_from_source();
        let side: BTreeSet<usize> = (0..self.nodes).filter(|&v| dist[v].is_some()).collect();
        self.cut_from_side(side)
    }

    /// Maximal min cut: complement of the nodes that can still reach the
    /// sink in the residual graph.
    fn max_cut(&self) -> Cut {
        let dist = self.reverse_dist();
        let side: BTreeSet<usize> = (0..self.nodes).filter(|&v| dist[v].is_none()).collect();
        self.cut_from_side(side)
    }

    fn cut_from_side(&self, side: BTreeSet<usize>) -> Cut {
        let mut capacity = Rat::zero();
        for (arc, kind) in self.arcs.iter().zip(&self.net.arcs) {
            if side.contains(&arc.from) && !side.contains(&arc.to) {
                assert!(
                    !matches!(kind, ArcKind::Prec(..)),
                    "precedence arc must never cross a minimum cut"
                );
                capacity += &arc.cap;
            }
        }
        Cut {
            source_side: side.into_iter().map(|v| self.net.node_at(v)).collect(),
            capacity,
        }
    }

    fn into_flow(self) -> Flow {
        let value = self.value();
        let arc_flows = self
            .net
            .arcs
            .iter()
            .zip(&self.arcs)
            .map(|(kind, arc)| {
                let cap = self.net.capacity(kind, &self.lambda);
                (*kind, arc.flow.clone(), cap)
            })
            .collect();
        Flow {
            lambda: self.lambda.clone(),
            value,
            arc_flows,
        }
    }
}

/// Canonical maximum flow and minimal minimum cut at the given λ.
pub fn max_flow(net: &FlowNetwork, lambda: &Rat) -> (Flow, Cut) {
    let (flow, min_cut, _) = solve(net, lambda, None);
    (flow, min_cut)
}

/// Like [`max_flow`], but additionally returns the maximal minimum cut (the
/// complement of the residual nodes that still reach the sink). At the
/// breakpoint λ* this is the second minimum cut, crossed only by hub and
/// sink arcs.
pub fn max_flow_with_cuts(net: &FlowNetwork, lambda: &Rat) -> (Flow, Cut, Cut) {
    solve(net, lambda, None)
}

/// Canonical maximum flow guided by per-available-job rate targets: the hub
/// arcs are first capped at the targets and flow is pushed to that profile;
/// if the targets are not realizable the caps are relaxed back to 1 and the
/// flow is augmented to maximum.
pub fn max_flow_guided(
    net: &FlowNetwork,
    lambda: &Rat,
    targets: &BTreeMap<usize, Rat>,
) -> (Flow, Cut) {
    let (flow, cut, _) = solve(net, lambda, Some(targets));
    (flow, cut)
}

fn solve(net: &FlowNetwork, lambda: &Rat, targets: Option<&BTreeMap<usize, Rat>>) -> (Flow, Cut, Cut) {
    let mut solver = Solver::new(net, lambda, targets);
    solver.run();
    if targets.is_some() {
        // Stage two: relax the hub caps to their true capacity of 1 and
        // finish augmenting. When the targets are realizable this is a
        // no-op.
        for (arc, kind) in solver.arcs.iter_mut().zip(&net.arcs) {
            if matches!(kind, ArcKind::HubJob(_)) {
                arc.cap = Rat::one();
            }
        }
        solver.run();
    }
    let min_cut = solver.min_cut();
    let max_cut = solver.max_cut();
    let flow = solver.into_flow();
    debug_assert!(flow.validate(net).is_ok());
    debug_assert_eq!(flow.value, min_cut.capacity, "max-flow/min-cut certificate");
    debug_assert_eq!(flow.value, max_cut.capacity);
    (flow, min_cut, max_cut)
}

/// Result of the largest-breakpoint search.
#[derive(Clone, Debug)]
pub struct Breakpoint {
    /// λ* — the smallest λ at which the minimum cut capacity reaches m.
    pub lambda: Rat,
    /// π = 1/λ*.
    pub price: Rat,
    /// Number of Newton updates performed (at most |U|).
    pub newton_updates: usize,
}

/// Finds the price π = 1/λ* by discrete Newton iteration.
///
/// Starting from λ = m/w(U), where the all-sink cut costs exactly m, each
/// step solves a max flow; if the minimum cut capacity is m the search is
/// done, otherwise the cut's capacity is an affine function a + b·λ (b = the
/// weight of its source-side jobs) and the next iterate is λ = (m − a)/b.
/// Iterates strictly increase and the slope b strictly decreases, so the
/// search ends after at most |U| updates.
pub fn largest_breakpoint(net: &FlowNetwork) -> Result<Breakpoint> {
    let m = net.machines;
    assert!(
        net.available.len() > m,
        "price search requires more available jobs than machines"
    );
    let total = net.total_weight();
    if total.is_zero() {
        return Err(Error::DegeneratePrice);
    }
    let m_rat = rat(m as i64);
    let mut lambda = m_rat.clone() / &total;
    let mut updates = 0;
    loop {
        let (_, cut) = max_flow(net, &lambda);
        if cut.capacity == m_rat {
            return Ok(Breakpoint {
                price: Rat::one() / &lambda,
                lambda,
                newton_updates: updates,
            });
        }
        debug_assert!(cut.capacity < m_rat);
        let source_jobs = cut.source_jobs();
        let slope: Rat = source_jobs.iter().map(|j| net.weights[j].clone()).sum();
        if slope.is_zero() {
            // A constant cut below m: the maximum flow saturates below the
            // machine count for every λ, so no finite price exists.
            return Err(Error::PriceSaturated { lambda });
        }
        let crossing_hubs = net
            .available
            .iter()
            .filter(|j| !source_jobs.contains(j))
            .count();
        let intercept = rat(crossing_hubs as i64);
        let next = (m_rat.clone() - intercept) / slope;
        debug_assert!(next > lambda, "Newton iterates must strictly increase");
        lambda = next;
        updates += 1;
        assert!(
            updates <= net.unfinished.len(),
            "Newton must terminate within |U| updates"
        );
    }
}

/// The price π_t of Algorithm 2: the largest π for which the trivial cut
/// ({A}, rest) is a minimum cut.
pub fn largest_breakpoint_price(net: &FlowNetwork) -> Result<Rat> {
    largest_breakpoint(net).map(|bp| bp.price)
}

/// DOT dump of the network at parameter `lambda`, one arc per line with
/// "flow | capacity" edge labels (capacity `inf` on precedence arcs).
pub fn to_dot(net: &FlowNetwork, lambda: &Rat, flow: Option<&Flow>) -> String {
    let mut out = String::from("digraph flow_network {\n  rankdir=LR;\n");
    for v in 0..net.node_count() {
        let id = net.node_at(v);
        out.push_str(&format!("  \"{id}\";\n"));
    }
    for (i, kind) in net.arcs.iter().enumerate() {
        let (from, to) = kind.endpoints();
        let f = match flow {
            Some(flow) => format_rat(&flow.arc_flows()[i].1),
            None => "0".to_string(),
        };
        let cap = net
            .capacity(kind, lambda)
            .as_ref()
            .map(format_rat)
            .unwrap_or_else(|| "inf".to_string());
        out.push_str(&format!("  \"{from}\" -> \"{to}\" [label=\"{f} | {cap}\"];\n"));
    }
    out.push_str("}\n");
    out
}
