//! Exact solution of the synchronization model.
//!
//! [`branch_and_bound`] runs best-bound search over the binary indicators on
//! top of the LP relaxation in [`lp`]; [`enumerate_oracle`] solves one LP per
//! indicator assignment and exists to cross-check the search on small models.

pub mod lp;
pub mod lu;

use std::collections::BinaryHeap;
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::mip::{MipModel, VarKind};
use crate::network::RailNetwork;
use crate::timetable::{EventTimes, Timetable};

pub use lp::{LpProblem, LpResult, LpStatus, LpWorkspace};

/// An indicator within this of 0 or 1 counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// An overlap above this marks its pair as genuinely active.
pub const ACTIVATION_TOL: f64 = 1e-6;
/// A node whose bound does not beat the incumbent by this is pruned.
const PRUNE_TOL: f64 = 1e-9;
/// Most pairs `enumerate_oracle` will accept (2^cap LP solves).
pub const ENUMERATION_CAP: usize = 12;
const NODE_LOG_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Incumbent proven optimal.
    Optimal,
    /// Search stopped on a budget with an incumbent in hand.
    Feasible,
    /// No indicator assignment admits a feasible timetable.
    Infeasible,
    /// Search stopped on a budget before finding any incumbent.
    Unknown,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub node_limit: usize,
    pub time_limit: Duration,
    pub threads: usize,
    /// Stop once the relative gap between incumbent and best open bound
    /// falls to this value; `0.0` keeps searching until optimality is proven.
    pub gap_limit: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            node_limit: 1_000_000,
            time_limit: Duration::from_secs(1200),
            threads: 1,
            gap_limit: 0.0,
        }
    }
}

/// One line of the search log: the state right after a node was solved.
#[derive(Debug, Clone)]
pub struct NodeRecord {
    pub node: usize,
    pub depth: usize,
    pub bound: f64,
    pub incumbent: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    /// Branch-and-bound nodes solved, the root excluded.
    pub nodes: usize,
    pub lp_iterations: usize,
    pub elapsed: Duration,
    /// First [`NODE_LOG_CAP`] node records.
    pub node_log: Vec<NodeRecord>,
}

/// Canonical per-pair outcome.
#[derive(Debug, Clone, Copy)]
pub struct PairActivation {
    pub active: bool,
    /// Realized overlap seconds (zero when inactive).
    pub sigma: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub status: SolveStatus,
    /// Total synchronized overlap of the incumbent, in seconds.
    pub objective: f64,
    /// Best proven upper bound on the objective.
    pub best_bound: f64,
    /// `(best_bound - objective) / max(1, objective)`.
    pub gap: f64,
    /// Structural variable values of the incumbent (empty without one).
    pub x: Vec<f64>,
    pub pairs: Vec<PairActivation>,
    pub stats: SolveStats,
}

impl Solution {
    fn without_incumbent(status: SolveStatus, best_bound: f64, stats: SolveStats) -> Solution {
        Solution {
            status,
            objective: 0.0,
            best_bound,
            gap: f64::INFINITY,
            x: Vec::new(),
            pairs: Vec::new(),
            stats,
        }
    }
}

fn relative_gap(objective: f64, bound: f64) -> f64 {
    ((bound - objective) / objective.abs().max(1.0)).max(0.0)
}

/// Forces the indicator/overlap invariant on a candidate solution: an
/// indicator is set exactly when its overlap is meaningfully positive, and
/// the overlap of an unset pair is zeroed. Turning an indicator off only
/// loosens its rows (the overlap caps are restored by the zeroing), so
/// feasibility is preserved. Returns the canonical objective.
fn canonicalize(model: &MipModel, x: &mut [f64]) -> f64 {
    for pv in &model.pair_vars {
        if x[pv.sigma.0] > ACTIVATION_TOL {
            x[pv.lambda.0] = 1.0;
        } else {
            x[pv.sigma.0] = 0.0;
            x[pv.lambda.0] = 0.0;
        }
    }
    model.objective_value(x)
}

/// Derives a feasible integer solution from any vector whose *event* values
/// satisfy the operational rows: each pair's indicator follows from the
/// realized departure-to-arrival gap, and its overlap is the exact closed
/// form. The indicator rows then hold by construction — a pair is switched
/// on only when its gap sits inside `[ε, s − ε]`, which is precisely what
/// the gap rows demand, and the four caps equal the closed-form minimum.
/// Used as a free primal heuristic at every search node.
fn closed_form_incumbent(model: &MipModel, x: &[f64]) -> (f64, Vec<f64>) {
    let mut y = x.to_vec();
    for (pair, pv) in model.pairs.iter().zip(&model.pair_vars) {
        let (at, ap) = pair.accel();
        let (bt, bp) = pair.brake();
        let (_, dep_var) = model.event_vars[&(at, ap)];
        let (arr_var, _) = model.event_vars[&(bt, bp)];
        let dep = y[dep_var.0];
        let arr = y[arr_var.0];
        let gap = arr - dep;
        let s = pair.accel_lb + pair.brake_lb;
        if gap >= model.epsilon && gap <= s - model.epsilon {
            y[pv.lambda.0] = 1.0;
            y[pv.sigma.0] = pair
                .accel_lb
                .min(pair.brake_lb)
                .min(s - gap)
                .min(gap);
        } else {
            y[pv.lambda.0] = 0.0;
            y[pv.sigma.0] = 0.0;
        }
    }
    let obj = model.objective_value(&y);
    (obj, y)
}

fn pair_activations(model: &MipModel, x: &[f64]) -> Vec<PairActivation> {
    model
        .pair_vars
        .iter()
        .map(|pv| PairActivation {
            active: x[pv.lambda.0] > 0.5,
            sigma: x[pv.sigma.0],
        })
        .collect()
}

/// Reads the event times of a solution vector back into a timetable.
pub fn extract_timetable(net: &RailNetwork, model: &MipModel, x: &[f64]) -> Result<Timetable> {
    let mut tt = Timetable::zeroed(net);
    for (&(t, p), &(a, d)) in &model.event_vars {
        let pos = net.trains[t.index()]
            .position_of(p)
            .ok_or_else(|| Error::MissingEvent {
                train: net.train_id(t).to_string(),
                platform: net.platform_id(p).to_string(),
            })?;
        tt.set_position(
            t,
            pos,
            EventTimes {
                arrival: x[a.0],
                departure: x[d.0],
            },
        );
    }
    // Guard against a model/network mismatch: every event must be covered.
    for (ti, train) in net.trains.iter().enumerate() {
        for &p in &train.path {
            if !model
                .event_vars
                .contains_key(&(crate::network::TrainIdx(ti as u32), p))
            {
                return Err(Error::MissingEvent {
                    train: train.id.clone(),
                    platform: net.platform_id(p).to_string(),
                });
            }
        }
    }
    Ok(tt)
}

/// Indicator fixes of a node, stored as a parent chain so deep trees stay
/// cheap to enqueue.
#[derive(Debug)]
struct FixLink {
    pair: usize,
    value: bool,
    parent: Option<Arc<FixLink>>,
}

fn collect_fixes(link: &Option<Arc<FixLink>>) -> Vec<(usize, bool)> {
    let mut out = Vec::new();
    let mut cur = link.as_ref();
    while let Some(l) = cur {
        out.push((l.pair, l.value));
        cur = l.parent.as_ref();
    }
    out.reverse();
    out
}

struct HeapNode {
    bound: f64,
    id: usize,
    depth: usize,
    fixes: Option<Arc<FixLink>>,
}

impl PartialEq for HeapNode {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound && self.id == other.id
    }
}
impl Eq for HeapNode {}
impl PartialOrd for HeapNode {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapNode {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Max-heap: highest bound first, then lowest id.
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Incumbent {
    objective: f64,
    x: Vec<f64>,
}

struct Shared {
    heap: BinaryHeap<HeapNode>,
    incumbent: Option<Incumbent>,
    nodes: usize,
    next_id: usize,
    lp_iterations: usize,
    node_log: Vec<NodeRecord>,
    /// Bound of the node each worker is currently solving.
    inflight: Vec<Option<f64>>,
    active: usize,
    stopped: bool,
    budget_hit: bool,
}

impl Shared {
    fn incumbent_objective(&self) -> Option<f64> {
        self.incumbent.as_ref().map(|i| i.objective)
    }

    /// Largest bound of any unexplored node: heap entries plus nodes being
    /// solved (or retained for diving) by workers.
    fn frontier_bound(&self) -> f64 {
        let mut b = f64::NEG_INFINITY;
        if let Some(top) = self.heap.peek() {
            b = b.max(top.bound);
        }
        for inflight in self.inflight.iter().flatten() {
            b = b.max(*inflight);
        }
        b
    }
}

/// Maps pair-indexed fixes to LP column fixes.
fn lambda_fixes(model: &MipModel, fixes: &[(usize, bool)]) -> Vec<(usize, f64)> {
    fixes
        .iter()
        .map(|&(pair, v)| (model.pair_vars[pair].lambda.0, if v { 1.0 } else { 0.0 }))
        .collect()
}

/// The most fractional unfixed indicator (closest to one half, ties to the
/// lowest pair index), if any lies strictly between the integrality cutoffs.
fn branch_pair(model: &MipModel, x: &[f64], fixed: &[(usize, bool)]) -> Option<usize> {
    let mut is_fixed = vec![false; model.pair_vars.len()];
    for &(p, _) in fixed {
        is_fixed[p] = true;
    }
    let mut best: Option<(usize, f64)> = None;
    for (k, pv) in model.pair_vars.iter().enumerate() {
        if is_fixed[k] {
            continue;
        }
        let v = x[pv.lambda.0];
        if (v - v.round()).abs() <= INTEGRALITY_TOL {
            continue;
        }
        let dist = (v - 0.5).abs();
        if best.map_or(true, |(_, d)| dist < d) {
            best = Some((k, dist));
        }
    }
    best.map(|(k, _)| k)
}

/// Solves the LP with the given pair fixes plus every *unfixed* indicator
/// pinned to its rounded relaxation value, producing an exact incumbent
/// candidate for that integral assignment.
fn solve_rounded(
    model: &MipModel,
    prob: &LpProblem,
    ws: &mut LpWorkspace,
    fixed: &[(usize, bool)],
    relax_x: &[f64],
) -> Result<LpResult> {
    let mut fixes = lambda_fixes(model, fixed);
    let mut covered = vec![false; model.pair_vars.len()];
    for &(p, _) in fixed {
        covered[p] = true;
    }
    for (k, pv) in model.pair_vars.iter().enumerate() {
        if !covered[k] {
            fixes.push((pv.lambda.0, relax_x[pv.lambda.0].round()));
        }
    }
    ws.solve(prob, &fixes)
}

/// Best-bound branch-and-bound over the pair indicators. Each popped node
/// re-solves its LP relaxation (warm-started); integral relaxations are
/// certified by an exact re-solve with every indicator fixed, then
/// canonicalized. Deterministic at one thread; at any thread count the
/// returned objective is the same, only the node order varies.
pub fn branch_and_bound(model: &MipModel, opts: &SolveOptions) -> Result<Solution> {
    let start = Instant::now();
    let prob = LpProblem::from_model(model);
    let threads = opts.threads.max(1);

    let mut stats = SolveStats::default();
    let mut root_ws = LpWorkspace::new(&prob);
    let root = root_ws.solve(&prob, &[])?;
    stats.lp_iterations += root.iterations;

    match root.status {
        LpStatus::Infeasible => {
            stats.elapsed = start.elapsed();
            return Ok(Solution::without_incumbent(
                SolveStatus::Infeasible,
                f64::NEG_INFINITY,
                stats,
            ));
        }
        LpStatus::Unbounded => {
            return Err(Error::Numerical(
                "relaxation is unbounded; overlap variables must be capped".to_string(),
            ));
        }
        LpStatus::Optimal => {}
    }

    let shared = Mutex::new(Shared {
        heap: BinaryHeap::new(),
        incumbent: None,
        nodes: 0,
        next_id: 0,
        lp_iterations: stats.lp_iterations,
        node_log: Vec::new(),
        inflight: vec![None; threads],
        active: 0,
        stopped: false,
        budget_hit: false,
    });
    let idle = Condvar::new();

    // Free incumbent from the root relaxation's event times.
    {
        let (obj, y) = closed_form_incumbent(model, &root.x);
        let mut sh = shared.lock().unwrap();
        sh.incumbent = Some(Incumbent { objective: obj, x: y });
    }

    // Root: an integral relaxation certified by an exact re-solve, or a
    // root incumbent matching the root bound, closes the search immediately.
    let mut root_closed = false;
    if branch_pair(model, &root.x, &[]).is_none() {
        let cand = solve_rounded(model, &prob, &mut root_ws, &[], &root.x)?;
        let mut sh = shared.lock().unwrap();
        sh.lp_iterations += cand.iterations;
        if cand.status == LpStatus::Optimal {
            let mut x = cand.x;
            let obj = canonicalize(model, &mut x);
            if sh.incumbent_objective().map_or(true, |cur| obj > cur) {
                sh.incumbent = Some(Incumbent { objective: obj, x });
            }
            root_closed = true;
        }
        // An infeasible rounding re-solve is inconclusive: branch normally.
    }
    {
        let mut sh = shared.lock().unwrap();
        if !root_closed {
            root_closed = root.objective <= sh.incumbent_objective().unwrap() + PRUNE_TOL;
        }
        if root_closed {
            let inc = sh.incumbent.take().unwrap();
            let pairs = pair_activations(model, &inc.x);
            return Ok(Solution {
                status: SolveStatus::Optimal,
                objective: inc.objective,
                best_bound: inc.objective,
                gap: 0.0,
                x: inc.x,
                pairs,
                stats: SolveStats {
                    nodes: 0,
                    lp_iterations: sh.lp_iterations,
                    elapsed: start.elapsed(),
                    node_log: Vec::new(),
                },
            });
        }
        let pair = branch_pair(model, &root.x, &[]).unwrap_or(0);
        for value in [false, true] {
            let id = sh.next_id;
            sh.next_id += 1;
            sh.heap.push(HeapNode {
                bound: root.objective,
                id,
                depth: 1,
                fixes: Some(Arc::new(FixLink {
                    pair,
                    value,
                    parent: None,
                })),
            });
        }
    }

    let worker = |wid: usize| -> Result<()> {
        let mut ws = LpWorkspace::new(&prob);
        // A child retained from the previous branching for an immediate dive;
        // while held it stays counted in `active` and `inflight`.
        let mut dive: Option<HeapNode> = None;
        loop {
            // Take a node (or finish).
            let node = {
                let mut sh = shared.lock().unwrap();
                loop {
                    if sh.stopped {
                        return Ok(());
                    }
                    if sh.nodes >= opts.node_limit || start.elapsed() >= opts.time_limit {
                        sh.stopped = true;
                        sh.budget_hit = true;
                        idle.notify_all();
                        return Ok(());
                    }
                    let inc_obj = sh.incumbent_objective();
                    if opts.gap_limit > 0.0 {
                        if let Some(inc) = inc_obj {
                            // Only an early stop: exhausted searches fall
                            // through and finish as proven optima.
                            let frontier = sh.frontier_bound();
                            if frontier > inc + PRUNE_TOL
                                && relative_gap(inc, frontier) <= opts.gap_limit
                            {
                                sh.stopped = true;
                                sh.budget_hit = true;
                                idle.notify_all();
                                return Ok(());
                            }
                        }
                    }
                    if let Some(n) = dive.take() {
                        if inc_obj.map_or(false, |inc| n.bound <= inc + PRUNE_TOL) {
                            // The dive child died while we were releasing the
                            // lock; hand our slot back and fall through to
                            // the heap.
                            sh.active -= 1;
                            sh.inflight[wid] = None;
                            continue;
                        }
                        sh.nodes += 1;
                        sh.inflight[wid] = Some(n.bound);
                        break n;
                    }
                    match sh.heap.pop() {
                        Some(n) => {
                            if let Some(inc) = inc_obj {
                                if n.bound <= inc + PRUNE_TOL {
                                    // Nothing left can beat the incumbent:
                                    // the heap is bound-sorted.
                                    sh.heap.clear();
                                    continue;
                                }
                            }
                            sh.nodes += 1;
                            sh.active += 1;
                            sh.inflight[wid] = Some(n.bound);
                            break n;
                        }
                        None => {
                            if sh.active == 0 {
                                sh.stopped = true;
                                idle.notify_all();
                                return Ok(());
                            }
                            sh = idle.wait(sh).unwrap();
                        }
                    }
                }
            };

            let fixed = collect_fixes(&node.fixes);
            let res = ws.solve(&prob, &lambda_fixes(model, &fixed))?;

            // Work out the node's consequences before re-locking.
            enum Outcome {
                Pruned,
                Incumbent(f64, Vec<f64>),
                Branch {
                    pair: usize,
                    bound: f64,
                    dive_value: bool,
                },
            }
            let mut lp_iters = res.iterations;
            // Any feasible relaxation donates a rounded-off integer solution
            // for free (the event times stay put, indicators follow the gaps).
            let heur = match res.status {
                LpStatus::Optimal => Some(closed_form_incumbent(model, &res.x)),
                _ => None,
            };
            let outcome = match res.status {
                LpStatus::Infeasible => Outcome::Pruned,
                LpStatus::Unbounded => {
                    return Err(Error::Numerical(
                        "node relaxation unbounded".to_string(),
                    ))
                }
                LpStatus::Optimal => match branch_pair(model, &res.x, &fixed) {
                    Some(pair) => Outcome::Branch {
                        pair,
                        bound: res.objective,
                        dive_value: res.x[model.pair_vars[pair].lambda.0] >= 0.5,
                    },
                    None => {
                        let cand = solve_rounded(model, &prob, &mut ws, &fixed, &res.x)?;
                        lp_iters += cand.iterations;
                        match cand.status {
                            LpStatus::Optimal => {
                                let mut x = cand.x;
                                let obj = canonicalize(model, &mut x);
                                Outcome::Incumbent(obj, x)
                            }
                            _ => {
                                // Rounding broke feasibility: branch on the
                                // lowest unfixed pair to keep completeness.
                                let covered: Vec<bool> = {
                                    let mut c = vec![false; model.pair_vars.len()];
                                    for &(p, _) in &fixed {
                                        c[p] = true;
                                    }
                                    c
                                };
                                match covered.iter().position(|&c| !c) {
                                    Some(pair) => Outcome::Branch {
                                        pair,
                                        bound: res.objective,
                                        dive_value: res.x[model.pair_vars[pair].lambda.0]
                                            >= 0.5,
                                    },
                                    None => Outcome::Pruned,
                                }
                            }
                        }
                    }
                },
            };

            let mut sh = shared.lock().unwrap();
            sh.lp_iterations += lp_iters;
            let node_no = sh.nodes;
            if let Some((obj, x)) = heur {
                if sh.incumbent_objective().map_or(true, |cur| obj > cur) {
                    sh.incumbent = Some(Incumbent { objective: obj, x });
                }
            }
            let mut retained = false;
            match outcome {
                Outcome::Pruned => {}
                Outcome::Incumbent(obj, x) => {
                    if sh.incumbent_objective().map_or(true, |cur| obj > cur) {
                        sh.incumbent = Some(Incumbent { objective: obj, x });
                    }
                }
                Outcome::Branch {
                    pair,
                    bound,
                    dive_value,
                } => {
                    let inc = sh.incumbent_objective();
                    if inc.map_or(true, |i| bound > i + PRUNE_TOL) {
                        // The child matching the relaxation's rounding is kept
                        // for an immediate warm-started dive; its sibling goes
                        // to the heap.
                        for value in [false, true] {
                            let id = sh.next_id;
                            sh.next_id += 1;
                            let child = HeapNode {
                                bound,
                                id,
                                depth: node.depth + 1,
                                fixes: Some(Arc::new(FixLink {
                                    pair,
                                    value,
                                    parent: node.fixes.clone(),
                                })),
                            };
                            if value == dive_value {
                                dive = Some(child);
                            } else {
                                sh.heap.push(child);
                            }
                        }
                        retained = true;
                        sh.inflight[wid] = Some(bound);
                    }
                }
            }
            if !retained {
                sh.active -= 1;
                sh.inflight[wid] = None;
            }
            if sh.node_log.len() < NODE_LOG_CAP {
                let rec = NodeRecord {
                    node: node_no,
                    depth: node.depth,
                    bound: node.bound,
                    incumbent: sh.incumbent_objective(),
                };
                sh.node_log.push(rec);
            }
            idle.notify_all();
        }
    };

    let worker_result: Result<()> = if threads == 1 {
        worker(0)
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|wid| scope.spawn(move || worker(wid)))
                .collect();
            let mut first_err = Ok(());
            for h in handles {
                match h.join() {
                    Ok(Ok(())) => {}
                    Ok(Err(e)) => {
                        if first_err.is_ok() {
                            first_err = Err(e);
                        }
                    }
                    Err(_) => {
                        if first_err.is_ok() {
                            first_err = Err(Error::Numerical("worker panicked".to_string()));
                        }
                    }
                }
            }
            first_err
        })
    };
    worker_result?;

    let sh = shared.into_inner().unwrap();
    let frontier = sh.frontier_bound();
    let stats = SolveStats {
        nodes: sh.nodes,
        lp_iterations: sh.lp_iterations,
        elapsed: start.elapsed(),
        node_log: sh.node_log,
    };
    let proven = !sh.budget_hit;
    match sh.incumbent {
        Some(inc) => {
            let best_bound = if proven {
                inc.objective
            } else {
                frontier.max(inc.objective)
            };
            let pairs = pair_activations(model, &inc.x);
            Ok(Solution {
                status: if proven {
                    SolveStatus::Optimal
                } else {
                    SolveStatus::Feasible
                },
                objective: inc.objective,
                best_bound,
                gap: relative_gap(inc.objective, best_bound),
                x: inc.x,
                pairs,
                stats,
            })
        }
        None => {
            let status = if proven {
                SolveStatus::Infeasible
            } else {
                SolveStatus::Unknown
            };
            Ok(Solution::without_incumbent(status, frontier, stats))
        }
    }
}

/// Solves one LP per indicator assignment (2^pairs in ascending mask order)
/// and returns the best, canonicalized exactly like [`branch_and_bound`].
/// Rejects models with more than [`ENUMERATION_CAP`] pairs.
pub fn enumerate_oracle(model: &MipModel) -> Result<Solution> {
    let start = Instant::now();
    let k = model.pair_vars.len();
    if k > ENUMERATION_CAP {
        return Err(Error::TooManyPairs {
            count: k,
            cap: ENUMERATION_CAP,
        });
    }
    let prob = LpProblem::from_model(model);
    let mut ws = LpWorkspace::new(&prob);
    let mut best: Option<Incumbent> = None;
    let mut lp_iterations = 0usize;
    let mut solved = 0usize;

    for mask in 0u64..(1u64 << k) {
        let fixes: Vec<(usize, f64)> = (0..k)
            .map(|p| {
                (
                    model.pair_vars[p].lambda.0,
                    if mask >> p & 1 == 1 { 1.0 } else { 0.0 },
                )
            })
            .collect();
        let res = ws.solve(&prob, &fixes)?;
        lp_iterations += res.iterations;
        solved += 1;
        if res.status != LpStatus::Optimal {
            continue;
        }
        let mut x = res.x;
        let obj = canonicalize(model, &mut x);
        if best.as_ref().map_or(true, |b| obj > b.objective) {
            best = Some(Incumbent { objective: obj, x });
        }
    }

    let stats = SolveStats {
        nodes: solved,
        lp_iterations,
        elapsed: start.elapsed(),
        node_log: Vec::new(),
    };
    match best {
        Some(inc) => {
            let pairs = pair_activations(model, &inc.x);
            Ok(Solution {
                status: SolveStatus::Optimal,
                objective: inc.objective,
                best_bound: inc.objective,
                gap: 0.0,
                x: inc.x,
                pairs,
                stats,
            })
        }
        None => Ok(Solution::without_incumbent(
            SolveStatus::Infeasible,
            f64::NEG_INFINITY,
            stats,
        )),
    }
}

/// Reads the overlap value of each pair straight out of a solution vector.
pub fn pair_sigmas(model: &MipModel, x: &[f64]) -> Vec<f64> {
    model.pair_vars.iter().map(|pv| x[pv.sigma.0]).collect()
}

/// Convenience: which structural column is which, for reporting.
pub fn var_kind(model: &MipModel, col: usize) -> VarKind {
    model.vars[col].kind
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::tests::small_instance;
    use crate::mip::{build_model, BigMMode};
    use crate::pairing::build_sync_pairs;
    use crate::timetable::validate_timetable;

    fn small_model() -> (crate::instance::Instance, MipModel) {
        let inst = small_instance();
        let pairs = build_sync_pairs(&inst.network, &inst.params, &inst.initial).unwrap();
        assert_eq!(pairs.right.len(), 1);
        assert_eq!(pairs.left.len(), 1);
        let model =
            build_model(&inst.network, &inst.params, &pairs, &inst.initial, BigMMode::Auto)
                .unwrap();
        (inst, model)
    }

    /// Two mutually exclusive pairs, each worth up to the 15 s acceleration
    /// floor: the optimum synchronizes exactly one of them completely.
    #[test]
    fn small_instance_optimum_is_known() {
        let (_, model) = small_model();
        let sol = branch_and_bound(&model, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.objective - 15.0).abs() < 1e-6, "{}", sol.objective);
        assert_eq!(sol.pairs.iter().filter(|p| p.active).count(), 1);
        assert_eq!(sol.gap, 0.0);
    }

    #[test]
    fn search_matches_exhaustive_enumeration() {
        let (_, model) = small_model();
        let bb = branch_and_bound(&model, &SolveOptions::default()).unwrap();
        let en = enumerate_oracle(&model).unwrap();
        assert_eq!(bb.status, SolveStatus::Optimal);
        assert_eq!(en.status, SolveStatus::Optimal);
        assert!(
            (bb.objective - en.objective).abs() < 1e-6,
            "search {} vs enumeration {}",
            bb.objective,
            en.objective
        );
    }

    #[test]
    fn extracted_timetable_is_feasible_and_matches_overlaps() {
        let (inst, model) = small_model();
        let sol = branch_and_bound(&model, &SolveOptions::default()).unwrap();
        let tt = extract_timetable(&inst.network, &model, &sol.x).unwrap();
        let report = validate_timetable(&inst.network, &inst.params, &tt).unwrap();
        assert!(report.is_feasible(), "{report}");

        // Each active pair realizes exactly the closed-form overlap of its
        // events; inactive pairs carry zero.
        for (pair, act) in model.pairs.iter().zip(&sol.pairs) {
            let (at, ap) = pair.accel();
            let (bt, bp) = pair.brake();
            let dep = tt.at(&inst.network, at, ap).unwrap().departure;
            let arr = tt.at(&inst.network, bt, bp).unwrap().arrival;
            let closed =
                crate::timetable::overlap_closed_form(dep, arr, pair.accel_lb, pair.brake_lb);
            if act.active {
                assert!((act.sigma - closed).abs() < 1e-6, "{} vs {closed}", act.sigma);
            } else {
                assert_eq!(act.sigma, 0.0);
            }
        }
    }

    #[test]
    fn multithreaded_search_agrees_with_single_thread() {
        let (_, model) = small_model();
        let one = branch_and_bound(&model, &SolveOptions::default()).unwrap();
        let two = branch_and_bound(
            &model,
            &SolveOptions {
                threads: 2,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert_eq!(one.status, two.status);
        assert!((one.objective - two.objective).abs() < 1e-6);
    }

    #[test]
    fn node_budget_of_zero_stops_after_root() {
        let (_, model) = small_model();
        let sol = branch_and_bound(
            &model,
            &SolveOptions {
                node_limit: 0,
                ..SolveOptions::default()
            },
        )
        .unwrap();
        assert_eq!(sol.stats.nodes, 0);
        // The root relaxation here is fractional, so nothing is proven.
        assert!(matches!(
            sol.status,
            SolveStatus::Feasible | SolveStatus::Unknown
        ));
    }

    #[test]
    fn model_without_pairs_is_trivially_optimal() {
        let inst = small_instance();
        let pairs = crate::pairing::SyncPairs::default();
        let model =
            build_model(&inst.network, &inst.params, &pairs, &inst.initial, BigMMode::Auto)
                .unwrap();
        let sol = branch_and_bound(&model, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_eq!(sol.objective, 0.0);
        assert_eq!(sol.stats.nodes, 0);
    }

    #[test]
    fn infeasible_fixture_reports_infeasible() {
        let mut inst = small_instance();
        // Demand a travel time no schedule can reach: the per-leg windows
        // cap the total at 190 + 60 + 190.
        inst.params
            .travel
            .insert(crate::network::TrainIdx(0), crate::network::Window::new(0.0, 100.0));
        let pairs = build_sync_pairs(&inst.network, &inst.params, &inst.initial).unwrap();
        let model =
            build_model(&inst.network, &inst.params, &pairs, &inst.initial, BigMMode::Auto)
                .unwrap();
        let sol = branch_and_bound(&model, &SolveOptions::default()).unwrap();
        assert_eq!(sol.status, SolveStatus::Infeasible);
        let en = enumerate_oracle(&model).unwrap();
        assert_eq!(en.status, SolveStatus::Infeasible);
    }
}
