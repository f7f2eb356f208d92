//! Bounded-variable revised simplex over the LP relaxation.
//!
//! Rows are held as equalities with one slack each (`<=` rows get a slack in
//! `[0, inf)`, `>=` rows one in `(-inf, 0]`), so the working matrix is
//! `[A | I]` and any slack set is a valid starting basis. Feasibility is
//! reached with a composite phase 1 that minimizes the total bound violation
//! of the basic variables; optimality by Dantzig pricing with a switch to
//! Bland's rule after a run of degenerate steps, which rules out cycling.
//! The basis inverse is kept as a sparse LU factorization plus a product of
//! eta updates, refactored on a fixed cadence.
//!
//! Everything is deterministic: scans run in index order and ties resolve to
//! the lowest index, so repeated solves give bit-identical results.

use crate::error::{Error, Result};
use crate::mip::{MipModel, Sense};
use crate::solver::lu::{factorize, LuScratch, SparseCols, SparseLu};

/// A basic value further than this outside its bound counts as infeasible;
/// final solutions respect rows and bounds to this tolerance.
pub const FEAS_TOL: f64 = 1e-7;
/// Reduced costs within this of zero are treated as zero.
pub const DUAL_TOL: f64 = 1e-9;
/// Smallest acceptable pivot magnitude.
const PIVOT_TOL: f64 = 1e-8;
/// Ratio-test entries within this of the minimum tie for stability selection.
const RATIO_TOL: f64 = 1e-9;
/// Column entries below this are ignored in the ratio test.
const ZERO_TOL: f64 = 1e-11;
const REFACTOR_EVERY: usize = 64;
/// Degenerate steps in a row before switching to Bland's rule.
const BLAND_AFTER: usize = 40;
const MAX_ITER: usize = 500_000;

/// The LP data in computational form, shared read-only between solves (and
/// between worker threads).
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub nstruct: usize,
    pub nrows: usize,
    /// Structural columns: `cols[j]` lists `(row, coeff)`.
    pub cols: SparseCols,
    /// Bounds over structurals then slacks (length `nstruct + nrows`).
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub rhs: Vec<f64>,
    /// Maximized objective over structurals.
    pub obj: Vec<f64>,
}

impl LpProblem {
    pub fn from_model(model: &MipModel) -> LpProblem {
        let nstruct = model.vars.len();
        let nrows = model.rows.len();
        let mut cols: SparseCols = vec![Vec::new(); nstruct];
        for (r, row) in model.rows.iter().enumerate() {
            for &(v, c) in &row.terms {
                cols[v.0].push((r, c));
            }
        }
        let mut lo = Vec::with_capacity(nstruct + nrows);
        let mut hi = Vec::with_capacity(nstruct + nrows);
        for v in &model.vars {
            lo.push(v.lo);
            hi.push(v.hi);
        }
        for row in &model.rows {
            match row.sense {
                Sense::Le => {
                    lo.push(0.0);
                    hi.push(f64::INFINITY);
                }
                Sense::Ge => {
                    lo.push(f64::NEG_INFINITY);
                    hi.push(0.0);
                }
            }
        }
        let mut obj = vec![0.0; nstruct];
        for &(v, c) in &model.objective {
            obj[v.0] = c;
        }
        LpProblem {
            nstruct,
            nrows,
            cols,
            lo,
            hi,
            rhs: model.rows.iter().map(|r| r.rhs).collect(),
            obj,
        }
    }

    fn col_dot(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.nstruct {
            self.cols[j].iter().map(|&(r, c)| c * y[r]).sum()
        } else {
            y[j - self.nstruct]
        }
    }

    /// Scatters column `j` into the dense row-space buffer.
    fn col_scatter(&self, j: usize, out: &mut [f64]) {
        if j < self.nstruct {
            for &(r, c) in &self.cols[j] {
                out[r] += c;
            }
        } else {
            out[j - self.nstruct] += 1.0;
        }
    }

    fn col_nnz(&self, j: usize) -> usize {
        if j < self.nstruct {
            self.cols[j].len()
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpResult {
    pub status: LpStatus,
    /// Objective in the maximize sense ([`LpStatus::Optimal`] only).
    pub objective: f64,
    /// Structural variable values ([`LpStatus::Optimal`] only).
    pub x: Vec<f64>,
    pub iterations: usize,
    pub phase1_iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic(usize),
    AtLo,
    AtUp,
}

/// One basis update: replacing the basic variable at position `r` with a
/// column whose basis representation had diagonal `diag` and off-diagonal
/// entries `off`.
#[derive(Debug, Clone)]
struct Eta {
    r: usize,
    diag: f64,
    off: Vec<(usize, f64)>,
}

fn ftran_full(lu: &SparseLu, etas: &[Eta], b: &[f64], x: &mut Vec<f64>, work: &mut Vec<f64>) {
    lu.ftran(b, x, work);
    for eta in etas {
        let t = x[eta.r] / eta.diag;
        if t != 0.0 {
            for &(i, h) in &eta.off {
                x[i] -= h * t;
            }
        }
        x[eta.r] = t;
    }
}

fn btran_full(
    lu: &SparseLu,
    etas: &[Eta],
    c: &[f64],
    y: &mut Vec<f64>,
    work: &mut Vec<f64>,
    cwork: &mut Vec<f64>,
) {
    cwork.clear();
    cwork.extend_from_slice(c);
    for eta in etas.iter().rev() {
        let mut s = cwork[eta.r];
        for &(i, h) in &eta.off {
            s -= h * cwork[i];
        }
        cwork[eta.r] = s / eta.diag;
    }
    lu.btran(cwork, y, work);
}

/// Reusable simplex state: basis, bound statuses, factorization and scratch.
/// Re-solving after a bound change warm-starts from the previous basis.
#[derive(Debug)]
pub struct LpWorkspace {
    state: Vec<VarState>,
    /// Variable basic at each row position.
    basis: Vec<usize>,
    x_basic: Vec<f64>,
    /// Effective bounds of the current solve (problem bounds plus fixes).
    lo: Vec<f64>,
    hi: Vec<f64>,
    lu: Option<SparseLu>,
    etas: Vec<Eta>,
    lu_scratch: LuScratch,
    // Dense scratch buffers.
    buf_b: Vec<f64>,
    buf_w: Vec<f64>,
    buf_y: Vec<f64>,
    buf_cb: Vec<f64>,
    buf_t1: Vec<f64>,
    buf_t2: Vec<f64>,
}

enum Blocker {
    /// The entering variable reaches its own opposite bound.
    Flip,
    /// Basic position `pos` reaches `lo` (`at_up = false`) or `hi` (`true`).
    Basic { pos: usize, at_up: bool },
}

impl LpWorkspace {
    pub fn new(prob: &LpProblem) -> LpWorkspace {
        let mut ws = LpWorkspace {
            state: Vec::new(),
            basis: Vec::new(),
            x_basic: Vec::new(),
            lo: Vec::new(),
            hi: Vec::new(),
            lu: None,
            etas: Vec::new(),
            lu_scratch: LuScratch::default(),
            buf_b: Vec::new(),
            buf_w: Vec::new(),
            buf_y: Vec::new(),
            buf_cb: Vec::new(),
            buf_t1: Vec::new(),
            buf_t2: Vec::new(),
        };
        ws.lo.extend_from_slice(&prob.lo);
        ws.hi.extend_from_slice(&prob.hi);
        ws.reset_basis(prob);
        ws
    }

    /// All-slack basis; structurals rest at their finite bound (the lower one
    /// when both are finite).
    fn reset_basis(&mut self, prob: &LpProblem) {
        let nv = prob.nstruct + prob.nrows;
        self.state.clear();
        self.state.resize(nv, VarState::AtLo);
        for j in 0..nv {
            self.state[j] = if self.lo[j].is_finite() {
                VarState::AtLo
            } else {
                VarState::AtUp
            };
        }
        self.basis.clear();
        for k in 0..prob.nrows {
            let s = prob.nstruct + k;
            self.basis.push(s);
            self.state[s] = VarState::Basic(k);
        }
        self.lu = None;
        self.etas.clear();
    }

    fn refactorize(&mut self, prob: &LpProblem) -> Result<()> {
        let m = prob.nrows;
        let mut bcols: SparseCols = Vec::with_capacity(m);
        for &j in &self.basis {
            let mut col = Vec::with_capacity(prob.col_nnz(j));
            if j < prob.nstruct {
                col.extend_from_slice(&prob.cols[j]);
            } else {
                col.push((j - prob.nstruct, 1.0));
            }
            bcols.push(col);
        }
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by_key(|&k| (bcols[k].len(), k));
        let lu = factorize(m, &bcols, &order, &mut self.lu_scratch)?;
        self.lu = Some(lu);
        self.etas.clear();
        Ok(())
    }

    fn nb_val(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLo => self.lo[j],
            VarState::AtUp => self.hi[j],
            VarState::Basic(_) => unreachable!("nonbasic value of a basic variable"),
        }
    }

    /// `x_B = B^{-1} (rhs - N x_N)`, recomputed from scratch.
    fn compute_x_basic(&mut self, prob: &LpProblem) {
        self.buf_b.clear();
        self.buf_b.extend_from_slice(&prob.rhs);
        for j in 0..prob.nstruct + prob.nrows {
            if matches!(self.state[j], VarState::Basic(_)) {
                continue;
            }
            let v = self.nb_val(j);
            if v != 0.0 {
                if j < prob.nstruct {
                    for &(r, c) in &prob.cols[j] {
                        self.buf_b[r] -= c * v;
                    }
                } else {
                    self.buf_b[j - prob.nstruct] -= v;
                }
            }
        }
        ftran_full(
            self.lu.as_ref().unwrap(),
            &self.etas,
            &self.buf_b,
            &mut self.x_basic,
            &mut self.buf_t1,
        );
    }

    /// Solves the problem with the given bound fixes (`(column, value)`),
    /// warm-starting from the previous basis when one exists.
    pub fn solve(&mut self, prob: &LpProblem, fixes: &[(usize, f64)]) -> Result<LpResult> {
        let n = prob.nstruct;
        let m = prob.nrows;
        let nv = n + m;

        self.lo.clear();
        self.lo.extend_from_slice(&prob.lo);
        self.hi.clear();
        self.hi.extend_from_slice(&prob.hi);
        for &(j, v) in fixes {
            debug_assert!(j < n, "only structural columns can be fixed");
            self.lo[j] = v;
            self.hi[j] = v;
        }

        if self.basis.len() != m || self.state.len() != nv {
            self.reset_basis(prob);
        } else {
            // A warm-started nonbasic must rest at a finite bound.
            for j in 0..nv {
                match self.state[j] {
                    VarState::AtLo if !self.lo[j].is_finite() => self.state[j] = VarState::AtUp,
                    VarState::AtUp if !self.hi[j].is_finite() => self.state[j] = VarState::AtLo,
                    _ => {}
                }
            }
        }
        if self.refactorize(prob).is_err() {
            self.reset_basis(prob);
            self.refactorize(prob)?;
        }
        self.compute_x_basic(prob);

        let mut iterations = 0usize;
        let mut phase1_iterations = 0usize;
        let mut bland = false;
        let mut degenerate_streak = 0usize;

        loop {
            if iterations >= MAX_ITER {
                return Err(Error::IterationLimit(MAX_ITER));
            }
            if self.etas.len() >= REFACTOR_EVERY {
                self.refactorize(prob)?;
                self.compute_x_basic(prob);
            }

            // Phase: any basic too far outside its bounds?
            let mut max_viol = 0.0f64;
            for k in 0..m {
                let j = self.basis[k];
                let v = self.x_basic[k];
                max_viol = max_viol.max(self.lo[j] - v).max(v - self.hi[j]);
            }
            let phase1 = max_viol > FEAS_TOL;

            // Basic costs: violation signs in phase 1, objective in phase 2.
            self.buf_cb.clear();
            self.buf_cb.resize(m, 0.0);
            for k in 0..m {
                let j = self.basis[k];
                let v = self.x_basic[k];
                self.buf_cb[k] = if phase1 {
                    if v < self.lo[j] - FEAS_TOL {
                        -1.0
                    } else if v > self.hi[j] + FEAS_TOL {
                        1.0
                    } else {
                        0.0
                    }
                } else if j < n {
                    -prob.obj[j]
                } else {
                    0.0
                };
            }
            let (cb, mut y, mut t1, mut t2) = (
                std::mem::take(&mut self.buf_cb),
                std::mem::take(&mut self.buf_y),
                std::mem::take(&mut self.buf_t1),
                std::mem::take(&mut self.buf_t2),
            );
            btran_full(
                self.lu.as_ref().unwrap(),
                &self.etas,
                &cb,
                &mut y,
                &mut t1,
                &mut t2,
            );
            self.buf_cb = cb;
            self.buf_t1 = t1;
            self.buf_t2 = t2;

            // Pricing.
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..nv {
                if matches!(self.state[j], VarState::Basic(_)) {
                    continue;
                }
                if self.hi[j] - self.lo[j] <= ZERO_TOL {
                    continue; // fixed: cannot move
                }
                let cj = if phase1 {
                    0.0
                } else if j < n {
                    -prob.obj[j]
                } else {
                    0.0
                };
                let d = cj - prob.col_dot(j, &y);
                let eligible = match self.state[j] {
                    VarState::AtLo => d < -DUAL_TOL,
                    VarState::AtUp => d > DUAL_TOL,
                    VarState::Basic(_) => unreachable!(),
                };
                if eligible {
                    if bland {
                        entering = Some((j, d));
                        break;
                    }
                    if entering.map_or(true, |(_, dbest)| d.abs() > dbest.abs()) {
                        entering = Some((j, d));
                    }
                }
            }
            self.buf_y = y;

            let Some((q, _)) = entering else {
                if phase1 {
                    return Ok(LpResult {
                        status: LpStatus::Infeasible,
                        objective: 0.0,
                        x: Vec::new(),
                        iterations,
                        phase1_iterations,
                    });
                }
                return Ok(self.extract_optimal(prob, iterations, phase1_iterations));
            };
            let dir: f64 = match self.state[q] {
                VarState::AtLo => 1.0,
                VarState::AtUp => -1.0,
                VarState::Basic(_) => unreachable!(),
            };

            // Entering column in the current basis.
            self.buf_b.clear();
            self.buf_b.resize(m, 0.0);
            prob.col_scatter(q, &mut self.buf_b);
            let (b, mut w, mut tw) = (
                std::mem::take(&mut self.buf_b),
                std::mem::take(&mut self.buf_w),
                std::mem::take(&mut self.buf_t1),
            );
            ftran_full(self.lu.as_ref().unwrap(), &self.etas, &b, &mut w, &mut tw);
            self.buf_b = b;
            self.buf_t1 = tw;

            // Ratio test: how far can the entering variable move?
            let mut t_min = f64::INFINITY;
            let own_range = self.hi[q] - self.lo[q];
            if own_range.is_finite() {
                t_min = own_range;
            }
            for (k, &wk) in w.iter().enumerate() {
                if wk.abs() <= ZERO_TOL {
                    continue;
                }
                let delta = -dir * wk;
                let j = self.basis[k];
                let (xb, lok, hik) = (self.x_basic[k], self.lo[j], self.hi[j]);
                let t = if phase1 && xb < lok - FEAS_TOL {
                    // Violated below: blocks when re-entering through `lo`.
                    if delta > ZERO_TOL {
                        (lok - xb) / delta
                    } else {
                        continue;
                    }
                } else if phase1 && xb > hik + FEAS_TOL {
                    if delta < -ZERO_TOL {
                        (xb - hik) / (-delta)
                    } else {
                        continue;
                    }
                } else if delta < -ZERO_TOL && lok.is_finite() {
                    (xb - lok) / (-delta)
                } else if delta > ZERO_TOL && hik.is_finite() {
                    (hik - xb) / delta
                } else {
                    continue;
                };
                let t = t.max(0.0);
                if t < t_min {
                    t_min = t;
                }
            }

            if !t_min.is_finite() {
                if phase1 {
                    return Err(Error::Numerical(
                        "phase-1 direction without a blocking bound".to_string(),
                    ));
                }
                return Ok(LpResult {
                    status: LpStatus::Unbounded,
                    objective: f64::INFINITY,
                    x: Vec::new(),
                    iterations,
                    phase1_iterations,
                });
            }

            // Choose the blocker among candidates within tolerance of the
            // minimum: a bound flip if eligible (no basis change), otherwise
            // the stablest pivot (largest |w|), or the lowest variable index
            // under Bland's rule.
            let mut blocker = if own_range.is_finite() && own_range <= t_min + RATIO_TOL {
                Some(Blocker::Flip)
            } else {
                None
            };
            if blocker.is_none() {
                let mut best: Option<(usize, bool, f64)> = None; // pos, at_up, |w|
                for (k, &wk) in w.iter().enumerate() {
                    if wk.abs() <= ZERO_TOL {
                        continue;
                    }
                    let delta = -dir * wk;
                    let j = self.basis[k];
                    let (xb, lok, hik) = (self.x_basic[k], self.lo[j], self.hi[j]);
                    let cand = if phase1 && xb < lok - FEAS_TOL {
                        (delta > ZERO_TOL).then(|| ((lok - xb) / delta, false))
                    } else if phase1 && xb > hik + FEAS_TOL {
                        (delta < -ZERO_TOL).then(|| ((xb - hik) / (-delta), true))
                    } else if delta < -ZERO_TOL && lok.is_finite() {
                        Some(((xb - lok) / (-delta), false))
                    } else if delta > ZERO_TOL && hik.is_finite() {
                        Some(((hik - xb) / delta, true))
                    } else {
                        None
                    };
                    let Some((t, at_up)) = cand else { continue };
                    if t.max(0.0) > t_min + RATIO_TOL {
                        continue;
                    }
                    let better = match best {
                        None => true,
                        Some((bpos, _, babs)) => {
                            if bland {
                                self.basis[k] < self.basis[bpos]
                            } else {
                                wk.abs() > babs
                            }
                        }
                    };
                    if better {
                        best = Some((k, at_up, wk.abs()));
                    }
                }
                blocker = best.map(|(pos, at_up, _)| Blocker::Basic { pos, at_up });
            }
            let Some(blocker) = blocker else {
                return Err(Error::Numerical(
                    "ratio test lost its blocking candidate".to_string(),
                ));
            };

            // A bad pivot right after a fresh factorization is a genuine
            // numerical failure; otherwise refactor and retry.
            if let Blocker::Basic { pos, .. } = blocker {
                if w[pos].abs() < PIVOT_TOL {
                    if self.etas.is_empty() {
                        return Err(Error::Numerical(format!(
                            "pivot {:.3e} below tolerance",
                            w[pos]
                        )));
                    }
                    self.buf_w = w;
                    self.refactorize(prob)?;
                    self.compute_x_basic(prob);
                    continue;
                }
            }

            let t = t_min.max(0.0);
            if t > 1e-10 {
                degenerate_streak = 0;
                bland = false;
            } else {
                degenerate_streak += 1;
                if degenerate_streak > BLAND_AFTER {
                    bland = true;
                }
            }

            if t != 0.0 {
                for (k, &wk) in w.iter().enumerate() {
                    if wk != 0.0 {
                        self.x_basic[k] -= dir * t * wk;
                    }
                }
            }

            match blocker {
                Blocker::Flip => {
                    self.state[q] = match self.state[q] {
                        VarState::AtLo => VarState::AtUp,
                        VarState::AtUp => VarState::AtLo,
                        VarState::Basic(_) => unreachable!(),
                    };
                }
                Blocker::Basic { pos, at_up } => {
                    let enter_val = self.nb_val(q) + dir * t;
                    let leaving = self.basis[pos];
                    self.state[leaving] = if at_up { VarState::AtUp } else { VarState::AtLo };
                    let mut off = Vec::new();
                    for (i, &wi) in w.iter().enumerate() {
                        if i != pos && wi != 0.0 {
                            off.push((i, wi));
                        }
                    }
                    self.etas.push(Eta {
                        r: pos,
                        diag: w[pos],
                        off,
                    });
                    self.basis[pos] = q;
                    self.state[q] = VarState::Basic(pos);
                    self.x_basic[pos] = enter_val;
                }
            }
            self.buf_w = w;

            iterations += 1;
            if phase1 {
                phase1_iterations += 1;
            }
        }
    }

    fn extract_optimal(
        &mut self,
        prob: &LpProblem,
        iterations: usize,
        phase1_iterations: usize,
    ) -> LpResult {
        // One fresh pass removes drift accumulated by incremental updates.
        self.compute_x_basic(prob);
        let mut x = vec![0.0; prob.nstruct];
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = match self.state[j] {
                VarState::Basic(k) => self.x_basic[k],
                VarState::AtLo => self.lo[j],
                VarState::AtUp => self.hi[j],
            };
        }
        let objective = prob.obj.iter().zip(&x).map(|(c, v)| c * v).sum();
        LpResult {
            status: LpStatus::Optimal,
            objective,
            x,
            iterations,
            phase1_iterations,
        }
    }
}
