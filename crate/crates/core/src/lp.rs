//! Dense two-phase simplex with primal and dual extraction, and a
//! lazy-constraint driver on top of it.
//!
//! Every optimal answer is re-checked before it is returned: primal rows
//! within `feas`, dual signs, and the primal/dual objective gap within `gap`.
//! A failed check is an error, not a degraded solution.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row (zero or negative if satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => lhs - self.rhs,
            Relation::Ge => self.rhs - lhs,
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub variables: Vec<Variable>,
    pub objective: Vec<(usize, f64)>,
    pub constraints: Vec<Constraint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub feas: f64,
    pub gap: f64,
    pub cut: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feas: 1e-7,
            gap: 1e-6,
            cut: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solver output. `duals[i]` is the multiplier of constraint `i` in the
/// Lagrangian of the stated sense, so for a minimization `≥` rows have
/// non-negative duals and `≤` rows non-positive ones; for a maximization the
/// signs flip. `reduced_costs = c - Aᵀ·duals`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    pub dual_objective: f64,
    pub pivots: usize,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            variables: Vec::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_variable(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> usize {
        let id = self.variables.len();
        self.variables.push(Variable {
            name: name.into(),
            lower,
            upper,
        });
        if cost != 0.0 {
            self.objective.push((id, cost));
        }
        id
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().map(|&(j, c)| c * x[j]).sum()
    }

    fn dense_costs(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.variables.len()];
        for &(j, v) in &self.objective {
            c[j] += v;
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.variables.len();
        for v in &self.variables {
            if !v.lower.is_finite() {
                return Err(Error::Lp(format!("variable {} needs a finite lower bound", v.name)));
            }
            if v.upper.is_nan() || v.upper < v.lower {
                return Err(Error::Lp(format!("variable {} has an empty range", v.name)));
            }
        }
        let bad = |j: usize, a: f64| j >= n || !a.is_finite();
        if self.objective.iter().any(|&(j, a)| bad(j, a)) {
            return Err(Error::Lp("objective references an undeclared variable".into()));
        }
        for r in &self.constraints {
            if r.coeffs.iter().any(|&(j, a)| bad(j, a)) || !r.rhs.is_finite() {
                return Err(Error::Lp(format!("row {} is malformed", r.name)));
            }
        }
        Ok(())
    }

    /// CPLEX-style LP text, for debugging.
    pub fn to_lp_format(&self) -> String {
        let name = |j: usize| sanitize(&self.variables[j].name, 'x', j);
        let terms = |coeffs: &[(usize, f64)]| -> String {
            if coeffs.is_empty() {
                return " 0".into();
            }
            let mut s = String::new();
            for &(j, a) in coeffs {
                let sign = if a < 0.0 { '-' } else { '+' };
                let _ = write!(s, " {sign} {} {}", a.abs(), name(j));
            }
            s
        };
        let mut out = String::new();
        out.push_str(match self.sense {
            Sense::Minimize => "Minimize\n",
            Sense::Maximize => "Maximize\n",
        });
        let _ = writeln!(out, " obj:{}", terms(&self.objective));
        out.push_str("Subject To\n");
        for (i, r) in self.constraints.iter().enumerate() {
            let rel = match r.relation {
                Relation::Le => "<=",
                Relation::Ge => ">=",
                Relation::Eq => "=",
            };
            let _ = writeln!(out, " {}:{} {rel} {}", sanitize(&r.name, 'c', i), terms(&r.coeffs), r.rhs);
        }
        out.push_str("Bounds\n");
        for (j, v) in self.variables.iter().enumerate() {
            if v.upper.is_finite() {
                let _ = writeln!(out, " {} <= {} <= {}", v.lower, name(j), v.upper);
            } else {
                let _ = writeln!(out, " {} >= {}", name(j), v.lower);
            }
        }
        out.push_str("End\n");
        out
    }
}

fn sanitize(name: &str, prefix: char, idx: usize) -> String {
    let clean: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if clean.is_empty() || clean.starts_with(|c: char| c.is_ascii_digit()) {
        format!("{prefix}{idx}_{clean}")
    } else {
        clean
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    solve_with(lp, &Tolerances::default())
}

const PIVOT_EPS: f64 = 1e-9;

/// How a tableau row maps back to the model.
#[derive(Clone, Copy)]
enum RowOrigin {
    Constraint(usize),
    UpperBound,
}

struct Tableau {
    rows: usize,
    cols: usize,
    /// `(rows + 1) x (cols + 1)`; last row holds reduced costs, last column
    /// the right-hand side.
    a: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.cols + 1) + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.cols + 1;
        let p = self.a[r * w + c];
        let mut nz: Vec<usize> = Vec::new();
        for j in 0..w {
            let v = &mut self.a[r * w + j];
            if *v != 0.0 {
                *v /= p;
                nz.push(j);
            }
        }
        self.a[r * w + c] = 1.0;
        let (head, tail) = self.a.split_at_mut(r * w);
        let (prow, tail) = tail.split_at_mut(w);
        let prow: &[f64] = prow;
        let mut update = |row: &mut [f64]| {
            let f = row[c];
            if f != 0.0 {
                for &j in &nz {
                    row[j] -= f * prow[j];
                }
                row[c] = 0.0;
            }
        };
        head.chunks_exact_mut(w).for_each(&mut update);
        tail.chunks_exact_mut(w).for_each(&mut update);
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Dual simplex from a basis whose reduced costs are non-negative on
    /// `allowed` columns. Returns false if some row admits no entering column.
    fn dual_optimize(&mut self, allowed: &dyn Fn(usize) -> bool, cap: usize) -> Result<bool> {
        let m = self.rows;
        loop {
            if self.pivots > cap {
                return Err(Error::Lp(format!("dual simplex exceeded {cap} pivots")));
            }
            let mut leave = None;
            let mut worst = -PIVOT_EPS;
            for i in 0..m {
                let b = self.rhs(i);
                if b < worst {
                    worst = b;
                    leave = Some(i);
                }
            }
            let Some(r) = leave else {
                return Ok(true);
            };
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..self.cols {
                let a = self.at(r, j);
                if a < -PIVOT_EPS && allowed(j) {
                    let ratio = self.at(m, j).max(0.0) / -a;
                    if enter.is_none_or(|(_, best)| ratio < best - 1e-12) {
                        enter = Some((j, ratio));
                    }
                }
            }
            let Some((c, _)) = enter else {
                return Ok(false);
            };
            self.pivot(r, c);
        }
    }

    /// Rebuilds the tableau from `orig` with the current basis, choosing
    /// pivot rows by magnitude. Returns false and leaves the tableau alone if
    /// the basis is numerically singular.
    fn refactor(&mut self, orig: &[f64]) -> bool {
        let m = self.rows;
        let w = self.cols + 1;
        let old_a = std::mem::replace(&mut self.a, orig.to_vec());
        let old_basis = self.basis.clone();
        let mut cols = old_basis.clone();
        cols.sort_unstable();
        let mut done = vec![false; m];
        for &c in &cols {
            let best = (0..m)
                .filter(|&i| !done[i])
                .max_by(|&a, &b| self.a[a * w + c].abs().total_cmp(&self.a[b * w + c].abs()));
            match best {
                Some(r) if self.a[r * w + c].abs() > 1e-11 => {
                    self.pivot(r, c);
                    done[r] = true;
                }
                _ => {
                    self.a = old_a;
                    self.basis = old_basis;
                    return false;
                }
            }
        }
        true
    }

    /// Sets the cost row to the reduced costs of `cost` under the current
    /// basis.
    fn price(&mut self, cost: &[f64]) {
        let w = self.cols + 1;
        let m = self.rows;
        for j in 0..w {
            self.a[m * w + j] = if j < self.cols { cost[j] } else { 0.0 };
        }
        for i in 0..m {
            let cb = cost[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            for j in 0..w {
                self.a[m * w + j] -= cb * self.a[i * w + j];
            }
        }
    }

    /// Primal simplex on the current cost row. `allowed` filters entering
    /// columns. Returns false if unbounded.
    fn optimize(&mut self, allowed: &dyn Fn(usize) -> bool, cap: usize) -> Result<bool> {
        let m = self.rows;
        let mut degenerate_run = 0usize;
        loop {
            if self.pivots > cap {
                return Err(Error::Lp(format!("simplex exceeded {cap} pivots")));
            }
            let bland = degenerate_run > 50;
            let mut enter = None;
            let mut best = -PIVOT_EPS;
            for j in 0..self.cols {
                if !allowed(j) {
                    continue;
                }
                let d = self.at(m, j);
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(c) = enter else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..m {
                let a = self.at(i, c);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((r, best_ratio)) => {
                            ratio < best_ratio - 1e-12
                                || (ratio <= best_ratio + 1e-12 && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Ok(false);
            };
            if ratio <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, c);
        }
    }
}

pub fn solve_with(lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution> {
    match Simplex::build(lp, tol)? {
        Ok(mut sx) => sx.conclude(lp, tol),
        Err(done) => Ok(done),
    }
}

/// A tableau row over shifted variables `x' = x - lower`.
struct Row {
    coeffs: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
    flip: f64,
    origin: RowOrigin,
}

fn terminal(status: LpStatus, pivots: usize) -> LpSolution {
    LpSolution {
        status,
        primal: Vec::new(),
        duals: Vec::new(),
        reduced_costs: Vec::new(),
        objective: f64::NAN,
        dual_objective: f64::NAN,
        pivots,
    }
}

/// Solver state kept between solves of a growing model.
struct Simplex {
    nv: usize,
    sign: f64,
    rows: Vec<Row>,
    slack_col: Vec<usize>,
    art_col: Vec<usize>,
    is_art: Vec<bool>,
    /// Phase-2 cost per column.
    cost: Vec<f64>,
    t: Tableau,
    /// The starting tableau, for refactoring.
    orig: Vec<f64>,
}

impl Simplex {
    fn cap(&self) -> usize {
        20_000 + 50 * (self.t.rows + self.t.cols)
    }

    fn shifted_row(lp: &LinearProgram, i: usize) -> Row {
        let c = &lp.constraints[i];
        let shift: f64 = c.coeffs.iter().map(|&(j, a)| a * lp.variables[j].lower).sum();
        let mut merged: Vec<(usize, f64)> = c.coeffs.clone();
        merged.sort_by_key(|&(j, _)| j);
        merged.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        Row {
            coeffs: merged,
            relation: c.relation,
            rhs: c.rhs - shift,
            flip: 1.0,
            origin: RowOrigin::Constraint(i),
        }
    }

    /// Runs both phases. The inner `Err` carries an infeasible or unbounded
    /// answer.
    fn build(lp: &LinearProgram, tol: &Tolerances) -> Result<std::result::Result<Simplex, LpSolution>> {
        lp.validate()?;
        let nv = lp.variables.len();
        let sign = match lp.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let cost_model = lp.dense_costs();

        let mut rows: Vec<Row> = (0..lp.constraints.len()).map(|i| Self::shifted_row(lp, i)).collect();
        for (j, v) in lp.variables.iter().enumerate() {
            if v.upper.is_finite() {
                rows.push(Row {
                    coeffs: vec![(j, 1.0)],
                    relation: Relation::Le,
                    rhs: v.upper - v.lower,
                    flip: 1.0,
                    origin: RowOrigin::UpperBound,
                });
            }
        }
        for r in &mut rows {
            if r.rhs < 0.0 {
                r.rhs = -r.rhs;
                r.flip = -1.0;
                for t in &mut r.coeffs {
                    t.1 = -t.1;
                }
                r.relation = match r.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }

        // Columns: structural, then one slack per inequality, then artificials
        // for rows whose slack cannot start basic.
        let m = rows.len();
        let mut slack_col = vec![usize::MAX; m];
        let mut art_col = vec![usize::MAX; m];
        let mut cols = nv;
        for (i, r) in rows.iter().enumerate() {
            if r.relation != Relation::Eq {
                slack_col[i] = cols;
                cols += 1;
            }
        }
        for (i, r) in rows.iter().enumerate() {
            if r.relation != Relation::Le {
                art_col[i] = cols;
                cols += 1;
            }
        }
        let w = cols + 1;
        let mut t = Tableau {
            rows: m,
            cols,
            a: vec![0.0; (m + 1) * w],
            basis: vec![0; m],
            pivots: 0,
        };
        for (i, r) in rows.iter().enumerate() {
            for &(j, a) in &r.coeffs {
                t.a[i * w + j] += a;
            }
            match r.relation {
                Relation::Le => {
                    t.a[i * w + slack_col[i]] = 1.0;
                    t.basis[i] = slack_col[i];
                }
                Relation::Ge => {
                    t.a[i * w + slack_col[i]] = -1.0;
                    t.a[i * w + art_col[i]] = 1.0;
                    t.basis[i] = art_col[i];
                }
                Relation::Eq => {
                    t.a[i * w + art_col[i]] = 1.0;
                    t.basis[i] = art_col[i];
                }
            }
            t.a[i * w + cols] = r.rhs;
        }
        let mut is_art = vec![false; cols];
        for &c in art_col.iter().filter(|&&c| c != usize::MAX) {
            is_art[c] = true;
        }
        let mut cost = vec![0.0; cols];
        for j in 0..nv {
            cost[j] = sign * cost_model[j];
        }
        let orig = t.a.clone();
        let mut sx = Simplex {
            nv,
            sign,
            rows,
            slack_col,
            art_col,
            is_art,
            cost,
            t,
            orig,
        };
        let cap = sx.cap();

        if sx.is_art.iter().any(|&f| f) {
            let phase1: Vec<f64> = sx.is_art.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect();
            sx.t.price(&phase1);
            sx.t.optimize(&|_| true, cap)?;
            let infeas: f64 = (0..m).filter(|&i| sx.is_art[sx.t.basis[i]]).map(|i| sx.t.rhs(i)).sum();
            let scale = 1.0 + sx.rows.iter().map(|r| r.rhs.abs()).fold(0.0, f64::max);
            if infeas > tol.feas * scale {
                return Ok(Err(terminal(LpStatus::Infeasible, sx.t.pivots)));
            }
            // Drive zero-level artificials out of the basis where possible.
            for i in 0..m {
                if !sx.is_art[sx.t.basis[i]] {
                    continue;
                }
                let t = &sx.t;
                if let Some(j) = (0..t.cols)
                    .filter(|&j| !sx.is_art[j])
                    .max_by(|&a, &b| t.at(i, a).abs().total_cmp(&t.at(i, b).abs()))
                    .filter(|&j| t.at(i, j).abs() > 1e-7)
                {
                    sx.t.pivot(i, j);
                }
            }
            sx.clear_dead();
        }

        sx.t.price(&sx.cost);
        let is_art = sx.is_art.clone();
        if !sx.t.optimize(&|j| !is_art[j], cap)? {
            return Ok(Err(terminal(LpStatus::Unbounded, sx.t.pivots)));
        }
        Ok(Ok(sx))
    }

    /// Non-basic artificials of inequality rows are dead after phase 1;
    /// clearing them keeps pivots sparse. Equality rows keep theirs for the
    /// duals.
    fn clear_dead(&mut self) {
        let t = &mut self.t;
        let w = t.cols + 1;
        let mut basic = vec![false; t.cols];
        for &b in &t.basis {
            basic[b] = true;
        }
        for (i, r) in self.rows.iter().enumerate() {
            let c = self.art_col[i];
            if r.relation == Relation::Ge && c != usize::MAX && !basic[c] {
                for k in 0..=t.rows {
                    t.a[k * w + c] = 0.0;
                }
            }
        }
    }

    /// Appends inequality rows with fresh basic slacks, expressed in the
    /// current basis. Right-hand sides may come out negative.
    fn append_rows(&mut self, new: Vec<Row>) {
        let k = new.len();
        let (m, cols) = (self.t.rows, self.t.cols);
        let (w, nw) = (cols + 1, cols + k + 1);
        let widen = |a: &[f64]| -> Vec<f64> {
            let mut out = vec![0.0; (m + k + 1) * nw];
            for i in 0..=m {
                let dst = if i == m { m + k } else { i };
                out[dst * nw..dst * nw + cols].copy_from_slice(&a[i * w..i * w + cols]);
                out[dst * nw + nw - 1] = a[i * w + cols];
            }
            out
        };
        let mut a = widen(&self.t.a);
        let mut orig = widen(&self.orig);
        for (q, r) in new.iter().enumerate() {
            let i = m + q;
            let slack = cols + q;
            let mut raw = vec![0.0; nw];
            for &(j, v) in &r.coeffs {
                raw[j] += v;
            }
            raw[slack] = 1.0;
            raw[nw - 1] = r.rhs;
            orig[i * nw..(i + 1) * nw].copy_from_slice(&raw);
            for (p, &c) in self.t.basis.iter().enumerate() {
                let f = raw[c];
                if f != 0.0 {
                    for j in 0..nw {
                        raw[j] -= f * a[p * nw + j];
                    }
                    raw[c] = 0.0;
                }
            }
            a[i * nw..(i + 1) * nw].copy_from_slice(&raw);
            self.slack_col.push(slack);
            self.art_col.push(usize::MAX);
            self.t.basis.push(slack);
        }
        self.t.a = a;
        self.orig = orig;
        self.t.rows = m + k;
        self.t.cols = cols + k;
        self.is_art.resize(cols + k, false);
        self.cost.resize(cols + k, 0.0);
        self.rows.extend(new);
    }

    /// Adds constraints `from..` of `lp` and re-optimizes with the dual
    /// simplex. Returns false if the warm path cannot decide the answer.
    fn extend(&mut self, lp: &LinearProgram, from: usize) -> Result<bool> {
        let mut new = Vec::new();
        for i in from..lp.constraints.len() {
            let mut r = Self::shifted_row(lp, i);
            match r.relation {
                Relation::Eq => return Ok(false),
                Relation::Ge => {
                    r.rhs = -r.rhs;
                    r.flip = -1.0;
                    for t in &mut r.coeffs {
                        t.1 = -t.1;
                    }
                    r.relation = Relation::Le;
                }
                Relation::Le => {}
            }
            new.push(r);
        }
        self.t.pivots = 0;
        if new.is_empty() {
            return Ok(true);
        }
        self.append_rows(new);
        let cap = self.cap();
        let is_art = self.is_art.clone();
        if !self.t.dual_optimize(&|j| !is_art[j], cap)? {
            return Ok(false);
        }
        self.t.optimize(&|j| !is_art[j], cap)
    }

    fn extract(&self, lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution> {
        let t = &self.t;
        let m = t.rows;
        let mut shifted = vec![0.0; t.cols];
        for i in 0..m {
            shifted[t.basis[i]] = t.rhs(i).max(0.0);
        }
        let primal: Vec<f64> = (0..self.nv)
            .map(|j| {
                let v = &lp.variables[j];
                (v.lower + shifted[j]).min(v.upper)
            })
            .collect();

        // Row multipliers of the internal minimization, mapped back to the
        // original orientation and sense.
        let mut duals = vec![0.0; lp.constraints.len()];
        for (i, r) in self.rows.iter().enumerate() {
            let pi = match r.relation {
                Relation::Le => -t.at(m, self.slack_col[i]),
                Relation::Ge => t.at(m, self.slack_col[i]),
                Relation::Eq => -t.at(m, self.art_col[i]),
            };
            if let RowOrigin::Constraint(k) = r.origin {
                duals[k] = self.sign * r.flip * pi;
            }
        }
        finish(lp, tol, primal, duals, t.pivots)
    }

    /// Extracts and checks the answer. Long pivot sequences drift, so a
    /// failed check triggers a refactor from the original rows and a polish.
    fn conclude(&mut self, lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution> {
        let mut attempt = self.extract(lp, tol);
        for _ in 0..3 {
            if attempt.is_ok() || !self.t.refactor(&self.orig) {
                break;
            }
            self.clear_dead();
            self.t.price(&self.cost);
            let cap = self.cap();
            let is_art = self.is_art.clone();
            if !self.t.optimize(&|j| !is_art[j], cap)? {
                return Ok(terminal(LpStatus::Unbounded, self.t.pivots));
            }
            attempt = self.extract(lp, tol);
        }
        attempt
    }
}

/// Re-solves a model that only ever gains constraints, reusing the last
/// optimal basis. Each call must pass the previous model with zero or more
/// constraints appended; anything else falls back to a cold solve, as does
/// any new equality row.
#[derive(Default)]
pub struct WarmStart {
    state: Option<(Simplex, usize, usize)>,
}

impl WarmStart {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, lp: &LinearProgram, tol: &Tolerances) -> Result<LpSolution> {
        if let Some((mut sx, nv, seen)) = self.state.take() {
            if nv == lp.variables.len() && seen <= lp.constraints.len() {
                if let Ok(true) = sx.extend(lp, seen) {
                    if let Ok(sol) = sx.conclude(lp, tol) {
                        self.state = Some((sx, nv, lp.constraints.len()));
                        return Ok(sol);
                    }
                }
            }
        }
        match Simplex::build(lp, tol)? {
            Ok(mut sx) => {
                let sol = sx.conclude(lp, tol)?;
                self.state = Some((sx, lp.variables.len(), lp.constraints.len()));
                Ok(sol)
            }
            Err(done) => Ok(done),
        }
    }
}

/// Computes reduced costs and the dual objective, then checks feasibility,
/// dual signs and the gap.
fn finish(lp: &LinearProgram, tol: &Tolerances, primal: Vec<f64>, duals: Vec<f64>, pivots: usize) -> Result<LpSolution> {
    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut reduced = lp.dense_costs();
    for (r, &y) in lp.constraints.iter().zip(&duals) {
        for &(j, a) in &r.coeffs {
            reduced[j] -= y * a;
        }
    }
    for (r, &y) in lp.constraints.iter().zip(&duals) {
        let scale = 1.0 + r.rhs.abs();
        let viol = r.violation(&primal);
        if viol > tol.feas * scale * 10.0 {
            return Err(Error::Lp(format!("row {} violated by {viol:e}", r.name)));
        }
        // Internal-minimization sign rule.
        let ym = sign * y;
        let wrong = match r.relation {
            Relation::Ge => ym < -tol.gap,
            Relation::Le => ym > tol.gap,
            Relation::Eq => false,
        };
        if wrong {
            return Err(Error::Lp(format!("dual of row {} has the wrong sign ({y:e})", r.name)));
        }
    }
    let objective = lp.objective_value(&primal);
    let mut dual_obj_min: f64 = lp
        .constraints
        .iter()
        .zip(&duals)
        .map(|(r, &y)| sign * y * r.rhs)
        .sum();
    for (j, v) in lp.variables.iter().enumerate() {
        let rc = sign * reduced[j];
        if rc >= 0.0 {
            dual_obj_min += rc * v.lower;
        } else if v.upper.is_finite() {
            dual_obj_min += rc * v.upper;
        } else if rc < -tol.gap {
            return Err(Error::Lp(format!(
                "reduced cost {rc:e} on unbounded variable {}",
                v.name
            )));
        }
    }
    let dual_objective = sign * dual_obj_min;
    let gap = (objective - dual_objective).abs();
    if gap > tol.gap * (1.0 + objective.abs()) {
        return Err(Error::Lp(format!(
            "duality gap {gap:e} (primal {objective}, dual {dual_objective})"
        )));
    }
    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        duals,
        reduced_costs: reduced,
        objective,
        dual_objective,
        pivots,
    })
}

/// A linear inequality offered by a separation routine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cut {
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
    pub tag: String,
}

impl Cut {
    pub fn as_constraint(&self) -> Constraint {
        Constraint {
            name: self.tag.clone(),
            coeffs: self.coeffs.clone(),
            relation: self.relation,
            rhs: self.rhs,
        }
    }

    pub fn violation(&self, x: &[f64]) -> f64 {
        self.as_constraint().violation(x)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub cut: Cut,
    /// Violation by the master point that triggered it.
    pub violation: f64,
    pub round: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CutPool {
    pub records: Vec<CutRecord>,
}

impl CutPool {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.records
            .iter()
            .map(|r| r.cut.violation(x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub enum Separation<T> {
    Feasible(T),
    Cut(Cut),
}

pub struct CuttingPlaneOutcome<T> {
    pub solution: LpSolution,
    pub pool: CutPool,
    pub payload: T,
    /// Master objective after each solve, in order.
    pub objectives: Vec<f64>,
}

/// Re-solves `initial` plus all cuts so far until `separate` accepts the
/// master point. Stops with an error on the round cap, on a cut that the
/// point does not violate by `tol.cut`, or if the master objective moves the
/// wrong way.
pub fn cutting_plane<T, F>(
    initial: &LinearProgram,
    tol: &Tolerances,
    max_rounds: usize,
    mut separate: F,
) -> Result<CuttingPlaneOutcome<T>>
where
    F: FnMut(&LpSolution, usize) -> Result<Separation<T>>,
{
    let mut lp = initial.clone();
    let mut pool = CutPool::default();
    let mut objectives: Vec<f64> = Vec::new();
    let mut warm = WarmStart::new();
    for round in 0.. {
        let sol = warm.solve(&lp, tol)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Lp(format!("master LP is {:?}", sol.status)));
        }
        if let Some(&prev) = objectives.last() {
            let slack = tol.gap * (1.0 + prev.abs());
            let worse = match lp.sense {
                Sense::Minimize => sol.objective < prev - slack,
                Sense::Maximize => sol.objective > prev + slack,
            };
            if worse {
                return Err(Error::invariant(format!(
                    "master objective moved from {prev} to {} after adding a cut",
                    sol.objective
                )));
            }
        }
        objectives.push(sol.objective);
        match separate(&sol, round)? {
            Separation::Feasible(payload) => {
                for rec in &pool.records {
                    let v = rec.cut.violation(&sol.primal);
                    if v > tol.feas * (1.0 + rec.cut.rhs.abs()) {
                        return Err(Error::invariant(format!(
                            "final point violates cut {} by {v:e}",
                            rec.cut.tag
                        )));
                    }
                }
                return Ok(CuttingPlaneOutcome {
                    solution: sol,
                    pool,
                    payload,
                    objectives,
                });
            }
            Separation::Cut(cut) => {
                let violation = cut.violation(&sol.primal);
                if violation < tol.cut {
                    return Err(Error::StalledCut {
                        violation,
                        tol: tol.cut,
                    });
                }
                if round + 1 >= max_rounds {
                    return Err(Error::IterationCap(max_rounds));
                }
                lp.constraints.push(cut.as_constraint());
                pool.records.push(CutRecord {
                    cut,
                    violation,
                    round,
                });
            }
        }
    }
    unreachable!("loop returns")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn single_lower_bound_row() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_variable("x", 0.0, f64::INFINITY, 1.0);
        lp.add_constraint("r", vec![(x, 1.0)], Relation::Ge, 3.0);
        let s = solve(&lp).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.primal[0] - 3.0).abs() < 1e-9);
        assert!((s.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn maximize_over_simplex() {
        let mut lp = LinearProgram::new(Sense::Maximize);
        let x = lp.add_variable("x", 0.0, f64::INFINITY, 1.0);
        let y = lp.add_variable("y", 0.0, f64::INFINITY, 1.0);
        lp.add_constraint("r", vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let s = solve(&lp).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-9);
        assert!((s.duals[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_variable("x", 0.0, 1.0, 1.0);
        lp.add_constraint("r", vec![(x, 1.0)], Relation::Ge, 2.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Infeasible);
        let mut lp = LinearProgram::new(Sense::Maximize);
        lp.add_variable("x", 0.0, f64::INFINITY, 1.0);
        assert_eq!(solve(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_rows_and_shifted_bounds() {
        // min x + 2y, x + y = 3, x in [1, 2], y >= 0.5
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_variable("x", 1.0, 2.0, 1.0);
        let y = lp.add_variable("y", 0.5, f64::INFINITY, 2.0);
        lp.add_constraint("sum", vec![(x, 1.0), (y, 1.0)], Relation::Eq, 3.0);
        let s = solve(&lp).unwrap();
        assert!((s.primal[0] - 2.0).abs() < 1e-9);
        assert!((s.primal[1] - 1.0).abs() < 1e-9);
        assert!((s.objective - 4.0).abs() < 1e-9);
        assert!((s.duals[0] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_rows() {
        // min x s.t. -x <= -2
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_variable("x", 0.0, f64::INFINITY, 1.0);
        lp.add_constraint("r", vec![(x, -1.0)], Relation::Le, -2.0);
        let s = solve(&lp).unwrap();
        assert!((s.primal[0] - 2.0).abs() < 1e-9);
        assert!((s.duals[0] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn random_feasible_lps_close_the_gap() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.gen_range(2..8);
            let m = rng.gen_range(1..8);
            // Feasible by construction: rows hold at a random point.
            let point: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let mut lp = LinearProgram::new(Sense::Minimize);
            for j in 0..n {
                lp.add_variable(format!("x{j}"), 0.0, 5.0, rng.gen_range(-1.0..2.0));
            }
            for i in 0..m {
                let coeffs: Vec<(usize, f64)> = (0..n).map(|j| (j, rng.gen_range(-1.0..1.0))).collect();
                let at: f64 = coeffs.iter().map(|&(j, a)| a * point[j]).sum();
                let rel = [Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..3)];
                lp.add_constraint(format!("r{i}"), coeffs, rel, at);
            }
            let s = solve(&lp).unwrap();
            assert_eq!(s.status, LpStatus::Optimal);
            assert!((s.objective - s.dual_objective).abs() <= 1e-7 * (1.0 + s.objective.abs()));
            assert!(s.objective <= lp.objective_value(&point) + 1e-7);
        }
    }

    #[test]
    fn lp_text_dump_mentions_every_row() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        let x = lp.add_variable("x", 0.0, 1.0, 1.0);
        lp.add_constraint("lo", vec![(x, 1.0)], Relation::Ge, 0.5);
        let text = lp.to_lp_format();
        assert!(text.contains("Minimize") && text.contains("lo: + 1 x >= 0.5"));
        assert!(text.contains("0 <= x <= 1"));
    }

    #[test]
    fn cutting_plane_without_cuts_returns_initial_optimum() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_variable("x", 0.0, 1.0, 1.0);
        let out = cutting_plane(&lp, &Tolerances::default(), 10, |_, _| Ok(Separation::Feasible(()))).unwrap();
        assert!(out.pool.is_empty());
        assert_eq!(out.solution.primal, vec![0.0]);
    }

    #[test]
    fn cutting_plane_incorporates_a_cut() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_variable("a", 0.0, 1.0, 1.0);
        lp.add_variable("b", 0.0, 1.0, 1.0);
        let out = cutting_plane(&lp, &Tolerances::default(), 10, |sol, _| {
            if sol.primal[0] + sol.primal[1] >= 1.0 - 1e-9 {
                Ok(Separation::Feasible(()))
            } else {
                Ok(Separation::Cut(Cut {
                    coeffs: vec![(0, 1.0), (1, 1.0)],
                    relation: Relation::Ge,
                    rhs: 1.0,
                    tag: "sum".into(),
                }))
            }
        })
        .unwrap();
        assert_eq!(out.pool.len(), 1);
        assert!((out.solution.objective - 1.0).abs() < 1e-9);
        assert!(out.objectives.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn stalled_cut_is_an_error() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_variable("a", 0.0, 1.0, 1.0);
        let res: Result<CuttingPlaneOutcome<()>> = cutting_plane(&lp, &Tolerances::default(), 10, |_, _| {
            Ok(Separation::Cut(Cut {
                coeffs: vec![(0, 1.0)],
                relation: Relation::Ge,
                rhs: 0.0,
                tag: "slack".into(),
            }))
        });
        assert!(matches!(res, Err(Error::StalledCut { .. })));
    }

    #[test]
    fn round_cap_is_an_error() {
        let mut lp = LinearProgram::new(Sense::Minimize);
        lp.add_variable("a", 0.0, 100.0, 1.0);
        let res: Result<CuttingPlaneOutcome<()>> = cutting_plane(&lp, &Tolerances::default(), 3, |sol, _| {
            Ok(Separation::Cut(Cut {
                coeffs: vec![(0, 1.0)],
                relation: Relation::Ge,
                rhs: sol.primal[0] + 1.0,
                tag: "up".into(),
            }))
        });
        assert!(matches!(res, Err(Error::IterationCap(3))));
    }

    proptest::proptest! {
        #[test]
        fn warm_start_agrees_with_cold_solves(seed in 0u64..400, batches in 1usize..5) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(2..7);
            let point: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let mut lp = LinearProgram::new(if seed % 2 == 0 { Sense::Minimize } else { Sense::Maximize });
            for j in 0..n {
                let lower = if j % 3 == 0 { -1.0 } else { 0.0 };
                let upper = if j % 2 == 0 { 4.0 } else { f64::INFINITY };
                lp.add_variable(format!("x{j}"), lower, upper, rng.gen_range(0.1..2.0));
            }
            let mut warm = WarmStart::new();
            for b in 0..=batches {
                if b > 0 {
                    for i in 0..rng.gen_range(1..4) {
                        let coeffs: Vec<(usize, f64)> =
                            (0..n).map(|j| (j, rng.gen_range(-1.0..1.0))).collect();
                        let at: f64 = coeffs.iter().map(|&(j, a)| a * point[j]).sum();
                        let rel = [Relation::Le, Relation::Ge, Relation::Le, Relation::Ge, Relation::Eq][rng.gen_range(0..5)];
                        // Occasionally push a row past the point so infeasibility shows up.
                        let rhs = at + if rng.gen_bool(0.1) { -3.0 } else { 0.0 };
                        lp.add_constraint(format!("b{b}r{i}"), coeffs, rel, rhs);
                    }
                }
                let cold = solve(&lp);
                let hot = warm.solve(&lp, &Tolerances::default());
                match (cold, hot) {
                    (Ok(c), Ok(h)) => {
                        proptest::prop_assert_eq!(c.status, h.status);
                        if c.status == LpStatus::Optimal {
                            proptest::prop_assert!((c.objective - h.objective).abs() <= 1e-6 * (1.0 + c.objective.abs()));
                        }
                    }
                    (c, h) => proptest::prop_assert!(c.is_err() && h.is_err(), "cold {:?} warm {:?}", c.map(|s| s.status), h.map(|s| s.status)),
                }
            }
        }
    }
}
