//! The separator LP for a vertex set `S` under fractional edge lengths `x`:
//!
//! ```text
//! min Σ_v y_v
//!   d_uv <= Σ_{e∈P} x_e + Σ_{t∈P} y_t      for every u,v ∈ S and u–v path P
//!   Σ_{v∈T} d_uv >= |T| - |S|/2             for every T ⊆ S and u ∈ T
//!   y, d >= 0
//! ```
//!
//! Both row families are generated lazily. When the optimum exceeds `w`, the
//! row multipliers of the generated rows form a feasible point of the dual
//! (path flows `f`, spreading weights `g`), which yields a linear inequality
//! on `x` that every feasible interdiction set satisfies and the current `x`
//! violates.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, SubEdge, Subgraph, VertexId};
use crate::lp::{self, Cut, LinearProgram, LpStatus, Relation, Sense, Tolerances};

/// Distances from one source where a path costs its edge lengths plus the
/// weights of all its vertices, endpoints included.
#[derive(Clone, Debug)]
pub struct ShortestPaths {
    pub source: VertexId,
    pub dist: Vec<f64>,
    pub pred: Vec<Option<(VertexId, SubEdge)>>,
}

impl ShortestPaths {
    /// Vertex sequence source..target with the edges used, or `None` if
    /// unreachable.
    pub fn path_to(&self, target: VertexId) -> Option<(Vec<VertexId>, Vec<SubEdge>)> {
        if !self.dist.get(target).is_some_and(|d| d.is_finite()) {
            return None;
        }
        let mut verts = vec![target];
        let mut edges = Vec::new();
        let mut v = target;
        while let Some((p, e)) = self.pred[v] {
            verts.push(p);
            edges.push(e);
            v = p;
        }
        verts.reverse();
        edges.reverse();
        Some((verts, edges))
    }
}

/// Dijkstra on `h` (zombie vertices and edges included). `x` is indexed by
/// parent edge id and `y` by vertex id up to `h.id_bound()`.
pub fn node_weighted_shortest_paths(h: &Subgraph<'_>, x: &[f64], y: &[f64], source: VertexId) -> ShortestPaths {
    let adj = h.adjacency();
    let bound = h.id_bound();
    let mut dist = vec![f64::INFINITY; bound];
    let mut pred: Vec<Option<(VertexId, SubEdge)>> = vec![None; bound];
    let mut done = vec![false; bound];
    let mut heap = BinaryHeap::new();
    if h.contains_vertex(source) {
        dist[source] = y[source];
        heap.push(Reverse((OrderedFloat(dist[source]), source)));
    }
    while let Some(Reverse((OrderedFloat(d), v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(u, e) in &adj[v] {
            let nd = d + x[e.original] + y[u];
            if nd < dist[u] {
                dist[u] = nd;
                pred[u] = Some((v, e));
                heap.push(Reverse((OrderedFloat(nd), u)));
            }
        }
    }
    ShortestPaths { source, dist, pred }
}

/// Most violated spreading row over all anchors: for each anchor `u`, the
/// prefixes of `S` sorted by `d_u·` are the only candidates. `d` is indexed
/// by positions in `s`. Returns `(T, anchor, slack)` with negative slack
/// below `-tol`.
pub fn separate_spreading(d: &[Vec<f64>], s: &[VertexId], tol: f64) -> Option<(Vec<VertexId>, VertexId, f64)> {
    let mut best: Option<(Vec<VertexId>, VertexId, f64)> = None;
    for a in 0..s.len() {
        if let Some((t, slack)) = best_prefix(d, a) {
            if slack < -tol && best.as_ref().is_none_or(|b| slack < b.2) {
                best = Some((t.iter().map(|&i| s[i]).collect(), s[a], slack));
            }
        }
    }
    best
}

/// Prefix of positions (anchor first, then others by distance) minimizing
/// `Σ d - (|T| - k/2)` among those with `|T| > k/2`.
fn best_prefix(d: &[Vec<f64>], a: usize) -> Option<(Vec<usize>, f64)> {
    let k = d.len();
    let mut others: Vec<usize> = (0..k).filter(|&b| b != a).collect();
    others.sort_by(|&p, &q| d[a][p].total_cmp(&d[a][q]).then(p.cmp(&q)));
    let half = k as f64 / 2.0;
    let mut sum = d[a][a];
    let mut best: Option<(usize, f64)> = None;
    for len in 1..=k {
        if len > 1 {
            sum += d[a][others[len - 2]];
        }
        if (len as f64) <= half {
            continue;
        }
        let slack = sum - (len as f64 - half);
        if best.is_none_or(|(_, b)| slack < b) {
            best = Some((len, slack));
        }
    }
    best.map(|(len, slack)| {
        let mut t = vec![a];
        t.extend_from_slice(&others[..len - 1]);
        (t, slack)
    })
}

/// Feasible answer: vertex weights and the induced metric on `S`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeparatorSolution {
    /// Sorted.
    pub s: Vec<VertexId>,
    /// Indexed by parent vertex id; zero outside the subgraph.
    pub y: Vec<f64>,
    /// `d[i][j]` for `s[i]`, `s[j]`; symmetric, capped at 1.
    pub d: Vec<Vec<f64>>,
    pub objective: f64,
}

impl SeparatorSolution {
    pub fn index_of(&self, v: VertexId) -> Option<usize> {
        self.s.binary_search(&v).ok()
    }

    pub fn dist(&self, u: VertexId, v: VertexId) -> Option<f64> {
        Some(self.d[self.index_of(u)?][self.index_of(v)?])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathFlow {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<EdgeId>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadingWeight {
    pub t: Vec<VertexId>,
    pub anchor: VertexId,
    pub value: f64,
}

/// Dual point read off the generated rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualCertificate {
    pub s: Vec<VertexId>,
    pub flows: Vec<PathFlow>,
    pub spreading: Vec<SpreadingWeight>,
    /// Optimum of the separator LP that produced it.
    pub lambda: f64,
}

impl DualCertificate {
    /// `c_e`: total flow on paths through edge `e`, sorted by edge id.
    pub fn coefficients(&self) -> Vec<(EdgeId, f64)> {
        let mut c: BTreeMap<EdgeId, f64> = BTreeMap::new();
        for f in &self.flows {
            for &e in &f.edges {
                *c.entry(e).or_insert(0.0) += f.value;
            }
        }
        c.into_iter().filter(|&(_, v)| v != 0.0).collect()
    }

    /// `K = Σ g_{T,v} (|T| - |S|/2)`.
    pub fn constant(&self) -> f64 {
        let half = self.s.len() as f64 / 2.0;
        self.spreading
            .iter()
            .map(|g| g.value * (g.t.len() as f64 - half))
            .sum()
    }

    /// Dual objective at lengths `x`: `K - Σ_e c_e x_e`.
    pub fn flow_objective(&self, x: &[f64]) -> f64 {
        self.constant() - self.coefficients().iter().map(|&(e, c)| c * x[e]).sum::<f64>()
    }

    /// The inequality `Σ c_e x_e >= K - w`.
    pub fn to_cut(&self, w: f64) -> Cut {
        Cut {
            coeffs: self.coefficients(),
            relation: Relation::Ge,
            rhs: self.constant() - w,
            tag: format!("S={:?}", self.s),
        }
    }

    /// Checks the dual constraints: per pair, the spreading load is covered
    /// by path flow; per vertex, the flow through it is at most 1.
    pub fn check_valid(&self, tol: f64) -> Result<()> {
        let mut load: BTreeMap<(VertexId, VertexId), f64> = BTreeMap::new();
        for g in &self.spreading {
            if g.value < -tol {
                return Err(Error::invariant("negative spreading weight"));
            }
            for &t in &g.t {
                *load.entry(pair(t, g.anchor)).or_insert(0.0) += g.value;
            }
        }
        let mut flow: BTreeMap<(VertexId, VertexId), f64> = BTreeMap::new();
        let mut through: BTreeMap<VertexId, f64> = BTreeMap::new();
        for f in &self.flows {
            if f.value < -tol {
                return Err(Error::invariant("negative path flow"));
            }
            let ends = pair(f.vertices[0], *f.vertices.last().expect("non-empty path"));
            *flow.entry(ends).or_insert(0.0) += f.value;
            for &t in &f.vertices {
                *through.entry(t).or_insert(0.0) += f.value;
            }
        }
        for (p, l) in &load {
            let have = flow.get(p).copied().unwrap_or(0.0);
            if *l > have + tol {
                return Err(Error::invariant(format!(
                    "pair {p:?} carries spreading load {l} but flow {have}"
                )));
            }
        }
        if let Some((t, v)) = through.iter().find(|(_, &v)| v > 1.0 + tol) {
            return Err(Error::invariant(format!("vertex {t} carries flow {v} > 1")));
        }
        Ok(())
    }
}

fn pair(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Turns a certificate into a cut, refusing one that `x` does not violate.
pub fn extract_cut(cert: &DualCertificate, x: &[f64], w: f64, tol: &Tolerances) -> Result<Cut> {
    cert.check_valid(tol.feas.max(1e-6))?;
    let cut = cert.to_cut(w);
    let violation = cut.violation(x);
    if violation < tol.cut {
        return Err(Error::StalledCut {
            violation,
            tol: tol.cut,
        });
    }
    Ok(cut)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SepOutcome {
    Feasible(SeparatorSolution),
    Cut(DualCertificate),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SepLpStats {
    pub rounds: usize,
    pub path_rows: usize,
    pub spreading_rows: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SepLpConfig {
    pub tol: Tolerances,
    pub max_rounds: usize,
}

impl Default for SepLpConfig {
    fn default() -> Self {
        SepLpConfig {
            tol: Tolerances::default(),
            max_rounds: 500,
        }
    }
}

enum RowKind {
    Path { vertices: Vec<VertexId>, edges: Vec<EdgeId> },
    Spreading { t: Vec<VertexId>, anchor: VertexId },
}

struct Builder<'a> {
    lp: LinearProgram,
    kinds: Vec<RowKind>,
    y_var: BTreeMap<VertexId, usize>,
    d_var: Vec<Vec<usize>>,
    s: &'a [VertexId],
    pos: BTreeMap<VertexId, usize>,
    seen_paths: BTreeSet<Vec<VertexId>>,
    seen_spreading: BTreeSet<(VertexId, Vec<VertexId>)>,
}

impl Builder<'_> {
    fn add_path(&mut self, vertices: Vec<VertexId>, edges: &[SubEdge], x: &[f64]) -> bool {
        let key = if vertices.first() <= vertices.last() {
            vertices.clone()
        } else {
            vertices.iter().rev().copied().collect()
        };
        if !self.seen_paths.insert(key) {
            return false;
        }
        let (a, b) = (self.pos[&vertices[0]], self.pos[vertices.last().expect("non-empty")]);
        let mut coeffs = vec![(self.d_var[a][b], 1.0)];
        coeffs.extend(vertices.iter().map(|v| (self.y_var[v], -1.0)));
        let len: f64 = edges.iter().map(|e| x[e.original]).sum();
        let name = format!("path{}", self.kinds.len());
        self.lp.add_constraint(name, coeffs, Relation::Le, len);
        self.kinds.push(RowKind::Path {
            vertices,
            edges: edges.iter().map(|e| e.original).collect(),
        });
        true
    }

    fn add_spreading(&mut self, t: Vec<VertexId>, anchor: VertexId) -> bool {
        let mut key_t = t.clone();
        key_t.sort_unstable();
        if !self.seen_spreading.insert((anchor, key_t)) {
            return false;
        }
        let a = self.pos[&anchor];
        let coeffs = t.iter().map(|v| (self.d_var[a][self.pos[v]], 1.0)).collect();
        let rhs = t.len() as f64 - self.s.len() as f64 / 2.0;
        let name = format!("spread{}", self.kinds.len());
        self.lp.add_constraint(name, coeffs, Relation::Ge, rhs);
        self.kinds.push(RowKind::Spreading { t, anchor });
        true
    }
}

/// Solves the separator LP for `S` on the real subgraph `h`. Feasible if the
/// optimum is at most `w + tol.feas`; otherwise returns the dual certificate.
pub fn solve_sep_lp(
    h: &Subgraph<'_>,
    x: &[f64],
    s: &[VertexId],
    w: f64,
    cfg: &SepLpConfig,
) -> Result<(SepOutcome, SepLpStats)> {
    let mut s_sorted = s.to_vec();
    s_sorted.sort_unstable();
    s_sorted.dedup();
    if let Some(&v) = s_sorted.iter().find(|&&v| !h.contains_vertex(v) || h.is_zombie(v)) {
        return Err(Error::InvalidParameter(format!("S vertex {v} is not in the subgraph")));
    }
    if x.len() != h.parent().edge_count() || x.iter().any(|v| !(0.0..=1.0 + 1e-9).contains(v)) {
        return Err(Error::InvalidParameter("x must lie in [0,1]^E".into()));
    }
    let s = &s_sorted[..];
    let k = s.len();
    let n = h.parent().vertex_count();

    let mut lp = LinearProgram::new(Sense::Minimize);
    let mut y_var = BTreeMap::new();
    for &v in h.vertices() {
        y_var.insert(v, lp.add_variable(format!("y{v}"), 0.0, f64::INFINITY, 1.0));
    }
    let mut d_var = vec![vec![0usize; k]; k];
    for a in 0..k {
        for b in a..k {
            let id = lp.add_variable(format!("d{}_{}", s[a], s[b]), 0.0, f64::INFINITY, 0.0);
            d_var[a][b] = id;
            d_var[b][a] = id;
        }
    }
    let mut bld = Builder {
        lp,
        kinds: Vec::new(),
        y_var,
        d_var,
        s,
        pos: s.iter().enumerate().map(|(i, &v)| (v, i)).collect(),
        seen_paths: BTreeSet::new(),
        seen_spreading: BTreeSet::new(),
    };

    let mut y_full = vec![0.0; h.id_bound()];
    for a in 0..k {
        let sp = node_weighted_shortest_paths(h, x, &y_full, s[a]);
        for &b in &s[a..] {
            if let Some((verts, edges)) = sp.path_to(b) {
                bld.add_path(verts, &edges, x);
            }
        }
    }
    if k > 0 {
        for &a in s {
            let mut t = vec![a];
            t.extend(s.iter().copied().filter(|&v| v != a));
            bld.add_spreading(t, a);
        }
    }

    let tol = cfg.tol;
    let mut stats = SepLpStats::default();
    let mut sol;
    let mut warm = lp::WarmStart::new();
    loop {
        stats.rounds += 1;
        if stats.rounds > cfg.max_rounds {
            return Err(Error::IterationCap(cfg.max_rounds));
        }
        sol = warm.solve(&bld.lp, &tol)?;
        if sol.status != LpStatus::Optimal {
            return Err(Error::Lp(format!("separator LP is {:?}", sol.status)));
        }
        for (&v, &j) in &bld.y_var {
            y_full[v] = sol.primal[j].max(0.0);
        }
        let dm: Vec<Vec<f64>> = (0..k)
            .map(|a| (0..k).map(|b| sol.primal[bld.d_var[a][b]]).collect())
            .collect();
        let mut added = false;
        for a in 0..k {
            let sp = node_weighted_shortest_paths(h, x, &y_full, s[a]);
            for b in a..k {
                if dm[a][b] > sp.dist[s[b]] + tol.feas {
                    if let Some((verts, edges)) = sp.path_to(s[b]) {
                        added |= bld.add_path(verts, &edges, x);
                    }
                }
            }
        }
        for a in 0..k {
            if let Some((t, slack)) = best_prefix(&dm, a) {
                if slack < -tol.feas {
                    added |= bld.add_spreading(t.iter().map(|&i| s[i]).collect(), s[a]);
                }
            }
        }
        if !added {
            break;
        }
    }
    stats.path_rows = bld.kinds.iter().filter(|r| matches!(r, RowKind::Path { .. })).count();
    stats.spreading_rows = bld.kinds.len() - stats.path_rows;

    let lambda = sol.objective;
    // A point within the cut tolerance could only yield a stalled cut.
    if lambda <= w + tol.cut.max(tol.feas) {
        let mut y = vec![0.0; n];
        for (&v, &j) in &bld.y_var {
            y[v] = sol.primal[j].max(0.0);
        }
        let mut d = vec![vec![0.0; k]; k];
        for a in 0..k {
            let sp = node_weighted_shortest_paths(h, x, &y_full, s[a]);
            for b in 0..k {
                d[a][b] = sp.dist[s[b]].min(1.0);
            }
        }
        for a in 0..k {
            for b in 0..a {
                let m = d[a][b].min(d[b][a]);
                d[a][b] = m;
                d[b][a] = m;
            }
        }
        if let Some((_, _, slack)) = separate_spreading(&d, s, tol.feas * 10.0) {
            return Err(Error::invariant(format!(
                "returned metric violates a spreading row by {slack:e}"
            )));
        }
        return Ok((
            SepOutcome::Feasible(SeparatorSolution {
                s: s.to_vec(),
                y,
                d,
                objective: lambda,
            }),
            stats,
        ));
    }

    // Row multipliers: path rows are `<=` in a minimization, so their duals
    // are non-positive and the flow is their negation.
    let mut flows = Vec::new();
    let mut spreading = Vec::new();
    for (kind, &dual) in bld.kinds.iter().zip(&sol.duals) {
        match kind {
            RowKind::Path { vertices, edges } => {
                let f = (-dual).max(0.0);
                if f > 0.0 {
                    flows.push(PathFlow {
                        vertices: vertices.clone(),
                        edges: edges.clone(),
                        value: f,
                    });
                }
            }
            RowKind::Spreading { t, anchor } => {
                let g = dual.max(0.0);
                if g > 0.0 {
                    spreading.push(SpreadingWeight {
                        t: t.clone(),
                        anchor: *anchor,
                        value: g,
                    });
                }
            }
        }
    }
    let cert = DualCertificate {
        s: s.to_vec(),
        flows,
        spreading,
        lambda,
    };
    cert.check_valid(1e-6)?;
    let dual_obj = cert.flow_objective(x);
    if (dual_obj - lambda).abs() > tol.gap * (1.0 + lambda.abs()) {
        return Err(Error::Lp(format!(
            "certificate objective {dual_obj} does not match optimum {lambda}"
        )));
    }
    Ok((SepOutcome::Cut(cert), stats))
}
