//! Treewidth interdiction by round-or-separate.
//!
//! The master LP minimizes `Σ x_e` over `[0,1]^E` and the cuts found so far.
//! For a master point `x` the recursion below tries to build a tree
//! decomposition of `G - F`: at every node it solves the separator LP for
//! the node's terminal set `S`, and either carves the subgraph with
//! [`partition`] or, when the LP optimum exceeds `w`, hands back the dual
//! certificate as a new cut.
//!
//! Each non-leaf node first adds one non-terminal vertex of largest degree
//! to `S`. This guarantees that the recursion makes progress even when the
//! terminal set is empty or already separated.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{connected_components, EdgeId, Graph, Subgraph, VertexId};
use crate::lp::{self, Cut, LinearProgram, Sense, Separation, Tolerances};
use crate::region::{partition, RegionConfig};
use crate::seplp::{extract_cut, solve_sep_lp, SepLpConfig, SepOutcome};
use crate::treedec::{RecursionTrace, TraceNode, TreeDecomposition};

pub const SCHEMA_VERSION: u32 = 1;

/// Largest bag the recursion may create for target width `w`.
///
/// With `|S_child| <= 2L/3 + κ ln(w²+1)(w + L/w)` the fixed point is
/// `L = 3κ ln(w²+1) w / (1 - 3κ ln(w²+1)/w)`; when the denominator is not
/// positive the fallback `6κ w ln(w²+1)` is used.
pub fn bag_cap(w: usize, kappa: f64) -> usize {
    let wf = w as f64;
    let l = (wf * wf + 1.0).ln();
    let denom = 1.0 - 3.0 * kappa * l / wf;
    let cap = if denom > 0.0 {
        3.0 * kappa * l * wf / denom
    } else {
        6.0 * kappa * wf * l
    };
    (cap.ceil() as usize).max(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum S0Policy {
    /// The `min(w+1, n)` vertices of largest degree, lowest id first on ties.
    HighestDegree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Leaves only once a subgraph fits in one bag of the proven size.
    Paper,
    /// Keeps recursing down to subgraphs of at most `w` vertices.
    Fast,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterdictConfig {
    pub w: usize,
    pub bag_cap: usize,
    /// A node with at most this many vertices becomes a leaf.
    pub leaf_size: usize,
    pub s0_policy: S0Policy,
    pub max_cut_rounds: usize,
    pub tol: Tolerances,
    pub sep: SepLpConfig,
    pub region: RegionConfig,
}

impl InterdictConfig {
    pub fn preset(preset: Preset, w: usize) -> Self {
        let region = RegionConfig::default();
        let cap = bag_cap(w, region.kappa);
        InterdictConfig {
            w,
            bag_cap: cap,
            leaf_size: match preset {
                Preset::Paper => cap,
                Preset::Fast => w,
            },
            s0_policy: S0Policy::HighestDegree,
            max_cut_rounds: 2000,
            tol: Tolerances::default(),
            sep: SepLpConfig::default(),
            region,
        }
    }

    pub fn paper(w: usize) -> Self {
        Self::preset(Preset::Paper, w)
    }

    pub fn fast(w: usize) -> Self {
        Self::preset(Preset::Fast, w)
    }

    pub fn validate(&self) -> Result<()> {
        if self.w == 0 {
            return Err(Error::InvalidParameter("w must be at least 1".into()));
        }
        if self.bag_cap < self.w {
            return Err(Error::InvalidParameter(format!(
                "bag_cap {} is below w = {}",
                self.bag_cap, self.w
            )));
        }
        if self.leaf_size > self.bag_cap {
            return Err(Error::InvalidParameter(format!(
                "leaf_size {} exceeds bag_cap {}",
                self.leaf_size, self.bag_cap
            )));
        }
        if self.max_cut_rounds == 0 {
            return Err(Error::InvalidParameter("max_cut_rounds must be positive".into()));
        }
        Ok(())
    }
}

/// Initial terminal set.
pub fn initial_terminals(g: &Graph, policy: S0Policy, w: usize) -> Vec<VertexId> {
    match policy {
        S0Policy::HighestDegree => {
            let mut order: Vec<VertexId> = (0..g.vertex_count()).collect();
            order.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
            order.truncate((w + 1).min(g.vertex_count()));
            order.sort_unstable();
            order
        }
    }
}

/// Aggregates over the recursion nodes at one depth.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub depth: usize,
    pub nodes: usize,
    pub leaves: usize,
    pub separator_vertices: usize,
    pub deleted_edges: usize,
    pub regions: usize,
    pub vol_x: f64,
    pub vol_y: f64,
}

/// A finished recursion for one master point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecursionRun {
    pub deleted: Vec<EdgeId>,
    pub trace: RecursionTrace,
    pub levels: Vec<LevelStats>,
    pub sep_lp_solves: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum InterdictOutcome {
    Done(RecursionRun),
    NeedCut { cut: Cut, s: Vec<VertexId>, lambda: f64 },
}

struct Task {
    vertices: Vec<VertexId>,
    edges: Vec<EdgeId>,
    s: Vec<VertexId>,
    parent: Option<usize>,
    depth: usize,
}

fn depth_cap(n: usize) -> usize {
    n + 4 * (n.max(2) as f64).log2().ceil() as usize + 10
}

/// Runs the recursion for the master point `x`.
pub fn interdict_with_solution(g: &Graph, x: &[f64], cfg: &InterdictConfig) -> Result<InterdictOutcome> {
    cfg.validate()?;
    if x.len() != g.edge_count() {
        return Err(Error::InvalidParameter(format!(
            "x has {} entries for {} edges",
            x.len(),
            g.edge_count()
        )));
    }
    let n = g.vertex_count();
    let total_cost: f64 = x.iter().sum();
    let w = cfg.w as f64;
    let s0: BTreeSet<VertexId> = initial_terminals(g, cfg.s0_policy, cfg.w).into_iter().collect();

    let mut queue: VecDeque<Task> = VecDeque::new();
    for comp in connected_components(g) {
        let set: BTreeSet<VertexId> = comp.iter().copied().collect();
        let edges = (0..g.edge_count())
            .filter(|&e| set.contains(&g.edge(e).u))
            .collect();
        queue.push_back(Task {
            s: comp.iter().copied().filter(|v| s0.contains(v)).collect(),
            vertices: comp,
            edges,
            parent: None,
            depth: 0,
        });
    }

    let mut nodes: Vec<TraceNode> = Vec::new();
    let mut deleted: BTreeSet<EdgeId> = BTreeSet::new();
    let mut levels: BTreeMap<usize, LevelStats> = BTreeMap::new();
    let mut solves = 0;
    let cap = depth_cap(n);
    while let Some(task) = queue.pop_front() {
        if task.depth > cap {
            return Err(Error::invariant(format!("recursion deeper than {cap}")));
        }
        let id = nodes.len();
        if let Some(p) = task.parent {
            nodes[p].children.push(id);
        }
        let level = levels.entry(task.depth).or_insert_with(|| LevelStats {
            depth: task.depth,
            ..LevelStats::default()
        });
        level.nodes += 1;

        let h = Subgraph::new(g, task.vertices.clone(), task.edges.clone())?;
        let s_set: BTreeSet<VertexId> = task.s.iter().copied().collect();
        let extra = task
            .vertices
            .iter()
            .copied()
            .filter(|v| !s_set.contains(v))
            .max_by_key(|&v| (h_degree(&h, v), std::cmp::Reverse(v)));
        let leaf = task.vertices.len() <= cfg.leaf_size || extra.is_none();
        if leaf {
            if task.vertices.len() > cfg.bag_cap {
                return Err(Error::WidthCap {
                    width: task.vertices.len() - 1,
                    cap: cfg.bag_cap - 1,
                });
            }
            level.leaves += 1;
            nodes.push(TraceNode {
                parent: task.parent,
                vertices: task.vertices,
                s: task.s,
                added: None,
                x: Vec::new(),
                d: Vec::new(),
                children: Vec::new(),
                leaf: true,
            });
            continue;
        }

        let added = extra.expect("checked above");
        let mut s = task.s.clone();
        s.push(added);
        s.sort_unstable();
        if s.len() > cfg.bag_cap {
            return Err(Error::WidthCap {
                width: s.len() - 1,
                cap: cfg.bag_cap - 1,
            });
        }
        solves += 1;
        let (outcome, _) = solve_sep_lp(&h, x, &s, w, &cfg.sep)?;
        let sol = match outcome {
            SepOutcome::Feasible(sol) => sol,
            SepOutcome::Cut(cert) => {
                let mut cut = extract_cut(&cert, x, w, &cfg.tol)?;
                cut.tag = format!("S={s:?} depth={}", task.depth);
                return Ok(InterdictOutcome::NeedCut {
                    cut,
                    s,
                    lambda: cert.lambda,
                });
            }
        };
        let part = partition(&h, &s, x, &sol.y, cfg.w, total_cost, &cfg.region)?;
        let bag: BTreeSet<VertexId> = s.iter().chain(&part.x).copied().collect();
        if bag.len() > cfg.bag_cap {
            return Err(Error::WidthCap {
                width: bag.len() - 1,
                cap: cfg.bag_cap - 1,
            });
        }
        level.separator_vertices += part.x.len();
        level.deleted_edges += part.d.len();
        level.regions += part.regions.len();
        level.vol_x += part.regions.iter().map(|r| r.vol_x).sum::<f64>();
        level.vol_y += part.regions.iter().map(|r| r.vol_y).sum::<f64>();
        for &e in &part.d {
            if !deleted.insert(e) {
                return Err(Error::invariant(format!("edge {e} deleted twice")));
            }
        }
        let d_set: BTreeSet<EdgeId> = part.d.iter().copied().collect();
        for comp in &part.components {
            let child = h.boundary_subgraph(comp, &d_set)?;
            queue.push_back(Task {
                s: child.vertices().iter().copied().filter(|v| bag.contains(v)).collect(),
                vertices: child.vertices().to_vec(),
                edges: child.edges().to_vec(),
                parent: Some(id),
                depth: task.depth + 1,
            });
        }
        nodes.push(TraceNode {
            parent: task.parent,
            vertices: task.vertices,
            s: task.s,
            added: Some(added),
            x: part.x,
            d: part.d,
            children: Vec::new(),
            leaf: false,
        });
    }
    let trace = RecursionTrace { nodes };
    trace.check()?;
    Ok(InterdictOutcome::Done(RecursionRun {
        deleted: deleted.into_iter().collect(),
        trace,
        levels: levels.into_values().collect(),
        sep_lp_solves: solves,
    }))
}

fn h_degree(h: &Subgraph<'_>, v: VertexId) -> usize {
    h.parent()
        .incident(v)
        .iter()
        .filter(|&&(_, e)| h.contains_edge(e))
        .count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterdictionStats {
    /// Final master objective: a lower bound on the optimal interdiction.
    pub lp_lower_bound: f64,
    pub cuts: usize,
    pub master_rounds: usize,
    /// `|F| / LP-cost`, absent when the LP cost is zero.
    pub ratio: Option<f64>,
    /// Bound `2 ln(n+1) κ ln ln(e(n+1))` on the ratio.
    pub ratio_bound: f64,
    pub sep_lp_solves: usize,
    pub levels: Vec<LevelStats>,
    pub master_objectives: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterdictionResult {
    pub schema_version: u32,
    pub w: usize,
    pub bag_cap: usize,
    pub deleted: Vec<EdgeId>,
    pub deleted_edges: Vec<(VertexId, VertexId)>,
    pub width: usize,
    pub decomposition: TreeDecomposition,
    pub cuts: Vec<Cut>,
    pub final_x: Vec<f64>,
    pub stats: InterdictionStats,
    pub trace: RecursionTrace,
}

/// Alternates master LP solves and recursion attempts until the recursion
/// succeeds for the current master point.
pub fn round_or_separate(g: &Graph, cfg: &InterdictConfig) -> Result<InterdictionResult> {
    cfg.validate()?;
    let mut master = LinearProgram::new(Sense::Minimize);
    for (e, edge) in g.edges().iter().enumerate() {
        master.add_variable(format!("x{e}_{}_{}", edge.u, edge.v), 0.0, 1.0, 1.0);
    }
    let outcome = lp::cutting_plane(&master, &cfg.tol, cfg.max_cut_rounds, |sol, _round| {
        let x: Vec<f64> = sol.primal.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        match interdict_with_solution(g, &x, cfg)? {
            InterdictOutcome::Done(run) => Ok(Separation::Feasible((run, x))),
            InterdictOutcome::NeedCut { cut, .. } => Ok(Separation::Cut(cut)),
        }
    })?;
    let (run, x) = outcome.payload;
    let decomposition = run.trace.assemble()?;
    let removed: BTreeSet<EdgeId> = run.deleted.iter().copied().collect();
    let residual = g.without_edges(&removed);
    decomposition
        .validate(&residual)
        .map_err(|v| Error::invariant(format!("assembled decomposition is invalid: {v}")))?;
    let width = decomposition.width();
    if width + 1 > cfg.bag_cap.max(1) {
        return Err(Error::WidthCap {
            width,
            cap: cfg.bag_cap - 1,
        });
    }
    let lp_cost: f64 = x.iter().sum();
    let n = g.vertex_count();
    let ratio_bound = 2.0 * ((n + 1) as f64).ln() * cfg.region.kappa * crate::region::log_log_factor(n);
    let stats = InterdictionStats {
        lp_lower_bound: outcome.solution.objective,
        cuts: outcome.pool.len(),
        master_rounds: outcome.objectives.len(),
        ratio: (lp_cost > cfg.tol.feas).then(|| run.deleted.len() as f64 / lp_cost),
        ratio_bound,
        sep_lp_solves: run.sep_lp_solves,
        levels: run.levels,
        master_objectives: outcome.objectives,
    };
    Ok(InterdictionResult {
        schema_version: SCHEMA_VERSION,
        w: cfg.w,
        bag_cap: cfg.bag_cap,
        deleted_edges: run.deleted.iter().map(|&e| (g.edge(e).u, g.edge(e).v)).collect(),
        deleted: run.deleted,
        width,
        decomposition,
        cuts: outcome.pool.records.into_iter().map(|r| r.cut).collect(),
        final_x: x,
        stats,
        trace: run.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::{exact_interdiction, exact_treewidth, OracleBudget};

    fn grid(k: usize) -> Graph {
        let mut edges = Vec::new();
        for r in 0..k {
            for c in 0..k {
                let v = r * k + c;
                if c + 1 < k {
                    edges.push((v, v + 1));
                }
                if r + 1 < k {
                    edges.push((v, v + k));
                }
            }
        }
        Graph::new(k * k, edges).unwrap()
    }

    fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).unwrap()
    }

    #[test]
    fn bag_cap_values() {
        assert_eq!(bag_cap(1, 48.0), (6.0 * 48.0 * 2f64.ln()).ceil() as usize);
        assert_eq!(bag_cap(2, 48.0), (6.0 * 48.0 * 2.0 * 5f64.ln()).ceil() as usize);
        for w in 1..50 {
            assert!(bag_cap(w, 48.0) >= w);
        }
        // Past the threshold the fixed point applies and is finite.
        let w = 5000;
        let l = ((w * w + 1) as f64).ln();
        let expect = 3.0 * 48.0 * l * w as f64 / (1.0 - 144.0 * l / w as f64);
        assert_eq!(bag_cap(w, 48.0), expect.ceil() as usize);
    }

    #[test]
    fn initial_terminals_prefer_degree_then_id() {
        let g = Graph::new(5, [(0, 1), (1, 2), (1, 3), (3, 4)]).unwrap();
        assert_eq!(initial_terminals(&g, S0Policy::HighestDegree, 1), vec![1, 3]);
        assert_eq!(initial_terminals(&g, S0Policy::HighestDegree, 10).len(), 5);
    }

    #[test]
    fn tree_needs_no_deletion() {
        let g = Graph::new(7, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]).unwrap();
        for cfg in [InterdictConfig::paper(2), InterdictConfig::fast(2)] {
            let res = round_or_separate(&g, &cfg).unwrap();
            assert!(res.deleted.is_empty());
            assert_eq!(res.stats.lp_lower_bound, 0.0);
            res.decomposition.validate(&g).unwrap();
        }
    }

    #[test]
    fn four_cycle_width_one() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let cfg = InterdictConfig::fast(1);
        let res = round_or_separate(&g, &cfg).unwrap();
        let exact = exact_interdiction(&g, 1, &OracleBudget::default()).unwrap();
        assert!(res.stats.lp_lower_bound <= exact.deleted.len() as f64 + 1e-6);
        let left = g.without_edges(&res.deleted.iter().copied().collect());
        let tw = exact_treewidth(&left, &OracleBudget::default()).unwrap().width;
        assert!(tw < cfg.bag_cap);
    }

    #[test]
    fn k5_width_two_cuts_are_sound() {
        let g = complete(5);
        let cfg = InterdictConfig::fast(2);
        let res = round_or_separate(&g, &cfg).unwrap();
        let sets = crate::oracles::all_interdiction_sets(&g, 2, &OracleBudget::default()).unwrap();
        for cut in &res.cuts {
            for &mask in &sets {
                let x: Vec<f64> = (0..g.edge_count()).map(|e| ((mask >> e) & 1) as f64).collect();
                assert!(cut.violation(&x) <= 1e-6, "cut {} rejects a feasible set", cut.tag);
            }
        }
        let exact = exact_interdiction(&g, 2, &OracleBudget::default()).unwrap();
        assert!(res.stats.lp_lower_bound <= exact.deleted.len() as f64 + 1e-6);
    }

    #[test]
    fn grid_run_validates() {
        let g = grid(5);
        let cfg = InterdictConfig::fast(2);
        let res = round_or_separate(&g, &cfg).unwrap();
        let left = g.without_edges(&res.deleted.iter().copied().collect());
        res.decomposition.validate(&left).unwrap();
        assert!(res.width < cfg.bag_cap);
        if let Some(r) = res.stats.ratio {
            assert!(r <= res.stats.ratio_bound);
        }
        res.trace.check().unwrap();
        let total: usize = res.trace.nodes.iter().map(|n| n.d.len()).sum();
        assert_eq!(total, res.deleted.len());
    }

    #[test]
    fn runs_are_deterministic() {
        let g = grid(4);
        let cfg = InterdictConfig::fast(2);
        let a = round_or_separate(&g, &cfg).unwrap();
        let b = round_or_separate(&g, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_config() {
        let g = complete(3);
        let mut cfg = InterdictConfig::fast(1);
        cfg.w = 0;
        assert!(round_or_separate(&g, &cfg).is_err());
        let mut cfg = InterdictConfig::fast(2);
        cfg.leaf_size = cfg.bag_cap + 1;
        assert!(round_or_separate(&g, &cfg).is_err());
    }

    #[test]
    fn edgeless_graph() {
        let g = Graph::empty(3);
        let res = round_or_separate(&g, &InterdictConfig::fast(1)).unwrap();
        assert!(res.deleted.is_empty());
        res.decomposition.validate(&g).unwrap();
    }
}
