//! End-to-end solvers: maximum independent set on noisy planar graphs and
//! MAX-k-SAT on noisy planar formulas, plus the tree-decomposition DP.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bsi::{bsi_solve, BsiConfig};
use crate::cnf::{build_factor_graph, CnfFormula};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::interdict::{round_or_separate, InterdictConfig, SCHEMA_VERSION};
use crate::oracles::{exact_mis, OracleBudget};
use crate::treedec::{heuristic_decomposition, make_nice, NiceKind, NiceTreeDecomposition, TreeDecomposition};

/// Default cap on the width accepted by [`maxsat_dp`].
pub const DP_WIDTH_CAP: usize = 24;

#[derive(Clone, Copy, Debug)]
enum Back {
    Start,
    One(u64),
    Two(u64, u64),
}

type Table = BTreeMap<u64, (usize, Back)>;

fn bit(bag: &[VertexId], mask: u64, v: VertexId) -> Option<bool> {
    bag.binary_search(&v).ok().map(|i| mask >> i & 1 == 1)
}

/// Copies the bits of vertices present in both bags.
fn remap(mask: u64, from: &[VertexId], to: &[VertexId]) -> u64 {
    let mut out = 0;
    for (i, v) in from.iter().enumerate() {
        if mask >> i & 1 == 1 {
            if let Ok(j) = to.binary_search(v) {
                out |= 1 << j;
            }
        }
    }
    out
}

/// Exact MAX-SAT over a nice decomposition of the factor graph.
///
/// A bag state packs one bit per bag vertex: the value of a variable, or
/// whether a clause is already satisfied by some variable seen with it. A
/// clause adds its flag to the score when forgotten.
pub fn maxsat_dp(phi: &CnfFormula, t: &NiceTreeDecomposition, width_cap: usize) -> Result<(usize, Vec<bool>)> {
    let width = t.width();
    if width > width_cap.min(62) {
        return Err(Error::WidthCap { width, cap: width_cap.min(62) });
    }
    t.check_shape()?;
    let fg = build_factor_graph(phi);
    t.to_tree_decomposition()
        .validate(&fg)
        .map_err(|v| Error::InvalidParameter(format!("decomposition does not fit the factor graph: {v}")))?;
    let n = phi.num_vars();
    let is_var = |v: VertexId| v < n;
    let lit_ok = |clause: VertexId, var: VertexId, value: bool| {
        phi.clause(clause - n)
            .iter()
            .any(|l| l.var == var && l.satisfied_by(value))
    };

    let mut tables: Vec<Table> = Vec::with_capacity(t.nodes.len());
    for node in &t.nodes {
        let bag = &node.bag;
        let mut table = Table::new();
        let offer = |table: &mut Table, state: u64, score: usize, back: Back| {
            let slot = table.entry(state).or_insert((score, back));
            if score > slot.0 {
                *slot = (score, back);
            }
        };
        match node.kind {
            NiceKind::Leaf => {
                table.insert(0, (0, Back::Start));
            }
            NiceKind::Introduce(v) => {
                let cbag = &t.nodes[node.children[0]].bag;
                let pos = bag.binary_search(&v).expect("introduced vertex in bag");
                for (&cs, &(score, _)) in &tables[node.children[0]] {
                    let base = remap(cs, cbag, bag);
                    if is_var(v) {
                        for value in [false, true] {
                            let mut s = base | (u64::from(value) << pos);
                            for (j, &q) in bag.iter().enumerate() {
                                if !is_var(q) && lit_ok(q, v, value) {
                                    s |= 1 << j;
                                }
                            }
                            offer(&mut table, s, score, Back::One(cs));
                        }
                    } else {
                        let sat = bag
                            .iter()
                            .enumerate()
                            .any(|(j, &u)| is_var(u) && lit_ok(v, u, base >> j & 1 == 1));
                        offer(&mut table, base | (u64::from(sat) << pos), score, Back::One(cs));
                    }
                }
            }
            NiceKind::Forget(v) => {
                let cbag = &t.nodes[node.children[0]].bag;
                for (&cs, &(score, _)) in &tables[node.children[0]] {
                    let gain = if is_var(v) {
                        0
                    } else {
                        usize::from(bit(cbag, cs, v).expect("forgotten vertex in child"))
                    };
                    offer(&mut table, remap(cs, cbag, bag), score + gain, Back::One(cs));
                }
            }
            NiceKind::Join => {
                let var_mask: u64 = bag
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| is_var(v))
                    .fold(0, |m, (j, _)| m | 1 << j);
                let mut right: BTreeMap<u64, Vec<(u64, usize)>> = BTreeMap::new();
                for (&s, &(score, _)) in &tables[node.children[1]] {
                    right.entry(s & var_mask).or_default().push((s, score));
                }
                for (&ls, &(lscore, _)) in &tables[node.children[0]] {
                    for &(rs, rscore) in right.get(&(ls & var_mask)).into_iter().flatten() {
                        offer(&mut table, ls | rs, lscore + rscore, Back::Two(ls, rs));
                    }
                }
            }
        }
        tables.push(table);
    }

    let (count, _) = *tables[t.root]
        .get(&0)
        .ok_or_else(|| Error::invariant("root table has no empty state"))?;
    let mut assignment = vec![false; n];
    let mut stack = vec![(t.root, 0u64)];
    while let Some((i, state)) = stack.pop() {
        let node = &t.nodes[i];
        if let NiceKind::Introduce(v) = node.kind {
            if is_var(v) {
                assignment[v] = bit(&node.bag, state, v).expect("introduced vertex in bag");
            }
        }
        match tables[i][&state].1 {
            Back::Start => {}
            Back::One(c) => stack.push((node.children[0], c)),
            Back::Two(l, r) => {
                stack.push((node.children[0], l));
                stack.push((node.children[1], r));
            }
        }
    }
    let recount = phi.satisfied_count(&assignment);
    if recount != count {
        return Err(Error::invariant(format!("DP value {count} but assignment satisfies {recount}")));
    }
    Ok((count, assignment))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MisConfig {
    pub bsi: BsiConfig,
    /// Noise rate of the instance, when known.
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MisReport {
    pub schema_version: u32,
    pub config: MisConfig,
    pub vertices: usize,
    pub edges: usize,
    pub independent_set: Vec<VertexId>,
    pub objective: usize,
    /// Size of the union of per-component optima, before separator
    /// vertices with no chosen neighbour are added back.
    pub union_size: usize,
    /// `X''` from bounded-size interdiction.
    pub separator: Vec<VertexId>,
    pub component_sizes: Vec<usize>,
    pub bsi_a: usize,
    pub bsi_lp_objective: f64,
    pub cross_edges: usize,
    pub phases: usize,
    /// Independence was rechecked on every edge of the input graph.
    pub independence_verified: bool,
}

/// Independent set by bounded-size interdiction followed by exact search in
/// each remaining component. Separator vertices are then added greedily in id
/// order whenever none of their neighbours is chosen.
pub fn noisy_mis(g: &Graph, cfg: &MisConfig) -> Result<MisReport> {
    let bsi = bsi_solve(g, &cfg.bsi)?;
    let budget = OracleBudget {
        max_vertices: cfg.bsi.s.max(1),
        ..OracleBudget::default()
    };
    let mut set = Vec::new();
    for comp in &bsi.components {
        if comp.len() > cfg.bsi.s {
            return Err(Error::invariant(format!("component of size {} > s = {}", comp.len(), cfg.bsi.s)));
        }
        let (h, map) = g.induced(comp);
        set.extend(exact_mis(&h, &budget)?.into_iter().map(|v| map[v]));
    }
    let union_size = set.len();
    let mut chosen: BTreeSet<VertexId> = set.into_iter().collect();
    for &v in &bsi.separator {
        if g.neighbors(v).all(|u| !chosen.contains(&u)) {
            chosen.insert(v);
        }
    }
    let set: Vec<VertexId> = chosen.into_iter().collect();
    check_independent(g, &set)?;
    Ok(MisReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        objective: set.len(),
        union_size,
        independent_set: set,
        component_sizes: bsi.components.iter().map(Vec::len).collect(),
        separator: bsi.separator,
        bsi_a: bsi.a,
        bsi_lp_objective: bsi.lp.objective,
        cross_edges: bsi.result.cross_edges.len(),
        phases: bsi.result.phases,
        independence_verified: true,
    })
}

/// Fails naming the first edge with both ends in `set`.
pub fn check_independent(g: &Graph, set: &[VertexId]) -> Result<()> {
    let inside: BTreeSet<VertexId> = set.iter().copied().collect();
    if let Some(&v) = set.iter().find(|&&v| v >= g.vertex_count()) {
        return Err(Error::InvalidParameter(format!("vertex {v} out of range")));
    }
    match g.edges().iter().find(|e| inside.contains(&e.u) && inside.contains(&e.v)) {
        Some(e) => Err(Error::invariant(format!("edge ({}, {}) inside the set", e.u, e.v))),
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxSatConfig {
    pub interdict: InterdictConfig,
    pub width_cap: usize,
    pub delta: Option<f64>,
}

impl MaxSatConfig {
    pub fn new(interdict: InterdictConfig) -> Self {
        MaxSatConfig {
            interdict,
            width_cap: DP_WIDTH_CAP,
            delta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxSatReport {
    pub schema_version: u32,
    pub config: MaxSatConfig,
    pub variables: usize,
    pub clauses: usize,
    /// Factor-graph edges removed by interdiction, as (variable, clause index).
    pub deleted_edges: Vec<(usize, usize)>,
    pub deleted_clauses: Vec<usize>,
    /// Optimum of the formula without the deleted clauses.
    pub kept_optimum: usize,
    /// Clauses of the full formula satisfied by `assignment`.
    pub objective: usize,
    pub assignment: Vec<bool>,
    pub interdiction_width: usize,
    pub dp_width: usize,
    pub lp_lower_bound: f64,
    pub cuts: usize,
}

/// Interdicts the factor graph, drops every clause touching a deleted edge,
/// and solves the rest exactly on a decomposition of the residual.
pub fn noisy_maxsat(phi: &CnfFormula, cfg: &MaxSatConfig) -> Result<MaxSatReport> {
    let n = phi.num_vars();
    let h = build_factor_graph(phi);
    let res = round_or_separate(&h, &cfg.interdict)?;
    let deleted_edges: Vec<(usize, usize)> = res
        .deleted
        .iter()
        .map(|&id| {
            let e = h.edge(id);
            (e.u.min(e.v), e.u.max(e.v) - n)
        })
        .collect();
    let dropped: BTreeSet<usize> = deleted_edges.iter().map(|&(_, c)| c).collect();
    let kept = phi.retain_clauses(|i| !dropped.contains(&i));
    let mut new_id = BTreeMap::new();
    for (k, i) in (0..phi.num_clauses()).filter(|i| !dropped.contains(i)).enumerate() {
        new_id.insert(n + i, n + k);
    }
    let from_interdiction = res
        .decomposition
        .relabeled(|v| if v < n { Some(v) } else { new_id.get(&v).copied() });
    let kept_graph = build_factor_graph(&kept);
    let decomposition = narrower(from_interdiction, heuristic_decomposition(&kept_graph));
    decomposition
        .validate(&kept_graph)
        .map_err(|v| Error::invariant(format!("restricted decomposition invalid: {v}")))?;
    let nice = make_nice(&decomposition)?;
    let (kept_optimum, assignment) = maxsat_dp(&kept, &nice, cfg.width_cap)?;
    Ok(MaxSatReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        variables: n,
        clauses: phi.num_clauses(),
        deleted_edges,
        deleted_clauses: dropped.into_iter().collect(),
        kept_optimum,
        objective: phi.satisfied_count(&assignment),
        assignment,
        interdiction_width: res.width,
        dp_width: nice.width(),
        lp_lower_bound: res.stats.lp_lower_bound,
        cuts: res.cuts.len(),
    })
}

fn narrower(a: TreeDecomposition, b: TreeDecomposition) -> TreeDecomposition {
    if b.width() < a.width() {
        b
    } else {
        a
    }
}
