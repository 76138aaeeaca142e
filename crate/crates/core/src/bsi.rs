//! Bounded-size interdiction: remove few vertices so that, after also
//! cutting few edges, every piece has at most `s` vertices.
//!
//! The configuration LP has one variable per connected vertex set of size at
//! most `s` (a *piece*):
//!
//! ```text
//! min Σ_e x_e
//!   Σ_v y_v <= a
//!   Σ_{S∋v} z_S = 1 - y_v                  for every vertex v
//!   Σ_{S∋u, v∉S} z_S <= x_uv + y_v          for every edge, both orientations
//! ```
//!
//! Rounding puts every vertex with `y_v >= β` into `X'`, then samples pieces
//! phase by phase with probability `z_S` until every vertex is covered.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::lp::{self, LinearProgram, LpStatus, Relation, Sense, Tolerances};

/// Vertex with `y_v >= β - Y_TOL` counts as `y_v >= β`.
const Y_TOL: f64 = 1e-9;

/// Every connected vertex set of size `1..=s`, each sorted, ordered by size
/// then lexicographically. Fails once more than `max_pieces` are found.
pub fn enumerate_pieces(g: &Graph, s: usize, max_pieces: usize) -> Result<Vec<Vec<VertexId>>> {
    if s == 0 {
        return Err(Error::InvalidParameter("piece size s must be at least 1".into()));
    }
    let n = g.vertex_count();
    let mut out: Vec<Vec<VertexId>> = Vec::new();
    let mut sub: Vec<VertexId> = Vec::new();
    for v in 0..n {
        let ext: Vec<VertexId> = g.neighbors(v).filter(|&u| u > v).collect();
        sub.push(v);
        esu(g, v, s, &mut sub, ext, &mut out, max_pieces)?;
        sub.pop();
    }
    for p in &mut out {
        p.sort_unstable();
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Wernicke's ESU: each connected set is produced exactly once, rooted at
/// its smallest vertex.
fn esu(
    g: &Graph,
    root: VertexId,
    s: usize,
    sub: &mut Vec<VertexId>,
    mut ext: Vec<VertexId>,
    out: &mut Vec<Vec<VertexId>>,
    max_pieces: usize,
) -> Result<()> {
    out.push(sub.clone());
    if out.len() > max_pieces {
        return Err(Error::BudgetExceeded(format!(
            "more than {max_pieces} pieces of size <= {s}"
        )));
    }
    if sub.len() == s {
        return Ok(());
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        for u in g.neighbors(w) {
            if u > root && !sub.contains(&u) && !next.contains(&u) && !sub.iter().any(|&t| g.has_edge(t, u)) {
                next.push(u);
            }
        }
        sub.push(w);
        esu(g, root, s, sub, next, out, max_pieces)?;
        sub.pop();
    }
    Ok(())
}

/// The configuration LP together with its variable layout.
#[derive(Clone, Debug)]
pub struct ConfigLp {
    pub lp: LinearProgram,
    pub pieces: Vec<Vec<VertexId>>,
    pub x_var: Vec<usize>,
    pub y_var: Vec<usize>,
    pub z_var: Vec<usize>,
    pub a: f64,
}

/// Builds the LP over connected pieces of size at most `s`.
pub fn build_config_lp(g: &Graph, s: usize, a: f64, max_pieces: usize) -> Result<ConfigLp> {
    let pieces = enumerate_pieces(g, s, max_pieces)?;
    build_config_lp_with(g, pieces, a)
}

/// Builds the LP over an explicit piece family.
pub fn build_config_lp_with(g: &Graph, pieces: Vec<Vec<VertexId>>, a: f64) -> Result<ConfigLp> {
    if a < 0.0 {
        return Err(Error::InvalidParameter(format!("budget a = {a} is negative")));
    }
    let n = g.vertex_count();
    let mut lp = LinearProgram::new(Sense::Minimize);
    let x_var: Vec<usize> = g
        .edges()
        .iter()
        .enumerate()
        .map(|(i, e)| lp.add_variable(format!("x{i}_{}_{}", e.u, e.v), 0.0, f64::INFINITY, 1.0))
        .collect();
    let y_var: Vec<usize> = (0..n)
        .map(|v| lp.add_variable(format!("y{v}"), 0.0, f64::INFINITY, 0.0))
        .collect();
    let z_var: Vec<usize> = (0..pieces.len())
        .map(|i| lp.add_variable(format!("z{i}"), 0.0, f64::INFINITY, 0.0))
        .collect();
    lp.add_constraint("budget", y_var.iter().map(|&j| (j, 1.0)).collect(), Relation::Le, a);
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, p) in pieces.iter().enumerate() {
        for &v in p {
            containing[v].push(i);
        }
    }
    for v in 0..n {
        let mut coeffs: Vec<(usize, f64)> = containing[v].iter().map(|&i| (z_var[i], 1.0)).collect();
        coeffs.push((y_var[v], 1.0));
        lp.add_constraint(format!("cover{v}"), coeffs, Relation::Eq, 1.0);
    }
    for (id, e) in g.edges().iter().enumerate() {
        for (u, v) in [(e.u, e.v), (e.v, e.u)] {
            let mut coeffs: Vec<(usize, f64)> = containing[u]
                .iter()
                .filter(|&&i| pieces[i].binary_search(&v).is_err())
                .map(|&i| (z_var[i], 1.0))
                .collect();
            coeffs.push((x_var[id], -1.0));
            coeffs.push((y_var[v], -1.0));
            lp.add_constraint(format!("sep{u}_{v}"), coeffs, Relation::Le, 0.0);
        }
    }
    Ok(ConfigLp {
        lp,
        pieces,
        x_var,
        y_var,
        z_var,
        a,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigLpSolution {
    pub s: usize,
    pub a: f64,
    pub objective: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Support of `z`, in piece order.
    pub z: Vec<(Vec<VertexId>, f64)>,
}

impl ConfigLpSolution {
    /// Checks the LP rows at tolerance `tol`.
    pub fn check(&self, g: &Graph, tol: f64) -> Result<()> {
        let n = g.vertex_count();
        let ysum: f64 = self.y.iter().sum();
        if ysum > self.a + tol {
            return Err(Error::invariant(format!("Σy = {ysum} exceeds a = {}", self.a)));
        }
        let mut cover = vec![0.0; n];
        for (p, z) in &self.z {
            for &v in p {
                cover[v] += z;
            }
        }
        for v in 0..n {
            if (cover[v] + self.y[v] - 1.0).abs() > tol {
                return Err(Error::invariant(format!("vertex {v} covered {} + y {}", cover[v], self.y[v])));
            }
        }
        for (id, e) in g.edges().iter().enumerate() {
            for (u, v) in [(e.u, e.v), (e.v, e.u)] {
                let out: f64 = self
                    .z
                    .iter()
                    .filter(|(p, _)| p.binary_search(&u).is_ok() && p.binary_search(&v).is_err())
                    .map(|(_, z)| z)
                    .sum();
                if out > self.x[id] + self.y[v] + tol {
                    return Err(Error::invariant(format!("edge row {u}->{v} violated")));
                }
            }
        }
        Ok(())
    }
}

pub fn solve_config_lp(g: &Graph, s: usize, a: f64, max_pieces: usize, tol: &Tolerances) -> Result<ConfigLpSolution> {
    let model = build_config_lp(g, s, a, max_pieces)?;
    solve_model(g, s, &model, tol)
}

fn solve_model(g: &Graph, s: usize, model: &ConfigLp, tol: &Tolerances) -> Result<ConfigLpSolution> {
    let sol = lp::solve_with(&model.lp, tol)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(format!("configuration LP is {:?}", sol.status)));
    }
    let clean = |v: f64| if v.abs() < 1e-12 { 0.0 } else { v };
    let out = ConfigLpSolution {
        s,
        a: model.a,
        objective: sol.objective,
        x: model.x_var.iter().map(|&j| clean(sol.primal[j])).collect(),
        y: model.y_var.iter().map(|&j| clean(sol.primal[j])).collect(),
        z: model
            .z_var
            .iter()
            .zip(&model.pieces)
            .filter(|(&j, _)| sol.primal[j] > 1e-12)
            .map(|(&j, p)| (p.clone(), sol.primal[j]))
            .collect(),
    };
    out.check(g, 1e-6)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BsiResult {
    /// All separator vertices: preprocessing plus phase-cap leftovers.
    pub x_prime: Vec<VertexId>,
    /// Vertices with `y_v >= β`.
    pub preprocessed: Vec<VertexId>,
    /// Vertices still uncovered when the phase cap hit.
    pub leftovers: Vec<VertexId>,
    pub pieces: Vec<Vec<VertexId>>,
    /// Edge ids joining two different pieces.
    pub cross_edges: Vec<usize>,
    pub phases: usize,
    /// Phase (1-based) in which each vertex got covered; `None` for `X'`.
    pub covered_phase: Vec<Option<usize>>,
    pub seed: u64,
    /// `β > 1/2`: no sampling, vertices chopped into consecutive blocks.
    pub chopped: bool,
}

/// `⌈100 log₂ n⌉`, at least 1.
pub fn phase_cap(n: usize) -> usize {
    ((100.0 * (n.max(2) as f64).log2()).ceil() as usize).max(1)
}

/// Two-stage rounding of a configuration LP solution.
pub fn round_bsi(g: &Graph, sol: &ConfigLpSolution, beta: f64, seed: u64) -> Result<BsiResult> {
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::InvalidParameter(format!("beta = {beta} not in (0,1]")));
    }
    let n = g.vertex_count();
    let s = sol.s;
    let mut piece_of: Vec<Option<usize>> = vec![None; n];
    let mut pieces: Vec<Vec<VertexId>> = Vec::new();
    let mut covered_phase = vec![None; n];
    let mut preprocessed = Vec::new();
    let mut leftovers = Vec::new();
    let mut phases = 0;
    let chopped = beta > 0.5;
    if chopped {
        for chunk in (0..n).collect::<Vec<_>>().chunks(s) {
            for &v in chunk {
                piece_of[v] = Some(pieces.len());
                covered_phase[v] = Some(1);
            }
            pieces.push(chunk.to_vec());
        }
        phases = usize::from(n > 0);
    } else {
        preprocessed = (0..n).filter(|&v| sol.y[v] >= beta - Y_TOL).collect();
        let lemma_bound = sol.a / beta;
        if preprocessed.len() as f64 > lemma_bound + 1e-6 {
            return Err(Error::invariant(format!(
                "{} preprocessed vertices exceed a/β = {lemma_bound}",
                preprocessed.len()
            )));
        }
        let mut uncovered: BTreeSet<VertexId> = (0..n).collect();
        for v in &preprocessed {
            uncovered.remove(v);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cap = phase_cap(n);
        while !uncovered.is_empty() && phases < cap {
            phases += 1;
            for (p, z) in &sol.z {
                if !rng.gen_bool(z.clamp(0.0, 1.0)) {
                    continue;
                }
                let fresh: Vec<VertexId> = p.iter().copied().filter(|v| uncovered.contains(v)).collect();
                if fresh.is_empty() {
                    continue;
                }
                for &v in &fresh {
                    uncovered.remove(&v);
                    piece_of[v] = Some(pieces.len());
                    covered_phase[v] = Some(phases);
                }
                pieces.push(fresh);
            }
        }
        leftovers = uncovered.into_iter().collect();
    }
    let mut x_prime: Vec<VertexId> = preprocessed.iter().chain(&leftovers).copied().collect();
    x_prime.sort_unstable();
    let cross_edges = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| matches!((piece_of[e.u], piece_of[e.v]), (Some(a), Some(b)) if a != b))
        .map(|(i, _)| i)
        .collect();
    let res = BsiResult {
        x_prime,
        preprocessed,
        leftovers,
        pieces,
        cross_edges,
        phases,
        covered_phase,
        seed,
        chopped,
    };
    check_result(g, s, &res)?;
    Ok(res)
}

fn check_result(g: &Graph, s: usize, res: &BsiResult) -> Result<()> {
    let mut seen = vec![false; g.vertex_count()];
    for &v in res.x_prime.iter().chain(res.pieces.iter().flatten()) {
        if std::mem::replace(&mut seen[v], true) {
            return Err(Error::invariant(format!("vertex {v} assigned twice")));
        }
    }
    if let Some(v) = seen.iter().position(|&b| !b) {
        return Err(Error::invariant(format!("vertex {v} neither in X' nor in a piece")));
    }
    if let Some(p) = res.pieces.iter().find(|p| p.len() > s) {
        return Err(Error::invariant(format!("piece of size {} > s = {s}", p.len())));
    }
    Ok(())
}

/// Turns pieces into a proper separator: for every cross edge not yet
/// covered, moves the endpoint with more remaining cross edges (lower id on
/// ties) into the separator.
pub fn properize(g: &Graph, res: &BsiResult) -> Vec<VertexId> {
    let mut removed: BTreeSet<VertexId> = res.x_prime.iter().copied().collect();
    let mut load: BTreeMap<VertexId, usize> = BTreeMap::new();
    for &id in &res.cross_edges {
        let e = g.edge(id);
        *load.entry(e.u).or_insert(0) += 1;
        *load.entry(e.v).or_insert(0) += 1;
    }
    for &id in &res.cross_edges {
        let e = g.edge(id);
        if removed.contains(&e.u) || removed.contains(&e.v) {
            continue;
        }
        let pick = if load[&e.v] > load[&e.u] { e.v } else { e.u };
        removed.insert(pick);
        for &(other, eid) in g.incident(pick) {
            if res.cross_edges.binary_search(&eid).is_ok() {
                *load.get_mut(&other).expect("cross endpoint") -= 1;
            }
        }
    }
    removed.into_iter().collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum APolicy {
    /// `a ∈ {0, 1, 2, 4, …, n}`.
    Grid,
    Fixed(usize),
}

impl APolicy {
    pub fn values(&self, n: usize) -> Vec<usize> {
        match self {
            APolicy::Fixed(a) => vec![*a],
            APolicy::Grid => {
                let mut v = vec![0];
                let mut a = 1;
                while a < n {
                    v.push(a);
                    a *= 2;
                }
                if n > 0 {
                    v.push(n);
                }
                v
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsiConfig {
    pub s: usize,
    pub beta: f64,
    pub a_policy: APolicy,
    pub repeats: usize,
    pub seed: u64,
    pub max_pieces: usize,
    pub tol: Tolerances,
}

impl BsiConfig {
    pub fn new(s: usize, beta: f64, seed: u64) -> Self {
        BsiConfig {
            s,
            beta,
            a_policy: APolicy::Grid,
            repeats: 10,
            seed,
            max_pieces: 20_000,
            tol: Tolerances::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsiAttempt {
    pub a: usize,
    pub lp_objective: f64,
    pub repeat: usize,
    pub seed: u64,
    pub x_prime: usize,
    pub cross_edges: usize,
    pub separator: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BsiReport {
    pub schema_version: u32,
    pub config: BsiConfig,
    pub a: usize,
    pub lp: ConfigLpSolution,
    pub result: BsiResult,
    /// `X''`: the separator after properizing.
    pub separator: Vec<VertexId>,
    /// Components of `G - X''`.
    pub components: Vec<Vec<VertexId>>,
    pub attempts: Vec<BsiAttempt>,
}

/// Seed of the `repeat`-th rounding for the `a_index`-th budget.
pub fn attempt_seed(seed: u64, a_index: usize, repeat: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add((a_index as u64) << 32)
        .wrapping_add(repeat as u64)
}

/// Tries every budget of the policy and `repeats` roundings each; keeps the
/// smallest proper separator (fewest cross edges, then earliest, on ties).
pub fn bsi_solve(g: &Graph, cfg: &BsiConfig) -> Result<BsiReport> {
    if cfg.s == 0 || cfg.repeats == 0 {
        return Err(Error::InvalidParameter("s and repeats must be positive".into()));
    }
    let n = g.vertex_count();
    let pieces = enumerate_pieces(g, cfg.s, cfg.max_pieces)?;
    let mut best: Option<(usize, usize, ConfigLpSolution, BsiResult, Vec<VertexId>)> = None;
    let mut attempts = Vec::new();
    for (ai, a) in cfg.a_policy.values(n).into_iter().enumerate() {
        let model = build_config_lp_with(g, pieces.clone(), a as f64)?;
        let sol = solve_model(g, cfg.s, &model, &cfg.tol)?;
        for r in 0..cfg.repeats {
            let seed = attempt_seed(cfg.seed, ai, r);
            let res = round_bsi(g, &sol, cfg.beta, seed)?;
            let sep = properize(g, &res);
            attempts.push(BsiAttempt {
                a,
                lp_objective: sol.objective,
                repeat: r,
                seed,
                x_prime: res.x_prime.len(),
                cross_edges: res.cross_edges.len(),
                separator: sep.len(),
            });
            let better = best
                .as_ref()
                .is_none_or(|b| (sep.len(), res.cross_edges.len()) < (b.4.len(), b.3.cross_edges.len()));
            if better {
                best = Some((a, r, sol.clone(), res, sep));
            }
        }
    }
    let (a, _, lp, result, separator) = best.expect("at least one attempt");
    let removed: BTreeSet<VertexId> = separator.iter().copied().collect();
    let keep: Vec<VertexId> = (0..n).filter(|v| !removed.contains(v)).collect();
    let components = crate::graph::components_of(
        &keep,
        g.edges()
            .iter()
            .filter(|e| !removed.contains(&e.u) && !removed.contains(&e.v))
            .map(|e| (e.u, e.v)),
    );
    if let Some(c) = components.iter().find(|c| c.len() > cfg.s) {
        return Err(Error::invariant(format!(
            "component of size {} survives properizing (s = {})",
            c.len(),
            cfg.s
        )));
    }
    if separator.len() > result.x_prime.len() + result.cross_edges.len() {
        return Err(Error::invariant("properizing added more vertices than cross edges"));
    }
    Ok(BsiReport {
        schema_version: crate::interdict::SCHEMA_VERSION,
        config: cfg.clone(),
        a,
        lp,
        result,
        separator,
        components,
        attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::gen_grid;
    use crate::oracles::for_each_combination;
    use proptest::{prop_assert, proptest};

    fn random_graph(seed: u64, n: usize, p: f64) -> Graph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        Graph::new(n, edges).unwrap()
    }

    fn brute_connected_subsets(g: &Graph, s: usize) -> Vec<Vec<usize>> {
        let n = g.vertex_count();
        let mut out = Vec::new();
        for mask in 1u32..(1 << n) {
            let set: Vec<usize> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
            if set.len() > s {
                continue;
            }
            let comps = crate::graph::components_of(
                &set,
                g.edges()
                    .iter()
                    .filter(|e| mask & (1 << e.u) != 0 && mask & (1 << e.v) != 0)
                    .map(|e| (e.u, e.v)),
            );
            if comps.len() == 1 {
                out.push(set);
            }
        }
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    #[test]
    fn esu_matches_brute_force() {
        for seed in 0..30 {
            let g = random_graph(seed, 8, 0.35);
            for s in 1..=5 {
                assert_eq!(enumerate_pieces(&g, s, 100_000).unwrap(), brute_connected_subsets(&g, s));
            }
        }
    }

    #[test]
    fn piece_budget_is_enforced() {
        let g = gen_grid(5);
        assert!(matches!(enumerate_pieces(&g, 6, 100), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn singletons_lp_never_exceeds_best_deletion() {
        for seed in 0..20 {
            let g = random_graph(seed, 7, 0.4);
            for a in 0..3 {
                let sol = solve_config_lp(&g, 1, a as f64, 1000, &Tolerances::default()).unwrap();
                let mut best = usize::MAX;
                for_each_combination(7, a, |del| {
                    let left = g.edges().iter().filter(|e| !del.contains(&e.u) && !del.contains(&e.v)).count();
                    best = best.min(left);
                    true
                });
                assert!(sol.objective <= best as f64 + 1e-6);
                if a == 0 {
                    assert!((sol.objective - g.edge_count() as f64).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn fractional_deletion_beats_integral_on_k4() {
        let g = Graph::new(4, (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b)))).unwrap();
        let sol = solve_config_lp(&g, 1, 2.0, 100, &Tolerances::default()).unwrap();
        assert!(sol.objective.abs() < 1e-6);
    }

    #[test]
    fn edgeless_and_triangle() {
        let g = Graph::empty(4);
        let sol = solve_config_lp(&g, 2, 0.0, 100, &Tolerances::default()).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.y.iter().all(|&y| y == 0.0));
        let res = round_bsi(&g, &sol, 0.3, 1).unwrap();
        assert_eq!(res.pieces.len(), 4);

        let t = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let sol = solve_config_lp(&t, 3, 0.0, 100, &Tolerances::default()).unwrap();
        assert!(sol.objective.abs() < 1e-9);
        assert_eq!(sol.z, vec![(vec![0, 1, 2], 1.0)]);
    }

    #[test]
    fn connected_restriction_keeps_optimum() {
        for seed in 0..12 {
            let g = random_graph(100 + seed, 6, 0.35);
            let s = 3;
            let all: Vec<Vec<usize>> = (1u32..(1 << 6))
                .map(|m| (0..6).filter(|&v| m & (1 << v) != 0).collect::<Vec<_>>())
                .filter(|p| p.len() <= s)
                .collect();
            for a in [0.0, 1.0] {
                let full = build_config_lp_with(&g, all.clone(), a).unwrap();
                let conn = build_config_lp(&g, s, a, 10_000).unwrap();
                let o1 = lp::solve(&full.lp).unwrap().objective;
                let o2 = lp::solve(&conn.lp).unwrap().objective;
                assert!((o1 - o2).abs() < 1e-6, "seed {seed}: {o1} vs {o2}");
            }
        }
    }

    #[test]
    fn integral_solution_rounds_to_itself() {
        let g = Graph::new(6, [(0, 1), (1, 2), (3, 4), (4, 5), (2, 3)]).unwrap();
        let cut = g.edge_id(2, 3).unwrap();
        let sol = ConfigLpSolution {
            s: 3,
            a: 0.0,
            objective: 1.0,
            x: (0..5).map(|i| if i == cut { 1.0 } else { 0.0 }).collect(),
            y: vec![0.0; 6],
            z: vec![(vec![0, 1, 2], 1.0), (vec![3, 4, 5], 1.0)],
        };
        sol.check(&g, 1e-9).unwrap();
        let res = round_bsi(&g, &sol, 0.3, 42).unwrap();
        assert_eq!(res.pieces, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert_eq!(res.cross_edges, vec![cut]);
        assert_eq!(res.phases, 1);
        assert_eq!(properize(&g, &res).len(), 1);
    }

    #[test]
    fn threshold_is_inclusive() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let sol = ConfigLpSolution {
            s: 1,
            a: 0.3,
            objective: 0.0,
            x: vec![0.0],
            y: vec![0.3, 0.0],
            z: vec![(vec![0], 0.7), (vec![1], 1.0)],
        };
        let res = round_bsi(&g, &sol, 0.3, 0).unwrap();
        assert_eq!(res.preprocessed, vec![0]);
    }

    #[test]
    fn large_beta_chops() {
        let g = gen_grid(3);
        let sol = solve_config_lp(&g, 2, 1.0, 1000, &Tolerances::default()).unwrap();
        let res = round_bsi(&g, &sol, 0.75, 0).unwrap();
        assert!(res.chopped && res.x_prime.is_empty());
        assert!(res.pieces.iter().all(|p| p.len() <= 2));
    }

    #[test]
    fn cliques_need_nothing() {
        let mut edges = Vec::new();
        for c in 0..3 {
            for a in 0..3 {
                for b in a + 1..3 {
                    edges.push((3 * c + a, 3 * c + b));
                }
            }
        }
        let g = Graph::new(9, edges).unwrap();
        let rep = bsi_solve(&g, &BsiConfig::new(3, 0.3, 5)).unwrap();
        assert!(rep.separator.is_empty());
        assert!(rep.result.cross_edges.is_empty());
        assert_eq!(rep.components, vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]);
    }

    #[test]
    fn grid_solve_is_deterministic() {
        let g = gen_grid(4);
        let cfg = BsiConfig::new(4, 0.3, 9);
        let a = bsi_solve(&g, &cfg).unwrap();
        assert_eq!(a, bsi_solve(&g, &cfg).unwrap());
        assert!(a.components.iter().all(|c| c.len() <= 4));
    }

    #[test]
    fn a_grid_values() {
        assert_eq!(APolicy::Grid.values(10), vec![0, 1, 2, 4, 8, 10]);
        assert_eq!(APolicy::Grid.values(8), vec![0, 1, 2, 4, 8]);
        assert_eq!(APolicy::Fixed(3).values(10), vec![3]);
    }

    proptest! {
        #[test]
        fn properized_components_are_small(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(4..10);
            let g = random_graph(seed, n, 0.3);
            let s = rng.gen_range(1..4);
            let a = rng.gen_range(0..3) as f64;
            let sol = solve_config_lp(&g, s, a, 10_000, &Tolerances::default()).unwrap();
            let res = round_bsi(&g, &sol, 0.3, seed).unwrap();
            let sep = properize(&g, &res);
            prop_assert!(sep.len() <= res.x_prime.len() + res.cross_edges.len());
            let removed: BTreeSet<usize> = sep.iter().copied().collect();
            let keep: Vec<usize> = (0..n).filter(|v| !removed.contains(v)).collect();
            let comps = crate::graph::components_of(
                &keep,
                g.edges().iter().filter(|e| !removed.contains(&e.u) && !removed.contains(&e.v)).map(|e| (e.u, e.v)),
            );
            prop_assert!(comps.iter().all(|c| c.len() <= s));
        }
    }
}
