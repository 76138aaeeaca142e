//! Exhaustive solvers for small instances. They refuse inputs beyond their
//! budget instead of approximating.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cnf::CnfFormula;
use crate::error::{Error, Result};
use crate::graph::{connected_components, EdgeId, Graph, VertexId};
use crate::treedec::TreeDecomposition;

pub use crate::planarity::is_planar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleBudget {
    pub max_vertices: usize,
    pub max_edges: usize,
    pub max_subsets: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_vertices: 40,
            max_edges: 64,
            max_subsets: 1 << 25,
        }
    }
}

impl OracleBudget {
    fn check_vertices(&self, n: usize, what: &str) -> Result<()> {
        if n > self.max_vertices {
            return Err(Error::BudgetExceeded(format!(
                "{what}: {n} vertices > {}",
                self.max_vertices
            )));
        }
        Ok(())
    }

    fn check_subsets(&self, count: u64, what: &str) -> Result<()> {
        if count > self.max_subsets {
            return Err(Error::BudgetExceeded(format!(
                "{what}: {count} subsets > {}",
                self.max_subsets
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TreewidthWitness {
    pub width: usize,
    pub order: Vec<VertexId>,
    pub decomposition: TreeDecomposition,
}

/// Exact treewidth by dynamic programming over vertex subsets, one connected
/// component at a time:
/// `TW(S) = min_{v ∈ S} max(TW(S - v), |Q(S - v, v)|)`, where `Q(S, v)` is the
/// set of vertices outside `S ∪ {v}` reachable from `v` through `S`.
pub fn exact_treewidth(g: &Graph, budget: &OracleBudget) -> Result<TreewidthWitness> {
    budget.check_vertices(g.vertex_count(), "treewidth")?;
    let mut order = Vec::with_capacity(g.vertex_count());
    let mut width = 0usize;
    for comp in connected_components(g) {
        let (h, map) = g.induced(&comp);
        let (w, local) = treewidth_connected(&h, budget)?;
        width = width.max(w);
        order.extend(local.into_iter().map(|v| map[v]));
    }
    let decomposition = TreeDecomposition::from_elimination_order(g, &order)?;
    if decomposition.width() != width {
        return Err(Error::invariant(format!(
            "witness width {} differs from computed {width}",
            decomposition.width()
        )));
    }
    Ok(TreewidthWitness {
        width,
        order,
        decomposition,
    })
}

/// Just the width, with fast answers for width 0 and 1.
pub fn treewidth_at_most(g: &Graph, k: usize, budget: &OracleBudget) -> Result<bool> {
    if g.edge_count() == 0 {
        return Ok(true);
    }
    if k == 0 {
        return Ok(false);
    }
    let forest = g.edge_count() + connected_components(g).len() == g.vertex_count();
    if k == 1 || forest {
        return Ok(forest);
    }
    Ok(exact_treewidth(g, budget)?.width <= k)
}

fn treewidth_connected(h: &Graph, budget: &OracleBudget) -> Result<(usize, Vec<VertexId>)> {
    let n = h.vertex_count();
    if n <= 1 {
        return Ok((0, (0..n).collect()));
    }
    if n > 30 {
        return Err(Error::BudgetExceeded(format!(
            "treewidth: component with {n} vertices"
        )));
    }
    budget.check_subsets(1u64 << n, "treewidth")?;
    let masks: Vec<u32> = h
        .adjacency_masks()
        .expect("n <= 30")
        .into_iter()
        .map(|m| m as u32)
        .collect();
    let full: u32 = (1u32 << n) - 1;
    let size = 1usize << n;
    let mut tw = vec![u8::MAX; size];
    let mut choice = vec![u8::MAX; size];
    tw[0] = 0;
    // |Q(S, v)|: flood from v through S, count reached vertices outside S ∪ {v}.
    let q = |s: u32, v: usize| -> u32 {
        let mut reach = 1u32 << v;
        let mut frontier = reach;
        while frontier != 0 {
            let mut next = 0u32;
            let mut f = frontier;
            while f != 0 {
                let b = f.trailing_zeros() as usize;
                f &= f - 1;
                next |= masks[b];
            }
            next &= !reach;
            reach |= next;
            frontier = next & s;
        }
        (reach & !s & !(1u32 << v)).count_ones()
    };
    for set in 1..size {
        let s = set as u32;
        let mut best = u8::MAX;
        let mut arg = u8::MAX;
        let mut rest = s;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let without = s & !(1u32 << v);
            let prev = tw[without as usize];
            if prev >= best {
                continue;
            }
            let cand = prev.max(q(without, v) as u8);
            if cand < best {
                best = cand;
                arg = v as u8;
            }
        }
        tw[set] = best;
        choice[set] = arg;
    }
    let mut order = Vec::with_capacity(n);
    let mut s = full;
    while s != 0 {
        let v = choice[s as usize] as usize;
        order.push(v);
        s &= !(1u32 << v);
    }
    order.reverse();
    Ok((tw[full as usize] as usize, order))
}

/// Maximum independent set by branch and bound on bitmasks, solved per
/// component. Returned set is sorted.
pub fn exact_mis(g: &Graph, budget: &OracleBudget) -> Result<Vec<VertexId>> {
    budget.check_vertices(g.vertex_count(), "mis")?;
    let mut out = Vec::new();
    for comp in connected_components(g) {
        let (h, map) = g.induced(&comp);
        let masks = h
            .adjacency_masks()
            .ok_or_else(|| Error::BudgetExceeded("mis: component above 64 vertices".into()))?;
        let all = if h.vertex_count() == 64 {
            u64::MAX
        } else {
            (1u64 << h.vertex_count()) - 1
        };
        let mut best = 0u64;
        mis_branch(&masks, all, 0, &mut best);
        let mut b = best;
        while b != 0 {
            let v = b.trailing_zeros() as usize;
            b &= b - 1;
            out.push(map[v]);
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn mis_branch(adj: &[u64], mut cand: u64, mut chosen: u64, best: &mut u64) {
    // Vertices of degree 0 or 1 inside `cand` are always safe to take.
    loop {
        let mut changed = false;
        let mut c = cand;
        while c != 0 {
            let v = c.trailing_zeros() as usize;
            c &= c - 1;
            if cand & (1 << v) == 0 {
                continue;
            }
            if (adj[v] & cand).count_ones() <= 1 {
                chosen |= 1 << v;
                cand &= !(adj[v] | (1 << v));
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if cand == 0 {
        if chosen.count_ones() > best.count_ones() {
            *best = chosen;
        }
        return;
    }
    if chosen.count_ones() + cand.count_ones() <= best.count_ones() {
        return;
    }
    if chosen.count_ones() + greedy_clique_cover_bound(adj, cand) <= best.count_ones() {
        return;
    }
    let mut pivot = 0;
    let mut deg = 0;
    let mut c = cand;
    while c != 0 {
        let v = c.trailing_zeros() as usize;
        c &= c - 1;
        let d = (adj[v] & cand).count_ones();
        if d > deg {
            deg = d;
            pivot = v;
        }
    }
    mis_branch(adj, cand & !(adj[pivot] | (1 << pivot)), chosen | (1 << pivot), best);
    mis_branch(adj, cand & !(1 << pivot), chosen, best);
}

/// Number of cliques in a greedy clique cover of `cand`; an independent set
/// takes at most one vertex from each.
fn greedy_clique_cover_bound(adj: &[u64], cand: u64) -> u32 {
    let mut rest = cand;
    let mut count = 0;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        let mut clique_ok = adj[v] & rest;
        rest &= !(1 << v);
        while clique_ok != 0 {
            let u = clique_ok.trailing_zeros() as usize;
            rest &= !(1 << u);
            clique_ok &= adj[u];
        }
        count += 1;
    }
    count
}

/// Best assignment over all `2^n`, visited in Gray-code order with
/// incremental clause counters. Ties keep the first assignment reached.
pub fn exact_maxsat(phi: &CnfFormula) -> Result<(usize, Vec<bool>)> {
    let n = phi.num_vars();
    if n > 25 {
        return Err(Error::BudgetExceeded(format!("maxsat: {n} variables > 25")));
    }
    let mut occurs: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for (i, c) in phi.clauses().iter().enumerate() {
        for l in c {
            occurs[l.var].push((i, l.negated));
        }
    }
    let mut assignment = vec![false; n];
    let mut true_lits: Vec<usize> = phi
        .clauses()
        .iter()
        .map(|c| c.iter().filter(|l| l.negated).count())
        .collect();
    let mut sat = true_lits.iter().filter(|&&t| t > 0).count();
    let mut best = (sat, assignment.clone());
    for step in 1u64..(1u64 << n) {
        let var = step.trailing_zeros() as usize;
        assignment[var] = !assignment[var];
        for &(i, negated) in &occurs[var] {
            let now_true = assignment[var] != negated;
            if now_true {
                true_lits[i] += 1;
                if true_lits[i] == 1 {
                    sat += 1;
                }
            } else {
                true_lits[i] -= 1;
                if true_lits[i] == 0 {
                    sat -= 1;
                }
            }
        }
        if sat > best.0 {
            best = (sat, assignment.clone());
        }
    }
    Ok(best)
}

/// Whether `x` is an `alpha`-separator of `s`: every component of `G - X`
/// holds at most `alpha·|S|` vertices of `S`.
pub fn is_balanced_separator(g: &Graph, s: &[VertexId], x: &[VertexId], alpha: f64) -> bool {
    let xs: BTreeSet<VertexId> = x.iter().copied().collect();
    let ss: BTreeSet<VertexId> = s.iter().copied().collect();
    let kept: Vec<VertexId> = (0..g.vertex_count()).filter(|v| !xs.contains(v)).collect();
    let comps = crate::graph::components_of(&kept, g.edges().iter().map(|e| (e.u, e.v)));
    let cap = alpha * ss.len() as f64 + 1e-9;
    comps
        .iter()
        .all(|c| c.iter().filter(|v| ss.contains(v)).count() as f64 <= cap)
}

/// A smallest `alpha`-separator of `s`, by enumerating vertex sets in order
/// of size (lexicographic within a size).
pub fn exact_balanced_separator(
    g: &Graph,
    s: &[VertexId],
    alpha: f64,
    budget: &OracleBudget,
) -> Result<Vec<VertexId>> {
    let n = g.vertex_count();
    budget.check_vertices(n, "balanced separator")?;
    if n > 30 {
        return Err(Error::BudgetExceeded("balanced separator: n > 30".into()));
    }
    budget.check_subsets(1u64 << n, "balanced separator")?;
    for size in 0..=n {
        let mut found = None;
        for_each_combination(n, size, |x| {
            if is_balanced_separator(g, s, x, alpha) {
                found = Some(x.to_vec());
                return false;
            }
            true
        });
        if let Some(x) = found {
            return Ok(x);
        }
    }
    Ok((0..n).collect())
}

/// `link(G)`: the largest `w` such that some vertex set has no
/// 1/2-separator of size below `w`.
pub fn linkedness(g: &Graph, budget: &OracleBudget) -> Result<usize> {
    let n = g.vertex_count();
    budget.check_vertices(n, "linkedness")?;
    if n > 20 {
        return Err(Error::BudgetExceeded("linkedness: n > 20".into()));
    }
    budget.check_subsets((1u64 << n) * (1u64 << n), "linkedness")?;
    let mut best = 0;
    for mask in 1u32..(1u32 << n) {
        let s: Vec<VertexId> = (0..n).filter(|&v| mask & (1 << v) != 0).collect();
        let sep = exact_balanced_separator(g, &s, 0.5, budget)?;
        best = best.max(sep.len());
    }
    Ok(best)
}

/// Calls `f` on every `size`-subset of `0..n` in lexicographic order until
/// it returns false.
pub fn for_each_combination(n: usize, size: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if size > n {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        if !f(&idx) {
            return;
        }
        match (0..size).rev().find(|&i| idx[i] < n - size + i) {
            None => return,
            Some(i) => {
                idx[i] += 1;
                for j in i + 1..size {
                    idx[j] = idx[j - 1] + 1;
                }
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct InterdictionOptimum {
    pub deleted: Vec<EdgeId>,
    pub decomposition: TreeDecomposition,
}

/// Minimum edge set `F` with `tw(G - F) <= w - 1`, by enumerating edge subsets
/// in order of size.
pub fn exact_interdiction(g: &Graph, w: usize, budget: &OracleBudget) -> Result<InterdictionOptimum> {
    if w == 0 {
        return Err(Error::InvalidParameter("w must be at least 1".into()));
    }
    let m = g.edge_count();
    if m > budget.max_edges.min(63) {
        return Err(Error::BudgetExceeded(format!("interdiction: {m} edges")));
    }
    budget.check_subsets(1u64 << m, "interdiction")?;
    for size in 0..=m {
        let mut found: Option<Vec<EdgeId>> = None;
        let mut err = None;
        for_each_combination(m, size, |f| {
            let removed: BTreeSet<EdgeId> = f.iter().copied().collect();
            match treewidth_at_most(&g.without_edges(&removed), w - 1, budget) {
                Ok(true) => {
                    found = Some(f.to_vec());
                    false
                }
                Ok(false) => true,
                Err(e) => {
                    err = Some(e);
                    false
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if let Some(deleted) = found {
            let removed: BTreeSet<EdgeId> = deleted.iter().copied().collect();
            let decomposition = exact_treewidth(&g.without_edges(&removed), budget)?.decomposition;
            return Ok(InterdictionOptimum {
                deleted,
                decomposition,
            });
        }
    }
    unreachable!("deleting every edge leaves treewidth 0")
}

/// Every edge subset `F` (as a bitmask over edge ids) with
/// `tw(G - F) <= w - 1`.
pub fn all_interdiction_sets(g: &Graph, w: usize, budget: &OracleBudget) -> Result<Vec<u64>> {
    let m = g.edge_count();
    if m > 20 {
        return Err(Error::BudgetExceeded(format!("interdiction sets: {m} edges")));
    }
    budget.check_subsets(1u64 << m, "interdiction sets")?;
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << m) {
        let removed: BTreeSet<EdgeId> = (0..m).filter(|&i| mask & (1 << i) != 0).collect();
        if treewidth_at_most(&g.without_edges(&removed), w.saturating_sub(1), budget)? {
            out.push(mask);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cnf::Literal;

    fn complete(n: usize) -> Graph {
        Graph::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).unwrap()
    }

    fn cycle(n: usize) -> Graph {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn path(n: usize) -> Graph {
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

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

    /// Independent treewidth search: depth-first over elimination orders on
    /// an explicit fill graph, pruned by the best width so far.
    fn branch_and_bound_tw(g: &Graph) -> usize {
        fn go(
            nb: &[BTreeSet<usize>],
            alive: &BTreeSet<usize>,
            cur: usize,
            best: &mut usize,
            seen: &mut std::collections::BTreeMap<Vec<usize>, usize>,
        ) {
            if cur >= *best {
                return;
            }
            if alive.len() <= cur + 1 {
                *best = cur;
                return;
            }
            let key: Vec<usize> = alive.iter().copied().collect();
            if let Some(&c) = seen.get(&key) {
                if c <= cur {
                    return;
                }
            }
            seen.insert(key, cur);
            for &v in alive {
                let deg = nb[v].len();
                let width = cur.max(deg);
                if width >= *best {
                    continue;
                }
                let mut next = nb.to_vec();
                let list: Vec<usize> = nb[v].iter().copied().collect();
                for &a in &list {
                    for &b in &list {
                        if a != b {
                            next[a].insert(b);
                        }
                    }
                    next[a].remove(&v);
                }
                next[v].clear();
                let mut rest = alive.clone();
                rest.remove(&v);
                go(&next, &rest, width, best, seen);
            }
        }
        let nb: Vec<BTreeSet<usize>> = (0..g.vertex_count()).map(|v| g.neighbors(v).collect()).collect();
        let alive: BTreeSet<usize> = (0..g.vertex_count()).collect();
        let mut best = g.vertex_count().saturating_sub(1);
        go(&nb, &alive, 0, &mut best, &mut Default::default());
        best
    }

    #[test]
    fn named_treewidths() {
        let b = OracleBudget::default();
        assert_eq!(exact_treewidth(&path(5), &b).unwrap().width, 1);
        assert_eq!(exact_treewidth(&cycle(6), &b).unwrap().width, 2);
        assert_eq!(exact_treewidth(&complete(5), &b).unwrap().width, 4);
        let t = exact_treewidth(&grid(4), &b).unwrap();
        assert_eq!(t.width, 4);
        assert_eq!(t.decomposition.validate(&grid(4)), Ok(()));
    }

    #[test]
    fn grid_treewidth_agrees_with_branch_and_bound() {
        let b = OracleBudget::default();
        for k in 2..=4 {
            assert_eq!(exact_treewidth(&grid(k), &b).unwrap().width, branch_and_bound_tw(&grid(k)));
        }
    }

    #[test]
    fn budget_is_enforced() {
        let b = OracleBudget {
            max_vertices: 4,
            ..Default::default()
        };
        assert!(matches!(exact_treewidth(&path(5), &b), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn named_independent_sets() {
        let b = OracleBudget::default();
        assert_eq!(exact_mis(&complete(6), &b).unwrap().len(), 1);
        assert_eq!(exact_mis(&cycle(5), &b).unwrap().len(), 2);
        assert_eq!(exact_mis(&grid(5), &b).unwrap().len(), 13);
        assert_eq!(exact_mis(&grid(6), &b).unwrap().len(), 18);
    }

    #[test]
    fn grid_mis_matches_column_dp() {
        // Column-by-column DP over row masks of a k x k grid.
        fn dp(k: usize) -> usize {
            let valid: Vec<u32> = (0..1u32 << k).filter(|m| m & (m >> 1) == 0).collect();
            let mut best: Vec<usize> = valid.iter().map(|m| m.count_ones() as usize).collect();
            for _ in 1..k {
                best = valid
                    .iter()
                    .map(|&m| {
                        valid
                            .iter()
                            .zip(&best)
                            .filter(|(&p, _)| p & m == 0)
                            .map(|(_, &b)| b)
                            .max()
                            .unwrap()
                            + m.count_ones() as usize
                    })
                    .collect();
            }
            *best.iter().max().unwrap()
        }
        let b = OracleBudget::default();
        for k in 1..=6 {
            assert_eq!(exact_mis(&grid(k), &b).unwrap().len(), dp(k));
        }
    }

    #[test]
    fn maxsat_small_cases() {
        let one = CnfFormula::new(1, vec![vec![Literal::pos(0)]]).unwrap();
        assert_eq!(exact_maxsat(&one).unwrap().0, 1);
        let clash =
            CnfFormula::new(1, vec![vec![Literal::pos(0)], vec![Literal::neg(0)]]).unwrap();
        let (count, a) = exact_maxsat(&clash).unwrap();
        assert_eq!(count, 1);
        assert_eq!(clash.satisfied_count(&a), 1);
    }

    #[test]
    fn maxsat_matches_plain_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let n = rng.gen_range(1..9);
            let clauses: Vec<Vec<Literal>> = (0..rng.gen_range(1..20))
                .map(|_| {
                    let a = rng.gen_range(0..n);
                    let b = rng.gen_range(0..n);
                    let mut c = vec![Literal { var: a, negated: rng.gen() }];
                    if b != a {
                        c.push(Literal { var: b, negated: rng.gen() });
                    }
                    c
                })
                .collect();
            let phi = CnfFormula::new(n, clauses).unwrap();
            let plain = (0..1u32 << n)
                .map(|m| {
                    let a: Vec<bool> = (0..n).map(|v| m & (1 << v) != 0).collect();
                    phi.satisfied_count(&a)
                })
                .max()
                .unwrap();
            let (count, a) = exact_maxsat(&phi).unwrap();
            assert_eq!(count, plain);
            assert_eq!(phi.satisfied_count(&a), count);
        }
    }

    #[test]
    fn separators_of_tiny_graphs() {
        let b = OracleBudget::default();
        let edge = path(2);
        assert_eq!(exact_balanced_separator(&edge, &[0, 1], 0.5, &b).unwrap().len(), 1);
        let p3 = path(3);
        assert_eq!(exact_balanced_separator(&p3, &[0, 1, 2], 0.5, &b).unwrap(), vec![1]);
    }

    #[test]
    fn combinations_enumerate_binomially() {
        let mut count = 0;
        for_each_combination(6, 3, |_| {
            count += 1;
            true
        });
        assert_eq!(count, 20);
        let mut zero = 0;
        for_each_combination(4, 0, |s| {
            assert!(s.is_empty());
            zero += 1;
            true
        });
        assert_eq!(zero, 1);
    }

    #[test]
    fn interdiction_of_small_graphs() {
        let b = OracleBudget::default();
        // Forest already: nothing to delete.
        assert!(exact_interdiction(&path(5), 2, &b).unwrap().deleted.is_empty());
        // tw(K4 - F) <= 1 needs a spanning forest: 6 - 3 deletions.
        assert_eq!(exact_interdiction(&complete(4), 2, &b).unwrap().deleted.len(), 3);
        // tw(K4 - F) <= 2: one deletion.
        assert_eq!(exact_interdiction(&complete(4), 3, &b).unwrap().deleted.len(), 1);
        // tw(C4 - F) <= 0 means no edges left.
        assert_eq!(exact_interdiction(&cycle(4), 1, &b).unwrap().deleted.len(), 4);
        assert_eq!(exact_interdiction(&cycle(4), 2, &b).unwrap().deleted.len(), 1);
    }

    #[test]
    fn interdiction_optimum_is_minimal() {
        let b = OracleBudget::default();
        let g = complete(4);
        let opt = exact_interdiction(&g, 2, &b).unwrap();
        let sets = all_interdiction_sets(&g, 2, &b).unwrap();
        let min = sets.iter().map(|m| m.count_ones()).min().unwrap() as usize;
        assert_eq!(opt.deleted.len(), min);
    }
}
