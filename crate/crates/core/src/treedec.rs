//! Tree decompositions: validation, construction from elimination orders or
//! recursion traces, and conversion to nice form.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeId, Graph, VertexId};

/// Rooted tree of bags. `parent[i]` is `None` only for the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub parent: Vec<Option<usize>>,
    pub bags: Vec<Vec<VertexId>>,
}

/// First problem found by [`TreeDecomposition::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    Shape(String),
    UnknownVertex { node: usize, vertex: VertexId },
    VertexUncovered { vertex: VertexId },
    EdgeUncovered { u: VertexId, v: VertexId },
    SubtreeDisconnected { vertex: VertexId },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Shape(msg) => write!(f, "malformed tree: {msg}"),
            Violation::UnknownVertex { node, vertex } => {
                write!(f, "bag {node} holds unknown vertex {vertex}")
            }
            Violation::VertexUncovered { vertex } => write!(f, "vertex {vertex} is in no bag"),
            Violation::EdgeUncovered { u, v } => write!(f, "edge ({u},{v}) is not covered"),
            Violation::SubtreeDisconnected { vertex } => {
                write!(f, "bags holding vertex {vertex} are disconnected")
            }
        }
    }
}

impl TreeDecomposition {
    pub fn single_bag(vertices: Vec<VertexId>) -> Self {
        let mut bag = vertices;
        bag.sort_unstable();
        bag.dedup();
        TreeDecomposition {
            parent: vec![None],
            bags: vec![bag],
        }
    }

    pub fn node_count(&self) -> usize {
        self.bags.len()
    }

    /// Largest bag size minus one; an empty decomposition has width -1,
    /// reported here as 0 for convenience with edgeless inputs.
    pub fn width(&self) -> usize {
        self.bags
            .iter()
            .map(Vec::len)
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    pub fn root(&self) -> Option<usize> {
        self.parent.iter().position(Option::is_none)
    }

    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut ch = vec![Vec::new(); self.bags.len()];
        for (i, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                ch[p].push(i);
            }
        }
        ch
    }

    /// Post-order of the nodes (children before parents). Fails on cycles,
    /// out-of-range parents or a root count other than one.
    fn post_order(&self) -> std::result::Result<Vec<usize>, Violation> {
        let k = self.bags.len();
        if self.parent.len() != k {
            return Err(Violation::Shape(format!(
                "{} parent links for {k} bags",
                self.parent.len()
            )));
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        let roots: Vec<usize> = (0..k).filter(|&i| self.parent[i].is_none()).collect();
        if roots.len() != 1 {
            return Err(Violation::Shape(format!("{} roots", roots.len())));
        }
        if let Some(i) = (0..k).find(|&i| self.parent[i].is_some_and(|p| p >= k)) {
            return Err(Violation::Shape(format!("node {i} has an out-of-range parent")));
        }
        let ch = self.children();
        let mut order = Vec::with_capacity(k);
        let mut stack = vec![(roots[0], false)];
        while let Some((v, done)) = stack.pop() {
            if done {
                order.push(v);
                continue;
            }
            stack.push((v, true));
            for &c in ch[v].iter().rev() {
                stack.push((c, false));
            }
        }
        if order.len() != k {
            return Err(Violation::Shape("parent links contain a cycle".into()));
        }
        Ok(order)
    }

    /// Checks edge coverage, vertex coverage and the connected-subtree rule.
    pub fn validate(&self, g: &Graph) -> std::result::Result<(), Violation> {
        let n = g.vertex_count();
        let order = self.post_order()?;
        for (node, bag) in self.bags.iter().enumerate() {
            if let Some(&v) = bag.iter().find(|&&v| v >= n) {
                return Err(Violation::UnknownVertex { node, vertex: v });
            }
        }
        let sets: Vec<BTreeSet<VertexId>> = self
            .bags
            .iter()
            .map(|b| b.iter().copied().collect())
            .collect();
        let mut count = vec![0usize; n];
        for s in &sets {
            for &v in s {
                count[v] += 1;
            }
        }
        if let Some(v) = (0..n).find(|&v| count[v] == 0) {
            return Err(Violation::VertexUncovered { vertex: v });
        }
        for e in g.edges() {
            if !sets.iter().any(|s| s.contains(&e.u) && s.contains(&e.v)) {
                return Err(Violation::EdgeUncovered { u: e.u, v: e.v });
            }
        }
        // The nodes holding v form a subtree iff exactly one of them has a
        // parent that does not hold v.
        let mut tops = vec![0usize; n];
        for &node in &order {
            for &v in &sets[node] {
                let parent_has = self.parent[node].is_some_and(|p| sets[p].contains(&v));
                if !parent_has {
                    tops[v] += 1;
                }
            }
        }
        if let Some(v) = (0..n).find(|&v| tops[v] != 1) {
            return Err(Violation::SubtreeDisconnected { vertex: v });
        }
        Ok(())
    }

    /// Decomposition from an elimination order: vertex `v` gets the bag
    /// `{v} ∪ later neighbors in the fill graph`, attached to the earliest
    /// eliminated of those neighbors. Roots of separate components are
    /// chained so the result is a single tree.
    pub fn from_elimination_order(g: &Graph, order: &[VertexId]) -> Result<Self> {
        let n = g.vertex_count();
        let mut pos = vec![usize::MAX; n];
        for (i, &v) in order.iter().enumerate() {
            if v >= n || pos[v] != usize::MAX {
                return Err(Error::InvalidParameter(
                    "elimination order is not a permutation".into(),
                ));
            }
            pos[v] = i;
        }
        if order.len() != n {
            return Err(Error::InvalidParameter(
                "elimination order is not a permutation".into(),
            ));
        }
        if n == 0 {
            return Ok(TreeDecomposition::single_bag(Vec::new()));
        }
        let mut nb: Vec<BTreeSet<VertexId>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
        let mut bags = Vec::with_capacity(n);
        let mut parent = vec![None; n];
        for (i, &v) in order.iter().enumerate() {
            let later: Vec<VertexId> = nb[v].iter().copied().filter(|&u| pos[u] > i).collect();
            for (a, &p) in later.iter().enumerate() {
                for &q in &later[a + 1..] {
                    nb[p].insert(q);
                    nb[q].insert(p);
                }
            }
            parent[i] = later.iter().map(|&u| pos[u]).min();
            let mut bag = later;
            bag.push(v);
            bag.sort_unstable();
            bags.push(bag);
        }
        let roots: Vec<usize> = (0..n).filter(|&i| parent[i].is_none()).collect();
        for w in roots.windows(2) {
            parent[w[0]] = Some(w[1]);
        }
        Ok(TreeDecomposition { parent, bags })
    }

    /// Restricts every bag to `keep`, leaving the tree shape alone. A
    /// decomposition of `G` restricted to `V(H)` decomposes any subgraph `H`.
    pub fn restricted(&self, keep: impl Fn(VertexId) -> bool) -> TreeDecomposition {
        TreeDecomposition {
            parent: self.parent.clone(),
            bags: self
                .bags
                .iter()
                .map(|b| b.iter().copied().filter(|&v| keep(v)).collect())
                .collect(),
        }
    }

    /// Renames vertices through `map` (old id -> new id, `None` drops it).
    pub fn relabeled(&self, map: impl Fn(VertexId) -> Option<VertexId>) -> TreeDecomposition {
        TreeDecomposition {
            parent: self.parent.clone(),
            bags: self
                .bags
                .iter()
                .map(|b| {
                    let mut nb: Vec<VertexId> = b.iter().filter_map(|&v| map(v)).collect();
                    nb.sort_unstable();
                    nb.dedup();
                    nb
                })
                .collect(),
        }
    }
}

/// Elimination order chosen greedily by fewest fill edges, ties by degree
/// then id.
pub fn min_fill_order(g: &Graph) -> Vec<VertexId> {
    let n = g.vertex_count();
    let mut nb: Vec<BTreeSet<VertexId>> = (0..n).map(|v| g.neighbors(v).collect()).collect();
    let mut alive: BTreeSet<VertexId> = (0..n).collect();
    let mut order = Vec::with_capacity(n);
    while !alive.is_empty() {
        let best = alive
            .iter()
            .copied()
            .min_by_key(|&v| {
                let list: Vec<VertexId> = nb[v].iter().copied().collect();
                let mut fill = 0usize;
                for (a, &p) in list.iter().enumerate() {
                    for &q in &list[a + 1..] {
                        if !nb[p].contains(&q) {
                            fill += 1;
                        }
                    }
                }
                (fill, list.len(), v)
            })
            .expect("non-empty");
        let list: Vec<VertexId> = nb[best].iter().copied().collect();
        for (a, &p) in list.iter().enumerate() {
            for &q in &list[a + 1..] {
                nb[p].insert(q);
                nb[q].insert(p);
            }
        }
        for &p in &list {
            nb[p].remove(&best);
        }
        nb[best].clear();
        alive.remove(&best);
        order.push(best);
    }
    order
}

/// Heuristic (not necessarily optimal) decomposition from [`min_fill_order`].
pub fn heuristic_decomposition(g: &Graph) -> TreeDecomposition {
    TreeDecomposition::from_elimination_order(g, &min_fill_order(g))
        .expect("min-fill order is a permutation")
}

/// One node of the recursion that produced a decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceNode {
    pub parent: Option<usize>,
    /// Vertices of the subgraph handled at this node.
    pub vertices: Vec<VertexId>,
    /// Terminals inherited from the parent.
    pub s: Vec<VertexId>,
    /// Extra terminal chosen at this node, if any.
    #[serde(default)]
    pub added: Option<VertexId>,
    pub x: Vec<VertexId>,
    pub d: Vec<EdgeId>,
    pub children: Vec<usize>,
    pub leaf: bool,
}

impl TraceNode {
    /// Terminals used at this node: the inherited ones plus `added`.
    pub fn terminals(&self) -> Vec<VertexId> {
        let set: BTreeSet<VertexId> = self.s.iter().copied().chain(self.added).collect();
        set.into_iter().collect()
    }

    /// The bag this node contributes: `S ∪ X`, or all of its vertices at a
    /// leaf.
    pub fn bag(&self) -> Vec<VertexId> {
        let set: BTreeSet<VertexId> = if self.leaf {
            self.vertices.iter().copied().collect()
        } else {
            self.terminals().into_iter().chain(self.x.iter().copied()).collect()
        };
        set.into_iter().collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecursionTrace {
    pub nodes: Vec<TraceNode>,
}

impl RecursionTrace {
    /// Checks that each child's `S` is its vertex set intersected with the
    /// parent's `X ∪ S`, and that parent/child links agree.
    pub fn check(&self) -> Result<()> {
        for (i, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                let child = self
                    .nodes
                    .get(c)
                    .ok_or_else(|| Error::InconsistentTrace(format!("node {i} has missing child {c}")))?;
                if child.parent != Some(i) {
                    return Err(Error::InconsistentTrace(format!(
                        "child {c} does not point back to {i}"
                    )));
                }
                let xs: BTreeSet<VertexId> = node.terminals().into_iter().chain(node.x.iter().copied()).collect();
                let expect: BTreeSet<VertexId> = child
                    .vertices
                    .iter()
                    .copied()
                    .filter(|v| xs.contains(v))
                    .collect();
                let got: BTreeSet<VertexId> = child.s.iter().copied().collect();
                if expect != got {
                    return Err(Error::InconsistentTrace(format!(
                        "node {c}: S = {got:?}, expected {expect:?}"
                    )));
                }
            }
            if node.leaf && !node.children.is_empty() {
                return Err(Error::InconsistentTrace(format!("leaf {i} has children")));
            }
        }
        Ok(())
    }

    /// One tree node per recursion node. Several roots (one per component
    /// of the input) are chained under the first.
    pub fn assemble(&self) -> Result<TreeDecomposition> {
        self.check()?;
        if self.nodes.is_empty() {
            return Ok(TreeDecomposition::single_bag(Vec::new()));
        }
        let mut parent: Vec<Option<usize>> = self.nodes.iter().map(|n| n.parent).collect();
        let roots: Vec<usize> = (0..parent.len()).filter(|&i| parent[i].is_none()).collect();
        for &r in roots.iter().skip(1) {
            parent[r] = Some(roots[0]);
        }
        Ok(TreeDecomposition {
            parent,
            bags: self.nodes.iter().map(TraceNode::bag).collect(),
        })
    }

    /// Largest `|S ∪ X|` over non-leaf nodes.
    pub fn max_separator_bag(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| !n.leaf)
            .map(|n| n.bag().len())
            .max()
            .unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum NiceKind {
    Leaf,
    Introduce(VertexId),
    Forget(VertexId),
    Join,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NiceNode {
    pub kind: NiceKind,
    pub bag: Vec<VertexId>,
    pub children: Vec<usize>,
}

/// Nice decomposition with an empty root bag and empty leaf bags. Nodes are
/// stored children-first, so index order is a valid bottom-up order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NiceTreeDecomposition {
    pub nodes: Vec<NiceNode>,
    pub root: usize,
}

impl NiceTreeDecomposition {
    pub fn width(&self) -> usize {
        self.nodes
            .iter()
            .map(|n| n.bag.len())
            .max()
            .unwrap_or(0)
            .saturating_sub(1)
    }

    /// Checks the local shape rules of every node.
    pub fn check_shape(&self) -> Result<()> {
        for (i, node) in self.nodes.iter().enumerate() {
            if node.children.iter().any(|&c| c >= i) {
                return Err(Error::invariant(format!("nice node {i} precedes a child")));
            }
            let bag: BTreeSet<VertexId> = node.bag.iter().copied().collect();
            let child = |k: usize| -> BTreeSet<VertexId> {
                self.nodes[node.children[k]].bag.iter().copied().collect()
            };
            let ok = match node.kind {
                NiceKind::Leaf => node.children.is_empty() && bag.is_empty(),
                NiceKind::Introduce(v) => {
                    node.children.len() == 1 && {
                        let mut c = child(0);
                        !c.contains(&v) && c.insert(v) && c == bag
                    }
                }
                NiceKind::Forget(v) => {
                    node.children.len() == 1 && {
                        let mut c = child(0);
                        c.remove(&v) && c == bag
                    }
                }
                NiceKind::Join => node.children.len() == 2 && child(0) == bag && child(1) == bag,
            };
            if !ok {
                return Err(Error::invariant(format!("nice node {i} breaks its kind rule")));
            }
        }
        if !self.nodes.is_empty() && !self.nodes[self.root].bag.is_empty() {
            return Err(Error::invariant("nice root bag is not empty"));
        }
        Ok(())
    }

    pub fn to_tree_decomposition(&self) -> TreeDecomposition {
        let mut parent = vec![None; self.nodes.len()];
        for (i, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                parent[c] = Some(i);
            }
        }
        TreeDecomposition {
            parent,
            bags: self.nodes.iter().map(|n| n.bag.clone()).collect(),
        }
    }
}

struct NiceBuilder {
    nodes: Vec<NiceNode>,
}

impl NiceBuilder {
    fn push(&mut self, kind: NiceKind, bag: Vec<VertexId>, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode {
            kind,
            bag,
            children,
        });
        self.nodes.len() - 1
    }

    /// Walks from node `top` (with bag `from`) to a node with bag `to` by
    /// forgetting first, then introducing.
    fn morph(&mut self, mut top: usize, from: &BTreeSet<VertexId>, to: &BTreeSet<VertexId>) -> usize {
        let mut cur = from.clone();
        for &v in from.difference(to) {
            cur.remove(&v);
            top = self.push(NiceKind::Forget(v), cur.iter().copied().collect(), vec![top]);
        }
        for &v in to.difference(from) {
            cur.insert(v);
            top = self.push(NiceKind::Introduce(v), cur.iter().copied().collect(), vec![top]);
        }
        top
    }
}

/// Converts to nice form, preserving width. Every vertex is forgotten exactly
/// once and the root bag is empty.
pub fn make_nice(t: &TreeDecomposition) -> Result<NiceTreeDecomposition> {
    let order = t
        .post_order()
        .map_err(|v| Error::InvalidParameter(v.to_string()))?;
    let mut b = NiceBuilder { nodes: Vec::new() };
    if order.is_empty() {
        let root = b.push(NiceKind::Leaf, Vec::new(), Vec::new());
        return Ok(NiceTreeDecomposition {
            nodes: b.nodes,
            root,
        });
    }
    let ch = t.children();
    let sets: Vec<BTreeSet<VertexId>> = t.bags.iter().map(|b| b.iter().copied().collect()).collect();
    let mut top: BTreeMap<usize, usize> = BTreeMap::new();
    let empty = BTreeSet::new();
    for &node in &order {
        let bag = &sets[node];
        let mut branches: Vec<usize> = ch[node]
            .iter()
            .map(|&c| {
                let start = top.remove(&c).expect("child processed first");
                b.morph(start, &sets[c], bag)
            })
            .collect();
        if branches.is_empty() {
            let leaf = b.push(NiceKind::Leaf, Vec::new(), Vec::new());
            branches.push(b.morph(leaf, &empty, bag));
        }
        let mut acc = branches[0];
        for &other in &branches[1..] {
            acc = b.push(NiceKind::Join, bag.iter().copied().collect(), vec![acc, other]);
        }
        top.insert(node, acc);
    }
    let root_node = *order.last().expect("non-empty");
    let start = top[&root_node];
    let root = b.morph(start, &sets[root_node], &empty);
    Ok(NiceTreeDecomposition {
        nodes: b.nodes,
        root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path(n: usize) -> Graph {
        Graph::new(n, (0..n.saturating_sub(1)).map(|i| (i, i + 1))).unwrap()
    }

    #[test]
    fn single_bag_is_valid() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let t = TreeDecomposition::single_bag((0..4).collect());
        assert_eq!(t.validate(&g), Ok(()));
        assert_eq!(t.width(), 3);
    }

    #[test]
    fn path_decomposition_of_p4() {
        let g = path(4);
        let t = TreeDecomposition {
            parent: vec![None, Some(0), Some(1)],
            bags: vec![vec![0, 1], vec![1, 2], vec![2, 3]],
        };
        assert_eq!(t.validate(&g), Ok(()));
        assert_eq!(t.width(), 1);
        let broken = TreeDecomposition {
            parent: vec![None, Some(0)],
            bags: vec![vec![0, 1], vec![2, 3]],
        };
        assert_eq!(
            broken.validate(&g),
            Err(Violation::EdgeUncovered { u: 1, v: 2 })
        );
    }

    #[test]
    fn disconnected_subtree_is_reported() {
        let g = path(3);
        let t = TreeDecomposition {
            parent: vec![None, Some(0), Some(1)],
            bags: vec![vec![0, 1], vec![2], vec![1, 2]],
        };
        assert_eq!(t.validate(&g), Err(Violation::SubtreeDisconnected { vertex: 1 }));
    }

    #[test]
    fn cycles_in_parent_links_are_rejected() {
        let g = path(2);
        let t = TreeDecomposition {
            parent: vec![None, Some(2), Some(1)],
            bags: vec![vec![0, 1], vec![0], vec![1]],
        };
        assert!(matches!(t.validate(&g), Err(Violation::Shape(_))));
    }

    #[test]
    fn elimination_order_on_cycle_has_width_two() {
        let g = Graph::new(5, (0..5).map(|i| (i, (i + 1) % 5))).unwrap();
        let t = TreeDecomposition::from_elimination_order(&g, &[0, 1, 2, 3, 4]).unwrap();
        assert_eq!(t.validate(&g), Ok(()));
        assert_eq!(t.width(), 2);
    }

    #[test]
    fn single_bag_nice_form_is_an_introduce_chain() {
        let t = TreeDecomposition::single_bag(vec![0, 1, 2]);
        let nice = make_nice(&t).unwrap();
        nice.check_shape().unwrap();
        assert_eq!(nice.nodes[0].kind, NiceKind::Leaf);
        assert!(matches!(nice.nodes[1].kind, NiceKind::Introduce(_)));
        assert!(matches!(nice.nodes[3].kind, NiceKind::Introduce(_)));
        assert_eq!(nice.width(), 2);
    }

    #[test]
    fn trace_with_one_leaf_gives_one_bag() {
        let trace = RecursionTrace {
            nodes: vec![TraceNode {
                parent: None,
                vertices: vec![0, 1, 2],
                s: vec![0],
                added: None,
                x: vec![],
                d: vec![],
                children: vec![],
                leaf: true,
            }],
        };
        let t = trace.assemble().unwrap();
        assert_eq!(t.bags, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn trace_with_wrong_child_s_is_rejected() {
        let trace = RecursionTrace {
            nodes: vec![
                TraceNode {
                    parent: None,
                    vertices: vec![0, 1, 2],
                    s: vec![0],
                    added: None,
                    x: vec![1],
                    d: vec![],
                    children: vec![1],
                    leaf: false,
                },
                TraceNode {
                    parent: Some(0),
                    vertices: vec![1, 2],
                    s: vec![2],
                    added: None,
                    x: vec![],
                    d: vec![],
                    children: vec![],
                    leaf: true,
                },
            ],
        };
        assert!(matches!(trace.assemble(), Err(Error::InconsistentTrace(_))));
    }

    #[test]
    fn min_fill_is_exact_on_trees_and_cycles() {
        let t = heuristic_decomposition(&path(7));
        assert_eq!(t.width(), 1);
        let c = Graph::new(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        let t = heuristic_decomposition(&c);
        assert_eq!(t.validate(&c), Ok(()));
        assert_eq!(t.width(), 2);
    }

    fn random_graph() -> impl Strategy<Value = Graph> {
        (1usize..11).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec(any::<bool>(), n * (n - 1) / 2),
                Just(()),
            )
                .prop_map(|(n, bits, _)| {
                    let mut edges = Vec::new();
                    let mut k = 0;
                    for a in 0..n {
                        for b in a + 1..n {
                            if bits[k] {
                                edges.push((a, b));
                            }
                            k += 1;
                        }
                    }
                    Graph::new(n, edges).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn nice_form_preserves_width_and_validity(g in random_graph(), perm_seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut order: Vec<usize> = (0..g.vertex_count()).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
            let t = TreeDecomposition::from_elimination_order(&g, &order).unwrap();
            prop_assert_eq!(t.validate(&g), Ok(()));
            let nice = make_nice(&t).unwrap();
            nice.check_shape().unwrap();
            prop_assert_eq!(nice.width(), t.width());
            prop_assert_eq!(nice.to_tree_decomposition().validate(&g), Ok(()));
            // every vertex forgotten exactly once
            let mut forgets = vec![0; g.vertex_count()];
            for node in &nice.nodes {
                if let NiceKind::Forget(v) = node.kind { forgets[v] += 1; }
            }
            prop_assert!(forgets.iter().all(|&c| c == 1));
        }
    }
}
