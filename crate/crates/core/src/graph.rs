//! Undirected simple graphs, edge-induced subgraphs and connectivity.
//!
//! Vertex ids are dense in `0..n`. Edges are stored normalized (`u < v`) and
//! sorted, so an [`EdgeId`] is the index of an edge in that order and is stable
//! for the lifetime of the graph. Graphs are immutable after construction.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = usize;
pub type EdgeId = usize;

/// An undirected edge with `u < v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
}

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }

    pub fn other(&self, x: VertexId) -> VertexId {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    pub fn touches(&self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }
}

/// Role tag for factor-graph vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexRole {
    Variable,
    Clause,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    adj: Vec<Vec<(VertexId, EdgeId)>>,
    roles: Option<Vec<VertexRole>>,
}

impl Graph {
    /// Builds a graph on `n` vertices. Self-loops, parallel edges and
    /// out-of-range endpoints are rejected.
    pub fn new<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        let mut list = Vec::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a},{b}) references a vertex outside 0..{n}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            list.push(Edge::new(a, b));
        }
        list.sort_unstable();
        if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!(
                "parallel edge ({},{})",
                w[0].u, w[0].v
            )));
        }
        let mut adj = vec![Vec::new(); n];
        for (id, e) in list.iter().enumerate() {
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: list,
            adj,
            roles: None,
        })
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            edges: Vec::new(),
            adj: vec![Vec::new(); n],
            roles: None,
        }
    }

    pub fn with_roles(mut self, roles: Vec<VertexRole>) -> Result<Self> {
        if roles.len() != self.n {
            return Err(Error::InvalidGraph(format!(
                "{} role tags for {} vertices",
                roles.len(),
                self.n
            )));
        }
        self.roles = Some(roles);
        Ok(self)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id]
    }

    pub fn roles(&self) -> Option<&[VertexRole]> {
        self.roles.as_deref()
    }

    /// Neighbors of `v` with the connecting edge id, sorted by neighbor.
    pub fn incident(&self, v: VertexId) -> &[(VertexId, EdgeId)] {
        &self.adj[v]
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj[v].iter().map(|&(u, _)| u)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    pub fn edge_id(&self, a: VertexId, b: VertexId) -> Option<EdgeId> {
        if a >= self.n || b >= self.n {
            return None;
        }
        self.adj[a]
            .binary_search_by_key(&b, |&(u, _)| u)
            .ok()
            .map(|i| self.adj[a][i].1)
    }

    pub fn has_edge(&self, a: VertexId, b: VertexId) -> bool {
        self.edge_id(a, b).is_some()
    }

    /// `G - F`: same vertex set, edges in `removed` dropped. Edge ids of the
    /// result are renumbered.
    pub fn without_edges(&self, removed: &BTreeSet<EdgeId>) -> Graph {
        let kept = self
            .edges
            .iter()
            .enumerate()
            .filter(|(id, _)| !removed.contains(id))
            .map(|(_, e)| (e.u, e.v));
        let mut g = Graph::new(self.n, kept).expect("subset of a simple graph is simple");
        g.roles = self.roles.clone();
        g
    }

    /// Subgraph induced on `vertices`, relabelled to `0..k` in the given order.
    /// Returns the graph and the map from new ids to old ids.
    pub fn induced(&self, vertices: &[VertexId]) -> (Graph, Vec<VertexId>) {
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| local[e.u] != usize::MAX && local[e.v] != usize::MAX)
            .map(|e| (local[e.u], local[e.v]));
        let g = Graph::new(vertices.len(), edges).expect("induced subgraph is simple");
        (g, vertices.to_vec())
    }

    /// Neighborhood bitmasks, available when `n <= 64`.
    pub fn adjacency_masks(&self) -> Option<Vec<u64>> {
        if self.n > 64 {
            return None;
        }
        Some(
            (0..self.n)
                .map(|v| self.neighbors(v).fold(0u64, |m, u| m | (1u64 << u)))
                .collect(),
        )
    }
}

/// Connected components, each sorted, ordered by smallest vertex.
pub fn connected_components(g: &Graph) -> Vec<Vec<VertexId>> {
    let vertices: Vec<VertexId> = (0..g.vertex_count()).collect();
    components_of(&vertices, g.edges().iter().map(|e| (e.u, e.v)))
}

/// Components of the graph `(vertices, edges)`. Edges with an endpoint outside
/// `vertices` are ignored. `vertices` must be sorted.
pub fn components_of<I>(vertices: &[VertexId], edges: I) -> Vec<Vec<VertexId>>
where
    I: IntoIterator<Item = (VertexId, VertexId)>,
{
    let mut dsu = Dsu::new(vertices.len());
    let index = |v: VertexId| vertices.binary_search(&v).ok();
    for (a, b) in edges {
        if let (Some(i), Some(j)) = (index(a), index(b)) {
            dsu.union(i, j);
        }
    }
    let mut groups: Vec<Vec<VertexId>> = Vec::new();
    let mut slot = vec![usize::MAX; vertices.len()];
    for (i, &v) in vertices.iter().enumerate() {
        let r = dsu.find(i);
        if slot[r] == usize::MAX {
            slot[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[r]].push(v);
    }
    groups
}

struct Dsu {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// A zero-weight copy `zombie` of a removed vertex `s`, attached to the
/// surviving neighbor `real` by a copy of the original edge `(s, real)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZombieEdge {
    pub zombie: VertexId,
    pub real: VertexId,
    pub original: EdgeId,
}

/// An edge of a [`Subgraph`] in local terms: zombie edges keep a pointer to
/// the parent edge they copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubEdge {
    pub a: VertexId,
    pub b: VertexId,
    pub original: EdgeId,
    pub zombie: bool,
}

/// Vertex set plus edge subset of a parent graph, optionally carrying zombie
/// edges. Zombie vertex ids start at `parent.vertex_count()`.
#[derive(Clone, Debug)]
pub struct Subgraph<'g> {
    parent: &'g Graph,
    vertices: Vec<VertexId>,
    edges: Vec<EdgeId>,
    zombies: Vec<ZombieEdge>,
}

impl<'g> Subgraph<'g> {
    pub fn full(parent: &'g Graph) -> Self {
        Subgraph {
            parent,
            vertices: (0..parent.vertex_count()).collect(),
            edges: (0..parent.edge_count()).collect(),
            zombies: Vec::new(),
        }
    }

    pub fn new(parent: &'g Graph, vertices: Vec<VertexId>, edges: Vec<EdgeId>) -> Result<Self> {
        let mut vertices = vertices;
        vertices.sort_unstable();
        vertices.dedup();
        let mut edges = edges;
        edges.sort_unstable();
        edges.dedup();
        if let Some(&v) = vertices.iter().find(|&&v| v >= parent.vertex_count()) {
            return Err(Error::InvalidGraph(format!("vertex {v} not in parent")));
        }
        for &id in &edges {
            if id >= parent.edge_count() {
                return Err(Error::InvalidGraph(format!("edge id {id} not in parent")));
            }
            let e = parent.edge(id);
            if vertices.binary_search(&e.u).is_err() || vertices.binary_search(&e.v).is_err() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({},{}) has an endpoint outside the vertex set",
                    e.u, e.v
                )));
            }
        }
        Ok(Subgraph {
            parent,
            vertices,
            edges,
            zombies: Vec::new(),
        })
    }

    pub fn parent(&self) -> &'g Graph {
        self.parent
    }

    /// Real (non-zombie) vertices, sorted.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// Real edges as parent edge ids, sorted.
    pub fn edges(&self) -> &[EdgeId] {
        &self.edges
    }

    pub fn zombies(&self) -> &[ZombieEdge] {
        &self.zombies
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        if v >= self.parent.vertex_count() {
            return self.zombie(v).is_some_and(ZombieEdge::is_live);
        }
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn contains_edge(&self, id: EdgeId) -> bool {
        self.edges.binary_search(&id).is_ok()
    }

    /// One past the largest vertex id that may appear (zombies included).
    pub fn id_bound(&self) -> usize {
        self.parent.vertex_count() + self.zombies.len()
    }

    pub fn is_zombie(&self, v: VertexId) -> bool {
        v >= self.parent.vertex_count()
    }

    pub fn zombie(&self, v: VertexId) -> Option<&ZombieEdge> {
        v.checked_sub(self.parent.vertex_count())
            .and_then(|i| self.zombies.get(i))
    }

    /// Original vertex behind `v`: itself for real vertices, the removed
    /// vertex a zombie stands in for otherwise.
    pub fn original_vertex(&self, v: VertexId) -> VertexId {
        match self.zombie(v) {
            Some(z) => self.parent.edge(z.original).other(z.real),
            None => v,
        }
    }

    /// All edges, real then zombie, in local vertex ids.
    pub fn sub_edges(&self) -> impl Iterator<Item = SubEdge> + '_ {
        let real = self.edges.iter().map(move |&id| {
            let e = self.parent.edge(id);
            SubEdge {
                a: e.u,
                b: e.v,
                original: id,
                zombie: false,
            }
        });
        let zombie = self.zombies.iter().filter(|z| z.is_live()).map(|z| SubEdge {
            a: z.real,
            b: z.zombie,
            original: z.original,
            zombie: true,
        });
        real.chain(zombie)
    }

    /// Local adjacency indexed by vertex id up to [`Self::id_bound`].
    pub fn adjacency(&self) -> Vec<Vec<(VertexId, SubEdge)>> {
        let mut adj = vec![Vec::new(); self.id_bound()];
        for e in self.sub_edges() {
            adj[e.a].push((e.b, e));
            adj[e.b].push((e.a, e));
        }
        adj
    }

    /// Live zombie vertices (those whose edge is still present).
    pub fn zombie_vertices(&self) -> Vec<VertexId> {
        self.zombies
            .iter()
            .filter(|z| z.is_live())
            .map(|z| z.zombie)
            .collect()
    }

    /// Adds a zombie copy of the removed vertex behind `original` hanging off
    /// `real`. Returns the fresh zombie id.
    pub fn with_zombie(&self, real: VertexId, original: EdgeId) -> (Subgraph<'g>, VertexId) {
        let mut next = self.clone();
        let id = self.id_bound();
        next.zombies.push(ZombieEdge {
            zombie: id,
            real,
            original,
        });
        (next, id)
    }

    /// Removes vertices (real or zombie) and every incident edge. Zombie ids
    /// of surviving zombies are preserved.
    pub fn without_vertices(&self, removed: &BTreeSet<VertexId>) -> Subgraph<'g> {
        let vertices = self
            .vertices
            .iter()
            .copied()
            .filter(|v| !removed.contains(v))
            .collect();
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|&id| {
                let e = self.parent.edge(id);
                !removed.contains(&e.u) && !removed.contains(&e.v)
            })
            .collect();
        // Removed zombies keep their slot so ids stay stable; a dead slot has
        // `real == usize::MAX` and is skipped everywhere.
        let zombies = self
            .zombies
            .iter()
            .map(|z| {
                if removed.contains(&z.zombie) || removed.contains(&z.real) {
                    ZombieEdge {
                        zombie: z.zombie,
                        real: usize::MAX,
                        original: z.original,
                    }
                } else {
                    *z
                }
            })
            .collect();
        Subgraph {
            parent: self.parent,
            vertices,
            edges,
            zombies,
        }
    }

    /// Components of `self - removed_vertices - removed_edges`, over real
    /// vertices and real edges only.
    pub fn components_excluding(
        &self,
        removed_vertices: &BTreeSet<VertexId>,
        removed_edges: &BTreeSet<EdgeId>,
    ) -> Vec<Vec<VertexId>> {
        let kept: Vec<VertexId> = self
            .vertices
            .iter()
            .copied()
            .filter(|v| !removed_vertices.contains(v))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|id| !removed_edges.contains(id))
            .map(|&id| self.parent.edge(id))
            .map(|e| (e.u, e.v));
        components_of(&kept, edges)
    }

    /// Edges of `self` minus `deleted` with at least one endpoint in
    /// `component`, together with their endpoints and `component` itself.
    pub fn boundary_subgraph(
        &self,
        component: &[VertexId],
        deleted: &BTreeSet<EdgeId>,
    ) -> Result<Subgraph<'g>> {
        if let Some(&v) = component.iter().find(|&&v| !self.contains_vertex(v)) {
            return Err(Error::InvalidGraph(format!(
                "component vertex {v} is not in the subgraph"
            )));
        }
        let comp: BTreeSet<VertexId> = component.iter().copied().collect();
        let mut vertices: BTreeSet<VertexId> = comp.clone();
        let mut edges = Vec::new();
        for &id in &self.edges {
            if deleted.contains(&id) {
                continue;
            }
            let e = self.parent.edge(id);
            if comp.contains(&e.u) || comp.contains(&e.v) {
                edges.push(id);
                vertices.insert(e.u);
                vertices.insert(e.v);
            }
        }
        Subgraph::new(self.parent, vertices.into_iter().collect(), edges)
    }
}

impl ZombieEdge {
    pub fn is_live(&self) -> bool {
        self.real != usize::MAX
    }
}

/// Connected components of a subgraph (real part only).
pub fn subgraph_components(h: &Subgraph<'_>) -> Vec<Vec<VertexId>> {
    h.components_excluding(&BTreeSet::new(), &BTreeSet::new())
}

#[cfg(test)]
mod tests {
    use super::*;

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

    fn bfs_components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut queue = std::collections::VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &u in &adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    #[test]
    fn rejects_loops_parallel_edges_and_bad_ids() {
        assert!(Graph::new(2, [(0, 0)]).is_err());
        assert!(Graph::new(2, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(2, [(0, 2)]).is_err());
    }

    #[test]
    fn components_of_empty_graph() {
        assert!(connected_components(&Graph::empty(0)).is_empty());
    }

    #[test]
    fn triangle_plus_isolated_vertex() {
        let g = Graph::new(4, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(connected_components(&g), vec![vec![0, 1, 2], vec![3]]);
    }

    #[test]
    fn grid_minus_middle_column_edges_matches_bfs() {
        // 4x4 grid, drop every horizontal edge between columns 1 and 2.
        let g = grid(4);
        let kept: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .filter(|e| !(e.v == e.u + 1 && e.u % 4 == 1))
            .map(|e| (e.u, e.v))
            .collect();
        let h = Graph::new(16, kept.clone()).unwrap();
        assert_eq!(connected_components(&h), bfs_components(16, &kept));
        assert_eq!(connected_components(&h).len(), 2);
    }

    #[test]
    fn boundary_subgraph_of_star_leaf() {
        let g = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let h = Subgraph::full(&g);
        let b = h.boundary_subgraph(&[2], &BTreeSet::new()).unwrap();
        assert_eq!(b.vertices(), &[0, 2]);
        assert_eq!(b.edges(), &[g.edge_id(0, 2).unwrap()]);
    }

    #[test]
    fn boundary_subgraph_rejects_foreign_component() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        let h = Subgraph::new(&g, vec![0, 1], vec![0]).unwrap();
        assert!(h.boundary_subgraph(&[2], &BTreeSet::new()).is_err());
    }

    #[test]
    fn boundary_subgraphs_of_siblings_are_edge_disjoint() {
        let g = grid(4);
        let h = Subgraph::full(&g);
        let x: BTreeSet<usize> = [1, 5, 9, 13].into_iter().collect();
        let comps = h.components_excluding(&x, &BTreeSet::new());
        assert_eq!(comps.len(), 2);
        let a = h.boundary_subgraph(&comps[0], &BTreeSet::new()).unwrap();
        let b = h.boundary_subgraph(&comps[1], &BTreeSet::new()).unwrap();
        assert!(a.edges().iter().all(|e| !b.edges().contains(e)));
    }

    #[test]
    fn zombie_bookkeeping() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let h = Subgraph::full(&g);
        let removed: BTreeSet<usize> = [1].into_iter().collect();
        let h2 = h.without_vertices(&removed);
        let (h3, z) = h2.with_zombie(2, g.edge_id(1, 2).unwrap());
        assert_eq!(z, 3);
        assert!(h3.contains_vertex(z));
        assert_eq!(h3.original_vertex(z), 1);
        assert_eq!(h3.sub_edges().filter(|e| e.zombie).count(), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_graph() -> impl Strategy<Value = Graph> {
            (1usize..10).prop_flat_map(|n| {
                proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
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
            fn boundary_subgraph_matches_edge_filter(g in random_graph(), pick in any::<u64>()) {
                let h = Subgraph::full(&g);
                let comps = connected_components(&g);
                let comp = &comps[(pick as usize) % comps.len()];
                let b = h.boundary_subgraph(comp, &BTreeSet::new()).unwrap();
                let expected: Vec<usize> = (0..g.edge_count())
                    .filter(|&id| comp.contains(&g.edge(id).u) || comp.contains(&g.edge(id).v))
                    .collect();
                prop_assert_eq!(b.edges(), expected.as_slice());
            }

            #[test]
            fn components_partition_vertices(g in random_graph()) {
                let comps = connected_components(&g);
                let mut all: Vec<usize> = comps.concat();
                all.sort_unstable();
                prop_assert_eq!(all, (0..g.vertex_count()).collect::<Vec<_>>());
                let edges: Vec<(usize, usize)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
                prop_assert_eq!(comps, bfs_components(g.vertex_count(), &edges));
            }
        }
    }
}
