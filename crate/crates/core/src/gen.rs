//! Seeded instance generators: grids, random planar graphs and formulas,
//! adversarial noise, and the fixed small-graph corpus used for oracle
//! comparisons. Everything is a pure function of its parameters and seed.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use spade::{DelaunayTriangulation, Point2, Triangulation};

use crate::cnf::{CnfFormula, Literal};
use crate::error::{Error, Result};
use crate::graph::{connected_components, Edge, Graph, VertexId};

/// `k × k` grid; vertex `r·k + c` sits at row `r`, column `c`.
pub fn gen_grid(k: usize) -> Graph {
    let mut edges = Vec::with_capacity(2 * k * k.saturating_sub(1));
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
    Graph::new(k * k, edges).expect("grid edges are valid")
}

/// Probability that a triangulation edge outside the spanning tree is kept.
const PLANAR_KEEP: f64 = 0.8;

/// Delaunay triangulation of `n` uniform points in the unit square with its
/// vertex ids in insertion order.
fn triangulate(n: usize, rng: &mut ChaCha8Rng) -> Result<(Vec<(VertexId, VertexId)>, Vec<[VertexId; 3]>)> {
    let mut t: DelaunayTriangulation<Point2<f64>> = DelaunayTriangulation::new();
    let mut ids = BTreeMap::new();
    for i in 0..n {
        let p = Point2::new(rng.gen::<f64>(), rng.gen::<f64>());
        let h = t
            .insert(p)
            .map_err(|e| Error::InvalidParameter(format!("triangulation failed: {e:?}")))?;
        if ids.insert(h.index(), i).is_some() {
            return Err(Error::InvalidParameter("duplicate random point".into()));
        }
    }
    let mut edges: Vec<(VertexId, VertexId)> = t
        .undirected_edges()
        .map(|e| {
            let [a, b] = e.vertices();
            let (a, b) = (ids[&a.fix().index()], ids[&b.fix().index()]);
            (a.min(b), a.max(b))
        })
        .collect();
    edges.sort_unstable();
    let mut faces: Vec<[VertexId; 3]> = t
        .inner_faces()
        .map(|f| {
            let mut v = f.vertices().map(|h| ids[&h.fix().index()]);
            v.sort_unstable();
            v
        })
        .collect();
    faces.sort_unstable();
    Ok((edges, faces))
}

/// Connected planar graph: a Delaunay triangulation of random points with
/// non-tree edges kept independently with probability 0.8.
pub fn gen_random_planar(n: usize, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if n < 3 {
        return Graph::new(n, (1..n).map(|i| (i - 1, i)));
    }
    let (mut edges, _) = triangulate(n, &mut rng)?;
    edges.shuffle(&mut rng);
    // Random-order Kruskal keeps a spanning tree; the rest is subsampled.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], v: usize) -> usize {
        let mut r = v;
        while p[r] != r {
            r = p[r];
        }
        let mut c = v;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    let mut kept = Vec::new();
    for (a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            kept.push((a, b));
        } else if rng.gen_bool(PLANAR_KEEP) {
            kept.push((a, b));
        }
    }
    kept.sort_unstable();
    Graph::new(n, kept)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMode {
    /// Uniform over all non-edges.
    RandomUniform,
    /// A cycle through a random vertex patch plus chords, degree about 3.
    EmbeddedExpander,
    /// Non-edges among the vertices closest to a random center.
    Clustered,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub delta: f64,
    pub seed: u64,
    pub mode: NoiseMode,
}

impl NoiseSpec {
    pub fn new(delta: f64, seed: u64, mode: NoiseMode) -> Self {
        NoiseSpec { delta, seed, mode }
    }

    /// `⌊δ·count⌋`.
    pub fn count(&self, base: usize) -> usize {
        (self.delta * base as f64 + 1e-9).floor() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidParameter(format!("delta {} not in [0,1]", self.delta)));
        }
        Ok(())
    }
}

/// Adds `⌊δn⌋` new edges. Returns the noisy graph and the added edges, which
/// are ground truth for evaluation only.
pub fn add_noise_edges(g: &Graph, spec: &NoiseSpec) -> Result<(Graph, Vec<(VertexId, VertexId)>)> {
    spec.validate()?;
    let n = g.vertex_count();
    let want = spec.count(n);
    let free = n * n.saturating_sub(1) / 2 - g.edge_count();
    if want > free {
        return Err(Error::InvalidParameter(format!(
            "{want} noisy edges requested but only {free} non-edges exist"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut present: BTreeSet<(VertexId, VertexId)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    let mut added = Vec::new();
    let add = |a: VertexId, b: VertexId, present: &mut BTreeSet<(VertexId, VertexId)>, added: &mut Vec<_>| {
        let e = Edge::new(a, b);
        if a != b && added.len() < want && present.insert((e.u, e.v)) {
            added.push((e.u, e.v));
        }
    };
    match spec.mode {
        NoiseMode::RandomUniform => {}
        NoiseMode::EmbeddedExpander => {
            let t = (2 * want / 3 + 1).max(4).min(n);
            let mut patch: Vec<VertexId> = (0..n).collect();
            patch.shuffle(&mut rng);
            patch.truncate(t);
            for i in 0..t {
                if t > 1 {
                    add(patch[i], patch[(i + 1) % t], &mut present, &mut added);
                }
            }
            let mut deg: BTreeMap<VertexId, usize> = patch.iter().map(|&v| (v, 2)).collect();
            for _ in 0..20 * t * t {
                if added.len() >= want {
                    break;
                }
                let (a, b) = (patch[rng.gen_range(0..t)], patch[rng.gen_range(0..t)]);
                if deg[&a] < 3 && deg[&b] < 3 || rng.gen_bool(0.1) {
                    let before = added.len();
                    add(a, b, &mut present, &mut added);
                    if added.len() > before {
                        *deg.get_mut(&a).expect("patch vertex") += 1;
                        *deg.get_mut(&b).expect("patch vertex") += 1;
                    }
                }
            }
        }
        NoiseMode::Clustered => {
            if n > 0 {
                let center = rng.gen_range(0..n);
                let order = bfs_order(g, center);
                let mut size = 2.min(n);
                while added.len() < want && size <= n {
                    let cluster = &order[..size];
                    let mut pairs: Vec<(VertexId, VertexId)> = cluster
                        .iter()
                        .flat_map(|&a| cluster.iter().map(move |&b| (a, b)))
                        .filter(|&(a, b)| a < b && !present.contains(&(a, b)))
                        .collect();
                    pairs.shuffle(&mut rng);
                    let room = want - added.len();
                    if pairs.len() >= room || size == n {
                        for (a, b) in pairs.into_iter().take(room) {
                            add(a, b, &mut present, &mut added);
                        }
                        break;
                    }
                    size += 1;
                }
            }
        }
    }
    let mut guard = 0usize;
    while added.len() < want {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        add(a, b, &mut present, &mut added);
        guard += 1;
        if guard > 1000 * (want + n) {
            let missing: Vec<(VertexId, VertexId)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .filter(|p| !present.contains(p))
                .collect();
            for (a, b) in missing {
                add(a, b, &mut present, &mut added);
            }
        }
    }
    let mut all: Vec<(VertexId, VertexId)> = g.edges().iter().map(|e| (e.u, e.v)).collect();
    all.extend(&added);
    let noisy = Graph::new(n, all)?;
    Ok((noisy, added))
}

/// Vertices by BFS distance from `start`, then the unreached ones by id.
fn bfs_order(g: &Graph, start: VertexId) -> Vec<VertexId> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut q = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = q.pop_front() {
        order.push(v);
        let mut nb: Vec<VertexId> = g.neighbors(v).collect();
        nb.sort_unstable();
        for u in nb {
            if !seen[u] {
                seen[u] = true;
                q.push_back(u);
            }
        }
    }
    order.extend((0..n).filter(|&v| !seen[v]));
    order
}

/// Planar CNF with clauses of arity at most `k ∈ {1,2,3}`: `m` clauses over
/// `n` variables. Each clause is a distinct inner Delaunay face, Delaunay
/// edge or single vertex of random points, with random signs, so its node can
/// be drawn inside that face, on that edge or next to that vertex. Arity-`k`
/// shapes are used first; smaller ones only fill up the remainder.
pub fn gen_planar_cnf(n: usize, m: usize, k: usize, seed: u64) -> Result<CnfFormula> {
    if !(1..=3).contains(&k) || n < k {
        return Err(Error::InvalidParameter(format!(
            "planar CNF needs 1 <= k <= 3 and n >= k (got n={n}, k={k})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (edges, faces) = if n >= 3 {
        triangulate(n, &mut rng)?
    } else {
        ((1..n).map(|v| (v - 1, v)).collect(), Vec::new())
    };
    let mut by_arity: [Vec<Vec<usize>>; 3] = [
        (0..n).map(|v| vec![v]).collect(),
        edges.into_iter().map(|(a, b)| vec![a, b]).collect(),
        faces.into_iter().map(|f| f.to_vec()).collect(),
    ];
    let mut pool = Vec::new();
    for shapes in by_arity[..k].iter_mut().rev() {
        shapes.shuffle(&mut rng);
        pool.append(shapes);
    }
    if m > pool.len() {
        return Err(Error::InvalidParameter(format!(
            "only {} planar clauses of arity <= {k} over {n} variables, {m} requested",
            pool.len()
        )));
    }
    let clauses = pool
        .into_iter()
        .take(m)
        .map(|vars| {
            vars.into_iter()
                .map(|v| if rng.gen_bool(0.5) { Literal::neg(v) } else { Literal::pos(v) })
                .collect()
        })
        .collect();
    CnfFormula::new(n, clauses)
}

/// Appends `⌊δm⌋` clauses of exactly `k` distinct variables. Returns the
/// formula and the indices of the appended clauses.
pub fn add_noise_clauses(phi: &CnfFormula, k: usize, spec: &NoiseSpec) -> Result<(CnfFormula, Vec<usize>)> {
    spec.validate()?;
    let n = phi.num_vars();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("cannot draw {k} distinct variables from {n}")));
    }
    let want = spec.count(phi.num_clauses());
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let candidates: Vec<usize> = match spec.mode {
        NoiseMode::RandomUniform => (0..n).collect(),
        NoiseMode::EmbeddedExpander => {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut rng);
            all.truncate((2 * k).max(want + k).min(n));
            all
        }
        NoiseMode::Clustered => {
            let start = rng.gen_range(0..n);
            (0..(2 * k).min(n)).map(|i| (start + i) % n).collect()
        }
    };
    let mut extra = Vec::with_capacity(want);
    for _ in 0..want {
        let vars: Vec<usize> = candidates.choose_multiple(&mut rng, k).copied().collect();
        extra.push(
            vars.into_iter()
                .map(|v| if rng.gen_bool(0.5) { Literal::neg(v) } else { Literal::pos(v) })
                .collect(),
        );
    }
    let start = phi.num_clauses();
    let noisy = phi.with_appended(extra)?;
    Ok((noisy, (start..start + want).collect()))
}

/// Ground truth written next to a generated instance. Never read by the
/// solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema_version: u32,
    pub generator: String,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub noise: Option<NoiseSpec>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub noisy_edges: Vec<(VertexId, VertexId)>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub noisy_clauses: Vec<usize>,
}

/// Named graph from the oracle corpus.
#[derive(Clone, Debug)]
pub struct CorpusGraph {
    pub name: String,
    pub graph: Graph,
}

const CORPUS_SIZE: usize = 200;
const CORPUS_SEED: u64 = 0x5eed_c0de;

/// Fixed corpus of 200 graphs on at most 8 vertices: named families first,
/// then seeded random graphs of varied density.
pub fn oracle_corpus() -> Vec<CorpusGraph> {
    let mut out: Vec<CorpusGraph> = Vec::new();
    let mut push = |name: String, n: usize, edges: Vec<(usize, usize)>| {
        out.push(CorpusGraph {
            name,
            graph: Graph::new(n, edges).expect("corpus graph"),
        });
    };
    for n in 1..=8 {
        push(format!("P{n}"), n, (1..n).map(|i| (i - 1, i)).collect());
    }
    for n in 3..=8 {
        push(format!("C{n}"), n, (0..n).map(|i| (i, (i + 1) % n)).collect());
    }
    for n in 2..=8 {
        push(format!("K{n}"), n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect());
    }
    for n in 3..=8 {
        push(format!("star{n}"), n, (1..n).map(|i| (0, i)).collect());
    }
    for n in 4..=8 {
        let mut e: Vec<(usize, usize)> = (1..n).map(|i| (0, i)).collect();
        e.extend((1..n).map(|i| (i, if i + 1 < n { i + 1 } else { 1 })));
        push(format!("W{n}"), n, e);
    }
    for (a, b) in [(2, 2), (2, 3), (3, 3), (2, 4), (3, 4), (4, 4), (3, 5)] {
        push(
            format!("K{a},{b}"),
            a + b,
            (0..a).flat_map(|i| (0..b).map(move |j| (i, a + j))).collect(),
        );
    }
    for k in 2..=4 {
        let mut e = Vec::new();
        for i in 0..k {
            e.push((2 * i, 2 * i + 1));
            if i + 1 < k {
                e.push((2 * i, 2 * i + 2));
                e.push((2 * i + 1, 2 * i + 3));
            }
        }
        push(format!("ladder{k}"), 2 * k, e);
    }
    push("grid2x2".into(), 4, gen_grid(2).edges().iter().map(|e| (e.u, e.v)).collect());
    push(
        "cube".into(),
        8,
        (0..8usize)
            .flat_map(|a| [1, 2, 4].into_iter().map(move |b| (a, a ^ b)))
            .filter(|&(a, b)| a < b)
            .collect(),
    );
    push("empty5".into(), 5, Vec::new());
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    let mut i = 0;
    while out.len() < CORPUS_SIZE {
        let n = rng.gen_range(3..=8);
        let p = [0.25, 0.4, 0.55, 0.7][i % 4];
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .filter(|_| rng.gen_bool(p))
            .collect();
        out.push(CorpusGraph {
            name: format!("gnp{i}_n{n}_p{p}"),
            graph: Graph::new(n, edges).expect("random corpus graph"),
        });
        i += 1;
    }
    out
}

/// `k × k` grid plus `⌊δk²⌋` noisy edges.
pub fn gen_noisy_grid(k: usize, spec: &NoiseSpec) -> Result<(Graph, Vec<(VertexId, VertexId)>)> {
    add_noise_edges(&gen_grid(k), spec)
}

/// Whether `g` is connected (an empty graph counts as connected).
pub fn is_connected(g: &Graph) -> bool {
    connected_components(g).len() <= 1
}
