//! Planarity testing by path addition (Demoucron, Malgrange and Pertuiset),
//! applied to each biconnected block.

use std::collections::BTreeSet;

use crate::graph::{Edge, Graph, VertexId};

/// True iff `g` has a planar embedding.
pub fn is_planar(g: &Graph) -> bool {
    let n = g.vertex_count();
    if n >= 3 && g.edge_count() > 3 * n - 6 {
        return false;
    }
    biconnected_blocks(g).iter().all(|block| block_is_planar(block))
}

/// Edge sets of the biconnected blocks of `g`.
fn biconnected_blocks(g: &Graph) -> Vec<Vec<Edge>> {
    let n = g.vertex_count();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0usize;
    let mut stack: Vec<Edge> = Vec::new();
    let mut blocks = Vec::new();

    // Iterative DFS: frame = (vertex, parent edge id, next neighbor index).
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        let mut frames: Vec<(VertexId, usize, usize)> = vec![(root, usize::MAX, 0)];
        while let Some(&mut (v, pe, ref mut idx)) = frames.last_mut() {
            if *idx < g.incident(v).len() {
                let (u, id) = g.incident(v)[*idx];
                *idx += 1;
                if id == pe {
                    continue;
                }
                if disc[u] == usize::MAX {
                    stack.push(Edge::new(v, u));
                    disc[u] = timer;
                    low[u] = timer;
                    timer += 1;
                    frames.push((u, id, 0));
                } else if disc[u] < disc[v] {
                    stack.push(Edge::new(v, u));
                    low[v] = low[v].min(disc[u]);
                }
            } else {
                frames.pop();
                if let Some(&(p, _, _)) = frames.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] >= disc[p] {
                        let target = Edge::new(p, v);
                        let mut block = Vec::new();
                        while let Some(e) = stack.pop() {
                            block.push(e);
                            if e == target {
                                break;
                            }
                        }
                        blocks.push(block);
                    }
                }
            }
        }
    }
    blocks
}

/// Path-addition test on one biconnected block given by its edges.
fn block_is_planar(block: &[Edge]) -> bool {
    if block.len() <= 3 {
        return true;
    }
    let mut verts: Vec<VertexId> = block.iter().flat_map(|e| [e.u, e.v]).collect();
    verts.sort_unstable();
    verts.dedup();
    let k = verts.len();
    if block.len() > 3 * k - 6 {
        return false;
    }
    let local = |v: VertexId| verts.binary_search(&v).expect("block vertex");
    let mut adj = vec![Vec::new(); k];
    for e in block {
        let (a, b) = (local(e.u), local(e.v));
        adj[a].push(b);
        adj[b].push(a);
    }
    for nb in &mut adj {
        nb.sort_unstable();
    }

    let cycle = find_cycle(&adj);
    let mut embedded_v = vec![false; k];
    let mut embedded_e: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (i, &v) in cycle.iter().enumerate() {
        embedded_v[v] = true;
        let w = cycle[(i + 1) % cycle.len()];
        embedded_e.insert(key(v, w));
    }
    let mut faces: Vec<Vec<usize>> = vec![cycle.clone(), cycle];
    let total = block.len();

    while embedded_e.len() < total {
        let fragments = fragments(&adj, &embedded_v, &embedded_e);
        let mut choice: Option<(usize, usize)> = None;
        for (fi, frag) in fragments.iter().enumerate() {
            let admissible: Vec<usize> = (0..faces.len())
                .filter(|&f| frag.attachments.iter().all(|a| faces[f].contains(a)))
                .collect();
            match admissible.len() {
                0 => return false,
                1 => {
                    choice = Some((fi, admissible[0]));
                    break;
                }
                _ => {
                    if choice.is_none() {
                        choice = Some((fi, admissible[0]));
                    }
                }
            }
        }
        let (fi, face_idx) = choice.expect("at least one fragment remains");
        let path = fragment_path(&adj, &embedded_v, &fragments[fi]);
        for w in path.windows(2) {
            embedded_e.insert(key(w[0], w[1]));
        }
        for &v in &path {
            embedded_v[v] = true;
        }
        let face = faces.swap_remove(face_idx);
        let (f1, f2) = split_face(&face, &path);
        faces.push(f1);
        faces.push(f2);
    }
    true
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Any simple cycle; a biconnected block with at least 3 vertices has one.
fn find_cycle(adj: &[Vec<usize>]) -> Vec<usize> {
    let k = adj.len();
    let mut parent = vec![usize::MAX; k];
    let mut depth = vec![usize::MAX; k];
    let mut stack = vec![(0usize, 0usize)];
    depth[0] = 0;
    while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
        if *idx == adj[v].len() {
            stack.pop();
            continue;
        }
        let u = adj[v][*idx];
        *idx += 1;
        if depth[u] == usize::MAX {
            depth[u] = depth[v] + 1;
            parent[u] = v;
            stack.push((u, 0));
        } else if u != parent[v] && depth[u] < depth[v] {
            let mut cycle = vec![v];
            let mut x = v;
            while x != u {
                x = parent[x];
                cycle.push(x);
            }
            return cycle;
        }
    }
    unreachable!("biconnected block without a cycle")
}

struct Fragment {
    /// Interior (not yet embedded) vertices; empty for a chord.
    interior: Vec<usize>,
    /// Embedded vertices the fragment touches, sorted.
    attachments: Vec<usize>,
    /// For a chord, its two endpoints.
    chord: Option<(usize, usize)>,
}

fn fragments(adj: &[Vec<usize>], emb_v: &[bool], emb_e: &BTreeSet<(usize, usize)>) -> Vec<Fragment> {
    let k = adj.len();
    let mut out = Vec::new();
    for v in 0..k {
        if !emb_v[v] {
            continue;
        }
        for &u in &adj[v] {
            if v < u && emb_v[u] && !emb_e.contains(&key(v, u)) {
                out.push(Fragment {
                    interior: Vec::new(),
                    attachments: vec![v, u],
                    chord: Some((v, u)),
                });
            }
        }
    }
    let mut seen = vec![false; k];
    for s in 0..k {
        if emb_v[s] || seen[s] {
            continue;
        }
        let mut interior = vec![s];
        let mut att = BTreeSet::new();
        seen[s] = true;
        let mut i = 0;
        while i < interior.len() {
            let v = interior[i];
            i += 1;
            for &u in &adj[v] {
                if emb_v[u] {
                    att.insert(u);
                } else if !seen[u] {
                    seen[u] = true;
                    interior.push(u);
                }
            }
        }
        out.push(Fragment {
            interior,
            attachments: att.into_iter().collect(),
            chord: None,
        });
    }
    out
}

/// Path through the fragment joining two distinct attachment vertices.
fn fragment_path(adj: &[Vec<usize>], emb_v: &[bool], frag: &Fragment) -> Vec<usize> {
    if let Some((a, b)) = frag.chord {
        return vec![a, b];
    }
    let k = adj.len();
    let inside: BTreeSet<usize> = frag.interior.iter().copied().collect();
    let start = frag.attachments[0];
    // BFS from `start` into the interior until another attachment is hit.
    let mut prev = vec![usize::MAX; k];
    let mut queue = std::collections::VecDeque::new();
    for &u in &adj[start] {
        if inside.contains(&u) && prev[u] == usize::MAX {
            prev[u] = start;
            queue.push_back(u);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if emb_v[u] && u != start {
                let mut path = vec![u, v];
                let mut x = v;
                while prev[x] != start {
                    x = prev[x];
                    path.push(x);
                }
                path.push(start);
                path.reverse();
                return path;
            }
            if inside.contains(&u) && prev[u] == usize::MAX {
                prev[u] = v;
                queue.push_back(u);
            }
        }
    }
    unreachable!("fragment in a biconnected block has two attachments")
}

/// Splits the cyclic face by the path `a = p0, ..., pt = b`.
fn split_face(face: &[usize], path: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let a = path[0];
    let b = *path.last().expect("non-empty path");
    let len = face.len();
    let i = face.iter().position(|&v| v == a).expect("a on face");
    let j = face.iter().position(|&v| v == b).expect("b on face");
    let arc = |from: usize, to: usize| -> Vec<usize> {
        let mut out = vec![face[from]];
        let mut x = from;
        while x != to {
            x = (x + 1) % len;
            out.push(face[x]);
        }
        out
    };
    let inner = &path[1..path.len() - 1];
    // a .. b along the face, then back to a through the path.
    let mut f1 = arc(i, j);
    f1.extend(inner.iter().rev());
    // b .. a along the face, then back to b through the path.
    let mut f2 = arc(j, i);
    f2.extend(inner.iter());
    (f1, f2)
}
