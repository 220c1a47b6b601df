use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{invalid, precondition, Result};
use crate::mesh::{Dart, TripleGraph, UnionFind};

/// A double cover `Υ′` of the triple graph. Vertex `ξ` of `Υ` lifts to
/// `(ξ, 0)` and `(ξ, 1)`; edge `e` from `ξ` to `ξ′` lifts to
/// `(ξ, s) → (ξ′, s + lift[e])`.
#[derive(Clone, Debug)]
pub struct SpinStructure {
    pub triple: TripleGraph,
    pub lift: Vec<bool>,
    /// Edges closing the basis cycles and the parity `μ` prescribed on them.
    pub generators: Vec<usize>,
    pub mu: Vec<bool>,
}

/// Spanning forest of `Υ` with parent darts, in breadth-first order from
/// vertex 0 of each component.
pub(crate) struct Tree {
    pub in_tree: Vec<bool>,
    parent: Vec<Option<(usize, Dart)>>,
    depth: Vec<usize>,
    pub order: Vec<usize>,
}

impl Tree {
    pub fn new(triple: &TripleGraph, root: usize) -> Self {
        let n = triple.n_vertices();
        let cx = &triple.complex;
        let mut adj = vec![Vec::new(); n];
        for (e, &[a, b]) in cx.edges.iter().enumerate() {
            adj[a].push((b, Dart::fwd(e)));
            adj[b].push((a, Dart::rev(e)));
        }
        let mut in_tree = vec![false; cx.n_edges()];
        let mut parent = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut order = Vec::with_capacity(n);
        for start in std::iter::once(root).chain(0..n) {
            if depth[start] != usize::MAX {
                continue;
            }
            depth[start] = 0;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                order.push(u);
                for &(w, d) in &adj[u] {
                    if depth[w] == usize::MAX {
                        depth[w] = depth[u] + 1;
                        in_tree[d.edge] = true;
                        parent[w] = Some((u, d));
                        queue.push_back(w);
                    }
                }
            }
        }
        Tree { in_tree, parent, depth, order }
    }

    /// Parent of `v` and the dart leading from the parent to `v`.
    pub fn parent(&self, v: usize) -> Option<(usize, Dart)> {
        self.parent[v]
    }

    /// Cycle made of edge `e` followed by the tree path back to its tail.
    pub fn cycle(&self, triple: &TripleGraph, e: usize) -> Vec<Dart> {
        let [t, h] = triple.complex.edges[e];
        let (mut u, mut v) = (h, t);
        let (mut up, mut down) = (Vec::new(), Vec::new());
        while u != v {
            if self.depth[u] >= self.depth[v] {
                let (p, d) = self.parent[u].expect("connected");
                up.push(d.reversed());
                u = p;
            } else {
                let (p, d) = self.parent[v].expect("connected");
                down.push(d);
                v = p;
            }
        }
        let mut out = vec![Dart::fwd(e)];
        out.extend(up);
        out.extend(down.into_iter().rev());
        out
    }
}

impl SpinStructure {
    /// Builds the cover by peeling a spanning tree of faces: tree edges do
    /// not switch sheets, the generators switch according to `mu`, and every
    /// remaining edge is fixed by the face it closes so that each face
    /// boundary lifts to a connected cycle. On surfaces with boundary the
    /// boundary edges are attached to one outer face, which carries no
    /// condition.
    pub fn build(triple: &TripleGraph, mu: &[bool]) -> Result<Self> {
        let cx = &triple.complex;
        let (_, cotree, generators) = decompose(triple)?;
        let sides = cx.edge_sides();
        let outer = cx.n_faces();
        let node = |f: Option<usize>| f.unwrap_or(outer);
        if mu.len() != generators.len() {
            return invalid(format!(
                "{} parities given for a cycle basis with {} generators",
                mu.len(),
                generators.len()
            ));
        }
        let mut lift = vec![false; cx.n_edges()];
        for (&e, &b) in generators.iter().zip(mu) {
            lift[e] = b;
        }
        // Peel the face tree from its leaves towards the root.
        let has_outer = sides.iter().any(|s| s.left.is_none() || s.right.is_none());
        let root = if has_outer { outer } else { 0 };
        let mut adj = vec![Vec::new(); outer + 1];
        for e in (0..cx.n_edges()).filter(|&e| cotree[e]) {
            let (l, r) = (node(sides[e].left), node(sides[e].right));
            adj[l].push((r, e));
            adj[r].push((l, e));
        }
        let mut up: Vec<Option<usize>> = vec![None; outer + 1];
        let mut seen = vec![false; outer + 1];
        let mut order = vec![root];
        seen[root] = true;
        let mut k = 0;
        while k < order.len() {
            let f = order[k];
            k += 1;
            for &(g, e) in &adj[f] {
                if !seen[g] {
                    seen[g] = true;
                    up[g] = Some(e);
                    order.push(g);
                }
            }
        }
        for &f in order.iter().rev() {
            if f == outer {
                continue;
            }
            let Some(e) = up[f] else { continue };
            let others = cx.faces[f].iter().filter(|d| d.edge != e).fold(false, |acc, d| acc ^ lift[d.edge]);
            lift[e] = !others;
        }
        let s = SpinStructure { triple: triple.clone(), lift, generators, mu: mu.to_vec() };
        if let Some(f) = s.trivial_faces().first() {
            return precondition(format!("face {f} of Υ lifts to two cycles"));
        }
        Ok(s)
    }

    /// The cover with the given sheet switches, its `μ` read on the cycle
    /// basis. Whether faces lift correctly is left to
    /// [`SpinStructure::trivial_faces`].
    pub fn from_lift(triple: &TripleGraph, lift: Vec<bool>) -> Self {
        let (tree, _, generators) = decompose(triple).expect("triple graphs of a double map are connected");
        let mut s = SpinStructure { triple: triple.clone(), lift, generators, mu: Vec::new() };
        s.mu = s.generators.iter().map(|&e| s.parity(&tree.cycle(triple, e))).collect();
        s
    }

    /// All `2^n` structures from the `n` generators of the cycle basis.
    pub fn enumerate(triple: &TripleGraph) -> Result<Vec<Self>> {
        let n = decompose(triple)?.2.len();
        if n > 16 {
            return invalid(format!("{n} generators give too many structures to enumerate"));
        }
        (0..1usize << n)
            .map(|bits| {
                let mu: Vec<bool> = (0..n).map(|k| bits >> k & 1 == 1).collect();
                Self::build(triple, &mu)
            })
            .collect()
    }

    /// Parity of sheet switches along a chain of `Υ` darts: 1 when a closed
    /// chain does not lift to a cycle.
    pub fn parity(&self, darts: &[Dart]) -> bool {
        darts.iter().fold(false, |acc, d| acc ^ self.lift[d.edge])
    }

    /// Faces of `Υ` whose boundary lifts to two separate cycles.
    pub fn trivial_faces(&self) -> Vec<usize> {
        (0..self.triple.n_faces()).filter(|&f| !self.parity(&self.triple.complex.faces[f])).collect()
    }

    /// Sheet relabelling `g` with `other.lift[e] = lift[e] + g(t) + g(h)`,
    /// when the covers are isomorphic.
    pub fn gauge_to(&self, other: &SpinStructure) -> Option<Vec<bool>> {
        let cx = &self.triple.complex;
        if cx != &other.triple.complex {
            return None;
        }
        let tree = Tree::new(&self.triple, 0);
        let mut g = vec![false; cx.n_vertices];
        for &v in &tree.order {
            if let Some((p, d)) = tree.parent(v) {
                g[v] = g[p] ^ self.lift[d.edge] ^ other.lift[d.edge];
            }
        }
        cx.edges
            .iter()
            .enumerate()
            .all(|(e, &[a, b])| other.lift[e] == self.lift[e] ^ g[a] ^ g[b])
            .then_some(g)
    }

    pub fn isomorphic(&self, other: &SpinStructure) -> bool {
        self.gauge_to(other).is_some()
    }

    pub fn summary(&self) -> SpinSummary {
        SpinSummary {
            triple_vertices: self.triple.n_vertices(),
            triple_edges: self.triple.n_edges(),
            triple_faces: self.triple.n_faces(),
            generators: self.generators.clone(),
            mu: self.mu.clone(),
            trivial_faces: self.trivial_faces(),
        }
    }
}

/// Spanning tree of `Υ`, spanning tree of its faces (plus one outer face
/// when there is a boundary) through the other edges, and the leftover
/// generators.
fn decompose(triple: &TripleGraph) -> Result<(Tree, Vec<bool>, Vec<usize>)> {
    let cx = &triple.complex;
    let tree = Tree::new(triple, 0);
    let mut vert = UnionFind::new(cx.n_vertices);
    for &[a, b] in &cx.edges {
        vert.union(a, b);
    }
    if cx.n_vertices > 0 && vert.count() != 1 {
        return precondition("spin structures are built on a connected triple graph");
    }
    let sides = cx.edge_sides();
    let outer = cx.n_faces();
    let node = |f: Option<usize>| f.unwrap_or(outer);
    let mut faces = UnionFind::new(outer + 1);
    let mut cotree = vec![false; cx.n_edges()];
    for e in 0..cx.n_edges() {
        if !tree.in_tree[e] && faces.union(node(sides[e].left), node(sides[e].right)) {
            cotree[e] = true;
        }
    }
    let generators = (0..cx.n_edges()).filter(|&e| !tree.in_tree[e] && !cotree[e]).collect();
    Ok((tree, cotree, generators))
}

/// Serializable description of a spin structure.
#[derive(Clone, Debug, Serialize)]
pub struct SpinSummary {
    pub triple_vertices: usize,
    pub triple_edges: usize,
    pub triple_faces: usize,
    pub generators: Vec<usize>,
    pub mu: Vec<bool>,
    pub trivial_faces: Vec<usize>,
}
