//! Tree–cotree decompositions and homology generators of a closed complex.

use super::{CellComplex, Dart, UnionFind};
use crate::error::{invalid, precondition, Result};

/// Spanning tree `T`, spanning cotree `C` (on faces, through edges not in
/// `T`) and the leftover edges, `2g` of them on a closed surface.
#[derive(Clone, Debug)]
pub struct TreeCotree {
    pub tree: Vec<bool>,
    pub cotree: Vec<bool>,
    pub generators: Vec<usize>,
}

/// Rooted spanning forest over abstract nodes, storing for each node the
/// dart leading to its parent.
struct Forest {
    parent: Vec<Option<(usize, Dart)>>,
    depth: Vec<usize>,
}

impl Forest {
    fn new(n: usize, links: &[(usize, usize, usize)]) -> Self {
        let mut adj = vec![Vec::new(); n];
        for &(a, b, e) in links {
            adj[a].push((b, Dart::rev(e)));
            adj[b].push((a, Dart::fwd(e)));
        }
        let mut parent = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        for root in 0..n {
            if depth[root] != usize::MAX {
                continue;
            }
            depth[root] = 0;
            let mut stack = vec![root];
            while let Some(u) = stack.pop() {
                for &(w, d) in &adj[u] {
                    if depth[w] == usize::MAX {
                        depth[w] = depth[u] + 1;
                        // `d` goes from w to u.
                        parent[w] = Some((u, d));
                        stack.push(w);
                    }
                }
            }
        }
        Forest { parent, depth }
    }

    /// Darts of the forest path from `u` to `v`.
    fn path(&self, mut u: usize, mut v: usize) -> Vec<Dart> {
        let (mut up, mut down) = (Vec::new(), Vec::new());
        while u != v {
            if self.depth[u] >= self.depth[v] {
                let (p, d) = self.parent[u].expect("nodes share a tree");
                up.push(d);
                u = p;
            } else {
                let (p, d) = self.parent[v].expect("nodes share a tree");
                down.push(d.reversed());
                v = p;
            }
        }
        up.extend(down.into_iter().rev());
        up
    }
}

impl TreeCotree {
    /// Decomposes a closed complex; `forced` edges must form a forest and
    /// are put in the tree first.
    pub fn new(cx: &CellComplex, forced: &[usize]) -> Result<Self> {
        if !cx.is_closed() {
            return precondition("tree–cotree decompositions need a closed surface");
        }
        let mut tree = vec![false; cx.n_edges()];
        let mut uf = UnionFind::new(cx.n_vertices);
        for &e in forced {
            if e >= cx.n_edges() {
                return invalid(format!("edge {e} does not exist"));
            }
            let [a, b] = cx.edges[e];
            if !uf.union(a, b) {
                return invalid(format!("forced edges close a cycle at edge {e}"));
            }
            tree[e] = true;
        }
        for (e, &[a, b]) in cx.edges.iter().enumerate() {
            if !tree[e] && uf.union(a, b) {
                tree[e] = true;
            }
        }
        let sides = cx.edge_sides();
        let mut cotree = vec![false; cx.n_edges()];
        let mut uf = UnionFind::new(cx.n_faces());
        for e in 0..cx.n_edges() {
            if tree[e] {
                continue;
            }
            let (l, r) = (sides[e].left.unwrap(), sides[e].right.unwrap());
            if uf.union(l, r) {
                cotree[e] = true;
            }
        }
        let generators = (0..cx.n_edges()).filter(|&e| !tree[e] && !cotree[e]).collect();
        Ok(TreeCotree { tree, cotree, generators })
    }

    /// Loop through edge `e` closed up in the tree.
    pub fn tree_loop(&self, cx: &CellComplex, e: usize) -> Vec<Dart> {
        let links: Vec<_> =
            (0..cx.n_edges()).filter(|&k| self.tree[k]).map(|k| (cx.edges[k][0], cx.edges[k][1], k)).collect();
        let forest = Forest::new(cx.n_vertices, &links);
        let [t, h] = cx.edges[e];
        let mut out = vec![Dart::fwd(e)];
        out.extend(forest.path(h, t));
        out
    }

    /// Loop on faces crossing edge `e` from its right face to its left face
    /// and closed up through the cotree. Each entry is a crossed edge,
    /// forward when crossed from right to left.
    pub fn cotree_loop(&self, cx: &CellComplex, e: usize) -> Vec<Dart> {
        let sides = cx.edge_sides();
        let links: Vec<_> = (0..cx.n_edges())
            .filter(|&k| self.cotree[k])
            .map(|k| (sides[k].right.unwrap(), sides[k].left.unwrap(), k))
            .collect();
        let forest = Forest::new(cx.n_faces(), &links);
        let (r, l) = (sides[e].right.unwrap(), sides[e].left.unwrap());
        let mut out = vec![Dart::fwd(e)];
        out.extend(forest.path(l, r));
        out
    }
}
