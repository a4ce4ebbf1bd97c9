//! Graph oracles: hop distances, unit-capacity max-flow, tree enumeration
//! and point-in-polygon.

use std::collections::VecDeque;

use crate::metrics::Point;
use crate::rng::Lcg;

/// Undirected multigraph on `0..n` as an edge list.
#[derive(Debug, Clone)]
pub struct EdgeList {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl EdgeList {
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// Hop distances from `s`; `None` when unreachable.
    pub fn bfs(&self, s: usize) -> Vec<Option<usize>> {
        let adj = self.adjacency();
        let mut dist = vec![None; self.n];
        dist[s] = Some(0);
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            let dv = dist[v].expect("visited");
            for &w in &adj[v] {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    q.push_back(w);
                }
            }
        }
        dist
    }

    /// All-pairs hop distances.
    pub fn hop_matrix(&self) -> Vec<Vec<Option<usize>>> {
        (0..self.n).map(|s| self.bfs(s)).collect()
    }

    /// Maximum number of edge-disjoint `s`–`t` paths: Edmonds–Karp max-flow
    /// where every undirected edge is a pair of opposite unit arcs.
    pub fn max_flow(&self, s: usize, t: usize) -> usize {
        // residual arcs: (to, capacity), arc i^1 is the reverse of arc i
        let mut to = Vec::new();
        let mut cap = Vec::new();
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        for &(a, b) in &self.edges {
            if a == b {
                continue;
            }
            for (u, v) in [(a, b), (b, a)] {
                out[u].push(to.len());
                to.push(v);
                cap.push(1i32);
                out[v].push(to.len());
                to.push(u);
                cap.push(0i32);
            }
        }
        let mut flow = 0;
        loop {
            let mut via = vec![usize::MAX; self.n];
            let mut seen = vec![false; self.n];
            seen[s] = true;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &arc in &out[v] {
                    let w = to[arc];
                    if cap[arc] > 0 && !seen[w] {
                        seen[w] = true;
                        via[w] = arc;
                        q.push_back(w);
                    }
                }
            }
            if !seen[t] {
                return flow;
            }
            let mut v = t;
            while v != s {
                let arc = via[v];
                cap[arc] -= 1;
                cap[arc ^ 1] += 1;
                v = to[arc ^ 1];
            }
            flow += 1;
        }
    }
}

/// The labelled tree on `seq.len() + 2` vertices encoded by a Prüfer
/// sequence.
pub fn prufer_tree(seq: &[usize]) -> EdgeList {
    let n = seq.len() + 2;
    let mut degree = vec![1usize; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in seq {
        let leaf = (0..n).find(|&u| degree[u] == 1).expect("a leaf exists");
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    EdgeList { n, edges }
}

/// Every labelled tree on `n ≥ 2` vertices (Cayley: n^(n−2) of them).
pub fn all_trees(n: usize) -> Vec<EdgeList> {
    assert!(n >= 2);
    let len = n - 2;
    let count = n.pow(len as u32);
    (0..count)
        .map(|mut code| {
            let seq: Vec<usize> = (0..len)
                .map(|_| {
                    let d = code % n;
                    code /= n;
                    d
                })
                .collect();
            prufer_tree(&seq)
        })
        .collect()
}

/// A uniformly random labelled tree on `n ≥ 2` vertices.
pub fn random_tree(n: usize, rng: &mut Lcg) -> EdgeList {
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.below(n)).collect();
    prufer_tree(&seq)
}

/// Even-odd ray casting; points on the boundary (within `eps`) count as
/// inside.
pub fn point_in_polygon(p: Point, poly: &[Point], eps: f64) -> bool {
    let n = poly.len();
    if n == 0 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
        let len2 = dx * dx + dy * dy;
        let t = if len2 == 0.0 {
            0.0
        } else {
            (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
        };
        let (cx, cy) = (a[0] + t * dx, a[1] + t * dy);
        if ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt() <= eps {
            return true;
        }
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < (b[0] - a[0]) * (p[1] - a[1]) / (b[1] - a[1]) + a[0] {
            inside = !inside;
        }
        j = i;
    }
    inside
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cayley_counts_and_tree_shape() {
        for n in 2..=6 {
            let trees = all_trees(n);
            assert_eq!(trees.len(), n.pow(n as u32 - 2));
            for t in &trees {
                assert_eq!(t.edges.len(), n - 1);
                assert!(t.bfs(0).iter().all(Option::is_some), "trees are connected");
            }
        }
    }

    #[test]
    fn prufer_of_a_star() {
        let t = prufer_tree(&[0, 0, 0]);
        assert!(t.edges.iter().all(|&(a, b)| a == 0 || b == 0));
    }

    #[test]
    fn max_flow_small_cases() {
        // two disjoint routes plus a shared bridge
        let g = EdgeList {
            n: 6,
            edges: vec![(0, 1), (1, 5), (0, 2), (2, 5), (0, 3), (3, 4), (4, 1)],
        };
        assert_eq!(g.max_flow(0, 5), 2);
        let path = EdgeList { n: 3, edges: vec![(0, 1), (1, 2)] };
        assert_eq!(path.max_flow(0, 2), 1);
        let parallel = EdgeList { n: 2, edges: vec![(0, 1), (0, 1), (1, 0)] };
        assert_eq!(parallel.max_flow(0, 1), 3);
        let apart = EdgeList { n: 4, edges: vec![(0, 1), (2, 3)] };
        assert_eq!(apart.max_flow(0, 3), 0);
    }

    #[test]
    fn polygon_membership() {
        let sq = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        assert!(point_in_polygon([1.0, 1.0], &sq, 0.0));
        assert!(point_in_polygon([2.0, 1.0], &sq, 1e-9));
        assert!(!point_in_polygon([2.5, 1.0], &sq, 1e-9));
        assert!(!point_in_polygon([1.0, -0.1], &sq, 1e-9));
    }
}
