//! Bellman–Ford shortest paths and negative-cycle detection on small
//! multigraphs with real weights (self-loops and parallel edges allowed).

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
    /// Secondary key for tie-breaking between equal-cost paths.
    pub tag: usize,
}

#[derive(Clone, Debug)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    /// Edge index used to reach each node.
    pub pred: Vec<Option<usize>>,
    /// Source index (into the `sources` slice) each node's value comes from.
    pub origin: Vec<Option<usize>>,
    pub legs: Vec<usize>,
    /// Nodes whose distance is unbounded below (reachable from a cycle whose
    /// relaxation still improves by more than the tolerance).
    pub unbounded: Vec<bool>,
}

impl ShortestPaths {
    pub fn has_unbounded(&self) -> bool {
        self.unbounded.iter().any(|&u| u)
    }

    /// Edge indices of the path to `target`, in travel order. `None` when
    /// the predecessor chain loops.
    pub fn path_to(&self, edges: &[Edge], target: usize) -> Option<Vec<usize>> {
        let mut path = Vec::new();
        let mut seen = vec![false; self.dist.len()];
        let mut node = target;
        while let Some(e) = self.pred[node] {
            if seen[node] {
                return None;
            }
            seen[node] = true;
            path.push(e);
            node = edges[e].from;
        }
        path.reverse();
        Some(path)
    }
}

fn relax_eps(d: f64) -> f64 {
    1e-12 * (1.0 + d.abs())
}

/// Multi-source Bellman–Ford. Each source `(node, value)` seeds the node
/// with `value`. Ties within roundoff prefer fewer legs and then the
/// smaller first-edge tag. After `n - 1` rounds, edges that still improve by
/// more than `tol` mark their heads (and everything reachable) unbounded.
pub fn bellman_ford(n: usize, edges: &[Edge], sources: &[(usize, f64)], tol: f64) -> ShortestPaths {
    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![None; n];
    let mut origin = vec![None; n];
    let mut legs = vec![0usize; n];
    let mut first = vec![usize::MAX; n];
    for (k, &(node, value)) in sources.iter().enumerate() {
        if value < dist[node] {
            dist[node] = value;
            origin[node] = Some(k);
        }
    }
    for _ in 0..n.max(1) {
        let mut changed = false;
        for (i, e) in edges.iter().enumerate() {
            let du = dist[e.from];
            if !du.is_finite() || e.from == e.to {
                continue;
            }
            let cand = du + e.weight;
            let dv = dist[e.to];
            let cand_first = if pred[e.from].is_none() { e.tag } else { first[e.from] };
            let better = if !dv.is_finite() || cand < dv - relax_eps(dv) {
                true
            } else if dv.is_finite() && (cand - dv).abs() <= relax_eps(dv) && pred[e.to] != Some(i) {
                (legs[e.from] + 1, cand_first) < (legs[e.to], first[e.to])
            } else {
                false
            };
            if better {
                dist[e.to] = cand;
                pred[e.to] = Some(i);
                origin[e.to] = origin[e.from];
                legs[e.to] = legs[e.from] + 1;
                first[e.to] = cand_first;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut unbounded = vec![false; n];
    let mut stack = Vec::new();
    for e in edges {
        let du = dist[e.from];
        let dv = dist[e.to];
        if du.is_finite() && dv.is_finite() && du + e.weight < dv - tol - relax_eps(dv) && !unbounded[e.to] {
            unbounded[e.to] = true;
            stack.push(e.to);
        }
    }
    while let Some(u) = stack.pop() {
        for e in edges.iter().filter(|e| e.from == u) {
            if !unbounded[e.to] {
                unbounded[e.to] = true;
                stack.push(e.to);
            }
        }
    }
    ShortestPaths { dist, pred, origin, legs, unbounded }
}

/// Finds a cycle `C` with `cost(C) + |C| · tol / n < 0` (so every cycle
/// cheaper than `-tol` is caught) and returns its edge indices in travel
/// order. Self-loops are checked directly.
pub fn find_negative_cycle(n: usize, edges: &[Edge], tol: f64) -> Option<Vec<usize>> {
    if let Some(i) = edges.iter().position(|e| e.from == e.to && e.weight < -tol) {
        return Some(vec![i]);
    }
    let shift = tol / n.max(1) as f64;
    let mut dist = vec![0.0f64; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut last = None;
    for _ in 0..n {
        last = None;
        for (i, e) in edges.iter().enumerate() {
            if e.from == e.to {
                continue;
            }
            let cand = dist[e.from] + e.weight + shift;
            if cand < dist[e.to] {
                dist[e.to] = cand;
                pred[e.to] = Some(i);
                last = Some(e.to);
            }
        }
        last?;
    }
    let mut node = last?;
    for _ in 0..n {
        node = edges[pred[node]?].from;
    }
    let start = node;
    let mut cycle = Vec::new();
    loop {
        let e = pred[node]?;
        cycle.push(e);
        node = edges[e].from;
        if node == start || cycle.len() > n {
            break;
        }
    }
    cycle.reverse();
    Some(cycle)
}

pub fn cycle_cost(edges: &[Edge], cycle: &[usize]) -> f64 {
    cycle.iter().map(|&i| edges[i].weight).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(from: usize, to: usize, weight: f64) -> Edge {
        Edge { from, to, weight, tag: 0 }
    }

    #[test]
    fn diamond_shortest_paths() {
        let edges = [e(0, 1, 2.0), e(0, 3, 4.0), e(1, 2, 1.0), e(1, 5, 7.0), e(2, 4, 5.0), e(4, 5, 1.0), e(3, 4, 1.0)];
        let sp = bellman_ford(6, &edges, &[(0, 0.0)], 0.0);
        assert_eq!(sp.dist, vec![0.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(sp.path_to(&edges, 5).unwrap(), vec![1, 6, 5]);
        assert!(!sp.has_unbounded());
    }

    #[test]
    fn negative_edges_without_cycles() {
        let edges = [e(0, 1, 5.0), e(1, 2, -3.0), e(0, 2, 4.0), e(2, 1, 4.0)];
        let sp = bellman_ford(3, &edges, &[(0, 0.0)], 0.0);
        assert_eq!(sp.dist, vec![0.0, 5.0, 2.0]);
        assert!(find_negative_cycle(3, &edges, 0.0).is_none());
    }

    #[test]
    fn detects_two_cycle_and_self_loop() {
        let edges = [e(0, 1, 1.0), e(1, 2, 1.0), e(2, 1, -1.5)];
        let cyc = find_negative_cycle(3, &edges, 1e-9).unwrap();
        let mut sorted = cyc.clone();
        sorted.sort();
        assert_eq!(sorted, vec![1, 2]);
        assert!((cycle_cost(&edges, &cyc) + 0.5).abs() < 1e-15);
        let sp = bellman_ford(3, &edges, &[(0, 0.0)], 1e-9);
        assert!(sp.unbounded[1] && sp.unbounded[2] && !sp.unbounded[0]);

        let loops = [e(0, 1, 1.0), e(1, 1, -1.0)];
        assert_eq!(find_negative_cycle(2, &loops, 1e-9), Some(vec![1]));
    }

    #[test]
    fn tolerance_ignores_tiny_cycles() {
        let edges = [e(0, 1, 1.0), e(1, 0, -1.0 - 1e-12)];
        assert!(find_negative_cycle(2, &edges, 1e-9).is_none());
        assert!(find_negative_cycle(2, &edges, 0.0).is_some());
    }

    #[test]
    fn multi_source_tracks_origin() {
        let edges = [e(0, 1, 1.0), e(2, 1, 0.5), e(1, 0, 1.0), e(1, 2, 1.0)];
        let sp = bellman_ford(3, &edges, &[(0, 0.0), (2, 0.0)], 0.0);
        assert_eq!(sp.dist[1], 0.5);
        assert_eq!(sp.origin[1], Some(1));
    }

    #[test]
    fn ties_prefer_fewer_legs() {
        // 0 -> 1 -> 2 costs 1 + 1, the direct edge costs 2 as well.
        let edges = [e(0, 1, 1.0), e(1, 2, 1.0), e(0, 2, 2.0)];
        let sp = bellman_ford(3, &edges, &[(0, 0.0)], 0.0);
        assert_eq!(sp.path_to(&edges, 2).unwrap(), vec![2]);
    }
}
