//! Directed-graph utilities shared by the dependency-graph analyses:
//! strongly connected components, elementary-cycle enumeration with a
//! length bound, and reachability.
//!
//! Nodes are dense indices `0..n`; callers keep their own node tables.
//! All outputs are deterministic: adjacency lists are kept sorted, SCCs
//! and cycles come out in a fixed order for a given graph.

use std::collections::BTreeSet;

/// A directed graph over nodes `0..n` with sorted, de-duplicated
/// adjacency lists. Parallel edges collapse; callers that need edge
/// payloads (labels, evidencing statements) keep them in a side map
/// keyed by `(from, to)`.
#[derive(Debug, Clone, Default)]
pub(crate) struct DiGraph {
    adj: Vec<Vec<usize>>,
}

impl DiGraph {
    /// An edgeless graph with `n` nodes.
    pub(crate) fn new(n: usize) -> Self {
        DiGraph { adj: vec![Vec::new(); n] }
    }

    /// Number of nodes.
    pub(crate) fn len(&self) -> usize {
        self.adj.len()
    }

    /// Inserts the edge `from -> to`, ignoring duplicates. Both endpoints
    /// must be `< len()`.
    pub(crate) fn add_edge(&mut self, from: usize, to: usize) {
        let row = &mut self.adj[from];
        if let Err(pos) = row.binary_search(&to) {
            row.insert(pos, to);
        }
    }

    /// Successors of `v`, in increasing order.
    pub(crate) fn successors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// The graph with every edge reversed.
    pub(crate) fn reversed(&self) -> DiGraph {
        let mut rev = DiGraph::new(self.len());
        for (u, row) in self.adj.iter().enumerate() {
            for &v in row {
                rev.add_edge(v, u);
            }
        }
        rev
    }

    /// Nodes reachable from any of `starts` by following edges forward,
    /// including the start nodes themselves.
    pub(crate) fn reachable(&self, starts: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut work: Vec<usize> = Vec::new();
        for &s in starts {
            if !seen[s] {
                seen[s] = true;
                work.push(s);
            }
        }
        while let Some(v) = work.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    work.push(w);
                }
            }
        }
        seen
    }

    /// Strongly connected components (iterative Tarjan). Components are
    /// returned with members sorted, ordered by their smallest member.
    pub(crate) fn sccs(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        const UNSET: usize = usize::MAX;
        let mut index = vec![UNSET; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut next_index = 0usize;
        let mut comps: Vec<Vec<usize>> = Vec::new();

        // Explicit DFS frames: (node, next successor position).
        let mut frames: Vec<(usize, usize)> = Vec::new();
        for root in 0..n {
            if index[root] != UNSET {
                continue;
            }
            frames.push((root, 0));
            while let Some(&mut (v, ref mut pos)) = frames.last_mut() {
                if *pos == 0 {
                    index[v] = next_index;
                    low[v] = next_index;
                    next_index += 1;
                    stack.push(v);
                    on_stack[v] = true;
                }
                if let Some(&w) = self.adj[v].get(*pos) {
                    *pos += 1;
                    if index[w] == UNSET {
                        frames.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(index[w]);
                    }
                } else {
                    frames.pop();
                    if let Some(&(parent, _)) = frames.last() {
                        low[parent] = low[parent].min(low[v]);
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack underflow");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        comps.push(comp);
                    }
                }
            }
        }
        comps.sort_by_key(|c| c[0]);
        comps
    }

    /// All elementary cycles with at most `max_len` nodes, as node
    /// sequences rooted at their smallest node (a self-loop is `[v]`).
    /// Cycles strictly longer than `max_len` are skipped entirely, not
    /// truncated. Output is sorted lexicographically.
    ///
    /// This is Johnson's algorithm with a depth bound. When the search is
    /// cut off at the bound, the cut-off branch is treated as if it had
    /// found a cycle, so ancestors are unblocked conservatively; that
    /// keeps the enumeration complete for cycles within the bound at the
    /// cost of some re-exploration.
    pub(crate) fn elementary_cycles(&self, max_len: usize) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut out: Vec<Vec<usize>> = Vec::new();
        if n == 0 || max_len == 0 {
            return out;
        }
        for s in 0..n {
            // Restrict to the SCC of s within the subgraph of nodes >= s;
            // every elementary cycle rooted at s lies inside it.
            let comp = match self.scc_of_at_least(s) {
                Some(c) => c,
                None => continue,
            };
            let mut search = CycleSearch {
                graph: self,
                comp: &comp,
                root: s,
                max_len,
                blocked: vec![false; n],
                block_list: vec![BTreeSet::new(); n],
                path: Vec::new(),
                out: &mut out,
            };
            search.circuit(s);
        }
        out.sort();
        out
    }

    /// Membership mask of the SCC containing `s` in the subgraph induced
    /// by nodes `>= s`, or None when that component is trivial (just `s`
    /// with no self-loop), which cannot carry a cycle rooted at `s`.
    fn scc_of_at_least(&self, s: usize) -> Option<Vec<bool>> {
        let n = self.len();
        // Forward reachability from s over nodes >= s.
        let mut fwd = vec![false; n];
        fwd[s] = true;
        let mut work = vec![s];
        while let Some(v) = work.pop() {
            for &w in &self.adj[v] {
                if w >= s && !fwd[w] {
                    fwd[w] = true;
                    work.push(w);
                }
            }
        }
        // Backward reachability, over the same subgraph.
        let mut bwd = vec![false; n];
        bwd[s] = true;
        let mut work = vec![s];
        while let Some(v) = work.pop() {
            for u in s..n {
                if !bwd[u] && self.adj[u].binary_search(&v).is_ok() {
                    bwd[u] = true;
                    work.push(u);
                }
            }
        }
        let comp: Vec<bool> = (0..n).map(|v| fwd[v] && bwd[v]).collect();
        let nontrivial = comp.iter().enumerate().any(|(v, &m)| m && v != s)
            || self.adj[s].binary_search(&s).is_ok();
        if nontrivial { Some(comp) } else { None }
    }
}

/// State for one root of the bounded Johnson's search.
struct CycleSearch<'a> {
    graph: &'a DiGraph,
    comp: &'a [bool],
    root: usize,
    max_len: usize,
    blocked: Vec<bool>,
    block_list: Vec<BTreeSet<usize>>,
    path: Vec<usize>,
    out: &'a mut Vec<Vec<usize>>,
}

impl CycleSearch<'_> {
    fn circuit(&mut self, v: usize) -> bool {
        let mut found = false;
        self.path.push(v);
        self.blocked[v] = true;
        for i in 0..self.graph.adj[v].len() {
            let w = self.graph.adj[v][i];
            if !self.comp[w] {
                continue;
            }
            if w == self.root {
                self.out.push(self.path.clone());
                found = true;
            } else if self.path.len() >= self.max_len {
                // Bound reached: cannot extend, and longer cycles through w
                // may exist. Pretend one was found so unblocking stays
                // conservative and no within-bound cycle is lost later.
                found = true;
            } else if !self.blocked[w] && self.circuit(w) {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for i in 0..self.graph.adj[v].len() {
                let w = self.graph.adj[v][i];
                if self.comp[w] {
                    self.block_list[w].insert(v);
                }
            }
        }
        self.path.pop();
        found
    }

    fn unblock(&mut self, v: usize) {
        self.blocked[v] = false;
        let waiters: Vec<usize> = self.block_list[v].iter().copied().collect();
        self.block_list[v].clear();
        for w in waiters {
            if self.blocked[w] {
                self.unblock(w);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> DiGraph {
        let mut g = DiGraph::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Exhaustive elementary-cycle enumeration by plain DFS: for each
    /// root s, walk simple paths over nodes >= s and record returns to s.
    /// Exponential, usable only on tiny graphs; the independent oracle
    /// for `elementary_cycles`.
    fn cycles_by_brute_force(g: &DiGraph, max_len: usize) -> Vec<Vec<usize>> {
        fn dfs(
            g: &DiGraph,
            s: usize,
            path: &mut Vec<usize>,
            on_path: &mut Vec<bool>,
            max_len: usize,
            out: &mut Vec<Vec<usize>>,
        ) {
            let v = *path.last().unwrap();
            for &w in g.successors(v) {
                if w == s {
                    out.push(path.clone());
                } else if w > s && !on_path[w] && path.len() < max_len {
                    path.push(w);
                    on_path[w] = true;
                    dfs(g, s, path, on_path, max_len, out);
                    on_path[w] = false;
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        for s in 0..g.len() {
            let mut on_path = vec![false; g.len()];
            on_path[s] = true;
            dfs(g, s, &mut vec![s], &mut on_path, max_len, &mut out);
        }
        out.sort();
        out
    }

    #[test]
    fn self_loop_is_a_one_cycle() {
        let g = graph(3, &[(1, 1), (0, 2)]);
        assert_eq!(g.elementary_cycles(32), vec![vec![1]]);
    }

    #[test]
    fn two_cycle_and_triangle() {
        // 0 <-> 1 plus triangle 0 -> 1 -> 2 -> 0.
        let g = graph(3, &[(0, 1), (1, 0), (1, 2), (2, 0)]);
        assert_eq!(g.elementary_cycles(32), vec![vec![0, 1], vec![0, 1, 2]]);
    }

    #[test]
    fn bound_skips_long_cycles_entirely() {
        // A 4-cycle and a 2-cycle sharing node 0.
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 3), (3, 0)]);
        let all = g.elementary_cycles(32);
        assert!(all.contains(&vec![0, 1, 2, 3]));
        assert!(all.contains(&vec![0, 3]));
        let bounded = g.elementary_cycles(2);
        assert_eq!(bounded, vec![vec![0, 3]]);
    }

    #[test]
    fn sccs_partition_and_order() {
        // {0,1,2} cyclic, {3} alone, {4,5} cyclic.
        let g = graph(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 4)]);
        assert_eq!(g.sccs(), vec![vec![0, 1, 2], vec![3], vec![4, 5]]);
    }

    #[test]
    fn reachability_forward_and_reversed() {
        let g = graph(4, &[(0, 1), (1, 2)]);
        assert_eq!(g.reachable(&[0]), vec![true, true, true, false]);
        assert_eq!(g.reversed().reachable(&[2]), vec![true, true, true, false]);
    }

    #[test]
    fn dense_graph_matches_oracle() {
        // Complete digraph on 5 nodes: sum over k of C(5,k)*(k-1)! cycles.
        let mut edges = Vec::new();
        for u in 0..5 {
            for v in 0..5 {
                if u != v {
                    edges.push((u, v));
                }
            }
        }
        let g = graph(5, &edges);
        let got = g.elementary_cycles(32);
        assert_eq!(got.len(), 10 + 2 * 10 + 6 * 5 + 24);
        assert_eq!(got, cycles_by_brute_force(&g, 32));
    }

    proptest! {
        #[test]
        fn matches_brute_force_on_random_graphs(
            n in 1usize..8,
            edges in prop::collection::btree_set((0usize..8, 0usize..8), 0..24),
            max_len in 1usize..9,
        ) {
            let edges: Vec<(usize, usize)> = edges
                .into_iter()
                .filter(|&(u, v)| u < n && v < n)
                .collect();
            let g = graph(n, &edges);
            prop_assert_eq!(g.elementary_cycles(max_len), cycles_by_brute_force(&g, max_len));
        }

        #[test]
        fn sccs_are_a_partition_with_mutual_reachability(
            n in 1usize..8,
            edges in prop::collection::btree_set((0usize..8, 0usize..8), 0..24),
        ) {
            let edges: Vec<(usize, usize)> = edges
                .into_iter()
                .filter(|&(u, v)| u < n && v < n)
                .collect();
            let g = graph(n, &edges);
            let comps = g.sccs();
            let mut seen = vec![false; n];
            for comp in &comps {
                for &v in comp {
                    prop_assert!(!seen[v]);
                    seen[v] = true;
                }
                // Mutual reachability inside a component.
                for &v in comp {
                    let r = g.reachable(&[v]);
                    for &w in comp {
                        prop_assert!(r[w], "{v} cannot reach {w} inside {comp:?}");
                    }
                }
            }
            prop_assert!(seen.into_iter().all(|b| b));
        }
    }
}
