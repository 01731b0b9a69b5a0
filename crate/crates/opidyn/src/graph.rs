//! Signed undirected graphs and random generation.
//!
//! Entries of the adjacency matrix are in `{-1, 0, +1}`. Every agent has a
//! positive self loop, and the positive subgraph of a generated graph is
//! connected. Negative edges are only placed between a designated set of
//! "repelling" agents.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph generation failed after {0} attempts")]
    GenerationFailure(usize),
    #[error("agent index {index} out of range for n={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid graph text: {0}")]
    Parse(String),
}

/// Symmetric signed adjacency over `{-1, 0, +1}` with `+1` self loops.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGraph {
    n: usize,
    adj: Vec<i8>,
}

impl SignedGraph {
    /// Builds a graph from a row-major adjacency. Panics if the matrix is not
    /// symmetric, has an entry outside `{-1,0,1}`, or lacks a positive diagonal.
    pub fn from_adjacency(n: usize, adj: Vec<i8>) -> Self {
        assert_eq!(adj.len(), n * n, "adjacency must be n*n");
        for i in 0..n {
            assert_eq!(adj[i * n + i], 1, "self loop must be +1");
            for j in 0..n {
                let a = adj[i * n + j];
                assert!((-1..=1).contains(&a), "entries must be in {{-1,0,1}}");
                assert_eq!(a, adj[j * n + i], "adjacency must be symmetric");
            }
        }
        Self { n, adj }
    }

    /// Identity-only graph: every agent isolated with its self loop.
    pub fn self_loops(n: usize) -> Self {
        let mut adj = vec![0i8; n * n];
        for i in 0..n {
            adj[i * n + i] = 1;
        }
        Self { n, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        self.adj[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.adj[i * self.n..(i + 1) * self.n]
    }

    /// Positive neighbors of `i`, including `i` itself.
    pub fn pos_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.entry(i, j) == 1).collect()
    }

    pub fn neg_neighbors(&self, i: usize) -> Vec<usize> {
        (0..self.n).filter(|&j| self.entry(i, j) == -1).collect()
    }

    /// `(d_plus, d_minus)` for agent `i`; the self loop counts in `d_plus`.
    pub fn degrees(&self, i: usize) -> Result<(usize, usize), GraphError> {
        if i >= self.n {
            return Err(GraphError::IndexOutOfRange { index: i, n: self.n });
        }
        let mut plus = 0;
        let mut minus = 0;
        for j in 0..self.n {
            match self.entry(i, j) {
                1 => plus += 1,
                -1 => minus += 1,
                _ => {}
            }
        }
        Ok((plus, minus))
    }

    /// Connectivity of the unsigned support graph (nonzero entries).
    pub fn is_connected(&self) -> bool {
        self.is_connected_filtered(|a| a != 0)
    }

    /// Connectivity of the positive subgraph.
    pub fn is_positively_connected(&self) -> bool {
        self.is_connected_filtered(|a| a == 1)
    }

    fn is_connected_filtered(&self, keep: impl Fn(i8) -> bool) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::new();
        seen[0] = true;
        queue.push_back(0);
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for j in 0..self.n {
                if j != i && !seen[j] && keep(self.entry(i, j)) {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.n
    }

    /// Plain-text edge list: header `n=<count>`, then `i j sign` per edge
    /// (1-based, i <= j, self loops included).
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n={}", self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let a = self.entry(i, j);
                if a != 0 {
                    let _ = writeln!(out, "{} {} {}", i + 1, j + 1, a);
                }
            }
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| GraphError::Parse("empty input".into()))?;
        let n: usize = header
            .trim()
            .strip_prefix("n=")
            .ok_or_else(|| GraphError::Parse("missing n= header".into()))?
            .parse()
            .map_err(|e| GraphError::Parse(format!("bad agent count: {e}")))?;
        let mut adj = vec![0i8; n * n];
        for line in lines {
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<i64, GraphError> {
                tok.ok_or_else(|| GraphError::Parse(format!("short edge line: {line}")))?
                    .parse()
                    .map_err(|e| GraphError::Parse(format!("bad edge line {line}: {e}")))
            };
            let i = parse(it.next())? as usize;
            let j = parse(it.next())? as usize;
            let s = parse(it.next())?;
            if i < 1 || i > n || j < 1 || j > n || !(-1..=1).contains(&s) {
                return Err(GraphError::Parse(format!("edge out of range: {line}")));
            }
            adj[(i - 1) * n + (j - 1)] = s as i8;
            adj[(j - 1) * n + (i - 1)] = s as i8;
        }
        for i in 0..n {
            if adj[i * n + i] != 1 {
                return Err(GraphError::Parse(format!("agent {} lacks a self loop", i + 1)));
            }
        }
        Ok(Self::from_adjacency(n, adj))
    }

    /// Dense CSV of `{-1,0,1}`, one row per agent.
    pub fn to_dense_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n {
            let row: Vec<String> = self.row(i).iter().map(|a| a.to_string()).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Configuration for random signed-graph generation.
#[derive(Debug, Clone)]
pub struct GraphGenConfig {
    pub n: usize,
    /// Link probability for both positive and negative edge sampling.
    pub p_link: f64,
    /// Agents permitted (and required) to have negative edges.
    pub repell_agents: Vec<usize>,
    pub max_retries: usize,
}

impl GraphGenConfig {
    /// The experiment default: link probability `1.1 ln(n) / n`.
    pub fn er_default(n: usize, repell_agents: Vec<usize>) -> Self {
        Self {
            n,
            p_link: 1.1 * (n as f64).ln() / n as f64,
            repell_agents,
            max_retries: 10_000,
        }
    }
}

/// Samples a connected signed graph: a positive Erdos-Renyi layer (checked for
/// connectivity), then negative edges between repelling agents with the same
/// link probability, resampled until every repelling agent has at least one
/// negative edge.
pub fn generate_mixed_graph<R: Rng>(cfg: &GraphGenConfig, rng: &mut R) -> Result<SignedGraph, GraphError> {
    assert!((0.0..=1.0).contains(&cfg.p_link), "p_link must lie in [0,1]");
    assert!(cfg.repell_agents.iter().all(|&i| i < cfg.n), "repell agent out of range");
    let n = cfg.n;
    for _ in 0..cfg.max_retries {
        let mut adj = vec![0i8; n * n];
        for i in 0..n {
            adj[i * n + i] = 1;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen::<f64>() < cfg.p_link {
                    adj[i * n + j] = 1;
                    adj[j * n + i] = 1;
                }
            }
        }
        // Negative edges are sampled for every pair inside the repelling set
        // and overwrite any positive edge there.
        for (a, &i) in cfg.repell_agents.iter().enumerate() {
            for &j in &cfg.repell_agents[a + 1..] {
                if rng.gen::<f64>() < cfg.p_link {
                    adj[i * n + j] = -1;
                    adj[j * n + i] = -1;
                }
            }
        }
        let g = SignedGraph { n, adj };
        let neg_ok = cfg
            .repell_agents
            .iter()
            .all(|&i| g.degrees(i).map(|(_, m)| m >= 1).unwrap_or(false));
        if neg_ok && g.is_positively_connected() {
            return Ok(g);
        }
    }
    Err(GraphError::GenerationFailure(cfg.max_retries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn p_one_no_repell_gives_complete_positive() {
        let cfg = GraphGenConfig { n: 2, p_link: 1.0, repell_agents: vec![], max_retries: 10 };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = generate_mixed_graph(&cfg, &mut rng).unwrap();
        assert_eq!(g.row(0), &[1, 1]);
        assert_eq!(g.row(1), &[1, 1]);
    }

    #[test]
    fn repell_agents_get_negative_edges() {
        let n = 20;
        let cfg = GraphGenConfig::er_default(n, (0..5).collect());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = generate_mixed_graph(&cfg, &mut rng).unwrap();
        assert!(g.is_connected());
        assert!(g.is_positively_connected());
        for i in 0..5 {
            let (_, dm) = g.degrees(i).unwrap();
            assert!(dm >= 1, "agent {i} lacks a negative edge");
        }
        for i in 5..n {
            let (_, dm) = g.degrees(i).unwrap();
            assert_eq!(dm, 0);
        }
    }

    #[test]
    fn generation_is_deterministic_in_seed() {
        let cfg = GraphGenConfig::er_default(15, vec![0, 1, 2]);
        let a = generate_mixed_graph(&cfg, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let b = generate_mixed_graph(&cfg, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn connectivity_cases() {
        assert!(SignedGraph::self_loops(1).is_connected());
        // Two disjoint dyads.
        let mut adj = vec![0i8; 16];
        for i in 0..4 {
            adj[i * 4 + i] = 1;
        }
        adj[1] = 1;
        adj[4] = 1;
        adj[11] = 1;
        adj[14] = 1;
        assert!(!SignedGraph::from_adjacency(4, adj).is_connected());
        // Path on 5 nodes.
        let n = 5;
        let mut adj = vec![0i8; n * n];
        for i in 0..n {
            adj[i * n + i] = 1;
        }
        for i in 0..n - 1 {
            adj[i * n + i + 1] = 1;
            adj[(i + 1) * n + i] = 1;
        }
        assert!(SignedGraph::from_adjacency(n, adj).is_connected());
    }

    #[test]
    fn degrees_count_signs() {
        assert_eq!(SignedGraph::self_loops(1).degrees(0).unwrap(), (1, 0));
        let g = SignedGraph::from_adjacency(3, vec![1, 1, -1, 1, 1, 0, -1, 0, 1]);
        assert_eq!(g.degrees(0).unwrap(), (2, 1));
        let complete = SignedGraph::from_adjacency(3, vec![1; 9]);
        for i in 0..3 {
            assert_eq!(complete.degrees(i).unwrap(), (3, 0));
        }
        assert!(g.degrees(5).is_err());
    }

    #[test]
    fn degrees_sum_to_row_support() {
        let cfg = GraphGenConfig::er_default(12, vec![0, 1, 2]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = generate_mixed_graph(&cfg, &mut rng).unwrap();
        for i in 0..g.n() {
            let (dp, dm) = g.degrees(i).unwrap();
            let nnz = g.row(i).iter().filter(|&&a| a != 0).count();
            assert_eq!(dp + dm, nnz);
        }
    }

    #[test]
    fn edge_list_round_trip() {
        let cfg = GraphGenConfig::er_default(10, vec![0, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = generate_mixed_graph(&cfg, &mut rng).unwrap();
        let text = g.to_edge_list();
        let back = SignedGraph::from_edge_list(&text).unwrap();
        assert_eq!(g, back);
    }
}
