//! Interaction graphs: complete, periodic square lattice and Barabási–Albert.
//!
//! The same graph is used for playing and for choosing whom to imitate.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Topology {
    Complete,
    Lattice,
    ScaleFree,
    /// Loaded from an edge list.
    Custom,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Complete => "complete",
            Topology::Lattice => "lattice",
            Topology::ScaleFree => "scale_free",
            Topology::Custom => "custom",
        })
    }
}

/// Immutable undirected simple graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    adjacency: Vec<Vec<usize>>,
    topology: Topology,
    seed: Option<u64>,
}

impl Network {
    /// Wraps raw adjacency lists after sorting them and checking symmetry,
    /// self-loops and duplicates. Connectivity is not required here.
    pub fn from_adjacency(mut adjacency: Vec<Vec<usize>>, topology: Topology) -> Result<Self> {
        for list in &mut adjacency {
            list.sort_unstable();
        }
        let net = Self {
            adjacency,
            topology,
            seed: None,
        };
        net.check_simple()?;
        Ok(net)
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    #[inline]
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    #[inline]
    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Seed used to grow a scale-free network.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Each undirected edge once as `(u, v)` with `u < v`, lexicographically sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (u, list) in self.adjacency.iter().enumerate() {
            out.extend(list.iter().filter(|&&v| v > u).map(|&v| (u, v)));
        }
        out
    }

    fn check_simple(&self) -> Result<()> {
        let n = self.len();
        for (u, list) in self.adjacency.iter().enumerate() {
            for (k, &v) in list.iter().enumerate() {
                if v >= n {
                    return Err(Error::InvalidNetwork(format!(
                        "node {u} links to missing node {v}"
                    )));
                }
                if v == u {
                    return Err(Error::InvalidNetwork(format!("self-loop at node {u}")));
                }
                if k > 0 && list[k - 1] == v {
                    return Err(Error::InvalidNetwork(format!("duplicate edge {u}-{v}")));
                }
                if self.adjacency[v].binary_search(&u).is_err() {
                    return Err(Error::InvalidNetwork(format!(
                        "edge {u}-{v} is not symmetric"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.len()
    }

    /// Symmetry, no self-loops, no duplicates, single component.
    pub fn validate(&self) -> Result<()> {
        self.check_simple()?;
        if !self.is_connected() {
            return Err(Error::InvalidNetwork("graph is not connected".into()));
        }
        Ok(())
    }

    /// Writes one `u v` line per edge, 0-based, lexicographically sorted.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Network::write_edge_list`]. Blank lines
    /// and lines starting with `#` are skipped. The node count is one more
    /// than the largest index seen.
    pub fn read_edge_list<R: BufRead>(input: R) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut n = 0;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |reason: &str| Error::EdgeList {
                line: i + 1,
                reason: reason.to_string(),
            };
            let mut fields = line.split_whitespace();
            let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(bad("expected exactly two node indices"));
            };
            let u: usize = a
                .parse()
                .map_err(|_| bad("node index is not a non-negative integer"))?;
            let v: usize = b
                .parse()
                .map_err(|_| bad("node index is not a non-negative integer"))?;
            if u == v {
                return Err(bad("self-loop"));
            }
            n = n.max(u + 1).max(v + 1);
            pairs.push((u, v));
        }
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in pairs {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Self::from_adjacency(adjacency, Topology::Custom)
    }
}

/// `L × L` torus with von Neumann neighbourhoods, row-major node order.
pub fn build_lattice(side: usize) -> Result<Network> {
    if side < 3 {
        return Err(invalid(format!("lattice side L must be >= 3 (got {side})")));
    }
    let idx = |r: usize, c: usize| r * side + c;
    let adjacency = (0..side * side)
        .map(|node| {
            let (r, c) = (node / side, node % side);
            let mut list = vec![
                idx((r + side - 1) % side, c),
                idx((r + 1) % side, c),
                idx(r, (c + side - 1) % side),
                idx(r, (c + 1) % side),
            ];
            list.sort_unstable();
            list
        })
        .collect();
    Ok(Network {
        adjacency,
        topology: Topology::Lattice,
        seed: None,
    })
}

pub fn build_complete(n: usize) -> Result<Network> {
    if n < 2 {
        return Err(invalid(format!("complete graph needs N >= 2 (got {n})")));
    }
    let adjacency = (0..n)
        .map(|u| (0..n).filter(|&v| v != u).collect())
        .collect();
    Ok(Network {
        adjacency,
        topology: Topology::Complete,
        seed: None,
    })
}

/// Parameters of a Barabási–Albert growth process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaSpec {
    pub nodes: usize,
    /// Links created by every arriving node.
    pub m: usize,
    /// Size of the initial fully connected core.
    pub m0: usize,
    pub seed: u64,
}

impl BaSpec {
    /// Uses the smallest core that lets the first arrival make `m` links.
    pub fn new(nodes: usize, m: usize, seed: u64) -> Self {
        Self {
            nodes,
            m,
            m0: m + 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(invalid("scale-free m must be >= 1"));
        }
        if self.m0 < self.m {
            return Err(invalid(format!(
                "scale-free m0 must be >= m (got m0={}, m={})",
                self.m0, self.m
            )));
        }
        if self.nodes <= self.m0 {
            return Err(invalid(format!(
                "scale-free N must exceed m0 (got N={}, m0={})",
                self.nodes, self.m0
            )));
        }
        Ok(())
    }
}

/// Grows a scale-free graph by preferential attachment.
///
/// Each arrival links to `m` distinct existing nodes drawn with probability
/// proportional to their current degree.
pub fn build_scale_free(spec: &BaSpec) -> Result<Network> {
    spec.validate()?;
    let BaSpec { nodes, m, m0, seed } = *spec;
    let mut rng = rng_from_seed(seed);
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    // Every node appears once per unit of degree.
    let mut pool: Vec<usize> = Vec::with_capacity(2 * (m0 * m0 + nodes * m));

    for u in 0..m0 {
        for v in (u + 1)..m0 {
            adjacency[u].push(v);
            adjacency[v].push(u);
            pool.push(u);
            pool.push(v);
        }
    }

    let mut targets = Vec::with_capacity(m);
    for new in m0..nodes {
        targets.clear();
        while targets.len() < m {
            let candidate = if pool.is_empty() {
                // Single-node core: nobody has degree yet.
                rng.random_range(0..new)
            } else {
                pool[rng.random_range(0..pool.len())]
            };
            if !targets.contains(&candidate) {
                targets.push(candidate);
            }
        }
        for &t in &targets {
            adjacency[new].push(t);
            adjacency[t].push(new);
            pool.push(new);
            pool.push(t);
        }
    }

    for list in &mut adjacency {
        list.sort_unstable();
    }
    Ok(Network {
        adjacency,
        topology: Topology::ScaleFree,
        seed: Some(seed),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeSummary {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    /// degree -> number of nodes
    pub histogram: BTreeMap<usize, usize>,
}

pub fn degree_summary(net: &Network) -> DegreeSummary {
    let mut histogram = BTreeMap::new();
    for u in 0..net.len() {
        *histogram.entry(net.degree(u)).or_insert(0) += 1;
    }
    DegreeSummary {
        min: histogram.keys().next().copied().unwrap_or(0),
        max: histogram.keys().next_back().copied().unwrap_or(0),
        mean: if net.is_empty() {
            0.0
        } else {
            2.0 * net.edge_count() as f64 / net.len() as f64
        },
        histogram,
    }
}
