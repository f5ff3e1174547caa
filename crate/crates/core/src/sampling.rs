//! Seeded sampling of undirected graphs from a step-graphon.
//!
//! Node `v` gets a coordinate `y_v` uniform on `[0, 1)`; each unordered pair
//! `{u, v}` is then an edge independently with probability `W(y_u, y_v)`.
//! All randomness comes from a ChaCha8 stream keyed by a single `u64` seed,
//! so a sample is a pure function of `(graphon, n, seed)`.
//!
//! Uniforms are 53-bit integers `k`, read as `k / 2^53`. Comparisons against
//! rational partition points and block values are done on the integer side,
//! which makes block assignment exact and edge probabilities exact up to
//! `2^-53`.

use std::io::{BufRead, Write};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graphon::StepGraphon;
use crate::rational::Rational;

const UNIFORM_BITS: u32 = 53;
const UNIFORM_ONE: u64 = 1 << UNIFORM_BITS;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Expands a 64-bit seed into a ChaCha key.
fn chacha_key(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// Seed of trial `trial` at node count `n` under `master`.
///
/// Depends only on its arguments, so trials can be run in any order.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    let mut state = master;
    let a = splitmix64(&mut state);
    let mut state = a ^ (n as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let b = splitmix64(&mut state);
    let mut state = b ^ (trial as u64).wrapping_mul(0xA076_1D64_78BD_642F);
    splitmix64(&mut state)
}

struct UniformStream(ChaCha8Rng);

impl UniformStream {
    fn new(seed: u64) -> Self {
        UniformStream(ChaCha8Rng::from_seed(chacha_key(seed)))
    }

    /// Next 53-bit uniform integer in `[0, 2^53)`.
    #[inline]
    fn next(&mut self) -> u64 {
        self.0.next_u64() >> (64 - UNIFORM_BITS)
    }
}

/// A graph `G_n ~ W` together with the block of each node.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGraph {
    blocks: usize,
    /// Absent when the graph was read from a dump.
    coordinates: Option<Vec<f64>>,
    /// 0-based block index of each node.
    group_of: Vec<usize>,
    /// Sorted `(u, v)` pairs with `u < v`.
    edges: Vec<(usize, usize)>,
    /// Sorted neighbor lists.
    adjacency: Vec<Vec<usize>>,
}

impl SampledGraph {
    /// Builds a graph from explicit data. Duplicate edges are merged;
    /// self-loops and out-of-range endpoints or labels are rejected.
    pub fn from_edges(blocks: usize, group_of: Vec<usize>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = group_of.len();
        if let Some(&g) = group_of.iter().find(|&&g| g >= blocks) {
            return Err(Error::Parse(format!("group label {} exceeds q = {blocks}", g + 1)));
        }
        let mut pairs = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Parse(format!("edge ({u}, {v}) references a node >= n = {n}")));
            }
            if u == v {
                return Err(Error::Parse(format!("self-loop at node {u}")));
            }
            pairs.push((u.min(v), u.max(v)));
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self::assemble(blocks, None, group_of, pairs))
    }

    /// Single-block graph on `n` nodes; convenient for plain graphs.
    pub fn plain(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::from_edges(1, vec![0; n], edges)
    }

    fn assemble(
        blocks: usize,
        coordinates: Option<Vec<f64>>,
        group_of: Vec<usize>,
        edges: Vec<(usize, usize)>,
    ) -> Self {
        let n = group_of.len();
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut adjacency: Vec<Vec<usize>> = degree.iter().map(|&d| Vec::with_capacity(d)).collect();
        // Lexicographic edge order leaves every list sorted.
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        SampledGraph {
            blocks,
            coordinates,
            group_of,
            edges,
            adjacency,
        }
    }

    pub fn node_count(&self) -> usize {
        self.group_of.len()
    }

    pub fn blocks(&self) -> usize {
        self.blocks
    }

    pub fn coordinates(&self) -> Option<&[f64]> {
        self.coordinates.as_deref()
    }

    pub fn group_of(&self) -> &[usize] {
        &self.group_of
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub(crate) fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edge count over the number of unordered pairs.
    pub fn density(&self) -> f64 {
        let n = self.node_count() as f64;
        if n < 2.0 {
            return 0.0;
        }
        self.edges.len() as f64 / (n * (n - 1.0) / 2.0)
    }

    /// Nodes of each block, ascending.
    pub fn block_members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.blocks];
        for (v, &g) in self.group_of.iter().enumerate() {
            out[g].push(v);
        }
        out
    }

    /// Two-coloring check over the undirected graph.
    pub fn is_bipartite(&self) -> bool {
        let n = self.node_count();
        let mut color = vec![u8::MAX; n];
        let mut stack = Vec::new();
        for s in 0..n {
            if color[s] != u8::MAX {
                continue;
            }
            color[s] = 0;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &w in &self.adjacency[v] {
                    if color[w] == u8::MAX {
                        color[w] = 1 - color[v];
                        stack.push(w);
                    } else if color[w] == color[v] {
                        return false;
                    }
                }
            }
        }
        true
    }
}

struct BlockSampler {
    /// `ceil(σ_i · 2^53)` for `i = 1..=q`.
    cut_thresholds: Vec<u64>,
}

impl BlockSampler {
    fn new(g: &StepGraphon) -> Self {
        BlockSampler {
            cut_thresholds: g.partition()[1..].iter().map(|s| s.ceil_scaled(UNIFORM_BITS)).collect(),
        }
    }

    /// Block `i` with `σ_i ≤ k/2^53 < σ_{i+1}`.
    fn block(&self, k: u64) -> usize {
        self.cut_thresholds.partition_point(|&t| t <= k)
    }
}

fn draw_groups(g: &StepGraphon, n: usize, stream: &mut UniformStream) -> (Vec<f64>, Vec<usize>) {
    let blocks = BlockSampler::new(g);
    let scale = 1.0 / UNIFORM_ONE as f64;
    let mut coordinates = Vec::with_capacity(n);
    let mut group_of = Vec::with_capacity(n);
    for _ in 0..n {
        let k = stream.next();
        coordinates.push(k as f64 * scale);
        group_of.push(blocks.block(k));
    }
    (coordinates, group_of)
}

/// Draws `G_n ~ W`. Fully determined by `(g, n, seed)`.
///
/// Draw order: `n` coordinates, then one uniform per pair `{i, j}` (`i < j`,
/// lexicographic) whose block value lies strictly between 0 and 1. Pairs in
/// zero blocks never get an edge; pairs in one-valued blocks always do.
pub fn sample_graph(g: &StepGraphon, n: usize, seed: u64) -> SampledGraph {
    let mut stream = UniformStream::new(seed);
    let (coordinates, group_of) = draw_groups(g, n, &mut stream);

    let q = g.blocks();
    let thresholds: Vec<Vec<u64>> = g
        .values()
        .iter()
        .map(|row| row.iter().map(|p| p.ceil_scaled(UNIFORM_BITS)).collect())
        .collect();

    let mut edges = Vec::new();
    for i in 0..n {
        let row = &thresholds[group_of[i]];
        for j in (i + 1)..n {
            let t = row[group_of[j]];
            let hit = match t {
                0 => false,
                UNIFORM_ONE => true,
                _ => stream.next() < t,
            };
            if hit {
                edges.push((i, j));
            }
        }
    }
    SampledGraph::assemble(q, Some(coordinates), group_of, edges)
}

/// Block labels of the first stage of [`sample_graph`] only; identical to
/// `sample_graph(g, n, seed).group_of()` at a fraction of the cost.
pub fn sample_groups(g: &StepGraphon, n: usize, seed: u64) -> Vec<usize> {
    let mut stream = UniformStream::new(seed);
    draw_groups(g, n, &mut stream).1
}

/// Block sizes `n_1..n_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupCounts(Vec<usize>);

impl GroupCounts {
    pub fn from_labels(blocks: usize, labels: &[usize]) -> Self {
        let mut counts = vec![0; blocks];
        for &l in labels {
            counts[l] += 1;
        }
        GroupCounts(counts)
    }

    pub fn new(counts: Vec<usize>) -> Self {
        GroupCounts(counts)
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }
}

pub fn group_counts(sg: &SampledGraph) -> GroupCounts {
    GroupCounts::from_labels(sg.blocks(), sg.group_of())
}

/// `x(G_n) = (n_1, …, n_q) / n`, exactly. Panics on an empty graph.
pub fn empirical_concentration(sg: &SampledGraph) -> Vec<Rational> {
    concentration_of_counts(&group_counts(sg))
}

pub fn concentration_of_counts(counts: &GroupCounts) -> Vec<Rational> {
    let n = counts.total();
    assert!(n > 0, "empirical concentration of an empty graph");
    counts
        .counts()
        .iter()
        .map(|&c| Rational::new(c as i64, n as i64))
        .collect()
}

/// Writes the text dump: `n q`, then the 1-based block labels on one line,
/// then one `u v` line per edge (0-based nodes, `u < v`, sorted).
pub fn write_dump<W: Write>(sg: &SampledGraph, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", sg.node_count(), sg.blocks())?;
    let labels: Vec<String> = sg.group_of().iter().map(|g| (g + 1).to_string()).collect();
    writeln!(out, "{}", labels.join(" "))?;
    for &(u, v) in sg.edges() {
        writeln!(out, "{u} {v}")?;
    }
    Ok(())
}

pub fn dump_to_string(sg: &SampledGraph) -> String {
    let mut buf = Vec::new();
    write_dump(sg, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("dump is ASCII")
}

pub fn read_dump<R: BufRead>(input: R) -> Result<SampledGraph> {
    let mut lines = input.lines();
    let mut next_line = |what: &str| -> Result<String> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| Error::Parse(format!("missing {what} line")))
    };
    let parse_usize = |tok: &str, what: &str| -> Result<usize> {
        tok.parse()
            .map_err(|_| Error::Parse(format!("bad {what} {tok:?}")))
    };

    let header = next_line("header")?;
    let mut head = header.split_whitespace();
    let n = parse_usize(head.next().unwrap_or(""), "node count")?;
    let blocks = parse_usize(head.next().unwrap_or(""), "block count")?;
    if blocks == 0 || head.next().is_some() {
        return Err(Error::Parse(format!("bad header {header:?}")));
    }

    let label_line = if n > 0 { next_line("label")? } else { String::new() };
    let group_of = label_line
        .split_whitespace()
        .map(|t| match parse_usize(t, "group label")? {
            0 => Err(Error::Parse("group labels are 1-based".into())),
            l => Ok(l - 1),
        })
        .collect::<Result<Vec<_>>>()?;
    if group_of.len() != n {
        return Err(Error::Parse(format!("expected {n} group labels, got {}", group_of.len())));
    }

    let mut edges = Vec::new();
    for line in lines {
        let line = line?;
        let mut toks = line.split_whitespace();
        let (Some(u), Some(v), None) = (toks.next(), toks.next(), toks.next()) else {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::Parse(format!("bad edge line {line:?}")));
        };
        edges.push((parse_usize(u, "node")?, parse_usize(v, "node")?));
    }
    SampledGraph::from_edges(blocks, group_of, &edges)
}

pub fn read_dump_str(s: &str) -> Result<SampledGraph> {
    read_dump(s.as_bytes())
}
