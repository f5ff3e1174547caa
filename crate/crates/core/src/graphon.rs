//! Step-graphons and the structural objects derived from them.
//!
//! A step-graphon is stored exactly: its partition points and block values
//! are [`Rational`]s. From it we derive the concentration vector (block
//! widths), the skeleton graph (support pattern of the blocks) and the
//! incidence matrix whose columns generate the edge polytope.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Raw on-disk form of a graphon; every entry is a rational string.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GraphonFile {
    partition: Vec<Rational>,
    values: Vec<Vec<Rational>>,
}

/// Piecewise-constant graphon on a `q x q` grid of rectangles.
///
/// Block `(i, j)` (0-based) covers `[σ_i, σ_{i+1}) x [σ_j, σ_{j+1})`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphonFile", into = "GraphonFile")]
pub struct StepGraphon {
    partition: Vec<Rational>,
    values: Vec<Vec<Rational>>,
}

impl TryFrom<GraphonFile> for StepGraphon {
    type Error = Error;

    fn try_from(raw: GraphonFile) -> Result<Self> {
        validate_graphon(raw.partition, raw.values)
    }
}

impl From<StepGraphon> for GraphonFile {
    fn from(g: StepGraphon) -> Self {
        GraphonFile {
            partition: g.partition,
            values: g.values,
        }
    }
}

/// Checks every step-graphon invariant and returns the validated graphon.
/// Inputs are never repaired.
pub fn validate_graphon(partition: Vec<Rational>, values: Vec<Vec<Rational>>) -> Result<StepGraphon> {
    if partition.len() < 2 {
        return Err(Error::EmptyPartition);
    }
    let first = &partition[0];
    let last = &partition[partition.len() - 1];
    if !first.is_zero() || *last != Rational::one() {
        return Err(Error::EndpointViolation {
            first: first.to_string(),
            last: last.to_string(),
        });
    }
    for (index, w) in partition.windows(2).enumerate() {
        if w[1] <= w[0] {
            return Err(Error::NonMonotonePartition {
                index: index + 1,
                value: w[1].to_string(),
            });
        }
    }

    let q = partition.len() - 1;
    if values.len() != q {
        return Err(Error::ShapeMismatch {
            expected: q,
            detail: format!("got {} rows", values.len()),
        });
    }
    if let Some((i, row)) = values.iter().enumerate().find(|(_, r)| r.len() != q) {
        return Err(Error::ShapeMismatch {
            expected: q,
            detail: format!("row {i} has {} entries", row.len()),
        });
    }
    let one = Rational::one();
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if v.is_negative() || *v > one {
                return Err(Error::ValueOutOfRange {
                    i,
                    j,
                    value: v.to_string(),
                });
            }
        }
    }
    for i in 0..q {
        for j in (i + 1)..q {
            if values[i][j] != values[j][i] {
                return Err(Error::AsymmetricValues { i, j });
            }
        }
    }
    Ok(StepGraphon { partition, values })
}

impl StepGraphon {
    pub fn new(partition: Vec<Rational>, values: Vec<Vec<Rational>>) -> Result<Self> {
        validate_graphon(partition, values)
    }

    /// The constant graphon `W ≡ p` with a single block.
    pub fn constant(p: Rational) -> Result<Self> {
        validate_graphon(vec![Rational::zero(), Rational::one()], vec![vec![p]])
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("graphon serialization cannot fail")
    }

    /// Number of blocks `q`.
    pub fn blocks(&self) -> usize {
        self.values.len()
    }

    pub fn partition(&self) -> &[Rational] {
        &self.partition
    }

    pub fn values(&self) -> &[Vec<Rational>] {
        &self.values
    }

    pub fn value(&self, i: usize, j: usize) -> &Rational {
        &self.values[i][j]
    }

    pub fn concentration_vector(&self) -> ConcentrationVector {
        concentration_vector(self)
    }

    pub fn skeleton(&self) -> SkeletonGraph {
        skeleton_graph(self)
    }
}

/// Widths `x*_i = σ_i − σ_{i−1}` of the partition intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcentrationVector(Vec<Rational>);

impl ConcentrationVector {
    pub fn entries(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }
}

pub fn concentration_vector(g: &StepGraphon) -> ConcentrationVector {
    ConcentrationVector(g.partition.windows(2).map(|w| &w[1] - &w[0]).collect())
}

/// One element of the skeleton's edge set `F = F_1 ∪ F_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SkeletonEdge {
    /// Edge between two distinct nodes, stored with `a < b`.
    Edge(usize, usize),
    /// Self-loop.
    Loop(usize),
}

impl fmt::Display for SkeletonEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SkeletonEdge::Edge(a, b) => write!(f, "u{}-u{}", a + 1, b + 1),
            SkeletonEdge::Loop(a) => write!(f, "loop@u{}", a + 1),
        }
    }
}

/// Support graph of a step-graphon: node `i` per block, an edge for each
/// nonzero off-diagonal block, a self-loop for each nonzero diagonal block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonGraph {
    node_count: usize,
    self_loops: BTreeSet<usize>,
    edges: BTreeSet<(usize, usize)>,
}

impl SkeletonGraph {
    /// Builds a skeleton directly. Edges are normalized to `a < b`; an edge
    /// `(a, a)` is treated as a self-loop.
    pub fn new(node_count: usize, self_loops: &[usize], edges: &[(usize, usize)]) -> Self {
        let mut s = SkeletonGraph {
            node_count,
            self_loops: BTreeSet::new(),
            edges: BTreeSet::new(),
        };
        for &l in self_loops {
            assert!(l < node_count, "loop node {l} out of range");
            s.self_loops.insert(l);
        }
        for &(a, b) in edges {
            assert!(a < node_count && b < node_count, "edge ({a},{b}) out of range");
            if a == b {
                s.self_loops.insert(a);
            } else {
                s.edges.insert((a.min(b), a.max(b)));
            }
        }
        s
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn self_loops(&self) -> impl Iterator<Item = usize> + '_ {
        self.self_loops.iter().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_loop(&self, node: usize) -> bool {
        self.self_loops.contains(&node)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        if a == b {
            self.has_loop(a)
        } else {
            self.edges.contains(&(a.min(b), a.max(b)))
        }
    }

    /// Number of elements of `F_0 ∪ F_1`.
    pub fn edge_count(&self) -> usize {
        self.edges.len() + self.self_loops.len()
    }

    /// Edge list in incidence-matrix column order: `F_1` sorted, then `F_0`.
    pub fn ordered_edges(&self) -> Vec<SkeletonEdge> {
        self.edges
            .iter()
            .map(|&(a, b)| SkeletonEdge::Edge(a, b))
            .chain(self.self_loops.iter().map(|&a| SkeletonEdge::Loop(a)))
            .collect()
    }

    /// Neighbors over `F_1` only (loops excluded), ascending.
    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == node {
                    Some(b)
                } else if b == node {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Connected components, each listed in ascending node order.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj: Vec<Vec<usize>> = (0..self.node_count).map(|v| self.neighbors(v)).collect();
        let mut seen = vec![false; self.node_count];
        let mut comps = Vec::new();
        for start in 0..self.node_count {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    pub(crate) fn ensure_connected(&self) -> Result<()> {
        let components = self.components().len();
        if components > 1 {
            Err(Error::DisconnectedSkeleton { components })
        } else {
            Ok(())
        }
    }

    /// Path order of a line skeleton: starts at the loop-free end and ends
    /// at the node carrying the self-loop. `None` if not a line skeleton.
    pub fn line_order(&self) -> Option<Vec<usize>> {
        let q = self.node_count;
        if q == 0 || self.self_loops.len() != 1 || self.edges.len() != q - 1 {
            return None;
        }
        let loop_node = *self.self_loops.iter().next().unwrap();
        if q == 1 {
            return Some(vec![loop_node]);
        }
        let adj: Vec<Vec<usize>> = (0..q).map(|v| self.neighbors(v)).collect();
        if adj.iter().any(|n| n.is_empty() || n.len() > 2) || adj[loop_node].len() != 1 {
            return None;
        }
        // q-1 edges, max degree 2 and connected means a simple path.
        let mut order = Vec::with_capacity(q);
        let mut prev = usize::MAX;
        let mut cur = loop_node;
        loop {
            order.push(cur);
            match adj[cur].iter().copied().find(|&w| w != prev) {
                Some(next) if order.len() < q => {
                    prev = cur;
                    cur = next;
                }
                _ => break,
            }
        }
        if order.len() != q {
            return None;
        }
        order.reverse();
        Some(order)
    }
}

pub fn skeleton_graph(g: &StepGraphon) -> SkeletonGraph {
    let q = g.blocks();
    let mut loops = Vec::new();
    let mut edges = Vec::new();
    for i in 0..q {
        if !g.values[i][i].is_zero() {
            loops.push(i);
        }
        for j in (i + 1)..q {
            if !g.values[i][j].is_zero() {
                edges.push((i, j));
            }
        }
    }
    SkeletonGraph::new(q, &loops, &edges)
}

/// True iff `F_1` is a Hamiltonian path of the skeleton and `F_0` is a
/// single loop at one end of it (for `q = 1`: the lone node has a loop).
pub fn is_line_graphon(s: &SkeletonGraph) -> bool {
    s.line_order().is_some()
}

/// Column-stochastic incidence matrix of a skeleton graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMatrix {
    rows: usize,
    columns: Vec<Vec<Rational>>,
    column_edge: Vec<SkeletonEdge>,
}

impl IncidenceMatrix {
    /// Builds a matrix from explicit columns, e.g. to test column-order
    /// invariance. Every column must have `rows` entries.
    pub fn from_columns(rows: usize, columns: Vec<Vec<Rational>>, column_edge: Vec<SkeletonEdge>) -> Result<Self> {
        if columns.len() != column_edge.len() {
            return Err(Error::DimensionMismatch {
                expected: columns.len(),
                got: column_edge.len(),
            });
        }
        if let Some(c) = columns.iter().find(|c| c.len() != rows) {
            return Err(Error::DimensionMismatch {
                expected: rows,
                got: c.len(),
            });
        }
        Ok(IncidenceMatrix {
            rows,
            columns,
            column_edge,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn column_count(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Vec<Rational>] {
        &self.columns
    }

    pub fn column_edges(&self) -> &[SkeletonEdge] {
        &self.column_edge
    }

    /// `Z α`.
    pub fn apply(&self, alpha: &[Rational]) -> Vec<Rational> {
        assert_eq!(alpha.len(), self.columns.len());
        let mut out = vec![Rational::zero(); self.rows];
        for (col, a) in self.columns.iter().zip(alpha) {
            if a.is_zero() {
                continue;
            }
            for (o, z) in out.iter_mut().zip(col) {
                if !z.is_zero() {
                    *o += &(z * a);
                }
            }
        }
        out
    }

    /// Returns a copy with columns reordered so that new column `k` is old
    /// column `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> IncidenceMatrix {
        assert_eq!(perm.len(), self.columns.len());
        IncidenceMatrix {
            rows: self.rows,
            columns: perm.iter().map(|&k| self.columns[k].clone()).collect(),
            column_edge: perm.iter().map(|&k| self.column_edge[k]).collect(),
        }
    }
}

pub fn incidence_matrix(s: &SkeletonGraph) -> IncidenceMatrix {
    let q = s.node_count();
    let half = Rational::new(1, 2);
    let column_edge = s.ordered_edges();
    let columns = column_edge
        .iter()
        .map(|e| {
            let mut col = vec![Rational::zero(); q];
            match *e {
                SkeletonEdge::Edge(a, b) => {
                    col[a] = half.clone();
                    col[b] = half.clone();
                }
                SkeletonEdge::Loop(a) => col[a] = Rational::one(),
            }
            col
        })
        .collect();
    IncidenceMatrix {
        rows: q,
        columns,
        column_edge,
    }
}
