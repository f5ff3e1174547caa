//! Hamiltonian decompositions of the directed version of a sampled graph.
//!
//! Every undirected edge `{u, v}` becomes the arcs `u → v` and `v → u`; a
//! Hamiltonian decomposition is a set of node-disjoint directed cycles
//! (2-cycles allowed) covering all nodes. Equivalently it is a permutation
//! `μ` without fixed points with `v → μ(v)` an arc for every `v`, i.e. a
//! perfect matching between a left and a right copy of the node set.

pub mod matching;

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphon::{SkeletonGraph, StepGraphon};
use crate::sampling::SampledGraph;

use matching::hopcroft_karp;

/// Node-disjoint directed cycles, each given as a node sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct HamiltonianDecomposition {
    pub cycles: Vec<Vec<usize>>,
}

impl HamiltonianDecomposition {
    pub fn new(cycles: Vec<Vec<usize>>) -> Self {
        HamiltonianDecomposition { cycles }
    }

    pub fn node_count(&self) -> usize {
        self.cycles.iter().map(Vec::len).sum()
    }
}

/// True iff `hd` is node-disjoint, covers every node of `sg`, has no cycle
/// shorter than 2, and uses only arcs of the directed version of `sg`.
pub fn verify_decomposition(sg: &SampledGraph, hd: &HamiltonianDecomposition) -> bool {
    let n = sg.node_count();
    let mut seen = vec![false; n];
    for cycle in &hd.cycles {
        if cycle.len() < 2 {
            return false;
        }
        for &v in cycle {
            if v >= n || seen[v] {
                return false;
            }
            seen[v] = true;
        }
        let closes = cycle
            .iter()
            .zip(cycle.iter().cycle().skip(1))
            .all(|(&a, &b)| sg.has_edge(a, b));
        if !closes {
            return false;
        }
    }
    seen.into_iter().all(|s| s)
}

/// Orbits of a permutation, each starting at its smallest node, ordered by
/// that node.
fn permutation_cycles(succ: &[usize]) -> Vec<Vec<usize>> {
    let mut seen = vec![false; succ.len()];
    let mut cycles = Vec::new();
    for start in 0..succ.len() {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut v = start;
        while !seen[v] {
            seen[v] = true;
            cycle.push(v);
            v = succ[v];
        }
        cycles.push(cycle);
    }
    cycles
}

/// Exact decision via perfect matching on the left/right node copies.
/// Returns a verified decomposition when one exists. An empty graph is
/// decomposed by zero cycles.
pub fn has_hamiltonian_decomposition(sg: &SampledGraph) -> (bool, Option<HamiltonianDecomposition>) {
    let n = sg.node_count();
    let m = hopcroft_karp(n, sg.adjacency());
    if m.size < n {
        return (false, None);
    }
    let succ: Vec<usize> = m.left_to_right.into_iter().map(|v| v.expect("perfect")).collect();
    let hd = HamiltonianDecomposition::new(permutation_cycles(&succ));
    debug_assert!(verify_decomposition(sg, &hd));
    (true, Some(hd))
}

pub const BRUTE_FORCE_MAX_NODES: usize = 9;

/// Exhaustive search over fixed-point-free permutations `μ` with every
/// `v → μ(v)` an arc. Oracle for small graphs only.
pub fn brute_force_hd(sg: &SampledGraph) -> Result<bool> {
    let n = sg.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_NODES,
        });
    }
    fn extend(v: usize, n: usize, sg: &SampledGraph, used: &mut [bool]) -> bool {
        if v == n {
            return true;
        }
        for target in 0..n {
            if target != v && !used[target] && sg.has_edge(v, target) {
                used[target] = true;
                if extend(v + 1, n, sg, used) {
                    return true;
                }
                used[target] = false;
            }
        }
        false
    }
    Ok(extend(0, n, sg, &mut vec![false; n]))
}

/// Lexicographically smallest triangle `(a, b, c)`, `a < b < c`, among
/// `nodes` (all nodes if `None`).
pub fn find_triangle(sg: &SampledGraph, nodes: Option<&[usize]>) -> Option<(usize, usize, usize)> {
    let n = sg.node_count();
    let mut allowed = vec![nodes.is_none(); n];
    if let Some(list) = nodes {
        for &v in list {
            allowed[v] = true;
        }
    }
    for a in 0..n {
        if !allowed[a] {
            continue;
        }
        for &b in sg.neighbors(a).iter().filter(|&&b| b > a && allowed[b]) {
            for &c in sg.neighbors(b).iter().filter(|&&c| c > b && allowed[c]) {
                if sg.has_edge(a, c) {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}

/// Perfect matching between the even and odd positions of `nodes`
/// (sorted), using only edges across the two halves.
fn parity_matching(sg: &SampledGraph, nodes: &[usize]) -> Option<Vec<Vec<usize>>> {
    debug_assert!(nodes.len().is_multiple_of(2));
    let left: Vec<usize> = nodes.iter().copied().step_by(2).collect();
    let right: Vec<usize> = nodes.iter().copied().skip(1).step_by(2).collect();
    let pairs = bipartite_left_perfect(sg, &left, &right)?;
    Some(pairs.into_iter().map(|(u, v)| vec![u, v]).collect())
}

/// Left-perfect matching of `left` into `right` over the edges of `sg`.
/// Both lists must be sorted and disjoint.
fn bipartite_left_perfect(sg: &SampledGraph, left: &[usize], right: &[usize]) -> Option<Vec<(usize, usize)>> {
    if left.len() > right.len() {
        return None;
    }
    let mut right_idx = vec![usize::MAX; sg.node_count()];
    for (i, &v) in right.iter().enumerate() {
        right_idx[v] = i;
    }
    let adj: Vec<Vec<usize>> = left
        .iter()
        .map(|&u| {
            sg.neighbors(u)
                .iter()
                .filter_map(|&v| (right_idx[v] != usize::MAX).then_some(right_idx[v]))
                .collect()
        })
        .collect();
    let m = hopcroft_karp(right.len(), &adj);
    if m.size < left.len() {
        return None;
    }
    Some(
        m.left_to_right
            .iter()
            .enumerate()
            .map(|(a, b)| (left[a], right[b.expect("left-perfect")]))
            .collect(),
    )
}

/// Decomposition of the subgraph induced by `nodes` in the style used for
/// Erdős–Rényi graphs: for an even count, a perfect matching between the
/// even and odd positions of the sorted node list gives 2-cycles; for an
/// odd count the smallest triangle is taken first and the remaining nodes
/// are matched. `None` if a step fails.
pub fn er_hamiltonian_decomposition(sg: &SampledGraph, nodes: &[usize]) -> Option<HamiltonianDecomposition> {
    let mut nodes = nodes.to_vec();
    nodes.sort_unstable();
    nodes.dedup();
    let mut cycles = Vec::new();
    if nodes.len() % 2 == 1 {
        let (a, b, c) = find_triangle(sg, Some(&nodes))?;
        cycles.push(vec![a, b, c]);
        nodes.retain(|&v| v != a && v != b && v != c);
    }
    cycles.extend(parity_matching(sg, &nodes)?);
    Some(HamiltonianDecomposition::new(cycles))
}

/// Block order of a line skeleton, loop-free end first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineOrder(Vec<usize>);

impl LineOrder {
    pub fn from_skeleton(s: &SkeletonGraph) -> Result<Self> {
        s.line_order()
            .map(LineOrder)
            .ok_or_else(|| Error::NotALineGraphon("skeleton is not a path with a single end loop".into()))
    }

    pub fn from_graphon(g: &StepGraphon) -> Result<Self> {
        Self::from_skeleton(&g.skeleton())
    }

    pub fn blocks(&self) -> &[usize] {
        &self.0
    }
}

/// Result of the stage-by-stage line construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConstructiveOutcome {
    Success(HamiltonianDecomposition),
    /// Some alternating count sum was not positive.
    CountsFailed,
    /// No left-perfect matching from the leftover of path position `stage`
    /// (1-based) into position `stage + 1`.
    MatchingFailed { stage: usize },
    /// The leftover of the loop block could not be decomposed.
    ResidualFailed,
}

impl ConstructiveOutcome {
    pub fn decomposition(&self) -> Option<&HamiltonianDecomposition> {
        match self {
            ConstructiveOutcome::Success(hd) => Some(hd),
            _ => None,
        }
    }

    pub fn is_success(&self) -> bool {
        matches!(self, ConstructiveOutcome::Success(_))
    }

    pub fn tag(&self) -> OutcomeTag {
        match self {
            ConstructiveOutcome::Success(_) => OutcomeTag::Success,
            ConstructiveOutcome::CountsFailed => OutcomeTag::CountsFailed,
            ConstructiveOutcome::MatchingFailed { stage } => OutcomeTag::MatchingFailedAtStage(*stage),
            ConstructiveOutcome::ResidualFailed => OutcomeTag::ResidualFailed,
        }
    }
}

/// Flat label of a constructive run, as written to trial streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeTag {
    Success,
    CountsFailed,
    MatchingFailedAtStage(usize),
    ResidualFailed,
    NotRun,
}

impl fmt::Display for OutcomeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutcomeTag::Success => f.write_str("success"),
            OutcomeTag::CountsFailed => f.write_str("counts_failed"),
            OutcomeTag::MatchingFailedAtStage(k) => write!(f, "matching_failed_at_stage_{k}"),
            OutcomeTag::ResidualFailed => f.write_str("residual_failed"),
            OutcomeTag::NotRun => f.write_str("not_run"),
        }
    }
}

/// Alternating sums `n_k − n_{k−1} + … ± n_1` of block sizes in path order.
pub fn alternating_counts(counts_in_path_order: &[usize]) -> Vec<i64> {
    let mut prev = 0i64;
    counts_in_path_order
        .iter()
        .map(|&c| {
            prev = c as i64 - prev;
            prev
        })
        .collect()
}

/// Builds a decomposition of a sample from a line graphon stage by stage:
/// match all of `V_1` into `V_2`, the unmatched rest of `V_2` into `V_3`,
/// and so on along the path, then decompose what is left of the loop block
/// with [`er_hamiltonian_decomposition`]. Best effort: a failure here does
/// not mean no decomposition exists.
pub fn construct_line_decomposition(sg: &SampledGraph, line: &LineOrder) -> Result<ConstructiveOutcome> {
    let order = line.blocks();
    if order.len() != sg.blocks() {
        return Err(Error::NotALineGraphon(format!(
            "line order has {} blocks but the sample has {}",
            order.len(),
            sg.blocks()
        )));
    }
    let members = sg.block_members();
    let groups: Vec<&Vec<usize>> = order.iter().map(|&b| &members[b]).collect();
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    if alternating_counts(&sizes).iter().any(|&s| s <= 0) {
        return Ok(ConstructiveOutcome::CountsFailed);
    }

    let mut cycles = Vec::new();
    let mut leftover: Vec<usize> = groups[0].clone();
    for k in 1..groups.len() {
        let next = groups[k];
        let Some(pairs) = bipartite_left_perfect(sg, &leftover, next) else {
            return Ok(ConstructiveOutcome::MatchingFailed { stage: k });
        };
        let mut used = vec![false; sg.node_count()];
        for &(u, v) in &pairs {
            used[v] = true;
            cycles.push(vec![u, v]);
        }
        leftover = next.iter().copied().filter(|&v| !used[v]).collect();
    }
    match er_hamiltonian_decomposition(sg, &leftover) {
        Some(rest) => {
            cycles.extend(rest.cycles);
            Ok(ConstructiveOutcome::Success(HamiltonianDecomposition::new(cycles)))
        }
        None => Ok(ConstructiveOutcome::ResidualFailed),
    }
}
