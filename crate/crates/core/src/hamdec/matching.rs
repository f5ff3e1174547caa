//! Maximum bipartite matching (Hopcroft–Karp) and left-perfect matchings
//! with Hall-violation certificates.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};

const UNMATCHED: usize = usize::MAX;
const INF: usize = usize::MAX;

/// A maximum matching between `0..left` and `0..right`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxMatching {
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
    pub size: usize,
}

/// Hopcroft–Karp on local indices. `adj[u]` lists the right neighbors of
/// left node `u`; lists are scanned in the order given, so ascending lists
/// give deterministic results. Runs in `O(E √V)`.
pub fn hopcroft_karp(right: usize, adj: &[Vec<usize>]) -> MaxMatching {
    let left = adj.len();
    let mut match_l = vec![UNMATCHED; left];
    let mut match_r = vec![UNMATCHED; right];
    let mut size = 0;

    // Greedy warm start.
    for u in 0..left {
        if let Some(&v) = adj[u].iter().find(|&&v| match_r[v] == UNMATCHED) {
            match_l[u] = v;
            match_r[v] = u;
            size += 1;
        }
    }

    let mut dist = vec![INF; left];
    let mut next_edge = vec![0usize; left];
    let mut queue = VecDeque::with_capacity(left);
    let mut stack = Vec::new();
    loop {
        // BFS layers from free left nodes.
        queue.clear();
        for u in 0..left {
            if match_l[u] == UNMATCHED {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = INF;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == UNMATCHED {
                    found = true;
                } else if dist[w] == INF {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }

        next_edge.iter_mut().for_each(|e| *e = 0);
        for root in 0..left {
            if match_l[root] != UNMATCHED {
                continue;
            }
            stack.clear();
            stack.push(root);
            while let Some(&u) = stack.last() {
                let Some(&v) = adj[u].get(next_edge[u]) else {
                    dist[u] = INF;
                    stack.pop();
                    continue;
                };
                let w = match_r[v];
                if w == UNMATCHED {
                    // Flip the alternating path held on the stack.
                    for &x in stack.iter() {
                        let y = adj[x][next_edge[x]];
                        match_l[x] = y;
                        match_r[y] = x;
                    }
                    size += 1;
                    break;
                } else if dist[w] != INF && dist[w] == dist[u] + 1 {
                    stack.push(w);
                } else {
                    next_edge[u] += 1;
                }
            }
        }
    }

    let opt = |v: usize| (v != UNMATCHED).then_some(v);
    MaxMatching {
        left_to_right: match_l.into_iter().map(opt).collect(),
        right_to_left: match_r.into_iter().map(opt).collect(),
        size,
    }
}

/// Left nodes reachable from `start` by alternating paths. If `start` is
/// free in a maximum matching these form a Hall-violating set whose
/// neighborhood is exactly the reached right nodes.
fn alternating_reach(adj: &[Vec<usize>], m: &MaxMatching, start: usize) -> (Vec<usize>, Vec<usize>) {
    let mut seen_l = vec![false; adj.len()];
    let mut seen_r = vec![false; m.right_to_left.len()];
    seen_l[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if seen_r[v] {
                continue;
            }
            seen_r[v] = true;
            if let Some(w) = m.right_to_left[v] {
                if !seen_l[w] {
                    seen_l[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let collect = |s: &[bool]| s.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
    (collect(&seen_l), collect(&seen_r))
}

/// Set of `(left, right)` pairs, sorted by left node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// A left subset whose neighborhood is smaller than itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HallViolation {
    pub subset: Vec<usize>,
    pub neighborhood: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeftPerfect {
    Matched(Matching),
    Deficient(HallViolation),
}

impl LeftPerfect {
    pub fn matching(&self) -> Option<&Matching> {
        match self {
            LeftPerfect::Matched(m) => Some(m),
            LeftPerfect::Deficient(_) => None,
        }
    }
}

/// Finds a matching covering every node of `left`, or a Hall violation
/// proving none exists. Node ids are arbitrary; edges must go from `left`
/// to `right` (others are ignored).
pub fn left_perfect_matching(left: &[usize], right: &[usize], edges: &[(usize, usize)]) -> Result<LeftPerfect> {
    if left.len() > right.len() {
        return Err(Error::LeftLargerThanRight {
            left: left.len(),
            right: right.len(),
        });
    }
    let left_idx: HashMap<usize, usize> = left.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let right_idx: HashMap<usize, usize> = right.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut adj = vec![Vec::new(); left.len()];
    for &(u, v) in edges {
        if let (Some(&a), Some(&b)) = (left_idx.get(&u), right_idx.get(&v)) {
            adj[a].push(b);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let m = hopcroft_karp(right.len(), &adj);
    if m.size == left.len() {
        let pairs = m
            .left_to_right
            .iter()
            .enumerate()
            .map(|(a, b)| (left[a], right[b.expect("left-perfect")]))
            .collect();
        return Ok(LeftPerfect::Matched(Matching { pairs }));
    }
    let free = m.left_to_right.iter().position(Option::is_none).expect("deficient matching has a free node");
    let (s, n) = alternating_reach(&adj, &m, free);
    Ok(LeftPerfect::Deficient(HallViolation {
        subset: s.into_iter().map(|a| left[a]).collect(),
        neighborhood: n.into_iter().map(|b| right[b]).collect(),
    }))
}
