//! Exact decision procedures for the structural conditions of a step-graphon:
//! odd cycles in the skeleton, membership of the concentration vector in the
//! edge polytope (and in its relative interior), and the polytope's affine
//! rank.
//!
//! Membership is decided by one exact LP,
//!
//! ```text
//! maximize t   s.t.   Z α = x,  Σ α = 1,  α_j ≥ t  for all j,  t ≥ 0
//! ```
//!
//! which is infeasible iff `x` lies outside `conv(Z)`, and has a positive
//! optimum iff `x` is a strictly positive combination of every generator,
//! i.e. lies in the relative interior.

pub mod lp;

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphon::{incidence_matrix, IncidenceMatrix, SkeletonGraph, StepGraphon};
use crate::rational::Rational;

use lp::LpOutcome;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MembershipStatus {
    Outside,
    Boundary,
    RelativeInterior,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MembershipResult {
    pub status: MembershipStatus,
    /// Convex weights `α` with `Z α = x`; absent when outside.
    pub certificate: Option<Vec<Rational>>,
    /// Largest achievable `min_j α_j`; zero unless in the relative interior.
    pub margin: Rational,
    pub infeasibility_witness: Option<String>,
}

impl MembershipResult {
    fn outside(witness: String) -> Self {
        MembershipResult {
            status: MembershipStatus::Outside,
            certificate: None,
            margin: Rational::zero(),
            infeasibility_witness: Some(witness),
        }
    }
}

/// True iff the (connected) skeleton has a self-loop or is not bipartite.
pub fn has_odd_cycle(s: &SkeletonGraph) -> Result<bool> {
    s.ensure_connected()?;
    if s.self_loops().next().is_some() {
        return Ok(true);
    }
    let q = s.node_count();
    let adj: Vec<Vec<usize>> = (0..q).map(|v| s.neighbors(v)).collect();
    let mut color = vec![None::<bool>; q];
    for start in 0..q {
        if color[start].is_some() {
            continue;
        }
        color[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            let cv = color[v].unwrap();
            for &w in &adj[v] {
                match color[w] {
                    None => {
                        color[w] = Some(!cv);
                        queue.push_back(w);
                    }
                    Some(cw) if cw == cv => return Ok(true),
                    Some(_) => {}
                }
            }
        }
    }
    Ok(false)
}

/// Classifies `x` against the edge polytope `conv{z_j}`.
pub fn polytope_membership(z: &IncidenceMatrix, x: &[Rational]) -> Result<MembershipResult> {
    let q = z.rows();
    if x.len() != q {
        return Err(Error::DimensionMismatch {
            expected: q,
            got: x.len(),
        });
    }
    let m = z.column_count();
    if m == 0 {
        return Ok(MembershipResult::outside(
            "the skeleton has no edges or loops, so the edge polytope is empty".into(),
        ));
    }

    // Substitute α = β + t·1 with β ≥ 0; variables are (β_1..β_m, t).
    let mut a = Vec::with_capacity(q + 1);
    for r in 0..q {
        let mut row: Vec<Rational> = z.columns().iter().map(|col| col[r].clone()).collect();
        let row_sum: Rational = row.iter().sum();
        row.push(row_sum);
        a.push(row);
    }
    let mut ones = vec![Rational::one(); m];
    ones.push(Rational::from_integer(m as i64));
    a.push(ones);
    let mut b = x.to_vec();
    b.push(Rational::one());
    let mut c = vec![Rational::zero(); m];
    c.push(Rational::one());

    let (margin, solution) = match lp::maximize(&a, &b, &c) {
        LpOutcome::Infeasible { residual } => {
            return Ok(MembershipResult::outside(format!(
                "no convex combination of the {m} generators equals x; \
                 least L1 residual over nonnegative combinations is {residual}"
            )));
        }
        LpOutcome::Optimal { value, solution } => (value, solution),
        // m·t ≤ 1 bounds the objective.
        LpOutcome::Unbounded => unreachable!("membership LP is bounded"),
    };

    let alpha: Vec<Rational> = solution[..m].iter().map(|beta| beta + &margin).collect();
    check_certificate(z, x, &alpha);
    let status = if margin.is_positive() {
        MembershipStatus::RelativeInterior
    } else {
        MembershipStatus::Boundary
    };
    Ok(MembershipResult {
        status,
        certificate: Some(alpha),
        margin,
        infeasibility_witness: None,
    })
}

fn check_certificate(z: &IncidenceMatrix, x: &[Rational], alpha: &[Rational]) {
    assert!(alpha.iter().all(|a| !a.is_negative()), "negative convex weight");
    assert_eq!(alpha.iter().sum::<Rational>(), Rational::one(), "weights do not sum to 1");
    assert_eq!(z.apply(alpha), x, "Z·alpha != x");
}

/// Alternating sums `s_k = x_k − x_{k−1} + x_{k−2} − … ± x_1`, `k = 1..q`,
/// for `x` listed in path order (loop node last). For a line skeleton they
/// equal `α_k / 2` (`k < q`) and `α_q`, so all are positive exactly in the
/// relative interior.
pub fn line_inequalities(x: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(x.len());
    let mut prev = Rational::zero();
    for xk in x {
        let s = xk - &prev;
        out.push(s.clone());
        prev = s;
    }
    out
}

/// Affine dimension of `conv{z_j}`: the rank of `{z_j − z_1}`.
/// An empty generator set has dimension −1.
pub fn polytope_rank(z: &IncidenceMatrix) -> i64 {
    let cols = z.columns();
    let Some(first) = cols.first() else {
        return -1;
    };
    let mut rows: Vec<Vec<Rational>> = cols[1..]
        .iter()
        .map(|c| c.iter().zip(first).map(|(a, b)| a - b).collect())
        .collect();
    rank(&mut rows) as i64
}

fn rank(rows: &mut [Vec<Rational>]) -> usize {
    let width = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for col in 0..width {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r].clone();
        for row in rows.iter_mut().skip(r + 1) {
            if row[col].is_zero() {
                continue;
            }
            let f = &row[col] / &pivot[col];
            for (v, pv) in row.iter_mut().zip(&pivot) {
                *v -= &(&f * pv);
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    HProperty,
    NoHProperty,
    Borderline,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub verdict: Verdict,
    pub condition1: bool,
    #[serde(rename = "condition2A")]
    pub condition2a: bool,
    #[serde(rename = "condition2B")]
    pub condition2b: bool,
    pub polytope_rank: i64,
    pub blocks: usize,
    pub concentration: Vec<Rational>,
    /// Column labels of `Z`, in certificate order.
    pub columns: Vec<String>,
    pub membership: MembershipResult,
    pub is_line_graphon: bool,
    /// Path order (0-based blocks) when the skeleton is a line.
    pub line_order: Option<Vec<usize>>,
    /// Alternating sums along `line_order`, when it exists.
    pub line_inequalities: Option<Vec<Rational>>,
}

impl ConditionReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

pub fn classify(g: &StepGraphon) -> Result<ConditionReport> {
    let s = g.skeleton();
    let condition1 = has_odd_cycle(&s)?;
    let z = incidence_matrix(&s);
    let x = g.concentration_vector().into_inner();
    let membership = polytope_membership(&z, &x)?;
    let condition2a = membership.status != MembershipStatus::Outside;
    let condition2b = membership.status == MembershipStatus::RelativeInterior;

    let verdict = if !condition1 || !condition2a {
        Verdict::NoHProperty
    } else if condition2b {
        Verdict::HProperty
    } else {
        Verdict::Borderline
    };

    let line_order = s.line_order();
    let line_sums = line_order.as_ref().map(|order| {
        let x_path: Vec<Rational> = order.iter().map(|&i| x[i].clone()).collect();
        line_inequalities(&x_path)
    });
    if let Some(sums) = &line_sums {
        let all_positive = sums.iter().all(Rational::is_positive);
        if all_positive != condition2b {
            return Err(Error::LineCriterionDisagreement(format!(
                "x* = {x:?}, alternating sums {sums:?}, LP status {:?}",
                membership.status
            )));
        }
    }

    Ok(ConditionReport {
        verdict,
        condition1,
        condition2a,
        condition2b,
        polytope_rank: polytope_rank(&z),
        blocks: g.blocks(),
        concentration: x,
        columns: z.column_edges().iter().map(ToString::to_string).collect(),
        membership,
        is_line_graphon: line_order.is_some(),
        line_order,
        line_inequalities: line_sums,
    })
}
