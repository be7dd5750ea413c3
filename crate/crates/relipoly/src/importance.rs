//! Edge importance as reliability differences.
//!
//! The importance of edge e is I_e(x) = R(x) - R_minus_e(x), the reliability
//! lost by deleting the edge. The two polynomials live over different edge
//! counts (E and E-1), so importance is always evaluated pointwise, never
//! subtracted coefficient by coefficient. All comparisons that feed
//! rankings or root brackets use exact rational arithmetic; floating point
//! only appears in reported curve samples and root locations.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimate::{brute_force_rk, BRUTE_FORCE_EDGE_CAP};
use crate::graph::{EdgeSet, Graph};
use crate::incexc::nk_exact;
use crate::motifs::enumerate_motifs;
use crate::poly::{self, evaluate, evaluate_exact, rk_to_nk, CoefficientVector};
use crate::rules::RuleSpec;

/// Crossing brackets shrink below this width unless the caller overrides.
pub const DEFAULT_CROSSING_TOL: f64 = 1e-9;

/// Sign sampling before bisection uses this many uniform intervals.
pub const CROSSING_GRID: usize = 1024;

/// Exact power-basis polynomial for one graph and rule, by motif
/// inclusion-exclusion when it fits and by subset brute force otherwise.
fn exact_nk(g: &Graph, rule: &RuleSpec) -> Result<CoefficientVector> {
    match enumerate_motifs(g, rule) {
        Ok(family) => match nk_exact(&family) {
            Ok(nk) => return Ok(nk),
            Err(Error::Capacity(_)) => {}
            Err(e) => return Err(e),
        },
        Err(Error::Capacity(_)) => {}
        Err(e) => return Err(e),
    }
    if g.edge_count() <= BRUTE_FORCE_EDGE_CAP {
        return rk_to_nk(&brute_force_rk(g, rule)?);
    }
    Err(Error::capacity(format!(
        "no exact pipeline for E = {} with this motif family; importance needs exact \
         polynomials",
        g.edge_count()
    )))
}

/// R for the graph and R for the graph without one edge, both exact. The
/// difference of the two, evaluated pointwise, is the edge's importance.
pub fn edge_importance(
    g: &Graph,
    rule: &RuleSpec,
    edge: usize,
) -> Result<(CoefficientVector, CoefficientVector)> {
    rule.validate(g)?;
    let removed = g.remove_edge(edge)?;
    let base = exact_nk(g, rule)?;
    let without = exact_nk(&removed, rule)?;
    Ok((base, without))
}

fn rational_x(x: f64) -> Result<BigRational> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(format!("x={x} outside [0, 1]")));
    }
    BigRational::from_float(x).ok_or_else(|| Error::domain("x is not finite".to_string()))
}

fn removal_polynomials(g: &Graph, rule: &RuleSpec) -> Result<Vec<CoefficientVector>> {
    (0..g.edge_count())
        .into_par_iter()
        .map(|e| exact_nk(&g.remove_edge(e)?, rule))
        .collect()
}

fn group_by_importance(values: Vec<(usize, BigRational)>) -> Vec<Vec<usize>> {
    let mut values = values;
    values.sort_by(|(ea, va), (eb, vb)| vb.cmp(va).then(ea.cmp(eb)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last: Option<BigRational> = None;
    for (e, v) in values {
        if last.as_ref() == Some(&v) {
            groups.last_mut().unwrap().push(e);
        } else {
            groups.push(vec![e]);
            last = Some(v);
        }
    }
    groups
}

/// Edges ordered by importance at x, most important first; exactly tied
/// edges (automorphic classes, typically) share a group.
pub fn rank_edges(g: &Graph, rule: &RuleSpec, x: f64) -> Result<Vec<Vec<usize>>> {
    rule.validate(g)?;
    let xr = rational_x(x)?;
    let base = exact_nk(g, rule)?;
    let base_val = evaluate_exact(&base, &xr)?;
    let removed = removal_polynomials(g, rule)?;
    let mut values = Vec::with_capacity(removed.len());
    for (e, poly) in removed.iter().enumerate() {
        values.push((e, &base_val - evaluate_exact(poly, &xr)?));
    }
    Ok(group_by_importance(values))
}

/// One sign change of R_minus_b minus R_minus_a, bracketed to `width`.
#[derive(Debug, Clone, Serialize)]
pub struct Crossing {
    pub edge_a: usize,
    pub edge_b: usize,
    pub x_star: f64,
    pub bracket_width: f64,
}

fn crossings_between(
    without_a: &CoefficientVector,
    without_b: &CoefficientVector,
    edge_a: usize,
    edge_b: usize,
    tol: f64,
) -> Vec<Crossing> {
    let grid: Vec<BigRational> = (0..=CROSSING_GRID)
        .map(|i| BigRational::new(i.into(), (CROSSING_GRID as u64).into()))
        .collect();
    let diff =
        |x: &BigRational| evaluate_exact(without_b, x).unwrap() - evaluate_exact(without_a, x).unwrap();
    poly::refine_sign_changes(diff, &grid, tol)
        .into_iter()
        .map(|(x_star, bracket_width)| Crossing {
            edge_a,
            edge_b,
            x_star,
            bracket_width,
        })
        .collect()
}

/// Locations in (0,1) where the importance ranking of two edges flips:
/// sign changes of R_minus_b minus R_minus_a, sampled on a uniform grid of
/// [`CROSSING_GRID`] intervals and bisected to width <= tol with exact
/// rational sign tests. Identical polynomials yield no crossings.
pub fn find_crossings(
    g: &Graph,
    rule: &RuleSpec,
    edge_a: usize,
    edge_b: usize,
    tol: f64,
) -> Result<Vec<Crossing>> {
    rule.validate(g)?;
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::parameter("tolerance must be positive and finite"));
    }
    if edge_a == edge_b {
        return Err(Error::parameter("need two distinct edges"));
    }
    let without_a = exact_nk(&g.remove_edge(edge_a)?, rule)?;
    let without_b = exact_nk(&g.remove_edge(edge_b)?, rule)?;
    Ok(crossings_between(&without_a, &without_b, edge_a, edge_b, tol))
}

/// Before/after reliability polynomials for two rules when a fixed edge set
/// is deleted, plus the drop comparison at x = 1/2.
#[derive(Debug, Clone, Serialize)]
pub struct RemovalExperiment {
    pub removed: Vec<usize>,
    pub before_a: CoefficientVector,
    pub before_b: CoefficientVector,
    pub after_a: CoefficientVector,
    pub after_b: CoefficientVector,
    pub drop_a_at_half: f64,
    pub drop_b_at_half: f64,
    /// Whether rule a loses more reliability than rule b at x = 1/2.
    pub a_drops_more_at_half: bool,
}

impl RemovalExperiment {
    /// Exact reliability drops (before minus after) for both rules at x.
    pub fn drops_at(&self, x: &BigRational) -> Result<(BigRational, BigRational)> {
        let a = evaluate_exact(&self.before_a, x)? - evaluate_exact(&self.after_a, x)?;
        let b = evaluate_exact(&self.before_b, x)? - evaluate_exact(&self.after_b, x)?;
        Ok((a, b))
    }

    /// The four curves sampled on a uniform grid: columns are x, before_a,
    /// before_b, after_a, after_b.
    pub fn curves(&self, grid_points: usize) -> Result<Vec<[f64; 5]>> {
        if grid_points < 2 {
            return Err(Error::parameter("need at least 2 grid points"));
        }
        let mut rows = Vec::with_capacity(grid_points);
        for i in 0..grid_points {
            let x = i as f64 / (grid_points - 1) as f64;
            rows.push([
                x,
                evaluate(&self.before_a, x)?,
                evaluate(&self.before_b, x)?,
                evaluate(&self.after_a, x)?,
                evaluate(&self.after_b, x)?,
            ]);
        }
        Ok(rows)
    }
}

/// Computes reliability under both rules before and after deleting the
/// given edges. The rules play symmetric roles; the drop comparison at
/// x = 1/2 is reported, not asserted.
pub fn edge_removal_experiment(
    g: &Graph,
    rule_a: &RuleSpec,
    rule_b: &RuleSpec,
    removed: &EdgeSet,
) -> Result<RemovalExperiment> {
    rule_a.validate(g)?;
    rule_b.validate(g)?;
    for e in removed.iter() {
        if e >= g.edge_count() {
            return Err(Error::parameter(format!(
                "removed edge {e} out of range for E={}",
                g.edge_count()
            )));
        }
    }
    let after_graph = g.remove_edges(removed);
    let before_a = exact_nk(g, rule_a)?;
    let before_b = exact_nk(g, rule_b)?;
    let after_a = exact_nk(&after_graph, rule_a)?;
    let after_b = exact_nk(&after_graph, rule_b)?;
    let experiment = RemovalExperiment {
        removed: removed.to_indices(),
        before_a,
        before_b,
        after_a,
        after_b,
        drop_a_at_half: 0.0,
        drop_b_at_half: 0.0,
        a_drops_more_at_half: false,
    };
    let half = BigRational::new(1.into(), 2.into());
    let (da, db) = experiment.drops_at(&half)?;
    Ok(RemovalExperiment {
        drop_a_at_half: rational_to_f64(&da),
        drop_b_at_half: rational_to_f64(&db),
        a_drops_more_at_half: da > db,
        ..experiment
    })
}

fn rational_to_f64(v: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(v).unwrap_or(f64::NAN)
}

/// Ranking groups at one evaluation point.
#[derive(Debug, Clone, Serialize)]
pub struct RankingAt {
    pub x: f64,
    pub groups: Vec<Vec<usize>>,
}

/// Everything the CLI reports about importance in one pass: the base
/// polynomial, one deleted-edge polynomial per edge, rankings at requested
/// points, and crossings for requested pairs.
#[derive(Debug, Clone, Serialize)]
pub struct ImportanceReport {
    pub rule: String,
    pub edge_count: usize,
    pub base: CoefficientVector,
    pub per_edge: BTreeMap<usize, CoefficientVector>,
    pub rankings: Vec<RankingAt>,
    pub crossings: Vec<Crossing>,
}

pub fn importance_report(
    g: &Graph,
    rule: &RuleSpec,
    ranking_points: &[f64],
    pairs: &[(usize, usize)],
    tol: f64,
) -> Result<ImportanceReport> {
    rule.validate(g)?;
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::parameter("tolerance must be positive and finite"));
    }
    let base = exact_nk(g, rule)?;
    let removed = removal_polynomials(g, rule)?;
    let per_edge: BTreeMap<usize, CoefficientVector> =
        removed.iter().cloned().enumerate().collect();

    let mut rankings = Vec::with_capacity(ranking_points.len());
    for &x in ranking_points {
        let xr = rational_x(x)?;
        let base_val = evaluate_exact(&base, &xr)?;
        let mut values = Vec::with_capacity(removed.len());
        for (e, poly) in removed.iter().enumerate() {
            values.push((e, &base_val - evaluate_exact(poly, &xr)?));
        }
        rankings.push(RankingAt {
            x,
            groups: group_by_importance(values),
        });
    }

    let mut crossings = Vec::new();
    for &(a, b) in pairs {
        if a == b || a >= removed.len() || b >= removed.len() {
            return Err(Error::parameter(format!("invalid edge pair ({a}, {b})")));
        }
        crossings.extend(crossings_between(&removed[a], &removed[b], a, b, tol));
    }

    Ok(ImportanceReport {
        rule: rule.to_string(),
        edge_count: g.edge_count(),
        base,
        per_edge,
        rankings,
        crossings,
    })
}

/// R(x) >= R_minus_e(x) must hold everywhere for coherent rules; checked on
/// a uniform grid, in exact arithmetic.
pub fn check_importance_nonnegative(
    base: &CoefficientVector,
    without: &CoefficientVector,
    grid_points: usize,
) -> Result<bool> {
    let n = grid_points.max(2);
    for i in 0..n {
        let x = BigRational::new((i as u64).into(), ((n - 1) as u64).into());
        if x > BigRational::one() {
            break;
        }
        if evaluate_exact(base, &x)? < evaluate_exact(without, &x)? {
            return Ok(false);
        }
    }
    Ok(true)
}
