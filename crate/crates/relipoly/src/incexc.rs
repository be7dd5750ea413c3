//! Inclusion-exclusion over motif unions.
//!
//! Every union of l motifs with exactly k edges contributes (-1)^(l+1) to
//! N_k. The table of raw counts N^(l)_k is built either by walking all 2^f
//! motif subsets (f <= [`NKL_FULL_MAX_F`]) or, when only the coefficients up
//! to some k_max matter, by growing unions in canonical motif order and
//! abandoning any partial union already past the bound. The collapse to N_k
//! has a third route for large families on small edge sets: a signed
//! distribution over union masks that needs f * 2^E steps instead of 2^f.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::EdgeSet;
use crate::motifs::MotifFamily;
use crate::poly::{
    self, closed_form_chain_overlap, closed_form_disjoint, evaluate, evaluate_exact,
    CoefficientVector, NklTable,
};

/// The full subset walk visits 2^f subsets; past this the caller must
/// truncate or use [`nk_exact`]'s mask distribution.
pub const NKL_FULL_MAX_F: usize = 20;

/// The union-mask distribution in [`nk_exact`] stores 2^E signed counters.
pub const DENSE_DP_MAX_E: usize = 20;

/// Which unions to enumerate: everything, or only those of at most k_max
/// edges, optionally capping the combination size l.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UnionEnumerationPlan {
    pub k_max: Option<usize>,
    pub l_max: Option<usize>,
}

impl UnionEnumerationPlan {
    pub fn full() -> Self {
        UnionEnumerationPlan { k_max: None, l_max: None }
    }

    pub fn truncated(k_max: usize) -> Self {
        UnionEnumerationPlan { k_max: Some(k_max), l_max: None }
    }

    pub fn run(&self, family: &MotifFamily) -> Result<NklTable> {
        let f = family.len();
        if self.k_max.is_none() && f > NKL_FULL_MAX_F {
            return Err(Error::capacity(format!(
                "full union enumeration walks 2^{f} subsets, past the 2^{NKL_FULL_MAX_F} cap; \
                 truncate with k_max to keep only the low-order coefficients"
            )));
        }
        let entries = walk_unions(family, self.k_max, self.l_max);
        NklTable::from_entries(family.edge_count(), f as u64, self.k_max, entries)
    }
}

/// Exact N^(l)_k for every l and k by walking all 2^f motif subsets.
pub fn nkl_full(family: &MotifFamily) -> Result<NklTable> {
    UnionEnumerationPlan::full().run(family)
}

/// Exact N^(l)_k for all k <= k_max. Unions only grow as motifs are added,
/// so abandoning a partial union past k_max loses nothing; every l whose
/// combinations fit under the bound is still covered in full.
pub fn nkl_truncated(family: &MotifFamily, k_max: usize) -> Result<NklTable> {
    UnionEnumerationPlan::truncated(k_max).run(family)
}

/// Each subset is visited once by growing its members in index order. The
/// first-motif strata are independent, so they walk in parallel and the
/// partial tables merge by addition.
fn walk_unions(
    family: &MotifFamily,
    k_max: Option<usize>,
    l_max: Option<usize>,
) -> BTreeMap<(usize, usize), u64> {
    let motifs = family.motifs();
    let bound = k_max.unwrap_or(usize::MAX);
    let depth = l_max.unwrap_or(usize::MAX);
    motifs
        .par_iter()
        .enumerate()
        .map(|(first, m)| {
            let mut local = BTreeMap::new();
            if m.size() <= bound {
                *local.entry((1, m.size())).or_insert(0) += 1;
                if depth > 1 {
                    grow_union(motifs, first + 1, *m, 2, bound, depth, &mut local);
                }
            }
            local
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (key, count) in b {
                *a.entry(key).or_insert(0) += count;
            }
            a
        })
}

fn grow_union(
    motifs: &[EdgeSet],
    start: usize,
    union: EdgeSet,
    l: usize,
    bound: usize,
    depth: usize,
    out: &mut BTreeMap<(usize, usize), u64>,
) {
    for (i, m) in motifs.iter().enumerate().skip(start) {
        let grown = union.union(m);
        let k = grown.size();
        if k > bound {
            continue;
        }
        *out.entry((l, k)).or_insert(0) += 1;
        if l < depth {
            grow_union(motifs, i + 1, grown, l + 1, bound, depth, out);
        }
    }
}

/// Alternating-sign collapse: N_k = sum_l (-1)^(l+1) N^(l)_k. A truncation
/// bound on the table carries over to the vector.
pub fn nk_from_table(table: &NklTable) -> CoefficientVector {
    let mut coeffs = vec![BigInt::zero(); table.edge_count() + 1];
    for (l, k, count) in table.entries() {
        if l % 2 == 1 {
            coeffs[k] += count;
        } else {
            coeffs[k] -= count;
        }
    }
    CoefficientVector::nk(coeffs).with_truncation(table.truncation_bound())
}

/// Exact untruncated N_k by whichever route fits: the 2^f subset walk for
/// small families, or the signed union-mask distribution for large families
/// on at most [`DENSE_DP_MAX_E`] edges.
pub fn nk_exact(family: &MotifFamily) -> Result<CoefficientVector> {
    if family.is_empty() {
        return Ok(CoefficientVector::nk(vec![
            BigInt::zero();
            family.edge_count() + 1
        ]));
    }
    if family.len() <= NKL_FULL_MAX_F {
        return Ok(nk_from_table(&nkl_full(family)?));
    }
    if family.edge_count() <= DENSE_DP_MAX_E {
        return Ok(union_mask_nk(family));
    }
    Err(Error::capacity(format!(
        "family has {} motifs on {} edges: too many for the 2^f walk and too wide for \
         the 2^E union-mask distribution; truncate or fall back to brute force",
        family.len(),
        family.edge_count()
    )))
}

/// Signed distribution over union masks. After processing motifs M_1..M_j,
/// s[U] holds sum over non-empty subsets T of them with union U of
/// (-1)^(|T|+1); adding motif M sends s[U] -> s[U] - sum_{U' | M = U} s[U']
/// plus one at U = M. Each entry satisfies |s[U]| <= 2^|U| (it is a Mobius
/// transform of a 0/1 indicator), so i64 never overflows at E <= 20.
fn union_mask_nk(family: &MotifFamily) -> CoefficientVector {
    let e = family.edge_count();
    let size = 1usize << e;
    let mut s = vec![0i64; size];
    for m in family.motifs() {
        let mm = m.mask() as usize;
        // Descending order keeps every read at the pre-update value: writes
        // only touch u | mm >= u, never an index still to be read.
        for u in (0..size).rev() {
            if s[u] != 0 {
                s[u | mm] -= s[u];
            }
        }
        s[mm] += 1;
    }
    let mut coeffs = vec![BigInt::zero(); e + 1];
    let mut sums = vec![0i64; e + 1];
    for (u, &v) in s.iter().enumerate() {
        if v != 0 {
            sums[u.count_ones() as usize] += v;
        }
    }
    for (k, &v) in sums.iter().enumerate() {
        coeffs[k] = BigInt::from(v);
    }
    CoefficientVector::nk(coeffs)
}

/// Comparison of two redundancy layouts spending the same edge budget
/// 2*r1 + k1 - 2: r1 heavily overlapping motifs of size k1 versus r2
/// completely disjoint motifs of size k2.
///
/// The overlapping family is reported twice. `overlap_stated` uses the
/// exponent pattern k1 + r1*(i-1) as printed in the source material; it is
/// not a union-structured polynomial and can exceed 1 on (0,1) when
/// r1 > k1. `overlap_chain` is the shared-core closed form
/// x^(k1-1) (1 - (1-x)^r1), which is a genuine reliability polynomial.
/// Differences are disjoint minus overlap, so a positive value means the
/// disjoint layout is more reliable.
#[derive(Debug, Clone, Serialize)]
pub struct TradeoffComparison {
    pub r1: usize,
    pub k1: usize,
    pub k2: usize,
    pub edge_budget: usize,
    /// (2*r1 + k1 - 2) / k2 as a reduced fraction, whatever r2 was used.
    pub r2_formula_num: u64,
    pub r2_formula_den: u64,
    pub r2_used: usize,
    pub r2_overridden: bool,
    pub overlap_stated: CoefficientVector,
    pub overlap_chain: CoefficientVector,
    pub disjoint: CoefficientVector,
    pub xs: Vec<f64>,
    pub overlap_stated_curve: Vec<f64>,
    pub overlap_chain_curve: Vec<f64>,
    pub disjoint_curve: Vec<f64>,
    pub difference_stated: Vec<f64>,
    pub difference_chain: Vec<f64>,
    pub sign_changes_stated: Vec<f64>,
    pub sign_changes_chain: Vec<f64>,
}

pub fn tradeoff_compare(
    r1: usize,
    k1: usize,
    k2: usize,
    r2_override: Option<usize>,
    grid_points: usize,
) -> Result<TradeoffComparison> {
    if r1 == 0 || k1 == 0 || k2 == 0 {
        return Err(Error::parameter("need r1, k1, k2 >= 1"));
    }
    if grid_points < 2 {
        return Err(Error::parameter("need at least 2 grid points"));
    }
    let edge_budget = 2 * r1 + k1 - 2;
    let g = gcd(edge_budget as u64, k2 as u64);
    let (num, den) = (edge_budget as u64 / g, k2 as u64 / g);
    let (r2_used, r2_overridden) = match r2_override {
        Some(r2) => (r2, true),
        None => {
            if den != 1 {
                return Err(Error::parameter(format!(
                    "k2={k2} does not divide the edge budget {edge_budget} \
                     (formula gives {num}/{den}); pass an explicit r2 to proceed"
                )));
            }
            (num as usize, false)
        }
    };
    if r2_used == 0 {
        return Err(Error::parameter("r2 must be at least 1"));
    }

    // Stated variant: exponents k1 + r1*(i-1) for i = 1..r1.
    let top = k1 + r1 * (r1 - 1);
    let mut stated = vec![BigInt::zero(); top + 1];
    for i in 1..=r1 {
        let c = poly::binomial(r1, i);
        stated[k1 + r1 * (i - 1)] = if i % 2 == 1 { c } else { -c };
    }
    let overlap_stated = CoefficientVector::nk(stated);
    let overlap_chain = closed_form_chain_overlap(r1, k1, k1 - 1 + r1)?;
    let disjoint = closed_form_disjoint(r2_used, k2, r2_used * k2)?;

    let n = grid_points;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let sample = |v: &CoefficientVector| -> Result<Vec<f64>> {
        xs.iter().map(|&x| evaluate(v, x)).collect()
    };
    let overlap_stated_curve = sample(&overlap_stated)?;
    let overlap_chain_curve = sample(&overlap_chain)?;
    let disjoint_curve = sample(&disjoint)?;
    let difference_stated: Vec<f64> = disjoint_curve
        .iter()
        .zip(&overlap_stated_curve)
        .map(|(a, b)| a - b)
        .collect();
    let difference_chain: Vec<f64> = disjoint_curve
        .iter()
        .zip(&overlap_chain_curve)
        .map(|(a, b)| a - b)
        .collect();

    let grid: Vec<BigRational> = (0..n)
        .map(|i| BigRational::new(BigInt::from(i), BigInt::from(n - 1)))
        .collect();
    let diff_exact = |other: &CoefficientVector| {
        let d = disjoint.clone();
        let o = other.clone();
        move |x: &BigRational| evaluate_exact(&d, x).unwrap() - evaluate_exact(&o, x).unwrap()
    };
    let sign_changes_stated = poly::refine_sign_changes(diff_exact(&overlap_stated), &grid, 1e-9)
        .into_iter()
        .map(|(x, _)| x)
        .collect();
    let sign_changes_chain = poly::refine_sign_changes(diff_exact(&overlap_chain), &grid, 1e-9)
        .into_iter()
        .map(|(x, _)| x)
        .collect();

    Ok(TradeoffComparison {
        r1,
        k1,
        k2,
        edge_budget,
        r2_formula_num: num,
        r2_formula_den: den,
        r2_used,
        r2_overridden,
        overlap_stated,
        overlap_chain,
        disjoint,
        xs,
        overlap_stated_curve,
        overlap_chain_curve,
        disjoint_curve,
        difference_stated,
        difference_chain,
        sign_changes_stated,
        sign_changes_chain,
    })
}

fn gcd(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}
