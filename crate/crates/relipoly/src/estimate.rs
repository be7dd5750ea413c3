//! Ground truth and sampling: exhaustive subset counting for small graphs,
//! stratified Monte Carlo beyond that.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::poly::{binomial_f64, ln_binomial, CoefficientVector};
use crate::rules::{RuleSpec, Scratch};

/// Cap for the exhaustive 2^E walk.
pub const BRUTE_FORCE_EDGE_CAP: usize = 25;

/// Samples per RNG block. Fixed so that the per-block generators, and hence
/// the totals, do not depend on how work is split across threads.
const MC_BLOCK: u64 = 4096;

/// Exact R_k by walking all 2^E edge subsets. This is the oracle every other
/// exact pipeline is tested against; keep it free of shared machinery beyond
/// the rule predicate itself.
pub fn brute_force_rk(g: &Graph, rule: &RuleSpec) -> Result<CoefficientVector> {
    let e = g.edge_count();
    if e > BRUTE_FORCE_EDGE_CAP {
        return Err(Error::capacity(format!(
            "brute force walks 2^E subsets; E={e} exceeds {BRUTE_FORCE_EDGE_CAP}"
        )));
    }
    rule.validate(g)?;
    let mut counts = vec![0u64; e + 1];
    let mut scratch = Scratch::new(g.vertex_count());
    for mask in 0u64..(1u64 << e) {
        if rule.accepts_mask(g, mask as u128, &mut scratch) {
            counts[mask.count_ones() as usize] += 1;
        }
    }
    Ok(CoefficientVector::rk_from_u64(&counts))
}

/// Stratified Monte Carlo estimate of P_k = Pr(accepted | exactly k edges
/// operate), one stratum per k.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McEstimate {
    pub edge_count: usize,
    pub samples_per_k: u64,
    pub seed: u64,
    /// Accepted-sample counts per k; the integers actually reduced across
    /// workers.
    pub accepted: Vec<u64>,
    pub p_hat: Vec<f64>,
    /// Binomial standard error sqrt(p(1-p)/n) per k.
    pub std_err: Vec<f64>,
}

/// Estimates P_k for every k by uniform sampling of k-edge subsets.
///
/// Randomness is ChaCha12, keyed per block: the 32-byte generator seed packs
/// (seed, k, block index) as little-endian u64s. Work is split into
/// fixed-size blocks of `MC_BLOCK` samples, and the per-k totals are sums of
/// per-block integer counts, so results are bit-identical for every thread
/// count, including one.
pub fn monte_carlo_pk(g: &Graph, rule: &RuleSpec, samples_per_k: u64, seed: u64) -> Result<McEstimate> {
    if samples_per_k == 0 {
        return Err(Error::parameter("samples_per_k must be positive"));
    }
    rule.validate(g)?;
    let e = g.edge_count();

    let mut jobs = Vec::new();
    for k in 0..=e {
        let mut offset = 0u64;
        let mut block = 0u64;
        while offset < samples_per_k {
            let n = MC_BLOCK.min(samples_per_k - offset);
            jobs.push((k, block, n));
            block += 1;
            offset += n;
        }
    }

    let block_counts: Vec<(usize, u64)> = jobs
        .par_iter()
        .map(|&(k, block, n)| (k, sample_block(g, rule, k, block, n, seed)))
        .collect();

    let mut accepted = vec![0u64; e + 1];
    for (k, c) in block_counts {
        accepted[k] += c;
    }

    let n = samples_per_k as f64;
    let p_hat: Vec<f64> = accepted.iter().map(|&a| a as f64 / n).collect();
    let std_err = p_hat.iter().map(|&p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(McEstimate {
        edge_count: e,
        samples_per_k,
        seed,
        accepted,
        p_hat,
        std_err,
    })
}

fn block_rng(seed: u64, k: usize, block: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(k as u64).to_le_bytes());
    key[16..24].copy_from_slice(&block.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

fn sample_block(g: &Graph, rule: &RuleSpec, k: usize, block: u64, n: u64, seed: u64) -> u64 {
    let e = g.edge_count();
    let mut rng = block_rng(seed, k, block);
    let mut order: Vec<usize> = (0..e).collect();
    let mut scratch = Scratch::new(g.vertex_count());
    let mut hits = 0u64;
    for _ in 0..n {
        // Partial Fisher-Yates: after the first k swaps the prefix is a
        // uniform k-subset. Starting from the previous permutation keeps each
        // draw uniform, so no reset is needed.
        for i in 0..k {
            let j = rng.gen_range(i..e);
            order.swap(i, j);
        }
        if rule.accepts_edges(g, order[..k].iter().copied(), &mut scratch) {
            hits += 1;
        }
    }
    hits
}

/// Input for curve evaluation: exact coefficients or a Monte Carlo estimate.
pub enum CurveSource<'a> {
    Exact(&'a CoefficientVector),
    Estimate(&'a McEstimate),
}

/// Samples R(x) on a uniform grid over [0, 1] (inclusive endpoints).
pub fn reliability_curve(source: &CurveSource<'_>, grid_points: usize) -> Result<Vec<(f64, f64)>> {
    if grid_points < 2 {
        return Err(Error::parameter("grid needs at least 2 points"));
    }
    let mut out = Vec::with_capacity(grid_points);
    for i in 0..grid_points {
        let x = i as f64 / (grid_points - 1) as f64;
        let r = match source {
            CurveSource::Exact(v) => crate::poly::evaluate(v, x)?,
            CurveSource::Estimate(est) => mc_curve_point(est, x),
        };
        out.push((x, r));
    }
    Ok(out)
}

/// R(x) = sum_k C(E,k) p_hat_k x^k (1-x)^(E-k). Weights move to log space
/// once E is large enough for C(E,k) to overflow f64 comfortably.
fn mc_curve_point(est: &McEstimate, x: f64) -> f64 {
    let e = est.edge_count;
    if x <= 0.0 {
        return est.p_hat[0];
    }
    if x >= 1.0 {
        return est.p_hat[e];
    }
    let mut sum = 0.0;
    let mut comp = 0.0;
    for (k, &p) in est.p_hat.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let w = if e <= 60 {
            binomial_f64(e, k) * x.powi(k as i32) * (1.0 - x).powi((e - k) as i32)
        } else {
            (ln_binomial(e, k) + k as f64 * x.ln() + (e - k) as f64 * (1.0 - x).ln()).exp()
        };
        let term = w * p;
        // Kahan step.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_edge_list;
    use crate::graph::Graph;
    use num_bigint::BigInt;

    fn triangle() -> Graph {
        Graph::new(3, vec![(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    fn toy() -> Graph {
        parse_edge_list("S 1\n1 2\n2 T\nS 3\n3 5\n5 4\n4 T\n3 6\n6 4\n").unwrap()
    }

    #[test]
    fn triangle_all_terminal_counts() {
        let rk = brute_force_rk(&triangle(), &RuleSpec::AllTerminal).unwrap();
        assert_eq!(rk.to_bigints(), vec![0, 0, 3, 1].into_iter().map(BigInt::from).collect::<Vec<_>>());
    }

    #[test]
    fn toy_two_terminal_counts() {
        let g = toy();
        let rule = RuleSpec::two_terminal(
            g.resolve_vertex("S").unwrap(),
            g.resolve_vertex("T").unwrap(),
        );
        let rk = brute_force_rk(&g, &rule).unwrap();
        let expect: Vec<BigInt> = [0, 0, 0, 1, 8, 25, 39, 30, 9, 1]
            .into_iter()
            .map(BigInt::from)
            .collect();
        assert_eq!(rk.to_bigints(), expect);
    }

    #[test]
    fn disconnected_graph_never_accepts_all_terminal() {
        let g = Graph::new(4, vec![(0, 1), (2, 3)]).unwrap();
        let rk = brute_force_rk(&g, &RuleSpec::AllTerminal).unwrap();
        assert!(rk.to_bigints().iter().all(|c| c == &BigInt::from(0)));
    }

    #[test]
    fn brute_force_cap() {
        let edges: Vec<(usize, usize)> = (0..26).map(|i| (i, i + 1)).collect();
        let g = Graph::new(27, edges).unwrap();
        assert!(matches!(
            brute_force_rk(&g, &RuleSpec::AllTerminal),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn mc_is_deterministic_and_thread_invariant() {
        let g = toy();
        let rule = RuleSpec::two_terminal(
            g.resolve_vertex("S").unwrap(),
            g.resolve_vertex("T").unwrap(),
        );
        let a = monte_carlo_pk(&g, &rule, 10_000, 99).unwrap();
        let b = monte_carlo_pk(&g, &rule, 10_000, 99).unwrap();
        assert_eq!(a.accepted, b.accepted);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| monte_carlo_pk(&g, &rule, 10_000, 99).unwrap());
        assert_eq!(a.accepted, single.accepted);
        // Different seed, different stream.
        let c = monte_carlo_pk(&g, &rule, 10_000, 100).unwrap();
        assert_ne!(a.accepted, c.accepted);
    }

    #[test]
    fn mc_hits_degenerate_strata_exactly() {
        // On the triangle under all_terminal every 2-subset and the full set
        // are accepted, nothing smaller is.
        let est = monte_carlo_pk(&triangle(), &RuleSpec::AllTerminal, 2_000, 5).unwrap();
        assert_eq!(est.p_hat[0], 0.0);
        assert_eq!(est.p_hat[1], 0.0);
        assert_eq!(est.p_hat[2], 1.0);
        assert_eq!(est.p_hat[3], 1.0);
        assert_eq!(est.std_err[2], 0.0);
    }

    #[test]
    fn curve_endpoints_and_monotonicity() {
        let g = triangle();
        let rk = brute_force_rk(&g, &RuleSpec::AllTerminal).unwrap();
        let curve = reliability_curve(&CurveSource::Exact(&rk), 21).unwrap();
        assert_eq!(curve[0], (0.0, 0.0));
        assert_eq!(curve[20].1, 1.0);
        // R(1/2) = 3*(1/8) + 1*(1/8) = 1/2.
        assert!((curve[10].1 - 0.5).abs() < 1e-12);
        for w in curve.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }

    #[test]
    fn mc_curve_log_space_path_is_stable() {
        // Synthetic estimate with p_hat = 1 everywhere: the curve must be
        // exactly the binomial sum, i.e. 1, even for E > 60.
        let e = 200;
        let est = McEstimate {
            edge_count: e,
            samples_per_k: 1,
            seed: 0,
            accepted: vec![1; e + 1],
            p_hat: vec![1.0; e + 1],
            std_err: vec![0.0; e + 1],
        };
        for i in 1..10 {
            let x = i as f64 / 10.0;
            let r = mc_curve_point(&est, x);
            assert!((r - 1.0).abs() < 1e-9, "x={x} r={r}");
        }
    }
}
