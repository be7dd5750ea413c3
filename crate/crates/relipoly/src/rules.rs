//! Acceptance rules: predicates deciding whether a damaged graph still
//! operates. All built-in rules are coherent (adding an edge never turns an
//! accepted state into a rejected one), which the enumeration pipeline relies
//! on.

use std::collections::BTreeSet;
use std::fmt;

use num_rational::Ratio;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeSet, Graph};

pub type Alpha = Ratio<i64>;

/// Parses an exact rational from either a fraction string ("7/16") or a
/// decimal string ("0.4375", "1").
pub fn parse_alpha(text: &str) -> Result<Alpha> {
    let bad = |m: &str| Error::parameter(format!("alpha {text:?}: {m}"));
    let t = text.trim();
    let ratio = if let Some((num, den)) = t.split_once('/') {
        let n: i64 = num.trim().parse().map_err(|_| bad("bad numerator"))?;
        let d: i64 = den.trim().parse().map_err(|_| bad("bad denominator"))?;
        if d == 0 {
            return Err(bad("zero denominator"));
        }
        Ratio::new(n, d)
    } else if let Some((whole, frac)) = t.split_once('.') {
        if frac.len() > 18 || frac.chars().any(|c| !c.is_ascii_digit()) {
            return Err(bad("unsupported decimal"));
        }
        let w: i64 = if whole.is_empty() {
            0
        } else {
            whole.parse().map_err(|_| bad("bad integer part"))?
        };
        let scale = 10i64.pow(frac.len() as u32);
        let f: i64 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| bad("bad fractional part"))?
        };
        Ratio::new(w * scale + f, scale)
    } else {
        let w: i64 = t.parse().map_err(|_| bad("not a number"))?;
        Ratio::from_integer(w)
    };
    if !ratio.is_positive() || ratio > Ratio::from_integer(1) {
        return Err(bad("must lie in (0, 1]"));
    }
    Ok(ratio)
}

/// A fully resolved acceptance rule; vertex references are graph ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleSpec {
    /// Source and target lie in the same component.
    TwoTerminal { source: usize, target: usize },
    /// Every vertex lies in a component containing at least one terminal.
    KTerminal { terminals: BTreeSet<usize> },
    /// Exactly one component: the active subgraph spans the whole graph.
    AllTerminal,
    /// The largest component has at least ceil(alpha * V) vertices.
    ArAlpha { alpha: Alpha },
    /// The component-size vector pi satisfies sum(pi_i^2) >= alpha * V^2,
    /// compared exactly in integers.
    EarAlpha { alpha: Alpha },
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleSpec::TwoTerminal { source, target } => write!(f, "two_terminal({source},{target})"),
            RuleSpec::KTerminal { terminals } => {
                write!(f, "k_terminal(")?;
                for (i, t) in terminals.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            RuleSpec::AllTerminal => write!(f, "all_terminal"),
            RuleSpec::ArAlpha { alpha } => write!(f, "ar_alpha({alpha})"),
            RuleSpec::EarAlpha { alpha } => write!(f, "ear_alpha({alpha})"),
        }
    }
}

impl RuleSpec {
    pub fn two_terminal(source: usize, target: usize) -> Self {
        RuleSpec::TwoTerminal { source, target }
    }

    pub fn k_terminal(terminals: impl IntoIterator<Item = usize>) -> Self {
        RuleSpec::KTerminal {
            terminals: terminals.into_iter().collect(),
        }
    }

    pub fn ar_alpha(alpha: Alpha) -> Self {
        RuleSpec::ArAlpha { alpha }
    }

    pub fn ear_alpha(alpha: Alpha) -> Self {
        RuleSpec::EarAlpha { alpha }
    }

    /// Checks rule/graph compatibility. Call once at a pipeline boundary;
    /// `accepts` assumes a validated rule.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let v = g.vertex_count();
        match self {
            RuleSpec::TwoTerminal { source, target } => {
                if *source >= v || *target >= v {
                    return Err(Error::parameter(format!(
                        "terminal out of range for V={v}: {self}"
                    )));
                }
                if source == target {
                    return Err(Error::parameter("two_terminal needs distinct terminals"));
                }
            }
            RuleSpec::KTerminal { terminals } => {
                if terminals.is_empty() {
                    return Err(Error::parameter("k_terminal needs at least one terminal"));
                }
                if terminals.iter().any(|&t| t >= v) {
                    return Err(Error::parameter(format!(
                        "terminal out of range for V={v}: {self}"
                    )));
                }
            }
            RuleSpec::AllTerminal => {}
            RuleSpec::ArAlpha { alpha } | RuleSpec::EarAlpha { alpha } => {
                if !alpha.is_positive() || *alpha > Ratio::from_integer(1) {
                    return Err(Error::parameter("alpha must lie in (0, 1]"));
                }
            }
        }
        Ok(())
    }

    /// Decides acceptance of the subgraph selected by `active`.
    pub fn accepts(&self, g: &Graph, active: &EdgeSet) -> bool {
        let mut scratch = Scratch::new(g.vertex_count());
        self.accepts_mask(g, active.mask(), &mut scratch)
    }

    /// Mask-based hot path; `scratch` is reused across calls.
    pub fn accepts_mask(&self, g: &Graph, active: u128, scratch: &mut Scratch) -> bool {
        let mut rest = active;
        self.accepts_edges(
            g,
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let i = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i)
            }),
            scratch,
        )
    }

    /// Index-iterator path with no cap on E; used by the Monte Carlo sampler.
    pub fn accepts_edges(
        &self,
        g: &Graph,
        active: impl IntoIterator<Item = usize>,
        scratch: &mut Scratch,
    ) -> bool {
        let v = g.vertex_count();
        scratch.reset(v);
        for i in active {
            let (a, b) = g.edge(i);
            scratch.union(a, b);
        }
        match self {
            RuleSpec::TwoTerminal { source, target } => {
                scratch.find(*source) == scratch.find(*target)
            }
            RuleSpec::AllTerminal => scratch.component_count == 1,
            RuleSpec::KTerminal { terminals } => {
                scratch.flags.iter_mut().for_each(|f| *f = false);
                for &t in terminals {
                    let r = scratch.find(t);
                    scratch.flags[r] = true;
                }
                (0..v).all(|u| {
                    let r = scratch.find(u);
                    scratch.flags[r]
                })
            }
            RuleSpec::ArAlpha { alpha } => {
                // ceil(alpha * V) in exact integers.
                let (p, q) = (*alpha.numer() as i128, *alpha.denom() as i128);
                let threshold = (p * v as i128 + q - 1).div_euclid(q);
                scratch.max_component as i128 >= threshold
            }
            RuleSpec::EarAlpha { alpha } => {
                // sum(pi^2) >= alpha * V^2, cleared of denominators.
                let (p, q) = (*alpha.numer() as i128, *alpha.denom() as i128);
                q * scratch.sum_sq >= p * (v as i128) * (v as i128)
            }
        }
    }
}

/// Union-find workspace tracking component count, the largest component, and
/// the sum of squared component sizes incrementally.
#[derive(Debug, Clone)]
pub struct Scratch {
    parent: Vec<u32>,
    size: Vec<u32>,
    flags: Vec<bool>,
    component_count: usize,
    max_component: u32,
    sum_sq: i128,
}

impl Scratch {
    pub fn new(vertex_count: usize) -> Self {
        let mut s = Scratch {
            parent: Vec::new(),
            size: Vec::new(),
            flags: Vec::new(),
            component_count: 0,
            max_component: 0,
            sum_sq: 0,
        };
        s.reset(vertex_count);
        s
    }

    fn reset(&mut self, vertex_count: usize) {
        self.parent.clear();
        self.parent.extend(0..vertex_count as u32);
        self.size.clear();
        self.size.resize(vertex_count, 1);
        self.flags.clear();
        self.flags.resize(vertex_count, false);
        self.component_count = vertex_count;
        self.max_component = if vertex_count == 0 { 0 } else { 1 };
        self.sum_sq = vertex_count as i128;
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] as usize != x {
            let gp = self.parent[self.parent[x] as usize];
            self.parent[x] = gp;
            x = gp as usize;
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        let (sa, sb) = (self.size[ra] as i128, self.size[rb] as i128);
        self.sum_sq += 2 * sa * sb; // (sa+sb)^2 - sa^2 - sb^2
        self.parent[rb] = ra as u32;
        self.size[ra] += self.size[rb];
        self.component_count -= 1;
        self.max_component = self.max_component.max(self.size[ra]);
    }
}

/// JSON form of a rule; vertex references are labels resolved against a
/// graph, alpha is a decimal or fraction string.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleJson {
    TwoTerminal { source: String, target: String },
    KTerminal { terminals: Vec<String> },
    AllTerminal,
    ArAlpha { alpha: String },
    EarAlpha { alpha: String },
}

impl RuleJson {
    pub fn parse(text: &str) -> Result<RuleJson> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("rule json: {e}"),
        })
    }

    pub fn resolve(&self, g: &Graph) -> Result<RuleSpec> {
        let spec = match self {
            RuleJson::TwoTerminal { source, target } => RuleSpec::TwoTerminal {
                source: g.resolve_vertex(source)?,
                target: g.resolve_vertex(target)?,
            },
            RuleJson::KTerminal { terminals } => RuleSpec::KTerminal {
                terminals: terminals
                    .iter()
                    .map(|t| g.resolve_vertex(t))
                    .collect::<Result<_>>()?,
            },
            RuleJson::AllTerminal => RuleSpec::AllTerminal,
            RuleJson::ArAlpha { alpha } => RuleSpec::ArAlpha {
                alpha: parse_alpha(alpha)?,
            },
            RuleJson::EarAlpha { alpha } => RuleSpec::EarAlpha {
                alpha: parse_alpha(alpha)?,
            },
        };
        spec.validate(g)?;
        Ok(spec)
    }
}

/// A coherence counterexample: an accepted set whose single-edge superset is
/// rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Incoherence {
    pub accepted: EdgeSet,
    pub added_edge: usize,
}

/// Randomized coherence probe: samples `trials` uniform subsets and, for each
/// accepted one, verifies that every single-edge superset is accepted.
pub fn find_incoherence<F>(g: &Graph, accepts: F, trials: u32, seed: u64) -> Option<Incoherence>
where
    F: Fn(&EdgeSet) -> bool,
{
    let e = g.edge_count();
    assert!(e <= crate::graph::EDGE_MASK_CAP);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let full: u128 = if e == 128 { u128::MAX } else { (1u128 << e) - 1 };
    for _ in 0..trials {
        let mask = (rng.gen::<u128>()) & full;
        let set = EdgeSet::from_mask(mask);
        if !accepts(&set) {
            continue;
        }
        for i in 0..e {
            if set.contains(i) {
                continue;
            }
            let mut sup = set;
            sup.insert(i);
            if !accepts(&sup) {
                return Some(Incoherence {
                    accepted: set,
                    added_edge: i,
                });
            }
        }
    }
    None
}

/// Boolean wrapper around `find_incoherence` for a built-in rule.
pub fn is_coherent_witness(rule: &RuleSpec, g: &Graph, trials: u32, seed: u64) -> bool {
    find_incoherence(g, |s| rule.accepts(g, s), trials, seed).is_none()
}

/// Exhaustive coherence check for small graphs (2^E subsets).
pub fn find_incoherence_exhaustive<F>(g: &Graph, accepts: F) -> Option<Incoherence>
where
    F: Fn(&EdgeSet) -> bool,
{
    let e = g.edge_count();
    assert!(e <= 20, "exhaustive coherence check is for small graphs");
    for mask in 0..(1u128 << e) {
        let set = EdgeSet::from_mask(mask);
        if !accepts(&set) {
            continue;
        }
        for i in 0..e {
            if set.contains(i) {
                continue;
            }
            let mut sup = set;
            sup.insert(i);
            if !accepts(&sup) {
                return Some(Incoherence {
                    accepted: set,
                    added_edge: i,
                });
            }
        }
    }
    None
}
