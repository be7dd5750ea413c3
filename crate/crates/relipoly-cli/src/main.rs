//! Command-line front end: wires edge-list files and rule flags into the
//! exact, truncated, and Monte Carlo reliability pipelines, emits JSON or
//! CSV, and bundles the regression targets behind `repro`.

mod repro;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relipoly::{
    brute_force_rk, check_constraints, closed_form_chain_overlap, closed_form_disjoint,
    edge_importance, enumerate_motifs, evaluate, importance_report, monte_carlo_pk, nk_exact,
    nk_from_table, nk_to_rk, nkl_full, nkl_truncated, parse_edge_list, reliability_curve,
    rk_to_pk, sparse_nk_solutions, tradeoff_compare,
    CoefficientVector, CurveSource, Error, Graph, Result, RuleJson, RuleSpec,
    BRUTE_FORCE_EDGE_CAP, DEFAULT_CROSSING_TOL,
};

#[derive(Parser, Debug)]
#[command(
    name = "relipoly",
    version,
    about = "Network reliability polynomials from minimal operating subgraphs"
)]
struct Cli {
    /// Worker threads for the parallel stages (fallback: RELIPOLY_THREADS).
    /// One thread is the reproducibility reference; results match any count.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate the minimal accepted subgraphs of a rule.
    Motifs {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        rule: RuleArgs,
        #[command(flatten)]
        out: OutArg,
    },
    /// Signed union counts N_k, by full or truncated inclusion-exclusion.
    Nk {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        rule: RuleArgs,
        /// Only count unions of at most this many edges.
        #[arg(long)]
        k_max: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Exact coefficients R_k (and the acceptance probabilities P_k).
    Rk {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        rule: RuleArgs,
        /// Only compute coefficients up to this index.
        #[arg(long)]
        k_max: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Monte Carlo estimate of the acceptance probabilities P_k.
    Mc {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        rule: RuleArgs,
        /// Samples per stratum k.
        #[arg(long)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// json or csv (k, p_hat, std_err rows).
        #[arg(long, default_value = "json")]
        format: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Reliability curve R(x) on a uniform grid, as CSV.
    Curve {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        rule: RuleArgs,
        #[arg(long, default_value_t = 201)]
        grid_points: usize,
        /// Estimate by sampling instead of the exact pipeline.
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Edge importance: per-edge curves, rankings, and ranking crossings.
    Importance {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        rule: RuleArgs,
        /// Report a single edge instead of the full ranking.
        #[arg(long)]
        edge: Option<usize>,
        /// Edge pair "a,b" to scan for crossings; repeatable.
        #[arg(long = "pair")]
        pairs: Vec<String>,
        /// Evaluation point for rankings; repeatable.
        #[arg(long = "at")]
        at: Vec<f64>,
        /// Scan every edge pair for ranking crossings.
        #[arg(long)]
        crossings: bool,
        #[arg(long, default_value_t = DEFAULT_CROSSING_TOL)]
        tol: f64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Compare one shared-overlap bundle against its edge-matched disjoint
    /// counterpart.
    Tradeoff {
        /// Motif count of the overlapping bundle.
        #[arg(long)]
        r1: usize,
        /// Motif size of the overlapping bundle.
        #[arg(long)]
        k1: usize,
        /// Motif size of the disjoint bundle.
        #[arg(long)]
        k2: usize,
        /// Disjoint motif count, overriding (2 r1 + k1 - 2) / k2.
        #[arg(long)]
        r2: Option<usize>,
        #[arg(long, default_value_t = 201)]
        grid_points: usize,
        /// json or csv (x and the three curves).
        #[arg(long, default_value = "json")]
        format: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Verify the combination-count identities and bounds for a family.
    Constraints {
        #[command(flatten)]
        graph: GraphArg,
        #[command(flatten)]
        rule: RuleArgs,
        /// Check a truncated table (bounds only).
        #[arg(long)]
        k_max: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Closed-form coefficient vectors for the textbook families.
    ClosedForm {
        /// disjoint | chain | sparse.
        #[arg(long)]
        variant: String,
        /// Motif count.
        #[arg(long)]
        m: usize,
        /// Motif size.
        #[arg(long)]
        k0: usize,
        /// Total edge count (disjoint, chain).
        #[arg(long)]
        edges: Option<usize>,
        /// Second support point (sparse).
        #[arg(long)]
        k1: Option<usize>,
        /// Third support point (sparse, m >= 3).
        #[arg(long)]
        k2: Option<usize>,
        #[command(flatten)]
        out: OutArg,
    },
    /// Re-run a bundled regression target and diff against its expected
    /// values: table1 | table2 | fig3poly | fig4curves | fig5tradeoff |
    /// crossing618.
    Repro {
        #[arg(long)]
        target: String,
        /// Where to write the target's data artifact (CSV or JSON).
        #[command(flatten)]
        out: OutArg,
    },
}

#[derive(Args, Debug)]
struct GraphArg {
    /// Edge-list file: one edge per line, two vertex labels, # comments.
    #[arg(long)]
    graph: PathBuf,
}

impl GraphArg {
    fn load(&self) -> Result<Graph> {
        parse_edge_list(&std::fs::read_to_string(&self.graph)?)
    }
}

#[derive(Args, Debug)]
struct RuleArgs {
    /// two_terminal | k_terminal | all_terminal | ar_alpha | ear_alpha.
    #[arg(long, conflicts_with = "rule_json")]
    rule: Option<String>,
    /// Source vertex label (two_terminal).
    #[arg(long)]
    source: Option<String>,
    /// Target vertex label (two_terminal).
    #[arg(long)]
    target: Option<String>,
    /// Comma-separated terminal labels (k_terminal).
    #[arg(long)]
    terminals: Option<String>,
    /// Component threshold as a decimal or fraction (ar_alpha, ear_alpha).
    #[arg(long)]
    alpha: Option<String>,
    /// Whole rule as JSON, e.g. {"rule":"two_terminal","source":"S","target":"T"}.
    #[arg(long)]
    rule_json: Option<String>,
}

impl RuleArgs {
    fn resolve(&self, g: &Graph) -> Result<RuleSpec> {
        if let Some(text) = &self.rule_json {
            return RuleJson::parse(text)?.resolve(g);
        }
        let kind = self
            .rule
            .as_deref()
            .ok_or_else(|| Error::parameter("missing --rule (or --rule-json)"))?;
        let req = |field: &Option<String>, name: &str| -> Result<String> {
            field
                .clone()
                .ok_or_else(|| Error::parameter(format!("rule {kind} needs {name}")))
        };
        let json = match kind {
            "two_terminal" => RuleJson::TwoTerminal {
                source: req(&self.source, "--source")?,
                target: req(&self.target, "--target")?,
            },
            "k_terminal" => RuleJson::KTerminal {
                terminals: req(&self.terminals, "--terminals")?
                    .split(',')
                    .map(|s| s.trim().to_string())
                    .collect(),
            },
            "all_terminal" => RuleJson::AllTerminal,
            "ar_alpha" => RuleJson::ArAlpha {
                alpha: req(&self.alpha, "--alpha")?,
            },
            "ear_alpha" => RuleJson::EarAlpha {
                alpha: req(&self.alpha, "--alpha")?,
            },
            other => {
                return Err(Error::parameter(format!(
                    "unknown rule kind {other}; expected two_terminal, k_terminal, \
                     all_terminal, ar_alpha, or ear_alpha"
                )))
            }
        };
        json.resolve(g)
    }
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArg {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
        Ok(())
    }
}

fn json_text(value: &serde_json::Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

/// Exact R_k via the motif pipeline, with a brute-force fallback when the
/// union stage is over capacity but direct subset counting is not.
fn exact_rk(g: &Graph, rule: &RuleSpec) -> Result<CoefficientVector> {
    let attempt = enumerate_motifs(g, rule).and_then(|family| nk_exact(&family));
    match attempt {
        Ok(nk) => nk_to_rk(&nk),
        Err(Error::Capacity(_)) if g.edge_count() <= BRUTE_FORCE_EDGE_CAP => {
            brute_force_rk(g, rule)
        }
        Err(e) => Err(e),
    }
}

fn parse_pair(text: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::parameter(format!("--pair wants \"a,b\", got {text:?}")));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::parameter(format!("bad edge index {s:?}")))
    };
    Ok((parse(parts[0])?, parse(parts[1])?))
}

fn run(cli: Cli) -> Result<ExitCode> {
    let threads = match cli.threads {
        Some(n) => Some(n),
        None => match std::env::var("RELIPOLY_THREADS") {
            Ok(v) => Some(v.parse::<usize>().map_err(|_| {
                Error::parameter(format!("RELIPOLY_THREADS={v} is not a thread count"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(Error::parameter("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::parameter(format!("thread pool: {e}")))?;
    }

    match cli.command {
        Command::Motifs { graph, rule, out } => {
            let g = graph.load()?;
            let rule = rule.resolve(&g)?;
            let family = enumerate_motifs(&g, &rule)?;
            eprintln!(
                "{} motifs of sizes {:?} under {rule}",
                family.len(),
                family.size_counts()
            );
            out.emit(&json_text(&serde_json::to_value(&family).unwrap()))?;
        }
        Command::Nk {
            graph,
            rule,
            k_max,
            out,
        } => {
            let g = graph.load()?;
            let rule = rule.resolve(&g)?;
            let family = enumerate_motifs(&g, &rule)?;
            let (table, nk) = match k_max {
                Some(bound) => {
                    let table = nkl_truncated(&family, bound)?;
                    let nk = nk_from_table(&table);
                    (Some(table), nk)
                }
                None => match nkl_full(&family) {
                    Ok(table) => {
                        let nk = nk_from_table(&table);
                        (Some(table), nk)
                    }
                    // The dense route still gets exact N_k when the subset
                    // walk would not finish; it produces no overlap table.
                    Err(Error::Capacity(_)) => (None, nk_exact(&family)?),
                    Err(e) => return Err(e),
                },
            };
            eprintln!(
                "N over {} motifs{}",
                family.len(),
                match k_max {
                    Some(b) => format!(", truncated at k = {b}"),
                    None => String::new(),
                }
            );
            out.emit(&json_text(&serde_json::json!({
                "rule": rule.to_string(),
                "motif_count": family.len(),
                "table": table,
                "nk": nk,
            })))?;
        }
        Command::Rk {
            graph,
            rule,
            k_max,
            out,
        } => {
            let g = graph.load()?;
            let rule = rule.resolve(&g)?;
            let (rk, pk) = match k_max {
                Some(bound) => {
                    let family = enumerate_motifs(&g, &rule)?;
                    let nk = nk_from_table(&nkl_truncated(&family, bound)?);
                    let rk = nk_to_rk(&nk)?;
                    (rk, None)
                }
                None => {
                    let rk = exact_rk(&g, &rule)?;
                    let pk = rk_to_pk(&rk)?;
                    (rk, Some(pk))
                }
            };
            eprintln!("R coefficients for {rule} over E = {}", g.edge_count());
            out.emit(&json_text(&serde_json::json!({
                "rule": rule.to_string(),
                "rk": rk,
                "pk": pk,
            })))?;
        }
        Command::Mc {
            graph,
            rule,
            samples,
            seed,
            format,
            out,
        } => {
            let g = graph.load()?;
            let rule = rule.resolve(&g)?;
            let est = monte_carlo_pk(&g, &rule, samples, seed)?;
            eprintln!(
                "estimated {} strata with {samples} samples each, seed {seed}",
                est.p_hat.len()
            );
            match format.as_str() {
                "json" => out.emit(&json_text(&serde_json::to_value(&est).unwrap()))?,
                "csv" => {
                    let mut text = String::from("k,p_hat,std_err\n");
                    for k in 0..est.p_hat.len() {
                        text.push_str(&format!("{k},{},{}\n", est.p_hat[k], est.std_err[k]));
                    }
                    out.emit(&text)?;
                }
                other => return Err(Error::parameter(format!("unknown format {other}"))),
            }
        }
        Command::Curve {
            graph,
            rule,
            grid_points,
            samples,
            seed,
            out,
        } => {
            let g = graph.load()?;
            let rule = rule.resolve(&g)?;
            let points = match samples {
                Some(n) => {
                    let est = monte_carlo_pk(&g, &rule, n, seed)?;
                    reliability_curve(&CurveSource::Estimate(&est), grid_points)?
                }
                None => {
                    let rk = exact_rk(&g, &rule)?;
                    reliability_curve(&CurveSource::Exact(&rk), grid_points)?
                }
            };
            eprintln!("{} curve points for {rule}", points.len());
            let mut text = String::from("x,R\n");
            for (x, r) in points {
                text.push_str(&format!("{x},{r}\n"));
            }
            out.emit(&text)?;
        }
        Command::Importance {
            graph,
            rule,
            edge,
            pairs,
            at,
            crossings,
            tol,
            out,
        } => {
            let g = graph.load()?;
            let rule = rule.resolve(&g)?;
            if let Some(e) = edge {
                let (base, without) = edge_importance(&g, &rule, e)?;
                let at_values: Vec<serde_json::Value> = at
                    .iter()
                    .map(|&x| -> Result<serde_json::Value> {
                        let value = evaluate(&base, x)? - evaluate(&without, x)?;
                        Ok(serde_json::json!({"x": x, "importance": value}))
                    })
                    .collect::<Result<_>>()?;
                eprintln!("importance of edge {e} under {rule}");
                out.emit(&json_text(&serde_json::json!({
                    "edge": e,
                    "base": base,
                    "without": without,
                    "at": at_values,
                })))?;
            } else {
                let mut pair_list: Vec<(usize, usize)> = pairs
                    .iter()
                    .map(|p| parse_pair(p))
                    .collect::<Result<_>>()?;
                if crossings && pair_list.is_empty() {
                    for a in 0..g.edge_count() {
                        for b in a + 1..g.edge_count() {
                            pair_list.push((a, b));
                        }
                    }
                }
                let report = importance_report(&g, &rule, &at, &pair_list, tol)?;
                eprintln!(
                    "ranked {} edges at {} points, scanned {} pairs",
                    g.edge_count(),
                    at.len(),
                    pair_list.len()
                );
                out.emit(&json_text(&serde_json::to_value(&report).unwrap()))?;
            }
        }
        Command::Tradeoff {
            r1,
            k1,
            k2,
            r2,
            grid_points,
            format,
            out,
        } => {
            let cmp = tradeoff_compare(r1, k1, k2, r2, grid_points)?;
            eprintln!(
                "overlap bundle ({r1} motifs of {k1}) against {} disjoint motifs of {k2} on {} edges",
                cmp.r2_used, cmp.edge_budget
            );
            match format.as_str() {
                "json" => out.emit(&json_text(&serde_json::to_value(&cmp).unwrap()))?,
                "csv" => {
                    let mut text = String::from("x,overlap_stated,overlap_chain,disjoint\n");
                    for i in 0..cmp.xs.len() {
                        text.push_str(&format!(
                            "{},{},{},{}\n",
                            cmp.xs[i],
                            cmp.overlap_stated_curve[i],
                            cmp.overlap_chain_curve[i],
                            cmp.disjoint_curve[i]
                        ));
                    }
                    out.emit(&text)?;
                }
                other => return Err(Error::parameter(format!("unknown format {other}"))),
            }
        }
        Command::Constraints {
            graph,
            rule,
            k_max,
            out,
        } => {
            let g = graph.load()?;
            let rule = rule.resolve(&g)?;
            let family = enumerate_motifs(&g, &rule)?;
            let table = match k_max {
                Some(bound) => nkl_truncated(&family, bound)?,
                None => nkl_full(&family)?,
            };
            let nk = nk_from_table(&table);
            let report = check_constraints(&table, &nk)?;
            let pass = report.all_pass;
            eprintln!(
                "{} identity checks and {} bounds, {}",
                report.stratum_sums.len()
                    + report.nk_sum.is_some() as usize
                    + report.signed_mass.is_some() as usize,
                report.upper_bounds.len(),
                if pass { "all hold" } else { "FAILED" }
            );
            out.emit(&json_text(&serde_json::to_value(&report).unwrap()))?;
            if !pass {
                return Err(Error::Constraint("identity checks failed".into()));
            }
        }
        Command::ClosedForm {
            variant,
            m,
            k0,
            edges,
            k1,
            k2,
            out,
        } => {
            let nk = match variant.as_str() {
                "disjoint" => {
                    let e = edges.unwrap_or(m * k0);
                    closed_form_disjoint(m, k0, e)?
                }
                "chain" => {
                    let e = edges.unwrap_or(k0 - 1 + m);
                    closed_form_chain_overlap(m, k0, e)?
                }
                "sparse" => {
                    let k1 = k1.ok_or_else(|| Error::parameter("sparse needs --k1"))?;
                    sparse_nk_solutions(m, k0, k1, k2)?
                }
                other => {
                    return Err(Error::parameter(format!(
                        "unknown variant {other}; expected disjoint, chain, or sparse"
                    )))
                }
            };
            let rk = nk_to_rk(&nk)?;
            eprintln!("{variant} family, {m} motifs of size {k0}");
            out.emit(&json_text(&serde_json::json!({
                "variant": variant,
                "nk": nk,
                "rk": rk,
            })))?;
        }
        Command::Repro { target, out } => {
            let passed = repro::run(&target, &out)?;
            if !passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Parse { .. } | Error::SelfLoop { .. } => 3,
        Error::Capacity(_) => 4,
        Error::Constraint(_) => 5,
        Error::Io(_) => 6,
        Error::Parameter(_) | Error::Domain(_) => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
