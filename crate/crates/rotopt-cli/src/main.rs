//! Batch front door: parse a system spec file, dispatch one computation,
//! emit a machine-readable document on stdout. Diagnostics go to stderr as
//! JSON objects {code, message, context}; exit code 2 flags infeasible
//! queries, 1 malformed input or internal failures.

mod check;
mod report;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use rotopt::rational::{format_rational, parse_rational, Rational};
use rotopt::sft::{format_word, parse_word};
use rotopt::{
    alpha_with_witness, beta_alpha, io, measure, periodic, subaction, Error, LpStatus,
    PeriodicStatus, RotationSetMode, WeightedDigraph,
};

use report::{
    format_rationals, measure_doc, orbit_doc, print_csv, print_json, AlphaDoc, BetaDoc,
    GradientDoc, PeriodicDoc, RotationSetDoc, SubactionDoc, SupportSampleDoc, TrajectoryDoc,
};

#[derive(Parser)]
#[command(name = "rotopt", version, about = "Rotation sets, beta/alpha functions, sub-actions \
and periodic approximations on subshifts of finite type")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Csv,
}

#[derive(Args)]
struct Common {
    /// System spec JSON file
    #[arg(long)]
    spec: PathBuf,
    /// Output format (curves and error sequences support csv)
    #[arg(long, value_enum, default_value = "json")]
    output: Output,
    /// Worker threads for sweeps
    #[arg(long, env = "ROTOPT_THREADS")]
    threads: Option<usize>,
    /// Seed for sampled directions and generated perturbations
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// Rotation set: exact rational polygon (n <= 2) plus support samples
    RotationSet {
        #[command(flatten)]
        common: Common,
        /// Defaults to exact for n <= 2 (with sampled fallback), sampled above
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Number of sampled support directions
        #[arg(long, default_value_t = 64)]
        directions: usize,
    },
    /// beta(h): constrained maximum with measure and dual multipliers
    Beta {
        #[command(flatten)]
        common: Common,
        /// Rotation vector, e.g. "1/2" or "1/2,1/3"
        #[arg(long)]
        h: String,
        /// Also run the cutting-plane dual route (interior h only)
        #[arg(long)]
        dual: bool,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
    },
    /// alpha(c): minimum of <c,phi> - A over invariant measures
    Alpha {
        #[command(flatten)]
        common: Common,
        /// Direction, e.g. "0.5" or "0.5,-1"
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        c: Vec<f64>,
    },
    /// beta over a grid of the rotation interval (scalar constraints)
    BetaCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
    /// alpha over a grid of directions (scalar constraints)
    AlphaCurve {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        from: f64,
        #[arg(long, allow_hyphen_values = true)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        grid: usize,
    },
    /// Calibrated sub-action of the weight a - <c, phi> (c defaults to 0)
    Subaction {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        c: Option<Vec<f64>>,
        /// Contact-locus tolerance
        #[arg(long, default_value_t = 1e-9)]
        locus_tol: f64,
    },
    /// Optimal backward trajectory from a vertex word; csv output emits the
    /// running-mean error sequence (k, error) against the differential
    Trajectory {
        #[command(flatten)]
        common: Common,
        /// Start vertex word, e.g. "0" or "0,1" for two-block graphs
        #[arg(long)]
        x0: String,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        c: Option<Vec<f64>>,
    },
    /// Best periodic orbit with rotation vector exactly r
    Periodic {
        #[command(flatten)]
        common: Common,
        /// Target rotation vector, e.g. "1/2" or "1/3,0/1"
        #[arg(long)]
        r: String,
        /// Maximum period
        #[arg(long, default_value_t = 50)]
        k: usize,
        #[arg(long)]
        state_cap: Option<u128>,
        /// Also report the beta gap per period
        #[arg(long)]
        gaps: bool,
    },
    /// Run the invariant suites over the spec plus seeded perturbations
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20)]
        cases: usize,
    },
}

struct Failure {
    code: &'static str,
    message: String,
    context: serde_json::Value,
    exit: u8,
}

impl Failure {
    fn new(code: &'static str, message: impl Into<String>, exit: u8) -> Self {
        Failure { code, message: message.into(), context: json!({}), exit }
    }

    fn with_context(mut self, context: serde_json::Value) -> Self {
        self.context = context;
        self
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, exit) = match &e {
            Error::InvalidSpec { .. } => ("invalid_spec", 1),
            Error::WordNotAllowed { .. } => ("word_not_allowed", 1),
            Error::DimensionMismatch { .. } => ("dimension_mismatch", 1),
            Error::SpecMismatch => ("spec_mismatch", 1),
            Error::NoCycle => ("no_cycle", 1),
            Error::NotTransitive => ("not_transitive", 1),
            Error::CycleCapExceeded { .. } => ("cycle_cap_exceeded", 1),
            Error::MalformedCycle { .. } => ("malformed_cycle", 1),
            Error::MeasureInvariant { .. } => ("measure_invariant", 1),
            Error::InfeasibleH => ("infeasible_h", 2),
            Error::NotInterior => ("not_interior", 1),
            Error::MaxIters { .. } => ("max_iters", 1),
            Error::ExactModeUnavailable { .. } => ("exact_mode_unavailable", 1),
            Error::NotStronglyConnected => ("not_strongly_connected", 1),
            Error::DegenerateRotationSet => ("degenerate_rotation_set", 1),
            Error::ParseRational { .. } => ("parse_rational", 1),
            Error::Json(_) => ("malformed_json", 1),
            Error::Io(_) => ("io", 1),
            Error::Internal(_) => ("internal", 1),
        };
        Failure::new(code, e.to_string(), exit)
    }
}

fn parse_rational_list(s: &str) -> Result<Vec<Rational>, Failure> {
    s.split(',')
        .map(|part| parse_rational(part).map_err(Failure::from))
        .collect()
}

fn require_dim(graph: &WeightedDigraph, len: usize) -> Result<(), Failure> {
    if graph.dim() != len {
        return Err(Failure::new(
            "dimension_mismatch",
            format!("expected {} coordinates, found {}", graph.dim(), len),
            1,
        ));
    }
    Ok(())
}

fn load(common: &Common) -> Result<(io::System, WeightedDigraph), Failure> {
    let system = io::read_system(&common.spec)?;
    let graph = system.graph()?;
    Ok((system, graph))
}

fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    builder
        .build()
        .map_err(|e| Failure::new("internal", format!("thread pool: {e}"), 1))
}

fn csv_float(v: f64) -> String {
    format!("{v}")
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::RotationSet { common, mode, directions } => {
            let (_, graph) = load(&common)?;
            let sampled = || {
                RotationSetMode::SupportSampled(beta_alpha::default_directions(
                    graph.dim(),
                    directions,
                    common.seed,
                ))
            };
            let set = match mode {
                Some(ModeArg::Exact) => beta_alpha::rotation_set(&graph, RotationSetMode::Exact)?,
                Some(ModeArg::Sampled) => beta_alpha::rotation_set(&graph, sampled())?,
                None => {
                    if graph.dim() <= 2 {
                        match beta_alpha::rotation_set(&graph, RotationSetMode::Exact) {
                            Ok(set) => set,
                            Err(Error::CycleCapExceeded { .. }) => {
                                beta_alpha::rotation_set(&graph, sampled())?
                            }
                            Err(e) => return Err(e.into()),
                        }
                    } else {
                        beta_alpha::rotation_set(&graph, sampled())?
                    }
                }
            };
            print_json(&RotationSetDoc {
                dim: set.dim,
                exact: set.exact,
                vertices: set
                    .exact_polygon
                    .map(|hull| hull.iter().map(|v| format_rationals(v)).collect()),
                support_samples: set
                    .support_samples
                    .iter()
                    .map(|s| SupportSampleDoc {
                        direction: s.direction.clone(),
                        value: s.value,
                        witness_rotation: format_rationals(&s.witness_rotation),
                    })
                    .collect(),
            });
            Ok(0)
        }
        Command::Beta { common, h, dual, tol, max_iters } => {
            let (_, graph) = load(&common)?;
            let h = parse_rational_list(&h)?;
            require_dim(&graph, h.len())?;
            let sol = measure::solve_beta_primal(&graph, &h)?;
            if sol.status == LpStatus::Infeasible {
                return Err(Failure::from(Error::InfeasibleH).with_context(json!({
                    "h": h.iter().map(format_rational).collect::<Vec<_>>(),
                })));
            }
            let beta_dual = if dual {
                Some(beta_alpha::beta_dual(&graph, &h, tol, max_iters)?)
            } else {
                None
            };
            print_json(&BetaDoc {
                h: h.iter().map(format_rational).collect(),
                beta: sol.value,
                dual_multipliers: sol.dual_multipliers.clone(),
                measure: measure_doc(&graph, sol.measure.as_ref().expect("optimal")),
                beta_dual,
            });
            Ok(0)
        }
        Command::Alpha { common, c } => {
            let (_, graph) = load(&common)?;
            require_dim(&graph, c.len())?;
            let (value, witness) = alpha_with_witness(&graph, &c);
            let (gradient, unique) = beta_alpha::alpha_gradient(&graph, &c)?;
            print_json(&AlphaDoc {
                c,
                alpha: value,
                witness: orbit_doc(&graph, &witness),
                gradient: GradientDoc { vector: format_rationals(&gradient), unique },
            });
            Ok(0)
        }
        Command::BetaCurve { common, grid } => {
            let (_, graph) = load(&common)?;
            require_dim(&graph, 1)?;
            let (lo, hi) = beta_alpha::rotation_interval(&graph);
            let points: Vec<Rational> = if grid == 0 {
                Vec::new()
            } else if grid == 1 {
                vec![lo]
            } else {
                (0..grid)
                    .map(|i| {
                        &lo + (&hi - &lo)
                            * Rational::new((i as i64).into(), ((grid - 1) as i64).into())
                    })
                    .collect()
            };
            let pool = thread_pool(common.threads)?;
            let values: Vec<Option<f64>> = pool.install(|| {
                use rayon::prelude::*;
                points
                    .par_iter()
                    .map(|h| {
                        let sol = measure::solve_beta_primal(&graph, std::slice::from_ref(h))
                            .expect("LP runs");
                        match sol.status {
                            LpStatus::Optimal => Some(sol.value),
                            LpStatus::Infeasible => None,
                        }
                    })
                    .collect()
            });
            match common.output {
                Output::Csv => print_csv(
                    "h,beta",
                    points.iter().zip(&values).map(|(h, v)| {
                        format!(
                            "{},{}",
                            format_rational(h),
                            v.map(csv_float).unwrap_or_default()
                        )
                    }),
                ),
                Output::Json => {
                    let rows: Vec<serde_json::Value> = points
                        .iter()
                        .zip(&values)
                        .map(|(h, v)| json!({"h": format_rational(h), "beta": v}))
                        .collect();
                    print_json(&json!({ "points": rows }));
                }
            }
            Ok(0)
        }
        Command::AlphaCurve { common, from, to, grid } => {
            let (_, graph) = load(&common)?;
            require_dim(&graph, 1)?;
            let points: Vec<f64> = if grid == 0 {
                Vec::new()
            } else if grid == 1 {
                vec![from]
            } else {
                (0..grid)
                    .map(|i| from + (to - from) * i as f64 / (grid - 1) as f64)
                    .collect()
            };
            let pool = thread_pool(common.threads)?;
            let values: Vec<f64> = pool.install(|| {
                use rayon::prelude::*;
                points.par_iter().map(|&c| beta_alpha::alpha(&graph, &[c])).collect()
            });
            match common.output {
                Output::Csv => print_csv(
                    "c,alpha",
                    points
                        .iter()
                        .zip(&values)
                        .map(|(c, v)| format!("{},{}", csv_float(*c), csv_float(*v))),
                ),
                Output::Json => {
                    let rows: Vec<serde_json::Value> = points
                        .iter()
                        .zip(&values)
                        .map(|(c, v)| json!({"c": c, "alpha": v}))
                        .collect();
                    print_json(&json!({ "points": rows }));
                }
            }
            Ok(0)
        }
        Command::Subaction { common, c, locus_tol } => {
            let (_, graph) = load(&common)?;
            let c = c.unwrap_or_else(|| vec![0.0; graph.dim()]);
            require_dim(&graph, c.len())?;
            let weight = graph.tilted_weights(&c);
            let sub = subaction::calibrated_subaction(&graph, &weight)?;
            let edge_words = |edges: &[usize]| -> Vec<String> {
                edges.iter().map(|&e| format_word(&graph.edge_word(e))).collect()
            };
            let mut u = BTreeMap::new();
            for v in 0..graph.vertex_count() {
                u.insert(format_word(graph.vertex_word(v)), sub.u()[v]);
            }
            print_json(&SubactionDoc {
                eigenvalue: sub.eigenvalue(),
                u,
                critical_edges: edge_words(sub.critical_edges()),
                contact_locus: edge_words(&subaction::contact_locus(&graph, &sub, locus_tol)),
            });
            Ok(0)
        }
        Command::Trajectory { common, x0, steps, c } => {
            let (_, graph) = load(&common)?;
            let c = c.unwrap_or_else(|| vec![0.0; graph.dim()]);
            require_dim(&graph, c.len())?;
            let word = parse_word(&x0)?;
            let start = graph.vertex_index(&word).ok_or_else(|| {
                Failure::new(
                    "word_not_allowed",
                    format!("'{x0}' is not a vertex of the {}-block graph", graph.block_len()),
                    1,
                )
            })?;
            match common.output {
                Output::Csv => {
                    let check = subaction::verify_alpha_differential(&graph, &c, steps, start)?;
                    print_csv(
                        "k,error",
                        check
                            .errors
                            .iter()
                            .enumerate()
                            .map(|(i, e)| format!("{},{}", i + 1, csv_float(*e))),
                    );
                }
                Output::Json => {
                    let weight = graph.tilted_weights(&c);
                    let sub = subaction::calibrated_subaction(&graph, &weight)?;
                    let traj = subaction::optimal_trajectory(&graph, &sub, start, steps);
                    print_json(&TrajectoryDoc {
                        x0: format_word(&word),
                        steps,
                        vertices: traj
                            .vertices
                            .iter()
                            .map(|&v| format_word(graph.vertex_word(v)))
                            .collect(),
                        final_phi_mean: traj
                            .running_phi_means
                            .last()
                            .map(|m| format_rationals(m))
                            .unwrap_or_default(),
                        final_potential_mean: traj.running_a_means.last().copied().unwrap_or(0.0),
                    });
                }
            }
            Ok(0)
        }
        Command::Periodic { common, r, k, state_cap, gaps } => {
            let (_, graph) = load(&common)?;
            let r = parse_rational_list(&r)?;
            require_dim(&graph, r.len())?;
            let mut query = periodic::PeriodicQuery::new(r.clone(), k);
            if let Some(cap) = state_cap {
                query.state_cap = cap;
            }
            let result = periodic::best_periodic_with_rotation(&graph, &query)?;
            match result.status {
                PeriodicStatus::InfeasibleR => {
                    return Err(Failure::new(
                        "infeasible_r",
                        "target rotation vector lies outside the rotation set",
                        2,
                    )
                    .with_context(json!({
                        "r": r.iter().map(format_rational).collect::<Vec<_>>(),
                    })));
                }
                PeriodicStatus::CapExceeded => {
                    return Err(Failure::new(
                        "state_cap_exceeded",
                        "periodic search needs more DP states than the cap allows",
                        1,
                    )
                    .with_context(json!({
                        "states_needed": result.states_needed.map(|s| s.to_string()),
                        "state_cap": query.state_cap.to_string(),
                    })));
                }
                PeriodicStatus::Found | PeriodicStatus::NotFoundUpToK => {}
            }
            let gap_column = if gaps {
                let sol = measure::solve_beta_primal(&graph, &r)?;
                if sol.status == LpStatus::Infeasible {
                    return Err(Failure::from(Error::InfeasibleH));
                }
                let mut best = f64::NEG_INFINITY;
                Some(
                    result
                        .by_period
                        .iter()
                        .map(|v| {
                            if let Some(x) = v {
                                best = best.max(*x);
                            }
                            (best > f64::NEG_INFINITY).then(|| sol.value - best)
                        })
                        .collect::<Vec<_>>(),
                )
            } else {
                None
            };
            print_json(&PeriodicDoc {
                status: match result.status {
                    PeriodicStatus::Found => "found",
                    PeriodicStatus::NotFoundUpToK => "not_found_up_to_k",
                    _ => unreachable!(),
                }
                .to_string(),
                r: r.iter().map(format_rational).collect(),
                best_value: result.best_value,
                orbit: result.orbit.as_ref().map(|o| orbit_doc(&graph, o)),
                by_period: result.by_period.clone(),
                gaps: gap_column,
                states_needed: None,
            });
            Ok(0)
        }
        Command::Check { common, cases } => {
            let (system, _) = load(&common)?;
            let report = check::run_check(&system, common.seed, cases)?;
            print_json(&report);
            Ok(u8::from(!report.iter().all(|f| f.passed)))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap would exit 2; malformed input is exit 1 here
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!(
                "{}",
                json!({"code": f.code, "message": f.message, "context": f.context})
            );
            ExitCode::from(f.exit)
        }
    }
}
