use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ccmax::curves::{self, Problem};
use ccmax::error::{Error, Result};
use ccmax::gadget::{
    build_gadget, completeness_set, density_profile, derive_cc_instance, DensityMode, GraphProblem, Labeling,
    UGInstance, WeightedGraph,
};
use ccmax::gaussian::gamma_checked;
use ccmax::instance::{brute_force_opt, CCInstance};
use ccmax::numfmt::fmt_sig;
use ccmax::rounding::{best_known_assignment, predicted_value, round_best_of, DEFAULT_ROUNDS};
use ccmax::sdp::{integral_signs, relax, solve, SDPSolution, SolveOptions};
use ccmax::verify::{self, Suite};

const EXIT_USAGE: u8 = 2;
const EXIT_GUARD: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ccmax", version, about = "Hardness curves and SDP rounding for cardinality-constrained Max-2-CSPs")]
struct Cli {
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Evaluate Γ_ρ(x, y)
    Gamma(GammaArgs),
    /// Tabulate a hardness or approximation curve as CSV
    Curves(CurvesArgs),
    /// Exact optimum of a small instance
    Brute(InputArgs),
    /// Solve the vector relaxation of an instance
    Sdp(SdpArgs),
    /// Relaxation plus best-of-T rounding
    Solve(SolveArgs),
    /// Build the gadget graph of a UG instance
    Gadget(GadgetArgs),
    /// Minimum internal weight at given set weights
    Density(DensityArgs),
    /// Weights of the set induced by a UG labeling
    Completeness(CompletenessArgs),
    /// Run self-check suites
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct GammaArgs {
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long)]
    x: f64,
    /// Defaults to x
    #[arg(long)]
    y: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CurveKind {
    Hardness,
    Alpha,
}

#[derive(Args, Debug)]
struct CurvesArgs {
    /// cut, vc or 2sat
    #[arg(long)]
    problem: String,
    #[arg(long, value_enum, default_value = "hardness")]
    kind: CurveKind,
    #[arg(long, default_value_t = curves::DEFAULT_Q_STEP)]
    q_min: f64,
    #[arg(long, default_value_t = 1.0 - curves::DEFAULT_Q_STEP)]
    q_max: f64,
    #[arg(long, default_value_t = curves::DEFAULT_Q_STEP)]
    step: f64,
    /// Apply the monotonicity and padding transforms to hardness curves
    #[arg(long)]
    flatten: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
}

#[derive(Args, Debug)]
struct SolverFlags {
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Args, Debug)]
struct SdpArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
    /// Write the Gram matrix as CSV
    #[arg(long)]
    dump_gram: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_ROUNDS)]
    rounds: usize,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GraphProblemArg {
    Cut,
    Kvc,
}

#[derive(Args, Debug)]
struct GadgetArgs {
    #[arg(long)]
    ug: PathBuf,
    #[arg(long)]
    q: f64,
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long)]
    out: PathBuf,
    /// Also write the graph as a CC instance
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "cut")]
    problem: GraphProblemArg,
    /// Cardinality of the derived instance; defaults to the size of the
    /// labeling's set when --labeling is given, else round(q·n)
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    labeling: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Search,
}

#[derive(Args, Debug)]
struct DensityArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    /// Slack ε in the threshold Γ_ρ(r) − ε
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Correlation for the threshold; without it only minima are reported
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    /// Target set weights
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75")]
    r: Vec<f64>,
    /// Weight tolerance; defaults to the largest vertex weight
    #[arg(long)]
    tol_r: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompletenessArgs {
    #[arg(long)]
    ug: PathBuf,
    #[arg(long)]
    labeling: PathBuf,
    #[arg(long)]
    q: f64,
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// gamma, curves, graph-invariants, rounding-stats or all
    suite: String,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    match run(&cli.cmd) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Guard(_) => EXIT_GUARD,
                _ => EXIT_USAGE,
            })
        }
    }
}

/// Comment header identifying the producing command.
fn header(cmd: &Cmd, seed: Option<u64>) -> String {
    let mut h = format!("# ccmax {}\n# command: {cmd:?}\n", env!("CARGO_PKG_VERSION"));
    if let Some(s) = seed {
        h.push_str(&format!("# seed: {s}\n"));
    }
    h
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn read_instance(path: &Path) -> Result<CCInstance> {
    CCInstance::parse(&read(path)?).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

fn sig(x: f64) -> String {
    fmt_sig(x, 12)
}

fn solve_relaxation(inst: &CCInstance, flags: &SolverFlags) -> Result<SDPSolution> {
    let p = relax(inst);
    let seed_assignment = best_known_assignment(inst)?;
    let opts = SolveOptions {
        restarts: flags.restarts,
        max_iters: flags.max_iters,
        tol: flags.tol,
        seed: flags.seed,
        integral_seed: Some(integral_signs(&seed_assignment)),
    };
    solve(&p, &opts)
}

fn residual_lines(sol: &SDPSolution) -> String {
    format!(
        "residual_balance {}\nresidual_triangle {}\nresidual_unit_norm {}\nconverged {}\n",
        sig(sol.residuals.balance),
        sig(sol.residuals.triangle),
        sig(sol.residuals.unit_norm),
        sol.converged
    )
}

fn run(cmd: &Cmd) -> Result<u8> {
    match cmd {
        Cmd::Gamma(a) => {
            let v = gamma_checked(a.rho, a.x, a.y.unwrap_or(a.x))?;
            println!("{}", fmt_sig(v, 17));
        }
        Cmd::Curves(a) => {
            let problem: Problem = a.problem.parse()?;
            let grid = curves::q_grid(a.q_min, a.q_max, a.step)?;
            let points = match a.kind {
                CurveKind::Hardness => curves::hardness_curve(problem, &grid, a.flatten)?,
                CurveKind::Alpha => curves::alpha_curve(problem, &grid)?,
            };
            let text = format!("{}{}", header(cmd, None), curves::curve_csv(&points, &[]));
            emit(a.out.as_deref(), &text)?;
        }
        Cmd::Brute(a) => {
            let inst = read_instance(&a.input)?;
            let (best, v) = brute_force_opt(&inst)?;
            print!("{}optval {}\nassignment {}\n", header(cmd, None), sig(v), best.to_sign_string());
        }
        Cmd::Sdp(a) => {
            let inst = read_instance(&a.input)?;
            let sol = solve_relaxation(&inst, &a.solver)?;
            print!(
                "{}sdpval {}\nrestart {}\niterations {}\n{}",
                header(cmd, Some(a.solver.seed)),
                sig(sol.objective_value),
                sol.restart,
                sol.iterations,
                residual_lines(&sol)
            );
            if let Some(p) = &a.dump_gram {
                fs::write(p, format!("{}{}", header(cmd, Some(a.solver.seed)), sol.gram_csv()))?;
            }
        }
        Cmd::Solve(a) => {
            let inst = read_instance(&a.input)?;
            let sol = solve_relaxation(&inst, &a.solver)?;
            let rep = round_best_of(&inst, &sol, a.rounds, a.solver.seed)?;
            let flips_total: usize = rep.repair_flips.iter().sum();
            let flips_max = rep.repair_flips.iter().copied().max().unwrap_or(0);
            let mut text = header(cmd, Some(a.solver.seed));
            text.push_str(&format!(
                "problem {}\nn {}\nk {}\nsdp_objective {}\n{}rounds {}\nbest_value {}\nbest_round {}\nbest_assignment {}\n\
                 predicted_raw_value {}\nmean_raw_value {}\npre_repair_gap_mean {}\npre_repair_gap_max {}\nrepair_flips_total {}\nrepair_flips_max {}\n",
                inst.problem(),
                inst.n(),
                inst.k(),
                sig(sol.objective_value),
                residual_lines(&sol),
                rep.rounds,
                sig(rep.best_value),
                rep.best_round,
                rep.best_assignment.to_sign_string(),
                sig(predicted_value(&inst, &sol)?),
                sig(rep.mean_raw_value()),
                sig(rep.mean_gap()),
                sig(rep.max_gap()),
                flips_total,
                flips_max
            ));
            text.push_str(&format!("ratio_to_sdp {}\n", sig(rep.best_value / sol.objective_value)));
            if inst.n() <= ccmax::rounding::EXACT_SEED_MAX_VARS {
                let (_, opt) = brute_force_opt(&inst)?;
                text.push_str(&format!(
                    "brute_force_optval {}\nratio_to_optval {}\n",
                    sig(opt),
                    sig(rep.best_value / opt)
                ));
            }
            emit(a.report.as_deref(), &text)?;
        }
        Cmd::Gadget(a) => {
            let ug = UGInstance::parse(&read(&a.ug)?)?;
            let g = build_gadget(&ug, a.q, a.rho)?;
            fs::write(&a.out, format!("{}{}", header(cmd, None), g.graph.to_text()))?;
            let inv = g.graph.invariants();
            println!(
                "vertices {}\nedges {}\nt {}\ntotal_vertex_weight {}\ntotal_edge_weight {}\nhalf_incidence_deviation {}",
                g.graph.vertex_count(),
                g.graph.edges().len(),
                sig(g.nu.t),
                sig(inv.total_vertex_weight),
                sig(inv.total_edge_weight),
                sig(inv.half_incidence_deviation)
            );
            if let Some(path) = &a.instance {
                let completeness = match &a.labeling {
                    Some(l) => Some(completeness_set(&ug, &Labeling::parse(&read(l)?)?, &g)?),
                    None => None,
                };
                let n = g.graph.vertex_count();
                let k =
                    a.k.or_else(|| completeness.as_ref().map(|c| c.set.iter().filter(|&&m| m).count()))
                        .unwrap_or_else(|| (a.q * n as f64).round() as usize);
                let problem = match a.problem {
                    GraphProblemArg::Cut => GraphProblem::Cut,
                    GraphProblemArg::Kvc => GraphProblem::Kvc,
                };
                let inst = derive_cc_instance(&g.graph, problem, k)?;
                fs::write(path, format!("{}{}", header(cmd, None), inst.to_text()))?;
            }
        }
        Cmd::Density(a) => {
            let g = WeightedGraph::parse(&read(&a.graph)?)?;
            let tol = a.tol_r.unwrap_or_else(|| g.vertex_weights().iter().copied().fold(0.0, f64::max));
            let mode = match a.mode {
                ModeArg::Exact => DensityMode::Exact,
                ModeArg::Search => DensityMode::LocalSearch,
            };
            let profile = density_profile(&g, &a.r, mode, tol, a.seed)?;
            let mut text = header(cmd, Some(a.seed));
            text.push_str("r,min_inside,method,threshold,verdict\n");
            let mut violated = false;
            for s in &profile.samples {
                let method = match s.method {
                    DensityMode::Exact => "exact",
                    DensityMode::LocalSearch => "local_search",
                };
                let (thr, verdict) = match (a.rho, s.min_inside) {
                    (Some(rho), Some(m)) => {
                        let thr = gamma_checked(rho, s.r.clamp(0.0, 1.0), s.r.clamp(0.0, 1.0))? - a.eps;
                        violated |= m < thr;
                        (sig(thr), if m >= thr { "dense" } else { "violated" })
                    }
                    _ => (String::new(), ""),
                };
                text.push_str(&format!(
                    "{},{},{},{},{}\n",
                    sig(s.r),
                    s.min_inside.map(sig).unwrap_or_default(),
                    method,
                    thr,
                    verdict
                ));
            }
            emit(a.out.as_deref(), &text)?;
            if violated {
                eprintln!("note: at least one target weight violates the density threshold");
            }
        }
        Cmd::Completeness(a) => {
            let ug = UGInstance::parse(&read(&a.ug)?)?;
            let z = Labeling::parse(&read(&a.labeling)?)?;
            let g = build_gadget(&ug, a.q, a.rho)?;
            let c = completeness_set(&ug, &z, &g)?;
            let t = g.nu.t;
            print!(
                "{}ug_value {}\nset_weight {}\ncut_weight {}\ntwo_t {}\ncut_lower_bound {}\ninside_weight {}\n\
                 gamma_threshold {}\ntouching_weight {}\nq_plus_t {}\n",
                header(cmd, None),
                sig(c.ug_value),
                sig(c.weight),
                sig(c.cut_weight),
                sig(2.0 * t),
                sig(c.cut_lower_bound(&g.nu)),
                sig(c.inside_weight),
                sig(gamma_checked(a.rho, a.q, a.q)?),
                sig(c.touching_weight),
                sig(a.q + t)
            );
        }
        Cmd::Verify(a) => {
            let suites: Vec<Suite> = if a.suite == "all" { Suite::ALL.to_vec() } else { vec![a.suite.parse()?] };
            let mut text = header(cmd, Some(a.seed));
            text.push_str("suite,check,measured,bound,verdict\n");
            let mut ok = true;
            for s in suites {
                let rep = verify::run(s, a.seed)?;
                ok &= rep.passed();
                text.push_str(&rep.to_csv());
            }
            emit(a.out.as_deref(), &text)?;
            if !ok {
                return Ok(EXIT_VERIFY);
            }
        }
    }
    Ok(0)
}
