use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

use kadapt_core::arrangement::{arrangement_for, regions_to_json, write_regions_csv, Arrangement};
use kadapt_core::bounds::{
    approx_gap, constraint_approx_gap, constraint_k_bound, diam_of_yspace, eta_integer_x, eta_mixed_x, objective_bound,
    omega, policies_for_alpha, region_count_bound,
};
use kadapt_core::generate::{builtin_example, generate_knapsack, knapsack_gamma, reduce_set_cover, KNAPSACK_SCALE};
use kadapt_core::greedy::{greedy_min_k, guarantee_ratio};
use kadapt_core::oracle::brute_force_min_k;
use kadapt_core::rational::{format_q, q_to_f64};
use kadapt_core::sweep::{parse_values, run_sweep, write_csv, SweepConfig, SweepVar};
use kadapt_core::{Error, FiniteInstance, Instance, Q};

const SCHEMA_VERSION: u32 = 1;

const EXIT_USAGE: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_GUARD: u8 = 4;

#[derive(Parser)]
#[command(name = "kadapt", version, about = "How many second-stage policies does k-adaptability need?")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance as JSON.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Greedy min-k on a finite instance, optionally with the exact oracle.
    Solve(SolveArgs),
    /// Closed-form bounds.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Enumerate recourse-stable regions of an affine instance.
    Regions(RegionsArgs),
    /// Seeded knapsack sweep over t or n, as CSV.
    Sweep(SweepArgs),
}

#[derive(Subcommand)]
enum GenerateCmd {
    /// Robust minimum knapsack with Γ = ⌊n/4⌋ deviations.
    Knapsack {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Set-cover reduction; subsets are a JSON list of 0-based index lists.
    Setcover {
        #[arg(long)]
        universe: usize,
        #[arg(long)]
        subsets: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Built-in example: simplex-units, cardinality-band, cardinality-band-affine, recourse-regions.
    Builtin {
        #[arg(long)]
        name: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// Also run the brute-force k_opt oracle when its guards allow.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    json: bool,
    /// Print rationals as decimals.
    #[arg(long)]
    float: bool,
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// n_xi + 1 policies under objective uncertainty.
    Objective {
        #[arg(long)]
        nxi: u64,
    },
    /// L·diam·ln(k/s).
    Gap {
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        diam: f64,
        #[arg(long)]
        s: u64,
        #[arg(long)]
        k: u64,
    },
    /// Policies needed for an additive gap alpha.
    Alpha {
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        diam: f64,
        #[arg(long)]
        nxi: u64,
        #[arg(long)]
        alpha: f64,
    },
    /// Gap reached with k = R·s policies under constraint uncertainty.
    Approx {
        #[arg(long = "L")]
        l: f64,
        #[arg(long)]
        diam: f64,
        #[arg(long)]
        nxi: u64,
        #[arg(long)]
        r: u64,
        #[arg(long)]
        s: u64,
    },
    /// Σ_{i≤rank} C(eta, i).
    Regions {
        #[arg(long)]
        eta: u64,
        #[arg(long)]
        rank: usize,
    },
    /// Policy bound for an affine instance.
    Constraint {
        instance: PathBuf,
        #[arg(long)]
        fixed_recourse: bool,
        /// The objective does not depend on xi.
        #[arg(long)]
        obj_certain: bool,
        #[arg(long)]
        json: bool,
    },
    /// Both eta procedures and omega for an affine instance.
    Eta {
        instance: PathBuf,
        #[arg(long)]
        trim_rhs: bool,
        #[arg(long)]
        json: bool,
    },
    /// Diameter of the second-stage set of an instance.
    Diam { instance: PathBuf },
}

#[derive(Args)]
struct RegionsArgs {
    instance: PathBuf,
    /// First-stage point, comma separated; default: every point of X.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Option<Vec<i64>>,
    /// Write the region list(s) as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write one CSV row per region (single first-stage point only).
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    float: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// t or n.
    #[arg(long)]
    var: String,
    /// e.g. "20,40,...,100" or "10..20".
    #[arg(long)]
    values: String,
    /// n_y when sweeping over t.
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// t when sweeping over n.
    #[arg(long, default_value_t = 100)]
    t: usize,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (sequential by default).
    #[arg(long)]
    parallel: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::TwoStageInfeasible { .. } | Error::Uncoverable { .. }) => EXIT_INFEASIBLE,
        Some(Error::GuardExceeded(_)) => EXIT_GUARD,
        Some(Error::Io(_)) => 1,
        _ => EXIT_USAGE,
    }
}

fn versioned(command: &str, body: Json) -> Json {
    let mut out = json!({ "schema_version": SCHEMA_VERSION, "command": command });
    if let (Some(map), Json::Object(rest)) = (out.as_object_mut(), body) {
        map.extend(rest);
    }
    out
}

fn print_json(v: &Json) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn load(path: &Path) -> anyhow::Result<Instance> {
    Ok(Instance::load(path)?)
}

fn render_q(v: &Q, float: bool) -> String {
    if float {
        q_to_f64(v).to_string()
    } else {
        format_q(v)
    }
}

fn fmt_point(y: &[i64]) -> String {
    let parts: Vec<String> = y.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}

fn emit(inst: &Instance, output: Option<&Path>, summary: &str) -> anyhow::Result<()> {
    match output {
        Some(path) => {
            inst.save(path)?;
            println!("{summary}");
            println!("wrote {}", path.display());
        }
        None => {
            println!("{}", inst.to_json());
            eprintln!("{summary}");
        }
    }
    Ok(())
}

fn cmd_generate(cmd: GenerateCmd) -> anyhow::Result<()> {
    match cmd {
        GenerateCmd::Knapsack { n, t, seed, output } => {
            let inst = generate_knapsack(n, t, seed)?;
            let b = &inst.scenarios[0].constraints[0].rhs;
            let summary = format!(
                "knapsack n_y={n} t={t} Γ={} b={} (data scaled by {KNAPSACK_SCALE})",
                knapsack_gamma(n),
                format_q(b)
            );
            emit(&inst.into(), output.as_deref(), &summary)
        }
        GenerateCmd::Setcover {
            universe,
            subsets,
            output,
        } => {
            let text = fs::read_to_string(&subsets).with_context(|| format!("reading {}", subsets.display()))?;
            let sets: Vec<Vec<usize>> = serde_json::from_str(&text)
                .map_err(|e| Error::InvalidArgument(format!("{}: expected a list of index lists: {e}", subsets.display())))?;
            let inst = reduce_set_cover(universe, &sets)?;
            let summary = format!("set-cover reduction n_y={} t={} |Y|={}", inst.n_y, inst.t, sets.len());
            emit(&inst.into(), output.as_deref(), &summary)
        }
        GenerateCmd::Builtin { name, n, output } => {
            let full = match n {
                Some(n) if !name.contains('(') => format!("{name}({n})"),
                _ => name,
            };
            let inst = builtin_example(&full)?;
            let summary = match &inst {
                Instance::Finite(f) => format!("{full}: finite, n_y={} t={}", f.n_y, f.t),
                Instance::Affine(a) => format!("{full}: affine, n_y={} n_xi={} m={}", a.n_y, a.n_xi, a.m),
            };
            emit(&inst, output.as_deref(), &summary)
        }
    }
}

fn finite(inst: Instance, command: &str) -> anyhow::Result<FiniteInstance> {
    match inst {
        Instance::Finite(f) => Ok(f),
        Instance::Affine(_) => Err(Error::InvalidArgument(format!(
            "`{command}` needs a finite instance; affine instances are handled by `regions` and `bounds`"
        ))
        .into()),
    }
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let inst = finite(load(&args.instance)?, "solve")?;
    let res = greedy_min_k(&inst)?;
    let oracle = if args.oracle {
        match brute_force_min_k(&inst) {
            Ok(w) => Some(Ok(w)),
            Err(Error::GuardExceeded(msg)) => Some(Err(msg)),
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let v = render_q(&res.optimal_value, args.float);

    if args.json {
        let mut body = json!({
            "instance": inst.name,
            "n_y": inst.n_y,
            "t": inst.t,
            "v_star": if args.float { json!(q_to_f64(&res.optimal_value)) } else { json!(v) },
            "k_lb": res.k_lb,
            "k_ub": res.k_ub,
            "first_coverage": res.first_coverage,
            "guarantee_ratio": guarantee_ratio(inst.t),
            "policies": res.policies,
            "trace": res.trace,
        });
        match &oracle {
            Some(Ok(w)) => {
                body["k_opt"] = json!(w.k_opt);
                body["oracle_witness"] = json!(w.witness);
            }
            Some(Err(msg)) => body["oracle_skipped"] = json!(msg),
            None => {}
        }
        return print_json(&versioned("solve", body));
    }

    let mut line = format!("v*={v} k_lb={} k_ub={}", res.k_lb, res.k_ub);
    if let Some(Ok(w)) = &oracle {
        line.push_str(&format!(" k_opt={}", w.k_opt));
    }
    if let Some(name) = &inst.name {
        println!("instance {name}: n_y={} t={}", inst.n_y, inst.t);
    }
    println!("{line}");
    println!("policies:");
    for (i, step) in res.trace.iter().enumerate() {
        println!(
            "  {:>3}  y={}  newly_covered={}  remaining={}",
            i + 1,
            fmt_point(&step.policy),
            step.newly_covered,
            step.remaining
        );
    }
    match &oracle {
        Some(Ok(w)) => {
            let pts: Vec<String> = w.witness.iter().map(|y| fmt_point(y)).collect();
            println!("oracle witness: {}", pts.join(" "));
        }
        Some(Err(msg)) => eprintln!("oracle skipped: {msg}"),
        None => {}
    }
    Ok(())
}

fn cmd_bounds(cmd: BoundsCmd) -> anyhow::Result<()> {
    match cmd {
        BoundsCmd::Objective { nxi } => println!("k = {}", objective_bound(nxi)?),
        BoundsCmd::Gap { l, diam, s, k } => println!("gap = {}", approx_gap(l, diam, s, k)?),
        BoundsCmd::Alpha { l, diam, nxi, alpha } => println!("k = {}", policies_for_alpha(l, diam, nxi, alpha)?),
        BoundsCmd::Approx { l, diam, nxi, r, s } => {
            let g = constraint_approx_gap(l, diam, nxi, r, s)?;
            println!("k = {} gap = {}", g.k, g.gap);
        }
        BoundsCmd::Regions { eta, rank } => println!("R = {}", region_count_bound(eta, rank)),
        BoundsCmd::Constraint {
            instance,
            fixed_recourse,
            obj_certain,
            json,
        } => {
            let inst = load(&instance)?;
            let affine = inst
                .as_affine()
                .ok_or_else(|| Error::InvalidArgument("`bounds constraint` needs an affine instance".into()))?;
            let rep = constraint_k_bound(affine, fixed_recourse, !obj_certain)?;
            if json {
                return print_json(&versioned("bounds constraint", serde_json::to_value(&rep)?));
            }
            println!("{}: k <= {}", rep.name, rep.value);
            for a in &rep.assumptions {
                println!("  assumes {a}");
            }
            for t in &rep.formula_trace {
                println!("  {:<12} {}", t.symbol, t.value);
            }
        }
        BoundsCmd::Eta {
            instance,
            trim_rhs,
            json,
        } => {
            let inst = load(&instance)?;
            let affine = inst
                .as_affine()
                .ok_or_else(|| Error::InvalidArgument("`bounds eta` needs an affine instance".into()))?;
            let int = eta_integer_x(affine, trim_rhs)?;
            let mixed = eta_mixed_x(affine)?;
            let om = omega(affine)?;
            if json {
                let body = json!({ "eta_integer": int, "eta_mixed": mixed, "omega": om });
                return print_json(&versioned("bounds eta", body));
            }
            println!("eta_integer = {}", int.value);
            println!("eta_mixed = {}", mixed.value);
            println!("omega = {om}");
        }
        BoundsCmd::Diam { instance } => {
            let y = match load(&instance)? {
                Instance::Finite(f) => f.y_space,
                Instance::Affine(a) => a.y_space,
            };
            let d = diam_of_yspace(&y);
            println!("diam = {}{}", d.value, if d.exact { "" } else { " (upper bound only)" });
        }
    }
    Ok(())
}

fn cmd_regions(args: RegionsArgs) -> anyhow::Result<()> {
    let inst = load(&args.instance)?;
    let affine = inst
        .as_affine()
        .ok_or_else(|| Error::InvalidArgument("`regions` needs an affine instance".into()))?;
    let xs = match &args.x {
        Some(x) => vec![x.clone()],
        None => affine.x_points.clone(),
    };
    if args.csv.is_some() && xs.len() != 1 {
        bail!(Error::InvalidArgument(
            "--csv needs a single first-stage point; pass --x".into()
        ));
    }
    let eta_int = eta_integer_x(affine, false)?.value;
    let eta_mix = eta_mixed_x(affine)?.value;
    let mut arrangements: Vec<Arrangement> = Vec::new();
    for x in &xs {
        let arr = arrangement_for(affine, x)?;
        let bound = region_count_bound(arr.eta() as u64, affine.n_xi);
        println!(
            "x={} eta_empirical={} R_empirical={} eta_integer={eta_int} eta_mixed={eta_mix} R_bound={bound}",
            fmt_point(x),
            arr.planes.len(),
            arr.regions.len()
        );
        for (k, r) in arr.regions.iter().enumerate() {
            let w: Vec<String> = r.witness.iter().map(|v| render_q(v, args.float)).collect();
            let ys: Vec<String> = r.feasible_set.iter().map(|y| fmt_point(y)).collect();
            println!(
                "  D{} signs={} witness=({}) Y_D={{{}}}",
                k + 1,
                r.sign_string(),
                w.join(", "),
                ys.join(", ")
            );
        }
        arrangements.push(arr);
    }
    if xs.len() > 1 {
        let eta = arrangements.iter().map(|a| a.planes.len()).max().unwrap_or(0);
        println!("eta_empirical over X = {eta} (first-stage points are not checked for feasibility)");
    }
    if let Some(path) = &args.json {
        let text = if arrangements.len() == 1 {
            regions_to_json(&arrangements[0].regions)
        } else {
            let body = json!({ "arrangements": arrangements });
            serde_json::to_string_pretty(&versioned("regions", body))?
        };
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.csv {
        let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
        write_regions_csv(&arrangements[0].regions, file)?;
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<()> {
    let cfg = SweepConfig {
        var: args.var.parse::<SweepVar>()?,
        values: parse_values(&args.values)?,
        n_y: args.n,
        t: args.t,
        reps: args.reps,
        base_seed: args.seed,
        threads: args.parallel,
    };
    let rows = run_sweep(&cfg)?;
    match &args.output {
        Some(path) => {
            let file = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(&rows, file)?;
            println!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_csv(&rows, &mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Generate(cmd) => cmd_generate(cmd),
        Command::Solve(args) => cmd_solve(args),
        Command::Bounds(cmd) => cmd_bounds(cmd),
        Command::Regions(args) => cmd_regions(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
