//! `tempo-ncg`: build, evaluate and verify temporal network creation games.
//!
//! Exit codes: 0 success (or `NashCertified`), 1 `DeviationFound`,
//! 2 malformed input, 3 size guard violated, 4 enumeration budget exceeded.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use tempo_ncg::constructions::{
    arbitrary_low_ne, clique_ne, grid_ne, hypercube_ne, outer_ring_ne, star_tree, ConstructionClaim,
};
use tempo_ncg::equilibrium::{
    best_response, best_response_dynamics, exhaustive_ne_scan, hard_limit_from_env, is_nash,
    price_ratio, price_summary, social_optimum, DynamicsOutcome, OptimumMethod, OptimumResult,
    SearchBounds, Verdict,
};
use tempo_ncg::game::{agent_cost, realize, social_cost};
use tempo_ncg::io::{
    approx, graph_from_json, optimum_to_json, parse_rational, render_ratio, CostBreakdownJson,
    ProfileFile,
};
use tempo_ncg::{
    KPolicy, Label, Purchase, ReachMode, Strategy, StrategyProfile, TemporalGraph, Variant,
    VertexId,
};

#[derive(Parser)]
#[command(
    name = "tempo-ncg",
    version,
    about = "Temporal network creation games with agent-chosen labels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a known equilibrium construction.
    Construct(ConstructArgs),
    /// Check whether a profile is a Nash equilibrium.
    VerifyNe(VerifyArgs),
    /// Per-agent cost breakdown and social cost.
    Cost(CostArgs),
    /// Reachable sets of a profile's realized graph or of a graph file.
    Reach(ReachArgs),
    /// Best response of one agent.
    BestResponse(BestResponseArgs),
    /// Round-robin best-response dynamics.
    Dynamics(DynamicsArgs),
    /// Social optimum on n agents.
    Optimum(OptimumArgs),
    /// Enumerate all equilibria on n <= 4 agents (JSON lines).
    Scan(ScanArgs),
    /// Social cost of a profile divided by an optimum.
    Ratio(RatioArgs),
    /// Graphviz rendering of a profile's realized graph or of a graph file.
    ExportDot(ExportDotArgs),
    /// Ratio table over a range of construction sizes (CSV).
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ConstructionName {
    Star,
    Grid,
    OuterRing,
    Clique,
    Hypercube,
    ArbitraryLow,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Brute,
    Formula,
}

impl From<MethodArg> for OptimumMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Brute => OptimumMethod::BruteForce,
            MethodArg::Formula => OptimumMethod::FormulaOracle,
        }
    }
}

#[derive(Args)]
struct ConstructArgs {
    construction: ConstructionName,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    label: Label,
    /// Write the profile here and the claim manifest next to it
    /// (`<out>` with extension `claim.json`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileInput {
    /// Profile JSON file; read from stdin when absent.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Overrides the variant stored in the profile file.
    #[arg(long)]
    variant: Option<Variant>,
}

#[derive(Args)]
struct BoundsArgs {
    /// Most purchases in a deviation (default: derived from the profile).
    #[arg(long)]
    max_edges: Option<usize>,
    /// Label window padding (default: max-edges).
    #[arg(long)]
    pad: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: ProfileInput,
    #[command(flatten)]
    bounds: BoundsArgs,
}

#[derive(Args)]
struct CostArgs {
    #[command(flatten)]
    input: ProfileInput,
    /// Only this agent.
    #[arg(long)]
    agent: Option<VertexId>,
}

#[derive(Args)]
struct ReachArgs {
    /// Profile or graph JSON file; read from stdin when absent.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Reachability mode; taken from --variant or the profile's variant if absent.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ReachMode>,
    #[arg(long)]
    variant: Option<Variant>,
    /// Only this source vertex.
    #[arg(long)]
    agent: Option<VertexId>,
    /// Only paths whose first label is at least this.
    #[arg(long, allow_negative_numbers = true)]
    from_time: Option<Label>,
}

#[derive(Args)]
struct BestResponseArgs {
    #[command(flatten)]
    input: ProfileInput,
    #[arg(long)]
    agent: VertexId,
    #[command(flatten)]
    bounds: BoundsArgs,
}

#[derive(Args)]
struct DynamicsArgs {
    /// Start from this profile instead of a random one.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    variant: Option<Variant>,
    /// Number of agents for a random initial profile.
    #[arg(long)]
    n: Option<usize>,
    /// Seed for the random initial profile.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 100)]
    max_rounds: usize,
    #[command(flatten)]
    bounds: BoundsArgs,
}

#[derive(Args)]
struct OptimumArgs {
    #[arg(long)]
    variant: Variant,
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value = "formula")]
    method: MethodArg,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    variant: Variant,
    #[arg(long)]
    n: usize,
    /// Most purchases in a deviation (default and minimum: n - 1).
    #[arg(long)]
    max_edges: Option<usize>,
    #[arg(long)]
    pad: Option<usize>,
}

#[derive(Args)]
struct RatioArgs {
    #[command(flatten)]
    input: ProfileInput,
    /// Optimum value as a rational ("8", "7/2"); computed with --method if absent.
    #[arg(long)]
    opt: Option<String>,
    #[arg(long, value_enum, default_value = "formula")]
    method: MethodArg,
}

#[derive(Args)]
struct ExportDotArgs {
    /// Profile or graph JSON file; read from stdin when absent.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    construction: ConstructionName,
    /// First size parameter (n, or k for grid, or d for hypercube).
    #[arg(long)]
    from: usize,
    /// Last size parameter, inclusive.
    #[arg(long)]
    to: usize,
    /// Evaluate under this variant instead of the construction's first claim.
    #[arg(long)]
    variant: Option<Variant>,
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    label: Label,
    /// Also run the equilibrium check and report its verdict.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<ReachMode, String> {
    match s {
        "strict" => Ok(ReachMode::Strict),
        "nonstrict" => Ok(ReachMode::NonStrict),
        _ => Err(format!("expected strict or nonstrict, got {s:?}")),
    }
}

/// A failure with its exit code.
#[derive(Debug)]
enum Failure {
    Malformed(String),
    Guard(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Malformed(_) => 2,
            Failure::Guard(_) => 3,
            Failure::Budget(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Malformed(m) | Failure::Guard(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<tempo_ncg::Error> for Failure {
    fn from(e: tempo_ncg::Error) -> Self {
        match e {
            tempo_ncg::Error::Guard(_) => Failure::Guard(e.to_string()),
            tempo_ncg::Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            other => Failure::Malformed(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Malformed(e.to_string())
    }
}

type CliResult<T = u8> = Result<T, Failure>;

fn malformed(msg: impl Into<String>) -> Failure {
    Failure::Malformed(msg.into())
}

fn read_input(path: Option<&Path>) -> CliResult<String> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| malformed(format!("{}: {e}", p.display()))),
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            Ok(s)
        }
    }
}

fn load_profile(input: &ProfileInput) -> CliResult<(StrategyProfile, Variant)> {
    let file = ProfileFile::from_json(&read_input(input.profile.as_deref())?)?;
    let variant = input
        .variant
        .clone()
        .or(file.variant)
        .ok_or_else(|| malformed("no variant: pass --variant or store one in the profile"))?;
    Ok((file.profile, variant))
}

/// A profile document (realized) or a graph document, detected by its keys.
/// Returns the profile's variant if it carries one.
fn load_graph(path: Option<&Path>) -> CliResult<(TemporalGraph, Option<Variant>)> {
    let text = read_input(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| malformed(format!("malformed JSON: {e}")))?;
    if value.get("edges").is_some() {
        Ok((graph_from_json(&text)?, None))
    } else {
        let file = ProfileFile::from_json(&text)?;
        Ok((realize(&file.profile), file.variant))
    }
}

fn bounds_for(
    args: &BoundsArgs,
    variant: &Variant,
    profile: &StrategyProfile,
    kp: &KPolicy,
) -> CliResult<SearchBounds> {
    let mut b = SearchBounds::default_for(variant, profile, kp);
    if let Some(m) = args.max_edges {
        b = b.with_max_edges(m);
    }
    if let Some(p) = args.pad {
        b = b.with_pad(p);
    }
    b.validate()?;
    Ok(b)
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| malformed(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("serializable")
}

fn build(
    name: ConstructionName,
    size: Option<usize>,
    args: &ConstructArgs,
) -> CliResult<ConstructionClaim> {
    let need = |flag: &str, v: Option<usize>| {
        v.ok_or_else(|| malformed(format!("this construction needs --{flag}")))
    };
    let claim = match name {
        ConstructionName::Star => {
            star_tree(size.map_or_else(|| need("n", args.n), Ok)?, args.label)
        }
        ConstructionName::Grid => grid_ne(size.map_or_else(|| need("k", args.k), Ok)?),
        ConstructionName::OuterRing => outer_ring_ne(size.map_or_else(|| need("n", args.n), Ok)?),
        ConstructionName::Clique => {
            clique_ne(size.map_or_else(|| need("n", args.n), Ok)?, args.label)
        }
        ConstructionName::Hypercube => hypercube_ne(size.map_or_else(|| need("d", args.d), Ok)?),
        ConstructionName::ArbitraryLow => {
            arbitrary_low_ne(size.map_or_else(|| need("n", args.n), Ok)?)
        }
    }?;
    Ok(claim)
}

fn construct(args: &ConstructArgs) -> CliResult {
    let claim = build(args.construction, None, args)?;
    let profile = ProfileFile {
        profile: claim.profile.clone(),
        variant: claim.claimed_variants.first().cloned(),
    }
    .to_json();
    let manifest = to_json(&claim.manifest());
    match &args.out {
        Some(out) => {
            emit(Some(out), &format!("{profile}\n"))?;
            emit(
                Some(&out.with_extension("claim.json")),
                &format!("{manifest}\n"),
            )?;
        }
        None => {
            println!("{profile}");
            eprintln!("{manifest}");
        }
    }
    Ok(0)
}

fn verify(args: &VerifyArgs) -> CliResult {
    let (profile, variant) = load_profile(&args.input)?;
    let kp = KPolicy::for_n(profile.n());
    let bounds = bounds_for(&args.bounds, &variant, &profile, &kp)?;
    let report = is_nash(&variant, &profile, &bounds, &kp)?;
    println!("{}", to_json(&report));
    Ok(match report.verdict {
        Verdict::NashCertified => 0,
        Verdict::DeviationFound => 1,
        Verdict::BudgetExceeded => 4,
    })
}

fn cost(args: &CostArgs) -> CliResult {
    let (profile, variant) = load_profile(&args.input)?;
    let kp = KPolicy::for_n(profile.n());
    let agents: Vec<VertexId> = match args.agent {
        Some(a) => vec![a],
        None => (0..profile.n()).collect(),
    };
    let mut rows = Vec::new();
    for a in agents {
        rows.push(CostBreakdownJson::new(
            a,
            &agent_cost(&variant, &profile, a, &kp)?,
        ));
    }
    let social = social_cost(&variant, &profile, &kp);
    println!(
        "{}",
        json!({"variant": variant.to_string(), "agents": rows, "social_cost": social.to_string()})
    );
    Ok(0)
}

fn reach(args: &ReachArgs) -> CliResult {
    let (g, stored) = load_graph(args.profile.as_deref())?;
    let mode = args
        .mode
        .or(args.variant.as_ref().map(|v| v.reach))
        .or(stored.map(|v| v.reach))
        .ok_or_else(|| malformed("no reachability mode: pass --mode or --variant"))?;
    let sources: Vec<VertexId> = match args.agent {
        Some(a) => vec![a],
        None => (0..g.n()).collect(),
    };
    let mut rows = Vec::new();
    for v in sources {
        let set = match args.from_time {
            Some(t) => g.reachable_from_time(v, t, mode)?,
            None => g.reachable_set(v, mode)?,
        };
        rows.push(json!({"vertex": v, "reachable": set}));
    }
    println!(
        "{}",
        json!({"mode": mode, "connected": g.is_temporally_connected(mode), "reach": rows})
    );
    Ok(0)
}

fn best_response_cmd(args: &BestResponseArgs) -> CliResult {
    let (profile, variant) = load_profile(&args.input)?;
    let kp = KPolicy::for_n(profile.n());
    let bounds = bounds_for(&args.bounds, &variant, &profile, &kp)?;
    let current = agent_cost(&variant, &profile, args.agent, &kp)?;
    let br = best_response(&variant, &profile, args.agent, &bounds, &kp)?;
    println!(
        "{}",
        json!({
            "agent": args.agent,
            "strategy": br.strategy,
            "cost": CostBreakdownJson::new(args.agent, &br.cost),
            "current_cost": current.total.to_string(),
            "improves": br.cost.total < current.total,
        })
    );
    Ok(0)
}

fn random_profile(n: usize, seed: u64) -> CliResult<StrategyProfile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_label = n.max(1) as Label;
    let mut strategies = Vec::with_capacity(n);
    for u in 0..n {
        let mut s = Strategy::new();
        for t in (0..n).filter(|&t| t != u) {
            if rng.gen_bool(0.5) {
                s.insert(Purchase::new(t, rng.gen_range(1..=max_label)));
            }
        }
        strategies.push(s);
    }
    Ok(StrategyProfile::new(strategies)?)
}

fn dynamics(args: &DynamicsArgs) -> CliResult {
    let (initial, variant) = match &args.profile {
        Some(p) => load_profile(&ProfileInput {
            profile: Some(p.clone()),
            variant: args.variant.clone(),
        })?,
        None => {
            let n = args
                .n
                .ok_or_else(|| malformed("random start needs --n (or pass --profile)"))?;
            let seed = args
                .seed
                .ok_or_else(|| malformed("random start needs --seed"))?;
            let variant = args
                .variant
                .clone()
                .ok_or_else(|| malformed("dynamics needs --variant"))?;
            (random_profile(n, seed)?, variant)
        }
    };
    let n = initial.n();
    let kp = KPolicy::for_n(n);
    let mut bounds = SearchBounds::new(
        n.saturating_sub(1).max(1),
        n.saturating_sub(1).max(1),
        hard_limit_from_env(),
    )?;
    if let Some(m) = args.bounds.max_edges {
        bounds = bounds.with_max_edges(m);
    }
    if let Some(p) = args.bounds.pad {
        bounds = bounds.with_pad(p);
    }
    bounds.validate()?;
    let outcome = best_response_dynamics(&variant, &initial, args.max_rounds, &bounds, &kp)?;
    let initial_json: serde_json::Value = serde_json::from_str(
        &ProfileFile {
            profile: initial,
            variant: None,
        }
        .to_json(),
    )
    .expect("profile JSON");
    let body = match outcome {
        DynamicsOutcome::Converged { profile, rounds } => {
            let p: serde_json::Value = serde_json::from_str(
                &ProfileFile {
                    profile,
                    variant: Some(variant.clone()),
                }
                .to_json(),
            )
            .expect("profile JSON");
            json!({"outcome": "converged", "rounds": rounds, "profile": p})
        }
        DynamicsOutcome::Cycle { period } => json!({"outcome": "cycle", "period": period}),
        DynamicsOutcome::Budget { rounds } => json!({"outcome": "budget", "rounds": rounds}),
    };
    println!(
        "{}",
        json!({"variant": variant.to_string(), "seed": args.seed, "initial": initial_json, "result": body})
    );
    Ok(0)
}

fn optimum(args: &OptimumArgs) -> CliResult {
    let opt = social_optimum(
        &args.variant,
        args.n,
        args.method.into(),
        &KPolicy::for_n(args.n),
    )?;
    println!("{}", optimum_to_json(&opt));
    Ok(0)
}

fn scan(args: &ScanArgs) -> CliResult {
    let n = args.n;
    let kp = KPolicy::for_n(n.max(1));
    let max_edges = args.max_edges.unwrap_or(n.saturating_sub(1)).max(1);
    let bounds = SearchBounds::new(
        max_edges,
        args.pad.unwrap_or(max_edges).max(max_edges),
        hard_limit_from_env(),
    )?;
    let found = exhaustive_ne_scan(&args.variant, n, &bounds, &kp)?;
    let mut stdout = io::stdout().lock();
    for p in &found {
        let line = ProfileFile {
            profile: p.clone(),
            variant: Some(args.variant.clone()),
        }
        .to_json();
        writeln!(stdout, "{line}")?;
    }
    let mut summary = json!({"equilibria": found.len()});
    if let Ok(opt) = social_optimum(&args.variant, n, OptimumMethod::FormulaOracle, &kp) {
        if let Ok(s) = price_summary(&args.variant, &found, &opt, &kp) {
            summary["optimum"] = json!(opt.value.to_string());
            summary["worst_ratio"] = json!(s.worst.map(|r| r.to_string()));
            summary["best_ratio"] = json!(s.best.map(|r| r.to_string()));
        }
    }
    eprintln!("{summary}");
    Ok(0)
}

fn optimum_value(
    text: Option<&str>,
    method: MethodArg,
    variant: &Variant,
    n: usize,
) -> CliResult<OptimumResult> {
    match text {
        Some(t) => Ok(OptimumResult {
            value: parse_rational(t)?,
            witness: None,
            method: OptimumMethod::FormulaOracle,
        }),
        None => Ok(social_optimum(
            variant,
            n,
            method.into(),
            &KPolicy::for_n(n),
        )?),
    }
}

fn ratio(args: &RatioArgs) -> CliResult {
    let (profile, variant) = load_profile(&args.input)?;
    let n = profile.n();
    let opt = optimum_value(args.opt.as_deref(), args.method, &variant, n)?;
    let r = price_ratio(&variant, &profile, &opt, &KPolicy::for_n(n))?;
    println!("{}", render_ratio(&r));
    Ok(0)
}

fn export_dot(args: &ExportDotArgs) -> CliResult {
    let (g, _) = load_graph(args.profile.as_deref())?;
    emit(args.out.as_deref(), &g.to_dot())?;
    Ok(0)
}

fn sweep(args: &SweepArgs) -> CliResult {
    if args.from > args.to {
        return Err(malformed("--from must not exceed --to"));
    }
    let shim = ConstructArgs {
        construction: args.construction,
        n: None,
        k: None,
        d: None,
        label: args.label,
        out: None,
    };
    let mut csv = String::from(
        "construction,param,n,variant,social_cost,optimum,ratio,ratio_decimal,verdict\n",
    );
    for param in args.from..=args.to {
        let claim = build(args.construction, Some(param), &shim)?;
        let n = claim.profile.n();
        let kp = KPolicy::for_n(n);
        let variant = match &args.variant {
            Some(v) => v.clone(),
            None => claim.claimed_variants[0].clone(),
        };
        let cost = social_cost(&variant, &claim.profile, &kp);
        let (opt, ratio, decimal) =
            match social_optimum(&variant, n, OptimumMethod::FormulaOracle, &kp) {
                Ok(opt) if *opt.value.numer() != 0 => {
                    let r = cost / opt.value;
                    (opt.value.to_string(), r.to_string(), approx(&r))
                }
                _ => (String::new(), String::new(), String::new()),
            };
        let verdict = if args.verify {
            let bounds = SearchBounds::default_for(&variant, &claim.profile, &kp);
            format!(
                "{:?}",
                is_nash(&variant, &claim.profile, &bounds, &kp)?.verdict
            )
        } else {
            String::new()
        };
        csv.push_str(&format!(
            "{},{param},{n},\"{variant}\",{cost},{opt},{ratio},{decimal},{verdict}\n",
            claim.name
        ));
    }
    emit(args.out.as_deref(), &csv)?;
    Ok(0)
}

fn run(cli: &Cli) -> CliResult {
    match &cli.command {
        Command::Construct(a) => construct(a),
        Command::VerifyNe(a) => verify(a),
        Command::Cost(a) => cost(a),
        Command::Reach(a) => reach(a),
        Command::BestResponse(a) => best_response_cmd(a),
        Command::Dynamics(a) => dynamics(a),
        Command::Optimum(a) => optimum(a),
        Command::Scan(a) => scan(a),
        Command::Ratio(a) => ratio(a),
        Command::ExportDot(a) => export_dot(a),
        Command::Sweep(a) => sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
