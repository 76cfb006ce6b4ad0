use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use byzstab_core::analysis::{count_disruptions, disruption_bound, pi, unanchored_processes, DisruptionReport};
use byzstab_core::checker::{explore, CheckError, Counterexample, DEFAULT_STATE_CAP};
use byzstab_core::library;
use byzstab_core::metric::{classify, strong_feasibility, MetricSpec, Property};
use byzstab_core::protocol::{format_configuration, Action};
use byzstab_core::scenario::{parse_mode, parse_variant, Scenario, StrategySpec};
use byzstab_core::scheduler::{run, validate_schedule, ScheduleViolation};
use byzstab_core::system::WeightedSystem;
use clap::{Args, Parser, Subcommand};

/// Byzantine-contained self-stabilizing maximum metric tree simulator.
#[derive(Parser)]
#[command(name = "byzstab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a metric and, given a used-value count, the smallest
    /// feasible containment radius.
    CheckMetric {
        /// e.g. `met`, `nc`, `sp(bound=8)`, `flow(mr=10)`, `rel(den=20)`
        metric: String,
        /// Number of distinct metric values used by a system.
        #[arg(long)]
        used: Option<usize>,
        /// Containment radius to test.
        #[arg(long)]
        c: Option<usize>,
    },
    /// Print the containment areas of a scenario.
    Areas { scenario: String },
    /// Simulate a scenario and report disruptions.
    Run(RunArgs),
    /// Exhaustively check closure and convergence on a small scenario.
    Explore {
        scenario: String,
        #[arg(long)]
        variant: Option<String>,
        /// Largest state space to enumerate.
        #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
        cap: u64,
    },
    /// Print the disruption bounds of a scenario.
    Bound {
        scenario: String,
        #[arg(long)]
        k: Option<u32>,
    },
    /// List library entries, or print one as a scenario file.
    Library { name: Option<String> },
}

#[derive(Args)]
struct RunArgs {
    /// A scenario file, or a library entry such as `fig7(variant=legacy)`.
    scenario: String,
    #[arg(long)]
    variant: Option<String>,
    /// Adversary loop iterations for looping strategies.
    #[arg(long)]
    cycles: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    k: Option<u32>,
    /// `central` or `distributed`.
    #[arg(long)]
    mode: Option<String>,
    /// Write the trace here (a per-seed suffix is added in batch mode).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Run this many consecutive seeds starting at the scenario seed.
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    /// Worker threads for batch mode.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

/// Exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Ok = 0,
    Truncated = 3,
    Violation = 1,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(o) => ExitCode::from(o as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::CheckMetric { metric, used, c } => check_metric(&metric, used, c),
        Command::Areas { scenario } => areas(&load(&scenario)?),
        Command::Run(args) => run_cmd(args),
        Command::Explore { scenario, variant, cap } => {
            let mut sc = load(&scenario)?;
            if let Some(v) = variant {
                sc.variant = parse_variant(&v).map_err(anyhow::Error::msg)?;
            }
            explore_cmd(&sc, cap)
        }
        Command::Bound { scenario, k } => bound(&load(&scenario)?, k),
        Command::Library { name } => library_cmd(name.as_deref()),
    }
}

/// A scenario from a file path, or else from the library.
fn load(spec: &str) -> Result<Scenario> {
    let path = Path::new(spec);
    let mut sc = if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {spec}"))?;
        Scenario::parse(&text).with_context(|| format!("parsing {spec}"))?
    } else {
        library::entry(spec)?
    };
    if let Ok(seed) = std::env::var("BYZSTAB_SEED") {
        sc.daemon.seed = seed.trim().parse().context("BYZSTAB_SEED must be an integer")?;
    }
    Ok(sc)
}

fn check_metric(metric: &str, used: Option<usize>, c: Option<usize>) -> Result<Outcome> {
    let spec: MetricSpec = metric.parse()?;
    let cls = classify(&spec);
    let fixed: Vec<String> = cls.fixed_points.iter().map(|m| spec.format_value(*m)).collect();
    let verdict = if cls.is_strongly_maximizable {
        if cls.domain_size == 1 {
            "strongly maximizable (|M|=1)".to_string()
        } else {
            format!("strongly maximizable, fixed points: {{{}}}", fixed.join(","))
        }
    } else if cls.is_maximizable {
        if cls.witness(Property::TruncationArtifact).is_some() {
            "maximizable; not strongly maximizable (truncation artifact noted)".to_string()
        } else {
            "maximizable; not strongly maximizable".to_string()
        }
    } else {
        "not maximizable".to_string()
    };
    let yn = |b: bool| if b { "yes" } else { "no" };
    println!("metric: {spec}");
    println!("{verdict}");
    println!("bounded: {}", yn(cls.is_bounded));
    println!("monotonic: {}", yn(cls.is_monotonic));
    println!("strictly decreasing: {}", yn(cls.is_strictly_decreasing));
    println!("fixed points: {{{}}}", fixed.join(","));
    println!("domain size: {}", cls.domain_size);
    for w in &cls.witnesses {
        let other = w.other.map(|o| format!(" other={}", spec.format_value(o))).unwrap_or_default();
        println!(
            "witness {:?}: m={}{} w={}",
            w.property,
            spec.format_value(w.m),
            other,
            spec.format_weight(w.w)
        );
    }
    if let Some(used) = used {
        let f = strong_feasibility(&cls, used, c.unwrap_or(0));
        if cls.is_strongly_maximizable {
            println!("minimal c: {}", f.minimal_c);
        } else {
            println!("minimal c: none (impossible for every c)");
        }
        if let Some(c) = c {
            println!("possible with c={c}: {}", yn(f.possible));
        }
    }
    Ok(Outcome::Ok)
}

fn names(sys: &WeightedSystem, set: impl IntoIterator<Item = byzstab_core::system::ProcessId>) -> String {
    set.into_iter().map(|p| sys.name(p).to_string()).collect::<Vec<_>>().join(" ")
}

fn areas(sc: &Scenario) -> Result<Outcome> {
    let sys = sc.build_system()?;
    let a = sys.containment_areas();
    println!("S_B: {}", names(&sys, a.s_b.iter().copied()));
    println!("S_B*: {}", names(&sys, a.s_b_star.iter().copied()));
    let comps: Vec<String> =
        a.e_b.iter().map(|c| format!("{{{}}}", names(&sys, c.iter().copied()))).collect();
    println!("E_B: {}", comps.join(" "));
    println!("delta: {}", a.delta);
    println!("Delta: {}", a.max_degree);
    println!("D: {}", sys.d());
    Ok(Outcome::Ok)
}

fn bound(sc: &Scenario, k: Option<u32>) -> Result<Outcome> {
    let sys = sc.build_system()?;
    let k = k.unwrap_or(sc.daemon.k);
    let a = sys.containment_areas();
    let b = disruption_bound(&sys, k);
    println!("k: {k}");
    println!("delta: {}", a.delta);
    println!("Delta: {}", a.max_degree);
    println!("D: {}", sys.d());
    println!("Pi(k,delta): {}", pi(k as u64, a.delta as u64));
    println!("per_process: {}", b.per_process);
    println!("total: {}", b.total);
    let loose = unanchored_processes(&sys);
    if loose.is_empty() {
        println!("unanchored: none");
    } else {
        println!("unanchored: {} (per-process bound not guaranteed)", names(&sys, loose.iter().copied()));
    }
    Ok(Outcome::Ok)
}

fn library_cmd(name: Option<&str>) -> Result<Outcome> {
    match name {
        None => {
            for n in library::names() {
                println!("{n:<18} {}", library::describe(n));
            }
        }
        Some(n) => print!("{}", library::entry(n)?.to_text()),
    }
    Ok(Outcome::Ok)
}

fn apply_overrides(sc: &mut Scenario, a: &RunArgs) -> Result<()> {
    if let Some(v) = &a.variant {
        sc.variant = parse_variant(v).map_err(anyhow::Error::msg)?;
    }
    if let Some(m) = &a.mode {
        sc.daemon.mode = parse_mode(m).map_err(anyhow::Error::msg)?;
    }
    if let Some(k) = a.k {
        if k == 0 {
            bail!("--k must be positive");
        }
        sc.daemon.k = k;
    }
    if let Some(s) = a.seed {
        sc.daemon.seed = s;
    }
    if let Some(m) = a.max_steps {
        sc.daemon.max_steps = m;
    }
    if let Some(c) = a.cycles {
        for (_, s) in &mut sc.adversary {
            if let StrategySpec::ReplayLoop { cycles, .. } = s {
                *cycles = Some(c);
            }
        }
    }
    Ok(())
}

struct RunResult {
    text: String,
    outcome: Outcome,
    trace: String,
}

fn simulate(sc: &Scenario) -> Result<RunResult> {
    let sys = sc.build_system()?;
    let init = sc.initial_configuration(&sys)?;
    let strategies = sc.strategies(&sys)?;
    let trace = run(&sys, sc.variant, &sc.daemon, &strategies, init, None)?;
    let mut text = format!(
        "seed={} variant={} steps={} stop={:?}\n",
        sc.daemon.seed,
        sc.variant.label(),
        trace.steps.len(),
        trace.stop
    );
    let mut outcome = Outcome::Ok;
    let horizon = sc.daemon.horizon(sys.n());
    match validate_schedule(&trace, sys.n(), sc.daemon.k, horizon) {
        Ok(()) => text.push_str("schedule: valid\n"),
        Err(v) => {
            text.push_str(&format!("schedule: {}\n", describe_violation(&sys, v)));
            outcome = Outcome::Violation;
        }
    }
    let mut converged = false;
    for area in sc.areas(&sys)? {
        let report = count_disruptions(&sys, &trace, &area, sc.variant, sc.daemon.k);
        converged |= report.convergence_index.is_some();
        text.push_str(&area_line(&sys, &report));
        if sc.analysis.bound_check && !report.violations.is_empty() {
            outcome = Outcome::Violation;
        }
    }
    if outcome == Outcome::Ok && trace.truncated() && !converged {
        outcome = Outcome::Truncated;
    }
    Ok(RunResult { text, outcome, trace: trace.render(&sys) })
}

fn area_line(sys: &WeightedSystem, r: &DisruptionReport) -> String {
    let conv = r.convergence_index.map_or("none".to_string(), |i| i.to_string());
    format!(
        "area={} converged_at={} open={} stability={} {}\n",
        r.area,
        conv,
        r.open_disruption,
        r.stability_mode,
        r.render(sys)
    )
}

fn describe_violation(sys: &WeightedSystem, v: ScheduleViolation) -> String {
    match v {
        ScheduleViolation::KBound { step, process, waiting } => {
            format!("k-bound violated at step {step}: {} overtook {}", sys.name(process), sys.name(waiting))
        }
        ScheduleViolation::Starvation { step, process } => {
            format!("starvation at step {step}: {}", sys.name(process))
        }
        ScheduleViolation::NotCentral { step } => format!("central daemon activated several processes at step {step}"),
    }
}

fn trace_path(base: &Path, seed: u64, batch: bool) -> PathBuf {
    if !batch {
        return base.to_path_buf();
    }
    let mut name = base.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(format!(".seed{seed}"));
    base.with_file_name(name)
}

fn run_cmd(a: RunArgs) -> Result<Outcome> {
    let mut sc = load(&a.scenario)?;
    apply_overrides(&mut sc, &a)?;
    let first = sc.daemon.seed;
    let seeds: Vec<u64> = (0..a.seeds.max(1)).map(|i| first.wrapping_add(i)).collect();
    let batch = seeds.len() > 1;
    let jobs = a.jobs.max(1);
    let mut results: Vec<Option<Result<RunResult>>> = (0..seeds.len()).map(|_| None).collect();
    std::thread::scope(|s| {
        for (chunk_idx, chunk) in results.chunks_mut(seeds.len().div_ceil(jobs)).enumerate() {
            let sc = &sc;
            let seeds = &seeds;
            let offset = chunk_idx * seeds.len().div_ceil(jobs);
            s.spawn(move || {
                for (i, slot) in chunk.iter_mut().enumerate() {
                    let mut one = sc.clone();
                    one.daemon.seed = seeds[offset + i];
                    *slot = Some(simulate(&one));
                }
            });
        }
    });
    let mut worst = Outcome::Ok;
    for (seed, r) in seeds.iter().zip(results) {
        let r = r.expect("every seed ran")?;
        print!("{}", r.text);
        if let Some(base) = &a.trace {
            let path = trace_path(base, *seed, batch);
            std::fs::write(&path, &r.trace).with_context(|| format!("writing {}", path.display()))?;
        }
        worst = match (worst, r.outcome) {
            (Outcome::Violation, _) | (_, Outcome::Violation) => Outcome::Violation,
            (Outcome::Truncated, _) | (_, Outcome::Truncated) => Outcome::Truncated,
            _ => Outcome::Ok,
        };
    }
    Ok(worst)
}

fn dump(sys: &WeightedSystem, cx: &Counterexample) {
    println!("counterexample {}", cx.predicate);
    println!("init {}", format_configuration(sys, &cx.pre));
    if let Some((p, a)) = &cx.action {
        let label = match a {
            Action::Rule(r) => r.label().to_string(),
            Action::Byzantine(_) => "BYZ".to_string(),
        };
        let changed = cx
            .post
            .as_ref()
            .map(|c| format!("{}:{}", sys.name(*p), byzstab_core::protocol::format_state(sys, &c[*p])))
            .unwrap_or_default();
        println!("step=0 activated={}:{} changed={}", sys.name(*p), label, changed);
    }
}

fn explore_cmd(sc: &Scenario, cap: u64) -> Result<Outcome> {
    let sys = sc.build_system()?;
    let report = match explore(&sys, sc.variant, cap) {
        Ok(r) => r,
        Err(CheckError::TooLarge { states, cap }) => {
            println!("states={states} exceeds cap {cap}; refusing (shrink D or the metric domain)");
            return Ok(Outcome::Truncated);
        }
        Err(e) => return Err(e.into()),
    };
    println!("{}", report.summary_line());
    if let Err(cx) = &report.closure_im {
        dump(&sys, cx);
    }
    if let Err(cx) = &report.closure_lc {
        dump(&sys, cx);
    }
    if let Err(stuck) = &report.reach_lc {
        println!("stuck {}", format_configuration(&sys, stuck));
    }
    Ok(if report.all_ok() { Outcome::Ok } else { Outcome::Violation })
}
