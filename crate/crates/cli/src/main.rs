//! uamsched: validate, analyze, schedule and simulate capacity-constrained
//! air-mobility networks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use uamsched::analysis::{
    check_network_necessary, check_node_necessary, compute_bottleneck, demand_rate, max_backlog,
    max_flow, star_backlog_series, star_feasibility, to_f64, PeriodicDemandSpec, QUALIFIER,
};
use uamsched::cases::{self, GeneratorSpec};
use uamsched::io::{self, DemandFile, ScheduleFile};
use uamsched::model::{audit_schedule, sod_lower_bound, Information};
use uamsched::scheduler::{
    event_scheduler, oracle_optimal, BnbConfig, Budget, SchedulerConfig, SchedulerState,
    ORACLE_MAX_DEMANDS,
};
use uamsched::simulator::{
    gantt_csv, gantt_rows, replay_audit, run_simulation, trace_csv, trace_gantt_rows, SimConfig,
};
use uamsched::{Demand, Duration, Network, TimePoint};

#[derive(Parser)]
#[command(
    name = "uamsched",
    version,
    about = "Scheduling and feasibility analysis for capacity-constrained air-mobility networks"
)]
struct Cli {
    /// Machine-readable JSON on stdout
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Inputs {
    /// Network JSON
    #[arg(short = 'n', long)]
    network: Option<PathBuf>,

    /// Demands JSON
    #[arg(short = 'd', long)]
    demands: Option<PathBuf>,

    /// Bundled case instead of files: two_link, fig3, fig3_static200, atlanta
    #[arg(long, conflicts_with = "network")]
    case: Option<String>,

    /// Seed for generated case demands
    #[arg(long, default_value_t = 0)]
    case_seed: u64,
}

#[derive(Args, Clone)]
struct SearchArgs {
    /// Largest batch considered per scheduling event
    #[arg(long, default_value_t = 32)]
    k0: usize,

    /// Stop each search after this many nodes (deterministic)
    #[arg(long, conflicts_with = "budget_ms")]
    budget_nodes: Option<u64>,

    /// Stop each search after this many milliseconds
    #[arg(long)]
    budget_ms: Option<u64>,
}

impl SearchArgs {
    fn config(&self) -> SchedulerConfig {
        let budget = match (self.budget_nodes, self.budget_ms) {
            (Some(n), _) => Budget::Nodes(n),
            (None, Some(ms)) => Budget::Time(std::time::Duration::from_millis(ms)),
            (None, None) => Budget::default(),
        };
        SchedulerConfig {
            k0: self.k0,
            bnb: BnbConfig {
                budget,
                ..BnbConfig::default()
            },
            ..SchedulerConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check network, demand and schedule files
    Validate {
        #[command(flatten)]
        inputs: Inputs,

        /// Schedule JSON to audit against worst-case windows
        #[arg(short = 's', long)]
        schedule: Option<PathBuf>,
    },

    /// Max flow, bottleneck and necessary feasibility conditions
    Analyze {
        #[command(flatten)]
        inputs: Inputs,

        /// Reference instant for the demand checks
        #[arg(long, default_value_t = 0.0)]
        now_min: f64,

        /// Star networks: demand period for the long-run check
        #[arg(long, requires = "per_period")]
        period_min: Option<f64>,

        /// Star networks: demands per period on each branch, comma separated
        #[arg(long, value_delimiter = ',')]
        per_period: Option<Vec<u32>>,
    },

    /// Compute a schedule at one instant
    Schedule {
        #[command(flatten)]
        inputs: Inputs,

        #[command(flatten)]
        search: SearchArgs,

        /// Scheduling instant; departures are never earlier
        #[arg(long, default_value_t = 0.0, conflicts_with = "static_")]
        now_min: f64,

        /// Schedule everything at once with no earliest-departure limit
        #[arg(long = "static")]
        static_: bool,

        /// Exact enumeration (small instances only)
        #[arg(long)]
        oracle: bool,

        /// Exit with status 2 unless every demand is scheduled
        #[arg(long)]
        require_complete: bool,

        /// Write the schedule here instead of stdout
        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },

    /// Run the event-driven simulation
    Simulate {
        #[command(flatten)]
        inputs: Inputs,

        #[command(flatten)]
        search: SearchArgs,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[arg(long, default_value_t = 100_000.0)]
        horizon_min: f64,

        /// Reschedule on every landing
        #[arg(long)]
        force_reschedule: bool,

        /// Event log CSV
        #[arg(long)]
        trace: Option<PathBuf>,

        /// Per-node blocking bars CSV
        #[arg(long)]
        gantt: Option<PathBuf>,

        /// Bars as known at this instant
        #[arg(long, requires = "gantt")]
        at_min: Option<f64>,
    },

    /// Blocking bars of a schedule as CSV
    Gantt {
        #[command(flatten)]
        inputs: Inputs,

        /// Schedule JSON
        #[arg(short = 's', long)]
        schedule: PathBuf,

        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },

    /// Generate demands from a generator spec
    Generate {
        /// Network JSON
        #[arg(short = 'n', long)]
        network: PathBuf,

        /// Generator spec JSON
        #[arg(long)]
        spec: PathBuf,

        #[arg(long, default_value_t = 0)]
        seed: u64,

        #[arg(short = 'o', long)]
        output: Option<PathBuf>,
    },
}

/// Failure classes mapped to exit codes.
enum Outcome {
    Ok,
    Incomplete,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn minutes(m: f64) -> Result<TimePoint> {
    Ok(TimePoint::from_minutes(m)?)
}

fn load(inputs: &Inputs, need_demands: bool) -> Result<(Network, Vec<Demand>)> {
    if let Some(name) = &inputs.case {
        let net = match name.as_str() {
            "two_link" => cases::two_link(),
            "fig3" | "fig3_static200" => cases::fig3(),
            "atlanta" => cases::atlanta(),
            other => bail!("unknown case `{other}`"),
        };
        let demands = match (name.as_str(), &inputs.demands) {
            (_, Some(path)) => io::parse_demands(&read(path)?, &net)?,
            ("two_link", None) => cases::two_link_demands(&net),
            ("fig3", None) => cases::fig3_dynamic_demands(&net, inputs.case_seed),
            ("fig3_static200", None) => cases::fig3_static200_demands(&net, inputs.case_seed),
            _ => cases::atlanta_demands(&net),
        };
        return Ok((net, demands));
    }
    let Some(path) = &inputs.network else {
        bail!("a network (-n) or a bundled case (--case) is required")
    };
    let net = io::parse_network(&read(path)?).with_context(|| format!("in {}", path.display()))?;
    let demands = match &inputs.demands {
        Some(p) => {
            io::parse_demands(&read(p)?, &net).with_context(|| format!("in {}", p.display()))?
        }
        None if need_demands => bail!("demands (-d) are required"),
        None => Vec::new(),
    };
    Ok((net, demands))
}

fn names(net: &Network, nodes: &[uamsched::NodeId]) -> Vec<String> {
    nodes.iter().map(|&v| net.node(v).name.clone()).collect()
}

fn validate(cli: &Cli, inputs: &Inputs, schedule: Option<&Path>) -> Result<Outcome> {
    let (net, demands) = load(inputs, schedule.is_some())?;
    let mut report = json!({
        "nodes": net.nodes().len(),
        "edges": net.edges().len(),
        "routes": net.routes().len(),
        "demands": demands.len(),
    });
    if let Some(path) = schedule {
        let file: ScheduleFile = io::from_json(&read(path)?)?;
        let s = file.to_schedule(&net, &demands)?;
        let audit = audit_schedule(&s, &net, Information::WorstCase);
        let violations: Vec<String> = audit.violations.iter().map(|v| v.to_string()).collect();
        report["violations"] = json!(violations);
        if !audit.is_clean() {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            }
            bail!(
                "schedule has {} violations:\n  {}",
                violations.len(),
                violations.join("\n  ")
            );
        }
    }
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!(
            "ok: {} nodes, {} edges, {} routes, {} demands",
            net.nodes().len(),
            net.edges().len(),
            net.routes().len(),
            demands.len()
        );
    }
    Ok(Outcome::Ok)
}

fn analyze(
    cli: &Cli,
    inputs: &Inputs,
    now: f64,
    period: Option<f64>,
    per_period: Option<&[u32]>,
) -> Result<Outcome> {
    let (net, demands) = load(inputs, false)?;
    let now = minutes(now)?;
    let flow = max_flow(&net)?;
    let bottleneck = compute_bottleneck(&net, &flow)?;
    let nodes = check_node_necessary(&net, &demands, now);
    let network = check_network_necessary(&net, &demands, now, &flow, &bottleneck);
    let route_flow: serde_json::Map<String, Value> = net
        .route_ids()
        .map(|r| {
            (
                net.route(r).name.clone(),
                json!(to_f64(&flow.route_flow[r.0])),
            )
        })
        .collect();
    let mut out = json!({
        "max_flow": to_f64(&flow.objective),
        "max_flow_exact": flow.objective.to_string(),
        "route_flow": route_flow,
        "bottleneck_nodes": names(&net, &bottleneck.nodes),
        "bottleneck_rule": format!("{:?}", bottleneck.rule),
        "node_checks": nodes.iter().map(|v| json!({
            "node": net.node(v.node).name,
            "demands": v.demands,
            "required_min": v.required.as_minutes(),
            "available_min": v.available as f64 / 1000.0,
            "passes": v.passes,
            "coarse_passes": v.coarse_passes,
        })).collect::<Vec<_>>(),
        "network_check": {
            "demands": network.demands,
            "horizon_min": network.horizon.as_minutes(),
            "bound": network.bound.as_ref().map(to_f64),
            "passes": network.passes,
        },
        "qualifier": QUALIFIER,
    });
    if let (Some(p), Some(h)) = (period, per_period) {
        let spec = PeriodicDemandSpec {
            period: Duration::from_minutes(p)?,
            per_period: h.to_vec(),
        };
        let verdict = star_feasibility(&net, &demand_rate(&spec)?)?;
        let mut star = json!({
            "feasible": verdict.feasible,
            "load": to_f64(&verdict.load),
            "load_exact": verdict.load.to_string(),
            "capacity": verdict.capacity,
        });
        if !demands.is_empty() {
            let t0 = demands
                .iter()
                .map(|d| d.release.max(TimePoint::ZERO))
                .min()
                .unwrap_or(TimePoint::ZERO);
            let horizon = demands.iter().map(|d| d.deadline).max().unwrap_or(t0) - t0;
            let series = star_backlog_series(&net, &demands, t0, horizon)?;
            star["max_backlog_min"] = json!(to_f64(&max_backlog(&series)));
        }
        out["star_check"] = star;
    }
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&out)?);
    } else {
        println!(
            "max flow: {} per minute ({})",
            flow.objective,
            to_f64(&flow.objective)
        );
        for r in net.route_ids() {
            println!("  {}: {}", net.route(r).name, flow.route_flow[r.0]);
        }
        println!(
            "bottleneck: {{{}}} ({:?})",
            names(&net, &bottleneck.nodes).join(", "),
            bottleneck.rule
        );
        for v in &nodes {
            println!(
                "{}",
                v.to_string()
                    .replace(&format!("node #{}", v.node.0), &net.node(v.node).name)
            );
        }
        if !demands.is_empty() {
            println!("{network}");
        }
        if let Some(star) = out.get("star_check") {
            println!("star: {star}");
        }
    }
    Ok(Outcome::Ok)
}

#[allow(clippy::too_many_arguments)]
fn schedule(
    cli: &Cli,
    inputs: &Inputs,
    search: &SearchArgs,
    now: f64,
    static_: bool,
    oracle: bool,
    require_complete: bool,
    output: Option<&Path>,
) -> Result<Outcome> {
    let (net, demands) = load(inputs, true)?;
    let now = if static_ {
        TimePoint::NEG_INF
    } else {
        minutes(now)?
    };
    let lower = sod_lower_bound(&net, &demands);
    let (schedule, complete) = if oracle {
        if demands.len() > ORACLE_MAX_DEMANDS {
            bail!("--oracle handles at most {ORACLE_MAX_DEMANDS} demands");
        }
        match oracle_optimal(&net, &demands, now)? {
            Some((s, _)) => (s, true),
            None => (Default::default(), demands.is_empty()),
        }
    } else {
        let cfg = search.config();
        let mut state = SchedulerState::new();
        state.submit(demands.iter().map(|d| {
            if static_ {
                d.clone().released_at(TimePoint::NEG_INF)
            } else {
                d.clone()
            }
        }))?;
        let decision = event_scheduler(&net, &mut state, now, &cfg)?;
        if !cli.json && output.is_some() {
            eprintln!(
                "scheduled {} of {} demands in {:?}",
                decision.scheduled.len(),
                demands.len(),
                decision.wall
            );
        }
        let complete = state.schedule.len() == demands.len();
        (state.schedule, complete)
    };
    let file = ScheduleFile::from_schedule(&net, &schedule, lower, complete);
    write_or_print(output, &file.to_json())?;
    if require_complete && !complete {
        eprintln!(
            "incomplete: {} of {} demands scheduled",
            schedule.len(),
            demands.len()
        );
        return Ok(Outcome::Incomplete);
    }
    Ok(Outcome::Ok)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    cli: &Cli,
    inputs: &Inputs,
    search: &SearchArgs,
    seed: u64,
    horizon: f64,
    force: bool,
    trace_path: Option<&Path>,
    gantt_path: Option<&Path>,
    at: Option<f64>,
) -> Result<Outcome> {
    let (net, demands) = load(inputs, true)?;
    let sim = SimConfig {
        seed,
        horizon: minutes(horizon)?,
        force_reschedule: force,
        ..SimConfig::default()
    };
    let trace = run_simulation(&net, &demands, &search.config(), &sim)?;
    let audit = replay_audit(&trace, &net);
    if let Some(p) = trace_path {
        fs::write(p, trace_csv(&net, &trace))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if let Some(p) = gantt_path {
        let rows = match at {
            Some(m) => trace_gantt_rows(&net, &trace, minutes(m)?),
            None => gantt_rows(&net, &trace.schedule, None),
        };
        fs::write(p, gantt_csv(&net, &rows)).with_context(|| format!("writing {}", p.display()))?;
    }
    let scheduled: Vec<&Demand> = demands
        .iter()
        .filter(|d| trace.schedule.contains(d.id))
        .collect();
    let lower = sod_lower_bound(&net, scheduled.iter().copied());
    let wall: f64 = trace.decisions.iter().map(|d| d.wall.as_secs_f64()).sum();
    let summary = json!({
        "seed": seed,
        "demands": demands.len(),
        "scheduled": trace.schedule.len(),
        "completed": trace.completed(&net),
        "dropped": trace.dropped.iter().map(|d| d.0).collect::<Vec<_>>(),
        "unscheduled": trace.unscheduled.iter().map(|d| d.0).collect::<Vec<_>>(),
        "scheduled_sod_min": trace.scheduled_sod.as_minutes(),
        "realized_sod_min": trace.realized_sod.as_minutes(),
        "lower_bound_min": lower.as_minutes(),
        "decisions": trace.decisions.len(),
        "scheduler_wall_s": wall,
        "window_breaches": trace.breaches.len(),
        "deadline_misses": trace.deadline_misses.len(),
        "violations": audit.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
    });
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&summary)?);
    } else {
        println!(
            "seed {seed}: {}/{} completed, {} dropped, SoD {} (bound {}), {} decisions in {:.3}s, audit {}",
            trace.completed(&net),
            demands.len(),
            trace.dropped.len(),
            trace.scheduled_sod,
            lower,
            trace.decisions.len(),
            wall,
            if audit.is_clean() && trace.breaches.is_empty() { "clean" } else { "FAILED" }
        );
        for v in &audit.violations {
            println!("  {v}");
        }
    }
    if !audit.is_clean() || !trace.breaches.is_empty() {
        bail!("simulation violated capacity or deadlines");
    }
    Ok(Outcome::Ok)
}

fn gantt(inputs: &Inputs, schedule: &Path, output: Option<&Path>) -> Result<Outcome> {
    let (net, demands) = load(inputs, true)?;
    let file: ScheduleFile = io::from_json(&read(schedule)?)?;
    let s = file.to_schedule(&net, &demands)?;
    write_or_print(output, &gantt_csv(&net, &gantt_rows(&net, &s, None)))?;
    Ok(Outcome::Ok)
}

fn generate(network: &Path, spec: &Path, seed: u64, output: Option<&Path>) -> Result<Outcome> {
    let net = io::parse_network(&read(network)?)?;
    let spec = GeneratorSpec::parse(&read(spec)?)?;
    let demands = spec.generate(&net, seed)?;
    let file = DemandFile::from_demands(&net, &demands);
    write_or_print(output, &serde_json::to_string_pretty(&file)?)?;
    Ok(Outcome::Ok)
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Validate { inputs, schedule } => validate(cli, inputs, schedule.as_deref()),
        Command::Analyze {
            inputs,
            now_min,
            period_min,
            per_period,
        } => analyze(cli, inputs, *now_min, *period_min, per_period.as_deref()),
        Command::Schedule {
            inputs,
            search,
            now_min,
            static_,
            oracle,
            require_complete,
            output,
        } => schedule(
            cli,
            inputs,
            search,
            *now_min,
            *static_,
            *oracle,
            *require_complete,
            output.as_deref(),
        ),
        Command::Simulate {
            inputs,
            search,
            seed,
            horizon_min,
            force_reschedule,
            trace,
            gantt,
            at_min,
        } => simulate(
            cli,
            inputs,
            search,
            *seed,
            *horizon_min,
            *force_reschedule,
            trace.as_deref(),
            gantt.as_deref(),
            *at_min,
        ),
        Command::Gantt {
            inputs,
            schedule,
            output,
        } => gantt(inputs, schedule, output.as_deref()),
        Command::Generate {
            network,
            spec,
            seed,
            output,
        } => generate(network, spec, *seed, output.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Incomplete) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
