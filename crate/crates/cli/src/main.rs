use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, ValueEnum};

use reach_core::bridge::{self, Endpoint, Server};
use reach_core::depmatrix::{build_matrices, DependencyMatrices};
use reach_core::engine::{
    invariant_violations, reach, symbolic_deadlocks, GroupCalls, LocalProvider, NextStateProvider, ReachReport,
    StoreSummary, Strategy, Summary, VariableDecl, DEFAULT_ENUMERATION_CAP,
};
use reach_core::ldd::{LddStore, StoreConfig, DEFAULT_CACHE, DEFAULT_NODE_TABLE, FALSE_NODE};
use reach_core::model::{elaborate, parse_machine, ElaboratedMachine};
use reach_core::ordering::{apply_order, combined_matrix, metrics, sloan_order, VariableOrder};
use reach_core::semantics::{explicit_reach, violated_invariant};

const MAX_WITNESSES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Bfs,
    Chaining,
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    Natural,
    Sloan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

/// Symbolic reachability analysis for B-lite machines.
#[derive(Parser, Debug)]
#[command(name = "reach", version)]
struct Cli {
    /// B-lite model file (not needed with --remote).
    model: Option<PathBuf>,

    /// Constant override, e.g. -c MAXINT=500.
    #[arg(short = 'c', long = "constant", value_name = "K=V")]
    constants: Vec<String>,

    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,

    #[arg(long, value_enum, default_value = "natural")]
    order: OrderArg,

    /// Report reachable states without successors.
    #[arg(long)]
    deadlock: bool,

    /// Check the INVARIANT on every reachable state.
    #[arg(long)]
    invariant: bool,

    /// Use a remote next-state server (default: $REACH_ENDPOINT).
    #[arg(long, value_name = "ENDPOINT", num_args = 0..=1, default_missing_value = "")]
    remote: Option<String>,

    /// Ask the remote server to shut down after the run.
    #[arg(long, requires = "remote")]
    stop_server: bool,

    /// Serve the model's next-state function on ENDPOINT until TERM.
    #[arg(long, value_name = "ENDPOINT")]
    serve: Option<String>,

    /// Node table capacity.
    #[arg(long, default_value_t = DEFAULT_NODE_TABLE)]
    node_table: u64,

    /// Operation cache capacity.
    #[arg(long, default_value_t = DEFAULT_CACHE)]
    cache: u64,

    /// Disable the operation cache.
    #[arg(long)]
    no_cache: bool,

    #[arg(long, value_enum, default_value = "text")]
    format: Format,

    /// Print the read/write dependency matrices and exit.
    #[arg(long)]
    matrices: bool,

    /// Detailed statistics.
    #[arg(long)]
    stats: bool,

    /// Write the explicit transition graph (explicit strategy only).
    #[arg(long, value_name = "PATH")]
    graph: Option<PathBuf>,

    /// Write the reachable set as a Graphviz LDD (symbolic strategies only).
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
}

/// A run that found something to report.
struct Violation;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Violation)) => ExitCode::from(1),
        Err(e) => {
            eprintln!("reach: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn overrides(cli: &Cli) -> Result<BTreeMap<String, i64>> {
    let mut out = BTreeMap::new();
    for kv in &cli.constants {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("constant override '{kv}' is not K=V"))?;
        let v: i64 = v.trim().parse().with_context(|| format!("value of constant '{k}'"))?;
        out.insert(k.trim().to_string(), v);
    }
    Ok(out)
}

fn load(cli: &Cli) -> Result<ElaboratedMachine> {
    let path = cli.model.as_ref().ok_or_else(|| anyhow!("no model file given"))?;
    let src = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let m = parse_machine(&src).with_context(|| path.display().to_string())?;
    Ok(elaborate(&m, &overrides(cli)?)?)
}

fn store(cli: &Cli) -> Result<LddStore> {
    Ok(LddStore::new(StoreConfig {
        node_table: cli.node_table,
        cache: cli.cache,
        cache_enabled: !cli.no_cache,
    })?)
}

fn format_state(vars: &[VariableDecl], s: &[u32]) -> String {
    vars.iter()
        .zip(s)
        .map(|(v, &i)| format!("{}={}", v.name, v.domain.label(i)))
        .collect::<Vec<_>>()
        .join(" ")
}

fn run(cli: &Cli) -> Result<Option<Violation>> {
    if let Some(ep) = &cli.serve {
        if cli.remote.is_some()
            || cli.strategy.is_some()
            || cli.deadlock
            || cli.invariant
            || cli.matrices
            || cli.order != OrderArg::Natural
        {
            bail!("--serve cannot be combined with analysis options");
        }
        let endpoint: Endpoint = ep.parse().map_err(|e: String| anyhow!(e))?;
        let server = Server::bind(load(cli)?, &endpoint)?;
        eprintln!("serving on {}", server.local_endpoint()?);
        let stats = server.run()?;
        eprintln!(
            "served {} connection(s), {} init and {} next-state requests",
            stats.connections, stats.init_requests, stats.next_requests
        );
        return Ok(None);
    }
    if cli.remote.is_some() {
        return run_remote(cli);
    }

    let em = load(cli)?;
    let dm = build_matrices(&em);
    let (em, dm) = if cli.order == OrderArg::Sloan {
        reorder(cli, &em, &dm)
    } else {
        (em, dm)
    };
    if cli.matrices {
        print!("{}", dm.dump());
        return Ok(None);
    }
    match cli.strategy.unwrap_or(StrategyArg::Bfs) {
        StrategyArg::Explicit => run_explicit(cli, &em),
        StrategyArg::Bfs => run_symbolic(cli, em, dm, Strategy::Bfs),
        StrategyArg::Chaining => run_symbolic(cli, em, dm, Strategy::Chaining),
    }
}

fn reorder(cli: &Cli, em: &ElaboratedMachine, dm: &DependencyMatrices) -> (ElaboratedMachine, DependencyMatrices) {
    let cm = combined_matrix(dm);
    let order = sloan_order(&cm, em.num_vars());
    let before = metrics(&cm, &VariableOrder::identity(em.num_vars()));
    let after = metrics(&cm, &order);
    if cli.format == Format::Text {
        eprintln!("order {}", order.names(&dm.variables).join(" "));
        eprintln!(
            "bandwidth {} -> {}, event span {} -> {}",
            before.bandwidth, after.bandwidth, before.total_event_span, after.total_event_span
        );
    }
    apply_order(em, dm, &order)
}

fn emit(cli: &Cli, summary: &Summary, vars: &[VariableDecl]) -> Option<Violation> {
    match cli.format {
        Format::Machine => println!("{}", summary.to_machine()),
        Format::Text => {
            print!("{}", summary.to_text(cli.stats));
            for (label, total, ws) in [
                ("deadlock", summary.deadlocks, &summary.deadlock_witnesses),
                (
                    "invariant violation",
                    summary.invariant_violations,
                    &summary.invariant_witnesses,
                ),
            ] {
                if let Some(total) = total.filter(|&t| t > 0) {
                    println!("{label} states ({total} total, showing {}):", ws.len());
                    for w in ws {
                        println!("  {}", format_state(vars, w));
                    }
                }
            }
        }
    }
    let found = summary.deadlocks.unwrap_or(0) + summary.invariant_violations.unwrap_or(0);
    (found > 0).then_some(Violation)
}

fn run_symbolic(
    cli: &Cli,
    em: ElaboratedMachine,
    dm: DependencyMatrices,
    strategy: Strategy,
) -> Result<Option<Violation>> {
    if cli.graph.is_some() {
        bail!("--graph needs --strategy explicit");
    }
    let mut store = store(cli)?;
    let mut provider = LocalProvider::with_matrices(em, dm);
    let report = reach(&mut provider, &mut store, strategy)?;
    let mut summary = Summary::from_report(&report, &store);
    let em = provider.machine();
    if cli.invariant {
        let bad = invariant_violations(&store, &report, em, DEFAULT_ENUMERATION_CAP)?;
        summary.invariant_violations = Some(bad.len() as u128);
        summary.invariant_witnesses = bad.iter().take(MAX_WITNESSES).map(|s| s.to_vec()).collect();
    }
    finish(cli, &mut store, &report, summary)
}

fn finish(cli: &Cli, store: &mut LddStore, report: &ReachReport, mut summary: Summary) -> Result<Option<Violation>> {
    if cli.deadlock {
        let dead = symbolic_deadlocks(store, report)?;
        summary.deadlocks = Some(store.sat_count(dead));
        if dead != FALSE_NODE {
            summary.deadlock_witnesses = store.enumerate_first(dead, MAX_WITNESSES);
        }
    }
    if cli.stats {
        summary.store = Some(StoreSummary::new(store.stats(), store.node_count(report.reachable)));
    }
    if let Some(path) = &cli.dot {
        fs::write(path, store.to_dot(report.reachable)).with_context(|| format!("cannot write {}", path.display()))?;
    }
    Ok(emit(cli, &summary, &report.info.variables))
}

fn run_remote(cli: &Cli) -> Result<Option<Violation>> {
    if cli.model.is_some() {
        bail!("--remote takes the model from the server; do not pass a model file");
    }
    if cli.order != OrderArg::Natural {
        bail!("--order sloan is not supported with --remote");
    }
    if cli.invariant {
        bail!("--invariant is not supported with --remote");
    }
    if cli.graph.is_some() {
        bail!("--graph is not supported with --remote");
    }
    let strategy = match cli.strategy.unwrap_or(StrategyArg::Bfs) {
        StrategyArg::Bfs => Strategy::Bfs,
        StrategyArg::Chaining => Strategy::Chaining,
        StrategyArg::Explicit => bail!("--strategy explicit is not supported with --remote"),
    };
    let endpoint: Endpoint = match cli.remote.as_deref() {
        Some("") | None => Endpoint::from_env()
            .ok_or_else(|| anyhow!("--remote without an endpoint needs {}", bridge::ENDPOINT_ENV))?
            .map_err(|e| anyhow!(e))?,
        Some(ep) => ep.parse().map_err(|e: String| anyhow!(e))?,
    };
    let mut provider = bridge::connect(&endpoint)?;
    if cli.matrices {
        let info = provider.init()?;
        let dm = DependencyMatrices {
            variables: info.variable_names(),
            groups: info.groups,
            rm: info.rm,
            wm: info.wm,
        };
        print!("{}", dm.dump());
        if cli.stop_server {
            provider.terminate()?;
        }
        return Ok(None);
    }
    let mut store = store(cli)?;
    let report = reach(&mut provider, &mut store, strategy)?;
    let summary = Summary::from_report(&report, &store);
    let outcome = finish(cli, &mut store, &report, summary);
    if cli.stop_server {
        provider.terminate()?;
    }
    outcome
}

fn run_explicit(cli: &Cli, em: &ElaboratedMachine) -> Result<Option<Violation>> {
    if cli.dot.is_some() {
        bail!("--dot needs a symbolic strategy");
    }
    let start = std::time::Instant::now();
    let result = explicit_reach(em)?;
    let wall_ms = start.elapsed().as_millis() as u64;
    let per_group = result.states.len() as u64;
    let mut summary = Summary {
        strategy: "explicit".into(),
        order: em.variables.iter().map(|v| v.name.clone()).collect(),
        states: result.states.len() as u128,
        iterations: result.level_sizes.len(),
        calls_total: result.nextstate_calls,
        calls: em
            .groups
            .iter()
            .map(|g| GroupCalls {
                group: g.name.clone(),
                calls: per_group,
            })
            .collect(),
        frontier_sizes: result.level_sizes.iter().map(|&n| n as u128).collect(),
        deadlocks: None,
        invariant_violations: None,
        deadlock_witnesses: Vec::new(),
        invariant_witnesses: Vec::new(),
        store: None,
        wall_ms,
    };
    if cli.deadlock {
        summary.deadlocks = Some(result.deadlocks.len() as u128);
        summary.deadlock_witnesses = result
            .deadlocks
            .iter()
            .take(MAX_WITNESSES)
            .map(|s| s.to_vec())
            .collect();
    }
    if cli.invariant {
        let mut bad: Vec<_> = result
            .states
            .iter()
            .filter(|s| violated_invariant(em, s).is_some())
            .collect();
        bad.sort();
        summary.invariant_violations = Some(bad.len() as u128);
        summary.invariant_witnesses = bad.iter().take(MAX_WITNESSES).map(|s| s.to_vec()).collect();
    }
    if let Some(path) = &cli.graph {
        let mut f = fs::File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
        result.write_graph(em, &mut f)?;
    }
    let vars: Vec<VariableDecl> = em
        .variables
        .iter()
        .map(|v| VariableDecl {
            name: v.name.clone(),
            domain: v.domain.clone(),
        })
        .collect();
    Ok(emit(cli, &summary, &vars))
}
