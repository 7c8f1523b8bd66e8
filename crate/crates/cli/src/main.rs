use std::fs::File;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use facework_core::harness::{
    resolve_variant, run_batch, run_episode_full, write_rows, write_summary, BatchRow, BatchSpec,
    Condition, PolicyKind, ScriptedPolicy,
};
use facework_core::session::EventLogWriter;
use facework_service::{Hub, HubConfig, VariantRegistry};
use tracing_subscriber::EnvFilter;

#[derive(Parser)]
#[command(
    name = "facework",
    version,
    about = "Ranking negotiation with a face-work aware agent"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Host negotiation sessions over HTTP and websocket.
    Serve(ServeArgs),
    /// Play one scripted episode and print its metrics row.
    Episode(EpisodeArgs),
    /// Run a batch of scripted episodes.
    Batch(BatchArgs),
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    listen: SocketAddr,
    /// Directory of variant `.toml` files. Defaults to the shipped variants.
    #[arg(long)]
    config_dir: Option<PathBuf>,
    #[arg(long, default_value = "logs")]
    log_dir: PathBuf,
    /// Use this tie-break seed for every session regardless of the request.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EpisodeArgs {
    /// Shipped variant id or path to a variant `.toml`.
    #[arg(long, default_value = "desert-a")]
    variant: String,
    #[arg(long, default_value = "facework")]
    condition: Condition,
    /// compliant, oracle, stubborn[:p] or random[:move_prob].
    #[arg(long, default_value = "compliant")]
    policy: PolicyKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    max_turns: u32,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the episode's event log here.
    #[arg(long)]
    log: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    /// TOML batch spec. When given, the spec flags below are ignored.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "desert-a,desert-b")]
    variants: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "facework,baseline")]
    conditions: Vec<Condition>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "compliant,stubborn:0.5,random:0.5"
    )]
    policies: Vec<PolicyKind>,
    /// Seed list, e.g. `0-9` or `1,4,9`.
    #[arg(long, default_value = "0-9")]
    seeds: String,
    #[arg(long, default_value_t = 50)]
    max_turns: u32,
    #[arg(long, default_value_t = 0)]
    order_seed: u64,
    /// Per-episode CSV; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Per-condition means as CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Write every episode's event log into this directory.
    #[arg(long)]
    log_dir: Option<PathBuf>,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b): (u64, u64) = (a.parse()?, b.parse()?);
                if a > b {
                    bail!("empty seed range {part}");
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().with_context(|| format!("bad seed {part:?}"))?),
        }
    }
    Ok(out)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

async fn serve(args: ServeArgs) -> Result<()> {
    let registry = match &args.config_dir {
        Some(dir) => VariantRegistry::load_dir(dir)
            .with_context(|| format!("loading variants from {}", dir.display()))?,
        None => VariantRegistry::builtin(),
    };
    if registry.is_empty() {
        bail!("no variants found");
    }
    let hub = Hub::new(
        registry,
        HubConfig {
            log_dir: args.log_dir,
            seed_override: args.seed,
        },
    );
    let listener = tokio::net::TcpListener::bind(args.listen)
        .await
        .with_context(|| format!("binding {}", args.listen))?;
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
        tracing::info!("shutting down");
    };
    facework_service::serve(listener, hub, shutdown).await?;
    Ok(())
}

fn episode(args: EpisodeArgs) -> Result<()> {
    let variant = resolve_variant(&args.variant, Path::new("."))?;
    let policy = ScriptedPolicy::for_variant(args.policy, &variant, args.seed)?;
    let outcome = run_episode_full(
        &variant,
        policy,
        args.condition.facework_enabled(),
        args.seed,
        args.max_turns,
    )?;
    let log = match &args.log {
        Some(path) => {
            EventLogWriter::create(path)
                .and_then(|mut w| w.append_all(outcome.state.event_log()))
                .with_context(|| format!("writing {}", path.display()))?;
            path.display().to_string()
        }
        None => String::new(),
    };
    let m = outcome.metrics;
    let row = BatchRow {
        policy: args.policy.label().to_string(),
        seed: args.seed,
        order: 1,
        condition: args.condition,
        variant: variant.variant_id.clone(),
        turns: m.turns,
        moves_total: m.moves_total,
        human_moves: m.human_moves,
        agent_moves: m.agent_moves,
        final_distance_to_agent_pref: m.final_distance_to_agent_pref,
        final_distance_to_human_pref: m.final_distance_to_human_pref,
        reversals_attempted_by_agent: m.reversals_attempted_by_agent,
        repeats_attempted_by_agent: m.repeats_attempted_by_agent,
        converged: m.converged,
        log,
    };
    write_rows(&[row], output(args.output.as_deref())?)?;
    Ok(())
}

fn batch(args: BatchArgs) -> Result<()> {
    let spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let base = path.parent().unwrap_or(Path::new("."));
            BatchSpec::from_toml_str(&text, base)
                .with_context(|| format!("in {}", path.display()))?
        }
        None => BatchSpec {
            variants: args
                .variants
                .iter()
                .map(|v| resolve_variant(v, Path::new(".")))
                .collect::<Result<_, _>>()?,
            conditions: args.conditions,
            policies: args.policies,
            seeds: parse_seeds(&args.seeds)?,
            max_turns: args.max_turns,
            order_seed: args.order_seed,
        },
    };
    let result = run_batch(&spec, args.log_dir.as_deref())?;
    write_rows(&result.rows, output(args.output.as_deref())?)?;
    if let Some(path) = &args.summary {
        write_summary(
            &result.summary,
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )?;
    }
    tracing::info!(episodes = result.rows.len(), "batch finished");
    Ok(())
}

fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(io::stderr)
        .init();
    match Cli::parse().command {
        Command::Serve(args) => tokio::runtime::Runtime::new()?.block_on(serve(args)),
        Command::Episode(args) => episode(args),
        Command::Batch(args) => batch(args),
    }
}
