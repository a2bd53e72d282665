use std::fs;
use std::io::Write;
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use fpsi_core::error::ProtocolError;
use fpsi_core::fpsi;
use fpsi_core::functionalities::{Dealer, FuncError};
use fpsi_core::harness::{self, gen_dataset, oracle, parse_variant, Sweep};
use fpsi_core::params::{Metric, ParamError, Params};
use fpsi_core::point::{DatasetError, PointSet};
use fpsi_core::rng;
use fpsi_core::session::{Party, Role};
use fpsi_core::transport::Channel;

#[derive(Parser)]
#[command(name = "fpsi", version, about = "Fuzzy private set intersection over a trusted-dealer backend")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    Sender,
    Receiver,
    Dealer,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a sender/receiver dataset pair satisfying the disjointness assumption.
    Gen {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        delta: u64,
        #[arg(long, default_value_t = 32)]
        bits: u32,
        /// Fraction of receiver points placed close to a sender point.
        #[arg(long, default_value_t = 0.5)]
        rho: f64,
        /// Metric whose ball the matched points are drawn from (linf, l1, l2, ...).
        #[arg(long, default_value = "linf")]
        metric: Metric,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_q: PathBuf,
        #[arg(long)]
        out_w: PathBuf,
    },
    /// Run one endpoint of a networked session.
    Run {
        #[arg(long, value_enum)]
        role: RoleArg,
        #[arg(long, default_value = "linf")]
        variant: String,
        /// Exponent of the L_p variants.
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long)]
        delta: Option<u64>,
        /// Size of the other party's set.
        #[arg(long)]
        peer_size: Option<usize>,
        /// Address to accept the peer (or, for the dealer, both parties) on.
        #[arg(long, conflicts_with = "connect")]
        listen: Option<String>,
        /// Address of a listening peer.
        #[arg(long)]
        connect: Option<String>,
        /// Address of the dealer.
        #[arg(long)]
        dealer: Option<String>,
        #[arg(long)]
        set: Option<PathBuf>,
        /// Append a structured stats record to this file.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Receiver output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Plaintext fuzzy intersection of two dataset files.
    Oracle {
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        w: PathBuf,
        /// linf or lp
        #[arg(long, default_value = "linf")]
        metric: String,
        #[arg(long)]
        delta: u64,
        #[arg(long, default_value_t = 2)]
        p: u32,
    },
    /// Run a parameter sweep in process and emit one record per run.
    Bench {
        /// e.g. `variant=linf,linf-prefix;m=1024;n=1024;d=4;delta=16,64,256,1024`
        #[arg(long)]
        sweep: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_set(path: &Path) -> Result<(PointSet, u32)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    PointSet::from_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn append_line(path: &Path, line: &str) -> Result<()> {
    let mut f = fs::OpenOptions::new().create(true).append(true).open(path)?;
    writeln!(f, "{line}")?;
    Ok(())
}

fn metric_of(name: &str, p: u32) -> Result<Metric> {
    match name {
        "linf" => Ok(Metric::Linf),
        "lp" => Ok(Metric::Lp(p)),
        other => other.parse().map_err(|e: String| anyhow!(e)),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_party(
    role: Role,
    variant: &str,
    p: u32,
    delta: u64,
    peer_size: usize,
    listen: Option<String>,
    connect: Option<String>,
    dealer: &str,
    set_path: &Path,
    stats: Option<&Path>,
    out: Option<&Path>,
    seed: u64,
) -> Result<()> {
    let (set, bits) = read_set(set_path)?;
    let (metric, prefix) = parse_variant(variant, p).ok_or_else(|| anyhow!("unknown variant `{variant}`"))?;
    let (m, n) = match role {
        Role::Sender => (set.len(), peer_size),
        Role::Receiver => (peer_size, set.len()),
    };
    let params = Params::new(m, n, set.dim(), delta, metric, bits, prefix);
    params.validate()?;
    let peer = match (listen, connect) {
        (Some(addr), None) => {
            let l = TcpListener::bind(&addr).with_context(|| format!("binding {addr}"))?;
            Channel::accept(&l)?
        }
        (None, Some(addr)) => Channel::connect(&addr).with_context(|| format!("connecting to {addr}"))?,
        _ => bail!("exactly one of --listen and --connect is required"),
    };
    let dealer = Channel::connect(dealer).with_context(|| format!("connecting to dealer {dealer}"))?;
    let start = Instant::now();
    let mut party = Party::connect(role, params.clone(), peer, dealer, seed)?;
    let z = fpsi::run(&mut party, &set)?;
    let report = party.finish()?;
    let wall = start.elapsed();
    if let Some(z) = &z {
        write_out(out, &PointSet::new(params.d, z.clone()).to_text(params.bits))?;
    }
    if let Some(path) = stats {
        let rec = json!({
            "role": role.to_string(),
            "variant": variant,
            "metric": params.metric.to_string(),
            "m": params.m, "n": params.n, "d": params.d, "delta": params.delta, "bits": params.bits,
            "seed": seed,
            "peer_sent": report.peer.sent,
            "peer_received": report.peer.received,
            "peer_sent_by_phase": report.peer_by_phase.iter().map(|(k, c)| (k.clone(), c.sent)).collect::<std::collections::BTreeMap<_, _>>(),
            "peer_by_tag": report.peer_by_tag.iter().map(|(k, c)| (k.clone(), json!({"sent": c.sent, "received": c.received}))).collect::<serde_json::Map<_, _>>(),
            "dealer_sent": report.dealer.sent,
            "dealer_received": report.dealer.received,
            "sent_digest": hex::encode(report.sent_digest),
            "received_digest": hex::encode(report.received_digest),
            "wall_ms": wall.as_secs_f64() * 1e3,
            "z_len": z.as_ref().map(Vec::len),
        });
        append_line(path, &rec.to_string())?;
    }
    Ok(())
}

fn run_dealer(listen: &str, seed: u64, stats: Option<&Path>) -> Result<()> {
    let l = TcpListener::bind(listen).with_context(|| format!("binding {listen}"))?;
    // parties are labelled by connection order; the dealer treats them symmetrically
    let mut a = Channel::accept(&l)?;
    let mut b = Channel::accept(&l)?;
    let report = Dealer::new(seed).serve(&mut a, &mut b)?;
    if let Some(path) = stats {
        let rec = json!({
            "role": "dealer",
            "seed": seed,
            "invocations": report.invocations.len(),
            "first_sent": report.sender_counts.sent,
            "first_received": report.sender_counts.received,
            "second_sent": report.receiver_counts.sent,
            "second_received": report.receiver_counts.received,
        });
        append_line(path, &rec.to_string())?;
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Gen { m, n, d, delta, bits, rho, metric, seed, out_q, out_w } => {
            let params = Params::new(m, n, d, delta, metric, bits, false);
            let ds = gen_dataset(&params, rho, &mut rng::derive("cli-gen", &seed.to_le_bytes()))?;
            write_out(Some(&out_q), &ds.q.to_text(bits))?;
            write_out(Some(&out_w), &ds.w.to_text(bits))?;
            eprintln!("expected intersection size {}", ds.expected.len());
            Ok(())
        }
        Cmd::Run { role, variant, p, delta, peer_size, listen, connect, dealer, set, stats, out, seed } => match role {
            RoleArg::Dealer => {
                let addr = listen.ok_or_else(|| anyhow!("the dealer needs --listen"))?;
                run_dealer(&addr, seed, stats.as_deref())
            }
            RoleArg::Sender | RoleArg::Receiver => {
                let role = if matches!(role, RoleArg::Sender) { Role::Sender } else { Role::Receiver };
                run_party(
                    role,
                    &variant,
                    p,
                    delta.ok_or_else(|| anyhow!("--delta is required"))?,
                    peer_size.ok_or_else(|| anyhow!("--peer-size is required"))?,
                    listen,
                    connect,
                    &dealer.ok_or_else(|| anyhow!("--dealer is required"))?,
                    &set.ok_or_else(|| anyhow!("--set is required"))?,
                    stats.as_deref(),
                    out.as_deref(),
                    seed,
                )
            }
        },
        Cmd::Oracle { q, w, metric, delta, p } => {
            let (qs, bits) = read_set(&q)?;
            let (ws, _) = read_set(&w)?;
            let z = oracle(&qs, &ws, metric_of(&metric, p)?, delta);
            write_out(None, &PointSet::new(qs.dim(), z).to_text(bits))
        }
        Cmd::Bench { sweep, out } => {
            let sweep: Sweep = sweep.parse()?;
            let mut lines = Vec::new();
            harness::bench(&sweep, |rec| {
                let line = rec.to_line();
                eprintln!("{line}");
                lines.push(line);
            })?;
            let mut text = lines.join("\n");
            text.push('\n');
            write_out(out.as_deref(), &text)
        }
    }
}

/// 0 ok, 2 validation, 3 desync, 4 dealer abort, 1 anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ProtocolError>() {
            if e.is_validation() {
                return 2;
            }
            if e.is_desync() {
                return 3;
            }
            if e.is_dealer_abort() {
                return 4;
            }
        }
        if cause.is::<ParamError>() || cause.is::<DatasetError>() || cause.is::<harness::GenError>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<FuncError>() {
            if matches!(e, FuncError::Mismatch { .. } | FuncError::Abort(_)) {
                return 4;
            }
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
