//! `zkfault`: keys, signatures, fault campaigns, recovery statistics and countermeasure checks.

mod table4;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::RngCore;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

use zkfault_core::attack_cross::run_cross_campaign;
use zkfault_core::attack_less::{run_campaign, CampaignConfig, CampaignMode, CampaignOutput};
use zkfault_core::countermeasures::{
    bench, cost_formula, cost_report, resistance_probe, BenchReport, CostCounters, Pipeline,
};
use zkfault_core::cross::{
    cross_check_response, cross_keygen, cross_sign, CrossParams, CrossPublicKey, CrossSecretKey,
    CrossSignature,
};
use zkfault_core::fault::FaultModel;
use zkfault_core::less::{
    commit, keygen, sign, verify, LessPublicKey, LessSecretKey, LessSignature,
};
use zkfault_core::params::LessParams;
use zkfault_core::seedtree::compute_seeds_to_publish;
use zkfault_core::stats::{
    expected_recovered, expected_recovered_effective, prob_effective, to_f64, NodeContext,
};
use zkfault_core::xof::Seed;

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("invalid hex: {0}")]
    Hex(#[from] hex::FromHexError),
    #[error("parameters: {0}")]
    Param(String),
    #[error("{0}")]
    Core(String),
    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            Self::Io { .. } => "io",
            Self::Json { .. } => "json",
            Self::Csv(_) => "csv",
            Self::Hex(_) => "hex",
            Self::Param(_) => "params",
            Self::Core(_) => "core",
            Self::Threads(_) => "threads",
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "zkfault",
    version,
    about = "Fault-attack laboratory for LESS and CROSS signatures"
)]
struct Cli {
    /// Worker threads for campaigns and signing.
    #[arg(long, global = true, env = "ZKFAULT_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// LESS key generation, signing and verification.
    #[command(subcommand)]
    Less(LessCmd),
    /// CROSS key generation, signing and verification.
    #[command(subcommand)]
    Cross(CrossCmd),
    /// Fault campaigns.
    #[command(subcommand)]
    Attack(AttackCmd),
    /// Recovery statistics.
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Countermeasure benchmark and resistance probe.
    #[command(subcommand)]
    Cm(CmCmd),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MsgArgs {
    /// Message as UTF-8 text.
    #[arg(long)]
    msg: Option<String>,
    /// Message read from a file.
    #[arg(long)]
    msg_file: Option<PathBuf>,
}

#[derive(Args)]
struct KeygenArgs {
    /// Registry name or path to a parameter JSON file.
    #[arg(long)]
    param: Option<String>,
    /// Hex entropy; drawn from the OS when absent.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, default_value = "keys/sk.json")]
    sk: PathBuf,
    #[arg(long, default_value = "keys/pk.json")]
    pk: PathBuf,
}

#[derive(Args)]
struct SignArgs {
    #[arg(long, default_value = "keys/sk.json")]
    sk: PathBuf,
    #[command(flatten)]
    msg: MsgArgs,
    /// Hex signing randomness; drawn from the OS when absent.
    #[arg(long)]
    seed: Option<String>,
    #[arg(long, default_value = "sig.json")]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value = "keys/pk.json")]
    pk: PathBuf,
    #[command(flatten)]
    msg: MsgArgs,
    #[arg(long, default_value = "sig.json")]
    sig: PathBuf,
}

#[derive(Subcommand)]
enum LessCmd {
    Keygen(KeygenArgs),
    Sign(SignArgs),
    Verify(VerifyArgs),
}

#[derive(Subcommand)]
enum CrossCmd {
    Keygen(KeygenArgs),
    Sign(SignArgs),
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Less,
    Cross,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "less")]
    scheme: Scheme,
    /// Registry name or path to a parameter JSON file.
    #[arg(long)]
    param: Option<String>,
    #[arg(long, default_value_t = 1)]
    fault_node: usize,
    #[arg(long, default_value_t = 1.0)]
    p_success: f64,
    #[arg(long, default_value = "digest-only")]
    mode: CampaignMode,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Hex master seed; every trial derives its randomness from it.
    #[arg(long)]
    master_seed: String,
    /// LESS fault model (CROSS always flips a flag 0→1).
    #[arg(long, default_value = "skip_store")]
    model: FaultModel,
    #[arg(long, default_value_t = 100_000)]
    max_attempts: usize,
    #[arg(long, default_value = "report.json")]
    out: PathBuf,
    #[arg(long, default_value = "campaign.csv")]
    csv: PathBuf,
    /// Skip the per-attempt CSV.
    #[arg(long)]
    no_csv: bool,
}

#[derive(Subcommand)]
enum AttackCmd {
    Run(RunArgs),
}

#[derive(Subcommand)]
enum StatsCmd {
    /// Closed-form E[X] for one node.
    Expected {
        #[arg(long, required_unless_present_all = ["t", "w", "s"])]
        param: Option<String>,
        #[arg(long, default_value_t = 1)]
        node: usize,
        #[arg(long, requires_all = ["w", "s"], conflicts_with = "param")]
        t: Option<usize>,
        #[arg(long, requires_all = ["t", "s"], conflicts_with = "param")]
        w: Option<usize>,
        #[arg(long, requires_all = ["t", "w"], conflicts_with = "param")]
        s: Option<usize>,
    },
    /// Closed form, Monte Carlo and reference values for every parameter set.
    Table4 {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value = "2a")]
        master_seed: String,
        #[arg(long, default_value_t = 1)]
        node: usize,
        /// JSON output file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CmCmd {
    /// Signing time of both pipelines plus cost counters.
    Bench {
        #[arg(long, default_value = "less-1b")]
        param: String,
        #[arg(long, default_value_t = 20)]
        iters: usize,
        #[arg(long, default_value = "00")]
        seed: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive single-fault sweep; exits 1 if any hidden pair is revealed.
    Probe {
        #[arg(long, default_value = "countermeasure")]
        pipeline: Pipeline,
        /// Leaf count of the tree (power of two).
        #[arg(long, default_value_t = 8)]
        l2: usize,
        #[arg(long)]
        t: Option<usize>,
        #[arg(long, default_value_t = 2)]
        s: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            let diag = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{diag}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    match cli.command {
        Command::Less(c) => less_cmd(c),
        Command::Cross(c) => cross_cmd(c),
        Command::Attack(AttackCmd::Run(a)) => attack_run(a),
        Command::Stats(c) => stats_cmd(c),
        Command::Cm(c) => cm_cmd(c),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.into(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.into(),
            source,
        })?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.into(),
        source,
    })
}

fn print_json<T: Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("serializable")
    );
}

fn message(m: &MsgArgs) -> Result<Vec<u8>> {
    match (&m.msg, &m.msg_file) {
        (Some(s), _) => Ok(s.as_bytes().to_vec()),
        (None, Some(p)) => fs::read(p).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        }),
        (None, None) => unreachable!("clap enforces one message source"),
    }
}

fn entropy(seed: &Option<String>) -> Result<Vec<u8>> {
    match seed {
        Some(h) => Ok(hex::decode(h)?),
        None => {
            let mut b = vec![0u8; 32];
            rand::rngs::OsRng.fill_bytes(&mut b);
            Ok(b)
        }
    }
}

fn derive(entropy: &[u8], label: &[u8], len: usize) -> Seed {
    Seed::derive(b"cli", &[entropy, label], len)
}

fn is_file_param(p: &str) -> bool {
    p.ends_with(".json") || Path::new(p).is_file()
}

fn less_params(p: &str) -> Result<LessParams> {
    let params: LessParams = if is_file_param(p) {
        read_json(Path::new(p))?
    } else {
        LessParams::by_name(p).map_err(|e| CliError::Param(e.to_string()))?
    };
    params
        .validate()
        .map_err(|e| CliError::Param(e.to_string()))?;
    Ok(params)
}

fn cross_params(p: &str) -> Result<CrossParams> {
    let params: CrossParams = if is_file_param(p) {
        read_json(Path::new(p))?
    } else {
        CrossParams::by_name(p).map_err(|e| CliError::Param(e.to_string()))?
    };
    params
        .validate()
        .map_err(|e| CliError::Param(e.to_string()))?;
    Ok(params)
}

fn verdict(ok: std::result::Result<(), String>) -> ExitCode {
    match ok {
        Ok(()) => {
            print_json(&serde_json::json!({ "valid": true }));
            ExitCode::SUCCESS
        }
        Err(reason) => {
            print_json(&serde_json::json!({ "valid": false, "reason": reason }));
            ExitCode::from(1)
        }
    }
}

fn less_cmd(cmd: LessCmd) -> Result<ExitCode> {
    match cmd {
        LessCmd::Keygen(a) => {
            let params = less_params(a.param.as_deref().unwrap_or("less-small"))?;
            let e = entropy(&a.seed)?;
            let len = params.seed_bytes();
            let (sk, pk) = keygen(
                &params,
                &derive(&e, b"less-mseed", len),
                &derive(&e, b"less-gseed", len),
            )
            .map_err(|e| CliError::Core(e.to_string()))?;
            write_json(&a.sk, &sk)?;
            write_json(&a.pk, &pk)?;
        }
        LessCmd::Sign(a) => {
            let sk: LessSecretKey = read_json(&a.sk)?;
            let msg = message(&a.msg)?;
            let rng = derive(&entropy(&a.seed)?, b"less-sign", 32);
            write_json(&a.out, &sign(&sk, &msg, &rng))?;
        }
        LessCmd::Verify(a) => {
            let pk: LessPublicKey = read_json(&a.pk)?;
            let msg = message(&a.msg)?;
            let sig: LessSignature = match read_json(&a.sig) {
                Ok(s) => s,
                Err(CliError::Json { source, .. }) => return Ok(verdict(Err(source.to_string()))),
                Err(e) => return Err(e),
            };
            return Ok(verdict(verify(&pk, &msg, &sig).map_err(|e| e.to_string())));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cross_cmd(cmd: CrossCmd) -> Result<ExitCode> {
    match cmd {
        CrossCmd::Keygen(a) => {
            let params = cross_params(a.param.as_deref().unwrap_or("cross-desk"))?;
            let e = entropy(&a.seed)?;
            let (sk, pk) = cross_keygen(&params, &derive(&e, b"cross-key", params.seed_bytes()))
                .map_err(|e| CliError::Core(e.to_string()))?;
            write_json(&a.sk, &sk)?;
            write_json(&a.pk, &pk)?;
        }
        CrossCmd::Sign(a) => {
            let sk: CrossSecretKey = read_json(&a.sk)?;
            let msg = message(&a.msg)?;
            let rng = derive(&entropy(&a.seed)?, b"cross-sign", 32);
            write_json(&a.out, &cross_sign(&sk, &msg, &rng))?;
        }
        CrossCmd::Verify(a) => {
            let pk: CrossPublicKey = read_json(&a.pk)?;
            let msg = message(&a.msg)?;
            let sig: CrossSignature = match read_json(&a.sig) {
                Ok(s) => s,
                Err(CliError::Json { source, .. }) => return Ok(verdict(Err(source.to_string()))),
                Err(e) => return Err(e),
            };
            return Ok(verdict(
                cross_check_response(&pk, &msg, &sig).map_err(|e| e.to_string()),
            ));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn attack_run(a: RunArgs) -> Result<ExitCode> {
    let master = hex::decode(&a.master_seed)?;
    let mut cfg = CampaignConfig::new(a.fault_node, a.p_success, a.mode, a.trials, &master);
    cfg.model = a.model;
    cfg.max_attempts = a.max_attempts;
    cfg.record_rows = !a.no_csv;
    let CampaignOutput { mut report, rows } = match a.scheme {
        Scheme::Less => run_campaign(
            &less_params(a.param.as_deref().unwrap_or("less-small"))?,
            &cfg,
        ),
        Scheme::Cross => run_cross_campaign(
            &cross_params(a.param.as_deref().unwrap_or("cross-desk"))?,
            &cfg,
        ),
    }
    .map_err(|e| CliError::Core(e.to_string()))?;
    if !a.no_csv {
        let mut w = csv::Writer::from_path(&a.csv)?;
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush().map_err(|source| CliError::Io {
            path: a.csv.clone(),
            source,
        })?;
        report.per_trial_csv_path = Some(a.csv.display().to_string());
    }
    write_json(&a.out, &report)?;
    print_json(&report);
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct Expected {
    t: usize,
    w: usize,
    s: usize,
    node: usize,
    ell: usize,
    expected_x: f64,
    prob_effective: f64,
    expected_x_effective: Option<f64>,
    expected_x_effective_exact: Option<String>,
}

fn stats_cmd(cmd: StatsCmd) -> Result<ExitCode> {
    match cmd {
        StatsCmd::Expected {
            param,
            node,
            t,
            w,
            s,
        } => {
            let (t, w, s) = match param {
                Some(p) => {
                    let p = less_params(&p)?;
                    (p.t, p.w, p.s)
                }
                None => (t.expect("clap"), w.expect("clap"), s.expect("clap")),
            };
            let ctx =
                NodeContext::for_node(t, w, s, node).map_err(|e| CliError::Param(e.to_string()))?;
            let eff = expected_recovered_effective(&ctx);
            print_json(&Expected {
                t,
                w,
                s,
                node,
                ell: ctx.ell,
                expected_x: to_f64(&expected_recovered(&ctx)),
                prob_effective: to_f64(&prob_effective(&ctx)),
                expected_x_effective: eff.as_ref().map(to_f64),
                expected_x_effective_exact: eff.map(|r| r.to_string()),
            });
        }
        StatsCmd::Table4 {
            trials,
            master_seed,
            node,
            out,
        } => {
            let master = hex::decode(&master_seed)?;
            let rows = table4::build(trials, &master, node).map_err(CliError::Core)?;
            print!("{}", table4::render(&rows));
            if let Some(out) = out {
                write_json(&out, &rows)?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BenchOutput {
    bench: BenchReport,
    t: usize,
    w: usize,
    disclosed_nodes: usize,
    counters_original: CostCounters,
    counters_countermeasure: CostCounters,
    formula_original: CostCounters,
    formula_countermeasure: CostCounters,
}

fn cm_cmd(cmd: CmCmd) -> Result<ExitCode> {
    match cmd {
        CmCmd::Bench {
            param,
            iters,
            seed,
            out,
        } => {
            let params = less_params(&param)?;
            let e = hex::decode(&seed)?;
            let len = params.seed_bytes();
            let (sk, _) = keygen(
                &params,
                &derive(&e, b"less-mseed", len),
                &derive(&e, b"less-gseed", len),
            )
            .map_err(|e| CliError::Core(e.to_string()))?;
            let bench_seed = derive(&e, b"bench", 32);
            let tr = commit(&sk, b"benchmark", &bench_seed);
            let l2 = params.l2();
            let r = compute_seeds_to_publish(&tr.d.mask(), l2)
                .published_nodes()
                .len();
            let report = BenchOutput {
                bench: bench(&sk, iters, &bench_seed),
                t: params.t,
                w: params.w,
                disclosed_nodes: r,
                counters_original: cost_report(Pipeline::Original, &tr.d, l2),
                counters_countermeasure: cost_report(Pipeline::Countermeasure, &tr.d, l2),
                formula_original: cost_formula(Pipeline::Original, params.t, params.w, r, l2),
                formula_countermeasure: cost_formula(
                    Pipeline::Countermeasure,
                    params.t,
                    params.w,
                    r,
                    l2,
                ),
            };
            if let Some(out) = out {
                write_json(&out, &report)?;
            }
            print_json(&report);
            Ok(ExitCode::SUCCESS)
        }
        CmCmd::Probe {
            pipeline,
            l2,
            t,
            s,
            out,
        } => {
            if !l2.is_power_of_two() || !(2..=16).contains(&l2) {
                return Err(CliError::Param(
                    "l2 must be a power of two in [2, 16]".into(),
                ));
            }
            let t = t.unwrap_or(l2);
            if t > l2 || t * 2 <= l2 || s < 2 || (s as f64).powi(t as i32) > 1e7 {
                return Err(CliError::Param(
                    "need l2/2 < t <= l2, s >= 2 and s^t <= 1e7".into(),
                ));
            }
            let report = resistance_probe(pipeline, l2, t, s);
            if let Some(out) = out {
                write_json(&out, &report)?;
            }
            print_json(&report);
            Ok(if report.violations == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
