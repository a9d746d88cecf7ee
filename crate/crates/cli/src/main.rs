use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use qfidp_core::audit::{challenge, commit, respond, verify, AuditRecord, ChallengeMode, Digest};
use qfidp_core::harness::{experiment, experiments, ExperimentConfig};
use qfidp_core::qfi::lambda_max_samples;

#[derive(Parser, Debug)]
#[command(name = "qfidp", version, about = "QFI-based privacy experiments and audit tooling")]
struct Cli {
    /// TOML config file; omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Exit with status 2 when any acceptance check fails.
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    Tradeoff,
    Spectrum,
    Pareto,
    Hwnoise,
    Compose,
    Adversary,
    Adaptive,
    Dephasing,
    Classical,
    /// Every experiment in turn.
    All,
    /// List experiments.
    List,
    /// Print the effective configuration as TOML.
    Config,
    #[command(subcommand)]
    Audit(AuditCmd),
}

#[derive(Subcommand, Debug)]
enum AuditCmd {
    /// Commit to per-sample records; writes records.json and commitment.json.
    Commit,
    /// Draw a challenge for a commitment; writes challenge.json.
    Challenge(ChallengeArgs),
    /// Open the challenged records and verify; writes transcript.json.
    Verify(VerifyArgs),
    /// Run the simulated honest/fraud trials.
    Run,
}

#[derive(Args, Debug)]
struct ChallengeArgs {
    #[arg(long)]
    commitment: PathBuf,
    /// Derive the challenge from the commitment instead of a seed.
    #[arg(long)]
    fiat_shamir: bool,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    commitment: PathBuf,
    #[arg(long)]
    challenge: PathBuf,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one experiment, writes its outputs and reports whether checks passed.
fn run_named(name: &str, cfg: &ExperimentConfig) -> Result<bool> {
    let exp = experiment(name)?;
    let out = exp.run(cfg).with_context(|| format!("running {name}"))?;
    let files = out.write(Path::new(&cfg.out_dir))?;
    for c in &out.checks {
        println!("{name}: {} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    for f in files {
        log::info!("wrote {}", f.display());
    }
    Ok(out.all_passed())
}

fn write_json(dir: &Path, name: &str, v: &serde_json::Value) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v)?)?;
    Ok(p)
}

fn read_json(p: &Path) -> Result<serde_json::Value> {
    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn audit(cmd: &AuditCmd, cfg: &ExperimentConfig) -> Result<bool> {
    let dir = Path::new(&cfg.out_dir);
    let mc = cfg.mechanism(cfg.audit_gamma)?;
    match cmd {
        AuditCmd::Commit => {
            let data = cfg.dataset()?;
            let n = cfg.audit_n.min(data.len());
            let lam = lambda_max_samples(&data.points[..n], &cfg.embedding()?)?;
            let records: Vec<AuditRecord> =
                lam.iter().enumerate().map(|(i, l)| AuditRecord::honest(i, *l, &mc)).collect::<Result<_, _>>()?;
            let (tree, eps) = commit(&records)?;
            write_json(dir, "records.json", &serde_json::to_value(&records)?)?;
            let p = write_json(
                dir,
                "commitment.json",
                &json!({ "root": tree.root, "eps_claimed": eps, "records": n, "gamma": cfg.audit_gamma }),
            )?;
            println!("root {} eps_claimed {eps} -> {}", tree.root, p.display());
            Ok(true)
        }
        AuditCmd::Challenge(a) => {
            let c = read_json(&a.commitment)?;
            let root: Digest = serde_json::from_value(c["root"].clone())?;
            let eps = c["eps_claimed"].as_f64().context("commitment lacks eps_claimed")?;
            let n = c["records"].as_u64().context("commitment lacks records")? as usize;
            let (mode, label) = if a.fiat_shamir {
                (ChallengeMode::FiatShamir { root, eps_claimed: eps }, "fiat-shamir")
            } else {
                (ChallengeMode::Interactive { seed: cfg.seed }, "interactive")
            };
            let set = challenge(n, cfg.audit_ratio, mode)?;
            let p = write_json(dir, "challenge.json", &json!({ "mode": label, "seed": cfg.seed, "indices": set }))?;
            println!("{} indices ({label}) -> {}", set.len(), p.display());
            Ok(true)
        }
        AuditCmd::Verify(a) => {
            let records: Vec<AuditRecord> = serde_json::from_value(read_json(&a.records)?)?;
            let c = read_json(&a.commitment)?;
            let root: Digest = serde_json::from_value(c["root"].clone())?;
            let eps = c["eps_claimed"].as_f64().context("commitment lacks eps_claimed")?;
            let set: Vec<usize> = serde_json::from_value(read_json(&a.challenge)?["indices"].clone())?;
            let (tree, _) = commit(&records)?;
            if tree.root != root {
                log::warn!("records hash to {} but the commitment is {root}", tree.root);
            }
            if let Some(&bad) = set.iter().find(|&&i| i >= records.len()) {
                bail!("challenge index {bad} outside {} records", records.len());
            }
            let t = verify(&root, eps, &set, &respond(&tree, &records, &set)?, &mc)?;
            std::fs::create_dir_all(dir)?;
            let p = dir.join("transcript.json");
            std::fs::write(&p, t.to_json()?)?;
            println!("verdict {:?} ({} rejections) -> {}", t.verdict, t.reject_reasons.len(), p.display());
            Ok(t.accepted())
        }
        AuditCmd::Run => run_named("audit", cfg),
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = load_config(cli)?;
    let name = match &cli.command {
        Command::Tradeoff => "tradeoff",
        Command::Spectrum => "spectrum",
        Command::Pareto => "pareto",
        Command::Hwnoise => "hwnoise",
        Command::Compose => "compose",
        Command::Adversary => "adversary",
        Command::Adaptive => "adaptive",
        Command::Dephasing => "dephasing",
        Command::Classical => "classical",
        Command::All => {
            let mut ok = true;
            for e in experiments() {
                ok &= run_named(e.name(), &cfg)?;
            }
            return Ok(ok);
        }
        Command::List => {
            for e in experiments() {
                println!("{:<10} {}", e.name(), e.description());
            }
            return Ok(true);
        }
        Command::Config => {
            print!("{}", cfg.to_toml()?);
            return Ok(true);
        }
        Command::Audit(cmd) => return audit(cmd, &cfg),
    };
    run_named(name, &cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) if cli.check => ExitCode::from(2),
        Ok(false) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
