use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use prfslab::{
    experiment_names, run, CpaDistinguisher, ExperimentConfig, ExperimentReport, ForgerKind, HarnessError, Result,
    RunOptions, SchemeParams, StrategyParams,
};
use prfslab_core::bits::{format_bits, parse_bits};
use prfslab_core::commitproto::PauliMode;
use prfslab_core::cpamac::{mac_sign, mac_verify, MacTag};
use prfslab_core::prfsgen::PrfsScheme;
use prfslab_core::prsgen::PrsKey;
use prfslab_core::qotp::{otp_accept_probs, otp_decrypt, otp_decrypt_sampled, otp_encrypt, otp_encrypt_sampled, OtpCiphertext};
use prfslab_core::rng::seed_derive;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(
    name = "prfslab",
    version,
    about = "Dense simulations of pseudorandom function-like states and their applications",
    after_help = "Experiments run as `prfslab <experiment> --config path.json [--seed U64] [--out path.json] \
                  [--threads N] [--no-timing]`; `prfslab list` prints their names.\n\
                  Exit codes: 0 all thresholds pass, 1 a threshold failed, 2 usage, 3 config or I/O, \
                  4 unknown experiment, 5 invalid parameters, 6 dimension limit, 7 enumeration limit, 8 other."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the experiment names.
    List,
    /// One-time pad encryption of classical bits.
    Otp {
        #[command(subcommand)]
        op: OtpOp,
    },
    /// Commitment binding experiment for a committer strategy.
    Commit {
        #[command(subcommand)]
        op: CommitOp,
    },
    /// CPA-security game for single-bit encryption.
    Cpa {
        #[command(subcommand)]
        op: CpaOp,
    },
    /// Tags for short messages.
    Mac {
        #[command(subcommand)]
        op: MacOp,
    },
    #[command(external_subcommand)]
    Experiment(Vec<String>),
}

#[derive(Parser)]
#[command(name = "prfslab <experiment>", no_binary_name = true)]
struct RunArgs {
    /// JSON config naming the experiment and its parameters.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed of the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output path of the config; stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    exec: ExecArgs,
}

#[derive(Args, Clone, Copy)]
struct ExecArgs {
    /// Worker threads; results do not depend on it.
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    threads: Option<u16>,
    /// Leave `wall_time_ms` empty so that reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

fn parse_json_str<T: DeserializeOwned>(s: &str) -> std::result::Result<T, String> {
    serde_json::from_value(Value::String(s.to_owned())).map_err(|e| e.to_string())
}

#[derive(Args, Clone)]
struct SchemeArgs {
    #[arg(long)]
    lambda: usize,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// ideal_haar, binary_phase or basis_table.
    #[arg(long, default_value = "ideal_haar", value_parser = parse_json_str::<prfslab::BaseKind>)]
    base: prfslab::BaseKind,
    /// post_select or key_chop.
    #[arg(long, default_value = "post_select", value_parser = parse_json_str::<prfslab::Construction>)]
    construction: prfslab::Construction,
    #[arg(long)]
    repetitions: Option<u64>,
}

impl SchemeArgs {
    fn params(&self) -> SchemeParams {
        SchemeParams {
            base: self.base,
            construction: self.construction,
            repetitions: self.repetitions,
            ..SchemeParams::new(self.lambda, self.d, self.n)
        }
    }

    fn build(&self) -> Result<PrfsScheme> {
        self.params().build()
    }

    fn key(&self, scheme: &PrfsScheme, hex: &str) -> Result<PrsKey> {
        Ok(PrsKey::from_hex(hex, scheme.key_bits())?)
    }
}

/// Where a report-producing subcommand writes and how it runs.
#[derive(Args, Clone)]
struct ReportArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use COUNT keys drawn from the seed instead of the whole keyspace.
    #[arg(long, value_name = "COUNT")]
    random_keys: Option<usize>,
    #[command(flatten)]
    exec: ExecArgs,
}

impl ReportArgs {
    fn keyset(&self) -> Value {
        match self.random_keys {
            Some(count) => json!({"mode": "random", "count": count, "seed": self.seed}),
            None => json!({"mode": "enumerate"}),
        }
    }
}

#[derive(Subcommand)]
enum OtpOp {
    /// Encrypt a bit string; prints the ciphertext as JSON.
    Encrypt {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        key: String,
        #[arg(long)]
        msg: String,
        /// Run the generator operationally instead of densifying.
        #[arg(long)]
        sampled: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decrypt a ciphertext file written by `otp encrypt`.
    Decrypt {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        key: String,
        #[arg(long)]
        ciphertext: PathBuf,
        #[arg(long)]
        sampled: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Encrypt and decrypt; exits 1 when the bits differ.
    Roundtrip {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        key: String,
        #[arg(long)]
        msg: String,
        #[arg(long)]
        sampled: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand)]
enum CommitOp {
    /// Real and ideal binding experiments; the report of the `binding` experiment.
    Run {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// honest:<b> or sup:<k1>,<k2>,<b> with key indices.
        #[arg(long, default_value = "honest:0")]
        strategy: StrategyParams,
        /// enumerate or sample:<count>.
        #[arg(long, default_value = "enumerate", value_parser = parse_pauli_mode)]
        paulis: PauliMode,
        #[command(flatten)]
        report: ReportArgs,
    },
}

fn parse_pauli_mode(s: &str) -> std::result::Result<PauliMode, String> {
    if s == "enumerate" {
        return Ok(PauliMode::Enumerate);
    }
    s.strip_prefix("sample:")
        .and_then(|c| c.parse().ok())
        .map(|count| PauliMode::Sample { count })
        .ok_or_else(|| format!("unknown challenge mode '{s}' (enumerate, sample:<count>)"))
}

#[derive(Subcommand)]
enum CpaOp {
    /// Runs the challenger; the report of the `cpa-game` experiment.
    Game {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Comma-separated query pairs such as 00,01.
        #[arg(long, default_value = "00,01")]
        queries: String,
        /// constant:0, constant:1 or key_recovery.
        #[arg(long, default_value = "constant:0")]
        distinguisher: CpaDistinguisher,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[command(flatten)]
        report: ReportArgs,
    },
}

#[derive(Subcommand)]
enum MacOp {
    /// Sign a message; prints the tag as JSON.
    Sign {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        key: String,
        #[arg(long)]
        msg: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Acceptance probability of a tag file for a message.
    Verify {
        #[command(flatten)]
        scheme: SchemeArgs,
        #[arg(long)]
        key: String,
        #[arg(long)]
        msg: String,
        #[arg(long)]
        tag: PathBuf,
    },
    /// Key-averaged forgery acceptance; the report of the `mac-forgery` experiment.
    Forge {
        #[command(flatten)]
        scheme: SchemeArgs,
        /// Comma-separated signed messages.
        #[arg(long, default_value = "0")]
        msgs: String,
        #[arg(long, default_value = "1")]
        target: String,
        /// haar, replay:<i> or keyed.
        #[arg(long, default_value = "haar")]
        forger: ForgerKind,
        #[command(flatten)]
        report: ReportArgs,
    },
}

fn io_error(path: &Path, e: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

fn write_output(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_error(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("outputs always serialize");
    text.push('\n');
    write_output(&text, out)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

fn bits(s: &str) -> Result<Vec<bool>> {
    Ok(parse_bits(s)?)
}

fn set_threads(exec: ExecArgs) -> Result<()> {
    if let Some(n) = exec.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build_global()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    Ok(())
}

fn run_and_emit(config: &ExperimentConfig, exec: ExecArgs) -> Result<u8> {
    set_threads(exec)?;
    let report: ExperimentReport = run(config, RunOptions { timing: !exec.no_timing })?;
    write_output(&report.to_json(), config.out.as_deref())?;
    Ok(if report.passed() { 0 } else { 1 })
}

/// Runs an experiment that a subcommand shorthand stands for.
fn run_shorthand(experiment: &str, scheme: &SchemeArgs, own: Value, report: &ReportArgs) -> Result<u8> {
    let mut params = serde_json::to_value(scheme.params()).expect("scheme params serialize");
    if let (Value::Object(p), Value::Object(o)) = (&mut params, own) {
        p.extend(o);
        p.insert("keyset".into(), report.keyset());
    }
    let mut config = ExperimentConfig::new(experiment, params, report.seed);
    config.out = report.out.clone();
    run_and_emit(&config, report.exec)
}

fn run_experiment(args: &[String]) -> Result<u8> {
    let name = &args[0];
    if !experiment_names().any(|n| n == name) {
        return Err(HarnessError::UnknownExperiment(name.clone()));
    }
    let opts = RunArgs::try_parse_from(&args[1..]).unwrap_or_else(|e| e.exit());
    let mut config = ExperimentConfig::load(&opts.config)?;
    if &config.experiment != name {
        return Err(HarnessError::Config(format!(
            "{} describes '{}', not '{name}'",
            opts.config.display(),
            config.experiment
        )));
    }
    if let Some(seed) = opts.seed {
        config.seed = seed;
    }
    if opts.out.is_some() {
        config.out = opts.out;
    }
    run_and_emit(&config, opts.exec)
}

fn otp(op: OtpOp) -> Result<u8> {
    match op {
        OtpOp::Encrypt {
            scheme,
            key,
            msg,
            sampled,
            seed,
            out,
        } => {
            let s = scheme.build()?;
            let k = scheme.key(&s, &key)?;
            let m = bits(&msg)?;
            let ct = if sampled {
                otp_encrypt_sampled(&s, &k, &m, &mut seed_derive(seed, 0, "otp-encrypt"))?
            } else {
                otp_encrypt(&s, &k, &m)?
            };
            write_json(&ct, out.as_deref())?;
            Ok(0)
        }
        OtpOp::Decrypt {
            scheme,
            key,
            ciphertext,
            sampled,
            seed,
        } => {
            let s = scheme.build()?;
            let k = scheme.key(&s, &key)?;
            let ct: OtpCiphertext = read_json(&ciphertext)?;
            let decrypted = if sampled {
                otp_decrypt_sampled(&s, &k, &ct, &mut seed_derive(seed, 0, "otp-decrypt"))?
            } else {
                otp_decrypt(&s, &k, &ct)?
            };
            let probs = otp_accept_probs(&s, &k, &ct)?;
            write_json(&json!({"msg": format_bits(&decrypted), "accept_probs": probs}), None)?;
            Ok(0)
        }
        OtpOp::Roundtrip {
            scheme,
            key,
            msg,
            sampled,
            seed,
        } => {
            let s = scheme.build()?;
            let k = scheme.key(&s, &key)?;
            let m = bits(&msg)?;
            let decrypted = if sampled {
                let mut rng = seed_derive(seed, 0, "otp-roundtrip");
                let ct = otp_encrypt_sampled(&s, &k, &m, &mut rng)?;
                otp_decrypt_sampled(&s, &k, &ct, &mut rng)?
            } else {
                otp_decrypt(&s, &k, &otp_encrypt(&s, &k, &m)?)?
            };
            let ok = decrypted == m;
            write_json(&json!({"msg": msg, "decrypted": format_bits(&decrypted), "ok": ok}), None)?;
            Ok(if ok { 0 } else { 1 })
        }
    }
}

fn mac(op: MacOp) -> Result<u8> {
    match op {
        MacOp::Sign { scheme, key, msg, out } => {
            let s = scheme.build()?;
            let tag = mac_sign(&s, &scheme.key(&s, &key)?, &bits(&msg)?)?;
            write_json(&tag, out.as_deref())?;
            Ok(0)
        }
        MacOp::Verify { scheme, key, msg, tag } => {
            let s = scheme.build()?;
            let tag: MacTag = read_json(&tag)?;
            let outcome = mac_verify(&s, &scheme.key(&s, &key)?, &bits(&msg)?, &tag)?;
            write_json(&json!({"p_accept": outcome.p_accept}), None)?;
            Ok(0)
        }
        MacOp::Forge {
            scheme,
            msgs,
            target,
            forger,
            report,
        } => {
            let msgs: Vec<&str> = msgs.split(',').collect();
            run_shorthand(
                "mac-forgery",
                &scheme,
                json!({"msgs": msgs, "target": target, "forger": forger}),
                &report,
            )
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::List => {
            for name in experiment_names() {
                println!("{name}");
            }
            Ok(0)
        }
        Command::Experiment(args) => run_experiment(&args),
        Command::Otp { op } => otp(op),
        Command::Commit {
            op: CommitOp::Run {
                scheme,
                strategy,
                paulis,
                report,
            },
        } => run_shorthand("binding", &scheme, json!({"strategy": strategy, "paulis": paulis}), &report),
        Command::Cpa {
            op: CpaOp::Game {
                scheme,
                queries,
                distinguisher,
                trials,
                report,
            },
        } => {
            let queries: Vec<&str> = queries.split(',').collect();
            run_shorthand(
                "cpa-game",
                &scheme,
                json!({"queries": queries, "distinguisher": distinguisher, "trials": trials}),
                &report,
            )
        }
        Command::Mac { op } => mac(op),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
