//! One-time pad, CPA encryption and MAC experiments.

use std::fmt;
use std::str::FromStr;

use prfslab_core::bits::parse_bits;
use prfslab_core::cpamac::{self, haar_forger, key_recovery_distinguisher, keyed_forger, replay_forger};
use prfslab_core::keyset::Keyset;
use prfslab_core::prsgen::PrsKey;
use prfslab_core::qotp;
use prfslab_core::rng::{par_trials, LabRng, SeedTree};
use prfslab_core::stats::Estimate;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{echo, enumerate, positive};
use crate::config::{merge_echo, parse_params, SchemeParams};
use crate::error::{HarnessError, Result};
use crate::report::Findings;

fn bits(s: &str) -> Result<Vec<bool>> {
    parse_bits(s).map_err(|e| HarnessError::params(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DecryptMode {
    /// One operational generator run and one tester run per block.
    Sampled,
    /// Densified blocks and the accept-above-½ rule.
    Exact,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OtpRoundtrip {
    messages: u64,
    msg_len: usize,
    mode: DecryptMode,
    min_success: f64,
    /// Keys to draw from; a fresh uniform key per message when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    keyset: Option<Keyset>,
}

impl Default for OtpRoundtrip {
    fn default() -> Self {
        Self {
            messages: 200,
            msg_len: 4,
            mode: DecryptMode::Sampled,
            min_success: 0.9,
            keyset: None,
        }
    }
}

pub(super) fn otp_roundtrip(params: Value, rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let (sp, rest) = SchemeParams::split(params)?;
    let p: OtpRoundtrip = parse_params(rest)?;
    positive("messages", p.messages)?;
    positive("msg_len", p.msg_len as u64)?;
    let scheme = sp.build()?;
    let keys = p.keyset.as_ref().map(|k| k.keys(scheme.key_bits())).transpose()?;
    let seeds = SeedTree::from_rng(rng, "otp-roundtrip");
    let results = par_trials(p.messages, |i| {
        let mut r = seeds.stream(i);
        let key = match &keys {
            Some(ks) => ks[r.random_range(0..ks.len())].clone(),
            None => PrsKey::random(scheme.key_bits(), &mut r)?,
        };
        let msg: Vec<bool> = (0..p.msg_len).map(|_| r.random()).collect();
        let decrypted = match p.mode {
            DecryptMode::Sampled => {
                let ct = qotp::otp_encrypt_sampled(&scheme, &key, &msg, &mut r)?;
                qotp::otp_decrypt_sampled(&scheme, &key, &ct, &mut r)?
            }
            DecryptMode::Exact => qotp::otp_decrypt(&scheme, &key, &qotp::otp_encrypt(&scheme, &key, &msg)?)?,
        };
        Ok(msg.iter().zip(&decrypted).filter(|(a, b)| a != b).count() as u64)
    })?;
    let successes = results.iter().filter(|&&e| e == 0).count() as u64;
    let bit_errors: u64 = results.iter().sum();
    let success = Estimate::frequency(successes, p.messages);
    out.estimate("success_rate", success);
    out.estimate(
        "bit_error_rate",
        Estimate::frequency(bit_errors, p.messages * p.msg_len as u64),
    );
    out.at_least("success_rate", success.value, p.min_success);
    Ok(merge_echo(&sp, echo(&p)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OtpSecurity {
    msg: String,
    keyset: Keyset,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_td: Option<f64>,
}

impl Default for OtpSecurity {
    fn default() -> Self {
        Self {
            msg: "0".into(),
            keyset: enumerate(),
            max_td: None,
        }
    }
}

pub(super) fn otp_security(params: Value, _rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let (sp, rest) = SchemeParams::split(params)?;
    let p: OtpSecurity = parse_params(rest)?;
    let scheme = sp.build()?;
    let keys = p.keyset.keys(scheme.key_bits())?;
    let td = qotp::otp_single_copy_report(&scheme, &keys, &bits(&p.msg)?)?;
    out.exact("single_copy_td", td);
    out.note("distance of the key-averaged ciphertext to |0><0| ⊗ I/2^n per block");
    if let Some(max) = p.max_td {
        out.at_most("single_copy_td", td, max);
    }
    Ok(merge_echo(&sp, echo(&p)))
}

/// Adversaries for the CPA game, written `constant:0`, `constant:1` or
/// `key_recovery`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CpaDistinguisher {
    Constant(bool),
    KeyRecovery,
}

impl FromStr for CpaDistinguisher {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "constant:0" => Ok(Self::Constant(false)),
            "constant:1" => Ok(Self::Constant(true)),
            "key_recovery" => Ok(Self::KeyRecovery),
            _ => Err(format!("unknown distinguisher '{s}' (constant:0, constant:1, key_recovery)")),
        }
    }
}

impl TryFrom<String> for CpaDistinguisher {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl fmt::Display for CpaDistinguisher {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant(b) => write!(f, "constant:{}", *b as u8),
            Self::KeyRecovery => f.write_str("key_recovery"),
        }
    }
}

impl From<CpaDistinguisher> for String {
    fn from(d: CpaDistinguisher) -> String {
        d.to_string()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CpaGame {
    /// Query pairs as two-bit strings `b0 b1`.
    queries: Vec<String>,
    distinguisher: CpaDistinguisher,
    trials: u64,
    /// Known-plaintext and challenge query for key recovery.
    known: usize,
    challenge: usize,
    /// Candidate keys for key recovery.
    keyset: Keyset,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_advantage: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_advantage: Option<f64>,
}

impl Default for CpaGame {
    fn default() -> Self {
        Self {
            queries: vec!["00".into(), "01".into()],
            distinguisher: CpaDistinguisher::Constant(false),
            trials: 2000,
            known: 0,
            challenge: 1,
            keyset: enumerate(),
            max_advantage: None,
            min_advantage: None,
        }
    }
}

pub(super) fn cpa_game(params: Value, rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let (sp, rest) = SchemeParams::split(params)?;
    let p: CpaGame = parse_params(rest)?;
    positive("trials", p.trials)?;
    let scheme = sp.build()?;
    let queries = p
        .queries
        .iter()
        .map(|q| match bits(q)?.as_slice() {
            &[b0, b1] => Ok((b0, b1)),
            _ => Err(HarnessError::params(format!("query '{q}' is not two bits"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let result = match p.distinguisher {
        CpaDistinguisher::Constant(b) => cpamac::cpa_game(&scheme, &queries, |_, _| Ok(b), p.trials, rng)?,
        CpaDistinguisher::KeyRecovery => {
            let keys = p.keyset.keys(scheme.key_bits())?;
            let d = key_recovery_distinguisher(scheme.clone(), keys, p.known, p.challenge);
            cpamac::cpa_game(&scheme, &queries, d, p.trials, rng)?
        }
    };
    out.estimate("advantage", result.advantage);
    out.estimate("collision_rate", result.collision_rate);
    out.exact("collision_probability", result.collision_probability);
    let q = result.collision_probability;
    out.at_most(
        "collision_rate_deviation",
        (result.collision_rate.value - q).abs(),
        3.0 * (q * (1.0 - q) / p.trials as f64).sqrt() + 1e-12,
    );
    if let Some(max) = p.max_advantage {
        out.at_most("advantage", result.advantage.value, max);
    }
    if let Some(min) = p.min_advantage {
        out.at_least("advantage", result.advantage.value, min);
    }
    Ok(merge_echo(&sp, echo(&p)))
}

/// Reference forgers, written `haar`, `replay:<i>` or `keyed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ForgerKind {
    /// A fresh Haar state.
    Haar,
    /// The tag of query `i`.
    Replay(usize),
    /// The honest tag, signed with the real key.
    Keyed,
}

impl FromStr for ForgerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "haar" => Ok(Self::Haar),
            "keyed" => Ok(Self::Keyed),
            _ => s
                .strip_prefix("replay:")
                .and_then(|i| i.parse().ok())
                .map(Self::Replay)
                .ok_or_else(|| format!("unknown forger '{s}' (haar, replay:<i>, keyed)")),
        }
    }
}

impl TryFrom<String> for ForgerKind {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl fmt::Display for ForgerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Haar => f.write_str("haar"),
            Self::Replay(i) => write!(f, "replay:{i}"),
            Self::Keyed => f.write_str("keyed"),
        }
    }
}

impl From<ForgerKind> for String {
    fn from(k: ForgerKind) -> String {
        k.to_string()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MacForgery {
    keyset: Keyset,
    msgs: Vec<String>,
    target: String,
    forger: ForgerKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_accept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_accept: Option<f64>,
}

impl Default for MacForgery {
    fn default() -> Self {
        Self {
            keyset: enumerate(),
            msgs: vec!["0".into()],
            target: "1".into(),
            forger: ForgerKind::Haar,
            max_accept: None,
            min_accept: None,
        }
    }
}

pub(super) fn mac_forgery(params: Value, rng: &mut LabRng, out: &mut Findings) -> Result<Value> {
    let (sp, rest) = SchemeParams::split(params)?;
    let p: MacForgery = parse_params(rest)?;
    let scheme = sp.build()?;
    let keys = p.keyset.keys(scheme.key_bits())?;
    let msgs = p.msgs.iter().map(|m| bits(m)).collect::<Result<Vec<_>>>()?;
    let target = bits(&p.target)?;
    let report = match p.forger {
        ForgerKind::Haar => cpamac::mac_forgery_stats(&scheme, &keys, &msgs, &target, haar_forger(sp.n), rng)?,
        ForgerKind::Replay(i) => {
            if i >= msgs.len() {
                return Err(HarnessError::params(format!("no query {i} to replay")));
            }
            cpamac::mac_forgery_stats(&scheme, &keys, &msgs, &target, replay_forger(i), rng)?
        }
        ForgerKind::Keyed => {
            cpamac::mac_forgery_stats(&scheme, &keys, &msgs, &target, keyed_forger(scheme.clone()), rng)?
        }
    };
    out.estimate("forgery_accept", report.accept);
    out.exact("haar_reference", (-(sp.n as f64)).exp2());
    if let Some(max) = p.max_accept {
        out.at_most("forgery_accept", report.accept.value, max);
    }
    if let Some(min) = p.min_accept {
        out.at_least("forgery_accept", report.accept.value, min);
    }
    Ok(merge_echo(&sp, echo(&p)))
}
