use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ScenarioConfig;
use crate::attacks::TraceStep;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttackResult {
    pub attack_name: String,
    /// Negative control: run with a deliberately wrong leak, expected to fail.
    pub control: bool,
    pub recovered_sk_hex: Option<String>,
    pub matches: bool,
    pub recovered_l_hex: Option<String>,
    pub l_matches: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered_id_hex: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub id_matches: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered_r_i_hex: Option<String>,
    /// `r_i·H(ID_i) == R_i` for the recovered pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_i_consistent: Option<bool>,
    pub error: Option<String>,
    pub trace: Vec<TraceStep>,
}

impl AttackResult {
    /// A real attack must reproduce SK and L (and identity data when it
    /// claims any); a control must not produce the key.
    pub fn holds(&self) -> bool {
        if self.control {
            !self.matches
        } else {
            self.matches
                && self.l_matches
                && self.error.is_none()
                && self.id_matches.unwrap_or(true)
                && self.r_i_consistent.unwrap_or(true)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamperResult {
    pub field: String,
    pub trials: u32,
    pub rejected: u32,
    /// Tampered messages that produced a session key.
    pub accepted: u32,
    /// Rejections whose reason was not the one expected for this field.
    pub unexpected: u32,
    pub reasons: BTreeMap<String, u32>,
}

impl TamperResult {
    pub fn holds(&self) -> bool {
        self.accepted == 0 && self.unexpected == 0 && self.rejected == self.trials
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: u64,
    pub patient_id_hex: String,
    pub sk_patient_hex: Option<String>,
    pub sk_server_hex: Option<String>,
    pub agreement: bool,
    /// `e(P_pub, r_i·Q_i) == e(s·R_i, P)`; absent when not observable.
    pub k_agreement: Option<bool>,
    pub l_patient_hex: Option<String>,
    pub l_server_hex: Option<String>,
    pub error: Option<String>,
    pub attack_results: Vec<AttackResult>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tamper_results: Vec<TamperResult>,
}

impl SessionRecord {
    pub fn holds(&self) -> bool {
        self.error.is_none()
            && self.agreement
            && self.k_agreement.unwrap_or(true)
            && self.attack_results.iter().all(AttackResult::holds)
            && self.tamper_results.iter().all(TamperResult::holds)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: u64,
    pub agreements: u64,
    pub k_agreements: u64,
    pub errors: u64,
    pub attack_attempts: BTreeMap<String, u64>,
    pub attack_success_counts: BTreeMap<String, u64>,
    /// Sessions where every real attack's L equals the honest L.
    pub l_identity: u64,
    pub tamper_trials: u64,
    pub tamper_rejected: u64,
    pub tamper_unexpected: u64,
    pub passed: bool,
}

impl Summary {
    pub fn from_sessions(sessions: &[SessionRecord]) -> Self {
        let mut s = Summary {
            runs: sessions.len() as u64,
            passed: true,
            ..Default::default()
        };
        for rec in sessions {
            s.agreements += rec.agreement as u64;
            s.k_agreements += (rec.k_agreement == Some(true)) as u64;
            s.errors += rec.error.is_some() as u64;
            let real: Vec<_> = rec.attack_results.iter().filter(|a| !a.control).collect();
            s.l_identity += (!real.is_empty() && real.iter().all(|a| a.l_matches)) as u64;
            for a in &rec.attack_results {
                *s.attack_attempts.entry(a.attack_name.clone()).or_default() += 1;
                *s.attack_success_counts
                    .entry(a.attack_name.clone())
                    .or_default() += a.matches as u64;
            }
            for t in &rec.tamper_results {
                s.tamper_trials += t.trials as u64;
                s.tamper_rejected += t.rejected as u64;
                s.tamper_unexpected += t.unexpected as u64;
            }
            s.passed &= rec.holds();
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub mode: String,
    pub params: String,
    pub config: Option<ScenarioConfig>,
    pub sessions: Vec<SessionRecord>,
    pub summary: Summary,
}

impl Report {
    pub fn new(
        mode: &str,
        params: &str,
        config: Option<ScenarioConfig>,
        sessions: Vec<SessionRecord>,
    ) -> Self {
        let summary = Summary::from_sessions(&sessions);
        Self {
            schema: SCHEMA_VERSION.to_owned(),
            mode: mode.to_owned(),
            params: params.to_owned(),
            config,
            sessions,
            summary,
        }
    }

    pub fn passed(&self) -> bool {
        self.summary.passed
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.summary;
        writeln!(out, "mode: {}  params: {}", self.mode, self.params).unwrap();
        for rec in &self.sessions {
            let sk = rec.sk_server_hex.as_deref().unwrap_or("-");
            write!(
                out,
                "session {:>4}  agree={}  sk={}",
                rec.session_id,
                rec.agreement,
                short(sk)
            )
            .unwrap();
            if let Some(e) = &rec.error {
                write!(out, "  error={e}").unwrap();
            }
            writeln!(out).unwrap();
            for a in &rec.attack_results {
                writeln!(
                    out,
                    "    {:<16} {}  recovered={}{}",
                    a.attack_name,
                    if a.holds() { "ok  " } else { "FAIL" },
                    short(a.recovered_sk_hex.as_deref().unwrap_or("-")),
                    a.error
                        .as_ref()
                        .map(|e| format!("  error={e}"))
                        .unwrap_or_default()
                )
                .unwrap();
            }
            for t in &rec.tamper_results {
                writeln!(
                    out,
                    "    tamper {:<14} {}  {}/{} rejected  {:?}",
                    t.field,
                    if t.holds() { "ok  " } else { "FAIL" },
                    t.rejected,
                    t.trials,
                    t.reasons
                )
                .unwrap();
            }
        }
        writeln!(out, "---").unwrap();
        writeln!(
            out,
            "runs: {}  agreements: {}  k-agreements: {}  errors: {}",
            s.runs, s.agreements, s.k_agreements, s.errors
        )
        .unwrap();
        for (name, n) in &s.attack_attempts {
            let ok = s.attack_success_counts.get(name).copied().unwrap_or(0);
            writeln!(out, "attack {name}: {ok}/{n} recovered the session key").unwrap();
        }
        if s.tamper_trials > 0 {
            writeln!(
                out,
                "tamper: {}/{} rejected, {} with unexpected reason",
                s.tamper_rejected, s.tamper_trials, s.tamper_unexpected
            )
            .unwrap();
        }
        writeln!(out, "result: {}", if s.passed { "PASS" } else { "FAIL" }).unwrap();
        out
    }
}

fn short(h: &str) -> &str {
    &h[..h.len().min(16)]
}
