//! JSON Lines export of eavesdropped transcripts and the matching leaks, and
//! offline replay of the attacks from those files.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::report::{Report, SessionRecord, SCHEMA_VERSION};
use super::session::{run_scenario, score_attacks, Leaks, RunOutput, Truth};
use super::{HarnessError, ScenarioConfig};
use crate::algebra::{CurveParams, G1Point, Scalar};
use crate::attacks::Transcript;
use crate::primitives::{Ciphertext, Timestamp, DIGEST_LEN};
use crate::protocol::SessionKey;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuthIRecord {
    pub body: String,
    pub tag: String,
}

/// One observed handshake, as hex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TranscriptRecord {
    pub schema: String,
    pub session_id: u64,
    pub params: String,
    #[serde(rename = "R_i")]
    pub r_i: String,
    #[serde(rename = "T_i")]
    pub t_i: u64,
    #[serde(rename = "Auth_i")]
    pub auth_i: AuthIRecord,
    #[serde(rename = "R_s")]
    pub r_s: String,
    #[serde(rename = "T_s")]
    pub t_s: u64,
    #[serde(rename = "Auth_s")]
    pub auth_s: String,
}

impl TranscriptRecord {
    pub fn new(session_id: u64, t: &Transcript) -> Self {
        Self {
            schema: SCHEMA_VERSION.to_owned(),
            session_id,
            params: t.params_label.clone(),
            r_i: t.r_i.to_hex(),
            t_i: t.t_i.0,
            auth_i: AuthIRecord {
                body: hex::encode(&t.auth_i.body),
                tag: hex::encode(t.auth_i.tag),
            },
            r_s: t.r_s.to_hex(),
            t_s: t.t_s.0,
            auth_s: hex::encode(t.auth_s.to_bytes(DIGEST_LEN)),
        }
    }

    pub fn to_transcript(&self, params: &Arc<CurveParams>) -> Result<Transcript, String> {
        let tag = unhex(&self.auth_i.tag, "Auth_i.tag")?
            .try_into()
            .map_err(|_| "Auth_i.tag must be 32 bytes".to_owned())?;
        let auth_s = unhex(&self.auth_s, "Auth_s")?;
        if auth_s.len() != DIGEST_LEN {
            return Err("Auth_s must be 32 bytes".into());
        }
        Ok(Transcript {
            r_i: point(params, &self.r_i, "R_i")?,
            t_i: Timestamp(self.t_i),
            auth_i: Ciphertext {
                body: unhex(&self.auth_i.body, "Auth_i.body")?,
                tag,
            },
            r_s: point(params, &self.r_s, "R_s")?,
            t_s: Timestamp(self.t_s),
            auth_s: params
                .scalar_from_bytes(&auth_s)
                .map_err(|e| format!("Auth_s: {e}"))?,
            params_label: self.params.clone(),
        })
    }
}

/// Values only the adversary's oracle knows, used to score a replay.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthRecord {
    pub sk_patient: String,
    pub sk_server: String,
    pub l: String,
    pub patient_id: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakRecord {
    pub schema: String,
    pub session_id: u64,
    pub params: String,
    pub r_s: Option<String>,
    pub s: Option<String>,
    pub truth: TruthRecord,
}

impl LeakRecord {
    pub fn new(
        session_id: u64,
        params: &CurveParams,
        r_s: &Scalar,
        s: &Scalar,
        truth: TruthRecord,
    ) -> Self {
        Self {
            schema: SCHEMA_VERSION.to_owned(),
            session_id,
            params: params.label().to_owned(),
            r_s: Some(hex::encode(r_s.to_bytes(params.scalar_width()))),
            s: Some(hex::encode(s.to_bytes(params.scalar_width()))),
            truth,
        }
    }

    fn leaks(&self, params: &CurveParams) -> Result<Leaks, String> {
        let scalar = |h: &Option<String>, what: &str| -> Result<Option<Scalar>, String> {
            h.as_deref()
                .map(|h| {
                    params
                        .scalar_from_bytes(&unhex(h, what)?)
                        .map_err(|e| format!("{what}: {e}"))
                })
                .transpose()
        };
        Ok(Leaks {
            r_s: scalar(&self.r_s, "r_s")?,
            s: scalar(&self.s, "s")?,
        })
    }

    fn truth(&self, params: &Arc<CurveParams>) -> Result<Truth, String> {
        let sk: [u8; DIGEST_LEN] = unhex(&self.truth.sk_server, "truth.sk_server")?
            .try_into()
            .map_err(|_| "truth.sk_server must be 32 bytes".to_owned())?;
        Ok(Truth {
            sk: SessionKey(sk),
            l: point(params, &self.truth.l, "truth.l")?,
            patient_id: unhex(&self.truth.patient_id, "truth.patient_id")?,
        })
    }
}

fn unhex(h: &str, what: &str) -> Result<Vec<u8>, String> {
    hex::decode(h).map_err(|e| format!("{what}: {e}"))
}

fn point(params: &Arc<CurveParams>, h: &str, what: &str) -> Result<G1Point, String> {
    let p = G1Point::from_bytes(params, &unhex(h, what)?).map_err(|e| format!("{what}: {e}"))?;
    if !p.is_in_subgroup() {
        return Err(format!("{what}: point is not in the prime-order subgroup"));
    }
    Ok(p)
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<(), HarnessError> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r).expect("records serialize");
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

/// Parses one record per non-empty line, checking the schema version
/// before the shape so version skew gets its own error.
fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, HarnessError> {
    let file = path.display().to_string();
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let decode = |msg: String| HarnessError::Decode {
            file: file.clone(),
            line: line_no,
            msg,
        };
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| decode(e.to_string()))?;
        match value.get("schema").and_then(|s| s.as_str()) {
            Some(SCHEMA_VERSION) => {}
            Some(found) => {
                return Err(HarnessError::SchemaVersionMismatch {
                    file,
                    found: found.to_owned(),
                })
            }
            None => return Err(decode("missing schema field".into())),
        }
        out.push((
            line_no,
            serde_json::from_value(value).map_err(|e| decode(e.to_string()))?,
        ));
    }
    Ok(out)
}

pub fn read_transcripts(path: &Path) -> Result<Vec<TranscriptRecord>, HarnessError> {
    Ok(read_jsonl(path)?.into_iter().map(|(_, r)| r).collect())
}

pub fn read_leaks(path: &Path) -> Result<Vec<LeakRecord>, HarnessError> {
    Ok(read_jsonl(path)?.into_iter().map(|(_, r)| r).collect())
}

/// The default leaks path for a transcripts file: `PATH.leaks`.
pub fn leaks_path_for(transcripts: &Path) -> PathBuf {
    let mut s = transcripts.as_os_str().to_owned();
    s.push(".leaks");
    PathBuf::from(s)
}

/// Runs the scenario and writes its transcripts to `path` and the leaks to
/// `path.leaks`.
pub fn export_transcripts(cfg: &ScenarioConfig, path: &Path) -> Result<RunOutput, HarnessError> {
    let out = run_scenario(cfg)?;
    write_jsonl(path, &out.transcripts)?;
    write_jsonl(&leaks_path_for(path), &out.leaks)?;
    Ok(out)
}

/// Re-runs every attack offline from exported files.
pub fn replay_attacks(transcripts_path: &Path, leaks_path: &Path) -> Result<Report, HarnessError> {
    let transcripts: Vec<(usize, TranscriptRecord)> = read_jsonl(transcripts_path)?;
    let leaks: Vec<(usize, LeakRecord)> = read_jsonl(leaks_path)?;

    let decode = |file: &Path, line: usize, msg: String| HarnessError::Decode {
        file: file.display().to_string(),
        line,
        msg,
    };
    let mut by_session = BTreeMap::new();
    for (line, leak) in &leaks {
        if let Some((_, t)) = transcripts.first() {
            if t.params != leak.params {
                return Err(HarnessError::ParamsMismatch {
                    transcripts: t.params.clone(),
                    leaks: leak.params.clone(),
                });
            }
        }
        if by_session.insert(leak.session_id, (*line, leak)).is_some() {
            return Err(decode(
                leaks_path,
                *line,
                format!("duplicate session {}", leak.session_id),
            ));
        }
    }

    let mut label = None;
    let mut sessions = Vec::with_capacity(transcripts.len());
    for (line, rec) in &transcripts {
        let label = label.get_or_insert_with(|| rec.params.clone());
        if *label != rec.params {
            return Err(decode(
                transcripts_path,
                *line,
                format!("params `{}` differ from `{label}`", rec.params),
            ));
        }
        let params = CurveParams::by_label(&rec.params).ok_or_else(|| {
            decode(
                transcripts_path,
                *line,
                format!("unknown params `{}`", rec.params),
            )
        })?;
        let transcript = rec
            .to_transcript(&params)
            .map_err(|m| decode(transcripts_path, *line, m))?;
        let (leak_line, leak) = by_session.get(&rec.session_id).ok_or_else(|| {
            decode(
                transcripts_path,
                *line,
                format!("no leak record for session {}", rec.session_id),
            )
        })?;
        let leaks = leak
            .leaks(&params)
            .map_err(|m| decode(leaks_path, *leak_line, m))?;
        let truth = leak
            .truth(&params)
            .map_err(|m| decode(leaks_path, *leak_line, m))?;
        sessions.push(SessionRecord {
            session_id: rec.session_id,
            patient_id_hex: leak.truth.patient_id.clone(),
            sk_patient_hex: Some(leak.truth.sk_patient.clone()),
            sk_server_hex: Some(leak.truth.sk_server.clone()),
            agreement: leak.truth.sk_patient == leak.truth.sk_server,
            k_agreement: None,
            l_patient_hex: None,
            l_server_hex: Some(leak.truth.l.clone()),
            error: None,
            attack_results: score_attacks(&params, &transcript, &leaks, &truth),
            tamper_results: Vec::new(),
        });
    }
    let label = label.unwrap_or_else(|| {
        leaks
            .first()
            .map(|(_, l)| l.params.clone())
            .unwrap_or_default()
    });
    Ok(Report::new("replay", &label, None, sessions))
}
