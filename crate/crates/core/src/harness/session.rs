use std::path::Path;
use std::sync::Arc;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;

use super::channel::{Direction, EavesdropChannel};
use super::clock::LogicalClock;
use super::export::{LeakRecord, TranscriptRecord, TruthRecord};
use super::report::{AttackResult, Report, SessionRecord};
use super::tamper::run_tampers;
use super::{HarnessError, Scenario, ScenarioConfig};
use crate::algebra::{map_to_point, CurveParams, G1Point, Scalar};
use crate::attacks::{
    kssti_attack, pfs_attack, AttackError, AttackOutcome, LeakedEphemeral, LeakedLongTerm,
    Transcript,
};
use crate::primitives::{digest, frame, FreshnessPolicy};
use crate::protocol::{
    patient_finish, patient_login_start, patient_make_registration, register_patient,
    server_handle_login, server_keygen, LoginRequest, PatientCredentials, PatientSessionState,
    ProtocolError, Registry, ServerResponse, ServerSessionState, ServerState, SessionKey,
    SmartCard,
};

pub const SERVER_ID: &[u8] = b"TMIS-server";
const SESSION_EPOCH_MILLIS: u64 = 1_700_000_000_000;
const SESSION_SPACING_MILLIS: u64 = 3_600_000;

/// Independent generator for `(seed, session, purpose)`.
pub(crate) fn fork_rng(seed: u64, session: u64, purpose: &[u8]) -> ChaCha20Rng {
    let key = digest(&frame(&[
        b"workbench",
        &seed.to_be_bytes(),
        &session.to_be_bytes(),
        purpose,
    ]));
    ChaCha20Rng::from_seed(key)
}

/// A report plus the artifacts an export writes.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: Report,
    pub transcripts: Vec<TranscriptRecord>,
    pub leaks: Vec<LeakRecord>,
}

pub(crate) struct Patient {
    creds: PatientCredentials,
    card: SmartCard,
}

fn make_credentials(seed: u64, idx: u64) -> PatientCredentials {
    let mut rng = fork_rng(seed, idx, b"credentials");
    let mut tag = [0u8; 4];
    let mut password = vec![0u8; 12];
    let mut biometric = vec![0u8; 32];
    rng.fill_bytes(&mut tag);
    rng.fill_bytes(&mut password);
    rng.fill_bytes(&mut biometric);
    PatientCredentials {
        id: format!("patient-{idx:04}-{}", hex::encode(tag)).into_bytes(),
        password,
        biometric,
    }
}

/// The messages and role states of one completed (or aborted) handshake.
pub(crate) struct Handshake {
    pub channel: EavesdropChannel,
    pub patient: Option<PatientSessionState>,
    pub request: Option<LoginRequest>,
    /// Clock as it was just before the server read it.
    pub server_clock: Option<LogicalClock>,
    pub server_session: Option<ServerSessionState>,
    pub response: Option<ServerResponse>,
    /// Clock as it was just before the patient read it for `T_s`.
    pub patient_clock: Option<LogicalClock>,
    pub sk_patient: Option<SessionKey>,
    pub error: Option<ProtocolError>,
}

pub(crate) fn handshake(
    server: &ServerState,
    patient: &Patient,
    cfg: &ScenarioConfig,
    idx: u64,
) -> Handshake {
    let params = server.params();
    let mut rng = fork_rng(cfg.seed, idx, b"handshake");
    let mut clock = LogicalClock::new(
        SESSION_EPOCH_MILLIS + idx * SESSION_SPACING_MILLIS,
        cfg.clock_step_millis,
    );
    let mut hs = Handshake {
        channel: EavesdropChannel::new(),
        patient: None,
        request: None,
        server_clock: None,
        server_session: None,
        response: None,
        patient_clock: None,
        sk_patient: None,
        error: None,
    };
    let result = (|| {
        let (ps, req) = patient_login_start(
            &patient.card,
            &patient.creds,
            server.id(),
            &mut clock,
            &mut rng,
        )?;
        hs.patient = Some(ps);
        let wire = hs
            .channel
            .send(Direction::PatientToServer, req.t_i, req.to_bytes());
        let received = LoginRequest::from_bytes(params, wire)?;
        hs.request = Some(req);

        hs.server_clock = Some(clock.clone());
        let (ss, resp) = server_handle_login(server, &received, &mut clock, &mut rng)?;
        hs.server_session = Some(ss);
        let wire = hs
            .channel
            .send(Direction::ServerToPatient, resp.t_s, resp.to_bytes());
        let received = ServerResponse::from_bytes(params, wire)?;
        hs.response = Some(resp);

        hs.patient_clock = Some(clock.clone());
        let ps = hs.patient.as_mut().unwrap();
        let sk = patient_finish(ps, &received, server.policy(), &mut clock)?;
        hs.sk_patient = Some(sk);
        Ok::<_, ProtocolError>(())
    })();
    hs.error = result.err();
    hs
}

/// Leaks available to the adversary in a given run.
#[derive(Clone, Debug, Default)]
pub(crate) struct Leaks {
    pub r_s: Option<Scalar>,
    pub s: Option<Scalar>,
}

/// Ground truth the attacks are scored against.
pub(crate) struct Truth {
    pub sk: SessionKey,
    pub l: G1Point,
    pub patient_id: Vec<u8>,
}

fn attack_result(
    name: &str,
    control: bool,
    params: &Arc<CurveParams>,
    transcript: &Transcript,
    truth: &Truth,
    outcome: Result<AttackOutcome, AttackError>,
) -> AttackResult {
    match outcome {
        Ok(out) => {
            let (recovered_id_hex, id_matches, recovered_r_i_hex, r_i_consistent) =
                match &out.recovered_extras {
                    Some(extra) => {
                        let consistent = map_to_point(params, &extra.id)
                            .map(|q| q.mul(&extra.r_i) == transcript.r_i)
                            .unwrap_or(false);
                        (
                            Some(hex::encode(&extra.id)),
                            Some(extra.id == truth.patient_id),
                            Some(hex::encode(extra.r_i.to_bytes(params.scalar_width()))),
                            Some(consistent),
                        )
                    }
                    None => (None, None, None, None),
                };
            AttackResult {
                attack_name: name.to_owned(),
                control,
                recovered_sk_hex: Some(out.recovered_sk.to_hex()),
                matches: out.recovered_sk == truth.sk,
                recovered_l_hex: Some(out.recovered_l.to_hex()),
                l_matches: out.recovered_l == truth.l,
                recovered_id_hex,
                id_matches,
                recovered_r_i_hex,
                r_i_consistent,
                error: None,
                trace: out.trace,
            }
        }
        Err(e) => AttackResult {
            attack_name: name.to_owned(),
            control,
            recovered_sk_hex: None,
            matches: false,
            recovered_l_hex: None,
            l_matches: false,
            recovered_id_hex: None,
            id_matches: None,
            recovered_r_i_hex: None,
            r_i_consistent: None,
            error: Some(e.kind().to_owned()),
            trace: Vec::new(),
        },
    }
}

fn off_by_one(params: &CurveParams, k: &Scalar) -> Scalar {
    params.scalar_add(k, &params.scalar_from_u64(1))
}

/// Runs every attack whose leak is present, each followed by a negative
/// control with the leak incremented by one.
pub(crate) fn score_attacks(
    params: &Arc<CurveParams>,
    transcript: &Transcript,
    leaks: &Leaks,
    truth: &Truth,
) -> Vec<AttackResult> {
    let mut out = Vec::new();
    if let Some(r_s) = &leaks.r_s {
        let real = kssti_attack(transcript, &LeakedEphemeral { r_s: r_s.clone() }, params);
        out.push(attack_result(
            "kssti", false, params, transcript, truth, real,
        ));
        let wrong = LeakedEphemeral {
            r_s: off_by_one(params, r_s),
        };
        let control = kssti_attack(transcript, &wrong, params);
        out.push(attack_result(
            "kssti_wrong_leak",
            true,
            params,
            transcript,
            truth,
            control,
        ));
    }
    if let Some(s) = &leaks.s {
        let real = pfs_attack(transcript, &LeakedLongTerm::new(params, s.clone()), params);
        out.push(attack_result("pfs", false, params, transcript, truth, real));
        let wrong = LeakedLongTerm::new(params, off_by_one(params, s));
        let control = pfs_attack(transcript, &wrong, params);
        out.push(attack_result(
            "pfs_wrong_key",
            true,
            params,
            transcript,
            truth,
            control,
        ));
    }
    out
}

struct SessionArtifacts {
    record: SessionRecord,
    transcript: Option<TranscriptRecord>,
    leak: Option<LeakRecord>,
}

fn run_session(
    server: &ServerState,
    patient: &Patient,
    cfg: &ScenarioConfig,
    idx: u64,
) -> SessionArtifacts {
    let params = server.params();
    let hs = handshake(server, patient, cfg, idx);
    let mut record = SessionRecord {
        session_id: idx,
        patient_id_hex: hex::encode(&patient.creds.id),
        sk_patient_hex: hs.sk_patient.map(|k| k.to_hex()),
        sk_server_hex: hs.server_session.as_ref().map(|s| s.sk_s.to_hex()),
        agreement: false,
        k_agreement: None,
        l_patient_hex: hs
            .patient
            .as_ref()
            .and_then(|p| p.l_i.as_ref())
            .map(G1Point::to_hex),
        l_server_hex: hs.server_session.as_ref().map(|s| s.l_s.to_hex()),
        error: hs.error.as_ref().map(|e| e.kind().to_owned()),
        attack_results: Vec::new(),
        tamper_results: Vec::new(),
    };
    if let (Some(ps), Some(ss)) = (&hs.patient, &hs.server_session) {
        record.k_agreement = Some(ps.k_i == ss.k_s);
    }
    let (Some(ps), Some(ss), Some(sk_i)) = (&hs.patient, &hs.server_session, hs.sk_patient) else {
        return SessionArtifacts {
            record,
            transcript: None,
            leak: None,
        };
    };
    record.agreement = sk_i == ss.sk_s && ps.l_i.as_ref() == Some(&ss.l_s);

    // Leak oracles: the only place role internals are read.
    let leaks = Leaks {
        r_s: matches!(cfg.scenario, Scenario::Kssti | Scenario::All).then(|| ss.r_s.clone()),
        s: matches!(cfg.scenario, Scenario::Pfs | Scenario::All)
            .then(|| server.master_key().clone()),
    };
    let truth = Truth {
        sk: ss.sk_s,
        l: ss.l_s.clone(),
        patient_id: patient.creds.id.clone(),
    };

    let transcript = match hs.channel.transcript(params) {
        Ok(t) => t,
        Err(e) => {
            record.error = Some(e.kind().to_owned());
            return SessionArtifacts {
                record,
                transcript: None,
                leak: None,
            };
        }
    };
    record.attack_results = score_attacks(params, &transcript, &leaks, &truth);

    if matches!(cfg.scenario, Scenario::Tamper | Scenario::All) {
        record.tamper_results = run_tampers(server, &hs, cfg, idx);
    }

    let transcript_record = TranscriptRecord::new(idx, &transcript);
    // The leaks file is ground truth for offline replay, so it always
    // carries both secrets whatever the scenario.
    let leak = LeakRecord::new(
        idx,
        params,
        &ss.r_s,
        server.master_key(),
        TruthRecord {
            sk_patient: sk_i.to_hex(),
            sk_server: ss.sk_s.to_hex(),
            l: ss.l_s.to_hex(),
            patient_id: hex::encode(&patient.creds.id),
        },
    );
    SessionArtifacts {
        record,
        transcript: Some(transcript_record),
        leak: Some(leak),
    }
}

fn load_registry(path: &Path) -> Result<Registry, HarnessError> {
    match std::fs::read_to_string(path) {
        Ok(text) => Ok(Registry::from_text(&text)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Registry::new()),
        Err(e) => Err(e.into()),
    }
}

/// Runs the configured scenario end to end.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, HarnessError> {
    cfg.validate()?;
    let params = CurveParams::by_label(cfg.param_set.label()).expect("pinned parameter set");
    let policy = FreshnessPolicy::new(cfg.delta_max_millis);
    let mut server = server_keygen(
        &params,
        SERVER_ID,
        policy,
        &mut fork_rng(cfg.seed, u64::MAX, b"server"),
    );
    if let Some(path) = &cfg.registry_path {
        server.set_registry(load_registry(path)?);
    }

    // Registration mutates the server, so it runs serially.
    let patients: Vec<Patient> = (0..cfg.sessions)
        .map(|idx| {
            let creds = make_credentials(cfg.seed, idx);
            let req = patient_make_registration(&creds)?;
            let card = register_patient(&mut server, &req);
            Ok(Patient { creds, card })
        })
        .collect::<Result<_, ProtocolError>>()?;

    if let Some(path) = &cfg.registry_path {
        std::fs::write(path, server.registry().to_text())?;
    }

    let artifacts: Vec<SessionArtifacts> = patients
        .par_iter()
        .enumerate()
        .map(|(idx, p)| run_session(&server, p, cfg, idx as u64))
        .collect();

    let mut sessions = Vec::with_capacity(artifacts.len());
    let mut transcripts = Vec::new();
    let mut leaks = Vec::new();
    for a in artifacts {
        sessions.push(a.record);
        transcripts.extend(a.transcript);
        leaks.extend(a.leak);
    }
    let mode = match cfg.scenario {
        Scenario::Honest => "honest",
        Scenario::Kssti => "kssti",
        Scenario::Pfs => "pfs",
        Scenario::Tamper => "tamper",
        Scenario::All => "all",
    };
    Ok(RunOutput {
        report: Report::new(mode, params.label(), Some(cfg.clone()), sessions),
        transcripts,
        leaks,
    })
}

fn with_scenario(cfg: &ScenarioConfig, scenario: Scenario) -> Result<Report, HarnessError> {
    let cfg = ScenarioConfig {
        scenario,
        ..cfg.clone()
    };
    Ok(run_scenario(&cfg)?.report)
}

pub fn run_honest(cfg: &ScenarioConfig) -> Result<Report, HarnessError> {
    with_scenario(cfg, Scenario::Honest)
}

pub fn run_kssti(cfg: &ScenarioConfig) -> Result<Report, HarnessError> {
    with_scenario(cfg, Scenario::Kssti)
}

pub fn run_pfs(cfg: &ScenarioConfig) -> Result<Report, HarnessError> {
    with_scenario(cfg, Scenario::Pfs)
}

pub fn run_tamper(cfg: &ScenarioConfig) -> Result<Report, HarnessError> {
    with_scenario(cfg, Scenario::Tamper)
}

pub fn run_all(cfg: &ScenarioConfig) -> Result<Report, HarnessError> {
    with_scenario(cfg, Scenario::All)
}
