use std::collections::BTreeMap;
use std::sync::Arc;

use rand_chacha::ChaCha20Rng;
use rand_core::RngCore;

use super::clock::LogicalClock;
use super::report::TamperResult;
use super::session::{fork_rng, Handshake};
use super::ScenarioConfig;
use crate::algebra::{CurveParams, G1Point};
use crate::primitives::{check_freshness, Timestamp};
use crate::protocol::{
    patient_finish, server_handle_login, LoginRequest, PatientSessionState, ServerResponse,
    ServerState,
};

/// What a trial is allowed to fail with. `None` accepts any rejection.
type Expected = Option<&'static [&'static str]>;

const DECRYPT: &[&str] = &["DecryptFailure"];
const DECRYPT_OR_POINT: &[&str] = &["DecryptFailure", "PointCheckFailed"];
const TIMESTAMP_MISMATCH: &[&str] = &["TimestampMismatch"];
const STALE: &[&str] = &["StaleTimestamp"];
const AUTH: &[&str] = &["AuthMismatch"];

struct Tally {
    result: TamperResult,
}

impl Tally {
    fn new(field: &str) -> Self {
        Self {
            result: TamperResult {
                field: field.to_owned(),
                trials: 0,
                rejected: 0,
                accepted: 0,
                unexpected: 0,
                reasons: BTreeMap::new(),
            },
        }
    }

    fn record(&mut self, outcome: Result<(), &'static str>, expected: Expected) {
        let r = &mut self.result;
        r.trials += 1;
        match outcome {
            Ok(()) => r.accepted += 1,
            Err(kind) => {
                r.rejected += 1;
                *r.reasons.entry(kind.to_owned()).or_default() += 1;
                if expected.is_some_and(|set| !set.contains(&kind)) {
                    r.unexpected += 1;
                }
            }
        }
    }
}

fn random_point_other_than(
    params: &Arc<CurveParams>,
    rng: &mut ChaCha20Rng,
    avoid: &G1Point,
) -> G1Point {
    loop {
        let p = params.generator().mul(&params.random_nonzero_scalar(rng));
        if &p != avoid {
            return p;
        }
    }
}

/// A timestamp distinct from `t`, sometimes inside the freshness window and
/// sometimes outside it.
fn shifted_timestamp(rng: &mut ChaCha20Rng, t: Timestamp, delta_max: u64) -> Timestamp {
    let span = delta_max.saturating_mul(2).saturating_add(2);
    let offset = 1 + rng.next_u64() % span;
    if rng.next_u32() & 1 == 0 || t.0 < offset {
        Timestamp(t.0 + offset)
    } else {
        Timestamp(t.0 - offset)
    }
}

fn flip_bit(rng: &mut ChaCha20Rng, bytes: &mut [u8]) {
    let bit = (rng.next_u64() % (bytes.len() as u64 * 8)) as usize;
    bytes[bit / 8] ^= 1 << (bit % 8);
}

fn deliver_login(
    server: &ServerState,
    clock: &LogicalClock,
    rng: &mut ChaCha20Rng,
    wire: &[u8],
) -> Result<(), &'static str> {
    let req = LoginRequest::from_bytes(server.params(), wire).map_err(|e| e.kind())?;
    let mut clock = clock.clone();
    server_handle_login(server, &req, &mut clock, rng)
        .map(|_| ())
        .map_err(|e| e.kind())
}

fn deliver_response(
    server: &ServerState,
    patient: &PatientSessionState,
    clock: &LogicalClock,
    wire: &[u8],
) -> Result<(), &'static str> {
    let resp = ServerResponse::from_bytes(server.params(), wire).map_err(|e| e.kind())?;
    let mut state = patient.clone();
    let mut clock = clock.clone();
    patient_finish(&mut state, &resp, server.policy(), &mut clock)
        .map(|_| ())
        .map_err(|e| e.kind())
}

/// Modifies one field of each honest message at a time and checks that the
/// receiver rejects it for the expected reason.
pub(crate) fn run_tampers(
    server: &ServerState,
    hs: &Handshake,
    cfg: &ScenarioConfig,
    idx: u64,
) -> Vec<TamperResult> {
    let (Some(req), Some(resp), Some(patient), Some(server_clock), Some(patient_clock)) = (
        &hs.request,
        &hs.response,
        &hs.patient,
        &hs.server_clock,
        &hs.patient_clock,
    ) else {
        return Vec::new();
    };
    let params = server.params();
    let policy = server.policy();
    let n = cfg.tampers_per_field;
    let mut out = Vec::new();

    let mut login_trial =
        |field: &str, tamper: &mut dyn FnMut(&mut ChaCha20Rng, &mut LoginRequest) -> Expected| {
            let mut tally = Tally::new(field);
            for trial in 0..n {
                let mut rng = fork_rng(cfg.seed, idx, format!("tamper/{field}/{trial}").as_bytes());
                let mut forged = req.clone();
                let expected = tamper(&mut rng, &mut forged);
                tally.record(
                    deliver_login(server, server_clock, &mut rng, &forged.to_bytes()),
                    expected,
                );
            }
            out.push(tally.result);
        };

    login_trial("R_i", &mut |rng, m| {
        m.r_i = random_point_other_than(params, rng, &req.r_i);
        Some(DECRYPT_OR_POINT)
    });
    login_trial("T_i", &mut |rng, m| {
        m.t_i = shifted_timestamp(rng, req.t_i, policy.delta_max_millis);
        if check_freshness(m.t_i, server_clock.peek_next(), policy) {
            Some(TIMESTAMP_MISMATCH)
        } else {
            Some(STALE)
        }
    });
    login_trial("Auth_i.body", &mut |rng, m| {
        flip_bit(rng, &mut m.auth_i.body);
        Some(DECRYPT)
    });
    login_trial("Auth_i.tag", &mut |rng, m| {
        flip_bit(rng, &mut m.auth_i.tag);
        Some(DECRYPT)
    });

    let mut tally = Tally::new("login_wire");
    let honest = req.to_bytes();
    for trial in 0..n {
        let mut rng = fork_rng(
            cfg.seed,
            idx,
            format!("tamper/login_wire/{trial}").as_bytes(),
        );
        let mut wire = honest.clone();
        flip_bit(&mut rng, &mut wire);
        tally.record(deliver_login(server, server_clock, &mut rng, &wire), None);
    }
    out.push(tally.result);

    let mut response_trial =
        |field: &str, tamper: &mut dyn FnMut(&mut ChaCha20Rng, &mut ServerResponse) -> Expected| {
            let mut tally = Tally::new(field);
            for trial in 0..n {
                let mut rng = fork_rng(cfg.seed, idx, format!("tamper/{field}/{trial}").as_bytes());
                let mut forged = resp.clone();
                let expected = tamper(&mut rng, &mut forged);
                tally.record(
                    deliver_response(server, patient, patient_clock, &forged.to_bytes()),
                    expected,
                );
            }
            out.push(tally.result);
        };

    response_trial("R_s", &mut |rng, m| {
        m.r_s = random_point_other_than(params, rng, &resp.r_s);
        Some(AUTH)
    });
    response_trial("T_s", &mut |rng, m| {
        m.t_s = shifted_timestamp(rng, resp.t_s, policy.delta_max_millis);
        if check_freshness(m.t_s, patient_clock.peek_next(), policy) {
            Some(AUTH)
        } else {
            Some(STALE)
        }
    });
    response_trial("Auth_s", &mut |rng, m| {
        let bump = params.scalar_from_u64(1 + rng.next_u64() % 1_000_000);
        let mut forged = params.scalar_add(&resp.auth_s, &bump);
        if forged == resp.auth_s {
            forged = params.scalar_add(&forged, &params.scalar_from_u64(1));
        }
        m.auth_s = forged;
        Some(AUTH)
    });

    let mut tally = Tally::new("response_wire");
    let honest = resp.to_bytes();
    for trial in 0..n {
        let mut rng = fork_rng(
            cfg.seed,
            idx,
            format!("tamper/response_wire/{trial}").as_bytes(),
        );
        let mut wire = honest.clone();
        flip_bit(&mut rng, &mut wire);
        tally.record(
            deliver_response(server, patient, patient_clock, &wire),
            None,
        );
    }
    out.push(tally.result);

    out
}
