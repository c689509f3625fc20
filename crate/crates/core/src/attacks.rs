//! Session-key recovery from a public transcript plus one leaked secret.
//!
//! Both attacks are pure functions of `(Transcript, leak, params)`. The
//! input types carry nothing else, so neither attack can read patient
//! credentials, `r_i`, or the other party's secrets.

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{pairing, AlgebraError, CurveParams, G1Point, Scalar};
use crate::primitives::{kdf_from_gt, sym_decrypt, Ciphertext, Timestamp};
use crate::protocol::{
    decode_login_plaintext, server_auth, session_key, LoginRequest, ProtocolError, ServerResponse,
    SessionKey,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("transcript was recorded under parameters `{transcript}`, attack run with `{attack}`")]
    ParamsMismatch { transcript: String, attack: String },
    #[error("transcript point is not in the order-q subgroup")]
    OffCurvePoint,
    #[error("Auth_i did not decrypt: the leaked key is not the server's")]
    DecryptFailure,
    #[error("Auth_i decrypted to a malformed plaintext")]
    MalformedPlaintext,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl AttackError {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::ParamsMismatch { .. } => "ParamsMismatch",
            Self::OffCurvePoint => "OffCurvePoint",
            Self::DecryptFailure => "DecryptFailure",
            Self::MalformedPlaintext => "MalformedPlaintext",
            Self::Algebra(_) => "AlgebraError",
        }
    }
}

/// Everything an eavesdropper sees of one handshake.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub r_i: G1Point,
    pub t_i: Timestamp,
    pub auth_i: Ciphertext,
    pub r_s: G1Point,
    pub t_s: Timestamp,
    pub auth_s: Scalar,
    pub params_label: String,
}

impl Transcript {
    pub fn from_messages(req: &LoginRequest, resp: &ServerResponse) -> Self {
        Self {
            r_i: req.r_i.clone(),
            t_i: req.t_i,
            auth_i: req.auth_i.clone(),
            r_s: resp.r_s.clone(),
            t_s: resp.t_s,
            auth_s: resp.auth_s.clone(),
            params_label: req.r_i.params().label().to_owned(),
        }
    }

    /// Rebuilds the transcript from the raw bytes seen on the wire.
    pub fn from_wire(
        params: &Arc<CurveParams>,
        login_request: &[u8],
        server_response: &[u8],
    ) -> Result<Self, ProtocolError> {
        let req = LoginRequest::from_bytes(params, login_request)?;
        let resp = ServerResponse::from_bytes(params, server_response)?;
        Ok(Self::from_messages(&req, &resp))
    }

    fn check(&self, params: &Arc<CurveParams>) -> Result<(), AttackError> {
        if self.params_label != params.label()
            || self.r_i.params() != params
            || self.r_s.params() != params
        {
            return Err(AttackError::ParamsMismatch {
                transcript: self.params_label.clone(),
                attack: params.label().to_owned(),
            });
        }
        if !self.r_i.is_in_subgroup() || !self.r_s.is_in_subgroup() {
            return Err(AttackError::OffCurvePoint);
        }
        Ok(())
    }
}

/// The server's per-session random `r_s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeakedEphemeral {
    pub r_s: Scalar,
}

/// The server's key pair `(s, P_pub = s·P)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeakedLongTerm {
    pub s: Scalar,
    pub p_pub: G1Point,
}

impl LeakedLongTerm {
    pub fn new(params: &Arc<CurveParams>, s: Scalar) -> Self {
        let p_pub = params.generator().mul(&s);
        Self { s, p_pub }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: String,
    pub value: String,
}

/// Identity and ephemeral exposed as a by-product of decrypting `Auth_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecoveredIdentity {
    pub id: Vec<u8>,
    pub r_i: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttackOutcome {
    pub recovered_sk: SessionKey,
    /// The shared point `L` the attacker reconstructed.
    pub recovered_l: G1Point,
    pub recovered_extras: Option<RecoveredIdentity>,
    pub trace: Vec<TraceStep>,
}

fn step(trace: &mut Vec<TraceStep>, label: &str, value: impl Into<String>) {
    trace.push(TraceStep {
        step: label.to_owned(),
        value: value.into(),
    });
}

fn observe(trace: &mut Vec<TraceStep>, t: &Transcript) {
    step(trace, "observe R_i", t.r_i.to_hex());
    step(trace, "observe T_i", t.t_i.0.to_string());
    step(trace, "observe R_s", t.r_s.to_hex());
    step(trace, "observe T_s", t.t_s.0.to_string());
}

/// Leaked `r_s`: `L_s = r_s·R_i`, then hash the public values with it.
pub fn kssti_attack(
    t: &Transcript,
    leak: &LeakedEphemeral,
    params: &Arc<CurveParams>,
) -> Result<AttackOutcome, AttackError> {
    t.check(params)?;
    let mut trace = Vec::new();
    observe(&mut trace, t);
    let l_s = t.r_i.mul(&leak.r_s);
    step(&mut trace, "L_s = r_s·R_i", l_s.to_hex());
    let sk = session_key(t.t_i, &t.r_i, t.t_s, &t.r_s, &l_s);
    step(
        &mut trace,
        "SK = h(T_i ∥ R_i ∥ T_s ∥ R_s ∥ L_s)",
        sk.to_hex(),
    );
    Ok(AttackOutcome {
        recovered_sk: sk,
        recovered_l: l_s,
        recovered_extras: None,
        trace,
    })
}

/// Leaked `s`: rebuild `K_s`, open `Auth_i` for `r_i`, then `L_i = r_i·R_s`.
pub fn pfs_attack(
    t: &Transcript,
    leak: &LeakedLongTerm,
    params: &Arc<CurveParams>,
) -> Result<AttackOutcome, AttackError> {
    t.check(params)?;
    let mut trace = Vec::new();
    observe(&mut trace, t);
    step(&mut trace, "P_pub = s·P", leak.p_pub.to_hex());

    let k_s = pairing(&t.r_i.mul(&leak.s), &params.generator())?;
    step(&mut trace, "K_s = e(s·R_i, P)", hex::encode(k_s.to_bytes()));
    let key = kdf_from_gt(&k_s);
    step(&mut trace, "k = KDF(K_s)", hex::encode(key.as_bytes()));

    let plaintext = sym_decrypt(&key, &t.auth_i).map_err(|_| AttackError::DecryptFailure)?;
    let (id, t_inner, r_i) =
        decode_login_plaintext(params, &plaintext).map_err(|_| AttackError::MalformedPlaintext)?;
    step(&mut trace, "ID_i from D_k(Auth_i)", hex::encode(&id));
    step(&mut trace, "T_i from D_k(Auth_i)", t_inner.0.to_string());
    step(
        &mut trace,
        "r_i from D_k(Auth_i)",
        hex::encode(r_i.to_bytes(params.scalar_width())),
    );

    let l_i = t.r_s.mul(&r_i);
    step(
        &mut trace,
        "L_i = r_i·R_s = r_i·r_s·Q_i = r_s·R_i = L_s",
        l_i.to_hex(),
    );

    let auth_ok = server_auth(params, t.t_i, &t.r_i, t.t_s, &t.r_s, &l_i, &k_s) == t.auth_s;
    step(
        &mut trace,
        "Auth_s = h(T_i ∥ R_i ∥ T_s ∥ R_s ∥ L_s ∥ K_s) matches",
        auth_ok.to_string(),
    );

    let sk = session_key(t.t_i, &t.r_i, t.t_s, &t.r_s, &l_i);
    step(
        &mut trace,
        "SK = h(T_i ∥ R_i ∥ T_s ∥ R_s ∥ L_s)",
        sk.to_hex(),
    );
    Ok(AttackOutcome {
        recovered_sk: sk,
        recovered_l: l_i,
        recovered_extras: Some(RecoveredIdentity { id, r_i }),
        trace,
    })
}
