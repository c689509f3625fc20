//! The honest protocol: server setup, patient registration with smart-card
//! issuance, and the three-message login handshake.
//!
//! Two formulas are read in their only self-consistent form. The patient's
//! pairing value is `K_i = e(P_pub, r_i·Q_i)` (with `Q_s` in that slot the two
//! sides never agree), and the server's `e(s, R_i·P)` is evaluated as
//! `K_s = e(s·R_i, P)`. By bilinearity and symmetry both equal
//! `e(P, Q_i)^(s·r_i)`.

mod messages;
mod registry;

use std::sync::Arc;

use rand_core::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    map_to_point, pairing, AlgebraError, CurveParams, G1Point, GtElement, Scalar,
};
use crate::primitives::{
    biometric_hash, check_freshness, ct_eq, digest, frame, hash_fields_to_scalar, kdf_from_gt,
    password_digest, sym_decrypt, sym_encrypt, xor_mask, CryptoError, Digest, FreshnessPolicy,
    Timestamp, DIGEST_LEN,
};

pub use messages::{
    decode_login_plaintext, encode_login_plaintext, LoginRequest, ServerResponse,
    LOGIN_REQUEST_TAG, SERVER_RESPONSE_TAG,
};
pub use registry::Registry;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("patient identity is empty")]
    EmptyIdentity,
    #[error("smart card rejected the supplied credentials")]
    CardRejected,
    #[error("timestamp outside the freshness window")]
    StaleTimestamp,
    #[error("Auth_i did not decrypt under the derived key")]
    DecryptFailure,
    #[error("timestamp inside Auth_i differs from the outer T_i")]
    TimestampMismatch,
    #[error("R_i != r_i·Q_i")]
    PointCheckFailed,
    #[error("Auth_s does not verify")]
    AuthMismatch,
    #[error("decrypted Auth_i is not a valid ID_i ∥ T_i ∥ r_i encoding")]
    MalformedPlaintext,
    #[error("elements belong to different parameter sets")]
    ParamsMismatch,
    #[error("decode error: {0}")]
    Decode(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

impl ProtocolError {
    /// Stable variant name, used in reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::EmptyIdentity => "EmptyIdentity",
            Self::CardRejected => "CardRejected",
            Self::StaleTimestamp => "StaleTimestamp",
            Self::DecryptFailure => "DecryptFailure",
            Self::TimestampMismatch => "TimestampMismatch",
            Self::PointCheckFailed => "PointCheckFailed",
            Self::AuthMismatch => "AuthMismatch",
            Self::MalformedPlaintext => "MalformedPlaintext",
            Self::ParamsMismatch => "ParamsMismatch",
            Self::Decode(_) => "DecodeError",
            Self::Algebra(_) => "AlgebraError",
        }
    }
}

impl From<CryptoError> for ProtocolError {
    fn from(e: CryptoError) -> Self {
        match e {
            CryptoError::DecryptFailure => Self::DecryptFailure,
        }
    }
}

/// Source of timestamps for a role.
pub trait Clock {
    fn now(&mut self) -> Timestamp;
}

/// 32-byte session key `h(T_i ∥ R_i ∥ T_s ∥ R_s ∥ L)`; raw digest, not reduced mod q.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SessionKey(#[serde(with = "hex")] pub [u8; DIGEST_LEN]);

impl std::fmt::Debug for SessionKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SessionKey({})", self.to_hex())
    }
}

impl SessionKey {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

/// Session key over the public values and the shared point L.
pub fn session_key(
    t_i: Timestamp,
    r_i: &G1Point,
    t_s: Timestamp,
    r_s: &G1Point,
    l: &G1Point,
) -> SessionKey {
    SessionKey(digest(&frame(&[
        &t_i.to_bytes(),
        &r_i.to_bytes(),
        &t_s.to_bytes(),
        &r_s.to_bytes(),
        &l.to_bytes(),
    ])))
}

/// `Auth_s = h(T_i ∥ R_i ∥ T_s ∥ R_s ∥ L ∥ K)`.
pub fn server_auth(
    params: &Arc<CurveParams>,
    t_i: Timestamp,
    r_i: &G1Point,
    t_s: Timestamp,
    r_s: &G1Point,
    l: &G1Point,
    k: &GtElement,
) -> Scalar {
    hash_fields_to_scalar(
        params,
        &[
            &t_i.to_bytes(),
            &r_i.to_bytes(),
            &t_s.to_bytes(),
            &r_s.to_bytes(),
            &l.to_bytes(),
            &k.to_bytes(),
        ],
    )
}

/// The TMIS server's long-term state.
#[derive(Clone, Debug)]
pub struct ServerState {
    params: Arc<CurveParams>,
    master_key: Scalar,
    public_key: G1Point,
    id: Vec<u8>,
    registry: Registry,
    policy: FreshnessPolicy,
}

impl ServerState {
    pub fn params(&self) -> &Arc<CurveParams> {
        &self.params
    }

    /// The master private key `s`.
    pub fn master_key(&self) -> &Scalar {
        &self.master_key
    }

    /// `P_pub = s·P`.
    pub fn public_key(&self) -> &G1Point {
        &self.public_key
    }

    pub fn id(&self) -> &[u8] {
        &self.id
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn set_registry(&mut self, registry: Registry) {
        self.registry = registry;
    }

    pub fn policy(&self) -> FreshnessPolicy {
        self.policy
    }
}

/// Draws `s` uniformly from [1, q) and publishes `P_pub = s·P`.
pub fn server_keygen<R: RngCore + ?Sized>(
    params: &Arc<CurveParams>,
    id: &[u8],
    policy: FreshnessPolicy,
    rng: &mut R,
) -> ServerState {
    let s = params.random_nonzero_scalar(rng);
    server_from_key(params, id, policy, s)
}

/// Server state for a known master key.
pub fn server_from_key(
    params: &Arc<CurveParams>,
    id: &[u8],
    policy: FreshnessPolicy,
    s: Scalar,
) -> ServerState {
    let public_key = params.generator().mul(&s);
    ServerState {
        params: params.clone(),
        master_key: s,
        public_key,
        id: id.to_vec(),
        registry: Registry::new(),
        policy,
    }
}

/// `ID_i`, `PW_i`, `B_i`. The biometric is an exact byte string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatientCredentials {
    pub id: Vec<u8>,
    pub password: Vec<u8>,
    pub biometric: Vec<u8>,
}

/// `C_i, ID_i`, sent over the secure registration channel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegistrationRequest {
    pub c: Digest,
    pub id: Vec<u8>,
}

/// `SC_i`: `V_i`, `W_i` and `P_pub`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmartCard {
    v: Scalar,
    w: Digest,
    p_pub: G1Point,
}

impl SmartCard {
    pub fn v(&self) -> &Scalar {
        &self.v
    }

    /// Issued at registration; the login phase never reads it.
    pub fn w(&self) -> &Digest {
        &self.w
    }

    pub fn server_public_key(&self) -> &G1Point {
        &self.p_pub
    }

    pub fn params(&self) -> &Arc<CurveParams> {
        self.p_pub.params()
    }
}

/// `C_i = digest("PW" ∥ PW_i) ⊕ H_B(B_i)`.
pub fn credential_digest(creds: &PatientCredentials) -> Digest {
    xor_mask(
        &password_digest(&creds.password),
        &biometric_hash(&creds.biometric),
    )
    .try_into()
    .expect("32-byte operands")
}

pub fn patient_make_registration(
    creds: &PatientCredentials,
) -> Result<RegistrationRequest, ProtocolError> {
    if creds.id.is_empty() {
        return Err(ProtocolError::EmptyIdentity);
    }
    Ok(RegistrationRequest {
        c: credential_digest(creds),
        id: creds.id.clone(),
    })
}

/// The 32-byte digest underlying `h(ID_i ∥ s)`.
pub fn registration_mask(params: &CurveParams, id: &[u8], s: &Scalar) -> Digest {
    digest(&frame(&[id, &s.to_bytes(params.scalar_width())]))
}

/// Bumps the registry counter and issues `(V_i, W_i, P_pub)`.
pub fn register_patient(server: &mut ServerState, req: &RegistrationRequest) -> SmartCard {
    server.registry.record(&req.id);
    let v = hash_fields_to_scalar(&server.params, &[&req.id, &req.c]);
    let mask = registration_mask(&server.params, &req.id, &server.master_key);
    let w = xor_mask(&req.c, &mask)
        .try_into()
        .expect("32-byte operands");
    SmartCard {
        v,
        w,
        p_pub: server.public_key.clone(),
    }
}

/// `h(ID_i ∥ PW_i ⊕ H_B(B_i)) == V_i`.
pub fn card_local_verify(card: &SmartCard, creds: &PatientCredentials) -> bool {
    let c = credential_digest(creds);
    hash_fields_to_scalar(card.params(), &[&creds.id, &c]) == card.v
}

/// Patient side of one handshake.
#[derive(Clone, Debug)]
pub struct PatientSessionState {
    pub id: Vec<u8>,
    pub r_i: Scalar,
    pub q_i: G1Point,
    pub q_s: G1Point,
    pub k_i: GtElement,
    pub t_i: Timestamp,
    pub big_r_i: G1Point,
    pub l_i: Option<G1Point>,
    pub sk_i: Option<SessionKey>,
}

/// Server side of one handshake.
#[derive(Clone, Debug)]
pub struct ServerSessionState {
    pub patient_id: Vec<u8>,
    pub r_s: Scalar,
    pub q_i: G1Point,
    pub q_s: G1Point,
    pub k_s: GtElement,
    pub big_r_s: G1Point,
    pub l_s: G1Point,
    pub t_s: Timestamp,
    pub sk_s: SessionKey,
}

/// Card check, then `R_i = r_i·Q_i`, `K_i = e(P_pub, r_i·Q_i)` and
/// `Auth_i = E_{k_i}(ID_i ∥ T_i ∥ r_i)`.
pub fn patient_login_start<C: Clock + ?Sized, R: RngCore + ?Sized>(
    card: &SmartCard,
    creds: &PatientCredentials,
    server_id: &[u8],
    clock: &mut C,
    rng: &mut R,
) -> Result<(PatientSessionState, LoginRequest), ProtocolError> {
    if !card_local_verify(card, creds) {
        return Err(ProtocolError::CardRejected);
    }
    let params = card.params();
    let r_i = params.random_nonzero_scalar(rng);
    let t_i = clock.now();
    let q_i = map_to_point(params, &creds.id)?;
    let q_s = map_to_point(params, server_id)?;
    let big_r_i = q_i.mul(&r_i);
    let k_i = pairing(&card.p_pub, &big_r_i)?;
    let plaintext = encode_login_plaintext(params, &creds.id, t_i, &r_i);
    let auth_i = sym_encrypt(&kdf_from_gt(&k_i), &plaintext);
    let req = LoginRequest {
        r_i: big_r_i.clone(),
        t_i,
        auth_i,
    };
    let state = PatientSessionState {
        id: creds.id.clone(),
        r_i,
        q_i,
        q_s,
        k_i,
        t_i,
        big_r_i,
        l_i: None,
        sk_i: None,
    };
    Ok((state, req))
}

/// Server processing of `R_i, T_i, Auth_i`. Any failed check aborts with no response.
pub fn server_handle_login<C: Clock + ?Sized, R: RngCore + ?Sized>(
    server: &ServerState,
    req: &LoginRequest,
    clock: &mut C,
    rng: &mut R,
) -> Result<(ServerSessionState, ServerResponse), ProtocolError> {
    let params = &server.params;
    if req.r_i.params() != params {
        return Err(ProtocolError::ParamsMismatch);
    }
    let received_at = clock.now();
    if !check_freshness(req.t_i, received_at, server.policy) {
        return Err(ProtocolError::StaleTimestamp);
    }

    let k_s = pairing(&req.r_i.mul(&server.master_key), &params.generator())?;
    let plaintext = sym_decrypt(&kdf_from_gt(&k_s), &req.auth_i)?;
    let (patient_id, inner_t_i, r_i) = decode_login_plaintext(params, &plaintext)?;
    if inner_t_i != req.t_i {
        return Err(ProtocolError::TimestampMismatch);
    }

    let q_i = map_to_point(params, &patient_id)?;
    if q_i.mul(&r_i) != req.r_i {
        return Err(ProtocolError::PointCheckFailed);
    }

    let r_s = params.random_nonzero_scalar(rng);
    let q_s = map_to_point(params, &server.id)?;
    let big_r_s = q_i.mul(&r_s);
    let l_s = req.r_i.mul(&r_s);
    let t_s = clock.now();
    let auth_s = server_auth(params, req.t_i, &req.r_i, t_s, &big_r_s, &l_s, &k_s);
    let sk_s = session_key(req.t_i, &req.r_i, t_s, &big_r_s, &l_s);

    let resp = ServerResponse {
        r_s: big_r_s.clone(),
        t_s,
        auth_s,
    };
    let state = ServerSessionState {
        patient_id,
        r_s,
        q_i,
        q_s,
        k_s,
        big_r_s,
        l_s,
        t_s,
        sk_s,
    };
    Ok((state, resp))
}

/// Verifies `Auth_s` with `L_i = r_i·R_s` and `K_i`, then derives `SK_i`.
pub fn patient_finish<C: Clock + ?Sized>(
    state: &mut PatientSessionState,
    resp: &ServerResponse,
    policy: FreshnessPolicy,
    clock: &mut C,
) -> Result<SessionKey, ProtocolError> {
    let params = state.q_i.params().clone();
    if resp.r_s.params() != &params {
        return Err(ProtocolError::ParamsMismatch);
    }
    if !check_freshness(resp.t_s, clock.now(), policy) {
        return Err(ProtocolError::StaleTimestamp);
    }
    let l_i = resp.r_s.mul(&state.r_i);
    let expected = server_auth(
        &params,
        state.t_i,
        &state.big_r_i,
        resp.t_s,
        &resp.r_s,
        &l_i,
        &state.k_i,
    );
    if !ct_eq(
        &expected.to_bytes(DIGEST_LEN),
        &resp.auth_s.to_bytes(DIGEST_LEN),
    ) {
        return Err(ProtocolError::AuthMismatch);
    }
    let sk = session_key(state.t_i, &state.big_r_i, resp.t_s, &resp.r_s, &l_i);
    state.l_i = Some(l_i);
    state.sk_i = Some(sk);
    Ok(sk)
}
