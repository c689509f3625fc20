//! Wire encodings of the two handshake messages and of the plaintext
//! carried inside `Auth_i`.
//!
//! ```text
//! LoginRequest   = 0x01 ∥ R_i ∥ T_i (u64 BE) ∥ len (u32 BE) ∥ body ∥ tag
//! ServerResponse = 0x02 ∥ R_s ∥ T_s (u64 BE) ∥ Auth_s (32 bytes BE)
//! ```
//! `len` counts `body ∥ tag`. Points use the fixed-width G1 encoding and
//! must lie in the order-q subgroup.

use std::sync::Arc;

use crate::algebra::{CurveParams, G1Point, Scalar};
use crate::primitives::{frame, unframe, Ciphertext, Timestamp, DIGEST_LEN};

use super::ProtocolError;

pub const LOGIN_REQUEST_TAG: u8 = 0x01;
pub const SERVER_RESPONSE_TAG: u8 = 0x02;

/// `R_i, T_i, Auth_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoginRequest {
    pub r_i: G1Point,
    pub t_i: Timestamp,
    pub auth_i: Ciphertext,
}

/// `R_s, T_s, Auth_s`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ServerResponse {
    pub r_s: G1Point,
    pub t_s: Timestamp,
    pub auth_s: Scalar,
}

fn decode_point(params: &Arc<CurveParams>, bytes: &[u8]) -> Result<G1Point, ProtocolError> {
    let pt =
        G1Point::from_bytes(params, bytes).map_err(|e| ProtocolError::Decode(e.to_string()))?;
    if !pt.is_in_subgroup() {
        return Err(ProtocolError::Decode(
            "point is outside the order-q subgroup".into(),
        ));
    }
    Ok(pt)
}

struct Reader<'a> {
    bytes: &'a [u8],
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8], ProtocolError> {
        if self.bytes.len() < n {
            return Err(ProtocolError::Decode(format!("truncated {what}")));
        }
        let (head, rest) = self.bytes.split_at(n);
        self.bytes = rest;
        Ok(head)
    }

    fn u64(&mut self, what: &str) -> Result<u64, ProtocolError> {
        Ok(u64::from_be_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn finish(self) -> Result<(), ProtocolError> {
        if self.bytes.is_empty() {
            Ok(())
        } else {
            Err(ProtocolError::Decode(format!(
                "{} trailing bytes",
                self.bytes.len()
            )))
        }
    }
}

impl LoginRequest {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![LOGIN_REQUEST_TAG];
        out.extend(self.r_i.to_bytes());
        out.extend(self.t_i.to_bytes());
        let len = (self.auth_i.body.len() + DIGEST_LEN) as u32;
        out.extend(len.to_be_bytes());
        out.extend(&self.auth_i.body);
        out.extend(self.auth_i.tag);
        out
    }

    pub fn from_bytes(params: &Arc<CurveParams>, bytes: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader { bytes };
        if r.take(1, "tag")? != [LOGIN_REQUEST_TAG] {
            return Err(ProtocolError::Decode("not a login request".into()));
        }
        let r_i = decode_point(params, r.take(G1Point::encoded_len(params), "R_i")?)?;
        let t_i = Timestamp(r.u64("T_i")?);
        let len = u32::from_be_bytes(r.take(4, "ciphertext length")?.try_into().unwrap()) as usize;
        if len < DIGEST_LEN {
            return Err(ProtocolError::Decode(
                "ciphertext shorter than its tag".into(),
            ));
        }
        let body = r.take(len - DIGEST_LEN, "ciphertext body")?.to_vec();
        let tag = r.take(DIGEST_LEN, "ciphertext tag")?.try_into().unwrap();
        r.finish()?;
        Ok(Self {
            r_i,
            t_i,
            auth_i: Ciphertext { body, tag },
        })
    }
}

impl ServerResponse {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![SERVER_RESPONSE_TAG];
        out.extend(self.r_s.to_bytes());
        out.extend(self.t_s.to_bytes());
        out.extend(self.auth_s.to_bytes(DIGEST_LEN));
        out
    }

    pub fn from_bytes(params: &Arc<CurveParams>, bytes: &[u8]) -> Result<Self, ProtocolError> {
        let mut r = Reader { bytes };
        if r.take(1, "tag")? != [SERVER_RESPONSE_TAG] {
            return Err(ProtocolError::Decode("not a server response".into()));
        }
        let r_s = decode_point(params, r.take(G1Point::encoded_len(params), "R_s")?)?;
        let t_s = Timestamp(r.u64("T_s")?);
        let auth_s = params
            .scalar_from_bytes(r.take(DIGEST_LEN, "Auth_s")?)
            .map_err(|e| ProtocolError::Decode(e.to_string()))?;
        r.finish()?;
        Ok(Self { r_s, t_s, auth_s })
    }
}

/// `ID_i ∥ T_i ∥ r_i`, framed.
pub fn encode_login_plaintext(
    params: &CurveParams,
    id: &[u8],
    t_i: Timestamp,
    r_i: &Scalar,
) -> Vec<u8> {
    frame(&[id, &t_i.to_bytes(), &r_i.to_bytes(params.scalar_width())])
}

pub fn decode_login_plaintext(
    params: &CurveParams,
    bytes: &[u8],
) -> Result<(Vec<u8>, Timestamp, Scalar), ProtocolError> {
    let fields = unframe(bytes).ok_or(ProtocolError::MalformedPlaintext)?;
    let [id, t, r] = fields[..] else {
        return Err(ProtocolError::MalformedPlaintext);
    };
    let t: [u8; 8] = t
        .try_into()
        .map_err(|_| ProtocolError::MalformedPlaintext)?;
    if r.len() != params.scalar_width() {
        return Err(ProtocolError::MalformedPlaintext);
    }
    let r = params
        .scalar_from_bytes(r)
        .map_err(|_| ProtocolError::MalformedPlaintext)?;
    Ok((id.to_vec(), Timestamp(u64::from_be_bytes(t)), r))
}
