use std::sync::Arc;

use num_bigint::BigUint;

use super::params::CurveParams;
use super::{AlgebraError, G1Point};
use crate::primitives::{digest, frame};

/// Number of counters tried before giving up.
pub const MAP_ATTEMPTS: usize = 256;

/// Try-and-increment hash onto the order-q subgroup.
///
/// For each counter `ctr`, `d = SHA-256(frame("H1", msg, [ctr]))` gives
/// `x = d mod p`; if `x³ + x` is a square its root is taken with parity equal
/// to the top bit of `d`, and the point is multiplied by the cofactor.
pub fn map_to_point(params: &Arc<CurveParams>, msg: &[u8]) -> Result<G1Point, AlgebraError> {
    let f = params.field();
    for ctr in 0..MAP_ATTEMPTS {
        let d = digest(&frame(&[b"H1", msg, &[ctr as u8]]));
        let x = f.element(&BigUint::from_bytes_be(&d));
        let rhs = f.add(&f.mul(&f.square(&x), &x), &x);
        let Some(mut y) = f.sqrt(&rhs) else {
            continue;
        };
        let want_odd = d[0] & 0x80 != 0;
        if f.is_odd(&y) != want_odd {
            y = f.neg(&y);
        }
        let candidate = G1Point::from_affine(params, x, y)?;
        let pt = candidate.mul_uint(params.cofactor());
        if !pt.is_infinity() {
            return Ok(pt);
        }
    }
    Err(AlgebraError::MapFailure)
}
