//! Symmetric pairing ê(P, Q) = Tate(P, φ(Q))^((p²-1)/q) on the order-q subgroup.
//!
//! φ(x, y) = (-x, i·y) sends the F_p-rational subgroup to a linearly
//! independent one over F_p², which makes the self-pairing non-degenerate.
//! The Miller loop runs over the bits of q with P in affine F_p coordinates.
//! Vertical lines evaluate to elements of F_p at φ(Q) (the x-coordinate of
//! φ(Q) is in F_p), and the final exponent is a multiple of p - 1, so they
//! are dropped.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use super::curve::{same_params, Jacobian};
use super::field::{Fp2Element, PrimeField};
use super::params::{left_pad, CurveParams, Scalar};
use super::{AlgebraError, G1Point};

/// A point on E over F_p², the codomain of the distortion map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fp2Point {
    pub x: Fp2Element,
    pub y: Fp2Element,
}

impl Fp2Point {
    /// Y² = X³ + X over F_p².
    pub fn is_on_curve(&self, field: &PrimeField) -> bool {
        let x3 = field.fp2_mul(&field.fp2_square(&self.x), &self.x);
        field.fp2_square(&self.y) == field.fp2_add(&x3, &self.x)
    }

    /// φ applied to a point already over F_p².
    pub fn distort(&self, field: &PrimeField) -> Fp2Point {
        let i = field.fp2(field.zero(), field.one());
        Fp2Point {
            x: field.fp2_neg(&self.x),
            y: field.fp2_mul(&i, &self.y),
        }
    }
}

/// φ(x, y) = (-x, i·y).
pub fn distortion_map(pt: &G1Point) -> Result<Fp2Point, AlgebraError> {
    let (x, y) = match (pt.x(), pt.y()) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(AlgebraError::InfinityInput),
    };
    let f = pt.params().field();
    Ok(Fp2Point {
        x: f.fp2(f.neg(x), f.zero()),
        y: f.fp2(f.zero(), y.clone()),
    })
}

/// An element of the order-q subgroup µ_q of F_p²*.
#[derive(Clone)]
pub struct GtElement {
    params: Arc<CurveParams>,
    value: Fp2Element,
}

impl PartialEq for GtElement {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && same_params(&self.params, &other.params)
    }
}

impl Eq for GtElement {}

impl fmt::Debug for GtElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Gt[{}]({} + {}i)",
            self.params.label(),
            self.value.a.value(),
            self.value.b.value()
        )
    }
}

impl GtElement {
    pub fn identity(params: &Arc<CurveParams>) -> Self {
        Self {
            params: params.clone(),
            value: params.field().fp2_one(),
        }
    }

    pub fn params(&self) -> &Arc<CurveParams> {
        &self.params
    }

    pub fn value(&self) -> &Fp2Element {
        &self.value
    }

    pub fn is_identity(&self) -> bool {
        self.value == self.params.field().fp2_one()
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert!(same_params(&self.params, &other.params));
        Self {
            params: self.params.clone(),
            value: self.params.field().fp2_mul(&self.value, &other.value),
        }
    }

    /// Square-and-multiply.
    pub fn pow(&self, k: &Scalar) -> Self {
        self.pow_uint(k.value())
    }

    pub fn pow_uint(&self, k: &BigUint) -> Self {
        Self {
            params: self.params.clone(),
            value: self.params.field().fp2_pow(&self.value, k),
        }
    }

    /// `a ∥ b`, each coordinate fixed-width big-endian.
    pub fn to_bytes(&self) -> Vec<u8> {
        let w = self.params.fp_width();
        let mut out = left_pad(&self.value.a.value().to_bytes_be(), w);
        out.extend(left_pad(&self.value.b.value().to_bytes_be(), w));
        out
    }

    /// Rejects non-canonical coordinates and values outside µ_q.
    pub fn from_bytes(params: &Arc<CurveParams>, bytes: &[u8]) -> Result<Self, AlgebraError> {
        let w = params.fp_width();
        if bytes.len() != 2 * w {
            return Err(AlgebraError::Decode(format!(
                "Gt encoding is {} bytes, expected {}",
                bytes.len(),
                2 * w
            )));
        }
        let f = params.field();
        let coord = |b: &[u8]| {
            f.canonical(BigUint::from_bytes_be(b))
                .ok_or_else(|| AlgebraError::Decode("Gt coordinate not reduced mod p".into()))
        };
        let g = Self {
            params: params.clone(),
            value: f.fp2(coord(&bytes[..w])?, coord(&bytes[w..])?),
        };
        if f.fp2_is_zero(&g.value) || !g.pow_uint(params.q()).is_identity() {
            return Err(AlgebraError::Decode(
                "value is not in the order-q subgroup".into(),
            ));
        }
        Ok(g)
    }
}

/// Miller's algorithm for f_{q,P} evaluated at φ(Q) = (-qx, i·qy), up to
/// F_p* factors.
///
/// The line through `V` with slope `λ` evaluates to
/// `(λ(x_V + qx) - y_V) + qy·i`. With `V` kept in Jacobian coordinates each
/// line is multiplied through by its slope denominator, which the final
/// exponentiation removes, so the loop needs no inversions.
fn miller_loop(p: &G1Point, q: &G1Point) -> Fp2Element {
    let params = p.params();
    let f = params.field();
    let (px, py) = (p.x().unwrap(), p.y().unwrap());
    let (qx, qy) = (q.x().unwrap(), q.y().unwrap());
    let order = params.q();

    let mut acc = f.fp2_one();
    let mut v = Jacobian::from_affine(f, px, py);
    for i in (0..order.bits() - 1).rev() {
        // Tangent: λ = M / Z3; scaled by Z3·Z² the line is
        // M·(X + qx·Z²) - 2Y² + qy·Z3·Z²·i. y_V != 0 because q is odd.
        let zz = f.square(&v.z);
        let yy = f.square(&v.y);
        let (doubled, m) = v.double_with_slope(f).expect("point of order 2");
        let real = f.sub(&f.mul(&m, &f.add(&v.x, &f.mul(qx, &zz))), &f.add(&yy, &yy));
        let imag = f.mul(qy, &f.mul(&doubled.z, &zz));
        acc = f.fp2_mul(&f.fp2_square(&acc), &f.fp2(real, imag));
        v = doubled;

        if order.bit(i) {
            let (h, r) = v.chord_terms(f, px, py);
            if h.is_zero() {
                // V = -P: the chord is vertical and V + P is the identity.
                // Only happens on the final bit.
                debug_assert_eq!(i, 0);
                continue;
            }
            // Chord through P: λ = R / Z3; scaled by Z3 the line is
            // R·(px + qx) - py·Z3 + qy·Z3·i.
            let sum = v.add_with_terms(f, &h, &r);
            let real = f.sub(&f.mul(&r, &f.add(px, qx)), &f.mul(py, &sum.z));
            let imag = f.mul(qy, &sum.z);
            acc = f.fp2_mul(&acc, &f.fp2(real, imag));
            v = sum;
        }
    }
    acc
}

/// Raises to (p² - 1)/q = (p - 1)·(p + 1)/q: the p - 1 part is
/// conj(f)/f by Frobenius, the rest is the curve cofactor.
fn final_exponentiation(params: &CurveParams, m: &Fp2Element) -> Fp2Element {
    let f = params.field();
    let inv = f.fp2_inv(m).expect("Miller value is never zero");
    let unitary = f.fp2_mul(&f.fp2_conjugate(m), &inv);
    f.fp2_pow(&unitary, params.cofactor())
}

/// The reduced Tate pairing composed with the distortion map.
pub fn pairing(a: &G1Point, b: &G1Point) -> Result<GtElement, AlgebraError> {
    if !same_params(a.params(), b.params()) {
        return Err(AlgebraError::ParamsMismatch);
    }
    let params = a.params();
    if a.is_infinity() || b.is_infinity() {
        return Ok(GtElement::identity(params));
    }
    let m = miller_loop(a, b);
    Ok(GtElement {
        params: params.clone(),
        value: final_exponentiation(params, &m),
    })
}

/// Pairing value before final exponentiation, exposed for cross-checks.
#[doc(hidden)]
pub fn miller_value(a: &G1Point, b: &G1Point) -> Option<Fp2Element> {
    (!a.is_infinity() && !b.is_infinity()).then(|| miller_loop(a, b))
}
