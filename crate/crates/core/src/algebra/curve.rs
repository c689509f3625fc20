use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;

use super::field::{FieldElement, PrimeField};
use super::params::{left_pad, CurveParams, Scalar};
use super::AlgebraError;

const TAG_INFINITY: u8 = 0x00;
const TAG_AFFINE: u8 = 0x04;

#[derive(Clone, PartialEq, Eq, Hash)]
enum Coords {
    Infinity,
    Affine { x: FieldElement, y: FieldElement },
}

/// A point of E(F_p) in affine coordinates, tied to its parameter set.
#[derive(Clone)]
pub struct G1Point {
    params: Arc<CurveParams>,
    coords: Coords,
}

pub(crate) fn same_params(a: &Arc<CurveParams>, b: &Arc<CurveParams>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

impl PartialEq for G1Point {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords && same_params(&self.params, &other.params)
    }
}

impl Eq for G1Point {}

impl fmt::Debug for G1Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.coords {
            Coords::Infinity => write!(f, "G1[{}](inf)", self.params.label()),
            Coords::Affine { x, y } => {
                write!(
                    f,
                    "G1[{}]({}, {})",
                    self.params.label(),
                    x.value(),
                    y.value()
                )
            }
        }
    }
}

/// `(X, Y, Z)` standing for `(X/Z², Y/Z³)`; never the identity, which
/// callers represent as `None`.
#[derive(Clone, Debug)]
pub(crate) struct Jacobian {
    pub x: FieldElement,
    pub y: FieldElement,
    pub z: FieldElement,
}

impl Jacobian {
    pub fn from_affine(f: &PrimeField, x: &FieldElement, y: &FieldElement) -> Self {
        Self {
            x: x.clone(),
            y: y.clone(),
            z: f.one(),
        }
    }

    pub fn to_affine(&self, f: &PrimeField) -> (FieldElement, FieldElement) {
        let zi = f.inv(&self.z).expect("Z is nonzero");
        let zi2 = f.square(&zi);
        (f.mul(&self.x, &zi2), f.mul(&self.y, &f.mul(&zi2, &zi)))
    }

    /// Returns the doubled point and `M = 3X² + Z⁴`, the tangent slope
    /// numerator (the slope is `M / Z3`).
    pub fn double_with_slope(&self, f: &PrimeField) -> Option<(Self, FieldElement)> {
        if self.y.is_zero() {
            return None;
        }
        let xx = f.square(&self.x);
        let yy = f.square(&self.y);
        let zz = f.square(&self.z);
        let s = f.mul(&f.from_u64(4), &f.mul(&self.x, &yy));
        let m = f.add(&f.add(&f.add(&xx, &xx), &xx), &f.square(&zz));
        let x3 = f.sub(&f.square(&m), &f.add(&s, &s));
        let yyyy8 = f.mul(&f.from_u64(8), &f.square(&yy));
        let y3 = f.sub(&f.mul(&m, &f.sub(&s, &x3)), &yyyy8);
        let yz = f.mul(&self.y, &self.z);
        let z3 = f.add(&yz, &yz);
        Some((
            Self {
                x: x3,
                y: y3,
                z: z3,
            },
            m,
        ))
    }

    pub fn double(&self, f: &PrimeField) -> Option<Self> {
        self.double_with_slope(f).map(|(p, _)| p)
    }

    /// `H = x·Z² - X` and `R = y·Z³ - Y`; the chord slope is `R / (Z·H)`.
    pub fn chord_terms(
        &self,
        f: &PrimeField,
        x: &FieldElement,
        y: &FieldElement,
    ) -> (FieldElement, FieldElement) {
        let zz = f.square(&self.z);
        let h = f.sub(&f.mul(x, &zz), &self.x);
        let r = f.sub(&f.mul(y, &f.mul(&self.z, &zz)), &self.y);
        (h, r)
    }

    /// Mixed addition with the affine point `(x, y)`.
    pub fn add_affine(&self, f: &PrimeField, x: &FieldElement, y: &FieldElement) -> Option<Self> {
        let (h, r) = self.chord_terms(f, x, y);
        if h.is_zero() {
            return if r.is_zero() { self.double(f) } else { None };
        }
        Some(self.add_with_terms(f, &h, &r))
    }

    /// Mixed addition given precomputed chord terms with `H != 0`.
    pub fn add_with_terms(&self, f: &PrimeField, h: &FieldElement, r: &FieldElement) -> Self {
        let hh = f.square(h);
        let hhh = f.mul(h, &hh);
        let v = f.mul(&self.x, &hh);
        let x3 = f.sub(&f.sub(&f.square(r), &hhh), &f.add(&v, &v));
        let y3 = f.sub(&f.mul(r, &f.sub(&v, &x3)), &f.mul(&self.y, &hhh));
        let z3 = f.mul(&self.z, h);
        Self {
            x: x3,
            y: y3,
            z: z3,
        }
    }
}

impl G1Point {
    pub fn infinity(params: &Arc<CurveParams>) -> Self {
        Self {
            params: params.clone(),
            coords: Coords::Infinity,
        }
    }

    /// Builds an affine point, checking the curve equation.
    pub fn from_affine(
        params: &Arc<CurveParams>,
        x: FieldElement,
        y: FieldElement,
    ) -> Result<Self, AlgebraError> {
        let pt = Self::from_affine_unchecked(params, x, y);
        if pt.is_on_curve() {
            Ok(pt)
        } else {
            Err(AlgebraError::NotOnCurve)
        }
    }

    /// Skips the curve check. Only for tests that need invalid points.
    #[doc(hidden)]
    pub fn from_affine_unchecked(
        params: &Arc<CurveParams>,
        x: FieldElement,
        y: FieldElement,
    ) -> Self {
        Self {
            params: params.clone(),
            coords: Coords::Affine { x, y },
        }
    }

    pub fn params(&self) -> &Arc<CurveParams> {
        &self.params
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self.coords, Coords::Infinity)
    }

    pub fn x(&self) -> Option<&FieldElement> {
        match &self.coords {
            Coords::Affine { x, .. } => Some(x),
            Coords::Infinity => None,
        }
    }

    pub fn y(&self) -> Option<&FieldElement> {
        match &self.coords {
            Coords::Affine { y, .. } => Some(y),
            Coords::Infinity => None,
        }
    }

    pub fn is_on_curve(&self) -> bool {
        match &self.coords {
            Coords::Infinity => true,
            Coords::Affine { x, y } => {
                let f = self.params.field();
                if x.value() >= f.modulus() || y.value() >= f.modulus() {
                    return false;
                }
                let rhs = f.add(&f.mul(&f.square(x), x), x);
                f.square(y) == rhs
            }
        }
    }

    /// On the curve and killed by q.
    pub fn is_in_subgroup(&self) -> bool {
        self.is_on_curve() && self.mul_uint(self.params.q()).is_infinity()
    }

    pub fn neg(&self) -> Self {
        match &self.coords {
            Coords::Infinity => self.clone(),
            Coords::Affine { x, y } => Self {
                params: self.params.clone(),
                coords: Coords::Affine {
                    x: x.clone(),
                    y: self.params.field().neg(y),
                },
            },
        }
    }

    /// Chord-tangent addition.
    pub fn add(&self, other: &Self) -> Self {
        assert!(
            same_params(&self.params, &other.params),
            "adding points from different parameter sets"
        );
        let (x1, y1, x2, y2) = match (&self.coords, &other.coords) {
            (Coords::Infinity, _) => return other.clone(),
            (_, Coords::Infinity) => return self.clone(),
            (Coords::Affine { x: x1, y: y1 }, Coords::Affine { x: x2, y: y2 }) => (x1, y1, x2, y2),
        };
        let f = self.params.field();
        let lambda = if x1 == x2 {
            if y1 != y2 || y1.is_zero() {
                return Self::infinity(&self.params);
            }
            // tangent: (3x² + 1) / 2y
            let num = f.add(&f.mul(&f.from_u64(3), &f.square(x1)), &f.one());
            let den = f.add(y1, y1);
            f.mul(&num, &f.inv(&den).expect("y != 0"))
        } else {
            let num = f.sub(y2, y1);
            let den = f.sub(x2, x1);
            f.mul(&num, &f.inv(&den).expect("x1 != x2"))
        };
        let x3 = f.sub(&f.sub(&f.square(&lambda), x1), x2);
        let y3 = f.sub(&f.mul(&lambda, &f.sub(x1, &x3)), y1);
        Self {
            params: self.params.clone(),
            coords: Coords::Affine { x: x3, y: y3 },
        }
    }

    pub fn double(&self) -> Self {
        self.add(self)
    }

    pub fn mul(&self, k: &Scalar) -> Self {
        self.mul_uint(k.value())
    }

    /// Double-and-add by an unreduced integer (cofactor clearing, order checks).
    pub fn mul_uint(&self, k: &BigUint) -> Self {
        let Coords::Affine { x, y } = &self.coords else {
            return self.clone();
        };
        let f = self.params.field();
        let mut acc: Option<Jacobian> = None;
        for i in (0..k.bits()).rev() {
            acc = acc.and_then(|j| j.double(f));
            if k.bit(i) {
                acc = match acc {
                    None => Some(Jacobian::from_affine(f, x, y)),
                    Some(j) => j.add_affine(f, x, y),
                };
            }
        }
        match acc {
            None => Self::infinity(&self.params),
            Some(j) => {
                let (x, y) = j.to_affine(f);
                Self {
                    params: self.params.clone(),
                    coords: Coords::Affine { x, y },
                }
            }
        }
    }

    /// Serialized width of every point under these parameters.
    pub fn encoded_len(params: &CurveParams) -> usize {
        1 + 2 * params.fp_width()
    }

    /// `tag ∥ x ∥ y`, fixed width. Infinity is tag 0x00 with zeroed coordinates.
    pub fn to_bytes(&self) -> Vec<u8> {
        let w = self.params.fp_width();
        let mut out = Vec::with_capacity(1 + 2 * w);
        match &self.coords {
            Coords::Infinity => {
                out.push(TAG_INFINITY);
                out.resize(1 + 2 * w, 0);
            }
            Coords::Affine { x, y } => {
                out.push(TAG_AFFINE);
                out.extend(left_pad(&x.value().to_bytes_be(), w));
                out.extend(left_pad(&y.value().to_bytes_be(), w));
            }
        }
        out
    }

    pub fn from_bytes(params: &Arc<CurveParams>, bytes: &[u8]) -> Result<Self, AlgebraError> {
        let w = params.fp_width();
        if bytes.len() != 1 + 2 * w {
            return Err(AlgebraError::Decode(format!(
                "point encoding is {} bytes, expected {}",
                bytes.len(),
                1 + 2 * w
            )));
        }
        let body = &bytes[1..];
        match bytes[0] {
            TAG_INFINITY => {
                if body.iter().any(|&b| b != 0) {
                    return Err(AlgebraError::Decode("non-zero body for infinity".into()));
                }
                Ok(Self::infinity(params))
            }
            TAG_AFFINE => {
                let f = params.field();
                let coord = |b: &[u8]| {
                    f.canonical(BigUint::from_bytes_be(b))
                        .ok_or_else(|| AlgebraError::Decode("coordinate not reduced mod p".into()))
                };
                let x = coord(&body[..w])?;
                let y = coord(&body[w..])?;
                Self::from_affine(params, x, y)
                    .map_err(|_| AlgebraError::Decode("point is not on the curve".into()))
            }
            t => Err(AlgebraError::Decode(format!("unknown point tag {t:#04x}"))),
        }
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.to_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Every affine point on the p = 43 curve, by brute-force scan of F_43².
    fn all_points() -> Vec<G1Point> {
        let t = CurveParams::test();
        let f = t.field();
        let mut pts = vec![G1Point::infinity(&t)];
        for x in 0..43u64 {
            for y in 0..43u64 {
                let pt = G1Point::from_affine_unchecked(&t, f.from_u64(x), f.from_u64(y));
                if pt.is_on_curve() {
                    pts.push(pt);
                }
            }
        }
        pts
    }

    #[test]
    fn scalar_multiplication_matches_repeated_addition() {
        for p in all_points() {
            let mut expected = G1Point::infinity(p.params());
            for k in 0..50u64 {
                assert_eq!(p.mul_uint(&BigUint::from(k)), expected, "{p:?} * {k}");
                expected = expected.add(&p);
            }
        }
        let d = CurveParams::desk();
        let g = d.generator();
        let mut expected = G1Point::infinity(&d);
        for k in 0..40u64 {
            assert_eq!(g.mul_uint(&BigUint::from(k)), expected);
            expected = expected.add(&g);
        }
    }

    #[test]
    fn test_curve_has_44_points() {
        assert_eq!(all_points().len(), 44);
    }

    #[test]
    fn identity_and_inverse() {
        for p in all_points() {
            let inf = G1Point::infinity(p.params());
            assert_eq!(p.add(&inf), p);
            assert_eq!(inf.add(&p), p);
            assert!(p.add(&p.neg()).is_infinity());
            assert_eq!(p.neg().neg(), p);
            assert_eq!(p.add(&p), p.double());
        }
    }

    #[test]
    fn commutative_and_associative_exhaustive() {
        let pts = all_points();
        for a in &pts {
            for b in &pts {
                let ab = a.add(b);
                assert!(ab.is_on_curve());
                assert_eq!(ab, b.add(a));
                for c in &pts {
                    assert_eq!(ab.add(c), a.add(&b.add(c)));
                }
            }
        }
    }

    #[test]
    fn scalar_mul_matches_repeated_addition() {
        let t = CurveParams::test();
        for p in all_points() {
            let mut acc = G1Point::infinity(&t);
            for k in 0..44u64 {
                assert_eq!(p.mul_uint(&BigUint::from(k)), acc, "k = {k}");
                acc = acc.add(&p);
            }
        }
    }

    #[test]
    fn generator_order() {
        let t = CurveParams::test();
        let g = t.generator();
        assert_eq!(g.x().unwrap().value(), &BigUint::from(31u32));
        assert_eq!(g.y().unwrap().value(), &BigUint::from(18u32));
        assert!(g.mul(&t.scalar_from_u64(0)).is_infinity());
        assert!(g.mul_uint(t.q()).is_infinity());
        for k in 1..11u64 {
            assert!(!g.mul_uint(&BigUint::from(k)).is_infinity());
        }
        // The generator is 4·(2, 15): the first point by ascending x (smaller y)
        // whose cofactor multiple is not the identity.
        let f = t.field();
        let first = G1Point::from_affine(&t, f.from_u64(2), f.from_u64(15)).unwrap();
        assert_eq!(first.mul_uint(t.cofactor()), g);
    }

    #[test]
    fn off_curve_rejected() {
        let t = CurveParams::test();
        let g = t.generator();
        let f = t.field();
        let bumped = G1Point::from_affine_unchecked(
            &t,
            g.x().unwrap().clone(),
            f.add(g.y().unwrap(), &f.one()),
        );
        assert!(!bumped.is_on_curve());
        assert!(G1Point::infinity(&t).is_on_curve());
        assert!(matches!(
            G1Point::from_bytes(&t, &bumped.to_bytes()),
            Err(AlgebraError::Decode(_))
        ));
    }

    #[test]
    fn encoding_roundtrip_and_width() {
        for p in all_points() {
            let bytes = p.to_bytes();
            assert_eq!(bytes.len(), 3);
            assert_eq!(G1Point::from_bytes(p.params(), &bytes).unwrap(), p);
        }
        let d = CurveParams::desk();
        let g = d.generator();
        assert_eq!(g.to_bytes().len(), 1 + 2 * 32);
        assert_eq!(G1Point::from_bytes(&d, &g.to_bytes()).unwrap(), g);
    }

    #[test]
    fn malformed_encodings() {
        let t = CurveParams::test();
        let g = t.generator();
        let mut b = g.to_bytes();
        assert!(G1Point::from_bytes(&t, &b[..2]).is_err());
        b.push(0);
        assert!(G1Point::from_bytes(&t, &b).is_err());
        // x = 43 is not canonical
        assert!(G1Point::from_bytes(&t, &[TAG_AFFINE, 43, 18]).is_err());
        assert!(G1Point::from_bytes(&t, &[TAG_INFINITY, 0, 1]).is_err());
        assert!(G1Point::from_bytes(&t, &[0x07, 31, 18]).is_err());
        // pinned vector for the generator
        assert_eq!(g.to_hex(), "041f12");
        assert_eq!(G1Point::infinity(&t).to_hex(), "000000");
    }
}
