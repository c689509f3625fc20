//! Arithmetic in F_p and F_p² = F_p[i]/(i² + 1).
//!
//! Elements are plain reduced integers; the modulus lives in [`PrimeField`],
//! which every operation goes through. Nothing here is constant time.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

/// An element of F_p in canonical form, `0 <= value < p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FieldElement(pub(crate) BigUint);

impl FieldElement {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

/// `a + b·i` with `i² = -1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fp2Element {
    pub a: FieldElement,
    pub b: FieldElement,
}

/// The prime field F_p together with its quadratic extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeField {
    modulus: BigUint,
    sqrt_exp: BigUint,
    legendre_exp: BigUint,
}

impl PrimeField {
    /// `modulus` must be an odd prime congruent to 3 mod 4; the caller checks.
    pub(crate) fn new(modulus: BigUint) -> Self {
        let sqrt_exp = (&modulus + 1u32) >> 2;
        let legendre_exp = (&modulus - 1u32) >> 1;
        Self {
            modulus,
            sqrt_exp,
            legendre_exp,
        }
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    /// Reduces an arbitrary integer into the field.
    pub fn element(&self, v: &BigUint) -> FieldElement {
        FieldElement(v % &self.modulus)
    }

    /// Accepts `v` only if it is already canonical.
    pub fn canonical(&self, v: BigUint) -> Option<FieldElement> {
        (v < self.modulus).then_some(FieldElement(v))
    }

    pub fn from_u64(&self, v: u64) -> FieldElement {
        self.element(&BigUint::from(v))
    }

    pub fn zero(&self) -> FieldElement {
        FieldElement(BigUint::zero())
    }

    pub fn one(&self) -> FieldElement {
        FieldElement(BigUint::one())
    }

    pub fn add(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        let s = &x.0 + &y.0;
        if s >= self.modulus {
            FieldElement(s - &self.modulus)
        } else {
            FieldElement(s)
        }
    }

    pub fn sub(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        if x.0 >= y.0 {
            FieldElement(&x.0 - &y.0)
        } else {
            FieldElement(&self.modulus - &y.0 + &x.0)
        }
    }

    pub fn neg(&self, x: &FieldElement) -> FieldElement {
        if x.0.is_zero() {
            x.clone()
        } else {
            FieldElement(&self.modulus - &x.0)
        }
    }

    pub fn mul(&self, x: &FieldElement, y: &FieldElement) -> FieldElement {
        FieldElement((&x.0 * &y.0) % &self.modulus)
    }

    pub fn square(&self, x: &FieldElement) -> FieldElement {
        self.mul(x, x)
    }

    pub fn pow(&self, x: &FieldElement, e: &BigUint) -> FieldElement {
        FieldElement(x.0.modpow(e, &self.modulus))
    }

    /// Multiplicative inverse via the extended Euclidean algorithm.
    pub fn inv(&self, x: &FieldElement) -> Option<FieldElement> {
        x.0.modinv(&self.modulus).map(FieldElement)
    }

    /// Euler's criterion; zero counts as a square.
    pub fn is_square(&self, x: &FieldElement) -> bool {
        x.is_zero() || self.pow(x, &self.legendre_exp).0.is_one()
    }

    /// One square root of `x`, if any. Valid because p = 3 (mod 4).
    pub fn sqrt(&self, x: &FieldElement) -> Option<FieldElement> {
        let r = self.pow(x, &self.sqrt_exp);
        (self.square(&r) == *x).then_some(r)
    }

    pub fn is_odd(&self, x: &FieldElement) -> bool {
        x.0.is_odd()
    }

    // F_p² below.

    pub fn fp2(&self, a: FieldElement, b: FieldElement) -> Fp2Element {
        Fp2Element { a, b }
    }

    pub fn fp2_one(&self) -> Fp2Element {
        Fp2Element {
            a: self.one(),
            b: self.zero(),
        }
    }

    pub fn fp2_add(&self, x: &Fp2Element, y: &Fp2Element) -> Fp2Element {
        Fp2Element {
            a: self.add(&x.a, &y.a),
            b: self.add(&x.b, &y.b),
        }
    }

    pub fn fp2_sub(&self, x: &Fp2Element, y: &Fp2Element) -> Fp2Element {
        Fp2Element {
            a: self.sub(&x.a, &y.a),
            b: self.sub(&x.b, &y.b),
        }
    }

    pub fn fp2_neg(&self, x: &Fp2Element) -> Fp2Element {
        Fp2Element {
            a: self.neg(&x.a),
            b: self.neg(&x.b),
        }
    }

    /// (a + bi)(c + di) = (ac - bd) + (ad + bc)i
    pub fn fp2_mul(&self, x: &Fp2Element, y: &Fp2Element) -> Fp2Element {
        let ac = &x.a.0 * &y.a.0;
        let bd = &x.b.0 * &y.b.0;
        let ad_bc = &x.a.0 * &y.b.0 + &x.b.0 * &y.a.0;
        let real = (ac + &self.modulus * &self.modulus - bd) % &self.modulus;
        Fp2Element {
            a: FieldElement(real),
            b: FieldElement(ad_bc % &self.modulus),
        }
    }

    /// (a + bi)² = (a + b)(a - b) + 2ab·i
    pub fn fp2_square(&self, x: &Fp2Element) -> Fp2Element {
        let sum = self.add(&x.a, &x.b);
        let diff = self.sub(&x.a, &x.b);
        let ab = self.mul(&x.a, &x.b);
        Fp2Element {
            a: self.mul(&sum, &diff),
            b: self.add(&ab, &ab),
        }
    }

    /// a - bi, which equals x^p since p = 3 (mod 4).
    pub fn fp2_conjugate(&self, x: &Fp2Element) -> Fp2Element {
        Fp2Element {
            a: x.a.clone(),
            b: self.neg(&x.b),
        }
    }

    pub fn fp2_inv(&self, x: &Fp2Element) -> Option<Fp2Element> {
        let norm = self.add(&self.square(&x.a), &self.square(&x.b));
        let n_inv = self.inv(&norm)?;
        Some(Fp2Element {
            a: self.mul(&x.a, &n_inv),
            b: self.neg(&self.mul(&x.b, &n_inv)),
        })
    }

    pub fn fp2_pow(&self, x: &Fp2Element, e: &BigUint) -> Fp2Element {
        let mut acc = self.fp2_one();
        for i in (0..e.bits()).rev() {
            acc = self.fp2_square(&acc);
            if e.bit(i) {
                acc = self.fp2_mul(&acc, x);
            }
        }
        acc
    }

    pub fn fp2_is_zero(&self, x: &Fp2Element) -> bool {
        x.a.is_zero() && x.b.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f43() -> PrimeField {
        PrimeField::new(BigUint::from(43u32))
    }

    #[test]
    fn inverse_exhaustive() {
        let f = f43();
        assert!(f.inv(&f.zero()).is_none());
        for v in 1..43u64 {
            let x = f.from_u64(v);
            let y = f.inv(&x).unwrap();
            assert_eq!(f.mul(&x, &y), f.one());
        }
    }

    #[test]
    fn sqrt_matches_squares() {
        let f = f43();
        let squares: std::collections::BTreeSet<u64> = (0..43u64).map(|v| v * v % 43).collect();
        for v in 0..43u64 {
            let x = f.from_u64(v);
            assert_eq!(f.is_square(&x), squares.contains(&v));
            match f.sqrt(&x) {
                Some(r) => assert_eq!(f.square(&r), x),
                None => assert!(!squares.contains(&v)),
            }
        }
    }

    #[test]
    fn fp2_mul_against_integer_formula() {
        let f = f43();
        for (a, b, c, d) in [(3u64, 5u64, 7u64, 11u64), (42, 42, 42, 42), (0, 1, 0, 1)] {
            let x = f.fp2(f.from_u64(a), f.from_u64(b));
            let y = f.fp2(f.from_u64(c), f.from_u64(d));
            let z = f.fp2_mul(&x, &y);
            let re = ((a * c) as i64 - (b * d) as i64).rem_euclid(43) as u64;
            let im = (a * d + b * c) % 43;
            assert_eq!(z, f.fp2(f.from_u64(re), f.from_u64(im)));
            assert_eq!(f.fp2_square(&x), f.fp2_mul(&x, &x));
        }
    }

    #[test]
    fn fp2_inverse_and_frobenius() {
        let f = f43();
        let p = BigUint::from(43u32);
        for a in 0..43u64 {
            for b in [0u64, 1, 17, 42] {
                let x = f.fp2(f.from_u64(a), f.from_u64(b));
                assert_eq!(f.fp2_pow(&x, &p), f.fp2_conjugate(&x));
                if let Some(inv) = f.fp2_inv(&x) {
                    assert_eq!(f.fp2_mul(&x, &inv), f.fp2_one());
                } else {
                    assert!(f.fp2_is_zero(&x));
                }
            }
        }
    }
}
