use std::sync::{Arc, OnceLock};

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use rand_core::RngCore;
use serde::{Deserialize, Serialize};

use super::field::{FieldElement, PrimeField};
use super::{AlgebraError, G1Point};

const TEST_CONFIG: &str = include_str!("../../params/test.toml");
const DESK_CONFIG: &str = include_str!("../../params/desk.toml");

/// Public parameters for E: y² = x³ + x over F_p with an order-q subgroup.
#[derive(Debug, PartialEq, Eq)]
pub struct CurveParams {
    label: String,
    field: PrimeField,
    q: BigUint,
    cofactor: BigUint,
    gx: FieldElement,
    gy: FieldElement,
    fp_width: usize,
    scalar_width: usize,
}

/// Text form of a parameter set: decimal strings, so 256-bit values survive TOML.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ParamsConfig {
    pub label: String,
    pub p: String,
    pub q: String,
    pub gx: String,
    pub gy: String,
}

fn parse_decimal(field: &str, s: &str) -> Result<BigUint, AlgebraError> {
    BigUint::parse_bytes(s.trim().as_bytes(), 10)
        .ok_or_else(|| AlgebraError::InvalidParams(format!("{field} is not a decimal integer")))
}

impl CurveParams {
    /// The p = 43, q = 11 set on which every property can be checked exhaustively.
    pub fn test() -> Arc<CurveParams> {
        static TEST: OnceLock<Arc<CurveParams>> = OnceLock::new();
        TEST.get_or_init(|| Arc::new(Self::from_toml(TEST_CONFIG).expect("pinned test params")))
            .clone()
    }

    /// The pinned 256-bit field / 160-bit subgroup set.
    pub fn desk() -> Arc<CurveParams> {
        static DESK: OnceLock<Arc<CurveParams>> = OnceLock::new();
        DESK.get_or_init(|| Arc::new(Self::from_toml(DESK_CONFIG).expect("pinned desk params")))
            .clone()
    }

    /// Looks up one of the pinned sets by label.
    pub fn by_label(label: &str) -> Option<Arc<CurveParams>> {
        match label {
            "test" => Some(Self::test()),
            "desk" => Some(Self::desk()),
            _ => None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, AlgebraError> {
        let cfg: ParamsConfig =
            toml::from_str(text).map_err(|e| AlgebraError::InvalidParams(e.to_string()))?;
        Self::from_config(&cfg)
    }

    pub fn from_config(cfg: &ParamsConfig) -> Result<Self, AlgebraError> {
        let p = parse_decimal("p", &cfg.p)?;
        let q = parse_decimal("q", &cfg.q)?;
        let gx = parse_decimal("gx", &cfg.gx)?;
        let gy = parse_decimal("gy", &cfg.gy)?;
        Self::new(&cfg.label, p, q, gx, gy)
    }

    /// Validates every structural invariant before accepting the set.
    pub fn new(
        label: &str,
        p: BigUint,
        q: BigUint,
        gx: BigUint,
        gy: BigUint,
    ) -> Result<Self, AlgebraError> {
        let bad = |m: &str| Err(AlgebraError::InvalidParams(m.to_owned()));
        if label.is_empty() {
            return bad("empty label");
        }
        if (&p % 4u32) != BigUint::from(3u32) {
            return bad("p must be 3 mod 4");
        }
        if !is_probable_prime(&p) {
            return bad("p is not prime");
        }
        if !is_probable_prime(&q) || q < BigUint::from(3u32) {
            return bad("q is not an odd prime");
        }
        let (cofactor, rem) = (&p + 1u32).div_rem(&q);
        if !rem.is_zero() {
            return bad("q does not divide p + 1");
        }
        if (&cofactor % &q).is_zero() {
            return bad("q^2 divides p + 1");
        }
        if gx >= p || gy >= p {
            return bad("generator coordinates not reduced mod p");
        }
        let field = PrimeField::new(p.clone());
        let byte_len = |n: &BigUint| (n.bits() as usize).div_ceil(8);
        let params = Self {
            label: label.to_owned(),
            fp_width: byte_len(&p),
            scalar_width: byte_len(&q),
            field,
            q,
            cofactor,
            gx: FieldElement(gx),
            gy: FieldElement(gy),
        };
        params.check_generator()?;
        Ok(params)
    }

    fn check_generator(&self) -> Result<(), AlgebraError> {
        // Temporary Arc so the point machinery can run during validation.
        let tmp = Arc::new(Self {
            label: self.label.clone(),
            field: self.field.clone(),
            q: self.q.clone(),
            cofactor: self.cofactor.clone(),
            gx: self.gx.clone(),
            gy: self.gy.clone(),
            fp_width: self.fp_width,
            scalar_width: self.scalar_width,
        });
        let g = G1Point::from_affine(&tmp, self.gx.clone(), self.gy.clone())
            .map_err(|_| AlgebraError::InvalidParams("generator is off the curve".into()))?;
        if !g.mul_uint(&self.q).is_infinity() {
            return Err(AlgebraError::InvalidParams(
                "generator does not have order q".into(),
            ));
        }
        Ok(())
    }

    pub fn to_config(&self) -> ParamsConfig {
        ParamsConfig {
            label: self.label.clone(),
            p: self.field.modulus().to_str_radix(10),
            q: self.q.to_str_radix(10),
            gx: self.gx.value().to_str_radix(10),
            gy: self.gy.value().to_str_radix(10),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn field(&self) -> &PrimeField {
        &self.field
    }

    pub fn p(&self) -> &BigUint {
        self.field.modulus()
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn cofactor(&self) -> &BigUint {
        &self.cofactor
    }

    /// Bytes per serialized coordinate.
    pub fn fp_width(&self) -> usize {
        self.fp_width
    }

    /// Bytes per serialized scalar.
    pub fn scalar_width(&self) -> usize {
        self.scalar_width
    }

    pub fn generator(self: &Arc<Self>) -> G1Point {
        G1Point::from_affine(self, self.gx.clone(), self.gy.clone())
            .expect("generator validated at construction")
    }

    /// Reduces any integer into Z_q.
    pub fn scalar(&self, v: &BigUint) -> Scalar {
        Scalar(v % &self.q)
    }

    pub fn scalar_from_u64(&self, v: u64) -> Scalar {
        self.scalar(&BigUint::from(v))
    }

    /// Fixed-width big-endian decode; rejects values >= q.
    pub fn scalar_from_bytes(&self, bytes: &[u8]) -> Result<Scalar, AlgebraError> {
        let v = BigUint::from_bytes_be(bytes);
        if v >= self.q {
            return Err(AlgebraError::Decode("scalar not reduced mod q".into()));
        }
        Ok(Scalar(v))
    }

    pub fn scalar_add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.scalar(&(&a.0 + &b.0))
    }

    pub fn scalar_mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.scalar(&(&a.0 * &b.0))
    }

    /// Uniform in [1, q) by rejection sampling.
    pub fn random_nonzero_scalar<R: RngCore + ?Sized>(&self, rng: &mut R) -> Scalar {
        let bits = self.q.bits();
        let mut buf = vec![0u8; self.scalar_width];
        let excess = (self.scalar_width as u64) * 8 - bits;
        loop {
            rng.fill_bytes(&mut buf);
            buf[0] &= 0xff >> excess;
            let v = BigUint::from_bytes_be(&buf);
            if !v.is_zero() && v < self.q {
                return Scalar(v);
            }
        }
    }
}

/// An element of Z_q in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Scalar(BigUint);

impl Scalar {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Big-endian, left-padded to `width` bytes.
    pub fn to_bytes(&self, width: usize) -> Vec<u8> {
        left_pad(&self.0.to_bytes_be(), width)
    }
}

pub(crate) fn left_pad(bytes: &[u8], width: usize) -> Vec<u8> {
    let bytes = if bytes == [0] { &[][..] } else { bytes };
    assert!(bytes.len() <= width, "value wider than {width} bytes");
    let mut out = vec![0u8; width - bytes.len()];
    out.extend_from_slice(bytes);
    out
}

const SMALL_PRIMES: [u32; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Miller-Rabin with the first 24 primes as bases.
pub fn is_probable_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &sp in &SMALL_PRIMES {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for &a in &SMALL_PRIMES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
