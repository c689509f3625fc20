//! Hashes, the symmetric cipher, key derivation from Gt, and timestamps.
//!
//! Every hash input is a sequence of fields, each preceded by its 4-byte
//! big-endian length (see [`frame`]). Domain-separated hashes put an ASCII
//! label in the first field.

use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::algebra::{CurveParams, GtElement, Scalar};

pub const DIGEST_LEN: usize = 32;

/// A SHA-256 output.
pub type Digest = [u8; DIGEST_LEN];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("ciphertext authentication failed")]
    DecryptFailure,
}

pub fn digest(data: &[u8]) -> Digest {
    Sha256::digest(data).into()
}

/// Length-prefixed concatenation.
pub fn frame(fields: &[&[u8]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(fields.iter().map(|f| f.len() + 4).sum());
    for f in fields {
        let len = u32::try_from(f.len()).expect("field longer than 4 GiB");
        out.extend_from_slice(&len.to_be_bytes());
        out.extend_from_slice(f);
    }
    out
}

/// Inverse of [`frame`]; `None` if the bytes are not a well-formed framing.
pub fn unframe(mut bytes: &[u8]) -> Option<Vec<&[u8]>> {
    let mut fields = Vec::new();
    while !bytes.is_empty() {
        let (len, rest) = bytes.split_first_chunk::<4>()?;
        let len = u32::from_be_bytes(*len) as usize;
        if rest.len() < len {
            return None;
        }
        let (field, rest) = rest.split_at(len);
        fields.push(field);
        bytes = rest;
    }
    Some(fields)
}

/// `h: {0,1}* -> Z_q`: the digest read big-endian, reduced mod q.
pub fn hash_to_scalar(params: &CurveParams, data: &[u8]) -> Scalar {
    params.scalar(&BigUint::from_bytes_be(&digest(data)))
}

/// `H_B`, the biometric hash.
pub fn biometric_hash(biometric: &[u8]) -> Digest {
    digest(&frame(&[b"HB", biometric]))
}

/// Stretches a password to digest width before it is XORed with `H_B(B)`.
pub fn password_digest(password: &[u8]) -> Digest {
    digest(&frame(&[b"PW", password]))
}

/// Bytewise XOR. The shorter operand is left-padded with zeros, and both
/// are padded to at least 32 bytes.
pub fn xor_mask(a: &[u8], b: &[u8]) -> Vec<u8> {
    let len = a.len().max(b.len()).max(DIGEST_LEN);
    let pad = |x: &[u8]| {
        let mut v = vec![0u8; len - x.len()];
        v.extend_from_slice(x);
        v
    };
    pad(a).iter().zip(pad(b)).map(|(x, y)| x ^ y).collect()
}

/// Equality without early exit.
pub fn ct_eq(a: &[u8], b: &[u8]) -> bool {
    a.len() == b.len() && a.iter().zip(b).fold(0u8, |acc, (x, y)| acc | (x ^ y)) == 0
}

/// Key material for the symmetric cipher.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SymmetricKey([u8; DIGEST_LEN]);

impl std::fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SymmetricKey(..)")
    }
}

impl SymmetricKey {
    pub fn as_bytes(&self) -> &[u8; DIGEST_LEN] {
        &self.0
    }
}

/// `digest("KDF" ∥ serialize_gt(K))`.
pub fn kdf_from_gt(k: &GtElement) -> SymmetricKey {
    SymmetricKey(digest(&frame(&[b"KDF", &k.to_bytes()])))
}

/// A keystream-XORed body with a keyed tag over it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ciphertext {
    #[serde(with = "hex")]
    pub body: Vec<u8>,
    #[serde(with = "hex")]
    pub tag: [u8; DIGEST_LEN],
}

fn keystream_block(key: &SymmetricKey, index: u64) -> Digest {
    digest(&frame(&[&key.0, b"ENC", &index.to_be_bytes()]))
}

fn mac(key: &SymmetricKey, body: &[u8]) -> Digest {
    digest(&frame(&[&key.0, b"MAC", body]))
}

fn apply_keystream(key: &SymmetricKey, data: &[u8]) -> Vec<u8> {
    data.chunks(DIGEST_LEN)
        .enumerate()
        .flat_map(|(j, chunk)| {
            let ks = keystream_block(key, j as u64);
            chunk.iter().zip(ks).map(|(b, k)| b ^ k).collect::<Vec<_>>()
        })
        .collect()
}

pub fn sym_encrypt(key: &SymmetricKey, plaintext: &[u8]) -> Ciphertext {
    let body = apply_keystream(key, plaintext);
    let tag = mac(key, &body);
    Ciphertext { body, tag }
}

/// Verifies the tag first; a wrong key surfaces as [`CryptoError::DecryptFailure`].
pub fn sym_decrypt(key: &SymmetricKey, ct: &Ciphertext) -> Result<Vec<u8>, CryptoError> {
    if !ct_eq(&mac(key, &ct.body), &ct.tag) {
        return Err(CryptoError::DecryptFailure);
    }
    Ok(apply_keystream(key, &ct.body))
}

/// Logical milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn to_bytes(self) -> [u8; 8] {
        self.0.to_be_bytes()
    }
}

/// Maximum accepted age of a message, in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreshnessPolicy {
    pub delta_max_millis: u64,
}

impl FreshnessPolicy {
    pub fn new(delta_max_millis: u64) -> Self {
        Self { delta_max_millis }
    }
}

/// Fresh iff `0 <= received_at - sent <= delta_max`.
pub fn check_freshness(sent: Timestamp, received_at: Timestamp, policy: FreshnessPolicy) -> bool {
    received_at
        .0
        .checked_sub(sent.0)
        .is_some_and(|gap| gap <= policy.delta_max_millis)
}

/// `h` applied to framed fields.
pub fn hash_fields_to_scalar(params: &Arc<CurveParams>, fields: &[&[u8]]) -> Scalar {
    hash_to_scalar(params, &frame(fields))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::pairing;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn frame_layout() {
        assert_eq!(
            frame(&[b"ab", b""]),
            vec![0, 0, 0, 2, b'a', b'b', 0, 0, 0, 0]
        );
        assert_eq!(
            unframe(&frame(&[b"ab", b"", b"xyz"])).unwrap(),
            vec![&b"ab"[..], b"", b"xyz"]
        );
        assert!(unframe(&[0, 0, 0, 5, 1]).is_none());
        assert!(unframe(&[0, 0]).is_none());
    }

    #[test]
    fn hash_to_scalar_empty_on_test_params() {
        // SHA-256("") = e3b0c442...b855; that integer mod 11 is 9.
        let t = CurveParams::test();
        assert_eq!(hash_to_scalar(&t, b""), t.scalar_from_u64(9));
    }

    #[test]
    fn hash_to_scalar_distribution() {
        let t = CurveParams::test();
        let mut counts = [0u32; 11];
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            let data: [u8; 16] = rng.gen();
            let s = hash_to_scalar(&t, &data);
            assert!(s.value() < t.q());
            counts[s.value().to_u64_digits().first().copied().unwrap_or(0) as usize] += 1;
        }
        let expected = 10_000 / 11;
        assert!(counts.iter().all(|&c| c <= 5 * expected), "{counts:?}");
    }

    #[test]
    fn biometric_hash_is_domain_separated() {
        assert_eq!(biometric_hash(b"finger"), biometric_hash(b"finger"));
        assert_ne!(biometric_hash(b"finger"), digest(b"finger"));
    }

    #[test]
    fn biometric_hash_avalanche() {
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(99);
        let mut flipped = 0u32;
        for _ in 0..100 {
            let mut b = [0u8; 64];
            rng.fill(&mut b[..]);
            let h0 = biometric_hash(&b);
            let bit = rng.gen_range(0..512);
            b[bit / 8] ^= 1 << (bit % 8);
            let h1 = biometric_hash(&b);
            flipped += h0
                .iter()
                .zip(h1)
                .map(|(x, y)| (x ^ y).count_ones())
                .sum::<u32>();
        }
        let frac = flipped as f64 / (100.0 * 256.0);
        assert!((0.45..=0.55).contains(&frac), "{frac}");
    }

    #[test]
    fn xor_mask_cases() {
        let x = digest(b"x");
        let y = digest(b"y");
        assert!(xor_mask(&x, &x).iter().all(|&b| b == 0));
        assert_eq!(xor_mask(&xor_mask(&x, &y), &y), x.to_vec());
        let r = xor_mask(&[0x0f; 32], &[0x33; 32]);
        assert!(r.iter().all(|&b| b == 0x3c));
        let short = xor_mask(&[0x0f], &[0x33]);
        assert_eq!(short.len(), 32);
        assert_eq!(short[31], 0x3c);
        assert!(short[..31].iter().all(|&b| b == 0));
    }

    #[test]
    fn kdf_distinct_over_test_subgroup() {
        let t = CurveParams::test();
        let g = pairing(&t.generator(), &t.generator()).unwrap();
        let keys: std::collections::HashSet<_> = (0..11u64)
            .map(|k| kdf_from_gt(&g.pow_uint(&BigUint::from(k))))
            .collect();
        assert_eq!(keys.len(), 11);
        assert_eq!(
            kdf_from_gt(&g),
            kdf_from_gt(&g.pow_uint(&BigUint::from(12u32)))
        );
    }

    #[test]
    fn decrypt_rejects_wrong_key_and_tampering() {
        let t = CurveParams::test();
        let g = pairing(&t.generator(), &t.generator()).unwrap();
        let k = kdf_from_gt(&g);
        let k2 = kdf_from_gt(&g.mul(&g));
        let ct = sym_encrypt(&k, b"attack at dawn");
        assert_eq!(sym_decrypt(&k, &ct).unwrap(), b"attack at dawn");
        assert_eq!(sym_decrypt(&k2, &ct), Err(CryptoError::DecryptFailure));
        let mut bad = ct.clone();
        bad.body[0] ^= 1;
        assert_eq!(sym_decrypt(&k, &bad), Err(CryptoError::DecryptFailure));
    }

    #[test]
    fn freshness_boundaries() {
        let p = FreshnessPolicy::new(100);
        assert!(check_freshness(Timestamp(5), Timestamp(5), p));
        assert!(check_freshness(Timestamp(5), Timestamp(105), p));
        assert!(!check_freshness(Timestamp(5), Timestamp(106), p));
        assert!(!check_freshness(Timestamp(6), Timestamp(5), p));
    }

    proptest! {
        #[test]
        fn sym_roundtrip(len in 0usize..=1024, seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            let mut pt = vec![0u8; len];
            rng.fill(&mut pt[..]);
            let key = SymmetricKey(rng.gen());
            let ct = sym_encrypt(&key, &pt);
            prop_assert_eq!(ct.body.len(), len);
            prop_assert_eq!(ct.tag.len(), 32);
            prop_assert_eq!(sym_decrypt(&key, &ct).unwrap(), pt);
        }

        #[test]
        fn freshness_monotone(gap in 0u64..10_000, delta in 0u64..10_000, shorter in 0u64..10_000) {
            let p = FreshnessPolicy::new(delta);
            let base = 1_000_000u64;
            if check_freshness(Timestamp(base), Timestamp(base + gap), p) {
                let g2 = shorter.min(gap);
                prop_assert!(check_freshness(Timestamp(base), Timestamp(base + g2), p));
            }
        }

        #[test]
        fn frame_roundtrip(fields in proptest::collection::vec(proptest::collection::vec(any::<u8>(), 0..40), 0..6)) {
            let refs: Vec<&[u8]> = fields.iter().map(|f| f.as_slice()).collect();
            let framed = frame(&refs);
            prop_assert_eq!(unframe(&framed).unwrap(), refs);
        }
    }
}
