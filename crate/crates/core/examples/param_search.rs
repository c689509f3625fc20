//! Regenerates the `desk` parameter set and prints it as TOML.
//!
//! q is the smallest prime >= 2^159, the cofactor the smallest h >= 2^96
//! with h = 0 mod 4 and p = h·q - 1 prime, and the generator is h·(x, y)
//! for the smallest x >= 1 where x³ + x is a square and the multiple is not
//! the identity, with y the smaller square root.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use tmis_core::algebra::{is_probable_prime, CurveParams};

type Affine = Option<(BigUint, BigUint)>;

fn sub(a: &BigUint, b: &BigUint, p: &BigUint) -> BigUint {
    (a + p - b) % p
}

fn inv(a: &BigUint, p: &BigUint) -> BigUint {
    a.modpow(&(p - 2u32), p)
}

fn add(a: &Affine, b: &Affine, p: &BigUint) -> Affine {
    let (Some((x1, y1)), Some((x2, y2))) = (a, b) else {
        return a.clone().or_else(|| b.clone());
    };
    let lambda = if x1 == x2 {
        if y1 != y2 || y1.is_zero() {
            return None;
        }
        (BigUint::from(3u32) * x1 * x1 + 1u32) * inv(&(y1 * 2u32), p) % p
    } else {
        sub(y2, y1, p) * inv(&sub(x2, x1, p), p) % p
    };
    let x3 = sub(&sub(&(&lambda * &lambda % p), x1, p), x2, p);
    let y3 = sub(&(&lambda * sub(x1, &x3, p) % p), y1, p);
    Some((x3, y3))
}

fn mul(pt: &Affine, k: &BigUint, p: &BigUint) -> Affine {
    let mut acc = None;
    for i in (0..k.bits()).rev() {
        acc = add(&acc, &acc, p);
        if k.bit(i) {
            acc = add(&acc, pt, p);
        }
    }
    acc
}

fn main() {
    let mut q = BigUint::one() << 159;
    while !is_probable_prime(&q) {
        q += 1u32;
    }
    let mut h = BigUint::one() << 96;
    let p = loop {
        let p = &h * &q - 1u32;
        if is_probable_prime(&p) {
            break p;
        }
        h += 4u32;
    };
    assert_eq!(&p % 4u32, BigUint::from(3u32));

    let sqrt_exp = (&p + 1u32) >> 2;
    let (gx, gy) = (1u32..)
        .find_map(|x| {
            let x = BigUint::from(x);
            let rhs = (&x * &x * &x + &x) % &p;
            let y = rhs.modpow(&sqrt_exp, &p);
            if rhs.is_zero() || &y * &y % &p != rhs {
                return None;
            }
            let y = y.clone().min(&p - &y);
            mul(&Some((x, y)), &h, &p)
        })
        .unwrap();

    let params = CurveParams::new("desk", p.clone(), q.clone(), gx.clone(), gy.clone())
        .expect("valid parameter set");
    assert_eq!(
        &params,
        &*CurveParams::desk(),
        "search disagrees with the bundled desk.toml"
    );

    println!("label = \"desk\"");
    println!("p = \"{p}\"");
    println!("q = \"{q}\"");
    println!("gx = \"{gx}\"");
    println!("gy = \"{gy}\"");
    eprintln!("cofactor = {h}");
}
