//! Independent reference pairing on the p = 43 curve, in plain `i64`
//! arithmetic: textbook Miller loop with verticals kept and the full
//! (p² - 1)/q exponent.

use num_bigint::BigUint;
use tmis_core::algebra::{G1Point, GtElement};

const P: i64 = 43;
const Q: u32 = 11;

pub type F2 = (i64, i64);

fn m(x: i64) -> i64 {
    x.rem_euclid(P)
}

fn inv(x: i64) -> i64 {
    (1..P).find(|y| m(x * y) == 1).expect("invertible")
}

pub fn f2_mul(x: F2, y: F2) -> F2 {
    (m(x.0 * y.0 - x.1 * y.1), m(x.0 * y.1 + x.1 * y.0))
}

fn f2_inv(x: F2) -> F2 {
    let n = inv(m(x.0 * x.0 + x.1 * x.1));
    (m(x.0 * n), m(-x.1 * n))
}

fn f2_pow(x: F2, mut e: u64) -> F2 {
    let (mut acc, mut base) = ((1, 0), x);
    while e > 0 {
        if e & 1 == 1 {
            acc = f2_mul(acc, base);
        }
        base = f2_mul(base, base);
        e >>= 1;
    }
    acc
}

pub type Pt = Option<(i64, i64)>;

fn add(a: Pt, b: Pt) -> Pt {
    let ((x1, y1), (x2, y2)) = match (a, b) {
        (None, _) => return b,
        (_, None) => return a,
        (Some(a), Some(b)) => (a, b),
    };
    if x1 == x2 && m(y1 + y2) == 0 {
        return None;
    }
    let l = if (x1, y1) == (x2, y2) {
        m((3 * x1 * x1 + 1) * inv(2 * y1))
    } else {
        m((y2 - y1) * inv(x2 - x1))
    };
    let x3 = m(l * l - x1 - x2);
    Some((x3, m(l * (x1 - x3) - y1)))
}

/// Line through `a` and `b` (tangent if equal, vertical if opposite)
/// evaluated at the F_p² point (X, Y).
fn line(a: (i64, i64), b: (i64, i64), at: (F2, F2)) -> F2 {
    let (x1, y1) = a;
    let (x2, y2) = b;
    let (xx, yy) = at;
    if x1 == x2 && m(y1 + y2) == 0 {
        return (m(xx.0 - x1), xx.1);
    }
    let l = if a == b {
        m((3 * x1 * x1 + 1) * inv(2 * y1))
    } else {
        m((y2 - y1) * inv(x2 - x1))
    };
    // Y - y1 - l(X - x1)
    (m(yy.0 - y1 - l * (xx.0 - x1)), m(yy.1 - l * xx.1))
}

fn vertical(v: Pt, at: (F2, F2)) -> F2 {
    match v {
        None => (1, 0),
        Some((x, _)) => (m(at.0 .0 - x), at.0 .1),
    }
}

/// Textbook Miller loop with vertical denominators kept, followed by the
/// full (p² - 1)/q exponent.
pub fn reference_pairing(a: Pt, b: Pt) -> F2 {
    let (Some(pa), Some((bx, by))) = (a, b) else {
        return (1, 0);
    };
    let at: (F2, F2) = ((m(-bx), 0), (0, by));
    let mut f: F2 = (1, 0);
    let mut v = pa;
    for i in (0..Q.ilog2()).rev() {
        let l = line(v, v, at);
        let doubled = add(Some(v), Some(v));
        f = f2_mul(f2_mul(f, f), f2_mul(l, f2_inv(vertical(doubled, at))));
        v = doubled.expect("no 2-torsion in the subgroup");
        if (Q >> i) & 1 == 1 {
            let l = line(v, pa, at);
            let sum = add(Some(v), Some(pa));
            f = f2_mul(f, f2_mul(l, f2_inv(vertical(sum, at))));
            match sum {
                Some(s) => v = s,
                None => break,
            }
        }
    }
    f2_pow(f, ((P * P - 1) / Q as i64) as u64)
}

pub fn to_pt(p: &G1Point) -> Pt {
    p.x().map(|x| {
        let d = |v: &BigUint| v.to_u64_digits().first().copied().unwrap_or(0) as i64;
        (d(x.value()), d(p.y().unwrap().value()))
    })
}

pub fn to_f2(g: &GtElement) -> F2 {
    let d = |v: &BigUint| v.to_u64_digits().first().copied().unwrap_or(0) as i64;
    (d(g.value().a.value()), d(g.value().b.value()))
}
