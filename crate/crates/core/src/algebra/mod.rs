//! Field, curve and pairing arithmetic for the supersingular curve
//! E: y² = x³ + x over F_p with p = 3 (mod 4).

mod curve;
pub mod field;
mod hash_to_curve;
mod pairing;
mod params;

use thiserror::Error;

pub use curve::G1Point;
pub use field::{FieldElement, Fp2Element, PrimeField};
pub use hash_to_curve::{map_to_point, MAP_ATTEMPTS};
pub use pairing::{distortion_map, miller_value, pairing, Fp2Point, GtElement};
pub use params::{is_probable_prime, CurveParams, ParamsConfig, Scalar};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("invalid curve parameters: {0}")]
    InvalidParams(String),
    #[error("elements belong to different parameter sets")]
    ParamsMismatch,
    #[error("point is not on the curve")]
    NotOnCurve,
    #[error("decode error: {0}")]
    Decode(String),
    #[error("map-to-point exhausted all counters")]
    MapFailure,
    #[error("the point at infinity has no distortion image")]
    InfinityInput,
}
