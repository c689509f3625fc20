//! A pairing-based telecare authentication and key-agreement protocol,
//! built from scratch on a supersingular curve, together with executable
//! session-key recovery attacks against it.
//!
//! * [`algebra`]: F_p, F_p², the curve group, the symmetric pairing, map-to-point.
//! * [`primitives`]: hashes, the symmetric cipher, KDF, timestamps.
//! * [`protocol`]: registration, smart card, and the three-message handshake.
//! * [`attacks`]: the leaked-ephemeral and leaked-master-key adversaries.
//! * [`harness`]: deterministic scenario runner and reports.

pub mod algebra;
pub mod attacks;
pub mod harness;
pub mod primitives;
pub mod protocol;
