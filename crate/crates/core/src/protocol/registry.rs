use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::ProtocolError;

/// Per-identity registration counter kept by the server.
///
/// First registration records N = 0, every later one N + 1. Persisted as
/// text, one `<identity hex> <N>` pair per line, sorted by identity.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Registry {
    counters: BTreeMap<Vec<u8>, u64>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a registration and returns the new counter value.
    pub fn record(&mut self, id: &[u8]) -> u64 {
        let n = self
            .counters
            .entry(id.to_vec())
            .and_modify(|n| *n += 1)
            .or_insert(0);
        *n
    }

    pub fn get(&self, id: &[u8]) -> Option<u64> {
        self.counters.get(id).copied()
    }

    pub fn len(&self) -> usize {
        self.counters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counters.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (id, n) in &self.counters {
            writeln!(out, "{} {}", hex::encode(id), n).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, ProtocolError> {
        let mut counters = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad =
                |what: &str| ProtocolError::Decode(format!("registry line {}: {what}", lineno + 1));
            let (id, n) = line
                .split_once(' ')
                .ok_or_else(|| bad("expected `<hex> <N>`"))?;
            let id = hex::decode(id).map_err(|_| bad("identity is not hex"))?;
            let n: u64 = n
                .trim()
                .parse()
                .map_err(|_| bad("counter is not a decimal integer"))?;
            if counters.insert(id, n).is_some() {
                return Err(bad("duplicate identity"));
            }
        }
        Ok(Self { counters })
    }
}
