use std::sync::Arc;

use serde::Serialize;

use crate::algebra::CurveParams;
use crate::attacks::Transcript;
use crate::primitives::Timestamp;
use crate::protocol::{ProtocolError, LOGIN_REQUEST_TAG, SERVER_RESPONSE_TAG};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    PatientToServer,
    ServerToPatient,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChannelRecord {
    pub direction: Direction,
    pub at: Timestamp,
    pub bytes: Vec<u8>,
}

/// Public channel with a passive recorder on it.
#[derive(Clone, Debug, Default)]
pub struct EavesdropChannel {
    recorded: Vec<ChannelRecord>,
}

impl EavesdropChannel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `bytes` verbatim and hands back what the receiver gets.
    pub fn send(&mut self, direction: Direction, at: Timestamp, bytes: Vec<u8>) -> &[u8] {
        self.recorded.push(ChannelRecord {
            direction,
            at,
            bytes,
        });
        &self.recorded.last().unwrap().bytes
    }

    pub fn recorded(&self) -> &[ChannelRecord] {
        &self.recorded
    }

    /// The eavesdropper's view: first login request and first server
    /// response, decoded from the recorded bytes only.
    pub fn transcript(&self, params: &Arc<CurveParams>) -> Result<Transcript, ProtocolError> {
        let find = |dir: Direction, tag: u8| {
            self.recorded
                .iter()
                .find(|r| r.direction == dir && r.bytes.first() == Some(&tag))
                .map(|r| r.bytes.as_slice())
                .ok_or_else(|| ProtocolError::Decode("handshake message not observed".into()))
        };
        let req = find(Direction::PatientToServer, LOGIN_REQUEST_TAG)?;
        let resp = find(Direction::ServerToPatient, SERVER_RESPONSE_TAG)?;
        Transcript::from_wire(params, req, resp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_verbatim_and_requires_both_messages() {
        let mut ch = EavesdropChannel::new();
        let got = ch
            .send(Direction::PatientToServer, Timestamp(1), vec![1, 2, 3])
            .to_vec();
        assert_eq!(got, vec![1, 2, 3]);
        assert_eq!(ch.recorded().len(), 1);
        assert_eq!(ch.recorded()[0].at, Timestamp(1));
        assert!(ch.transcript(&CurveParams::test()).is_err());
    }
}
