use crate::primitives::Timestamp;
use crate::protocol::Clock;

/// Deterministic time: every read advances by a fixed step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogicalClock {
    now_millis: u64,
    step_millis: u64,
}

impl LogicalClock {
    /// `step_millis` must be non-zero so reads are strictly increasing.
    pub fn new(start_millis: u64, step_millis: u64) -> Self {
        assert!(step_millis > 0, "clock step must be positive");
        Self {
            now_millis: start_millis,
            step_millis,
        }
    }

    /// The value the next read will return, without advancing.
    pub fn peek_next(&self) -> Timestamp {
        Timestamp(self.now_millis + self.step_millis)
    }
}

impl Clock for LogicalClock {
    fn now(&mut self) -> Timestamp {
        self.now_millis += self.step_millis;
        Timestamp(self.now_millis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strictly_monotone() {
        let mut c = LogicalClock::new(100, 7);
        assert_eq!(c.peek_next(), Timestamp(107));
        let reads: Vec<_> = (0..5).map(|_| c.now()).collect();
        assert!(reads.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(reads[0], Timestamp(107));
    }

    #[test]
    #[should_panic]
    fn zero_step_rejected() {
        LogicalClock::new(0, 0);
    }
}
