use std::collections::VecDeque;

use super::DriftVariant;

/// One reception on a link: the sender's raw reading carried by the message
/// and the receiver's raw reading at delivery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub sender: f64,
    pub receiver: f64,
}

/// Reception history of one directed link, held by the receiver.
///
/// Reception indices start at 0 with the first heard message. Only the
/// samples the drift variant can still ask for are kept.
#[derive(Debug, Clone, Default)]
pub struct LinkHistory {
    initial: Option<Sample>,
    anchor: Option<(u64, Sample)>,
    window: VecDeque<Sample>,
    window_start: u64,
    count: u64,
}

impl LinkHistory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of receptions recorded so far; also the index of the next one.
    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn initial(&self) -> Option<Sample> {
        self.initial
    }

    /// The sample at reception index `m`, if still stored.
    pub fn sample(&self, m: u64) -> Option<Sample> {
        if m == 0 {
            return self.initial;
        }
        if let Some((idx, s)) = self.anchor {
            if idx == m {
                return Some(s);
            }
        }
        if m >= self.window_start {
            return self.window.get((m - self.window_start) as usize).copied();
        }
        None
    }

    /// Appends the sample for reception `count()` and drops everything the
    /// variant can no longer reference.
    pub fn record(&mut self, sample: Sample, variant: &DriftVariant) {
        let l = self.count;
        if l == 0 {
            self.initial = Some(sample);
        }
        if let DriftVariant::Anchored { anchor } = *variant {
            if anchor > 0 && l == anchor {
                self.anchor = Some((l, sample));
            }
        }
        if self.window.is_empty() {
            self.window_start = l;
        }
        self.window.push_back(sample);
        self.count = l + 1;

        let next = self.count;
        let keep_from = match *variant {
            DriftVariant::FixedLag { lag } => next.saturating_sub(lag),
            DriftVariant::Proportional { fraction } => (fraction * next as f64).floor() as u64,
            // Only the latest reception, for inspection.
            DriftVariant::Anchored { .. } => l,
        };
        while self.window_start < keep_from && !self.window.is_empty() {
            self.window.pop_front();
            self.window_start += 1;
        }
    }

    /// Number of distinct reception pairs currently held.
    pub fn stored(&self) -> usize {
        let end = self.window_start + self.window.len() as u64;
        let in_window = |idx: u64| idx >= self.window_start && idx < end;
        let mut total = self.window.len();
        if self.initial.is_some() && !in_window(0) {
            total += 1;
        }
        if let Some((idx, _)) = self.anchor {
            if !in_window(idx) {
                total += 1;
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(x: f64) -> Sample {
        Sample { sender: x, receiver: -x }
    }

    #[test]
    fn initial_is_kept_forever() {
        let mut h = LinkHistory::new();
        let v = DriftVariant::FixedLag { lag: 2 };
        for l in 0..10 {
            h.record(s(l as f64), &v);
        }
        assert_eq!(h.initial(), Some(s(0.0)));
        assert_eq!(h.sample(0), Some(s(0.0)));
        assert_eq!(h.sample(8), Some(s(8.0)));
        assert_eq!(h.sample(7), None);
        assert_eq!(h.count(), 10);
    }

    #[test]
    fn anchored_keeps_initial_anchor_and_latest() {
        let mut h = LinkHistory::new();
        let v = DriftVariant::Anchored { anchor: 0 };
        for l in 0..50 {
            h.record(s(l as f64), &v);
            assert!(h.stored() <= 2);
        }
        assert_eq!(h.stored(), 2);
        assert_eq!(h.sample(0), Some(s(0.0)));

        let mut h = LinkHistory::new();
        let v = DriftVariant::Anchored { anchor: 3 };
        for l in 0..50 {
            h.record(s(l as f64), &v);
        }
        assert_eq!(h.sample(3), Some(s(3.0)));
        assert_eq!(h.stored(), 3);
    }

    #[test]
    fn proportional_keeps_every_future_reference() {
        let v = DriftVariant::Proportional { fraction: 0.5 };
        let mut h = LinkHistory::new();
        for l in 0..200u64 {
            if l >= 1 {
                let m = v.past_index(l, false).unwrap();
                assert_eq!(h.sample(m), Some(s(m as f64)), "l={l} m={m}");
            }
            h.record(s(l as f64), &v);
        }
    }

    proptest! {
        #[test]
        fn fixed_lag_memory_contract(lag in 1u64..30, len in 1u64..300) {
            let v = DriftVariant::FixedLag { lag };
            let mut h = LinkHistory::new();
            for l in 0..len {
                if let Some(m) = v.past_index(l, false) {
                    if l >= 1 {
                        prop_assert_eq!(h.sample(m), Some(s(m as f64)));
                    }
                }
                h.record(s(l as f64), &v);
                prop_assert!(h.stored() as u64 <= lag + 1);
            }
        }
    }
}
