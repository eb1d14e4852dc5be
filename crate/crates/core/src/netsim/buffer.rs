use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// A heralded Bell pair waiting in a buffer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub id: u64,
    pub link: usize,
    pub created: f64,
    pub expires: Option<f64>,
}

impl PairRecord {
    pub fn is_expired(&self, now: f64) -> bool {
        self.expires.is_some_and(|t| t <= now)
    }
}

/// FIFO of pairs shared by every link between one unordered ELU pair.
#[derive(Clone, Debug, PartialEq)]
pub struct PairBuffer {
    pub owner: (usize, usize),
    pub capacity: usize,
    queue: VecDeque<PairRecord>,
}

impl PairBuffer {
    pub fn new(owner: (usize, usize), capacity: usize) -> Self {
        Self {
            owner: (owner.0.min(owner.1), owner.0.max(owner.1)),
            capacity,
            queue: VecDeque::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.queue.len() >= self.capacity
    }

    /// Appends at the tail. A full buffer hands the pair back (tail drop).
    pub fn push(&mut self, pair: PairRecord) -> Result<(), PairRecord> {
        if self.is_full() {
            return Err(pair);
        }
        debug_assert!(self.queue.back().is_none_or(|b| b.created <= pair.created));
        self.queue.push_back(pair);
        Ok(())
    }

    /// Removes a specific pair, e.g. when its expiry event fires.
    pub fn remove(&mut self, id: u64) -> Option<PairRecord> {
        let at = self.queue.iter().position(|p| p.id == id)?;
        self.queue.remove(at)
    }

    /// Empties the buffer, returning what was held.
    pub fn clear(&mut self) -> Vec<PairRecord> {
        self.queue.drain(..).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &PairRecord> {
        self.queue.iter()
    }
}

/// Outcome of [`buffer_take`].
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Take {
    pub pair: Option<PairRecord>,
    /// Heads discarded because they had expired by `now`.
    pub expired: Vec<PairRecord>,
}

/// Pops the oldest pair still alive at `now`, discarding expired heads first.
pub fn buffer_take(buffer: &mut PairBuffer, now: f64) -> Take {
    let mut out = Take::default();
    while let Some(head) = buffer.queue.pop_front() {
        if head.is_expired(now) {
            out.expired.push(head);
        } else {
            out.pair = Some(head);
            break;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(id: u64, created: f64, expires: Option<f64>) -> PairRecord {
        PairRecord {
            id,
            link: 0,
            created,
            expires,
        }
    }

    #[test]
    fn fifo_order() {
        let mut b = PairBuffer::new((1, 0), 4);
        assert_eq!(b.owner, (0, 1));
        b.push(pair(1, 0.1, None)).unwrap();
        b.push(pair(2, 0.2, None)).unwrap();
        assert_eq!(buffer_take(&mut b, 1.0).pair.unwrap().id, 1);
    }

    #[test]
    fn expired_head_skipped() {
        let mut b = PairBuffer::new((0, 1), 4);
        b.push(pair(1, 0.1, Some(0.5))).unwrap();
        b.push(pair(2, 0.2, Some(0.9))).unwrap();
        let t = buffer_take(&mut b, 0.5);
        assert_eq!(t.pair.unwrap().id, 2);
        assert_eq!(t.expired.len(), 1);
        assert_eq!(t.expired[0].id, 1);
    }

    #[test]
    fn empty_take() {
        let mut b = PairBuffer::new((0, 1), 1);
        assert_eq!(buffer_take(&mut b, 0.0), Take::default());
    }

    #[test]
    fn tail_drop() {
        let mut b = PairBuffer::new((0, 1), 1);
        b.push(pair(1, 0.0, None)).unwrap();
        assert_eq!(b.push(pair(2, 0.1, None)).unwrap_err().id, 2);
        assert_eq!(b.len(), 1);
        assert_eq!(b.remove(1).unwrap().id, 1);
        assert!(b.remove(1).is_none());
    }
}
