use alloc::collections::BTreeMap;

use super::genome::{Marker, OUTPUT};

/// A structural innovation that receives a historical marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Innovation {
    /// A connection from `source` to `target`.
    Connection(Marker, Marker),
    /// The hidden node created by splitting the connection with this marker.
    Split(Marker),
}

/// Issues global historical markers in chronological order.
///
/// Identical innovations receive identical markers for the whole lifetime of
/// the registry, so genomes that independently grow the same structure stay
/// aligned. The registry is single-writer: it is only touched during the
/// sequential reproduction phase.
#[derive(Debug, Clone)]
pub struct InnovationRegistry {
    next: u64,
    index: BTreeMap<Innovation, Marker>,
}

impl Default for InnovationRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl InnovationRegistry {
    pub fn new() -> Self {
        InnovationRegistry { next: OUTPUT.0 + 1, index: BTreeMap::new() }
    }

    /// Marker for `innovation`, issuing a fresh one on first request.
    pub fn marker(&mut self, innovation: Innovation) -> Marker {
        if let Some(&m) = self.index.get(&innovation) {
            return m;
        }
        let m = Marker(self.next);
        self.next += 1;
        self.index.insert(innovation, m);
        m
    }

    pub fn connection(&mut self, source: Marker, target: Marker) -> Marker {
        self.marker(Innovation::Connection(source, target))
    }

    pub fn split(&mut self, connection: Marker) -> Marker {
        self.marker(Innovation::Split(connection))
    }

    /// Marker that will be issued next.
    pub fn next_marker(&self) -> Marker {
        Marker(self.next)
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Makes sure future markers do not collide with markers already present
    /// in externally loaded genomes.
    pub fn reserve_through(&mut self, marker: Marker) {
        self.next = self.next.max(marker.0 + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cppn::{INPUT_X, INPUT_Y};

    #[test]
    fn same_innovation_same_marker() {
        let mut r = InnovationRegistry::new();
        let a = r.connection(INPUT_X, OUTPUT);
        let b = r.connection(INPUT_Y, OUTPUT);
        assert_eq!(r.connection(INPUT_X, OUTPUT), a);
        assert!(b > a);
        let s = r.split(a);
        assert!(s > b);
        assert_eq!(r.split(a), s);
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn markers_increase_chronologically() {
        let mut r = InnovationRegistry::new();
        let ms: alloc::vec::Vec<_> = (0..10).map(|i| r.split(Marker(100 + i))).collect();
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        assert!(ms[0] > OUTPUT);
    }
}
