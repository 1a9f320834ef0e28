//! Sparse markings over the places of a net.

use std::fmt;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};

/// Index of a place inside its owning net.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Place(pub u32);

impl Place {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A multiset of places, stored as `(place, count)` pairs sorted by place with no zero count, so
/// two markings are equal iff their vectors are. The derived order is the lexicographic order
/// on those pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Marking(Vec<(Place, u64)>);

static ZERO: Marking = Marking(Vec::new());

impl Marking {
    pub fn new() -> Self {
        Marking(Vec::new())
    }

    /// A shared reference to the empty marking.
    pub fn zero() -> &'static Marking {
        &ZERO
    }

    pub fn singleton(place: Place, count: u64) -> Self {
        let mut m = Marking::new();
        m.set(place, count);
        m
    }

    pub fn from_pairs<I: IntoIterator<Item = (Place, u64)>>(pairs: I) -> Self {
        let mut m = Marking::new();
        for (p, n) in pairs {
            m.add_tokens(p, n);
        }
        m
    }

    /// Builds a marking from a dense vector (index = place).
    pub fn from_dense(values: &[u64]) -> Self {
        Marking(
            values
                .iter()
                .enumerate()
                .filter(|(_, &n)| n > 0)
                .map(|(i, &n)| (Place(i as u32), n))
                .collect(),
        )
    }

    pub fn to_dense(&self, dim: usize) -> Vec<u64> {
        let mut v = vec![0; dim];
        for (p, n) in &self.0 {
            v[p.index()] = *n;
        }
        v
    }

    fn find(&self, place: Place) -> Result<usize, usize> {
        self.0.binary_search_by_key(&place, |(p, _)| *p)
    }

    pub fn get(&self, place: Place) -> u64 {
        self.find(place).map_or(0, |i| self.0[i].1)
    }

    pub fn set(&mut self, place: Place, count: u64) {
        match (self.find(place), count) {
            (Ok(i), 0) => {
                self.0.remove(i);
            }
            (Ok(i), n) => self.0[i].1 = n,
            (Err(_), 0) => {}
            (Err(i), n) => self.0.insert(i, (place, n)),
        }
    }

    pub fn add_tokens(&mut self, place: Place, count: u64) {
        if count > 0 {
            match self.find(place) {
                Ok(i) => self.0[i].1 += count,
                Err(i) => self.0.insert(i, (place, count)),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Total number of tokens.
    pub fn total(&self) -> u64 {
        self.0.iter().map(|(_, n)| n).sum()
    }

    pub fn support(&self) -> impl Iterator<Item = Place> + '_ {
        self.0.iter().map(|(p, _)| *p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Place, u64)> + '_ {
        self.0.iter().copied()
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &Marking) -> bool {
        self.0.iter().all(|(p, n)| other.get(*p) >= *n)
    }

    /// `self - other`, or `None` when some place would go negative.
    pub fn checked_sub(&self, other: &Marking) -> Option<Marking> {
        let mut out = self.clone();
        for (p, n) in &other.0 {
            let have = out.get(*p);
            if have < *n {
                return None;
            }
            out.set(*p, have - n);
        }
        Some(out)
    }

    /// Pointwise `max(self - other, 0)`.
    pub fn saturating_sub(&self, other: &Marking) -> Marking {
        Marking(
            self.0
                .iter()
                .filter_map(|(p, n)| {
                    let d = n.saturating_sub(other.get(*p));
                    (d > 0).then_some((*p, d))
                })
                .collect(),
        )
    }

    /// Drops every place whose index is `>= dim`.
    pub fn restrict(&self, dim: usize) -> Marking {
        Marking(self.0.iter().filter(|(p, _)| p.index() < dim).copied().collect())
    }

    /// Renames places through `f`.
    pub fn map_places(&self, mut f: impl FnMut(Place) -> Place) -> Marking {
        Marking::from_pairs(self.0.iter().map(|(p, n)| (f(*p), *n)))
    }

    /// Renders as `p1 p2:2` using the given place names, or `0` when empty.
    pub fn display<'a>(&'a self, names: &'a [String]) -> MarkingDisplay<'a> {
        MarkingDisplay { marking: self, names }
    }
}

impl Add<&Marking> for &Marking {
    type Output = Marking;

    fn add(self, rhs: &Marking) -> Marking {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl AddAssign<&Marking> for Marking {
    fn add_assign(&mut self, rhs: &Marking) {
        for (p, n) in &rhs.0 {
            self.add_tokens(*p, *n);
        }
    }
}

pub struct MarkingDisplay<'a> {
    marking: &'a Marking,
    names: &'a [String],
}

impl fmt::Display for MarkingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.marking.is_zero() {
            return f.write_str("0");
        }
        let mut entries: Vec<(&str, u64)> = self
            .marking
            .iter()
            .map(|(p, n)| (self.names.get(p.index()).map(String::as_str).unwrap_or("?"), n))
            .collect();
        entries.sort();
        for (i, (name, n)) in entries.into_iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            if n == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}:{n}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(pairs: &[(u32, u64)]) -> Marking {
        Marking::from_pairs(pairs.iter().map(|&(p, n)| (Place(p), n)))
    }

    #[test]
    fn zero_entries_are_not_stored() {
        let mut a = m(&[(0, 1)]);
        a.set(Place(0), 0);
        assert_eq!(a, Marking::new());
        assert_eq!(m(&[(1, 0)]), Marking::new());
    }

    #[test]
    fn order_and_arithmetic() {
        let a = m(&[(0, 1), (2, 2)]);
        let b = m(&[(0, 2), (1, 1), (2, 2)]);
        assert!(a.le(&b));
        assert!(!b.le(&a));
        assert!(Marking::zero().le(&a));
        assert_eq!(b.checked_sub(&a), Some(m(&[(0, 1), (1, 1)])));
        assert_eq!(a.checked_sub(&b), None);
        assert_eq!(&a + &b, m(&[(0, 3), (1, 1), (2, 4)]));
        assert_eq!(a.saturating_sub(&b), Marking::new());
        assert_eq!(b.saturating_sub(&a), m(&[(0, 1), (1, 1)]));
    }

    #[test]
    fn dense_round_trip_and_display() {
        let a = m(&[(0, 1), (2, 3)]);
        assert_eq!(Marking::from_dense(&a.to_dense(3)), a);
        let names = vec!["b".to_string(), "x".to_string(), "a".to_string()];
        assert_eq!(a.display(&names).to_string(), "a:3 b");
        assert_eq!(Marking::new().display(&names).to_string(), "0");
    }
}
