//! Finite frames, subsets as bitmasks, and families of subsets.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_FRAME: usize = 64;

/// An ordered list of distinct element labels.
#[derive(Clone, PartialEq, Eq)]
pub struct Frame {
    labels: Arc<[String]>,
    index: Arc<HashMap<String, usize>>,
}

impl Frame {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() || labels.len() > MAX_FRAME {
            return Err(Error::FrameSize(labels.len()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Self {
            labels: labels.into(),
            index: Arc::new(index),
        })
    }

    /// Frame `u1, …, un`.
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("u{i}")))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn full(&self) -> Subset {
        Subset::full(self.len())
    }

    pub fn contains(&self, s: Subset) -> bool {
        s.bits() & !self.full().bits() == 0
    }

    pub fn check(&self, s: Subset) -> Result<Subset> {
        if self.contains(s) {
            Ok(s)
        } else {
            Err(Error::SubsetOutOfFrame(s.bits()))
        }
    }

    pub fn subset<I, S>(&self, labels: I) -> Result<Subset>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut bits = 0u64;
        for l in labels {
            let l = l.as_ref();
            let i = self
                .index_of(l)
                .ok_or_else(|| Error::UnknownLabel(l.to_string()))?;
            bits |= 1 << i;
        }
        Ok(Subset(bits))
    }

    pub fn labels_of(&self, s: Subset) -> Vec<String> {
        s.elements().map(|i| self.labels[i].clone()).collect()
    }

    pub fn render(&self, s: Subset) -> String {
        format!("{{{}}}", self.labels_of(s).join(","))
    }

    pub fn complement(&self, s: Subset) -> Subset {
        Subset(self.full().bits() & !s.bits())
    }

    /// Every subset of the frame, by increasing bitmask. Only sensible for small frames.
    pub fn power_set(&self) -> impl Iterator<Item = Subset> {
        assert!(
            self.len() < 32,
            "power set of a {}-element frame",
            self.len()
        );
        (0..1u64 << self.len()).map(Subset)
    }
}

impl fmt::Debug for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Frame").field(&self.labels).finish()
    }
}

/// A subset of a frame with at most 64 elements; bit `i` is element `i`.
///
/// Ordering is the canonical one used everywhere: ascending cardinality,
/// ties by ascending bitmask value.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Subset(u64);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub const fn from_bits(bits: u64) -> Self {
        Subset(bits)
    }

    pub fn full(n: usize) -> Self {
        if n >= 64 {
            Subset(u64::MAX)
        } else {
            Subset((1u64 << n) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        Subset(1 << i)
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(it: I) -> Self {
        Subset(it.into_iter().fold(0, |acc, i| acc | 1 << i))
    }

    pub const fn bits(self) -> u64 {
        self.0
    }

    pub const fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn is_strict_subset_of(self, other: Subset) -> bool {
        self.is_subset_of(other) && self.0 != other.0
    }

    pub const fn intersection(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub const fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub const fn difference(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub const fn intersects(self, other: Subset) -> bool {
        self.0 & other.0 != 0
    }

    pub fn elements(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    /// All subsets of `self`, including `∅` and `self`.
    pub fn subsets(self) -> impl Iterator<Item = Subset> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(Subset(cur))
        })
    }
}

impl Ord for Subset {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Subset {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Elements printed by zero-based index; use [`Frame::render`] for labels.
impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// A deduplicated family of subsets kept in canonical order.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct SetFamily {
    members: Vec<Subset>,
}

impl SetFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn members(&self) -> &[Subset] {
        &self.members
    }

    pub fn iter(&self) -> impl Iterator<Item = Subset> + '_ {
        self.members.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, s: Subset) -> bool {
        self.members.binary_search(&s).is_ok()
    }

    pub fn insert(&mut self, s: Subset) -> bool {
        match self.members.binary_search(&s) {
            Ok(_) => false,
            Err(pos) => {
                self.members.insert(pos, s);
                true
            }
        }
    }

    pub fn union(&self, other: &SetFamily) -> SetFamily {
        self.iter().chain(other.iter()).collect()
    }

    /// Members not strictly contained in another member.
    pub fn maximal_elements(&self) -> SetFamily {
        maximal_of(self.iter())
    }

    /// The maximal members strictly contained in `a`.
    pub fn strict_lower_family(&self, a: Subset) -> SetFamily {
        maximal_of(self.iter().filter(|b| b.is_strict_subset_of(a)))
    }

    /// Maximal members contained in every one of `sets`, each of which must be a member.
    pub fn meet(&self, sets: &[Subset]) -> Result<SetFamily> {
        if let Some(s) = sets.iter().find(|s| !self.contains(**s)) {
            return Err(Error::NotInFamily(s.to_string()));
        }
        let common = sets
            .iter()
            .fold(Subset(u64::MAX), |acc, s| acc.intersection(*s));
        Ok(self.maximal_below(common))
    }

    /// Maximal members contained in `x`. A member `C` lies below every set
    /// of a collection exactly when it lies below their plain intersection.
    pub fn maximal_below(&self, x: Subset) -> SetFamily {
        maximal_of(self.iter().filter(|c| c.is_subset_of(x)))
    }

    /// Fixpoint of pairwise intersections.
    pub fn intersection_closure(&self) -> SetFamily {
        let mut closed: BTreeSet<Subset> = self.iter().collect();
        let mut frontier: Vec<Subset> = self.members.clone();
        while !frontier.is_empty() {
            let snapshot: Vec<Subset> = closed.iter().copied().collect();
            let mut next = Vec::new();
            for f in &frontier {
                for s in &snapshot {
                    let x = f.intersection(*s);
                    if closed.insert(x) {
                        next.push(x);
                    }
                }
            }
            frontier = next;
        }
        SetFamily {
            members: closed.into_iter().collect(),
        }
    }

    /// A pair of members whose intersection is missing, if any.
    pub fn closure_witness(&self) -> Option<(Subset, Subset)> {
        for (i, a) in self.members.iter().enumerate() {
            for b in &self.members[i + 1..] {
                if !self.contains(a.intersection(*b)) {
                    return Some((*a, *b));
                }
            }
        }
        None
    }

    pub fn is_closed_under_intersection(&self) -> bool {
        self.closure_witness().is_none()
    }

    /// Intersections of exactly `j` distinct members.
    pub fn stratum(&self, j: usize) -> Result<SetFamily> {
        if j == 0 || j > self.len() {
            return Err(Error::StratumOutOfRange { j, max: self.len() });
        }
        Ok(self.strata_up_to(j).pop().unwrap_or_default())
    }

    /// `[stratum(1), …, stratum(max_j)]`.
    ///
    /// Sweeps the members once, tracking for each count `k` the set of
    /// intersections reachable from `k` distinct members seen so far.
    pub fn strata_up_to(&self, max_j: usize) -> Vec<SetFamily> {
        let max_j = max_j.min(self.len());
        let mut reach: Vec<BTreeSet<Subset>> = vec![BTreeSet::new(); max_j + 1];
        for &b in &self.members {
            for k in (1..=max_j).rev() {
                if k == 1 {
                    reach[1].insert(b);
                } else {
                    let extended: Vec<Subset> =
                        reach[k - 1].iter().map(|x| x.intersection(b)).collect();
                    reach[k].extend(extended);
                }
            }
        }
        reach
            .into_iter()
            .skip(1)
            .map(|s| SetFamily {
                members: s.into_iter().collect(),
            })
            .collect()
    }
}

fn maximal_of<I: Iterator<Item = Subset>>(it: I) -> SetFamily {
    let candidates: Vec<Subset> = it.collect();
    candidates
        .iter()
        .copied()
        .filter(|c| !candidates.iter().any(|d| c.is_strict_subset_of(*d)))
        .collect()
}

impl FromIterator<Subset> for SetFamily {
    fn from_iter<T: IntoIterator<Item = Subset>>(iter: T) -> Self {
        let mut members: Vec<Subset> = iter.into_iter().collect();
        members.sort();
        members.dedup();
        SetFamily { members }
    }
}

impl<'a> IntoIterator for &'a SetFamily {
    type Item = Subset;
    type IntoIter = std::iter::Copied<std::slice::Iter<'a, Subset>>;

    fn into_iter(self) -> Self::IntoIter {
        self.members.iter().copied()
    }
}

impl fmt::Debug for SetFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.members.iter()).finish()
    }
}
