//! Belief functions: mass assignments, belief tables, known partial values,
//! and the family-relative belief `BEL_H` of a collection of known sets.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::frame::{Frame, SetFamily, Subset};
use crate::value::{in_unit_interval, int, render, Rational};

/// Largest frame for which a full belief table is materialized.
pub const TABLE_MAX: usize = 20;

/// Nonzero masses on nonempty subsets, summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct MassAssignment {
    frame: Frame,
    entries: BTreeMap<Subset, Rational>,
}

impl MassAssignment {
    pub fn new<I>(frame: Frame, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Subset, Rational)>,
    {
        let mut map = BTreeMap::new();
        let mut total = Rational::zero();
        for (set, mass) in entries {
            frame.check(set)?;
            if mass.is_negative() {
                return Err(Error::InvalidMass(format!(
                    "negative mass {} on {}",
                    render(&mass),
                    frame.render(set)
                )));
            }
            if mass.is_zero() {
                continue;
            }
            if set.is_empty() {
                return Err(Error::InvalidMass("the empty set carries mass".into()));
            }
            total += &mass;
            if map.insert(set, mass).is_some() {
                return Err(Error::InvalidMass(format!(
                    "{} listed twice",
                    frame.render(set)
                )));
            }
        }
        if !total.is_one() {
            return Err(Error::InvalidMass(format!(
                "masses sum to {}, not 1",
                render(&total)
            )));
        }
        Ok(Self {
            frame,
            entries: map,
        })
    }

    /// All mass on the whole frame.
    pub fn vacuous(frame: Frame) -> Self {
        let full = frame.full();
        Self {
            frame,
            entries: BTreeMap::from([(full, Rational::one())]),
        }
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Focal elements with their masses, in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (Subset, &Rational)> + '_ {
        self.entries.iter().map(|(s, m)| (*s, m))
    }

    pub fn mass(&self, a: Subset) -> Rational {
        self.entries.get(&a).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn focal_elements(&self) -> SetFamily {
        self.entries.keys().copied().collect()
    }

    /// `Bel(A)`: total mass of focal elements contained in `A`.
    pub fn belief(&self, a: Subset) -> Rational {
        self.entries
            .iter()
            .filter(|(b, _)| b.is_subset_of(a))
            .map(|(_, m)| m)
            .sum()
    }

    /// `Pl(A)`: total mass of focal elements meeting `A`.
    pub fn plausibility(&self, a: Subset) -> Rational {
        self.entries
            .iter()
            .filter(|(b, _)| b.intersects(a))
            .map(|(_, m)| m)
            .sum()
    }

    /// Yager's specificity, `Σ m(A) / |A|`.
    pub fn specificity(&self) -> Rational {
        self.entries
            .iter()
            .map(|(a, m)| m / int(a.len() as i64))
            .sum()
    }

    /// `Bel(B_1 ∪ … ∪ B_k) − Σ_{∅≠I} (−1)^{|I|+1} Bel(⋂_{i∈I} B_i)`.
    ///
    /// Always nonnegative; it is the mass of the sets inside the union that
    /// fit inside none of the `B_i`.
    pub fn superadditivity_defect(&self, sets: &[Subset]) -> Rational {
        let union = sets.iter().fold(Subset::EMPTY, |acc, b| acc.union(*b));
        self.belief(union) - inclusion_exclusion(sets, |x| self.belief(x))
    }

    pub fn belief_table(&self) -> Result<BeliefTable> {
        BeliefTable::from_mass(self)
    }
}

/// A belief value for every subset of a small frame, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefTable {
    frame: Frame,
    values: Vec<Rational>,
}

impl BeliefTable {
    /// Requires `Bel(∅) = 0` and `Bel(U) = 1`. Whether the values form a
    /// belief function is checked by [`BeliefTable::to_mass`].
    pub fn from_values(frame: Frame, values: Vec<Rational>) -> Result<Self> {
        check_table_size(&frame)?;
        if values.len() != 1 << frame.len() {
            return Err(Error::InvalidBeliefTable(format!(
                "expected {} values, got {}",
                1u64 << frame.len(),
                values.len()
            )));
        }
        if !values[0].is_zero() {
            return Err(Error::InvalidBeliefTable("Bel(∅) must be 0".into()));
        }
        if !values[values.len() - 1].is_one() {
            return Err(Error::InvalidBeliefTable("Bel(U) must be 1".into()));
        }
        Ok(Self { frame, values })
    }

    pub fn from_mass(m: &MassAssignment) -> Result<Self> {
        check_table_size(&m.frame)?;
        let n = m.frame.len();
        let mut values = vec![Rational::zero(); 1 << n];
        for (a, v) in m.entries() {
            values[a.bits() as usize] = v.clone();
        }
        // zeta transform over the subset lattice
        for i in 0..n {
            let bit = 1usize << i;
            for mask in 0..values.len() {
                if mask & bit != 0 {
                    let lower = values[mask ^ bit].clone();
                    values[mask] += lower;
                }
            }
        }
        Ok(Self {
            frame: m.frame.clone(),
            values,
        })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn belief(&self, a: Subset) -> &Rational {
        &self.values[a.bits() as usize]
    }

    pub fn plausibility(&self, a: Subset) -> Rational {
        Rational::one() - self.belief(self.frame.complement(a))
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    /// Möbius inversion, `m(A) = Σ_{B⊆A} (−1)^{|A−B|} Bel(B)`.
    pub fn to_mass(&self) -> Result<MassAssignment> {
        let n = self.frame.len();
        let mut m = self.values.clone();
        for i in 0..n {
            let bit = 1usize << i;
            for mask in 0..m.len() {
                if mask & bit != 0 {
                    let lower = m[mask ^ bit].clone();
                    m[mask] -= lower;
                }
            }
        }
        let witness = m
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_negative())
            .map(|(bits, v)| (Subset::from_bits(bits as u64), v))
            .min_by_key(|(s, _)| *s);
        if let Some((s, v)) = witness {
            return Err(Error::NotABeliefFunction {
                witness: self.frame.render(s),
                mass: render(v),
            });
        }
        MassAssignment::new(
            self.frame.clone(),
            m.into_iter()
                .enumerate()
                .map(|(bits, v)| (Subset::from_bits(bits as u64), v)),
        )
    }
}

fn check_table_size(frame: &Frame) -> Result<()> {
    if frame.len() > TABLE_MAX {
        Err(Error::TableTooLarge {
            max: TABLE_MAX,
            got: frame.len(),
        })
    } else {
        Ok(())
    }
}

/// Outcome of comparing two belief functions pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Commitment {
    Equal,
    /// The first is less committed: `Bel1 ≤ Bel2` everywhere, strictly somewhere.
    Less,
    /// The first is more committed.
    Greater,
    Incomparable,
}

pub fn less_committed(first: &BeliefTable, second: &BeliefTable) -> Commitment {
    assert_eq!(
        first.frame.len(),
        second.frame.len(),
        "comparing beliefs on different frames"
    );
    let mut le = true;
    let mut ge = true;
    for (a, b) in first.values.iter().zip(&second.values) {
        le &= a <= b;
        ge &= a >= b;
    }
    match (le, ge) {
        (true, true) => Commitment::Equal,
        (true, false) => Commitment::Less,
        (false, true) => Commitment::Greater,
        (false, false) => Commitment::Incomparable,
    }
}

/// `Σ_{∅≠I⊆{1..k}} (−1)^{|I|+1} f(⋂_{i∈I} B_i)`.
///
/// `f(∅)` must be zero: branches whose running intersection is empty are
/// cut, as are all their extensions.
pub(crate) fn inclusion_exclusion<F>(sets: &[Subset], mut f: F) -> Rational
where
    F: FnMut(Subset) -> Rational,
{
    fn walk<F: FnMut(Subset) -> Rational>(
        sets: &[Subset],
        start: usize,
        acc: Subset,
        odd: bool,
        f: &mut F,
        total: &mut Rational,
    ) {
        for i in start..sets.len() {
            let x = acc.intersection(sets[i]);
            if x.is_empty() {
                continue;
            }
            let v = f(x);
            if odd {
                *total += v;
            } else {
                *total -= v;
            }
            walk(sets, i + 1, x, !odd, f, total);
        }
    }
    let mut total = Rational::zero();
    walk(
        sets,
        0,
        Subset::from_bits(u64::MAX),
        true,
        &mut f,
        &mut total,
    );
    total
}

/// Beliefs known on a family `H`; `∅ ↦ 0` and `U ↦ 1` are always present.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownBeliefs {
    frame: Frame,
    values: BTreeMap<Subset, Rational>,
    family: SetFamily,
}

impl KnownBeliefs {
    /// Rejects values outside `[0, 1]`, conflicting values for `∅`/`U` or
    /// duplicate sets, and pairs `A ⊂ B` with `Bel(A) > Bel(B)`.
    pub fn new<I>(frame: Frame, values: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Subset, Rational)>,
    {
        let mut map = BTreeMap::new();
        map.insert(Subset::EMPTY, Rational::zero());
        map.insert(frame.full(), Rational::one());
        let mut seen = std::collections::HashSet::new();
        for (set, v) in values {
            frame.check(set)?;
            if !in_unit_interval(&v) {
                return Err(Error::ValueOutOfRange {
                    set: frame.render(set),
                    value: render(&v),
                });
            }
            if !seen.insert(set) {
                return Err(Error::FixedValue {
                    set: frame.render(set),
                    reason: "listed more than once".into(),
                });
            }
            let fixed = map
                .get(&set)
                .filter(|_| set.is_empty() || set == frame.full());
            if let Some(expected) = fixed {
                if *expected != v {
                    return Err(Error::FixedValue {
                        set: frame.render(set),
                        reason: format!("must be {}", render(expected)),
                    });
                }
            }
            map.insert(set, v);
        }
        let family = map.keys().copied().collect();
        let known = Self {
            frame,
            values: map,
            family,
        };
        known.check_monotone()?;
        Ok(known)
    }

    fn check_monotone(&self) -> Result<()> {
        for (a, va) in &self.values {
            for (b, vb) in &self.values {
                if a.is_strict_subset_of(*b) && va > vb {
                    return Err(Error::MonotonicityViolation {
                        smaller: self.frame.render(*a),
                        smaller_value: render(va),
                        larger: self.frame.render(*b),
                        larger_value: render(vb),
                    });
                }
            }
        }
        Ok(())
    }

    /// The vacuous state of knowledge: only `∅` and `U`.
    pub fn vacuous(frame: Frame) -> Self {
        Self::new(frame, []).expect("vacuous knowledge is consistent")
    }

    /// Values of `m` on the sets of `family`.
    pub fn from_mass(m: &MassAssignment, family: &SetFamily) -> Result<Self> {
        Self::new(m.frame().clone(), family.iter().map(|a| (a, m.belief(a))))
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    pub fn value(&self, a: Subset) -> Option<&Rational> {
        self.values.get(&a)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Subset, &Rational)> + '_ {
        self.values.iter().map(|(s, v)| (*s, v))
    }

    /// The values other than the implicit `∅` and `U`.
    pub fn constraints(&self) -> impl Iterator<Item = (Subset, &Rational)> + '_ {
        let full = self.frame.full();
        self.entries()
            .filter(move |(s, _)| !s.is_empty() && *s != full)
    }

    /// A copy with one more known value; the result must stay monotone.
    pub fn with_value(&self, a: Subset, v: Rational) -> Result<Self> {
        let mut entries: Vec<(Subset, Rational)> = self
            .constraints()
            .filter(|(s, _)| *s != a)
            .map(|(s, v)| (s, v.clone()))
            .collect();
        if let Some(old) = self.values.get(&a) {
            if a.is_empty() || a == self.frame.full() {
                if *old != v {
                    return Err(Error::FixedValue {
                        set: self.frame.render(a),
                        reason: format!("must be {}", render(old)),
                    });
                }
                return Ok(self.clone());
            }
        }
        entries.push((a, v));
        Self::new(self.frame.clone(), entries)
    }

    /// Range of values for `a` that keeps the known values monotone:
    /// the largest known value below `a` and the smallest known value above it.
    pub fn admissible_range(&self, a: Subset) -> (Rational, Rational) {
        let lo = self
            .values
            .iter()
            .filter(|(s, _)| s.is_strict_subset_of(a))
            .map(|(_, v)| v)
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero);
        let hi = self
            .values
            .iter()
            .filter(|(s, _)| a.is_strict_subset_of(**s))
            .map(|(_, v)| v)
            .min()
            .cloned()
            .unwrap_or_else(Rational::one);
        (lo, hi)
    }

    /// `BEL_H` of a collection of members of `H`, by the recursive definition.
    pub fn bel_h(&self, query: &[Subset]) -> Result<Rational> {
        BelHEvaluator::new(self).evaluate(query)
    }

    /// Signed masses on every member of `H`, processed in ascending
    /// inclusion order:
    /// `m(A) = Bel(A) − Σ_{∅≠I} (−1)^{|I|+1} BEL_H(⋀_{i∈I} B_i)` over `T_A`.
    pub fn mass_on_family(&self) -> FamilyMasses {
        let mut masses: BTreeMap<Subset, Rational> = BTreeMap::new();
        for (a, bel) in &self.values {
            let lower = self.family.strict_lower_family(*a);
            let rhs = inclusion_exclusion(lower.members(), |x| covered_mass(&masses, x));
            masses.insert(*a, bel - rhs);
        }
        FamilyMasses {
            frame: self.frame.clone(),
            family: self.family.clone(),
            masses,
        }
    }

    /// Belief of any subset, treating `H` as the focal family of the belief
    /// function that takes the known values on it.
    pub fn belief_from_focal_values(&self, a: Subset) -> Rational {
        match self.values.get(&a) {
            Some(v) => v.clone(),
            None => self.mass_on_family().belief_outside(a),
        }
    }
}

/// `Σ m(C)` over members `C` contained in `x`. Equals `BEL_H` of the meet
/// family below `x` when the masses come from [`KnownBeliefs::mass_on_family`].
fn covered_mass(masses: &BTreeMap<Subset, Rational>, x: Subset) -> Rational {
    masses
        .iter()
        .filter(|(c, _)| c.is_subset_of(x))
        .map(|(_, m)| m)
        .sum()
}

/// Signed masses of the members of a known family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMasses {
    frame: Frame,
    family: SetFamily,
    masses: BTreeMap<Subset, Rational>,
}

impl FamilyMasses {
    pub fn mass(&self, a: Subset) -> Option<&Rational> {
        self.masses.get(&a)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Subset, &Rational)> + '_ {
        self.masses.iter().map(|(s, m)| (*s, m))
    }

    pub fn family(&self) -> &SetFamily {
        &self.family
    }

    /// `BEL_H({B_1..B_k})` through the mass sum over members below some `B_i`.
    pub fn bel_h(&self, query: &[Subset]) -> Rational {
        self.masses
            .iter()
            .filter(|(c, _)| query.iter().any(|b| c.is_subset_of(*b)))
            .map(|(_, m)| m)
            .sum()
    }

    /// `Σ_{∅≠I} (−1)^{|I|+1} BEL_H(⋀_{i∈I} B_i)` over `T_A`, the maximal
    /// members strictly inside `a`.
    pub fn lower_bound(&self, a: Subset) -> Rational {
        let lower = self.family.strict_lower_family(a);
        inclusion_exclusion(lower.members(), |x| covered_mass(&self.masses, x))
    }

    /// Belief of a set outside the family under the family's masses.
    pub fn belief_outside(&self, a: Subset) -> Rational {
        self.lower_bound(a)
    }

    /// First member (canonical order) with negative mass.
    pub fn first_negative(&self) -> Option<Subset> {
        self.masses
            .iter()
            .find(|(_, m)| m.is_negative())
            .map(|(s, _)| *s)
    }

    pub fn to_mass_assignment(&self) -> Result<MassAssignment> {
        MassAssignment::new(
            self.frame.clone(),
            self.masses.iter().map(|(s, m)| (*s, m.clone())),
        )
    }
}

/// Memoized evaluation of the recursive `BEL_H` definition. The memo lives
/// as long as the evaluator; keys are queries reduced to their maximal antichain.
pub struct BelHEvaluator<'a> {
    known: &'a KnownBeliefs,
    memo: HashMap<Vec<Subset>, Rational>,
}

impl<'a> BelHEvaluator<'a> {
    pub fn new(known: &'a KnownBeliefs) -> Self {
        Self {
            known,
            memo: HashMap::new(),
        }
    }

    pub fn evaluate(&mut self, query: &[Subset]) -> Result<Rational> {
        if let Some(s) = query.iter().find(|s| !self.known.family.contains(**s)) {
            return Err(Error::NotInFamily(self.known.frame.render(*s)));
        }
        let normalized: SetFamily = query
            .iter()
            .copied()
            .collect::<SetFamily>()
            .maximal_elements();
        Ok(self.eval(normalized.members()))
    }

    fn eval(&mut self, antichain: &[Subset]) -> Rational {
        match antichain {
            [] => return Rational::zero(),
            [b] => return self.known.values[b].clone(),
            _ => {}
        }
        if let Some(v) = self.memo.get(antichain) {
            return v.clone();
        }
        let k = antichain.len();
        let mut total = Rational::zero();
        for mask in 1u64..(1 << k) {
            let chosen: Vec<Subset> = (0..k)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| antichain[i])
                .collect();
            let term = if let [b] = chosen.as_slice() {
                self.known.values[b].clone()
            } else {
                let meet = self
                    .known
                    .family
                    .meet(&chosen)
                    .expect("antichain members belong to the family");
                self.eval(meet.members())
            };
            if mask.count_ones() % 2 == 1 {
                total += term;
            } else {
                total -= term;
            }
        }
        self.memo.insert(antichain.to_vec(), total.clone());
        total
    }
}
