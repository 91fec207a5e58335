//! Brute-force oracles, random instance generators and property checks.
//!
//! Oracles enumerate the whole power set and only read masses or values
//! through the public accessors, so they share no code path with the
//! implementation they check. Shared by the property tests and the
//! acceptance suite.
#![allow(dead_code)]

use belief_forge_core::lp::{centroid, optimal_face_vertices, LinearProgram, LpStatus};
use belief_forge_core::value::{int, Rational};
use belief_forge_core::{
    check_focusing, complete_closed, complete_focusing, complete_min_specificity,
    detect_impossible, less_committed, BeliefTable, Commitment, CompletionOptions, Frame,
    KnownBeliefs, MassAssignment, SetFamily, Subset,
};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn all_subsets(n: usize) -> Vec<Subset> {
    (0..1u64 << n).map(Subset::from_bits).collect()
}

// ---------------------------------------------------------------- oracles

/// Masses of every subset, indexed by bitmask.
pub fn dense(m: &MassAssignment) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); 1 << m.frame().len()];
    for (a, v) in m.entries() {
        out[a.bits() as usize] = v.clone();
    }
    out
}

fn sum_where(masses: &[Rational], keep: impl Fn(u64) -> bool) -> Rational {
    let mut total = Rational::zero();
    for (bits, v) in masses.iter().enumerate() {
        if keep(bits as u64) && !v.is_zero() {
            total += v;
        }
    }
    total
}

/// `Σ_{B⊆A} m(B)` by scanning the whole power set.
pub fn brute_belief(masses: &[Rational], a: Subset) -> Rational {
    sum_where(masses, |b| b & !a.bits() == 0)
}

pub fn brute_plausibility(masses: &[Rational], a: Subset) -> Rational {
    sum_where(masses, |b| b & a.bits() != 0)
}

/// `Σ_{B⊆A} (−1)^{|A−B|} Bel(B)` straight from the definition.
pub fn brute_mobius(values: &[Rational], a: Subset) -> Rational {
    let mut total = Rational::zero();
    for bits in 0..values.len() as u64 {
        if bits & !a.bits() != 0 {
            continue;
        }
        let diff = (a.bits() & !bits).count_ones();
        if diff % 2 == 0 {
            total += &values[bits as usize];
        } else {
            total -= &values[bits as usize];
        }
    }
    total
}

/// Mass of the sets inside `∪ B_i` that fit in none of the `B_i`.
pub fn brute_hk_mass(masses: &[Rational], sets: &[Subset]) -> Rational {
    let union = sets.iter().fold(0u64, |acc, b| acc | b.bits());
    sum_where(masses, |a| {
        a & !union == 0 && sets.iter().all(|b| a & !b.bits() != 0)
    })
}

/// Mass of all sets contained in some member of `query`.
pub fn brute_covered_mass(masses: &[Rational], query: &[Subset]) -> Rational {
    sum_where(masses, |a| query.iter().any(|b| a & !b.bits() == 0))
}

/// The minimum specificity program with one variable per nonempty subset.
pub fn full_program(known: &KnownBeliefs) -> (Vec<Subset>, LinearProgram) {
    let vars: Vec<Subset> = all_subsets(known.frame().len())
        .into_iter()
        .skip(1)
        .collect();
    program_over(known, &vars, |a| {
        Rational::new(1.into(), (a.len() as i64).into())
    })
}

/// Constraint rows of the known values over `vars`, with a custom objective.
pub fn program_over(
    known: &KnownBeliefs,
    vars: &[Subset],
    mut cost: impl FnMut(Subset) -> Rational,
) -> (Vec<Subset>, LinearProgram) {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for (a, v) in known.entries() {
        if a.is_empty() {
            continue;
        }
        rows.push(
            vars.iter()
                .map(|b| {
                    if b.bits() & !a.bits() == 0 {
                        int(1)
                    } else {
                        int(0)
                    }
                })
                .collect(),
        );
        rhs.push(v.clone());
    }
    let lp = LinearProgram::new(vars.iter().map(|a| cost(*a)).collect(), rows, rhs).unwrap();
    (vars.to_vec(), lp)
}

pub fn mass_from_point(frame: &Frame, vars: &[Subset], x: &[Rational]) -> MassAssignment {
    MassAssignment::new(frame.clone(), vars.iter().copied().zip(x.iter().cloned())).unwrap()
}

/// Feasible masses with focal elements among `vars`: vertices for random
/// objectives plus random convex combinations of them.
pub fn sample_feasible(
    rng: &mut TestRng,
    known: &KnownBeliefs,
    vars: &[Subset],
    count: usize,
) -> Vec<MassAssignment> {
    let lp_count = (count / 5).max(1);
    let mut points: Vec<Vec<Rational>> = Vec::new();
    for _ in 0..lp_count {
        // bounded because the row for the whole frame fixes the total mass
        let (_, lp) = program_over(known, vars, |_| int(rng.gen_range(-5..=5)));
        let out = lp.solve();
        if let Some(x) = out.vertex {
            points.push(x);
        }
    }
    let mut samples: Vec<Vec<Rational>> = points.clone();
    while samples.len() < count && !points.is_empty() {
        let weights: Vec<i64> = points.iter().map(|_| rng.gen_range(0..5)).collect();
        let total: i64 = weights.iter().sum();
        if total == 0 {
            continue;
        }
        let mut x = vec![Rational::zero(); vars.len()];
        for (p, w) in points.iter().zip(&weights) {
            let w = Rational::new((*w).into(), total.into());
            for (xi, pi) in x.iter_mut().zip(p) {
                *xi += pi * &w;
            }
        }
        samples.push(x);
    }
    samples
        .iter()
        .map(|x| mass_from_point(known.frame(), vars, x))
        .collect()
}

// ------------------------------------------------------------- generators

/// Random mass on a frame of `n` with at most `max_focal` focal sets and
/// small denominators.
pub fn random_mass(rng: &mut TestRng, n: usize, max_focal: usize) -> MassAssignment {
    let frame = Frame::indexed(n).unwrap();
    let count = rng.gen_range(1..=max_focal);
    let weights: Vec<(u64, i64)> = (0..count)
        .map(|_| (rng.gen_range(1..1u64 << n), rng.gen_range(1..=6)))
        .collect();
    mass_from_weights(&frame, &weights)
}

pub fn mass_from_weights(frame: &Frame, weights: &[(u64, i64)]) -> MassAssignment {
    let mut merged: std::collections::BTreeMap<u64, i64> = Default::default();
    for (bits, w) in weights {
        *merged.entry(*bits).or_default() += w;
    }
    let total: i64 = merged.values().sum();
    MassAssignment::new(
        frame.clone(),
        merged
            .into_iter()
            .map(|(b, w)| (Subset::from_bits(b), Rational::new(w.into(), total.into()))),
    )
    .unwrap()
}

pub fn random_family(rng: &mut TestRng, n: usize, size: usize) -> SetFamily {
    (0..size)
        .map(|_| Subset::from_bits(rng.gen_range(1..1u64 << n)))
        .collect()
}

/// The values of a random belief on a random family containing its focal sets.
pub fn random_focal_instance(rng: &mut TestRng, n: usize) -> (MassAssignment, KnownBeliefs) {
    let m = random_mass(rng, n, 4);
    let extra = {
        let size = rng.gen_range(0..3);
        random_family(rng, n, size)
    };
    let family = m.focal_elements().union(&extra);
    let known = KnownBeliefs::from_mass(&m, &family).unwrap();
    (m, known)
}

/// The values of a random belief on a random intersection-closed family.
pub fn random_closed_instance(rng: &mut TestRng, n: usize) -> KnownBeliefs {
    let m = random_mass(rng, n, 4);
    let mut family = {
        let size = rng.gen_range(1..4);
        random_family(rng, n, size)
    };
    family.insert(Subset::full(n));
    let closed = family.intersection_closure();
    KnownBeliefs::from_mass(&m, &closed).unwrap()
}

/// Monotone but otherwise arbitrary values on a random family; often
/// incompatible with any belief function.
pub fn random_monotone_known(rng: &mut TestRng, n: usize, closed: bool) -> KnownBeliefs {
    let mut family = {
        let size = rng.gen_range(1..5);
        random_family(rng, n, size)
    };
    if closed {
        family.insert(Subset::full(n));
        family = family.intersection_closure();
    }
    let mut values: Vec<(Subset, Rational)> = Vec::new();
    for a in family
        .iter()
        .filter(|a| !a.is_empty() && *a != Subset::full(n))
    {
        let lo = values
            .iter()
            .filter(|(b, _)| b.is_strict_subset_of(a))
            .map(|(_, v)| v.clone())
            .max()
            .unwrap_or_else(Rational::zero);
        let tenths = rng.gen_range(0..=10);
        let v = Rational::new(tenths.into(), 10.into()).max(lo);
        values.push((a, v));
    }
    KnownBeliefs::new(Frame::indexed(n).unwrap(), values).unwrap()
}

/// Every focal family on frames of size `1..=max_n`, with weights `1, 2, …`
/// in canonical order.
pub fn exhaustive_masses(max_n: usize) -> impl Iterator<Item = MassAssignment> {
    (1..=max_n).flat_map(|n| {
        let frame = Frame::indexed(n).unwrap();
        let nonempty = (1u64 << n) - 1;
        (1u64..(1u64 << nonempty)).map(move |pick| {
            let weights: Vec<(u64, i64)> = (0..nonempty)
                .filter(|i| pick >> i & 1 == 1)
                .enumerate()
                .map(|(k, i)| (i + 1, k as i64 + 1))
                .collect();
            mass_from_weights(&frame, &weights)
        })
    })
}

/// Every family of nonempty subsets with at most `max_size` members.
pub fn exhaustive_families(n: usize, max_size: usize) -> Vec<SetFamily> {
    let sets: Vec<Subset> = all_subsets(n).into_iter().skip(1).collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn grow(
        sets: &[Subset],
        start: usize,
        max_size: usize,
        current: &mut Vec<Subset>,
        out: &mut Vec<SetFamily>,
    ) {
        if !current.is_empty() {
            out.push(current.iter().copied().collect());
        }
        if current.len() == max_size {
            return;
        }
        for i in start..sets.len() {
            current.push(sets[i]);
            grow(sets, i + 1, max_size, current, out);
            current.pop();
        }
    }
    grow(&sets, 0, max_size, &mut current, &mut out);
    out
}

/// Families enumerated exhaustively for the LP-backed properties: all of
/// them on frames of up to three elements, and those with at most three
/// members on four elements.
pub fn exhaustive_lp_families(max_n: usize) -> Vec<(usize, SetFamily)> {
    let mut out = Vec::new();
    for n in 1..=max_n.min(4) {
        let cap = if n <= 3 { usize::MAX } else { 3 };
        out.extend(exhaustive_families(n, cap).into_iter().map(|f| (n, f)));
    }
    out
}

/// Full-support mass with weight `k` on the subset with bitmask `k`.
pub fn reference_mass(n: usize) -> MassAssignment {
    let weights: Vec<(u64, i64)> = (1..1u64 << n).map(|b| (b, b as i64)).collect();
    mass_from_weights(&Frame::indexed(n).unwrap(), &weights)
}

/// Mass with weights `1, 2, …` on the members of `family`, in canonical order.
pub fn mass_on(n: usize, family: &SetFamily) -> MassAssignment {
    let weights: Vec<(u64, i64)> = family
        .iter()
        .enumerate()
        .map(|(k, a)| (a.bits(), k as i64 + 1))
        .collect();
    mass_from_weights(&Frame::indexed(n).unwrap(), &weights)
}

/// Every assignment of values from `grid` to the sets of `family` that is
/// monotone and leaves the whole frame at 1.
pub fn exhaustive_grid_values(
    n: usize,
    family: &SetFamily,
    grid: &[Rational],
) -> Vec<KnownBeliefs> {
    let sets: Vec<Subset> = family.iter().filter(|a| *a != Subset::full(n)).collect();
    let mut out = Vec::new();
    let total = grid.len().pow(sets.len() as u32);
    for code in 0..total {
        let mut c = code;
        let values: Vec<(Subset, Rational)> = sets
            .iter()
            .map(|a| {
                let v = grid[c % grid.len()].clone();
                c /= grid.len();
                (*a, v)
            })
            .collect();
        if let Ok(k) = KnownBeliefs::new(Frame::indexed(n).unwrap(), values) {
            out.push(k);
        }
    }
    out
}

// ----------------------------------------------------------------- checks

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn check_mobius_roundtrip(m: &MassAssignment) -> Check {
    let table = m.belief_table().map_err(|e| e.to_string())?;
    let d = dense(m);
    for a in all_subsets(m.frame().len()) {
        ensure!(
            *table.belief(a) == brute_belief(&d, a),
            "belief table differs at {a}"
        );
        ensure!(m.belief(a) == brute_belief(&d, a), "belief differs at {a}");
        ensure!(
            brute_mobius(table.values(), a) == d[a.bits() as usize],
            "Möbius formula differs at {a}"
        );
    }
    let back = table.to_mass().map_err(|e| e.to_string())?;
    ensure!(back == *m, "roundtrip changed the mass: {back:?} vs {m:?}");
    Ok(())
}

pub fn check_superadditivity(m: &MassAssignment, sets: &[Subset]) -> Check {
    let got = m.superadditivity_defect(sets);
    let want = brute_hk_mass(&dense(m), sets);
    ensure!(got == want, "defect {got} vs H_k mass {want} for {sets:?}");
    Ok(())
}

pub fn check_bel_h(m: &MassAssignment, known: &KnownBeliefs, query: &[Subset]) -> Check {
    let recursive = known.bel_h(query).map_err(|e| e.to_string())?;
    let oracle = brute_covered_mass(&dense(m), query);
    let by_family_mass = known.mass_on_family().bel_h(query);
    ensure!(
        recursive == oracle,
        "recursion {recursive} vs mass sum {oracle} for {query:?}"
    );
    ensure!(
        by_family_mass == oracle,
        "family masses {by_family_mass} vs {oracle}"
    );
    Ok(())
}

pub fn check_focal_reconstruction(m: &MassAssignment) -> Check {
    let known = KnownBeliefs::from_mass(m, &m.focal_elements()).map_err(|e| e.to_string())?;
    let d = dense(m);
    for a in all_subsets(m.frame().len()) {
        let got = known.belief_from_focal_values(a);
        let want = brute_belief(&d, a);
        ensure!(got == want, "reconstruction {got} vs {want} at {a}");
    }
    Ok(())
}

pub fn check_plausibility(m: &MassAssignment) -> Check {
    let frame = m.frame();
    let d = dense(m);
    for a in all_subsets(frame.len()) {
        let pl = m.plausibility(a);
        ensure!(
            pl == brute_plausibility(&d, a),
            "plausibility differs at {a}"
        );
        ensure!(
            pl == Rational::one() - brute_belief(&d, frame.complement(a)),
            "duality fails at {a}"
        );
        ensure!(m.belief(a) <= pl, "Bel > Pl at {a}");
    }
    Ok(())
}

pub fn check_focusing_idempotent(m: &MassAssignment) -> Check {
    let known = KnownBeliefs::from_mass(m, &m.focal_elements()).map_err(|e| e.to_string())?;
    let r = complete_focusing(&known).map_err(|e| e.to_string())?;
    ensure!(r.mass == *m, "focusing returned {:?} for {:?}", r.mass, m);
    let t1 = r.mass.belief_table().unwrap();
    let t2 = m.belief_table().unwrap();
    ensure!(
        less_committed(&t1, &t2) == Commitment::Equal,
        "belief tables differ"
    );
    Ok(())
}

/// Restricting variables to the intersection closure keeps the optimum
/// value and the averaged optimal face.
pub fn check_closure_restriction(known: &KnownBeliefs) -> Check {
    let opts = CompletionOptions::default();
    let restricted = complete_min_specificity(known, &opts);
    let (vars, lp) = full_program(known);
    let out = lp.solve();
    match restricted {
        Err(_) => {
            ensure!(
                out.status == LpStatus::Infeasible,
                "restricted infeasible, full is not"
            );
            Ok(())
        }
        Ok(r) => {
            ensure!(out.status == LpStatus::Optimal, "full program not optimal");
            let full_opt = out.objective.clone().unwrap();
            ensure!(
                r.mass.specificity() == full_opt,
                "optimum {} vs full {}",
                r.mass.specificity(),
                full_opt
            );
            let face = optimal_face_vertices(&lp, &out, 64).map_err(|e| e.to_string())?;
            let avg = mass_from_point(known.frame(), &vars, &centroid(&face));
            ensure!(avg == r.mass, "averages differ: {avg:?} vs {:?}", r.mass);
            let closure = known.family().intersection_closure();
            ensure!(
                r.mass.focal_elements().iter().all(|f| closure.contains(f)),
                "focal set outside the closure"
            );
            Ok(())
        }
    }
}

pub fn check_closed_agreement(known: &KnownBeliefs) -> Check {
    let opts = CompletionOptions::default();
    let direct = complete_closed(known).map_err(|e| e.to_string())?;
    let focusing = complete_focusing(known).map_err(|e| e.to_string())?;
    let min_spec = complete_min_specificity(known, &opts).map_err(|e| e.to_string())?;
    ensure!(direct.mass == focusing.mass, "direct vs focusing");
    ensure!(
        direct.mass == min_spec.mass,
        "direct {:?} vs min-spec {:?}",
        direct.mass,
        min_spec.mass
    );
    check_reproduces(known, &direct.mass)
}

pub fn check_reproduces(known: &KnownBeliefs, m: &MassAssignment) -> Check {
    for (a, v) in known.entries() {
        ensure!(m.belief(a) == *v, "constraint at {a} not reproduced");
    }
    Ok(())
}

fn dominated_by_all(result: &MassAssignment, samples: &[MassAssignment]) -> Check {
    let t = result.belief_table().unwrap();
    for s in samples {
        let ts = s.belief_table().unwrap();
        let c = less_committed(&t, &ts);
        ensure!(
            matches!(c, Commitment::Less | Commitment::Equal),
            "{result:?} is not below feasible {s:?} ({c:?})"
        );
        ensure!(result.specificity() <= s.specificity(), "specificity order");
    }
    Ok(())
}

/// Closed direct solution lies below every sampled feasible belief.
pub fn check_closed_least_committed(
    rng: &mut TestRng,
    known: &KnownBeliefs,
    samples: usize,
) -> Check {
    let r = complete_closed(known).map_err(|e| e.to_string())?;
    let vars: Vec<Subset> = all_subsets(known.frame().len())
        .into_iter()
        .skip(1)
        .collect();
    let feasible = sample_feasible(rng, known, &vars, samples);
    ensure!(feasible.len() >= samples, "only {} samples", feasible.len());
    for s in &feasible {
        check_reproduces(known, s)?;
    }
    dominated_by_all(&r.mass, &feasible)
}

/// Focusing solution lies below every sampled feasible belief with focal
/// elements in the family.
pub fn check_focusing_least_committed(
    rng: &mut TestRng,
    known: &KnownBeliefs,
    samples: usize,
) -> Check {
    let r = complete_focusing(known).map_err(|e| e.to_string())?;
    let vars: Vec<Subset> = known.family().iter().filter(|a| !a.is_empty()).collect();
    let feasible = sample_feasible(rng, known, &vars, samples);
    ensure!(feasible.len() >= samples, "only {} samples", feasible.len());
    let t = r.mass.belief_table().unwrap();
    for s in &feasible {
        let c = less_committed(&t, &s.belief_table().unwrap());
        ensure!(
            matches!(c, Commitment::Less | Commitment::Equal),
            "not least committed ({c:?})"
        );
    }
    Ok(())
}

/// Returns how many sets were flagged impossible.
pub fn check_impossible_sound(known: &KnownBeliefs) -> Result<usize, String> {
    let flagged: Vec<Subset> = known
        .family()
        .iter()
        .filter(|a| detect_impossible(known, *a))
        .collect();
    if flagged.is_empty() {
        return Ok(0);
    }
    let (_, lp) = full_program(known);
    ensure!(
        lp.solve().status == LpStatus::Infeasible,
        "flagged {flagged:?} but the full program is feasible"
    );
    let report = check_focusing(known);
    ensure!(
        report.verdict == belief_forge_core::Verdict::ProvablyImpossible,
        "report verdict {:?}",
        report.verdict
    );
    Ok(flagged.len())
}

pub fn check_table_is_belief(t: &BeliefTable) -> Check {
    let m = t.to_mass().map_err(|e| e.to_string())?;
    ensure!(m.belief_table().unwrap() == *t, "table roundtrip");
    Ok(())
}

// ------------------------------------------------------------------ suite

/// Outcome of one property over a set of instances.
pub struct PropertyLine {
    pub name: String,
    pub cases: usize,
    pub outcome: Check,
}

fn run<T>(name: &str, instances: &[T], mut f: impl FnMut(&T) -> Check) -> PropertyLine {
    let mut outcome = Ok(());
    for (i, x) in instances.iter().enumerate() {
        if let Err(e) = f(x) {
            outcome = Err(format!("instance {i}: {e}"));
            break;
        }
    }
    PropertyLine {
        name: name.to_string(),
        cases: instances.len(),
        outcome,
    }
}

/// The property battery: `cases` seeded random instances per property,
/// then an exhaustive sweep. Mass-level properties sweep every focal
/// support on frames of up to `exhaustive_n` elements; LP-backed ones sweep
/// the families of [`exhaustive_lp_families`].
pub fn property_suite(seed: u64, cases: usize, exhaustive_n: usize) -> Vec<PropertyLine> {
    let mut lines = Vec::new();
    let mut r = rng(seed);
    let supports: Vec<MassAssignment> = exhaustive_masses(exhaustive_n).collect();
    let families = exhaustive_lp_families(exhaustive_n);
    let random_masses: Vec<MassAssignment> = (0..cases)
        .map(|_| {
            let n = r.gen_range(1..=5);
            random_mass(&mut r, n, 6)
        })
        .collect();
    let both = |name: &str, f: fn(&MassAssignment) -> Check| {
        vec![
            run(&format!("{name} (random)"), &random_masses, |m| f(m)),
            run(&format!("{name} (exhaustive)"), &supports, |m| f(m)),
        ]
    };

    lines.extend(both("Möbius roundtrip", check_mobius_roundtrip));

    let defect_random: Vec<(MassAssignment, Vec<Subset>)> = (0..cases)
        .map(|_| {
            let n = r.gen_range(1..=5);
            let m = random_mass(&mut r, n, 6);
            let k = r.gen_range(1..=3);
            let sets = (0..k)
                .map(|_| Subset::from_bits(r.gen_range(0..1u64 << n)))
                .collect();
            (m, sets)
        })
        .collect();
    lines.push(run(
        "superadditivity defect (random)",
        &defect_random,
        |(m, sets)| check_superadditivity(m, sets),
    ));
    let mut defect_all = Vec::new();
    for n in 1..=exhaustive_n {
        let m = reference_mass(n);
        let subsets = all_subsets(n);
        for a in &subsets {
            for b in &subsets {
                defect_all.push((m.clone(), vec![*a, *b]));
                if n <= 3 {
                    for c in &subsets {
                        defect_all.push((m.clone(), vec![*a, *b, *c]));
                    }
                }
            }
        }
    }
    lines.push(run(
        "superadditivity defect (exhaustive)",
        &defect_all,
        |(m, sets)| check_superadditivity(m, sets),
    ));

    let bel_h_random: Vec<(MassAssignment, KnownBeliefs, Vec<Subset>)> = (0..cases)
        .map(|_| {
            let n = r.gen_range(1..=5);
            let (m, known) = random_focal_instance(&mut r, n);
            let members: Vec<Subset> = known.family().iter().collect();
            let k = r.gen_range(0..=members.len().min(4));
            let query = members.choose_multiple(&mut r, k).copied().collect();
            (m, known, query)
        })
        .collect();
    lines.push(run(
        "BEL_H recursion vs mass sums (random)",
        &bel_h_random,
        |(m, k, q)| check_bel_h(m, k, q),
    ));
    let bel_h_all: Vec<(MassAssignment, KnownBeliefs)> = families
        .iter()
        .map(|(n, f)| {
            let m = mass_on(*n, f);
            let k = KnownBeliefs::from_mass(&m, f).unwrap();
            (m, k)
        })
        .collect();
    lines.push(run(
        "BEL_H recursion vs mass sums (exhaustive)",
        &bel_h_all,
        |(m, k)| {
            let members: Vec<Subset> = k.family().iter().collect();
            for a in &members {
                for b in &members {
                    check_bel_h(m, k, &[*a, *b])?;
                }
            }
            check_bel_h(m, k, &members)
        },
    ));

    lines.extend(both(
        "focal-value reconstruction",
        check_focal_reconstruction,
    ));
    lines.extend(both("Bel ≤ Pl and duality", check_plausibility));
    lines.extend(both("focusing idempotence", check_focusing_idempotent));

    let restriction_random: Vec<KnownBeliefs> = (0..cases)
        .map(|i| {
            let n = r.gen_range(2..=4);
            if i % 2 == 0 {
                random_focal_instance(&mut r, n).1
            } else {
                random_monotone_known(&mut r, n, false)
            }
        })
        .collect();
    lines.push(run(
        "closure restriction keeps the optimum (random)",
        &restriction_random,
        check_closure_restriction,
    ));
    let restriction_all: Vec<KnownBeliefs> = families
        .iter()
        .map(|(n, f)| KnownBeliefs::from_mass(&reference_mass(*n), f).unwrap())
        .collect();
    lines.push(run(
        "closure restriction keeps the optimum (exhaustive)",
        &restriction_all,
        check_closure_restriction,
    ));

    let closed_random: Vec<KnownBeliefs> = (0..cases)
        .map(|_| {
            let n = r.gen_range(1..=4);
            random_closed_instance(&mut r, n)
        })
        .collect();
    let mut closed_all: Vec<KnownBeliefs> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for (n, f) in &families {
        let mut f = f.clone();
        f.insert(Subset::full(*n));
        let closed = f.intersection_closure();
        if seen.insert((*n, closed.members().to_vec())) {
            closed_all.push(KnownBeliefs::from_mass(&reference_mass(*n), &closed).unwrap());
        }
    }
    lines.push(run(
        "closed family: direct = focusing = min-spec (random)",
        &closed_random,
        check_closed_agreement,
    ));
    lines.push(run(
        "closed family: direct = focusing = min-spec (exhaustive)",
        &closed_all,
        check_closed_agreement,
    ));

    let mut sample_rng = rng(seed ^ 0x5a5a);
    lines.push(run(
        "closed direct solution is least committed (random)",
        &closed_random,
        |k| check_closed_least_committed(&mut sample_rng, k, 50),
    ));
    lines.push(run(
        "closed direct solution is least committed (exhaustive)",
        &closed_all,
        |k| check_closed_least_committed(&mut sample_rng, k, 50),
    ));

    let focusing_random: Vec<KnownBeliefs> = (0..cases)
        .map(|_| {
            let n = r.gen_range(2..=4);
            random_focal_instance(&mut r, n).1
        })
        .collect();
    lines.push(run(
        "focusing solution is least committed (random)",
        &focusing_random,
        |k| check_focusing_least_committed(&mut sample_rng, k, 50),
    ));
    lines.push(run(
        "focusing solution is least committed (exhaustive)",
        &bel_h_all,
        |(_, k)| check_focusing_least_committed(&mut sample_rng, k, 50),
    ));

    let impossible_random: Vec<KnownBeliefs> = (0..cases)
        .map(|i| {
            let n = r.gen_range(2..=4);
            random_monotone_known(&mut r, n, i % 2 == 0)
        })
        .collect();
    let grid = [
        int(0),
        Rational::new(2.into(), 5.into()),
        Rational::new(3.into(), 5.into()),
        int(1),
    ];
    let mut impossible_all = Vec::new();
    for n in 2..=exhaustive_n.min(4) {
        let size = if n <= 3 { 3 } else { 2 };
        for f in exhaustive_families(n, size) {
            impossible_all.extend(exhaustive_grid_values(n, &f, &grid));
        }
    }
    for (name, instances) in [
        (
            "impossibility implies an infeasible full program (random)",
            &impossible_random,
        ),
        (
            "impossibility implies an infeasible full program (exhaustive)",
            &impossible_all,
        ),
    ] {
        let mut flagged = 0;
        let mut line = run(name, instances, |k| {
            flagged += check_impossible_sound(k)?;
            Ok(())
        });
        if line.outcome.is_ok() && flagged == 0 {
            line.outcome = Err("no instance triggered the impossibility test".into());
        }
        lines.push(line);
    }
    lines
}
