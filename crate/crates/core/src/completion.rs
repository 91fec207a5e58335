//! Completion engines: minimum specificity with symmetric averaging, the
//! direct solution for intersection-closed families, focusing, and stepwise
//! weak focusing. Also the existence checks that decide which applies.

use std::collections::HashSet;

use num_traits::{Signed, Zero};

use crate::belief::{inclusion_exclusion, KnownBeliefs, MassAssignment};
use crate::error::{Error, Result};
use crate::frame::{SetFamily, Subset};
use crate::lp::{
    centroid, optimal_face_vertices, BasisColumn, LinearProgram, LpOutcome, DEFAULT_VERTEX_CAP,
};
use crate::value::{int, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    /// Some condition fails, but values for further intersections could
    /// still make a compatible belief with focal elements in the family.
    FocusingInapplicable,
    /// A failing condition involves only known sets: no compatible belief exists.
    ProvablyImpossible,
}

/// Which family of conditions a report checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionKind {
    /// `Bel(A) ≥ Σ (−1)^{|I|+1} Bel(⋂ B_i)` on an intersection-closed family.
    Closed,
    /// `Bel(A) ≥ Σ (−1)^{|I|+1} BEL_H(⋀ B_i)` on an arbitrary family.
    Focusing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionRecord {
    pub set: Subset,
    /// `T_A`: maximal known sets strictly inside `set`.
    pub lower_family: SetFamily,
    /// Right-hand side of the condition.
    pub bound: Rational,
    /// `Bel(set) − bound`; the condition holds when this is nonnegative.
    pub residual: Rational,
    pub passed: bool,
    pub provably_impossible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExistenceReport {
    pub kind: ConditionKind,
    pub records: Vec<ConditionRecord>,
    pub verdict: Verdict,
}

impl ExistenceReport {
    fn from_records(kind: ConditionKind, records: Vec<ConditionRecord>) -> Self {
        let verdict = if records.iter().any(|r| r.provably_impossible) {
            Verdict::ProvablyImpossible
        } else if records.iter().any(|r| !r.passed) {
            Verdict::FocusingInapplicable
        } else {
            Verdict::Consistent
        };
        Self {
            kind,
            records,
            verdict,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionRecord> {
        self.records.iter().filter(|r| !r.passed)
    }

    pub fn first_impossible(&self) -> Option<Subset> {
        self.records
            .iter()
            .find(|r| r.provably_impossible)
            .map(|r| r.set)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    MinSpecificity,
    ClosedDirect,
    Focusing,
    /// Weak focusing that succeeded once intersections of up to `j` known sets were admitted.
    Stepwise(usize),
}

impl Method {
    pub fn tag(&self) -> String {
        match self {
            Method::MinSpecificity => "min-specificity".into(),
            Method::ClosedDirect => "closed-direct".into(),
            Method::Focusing => "focusing".into(),
            Method::Stepwise(j) => format!("stepwise({j})"),
        }
    }
}

/// How the returned mass was singled out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    /// Closed-form answer; no optimization involved.
    Direct,
    /// The optimum is a single vertex.
    Unique,
    /// Mean of this many distinct optimal vertices.
    Averaged { vertices: usize },
    /// Too many variables to enumerate the optimal face; one optimal vertex
    /// is returned and it may not be the only one.
    NotEnumerated { variables: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub mass: MassAssignment,
    pub method: Method,
    pub symmetry: Symmetry,
    pub diagnostics: ExistenceReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompletionOptions {
    /// Largest variable count for which the optimal face is enumerated.
    pub vertex_cap: usize,
}

impl Default for CompletionOptions {
    fn default() -> Self {
        Self {
            vertex_cap: DEFAULT_VERTEX_CAP,
        }
    }
}

fn value_of(known: &KnownBeliefs, x: Subset) -> Rational {
    known
        .value(x)
        .cloned()
        .expect("intersection of known sets is known")
}

/// Existence conditions for an intersection-closed family. A failure there
/// proves that no compatible belief function exists.
pub fn check_closed(known: &KnownBeliefs) -> Result<ExistenceReport> {
    let family = known.family();
    if let Some((a, b)) = family.closure_witness() {
        let frame = known.frame();
        return Err(Error::FamilyNotClosed {
            a: frame.render(a),
            b: frame.render(b),
        });
    }
    let records = family
        .iter()
        .filter(|a| !a.is_empty())
        .map(|a| {
            let lower = family.strict_lower_family(a);
            let bound = inclusion_exclusion(lower.members(), |x| value_of(known, x));
            let residual = value_of(known, a) - &bound;
            let passed = !residual.is_negative();
            ConditionRecord {
                set: a,
                lower_family: lower,
                bound,
                residual,
                passed,
                provably_impossible: !passed,
            }
        })
        .collect();
    Ok(ExistenceReport::from_records(
        ConditionKind::Closed,
        records,
    ))
}

/// Belief of any set under the direct solution for a closed family:
/// known values on the family, inclusion–exclusion over `T_A` elsewhere.
pub fn closed_belief(known: &KnownBeliefs, a: Subset) -> Result<Rational> {
    if let Some(v) = known.value(a) {
        return Ok(v.clone());
    }
    let family = known.family();
    if let Some((x, y)) = family.closure_witness() {
        return Err(Error::FamilyNotClosed {
            a: known.frame().render(x),
            b: known.frame().render(y),
        });
    }
    let lower = family.strict_lower_family(a);
    Ok(inclusion_exclusion(lower.members(), |x| value_of(known, x)))
}

/// Least committed completion of values on an intersection-closed family.
pub fn complete_closed(known: &KnownBeliefs) -> Result<CompletionResult> {
    let report = check_closed(known)?;
    if let Some(at) = report.first_impossible() {
        return Err(Error::Impossible {
            at: known.frame().render(at),
            report: Box::new(report),
        });
    }
    let mass = known.mass_on_family().to_mass_assignment()?;
    Ok(CompletionResult {
        mass,
        method: Method::ClosedDirect,
        symmetry: Symmetry::Direct,
        diagnostics: report,
    })
}

/// Existence conditions for a compatible belief whose focal elements all lie
/// in the known family. Each residual equals the signed family mass of its set.
pub fn check_focusing(known: &KnownBeliefs) -> ExistenceReport {
    let family = known.family();
    let masses = known.mass_on_family();
    let records = family
        .iter()
        .filter(|a| !a.is_empty())
        .map(|a| {
            let lower = family.strict_lower_family(a);
            let bound = masses.lower_bound(a);
            let residual = value_of(known, a) - &bound;
            let passed = !residual.is_negative();
            ConditionRecord {
                set: a,
                lower_family: lower,
                bound,
                residual,
                passed,
                provably_impossible: !passed && detect_impossible(known, a),
            }
        })
        .collect();
    ExistenceReport::from_records(ConditionKind::Focusing, records)
}

/// Least committed completion among beliefs with focal elements in the known family.
pub fn complete_focusing(known: &KnownBeliefs) -> Result<CompletionResult> {
    let report = check_focusing(known);
    if report.verdict != Verdict::Consistent {
        return Err(Error::FocusingInapplicable(Box::new(report)));
    }
    let mass = known.mass_on_family().to_mass_assignment()?;
    Ok(CompletionResult {
        mass,
        method: Method::Focusing,
        symmetry: Symmetry::Direct,
        diagnostics: report,
    })
}

/// Distinct intersections `⋂_{i∈I} B_i` for nonempty `I`, with the smallest
/// `|I|` that produces each, ordered by that size and then canonically.
fn intersections_by_order(sets: &[Subset]) -> Vec<(usize, Subset)> {
    fn walk(
        sets: &[Subset],
        start: usize,
        acc: Subset,
        depth: usize,
        out: &mut Vec<(usize, Subset)>,
    ) {
        for i in start..sets.len() {
            let x = acc.intersection(sets[i]);
            out.push((depth, x));
            if !x.is_empty() {
                walk(sets, i + 1, x, depth + 1, out);
            }
        }
    }
    let mut all = Vec::new();
    walk(sets, 0, Subset::from_bits(u64::MAX), 1, &mut all);
    all.sort();
    let mut seen = HashSet::new();
    all.retain(|(_, x)| seen.insert(*x));
    all.sort();
    all
}

/// True when the condition at `a` fails although every intersection of
/// members of `T_A` is already known; then no compatible belief exists at all.
pub fn detect_impossible(known: &KnownBeliefs, a: Subset) -> bool {
    let Some(bel_a) = known.value(a) else {
        return false;
    };
    let family = known.family();
    let lower = family.strict_lower_family(a);
    let all_known = intersections_by_order(lower.members())
        .iter()
        .all(|(_, x)| family.contains(*x));
    if !all_known {
        return false;
    }
    let bound = inclusion_exclusion(lower.members(), |x| value_of(known, x));
    *bel_a < bound
}

/// The next set to ask an expert about, or `None` when the focusing
/// conditions hold or some failure is already provably impossible.
///
/// Takes the first failing set `B` in canonical order and picks, among the
/// unknown intersections of members of `T_B`, one built from the fewest
/// members; ties go to the canonically smallest set.
pub fn next_question(known: &KnownBeliefs) -> Option<Subset> {
    next_question_from(known, &check_focusing(known))
}

pub(crate) fn next_question_from(known: &KnownBeliefs, report: &ExistenceReport) -> Option<Subset> {
    if report.verdict == Verdict::ProvablyImpossible {
        return None;
    }
    let family = known.family();
    report.failures().find_map(|rec| {
        intersections_by_order(rec.lower_family.members())
            .into_iter()
            .find(|(_, x)| !family.contains(*x))
            .map(|(_, x)| x)
    })
}

/// The minimum specificity program restricted to `variables`: minimize `Σ m(A)/|A|` subject to
/// `Σ_{A⊆A_i} m(A) = a_i` for every known nonempty `A_i`.
pub fn specificity_program(known: &KnownBeliefs, variables: &[Subset]) -> LinearProgram {
    let objective = variables
        .iter()
        .map(|a| Rational::new(1.into(), (a.len() as i64).into()))
        .collect();
    let (rows, rhs) = known
        .entries()
        .filter(|(a, _)| !a.is_empty())
        .map(|(a, v)| {
            let row = variables
                .iter()
                .map(|b| {
                    if b.is_subset_of(a) {
                        int(1)
                    } else {
                        Rational::zero()
                    }
                })
                .collect::<Vec<_>>();
            (row, v.clone())
        })
        .unzip();
    LinearProgram::new(objective, rows, rhs).expect("rows sized to the variables")
}

/// Turns an optimal outcome into a mass, averaging the optimal face.
fn symmetric_mass(
    known: &KnownBeliefs,
    variables: &[Subset],
    lp: &LinearProgram,
    outcome: &LpOutcome,
    options: &CompletionOptions,
) -> Result<(MassAssignment, Symmetry)> {
    let (point, symmetry) = match optimal_face_vertices(lp, outcome, options.vertex_cap) {
        Ok(vertices) => {
            let symmetry = match vertices.len() {
                1 => Symmetry::Unique,
                k => Symmetry::Averaged { vertices: k },
            };
            (centroid(&vertices), symmetry)
        }
        Err(Error::CapExceeded { variables, cap }) => (
            outcome
                .vertex
                .clone()
                .expect("optimal outcome has a vertex"),
            Symmetry::NotEnumerated { variables, cap },
        ),
        Err(e) => return Err(e),
    };
    let mass = MassAssignment::new(known.frame().clone(), variables.iter().copied().zip(point))?;
    Ok((mass, symmetry))
}

fn infeasible(known: &KnownBeliefs) -> Error {
    Error::Infeasible(Box::new(check_focusing(known)))
}

/// Minimum-specificity completion over the intersection closure of the
/// known family, averaged over the optimal face.
pub fn complete_min_specificity(
    known: &KnownBeliefs,
    options: &CompletionOptions,
) -> Result<CompletionResult> {
    let variables: Vec<Subset> = known
        .family()
        .intersection_closure()
        .iter()
        .filter(|a| !a.is_empty())
        .collect();
    let lp = specificity_program(known, &variables);
    let outcome = lp.solve();
    if !outcome.is_optimal() {
        return Err(infeasible(known));
    }
    let (mass, symmetry) = symmetric_mass(known, &variables, &lp, &outcome, options)?;
    Ok(CompletionResult {
        mass,
        method: Method::MinSpecificity,
        symmetry,
        diagnostics: check_focusing(known),
    })
}

/// Minimum specificity with candidate focal sets admitted in layers: first
/// the known sets, then intersections of two of them, then of three, and so
/// on, stopping at the first layer with a feasible program.
pub fn complete_stepwise(
    known: &KnownBeliefs,
    options: &CompletionOptions,
) -> Result<CompletionResult> {
    let family = known.family();
    let strata = family.strata_up_to(family.len());
    let mut variables: Vec<Subset> = Vec::new();
    let mut warm: Option<Vec<BasisColumn>> = None;
    for (idx, stratum) in strata.iter().enumerate() {
        let fresh: Vec<Subset> = stratum
            .iter()
            .filter(|a| !a.is_empty() && !variables.contains(a))
            .collect();
        if fresh.is_empty() && idx > 0 {
            continue;
        }
        // appended, so earlier column indices stay valid for the warm start
        variables.extend(fresh);
        let lp = specificity_program(known, &variables);
        let outcome = match &warm {
            Some(basis) => lp.solve_from(basis),
            None => lp.solve(),
        };
        if outcome.is_optimal() {
            let (mass, symmetry) = symmetric_mass(known, &variables, &lp, &outcome, options)?;
            return Ok(CompletionResult {
                mass,
                method: Method::Stepwise(idx + 1),
                symmetry,
                diagnostics: check_focusing(known),
            });
        }
        warm = Some(outcome.phase_one_basis);
    }
    Err(infeasible(known))
}
