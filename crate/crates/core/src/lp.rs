//! Exact two-phase simplex for `min c·x  s.t.  Ax = b, x ≥ 0`, plus
//! enumeration of every vertex of the optimal face.
//!
//! All arithmetic is over arbitrary-precision rationals and both phases use
//! Bland's rule, so degeneracy cannot cause cycling.

use std::collections::{BTreeSet, HashSet, VecDeque};

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::value::Rational;

/// Default bound on the number of variables for optimal-face enumeration.
pub const DEFAULT_VERTEX_CAP: usize = 24;

/// Bound on the number of bases visited while walking an optimal face.
const MAX_FACE_BASES: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    objective: Vec<Rational>,
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
}

impl LinearProgram {
    pub fn new(
        objective: Vec<Rational>,
        rows: Vec<Vec<Rational>>,
        rhs: Vec<Rational>,
    ) -> Result<Self> {
        if rows.len() != rhs.len() {
            return Err(Error::MalformedProgram(format!(
                "{} rows but {} right-hand sides",
                rows.len(),
                rhs.len()
            )));
        }
        if let Some((i, r)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.len() != objective.len())
        {
            return Err(Error::MalformedProgram(format!(
                "row {i} has {} coefficients, expected {}",
                r.len(),
                objective.len()
            )));
        }
        Ok(Self {
            objective,
            rows,
            rhs,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn objective(&self) -> &[Rational] {
        &self.objective
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    pub fn rhs(&self) -> &[Rational] {
        &self.rhs
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// `Ax = b` and `x ≥ 0`, exactly.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars()
            && x.iter().all(|v| !v.is_negative())
            && self.rows.iter().zip(&self.rhs).all(|(row, b)| {
                let lhs: Rational = row.iter().zip(x).map(|(a, v)| a * v).sum();
                lhs == *b
            })
    }

    pub fn solve(&self) -> LpOutcome {
        Solver::new(self).run(None)
    }

    /// Starts phase one from a basis left by an earlier phase one on a
    /// program with the same rows and a prefix of these columns. Falls back
    /// to the artificial basis when the hint is not a feasible basis here.
    pub fn solve_from(&self, phase_one_basis: &[BasisColumn]) -> LpOutcome {
        Solver::new(self).run(Some(phase_one_basis))
    }
}

/// A basic column in phase one: an original variable or the artificial of a row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BasisColumn {
    Variable(usize),
    Artificial(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// A basic optimal solution.
    pub vertex: Option<Vec<Rational>>,
    pub objective: Option<Rational>,
    /// Optimal basis: one variable per row in `kept_rows`.
    pub basis: Vec<usize>,
    /// Rows left after dropping redundant equalities.
    pub kept_rows: Vec<usize>,
    /// Final phase-one basis; reusable as a warm start.
    pub phase_one_basis: Vec<BasisColumn>,
    /// Phase-one optimum: the least total constraint violation. Positive
    /// exactly when the program is infeasible.
    pub infeasibility: Rational,
}

impl LpOutcome {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Clone)]
struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn pivot(&mut self, r: usize, j: usize) {
        let p = self.rows[r][j].clone();
        for v in self.rows[r].iter_mut() {
            *v /= &p;
        }
        self.rhs[r] /= &p;
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][j].is_zero() {
                continue;
            }
            let f = self.rows[i][j].clone();
            for (v, pv) in self.rows[i].iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        self.basis[r] = j;
    }

    fn reduced_costs(&self, cost: &[Rational]) -> Vec<Rational> {
        let mut d = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (dj, a) in d.iter_mut().zip(row) {
                if !a.is_zero() {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    fn objective(&self, cost: &[Rational]) -> Rational {
        self.basis
            .iter()
            .zip(&self.rhs)
            .map(|(&b, v)| &cost[b] * v)
            .sum()
    }

    /// Minimum-ratio rows for entering column `j`; `None` if the column has
    /// no positive entry.
    fn ratio_rows(&self, j: usize) -> Option<Vec<usize>> {
        let mut best: Option<Rational> = None;
        let mut rows = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            let a = &row[j];
            if !a.is_positive() {
                continue;
            }
            let ratio = &self.rhs[i] / a;
            match &best {
                Some(b) if ratio > *b => {}
                Some(b) if ratio == *b => rows.push(i),
                _ => {
                    best = Some(ratio);
                    rows = vec![i];
                }
            }
        }
        best.map(|_| rows)
    }

    /// Bland's rule: lowest-index improving column, then the tied row whose
    /// basic variable has the lowest index.
    fn bland_step(&mut self, cost: &[Rational]) -> StepResult {
        let d = self.reduced_costs(cost);
        let Some(j) = d.iter().position(|v| v.is_negative()) else {
            return StepResult::Optimal;
        };
        match self.ratio_rows(j) {
            None => StepResult::Unbounded,
            Some(rows) => {
                let r = *rows
                    .iter()
                    .min_by_key(|&&i| self.basis[i])
                    .expect("nonempty ratio rows");
                self.pivot(r, j);
                StepResult::Pivoted
            }
        }
    }

    fn vertex(&self, num_vars: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); num_vars];
        for (&b, v) in self.basis.iter().zip(&self.rhs) {
            if b < num_vars {
                x[b] = v.clone();
            }
        }
        x
    }

    /// Tableau of `basis` for the system `rows · x = rhs`, by elimination.
    fn for_basis(rows: Vec<Vec<Rational>>, rhs: Vec<Rational>, basis: &[usize]) -> Option<Self> {
        let m = rows.len();
        let mut t = Tableau {
            rows,
            rhs,
            basis: vec![usize::MAX; m],
        };
        let mut assigned = vec![false; m];
        for &j in basis {
            let r = (0..m).find(|&i| !assigned[i] && !t.rows[i][j].is_zero())?;
            t.pivot(r, j);
            assigned[r] = true;
        }
        Some(t)
    }
}

enum StepResult {
    Pivoted,
    Optimal,
    Unbounded,
}

struct Solver<'a> {
    lp: &'a LinearProgram,
}

impl<'a> Solver<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        Self { lp }
    }

    /// Phase-one tableau over `[variables | artificials]` with `b ≥ 0`.
    fn phase_one_tableau(&self) -> Tableau {
        let n = self.lp.num_vars();
        let m = self.lp.num_rows();
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        for (i, (row, b)) in self.lp.rows.iter().zip(&self.lp.rhs).enumerate() {
            let flip = b.is_negative();
            let mut r: Vec<Rational> = row
                .iter()
                .map(|a| if flip { -a } else { a.clone() })
                .collect();
            r.extend((0..m).map(|k| {
                if k == i {
                    Rational::from_integer(1.into())
                } else {
                    Rational::zero()
                }
            }));
            rows.push(r);
            rhs.push(if flip { -b } else { b.clone() });
        }
        Tableau {
            rows,
            rhs,
            basis: (n..n + m).collect(),
        }
    }

    fn warm_tableau(&self, hint: &[BasisColumn]) -> Option<Tableau> {
        let n = self.lp.num_vars();
        let m = self.lp.num_rows();
        if hint.len() != m {
            return None;
        }
        let cols: Vec<usize> = hint
            .iter()
            .map(|c| match *c {
                BasisColumn::Variable(j) if j < n => Some(j),
                BasisColumn::Artificial(i) if i < m => Some(n + i),
                _ => None,
            })
            .collect::<Option<_>>()?;
        let start = self.phase_one_tableau();
        let t = Tableau::for_basis(start.rows, start.rhs, &cols)?;
        t.rhs.iter().all(|v| !v.is_negative()).then_some(t)
    }

    fn run(&self, hint: Option<&[BasisColumn]>) -> LpOutcome {
        let n = self.lp.num_vars();
        let m = self.lp.num_rows();
        let mut t = hint
            .and_then(|h| self.warm_tableau(h))
            .unwrap_or_else(|| self.phase_one_tableau());

        let mut cost1 = vec![Rational::zero(); n + m];
        for c in &mut cost1[n..] {
            *c = Rational::from_integer(1.into());
        }
        loop {
            match t.bland_step(&cost1) {
                StepResult::Pivoted => {}
                StepResult::Optimal => break,
                StepResult::Unbounded => unreachable!("phase one is bounded below by zero"),
            }
        }
        let infeasibility = t.objective(&cost1);
        let phase_one_basis: Vec<BasisColumn> = t
            .basis
            .iter()
            .map(|&b| {
                if b < n {
                    BasisColumn::Variable(b)
                } else {
                    BasisColumn::Artificial(b - n)
                }
            })
            .collect();
        if infeasibility.is_positive() {
            return LpOutcome {
                status: LpStatus::Infeasible,
                vertex: None,
                objective: None,
                basis: Vec::new(),
                kept_rows: Vec::new(),
                phase_one_basis,
                infeasibility,
            };
        }

        // Drive remaining artificials out of the basis; a row with no
        // nonzero original coefficient is a redundant equality.
        let mut kept: Vec<usize> = (0..m).collect();
        let mut r = 0;
        while r < t.rows.len() {
            if t.basis[r] >= n {
                match (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                    Some(j) => t.pivot(r, j),
                    None => {
                        t.rows.remove(r);
                        t.rhs.remove(r);
                        t.basis.remove(r);
                        kept.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
        for row in &mut t.rows {
            row.truncate(n);
        }

        let cost = &self.lp.objective;
        loop {
            match t.bland_step(cost) {
                StepResult::Pivoted => {}
                StepResult::Optimal => break,
                StepResult::Unbounded => {
                    return LpOutcome {
                        status: LpStatus::Unbounded,
                        vertex: None,
                        objective: None,
                        basis: t.basis,
                        kept_rows: kept,
                        phase_one_basis,
                        infeasibility,
                    };
                }
            }
        }
        LpOutcome {
            status: LpStatus::Optimal,
            vertex: Some(t.vertex(n)),
            objective: Some(t.objective(cost)),
            basis: t.basis,
            kept_rows: kept,
            phase_one_basis,
            infeasibility,
        }
    }
}

/// Every vertex of the optimal face, deduplicated, in lexicographic order.
///
/// Columns with positive reduced cost at the optimum vanish on the whole
/// optimal face; the remaining columns are explored by a breadth-first walk
/// over all feasible bases reachable by single pivots, which reaches every
/// vertex of the face.
pub fn optimal_face_vertices(
    lp: &LinearProgram,
    outcome: &LpOutcome,
    cap: usize,
) -> Result<Vec<Vec<Rational>>> {
    if !outcome.is_optimal() {
        return Err(Error::MalformedProgram(
            "optimal face requested for a non-optimal outcome".into(),
        ));
    }
    let n = lp.num_vars();
    if n > cap {
        return Err(Error::CapExceeded { variables: n, cap });
    }
    let rows: Vec<Vec<Rational>> = outcome
        .kept_rows
        .iter()
        .map(|&i| lp.rows[i].clone())
        .collect();
    let rhs: Vec<Rational> = outcome
        .kept_rows
        .iter()
        .map(|&i| lp.rhs[i].clone())
        .collect();
    let start = Tableau::for_basis(rows, rhs, &outcome.basis)
        .ok_or_else(|| Error::MalformedProgram("optimal basis is singular".into()))?;
    let d = start.reduced_costs(&lp.objective);
    if d.iter().any(|v| v.is_negative()) {
        return Err(Error::MalformedProgram("basis is not optimal".into()));
    }
    let face_cols: Vec<usize> = (0..n).filter(|&j| d[j].is_zero()).collect();

    let key = |t: &Tableau| {
        let mut b = t.basis.clone();
        b.sort_unstable();
        b
    };
    let mut seen: HashSet<Vec<usize>> = HashSet::from([key(&start)]);
    let mut vertices: BTreeSet<Vec<Rational>> = BTreeSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        vertices.insert(t.vertex(n));
        for &j in &face_cols {
            if t.basis.contains(&j) {
                continue;
            }
            let Some(rows) = t.ratio_rows(j) else {
                // a face direction with no blocking row
                return Err(Error::Unbounded);
            };
            for r in rows {
                let mut next = t.clone();
                next.pivot(r, j);
                if seen.insert(key(&next)) {
                    if seen.len() > MAX_FACE_BASES {
                        return Err(Error::CapExceeded { variables: n, cap });
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(vertices.into_iter().collect())
}

/// Unweighted mean of the given points.
pub fn centroid(points: &[Vec<Rational>]) -> Vec<Rational> {
    let Some(first) = points.first() else {
        return Vec::new();
    };
    let k = Rational::from_integer((points.len() as i64).into());
    (0..first.len())
        .map(|j| points.iter().map(|p| &p[j]).sum::<Rational>() / &k)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::{int, rat};

    fn lp(c: &[i64], rows: &[&[i64]], b: &[Rational]) -> LinearProgram {
        LinearProgram::new(
            c.iter().map(|&v| int(v)).collect(),
            rows.iter()
                .map(|r| r.iter().map(|&v| int(v)).collect())
                .collect(),
            b.to_vec(),
        )
        .unwrap()
    }

    #[test]
    fn trivial_program() {
        let p = lp(&[1, 0], &[&[1, 1]], &[int(1)]);
        let out = p.solve();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.objective, Some(int(0)));
        assert_eq!(out.vertex, Some(vec![int(0), int(1)]));
        let face = optimal_face_vertices(&p, &out, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(face, vec![vec![int(0), int(1)]]);
    }

    #[test]
    fn infeasible_program() {
        // x1 = 0.6, x2 = 0.6, x1 + x2 + x3 = 1
        let p = lp(
            &[1, 1, 1],
            &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 1]],
            &[rat(3, 5), rat(3, 5), int(1)],
        );
        let out = p.solve();
        assert_eq!(out.status, LpStatus::Infeasible);
        assert_eq!(out.infeasibility, rat(1, 5));
    }

    #[test]
    fn unbounded_program() {
        // min -x1 s.t. x1 - x2 = 0
        let p = lp(&[-1, 0], &[&[1, -1]], &[int(0)]);
        assert_eq!(p.solve().status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let p = lp(&[1, 2], &[&[1, 1], &[2, 2]], &[int(1), int(2)]);
        let out = p.solve();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.kept_rows.len(), 1);
        assert_eq!(out.vertex, Some(vec![int(1), int(0)]));
        assert!(p.is_feasible_point(out.vertex.as_ref().unwrap()));
    }

    #[test]
    fn negative_rhs_is_normalized() {
        let p = lp(&[1, 1], &[&[-1, -2]], &[int(-2)]);
        let out = p.solve();
        assert_eq!(out.objective, Some(int(1)));
        assert_eq!(out.vertex, Some(vec![int(0), int(1)]));
    }

    #[test]
    fn whole_face_is_enumerated() {
        // min 0 over the simplex x1 + x2 + x3 = 1: the face is the simplex
        let p = lp(&[0, 0, 0], &[&[1, 1, 1]], &[int(1)]);
        let out = p.solve();
        let face = optimal_face_vertices(&p, &out, DEFAULT_VERTEX_CAP).unwrap();
        assert_eq!(face.len(), 3);
        assert_eq!(centroid(&face), vec![rat(1, 3), rat(1, 3), rat(1, 3)]);
    }

    #[test]
    fn face_cap() {
        let p = lp(&[0, 0, 0], &[&[1, 1, 1]], &[int(1)]);
        let out = p.solve();
        assert!(matches!(
            optimal_face_vertices(&p, &out, 2),
            Err(Error::CapExceeded {
                variables: 3,
                cap: 2
            })
        ));
    }

    #[test]
    fn warm_start_matches_cold() {
        // stage 1: x1 = 0.6, x2 = 0.7, x1 + x2 + x3 = 1 — infeasible
        let stage1 = lp(
            &[1, 1, 1],
            &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 1]],
            &[rat(3, 5), rat(7, 10), int(1)],
        );
        let out1 = stage1.solve();
        assert_eq!(out1.status, LpStatus::Infeasible);
        // stage 2 adds a column shared by the first two rows
        let stage2 = lp(
            &[1, 1, 1, 2],
            &[&[1, 0, 0, 1], &[0, 1, 0, 1], &[1, 1, 1, 1]],
            &[rat(3, 5), rat(7, 10), int(1)],
        );
        let warm = stage2.solve_from(&out1.phase_one_basis);
        let cold = stage2.solve();
        assert_eq!(warm.status, LpStatus::Optimal);
        assert_eq!(warm.objective, cold.objective);
        assert!(stage2.is_feasible_point(warm.vertex.as_ref().unwrap()));
    }

    #[test]
    fn bad_warm_start_falls_back() {
        let p = lp(&[1, 0], &[&[1, 1]], &[int(1)]);
        let out = p.solve_from(&[BasisColumn::Variable(7)]);
        assert_eq!(out.objective, Some(int(0)));
    }

    #[test]
    fn malformed_programs() {
        assert!(
            LinearProgram::new(vec![int(1)], vec![vec![int(1), int(2)]], vec![int(1)]).is_err()
        );
        assert!(LinearProgram::new(vec![int(1)], vec![vec![int(1)]], vec![]).is_err());
    }
}
