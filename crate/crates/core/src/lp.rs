//! Dense two-phase tableau simplex with Bland's rule, generic over the scalar.
//!
//! Exact scalars give exact optima; Bland's rule guarantees termination on
//! degenerate problems, which are the norm for the polytopes in this crate.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Constraint<T> {
    pub coeffs: Vec<T>,
    pub rel: Relation,
    pub rhs: T,
}

/// `maximize objective . x` subject to the constraints, with `x_j >= 0`
/// unless `free[j]`.
#[derive(Debug, Clone)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub constraints: Vec<Constraint<T>>,
    pub free: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { value: T, x: Vec<T> },
    Infeasible,
    Unbounded,
}

impl<T> LpOutcome<T> {
    pub fn optimal(self) -> Result<(T, Vec<T>)> {
        match self {
            LpOutcome::Optimal { value, x } => Ok((value, x)),
            LpOutcome::Infeasible => Err(Error::Lp("infeasible")),
            LpOutcome::Unbounded => Err(Error::Lp("unbounded")),
        }
    }
}

impl<T: Scalar> LinearProgram<T> {
    pub fn new(objective: Vec<T>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            constraints: Vec::new(),
            free: vec![false; n],
        }
    }

    pub fn with_free_vars(mut self) -> Self {
        self.free.iter_mut().for_each(|f| *f = true);
        self
    }

    pub fn push(&mut self, coeffs: Vec<T>, rel: Relation, rhs: T) {
        debug_assert_eq!(coeffs.len(), self.objective.len());
        self.constraints.push(Constraint { coeffs, rel, rhs });
    }

    pub fn solve(&self) -> Result<LpOutcome<T>> {
        let n = self.objective.len();
        // column layout: original (split for free vars), slacks/surpluses, artificials
        let mut col_of: Vec<(usize, Option<usize>)> = Vec::with_capacity(n);
        let mut ncols = 0;
        for j in 0..n {
            if self.free[j] {
                col_of.push((ncols, Some(ncols + 1)));
                ncols += 2;
            } else {
                col_of.push((ncols, None));
                ncols += 1;
            }
        }
        let n_struct = ncols;
        let m = self.constraints.len();
        let rows: Vec<(Vec<T>, Relation, T)> = self
            .constraints
            .iter()
            .map(|c| {
                if c.coeffs.len() != n {
                    return Err(Error::LengthMismatch {
                        expected: n,
                        got: c.coeffs.len(),
                    });
                }
                let flip = c.rhs.sign() == Ordering::Less;
                let sgn = |v: &T| if flip { -v.clone() } else { v.clone() };
                let rel = match (c.rel, flip) {
                    (Relation::Le, true) => Relation::Ge,
                    (Relation::Ge, true) => Relation::Le,
                    (r, _) => r,
                };
                Ok((c.coeffs.iter().map(sgn).collect(), rel, sgn(&c.rhs)))
            })
            .collect::<Result<_>>()?;
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let first_art = n_struct + n_slack;
        ncols = first_art + n_art;

        let mut tab = Tableau {
            rows: Vec::with_capacity(m),
            obj: vec![T::zero(); ncols + 1],
            basis: Vec::with_capacity(m),
            ncols,
        };
        let (mut s, mut a) = (n_struct, first_art);
        for (coeffs, rel, rhs) in rows {
            let mut row = vec![T::zero(); ncols + 1];
            for (j, v) in coeffs.into_iter().enumerate() {
                let (p, q) = col_of[j];
                if let Some(q) = q {
                    row[q] = -v.clone();
                }
                row[p] = v;
            }
            row[ncols] = rhs;
            match rel {
                Relation::Le => {
                    row[s] = T::one();
                    tab.basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -T::one();
                    s += 1;
                    row[a] = T::one();
                    tab.basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = T::one();
                    tab.basis.push(a);
                    a += 1;
                }
            }
            tab.rows.push(row);
        }

        if n_art > 0 {
            let mut c1 = vec![T::zero(); ncols];
            for c in c1.iter_mut().skip(first_art) {
                *c = -T::one();
            }
            tab.set_objective(&c1);
            if !tab.run(ncols)? {
                return Err(Error::Lp("phase one unbounded"));
            }
            if tab.obj[ncols].sign() == Ordering::Less {
                return Ok(LpOutcome::Infeasible);
            }
            tab.drive_out_artificials(first_art);
        }

        let mut c2 = vec![T::zero(); ncols];
        for (j, v) in self.objective.iter().enumerate() {
            let (p, q) = col_of[j];
            c2[p] = v.clone();
            if let Some(q) = q {
                c2[q] = -v.clone();
            }
        }
        tab.set_objective(&c2);
        if !tab.run(first_art)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut colval = vec![T::zero(); n_struct];
        for (i, &b) in tab.basis.iter().enumerate() {
            if b < n_struct {
                colval[b] = tab.rows[i][ncols].clone();
            }
        }
        let x = col_of
            .iter()
            .map(|&(p, q)| match q {
                Some(q) => colval[p].clone() - colval[q].clone(),
                None => colval[p].clone(),
            })
            .collect();
        Ok(LpOutcome::Optimal {
            value: tab.obj[ncols].clone(),
            x,
        })
    }
}

struct Tableau<T> {
    rows: Vec<Vec<T>>,
    /// Reduced costs `c_B B^-1 A_j - c_j`; the last entry is the objective.
    obj: Vec<T>,
    basis: Vec<usize>,
    ncols: usize,
}

const MAX_PIVOTS: usize = 1_000_000;

impl<T: Scalar> Tableau<T> {
    fn set_objective(&mut self, c: &[T]) {
        let mut obj: Vec<T> = c.iter().map(|v| -v.clone()).collect();
        obj.push(T::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = &c[b];
            if cb.is_zero() {
                continue;
            }
            for (o, v) in obj.iter_mut().zip(&self.rows[i]) {
                if !v.is_zero() {
                    *o = o.clone() + cb.clone() * v.clone();
                }
            }
        }
        self.obj = obj;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c].clone();
        let nz: Vec<usize> = (0..=self.ncols)
            .filter(|&j| !self.rows[r][j].is_zero())
            .collect();
        if !p.is_one() {
            for &j in &nz {
                self.rows[r][j] = self.rows[r][j].clone() / p.clone();
            }
        }
        self.rows[r][c] = T::one();
        let prow = std::mem::take(&mut self.rows[r]);
        let eliminate = |row: &mut Vec<T>| {
            let f = row[c].clone();
            if f.is_zero() {
                return;
            }
            for &j in &nz {
                row[j] = row[j].clone() - f.clone() * prow[j].clone();
            }
            row[c] = T::zero();
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(&mut self.obj);
        self.rows[r] = prow;
        self.basis[r] = c;
    }

    /// Optimises over columns `< allowed`; false when unbounded.
    fn run(&mut self, allowed: usize) -> Result<bool> {
        for _ in 0..MAX_PIVOTS {
            let Some(c) = (0..allowed).find(|&j| self.obj[j].sign() == Ordering::Less) else {
                return Ok(true);
            };
            let mut leave: Option<usize> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if a.sign() != Ordering::Greater {
                    continue;
                }
                leave = Some(match leave {
                    None => i,
                    Some(l) => {
                        // rhs_i / a_i versus rhs_l / a_l
                        let lhs = self.rows[i][self.ncols].clone() * self.rows[l][c].clone();
                        let rhs = self.rows[l][self.ncols].clone() * a.clone();
                        match lhs.cmp_tol(&rhs) {
                            Ordering::Less => i,
                            Ordering::Equal if self.basis[i] < self.basis[l] => i,
                            _ => l,
                        }
                    }
                });
            }
            match leave {
                Some(r) => self.pivot(r, c),
                None => return Ok(false),
            }
        }
        Err(Error::Lp("pivot limit reached"))
    }

    fn drive_out_artificials(&mut self, first_art: usize) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= first_art {
                match (0..first_art).find(|&j| !self.rows[i][j].is_negligible()) {
                    Some(j) => self.pivot(i, j),
                    None => {
                        // redundant equality
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
}
