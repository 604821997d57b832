//! Finite-dimensional subspaces of a free space, their polyhedral norms in
//! basis coordinates, and linear maps between them.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};

use crate::error::{Error, Result};
use crate::free::FreeVector;
use crate::geom::vertices::lip_ball_vertices;
use crate::lp::{LinearProgram, Relation};
use crate::scalar::Scalar;

/// Rank by Gaussian elimination; exact for exact scalars.
pub fn rank<T: Scalar>(mut rows: Vec<Vec<T>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_negligible()) else {
            continue;
        };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        let prow = rows[r].clone();
        for row in rows.iter_mut().skip(r + 1) {
            if row[c].is_negligible() {
                continue;
            }
            let f = row[c].clone() / pivot.clone();
            for (x, y) in row.iter_mut().zip(&prow).skip(c) {
                *x = x.clone() - f.clone() * y.clone();
            }
        }
        r += 1;
    }
    r
}

/// Inverse of a square matrix by Gauss-Jordan elimination.
pub fn invert<T: Scalar>(m: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::SingularMap);
    }
    let mut a: Vec<Vec<T>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { T::one() } else { T::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_negligible()).ok_or(Error::SingularMap)?;
        a.swap(c, p);
        let pivot = a[c][c].clone();
        for x in a[c].iter_mut() {
            *x = x.clone() / pivot.clone();
        }
        let prow = a[c].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == c || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, y) in row.iter_mut().zip(&prow) {
                *x = x.clone() - f.clone() * y.clone();
            }
        }
    }
    Ok(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

#[derive(Debug, Clone)]
pub struct SubspaceBasis<'a, T> {
    vectors: Vec<FreeVector<'a, T>>,
}

impl<'a, T: Scalar> SubspaceBasis<'a, T> {
    pub fn new(vectors: Vec<FreeVector<'a, T>>) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::Invalid("empty basis".into()));
        };
        let space = first.space();
        if vectors.iter().any(|v| !std::ptr::eq(v.space(), space) && v.space() != space) {
            return Err(Error::SubspaceMismatch("basis vectors live on different spaces".into()));
        }
        let rows: Vec<Vec<T>> = vectors.iter().map(FreeVector::dense).collect();
        if rank(rows) < vectors.len() {
            return Err(Error::SingularBasis);
        }
        Ok(SubspaceBasis { vectors })
    }

    pub fn vectors(&self) -> &[FreeVector<'a, T>] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn space(&self) -> &'a crate::metric::PointedMetricSpace<T> {
        self.vectors[0].space()
    }

    /// Points carrying mass in some basis vector, plus the base, in index order.
    pub fn support(&self) -> Vec<usize> {
        let mut s: BTreeSet<usize> = self.vectors.iter().flat_map(|v| v.coeffs().keys().copied()).collect();
        s.insert(self.space().base());
        s.into_iter().collect()
    }

    /// `sum a_i e_i`.
    pub fn combine(&self, a: &[T]) -> Result<FreeVector<'a, T>> {
        if a.len() != self.dim() {
            return Err(Error::LengthMismatch {
                expected: self.dim(),
                got: a.len(),
            });
        }
        let mut acc = FreeVector::zero(self.space());
        for (v, c) in self.vectors.iter().zip(a) {
            acc = acc.add(&v.scale(c));
        }
        Ok(acc)
    }

    /// The norm in coordinates is `||a|| = max_w |w . a|` over the returned
    /// rows `w = (<e_i, f>)_i`, `f` running over the vertices of the
    /// Lipschitz ball of the support subspace. Rows are deduplicated up to
    /// sign.
    pub fn norm_rows(&self) -> Result<Vec<Vec<T>>> {
        let support = self.support();
        let sub = self.space().restrict_subspace(&support)?;
        let ball = lip_ball_vertices(&sub)?;
        let mut seen = HashSet::new();
        let mut rows = Vec::new();
        for v in ball.vertex_values() {
            let mut w: Vec<T> = self
                .vectors
                .iter()
                .map(|e| {
                    e.coeffs()
                        .iter()
                        .map(|(&x, a)| {
                            let p = support.binary_search(&x).expect("support contains x");
                            a.clone() * v[p].clone()
                        })
                        .fold(T::zero(), |s, t| s + t)
                })
                .collect();
            if w.iter().all(Scalar::is_negligible) {
                continue;
            }
            if w.iter().find(|x| !x.is_negligible()).map(Scalar::sign) == Some(Ordering::Less) {
                w = w.into_iter().map(|x| -x).collect();
            }
            let key = w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            if seen.insert(key) {
                rows.push(w);
            }
        }
        Ok(rows)
    }

    /// `max_a u . a` subject to `||sum a_i e_i|| <= 1`.
    pub fn support_function(&self, rows: &[Vec<T>], u: &[T]) -> Result<T> {
        let mut lp = LinearProgram::new(u.to_vec()).with_free_vars();
        for w in rows {
            lp.push(w.clone(), Relation::Le, T::one());
            lp.push(w.iter().map(|x| -x.clone()).collect(), Relation::Le, T::one());
        }
        Ok(lp.solve()?.optimal()?.0)
    }
}

/// `e_i -> sum_j matrix[j][i] e'_j`.
#[derive(Debug, Clone)]
pub struct SubspaceMap<'a, 'b, T> {
    pub domain: SubspaceBasis<'a, T>,
    pub codomain: SubspaceBasis<'b, T>,
    pub matrix: Vec<Vec<T>>,
}

impl<'a, 'b, T: Scalar> SubspaceMap<'a, 'b, T> {
    pub fn new(domain: SubspaceBasis<'a, T>, codomain: SubspaceBasis<'b, T>, matrix: Vec<Vec<T>>) -> Result<Self> {
        if matrix.len() != codomain.dim() || matrix.iter().any(|r| r.len() != domain.dim()) {
            return Err(Error::LengthMismatch {
                expected: codomain.dim() * domain.dim(),
                got: matrix.iter().map(Vec::len).sum(),
            });
        }
        Ok(SubspaceMap {
            domain,
            codomain,
            matrix,
        })
    }

    /// The map sending `e_i` to `e'_i`.
    pub fn coordinatewise(domain: SubspaceBasis<'a, T>, codomain: SubspaceBasis<'b, T>) -> Result<Self> {
        let m = domain.dim();
        let id = (0..m)
            .map(|i| (0..m).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect();
        Self::new(domain, codomain, id)
    }

    pub fn inverse(&self) -> Result<SubspaceMap<'b, 'a, T>> {
        Ok(SubspaceMap {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            matrix: invert(&self.matrix)?,
        })
    }
}

/// `||T|| = max_{w'} h(M^T w')`, with `w'` over the codomain norm rows and
/// `h` the support function of the domain unit ball.
pub fn operator_norm_poly<T: Scalar>(map: &SubspaceMap<'_, '_, T>) -> Result<T> {
    let dom_rows = map.domain.norm_rows()?;
    let cod_rows = map.codomain.norm_rows()?;
    let n = map.domain.dim();
    let mut best = T::zero();
    for w in &cod_rows {
        let u: Vec<T> = (0..n)
            .map(|i| {
                map.matrix
                    .iter()
                    .zip(w)
                    .map(|(row, wj)| row[i].clone() * wj.clone())
                    .fold(T::zero(), |s, t| s + t)
            })
            .collect();
        best = T::max_of(best, map.domain.support_function(&dom_rows, &u)?);
    }
    Ok(best)
}

/// `||T|| ||T^-1||`, an upper bound on the Banach-Mazur distance.
pub fn bm_upper_bound<T: Scalar>(map: &SubspaceMap<'_, '_, T>) -> Result<T> {
    let inv = map.inverse()?;
    Ok(operator_norm_poly(map)? * operator_norm_poly(&inv)?)
}

/// Smallest `D` with `sum |a_i| <= D ||sum a_i e_i||`, from the polyhedral
/// norm: `D = max_s h(s)` over sign vectors `s` with `s_0 = +1`.
pub fn domination_constant<T: Scalar>(basis: &SubspaceBasis<'_, T>) -> Result<T> {
    let rows = basis.norm_rows()?;
    let m = basis.dim();
    let mut best = T::zero();
    for mask in 0..(1u64 << (m - 1)) {
        let s: Vec<T> = (0..m)
            .map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { -T::one() } else { T::one() })
            .collect();
        best = T::max_of(best, basis.support_function(&rows, &s)?);
    }
    Ok(best)
}

/// `1/D` as a transport problem: the least norm of `sum s_i b_i e_i` over
/// sign vectors `s` and weights `b` in the simplex, each norm written as a
/// min-cost flow on the support. Needs no vertex enumeration, and with a
/// rational basis the only irrational data are the arc costs.
pub fn inverse_domination_transport<T: Scalar>(basis: &SubspaceBasis<'_, T>) -> Result<T> {
    let space = basis.space();
    let nodes = basis.support();
    let base = space.base();
    let m = basis.dim();
    let p = nodes.len();
    let arcs: Vec<(usize, usize)> = (0..p)
        .flat_map(|u| (0..p).filter(move |&v| v != u).map(move |v| (u, v)))
        .collect();
    let nvars = m + arcs.len();
    let mut best: Option<T> = None;
    for mask in 0..(1u64 << (m - 1)) {
        let sign = |i: usize| if i > 0 && mask >> (i - 1) & 1 == 1 { -T::one() } else { T::one() };
        let mut objective = vec![T::zero(); nvars];
        for (a, &(u, v)) in arcs.iter().enumerate() {
            objective[m + a] = -space.d(nodes[u], nodes[v]).clone();
        }
        let mut lp = LinearProgram::new(objective);
        for (ui, &u) in nodes.iter().enumerate() {
            if u == base {
                continue;
            }
            // outflow - inflow - sum_i s_i b_i e_i(u) = 0
            let mut row = vec![T::zero(); nvars];
            for (i, e) in basis.vectors().iter().enumerate() {
                row[i] = -(sign(i) * e.coeff(u));
            }
            for (a, &(x, y)) in arcs.iter().enumerate() {
                if x == ui {
                    row[m + a] = T::one();
                } else if y == ui {
                    row[m + a] = -T::one();
                }
            }
            lp.push(row, Relation::Eq, T::zero());
        }
        let mut simplex = vec![T::zero(); nvars];
        simplex[..m].iter_mut().for_each(|x| *x = T::one());
        lp.push(simplex, Relation::Eq, T::one());
        let nu = -lp.solve()?.optimal()?.0;
        best = Some(match best {
            None => nu,
            Some(b) => T::min_of(b, nu),
        });
    }
    let nu = best.expect("at least one sign pattern");
    if nu.sign() != Ordering::Greater {
        return Err(Error::SingularBasis);
    }
    Ok(nu)
}
