//! Finitely supported elements of the free space and their norm, computed
//! both as a min-cost transport problem and as a linear program over
//! 1-Lipschitz functions.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::flow::min_cost_flow;
use crate::lip::LipFunction;
use crate::lp::{LinearProgram, Relation};
use crate::metric::PointedMetricSpace;
use crate::scalar::Scalar;

/// `sum a_i delta_{x_i}`, with `delta_base = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeVector<'a, T> {
    space: &'a PointedMetricSpace<T>,
    coeffs: BTreeMap<usize, T>,
}

impl<'a, T: Scalar> FreeVector<'a, T> {
    /// Drops zero coefficients and any weight on the base point.
    pub fn new(space: &'a PointedMetricSpace<T>, coeffs: impl IntoIterator<Item = (usize, T)>) -> Result<Self> {
        let mut map: BTreeMap<usize, T> = BTreeMap::new();
        for (i, a) in coeffs {
            if i >= space.len() {
                return Err(Error::IndexOutOfRange(i));
            }
            if i == space.base() {
                continue;
            }
            let e = map.entry(i).or_insert_with(T::zero);
            *e = e.clone() + a;
        }
        map.retain(|_, a| !a.is_negligible());
        Ok(FreeVector { space, coeffs: map })
    }

    pub fn zero(space: &'a PointedMetricSpace<T>) -> Self {
        FreeVector {
            space,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn dirac(space: &'a PointedMetricSpace<T>, x: usize) -> Result<Self> {
        Self::new(space, [(x, T::one())])
    }

    /// `delta_x - delta_y`.
    pub fn dipole(space: &'a PointedMetricSpace<T>, x: usize, y: usize) -> Result<Self> {
        Self::new(space, [(x, T::one()), (y, -T::one())])
    }

    pub fn from_dense(space: &'a PointedMetricSpace<T>, values: &[T]) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: values.len(),
            });
        }
        Self::new(space, values.iter().cloned().enumerate())
    }

    pub fn space(&self) -> &'a PointedMetricSpace<T> {
        self.space
    }

    pub fn coeffs(&self) -> &BTreeMap<usize, T> {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> T {
        self.coeffs.get(&i).cloned().unwrap_or_else(T::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn dense(&self) -> Vec<T> {
        (0..self.space.len()).map(|i| self.coeff(i)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        let merged = self.coeffs.iter().chain(&other.coeffs).map(|(&i, a)| (i, a.clone()));
        Self::new(self.space, merged).expect("indices already validated")
    }

    pub fn scale(&self, t: &T) -> Self {
        let scaled = self.coeffs.iter().map(|(&i, a)| (i, a.clone() * t.clone()));
        Self::new(self.space, scaled).expect("indices already validated")
    }

    /// `<mu, f> = sum a_i f(x_i)`.
    pub fn pair(&self, f: &LipFunction<'_, T>) -> T {
        self.coeffs
            .iter()
            .map(|(&i, a)| a.clone() * f.value(i).clone())
            .fold(T::zero(), |s, v| s + v)
    }

    /// Same coefficients on `other`, matched through `emb[i]` = index in
    /// `other` of point `i` of this space.
    pub fn push_forward<'b>(&self, other: &'b PointedMetricSpace<T>, emb: &[usize]) -> Result<FreeVector<'b, T>> {
        FreeVector::new(other, self.coeffs.iter().map(|(&i, a)| (emb[i], a.clone())))
    }
}

/// `sum alpha_i (delta_{y_i} - delta_{z_i})` with its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportDecomposition<T> {
    pub terms: Vec<(T, usize, usize)>,
    pub cost: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualityCertificate<'a, T> {
    pub value: T,
    pub primal: TransportDecomposition<T>,
    pub dual: LipFunction<'a, T>,
    pub gap: T,
}

/// Cost `sum |alpha_i| d(y_i, z_i)` and the vector the terms represent.
pub fn decomposition_cost<'a, T: Scalar>(
    space: &'a PointedMetricSpace<T>,
    terms: &[(T, usize, usize)],
) -> Result<(T, FreeVector<'a, T>)> {
    let mut cost = T::zero();
    let mut coeffs = Vec::with_capacity(2 * terms.len());
    for (a, y, z) in terms {
        if *y >= space.len() || *z >= space.len() {
            return Err(Error::IndexOutOfRange((*y).max(*z)));
        }
        cost = cost + a.abs() * space.d(*y, *z).clone();
        coeffs.push((*y, a.clone()));
        coeffs.push((*z, -a.clone()));
    }
    Ok((cost, FreeVector::new(space, coeffs)?))
}

/// Norm as the optimal transport cost, the base absorbing `-sum a_i`.
pub fn kr_norm_primal<T: Scalar>(mu: &FreeVector<'_, T>) -> Result<(T, TransportDecomposition<T>)> {
    let m = mu.space();
    if mu.is_zero() {
        return Ok((
            T::zero(),
            TransportDecomposition {
                terms: Vec::new(),
                cost: T::zero(),
            },
        ));
    }
    let mut nodes: Vec<usize> = mu.coeffs().keys().copied().collect();
    nodes.push(m.base());
    let mut supply: Vec<T> = mu.coeffs().values().cloned().collect();
    let total = supply.iter().cloned().fold(T::zero(), |s, v| s + v);
    supply.push(-total);
    let flow = min_cost_flow(&supply, |i, j| m.d(nodes[i], nodes[j]).clone())?;
    let terms: Vec<(T, usize, usize)> = flow
        .arcs
        .into_iter()
        .map(|(i, j, a)| (a, nodes[i], nodes[j]))
        .collect();
    Ok((
        flow.cost.clone(),
        TransportDecomposition {
            terms,
            cost: flow.cost,
        },
    ))
}

/// Norm as `max <mu, f>` over 1-Lipschitz `f` with `f(base) = 0`, solved as
/// a linear program over every point of the space. The optimiser is a
/// vertex of the Lipschitz ball.
pub fn kr_norm_dual<'a, T: Scalar>(mu: &FreeVector<'a, T>) -> Result<(T, LipFunction<'a, T>)> {
    let m = mu.space();
    if mu.is_zero() {
        return Ok((T::zero(), LipFunction::zero(m)));
    }
    let pts: Vec<usize> = m.non_base().collect();
    let k = pts.len();
    let b = m.base();
    // g_i = f_i + d(i, base) >= 0
    let objective: Vec<T> = pts.iter().map(|&i| mu.coeff(i)).collect();
    let mut lp = LinearProgram::new(objective);
    for (p, &i) in pts.iter().enumerate() {
        let mut row = vec![T::zero(); k];
        row[p] = T::one();
        let two = T::one() + T::one();
        lp.push(row, Relation::Le, two * m.d(i, b).clone());
        for (q, &j) in pts.iter().enumerate() {
            if p == q {
                continue;
            }
            let mut row = vec![T::zero(); k];
            row[p] = T::one();
            row[q] = -T::one();
            let rhs = m.d(i, j).clone() + m.d(i, b).clone() - m.d(j, b).clone();
            lp.push(row, Relation::Le, rhs);
        }
    }
    let (_, g) = lp.solve()?.optimal()?;
    let mut values = vec![T::zero(); m.len()];
    for (p, &i) in pts.iter().enumerate() {
        values[i] = g[p].clone() - m.d(i, b).clone();
    }
    let f = LipFunction::new(m, values)?;
    Ok((mu.pair(&f), f))
}

pub fn kr_norm<T: Scalar>(mu: &FreeVector<'_, T>) -> Result<T> {
    Ok(kr_norm_primal(mu)?.0)
}

/// Runs both solvers and certifies that their values coincide.
pub fn check_duality<'a, T: Scalar>(mu: &FreeVector<'a, T>) -> Result<DualityCertificate<'a, T>> {
    check_duality_tol(mu, 1e-9)
}

/// As [`check_duality`], accepting a float gap up to `tol * (1 + value)`.
/// Exact scalars ignore `tol` and demand a zero gap.
pub fn check_duality_tol<'a, T: Scalar>(mu: &FreeVector<'a, T>, tol: f64) -> Result<DualityCertificate<'a, T>> {
    let (p, primal) = kr_norm_primal(mu)?;
    let (d, dual) = kr_norm_dual(mu)?;
    let gap = p.clone() - d;
    let ok = if T::EXACT {
        gap.sign() == Ordering::Equal
    } else {
        gap.to_f64().abs() <= tol * (1.0 + p.to_f64().abs())
    };
    if !ok {
        return Err(Error::DualityGapExceeded { gap: gap.to_string() });
    }
    Ok(DualityCertificate {
        value: p,
        primal,
        dual,
        gap,
    })
}
