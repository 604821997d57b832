//! Lipschitz functions vanishing at the base point.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::metric::PointedMetricSpace;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LipFunction<'a, T> {
    space: &'a PointedMetricSpace<T>,
    values: Vec<T>,
}

/// Lipschitz constant together with the first pair attaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct LipNorm<T> {
    pub value: T,
    pub witness: Option<(usize, usize)>,
}

impl<'a, T: Scalar> LipFunction<'a, T> {
    pub fn new(space: &'a PointedMetricSpace<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                got: values.len(),
            });
        }
        if !values[space.base()].is_negligible() {
            return Err(Error::Invalid(format!(
                "function takes value {} at the base point",
                values[space.base()]
            )));
        }
        Ok(LipFunction { space, values })
    }

    pub fn zero(space: &'a PointedMetricSpace<T>) -> Self {
        LipFunction {
            space,
            values: vec![T::zero(); space.len()],
        }
    }

    /// `x -> d(x, base)`.
    pub fn distance_to_base(space: &'a PointedMetricSpace<T>) -> Self {
        let values = (0..space.len()).map(|i| space.d(i, space.base()).clone()).collect();
        LipFunction { space, values }
    }

    pub fn space(&self) -> &'a PointedMetricSpace<T> {
        self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &T {
        &self.values[i]
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().map(Scalar::abs).fold(T::zero(), T::max_of)
    }

    pub fn scale(&self, t: &T) -> Self {
        LipFunction {
            space: self.space,
            values: self.values.iter().map(|v| v.clone() * t.clone()).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        LipFunction {
            space: self.space,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    /// `sup |f(x) - f(y)| / d(x,y)`; ties go to the lowest pair `(i, j)`, `i < j`.
    pub fn lip_norm(&self) -> LipNorm<T> {
        let n = self.values.len();
        let mut best: Option<(T, T, (usize, usize))> = None;
        for i in 0..n {
            for j in i + 1..n {
                let num = (self.values[i].clone() - self.values[j].clone()).abs();
                let den = self.space.d(i, j).clone();
                let better = match &best {
                    None => true,
                    // num/den > bn/bd without dividing
                    Some((bn, bd, _)) => {
                        (num.clone() * bd.clone()).cmp_tol(&(bn.clone() * den.clone()))
                            == Ordering::Greater
                    }
                };
                if better {
                    best = Some((num, den, (i, j)));
                }
            }
        }
        match best {
            Some((num, den, w)) if !num.is_negligible() => LipNorm {
                value: num / den,
                witness: Some(w),
            },
            Some((_, _, w)) => LipNorm {
                value: T::zero(),
                witness: Some(w),
            },
            None => LipNorm {
                value: T::zero(),
                witness: None,
            },
        }
    }
}

/// Index in `big` of every point of `small`, matched by label, after
/// checking that `small` carries the induced metric and the same base.
pub fn subspace_embedding<T: Scalar>(
    small: &PointedMetricSpace<T>,
    big: &PointedMetricSpace<T>,
) -> Result<Vec<usize>> {
    let emb: Vec<usize> = small
        .labels()
        .iter()
        .map(|l| {
            big.index_of(l)
                .ok_or_else(|| Error::SubspaceMismatch(format!("point {l} not in the ambient space")))
        })
        .collect::<Result<_>>()?;
    if emb[small.base()] != big.base() {
        return Err(Error::SubspaceMismatch("base points differ".into()));
    }
    for i in 0..small.len() {
        for j in i + 1..small.len() {
            if small.d(i, j).cmp_tol(big.d(emb[i], emb[j])) != Ordering::Equal {
                return Err(Error::SubspaceMismatch(format!(
                    "distance between {} and {} differs",
                    small.label(i),
                    small.label(j)
                )));
            }
        }
    }
    Ok(emb)
}

/// `F(x) = min_n f(n) + L d(n, x)` over the points of `N`.
pub fn mcshane_extend<'b, T: Scalar>(
    f: &LipFunction<'_, T>,
    m: &'b PointedMetricSpace<T>,
) -> Result<LipFunction<'b, T>> {
    let emb = subspace_embedding(f.space(), m)?;
    Ok(mcshane_extend_along(f, m, &emb))
}

/// McShane extension along a known embedding of `N` into `M`.
pub fn mcshane_extend_along<'b, T: Scalar>(
    f: &LipFunction<'_, T>,
    m: &'b PointedMetricSpace<T>,
    emb: &[usize],
) -> LipFunction<'b, T> {
    let l = f.lip_norm().value;
    let mut values: Vec<T> = (0..m.len())
        .map(|x| {
            emb.iter()
                .enumerate()
                .map(|(k, &n)| f.value(k).clone() + l.clone() * m.d(n, x).clone())
                .reduce(T::min_of)
                .expect("subspace contains the base point")
        })
        .collect();
    for (k, &n) in emb.iter().enumerate() {
        values[n] = f.value(k).clone();
    }
    values[m.base()] = T::zero();
    LipFunction { space: m, values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn line(points: &[i64]) -> PointedMetricSpace<Rational> {
        PointedMetricSpace::from_points_euclidean(
            points.iter().map(|&p| vec![Rational::from_i64(p)]).collect(),
            0,
        )
        .unwrap()
    }

    fn q(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_i64(x)).collect()
    }

    #[test]
    fn zero_and_distance_functions() {
        let m = line(&[0, 1, 3]);
        assert_eq!(LipFunction::zero(&m).lip_norm().value, Rational::from_i64(0));
        let d = LipFunction::distance_to_base(&m).lip_norm();
        assert_eq!(d.value, Rational::from_i64(1));
        assert_eq!(d.witness, Some((0, 1)));
    }

    #[test]
    fn norm_by_pairs() {
        let m = line(&[0, 1, 3]);
        let f = LipFunction::new(&m, q(&[0, 1, 0])).unwrap();
        let n = f.lip_norm();
        assert_eq!(n.value, Rational::from_i64(1));
        assert_eq!(n.witness, Some((0, 1)));
        assert!(LipFunction::new(&m, q(&[1, 1, 0])).is_err());
    }

    #[test]
    fn extension_from_endpoints() {
        let m = line(&[0, 1, 2]);
        let n = m.restrict_subspace(&[0, 2]).unwrap();
        let f = LipFunction::new(&n, q(&[0, 2])).unwrap();
        let big = mcshane_extend(&f, &m).unwrap();
        assert_eq!(big.values(), q(&[0, 1, 2]).as_slice());
        let same = mcshane_extend(&LipFunction::new(&m, q(&[0, 1, 0])).unwrap(), &m).unwrap();
        assert_eq!(same.values(), q(&[0, 1, 0]).as_slice());
    }

    #[test]
    fn extension_rejects_foreign_subspace() {
        let m = line(&[0, 1, 2]);
        let other = line(&[0, 5]);
        let f = LipFunction::new(&other, q(&[0, 1])).unwrap();
        assert!(matches!(mcshane_extend(&f, &m), Err(Error::SubspaceMismatch(_))));
    }
}
