//! The two isometries behind the grid construction: the free space of an
//! amalgam is the l1-sum of the summands' free spaces, and `F(nA_n)` is
//! isometric to `F(A_n)` through `delta_z -> n delta_{z/n}`.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::free::{kr_norm, FreeVector};
use crate::metric::PointedMetricSpace;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct AmalgamSplit<T> {
    pub total: T,
    pub parts: Vec<T>,
    /// `total == sum(parts)`, exactly for exact scalars.
    pub additive: bool,
}

/// Norm of `mu` on the amalgam against the norms of its restrictions to
/// each summand (the base mass is absorbed separately in each part).
pub fn amalgam_l1_check<T: Scalar>(mu: &FreeVector<'_, T>) -> Result<AmalgamSplit<T>> {
    let k = mu.space();
    let tags = k.summands().ok_or(Error::NotAnAmalgam)?;
    let count = tags.iter().flatten().max().map_or(0, |m| m + 1);
    let total = kr_norm(mu)?;
    let mut parts = Vec::with_capacity(count);
    for s in 0..count {
        let idx: Vec<usize> = (0..k.len())
            .filter(|&i| i == k.base() || tags[i] == Some(s))
            .collect();
        let sub = k.restrict_subspace(&idx)?;
        let coeffs = idx.iter().enumerate().map(|(p, &i)| (p, mu.coeff(i)));
        parts.push(kr_norm(&FreeVector::new(&sub, coeffs)?)?);
    }
    let sum = parts.iter().cloned().fold(T::zero(), |a, b| a + b);
    let additive = total.cmp_tol(&sum) == Ordering::Equal;
    Ok(AmalgamSplit {
        total,
        parts,
        additive,
    })
}

fn grid_index<T: Scalar>(v: &T, scale: i64, n: i64) -> Option<i64> {
    let t = v.clone() * T::from_i64(scale);
    let r = t.to_f64().round();
    if !(0.0..=n as f64).contains(&r) {
        return None;
    }
    let r = r as i64;
    (T::from_i64(r).cmp_tol(&t) == Ordering::Equal).then_some(r)
}

/// Sends `mu` on `nA_n` to `nu` on `A_n` with `nu(z/n) = n mu(z)`. Points are
/// matched by grid index `(i, j)`, and coordinates are checked on both sides.
pub fn scaling_isometry_map<'b, T: Scalar>(
    mu: &FreeVector<'_, T>,
    n: usize,
    target: &'b PointedMetricSpace<T>,
) -> Result<FreeVector<'b, T>> {
    let src = mu.space();
    let ni = n as i64;
    let bad = |s: &PointedMetricSpace<T>, i: usize| Error::PointNotOnGrid(s.label(i).to_string());
    let (Some(sc), Some(tc)) = (src.coords(), target.coords()) else {
        return Err(Error::Invalid("grid spaces need coordinates".into()));
    };
    if target.len() != (n + 1) * (n + 1) {
        return Err(Error::LengthMismatch {
            expected: (n + 1) * (n + 1),
            got: target.len(),
        });
    }
    let mut coeffs = Vec::new();
    for (&z, a) in mu.coeffs() {
        let c = &sc[z];
        if c.len() != 2 {
            return Err(bad(src, z));
        }
        let i = grid_index(&c[0], ni, ni).ok_or_else(|| bad(src, z))?;
        let j = grid_index(&c[1], ni, ni).ok_or_else(|| bad(src, z))?;
        let w = (i * (ni + 1) + j) as usize;
        let t = &tc[w];
        let n2 = ni * ni;
        if t.len() != 2 || grid_index(&t[0], n2, ni) != Some(i) || grid_index(&t[1], n2, ni) != Some(j) {
            return Err(bad(target, w));
        }
        coeffs.push((w, a.clone() * T::from_i64(ni)));
    }
    FreeVector::new(target, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Surd;

    #[test]
    fn two_summands() {
        let a2 = PointedMetricSpace::<Surd>::grid_an(2).unwrap();
        let a3 = PointedMetricSpace::<Surd>::grid_an(3).unwrap();
        let k = PointedMetricSpace::amalgam(&[&a2, &a3]).unwrap();
        let a = k.index_of("0:(1/4,0)").unwrap();
        let b = k.index_of("1:(1/9,0)").unwrap();
        let mu = FreeVector::new(&k, [(a, Surd::from_integer(1)), (b, Surd::from_integer(1))]).unwrap();
        let s = amalgam_l1_check(&mu).unwrap();
        assert!(s.additive);
        assert_eq!(s.total, Surd::ratio(13, 36));
        assert_eq!(s.parts, vec![Surd::ratio(1, 4), Surd::ratio(1, 9)]);
        let one = FreeVector::dirac(&k, a).unwrap();
        let s = amalgam_l1_check(&one).unwrap();
        assert_eq!(s.parts, vec![Surd::ratio(1, 4), Surd::from_integer(0)]);
        assert!(matches!(amalgam_l1_check(&FreeVector::dirac(&a2, 1).unwrap()), Err(Error::NotAnAmalgam)));
    }

    #[test]
    fn scaling_point_mass() {
        let big = PointedMetricSpace::<Surd>::scaled_grid_nan(2).unwrap();
        let small = PointedMetricSpace::<Surd>::grid_an(2).unwrap();
        let z = big.index_of("(1/2,0)").unwrap();
        let mu = FreeVector::dirac(&big, z).unwrap();
        let nu = scaling_isometry_map(&mu, 2, &small).unwrap();
        let w = small.index_of("(1/4,0)").unwrap();
        assert_eq!(nu, FreeVector::new(&small, [(w, Surd::from_integer(2))]).unwrap());
        assert_eq!(kr_norm(&mu).unwrap(), Surd::ratio(1, 2));
        assert_eq!(kr_norm(&nu).unwrap(), Surd::ratio(1, 2));
        let dip = FreeVector::dipole(&big, 4, 8).unwrap();
        let img = scaling_isometry_map(&dip, 2, &small).unwrap();
        assert_eq!(kr_norm(&img).unwrap(), *big.d(4, 8));
    }

    #[test]
    fn off_grid_rejected() {
        let pts = PointedMetricSpace::<Surd>::from_points_euclidean(
            vec![vec![Surd::from_integer(0), Surd::from_integer(0)], vec![Surd::ratio(1, 3), Surd::from_integer(0)]],
            0,
        )
        .unwrap();
        let small = PointedMetricSpace::<Surd>::grid_an(2).unwrap();
        let mu = FreeVector::dirac(&pts, 1).unwrap();
        assert!(matches!(scaling_isometry_map(&mu, 2, &small), Err(Error::PointNotOnGrid(_))));
    }
}
