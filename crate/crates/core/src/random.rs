//! Seeded generators for test instances. Everything is drawn from a
//! `ChaCha8Rng`, so a seed fixes the instance on every platform.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::free::FreeVector;
use crate::metric::PointedMetricSpace;
use crate::scalar::{Rational, Scalar};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rational `p/q` with `|p| <= num` and `1 <= q <= den`.
pub fn rational(rng: &mut impl Rng, num: i64, den: i64) -> Rational {
    Rational::new(
        BigInt::from(rng.gen_range(-num..=num)),
        BigInt::from(rng.gen_range(1..=den)),
    )
}

fn positive(rng: &mut impl Rng, num: i64, den: i64) -> Rational {
    Rational::new(
        BigInt::from(rng.gen_range(1..=num)),
        BigInt::from(rng.gen_range(1..=den)),
    )
}

/// Random weights closed under shortest paths, which makes them a metric.
/// Labels are `p0, p1, ...` and the base is `p0`.
pub fn random_metric(rng: &mut impl Rng, n: usize) -> PointedMetricSpace<Rational> {
    let mut d = vec![vec![Rational::from_integer(BigInt::from(0)); n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let w = positive(rng, 12, 4);
            d[i][j] = w.clone();
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k].clone() + d[k][j].clone();
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    PointedMetricSpace::build(labels, d, 0).expect("shortest-path closure is a metric")
}

/// A vector with `1..=max_support` random non-base points and nonzero
/// rational coefficients.
pub fn random_vector<'a, T: Scalar>(
    rng: &mut impl Rng,
    space: &'a PointedMetricSpace<T>,
    max_support: usize,
) -> Result<FreeVector<'a, T>> {
    let mut pts: Vec<usize> = space.non_base().collect();
    pts.shuffle(rng);
    let k = rng.gen_range(1..=max_support.min(pts.len()).max(1));
    let coeffs: Vec<(usize, T)> = pts
        .into_iter()
        .take(k)
        .map(|i| {
            let mut c = rational(rng, 6, 3);
            while c == Rational::from_integer(BigInt::from(0)) {
                c = rational(rng, 6, 3);
            }
            (i, T::from_rational(&c))
        })
        .collect();
    FreeVector::new(space, coeffs)
}

/// A random subset of the indices that contains the base, in index order.
pub fn random_subset_with_base<T: Scalar>(rng: &mut impl Rng, space: &PointedMetricSpace<T>) -> Vec<usize> {
    (0..space.len())
        .filter(|&i| i == space.base() || rng.gen_bool(0.5))
        .collect()
}

/// Distinct points of `[0,1]^2 \ {0}` whose coordinates have denominators
/// from `dens`.
pub fn random_unit_square_points(rng: &mut impl Rng, count: usize, dens: &[i64]) -> Vec<(Rational, Rational)> {
    let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(count);
    let zero = Rational::from_integer(BigInt::from(0));
    while out.len() < count {
        let mut coord = || {
            let q = *dens.choose(rng).expect("denominators");
            Rational::new(BigInt::from(rng.gen_range(0..=q)), BigInt::from(q))
        };
        let p = (coord(), coord());
        if (p.0 != zero || p.1 != zero) && !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Uniform `f64` point of `[0,1]^d`.
pub fn unit_point(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen::<f64>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Surd;

    #[test]
    fn seeded_and_metric() {
        let a = random_metric(&mut rng(3), 7);
        let b = random_metric(&mut rng(3), 7);
        assert_eq!(a, b);
        let s = a.map_scalar::<Surd>();
        let mu = random_vector(&mut rng(4), &s, 3).unwrap();
        assert!(!mu.is_zero() && mu.coeffs().len() <= 3);
        assert!(!mu.coeffs().contains_key(&s.base()));
    }

    #[test]
    fn square_points_are_distinct() {
        let pts = random_unit_square_points(&mut rng(1), 4, &[2, 4]);
        assert_eq!(pts.len(), 4);
        for (i, p) in pts.iter().enumerate() {
            assert!(!pts[i + 1..].contains(p));
        }
    }
}
