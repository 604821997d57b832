//! Pair systems `((x_n, y_n), K)`, their peak functions, the embedding of
//! `l_inf` into Lipschitz functions, the molecules `e_n` and the projection
//! onto their span, plus three greedy strategies for finding such systems.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};
use crate::free::{kr_norm, FreeVector};
use crate::lip::{LipFunction, LipNorm};
use crate::metric::PointedMetricSpace;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub indices: Vec<usize>,
    pub inequality: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail(Violation),
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail(v) => write!(f, "fail {:?}: {}", v.indices, v.inequality),
        }
    }
}

/// Verdicts for the three conditions. Disjointness of balls is judged
/// pointwise on the finite space; the sum-of-radii criterion is reported
/// alongside but does not decide the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub distinct: Verdict,
    pub exclusion: Verdict,
    pub disjoint: Verdict,
    pub disjoint_sum: Verdict,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.distinct.passed() && self.exclusion.passed() && self.disjoint.passed()
    }
}

#[derive(Debug, Clone)]
pub struct PairSystem<'a, T> {
    space: &'a PointedMetricSpace<T>,
    pairs: Vec<(usize, usize)>,
    k: T,
    report: LemmaReport,
}

impl<'a, T: Scalar> PairSystem<'a, T> {
    /// Builds the system and verifies it eagerly.
    pub fn new(space: &'a PointedMetricSpace<T>, pairs: Vec<(usize, usize)>, k: T) -> Result<Self> {
        if k.sign() != Ordering::Greater {
            return Err(Error::Invalid(format!("K = {k} must be positive")));
        }
        if let Some(&(x, y)) = pairs.iter().find(|&&(x, y)| x >= space.len() || y >= space.len()) {
            return Err(Error::IndexOutOfRange(x.max(y)));
        }
        let report = verify_pair_system(space, &pairs, &k);
        Ok(PairSystem {
            space,
            pairs,
            k,
            report,
        })
    }

    pub fn space(&self) -> &'a PointedMetricSpace<T> {
        self.space
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn k(&self) -> &T {
        &self.k
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn report(&self) -> &LemmaReport {
        &self.report
    }

    fn ensure_verified(&self) -> Result<()> {
        if self.report.passed() {
            Ok(())
        } else {
            Err(Error::UnverifiedSystem)
        }
    }

    fn radius(&self, n: usize) -> T {
        let (x, y) = self.pairs[n];
        self.space.d(y, x).clone()
    }

    /// `max{d(y_n,x_n) - d(y_n,x)/K, 0}` before any base-point shift.
    fn raw_peak(&self, n: usize, x: usize) -> T {
        let y = self.pairs[n].1;
        let v = self.radius(n) - self.space.d(y, x).clone() / self.k.clone();
        if v.sign() == Ordering::Greater {
            v
        } else {
            T::zero()
        }
    }

    /// The `n`-th peak function, shifted so it vanishes at the base.
    pub fn peak_function(&self, n: usize) -> Result<LipFunction<'a, T>> {
        self.ensure_verified()?;
        self.check_index(n)?;
        let shift = self.raw_peak(n, self.space.base());
        let values = (0..self.space.len())
            .map(|x| self.raw_peak(n, x) - shift.clone())
            .collect();
        LipFunction::new(self.space, values)
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.pairs.len() {
            Err(Error::IndexOutOfRange(n))
        } else {
            Ok(())
        }
    }

    /// `(f_n(x))_n`; at most one entry is nonzero on a verified system.
    pub fn retraction_coeffs(&self, x: usize) -> Vec<T> {
        (0..self.pairs.len()).map(|n| self.raw_peak(n, x)).collect()
    }

    /// `T(alpha)(x) = alpha(n(x)) f_{n(x)}(x)`, rebased to vanish at the base.
    pub fn linf_embed(&self, alpha: &[T]) -> Result<LinfEmbedding<'a, T>> {
        self.ensure_verified()?;
        if alpha.len() != self.pairs.len() {
            return Err(Error::LengthMismatch {
                expected: self.pairs.len(),
                got: alpha.len(),
            });
        }
        let raw: Vec<T> = (0..self.space.len())
            .map(|x| {
                let r = self.retraction_coeffs(x);
                match r.iter().position(|v| !v.is_zero()) {
                    Some(n) => alpha[n].clone() * r[n].clone(),
                    None => T::zero(),
                }
            })
            .collect();
        let shift = raw[self.space.base()].clone();
        let f = LipFunction::new(self.space, raw.into_iter().map(|v| v - shift.clone()).collect())?;
        let lip = f.lip_norm();
        let sup = alpha.iter().map(Scalar::abs).fold(T::zero(), T::max_of);
        let two = T::one() + T::one();
        let lower_ok = sup.cmp_tol(&lip.value) != Ordering::Greater;
        let upper_ok = lip.value.cmp_tol(&(two * sup.clone() / self.k.clone())) != Ordering::Greater;
        Ok(LinfEmbedding {
            function: f,
            lip,
            alpha_sup: sup,
            lower_ok,
            upper_ok,
        })
    }

    /// `e_n = (delta_{y_n} - delta_{x_n}) / d(y_n, x_n)`.
    pub fn molecule(&self, n: usize) -> Result<FreeVector<'a, T>> {
        self.ensure_verified()?;
        self.check_index(n)?;
        let (x, y) = self.pairs[n];
        let inv = T::one() / self.radius(n);
        FreeVector::new(self.space, [(y, inv.clone()), (x, -inv)])
    }

    /// `sum c_n e_n`.
    pub fn combine(&self, coeffs: &[T]) -> Result<FreeVector<'a, T>> {
        if coeffs.len() != self.pairs.len() {
            return Err(Error::LengthMismatch {
                expected: self.pairs.len(),
                got: coeffs.len(),
            });
        }
        let mut acc = FreeVector::zero(self.space);
        for (n, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&self.molecule(n)?.scale(c));
            }
        }
        Ok(acc)
    }

    /// Extremes of `||sum c_n e_n|| / sum |c_n|` over nonzero `c`.
    pub fn l1_equivalence_ratio(&self, vectors: &[Vec<T>]) -> Result<(T, T)> {
        let mut lo: Option<T> = None;
        let mut hi: Option<T> = None;
        for c in vectors {
            let l1 = c.iter().map(Scalar::abs).fold(T::zero(), |s, v| s + v);
            if l1.is_negligible() {
                continue;
            }
            let r = kr_norm(&self.combine(c)?)? / l1;
            lo = Some(lo.map_or(r.clone(), |v| T::min_of(v, r.clone())));
            hi = Some(hi.map_or(r.clone(), |v| T::max_of(v, r)));
        }
        match (lo, hi) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::Invalid("no nonzero coefficient vector".into())),
        }
    }

    /// Coefficients of `P(mu)` in the molecules:
    /// `c_n = sum_x mu(x) (f_n(x) - f_n(base))`.
    pub fn projection_coeffs(&self, mu: &FreeVector<'_, T>) -> Result<Vec<T>> {
        self.ensure_verified()?;
        let base = self.space.base();
        Ok((0..self.pairs.len())
            .map(|n| {
                let shift = self.raw_peak(n, base);
                mu.coeffs()
                    .iter()
                    .map(|(&x, a)| a.clone() * (self.raw_peak(n, x) - shift.clone()))
                    .fold(T::zero(), |s, v| s + v)
            })
            .collect())
    }

    /// The linear extension of `x -> r(x)` to the free space.
    pub fn apply_projection(&self, mu: &FreeVector<'_, T>) -> Result<FreeVector<'a, T>> {
        let c = self.projection_coeffs(mu)?;
        self.combine(&c)
    }
}

#[derive(Debug, Clone)]
pub struct LinfEmbedding<'a, T> {
    pub function: LipFunction<'a, T>,
    pub lip: LipNorm<T>,
    pub alpha_sup: T,
    /// `||alpha||_inf <= Lip(T(alpha))`
    pub lower_ok: bool,
    /// `Lip(T(alpha)) <= (2/K) ||alpha||_inf`
    pub upper_ok: bool,
}

fn ge<T: Scalar>(a: &T, b: &T) -> bool {
    a.cmp_tol(b) != Ordering::Less
}

/// Checks the three conditions; failures are verdicts with witnesses.
pub fn verify_pair_system<T: Scalar>(m: &PointedMetricSpace<T>, pairs: &[(usize, usize)], k: &T) -> LemmaReport {
    let lab = |i: usize| m.label(i).to_string();
    let r: Vec<T> = pairs.iter().map(|&(x, y)| k.clone() * m.d(y, x).clone()).collect();

    let distinct = match pairs.iter().position(|&(x, y)| x == y) {
        Some(n) => Verdict::Fail(Violation {
            indices: vec![n],
            inequality: format!("x_{n} = y_{n} = {}", lab(pairs[n].0)),
        }),
        None => Verdict::Pass,
    };

    let mut exclusion = Verdict::Pass;
    'outer: for (n, &(_, yn)) in pairs.iter().enumerate() {
        for (mi, &(xm, _)) in pairs.iter().enumerate() {
            let lhs = m.d(xm, yn);
            if !ge(lhs, &r[n]) {
                exclusion = Verdict::Fail(Violation {
                    indices: vec![mi, n],
                    inequality: format!("d(x_{mi}, y_{n}) = {lhs} < K d(y_{n}, x_{n}) = {}", r[n]),
                });
                break 'outer;
            }
        }
    }

    let mut disjoint = Verdict::Pass;
    let mut disjoint_sum = Verdict::Pass;
    for n in 0..pairs.len() {
        for mi in n + 1..pairs.len() {
            let (yn, ym) = (pairs[n].1, pairs[mi].1);
            if disjoint_sum.passed() {
                let rhs = r[n].clone() + r[mi].clone();
                if !ge(m.d(yn, ym), &rhs) {
                    disjoint_sum = Verdict::Fail(Violation {
                        indices: vec![n, mi],
                        inequality: format!(
                            "d(y_{n}, y_{mi}) = {} < K (d(y_{n}, x_{n}) + d(y_{mi}, x_{mi})) = {rhs}",
                            m.d(yn, ym)
                        ),
                    });
                }
            }
            if disjoint.passed() {
                let inside = |c: usize, z: usize, rad: &T| m.d(c, z).cmp_tol(rad) == Ordering::Less;
                if let Some(z) = (0..m.len()).find(|&z| inside(yn, z, &r[n]) && inside(ym, z, &r[mi])) {
                    disjoint = Verdict::Fail(Violation {
                        indices: vec![n, mi],
                        inequality: format!(
                            "{} lies in both balls: d(y_{n}, z) = {} < {}, d(y_{mi}, z) = {} < {}",
                            lab(z),
                            m.d(yn, z),
                            r[n],
                            m.d(ym, z),
                            r[mi]
                        ),
                    });
                }
            }
        }
    }

    LemmaReport {
        distinct,
        exclusion,
        disjoint,
        disjoint_sum,
    }
}

/// Greedy chain from the base: each step takes the closest point more than
/// twice as far from the base as the previous one.
pub fn unbounded_chain<T: Scalar>(m: &PointedMetricSpace<T>) -> Vec<usize> {
    let b = m.base();
    let two = T::one() + T::one();
    let mut chain = Vec::new();
    let mut last = T::zero();
    loop {
        let threshold = two.clone() * last.clone();
        let next = m
            .non_base()
            .filter(|&z| m.d(z, b).cmp_tol(&threshold) == Ordering::Greater)
            .min_by(|&p, &q| m.d(p, b).cmp_tol(m.d(q, b)).then(p.cmp(&q)));
        match next {
            Some(z) => {
                last = m.d(z, b).clone();
                chain.push(z);
            }
            None => return chain,
        }
    }
}

/// Pairs `(z_{2n-1}, z_{2n})` from the doubling chain, with `K = 1/3`.
pub fn select_pairs_unbounded<T: Scalar>(m: &PointedMetricSpace<T>) -> Result<PairSystem<'_, T>> {
    let chain = unbounded_chain(m);
    if chain.len() < 2 {
        return Err(Error::ChainTooShort(chain.len()));
    }
    let pairs = chain.chunks_exact(2).map(|c| (c[0], c[1])).collect();
    PairSystem::new(m, pairs, T::ratio(1, 3))
}

/// One inequality from the doubling-chain argument, evaluated exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct LedgerEntry {
    pub label: &'static str,
    pub n: usize,
    pub m: usize,
    pub holds: bool,
}

/// Evaluates on a chain `z_1, z_2, ...` (1-based indices below):
/// `upper`:  `d(z_n,z_m) < (1 + 2^-(m-n)) d(z_m,0)` for `n < m`;
/// `lower`:  `d(z_n,z_m) > (1 - 2^-(m-n)) d(z_m,0)` for `n < m`;
/// `exclusion`: `d(z_{2m-1}, z_{2n}) >= d(z_{2n-1}, z_{2n}) / 3`;
/// `separation`: `d(z_{2m}, z_{2n}) > (d(z_{2n-1},z_{2n}) + d(z_{2m-1},z_{2m})) / 3`, `n != m`.
pub fn case1_ledger<T: Scalar>(m: &PointedMetricSpace<T>, chain: &[usize]) -> Vec<LedgerEntry> {
    let b = m.base();
    let z = |i: usize| chain[i - 1];
    let d = |p: usize, q: usize| m.d(p, q).clone();
    let mut out = Vec::new();
    let len = chain.len();
    for n in 1..=len {
        for mm in n + 1..=len {
            let p = T::ratio(1, 1i64 << (mm - n).min(62));
            let dz = d(z(n), z(mm));
            let dm = d(z(mm), b);
            out.push(LedgerEntry {
                label: "upper",
                n,
                m: mm,
                holds: dz.cmp_tol(&((T::one() + p.clone()) * dm.clone())) == Ordering::Less,
            });
            out.push(LedgerEntry {
                label: "lower",
                n,
                m: mm,
                holds: dz.cmp_tol(&((T::one() - p) * dm)) == Ordering::Greater,
            });
        }
    }
    let third = T::ratio(1, 3);
    let pairs = len / 2;
    for n in 1..=pairs {
        let rn = d(z(2 * n - 1), z(2 * n));
        for mm in 1..=pairs {
            out.push(LedgerEntry {
                label: "exclusion",
                n,
                m: mm,
                holds: ge(&d(z(2 * mm - 1), z(2 * n)), &(third.clone() * rn.clone())),
            });
            if mm != n {
                let rm = d(z(2 * mm - 1), z(2 * mm));
                let rhs = third.clone() * (rn.clone() + rm);
                out.push(LedgerEntry {
                    label: "separation",
                    n,
                    m: mm,
                    holds: d(z(2 * mm), z(2 * n)).cmp_tol(&rhs) == Ordering::Greater,
                });
            }
        }
    }
    out
}

/// Greedy `C`-separated subset, scanning points in index order.
pub fn separated_subset<T: Scalar>(m: &PointedMetricSpace<T>, c: &T) -> Vec<usize> {
    let mut p: Vec<usize> = Vec::new();
    for z in 0..m.len() {
        if p.iter().all(|&q| ge(m.d(z, q), c)) {
            p.push(z);
        }
    }
    p
}

/// Pairs `(a_0, a_n)` on a greedy `C`-separated set with `K = min{C/(2D), 1}`.
/// The base is dropped from the separated set and `a_0` is its first
/// remaining element.
pub fn select_pairs_discrete<'a, T: Scalar>(m: &'a PointedMetricSpace<T>, c: &T, d: &T) -> Result<PairSystem<'a, T>> {
    if c.sign() != Ordering::Greater {
        return Err(Error::Invalid(format!("separation {c} must be positive")));
    }
    if d.cmp_tol(&m.diameter()) == Ordering::Less {
        return Err(Error::Invalid(format!("bound {d} is below the diameter {}", m.diameter())));
    }
    let p = separated_subset(m, c);
    if p.len() < 3 {
        return Err(Error::SeparatedSetTooSmall(p.len()));
    }
    let a: Vec<usize> = p.into_iter().filter(|&z| z != m.base()).collect();
    let pairs = a[1..].iter().map(|&y| (a[0], y)).collect();
    let two = T::one() + T::one();
    let k = T::min_of(c.clone() / (two * d.clone()), T::one());
    PairSystem::new(m, pairs, k)
}

/// Pairs accumulating at `a` with `K = 1`. Candidates for `y_n` are taken by
/// decreasing distance to `a`; a candidate is kept when it is neither an
/// earlier `y` nor an earlier `x`, and is strictly closer to `a` than to
/// every earlier `y`. Each `x_n` is a nearest neighbour of `y_n`.
pub fn select_pairs_cluster<T: Scalar>(m: &PointedMetricSpace<T>, a: usize) -> Result<PairSystem<'_, T>> {
    if a >= m.len() {
        return Err(Error::IndexOutOfRange(a));
    }
    if m.len() < 3 {
        return Err(Error::NoPairsFound);
    }
    let mut cands: Vec<usize> = (0..m.len()).filter(|&z| z != a).collect();
    cands.sort_by(|&p, &q| m.d(q, a).cmp_tol(m.d(p, a)).then(p.cmp(&q)));
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for y in cands {
        if pairs.iter().any(|&(x, yy)| x == y || yy == y) {
            continue;
        }
        let closer = pairs
            .iter()
            .all(|&(_, ym)| m.d(y, a).cmp_tol(m.d(y, ym)) == Ordering::Less);
        if !closer {
            continue;
        }
        let x = (0..m.len())
            .filter(|&z| z != y)
            .min_by(|&p, &q| m.d(y, p).cmp_tol(m.d(y, q)).then(p.cmp(&q)))
            .expect("at least two points");
        pairs.push((x, y));
    }
    if pairs.is_empty() {
        return Err(Error::NoPairsFound);
    }
    PairSystem::new(m, pairs, T::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free::kr_norm;
    use crate::scalar::Rational;

    fn line(points: &[Rational]) -> PointedMetricSpace<Rational> {
        PointedMetricSpace::from_points_euclidean(points.iter().map(|p| vec![p.clone()]).collect(), 0).unwrap()
    }

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| Rational::from_i64(x)).collect()
    }

    fn q(p: i64, d: i64) -> Rational {
        Rational::ratio(p, d)
    }

    #[test]
    fn powers_of_three_verify() {
        let m = line(&ints(&[0, 3, 9, 27, 81]));
        let s = PairSystem::new(&m, vec![(1, 2), (3, 4)], q(1, 3)).unwrap();
        assert!(s.report().passed(), "{:?}", s.report());
        let bad = PairSystem::new(&m, vec![(1, 1)], q(1, 3)).unwrap();
        assert!(!bad.report().distinct.passed());
        let shared = PairSystem::new(&m, vec![(1, 3), (2, 3)], q(1, 3)).unwrap();
        assert!(!shared.report().disjoint.passed());
        assert!(matches!(shared.peak_function(0), Err(Error::UnverifiedSystem)));
    }

    #[test]
    fn doubling_chain() {
        let m = line(&ints(&[0, 3, 9, 27, 81]));
        let s = select_pairs_unbounded(&m).unwrap();
        assert_eq!(s.pairs(), &[(1, 2), (3, 4)]);
        assert_eq!(*s.k(), q(1, 3));
        let pts: Vec<Rational> = (0..=8).map(|k| Rational::from_i64(if k == 0 { 0 } else { 3i64.pow(k) })).collect();
        let m8 = line(&pts);
        let s8 = select_pairs_unbounded(&m8).unwrap();
        assert_eq!(s8.len(), 4);
        assert!(s8.report().passed());
        let chain = unbounded_chain(&m8);
        assert!(case1_ledger(&m8, &chain).iter().all(|e| e.holds));
        let tight = line(&[q(0, 1), q(1, 1), q(3, 2)]);
        assert!(matches!(select_pairs_unbounded(&tight), Err(Error::ChainTooShort(1))));
    }

    #[test]
    fn separated_selection() {
        let m = line(&ints(&[0, 10, 20, 30]));
        let s = select_pairs_discrete(&m, &q(10, 1), &q(30, 1)).unwrap();
        assert_eq!(s.pairs(), &[(1, 2), (1, 3)]);
        assert_eq!(*s.k(), q(1, 6));
        assert!(s.report().passed());
        let unit = line(&ints(&[0, 1, 2, 3, 4, 5, 6, 7, 8, 9]));
        let s = select_pairs_discrete(&unit, &q(1, 1), &q(9, 1)).unwrap();
        assert_eq!(*s.k(), q(1, 18));
        assert!(s.report().passed());
        let clump = line(&[q(0, 1), q(1, 10), q(2, 10)]);
        assert!(matches!(
            select_pairs_discrete(&clump, &q(1, 1), &q(1, 1)),
            Err(Error::SeparatedSetTooSmall(1))
        ));
    }

    #[test]
    fn cluster_selection() {
        let mut pts = vec![q(0, 1)];
        pts.extend((0..=4).map(|k| q(1, 1 << k)));
        let m = line(&pts);
        let s = select_pairs_cluster(&m, 0).unwrap();
        // y = 1, 1/4, 1/16; 1/2 and 1/8 are already used as x's
        assert_eq!(s.pairs(), &[(2, 1), (4, 3), (0, 5)]);
        assert!(s.report().passed());
        let small = line(&ints(&[0, 1, 2]));
        let s = select_pairs_cluster(&small, 0).unwrap();
        assert_eq!(s.pairs(), &[(1, 2)]);
    }

    #[test]
    fn peaks_and_embedding() {
        let m = line(&ints(&[0, 3, 9, 27, 81]));
        let s = select_pairs_unbounded(&m).unwrap();
        let f0 = s.peak_function(0).unwrap();
        assert_eq!(*f0.value(2), q(6, 1));
        assert!(f0.lip_norm().value <= q(3, 1));
        for n in 0..s.len() {
            let f = s.peak_function(n).unwrap();
            for (mi, &(x, y)) in s.pairs().iter().enumerate() {
                assert_eq!(*f.value(x), q(0, 1));
                if mi != n {
                    assert_eq!(*f.value(y), q(0, 1));
                }
            }
        }
        let e = s.linf_embed(&[q(0, 1), q(1, 1)]).unwrap();
        assert!(e.lower_ok && e.upper_ok);
        assert!(e.lip.value >= q(1, 1));
        let z = s.linf_embed(&[q(0, 1), q(0, 1)]).unwrap();
        assert!(z.function.values().iter().all(|v| *v == q(0, 1)));
        assert!(s.linf_embed(&[q(1, 1)]).is_err());
    }

    #[test]
    fn unit_peak_value() {
        let m = line(&[q(0, 1), q(1, 1), q(3, 2), q(5, 1)]);
        let s = PairSystem::new(&m, vec![(0, 1)], q(1, 1)).unwrap();
        assert!(s.report().passed());
        let f = s.peak_function(0).unwrap();
        assert_eq!(*f.value(2), q(1, 2));
    }

    #[test]
    fn molecules_and_projection() {
        let m = line(&ints(&[0, 3, 9, 27, 81]));
        let s = select_pairs_unbounded(&m).unwrap();
        for n in 0..s.len() {
            let e = s.molecule(n).unwrap();
            assert_eq!(kr_norm(&e).unwrap(), q(1, 1));
            assert_eq!(s.apply_projection(&e).unwrap(), e);
            let (x, _) = s.pairs()[n];
            assert!(s.apply_projection(&FreeVector::dirac(&m, x).unwrap()).unwrap().is_zero());
        }
        let (lo, hi) = s
            .l1_equivalence_ratio(&[vec![q(1, 1), q(0, 1)], vec![q(1, 1), q(-1, 1)], vec![q(1, 1), q(1, 1)]])
            .unwrap();
        assert!(lo >= q(1, 6) && hi <= q(1, 1));
        let r = s.retraction_coeffs(2);
        assert_eq!(r, vec![q(6, 1), q(0, 1)]);
        assert_eq!(s.retraction_coeffs(1), vec![q(0, 1), q(0, 1)]);
    }
}
