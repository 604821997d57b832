//! Finite pointed metric spaces: validation, Euclidean point sets, the grids
//! `A_n` and `nA_n`, amalgamated sums over the base point, and subspaces.

use std::cmp::Ordering;

use crate::error::{Error, Result, ViolationKind};
use crate::scalar::{convert, Scalar};

/// Spaces above this many points may skip the cubic triangle check.
pub const TRIANGLE_CHECK_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TriangleCheck {
    #[default]
    Always,
    /// Skip the triangle inequality when the space has more than
    /// [`TRIANGLE_CHECK_LIMIT`] points.
    SkipLarge,
}

/// A finite metric space with a distinguished base point.
///
/// Immutable after construction; every constructor validates the metric.
#[derive(Debug, Clone, PartialEq)]
pub struct PointedMetricSpace<T> {
    labels: Vec<String>,
    coords: Option<Vec<Vec<T>>>,
    dist: Vec<T>,
    base: usize,
    summands: Option<Vec<Option<usize>>>,
}

fn violation(kind: ViolationKind, labels: &[String], idx: &[usize]) -> Error {
    Error::MetricViolation {
        kind,
        witness: idx.iter().map(|&i| labels[i].clone()).collect(),
    }
}

/// Checks the metric axioms on a square matrix.
pub fn verify_metric<T: Scalar>(labels: &[String], dist: &[T], check: TriangleCheck) -> Result<()> {
    let n = labels.len();
    if dist.len() != n * n {
        return Err(Error::Invalid(format!(
            "distance matrix has {} entries for {} labels",
            dist.len(),
            n
        )));
    }
    let d = |i: usize, j: usize| &dist[i * n + j];
    for i in 0..n {
        if d(i, i).sign() != Ordering::Equal {
            return Err(violation(ViolationKind::NonzeroDiagonal, labels, &[i, i]));
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            match d(i, j).sign() {
                Ordering::Less => return Err(violation(ViolationKind::Negative, labels, &[i, j])),
                Ordering::Equal => {
                    return Err(violation(ViolationKind::ZeroOffDiagonal, labels, &[i, j]))
                }
                Ordering::Greater => {}
            }
            if j > i && d(i, j).cmp_tol(d(j, i)) != Ordering::Equal {
                return Err(violation(ViolationKind::Asymmetry, labels, &[i, j]));
            }
        }
    }
    if check == TriangleCheck::SkipLarge && n > TRIANGLE_CHECK_LIMIT {
        return Ok(());
    }
    for i in 0..n {
        for k in i + 1..n {
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let via = d(i, j).clone() + d(j, k).clone();
                if d(i, k).cmp_tol(&via) == Ordering::Greater {
                    return Err(violation(ViolationKind::Triangle, labels, &[i, j, k]));
                }
            }
        }
    }
    Ok(())
}

fn euclidean<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    let sq = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let t = x.clone() - y.clone();
            t.clone() * t
        })
        .fold(T::zero(), |acc, v| acc + v);
    sq.sqrt()
        .ok_or_else(|| Error::Invalid(format!("distance sqrt({sq}) is not representable")))
}

fn grid_label(i: i64, j: i64, den: i64) -> String {
    let frac = |v: i64| {
        let g = num_integer::gcd(v, den);
        match (v, den / g) {
            (0, _) => "0".to_string(),
            (v, 1) => format!("{}", v / g),
            (v, q) => format!("{}/{}", v / g, q),
        }
    };
    format!("({},{})", frac(i), frac(j))
}

impl<T: Scalar> PointedMetricSpace<T> {
    /// Builds and validates a space from a full distance matrix.
    pub fn build(labels: Vec<String>, dist: Vec<Vec<T>>, base: usize) -> Result<Self> {
        Self::build_with(labels, dist, base, TriangleCheck::Always)
    }

    pub fn build_with(
        labels: Vec<String>,
        dist: Vec<Vec<T>>,
        base: usize,
        check: TriangleCheck,
    ) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::Invalid("empty space".into()));
        }
        if dist.len() != n || dist.iter().any(|row| row.len() != n) {
            return Err(Error::Invalid("distance matrix must be square and match labels".into()));
        }
        if base >= n {
            return Err(Error::IndexOutOfRange(base));
        }
        let flat: Vec<T> = dist.into_iter().flatten().collect();
        verify_metric(&labels, &flat, check)?;
        Ok(PointedMetricSpace {
            labels,
            coords: None,
            dist: flat,
            base,
            summands: None,
        })
    }

    /// Points of `R^d` with the Euclidean metric; labels are the coordinates.
    pub fn from_points_euclidean(coords: Vec<Vec<T>>, base: usize) -> Result<Self> {
        let labels = coords
            .iter()
            .map(|c| {
                let parts: Vec<String> = c.iter().map(|v| v.to_string()).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        Self::from_labeled_points(labels, coords, base)
    }

    pub fn from_labeled_points(labels: Vec<String>, coords: Vec<Vec<T>>, base: usize) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::Invalid("empty point set".into()));
        }
        let dim = coords[0].len();
        if coords.iter().any(|c| c.len() != dim) {
            return Err(Error::Invalid("points have differing dimensions".into()));
        }
        if base >= n {
            return Err(Error::IndexOutOfRange(base));
        }
        let mut dist = vec![T::zero(); n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = euclidean(&coords[i], &coords[j])?;
                if d.sign() == Ordering::Equal {
                    return Err(Error::DuplicatePoint(vec![i, j]));
                }
                dist[i * n + j] = d.clone();
                dist[j * n + i] = d;
            }
        }
        verify_metric(&labels, &dist, TriangleCheck::SkipLarge)?;
        Ok(PointedMetricSpace {
            labels,
            coords: Some(coords),
            dist,
            base,
            summands: None,
        })
    }

    fn grid(n: usize, den: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid(format!("grid size {n} must be at least 2")));
        }
        let mut labels = Vec::new();
        let mut coords = Vec::new();
        for i in 0..=n as i64 {
            for j in 0..=n as i64 {
                labels.push(grid_label(i, j, den));
                coords.push(vec![T::ratio(i, den), T::ratio(j, den)]);
            }
        }
        Self::from_labeled_points(labels, coords, 0)
    }

    /// `A_n = {(i/n^2, j/n^2) : 0 <= i, j <= n}`, base `(0,0)`, points in
    /// row-major order of `(i, j)`.
    pub fn grid_an(n: usize) -> Result<Self> {
        Self::grid(n, (n * n) as i64)
    }

    /// `nA_n = {(i/n, j/n) : 0 <= i, j <= n}`, same point order as `grid_an`.
    pub fn scaled_grid_nan(n: usize) -> Result<Self> {
        Self::grid(n, n as i64)
    }

    /// Amalgamated sum over the base point. The shared base comes first and
    /// is labelled `0`; the other points follow summand by summand with
    /// labels `k:<label>`. Across summands `d(a,b) = d(a,0) + d(0,b)`.
    pub fn amalgam(spaces: &[&PointedMetricSpace<T>]) -> Result<Self> {
        if spaces.is_empty() {
            return Err(Error::Invalid("amalgam of no spaces".into()));
        }
        for s in spaces {
            verify_metric(&s.labels, &s.dist, TriangleCheck::Always)?;
        }
        // (summand, original index)
        let mut points: Vec<Option<(usize, usize)>> = vec![None];
        for (k, s) in spaces.iter().enumerate() {
            points.extend((0..s.len()).filter(|&i| i != s.base).map(|i| Some((k, i))));
        }
        let n = points.len();
        let mut labels = Vec::with_capacity(n);
        let mut summands = Vec::with_capacity(n);
        for p in &points {
            match p {
                None => {
                    labels.push("0".to_string());
                    summands.push(None);
                }
                Some((k, i)) => {
                    labels.push(format!("{k}:{}", spaces[*k].labels[*i]));
                    summands.push(Some(*k));
                }
            }
        }
        let to_base = |p: &Option<(usize, usize)>| match p {
            None => T::zero(),
            Some((k, i)) => spaces[*k].d(*i, spaces[*k].base).clone(),
        };
        let mut dist = vec![T::zero(); n * n];
        for a in 0..n {
            for b in a + 1..n {
                let d = match (&points[a], &points[b]) {
                    (Some((ka, ia)), Some((kb, ib))) if ka == kb => spaces[*ka].d(*ia, *ib).clone(),
                    (pa, pb) => to_base(pa) + to_base(pb),
                };
                dist[a * n + b] = d.clone();
                dist[b * n + a] = d;
            }
        }
        verify_metric(&labels, &dist, TriangleCheck::Always)?;
        Ok(PointedMetricSpace {
            labels,
            coords: None,
            dist,
            base: 0,
            summands: Some(summands),
        })
    }

    /// The induced metric on `subset` (which must contain the base), points
    /// kept in the order given.
    pub fn restrict_subspace(&self, subset: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut seen = vec![false; n];
        for &i in subset {
            if i >= n {
                return Err(Error::IndexOutOfRange(i));
            }
            if seen[i] {
                return Err(Error::DuplicatePoint(vec![i]));
            }
            seen[i] = true;
        }
        let base = subset
            .iter()
            .position(|&i| i == self.base)
            .ok_or(Error::BaseNotIncluded)?;
        let m = subset.len();
        let mut dist = Vec::with_capacity(m * m);
        for &i in subset {
            for &j in subset {
                dist.push(self.d(i, j).clone());
            }
        }
        Ok(PointedMetricSpace {
            labels: subset.iter().map(|&i| self.labels[i].clone()).collect(),
            coords: self
                .coords
                .as_ref()
                .map(|c| subset.iter().map(|&i| c[i].clone()).collect()),
            dist,
            base,
            summands: self
                .summands
                .as_ref()
                .map(|s| subset.iter().map(|&i| s[i]).collect()),
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> &T {
        &self.dist[i * self.labels.len() + j]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn coords(&self) -> Option<&[Vec<T>]> {
        self.coords.as_deref()
    }

    /// Summand index of each point when built by [`Self::amalgam`].
    pub fn summands(&self) -> Option<&[Option<usize>]> {
        self.summands.as_deref()
    }

    pub fn distance_rows(&self) -> Vec<Vec<T>> {
        self.dist.chunks(self.len()).map(|r| r.to_vec()).collect()
    }

    /// Non-base point indices in increasing order.
    pub fn non_base(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| i != self.base)
    }

    pub fn diameter(&self) -> T {
        self.dist.iter().cloned().fold(T::zero(), T::max_of)
    }

    /// `U(x, r) = {y : d(x,y) < r}`.
    pub fn open_ball(&self, x: usize, r: &T) -> Vec<usize> {
        (0..self.len())
            .filter(|&y| self.d(x, y).cmp_tol(r) == Ordering::Less)
            .collect()
    }

    /// `B(x, r) = {y : d(x,y) <= r}`.
    pub fn closed_ball(&self, x: usize, r: &T) -> Vec<usize> {
        (0..self.len())
            .filter(|&y| self.d(x, y).cmp_tol(r) != Ordering::Greater)
            .collect()
    }

    pub fn map_scalar<U: Scalar>(&self) -> PointedMetricSpace<U> {
        PointedMetricSpace {
            labels: self.labels.clone(),
            coords: self
                .coords
                .as_ref()
                .map(|c| c.iter().map(|p| p.iter().map(convert).collect()).collect()),
            dist: self.dist.iter().map(convert).collect(),
            base: self.base,
            summands: self.summands.clone(),
        }
    }

    pub(crate) fn with_summands(mut self, summands: Option<Vec<Option<usize>>>) -> Result<Self> {
        if let Some(s) = &summands {
            if s.len() != self.len() {
                return Err(Error::LengthMismatch {
                    expected: self.len(),
                    got: s.len(),
                });
            }
        }
        self.summands = summands;
        Ok(self)
    }

    pub(crate) fn with_coords(mut self, coords: Option<Vec<Vec<T>>>) -> Result<Self> {
        if let Some(c) = &coords {
            if c.len() != self.len() {
                return Err(Error::LengthMismatch {
                    expected: self.len(),
                    got: c.len(),
                });
            }
        }
        self.coords = coords;
        Ok(self)
    }
}
