//! Approximating a finite-dimensional subspace of `F([0,1]^2)` by one living
//! on the grid `nA_n`, with an explicit certificate.
//!
//! Given a basis `e_1..e_m` of point-mass combinations, each support point is
//! snapped to its nearest grid point `(i/n, j/n)`, giving `e'_i`. The grid
//! size `n` is the smallest power of two whose half cell diagonal
//! `sqrt(2)/(2n)` is below `delta/(2 m l alpha D)`, where
//! `delta = eps/(2+eps)`, `l` is the largest support size, `alpha` the largest
//! coefficient and `D` the domination constant. The per-vector errors
//! `||e_i - e'_i||` are computed exactly; the Banach-Mazur bound
//! `||T|| ||T^-1||` of `e_i -> e'_i` is evaluated in floating point.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::free::{kr_norm, FreeVector};
use crate::geom::subspace::{bm_upper_bound, domination_constant, inverse_domination_transport, SubspaceBasis, SubspaceMap};
use crate::metric::PointedMetricSpace;
use crate::scalar::{Rational, Scalar, Surd};

#[derive(Debug, Clone)]
pub struct Claim5Outcome {
    pub n: u64,
    pub epsilon: Rational,
    pub delta: Rational,
    /// `1/D`, exact.
    pub d_inverse: Surd,
    pub d: f64,
    /// `D` recomputed from the polyhedral norm in floating point.
    pub d_vertex_route: f64,
    pub per_vector_error: Vec<Surd>,
    /// `||e_i - e'_i|| < delta/(mD)`, decided exactly.
    pub error_ok: Vec<bool>,
    pub bm_upper: f64,
    /// `bm_upper <= 1 + eps`.
    pub bm_ok: bool,
    /// Base plus original and snapped points.
    pub union: PointedMetricSpace<Surd>,
    /// Base plus the snapped points, labelled as points of `nA_n`.
    pub snapped: PointedMetricSpace<Surd>,
    /// `e'_i` as `(index in snapped, coefficient)`.
    pub codomain: Vec<Vec<(usize, Surd)>>,
}

impl Claim5Outcome {
    pub fn codomain_basis(&self) -> Result<SubspaceBasis<'_, Surd>> {
        let vs = self
            .codomain
            .iter()
            .map(|v| FreeVector::new(&self.snapped, v.iter().cloned()))
            .collect::<Result<Vec<_>>>()?;
        SubspaceBasis::new(vs)
    }

    pub fn passed(&self) -> bool {
        self.bm_ok && self.error_ok.iter().all(|&b| b)
    }
}

type Point = (Rational, Rational);

fn planar_coords(space: &PointedMetricSpace<Surd>) -> Result<Vec<Point>> {
    let coords = space
        .coords()
        .ok_or_else(|| Error::Invalid("basis space has no coordinates".into()))?;
    let unit = |v: &Surd| {
        v.to_rational()
            .filter(|q| !q.is_negative() && *q <= Rational::one())
    };
    coords
        .iter()
        .enumerate()
        .map(|(i, c)| match c.as_slice() {
            [x, y] => match (unit(x), unit(y)) {
                (Some(x), Some(y)) => Ok((x, y)),
                _ => Err(Error::Invalid(format!("point {} is not a rational point of [0,1]^2", space.label(i)))),
            },
            _ => Err(Error::UnsupportedDimension(c.len())),
        })
        .collect()
}

fn snap(v: &Rational, n: u64) -> Rational {
    let nq = Rational::from_integer(n.into());
    let half = Rational::new(1.into(), 2.into());
    (v * &nq + half).floor() / nq
}

fn grid_label(p: &Point) -> String {
    format!("({},{})", p.0, p.1)
}

pub fn claim5_grid_approximation(basis: &SubspaceBasis<'_, Surd>, epsilon: &Rational) -> Result<Claim5Outcome> {
    if !epsilon.is_positive() {
        return Err(Error::Invalid(format!("epsilon {epsilon} must be positive")));
    }
    let space = basis.space();
    let pts = planar_coords(space)?;
    if !pts[space.base()].0.is_zero() || !pts[space.base()].1.is_zero() {
        return Err(Error::Invalid("base point must be the origin".into()));
    }
    let m = basis.dim() as i64;
    let l = basis.vectors().iter().map(|v| v.coeffs().len()).max().unwrap_or(0).max(1) as i64;
    let alpha = basis
        .vectors()
        .iter()
        .flat_map(|v| v.coeffs().values().map(Scalar::abs))
        .fold(Surd::zero(), Surd::max_of);
    let two = Rational::from_integer(2.into());
    let delta = epsilon / (&two + epsilon);
    let nu = inverse_domination_transport(basis)?;
    let sq = Surd::parse_value("sqrt(2)").expect("literal");

    // sqrt(2)/(2n) < delta/(2 m l alpha D)  <=>  sqrt(2) m l alpha < n delta nu
    let lhs = sq.clone() * Surd::from_integer(m * l) * alpha.clone();
    let dn = Surd::from_rational(delta.clone()) * nu.clone();
    let mut n: u64 = 2;
    let guess = lhs.to_f64() / dn.to_f64();
    while (n as f64) < guess / 2.0 {
        n *= 2;
    }
    while Surd::from_integer(n as i64) * dn.clone() <= lhs {
        n *= 2;
    }

    // union of base, support points and their snaps, keyed by coordinates
    let support = basis.support();
    let mut index: BTreeMap<Point, usize> = BTreeMap::new();
    let mut labels = Vec::new();
    let mut coords = Vec::new();
    let mut add = |p: Point, label: String| {
        *index.entry(p.clone()).or_insert_with(|| {
            labels.push(label);
            coords.push(vec![Surd::from_rational(p.0), Surd::from_rational(p.1)]);
            labels.len() - 1
        })
    };
    let origin = (Rational::zero(), Rational::zero());
    add(origin.clone(), "(0,0)".into());
    let orig: BTreeMap<usize, usize> = support
        .iter()
        .map(|&x| (x, add(pts[x].clone(), space.label(x).to_string())))
        .collect();
    let snapped_pt: BTreeMap<usize, Point> = support
        .iter()
        .map(|&x| (x, (snap(&pts[x].0, n), snap(&pts[x].1, n))))
        .collect();
    let snap_idx: BTreeMap<usize, usize> = snapped_pt
        .iter()
        .map(|(&x, p)| (x, add(p.clone(), grid_label(p))))
        .collect();
    let union = PointedMetricSpace::from_labeled_points(labels, coords, 0)?;

    let mut per_vector_error = Vec::new();
    let mut error_ok = Vec::new();
    let mut dom_u = Vec::new();
    let mut cod_u = Vec::new();
    for v in basis.vectors() {
        let e = FreeVector::new(&union, v.coeffs().iter().map(|(x, a)| (orig[x], a.clone())))?;
        let e2 = FreeVector::new(&union, v.coeffs().iter().map(|(x, a)| (snap_idx[x], a.clone())))?;
        let err = kr_norm(&e.add(&e2.scale(&-Surd::one())))?;
        // err < delta/(m D)  <=>  m err < delta nu
        error_ok.push(Surd::from_integer(m) * err.clone() < dn);
        per_vector_error.push(err);
        dom_u.push(e);
        cod_u.push(e2);
    }

    // Banach-Mazur certificate on the union space in floating point
    let uf: PointedMetricSpace<f64> = union.map_scalar();
    let tof = |v: &FreeVector<'_, Surd>| FreeVector::new(&uf, v.coeffs().iter().map(|(&i, a)| (i, a.to_f64())));
    let dom_f = SubspaceBasis::new(dom_u.iter().map(tof).collect::<Result<_>>()?)?;
    let cod_f = SubspaceBasis::new(cod_u.iter().map(tof).collect::<Result<_>>()?)?;
    let d_vertex_route = domination_constant(&dom_f)?;
    let bm_upper = bm_upper_bound(&SubspaceMap::coordinatewise(dom_f, cod_f)?)?;
    let eps_f = Surd::from_rational(epsilon.clone()).to_f64();
    let bm_ok = bm_upper <= 1.0 + eps_f + 1e-9;

    // the snapped subspace of nA_n
    let mut grid_pts: Vec<Point> = vec![origin];
    for p in snapped_pt.values() {
        if !grid_pts.contains(p) {
            grid_pts.push(p.clone());
        }
    }
    let snapped = PointedMetricSpace::from_labeled_points(
        grid_pts.iter().map(grid_label).collect(),
        grid_pts
            .iter()
            .map(|p| vec![Surd::from_rational(p.0.clone()), Surd::from_rational(p.1.clone())])
            .collect(),
        0,
    )?;
    let codomain = basis
        .vectors()
        .iter()
        .map(|v| {
            v.coeffs()
                .iter()
                .map(|(x, a)| {
                    let p = &snapped_pt[x];
                    let i = grid_pts.iter().position(|g| g == p).expect("snapped point listed");
                    (i, a.clone())
                })
                .collect()
        })
        .collect();

    Ok(Claim5Outcome {
        n,
        epsilon: epsilon.clone(),
        delta,
        d: 1.0 / nu.to_f64(),
        d_inverse: nu,
        d_vertex_route,
        per_vector_error,
        error_ok,
        bm_upper,
        bm_ok,
        union,
        snapped,
        codomain,
    })
}
