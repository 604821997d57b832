//! C1 extension of a Lipschitz function given on a finite set `A` in `R^d`,
//! `d <= 3`, with sampled certificates.
//!
//! The data are extended to all of `R^d` by the McShane formula, clamped to
//! the data range. That extension is averaged against a product-bump kernel on
//! a lattice far finer than the sample grid, and the remaining error at each
//! `a` is cancelled by `c_a tau(|x - a|)`, supported in `B(a, delta)`.
//! Values with Lipschitz constant `L > 0` are divided by `L` first and the
//! result is scaled back, with the error budget `epsilon / L`.

use num_traits::Float;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Half-width of the kernel lattice, in nodes.
const KERNEL_HALF: i32 = 3;
/// Lattice spacing is the kernel radius divided by this.
const KERNEL_DIV: f64 = 4.0;
pub const TAU_SAMPLES: usize = 10_000;
pub const MAX_SAMPLES: usize = 4_000_000;

fn c<F: Float>(x: f64) -> F {
    F::from(x).expect("float constant")
}

fn norm<F: Float>(v: impl Iterator<Item = F>) -> F {
    v.fold(F::zero(), |s, x| s + x * x).sqrt()
}

fn dist<F: Float>(a: &[F], b: &[F]) -> F {
    norm(a.iter().zip(b).map(|(&x, &y)| x - y))
}

/// `tau(t) = exp(-1/(delta^2 - t^2) + 1/delta^2)` on `|t| < delta`, else 0.
pub fn bump_tau<F: Float>(delta: F, t: F) -> F {
    let (d2, t2) = (delta * delta, t * t);
    if t2 >= d2 {
        return F::zero();
    }
    (-t2 / (d2 * (d2 - t2))).exp()
}

pub fn tau_derivative<F: Float>(delta: F, t: F) -> F {
    let (d2, t2) = (delta * delta, t * t);
    if t2 >= d2 {
        return F::zero();
    }
    let w = d2 - t2;
    -c::<F>(2.0) * t * bump_tau(delta, t) / (w * w)
}

/// Upper bound for `sup |tau'|`: the best of `TAU_SAMPLES` samples on
/// `(0, delta)`, refined by ternary search around it, times 1.05, and never
/// below 1.05. Decreasing in `delta` up to about `delta = 1.1`, increasing
/// after that.
pub fn tau_lipschitz_constant<F: Float>(delta: F) -> F {
    let n = TAU_SAMPLES;
    let at = |k: usize| delta * c(k as f64 / n as f64);
    let slope = |t: F| tau_derivative(delta, t).abs();
    let (mut best_k, mut best) = (1, F::zero());
    for k in 1..n {
        let v = slope(at(k));
        if v > best {
            best_k = k;
            best = v;
        }
    }
    let (mut lo, mut hi) = (at(best_k - 1), at(best_k + 1));
    for _ in 0..100 {
        let m1 = lo + (hi - lo) / c(3.0);
        let m2 = hi - (hi - lo) / c(3.0);
        if slope(m1) < slope(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let peak = best.max(slope((lo + hi) / c(2.0)));
    let k = peak * c(1.05);
    k.max(c(1.05))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionJob<F> {
    pub points: Vec<Vec<F>>,
    pub values: Vec<F>,
    pub epsilon: F,
    pub gridstep: F,
    /// Defaults to a fifth of the smallest pairwise distance.
    pub delta: Option<F>,
    /// Defaults to a radius whose error bound is half the target.
    pub kernel_radius: Option<F>,
}

impl<F: Float> ExtensionJob<F> {
    pub fn new(points: Vec<Vec<F>>, values: Vec<F>, epsilon: F, gridstep: F) -> Self {
        ExtensionJob {
            points,
            values,
            epsilon,
            gridstep,
            delta: None,
            kernel_radius: None,
        }
    }
}

/// Every bound is in the units of the input values.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionCertificate<F> {
    pub dim: usize,
    pub points: usize,
    pub epsilon: F,
    pub delta: F,
    pub gridstep: F,
    /// Lipschitz constant of the input data.
    pub lipschitz: F,
    pub tau_k: F,
    pub kernel_radius: F,
    /// `epsilon / 2K`.
    pub mollification_target: F,
    /// Largest kernel displacement times the Lipschitz constant; bounds the
    /// mollification error everywhere.
    pub mollification_achieved: F,
    pub mollification_sampled: F,
    /// `max_a |g(a) - f(a)|`.
    pub residual: F,
    pub f_sup: F,
    pub g_sup: F,
    /// Largest central difference over axis and diagonal directions.
    pub grad_max: F,
    /// Largest central difference along the axes.
    pub partial_max: F,
    /// `max(g_sup, partial_max)`.
    pub c1_norm: F,
    pub h_sup: F,
    pub h_lip: F,
    /// Round-off allowance on a difference quotient.
    pub fd_slack: F,
    /// No sample lies in two of the balls `B(a, delta)`.
    pub disjoint: bool,
    pub samples: usize,
}

impl<F: Float> ExtensionCertificate<F> {
    pub fn checks(&self) -> Vec<(&'static str, bool)> {
        let half = self.epsilon / c(2.0);
        let res_tol = c::<F>(1e-12).max(F::epsilon() * c(8.0) * (self.f_sup + F::one()));
        let c1_target = self.f_sup.max(self.lipschitz.max(F::one())) + self.epsilon;
        vec![
            ("residual", self.residual <= res_tol),
            ("sup", self.g_sup < self.f_sup + self.epsilon),
            ("gradient", self.grad_max <= self.lipschitz + half + self.fd_slack),
            ("c1-norm", self.c1_norm < c1_target),
            ("mollification", self.mollification_achieved < self.mollification_target),
            ("correction-sup", self.h_sup <= self.mollification_target),
            ("correction-lip", self.h_lip <= half + self.fd_slack),
            ("disjoint", self.disjoint),
        ]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|(_, ok)| *ok)
    }
}

/// The extension `g`, evaluable anywhere.
#[derive(Debug, Clone)]
pub struct C1Extension<F> {
    points: Vec<Vec<F>>,
    /// Data divided by `scale`, hence 1-Lipschitz.
    unit_values: Vec<F>,
    scale: F,
    range: (F, F),
    delta: F,
    kernel_radius: F,
    kernel: Vec<(Vec<F>, F)>,
    corrections: Vec<F>,
}

impl<F: Float + Send + Sync> C1Extension<F> {
    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<F>] {
        &self.points
    }

    pub fn delta(&self) -> F {
        self.delta
    }

    pub fn kernel_radius(&self) -> F {
        self.kernel_radius
    }

    /// Divisor applied to the data before extending.
    pub fn scale(&self) -> F {
        self.scale
    }

    /// Clamped McShane extension of the data, in original units.
    pub fn mcshane(&self, x: &[F]) -> F {
        self.unit_mcshane(x) * self.scale
    }

    /// The mollified extension `g~`, in original units.
    pub fn mollified(&self, x: &[F]) -> F {
        self.unit_mollified(x) * self.scale
    }

    /// The correction `h = sum_a c_a tau(|x - a|)`, in original units.
    pub fn correction(&self, x: &[F]) -> F {
        self.unit_correction(x) * self.scale
    }

    pub fn eval(&self, x: &[F]) -> F {
        (self.unit_mollified(x) + self.unit_correction(x)) * self.scale
    }

    fn unit_mcshane(&self, x: &[F]) -> F {
        let m = self
            .points
            .iter()
            .zip(&self.unit_values)
            .map(|(a, &v)| v + dist(x, a))
            .fold(F::infinity(), F::min);
        m.max(self.range.0).min(self.range.1)
    }

    fn unit_mollified(&self, x: &[F]) -> F {
        let mut y = x.to_vec();
        let mut s = F::zero();
        for (node, w) in &self.kernel {
            for ((yi, &xi), &ni) in y.iter_mut().zip(x).zip(node) {
                *yi = xi - ni;
            }
            s = s + *w * self.unit_mcshane(&y);
        }
        s
    }

    fn unit_correction(&self, x: &[F]) -> F {
        self.points
            .iter()
            .zip(&self.corrections)
            .map(|(a, &ca)| ca * bump_tau(self.delta, dist(x, a)))
            .fold(F::zero(), |s, v| s + v)
    }

    /// Sample grid with spacing `gridstep` over the bounding box of the data
    /// grown by `2 delta`, in row-major order.
    pub fn sample_grid(&self, gridstep: F) -> Result<Vec<Vec<F>>> {
        let d = self.dim();
        let pad = self.delta * c(2.0);
        let mut axes = Vec::with_capacity(d);
        let mut total = 1usize;
        for i in 0..d {
            let lo = self.points.iter().map(|p| p[i]).fold(F::infinity(), F::min) - pad;
            let hi = self.points.iter().map(|p| p[i]).fold(F::neg_infinity(), F::max) + pad;
            let steps = ((hi - lo) / gridstep).ceil().to_usize().unwrap_or(usize::MAX);
            total = total.saturating_mul(steps.saturating_add(1));
            if total > MAX_SAMPLES {
                return Err(Error::Invalid(format!("sample grid exceeds {MAX_SAMPLES} points")));
            }
            axes.push((0..=steps).map(|k| lo + gridstep * c(k as f64)).collect::<Vec<F>>());
        }
        let mut grid = vec![Vec::with_capacity(d)];
        for axis in &axes {
            grid = grid
                .into_iter()
                .flat_map(|p| {
                    axis.iter().map(move |&t| {
                        let mut q = p.clone();
                        q.push(t);
                        q
                    })
                })
                .collect();
        }
        Ok(grid)
    }

    /// `(x, g(x))` over the sample grid.
    pub fn samples(&self, gridstep: F) -> Result<Vec<(Vec<F>, F)>> {
        let grid = self.sample_grid(gridstep)?;
        Ok(grid
            .into_par_iter()
            .map(|x| {
                let g = self.eval(&x);
                (x, g)
            })
            .collect())
    }
}

fn build_kernel<F: Float>(dim: usize, radius: F) -> Vec<(Vec<F>, F)> {
    let step = radius / c(KERNEL_DIV);
    let bump = |j: i32| {
        let t = j as f64 / KERNEL_DIV;
        (-1.0 / (1.0 - t * t)).exp()
    };
    let mut nodes: Vec<(Vec<i32>, f64)> = vec![(Vec::new(), 1.0)];
    for _ in 0..dim {
        nodes = nodes
            .into_iter()
            .flat_map(|(idx, w)| {
                (-KERNEL_HALF..=KERNEL_HALF).map(move |j| {
                    let mut i = idx.clone();
                    i.push(j);
                    (i, w * bump(j))
                })
            })
            .collect();
    }
    let total: f64 = nodes.iter().map(|(_, w)| w).sum();
    nodes
        .into_iter()
        .map(|(idx, w)| (idx.iter().map(|&j| step * c(j as f64)).collect(), c(w / total)))
        .collect()
}

#[derive(Clone, Copy)]
struct SampleStats<F> {
    g_sup: F,
    grad: F,
    partial: F,
    h_sup: F,
    h_lip: F,
    moll: F,
    disjoint: bool,
}

impl<F: Float> SampleStats<F> {
    fn merge(self, o: Self) -> Self {
        SampleStats {
            g_sup: self.g_sup.max(o.g_sup),
            grad: self.grad.max(o.grad),
            partial: self.partial.max(o.partial),
            h_sup: self.h_sup.max(o.h_sup),
            h_lip: self.h_lip.max(o.h_lip),
            moll: self.moll.max(o.moll),
            disjoint: self.disjoint && o.disjoint,
        }
    }

    fn empty() -> Self {
        SampleStats {
            g_sup: F::zero(),
            grad: F::zero(),
            partial: F::zero(),
            h_sup: F::zero(),
            h_lip: F::zero(),
            moll: F::zero(),
            disjoint: true,
        }
    }
}

/// Axis directions first, then `(e_i +- e_j) / sqrt 2`.
fn directions<F: Float>(dim: usize) -> Vec<Vec<F>> {
    let mut out = Vec::new();
    for i in 0..dim {
        let mut v = vec![F::zero(); dim];
        v[i] = F::one();
        out.push(v);
    }
    let r = c::<F>(0.5).sqrt();
    for i in 0..dim {
        for j in i + 1..dim {
            for s in [F::one(), -F::one()] {
                let mut v = vec![F::zero(); dim];
                v[i] = r;
                v[j] = s * r;
                out.push(v);
            }
        }
    }
    out
}

pub fn c1_extend<F: Float + Send + Sync>(job: &ExtensionJob<F>) -> Result<(C1Extension<F>, ExtensionCertificate<F>)> {
    let n = job.points.len();
    if n == 0 {
        return Err(Error::Invalid("no points".into()));
    }
    if job.values.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: job.values.len(),
        });
    }
    let dim = job.points[0].len();
    if dim == 0 || dim > 3 {
        return Err(Error::UnsupportedDimension(dim));
    }
    if let Some(p) = job.points.iter().find(|p| p.len() != dim) {
        return Err(Error::LengthMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    let finite = job.points.iter().flatten().chain(&job.values).all(|v| v.is_finite());
    if !finite || !(job.epsilon > F::zero()) || !(job.gridstep > F::zero()) {
        return Err(Error::Invalid("points, values, epsilon and gridstep must be finite and positive where required".into()));
    }

    let mut min_dist = F::infinity();
    let mut lip = F::zero();
    for i in 0..n {
        for j in i + 1..n {
            let d = dist(&job.points[i], &job.points[j]);
            if d == F::zero() {
                return Err(Error::DuplicatePoint(vec![i, j]));
            }
            min_dist = min_dist.min(d);
            lip = lip.max((job.values[i] - job.values[j]).abs() / d);
        }
    }
    let delta = match job.delta {
        Some(d) => d,
        None if n == 1 => c(0.2),
        None => min_dist / c(5.0),
    };
    if !(delta > F::zero()) || delta * c(4.0) >= min_dist {
        return Err(Error::BallsOverlap(delta.to_f64().unwrap_or(f64::NAN)));
    }

    let scale = if lip > F::zero() { lip } else { F::one() };
    let unit_eps = job.epsilon / scale;
    let tau_k = tau_lipschitz_constant(delta);
    let unit_target = unit_eps / (c::<F>(2.0) * tau_k);
    let sqrt_d = c::<F>(dim as f64).sqrt();
    let radius = job.kernel_radius.unwrap_or(unit_target / (c::<F>(2.0) * sqrt_d));
    if !(radius > F::zero()) {
        return Err(Error::Invalid("kernel radius must be positive".into()));
    }
    let kernel = build_kernel(dim, radius);
    let unit_achieved = kernel
        .iter()
        .map(|(y, _)| norm(y.iter().copied()))
        .fold(F::zero(), F::max);
    if unit_achieved >= unit_target {
        return Err(Error::MollificationTooCoarse {
            achieved: (unit_achieved * scale).to_f64().unwrap_or(f64::NAN),
            target: (unit_target * scale).to_f64().unwrap_or(f64::NAN),
        });
    }

    let unit_values: Vec<F> = job.values.iter().map(|&v| v / scale).collect();
    let range = unit_values
        .iter()
        .fold((F::infinity(), F::neg_infinity()), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let mut ext = C1Extension {
        points: job.points.clone(),
        unit_values,
        scale,
        range,
        delta,
        kernel_radius: radius,
        kernel,
        corrections: vec![F::zero(); n],
    };
    ext.corrections = (0..n)
        .map(|i| ext.unit_values[i] - ext.unit_mollified(&ext.points[i]))
        .collect();

    let residual = job
        .points
        .iter()
        .zip(&job.values)
        .map(|(a, &v)| (ext.eval(a) - v).abs())
        .fold(F::zero(), F::max);
    let f_sup = job.values.iter().map(|v| v.abs()).fold(F::zero(), F::max);

    let grid = ext.sample_grid(job.gridstep)?;
    let dirs = directions::<F>(dim);
    let h = job.gridstep;
    let two_h = h * c(2.0);
    let stats = grid
        .par_iter()
        .map(|x| {
            let mut st = SampleStats::empty();
            let g = ext.eval(x);
            let m = ext.unit_mollified(x);
            st.g_sup = g.abs();
            st.moll = (m - ext.unit_mcshane(x)).abs() * scale;
            st.h_sup = ext.correction(x).abs();
            let inside = ext.points.iter().filter(|a| dist(x, a) < delta).count();
            st.disjoint = inside <= 1;
            let mut plus = x.clone();
            let mut minus = x.clone();
            for (k, v) in dirs.iter().enumerate() {
                for i in 0..dim {
                    plus[i] = x[i] + h * v[i];
                    minus[i] = x[i] - h * v[i];
                }
                let dg = ((ext.eval(&plus) - ext.eval(&minus)) / two_h).abs();
                let dh = ((ext.correction(&plus) - ext.correction(&minus)) / two_h).abs();
                st.grad = st.grad.max(dg);
                st.h_lip = st.h_lip.max(dh);
                if k < dim {
                    st.partial = st.partial.max(dg);
                }
            }
            st
        })
        .reduce(SampleStats::empty, SampleStats::merge);

    let fd_slack = F::epsilon() * c(8.0) * (stats.g_sup + scale) / h;
    let cert = ExtensionCertificate {
        dim,
        points: n,
        epsilon: job.epsilon,
        delta,
        gridstep: job.gridstep,
        lipschitz: lip,
        tau_k,
        kernel_radius: radius,
        mollification_target: unit_target * scale,
        mollification_achieved: unit_achieved * scale,
        mollification_sampled: stats.moll,
        residual,
        f_sup,
        g_sup: stats.g_sup,
        grad_max: stats.grad,
        partial_max: stats.partial,
        c1_norm: stats.g_sup.max(stats.partial),
        h_sup: stats.h_sup,
        h_lip: stats.h_lip,
        fd_slack,
        disjoint: stats.disjoint,
        samples: grid.len(),
    };
    Ok((ext, cert))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_values() {
        assert_eq!(bump_tau(0.3, 0.0), 1.0);
        assert_eq!(bump_tau(0.3, 0.3), 0.0);
        assert_eq!(bump_tau(0.3, -0.3), 0.0);
        let d: f64 = 0.3;
        let expect = (-1.0 / (3.0 * d * d)).exp();
        assert!((bump_tau(d, d / 2.0) - expect).abs() < 1e-15);
        assert_eq!(bump_tau(d, 0.1), bump_tau(d, -0.1));
    }

    #[test]
    fn tau_constant_dominates_samples() {
        for &d in &[2.0_f64, 0.5, 0.1, 0.01] {
            let k = tau_lipschitz_constant(d);
            assert!(k > 1.0);
            let worst = (0..=TAU_SAMPLES)
                .map(|i| tau_derivative(d, -d + 2.0 * d * i as f64 / TAU_SAMPLES as f64).abs())
                .fold(0.0, f64::max);
            assert!(worst <= k);
            if d <= 1.0 {
                assert!(tau_lipschitz_constant(d / 2.0) >= k);
            }
        }
        // the edge steepens again for wide bumps
        assert!(tau_lipschitz_constant(4.0) > tau_lipschitz_constant(1.0));
    }

    #[test]
    fn zero_data() {
        let job = ExtensionJob::new(vec![vec![0.0, 0.0]], vec![0.0], 0.1, 0.05);
        let (g, cert) = c1_extend(&job).unwrap();
        assert_eq!(cert.residual, 0.0);
        assert_eq!(cert.g_sup, 0.0);
        assert_eq!(g.eval(&[0.3, -0.2]), 0.0);
        assert!(cert.passed());
    }

    #[test]
    fn two_points() {
        let job = ExtensionJob::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.0, 1.0], 0.1, 0.01);
        let (g, cert) = c1_extend(&job).unwrap();
        assert!((g.eval(&[1.0, 0.0]) - 1.0).abs() <= 1e-12);
        assert!(cert.residual <= 1e-12);
        assert!(cert.grad_max <= 1.1, "{cert:?}");
        assert!(cert.passed(), "{cert:?}");
    }

    #[test]
    fn unit_square_corners() {
        let pts = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        let vals: Vec<f64> = pts.iter().map(|p: &Vec<f64>| (p[0] * p[0] + p[1] * p[1]).sqrt().min(1.0)).collect();
        let (g, cert) = c1_extend(&ExtensionJob::new(pts.clone(), vals, 0.1, 0.02)).unwrap();
        assert!(cert.residual <= 1e-12);
        assert!(cert.disjoint);
        for (i, a) in pts.iter().enumerate() {
            for (j, b) in pts.iter().enumerate() {
                if i != j {
                    assert!(dist(a, b) > 2.0 * g.delta());
                }
            }
        }
        assert!(cert.passed(), "{cert:?}");
    }

    #[test]
    fn steep_data_is_rescaled() {
        let job = ExtensionJob::new(vec![vec![0.0], vec![0.5]], vec![0.0, 2.0], 0.1, 0.005);
        let (g, cert) = c1_extend(&job).unwrap();
        assert_eq!(g.scale(), 4.0);
        assert!(cert.grad_max <= 4.0 + 0.05 + cert.fd_slack);
        assert!(cert.passed(), "{cert:?}");
    }

    #[test]
    fn rejects_bad_jobs() {
        let mut job = ExtensionJob::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.0, 1.0], 0.1, 0.05);
        job.delta = Some(0.25);
        assert!(matches!(c1_extend(&job), Err(Error::BallsOverlap(_))));
        job.delta = None;
        job.kernel_radius = Some(0.5);
        assert!(matches!(c1_extend(&job), Err(Error::MollificationTooCoarse { .. })));
        let four = ExtensionJob::new(vec![vec![0.0; 4]], vec![0.0], 0.1, 0.05);
        assert!(matches!(c1_extend(&four), Err(Error::UnsupportedDimension(4))));
        let dup = ExtensionJob::new(vec![vec![0.0], vec![0.0]], vec![0.0, 0.0], 0.1, 0.05);
        assert!(matches!(c1_extend(&dup), Err(Error::DuplicatePoint(_))));
    }

    #[test]
    fn single_precision() {
        let job = ExtensionJob::new(vec![vec![0.0f32, 0.0], vec![1.0, 0.0]], vec![0.0f32, 1.0], 0.1, 0.02);
        let (g, cert) = c1_extend(&job).unwrap();
        assert!((g.eval(&[1.0, 0.0]) - 1.0).abs() < 1e-5);
        assert!(cert.disjoint);
    }
}
