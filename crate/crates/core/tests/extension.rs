use lipfree::random::{rng, unit_point};
use lipfree::smooth::{bump_tau, tau_lipschitz_constant};
use lipfree::{c1_extend, C1Extension, Error, ExtensionCertificate, ExtensionJob};
use proptest::prelude::*;
use rand::Rng;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Points of `[0,1]^dim` at least 0.2 apart, with values of the
/// `slope`-Lipschitz function `slope * |x - p|`.
fn random_job(seed: u64, dim: usize, count: usize, gridstep: f64) -> ExtensionJob<f64> {
    let mut r = rng(seed);
    let mut pts: Vec<Vec<f64>> = Vec::new();
    while pts.len() < count {
        let x = unit_point(&mut r, dim);
        if pts.iter().all(|p| dist(p, &x) >= 0.2) {
            pts.push(x);
        }
    }
    let p = unit_point(&mut r, dim);
    let slope = r.gen_range(0.25..3.0);
    let vals = pts.iter().map(|x| slope * dist(x, &p)).collect();
    ExtensionJob::new(pts, vals, 0.1, gridstep)
}

fn probe(r: &mut impl Rng, g: &C1Extension<f64>) -> Vec<f64> {
    // half the probes land near a data point, where the correction lives
    if r.gen_bool(0.5) {
        let a = &g.points()[r.gen_range(0..g.points().len())];
        a.iter().map(|&v| v + r.gen_range(-1.5..1.5) * g.delta()).collect()
    } else {
        (0..g.dim()).map(|_| r.gen_range(-1.0..2.0)).collect()
    }
}

/// Bounds that hold for the construction at every point, checked at random
/// points away from the certificate's grid.
fn check_everywhere(job: &ExtensionJob<f64>, g: &C1Extension<f64>, cert: &ExtensionCertificate<f64>, seed: u64) {
    for (a, &v) in job.points.iter().zip(&job.values) {
        assert!((g.eval(a) - v).abs() <= 1e-12 * (1.0 + v.abs()));
        assert!((g.mcshane(a) - v).abs() <= 1e-12 * (1.0 + v.abs()));
    }
    let mut r = rng(seed);
    let slack = 1e-9;
    for _ in 0..400 {
        let x = probe(&mut r, g);
        let y: Vec<f64> = x.iter().map(|&v| v + r.gen_range(-0.05..0.05)).collect();
        let gx = g.eval(&x);
        assert!(gx.abs() < cert.f_sup + job.epsilon);
        assert!((g.mollified(&x) - g.mcshane(&x)).abs() <= cert.mollification_achieved + slack);
        assert!(g.correction(&x).abs() <= cert.mollification_target + slack);
        if job.points.iter().all(|a| dist(a, &x) >= g.delta()) {
            assert_eq!(g.correction(&x), 0.0);
        }
        let bound = (cert.lipschitz + job.epsilon) * dist(&x, &y) + slack;
        assert!((gx - g.eval(&y)).abs() <= bound, "{gx} vs {} over {}", g.eval(&y), dist(&x, &y));
    }
}

#[test]
fn two_point_job() {
    let job = ExtensionJob::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.0, 1.0], 0.1, 0.01);
    let (g, cert) = c1_extend(&job).unwrap();
    assert!(cert.residual <= 1e-12);
    assert_eq!(cert.lipschitz, 1.0);
    assert_eq!(cert.delta, 0.2);
    assert!(cert.passed(), "{:?}", cert.checks());
    check_everywhere(&job, &g, &cert, 1);
}

#[test]
fn one_dimensional_job() {
    let job = ExtensionJob::new(vec![vec![0.0], vec![0.5], vec![2.0]], vec![0.0, 0.5, -1.0], 0.05, 0.002);
    let (g, cert) = c1_extend(&job).unwrap();
    assert!(cert.passed(), "{:?}", cert.checks());
    assert_eq!(cert.dim, 1);
    assert_eq!(cert.delta, 0.1);
    check_everywhere(&job, &g, &cert, 2);
    // far from the data the infimum grows and is clamped to the largest value
    assert_eq!(g.mcshane(&[10.0]), 0.5);
    assert_eq!(g.mcshane(&[-10.0]), 0.5);
}

#[test]
fn three_dimensional_job() {
    let job = random_job(3, 3, 3, 0.05);
    let (g, cert) = c1_extend(&job).unwrap();
    assert!(cert.passed(), "{:?}", cert.checks());
    check_everywhere(&job, &g, &cert, 3);
}

#[test]
fn constant_data_is_not_rescaled() {
    let job = ExtensionJob::new(vec![vec![0.0, 0.0], vec![0.0, 1.0]], vec![0.5, 0.5], 0.1, 0.05);
    let (g, cert) = c1_extend(&job).unwrap();
    assert_eq!(g.scale(), 1.0);
    assert_eq!(cert.lipschitz, 0.0);
    assert!(cert.passed());
    let mut r = rng(4);
    for _ in 0..50 {
        let x = probe(&mut r, &g);
        assert!((g.eval(&x) - 0.5).abs() < 1e-12);
    }
}

#[test]
fn bad_jobs() {
    let base = || ExtensionJob::new(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.0, 1.0], 0.1, 0.05);
    let mut job = base();
    job.values.pop();
    assert!(matches!(c1_extend(&job), Err(Error::LengthMismatch { .. })));
    let mut job = base();
    job.points[1] = vec![1.0];
    assert!(matches!(c1_extend(&job), Err(Error::LengthMismatch { .. })));
    let mut job = base();
    job.epsilon = 0.0;
    assert!(matches!(c1_extend(&job), Err(Error::Invalid(_))));
    let mut job = base();
    job.values[0] = f64::NAN;
    assert!(matches!(c1_extend(&job), Err(Error::Invalid(_))));
    let empty: ExtensionJob<f64> = ExtensionJob::new(vec![], vec![], 0.1, 0.05);
    assert!(matches!(c1_extend(&empty), Err(Error::Invalid(_))));
    let zero_dim = ExtensionJob::new(vec![vec![]], vec![0.0], 0.1, 0.05);
    assert!(matches!(c1_extend(&zero_dim), Err(Error::UnsupportedDimension(0))));
    let mut job = base();
    job.delta = Some(0.25);
    assert!(matches!(c1_extend(&job), Err(Error::BallsOverlap(_))));
    job.delta = Some(0.24);
    assert!(c1_extend(&job).is_ok());
}

#[test]
fn repeated_runs_agree() {
    let job = random_job(9, 2, 4, 0.02);
    let (g1, c1) = c1_extend(&job).unwrap();
    let (g2, c2) = c1_extend(&job).unwrap();
    assert_eq!(c1, c2);
    assert_eq!(g1.samples(0.1).unwrap(), g2.samples(0.1).unwrap());
}

#[test]
fn sample_grid_covers_the_padded_box() {
    let job = ExtensionJob::new(vec![vec![0.0, 0.0], vec![1.0, 0.5]], vec![0.0, 1.0], 0.1, 0.1);
    let (g, _) = c1_extend(&job).unwrap();
    let grid = g.sample_grid(0.1).unwrap();
    let pad: f64 = 2.0 * g.delta();
    // the last node on each axis may overshoot by less than one step
    for x in &grid {
        assert!(x[0] >= -pad - 1e-12 && x[0] < 1.0 + pad + 0.1);
        assert!(x[1] >= -pad - 1e-12 && x[1] < 0.5 + pad + 0.1);
    }
    assert!(grid.iter().any(|x| x[0] >= 1.0 + pad - 1e-12 && x[1] >= 0.5 + pad - 1e-12));
    assert!(grid.iter().any(|x| (x[0] + pad).abs() < 1e-12 && (x[1] + pad).abs() < 1e-12));
    assert!(g.sample_grid(1e-5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_jobs_certify(seed in any::<u64>(), dim in 1usize..3, count in 1usize..5) {
        let step = if dim == 1 { 0.005 } else { 0.04 };
        let job = random_job(seed, dim, count, step);
        let (g, cert) = c1_extend(&job).unwrap();
        prop_assert!(cert.passed(), "{:?}", cert.checks());
        check_everywhere(&job, &g, &cert, seed);
    }

    #[test]
    fn tau_is_an_even_bump(delta in 0.01f64..1.0, t in -2.0f64..2.0) {
        let v = bump_tau(delta, t);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, bump_tau(delta, -t));
        if t.abs() >= delta {
            prop_assert_eq!(v, 0.0);
        }
        let k = tau_lipschitz_constant(delta);
        prop_assert!(k > 1.0);
        let s = t * 0.999;
        prop_assert!((bump_tau(delta, t) - bump_tau(delta, s)).abs() <= k * (t - s).abs() + 1e-15);
    }
}
