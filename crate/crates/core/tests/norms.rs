use lipfree::free::{decomposition_cost, kr_norm_dual, kr_norm_primal};
use lipfree::lip::subspace_embedding;
use lipfree::lp::{LinearProgram, Relation};
use lipfree::random::{random_metric, random_subset_with_base, random_vector, rational, rng};
use lipfree::{
    check_duality, kr_norm, mcshane_extend, Error, FloatSpace, FreeVector, LipFunction, Rational, RationalSpace,
    Scalar,
};
use proptest::prelude::*;
use rand::Rng;

fn q(p: i64) -> Rational {
    Rational::from_i64(p)
}

fn line(points: &[i64]) -> RationalSpace {
    RationalSpace::from_points_euclidean(points.iter().map(|&p| vec![q(p)]).collect(), 0).unwrap()
}

/// `{0, a, b}` with `d(0,a) = d(0,b) = 1`, `d(a,b) = 2`.
fn vee() -> RationalSpace {
    RationalSpace::build(
        vec!["0".into(), "a".into(), "b".into()],
        vec![vec![q(0), q(1), q(1)], vec![q(1), q(0), q(2)], vec![q(1), q(2), q(0)]],
        0,
    )
    .unwrap()
}

/// Transport LP over every ordered pair of points: minimise the cost of a
/// nonnegative flow whose net outflow at each non-base point is its mass.
fn transport_oracle(mu: &FreeVector<'_, Rational>) -> Rational {
    let m = mu.space();
    let n = m.len();
    let arcs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let mut lp = LinearProgram::new(arcs.iter().map(|&(i, j)| -m.d(i, j).clone()).collect());
    for v in m.non_base() {
        let row = arcs
            .iter()
            .map(|&(i, j)| {
                if i == v {
                    q(1)
                } else if j == v {
                    q(-1)
                } else {
                    q(0)
                }
            })
            .collect();
        lp.push(row, Relation::Eq, mu.coeff(v));
    }
    let (value, _) = lp.solve().unwrap().optimal().unwrap();
    -value
}

#[test]
fn lip_norm_examples() {
    let m = line(&[0, 1, 3]);
    assert_eq!(LipFunction::zero(&m).lip_norm().value, q(0));
    let dist = LipFunction::distance_to_base(&m).lip_norm();
    assert_eq!(dist.value, q(1));
    let (x, y) = dist.witness.unwrap();
    assert!(x != y && (x == m.base() || y == m.base()));
    let f = LipFunction::new(&m, vec![q(0), q(1), q(0)]).unwrap();
    assert_eq!(f.lip_norm().value, q(1));
    assert_eq!(f.lip_norm().witness, Some((0, 1)));
    assert!(matches!(
        LipFunction::new(&m, vec![q(1), q(1), q(0)]),
        Err(Error::Invalid(_))
    ));
}

#[test]
fn mcshane_examples() {
    let m = line(&[0, 1, 2]);
    let f = LipFunction::new(&m, vec![q(0), q(1), q(2)]).unwrap();
    assert_eq!(mcshane_extend(&f, &m).unwrap().values(), f.values());

    let n = m.restrict_subspace(&[0, 2]).unwrap();
    let g = LipFunction::new(&n, vec![q(0), q(2)]).unwrap();
    let big = mcshane_extend(&g, &m).unwrap();
    assert_eq!(big.values(), &[q(0), q(1), q(2)]);
    assert_eq!(big.lip_norm().value, g.lip_norm().value);

    let other = line(&[0, 5]);
    let h = LipFunction::new(&other, vec![q(0), q(1)]).unwrap();
    assert!(matches!(mcshane_extend(&h, &m), Err(Error::SubspaceMismatch(_))));
}

#[test]
fn dipoles_and_zero() {
    let m = vee();
    for (x, y) in [(0, 1), (1, 2), (0, 2)] {
        let mu = FreeVector::dipole(&m, x, y).unwrap();
        assert_eq!(kr_norm_dual(&mu).unwrap().0, *m.d(x, y));
        assert_eq!(check_duality(&mu).unwrap().gap, q(0));
    }
    let zero = FreeVector::zero(&m);
    assert_eq!(kr_norm_dual(&zero).unwrap().0, q(0));
    let cert = check_duality(&zero).unwrap();
    assert_eq!(cert.value, q(0));
    assert!(cert.primal.terms.is_empty());
}

#[test]
fn vee_instance() {
    let m = vee();
    let mu = FreeVector::new(&m, [(1, q(1)), (2, q(1))]).unwrap();
    let (v, f) = kr_norm_dual(&mu).unwrap();
    assert_eq!(v, q(2));
    assert_eq!(f.values(), &[q(0), q(1), q(1)]);
    let (p, dec) = kr_norm_primal(&mu).unwrap();
    assert_eq!(p, q(2));
    let mut terms = dec.terms.clone();
    terms.sort();
    assert_eq!(terms, vec![(q(1), 1, 0), (q(1), 2, 0)]);
    assert_eq!(transport_oracle(&mu), q(2));
}

#[test]
fn primal_examples() {
    let m = line(&[0, 2, 5]);
    let mu = FreeVector::new(&m, [(1, q(2)), (2, q(-2))]).unwrap();
    let (v, dec) = kr_norm_primal(&mu).unwrap();
    assert_eq!(v, q(6));
    assert_eq!(dec.terms, vec![(q(2), 1, 2)]);
    let (v, dec) = kr_norm_primal(&FreeVector::dirac(&m, 2).unwrap()).unwrap();
    assert_eq!(v, q(5));
    assert_eq!(dec.terms, vec![(q(1), 2, 0)]);
}

#[test]
fn decomposition_costs() {
    let m = line(&[0, 2, 5]);
    let (c, rep) = decomposition_cost(&m, &[(q(1), 1, 2)]).unwrap();
    assert_eq!(c, q(3));
    assert_eq!(rep, FreeVector::dipole(&m, 1, 2).unwrap());
    let (c, rep) = decomposition_cost(&m, &[]).unwrap();
    assert_eq!(c, q(0));
    assert!(rep.is_zero());
    // a wasteful route for delta_2 costs more than the norm
    let (c, rep) = decomposition_cost(&m, &[(q(1), 2, 1), (q(1), 1, 0)]).unwrap();
    assert_eq!(rep, FreeVector::dirac(&m, 2).unwrap());
    assert!(c >= kr_norm(&rep).unwrap());
}

#[test]
fn duality_on_eight_points() {
    let mut r = rng(8);
    for _ in 0..50 {
        let m = random_metric(&mut r, 8);
        let mu = random_vector(&mut r, &m, 7).unwrap();
        let cert = check_duality(&mu).unwrap();
        assert_eq!(cert.gap, q(0));
        assert!(cert.dual.lip_norm().value <= q(1));
    }
}

#[test]
fn float_mode_duality() {
    let m = random_metric(&mut rng(5), 7).map_scalar::<f64>();
    let mf: &FloatSpace = &m;
    let mu = FreeVector::new(mf, [(1, 0.5), (3, -1.25), (6, 2.0)]).unwrap();
    let cert = check_duality(&mu).unwrap();
    assert!(cert.gap.abs() <= 1e-9 * (1.0 + cert.value));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn primal_matches_transport_oracle(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng(seed);
        let m = random_metric(&mut r, n);
        let mu = random_vector(&mut r, &m, n).unwrap();
        let (p, dec) = kr_norm_primal(&mu).unwrap();
        prop_assert_eq!(&p, &transport_oracle(&mu));
        let (cost, rep) = decomposition_cost(&m, &dec.terms).unwrap();
        prop_assert_eq!(cost, p.clone());
        prop_assert_eq!(rep, mu.clone());
        prop_assert_eq!(kr_norm_dual(&mu).unwrap().0, p);
    }

    #[test]
    fn norm_axioms(seed in any::<u64>(), n in 2usize..9) {
        let mut r = rng(seed);
        let m = random_metric(&mut r, n);
        let mu = random_vector(&mut r, &m, n).unwrap();
        let nu = random_vector(&mut r, &m, n).unwrap();
        let t = rational(&mut r, 7, 5);
        prop_assert_eq!(kr_norm(&mu.scale(&t)).unwrap(), t.abs() * kr_norm(&mu).unwrap());
        prop_assert!(kr_norm(&mu.add(&nu)).unwrap() <= kr_norm(&mu).unwrap() + kr_norm(&nu).unwrap());
    }

    #[test]
    fn any_decomposition_costs_at_least_the_norm(seed in any::<u64>(), n in 3usize..8) {
        let mut r = rng(seed);
        let m = random_metric(&mut r, n);
        let terms: Vec<(Rational, usize, usize)> = (0..r.gen_range(1..6))
            .map(|_| {
                let y = r.gen_range(0..n);
                let z = (y + r.gen_range(1..n)) % n;
                (rational(&mut r, 5, 3), y, z)
            })
            .collect();
        let (cost, rep) = decomposition_cost(&m, &terms).unwrap();
        prop_assert!(cost >= kr_norm(&rep).unwrap());
    }

    #[test]
    fn subspace_embedding_is_isometric(seed in any::<u64>(), n in 3usize..10) {
        let mut r = rng(seed);
        let m = random_metric(&mut r, n);
        let sub = random_subset_with_base(&mut r, &m);
        prop_assume!(sub.len() >= 2);
        let small = m.restrict_subspace(&sub).unwrap();
        let mu = random_vector(&mut r, &small, small.len()).unwrap();
        let emb = subspace_embedding(&small, &m).unwrap();
        prop_assert_eq!(&emb, &sub);
        prop_assert_eq!(kr_norm(&mu).unwrap(), kr_norm(&mu.push_forward(&m, &emb).unwrap()).unwrap());
    }

    #[test]
    fn mcshane_preserves_values_and_norm(seed in any::<u64>(), n in 3usize..13) {
        let mut r = rng(seed);
        let m = random_metric(&mut r, n);
        let sub = random_subset_with_base(&mut r, &m);
        let small = m.restrict_subspace(&sub).unwrap();
        let values: Vec<Rational> = (0..small.len())
            .map(|i| if i == small.base() { q(0) } else { rational(&mut r, 9, 4) })
            .collect();
        let f = LipFunction::new(&small, values).unwrap();
        let big = mcshane_extend(&f, &m).unwrap();
        for (k, &i) in sub.iter().enumerate() {
            prop_assert_eq!(big.value(i), f.value(k));
        }
        prop_assert_eq!(big.lip_norm().value, f.lip_norm().value);
        let fm = m.map_scalar::<f64>();
        let fs = small.map_scalar::<f64>();
        let ff = LipFunction::new(&fs, f.values().iter().map(|v| v.to_f64()).collect()).unwrap();
        let fb = mcshane_extend(&ff, &fm).unwrap();
        prop_assert!((fb.lip_norm().value - ff.lip_norm().value).abs() <= 1e-12);
    }

    #[test]
    fn lip_norm_is_a_norm(seed in any::<u64>(), n in 2usize..9) {
        let mut r = rng(seed);
        let m = random_metric(&mut r, n);
        let draw = |r: &mut rand_chacha::ChaCha8Rng| {
            let v = (0..n).map(|i| if i == 0 { q(0) } else { rational(r, 9, 4) }).collect();
            LipFunction::new(&m, v).unwrap()
        };
        let (f, g) = (draw(&mut r), draw(&mut r));
        let t = rational(&mut r, 5, 3);
        prop_assert_eq!(f.scale(&t).lip_norm().value, t.abs() * f.lip_norm().value);
        prop_assert!(f.add(&g).lip_norm().value <= f.lip_norm().value + g.lip_norm().value);
    }
}
