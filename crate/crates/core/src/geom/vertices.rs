//! Vertices of the unit ball `{f : f(base) = 0, |f(x) - f(y)| <= d(x,y)}`.
//!
//! Double description over the difference constraints: start from the box
//! `|f(x)| <= d(x, base)` and cut by one constraint `f(a) - f(b) <= d(a,b)`
//! at a time. Every constraint row is `e_a - e_b`, so the rank of a set of
//! tight constraints is `n - (#components)` of the graph they span on the
//! points. Two vertices are adjacent exactly when their common tight
//! constraints leave two components, and a new vertex is recovered by walking
//! tight edges out from the base, which only adds distances.

use std::cmp::Ordering;
use std::collections::VecDeque;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free::FreeVector;
use crate::lip::LipFunction;
use crate::metric::PointedMetricSpace;
use crate::scalar::Scalar;

pub const DEFAULT_CAP: usize = 10;

/// Vertex cap, overridden by the `LIPFREE_CAP` environment variable.
pub fn vertex_cap() -> usize {
    std::env::var("LIPFREE_CAP")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_CAP)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.0[ra] = rb;
        true
    }
}

/// The vertex list of the Lipschitz unit ball together with each vertex's
/// tight constraints `(a, b)`, meaning `f(a) - f(b) = d(a, b)`.
#[derive(Debug, Clone)]
pub struct LipBall<'a, T> {
    space: &'a PointedMetricSpace<T>,
    constraints: Vec<(usize, usize)>,
    vertices: Vec<Vec<T>>,
    tight: Vec<Bits>,
}

impl<'a, T: Scalar> LipBall<'a, T> {
    pub fn space(&self) -> &'a PointedMetricSpace<T> {
        self.space
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_values(&self) -> &[Vec<T>] {
        &self.vertices
    }

    pub fn functions(&self) -> Vec<LipFunction<'a, T>> {
        self.vertices
            .iter()
            .map(|v| LipFunction::new(self.space, v.clone()).expect("vertices vanish at the base"))
            .collect()
    }

    /// Tight constraints of vertex `v`; they determine it uniquely.
    pub fn tight_constraints(&self, v: usize) -> Vec<(usize, usize)> {
        self.tight[v].ones().map(|c| self.constraints[c]).collect()
    }

    /// `max_v <mu, f_v>`, which is the norm of `mu` since the ball is symmetric.
    pub fn max_pairing(&self, mu: &FreeVector<'_, T>) -> T {
        self.vertices
            .iter()
            .map(|v| {
                mu.coeffs()
                    .iter()
                    .map(|(&i, a)| a.clone() * v[i].clone())
                    .fold(T::zero(), |s, x| s + x)
            })
            .fold(T::zero(), T::max_of)
    }
}

pub fn lip_ball_vertices<T: Scalar>(space: &PointedMetricSpace<T>) -> Result<LipBall<'_, T>> {
    lip_ball_vertices_capped(space, vertex_cap())
}

pub fn lip_ball_vertices_capped<T: Scalar>(space: &PointedMetricSpace<T>, cap: usize) -> Result<LipBall<'_, T>> {
    let n = space.len();
    if n > cap {
        return Err(Error::SpaceTooLarge { size: n, cap });
    }
    let base = space.base();
    let others: Vec<usize> = space.non_base().collect();
    let mut constraints = Vec::with_capacity(n * (n - 1));
    for &i in &others {
        constraints.push((i, base));
        constraints.push((base, i));
    }
    for (p, &i) in others.iter().enumerate() {
        for &j in &others[p + 1..] {
            constraints.push((i, j));
            constraints.push((j, i));
        }
    }
    let nc = constraints.len();
    let slack = |v: &[T], c: usize| {
        let (a, b) = constraints[c];
        space.d(a, b).clone() - (v[a].clone() - v[b].clone())
    };

    // box vertices
    let k = others.len();
    let mut vertices: Vec<Vec<T>> = Vec::with_capacity(1 << k);
    let mut tight: Vec<Bits> = Vec::with_capacity(1 << k);
    for mask in 0..(1u64 << k) {
        let mut v = vec![T::zero(); n];
        let mut t = Bits::new(nc);
        for (p, &i) in others.iter().enumerate() {
            if mask >> p & 1 == 0 {
                v[i] = space.d(i, base).clone();
                t.set(2 * p);
            } else {
                v[i] = -space.d(i, base).clone();
                t.set(2 * p + 1);
            }
        }
        vertices.push(v);
        tight.push(t);
    }

    for c in 2 * k..nc {
        let signs: Vec<Ordering> = vertices.iter().map(|v| slack(v, c).sign()).collect();
        if signs.iter().all(|s| *s != Ordering::Less) {
            for (t, s) in tight.iter_mut().zip(&signs) {
                if *s == Ordering::Equal {
                    t.set(c);
                }
            }
            continue;
        }
        let mut next_v = Vec::new();
        let mut next_t = Vec::new();
        for (i, s) in signs.iter().enumerate() {
            if *s != Ordering::Less {
                let mut t = tight[i].clone();
                if *s == Ordering::Equal {
                    t.set(c);
                }
                next_v.push(vertices[i].clone());
                next_t.push(t);
            }
        }
        let out: Vec<usize> = (0..vertices.len()).filter(|&i| signs[i] == Ordering::Less).collect();
        let inn: Vec<usize> = (0..vertices.len()).filter(|&i| signs[i] == Ordering::Greater).collect();
        let words = nc.div_ceil(64);
        let inn_bits: Vec<u64> = inn.iter().flat_map(|&w| tight[w].0.iter().copied()).collect();
        let created: Vec<Vec<(Vec<T>, Bits)>> = out
            .par_iter()
            .map(|&u| {
                let mut found = Vec::new();
                let tu = &tight[u].0;
                for (&w, tw) in inn.iter().zip(inn_bits.chunks_exact(words)) {
                    let shared: u32 = tu.iter().zip(tw).map(|(a, b)| (a & b).count_ones()).sum();
                    if shared as usize + 1 < k {
                        continue;
                    }
                    let common = tight[u].and(&tight[w]);
                    let mut uf = UnionFind((0..n).collect());
                    let mut comps = n;
                    for e in common.ones() {
                        let (a, b) = constraints[e];
                        if uf.union(a, b) {
                            comps -= 1;
                        }
                    }
                    if comps != 2 {
                        continue;
                    }
                    let mut edges: Vec<usize> = common.ones().collect();
                    edges.push(c);
                    let v = walk_from_base(space, &constraints, &edges);
                    // v lies strictly between u and w, so an earlier
                    // constraint is tight at v exactly when tight at both
                    let mut t = common;
                    t.set(c);
                    found.push((v, t));
                }
                found
            })
            .collect();
        for (v, t) in created.into_iter().flatten() {
            next_v.push(v);
            next_t.push(t);
        }
        vertices = next_v;
        tight = next_t;
    }

    Ok(LipBall {
        space,
        constraints,
        vertices,
        tight,
    })
}

/// Values forced by tight constraints spanning a connected graph.
fn walk_from_base<T: Scalar>(space: &PointedMetricSpace<T>, constraints: &[(usize, usize)], edges: &[usize]) -> Vec<T> {
    let n = space.len();
    let mut adj: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for &e in edges {
        let (a, b) = constraints[e];
        adj[b].push((a, true));
        adj[a].push((b, false));
    }
    let mut val: Vec<Option<T>> = vec![None; n];
    val[space.base()] = Some(T::zero());
    let mut queue = VecDeque::from([space.base()]);
    while let Some(x) = queue.pop_front() {
        let fx = val[x].clone().expect("queued nodes are assigned");
        for &(y, up) in &adj[x] {
            if val[y].is_some() {
                continue;
            }
            // f(a) - f(b) = d(a, b)
            val[y] = Some(if up {
                fx.clone() + space.d(x, y).clone()
            } else {
                fx.clone() - space.d(x, y).clone()
            });
            queue.push_back(y);
        }
    }
    val.into_iter()
        .map(|v| v.expect("tight graph spans every point"))
        .collect()
}
