//! Uncapacitated min-cost transshipment on a complete graph by successive
//! shortest paths. Only additions, subtractions and comparisons of costs are
//! needed, so surd-valued distances stay exact.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Optimal flow: total cost and positive arc flows `(from, to, amount)`
/// sorted by arc.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow<T> {
    pub cost: T,
    pub arcs: Vec<(usize, usize, T)>,
}

/// Minimises `sum cost(i,j) * x_ij` subject to `out(i) - in(i) = supply[i]`.
/// `cost` must be symmetric, nonnegative and zero only on the diagonal.
pub fn min_cost_flow<T: Scalar>(supply: &[T], cost: impl Fn(usize, usize) -> T) -> Result<Flow<T>> {
    let k = supply.len();
    let total = supply.iter().cloned().fold(T::zero(), |a, b| a + b);
    if !total.is_negligible() {
        return Err(Error::Invalid(format!("supplies sum to {total}, not zero")));
    }
    let c: Vec<Vec<T>> = (0..k).map(|i| (0..k).map(|j| cost(i, j)).collect()).collect();
    let mut excess: Vec<T> = supply.to_vec();
    let mut flow: Vec<Vec<T>> = vec![vec![T::zero(); k]; k];

    loop {
        let sources: Vec<usize> = (0..k).filter(|&i| excess[i].sign() == Ordering::Greater).collect();
        if sources.is_empty() {
            break;
        }
        // Bellman-Ford from all sources in the residual graph.
        let mut dist: Vec<Option<T>> = vec![None; k];
        let mut pred: Vec<Option<(usize, bool)>> = vec![None; k];
        for &s in &sources {
            dist[s] = Some(T::zero());
        }
        for _ in 0..k {
            let mut changed = false;
            for u in 0..k {
                let Some(du) = dist[u].clone() else { continue };
                for v in 0..k {
                    if u == v {
                        continue;
                    }
                    // forward arc u->v, or cancelling flow v->u at negative cost
                    let mut cands = vec![(du.clone() + c[u][v].clone(), false)];
                    if flow[v][u].sign() == Ordering::Greater {
                        cands.push((du.clone() - c[v][u].clone(), true));
                    }
                    for (nd, back) in cands {
                        let better = match &dist[v] {
                            None => true,
                            Some(dv) => nd.cmp_tol(dv) == Ordering::Less,
                        };
                        if better {
                            dist[v] = Some(nd);
                            pred[v] = Some((u, back));
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let sink = (0..k)
            .filter(|&i| excess[i].sign() == Ordering::Less)
            .min_by(|&a, &b| {
                let (da, db) = (dist[a].as_ref().unwrap(), dist[b].as_ref().unwrap());
                da.partial_cmp(db).unwrap_or(Ordering::Equal).then(a.cmp(&b))
            })
            .ok_or(Error::Invalid("unbalanced supplies".into()))?;
        // walk back to a source, collecting the bottleneck
        let mut path = Vec::new();
        let mut v = sink;
        while let Some((u, back)) = pred[v] {
            path.push((u, v, back));
            v = u;
            if path.len() > k {
                return Err(Error::Invalid("negative cycle in residual graph".into()));
            }
        }
        let source = v;
        let mut amount = T::min_of(excess[source].clone(), -excess[sink].clone());
        for &(u, v, back) in &path {
            if back {
                amount = T::min_of(amount, flow[v][u].clone());
            }
        }
        for &(u, v, back) in &path {
            if back {
                flow[v][u] = flow[v][u].clone() - amount.clone();
            } else {
                flow[u][v] = flow[u][v].clone() + amount.clone();
            }
        }
        excess[source] = excess[source].clone() - amount.clone();
        excess[sink] = excess[sink].clone() + amount;
        if T::EXACT {
            continue;
        }
        for e in excess.iter_mut() {
            if e.is_negligible() {
                *e = T::zero();
            }
        }
    }

    let mut arcs = Vec::new();
    let mut total_cost = T::zero();
    for i in 0..k {
        for j in 0..k {
            // net flow on each unordered pair
            let net = flow[i][j].clone() - flow[j][i].clone();
            if net.sign() == Ordering::Greater {
                total_cost = total_cost + net.clone() * c[i][j].clone();
                arcs.push((i, j, net));
            }
        }
    }
    Ok(Flow {
        cost: total_cost,
        arcs,
    })
}
