//! Independent reference computations. Nothing here calls into the library's
//! numerical routines; graphs are read only through their edge lists.

#![allow(dead_code, clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

use rand::Rng;
use semilinear_core::{GraphBuilder, WeightedGraph};

/// (P − I) u with P assembled as a dense matrix from the edge list.
pub fn dense_laplacian(g: &WeightedGraph, u: &[f64]) -> Vec<f64> {
    let n = g.num_vertices();
    let mut w = vec![vec![0.0; n]; n];
    for &(x, y, wxy) in g.edges() {
        w[x][y] += wxy;
        w[y][x] += wxy;
    }
    (0..n)
        .map(|x| {
            let m: f64 = w[x].iter().sum();
            let pu: f64 = (0..n).map(|y| w[x][y] / m * u[y]).sum();
            pu - u[x]
        })
        .collect()
}

/// All-pairs hop distances.
pub fn floyd_warshall(g: &WeightedGraph) -> Vec<Vec<Option<usize>>> {
    let n = g.num_vertices();
    let inf = usize::MAX / 4;
    let mut d = vec![vec![inf; n]; n];
    for (x, row) in d.iter_mut().enumerate() {
        row[x] = 0;
    }
    for &(x, y, _) in g.edges() {
        d[x][y] = 1;
        d[y][x] = 1;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d.into_iter()
        .map(|r| r.into_iter().map(|v| (v < inf).then_some(v)).collect())
        .collect()
}

/// Probability that simple random walk on {−r, …, r} started at 0 returns
/// to 0 within `steps` steps, with ±r absorbing (censored).
pub fn line_return_probability(r: usize, steps: usize) -> f64 {
    // p[k] = mass at position k − r not yet returned or censored
    let size = 2 * r + 1;
    let mut p = vec![0.0; size];
    let mut next = vec![0.0; size];
    p[r] = 1.0;
    let mut returned = 0.0;
    for t in 0..steps {
        next.iter_mut().for_each(|v| *v = 0.0);
        let reach = (t + 1).min(r);
        for k in r - reach..=r + reach {
            let m = p[k];
            if m == 0.0 {
                continue;
            }
            for nb in [k - 1, k + 1] {
                if nb == r {
                    returned += m / 2.0;
                } else if nb != 0 && nb != size - 1 {
                    next[nb] += m / 2.0;
                }
            }
        }
        std::mem::swap(&mut p, &mut next);
    }
    returned
}

/// Return probability within `steps` for the unit-weight walk on T_N from
/// the root, via the distance chain; reaching depth `depth` censors.
pub fn tree_return_probability(n_branch: usize, depth: usize, steps: usize) -> f64 {
    let down = 1.0 / n_branch as f64;
    let up = 1.0 - down;
    let mut p = vec![0.0; depth + 1];
    p[1] = 1.0; // after the forced first step
    let mut returned = 0.0;
    for _ in 1..steps {
        let mut next = vec![0.0; depth + 1];
        returned += p[1] * down;
        next[2.min(depth)] += p[1] * up;
        for k in 2..depth {
            next[k - 1] += p[k] * down;
            next[k + 1] += p[k] * up;
        }
        next[depth] = 0.0;
        p = next;
    }
    returned
}

/// Root in [0, 1] of (a + b)/2 − u + u² = 0.
pub fn quadratic_root(a: f64, b: f64) -> f64 {
    (1.0 - (1.0 - 2.0 * (a + b)).sqrt()) / 2.0
}

/// v_{i+1} = v_i (1 − v_i^{σ−1}) while the result stays positive.
pub fn equality_descent(u0: f64, sigma: f64, max_len: usize) -> Vec<f64> {
    let mut v = vec![u0];
    while v.len() < max_len {
        let last = *v.last().unwrap();
        let next = last * (1.0 - last.powf(sigma - 1.0));
        if !(next > 0.0) {
            break;
        }
        v.push(next);
    }
    v
}

/// Random connected weighted graph: a random spanning tree plus extra edges.
pub fn random_connected_graph(rng: &mut impl Rng, max_vertices: usize) -> WeightedGraph {
    let n = rng.random_range(2..=max_vertices);
    let mut b = GraphBuilder::new(n);
    let mut present = std::collections::HashSet::new();
    for v in 1..n {
        let parent = rng.random_range(0..v);
        b.add_edge(parent, v, rng.random_range(0.1..10.0));
        present.insert((parent, v));
    }
    let extra = rng.random_range(0..=n);
    for _ in 0..extra {
        let x = rng.random_range(0..n);
        let y = rng.random_range(0..n);
        let key = (x.min(y), x.max(y));
        if x != y && present.insert(key) {
            b.add_edge(key.0, key.1, rng.random_range(0.1..10.0));
        }
    }
    b.finalize().expect("valid random graph")
}
