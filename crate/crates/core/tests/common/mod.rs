//! Brute-force oracles and random fixtures shared by the integration tests
//! and the acceptance suite. Nothing here calls into the library's
//! algorithms; the oracles are written directly from the definitions.

#![allow(dead_code)]

use lapoleaf::{Dataset, HSpec, Label, LeadingTree, Mode};
use rand::Rng;

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Leading-tree arrays computed literally from the definitions.
#[derive(Debug, PartialEq)]
pub struct OracleTree {
    pub dc: f64,
    pub rho: Vec<f64>,
    pub ln: Vec<Option<usize>>,
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub root: usize,
}

pub fn oracle_cutoff(rows: &[Vec<f64>], percent: f64) -> f64 {
    let mut all = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            all.push(euclidean(&rows[i], &rows[j]));
        }
    }
    all.sort_by(f64::total_cmp);
    let rank = (percent / 100.0 * all.len() as f64).ceil() as usize;
    all[rank.clamp(1, all.len()) - 1]
}

pub fn oracle_tree(rows: &[Vec<f64>], pop: &[u32], dc: f64) -> OracleTree {
    let n = rows.len();
    let d = |i: usize, j: usize| euclidean(&rows[i], &rows[j]);
    let rho: Vec<f64> = (0..n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                if j != i {
                    let r = d(i, j) / dc;
                    s += f64::from(pop[j]) * (-(r * r)).exp();
                }
            }
            s
        })
        .collect();
    let higher = |j: usize, i: usize| rho[j] > rho[i] || (rho[j] == rho[i] && j < i);
    let mut ln = vec![None; n];
    let mut delta = vec![0.0; n];
    let mut root = None;
    for i in 0..n {
        let cands: Vec<usize> = (0..n).filter(|&j| j != i && higher(j, i)).collect();
        if cands.is_empty() {
            assert!(root.is_none(), "two points without a denser neighbour");
            root = Some(i);
            delta[i] = (0..n).map(|j| d(i, j)).fold(0.0, f64::max);
            continue;
        }
        let mut best = cands[0];
        for &j in &cands[1..] {
            if d(i, j) < d(i, best) {
                best = j;
            }
        }
        ln[i] = Some(best);
        delta[i] = d(i, best);
    }
    let gamma = rho.iter().zip(&delta).map(|(r, d)| r * d).collect();
    OracleTree {
        dc,
        rho,
        ln,
        delta,
        gamma,
        root: root.expect("some point is densest"),
    }
}

/// Top-`ng` points by γ (ties to the lower index) with the global root first.
pub fn oracle_roots(tree: &LeadingTree, ng: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..tree.len()).filter(|&i| i != tree.root).collect();
    idx.sort_by(|&a, &b| tree.gamma[b].partial_cmp(&tree.gamma[a]).unwrap().then(a.cmp(&b)));
    let mut roots = vec![tree.root];
    roots.extend_from_slice(&idx[..ng - 1]);
    roots
}

/// Granule of every point: the first root met when following leading nodes.
pub fn oracle_owner(tree: &LeadingTree, roots: &[usize]) -> Vec<usize> {
    (0..tree.len())
        .map(|i| {
            let mut cur = i;
            loop {
                if let Some(s) = roots.iter().position(|&r| r == cur) {
                    return s;
                }
                cur = tree.ln[cur].expect("the global root is a granule root");
            }
        })
        .collect()
}

/// The objective for one granule count: granules rebuilt from scratch, each
/// charged the δ of its non-root members.
pub fn oracle_objective(tree: &LeadingTree, h: &HSpec, alpha: f64, ng: usize) -> f64 {
    let roots = oracle_roots(tree, ng);
    let owner = oracle_owner(tree, &roots);
    let mut cost = vec![0.0; ng];
    for i in 0..tree.len() {
        if !roots.contains(&i) {
            cost[owner[i]] += tree.delta[i];
        }
    }
    alpha * h.eval(ng as f64) + (1.0 - alpha) * cost.iter().sum::<f64>()
}

/// Whole curve and its first minimizer.
pub fn oracle_curve(tree: &LeadingTree, h: &HSpec, alpha: f64, n_max: usize) -> (Vec<f64>, usize) {
    let q: Vec<f64> = (1..=n_max).map(|ng| oracle_objective(tree, h, alpha, ng)).collect();
    let mut best = 0;
    for k in 1..q.len() {
        if q[k] < q[best] {
            best = k;
        }
    }
    (q, best + 1)
}

pub fn relative_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Random rows; on a small integer grid when `grid` is set so that distance
/// and density ties are common.
pub fn random_rows<R: Rng>(rng: &mut R, n: usize, dim: usize, grid: bool) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    if grid {
                        f64::from(rng.gen_range(0..4))
                    } else {
                        rng.gen_range(-5.0..5.0)
                    }
                })
                .collect()
        })
        .collect()
}

/// Random classification dataset labeling each point with probability `p`,
/// with at least one labeled point.
pub fn random_labeled<R: Rng>(rng: &mut R, rows: Vec<Vec<f64>>, classes: usize, p: f64) -> Dataset {
    let n = rows.len();
    let mut labels: Vec<Option<Label>> = (0..n)
        .map(|_| rng.gen_bool(p).then(|| Label::Class(rng.gen_range(0..classes))))
        .collect();
    if labels.iter().all(Option::is_none) {
        let i = rng.gen_range(0..n);
        labels[i] = Some(Label::Class(rng.gen_range(0..classes)));
    }
    Dataset::new(rows, labels, Mode::Classification { classes }).unwrap()
}

/// Points on distinct rays around a parent at the origin, child `k` at
/// distance `dists[k]`. Returns the rows with the parent first.
pub fn star_rows(dists: &[f64]) -> Vec<Vec<f64>> {
    let m = dists.len();
    let mut rows = vec![vec![0.0, 0.0]];
    for (k, &d) in dists.iter().enumerate() {
        let a = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
        rows.push(vec![d * a.cos(), d * a.sin()]);
    }
    rows
}

/// Leading tree in which every point leads to point 0.
pub fn star_tree(rows: &[Vec<f64>]) -> LeadingTree {
    let n = rows.len();
    let mut rho = vec![0.5; n];
    rho[0] = 1.0;
    let mut ln = vec![Some(0); n];
    ln[0] = None;
    let mut delta: Vec<f64> = rows.iter().map(|r| euclidean(r, &rows[0])).collect();
    delta[0] = delta[1..].iter().copied().fold(0.0, f64::max);
    let gamma = rho.iter().zip(&delta).map(|(r, d)| r * d).collect();
    LeadingTree {
        rho,
        delta,
        gamma,
        ln,
        root: 0,
    }
}

pub fn one_hot(class: usize, width: usize) -> Vec<f64> {
    let mut v = vec![0.0; width];
    v[class] = 1.0;
    v
}
