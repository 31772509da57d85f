//! Pairwise distances, local density and the leading tree.
//!
//! Every point except the densest one is attached to its leading node: the
//! nearest point that is strictly denser. Density ties are broken by index
//! (the lower index counts as denser), distance ties likewise, so the tree is
//! a deterministic function of the distance matrix and the densities.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[default]
    Euclidean,
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// Symmetric distance matrix stored as a packed strictly-lower triangle.
///
/// Row `i` holds the distances to points `0..i`, so appending a point only
/// appends one row.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    packed: Vec<f64>,
    eval_count: u64,
}

#[inline]
fn row_offset(i: usize) -> usize {
    i * i.saturating_sub(1) / 2
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Number of distance evaluations performed to build and extend the matrix.
    pub fn eval_count(&self) -> u64 {
        self.eval_count
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => 0.0,
            Greater => self.packed[row_offset(i) + j],
            Less => self.packed[row_offset(j) + i],
        }
    }

    /// Off-diagonal entries, each unordered pair once.
    pub fn pairs(&self) -> &[f64] {
        &self.packed
    }

    /// Appends a point given its distances to all existing points.
    pub(crate) fn push_point(&mut self, distances: &[f64]) {
        assert_eq!(distances.len(), self.n);
        self.packed.extend_from_slice(distances);
        self.n += 1;
    }

    pub(crate) fn count_evals(&mut self, evals: u64) {
        self.eval_count += evals;
    }
}

/// Computes all `n(n-1)/2` pairwise distances.
pub fn pairwise_distances(data: &Dataset, metric: Metric) -> DistanceMatrix {
    let n = data.len();
    let mut packed = vec![0.0; row_offset(n)];
    let mut rows: Vec<(usize, &mut [f64])> = Vec::with_capacity(n);
    let mut rest = packed.as_mut_slice();
    for i in 0..n {
        let (row, tail) = rest.split_at_mut(i);
        rows.push((i, row));
        rest = tail;
    }
    rows.into_par_iter().for_each(|(i, row)| {
        let xi = data.row(i);
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = metric.distance(xi, data.row(j));
        }
    });
    DistanceMatrix {
        n,
        eval_count: packed.len() as u64,
        packed,
    }
}

/// Cut-off distance at the given percentile of the sorted pairwise distances.
///
/// The 1-based rank is `ceil(percent / 100 * M)` clamped to `[1, M]`, where
/// `M` is the number of unordered pairs.
pub fn cutoff_distance(dm: &DistanceMatrix, percent: f64) -> Result<f64> {
    if dm.len() < 2 {
        return Err(Error::TooFewPoints);
    }
    if !(percent > 0.0 && percent <= 100.0) {
        return Err(Error::InvalidParameter(format!(
            "percent must lie in (0, 100], got {percent}"
        )));
    }
    Ok(percentile(&dm.packed, percent))
}

/// Value at 1-based rank `ceil(percent / 100 * len)` (clamped) of the sorted values.
pub(crate) fn percentile(values: &[f64], percent: f64) -> f64 {
    let m = values.len();
    let rank = ((percent / 100.0 * m as f64).ceil() as usize).clamp(1, m);
    let mut scratch = values.to_vec();
    let (_, nth, _) = scratch.select_nth_unstable_by(rank - 1, f64::total_cmp);
    *nth
}

/// Gaussian kernel `exp(-(d / d_c)^2)`.
#[inline]
pub fn kernel(d: f64, dc: f64) -> f64 {
    let r = d / dc;
    (-(r * r)).exp()
}

/// Population-weighted local density of every point.
///
/// Terms are accumulated in index order, which lets an appended point's
/// contribution be added to an existing density with bit-identical results.
pub fn local_density(dm: &DistanceMatrix, dc: f64, pop: &[u32]) -> Vec<f64> {
    assert_eq!(pop.len(), dm.len());
    (0..dm.len())
        .into_par_iter()
        .map(|i| {
            let mut rho = 0.0;
            for (j, &pj) in pop.iter().enumerate() {
                if j != i {
                    rho += f64::from(pj) * kernel(dm.get(i, j), dc);
                }
            }
            rho
        })
        .collect()
}

/// Strict total order on points: higher density first, lower index on ties.
#[inline]
pub fn denser(rho: &[f64], a: usize, b: usize) -> bool {
    rho[a] > rho[b] || (rho[a] == rho[b] && a < b)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadingTree {
    pub rho: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Leading node of every point; `None` only at the root.
    pub ln: Vec<Option<usize>>,
    pub root: usize,
}

/// Nearest strictly denser point of `i` and the distance to it.
pub(crate) fn leading_node(dm: &DistanceMatrix, rho: &[f64], i: usize) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..dm.len() {
        if j == i || !denser(rho, j, i) {
            continue;
        }
        let d = dm.get(i, j);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((j, d));
        }
    }
    best
}

pub(crate) fn farthest_distance(dm: &DistanceMatrix, i: usize) -> f64 {
    (0..dm.len()).map(|j| dm.get(i, j)).fold(0.0, f64::max)
}

pub fn build_leading_tree(dm: &DistanceMatrix, rho: &[f64]) -> LeadingTree {
    let n = dm.len();
    assert_eq!(rho.len(), n);
    let links: Vec<Option<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| leading_node(dm, rho, i))
        .collect();
    let root = (0..n)
        .reduce(|best, i| if denser(rho, i, best) { i } else { best })
        .expect("leading tree of an empty dataset");
    let ln: Vec<Option<usize>> = links.iter().map(|l| l.map(|(j, _)| j)).collect();
    let mut delta: Vec<f64> = links.iter().map(|l| l.map_or(0.0, |(_, d)| d)).collect();
    delta[root] = farthest_distance(dm, root);
    let gamma = rho.iter().zip(&delta).map(|(r, d)| r * d).collect();
    LeadingTree {
        rho: rho.to_vec(),
        delta,
        gamma,
        ln,
        root,
    }
}

impl LeadingTree {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Point indices sorted densest first.
    pub fn density_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.rho[b]
                .total_cmp(&self.rho[a])
                .then_with(|| a.cmp(&b))
        });
        order
    }

    /// Strict ancestor test: `j` is reached from `i` by following leading
    /// nodes one or more times.
    pub fn is_superior(&self, i: usize, j: usize) -> bool {
        let mut cur = i;
        while let Some(p) = self.ln[cur] {
            if p == j {
                return true;
            }
            cur = p;
        }
        false
    }

    /// Verifies that the arrays describe a single tree rooted at the densest
    /// point with density increasing along every edge.
    pub fn check(&self) -> Result<()> {
        let n = self.len();
        let bad = |m: String| Err(Error::InvalidModel(m));
        if self.delta.len() != n || self.gamma.len() != n || self.ln.len() != n || self.root >= n {
            return bad("leading tree arrays have inconsistent lengths".into());
        }
        for i in 0..n {
            match self.ln[i] {
                None if i != self.root => return bad(format!("point {i} has no leading node")),
                Some(_) if i == self.root => return bad("root has a leading node".into()),
                Some(p) if p >= n || !denser(&self.rho, p, i) => {
                    return bad(format!("leading node of {i} is not denser"))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Graphviz rendering of the whole tree, one edge per leading-node link.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph leading_tree {\n  rankdir=BT;\n");
        for i in 0..self.len() {
            let shape = if i == self.root { ", shape=doublecircle" } else { "" };
            let _ = writeln!(
                out,
                "  n{i} [label=\"{i}:ρ={:.4},δ={:.4}\"{shape}];",
                self.rho[i], self.delta[i]
            );
        }
        for (i, p) in self.ln.iter().enumerate() {
            if let Some(p) = p {
                let _ = writeln!(out, "  n{i} -> n{p};");
            }
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Mode;
    use approx::assert_relative_eq;

    fn points_1d(xs: &[f64]) -> Dataset {
        Dataset::new(
            xs.iter().map(|&x| vec![x]).collect(),
            vec![None; xs.len()],
            Mode::Regression,
        )
        .unwrap()
    }

    #[test]
    fn distance_of_two_points() {
        let dm = pairwise_distances(&points_1d(&[0.0, 3.0]), Metric::Euclidean);
        assert_eq!(dm.get(0, 1), 3.0);
        assert_eq!(dm.get(1, 0), 3.0);
        assert_eq!(dm.get(1, 1), 0.0);
    }

    #[test]
    fn eval_count_is_pair_count() {
        let dm = pairwise_distances(&points_1d(&[0.0, 1.0, 5.0, 9.0]), Metric::Euclidean);
        assert_eq!(dm.eval_count(), 6);
    }

    #[test]
    fn distances_are_deterministic() {
        let data = points_1d(&[0.3, -1.2, 4.4, 2.0, 7.5]);
        assert_eq!(
            pairwise_distances(&data, Metric::Euclidean),
            pairwise_distances(&data, Metric::Euclidean)
        );
    }

    #[test]
    fn cutoff_picks_percentile_rank() {
        // pairwise distances of 0,1,3 are {1,2,3}
        let dm = pairwise_distances(&points_1d(&[0.0, 1.0, 3.0]), Metric::Euclidean);
        assert_eq!(cutoff_distance(&dm, 40.0).unwrap(), 2.0); // ceil(1.2) = 2
        assert_eq!(cutoff_distance(&dm, 1e-9).unwrap(), 1.0);
        assert_eq!(cutoff_distance(&dm, 100.0).unwrap(), 3.0);
    }

    #[test]
    fn percentile_rank_on_five_distances() {
        let d = [4.0, 1.0, 5.0, 3.0, 2.0];
        assert_eq!(percentile(&d, 40.0), 2.0);
        assert_eq!(percentile(&d, 0.001), 1.0);
        assert_eq!(percentile(&d, 100.0), 5.0);
    }

    #[test]
    fn cutoff_needs_two_points() {
        let dm = pairwise_distances(&points_1d(&[1.0]), Metric::Euclidean);
        assert!(matches!(cutoff_distance(&dm, 5.0), Err(Error::TooFewPoints)));
    }

    #[test]
    fn density_of_single_point_is_zero() {
        let dm = pairwise_distances(&points_1d(&[1.0]), Metric::Euclidean);
        assert_eq!(local_density(&dm, 1.0, &[1]), vec![0.0]);
    }

    #[test]
    fn density_of_pair_at_cutoff() {
        let dm = pairwise_distances(&points_1d(&[0.0, 2.0]), Metric::Euclidean);
        let rho = local_density(&dm, 2.0, &[1, 1]);
        assert_relative_eq!(rho[0], (-1.0f64).exp());
        assert_relative_eq!(rho[1], (-1.0f64).exp());
    }

    #[test]
    fn density_counts_population() {
        let dm = pairwise_distances(&points_1d(&[0.0, 1.0]), Metric::Euclidean);
        let rho = local_density(&dm, 1.0, &[1, 3]);
        assert_relative_eq!(rho[0], 3.0 * (-1.0f64).exp());
        assert_relative_eq!(rho[1], (-1.0f64).exp());
    }

    #[test]
    fn pair_tie_makes_lower_index_root() {
        let dm = pairwise_distances(&points_1d(&[0.0, 2.0]), Metric::Euclidean);
        let rho = local_density(&dm, 2.0, &[1, 1]);
        let tree = build_leading_tree(&dm, &rho);
        assert_eq!(tree.root, 0);
        assert_eq!(tree.ln, vec![None, Some(0)]);
        assert_eq!(tree.delta[1], 2.0);
        assert_eq!(tree.delta[0], 2.0);
    }

    #[test]
    fn superiority_follows_chain() {
        let dm = pairwise_distances(&points_1d(&[0.0, 1.0, 2.0, 10.0]), Metric::Euclidean);
        let rho = local_density(&dm, 2.0, &[1; 4]);
        let tree = build_leading_tree(&dm, &rho);
        let r = tree.root;
        for i in 0..4 {
            assert!(!tree.is_superior(i, i));
            assert!(!tree.is_superior(r, i));
            if i != r {
                assert!(tree.is_superior(i, r));
            }
        }
    }

    #[test]
    fn dot_lists_every_edge() {
        let dm = pairwise_distances(&points_1d(&[0.0, 1.0, 2.0]), Metric::Euclidean);
        let rho = local_density(&dm, 1.0, &[1; 3]);
        let dot = build_leading_tree(&dm, &rho).to_dot();
        assert_eq!(dot.matches("->").count(), 2);
        assert!(dot.contains("ρ="));
    }
}
