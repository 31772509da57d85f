//! Reference methods for comparison: iterative label propagation on a k-NN
//! graph, and k-NN regression.

use serde::Serialize;

use crate::dataset::{Dataset, Label, Mode};
use crate::leading_tree::{kernel, DistanceMatrix, Metric};

/// Harmonic label propagation on a symmetrized k-NN graph with Gaussian
/// weights, iterated until no soft label moves by more than `tolerance`.
#[derive(Clone, Copy, Debug)]
pub struct IterativePropagation {
    pub k: usize,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for IterativePropagation {
    fn default() -> Self {
        IterativePropagation {
            k: 10,
            tolerance: 1e-6,
            max_iterations: 100_000,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BaselineRun {
    pub predictions: Vec<Label>,
    pub iterations: usize,
    pub converged: bool,
}

/// Indices of the `k` nearest other points of `i`, ties to the lower index.
fn nearest_k(dm: &DistanceMatrix, i: usize, k: usize) -> Vec<usize> {
    let mut others: Vec<usize> = (0..dm.len()).filter(|&j| j != i).collect();
    let k = k.min(others.len());
    if k == 0 {
        return others;
    }
    let by_dist = |a: &usize, b: &usize| dm.get(i, *a).total_cmp(&dm.get(i, *b)).then(a.cmp(b));
    others.select_nth_unstable_by(k - 1, by_dist);
    others.truncate(k);
    others.sort_by(by_dist);
    others
}

impl IterativePropagation {
    pub fn run(&self, data: &Dataset, dm: &DistanceMatrix, dc: f64) -> BaselineRun {
        let n = data.len();
        let width = data.mode().width();
        let mut adjacency: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for i in 0..n {
            for j in nearest_k(dm, i, self.k) {
                let w = kernel(dm.get(i, j), dc);
                adjacency[i].push((j, w));
                adjacency[j].push((i, w));
            }
        }
        for nbrs in &mut adjacency {
            nbrs.sort_by(|a, b| a.0.cmp(&b.0).then(b.1.total_cmp(&a.1)));
            nbrs.dedup_by_key(|e| e.0);
        }

        let mut f = vec![0.0; n * width];
        let clamped: Vec<bool> = data.labels().iter().map(Option::is_some).collect();
        for (i, l) in data.labels().iter().enumerate() {
            match l {
                Some(Label::Class(c)) => f[i * width + c] = 1.0,
                Some(Label::Value(v)) => f[i * width] = *v,
                None => {}
            }
        }
        let mut next = f.clone();
        let mut iterations = 0;
        let mut converged = false;
        while iterations < self.max_iterations {
            iterations += 1;
            let mut change: f64 = 0.0;
            for i in (0..n).filter(|&i| !clamped[i]) {
                let wsum: f64 = adjacency[i].iter().map(|e| e.1).sum();
                if wsum == 0.0 {
                    continue;
                }
                for k in 0..width {
                    let v = adjacency[i].iter().map(|&(j, w)| w * f[j * width + k]).sum::<f64>() / wsum;
                    change = change.max((v - f[i * width + k]).abs());
                    next[i * width + k] = v;
                }
            }
            std::mem::swap(&mut f, &mut next);
            if change < self.tolerance {
                converged = true;
                break;
            }
        }

        let predictions = (0..n)
            .map(|i| {
                let row = &f[i * width..(i + 1) * width];
                match data.mode() {
                    Mode::Regression => Label::Value(row[0]),
                    Mode::Classification { .. } => {
                        let mut best = 0;
                        for (k, v) in row.iter().enumerate() {
                            if *v > row[best] {
                                best = k;
                            }
                        }
                        Label::Class(best)
                    }
                }
            })
            .collect();
        BaselineRun {
            predictions,
            iterations,
            converged,
        }
    }
}

/// Mean target of the `k` nearest labeled training rows.
pub fn knn_regression(train: &Dataset, query: &[f64], k: usize, metric: Metric) -> Option<f64> {
    let mut scored: Vec<(f64, f64)> = train
        .rows()
        .zip(train.labels())
        .filter_map(|(row, l)| l.and_then(|l| l.value()).map(|y| (metric.distance(query, row), y)))
        .collect();
    if scored.is_empty() {
        return None;
    }
    let k = k.clamp(1, scored.len());
    scored.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
    Some(scored[..k].iter().map(|s| s.1).sum::<f64>() / k as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leading_tree::pairwise_distances;

    #[test]
    fn baseline_iterates_and_labels_clusters() {
        let xs = [0.0, 0.1, 0.2, 0.3, 5.0, 5.1, 5.2, 5.3];
        let mut labels = vec![None; 8];
        labels[0] = Some(Label::Class(0));
        labels[7] = Some(Label::Class(1));
        let data = Dataset::new(
            xs.iter().map(|&x| vec![x]).collect(),
            labels,
            Mode::Classification { classes: 2 },
        )
        .unwrap();
        let dm = pairwise_distances(&data, Metric::Euclidean);
        let run = IterativePropagation { k: 2, ..Default::default() }.run(&data, &dm, 0.5);
        assert!(run.converged);
        assert!(run.iterations > 1);
        let classes: Vec<usize> = run.predictions.iter().map(|p| p.class().unwrap()).collect();
        assert_eq!(classes, vec![0, 0, 0, 0, 1, 1, 1, 1]);
    }

    #[test]
    fn knn_regression_averages_neighbours() {
        let data = Dataset::new(
            vec![vec![0.0], vec![1.0], vec![10.0]],
            vec![Some(Label::Value(1.0)), Some(Label::Value(3.0)), Some(Label::Value(100.0))],
            Mode::Regression,
        )
        .unwrap();
        assert_eq!(knn_regression(&data, &[0.4], 2, Metric::Euclidean), Some(2.0));
    }
}
