//! Adding a point to a fitted model without rebuilding it.
//!
//! The cut-off distance stays frozen at its fitted value, so a new point
//! costs `n` distance evaluations and shifts every density by its own kernel
//! term. Only points whose leading-node argmin may have changed are rescanned:
//!
//! * a point whose leading node is no longer denser than it,
//! * a point that gained a denser neighbour closer than its leading node.
//!
//! Both are found by re-sorting the density order with insertion sort, which
//! visits exactly the pairs whose relative order flipped. A point whose only
//! change is that the new point became its nearest denser neighbour is
//! relinked without a scan. The result is identical to a rebuild on the
//! enlarged data with the same cut-off.

use crate::dataset::Label;
use crate::error::{Error, Result};
use crate::leading_tree::{denser, farthest_distance, kernel, leading_node};
use crate::model::Model;

/// Outcome of [`Model::insert_point`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Insertion {
    /// Model row now holding the point.
    pub index: usize,
    /// The point coincided with an existing row whose population was bumped.
    pub merged: bool,
    /// Points whose leading node was recomputed by a full scan.
    pub rescanned: usize,
    /// Points that now lead into the new point without a scan.
    pub relinked: usize,
}

impl Model {
    pub fn insert_point(&mut self, x: &[f64]) -> Result<Insertion> {
        let dim = self.data.dim();
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { line: 0 });
        }
        let n = self.len();
        let old_root = self.tree.root;
        let mut relinked = 0;
        let metric = self.params.metric;
        let dists: Vec<f64> = (0..n).map(|j| metric.distance(x, self.data.row(j))).collect();
        self.dm.count_evals(n as u64);
        let dc = self.dc;

        let mut affected = vec![false; n + 1];
        let (index, merged) = match dists.iter().position(|&d| d == 0.0) {
            Some(i) => {
                self.data.bump_pop(i);
                for (j, &d) in dists.iter().enumerate() {
                    if j != i {
                        self.tree.rho[j] += kernel(d, dc);
                    }
                }
                affected.truncate(n);
                self.reorder(&mut affected);
                (i, true)
            }
            None => {
                let pop = self.data.pop();
                let mut rho_x = 0.0;
                for (j, &d) in dists.iter().enumerate() {
                    rho_x += f64::from(pop[j]) * kernel(d, dc);
                }
                for (j, &d) in dists.iter().enumerate() {
                    self.tree.rho[j] += kernel(d, dc);
                }
                self.data.push_row(x, 1, None);
                self.dm.push_point(&dists);
                self.tree.rho.push(rho_x);
                self.tree.ln.push(None);
                self.tree.delta.push(0.0);
                self.tree.gamma.push(0.0);

                self.reorder(&mut affected);
                let rho = &self.tree.rho;
                let pos = self.order.partition_point(|&j| denser(rho, j, n));
                self.order.insert(pos, n);
                // an unflagged point still holds its argmin, so the new
                // point either beats it or changes nothing
                for k in pos + 1..self.order.len() {
                    let j = self.order[k];
                    if !affected[j] && self.gains_candidate(j, n) {
                        self.tree.ln[j] = Some(n);
                        self.tree.delta[j] = dists[j];
                        relinked += 1;
                    }
                }
                affected[n] = true;
                (n, false)
            }
        };

        let root = self.order[0];
        let mut rescanned = 0;
        for (i, _) in affected.iter().enumerate().filter(|(_, a)| **a) {
            rescanned += 1;
            match leading_node(&self.dm, &self.tree.rho, i) {
                Some((p, d)) => {
                    self.tree.ln[i] = Some(p);
                    self.tree.delta[i] = d;
                }
                None => {
                    debug_assert_eq!(i, root);
                    self.tree.ln[i] = None;
                }
            }
        }
        self.tree.root = root;
        self.tree.delta[root] = if root != old_root {
            farthest_distance(&self.dm, root)
        } else if merged {
            self.tree.delta[root]
        } else {
            self.tree.delta[root].max(dists[root])
        };
        for ((g, r), d) in self.tree.gamma.iter_mut().zip(&self.tree.rho).zip(&self.tree.delta) {
            *g = r * d;
        }
        self.refresh_forest()?;
        Ok(Insertion {
            index,
            merged,
            rescanned,
            relinked,
        })
    }

    /// Inserts the point, propagates again from the original known labels and
    /// returns the point's label.
    pub fn predict_new(&mut self, x: &[f64]) -> Result<Label> {
        self.predict_new_at(x).map(|(_, label)| label)
    }

    /// Like [`Model::predict_new`], also reporting where the point landed.
    pub fn predict_new_at(&mut self, x: &[f64]) -> Result<(Insertion, Label)> {
        let ins = self.insert_point(x)?;
        self.repropagate()?;
        Ok((ins, self.predictions[ins.index]))
    }

    /// Whether `candidate`, newly denser than `i`, should replace `i`'s
    /// leading node.
    fn gains_candidate(&self, i: usize, candidate: usize) -> bool {
        match self.tree.ln[i] {
            None => true,
            Some(l) => {
                let d = self.dm.get(i, candidate);
                d < self.tree.delta[i] || (d == self.tree.delta[i] && candidate < l)
            }
        }
    }

    /// Restores the density order after densities changed, flagging points
    /// whose leading node may be stale.
    fn reorder(&mut self, affected: &mut [bool]) {
        for start in 1..self.order.len() {
            let mut k = start;
            while k > 0 && denser(&self.tree.rho, self.order[k], self.order[k - 1]) {
                let up = self.order[k];
                let down = self.order[k - 1];
                if self.gains_candidate(down, up) {
                    affected[down] = true;
                }
                if self.tree.ln[up] == Some(down) {
                    affected[up] = true;
                }
                self.order.swap(k, k - 1);
                k -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dataset, Label, Mode};
    use crate::model::Params;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn blobs(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            let c = i % 2;
            let cx = if c == 0 { 0.0 } else { 6.0 };
            rows.push(vec![cx + rng.gen::<f64>() * 2.0, rng.gen::<f64>() * 2.0]);
            labels.push(if i % 5 == 0 { Some(Label::Class(c)) } else { None });
        }
        Dataset::new(rows, labels, Mode::Classification { classes: 2 }).unwrap()
    }

    fn rebuilt(model: &Model) -> Model {
        Model::with_cutoff(model.dataset().clone(), *model.params(), model.cutoff()).unwrap()
    }

    fn assert_same_structure(a: &Model, b: &Model) {
        assert_eq!(a.tree().rho, b.tree().rho);
        assert_eq!(a.tree().ln, b.tree().ln);
        assert_eq!(a.tree().delta, b.tree().delta);
        assert_eq!(a.tree().gamma, b.tree().gamma);
        assert_eq!(a.tree().root, b.tree().root);
        assert_eq!(a.forest().roots, b.forest().roots);
        assert_eq!(a.forest().subtree_id, b.forest().subtree_id);
        assert_eq!(a.forest().layer, b.forest().layer);
    }

    #[test]
    fn inserts_match_rebuild() {
        let (mut model, _) = Model::fit(&blobs(60, 1), Params::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..15 {
            let x = [rng.gen::<f64>() * 8.0, rng.gen::<f64>() * 2.0];
            let before = model.distances().eval_count();
            let n = model.len() as u64;
            model.insert_point(&x).unwrap();
            assert_eq!(model.distances().eval_count() - before, n);
            assert_same_structure(&model, &rebuilt(&model));
        }
    }

    #[test]
    fn far_point_matches_rebuild() {
        let (mut model, _) = Model::fit(&blobs(40, 2), Params::default()).unwrap();
        let ins = model.insert_point(&[500.0, -300.0]).unwrap();
        assert!(!ins.merged);
        let fresh = rebuilt(&model);
        assert_same_structure(&model, &fresh);
        assert!(model.tree().delta[ins.index] > 100.0);
    }

    #[test]
    fn duplicate_bumps_population() {
        let data = blobs(40, 3);
        let (mut model, _) = Model::fit(&data, Params::default()).unwrap();
        let x = data.row(7).to_vec();
        let ins = model.insert_point(&x).unwrap();
        assert!(ins.merged);
        assert_eq!(ins.index, 7);
        assert_eq!(model.len(), 40);
        assert_eq!(model.dataset().pop()[7], 2);
        let fresh = rebuilt(&model);
        for (a, b) in model.tree().rho.iter().zip(&fresh.tree().rho) {
            assert!((a - b).abs() <= 1e-12 * 40.0);
        }
        assert_eq!(model.tree().ln, fresh.tree().ln);
        assert_eq!(model.forest().roots, fresh.forest().roots);
    }

    #[test]
    fn predict_duplicate_of_labeled_point() {
        let data = blobs(40, 4);
        let (mut model, _) = Model::fit(&data, Params::default()).unwrap();
        let label = model.predict_new(data.row(5)).unwrap();
        assert_eq!(label, data.label(5).unwrap());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let (mut model, _) = Model::fit(&blobs(20, 5), Params::default()).unwrap();
        assert!(matches!(
            model.insert_point(&[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }
}
