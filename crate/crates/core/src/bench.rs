//! Scaling benchmark of the fit and propagation stages against the
//! iterative baseline.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::baseline::IterativePropagation;
use crate::error::Result;
use crate::metrics::accuracy;
use crate::model::{Model, Params};
use crate::propagation::propagate;
use crate::synth::{mask_labels, two_blobs};

pub const DEFAULT_SIZES: [usize; 4] = [500, 1000, 2000, 4000];

#[derive(Clone, Debug, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub distance_evaluations: u64,
    pub expected_evaluations: u64,
    pub fit_s: f64,
    pub granules: usize,
    pub propagation_s: f64,
    pub accuracy: f64,
    pub baseline_s: f64,
    pub baseline_iterations: usize,
    pub baseline_accuracy: f64,
}

/// Median over `runs` of the per-call propagation time. Each run repeats the
/// propagation until at least two milliseconds have elapsed.
pub fn median_propagation_seconds(model: &Model, runs: usize) -> Result<f64> {
    let once = || {
        propagate(
            model.dataset(),
            model.forest(),
            model.tree(),
            model.distances(),
            &model.params().propagation,
        )
    };
    let t = Instant::now();
    once()?;
    let single = t.elapsed().as_secs_f64().max(1e-7);
    let reps = ((2e-3 / single).ceil() as usize).max(1);
    let mut samples = Vec::with_capacity(runs);
    for _ in 0..runs.max(1) {
        let t = Instant::now();
        for _ in 0..reps {
            once()?;
        }
        samples.push(t.elapsed().as_secs_f64() / reps as f64);
    }
    samples.sort_by(f64::total_cmp);
    Ok(samples[samples.len() / 2])
}

/// Runs two-blob datasets (blobs four standard deviations apart, 10% labels)
/// of each size through the pipeline and the baseline.
pub fn run_bench(params: &Params, seed: u64, sizes: &[usize]) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ n as u64);
        let (data, truth) = mask_labels(&two_blobs(n, 4.0, &mut rng), 0.1, &mut rng);
        let t = Instant::now();
        let (model, report) = Model::fit(&data, *params)?;
        let fit_s = t.elapsed().as_secs_f64();
        let truth: Vec<_> = {
            let mut merged = vec![None; model.len()];
            for (raw, &row) in report.row_map.iter().enumerate() {
                merged[row] = truth[raw];
            }
            merged
        };
        let m = model.len() as u64;
        let propagation_s = median_propagation_seconds(&model, 5)?;

        let t = Instant::now();
        let base = IterativePropagation::default().run(model.dataset(), model.distances(), model.cutoff());
        let baseline_s = t.elapsed().as_secs_f64();

        rows.push(BenchRow {
            n,
            distance_evaluations: model.distances().eval_count(),
            expected_evaluations: m * (m - 1) / 2,
            fit_s,
            granules: model.forest().n_subtrees(),
            propagation_s,
            accuracy: accuracy(model.predictions(), &truth).unwrap_or(f64::NAN),
            baseline_s,
            baseline_iterations: base.iterations,
            baseline_accuracy: accuracy(&base.predictions, &truth).unwrap_or(f64::NAN),
        });
    }
    Ok(rows)
}
