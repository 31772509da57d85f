//! Regression on lagged windows of a noisy sine, compared with k-NN.

use lapoleaf::baseline::knn_regression;
use lapoleaf::dataset::fold_time_series;
use lapoleaf::metrics::sse;
use lapoleaf::synth::noisy_sine;
use lapoleaf::{Label, Metric, Model, Params};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lapoleaf::Result<()> {
    let series = noisy_sine(2_005, 50.0, 0.1, &mut ChaCha8Rng::seed_from_u64(5));
    let mut data = fold_time_series(&series, 5)?;
    let train = 1_800;
    let truth: Vec<_> = data.labels()[train..].to_vec();
    data.retain_labels(|i| i < train);

    let (model, report) = Model::fit(&data, Params::default())?;
    let ours: Vec<Label> = (train..data.len()).map(|i| model.predictions()[report.row_map[i]]).collect();

    let mut known = data.clone();
    known.retain_labels(|i| i < train);
    let knn: Vec<Label> = (train..data.len())
        .map(|i| Label::Value(knn_regression(&known, data.row(i), 10, Metric::Euclidean).unwrap()))
        .collect();

    println!("{} windows, {} held out", data.len(), truth.len());
    println!("SSE: forest {:.3}, 10-NN {:.3}", sse(&ours, &truth).unwrap(), sse(&knn, &truth).unwrap());
    Ok(())
}
