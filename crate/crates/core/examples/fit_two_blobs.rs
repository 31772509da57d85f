//! Fit two Gaussian blobs with 10% of the labels and score the rest.

use lapoleaf::metrics::accuracy;
use lapoleaf::synth::{mask_labels, two_blobs};
use lapoleaf::{HSpec, Model, Params};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lapoleaf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let full = two_blobs(600, 4.0, &mut rng);
    let (masked, truth) = mask_labels(&full, 0.1, &mut rng);

    let params = Params {
        percent: 10.0,
        h: HSpec::Linear { slope: 1.0 },
        ..Params::default()
    };
    let (model, report) = Model::fit(&masked, params)?;

    let (mut preds, mut held) = (Vec::new(), Vec::new());
    for (raw, &point) in report.row_map.iter().enumerate() {
        if masked.label(raw).is_none() {
            preds.push(model.predictions()[point]);
            held.push(truth[raw]);
        }
    }
    println!("{} points, {} labeled", masked.len(), masked.labeled_count());
    println!("cut-off distance {:.4}, {} subtrees", model.cutoff(), model.forest().n_subtrees());
    println!("accuracy on unlabeled points: {:.4}", accuracy(&preds, &held).unwrap());
    let t = report.timings;
    println!(
        "timings: distances {:.1} ms, tree and split {:.1} ms, propagation {:.3} ms",
        t.distance_s * 1e3,
        t.oleaf_s * 1e3,
        t.propagation_s * 1e3
    );
    Ok(())
}
