//! One-shot forest propagation against iterative k-NN graph propagation.

use std::time::Instant;

use lapoleaf::baseline::IterativePropagation;
use lapoleaf::bench::median_propagation_seconds;
use lapoleaf::metrics::accuracy;
use lapoleaf::synth::{mask_labels, two_moons};
use lapoleaf::{HSpec, Label, Model, Params};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn held_out(preds: &[Label], masked: &lapoleaf::Dataset, truth: &[Option<Label>], map: &[usize]) -> f64 {
    let (mut p, mut t) = (Vec::new(), Vec::new());
    for (raw, &point) in map.iter().enumerate() {
        if masked.label(raw).is_none() {
            p.push(preds[point]);
            t.push(truth[raw]);
        }
    }
    accuracy(&p, &t).unwrap()
}

fn main() -> lapoleaf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (masked, truth) = mask_labels(&two_moons(1_000, 0.1, &mut rng), 0.05, &mut rng);
    let params = Params {
        percent: 5.0,
        h: HSpec::Linear { slope: 0.05 },
        ..Params::default()
    };
    let (model, report) = Model::fit(&masked, params)?;
    let ours = held_out(model.predictions(), &masked, &truth, &report.row_map);
    let ours_s = median_propagation_seconds(&model, 5)?;

    let t = Instant::now();
    let run = IterativePropagation::default().run(model.dataset(), model.distances(), model.cutoff());
    let theirs_s = t.elapsed().as_secs_f64();
    let theirs = held_out(&run.predictions, &masked, &truth, &report.row_map);

    println!("forest:    accuracy {ours:.4}, propagation {:.3} ms", ours_s * 1e3);
    println!(
        "iterative: accuracy {theirs:.4}, {:.1} ms over {} iterations (converged: {})",
        theirs_s * 1e3,
        run.iterations,
        run.converged
    );
    Ok(())
}
