//! Label new points one at a time and check against a rebuild.

use lapoleaf::synth::{mask_labels, two_moons};
use lapoleaf::{HSpec, Model, Params};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> lapoleaf::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (data, _) = mask_labels(&two_moons(400, 0.08, &mut rng), 0.1, &mut rng);
    let params = Params {
        percent: 10.0,
        h: HSpec::Linear { slope: 0.05 },
        ..Params::default()
    };
    let (mut model, _) = Model::fit(&data, params)?;

    for _ in 0..5 {
        let x = [rng.gen_range(-1.0..2.0), rng.gen_range(-0.5..1.0)];
        let before = model.distances().eval_count();
        let (ins, label) = model.predict_new_at(&x)?;
        println!(
            "({:+.2}, {:+.2}) -> {label:?}: row {}, {} distances, {} rescanned, {} relinked",
            x[0],
            x[1],
            ins.index,
            model.distances().eval_count() - before,
            ins.rescanned,
            ins.relinked
        );
    }

    let rebuilt = Model::with_cutoff(model.dataset().clone(), params, model.cutoff())?;
    println!("same tree as a rebuild: {}", rebuilt.tree() == model.tree());
    println!("same predictions as a rebuild: {}", rebuilt.predictions() == model.predictions());
    Ok(())
}
