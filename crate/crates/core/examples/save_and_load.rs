//! Persist a fitted model and keep inserting into the reloaded copy.

use lapoleaf::synth::{mask_labels, two_blobs};
use lapoleaf::{Model, Params};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (data, _) = mask_labels(&two_blobs(200, 5.0, &mut rng), 0.1, &mut rng);
    let (mut model, _) = Model::fit(&data, Params::default())?;

    let path = std::env::temp_dir().join("lapoleaf-model.json");
    model.save(&path)?;
    let bytes = std::fs::metadata(&path)?.len();
    println!("saved {} points to {} ({bytes} bytes)", model.len(), path.display());

    let mut loaded = Model::load(&path)?;
    for x in [[0.1, 0.2], [5.2, -0.3]] {
        let a = model.predict_new(&x)?;
        let b = loaded.predict_new(&x)?;
        println!("{x:?}: original {a:?}, reloaded {b:?}");
    }
    Ok(())
}
