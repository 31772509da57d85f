//! Write the split as Graphviz and JSON into a temporary directory.

use lapoleaf::lodog::forest_to_dot;
use lapoleaf::model::ForestDocument;
use lapoleaf::synth::{mask_labels, two_blobs};
use lapoleaf::{HSpec, Model, Params};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (data, _) = mask_labels(&two_blobs(40, 6.0, &mut rng), 0.2, &mut rng);
    let params = Params {
        percent: 20.0,
        h: HSpec::Linear { slope: 1.0 },
        ..Params::default()
    };
    let (model, _) = Model::fit(&data, params)?;

    let dir = std::env::temp_dir().join("lapoleaf-export");
    std::fs::create_dir_all(&dir)?;
    let dot = forest_to_dot(model.tree(), model.forest());
    let json = serde_json::to_string_pretty(&ForestDocument::new(model.tree(), model.forest()))?;
    for (name, text) in [("forest.dot", dot), ("forest.json", json)] {
        let path = dir.join(name);
        std::fs::write(&path, text)?;
        println!("wrote {}", path.display());
    }
    println!("render with: dot -Tsvg {}", dir.join("forest.dot").display());
    Ok(())
}
