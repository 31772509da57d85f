//! Objective curve over the granule count for a few penalty shapes.

use lapoleaf::leading_tree::{build_leading_tree, cutoff_distance, local_density, pairwise_distances};
use lapoleaf::lodog::{evaluate_objective, split_forest};
use lapoleaf::synth::two_blobs;
use lapoleaf::{HSpec, Metric};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> lapoleaf::Result<()> {
    let data = two_blobs(300, 5.0, &mut ChaCha8Rng::seed_from_u64(3));
    let dm = pairwise_distances(&data, Metric::Euclidean);
    let rho = local_density(&dm, cutoff_distance(&dm, 10.0)?, data.pop());
    let tree = build_leading_tree(&dm, &rho);

    let shapes = [
        HSpec::Linear { slope: 0.5 },
        HSpec::Logarithm { scale: 5.0 },
        HSpec::Power { scale: 0.2, exponent: 2.0 },
        HSpec::Exponential { scale: 0.5, base: 1.5 },
        HSpec::Product { scale: 0.2, base: 1.1 },
    ];
    for h in shapes {
        let curve = evaluate_objective(&tree, &h, 0.5, 40)?;
        let forest = split_forest(&tree, curve.ng_star)?;
        let head: Vec<String> = curve.q.iter().take(6).map(|q| format!("{q:.2}")).collect();
        println!(
            "{h:?}\n  Q(1..6) = [{}], best at {} subtrees of sizes {:?}",
            head.join(", "),
            curve.ng_star,
            forest.subtree_sizes()
        );
    }
    Ok(())
}
