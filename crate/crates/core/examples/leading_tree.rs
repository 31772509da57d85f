//! Build a leading tree step by step on a handful of 1-D points.

use lapoleaf::leading_tree::{build_leading_tree, cutoff_distance, local_density, pairwise_distances};
use lapoleaf::{Dataset, Metric, Mode};

fn main() -> lapoleaf::Result<()> {
    let xs = [0.0, 0.3, 0.5, 0.6, 1.4, 6.0, 6.2, 6.3, 7.1];
    let rows = xs.iter().map(|&x| vec![x]).collect();
    let data = Dataset::new(rows, vec![None; xs.len()], Mode::Regression)?;

    let dm = pairwise_distances(&data, Metric::Euclidean);
    let dc = cutoff_distance(&dm, 20.0)?;
    let rho = local_density(&dm, dc, data.pop());
    let tree = build_leading_tree(&dm, &rho);

    println!("cut-off distance {dc:.3}, {} distance evaluations", dm.eval_count());
    println!("{:>5} {:>6} {:>8} {:>6} {:>8} {:>8}", "point", "x", "rho", "leads", "delta", "gamma");
    for i in 0..xs.len() {
        let leads = tree.ln[i].map_or("root".to_string(), |p| p.to_string());
        println!(
            "{i:>5} {:>6.2} {:>8.4} {leads:>6} {:>8.3} {:>8.4}",
            xs[i], tree.rho[i], tree.delta[i], tree.gamma[i]
        );
    }
    Ok(())
}
