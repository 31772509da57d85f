//! Watch the soft labels after each of the three passes.

use lapoleaf::leading_tree::{build_leading_tree, cutoff_distance, local_density, pairwise_distances};
use lapoleaf::lodog::split_forest;
use lapoleaf::propagation::{c2p, finalize, init_labels, p2c, r2r};
use lapoleaf::{Dataset, Label, LabelState, Metric, Mode, PropagationOptions};

fn show(title: &str, s: &LabelState) {
    println!("{title}");
    for i in 0..s.len() {
        let row: Vec<String> = s.row(i).iter().map(|v| format!("{v:+.3}")).collect();
        println!("  {i:>2} [{}]{}", row.join(" "), if s.is_labeled(i) { " *" } else { "" });
    }
}

fn main() -> lapoleaf::Result<()> {
    let xs = [0.0, 0.2, 0.3, 0.7, 1.1, 5.0, 5.1, 5.4, 6.0, 9.0, 9.2];
    let mut labels = vec![None; xs.len()];
    labels[3] = Some(Label::Class(0));
    labels[7] = Some(Label::Class(1));
    let rows = xs.iter().map(|&x| vec![x]).collect();
    let data = Dataset::new(rows, labels, Mode::Classification { classes: 2 })?;

    let dm = pairwise_distances(&data, Metric::Euclidean);
    let tree = build_leading_tree(&dm, &local_density(&dm, cutoff_distance(&dm, 15.0)?, data.pop()));
    let forest = split_forest(&tree, 3)?;
    println!("subtree roots {:?}, parents {:?}", forest.roots, forest.parent);

    let state = init_labels(&data)?;
    show("known labels", &state);
    let state = c2p(state, &forest, data.pop(), &PropagationOptions::default())?;
    show("after children to parent", &state);
    let state = r2r(state, &forest, &tree, &dm)?;
    show("after root to root", &state);
    let state = p2c(state, &forest, data.pop(), data.mode())?;
    show("after parent to children", &state);
    println!("{:?}", finalize(&state, data.mode())?);
    Ok(())
}
