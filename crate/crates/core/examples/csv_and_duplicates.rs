//! Load a partially labeled CSV and merge repeated rows into fat nodes.

use lapoleaf::dataset::{merge_duplicates, read_csv};
use lapoleaf::{Schema, TaskKind};

const CSV: &str = "\
x,y,kind
0.0,0.0,cat
0.0,0.0,cat
0.0,0.0,dog
0.4,0.1,
5.0,5.0,dog
5.1,4.9,
5.1,4.9,
";

fn main() -> lapoleaf::Result<()> {
    let schema = Schema {
        label_column: Some("kind".into()),
        mode: TaskKind::Classification,
        ..Schema::default()
    };
    let raw = read_csv(CSV.as_bytes(), &schema)?;
    println!("{} rows, classes {:?}", raw.len(), raw.class_names());

    let merged = merge_duplicates(&raw);
    for w in &merged.warnings {
        println!("warning: {w}");
    }
    let data = &merged.dataset;
    for i in 0..data.len() {
        let label = data.label(i).and_then(|l| l.class()).map(|c| data.class_name(c));
        println!("point {i}: {:?} pop {} label {:?}", data.row(i), data.pop()[i], label);
    }
    println!("raw row -> point: {:?}", merged.row_map);
    Ok(())
}
