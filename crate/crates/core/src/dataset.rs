//! Canonical in-memory dataset: features, fat-node populations and the
//! optional known labels.
//!
//! Features are used exactly as given. Nothing here rescales columns, so
//! callers should bring attributes onto comparable scales before fitting.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Learning task carried by a dataset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Classification { classes: usize },
    Regression,
}

impl Mode {
    /// Width of a label vector: the class count, or 1 for regression.
    pub fn width(&self) -> usize {
        match *self {
            Mode::Classification { classes } => classes,
            Mode::Regression => 1,
        }
    }
}

/// Task kind as named in a schema or config, before the class count is known.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    #[default]
    Classification,
    Regression,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Class(usize),
    Value(f64),
}

impl Label {
    pub fn class(&self) -> Option<usize> {
        match *self {
            Label::Class(c) => Some(c),
            Label::Value(_) => None,
        }
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            Label::Value(v) => Some(v),
            Label::Class(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    dim: usize,
    features: Vec<f64>,
    pop: Vec<u32>,
    labels: Vec<Option<Label>>,
    mode: Mode,
    #[serde(default)]
    feature_names: Vec<String>,
    #[serde(default)]
    class_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset from row vectors with unit populations.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<Option<Label>>, mode: Mode) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::Empty)?;
        let mut features = Vec::with_capacity(rows.len() * dim);
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            features.extend_from_slice(row);
        }
        let pop = vec![1; rows.len()];
        Self::from_parts(dim, features, pop, labels, mode)
    }

    /// Builds a dataset from a flat row-major feature buffer.
    pub fn from_parts(
        dim: usize,
        features: Vec<f64>,
        pop: Vec<u32>,
        labels: Vec<Option<Label>>,
        mode: Mode,
    ) -> Result<Self> {
        let data = Dataset {
            dim,
            features,
            pop,
            labels,
            mode,
            feature_names: Vec::new(),
            class_names: Vec::new(),
        };
        data.validate()?;
        Ok(data)
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Self {
        self.feature_names = names;
        self
    }

    pub fn with_class_names(mut self, names: Vec<String>) -> Self {
        self.class_names = names;
        self
    }

    /// Checks every structural invariant except uniqueness of rows, which
    /// `merge_duplicates` establishes.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.features.is_empty() {
            return Err(Error::Empty);
        }
        if !self.features.len().is_multiple_of(self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: self.features.len() % self.dim,
            });
        }
        let n = self.features.len() / self.dim;
        if self.pop.len() != n || self.labels.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} rows but {} populations and {} labels",
                n,
                self.pop.len(),
                self.labels.len()
            )));
        }
        if let Some(i) = self.features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                line: (i / self.dim) as u64,
            });
        }
        if self.pop.contains(&0) {
            return Err(Error::InvalidParameter("populations must be positive".into()));
        }
        for (i, label) in self.labels.iter().enumerate() {
            match (label, self.mode) {
                (None, _) => {}
                (Some(Label::Class(c)), Mode::Classification { classes }) if *c < classes => {}
                (Some(Label::Value(v)), Mode::Regression) if v.is_finite() => {}
                (Some(l), mode) => {
                    return Err(Error::InvalidParameter(format!(
                        "label {l:?} of row {i} does not fit {mode:?}"
                    )))
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.pop.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pop.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.features.chunks_exact(self.dim)
    }

    pub fn pop(&self) -> &[u32] {
        &self.pop
    }

    pub fn labels(&self) -> &[Option<Label>] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> Option<Label> {
        self.labels[i]
    }

    pub fn labeled_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Display name of a class id, falling back to the id itself.
    pub fn class_name(&self, class: usize) -> String {
        self.class_names
            .get(class)
            .cloned()
            .unwrap_or_else(|| class.to_string())
    }

    pub fn set_label(&mut self, i: usize, label: Option<Label>) {
        self.labels[i] = label;
    }

    /// Removes the labels of every row whose index is not kept by `keep`.
    pub fn retain_labels(&mut self, mut keep: impl FnMut(usize) -> bool) {
        for (i, l) in self.labels.iter_mut().enumerate() {
            if !keep(i) {
                *l = None;
            }
        }
    }

    pub(crate) fn push_row(&mut self, x: &[f64], pop: u32, label: Option<Label>) {
        debug_assert_eq!(x.len(), self.dim);
        self.features.extend_from_slice(x);
        self.pop.push(pop);
        self.labels.push(label);
    }

    pub(crate) fn bump_pop(&mut self, i: usize) {
        self.pop[i] += 1;
    }
}

/// Column roles for [`load_csv`].
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct Schema {
    /// Column holding the known label; `None` loads every row unlabeled.
    #[serde(default)]
    pub label_column: Option<String>,
    #[serde(default)]
    pub mode: TaskKind,
    /// Fixed class list. When absent, classes are the sorted distinct values
    /// of the label column.
    #[serde(default)]
    pub classes: Option<Vec<String>>,
    #[serde(default)]
    pub pop_column: Option<String>,
    /// Columns that are neither features nor labels.
    #[serde(default)]
    pub ignore_columns: Vec<String>,
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c == "?"
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_owned()))
    };

    if schema.mode == TaskKind::Classification && schema.label_column.is_none() {
        return Err(Error::InvalidParameter(
            "classification requires a label column".into(),
        ));
    }
    let label_col = schema.label_column.as_deref().map(find).transpose()?;
    let pop_col = schema.pop_column.as_deref().map(find).transpose()?;
    let mut ignored = Vec::new();
    for name in &schema.ignore_columns {
        ignored.push(find(name)?);
    }
    let feature_cols: Vec<usize> = (0..header.len())
        .filter(|c| Some(*c) != label_col && Some(*c) != pop_col && !ignored.contains(c))
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::InvalidParameter("no feature columns".into()));
    }

    let mut features = Vec::new();
    let mut pop = Vec::new();
    // label cell and its line number
    let mut raw_labels: Vec<Option<(String, u64)>> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for &c in &feature_cols {
            let cell = &record[c];
            let v: f64 = cell.parse().map_err(|_| Error::MalformedRow {
                line,
                reason: format!("cannot parse {cell:?} in column {:?}", header[c]),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite { line });
            }
            features.push(v);
        }
        let p = match pop_col {
            Some(c) => record[c].parse::<u32>().ok().filter(|&p| p > 0).ok_or_else(|| {
                Error::MalformedRow {
                    line,
                    reason: format!("population {:?} is not a positive integer", &record[c]),
                }
            })?,
            None => 1,
        };
        pop.push(p);
        raw_labels.push(
            label_col
                .map(|c| &record[c])
                .filter(|cell| !is_missing(cell))
                .map(|cell| (cell.to_owned(), line)),
        );
    }
    if pop.is_empty() {
        return Err(Error::Empty);
    }

    let (labels, mode, class_names) = match schema.mode {
        TaskKind::Regression => {
            let labels = raw_labels
                .into_iter()
                .map(|cell| {
                    cell.map(|(s, line)| {
                        let v: f64 = s.parse().map_err(|_| Error::MalformedRow {
                            line,
                            reason: format!("cannot parse target {s:?}"),
                        })?;
                        if v.is_finite() {
                            Ok(Label::Value(v))
                        } else {
                            Err(Error::NonFinite { line })
                        }
                    })
                    .transpose()
                })
                .collect::<Result<Vec<_>>>()?;
            (labels, Mode::Regression, Vec::new())
        }
        TaskKind::Classification => {
            let classes = match &schema.classes {
                Some(c) => c.clone(),
                None => {
                    let mut seen: Vec<String> =
                        raw_labels.iter().flatten().map(|(s, _)| s.clone()).collect();
                    seen.sort();
                    seen.dedup();
                    seen
                }
            };
            let index: HashMap<&str, usize> = classes
                .iter()
                .enumerate()
                .map(|(i, c)| (c.as_str(), i))
                .collect();
            let labels = raw_labels
                .iter()
                .map(|cell| {
                    cell.as_ref()
                        .map(|(s, line)| {
                            index.get(s.as_str()).map(|&id| Label::Class(id)).ok_or_else(|| {
                                Error::UnknownClass {
                                    line: *line,
                                    class: s.clone(),
                                }
                            })
                        })
                        .transpose()
                })
                .collect::<Result<Vec<_>>>()?;
            let k = classes.len();
            (labels, Mode::Classification { classes: k }, classes)
        }
    };

    let dim = feature_cols.len();
    let names = feature_cols.iter().map(|&c| header[c].clone()).collect();
    Ok(Dataset::from_parts(dim, features, pop, labels, mode)?
        .with_feature_names(names)
        .with_class_names(class_names))
}

/// Writes the dataset in the format [`read_csv`] accepts: feature columns,
/// a `pop` column when any population exceeds one, then a `label` column.
pub fn write_csv<W: Write>(data: &Dataset, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let with_pop = data.pop.iter().any(|&p| p > 1);
    let mut header: Vec<String> = if data.feature_names.len() == data.dim {
        data.feature_names.clone()
    } else {
        (0..data.dim).map(|j| format!("x{j}")).collect()
    };
    if with_pop {
        header.push("pop".into());
    }
    header.push("label".into());
    wtr.write_record(&header)?;
    for i in 0..data.len() {
        let mut rec: Vec<String> = data.row(i).iter().map(|v| v.to_string()).collect();
        if with_pop {
            rec.push(data.pop[i].to_string());
        }
        rec.push(match data.labels[i] {
            None => String::new(),
            Some(Label::Class(c)) => data.class_name(c),
            Some(Label::Value(v)) => v.to_string(),
        });
        wtr.write_record(&rec)?;
    }
    wtr.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}

/// Result of [`merge_duplicates`].
#[derive(Clone, Debug)]
pub struct Merged {
    pub dataset: Dataset,
    /// Merged row index of every raw row.
    pub row_map: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Collapses rows with identical feature vectors into fat nodes whose
/// population is the group's total population.
///
/// Conflicting class labels inside a group resolve to the population-weighted
/// majority, ties going to the lowest class id. Conflicting regression targets
/// resolve to their population-weighted mean. Either case emits a warning.
pub fn merge_duplicates(raw: &Dataset) -> Merged {
    let mut slot: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut row_map = Vec::with_capacity(raw.len());
    for (i, row) in raw.rows().enumerate() {
        // +0.0 and -0.0 are the same point
        let key: Vec<u64> = row.iter().map(|v| (v + 0.0).to_bits()).collect();
        let g = *slot.entry(key).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
        row_map.push(g);
    }

    let mut warnings = Vec::new();
    let mut features = Vec::with_capacity(groups.len() * raw.dim);
    let mut pop = Vec::with_capacity(groups.len());
    let mut labels = Vec::with_capacity(groups.len());
    for members in &groups {
        let first = members[0];
        features.extend_from_slice(raw.row(first));
        pop.push(members.iter().map(|&i| raw.pop[i]).sum());
        let label = if members.len() == 1 {
            raw.labels[first]
        } else {
            merge_group_labels(raw, members, &mut warnings)
        };
        labels.push(label);
    }

    let dataset = Dataset {
        dim: raw.dim,
        features,
        pop,
        labels,
        mode: raw.mode,
        feature_names: raw.feature_names.clone(),
        class_names: raw.class_names.clone(),
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    Merged {
        dataset,
        row_map,
        warnings,
    }
}

fn merge_group_labels(raw: &Dataset, members: &[usize], warnings: &mut Vec<String>) -> Option<Label> {
    let labeled: Vec<(Label, u32)> = members
        .iter()
        .filter_map(|&i| raw.labels[i].map(|l| (l, raw.pop[i])))
        .collect();
    let (&(first, _), rest) = labeled.split_first()?;
    if rest.iter().all(|(l, _)| *l == first) {
        return Some(first);
    }
    let merged = match raw.mode {
        Mode::Classification { classes } => {
            let mut votes = vec![0u64; classes];
            for (l, p) in &labeled {
                if let Label::Class(c) = l {
                    votes[*c] += u64::from(*p);
                }
            }
            // max_by_key keeps the last maximum, so scan in reverse for the lowest id
            let best = (0..classes).rev().max_by_key(|&c| votes[c]).unwrap_or(0);
            Label::Class(best)
        }
        Mode::Regression => {
            let (num, den) = labeled.iter().fold((0.0, 0.0), |(n, d), (l, p)| {
                let w = f64::from(*p);
                (n + w * l.value().unwrap_or(0.0), d + w)
            });
            Label::Value(num / den)
        }
    };
    warnings.push(format!(
        "rows {members:?} share a feature vector but carry conflicting labels; kept {merged:?}"
    ));
    Some(merged)
}

/// Folds a series into lagged windows: row `t` holds `series[t..t + lag]`
/// and is labeled with the element that follows the window.
pub fn fold_time_series(series: &[f64], lag: usize) -> Result<Dataset> {
    if lag == 0 {
        return Err(Error::InvalidParameter("lag must be positive".into()));
    }
    if series.len() <= lag {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            lag,
        });
    }
    if let Some(t) = series.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { line: t as u64 });
    }
    let rows = series.len() - lag;
    let mut features = Vec::with_capacity(rows * lag);
    let mut labels = Vec::with_capacity(rows);
    for window in series.windows(lag + 1) {
        features.extend_from_slice(&window[..lag]);
        labels.push(Some(Label::Value(window[lag])));
    }
    let names = (1..=lag).map(|k| format!("lag{}", lag + 1 - k)).collect();
    Ok(
        Dataset::from_parts(lag, features, vec![1; rows], labels, Mode::Regression)?
            .with_feature_names(names),
    )
}

/// Reads the named numeric columns of a CSV file, in the given order. With no
/// names, every column is read.
pub fn read_feature_rows<R: Read>(reader: R, columns: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let picks: Vec<usize> = if columns.is_empty() {
        (0..header.len()).collect()
    } else {
        columns
            .iter()
            .map(|name| {
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::MissingColumn(name.clone()))
            })
            .collect::<Result<_>>()?
    };
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let row = picks
            .iter()
            .map(|&c| {
                let cell = record.get(c).ok_or_else(|| Error::MalformedRow {
                    line,
                    reason: "missing field".into(),
                })?;
                let v: f64 = cell.parse().map_err(|_| Error::MalformedRow {
                    line,
                    reason: format!("cannot parse {cell:?}"),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::NonFinite { line })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}
