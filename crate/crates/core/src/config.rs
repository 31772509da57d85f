//! JSON run configuration shared by the command-line tool and the examples.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{fold_time_series, Dataset, Label, Schema, TaskKind};
use crate::error::{Error, Result};
use crate::model::Params;
use crate::synth;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    #[serde(flatten)]
    pub params: Params,
    pub mode: TaskKind,
    pub label_column: Option<String>,
    /// Optional column with held-out ground truth used only for metrics.
    pub truth_column: Option<String>,
    pub classes: Option<Vec<String>>,
    pub pop_column: Option<String>,
    pub ignore_columns: Vec<String>,
    pub seed: u64,
    /// Generator used when no data file is given.
    pub synthetic: Option<Synthetic>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            params: Params::default(),
            mode: TaskKind::Classification,
            label_column: Some("label".into()),
            truth_column: None,
            classes: None,
            pop_column: None,
            ignore_columns: Vec::new(),
            seed: 0,
            synthetic: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Synthetic {
    Blobs {
        n: usize,
        separation: f64,
        label_fraction: f64,
    },
    Moons {
        n: usize,
        noise: f64,
        label_fraction: f64,
    },
    /// Lag-folded noisy sine; the first `train` windows keep their targets.
    Sine {
        length: usize,
        period: f64,
        noise: f64,
        lag: usize,
        train: usize,
    },
}

impl Synthetic {
    /// Generated dataset and the full ground truth.
    pub fn generate(&self, seed: u64) -> Result<(Dataset, Vec<Option<Label>>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match *self {
            Synthetic::Blobs {
                n,
                separation,
                label_fraction,
            } => Ok(synth::mask_labels(
                &synth::two_blobs(n, separation, &mut rng),
                label_fraction,
                &mut rng,
            )),
            Synthetic::Moons {
                n,
                noise,
                label_fraction,
            } => Ok(synth::mask_labels(
                &synth::two_moons(n, noise, &mut rng),
                label_fraction,
                &mut rng,
            )),
            Synthetic::Sine {
                length,
                period,
                noise,
                lag,
                train,
            } => {
                let series = synth::noisy_sine(length, period, noise, &mut rng);
                let mut data = fold_time_series(&series, lag)?;
                let truth = data.labels().to_vec();
                data.retain_labels(|i| i < train);
                Ok((data, truth))
            }
        }
    }
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: Config = serde_json::from_str(&text)?;
        config.params.validate()?;
        Ok(config)
    }

    fn base_schema(&self) -> Schema {
        Schema {
            label_column: self.label_column.clone(),
            mode: self.mode,
            classes: self.classes.clone(),
            pop_column: self.pop_column.clone(),
            ignore_columns: self.ignore_columns.clone(),
        }
    }

    /// Schema for the training data: the truth column is not a feature.
    pub fn schema(&self) -> Schema {
        let mut schema = self.base_schema();
        schema.ignore_columns.extend(self.truth_column.clone());
        schema
    }

    /// Schema reading the truth column as the label column, if one is set.
    pub fn truth_schema(&self, classes: Option<Vec<String>>) -> Option<Schema> {
        let truth = self.truth_column.clone()?;
        let mut schema = self.base_schema();
        schema.ignore_columns.extend(self.label_column.clone());
        schema.label_column = Some(truth);
        schema.classes = classes;
        Some(schema)
    }
}
