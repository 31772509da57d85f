//! A fitted model: dataset, distances, leading tree, forest and the
//! propagated labels, kept mutually consistent.

use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dataset::{merge_duplicates, Dataset, Label};
use crate::error::{Error, Result};
use crate::leading_tree::{
    build_leading_tree, cutoff_distance, local_density, pairwise_distances, DistanceMatrix,
    LeadingTree, Metric,
};
use crate::lodog::{default_n_max, evaluate_objective, split_forest, HSpec, LeadingForest, LodogCurve};
use crate::propagation::{propagate, LabelState, PropagationOptions};

const FORMAT: &str = "lapoleaf-model";
const VERSION: u32 = 1;

/// Hyperparameters of a fit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Params {
    /// Percentile of pairwise distances used as the density bandwidth.
    pub percent: f64,
    pub alpha: f64,
    pub h: HSpec,
    /// Largest granule count searched; defaults to `min(n, ceil(sqrt(n)) + 50)`.
    pub n_max: Option<usize>,
    pub metric: Metric,
    pub propagation: PropagationOptions,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            percent: 5.0,
            alpha: 0.5,
            h: HSpec::Linear { slope: 0.1 },
            n_max: None,
            metric: Metric::Euclidean,
            propagation: PropagationOptions::default(),
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        if !(self.percent > 0.0 && self.percent <= 100.0) {
            return Err(Error::InvalidParameter(format!(
                "percent must lie in (0, 100], got {}",
                self.percent
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.n_max == Some(0) {
            return Err(Error::InvalidParameter("n_max must be positive".into()));
        }
        self.h.validate()
    }

    pub(crate) fn n_max_for(&self, n: usize) -> usize {
        self.n_max.map_or_else(|| default_n_max(n), |m| m.min(n))
    }
}

/// Wall time of the four fit stages, in seconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub preprocessing_s: f64,
    pub distance_s: f64,
    pub oleaf_s: f64,
    pub propagation_s: f64,
}

#[derive(Clone, Debug)]
pub struct FitReport {
    pub timings: StageTimings,
    /// Model row of every input row after duplicates were merged.
    pub row_map: Vec<usize>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Model {
    pub(crate) params: Params,
    pub(crate) dc: f64,
    pub(crate) data: Dataset,
    pub(crate) dm: DistanceMatrix,
    pub(crate) tree: LeadingTree,
    pub(crate) curve: LodogCurve,
    pub(crate) forest: LeadingForest,
    /// Points sorted densest first.
    pub(crate) order: Vec<usize>,
    pub(crate) state: LabelState,
    pub(crate) predictions: Vec<Label>,
}

impl Model {
    /// Full pipeline: merge duplicates, distances, cut-off, density, leading
    /// tree, granulation and propagation.
    pub fn fit(raw: &Dataset, params: Params) -> Result<(Model, FitReport)> {
        params.validate()?;
        raw.validate()?;
        let t = Instant::now();
        let merged = merge_duplicates(raw);
        let preprocessing_s = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let dm = pairwise_distances(&merged.dataset, params.metric);
        let distance_s = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let dc = cutoff_distance(&dm, params.percent)?;
        let (tree, curve, forest) = structure(&merged.dataset, &dm, dc, &params)?;
        let oleaf_s = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let out = propagate(&merged.dataset, &forest, &tree, &dm, &params.propagation)?;
        let propagation_s = t.elapsed().as_secs_f64();

        let order = tree.density_order();
        let model = Model {
            params,
            dc,
            data: merged.dataset,
            dm,
            tree,
            curve,
            forest,
            order,
            state: out.state,
            predictions: out.predictions,
        };
        let report = FitReport {
            timings: StageTimings {
                preprocessing_s,
                distance_s,
                oleaf_s,
                propagation_s,
            },
            row_map: merged.row_map,
            warnings: merged.warnings,
        };
        Ok((model, report))
    }

    /// Builds a model from already deduplicated data with a given cut-off
    /// distance instead of the percentile rule.
    pub fn with_cutoff(data: Dataset, params: Params, dc: f64) -> Result<Model> {
        params.validate()?;
        data.validate()?;
        if !(dc.is_finite() && dc > 0.0) {
            return Err(Error::InvalidParameter(format!("cut-off distance {dc} is not positive")));
        }
        let dm = pairwise_distances(&data, params.metric);
        Self::assemble(data, params, dc, dm)
    }

    fn assemble(data: Dataset, params: Params, dc: f64, dm: DistanceMatrix) -> Result<Model> {
        let (tree, curve, forest) = structure(&data, &dm, dc, &params)?;
        let out = propagate(&data, &forest, &tree, &dm, &params.propagation)?;
        let order = tree.density_order();
        Ok(Model {
            params,
            dc,
            data,
            dm,
            tree,
            curve,
            forest,
            order,
            state: out.state,
            predictions: out.predictions,
        })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn cutoff(&self) -> f64 {
        self.dc
    }

    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn distances(&self) -> &DistanceMatrix {
        &self.dm
    }

    pub fn tree(&self) -> &LeadingTree {
        &self.tree
    }

    pub fn curve(&self) -> &LodogCurve {
        &self.curve
    }

    pub fn forest(&self) -> &LeadingForest {
        &self.forest
    }

    pub fn label_state(&self) -> &LabelState {
        &self.state
    }

    pub fn predictions(&self) -> &[Label] {
        &self.predictions
    }

    /// Recomputes the granulation from the current tree.
    pub(crate) fn refresh_forest(&mut self) -> Result<()> {
        let n_max = self.params.n_max_for(self.len());
        self.curve = evaluate_objective(&self.tree, &self.params.h, self.params.alpha, n_max)?;
        self.forest = split_forest(&self.tree, self.curve.ng_star)?;
        Ok(())
    }

    pub(crate) fn repropagate(&mut self) -> Result<()> {
        let out = propagate(
            &self.data,
            &self.forest,
            &self.tree,
            &self.dm,
            &self.params.propagation,
        )?;
        self.state = out.state;
        self.predictions = out.predictions;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&ModelDocument::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Model> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        doc.into_model()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Model> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

fn structure(
    data: &Dataset,
    dm: &DistanceMatrix,
    dc: f64,
    params: &Params,
) -> Result<(LeadingTree, LodogCurve, LeadingForest)> {
    let rho = local_density(dm, dc, data.pop());
    let tree = build_leading_tree(dm, &rho);
    let n_max = params.n_max_for(data.len());
    let curve = evaluate_objective(&tree, &params.h, params.alpha, n_max)?;
    let forest = split_forest(&tree, curve.ng_star)?;
    Ok((tree, curve, forest))
}

/// Serialized forest: the split together with the whole-tree arrays.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ForestDocument {
    pub roots: Vec<usize>,
    pub subtree_id: Vec<usize>,
    pub layer: Vec<usize>,
    pub ln: Vec<Option<usize>>,
    pub rho: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl ForestDocument {
    pub fn new(tree: &LeadingTree, forest: &LeadingForest) -> Self {
        ForestDocument {
            roots: forest.roots.clone(),
            subtree_id: forest.subtree_id.clone(),
            layer: forest.layer.clone(),
            ln: tree.ln.clone(),
            rho: tree.rho.clone(),
            delta: tree.delta.clone(),
            gamma: tree.gamma.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ModelDocument {
    format: String,
    version: u32,
    params: Params,
    dc: f64,
    dataset: Dataset,
    root: usize,
    forest: ForestDocument,
    objective: LodogCurve,
}

impl From<&Model> for ModelDocument {
    fn from(m: &Model) -> Self {
        ModelDocument {
            format: FORMAT.into(),
            version: VERSION,
            params: m.params,
            dc: m.dc,
            dataset: m.data.clone(),
            root: m.tree.root,
            forest: ForestDocument::new(&m.tree, &m.forest),
            objective: m.curve.clone(),
        }
    }
}

impl ModelDocument {
    fn into_model(self) -> Result<Model> {
        let bad = |m: &str| Err(Error::InvalidModel(m.into()));
        if self.format != FORMAT {
            return bad("not a model document");
        }
        if self.version != VERSION {
            return Err(Error::InvalidModel(format!(
                "unsupported model version {}",
                self.version
            )));
        }
        self.params.validate()?;
        self.dataset.validate()?;
        let n = self.dataset.len();
        let f = self.forest;
        if f.rho.len() != n {
            return bad("tree arrays do not match the dataset");
        }
        let tree = LeadingTree {
            rho: f.rho,
            delta: f.delta,
            gamma: f.gamma,
            ln: f.ln,
            root: self.root,
        };
        tree.check()?;
        let forest = split_forest(&tree, f.roots.len())?;
        if forest.roots != f.roots || forest.subtree_id != f.subtree_id || forest.layer != f.layer {
            return bad("forest does not match the leading tree");
        }
        let dm = pairwise_distances(&self.dataset, self.params.metric);
        let out = propagate(&self.dataset, &forest, &tree, &dm, &self.params.propagation)?;
        let order = tree.density_order();
        Ok(Model {
            params: self.params,
            dc: self.dc,
            data: self.dataset,
            dm,
            tree,
            curve: self.objective,
            forest,
            order,
            state: out.state,
            predictions: out.predictions,
        })
    }
}
