//! Three-pass label propagation over a leading forest.
//!
//! 1. Children to parent: bottom-up, a parent takes the weighted mean of its
//!    children's label vectors, with weight `pop / dist(child, parent)`.
//! 2. Root to root: every still-unlabeled subtree root borrows the vector of
//!    the nearest labeled root among its ancestors in the whole tree. The
//!    global root is labeled first (from the nearest labeled root) so that
//!    such an ancestor always exists.
//! 3. Parent to children: top-down, unlabeled children receive the part of
//!    the parent's vector that the labeled children do not explain.
//!
//! Each pass touches every edge once, so the whole propagation is linear in
//! the number of points.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label, Mode};
use crate::error::{Error, Result};
use crate::leading_tree::{DistanceMatrix, LeadingTree};
use crate::lodog::LeadingForest;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Initialized,
    AfterC2p,
    AfterR2r,
    AfterP2c,
}

/// Which children's weights normalize a parent's vector in the bottom-up pass.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C2pDenominator {
    /// Only labeled children: the parent is the weighted mean of what is known.
    #[default]
    LabeledChildren,
    /// Every child, unlabeled ones counting as zero vectors.
    AllChildren,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PropagationOptions {
    #[serde(default)]
    pub c2p_denominator: C2pDenominator,
}

/// Soft label matrix (one row per point) with explicit labeled flags.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelState {
    width: usize,
    labels: Vec<f64>,
    is_labeled: Vec<bool>,
    stage: Stage,
}

impl LabelState {
    pub fn len(&self) -> usize {
        self.is_labeled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_labeled.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.labels[i * self.width..(i + 1) * self.width]
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.labels[i * self.width..(i + 1) * self.width]
    }

    pub fn is_labeled(&self, i: usize) -> bool {
        self.is_labeled[i]
    }

    pub fn labeled_flags(&self) -> &[bool] {
        &self.is_labeled
    }

    fn expect(&self, stage: Stage) -> Result<()> {
        if self.stage == stage {
            Ok(())
        } else {
            Err(Error::Stage {
                expected: stage,
                found: self.stage,
            })
        }
    }
}

pub fn init_labels(data: &Dataset) -> Result<LabelState> {
    let mode = data.mode();
    if let Mode::Classification { classes } = mode {
        if classes < 2 {
            return Err(Error::InvalidParameter(format!(
                "classification needs at least two classes, found {classes}"
            )));
        }
    }
    let width = mode.width();
    let mut labels = vec![0.0; data.len() * width];
    let mut is_labeled = vec![false; data.len()];
    for (i, label) in data.labels().iter().enumerate() {
        match label {
            Some(Label::Class(c)) => labels[i * width + c] = 1.0,
            Some(Label::Value(v)) => labels[i * width] = *v,
            None => continue,
        }
        is_labeled[i] = true;
    }
    if !is_labeled.iter().any(|&l| l) {
        return Err(Error::NothingToPropagate);
    }
    Ok(LabelState {
        width,
        labels,
        is_labeled,
        stage: Stage::Initialized,
    })
}

/// Weight of an edge from a child of population `pop` at distance `dist`
/// from its parent: `pop / dist`.
///
/// # Panics
///
/// Panics when the distance is zero, which means duplicates were not merged
/// before the tree was built.
pub fn edge_weight(pop: u32, dist: f64) -> f64 {
    assert!(
        dist > 0.0,
        "child and parent coincide; duplicates must be merged first"
    );
    f64::from(pop) / dist
}

pub fn c2p(
    mut state: LabelState,
    forest: &LeadingForest,
    pop: &[u32],
    options: &PropagationOptions,
) -> Result<LabelState> {
    state.expect(Stage::Initialized)?;
    let mut acc = vec![0.0; state.width];
    // children come after their parent in BFS order
    for &p in forest.bfs_order.iter().rev() {
        let children = forest.children(p);
        if children.is_empty() || state.is_labeled[p] {
            continue;
        }
        acc.fill(0.0);
        let mut w_all = 0.0;
        let mut w_labeled = 0.0;
        for &c in children {
            let w = edge_weight(pop[c], forest.parent_dist[c]);
            w_all += w;
            if state.is_labeled[c] {
                w_labeled += w;
                for (a, l) in acc.iter_mut().zip(state.row(c)) {
                    *a += w * l;
                }
            }
        }
        if w_labeled == 0.0 {
            continue;
        }
        let denom = match options.c2p_denominator {
            C2pDenominator::LabeledChildren => w_labeled,
            C2pDenominator::AllChildren => w_all,
        };
        for (dst, a) in state.row_mut(p).iter_mut().zip(&acc) {
            *dst = a / denom;
        }
        state.is_labeled[p] = true;
    }
    state.stage = Stage::AfterC2p;
    Ok(state)
}

/// Nearest candidate to `from`, ties to the lower index.
fn nearest(dm: &DistanceMatrix, from: usize, candidates: impl Iterator<Item = usize>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for c in candidates {
        let d = dm.get(from, c);
        let better = match best {
            None => true,
            Some((bc, bd)) => d < bd || (d == bd && c < bc),
        };
        if better {
            best = Some((c, d));
        }
    }
    best.map(|(c, _)| c)
}

pub fn r2r(
    mut state: LabelState,
    forest: &LeadingForest,
    tree: &LeadingTree,
    dm: &DistanceMatrix,
) -> Result<LabelState> {
    state.expect(Stage::AfterC2p)?;
    let mut source = vec![false; state.len()];
    let mut any = false;
    for &r in &forest.roots {
        if state.is_labeled[r] {
            source[r] = true;
            any = true;
        }
    }
    if !any {
        return Err(Error::NothingToPropagate);
    }

    let top = tree.root;
    if !state.is_labeled[top] {
        let lender = nearest(dm, top, forest.roots.iter().copied().filter(|&r| source[r]))
            .expect("labeled root set is nonempty");
        copy_row(&mut state, lender, top);
        state.is_labeled[top] = true;
        source[top] = true;
    }

    // borrowed vectors never act as sources, so the order of borrowers is irrelevant
    for &r in &forest.roots {
        if state.is_labeled[r] {
            continue;
        }
        let ancestors = std::iter::successors(tree.ln[r], |&a| tree.ln[a]);
        let lender = nearest(dm, r, ancestors.filter(|&a| source[a]))
            .expect("the global root is a labeled ancestor of every other root");
        copy_row(&mut state, lender, r);
        state.is_labeled[r] = true;
    }
    state.stage = Stage::AfterR2r;
    Ok(state)
}

fn copy_row(state: &mut LabelState, from: usize, to: usize) {
    let w = state.width;
    state.labels.copy_within(from * w..(from + 1) * w, to * w);
}

/// Top-down pass. In classification the unlabeled children receive the
/// residual `L_p - Σ_labeled W_i L_i / Σ_all W_i` as is; only its direction
/// matters for the argmax, so it is not rescaled and may hold negative
/// entries. In regression the residual is scaled by `Σ_all W / Σ_unlabeled W`
/// so that the children reproduce the parent's value exactly.
pub fn p2c(
    mut state: LabelState,
    forest: &LeadingForest,
    pop: &[u32],
    mode: Mode,
) -> Result<LabelState> {
    state.expect(Stage::AfterR2r)?;
    let width = state.width;
    let mut assigned = vec![0.0; width];
    let mut unlabeled = Vec::new();
    for &p in &forest.bfs_order {
        let children = forest.children(p);
        if children.is_empty() {
            continue;
        }
        debug_assert!(state.is_labeled[p], "parent {p} reached unlabeled");
        unlabeled.clear();
        unlabeled.extend(children.iter().copied().filter(|&c| !state.is_labeled[c]));
        if unlabeled.is_empty() {
            continue;
        }
        assigned.copy_from_slice(state.row(p));
        if unlabeled.len() < children.len() {
            let mut w_all = 0.0;
            let mut w_unlabeled = 0.0;
            let mut explained = vec![0.0; width];
            for &c in children {
                let w = edge_weight(pop[c], forest.parent_dist[c]);
                w_all += w;
                if state.is_labeled[c] {
                    for (e, l) in explained.iter_mut().zip(state.row(c)) {
                        *e += w * l;
                    }
                } else {
                    w_unlabeled += w;
                }
            }
            let scale = match mode {
                Mode::Regression => w_all / w_unlabeled,
                Mode::Classification { .. } => 1.0,
            };
            for (a, e) in assigned.iter_mut().zip(&explained) {
                *a = (*a - e / w_all) * scale;
            }
        }
        for &c in &unlabeled {
            state.row_mut(c).copy_from_slice(&assigned);
            state.is_labeled[c] = true;
        }
    }
    state.stage = Stage::AfterP2c;
    Ok(state)
}

/// Hard predictions: argmax (ties to the lowest class) or the scalar value.
pub fn finalize(state: &LabelState, mode: Mode) -> Result<Vec<Label>> {
    state.expect(Stage::AfterP2c)?;
    Ok((0..state.len())
        .map(|i| {
            let row = state.row(i);
            match mode {
                Mode::Regression => Label::Value(row[0]),
                Mode::Classification { .. } => Label::Class(argmax(row)),
            }
        })
        .collect())
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in row.iter().enumerate() {
        if *v > row[best] {
            best = k;
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct Propagated {
    pub state: LabelState,
    pub predictions: Vec<Label>,
}

/// Runs all three passes from the dataset's known labels.
pub fn propagate(
    data: &Dataset,
    forest: &LeadingForest,
    tree: &LeadingTree,
    dm: &DistanceMatrix,
    options: &PropagationOptions,
) -> Result<Propagated> {
    let pop = data.pop();
    let state = init_labels(data)?;
    let state = c2p(state, forest, pop, options)?;
    let state = r2r(state, forest, tree, dm)?;
    let state = p2c(state, forest, pop, data.mode())?;
    let predictions = finalize(&state, data.mode())?;
    Ok(Propagated { state, predictions })
}
