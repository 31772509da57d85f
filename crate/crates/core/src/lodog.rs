//! Optimal granulation of the leading tree.
//!
//! Cutting the `N_g` points with the highest center potential out of the tree
//! yields `N_g` subtrees (granules). The cost of a granule is the sum of the
//! δ-distances of its non-root members, so cutting a point out of the tree
//! removes exactly its own δ from the total. Once the top γ points are ranked,
//! the whole objective curve follows from suffix sums of δ.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::leading_tree::LeadingTree;

/// Strictly increasing penalty on the granule count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HSpec {
    /// `slope * x`
    Linear { slope: f64 },
    /// `scale * ln(1 + x)`
    Logarithm { scale: f64 },
    /// `scale * x^exponent`
    Power { scale: f64, exponent: f64 },
    /// `scale * base^x`
    Exponential { scale: f64, base: f64 },
    /// `scale * x * base^x`
    Product { scale: f64, base: f64 },
}

impl Default for HSpec {
    fn default() -> Self {
        HSpec::Linear { slope: 0.1 }
    }
}

impl HSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            HSpec::Linear { slope } => slope * x,
            HSpec::Logarithm { scale } => scale * x.ln_1p(),
            HSpec::Power { scale, exponent } => scale * x.powf(exponent),
            HSpec::Exponential { scale, base } => scale * base.powf(x),
            HSpec::Product { scale, base } => scale * x * base.powf(x),
        }
    }

    /// Rejects parameterizations that are not strictly increasing.
    pub fn validate(&self) -> Result<()> {
        let ok = |c: bool, what: &str| {
            if c {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("H: {what} ({self:?})")))
            }
        };
        let positive = |v: f64| v.is_finite() && v > 0.0;
        match *self {
            HSpec::Linear { slope } => ok(positive(slope), "slope must be positive"),
            HSpec::Logarithm { scale } => ok(positive(scale), "scale must be positive"),
            HSpec::Power { scale, exponent } => ok(
                positive(scale) && positive(exponent),
                "scale and exponent must be positive",
            ),
            HSpec::Exponential { scale, base } => ok(
                positive(scale) && base.is_finite() && base > 1.0,
                "scale must be positive and base above 1",
            ),
            HSpec::Product { scale, base } => ok(
                positive(scale) && base.is_finite() && base >= 1.0,
                "scale must be positive and base at least 1",
            ),
        }
    }
}

/// Default cap on the number of granules searched: `min(n, ceil(sqrt(n)) + 50)`.
pub fn default_n_max(n: usize) -> usize {
    n.min((n as f64).sqrt().ceil() as usize + 50)
}

/// Objective value for every candidate granule count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LodogCurve {
    /// `q[k]` is the objective for `k + 1` granules.
    pub q: Vec<f64>,
    pub ng_star: usize,
    pub alpha: f64,
    pub n_max: usize,
}

impl LodogCurve {
    pub fn at(&self, ng: usize) -> f64 {
        self.q[ng - 1]
    }
}

/// Points ordered by decreasing γ, ties to the lower index.
///
/// The global root is always first. Under the max-distance root convention it
/// ranks first on its own; if rounding ever says otherwise it is moved to the
/// front and a warning is logged.
pub fn gamma_ranking(tree: &LeadingTree) -> Vec<usize> {
    top_gamma(tree, tree.len())
}

/// The first `k` entries of [`gamma_ranking`], without sorting the rest.
pub fn top_gamma(tree: &LeadingTree, k: usize) -> Vec<usize> {
    let by_gamma = |a: &usize, b: &usize| {
        tree.gamma[*b]
            .total_cmp(&tree.gamma[*a])
            .then_with(|| a.cmp(b))
    };
    if k == 0 {
        return Vec::new();
    }
    let root = tree.root;
    let mut rest: Vec<usize> = (0..tree.len()).filter(|&i| i != root).collect();
    // the order is total, so selection plus a sort of the head is deterministic
    if k >= 2 && k - 1 < rest.len() {
        rest.select_nth_unstable_by(k - 2, by_gamma);
    }
    rest.truncate(k - 1);
    rest.sort_unstable_by(by_gamma);
    if rest
        .first()
        .is_some_and(|&i| by_gamma(&i, &root) == std::cmp::Ordering::Less)
    {
        log::warn!(
            "global root {root} does not have the largest center potential; forcing it into the root set"
        );
    }
    let mut order = Vec::with_capacity(k);
    order.push(root);
    order.extend(rest);
    order
}

pub fn evaluate_objective(
    tree: &LeadingTree,
    h: &HSpec,
    alpha: f64,
    n_max: usize,
) -> Result<LodogCurve> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    h.validate()?;
    let n = tree.len();
    if n_max == 0 || n_max > n {
        return Err(Error::InvalidParameter(format!(
            "granule cap must lie in [1, {n}], got {n_max}"
        )));
    }
    let ranking = top_gamma(tree, n_max);
    // remaining[k]: total δ of the points ranked k.. (all non-roots for k >= 1)
    let mut ranked = vec![false; n];
    for &i in &ranking {
        ranked[i] = true;
    }
    let mut remaining = vec![0.0; n_max + 1];
    remaining[n_max] = (0..n).filter(|&i| !ranked[i]).map(|i| tree.delta[i]).sum();
    for k in (1..n_max).rev() {
        remaining[k] = remaining[k + 1] + tree.delta[ranking[k]];
    }
    let mut q = Vec::with_capacity(n_max);
    for (ng, rem) in (1..=n_max).zip(&remaining[1..]) {
        let hv = h.eval(ng as f64);
        if !hv.is_finite() {
            return Err(Error::InvalidParameter(format!("H({ng}) is not finite")));
        }
        q.push(alpha * hv + (1.0 - alpha) * rem);
    }
    let ng_star = q
        .iter()
        .enumerate()
        .fold(0, |best, (k, v)| if *v < q[best] { k } else { best })
        + 1;
    Ok(LodogCurve {
        q,
        ng_star,
        alpha,
        n_max,
    })
}

/// The leading tree cut into subtrees at the top-γ points.
#[derive(Clone, Debug, PartialEq)]
pub struct LeadingForest {
    /// Subtree roots in γ order; `roots[0]` is the global root.
    pub roots: Vec<usize>,
    pub subtree_id: Vec<usize>,
    /// Parent inside the forest; `None` at every subtree root.
    pub parent: Vec<Option<usize>>,
    /// Distance to the forest parent (δ of the point); 0 at subtree roots.
    pub parent_dist: Vec<f64>,
    pub layer: Vec<usize>,
    /// Deepest layer of every subtree.
    pub max_layer: Vec<usize>,
    /// Breadth-first order of all points, subtree after subtree.
    pub bfs_order: Vec<usize>,
    // children of p are child_list[child_start[p]..child_start[p + 1]]
    child_start: Vec<usize>,
    child_list: Vec<usize>,
}

impl LeadingForest {
    /// Builds the forest from parent links. Every `None` parent must be one
    /// of `roots` and every chain must end in a root.
    pub(crate) fn from_parents(
        roots: Vec<usize>,
        parent: Vec<Option<usize>>,
        parent_dist: Vec<f64>,
    ) -> LeadingForest {
        let n = parent.len();
        let mut child_start = vec![0; n + 1];
        for p in parent.iter().flatten() {
            child_start[p + 1] += 1;
        }
        for k in 0..n {
            child_start[k + 1] += child_start[k];
        }
        let mut fill = child_start.clone();
        let mut child_list = vec![0; child_start[n]];
        for (i, p) in parent.iter().enumerate() {
            if let Some(p) = *p {
                child_list[fill[p]] = i;
                fill[p] += 1;
            }
        }

        let mut subtree_id = vec![usize::MAX; n];
        let mut layer = vec![0; n];
        let mut max_layer = vec![0; roots.len()];
        let mut bfs_order = Vec::with_capacity(n);
        for (s, &r) in roots.iter().enumerate() {
            subtree_id[r] = s;
            let mut head = bfs_order.len();
            bfs_order.push(r);
            while head < bfs_order.len() {
                let p = bfs_order[head];
                head += 1;
                max_layer[s] = max_layer[s].max(layer[p]);
                for &c in &child_list[child_start[p]..child_start[p + 1]] {
                    subtree_id[c] = s;
                    layer[c] = layer[p] + 1;
                    bfs_order.push(c);
                }
            }
        }
        debug_assert_eq!(bfs_order.len(), n);

        LeadingForest {
            roots,
            subtree_id,
            parent,
            parent_dist,
            layer,
            max_layer,
            bfs_order,
            child_start,
            child_list,
        }
    }

    pub fn len(&self) -> usize {
        self.subtree_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subtree_id.is_empty()
    }

    pub fn n_subtrees(&self) -> usize {
        self.roots.len()
    }

    pub fn is_root(&self, i: usize) -> bool {
        self.parent[i].is_none()
    }

    /// Children of `p` in increasing index order.
    pub fn children(&self, p: usize) -> &[usize] {
        &self.child_list[self.child_start[p]..self.child_start[p + 1]]
    }

    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.roots.len()];
        for &s in &self.subtree_id {
            sizes[s] += 1;
        }
        sizes
    }
}

pub fn split_forest(tree: &LeadingTree, ng: usize) -> Result<LeadingForest> {
    let n = tree.len();
    if ng == 0 || ng > n {
        return Err(Error::InvalidParameter(format!(
            "granule count must lie in [1, {n}], got {ng}"
        )));
    }
    let roots = top_gamma(tree, ng);
    let mut parent = tree.ln.clone();
    for &r in &roots {
        parent[r] = None;
    }
    let parent_dist = parent
        .iter()
        .zip(&tree.delta)
        .map(|(p, &d)| if p.is_some() { d } else { 0.0 })
        .collect();
    Ok(LeadingForest::from_parents(roots, parent, parent_dist))
}

/// Graphviz rendering with one cluster per subtree and the roots highlighted.
pub fn forest_to_dot(tree: &LeadingTree, forest: &LeadingForest) -> String {
    let mut members = vec![Vec::new(); forest.n_subtrees()];
    for &i in &forest.bfs_order {
        members[forest.subtree_id[i]].push(i);
    }
    let mut out = String::from("digraph leading_forest {\n  rankdir=BT;\n");
    for (s, nodes) in members.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{s} {{\n    label=\"subtree {s}\";");
        for &i in nodes {
            let style = if forest.is_root(i) {
                ", shape=doublecircle, style=filled, fillcolor=gold"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "    n{i} [label=\"{i}:ρ={:.4},δ={:.4},γ={:.4}\"{style}];",
                tree.rho[i], tree.delta[i], tree.gamma[i]
            );
        }
        out.push_str("  }\n");
    }
    for (i, p) in forest.parent.iter().enumerate() {
        if let Some(p) = p {
            let _ = writeln!(out, "  n{i} -> n{p};");
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dataset, Mode};
    use crate::leading_tree::{
        build_leading_tree, cutoff_distance, local_density, pairwise_distances, Metric,
    };
    use approx::assert_relative_eq;

    fn tree_1d(xs: &[f64], percent: f64) -> LeadingTree {
        let data = Dataset::new(
            xs.iter().map(|&x| vec![x]).collect(),
            vec![None; xs.len()],
            Mode::Regression,
        )
        .unwrap();
        let dm = pairwise_distances(&data, Metric::Euclidean);
        let dc = cutoff_distance(&dm, percent).unwrap();
        let rho = local_density(&dm, dc, data.pop());
        build_leading_tree(&dm, &rho)
    }

    /// Cuts the given roots, walks every point up to its granule root and
    /// sums δ of the non-root members per granule.
    fn literal_cost(tree: &LeadingTree, roots: &[usize]) -> (f64, Vec<usize>) {
        let n = tree.len();
        let is_root = |i: usize| roots.contains(&i);
        let mut owner = vec![0; n];
        let mut per_granule = vec![0.0; roots.len()];
        for i in 0..n {
            let mut cur = i;
            while !is_root(cur) {
                cur = tree.ln[cur].unwrap();
            }
            let g = roots.iter().position(|&r| r == cur).unwrap();
            owner[i] = g;
            if !is_root(i) {
                per_granule[g] += tree.delta[i];
            }
        }
        (per_granule.iter().sum(), owner)
    }

    fn two_clusters() -> Vec<f64> {
        let mut xs: Vec<f64> = (0..10).map(|k| 0.1 * k as f64 + 0.003 * (k * k) as f64).collect();
        xs.extend((0..10).map(|k| 10.0 + 0.12 * k as f64 - 0.004 * (k * k) as f64));
        xs
    }

    #[test]
    fn all_roots_leave_only_h() {
        let tree = tree_1d(&two_clusters(), 20.0);
        let n = tree.len();
        let h = HSpec::Linear { slope: 0.1 };
        let curve = evaluate_objective(&tree, &h, 0.5, n).unwrap();
        assert_eq!(curve.at(n), 0.5 * h.eval(n as f64));
    }

    #[test]
    fn single_granule_carries_all_non_root_delta() {
        let tree = tree_1d(&two_clusters(), 20.0);
        let s: f64 = (0..tree.len())
            .filter(|&i| i != tree.root)
            .map(|i| tree.delta[i])
            .sum();
        let curve = evaluate_objective(&tree, &HSpec::Linear { slope: 0.1 }, 0.5, 3).unwrap();
        assert_relative_eq!(curve.at(1), 0.5 * 0.1 + 0.5 * s, max_relative = 1e-12);
    }

    #[test]
    fn curve_matches_literal_granule_costs() {
        let tree = tree_1d(&two_clusters(), 20.0);
        let n = tree.len();
        let h = HSpec::Linear { slope: 0.1 };
        let curve = evaluate_objective(&tree, &h, 0.5, n).unwrap();
        let ranking = gamma_ranking(&tree);
        let mut best = (f64::INFINITY, 0);
        for ng in 1..=n {
            let (cost, _) = literal_cost(&tree, &ranking[..ng]);
            let q = 0.5 * h.eval(ng as f64) + 0.5 * cost;
            assert_relative_eq!(curve.at(ng), q, max_relative = 1e-12, epsilon = 1e-15);
            if q < best.0 {
                best = (q, ng);
            }
        }
        assert_eq!(curve.ng_star, best.1);
    }

    #[test]
    fn capped_ranking_and_curve_are_prefixes() {
        let tree = tree_1d(&two_clusters(), 20.0);
        let n = tree.len();
        let mut full: Vec<usize> = (0..n).collect();
        full.sort_by(|&a, &b| tree.gamma[b].total_cmp(&tree.gamma[a]).then(a.cmp(&b)));
        assert_eq!(full[0], tree.root);
        let h = HSpec::Power { scale: 0.3, exponent: 1.3 };
        let whole = evaluate_objective(&tree, &h, 0.4, n).unwrap();
        for k in 1..=n {
            assert_eq!(top_gamma(&tree, k), full[..k]);
            let capped = evaluate_objective(&tree, &h, 0.4, k).unwrap();
            for ng in 1..=k {
                assert_relative_eq!(capped.at(ng), whole.at(ng), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn parent_distance_is_the_edge_length() {
        let xs = two_clusters();
        let tree = tree_1d(&xs, 20.0);
        let forest = split_forest(&tree, 3).unwrap();
        for i in 0..xs.len() {
            match forest.parent[i] {
                Some(p) => assert_eq!(forest.parent_dist[i], (xs[i] - xs[p]).abs()),
                None => assert_eq!(forest.parent_dist[i], 0.0),
            }
        }
    }

    #[test]
    fn optimal_split_separates_the_clusters() {
        let xs = two_clusters();
        let tree = tree_1d(&xs, 20.0);
        let forest = split_forest(&tree, 2).unwrap();
        let (_, owner) = literal_cost(&tree, &forest.roots);
        assert_eq!(forest.subtree_id, owner);
        for i in 0..xs.len() {
            assert_eq!(forest.subtree_id[i], forest.subtree_id[if i < 10 { 0 } else { 10 }]);
        }
        assert_ne!(forest.subtree_id[0], forest.subtree_id[10]);
    }

    #[test]
    fn one_granule_is_whole_tree() {
        let tree = tree_1d(&two_clusters(), 20.0);
        let forest = split_forest(&tree, 1).unwrap();
        assert_eq!(forest.roots, vec![tree.root]);
        assert_eq!(forest.parent, tree.ln);
        assert!(forest.subtree_id.iter().all(|&s| s == 0));
    }

    #[test]
    fn n_granules_are_singletons() {
        let tree = tree_1d(&two_clusters(), 20.0);
        let n = tree.len();
        let forest = split_forest(&tree, n).unwrap();
        assert!(forest.layer.iter().all(|&l| l == 0));
        assert!(forest.subtree_sizes().iter().all(|&s| s == 1));
    }

    #[test]
    fn layers_grow_by_one() {
        let tree = tree_1d(&two_clusters(), 20.0);
        let forest = split_forest(&tree, 3).unwrap();
        let sizes = forest.subtree_sizes();
        assert_eq!(sizes.iter().sum::<usize>(), tree.len());
        for i in 0..tree.len() {
            match forest.parent[i] {
                Some(p) => assert_eq!(forest.layer[i], forest.layer[p] + 1),
                None => assert_eq!(forest.layer[i], 0),
            }
        }
        for (s, &m) in forest.max_layer.iter().enumerate() {
            assert!(m < sizes[s]);
        }
    }

    #[test]
    fn alpha_out_of_range_is_rejected() {
        let tree = tree_1d(&two_clusters(), 20.0);
        for alpha in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(evaluate_objective(&tree, &HSpec::default(), alpha, 5).is_err());
        }
    }

    #[test]
    fn h_family_is_increasing() {
        let specs = [
            HSpec::Linear { slope: 0.1 },
            HSpec::Logarithm { scale: 2.0 },
            HSpec::Power { scale: 1.0, exponent: 0.5 },
            HSpec::Exponential { scale: 1.0, base: 1.01 },
            HSpec::Product { scale: 80.0, base: 1.001 },
        ];
        for h in specs {
            h.validate().unwrap();
            for x in 1..200 {
                assert!(h.eval(x as f64 + 1.0) > h.eval(x as f64), "{h:?}");
            }
        }
        assert!(HSpec::Exponential { scale: 1.0, base: 1.0 }.validate().is_err());
        assert!(HSpec::Linear { slope: -1.0 }.validate().is_err());
    }

    #[test]
    fn forest_dot_has_one_cluster_per_subtree() {
        let tree = tree_1d(&two_clusters(), 20.0);
        let forest = split_forest(&tree, 2).unwrap();
        let dot = forest_to_dot(&tree, &forest);
        assert_eq!(dot.matches("subgraph cluster_").count(), 2);
        assert_eq!(dot.matches("doublecircle").count(), 2);
        assert!(dot.contains("γ="));
    }
}
