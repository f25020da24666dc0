//! Evaluation metrics between a predicted and a ground-truth object:
//! part matching, `d_gIoU`, `d_cDist`, `d_CD` and graph accuracy, each in the
//! resting (RS) and articulated (AS) state.

mod chamfer;
mod hungarian;

pub use chamfer::{chamfer, chamfer_brute, sq_dist, KdTree};
pub use hungarian::assign;

use crate::geometry::{Aabb, Vec3};
use crate::kinematics::{open_pose, pose_object, sample_surface_points, KinematicsError, Pose, PosedPart};
use crate::model::{ArticulatedObject, ArticulationGraph, PartLabel};
use crate::{normalize_object, Field, Scalar};
use serde::Serialize;
use std::fmt::Write as _;
use thiserror::Error;

/// Extra matching cost for pairing parts with different labels.
pub const LABEL_MISMATCH_COST: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("empty point set")]
    EmptyPointSet,
    #[error("cannot normalize {0} object: degenerate")]
    Degenerate(&'static str),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Matching {
    /// `(pred index, gt index)`, sorted by pred index.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_pred: Vec<usize>,
    pub unmatched_gt: Vec<usize>,
    pub cost: f64,
}

pub fn match_cost(a: (PartLabel, Vec3<f64>), b: (PartLabel, Vec3<f64>)) -> f64 {
    a.1.distance(&b.1) + if a.0 == b.0 { 0.0 } else { LABEL_MISMATCH_COST }
}

/// Optimal assignment between `(label, center)` lists.
pub fn match_parts(pred: &[(PartLabel, Vec3<f64>)], gt: &[(PartLabel, Vec3<f64>)]) -> Matching {
    let cost: Vec<Vec<f64>> = pred.iter().map(|&p| gt.iter().map(|&g| match_cost(p, g)).collect()).collect();
    let pairs = assign(&cost);
    let total = pairs.iter().map(|&(i, j)| cost[i][j]).sum();
    let unmatched = |n: usize, taken: Vec<usize>| (0..n).filter(|i| !taken.contains(i)).collect();
    Matching {
        unmatched_pred: unmatched(pred.len(), pairs.iter().map(|p| p.0).collect()),
        unmatched_gt: unmatched(gt.len(), pairs.iter().map(|p| p.1).collect()),
        pairs,
        cost: total,
    }
}

fn two<T: Field>() -> T {
    T::one() + T::one()
}

fn count<T: Field>(n: usize) -> T {
    (0..n).fold(T::zero(), |a, _| a + T::one())
}

/// `IoU − (|hull| − |union|) / |hull|`, or `None` when the hull has no
/// volume.
pub fn giou<T: Field>(a: &Aabb<T>, b: &Aabb<T>) -> Option<T> {
    let hull = a.union(b).volume();
    if !(hull > T::zero()) {
        return None;
    }
    let inter = a.intersection_volume(b);
    let union = a.volume() + b.volume() - inter;
    let iou = if union > T::zero() { inter / union } else { T::zero() };
    Some(iou - (hull - union) / hull)
}

/// Mean `1 − GIoU` over `max(|pred|, |gt|)` slots; unmatched slots and
/// degenerate pairs count 2.
pub fn d_giou<T: Field>(pred: &[Aabb<T>], gt: &[Aabb<T>], pairs: &[(usize, usize)]) -> T {
    let n = pred.len().max(gt.len());
    if n == 0 {
        return T::zero();
    }
    let mut sum = T::zero();
    for &(i, j) in pairs {
        sum += match giou(&pred[i], &gt[j]) {
            Some(g) => T::one() - g,
            None => two(),
        };
    }
    sum += two::<T>() * count(n - pairs.len());
    sum / count(n)
}

/// Mean center distance over `max(|pred|, |gt|)` slots; unmatched slots
/// count `√3`, the diagonal of the normalized scene.
pub fn d_cdist<T: Scalar>(pred: &[Vec3<T>], gt: &[Vec3<T>], pairs: &[(usize, usize)]) -> T {
    let n = pred.len().max(gt.len());
    if n == 0 {
        return T::zero();
    }
    let mut sum = T::zero();
    for &(i, j) in pairs {
        sum += pred[i].distance(&gt[j]);
    }
    sum += T::lit(3.0).sqrt() * T::from_usize(n - pairs.len()).expect("fits");
    sum / T::from_usize(n).expect("fits")
}

pub fn d_cd<T: Scalar>(pred: &[Vec3<T>], gt: &[Vec3<T>]) -> Result<T, MetricsError> {
    chamfer(pred, gt).ok_or(MetricsError::EmptyPointSet)
}

/// Canonical string of the labeled rooted tree: each node becomes
/// `label(children…)` with children sorted. `None` unless `graph` is a tree.
pub fn canonical_form(graph: &ArticulationGraph) -> Option<String> {
    if !graph.is_tree() {
        return None;
    }
    fn walk(g: &ArticulationGraph, node: usize) -> String {
        let mut kids: Vec<String> = g.children_of(node).into_iter().map(|c| walk(g, c)).collect();
        kids.sort_unstable();
        format!("{}({})", g.labels[node].name(), kids.join(","))
    }
    graph.root().map(|r| walk(graph, r))
}

pub fn graph_accuracy(pred: &ArticulationGraph, gt: &ArticulationGraph) -> bool {
    match (canonical_form(pred), canonical_form(gt)) {
        (Some(a), Some(b)) => a == b,
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalConfig {
    pub as_ratio: f64,
    pub points_per_part: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            as_ratio: 1.0,
            points_per_part: 2048,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub rs_giou: f64,
    pub as_giou: f64,
    pub rs_cdist: f64,
    pub as_cdist: f64,
    pub rs_cd: f64,
    pub as_cd: f64,
    pub graph_correct: bool,
    /// `(pred part id, gt part id)`.
    pub matching: Vec<(usize, usize)>,
}

impl EvalReport {
    pub fn distances(&self) -> [f64; 6] {
        [self.rs_giou, self.as_giou, self.rs_cdist, self.as_cdist, self.rs_cd, self.as_cd]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct StateGeometry {
    hulls: Vec<Aabb<f64>>,
    centers: Vec<Vec3<f64>>,
    points: Vec<Vec3<f64>>,
}

fn state(obj: &ArticulatedObject, pose: &Pose, cfg: &EvalConfig) -> Result<StateGeometry, MetricsError> {
    let posed: Vec<PosedPart> = pose_object(obj, pose)?;
    Ok(StateGeometry {
        hulls: posed.iter().map(PosedPart::hull).collect(),
        centers: posed.iter().map(PosedPart::centroid).collect(),
        points: sample_surface_points(&posed, cfg.points_per_part, cfg.seed),
    })
}

/// Normalizes both objects, matches parts at rest, then scores the rest
/// pose and the ratio-mode open pose with that one matching.
pub fn evaluate(pred: &ArticulatedObject, gt: &ArticulatedObject, cfg: &EvalConfig) -> Result<EvalReport, MetricsError> {
    let (p, _, _) = normalize_object(pred).map_err(|_| MetricsError::Degenerate("predicted"))?;
    let (g, _, _) = normalize_object(gt).map_err(|_| MetricsError::Degenerate("ground-truth"))?;

    let key = |o: &ArticulatedObject| -> Vec<(PartLabel, Vec3<f64>)> {
        o.parts.iter().map(|q| (q.label, q.bbox_rest.center())).collect()
    };
    let m = match_parts(&key(&p), &key(&g));

    let (p_rs, g_rs) = (state(&p, &Pose::rest(&p), cfg)?, state(&g, &Pose::rest(&g), cfg)?);
    let (p_as, g_as) = (
        state(&p, &open_pose(&p, cfg.as_ratio, None), cfg)?,
        state(&g, &open_pose(&g, cfg.as_ratio, None), cfg)?,
    );
    let ids = |o: &ArticulatedObject, i: usize| o.parts[i].id;
    Ok(EvalReport {
        rs_giou: d_giou(&p_rs.hulls, &g_rs.hulls, &m.pairs),
        as_giou: d_giou(&p_as.hulls, &g_as.hulls, &m.pairs),
        rs_cdist: d_cdist(&p_rs.centers, &g_rs.centers, &m.pairs),
        as_cdist: d_cdist(&p_as.centers, &g_as.centers, &m.pairs),
        rs_cd: d_cd(&p_rs.points, &g_rs.points)?,
        as_cd: d_cd(&p_as.points, &g_as.points)?,
        graph_correct: graph_accuracy(&p.graph(), &g.graph()),
        matching: m.pairs.iter().map(|&(i, j)| (ids(&p, i), ids(&g, j))).collect(),
    })
}

pub const CSV_HEADER: &str = "sample,RS-dgIoU,AS-dgIoU,RS-dcDist,AS-dcDist,RS-dCD,AS-dCD,Acc%";

/// One row per sample plus a trailing `mean` row. Acc% is 100 or 0 per
/// sample and the percentage of correct graphs in the mean row.
pub fn reports_to_csv(rows: &[(String, EvalReport)]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    let mut sums = [0.0; 7];
    for (name, r) in rows {
        let acc = if r.graph_correct { 100.0 } else { 0.0 };
        let vals: Vec<f64> = r.distances().into_iter().chain([acc]).collect();
        for (k, v) in vals.iter().enumerate() {
            sums[k] += v;
        }
        let _ = writeln!(s, "{name},{}", join_row(&vals));
    }
    let n = rows.len().max(1) as f64;
    let _ = writeln!(s, "mean,{}", join_row(&sums.map(|v| v / n)));
    s
}

fn join_row(vals: &[f64]) -> String {
    vals.iter().map(|&v| crate::fmt::f6(v)).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    fn bx<T: Field>(min: [T; 3], max: [T; 3]) -> Aabb<T> {
        Aabb::new(Vec3::from(min), Vec3::from(max))
    }

    #[test]
    fn giou_hand_cases_exact() {
        let r = |n: i64, d: i64| Ratio::new(n, d);
        let (z, o) = (r(0, 1), r(1, 1));
        let a = bx([z, z, z], [o, o, o]);
        let b = bx([r(1, 2), z, z], [r(3, 2), o, o]);
        assert_eq!(d_giou(&[a], &[b], &[(0, 0)]), r(2, 3));
        let c = bx([r(2, 1), z, z], [r(3, 1), o, o]);
        assert_eq!(d_giou(&[a], &[c], &[(0, 0)]), r(4, 3));
        assert_eq!(d_giou(&[a], &[a], &[(0, 0)]), z);
        assert_eq!(d_giou(&[a, a], &[a], &[(0, 0)]), o);
    }

    #[test]
    fn cdist_examples() {
        let p: [Vec3<f64>; 2] = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0)];
        let g = [Vec3::new(0.3, 0.4, 0.0)];
        assert!((d_cdist(&p[..1], &g, &[(0, 0)]) - 0.5).abs() < 1e-15);
        let d = d_cdist(&p, &g, &[(0, 0)]);
        assert!((d - (0.5 + 3f64.sqrt()) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn matching_prefers_labels_then_distance() {
        let d = PartLabel::Drawer;
        let pred = [(d, Vec3::new(0.0, 0.0, 0.0)), (d, Vec3::new(0.0, 1.0, 0.0))];
        let gt = [(d, Vec3::new(0.0, 0.9, 0.0)), (d, Vec3::new(0.0, 0.1, 0.0)), (PartLabel::Door, Vec3::zero())];
        let m = match_parts(&pred, &gt);
        assert_eq!(m.pairs, vec![(0, 1), (1, 0)]);
        assert_eq!(m.unmatched_gt, vec![2]);
        assert!(m.unmatched_pred.is_empty());
    }

    #[test]
    fn canonical_forms() {
        use PartLabel::*;
        let g = ArticulationGraph {
            labels: vec![Base, Door, Handle, Drawer],
            edges: vec![(0, 1), (1, 2), (0, 3)],
        };
        let permuted = ArticulationGraph {
            labels: vec![Base, Drawer, Door, Handle],
            edges: vec![(0, 1), (0, 2), (2, 3)],
        };
        let moved = ArticulationGraph {
            labels: vec![Base, Door, Handle, Drawer],
            edges: vec![(0, 1), (0, 2), (0, 3)],
        };
        assert_eq!(canonical_form(&g).unwrap(), "base(door(handle()),drawer())");
        assert!(graph_accuracy(&g, &permuted));
        assert!(!graph_accuracy(&g, &moved));
    }

    #[test]
    fn csv_layout() {
        let r = EvalReport {
            rs_giou: 0.0,
            as_giou: 0.5,
            rs_cdist: 0.0,
            as_cdist: 0.0,
            rs_cd: 0.0,
            as_cd: 0.0,
            graph_correct: true,
            matching: vec![],
        };
        let csv = reports_to_csv(&[("a".into(), r.clone()), ("b".into(), EvalReport { graph_correct: false, ..r })]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[3], "mean,0.000000,0.500000,0.000000,0.000000,0.000000,0.000000,50.000000");
    }
}
