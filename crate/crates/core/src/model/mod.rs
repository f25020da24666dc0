//! Parts, joints and articulated objects.
//!
//! Coordinates are object-local meters: x to the right, y up, z toward the
//! viewer. Every `bbox_rest` and joint origin is expressed in this frame with
//! all joints at their lower limit, which is the resting (closed) state.

mod json;
mod validate;

pub use json::{object_from_json, object_to_json, ObjectJsonError};
pub use validate::{normalize_object, validate_graph, validate_object, NormalizeError};

use crate::{Aabb, Vec3};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown part name \"{0}\"")]
pub struct UnknownLabel(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartLabel {
    Base,
    Door,
    Drawer,
    Tray,
    Handle,
    Knob,
}

impl PartLabel {
    pub const ALL: [PartLabel; 6] = [
        PartLabel::Base,
        PartLabel::Door,
        PartLabel::Drawer,
        PartLabel::Tray,
        PartLabel::Handle,
        PartLabel::Knob,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            PartLabel::Base => "base",
            PartLabel::Door => "door",
            PartLabel::Drawer => "drawer",
            PartLabel::Tray => "tray",
            PartLabel::Handle => "handle",
            PartLabel::Knob => "knob",
        }
    }

    /// Handles and knobs: small fixed parts mounted on a door or drawer.
    pub fn is_attachment(self) -> bool {
        matches!(self, PartLabel::Handle | PartLabel::Knob)
    }

    /// Parts that may carry attachments.
    pub fn accepts_attachments(self) -> bool {
        matches!(self, PartLabel::Door | PartLabel::Drawer)
    }

    /// Doors, drawers and trays: the front-face panels placed on the grid.
    pub fn is_panel(self) -> bool {
        matches!(self, PartLabel::Door | PartLabel::Drawer | PartLabel::Tray)
    }
}

impl fmt::Display for PartLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PartLabel {
    type Err = UnknownLabel;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| UnknownLabel(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JointType {
    Fixed,
    Revolute,
    Prismatic,
}

impl JointType {
    pub const ALL: [JointType; 3] = [JointType::Fixed, JointType::Revolute, JointType::Prismatic];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Self> {
        Self::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            JointType::Fixed => "fixed",
            JointType::Revolute => "revolute",
            JointType::Prismatic => "prismatic",
        }
    }

    pub fn is_movable(self) -> bool {
        self != JointType::Fixed
    }
}

impl fmt::Display for JointType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JointType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|j| j.name() == s)
            .ok_or_else(|| format!("unknown joint type \"{s}\""))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Category {
    StorageFurniture,
    Table,
    Refrigerator,
    Dishwasher,
    Oven,
    Washer,
    Microwave,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::StorageFurniture,
        Category::Table,
        Category::Refrigerator,
        Category::Dishwasher,
        Category::Oven,
        Category::Washer,
        Category::Microwave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::StorageFurniture => "Storage Furniture",
            Category::Table => "Table",
            Category::Refrigerator => "Refrigerator",
            Category::Dishwasher => "Dishwasher",
            Category::Oven => "Oven",
            Category::Washer => "Washer",
            Category::Microwave => "Microwave",
        }
    }

    /// "a storage furniture", "an oven", ...
    pub fn with_article(self) -> String {
        let noun = self.name().to_lowercase();
        let article = if noun.starts_with(['a', 'e', 'i', 'o', 'u']) {
            "an"
        } else {
            "a"
        };
        format!("{article} {noun}")
    }

    pub fn allows_trays(self) -> bool {
        self == Category::Microwave
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Category {
    type Err = String;

    /// Accepts the display name case-insensitively, plus snake/kebab forms.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_lowercase().replace(['_', '-'], " ");
        Self::ALL
            .into_iter()
            .find(|c| c.name().to_lowercase() == key)
            .ok_or_else(|| format!("unknown category \"{s}\""))
    }
}

/// Joint to the parent part. `origin` is a point on the motion axis and
/// `range` is in radians (revolute) or meters (prismatic).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointSpec {
    pub joint_type: JointType,
    pub origin: Vec3,
    pub direction: Vec3,
    pub range: [f64; 2],
}

impl JointSpec {
    pub const DEFAULT_DIRECTION: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub fn fixed(origin: Vec3) -> Self {
        JointSpec {
            joint_type: JointType::Fixed,
            origin,
            direction: Self::DEFAULT_DIRECTION,
            range: [0.0, 0.0],
        }
    }

    pub fn revolute(origin: Vec3, direction: Vec3, upper: f64) -> Self {
        JointSpec {
            joint_type: JointType::Revolute,
            origin,
            direction,
            range: [0.0, upper],
        }
    }

    pub fn prismatic(origin: Vec3, direction: Vec3, upper: f64) -> Self {
        JointSpec {
            joint_type: JointType::Prismatic,
            origin,
            direction,
            range: [0.0, upper],
        }
    }

    pub fn lower(&self) -> f64 {
        self.range[0]
    }

    pub fn upper(&self) -> f64 {
        self.range[1]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Part {
    pub id: usize,
    pub label: PartLabel,
    pub bbox_rest: Aabb,
    pub joint: JointSpec,
    pub parent_id: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ArticulatedObject {
    pub category: Category,
    pub description: String,
    pub parts: Vec<Part>,
}

impl ArticulatedObject {
    pub fn part(&self, id: usize) -> Option<&Part> {
        self.parts.get(id).filter(|p| p.id == id)
    }

    pub fn root(&self) -> Option<&Part> {
        self.parts.iter().find(|p| p.parent_id.is_none())
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = &Part> {
        self.parts.iter().filter(move |p| p.parent_id == Some(id))
    }

    /// Union of all rest boxes. `None` for an object without parts.
    pub fn rest_bounds(&self) -> Option<Aabb> {
        let mut it = self.parts.iter().map(|p| p.bbox_rest);
        let first = it.next()?;
        Some(it.fold(first, |u, b| u.union(&b)))
    }

    pub fn count(&self, label: PartLabel) -> usize {
        self.parts.iter().filter(|p| p.label == label).count()
    }

    /// Part ids ordered so every parent precedes its children. Returns
    /// `None` if the parent links do not form a tree over all parts.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.parts.len();
        let mut children = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for (i, p) in self.parts.iter().enumerate() {
            match p.parent_id {
                None => roots.push(i),
                Some(pid) if pid < n && pid != i => children[pid].push(i),
                Some(_) => return None,
            }
        }
        if roots.len() != 1 {
            return None;
        }
        let mut order = Vec::with_capacity(n);
        let mut stack = roots;
        while let Some(i) = stack.pop() {
            order.push(i);
            stack.extend(children[i].iter().rev());
        }
        (order.len() == n).then_some(order)
    }

    pub fn graph(&self) -> ArticulationGraph {
        ArticulationGraph {
            labels: self.parts.iter().map(|p| p.label).collect(),
            edges: self
                .parts
                .iter()
                .filter_map(|p| p.parent_id.map(|pid| (pid, p.id)))
                .collect(),
        }
    }
}

/// Rooted labelled tree of part connectivity; node `i` carries `labels[i]`,
/// edges are `(parent, child)`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ArticulationGraph {
    pub labels: Vec<PartLabel>,
    pub edges: Vec<(usize, usize)>,
}

impl ArticulationGraph {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Parent of every node, `None` for roots. Fails on out-of-range nodes
    /// or a node with two parents.
    pub fn parents(&self) -> Result<Vec<Option<usize>>, String> {
        let n = self.len();
        let mut parent = vec![None; n];
        for &(p, c) in &self.edges {
            if p >= n || c >= n {
                return Err(format!("edge ({p}, {c}) references a missing node"));
            }
            if p == c {
                return Err(format!("node {c} is its own parent"));
            }
            if parent[c].replace(p).is_some() {
                return Err(format!("node {c} has more than one parent"));
            }
        }
        Ok(parent)
    }

    pub fn children_of(&self, node: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter(|&&(p, _)| p == node)
            .map(|&(_, c)| c)
            .collect()
    }

    pub fn root(&self) -> Option<usize> {
        let parents = self.parents().ok()?;
        let mut roots = (0..self.len()).filter(|&i| parents[i].is_none());
        let r = roots.next()?;
        roots.next().is_none().then_some(r)
    }

    /// Single root and every node reachable from it.
    pub fn is_tree(&self) -> bool {
        let Some(root) = self.root() else {
            return false;
        };
        let mut seen = vec![false; self.len()];
        let mut stack = vec![root];
        let mut count = 0;
        while let Some(i) = stack.pop() {
            if std::mem::replace(&mut seen[i], true) {
                return false;
            }
            count += 1;
            stack.extend(self.children_of(i));
        }
        count == self.len()
    }
}
/// Largest absolute difference over every float of two structurally equal
/// objects, or `None` when structure, labels or metadata differ.
pub fn max_float_difference(a: &ArticulatedObject, b: &ArticulatedObject) -> Option<f64> {
    if a.category != b.category || a.description != b.description || a.parts.len() != b.parts.len() {
        return None;
    }
    let mut worst = 0.0f64;
    for (p, q) in a.parts.iter().zip(&b.parts) {
        if p.id != q.id || p.label != q.label || p.parent_id != q.parent_id || p.joint.joint_type != q.joint.joint_type
        {
            return None;
        }
        let fp = [p.bbox_rest.min, p.bbox_rest.max, p.joint.origin, p.joint.direction];
        let fq = [q.bbox_rest.min, q.bbox_rest.max, q.joint.origin, q.joint.direction];
        for (u, v) in fp.iter().zip(&fq) {
            for k in 0..3 {
                worst = worst.max((u[k] - v[k]).abs());
            }
        }
        for k in 0..2 {
            worst = worst.max((p.joint.range[k] - q.joint.range[k]).abs());
        }
    }
    Some(worst)
}

