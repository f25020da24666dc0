//! Grid layouts: the integer front-face occupancy representation produced
//! by the layout builder before any precise coordinates exist.
//!
//! The base front face is divided into `grid = (Gx, Gy)` cells; column 0 is
//! the left edge and row 0 is the bottom. Each [`GridPart`] covers the
//! half-open cell rectangle `[x1, x2) × [y1, y2)`.

mod describe;
mod sample;

pub use describe::{
    describe_layout, layout_groups, parse_description, DescribedGroup, HorizontalSpan, VerticalBand,
};
pub use sample::{default_base_size, sample_layout, sample_layout_with, SamplerConfig};

use crate::model::{ArticulationGraph, Category, PartLabel};
use crate::violation::{Rule, Violation};
use serde_json::{json, Map, Value};
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;
use thiserror::Error;

/// JSON Schema for the layout format, also shipped under `docs/`.
pub const LAYOUT_SCHEMA: &str = include_str!("../../../../docs/layout.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum HingeSide {
    Left,
    Right,
    Top,
    Bottom,
}

impl HingeSide {
    pub const ALL: [HingeSide; 4] = [HingeSide::Left, HingeSide::Right, HingeSide::Top, HingeSide::Bottom];

    pub fn name(self) -> &'static str {
        match self {
            HingeSide::Left => "left",
            HingeSide::Right => "right",
            HingeSide::Top => "top",
            HingeSide::Bottom => "bottom",
        }
    }

    pub fn is_vertical_axis(self) -> bool {
        matches!(self, HingeSide::Left | HingeSide::Right)
    }

    pub fn opposite(self) -> Self {
        match self {
            HingeSide::Left => HingeSide::Right,
            HingeSide::Right => HingeSide::Left,
            HingeSide::Top => HingeSide::Bottom,
            HingeSide::Bottom => HingeSide::Top,
        }
    }
}

impl FromStr for HingeSide {
    type Err = LayoutError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|h| h.name() == s)
            .ok_or_else(|| LayoutError::Invalid(format!("unknown hinge_side \"{s}\"")))
    }
}

/// Articulation hint carried by a grid part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum JointMeta {
    Hinge(HingeSide),
    SlideOut,
    None,
}

impl JointMeta {
    /// The metadata a part of this label must carry.
    pub fn fits(&self, label: PartLabel) -> bool {
        match self {
            JointMeta::Hinge(_) => label == PartLabel::Door,
            JointMeta::SlideOut => matches!(label, PartLabel::Drawer | PartLabel::Tray),
            JointMeta::None => label.is_attachment(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Attach {
    Base,
    Part(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Cells {
    pub x1: u32,
    pub x2: u32,
    pub y1: u32,
    pub y2: u32,
}

impl Cells {
    pub const fn new(x1: u32, x2: u32, y1: u32, y2: u32) -> Self {
        Cells { x1, x2, y1, y2 }
    }

    pub fn width(&self) -> u32 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> u32 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> u32 {
        self.width() * self.height()
    }

    pub fn overlaps(&self, o: &Cells) -> bool {
        self.x1 < o.x2 && o.x1 < self.x2 && self.y1 < o.y2 && o.y1 < self.y2
    }

    pub fn contains(&self, o: &Cells) -> bool {
        self.x1 <= o.x1 && o.x2 <= self.x2 && self.y1 <= o.y1 && o.y2 <= self.y2
    }

    pub fn fits_grid(&self, grid: [u32; 2]) -> bool {
        self.x1 < self.x2 && self.x2 <= grid[0] && self.y1 < self.y2 && self.y2 <= grid[1]
    }

    /// Centroid as a fraction of the grid, `(x, y)` in `[0, 1]`.
    pub fn centroid_frac(&self, grid: [u32; 2]) -> (f64, f64) {
        (
            f64::from(self.x1 + self.x2) / (2.0 * f64::from(grid[0])),
            f64::from(self.y1 + self.y2) / (2.0 * f64::from(grid[1])),
        )
    }
}

impl fmt::Display for Cells {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.x1, self.x2, self.y1, self.y2)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridPart {
    pub name: PartLabel,
    pub cells: Cells,
    pub attach_to: Attach,
    pub joint_meta: JointMeta,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridLayout {
    pub category: Category,
    /// Base shell size `(W, H, D)` in meters.
    pub base_size: [f64; 3],
    pub grid: [u32; 2],
    pub parts: Vec<GridPart>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Complexity {
    Simple,
    Mid,
    Complex,
}

impl Complexity {
    pub const ALL: [Complexity; 3] = [Complexity::Simple, Complexity::Mid, Complexity::Complex];

    /// Largest non-base part count the sampler will draw for `Complex`.
    pub const COMPLEX_MAX: usize = 36;

    pub fn name(self) -> &'static str {
        match self {
            Complexity::Simple => "simple",
            Complexity::Mid => "mid",
            Complexity::Complex => "complex",
        }
    }

    /// Allowed count of non-base parts.
    pub fn budget(self) -> RangeInclusive<usize> {
        match self {
            Complexity::Simple => 1..=5,
            Complexity::Mid => 6..=10,
            Complexity::Complex => 11..=usize::MAX,
        }
    }

    pub fn default_grid(self) -> [u32; 2] {
        match self {
            Complexity::Simple | Complexity::Mid => [4, 6],
            Complexity::Complex => [6, 8],
        }
    }
}

impl fmt::Display for Complexity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Complexity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown complexity \"{s}\""))
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayoutError {
    #[error("malformed layout JSON at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown part name \"{0}\"")]
    UnknownPartName(String),
    #[error("cell extent must be integer (part {part})")]
    NonIntegerCell { part: usize },
    #[error("cell extent out of range (part {part}: {cells} on a {gx}x{gy} grid)")]
    CellOutOfRange { part: usize, cells: String, gx: u32, gy: u32 },
    #[error("missing field \"{0}\"")]
    MissingField(String),
    #[error("{0}")]
    Invalid(String),
    #[error("cannot place parts: {0}")]
    CannotPlace(String),
}

impl GridLayout {
    /// Connectivity with the base as node 0 and grid part `i` as node `i + 1`.
    pub fn graph(&self) -> ArticulationGraph {
        let mut labels = vec![PartLabel::Base];
        labels.extend(self.parts.iter().map(|p| p.name));
        let edges = self
            .parts
            .iter()
            .enumerate()
            .map(|(i, p)| match p.attach_to {
                Attach::Base => (0, i + 1),
                Attach::Part(j) => (j + 1, i + 1),
            })
            .collect();
        ArticulationGraph { labels, edges }
    }

    /// Attachments (handles, knobs) hanging off grid part `i`.
    pub fn attachments_of(&self, i: usize) -> impl Iterator<Item = &GridPart> {
        self.parts
            .iter()
            .filter(move |p| p.name.is_attachment() && p.attach_to == Attach::Part(i))
    }
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value, LayoutError> {
    obj.get(key)
        .ok_or_else(|| LayoutError::MissingField(key.to_string()))
}

fn reject_unknown(obj: &Map<String, Value>, allowed: &[&str], ctx: &str) -> Result<(), LayoutError> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(LayoutError::Invalid(format!("unknown field \"{k}\" in {ctx}"))),
        None => Ok(()),
    }
}

fn positive_f64(v: &Value, what: &str) -> Result<f64, LayoutError> {
    match v.as_f64() {
        Some(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(LayoutError::Invalid(format!("{what} must be a positive number"))),
    }
}

fn parse_cells(v: &Value, part: usize, grid: [u32; 2]) -> Result<Cells, LayoutError> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 4)
        .ok_or_else(|| LayoutError::Invalid(format!("part {part}: cells must be [x1, x2, y1, y2]")))?;
    let mut c = [0i64; 4];
    for (slot, item) in c.iter_mut().zip(arr) {
        *slot = match item {
            Value::Number(n) if n.is_i64() || n.is_u64() => n.as_i64().unwrap_or(i64::MAX),
            Value::Number(n) => match n.as_f64() {
                // 2.0 is still an integer value; 1.5 is not.
                Some(f) if f.fract() == 0.0 && f.abs() < 1e15 => f as i64,
                _ => return Err(LayoutError::NonIntegerCell { part }),
            },
            _ => return Err(LayoutError::NonIntegerCell { part }),
        };
    }
    let out_of_range = || LayoutError::CellOutOfRange {
        part,
        cells: format!("[{}, {}, {}, {}]", c[0], c[1], c[2], c[3]),
        gx: grid[0],
        gy: grid[1],
    };
    if c.iter().any(|&v| v < 0 || v > i64::from(u32::MAX)) {
        return Err(out_of_range());
    }
    let cells = Cells::new(c[0] as u32, c[1] as u32, c[2] as u32, c[3] as u32);
    if !cells.fits_grid(grid) {
        return Err(out_of_range());
    }
    Ok(cells)
}

fn parse_joint_meta(v: &Value, part: usize) -> Result<JointMeta, LayoutError> {
    let obj = match v {
        Value::Null => return Ok(JointMeta::None),
        Value::Object(o) => o,
        _ => {
            return Err(LayoutError::Invalid(format!(
                "part {part}: joint_meta must be an object or null"
            )))
        }
    };
    match (obj.get("hinge_side"), obj.get("slide")) {
        (Some(h), None) if obj.len() == 1 => h
            .as_str()
            .ok_or_else(|| LayoutError::Invalid(format!("part {part}: hinge_side must be a string")))?
            .parse()
            .map(JointMeta::Hinge),
        (None, Some(s)) if obj.len() == 1 => match s.as_str() {
            Some("out") => Ok(JointMeta::SlideOut),
            _ => Err(LayoutError::Invalid(format!("part {part}: slide must be \"out\""))),
        },
        _ => Err(LayoutError::Invalid(format!(
            "part {part}: joint_meta must hold exactly one of hinge_side or slide"
        ))),
    }
}

/// Strict parse of layout JSON.
pub fn parse_layout(text: &str) -> Result<GridLayout, LayoutError> {
    let root: Value = serde_json::from_str(text).map_err(|e| LayoutError::Syntax {
        offset: byte_offset(text, e.line(), e.column()),
        message: e.to_string(),
    })?;
    let obj = root
        .as_object()
        .ok_or_else(|| LayoutError::Invalid("layout must be a JSON object".into()))?;
    reject_unknown(obj, &["category", "base_size", "grid", "parts"], "layout")?;

    let category: Category = field(obj, "category")?
        .as_str()
        .ok_or_else(|| LayoutError::Invalid("category must be a string".into()))?
        .parse()
        .map_err(LayoutError::Invalid)?;

    let size = field(obj, "base_size")?
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| LayoutError::Invalid("base_size must be [W, H, D]".into()))?;
    let base_size = [
        positive_f64(&size[0], "base_size W")?,
        positive_f64(&size[1], "base_size H")?,
        positive_f64(&size[2], "base_size D")?,
    ];

    let g = field(obj, "grid")?
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| LayoutError::Invalid("grid must be [Gx, Gy]".into()))?;
    let dim = |v: &Value| {
        v.as_u64()
            .filter(|&n| n >= 1 && n <= u64::from(u32::MAX))
            .map(|n| n as u32)
            .ok_or_else(|| LayoutError::Invalid("grid dimensions must be positive integers".into()))
    };
    let grid = [dim(&g[0])?, dim(&g[1])?];

    let raw_parts = field(obj, "parts")?
        .as_array()
        .ok_or_else(|| LayoutError::Invalid("parts must be an array".into()))?;
    let mut parts = Vec::with_capacity(raw_parts.len());
    for (i, rp) in raw_parts.iter().enumerate() {
        let po = rp
            .as_object()
            .ok_or_else(|| LayoutError::Invalid(format!("part {i} must be an object")))?;
        reject_unknown(po, &["name", "cells", "attach_to", "joint_meta"], "part")?;
        let name_str = field(po, "name")?
            .as_str()
            .ok_or_else(|| LayoutError::Invalid(format!("part {i}: name must be a string")))?;
        let name: PartLabel = name_str
            .parse()
            .ok()
            .filter(|l: &PartLabel| *l != PartLabel::Base)
            .ok_or_else(|| LayoutError::UnknownPartName(name_str.to_string()))?;
        let cells = parse_cells(field(po, "cells")?, i, grid)?;
        let attach_to = match field(po, "attach_to")? {
            Value::String(s) if s == "base" => Attach::Base,
            Value::Number(n) => match n.as_u64() {
                Some(j) if (j as usize) < raw_parts.len() && j as usize != i => Attach::Part(j as usize),
                _ => {
                    return Err(LayoutError::Invalid(format!(
                        "part {i}: attach_to must be \"base\" or the index of another part"
                    )))
                }
            },
            _ => {
                return Err(LayoutError::Invalid(format!(
                    "part {i}: attach_to must be \"base\" or a part index"
                )))
            }
        };
        let joint_meta = parse_joint_meta(field(po, "joint_meta")?, i)?;
        parts.push(GridPart {
            name,
            cells,
            attach_to,
            joint_meta,
        });
    }
    Ok(GridLayout {
        category,
        base_size,
        grid,
        parts,
    })
}

pub fn layout_to_value(layout: &GridLayout) -> Value {
    let parts: Vec<Value> = layout
        .parts
        .iter()
        .map(|p| {
            let attach = match p.attach_to {
                Attach::Base => json!("base"),
                Attach::Part(j) => json!(j),
            };
            let meta = match p.joint_meta {
                JointMeta::Hinge(h) => json!({ "hinge_side": h.name() }),
                JointMeta::SlideOut => json!({ "slide": "out" }),
                JointMeta::None => Value::Null,
            };
            let c = p.cells;
            json!({
                "name": p.name.name(),
                "cells": [c.x1, c.x2, c.y1, c.y2],
                "attach_to": attach,
                "joint_meta": meta,
            })
        })
        .collect();
    json!({
        "category": layout.category.name(),
        "base_size": layout.base_size,
        "grid": layout.grid,
        "parts": parts,
    })
}

pub fn layout_to_json(layout: &GridLayout) -> String {
    serde_json::to_string_pretty(&layout_to_value(layout)).expect("layout serializes")
}

/// Object rules lifted to the grid, plus `L1` (no overlapping panels on the
/// base) and `L2` (attachments inside their parent's cells).
pub fn validate_layout(layout: &GridLayout) -> Vec<Violation> {
    let mut out = crate::model::validate_graph(&layout.graph(), Some(layout.category));

    for (i, p) in layout.parts.iter().enumerate() {
        if !p.cells.fits_grid(layout.grid) {
            out.push(Violation::new(
                Rule::Invariant,
                format!("part {i}: cells {} outside the grid", p.cells),
            ));
        }
        if !p.joint_meta.fits(p.name) {
            out.push(Violation::new(
                Rule::Invariant,
                format!("part {i}: inconsistent joint metadata for a {}", p.name),
            ));
        }
    }

    let panels: Vec<(usize, &GridPart)> = layout
        .parts
        .iter()
        .enumerate()
        .filter(|(_, p)| p.name.is_panel() && p.attach_to == Attach::Base)
        .collect();
    for (a, (i, pi)) in panels.iter().enumerate() {
        for (j, pj) in &panels[a + 1..] {
            if pi.cells.overlaps(&pj.cells) {
                out.push(Violation::new(
                    Rule::L1,
                    format!("{} {i} {} overlaps {} {j} {}", pi.name, pi.cells, pj.name, pj.cells),
                ));
            }
        }
    }

    for (i, p) in layout.parts.iter().enumerate() {
        if let (true, Attach::Part(j)) = (p.name.is_attachment(), p.attach_to) {
            let parent = &layout.parts[j];
            if !parent.cells.contains(&p.cells) {
                out.push(Violation::new(
                    Rule::L2,
                    format!(
                        "{} {i} {} lies outside its parent {} {j} {}",
                        p.name, p.cells, parent.name, parent.cells
                    ),
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE_LAYOUT: &str = r#"{
        "category": "Storage Furniture",
        "base_size": [1.5, 1.0, 0.5],
        "grid": [4, 4],
        "parts": [
            {"name": "door", "cells": [0, 2, 0, 4], "attach_to": "base", "joint_meta": {"hinge_side": "left"}}
        ]
    }"#;

    fn with_part(part: &str) -> String {
        SAMPLE_LAYOUT.replace(
            r#"{"name": "door", "cells": [0, 2, 0, 4], "attach_to": "base", "joint_meta": {"hinge_side": "left"}}"#,
            part,
        )
    }

    #[test]
    fn parses_single_door() {
        let l = parse_layout(SAMPLE_LAYOUT).unwrap();
        assert_eq!(l.grid, [4, 4]);
        assert_eq!(l.parts.len(), 1);
        assert_eq!(l.parts[0].cells, Cells::new(0, 2, 0, 4));
        assert_eq!(l.parts[0].joint_meta, JointMeta::Hinge(HingeSide::Left));
        assert!(validate_layout(&l).is_empty());
    }

    #[test]
    fn unknown_name_rejected() {
        let t = with_part(r#"{"name": "shelf", "cells": [0, 2, 0, 4], "attach_to": "base", "joint_meta": null}"#);
        let e = parse_layout(&t).unwrap_err();
        assert_eq!(e, LayoutError::UnknownPartName("shelf".into()));
        assert!(e.to_string().contains("unknown part name"));
        let t = with_part(r#"{"name": "base", "cells": [0, 2, 0, 4], "attach_to": "base", "joint_meta": null}"#);
        assert!(matches!(parse_layout(&t), Err(LayoutError::UnknownPartName(_))));
    }

    #[test]
    fn fractional_cell_rejected() {
        let t = with_part(r#"{"name": "door", "cells": [1.5, 2, 0, 4], "attach_to": "base", "joint_meta": {"hinge_side": "left"}}"#);
        let e = parse_layout(&t).unwrap_err();
        assert_eq!(e, LayoutError::NonIntegerCell { part: 0 });
        assert!(e.to_string().starts_with("cell extent must be integer"));
        // Integral floats are accepted.
        let t = with_part(r#"{"name": "door", "cells": [1.0, 2, 0, 4], "attach_to": "base", "joint_meta": {"hinge_side": "left"}}"#);
        assert!(parse_layout(&t).is_ok());
    }

    #[test]
    fn out_of_grid_rejected() {
        for cells in ["[0, 5, 0, 4]", "[2, 2, 0, 4]", "[-1, 2, 0, 4]", "[3, 1, 0, 4]"] {
            let t = with_part(&format!(
                r#"{{"name": "door", "cells": {cells}, "attach_to": "base", "joint_meta": {{"hinge_side": "left"}}}}"#
            ));
            let e = parse_layout(&t).unwrap_err();
            assert!(e.to_string().starts_with("cell extent out of range"), "{cells}: {e}");
        }
    }

    #[test]
    fn syntax_error_reports_byte_offset() {
        let text = "{\n  \"category\": \"Table\",\n  \"grid\": [4 4]\n}";
        match parse_layout(text).unwrap_err() {
            LayoutError::Syntax { offset, .. } => {
                assert_eq!(&text[offset..offset + 1], "4", "offset {offset}");
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn missing_and_unknown_fields() {
        let t = SAMPLE_LAYOUT.replace(r#""grid": [4, 4],"#, "");
        assert_eq!(parse_layout(&t).unwrap_err(), LayoutError::MissingField("grid".into()));
        let t = SAMPLE_LAYOUT.replace(r#""grid": [4, 4],"#, r#""grid": [4, 4], "color": "red","#);
        assert!(matches!(parse_layout(&t), Err(LayoutError::Invalid(_))));
    }

    fn layout(parts: Vec<GridPart>) -> GridLayout {
        GridLayout {
            category: Category::StorageFurniture,
            base_size: [1.0, 1.0, 0.5],
            grid: [4, 4],
            parts,
        }
    }

    fn drawer(c: Cells) -> GridPart {
        GridPart {
            name: PartLabel::Drawer,
            cells: c,
            attach_to: Attach::Base,
            joint_meta: JointMeta::SlideOut,
        }
    }

    #[test]
    fn overlapping_drawers_are_l1() {
        let l = layout(vec![drawer(Cells::new(0, 2, 0, 2)), drawer(Cells::new(0, 2, 0, 2))]);
        let v = validate_layout(&l);
        assert_eq!(v.iter().map(|v| v.rule).collect::<Vec<_>>(), vec![Rule::L1]);
    }

    #[test]
    fn detached_handle_is_l2() {
        let door = GridPart {
            name: PartLabel::Door,
            cells: Cells::new(0, 2, 0, 4),
            attach_to: Attach::Base,
            joint_meta: JointMeta::Hinge(HingeSide::Left),
        };
        let handle = GridPart {
            name: PartLabel::Handle,
            cells: Cells::new(3, 4, 0, 1),
            attach_to: Attach::Part(0),
            joint_meta: JointMeta::None,
        };
        let v = validate_layout(&layout(vec![door, handle]));
        assert_eq!(v.iter().map(|v| v.rule).collect::<Vec<_>>(), vec![Rule::L2]);
    }

    #[test]
    fn handle_on_base_and_tray_rules() {
        let handle = GridPart {
            name: PartLabel::Handle,
            cells: Cells::new(0, 1, 0, 1),
            attach_to: Attach::Base,
            joint_meta: JointMeta::None,
        };
        let tray = GridPart {
            name: PartLabel::Tray,
            cells: Cells::new(2, 4, 0, 1),
            attach_to: Attach::Base,
            joint_meta: JointMeta::SlideOut,
        };
        let rules: Vec<Rule> = validate_layout(&layout(vec![handle, tray]))
            .into_iter()
            .map(|v| v.rule)
            .collect();
        assert_eq!(rules, vec![Rule::R2, Rule::R4]);
    }

    #[test]
    fn mismatched_joint_meta_flagged() {
        let mut d = drawer(Cells::new(0, 1, 0, 1));
        d.joint_meta = JointMeta::Hinge(HingeSide::Left);
        let v = validate_layout(&layout(vec![d]));
        assert_eq!(v.len(), 1);
        assert!(v[0].message.contains("inconsistent joint metadata"));
    }

    #[test]
    fn schema_lists_the_parser_fields() {
        let schema: Value = serde_json::from_str(LAYOUT_SCHEMA).unwrap();
        let req = |v: &Value| -> Vec<String> {
            v["required"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
        };
        assert_eq!(req(&schema), ["category", "base_size", "grid", "parts"]);
        assert_eq!(
            req(&schema["$defs"]["part"]),
            ["name", "cells", "attach_to", "joint_meta"]
        );
        let names: Vec<&str> = schema["$defs"]["part"]["properties"]["name"]["enum"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap())
            .collect();
        assert_eq!(names, ["door", "drawer", "tray", "handle", "knob"]);
    }
}
