//! Seeded procedural layouts: a deterministic stand-in for the description
//! roller and layout builder agents.

use super::{validate_layout, Attach, Cells, Complexity, GridLayout, GridPart, HingeSide, JointMeta, LayoutError};
use crate::model::{Category, PartLabel};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_ROUNDS: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    /// Grid override; `None` uses [`Complexity::default_grid`].
    pub grid: Option<[u32; 2]>,
    /// Upper bound on non-base parts for complex layouts.
    pub complex_max: usize,
    /// Probability that an attachment is a knob rather than a handle.
    pub knob_prob: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            grid: None,
            complex_max: Complexity::COMPLEX_MAX,
            knob_prob: 0.25,
        }
    }
}

/// `(W, H, D)` ranges in meters per category.
fn size_ranges(category: Category) -> [(f64, f64); 3] {
    match category {
        Category::StorageFurniture => [(0.6, 1.6), (0.6, 1.8), (0.35, 0.6)],
        Category::Table => [(0.8, 1.6), (0.65, 0.8), (0.5, 0.8)],
        Category::Refrigerator => [(0.6, 0.9), (1.5, 1.9), (0.6, 0.75)],
        Category::Dishwasher => [(0.55, 0.65), (0.8, 0.9), (0.55, 0.65)],
        Category::Oven => [(0.55, 0.9), (0.5, 0.9), (0.5, 0.65)],
        Category::Washer => [(0.55, 0.7), (0.8, 1.0), (0.5, 0.65)],
        Category::Microwave => [(0.45, 0.65), (0.25, 0.4), (0.3, 0.45)],
    }
}

/// Midpoint of the category's size ranges.
pub fn default_base_size(category: Category) -> [f64; 3] {
    size_ranges(category).map(|(lo, hi)| ((lo + hi) * 50.0).round() / 100.0)
}

pub fn sample_layout(category: Category, complexity: Complexity, seed: u64) -> Result<GridLayout, LayoutError> {
    sample_layout_with(category, complexity, seed, &SamplerConfig::default())
}

/// Draws a layout whose non-base part count lies in the complexity budget
/// and which passes [`validate_layout`]. Up to 64 rejection rounds are tried
/// before giving up.
pub fn sample_layout_with(
    category: Category,
    complexity: Complexity,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<GridLayout, LayoutError> {
    let grid = cfg.grid.unwrap_or(complexity.default_grid());
    if grid[0] == 0 || grid[1] == 0 {
        return Err(LayoutError::Invalid("grid dimensions must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_size = size_ranges(category).map(|(lo, hi)| (rng.gen_range(lo..=hi) * 100.0).round() / 100.0);
    let budget = complexity.budget();
    let hi = (*budget.end()).min(cfg.complex_max.max(*budget.start()));

    for _ in 0..MAX_ROUNDS {
        let target = rng.gen_range(*budget.start()..=hi);
        if let Some(parts) = draw_parts(&mut rng, category, grid, target, cfg) {
            let layout = GridLayout {
                category,
                base_size,
                grid,
                parts,
            };
            if validate_layout(&layout).is_empty() {
                return Ok(layout);
            }
        }
    }
    Err(LayoutError::CannotPlace(format!(
        "no valid {complexity} {category} layout on a {}x{} grid after {MAX_ROUNDS} rounds",
        grid[0], grid[1]
    )))
}

fn draw_parts(
    rng: &mut ChaCha8Rng,
    category: Category,
    grid: [u32; 2],
    target: usize,
    cfg: &SamplerConfig,
) -> Option<Vec<GridPart>> {
    let cells = (grid[0] * grid[1]) as usize;
    // Every panel carries at most two attachments.
    let min_panels = target.div_ceil(3).max(1);
    let max_panels = target.min(cells);
    if min_panels > max_panels {
        return None;
    }
    let panels = rng.gen_range(min_panels..=max_panels);
    let attachments = target - panels;

    let rects = partition(rng, grid, panels)?;
    let labels: Vec<PartLabel> = rects.iter().map(|&r| panel_label(rng, category, r)).collect();
    let mut open: Vec<usize> = (0..panels).filter(|&i| labels[i].accepts_attachments()).collect();
    if attachments > 2 * open.len() {
        return None;
    }
    let mut per_panel = vec![0usize; panels];
    for _ in 0..attachments {
        let k = rng.gen_range(0..open.len());
        let i = open[k];
        per_panel[i] += 1;
        if per_panel[i] == 2 {
            open.swap_remove(k);
        }
    }

    let mut parts = Vec::with_capacity(target);
    for ((rect, label), n_attach) in rects.into_iter().zip(labels).zip(per_panel) {
        let meta = match label {
            PartLabel::Door => JointMeta::Hinge(hinge_side(rng, category, rect)),
            _ => JointMeta::SlideOut,
        };
        let idx = parts.len();
        parts.push(GridPart {
            name: label,
            cells: rect,
            attach_to: Attach::Base,
            joint_meta: meta,
        });
        for k in 0..n_attach {
            let name = if rng.gen_bool(cfg.knob_prob) {
                PartLabel::Knob
            } else {
                PartLabel::Handle
            };
            parts.push(GridPart {
                name,
                cells: attachment_cell(rect, meta, k, n_attach),
                attach_to: Attach::Part(idx),
                joint_meta: JointMeta::None,
            });
        }
    }
    Some(parts)
}

/// Guillotine-splits the grid into exactly `n` rectangles.
fn partition(rng: &mut ChaCha8Rng, grid: [u32; 2], n: usize) -> Option<Vec<Cells>> {
    let mut rects = vec![Cells::new(0, grid[0], 0, grid[1])];
    while rects.len() < n {
        let splittable: Vec<usize> = (0..rects.len())
            .filter(|&i| rects[i].area() > 1)
            .collect();
        if splittable.is_empty() {
            return None;
        }
        let weights: Vec<u32> = splittable.iter().map(|&i| rects[i].area()).collect();
        let total: u32 = weights.iter().sum();
        let mut pick = rng.gen_range(0..total);
        let mut chosen = splittable[0];
        for (&i, &w) in splittable.iter().zip(&weights) {
            if pick < w {
                chosen = i;
                break;
            }
            pick -= w;
        }
        let r = rects.swap_remove(chosen);
        let split_x = match (r.width() > 1, r.height() > 1) {
            (true, true) => rng.gen_bool(f64::from(r.width()) / f64::from(r.width() + r.height())),
            (wide, _) => wide,
        };
        let (a, b) = if split_x {
            let at = rng.gen_range(r.x1 + 1..r.x2);
            (Cells::new(r.x1, at, r.y1, r.y2), Cells::new(at, r.x2, r.y1, r.y2))
        } else {
            let at = rng.gen_range(r.y1 + 1..r.y2);
            (Cells::new(r.x1, r.x2, r.y1, at), Cells::new(r.x1, r.x2, at, r.y2))
        };
        rects.push(a);
        rects.push(b);
    }
    // Top-to-bottom, left-to-right reading order.
    rects.sort_by_key(|c| (std::cmp::Reverse(c.y2), c.x1));
    Some(rects)
}

fn panel_label(rng: &mut ChaCha8Rng, category: Category, r: Cells) -> PartLabel {
    let flat = r.height() == 1 && r.width() >= 2;
    let door_prob = match category {
        Category::Table => 0.15,
        Category::Refrigerator | Category::Dishwasher | Category::Washer => 0.85,
        Category::Oven => 0.7,
        Category::StorageFurniture | Category::Microwave => 0.5,
    };
    let door_prob = if flat { door_prob * 0.4 } else { door_prob };
    if rng.gen_bool(door_prob) {
        PartLabel::Door
    } else if category.allows_trays() {
        PartLabel::Tray
    } else {
        PartLabel::Drawer
    }
}

fn hinge_side(rng: &mut ChaCha8Rng, category: Category, r: Cells) -> HingeSide {
    let horizontal_prob = match category {
        Category::Oven | Category::Dishwasher => 0.8,
        _ if r.width() > r.height() => 0.3,
        _ => 0.05,
    };
    if rng.gen_bool(horizontal_prob) {
        *[HingeSide::Bottom, HingeSide::Bottom, HingeSide::Top].choose(rng).expect("non-empty")
    } else {
        *[HingeSide::Left, HingeSide::Right].choose(rng).expect("non-empty")
    }
}

/// A single cell of the panel near where the hand grips it: the free edge for
/// doors, the middle for drawers and trays.
fn attachment_cell(r: Cells, meta: JointMeta, k: usize, n: usize) -> Cells {
    let mid_x = (r.x1 + r.x2 - 1) / 2;
    let mid_y = (r.y1 + r.y2 - 1) / 2;
    let spread_x = if n == 2 && r.width() > 1 {
        if k == 0 {
            r.x1
        } else {
            r.x2 - 1
        }
    } else {
        mid_x
    };
    let spread_y = if n == 2 && r.height() > 1 {
        if k == 0 {
            r.y2 - 1
        } else {
            r.y1
        }
    } else {
        mid_y
    };
    let (x, y) = match meta {
        JointMeta::Hinge(HingeSide::Left) => (r.x2 - 1, spread_y),
        JointMeta::Hinge(HingeSide::Right) => (r.x1, spread_y),
        JointMeta::Hinge(HingeSide::Top) => (spread_x, r.y1),
        JointMeta::Hinge(HingeSide::Bottom) => (spread_x, r.y2 - 1),
        JointMeta::SlideOut | JointMeta::None => (spread_x, mid_y),
    };
    Cells::new(x, x + 1, y, y + 1)
}
