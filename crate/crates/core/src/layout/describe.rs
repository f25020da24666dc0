//! Single-sentence structural descriptions of layouts, and the parser for
//! the same template grammar.
//!
//! A description lists groups of panels that share a label, a vertical band
//! and an attachment signature, e.g. "A storage furniture with two doors on
//! top, each with one handle, and one drawer at the bottom."

use super::{Attach, GridLayout, LayoutError};
use crate::model::{Category, PartLabel};
use regex::Regex;
use std::collections::BTreeMap;
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VerticalBand {
    Top,
    Middle,
    Bottom,
}

impl VerticalBand {
    fn of(y: f64) -> Self {
        if y > 2.0 / 3.0 {
            VerticalBand::Top
        } else if y < 1.0 / 3.0 {
            VerticalBand::Bottom
        } else {
            VerticalBand::Middle
        }
    }
}

/// Horizontal qualifier of a group: `Any` when members are spread out or
/// centered. `LeftAndRight` is only used in the middle band.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HorizontalSpan {
    Any,
    Left,
    Right,
    LeftAndRight,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Column {
    Left,
    Middle,
    Right,
}

impl Column {
    fn of(x: f64) -> Self {
        if x < 1.0 / 3.0 {
            Column::Left
        } else if x > 2.0 / 3.0 {
            Column::Right
        } else {
            Column::Middle
        }
    }
}

/// One phrase of a description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescribedGroup {
    pub label: PartLabel,
    pub count: usize,
    pub band: VerticalBand,
    pub span: HorizontalSpan,
    /// Handles and knobs on each member.
    pub handles: usize,
    pub knobs: usize,
}

const NUMBER_WORDS: [&str; 21] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven", "twelve",
    "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen", "twenty",
];

fn number_word(n: usize) -> String {
    NUMBER_WORDS.get(n).map_or_else(|| n.to_string(), |w| w.to_string())
}

fn parse_number(s: &str) -> Option<usize> {
    NUMBER_WORDS
        .iter()
        .position(|w| *w == s)
        .or_else(|| s.parse().ok())
}

fn noun(label: PartLabel, n: usize) -> String {
    if n == 1 {
        label.name().to_string()
    } else {
        format!("{}s", label.name())
    }
}

fn position_phrase(band: VerticalBand, span: HorizontalSpan) -> &'static str {
    use HorizontalSpan as H;
    use VerticalBand as V;
    match (band, span) {
        (V::Top, H::Any | H::LeftAndRight) => "on top",
        (V::Top, H::Left) => "on the top left",
        (V::Top, H::Right) => "on the top right",
        (V::Middle, H::Any) => "in the middle",
        (V::Middle, H::Left) => "on the left",
        (V::Middle, H::Right) => "on the right",
        (V::Middle, H::LeftAndRight) => "on the left and right sides",
        (V::Bottom, H::Any | H::LeftAndRight) => "at the bottom",
        (V::Bottom, H::Left) => "on the bottom left",
        (V::Bottom, H::Right) => "on the bottom right",
    }
}

const POSITIONS: [(VerticalBand, HorizontalSpan); 10] = {
    use HorizontalSpan as H;
    use VerticalBand as V;
    [
        (V::Top, H::Any),
        (V::Top, H::Left),
        (V::Top, H::Right),
        (V::Middle, H::Any),
        (V::Middle, H::Left),
        (V::Middle, H::Right),
        (V::Middle, H::LeftAndRight),
        (V::Bottom, H::Any),
        (V::Bottom, H::Left),
        (V::Bottom, H::Right),
    ]
};

impl DescribedGroup {
    fn attachment_phrase(&self) -> Option<String> {
        let mut bits = Vec::new();
        if self.handles > 0 {
            bits.push(format!("{} {}", number_word(self.handles), noun(PartLabel::Handle, self.handles)));
        }
        if self.knobs > 0 {
            bits.push(format!("{} {}", number_word(self.knobs), noun(PartLabel::Knob, self.knobs)));
        }
        (!bits.is_empty()).then(|| bits.join(" and "))
    }

    /// True when the phrase ends with ", each with ..." and so needs a comma
    /// before the next conjunction.
    fn has_each_clause(&self) -> bool {
        self.count > 1 && self.attachment_phrase().is_some()
    }

    pub fn phrase(&self) -> String {
        let mut s = format!(
            "{} {} {}",
            number_word(self.count),
            noun(self.label, self.count),
            position_phrase(self.band, self.span)
        );
        if let Some(att) = self.attachment_phrase() {
            if self.count > 1 {
                s.push_str(", each with ");
            } else {
                s.push_str(" with ");
            }
            s.push_str(&att);
        }
        s
    }
}

fn capitalized(s: &str) -> String {
    let mut c = s.chars();
    c.next()
        .map(|f| f.to_uppercase().collect::<String>() + c.as_str())
        .unwrap_or_default()
}

fn sentence(category: Category, groups: &[DescribedGroup]) -> String {
    let head = capitalized(&category.with_article());
    if groups.is_empty() {
        return format!("{head} with no movable parts.");
    }
    let mut body = String::new();
    let n = groups.len();
    for (i, g) in groups.iter().enumerate() {
        if i > 0 {
            let prev = &groups[i - 1];
            let last = i == n - 1;
            let sep = match (n, last) {
                (2, _) if prev.has_each_clause() => ", and ",
                (2, _) => " and ",
                (_, true) => ", and ",
                _ => ", ",
            };
            body.push_str(sep);
        }
        body.push_str(&g.phrase());
    }
    format!("{head} with {body}.")
}

/// Groups the layout's panels into description phrases, ordered top to
/// bottom.
pub fn layout_groups(layout: &GridLayout) -> Vec<DescribedGroup> {
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    struct Key {
        band: VerticalBand,
        label: PartLabel,
        handles: usize,
        knobs: usize,
    }
    let mut groups: BTreeMap<Key, Vec<Column>> = BTreeMap::new();
    for (i, p) in layout.parts.iter().enumerate() {
        if p.name.is_attachment() {
            continue;
        }
        let (cx, cy) = p.cells.centroid_frac(layout.grid);
        let (mut handles, mut knobs) = (0, 0);
        for a in layout.parts.iter().filter(|a| a.attach_to == Attach::Part(i)) {
            match a.name {
                PartLabel::Handle => handles += 1,
                PartLabel::Knob => knobs += 1,
                _ => {}
            }
        }
        let key = Key {
            band: VerticalBand::of(cy),
            label: p.name,
            handles,
            knobs,
        };
        groups.entry(key).or_default().push(Column::of(cx));
    }
    groups
        .into_iter()
        .map(|(k, cols)| {
            let all = |c: Column| cols.iter().all(|&x| x == c);
            let span = if all(Column::Left) {
                HorizontalSpan::Left
            } else if all(Column::Right) {
                HorizontalSpan::Right
            } else if k.band == VerticalBand::Middle && !cols.contains(&Column::Middle) {
                HorizontalSpan::LeftAndRight
            } else {
                HorizontalSpan::Any
            };
            DescribedGroup {
                label: k.label,
                count: cols.len(),
                band: k.band,
                span,
                handles: k.handles,
                knobs: k.knobs,
            }
        })
        .collect()
}

/// Template description naming every panel type with its count and coarse
/// position. Attachments are mentioned per panel; no color or material.
pub fn describe_layout(layout: &GridLayout) -> String {
    sentence(layout.category, &layout_groups(layout))
}

fn group_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        let mut positions: Vec<&str> = POSITIONS
            .iter()
            .map(|&(b, s)| position_phrase(b, s))
            .collect();
        // Longest alternatives first so "on the left and right sides" wins
        // over "on the left".
        positions.sort_by_key(|p| std::cmp::Reverse(p.len()));
        let positions = positions.join("|");
        let att = r"(\w+) (handles?|knobs?)";
        Regex::new(&format!(
            r"(\w+) (doors?|drawers?|trays?) ({positions})(?:,? (?:each )?with {att}(?: and {att})?)?"
        ))
        .expect("static regex")
    })
}

/// Parses a description produced by [`describe_layout`]. Anything outside
/// the template grammar is rejected.
pub fn parse_description(text: &str) -> Result<(Category, Vec<DescribedGroup>), LayoutError> {
    let fail = || LayoutError::Invalid("cannot parse description".into());
    let text = text.trim();
    let category = Category::ALL
        .into_iter()
        .find(|c| text.starts_with(&format!("{} with ", capitalized(&c.with_article()))))
        .ok_or_else(fail)?;

    let mut groups = Vec::new();
    for cap in group_regex().captures_iter(text) {
        let count = parse_number(&cap[1]).filter(|&n| n > 0).ok_or_else(fail)?;
        let label: PartLabel = cap[2].trim_end_matches('s').parse().map_err(|_| fail())?;
        let (band, span) = POSITIONS
            .iter()
            .copied()
            .find(|&(b, s)| position_phrase(b, s) == &cap[3])
            .ok_or_else(fail)?;
        let (mut handles, mut knobs) = (0, 0);
        for (n_idx, kind_idx) in [(4, 5), (6, 7)] {
            if let (Some(n), Some(kind)) = (cap.get(n_idx), cap.get(kind_idx)) {
                let n = parse_number(n.as_str()).ok_or_else(fail)?;
                if kind.as_str().starts_with("handle") {
                    handles += n;
                } else {
                    knobs += n;
                }
            }
        }
        groups.push(DescribedGroup {
            label,
            count,
            band,
            span,
            handles,
            knobs,
        });
    }
    // The sentence must be exactly what the template would produce.
    if sentence(category, &groups) != text {
        return Err(fail());
    }
    Ok((category, groups))
}
