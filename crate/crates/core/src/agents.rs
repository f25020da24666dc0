//! Client contracts for the four pipeline agents, the graph-tree parser for
//! the graph reasoner's replies, and deterministic offline stand-ins.
//!
//! Wire format for a remote agent: `POST $AGENT_ENDPOINT` with JSON
//! `{"model"?, "system", "user", "images": [base64...]}`, answered by
//! `{"text": "..."}`.

use crate::kinematics::check_plausibility;
use crate::layout::{
    default_base_size, parse_description, Attach, Cells, DescribedGroup, GridLayout, GridPart, HingeSide,
    HorizontalSpan, JointMeta, VerticalBand,
};
use crate::model::{validate_graph, ArticulatedObject, ArticulationGraph, Category, PartLabel};
use crate::violation::{summarize, Violation};
use base64::Engine;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use thiserror::Error;

pub const MAX_FEW_SHOT: usize = 8;

const REPAIR_INSTRUCTION: &str = "Your previous reply could not be parsed. Reply again and end with exactly one \
JSON tree whose single root key is \"base\", where every node is an object with one part-name key mapping to a \
list of child nodes.";

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("{agent} takes {expected} image(s), got {got}")]
    ImageCount { agent: AgentKind, expected: usize, got: usize },
    #[error("at most {MAX_FEW_SHOT} few-shot exemplars, got {0}")]
    TooManyExemplars(usize),
    #[error("cannot read image {path}: {source}")]
    Image { path: PathBuf, source: std::io::Error },
    #[error("missing environment variable {0}")]
    Config(&'static str),
    #[error("agent transport failed: {0}")]
    Transport(String),
    #[error("no JSON found in agent reply")]
    NoJson,
    #[error("root must be base")]
    RootNotBase,
    #[error("unknown part name \"{0}\"")]
    UnknownPartName(String),
    #[error("malformed graph tree: {0}")]
    MalformedTree(String),
    #[error("graph violates structural rules: {}", summarize(.0))]
    Rules(Vec<Violation>),
    #[error("unparseable agent output\n--- first reply ---\n{first}\n--- second reply ---\n{second}")]
    Unparseable { first: String, second: String },
    #[error("non-conforming verdict: {0:?}")]
    NonConformingVerdict(String),
    #[error("cannot parse description")]
    Description,
    #[error("layout: {0}")]
    Layout(#[from] crate::layout::LayoutError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgentKind {
    DescriptionRoller,
    LayoutBuilder,
    VisualFilter,
    GraphReasoner,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] = [
        AgentKind::DescriptionRoller,
        AgentKind::LayoutBuilder,
        AgentKind::VisualFilter,
        AgentKind::GraphReasoner,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::DescriptionRoller => "description_roller",
            AgentKind::LayoutBuilder => "layout_builder",
            AgentKind::VisualFilter => "visual_filter",
            AgentKind::GraphReasoner => "graph_reasoner",
        }
    }

    pub fn system_prompt(self) -> &'static str {
        match self {
            AgentKind::DescriptionRoller => include_str!("../prompts/description_roller.txt"),
            AgentKind::LayoutBuilder => include_str!("../prompts/layout_builder.txt"),
            AgentKind::VisualFilter => include_str!("../prompts/visual_filter.txt"),
            AgentKind::GraphReasoner => include_str!("../prompts/graph_reasoner.txt"),
        }
    }

    /// Images per query: the closed/open pair for the two vision agents.
    pub fn image_count(self) -> usize {
        match self {
            AgentKind::VisualFilter | AgentKind::GraphReasoner => 2,
            AgentKind::DescriptionRoller | AgentKind::LayoutBuilder => 0,
        }
    }
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A dual-state exemplar: closed/open images and the expected JSON tree.
#[derive(Clone, Debug, PartialEq)]
pub struct FewShot {
    pub images: [PathBuf; 2],
    pub answer: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentRequest {
    pub agent: AgentKind,
    pub system_prompt: String,
    pub user_content: String,
    pub image_refs: Vec<PathBuf>,
    pub few_shot: Vec<FewShot>,
}

impl AgentRequest {
    pub fn new(agent: AgentKind, user_content: impl Into<String>, image_refs: Vec<PathBuf>) -> Result<Self, AgentError> {
        if image_refs.len() != agent.image_count() {
            return Err(AgentError::ImageCount {
                agent,
                expected: agent.image_count(),
                got: image_refs.len(),
            });
        }
        Ok(AgentRequest {
            agent,
            system_prompt: agent.system_prompt().to_string(),
            user_content: user_content.into(),
            image_refs,
            few_shot: Vec::new(),
        })
    }

    pub fn with_few_shot(mut self, few_shot: &[FewShot]) -> Result<Self, AgentError> {
        if few_shot.len() > MAX_FEW_SHOT {
            return Err(AgentError::TooManyExemplars(few_shot.len()));
        }
        self.few_shot = few_shot.to_vec();
        Ok(self)
    }

    /// Exemplar images first, then the query pair.
    pub fn all_images(&self) -> Vec<&PathBuf> {
        self.few_shot
            .iter()
            .flat_map(|f| f.images.iter())
            .chain(&self.image_refs)
            .collect()
    }

    /// User text as sent over the wire; exemplars are spelled out because
    /// the transport carries one flat image list.
    pub fn wire_user(&self) -> String {
        if self.few_shot.is_empty() {
            return self.user_content.clone();
        }
        let mut s = String::new();
        for (k, f) in self.few_shot.iter().enumerate() {
            s.push_str(&format!(
                "Example {}: images {} (closed) and {} (open). Expected output:\n{}\n\n",
                k + 1,
                2 * k + 1,
                2 * k + 2,
                f.answer.trim()
            ));
        }
        let n = 2 * self.few_shot.len();
        s.push_str(&format!(
            "Now analyze images {} (closed) and {} (open).\n{}",
            n + 1,
            n + 2,
            self.user_content
        ));
        s
    }

    pub fn wire_json(&self, model: Option<&str>) -> Result<Value, AgentError> {
        let b64 = base64::engine::general_purpose::STANDARD;
        let images = self
            .all_images()
            .into_iter()
            .map(|p| {
                std::fs::read(p)
                    .map(|bytes| Value::String(b64.encode(bytes)))
                    .map_err(|source| AgentError::Image { path: p.clone(), source })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut v = json!({
            "system": self.system_prompt,
            "user": self.wire_user(),
            "images": images,
        });
        if let Some(m) = model {
            v["model"] = Value::String(m.to_string());
        }
        Ok(v)
    }
}

pub trait AgentClient {
    fn complete(&self, request: &AgentRequest) -> Result<String, AgentError>;
}

impl<F> AgentClient for F
where
    F: Fn(&AgentRequest) -> Result<String, AgentError>,
{
    fn complete(&self, request: &AgentRequest) -> Result<String, AgentError> {
        self(request)
    }
}

/// Plays back canned replies in order, repeating the last one.
#[derive(Debug, Default)]
pub struct MockClient {
    replies: Vec<String>,
    calls: AtomicUsize,
}

impl MockClient {
    pub fn new<S: Into<String>>(replies: impl IntoIterator<Item = S>) -> Self {
        MockClient {
            replies: replies.into_iter().map(Into::into).collect(),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl AgentClient for MockClient {
    fn complete(&self, _request: &AgentRequest) -> Result<String, AgentError> {
        let i = self.calls.fetch_add(1, Ordering::SeqCst);
        self.replies
            .get(i.min(self.replies.len().saturating_sub(1)))
            .cloned()
            .ok_or_else(|| AgentError::Transport("mock has no replies".into()))
    }
}

#[derive(Clone, Debug)]
pub struct HttpClient {
    pub endpoint: String,
    pub token: Option<String>,
    pub model: Option<String>,
}

impl HttpClient {
    /// `AGENT_ENDPOINT` is required; `AGENT_TOKEN` and `AGENT_MODEL` are optional.
    pub fn from_env() -> Result<Self, AgentError> {
        let var = |k| std::env::var(k).ok().filter(|v: &String| !v.is_empty());
        Ok(HttpClient {
            endpoint: var("AGENT_ENDPOINT").ok_or(AgentError::Config("AGENT_ENDPOINT"))?,
            token: var("AGENT_TOKEN"),
            model: var("AGENT_MODEL"),
        })
    }
}

impl AgentClient for HttpClient {
    fn complete(&self, request: &AgentRequest) -> Result<String, AgentError> {
        let body = request.wire_json(self.model.as_deref())?;
        let mut req = ureq::post(&self.endpoint);
        if let Some(t) = &self.token {
            req = req.header("Authorization", format!("Bearer {t}"));
        }
        let mut resp = req
            .send_json(&body)
            .map_err(|e| AgentError::Transport(e.to_string()))?;
        let v: Value = resp
            .body_mut()
            .read_json()
            .map_err(|e| AgentError::Transport(e.to_string()))?;
        v.get("text")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| AgentError::Transport("response has no \"text\" field".into()))
    }
}

/// The last fenced code block, else the last balanced top-level `{...}`.
pub fn extract_json(reply: &str) -> Option<&str> {
    last_fence(reply).or_else(|| last_balanced_object(reply))
}

fn last_fence(s: &str) -> Option<&str> {
    let mut last = None;
    let mut rest = s;
    let mut offset = 0;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        // Skip the info string ("json", "python", ...).
        let body_start = after.find('\n').map_or(after.len(), |n| n + 1);
        let body = &after[body_start..];
        let Some(close) = body.find("```") else { break };
        let start = offset + open + 3 + body_start;
        last = Some(&s[start..start + close]);
        let consumed = open + 3 + body_start + close + 3;
        offset += consumed;
        rest = &rest[consumed..];
    }
    last.map(str::trim).filter(|b| !b.is_empty())
}

fn last_balanced_object(s: &str) -> Option<&str> {
    let mut depth = 0usize;
    let mut start = None;
    let mut last = None;
    let (mut in_str, mut escaped) = (false, false);
    for (i, c) in s.char_indices() {
        if in_str {
            match (escaped, c) {
                (true, _) => escaped = false,
                (false, '\\') => escaped = true,
                (false, '"') => in_str = false,
                _ => {}
            }
            continue;
        }
        match c {
            // Quotes only matter inside an object; prose apostrophes and
            // stray quotes outside are ignored.
            '"' if depth > 0 => in_str = true,
            '{' => {
                if depth == 0 {
                    start = Some(i);
                }
                depth += 1;
            }
            '}' if depth > 0 => {
                depth -= 1;
                if depth == 0 {
                    last = start.map(|st| &s[st..=i]);
                }
            }
            _ => {}
        }
    }
    last
}

fn tree_node(v: &Value, graph: &mut ArticulationGraph, parent: Option<usize>) -> Result<(), AgentError> {
    let obj = v
        .as_object()
        .ok_or_else(|| AgentError::MalformedTree(format!("expected an object, found {v}")))?;
    if obj.len() != 1 {
        return Err(AgentError::MalformedTree(format!(
            "each node needs exactly one key, found {}",
            obj.len()
        )));
    }
    let (key, children) = obj.iter().next().expect("one entry");
    let label: PartLabel = key.parse().map_err(|_| AgentError::UnknownPartName(key.clone()))?;
    let children = children
        .as_array()
        .ok_or_else(|| AgentError::MalformedTree(format!("children of \"{key}\" must be a list")))?;
    let id = graph.labels.len();
    graph.labels.push(label);
    if let Some(p) = parent {
        graph.edges.push((p, id));
    }
    children.iter().try_for_each(|c| tree_node(c, graph, Some(id)))
}

/// Strict parse of a nested label tree such as
/// `{"base": [{"door": [{"handle": []}]}]}`. Nodes are numbered depth-first
/// with siblings in document order; the structural rules (except the
/// category-dependent tray rule) must hold.
pub fn parse_graph_tree(text: &str) -> Result<ArticulationGraph, AgentError> {
    parse_graph_tree_for(text, None)
}

/// [`parse_graph_tree`] with the tray rule checked against `category`.
pub fn parse_graph_tree_for(text: &str, category: Option<Category>) -> Result<ArticulationGraph, AgentError> {
    let v: Value = serde_json::from_str(text).map_err(|e| AgentError::MalformedTree(e.to_string()))?;
    let root_is_base = v
        .as_object()
        .is_some_and(|o| o.len() == 1 && o.contains_key(PartLabel::Base.name()));
    if !root_is_base {
        return Err(AgentError::RootNotBase);
    }
    let mut graph = ArticulationGraph {
        labels: Vec::new(),
        edges: Vec::new(),
    };
    tree_node(&v, &mut graph, None)?;
    let violations = validate_graph(&graph, category);
    if violations.is_empty() {
        Ok(graph)
    } else {
        Err(AgentError::Rules(violations))
    }
}

fn tree_value(graph: &ArticulationGraph, node: usize) -> Value {
    let children: Vec<Value> = graph
        .edges
        .iter()
        .filter(|&&(p, _)| p == node)
        .map(|&(_, c)| tree_value(graph, c))
        .collect();
    json!({ graph.labels[node].name(): children })
}

/// Nested-tree JSON for a rooted graph; children appear in edge order.
pub fn graph_tree_json(graph: &ArticulationGraph) -> Option<String> {
    graph.root().map(|r| tree_value(graph, r).to_string())
}

/// Asks the graph reasoner for the connectivity of a closed/open image
/// pair. A reply that fails to parse is retried once with a repair
/// instruction; the second failure is returned.
pub fn reason_graph(
    client: &dyn AgentClient,
    image_pair: [PathBuf; 2],
    few_shot: &[FewShot],
    category: Option<Category>,
) -> Result<ArticulationGraph, AgentError> {
    let user = "Analyze the closed-state and open-state images and output the connectivity graph.";
    let request = AgentRequest::new(AgentKind::GraphReasoner, user, image_pair.to_vec())?.with_few_shot(few_shot)?;
    let attempt = |reply: &str| extract_json(reply).ok_or(AgentError::NoJson).and_then(|j| parse_graph_tree_for(j, category));

    let first = client.complete(&request)?;
    let first_err = match attempt(&first) {
        Ok(g) => return Ok(g),
        Err(e) => e,
    };
    let mut retry = request.clone();
    retry.user_content = format!("{}\n\n{REPAIR_INSTRUCTION}\nParser error: {first_err}", request.user_content);
    let second = client.complete(&retry)?;
    match attempt(&second) {
        Ok(g) => Ok(g),
        Err(e @ AgentError::Rules(_)) => Err(e),
        Err(_) => Err(AgentError::Unparseable { first, second }),
    }
}

/// `true` for a final token "Yes", `false` for "No", case-insensitive and
/// ignoring surrounding punctuation.
pub fn parse_verdict(reply: &str) -> Result<bool, AgentError> {
    let last = reply
        .split_whitespace()
        .last()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_ascii_lowercase());
    match last.as_deref() {
        Some("yes") => Ok(true),
        Some("no") => Ok(false),
        _ => Err(AgentError::NonConformingVerdict(reply.trim().to_string())),
    }
}

pub enum FilterInput<'a> {
    /// Closed/open renders for the remote visual filter.
    Images([PathBuf; 2]),
    /// No renderer available: judge the geometry with the plausibility checks.
    Offline(&'a ArticulatedObject),
}

pub fn filter_object(client: Option<&dyn AgentClient>, input: FilterInput<'_>) -> Result<bool, AgentError> {
    match input {
        FilterInput::Offline(obj) => Ok(check_plausibility(obj).is_empty()),
        FilterInput::Images(pair) => {
            let client = client.ok_or(AgentError::Config("AGENT_ENDPOINT"))?;
            let req = AgentRequest::new(
                AgentKind::VisualFilter,
                "Here are the closed-state and open-state images.",
                pair.to_vec(),
            )?;
            parse_verdict(&client.complete(&req)?)
        }
    }
}

/// Rows and columns per third of the grid, enough for every panel to get
/// its own cell in any region.
fn region_size(n_panels: usize) -> u32 {
    let mut k = 1u32;
    while ((k * k) as usize) < n_panels {
        k += 1;
    }
    k
}

/// Rebuilds a layout from a template description: every panel gets a 1×1
/// cell inside the region its phrase names, attachments share their
/// parent's cell. The seed picks free cells and door hinge sides.
pub fn mock_layout_builder(description: &str, seed: u64) -> Result<GridLayout, AgentError> {
    let (category, groups) = parse_description(description).map_err(|_| AgentError::Description)?;
    let n_panels: usize = groups.iter().map(|g| g.count).sum();
    let k = region_size(n_panels.max(1));
    let grid = [3 * k, 3 * k];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut taken = vec![false; (grid[0] * grid[1]) as usize];
    let mut parts = Vec::new();

    for g in &groups {
        let rows = match g.band {
            VerticalBand::Bottom => 0..k,
            VerticalBand::Middle => k..2 * k,
            VerticalBand::Top => 2 * k..3 * k,
        };
        for member in 0..g.count {
            let thirds: &[u32] = match (g.span, member) {
                (HorizontalSpan::Left, _) => &[0],
                (HorizontalSpan::Right, _) => &[2],
                // One member in each outer third keeps the span symmetric.
                (HorizontalSpan::LeftAndRight, 0) => &[0],
                (HorizontalSpan::LeftAndRight, 1) => &[2],
                (HorizontalSpan::LeftAndRight, _) => &[0, 2],
                // A centered member keeps the group from reading as left/right.
                (HorizontalSpan::Any, 0) => &[1],
                (HorizontalSpan::Any, _) => &[0, 1, 2],
            };
            let free: Vec<(u32, u32)> = thirds
                .iter()
                .flat_map(|&t| (t * k..(t + 1) * k).flat_map(|x| rows.clone().map(move |y| (x, y))))
                .filter(|&(x, y)| !taken[(y * grid[0] + x) as usize])
                .collect();
            let &(x, y) = free
                .choose(&mut rng)
                .ok_or_else(|| AgentError::Layout(crate::layout::LayoutError::CannotPlace("region full".into())))?;
            taken[(y * grid[0] + x) as usize] = true;
            push_panel(&mut parts, g, Cells::new(x, x + 1, y, y + 1), &mut rng);
        }
    }
    Ok(GridLayout {
        category,
        base_size: default_base_size(category),
        grid,
        parts,
    })
}

fn push_panel(parts: &mut Vec<GridPart>, g: &DescribedGroup, cells: Cells, rng: &mut ChaCha8Rng) {
    let joint_meta = match g.label {
        PartLabel::Door => JointMeta::Hinge(HingeSide::ALL[rng.gen_range(0..HingeSide::ALL.len())]),
        _ => JointMeta::SlideOut,
    };
    let idx = parts.len();
    parts.push(GridPart {
        name: g.label,
        cells,
        attach_to: Attach::Base,
        joint_meta,
    });
    let attachments = std::iter::repeat(PartLabel::Handle)
        .take(g.handles)
        .chain(std::iter::repeat(PartLabel::Knob).take(g.knobs));
    for name in attachments {
        parts.push(GridPart {
            name,
            cells,
            attach_to: Attach::Part(idx),
            joint_meta: JointMeta::None,
        });
    }
}
