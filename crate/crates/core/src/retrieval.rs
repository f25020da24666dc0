//! Geometry retrieval: choose a catalog primitive per part by label and
//! aspect similarity, fit it into the part box with an axis-aligned affine
//! map, and export posed meshes as OBJ.
//!
//! Similarity between an entry with extents `e` and a part with extents `p`
//! is `s = Σ_k |ln(ê_k / p̂_k)|`, where `ê = e / max(e)` and `p̂ = p / max(p)`.
//! It is scale-invariant and symmetric; lower is better, ties go to the lower
//! entry id.

use crate::fmt::f6;
use crate::kinematics::{box_triangles, pose_object, sample_triangles, KinematicsError, Pose, PosedPart};
use crate::model::{ArticulatedObject, Part, PartLabel};
use crate::{Aabb, Vec3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("catalog: {0}")]
    Catalog(String),
    #[error("{path}: line {line}: {message}")]
    Obj {
        path: String,
        line: usize,
        message: String,
    },
    #[error("zero extent on axis {0}")]
    ZeroExtent(usize),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RetrievalError + '_ {
    move |source| RetrievalError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Polygon mesh with 0-based face indices.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Vec3>,
    pub faces: Vec<Vec<usize>>,
}

impl Mesh {
    pub fn bounds(&self) -> Option<Aabb> {
        (!self.vertices.is_empty()).then(|| Aabb::from_points(self.vertices.iter().copied()))
    }

    /// Fan triangulation of every face.
    pub fn triangles(&self) -> Vec<[Vec3; 3]> {
        self.faces
            .iter()
            .flat_map(|f| {
                (1..f.len().saturating_sub(1))
                    .map(move |k| [self.vertices[f[0]], self.vertices[f[k]], self.vertices[f[k + 1]]])
            })
            .collect()
    }

    /// Parses `v` and `f` records; texture/normal indices (`f 1/2/3`) and
    /// other record types are ignored. Negative indices are relative.
    pub fn parse_obj(text: &str, name: &str) -> Result<Mesh, RetrievalError> {
        let mut mesh = Mesh::default();
        for (ln, line) in text.lines().enumerate() {
            let err = |message: String| RetrievalError::Obj {
                path: name.to_string(),
                line: ln + 1,
                message,
            };
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let c: Vec<f64> = it
                        .take(3)
                        .map(str::parse)
                        .collect::<Result<_, _>>()
                        .map_err(|e| err(format!("bad vertex: {e}")))?;
                    let c: [f64; 3] = c.try_into().map_err(|_| err("vertex needs 3 coordinates".into()))?;
                    mesh.vertices.push(Vec3::from(c));
                }
                Some("f") => {
                    let n = mesh.vertices.len() as i64;
                    let mut face = Vec::new();
                    for tok in it {
                        let idx: i64 = tok
                            .split('/')
                            .next()
                            .unwrap_or("")
                            .parse()
                            .map_err(|_| err(format!("bad face index {tok:?}")))?;
                        let i = if idx < 0 { n + idx } else { idx - 1 };
                        if i < 0 || i >= n {
                            return Err(err(format!("face index {idx} out of range")));
                        }
                        face.push(i as usize);
                    }
                    if face.len() < 3 {
                        return Err(err("face needs 3 vertices".into()));
                    }
                    mesh.faces.push(face);
                }
                _ => {}
            }
        }
        Ok(mesh)
    }

    pub fn load_obj(path: &Path) -> Result<Mesh, RetrievalError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Mesh::parse_obj(&text, &path.display().to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogEntry {
    pub id: usize,
    pub label: PartLabel,
    /// Extents of the primitive's canonical box.
    pub extents: [f64; 3],
    /// Mesh file, relative to the catalog file. Empty means a plain box.
    #[serde(default)]
    pub mesh_path: String,
    #[serde(skip)]
    pub mesh: Option<Mesh>,
}

impl CatalogEntry {
    /// The canonical box: the loaded mesh's bounds, else a box of `extents`
    /// centered at the origin.
    pub fn canonical_box(&self) -> Aabb {
        self.mesh.as_ref().and_then(Mesh::bounds).unwrap_or_else(|| {
            let h = Vec3::from(self.extents) * 0.5;
            Aabb::new(-h, h)
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalog {
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    /// Parses and checks catalog JSON without loading meshes.
    pub fn from_json(text: &str) -> Result<Catalog, RetrievalError> {
        let cat: Catalog = serde_json::from_str(text).map_err(|e| RetrievalError::Catalog(e.to_string()))?;
        for e in &cat.entries {
            if !e.extents.iter().all(|&v| v > 0.0 && v.is_finite()) {
                return Err(RetrievalError::Catalog(format!("entry {}: extents must be positive", e.id)));
            }
        }
        Ok(cat)
    }

    /// Reads the catalog and every referenced mesh.
    pub fn load(path: &Path) -> Result<Catalog, RetrievalError> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        let mut cat = Catalog::from_json(&text)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        for e in &mut cat.entries {
            if !e.mesh_path.is_empty() {
                e.mesh = Some(Mesh::load_obj(&dir.join(&e.mesh_path))?);
            }
        }
        Ok(cat)
    }

    /// The small primitive catalog shipped with the crate.
    pub fn builtin() -> Catalog {
        const MESHES: [(&str, &str); 3] = [
            ("bar_handle.obj", include_str!("../catalog/bar_handle.obj")),
            ("flat_pull.obj", include_str!("../catalog/flat_pull.obj")),
            ("round_knob.obj", include_str!("../catalog/round_knob.obj")),
        ];
        let mut cat = Catalog::from_json(include_str!("../catalog/catalog.json")).expect("builtin catalog");
        for e in &mut cat.entries {
            if let Some((name, text)) = MESHES.iter().find(|(n, _)| *n == e.mesh_path) {
                e.mesh = Some(Mesh::parse_obj(text, name).expect("builtin mesh"));
            }
        }
        cat
    }

    pub fn entry(&self, id: usize) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.id == id)
    }
}

fn max_normalized(v: Vec3) -> Vec3 {
    let m = v[0].max(v[1]).max(v[2]);
    v * (1.0 / m)
}

/// Aspect dissimilarity `s` between two extent vectors.
pub fn aspect_score(entry: Vec3, part: Vec3) -> f64 {
    let (e, p) = (max_normalized(entry), max_normalized(part));
    let s: f64 = (0..3).map(|k| (e[k] / p[k]).ln().abs()).sum();
    if s.is_nan() {
        f64::INFINITY
    } else {
        s
    }
}

/// Best entry id for the part, or `None` when no entry has its label.
pub fn retrieve_primitive(catalog: &Catalog, part: &Part) -> Option<usize> {
    let p = part.bbox_rest.extents();
    catalog
        .entries
        .iter()
        .filter(|e| e.label == part.label)
        .map(|e| (aspect_score(Vec3::from(e.extents), p), e.id))
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .map(|(_, id)| id)
}

/// `p ↦ scale ⊙ p + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisAffine {
    pub scale: Vec3,
    pub translation: Vec3,
}

impl AxisAffine {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        p.zip(self.scale, |a, s| a * s) + self.translation
    }
}

/// Per-axis map of `entry_box` onto the part's rest box.
pub fn fit_mesh(entry_box: &Aabb, part: &Part) -> Result<AxisAffine, RetrievalError> {
    let (src, dst) = (entry_box.extents(), part.bbox_rest.extents());
    if let Some(k) = (0..3).find(|&k| !(src[k] > 0.0)) {
        return Err(RetrievalError::ZeroExtent(k));
    }
    let scale = dst.zip(src, |d, s| d / s);
    let translation = part.bbox_rest.min - entry_box.min.zip(scale, |m, s| m * s);
    Ok(AxisAffine { scale, translation })
}

/// Rest-frame geometry of one part: the fitted catalog mesh when one is
/// retrieved and loaded, else its box.
fn part_mesh(part: &Part, catalog: Option<&Catalog>) -> Mesh {
    let fitted = catalog.and_then(|c| {
        let entry = c.entry(retrieve_primitive(c, part)?)?;
        let mesh = entry.mesh.as_ref()?;
        let fit = fit_mesh(&entry.canonical_box(), part).ok()?;
        Some(Mesh {
            vertices: mesh.vertices.iter().map(|v| fit.apply(v)).collect(),
            faces: mesh.faces.clone(),
        })
    });
    fitted.unwrap_or_else(|| Mesh {
        vertices: part.bbox_rest.corners().to_vec(),
        // Outward-facing quads over the corner bit order (x=1, y=2, z=4).
        faces: vec![
            vec![0, 4, 6, 2],
            vec![1, 3, 7, 5],
            vec![0, 1, 5, 4],
            vec![2, 6, 7, 3],
            vec![0, 2, 3, 1],
            vec![4, 5, 7, 6],
        ],
    })
}

fn posed_meshes(obj: &ArticulatedObject, posed: &[PosedPart], catalog: Option<&Catalog>) -> Vec<Mesh> {
    obj.parts
        .iter()
        .zip(posed)
        .map(|(p, pp)| {
            let mut m = part_mesh(p, catalog);
            for v in &mut m.vertices {
                *v = pp.frame.apply(v);
            }
            m
        })
        .collect()
}

/// OBJ text with one `g <label>_<id>` group per part, posed by `pose`.
pub fn object_mesh_obj(
    obj: &ArticulatedObject,
    pose: &Pose,
    catalog: Option<&Catalog>,
) -> Result<String, RetrievalError> {
    let posed = pose_object(obj, pose)?;
    let mut s = String::new();
    let mut base = 1;
    for (p, m) in obj.parts.iter().zip(posed_meshes(obj, &posed, catalog)) {
        let _ = writeln!(s, "g {}_{}", p.label.name(), p.id);
        for v in &m.vertices {
            let _ = writeln!(s, "v {} {} {}", f6(v[0]), f6(v[1]), f6(v[2]));
        }
        for f in &m.faces {
            s.push('f');
            for i in f {
                let _ = write!(s, " {}", i + base);
            }
            s.push('\n');
        }
        base += m.vertices.len();
    }
    Ok(s)
}

pub fn export_object_mesh(
    obj: &ArticulatedObject,
    pose: &Pose,
    catalog: Option<&Catalog>,
    path: &Path,
) -> Result<(), RetrievalError> {
    let text = object_mesh_obj(obj, pose, catalog)?;
    std::fs::write(path, text).map_err(io_err(path))
}

/// `n_per_part` surface samples per posed part, on fitted catalog meshes
/// where available and boxes otherwise.
pub fn sample_object_points(
    obj: &ArticulatedObject,
    posed: &[PosedPart],
    catalog: Option<&Catalog>,
    n_per_part: usize,
    seed: u64,
) -> Vec<Vec3> {
    if catalog.is_none() {
        return crate::kinematics::sample_surface_points(posed, n_per_part, seed);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    posed_meshes(obj, posed, catalog)
        .iter()
        .zip(posed)
        .flat_map(|(m, pp)| {
            let tris = if m.vertices.len() == 8 && m.faces.len() == 6 {
                box_triangles(&pp.corners)
            } else {
                m.triangles()
            };
            sample_triangles(&tris, n_per_part, &mut rng)
        })
        .collect()
}
