//! Model-facing encodings: the per-part 5×6 matrix, the articulation-graph
//! attention mask, and a reference implementation of the dual-state update
//! `X + CA(X, F_R) + CA(X, CA(F_A, F_R))`.

use crate::model::{ArticulatedObject, ArticulationGraph, JointSpec, JointType, PartLabel};
use crate::{Aabb, Scalar, Vec3};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("object is not normalized: part {part} has a coordinate outside [-0.5, 0.5]")]
    Unnormalized { part: usize },
    #[error("malformed part matrix {part}: {reason}")]
    Malformed { part: usize, reason: &'static str },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Rows: bbox `(min, max)`, label id ×6, joint-type id ×6, joint axis
/// `(origin, direction)`, range `(lo, hi)` ×3.
pub type PartMatrix = [[f64; 6]; 5];

const NORMALIZED_TOL: f64 = 1e-9;

pub fn encode_part(bbox: &Aabb, label: PartLabel, joint: &JointSpec) -> PartMatrix {
    let [lo, hi] = joint.range;
    let (mn, mx, o, d) = (bbox.min.0, bbox.max.0, joint.origin.0, joint.direction.0);
    [
        [mn[0], mn[1], mn[2], mx[0], mx[1], mx[2]],
        [f64::from(label.id()); 6],
        [f64::from(joint.joint_type.id()); 6],
        [o[0], o[1], o[2], d[0], d[1], d[2]],
        [lo, hi, lo, hi, lo, hi],
    ]
}

/// Encodes every part of a normalized object, in part-id order.
pub fn encode_parts(obj: &ArticulatedObject) -> Result<Vec<PartMatrix>, EncodingError> {
    obj.parts
        .iter()
        .map(|p| {
            let b = &p.bbox_rest;
            let inside = b.min.0.iter().chain(&b.max.0).all(|v| v.abs() <= 0.5 + NORMALIZED_TOL);
            if !inside {
                return Err(EncodingError::Unnormalized { part: p.id });
            }
            Ok(encode_part(b, p.label, &p.joint))
        })
        .collect()
}

pub fn decode_part(m: &PartMatrix, part: usize) -> Result<(Aabb, PartLabel, JointSpec), EncodingError> {
    let bad = |reason| EncodingError::Malformed { part, reason };
    let constant = |row: &[f64; 6]| row.iter().all(|&v| v == row[0]);
    if !constant(&m[1]) || !constant(&m[2]) {
        return Err(bad("label/type rows must be constant"));
    }
    if m[4][2..] != [m[4][0], m[4][1], m[4][0], m[4][1]] {
        return Err(bad("range row must repeat (lo, hi)"));
    }
    let id = |v: f64| (v.fract() == 0.0 && (0.0..256.0).contains(&v)).then_some(v as u8);
    let label = id(m[1][0]).and_then(PartLabel::from_id).ok_or_else(|| bad("unknown label id"))?;
    let joint_type = id(m[2][0]).and_then(JointType::from_id).ok_or_else(|| bad("unknown joint type id"))?;
    let r = &m[0];
    let a = &m[3];
    Ok((
        Aabb::new(Vec3::new(r[0], r[1], r[2]), Vec3::new(r[3], r[4], r[5])),
        label,
        JointSpec {
            joint_type,
            origin: Vec3::new(a[0], a[1], a[2]),
            direction: Vec3::new(a[3], a[4], a[5]),
            range: [m[4][0], m[4][1]],
        },
    ))
}

pub fn decode_parts(ms: &[PartMatrix]) -> Result<Vec<(Aabb, PartLabel, JointSpec)>, EncodingError> {
    ms.iter().enumerate().map(|(i, m)| decode_part(m, i)).collect()
}

/// Row-major float32 batch: 8-byte magic `PARTMAT1`, `n_parts` as
/// little-endian u64, then `n_parts × 5 × 6` little-endian f32.
pub const BATCH_MAGIC: &[u8; 8] = b"PARTMAT1";

pub fn write_batch(ms: &[PartMatrix], mut w: impl Write) -> std::io::Result<()> {
    w.write_all(BATCH_MAGIC)?;
    w.write_all(&(ms.len() as u64).to_le_bytes())?;
    for v in ms.iter().flatten().flatten() {
        w.write_all(&(*v as f32).to_le_bytes())?;
    }
    Ok(())
}

/// Inverse of [`write_batch`] up to f32 precision.
pub fn read_batch(bytes: &[u8]) -> Option<Vec<PartMatrix>> {
    let (magic, rest) = bytes.split_at_checked(8)?;
    let (n, data) = rest.split_at_checked(8)?;
    if magic != BATCH_MAGIC {
        return None;
    }
    let n = u64::from_le_bytes(n.try_into().ok()?) as usize;
    if data.len() != n.checked_mul(30 * 4)? {
        return None;
    }
    let vals: Vec<f64> = data
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
        .collect();
    Some(
        vals.chunks_exact(30)
            .map(|c| std::array::from_fn(|r| std::array::from_fn(|k| c[r * 6 + k])))
            .collect(),
    )
}

/// Symmetric 0/1 adjacency with unit diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttentionMask {
    pub n: usize,
    pub data: Vec<u8>,
}

impl AttentionMask {
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.data.chunks(self.n.max(1)).map(<[u8]>::to_vec).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| self.get(i, j) == self.get(j, i)))
    }
}

pub fn graph_to_mask(graph: &ArticulationGraph) -> AttentionMask {
    let n = graph.len();
    let mut data = vec![0u8; n * n];
    for i in 0..n {
        data[i * n + i] = 1;
    }
    for &(a, b) in &graph.edges {
        if a < n && b < n {
            data[a * n + b] = 1;
            data[b * n + a] = 1;
        }
    }
    AttentionMask { n, data }
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        }
    }

    pub fn at(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn matmul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matmul shape");
        let mut out = Self::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                for j in 0..o.cols {
                    out.data[i * o.cols + j] += a * o.at(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.at(i, j);
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "add shape");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(&a, &b)| a + b).collect(),
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// Row-wise softmax with the row maximum subtracted first.
    pub fn softmax_rows(&self) -> Self {
        let mut out = self.clone();
        for r in 0..self.rows {
            let row = &mut out.data[r * self.cols..(r + 1) * self.cols];
            let mx = row.iter().copied().fold(T::neg_infinity(), T::max);
            let mut sum = T::zero();
            for v in row.iter_mut() {
                *v = (*v - mx).exp();
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        out
    }
}

/// Query/key/value projections of one cross-attention call, each `d × d`.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionWeights<T> {
    pub wq: Matrix<T>,
    pub wk: Matrix<T>,
    pub wv: Matrix<T>,
}

impl<T: Scalar> AttentionWeights<T> {
    pub fn identity(d: usize) -> Self {
        AttentionWeights {
            wq: Matrix::identity(d),
            wk: Matrix::identity(d),
            wv: Matrix::identity(d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        AttentionWeights {
            wq: Matrix::zeros(d, d),
            wk: Matrix::zeros(d, d),
            wv: Matrix::zeros(d, d),
        }
    }
}

/// Weights for `[CA(X, F_R), CA(X, ·), CA(F_A, F_R)]` in that order.
pub type Projections<T> = [AttentionWeights<T>; 3];

fn check_weights<T: Scalar>(w: &AttentionWeights<T>, d: usize) -> Result<(), EncodingError> {
    for (name, m) in [("wq", &w.wq), ("wk", &w.wk), ("wv", &w.wv)] {
        if (m.rows, m.cols) != (d, d) {
            return Err(EncodingError::Dimension(format!("{name} is {}x{}, expected {d}x{d}", m.rows, m.cols)));
        }
    }
    Ok(())
}

/// `softmax(Q·Wq·(K·Wk)ᵀ / √d)`.
pub fn attention_weights<T: Scalar>(q: &Matrix<T>, k: &Matrix<T>, w: &AttentionWeights<T>) -> Matrix<T> {
    let d = T::from_usize(q.cols).expect("fits");
    let scores = q.matmul(&w.wq).matmul(&k.matmul(&w.wk).transpose());
    scores.scaled(T::one() / d.sqrt()).softmax_rows()
}

pub fn cross_attention<T: Scalar>(q: &Matrix<T>, k: &Matrix<T>, w: &AttentionWeights<T>) -> Matrix<T> {
    attention_weights(q, k, w).matmul(&k.matmul(&w.wv))
}

fn check_dims<T: Scalar>(
    x: &Matrix<T>,
    f_r: &Matrix<T>,
    f_a: &Matrix<T>,
    p: &Projections<T>,
) -> Result<(), EncodingError> {
    let d = x.cols;
    if d == 0 {
        return Err(EncodingError::Dimension("feature width must be positive".into()));
    }
    if f_r.cols != d || f_a.cols != d {
        return Err(EncodingError::Dimension(format!(
            "X has width {d}, F_R {}, F_A {}",
            f_r.cols, f_a.cols
        )));
    }
    if f_r.rows != f_a.rows || f_r.rows == 0 {
        return Err(EncodingError::Dimension(format!(
            "F_R has {} rows, F_A {}; both must match and be non-empty",
            f_r.rows, f_a.rows
        )));
    }
    p.iter().try_for_each(|w| check_weights(w, d))
}

/// `X + CA(X, F_R) + CA(X, CA(F_A, F_R))`.
pub fn dual_state_update<T: Scalar>(
    x: &Matrix<T>,
    f_r: &Matrix<T>,
    f_a: &Matrix<T>,
    p: &Projections<T>,
) -> Result<Matrix<T>, EncodingError> {
    check_dims(x, f_r, f_a, p)?;
    let ctx = cross_attention(f_a, f_r, &p[2]);
    Ok(x.add(&cross_attention(x, f_r, &p[0])).add(&cross_attention(x, &ctx, &p[1])))
}

/// Analytic Jacobian of [`dual_state_update`] with respect to `X`, as an
/// `(n·d) × (n·d)` matrix indexed `(i·d + c, i'·d + a)` = ∂Y[i][c]/∂X[i'][a].
/// Rows of `X` attend independently, so off-diagonal blocks are zero.
pub fn dual_state_jacobian<T: Scalar>(
    x: &Matrix<T>,
    f_r: &Matrix<T>,
    f_a: &Matrix<T>,
    p: &Projections<T>,
) -> Result<Matrix<T>, EncodingError> {
    check_dims(x, f_r, f_a, p)?;
    let (n, d) = (x.rows, x.cols);
    let ctx = cross_attention(f_a, f_r, &p[2]);
    let mut jac = Matrix::identity(n * d);
    let inv_sqrt_d = T::one() / T::from_usize(d).expect("fits").sqrt();
    for (keys, w) in [(f_r, &p[0]), (&ctx, &p[1])] {
        let probs = attention_weights(x, keys, w);
        let values = keys.matmul(&w.wv);
        // ∂S[i][k]/∂X[i][a] = G[a][k]
        let g = w.wq.matmul(&keys.matmul(&w.wk).transpose()).scaled(inv_sqrt_d);
        let m = keys.rows;
        for i in 0..n {
            let pr = probs.row(i);
            // ∂Y[i][c]/∂S[i][k] = P_k (V[k][c] − Σ_j P_j V[j][c])
            let mean: Vec<T> = (0..d)
                .map(|c| (0..m).fold(T::zero(), |s, j| s + pr[j] * values.at(j, c)))
                .collect();
            for c in 0..d {
                for a in 0..d {
                    let mut v = T::zero();
                    for k in 0..m {
                        v += pr[k] * (values.at(k, c) - mean[c]) * g.at(a, k);
                    }
                    jac.data[(i * d + c) * n * d + i * d + a] += v;
                }
            }
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Part;
    use std::f64::consts::FRAC_PI_2;

    fn door_part() -> Part {
        Part {
            id: 1,
            label: PartLabel::Door,
            bbox_rest: Aabb::new(Vec3::new(-0.5, -0.5, 0.4), Vec3::new(0.0, 0.5, 0.5)),
            joint: JointSpec::revolute(Vec3::new(-0.5, -0.5, 0.5), Vec3::new(0.0, -1.0, 0.0), FRAC_PI_2),
            parent_id: Some(0),
        }
    }

    #[test]
    fn door_rows() {
        let p = door_part();
        let m = encode_part(&p.bbox_rest, p.label, &p.joint);
        assert_eq!(m[1], [1.0; 6]);
        assert_eq!(m[2], [1.0; 6]);
        assert_eq!(m[4], [0.0, FRAC_PI_2, 0.0, FRAC_PI_2, 0.0, FRAC_PI_2]);
        assert_eq!(decode_part(&m, 0).unwrap(), (p.bbox_rest, p.label, p.joint));
        let mut bad = m;
        bad[1][3] = 2.0;
        assert!(decode_part(&bad, 0).is_err());
    }

    #[test]
    fn batch_round_trip() {
        let p = door_part();
        let ms = vec![encode_part(&p.bbox_rest, p.label, &p.joint); 2];
        let mut buf = Vec::new();
        write_batch(&ms, &mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 2 * 30 * 4);
        assert_eq!(&buf[..8], b"PARTMAT1");
        let back = read_batch(&buf).unwrap();
        assert_eq!(back[1][1], [1.0; 6]);
        assert!((back[0][4][1] - FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn masks() {
        use PartLabel::*;
        let chain = ArticulationGraph {
            labels: vec![Base, Door, Handle],
            edges: vec![(0, 1), (1, 2)],
        };
        assert_eq!(graph_to_mask(&chain).rows(), vec![vec![1, 1, 0], vec![1, 1, 1], vec![0, 1, 1]]);
        let single = ArticulationGraph {
            labels: vec![Base],
            edges: vec![],
        };
        assert_eq!(graph_to_mask(&single).rows(), vec![vec![1]]);
    }

    #[test]
    fn single_key_broadcasts() {
        let x: Matrix<f64> = Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5]]);
        let f_r = Matrix::from_rows(&[vec![0.3, 0.7]]);
        let f_a = Matrix::from_rows(&[vec![2.0, -1.0]]);
        let p = [AttentionWeights::identity(2), AttentionWeights::identity(2), AttentionWeights::identity(2)];
        let y = dual_state_update(&x, &f_r, &f_a, &p).unwrap();
        // CA(F_A, F_R) = F_R when there is a single key, so both terms add F_R.
        for i in 0..2 {
            for c in 0..2 {
                assert!((y.at(i, c) - (x.at(i, c) + 2.0 * f_r.at(0, c))).abs() < 1e-15);
            }
        }
        let zeros = [AttentionWeights::zeros(2), AttentionWeights::zeros(2), AttentionWeights::zeros(2)];
        assert_eq!(dual_state_update(&x, &f_r, &f_a, &zeros).unwrap(), x);
        let wide = Matrix::from_rows(&[vec![1.0, 2.0, 3.0]]);
        assert!(dual_state_update(&x, &wide, &f_a, &p).is_err());
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let w = |seed: f64| AttentionWeights {
            wq: Matrix::from_rows(&[vec![0.9, seed, 0.1], vec![-0.4, 1.1, 0.1], vec![0.2, 0.3, 0.1]]),
            wk: Matrix::from_rows(&[vec![1.0, 0.2, -0.3], vec![0.5, -0.7, 0.4], vec![0.1, seed, 0.8]]),
            wv: Matrix::from_rows(&[vec![0.3, -0.2, 0.6], vec![seed, 0.9, 0.0], vec![-0.5, 0.4, 1.2]]),
        };
        let p = [w(0.25), w(-0.6), w(1.3)];
        let x: Matrix<f64> = Matrix::from_rows(&[vec![0.4, -1.2, 0.7], vec![1.5, 0.3, -0.8]]);
        let f_r = Matrix::from_rows(&[vec![0.2, 0.9, -0.4], vec![-1.0, 0.5, 0.6], vec![0.7, -0.3, 1.1]]);
        let f_a = Matrix::from_rows(&[vec![1.2, -0.6, 0.3], vec![0.0, 0.8, -0.9], vec![-0.4, 0.2, 0.5]]);
        let jac = dual_state_jacobian(&x, &f_r, &f_a, &p).unwrap();
        let h = 1e-6;
        for col in 0..6 {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp.data[col] += h;
            xm.data[col] -= h;
            let yp = dual_state_update(&xp, &f_r, &f_a, &p).unwrap();
            let ym = dual_state_update(&xm, &f_r, &f_a, &p).unwrap();
            for row in 0..6 {
                let fd = (yp.data[row] - ym.data[row]) / (2.0 * h);
                assert!((fd - jac.at(row, col)).abs() < 1e-7, "{row},{col}: {fd} vs {}", jac.at(row, col));
            }
        }
    }
}
