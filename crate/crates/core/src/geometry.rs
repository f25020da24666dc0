//! Small fixed-size linear algebra: 3-vectors, axis-aligned boxes and rigid
//! transforms. Box algebra only needs a [`Field`], so it also runs on exact
//! rationals; anything involving square roots or angles needs a [`Scalar`].

use crate::scalar::{max_of, min_of, Field, Scalar};
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Vec3<T>(pub [T; 3]);

impl<T: Copy> Vec3<T> {
    pub const fn new(x: T, y: T, z: T) -> Self {
        Vec3([x, y, z])
    }

    pub fn x(&self) -> T {
        self.0[0]
    }

    pub fn y(&self) -> T {
        self.0[1]
    }

    pub fn z(&self) -> T {
        self.0[2]
    }

    pub fn map<U, F: FnMut(T) -> U>(self, mut f: F) -> Vec3<U> {
        Vec3([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }

    pub fn zip<U: Copy, V, F: FnMut(T, U) -> V>(self, other: Vec3<U>, mut f: F) -> Vec3<V> {
        Vec3([
            f(self.0[0], other.0[0]),
            f(self.0[1], other.0[1]),
            f(self.0[2], other.0[2]),
        ])
    }
}

impl<T: Field> Vec3<T> {
    pub fn zero() -> Self {
        Vec3([T::zero(); 3])
    }

    pub fn splat(v: T) -> Self {
        Vec3([v; 3])
    }

    pub fn dot(&self, o: &Self) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    pub fn cross(&self, o: &Self) -> Self {
        let [a0, a1, a2] = self.0;
        let [b0, b1, b2] = o.0;
        Vec3([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])
    }

    pub fn scale(&self, s: T) -> Self {
        self.map(|v| v * s)
    }

    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }
}

impl<T: Scalar> Vec3<T> {
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    pub fn distance(&self, o: &Self) -> T {
        (*self - *o).norm()
    }

    /// Unit vector in the same direction; `None` for (near) zero vectors.
    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm();
        if n <= T::epsilon() {
            None
        } else {
            Some(self.scale(T::one() / n))
        }
    }

    pub fn cast<U: Scalar>(&self) -> Vec3<U> {
        self.map(|v| U::from(v).expect("finite scalar"))
    }
}

impl<T: Field> Add for Vec3<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        self.zip(o, |a, b| a + b)
    }
}

impl<T: Field> Sub for Vec3<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self.zip(o, |a, b| a - b)
    }
}

impl<T: Field + Neg<Output = T>> Neg for Vec3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.map(|v| -v)
    }
}

impl<T: Field> Mul<T> for Vec3<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T> From<[T; 3]> for Vec3<T> {
    fn from(a: [T; 3]) -> Self {
        Vec3(a)
    }
}

impl<T> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        &self.0[i]
    }
}

impl<T> IndexMut<usize> for Vec3<T> {
    fn index_mut(&mut self, i: usize) -> &mut T {
        &mut self.0[i]
    }
}

/// Axis-aligned box, `min[k] <= max[k]` on every axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb<T> {
    pub min: Vec3<T>,
    pub max: Vec3<T>,
}

impl<T: Field> Aabb<T> {
    pub fn new(min: Vec3<T>, max: Vec3<T>) -> Self {
        Aabb { min, max }
    }

    /// Smallest box containing all points. Panics on an empty iterator.
    pub fn from_points<I: IntoIterator<Item = Vec3<T>>>(points: I) -> Self {
        let mut it = points.into_iter();
        let first = it.next().expect("at least one point");
        it.fold(Aabb::new(first, first), |b, p| b.expand_to(&p))
    }

    pub fn is_ordered(&self) -> bool {
        (0..3).all(|k| self.min[k] <= self.max[k])
    }

    pub fn extents(&self) -> Vec3<T> {
        self.max - self.min
    }

    pub fn center(&self) -> Vec3<T> {
        let two = T::one() + T::one();
        self.min.zip(self.max, |a, b| (a + b) / two)
    }

    pub fn volume(&self) -> T {
        let e = self.extents();
        e[0] * e[1] * e[2]
    }

    /// Total area of the six faces.
    pub fn surface_area(&self) -> T {
        let e = self.extents();
        let two = T::one() + T::one();
        two * (e[0] * e[1] + e[1] * e[2] + e[0] * e[2])
    }

    pub fn expand_to(&self, p: &Vec3<T>) -> Self {
        Aabb {
            min: self.min.zip(*p, min_of),
            max: self.max.zip(*p, max_of),
        }
    }

    pub fn union(&self, o: &Self) -> Self {
        Aabb {
            min: self.min.zip(o.min, min_of),
            max: self.max.zip(o.max, max_of),
        }
    }

    /// Overlap box; `None` when the boxes do not touch.
    pub fn intersection(&self, o: &Self) -> Option<Self> {
        let b = Aabb {
            min: self.min.zip(o.min, max_of),
            max: self.max.zip(o.max, min_of),
        };
        b.is_ordered().then_some(b)
    }

    /// Volume of the overlap (zero when disjoint or only touching).
    pub fn intersection_volume(&self, o: &Self) -> T {
        self.intersection(o).map_or(T::zero(), |b| b.volume())
    }

    pub fn contains_point(&self, p: &Vec3<T>, tol: T) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] - tol && p[k] <= self.max[k] + tol)
    }

    pub fn contains_box(&self, o: &Self, tol: T) -> bool {
        self.contains_point(&o.min, tol) && self.contains_point(&o.max, tol)
    }

    pub fn inflate(&self, by: T) -> Self {
        Aabb {
            min: self.min - Vec3::splat(by),
            max: self.max + Vec3::splat(by),
        }
    }

    pub fn translate(&self, t: &Vec3<T>) -> Self {
        Aabb {
            min: self.min + *t,
            max: self.max + *t,
        }
    }

    /// Corners in binary order: bit 0 selects x max, bit 1 y max, bit 2 z max.
    pub fn corners(&self) -> [Vec3<T>; 8] {
        std::array::from_fn(|i| {
            Vec3([
                if i & 1 == 0 { self.min[0] } else { self.max[0] },
                if i & 2 == 0 { self.min[1] } else { self.max[1] },
                if i & 4 == 0 { self.min[2] } else { self.max[2] },
            ])
        })
    }
}

impl<T: Scalar> Aabb<T> {
    pub fn cast<U: Scalar>(&self) -> Aabb<U> {
        Aabb {
            min: self.min.cast(),
            max: self.max.cast(),
        }
    }
}

/// The 12 edges of a box as corner-index pairs (see [`Aabb::corners`]).
pub const BOX_EDGES: [(usize, usize); 12] = [
    (0, 1),
    (2, 3),
    (4, 5),
    (6, 7),
    (0, 2),
    (1, 3),
    (4, 6),
    (5, 7),
    (0, 4),
    (1, 5),
    (2, 6),
    (3, 7),
];

/// Row-major 3x3 matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat3<T>(pub [[T; 3]; 3]);

impl<T: Scalar> Mat3<T> {
    pub fn identity() -> Self {
        let (o, z) = (T::one(), T::zero());
        Mat3([[o, z, z], [z, o, z], [z, z, o]])
    }

    /// Right-handed rotation by `angle` about the unit vector `axis`.
    pub fn rotation(axis: &Vec3<T>, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let t = T::one() - c;
        let [x, y, z] = axis.0;
        Mat3([
            [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
            [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
            [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
        ])
    }

    pub fn mul_vec(&self, v: &Vec3<T>) -> Vec3<T> {
        let m = &self.0;
        Vec3(std::array::from_fn(|r| {
            m[r][0] * v[0] + m[r][1] * v[1] + m[r][2] * v[2]
        }))
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let (a, b) = (&self.0, &o.0);
        Mat3(std::array::from_fn(|r| {
            std::array::from_fn(|c| a[r][0] * b[0][c] + a[r][1] * b[1][c] + a[r][2] * b[2][c])
        }))
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3(std::array::from_fn(|r| std::array::from_fn(|c| m[c][r])))
    }

    pub fn determinant(&self) -> T {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    /// `R Rᵀ = I` and `det R = +1`, both within `tol`.
    pub fn is_rotation(&self, tol: T) -> bool {
        let p = self.mul_mat(&self.transpose());
        let id = Self::identity();
        let ortho = (0..3).all(|r| (0..3).all(|c| (p.0[r][c] - id.0[r][c]).abs() <= tol));
        ortho && (self.determinant() - T::one()).abs() <= tol
    }
}

/// `p ↦ rotation · p + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RigidTransform<T> {
    pub rotation: Mat3<T>,
    pub translation: Vec3<T>,
}

impl<T: Scalar> RigidTransform<T> {
    pub fn identity() -> Self {
        RigidTransform {
            rotation: Mat3::identity(),
            translation: Vec3::zero(),
        }
    }

    pub fn translation(t: Vec3<T>) -> Self {
        RigidTransform {
            rotation: Mat3::identity(),
            translation: t,
        }
    }

    /// Rotation by `angle` about the line through `point` along unit `axis`.
    pub fn rotation_about_line(point: &Vec3<T>, axis: &Vec3<T>, angle: T) -> Self {
        let rotation = Mat3::rotation(axis, angle);
        let translation = *point - rotation.mul_vec(point);
        RigidTransform {
            rotation,
            translation,
        }
    }

    pub fn apply(&self, p: &Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(p) + self.translation
    }

    pub fn apply_vector(&self, v: &Vec3<T>) -> Vec3<T> {
        self.rotation.mul_vec(v)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Self) -> Self {
        RigidTransform {
            rotation: self.rotation.mul_mat(&inner.rotation),
            translation: self.apply(&inner.translation),
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        RigidTransform {
            rotation: rt,
            translation: -rt.mul_vec(&self.translation),
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn quarter_turn_about_z() {
        let t = RigidTransform::rotation_about_line(
            &Vec3::zero(),
            &Vec3::new(0.0, 0.0, 1.0),
            FRAC_PI_2,
        );
        let p = t.apply(&Vec3::new(1.0, 0.0, 0.0));
        assert!((p - Vec3::new(0.0, 1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn compose_and_inverse() {
        let a = RigidTransform::rotation_about_line(
            &Vec3::new(0.1, 0.2, 0.3),
            &Vec3::new(0.0, 1.0, 0.0),
            0.7,
        );
        let b = RigidTransform::translation(Vec3::new(1.0, -2.0, 0.5));
        let ab = a.compose(&b);
        let p = Vec3::new(0.3, 0.4, -0.9);
        assert!((ab.apply(&p) - a.apply(&b.apply(&p))).norm() < 1e-12);
        let back = ab.inverse().apply(&ab.apply(&p));
        assert!((back - p).norm() < 1e-12);
        assert!(ab.rotation.is_rotation(1e-12));
    }

    #[test]
    fn box_ops() {
        let a = Aabb::new(Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0));
        let b = a.translate(&Vec3::new(0.5, 0.0, 0.0));
        assert_eq!(a.intersection_volume(&b), 0.5);
        assert_eq!(a.union(&b).volume(), 1.5);
        assert_eq!(a.surface_area(), 6.0);
        let far = a.translate(&Vec3::new(2.0, 0.0, 0.0));
        assert!(a.intersection(&far).is_none());
        assert_eq!(a.corners()[7], Vec3::new(1.0, 1.0, 1.0));
    }
}
