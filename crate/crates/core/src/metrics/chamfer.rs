//! Exact Chamfer distance. The k-d tree only prunes subtrees whose
//! splitting plane is strictly farther than the best candidate, and squared
//! distances are always evaluated as `dx² + dy² + dz²` in that order, so the
//! result equals the brute-force value bit for bit.

use crate::geometry::Vec3;
use crate::Scalar;

const LEAF: usize = 8;

pub fn sq_dist<T: Scalar>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Implicit median-split k-d tree over a permuted copy of the points.
pub struct KdTree<T> {
    points: Vec<Vec3<T>>,
    /// Split axis of the node whose median sits at this index.
    axis: Vec<u8>,
}

impl<T: Scalar> KdTree<T> {
    pub fn new(points: &[Vec3<T>]) -> Self {
        let mut tree = KdTree {
            points: points.to_vec(),
            axis: vec![0; points.len()],
        };
        tree.build(0, points.len());
        tree
    }

    fn build(&mut self, lo: usize, hi: usize) {
        if hi - lo <= LEAF {
            return;
        }
        let slice = &mut self.points[lo..hi];
        let spread = |k: usize| {
            let (mn, mx) = slice
                .iter()
                .fold((T::infinity(), T::neg_infinity()), |(a, b), p| (a.min(p[k]), b.max(p[k])));
            mx - mn
        };
        let (sx, sy, sz) = (spread(0), spread(1), spread(2));
        let k = if sx >= sy && sx >= sz {
            0
        } else if sy >= sz {
            1
        } else {
            2
        };
        let mid = (hi - lo) / 2;
        slice.select_nth_unstable_by(mid, |a, b| a[k].partial_cmp(&b[k]).unwrap_or(std::cmp::Ordering::Equal));
        self.axis[lo + mid] = k as u8;
        self.build(lo, lo + mid);
        self.build(lo + mid + 1, hi);
    }

    /// Squared distance to the nearest point; infinity for an empty tree.
    pub fn nearest_sq(&self, q: &Vec3<T>) -> T {
        let mut best = T::infinity();
        self.search(q, 0, self.points.len(), &mut best);
        best
    }

    fn search(&self, q: &Vec3<T>, lo: usize, hi: usize, best: &mut T) {
        if hi - lo <= LEAF {
            for p in &self.points[lo..hi] {
                let d = sq_dist(q, p);
                if d < *best {
                    *best = d;
                }
            }
            return;
        }
        let mid = lo + (hi - lo) / 2;
        let k = self.axis[mid] as usize;
        let p = &self.points[mid];
        let d = sq_dist(q, p);
        if d < *best {
            *best = d;
        }
        let diff = q[k] - p[k];
        let (near, far) = if diff < T::zero() {
            ((lo, mid), (mid + 1, hi))
        } else {
            ((mid + 1, hi), (lo, mid))
        };
        self.search(q, near.0, near.1, best);
        if diff * diff <= *best {
            self.search(q, far.0, far.1, best);
        }
    }
}

fn one_way<T: Scalar>(from: &[Vec3<T>], to: &KdTree<T>) -> T {
    let mut sum = T::zero();
    for x in from {
        sum += to.nearest_sq(x);
    }
    sum / T::from_usize(from.len()).expect("point count fits")
}

/// `(1/|P|) Σ_x min_y ‖x−y‖² + (1/|Q|) Σ_y min_x ‖x−y‖²`, sums taken in
/// point order. `None` when either set is empty.
pub fn chamfer<T: Scalar>(p: &[Vec3<T>], q: &[Vec3<T>]) -> Option<T> {
    if p.is_empty() || q.is_empty() {
        return None;
    }
    Some(one_way(p, &KdTree::new(q)) + one_way(q, &KdTree::new(p)))
}

/// The O(|P|·|Q|) reference with the same summation order.
pub fn chamfer_brute<T: Scalar>(p: &[Vec3<T>], q: &[Vec3<T>]) -> Option<T> {
    if p.is_empty() || q.is_empty() {
        return None;
    }
    let side = |a: &[Vec3<T>], b: &[Vec3<T>]| {
        let mut sum = T::zero();
        for x in a {
            let mut best = T::infinity();
            for y in b {
                let d = sq_dist(x, y);
                if d < best {
                    best = d;
                }
            }
            sum += best;
        }
        sum / T::from_usize(a.len()).expect("point count fits")
    };
    Some(side(p, q) + side(q, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_points() {
        let p = [Vec3::new(0.0, 0.0, 0.0)];
        let q = [Vec3::new(1.0, 0.0, 0.0)];
        assert_eq!(chamfer(&p, &q), Some(2.0));
        assert_eq!(chamfer(&p, &p), Some(0.0));
        assert_eq!(chamfer::<f64>(&p, &[]), None);
    }

    #[test]
    fn tree_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 7, 9, 40, 300] {
            let mut pts = |k: usize| -> Vec<Vec3<f32>> {
                (0..k).map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen())).collect()
            };
            let (p, q) = (pts(n), pts(n + 3));
            assert_eq!(chamfer(&p, &q).unwrap().to_bits(), chamfer_brute(&p, &q).unwrap().to_bits());
        }
    }
}
