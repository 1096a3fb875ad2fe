use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{GeometryError, Point3, PointCloud};

const LEAF_SIZE: usize = 8;

/// One query result: the index of a point in the indexed cloud and its
/// Euclidean distance to the query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub index: usize,
    pub distance: f64,
}

impl Neighbor {
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.distance
            .total_cmp(&other.distance)
            .then(self.index.cmp(&other.index))
    }
}

impl Eq for Neighbor {}

impl PartialOrd for Neighbor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Neighbor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key_cmp(other)
    }
}

#[derive(Debug, Clone, Copy)]
struct Aabb {
    min: Point3,
    max: Point3,
}

impl Aabb {
    fn of(points: &[Point3], idx: &[usize]) -> Self {
        let mut min = points[idx[0]];
        let mut max = min;
        for &i in &idx[1..] {
            let p = points[i];
            min = Point3::new(min.x.min(p.x), min.y.min(p.y), min.z.min(p.z));
            max = Point3::new(max.x.max(p.x), max.y.max(p.y), max.z.max(p.z));
        }
        Self { min, max }
    }

    fn distance_squared(&self, q: &Point3) -> f64 {
        let mut d2 = 0.0;
        for axis in 0..3 {
            let v = q.coord(axis);
            let lo = self.min.coord(axis);
            let hi = self.max.coord(axis);
            let d = if v < lo {
                lo - v
            } else if v > hi {
                v - hi
            } else {
                0.0
            };
            d2 += d * d;
        }
        d2
    }
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    start: usize,
    end: usize,
    // child node ids; `None` for leaves
    children: Option<(usize, usize)>,
}

/// Balanced kd-tree over one point cloud. Immutable after construction.
///
/// kNN and ball queries are exact: they return the same answer set as a
/// brute-force scan, with ties ordered by lower point index.
#[derive(Debug, Clone)]
pub struct SpatialIndex {
    points: Vec<Point3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl SpatialIndex {
    pub fn build(cloud: &PointCloud) -> Result<Self, GeometryError> {
        Self::from_points(cloud.points())
    }

    pub fn from_points(points: &[Point3]) -> Result<Self, GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::EmptyInput);
        }
        let mut tree = SpatialIndex {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1),
        };
        tree.build_node(0, points.len());
        Ok(tree)
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let bounds = Aabb::of(&self.points, &self.order[start..end]);
        let id = self.nodes.len();
        self.nodes.push(Node { bounds, start, end, children: None });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let ext = bounds.max - bounds.min;
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a]
                .coord(axis)
                .total_cmp(&points[b].coord(axis))
                .then(a.cmp(&b))
        });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id].children = Some((left, right));
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    /// The `k` nearest points, ascending by distance, ties by lower index.
    pub fn knn(&self, query: &Point3, k: usize) -> Result<Vec<Neighbor>, GeometryError> {
        if k == 0 || k > self.points.len() {
            return Err(GeometryError::KOutOfRange { k, count: self.points.len() });
        }
        let mut heap: BinaryHeap<Neighbor> = BinaryHeap::with_capacity(k + 1);
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if heap.len() == k {
                let worst = heap.peek().map(|n| n.distance).unwrap_or(f64::INFINITY);
                // Equal distance can still win on index, so prune only on strictly farther boxes.
                if crate::math::sqrt(node.bounds.distance_squared(query)) > worst {
                    continue;
                }
            }
            match node.children {
                Some((l, r)) => {
                    let dl = self.nodes[l].bounds.distance_squared(query);
                    let dr = self.nodes[r].bounds.distance_squared(query);
                    if dl <= dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                None => {
                    for &i in &self.order[node.start..node.end] {
                        let cand = Neighbor { index: i, distance: self.points[i].distance(query) };
                        if heap.len() < k {
                            heap.push(cand);
                        } else if let Some(top) = heap.peek() {
                            if cand < *top {
                                heap.pop();
                                heap.push(cand);
                            }
                        }
                    }
                }
            }
        }
        Ok(heap.into_sorted_vec())
    }

    /// Indices of all points within the closed ball `|p - center| <= radius`,
    /// in ascending index order.
    pub fn ball_query(&self, center: &Point3, radius: f64) -> Result<Vec<usize>, GeometryError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeometryError::BadRadius(radius));
        }
        let mut out = Vec::new();
        self.ball_visit(center, radius, |i, _| out.push(i));
        out.sort_unstable();
        Ok(out)
    }

    /// Like [`ball_query`](Self::ball_query) but also returns distances.
    pub fn ball_query_with_distance(
        &self,
        center: &Point3,
        radius: f64,
    ) -> Result<Vec<Neighbor>, GeometryError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(GeometryError::BadRadius(radius));
        }
        let mut out = Vec::new();
        self.ball_visit(center, radius, |index, distance| out.push(Neighbor { index, distance }));
        out.sort_unstable_by_key(|n| n.index);
        Ok(out)
    }

    fn ball_visit(&self, center: &Point3, radius: f64, mut visit: impl FnMut(usize, f64)) {
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if crate::math::sqrt(node.bounds.distance_squared(center)) > radius {
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    stack.push(l);
                    stack.push(r);
                }
                None => {
                    for &i in &self.order[node.start..node.end] {
                        let d = self.points[i].distance(center);
                        if d <= radius {
                            visit(i, d);
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Point3> {
        (0..n)
            .map(|_| Point3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    fn brute_knn(points: &[Point3], q: &Point3, k: usize) -> Vec<(usize, f64)> {
        let mut all: Vec<(usize, f64)> = points.iter().enumerate().map(|(i, p)| (i, p.distance(q))).collect();
        all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
        all.truncate(k);
        all
    }

    #[test]
    fn empty_cloud_is_rejected() {
        assert_eq!(SpatialIndex::from_points(&[]).unwrap_err(), GeometryError::EmptyInput);
        assert_eq!(std::string::ToString::to_string(&GeometryError::EmptyInput), "empty input");
    }

    #[test]
    fn singleton_answers_every_query() {
        let idx = SpatialIndex::from_points(&[Point3::new(0.3, -0.2, 0.1)]).unwrap();
        let nn = idx.knn(&Point3::new(5.0, 5.0, 5.0), 1).unwrap();
        assert_eq!(nn[0].index, 0);
        assert_eq!(idx.ball_query(&Point3::new(0.3, -0.2, 0.1), 1e-12).unwrap(), vec![0]);
    }

    #[test]
    fn collinear_knn() {
        let pts = [Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(3.0, 0.0, 0.0)];
        let idx = SpatialIndex::from_points(&pts).unwrap();
        let nn = idx.knn(&Point3::ORIGIN, 2).unwrap();
        assert_eq!(nn, vec![Neighbor { index: 0, distance: 0.0 }, Neighbor { index: 1, distance: 1.0 }]);
    }

    #[test]
    fn equidistant_pair_orders_by_index() {
        let pts = [Point3::new(1.0, 0.0, 0.0), Point3::new(-1.0, 0.0, 0.0)];
        let idx = SpatialIndex::from_points(&pts).unwrap();
        let nn = idx.knn(&Point3::ORIGIN, 2).unwrap();
        assert_eq!(nn[0].index, 0);
        assert_eq!(nn[1].index, 1);
    }

    #[test]
    fn k_larger_than_count_fails() {
        let idx = SpatialIndex::from_points(&[Point3::ORIGIN]).unwrap();
        assert!(matches!(idx.knn(&Point3::ORIGIN, 2), Err(GeometryError::KOutOfRange { .. })));
        assert!(matches!(idx.knn(&Point3::ORIGIN, 0), Err(GeometryError::KOutOfRange { .. })));
    }

    #[test]
    fn knn_and_ball_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..50 {
            let n = 50 + trial * 3;
            let pts = random_points(&mut rng, n);
            let idx = SpatialIndex::from_points(&pts).unwrap();
            let q = random_points(&mut rng, 1)[0];
            let got: Vec<(usize, f64)> = idx.knn(&q, 5).unwrap().iter().map(|n| (n.index, n.distance)).collect();
            assert_eq!(got, brute_knn(&pts, &q, 5));
            let got = idx.ball_query(&q, 0.2).unwrap();
            let want: Vec<usize> = (0..n).filter(|&i| pts[i].distance(&q) <= 0.2).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn ball_covering_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts = random_points(&mut rng, 100);
        let idx = SpatialIndex::from_points(&pts).unwrap();
        let all = idx.ball_query(&Point3::ORIGIN, 10.0).unwrap();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn duplicate_points_are_all_found() {
        let pts = vec![Point3::new(0.5, 0.5, 0.5); 20];
        let idx = SpatialIndex::from_points(&pts).unwrap();
        let nn = idx.knn(&Point3::ORIGIN, 3).unwrap();
        assert_eq!(nn.iter().map(|n| n.index).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(idx.ball_query(&Point3::new(0.5, 0.5, 0.5), 1e-9).unwrap().len(), 20);
    }
}
