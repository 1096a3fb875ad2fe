use alloc::vec::Vec;

use crate::geometry::Point3;

const LEAF_TRIANGLES: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Bounds {
    min: Point3,
    max: Point3,
}

impl Bounds {
    fn empty() -> Self {
        Self {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Point3) {
        self.min = Point3::new(self.min.x.min(p.x), self.min.y.min(p.y), self.min.z.min(p.z));
        self.max = Point3::new(self.max.x.max(p.x), self.max.y.max(p.y), self.max.z.max(p.z));
    }

    fn distance_squared(&self, p: &Point3) -> f64 {
        let mut d2 = 0.0;
        for axis in 0..3 {
            let v = p.coord(axis);
            let d = (self.min.coord(axis) - v).max(v - self.max.coord(axis)).max(0.0);
            d2 += d * d;
        }
        d2
    }
}

#[derive(Debug, Clone)]
struct BvhNode {
    bounds: Bounds,
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Median-split bounding-volume hierarchy over mesh triangles.
#[derive(Debug, Clone)]
pub(crate) struct TriangleBvh {
    order: Vec<usize>,
    nodes: Vec<BvhNode>,
}

impl TriangleBvh {
    pub(crate) fn build(vertices: &[Point3], triangles: &[[usize; 3]]) -> Self {
        let centroids: Vec<Point3> = triangles
            .iter()
            .map(|t| (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0)
            .collect();
        let mut bvh = Self { order: (0..triangles.len()).collect(), nodes: Vec::new() };
        bvh.build_node(vertices, triangles, &centroids, 0, triangles.len());
        bvh
    }

    fn build_node(
        &mut self,
        vertices: &[Point3],
        triangles: &[[usize; 3]],
        centroids: &[Point3],
        start: usize,
        end: usize,
    ) -> usize {
        let mut bounds = Bounds::empty();
        let mut cbounds = Bounds::empty();
        for &t in &self.order[start..end] {
            for &v in &triangles[t] {
                bounds.grow(&vertices[v]);
            }
            cbounds.grow(&centroids[t]);
        }
        let id = self.nodes.len();
        self.nodes.push(BvhNode { bounds, start, end, children: None });
        if end - start <= LEAF_TRIANGLES {
            return id;
        }
        let ext = cbounds.max - cbounds.min;
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        let mid = start + (end - start) / 2;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            centroids[a].coord(axis).total_cmp(&centroids[b].coord(axis)).then(a.cmp(&b))
        });
        let l = self.build_node(vertices, triangles, centroids, start, mid);
        let r = self.build_node(vertices, triangles, centroids, mid, end);
        self.nodes[id].children = Some((l, r));
        id
    }

    /// Closest point, its distance and triangle index. Ties go to the lower
    /// triangle index so the answer equals a brute-force scan.
    pub(crate) fn closest(
        &self,
        vertices: &[Point3],
        triangles: &[[usize; 3]],
        p: &Point3,
    ) -> (Point3, f64, usize) {
        let mut best = (Point3::ORIGIN, f64::INFINITY, usize::MAX);
        let mut best_d2 = f64::INFINITY;
        let mut stack: Vec<usize> = Vec::with_capacity(64);
        stack.push(0);
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.bounds.distance_squared(p) > best_d2 {
                continue;
            }
            match node.children {
                Some((l, r)) => {
                    let dl = self.nodes[l].bounds.distance_squared(p);
                    let dr = self.nodes[r].bounds.distance_squared(p);
                    if dl <= dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
                None => {
                    for &t in &self.order[node.start..node.end] {
                        let [a, b, c] = triangles[t];
                        let q = closest_point_on_triangle(p, &vertices[a], &vertices[b], &vertices[c]);
                        let d2 = q.distance_squared(p);
                        if d2 < best_d2 || (d2 == best_d2 && t < best.2) {
                            best_d2 = d2;
                            best = (q, 0.0, t);
                        }
                    }
                }
            }
        }
        best.1 = crate::math::sqrt(best_d2);
        best
    }
}

/// Closest point to `p` on triangle `abc`, by Voronoi-region classification.
pub fn closest_point_on_triangle(p: &Point3, a: &Point3, b: &Point3, c: &Point3) -> Point3 {
    let ab = *b - *a;
    let ac = *c - *a;
    let ap = *p - *a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = *p - *b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return *a + ab * v;
    }
    let cp = *p - *c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return *a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return *b + (*c - *b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    *a + ab * v + ac * w
}
