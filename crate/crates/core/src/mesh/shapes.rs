//! Procedural meshes for tests, demos and fixtures.

use alloc::vec;
use alloc::vec::Vec;

use super::TriangleMesh;
use crate::geometry::Point3;

/// Regular tetrahedron inscribed in the unit sphere.
pub fn tetrahedron() -> TriangleMesh {
    TriangleMesh::new(
        vec![
            Point3::new(1.0, 1.0, 1.0),
            Point3::new(1.0, -1.0, -1.0),
            Point3::new(-1.0, 1.0, -1.0),
            Point3::new(-1.0, -1.0, 1.0),
        ],
        vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
    )
    .expect("tetrahedron is valid")
}

/// Raw vertices and faces of an icosphere with `20 * 4^level` faces.
pub fn icosphere_raw(level: u32) -> (Vec<Point3>, Vec<[usize; 3]>) {
    let t = (1.0 + crate::math::sqrt(5.0)) / 2.0;
    let mut verts: Vec<Point3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| {
        let p = Point3::new(x, y, z);
        p / p.norm()
    })
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoints: alloc::collections::BTreeMap<(usize, usize), usize> = Default::default();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Point3>| -> usize {
            let key = if a < b { (a, b) } else { (b, a) };
            *midpoints.entry(key).or_insert_with(|| {
                let m = (verts[a] + verts[b]) / 2.0;
                verts.push(m / m.norm());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (verts, faces)
}

/// Unit icosphere with `20 * 4^level` faces.
pub fn icosphere(level: u32) -> TriangleMesh {
    let (v, f) = icosphere_raw(level);
    TriangleMesh::new(v, f).expect("icosphere is valid")
}

/// Flat square `[-1, 1]^2` at z = 0 split into `2 n^2` triangles.
pub fn square(n: usize) -> TriangleMesh {
    let (v, f) = grid(n, n, |i, j| {
        Point3::new(-1.0 + 2.0 * i as f64 / n as f64, -1.0 + 2.0 * j as f64 / n as f64, 0.0)
    });
    TriangleMesh::new(v, f).expect("square is valid")
}

/// A long strip folded back onto itself: two parallel sheets `gap` apart
/// joined by a narrow band along one end.
pub fn folded_strip(length: f64, width: f64, gap: f64) -> TriangleMesh {
    // lower sheet, fold, upper sheet traced as one parametric strip
    let segs = 40;
    let (v, f) = grid(2 * segs + 1, 4, |i, j| {
        let y = width * j as f64 / 4.0;
        if i <= segs {
            Point3::new(length * i as f64 / segs as f64, y, 0.0)
        } else if i == segs + 1 {
            Point3::new(length + gap * 0.5, y, gap * 0.5)
        } else {
            let k = 2 * segs + 1 - i;
            Point3::new(length * k as f64 / segs as f64, y, gap)
        }
    });
    TriangleMesh::new(v, f).expect("strip is valid")
}

fn grid(nu: usize, nv: usize, at: impl Fn(usize, usize) -> Point3) -> (Vec<Point3>, Vec<[usize; 3]>) {
    let mut v = Vec::with_capacity((nu + 1) * (nv + 1));
    for i in 0..=nu {
        for j in 0..=nv {
            v.push(at(i, j));
        }
    }
    let id = |i: usize, j: usize| i * (nv + 1) + j;
    let mut f = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            f.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            f.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    (v, f)
}
