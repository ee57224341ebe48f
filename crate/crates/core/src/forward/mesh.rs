use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// P1 triangulation of the unit disk by concentric rings.
///
/// Ring k (1 ≤ k ≤ K) has radius k/K and 6k equally spaced vertices, so every
/// annulus is split into 6(2k − 1) triangles and the mesh has 6K² in total.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskMesh {
    pub rings: usize,
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary vertex indices in increasing angle from θ = 0.
    pub boundary: Vec<usize>,
}

fn ring_start(k: usize) -> usize {
    // 1 + Σ_{j<k} 6j
    if k == 0 {
        0
    } else {
        1 + 3 * k * (k - 1)
    }
}

impl DiskMesh {
    pub fn polar(rings: usize) -> Result<Self> {
        if rings == 0 {
            return Err(Error::InvalidArgument("mesh needs at least one ring".into()));
        }
        let tau = std::f64::consts::TAU;
        let mut vertices = vec![[0.0, 0.0]];
        for k in 1..=rings {
            let r = k as f64 / rings as f64;
            let n = 6 * k;
            for j in 0..n {
                let t = tau * j as f64 / n as f64;
                vertices.push([r * t.cos(), r * t.sin()]);
            }
        }
        let mut triangles = Vec::with_capacity(6 * rings * rings);
        for k in 1..=rings {
            let (outer, no) = (ring_start(k), 6 * k);
            if k == 1 {
                for o in 0..no {
                    triangles.push([0, outer + o, outer + (o + 1) % no]);
                }
                continue;
            }
            let (inner, ni) = (ring_start(k - 1), 6 * (k - 1));
            // Merge the two rings by angle.
            let (mut i, mut o) = (0, 0);
            while i < ni || o < no {
                let ti = (i + 1) as f64 / ni as f64;
                let to = (o + 1) as f64 / no as f64;
                if o == no || (i < ni && ti < to) {
                    triangles.push([inner + i, outer + o % no, inner + (i + 1) % ni]);
                    i += 1;
                } else {
                    triangles.push([inner + i % ni, outer + o, outer + (o + 1) % no]);
                    o += 1;
                }
            }
        }
        for t in &mut triangles {
            if signed_area(&vertices, t) < 0.0 {
                t.swap(1, 2);
            }
        }
        let boundary = (ring_start(rings)..ring_start(rings) + 6 * rings).collect();
        Ok(DiskMesh {
            rings,
            vertices,
            triangles,
            boundary,
        })
    }

    /// Mesh with roughly `count` triangles.
    pub fn with_triangles(count: usize) -> Result<Self> {
        Self::polar(((count as f64 / 6.0).sqrt().round() as usize).max(1))
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn area(&self, t: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[t])
    }

    /// Boundary vertex angles, matching `boundary`.
    pub fn boundary_angles(&self) -> Vec<f64> {
        self.boundary
            .iter()
            .map(|&b| {
                let [x, y] = self.vertices[b];
                y.atan2(x).rem_euclid(std::f64::consts::TAU)
            })
            .collect()
    }

    pub fn is_boundary(&self) -> Vec<bool> {
        let mut flag = vec![false; self.n_vertices()];
        for &b in &self.boundary {
            flag[b] = true;
        }
        flag
    }
}

fn signed_area(v: &[[f64; 2]], t: &[usize; 3]) -> f64 {
    let [a, b, c] = t.map(|i| v[i]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_orientation() {
        for k in [1, 2, 5, 17] {
            let m = DiskMesh::polar(k).unwrap();
            assert_eq!(m.n_triangles(), 6 * k * k);
            assert_eq!(m.n_vertices(), 1 + 3 * k * (k + 1));
            assert!((0..m.n_triangles()).all(|t| m.area(t) > 0.0));
        }
    }

    #[test]
    fn covers_inscribed_polygon() {
        let k = 12;
        let m = DiskMesh::polar(k).unwrap();
        let total: f64 = (0..m.n_triangles()).map(|t| m.area(t)).sum();
        let n = 6.0 * k as f64;
        let polygon = 0.5 * n * (std::f64::consts::TAU / n).sin();
        assert!((total - polygon).abs() < 1e-12);
    }

    #[test]
    fn boundary_on_circle_in_angle_order() {
        let m = DiskMesh::polar(8).unwrap();
        let a = m.boundary_angles();
        assert_eq!(a.len(), 48);
        assert!(a.windows(2).all(|w| w[1] > w[0]));
        for &b in &m.boundary {
            let [x, y] = m.vertices[b];
            assert!(((x * x + y * y).sqrt() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn every_interior_edge_shared_twice() {
        use std::collections::HashMap;
        let m = DiskMesh::polar(6).unwrap();
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &m.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let flag = m.is_boundary();
        for ((a, b), c) in edges {
            let outer = flag[a] && flag[b];
            assert_eq!(c, if outer { 1 } else { 2 }, "edge {a}-{b}");
        }
    }
}
