use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use rayon::prelude::*;

use super::dn::DNMatrix;
use super::mesh::DiskMesh;
use crate::error::{Error, Result};
use crate::spectral::C64;

/// Values of a function at the mesh vertices.
pub fn nodal_values<F: Fn(C64) -> C64 + Sync>(mesh: &DiskMesh, f: F) -> Vec<C64> {
    mesh.vertices.par_iter().map(|&[x, y]| f(C64::new(x, y))).collect()
}

/// Assembled −Δ + q with q piecewise linear, stored by rows with duplicates merged.
struct System {
    rows: Vec<Vec<(usize, C64)>>,
}

impl System {
    fn assemble(mesh: &DiskMesh, q: &[C64]) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::with_capacity(7); mesh.n_vertices()];
        for t in &mesh.triangles {
            let p = t.map(|i| mesh.vertices[i]);
            let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
            // ∇λ_i = (b_i, c_i)/(2A)
            let b = [p[1][1] - p[2][1], p[2][1] - p[0][1], p[0][1] - p[1][1]];
            let c = [p[2][0] - p[1][0], p[0][0] - p[2][0], p[1][0] - p[0][0]];
            let qt = t.map(|i| q[i]);
            let qsum = qt[0] + qt[1] + qt[2];
            for i in 0..3 {
                for j in 0..3 {
                    let stiff = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
                    // ∫ q λ_i λ_j exactly for linear q.
                    let mass = if i == j {
                        (qsum + 2.0 * qt[i]) * (area / 30.0)
                    } else {
                        (qsum + qt[i] + qt[j]) * (area / 60.0)
                    };
                    rows[t[i]].push((t[j], mass + stiff));
                }
            }
        }
        rows.par_iter_mut().for_each(|r| {
            r.sort_unstable_by_key(|e| e.0);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(r.len());
            for &(j, v) in r.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            *r = merged;
        });
        System { rows }
    }

    fn row_dot(&self, i: usize, u: &[C64]) -> C64 {
        self.rows[i].iter().map(|&(j, v)| v * u[j]).sum()
    }
}

/// DN matrix of −Δ + q by P1 finite elements, q given at the vertices.
///
/// Column n solves the Dirichlet problem with datum e^{inθ}/√(2π) at the
/// boundary vertices. The flux is read off weakly: row ℓ pairs the discrete
/// residual at the boundary vertices with the interpolant of conj φ_ℓ.
pub fn assemble_dn(mesh: &DiskMesh, q: &[C64], n_modes: usize) -> Result<DNMatrix> {
    if q.len() != mesh.n_vertices() {
        return Err(Error::InvalidArgument(format!(
            "potential has {} values for {} vertices",
            q.len(),
            mesh.n_vertices()
        )));
    }
    if n_modes == 0 {
        return Err(Error::InvalidArgument("need at least one Fourier mode".into()));
    }
    if mesh.boundary.len() < 2 * (2 * n_modes + 1) {
        return Err(Error::InvalidArgument(format!(
            "{} boundary vertices cannot resolve N = {n_modes}",
            mesh.boundary.len()
        )));
    }
    let sys = System::assemble(mesh, q);
    let on_boundary = mesh.is_boundary();
    let mut interior_index = vec![usize::MAX; mesh.n_vertices()];
    let interior: Vec<usize> = (0..mesh.n_vertices()).filter(|&v| !on_boundary[v]).collect();
    for (k, &v) in interior.iter().enumerate() {
        interior_index[v] = k;
    }

    let mut triplets = Vec::new();
    for (k, &v) in interior.iter().enumerate() {
        for &(j, a) in &sys.rows[v] {
            if !on_boundary[j] {
                triplets.push(Triplet::new(k, interior_index[j], a));
            }
        }
    }
    let ni = interior.len();
    let a_ii = SparseColMat::<usize, C64>::try_new_from_triplets(ni, ni, &triplets)
        .map_err(|e| Error::WellPosedness(format!("{e:?}")))?;
    let lu = a_ii.sp_lu().map_err(|e| Error::WellPosedness(format!("{e:?}")))?;

    let angles = mesh.boundary_angles();
    let d = 2 * n_modes + 1;
    let nn = n_modes as i32;
    let basis = |n: i32, theta: f64| C64::from_polar(1.0 / std::f64::consts::TAU.sqrt(), n as f64 * theta);
    let mut boundary_value = vec![C64::new(0.0, 0.0); mesh.n_vertices()];

    let mut rhs = Mat::<C64>::zeros(ni, d);
    for col in 0..d {
        let n = col as i32 - nn;
        for (&b, &t) in mesh.boundary.iter().zip(&angles) {
            boundary_value[b] = basis(n, t);
        }
        for (k, &v) in interior.iter().enumerate() {
            let s: C64 = sys.rows[v]
                .iter()
                .filter(|e| on_boundary[e.0])
                .map(|&(j, a)| a * boundary_value[j])
                .sum();
            rhs[(k, col)] = -s;
        }
    }
    lu.solve_in_place(rhs.as_mut());
    if (0..d).any(|c| (0..ni).any(|k| !rhs[(k, c)].re.is_finite() || !rhs[(k, c)].im.is_finite())) {
        return Err(Error::WellPosedness("non-finite interior solution".into()));
    }

    let columns: Vec<Vec<C64>> = (0..d)
        .into_par_iter()
        .map(|col| {
            let n = col as i32 - nn;
            let mut u = vec![C64::new(0.0, 0.0); mesh.n_vertices()];
            for (&b, &t) in mesh.boundary.iter().zip(&angles) {
                u[b] = basis(n, t);
            }
            for (k, &v) in interior.iter().enumerate() {
                u[v] = rhs[(k, col)];
            }
            let flux: Vec<C64> = mesh.boundary.iter().map(|&b| sys.row_dot(b, &u)).collect();
            (-nn..=nn)
                .map(|l| {
                    flux.iter()
                        .zip(&angles)
                        .map(|(f, &t)| f * basis(l, t).conj())
                        .sum()
                })
                .collect()
        })
        .collect();

    let mut out = DNMatrix::zeros(n_modes);
    for (col, vals) in columns.iter().enumerate() {
        for (row, v) in vals.iter().enumerate() {
            out.set(row as i32 - nn, col as i32 - nn, *v);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::dn::dn_homogeneous;
    use crate::spectral::Energy;

    #[test]
    fn laplace_dn_is_mode_number() {
        // q = 0: harmonic extension of e^{inθ} is r^{|n|}e^{inθ}, DN entry |n|.
        let mesh = DiskMesh::polar(40).unwrap();
        let q = vec![C64::new(0.0, 0.0); mesh.n_vertices()];
        let l = assemble_dn(&mesh, &q, 4).unwrap();
        assert!(l.get(0, 0).norm() < 1e-10);
        for n in 1..=4 {
            assert!((l.get(n, n).re - n as f64).abs() < 2e-3 * n as f64 * n as f64, "{n}: {}", l.get(n, n));
        }
        assert!(l.off_diagonal_ratio() < 1e-3);
    }

    #[test]
    fn homogeneous_matches_bessel_and_converges() {
        let e = Energy::real(-1.0);
        let exact = dn_homogeneous(e, 8);
        let err = |k: usize| {
            let mesh = DiskMesh::polar(k).unwrap();
            let q = vec![C64::new(1.0, 0.0); mesh.n_vertices()];
            let l = assemble_dn(&mesh, &q, 8).unwrap();
            l.sub(&exact).unwrap().spectral_norm() / exact.spectral_norm()
        };
        let (e1, e2) = (err(24), err(48));
        assert!(e2 < 0.3 * e1, "{e1} {e2}");
        assert!(e2 < 5e-3);
    }

    #[test]
    fn hermitian_for_real_potential() {
        let mesh = DiskMesh::polar(24).unwrap();
        let q = nodal_values(&mesh, |z| C64::new(1.0 + 2.0 * (z.re - 0.2).powi(2) + z.im, 0.0));
        let l = assemble_dn(&mesh, &q, 5).unwrap();
        let mut worst: f64 = 0.0;
        for a in l.modes() {
            for b in l.modes() {
                worst = worst.max((l.get(a, b) - l.get(b, a).conj()).norm());
            }
        }
        assert!(worst < 1e-10, "{worst}");
        assert!(l.off_diagonal_ratio() > 1e-3);
    }

    #[test]
    fn rejects_bad_input() {
        let mesh = DiskMesh::polar(4).unwrap();
        assert!(assemble_dn(&mesh, &[C64::new(0.0, 0.0)], 2).is_err());
        let q = vec![C64::new(0.0, 0.0); mesh.n_vertices()];
        assert!(assemble_dn(&mesh, &q, 16).is_err());
    }
}
