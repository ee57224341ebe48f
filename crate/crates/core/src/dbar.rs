//! The truncated D-bar integral equation μ = 1 − C T μ on a periodic λ-grid.

use std::io::Write;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bie::ScatteringGrid;
use crate::error::{Error, Result};
use crate::fft2::Fft2;
use crate::gmres::{gmres, GmresOptions};
use crate::spectral::{exp_factor, Energy, ExpSign, PeriodicGrid, SpectralLambda, C64};

/// Cauchy transform Cf(λ) = (1/π)∫ f(w)/(w − λ) dw on a grid, as the cyclic
/// convolution −h² Σ f(w)/(π(λ − w)) with the w = λ term dropped.
#[derive(Debug, Clone)]
pub struct CauchyOperator {
    pub grid: PeriodicGrid,
    hat: Vec<C64>,
    fft: Fft2,
}

impl CauchyOperator {
    pub fn new(grid: PeriodicGrid) -> Self {
        let n = grid.n();
        let h2 = grid.spacing() * grid.spacing();
        let mut hat: Vec<C64> = (0..grid.len())
            .map(|idx| {
                let w = C64::new(grid.wrapped_offset(idx % n), grid.wrapped_offset(idx / n));
                if idx == 0 {
                    C64::new(0.0, 0.0)
                } else {
                    -h2 / (std::f64::consts::PI * w)
                }
            })
            .collect();
        let fft = Fft2::new(n);
        fft.forward(&mut hat);
        CauchyOperator { grid, hat, fft }
    }

    pub fn apply(&self, f: &[C64]) -> Vec<C64> {
        self.fft.convolve(&self.hat, f)
    }
}

/// sgn(|λ|² − 1) t(λ) e_{−λ}(z) / (4πλ̄) at every node; zero where t is.
pub fn t_multiplier(t: &ScatteringGrid, z: C64, energy: Energy) -> Vec<C64> {
    let zero = C64::new(0.0, 0.0);
    (0..t.grid.len())
        .map(|i| {
            let v = t.values[i];
            if v == zero {
                return zero;
            }
            let l = t.grid.point_at(i);
            let sign = (l.norm_sqr() - 1.0).signum();
            let e = match SpectralLambda::new(l) {
                Ok(sl) => exp_factor(z, sl, energy, ExpSign::Minus),
                Err(_) => return zero,
            };
            v * e * sign / (4.0 * std::f64::consts::PI * l.conj())
        })
        .collect()
}

/// T f = τ · conj f with τ from [`t_multiplier`].
pub fn apply_t(t: &ScatteringGrid, f: &[C64], z: C64, energy: Energy) -> Vec<C64> {
    t_multiplier(t, z, energy).iter().zip(f).map(|(m, v)| m * v.conj()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DbarOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for DbarOptions {
    fn default() -> Self {
        DbarOptions {
            tol: 1e-8,
            max_iter: 300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbarSolution {
    pub z: C64,
    pub grid: PeriodicGrid,
    pub mu: Vec<C64>,
    pub iterations: usize,
    /// Relative residual of the equation restricted to supp t.
    pub residual: f64,
    pub history: Vec<f64>,
}

impl DbarSolution {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re_lambda", "im_lambda", "re_mu", "im_mu"])?;
        for (i, m) in self.mu.iter().enumerate() {
            let l = self.grid.point_at(i);
            w.write_record([l.re.to_string(), l.im.to_string(), m.re.to_string(), m.im.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Radius of the smallest origin-centred disk holding the nonzero t.
pub fn support_radius(t: &ScatteringGrid) -> f64 {
    (0..t.grid.len())
        .filter(|&i| t.values[i] != C64::new(0.0, 0.0))
        .map(|i| t.grid.point_at(i).norm())
        .fold(0.0, f64::max)
}

/// Solver sharing the Cauchy kernel across reconstruction points.
#[derive(Debug, Clone)]
pub struct DbarSolver {
    pub cauchy: Arc<CauchyOperator>,
    pub opts: DbarOptions,
}

impl DbarSolver {
    pub fn new(grid: PeriodicGrid, opts: DbarOptions) -> Self {
        DbarSolver {
            cauchy: Arc::new(CauchyOperator::new(grid)),
            opts,
        }
    }

    /// Solves on supp t only, as a real system in (Re μ, Im μ) since T
    /// conjugates; μ off the support follows from one more convolution.
    /// Values are wrap-around free for |λ| ≤ s − R with R the support radius.
    pub fn solve(&self, t: &ScatteringGrid, z: C64, energy: Energy) -> Result<DbarSolution> {
        let grid = self.cauchy.grid;
        if t.grid != grid {
            return Err(Error::InvalidArgument("scattering grid differs from the D-bar grid".into()));
        }
        let r = support_radius(t);
        if 2.0 * r >= grid.half_width {
            return Err(Error::InvalidArgument(format!(
                "λ-grid half-width {} must exceed twice the support radius {r}",
                grid.half_width
            )));
        }
        let one = C64::new(1.0, 0.0);
        let tau = t_multiplier(t, z, energy);
        let support: Vec<usize> = (0..grid.len()).filter(|&i| tau[i] != C64::new(0.0, 0.0)).collect();
        if support.is_empty() {
            return Ok(DbarSolution {
                z,
                grid,
                mu: vec![one; grid.len()],
                iterations: 0,
                residual: 0.0,
                history: vec![],
            });
        }
        let m = support.len();
        let spread = |u: &[C64]| {
            let mut full = vec![C64::new(0.0, 0.0); grid.len()];
            for (&i, v) in support.iter().zip(u) {
                full[i] = tau[i] * v.conj();
            }
            full
        };
        let apply = |x: &[f64]| {
            let u: Vec<C64> = (0..m).map(|k| C64::new(x[k], x[m + k])).collect();
            let c = self.cauchy.apply(&spread(&u));
            let mut out = vec![0.0; 2 * m];
            for (k, &i) in support.iter().enumerate() {
                let v = u[k] + c[i];
                out[k] = v.re;
                out[m + k] = v.im;
            }
            out
        };
        let mut rhs = vec![0.0; 2 * m];
        rhs[..m].fill(1.0);
        let out = gmres(apply, &rhs, None, &GmresOptions {
            tol: self.opts.tol,
            max_iter: self.opts.max_iter,
        });
        if !out.converged || out.x.iter().any(|v| !v.is_finite()) {
            return Err(Error::DbarNotConverged {
                iterations: out.iterations,
                residual: out.residual,
                history: out.history,
            });
        }
        let u: Vec<C64> = (0..m).map(|k| C64::new(out.x[k], out.x[m + k])).collect();
        let c = self.cauchy.apply(&spread(&u));
        let mut mu: Vec<C64> = c.iter().map(|v| one - v).collect();
        for (&i, v) in support.iter().zip(&u) {
            mu[i] = *v;
        }
        Ok(DbarSolution {
            z,
            grid,
            mu,
            iterations: out.iterations,
            residual: out.residual,
            history: out.history,
        })
    }
}

pub fn solve_dbar(t: &ScatteringGrid, z: C64, energy: Energy, opts: &DbarOptions) -> Result<DbarSolution> {
    DbarSolver::new(t.grid, *opts).solve(t, z, energy)
}

/// ‖μ − 1 + C T μ‖/‖1‖ over supp t, recomputed from scratch.
pub fn residual(t: &ScatteringGrid, sol: &DbarSolution, energy: Energy) -> f64 {
    let tau = t_multiplier(t, sol.z, energy);
    let support: Vec<usize> = (0..tau.len()).filter(|&i| tau[i] != C64::new(0.0, 0.0)).collect();
    if support.is_empty() {
        return 0.0;
    }
    let masked: Vec<C64> = (0..tau.len())
        .map(|i| if tau[i] == C64::new(0.0, 0.0) { C64::new(0.0, 0.0) } else { sol.mu[i] })
        .collect();
    let c = CauchyOperator::new(sol.grid).apply(&apply_t(t, &masked, sol.z, energy));
    let r2: f64 = support.iter().map(|&i| (sol.mu[i] - 1.0 + c[i]).norm_sqr()).sum();
    (r2 / support.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::prelude::Solve;
    use faer::Mat;

    fn disk_t(grid: PeriodicGrid, inner: f64, outer: f64, f: impl Fn(C64) -> C64) -> ScatteringGrid {
        let mut t = ScatteringGrid::zeros(grid);
        for i in 0..grid.len() {
            let l = grid.point_at(i);
            if (l.norm() > inner && l.norm() < outer) || (l.norm() > 0.0 && l.norm() < 1.0 / inner && l.norm() > 1.0 / outer) {
                t.values[i] = f(l);
                t.mask[i] = true;
            }
        }
        t
    }

    #[test]
    fn cauchy_of_disk_indicator() {
        // Direct summation oracle on a 32² grid.
        let grid = PeriodicGrid::new(5, 4.0).unwrap();
        let f: Vec<C64> = grid
            .points()
            .map(|w| if w.norm() <= 1.0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
            .collect();
        let c = CauchyOperator::new(grid).apply(&f);
        let h2 = grid.spacing().powi(2);
        let area: f64 = f.iter().map(|v| v.re).sum::<f64>() * h2;
        for (i, l) in grid.points().enumerate() {
            if l.re.abs() > 1.9 || l.im.abs() > 1.9 {
                continue;
            }
            let direct: C64 = grid
                .points()
                .zip(&f)
                .filter(|(w, _)| *w != l)
                .map(|(w, v)| v / (w - l))
                .sum::<C64>()
                * (h2 / std::f64::consts::PI);
            assert!((c[i] - direct).norm() < 1e-12, "{l}");
            if l.norm() > 1.5 {
                // Mean value: −|D|/(πλ) outside the support.
                let want = -area / (std::f64::consts::PI * l);
                assert!((c[i] - want).norm() < 0.03 * want.norm(), "{l}: {} vs {want}", c[i]);
            }
        }
    }

    #[test]
    fn dbar_of_cauchy_is_minus_f() {
        let grid = PeriodicGrid::new(7, 4.0).unwrap();
        let g = |w: C64| (-2.0 * w.norm_sqr()).exp() * C64::new(1.0 + w.re, w.im);
        let f: Vec<C64> = grid.points().map(g).collect();
        let c = CauchyOperator::new(grid).apply(&f);
        let n = grid.n();
        let h = grid.spacing();
        let mut err: f64 = 0.0;
        for k in 40..88 {
            for j in 40..88 {
                let dx = (c[k * n + j + 1] - c[k * n + j - 1]) / (2.0 * h);
                let dy = (c[(k + 1) * n + j] - c[(k - 1) * n + j]) / (2.0 * h);
                let dbar = 0.5 * (dx + C64::new(0.0, 1.0) * dy);
                err = err.max((dbar + f[k * n + j]).norm());
            }
        }
        assert!(err < 0.05, "{err}");
    }

    #[test]
    fn zero_scattering_gives_one() {
        let grid = PeriodicGrid::new(5, 8.0).unwrap();
        let t = ScatteringGrid::zeros(grid);
        let s = solve_dbar(&t, C64::new(0.2, 0.1), Energy::real(-1.0), &DbarOptions::default()).unwrap();
        assert!(s.mu.iter().all(|m| *m == C64::new(1.0, 0.0)));
        assert!(apply_t(&t, &s.mu, C64::new(0.0, 0.0), Energy::real(-1.0)).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn t_operator_sign_and_conjugation() {
        let grid = PeriodicGrid::new(4, 4.0).unwrap();
        let t = disk_t(grid, 1.1, 3.0, |_| C64::new(2.0, 0.0));
        let f: Vec<C64> = vec![C64::new(0.5, 0.25); grid.len()];
        let out = apply_t(&t, &f, C64::new(0.0, 0.0), Energy::real(-1.0));
        for (i, l) in grid.points().enumerate() {
            if t.values[i] == C64::new(0.0, 0.0) {
                assert_eq!(out[i], C64::new(0.0, 0.0));
                continue;
            }
            let s = if l.norm() < 1.0 { -1.0 } else { 1.0 };
            let want = s * 2.0 / (4.0 * std::f64::consts::PI * l.conj()) * C64::new(0.5, -0.25);
            assert!((out[i] - want).norm() < 1e-14);
        }
    }

    fn dense_real_split(t: &ScatteringGrid, z: C64, e: Energy) -> Vec<C64> {
        let tau = t_multiplier(t, z, e);
        let support: Vec<usize> = (0..tau.len()).filter(|&i| tau[i] != C64::new(0.0, 0.0)).collect();
        let m = support.len();
        let cauchy = CauchyOperator::new(t.grid);
        let mut a = Mat::<f64>::zeros(2 * m, 2 * m);
        for col in 0..2 * m {
            let mut full = vec![C64::new(0.0, 0.0); tau.len()];
            let unit = if col < m { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
            let i = support[col % m];
            full[i] = tau[i] * unit.conj();
            let c = cauchy.apply(&full);
            for (k, &j) in support.iter().enumerate() {
                let mut v = c[j];
                if j == i {
                    v += unit;
                }
                a[(k, col)] = v.re;
                a[(m + k, col)] = v.im;
            }
        }
        let mut b = Mat::<f64>::zeros(2 * m, 1);
        for k in 0..m {
            b[(k, 0)] = 1.0;
        }
        a.partial_piv_lu().solve_in_place(b.as_mut());
        support.iter().enumerate().map(|(k, _)| C64::new(b[(k, 0)], b[(m + k, 0)])).collect()
    }

    #[test]
    fn matches_dense_real_split_solve() {
        let grid = PeriodicGrid::new(5, 6.0).unwrap();
        let t = disk_t(grid, 1.2, 2.8, |l| C64::new(3.0 * (-0.3 * l.norm_sqr()).exp(), 0.4 * l.im));
        let z = C64::new(0.3, -0.2);
        let e = Energy::real(-1.0);
        let s = solve_dbar(&t, z, e, &DbarOptions { tol: 1e-13, max_iter: 500 }).unwrap();
        let dense = dense_real_split(&t, z, e);
        let support: Vec<usize> = (0..grid.len()).filter(|&i| t.values[i] != C64::new(0.0, 0.0)).collect();
        for (k, &i) in support.iter().enumerate() {
            assert!((s.mu[i] - dense[k]).norm() < 1e-8, "{}", (s.mu[i] - dense[k]).norm());
        }
        assert!((residual(&t, &s, e) - 0.0).abs() < 1e-10);
    }

    #[test]
    fn reported_residual_is_honest() {
        let grid = PeriodicGrid::new(6, 7.0).unwrap();
        let t = disk_t(grid, 1.1, 3.2, |l| C64::new(2.0 / (1.0 + l.norm()), 0.0));
        let e = Energy::real(-1.0);
        let s = solve_dbar(&t, C64::new(0.1, 0.4), e, &DbarOptions::default()).unwrap();
        // GMRES reports ‖r‖/‖b‖ on the real split; ‖b‖² = number of support nodes.
        assert!((s.residual - residual(&t, &s, e)).abs() < 1e-12);
    }

    #[test]
    fn neumann_limit() {
        let grid = PeriodicGrid::new(6, 7.0).unwrap();
        let base = disk_t(grid, 1.1, 3.2, |l| C64::new(4.0 * (-0.2 * l.norm_sqr()).exp(), 0.0));
        let e = Energy::real(-1.0);
        let z = C64::new(0.25, 0.1);
        let errs: Vec<f64> = [1e-2, 1e-3]
            .iter()
            .map(|&eps| {
                let mut t = base.clone();
                t.values.iter_mut().for_each(|v| *v *= eps);
                let s = solve_dbar(&t, z, e, &DbarOptions { tol: 1e-13, max_iter: 200 }).unwrap();
                let ones = vec![C64::new(1.0, 0.0); grid.len()];
                let first = CauchyOperator::new(grid).apply(&apply_t(&t, &ones, z, e));
                (0..grid.len())
                    .filter(|&i| t.values[i] != C64::new(0.0, 0.0))
                    .map(|i| (s.mu[i] - (1.0 - first[i])).norm())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(errs[1] < 1e-5, "{errs:?}");
        let rate = errs[0] / errs[1];
        assert!((rate - 100.0).abs() < 5.0, "{rate}");
    }

    #[test]
    fn conjugate_symmetry_at_origin() {
        let grid = PeriodicGrid::new(6, 7.0).unwrap();
        let t = disk_t(grid, 1.1, 3.2, |l| C64::new(3.0 * (-0.2 * l.norm_sqr()).exp(), 0.0));
        let s = solve_dbar(&t, C64::new(0.0, 0.0), Energy::real(-1.0), &DbarOptions::default()).unwrap();
        let n = grid.n();
        // λ̄ of node (j, k) is node (j, n − k); only nodes free of wrap-around.
        for k in 1..n {
            for j in 0..n {
                if grid.point(j, k).norm() > 7.0 - 3.2 {
                    continue;
                }
                let (a, b) = (s.mu[k * n + j], s.mu[(n - k) * n + j]);
                assert!((a - b.conj()).norm() < 1e-7, "{a} {b}");
            }
        }
    }
}
