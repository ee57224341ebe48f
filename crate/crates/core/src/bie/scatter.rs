use std::io::Write;

use faer::prelude::Solve;
use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::single_layer::{basis_matrix, single_layer_matrix, BoundaryQuadrature, SingleLayerTable};
use crate::error::{Error, Result};
use crate::forward::DNMatrix;
use crate::green::GreenOptions;
use crate::spectral::{cgo_exponential, Energy, PeriodicGrid, SpectralLambda, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BieOptions {
    pub quad: BoundaryQuadrature,
    pub green: GreenOptions,
    /// Radial spacing of the single-layer table used for grid sweeps.
    pub table_step: f64,
    /// Systems with a larger 2-norm condition number are rejected.
    pub cond_limit: f64,
}

impl Default for BieOptions {
    fn default() -> Self {
        BieOptions {
            quad: BoundaryQuadrature::default(),
            green: GreenOptions::default(),
            table_step: 0.05,
            cond_limit: 1e12,
        }
    }
}

/// ψ(·, λ) on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    pub lambda: SpectralLambda,
    /// Fourier coefficients for n = −N..N.
    pub coeffs: Vec<C64>,
    /// Values at θ_j = 2πj/Nb.
    pub values: Vec<C64>,
    pub condition: f64,
}

fn column(v: &[C64]) -> Mat<C64> {
    Mat::from_fn(v.len(), 1, |i, _| v[i])
}

/// h Σ_j conj φ_n(θ_j) f(z_j).
fn project(f: &[C64], basis: &Mat<C64>, h: f64) -> Vec<C64> {
    (0..basis.ncols())
        .map(|n| (0..f.len()).map(|j| basis[(j, n)].conj() * f[j]).sum::<C64>() * h)
        .collect()
}

/// exp(−(i√E/2)(λ̄z + z̄/λ̄)), the weight in the boundary formula for t.
pub fn dual_exponential(z: C64, lambda: SpectralLambda, energy: Energy) -> C64 {
    let lb = lambda.value().conj();
    (-I * energy.sqrt() * 0.5 * (lb * z + z.conj() / lb)).exp()
}

fn check_pair(lq: &DNMatrix, l0: &DNMatrix, n_modes: usize) -> Result<DNMatrix> {
    let diff = lq.sub(l0)?;
    if diff.n_modes != n_modes {
        return Err(Error::InvalidArgument(format!(
            "DN data has N = {}, single layer has N = {n_modes}",
            diff.n_modes
        )));
    }
    Ok(diff)
}

fn condition_number(m: &Mat<C64>) -> f64 {
    match m.singular_values() {
        Ok(s) => {
            let max = s.iter().cloned().fold(0.0, f64::max);
            let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
            if min > 0.0 {
                max / min
            } else {
                f64::INFINITY
            }
        }
        Err(_) => f64::INFINITY,
    }
}

/// Solves (I + S_λ(L_q − L_{−E}))ψ = e_λ for the boundary coefficients of ψ.
pub fn solve_boundary_psi_with(
    diff: &DNMatrix,
    s: &Mat<C64>,
    lambda: SpectralLambda,
    energy: Energy,
    opts: &BieOptions,
) -> Result<BoundaryTrace> {
    let d = diff.dim();
    let angles = opts.quad.angles();
    let basis = basis_matrix(&angles, diff.n_modes);
    let h = opts.quad.step();
    let exps: Vec<C64> = angles
        .iter()
        .map(|&t| cgo_exponential(C64::from_polar(1.0, t), lambda, energy))
        .collect();
    let rhs = project(&exps, &basis, h);
    let mut a = s * diff.to_mat();
    for i in 0..d {
        a[(i, i)] += C64::new(1.0, 0.0);
    }
    let condition = condition_number(&a);
    if !(condition <= opts.cond_limit) {
        return Err(Error::TruncationNeeded { condition });
    }
    let mut x = column(&rhs);
    a.partial_piv_lu().solve_in_place(x.as_mut());
    let coeffs: Vec<C64> = (0..d).map(|i| x[(i, 0)]).collect();
    if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::TruncationNeeded { condition });
    }
    let values = (0..angles.len())
        .map(|j| (0..d).map(|n| basis[(j, n)] * coeffs[n]).sum())
        .collect();
    Ok(BoundaryTrace {
        lambda,
        coeffs,
        values,
        condition,
    })
}

pub fn solve_boundary_psi(
    lq: &DNMatrix,
    l0: &DNMatrix,
    lambda: SpectralLambda,
    energy: Energy,
    opts: &BieOptions,
) -> Result<BoundaryTrace> {
    let diff = check_pair(lq, l0, lq.n_modes)?;
    let s = single_layer_matrix(lambda, energy, lq.n_modes, &opts.quad, &opts.green)?;
    solve_boundary_psi_with(&diff, &s, lambda, energy, opts)
}

/// t(λ) = ∫ exp(−(i√E/2)(λ̄z + z̄/λ̄)) ((L_q − L_{−E})ψ)(z) ds(z).
pub fn scattering_from_trace(diff: &DNMatrix, trace: &BoundaryTrace, energy: Energy, quad: &BoundaryQuadrature) -> C64 {
    let angles = quad.angles();
    let basis = basis_matrix(&angles, diff.n_modes);
    let h = quad.step();
    let flux = diff.to_mat() * column(&trace.coeffs);
    let weights: Vec<C64> = angles
        .iter()
        .map(|&t| dual_exponential(C64::from_polar(1.0, t), trace.lambda, energy))
        .collect();
    // ∫ w F⁻¹(c) ds = Σ_n c_n h Σ_j w_j φ_n(θ_j)
    (0..diff.dim())
        .map(|n| {
            let wn: C64 = (0..angles.len()).map(|j| weights[j] * basis[(j, n)]).sum::<C64>() * h;
            flux[(n, 0)] * wn
        })
        .sum()
}

/// t(λ) from DN data at a single λ, assembling S_λ directly.
pub fn scattering_at(lq: &DNMatrix, l0: &DNMatrix, lambda: SpectralLambda, energy: Energy, opts: &BieOptions) -> Result<C64> {
    let diff = check_pair(lq, l0, lq.n_modes)?;
    let trace = solve_boundary_psi(lq, l0, lambda, energy, opts)?;
    Ok(scattering_from_trace(&diff, &trace, energy, &opts.quad))
}

/// t(|λ|) on the positive real axis.
pub fn radial_scattering_from_dn(
    lq: &DNMatrix,
    l0: &DNMatrix,
    radii: &[f64],
    energy: Energy,
    opts: &BieOptions,
) -> Vec<(f64, Result<C64>)> {
    radii
        .par_iter()
        .map(|&r| (r, SpectralLambda::real(r).and_then(|l| scattering_at(lq, l0, l, energy, opts))))
        .collect()
}

/// Scattering values on a square λ-grid; `mask` marks nodes holding data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatteringGrid {
    pub grid: PeriodicGrid,
    pub values: Vec<C64>,
    pub mask: Vec<bool>,
}

impl ScatteringGrid {
    pub fn zeros(grid: PeriodicGrid) -> Self {
        ScatteringGrid {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.len()],
            mask: vec![false; grid.len()],
        }
    }

    pub fn lambda_at(&self, idx: usize) -> C64 {
        self.grid.point_at(idx)
    }

    /// Fill from a radial profile by linear interpolation in |λ|; nodes with
    /// |λ| outside the sampled range stay masked.
    pub fn from_radial(grid: PeriodicGrid, radii: &[f64], values: &[C64]) -> Result<Self> {
        if radii.len() != values.len() || radii.len() < 2 || radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("radial samples must be increasing with matching values".into()));
        }
        let mut out = Self::zeros(grid);
        for idx in 0..grid.len() {
            let r = grid.point_at(idx).norm();
            if r < radii[0] || r > radii[radii.len() - 1] {
                continue;
            }
            let k = radii.partition_point(|&x| x <= r).clamp(1, radii.len() - 1);
            let w = (r - radii[k - 1]) / (radii[k] - radii[k - 1]);
            out.values[idx] = values[k - 1] * (1.0 - w) + values[k] * w;
            out.mask[idx] = true;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Rows `re_lambda,im_lambda,re_t,im_t,mask`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["re_lambda", "im_lambda", "re_t", "im_t", "mask"])?;
        for (i, (v, m)) in self.values.iter().zip(&self.mask).enumerate() {
            let l = self.lambda_at(i);
            w.write_record([
                l.re.to_string(),
                l.im.to_string(),
                v.re.to_string(),
                v.im.to_string(),
                u8::from(*m).to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// t(λ) from DN data at every grid node with 1 + guard < |λ| ≤ max_abs.
/// S_λ comes from a radial table; failed nodes stay masked with value 0.
pub fn scattering_from_dn(
    lq: &DNMatrix,
    l0: &DNMatrix,
    grid: PeriodicGrid,
    energy: Energy,
    max_abs: f64,
    opts: &BieOptions,
) -> Result<ScatteringGrid> {
    let diff = check_pair(lq, l0, lq.n_modes)?;
    let lower = 1.0 + opts.green.guard;
    let nodes: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let r = grid.point_at(i).norm();
            r > lower && r <= max_abs
        })
        .collect();
    let mut out = ScatteringGrid::zeros(grid);
    if nodes.is_empty() {
        return Ok(out);
    }
    let r_lo = nodes.iter().map(|&i| grid.point_at(i).norm()).fold(f64::INFINITY, f64::min);
    let table = SingleLayerTable::build(
        energy,
        lq.n_modes,
        &opts.quad,
        &opts.green,
        r_lo.max(lower + 1e-6),
        max_abs.max(r_lo + opts.table_step),
        opts.table_step,
    )?;
    let results: Vec<(usize, Option<C64>)> = nodes
        .par_iter()
        .map(|&i| {
            let t = SpectralLambda::new(grid.point_at(i)).and_then(|l| {
                let s = table.at(l)?;
                let trace = solve_boundary_psi_with(&diff, &s, l, energy, opts)?;
                Ok(scattering_from_trace(&diff, &trace, energy, &opts.quad))
            });
            (i, t.ok().filter(|v| v.re.is_finite() && v.im.is_finite()))
        })
        .collect();
    for (i, t) in results {
        if let Some(v) = t {
            out.values[i] = v;
            out.mask[i] = true;
        }
    }
    Ok(out)
}
