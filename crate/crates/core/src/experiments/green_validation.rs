//! Checks g_λ through the D-bar equation: μ from the LS solver must satisfy
//! ∂̄_λ μ = (1/(4πλ̄)) t(λ) e_{−λ}(z) conj μ on the unit disk.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::ls::{scattering_direct, solve_with_kernel, LsKernel, LsOptions, PotentialField};
use crate::profiles::PotentialProfile;
use crate::spectral::{exp_factor, Energy, ExpSign, PeriodicGrid, SpectralLambda, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenValidationRow {
    pub lambda_abs: f64,
    pub m: u32,
    /// ‖∂̄μ − (1/(4πλ̄)) t e_{−λ} conj μ‖ over the unit disk.
    pub residual: f64,
    /// The same divided by ‖(1/(4πλ̄)) t e_{−λ} conj μ‖.
    pub relative: f64,
    pub t: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenValidationOptions {
    pub d_lambda: f64,
    pub half_width: f64,
    pub ls: LsOptions,
}

impl Default for GreenValidationOptions {
    fn default() -> Self {
        let mut ls = LsOptions {
            tol: 1e-11,
            ..LsOptions::default()
        };
        // The sweep starts next to the unit circle on purpose.
        ls.green.guard = 0.005;
        GreenValidationOptions {
            d_lambda: 1e-4,
            half_width: 2.1,
            ls,
        }
    }
}

/// One residual per (|λ|, m); λ runs along the positive real axis.
/// Failed LS solves give a NaN row.
pub fn validate_green(
    profile: &PotentialProfile,
    lambda_abs: &[f64],
    energy: Energy,
    m_exponents: &[u32],
    opts: &GreenValidationOptions,
) -> Result<Vec<GreenValidationRow>> {
    let mut rows = Vec::new();
    for &m in m_exponents {
        let grid = PeriodicGrid::z_grid(m, opts.half_width)?;
        let q = PotentialField::from_profile(grid, profile)?;
        let part: Vec<GreenValidationRow> = lambda_abs
            .par_iter()
            .map(|&r| {
                row(&opts.ls, &q, r, m, energy, opts.d_lambda).unwrap_or(GreenValidationRow {
                    lambda_abs: r,
                    m,
                    residual: f64::NAN,
                    relative: f64::NAN,
                    t: C64::new(f64::NAN, f64::NAN),
                })
            })
            .collect();
        rows.extend(part);
    }
    Ok(rows)
}

// Kernels are built per λ and dropped; nine per row would swamp a cache.
fn row(ls: &LsOptions, q: &PotentialField, r: f64, m: u32, energy: Energy, d: f64) -> Result<GreenValidationRow> {
    let lam = C64::new(r, 0.0);
    let solve = |l: C64| {
        let kernel = LsKernel::build(q.grid, SpectralLambda::new(l)?, energy, &ls.green)?;
        solve_with_kernel(q, &kernel, ls)
    };
    let mu0 = solve(lam)?;
    let t = scattering_direct(q, &mu0, energy)?;
    let shifts = [d, 2.0 * d, -d, -2.0 * d];
    let along = |dir: C64| -> Result<Vec<Vec<C64>>> {
        shifts.iter().map(|&s| solve(lam + dir * s).map(|f| f.values)).collect()
    };
    let re = along(C64::new(1.0, 0.0))?;
    let im = along(I)?;
    let grid = q.grid;
    let sl = SpectralLambda::new(lam)?;
    let coef = t / (4.0 * std::f64::consts::PI * lam.conj()) * (r * r - 1.0).signum();
    let h2 = grid.spacing().powi(2);
    let (mut num, mut den) = (0.0, 0.0);
    for (i, z) in grid.points().enumerate() {
        if z.norm() >= 1.0 {
            continue;
        }
        let five = |f: &Vec<Vec<C64>>| (-f[1][i] + 8.0 * f[0][i] - 8.0 * f[2][i] + f[3][i]) / (12.0 * d);
        let dbar = 0.5 * (five(&re) + I * five(&im));
        let rhs = coef * exp_factor(z, sl, energy, ExpSign::Minus) * mu0.values[i].conj();
        num += (dbar - rhs).norm_sqr() * h2;
        den += rhs.norm_sqr() * h2;
    }
    Ok(GreenValidationRow {
        lambda_abs: r,
        m,
        residual: num.sqrt(),
        relative: (num / den).sqrt(),
        t,
    })
}

/// Rows `lambda_abs,m,residual,relative,re_t,im_t`.
pub fn write_csv<W: Write>(out: W, rows: &[GreenValidationRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda_abs", "m", "residual", "relative", "re_t", "im_t"])?;
    for r in rows {
        w.write_record([
            r.lambda_abs.to_string(),
            r.m.to_string(),
            r.residual.to_string(),
            r.relative.to_string(),
            r.t.re.to_string(),
            r.t.im.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
