//! q0 and σ from truncated scattering data.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bie::{ScatteringGrid, TruncationSpec};
use crate::dbar::{DbarOptions, DbarSolution, DbarSolver};
use crate::error::{Error, Result};
use crate::spectral::{Energy, C64, I};

/// How the large-λ coefficient μ₋₁ in μ = 1 + μ₋₁/λ + … is read off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Q0Estimate {
    /// λ(μ − 1), averaged over nodes with |λ| ≥ (1 − fraction)·r(θ) in the
    /// outer truncation region.
    OuterBand { fraction: f64 },
    /// (1/π)∫ T μ dλ, the exact 1/λ coefficient of the truncated solution.
    Moment,
}

impl Default for Q0Estimate {
    fn default() -> Self {
        Q0Estimate::Moment
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionOptions {
    pub dz: f64,
    pub dbar: DbarOptions,
    pub q0_estimate: Q0Estimate,
    pub r_star: f64,
    /// Half-width of the λ-annulus averaged around r*.
    pub width: f64,
    /// σ on the boundary.
    pub boundary_sigma: f64,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        ReconstructionOptions {
            dz: 1e-3,
            dbar: DbarOptions::default(),
            q0_estimate: Q0Estimate::default(),
            r_star: 2.5,
            width: 0.1,
            boundary_sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    Potential,
    Conductivity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionMeta {
    pub quantity: Quantity,
    pub truncation: TruncationSpec,
    pub options: ReconstructionOptions,
    /// Number of λ nodes averaged.
    pub averaged_nodes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub z_nodes: Vec<C64>,
    pub values: Vec<C64>,
    /// False where a D-bar solve failed; the value there is NaN.
    pub valid: Vec<bool>,
    pub meta: ReconstructionMeta,
}

impl ReconstructionResult {
    /// Rows `x,y,value_re,value_im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "value_re", "value_im"])?;
        for (z, v) in self.z_nodes.iter().zip(&self.values) {
            w.write_record([z.re.to_string(), z.im.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Rows `r,value_re,value_im` sorted by |z|.
    pub fn write_radial_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut rows: Vec<(f64, C64)> = self.z_nodes.iter().map(|z| z.norm()).zip(self.values.iter().copied()).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["r", "value_re", "value_im"])?;
        for (r, v) in rows {
            w.write_record([r.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// ‖Re v − truth‖₂/‖truth‖₂ over valid nodes.
    pub fn relative_l2_error<F: Fn(C64) -> f64>(&self, truth: F) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((z, v), ok) in self.z_nodes.iter().zip(&self.values).zip(&self.valid) {
            if *ok {
                let t = truth(*z);
                num += (v.re - t).powi(2);
                den += t * t;
            }
        }
        (num / den).sqrt()
    }
}

/// Nodes in the disk |z| < radius on a square lattice of the given step.
pub fn disk_nodes(step: f64, radius: f64) -> Vec<C64> {
    let k = (radius / step).floor() as i64;
    let mut out = Vec::new();
    for b in -k..=k {
        for a in -k..=k {
            let z = C64::new(a as f64 * step, b as f64 * step);
            if z.norm() < radius {
                out.push(z);
            }
        }
    }
    out
}

/// Points r·e^{iθ} for r = 0, 1/n, …, (n−1)/n.
pub fn ray_nodes(n: usize, theta: f64) -> Vec<C64> {
    (0..n).map(|k| C64::from_polar(k as f64 / n as f64, theta)).collect()
}

fn check_opts(opts: &ReconstructionOptions) -> Result<()> {
    if !(opts.dz > 0.0 && opts.dz.is_finite()) {
        return Err(Error::InvalidArgument(format!("dz must be positive, got {}", opts.dz)));
    }
    Ok(())
}

/// (1/π) h² Σ τ conj μ, the 1/λ coefficient of μ = 1 − C T μ.
fn moment(t: &ScatteringGrid, sol: &DbarSolution, energy: Energy) -> C64 {
    let tau = crate::dbar::t_multiplier(t, sol.z, energy);
    let h2 = t.grid.spacing().powi(2);
    tau.iter().zip(&sol.mu).map(|(a, m)| a * m.conj()).sum::<C64>() * (h2 / std::f64::consts::PI)
}

/// q0(z) = 2i√E ∂_z μ₋₁(z) with ∂_z from central differences at z ± dz,
/// z ± i·dz.
pub fn reconstruct_potential(
    t: &ScatteringGrid,
    energy: Energy,
    z_nodes: &[C64],
    spec: &TruncationSpec,
    opts: &ReconstructionOptions,
) -> Result<ReconstructionResult> {
    energy.require_negative_real()?;
    check_opts(opts)?;
    let solver = DbarSolver::new(t.grid, opts.dbar);
    let band: Vec<usize> = match opts.q0_estimate {
        Q0Estimate::OuterBand { fraction } => {
            if !(fraction > 0.0 && fraction <= 1.0) {
                return Err(Error::InvalidArgument(format!("band fraction must lie in (0, 1], got {fraction}")));
            }
            (0..t.grid.len())
                .filter(|&i| {
                    let l = t.grid.point_at(i);
                    t.mask[i] && spec.in_outer(l) && l.norm() >= (1.0 - fraction) * spec.radius(l.arg())
                })
                .collect()
        }
        Q0Estimate::Moment => vec![],
    };
    let averaged = match opts.q0_estimate {
        Q0Estimate::OuterBand { .. } if band.is_empty() => {
            return Err(Error::InvalidArgument("no λ nodes in the outer band".into()));
        }
        Q0Estimate::OuterBand { .. } => band.len(),
        Q0Estimate::Moment => t.mask.iter().filter(|m| **m).count(),
    };
    let dz = opts.dz;
    let sqrt_e = energy.sqrt();
    let values: Vec<Option<C64>> = z_nodes
        .par_iter()
        .map(|&z| {
            let shifts = [z + dz, z - dz, z + I * dz, z - I * dz];
            let sols: Result<Vec<DbarSolution>> = shifts.iter().map(|&zi| solver.solve(t, zi, energy)).collect();
            let sols = sols.ok()?;
            // ∂_z f ≈ ((f₁ − f₂) − i(f₃ − f₄))/(4dz)
            let dzf = |f: &dyn Fn(&DbarSolution) -> C64| {
                ((f(&sols[0]) - f(&sols[1])) - I * (f(&sols[2]) - f(&sols[3]))) / (4.0 * dz)
            };
            let d = match opts.q0_estimate {
                Q0Estimate::Moment => dzf(&|s| moment(t, s, energy)),
                Q0Estimate::OuterBand { .. } => {
                    band.iter()
                        .map(|&i| {
                            let l = t.grid.point_at(i);
                            dzf(&|s| s.mu[i]) * l
                        })
                        .sum::<C64>()
                        / band.len() as f64
                }
            };
            Some(2.0 * I * sqrt_e * d)
        })
        .collect();
    Ok(finish(z_nodes, values, Quantity::Potential, spec, opts, averaged))
}

/// σ(z) = s · mean of Re(μ(z, λ))² over r* − w ≤ |λ| ≤ r* + w.
pub fn reconstruct_conductivity(
    t: &ScatteringGrid,
    energy: Energy,
    z_nodes: &[C64],
    spec: &TruncationSpec,
    opts: &ReconstructionOptions,
) -> Result<ReconstructionResult> {
    energy.require_negative_real()?;
    if !(opts.boundary_sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("boundary σ must be positive, got {}", opts.boundary_sigma)));
    }
    if !(opts.r_star > spec.r1 && opts.r_star < spec.outer_radius()) {
        return Err(Error::InvalidArgument(format!(
            "r* = {} must lie between R1 = {} and the ellipse radius {}",
            opts.r_star,
            spec.r1,
            spec.outer_radius()
        )));
    }
    let annulus: Vec<usize> = (0..t.grid.len())
        .filter(|&i| (t.grid.point_at(i).norm() - opts.r_star).abs() <= opts.width)
        .collect();
    if annulus.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no λ nodes within {} of r* = {}",
            opts.width, opts.r_star
        )));
    }
    let solver = DbarSolver::new(t.grid, opts.dbar);
    let values: Vec<Option<C64>> = z_nodes
        .par_iter()
        .map(|&z| {
            let sol = solver.solve(t, z, energy).ok()?;
            let mean = annulus.iter().map(|&i| sol.mu[i].re.powi(2)).sum::<f64>() / annulus.len() as f64;
            Some(C64::new(opts.boundary_sigma * mean, 0.0))
        })
        .collect();
    Ok(finish(z_nodes, values, Quantity::Conductivity, spec, opts, annulus.len()))
}

fn finish(
    z_nodes: &[C64],
    values: Vec<Option<C64>>,
    quantity: Quantity,
    spec: &TruncationSpec,
    opts: &ReconstructionOptions,
    averaged_nodes: usize,
) -> ReconstructionResult {
    let nan = C64::new(f64::NAN, f64::NAN);
    ReconstructionResult {
        z_nodes: z_nodes.to_vec(),
        valid: values.iter().map(|v| v.is_some_and(|c| c.re.is_finite() && c.im.is_finite())).collect(),
        values: values.into_iter().map(|v| v.unwrap_or(nan)).collect(),
        meta: ReconstructionMeta {
            quantity,
            truncation: *spec,
            options: *opts,
            averaged_nodes,
        },
    }
}

/// σ from a radial potential on [0, 1]: u'' + u'/r = q u, u'(0) = 0,
/// scaled so that u(1)² = s, then σ = u². `q` holds samples at r_k = k/(n−1).
pub fn sigma_from_radial_potential(q: &[f64], boundary_sigma: f64) -> Result<Vec<f64>> {
    let n = q.len();
    if n < 3 {
        return Err(Error::InvalidArgument("need at least 3 radial samples".into()));
    }
    let h = 1.0 / (n - 1) as f64;
    let qa = |r: f64| {
        let x = (r / h).min((n - 1) as f64);
        let k = (x.floor() as usize).min(n - 2);
        let w = x - k as f64;
        q[k] * (1.0 - w) + q[k + 1] * w
    };
    // RK4 on (u, u') from r = h with the series start u = 1 + q(0)r²/4.
    let mut u = vec![1.0; n];
    let mut y = [1.0 + q[0] * h * h / 4.0, q[0] * h / 2.0];
    u[1] = y[0];
    let f = |r: f64, y: [f64; 2]| [y[1], qa(r) * y[0] - y[1] / r];
    let sub = 8;
    let hs = h / sub as f64;
    for k in 1..n - 1 {
        for s in 0..sub {
            let r = k as f64 * h + s as f64 * hs;
            let k1 = f(r, y);
            let k2 = f(r + 0.5 * hs, [y[0] + 0.5 * hs * k1[0], y[1] + 0.5 * hs * k1[1]]);
            let k3 = f(r + 0.5 * hs, [y[0] + 0.5 * hs * k2[0], y[1] + 0.5 * hs * k2[1]]);
            let k4 = f(r + hs, [y[0] + hs * k3[0], y[1] + hs * k3[1]]);
            for c in 0..2 {
                y[c] += hs / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
            }
        }
        u[k + 1] = y[0];
    }
    let scale = boundary_sigma / (u[n - 1] * u[n - 1]);
    Ok(u.iter().map(|v| v * v * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;

    fn spec() -> TruncationSpec {
        TruncationSpec::circular(3.0).unwrap()
    }

    #[test]
    fn zero_scattering_is_trivial() {
        let grid = PeriodicGrid::new(6, 7.0).unwrap();
        let mut t = ScatteringGrid::zeros(grid);
        for (i, l) in grid.points().enumerate() {
            t.mask[i] = spec().in_outer(l);
        }
        let z = ray_nodes(4, 0.3);
        let e = Energy::real(-1.0);
        for est in [Q0Estimate::default(), Q0Estimate::Moment] {
            let opts = ReconstructionOptions {
                q0_estimate: est,
                ..Default::default()
            };
            let q = reconstruct_potential(&t, e, &z, &spec(), &opts).unwrap();
            assert!(q.values.iter().all(|v| *v == C64::new(0.0, 0.0)));
        }
        let s = reconstruct_conductivity(&t, e, &z, &spec(), &ReconstructionOptions::default()).unwrap();
        assert!(s.values.iter().all(|v| *v == C64::new(1.0, 0.0)));
        assert!(s.meta.averaged_nodes > 0);
    }

    #[test]
    fn rejects_bad_parameters() {
        let grid = PeriodicGrid::new(5, 7.0).unwrap();
        let t = ScatteringGrid::zeros(grid);
        let e = Energy::real(-1.0);
        let z = [C64::new(0.0, 0.0)];
        let bad_dz = ReconstructionOptions { dz: 0.0, ..Default::default() };
        assert!(reconstruct_potential(&t, e, &z, &spec(), &bad_dz).is_err());
        let far = ReconstructionOptions { r_star: 3.5, ..Default::default() };
        assert!(reconstruct_conductivity(&t, e, &z, &spec(), &far).is_err());
        assert!(reconstruct_conductivity(&t, Energy::new(C64::new(-1.0, 0.1)), &z, &spec(), &Default::default()).is_err());
    }

    #[test]
    fn radial_sigma_inverts_conductivity_potential() {
        // σ = (1 + 0.5 r²)², √σ = 1 + 0.5r², Δ√σ = 2, q = 2/(1 + 0.5 r²).
        let n = 101;
        let q: Vec<f64> = (0..n).map(|k| 2.0 / (1.0 + 0.5 * (k as f64 / 100.0).powi(2))).collect();
        let s = sigma_from_radial_potential(&q, 2.25).unwrap();
        for (k, v) in s.iter().enumerate() {
            let r = k as f64 / 100.0;
            assert!((v - (1.0 + 0.5 * r * r).powi(2)).abs() < 1e-5, "r={r}: {v}");
        }
    }

    #[test]
    fn node_helpers() {
        let d = disk_nodes(0.25, 1.0);
        assert!(d.iter().all(|z| z.norm() < 1.0));
        assert_eq!(d.len(), 45);
        let r = ray_nodes(5, 0.0);
        assert_eq!(r[4], C64::new(0.8, 0.0));
    }

    #[test]
    fn csv_outputs() {
        let grid = PeriodicGrid::new(5, 7.0).unwrap();
        let t = ScatteringGrid::zeros(grid);
        let q = reconstruct_conductivity(&t, Energy::real(-1.0), &ray_nodes(3, 0.0), &spec(), &Default::default()).unwrap();
        let mut buf = Vec::new();
        q.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("x,y,value_re,value_im\n0,0,1,0\n"));
        let mut buf = Vec::new();
        q.write_radial_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
        assert!(q.relative_l2_error(|_| 1.0) == 0.0);
    }
}
