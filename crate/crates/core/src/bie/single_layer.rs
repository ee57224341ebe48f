use faer::{Mat, Scale};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::green::{FaddeevGreen, GreenOptions};
use crate::spectral::{Energy, SpectralLambda, C64};

/// Treatment of the self-interaction term j = j′ in the boundary sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiagonalRule {
    /// G(0) = 0, the Green's function cutoff.
    Cutoff,
    /// Corrected trapezoid weight for the −log|s|/(2π) singularity plus the
    /// regular part of G read off the neighbouring nodes.
    LogCorrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryQuadrature {
    /// Equispaced nodes θ_j = 2πj/Nb.
    pub nb: usize,
    pub diagonal: DiagonalRule,
}

impl Default for BoundaryQuadrature {
    fn default() -> Self {
        BoundaryQuadrature {
            nb: 256,
            diagonal: DiagonalRule::LogCorrected,
        }
    }
}

impl BoundaryQuadrature {
    pub fn validate(&self, n_modes: usize) -> Result<()> {
        if self.nb < 2 * (2 * n_modes + 1) || self.nb % 2 != 0 {
            return Err(Error::InvalidArgument(format!(
                "Nb = {} must be even and at least {} for N = {n_modes}",
                self.nb,
                2 * (2 * n_modes + 1)
            )));
        }
        Ok(())
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.nb).map(|j| std::f64::consts::TAU * j as f64 / self.nb as f64).collect()
    }

    pub fn nodes(&self) -> Vec<C64> {
        self.angles().into_iter().map(|t| C64::from_polar(1.0, t)).collect()
    }

    pub fn step(&self) -> f64 {
        std::f64::consts::TAU / self.nb as f64
    }
}

/// φ_n(θ_j) for n = −N..N, as an Nb × (2N+1) matrix.
pub(crate) fn basis_matrix(angles: &[f64], n_modes: usize) -> Mat<C64> {
    let nn = n_modes as i32;
    let norm = 1.0 / std::f64::consts::TAU.sqrt();
    Mat::from_fn(angles.len(), 2 * n_modes + 1, |j, c| {
        C64::from_polar(norm, (c as i32 - nn) as f64 * angles[j])
    })
}

/// Pointwise kernel G_λ(z_j − z_j′) on the boundary nodes.
pub fn boundary_kernel(lambda: SpectralLambda, energy: Energy, quad: &BoundaryQuadrature, green: &GreenOptions) -> Result<Mat<C64>> {
    let g = FaddeevGreen::new(lambda, energy, green)?;
    let nodes = quad.nodes();
    let nb = quad.nb;
    let real_lambda = lambda.value().im == 0.0 && lambda.value().re > 0.0;
    // For real λ, G(z̄) = conj G(z), and z_{−j} − z_{−j′} is the mirror image
    // of z_j − z_j′, so only half the rows are needed.
    let rows = if real_lambda { nb / 2 + 1 } else { nb };
    let computed: Vec<Vec<C64>> = (0..rows)
        .into_par_iter()
        .map(|j| {
            (0..nb)
                .map(|k| {
                    if j == k {
                        Ok(C64::new(0.0, 0.0))
                    } else {
                        g.eval_big_g(nodes[j] - nodes[k])
                    }
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut k = Mat::<C64>::zeros(nb, nb);
    for (j, row) in computed.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            k[(j, c)] = *v;
        }
    }
    if real_lambda {
        for j in rows..nb {
            for c in 0..nb {
                k[(j, c)] = k[((nb - j) % nb, (nb - c) % nb)].conj();
            }
        }
    }
    if quad.diagonal == DiagonalRule::LogCorrected {
        let h = quad.step();
        let chord = (2.0 * (0.5 * h).sin()).ln();
        for j in 0..nb {
            let prev = (j + nb - 1) % nb;
            let next = (j + 1) % nb;
            // G ~ −log|z|/(2π) + regular part. The punctured trapezoid sum of
            // log|s| needs the weight h·log(h/2π) at s = 0 (via ζ′(0)).
            let regular = 0.5 * (k[(j, prev)] + k[(j, next)]) + chord / std::f64::consts::TAU;
            k[(j, j)] = regular - (h / std::f64::consts::TAU).ln() / std::f64::consts::TAU;
        }
    }
    Ok(k)
}

/// S_λ in the Fourier basis by the trapezoidal rule in both variables.
pub fn single_layer_matrix(
    lambda: SpectralLambda,
    energy: Energy,
    n_modes: usize,
    quad: &BoundaryQuadrature,
    green: &GreenOptions,
) -> Result<Mat<C64>> {
    quad.validate(n_modes)?;
    let k = boundary_kernel(lambda, energy, quad, green)?;
    let f = basis_matrix(&quad.angles(), n_modes);
    let h = quad.step();
    Ok(Scale(C64::new(h * h, 0.0)) * (f.adjoint() * &k * &f))
}

/// S_ρ at real radii, from which S_λ at any λ follows by rotation and
/// four-point Lagrange interpolation in |λ|.
///
/// Rotating λ by φ rotates the kernel, G_{ρe^{iφ}}(z) = G_ρ(e^{−iφ}z), so in the
/// Fourier basis S_{ρe^{iφ}}(ℓ, n) = e^{i(n−ℓ)φ} S_ρ(ℓ, n).
#[derive(Debug, Clone)]
pub struct SingleLayerTable {
    pub energy: Energy,
    pub n_modes: usize,
    pub quad: BoundaryQuadrature,
    pub r_min: f64,
    pub step: f64,
    pub matrices: Vec<Mat<C64>>,
}

impl SingleLayerTable {
    pub fn build(
        energy: Energy,
        n_modes: usize,
        quad: &BoundaryQuadrature,
        green: &GreenOptions,
        r_min: f64,
        r_max: f64,
        step: f64,
    ) -> Result<Self> {
        if !(r_min > 1.0 + green.guard && r_max > r_min && step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "table radii [{r_min}, {r_max}] step {step} must lie outside the guard band"
            )));
        }
        // One extra node on each side keeps the stencil centred at the ends;
        // the lower one stays outside the guard band.
        let lo = (r_min - step).max(1.0 + green.guard + 1e-9);
        let count = ((r_max - lo) / step).ceil() as usize + 2;
        let matrices = (0..count)
            .map(|i| {
                let r = lo + i as f64 * step;
                single_layer_matrix(SpectralLambda::real(r)?, energy, n_modes, quad, green)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SingleLayerTable {
            energy,
            n_modes,
            quad: *quad,
            r_min: lo,
            step,
            matrices,
        })
    }

    pub fn r_max(&self) -> f64 {
        self.r_min + self.step * (self.matrices.len() - 1) as f64
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.matrices.len()).map(|i| self.r_min + self.step * i as f64).collect()
    }

    /// Interpolated S at real radius ρ.
    pub fn at_radius(&self, rho: f64) -> Result<Mat<C64>> {
        if rho < self.r_min - 1e-12 || rho > self.r_max() + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "|lambda| = {rho} outside the tabulated range [{}, {}]",
                self.r_min,
                self.r_max()
            )));
        }
        let n = self.matrices.len();
        let u = (rho - self.r_min) / self.step;
        let start = (u.floor() as isize - 1).clamp(0, n.saturating_sub(4) as isize) as usize;
        let pts = (start..(start + 4).min(n)).collect::<Vec<_>>();
        let d = 2 * self.n_modes + 1;
        let mut out = Mat::<C64>::zeros(d, d);
        for &i in &pts {
            let w: f64 = pts
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (u - j as f64) / (i as f64 - j as f64))
                .product();
            out += Scale(C64::new(w, 0.0)) * &self.matrices[i];
        }
        Ok(out)
    }

    pub fn at(&self, lambda: SpectralLambda) -> Result<Mat<C64>> {
        let s = self.at_radius(lambda.abs())?;
        Ok(rotate(&s, self.n_modes, lambda.arg()))
    }
}

/// S(ℓ, n) ↦ e^{i(n−ℓ)φ} S(ℓ, n).
pub fn rotate(s: &Mat<C64>, n_modes: usize, phi: f64) -> Mat<C64> {
    let nn = n_modes as i32;
    Mat::from_fn(s.nrows(), s.ncols(), |l, n| {
        s[(l, n)] * C64::from_polar(1.0, ((n as i32 - nn) - (l as i32 - nn)) as f64 * phi)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> Energy {
        Energy::real(-1.0)
    }

    fn quad(nb: usize, diagonal: DiagonalRule) -> BoundaryQuadrature {
        BoundaryQuadrature { nb, diagonal }
    }

    fn rel(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
        (a - b).norm_l2() / b.norm_l2()
    }

    #[test]
    fn cutoff_diagonal_is_zero() {
        let k = boundary_kernel(SpectralLambda::real(2.0).unwrap(), e1(), &quad(32, DiagonalRule::Cutoff), &GreenOptions::default()).unwrap();
        assert!((0..32).all(|j| k[(j, j)] == C64::new(0.0, 0.0)));
    }

    #[test]
    fn half_rows_by_conjugation_match_direct() {
        // Rows past Nb/2 come from the mirror shortcut.
        let q = quad(40, DiagonalRule::Cutoff);
        let a = boundary_kernel(SpectralLambda::real(2.0).unwrap(), e1(), &q, &GreenOptions::default()).unwrap();
        let g = FaddeevGreen::new(SpectralLambda::real(2.0).unwrap(), e1(), &GreenOptions::default()).unwrap();
        let nodes = q.nodes();
        for (j, k) in [(30, 3), (25, 39), (21, 0)] {
            let direct = g.eval_big_g(nodes[j] - nodes[k]).unwrap();
            assert!((a[(j, k)] - direct).norm() < 1e-12 * (1.0 + direct.norm()));
        }
    }

    #[test]
    fn refinement_changes_little() {
        let l = SpectralLambda::real(2.0).unwrap();
        let g = GreenOptions::default();
        let a = single_layer_matrix(l, e1(), 16, &quad(128, DiagonalRule::LogCorrected), &g).unwrap();
        let b = single_layer_matrix(l, e1(), 16, &quad(256, DiagonalRule::LogCorrected), &g).unwrap();
        let d = rel(&a, &b);
        assert!(d < 1e-3, "{d}");
        let norm = |m: &Mat<C64>| m.singular_values().unwrap().into_iter().fold(0.0, f64::max);
        assert!((norm(&a) / norm(&b) - 1.0).abs() < 1e-3);
    }

    #[test]
    fn rotation_matches_direct_assembly() {
        let q = quad(96, DiagonalRule::LogCorrected);
        let g = GreenOptions::default();
        // A rotation by a whole number of boundary steps is exact.
        let phi = q.step() * 7.0;
        let l = SpectralLambda::new(C64::from_polar(2.5, phi)).unwrap();
        let direct = single_layer_matrix(l, e1(), 8, &q, &g).unwrap();
        let base = single_layer_matrix(SpectralLambda::real(2.5).unwrap(), e1(), 8, &q, &g).unwrap();
        assert!(rel(&rotate(&base, 8, phi), &direct) < 1e-9);
    }

    #[test]
    fn table_interpolates_between_radii() {
        let q = quad(72, DiagonalRule::LogCorrected);
        let g = GreenOptions::default();
        let table = SingleLayerTable::build(e1(), 8, &q, &g, 1.3, 2.6, 0.05).unwrap();
        for r in [1.32, 1.777, 2.51] {
            let direct = single_layer_matrix(SpectralLambda::real(r).unwrap(), e1(), 8, &q, &g).unwrap();
            let d = rel(&table.at_radius(r).unwrap(), &direct);
            assert!(d < 1e-5, "r={r}: {d}");
        }
        assert!(table.at_radius(5.0).is_err());
    }

    #[test]
    fn rejects_coarse_boundary() {
        let l = SpectralLambda::real(2.0).unwrap();
        assert!(single_layer_matrix(l, e1(), 16, &quad(64, DiagonalRule::Cutoff), &GreenOptions::default()).is_err());
    }
}
