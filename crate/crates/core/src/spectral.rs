//! Spectral-parameter algebra shared by every solver.
//!
//! The complex spectral parameter λ parametrises the vectors ζ ∈ ℂ² with
//! ζ·ζ = E through
//!
//! ```text
//! ζ = [ (λ + 1/λ)·√E/2 ,  (1/λ − λ)·i√E/2 ]ᵀ,        λ = (ζ₁ + iζ₂)/√E.
//! ```
//!
//! For real E < 0 we fix √E = i√|E|. With that branch the exponentials
//! e_{±λ}(z) are unimodular and Re ζ ⟂ Im ζ, which is what allows the
//! Faddeev Green's function to be evaluated in the reduced frame
//! ζ = (k₁, 0) + i(0, k₂).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Default half-width of the band around |λ| = 1 in which Green's function
/// dependent operations refuse to evaluate.
pub const DEFAULT_GUARD: f64 = 0.05;

/// Energy E of the Schrödinger problem (−Δ + q₀ − E)u = 0.
///
/// Inverse-side operations require a real negative value; complex energies
/// appear only when simulating DOT data with a modulated source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy(C64);

impl Energy {
    pub fn new(value: C64) -> Self {
        Energy(value)
    }

    pub fn real(value: f64) -> Self {
        Energy(C64::new(value, 0.0))
    }

    pub fn value(&self) -> C64 {
        self.0
    }

    pub fn is_negative_real(&self) -> bool {
        self.0.im == 0.0 && self.0.re < 0.0
    }

    /// The real part of a real negative energy, or an error otherwise.
    pub fn require_negative_real(&self) -> Result<f64> {
        if self.is_negative_real() {
            Ok(self.0.re)
        } else {
            Err(Error::InvalidArgument(format!(
                "inverse solvers need a real negative energy, got {}",
                self.0
            )))
        }
    }

    /// √E with the branch √E = i√|E| for real E < 0 and the principal branch
    /// otherwise.
    pub fn sqrt(&self) -> C64 {
        if self.is_negative_real() {
            C64::new(0.0, (-self.0.re).sqrt())
        } else {
            self.0.sqrt()
        }
    }
}

/// The spectral parameter λ ≠ 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralLambda(C64);

impl SpectralLambda {
    pub fn new(value: C64) -> Result<Self> {
        if value.norm() == 0.0 || !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "spectral parameter must be finite and non-zero, got {value}"
            )));
        }
        Ok(SpectralLambda(value))
    }

    pub fn real(value: f64) -> Result<Self> {
        Self::new(C64::new(value, 0.0))
    }

    pub fn value(&self) -> C64 {
        self.0
    }

    pub fn abs(&self) -> f64 {
        self.0.norm()
    }

    pub fn arg(&self) -> f64 {
        self.0.arg()
    }

    /// 1/λ̄, the reflection through the unit circle.
    pub fn reflected(&self) -> SpectralLambda {
        SpectralLambda(1.0 / self.0.conj())
    }

    /// Rejects λ with | |λ| − 1 | ≤ guard.
    pub fn check_guard(&self, guard: f64) -> Result<()> {
        let abs = self.abs();
        if (abs - 1.0).abs() <= guard {
            Err(Error::GuardBand { abs, guard })
        } else {
            Ok(())
        }
    }
}

/// ζ = (ζ₁, ζ₂) ∈ ℂ² with ζ·ζ = E.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralZeta {
    pub zeta1: C64,
    pub zeta2: C64,
}

impl SpectralZeta {
    pub fn dot_self(&self) -> C64 {
        self.zeta1 * self.zeta1 + self.zeta2 * self.zeta2
    }

    /// ζ·z for z = x₁ + i x₂ read as a real 2-vector.
    pub fn dot_point(&self, z: C64) -> C64 {
        self.zeta1 * z.re + self.zeta2 * z.im
    }
}

pub fn lambda_to_zeta(lambda: SpectralLambda, energy: Energy) -> SpectralZeta {
    let l = lambda.value();
    let inv = 1.0 / l;
    let sqrt_e = energy.sqrt();
    SpectralZeta {
        zeta1: (l + inv) * sqrt_e * 0.5,
        zeta2: (inv - l) * I * sqrt_e * 0.5,
    }
}

/// ζ in the reduced frame ζ = (k₁, 0) + i(0, k₂), k₂ > |k₁| > 0.
///
/// `rotation` is arg λ. The frame map [`ReducedZeta::to_reduced`] sends
/// Re ζ to (k₁, 0) and Im ζ to (0, k₂); it is orthogonal (a reflection
/// composed with a rotation), which is all the Green's function needs since
/// g_ζ(z) = g_{Pζ}(Pz) for every orthogonal P.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedZeta {
    pub k1: f64,
    pub k2: f64,
    pub rotation: f64,
}

impl ReducedZeta {
    /// E = k₁² − k₂².
    pub fn energy(&self) -> f64 {
        self.k1 * self.k1 - self.k2 * self.k2
    }

    /// Coordinates (x₁, x₂) of z in the reduced frame.
    pub fn to_reduced(&self, z: C64) -> (f64, f64) {
        let (s, c) = self.rotation.sin_cos();
        (-z.re * s + z.im * c, z.re * c + z.im * s)
    }

    /// The same ζ with the variable scaled by `a`: g(z; ζ) = g(a z; ζ/a).
    pub fn scaled(&self, a: f64) -> ReducedZeta {
        ReducedZeta {
            k1: self.k1 / a,
            k2: self.k2 / a,
            rotation: self.rotation,
        }
    }
}

pub fn reduce_zeta(lambda: SpectralLambda, energy: Energy) -> Result<ReducedZeta> {
    let e = energy.require_negative_real()?;
    let kappa = (-e).sqrt();
    let rho = lambda.abs();
    let k1 = kappa * (rho - 1.0 / rho) * 0.5;
    let k2 = kappa * (rho + 1.0 / rho) * 0.5;
    if k1.abs() <= 1e-14 * k2 {
        return Err(Error::Degenerate(rho));
    }
    Ok(ReducedZeta {
        k1,
        k2,
        rotation: lambda.arg(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpSign {
    Plus,
    Minus,
}

/// e_{±λ}(z) = exp(±(i√E/2)(1 − 1/(λλ̄))(−zλ̄ + z̄λ)).
pub fn exp_factor(z: C64, lambda: SpectralLambda, energy: Energy, sign: ExpSign) -> C64 {
    let l = lambda.value();
    let sign = match sign {
        ExpSign::Plus => 1.0,
        ExpSign::Minus => -1.0,
    };
    let shape = 1.0 - 1.0 / l.norm_sqr();
    let exponent = I * energy.sqrt() * 0.5 * shape * (-z * l.conj() + z.conj() * l) * sign;
    if energy.is_negative_real() {
        // The exponent is purely imaginary; dropping the rounding residue
        // keeps |e_λ| = 1 exactly.
        C64::from_polar(1.0, exponent.im)
    } else {
        exponent.exp()
    }
}

/// e^{iζ·z} = exp((i√E/2)(λz̄ + z/λ)), the CGO exponential.
pub fn cgo_exponential(z: C64, lambda: SpectralLambda, energy: Energy) -> C64 {
    let l = lambda.value();
    (I * energy.sqrt() * 0.5 * (l * z.conj() + z / l)).exp()
}

/// The 2^m × 2^m periodic grid on [−s, s)² with nodes z_jk = −s + h(j, k).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicGrid {
    pub m: u32,
    pub half_width: f64,
}

impl PeriodicGrid {
    pub fn new(m: u32, half_width: f64) -> Result<Self> {
        if !(2..=13).contains(&m) {
            return Err(Error::InvalidArgument(format!(
                "grid exponent {m} outside 2..=13"
            )));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid half-width must be positive, got {half_width}"
            )));
        }
        Ok(PeriodicGrid { m, half_width })
    }

    /// A z-grid for the Lippmann-Schwinger solver: at least 64 points per
    /// side and wide enough to hold the unit disk.
    pub fn z_grid(m: u32, half_width: f64) -> Result<Self> {
        if m < 6 {
            return Err(Error::InvalidArgument(format!(
                "z-grids need 2^m >= 64, got m = {m}"
            )));
        }
        if half_width <= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "z-grid half-width must exceed 1, got {half_width}"
            )));
        }
        Self::new(m, half_width)
    }

    pub fn n(&self) -> usize {
        1usize << self.m
    }

    pub fn len(&self) -> usize {
        self.n() * self.n()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n() as f64
    }

    pub fn coord(&self, j: usize) -> f64 {
        -self.half_width + self.spacing() * j as f64
    }

    /// Node (j, k); x₁ runs along j, x₂ along k.
    pub fn point(&self, j: usize, k: usize) -> C64 {
        C64::new(self.coord(j), self.coord(k))
    }

    /// Node at flat index `idx = k·n + j`.
    pub fn point_at(&self, idx: usize) -> C64 {
        let n = self.n();
        self.point(idx % n, idx / n)
    }

    pub fn points(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.len()).map(move |i| self.point_at(i))
    }

    /// Flat index of the node nearest to `z`, if `z` lies inside the grid.
    pub fn nearest(&self, z: C64) -> Option<usize> {
        let h = self.spacing();
        let n = self.n() as f64;
        let j = ((z.re + self.half_width) / h).round();
        let k = ((z.im + self.half_width) / h).round();
        if j < 0.0 || k < 0.0 || j >= n || k >= n {
            None
        } else {
            Some(k as usize * self.n() + j as usize)
        }
    }

    /// Offset of index `j` in the wrapped (FFT) ordering: 0, 1, …, n/2−1, −n/2, …, −1.
    pub fn wrapped_offset(&self, j: usize) -> f64 {
        let n = self.n();
        let signed = if j < n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        };
        signed * self.spacing()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn lam(re: f64, im: f64) -> SpectralLambda {
        SpectralLambda::new(C64::new(re, im)).unwrap()
    }

    #[test]
    fn zeta_at_unit_lambda() {
        let z = lambda_to_zeta(lam(1.0, 0.0), Energy::real(-1.0));
        assert!((z.zeta1 - I).norm() < 1e-15);
        assert!(z.zeta2.norm() < 1e-15);
        assert!((z.dot_self() + 1.0).norm() < 1e-15);
    }

    #[test]
    fn zeta_at_lambda_two() {
        let z = lambda_to_zeta(lam(2.0, 0.0), Energy::real(-1.0));
        assert!((z.zeta1 - C64::new(0.0, 1.25)).norm() < 1e-15);
        assert!((z.zeta2 - C64::new(0.75, 0.0)).norm() < 1e-15);
        assert!((z.dot_self() + 1.0).norm() < 1e-14);
    }

    #[test]
    fn zeta_identities_off_axis() {
        let e = Energy::real(-4.0);
        let l = lam(1.0, 1.0);
        let z = lambda_to_zeta(l, e);
        assert!((z.dot_self() + 4.0).norm() < 1e-12);
        let back = (z.zeta1 + I * z.zeta2) / e.sqrt();
        assert!((back - l.value()).norm() < 1e-12);
    }

    #[test]
    fn zero_lambda_rejected() {
        assert!(matches!(
            SpectralLambda::new(C64::new(0.0, 0.0)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn reduce_lambda_two() {
        let r = reduce_zeta(lam(2.0, 0.0), Energy::real(-1.0)).unwrap();
        assert!((r.k1 - 0.75).abs() < 1e-15);
        assert!((r.k2 - 1.25).abs() < 1e-15);
        assert!((r.energy() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduce_rotated_lambda_keeps_k() {
        let l = SpectralLambda::new(C64::from_polar(2.0, PI / 3.0)).unwrap();
        let r = reduce_zeta(l, Energy::real(-1.0)).unwrap();
        assert!((r.k1 - 0.75).abs() < 1e-14);
        assert!((r.k2 - 1.25).abs() < 1e-14);
        assert!((r.rotation - PI / 3.0).abs() < 1e-15);
    }

    #[test]
    fn reduce_frame_maps_zeta_to_axes() {
        let l = SpectralLambda::new(C64::from_polar(1.7, 2.1)).unwrap();
        let e = Energy::real(-2.0);
        let z = lambda_to_zeta(l, e);
        let r = reduce_zeta(l, e).unwrap();
        let re = C64::new(z.zeta1.re, z.zeta2.re);
        let im = C64::new(z.zeta1.im, z.zeta2.im);
        let (a1, a2) = r.to_reduced(re);
        let (b1, b2) = r.to_reduced(im);
        assert!((a1 - r.k1).abs() < 1e-13 && a2.abs() < 1e-13);
        assert!(b1.abs() < 1e-13 && (b2 - r.k2).abs() < 1e-13);
    }

    #[test]
    fn reduce_unit_circle_is_degenerate() {
        assert!(matches!(
            reduce_zeta(lam(1.0, 0.0), Energy::real(-1.0)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn exp_factor_identity_on_unit_circle() {
        let l = SpectralLambda::new(C64::from_polar(1.0, 0.7)).unwrap();
        let v = exp_factor(C64::new(0.3, -0.8), l, Energy::real(-1.0), ExpSign::Plus);
        assert!((v - 1.0).norm() < 1e-15);
    }

    #[test]
    fn exp_factor_unimodular() {
        let v = exp_factor(C64::new(1.0, 0.0), lam(2.0, 0.0), Energy::real(-1.0), ExpSign::Plus);
        assert!((v.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exp_factor_reciprocal() {
        let z = C64::new(0.3, 0.4);
        let l = lam(2.0, 1.0);
        let e = Energy::real(-1.0);
        let p = exp_factor(z, l, e, ExpSign::Plus) * exp_factor(z, l, e, ExpSign::Minus);
        assert!((p - 1.0).norm() < 1e-14);
    }

    #[test]
    fn guard_band() {
        assert!(lam(1.02, 0.0).check_guard(0.05).is_err());
        assert!(lam(1.2, 0.0).check_guard(0.05).is_ok());
    }

    #[test]
    fn grid_geometry() {
        let g = PeriodicGrid::z_grid(6, 2.1).unwrap();
        assert_eq!(g.n(), 64);
        assert!((g.spacing() - 4.2 / 64.0).abs() < 1e-15);
        assert_eq!(g.point(0, 0), C64::new(-2.1, -2.1));
        assert_eq!(g.nearest(g.point(5, 9)), Some(9 * 64 + 5));
        assert!(PeriodicGrid::z_grid(5, 2.1).is_err());
        assert!(PeriodicGrid::z_grid(6, 0.9).is_err());
    }

    proptest! {
        #[test]
        fn zeta_roundtrip(r in 0.05f64..20.0, th in -PI..PI, e in -9.0f64..-0.01) {
            let l = SpectralLambda::new(C64::from_polar(r, th)).unwrap();
            let en = Energy::real(e);
            let z = lambda_to_zeta(l, en);
            let scale = 1.0 + r + 1.0 / r;
            prop_assert!((z.dot_self() - e).norm() < 1e-12 * scale * scale * e.abs().max(1.0));
            let back = (z.zeta1 + I * z.zeta2) / en.sqrt();
            prop_assert!((back - l.value()).norm() < 1e-12 * scale);
        }

        #[test]
        fn reduced_invariants(r in 0.05f64..20.0, th in -PI..PI, e in -9.0f64..-0.01) {
            prop_assume!((r - 1.0).abs() > 1e-6);
            let l = SpectralLambda::new(C64::from_polar(r, th)).unwrap();
            let red = reduce_zeta(l, Energy::real(e)).unwrap();
            prop_assert!(red.k2 > red.k1.abs() && red.k1.abs() > 0.0);
            prop_assert!((red.energy() - e).abs() < 1e-12 * (red.k2 * red.k2).max(1.0));
        }

        #[test]
        fn exponentials_unimodular_and_conjugate(
            r in 0.05f64..20.0, th in -PI..PI, x in -2.0f64..2.0, y in -2.0f64..2.0, e in -9.0f64..-0.01
        ) {
            let l = SpectralLambda::new(C64::from_polar(r, th)).unwrap();
            let en = Energy::real(e);
            let z = C64::new(x, y);
            let p = exp_factor(z, l, en, ExpSign::Plus);
            let m = exp_factor(z, l, en, ExpSign::Minus);
            prop_assert!((p.norm() - 1.0).abs() < 1e-13);
            prop_assert!((m - p.conj()).norm() < 1e-13);
        }
    }
}
