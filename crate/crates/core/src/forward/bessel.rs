use crate::spectral::C64;

/// I_{n+1}(x)/I_n(x) by backward recurrence of the continued fraction
/// r_n = 1/(2(n+1)/x + r_{n+1}).
pub fn bessel_i_ratio(n: u32, x: C64) -> C64 {
    if x.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let start = n as usize + 64 + 4 * x.norm().ceil() as usize;
    let mut r = C64::new(0.0, 0.0);
    for k in (n as usize..start).rev() {
        r = 1.0 / (2.0 * (k as f64 + 1.0) / x + r);
    }
    r
}

/// Dirichlet-to-Neumann eigenvalue of −Δ + τ on the unit disk for e^{inθ}:
/// √τ·I_n'(√τ)/I_n(√τ) = |n| + √τ·I_{|n|+1}(√τ)/I_{|n|}(√τ).
pub fn disk_dn_eigenvalue(n: i32, tau: C64) -> C64 {
    let x = tau.sqrt();
    let m = n.unsigned_abs();
    m as f64 + x * bessel_i_ratio(m, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Power series Σ (x/2)^{2k+n}/(k!(k+n)!).
    fn bessel_i_series(n: u32, x: C64) -> C64 {
        let h = x / 2.0;
        let mut term = h.powu(n) / (1..=n).map(|j| j as f64).product::<f64>();
        let mut sum = term;
        for k in 1..200 {
            term = term * h * h / (k as f64 * (k + n) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn ratio_matches_series() {
        for x in [C64::new(1.0, 0.0), C64::new(0.3, 0.0), C64::new(4.0, 1.5), C64::new(1.109, 0.018)] {
            for n in [0, 1, 2, 7, 16] {
                let want = bessel_i_series(n + 1, x) / bessel_i_series(n, x);
                let got = bessel_i_ratio(n, x);
                assert!((got - want).norm() < 1e-13 * want.norm().max(1e-300), "n={n} x={x}");
            }
        }
    }

    #[test]
    fn homogeneous_dn_values() {
        let one = C64::new(1.0, 0.0);
        assert!((disk_dn_eigenvalue(0, one).re - 0.446_389_965_9).abs() < 1e-10);
        for n in 1..=16 {
            assert_eq!(disk_dn_eigenvalue(n, one), disk_dn_eigenvalue(-n, one));
            let v = disk_dn_eigenvalue(n, one).re;
            assert!(v > disk_dn_eigenvalue(n - 1, one).re);
            // |n| + 1/(2(|n|+1)) + O(n⁻³)
            let nf = n as f64;
            assert!((v - nf - 1.0 / (2.0 * (nf + 1.0))).abs() < 0.5 / (nf * nf * nf));
        }
    }
}
