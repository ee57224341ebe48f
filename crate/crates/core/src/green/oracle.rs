// Independent reference values for g_ζ, shared by unit and integration tests.
//
// Integrating the Fourier representation over ξ₁ in closed form leaves a
// single line integral
//
//   g(x₁ + ix₂) = e^{−ik₁x₁}/(4π) ∫_ℝ e^{iηx₂} e^{−|x₁|s}/s dη,   s² = η² − k₁² + 2ik₂η,
//
// which converges absolutely for x₁ ≠ 0. It is evaluated here by adaptive
// Gauss-Kronrod (7/15) on the full line, without using any of the contour
// deformations or symmetries the production code relies on.

#![allow(dead_code)]

use num_complex::Complex64 as C;

const XK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> C>(f: &F, a: f64, b: f64) -> (C, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let x = h * XK[j];
        let s = f(c - x) + f(c + x);
        k += s * WK[j];
        if j % 2 == 1 {
            g += s * WG[j / 2];
        }
    }
    (k * h, ((k - g) * h).norm())
}

fn adapt<F: Fn(f64) -> C>(f: &F, a: f64, b: f64, density: f64, depth: u32) -> C {
    let (v, err) = gk15(f, a, b);
    if err <= (density * (b - a)).max(1e-15 * v.norm()) || depth == 0 {
        return v;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, density, depth - 1) + adapt(f, m, b, density, depth - 1)
}

/// Adaptive integral of `f` over [a, b] split into `pieces` starting cells,
/// with absolute error about `tol`.
pub fn adaptive<F: Fn(f64) -> C>(f: &F, a: f64, b: f64, pieces: usize, tol: f64) -> C {
    let h = (b - a) / pieces as f64;
    let density = tol / (b - a);
    (0..pieces)
        .map(|i| adapt(f, a + h * i as f64, a + h * (i + 1) as f64, density, 30))
        .sum()
}

/// g_ζ(x₁ + ix₂) for ζ = (k₁, 0) + i(0, k₂), x₁ ≠ 0.
pub fn fourier_line_green(x1: f64, x2: f64, k1: f64, k2: f64) -> C {
    assert!(x1 != 0.0, "line representation needs x1 != 0");
    let ax = x1.abs();
    let f = |eta: f64| {
        let s = C::new(eta * eta - k1 * k1, 2.0 * k2 * eta).sqrt();
        C::from_polar(1.0, eta * x2) * (-ax * s).exp() / s
    };
    // |integrand| ≤ e^{−|x₁||η|}/|η| far out.
    let l = (36.0 + (1.0 / ax).ln().max(0.0)) / ax + 2.0 * k1.abs();
    let pieces = ((2.0 * l) * (1.0 + x2.abs())).ceil().max(16.0) as usize;
    let v = adaptive(&f, -l, l, pieces, 1e-12);
    C::from_polar(1.0, -k1 * x1) * v / (4.0 * std::f64::consts::PI)
}
