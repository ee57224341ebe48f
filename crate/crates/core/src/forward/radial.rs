use super::dn::DNMatrix;
use crate::spectral::C64;

/// DN matrix for a radial q by shooting on each Fourier mode.
///
/// With u = r^{|n|}v the mode equation u'' + u'/r − n²u/r² = qu becomes
/// v'' + (2|n|+1)v'/r = qv, regular at the origin. The DN entry is
/// |n| + v'(1)/v(1). RK4 from r₀ = 10⁻³ with the series start
/// v = 1 + q(0)r²/(4(|n|+1)).
pub fn dn_radial<Q: Fn(f64) -> C64>(q: Q, n_modes: usize, steps: usize) -> DNMatrix {
    let mut out = DNMatrix::zeros(n_modes);
    let r0 = 1e-3;
    let h = (1.0 - r0) / steps as f64;
    for m in 0..=n_modes {
        let a = 2.0 * m as f64 + 1.0;
        let q0 = q(0.0);
        let rhs = |r: f64, v: C64, w: C64| (w, q(r) * v - w * (a / r));
        let mut v = 1.0 + q0 * r0 * r0 / (4.0 * (m as f64 + 1.0));
        let mut w = q0 * r0 / (2.0 * (m as f64 + 1.0));
        for k in 0..steps {
            let r = r0 + k as f64 * h;
            let (k1v, k1w) = rhs(r, v, w);
            let (k2v, k2w) = rhs(r + 0.5 * h, v + k1v * (0.5 * h), w + k1w * (0.5 * h));
            let (k3v, k3w) = rhs(r + 0.5 * h, v + k2v * (0.5 * h), w + k2w * (0.5 * h));
            let (k4v, k4w) = rhs(r + h, v + k3v * h, w + k3w * h);
            v += (k1v + 2.0 * k2v + 2.0 * k3v + k4v) * (h / 6.0);
            w += (k1w + 2.0 * k2w + 2.0 * k3w + k4w) * (h / 6.0);
        }
        let entry = m as f64 + w / v;
        out.set(m as i32, m as i32, entry);
        out.set(-(m as i32), -(m as i32), entry);
    }
    out
}
