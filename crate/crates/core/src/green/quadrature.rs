use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::spectral::C64;

/// Composite Gauss-Legendre settings.
///
/// `panels` is a floor on the number of panels laid over each integration
/// range; the layout itself is graded towards the integrand's near-singular
/// point and sized to its oscillation, then every panel is halved until two
/// successive sums agree to `target_digits`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub nodes_per_panel: usize,
    pub panels: usize,
    pub target_digits: u32,
    pub max_doublings: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes_per_panel: 16,
            panels: 4,
            target_digits: 8,
            max_doublings: 7,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> crate::Result<()> {
        if self.nodes_per_panel < 4 || self.nodes_per_panel > MAX_NODES {
            return Err(crate::Error::InvalidArgument(format!(
                "nodes_per_panel must lie in 4..={MAX_NODES}, got {}",
                self.nodes_per_panel
            )));
        }
        if self.panels == 0 || self.target_digits == 0 || self.target_digits > 14 {
            return Err(crate::Error::InvalidArgument(
                "panels and target_digits must be positive (digits <= 14)".into(),
            ));
        }
        Ok(())
    }

    fn tolerance(&self) -> f64 {
        10f64.powi(-(self.target_digits as i32))
    }
}

const MAX_NODES: usize = 64;

/// Nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn build_rule(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    GaussRule { nodes, weights }
}

/// The n-point rule, built once per n and shared.
pub fn gauss_legendre(n: usize) -> &'static GaussRule {
    static RULES: OnceLock<Vec<OnceLock<GaussRule>>> = OnceLock::new();
    let table = RULES.get_or_init(|| (0..=MAX_NODES).map(|_| OnceLock::new()).collect());
    assert!((1..=MAX_NODES).contains(&n), "unsupported rule size {n}");
    table[n].get_or_init(|| build_rule(n))
}

/// Breakpoints on [a, b]: geometric panels of width grade·4^k while they are
/// narrower than `width`, then uniform panels of `width`.
pub(crate) fn graded_breaks(a: f64, b: f64, grade: f64, width: f64, min_panels: usize) -> Vec<f64> {
    let len = b - a;
    let width = width.min(len / min_panels as f64).max(len * 1e-4);
    let mut breaks = vec![a];
    let mut step = if grade > 0.0 && grade < width { grade } else { width };
    let mut x = a;
    while x < b {
        x = (x + step).min(b);
        if b - x < 1e-3 * step {
            x = b;
        }
        breaks.push(x);
        step = (step * 4.0).min(width);
    }
    breaks
}

fn sum_panels<F: Fn(f64) -> C64>(f: &F, breaks: &[f64], rule: &GaussRule) -> C64 {
    let mut total = C64::new(0.0, 0.0);
    for w in breaks.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = 0.5 * (w[1] + w[0]);
        let mut acc = C64::new(0.0, 0.0);
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            acc += f(mid + half * x) * *wt;
        }
        total += acc * half;
    }
    total
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Converged {
    pub value: C64,
    pub change: f64,
    pub ok: bool,
}

/// Composite rule over `breaks`, halving all panels until the sum is stable.
pub(crate) fn integrate<F: Fn(f64) -> C64>(f: &F, mut breaks: Vec<f64>, spec: &QuadratureSpec) -> Converged {
    let rule = gauss_legendre(spec.nodes_per_panel);
    let tol = spec.tolerance();
    let mut prev = sum_panels(f, &breaks, rule);
    let mut change = f64::INFINITY;
    for _ in 0..spec.max_doublings {
        let mut finer = Vec::with_capacity(2 * breaks.len());
        for w in breaks.windows(2) {
            finer.push(w[0]);
            finer.push(0.5 * (w[0] + w[1]));
        }
        finer.push(*breaks.last().unwrap());
        breaks = finer;
        let next = sum_panels(f, &breaks, rule);
        change = (next - prev).norm();
        prev = next;
        if !prev.re.is_finite() || !prev.im.is_finite() {
            break;
        }
        if change <= tol * prev.norm() + 1e-14 {
            return Converged {
                value: prev,
                change,
                ok: true,
            };
        }
    }
    Converged {
        value: prev,
        change,
        ok: false,
    }
}
