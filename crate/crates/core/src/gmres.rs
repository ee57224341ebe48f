//! Restart-free GMRES over real or complex vectors.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use crate::spectral::C64;

pub trait Scalar:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
{
    fn zero() -> Self;
    fn from_f64(x: f64) -> Self;
    fn conj(self) -> Self;
    fn abs(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn conj(self) -> Self {
        self
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn from_f64(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.conj() * *y)
}

pub fn norm<T: Scalar>(a: &[T]) -> f64 {
    a.iter().map(|x| x.abs() * x.abs()).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub tol: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone)]
pub struct GmresOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    /// ‖b − Ax‖/‖b‖ recomputed from the returned x.
    pub residual: f64,
    /// Arnoldi residual estimate after each iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Solves Ax = b. `apply` must be linear over T.
pub fn gmres<T, A>(mut apply: A, b: &[T], x0: Option<&[T]>, opts: &GmresOptions) -> GmresOutcome<T>
where
    T: Scalar,
    A: FnMut(&[T]) -> Vec<T>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x: Vec<T> = match x0 {
        Some(v) => v.to_vec(),
        None => vec![T::zero(); n],
    };
    if bnorm == 0.0 {
        return GmresOutcome {
            x: vec![T::zero(); n],
            iterations: 0,
            residual: 0.0,
            history: vec![],
            converged: true,
        };
    }
    let residual_of = |apply: &mut A, x: &[T]| -> Vec<T> {
        let ax = apply(x);
        b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect()
    };
    let r0 = residual_of(&mut apply, &x);
    let beta = norm(&r0);
    if beta / bnorm <= opts.tol {
        return GmresOutcome {
            x,
            iterations: 0,
            residual: beta / bnorm,
            history: vec![beta / bnorm],
            converged: true,
        };
    }
    let inv = T::from_f64(1.0 / beta);
    let mut basis: Vec<Vec<T>> = vec![r0.iter().map(|v| *v * inv).collect()];
    // Columns of the rotated Hessenberg matrix.
    let mut hcols: Vec<Vec<T>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<T> = Vec::new();
    let mut g: Vec<T> = vec![T::from_f64(beta)];
    let mut history = Vec::new();
    let mut k = 0;
    while k < opts.max_iter {
        let mut w = apply(&basis[k]);
        let mut h = vec![T::zero(); k + 2];
        // Two passes of modified Gram-Schmidt.
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(v, &w);
                h[i] += c;
                for (wi, vi) in w.iter_mut().zip(v) {
                    *wi -= c * *vi;
                }
            }
        }
        let hnext = norm(&w);
        h[k + 1] = T::from_f64(hnext);
        for i in 0..k {
            let (a, bb) = (h[i], h[i + 1]);
            h[i] = T::from_f64(cs[i]) * a + sn[i] * bb;
            h[i + 1] = -sn[i].conj() * a + T::from_f64(cs[i]) * bb;
        }
        let (a, bb) = (h[k], h[k + 1]);
        let (c, s, r) = givens(a, bb);
        h[k] = r;
        h[k + 1] = T::zero();
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = T::from_f64(c) * gk;
        g.push(-s.conj() * gk);
        hcols.push(h);
        k += 1;
        let est = g[k].abs() / bnorm;
        history.push(est);
        if est <= opts.tol || hnext <= 1e-14 * beta || !est.is_finite() {
            break;
        }
        let inv = T::from_f64(1.0 / hnext);
        basis.push(w.iter().map(|v| *v * inv).collect());
    }
    // Back substitution on the k × k triangle.
    let mut y = vec![T::zero(); k];
    for i in (0..k).rev() {
        let mut acc = g[i];
        for j in (i + 1)..k {
            acc -= hcols[j][i] * y[j];
        }
        y[i] = acc / hcols[i][i];
    }
    for (yi, v) in y.iter().zip(&basis) {
        for (xj, vj) in x.iter_mut().zip(v) {
            *xj += *yi * *vj;
        }
    }
    let residual = norm(&residual_of(&mut apply, &x)) / bnorm;
    GmresOutcome {
        x,
        iterations: k,
        converged: history.last().is_some_and(|e| *e <= opts.tol) && residual <= 10.0 * opts.tol,
        residual,
        history,
    }
}

fn givens<T: Scalar>(a: T, b: T) -> (f64, T, T) {
    let (aa, ba) = (a.abs(), b.abs());
    if ba == 0.0 {
        return (1.0, T::zero(), a);
    }
    if aa == 0.0 {
        return (0.0, b.conj() / T::from_f64(ba), T::from_f64(ba));
    }
    let t = aa.hypot(ba);
    let phase = a / T::from_f64(aa);
    (aa / t, phase * b.conj() / T::from_f64(t), phase * T::from_f64(t))
}
