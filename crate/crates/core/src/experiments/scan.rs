//! Map of radial t over (α, |λ|) for the families αφ and Δ√σ/√σ + αφ.
//! A cell is flagged when the LS solve fails to converge or its solution
//! blows up; exceptional circles show up as flagged cells and abrupt sign
//! changes of t.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ls::{scattering_direct, solve_with_kernel, LsKernel, LsOptions, PotentialField};
use crate::profiles::{family_sigma, phi, PotentialProfile, RadialFunction};
use crate::spectral::{Energy, PeriodicGrid, SpectralLambda, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    AlphaPhi,
    ConductivityPlusAlphaPhi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialFamily {
    pub kind: FamilyKind,
    pub sigma: RadialFunction,
    pub phi: RadialFunction,
}

impl PotentialFamily {
    pub fn new(kind: FamilyKind) -> Self {
        PotentialFamily {
            kind,
            sigma: family_sigma(),
            phi: phi(),
        }
    }

    pub fn profile(&self, alpha: f64) -> PotentialProfile {
        let direct = self.phi.scaled(alpha);
        match self.kind {
            FamilyKind::AlphaPhi => PotentialProfile::direct(direct),
            FamilyKind::ConductivityPlusAlphaPhi => PotentialProfile {
                direct,
                sigma: Some(self.sigma.clone()),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub alpha: f64,
    pub lambda_abs: f64,
    pub t: C64,
    pub flagged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub m: u32,
    pub half_width: f64,
    pub ls: LsOptions,
    /// Flag threshold on max |μ|. Pole crossings fall between α samples, so
    /// GMRES usually still converges there; the solution size does not.
    pub blowup: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        let mut ls = LsOptions::default();
        // The sweep starts at |λ| = 1.01.
        ls.green.guard = 0.005;
        ScanOptions {
            m: 8,
            half_width: 2.1,
            ls,
            blowup: 20.0,
        }
    }
}

/// `n` equispaced values from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

const HEADER: &str = "lambda_abs,alpha,re_t,im_t,flagged,iterations";

/// One |λ| column: a single kernel shared by every α.
pub fn scan_column(
    family: &PotentialFamily,
    alphas: &[f64],
    lambda_abs: f64,
    energy: Energy,
    opts: &ScanOptions,
) -> Result<Vec<ScanCell>> {
    let grid = PeriodicGrid::z_grid(opts.m, opts.half_width)?;
    let kernel = LsKernel::build(grid, SpectralLambda::real(lambda_abs)?, energy, &opts.ls.green)?;
    alphas
        .par_iter()
        .map(|&alpha| {
            let q = PotentialField::from_profile(grid, &family.profile(alpha))?;
            let zero = C64::new(0.0, 0.0);
            if q.is_zero() {
                return Ok(ScanCell { alpha, lambda_abs, t: zero, flagged: false, iterations: 0 });
            }
            Ok(match solve_with_kernel(&q, &kernel, &opts.ls) {
                Ok(mu) => ScanCell {
                    alpha,
                    lambda_abs,
                    t: scattering_direct(&q, &mu, energy)?,
                    flagged: mu.max_abs() > opts.blowup,
                    iterations: mu.iterations,
                },
                Err(Error::ExceptionalPointSuspected { iterations, .. }) => ScanCell {
                    alpha,
                    lambda_abs,
                    t: C64::new(f64::NAN, f64::NAN),
                    flagged: true,
                    iterations,
                },
                Err(e) => return Err(e),
            })
        })
        .collect()
}

/// Runs the scan column by column, appending each finished column to `csv`.
/// Columns already present in the file are skipped, so an interrupted run
/// resumes where it stopped and the file is identical to an uninterrupted one.
pub fn scan_exceptional(
    family: &PotentialFamily,
    alphas: &[f64],
    lambda_abs: &[f64],
    energy: Energy,
    opts: &ScanOptions,
    csv: &Path,
) -> Result<Vec<ScanCell>> {
    energy.require_negative_real()?;
    let done = completed_columns(csv, alphas.len())?;
    if done.is_empty() {
        let mut f = File::create(csv)?;
        writeln!(f, "{HEADER}")?;
    }
    for &r in lambda_abs {
        if done.contains(&r.to_bits()) {
            continue;
        }
        let cells = scan_column(family, alphas, r, energy, opts)?;
        let mut f = OpenOptions::new().append(true).open(csv)?;
        for c in &cells {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                c.lambda_abs, c.alpha, c.t.re, c.t.im, c.flagged as u8, c.iterations
            )?;
        }
        f.flush()?;
    }
    let all = read_scan_csv(csv)?;
    let wanted: HashSet<u64> = lambda_abs.iter().map(|r| r.to_bits()).collect();
    Ok(all.into_iter().filter(|c| wanted.contains(&c.lambda_abs.to_bits())).collect())
}

/// |λ| values with a full column in the checkpoint. A truncated trailing
/// column is cut off so it is recomputed.
fn completed_columns(csv: &Path, rows_per_column: usize) -> Result<HashSet<u64>> {
    if !csv.exists() {
        return Ok(HashSet::new());
    }
    let cells = match read_scan_csv(csv) {
        Ok(c) => c,
        Err(_) => return Ok(HashSet::new()),
    };
    let mut counts: Vec<(u64, usize)> = Vec::new();
    for c in &cells {
        let key = c.lambda_abs.to_bits();
        match counts.last_mut() {
            Some((k, n)) if *k == key => *n += 1,
            _ => counts.push((key, 1)),
        }
    }
    let full: Vec<u64> = counts.iter().filter(|(_, n)| *n == rows_per_column).map(|(k, _)| *k).collect();
    if full.len() != counts.len() {
        // Rewrite without the partial column.
        let keep: HashSet<u64> = full.iter().copied().collect();
        let mut f = File::create(csv)?;
        writeln!(f, "{HEADER}")?;
        for c in cells.iter().filter(|c| keep.contains(&c.lambda_abs.to_bits())) {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                c.lambda_abs, c.alpha, c.t.re, c.t.im, c.flagged as u8, c.iterations
            )?;
        }
    }
    Ok(full.into_iter().collect())
}

pub fn read_scan_csv(csv: &Path) -> Result<Vec<ScanCell>> {
    let f = BufReader::new(File::open(csv)?);
    let mut out = Vec::new();
    for line in f.lines().skip(1) {
        let line = line?;
        let p: Vec<&str> = line.split(',').collect();
        if p.len() != 6 {
            return Err(Error::InvalidArgument(format!("bad scan row: {line}")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::InvalidArgument(e.to_string()));
        out.push(ScanCell {
            lambda_abs: num(p[0])?,
            alpha: num(p[1])?,
            t: C64::new(num(p[2])?, num(p[3])?),
            flagged: p[4] == "1",
            iterations: p[5].parse().map_err(|_| Error::InvalidArgument(format!("bad scan row: {line}")))?,
        });
    }
    Ok(out)
}

/// Re t as an (α rows × |λ| columns) image, α increasing upward; flagged
/// cells are NaN.
pub fn scan_image(cells: &[ScanCell], alphas: &[f64], lambda_abs: &[f64]) -> (usize, usize, Vec<f64>) {
    let (w, h) = (lambda_abs.len(), alphas.len());
    let mut img = vec![f64::NAN; w * h];
    for c in cells {
        let i = lambda_abs.iter().position(|r| r.to_bits() == c.lambda_abs.to_bits());
        let j = alphas.iter().position(|a| a.to_bits() == c.alpha.to_bits());
        if let (Some(i), Some(j)) = (i, j) {
            img[j * w + i] = if c.flagged { f64::NAN } else { c.t.re };
        }
    }
    (w, h, img)
}
