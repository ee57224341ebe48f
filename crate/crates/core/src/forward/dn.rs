use std::io::{BufRead, Write};

use faer::Mat;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::bessel::disk_dn_eigenvalue;
use crate::error::{Error, Result};
use crate::spectral::{Energy, C64};

/// DN map in the Fourier basis e^{inθ}/√(2π), n = −N..N; row ℓ, column n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DNMatrix {
    pub n_modes: usize,
    /// Row-major, (2N+1)².
    pub entries: Vec<C64>,
}

impl DNMatrix {
    pub fn zeros(n_modes: usize) -> Self {
        let d = 2 * n_modes + 1;
        DNMatrix {
            n_modes,
            entries: vec![C64::new(0.0, 0.0); d * d],
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes + 1
    }

    fn offset(&self, l: i32, n: i32) -> usize {
        let nn = self.n_modes as i32;
        assert!(l.abs() <= nn && n.abs() <= nn, "mode ({l}, {n}) out of range");
        (l + nn) as usize * self.dim() + (n + nn) as usize
    }

    pub fn get(&self, l: i32, n: i32) -> C64 {
        self.entries[self.offset(l, n)]
    }

    pub fn set(&mut self, l: i32, n: i32, v: C64) {
        let i = self.offset(l, n);
        self.entries[i] = v;
    }

    pub fn modes(&self) -> std::ops::RangeInclusive<i32> {
        -(self.n_modes as i32)..=self.n_modes as i32
    }

    pub fn to_mat(&self) -> Mat<C64> {
        let d = self.dim();
        Mat::from_fn(d, d, |i, j| self.entries[i * d + j])
    }

    pub fn from_mat(n_modes: usize, m: &Mat<C64>) -> Self {
        let d = 2 * n_modes + 1;
        DNMatrix {
            n_modes,
            entries: (0..d * d).map(|k| m[(k / d, k % d)]).collect(),
        }
    }

    pub fn sub(&self, other: &DNMatrix) -> Result<DNMatrix> {
        if self.n_modes != other.n_modes {
            return Err(Error::InvalidArgument(format!(
                "DN matrices have N = {} and N = {}",
                self.n_modes, other.n_modes
            )));
        }
        Ok(DNMatrix {
            n_modes: self.n_modes,
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn spectral_norm(&self) -> f64 {
        self.to_mat()
            .singular_values()
            .map(|s| s.into_iter().fold(0.0, f64::max))
            .unwrap_or(f64::NAN)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ‖off-diagonal‖_F / ‖diagonal‖_F.
    pub fn off_diagonal_ratio(&self) -> f64 {
        let d = self.dim();
        let (mut on, mut off) = (0.0, 0.0);
        for (k, v) in self.entries.iter().enumerate() {
            if k / d == k % d {
                on += v.norm_sqr();
            } else {
                off += v.norm_sqr();
            }
        }
        (off / on).sqrt()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "N")?;
        writeln!(w, "{}", self.n_modes)?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["l", "n", "re", "im"])?;
        for l in self.modes() {
            for n in self.modes() {
                let v = self.get(l, n);
                out.write_record([l.to_string(), n.to_string(), v.re.to_string(), v.im.to_string()])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(mut r: R) -> Result<Self> {
        let mut line = String::new();
        r.read_line(&mut line)?;
        if line.trim() != "N" {
            return Err(Error::Parse(format!("expected `N` header, got {:?}", line.trim())));
        }
        line.clear();
        r.read_line(&mut line)?;
        let n_modes: usize = line
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("bad mode count {:?}: {e}", line.trim())))?;
        let mut m = DNMatrix::zeros(n_modes);
        let mut seen = 0;
        for rec in csv::Reader::from_reader(r).records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse("short DN row".into()));
            let num = |i: usize| -> Result<f64> {
                field(i)?.trim().parse().map_err(|e| Error::Parse(format!("{e}")))
            };
            let l = num(0)? as i32;
            let n = num(1)? as i32;
            if l.unsigned_abs() as usize > n_modes || n.unsigned_abs() as usize > n_modes {
                return Err(Error::Parse(format!("mode ({l}, {n}) exceeds N = {n_modes}")));
            }
            m.set(l, n, C64::new(num(2)?, num(3)?));
            seen += 1;
        }
        if seen != m.entries.len() {
            return Err(Error::Parse(format!("expected {} DN rows, found {seen}", m.entries.len())));
        }
        Ok(m)
    }
}

/// Exact DN matrix of −Δ − E (q₀ = 0) on the unit disk.
pub fn dn_homogeneous(energy: Energy, n_modes: usize) -> DNMatrix {
    let mut m = DNMatrix::zeros(n_modes);
    let tau = -energy.value();
    for n in m.modes() {
        m.set(n, n, disk_dn_eigenvalue(n, tau));
    }
    m
}

/// L + cG with G standard normal and c set so that ‖cG‖₂ = target_rel·‖L‖₂.
pub fn add_noise(l: &DNMatrix, target_rel: f64, seed: u64) -> Result<DNMatrix> {
    if !(target_rel >= 0.0 && target_rel.is_finite()) {
        return Err(Error::InvalidArgument(format!("noise level must be >= 0, got {target_rel}")));
    }
    if target_rel == 0.0 {
        return Ok(l.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DNMatrix {
        n_modes: l.n_modes,
        entries: (0..l.entries.len())
            .map(|_| C64::new(StandardNormal.sample(&mut rng), 0.0))
            .collect(),
    };
    let c = target_rel * l.spectral_norm() / g.spectral_norm();
    Ok(DNMatrix {
        n_modes: l.n_modes,
        entries: l.entries.iter().zip(&g.entries).map(|(a, b)| a + b * c).collect(),
    })
}
