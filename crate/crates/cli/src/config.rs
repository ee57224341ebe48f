//! Flat key = value run configuration. Every key is also a `--flag`; flags
//! win over the file, the file wins over built-in defaults.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    // spectral / Green's function
    #[arg(long, allow_hyphen_values = true)]
    pub energy: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_re: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_im: Option<f64>,
    #[arg(long)]
    pub guard: Option<f64>,
    #[arg(long)]
    pub z_half_width: Option<f64>,
    #[arg(long)]
    pub z_count: Option<usize>,

    // test potential
    #[arg(long)]
    pub case: Option<String>,

    // forward problem
    #[arg(long)]
    pub triangles: Option<usize>,
    #[arg(long)]
    pub n_modes: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dn_in: Option<PathBuf>,
    #[arg(long)]
    pub dn0_in: Option<PathBuf>,

    // scattering and truncation
    #[arg(long)]
    pub nb: Option<usize>,
    #[arg(long)]
    pub lambda_m: Option<u32>,
    #[arg(long)]
    pub lambda_width_factor: Option<f64>,
    #[arg(long)]
    pub radial_step: Option<f64>,
    /// `radial` or `grid`.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub trunc_a: Option<f64>,
    #[arg(long)]
    pub trunc_b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub trunc_phi: Option<f64>,
    #[arg(long)]
    pub r1: Option<f64>,
    /// `plain` or `conjugate`.
    #[arg(long)]
    pub fill: Option<String>,

    // reconstruction
    #[arg(long)]
    pub dz: Option<f64>,
    #[arg(long)]
    pub r_star: Option<f64>,
    #[arg(long)]
    pub width: Option<f64>,
    /// `moment` or `outer_band`.
    #[arg(long)]
    pub q0_estimate: Option<String>,
    #[arg(long)]
    pub band_fraction: Option<f64>,
    #[arg(long)]
    pub z_step: Option<f64>,
    #[arg(long)]
    pub dbar_tol: Option<f64>,
    #[arg(long)]
    pub dbar_max_iter: Option<usize>,

    // LS grids, Green validation and the exceptional scan
    #[arg(long)]
    pub ls_m: Option<u32>,
    #[arg(long)]
    pub ls_half_width: Option<f64>,
    #[arg(long)]
    pub ls_tol: Option<f64>,
    /// Comma-separated grid exponents, e.g. "6,7".
    #[arg(long)]
    pub grid_exponents: Option<String>,
    #[arg(long)]
    pub d_lambda: Option<f64>,
    #[arg(long)]
    pub lambda_min: Option<f64>,
    #[arg(long)]
    pub lambda_max: Option<f64>,
    #[arg(long)]
    pub lambda_count: Option<usize>,
    /// `alpha_phi` or `conductivity_plus_alpha_phi`.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_max: Option<f64>,
    #[arg(long)]
    pub alpha_count: Option<usize>,
    /// Scan flag threshold on max |μ|.
    #[arg(long)]
    pub blowup: Option<f64>,

    // DOT scene
    #[arg(long)]
    pub mu_a_bg: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_a_peak: Option<f64>,
    #[arg(long)]
    pub mu_a_radius: Option<f64>,
    #[arg(long)]
    pub mu_s_bg: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu_s_peak: Option<f64>,
    #[arg(long)]
    pub mu_s_center: Option<f64>,
    #[arg(long)]
    pub mu_s_radius: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub g: Option<f64>,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub c_medium: Option<f64>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Keys set in `over` replace those in `self`.
    pub fn overlay(self, over: &Config) -> Result<Config> {
        let mut base = serde_json::to_value(self)?;
        let top = serde_json::to_value(over)?;
        let (Some(b), Some(t)) = (base.as_object_mut(), top.as_object()) else {
            bail!("config is not a table");
        };
        for (k, v) in t {
            if !v.is_null() {
                b.insert(k.clone(), v.clone());
            }
        }
        Ok(serde_json::from_value(base)?)
    }
}
