use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use dbar_core::bie::{ScatteringGrid, SymmetryFill, TruncationSpec, DEFAULT_R1};
use dbar_core::dbar::DbarOptions;
use dbar_core::experiments::cases::{evaluate_case, simulate_case, CaseId, CaseOptions};
use dbar_core::experiments::dot::{dot_pipeline, DotOptions, DotScene};
use dbar_core::experiments::green_validation::{self, validate_green, GreenValidationOptions};
use dbar_core::experiments::pipeline::{scattering_from_matrices, PipelineOptions, ScatteringData, Sweep};
use dbar_core::experiments::scan::{linspace, scan_exceptional, scan_image, FamilyKind, PotentialFamily, ScanOptions};
use dbar_core::forward::{add_noise, assemble_dn, nodal_values, DNMatrix, DiskMesh};
use dbar_core::green::{green_table, write_green_csv, FaddeevGreen, GreenOptions};
use dbar_core::io::{scattering_png, write_heatmap};
use dbar_core::reconstruct::{
    disk_nodes, reconstruct_conductivity, reconstruct_potential, Q0Estimate, ReconstructionOptions, ReconstructionResult,
};
use dbar_core::{Energy, SpectralLambda, C64};
use serde::de::DeserializeOwned;

use crate::config::Config;
use crate::manifest::Manifest;

pub struct Run<'a> {
    pub cfg: &'a Config,
    pub out: &'a Path,
    pub paper_scale: bool,
}

fn parse_enum<T: DeserializeOwned>(key: &str, s: &str) -> Result<T> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| anyhow!("bad value {s:?} for {key}"))
}

impl Run<'_> {
    fn energy(&self) -> Energy {
        Energy::real(self.cfg.energy.unwrap_or(-1.0))
    }

    fn case(&self) -> Result<CaseId> {
        Ok(CaseId::parse(self.cfg.case.as_deref().unwrap_or("case1"))?)
    }

    fn green(&self) -> GreenOptions {
        let mut g = GreenOptions::default();
        if let Some(v) = self.cfg.guard {
            g.guard = v;
        }
        g
    }

    fn pipeline(&self) -> Result<PipelineOptions> {
        let c = self.cfg;
        let mut p = PipelineOptions::default();
        if self.paper_scale {
            p = p.paper_scale();
        }
        p.triangles = c.triangles.unwrap_or(p.triangles);
        p.n_modes = c.n_modes.unwrap_or(p.n_modes);
        p.nb = c.nb.unwrap_or(p.nb);
        p.radial_step = c.radial_step.unwrap_or(p.radial_step);
        p.lambda_m = c.lambda_m.unwrap_or(p.lambda_m);
        p.lambda_width_factor = c.lambda_width_factor.unwrap_or(p.lambda_width_factor);
        p.noise = c.noise.unwrap_or(p.noise);
        p.seed = c.seed.unwrap_or(p.seed);
        if let Some(s) = &c.sweep {
            p.sweep = parse_enum::<Sweep>("sweep", s)?;
        }
        if let Some(s) = &c.fill {
            p.fill = parse_enum::<SymmetryFill>("fill", s)?;
        }
        Ok(p)
    }

    fn recon(&self) -> Result<ReconstructionOptions> {
        let c = self.cfg;
        let mut r = ReconstructionOptions::default();
        r.dz = c.dz.unwrap_or(r.dz);
        r.r_star = c.r_star.unwrap_or(r.r_star);
        r.width = c.width.unwrap_or(r.width);
        r.dbar = DbarOptions {
            tol: c.dbar_tol.unwrap_or(r.dbar.tol),
            max_iter: c.dbar_max_iter.unwrap_or(r.dbar.max_iter),
        };
        match c.q0_estimate.as_deref() {
            None | Some("moment") => {}
            Some("outer_band") => {
                r.q0_estimate = Q0Estimate::OuterBand {
                    fraction: c.band_fraction.unwrap_or(0.2),
                }
            }
            Some(other) => bail!("bad value {other:?} for q0_estimate"),
        }
        Ok(r)
    }

    fn spec(&self, default: (f64, f64, f64)) -> Result<TruncationSpec> {
        let c = self.cfg;
        let a = c.trunc_a.unwrap_or(default.0);
        Ok(TruncationSpec::new(
            a,
            c.trunc_b.unwrap_or(if c.trunc_a.is_some() { a } else { default.1 }),
            c.trunc_phi.unwrap_or(default.2),
            c.r1.unwrap_or(DEFAULT_R1),
        )?)
    }

    fn case_options(&self) -> Result<CaseOptions> {
        Ok(CaseOptions {
            energy: self.energy().value().re,
            pipeline: self.pipeline()?,
            recon: self.recon()?,
            z_step: self.cfg.z_step.unwrap_or(0.0625),
            ..CaseOptions::default()
        })
    }

    fn path(&self, name: &str) -> std::path::PathBuf {
        self.out.join(name)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn read_dn(path: &Path) -> Result<DNMatrix> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(DNMatrix::read_csv(BufReader::new(f))?)
}

/// Disk reconstructions on a z lattice as an image; NaN off the disk.
fn disk_image(r: &ReconstructionResult, step: f64) -> (usize, Vec<f64>) {
    let k = (1.0 / step).floor() as i64;
    let n = (2 * k + 1) as usize;
    let mut img = vec![f64::NAN; n * n];
    for (z, (v, ok)) in r.z_nodes.iter().zip(r.values.iter().zip(&r.valid)) {
        let a = (z.re / step).round() as i64 + k;
        let b = (z.im / step).round() as i64 + k;
        if *ok && (0..n as i64).contains(&a) && (0..n as i64).contains(&b) {
            img[b as usize * n + a as usize] = v.re;
        }
    }
    (n, img)
}

pub fn green_eval(run: &Run, m: &mut Manifest) -> Result<()> {
    let c = run.cfg;
    let e = run.energy();
    let lam = SpectralLambda::new(C64::new(c.lambda_re.unwrap_or(2.0), c.lambda_im.unwrap_or(0.0)))?;
    let half = c.z_half_width.unwrap_or(2.0);
    let n = c.z_count.unwrap_or(81).max(2);
    let g = FaddeevGreen::new(lam, e, &run.green())?;
    let pts: Vec<C64> = (0..n * n)
        .map(|i| {
            let s = |j: usize| -half + 2.0 * half * j as f64 / (n - 1) as f64;
            C64::new(s(i % n), s(i / n))
        })
        .collect();
    // g is evaluated with its |z| < 0.01 cutoff at the origin.
    let vals = green_table(&g, &pts)?;
    let csv = run.path("green.csv");
    write_green_csv(create(&csv)?, &pts, &vals)?;
    m.output(&csv, "csv");
    for (name, part) in [("green_re.png", 0), ("green_im.png", 1)] {
        let v: Vec<f64> = vals.iter().map(|g| if part == 0 { g.re } else { g.im }).collect();
        let p = run.path(name);
        let range = write_heatmap(&p, n, &v)?;
        m.image(&p, vec![range]);
    }
    m.param("lambda", lam.value())?;
    m.param("energy", e.value())?;
    m.param("green", run.green())?;
    m.param("z_half_width", half)?;
    m.param("z_count", n)?;
    Ok(())
}

pub fn validate_green_cmd(run: &Run, m: &mut Manifest) -> Result<()> {
    let c = run.cfg;
    let case = run.case()?;
    let mut opts = GreenValidationOptions::default();
    opts.d_lambda = c.d_lambda.unwrap_or(opts.d_lambda);
    opts.half_width = c.ls_half_width.unwrap_or(opts.half_width);
    opts.ls.tol = c.ls_tol.unwrap_or(opts.ls.tol);
    if let Some(g) = c.guard {
        opts.ls.green.guard = g;
    }
    let ms: Vec<u32> = c
        .grid_exponents
        .as_deref()
        .unwrap_or("6,7")
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| anyhow!("bad grid exponent {s:?}")))
        .collect::<Result<_>>()?;
    let count = c.lambda_count.unwrap_or(if run.paper_scale { 300 } else { 60 });
    let lams = linspace(c.lambda_min.unwrap_or(1.01), c.lambda_max.unwrap_or(30.0), count);
    let rows = validate_green(&case.profile(), &lams, run.energy(), &ms, &opts)?;
    let csv = run.path("green_validation.csv");
    green_validation::write_csv(create(&csv)?, &rows)?;
    m.output(&csv, "csv");
    m.param("case", case)?;
    m.param("grid_exponents", &ms)?;
    m.param("lambda_abs", &lams)?;
    m.param("options", opts)?;
    m.metric("failed_rows", rows.iter().filter(|r| r.residual.is_nan()).count())?;
    Ok(())
}

pub fn simulate_dn(run: &Run, m: &mut Manifest) -> Result<()> {
    let case = run.case()?;
    let p = run.pipeline()?;
    let e = run.energy();
    let profile = case.profile();
    let mesh = DiskMesh::with_triangles(p.triangles)?;
    let lq = assemble_dn(&mesh, &nodal_values(&mesh, |z| C64::new(profile.value(z.norm()), 0.0) - e.value()), p.n_modes)?;
    let lq = add_noise(&lq, p.noise, p.seed)?;
    let l0 = assemble_dn(&mesh, &nodal_values(&mesh, |_| -e.value()), p.n_modes)?;
    for (name, l) in [("dn.csv", &lq), ("dn0.csv", &l0)] {
        let path = run.path(name);
        l.write_csv(create(&path)?)?;
        m.output(&path, "dn_csv");
    }
    m.param("case", case)?;
    m.param("energy", e.value())?;
    m.param("triangles", mesh.n_triangles())?;
    m.param("n_modes", p.n_modes)?;
    m.param("noise", p.noise)?;
    m.param("seed", p.seed)?;
    m.metric("off_diagonal_ratio", lq.off_diagonal_ratio())?;
    Ok(())
}

/// DN matrices from `dn_in`/`dn0_in` when given, otherwise simulated.
fn scattering(run: &Run, spec: &TruncationSpec, m: &mut Manifest) -> Result<(Option<CaseId>, CaseOptions, ScatteringData)> {
    let opts = run.case_options()?;
    let e = run.energy();
    let data = match (&run.cfg.dn_in, &run.cfg.dn0_in) {
        (Some(dq), Some(d0)) => {
            m.param("dn_in", dq)?;
            m.param("dn0_in", d0)?;
            let lq = add_noise(&read_dn(dq)?, opts.pipeline.noise, opts.pipeline.seed)?;
            (None, scattering_from_matrices(lq, read_dn(d0)?, e, spec, &opts.pipeline)?)
        }
        (None, None) => {
            let case = run.case()?;
            (Some(case), simulate_case(case, spec, &opts)?)
        }
        _ => bail!("dn_in and dn0_in must be given together"),
    };
    m.param("energy", e.value())?;
    m.param("truncation", spec)?;
    m.param("pipeline", opts.pipeline)?;
    m.param("lambda_half_width", opts.pipeline.lambda_width_factor * spec.outer_radius())?;
    m.metric("failed_radii", &data.1.failed_radii)?;
    Ok((data.0, opts, data.1))
}

fn write_scattering(run: &Run, t: &ScatteringGrid, spec: Option<&TruncationSpec>, stem: &str, m: &mut Manifest) -> Result<()> {
    let csv = run.path(&format!("{stem}.csv"));
    t.write_csv(create(&csv)?)?;
    m.output(&csv, "csv");
    let png = run.path(&format!("{stem}.png"));
    let (re, im) = scattering_png(&png, t, spec)?;
    m.image(&png, vec![re, im]);
    Ok(())
}

fn default_spec(run: &Run) -> Result<TruncationSpec> {
    let r = match (&run.cfg.dn_in, run.case()) {
        (None, Ok(case)) => case.truncation_radius(),
        _ => 8.0,
    };
    run.spec((r, r, 0.0))
}

pub fn scatter(run: &Run, m: &mut Manifest) -> Result<()> {
    let spec = default_spec(run)?;
    let (case, _, data) = scattering(run, &spec, m)?;
    m.param("case", case)?;
    write_scattering(run, &data.t, Some(&spec), "t", m)?;
    write_scattering(run, &data.truncated, Some(&spec), "t_truncated", m)?;
    m.metric("max_abs_t", data.t.max_abs())?;
    Ok(())
}

fn write_result(run: &Run, r: &ReconstructionResult, stem: &str, step: f64, m: &mut Manifest) -> Result<()> {
    let csv = run.path(&format!("{stem}.csv"));
    r.write_csv(create(&csv)?)?;
    m.output(&csv, "csv");
    let radial = run.path(&format!("{stem}_radial.csv"));
    r.write_radial_csv(create(&radial)?)?;
    m.output(&radial, "csv");
    let (n, img) = disk_image(r, step);
    let png = run.path(&format!("{stem}.png"));
    let range = write_heatmap(&png, n, &img)?;
    m.image(&png, vec![range]);
    Ok(())
}

fn reconstruct(run: &Run, m: &mut Manifest, sigma: bool) -> Result<()> {
    let spec = default_spec(run)?;
    let (case, opts, data) = scattering(run, &spec, m)?;
    write_scattering(run, &data.truncated, Some(&spec), "t_truncated", m)?;
    m.param("reconstruction", opts.recon)?;
    m.param("z_step", opts.z_step)?;
    let Some(case) = case else {
        // External data: nothing to score against.
        let z = disk_nodes(opts.z_step, 1.0);
        let e = Energy::real(opts.energy);
        let r = if sigma {
            reconstruct_conductivity(&data.truncated, e, &z, &spec, &opts.recon)?
        } else {
            reconstruct_potential(&data.truncated, e, &z, &spec, &opts.recon)?
        };
        write_result(run, &r, if sigma { "sigma" } else { "q0" }, opts.z_step, m)?;
        m.metric("invalid_nodes", r.valid.iter().filter(|v| !**v).count())?;
        return Ok(());
    };
    m.param("case", case)?;
    let report = evaluate_case(case, data, &spec, &opts)?;
    m.metric("q0_relative_l2_error", report.potential_error)?;
    if sigma {
        let Some(c) = &report.conductivity else {
            bail!("{case:?} is not conductivity type; use reconstruct-q");
        };
        write_result(run, &c.result, "sigma", opts.z_step, m)?;
        m.metric("sigma_relative_l2_error", c.error)?;
        m.metric("sigma_via_potential_relative_l2_error", c.via_potential_error)?;
        m.metric("invalid_nodes", c.result.valid.iter().filter(|v| !**v).count())?;
    } else {
        write_result(run, &report.potential, "q0", opts.z_step, m)?;
        m.metric("invalid_nodes", report.potential.valid.iter().filter(|v| !**v).count())?;
    }
    Ok(())
}

pub fn reconstruct_q(run: &Run, m: &mut Manifest) -> Result<()> {
    reconstruct(run, m, false)
}

pub fn reconstruct_sigma(run: &Run, m: &mut Manifest) -> Result<()> {
    if run.cfg.case.is_none() && run.cfg.dn_in.is_none() {
        let mut cfg = run.cfg.clone();
        cfg.case = Some("case3".into());
        return reconstruct(&Run { cfg: &cfg, ..*run }, m, true);
    }
    reconstruct(run, m, true)
}

pub fn scan(run: &Run, m: &mut Manifest) -> Result<()> {
    let c = run.cfg;
    let kind = parse_enum::<FamilyKind>("family", c.family.as_deref().unwrap_or("alpha_phi"))?;
    let family = PotentialFamily::new(kind);
    let mut opts = ScanOptions::default();
    opts.m = c.ls_m.unwrap_or(opts.m);
    opts.half_width = c.ls_half_width.unwrap_or(opts.half_width);
    opts.blowup = c.blowup.unwrap_or(opts.blowup);
    opts.ls.tol = c.ls_tol.unwrap_or(opts.ls.tol);
    if let Some(g) = c.guard {
        opts.ls.green.guard = g;
    }
    let (na, nl) = if run.paper_scale { (701, 250) } else { (71, 50) };
    let alphas = linspace(c.alpha_min.unwrap_or(-35.0), c.alpha_max.unwrap_or(35.0), c.alpha_count.unwrap_or(na));
    let lams = linspace(c.lambda_min.unwrap_or(1.01), c.lambda_max.unwrap_or(4.5), c.lambda_count.unwrap_or(nl));
    let csv = run.path("scan.csv");
    let cells = scan_exceptional(&family, &alphas, &lams, run.energy(), &opts, &csv)?;
    m.output(&csv, "csv");
    let (w, h, img) = scan_image(&cells, &alphas, &lams);
    // The heatmap writer is square; pad the short side with NaN.
    let n = w.max(h);
    let mut sq = vec![f64::NAN; n * n];
    for j in 0..h {
        sq[j * n..j * n + w].copy_from_slice(&img[j * w..(j + 1) * w]);
    }
    let png = run.path("scan.png");
    let range = write_heatmap(&png, n, &sq)?;
    m.image(&png, vec![range]);
    m.param("family", &family)?;
    m.param("options", opts)?;
    m.param("alphas", (alphas[0], alphas[alphas.len() - 1], alphas.len()))?;
    m.param("lambda_abs", (lams[0], lams[lams.len() - 1], lams.len()))?;
    let flagged: Vec<(f64, f64)> = cells.iter().filter(|c| c.flagged).map(|c| (c.alpha, c.lambda_abs)).collect();
    m.metric("flagged_cells", flagged.len())?;
    m.metric("flagged", flagged)?;
    Ok(())
}

pub fn dot(run: &Run, m: &mut Manifest) -> Result<()> {
    let c = run.cfg;
    let mut scene = DotScene::default();
    scene.mu_a.base = c.mu_a_bg.unwrap_or(scene.mu_a.base);
    scene.mu_s.base = c.mu_s_bg.unwrap_or(scene.mu_s.base);
    let (a, s) = (&mut scene.mu_a.bumps[0], &mut scene.mu_s.bumps[0]);
    a.amplitude = c.mu_a_peak.unwrap_or(a.amplitude);
    a.radius = c.mu_a_radius.unwrap_or(a.radius);
    s.amplitude = c.mu_s_peak.unwrap_or(s.amplitude);
    s.center = c.mu_s_center.unwrap_or(s.center);
    s.radius = c.mu_s_radius.unwrap_or(s.radius);
    scene.g = c.g.unwrap_or(scene.g);
    scene.omega = c.omega.unwrap_or(scene.omega);
    scene.c_medium = c.c_medium.unwrap_or(scene.c_medium);
    let pipeline = run.pipeline()?;
    let spec = if pipeline.noise > 0.0 {
        run.spec((7.0, 7.0, 0.0))?
    } else {
        run.spec((11.0, 13.0, FRAC_PI_2))?
    };
    let opts = DotOptions {
        pipeline,
        recon: run.recon()?,
        z_step: c.z_step.unwrap_or(0.0625),
    };
    let report = dot_pipeline(&scene, &spec, &opts)?;
    write_scattering(run, &report.data.truncated, Some(&spec), "t_truncated", m)?;
    write_result(run, &report.diffusion, "diffusion", opts.z_step, m)?;
    m.param("scene", &scene)?;
    m.param("truncation", spec)?;
    m.param("options", opts)?;
    m.metric("energy", report.energy)?;
    m.metric("inverse_energy", report.inverse_energy)?;
    m.metric("d", report.d)?;
    m.metric("diffusion_relative_l2_error", report.error)?;
    m.metric("failed_radii", &report.data.failed_radii)?;
    Ok(())
}
