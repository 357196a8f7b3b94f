//! Implementations of the CLI subcommands. All file I/O lives here.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gradshop_core::{
    add_image_noise_snr, add_noise_snr, dls_reconstruct, estimate_normals, integrate_dct,
    ls_objective, make_surface, normals_to_gradients, rmse_aligned, ssim, DlsTrace,
    GradientField, ImageStack, LightingSet, SignConvention, SurfaceGrid, SynthKind, SynthSpec,
};

use crate::config::{Method, RunConfig, SweepSpec};
use crate::errors::{CliError, CliResult};
use crate::pfm;

pub fn cmd_synth(
    kind: &str,
    rows: usize,
    cols: usize,
    amplitude: f64,
    out_surface: &Path,
    out_gx: &Path,
    out_gy: &Path,
) -> CliResult<()> {
    let kind = SynthKind::parse(kind).map_err(|e| CliError::usage(e.to_string()))?;
    let spec = SynthSpec::new(kind, rows, cols, amplitude)?;
    let (z, g) = make_surface(&spec);
    pfm::write_grid(out_surface, &z)?;
    pfm::write_grid(out_gx, &g.gx)?;
    pfm::write_grid(out_gy, &g.gy)?;
    println!(
        "wrote {kind:?} {rows}x{cols} to {}, {}, {}",
        out_surface.display(),
        out_gx.display(),
        out_gy.display()
    );
    Ok(())
}

pub fn cmd_noise(
    in_gx: &Path,
    in_gy: &Path,
    snr_db: f64,
    seed: u64,
    out_gx: &Path,
    out_gy: &Path,
) -> CliResult<()> {
    let gx = pfm::read_grid(in_gx)?;
    let gy = pfm::read_grid(in_gy)?;
    let g = GradientField::new(gx, gy)?;
    let noisy = add_noise_snr(&g, snr_db, seed)?;
    let mut noise_sq = 0.0f64;
    for (a, b) in noisy.gx.values().iter().zip(g.gx.values()) {
        noise_sq += (a - b) * (a - b);
    }
    for (a, b) in noisy.gy.values().iter().zip(g.gy.values()) {
        noise_sq += (a - b) * (a - b);
    }
    let realized = 20.0 * (g.norm() / noise_sq.sqrt()).log10();
    pfm::write_grid(out_gx, &noisy.gx)?;
    pfm::write_grid(out_gy, &noisy.gy)?;
    println!("realized_snr_db={realized}");
    Ok(())
}

pub fn cmd_normals(
    stack_dir: &Path,
    lights_path: &Path,
    snr_db: Option<f64>,
    seed: u64,
    nz_min: f64,
    out: &Path,
) -> CliResult<()> {
    let lights = read_lights(lights_path)?;
    if lights.condition_number() > 1e6 {
        eprintln!(
            "warning: lighting condition number {:.3e} exceeds 1e6; normals may be unreliable",
            lights.condition_number()
        );
    }
    let stack = read_stack(stack_dir)?;
    if stack.count() != lights.count() {
        return Err(CliError::data(format!(
            "{} images in {} but {} lights in {}",
            stack.count(),
            stack_dir.display(),
            lights.count(),
            lights_path.display()
        )));
    }
    let stack = match snr_db {
        Some(snr) => add_image_noise_snr(&stack, snr, seed)?,
        None => stack,
    };
    let normals = estimate_normals(&stack, &lights, nz_min)?;
    pfm::write_normals(out, &normals)?;
    println!(
        "estimated normals for {} pixels ({} degenerate) -> {}",
        normals.rows() * normals.cols(),
        normals.degenerate_count(),
        out.display()
    );
    Ok(())
}

fn read_lights(path: &Path) -> CliResult<LightingSet<f64>> {
    let text =
        fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut dirs = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(CliError::usage(format!(
                "{}:{}: expected three reals, got {line:?}",
                path.display(),
                lineno + 1
            )));
        }
        let mut v = [0.0f64; 3];
        for (k, p) in parts.iter().enumerate() {
            v[k] = p.parse().map_err(|_| {
                CliError::usage(format!(
                    "{}:{}: bad number {p:?}",
                    path.display(),
                    lineno + 1
                ))
            })?;
        }
        dirs.push(v);
    }
    Ok(LightingSet::new(dirs)?)
}

/// Reads all `.pfm` files in a directory, sorted by file name, as a stack.
fn read_stack(dir: &Path) -> CliResult<ImageStack<f64>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "pfm"))
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::data(format!(
            "no .pfm images found in {}",
            dir.display()
        )));
    }
    let images: CliResult<Vec<SurfaceGrid<f64>>> =
        paths.iter().map(|p| pfm::read_grid(p)).collect();
    Ok(ImageStack::new_allow_negative(images?)?)
}

pub struct ReconstructInput {
    pub gx: Option<PathBuf>,
    pub gy: Option<PathBuf>,
    pub normals: Option<PathBuf>,
    pub flip_x: Option<bool>,
    pub flip_y: Option<bool>,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_reconstruct(
    method: Option<&str>,
    input: &ReconstructInput,
    config_path: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
    trace_out: Option<&Path>,
) -> CliResult<()> {
    let mut cfg = match config_path {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let method = match method {
        Some(m) => Method::parse(m)?,
        None => cfg.method()?,
    };
    if cfg.allow_large_tau && cfg.tau > 0.125 {
        eprintln!(
            "warning: tau={} exceeds the descent-safe bound 1/8; the objective may not decrease",
            cfg.tau
        );
    }

    let g = load_gradients(input, &cfg)?;
    match method {
        Method::Dctls => {
            let z = integrate_dct(&g)?;
            if let Some(path) = trace_out {
                let f = ls_objective(&z, &g)?;
                let mut csv = String::from("outer,total,data,patch_fit,l0,rel_change\n");
                csv.push_str(&format!("0,{f},{f},0,0,0\n"));
                fs::write(path, csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            }
            pfm::write_grid(out, &z)?;
            println!("dctls reconstruction -> {}", out.display());
        }
        Method::Dls => {
            let result = dls_reconstruct(&g, &cfg.dls_config())?;
            if let Some(path) = trace_out {
                write_trace(path, &result.trace)?;
            }
            pfm::write_grid(out, &result.surface)?;
            println!(
                "dls reconstruction ({} outer iterations) -> {}",
                result.trace.rows.len() - 1,
                out.display()
            );
        }
    }
    Ok(())
}

fn load_gradients(input: &ReconstructInput, cfg: &RunConfig) -> CliResult<GradientField<f64>> {
    match (&input.gx, &input.gy, &input.normals) {
        (Some(gx), Some(gy), None) => {
            let gx = pfm::read_grid(gx)?;
            let gy = pfm::read_grid(gy)?;
            Ok(GradientField::new(gx, gy)?)
        }
        (None, None, Some(nrm)) => {
            let nmap = pfm::read_normals(nrm)?;
            let mut conv: SignConvention = cfg.convention();
            if let Some(fx) = input.flip_x {
                conv.flip_x = fx;
            }
            if let Some(fy) = input.flip_y {
                conv.flip_y = fy;
            }
            Ok(normals_to_gradients(&nmap, conv))
        }
        _ => Err(CliError::usage(
            "provide either --in-gx and --in-gy, or --in-normals",
        )),
    }
}

fn write_trace(path: &Path, trace: &DlsTrace<f64>) -> CliResult<()> {
    let mut csv = String::from("outer,total,data,patch_fit,l0,rel_change\n");
    for r in &trace.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.outer, r.total, r.data_term, r.patch_fit, r.l0_count, r.rel_change
        ));
    }
    fs::write(path, csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(())
}

pub fn cmd_eval(
    candidate: &Path,
    reference: &Path,
    config_path: Option<&Path>,
    out: &Path,
) -> CliResult<()> {
    let cfg = match config_path {
        Some(p) => RunConfig::from_path(p)?,
        None => RunConfig::default(),
    };
    let cand = pfm::read_grid(candidate)?;
    let refr = pfm::read_grid(reference)?;
    let s = ssim(&cand, &refr, &cfg.ssim_config())?;
    let r = rmse_aligned(&cand, &refr)?;
    let csv = format!("ssim,rmse_aligned\n{s},{r}\n");
    fs::write(out, &csv).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    println!("ssim={s} rmse_aligned={r}");
    Ok(())
}

#[derive(Debug, Clone)]
struct SweepCell {
    kind: SynthKind,
    kind_name: String,
    snr_db: f64,
    method: Method,
    lambda: f64,
    mu: f64,
    seed: u64,
}

#[derive(Debug, Clone)]
struct CellResult {
    ssim: f64,
    rmse: f64,
    wall_ms: u128,
}

pub fn cmd_sweep(spec_path: &Path, out: &Path, stable_output: bool) -> CliResult<()> {
    let spec = SweepSpec::from_path(spec_path)?;
    let mut cells = Vec::new();
    for kind_name in &spec.kinds {
        let kind = SynthKind::parse(kind_name)?;
        for &snr_db in &spec.snr_db {
            for method_name in &spec.methods {
                let method = Method::parse(method_name)?;
                for &lambda in &spec.lambda {
                    for &mu in &spec.mu {
                        for &seed in &spec.seeds {
                            cells.push(SweepCell {
                                kind,
                                kind_name: kind_name.clone(),
                                snr_db,
                                method,
                                lambda,
                                mu,
                                seed,
                            });
                        }
                    }
                }
            }
        }
    }

    let results = run_cells(&spec, &cells)?;

    let mut csv = String::from("kind,snr_db,method,lambda,mu,seed,ssim,rmse,wall_ms\n");
    for (cell, res) in cells.iter().zip(&results) {
        let wall = if stable_output { 0 } else { res.wall_ms };
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            cell.kind_name,
            cell.snr_db,
            cell.method.name(),
            cell.lambda,
            cell.mu,
            cell.seed,
            res.ssim,
            res.rmse,
            wall
        ));
    }

    // best (lambda, mu) per (kind, snr, method) by mean ssim over seeds
    for kind_name in &spec.kinds {
        for &snr_db in &spec.snr_db {
            for method_name in &spec.methods {
                let mut best: Option<(f64, f64, f64, f64)> = None; // lambda, mu, ssim, rmse
                for &lambda in &spec.lambda {
                    for &mu in &spec.mu {
                        let mut s_sum = 0.0;
                        let mut r_sum = 0.0;
                        let mut n = 0usize;
                        for (cell, res) in cells.iter().zip(&results) {
                            if cell.kind_name == *kind_name
                                && cell.snr_db == snr_db
                                && cell.method.name() == method_name
                                && cell.lambda == lambda
                                && cell.mu == mu
                            {
                                s_sum += res.ssim;
                                r_sum += res.rmse;
                                n += 1;
                            }
                        }
                        let mean_s = s_sum / n as f64;
                        let mean_r = r_sum / n as f64;
                        if best.is_none_or(|(_, _, bs, _)| mean_s > bs) {
                            best = Some((lambda, mu, mean_s, mean_r));
                        }
                    }
                }
                let (lambda, mu, mean_s, mean_r) = best.unwrap();
                csv.push_str(&format!(
                    "{kind_name},{snr_db},{method_name},{lambda},{mu},best,{mean_s},{mean_r},0\n"
                ));
            }
        }
    }

    let mut file =
        fs::File::create(out).map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    file.write_all(csv.as_bytes())
        .map_err(|e| CliError::Io(format!("{}: {e}", out.display())))?;
    println!("swept {} cells -> {}", cells.len(), out.display());
    Ok(())
}

fn run_cells(spec: &SweepSpec, cells: &[SweepCell]) -> CliResult<Vec<CellResult>> {
    use rayon::prelude::*;
    let threads = std::env::var("GRADSHOP_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok());
    let run_all = || -> CliResult<Vec<CellResult>> {
        cells
            .par_iter()
            .map(|cell| run_cell(spec, cell))
            .collect()
    };
    match threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| CliError::data(format!("thread pool: {e}")))?;
            pool.install(run_all)
        }
        None => run_all(),
    }
}

fn run_cell(spec: &SweepSpec, cell: &SweepCell) -> CliResult<CellResult> {
    let start = Instant::now();
    let synth = SynthSpec::new(cell.kind, spec.rows, spec.cols, spec.amplitude)?;
    let (z0, g_clean) = make_surface(&synth);
    let g = add_noise_snr(&g_clean, cell.snr_db, cell.seed)?;
    let z = match cell.method {
        Method::Dctls => integrate_dct(&g)?,
        Method::Dls => {
            let mut cfg = spec.base.dls_config();
            cfg.lambda = cell.lambda;
            cfg.mu = cell.mu;
            cfg.seed = cell.seed;
            dls_reconstruct(&g, &cfg)?.surface
        }
    };
    let truth = z0.anchored_zero_mean();
    let s = ssim(&z, &truth, &spec.base.ssim_config())?;
    let r = rmse_aligned(&z, &truth)?;
    Ok(CellResult {
        ssim: s,
        rmse: r,
        wall_ms: start.elapsed().as_millis(),
    })
}
