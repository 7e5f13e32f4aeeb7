//! Subcommand implementations. Every output file is written atomically
//! (temp file in the target directory, then rename).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gaboredge::detector::{detect_edges, DetectorConfig};
use gaboredge::esm::{channel_esm, fuse};
use gaboredge::eval::{
    add_gaussian_noise, default_tolerance, f_measure, fom, match_edges, precision_recall,
    pr_sweep, EvalSummary, NoiseSpec,
};
use gaboredge::gabor::build_bank;
use gaboredge::io as imgio;
use gaboredge::{EdgeMap, RgbImage};
use serde::Serialize;

use crate::CliError;

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Param(format!("output path {} has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let io_err = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    std::fs::write(&tmp, bytes).map_err(io_err)?;
    std::fs::rename(&tmp, path).map_err(io_err)?;
    Ok(())
}

fn load_input(path: &Path) -> Result<RgbImage, CliError> {
    imgio::load_rgb(path)
        .map_err(|e| CliError::Io(format!("cannot load image {}: {e}", path.display())))
}

fn load_gt(path: &Path) -> Result<EdgeMap, CliError> {
    imgio::load_edge_map(path)
        .map_err(|e| CliError::Io(format!("cannot load edge map {}: {e}", path.display())))
}

pub fn detect(
    input: &Path,
    output: &Path,
    cfg: &DetectorConfig,
    verbose: bool,
) -> Result<(), CliError> {
    let img = load_input(input)?;
    let edges = detect_edges(&img, cfg)?;
    if verbose {
        eprintln!(
            "{}: {} edge pixels of {}",
            input.display(),
            edges.count(),
            img.width() * img.height()
        );
    }
    let bytes = imgio::encode_edge_map(&edges, imgio::format_for_path(output)?)?;
    write_atomic(output, &bytes)
}

#[derive(Serialize)]
struct EvalReport {
    precision: f64,
    recall: f64,
    f: f64,
    fom: f64,
}

pub fn eval(pred: &Path, gt: &Path, tol: Option<f64>) -> Result<(), CliError> {
    let pred_map = load_gt(pred)?;
    let gt_map = load_gt(gt)?;
    let tolerance =
        tol.unwrap_or_else(|| default_tolerance(pred_map.width(), pred_map.height()));
    let counts = match_edges(&pred_map, &gt_map, tolerance)?;
    let (precision, recall) = precision_recall(&counts);
    let report = EvalReport {
        precision,
        recall,
        f: f_measure(precision, recall),
        fom: fom(&pred_map, &gt_map)?,
    };
    println!("{}", serde_json::to_string_pretty(&report).expect("plain struct"));
    Ok(())
}

pub fn noise(input: &Path, output: &Path, spec: &NoiseSpec) -> Result<(), CliError> {
    if spec.sigma < 0.0 {
        return Err(CliError::Param(format!(
            "sigma must be >= 0, got {}",
            spec.sigma
        )));
    }
    let img = load_input(input)?;
    let noisy = add_gaussian_noise(&img, spec);
    let bytes = imgio::encode_rgb(&noisy, imgio::format_for_path(output)?)?;
    write_atomic(output, &bytes)
}

const IMAGE_EXTENSIONS: [&str; 4] = ["png", "ppm", "pgm", "pnm"];

fn list_images(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Io(format!("cannot read directory {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
                .unwrap_or(false)
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Param(format!(
            "no images (png/ppm/pgm) found in {}",
            dir.display()
        )));
    }
    Ok(files)
}

fn matching_gt(gt_dir: &Path, image: &Path) -> Result<PathBuf, CliError> {
    let stem = image
        .file_stem()
        .ok_or_else(|| CliError::Param(format!("image {} has no stem", image.display())))?;
    for ext in IMAGE_EXTENSIONS {
        let candidate = gt_dir.join(stem).with_extension(ext);
        if candidate.exists() {
            return Ok(candidate);
        }
    }
    Err(CliError::Param(format!(
        "no ground truth for {} in {}",
        image.display(),
        gt_dir.display()
    )))
}

#[derive(Serialize)]
struct SweepReport {
    f_ods: f64,
    f_ois: f64,
    ap: f64,
    r50: f64,
}

fn render_csv(summary: &EvalSummary) -> String {
    let mut csv = String::from("beta_low,beta_up,precision,recall,f\n");
    for p in &summary.points {
        writeln!(
            csv,
            "{:.6},{:.6},{:.6},{:.6},{:.6}",
            p.beta_low, p.beta_up, p.precision, p.recall, p.f
        )
        .expect("writing to a String cannot fail");
    }
    csv
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    dataset_dir: &Path,
    gt_dir: &Path,
    grid: &[(f64, f64)],
    out: &Path,
    cfg: &DetectorConfig,
    tol: Option<f64>,
    jobs: usize,
    verbose: bool,
) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::Param("sweep grid must not be empty".into()));
    }
    if jobs == 0 {
        return Err(CliError::Param("--jobs must be >= 1".into()));
    }
    let images = list_images(dataset_dir)?;
    let mut dataset = Vec::with_capacity(images.len());
    for (i, path) in images.iter().enumerate() {
        let gt_path = matching_gt(gt_dir, path)?;
        if verbose {
            eprintln!("loading {}/{}: {}", i + 1, images.len(), path.display());
        }
        dataset.push((load_input(path)?, load_gt(&gt_path)?));
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Param(format!("cannot build a pool of {jobs} jobs: {e}")))?;
    let summary = pool.install(|| pr_sweep(&dataset, grid, cfg, tol))?;
    if verbose {
        eprintln!(
            "swept {} images x {} grid points: f_ods {:.4}, f_ois {:.4}",
            dataset.len(),
            grid.len(),
            summary.f_ods,
            summary.f_ois
        );
    }

    write_atomic(out, render_csv(&summary).as_bytes())?;
    let report = SweepReport {
        f_ods: summary.f_ods,
        f_ois: summary.f_ois,
        ap: summary.ap,
        r50: summary.r50,
    };
    let json = serde_json::to_vec_pretty(&report).expect("plain struct");
    write_atomic(&out.with_extension("json"), &json)?;
    Ok(())
}

pub fn esm_dump(
    input: &Path,
    out_dir: &Path,
    cfg: &DetectorConfig,
    verbose: bool,
) -> Result<(), CliError> {
    let img = load_input(input)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let lab = if cfg.srgb_gamma {
        gaboredge::colorspace::rgb_to_lab_linearized(&img)
    } else {
        gaboredge::colorspace::rgb_to_lab(&img)
    };
    let bank = build_bank(&cfg.gabor)?;

    let channels = [("L", &lab.l), ("a", &lab.a), ("b", &lab.b)];
    let mut scales = BTreeMap::new();
    let mut esms = Vec::new();
    for (name, plane) in channels {
        for scale in 0..bank.scales() {
            let (esm, _) = channel_esm(plane, bank.kernels_at_scale(scale))?;
            let file = format!("esm_{name}_s{scale}.png");
            let (bytes, max) = imgio::encode_plane_png16(&esm.strength)?;
            write_atomic(&out_dir.join(&file), &bytes)?;
            scales.insert(file, max);
            esms.push(esm);
        }
    }
    let fused = fuse(&esms)?;
    let (bytes, max) = imgio::encode_plane_png16(&fused.strength)?;
    write_atomic(&out_dir.join("esm_fused.png"), &bytes)?;
    scales.insert("esm_fused.png".into(), max);

    let sidecar = serde_json::to_vec_pretty(&scales).expect("string map");
    write_atomic(&out_dir.join("scales.json"), &sidecar)?;
    if verbose {
        eprintln!(
            "wrote {} ESM maps plus the fused map to {}",
            esms.len(),
            out_dir.display()
        );
    }
    Ok(())
}
