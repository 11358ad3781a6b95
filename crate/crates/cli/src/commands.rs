//! The six CLI verbs, built from shared stage functions so that `pipeline`
//! and the individual commands produce identical artifacts.

use crate::config::{Config, Invocation};
use crate::manifest::{fnv1a64, FileRecord, Manifest, RunDir, StageRecord};
use crate::svg;
use crate::{CliError, CliResult, RUN_ROOT_ENV};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use texplane::detect::{components, latent_points, local_maxima, DetectionParams};
use texplane::estimate::{estimate_orientation, EstimationConfig, EstimationResult};
use texplane::geometry::{CameraModel, ObservationWindow, SurfaceOrientation};
use texplane::imaging::{
    decode_image, detect_format, distance_transform, gradient_magnitude, threshold_boundaries,
    to_probability_map, ImageFormat, ProbabilityMap, ThresholdMethod,
};
use texplane::simulate::{simulate_on_plane, PatternKind, PointPattern, SimulationSpec};

/// Default estimation window for real photographs.
fn default_photo_window() -> ObservationWindow {
    ObservationWindow::new(-0.69, 0.69, -0.5, 0.5).expect("static window is valid")
}

pub fn run(inv: &Invocation) -> CliResult<()> {
    let out = resolve_out_dir(inv)?;
    let run = RunDir::create(&out)?;
    match inv.verb.as_str() {
        "simulate" => cmd_simulate(&inv.config, &run),
        "preprocess" => cmd_preprocess(&inv.config, &run),
        "detect" => cmd_detect(&inv.config, &run),
        "estimate" => cmd_estimate(&inv.config, &run),
        "pipeline" => cmd_pipeline(&inv.config, &run),
        "plot" => cmd_plot(&inv.config, &run),
        other => Err(CliError::Config(format!(
            "unknown verb '{other}'\n{}",
            crate::config::USAGE.trim()
        ))),
    }
}

fn resolve_out_dir(inv: &Invocation) -> CliResult<PathBuf> {
    if let Some(out) = &inv.out {
        return Ok(PathBuf::from(out));
    }
    let root = std::env::var(RUN_ROOT_ENV).unwrap_or_else(|_| "runs".into());
    Ok(PathBuf::from(root).join(&inv.verb))
}

// ---------------------------------------------------------------------------
// Config -> domain objects
// ---------------------------------------------------------------------------

/// Window from `camera.a1..b2` (all four or none).
fn window_from_config(cfg: &Config) -> CliResult<Option<ObservationWindow>> {
    let keys = ["camera.a1", "camera.a2", "camera.b1", "camera.b2"];
    let present = keys.iter().filter(|k| cfg.contains(k)).count();
    match present {
        0 => Ok(None),
        4 => {
            let v: Vec<f64> = keys
                .iter()
                .map(|k| cfg.get_f64(k).map(|o| o.expect("key present")))
                .collect::<CliResult<_>>()?;
            ObservationWindow::new(v[0], v[1], v[2], v[3])
                .map(Some)
                .map_err(|e| CliError::Config(format!("camera.a1..b2: {e}")))
        }
        _ => Err(CliError::Config(
            "camera window needs all of camera.a1, camera.a2, camera.b1, camera.b2".into(),
        )),
    }
}

/// Camera from `camera.f` or `camera.fov_deg` plus the window.
fn camera_from_config(cfg: &Config, window: ObservationWindow) -> CliResult<CameraModel> {
    let f = cfg.get_f64("camera.f")?;
    let fov = cfg.get_f64("camera.fov_deg")?;
    let camera = match (f, fov) {
        (Some(f), None) => CameraModel::new(f, window),
        (None, Some(deg)) => CameraModel::from_fov(deg.to_radians(), window),
        (None, None) => CameraModel::new(0.98, window),
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "give either camera.f or camera.fov_deg, not both".into(),
            ))
        }
    };
    camera.map_err(|e| CliError::Config(format!("camera: {e}")))
}

fn orientation_from_config(cfg: &Config) -> CliResult<SurfaceOrientation> {
    let eta1 = cfg.f64_or("sim.eta1_deg", 0.0)?.to_radians();
    let eta2 = cfg.f64_or("sim.eta2_deg", 0.0)?.to_radians();
    let h = cfg.f64_or("sim.h", 1.0)?;
    SurfaceOrientation::with_distance(eta1, eta2, h)
        .map_err(|e| CliError::Config(format!("sim.h: {e}")))
}

fn detection_params(cfg: &Config) -> CliResult<DetectionParams> {
    let window_px = match cfg.get_str("detect.preset") {
        Some("tiling") => 75,
        Some("bricks") => 55,
        Some(other) => {
            return Err(CliError::Config(format!(
                "detect.preset: '{other}' is not one of tiling, bricks"
            )))
        }
        None => 75,
    };
    let window_px = cfg.u64_or("detect.window_px", window_px)? as u32;
    let k1 = cfg.u64_or("detect.k1_px", (window_px / 2) as u64)? as u32;
    let k2 = cfg.f64_or("detect.k2", 0.25)?;
    let step = cfg.f64_or("detect.segment_step", 0.5)?;
    let mut params = DetectionParams::with(k1, k2, step)
        .map_err(|e| CliError::Config(format!("detect: {e}")))?;
    if let Some(cutoff) = cfg.get_f64("detect.pair_cutoff")? {
        params.pair_cutoff = Some(cutoff);
    }
    Ok(params)
}

fn estimation_config(cfg: &Config, camera: CameraModel) -> CliResult<EstimationConfig> {
    let mut config = EstimationConfig::new(camera);
    config.grid_eta1 = cfg.usize_or("estimate.grid_eta1", config.grid_eta1)?;
    config.grid_eta2 = cfg.usize_or("estimate.grid_eta2", config.grid_eta2)?;
    config.refine_tol = cfg.f64_or("estimate.refine_tol", config.refine_tol)?;
    config.max_iter = cfg.usize_or("estimate.max_iter", config.max_iter)?;
    Ok(config)
}

// ---------------------------------------------------------------------------
// Sidecar metadata
// ---------------------------------------------------------------------------

#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct MapMeta {
    width: usize,
    height: usize,
    window: ObservationWindow,
    sigma: f64,
    threshold_method: String,
    threshold_used: f64,
    margin_x: usize,
    margin_y: usize,
    source_hash: String,
}

#[derive(Debug, serde::Serialize, serde::Deserialize)]
struct PatternMeta {
    window: ObservationWindow,
    n_points: usize,
    seed: Option<u64>,
    prng: Option<String>,
    params: BTreeMap<String, String>,
}

fn read_sidecar<T: serde::de::DeserializeOwned>(artifact: &Path) -> CliResult<Option<T>> {
    let sidecar = artifact.with_extension("json");
    if !sidecar.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&sidecar)?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Io(format!("cannot parse sidecar {}: {e}", sidecar.display())))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(cfg: &Config, run: &RunDir) -> CliResult<()> {
    let seed = cfg.u64_or("seed", 0)?;
    let window = window_from_config(cfg)?.unwrap_or_else(ObservationWindow::unit_square);
    let camera = camera_from_config(cfg, window)?;
    let orientation = orientation_from_config(cfg)?;
    let kind = match cfg.get_str("sim.kind").unwrap_or("poisson") {
        "regular" => PatternKind::Regular,
        "poisson" => PatternKind::Poisson,
        other => {
            return Err(CliError::Config(format!(
                "sim.kind: '{other}' is not one of regular, poisson"
            )))
        }
    };
    let spec = build_spec(cfg, kind, orientation, camera, seed)?;
    let pattern = simulate_on_plane(&spec).map_err(CliError::from)?;
    if pattern.is_empty() {
        eprintln!("warning: simulation produced an empty pattern (intensity too low?)");
    }

    let mut manifest = Manifest::new("simulate", cfg, seed);
    let csv = pattern.to_csv();
    run.write(&mut manifest, "pattern.csv", csv.as_bytes())?;
    let meta = PatternMeta {
        window,
        n_points: pattern.len(),
        seed: Some(seed),
        prng: Some(texplane::rng::ALGORITHM_ID.into()),
        params: cfg.entries().clone(),
    };
    run.write(
        &mut manifest,
        "pattern.json",
        serde_json::to_string_pretty(&meta)
            .expect("meta")
            .as_bytes(),
    )?;
    run.write(
        &mut manifest,
        "scatter.svg",
        svg::scatter(&pattern).as_bytes(),
    )?;
    run.write_manifest(&mut manifest)?;
    println!(
        "simulate: {} points -> {}",
        pattern.len(),
        run.path().display()
    );
    Ok(())
}

fn build_spec(
    cfg: &Config,
    kind: PatternKind,
    orientation: SurfaceOrientation,
    camera: CameraModel,
    seed: u64,
) -> CliResult<SimulationSpec> {
    let spec = match kind {
        PatternKind::Regular => {
            if let Some(spacing) = cfg.get_f64("sim.spacing")? {
                SimulationSpec::regular(spacing, orientation, camera, seed)
            } else {
                let target = cfg.usize_or("sim.target_count", 250)?;
                SimulationSpec::regular_with_target_count(target, orientation, camera, seed)
            }
        }
        PatternKind::Poisson => {
            if let Some(intensity) = cfg.get_f64("sim.plane_intensity")? {
                SimulationSpec::poisson(intensity, orientation, camera, seed)
            } else {
                let beta = cfg.f64_or("sim.beta", 250.0)?;
                SimulationSpec::poisson_with_image_beta(beta, orientation, camera, seed)
            }
        }
    };
    let mut spec = spec.map_err(CliError::from)?;
    spec.random_phase = cfg.bool_or("sim.random_phase", false)?;
    Ok(spec)
}

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

/// Shared preprocess stage: image bytes to probability map plus metadata.
fn stage_preprocess(cfg: &Config, image_bytes: &[u8]) -> CliResult<(ProbabilityMap, MapMeta)> {
    let format = match cfg.get_str("preprocess.format").unwrap_or("auto") {
        "auto" => detect_format(image_bytes).map_err(CliError::from)?,
        "pgm" => ImageFormat::Pgm,
        "png" => ImageFormat::Png,
        other => {
            return Err(CliError::Config(format!(
                "preprocess.format: '{other}' is not one of auto, pgm, png"
            )))
        }
    };
    let img = decode_image(image_bytes, format).map_err(CliError::from)?;
    let sigma = cfg.f64_or("preprocess.sigma", 1.5)?;
    let mag = gradient_magnitude(&img, sigma).map_err(CliError::from)?;
    let (method, method_name) = match cfg.get_str("preprocess.threshold").unwrap_or("otsu") {
        "otsu" => (ThresholdMethod::Otsu, "otsu".to_string()),
        "fixed" => {
            let t = cfg.get_f64("preprocess.threshold_value")?.ok_or_else(|| {
                CliError::Config(
                    "preprocess.threshold = fixed needs preprocess.threshold_value".into(),
                )
            })?;
            (ThresholdMethod::Fixed(t), "fixed".to_string())
        }
        other => {
            return Err(CliError::Config(format!(
                "preprocess.threshold: '{other}' is not one of otsu, fixed"
            )))
        }
    };
    let threshold_used = match method {
        ThresholdMethod::Otsu => texplane::imaging::otsu_threshold(&mag).map_err(CliError::from)?,
        ThresholdMethod::Fixed(t) => t,
    };
    let mask = threshold_boundaries(&mag, method).map_err(CliError::from)?;
    let dist = distance_transform(&mask).map_err(CliError::from)?;
    let margin_x = cfg.usize_or("preprocess.margin_x", 107)?;
    let margin_y = cfg.usize_or("preprocess.margin_y", 57)?;
    let window = window_from_config(cfg)?;
    let map = to_probability_map(&dist, window, margin_x, margin_y).map_err(CliError::from)?;
    let meta = MapMeta {
        width: map.width(),
        height: map.height(),
        window: *map.window(),
        sigma,
        threshold_method: method_name,
        threshold_used,
        margin_x,
        margin_y,
        source_hash: fnv1a64(image_bytes),
    };
    Ok((map, meta))
}

fn cmd_preprocess(cfg: &Config, run: &RunDir) -> CliResult<()> {
    let input = cfg.require_str("preprocess.input")?;
    let image_bytes = std::fs::read(input)
        .map_err(|e| CliError::Io(format!("cannot read image {input}: {e}")))?;
    let mut manifest = Manifest::new("preprocess", cfg, cfg.u64_or("seed", 0)?);
    manifest.record_input(input, &image_bytes);
    let (map, meta) = stage_preprocess(cfg, &image_bytes)?;
    run.write(&mut manifest, "map.pgm", &map.to_pgm16())?;
    run.write(
        &mut manifest,
        "map.json",
        serde_json::to_string_pretty(&meta)
            .expect("meta")
            .as_bytes(),
    )?;
    run.write_manifest(&mut manifest)?;
    println!(
        "preprocess: {}x{} map -> {}",
        map.width(),
        map.height(),
        run.path().display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// detect
// ---------------------------------------------------------------------------

/// Shared detect stage on the serialized map (so resumed and fresh runs see
/// identical quantized input).
fn stage_detect(
    cfg: &Config,
    map_pgm: &[u8],
    window: ObservationWindow,
) -> CliResult<(PointPattern, String, Option<String>)> {
    let map = ProbabilityMap::from_pgm16(map_pgm, window).map_err(CliError::from)?;
    let params = detection_params(cfg)?;
    let pattern = latent_points(&map, &params).map_err(CliError::from)?;
    let overlay = if cfg.bool_or("detect.overlay", false)? {
        let maxima = local_maxima(&map, params.k1_px).map_err(CliError::from)?;
        let comps = components(&maxima, &map, &params);
        Some(svg::detect_overlay(&map, &maxima, &comps, &pattern))
    } else {
        None
    };
    let meta = PatternMeta {
        window,
        n_points: pattern.len(),
        seed: None,
        prng: None,
        params: cfg.entries().clone(),
    };
    Ok((
        pattern,
        serde_json::to_string_pretty(&meta).expect("meta"),
        overlay,
    ))
}

fn cmd_detect(cfg: &Config, run: &RunDir) -> CliResult<()> {
    let input = cfg.require_str("detect.input")?;
    let map_pgm = std::fs::read(input)
        .map_err(|e| CliError::Io(format!("cannot read probability map {input}: {e}")))?;
    let window = match read_sidecar::<MapMeta>(Path::new(input))? {
        Some(meta) => meta.window,
        None => {
            let img = texplane::imaging::load_pgm(&map_pgm).map_err(CliError::from)?;
            ProbabilityMap::derived_window(img.width(), img.height()).map_err(CliError::from)?
        }
    };
    let mut manifest = Manifest::new("detect", cfg, cfg.u64_or("seed", 0)?);
    manifest.record_input(input, &map_pgm);
    let (pattern, meta_json, overlay) = stage_detect(cfg, &map_pgm, window)?;
    run.write(&mut manifest, "pattern.csv", pattern.to_csv().as_bytes())?;
    run.write(&mut manifest, "pattern.json", meta_json.as_bytes())?;
    if let Some(overlay) = overlay {
        run.write(&mut manifest, "overlay.svg", overlay.as_bytes())?;
    }
    run.write_manifest(&mut manifest)?;
    println!(
        "detect: {} points -> {}",
        pattern.len(),
        run.path().display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

fn stage_estimate(
    cfg: &Config,
    pattern_csv: &str,
    window_fallback: Option<ObservationWindow>,
) -> CliResult<(EstimationResult, PointPattern)> {
    let window = match window_from_config(cfg)? {
        Some(w) => w,
        None => window_fallback.unwrap_or_else(default_photo_window),
    };
    let pattern = PointPattern::from_csv(pattern_csv, window).map_err(CliError::from)?;
    let camera = camera_from_config(cfg, window)?;
    let config = estimation_config(cfg, camera)?;
    let result = estimate_orientation(&pattern, &config).map_err(CliError::from)?;
    Ok((result, pattern))
}

fn cmd_estimate(cfg: &Config, run: &RunDir) -> CliResult<()> {
    let input = cfg.require_str("estimate.input")?;
    let csv = std::fs::read_to_string(input)
        .map_err(|e| CliError::Io(format!("cannot read pattern {input}: {e}")))?;
    let fallback = read_sidecar::<PatternMeta>(Path::new(input))?.map(|m| m.window);
    let mut manifest = Manifest::new("estimate", cfg, cfg.u64_or("seed", 0)?);
    manifest.record_input(input, csv.as_bytes());
    let (result, pattern) = stage_estimate(cfg, &csv, fallback)?;
    run.write(&mut manifest, "result.json", result.to_json().as_bytes())?;
    run.write(
        &mut manifest,
        "orientation.svg",
        svg::orientation(&pattern, result.eta1_hat, result.eta2_hat).as_bytes(),
    )?;
    run.write_manifest(&mut manifest)?;
    println!(
        "estimate: eta1 {:.2} deg, eta2 {:.2} deg (n = {}) -> {}",
        result.eta1_hat.to_degrees(),
        result.eta2_hat.to_degrees(),
        result.n_points,
        run.path().display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// pipeline
// ---------------------------------------------------------------------------

/// Subset of the config owned by one stage, hashed for resume checks.
fn stage_params_hash(cfg: &Config, prefix: &str) -> String {
    let subset: BTreeMap<&String, &String> = cfg
        .entries()
        .iter()
        .filter(|(k, _)| k.starts_with(prefix) || k.starts_with("camera."))
        .collect();
    fnv1a64(serde_json::to_string(&subset).expect("subset").as_bytes())
}

/// True when a previous stage record matches the current inputs and all its
/// outputs are still on disk unchanged; such a stage is skipped.
fn stage_is_current(
    prior: Option<&Manifest>,
    name: &str,
    params_hash: &str,
    input_hash: &str,
    dir: &Path,
) -> bool {
    let Some(prior) = prior else { return false };
    let Some(record) = prior.stages.get(name) else {
        return false;
    };
    if record.params_hash != params_hash || record.input_hash != input_hash {
        return false;
    }
    record.outputs.iter().all(|f| {
        std::fs::read(dir.join(&f.name))
            .map(|bytes| fnv1a64(&bytes) == f.hash)
            .unwrap_or(false)
    })
}

fn cmd_pipeline(cfg: &Config, run: &RunDir) -> CliResult<()> {
    let input = cfg.require_str("preprocess.input")?;
    let image_bytes = std::fs::read(input)
        .map_err(|e| CliError::Io(format!("cannot read image {input}: {e}")))?;
    let prior = Manifest::load(&run.path().join("manifest.json")).ok();
    let mut manifest = Manifest::new("pipeline", cfg, cfg.u64_or("seed", 0)?);
    manifest.record_input(input, &image_bytes);

    // run (or resume) one stage: returns the named artifacts as bytes
    let run_stage = |manifest: &mut Manifest,
                     name: &str,
                     input_hash: &str,
                     compute: &mut dyn FnMut() -> CliResult<Vec<(String, Vec<u8>)>>|
     -> CliResult<Vec<(String, Vec<u8>)>> {
        let params_hash = stage_params_hash(cfg, &format!("{name}."));
        if stage_is_current(prior.as_ref(), name, &params_hash, input_hash, run.path()) {
            let record = prior.as_ref().expect("checked").stages[name].clone();
            let artifacts = record
                .outputs
                .iter()
                .map(|f| {
                    std::fs::read(run.path().join(&f.name))
                        .map(|bytes| (f.name.clone(), bytes))
                        .map_err(|e| CliError::Io(format!("cannot reread {}: {e}", f.name)))
                })
                .collect::<CliResult<Vec<_>>>()?;
            for (n, bytes) in &artifacts {
                manifest.record_output(n, bytes);
            }
            manifest.stages.insert(
                name.to_string(),
                StageRecord {
                    status: "resumed".into(),
                    ..record
                },
            );
            eprintln!("pipeline: stage {name} unchanged, resuming from existing artifacts");
            return Ok(artifacts);
        }
        let artifacts = compute()?;
        let mut outputs = Vec::new();
        for (n, bytes) in &artifacts {
            std::fs::write(run.path().join(n), bytes)
                .map_err(|e| CliError::Io(format!("cannot write {n}: {e}")))?;
            manifest.record_output(n, bytes);
            outputs.push(FileRecord {
                name: n.clone(),
                bytes: bytes.len(),
                hash: fnv1a64(bytes),
            });
        }
        manifest.stages.insert(
            name.to_string(),
            StageRecord {
                params_hash,
                input_hash: input_hash.to_string(),
                outputs,
                status: "computed".into(),
            },
        );
        Ok(artifacts)
    };

    // a failing stage aborts but the manifest still records completed stages
    let finish_failed = |mut manifest: Manifest, run: &RunDir, stage: &str, err: CliError| {
        manifest.stages.insert(
            stage.to_string(),
            StageRecord {
                params_hash: String::new(),
                input_hash: String::new(),
                outputs: Vec::new(),
                status: format!("failed: {err}"),
            },
        );
        let _ = run.write_manifest(&mut manifest);
        err
    };

    // preprocess
    let image_hash = fnv1a64(&image_bytes);
    let mut compute_pre = || -> CliResult<Vec<(String, Vec<u8>)>> {
        let (map, meta) = stage_preprocess(cfg, &image_bytes)?;
        Ok(vec![
            ("map.pgm".into(), map.to_pgm16()),
            (
                "map.json".into(),
                serde_json::to_string_pretty(&meta)
                    .expect("meta")
                    .into_bytes(),
            ),
        ])
    };
    let pre = match run_stage(&mut manifest, "preprocess", &image_hash, &mut compute_pre) {
        Ok(v) => v,
        Err(e) => return Err(finish_failed(manifest, run, "preprocess", e)),
    };
    let map_pgm = pre
        .iter()
        .find(|(n, _)| n == "map.pgm")
        .map(|(_, b)| b.clone())
        .ok_or_else(|| CliError::Io("preprocess produced no map.pgm".into()))?;
    let map_meta: MapMeta = pre
        .iter()
        .find(|(n, _)| n == "map.json")
        .ok_or_else(|| CliError::Io("preprocess produced no map.json".into()))
        .and_then(|(_, b)| {
            serde_json::from_slice(b).map_err(|e| CliError::Io(format!("map.json: {e}")))
        })?;

    // detect
    let map_hash = fnv1a64(&map_pgm);
    let mut compute_det = || -> CliResult<Vec<(String, Vec<u8>)>> {
        let (pattern, meta_json, overlay) = stage_detect(cfg, &map_pgm, map_meta.window)?;
        let mut artifacts = vec![
            ("pattern.csv".into(), pattern.to_csv().into_bytes()),
            ("pattern.json".into(), meta_json.into_bytes()),
        ];
        if let Some(overlay) = overlay {
            artifacts.push(("overlay.svg".into(), overlay.into_bytes()));
        }
        Ok(artifacts)
    };
    let det = match run_stage(&mut manifest, "detect", &map_hash, &mut compute_det) {
        Ok(v) => v,
        Err(e) => return Err(finish_failed(manifest, run, "detect", e)),
    };
    let pattern_csv = det
        .iter()
        .find(|(n, _)| n == "pattern.csv")
        .map(|(_, b)| String::from_utf8_lossy(b).into_owned())
        .ok_or_else(|| CliError::Io("detect produced no pattern.csv".into()))?;

    // estimate
    let pattern_hash = fnv1a64(pattern_csv.as_bytes());
    let mut compute_est = || -> CliResult<Vec<(String, Vec<u8>)>> {
        let (result, pattern) = stage_estimate(cfg, &pattern_csv, Some(map_meta.window))?;
        Ok(vec![
            ("result.json".into(), result.to_json().into_bytes()),
            (
                "orientation.svg".into(),
                svg::orientation(&pattern, result.eta1_hat, result.eta2_hat).into_bytes(),
            ),
        ])
    };
    let est = match run_stage(&mut manifest, "estimate", &pattern_hash, &mut compute_est) {
        Ok(v) => v,
        Err(e) => return Err(finish_failed(manifest, run, "estimate", e)),
    };

    run.write_manifest(&mut manifest)?;
    let result: serde_json::Value = est
        .iter()
        .find(|(n, _)| n == "result.json")
        .and_then(|(_, b)| serde_json::from_slice(b).ok())
        .unwrap_or(serde_json::Value::Null);
    println!(
        "pipeline: eta1 {} deg, eta2 {} deg -> {}",
        result["eta1_deg"],
        result["eta2_deg"],
        run.path().display()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// plot
// ---------------------------------------------------------------------------

fn cmd_plot(cfg: &Config, run: &RunDir) -> CliResult<()> {
    let input = cfg.require_str("plot.input")?;
    let csv = std::fs::read_to_string(input)
        .map_err(|e| CliError::Io(format!("cannot read pattern {input}: {e}")))?;
    let window = match window_from_config(cfg)? {
        Some(w) => w,
        None => match read_sidecar::<PatternMeta>(Path::new(input))? {
            Some(meta) => meta.window,
            None => ObservationWindow::unit_square(),
        },
    };
    let pattern = PointPattern::from_csv(&csv, window).map_err(CliError::from)?;
    let mut manifest = Manifest::new("plot", cfg, cfg.u64_or("seed", 0)?);
    manifest.record_input(input, csv.as_bytes());
    let figure = match cfg.get_str("plot.result") {
        Some(result_path) => {
            let text = std::fs::read_to_string(result_path)
                .map_err(|e| CliError::Io(format!("cannot read result {result_path}: {e}")))?;
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Io(format!("cannot parse result {result_path}: {e}")))?;
            let eta1 = value["eta1_deg"].as_f64().unwrap_or(0.0).to_radians();
            let eta2 = value["eta2_deg"].as_f64().unwrap_or(0.0).to_radians();
            svg::orientation(&pattern, eta1, eta2)
        }
        None => svg::scatter(&pattern),
    };
    run.write(&mut manifest, "scatter.svg", figure.as_bytes())?;
    run.write_manifest(&mut manifest)?;
    println!("plot: {} points -> {}", pattern.len(), run.path().display());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use texplane::geometry::focal_from_fov;

    #[test]
    fn window_config_requires_all_corners() {
        let mut cfg = Config::new();
        assert!(window_from_config(&cfg).unwrap().is_none());
        cfg.set("camera.a1", "-0.5");
        assert!(window_from_config(&cfg).is_err());
        cfg.set("camera.a2", "0.5");
        cfg.set("camera.b1", "-0.5");
        cfg.set("camera.b2", "0.5");
        let w = window_from_config(&cfg).unwrap().unwrap();
        assert_eq!(w, ObservationWindow::unit_square());
    }

    #[test]
    fn camera_validates_exclusive_focal_options() {
        let cfg = Config::new();
        let cam = camera_from_config(&cfg, ObservationWindow::unit_square()).unwrap();
        assert!((cam.focal_length - 0.98).abs() < 1e-12);
        let mut cfg = Config::new();
        cfg.set("camera.fov_deg", "54");
        let cam = camera_from_config(&cfg, ObservationWindow::unit_square()).unwrap();
        assert!(
            (cam.focal_length - focal_from_fov(54f64.to_radians(), &cam.window).unwrap()).abs()
                < 1e-15
        );
        cfg.set("camera.f", "0.98");
        assert!(camera_from_config(&cfg, ObservationWindow::unit_square()).is_err());
    }

    #[test]
    fn detect_presets() {
        let mut cfg = Config::new();
        assert_eq!(detection_params(&cfg).unwrap().k1_px, 37);
        cfg.set("detect.preset", "bricks");
        assert_eq!(detection_params(&cfg).unwrap().k1_px, 27);
        cfg.set("detect.k1_px", "10");
        assert_eq!(detection_params(&cfg).unwrap().k1_px, 10);
        cfg.set("detect.preset", "marble");
        assert!(detection_params(&cfg).is_err());
    }
}
