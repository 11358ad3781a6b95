//! Ground-truth point pattern synthesis.
//!
//! Two routes target the same image-side intensity `alpha(x) = beta c^{-2}(x)`:
//!
//! - [`simulate_on_plane`] builds a homogeneous pattern (lattice or Poisson)
//!   on the 3D plane and projects it through the camera, which is how the
//!   perspective model is motivated;
//! - [`simulate_by_thinning`] samples the image-side inhomogeneous Poisson
//!   process directly by thinning a dominating homogeneous process, serving as
//!   an independent oracle for the first route.
//!
//! Patterns are deterministic functions of (spec, seed).

use crate::error::{Error, Result};
use crate::geometry::{
    backproject, cross3, dot3, project_to_image, CameraModel, ObservationWindow, Point2,
    ScalingContext, SurfaceOrientation, Vec3,
};
use crate::rng::Rng;

/// Finite point pattern in window coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    points: Vec<Point2>,
    window: ObservationWindow,
}

impl PointPattern {
    /// Validates that every point lies inside the window and that no two
    /// points coincide exactly (multiplicity is not modeled).
    pub fn new(points: Vec<Point2>, window: ObservationWindow) -> Result<Self> {
        for &p in &points {
            if !window.contains(p) {
                return Err(Error::PointOutsideWindow { x1: p[0], x2: p[1] });
            }
        }
        let mut sorted: Vec<Point2> = points.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicatePoint {
                    x1: w[0][0],
                    x2: w[0][1],
                });
            }
        }
        Ok(Self { points, window })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn window(&self) -> &ObservationWindow {
        &self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV form: header `x1,x2`, one point per line, 17 significant digits
    /// (lossless for f64).
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(16 + 48 * self.points.len());
        out.push_str("x1,x2\n");
        for p in &self.points {
            out.push_str(&format!("{:.16e},{:.16e}\n", p[0], p[1]));
        }
        out
    }

    pub fn from_csv(text: &str, window: ObservationWindow) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, header)) if header.trim() == "x1,x2" => {}
            Some((_, header)) => {
                return Err(Error::CsvParse {
                    line: 1,
                    message: format!("expected header 'x1,x2', got '{header}'"),
                })
            }
            None => {
                return Err(Error::CsvParse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        }
        let mut points = Vec::new();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.ok_or_else(|| Error::CsvParse {
                    line: idx + 1,
                    message: "expected two comma-separated values".into(),
                })?
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::CsvParse {
                    line: idx + 1,
                    message: e.to_string(),
                })
            };
            let x1 = parse(cols.next())?;
            let x2 = parse(cols.next())?;
            if cols.next().is_some() {
                return Err(Error::CsvParse {
                    line: idx + 1,
                    message: "more than two columns".into(),
                });
            }
            points.push([x1, x2]);
        }
        Self::new(points, window)
    }

    /// Rotates the pattern by an integer number of quarter turns about the
    /// center of a square window (used by equivariance checks).
    pub fn rotate_quarter_turns(&self, turns: u32) -> Result<Self> {
        let w = self.window;
        if (w.width() - w.height()).abs() > 1e-12 {
            return Err(Error::InvalidSimulationParameter(
                "quarter-turn rotation requires a square window".into(),
            ));
        }
        let c = w.center();
        let points = self
            .points
            .iter()
            .map(|p| {
                let (mut dx, mut dy) = (p[0] - c[0], p[1] - c[1]);
                for _ in 0..(turns % 4) {
                    let (nx, ny) = (-dy, dx);
                    dx = nx;
                    dy = ny;
                }
                [c[0] + dx, c[1] + dy]
            })
            .collect();
        Self::new(points, w)
    }

    /// Mirrors the pattern across the horizontal axis through the window
    /// center.
    pub fn mirror_x1_axis(&self) -> Result<Self> {
        let w = self.window;
        let cy = (w.b1 + w.b2) / 2.0;
        let points = self
            .points
            .iter()
            .map(|p| [p[0], 2.0 * cy - p[1]])
            .collect();
        Self::new(points, w)
    }
}

/// Pattern family generated on the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternKind {
    /// Square lattice with the given spacing, anchored at the back-projection
    /// of the window center.
    Regular,
    /// Homogeneous Poisson process with the given intensity (points per unit
    /// plane area).
    Poisson,
}

/// Full description of a plane-side simulation.
#[derive(Debug, Clone)]
pub struct SimulationSpec {
    pub kind: PatternKind,
    /// Lattice spacing (regular) in plane units.
    pub grid_spacing: Option<f64>,
    /// Intensity (poisson) in points per unit plane area.
    pub plane_intensity: Option<f64>,
    pub orientation: SurfaceOrientation,
    pub camera: CameraModel,
    pub seed: u64,
    /// Offset the lattice by a uniform random phase (regular only); the
    /// default anchors the lattice at the back-projection of the window
    /// center, where the phase is unidentifiable anyway.
    pub random_phase: bool,
}

impl SimulationSpec {
    pub fn regular(
        grid_spacing: f64,
        orientation: SurfaceOrientation,
        camera: CameraModel,
        seed: u64,
    ) -> Result<Self> {
        if !(grid_spacing.is_finite() && grid_spacing > 0.0) {
            return Err(Error::InvalidSimulationParameter(format!(
                "grid spacing must be positive, got {grid_spacing}"
            )));
        }
        Ok(Self {
            kind: PatternKind::Regular,
            grid_spacing: Some(grid_spacing),
            plane_intensity: None,
            orientation,
            camera,
            seed,
            random_phase: false,
        })
    }

    pub fn poisson(
        plane_intensity: f64,
        orientation: SurfaceOrientation,
        camera: CameraModel,
        seed: u64,
    ) -> Result<Self> {
        if !(plane_intensity.is_finite() && plane_intensity > 0.0) {
            return Err(Error::InvalidSimulationParameter(format!(
                "plane intensity must be positive, got {plane_intensity}"
            )));
        }
        Ok(Self {
            kind: PatternKind::Poisson,
            grid_spacing: None,
            plane_intensity: Some(plane_intensity),
            orientation,
            camera,
            seed,
            random_phase: false,
        })
    }

    /// Regular spec whose expected in-window point count is approximately
    /// `target`: the spacing solves `|D| / (gamma s^2) = target`.
    pub fn regular_with_target_count(
        target: usize,
        orientation: SurfaceOrientation,
        camera: CameraModel,
        seed: u64,
    ) -> Result<Self> {
        let ctx = ScalingContext::new(orientation, camera)?;
        let spacing = (camera.window.area() / (ctx.gamma() * target as f64)).sqrt();
        Self::regular(spacing, orientation, camera, seed)
    }

    /// Poisson spec whose expected in-window count is `beta * |D|` for the
    /// image-side intensity scale `beta`: `plane_intensity = beta * gamma`.
    pub fn poisson_with_image_beta(
        beta: f64,
        orientation: SurfaceOrientation,
        camera: CameraModel,
        seed: u64,
    ) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidSimulationParameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        let ctx = ScalingContext::new(orientation, camera)?;
        Self::poisson(beta * ctx.gamma(), orientation, camera, seed)
    }
}

/// Orthonormal in-plane basis with `e1` aligned with the world `X1` axis as
/// far as the normal allows; right-handed with the normal.
fn plane_basis(normal: Vec3) -> (Vec3, Vec3) {
    let u: Vec3 = [1.0, 0.0, 0.0];
    let proj = dot3(u, normal);
    let mut e1 = [
        u[0] - proj * normal[0],
        u[1] - proj * normal[1],
        u[2] - proj * normal[2],
    ];
    let n = crate::geometry::norm3(e1);
    // the slant never reaches 90 degrees for admissible orientations, so e1
    // cannot degenerate; guard anyway
    if n < 1e-9 {
        e1 = [0.0, 1.0, 0.0];
    } else {
        e1 = [e1[0] / n, e1[1] / n, e1[2] / n];
    }
    let e2 = cross3(normal, e1);
    (e1, e2)
}

/// Generates a homogeneous pattern on the plane region whose image covers the
/// window and projects it into the window.
///
/// The plane region is the bounding box (in plane coordinates) of the
/// back-projected window corners, dilated by three lattice spacings or mean
/// Poisson gaps so that boundary clipping cannot bias in-window counts.
pub fn simulate_on_plane(spec: &SimulationSpec) -> Result<PointPattern> {
    let orientation = &spec.orientation;
    let camera = &spec.camera;
    if !orientation.is_admissible(camera) {
        return Err(Error::InadmissibleOrientation {
            eta1: orientation.eta1(),
            eta2: orientation.eta2(),
        });
    }
    let normal = orientation.normal();
    let (e1, e2) = plane_basis(normal);
    let origin = backproject(camera.window.center(), orientation, camera)?;

    // window corner preimages in plane coordinates
    let mut s_min = f64::INFINITY;
    let mut s_max = f64::NEG_INFINITY;
    let mut t_min = f64::INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    for corner in camera.window.corners() {
        let xp = backproject(corner, orientation, camera)?;
        let rel = [xp[0] - origin[0], xp[1] - origin[1], xp[2] - origin[2]];
        let s = dot3(rel, e1);
        let t = dot3(rel, e2);
        s_min = s_min.min(s);
        s_max = s_max.max(s);
        t_min = t_min.min(t);
        t_max = t_max.max(t);
    }

    let gap = match spec.kind {
        PatternKind::Regular => spec.grid_spacing.ok_or_else(|| {
            Error::InvalidSimulationParameter("regular kind requires grid_spacing".into())
        })?,
        PatternKind::Poisson => {
            let intensity = spec.plane_intensity.ok_or_else(|| {
                Error::InvalidSimulationParameter("poisson kind requires plane_intensity".into())
            })?;
            1.0 / intensity.sqrt()
        }
    };
    let margin = 3.0 * gap;
    s_min -= margin;
    s_max += margin;
    t_min -= margin;
    t_max += margin;

    let mut rng = Rng::seed_from(spec.seed);
    let mut plane_points: Vec<(f64, f64)> = Vec::new();
    match spec.kind {
        PatternKind::Regular => {
            let sp = gap;
            let (p1, p2) = if spec.random_phase {
                (rng.next_f64() * sp, rng.next_f64() * sp)
            } else {
                (0.0, 0.0)
            };
            let i_lo = ((s_min - p1) / sp).ceil() as i64;
            let i_hi = ((s_max - p1) / sp).floor() as i64;
            let j_lo = ((t_min - p2) / sp).ceil() as i64;
            let j_hi = ((t_max - p2) / sp).floor() as i64;
            for j in j_lo..=j_hi {
                for i in i_lo..=i_hi {
                    plane_points.push((p1 + i as f64 * sp, p2 + j as f64 * sp));
                }
            }
        }
        PatternKind::Poisson => {
            let intensity = spec.plane_intensity.expect("validated above");
            let area = (s_max - s_min) * (t_max - t_min);
            let n = rng.poisson(intensity * area);
            for _ in 0..n {
                plane_points.push((rng.uniform(s_min, s_max), rng.uniform(t_min, t_max)));
            }
        }
    }

    let mut points = Vec::new();
    for (s, t) in plane_points {
        let xp = [
            origin[0] + s * e1[0] + t * e2[0],
            origin[1] + s * e1[1] + t * e2[1],
            origin[2] + s * e1[2] + t * e2[2],
        ];
        if xp[2] >= 0.0 {
            // parts of the dilated plane box can lie behind the camera
            continue;
        }
        let x = project_to_image(xp, camera)?;
        if camera.window.contains(x) {
            points.push(x);
        }
    }
    PointPattern::new(points, camera.window)
}

/// Samples the inhomogeneous Poisson process with intensity
/// `beta c^{-2}(x)` directly on the window by thinning.
///
/// The dominating homogeneous rate is `beta * 1.01 * max c^{-2}` with the
/// maximum taken over a 512 x 512 grid of pixel centers; a candidate at `x`
/// survives with probability `c^{-2}(x) / max`.
pub fn simulate_by_thinning(beta: f64, ctx: &ScalingContext, seed: u64) -> Result<PointPattern> {
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::InvalidSimulationParameter(format!(
            "beta must be positive, got {beta}"
        )));
    }
    let w = ctx.camera().window;
    let n_grid = 512;
    let mut max_c2 = 0.0f64;
    let (hx, hy) = (w.width() / n_grid as f64, w.height() / n_grid as f64);
    for j in 0..n_grid {
        let y = w.b1 + (j as f64 + 0.5) * hy;
        for i in 0..n_grid {
            let x = w.a1 + (i as f64 + 0.5) * hx;
            max_c2 = max_c2.max(ctx.c_inv2([x, y])?);
        }
    }
    let bound = 1.01 * max_c2;

    let mut rng = Rng::seed_from(seed);
    let n = rng.poisson(beta * bound * w.area());
    let mut points = Vec::new();
    for _ in 0..n {
        let x = rng.uniform(w.a1, w.a2);
        let y = rng.uniform(w.b1, w.b2);
        let accept = (ctx.c_inv2([x, y])? / bound).min(1.0);
        if rng.next_f64() < accept {
            points.push([x, y]);
        }
    }
    PointPattern::new(points, w)
}

/// Expected point count of the model over a subrectangle of the window:
/// `beta * integral_region c^{-2}` by 256 x 256 midpoint quadrature.
pub fn expected_count(region: &ObservationWindow, beta: f64, ctx: &ScalingContext) -> Result<f64> {
    expected_count_with_grid(region, beta, ctx, 256, 256)
}

/// [`expected_count`] with an explicit quadrature grid.
pub fn expected_count_with_grid(
    region: &ObservationWindow,
    beta: f64,
    ctx: &ScalingContext,
    nx: usize,
    ny: usize,
) -> Result<f64> {
    let w = &ctx.camera().window;
    if region.a1 < w.a1 - 1e-12
        || region.a2 > w.a2 + 1e-12
        || region.b1 < w.b1 - 1e-12
        || region.b2 > w.b2 + 1e-12
    {
        return Err(Error::InvalidSimulationParameter(
            "region must be contained in the observation window".into(),
        ));
    }
    let (hx, hy) = (region.width() / nx as f64, region.height() / ny as f64);
    let mut integral = 0.0;
    for j in 0..ny {
        let y = region.b1 + (j as f64 + 0.5) * hy;
        for i in 0..nx {
            let x = region.a1 + (i as f64 + 0.5) * hx;
            integral += ctx.c_inv2([x, y])?;
        }
    }
    Ok(beta * integral * hx * hy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn paper_camera() -> CameraModel {
        CameraModel::new(0.98, ObservationWindow::unit_square()).unwrap()
    }

    #[test]
    fn pattern_rejects_out_of_window_and_duplicates() {
        let w = ObservationWindow::unit_square();
        assert!(PointPattern::new(vec![[0.7, 0.0]], w).is_err());
        assert!(PointPattern::new(vec![[0.1, 0.1], [0.1, 0.1]], w).is_err());
        assert!(PointPattern::new(vec![[0.1, 0.1], [0.1, 0.2]], w).is_ok());
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let w = ObservationWindow::unit_square();
        let spec = SimulationSpec::poisson(
            300.0,
            SurfaceOrientation::with_distance(0.6, 1.0, 20.0).unwrap(),
            paper_camera(),
            5,
        )
        .unwrap();
        let pattern = simulate_on_plane(&spec).unwrap();
        assert!(!pattern.is_empty());
        let csv = pattern.to_csv();
        let back = PointPattern::from_csv(&csv, w).unwrap();
        assert_eq!(pattern, back);
    }

    #[test]
    fn csv_rejects_malformed_input() {
        let w = ObservationWindow::unit_square();
        assert!(PointPattern::from_csv("", w).is_err());
        assert!(PointPattern::from_csv("a,b\n", w).is_err());
        assert!(PointPattern::from_csv("x1,x2\n0.1\n", w).is_err());
        assert!(PointPattern::from_csv("x1,x2\n0.1,0.2,0.3\n", w).is_err());
        assert!(PointPattern::from_csv("x1,x2\nfoo,0.2\n", w).is_err());
    }

    #[test]
    fn simulation_is_deterministic() {
        let spec = SimulationSpec::poisson(
            400.0,
            SurfaceOrientation::with_distance(0.5, 0.3, 20.0).unwrap(),
            paper_camera(),
            99,
        )
        .unwrap();
        let a = simulate_on_plane(&spec).unwrap();
        let b = simulate_on_plane(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());

        let ctx = ScalingContext::new(spec.orientation, spec.camera).unwrap();
        let t1 = simulate_by_thinning(200.0, &ctx, 7).unwrap();
        let t2 = simulate_by_thinning(200.0, &ctx, 7).unwrap();
        assert_eq!(t1, t2);
        assert_ne!(t1, simulate_by_thinning(200.0, &ctx, 8).unwrap());
    }

    #[test]
    fn fronto_parallel_regular_grid_has_scaled_spacing() {
        // constant scale factor h/f: plane spacing s maps to image spacing s*f/h
        let h = 20.0;
        let f = 0.98;
        let spacing = 2.0;
        let cam = paper_camera();
        let o = SurfaceOrientation::with_distance(0.0, 0.0, h).unwrap();
        let spec = SimulationSpec::regular(spacing, o, cam, 1).unwrap();
        let pattern = simulate_on_plane(&spec).unwrap();
        assert!(!pattern.is_empty());
        let expect = spacing * f / h;
        // anchored at the window center: every coordinate is a multiple of the
        // image spacing
        for p in pattern.points() {
            let r0 = (p[0] / expect - (p[0] / expect).round()).abs();
            let r1 = (p[1] / expect - (p[1] / expect).round()).abs();
            assert!(r0 < 1e-9 && r1 < 1e-9, "point {p:?} not on the scaled grid");
        }
        // nearest-neighbour spacing equals the scaled spacing
        let pts = pattern.points();
        let mut min_gap = f64::INFINITY;
        for (i, a) in pts.iter().enumerate() {
            for b in pts.iter().skip(i + 1) {
                min_gap = min_gap.min(crate::geometry::dist2(*a, *b));
            }
        }
        assert!((min_gap - expect).abs() < 1e-9);
    }

    #[test]
    fn regular_points_backproject_onto_lattice() {
        // projection fidelity: image points land on the plane lattice
        let cam = paper_camera();
        let o = SurfaceOrientation::with_distance(45f64.to_radians(), 0.0, 20.0).unwrap();
        let spacing = 3.0;
        let spec = SimulationSpec::regular(spacing, o, cam, 3).unwrap();
        let pattern = simulate_on_plane(&spec).unwrap();
        assert!(pattern.len() > 20, "pattern has {} points", pattern.len());
        let (e1, e2) = plane_basis(o.normal());
        let origin = backproject(cam.window.center(), &o, &cam).unwrap();
        for &p in pattern.points() {
            let xp = backproject(p, &o, &cam).unwrap();
            let rel = [xp[0] - origin[0], xp[1] - origin[1], xp[2] - origin[2]];
            let s = dot3(rel, e1) / spacing;
            let t = dot3(rel, e2) / spacing;
            assert!(
                (s - s.round()).abs() < 1e-9 && (t - t.round()).abs() < 1e-9,
                "backprojection ({s}, {t}) off-lattice"
            );
        }
    }

    #[test]
    fn tilted_pattern_shows_density_gradient() {
        // delta = (1/sqrt2, 0, 1/sqrt2): the far side of the plane images to
        // positive x1, so the right half must hold more points; the expected
        // ratio comes from quadrature of the model intensity.
        let cam = paper_camera();
        let o = SurfaceOrientation::with_distance(45f64.to_radians(), 0.0, 20.0).unwrap();
        let ctx = ScalingContext::new(o, cam).unwrap();
        let left = ObservationWindow::new(-0.5, 0.0, -0.5, 0.5).unwrap();
        let right = ObservationWindow::new(0.0, 0.5, -0.5, 0.5).unwrap();
        let e_left = expected_count(&left, 300.0, &ctx).unwrap();
        let e_right = expected_count(&right, 300.0, &ctx).unwrap();
        assert!(
            e_right / e_left > 1.3,
            "expected-count ratio {} should exceed 1.3",
            e_right / e_left
        );

        // Monte Carlo agreement of the plane sampler with the quadrature split
        let spec = SimulationSpec::poisson_with_image_beta(300.0, o, cam, 17).unwrap();
        let seeds = 200;
        let (mut n_left, mut n_right) = (0.0, 0.0);
        for seed in 0..seeds {
            let mut s = spec.clone();
            s.seed = seed;
            let pattern = simulate_on_plane(&s).unwrap();
            for p in pattern.points() {
                if p[0] < 0.0 {
                    n_left += 1.0;
                } else {
                    n_right += 1.0;
                }
            }
        }
        let runs = seeds as f64;
        let se_left = (e_left / runs).sqrt();
        let se_right = (e_right / runs).sqrt();
        assert!(
            (n_left / runs - e_left).abs() < 3.0 * se_left,
            "left: {} vs {}",
            n_left / runs,
            e_left
        );
        assert!(
            (n_right / runs - e_right).abs() < 3.0 * se_right,
            "right: {} vs {}",
            n_right / runs,
            e_right
        );
    }

    #[test]
    fn thinning_fronto_parallel_is_homogeneous_poisson() {
        let cam = paper_camera();
        let ctx = ScalingContext::new(SurfaceOrientation::new(0.0, 0.0), cam).unwrap();
        let beta = 150.0;
        let seeds = 500;
        let mut total = 0usize;
        for seed in 0..seeds {
            total += simulate_by_thinning(beta, &ctx, seed).unwrap().len();
        }
        let mean = total as f64 / seeds as f64;
        let se = (beta / seeds as f64).sqrt();
        assert!((mean - beta).abs() < 3.0 * se, "mean {mean} vs beta {beta}");
    }

    #[test]
    fn thinning_count_matches_expected_count() {
        let cam = paper_camera();
        let o = SurfaceOrientation::new(40f64.to_radians(), 1.2);
        let ctx = ScalingContext::new(o, cam).unwrap();
        let beta = 200.0;
        // conservation: expected total equals beta |D|
        let e_total = expected_count(&ctx.camera().window, beta, &ctx).unwrap();
        assert!((e_total - beta).abs() < 1e-4 * beta);
        let seeds = 500;
        let mut total = 0usize;
        for seed in 0..seeds {
            total += simulate_by_thinning(beta, &ctx, seed).unwrap().len();
        }
        let mean = total as f64 / seeds as f64;
        let se = (beta / seeds as f64).sqrt();
        assert!(
            (mean - e_total).abs() < 3.0 * se,
            "mean {mean} vs expected {e_total}"
        );
    }

    #[test]
    fn samplers_agree_in_distribution() {
        // Same beta through both routes; pooled x1 histograms over 500 seeds
        // must pass a 10-bin chi-square test at the 1% level.
        let cam = paper_camera();
        let o = SurfaceOrientation::with_distance(45f64.to_radians(), 0.0, 20.0).unwrap();
        let ctx = ScalingContext::new(o, cam).unwrap();
        let beta = 60.0;
        let seeds = 500u64;
        let bins = 10;
        let mut h_plane = vec![0.0f64; bins];
        let mut h_thin = vec![0.0f64; bins];
        let spec = SimulationSpec::poisson_with_image_beta(beta, o, cam, 0).unwrap();
        for seed in 0..seeds {
            let mut s = spec.clone();
            s.seed = seed;
            for p in simulate_on_plane(&s).unwrap().points().iter() {
                let b = (((p[0] + 0.5) * bins as f64) as usize).min(bins - 1);
                h_plane[b] += 1.0;
            }
            for p in simulate_by_thinning(beta, &ctx, seed + 1_000_000)
                .unwrap()
                .points()
                .iter()
            {
                let b = (((p[0] + 0.5) * bins as f64) as usize).min(bins - 1);
                h_thin[b] += 1.0;
            }
        }
        let n1: f64 = h_plane.iter().sum();
        let n2: f64 = h_thin.iter().sum();
        let mut chi2 = 0.0;
        for i in 0..bins {
            let pooled = (h_plane[i] + h_thin[i]) / (n1 + n2);
            let e1 = n1 * pooled;
            let e2 = n2 * pooled;
            if e1 > 0.0 {
                chi2 += (h_plane[i] - e1).powi(2) / e1;
            }
            if e2 > 0.0 {
                chi2 += (h_thin[i] - e2).powi(2) / e2;
            }
        }
        // chi-square 99th percentile, 9 degrees of freedom
        assert!(chi2 < 21.666, "two-sample chi-square {chi2} exceeds 21.666");
    }

    #[test]
    fn expected_count_trivial_cases() {
        let cam = paper_camera();
        let ctx = ScalingContext::new(SurfaceOrientation::new(0.0, 0.0), cam).unwrap();
        let full = expected_count(&ctx.camera().window, 100.0, &ctx).unwrap();
        assert!((full - 100.0).abs() < 1e-9);
        let region = ObservationWindow::new(-0.5, -0.25, 0.0, 0.5).unwrap();
        let part = expected_count(&region, 100.0, &ctx).unwrap();
        assert!((part - 100.0 * region.area()).abs() < 1e-9);
        let outside = ObservationWindow::new(-0.5, 0.75, 0.0, 0.5).unwrap();
        assert!(expected_count(&outside, 100.0, &ctx).is_err());
    }

    #[test]
    fn all_points_lie_in_window() {
        let cam = paper_camera();
        let mut seed = 0;
        for &(e1, e2) in &[(0.0f64, 0.0f64), (45.0, 0.0), (30.0, 45.0), (55.0, 200.0)] {
            let o =
                SurfaceOrientation::with_distance(e1.to_radians(), e2.to_radians(), 20.0).unwrap();
            for kind in 0..2 {
                seed += 1;
                let spec = if kind == 0 {
                    SimulationSpec::regular_with_target_count(200, o, cam, seed).unwrap()
                } else {
                    SimulationSpec::poisson_with_image_beta(200.0, o, cam, seed).unwrap()
                };
                let pattern = simulate_on_plane(&spec).unwrap();
                assert!(pattern.points().iter().all(|&p| cam.window.contains(p)));
                assert!(
                    pattern.len() > 100 && pattern.len() < 400,
                    "target 200, got {}",
                    pattern.len()
                );
            }
        }
    }

    #[test]
    fn rotation_and_mirror_helpers() {
        let w = ObservationWindow::unit_square();
        let p = PointPattern::new(vec![[0.3, 0.1], [-0.2, -0.4]], w).unwrap();
        let r = p.rotate_quarter_turns(1).unwrap();
        assert!((r.points()[0][0] + 0.1).abs() < 1e-15);
        assert!((r.points()[0][1] - 0.3).abs() < 1e-15);
        let r4 = p.rotate_quarter_turns(4).unwrap();
        assert_eq!(p, r4);
        let m = p.mirror_x1_axis().unwrap();
        assert!((m.points()[0][1] + 0.1).abs() < 1e-15);
        assert!((m.points()[1][1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn random_phase_changes_regular_pattern() {
        let cam = paper_camera();
        let o = SurfaceOrientation::with_distance(0.3, PI / 3.0, 20.0).unwrap();
        let mut spec = SimulationSpec::regular(2.0, o, cam, 5).unwrap();
        let anchored = simulate_on_plane(&spec).unwrap();
        spec.random_phase = true;
        let shifted = simulate_on_plane(&spec).unwrap();
        assert_ne!(anchored, shifted);
    }
}
