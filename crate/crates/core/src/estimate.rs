//! Composite-likelihood fit of the locally scaled point-process model.
//!
//! The composite likelihood of a pattern under intensity `beta c^{-2}(x)`
//! factorizes so that `beta` is estimated by `n / |D|` and the orientation by
//! maximizing the profile objective `sum_i log c^{-2}(x_i)` over the slant and
//! tilt. The objective is cheap but multimodal in the tilt near zero slant, so
//! the maximizer is an exhaustive coarse grid followed by Nelder-Mead
//! refinement from the best cell; inadmissible candidates score negative
//! infinity, which lets the search domain adapt to the tilt-dependent slant
//! bound.

use crate::error::{Error, Result};
use crate::geometry::{admissible_slant_bound, CameraModel, ScalingContext, SurfaceOrientation};
use crate::simulate::PointPattern;
use std::f64::consts::PI;

/// Optimizer settings for [`estimate_orientation`].
#[derive(Debug, Clone, Copy)]
pub struct EstimationConfig {
    pub camera: CameraModel,
    /// Grid resolution in the slant direction over `[0, u)`.
    pub grid_eta1: usize,
    /// Grid resolution in the tilt direction over `[0, 2 pi)`.
    pub grid_eta2: usize,
    /// Simplex convergence tolerance on the objective range.
    pub refine_tol: f64,
    pub max_iter: usize,
}

impl EstimationConfig {
    pub fn new(camera: CameraModel) -> Self {
        Self {
            camera,
            grid_eta1: 64,
            grid_eta2: 128,
            refine_tol: 1e-6,
            max_iter: 400,
        }
    }
}

/// Optimizer diagnostics attached to every estimate.
#[derive(Debug, Clone, serde::Serialize)]
pub struct Diagnostics {
    pub grid_eta1: usize,
    pub grid_eta2: usize,
    /// Best objective value found on the coarse grid.
    pub grid_best_objective: f64,
    pub refine_iterations: usize,
    pub converged: bool,
    /// Slant estimate hit the pole where the tilt is unidentifiable.
    pub fronto_parallel: bool,
    /// Orientation-free additive constant of the composite log-likelihood,
    /// in the convention `n log(n/|D| - 1)` (NaN when `n <= |D|`).
    pub loglik_constant_legacy: f64,
    /// The same constant in the Poisson-profile convention
    /// `n log(n/|D|) - n`. Neither constant enters the optimization.
    pub loglik_constant_poisson: f64,
}

/// Fitted model parameters.
#[derive(Debug, Clone, serde::Serialize)]
pub struct EstimationResult {
    /// `n / |D|`.
    pub beta_hat: f64,
    /// Slant estimate, radians.
    pub eta1_hat: f64,
    /// Tilt estimate, radians, reduced to `[0, 2 pi)`; zero at the pole.
    pub eta2_hat: f64,
    /// Profile objective at the maximizer.
    pub objective: f64,
    pub n_points: usize,
    pub diagnostics: Diagnostics,
}

impl EstimationResult {
    pub fn orientation(&self) -> SurfaceOrientation {
        SurfaceOrientation::new(self.eta1_hat, self.eta2_hat)
    }

    /// Serializes the result with angles in degrees and the derived normal.
    pub fn to_json(&self) -> String {
        let o = self.orientation();
        let delta = o.normal();
        let value = serde_json::json!({
            "beta_hat": self.beta_hat,
            "eta1_deg": self.eta1_hat.to_degrees(),
            "eta2_deg": self.eta2_hat.to_degrees(),
            "delta": delta,
            "objective": self.objective,
            "n_points": self.n_points,
            "grid": [self.diagnostics.grid_eta1, self.diagnostics.grid_eta2],
            "converged": self.diagnostics.converged,
            "fronto_parallel": self.diagnostics.fronto_parallel,
            "loglik_constant_legacy": nan_to_null(self.diagnostics.loglik_constant_legacy),
            "loglik_constant_poisson": self.diagnostics.loglik_constant_poisson,
        });
        serde_json::to_string_pretty(&value).expect("json serialization cannot fail")
    }
}

fn nan_to_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::Value::Null
    }
}

/// Maximum composite-likelihood estimate of the intensity scale: `n / |D|`.
pub fn beta_hat(n: usize, window: &crate::geometry::ObservationWindow) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyPattern);
    }
    Ok(n as f64 / window.area())
}

/// Orientation-dependent part of the composite log-likelihood:
/// `sum_i log c^{-2}(x_i)`.
pub fn profile_objective(
    pattern: &PointPattern,
    eta1: f64,
    eta2: f64,
    camera: &CameraModel,
) -> Result<f64> {
    let ctx = ScalingContext::new(SurfaceOrientation::new(eta1, eta2), *camera)?;
    let mut sum = 0.0;
    for &p in pattern.points() {
        sum += ctx.c_inv2(p)?.ln();
    }
    Ok(sum)
}

/// Objective used inside the optimizer: negative infinity on inadmissible
/// orientations instead of an error.
fn objective_or_neg_inf(pattern: &PointPattern, eta: [f64; 2], camera: &CameraModel) -> f64 {
    profile_objective(pattern, eta[0], eta[1], camera).unwrap_or(f64::NEG_INFINITY)
}

/// Estimates the surface orientation of a point pattern.
pub fn estimate_orientation(
    pattern: &PointPattern,
    config: &EstimationConfig,
) -> Result<EstimationResult> {
    if pattern.is_empty() {
        return Err(Error::EmptyPattern);
    }
    if config.grid_eta1 < 8 || config.grid_eta2 < 8 {
        return Err(Error::InvalidEstimationParameter(format!(
            "grid must be at least 8 x 8, got {} x {}",
            config.grid_eta1, config.grid_eta2
        )));
    }
    if !config.refine_tol.is_finite() || config.refine_tol <= 0.0 {
        return Err(Error::InvalidEstimationParameter(format!(
            "refine_tol must be positive, got {}",
            config.refine_tol
        )));
    }
    let camera = &config.camera;
    for &p in pattern.points() {
        if !camera.window.contains(p) {
            return Err(Error::PointOutsideWindow { x1: p[0], x2: p[1] });
        }
    }

    // Coarse grid: slant rows span [0, u_max) where u_max is the largest
    // admissibility bound over the tilt grid; cells beyond the bound for
    // their own tilt score -inf.
    let mut u_max: f64 = 0.0;
    let tilts: Vec<f64> = (0..config.grid_eta2)
        .map(|j| 2.0 * PI * j as f64 / config.grid_eta2 as f64)
        .collect();
    for &t in &tilts {
        u_max = u_max.max(admissible_slant_bound(t, camera));
    }

    let mut best = ([0.0f64, 0.0f64], f64::NEG_INFINITY);
    for i in 0..config.grid_eta1 {
        let eta1 = u_max * i as f64 / config.grid_eta1 as f64;
        for &eta2 in &tilts {
            let v = objective_or_neg_inf(pattern, [eta1, eta2], camera);
            if v > best.1 {
                best = ([eta1, eta2], v);
            }
        }
    }
    if best.1 == f64::NEG_INFINITY {
        // cannot happen: eta1 = 0 is admissible for every camera
        return Err(Error::InadmissibleOrientation {
            eta1: 0.0,
            eta2: 0.0,
        });
    }

    // Simplex refinement around the best cell, one grid step wide.
    let step1 = 0.7 * u_max / config.grid_eta1 as f64;
    let step2 = 0.7 * 2.0 * PI / config.grid_eta2 as f64;
    let f = |eta: [f64; 2]| objective_or_neg_inf(pattern, eta, camera);
    let (refined, refined_value, iterations, converged) = nelder_mead_maximize(
        f,
        best.0,
        [step1, step2],
        config.refine_tol,
        config.max_iter,
    );
    let (mut eta1_hat, mut eta2_hat, objective) = if refined_value >= best.1 {
        (refined[0], refined[1], refined_value)
    } else {
        (best.0[0], best.0[1], best.1)
    };

    // canonical ranges: eta1 >= 0 (negative slant equals positive slant at the
    // opposite tilt), eta2 in [0, 2 pi)
    if eta1_hat < 0.0 {
        eta1_hat = -eta1_hat;
        eta2_hat += PI;
    }
    eta2_hat = eta2_hat.rem_euclid(2.0 * PI);
    let fronto_parallel = eta1_hat < 1e-9;
    if fronto_parallel {
        eta1_hat = eta1_hat.max(0.0);
        eta2_hat = 0.0;
    }

    let n = pattern.len();
    let area = camera.window.area();
    let beta = beta_hat(n, &camera.window)?;
    let ratio = n as f64 / area;
    let diagnostics = Diagnostics {
        grid_eta1: config.grid_eta1,
        grid_eta2: config.grid_eta2,
        grid_best_objective: best.1,
        refine_iterations: iterations,
        converged,
        fronto_parallel,
        loglik_constant_legacy: n as f64 * (ratio - 1.0).ln(),
        loglik_constant_poisson: n as f64 * ratio.ln() - n as f64,
    };
    Ok(EstimationResult {
        beta_hat: beta,
        eta1_hat,
        eta2_hat,
        objective,
        n_points: n,
        diagnostics,
    })
}

/// Nelder-Mead simplex maximization in two dimensions.
///
/// `f` may return negative infinity (treated as an ordinary worst value);
/// returns (argmax, max, iterations, converged).
fn nelder_mead_maximize<F>(
    f: F,
    start: [f64; 2],
    step: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> ([f64; 2], f64, usize, bool)
where
    F: Fn([f64; 2]) -> f64,
{
    const ALPHA: f64 = 1.0; // reflection
    const GAMMA: f64 = 2.0; // expansion
    const RHO: f64 = 0.5; // contraction
    const SIGMA: f64 = 0.5; // shrink

    let mut simplex = [
        start,
        [start[0] + step[0], start[1]],
        [start[0], start[1] + step[1]],
    ];
    let mut values = simplex.map(&f);

    let order = |simplex: &mut [[f64; 2]; 3], values: &mut [f64; 3]| {
        // descending by value (best first); -inf sorts last
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).expect("no NaN objective"));
        *simplex = [simplex[idx[0]], simplex[idx[1]], simplex[idx[2]]];
        *values = [values[idx[0]], values[idx[1]], values[idx[2]]];
    };

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        order(&mut simplex, &mut values);
        if values[0].is_finite() && values[2].is_finite() && (values[0] - values[2]).abs() <= tol {
            converged = true;
            break;
        }
        let centroid = [
            (simplex[0][0] + simplex[1][0]) / 2.0,
            (simplex[0][1] + simplex[1][1]) / 2.0,
        ];
        let worst = simplex[2];
        let reflect = [
            centroid[0] + ALPHA * (centroid[0] - worst[0]),
            centroid[1] + ALPHA * (centroid[1] - worst[1]),
        ];
        let fr = f(reflect);
        if fr > values[0] {
            let expand = [
                centroid[0] + GAMMA * (reflect[0] - centroid[0]),
                centroid[1] + GAMMA * (reflect[1] - centroid[1]),
            ];
            let fe = f(expand);
            if fe > fr {
                simplex[2] = expand;
                values[2] = fe;
            } else {
                simplex[2] = reflect;
                values[2] = fr;
            }
        } else if fr > values[1] {
            simplex[2] = reflect;
            values[2] = fr;
        } else {
            let contract = if fr > values[2] {
                [
                    centroid[0] + RHO * (reflect[0] - centroid[0]),
                    centroid[1] + RHO * (reflect[1] - centroid[1]),
                ]
            } else {
                [
                    centroid[0] - RHO * (centroid[0] - worst[0]),
                    centroid[1] - RHO * (centroid[1] - worst[1]),
                ]
            };
            let fc = f(contract);
            if fc > values[2].max(fr) {
                simplex[2] = contract;
                values[2] = fc;
            } else {
                for k in 1..3 {
                    simplex[k] = [
                        simplex[0][0] + SIGMA * (simplex[k][0] - simplex[0][0]),
                        simplex[0][1] + SIGMA * (simplex[k][1] - simplex[0][1]),
                    ];
                    values[k] = f(simplex[k]);
                }
            }
        }
    }
    order(&mut simplex, &mut values);
    (simplex[0], values[0], iterations, converged)
}
