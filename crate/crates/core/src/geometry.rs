//! Pinhole-camera geometry of a textured 3D plane.
//!
//! A plane `P = { X : <delta, X> + h = 0 }` with unit normal `delta` oriented
//! towards the camera is observed through a pinhole camera of focal length `f`
//! looking down the negative `X3` axis. Image points `x = (x1, x2)` are
//! identified with rays `X = (x1, x2, -f)`. A homogeneous texture on `P`
//! induces an inhomogeneous texture in the image whose density (the texture
//! gradient) is the surface element `h^2 f / |<delta, X>|^3`. Normalizing that
//! density so that it conserves the window area yields the perspective scaling
//! function `c(x)` used by the locally scaled point-process model; this module
//! provides the scaling function, its normalizing constant (closed form and
//! quadrature oracle), and locally scaled distances in closed form.
//!
//! All angles are radians. The plane distance `h` cancels from every scaled
//! quantity; it is carried only for provenance.

use crate::error::{Error, Result};

/// Image point in window coordinates.
pub type Point2 = [f64; 2];
/// Point or direction in world coordinates.
pub type Vec3 = [f64; 3];

#[inline]
pub(crate) fn dot3(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub(crate) fn cross3(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub(crate) fn norm3(a: Vec3) -> f64 {
    dot3(a, a).sqrt()
}

#[inline]
pub(crate) fn dist2(a: Point2, b: Point2) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Axis-aligned observation window `[a1, a2] x [b1, b2]` in window coordinates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ObservationWindow {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl ObservationWindow {
    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        if !(a1.is_finite() && a2.is_finite() && b1.is_finite() && b2.is_finite())
            || a1 >= a2
            || b1 >= b2
        {
            return Err(Error::InvalidWindow { a1, a2, b1, b2 });
        }
        Ok(Self { a1, a2, b1, b2 })
    }

    /// Window of the given width and height centered on the origin.
    pub fn centered(width: f64, height: f64) -> Result<Self> {
        Self::new(-width / 2.0, width / 2.0, -height / 2.0, height / 2.0)
    }

    /// The unit square `[-1/2, 1/2]^2`.
    pub fn unit_square() -> Self {
        Self {
            a1: -0.5,
            a2: 0.5,
            b1: -0.5,
            b2: 0.5,
        }
    }

    pub fn width(&self) -> f64 {
        self.a2 - self.a1
    }

    pub fn height(&self) -> f64 {
        self.b2 - self.b1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point2 {
        [(self.a1 + self.a2) / 2.0, (self.b1 + self.b2) / 2.0]
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            [self.a1, self.b1],
            [self.a1, self.b2],
            [self.a2, self.b1],
            [self.a2, self.b2],
        ]
    }

    pub fn contains(&self, p: Point2) -> bool {
        p[0] >= self.a1 && p[0] <= self.a2 && p[1] >= self.b1 && p[1] <= self.b2
    }
}

/// Focal length from a horizontal field of view: `f = (width/2) / tan(phi_c/2)`.
pub fn focal_from_fov(phi_c: f64, window: &ObservationWindow) -> Result<f64> {
    if !phi_c.is_finite() || phi_c <= 0.0 || phi_c >= std::f64::consts::PI {
        return Err(Error::FieldOfViewOutOfRange(phi_c));
    }
    Ok((window.width() / 2.0) / (phi_c / 2.0).tan())
}

/// Pinhole camera: focal length in window units plus the observation window.
///
/// The field of view is recorded when the camera was constructed from one; it
/// does not enter any computation.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct CameraModel {
    pub focal_length: f64,
    pub field_of_view: Option<f64>,
    pub window: ObservationWindow,
}

impl CameraModel {
    pub fn new(focal_length: f64, window: ObservationWindow) -> Result<Self> {
        if !focal_length.is_finite() || focal_length <= 0.0 {
            return Err(Error::InvalidFocalLength(focal_length));
        }
        Ok(Self {
            focal_length,
            field_of_view: None,
            window,
        })
    }

    pub fn from_fov(phi_c: f64, window: ObservationWindow) -> Result<Self> {
        let f = focal_from_fov(phi_c, &window)?;
        Ok(Self {
            focal_length: f,
            field_of_view: Some(phi_c),
            window,
        })
    }
}

/// Spherical-coordinate parameters of the plane's unit normal.
///
/// `delta = (sin eta1 cos eta2, sin eta1 sin eta2, cos eta1)`; `eta1` is the
/// slant (angle to the optical axis), `eta2` the tilt (direction of steepest
/// ascent in the image). `h > 0` is the plane distance, which only sets the
/// absolute scale.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SurfaceOrientation {
    eta1: f64,
    eta2: f64,
    h: f64,
}

impl SurfaceOrientation {
    /// Orientation with the default plane distance `h = 1`.
    pub fn new(eta1: f64, eta2: f64) -> Self {
        Self { eta1, eta2, h: 1.0 }
    }

    pub fn from_degrees(eta1_deg: f64, eta2_deg: f64) -> Self {
        Self::new(eta1_deg.to_radians(), eta2_deg.to_radians())
    }

    pub fn with_distance(eta1: f64, eta2: f64, h: f64) -> Result<Self> {
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::InvalidPlaneDistance(h));
        }
        Ok(Self { eta1, eta2, h })
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn eta2(&self) -> f64 {
        self.eta2
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn eta1_deg(&self) -> f64 {
        self.eta1.to_degrees()
    }

    pub fn eta2_deg(&self) -> f64 {
        self.eta2.to_degrees()
    }

    /// The unit normal `delta`.
    pub fn normal(&self) -> Vec3 {
        delta_from_angles(self.eta1, self.eta2)
    }

    /// True when `<delta, X> < 0` for the rays through all four window corners
    /// (and hence for every window point, by linearity).
    pub fn is_admissible(&self, camera: &CameraModel) -> bool {
        let delta = self.normal();
        camera
            .window
            .corners()
            .iter()
            .all(|&c| dot3(delta, ray(c, camera)) < 0.0)
    }
}

/// Unit normal from spherical coordinates.
pub fn delta_from_angles(eta1: f64, eta2: f64) -> Vec3 {
    let (s1, c1) = eta1.sin_cos();
    let (s2, c2) = eta2.sin_cos();
    [s1 * c2, s1 * s2, c1]
}

/// The ray through image point `x`: `X = (x1, x2, -f)`.
pub fn ray(x: Point2, camera: &CameraModel) -> Vec3 {
    [x[0], x[1], -camera.focal_length]
}

/// `g(x) = -<delta, X(x)>`, positive exactly when the ray meets the plane.
#[inline]
fn ray_gap(x: Point2, delta: Vec3, f: f64) -> f64 {
    f * delta[2] - delta[0] * x[0] - delta[1] * x[1]
}

/// Intersection of the ray through `x` with the plane: `X_P = -h/<delta, X> * X`.
pub fn backproject(
    x: Point2,
    orientation: &SurfaceOrientation,
    camera: &CameraModel,
) -> Result<Vec3> {
    let delta = orientation.normal();
    let r = ray(x, camera);
    let d = dot3(delta, r);
    if d >= 0.0 {
        return Err(Error::Inadmissible {
            x1: x[0],
            x2: x[1],
            dot: d,
        });
    }
    let lambda = -orientation.h / d;
    Ok([lambda * r[0], lambda * r[1], lambda * r[2]])
}

/// Perspective projection of a world point with `X3 < 0` back to the image.
pub fn project_to_image(xp: Vec3, camera: &CameraModel) -> Result<Point2> {
    if xp[2] >= 0.0 {
        return Err(Error::DegenerateRay(xp[2]));
    }
    let f = camera.focal_length;
    Ok([-f * xp[0] / xp[2], -f * xp[1] / xp[2]])
}

/// Surface element of the back-projection map: `-h^2 f / <delta, X>^3`.
///
/// Equals the Jacobian norm `|d_x1 X_P x d_x2 X_P|` and quantifies the
/// apparent texture gradient; strictly positive on admissible points.
pub fn surface_element_density(
    x: Point2,
    orientation: &SurfaceOrientation,
    camera: &CameraModel,
) -> Result<f64> {
    let delta = orientation.normal();
    let f = camera.focal_length;
    let g = ray_gap(x, delta, f);
    if g <= 0.0 {
        return Err(Error::Inadmissible {
            x1: x[0],
            x2: x[1],
            dot: -g,
        });
    }
    let h = orientation.h;
    Ok(h * h * f / (g * g * g))
}

/// Supremum of the slant `eta1` keeping `<delta, X> < 0` over the whole window.
///
/// The maximum of `x1 cos eta2 + x2 sin eta2` over the window is attained at a
/// corner; when it is positive the bound is `atan2(f, max)`, otherwise no slant
/// below `pi/2` can violate admissibility.
pub fn admissible_slant_bound(eta2: f64, camera: &CameraModel) -> f64 {
    let (s2, c2) = eta2.sin_cos();
    let m = camera
        .window
        .corners()
        .iter()
        .map(|c| c[0] * c2 + c[1] * s2)
        .fold(f64::NEG_INFINITY, f64::max);
    if m > 0.0 {
        f64::atan2(camera.focal_length, m)
    } else {
        std::f64::consts::FRAC_PI_2
    }
}

// ---------------------------------------------------------------------------
// Normalizing constant
// ---------------------------------------------------------------------------

/// `gamma * h^2` in closed form; `h` is absent from this expression, which is
/// why every scaled quantity is invariant to the plane distance.
///
/// Derived by integrating the surface element exactly over the window: with
/// `P_ij = <delta, (a_i, b_j, -f)>` the corner ray products,
/// `gamma h^2 = 2 P11 P12 P21 P22 / (f * (-(P11 + P22)))`.
pub(crate) fn gamma_h2_closed_form(
    orientation: &SurfaceOrientation,
    camera: &CameraModel,
) -> Result<f64> {
    if !orientation.is_admissible(camera) {
        return Err(Error::InadmissibleOrientation {
            eta1: orientation.eta1,
            eta2: orientation.eta2,
        });
    }
    let delta = orientation.normal();
    let f = camera.focal_length;
    let w = camera.window;
    let p = |a: f64, b: f64| delta[0] * a + delta[1] * b - f * delta[2];
    let p11 = p(w.a1, w.b1);
    let p12 = p(w.a1, w.b2);
    let p21 = p(w.a2, w.b1);
    let p22 = p(w.a2, w.b2);
    Ok(2.0 * p11 * p12 * p21 * p22 / (f * (-(p11 + p22))))
}

/// Closed-form normalizing constant `gamma` of the perspective scaling
/// function, defined by `|D| = integral_D gamma dX_P`.
pub fn gamma_closed_form(orientation: &SurfaceOrientation, camera: &CameraModel) -> Result<f64> {
    Ok(gamma_h2_closed_form(orientation, camera)? / (orientation.h * orientation.h))
}

/// Quadrature oracle for the normalizing constant:
/// `gamma = |D| / integral_D surface_element_density`.
///
/// Computed by iterated adaptive Simpson quadrature with relative tolerance
/// 1e-10 per axis; independent of [`gamma_closed_form`] and used to verify it.
pub fn gamma_numeric(orientation: &SurfaceOrientation, camera: &CameraModel) -> Result<f64> {
    if !orientation.is_admissible(camera) {
        return Err(Error::InadmissibleOrientation {
            eta1: orientation.eta1,
            eta2: orientation.eta2,
        });
    }
    let delta = orientation.normal();
    let f = camera.focal_length;
    let w = camera.window;
    // h^2 is factored out of the integrand and restored at the end.
    let inner = |x2: f64| {
        adaptive_simpson(
            |x1: f64| {
                let g = ray_gap([x1, x2], delta, f);
                f / (g * g * g)
            },
            w.a1,
            w.a2,
            1e-11,
        )
    };
    let integral = adaptive_simpson(inner, w.b1, w.b2, 1e-10)
        .map_err(|e| Error::QuadratureFailed(format!("outer axis: {e}")))?;
    let integral = integral?;
    if !(integral.is_finite() && integral > 0.0) {
        return Err(Error::QuadratureFailed(format!(
            "density integral is {integral}"
        )));
    }
    let h = orientation.h;
    Ok(w.area() / (integral * h * h))
}

/// Adaptive Simpson quadrature with a relative tolerance.
fn adaptive_simpson<F, T>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<T::Out>
where
    F: Fn(f64) -> T,
    T: SimpsonValue,
{
    struct Panel {
        a: f64,
        m: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
    }

    fn recurse<F, T>(f: &F, p: Panel, tol: f64, depth: u32) -> Result<f64>
    where
        F: Fn(f64) -> T,
        T: SimpsonValue,
    {
        let Panel {
            a,
            m,
            b,
            fa,
            fm,
            fb,
            whole,
        } = p;
        let lm = (a + m) / 2.0;
        let rm = (m + b) / 2.0;
        let flm = T::value(f(lm))?;
        let frm = T::value(f(rm))?;
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 {
            return Err(Error::QuadratureFailed(
                "adaptive Simpson hit maximum recursion depth".into(),
            ));
        }
        if delta.abs() <= 15.0 * tol * (left + right).abs().max(1e-300) {
            Ok(left + right + delta / 15.0)
        } else {
            let left_panel = Panel {
                a,
                m: lm,
                b: m,
                fa,
                fm: flm,
                fb: fm,
                whole: left,
            };
            let right_panel = Panel {
                a: m,
                m: rm,
                b,
                fa: fm,
                fm: frm,
                fb,
                whole: right,
            };
            Ok(recurse(f, left_panel, tol, depth - 1)? + recurse(f, right_panel, tol, depth - 1)?)
        }
    }

    let m = (a + b) / 2.0;
    let fa = T::value(f(a))?;
    let fm = T::value(f(m))?;
    let fb = T::value(f(b))?;
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(
        &f,
        Panel {
            a,
            m,
            b,
            fa,
            fm,
            fb,
            whole,
        },
        rel_tol,
        48,
    )
    .map(T::wrap)
}

/// Lets `adaptive_simpson` integrate both plain functions and fallible inner
/// integrals (for the iterated 2D case).
trait SimpsonValue {
    type Out;
    fn value(self) -> Result<f64>;
    fn wrap(v: f64) -> Self::Out;
}

impl SimpsonValue for f64 {
    type Out = f64;
    fn value(self) -> Result<f64> {
        Ok(self)
    }
    fn wrap(v: f64) -> f64 {
        v
    }
}

impl SimpsonValue for Result<f64> {
    type Out = Result<f64>;
    fn value(self) -> Result<f64> {
        self
    }
    fn wrap(v: f64) -> Result<f64> {
        Ok(v)
    }
}

// ---------------------------------------------------------------------------
// Scaling context and scaled distances
// ---------------------------------------------------------------------------

/// An orientation/camera pair with the cached normalizing constant.
///
/// Immutable after construction; all methods are pure and the context may be
/// shared freely between threads.
#[derive(Debug, Clone, Copy)]
pub struct ScalingContext {
    orientation: SurfaceOrientation,
    camera: CameraModel,
    /// `gamma * h^2`, the h-free core of the normalizing constant.
    gamma_h2: f64,
}

impl ScalingContext {
    /// Builds the context with the closed-form normalizing constant.
    pub fn new(orientation: SurfaceOrientation, camera: CameraModel) -> Result<Self> {
        let gamma_h2 = gamma_h2_closed_form(&orientation, &camera)?;
        Ok(Self {
            orientation,
            camera,
            gamma_h2,
        })
    }

    /// Builds the context with the quadrature-oracle normalizing constant.
    ///
    /// Fallback for the (never observed) case where the closed form fails its
    /// verification against [`gamma_numeric`].
    pub fn with_numeric_gamma(
        orientation: SurfaceOrientation,
        camera: CameraModel,
    ) -> Result<Self> {
        let gamma = gamma_numeric(&orientation, &camera)?;
        let h = orientation.h;
        Ok(Self {
            orientation,
            camera,
            gamma_h2: gamma * h * h,
        })
    }

    pub fn orientation(&self) -> &SurfaceOrientation {
        &self.orientation
    }

    pub fn camera(&self) -> &CameraModel {
        &self.camera
    }

    /// The cached normalizing constant `gamma`.
    pub fn gamma(&self) -> f64 {
        self.gamma_h2 / (self.orientation.h * self.orientation.h)
    }

    #[inline]
    fn gap(&self, x: Point2) -> Result<f64> {
        let g = ray_gap(x, self.orientation.normal(), self.camera.focal_length);
        if g <= 0.0 {
            Err(Error::Inadmissible {
                x1: x[0],
                x2: x[1],
                dot: -g,
            })
        } else {
            Ok(g)
        }
    }

    /// `c^{-2}(x) = gamma h^2 f / |<delta, X>|^3`: the normalized intensity
    /// shape of the perspective model. Integrates to `|D|` over the window and
    /// does not depend on `h`.
    pub fn c_inv2(&self, x: Point2) -> Result<f64> {
        let g = self.gap(x)?;
        Ok(self.gamma_h2 * self.camera.focal_length / (g * g * g))
    }

    /// `c^{-1}(x)`, the local length rescaling factor.
    pub fn c_inv(&self, x: Point2) -> Result<f64> {
        Ok(self.c_inv2(x)?.sqrt())
    }

    /// Locally scaled distance between two admissible image points.
    ///
    /// This is the line integral of `c^{-1}` along the segment `[xi, xj]`,
    /// which the perspective scaling function admits in closed form:
    /// `d(xi,xj) * gamma^{1/2} * |2 h sqrt(f) / <delta, Xi-Xj> *
    /// (<delta,-Xi>^{-1/2} - <delta,-Xj>^{-1/2})|`. The implementation uses
    /// the algebraically identical cancellation-free factorization
    /// `d * 2 sqrt(gamma h^2 f) / ((sqrt(gi)+sqrt(gj)) sqrt(gi gj))`, whose
    /// value at `gi = gj` is exactly the degenerate limit `d * c^{-1}`.
    pub fn scaled_distance(&self, xi: Point2, xj: Point2) -> Result<f64> {
        let gi = self.gap(xi)?;
        let gj = self.gap(xj)?;
        let d = dist2(xi, xj);
        if d == 0.0 {
            return Ok(0.0);
        }
        let gf = (self.gamma_h2 * self.camera.focal_length).sqrt();
        Ok(d * 2.0 * gf / ((gi.sqrt() + gj.sqrt()) * (gi * gj).sqrt()))
    }
}

// ---------------------------------------------------------------------------
// Exponential scaling (reference scaling family)
// ---------------------------------------------------------------------------

/// Relative conservation residual `| integral_D c^{-2} - |D| | / |D|` by
/// composite Simpson quadrature with the given (even) number of intervals per
/// axis.
///
/// Mathematically the residual is zero for every admissible orientation; this
/// measures it through a fixed-order rule whose own error stays below 1e-6 for
/// slants up to 95% of the admissibility bound at 256 intervals.
pub fn conservation_residual(ctx: &ScalingContext, intervals: usize) -> Result<f64> {
    let n = intervals.max(2) & !1;
    let w = ctx.camera().window;
    let (hx, hy) = (w.width() / n as f64, w.height() / n as f64);
    let weight = |i: usize| -> f64 {
        if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        }
    };
    let mut sum = 0.0;
    for j in 0..=n {
        let y = w.b1 + j as f64 * hy;
        let mut row = 0.0;
        for i in 0..=n {
            let x = w.a1 + i as f64 * hx;
            row += weight(i) * ctx.c_inv2([x, y])?;
        }
        sum += weight(j) * row;
    }
    let integral = sum * hx * hy / 9.0;
    Ok((integral - w.area()).abs() / w.area())
}

/// `c^{-1}(x)` for the exponential scaling function `c(x) = K exp(eta^T x)`,
/// with `K` chosen so that `c^{-2}` integrates to `|D|` over the window.
pub fn exponential_c_inv(x: Point2, eta: [f64; 2], window: &ObservationWindow) -> f64 {
    let k = exponential_norm(eta, window);
    (-(eta[0] * x[0] + eta[1] * x[1])).exp() / k
}

/// Normalization factor `K` of the exponential scaling function.
fn exponential_norm(eta: [f64; 2], window: &ObservationWindow) -> f64 {
    // integral of exp(-2 eta t) over [lo, hi], stable for eta -> 0
    let axis = |eta: f64, lo: f64, hi: f64| -> f64 {
        if eta == 0.0 {
            hi - lo
        } else {
            let q = 2.0 * eta * (hi - lo);
            (-2.0 * eta * lo).exp() * (-f64::exp_m1(-q)) / (2.0 * eta)
        }
    };
    let integral = axis(eta[0], window.a1, window.a2) * axis(eta[1], window.b1, window.b2);
    (integral / window.area()).sqrt()
}

/// Locally scaled distance under exponential scaling:
/// `d(xi,xj) |(c^{-1}(xi) - c^{-1}(xj)) / (eta^T (xj - xi))|`, with the
/// continuous limit `d * c^{-1}((xi+xj)/2)` along directions orthogonal to
/// `eta`.
pub fn scaled_distance_exponential(
    xi: Point2,
    xj: Point2,
    eta: [f64; 2],
    window: &ObservationWindow,
) -> f64 {
    let d = dist2(xi, xj);
    if d == 0.0 {
        return 0.0;
    }
    let k = exponential_norm(eta, window);
    let pi = eta[0] * xi[0] + eta[1] * xi[1];
    let q = eta[0] * (xj[0] - xi[0]) + eta[1] * (xj[1] - xi[1]);
    // (exp(-pi) - exp(-pi-q))/q = exp(-pi) * (-expm1(-q))/q, limit 1 at q = 0
    let ratio = if q == 0.0 { 1.0 } else { -f64::exp_m1(-q) / q };
    d * (-pi).exp() * ratio / k
}
