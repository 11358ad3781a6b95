//! Surface orientation from a single image of a near-regular texture.
//!
//! The pipeline estimates the slant and tilt of a textured 3D plane from the
//! positions of its texture elements in one perspective image:
//!
//! 1. **imaging** – grayscale image to probability map: derivative-of-Gaussian
//!    gradient magnitude, thresholding, exact Euclidean distance transform.
//! 2. **detect** – latent texture-element centers from the probability map:
//!    windowed local maxima, ridge-following neighbourhood relation, one
//!    representative per connected component.
//! 3. **geometry** – pinhole geometry of the oriented plane: the perspective
//!    scaling function, its normalizing constant, locally scaled distances.
//! 4. **estimate** – composite-likelihood fit of the locally scaled
//!    point-process model over slant/tilt.
//! 5. **simulate** – ground-truth pattern synthesis (plane-projected regular
//!    and Poisson patterns plus an independent thinning sampler) to validate
//!    the estimator end to end.
//!
//! Everything is deterministic: simulation uses a pinned seedable generator
//! ([`rng`]) and all transforms are pure.

pub mod detect;
pub mod error;
pub mod estimate;
pub mod geometry;
pub mod imaging;
pub mod rng;
pub mod simulate;

pub use error::{Error, Result};
