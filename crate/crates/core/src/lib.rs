//! Perceptual legibility enhancement for degraded manuscript photographs.
//!
//! The crate is organised around four concerns:
//!
//! - [`color`]: sRGB / AdobeRGB transfer functions, the XYZ bridge, CIELAB (D65),
//!   HSV and CIELAB-derived quantities (chroma, hue, vividness), plus gamut expansion.
//! - [`enhance`]: the enhancement catalog (`stretchlim`, `vividness`, `lsv`, negative
//!   polarity, hue shift, histogram equalisation, CLAHE, retinex, ...) and the
//!   [`enhance::run_pipeline`] composition that produces the published variants.
//! - [`rank`]: rating-to-ranking methods (Centroids, ROD, Majority Judgment),
//!   ensemble aggregation with Kemenization, Kendall's W, spatial flatness and entropy.
//! - [`io`], [`manifest`], [`report`], [`cli`] and [`service`]: file codecs, the
//!   variant manifest, ranking reports, the batch front end and the local rating API.
//!
//! ```
//! use legibility::{color, PlanarImage, ColorEncoding};
//!
//! let white = PlanarImage::filled(1, 1, ColorEncoding::SrgbEncoded, [1.0, 1.0, 1.0]);
//! let lab = color::srgb_to_lab(&white).unwrap();
//! assert!((lab.pixel(0, 0)[0] - 100.0).abs() < 1e-6);
//! ```

pub mod cli;
pub mod color;
pub mod enhance;
pub mod error;
pub mod io;
pub mod manifest;
pub mod rank;
pub mod raster;
pub mod report;
pub mod service;
pub mod warn;

pub use error::{Error, Result};
pub use raster::{ColorEncoding, Plane, PlanarImage};
pub use warn::{Warned, Warning};
