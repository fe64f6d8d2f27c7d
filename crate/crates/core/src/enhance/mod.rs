//! The enhancement catalog and the pipeline that composes it.
//!
//! Every catalog method runs through [`run_pipeline`]:
//!
//! ```text
//! input -> sRGB -> gamut expansion -> CIELAB -> lightness normalisation
//!       -> method core -> (stretchlim) -> (negative) -> (chroma sign flip)
//!       -> sRGB -> clip [0, 1]
//! ```
//!
//! Method names are the labels used for output files (`<stem>_<method>.<ext>`).

pub mod clahe;
pub mod laplacian;
pub mod lightness;
pub mod retinex;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::color;
use crate::error::{Error, Result};
use crate::raster::{Plane, PlanarImage};
pub use crate::warn::{Warned, Warning};

pub use clahe::{clahe_lightness, ClaheParams};
pub use laplacian::{local_laplacian_lightness, LocalLaplacianParams};
pub use lightness::{
    chroma_sign_flip, cross_spectral_colorize, cross_spectral_lab, histeq_lightness, hue_shift,
    lsv_enhance, negative_lightness, stretchlim, vividness_enhance, BLUE_HUE_DEGREES,
};
pub use retinex::{blue_negative, msrcr_rgb, retinex_cielab, retinex_cielab_planes, RetinexParams};

macro_rules! catalog {
    ($( $variant:ident => $name:literal, $about:literal; )*) => {
        /// Enhancement methods, named by their output labels.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum Method {
            $( #[serde(rename = $name)] $variant, )*
        }

        impl Method {
            /// Every method, in catalog order.
            pub const ALL: &'static [Method] = &[$(Method::$variant),*];

            pub fn name(self) -> &'static str {
                match self { $(Method::$variant => $name,)* }
            }

            pub fn description(self) -> &'static str {
                match self { $(Method::$variant => $about,)* }
            }
        }
    };
}

catalog! {
    Original => "original", "gamut expansion and lightness normalisation only";
    Stretchlim => "stretchlim", "stretch CIELAB lightness to [0, 100]";
    Histeq => "histeq", "global histogram equalisation of lightness";
    Adapthisteq => "adapthisteq", "contrast-limited adaptive histogram equalisation (8x8 grid)";
    Locallapfilt => "locallapfilt", "local Laplacian filter on lightness (sigma 0.4, alpha 2, beta 1)";
    Retinex => "retinex", "multiscale retinex in RGB with 2.5% tail clipping";
    Lsv => "lsv", "lightness fused with |V + S - 1| from HSV";
    Vividness => "vividness", "lightness replaced by vividness, then stretched";
    Neglsv => "neglsv", "lsv with negative lightness and chroma sign change";
    Negvividness => "negvividness", "vividness with negative lightness and chroma sign change";
    Hueshift => "hueshift", "rotate the mean hue to blue (246 degrees)";
    RetinexCielab => "retinex_cielab", "multiscale retinex on vividness, a*, b*";
    BlueNegative => "blue_negative", "CIELAB retinex followed by blue negative";
    CrossSpectral => "cross_spectral", "non-visible band inserted as lightness";
}

impl Method {
    /// The default batch set: the comparison row of the user study, in figure order.
    pub const DEFAULT_SET: &'static [Method] = &[
        Method::Original,
        Method::Stretchlim,
        Method::Histeq,
        Method::Adapthisteq,
        Method::Locallapfilt,
        Method::Retinex,
        Method::Lsv,
        Method::Vividness,
        Method::Negvividness,
        Method::Neglsv,
    ];

    pub fn names() -> impl Iterator<Item = &'static str> {
        Method::ALL.iter().map(|m| m.name())
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::UnknownMethod(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preprocess {
    pub expand_gamut: bool,
    pub normalize_lightness: bool,
}

impl Default for Preprocess {
    fn default() -> Self {
        Preprocess {
            expand_gamut: true,
            normalize_lightness: true,
        }
    }
}

/// Method-specific parameters. Unused fields are ignored by methods that do not need them.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodParams {
    pub retinex: RetinexParams,
    pub clahe: ClaheParams,
    pub local_laplacian: LocalLaplacianParams,
    pub histeq_bins: usize,
    pub hue_target_degrees: f64,
    /// Region used to estimate the papyrus hue; non-zero entries are included.
    pub hue_mask: Option<Plane>,
    /// Non-visible band in `[0, 1]` for cross-spectral colourisation.
    pub nonvis: Option<Plane>,
}

impl Default for MethodParams {
    fn default() -> Self {
        MethodParams {
            retinex: RetinexParams::default(),
            clahe: ClaheParams::default(),
            local_laplacian: LocalLaplacianParams::default(),
            histeq_bins: 256,
            hue_target_degrees: BLUE_HUE_DEGREES,
            hue_mask: None,
            nonvis: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnhancementRecipe {
    pub method: Method,
    pub params: MethodParams,
    pub preprocess: Preprocess,
}

impl EnhancementRecipe {
    pub fn new(method: Method) -> Self {
        EnhancementRecipe {
            method,
            params: MethodParams::default(),
            preprocess: Preprocess::default(),
        }
    }

    /// Short stable digest of the method and every parameter it depends on.
    pub fn digest(&self) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            method: Method,
            retinex: &'a RetinexParams,
            clahe: &'a ClaheParams,
            local_laplacian: &'a LocalLaplacianParams,
            histeq_bins: usize,
            hue_target_degrees: f64,
            preprocess: Preprocess,
        }
        let canonical = Canonical {
            method: self.method,
            retinex: &self.params.retinex,
            clahe: &self.params.clahe,
            local_laplacian: &self.params.local_laplacian,
            histeq_bins: self.params.histeq_bins,
            hue_target_degrees: self.params.hue_target_degrees,
            preprocess: self.preprocess,
        };
        let mut hasher = Sha256::new();
        hasher.update(serde_json::to_vec(&canonical).expect("recipe serialises"));
        for plane in [&self.params.hue_mask, &self.params.nonvis].into_iter().flatten() {
            hasher.update((plane.width() as u64).to_le_bytes());
            hasher.update((plane.height() as u64).to_le_bytes());
            for v in plane.data() {
                hasher.update(v.to_le_bytes());
            }
        }
        hex::encode(&hasher.finalize()[..8])
    }
}

enum Stage {
    Lab(PlanarImage),
    Rgb(PlanarImage),
}

fn polarity(lab: PlanarImage, negative: bool) -> Result<PlanarImage> {
    if negative {
        chroma_sign_flip(&negative_lightness(&lab)?)
    } else {
        Ok(lab)
    }
}

fn lab_to_unit_srgb(lab: &PlanarImage) -> Result<PlanarImage> {
    Ok(color::lab_to_srgb(lab)?.clamp(0.0, 1.0))
}

/// Runs one catalog recipe and returns a clipped, sRGB-tagged image.
pub fn run_pipeline(img: &PlanarImage, recipe: &EnhancementRecipe) -> Result<Warned<PlanarImage>> {
    let mut warnings = Vec::new();
    let params = &recipe.params;
    let mut rgb = color::to_srgb(img)?;

    if recipe.method == Method::CrossSpectral {
        let nonvis = params
            .nonvis
            .as_ref()
            .ok_or_else(|| Error::invalid("cross_spectral needs a non-visible band"))?;
        rgb = cross_spectral_colorize(&rgb, nonvis)?;
    }
    if recipe.preprocess.expand_gamut {
        rgb = color::expand_gamut(&rgb.clamp(0.0, 1.0))?;
    }
    let mut lab = color::srgb_to_lab(&rgb)?;
    if recipe.preprocess.normalize_lightness {
        lab = stretchlim(&lab)?.collect_into(&mut warnings);
    }

    let stage = match recipe.method {
        Method::Original | Method::CrossSpectral => Stage::Lab(lab),
        Method::Stretchlim => Stage::Lab(stretchlim(&lab)?.collect_into(&mut warnings)),
        Method::Histeq => Stage::Lab(histeq_lightness(&lab, params.histeq_bins)?),
        Method::Adapthisteq => {
            Stage::Lab(clahe_lightness(&lab, params.clahe)?.collect_into(&mut warnings))
        }
        Method::Locallapfilt => Stage::Lab(local_laplacian_lightness(&lab, &params.local_laplacian)?),
        Method::Vividness | Method::Negvividness => {
            let v = stretchlim(&vividness_enhance(&lab)?)?.collect_into(&mut warnings);
            Stage::Lab(polarity(v, recipe.method == Method::Negvividness)?)
        }
        Method::Lsv | Method::Neglsv => {
            let base = lab_to_unit_srgb(&lab)?;
            let v = stretchlim(&lsv_enhance(&base)?)?.collect_into(&mut warnings);
            Stage::Lab(polarity(v, recipe.method == Method::Neglsv)?)
        }
        Method::Hueshift => Stage::Lab(
            hue_shift(&lab, params.hue_target_degrees, params.hue_mask.as_ref())?
                .collect_into(&mut warnings),
        ),
        Method::Retinex => Stage::Rgb(msrcr_rgb(&lab_to_unit_srgb(&lab)?, &params.retinex)?),
        Method::RetinexCielab => {
            Stage::Lab(retinex_cielab_planes(&lab_to_unit_srgb(&lab)?, &params.retinex)?)
        }
        Method::BlueNegative => Stage::Lab(blue_negative(&retinex_cielab_planes(
            &lab_to_unit_srgb(&lab)?,
            &params.retinex,
        )?)?),
    };

    let out = match stage {
        Stage::Lab(lab) => lab_to_unit_srgb(&lab)?,
        Stage::Rgb(rgb) => rgb.clamp(0.0, 1.0),
    };
    Ok(Warned {
        value: out,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::raster::ColorEncoding;

    fn chart() -> PlanarImage {
        PlanarImage::from_fn(24, 16, ColorEncoding::SrgbEncoded, |x, y| {
            let ink = (x / 4 + y / 4) % 3 == 0;
            if ink {
                [0.22, 0.16, 0.12]
            } else {
                [0.72 + 0.005 * x as f64, 0.58, 0.40 - 0.004 * y as f64]
            }
        })
    }

    #[test]
    fn names_round_trip_and_are_unique() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), *m);
        }
        let mut names: Vec<_> = Method::names().collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), Method::ALL.len());
        assert!(matches!("dstretch".parse::<Method>(), Err(Error::UnknownMethod(_))));
        assert_eq!(Method::DEFAULT_SET.len(), 10);
    }

    #[test]
    fn every_method_outputs_unit_range_srgb() {
        let img = chart();
        for &m in Method::ALL {
            let mut recipe = EnhancementRecipe::new(m);
            if m == Method::CrossSpectral {
                recipe.params.nonvis = Some(Plane::new(24, 16, (0..384).map(|i| (i % 17) as f64 / 16.0).collect()).unwrap());
            }
            let out = run_pipeline(&img, &recipe).unwrap().value;
            assert_eq!(out.encoding(), ColorEncoding::SrgbEncoded);
            assert!(out.first_out_of_unit_range().is_none(), "{m}");
        }
    }

    #[test]
    fn cross_spectral_without_band_fails() {
        assert!(run_pipeline(&chart(), &EnhancementRecipe::new(Method::CrossSpectral)).is_err());
    }

    #[test]
    fn hsv_input_is_rejected() {
        let hsv = color::rgb_to_hsv(&chart()).unwrap();
        assert!(matches!(
            run_pipeline(&hsv, &EnhancementRecipe::new(Method::Original)),
            Err(Error::UnsupportedEncoding(ColorEncoding::Hsv))
        ));
    }

    #[test]
    fn digest_tracks_parameters() {
        let a = EnhancementRecipe::new(Method::Retinex);
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.params.retinex.clip_percent = 0.01;
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 16);
        assert_ne!(a.digest(), EnhancementRecipe::new(Method::Lsv).digest());
    }
}
