// Fuses a visible image with a non-visible band: lightness from the band,
// chroma from the visible image.

use legibility::color::{self, LabPixel};
use legibility::enhance::cross_spectral_colorize;
use legibility::{ColorEncoding, Plane, PlanarImage};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (w, h) = (32, 8);
    // Ink that is barely visible in colour but dark under infrared.
    let ink = |x: usize| (12..20).contains(&x);
    let vis = PlanarImage::from_fn(w, h, ColorEncoding::SrgbEncoded, |x, _| {
        if ink(x) { [0.60, 0.47, 0.31] } else { [0.66, 0.52, 0.34] }
    });
    let ir = Plane::new(w, h, (0..w * h).map(|i| if ink(i % w) { 0.15 } else { 0.85 }).collect())?;

    let fused = cross_spectral_colorize(&vis, &ir)?;
    for (label, img) in [("visible", &vis), ("fused", &fused)] {
        let [bg, fg] = [0, 15].map(|x| LabPixel::from(color::srgb_pixel_to_lab(img.pixel(x, 0))));
        println!("{label:<8} background L {:5.1}  ink L {:5.1}  contrast {:5.1}", bg.l, fg.l, bg.l - fg.l);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("cross_spectral");
}
