// sRGB to CIELAB and back, derived quantities, and gamut expansion.
//
// Run with `cargo run --example color_conversion`.

use legibility::color::{self, LabPixel};
use legibility::{ColorEncoding, PlanarImage};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let swatches = [
        ("white", [1.0, 1.0, 1.0]),
        ("mid gray", [0.5, 0.5, 0.5]),
        ("papyrus", [0.70, 0.55, 0.36]),
        ("ink", [0.22, 0.16, 0.12]),
        ("red", [1.0, 0.0, 0.0]),
    ];
    println!("{:<9} {:>7} {:>7} {:>7} {:>7} {:>7}", "swatch", "L*", "a*", "b*", "C*", "vivid");
    for (name, rgb) in swatches {
        let lab = LabPixel::from(color::srgb_pixel_to_lab(rgb));
        println!(
            "{name:<9} {:>7.2} {:>7.2} {:>7.2} {:>7.2} {:>7.2}",
            lab.l,
            lab.a,
            lab.b,
            lab.chroma(),
            lab.vividness()
        );
        let back = color::lab_pixel_to_srgb([lab.l, lab.a, lab.b]);
        assert!(rgb.iter().zip(back).all(|(x, y)| (x - y).abs() < 1e-9));
    }

    // Whole images convert plane by plane.
    let img = PlanarImage::from_fn(4, 1, ColorEncoding::SrgbEncoded, |x, _| swatches[x + 1].1);
    let expanded = color::expand_gamut(&img)?;
    for (before, after) in img.pixels().zip(expanded.pixels()) {
        println!("expand_gamut {before:.3?} -> {after:.3?}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("color_conversion");
}
