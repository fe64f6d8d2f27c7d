// Multiscale retinex on an unevenly lit page, in RGB and in CIELAB.

use legibility::color::{self, LabPixel};
use legibility::enhance::retinex::{msrcr_rgb, retinex_cielab};
use legibility::enhance::RetinexParams;
use legibility::{ColorEncoding, PlanarImage};

fn mean_over(img: &PlanarImage, f: impl Fn([f64; 3]) -> f64) -> f64 {
    img.pixels().map(f).sum::<f64>() / img.len() as f64
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let (w, h) = (120, 40);
    // Light falls off to the right; grey-blue ink lines run across brown papyrus.
    let page = PlanarImage::from_fn(w, h, ColorEncoding::SrgbEncoded, |x, y| {
        let light = 1.0 - 0.6 * (x as f64 / w as f64);
        let base = if y % 10 < 2 { [0.30, 0.30, 0.34] } else { [0.72, 0.58, 0.40] };
        base.map(|c| c * light)
    });
    let params = RetinexParams { scales: vec![5.0, 20.0, 60.0], clip_percent: 0.01 };

    let lightness_gap = |img: &PlanarImage| {
        let lab = color::srgb_to_lab(img).expect("srgb");
        // Background row, far left against far right.
        let row = &lab.plane(0)[5 * w..6 * w];
        row[w / 8] - row[w - 1 - w / 8]
    };
    let rgb = msrcr_rgb(&page, &params)?;
    let lab = retinex_cielab(&page, &params)?;
    for (label, img) in [("input", &page), ("msrcr", &rgb), ("cielab", &lab)] {
        let chroma = mean_over(img, |p| LabPixel::from(color::srgb_pixel_to_lab(p)).chroma());
        println!("{label:<7} left-right L* gap {:6.2}  mean chroma {chroma:5.2}", lightness_gap(img));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("retinex");
}
