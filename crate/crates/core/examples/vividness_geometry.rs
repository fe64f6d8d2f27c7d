// How stretchlim, gamut expansion and vividness move pixels in CIELAB.

use legibility::color::{self, LabPixel};
use legibility::enhance::{stretchlim, vividness_enhance};
use legibility::{ColorEncoding, PlanarImage};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let rgb = PlanarImage::from_fn(3, 1, ColorEncoding::SrgbEncoded, |x, _| {
        [[0.45, 0.45, 0.45], [0.62, 0.48, 0.30], [0.25, 0.20, 0.32]][x]
    });
    let lab = color::srgb_to_lab(&rgb)?;
    let stretched = stretchlim(&lab)?.value;
    let vivid = vividness_enhance(&lab)?;
    let expanded = color::srgb_to_lab(&color::expand_gamut(&rgb)?)?;

    let show = |label: &str, img: &PlanarImage| {
        let cells: Vec<String> = img
            .pixels()
            .map(|p| {
                let q = LabPixel::from(p);
                format!("L {:5.1} C {:5.1}", q.l, q.chroma())
            })
            .collect();
        println!("{label:<12} {}", cells.join(" | "));
    };
    show("input", &lab);
    show("stretchlim", &stretched);
    show("gamut", &expanded);
    show("vividness", &vivid);

    for (p, q) in lab.pixels().zip(vivid.pixels()) {
        assert_eq!((p[1], p[2]), (q[1], q[2]));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("vividness_geometry");
}
