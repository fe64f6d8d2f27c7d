// Runs every catalog recipe on a synthetic papyrus crop and writes PNGs.
//
// `cargo run --example enhance_catalog -- [out_dir]`. Without an argument the files
// go to a temporary directory that is removed on exit.

use std::path::Path;

use legibility::enhance::{run_pipeline, EnhancementRecipe, Method};
use legibility::io::{self, OutputFormat};
use legibility::{ColorEncoding, Plane, PlanarImage};

fn papyrus(width: usize, height: usize) -> PlanarImage {
    PlanarImage::from_fn(width, height, ColorEncoding::SrgbEncoded, |x, y| {
        let (xf, yf) = (x as f64, y as f64);
        let fibre = 0.03 * (yf * 0.7 + (xf * 0.05).sin() * 3.0).sin();
        // Two faint strokes of carbon ink.
        let d1 = (yf - 0.5 * xf - 6.0).abs();
        let d2 = (xf - 40.0).abs() + if (10.0..40.0).contains(&yf) { 0.0 } else { 99.0 };
        let ink = (-d1 * d1 / 4.0).exp().max((-d2 * d2 / 4.0).exp());
        [0.70 + fibre - 0.30 * ink, 0.55 + fibre - 0.25 * ink, 0.36 + 0.5 * fibre - 0.15 * ink]
    })
}

fn render_catalog(out: &Path) -> Result<(), Box<dyn std::error::Error>> {
    std::fs::create_dir_all(out)?;

    let img = papyrus(96, 64);
    let (w, h) = img.dims();
    for &method in Method::ALL {
        let mut recipe = EnhancementRecipe::new(method);
        recipe.params.retinex.scales = vec![4.0, 16.0, 48.0];
        if method == Method::CrossSpectral {
            // Stand-in for an infrared band: ink is dark there too.
            recipe.params.nonvis = Some(Plane::new(w, h, img.plane(0).to_vec())?);
        }
        let result = run_pipeline(&img, &recipe)?;
        let path = io::variant_path(out, "papyrus.png".as_ref(), method.name(), OutputFormat::Png8);
        io::save_image(&result.value, &path, OutputFormat::Png8)?;
        println!("{:<15} {}  {}", method.name(), recipe.digest(), method.description());
        for warning in &result.warnings {
            println!("  warning: {warning}");
        }
    }
    println!("wrote {} variants to {}", Method::ALL.len(), out.display());
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tmp = tempfile::tempdir()?;
    render_catalog(tmp.path())
}

#[allow(dead_code)]
fn main() {
    match std::env::args().nth(1) {
        Some(dir) => render_catalog(Path::new(&dir)),
        None => run_example(),
    }
    .expect("enhance_catalog");
}
