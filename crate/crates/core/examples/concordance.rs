// Rater agreement (Kendall's W) and histogram shape statistics.

use legibility::enhance::lightness::lightness_histogram;
use legibility::enhance::histeq_lightness;
use legibility::rank::{kendall_w, shannon_entropy, spatial_flatness};
use legibility::{ColorEncoding, PlanarImage};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // Rows are raters, columns are methods; lower is better, ties allowed.
    let scores = vec![
        vec![1.0, 2.0, 3.0, 4.0, 5.0],
        vec![1.0, 3.0, 2.0, 4.0, 5.0],
        vec![2.0, 1.0, 3.0, 5.0, 4.0],
        vec![1.0, 2.0, 2.0, 4.0, 5.0],
    ];
    let w = kendall_w(&scores)?;
    println!(
        "Kendall's W = {:.4}, chi2 = {:.3} on {} df, p = {:.4}",
        w.w, w.chi2, w.degrees_of_freedom, w.p
    );

    // A dark-skewed lightness channel before and after equalisation.
    let lab = PlanarImage::from_fn(64, 64, ColorEncoding::Cielab, |x, y| {
        let u = ((x * 37 + y * 101) % 4096) as f64 / 4096.0;
        [100.0 * u.powi(3), 4.0, 9.0]
    });
    for (label, img) in [("input", lab.clone()), ("histeq", histeq_lightness(&lab, 64)?)] {
        let hist = lightness_histogram(&img, 64);
        println!(
            "{label:<7} spatial flatness {:.3}  entropy {:.3} bits",
            spatial_flatness(&hist)?,
            shannon_entropy(&hist)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("concordance");
}
