mod common;

use approx::assert_abs_diff_eq;
use legibility::color::{self, LabPixel};
use legibility::enhance::{
    self, blue_negative, chroma_sign_flip, clahe, histeq_lightness, hue_shift, lsv_enhance, negative_lightness,
    retinex, run_pipeline, stretchlim, vividness_enhance, ClaheParams, EnhancementRecipe, Method, RetinexParams,
};
use legibility::rank::spatial_flatness;
use legibility::{ColorEncoding, Plane, PlanarImage};
use proptest::prelude::*;
use rand::Rng;

fn lab_image() -> impl Strategy<Value = PlanarImage> {
    (any::<u64>(), 2usize..12, 2usize..12).prop_map(|(seed, w, h)| common::random_lab(&mut common::rng(seed), w, h))
}

fn srgb_image() -> impl Strategy<Value = PlanarImage> {
    (any::<u64>(), 2usize..12, 2usize..12).prop_map(|(seed, w, h)| common::random_srgb(&mut common::rng(seed), w, h))
}

fn max_abs_diff(a: &PlanarImage, b: &PlanarImage) -> f64 {
    a.to_interleaved()
        .iter()
        .zip(b.to_interleaved())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn involutions(img in lab_image()) {
        let neg = negative_lightness(&negative_lightness(&img).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&neg, &img) <= 100.0 * f64::EPSILON);
        prop_assert_eq!(chroma_sign_flip(&chroma_sign_flip(&img).unwrap()).unwrap(), img.clone());
        let blue = blue_negative(&blue_negative(&img).unwrap()).unwrap();
        prop_assert!(max_abs_diff(&blue, &img) <= 100.0 * f64::EPSILON);
    }

    #[test]
    fn sign_flip_preserves_chroma(img in lab_image()) {
        let flipped = chroma_sign_flip(&img).unwrap();
        for (p, q) in img.pixels().zip(flipped.pixels()) {
            prop_assert_eq!(LabPixel::from(p).chroma(), LabPixel::from(q).chroma());
            prop_assert_eq!(p[0], q[0]);
        }
    }

    #[test]
    fn vividness_is_selective(img in lab_image()) {
        let out = vividness_enhance(&img).unwrap();
        for (p, q) in img.pixels().zip(out.pixels()) {
            prop_assert_eq!((p[1], p[2]), (q[1], q[2]));
            let pre_clip = LabPixel::from(p).vividness();
            if p[1] == 0.0 && p[2] == 0.0 {
                prop_assert_eq!(q[0], p[0]);
            } else {
                prop_assert!(pre_clip > p[0]);
                prop_assert_eq!(q[0], pre_clip.min(100.0));
            }
        }
    }

    #[test]
    fn stretchlim_is_idempotent_and_order_preserving(img in lab_image()) {
        let once = stretchlim(&img).unwrap().value;
        let twice = stretchlim(&once).unwrap().value;
        prop_assert!(max_abs_diff(&once, &twice) <= 1e-12);
        let (l, l2) = (img.plane(0), once.plane(0));
        for i in 0..l.len() {
            for j in 0..l.len() {
                if l[i] < l[j] {
                    prop_assert!(l2[i] <= l2[j]);
                }
                if l[i] == l[j] {
                    prop_assert_eq!(l2[i], l2[j]);
                }
            }
        }
        prop_assert_eq!((once.plane(1), once.plane(2)), (img.plane(1), img.plane(2)));
    }

    #[test]
    fn lightness_operators_stay_in_range(img in lab_image()) {
        for out in [
            stretchlim(&img).unwrap().value,
            vividness_enhance(&img).unwrap(),
            histeq_lightness(&img, 256).unwrap(),
            enhance::clahe_lightness(&img, ClaheParams::default()).unwrap().value,
            hue_shift(&img, 246.0, None).unwrap().value,
        ] {
            prop_assert!(out.plane(0).iter().all(|l| (0.0..=100.0).contains(l)));
        }
    }

    #[test]
    fn lsv_stays_in_range(img in srgb_image()) {
        let out = lsv_enhance(&img).unwrap();
        prop_assert!(out.plane(0).iter().all(|l| (0.0..=100.0).contains(l)));
    }

    #[test]
    fn hue_shift_preserves_lightness_and_chroma(img in lab_image(), target in 0.0..360.0f64) {
        let out = hue_shift(&img, target, None).unwrap().value;
        for (p, q) in img.pixels().zip(out.pixels()) {
            prop_assert_eq!(p[0], q[0]);
            prop_assert!((LabPixel::from(p).chroma() - LabPixel::from(q).chroma()).abs() < 1e-9);
        }
    }

    #[test]
    fn pipeline_is_deterministic_and_in_range(img in srgb_image(), m in 0usize..Method::ALL.len()) {
        let method = Method::ALL[m];
        let mut recipe = EnhancementRecipe::new(method);
        recipe.params.retinex = RetinexParams { scales: vec![2.0, 5.0], clip_percent: 0.025 };
        if method == Method::CrossSpectral {
            let (w, h) = img.dims();
            recipe.params.nonvis = Some(Plane::new(w, h, img.plane(1).to_vec()).unwrap());
        }
        let a = run_pipeline(&img, &recipe).unwrap().value;
        let b = run_pipeline(&img, &recipe).unwrap().value;
        prop_assert_eq!(a.encoding(), ColorEncoding::SrgbEncoded);
        prop_assert!(a.first_out_of_unit_range().is_none());
        let bits = |x: &PlanarImage| x.to_interleaved().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&a), bits(&b));
    }
}

fn equalised_flatness(img: &PlanarImage, bins: usize) -> (f64, f64) {
    let out = histeq_lightness(img, 256).unwrap();
    let before = enhance::lightness::lightness_histogram(img, bins);
    let after = enhance::lightness::lightness_histogram(&out, bins);
    let (sf0, sf1) = (spatial_flatness(&before).unwrap(), spatial_flatness(&after).unwrap());
    assert_abs_diff_eq!(sf0, common::spatial_flatness_oracle(&before), epsilon = 1e-10);
    assert_abs_diff_eq!(sf1, common::spatial_flatness_oracle(&after), epsilon = 1e-10);
    (sf0, sf1)
}

#[test]
fn histeq_flattens_skewed_lightness_histograms() {
    let mut rng = common::rng(11);
    for _ in 0..20 {
        let power = rng.random_range(1.5..4.0);
        let img = PlanarImage::from_fn(48, 48, ColorEncoding::Cielab, |_, _| {
            [100.0 * rng.random::<f64>().powf(power), 0.0, 0.0]
        });
        for bins in [16, 64] {
            let (sf0, sf1) = equalised_flatness(&img, bins);
            assert!(sf1 >= sf0, "{bins} bins: {sf0} -> {sf1}");
        }
    }
}

#[test]
fn histeq_flatness_gain_is_not_universal() {
    // Two well separated modes: equalisation spreads them into a sparse comb whose
    // spectrum has no nulls, so the flatness score drops.
    let mut rng = common::rng(12);
    let img = PlanarImage::from_fn(48, 48, ColorEncoding::Cielab, |_, _| {
        let l = if rng.random_bool(0.3) { rng.random_range(20.0..30.0) } else { rng.random_range(62.0..78.0) };
        [l, 0.0, 0.0]
    });
    let (sf0, sf1) = equalised_flatness(&img, 64);
    assert!(sf1 < sf0, "{sf0} -> {sf1}");
}

#[test]
fn clahe_interior_pixels_blend_four_tile_maps() {
    let mut rng = common::rng(5);
    let img = PlanarImage::from_fn(64, 64, ColorEncoding::Cielab, |x, y| {
        [(x as f64 * 1.2 + y as f64 * 0.3 + rng.random_range(0.0..10.0)).min(100.0), 0.0, 0.0]
    });
    // With a clip limit of 1 nothing is clipped, so each tile map is a plain CDF.
    let out = enhance::clahe_lightness(&img, ClaheParams { grid: (8, 8), clip_limit: 1.0 }).unwrap().value;
    let level = |l: f64| (l / 100.0 * 255.0).round() as usize;
    let tile_cdf = |tr: usize, tc: usize, v: usize| {
        let mut below = 0;
        for y in tr * 8..tr * 8 + 8 {
            for x in tc * 8..tc * 8 + 8 {
                below += usize::from(level(img.plane(0)[y * 64 + x]) <= v);
            }
        }
        100.0 * below as f64 / 64.0
    };
    for (x, y) in [(4, 4), (20, 30), (40, 13), (59, 59), (33, 8)] {
        let (fx, fy) = ((x as f64 - 3.5) / 8.0, (y as f64 - 3.5) / 8.0);
        let (c0, r0) = (fx.floor() as usize, fy.floor() as usize);
        let (tx, ty) = (fx - c0 as f64, fy - r0 as f64);
        let v = level(img.plane(0)[y * 64 + x]);
        let expected = (1.0 - ty) * ((1.0 - tx) * tile_cdf(r0, c0, v) + tx * tile_cdf(r0, c0 + 1, v))
            + ty * ((1.0 - tx) * tile_cdf(r0 + 1, c0, v) + tx * tile_cdf(r0 + 1, c0 + 1, v));
        assert_eq!(clahe::blend_weights(x, y, (64, 64), (8, 8)).len(), 4);
        assert_abs_diff_eq!(out.plane(0)[y * 64 + x], expected, epsilon = 1e-9);
    }
}

#[test]
fn retinex_step_edge_has_mach_bands() {
    let (w, h, sigma) = (64usize, 4usize, 4.0);
    let row: Vec<f64> = (0..w).map(|x| if x < w / 2 { 0.2 } else { 0.8 }).collect();
    let plane: Vec<f64> = row.iter().cycle().take(w * h).copied().collect();
    let msr = retinex::multiscale_retinex(&plane, w, h, &[sigma]);

    let radius = (3.0 * sigma) as isize;
    let taps: Vec<f64> = (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let norm: f64 = taps.iter().sum();
    let mirror = |i: isize| -> usize {
        let i = if i < 0 { -i - 1 } else { i };
        let i = i as usize;
        if i >= w { 2 * w - 1 - i } else { i }
    };
    let oracle: Vec<f64> = (0..w as isize)
        .map(|x| {
            let blur: f64 = taps.iter().enumerate().map(|(k, t)| t * row[mirror(x + k as isize - radius)]).sum::<f64>() / norm;
            row[x as usize].ln() - blur.ln()
        })
        .collect();
    for y in 0..h {
        for x in 0..w {
            assert_abs_diff_eq!(msr[y * w + x], oracle[x], epsilon = 1e-9);
        }
    }
    // Bright side rises above its far plateau next to the edge, dark side dips below.
    assert!(oracle[w / 2] > oracle[w - 1] + 0.1);
    assert!(oracle[w / 2 - 1] < oracle[0] - 0.1);
}

#[test]
fn retinex_cielab_raises_chroma_on_two_ink_chart() {
    let chart = PlanarImage::from_fn(48, 32, ColorEncoding::SrgbEncoded, |x, y| match (x / 8 + y / 8) % 4 {
        0 => [0.18, 0.15, 0.13],
        1 => [0.55, 0.25, 0.18],
        _ => [0.68, 0.56, 0.40],
    });
    let out = retinex::retinex_cielab(&chart, &RetinexParams { scales: vec![3.0, 9.0, 27.0], clip_percent: 0.025 }).unwrap();
    let mean_chroma = |img: &PlanarImage| {
        let lab = color::srgb_to_lab(img).unwrap();
        lab.pixels().map(|p| LabPixel::from(p).chroma()).sum::<f64>() / lab.len() as f64
    };
    assert!(mean_chroma(&out) >= mean_chroma(&chart));
    let planes = retinex::retinex_cielab_planes(&chart, &RetinexParams::default()).unwrap();
    assert!(planes.plane(0).iter().all(|v| (0.0..=100.0).contains(v)));
    assert!(planes.plane(1).iter().chain(planes.plane(2)).all(|v| (-128.0..=127.0).contains(v)));
}

#[test]
fn retinex_constant_image_is_constant() {
    let img = PlanarImage::filled(10, 7, ColorEncoding::SrgbEncoded, [0.4, 0.3, 0.2]);
    let out = retinex::msrcr_rgb(&img, &RetinexParams::default()).unwrap();
    assert!(out.to_interleaved().iter().all(|&v| v == 0.5));
    let out = retinex::retinex_cielab(&img, &RetinexParams::default()).unwrap();
    let first = out.pixel_at(0);
    assert!(out.pixels().all(|p| p == first));
}

#[test]
fn original_recipe_is_gamut_expansion_plus_normalisation() {
    let img = common::papyrus_crop(&mut common::rng(2), 20, 14);
    let out = run_pipeline(&img, &EnhancementRecipe::new(Method::Original)).unwrap().value;
    let lab = color::srgb_to_lab(&color::expand_gamut(&img).unwrap()).unwrap();
    let expected = color::lab_to_srgb(&stretchlim(&lab).unwrap().value).unwrap().clamp(0.0, 1.0);
    assert!(max_abs_diff(&out, &expected) <= 1e-12);
}

#[test]
fn negvividness_on_neutrals_is_normalised_negative() {
    let mut rng = common::rng(8);
    let img = PlanarImage::from_fn(9, 9, ColorEncoding::SrgbEncoded, |_, _| [rng.random::<f64>(); 3]);
    let out = run_pipeline(&img, &EnhancementRecipe::new(Method::Negvividness)).unwrap().value;
    let lab = color::srgb_to_lab(&color::expand_gamut(&img).unwrap()).unwrap();
    let neutral = lab.map_pixels(ColorEncoding::Cielab, |[l, _, _]| [l, 0.0, 0.0]);
    let expected = negative_lightness(&stretchlim(&neutral).unwrap().value).unwrap();
    let expected = color::lab_to_srgb(&expected).unwrap().clamp(0.0, 1.0);
    assert!(max_abs_diff(&out, &expected) <= 1e-6);
}

#[test]
fn cross_spectral_examples() {
    let vis = common::papyrus_crop(&mut common::rng(4), 12, 10);
    let lab = color::srgb_to_lab(&vis).unwrap();
    let same = Plane::new(12, 10, lab.plane(0).iter().map(|l| l / 100.0).collect()).unwrap();
    let out = enhance::cross_spectral_colorize(&vis, &same).unwrap();
    assert!(max_abs_diff(&out, &vis) <= 1e-3);

    let dark = enhance::lightness::cross_spectral_lab(&vis, &Plane::filled(12, 10, 0.0)).unwrap();
    assert!(dark.plane(0).iter().all(|&l| l == 0.0));
    assert_eq!((dark.plane(1), dark.plane(2)), (lab.plane(1), lab.plane(2)));

    let ir = Plane::new(12, 10, (0..120).map(|i| (i % 9) as f64 / 8.0).collect()).unwrap();
    let hue_in = color::lab_derived(&lab).unwrap();
    let hue_out = color::lab_derived(&enhance::lightness::cross_spectral_lab(&vis, &ir).unwrap()).unwrap();
    assert_eq!(hue_in.hue, hue_out.hue);
    assert!(enhance::cross_spectral_colorize(&vis, &Plane::filled(3, 3, 0.5)).is_err());
}
