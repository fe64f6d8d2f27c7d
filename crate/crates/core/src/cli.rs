//! Command-line front end: `enhance`, `rank` and `serve`.
//!
//! Progress and warnings go to standard error; `--json` puts a
//! machine-readable summary on standard output.

use std::fs::{self, File};
use std::io::Write;
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};

use clap::builder::PossibleValuesParser;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use crate::enhance::{run_pipeline, EnhancementRecipe, Method, MethodParams, Preprocess};
use crate::error::{Error, Result};
use crate::io::{file_stem, load_image, load_plane, save_image, variant_path, OutputFormat};
use crate::manifest::{read_manifest, write_manifest, ImageRecord, VariantManifest, VariantRecord, MANIFEST_FILENAME};
use crate::raster::Plane;
use crate::rank::{read_ratings_csv, Scope};
use crate::report::{rank_table, RankMethod, ReportOptions};
use crate::service::{self, AppState, RankingResponse, DEFAULT_PORT};

#[derive(Debug, Parser)]
#[command(name = "legibility", version, about = "Legibility enhancement and rating analysis for manuscript photographs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write enhanced variants of each input plus a manifest
    Enhance(EnhanceArgs),
    /// Rank methods from a ratings CSV (rater,document,method,category)
    Rank(RankArgs),
    /// Serve the rating API over a manifest on loopback
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct EnhanceArgs {
    /// Input images, directories or glob patterns
    #[arg(required = true)]
    pub inputs: Vec<String>,
    /// Output directory (created if missing); the manifest is written here
    #[arg(long)]
    pub out: PathBuf,
    /// Methods to run, comma separated [default: the ten comparison variants]
    #[arg(long, value_delimiter = ',', value_parser = PossibleValuesParser::new(Method::names()))]
    pub methods: Vec<String>,
    /// Output format: png, png16, tiff, tiff16 or jpeg
    #[arg(long, default_value = "png")]
    pub format: String,
    /// Mask image selecting the region used for the hue centroid (non-zero = included)
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Non-visible band for cross-spectral colourisation
    #[arg(long)]
    pub nonvis: Option<PathBuf>,
    /// Parameter override `key=value`; repeatable. Keys: clahe.grid (8x8), clahe.clip,
    /// retinex.scales (15,80,250), retinex.clip, histeq.bins, hue.target, llf.sigma,
    /// llf.alpha, llf.beta, llf.levels, preprocess.gamut, preprocess.normalize
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Worker threads (default: all cores)
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Print a JSON summary to standard output
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    /// Ratings CSV with header rater,document,method,category
    #[arg(long)]
    pub ratings: PathBuf,
    /// centroids, rod, mj, ensemble or all
    #[arg(long, default_value = "all")]
    pub method: String,
    /// overall, per-rater or per-document
    #[arg(long, default_value = "overall")]
    pub scope: String,
    /// Round centroid ratings to integers
    #[arg(long)]
    pub round: bool,
    /// Print the reports as JSON
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Manifest to serve [default: <out>/manifest.json]
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Directory holding manifest.json
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_PORT)]
    pub port: u16,
}

fn parse_bool(v: &str) -> Result<bool> {
    v.parse().map_err(|_| Error::invalid(format!("expected true or false, got `{v}`")))
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| Error::invalid(format!("bad value `{v}` for {key}")))
}

/// Applies one `key=value` override.
pub fn apply_param(params: &mut MethodParams, pre: &mut Preprocess, spec: &str) -> Result<()> {
    let (key, value) = spec
        .split_once('=')
        .ok_or_else(|| Error::invalid(format!("parameter `{spec}` is not key=value")))?;
    match key.trim() {
        "clahe.grid" => {
            let (r, c) = value
                .split_once(['x', 'X', ','])
                .ok_or_else(|| Error::invalid("clahe.grid expects ROWSxCOLS"))?;
            params.clahe.grid = (parse_num(key, r)?, parse_num(key, c)?);
        }
        "clahe.clip" => params.clahe.clip_limit = parse_num(key, value)?,
        "retinex.scales" => {
            params.retinex.scales = value.split(',').map(|s| parse_num(key, s)).collect::<Result<_>>()?;
        }
        "retinex.clip" => params.retinex.clip_percent = parse_num(key, value)?,
        "histeq.bins" => params.histeq_bins = parse_num(key, value)?,
        "hue.target" => params.hue_target_degrees = parse_num(key, value)?,
        "llf.sigma" => params.local_laplacian.sigma = parse_num(key, value)?,
        "llf.alpha" => params.local_laplacian.alpha = parse_num(key, value)?,
        "llf.beta" => params.local_laplacian.beta = parse_num(key, value)?,
        "llf.levels" => params.local_laplacian.levels = parse_num(key, value)?,
        "preprocess.gamut" => pre.expand_gamut = parse_bool(value)?,
        "preprocess.normalize" => pre.normalize_lightness = parse_bool(value)?,
        other => return Err(Error::invalid(format!("unknown parameter `{other}`"))),
    }
    Ok(())
}

fn is_image_path(p: &Path) -> bool {
    p.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "png" | "tif" | "tiff" | "jpg" | "jpeg"))
}

/// Expands directories (their image files) and glob patterns, in sorted order per argument.
pub fn expand_inputs(inputs: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        let path = Path::new(input);
        if path.is_dir() {
            let mut files: Vec<PathBuf> = fs::read_dir(path)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && is_image_path(p))
                .collect();
            files.sort();
            out.extend(files);
        } else if input.contains(['*', '?', '[']) {
            let pattern = glob::glob(input).map_err(|e| Error::invalid(format!("bad glob `{input}`: {e}")))?;
            let mut files: Vec<PathBuf> = pattern.filter_map(|p| p.ok()).filter(|p| p.is_file()).collect();
            files.sort();
            out.extend(files);
        } else {
            out.push(path.to_path_buf());
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyInput("no input images found"));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize)]
pub struct VariantOutcome {
    pub method: String,
    pub path: PathBuf,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileOutcome {
    pub input: PathBuf,
    pub image_id: String,
    pub variants: Vec<VariantOutcome>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnhanceSummary {
    pub out_dir: PathBuf,
    pub manifest: PathBuf,
    pub files: Vec<FileOutcome>,
    pub failures: usize,
}

struct Job<'a> {
    methods: &'a [Method],
    params: &'a MethodParams,
    preprocess: Preprocess,
    format: OutputFormat,
    out: &'a Path,
}

fn enhance_one(job: &Job, input: &Path, image_id: &str) -> Result<(ImageRecord, Vec<VariantRecord>, Vec<VariantOutcome>)> {
    let loaded = load_image(input)?;
    let (w, h) = loaded.image.dims();
    let image = ImageRecord {
        id: image_id.to_string(),
        source_path: input.to_string_lossy().into_owned(),
        pixel_dims: [w, h],
        assumed_profile: loaded.profile,
    };
    let mut records = Vec::with_capacity(job.methods.len());
    let mut outcomes = Vec::with_capacity(job.methods.len());
    for &method in job.methods {
        let recipe = EnhancementRecipe {
            method,
            params: job.params.clone(),
            preprocess: job.preprocess,
        };
        let out = run_pipeline(&loaded.image, &recipe).map_err(|e| Error::invalid(format!("{method}: {e}")))?;
        let path = variant_path(job.out, input, method.name(), job.format);
        save_image(&out.value, &path, job.format)?;
        for w in &out.warnings {
            log::warn!("{}: {method}: {w}", input.display());
        }
        records.push(VariantRecord {
            image_id: image_id.to_string(),
            method: method.name().to_string(),
            params_digest: recipe.digest(),
            output_path: path.file_name().expect("variant file name").to_string_lossy().into_owned(),
        });
        outcomes.push(VariantOutcome {
            method: method.name().to_string(),
            path,
            warnings: out.warnings.iter().map(ToString::to_string).collect(),
        });
    }
    Ok((image, records, outcomes))
}

fn load_optional_plane(path: Option<&Path>) -> Result<Option<Plane>> {
    path.map(load_plane).transpose()
}

/// Runs every selected method on every input. Per-file failures are recorded
/// and the run continues; the manifest is written once at the end.
pub fn cmd_enhance(args: &EnhanceArgs) -> Result<EnhanceSummary> {
    let methods: Vec<Method> = if args.methods.is_empty() {
        Method::DEFAULT_SET.to_vec()
    } else {
        args.methods.iter().map(|m| m.parse()).collect::<Result<_>>()?
    };
    let format = OutputFormat::parse(&args.format)?;
    let mut params = MethodParams::default();
    let mut preprocess = Preprocess::default();
    for p in &args.params {
        apply_param(&mut params, &mut preprocess, p)?;
    }
    params.retinex.validate()?;
    params.local_laplacian.validate()?;
    params.hue_mask = load_optional_plane(args.mask.as_deref())?;
    params.nonvis = load_optional_plane(args.nonvis.as_deref())?;
    if methods.contains(&Method::CrossSpectral) && params.nonvis.is_none() {
        return Err(Error::invalid("cross_spectral needs --nonvis"));
    }
    let inputs = expand_inputs(&args.inputs)?;
    fs::create_dir_all(&args.out)?;
    let manifest_path = args.out.join(MANIFEST_FILENAME);
    let mut manifest = if manifest_path.exists() {
        read_manifest(&manifest_path)?
    } else {
        VariantManifest::new()
    };

    let mut ids: Vec<String> = Vec::with_capacity(inputs.len());
    for input in &inputs {
        let stem = file_stem(input);
        let mut id = stem.clone();
        let mut k = 2;
        while ids.contains(&id) {
            id = format!("{stem}-{k}");
            k += 1;
        }
        ids.push(id);
    }

    let job = Job {
        methods: &methods,
        params: &params,
        preprocess,
        format,
        out: &args.out,
    };
    let run = || -> Vec<_> {
        inputs
            .par_iter()
            .zip(&ids)
            .map(|(input, id)| {
                log::info!("enhancing {}", input.display());
                (input.clone(), id.clone(), enhance_one(&job, input, id))
            })
            .collect()
    };
    let results = match args.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut files = Vec::with_capacity(results.len());
    let mut failures = 0;
    for (input, image_id, result) in results {
        match result {
            Ok((image, records, variants)) => {
                manifest.upsert_image(image);
                for r in records {
                    manifest.upsert_variant(r)?;
                }
                files.push(FileOutcome {
                    input,
                    image_id,
                    variants,
                    error: None,
                });
            }
            Err(e) => {
                log::error!("{}: {e}", input.display());
                failures += 1;
                files.push(FileOutcome {
                    input,
                    image_id,
                    variants: Vec::new(),
                    error: Some(e.to_string()),
                });
            }
        }
    }
    write_manifest(&manifest, &manifest_path)?;
    Ok(EnhanceSummary {
        out_dir: args.out.clone(),
        manifest: manifest_path,
        files,
        failures,
    })
}

/// Ranking reports for a ratings CSV; `method` may be `all`.
pub fn cmd_rank(args: &RankArgs) -> Result<RankingResponse> {
    let table = read_ratings_csv(File::open(&args.ratings)?)?;
    table.validate()?;
    let scope: Scope = args.scope.parse()?;
    let methods: Vec<RankMethod> = if args.method == "all" {
        RankMethod::ALL.to_vec()
    } else {
        vec![args.method.parse()?]
    };
    let opts = ReportOptions {
        round_centroids: args.round,
        ..ReportOptions::default()
    };
    let mut reports = Vec::new();
    for m in methods {
        reports.extend(rank_table(&table, m, scope, &opts)?);
    }
    Ok(RankingResponse { reports })
}

/// Serves the manifest until interrupted.
pub fn cmd_serve(args: &ServeArgs) -> Result<()> {
    let manifest = args.manifest.clone().unwrap_or_else(|| args.out.join(MANIFEST_FILENAME));
    let state = AppState::load(&manifest)?;
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async move {
        let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, args.port));
        let listener = service::bind(addr).await?;
        log::info!("serving {} on http://{}", manifest.display(), listener.local_addr()?);
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            log::info!("shutting down");
        };
        service::serve(listener, state, shutdown).await
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Enhance(args) => cmd_enhance(&args).and_then(|summary| {
            if args.json {
                print_json(&summary)?;
            }
            eprintln!(
                "wrote {} variants for {} of {} inputs; manifest {}",
                summary.files.iter().map(|f| f.variants.len()).sum::<usize>(),
                summary.files.len() - summary.failures,
                summary.files.len(),
                summary.manifest.display()
            );
            Ok(if summary.failures > 0 { 1 } else { 0 })
        }),
        Command::Rank(args) => cmd_rank(&args).and_then(|resp| {
            if args.json {
                print_json(&resp)?;
            } else {
                let text: Vec<String> = resp.reports.iter().map(|r| r.to_text()).collect();
                println!("{}", text.join("\n"));
            }
            Ok(0)
        }),
        Command::Serve(args) => cmd_serve(&args).map(|()| 0),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        2
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_is_well_formed() {
        Cli::command().debug_assert();
    }

    #[test]
    fn help_lists_every_method() {
        let mut cmd = Cli::command();
        let help = cmd
            .find_subcommand_mut("enhance")
            .unwrap()
            .render_long_help()
            .to_string();
        for name in Method::names() {
            assert!(help.contains(name), "{name} missing from help");
        }
    }

    #[test]
    fn unknown_method_is_a_usage_error() {
        let parsed = Cli::try_parse_from(["legibility", "enhance", "x.png", "--out", "o", "--methods", "vividness,dstretch"]);
        assert!(parsed.is_err());
    }

    #[test]
    fn param_overrides() {
        let mut p = MethodParams::default();
        let mut pre = Preprocess::default();
        apply_param(&mut p, &mut pre, "clahe.grid=4x6").unwrap();
        apply_param(&mut p, &mut pre, "retinex.scales=10,20").unwrap();
        apply_param(&mut p, &mut pre, "preprocess.gamut=false").unwrap();
        assert_eq!(p.clahe.grid, (4, 6));
        assert_eq!(p.retinex.scales, vec![10.0, 20.0]);
        assert!(!pre.expand_gamut);
        assert!(apply_param(&mut p, &mut pre, "nope=1").is_err());
        assert!(apply_param(&mut p, &mut pre, "clahe.clip").is_err());
    }
}
