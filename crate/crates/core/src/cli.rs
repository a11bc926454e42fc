//! Command-line front end.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::atlas::{extract_islands, merge_default, validate_atlas};
use crate::baker::NormalizedFrame;
use crate::error::{Error, Result};
use crate::mesh_io::{
    load_obj, omg_file_size, read_omage, write_omage, write_previews, ObjectImage,
};
use crate::metrics::{
    boundary_gap, fidelity, fidelity_decoded, open_boundary_length, sample_surface, write_xyz,
};
use crate::pipeline::{encode_mesh, pool, with_threads, Encoded, PipelineConfig, Pooling};
use crate::remesher::{remesh, write_decoded};

#[derive(Debug, Parser)]
#[command(
    name = "omage",
    version,
    about = "Encode UV-mapped meshes as 12-channel object images"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Print a single JSON document on stdout.
    #[arg(long, global = true)]
    pub json: bool,

    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode an OBJ into high- and low-resolution OMG1 files.
    Encode(EncodeArgs),
    /// Rebuild a mesh (OBJ + JSON sidecar) from an OMG1 file.
    Decode(DecodeArgs),
    /// Pool an OMG1 file to a lower resolution.
    Downsample(DownsampleArgs),
    /// Report atlas and fidelity statistics for a mesh or an OMG1 file.
    Analyze(AnalyzeArgs),
    /// Encode, decode and measure fidelity in one go.
    Roundtrip(RoundtripArgs),
}

#[derive(Debug, Clone, Args, Default)]
pub struct ConfigArgs {
    /// `key = value` config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub res: Option<usize>,
    #[arg(long)]
    pub low_res: Option<usize>,
    #[arg(long)]
    pub max_patches: Option<usize>,
    /// Island spacing in low-resolution pixels.
    #[arg(long)]
    pub margin: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Surface samples per mesh for Chamfer.
    #[arg(long)]
    pub samples: Option<usize>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<PipelineConfig> {
        let mut c = match &self.config {
            Some(path) => PipelineConfig::load(path)?,
            None => PipelineConfig::default(),
        };
        if let Some(v) = self.res {
            c.bake_resolution = v;
        }
        if let Some(v) = self.low_res {
            c.low_resolution = v;
        }
        if let Some(v) = self.max_patches {
            c.max_patches = v;
        }
        if let Some(v) = self.margin {
            c.margin_px = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.samples {
            c.chamfer_samples = v;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    /// Input OBJ, or a directory of OBJ files with `--jobs`.
    pub input: PathBuf,
    /// Output `.omg` path, or an output directory with `--jobs`.
    pub output: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Batch mode: encode every `*.obj` in `input` with N workers.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub no_previews: bool,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    /// Encode log (or bare frame JSON) used to restore world units.
    #[arg(long)]
    pub frame: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DownsampleArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub low_res: usize,
    /// Plain occupied-pixel mean instead of boundary snapping.
    #[arg(long)]
    pub naive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Compare {
    Naive,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// `.obj` mesh or `.omg` object image.
    pub input: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Also report the fidelity of a naive-pooled low-resolution image.
    #[arg(long, value_enum)]
    pub compare: Option<Compare>,
    /// Frame for restoring world units when analyzing an `.omg`.
    #[arg(long)]
    pub frame: Option<PathBuf>,
    /// Write the decoded low-resolution surface samples as xyz text.
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RoundtripArgs {
    pub input: PathBuf,
    /// Directory for all outputs.
    pub output_dir: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
}

/// Files written by one encode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EncodeOutputs {
    pub high: PathBuf,
    pub low: PathBuf,
    pub previews: Option<PathBuf>,
    pub log: PathBuf,
}

impl EncodeOutputs {
    /// `out/foo.omg` gives `out/foo.64.omg`, `out/foo.previews/` and
    /// `out/foo.log.json`.
    pub fn for_output(output: &Path, low_res: usize, previews: bool) -> Self {
        let stem = output
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "omage".into());
        let dir = output.parent().unwrap_or(Path::new(""));
        EncodeOutputs {
            high: output.to_path_buf(),
            low: dir.join(format!("{stem}.{low_res}.omg")),
            previews: previews.then(|| dir.join(format!("{stem}.previews"))),
            log: dir.join(format!("{stem}.log.json")),
        }
    }
}

fn ensure_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
        }
        _ => Ok(()),
    }
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("JSON value serializes");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn image_summary(img: &ObjectImage) -> Value {
    json!({
        "resolution": img.resolution(),
        "occupancy_ratio": img.occupancy_ratio(),
        "byte_size": omg_file_size(img.resolution()),
    })
}

/// Encodes one OBJ and writes every artifact. Returns the log document.
pub fn encode_file(
    input: &Path,
    output: &Path,
    config: &PipelineConfig,
    previews: bool,
) -> Result<Value> {
    let start = std::time::Instant::now();
    let mesh = load_obj(input)?;
    let load_seconds = start.elapsed().as_secs_f64();
    let encoded = encode_mesh(&mesh, config)?;
    let outputs = EncodeOutputs::for_output(output, config.low_resolution, previews);
    let write_start = std::time::Instant::now();
    ensure_parent(output)?;
    write_omage(&encoded.high, &outputs.high)?;
    write_omage(&encoded.low, &outputs.low)?;
    if let Some(dir) = &outputs.previews {
        write_previews(&encoded.high, dir)?;
    }
    let write_seconds = write_start.elapsed().as_secs_f64();
    let log = encode_log(
        input,
        &outputs,
        config,
        &encoded,
        &mesh,
        load_seconds,
        write_seconds,
        start,
    );
    write_json(&outputs.log, &log)?;
    Ok(log)
}

#[allow(clippy::too_many_arguments)]
fn encode_log(
    input: &Path,
    outputs: &EncodeOutputs,
    config: &PipelineConfig,
    encoded: &Encoded,
    mesh: &crate::mesh_io::IndexedMesh,
    load_seconds: f64,
    write_seconds: f64,
    start: std::time::Instant,
) -> Value {
    let mut stages = vec![json!({"stage": "load", "seconds": load_seconds})];
    stages.extend(encoded.timings.0.iter().map(|t| json!(t)));
    stages.push(json!({"stage": "write", "seconds": write_seconds}));
    json!({
        "input": input,
        "outputs": outputs,
        "config": config,
        "triangle_count": mesh.triangle_count(),
        "atlas": encoded.atlas,
        "frame": encoded.frame,
        "high": image_summary(&encoded.high),
        "low": image_summary(&encoded.low),
        "timings": stages,
        "total_seconds": start.elapsed().as_secs_f64(),
    })
}

fn obj_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("obj")))
        .collect();
    files.sort();
    Ok(files)
}

fn error_value(e: &Error) -> Value {
    json!({"code": e.code(), "message": e.to_string(), "exit_code": e.exit_code()})
}

/// Outcome of a subcommand: the JSON document to print and the exit code.
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

impl From<Value> for Outcome {
    fn from(report: Value) -> Self {
        Outcome {
            report,
            exit_code: 0,
        }
    }
}

fn cmd_encode(args: &EncodeArgs) -> Result<Outcome> {
    let config = args.config.resolve()?;
    let Some(jobs) = args.jobs else {
        return encode_file(&args.input, &args.output, &config, !args.no_previews).map(Into::into);
    };
    let files = obj_files(&args.input)?;
    std::fs::create_dir_all(&args.output).map_err(|e| Error::io(&args.output, e))?;
    // each file runs on its own worker; pooling inside a file then uses the
    // same worker pool
    let results: Vec<(PathBuf, Result<Value>)> = with_threads(Some(jobs.max(1)), || {
        files
            .par_iter()
            .map(|f| {
                let stem = f
                    .file_stem()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned();
                let out = args.output.join(format!("{stem}.omg"));
                (f.clone(), encode_file(f, &out, &config, !args.no_previews))
            })
            .collect()
    });
    let exit_code = results
        .iter()
        .filter_map(|(_, r)| r.as_ref().err().map(Error::exit_code))
        .max()
        .unwrap_or(0);
    let entries: Vec<Value> = results
        .iter()
        .map(|(f, r)| match r {
            Ok(log) => json!({"input": f, "ok": true, "log": log}),
            Err(e) => json!({"input": f, "ok": false, "error": error_value(e)}),
        })
        .collect();
    Ok(Outcome {
        report: json!({"files": entries}),
        exit_code,
    })
}

/// Reads a frame from either a bare frame document or an encode log.
pub fn read_frame(path: &Path) -> Result<NormalizedFrame> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    let frame = value.get("frame").cloned().unwrap_or(value);
    serde_json::from_value(frame)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
}

fn cmd_decode(args: &DecodeArgs) -> Result<Outcome> {
    let img = read_omage(&args.input)?;
    let mut decoded = remesh(&img)?;
    if let Some(path) = &args.frame {
        decoded.restore_frame(read_frame(path)?);
    }
    ensure_parent(&args.output)?;
    write_decoded(&decoded, &args.output)?;
    Ok(json!({
        "input": args.input,
        "output": args.output,
        "vertex_count": decoded.vertex_count(),
        "triangle_count": decoded.mesh.triangle_count(),
        "patch_count": decoded.patch_count(),
        "cross_patch_triangles": decoded.cross_patch_triangles(),
    })
    .into())
}

fn cmd_downsample(args: &DownsampleArgs) -> Result<Outcome> {
    let img = read_omage(&args.input)?;
    let pooling = if args.naive {
        Pooling::Naive
    } else {
        Pooling::Sparse
    };
    let low = pool(&img, args.low_res, pooling)?;
    ensure_parent(&args.output)?;
    write_omage(&low, &args.output)?;
    Ok(json!({
        "input": args.input,
        "output": args.output,
        "pooling": if args.naive { "naive" } else { "sparse" },
        "image": image_summary(&low),
    })
    .into())
}

fn analyze_omage(args: &AnalyzeArgs) -> Result<Value> {
    let img = read_omage(&args.input)?;
    let mut decoded = remesh(&img)?;
    if let Some(path) = &args.frame {
        decoded.restore_frame(read_frame(path)?);
    }
    Ok(json!({
        "input": args.input,
        "resolution": img.resolution(),
        "byte_size": omg_file_size(img.resolution()),
        "occupancy_ratio": img.occupancy_ratio(),
        "patch_count": decoded.patch_count(),
        "cross_patch_triangles": decoded.cross_patch_triangles(),
        "open_boundary_length": open_boundary_length(&decoded.mesh),
        "boundary_gap": boundary_gap(&decoded),
        "vertex_count": decoded.vertex_count(),
        "triangle_count": decoded.mesh.triangle_count(),
    }))
}

fn analyze_mesh(args: &AnalyzeArgs) -> Result<Value> {
    let config = args.config.resolve()?;
    let mesh = load_obj(&args.input)?;
    let merged = merge_default(&mesh);
    let island_count = extract_islands(&merged).len();
    let validation = validate_atlas(&merged);
    let encoded = encode_mesh(&mesh, &config)?;
    let (n, seed) = (config.chamfer_samples, config.seed);
    let high = fidelity(&mesh, &encoded.high, &encoded.frame, n, seed)?;
    let low = fidelity(&mesh, &encoded.low, &encoded.frame, n, seed)?;
    let mut report = json!({
        "input": args.input,
        "config": config,
        "island_count": island_count,
        "atlas": encoded.atlas,
        "validation": validation,
        "frame": encoded.frame,
        "high": high,
        "sparse": low,
    });
    if args.compare == Some(Compare::Naive) {
        let naive = pool(&encoded.high, config.low_resolution, Pooling::Naive)?;
        report["naive"] = json!(fidelity(&mesh, &naive, &encoded.frame, n, seed)?);
    }
    if let Some(path) = &args.samples_out {
        let mut decoded = remesh(&encoded.low)?;
        decoded.restore_frame(encoded.frame);
        write_xyz(&sample_surface(&decoded.mesh, n, seed)?, path)?;
    }
    Ok(report)
}

fn is_omg(path: &Path) -> bool {
    path.extension()
        .is_some_and(|x| x.eq_ignore_ascii_case("omg"))
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<Outcome> {
    if is_omg(&args.input) {
        analyze_omage(args).map(Into::into)
    } else {
        analyze_mesh(args).map(Into::into)
    }
}

fn cmd_roundtrip(args: &RoundtripArgs) -> Result<Outcome> {
    let config = args.config.resolve()?;
    let stem = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "mesh".into());
    let omg = args.output_dir.join(format!("{stem}.omg"));
    let log = encode_file(&args.input, &omg, &config, true)?;
    let mesh = load_obj(&args.input)?;
    let frame: NormalizedFrame =
        serde_json::from_value(log["frame"].clone()).expect("log carries the frame");
    let (n, seed) = (config.chamfer_samples, config.seed);
    let mut reports = serde_json::Map::new();
    for (name, path) in [
        ("high", &omg),
        (
            "low",
            &args
                .output_dir
                .join(format!("{stem}.{}.omg", config.low_resolution)),
        ),
    ] {
        let img = read_omage(path)?;
        let mut decoded = remesh(&img)?;
        decoded.restore_frame(frame);
        let obj = args.output_dir.join(format!("{stem}.{name}.decoded.obj"));
        write_decoded(&decoded, &obj)?;
        reports.insert(
            name.into(),
            json!(fidelity_decoded(&mesh, &img, &decoded, n, seed)?),
        );
    }
    Ok(json!({"input": args.input, "encode": log, "fidelity": reports}).into())
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    with_threads(None, || match &cli.command {
        Command::Encode(a) => cmd_encode(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Downsample(a) => cmd_downsample(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Roundtrip(a) => cmd_roundtrip(a),
    })
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => tracing::Level::WARN,
        1 => tracing::Level::INFO,
        _ => tracing::Level::DEBUG,
    };
    let _ = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_max_level(level)
        .with_target(false)
        .try_init();
}

fn print_human(report: &Value) {
    let text = serde_json::to_string_pretty(report).expect("JSON value serializes");
    println!("{text}");
}

/// Parses arguments, runs the command and returns the process exit code.
/// Failures are reported as `{"error": {...}}`, on stdout with `--json` and
/// on stderr otherwise.
pub fn main_with_args(args: impl IntoIterator<Item = std::ffi::OsString>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match run(&cli) {
        Ok(outcome) => {
            if cli.json {
                println!(
                    "{}",
                    serde_json::to_string(&outcome.report).expect("JSON value serializes")
                );
            } else {
                print_human(&outcome.report);
            }
            outcome.exit_code
        }
        Err(e) => {
            let doc = json!({"error": error_value(&e)});
            if cli.json {
                println!("{doc}");
            } else {
                let _ = writeln!(std::io::stderr(), "error: {e}\n{doc}");
            }
            e.exit_code()
        }
    }
}
