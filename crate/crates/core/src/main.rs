use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use antoine::dynamics::{
    box_dimension_estimate, chaos_game_sample, density_report, enumerate_periodic,
    escape_itinerary, necklace_box_scales, orbit, similarity_dimension, ExteriorModel,
    DEFAULT_BUDGET,
};
use antoine::necklace::{max_diameter, minimal_valid_multiplicity, validate_with, ValidateOptions};
use antoine::report_io::{
    classify_volume, mesh_stage, sidecar_path, stage_addresses, write_file, write_json, write_obj,
    write_ply, write_points, write_vol, BoundingBox, MeshParams, PointFormat, PointsSidecar,
    VolumeEncoding, VolumeSidecar,
};
use antoine::{Error, Necklace, Vec3};

/// Smallest even multiplicity at which the construction validates.
const DEFAULT_M: i64 = 38;

#[derive(Parser)]
#[command(
    name = "antoine",
    version,
    about = "Self-similar Antoine necklaces and their escape-time dynamics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Number of child tori (even, at least 10).
    #[arg(long, default_value_t = DEFAULT_M, allow_negative_numbers = true)]
    m: i64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted (text formats only).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the construction constants and stage sizes.
    Build {
        #[command(flatten)]
        common: Common,
        /// Deepest stage to summarize.
        #[arg(long, default_value_t = 3)]
        depth: usize,
    },
    /// Validate the construction and compute the linking matrix.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Initial grid for the circle-distance bound.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = 512)]
        poly_n: usize,
        #[arg(long, default_value_t = 256)]
        quad_n: usize,
        /// Skip linking and report the smallest valid m up to this bound.
        #[arg(long)]
        scan_max: Option<usize>,
    },
    /// Escape-depth volume over a voxel grid, or a single point with --point.
    Classify {
        #[command(flatten)]
        common: Common,
        /// Voxels per axis.
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// `h` for the cube [-h, h]^3, or `x0,y0,z0,x1,y1,z1`.
        #[arg(long, value_parser = parse_bbox, allow_negative_numbers = true)]
        bbox: Option<BoundingBox>,
        #[arg(long, value_parser = parse_point, allow_negative_numbers = true)]
        point: Option<Vec3>,
    },
    /// Periodic points up to a given period and their density.
    Periodic {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        p_max: usize,
        /// Maximum number of words before sampling kicks in.
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        /// Stage of the reference tori used for the density distance.
        #[arg(long, default_value_t = 8)]
        depth: usize,
        /// Number of reference tori.
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Box-counting dimension of a chaos-game sample.
    Dimension {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value_t = 100_000)]
        count: usize,
    },
    /// Write stage meshes, attractor samples or stage tori.
    Export {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Obj)]
        format: Format,
        /// Stage for meshes and tori; address length for point samples.
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long, default_value_t = 32)]
        nu: usize,
        #[arg(long, default_value_t = 16)]
        nv: usize,
        /// Number of samples for point formats.
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[arg(long, default_value_t = 64)]
        grid: usize,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, value_parser = parse_bbox, allow_negative_numbers = true)]
        bbox: Option<BoundingBox>,
    },
    /// Orbit of one point: similarity steps, then the exterior model.
    Map {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_point, allow_negative_numbers = true)]
        point: Vec3,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
        /// Exterior degree; defaults to floor(sqrt(m)).
        #[arg(long)]
        degree: Option<u32>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Obj,
    Ply,
    Xyz,
    Csv,
    Json,
    Vol,
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn parse_point(s: &str) -> Result<Vec3, String> {
    match parse_floats(s)?[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err("expected x,y,z".into()),
    }
}

fn parse_bbox(s: &str) -> Result<BoundingBox, String> {
    let r = match parse_floats(s)?[..] {
        [h] => BoundingBox::cube(h),
        [a, b, c, d, e, f] => BoundingBox::new(Vec3::new(a, b, c), Vec3::new(d, e, f)),
        _ => return Err("expected h or x0,y0,z0,x1,y1,z1".into()),
    };
    r.map_err(|e| e.to_string())
}

fn emit_json(value: &impl Serialize, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(p) => write_file(p, |w| write_json(value, w))
            .with_context(|| format!("writing {}", p.display())),
        None => {
            let mut lock = io::stdout().lock();
            write_json(value, &mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct BuildSummary {
    m: usize,
    ratio: f64,
    child_tube: f64,
    even_square: bool,
    stages: Vec<antoine::necklace::StageSummary>,
}

#[derive(Serialize)]
struct ScanResult {
    scan_max: usize,
    m_star: Option<usize>,
}

#[derive(Serialize)]
struct PointClass {
    point: Vec3,
    budget: usize,
    outcome: antoine::dynamics::EscapeOutcome,
    itinerary: antoine::Address,
}

#[derive(Serialize)]
struct PeriodicSummary {
    m: usize,
    p_max: usize,
    orbits: usize,
    density: f64,
    density_bound: f64,
    points: Vec<antoine::dynamics::PeriodicPoint>,
}

#[derive(Serialize)]
struct DimensionSummary {
    m: usize,
    count: usize,
    depth: usize,
    seed: u64,
    similarity_dimension: f64,
    box_dimension: antoine::dynamics::BoxDimension,
}

#[derive(Serialize)]
struct StageTorus {
    address: antoine::Address,
    torus: antoine::SolidTorus,
}

/// Exit status 1: the command ran but the construction did not validate.
#[derive(Debug, thiserror::Error)]
#[error("validation failed")]
struct ValidationFailed;

fn necklace(c: &Common) -> anyhow::Result<Necklace> {
    Ok(Necklace::build(c.m)?)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Build { common, depth } => {
            let n = necklace(&common)?;
            let summary = BuildSummary {
                m: n.m(),
                ratio: n.ratio(),
                child_tube: n.child_tube(),
                even_square: n.is_even_square(),
                stages: (0..=depth).map(|k| n.stage_summary(k)).collect(),
            };
            emit_json(&summary, common.out.as_deref())
        }
        Command::Verify {
            common,
            grid,
            poly_n,
            quad_n,
            scan_max,
        } => {
            let opts = ValidateOptions {
                grid_n: grid,
                poly_n: Some(poly_n),
                quad_n,
                seed: common.seed,
                ..Default::default()
            };
            if let Some(max) = scan_max {
                let m_star = minimal_valid_multiplicity(
                    max,
                    &ValidateOptions {
                        poly_n: None,
                        ..opts
                    },
                )?;
                return emit_json(
                    &ScanResult {
                        scan_max: max,
                        m_star,
                    },
                    common.out.as_deref(),
                );
            }
            let n = necklace(&common)?;
            let report = validate_with(&n, &opts)?;
            emit_json(&report, common.out.as_deref())?;
            if !report.passed {
                return Err(ValidationFailed.into());
            }
            Ok(())
        }
        Command::Classify {
            common,
            grid,
            budget,
            bbox,
            point,
        } => {
            let n = necklace(&common)?;
            if let Some(p) = point {
                let (outcome, itinerary) = escape_itinerary(&n, p, budget)?;
                return emit_json(
                    &PointClass {
                        point: p,
                        budget,
                        outcome,
                        itinerary,
                    },
                    common.out.as_deref(),
                );
            }
            let out = common
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("classify.vol"));
            export_volume(&n, &common, &out, grid, budget, bbox.unwrap_or_default())
        }
        Command::Periodic {
            common,
            p_max,
            cap,
            depth,
            count,
        } => {
            let n = necklace(&common)?;
            let points = enumerate_periodic(&n, p_max, cap, common.seed)?;
            let density = density_report(&n, p_max, depth.max(p_max), count, common.seed)?;
            let summary = PeriodicSummary {
                m: n.m(),
                p_max,
                orbits: points.len(),
                density,
                density_bound: max_diameter(n.m(), p_max) + max_diameter(n.m(), depth.max(p_max)),
                points,
            };
            emit_json(&summary, common.out.as_deref())
        }
        Command::Dimension {
            common,
            depth,
            count,
        } => {
            let n = necklace(&common)?;
            let pts = chaos_game_sample(&n, count, depth, common.seed)?;
            let summary = DimensionSummary {
                m: n.m(),
                count,
                depth,
                seed: common.seed,
                similarity_dimension: similarity_dimension(n.m())?,
                box_dimension: box_dimension_estimate(&pts, &necklace_box_scales(n.m()))?,
            };
            emit_json(&summary, common.out.as_deref())
        }
        Command::Export {
            common,
            format,
            depth,
            nu,
            nv,
            count,
            grid,
            budget,
            bbox,
        } => {
            let n = necklace(&common)?;
            let out = common.out.clone();
            let need_out = || {
                out.clone()
                    .ok_or_else(|| anyhow::anyhow!("--out is required for binary formats"))
            };
            match format {
                Format::Obj | Format::Ply => {
                    let stage = mesh_stage(&n, depth, nu, nv)?;
                    let params = MeshParams {
                        m: n.m(),
                        k: depth,
                        nu,
                        nv,
                    };
                    let path = need_out()?;
                    write_file(&path, |w| {
                        if format == Format::Obj {
                            write_obj(&stage, &params, w)
                        } else {
                            write_ply(&stage, &params, w)
                        }
                    })?;
                    Ok(())
                }
                Format::Xyz | Format::Csv => {
                    let pf = if format == Format::Xyz {
                        PointFormat::Xyz
                    } else {
                        PointFormat::Csv
                    };
                    let pts = chaos_game_sample(&n, count, depth, common.seed)?;
                    let sidecar = PointsSidecar {
                        m: n.m(),
                        count,
                        depth,
                        seed: common.seed,
                        format: pf,
                    };
                    match &out {
                        Some(p) => {
                            write_file(p, |w| write_points(&pts, pf, w))?;
                            write_file(&sidecar_path(p), |w| write_json(&sidecar, w))?;
                        }
                        None => write_points(&pts, pf, &mut io::stdout().lock())?,
                    }
                    Ok(())
                }
                Format::Json => {
                    antoine::report_io::check_stage_size(n.m(), depth)?;
                    let tori: Vec<StageTorus> = stage_addresses(n.m(), depth)
                        .into_iter()
                        .map(|a| StageTorus {
                            torus: n.torus_at(&a),
                            address: a,
                        })
                        .collect();
                    emit_json(&tori, out.as_deref())
                }
                Format::Vol => export_volume(
                    &n,
                    &common,
                    &need_out()?,
                    grid,
                    budget,
                    bbox.unwrap_or_default(),
                ),
            }
        }
        Command::Map {
            common,
            point,
            budget,
            degree,
        } => {
            let n = necklace(&common)?;
            let model = match degree {
                Some(d) => ExteriorModel::new(d)?,
                None => ExteriorModel::for_multiplicity(n.m()),
            };
            emit_json(&orbit(&n, &model, point, budget)?, common.out.as_deref())
        }
    }
}

fn export_volume(
    n: &Necklace,
    common: &Common,
    out: &Path,
    grid: usize,
    budget: usize,
    bbox: BoundingBox,
) -> anyhow::Result<()> {
    let dims = [grid; 3];
    let vol = classify_volume(n, dims, &bbox, budget)?;
    write_file(out, |w| write_vol(&vol, w))?;
    let sidecar = VolumeSidecar {
        dims,
        bbox,
        budget,
        m: n.m(),
        seed: common.seed,
        encoding: VolumeEncoding::default(),
    };
    write_file(&sidecar_path(out), |w| write_json(&sidecar, w))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.is::<ValidationFailed>() {
                eprintln!("antoine: validation failed");
                return ExitCode::from(1);
            }
            eprintln!("antoine: {e:#}");
            match e.downcast_ref::<Error>() {
                Some(Error::InvalidMultiplicity(_)) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
