//! Subcommands and their exit-code contract: 0 on success, 2 when a slope or
//! structure check fails, 1 on solver or i/o failure, 64 on bad
//! configuration.

use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use pflow_core::fe::{interpolation_study, max_embedding_order, study_field, FeSpace, DIM};
use pflow_core::harness::ConvergenceTable;
use pflow_core::mesh::{refinement_family, unit_square_mesh};
use pflow_core::structure::{check_structure_seeded, cubic_stress, equivalence_probe_seeded, CheckConfig};
use pflow_core::{StructureParams, Tensor};
use serde::Serialize;

use crate::config::StudyOptions;
use crate::output::{emit, rate_csv, sidecar, sidecar_path, study_csv, to_json};
use crate::{exit, parallel, CliError};

#[derive(Parser, Debug)]
#[command(
    name = "pflow",
    version,
    about = "Convergence studies for implicit Euler / P1 finite elements"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a spatial, temporal or coupled convergence study.
    Study(StudyArgs),
    /// Empirical structure constants and equivalence brackets of a stress.
    Check(CheckArgs),
    /// Interpolation error rates of the Clément-type operator.
    Interp(InterpArgs),
    /// Statistics of a uniformly refined unit-square mesh family.
    Mesh(MeshArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(clap::Args, Debug)]
pub struct StudyArgs {
    #[command(flatten)]
    pub options: StudyOptions,
    /// Output file; stdout when omitted. With CSV output a JSON sidecar is
    /// written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StressKind {
    /// `(δ+|P^sym|)^{p−2} P^sym + ε P^sym`.
    Canonical,
    /// `|P^sym|² P^sym`, which violates the growth bound.
    Cubic,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct CheckArgs {
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub p: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub delta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = StressKind::Canonical)]
    pub stress: StressKind,
}

#[derive(clap::Args, Debug, Serialize)]
pub struct InterpArgs {
    /// Smoothness order of the data, 1 or 2.
    #[arg(long)]
    pub ell: usize,
    #[arg(long)]
    pub q: f64,
    #[arg(long)]
    pub r: f64,
    /// Highest derivative order in the measured sum; defaults to the
    /// largest order with a compact embedding.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long, default_value_t = 4)]
    pub base_n: usize,
    /// Allowed distance between measured and predicted slope.
    #[arg(long, default_value_t = 0.2)]
    pub tolerance: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    #[serde(skip)]
    pub format: Format,
}

#[derive(clap::Args, Debug)]
pub struct MeshArgs {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
}

pub fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Study(a) => cmd_study(a),
        Command::Check(a) => cmd_check(a),
        Command::Interp(a) => cmd_interp(a),
        Command::Mesh(a) => cmd_mesh(a),
    }
}

fn verdict(pass: bool) -> u8 {
    if pass {
        exit::OK
    } else {
        exit::CHECK_FAILED
    }
}

pub fn cmd_study(args: StudyArgs) -> Result<u8, CliError> {
    let resolved = args.options.resolve()?;
    let start = Instant::now();
    let rows = parallel::run_levels(&resolved.study, parallel::worker_count())?;
    let table = ConvergenceTable::from_rows(resolved.study.kind, rows)?;
    let runtime = start.elapsed().as_secs_f64();
    let headline = &table.slopes.headline;
    let pass = headline.fit.at_least(resolved.min_slope);
    let meta = sidecar(&resolved, &table.slopes, resolved.study.seed, runtime, pass);
    match args.format {
        Format::Csv => {
            emit(args.out.as_deref(), &study_csv(&table))?;
            if let Some(out) = &args.out {
                emit(Some(&sidecar_path(out)), &to_json(&meta))?;
            }
        }
        Format::Json => {
            let mut doc = meta;
            doc["rows"] = serde_json::to_value(&table.rows).expect("serializable");
            emit(args.out.as_deref(), &to_json(&doc))?;
        }
    }
    match headline.fit.slope() {
        Some(s) => eprintln!(
            "{} study: {:?} vs {:?} slope {s:.3} (required {:.3})",
            table.kind.name(),
            headline.quantity,
            headline.scale,
            resolved.min_slope
        ),
        None => eprintln!("{} study: exact at every level", table.kind.name()),
    }
    Ok(verdict(pass))
}

pub fn cmd_check(args: CheckArgs) -> Result<u8, CliError> {
    let params =
        StructureParams::with_epsilon(args.p, args.delta, args.epsilon).map_err(|e| CliError::Config(e.to_string()))?;
    if args.samples == 0 {
        return Err(CliError::Config("samples must be positive".into()));
    }
    let config = CheckConfig::default();
    let report = match args.stress {
        StressKind::Canonical => check_structure_seeded::<2, _>(
            |t: &Tensor<2>| params.stress(t),
            &params,
            args.seed,
            args.samples,
            config,
        ),
        StressKind::Cubic => check_structure_seeded::<2, _>(cubic_stress, &params, args.seed, args.samples, config),
    };
    let equivalence = equivalence_probe_seeded::<2>(&params, args.seed, args.samples);
    let pass = report.passed() && report.min_coercivity_ratio > 0.0;
    let doc = serde_json::json!({
        "config": &args,
        "structure": report,
        "equivalence": equivalence,
        "pass": pass,
    });
    emit(None, &to_json(&doc))?;
    Ok(verdict(pass))
}

pub fn cmd_interp(args: InterpArgs) -> Result<u8, CliError> {
    if args.levels < 3 {
        return Err(CliError::Config(format!(
            "levels must be at least 3 (got {})",
            args.levels
        )));
    }
    if args.base_n == 0 || args.levels > 8 {
        return Err(CliError::Config("base_n must be positive and levels at most 8".into()));
    }
    let invalid = || {
        CliError::Config(format!(
            "invalid embedding pair: ell={} q={} r={}",
            args.ell, args.q, args.r
        ))
    };
    if !(args.q >= 1.0 && args.r >= 1.0 && args.q.is_finite() && args.r.is_finite()) {
        return Err(invalid());
    }
    let order = match args.order {
        Some(m) => m,
        None => max_embedding_order(args.ell, args.q, args.r, DIM).ok_or_else(invalid)?,
    };
    let start = Instant::now();
    let spaces: Vec<FeSpace> = (0..args.levels)
        .map(|l| FeSpace::unit_square(args.base_n << l))
        .collect();
    let (field, sharp) = study_field(args.ell, args.q, args.r);
    let study = interpolation_study(args.ell, args.q, args.r, order, &spaces, field.as_ref())
        .map_err(|e| CliError::Config(e.to_string()))?;
    let runtime = start.elapsed().as_secs_f64();
    let pass = match study.table.fit.slope() {
        Some(s) if sharp => (s - study.predicted).abs() <= args.tolerance,
        Some(s) => s >= study.predicted - args.tolerance,
        None => true,
    };
    let slopes = serde_json::json!({
        "fitted": study.table.fit,
        "predicted": study.predicted,
        "order": order,
        "sharp": sharp,
    });
    let meta = sidecar(&args, &slopes, 0, runtime, pass);
    match args.format {
        Format::Csv => {
            emit(args.out.as_deref(), &rate_csv(&study.table))?;
            if let Some(out) = &args.out {
                emit(Some(&sidecar_path(out)), &to_json(&meta))?;
            }
        }
        Format::Json => {
            let mut doc = meta;
            doc["rows"] = serde_json::to_value(&study.table.rows).expect("serializable");
            emit(args.out.as_deref(), &to_json(&doc))?;
        }
    }
    if let Some(s) = study.table.fit.slope() {
        eprintln!("interpolation slope {s:.3}, predicted {:.3}", study.predicted);
    }
    Ok(verdict(pass))
}

pub fn cmd_mesh(args: MeshArgs) -> Result<u8, CliError> {
    if args.n == 0 || args.levels == 0 || args.levels > 8 {
        return Err(CliError::Config("n must be positive and levels in 1..=8".into()));
    }
    let family = refinement_family(&unit_square_mesh(args.n), args.levels);
    let stats: Vec<_> = family
        .iter()
        .enumerate()
        .map(|(level, m)| serde_json::json!({ "level": level, "stats": m.stats() }))
        .collect();
    emit(None, &to_json(&stats))?;
    Ok(exit::OK)
}
