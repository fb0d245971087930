//! Command-line front end. Every setting is a flag; outputs are files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::cascade::{key_point_fixed_point, DyadicSurface, DEFAULT_FIXED_POINT_TOL, DEFAULT_MAX_ITERS, MAX_LEVELS};
use crate::error::{Error, Result};
use crate::mask::{build_mask, discriminant, FreeParameters, Mask, SolutionFamily, DISCRIMINANT_SLACK};
use crate::oracle::solve_all;
use crate::reproduction::{evaluate, max_error, plan, LinearFunctional, ReproductionSummary, TranslateRange, Window};
use crate::verify::{verify, DEFAULT_TOLERANCE};

#[derive(Debug, Parser)]
#[command(name = "bidaub", version, about = "Bivariate Daubechies-type scaling functions with 4x4 masks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a mask from a solution family and free parameters.
    Mask(MaskArgs),
    /// Check a mask against the fourteen defining equations (exit 1 on failure).
    Verify(VerifyArgs),
    /// Sample φ on a dyadic grid.
    Cascade(CascadeArgs),
    /// Reproduce k·x + l·y + m from translates of φ.
    Reproduce(ReproduceArgs),
    /// Map where a family's discriminant is nonnegative.
    Sweep(SweepArgs),
    /// Multistart Newton solve of the quadratic subsystem.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct MaskArgs {
    #[arg(long)]
    pub family: SolutionFamily,
    #[arg(long, allow_hyphen_values = true)]
    pub c32: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub c33: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Include orthogonality residuals for every shift in [-2, 2]².
    #[arg(long)]
    pub all_shifts: bool,
    /// Also write the report here (it is always printed to stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CascadeArgs {
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub levels: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long, allow_hyphen_values = true)]
    pub k: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub l: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub m: f64,
    #[arg(long)]
    pub levels: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub family: SolutionFamily,
    /// Interval `A,B` used for both c32 and c33.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
    pub range: (f64, f64),
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c32: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub c33: f64,
    #[arg(long, default_value_t = 1000)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected A,B but got '{s}'"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("bad range start: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("bad range end: {e}"))?;
    if !(a.is_finite() && b.is_finite() && a <= b) {
        return Err(format!("range must satisfy A <= B, got {a},{b}"));
    }
    Ok((a, b))
}

/// Nonnegative-discriminant map over a square parameter grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityGrid {
    pub family: SolutionFamily,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    /// `cells[a * steps + b]` is the cell at `(c32_a, c33_b)`.
    pub cells: Vec<bool>,
}

impl FeasibilityGrid {
    pub fn coordinate(&self, index: usize) -> f64 {
        if self.steps == 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * index as f64 / (self.steps - 1) as f64
        }
    }

    pub fn feasible_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "c32,c33,feasible")?;
        for a in 0..self.steps {
            for b in 0..self.steps {
                writeln!(
                    w,
                    "{},{},{}",
                    self.coordinate(a),
                    self.coordinate(b),
                    self.cells[a * self.steps + b]
                )?;
            }
        }
        Ok(())
    }
}

pub fn sweep(family: SolutionFamily, min: f64, max: f64, steps: usize) -> Result<FeasibilityGrid> {
    if steps == 0 || !(min <= max) {
        return Err(Error::InvalidArgument(format!(
            "sweep needs steps >= 1 and min <= max (got steps={steps}, range {min},{max})"
        )));
    }
    let mut grid = FeasibilityGrid {
        family,
        min,
        max,
        steps,
        cells: Vec::with_capacity(steps * steps),
    };
    for a in 0..steps {
        for b in 0..steps {
            let params = FreeParameters::new(grid.coordinate(a), grid.coordinate(b));
            grid.cells.push(discriminant(family, params) >= -DISCRIMINANT_SLACK);
        }
    }
    Ok(grid)
}

/// Writes `bytes` next to `path` and renames over it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    path.with_extension(suffix)
}

pub fn read_mask(path: &Path) -> Result<Mask> {
    Mask::from_json(&fs::read_to_string(path)?)
}

fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s.into_bytes())
}

#[derive(Debug, Serialize)]
struct CascadeSidecar {
    level: u32,
    key_points: [f64; 4],
    iterations: usize,
    max_refinement_discrepancy: f64,
    max_boundary_abs: f64,
    partition_of_unity_deviation: f64,
    norm_squared: f64,
}

/// Executes one subcommand and returns the process exit status.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Mask(a) => {
            let mask = build_mask(a.family, FreeParameters::new(a.c32, a.c33))?;
            let mut json = mask.to_json()?;
            json.push('\n');
            write_atomic(&a.out, json.as_bytes())?;
            Ok(0)
        }
        Command::Verify(a) => {
            if !(a.tol > 0.0) {
                return Err(Error::InvalidArgument(format!("--tol must be positive, got {}", a.tol)));
            }
            let mask = read_mask(&a.mask)?;
            let mut report = verify(&mask, a.tol);
            if !a.all_shifts {
                report = report.without_extra_shifts();
            }
            let bytes = to_json_bytes(&report)?;
            std::io::stdout().write_all(&bytes)?;
            if let Some(out) = &a.out {
                write_atomic(out, &bytes)?;
            }
            Ok(if report.passes { 0 } else { 1 })
        }
        Command::Cascade(a) => {
            check_levels(a.levels)?;
            let mask = read_mask(&a.mask)?;
            let fp = key_point_fixed_point(&mask, DEFAULT_MAX_ITERS, DEFAULT_FIXED_POINT_TOL)?;
            let mut surface = DyadicSurface::from_key_points(mask, &fp.key);
            let mut worst_gap = 0.0f64;
            for _ in 0..a.levels {
                let (next, gap) = surface.refine_with_discrepancy();
                worst_gap = worst_gap.max(gap);
                surface = next;
            }
            let mut csv = Vec::new();
            surface.write_csv(&mut csv)?;
            write_atomic(&a.out, &csv)?;
            let side = CascadeSidecar {
                level: surface.level,
                key_points: fp.key.values,
                iterations: fp.iterations,
                max_refinement_discrepancy: worst_gap,
                max_boundary_abs: surface.max_boundary_abs(),
                partition_of_unity_deviation: surface.partition_of_unity_deviation(),
                norm_squared: surface.norm_squared(),
            };
            write_atomic(&sidecar(&a.out, "keypoints.json"), &to_json_bytes(&side)?)?;
            Ok(0)
        }
        Command::Reproduce(a) => {
            check_levels(a.levels)?;
            let mask = read_mask(&a.mask)?;
            let surface = crate::cascade::cascade(&mask, a.levels)?;
            let functional = LinearFunctional::new(a.k, a.l, a.m);
            let p = plan(functional, surface.key_points())?;
            let window = Window::default();
            let recon = evaluate(&p, &surface, TranslateRange::default(), window)?;
            let mut csv = Vec::new();
            recon.write_csv(&mut csv, &functional)?;
            write_atomic(&a.out, &csv)?;
            let summary = ReproductionSummary {
                max_error: max_error(&recon, &functional),
                window,
                level: a.levels,
            };
            write_atomic(&sidecar(&a.out, "summary.json"), &to_json_bytes(&summary)?)?;
            Ok(0)
        }
        Command::Sweep(a) => {
            let grid = sweep(a.family, a.range.0, a.range.1, a.steps)?;
            let mut csv = Vec::new();
            grid.write_csv(&mut csv)?;
            write_atomic(&a.out, &csv)?;
            Ok(0)
        }
        Command::Oracle(a) => {
            if a.starts < 100 {
                return Err(Error::InvalidArgument(format!("--starts must be at least 100, got {}", a.starts)));
            }
            if !(a.c32.is_finite() && a.c33.is_finite()) {
                return Err(Error::InvalidArgument("--c32 and --c33 must be finite".into()));
            }
            let set = solve_all(a.c32, a.c33, a.starts, a.seed);
            let mut json = set.to_json()?;
            json.push('\n');
            write_atomic(&a.out, json.as_bytes())?;
            Ok(0)
        }
    }
}

fn check_levels(levels: u32) -> Result<()> {
    if levels > MAX_LEVELS {
        return Err(Error::InvalidArgument(format!(
            "--levels must be at most {MAX_LEVELS}, got {levels}"
        )));
    }
    Ok(())
}

/// Exit status for an error: 2 for bad arguments, 1 for domain failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}
