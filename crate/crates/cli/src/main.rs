use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dirq::asymptotics::{asymptotic_cov, monte_carlo_validate};
use dirq::density::DensityModel;
use dirq::depth::{brute_force_depth, extract_adjacent_contours, region_from_sweep, DepthRegion};
use dirq::geometry::Direction;
use dirq::io::{self, ContourRecord, CovarianceRecord, CutRecord, Dataset, FitRecord, Generator, MapRecord};
use dirq::io::{RegressionRecord, SweepRecord, SymmetryRecord};
use dirq::regression::{cut_from_sweep, detect_crossing, fit_regression_with, regression_sweep, RegressionSpec};
use dirq::solver::{jitter, SolveOptions};
use dirq::symmetry::{directional_map, t_from_maps, Discrepancy};
use dirq::{quantile, sweep, Error};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "dirq", version, about = "Directional quantiles, halfspace depth contours and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Directional quantile hyperplane for one direction.
    Quantile(Common),
    /// All quantile hyperplanes and their cones of optimality.
    Sweep(Common),
    /// Quantile (depth) region.
    Contour {
        #[command(flatten)]
        common: Common,
        /// Emit every depth contour recoverable from the sweep.
        #[arg(long)]
        adjacent: bool,
    },
    /// Exact halfspace depth of points.
    Depth {
        #[command(flatten)]
        common: Common,
        /// Point as comma-separated floats; repeatable.
        #[arg(long = "point", required = true)]
        points: Vec<Floats>,
    },
    /// Multiple-output regression quantile.
    Regress {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        columns: Columns,
    },
    /// Cut of the regression quantile tube at fixed regressor values.
    Cut {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        columns: Columns,
        /// Regressor values as comma-separated floats.
        #[arg(long)]
        at: Floats,
    },
    /// Directional scale maps and the symmetry functional.
    Symmetry {
        #[command(flatten)]
        common: Common,
        /// Weights of the tau grid (normalised); uniform when omitted.
        #[arg(long)]
        weights: Option<Floats>,
        /// Polar samples per cone for CSV and SVG output.
        #[arg(long, default_value_t = 16)]
        per_cell: usize,
    },
    /// Population quantile, limiting covariances and an optional Monte Carlo check.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Model::UniformSquare)]
        model: Model,
        /// Sample size per Monte Carlo replicate.
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Monte Carlo replicates; 0 skips the simulation.
        #[arg(long, default_value_t = 0)]
        reps: usize,
    },
    /// Seeded sample from a built-in generator.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// uniform-box, gaussian, cauchy-product, exp-centered, gaussian-mixture, figure5-homo or figure5-hetero.
        #[arg(long)]
        dist: String,
        #[arg(long)]
        n: usize,
        /// Columns; defaults to the generator's fixed width, else 2.
        #[arg(long)]
        k: Option<usize>,
        /// Uniform-box only: emit the 2^k box corners.
        #[arg(long)]
        corners: bool,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// CSV input with a header row.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Quantile level in (0, 1); repeatable.
    #[arg(long = "tau")]
    taus: Vec<f64>,
    /// Direction as comma-separated floats.
    #[arg(long)]
    dir: Option<Floats>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Accept integer n*tau and report the (non-unique) vertex found.
    #[arg(long)]
    allow_degenerate: bool,
    /// Perturb the data by a tiny jitter seeded with --seed.
    #[arg(long)]
    jitter: bool,
}

#[derive(Args, Clone)]
struct Columns {
    /// Response columns (names or zero-based positions), comma-separated.
    #[arg(long)]
    responses: String,
    /// Regressor columns, comma-separated; may be empty.
    #[arg(long, default_value = "")]
    regressors: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    UniformSquare,
    Gaussian,
}

#[derive(Clone, Debug)]
struct Floats(Vec<f64>);

impl FromStr for Floats {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("'{p}' is not a number")))
            .collect::<Result<Vec<_>, _>>()
            .and_then(|v| if v.iter().all(|x| x.is_finite()) { Ok(Floats(v)) } else { Err("values must be finite".into()) })
    }
}

/// Exit status: 2 usage, 3 numeric or degeneracy, 4 input/output.
enum Failure {
    Usage(String),
    Numeric(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Io(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Numeric(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        if e.is_io() {
            Failure::Io(msg)
        } else if matches!(
            e,
            Error::InvalidInput(_) | Error::ZeroDirection | Error::DimensionMismatch { .. } | Error::InvalidTau(_)
        ) {
            Failure::Usage(msg)
        } else {
            Failure::Numeric(msg)
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

impl Common {
    fn dataset(&self) -> Outcome<Dataset> {
        let Some(path) = &self.data else {
            return usage("--data is required");
        };
        let mut d = io::load_csv(path).map_err(|e| match Failure::from(e) {
            Failure::Io(m) => Failure::Io(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if self.jitter {
            d.values = jitter(&d.values, self.seed);
        }
        Ok(d)
    }

    fn taus(&self) -> Outcome<&[f64]> {
        if self.taus.is_empty() {
            return usage("at least one --tau is required");
        }
        Ok(&self.taus)
    }

    fn direction(&self) -> Outcome<Direction> {
        match &self.dir {
            Some(d) => Ok(Direction::from_slice(&d.0)?),
            None => usage("--dir is required"),
        }
    }

    fn solve_options(&self) -> SolveOptions {
        SolveOptions { allow_degenerate: self.allow_degenerate, ..Default::default() }
    }

    fn format(&self, default: Format, allowed: &[Format]) -> Outcome<Format> {
        let f = self.format.unwrap_or(default);
        if !allowed.contains(&f) {
            return usage("this command does not support the requested --format");
        }
        Ok(f)
    }

    fn emit(&self, text: &str) -> Outcome<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", p.display()))),
            None => {
                use std::io::Write;
                match std::io::stdout().lock().write_all(text.as_bytes()) {
                    // A closed reader (e.g. `| head`) is not an error.
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                        Err(Failure::Io(format!("cannot write to standard output: {e}")))
                    }
                    _ => Ok(()),
                }
            }
        }
    }
}

fn json<T: Serialize>(value: &T) -> Outcome<String> {
    Ok(io::to_json(value)? + "\n")
}

fn strs(values: impl IntoIterator<Item = f64>) -> Vec<String> {
    values.into_iter().map(|v| v.to_string()).collect()
}

fn numbered(prefix: &str, k: usize) -> Vec<String> {
    (1..=k).map(|j| format!("{prefix}{j}")).collect()
}

/// One CSV line from groups of fields.
fn line<const N: usize>(groups: [Vec<String>; N]) -> String {
    groups.concat().join(",") + "\n"
}

fn one(v: impl ToString) -> Vec<String> {
    vec![v.to_string()]
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(command: Command) -> Outcome<()> {
    match command {
        Command::Quantile(c) => cmd_quantile(&c),
        Command::Sweep(c) => cmd_sweep(&c),
        Command::Contour { common, adjacent } => cmd_contour(&common, adjacent),
        Command::Depth { common, points } => cmd_depth(&common, &points),
        Command::Regress { common, columns } => cmd_regress(&common, &columns),
        Command::Cut { common, columns, at } => cmd_cut(&common, &columns, &at),
        Command::Symmetry { common, weights, per_cell } => cmd_symmetry(&common, weights.as_ref(), per_cell),
        Command::Validate { common, model, n, reps } => cmd_validate(&common, model, n, reps),
        Command::Simulate { common, dist, n, k, corners } => cmd_simulate(&common, &dist, n, k, corners),
    }
}

fn cmd_quantile(c: &Common) -> Outcome<()> {
    let format = c.format(Format::Json, &[Format::Json, Format::Csv])?;
    let d = c.dataset()?;
    let u = c.direction()?;
    let fits = c
        .taus()?
        .iter()
        .map(|&t| quantile::fit_with(&d.values, t, &u, &c.solve_options()).map(|s| FitRecord::from(&s)))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match format {
        Format::Json => json(&fits)?,
        _ => {
            let k = d.k();
            let mut s = line([one("tau"), one("a"), one("lambda"), numbered("c", k), numbered("b", k - 1)]);
            for f in &fits {
                s += &line([one(f.tau), one(f.a), one(f.lambda), strs(f.c.clone()), strs(f.b.clone())]);
            }
            s
        }
    };
    c.emit(&text)
}

fn cmd_sweep(c: &Common) -> Outcome<()> {
    let format = c.format(Format::Json, &[Format::Json, Format::Csv])?;
    let d = c.dataset()?;
    let sweeps = c.taus()?.iter().map(|&t| sweep::sweep(&d.values, t)).collect::<Result<Vec<_>, _>>()?;
    let text = match format {
        Format::Json => json(&sweeps.iter().map(SweepRecord::from).collect::<Vec<_>>())?,
        _ => {
            let mut s = line([one("tau"), one("cut_off"), one("offset"), numbered("normal", d.k())]);
            for sw in &sweeps {
                for h in &sw.hyperplanes {
                    s += &line([one(sw.tau), one(h.cut_off), one(h.offset), strs(h.normal.iter().copied())]);
                }
            }
            s
        }
    };
    c.emit(&text)
}

fn cmd_contour(c: &Common, adjacent: bool) -> Outcome<()> {
    let format = c.format(Format::Json, &[Format::Json, Format::Csv, Format::Svg])?;
    let d = c.dataset()?;
    let mut regions: Vec<DepthRegion> = Vec::new();
    for &t in c.taus()? {
        let s = sweep::sweep(&d.values, t)?;
        if adjacent {
            regions.extend(extract_adjacent_contours(&s, &d.values)?);
        } else {
            regions.push(region_from_sweep(&s, d.k())?);
        }
    }
    let text = match format {
        Format::Json => json(&regions.iter().map(ContourRecord::from_region).collect::<Vec<_>>())?,
        Format::Csv => {
            let mut s = line([one("tau"), one("level"), one("vertex"), numbered("x", d.k())]);
            for r in &regions {
                let tau = r.tau.map_or(String::new(), |t| t.to_string());
                let level = r.level.map_or(String::new(), |l| l.to_string());
                for (i, v) in r.polytope.vertices.iter().enumerate() {
                    s += &line([one(&tau), one(&level), one(i), strs(v.iter().copied())]);
                }
            }
            s
        }
        Format::Svg => io::contour_svg(&d.values, &regions.iter().map(|r| &r.polytope).collect::<Vec<_>>())?,
    };
    c.emit(&text)
}

#[derive(Serialize)]
struct DepthRecord {
    point: Vec<f64>,
    depth: f64,
}

fn cmd_depth(c: &Common, points: &[Floats]) -> Outcome<()> {
    let format = c.format(Format::Json, &[Format::Json, Format::Csv])?;
    let d = c.dataset()?;
    let mut out = Vec::new();
    for p in points {
        if p.0.len() != d.k() {
            return usage(format!("point has {} coordinates, data have {}", p.0.len(), d.k()));
        }
        let depth = brute_force_depth(&DVector::from_column_slice(&p.0), &d.values)?;
        out.push(DepthRecord { point: p.0.clone(), depth });
    }
    let text = match format {
        Format::Json => json(&out)?,
        _ => {
            let mut s = line([numbered("x", d.k()), one("depth")]);
            for r in &out {
                s += &line([strs(r.point.clone()), one(r.depth)]);
            }
            s
        }
    };
    c.emit(&text)
}

fn column_list(d: &Dataset, list: &str) -> Outcome<Vec<usize>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|key| d.column_index(key).map_err(Failure::from))
        .collect()
}

fn regression_spec(d: &Dataset, cols: &Columns) -> Outcome<RegressionSpec> {
    Ok(RegressionSpec::new(column_list(d, &cols.responses)?, column_list(d, &cols.regressors)?)?)
}

fn cmd_regress(c: &Common, cols: &Columns) -> Outcome<()> {
    let format = c.format(Format::Json, &[Format::Json, Format::Csv])?;
    let d = c.dataset()?;
    let spec = regression_spec(&d, cols)?;
    let u = c.direction()?;
    let fits = c
        .taus()?
        .iter()
        .map(|&t| fit_regression_with(&d.values, &spec, t, &u, &c.solve_options()).map(|f| RegressionRecord::from(&f)))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match format {
        Format::Json => json(&fits)?,
        _ => {
            let mut s = line([one("tau"), one("a"), one("lambda"), numbered("bw", spec.q()), numbered("by", spec.m() - 1)]);
            for f in &fits {
                s += &line([one(f.tau), one(f.a), one(f.lambda), strs(f.b_w.clone()), strs(f.b_y.clone())]);
            }
            s
        }
    };
    c.emit(&text)
}

#[derive(Serialize)]
struct CutOutput {
    cuts: Vec<CutRecord>,
    /// `(tau_high, tau_low)` pairs whose cuts fail to nest.
    crossings: Vec<(f64, f64)>,
}

fn cmd_cut(c: &Common, cols: &Columns, at: &Floats) -> Outcome<()> {
    let format = c.format(Format::Json, &[Format::Json, Format::Csv, Format::Svg])?;
    let d = c.dataset()?;
    let spec = regression_spec(&d, cols)?;
    let w = DVector::from_column_slice(&at.0);
    let mut cuts = Vec::new();
    for &t in c.taus()? {
        let s = regression_sweep(&d.values, &spec, t)?;
        cuts.push(cut_from_sweep(&s, spec.q(), &w)?);
    }
    let crossings = if cuts.len() > 1 { detect_crossing(&cuts)?.crossings } else { Vec::new() };
    let text = match format {
        Format::Json => json(&CutOutput { cuts: cuts.iter().map(CutRecord::from).collect(), crossings })?,
        Format::Csv => {
            let mut s = line([one("tau"), one("vertex"), numbered("y", spec.m())]);
            for cut in &cuts {
                for (i, v) in cut.polytope.vertices.iter().enumerate() {
                    s += &line([one(cut.tau), one(i), strs(v.iter().copied())]);
                }
            }
            s
        }
        Format::Svg => {
            let responses = DMatrix::from_fn(d.n(), spec.m(), |i, j| d.values[(i, spec.responses[j])]);
            io::contour_svg(&responses, &cuts.iter().map(|c| &c.polytope).collect::<Vec<_>>())?
        }
    };
    c.emit(&text)
}

fn cmd_symmetry(c: &Common, weights: Option<&Floats>, per_cell: usize) -> Outcome<()> {
    let format = c.format(Format::Json, &[Format::Json, Format::Csv, Format::Svg])?;
    let d = c.dataset()?;
    let taus = c.taus()?;
    let maps = taus.iter().map(|&t| directional_map(&d.values, t)).collect::<Result<Vec<_>, _>>()?;
    let text = match format {
        Format::Json => {
            let w = weights.map(|w| w.0.as_slice());
            let t = t_from_maps(&maps, w, Discrepancy::Squared)?;
            let total = w.map_or(taus.len() as f64, |w| w.iter().sum());
            let record = SymmetryRecord {
                taus: taus.to_vec(),
                weights: w.map_or(vec![1.0 / total; taus.len()], |w| w.iter().map(|x| x / total).collect()),
                t,
                maps: maps.iter().map(MapRecord::from).collect(),
            };
            json(&record)?
        }
        _ => {
            let series = maps
                .iter()
                .map(|m| m.polar_samples(per_cell).map(|s| (m.tau, s)))
                .collect::<Result<Vec<_>, _>>()?;
            if format == Format::Csv {
                let mut buf = Vec::new();
                io::write_polar_csv(&mut buf, &series)?;
                String::from_utf8(buf).expect("csv output is UTF-8")
            } else {
                io::polar_svg(&series)
            }
        }
    };
    c.emit(&text)
}

fn cmd_validate(c: &Common, model: Model, n: usize, reps: usize) -> Outcome<()> {
    c.format(Format::Json, &[Format::Json])?;
    let model = match model {
        Model::UniformSquare => DensityModel::uniform_square(),
        Model::Gaussian => DensityModel::Gaussian { k: 2, sigma: 1.0 },
    };
    let u = c.direction()?;
    let mut records = Vec::new();
    for &t in c.taus()? {
        let cov = asymptotic_cov(&model, t, &u)?;
        let mc = if reps > 0 { Some(monte_carlo_validate(&model, &cov, n, reps, c.seed)?) } else { None };
        records.push(CovarianceRecord::new(&cov, mc));
    }
    c.emit(&json(&records)?)
}

fn cmd_simulate(c: &Common, dist: &str, n: usize, k: Option<usize>, corners: bool) -> Outcome<()> {
    let format = c.format(Format::Csv, &[Format::Json, Format::Csv])?;
    let gen: Generator = dist.parse()?;
    let k = k.or(gen.fixed_dim()).unwrap_or(2);
    let d = io::simulate_with(gen, n, k, c.seed, corners)?;
    let text = match format {
        Format::Json => json(&d)?,
        _ => {
            let mut buf = Vec::new();
            io::write_csv(&mut buf, &d)?;
            String::from_utf8(buf).expect("csv output is UTF-8")
        }
    };
    c.emit(&text)
}
