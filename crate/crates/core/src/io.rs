//! Datasets, seeded sample generators, and serialisable records of fits,
//! sweeps, regions and diagnostics, with CSV, JSON and SVG writers.
//!
//! Floats are written in shortest round-trip decimal form, so a write
//! followed by a read reproduces every value bit for bit.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::asymptotics::{AsymptoticCov, ValidationReport};
use crate::density::{DensityModel, MixtureComponent};
use crate::depth::DepthRegion;
use crate::error::{Error, Result};
use crate::geometry::Polytope;
use crate::regression::{simulate_two_response, RegressionFit, RegressionTubeCut};
use crate::solver::Solution;
use crate::sweep::SweepResult;
use crate::symmetry::{DirectionalMap, PolarSample};

/// A rectangular sample with finite values, one observation per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DatasetRecord", into = "DatasetRecord")]
pub struct Dataset {
    pub names: Vec<String>,
    pub values: DMatrix<f64>,
    /// Where the data came from.
    pub note: String,
}

#[derive(Serialize, Deserialize)]
struct DatasetRecord {
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
    note: String,
}

impl From<Dataset> for DatasetRecord {
    fn from(d: Dataset) -> Self {
        DatasetRecord { rows: rows_of(&d.values), names: d.names, note: d.note }
    }
}

impl TryFrom<DatasetRecord> for Dataset {
    type Error = Error;

    fn try_from(r: DatasetRecord) -> Result<Self> {
        let k = r.names.len();
        if let Some(i) = r.rows.iter().position(|row| row.len() != k) {
            return Err(Error::Parse { row: i + 1, msg: format!("expected {k} values, found {}", r.rows[i].len()) });
        }
        let values = DMatrix::from_fn(r.rows.len(), k, |i, j| r.rows[i][j]);
        Dataset::new(r.names, values, r.note)
    }
}

impl Dataset {
    pub fn new(names: Vec<String>, values: DMatrix<f64>, note: impl Into<String>) -> Result<Self> {
        if names.len() != values.ncols() {
            return Err(Error::DimensionMismatch { expected: values.ncols(), found: names.len() });
        }
        if values.nrows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if let Some(pos) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::Parse { row: pos % values.nrows() + 1, msg: "non-finite value".into() });
        }
        Ok(Dataset { names, values, note: note.into() })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn k(&self) -> usize {
        self.values.ncols()
    }

    /// Column by name, or by zero-based position when `key` is an integer.
    pub fn column_index(&self, key: &str) -> Result<usize> {
        if let Some(i) = self.names.iter().position(|n| n == key) {
            return Ok(i);
        }
        match key.parse::<usize>() {
            Ok(i) if i < self.k() => Ok(i),
            _ => Err(Error::InvalidInput(format!("no column '{key}' (columns: {})", self.names.join(", ")))),
        }
    }
}

/// Rows of a matrix as nested vectors.
pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_csv(file, format!("loaded from {}", path.display()))
}

/// Parses a headed numeric CSV. Reported row numbers are file lines, so the
/// header is row 1.
pub fn read_csv(reader: impl Read, note: impl Into<String>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let names: Vec<String> = rdr.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(Error::EmptyDataset);
    }
    let k = names.len();
    let mut flat = Vec::new();
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(csv_error)?;
        let row = rec.position().map_or(n + 2, |p| p.line() as usize);
        for (j, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| Error::Parse { row, msg: format!("non-numeric value '{cell}' in column '{}'", names[j]) })?;
            if !v.is_finite() {
                return Err(Error::Parse { row, msg: format!("non-finite value '{cell}' in column '{}'", names[j]) });
            }
            flat.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(names, DMatrix::from_row_slice(n, k, &flat), note)
}

fn csv_error(e: csv::Error) -> Error {
    let row = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        csv::ErrorKind::UnequalLengths { expected_len, len, pos } => Error::Parse {
            row: pos.map_or(row, |p| p.line() as usize),
            msg: format!("expected {expected_len} fields, found {len}"),
        },
        other => Error::Parse { row, msg: format!("{other:?}") },
    }
}

pub fn write_csv(writer: impl Write, data: &Dataset) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&data.names).map_err(csv_error)?;
    for row in data.values.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string())).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    write_csv(File::create(path)?, data)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::InvalidInput(format!("json encoding failed: {e}")))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    f.write_all(to_json(value)?.as_bytes())?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse { row: e.line(), msg: e.to_string() })
}

/// Seeded sample generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Generator {
    /// Uniform on `[-0.5, 0.5]^k`.
    UniformBox,
    /// Standard normal marginals.
    Gaussian,
    /// Independent standard Cauchy marginals.
    CauchyProduct,
    /// Independent `Exp(1) - 1` marginals.
    ExpCentered,
    /// `0.7 N(0, I) + 0.3 N(2.5 * 1, 0.25 I)`.
    GaussianMixture,
    /// Columns `(x, y1, y2)`: `x ~ U(0, 4)`, `y = (x, x) + (e1, 3 e2)`.
    TwoResponseHomo,
    /// As [`Generator::TwoResponseHomo`] with errors scaled by `sqrt(x)`.
    TwoResponseHetero,
}

impl Generator {
    pub const ALL: [Generator; 7] = [
        Generator::UniformBox,
        Generator::Gaussian,
        Generator::CauchyProduct,
        Generator::ExpCentered,
        Generator::GaussianMixture,
        Generator::TwoResponseHomo,
        Generator::TwoResponseHetero,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Generator::UniformBox => "uniform-box",
            Generator::Gaussian => "gaussian",
            Generator::CauchyProduct => "cauchy-product",
            Generator::ExpCentered => "exp-centered",
            Generator::GaussianMixture => "gaussian-mixture",
            Generator::TwoResponseHomo => "figure5-homo",
            Generator::TwoResponseHetero => "figure5-hetero",
        }
    }

    /// Fixed column count, if the generator has one.
    pub fn fixed_dim(&self) -> Option<usize> {
        matches!(self, Generator::TwoResponseHomo | Generator::TwoResponseHetero).then_some(3)
    }
}

impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Generator::ALL.into_iter().find(|g| g.name() == s).ok_or_else(|| {
            let names: Vec<_> = Generator::ALL.iter().map(|g| g.name()).collect();
            Error::InvalidInput(format!("unknown distribution '{s}' (expected one of {})", names.join(", ")))
        })
    }
}

/// Vertices of `[-0.5, 0.5]^k` in Gray-code order; `k = 2` gives the
/// counter-clockwise square starting at `(-0.5, -0.5)`.
pub fn box_corners(k: usize) -> DMatrix<f64> {
    let n = 1usize << k;
    DMatrix::from_fn(n, k, |i, j| if ((i ^ (i >> 1)) >> j) & 1 == 1 { 0.5 } else { -0.5 })
}

pub fn simulate(gen: Generator, n: usize, k: usize, seed: u64) -> Result<Dataset> {
    simulate_with(gen, n, k, seed, false)
}

/// With `corners`, the uniform-box generator returns the `2^k` box vertices
/// (and requires `n = 2^k`).
pub fn simulate_with(gen: Generator, n: usize, k: usize, seed: u64, corners: bool) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    if let Some(d) = gen.fixed_dim() {
        if k != d {
            return Err(Error::InvalidInput(format!("{} produces {d} columns, k = {k} requested", gen.name())));
        }
    }
    let note = format!("simulated {} n={n} k={k} seed={seed}{}", gen.name(), if corners { " corners" } else { "" });
    let names = || (1..=k).map(|j| format!("z{j}")).collect::<Vec<_>>();
    if corners {
        if gen != Generator::UniformBox || k >= usize::BITS as usize || n != 1 << k {
            return Err(Error::InvalidInput("corner mode needs uniform-box with n = 2^k".into()));
        }
        return Dataset::new(names(), box_corners(k), note);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = match gen {
        Generator::UniformBox => DensityModel::UniformBox { k, half_width: 0.5 }.sample(n, &mut rng),
        Generator::Gaussian => DensityModel::Gaussian { k, sigma: 1.0 }.sample(n, &mut rng),
        Generator::ExpCentered => DensityModel::CenteredExponential { k }.sample(n, &mut rng),
        Generator::GaussianMixture => DensityModel::GaussianMixture {
            k,
            components: vec![
                MixtureComponent { weight: 0.7, mean: 0.0, var: 1.0 },
                MixtureComponent { weight: 0.3, mean: 2.5, var: 0.25 },
            ],
        }
        .sample(n, &mut rng),
        Generator::CauchyProduct => {
            let c = Cauchy::new(0.0, 1.0).expect("valid Cauchy scale");
            DMatrix::from_fn(n, k, |_, _| c.sample(&mut rng))
        }
        Generator::TwoResponseHomo | Generator::TwoResponseHetero => {
            let values = simulate_two_response(n, gen == Generator::TwoResponseHetero, &mut rng);
            return Dataset::new(vec!["x".into(), "y1".into(), "y2".into()], values, note);
        }
    };
    Dataset::new(names(), values, note)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub tau: f64,
    pub u: Vec<f64>,
    pub a: f64,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub lambda: f64,
    pub mu: Vec<f64>,
    pub basis: Vec<usize>,
    pub nonunique: bool,
}

impl From<&Solution> for FitRecord {
    fn from(s: &Solution) -> Self {
        FitRecord {
            tau: s.tau,
            u: s.u.as_slice().to_vec(),
            a: s.a,
            b: s.b.as_slice().to_vec(),
            c: s.c.as_slice().to_vec(),
            lambda: s.lambda,
            mu: s.mu.as_slice().to_vec(),
            basis: s.basis.clone(),
            nonunique: s.nonunique,
        }
    }
}

/// A facet `{z : c'z = a}` of a region lying in `{c'z >= a}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetRecord {
    pub c: Vec<f64>,
    pub a: f64,
    /// Observations strictly below the facet hyperplane, when known.
    pub n_below: Option<usize>,
    /// Indices into the vertex list.
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourRecord {
    pub tau: Option<f64>,
    pub level: Option<usize>,
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<FacetRecord>,
    pub degenerate: bool,
    pub empty: bool,
    pub unbounded: bool,
    pub verified: Option<bool>,
}

impl ContourRecord {
    /// `counts[i]` is the number of observations cut off by input halfspace `i`.
    pub fn from_polytope(tau: Option<f64>, level: Option<usize>, p: &Polytope, counts: Option<&[usize]>) -> Self {
        ContourRecord {
            tau,
            level,
            vertices: p.vertices.iter().map(|v| v.as_slice().to_vec()).collect(),
            facets: p
                .facets
                .iter()
                .map(|f| FacetRecord {
                    c: f.normal.as_slice().to_vec(),
                    a: f.offset,
                    n_below: counts.and_then(|c| c.get(f.source).copied()),
                    vertices: f.vertices.clone(),
                })
                .collect(),
            degenerate: p.degenerate,
            empty: p.empty,
            unbounded: p.unbounded,
            verified: None,
        }
    }

    pub fn from_region(r: &DepthRegion) -> Self {
        let counts: Vec<usize> = r.halfspaces.iter().map(|(_, c)| *c).collect();
        ContourRecord { verified: r.verified, ..Self::from_polytope(r.tau, r.level, &r.polytope, Some(&counts)) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeRecord {
    pub basis: Vec<usize>,
    pub normal: Vec<f64>,
    pub offset: f64,
    pub loss: f64,
    pub cut_off: usize,
    pub rays: Vec<Vec<f64>>,
    pub measure: Option<f64>,
    pub neighbors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneRecord {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub cut_off: usize,
    pub basis: Vec<usize>,
    pub cones: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub tau: f64,
    pub n: usize,
    pub direction_dim: usize,
    pub total_measure: Option<f64>,
    pub cones: Vec<ConeRecord>,
    pub hyperplanes: Vec<HyperplaneRecord>,
}

impl From<&SweepResult> for SweepRecord {
    fn from(s: &SweepResult) -> Self {
        let v = |x: &DVector<f64>| x.as_slice().to_vec();
        SweepRecord {
            tau: s.tau,
            n: s.n,
            direction_dim: s.direction_dim(),
            total_measure: s.total_measure(),
            cones: s
                .cones
                .iter()
                .map(|c| ConeRecord {
                    basis: c.basis.clone(),
                    normal: v(&c.normal),
                    offset: c.offset,
                    loss: c.loss,
                    cut_off: c.cut_off,
                    rays: c.rays.iter().map(v).collect(),
                    measure: c.measure,
                    neighbors: c.neighbors.clone(),
                })
                .collect(),
            hyperplanes: s
                .hyperplanes
                .iter()
                .map(|h| HyperplaneRecord {
                    normal: v(&h.normal),
                    offset: h.offset,
                    cut_off: h.cut_off,
                    basis: h.basis.clone(),
                    cones: h.cones.clone(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionRecord {
    pub tau: f64,
    pub u_y: Vec<f64>,
    pub a: f64,
    pub b_w: Vec<f64>,
    pub b_y: Vec<f64>,
    pub lambda: f64,
    pub basis: Vec<usize>,
}

impl From<&RegressionFit> for RegressionRecord {
    fn from(f: &RegressionFit) -> Self {
        RegressionRecord {
            tau: f.tau,
            u_y: f.u_y.as_slice().to_vec(),
            a: f.a,
            b_w: f.b_w.as_slice().to_vec(),
            b_y: f.b_y.as_slice().to_vec(),
            lambda: f.solution.lambda,
            basis: f.solution.basis.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutRecord {
    pub w: Vec<f64>,
    pub region: ContourRecord,
}

impl From<&RegressionTubeCut> for CutRecord {
    fn from(c: &RegressionTubeCut) -> Self {
        CutRecord { w: c.w.as_slice().to_vec(), region: ContourRecord::from_polytope(Some(c.tau), None, &c.polytope, None) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub cone: Option<usize>,
    pub measure: f64,
    pub lambda_center: f64,
    pub cnorm_center: f64,
    pub lambda_max: f64,
    pub cnorm_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapRecord {
    pub tau: f64,
    pub lambda_sup: f64,
    pub c_sup: f64,
    pub cells: Vec<CellRecord>,
}

impl From<&DirectionalMap> for MapRecord {
    fn from(m: &DirectionalMap) -> Self {
        MapRecord {
            tau: m.tau,
            lambda_sup: m.lambda_sup,
            c_sup: m.c_sup,
            cells: m
                .entries
                .iter()
                .map(|e| CellRecord {
                    cone: e.cone,
                    measure: e.cell.measure(),
                    lambda_center: e.lambda_center,
                    cnorm_center: e.cnorm_center,
                    lambda_max: e.lambda_max,
                    cnorm_max: e.cnorm_max,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryRecord {
    pub taus: Vec<f64>,
    pub weights: Vec<f64>,
    pub t: f64,
    pub maps: Vec<MapRecord>,
}

/// Population quantities and limiting covariances.
#[derive(Debug, Clone, Serialize)]
pub struct CovarianceRecord {
    pub tau: f64,
    pub u: Vec<f64>,
    pub a: f64,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub lambda: f64,
    pub lambda_var: f64,
    pub hessian: Vec<Vec<f64>>,
    pub score_cov: Vec<Vec<f64>>,
    pub sandwich_ab: Vec<Vec<f64>>,
    pub sandwich_ac: Vec<Vec<f64>>,
    pub order_delta: f64,
    pub monte_carlo: Option<ValidationReport>,
}

impl CovarianceRecord {
    pub fn new(cov: &AsymptoticCov, monte_carlo: Option<ValidationReport>) -> Self {
        CovarianceRecord {
            tau: cov.fit.tau,
            u: cov.fit.u.as_slice().to_vec(),
            a: cov.fit.a,
            b: cov.fit.b.as_slice().to_vec(),
            c: cov.fit.c.as_slice().to_vec(),
            lambda: cov.lambda,
            lambda_var: cov.lambda_var,
            hessian: rows_of(&cov.h),
            score_cov: rows_of(&cov.v),
            sandwich_ab: rows_of(&cov.sandwich_ab),
            sandwich_ac: rows_of(&cov.sandwich_ac),
            order_delta: cov.order_delta,
            monte_carlo,
        }
    }
}

/// Polar samples as CSV rows `tau,angle,lambda,cnorm`.
pub fn write_polar_csv(writer: impl Write, series: &[(f64, Vec<PolarSample>)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["tau", "angle", "lambda", "cnorm"]).map_err(csv_error)?;
    for (tau, samples) in series {
        for s in samples {
            w.write_record([tau, &s.angle, &s.lambda, &s.cnorm].map(|v| v.to_string())).map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const CANVAS: f64 = 600.0;
const MARGIN: f64 = 30.0;

/// Planar scatter of `points` with polygon outlines of the `regions`.
pub fn contour_svg(points: &DMatrix<f64>, regions: &[&Polytope]) -> Result<String> {
    if points.ncols() != 2 || regions.iter().any(|r| r.dim != 2) {
        return Err(Error::InvalidInput("SVG output needs planar data".into()));
    }
    let mut xs: Vec<[f64; 2]> = points.row_iter().map(|r| [r[0], r[1]]).collect();
    xs.extend(regions.iter().flat_map(|r| r.vertices.iter().map(|v| [v[0], v[1]])));
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in &xs {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let scale = (CANVAS - 2.0 * MARGIN) / span;
    let map = |x: f64, y: f64| (MARGIN + (x - lo[0]) * scale, CANVAS - MARGIN - (y - lo[1]) * scale);
    let mut s = svg_header();
    for r in points.row_iter() {
        let (x, y) = map(r[0], r[1]);
        let _ = writeln!(s, r##"<circle cx="{x:.3}" cy="{y:.3}" r="2" fill="#444"/>"##);
    }
    for (i, r) in regions.iter().enumerate() {
        if r.empty || r.unbounded {
            continue;
        }
        let pts: Vec<String> = r
            .vertices
            .iter()
            .map(|v| {
                let (x, y) = map(v[0], v[1]);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let color = PALETTE[i % PALETTE.len()];
        let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.join(" "));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Polar plot of normalised maps: solid for lambda, dashed for `|c|`, with
/// the unit circle for reference.
pub fn polar_svg(series: &[(f64, Vec<PolarSample>)]) -> String {
    let c = CANVAS / 2.0;
    let radius = c - MARGIN;
    let mut s = svg_header();
    let _ = writeln!(s, r##"<circle cx="{c}" cy="{c}" r="{radius}" fill="none" stroke="#bbb"/>"##);
    for (i, (_, samples)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for (pick, dash) in [(0, ""), (1, r#" stroke-dasharray="4 3""#)] {
            let pts: Vec<String> = samples
                .iter()
                .map(|p| {
                    let r = radius * if pick == 0 { p.lambda } else { p.cnorm };
                    format!("{:.3},{:.3}", c + r * p.angle.cos(), c - r * p.angle.sin())
                })
                .collect();
            let _ = writeln!(s, r#"<polygon points="{}" fill="none" stroke="{color}"{dash}/>"#, pts.join(" "));
        }
    }
    s.push_str("</svg>\n");
    s
}

fn svg_header() -> String {
    format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#) + "\n"
}
