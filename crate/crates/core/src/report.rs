//! Batch runner behind the `affen` binary.
//!
//! Every subcommand produces a JSON document and a CSV table. CSV output
//! starts with a `#` comment naming the schema version and the subcommand,
//! then a header row. Exact ratios appear as `num/den` with an advisory
//! `_decimal` column next to them. Rows are emitted in sorted order so
//! that the thread count never changes the bytes written.

use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use serde_json::{json, Value};

use crate::affine::AffineSet;
use crate::bounds::{Exact, Measured};
use crate::energy::{
    c_slice, decompose_by_C, decompose_bruteforce, energy, energy_asym, energy_asym_bruteforce,
    energy_bruteforce, energy_star, main_bound_report, slice_sizes, OracleMode, DEFAULT_ORACLE_CAP,
};
use crate::error::{Error, Result};
use crate::generators::{generate, GenSpec, Generation};
use crate::incidence::{
    beck_plane_classification, incidences, incidences_indexed, point_map_injective, q_c_via_incidence,
    slice_instance, slice_reports, BeckConfig,
};
use crate::plane::{
    beck_point_stats, parse_line, parse_points, quadrangle_energy_correspondence, quadrangles,
    quadrangles_bruteforce, shadow, shadow_incidence_check, PlanePoint,
};
use crate::richlines::{
    elekes_incidence_bound_check, max_concurrent_pencil, max_concurrent_pencil_bruteforce,
    structure_report, GridInstance,
};
use crate::scalar::{Field, FieldSpec, PrimeField, RationalField, Scalar};

/// Version tag written into every report.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Energy,
    Decompose,
    Incidence,
    Shadow,
    Quadrangles,
    Richlines,
    Boundcheck,
    Sweep,
    Oracle,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Energy,
        Command::Decompose,
        Command::Incidence,
        Command::Shadow,
        Command::Quadrangles,
        Command::Richlines,
        Command::Boundcheck,
        Command::Sweep,
        Command::Oracle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Energy => "energy",
            Command::Decompose => "decompose",
            Command::Incidence => "incidence",
            Command::Shadow => "shadow",
            Command::Quadrangles => "quadrangles",
            Command::Richlines => "richlines",
            Command::Boundcheck => "boundcheck",
            Command::Sweep => "sweep",
            Command::Oracle => "oracle",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown subcommand {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Input {
    Gen(String),
    File(PathBuf),
}

/// Inclusive size range substituted for a placeholder in a generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepRange {
    pub var: String,
    pub lo: u64,
    pub hi: u64,
}

impl FromStr for SweepRange {
    type Err = Error;

    /// `N=3..10`
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("range must look like N=3..10, got {s:?}"));
        let (var, span) = s.split_once('=').ok_or_else(bad)?;
        let (lo, hi) = span.split_once("..").ok_or_else(bad)?;
        let (lo, hi): (u64, u64) = (lo.trim().parse().map_err(|_| bad())?, hi.trim().parse().map_err(|_| bad())?);
        let var = var.trim();
        if var != "N" {
            return Err(Error::Config(format!("only the placeholder N is supported, got {var:?}")));
        }
        if lo > hi {
            return Err(bad());
        }
        Ok(SweepRange { var: var.to_string(), lo, hi })
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub field: FieldSpec,
    pub input: Input,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub alpha: BigRational,
    pub cthresh: usize,
    pub theta: BigRational,
    pub cap: usize,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub range: Option<SweepRange>,
    /// Shadow lines as `a:b:c`; default `x = 0` and the line at infinity.
    pub l1: String,
    pub l2: String,
    /// Restricts `incidence` to one slice.
    pub slice: Option<String>,
}

impl RunConfig {
    pub fn new(field: FieldSpec, input: Input) -> Self {
        RunConfig {
            field,
            input,
            format: Format::Csv,
            output: None,
            alpha: BigRational::new(1.into(), 2.into()),
            cthresh: BeckConfig::default().cthresh,
            theta: BigRational::new(1.into(), 4.into()),
            cap: DEFAULT_ORACLE_CAP,
            seed: None,
            threads: None,
            range: None,
            l1: "1:0:0".into(),
            l2: "0:0:1".into(),
            slice: None,
        }
    }

    fn validate(&self, cmd: Command) -> Result<()> {
        self.field.validate()?;
        if self.cap == 0 {
            return Err(Error::Config("oracle cap must be at least 1".into()));
        }
        if self.cthresh < 2 {
            return Err(Error::Config("Cthresh must be at least 2".into()));
        }
        if self.theta <= BigRational::from_integer(0.into()) || self.theta > BigRational::one() {
            return Err(Error::Config("theta must lie in (0, 1]".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("thread count must be at least 1".into()));
        }
        match (cmd, &self.range, &self.input) {
            (Command::Sweep, None, _) => Err(Error::Config("sweep needs --range".into())),
            (Command::Sweep, Some(_), Input::File(_)) => Err(Error::Config("sweep needs a generator".into())),
            (c, Some(_), _) if c != Command::Sweep => Err(Error::Config("--range only applies to sweep".into())),
            _ => Ok(()),
        }
    }

    fn echo(&self, cmd: Command) -> Value {
        json!({
            "command": cmd.name(),
            "field": self.field.to_string(),
            "input": self.input,
            "alpha": Exact(self.alpha.clone()),
            "cthresh": self.cthresh,
            "theta": Exact(self.theta.clone()),
            "cap": self.cap,
            "seed": self.seed,
            "range": self.range,
            "l1": self.l1,
            "l2": self.l2,
            "slice": self.slice,
        })
    }
}

/// Rendered report plus the failure it records, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: String,
    pub failure: Option<Error>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, Error::exit_code)
    }
}

/// A table of string cells plus the structured document.
struct Doc {
    value: Value,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    failure: Option<Error>,
}

impl Doc {
    fn new(value: impl Serialize, columns: Vec<&'static str>) -> Result<Self> {
        Ok(Doc {
            value: serde_json::to_value(value).map_err(|e| Error::Io(e.to_string()))?,
            columns,
            rows: Vec::new(),
            failure: None,
        })
    }

    fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }
}

fn exact_cells(m: &Measured) -> [String; 2] {
    [m.exact.to_string(), format!("{}", m.decimal)]
}

fn render(cmd: Command, cfg: &RunConfig, doc: &Doc) -> Result<String> {
    match cfg.format {
        Format::Json => {
            let out = json!({
                "schema": format!("affen/{}/v{}", cmd.name(), SCHEMA_VERSION),
                "config": cfg.echo(cmd),
                "report": doc.value,
                "status": doc.failure.as_ref().map_or("ok".to_string(), ToString::to_string),
            });
            let mut s = serde_json::to_string_pretty(&out).map_err(|e| Error::Io(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut buf = format!(
                "# affen/{}/v{} field={} input={}\n",
                cmd.name(),
                SCHEMA_VERSION,
                cfg.field,
                match &cfg.input {
                    Input::Gen(g) => format!("gen:{g}"),
                    Input::File(p) => format!("file:{}", p.display()),
                }
            )
            .into_bytes();
            {
                let mut w = csv::Writer::from_writer(&mut buf);
                w.write_record(&doc.columns).map_err(|e| Error::Io(e.to_string()))?;
                for r in &doc.rows {
                    w.write_record(r).map_err(|e| Error::Io(e.to_string()))?;
                }
                w.flush()?;
            }
            String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
        }
    }
}

/// Runs one subcommand, writing the report to `cfg.output` when set.
pub fn run(cmd: Command, cfg: &RunConfig) -> Result<Outcome> {
    cfg.validate(cmd)?;
    let job = || match cfg.field {
        FieldSpec::Prime(p) => run_in(cmd, cfg, PrimeField::new(p)?),
        FieldSpec::Rational => run_in(cmd, cfg, RationalField),
    };
    let doc = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(job)?,
        None => job()?,
    };
    let report = render(cmd, cfg, &doc)?;
    if let Some(path) = &cfg.output {
        fs::write(path, &report)?;
    }
    Ok(Outcome { report, failure: doc.failure })
}

fn gen_text(cfg: &RunConfig, text: &str) -> String {
    match cfg.seed {
        Some(seed) if text.starts_with("rand") && !text.contains("seed") => format!("{text}:seed={seed}"),
        _ => text.to_string(),
    }
}

fn load<F: Field>(cfg: &RunConfig, field: &F) -> Result<Generation<F>> {
    match &cfg.input {
        Input::Gen(text) => {
            let spec: GenSpec = gen_text(cfg, text).parse()?;
            generate(&spec, field, &cfg.alpha)
        }
        Input::File(_) => Err(Error::Config("file input is read per subcommand".into())),
    }
}

fn read(path: &PathBuf) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn load_affine<F: Field>(cfg: &RunConfig, field: &F) -> Result<AffineSet<F>> {
    match &cfg.input {
        Input::File(p) => AffineSet::parse_rows(field.clone(), &read(p)?),
        Input::Gen(_) => load(cfg, field)?.affine(),
    }
}

fn load_points<F: Field>(cfg: &RunConfig, field: &F) -> Result<Vec<PlanePoint<F::Elem>>> {
    match &cfg.input {
        Input::File(p) => parse_points(field, &read(p)?),
        Input::Gen(_) => load(cfg, field)?.planar(),
    }
}

fn load_grid<F: Field>(cfg: &RunConfig, field: &F) -> Result<GridInstance<F>> {
    match &cfg.input {
        Input::File(p) => GridInstance::parse(field.clone(), &read(p)?),
        Input::Gen(_) => load(cfg, field)?.grid(),
    }
}

fn run_in<F: Field>(cmd: Command, cfg: &RunConfig, field: F) -> Result<Doc> {
    match cmd {
        Command::Energy => energy_doc(&load_affine(cfg, &field)?),
        Command::Decompose => decompose_doc(&load_affine(cfg, &field)?),
        Command::Incidence => incidence_doc(cfg, &load_affine(cfg, &field)?),
        Command::Shadow => shadow_doc(cfg, &field, &load_points(cfg, &field)?),
        Command::Quadrangles => quadrangles_doc(cfg, &load_points(cfg, &field)?),
        Command::Richlines => richlines_doc(&load_grid(cfg, &field)?),
        Command::Boundcheck => {
            let a = load_affine(cfg, &field)?;
            let row = bound_row(&a)?;
            let mut doc = Doc::new(&row, BOUND_COLUMNS[1..].to_vec())?;
            doc.row(row.cells()[1..].to_vec());
            Ok(doc)
        }
        Command::Sweep => sweep_doc(cfg, &field),
        Command::Oracle => oracle_doc(cfg, &load_affine(cfg, &field)?),
    }
}

fn energy_doc<F: Field>(a: &AffineSet<F>) -> Result<Doc> {
    let r = main_bound_report(a)?;
    let columns = vec![
        "field", "size", "m", "M", "E", "E_star", "product_size", "quotient_size", "ratio_main",
        "ratio_main_decimal", "ratio_growth", "ratio_growth_decimal", "ratio_collinear",
        "ratio_collinear_decimal", "cs_quotient", "cs_product", "e_star_le_e", "char_constraint",
    ];
    let mut cells = vec![
        r.field.to_string(),
        r.size.to_string(),
        r.m.to_string(),
        r.big_m.to_string(),
        r.energy.to_string(),
        r.energy_star.to_string(),
        r.product_size.to_string(),
        r.quotient_size.to_string(),
    ];
    cells.extend(exact_cells(&r.ratio_main));
    cells.extend(exact_cells(&r.ratio_growth));
    cells.extend(exact_cells(&r.ratio_collinear));
    cells.extend([
        r.cs_quotient.to_string(),
        r.cs_product.to_string(),
        r.e_star_le_e.to_string(),
        r.char_constraint.as_ref().map_or("".into(), |c| c.satisfied.to_string()),
    ]);
    let mut doc = Doc::new(&r, columns)?;
    doc.row(cells);
    if !(r.cs_quotient && r.cs_product && r.e_star_le_e) {
        doc.failure = Some(Error::InvariantViolation("an energy inequality failed".into()));
    }
    Ok(doc)
}

fn decompose_doc<F: Field>(a: &AffineSet<F>) -> Result<Doc> {
    let q = decompose_by_C(a);
    let sizes = slice_sizes(a);
    let e = energy(a);
    let total: u64 = q.values().sum();
    let rows: Vec<_> = sizes
        .iter()
        .map(|(c, s)| json!({"c": c.to_string(), "slice_size": s, "q_c": q.get(c).copied().unwrap_or(0)}))
        .collect();
    let value = json!({"size": a.len(), "energy": e, "sum_q_c": total, "slices": rows});
    let mut doc = Doc::new(value, vec!["c", "slice_size", "q_c"])?;
    for (c, s) in &sizes {
        doc.row(vec![c.to_string(), s.to_string(), q.get(c).copied().unwrap_or(0).to_string()]);
    }
    if total != e {
        doc.failure = Some(Error::InvariantViolation(format!("sum of Q_C = {total} but E = {e}")));
    }
    Ok(doc)
}

fn incidence_doc<F: Field>(cfg: &RunConfig, a: &AffineSet<F>) -> Result<Doc> {
    let q = decompose_by_C(a);
    let mut rows = slice_reports(a)?;
    let mut beck = Value::Null;
    if let Some(text) = &cfg.slice {
        let c = a.field().parse(text)?;
        let key = c.to_string();
        rows.retain(|r| r.c == key);
        let inst = slice_instance(&c_slice(a, &c)?);
        let config = BeckConfig { cthresh: cfg.cthresh, ..Default::default() };
        beck = serde_json::to_value(beck_plane_classification(inst.points(), inst.planes(), config)?)
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    let columns = vec![
        "c", "slice_size", "q_c", "injective", "points", "planes", "swapped", "incidences", "k", "rhs",
        "rhs_decimal", "ratio", "ratio_decimal", "ratio_asymptotic", "ratio_asymptotic_decimal",
        "exceeds_p_squared",
    ];
    let mut doc = Doc::new(json!({"slices": rows, "beck": beck}), columns)?;
    let mut bad = Vec::new();
    for r in &rows {
        let b = &r.bound;
        let mut cells = vec![
            r.c.clone(),
            r.slice_size.to_string(),
            r.q_c.to_string(),
            r.injective.to_string(),
            b.points.to_string(),
            b.planes.to_string(),
            b.swapped.to_string(),
            b.incidences.to_string(),
            b.k.to_string(),
        ];
        cells.extend(exact_cells(&b.rhs));
        cells.extend(exact_cells(&b.ratio));
        match &b.ratio_asymptotic {
            Some(m) => cells.extend(exact_cells(m)),
            None => cells.extend([String::new(), String::new()]),
        }
        cells.push(b.exceeds_p_squared.map_or(String::new(), |x| x.to_string()));
        doc.row(cells);
        let expected = q.iter().find(|(c, _)| c.to_string() == r.c).map(|(_, v)| *v);
        if expected != Some(r.q_c) || !r.injective {
            bad.push(r.c.clone());
        }
    }
    if !bad.is_empty() {
        doc.failure = Some(Error::InvariantViolation(format!("incidence reduction failed at C = {}", bad.join(", "))));
    }
    Ok(doc)
}

fn shadow_doc<F: Field>(cfg: &RunConfig, field: &F, pts: &[PlanePoint<F::Elem>]) -> Result<Doc> {
    let l1 = parse_line(field, &cfg.l1)?;
    let l2 = parse_line(field, &cfg.l2)?;
    let r = shadow_incidence_check(pts, &l1, &l2)?;
    let on_l2: Vec<_> = pts.iter().filter(|p| !l2.contains(p)).cloned().collect();
    let shadow_l2 = if on_l2.len() >= 2 { shadow(&on_l2, &l2)?.len() } else { 0 };
    let beck = beck_point_stats(pts, &cfg.theta)?;
    let columns = vec![
        "points", "removed", "spanned_lines", "slopes", "intercepts", "lhs", "vertical_incidences", "rhs",
        "holds", "shadow_on_l2", "beck_rich_points", "beck_rich_fraction", "beck_rich_fraction_decimal",
    ];
    let value = json!({"check": r, "shadow_on_l2": shadow_l2, "beck": beck});
    let mut doc = Doc::new(value, columns)?;
    let mut cells = vec![
        r.points.to_string(),
        r.removed.to_string(),
        r.spanned_lines.to_string(),
        r.slopes.to_string(),
        r.intercepts.to_string(),
        r.lhs.to_string(),
        r.vertical_incidences.to_string(),
        r.rhs.to_string(),
        r.holds.to_string(),
        shadow_l2.to_string(),
        beck.rich_points.to_string(),
    ];
    cells.extend(exact_cells(&beck.rich_fraction));
    doc.row(cells);
    if !r.holds {
        doc.failure = Some(Error::InvariantViolation(format!("shadow inequality failed: {} > {}", r.lhs, r.rhs)));
    }
    Ok(doc)
}

fn quadrangles_doc<S: Scalar>(cfg: &RunConfig, pts: &[PlanePoint<S>]) -> Result<Doc> {
    let r = quadrangle_energy_correspondence(pts)?;
    let columns = vec![
        "points", "energy", "trivial", "collinear", "nondegenerate", "quadrangles", "energy_not_geometric",
        "geometric_not_energy", "exhaustive",
    ];
    let mut doc = Doc::new(&r, columns)?;
    doc.row(vec![
        r.points.to_string(),
        r.energy.to_string(),
        r.trivial.to_string(),
        r.collinear.to_string(),
        r.nondegenerate.to_string(),
        r.quadrangles.to_string(),
        r.energy_not_geometric.to_string(),
        r.geometric_not_energy.to_string(),
        r.exhaustive.to_string(),
    ]);
    if !r.exhaustive {
        doc.failure = Some(Error::InvariantViolation("quadrangle partition is not exhaustive".into()));
    } else if pts.len() <= cfg.cap && quadrangles_bruteforce(pts, cfg.cap)? != r.quadrangles {
        doc.failure = Some(Error::OracleMismatch("quadrangles".into()));
    }
    Ok(doc)
}

fn richlines_doc<F: Field>(inst: &GridInstance<F>) -> Result<Doc> {
    let r = structure_report(inst)?;
    let columns = vec![
        "field", "n", "alpha", "threshold", "lines", "rejected", "incidences", "rich", "parallel_slope",
        "parallel_size", "parallel_sum_r", "parallel_additive_energy", "parallel_holds", "pencil_center",
        "pencil_size", "pencil_sum_r", "pencil_rich_link", "pencil_holds", "alpha_too_small",
        "alpha_warning", "p_too_small",
    ];
    let mut doc = Doc::new(&r, columns)?;
    let (ps, pc) = (r.parallel.as_ref(), r.pencil.as_ref());
    let opt = |x: Option<String>| x.unwrap_or_default();
    doc.row(vec![
        r.field.to_string(),
        r.n.to_string(),
        r.alpha.to_string(),
        r.threshold.to_string(),
        r.lines.to_string(),
        r.rejected.to_string(),
        r.incidences.to_string(),
        r.rich.to_string(),
        opt(ps.map(|p| p.slope.clone())),
        opt(ps.map(|p| p.family_size.to_string())),
        opt(ps.map(|p| p.sum_r.to_string())),
        opt(ps.map(|p| p.additive_energy.to_string())),
        opt(ps.map(|p| p.holds.to_string())),
        opt(pc.and_then(|p| p.center.clone()).map(|(x, y)| format!("{x} {y}"))),
        opt(pc.map(|p| p.pencil_size.to_string())),
        opt(pc.map(|p| p.sum_r.to_string())),
        opt(pc.map(|p| p.rich_link.to_string())),
        opt(pc.map(|p| p.holds.to_string())),
        r.guards.alpha_too_small.to_string(),
        r.guards.alpha_warning.to_string(),
        opt(r.guards.p_too_small.map(|x| x.to_string())),
    ]);
    let chains_ok = ps.is_none_or(|p| p.holds && p.cs_link && p.mixed_link && p.energy_link)
        && pc.is_none_or(|p| p.holds && p.cs_link && p.mixed_link && p.energy_link);
    if !chains_ok {
        doc.failure = Some(Error::InvariantViolation("a Cauchy-Schwarz chain failed".into()));
    }
    Ok(doc)
}

const BOUND_COLUMNS: [&str; 16] = [
    "N", "size", "m", "M", "E", "E_star", "ratio_main", "ratio_main_decimal", "ratio_collinear",
    "ratio_collinear_decimal", "pointplane_ratio", "pointplane_ratio_decimal", "pointplane_c",
    "grid_side", "grid_ratio", "grid_ratio_decimal",
];

/// One instance's bound ratios, as used by `boundcheck` and `sweep`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub n: Option<u64>,
    pub size: usize,
    pub m: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    pub energy: u64,
    pub energy_star: u64,
    pub ratio_main: Measured,
    pub ratio_collinear: Measured,
    /// Largest point–plane ratio over all slices and the slice attaining it.
    pub pointplane_ratio: Measured,
    pub pointplane_c: String,
    /// Side of the grid `{0..s−1}²` used for the grid incidence bound.
    pub grid_side: usize,
    pub grid_ratio: Measured,
}

impl BoundRow {
    fn cells(&self) -> Vec<String> {
        let mut c = vec![
            self.n.map_or(String::new(), |n| n.to_string()),
            self.size.to_string(),
            self.m.to_string(),
            self.big_m.to_string(),
            self.energy.to_string(),
            self.energy_star.to_string(),
        ];
        c.extend(exact_cells(&self.ratio_main));
        c.extend(exact_cells(&self.ratio_collinear));
        c.extend(exact_cells(&self.pointplane_ratio));
        c.push(self.pointplane_c.clone());
        c.push(self.grid_side.to_string());
        c.extend(exact_cells(&self.grid_ratio));
        c
    }
}

/// Side `max(2, ⌊√|A|⌋)` of the grid used for the grid incidence bound.
pub fn grid_side(size: usize) -> usize {
    size.isqrt().max(2)
}

/// Bound ratios of one set of maps.
pub fn bound_row<F: Field>(a: &AffineSet<F>) -> Result<BoundRow> {
    let r = main_bound_report(a)?;
    let mut best: Option<(Exact, Measured, String)> = None;
    for s in slice_reports(a)? {
        if best.as_ref().is_none_or(|(e, _, _)| s.bound.ratio.exact > *e) {
            best = Some((s.bound.ratio.exact.clone(), s.bound.ratio.clone(), s.c.clone()));
        }
    }
    let (_, pp, c) = best.expect("a nonempty set has a slice");
    let side = grid_side(a.len());
    let st: Vec<_> = (0..side as i64).map(|x| a.field().from_i64(x)).collect();
    let grid = elekes_incidence_bound_check(&st, &st, a)?;
    Ok(BoundRow {
        n: None,
        size: r.size,
        m: r.m,
        big_m: r.big_m,
        energy: r.energy,
        energy_star: r.energy_star,
        ratio_main: r.ratio_main,
        ratio_collinear: r.ratio_collinear,
        pointplane_ratio: pp,
        pointplane_c: c,
        grid_side: side,
        grid_ratio: grid.ratio,
    })
}

fn sweep_doc<F: Field>(cfg: &RunConfig, field: &F) -> Result<Doc> {
    let (Input::Gen(template), Some(range)) = (&cfg.input, &cfg.range) else {
        unreachable!("validated")
    };
    let mut rows = Vec::new();
    for n in range.lo..=range.hi {
        let spec = GenSpec::instantiate(&gen_text(cfg, template), n)?;
        let a = generate(&spec, field, &cfg.alpha)?.affine()?;
        let mut row = bound_row(&a)?;
        row.n = Some(n);
        rows.push(row);
    }
    let mut doc = Doc::new(&rows, BOUND_COLUMNS.to_vec())?;
    for r in &rows {
        doc.row(r.cells());
    }
    Ok(doc)
}

/// One fast-versus-oracle comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleCheck {
    pub check: String,
    pub fast: String,
    pub oracle: String,
    pub equal: bool,
}

fn check(name: &str, fast: impl ToString, oracle: impl ToString) -> OracleCheck {
    let (fast, oracle) = (fast.to_string(), oracle.to_string());
    OracleCheck { check: name.to_string(), equal: fast == oracle, fast, oracle }
}

/// Every fast counter on `A` against its brute-force twin.
pub fn oracle_checks<F: Field>(a: &AffineSet<F>, cap: usize) -> Result<Vec<OracleCheck>> {
    if a.len() > cap {
        return Err(Error::OracleCapExceeded { size: a.len(), cap });
    }
    let half = AffineSet::new(a.field().clone(), a.elems()[..a.len().div_ceil(2)].to_vec());
    let mut out = vec![
        check("energy", energy(a), energy_bruteforce(a, OracleMode::E, cap)?),
        check("energy_star", energy_star(a), energy_bruteforce(a, OracleMode::Estar, cap)?),
        check("energy_asym", energy_asym(a, &half)?, energy_asym_bruteforce(a, &half, cap)?),
    ];
    let q = decompose_by_C(a);
    let fmt = |m: &std::collections::BTreeMap<F::Elem, u64>| {
        m.iter().map(|(c, v)| format!("{c}:{v}")).collect::<Vec<_>>().join(" ")
    };
    out.push(check("decompose_by_c", fmt(&q), fmt(&decompose_bruteforce(a, cap)?)));
    let mut via_incidence = std::collections::BTreeMap::new();
    let (mut injective, mut direct_equal) = (true, true);
    for c in q.keys() {
        via_incidence.insert(c.clone(), q_c_via_incidence(a, c)?);
        let slice = c_slice(a, c)?;
        injective &= point_map_injective(&slice);
        let inst = slice_instance(&slice);
        direct_equal &= incidences(inst.points(), inst.planes()) == incidences_indexed(inst.points(), inst.planes());
    }
    out.push(check("q_c_via_incidence", fmt(&via_incidence), fmt(&q)));
    out.push(check("point_map_injective", injective, true));
    out.push(check("incidences_indexed", direct_equal, true));
    let pts = crate::plane::points_of_set(a);
    out.push(check("quadrangles", quadrangles(&pts)?, quadrangles_bruteforce(&pts, cap)?));
    if a.len() >= 2 {
        let show = |p: crate::richlines::Pencil<F::Elem>| match p.center {
            Some((x, y)) => format!("({x}, {y}) x{}", p.slopes.len()),
            None => format!("none x{}", p.slopes.len()),
        };
        out.push(check(
            "max_concurrent_pencil",
            show(max_concurrent_pencil(a)?),
            show(max_concurrent_pencil_bruteforce(a)?),
        ));
    }
    Ok(out)
}

fn oracle_doc<F: Field>(cfg: &RunConfig, a: &AffineSet<F>) -> Result<Doc> {
    let checks = oracle_checks(a, cfg.cap)?;
    let mut doc = Doc::new(&checks, vec!["check", "fast", "oracle", "equal"])?;
    for c in &checks {
        doc.row(vec![c.check.clone(), c.fast.clone(), c.oracle.clone(), c.equal.to_string()]);
    }
    let failed: Vec<_> = checks.iter().filter(|c| !c.equal).map(|c| c.check.clone()).collect();
    if !failed.is_empty() {
        doc.failure = Some(Error::OracleMismatch(failed.join(", ")));
    }
    Ok(doc)
}

/// `α` and `θ` from text such as `1/2` or `0.25`.
pub fn parse_fraction(text: &str) -> Result<BigRational> {
    if let Some(e) = Exact::parse(text) {
        return Ok(e.0);
    }
    let t = text.trim();
    let (int, frac) = t.split_once('.').ok_or_else(|| Error::Parse(t.to_string()))?;
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().map_err(|_| Error::Parse(t.to_string()))?;
    Ok(BigRational::new(num, BigInt::from(10u32).pow(frac.len() as u32)))
}
