//! Test configurations, named by short spec strings.
//!
//! | spec | result |
//! |------|--------|
//! | `grid:5` | maps `(a, b)` with `a, b ∈ {1..5}` |
//! | `affprod:gp(1,2,6)xap(0,1,6)` | maps `(c, d)` with `c ∈ C`, `d ∈ D` |
//! | `pencil:2,1:ap(1,1,6)` | lines `y = m(x − 2) + 1` |
//! | `parabola:ap(1,1,20)` | points `(a, a²)` |
//! | `randaff:100:seed=7` | 100 random maps |
//! | `randplanar:30:seed=7` | 30 random points off the y-axis |
//! | `gridlines:ap(1,1,10):affprod:{1}xap(-5,1,11)` | `A × A` with a line set |
//!
//! Scalar sequences are `ap(start,step,n)`, `gp(start,ratio,n)` or an
//! explicit list `{1,2,5/3}`.
//!
//! Random sets use xorshift64* seeded through splitmix64. Each draw takes a
//! slope then an intercept by rejection sampling and discards repeats until
//! the set has the requested size. Over `F_p` slopes are uniform on `1..p`
//! and intercepts on `0..p`. Over `Q` both are integers in `[−K, K]`,
//! `K = ⌈√n⌉ + 1`, with slope `0` excluded.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::affine::{AffineMap, AffineSet};
use crate::bounds::Exact;
use crate::error::{Error, Result};
use crate::plane::PlanePoint;
use crate::richlines::GridInstance;
use crate::scalar::{Field, FieldSpec, Scalar};

/// Finite scalar sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScalarSeq {
    Ap { start: String, step: String, n: usize },
    Gp { start: String, ratio: String, n: usize },
    List(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GenKind {
    Grid(usize),
    AffProduct(ScalarSeq, ScalarSeq),
    Pencil { x0: String, y0: String, slopes: ScalarSeq },
    Parabola(ScalarSeq),
    RandomAff { n: usize, seed: u64 },
    RandomPlanar { n: usize, seed: u64 },
    GridLines { set: ScalarSeq, lines: Box<GenKind> },
}

/// A parsed generator string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub kind: GenKind,
    text: String,
}

fn invalid(text: &str, why: impl Into<String>) -> Error {
    Error::InvalidSpec(text.to_string(), why.into())
}

fn check_scalar(spec: &str, s: &str) -> Result<String> {
    let s = s.trim();
    Exact::parse(s).ok_or_else(|| invalid(spec, format!("bad scalar {s:?}")))?;
    Ok(s.to_string())
}

fn parse_count(spec: &str, s: &str) -> Result<usize> {
    let n: usize = s.trim().parse().map_err(|_| invalid(spec, format!("bad count {s:?}")))?;
    if n == 0 {
        return Err(invalid(spec, "count must be at least 1"));
    }
    Ok(n)
}

impl ScalarSeq {
    fn parse(spec: &str, s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            let items = body
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| check_scalar(spec, x))
                .collect::<Result<Vec<_>>>()?;
            if items.is_empty() {
                return Err(invalid(spec, "empty list"));
            }
            return Ok(ScalarSeq::List(items));
        }
        let (name, rest) = s.split_once('(').ok_or_else(|| invalid(spec, format!("bad sequence {s:?}")))?;
        let args: Vec<&str> = rest
            .strip_suffix(')')
            .ok_or_else(|| invalid(spec, "missing ')'"))?
            .split(',')
            .collect();
        let [a, b, n] = args[..] else {
            return Err(invalid(spec, format!("{name} takes three arguments")));
        };
        let (a, b, n) = (check_scalar(spec, a)?, check_scalar(spec, b)?, parse_count(spec, n)?);
        let zero = |x: &str| Exact::parse(x).is_some_and(|e| e == Exact::integer(0));
        match name.trim() {
            "ap" if zero(&b) => Err(invalid(spec, "step must be nonzero")),
            "ap" => Ok(ScalarSeq::Ap { start: a, step: b, n }),
            "gp" if zero(&a) || zero(&b) => Err(invalid(spec, "start and ratio must be nonzero")),
            "gp" => Ok(ScalarSeq::Gp { start: a, ratio: b, n }),
            other => Err(invalid(spec, format!("unknown sequence {other:?}"))),
        }
    }

    /// Elements in order of generation, before deduplication.
    pub fn terms<F: Field>(&self, field: &F) -> Result<Vec<F::Elem>> {
        match self {
            ScalarSeq::Ap { start, step, n } => {
                let (a, d) = (field.parse(start)?, field.parse(step)?);
                Ok(std::iter::successors(Some(a), |x| Some(x.add(&d))).take(*n).collect())
            }
            ScalarSeq::Gp { start, ratio, n } => {
                let (a, r) = (field.parse(start)?, field.parse(ratio)?);
                if a.is_zero() || r.is_zero() {
                    return Err(invalid(&self.to_string(), "progression vanishes in this field"));
                }
                Ok(std::iter::successors(Some(a), |x| Some(x.mul(&r))).take(*n).collect())
            }
            ScalarSeq::List(items) => items.iter().map(|x| field.parse(x)).collect(),
        }
    }

    /// Deduplicated sorted elements and the number of repeats removed.
    pub fn set<F: Field>(&self, field: &F) -> Result<(Vec<F::Elem>, usize)> {
        let terms = self.terms(field)?;
        let n = terms.len();
        let set: Vec<_> = terms.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let dropped = n - set.len();
        Ok((set, dropped))
    }
}

impl fmt::Display for ScalarSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarSeq::Ap { start, step, n } => write!(f, "ap({start},{step},{n})"),
            ScalarSeq::Gp { start, ratio, n } => write!(f, "gp({start},{ratio},{n})"),
            ScalarSeq::List(items) => write!(f, "{{{}}}", items.join(",")),
        }
    }
}

fn parse_seed(spec: &str, s: &str) -> Result<u64> {
    let v = s.trim().strip_prefix("seed=").unwrap_or(s.trim());
    v.parse().map_err(|_| invalid(spec, format!("bad seed {s:?}")))
}

fn parse_kind(spec: &str, s: &str) -> Result<GenKind> {
    let (name, rest) = s.trim().split_once(':').ok_or_else(|| invalid(spec, "expected kind:arguments"))?;
    let random = |rest: &str| -> Result<(usize, u64)> {
        let (n, seed) = rest.split_once(':').unwrap_or((rest, "0"));
        Ok((parse_count(spec, n)?, parse_seed(spec, seed)?))
    };
    match name.trim().to_ascii_lowercase().as_str() {
        "grid" => Ok(GenKind::Grid(parse_count(spec, rest)?)),
        "affprod" => {
            let (c, d) = rest
                .split_once(")x")
                .map(|(c, d)| (format!("{c})"), d.to_string()))
                .or_else(|| rest.split_once("}x").map(|(c, d)| (format!("{c}}}"), d.to_string())))
                .ok_or_else(|| invalid(spec, "expected CxD"))?;
            Ok(GenKind::AffProduct(ScalarSeq::parse(spec, &c)?, ScalarSeq::parse(spec, &d)?))
        }
        "pencil" => {
            let (center, slopes) = rest.split_once(':').ok_or_else(|| invalid(spec, "expected x0,y0:slopes"))?;
            let (x0, y0) = center.split_once(',').ok_or_else(|| invalid(spec, "expected x0,y0"))?;
            Ok(GenKind::Pencil {
                x0: check_scalar(spec, x0)?,
                y0: check_scalar(spec, y0)?,
                slopes: ScalarSeq::parse(spec, slopes)?,
            })
        }
        "parabola" => Ok(GenKind::Parabola(ScalarSeq::parse(spec, rest)?)),
        "randaff" => random(rest).map(|(n, seed)| GenKind::RandomAff { n, seed }),
        "randplanar" => random(rest).map(|(n, seed)| GenKind::RandomPlanar { n, seed }),
        "gridlines" => {
            let (set, lines) = rest.split_once(':').ok_or_else(|| invalid(spec, "expected set:lines"))?;
            let lines = parse_kind(spec, lines)?;
            if matches!(lines, GenKind::Parabola(_) | GenKind::RandomPlanar { .. } | GenKind::GridLines { .. }) {
                return Err(invalid(spec, "line set must be a set of maps"));
            }
            Ok(GenKind::GridLines { set: ScalarSeq::parse(spec, set)?, lines: Box::new(lines) })
        }
        other => Err(invalid(spec, format!("unknown generator {other:?}"))),
    }
}

impl FromStr for GenSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let text = s.trim().to_string();
        Ok(GenSpec { kind: parse_kind(&text, &text)?, text })
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl GenSpec {
    /// Replaces each standalone `N` with `n`, for size sweeps.
    pub fn instantiate(template: &str, n: u64) -> Result<Self> {
        template.replace('N', &n.to_string()).parse()
    }
}

/// Output of a generator.
#[derive(Clone, Debug)]
pub enum Generated<F: Field> {
    Affine(AffineSet<F>),
    Planar(Vec<PlanePoint<F::Elem>>),
    Grid(GridInstance<F>),
}

#[derive(Clone, Debug)]
pub struct Generation<F: Field> {
    pub output: Generated<F>,
    /// Elements lost to coincidences after reduction into the field.
    pub collisions: usize,
}

impl<F: Field> Generation<F> {
    pub fn affine(self) -> Result<AffineSet<F>> {
        match self.output {
            Generated::Affine(a) => Ok(a),
            _ => Err(Error::Config("generator does not produce a set of maps".into())),
        }
    }

    /// Planar view: point sets as they are, maps `(a, b)` as points.
    pub fn planar(self) -> Result<Vec<PlanePoint<F::Elem>>> {
        match self.output {
            Generated::Planar(p) => Ok(p),
            Generated::Affine(a) => Ok(crate::plane::points_of_set(&a)),
            Generated::Grid(_) => Err(Error::Config("generator does not produce a point set".into())),
        }
    }

    pub fn grid(self) -> Result<GridInstance<F>> {
        match self.output {
            Generated::Grid(g) => Ok(g),
            _ => Err(Error::Config("generator does not produce a grid with lines".into())),
        }
    }
}

fn product<F: Field>(field: &F, c: &[F::Elem], d: &[F::Elem]) -> Result<AffineSet<F>> {
    let maps = c
        .iter()
        .flat_map(|x| d.iter().map(move |y| AffineMap::new(x.clone(), y.clone())))
        .collect::<Result<Vec<_>>>()?;
    Ok(AffineSet::new(field.clone(), maps))
}

/// Builds the configuration. `alpha` is only used by `gridlines`.
pub fn generate<F: Field>(spec: &GenSpec, field: &F, alpha: &num_rational::BigRational) -> Result<Generation<F>> {
    generate_kind(&spec.kind, field, alpha)
}

fn generate_kind<F: Field>(kind: &GenKind, field: &F, alpha: &num_rational::BigRational) -> Result<Generation<F>> {
    let affine = |a: AffineSet<F>, nominal: usize| Generation {
        collisions: nominal - a.len(),
        output: Generated::Affine(a),
    };
    Ok(match kind {
        GenKind::Grid(n) => {
            let side = ScalarSeq::Ap { start: "1".into(), step: "1".into(), n: *n };
            let (xs, _) = side.set(field)?;
            if xs.iter().any(Scalar::is_zero) {
                return Err(Error::ZeroSlope);
            }
            affine(product(field, &xs, &xs)?, n * n)
        }
        GenKind::AffProduct(c, d) => {
            let (cs, dc) = c.set(field)?;
            let (ds, dd) = d.set(field)?;
            if cs.iter().any(Scalar::is_zero) {
                return Err(Error::ZeroSlope);
            }
            let a = product(field, &cs, &ds)?;
            let nominal = (cs.len() + dc) * (ds.len() + dd);
            affine(a, nominal)
        }
        GenKind::Pencil { x0, y0, slopes } => {
            let (x0, y0) = (field.parse(x0)?, field.parse(y0)?);
            let terms = slopes.terms(field)?;
            let nominal = terms.len();
            let maps = terms
                .into_iter()
                .map(|m| {
                    let b = y0.sub(&m.mul(&x0));
                    AffineMap::new(m, b)
                })
                .collect::<Result<Vec<_>>>()?;
            affine(AffineSet::new(field.clone(), maps), nominal)
        }
        GenKind::Parabola(seq) => {
            let (xs, dropped) = seq.set(field)?;
            let pts = xs.into_iter().map(|x| {
                let y = x.mul(&x);
                PlanePoint::affine(x, y)
            });
            Generation { output: Generated::Planar(pts.collect()), collisions: dropped }
        }
        GenKind::RandomAff { n, seed } => affine(seeded_random(field, *n, *seed)?, *n),
        GenKind::RandomPlanar { n, seed } => {
            let a = seeded_random(field, *n, *seed)?;
            Generation { output: Generated::Planar(crate::plane::points_of_set(&a)), collisions: 0 }
        }
        GenKind::GridLines { set, lines } => {
            let (a, dropped) = set.set(field)?;
            let inner = generate_kind(lines, field, alpha)?.affine()?;
            let grid = GridInstance::square(field.clone(), &a, inner, alpha.clone())?;
            Generation { output: Generated::Grid(grid), collisions: dropped }
        }
    })
}

/// xorshift64* with splitmix64 seeding.
#[derive(Clone, Debug)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        // one splitmix64 step; the state must be nonzero
        let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        XorShift64Star { state: if z == 0 { 0x2545_F491_4F6C_DD1D } else { z } }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    /// Uniform on `0..bound` by rejection.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let x = self.next_u64();
            if x < zone {
                return x % bound;
            }
        }
    }
}

/// `n` distinct random maps, reproducible from `seed`.
pub fn seeded_random<F: Field>(field: &F, n: usize, seed: u64) -> Result<AffineSet<F>> {
    if n == 0 {
        return Err(Error::Config("random set size must be at least 1".into()));
    }
    let (slope_count, intercept_count, offset): (u64, u64, i64) = match field.spec() {
        FieldSpec::Prime(p) => (p - 1, p, 0),
        FieldSpec::Rational => {
            let k = (n as f64).sqrt().ceil() as u64 + 1;
            (2 * k, 2 * k + 1, k as i64)
        }
    };
    let available = slope_count as u128 * intercept_count as u128;
    if n as u128 > available {
        return Err(Error::CannotFill { requested: n as u128, available });
    }
    let mut rng = XorShift64Star::new(seed);
    let mut seen = BTreeSet::new();
    while seen.len() < n {
        let a = rng.below(slope_count) as i64;
        let b = rng.below(intercept_count) as i64;
        // F_p: a ∈ 1..p; Q: a ∈ [−K, −1] ∪ [1, K]
        let a = if offset == 0 { a + 1 } else if a < offset { a - offset } else { a - offset + 1 };
        let g = AffineMap::new(field.from_i64(a), field.from_i64(b - offset))?;
        seen.insert(g);
    }
    Ok(AffineSet::new(field.clone(), seen))
}
