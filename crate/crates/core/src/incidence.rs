//! Point–plane incidences in projective 3-space.
//!
//! A slice `𝒞_C` of a set `A` is sent to points `(g₁ : g₂ : g₁v₂ : 1)` and
//! planes `(u₂ : −u₁ : −1 : u₁h₂)`. A point `(g,v)` lies on the plane `(u,h)`
//! exactly when `u₂g₁ − u₁g₂ − g₁v₂ + u₁h₂ = 0`; together with
//! `g₁v₁ = h₁u₁ = C` this is the energy relation, so the incidence count of
//! the slice equals `Q_C`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::affine::{max_on_line, AffineMap, AffineSet};
use crate::bounds::{int, ratio, root_lower, Measured};
use crate::energy::{c_slice, slice_sizes, CSlice};
use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

fn canonical<S: Scalar, const N: usize>(mut c: [S; N]) -> Result<[S; N]> {
    let lead = c
        .iter()
        .find(|x| !x.is_zero())
        .ok_or_else(|| Error::Degenerate("all homogeneous coordinates are zero".into()))?
        .inv()?;
    if !lead.is_one() {
        for x in c.iter_mut() {
            *x = x.mul(&lead);
        }
    }
    Ok(c)
}

fn fmt_coords<S: fmt::Display>(c: &[S], f: &mut fmt::Formatter<'_>) -> fmt::Result {
    f.write_str("(")?;
    for (i, x) in c.iter().enumerate() {
        if i > 0 {
            f.write_str(":")?;
        }
        write!(f, "{x}")?;
    }
    f.write_str(")")
}

/// Point of `P³`, scaled so the first nonzero coordinate is 1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Point3<S>([S; 4]);

/// Plane of `P³*`, scaled so the first nonzero coefficient is 1.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Plane3<S>([S; 4]);

impl<S: Scalar> Point3<S> {
    pub fn new(coords: [S; 4]) -> Result<Self> {
        canonical(coords).map(Point3)
    }

    pub fn coords(&self) -> &[S; 4] {
        &self.0
    }
}

impl<S: Scalar> Plane3<S> {
    pub fn new(coeffs: [S; 4]) -> Result<Self> {
        canonical(coeffs).map(Plane3)
    }

    pub fn coeffs(&self) -> &[S; 4] {
        &self.0
    }

    pub fn eval(&self, p: &Point3<S>) -> S {
        dot(&self.0, &p.0)
    }

    pub fn contains(&self, p: &Point3<S>) -> bool {
        self.eval(p).is_zero()
    }
}

impl<S: fmt::Display> fmt::Display for Point3<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_coords(&self.0, f)
    }
}

impl<S: fmt::Display> fmt::Display for Plane3<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_coords(&self.0, f)
    }
}

fn dot<S: Scalar>(a: &[S; 4], b: &[S; 4]) -> S {
    a[0].mul(&b[0])
        .add(&a[1].mul(&b[1]))
        .add(&a[2].mul(&b[2]))
        .add(&a[3].mul(&b[3]))
}

/// `(g, v) ↦ (g₁ : g₂ : g₁v₂ : 1)`.
pub fn build_point<S: Scalar>(g: &AffineMap<S>, v: &AffineMap<S>) -> Point3<S> {
    let one = g.a().one_like();
    Point3::new([g.a().clone(), g.b().clone(), g.a().mul(v.b()), one]).expect("last coordinate is 1")
}

/// `(u, h) ↦ (u₂ : −u₁ : −1 : u₁h₂)`.
pub fn build_plane<S: Scalar>(u: &AffineMap<S>, h: &AffineMap<S>) -> Plane3<S> {
    let minus_one = u.a().one_like().neg();
    Plane3::new([u.b().clone(), u.a().neg(), minus_one, u.a().mul(h.b())]).expect("third coefficient is -1")
}

/// Exact incidence count by evaluating every point against every plane.
pub fn incidences<S: Scalar>(points: &[Point3<S>], planes: &[Plane3<S>]) -> u64 {
    planes
        .par_iter()
        .map(|pi| points.iter().filter(|p| pi.contains(p)).count() as u64)
        .sum()
}

/// Same count through an index of points keyed by `(x₀, x₁, x₃)`.
///
/// For a canonical point with `(x₀, x₁) ≠ (0, 0)` the scaling is fixed by the
/// first two coordinates, so a plane with `a₂ ≠ 0` meets the key in at most
/// the single point with `x₂ = −(a₀x₀ + a₁x₁ + a₃x₃)/a₂`.
pub fn incidences_indexed<S: Scalar>(points: &[Point3<S>], planes: &[Plane3<S>]) -> u64 {
    let mut index: HashMap<[S; 3], HashMap<S, u64>> = HashMap::new();
    let mut rest = Vec::new();
    for p in points {
        let [x0, x1, x2, x3] = p.coords().clone();
        if x0.is_zero() && x1.is_zero() {
            rest.push(p);
        } else {
            *index.entry([x0, x1, x3]).or_default().entry(x2).or_default() += 1;
        }
    }
    let keys: Vec<_> = index.iter().collect();
    planes
        .par_iter()
        .map(|pi| {
            let [a0, a1, a2, a3] = pi.coeffs();
            let mut count = 0u64;
            for ([x0, x1, x3], column) in &keys {
                let partial = a0.mul(x0).add(&a1.mul(x1)).add(&a3.mul(x3));
                if a2.is_zero() {
                    if partial.is_zero() {
                        count += column.values().sum::<u64>();
                    }
                } else {
                    let x2 = partial.neg().div(a2).expect("a2 nonzero");
                    count += column.get(&x2).copied().unwrap_or(0);
                }
            }
            count + rest.iter().filter(|p| pi.contains(p)).count() as u64
        })
        .sum()
}

/// Incidence count using exact `i128` dot products when every coordinate is
/// a small rational, and the index otherwise.
pub fn incidences_fast<S: Scalar>(points: &[Point3<S>], planes: &[Plane3<S>]) -> u64 {
    let ints = |v: Vec<&[S; 4]>| integer_points(&v);
    let pts = ints(points.iter().map(Point3::coords).collect());
    let pls = ints(planes.iter().map(Plane3::coeffs).collect());
    if let (Some(pts), Some(pls)) = (pts, pls) {
        let count = pls
            .par_iter()
            .map(|h| {
                pts.iter().try_fold(0u64, |acc, p| {
                    let mut dot = 0i128;
                    for i in 0..4 {
                        dot = dot.checked_add(h[i].checked_mul(p[i])?)?;
                    }
                    Some(acc + u64::from(dot == 0))
                })
            })
            .try_reduce(|| 0, |a, b| Some(a + b));
        if let Some(c) = count {
            return c;
        }
    }
    incidences_indexed(points, planes)
}

fn plucker<S: Scalar>(p: &[S; 4], q: &[S; 4]) -> Option<[S; 6]> {
    let m = |i: usize, j: usize| p[i].mul(&q[j]).sub(&p[j].mul(&q[i]));
    let l = [m(0, 1), m(0, 2), m(0, 3), m(1, 2), m(1, 3), m(2, 3)];
    canonical(l).ok()
}

/// Largest number of points of `P` on one projective line.
pub fn max_collinear_3d<S: Scalar>(points: &[Point3<S>]) -> usize {
    let pts: Vec<&[S; 4]> = {
        let set: BTreeSet<_> = points.iter().collect();
        set.into_iter().map(|p| p.coords()).collect()
    };
    if pts.len() <= 2 {
        return pts.len();
    }
    integer_points(&pts)
        .and_then(|ints| max_collinear_integer(&ints))
        .unwrap_or_else(|| max_collinear_generic(&pts))
}

fn max_collinear_generic<S: Scalar>(pts: &[&[S; 4]]) -> usize {
    (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut lines: HashMap<[S; 6], usize> = HashMap::new();
            for q in &pts[i + 1..] {
                let l = plucker(pts[i], q).expect("distinct points span a line");
                *lines.entry(l).or_default() += 1;
            }
            1 + lines.into_values().max().unwrap_or(0)
        })
        .max()
        .unwrap_or(1)
}

/// Primitive integer representatives, when every coordinate is a small
/// rational.
fn integer_points<S: Scalar>(pts: &[&[S; 4]]) -> Option<Vec<[i128; 4]>> {
    pts.iter()
        .map(|p| {
            let fr: Vec<(i128, i128)> = p
                .iter()
                .map(|x| x.small_fraction().map(|(n, d)| (n as i128, d as i128)))
                .collect::<Option<_>>()?;
            let l = fr.iter().try_fold(1i128, |acc, (_, d)| acc.checked_mul(d / acc.gcd(d)))?;
            let mut v = [0i128; 4];
            for (slot, (n, d)) in v.iter_mut().zip(&fr) {
                *slot = n.checked_mul(l / d)?;
            }
            Some(primitive(v))
        })
        .collect()
}

fn primitive<const N: usize>(mut v: [i128; N]) -> [i128; N] {
    let g = v.iter().fold(0i128, |acc, x| acc.gcd(x));
    let sign = v.iter().find(|x| **x != 0).map_or(1, |x| x.signum());
    if g > 1 || sign < 0 {
        for x in v.iter_mut() {
            *x /= g * sign;
        }
    }
    v
}

fn plucker_integer(p: &[i128; 4], q: &[i128; 4]) -> Option<[i128; 6]> {
    let m = |i: usize, j: usize| p[i].checked_mul(q[j])?.checked_sub(p[j].checked_mul(q[i])?);
    Some(primitive([m(0, 1)?, m(0, 2)?, m(0, 3)?, m(1, 2)?, m(1, 3)?, m(2, 3)?]))
}

/// Same count with primitive integer Plücker vectors as line keys; `None`
/// on overflow.
fn max_collinear_integer(pts: &[[i128; 4]]) -> Option<usize> {
    (0..pts.len())
        .into_par_iter()
        .map(|i| {
            let mut lines: HashMap<[i128; 6], usize> = HashMap::new();
            for q in &pts[i + 1..] {
                *lines.entry(plucker_integer(&pts[i], q)?).or_default() += 1;
            }
            Some(1 + lines.into_values().max().unwrap_or(0))
        })
        .try_reduce(|| 1, |a, b| Some(a.max(b)))
}

/// Deduplicated points and planes plus the collinearity statistic `k`.
#[derive(Clone, Debug)]
pub struct IncidenceInstance<S: Scalar> {
    points: Vec<Point3<S>>,
    planes: Vec<Plane3<S>>,
    k: usize,
}

impl<S: Scalar> IncidenceInstance<S> {
    pub fn new(points: impl IntoIterator<Item = Point3<S>>, planes: impl IntoIterator<Item = Plane3<S>>) -> Self {
        let points: Vec<_> = points.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let planes: Vec<_> = planes.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let k = max_collinear_3d(&points);
        IncidenceInstance { points, planes, k }
    }

    pub fn points(&self) -> &[Point3<S>] {
        &self.points
    }

    pub fn planes(&self) -> &[Plane3<S>] {
        &self.planes
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn incidences(&self) -> u64 {
        incidences_fast(&self.points, &self.planes)
    }

    /// Swaps the roles of points and planes by projective duality.
    pub fn dual(&self) -> Self {
        IncidenceInstance::new(
            self.planes.iter().map(|pi| Point3(pi.0.clone())),
            self.points.iter().map(|p| Plane3(p.0.clone())),
        )
    }
}

/// Points `P_C` and planes `Π_C` of one slice.
pub fn slice_instance<S: Scalar>(slice: &CSlice<S>) -> IncidenceInstance<S> {
    IncidenceInstance::new(
        slice.pairs().iter().map(|(g, v)| build_point(g, v)),
        slice.pairs().iter().map(|(u, h)| build_plane(u, h)),
    )
}

/// `Q_C` as the incidence count `I(P_C, Π_C)`.
pub fn q_c_via_incidence<F: Field>(a: &AffineSet<F>, c: &F::Elem) -> Result<u64> {
    let slice = c_slice(a, c)?;
    let pts: Vec<_> = slice.pairs().iter().map(|(g, v)| build_point(g, v)).collect();
    let planes: Vec<_> = slice.pairs().iter().map(|(u, h)| build_plane(u, h)).collect();
    Ok(incidences_fast(&pts, &planes))
}

/// `Q_C` for every realized `C` via incidences.
pub fn decompose_via_incidence<F: Field>(a: &AffineSet<F>) -> Result<BTreeMap<F::Elem, u64>> {
    slice_sizes(a)
        .into_keys()
        .map(|c| q_c_via_incidence(a, &c).map(|q| (c, q)))
        .collect()
}

/// `true` when `build_point` is injective on the slice.
pub fn point_map_injective<S: Scalar>(slice: &CSlice<S>) -> bool {
    let images: HashSet<_> = slice.pairs().iter().map(|(g, v)| build_point(g, v)).collect();
    images.len() == slice.len()
}

/// Bound check `I(P,Π)` against `|Π||P|^{1/2} + k|Π|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointPlaneReport {
    pub points: usize,
    pub planes: usize,
    /// Points and planes were exchanged so that `|P| ≤ |Π|`.
    pub swapped: bool,
    pub incidences: u64,
    pub k: usize,
    pub rhs: Measured,
    pub ratio: Measured,
    /// `(I − |Π||P|/p) / rhs` in positive characteristic.
    pub ratio_asymptotic: Option<Measured>,
    /// `|P| > p²`: the strict form is outside its hypothesis.
    pub exceeds_p_squared: Option<bool>,
}

pub fn pointplane_rhs(points: u64, planes: u64, k: u64) -> BigRational {
    // |Π||P|^{1/2} = (|Π|²|P|)^{1/2}
    root_lower(&int(planes * planes * points), 2) + int(k * planes)
}

pub fn pointplane_bound_report<S: Scalar>(inst: &IncidenceInstance<S>, char_p: u64) -> PointPlaneReport {
    let swapped = inst.points.len() > inst.planes.len();
    let dual;
    let inst = if swapped {
        dual = inst.dual();
        &dual
    } else {
        inst
    };
    let (np, nh) = (inst.points.len() as u64, inst.planes.len() as u64);
    let i = inst.incidences();
    let rhs = pointplane_rhs(np, nh, inst.k as u64);
    let r = ratio(&int(i), &rhs).unwrap_or_default();
    let (ratio_asymptotic, exceeds) = if char_p > 0 {
        let main = BigRational::new(BigInt::from(nh * np), BigInt::from(char_p));
        let adj = ratio(&(int(i) - main), &rhs).unwrap_or_default();
        (Some(adj.into()), Some(np as u128 > (char_p as u128).pow(2)))
    } else {
        (None, None)
    };
    PointPlaneReport {
        points: np as usize,
        planes: nh as usize,
        swapped,
        incidences: i,
        k: inst.k,
        rhs: rhs.into(),
        ratio: r.into(),
        ratio_asymptotic,
        exceeds_p_squared: exceeds,
    }
}

/// Per-plane label for the two-case split of point pairs inside a plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BeckType {
    /// Many pairs lie on one line.
    #[serde(rename = "i")]
    SingleLine,
    /// Most pairs lie on poor lines.
    #[serde(rename = "ii")]
    Spread,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BeckConfig {
    /// Lines with fewer than this many points count as poor.
    pub cthresh: usize,
    /// A plane is type (i) when one line carries at least `num/den` of its pairs.
    pub line_fraction: (u64, u64),
}

impl Default for BeckConfig {
    fn default() -> Self {
        BeckConfig { cthresh: 4, line_fraction: (1, 2) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaneBeckStats {
    pub plane: String,
    pub points_on_plane: usize,
    /// Ordered pairs of distinct points of `π ∩ P`.
    pub pairs: u64,
    pub max_line_pairs: u64,
    pub poor_line_pairs: u64,
    pub kind: BeckType,
}

/// Classifies every plane holding at least two points of `P`.
pub fn beck_plane_classification<S: Scalar>(
    points: &[Point3<S>],
    planes: &[Plane3<S>],
    config: BeckConfig,
) -> Result<Vec<PlaneBeckStats>> {
    if config.cthresh < 2 {
        return Err(Error::Config("Cthresh must be at least 2".into()));
    }
    let (num, den) = config.line_fraction;
    let mut planes: Vec<_> = planes.to_vec();
    planes.sort();
    planes.dedup();
    let mut out = Vec::new();
    for pi in &planes {
        let on: Vec<_> = points
            .iter()
            .filter(|p| pi.contains(p))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if on.len() < 2 {
            continue;
        }
        let mut lines: HashMap<[S; 6], BTreeSet<usize>> = HashMap::new();
        for i in 0..on.len() {
            for j in i + 1..on.len() {
                let l = plucker(on[i].coords(), on[j].coords()).expect("distinct points");
                let e = lines.entry(l).or_default();
                e.insert(i);
                e.insert(j);
            }
        }
        let ordered = |c: usize| (c * (c - 1)) as u64;
        let pairs = ordered(on.len());
        let max_line_pairs = lines.values().map(|s| ordered(s.len())).max().unwrap_or(0);
        let poor_line_pairs = lines
            .values()
            .filter(|s| s.len() < config.cthresh)
            .map(|s| ordered(s.len()))
            .sum();
        let kind = if max_line_pairs * den >= pairs * num {
            BeckType::SingleLine
        } else {
            BeckType::Spread
        };
        out.push(PlaneBeckStats {
            plane: pi.to_string(),
            points_on_plane: on.len(),
            pairs,
            max_line_pairs,
            poor_line_pairs,
            kind,
        });
    }
    Ok(out)
}

/// Incidence summary for one slice of a set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceIncidenceRow {
    pub c: String,
    pub slice_size: usize,
    pub q_c: u64,
    pub injective: bool,
    pub bound: PointPlaneReport,
}

/// Incidence reduction for every realized `C`, in order of `C`.
pub fn slice_reports<F: Field>(a: &AffineSet<F>) -> Result<Vec<SliceIncidenceRow>> {
    let char_p = a.field().characteristic();
    slice_sizes(a)
        .into_keys()
        .map(|c| {
            let slice = c_slice(a, &c)?;
            let inst = slice_instance(&slice);
            let bound = pointplane_bound_report(&inst, char_p);
            Ok(SliceIncidenceRow {
                c: c.to_string(),
                slice_size: slice.len(),
                q_c: bound.incidences,
                injective: point_map_injective(&slice),
                bound,
            })
        })
        .collect()
}

/// Largest `k` over all slices, together with `M` of the set.
pub fn slice_collinearity<F: Field>(a: &AffineSet<F>) -> Result<(usize, usize)> {
    let mut k = 0;
    for c in slice_sizes(a).into_keys() {
        k = k.max(slice_instance(&c_slice(a, &c)?).k());
    }
    Ok((k, max_on_line(a)))
}

/// Parses whitespace-separated homogeneous rows of four scalars.
pub fn parse_point_rows<F: Field>(field: &F, text: &str) -> Result<Vec<Point3<F::Elem>>> {
    parse_rows4(field, text)?.into_iter().map(Point3::new).collect()
}

pub fn parse_plane_rows<F: Field>(field: &F, text: &str) -> Result<Vec<Plane3<F::Elem>>> {
    parse_rows4(field, text)?.into_iter().map(Plane3::new).collect()
}

fn parse_rows4<F: Field>(field: &F, text: &str) -> Result<Vec<[F::Elem; 4]>> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(|t| field.parse(t))
            .collect::<Result<Vec<_>>>()?;
        let row: [F::Elem; 4] = vals.try_into().map_err(|_| Error::Parse(line.to_string()))?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn format_rows<S: Scalar>(rows: impl IntoIterator<Item = [S; 4]>) -> String {
    rows.into_iter()
        .map(|r| format!("{} {} {} {}\n", r[0], r[1], r[2], r[3]))
        .collect()
}
