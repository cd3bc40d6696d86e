//! Points and lines of the projective plane, shadows, and quadrangles.
//!
//! Points and lines are homogeneous triples scaled so that the last nonzero
//! entry is 1. Affine points therefore read `(x : y : 1)`, directions read
//! `(x : 1 : 0)` or `(1 : 0 : 0)`, and the line at infinity is `(0 : 0 : 1)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::hash::Hash;

use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::affine::{AffineMap, AffineSet};
use crate::bounds::Measured;
use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

type Triple<S> = [S; 3];

fn canonical<S: Scalar>(mut c: Triple<S>) -> Option<Triple<S>> {
    let lead = c.iter().rev().find(|x| !x.is_zero())?.inv().ok()?;
    if !lead.is_one() {
        for x in c.iter_mut() {
            *x = x.mul(&lead);
        }
    }
    Some(c)
}

fn cross<S: Scalar>(a: &Triple<S>, b: &Triple<S>) -> Triple<S> {
    [
        a[1].mul(&b[2]).sub(&a[2].mul(&b[1])),
        a[2].mul(&b[0]).sub(&a[0].mul(&b[2])),
        a[0].mul(&b[1]).sub(&a[1].mul(&b[0])),
    ]
}

fn dot<S: Scalar>(a: &Triple<S>, b: &Triple<S>) -> S {
    a[0].mul(&b[0]).add(&a[1].mul(&b[1])).add(&a[2].mul(&b[2]))
}

fn det3<S: Scalar>(a: &Triple<S>, b: &Triple<S>, c: &Triple<S>) -> S {
    dot(a, &cross(b, c))
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PlanePoint<S>(Triple<S>);

/// The line `ax + by + cz = 0`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct PlaneLine<S>(Triple<S>);

impl<S: Scalar> PlanePoint<S> {
    pub fn new(coords: Triple<S>) -> Result<Self> {
        canonical(coords)
            .map(PlanePoint)
            .ok_or_else(|| Error::Degenerate("all homogeneous coordinates are zero".into()))
    }

    pub fn affine(x: S, y: S) -> Self {
        let one = x.one_like();
        PlanePoint([x, y, one])
    }

    pub fn coords(&self) -> &Triple<S> {
        &self.0
    }

    pub fn is_affine(&self) -> bool {
        !self.0[2].is_zero()
    }

    pub fn x(&self) -> &S {
        &self.0[0]
    }

    pub fn y(&self) -> &S {
        &self.0[1]
    }

    /// Line through two distinct points.
    pub fn join(&self, other: &Self) -> Result<PlaneLine<S>> {
        canonical(cross(&self.0, &other.0))
            .map(PlaneLine)
            .ok_or_else(|| Error::Degenerate(format!("join of equal points {self}")))
    }

    /// Swaps the two affine coordinates.
    pub fn reflect(&self) -> Self {
        let [x, y, z] = self.0.clone();
        PlanePoint([y, x, z])
    }
}

impl<S: Scalar> PlaneLine<S> {
    pub fn new(coeffs: Triple<S>) -> Result<Self> {
        canonical(coeffs)
            .map(PlaneLine)
            .ok_or_else(|| Error::Degenerate("all line coefficients are zero".into()))
    }

    pub fn coeffs(&self) -> &Triple<S> {
        &self.0
    }

    pub fn at_infinity(sample: &S) -> Self {
        PlaneLine([sample.zero_like(), sample.zero_like(), sample.one_like()])
    }

    /// The line `x = 0`.
    pub fn y_axis(sample: &S) -> Self {
        PlaneLine([sample.one_like(), sample.zero_like(), sample.zero_like()])
    }

    pub fn contains(&self, p: &PlanePoint<S>) -> bool {
        dot(&self.0, &p.0).is_zero()
    }

    /// Intersection point of two distinct lines.
    pub fn meet(&self, other: &Self) -> Result<PlanePoint<S>> {
        canonical(cross(&self.0, &other.0))
            .map(PlanePoint)
            .ok_or(Error::EqualLines)
    }

    /// Image under `(x, y) ↦ (y, x)`.
    pub fn reflect(&self) -> Self {
        let [a, b, c] = self.0.clone();
        PlaneLine([b, a, c])
    }
}

impl<S: Scalar> fmt::Display for PlanePoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [x, y, z] = &self.0;
        if z.is_one() {
            write!(f, "{x} {y}")
        } else {
            write!(f, "{x}:{y}:{z}")
        }
    }
}

impl<S: Scalar> fmt::Display for PlaneLine<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = &self.0;
        write!(f, "{a}:{b}:{c}")
    }
}

/// Invertible 3×3 matrix acting on column vectors, scaled so the first
/// nonzero entry is 1.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProjectiveMap2<S>([Triple<S>; 3]);

impl<S: Scalar> ProjectiveMap2<S> {
    pub fn new(rows: [Triple<S>; 3]) -> Result<Self> {
        if det3(&rows[0], &rows[1], &rows[2]).is_zero() {
            return Err(Error::Degenerate("singular projective map".into()));
        }
        let lead = rows.iter().flatten().find(|x| !x.is_zero()).expect("nonsingular").inv()?;
        Ok(ProjectiveMap2(rows.map(|r| r.map(|x| x.mul(&lead)))))
    }

    pub fn identity(sample: &S) -> Self {
        let (o, z) = (sample.one_like(), sample.zero_like());
        ProjectiveMap2([
            [o.clone(), z.clone(), z.clone()],
            [z.clone(), o.clone(), z.clone()],
            [z.clone(), z, o],
        ])
    }

    pub fn rows(&self) -> &[Triple<S>; 3] {
        &self.0
    }

    fn cols(&self) -> [Triple<S>; 3] {
        let m = &self.0;
        [0, 1, 2].map(|j| [m[0][j].clone(), m[1][j].clone(), m[2][j].clone()])
    }

    pub fn apply(&self, p: &PlanePoint<S>) -> PlanePoint<S> {
        PlanePoint(canonical(self.0.clone().map(|r| dot(&r, &p.0))).expect("nonsingular map"))
    }

    /// Image of a line: coefficients transform by the inverse transpose.
    pub fn apply_line(&self, l: &PlaneLine<S>) -> PlaneLine<S> {
        // the cofactor matrix has rows r₁×r₂, r₂×r₀, r₀×r₁
        let [r0, r1, r2] = &self.0;
        let cof = [cross(r1, r2), cross(r2, r0), cross(r0, r1)];
        PlaneLine(canonical(cof.map(|r| dot(&r, &l.0))).expect("nonsingular map"))
    }

    pub fn compose(&self, rhs: &Self) -> Self {
        let cols = rhs.cols();
        let rows = self.0.clone().map(|r| cols.clone().map(|c| dot(&r, &c)));
        ProjectiveMap2::new(rows).expect("product of invertible maps")
    }

    pub fn inverse(&self) -> Self {
        let [r0, r1, r2] = &self.0;
        // columns of the adjugate are cross products of rows
        let cols = [cross(r1, r2), cross(r2, r0), cross(r0, r1)];
        let rows = [0, 1, 2].map(|i| [cols[0][i].clone(), cols[1][i].clone(), cols[2][i].clone()]);
        ProjectiveMap2::new(rows).expect("inverse of invertible map")
    }
}

/// Every line through two or more points of `P`, sorted.
pub fn span_lines<S: Scalar>(points: &[PlanePoint<S>]) -> Result<Vec<PlaneLine<S>>> {
    let pts = dedup(points);
    if pts.len() < 2 {
        return Err(Error::TooFewPoints(pts.len()));
    }
    let lines: BTreeSet<_> = (0..pts.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let pts = &pts;
            (i + 1..pts.len()).map(move |j| pts[i].join(&pts[j]).expect("distinct points"))
        })
        .collect();
    Ok(lines.into_iter().collect())
}

fn dedup<S: Scalar>(points: &[PlanePoint<S>]) -> Vec<PlanePoint<S>> {
    let set: BTreeSet<_> = points.iter().cloned().collect();
    set.into_iter().collect()
}

/// Points where `l` meets the lines spanned by `P`.
pub fn shadow<S: Scalar>(points: &[PlanePoint<S>], l: &PlaneLine<S>) -> Result<Vec<PlanePoint<S>>> {
    if let Some(p) = points.iter().find(|p| l.contains(p)) {
        return Err(Error::LineMeetsP(p.to_string()));
    }
    let lines = span_lines(points)?;
    let hits: BTreeSet<_> = lines
        .iter()
        .map(|m| m.meet(l).expect("spanned line differs from a line avoiding P"))
        .collect();
    Ok(hits.into_iter().collect())
}

fn point_on<S: Scalar>(l: &PlaneLine<S>, avoid: &PlanePoint<S>) -> PlanePoint<S> {
    let one = l.0.iter().find(|x| !x.is_zero()).expect("nonzero line").one_like();
    (0..3)
        .filter_map(|i| {
            let mut e = [one.zero_like(), one.zero_like(), one.zero_like()];
            e[i] = one.clone();
            canonical(cross(&l.0, &e)).map(PlanePoint)
        })
        .find(|p| p != avoid)
        .expect("a line has at least two of the three coordinate-line meets")
}

/// Canonical projective map sending `l1` to `x = 0` and `l2` to infinity.
///
/// With canonical representatives `x = l1 ∩ l2`, `a ∈ l1` and `b ∈ l2` the
/// map sends `x ↦ (0:1:0)`, `a ↦ (0:0:1)`, `b ↦ (1:0:0)` and
/// `x + a + b ↦ (1:1:1)`.
pub fn normalize_two_lines<S: Scalar>(l1: &PlaneLine<S>, l2: &PlaneLine<S>) -> Result<ProjectiveMap2<S>> {
    let x = l1.meet(l2)?;
    let a = point_on(l1, &x);
    let b = point_on(l2, &x);
    let frame = ProjectiveMap2::new([0, 1, 2].map(|i| [x.0[i].clone(), a.0[i].clone(), b.0[i].clone()]))?;
    let one = x.0.iter().find(|c| !c.is_zero()).expect("nonzero point").one_like();
    let (o, z) = (one.clone(), one.zero_like());
    // e₁ ↦ (0:1:0), e₂ ↦ (0:0:1), e₃ ↦ (1:0:0)
    let perm = ProjectiveMap2::new([
        [z.clone(), z.clone(), o.clone()],
        [o.clone(), z.clone(), z.clone()],
        [z.clone(), o, z],
    ])?;
    Ok(perm.compose(&frame.inverse()))
}

pub fn apply_projective<S: Scalar>(t: &ProjectiveMap2<S>, points: &[PlanePoint<S>]) -> Vec<PlanePoint<S>> {
    let image: BTreeSet<_> = points.iter().map(|p| t.apply(p)).collect();
    image.into_iter().collect()
}

/// Both sides of `I(P′, L(P′)) ≤ I(S×T, P′)` after normalizing two lines.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ShadowReport {
    pub points: usize,
    /// Points of `P` on `l1` or `l2`, dropped before normalizing.
    pub removed: usize,
    pub spanned_lines: usize,
    /// `|S|`: slopes of the shadow on the line at infinity.
    pub slopes: usize,
    /// `|T|`: intercepts of the shadow on the y-axis.
    pub intercepts: usize,
    /// `I(P′, L(P′))` over non-vertical spanned lines.
    pub lhs: u64,
    /// Incidences on spanned lines through `l1 ∩ l2`, which become vertical.
    pub vertical_incidences: u64,
    pub rhs: u64,
    pub holds: bool,
}

pub fn shadow_incidence_check<S: Scalar>(
    points: &[PlanePoint<S>],
    l1: &PlaneLine<S>,
    l2: &PlaneLine<S>,
) -> Result<ShadowReport> {
    let all = dedup(points);
    let kept: Vec<_> = all.iter().filter(|p| !l1.contains(p) && !l2.contains(p)).cloned().collect();
    let removed = all.len() - kept.len();
    let t = normalize_two_lines(l1, l2)?;
    let image = apply_projective(&t, &kept);
    let lines = span_lines(&image)?;
    let sample = image[0].x().clone();
    let (mut lhs, mut vertical) = (0u64, 0u64);
    for l in &lines {
        let on = image.iter().filter(|p| l.contains(p)).count() as u64;
        if l.0[1].is_zero() {
            vertical += on;
        } else {
            lhs += on;
        }
    }
    let slopes: BTreeSet<S> = shadow(&image, &PlaneLine::at_infinity(&sample))?
        .into_iter()
        .filter(|d| !d.x().is_zero())
        .map(|d| d.y().div(d.x()).expect("x nonzero"))
        .collect();
    let intercepts: HashSet<S> = shadow(&image, &PlaneLine::y_axis(&sample))?
        .into_iter()
        .filter(PlanePoint::is_affine)
        .map(|p| p.y().clone())
        .collect();
    let rhs = image
        .par_iter()
        .map(|p| {
            slopes
                .iter()
                .filter(|s| intercepts.contains(&p.y().sub(&s.mul(p.x()))))
                .count() as u64
        })
        .sum();
    Ok(ShadowReport {
        points: all.len(),
        removed,
        spanned_lines: lines.len(),
        slopes: slopes.len(),
        intercepts: intercepts.len(),
        lhs,
        vertical_incidences: vertical,
        rhs,
        holds: lhs <= rhs,
    })
}

/// Number of spanned lines through each point, plus Beck-point summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeckPointStats {
    pub points: usize,
    pub spanned_lines: usize,
    /// `(point, lines through it)` in point order.
    pub per_point: Vec<(String, usize)>,
    /// Points on at least `θ|P|` spanned lines.
    pub rich_points: usize,
    pub rich_fraction: Measured,
}

pub fn beck_point_stats<S: Scalar>(points: &[PlanePoint<S>], theta: &BigRational) -> Result<BeckPointStats> {
    let pts = dedup(points);
    let lines = span_lines(&pts)?;
    let per_point: Vec<usize> = pts
        .par_iter()
        .map(|p| lines.iter().filter(|l| l.contains(p)).count())
        .collect();
    let n = BigRational::from_integer(pts.len().into());
    let cut = theta * &n;
    let rich = per_point
        .iter()
        .filter(|&&c| BigRational::from_integer(c.into()) >= cut)
        .count();
    Ok(BeckPointStats {
        points: pts.len(),
        spanned_lines: lines.len(),
        per_point: pts.iter().map(ToString::to_string).zip(per_point).collect(),
        rich_points: rich,
        rich_fraction: (BigRational::from_integer(rich.into()) / n).into(),
    })
}

fn check_quadrangle_input<S: Scalar>(points: &[PlanePoint<S>]) -> Result<Vec<PlanePoint<S>>> {
    let pts = dedup(points);
    for p in &pts {
        if !p.is_affine() {
            return Err(Error::NotAffine(p.to_string()));
        }
        if p.x().is_zero() {
            return Err(Error::PointOnYAxis(p.to_string()));
        }
    }
    Ok(pts)
}

fn collinear4<S: Scalar>(q: [&PlanePoint<S>; 4]) -> bool {
    let distinct: Vec<_> = q.iter().collect::<BTreeSet<_>>().into_iter().collect();
    if distinct.len() <= 2 {
        return true;
    }
    let l = distinct[0].join(distinct[1]).expect("distinct");
    distinct[2..].iter().all(|p| l.contains(p))
}

/// Geometric quadrangle test for an ordered quadruple `(g, h, u, v)`.
///
/// `gh ∥ uv` and `gu`, `hv` meet the y-axis in the same projective point;
/// the four points are not collinear and `g ≠ h`, `u ≠ v`, `g ≠ u`, `h ≠ v`.
pub fn is_quadrangle<S: Scalar>(g: &PlanePoint<S>, h: &PlanePoint<S>, u: &PlanePoint<S>, v: &PlanePoint<S>) -> bool {
    if g == h || u == v || g == u || h == v || collinear4([g, h, u, v]) {
        return false;
    }
    let inf = PlaneLine::at_infinity(g.x());
    let axis = PlaneLine::y_axis(g.x());
    let meet = |p: &PlanePoint<S>, q: &PlanePoint<S>, l: &PlaneLine<S>| p.join(q).expect("distinct").meet(l);
    let same = |a: Result<PlanePoint<S>>, b: Result<PlanePoint<S>>| match (a, b) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    };
    same(meet(g, h, &inf), meet(u, v, &inf)) && same(meet(g, u, &axis), meet(h, v, &axis))
}

/// Ordered geometric quadrangles, found by bucketing joins by direction.
pub fn quadrangles<S: Scalar>(points: &[PlanePoint<S>]) -> Result<u64> {
    let pts = check_quadrangle_input(points)?;
    Ok(quadrangle_list(&pts).len() as u64)
}

// For each (g, h) the direction of gh picks, per u, the points v with uv
// parallel to gh from a bucket; only the y-axis condition is then tested.
fn quadrangle_list<S: Scalar>(pts: &[PlanePoint<S>]) -> Vec<[usize; 4]> {
    let n = pts.len();
    if n < 4 {
        return Vec::new();
    }
    let inf = PlaneLine::at_infinity(pts[0].x());
    let axis = PlaneLine::y_axis(pts[0].x());
    let mut dir_ids: HashMap<PlanePoint<S>, u32> = HashMap::new();
    let mut axis_ids: HashMap<PlanePoint<S>, u32> = HashMap::new();
    let mut line_ids: HashMap<PlaneLine<S>, u32> = HashMap::new();
    fn intern<K: Hash + Eq>(ids: &mut HashMap<K, u32>, k: K) -> u32 {
        let next = ids.len() as u32;
        *ids.entry(k).or_insert(next)
    }
    let (mut dir, mut cross_axis, mut line) = (vec![0u32; n * n], vec![0u32; n * n], vec![0u32; n * n]);
    let mut bucket: HashMap<(usize, u32), Vec<usize>> = HashMap::new();
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let l = pts[i].join(&pts[j]).expect("distinct");
            let d = intern(&mut dir_ids, l.meet(&inf).expect("affine line"));
            dir[i * n + j] = d;
            cross_axis[i * n + j] = intern(&mut axis_ids, l.meet(&axis).expect("affine line is not the y-axis"));
            line[i * n + j] = intern(&mut line_ids, l);
            bucket.entry((i, d)).or_default().push(j);
        }
    }
    let mut out: Vec<[usize; 4]> = (0..n)
        .into_par_iter()
        .flat_map_iter(|g| {
            let mut found = Vec::new();
            for h in (0..n).filter(|&h| h != g) {
                let gh = g * n + h;
                for u in (0..n).filter(|&u| u != g) {
                    let Some(vs) = bucket.get(&(u, dir[gh])) else { continue };
                    // uv ∥ gh, so all four are collinear exactly when u lies on gh
                    if u == h || line[g * n + u] == line[gh] {
                        continue;
                    }
                    let o = cross_axis[g * n + u];
                    found.extend(vs.iter().filter(|&&v| v != h && cross_axis[h * n + v] == o).map(|&v| [g, h, u, v]));
                }
            }
            found
        })
        .collect();
    out.sort_unstable();
    out
}

/// Direct O(|P|⁴) count of ordered geometric quadrangles.
///
/// Directions at infinity and y-axis crossings of every join are computed
/// once and interned, so the quadruple loop compares integers.
pub fn quadrangles_bruteforce<S: Scalar>(points: &[PlanePoint<S>], cap: usize) -> Result<u64> {
    let pts = check_quadrangle_input(points)?;
    if pts.len() > cap {
        return Err(Error::OracleCapExceeded { size: pts.len(), cap });
    }
    let n = pts.len();
    if n < 4 {
        return Ok(0);
    }
    let inf = PlaneLine::at_infinity(pts[0].x());
    let axis = PlaneLine::y_axis(pts[0].x());
    let mut ids: HashMap<PlanePoint<S>, u32> = HashMap::new();
    let mut intern = |p: PlanePoint<S>| {
        let next = ids.len() as u32;
        *ids.entry(p).or_insert(next)
    };
    let mut lines = vec![vec![None; n]; n];
    let mut dir = vec![vec![u32::MAX; n]; n];
    let mut cross_axis = vec![vec![u32::MAX; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let l = pts[i].join(&pts[j])?;
                dir[i][j] = intern(l.meet(&inf)?);
                cross_axis[i][j] = intern(l.meet(&axis)?);
                lines[i][j] = Some(l);
            }
        }
    }
    let on_line = |i: usize, j: usize, k: usize| lines[i][j].as_ref().is_some_and(|l| l.contains(&pts[k]));
    Ok((0..n)
        .into_par_iter()
        .map(|g| {
            let mut c = 0u64;
            for h in (0..n).filter(|&h| h != g) {
                for u in (0..n).filter(|&u| u != g) {
                    for v in (0..n).filter(|&v| v != u && v != h) {
                        if dir[g][h] == dir[u][v]
                            && cross_axis[g][u] == cross_axis[h][v]
                            && !(on_line(g, h, u) && on_line(g, h, v))
                        {
                            c += 1;
                        }
                    }
                }
            }
            c
        })
        .sum())
}

/// Energy quadruples of `P` split by the geometric quadrangle test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuadrangleCorrespondence {
    pub points: usize,
    pub energy: u64,
    /// Quadruples with `g⁻¹∘h` the identity.
    pub trivial: u64,
    /// Non-trivial quadruples with all four points on one line.
    pub collinear: u64,
    /// The remaining energy quadruples.
    pub nondegenerate: u64,
    pub quadrangles: u64,
    /// Non-degenerate energy quadruples failing the geometric test.
    pub energy_not_geometric: u64,
    /// Geometric quadrangles failing the energy relation.
    pub geometric_not_energy: u64,
    pub exhaustive: bool,
}

pub fn quadrangle_energy_correspondence<S: Scalar>(points: &[PlanePoint<S>]) -> Result<QuadrangleCorrespondence> {
    let pts = check_quadrangle_input(points)?;
    let maps: Vec<AffineMap<S>> = pts
        .iter()
        .map(|p| AffineMap::new(p.x().clone(), p.y().clone()))
        .collect::<Result<_>>()?;
    let mut buckets: BTreeMap<AffineMap<S>, Vec<(usize, usize)>> = BTreeMap::new();
    for (i, g) in maps.iter().enumerate() {
        for (j, h) in maps.iter().enumerate() {
            buckets.entry(g.quotient(h)).or_default().push((i, j));
        }
    }
    let (mut energy, mut trivial, mut collinear, mut nondeg, mut missed) = (0u64, 0u64, 0u64, 0u64, 0u64);
    for (t, pairs) in &buckets {
        let r = pairs.len() as u64;
        energy += r * r;
        if t.is_identity() {
            trivial += r * r;
            continue;
        }
        for &(g, h) in pairs {
            for &(u, v) in pairs {
                let q = [&pts[g], &pts[h], &pts[u], &pts[v]];
                if collinear4(q) {
                    collinear += 1;
                } else {
                    nondeg += 1;
                    missed += u64::from(!is_quadrangle(q[0], q[1], q[2], q[3]));
                }
            }
        }
    }
    let geometric = quadrangle_list(&pts);
    let wrong = geometric
        .iter()
        .filter(|[g, h, u, v]| maps[*g].quotient(&maps[*h]) != maps[*u].quotient(&maps[*v]))
        .count() as u64;
    let quadrangles = geometric.len() as u64;
    Ok(QuadrangleCorrespondence {
        points: pts.len(),
        energy,
        trivial,
        collinear,
        nondegenerate: nondeg,
        quadrangles,
        energy_not_geometric: missed,
        geometric_not_energy: wrong,
        exhaustive: missed == 0 && wrong == 0 && quadrangles == nondeg,
    })
}

/// Points `(a, b)` for the elements of `A`.
pub fn points_of_set<F: Field>(a: &AffineSet<F>) -> Vec<PlanePoint<F::Elem>> {
    a.iter().map(|g| PlanePoint::affine(g.a().clone(), g.b().clone())).collect()
}

/// The set of maps `(x, y)` for affine points with `x ≠ 0`.
pub fn set_of_points<F: Field>(field: F, points: &[PlanePoint<F::Elem>]) -> Result<AffineSet<F>> {
    let maps = check_quadrangle_input(points)?
        .into_iter()
        .map(|p| AffineMap::new(p.x().clone(), p.y().clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(AffineSet::new(field, maps))
}

/// `A × A` as affine points.
pub fn grid_points<S: Scalar>(xs: &[S]) -> Vec<PlanePoint<S>> {
    xs.iter()
        .flat_map(|x| xs.iter().map(move |y| PlanePoint::affine(x.clone(), y.clone())))
        .collect()
}

/// Parses `x y` or `x:y:z` rows.
pub fn parse_points<F: Field>(field: &F, text: &str) -> Result<Vec<PlanePoint<F::Elem>>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = if line.contains(':') {
            line.split(':').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        let vals = parts.iter().map(|t| field.parse(t)).collect::<Result<Vec<_>>>()?;
        let p = match <[F::Elem; 2]>::try_from(vals.clone()) {
            Ok([x, y]) if !line.contains(':') => PlanePoint::affine(x, y),
            _ => PlanePoint::new(<[F::Elem; 3]>::try_from(vals).map_err(|_| Error::Parse(line.to_string()))?)?,
        };
        out.push(p);
    }
    Ok(out)
}

/// Parses a line given as `a:b:c`.
pub fn parse_line<F: Field>(field: &F, text: &str) -> Result<PlaneLine<F::Elem>> {
    let vals = text.split(':').map(|t| field.parse(t.trim())).collect::<Result<Vec<_>>>()?;
    PlaneLine::new(<[F::Elem; 3]>::try_from(vals).map_err(|_| Error::Parse(text.to_string()))?)
}

pub fn format_points<S: Scalar>(points: &[PlanePoint<S>]) -> String {
    points.iter().map(|p| format!("{p}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::energy;
    use crate::scalar::{PrimeField, Rational, RationalField};

    fn q(v: i64) -> Rational {
        RationalField.from_i64(v)
    }

    fn p(x: i64, y: i64) -> PlanePoint<Rational> {
        PlanePoint::affine(q(x), q(y))
    }

    fn line(a: i64, b: i64, c: i64) -> PlaneLine<Rational> {
        PlaneLine::new([q(a), q(b), q(c)]).unwrap()
    }

    fn square() -> Vec<PlanePoint<Rational>> {
        vec![p(0, 0), p(1, 0), p(0, 1), p(1, 1)]
    }

    #[test]
    fn canonical_forms() {
        let inf = PlaneLine::at_infinity(&q(0));
        assert_eq!(inf, line(0, 0, 5));
        assert_eq!(PlanePoint::new([q(0), q(3), q(0)]).unwrap().to_string(), "0:1:0");
        assert_eq!(PlanePoint::new([q(2), q(4), q(2)]).unwrap(), p(1, 2));
    }

    #[test]
    fn span_examples() {
        assert_eq!(span_lines(&[p(1, 1), p(2, 5)]).unwrap().len(), 1);
        assert_eq!(span_lines(&square()).unwrap().len(), 6);
        assert_eq!(span_lines(&[p(1, 1), p(2, 2), p(3, 3)]).unwrap().len(), 1);
        assert_eq!(span_lines(&[p(1, 1)]).unwrap_err(), Error::TooFewPoints(1));
    }

    #[test]
    fn shadow_examples() {
        let s = shadow(&square(), &line(1, 0, -2)).unwrap();
        assert_eq!(s.len(), 5);
        assert!(s.contains(&PlanePoint::new([q(0), q(1), q(0)]).unwrap()));
        assert_eq!(shadow(&[p(1, 1), p(3, 2)], &line(1, 0, -7)).unwrap().len(), 1);
        let dirs = shadow(&square(), &PlaneLine::at_infinity(&q(0))).unwrap();
        assert_eq!(dirs.len(), 4);
        assert!(matches!(shadow(&square(), &line(1, 0, -1)), Err(Error::LineMeetsP(_))));
    }

    #[test]
    fn normalize_identity_and_translation() {
        let inf = PlaneLine::at_infinity(&q(0));
        let t = normalize_two_lines(&line(1, 0, 0), &inf).unwrap();
        assert_eq!(t, ProjectiveMap2::identity(&q(0)));
        let t = normalize_two_lines(&line(1, 0, -1), &inf).unwrap();
        assert_eq!(t.apply(&p(1, 5)), p(0, 5));
        assert_eq!(t.apply(&p(3, -2)), p(2, -2));
        assert_eq!(normalize_two_lines(&inf, &inf).unwrap_err(), Error::EqualLines);
    }

    #[test]
    fn normalize_axes() {
        let (l1, l2) = (line(0, 1, 0), line(1, 0, 0));
        let t = normalize_two_lines(&l1, &l2).unwrap();
        let axis = PlaneLine::y_axis(&q(0));
        let inf = PlaneLine::at_infinity(&q(0));
        for x in 1..5 {
            assert!(axis.contains(&t.apply(&p(x, 0))));
            assert!(inf.contains(&t.apply(&p(0, x))));
        }
        assert_eq!(t.apply_line(&l1), axis);
        assert_eq!(t.apply_line(&l2), inf);
        // lines through l1 ∩ l2 become vertical
        let through = t.apply_line(&line(1, -3, 0));
        assert!(through.coeffs()[1].is_zero());
    }

    #[test]
    fn normalize_over_small_field() {
        let f = PrimeField::new(3).unwrap();
        let l = |a, b, c| PlaneLine::new([f.from_i64(a), f.from_i64(b), f.from_i64(c)]).unwrap();
        let (l1, l2) = (l(1, 1, 1), l(1, 2, 0));
        let t = normalize_two_lines(&l1, &l2).unwrap();
        assert_eq!(t.apply_line(&l1), PlaneLine::y_axis(&f.zero()));
        assert_eq!(t.apply_line(&l2), PlaneLine::at_infinity(&f.zero()));
    }

    #[test]
    fn projective_inverse() {
        let t = normalize_two_lines(&line(2, 3, 1), &line(1, -1, 4)).unwrap();
        let back = t.compose(&t.inverse());
        assert_eq!(back, ProjectiveMap2::identity(&q(0)));
        let pts = vec![p(1, 1), p(2, 2), p(3, 3)];
        let img = apply_projective(&t, &pts);
        assert_eq!(span_lines(&img).unwrap().len(), 1);
    }

    #[test]
    fn shadow_check_examples() {
        let inf = PlaneLine::at_infinity(&q(0));
        let r = shadow_incidence_check(&[p(1, 1), p(2, 3)], &line(1, 0, 0), &inf).unwrap();
        assert_eq!((r.lhs, r.vertical_incidences), (2, 0));
        assert!(r.holds && r.rhs >= 2);
        let five = [p(1, 2), p(2, 7), p(3, -1), p(5, 4), p(7, 11)];
        let r = shadow_incidence_check(&five, &line(1, 1, -100), &line(3, -1, 50)).unwrap();
        assert_eq!(r.removed, 0);
        assert!(r.holds, "{r:?}");
        let grid: Vec<_> = (1..=4).flat_map(|x| (1..=4).map(move |y| p(x, y))).collect();
        let r = shadow_incidence_check(&grid, &line(1, 0, 0), &inf).unwrap();
        assert!(r.holds);
        assert_eq!(r.vertical_incidences, 16);
        let r = shadow_incidence_check(&grid, &line(1, 0, -1), &line(0, 1, -1)).unwrap();
        assert_eq!(r.removed, 7);
    }

    #[test]
    fn beck_examples() {
        let half = BigRational::new(1.into(), 2.into());
        let s = beck_point_stats(&[p(0, 0), p(1, 0), p(0, 1)], &half).unwrap();
        assert!(s.per_point.iter().all(|(_, c)| *c == 2));
        let s = beck_point_stats(&(1..=6).map(|t| p(t, t)).collect::<Vec<_>>(), &half).unwrap();
        assert_eq!(s.spanned_lines, 1);
        assert!(s.per_point.iter().all(|(_, c)| *c == 1));
        // points on the parabola y = x² are in general position
        let para: Vec<_> = (1..=20).map(|t| p(t, t * t)).collect();
        let s = beck_point_stats(&para, &half).unwrap();
        assert_eq!(s.spanned_lines, 190);
        assert!(s.per_point.iter().all(|(_, c)| *c == 19));
        assert_eq!(s.rich_points, 20);
    }

    #[test]
    fn quadrangle_examples() {
        let pts = [p(1, 0), p(2, 1), p(2, 2), p(4, 4)];
        assert!(is_quadrangle(&pts[0], &pts[1], &pts[2], &pts[3]));
        let n = quadrangles(&pts).unwrap();
        assert_eq!(n, quadrangles_bruteforce(&pts, 64).unwrap());
        assert!(n >= 1);
        let line4 = [p(1, 1), p(2, 2), p(3, 3), p(4, 4)];
        assert_eq!(quadrangles(&line4).unwrap(), 0);
        assert!(matches!(quadrangles(&[p(0, 1)]), Err(Error::PointOnYAxis(_))));
    }

    #[test]
    fn vertical_sides_count() {
        // gu and hv are vertical and meet the y-axis at (0:1:0)
        let sq = [p(1, 0), p(2, 0), p(1, 1), p(2, 1)];
        assert!(is_quadrangle(&sq[0], &sq[1], &sq[2], &sq[3]));
        let r = quadrangle_energy_correspondence(&sq).unwrap();
        assert!(r.exhaustive, "{r:?}");
    }

    #[test]
    fn correspondence_examples() {
        let pts = [p(1, 0), p(2, 1), p(2, 2), p(4, 4)];
        let r = quadrangle_energy_correspondence(&pts).unwrap();
        assert!(r.exhaustive, "{r:?}");
        assert_eq!(r.quadrangles, quadrangles_bruteforce(&pts, 64).unwrap());
        let set = set_of_points(RationalField, &pts).unwrap();
        assert_eq!(r.energy, energy(&set));
        let column = [p(3, 1), p(3, 2), p(3, 5), p(3, 7)];
        let r = quadrangle_energy_correspondence(&column).unwrap();
        assert_eq!((r.quadrangles, r.nondegenerate), (0, 0));
        assert!(r.exhaustive);
    }

    #[test]
    fn reflection_symmetry() {
        let xs: Vec<_> = [1, 2, 3, 5].map(q).to_vec();
        let grid = grid_points(&xs);
        for l in [line(1, 2, -100), line(3, -7, 2), line(1, 0, -4)] {
            assert_eq!(shadow(&grid, &l).unwrap().len(), shadow(&grid, &l.reflect()).unwrap().len());
        }
    }

    #[test]
    fn text_round_trip() {
        let f = RationalField;
        let pts = parse_points(&f, "1 2\n0:1:0\n3/2 -1 # c\n").unwrap();
        assert_eq!(pts[0], p(1, 2));
        assert!(!pts[1].is_affine());
        assert_eq!(parse_points(&f, &format_points(&pts)).unwrap(), pts);
        assert_eq!(parse_line(&f, "0:0:3").unwrap(), PlaneLine::at_infinity(&q(0)));
        assert!(parse_line(&f, "1:2").is_err());
    }
}
