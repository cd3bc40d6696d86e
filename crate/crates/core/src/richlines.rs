//! Lines of the form `y = ax + b` against grids `S × T`.
//!
//! A line set is an [`AffineSet`]: the map `(a, b)` is the line `y = ax + b`,
//! so horizontal lines cannot occur and vertical lines are not representable.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::affine::{AffineMap, AffineSet};
use crate::bounds::{ratio, root_lower, Exact, Measured};
use crate::energy::{difference_energy, energy, scalar_energy_add, scalar_energy_mul};
use crate::error::{Error, Result};
use crate::scalar::{Field, FieldSpec, Scalar};

/// Exponent in the rich-line structure statement: 12 over `Q`, 16 over `F_p`.
pub fn structure_exponent(spec: FieldSpec) -> u32 {
    match spec {
        FieldSpec::Rational => 12,
        FieldSpec::Prime(_) => 16,
    }
}

fn sorted_set<S: Scalar>(xs: impl IntoIterator<Item = S>) -> Vec<S> {
    xs.into_iter().collect::<BTreeSet<_>>().into_iter().collect()
}

#[derive(Clone, Debug)]
pub struct GridInstance<F: Field> {
    s: Vec<F::Elem>,
    t: Vec<F::Elem>,
    lines: AffineSet<F>,
    alpha: BigRational,
    rejected: usize,
}

impl<F: Field> GridInstance<F> {
    /// Builds an instance from raw `(a, b)` rows; rows with `a = 0` are
    /// dropped and counted.
    pub fn new(
        field: F,
        s: impl IntoIterator<Item = F::Elem>,
        t: impl IntoIterator<Item = F::Elem>,
        rows: impl IntoIterator<Item = (F::Elem, F::Elem)>,
        alpha: BigRational,
    ) -> Result<Self> {
        let (s, t) = (sorted_set(s), sorted_set(t));
        if s.is_empty() || t.is_empty() {
            return Err(Error::Config("grid sides must be nonempty".into()));
        }
        if !alpha.is_positive() || alpha > BigRational::one() {
            return Err(Error::Config(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        let mut rejected = 0;
        let mut maps = Vec::new();
        for (a, b) in rows {
            match AffineMap::new(a, b) {
                Ok(g) => maps.push(g),
                Err(_) => rejected += 1,
            }
        }
        Ok(GridInstance { s, t, lines: AffineSet::new(field, maps), alpha, rejected })
    }

    /// `S = T = A`.
    pub fn square(field: F, a: &[F::Elem], lines: AffineSet<F>, alpha: BigRational) -> Result<Self> {
        let rows: Vec<_> = lines.iter().map(|g| (g.a().clone(), g.b().clone())).collect();
        Self::new(field, a.iter().cloned(), a.iter().cloned(), rows, alpha)
    }

    pub fn s(&self) -> &[F::Elem] {
        &self.s
    }

    pub fn t(&self) -> &[F::Elem] {
        &self.t
    }

    pub fn lines(&self) -> &AffineSet<F> {
        &self.lines
    }

    pub fn alpha(&self) -> &BigRational {
        &self.alpha
    }

    /// Input rows dropped for having slope 0.
    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn is_square(&self) -> bool {
        self.s == self.t
    }

    /// `⌈α · min(|S|, |T|)⌉`
    pub fn threshold(&self) -> u64 {
        let n = BigInt::from(self.s.len().min(self.t.len()));
        let x = &self.alpha * BigRational::from_integer(n);
        let (q, r) = x.numer().div_rem(x.denom());
        let q: u64 = q.try_into().expect("threshold fits in u64");
        q + u64::from(!r.is_zero())
    }

    /// Parses the text format: `field:`, `alpha:`, `S:` and `T:` header rows,
    /// then one `a b` row per line.
    pub fn parse(field: F, text: &str) -> Result<Self> {
        let mut alpha = None;
        let (mut s, mut t) = (None, None);
        let mut rows = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let values = |rest: &str| rest.split_whitespace().map(|v| field.parse(v)).collect::<Result<Vec<_>>>();
            if let Some((key, rest)) = line.split_once(':') {
                match key.trim().to_ascii_lowercase().as_str() {
                    "field" => {
                        let spec: FieldSpec = rest.parse()?;
                        if spec != field.spec() {
                            return Err(Error::FieldMismatch);
                        }
                    }
                    "alpha" => {
                        alpha = Some(Exact::parse(rest).ok_or_else(|| Error::Parse(rest.trim().to_string()))?.0)
                    }
                    "s" => s = Some(values(rest)?),
                    "t" => t = Some(values(rest)?),
                    _ => return Err(Error::Parse(line.to_string())),
                }
                continue;
            }
            let v = values(line)?;
            let [a, b]: [F::Elem; 2] = v.try_into().map_err(|_| Error::Parse(line.to_string()))?;
            rows.push((a, b));
        }
        let missing = |what: &str| Error::Config(format!("grid file lacks an {what} row"));
        Self::new(
            field,
            s.ok_or_else(|| missing("S:"))?,
            t.ok_or_else(|| missing("T:"))?,
            rows,
            alpha.ok_or_else(|| missing("alpha:"))?,
        )
    }

    pub fn to_text(&self) -> String {
        let join = |xs: &[F::Elem]| xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
        let mut out = format!(
            "field: {}\nalpha: {}\nS: {}\nT: {}\n",
            self.lines.field().spec(),
            Exact(self.alpha.clone()),
            join(&self.s),
            join(&self.t)
        );
        for g in self.lines.iter() {
            out.push_str(&format!("{} {}\n", g.a(), g.b()));
        }
        out
    }
}

/// Incidences of each line with `S × T`, in line order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridIncidences<S> {
    pub per_line: Vec<(AffineMap<S>, u64)>,
    pub total: u64,
}

pub fn grid_incidences<F: Field>(inst: &GridInstance<F>) -> GridIncidences<F::Elem> {
    let t: HashSet<&F::Elem> = inst.t.iter().collect();
    let per_line: Vec<_> = inst
        .lines
        .elems()
        .par_iter()
        .map(|g| {
            let c = inst.s.iter().filter(|s| t.contains(&g.apply(s))).count() as u64;
            (g.clone(), c)
        })
        .collect();
    let total = per_line.iter().map(|(_, c)| c).sum();
    GridIncidences { per_line, total }
}

/// Lines meeting `S × T` in at least [`GridInstance::threshold`] points.
pub fn rich_lines<F: Field>(inst: &GridInstance<F>) -> AffineSet<F> {
    let cut = inst.threshold();
    let rich = grid_incidences(inst)
        .per_line
        .into_iter()
        .filter(|(_, c)| *c >= cut)
        .map(|(g, _)| g);
    AffineSet::new(inst.lines.field().clone(), rich)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelFamily<S> {
    pub slope: S,
    pub intercepts: Vec<S>,
}

/// Most common slope with its intercepts; ties go to the smallest slope.
pub fn max_parallel_family<F: Field>(lines: &AffineSet<F>) -> Option<ParallelFamily<F::Elem>> {
    let mut by_slope: BTreeMap<&F::Elem, Vec<F::Elem>> = BTreeMap::new();
    for g in lines.iter() {
        by_slope.entry(g.a()).or_default().push(g.b().clone());
    }
    let best = by_slope.values().map(Vec::len).max()?;
    let (slope, intercepts) = by_slope.into_iter().find(|(_, v)| v.len() == best)?;
    Some(ParallelFamily { slope: slope.clone(), intercepts })
}

/// Lines through a common point, or a single line when no two lines meet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pencil<S> {
    pub center: Option<(S, S)>,
    pub slopes: Vec<S>,
}

impl<S> Pencil<S> {
    pub fn size(&self) -> usize {
        self.slopes.len()
    }
}

fn intersection<S: Scalar>(g: &AffineMap<S>, h: &AffineMap<S>) -> Option<(S, S)> {
    let da = g.a().sub(h.a());
    if da.is_zero() {
        return None;
    }
    let x = h.b().sub(g.b()).div(&da).expect("slopes differ");
    let y = g.apply(&x);
    Some((x, y))
}

fn single_line<S: Scalar>(lines: &[AffineMap<S>]) -> Pencil<S> {
    Pencil { center: None, slopes: vec![lines[0].a().clone()] }
}

/// Affine point on the most lines, by pairwise intersection voting.
///
/// Ties go to the smallest point. When every pair is parallel there is no
/// common point and the pencil is the first line alone.
pub fn max_concurrent_pencil<F: Field>(lines: &AffineSet<F>) -> Result<Pencil<F::Elem>> {
    let ls = lines.elems();
    if ls.len() < 2 {
        return Err(Error::TooFewLines(ls.len()));
    }
    let votes: HashMap<(F::Elem, F::Elem), u64> = (0..ls.len())
        .into_par_iter()
        .fold(HashMap::new, |mut acc, i| {
            for h in &ls[i + 1..] {
                if let Some(p) = intersection(&ls[i], h) {
                    *acc.entry(p).or_insert(0) += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    // a point on r lines collects r(r−1)/2 votes, so most votes means most lines
    let Some(best) = votes.values().max().copied() else {
        return Ok(single_line(ls));
    };
    let center = votes.into_iter().filter(|(_, v)| *v == best).map(|(p, _)| p).min().expect("nonempty");
    Ok(pencil_at(ls, center))
}

fn pencil_at<S: Scalar>(ls: &[AffineMap<S>], (x, y): (S, S)) -> Pencil<S> {
    let slopes = ls.iter().filter(|g| g.apply(&x) == y).map(|g| g.a().clone()).collect();
    Pencil { center: Some((x, y)), slopes }
}

/// Cubic oracle: every pairwise intersection is tested against every line.
pub fn max_concurrent_pencil_bruteforce<F: Field>(lines: &AffineSet<F>) -> Result<Pencil<F::Elem>> {
    let ls = lines.elems();
    if ls.len() < 2 {
        return Err(Error::TooFewLines(ls.len()));
    }
    let mut best: Option<(usize, (F::Elem, F::Elem))> = None;
    for i in 0..ls.len() {
        for j in i + 1..ls.len() {
            let Some(p) = intersection(&ls[i], &ls[j]) else { continue };
            let on = ls.iter().filter(|g| g.apply(&p.0) == p.1).count();
            let better = match &best {
                None => true,
                Some((n, q)) => on > *n || (on == *n && p < *q),
            };
            if better {
                best = Some((on, p));
            }
        }
    }
    Ok(match best {
        Some((_, p)) => pencil_at(ls, p),
        None => single_line(ls),
    })
}

/// Each link of the parallel-family chain, checked exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParallelChain {
    pub slope: String,
    pub family_size: usize,
    /// `Σ_β r_{A−γA}(β)` over the family.
    pub sum_r: u64,
    pub sum_r_squared: u64,
    /// `E⁺(A, γA)`
    pub mixed_energy: u64,
    /// `E⁺(A)`
    pub additive_energy: u64,
    /// `⌈αn⌉·|B| ≤ Σ r`
    pub rich_link: bool,
    /// `(Σ r)² ≤ |B| Σ r²`
    pub cs_link: bool,
    pub mixed_link: bool,
    pub energy_link: bool,
    /// `(Σ r)² ≤ |B| E⁺(A)`
    pub holds: bool,
}

/// Each link of the pencil chain, checked exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PencilChain {
    pub center: Option<(String, String)>,
    pub pencil_size: usize,
    /// `Σ_β r_{(A−y₀)/(A−x₀)}(β)` over the pencil.
    pub sum_r: u64,
    pub sum_r_squared: u64,
    /// `#{(y−y₀)/(x−x₀) = (y′−y₀)/(x′−x₀)}`
    pub ratio_energy: u64,
    /// `E^×(A − x₀)`
    pub mul_energy_x: u64,
    /// `E^×(A − y₀)`
    pub mul_energy_y: u64,
    /// Lines through a center in `A × A` lose that point from `r`, so this
    /// link may fail without contradicting anything.
    pub rich_link: bool,
    pub cs_link: bool,
    pub mixed_link: bool,
    /// `ratio_energy² ≤ E^×(A−x₀) E^×(A−y₀)`
    pub energy_link: bool,
    /// `(Σ r)⁴ ≤ |B|² E^×(A−x₀) E^×(A−y₀)`
    pub holds: bool,
}

/// Hypotheses on `α` and `p` for the structure statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Guards {
    /// `α < n^{-1/2}`
    pub alpha_too_small: bool,
    /// `n^{-1/2} ≤ α < 2n^{-1/2}`
    pub alpha_warning: bool,
    /// `p < max{k, α^{-2}n}`; absent over `Q`.
    pub p_too_small: Option<bool>,
}

/// Measured sides of the two structural alternatives, with the exponent
/// `C` fixed by the field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureRatios {
    pub exponent: u32,
    /// `|B_parallel| / (α^C n^{-2} k³)`
    pub parallel_size: Measured,
    /// `E⁺(A) / (α^{2+C} k³)`
    pub additive_energy: Measured,
    /// `|B_pencil| / (α^{C/2} n^{-1} k²)`
    pub pencil_size: Measured,
    /// `max_s E^×(A − s) / (α^{2+C/2} n k²)` with `s ∈ {x₀, y₀}`
    pub mul_energy: Option<Measured>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RichLineReport {
    pub field: FieldSpec,
    pub n: usize,
    pub alpha: Exact,
    pub threshold: u64,
    pub lines: usize,
    pub rejected: usize,
    pub incidences: u64,
    /// `(a, b, count)` for every input line.
    pub per_line: Vec<(String, String, u64)>,
    pub rich: usize,
    pub parallel: Option<ParallelChain>,
    pub pencil: Option<PencilChain>,
    pub guards: Guards,
    pub ratios: Option<StructureRatios>,
}

fn parallel_chain<S: Scalar>(a: &[S], family: &ParallelFamily<S>, cut: u64) -> ParallelChain {
    let set: HashSet<&S> = a.iter().collect();
    let gamma = &family.slope;
    let r: Vec<u64> = family
        .intercepts
        .iter()
        .map(|beta| a.iter().filter(|x| set.contains(&gamma.mul(x).add(beta))).count() as u64)
        .collect();
    let sum_r: u64 = r.iter().sum();
    let sum_r_squared: u64 = r.iter().map(|x| x * x).sum();
    let scaled: Vec<S> = a.iter().map(|x| gamma.mul(x)).collect();
    let mixed = difference_energy(a, &scaled);
    let add = scalar_energy_add(a);
    let b = family.intercepts.len() as u128;
    let sq = (sum_r as u128).pow(2);
    ParallelChain {
        slope: gamma.to_string(),
        family_size: family.intercepts.len(),
        sum_r,
        sum_r_squared,
        mixed_energy: mixed,
        additive_energy: add,
        rich_link: cut as u128 * b <= sum_r as u128,
        cs_link: sq <= b * sum_r_squared as u128,
        mixed_link: sum_r_squared <= mixed,
        energy_link: mixed <= add,
        holds: sq <= b * add as u128,
    }
}

fn pencil_chain<S: Scalar>(a: &[S], pencil: &Pencil<S>, cut: u64) -> Option<PencilChain> {
    let (x0, y0) = pencil.center.clone()?;
    let set: HashSet<&S> = a.iter().collect();
    // r(β) counts x ∈ A, x ≠ x₀, with y₀ + β(x − x₀) ∈ A
    let r: Vec<u64> = pencil
        .slopes
        .iter()
        .map(|beta| {
            a.iter()
                .filter(|x| **x != x0 && set.contains(&y0.add(&beta.mul(&x.sub(&x0)))))
                .count() as u64
        })
        .collect();
    let sum_r: u64 = r.iter().sum();
    let sum_r_squared: u64 = r.iter().map(|x| x * x).sum();
    let mut quotients: HashMap<S, u64> = HashMap::new();
    for x in a.iter().filter(|x| **x != x0) {
        let dx = x.sub(&x0);
        for y in a.iter().filter(|y| **y != y0) {
            *quotients.entry(y.sub(&y0).div(&dx).expect("dx nonzero")).or_default() += 1;
        }
    }
    let ratio_energy: u64 = quotients.values().map(|c| c * c).sum();
    let ex = scalar_energy_mul(a, &x0).energy;
    let ey = scalar_energy_mul(a, &y0).energy;
    let b = pencil.slopes.len() as u128;
    let s = sum_r as u128;
    Some(PencilChain {
        center: Some((x0.to_string(), y0.to_string())),
        pencil_size: pencil.slopes.len(),
        sum_r,
        sum_r_squared,
        ratio_energy,
        mul_energy_x: ex,
        mul_energy_y: ey,
        rich_link: cut as u128 * b <= s,
        cs_link: s * s <= b * sum_r_squared as u128,
        mixed_link: sum_r_squared <= ratio_energy,
        energy_link: (ratio_energy as u128).pow(2) <= ex as u128 * ey as u128,
        holds: BigInt::from(s).pow(4) <= BigInt::from(b * b) * BigInt::from(ex) * BigInt::from(ey),
    })
}

fn guards(spec: FieldSpec, alpha: &BigRational, n: usize, k: usize) -> Guards {
    let a2n = alpha * alpha * BigRational::from_integer(n.into());
    let one = BigRational::one();
    let four = BigRational::from_integer(4.into());
    let p_too_small = match spec {
        FieldSpec::Prime(p) => {
            let p = BigRational::from_integer(p.into());
            let need = BigRational::from_integer(n.into()) / (alpha * alpha);
            Some(p < BigRational::from_integer(k.into()) || p < need)
        }
        FieldSpec::Rational => None,
    };
    Guards {
        alpha_too_small: a2n < one,
        alpha_warning: a2n >= one && a2n < four,
        p_too_small,
    }
}

fn measured(num: u64, den: &BigRational) -> Measured {
    ratio(&BigRational::from_integer(num.into()), den).unwrap_or_default().into()
}

fn structure_ratios(
    spec: FieldSpec,
    alpha: &BigRational,
    n: usize,
    k: usize,
    parallel: Option<&ParallelChain>,
    pencil: &Pencil<impl Scalar>,
    pencil_chain: Option<&PencilChain>,
    additive_energy: u64,
) -> Option<StructureRatios> {
    if k == 0 {
        return None;
    }
    let c = structure_exponent(spec) as i32;
    let n = BigRational::from_integer(n.into());
    let k = BigRational::from_integer(k.into());
    let k2 = &k * &k;
    let k3 = &k2 * &k;
    let a = |e: i32| alpha.pow(e);
    let family = parallel.map_or(0, |p| p.family_size) as u64;
    Some(StructureRatios {
        exponent: c as u32,
        parallel_size: measured(family, &(a(c) * &k3 / (&n * &n))),
        additive_energy: measured(additive_energy, &(a(2 + c) * &k3)),
        pencil_size: measured(pencil.size() as u64, &(a(c / 2) * &k2 / &n)),
        mul_energy: pencil_chain.map(|pc| measured(pc.mul_energy_x.max(pc.mul_energy_y), &(a(2 + c / 2) * &n * &k2))),
    })
}

/// Rich lines of `A × A` with their parallel and concurrent structure.
pub fn structure_report<F: Field>(inst: &GridInstance<F>) -> Result<RichLineReport> {
    if !inst.is_square() {
        return Err(Error::Config("structure report needs S = T".into()));
    }
    let a = &inst.s;
    let inc = grid_incidences(inst);
    let cut = inst.threshold();
    let rich = rich_lines(inst);
    let spec = inst.lines.field().spec();
    let family = max_parallel_family(&rich);
    let parallel = family.as_ref().map(|f| parallel_chain(a, f, cut));
    let pencil = if rich.len() >= 2 {
        Some(max_concurrent_pencil(&rich)?)
    } else {
        None
    };
    let pchain = pencil.as_ref().and_then(|p| pencil_chain(a, p, cut));
    let ratios = match &pencil {
        Some(p) => structure_ratios(
            spec,
            &inst.alpha,
            a.len(),
            rich.len(),
            parallel.as_ref(),
            p,
            pchain.as_ref(),
            scalar_energy_add(a),
        ),
        None => None,
    };
    Ok(RichLineReport {
        field: spec,
        n: a.len(),
        alpha: Exact(inst.alpha.clone()),
        threshold: cut,
        lines: inst.lines.len(),
        rejected: inst.rejected,
        incidences: inc.total,
        per_line: inc
            .per_line
            .iter()
            .map(|(g, c)| (g.a().to_string(), g.b().to_string(), *c))
            .collect(),
        rich: rich.len(),
        parallel,
        pencil: pchain,
        guards: guards(spec, &inst.alpha, a.len(), rich.len()),
        ratios,
    })
}

/// `I(S × T, A)` against the grid incidence bound for lines `A`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElekesReport {
    pub field: FieldSpec,
    pub s: usize,
    pub t: usize,
    pub lines: usize,
    pub incidences: u64,
    pub energy: u64,
    /// Energy-dependent term of the bound.
    pub main_term: Measured,
    /// `|T|^{1/2}|A|` term, with the `max{1, |S|²/p}` factor over `F_p`.
    pub linear_term: Measured,
    pub ratio: Measured,
}

pub fn elekes_incidence_bound_check<F: Field>(s: &[F::Elem], t: &[F::Elem], a: &AffineSet<F>) -> Result<ElekesReport> {
    if s.is_empty() || t.is_empty() || a.is_empty() {
        return Err(Error::Config("bound check needs nonempty S, T and lines".into()));
    }
    let rows: Vec<_> = a.iter().map(|g| (g.a().clone(), g.b().clone())).collect();
    let inst = GridInstance::new(a.field().clone(), s.to_vec(), t.to_vec(), rows, BigRational::one())?;
    let incidences = grid_incidences(&inst).total;
    let e = energy(a);
    let (ns, nt, na) = (
        BigInt::from(inst.s.len()),
        BigInt::from(inst.t.len()),
        BigInt::from(a.len()),
    );
    let eb = BigInt::from(e);
    let whole = |x: BigInt| BigRational::from_integer(x);
    let (main, linear) = match a.field().spec() {
        FieldSpec::Rational => (
            root_lower(&whole(nt.pow(3) * ns.pow(4) * &eb * na.pow(2)), 6),
            root_lower(&whole(&nt * na.pow(2)), 2),
        ),
        FieldSpec::Prime(p) => {
            let spread = BigRational::new(ns.pow(2), BigInt::from(p)).max(BigRational::one());
            (
                root_lower(&whole(nt.pow(4) * ns.pow(5) * &eb * na.pow(4)), 8),
                root_lower(&(whole(&nt * na.pow(2)) * spread), 2),
            )
        }
    };
    let rhs = &main + &linear;
    Ok(ElekesReport {
        field: a.field().spec(),
        s: inst.s.len(),
        t: inst.t.len(),
        lines: a.len(),
        incidences,
        energy: e,
        main_term: main.into(),
        linear_term: linear.into(),
        ratio: ratio(&BigRational::from_integer(incidences.into()), &rhs)
            .expect("positive bound")
            .into(),
    })
}
