//! Energies of finite sets of affine maps.
//!
//! `E(A)` counts quadruples `(g,h,u,v) ∈ A⁴` with `g⁻¹∘h = u⁻¹∘v`; `E*(A)`
//! uses `g∘h = u∘v`. Both are sums of squares of a pair-representation
//! table built in `O(|A|²)`. Every energy quadruple satisfies
//! `g₁v₁ = h₁u₁`, which splits `E(A)` into slices `Q_C` indexed by the
//! nonzero constant `C`.
//!
//! The brute-force counters in this module enumerate quadruples directly and
//! share nothing with the hashed path beyond `compose`/`quotient`.

use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;

use crate::affine::{
    check_same_field, max_on_line, max_on_vertical, AffineMap, AffineSet,
    ProductMode,
};
use crate::bounds::{int, ratio, root_lower, Exact, Measured};
use crate::error::{Error, Result};
use crate::scalar::{Field, FieldSpec, Scalar};

/// Default refusal threshold for the `O(|A|⁴)` counters.
pub const DEFAULT_ORACLE_CAP: usize = 64;

/// Representation counts `r(t) = #{(g,h) ∈ A×B : g⁻¹∘h = t}` (or `g∘h = t`).
#[derive(Clone, Debug)]
pub struct QuotientTable<S: Scalar> {
    entries: HashMap<AffineMap<S>, u64>,
    mode: ProductMode,
}

impl<S: Scalar> QuotientTable<S> {
    pub fn build<F: Field<Elem = S>>(a: &AffineSet<F>, b: &AffineSet<F>, mode: ProductMode) -> Self {
        let entries = a
            .elems()
            .par_iter()
            .fold(HashMap::new, |mut acc: HashMap<AffineMap<S>, u64>, g| {
                for h in b.elems() {
                    let t = match mode {
                        ProductMode::Quotient => g.quotient(h),
                        ProductMode::Product => g.compose(h),
                    };
                    *acc.entry(t).or_default() += 1;
                }
                acc
            })
            .reduce(HashMap::new, merge_counts);
        QuotientTable { entries, mode }
    }

    pub fn mode(&self) -> ProductMode {
        self.mode
    }

    pub fn count(&self, t: &AffineMap<S>) -> u64 {
        self.entries.get(t).copied().unwrap_or(0)
    }

    /// Number of distinct values, i.e. `|A⁻¹B|` or `|AB|`.
    pub fn support(&self) -> usize {
        self.entries.len()
    }

    pub fn total(&self) -> u64 {
        self.entries.values().sum()
    }

    pub fn sum_of_squares(&self) -> u64 {
        self.entries.values().map(|r| r * r).sum()
    }

    /// Entries in canonical order.
    pub fn sorted(&self) -> Vec<(AffineMap<S>, u64)> {
        let mut v: Vec<_> = self.entries.iter().map(|(t, r)| (t.clone(), *r)).collect();
        v.sort_unstable();
        v
    }
}

fn merge_counts<K: Hash + Eq>(mut x: HashMap<K, u64>, y: HashMap<K, u64>) -> HashMap<K, u64> {
    if x.len() < y.len() {
        return merge_counts(y, x);
    }
    for (k, v) in y {
        *x.entry(k).or_default() += v;
    }
    x
}

/// `E(A) = Σ_t r(t)²` over the quotient table.
pub fn energy<F: Field>(a: &AffineSet<F>) -> u64 {
    QuotientTable::build(a, a, ProductMode::Quotient).sum_of_squares()
}

/// `E*(A)` over the product table.
pub fn energy_star<F: Field>(a: &AffineSet<F>) -> u64 {
    QuotientTable::build(a, a, ProductMode::Product).sum_of_squares()
}

/// `E(A,B) = #{g,u ∈ A; h,v ∈ B : g⁻¹∘h = u⁻¹∘v}`.
pub fn energy_asym<F: Field>(a: &AffineSet<F>, b: &AffineSet<F>) -> Result<u64> {
    check_same_field(a, b)?;
    Ok(QuotientTable::build(a, b, ProductMode::Quotient).sum_of_squares())
}

/// Which relation the brute-force counter checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMode {
    /// `g⁻¹∘h = u⁻¹∘v`
    E,
    /// `g∘h = u∘v`
    Estar,
}

fn check_cap(size: usize, cap: usize) -> Result<()> {
    if size > cap {
        return Err(Error::OracleCapExceeded { size, cap });
    }
    Ok(())
}

// t[i][j] as an interned id, so the quadruple loops compare integers
fn pair_matrix<S: Scalar>(
    left: &[AffineMap<S>],
    right: &[AffineMap<S>],
    mode: OracleMode,
) -> Vec<Vec<u32>> {
    let mut ids: HashMap<AffineMap<S>, u32> = HashMap::new();
    left.iter()
        .map(|g| {
            right
                .iter()
                .map(|h| {
                    let t = match mode {
                        OracleMode::E => g.inverse().compose(h),
                        OracleMode::Estar => g.compose(h),
                    };
                    let next = ids.len() as u32;
                    *ids.entry(t).or_insert(next)
                })
                .collect()
        })
        .collect()
}

/// Direct quadruple enumeration of `E(A)` or `E*(A)`.
pub fn energy_bruteforce<F: Field>(a: &AffineSet<F>, mode: OracleMode, cap: usize) -> Result<u64> {
    check_cap(a.len(), cap)?;
    let t = pair_matrix(a.elems(), a.elems(), mode);
    Ok(count_matching_pairs(&t))
}

/// Direct enumeration of `E(A,B)`.
pub fn energy_asym_bruteforce<F: Field>(a: &AffineSet<F>, b: &AffineSet<F>, cap: usize) -> Result<u64> {
    check_same_field(a, b)?;
    check_cap(a.len().max(b.len()), cap)?;
    let t = pair_matrix(a.elems(), b.elems(), OracleMode::E);
    Ok(count_matching_pairs(&t))
}

// counts ((i,j),(k,l)) with t[i][j] == t[k][l]
fn count_matching_pairs(t: &[Vec<u32>]) -> u64 {
    t.par_iter()
        .map(|row| {
            let mut c = 0u64;
            for x in row {
                for other in t {
                    c += other.iter().filter(|y| *y == x).count() as u64;
                }
            }
            c
        })
        .sum()
}

/// Pairs `(g, v) ∈ A×A` with `g₁v₁ = C`.
#[derive(Clone, Debug)]
pub struct CSlice<S: Scalar> {
    c: S,
    pairs: Vec<(AffineMap<S>, AffineMap<S>)>,
}

impl<S: Scalar> CSlice<S> {
    pub fn c(&self) -> &S {
        &self.c
    }

    pub fn pairs(&self) -> &[(AffineMap<S>, AffineMap<S>)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn by_slope<F: Field>(a: &AffineSet<F>) -> BTreeMap<&F::Elem, Vec<&AffineMap<F::Elem>>> {
    let mut cols: BTreeMap<&F::Elem, Vec<_>> = BTreeMap::new();
    for g in a.elems() {
        cols.entry(g.a()).or_default().push(g);
    }
    cols
}

/// The slice `𝒞_C`, in lexicographic order of `(g, v)`.
pub fn c_slice<F: Field>(a: &AffineSet<F>, c: &F::Elem) -> Result<CSlice<F::Elem>> {
    if c.is_zero() {
        return Err(Error::ZeroC);
    }
    let cols = by_slope(a);
    let mut pairs = Vec::new();
    for g in a.elems() {
        let v1 = c.div(g.a())?;
        if let Some(col) = cols.get(&v1) {
            pairs.extend(col.iter().map(|v| (g.clone(), (*v).clone())));
        }
    }
    Ok(CSlice { c: c.clone(), pairs })
}

/// `|𝒞_C|` for every realized `C`.
pub fn slice_sizes<F: Field>(a: &AffineSet<F>) -> BTreeMap<F::Elem, u64> {
    let cols = by_slope(a);
    let mut sizes = BTreeMap::new();
    for (x, cx) in &cols {
        for (y, cy) in &cols {
            *sizes.entry(x.mul(y)).or_default() += (cx.len() * cy.len()) as u64;
        }
    }
    sizes
}

/// `Q_C` for every realized `C`; the values sum to `E(A)`.
///
/// Pairs `(g,h)` are bucketed by `t = g⁻¹∘h`; two pairs of one bucket form
/// an energy quadruple with `C = g₁·u₁·t₁`, so each bucket only needs a
/// histogram of its left slopes.
#[allow(non_snake_case)]
pub fn decompose_by_C<F: Field>(a: &AffineSet<F>) -> BTreeMap<F::Elem, u64> {
    type Buckets<S> = HashMap<AffineMap<S>, HashMap<S, u64>>;
    let buckets: Buckets<F::Elem> = a
        .elems()
        .par_iter()
        .fold(HashMap::new, |mut acc: Buckets<F::Elem>, g| {
            for h in a.elems() {
                *acc.entry(g.quotient(h)).or_default().entry(g.a().clone()).or_default() += 1;
            }
            acc
        })
        .reduce(HashMap::new, |mut x, y| {
            for (t, hist) in y {
                let slot = x.entry(t).or_default();
                for (k, v) in hist {
                    *slot.entry(k).or_default() += v;
                }
            }
            x
        });
    let partials: Vec<HashMap<F::Elem, u64>> = buckets
        .par_iter()
        .fold(HashMap::new, |mut acc, (t, hist)| {
            for (x, cx) in hist {
                let xt = x.mul(t.a());
                for (y, cy) in hist {
                    *acc.entry(xt.mul(y)).or_default() += cx * cy;
                }
            }
            acc
        })
        .collect();
    let mut out = BTreeMap::new();
    for part in partials {
        for (c, q) in part {
            *out.entry(c).or_default() += q;
        }
    }
    out
}

/// `Q_C` by direct enumeration of energy quadruples.
pub fn decompose_bruteforce<F: Field>(a: &AffineSet<F>, cap: usize) -> Result<BTreeMap<F::Elem, u64>> {
    check_cap(a.len(), cap)?;
    let elems = a.elems();
    let t = pair_matrix(elems, elems, OracleMode::E);
    let mut out = BTreeMap::new();
    for (gi, g) in elems.iter().enumerate() {
        for hi in 0..elems.len() {
            for (ui, row) in t.iter().enumerate() {
                for (vi, v) in elems.iter().enumerate() {
                    if row[vi] == t[gi][hi] {
                        debug_assert_eq!(g.a().mul(v.a()), elems[hi].a().mul(elems[ui].a()));
                        *out.entry(g.a().mul(v.a())).or_default() += 1;
                    }
                }
            }
        }
    }
    Ok(out)
}

fn dedup_sorted<S: Scalar>(s: &[S]) -> Vec<S> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn energy_of_counts<K: Hash + Eq>(counts: HashMap<K, u64>) -> u64 {
    counts.into_values().map(|r| r * r).sum()
}

/// Additive energy `E⁺(S) = #{a+b = c+d}`.
pub fn scalar_energy_add<S: Scalar>(set: &[S]) -> u64 {
    let s = dedup_sorted(set);
    let mut sums: HashMap<S, u64> = HashMap::new();
    for x in &s {
        for y in &s {
            *sums.entry(x.add(y)).or_default() += 1;
        }
    }
    energy_of_counts(sums)
}

/// `Σ_β r_{X−Y}(β)²`, i.e. `#{x − y = x' − y'}`.
pub fn difference_energy<S: Scalar>(xs: &[S], ys: &[S]) -> u64 {
    let (xs, ys) = (dedup_sorted(xs), dedup_sorted(ys));
    let mut diffs: HashMap<S, u64> = HashMap::new();
    for x in &xs {
        for y in &ys {
            *diffs.entry(x.sub(y)).or_default() += 1;
        }
    }
    energy_of_counts(diffs)
}

/// Multiplicative energy of the nonzero part of a set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MulEnergy {
    pub energy: u64,
    /// Elements equal to the shift (they become 0 and are dropped).
    pub dropped: usize,
}

/// `E^×({x − shift : x ∈ S, x ≠ shift})`.
pub fn scalar_energy_mul<S: Scalar>(set: &[S], shift: &S) -> MulEnergy {
    let s = dedup_sorted(set);
    let shifted: Vec<S> = s.iter().map(|x| x.sub(shift)).filter(|x| !x.is_zero()).collect();
    let mut prods: HashMap<S, u64> = HashMap::new();
    for x in &shifted {
        for y in &shifted {
            *prods.entry(x.mul(y)).or_default() += 1;
        }
    }
    MulEnergy {
        energy: energy_of_counts(prods),
        dropped: s.len() - shifted.len(),
    }
}

/// One row of the per-`C` table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceRow {
    pub c: String,
    pub slice_size: u64,
    pub q_c: u64,
}

/// Positive-characteristic context of the main bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharConstraint {
    pub p: u64,
    pub m_times_size: u64,
    pub p_squared: u128,
    /// `m|A| ≤ p²`
    pub satisfied: bool,
    /// `m|A|·|A|²/p`, the extra term of the p-free variant.
    pub correction: Measured,
}

/// Everything computed about one set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub field: FieldSpec,
    pub size: usize,
    pub m: usize,
    #[serde(rename = "M")]
    pub big_m: usize,
    pub energy: u64,
    pub energy_star: u64,
    pub product_size: usize,
    pub quotient_size: usize,
    /// `max{E,E*} / (m^{1/2}|A|^{5/2} + M|A|²)`
    pub ratio_main: Measured,
    /// `min{|AA|,|A⁻¹A|} / (m^{-1/2}|A|^{3/2} + M^{-1}|A|²)`
    pub ratio_growth: Measured,
    /// `E / (M|A|²)`
    pub ratio_collinear: Measured,
    /// `E·|A⁻¹A| ≥ |A|⁴`
    pub cs_quotient: bool,
    /// `E*·|AA| ≥ |A|⁴`
    pub cs_product: bool,
    /// `E* ≤ E`
    pub e_star_le_e: bool,
    pub char_constraint: Option<CharConstraint>,
    pub slices: Vec<SliceRow>,
}

/// `max{E,E*}` against `m^{1/2}|A|^{5/2} + M|A|²`.
pub fn main_ratio(e_max: u64, size: u64, m: u64, big_m: u64) -> BigRational {
    let n = BigInt::from(size);
    let radicand = BigRational::from_integer(BigInt::from(m) * n.pow(5));
    let rhs = root_lower(&radicand, 2) + BigRational::from_integer(BigInt::from(big_m) * &n * &n);
    ratio(&int(e_max), &rhs).expect("rhs positive for nonempty sets")
}

/// `min{|AA|,|A⁻¹A|}` against `m^{-1/2}|A|^{3/2} + M^{-1}|A|²`.
pub fn growth_ratio(min_product: u64, size: u64, m: u64, big_m: u64) -> BigRational {
    let n = BigInt::from(size);
    let cube = BigRational::new(n.pow(3), BigInt::from(m));
    let rhs = root_lower(&cube, 2) + BigRational::new(&n * &n, BigInt::from(big_m));
    ratio(&int(min_product), &rhs).expect("rhs positive for nonempty sets")
}

/// Computes the full report and checks the exact identities along the way.
pub fn main_bound_report<F: Field>(a: &AffineSet<F>) -> Result<EnergyReport> {
    if a.is_empty() {
        return Err(Error::Config("energy report needs a nonempty set".into()));
    }
    let n = a.len() as u64;
    let quot = QuotientTable::build(a, a, ProductMode::Quotient);
    let prod = QuotientTable::build(a, a, ProductMode::Product);
    let (e, e_star) = (quot.sum_of_squares(), prod.sum_of_squares());
    let m = max_on_vertical(a) as u64;
    let big_m = max_on_line(a) as u64;
    let decomposition = decompose_by_C(a);
    let sizes = slice_sizes(a);

    let q_total: u64 = decomposition.values().sum();
    if q_total != e {
        return Err(Error::InvariantViolation(format!("sum of Q_C = {q_total} but E = {e}")));
    }
    let slice_total: u64 = sizes.values().sum();
    if slice_total != n * n {
        return Err(Error::InvariantViolation(format!(
            "sum of |C_C| = {slice_total} but |A|^2 = {}",
            n * n
        )));
    }
    if let Some((c, s)) = sizes.iter().find(|(_, s)| **s > m * n) {
        return Err(Error::InvariantViolation(format!("|C_{c}| = {s} exceeds m|A| = {}", m * n)));
    }
    if decomposition.keys().ne(sizes.keys()) {
        return Err(Error::InvariantViolation("realized C differ between Q_C and slices".into()));
    }
    let slices = sizes
        .iter()
        .map(|(c, s)| SliceRow {
            c: c.to_string(),
            slice_size: *s,
            q_c: decomposition[c],
        })
        .collect();

    let n4 = (n as u128).pow(4);
    let char_constraint = match a.field().spec() {
        FieldSpec::Prime(p) => Some(CharConstraint {
            p,
            m_times_size: m * n,
            p_squared: (p as u128) * (p as u128),
            satisfied: ((m * n) as u128) <= (p as u128) * (p as u128),
            correction: Exact::new(m * n * n * n, p).into(),
        }),
        FieldSpec::Rational => None,
    };
    let min_product = prod.support().min(quot.support()) as u64;
    Ok(EnergyReport {
        field: a.field().spec(),
        size: a.len(),
        m: m as usize,
        big_m: big_m as usize,
        energy: e,
        energy_star: e_star,
        product_size: prod.support(),
        quotient_size: quot.support(),
        ratio_main: main_ratio(e.max(e_star), n, m, big_m).into(),
        ratio_growth: growth_ratio(min_product, n, m, big_m).into(),
        ratio_collinear: Exact::new(e, big_m * n * n).into(),
        cs_quotient: e as u128 * quot.support() as u128 >= n4,
        cs_product: e_star as u128 * prod.support() as u128 >= n4,
        e_star_le_e: e_star <= e,
        char_constraint,
        slices,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{PrimeField, RationalField};

    fn set(pairs: &[(i64, i64)]) -> AffineSet<RationalField> {
        AffineSet::from_pairs(RationalField, pairs).unwrap()
    }

    fn grid(n: i64) -> AffineSet<RationalField> {
        let pairs: Vec<_> = (1..=n).flat_map(|a| (1..=n).map(move |b| (a, b))).collect();
        set(&pairs)
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy(&set(&[(1, 0)])), 1);
        assert_eq!(energy(&set(&[(1, 0), (2, 0)])), 6);
        // U-coset: relation becomes h − g = v − u, so E = E⁺({0,1})
        assert_eq!(energy(&set(&[(1, 0), (1, 1)])), 6);
        assert_eq!(energy_star(&set(&[(1, 0)])), 1);
        assert_eq!(energy_star(&set(&[(1, 0), (2, 0)])), 6);
    }

    #[test]
    fn quotient_table_shape() {
        let a = set(&[(1, 0), (2, 0)]);
        let t = QuotientTable::build(&a, &a, ProductMode::Quotient);
        assert_eq!(t.total(), 4);
        assert_eq!(t.support(), 3);
        assert_eq!(t.count(&a.identity()), 2);
    }

    #[test]
    fn asymmetric_examples() {
        let a = set(&[(1, 0)]);
        let b = set(&[(1, 0), (2, 0)]);
        assert_eq!(energy_asym(&a, &b).unwrap(), 2);
        assert_eq!(energy_asym(&b, &b).unwrap(), energy(&b));
        let other = AffineSet::from_pairs(PrimeField::new(7).unwrap(), &[(1, 0)]).unwrap();
        let same_field_other = AffineSet::from_pairs(PrimeField::new(5).unwrap(), &[(1, 0)]).unwrap();
        assert_eq!(energy_asym(&other, &same_field_other), Err(Error::FieldMismatch));
    }

    #[test]
    fn bruteforce_examples() {
        let a = set(&[(1, 0), (2, 0)]);
        assert_eq!(energy_bruteforce(&a, OracleMode::E, DEFAULT_ORACLE_CAP).unwrap(), 6);
        assert_eq!(energy_bruteforce(&set(&[(1, 0)]), OracleMode::Estar, 64).unwrap(), 1);
        assert_eq!(
            energy_bruteforce(&grid(3), OracleMode::E, 4),
            Err(Error::OracleCapExceeded { size: 9, cap: 4 })
        );
    }

    #[test]
    fn slice_examples() {
        let f = RationalField;
        let a = set(&[(1, 0), (2, 0)]);
        let s = c_slice(&a, &f.from_i64(2)).unwrap();
        let expect = vec![
            (a.elems()[0].clone(), a.elems()[1].clone()),
            (a.elems()[1].clone(), a.elems()[0].clone()),
        ];
        assert_eq!(s.pairs(), expect.as_slice());
        assert!(c_slice(&a, &f.from_i64(3)).unwrap().is_empty());
        assert_eq!(c_slice(&a, &f.zero()).unwrap_err(), Error::ZeroC);
        // [5]×[5] at C = 3: |𝒞_C| = 2n²
        assert_eq!(c_slice(&grid(5), &f.from_i64(3)).unwrap().len(), 50);
    }

    #[test]
    fn decomposition_examples() {
        let f = RationalField;
        let d = decompose_by_C(&set(&[(1, 0), (2, 0)]));
        let expect: BTreeMap<_, _> = [(1, 1), (2, 4), (4, 1)]
            .into_iter()
            .map(|(c, q)| (f.from_i64(c), q))
            .collect();
        assert_eq!(d, expect);
        assert_eq!(decompose_by_C(&set(&[(1, 0)])), BTreeMap::from([(f.one(), 1)]));
        let g = grid(3);
        assert_eq!(decompose_by_C(&g).values().sum::<u64>(), energy(&g));
        assert_eq!(decompose_by_C(&g), decompose_bruteforce(&g, 64).unwrap());
    }

    #[test]
    fn scalar_energy_examples() {
        let f = RationalField;
        let s = |v: &[i64]| v.iter().map(|x| f.from_i64(*x)).collect::<Vec<_>>();
        assert_eq!(scalar_energy_add(&s(&[0])), 1);
        assert_eq!(scalar_energy_add(&s(&[1, 2, 3])), 19);
        assert_eq!(scalar_energy_add(&s(&[0, 1])), 6);
        assert_eq!(scalar_energy_mul(&s(&[1]), &f.zero()), MulEnergy { energy: 1, dropped: 0 });
        assert_eq!(scalar_energy_mul(&s(&[1, 2, 4]), &f.zero()).energy, 19);
        assert_eq!(scalar_energy_mul(&s(&[2, 3, 5]), &f.one()).energy, 19);
        assert_eq!(scalar_energy_mul(&s(&[1, 2, 3]), &f.one()), MulEnergy { energy: 6, dropped: 1 });
        assert_eq!(difference_energy(&s(&[0, 1, 2]), &s(&[0, 1, 2])), 19);
    }

    #[test]
    fn report_on_singleton() {
        let r = main_bound_report(&set(&[(1, 0)])).unwrap();
        assert_eq!((r.energy, r.energy_star, r.m, r.big_m), (1, 1, 1, 1));
        assert!(r.cs_quotient && r.cs_product && r.e_star_le_e);
        assert_eq!(r.ratio_main.exact, Exact::new(1, 2));
        assert!(r.char_constraint.is_none());
    }

    #[test]
    fn report_flags_char_constraint() {
        let f = PrimeField::new(3).unwrap();
        let pairs: Vec<_> = (1..3).flat_map(|a| (0..3).map(move |b| (a, b))).collect();
        let a = AffineSet::from_pairs(f, &pairs).unwrap();
        let r = main_bound_report(&a).unwrap();
        let c = r.char_constraint.unwrap();
        // whole group: m = 3, |A| = 6, m|A| = 18 > 9
        assert_eq!(c.m_times_size, 18);
        assert!(!c.satisfied);
        assert_eq!(c.correction.exact, Exact::new(18 * 36, 3));
    }
}
