//! The affine group `Aff(F) = F ⋊ F*`.
//!
//! An element `(a, b)` with `a != 0` is the map `x ↦ a·x + b`, drawn as the
//! point `(a, b)` of the parameter plane with the y-axis removed. Composition
//! is `(g∘h)(x) = g(h(x))`, so `g∘h = (g.a·h.a, g.a·h.b + g.b)` and
//! `g⁻¹ = (1/g.a, −g.b/g.a)`.
//!
//! Cosets of the unipotent subgroup `U = {(1, x)}` are the vertical lines of
//! the parameter plane; cosets of a torus are the non-vertical ones.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct AffineMap<S> {
    a: S,
    b: S,
}

impl<S: Scalar> AffineMap<S> {
    pub fn new(a: S, b: S) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::ZeroSlope);
        }
        Ok(AffineMap { a, b })
    }

    pub fn identity_like(s: &S) -> Self {
        AffineMap { a: s.one_like(), b: s.zero_like() }
    }

    /// Slope, the first coordinate `g₁`.
    pub fn a(&self) -> &S {
        &self.a
    }

    /// Intercept, the second coordinate `g₂`.
    pub fn b(&self) -> &S {
        &self.b
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero()
    }

    pub fn apply(&self, x: &S) -> S {
        self.a.mul(x).add(&self.b)
    }

    /// `self ∘ rhs`, i.e. `x ↦ self(rhs(x))`.
    pub fn compose(&self, rhs: &Self) -> Self {
        AffineMap {
            a: self.a.mul(&rhs.a),
            b: self.a.mul(&rhs.b).add(&self.b),
        }
    }

    pub fn inverse(&self) -> Self {
        let ia = self.a.inv().expect("slope is nonzero by construction");
        AffineMap { b: ia.mul(&self.b).neg(), a: ia }
    }

    /// `self⁻¹ ∘ rhs`.
    pub fn quotient(&self, rhs: &Self) -> Self {
        // (1/g.a)·(h.a, h.b − g.b) without materialising g⁻¹
        let ia = self.a.inv().expect("slope is nonzero by construction");
        AffineMap {
            a: ia.mul(&rhs.a),
            b: ia.mul(&rhs.b.sub(&self.b)),
        }
    }
}

impl<S: fmt::Display> fmt::Display for AffineMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

pub fn compose<S: Scalar>(g: &AffineMap<S>, h: &AffineMap<S>) -> AffineMap<S> {
    g.compose(h)
}

pub fn inverse<S: Scalar>(g: &AffineMap<S>) -> AffineMap<S> {
    g.inverse()
}

pub fn quotient<S: Scalar>(g: &AffineMap<S>, h: &AffineMap<S>) -> AffineMap<S> {
    g.quotient(h)
}

/// Which product set to form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductMode {
    /// `{a∘b}`
    Product,
    /// `{a⁻¹∘b}`
    Quotient,
}

/// Finite, deduplicated set of affine maps over one field, kept sorted.
#[derive(Clone, Debug)]
pub struct AffineSet<F: Field> {
    field: F,
    elems: Vec<AffineMap<F::Elem>>,
}

impl<F: Field> PartialEq for AffineSet<F> {
    fn eq(&self, other: &Self) -> bool {
        self.field.spec() == other.field.spec() && self.elems == other.elems
    }
}

impl<F: Field> AffineSet<F> {
    pub fn new(field: F, elems: impl IntoIterator<Item = AffineMap<F::Elem>>) -> Self {
        let mut elems: Vec<_> = elems.into_iter().collect();
        elems.sort_unstable();
        elems.dedup();
        AffineSet { field, elems }
    }

    /// Builds a set from integer pairs; fails on a zero slope.
    pub fn from_pairs(field: F, pairs: &[(i64, i64)]) -> Result<Self> {
        let elems = pairs
            .iter()
            .map(|&(a, b)| AffineMap::new(field.from_i64(a), field.from_i64(b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(field, elems))
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> &[AffineMap<F::Elem>] {
        &self.elems
    }

    pub fn iter(&self) -> std::slice::Iter<'_, AffineMap<F::Elem>> {
        self.elems.iter()
    }

    pub fn contains(&self, g: &AffineMap<F::Elem>) -> bool {
        self.elems.binary_search(g).is_ok()
    }

    pub fn identity(&self) -> AffineMap<F::Elem> {
        AffineMap { a: self.field.one(), b: self.field.zero() }
    }

    /// Parses one `a b` pair per line; `#` starts a comment.
    pub fn parse_rows(field: F, text: &str) -> Result<Self> {
        let mut elems = Vec::new();
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(line.to_string()));
            };
            elems.push(AffineMap::new(field.parse(a)?, field.parse(b)?)?);
        }
        Ok(Self::new(field, elems))
    }

    pub fn to_rows(&self) -> String {
        self.elems
            .iter()
            .map(|g| format!("{} {}\n", g.a, g.b))
            .collect()
    }
}

pub(crate) fn check_same_field<F: Field>(x: &AffineSet<F>, y: &AffineSet<F>) -> Result<()> {
    if x.field.spec() != y.field.spec() {
        return Err(Error::FieldMismatch);
    }
    Ok(())
}

/// `AB = {a∘b}` or `A⁻¹B = {a⁻¹∘b}`.
pub fn product_set<F: Field>(
    a: &AffineSet<F>,
    b: &AffineSet<F>,
    mode: ProductMode,
) -> Result<AffineSet<F>> {
    check_same_field(a, b)?;
    let elems: Vec<_> = a
        .elems
        .par_iter()
        .flat_map_iter(|g| {
            b.elems.iter().map(move |h| match mode {
                ProductMode::Product => g.compose(h),
                ProductMode::Quotient => g.quotient(h),
            })
        })
        .collect();
    Ok(AffineSet::new(a.field.clone(), elems))
}

/// Largest number of elements sharing a slope: `m`, the richest coset of `U`.
pub fn max_on_vertical<F: Field>(a: &AffineSet<F>) -> usize {
    let mut counts: HashMap<&F::Elem, usize> = HashMap::new();
    for g in &a.elems {
        *counts.entry(&g.a).or_default() += 1;
    }
    counts.into_values().max().unwrap_or(0)
}

/// Direction of the segment between two parameter-plane points.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Direction<S> {
    Slope(S),
    Vertical,
}

pub fn direction<S: Scalar>(p: &AffineMap<S>, q: &AffineMap<S>) -> Direction<S> {
    let dx = q.a.sub(&p.a);
    if dx.is_zero() {
        Direction::Vertical
    } else {
        Direction::Slope(q.b.sub(&p.b).div(&dx).expect("dx is nonzero"))
    }
}

/// Largest number of collinear elements in the parameter plane: `M`.
pub fn max_on_line<F: Field>(a: &AffineSet<F>) -> usize {
    let n = a.elems.len();
    if n <= 2 {
        return n;
    }
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut buckets: HashMap<Direction<F::Elem>, usize> = HashMap::new();
            for q in &a.elems[i + 1..] {
                *buckets.entry(direction(&a.elems[i], q)).or_default() += 1;
            }
            1 + buckets.into_values().max().unwrap_or(0)
        })
        .max()
        .unwrap_or(1)
}
