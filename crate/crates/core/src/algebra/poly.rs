//! Canonical-form polynomials in the free bigraded-commutative algebra.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use super::generator::{Bidegree, Generator, GeneratorKind};
use super::Rational;

/// Sorted `(generator, exponent)` pairs. Odd generators always have exponent 1.
pub type Factors = Vec<(Generator, u32)>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("cannot evaluate an odd generator {0}")]
    OddGeneratorPresent(String),
    #[error("no value bound for generator {0}")]
    UnboundGenerator(String),
}

/// Which side a graded derivative strips its variable from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub coeff: Rational,
    pub factors: Factors,
}

impl Monomial {
    pub fn bidegree(&self) -> Bidegree {
        factors_bidegree(&self.factors)
    }

    pub fn is_odd(&self) -> bool {
        factors_odd(&self.factors)
    }
}

pub(crate) fn factors_bidegree(factors: &[(Generator, u32)]) -> Bidegree {
    factors.iter().fold(Bidegree::ZERO, |acc, (g, e)| acc + g.bidegree().scale(*e))
}

pub(crate) fn factors_odd(factors: &[(Generator, u32)]) -> bool {
    factors.iter().filter(|(g, e)| g.is_odd() && e % 2 == 1).count() % 2 == 1
}

fn odd_count(factors: &[(Generator, u32)]) -> usize {
    factors.iter().filter(|(g, _)| g.is_odd()).count()
}

/// Brings a product of generator powers into canonical order.
///
/// The returned coefficient carries the Koszul sign of the sorting permutation.
/// Returns `None` when an odd generator occurs twice (or with exponent above one).
pub fn normalize(factors: &[(Generator, u32)], coeff: Rational) -> Option<Monomial> {
    if coeff.is_zero() {
        return None;
    }
    let mut items: Vec<(Generator, u32)> = Vec::with_capacity(factors.len());
    for (g, e) in factors {
        if *e == 0 {
            continue;
        }
        if g.is_odd() && *e > 1 {
            return None;
        }
        items.push((g.clone(), *e));
    }
    // insertion sort; each transposition of two odd neighbours flips the sign
    let mut negative = false;
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && items[j - 1].0 > items[j].0 {
            if items[j - 1].0.is_odd() && items[j].0.is_odd() {
                negative = !negative;
            }
            items.swap(j - 1, j);
            j -= 1;
        }
    }
    let mut merged: Factors = Vec::with_capacity(items.len());
    for (g, e) in items {
        match merged.last_mut() {
            Some((last, exp)) if *last == g => {
                if g.is_odd() {
                    return None;
                }
                *exp += e;
            }
            _ => merged.push((g, e)),
        }
    }
    let coeff = if negative { -coeff } else { coeff };
    Some(Monomial { coeff, factors: merged })
}

/// Product of two canonical factor lists: the merged list and whether the
/// Koszul sign is negative. `None` when the product vanishes.
pub(crate) fn mul_factors(a: &[(Generator, u32)], b: &[(Generator, u32)]) -> Option<(Factors, bool)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let mut negative = false;
    let mut odd_left_in_a = odd_count(a);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                if a[i].0.is_odd() {
                    odd_left_in_a -= 1;
                }
                out.push(a[i].clone());
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                if b[j].0.is_odd() && odd_left_in_a % 2 == 1 {
                    negative = !negative;
                }
                out.push(b[j].clone());
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                if a[i].0.is_odd() {
                    return None;
                }
                out.push((a[i].0.clone(), a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    Some((out, negative))
}

/// A polynomial in the declared generators with exact rational coefficients,
/// kept in canonical form: distinct factor sequences, no zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalFunction {
    terms: BTreeMap<Factors, Rational>,
}

impl LocalFunction {
    pub fn zero() -> Self {
        LocalFunction { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        let mut f = Self::zero();
        f.add_term(Vec::new(), c);
        f
    }

    pub fn integer(c: i64) -> Self {
        Self::constant(Rational::from_integer(c.into()))
    }

    pub fn generator(g: Generator) -> Self {
        let mut f = Self::zero();
        f.add_term(vec![(g, 1)], Rational::one());
        f
    }

    pub fn from_monomial(m: Monomial) -> Self {
        let mut f = Self::zero();
        f.add_term(m.factors, m.coeff);
        f
    }

    /// Product of an arbitrary (unsorted) list of generator powers.
    pub fn product(factors: &[(Generator, u32)], coeff: Rational) -> Self {
        normalize(factors, coeff).map(Self::from_monomial).unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Factors, &Rational)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = Monomial> + '_ {
        self.terms.iter().map(|(f, c)| Monomial { coeff: c.clone(), factors: f.clone() })
    }

    pub fn coefficient(&self, factors: &Factors) -> Rational {
        self.terms.get(factors).cloned().unwrap_or_else(Rational::zero)
    }

    /// Adds `coeff * factors`, where `factors` must already be canonical.
    pub(crate) fn add_term(&mut self, factors: Factors, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(factors) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LocalFunction { terms: self.terms.iter().map(|(f, k)| (f.clone(), k * c)).collect() }
    }

    /// Keeps only the terms satisfying `pred`.
    pub fn filter_terms(&self, mut pred: impl FnMut(&Factors) -> bool) -> Self {
        LocalFunction {
            terms: self.terms.iter().filter(|(f, _)| pred(f)).map(|(f, c)| (f.clone(), c.clone())).collect(),
        }
    }

    /// Every generator occurring in some term.
    pub fn generators(&self) -> BTreeSet<Generator> {
        self.terms.keys().flat_map(|f| f.iter().map(|(g, _)| g.clone())).collect()
    }

    pub fn contains_kind(&self, kind: GeneratorKind) -> bool {
        self.terms.keys().any(|f| f.iter().any(|(g, _)| g.kind == kind))
    }

    /// Highest jet order among the generators present.
    pub fn max_jet_order(&self) -> usize {
        self.terms.keys().flat_map(|f| f.iter().map(|(g, _)| g.jet.order())).max().unwrap_or(0)
    }

    /// Total polynomial degree in the generators of the given kinds.
    pub fn max_degree_in(&self, kinds: &[GeneratorKind]) -> u32 {
        self.terms
            .keys()
            .map(|f| f.iter().filter(|(g, _)| kinds.contains(&g.kind)).map(|(_, e)| *e).sum())
            .max()
            .unwrap_or(0)
    }

    /// Common bidegree of all terms, if there is one. `None` for zero.
    pub fn homogeneous_bidegree(&self) -> Option<Bidegree> {
        let mut degs = self.terms.keys().map(|f| factors_bidegree(f));
        let first = degs.next()?;
        degs.all(|d| d == first).then_some(first)
    }

    /// Common parity of all terms (`Some(false)` for zero).
    pub fn parity(&self) -> Option<bool> {
        let mut ps = self.terms.keys().map(|f| factors_odd(f));
        match ps.next() {
            None => Some(false),
            Some(p) => ps.all(|q| q == p).then_some(p),
        }
    }

    pub fn multiply(&self, other: &LocalFunction) -> LocalFunction {
        multiply(self, other)
    }
}

/// Graded-commutative product.
pub fn multiply(f: &LocalFunction, g: &LocalFunction) -> LocalFunction {
    let mut out = LocalFunction::zero();
    for (fa, ca) in &f.terms {
        for (fb, cb) in &g.terms {
            if let Some((factors, negative)) = mul_factors(fa, fb) {
                let c = ca * cb;
                out.add_term(factors, if negative { -c } else { c });
            }
        }
    }
    out
}

/// Left or right graded derivative with respect to `z`.
///
/// The left derivative moves `z` to the front before stripping it; the right
/// derivative moves it to the back. For homogeneous `f` they are related by
/// `d_R f/dz = (-1)^{(|f|+|z|)|z|} d_L f/dz`.
pub fn graded_partial(f: &LocalFunction, z: &Generator, side: Side) -> LocalFunction {
    let mut out = LocalFunction::zero();
    for (factors, c) in &f.terms {
        let Some(pos) = factors.iter().position(|(g, _)| g == z) else {
            continue;
        };
        let e = factors[pos].1;
        let mut rest = factors.clone();
        let mut coeff = c.clone();
        if z.is_odd() {
            let passed = match side {
                Side::Left => odd_count(&factors[..pos]),
                Side::Right => odd_count(&factors[pos + 1..]),
            };
            if passed % 2 == 1 {
                coeff = -coeff;
            }
            rest.remove(pos);
        } else {
            coeff *= Rational::from_integer(e.into());
            if e == 1 {
                rest.remove(pos);
            } else {
                rest[pos].1 -= 1;
            }
        }
        out.add_term(rest, coeff);
    }
    out
}

/// Splits `f` into its bihomogeneous components.
pub fn bidegree_decompose(f: &LocalFunction) -> BTreeMap<Bidegree, LocalFunction> {
    let mut out: BTreeMap<Bidegree, LocalFunction> = BTreeMap::new();
    for (factors, c) in &f.terms {
        out.entry(factors_bidegree(factors)).or_default().add_term(factors.clone(), c.clone());
    }
    out
}

/// Splits `f` by antifield number (the antighost degree `q`).
pub fn antifield_decompose(f: &LocalFunction) -> BTreeMap<u32, LocalFunction> {
    let mut out: BTreeMap<u32, LocalFunction> = BTreeMap::new();
    for (factors, c) in &f.terms {
        out.entry(factors_bidegree(factors).antighost).or_default().add_term(factors.clone(), c.clone());
    }
    out
}

/// Evaluates an even polynomial at a rational point.
pub fn substitute(f: &LocalFunction, bindings: &BTreeMap<Generator, Rational>) -> Result<Rational, EvalError> {
    let mut total = Rational::zero();
    for (factors, c) in &f.terms {
        let mut value = c.clone();
        for (g, e) in factors {
            if g.is_odd() {
                return Err(EvalError::OddGeneratorPresent(g.to_string()));
            }
            let v = bindings.get(g).ok_or_else(|| EvalError::UnboundGenerator(g.to_string()))?;
            value *= num_traits::pow(v.clone(), *e as usize);
        }
        total += value;
    }
    Ok(total)
}

impl Add for &LocalFunction {
    type Output = LocalFunction;

    fn add(self, rhs: &LocalFunction) -> LocalFunction {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for LocalFunction {
    type Output = LocalFunction;

    fn add(mut self, rhs: LocalFunction) -> LocalFunction {
        self += &rhs;
        self
    }
}

impl AddAssign<&LocalFunction> for LocalFunction {
    fn add_assign(&mut self, rhs: &LocalFunction) {
        for (f, c) in &rhs.terms {
            self.add_term(f.clone(), c.clone());
        }
    }
}

impl SubAssign<&LocalFunction> for LocalFunction {
    fn sub_assign(&mut self, rhs: &LocalFunction) {
        for (f, c) in &rhs.terms {
            self.add_term(f.clone(), -c.clone());
        }
    }
}

impl Sub for &LocalFunction {
    type Output = LocalFunction;

    fn sub(self, rhs: &LocalFunction) -> LocalFunction {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for LocalFunction {
    type Output = LocalFunction;

    fn sub(mut self, rhs: LocalFunction) -> LocalFunction {
        self -= &rhs;
        self
    }
}

impl Neg for &LocalFunction {
    type Output = LocalFunction;

    fn neg(self) -> LocalFunction {
        LocalFunction { terms: self.terms.iter().map(|(f, c)| (f.clone(), -c.clone())).collect() }
    }
}

impl Neg for LocalFunction {
    type Output = LocalFunction;

    fn neg(self) -> LocalFunction {
        -&self
    }
}

impl Mul for &LocalFunction {
    type Output = LocalFunction;

    fn mul(self, rhs: &LocalFunction) -> LocalFunction {
        multiply(self, rhs)
    }
}

impl Mul for LocalFunction {
    type Output = LocalFunction;

    fn mul(self, rhs: LocalFunction) -> LocalFunction {
        multiply(&self, &rhs)
    }
}

impl From<Generator> for LocalFunction {
    fn from(g: Generator) -> Self {
        LocalFunction::generator(g)
    }
}

/// Renders a rational as `p/q` with `q > 0`, omitting `/1`.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Serialized as its printed form.
impl serde::Serialize for LocalFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl fmt::Display for LocalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (factors, c)) in self.terms.iter().enumerate() {
            let magnitude = c.abs();
            if n == 0 {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut parts = Vec::new();
            if factors.is_empty() || !magnitude.is_one() {
                parts.push(format_rational(&magnitude));
            }
            for (g, e) in factors {
                if *e == 1 {
                    parts.push(g.to_string());
                } else {
                    parts.push(format!("{g}^{e}"));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}
