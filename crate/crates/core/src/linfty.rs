//! Strong homotopy Lie (L-infinity) structures: extraction from extended actions,
//! the generalized Jacobi identities, Maurer-Cartan residuals and the change
//! between the physics and the mathematics grading.
//!
//! In the physics convention every bracket has degree 1 and is graded symmetric:
//! `l(.., x, y, ..) = (-1)^{|x||y|} l(.., y, x, ..)`. The identity checked at arity `n` is
//!
//! ```text
//! d l_n(v) + sum_i eps(i) l_n(v_1, .., d v_i, .., v_n)
//!     = sum_{k, l >= 2, k + l = n + 1} sum_unshuffles eps(sigma) l_l(l_k(v_I), v_J)
//! ```
//!
//! with `eps(i) = (-1)^{|v_1| + .. + |v_{i-1}|}`; at arity 1 it is `d d v = 0`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{graded_partial, q, Generator, GeneratorKind, LocalFunction, Rational, Side};
use crate::master::BVAction;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LInftyError {
    #[error("brackets up to arity {requested} need the action solved through antifield number {requested}, but it is solved up to {solved}")]
    InsufficientStrata { requested: usize, solved: usize },
    #[error("bracket extraction needs a finite model, found dimension {0}")]
    NotFinite(usize),
    #[error("{0}")]
    DegreeMismatch(String),
    #[error("basis element {0} has no generator")]
    MissingGenerator(String),
    #[error("constant term in the component of {0}")]
    Curvature(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Convention {
    Physics,
    Math,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisElement {
    pub label: String,
    pub degree: i64,
    #[serde(skip)]
    pub generator: Option<Generator>,
}

impl BasisElement {
    pub fn new(label: &str, degree: i64) -> Self {
        BasisElement { label: label.to_string(), degree, generator: None }
    }
}

/// Sparse vector in basis coordinates.
pub type Vector = BTreeMap<usize, Rational>;

pub fn basis_vector(i: usize) -> Vector {
    BTreeMap::from([(i, Rational::one())])
}

fn add_scaled(target: &mut Vector, factor: &Rational, v: &Vector) {
    for (i, c) in v {
        let entry = target.entry(*i).or_insert_with(Rational::zero);
        *entry += factor * c;
        if entry.is_zero() {
            target.remove(i);
        }
    }
}

fn sub(a: &Vector, b: &Vector) -> Vector {
    let mut out = a.clone();
    add_scaled(&mut out, &q(-1), b);
    out
}

fn factorial(n: usize) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * q(k))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LInftyStructure {
    pub basis: Vec<BasisElement>,
    /// `d e_j` for each basis index `j`.
    pub differential: BTreeMap<usize, Vector>,
    /// Arity `n >= 2` to the values on nondecreasing index tuples.
    pub brackets: BTreeMap<usize, BTreeMap<Vec<usize>, Vector>>,
    pub convention: Convention,
}

/// Degree of the `n`-ary bracket.
pub fn bracket_degree(convention: Convention, n: usize) -> i64 {
    match convention {
        Convention::Physics => 1,
        Convention::Math => 2 - n as i64,
    }
}

impl LInftyStructure {
    pub fn new(basis: Vec<BasisElement>, convention: Convention) -> Self {
        LInftyStructure { basis, differential: BTreeMap::new(), brackets: BTreeMap::new(), convention }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.basis[i].degree
    }

    fn odd(&self, i: usize) -> bool {
        self.degree(i).rem_euclid(2) == 1
    }

    /// Sign of exchanging adjacent arguments `a`, `b`.
    fn swap_negates(&self, a: usize, b: usize) -> bool {
        match self.convention {
            Convention::Physics => self.odd(a) && self.odd(b),
            Convention::Math => !(self.odd(a) && self.odd(b)),
        }
    }

    /// Sorts `inputs`, returning the sorted tuple and whether the sort negated the
    /// value; `None` when the symmetry forces the value to vanish.
    pub fn canonical(&self, inputs: &[usize]) -> Option<(Vec<usize>, bool)> {
        let mut t = inputs.to_vec();
        let mut negate = false;
        for end in (1..t.len()).rev() {
            for i in 0..end {
                if t[i] > t[i + 1] {
                    negate ^= self.swap_negates(t[i], t[i + 1]);
                    t.swap(i, i + 1);
                }
            }
        }
        if t.windows(2).any(|w| w[0] == w[1] && self.swap_negates(w[0], w[0])) {
            return None;
        }
        Some((t, negate))
    }

    pub fn set_differential(&mut self, j: usize, value: Vector) {
        if value.is_empty() {
            self.differential.remove(&j);
        } else {
            self.differential.insert(j, value);
        }
    }

    /// Sets the bracket on `inputs` (any order); the symmetric values follow.
    pub fn set_bracket(&mut self, inputs: &[usize], value: Vector) {
        if inputs.len() == 1 {
            return self.set_differential(inputs[0], value);
        }
        let Some((key, negate)) = self.canonical(inputs) else { return };
        let mut v = Vector::new();
        add_scaled(&mut v, &if negate { q(-1) } else { q(1) }, &value);
        let table = self.brackets.entry(inputs.len()).or_default();
        if v.is_empty() {
            table.remove(&key);
        } else {
            table.insert(key, v);
        }
    }

    /// `l_n(e_{i_1}, .., e_{i_n})`, with `l_1 = d`.
    pub fn on_basis(&self, inputs: &[usize]) -> Vector {
        if inputs.len() == 1 {
            return self.differential.get(&inputs[0]).cloned().unwrap_or_default();
        }
        let Some((key, negate)) = self.canonical(inputs) else { return Vector::new() };
        let Some(v) = self.brackets.get(&inputs.len()).and_then(|t| t.get(&key)) else { return Vector::new() };
        let mut out = Vector::new();
        add_scaled(&mut out, &if negate { q(-1) } else { q(1) }, v);
        out
    }

    /// Multilinear extension of [`Self::on_basis`].
    pub fn apply(&self, args: &[Vector]) -> Vector {
        let mut out = Vector::new();
        if args.iter().any(|a| a.is_empty()) || args.is_empty() {
            return out;
        }
        if args.len() >= 2 && !self.brackets.contains_key(&args.len()) {
            return out;
        }
        let mut idx = vec![0usize; args.len()];
        let entries: Vec<Vec<(&usize, &Rational)>> = args.iter().map(|a| a.iter().collect()).collect();
        loop {
            let inputs: Vec<usize> = idx.iter().enumerate().map(|(p, &k)| *entries[p][k].0).collect();
            let coeff = idx.iter().enumerate().fold(Rational::one(), |acc, (p, &k)| acc * entries[p][k].1);
            add_scaled(&mut out, &coeff, &self.on_basis(&inputs));
            let mut p = args.len();
            loop {
                if p == 0 {
                    return out;
                }
                p -= 1;
                idx[p] += 1;
                if idx[p] < entries[p].len() {
                    break;
                }
                idx[p] = 0;
            }
        }
    }

    pub fn max_arity(&self) -> usize {
        self.brackets.keys().next_back().copied().unwrap_or(1)
    }

    /// Checks that every stored value has the degree the convention requires.
    pub fn validate_degrees(&self) -> Result<(), LInftyError> {
        let mut all: Vec<(Vec<usize>, &Vector)> = self.differential.iter().map(|(j, v)| (vec![*j], v)).collect();
        for table in self.brackets.values() {
            all.extend(table.iter().map(|(k, v)| (k.clone(), v)));
        }
        for (inputs, v) in all {
            let expected =
                inputs.iter().map(|&i| self.degree(i)).sum::<i64>() + bracket_degree(self.convention, inputs.len());
            for &o in v.keys() {
                if self.degree(o) != expected {
                    return Err(LInftyError::DegreeMismatch(format!(
                        "bracket on {:?} has a component on {} of degree {}, expected {}",
                        inputs,
                        self.basis[o].label,
                        self.degree(o),
                        expected
                    )));
                }
            }
        }
        Ok(())
    }

    /// Reassembles `sum_i z*_i F^i` from the brackets: the part of an action that is
    /// linear in conjugate generators.
    pub fn to_action(&self) -> Result<LocalFunction, LInftyError> {
        let phys = self.in_convention(Convention::Physics);
        let gens: Vec<&Generator> = phys
            .basis
            .iter()
            .map(|b| b.generator.as_ref().ok_or_else(|| LInftyError::MissingGenerator(b.label.clone())))
            .collect::<Result<_, _>>()?;
        let mut s = LocalFunction::zero();
        let mut entries: Vec<(Vec<usize>, &Vector)> = phys.differential.iter().map(|(j, v)| (vec![*j], v)).collect();
        for table in phys.brackets.values() {
            entries.extend(table.iter().map(|(k, v)| (k.clone(), v)));
        }
        for (inputs, v) in entries {
            let mut factors: Vec<(Generator, u32)> = Vec::new();
            for &i in &inputs {
                match factors.last_mut() {
                    Some((g, e)) if *g == *gens[i] => *e += 1,
                    _ => factors.push((gens[i].clone(), 1)),
                }
            }
            let mult: Rational = factors.iter().fold(Rational::one(), |acc, (_, e)| acc * factorial(*e as usize));
            let mono = LocalFunction::product(&factors, q(1));
            for (o, c) in v {
                let star = LocalFunction::generator(gens[*o].conjugate().expect("paired kind"));
                let coeff = extraction_sign(phys.odd(*o), inputs.len()) * c / &mult;
                s += &(&star * &mono).scale(&coeff);
            }
        }
        Ok(s)
    }

    /// This structure in the requested convention.
    pub fn in_convention(&self, convention: Convention) -> LInftyStructure {
        if self.convention == convention {
            self.clone()
        } else {
            convert_conventions(self)
        }
    }
}

/// Relation between a coefficient of the action and the bracket value it encodes.
fn extraction_sign(output_odd: bool, arity: usize) -> Rational {
    if output_odd != (arity >= 2) {
        q(-1)
    } else {
        q(1)
    }
}

/// Reads the brackets encoded by the terms of `S` with exactly one conjugate
/// generator. The basis is formed by the fields and ghosts of `S` (and the partners
/// of its conjugates), in generator order, with degree minus the ghost number.
pub fn extract_brackets(s: &BVAction, n_max: usize) -> Result<LInftyStructure, LInftyError> {
    if s.dim != 0 {
        return Err(LInftyError::NotFinite(s.dim));
    }
    if n_max > s.solved_up_to {
        return Err(LInftyError::InsufficientStrata { requested: n_max, solved: s.solved_up_to });
    }
    let mut gens: Vec<Generator> = s
        .total
        .generators()
        .into_iter()
        .filter(|g| g.kind != GeneratorKind::BaseCoordinate)
        .map(|g| if g.kind.is_conjugate() { g.conjugate().expect("paired kind") } else { g })
        .collect();
    gens.sort();
    gens.dedup();
    let index: BTreeMap<Generator, usize> = gens.iter().cloned().enumerate().map(|(i, g)| (g, i)).collect();
    let basis = gens
        .iter()
        .map(|g| BasisElement { label: g.to_string(), degree: -g.bidegree().total(), generator: Some(g.clone()) })
        .collect();
    let mut l = LInftyStructure::new(basis, Convention::Physics);
    for (i, z) in gens.iter().enumerate() {
        let star = z.conjugate().expect("paired kind");
        let f = graded_partial(&s.total, &star, Side::Left)
            .filter_terms(|fs| fs.iter().all(|(g, _)| !g.kind.is_conjugate()));
        for (factors, c) in f.terms() {
            let arity: usize = factors.iter().map(|(_, e)| *e as usize).sum();
            if arity == 0 {
                return Err(LInftyError::Curvature(z.to_string()));
            }
            if arity > n_max.max(1) {
                continue;
            }
            let inputs: Vec<usize> =
                factors.iter().flat_map(|(g, e)| std::iter::repeat_n(index[g], *e as usize)).collect();
            let mult = factors.iter().fold(Rational::one(), |acc, (_, e)| acc * factorial(*e as usize));
            let value = extraction_sign(z.is_odd(), arity) * c * mult;
            let mut current = l.on_basis(&inputs);
            add_scaled(&mut current, &value, &basis_vector(i));
            l.set_bracket(&inputs, current);
        }
    }
    Ok(l)
}

/// Switches between the physics and the mathematics grading. Degrees shift by one
/// and the value on a sorted tuple picks up `(-1)^{sum_i (n - i) |x_i|}` with the
/// mathematics degrees of the inputs, so applying the conversion twice is the identity.
pub fn convert_conventions(l: &LInftyStructure) -> LInftyStructure {
    let (shift, convention) = match l.convention {
        Convention::Physics => (1, Convention::Math),
        Convention::Math => (-1, Convention::Physics),
    };
    let math_degree = |i: usize| match l.convention {
        Convention::Physics => l.degree(i) + 1,
        Convention::Math => l.degree(i),
    };
    let basis = l.basis.iter().map(|b| BasisElement { degree: b.degree + shift, ..b.clone() }).collect();
    let mut out = LInftyStructure::new(basis, convention);
    out.differential = l.differential.clone();
    for (&n, table) in &l.brackets {
        let mut converted = BTreeMap::new();
        for (key, v) in table {
            let exponent: i64 = key.iter().enumerate().map(|(i, &x)| (n - 1 - i) as i64 * math_degree(x)).sum();
            let mut w = Vector::new();
            add_scaled(&mut w, &if exponent.rem_euclid(2) == 1 { q(-1) } else { q(1) }, v);
            converted.insert(key.clone(), w);
        }
        out.brackets.insert(n, converted);
    }
    out
}

/// Splittings of `0..n` into an increasing block of size `k` followed by the rest,
/// with the Koszul sign of the reordering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unshuffle {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub negative: bool,
}

/// Enumerates the `C(n, k)` unshuffles of `n` graded arguments; the sign is built up
/// as each position is assigned to a block.
pub struct UnshuffleEnumerator {
    odd: Vec<bool>,
    k: usize,
}

impl UnshuffleEnumerator {
    pub fn new(odd: Vec<bool>, k: usize) -> Self {
        UnshuffleEnumerator { odd, k }
    }

    pub fn all(&self) -> Vec<Unshuffle> {
        let mut out = Vec::new();
        if self.k <= self.odd.len() {
            self.extend(0, &mut Vec::new(), &mut Vec::new(), false, false, &mut out);
        }
        out
    }

    fn extend(
        &self,
        pos: usize,
        left: &mut Vec<usize>,
        right: &mut Vec<usize>,
        odd_right: bool,
        negative: bool,
        out: &mut Vec<Unshuffle>,
    ) {
        let n = self.odd.len();
        if pos == n {
            out.push(Unshuffle { left: left.clone(), right: right.clone(), negative });
            return;
        }
        if left.len() < self.k {
            left.push(pos);
            // the element moves left past every odd element already on the right
            self.extend(pos + 1, left, right, odd_right, negative ^ (self.odd[pos] && odd_right), out);
            left.pop();
        }
        if right.len() < n - self.k {
            right.push(pos);
            self.extend(pos + 1, left, right, odd_right ^ self.odd[pos], negative, out);
            right.pop();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LInftyReport {
    pub n_max: usize,
    /// Residual of the identity at each arity and nondecreasing input tuple.
    pub residuals: BTreeMap<(usize, Vec<usize>), Vector>,
    /// The arity-3 identity written out term by term, per input triple.
    pub homotopy_jacobi: BTreeMap<Vec<usize>, Vector>,
    pub pass: bool,
}

impl LInftyReport {
    pub fn failures(&self) -> impl Iterator<Item = (&(usize, Vec<usize>), &Vector)> {
        self.residuals.iter().filter(|(_, v)| !v.is_empty())
    }

    /// Whether the arity-3 sub-report agrees with the general evaluator.
    pub fn homotopy_jacobi_consistent(&self) -> bool {
        self.homotopy_jacobi.iter().all(|(t, v)| self.residuals.get(&(3, t.clone())).is_some_and(|r| r == v))
    }
}

/// Nondecreasing tuples of length `n` over `0..dim`, without repeated odd entries.
fn tuples(l: &LInftyStructure, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(l: &LInftyStructure, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..l.dim() {
            if cur.last() == Some(&i) && l.odd(i) {
                continue;
            }
            cur.push(i);
            rec(l, n, i, cur, out);
            cur.pop();
        }
    }
    rec(l, n, 0, &mut cur, &mut out);
    out
}

/// Residual `LHS - RHS` of the identity at the tuple `v` (physics convention).
pub fn identity_residual(l: &LInftyStructure, v: &[usize]) -> Vector {
    let n = v.len();
    let vecs: Vec<Vector> = v.iter().map(|&i| basis_vector(i)).collect();
    if n == 1 {
        return l.apply(&[l.on_basis(v)]);
    }
    let mut lhs = l.apply(&[l.on_basis(v)]);
    let mut odd_before = false;
    for i in 0..n {
        let mut args = vecs.clone();
        args[i] = l.on_basis(&[v[i]]);
        add_scaled(&mut lhs, &if odd_before { q(-1) } else { q(1) }, &l.apply(&args));
        odd_before ^= l.odd(v[i]);
    }
    let odd: Vec<bool> = v.iter().map(|&i| l.odd(i)).collect();
    let mut rhs = Vector::new();
    for k in 2..n {
        for u in UnshuffleEnumerator::new(odd.clone(), k).all() {
            let inner = l.apply(&u.left.iter().map(|&p| vecs[p].clone()).collect::<Vec<_>>());
            let mut args = vec![inner];
            args.extend(u.right.iter().map(|&p| vecs[p].clone()));
            add_scaled(&mut rhs, &if u.negative { q(-1) } else { q(1) }, &l.apply(&args));
        }
    }
    sub(&lhs, &rhs)
}

/// The arity-3 identity with every sign written out.
fn homotopy_jacobi_residual(l: &LInftyStructure, v: &[usize]) -> Vector {
    let (a, b, c) = (v[0], v[1], v[2]);
    let e = |i: usize| basis_vector(i);
    let d = |i: usize| l.on_basis(&[i]);
    let sign = |neg: bool| if neg { q(-1) } else { q(1) };
    let (pa, pb, pc) = (l.odd(a), l.odd(b), l.odd(c));

    let mut h = l.apply(&[l.on_basis(v)]);
    add_scaled(&mut h, &q(1), &l.apply(&[d(a), e(b), e(c)]));
    add_scaled(&mut h, &sign(pa), &l.apply(&[e(a), d(b), e(c)]));
    add_scaled(&mut h, &sign(pa ^ pb), &l.apply(&[e(a), e(b), d(c)]));

    let mut j = l.apply(&[l.on_basis(&[a, b]), e(c)]);
    add_scaled(&mut j, &sign(pb && pc), &l.apply(&[l.on_basis(&[a, c]), e(b)]));
    add_scaled(&mut j, &sign(pa && (pb ^ pc)), &l.apply(&[l.on_basis(&[b, c]), e(a)]));
    sub(&h, &j)
}

/// Evaluates the identities at every arity `1..=n_max` on all basis tuples.
pub fn check_linfty(l: &LInftyStructure, n_max: usize) -> LInftyReport {
    let phys = l.in_convention(Convention::Physics);
    let mut residuals = BTreeMap::new();
    let mut homotopy_jacobi = BTreeMap::new();
    for n in 1..=n_max {
        for t in tuples(&phys, n) {
            if n == 3 {
                homotopy_jacobi.insert(t.clone(), homotopy_jacobi_residual(&phys, &t));
            }
            let r = identity_residual(&phys, &t);
            residuals.insert((n, t), r);
        }
    }
    let pass = residuals.values().all(|v| v.is_empty()) && homotopy_jacobi.values().all(|v| v.is_empty());
    LInftyReport { n_max, residuals, homotopy_jacobi, pass }
}

/// Coefficients of `t^1 .. t^T` in `d theta_t + sum_n (1/n!) l_n(theta_t, .., theta_t)` for
/// `theta_t = sum_j t^j theta[j - 1]`.
pub fn mc_residual(l: &LInftyStructure, theta: &[Vector]) -> Result<Vec<Vector>, LInftyError> {
    let required = match l.convention {
        Convention::Physics => 0,
        Convention::Math => 1,
    };
    for (j, th) in theta.iter().enumerate() {
        for &i in th.keys() {
            if l.degree(i) != required {
                return Err(LInftyError::DegreeMismatch(format!(
                    "theta_{} has a component on {} of degree {}, expected {}",
                    j + 1,
                    l.basis[i].label,
                    l.degree(i),
                    required
                )));
            }
        }
    }
    let phys = l.in_convention(Convention::Physics);
    let t_max = theta.len();
    let mut out = Vec::new();
    for p in 1..=t_max {
        let mut total = Vector::new();
        for n in 1..=p {
            let weight = factorial(n).recip();
            for comp in compositions(p, n) {
                let args: Vec<Vector> = comp.iter().map(|&j| theta[j - 1].clone()).collect();
                add_scaled(&mut total, &weight, &phys.apply(&args));
            }
        }
        out.push(total);
    }
    Ok(out)
}

/// Ordered sequences of `n` positive integers summing to `p`.
fn compositions(p: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return if p == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=p.saturating_sub(n - 1) {
        for mut rest in compositions(p - first, n - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn so3() -> LInftyStructure {
        let basis = (1..=3).map(|i| BasisElement::new(&format!("e{i}"), -1)).collect();
        let mut l = LInftyStructure::new(basis, Convention::Physics);
        l.set_bracket(&[0, 1], basis_vector(2));
        l.set_bracket(&[1, 2], basis_vector(0));
        l.set_bracket(&[2, 0], basis_vector(1));
        l
    }

    #[test]
    fn odd_brackets_are_antisymmetric() {
        let l = so3();
        let mut minus = Vector::new();
        add_scaled(&mut minus, &q(-1), &basis_vector(2));
        assert_eq!(l.on_basis(&[1, 0]), minus);
        assert!(l.on_basis(&[0, 0]).is_empty());
        l.validate_degrees().unwrap();
    }

    #[test]
    fn lie_algebra_passes() {
        let r = check_linfty(&so3(), 4);
        assert!(r.pass);
        assert!(r.homotopy_jacobi_consistent());
    }

    #[test]
    fn unshuffle_counts() {
        for n in 1..=6 {
            for k in 0..=n {
                let count = UnshuffleEnumerator::new(vec![true; n], k).all().len() as u64;
                let binom = (1..=k as u64).fold(1u64, |acc, i| acc * (n as u64 + 1 - i) / i);
                assert_eq!(count, binom);
            }
        }
    }

    #[test]
    fn compositions_small() {
        assert_eq!(compositions(3, 2), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(compositions(2, 3), Vec::<Vec<usize>>::new());
    }

    #[test]
    fn conversion_is_an_involution() {
        let l = so3();
        let m = convert_conventions(&l);
        assert_eq!(m.convention, Convention::Math);
        assert_eq!(m.degree(0), 0);
        assert_eq!(convert_conventions(&m), l);
    }
}
