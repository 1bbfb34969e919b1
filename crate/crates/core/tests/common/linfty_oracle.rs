//! Brute-force evaluation of the strong homotopy identities: all permutations of
//! the argument positions are enumerated and filtered down to unshuffles, and every
//! sign is the Koszul sign of bubble-sorting the arguments.

use std::collections::BTreeMap;

use bvforge::algebra::{q, Rational};
use bvforge::linfty::{BasisElement, Convention, LInftyStructure, Vector};
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::Rng;

/// Graded symmetric brackets of degree one, stored on sorted tuples.
#[derive(Clone, Debug)]
pub struct OracleStructure {
    pub degrees: Vec<i64>,
    /// Arity to sorted tuple to value; arity 1 is the differential.
    pub table: BTreeMap<usize, BTreeMap<Vec<usize>, Vector>>,
}

fn odd(d: i64) -> bool {
    d.rem_euclid(2) == 1
}

fn add(target: &mut Vector, c: &Rational, v: &Vector) {
    for (i, x) in v {
        let slot = target.entry(*i).or_insert_with(Rational::zero);
        *slot += c * x;
        if slot.is_zero() {
            target.remove(i);
        }
    }
}

/// Koszul sign of bubble-sorting `items` by key, each item carrying a parity.
pub fn bubble_sign(items: &mut [(usize, bool)]) -> bool {
    let mut negative = false;
    for end in (1..items.len()).rev() {
        for i in 0..end {
            if items[i].0 > items[i + 1].0 {
                negative ^= items[i].1 && items[i + 1].1;
                items.swap(i, i + 1);
            }
        }
    }
    negative
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else { return out };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

/// Unshuffles of `n` positions with a left block of size `k`, as `(left, right, negative)`.
pub fn brute_unshuffles(odd: &[bool], k: usize) -> Vec<(Vec<usize>, Vec<usize>, bool)> {
    let n = odd.len();
    let mut out = Vec::new();
    for p in permutations(n) {
        let (left, right) = p.split_at(k);
        if left.windows(2).any(|w| w[0] > w[1]) || right.windows(2).any(|w| w[0] > w[1]) {
            continue;
        }
        let mut items: Vec<(usize, bool)> = p.iter().map(|&i| (i, odd[i])).collect();
        out.push((left.to_vec(), right.to_vec(), bubble_sign(&mut items)));
    }
    out
}

impl OracleStructure {
    fn basis_value(&self, inputs: &[usize]) -> Vector {
        let mut items: Vec<(usize, bool)> = inputs.iter().map(|&i| (i, odd(self.degrees[i]))).collect();
        let negative = bubble_sign(&mut items);
        let sorted: Vec<usize> = items.iter().map(|x| x.0).collect();
        if sorted.windows(2).any(|w| w[0] == w[1] && odd(self.degrees[w[0]])) {
            return Vector::new();
        }
        let Some(v) = self.table.get(&inputs.len()).and_then(|t| t.get(&sorted)) else { return Vector::new() };
        let mut out = Vector::new();
        add(&mut out, &if negative { q(-1) } else { q(1) }, v);
        out
    }

    /// `l_m(w, e_rest)` with `w` an arbitrary vector.
    fn apply_first(&self, w: &Vector, rest: &[usize]) -> Vector {
        let mut out = Vector::new();
        for (c, x) in w {
            let mut inputs = vec![*c];
            inputs.extend_from_slice(rest);
            add(&mut out, x, &self.basis_value(&inputs));
        }
        out
    }

    /// Residual of the identity on the argument tuple `v`: the compositions with an
    /// outer or inner differential minus those of two higher brackets.
    pub fn residual(&self, v: &[usize]) -> Vector {
        let n = v.len();
        let parities: Vec<bool> = v.iter().map(|&i| odd(self.degrees[i])).collect();
        let mut out = Vector::new();
        for k in 1..=n {
            let literal_sign = if k == 1 || k == n { q(1) } else { q(-1) };
            for (left, right, negative) in brute_unshuffles(&parities, k) {
                let inner = self.basis_value(&left.iter().map(|&p| v[p]).collect::<Vec<_>>());
                let rest: Vec<usize> = right.iter().map(|&p| v[p]).collect();
                let term = self.apply_first(&inner, &rest);
                let sign = if negative { -literal_sign.clone() } else { literal_sign.clone() };
                add(&mut out, &sign, &term);
            }
        }
        out
    }

    pub fn to_structure(&self) -> LInftyStructure {
        let basis = self.degrees.iter().enumerate().map(|(i, d)| BasisElement::new(&format!("e{i}"), *d)).collect();
        let mut l = LInftyStructure::new(basis, Convention::Physics);
        for table in self.table.values() {
            for (t, v) in table {
                l.set_bracket(t, v.clone());
            }
        }
        l
    }

    /// Nondecreasing tuples of length `n` without repeated odd entries.
    pub fn tuples(&self, n: usize) -> Vec<Vec<usize>> {
        let dim = self.degrees.len();
        let mut out: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for t in &out {
                let start = t.last().copied().unwrap_or(0);
                for i in start..dim {
                    if t.last() == Some(&i) && odd(self.degrees[i]) {
                        continue;
                    }
                    let mut s = t.clone();
                    s.push(i);
                    next.push(s);
                }
            }
            out = next;
        }
        out
    }
}

/// A random degree-respecting structure of dimension at most 6 with brackets up to
/// arity 4. Roughly one in five structures is a strict one: a nilpotent
/// differential pairing degree `d` elements with degree `d + 1` elements and nothing else.
pub fn random_structure<R: Rng>(rng: &mut R) -> OracleStructure {
    let dim = rng.gen_range(1..=6);
    let mut degrees: Vec<i64> = (0..dim).map(|_| rng.gen_range(-2..=1)).collect();
    degrees.sort();
    let mut s = OracleStructure { degrees, table: BTreeMap::new() };
    if rng.gen_bool(0.2) {
        let mut idx: Vec<usize> = (0..dim).collect();
        idx.shuffle(rng);
        for pair in idx.chunks(2) {
            if let [a, b] = pair {
                let (a, b) = if s.degrees[*a] <= s.degrees[*b] { (*a, *b) } else { (*b, *a) };
                if s.degrees[b] == s.degrees[a] + 1 {
                    let v: Vector = [(b, q(rng.gen_range(1..=3)))].into_iter().collect();
                    s.table.entry(1).or_default().insert(vec![a], v);
                }
            }
        }
        return s;
    }
    let density = rng.gen_range(0.1..0.5);
    for n in 1..=4 {
        for t in s.tuples(n) {
            let target = t.iter().map(|&i| s.degrees[i]).sum::<i64>() + 1;
            let outputs: Vec<usize> = (0..dim).filter(|&j| s.degrees[j] == target).collect();
            let mut v = Vector::new();
            for j in outputs {
                if rng.gen_bool(density) {
                    let c = rng.gen_range(-3i64..=3);
                    if c != 0 {
                        v.insert(j, q(c));
                    }
                }
            }
            if !v.is_empty() {
                s.table.entry(n).or_default().insert(t, v);
            }
        }
    }
    s
}
