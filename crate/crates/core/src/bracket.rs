//! The antibracket, in a pointwise regime for finite models and a variational
//! regime for jet models, together with the BV Laplacian and randomized
//! harnesses for the Gerstenhaber and BV-algebra identities.
//!
//! Conventions: `(f, g) = sum_z dR f/dz dL g/dz* - dR f/dz* dL g/dz`, so
//! `(u, u*) = (C, C*) = 1` and `gh (f, g) = gh f + gh g + 1`. Every sign rule below
//! uses parities only.

use std::collections::{BTreeMap, BTreeSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::random::{random_function, SampleShape};
use crate::algebra::{graded_partial, Generator, GeneratorKind, LocalFunction, Side};
use crate::jet::variational_derivative;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BracketError {
    #[error("generator {0} carries a jet index; use the variational antibracket")]
    JetModelRequiresVariationalBracket(String),
    #[error("the BV Laplacian is only defined on finite models, found {0}")]
    JetModelUnsupported(String),
}

/// Pairing `u^a_I <-> u*_a^I`, `C^alpha_I <-> C*_alpha^I`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConjugatePairTable {
    pairs: BTreeMap<Generator, Generator>,
}

impl ConjugatePairTable {
    pub fn from_generators<'a>(gens: impl IntoIterator<Item = &'a Generator>) -> Self {
        let mut pairs = BTreeMap::new();
        for g in gens {
            if let Some(c) = g.conjugate() {
                pairs.insert(c.clone(), g.clone());
                pairs.insert(g.clone(), c);
            }
        }
        ConjugatePairTable { pairs }
    }

    pub fn conjugate(&self, g: &Generator) -> Option<&Generator> {
        self.pairs.get(g)
    }

    /// `(z, z*)` with `z` a field or ghost.
    pub fn positive_pairs(&self) -> impl Iterator<Item = (&Generator, &Generator)> {
        self.pairs.iter().filter(|(z, _)| !z.kind.is_conjugate())
    }

    pub fn len(&self) -> usize {
        self.pairs.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

fn first_jet_generator(fs: &[&LocalFunction]) -> Option<Generator> {
    fs.iter().flat_map(|f| f.generators()).find(|g| !g.jet.is_empty())
}

fn pairs_of(f: &LocalFunction, g: &LocalFunction) -> ConjugatePairTable {
    let gens: BTreeSet<Generator> = f.generators().into_iter().chain(g.generators()).collect();
    ConjugatePairTable::from_generators(gens.iter())
}

/// Antibracket for models without jet coordinates.
pub fn antibracket_pointwise(f: &LocalFunction, g: &LocalFunction) -> Result<LocalFunction, BracketError> {
    if let Some(j) = first_jet_generator(&[f, g]) {
        return Err(BracketError::JetModelRequiresVariationalBracket(j.to_string()));
    }
    Ok(pointwise(f, g))
}

pub(crate) fn pointwise(f: &LocalFunction, g: &LocalFunction) -> LocalFunction {
    let table = pairs_of(f, g);
    let mut out = LocalFunction::zero();
    for (z, zs) in table.positive_pairs() {
        out += &(&graded_partial(f, z, Side::Right) * &graded_partial(g, zs, Side::Left));
        out -= &(&graded_partial(f, zs, Side::Right) * &graded_partial(g, z, Side::Left));
    }
    out
}

/// Antibracket of local functionals, with variational derivatives in place of
/// partial ones. The result is a representative modulo total divergences.
pub fn antibracket_variational(f: &LocalFunction, g: &LocalFunction) -> LocalFunction {
    let roots: BTreeSet<Generator> = f
        .generators()
        .into_iter()
        .chain(g.generators())
        .filter(|z| z.kind != GeneratorKind::BaseCoordinate)
        .map(|z| z.root())
        .collect();
    let positives: BTreeSet<Generator> = roots
        .iter()
        .map(|z| if z.kind.is_conjugate() { z.conjugate().expect("paired kind") } else { z.clone() })
        .collect();
    let mut out = LocalFunction::zero();
    for z in &positives {
        let zs = z.conjugate().expect("paired kind");
        let a = variational_derivative(f, z, Side::Right);
        if !a.is_zero() {
            out += &(&a * &variational_derivative(g, &zs, Side::Left));
        }
        let b = variational_derivative(f, &zs, Side::Right);
        if !b.is_zero() {
            out -= &(&b * &variational_derivative(g, z, Side::Left));
        }
    }
    out
}

/// Sign of the BV Laplacian relative to `sum_z (-1)^{|z|} dL/dz dL/dz*`. Fixed by
/// requiring `(-1)^{|A|} (A, B) = Delta(AB) - Delta(A) B - (-1)^{|A|} A Delta(B)`.
pub const DELTA_SIGN: i64 = 1;

/// `Delta f = sum_z (-1)^{|z|} dL/dz (dL f/dz*)`, on finite models.
pub fn bv_laplacian(f: &LocalFunction) -> Result<LocalFunction, BracketError> {
    if let Some(j) = first_jet_generator(&[f]) {
        return Err(BracketError::JetModelUnsupported(j.to_string()));
    }
    Ok(laplacian(f))
}

pub(crate) fn laplacian(f: &LocalFunction) -> LocalFunction {
    let table = pairs_of(f, &LocalFunction::zero());
    let mut out = LocalFunction::zero();
    for (z, zs) in table.positive_pairs() {
        let inner = graded_partial(f, zs, Side::Left);
        if inner.is_zero() {
            continue;
        }
        let term = graded_partial(&inner, z, Side::Left);
        if z.is_odd() != (DELTA_SIGN < 0) {
            out -= &term;
        } else {
            out += &term;
        }
    }
    out
}

/// `Delta(AB) - Delta(A) B - (-1)^{|A|} A Delta(B)`; equals `(-1)^{|A|} (A, B)`.
pub fn bv_deviation(a: &LocalFunction, b: &LocalFunction) -> LocalFunction {
    let odd_a = a.parity().unwrap_or(false);
    let mut out = laplacian(&(a * b));
    out -= &(&laplacian(a) * b);
    let last = a * &laplacian(b);
    if odd_a {
        out += &last;
    } else {
        out -= &last;
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub identity: String,
    pub sample: usize,
    pub inputs: Vec<String>,
    pub residual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HarnessReport {
    pub samples: usize,
    /// Number of evaluations per identity.
    pub checked: BTreeMap<String, usize>,
    pub failures: Vec<Counterexample>,
    pub pass: bool,
}

impl HarnessReport {
    fn new(samples: usize) -> Self {
        HarnessReport { samples, checked: BTreeMap::new(), failures: Vec::new(), pass: true }
    }

    fn record(&mut self, identity: &str, sample: usize, inputs: &[&LocalFunction], residual: LocalFunction) {
        *self.checked.entry(identity.to_string()).or_default() += 1;
        if !residual.is_zero() {
            self.pass = false;
            self.failures.push(Counterexample {
                identity: identity.to_string(),
                sample,
                inputs: inputs.iter().map(|f| f.to_string()).collect(),
                residual: residual.to_string(),
            });
        }
    }

    pub fn failures_of(&self, identity: &str) -> usize {
        self.failures.iter().filter(|c| c.identity == identity).count()
    }
}

/// Generators of the finite test model: two fields and one ghost with their conjugates.
pub fn three_pair_pool() -> Vec<Generator> {
    let pos = [Generator::field("1"), Generator::field("2"), Generator::ghost("1")];
    pos.iter().flat_map(|z| [z.clone(), z.conjugate().expect("paired kind")]).collect()
}

fn sign(odd: bool, f: LocalFunction) -> LocalFunction {
    if odd {
        -f
    } else {
        f
    }
}

/// Checks graded antisymmetry, graded Jacobi and the Leibniz rule for `bracket`
/// on random parity-homogeneous triples.
pub fn gerstenhaber_harness_with(
    samples: usize,
    seed: u64,
    pool: &[Generator],
    shape: &SampleShape,
    bracket: &dyn Fn(&LocalFunction, &LocalFunction) -> LocalFunction,
) -> HarnessReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = HarnessReport::new(samples);
    for n in 0..samples {
        let pf = rand::Rng::gen_bool(&mut rng, 0.5);
        let pg = rand::Rng::gen_bool(&mut rng, 0.5);
        let ph = rand::Rng::gen_bool(&mut rng, 0.5);
        let f = random_function(&mut rng, pool, shape, Some(pf));
        let g = random_function(&mut rng, pool, shape, Some(pg));
        let h = random_function(&mut rng, pool, shape, Some(ph));
        gerstenhaber_identities(&mut report, n, [&f, &g, &h], [pf, pg, ph], bracket);
    }
    report
}

fn gerstenhaber_identities(
    report: &mut HarnessReport,
    n: usize,
    [f, g, h]: [&LocalFunction; 3],
    [pf, pg, ph]: [bool; 3],
    bracket: &dyn Fn(&LocalFunction, &LocalFunction) -> LocalFunction,
) {
    let _ = ph;
    // shifted parities |x| + 1
    let (sf, sg) = (!pf, !pg);
    let fg = bracket(f, g);
    let antisym = &fg + &sign(sf && sg, bracket(g, f));
    report.record("antisymmetry", n, &[f, g], antisym);

    let lhs = bracket(f, &bracket(g, h));
    let rhs = &bracket(&fg, h) + &sign(sf && sg, bracket(g, &bracket(f, h)));
    report.record("jacobi", n, &[f, g, h], &lhs - &rhs);

    let lhs = bracket(f, &(g * h));
    let rhs = &(&fg * h) + &sign(sf && pg, g * &bracket(f, h));
    report.record("leibniz", n, &[f, g, h], &lhs - &rhs);
}

/// Gerstenhaber identities for the pointwise antibracket over three conjugate pairs.
pub fn gerstenhaber_harness(samples: usize, seed: u64) -> HarnessReport {
    gerstenhaber_harness_with(samples, seed, &three_pair_pool(), &SampleShape::default(), &pointwise)
}

/// Checks `Delta^2 = 0` and the compatibility of `Delta` with the antibracket.
pub fn bv_identity_harness(samples: usize, seed: u64) -> HarnessReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pool = three_pair_pool();
    let shape = SampleShape::default();
    let mut report = HarnessReport::new(samples);
    for n in 0..samples {
        let pa = rand::Rng::gen_bool(&mut rng, 0.5);
        let pb = rand::Rng::gen_bool(&mut rng, 0.5);
        let a = random_function(&mut rng, &pool, &shape, Some(pa));
        let b = random_function(&mut rng, &pool, &shape, Some(pb));
        report.record("delta_squared", n, &[&a], laplacian(&laplacian(&a)));
        let expected = sign(pa, pointwise(&a, &b));
        report.record("bv_compatibility", n, &[&a, &b], &bv_deviation(&a, &b) - &expected);
    }
    report
}
