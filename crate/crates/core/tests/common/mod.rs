#![allow(dead_code)]

pub mod linfty_oracle;

use std::collections::BTreeMap;

use bvforge::algebra::{q, qq, Generator, LocalFunction, MultiIndex, Rational};
use bvforge::jet::gauge_commutator;
use bvforge::model::ModelSpec;
use num_traits::Zero;

pub fn u(a: &str) -> LocalFunction {
    LocalFunction::generator(Generator::field(a))
}

pub fn uj(a: &str, jet: &[u16]) -> LocalFunction {
    LocalFunction::generator(Generator::field(a).with_jet(MultiIndex::new(jet.to_vec())))
}

pub fn ustar(a: &str) -> LocalFunction {
    LocalFunction::generator(Generator::antifield(a))
}

pub fn ghost(a: &str) -> LocalFunction {
    LocalFunction::generator(Generator::ghost(a))
}

pub fn cstar(a: &str) -> LocalFunction {
    LocalFunction::generator(Generator::antighost(a))
}

pub fn int(n: i64) -> LocalFunction {
    LocalFunction::integer(n)
}

/// Levi-Civita symbol on indices 1..=3.
pub fn levi(a: usize, b: usize, c: usize) -> i64 {
    match (a, b, c) {
        (1, 2, 3) | (2, 3, 1) | (3, 1, 2) => 1,
        (3, 2, 1) | (1, 3, 2) | (2, 1, 3) => -1,
        _ => 0,
    }
}

const I3: [&str; 3] = ["1", "2", "3"];

/// `L = 1/2 u_1^2` in one dimension with `delta u = eps`; not gauge invariant.
pub fn scalar() -> ModelSpec {
    ModelSpec::new(
        1,
        &["1"],
        &["1"],
        LocalFunction::product(&[(Generator::field("1").with_jet(MultiIndex::new(vec![1])), 2)], qq(1, 2)),
    )
    .with_generator("1", "1", &[], int(1))
}

/// `delta u = D_1 eps` with vanishing Lagrangian.
pub fn abelian() -> ModelSpec {
    ModelSpec::new(1, &["1"], &["1"], LocalFunction::zero()).with_generator("1", "1", &[1], int(1))
}

/// `L = 1/2 (u - phi_1)^2`, `delta u = D_1 eps`, `delta phi = eps`.
pub fn stueckelberg() -> ModelSpec {
    let w = &u("u") - &uj("phi", &[1]);
    ModelSpec::new(1, &["phi", "u"], &["1"], (&w * &w).scale(&qq(1, 2)))
        .with_generator("u", "1", &[1], int(1))
        .with_generator("phi", "1", &[], int(1))
}

/// Two-dimensional Maxwell theory `L = 1/2 (A_{2,1} - A_{1,2})^2`.
pub fn maxwell() -> ModelSpec {
    let f = &uj("2", &[1]) - &uj("1", &[2]);
    ModelSpec::new(2, &["1", "2"], &["1"], (&f * &f).scale(&qq(1, 2)))
        .with_generator("1", "1", &[1], int(1))
        .with_generator("2", "1", &[2], int(1))
}

/// so(3) with no fields: only the ghost sector.
pub fn so3_ghosts() -> ModelSpec {
    ModelSpec::new(0, &[], &I3, LocalFunction::zero())
        .with_structure("3", "1", "2", int(1))
        .with_structure("1", "2", "3", int(1))
        .with_structure("2", "3", "1", int(1))
}

/// Structure constants `[e1, e2] = e2`, `[e2, e3] = e1`, `[e3, e1] = 0`, which violate Jacobi.
pub fn fake_jacobi() -> ModelSpec {
    ModelSpec::new(0, &[], &I3, LocalFunction::zero()).with_structure("2", "1", "2", int(1)).with_structure(
        "1",
        "2",
        "3",
        int(1),
    )
}

/// `delta u = eps x (u + v)` for a fixed vector `v`, with `L = 0`.
pub fn shifted_so3(v: [i64; 3]) -> ModelSpec {
    let mut m = ModelSpec::new(0, &I3, &I3, LocalFunction::zero());
    for a in 1..=3 {
        for al in 1..=3 {
            for b in 1..=3 {
                let e = levi(a, al, b);
                if e != 0 {
                    let w = &u(I3[b - 1]) + &int(v[b - 1]);
                    m = m.with_generator(I3[a - 1], I3[al - 1], &[], w.scale(&q(e)));
                }
            }
        }
    }
    m
}

/// Rotations `delta u = eps x u` with the invariant `L = 1/2 |u|^2`.
pub fn so3_rotations() -> ModelSpec {
    let mut m = shifted_so3([0, 0, 0]);
    m.lagrangian = I3.iter().fold(LocalFunction::zero(), |acc, a| &acc + &(&u(a) * &u(a)).scale(&qq(1, 2)));
    m
}

/// Rotations about the first two axes only, with `L = 1/2 |u|^2`. Their commutator is
/// the third rotation, which closes only up to equations of motion.
pub fn open_rotation() -> ModelSpec {
    let l = I3.iter().fold(LocalFunction::zero(), |acc, a| &acc + &(&u(a) * &u(a)).scale(&qq(1, 2)));
    ModelSpec::new(0, &I3, &["1", "2"], l)
        .with_generator("2", "1", &[], -&u("3"))
        .with_generator("3", "1", &[], u("2"))
        .with_generator("1", "2", &[], u("3"))
        .with_generator("3", "2", &[], -&u("1"))
}

/// Adds the structure functions read off the gauge commutators.
pub fn with_commutator_structure(mut m: ModelSpec) -> ModelSpec {
    let gauge = m.gauge.clone();
    for (i, al) in gauge.iter().enumerate() {
        for be in gauge.iter().skip(i + 1) {
            let d = gauge_commutator(&m, al, be);
            assert!(d.residual_is_zero());
            for (ga, c) in &d.c {
                m = m.with_structure(ga, al, be, c.clone());
            }
        }
    }
    m.structure.get_or_insert_with(Default::default);
    m
}

/// Eight generators covering every kind and parity, with one jet coordinate.
pub fn mixed_pool() -> Vec<Generator> {
    vec![
        Generator::base(1),
        Generator::field("1"),
        Generator::field("1").with_jet(MultiIndex::new(vec![1])),
        Generator::field("2"),
        Generator::antifield("1"),
        Generator::ghost("1"),
        Generator::ghost("2"),
        Generator::antighost("1"),
    ]
}

/// Word oracle: a product of generators in the order written. Canonical form is
/// reached by sorting, with the sign given by the number of inversions among
/// odd letters.
pub fn canonical_word(word: &[Generator]) -> Option<(Vec<Generator>, bool)> {
    let mut negative = false;
    for i in 0..word.len() {
        for j in i + 1..word.len() {
            if word[i].is_odd() && word[j].is_odd() {
                if word[i] == word[j] {
                    return None;
                }
                if word[i] > word[j] {
                    negative = !negative;
                }
            }
        }
    }
    let mut sorted = word.to_vec();
    sorted.sort();
    Some((sorted, negative))
}

pub type WordSum = BTreeMap<Vec<Generator>, Rational>;

pub fn add_word(out: &mut WordSum, word: &[Generator], c: Rational) {
    if let Some((w, neg)) = canonical_word(word) {
        let c = if neg { -c } else { c };
        let slot = out.entry(w.clone()).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            out.remove(&w);
        }
    }
}

pub fn to_function(sum: &WordSum) -> LocalFunction {
    let mut f = LocalFunction::zero();
    for (w, c) in sum {
        let factors: Vec<(Generator, u32)> = w.iter().map(|g| (g.clone(), 1)).collect();
        f += &LocalFunction::product(&factors, c.clone());
    }
    f
}

pub fn words_of(f: &LocalFunction) -> Vec<(Vec<Generator>, Rational)> {
    f.terms()
        .map(|(factors, c)| {
            let w = factors.iter().flat_map(|(g, e)| std::iter::repeat_n(g.clone(), *e as usize)).collect();
            (w, c.clone())
        })
        .collect()
}

/// Command lines over the fixture corpus (paths relative to `fixtures/`) with
/// their expected exit status.
pub const CLI_CORPUS: &[(&[&str], i32)] = &[
    (&["el", "scalar.bv", "--field", "1"], 0),
    (&["el", "maxwell.bv"], 0),
    (&["divergence", "scalar.bv"], 1),
    (&["divergence", "scalar.bv", "-e", "u[1]*u[1; 1 1] + u[1; 1]^2"], 0),
    (&["divergence", "maxwell.bv"], 1),
    (&["divergence", "zero.bv"], 0),
    (&["noether", "scalar.bv"], 1),
    (&["noether", "abelian.bv"], 0),
    (&["noether", "stueckelberg.bv"], 0),
    (&["noether", "maxwell.bv"], 0),
    (&["noether", "open-rotation.bv"], 0),
    (&["bracket", "so3.bv", "-e", "C[1]", "-e", "Cstar[1]*C[2]"], 0),
    (&["bracket", "scalar.bv", "-e", "u[1]^2", "-e", "ustar[1; 1]"], 0),
    (&["bracket", "so3.bv", "-e", "C[1]"], 2),
    (&["delta", "so3.bv"], 0),
    (&["delta", "open-rotation.bv", "-e", "u[1]*ustar[1]"], 0),
    (&["delta", "scalar.bv"], 2),
    (&["build", "so3.bv"], 0),
    (&["build", "abelian.bv", "--stage", "1"], 0),
    (&["build", "so3.bv", "--stage", "3"], 2),
    (&["build", "abelian.bv", "--stage", "2"], 2),
    (&["solve", "so3.bv", "-K", "3"], 0),
    (&["solve", "so3-fake.bv", "-K", "3"], 1),
    (&["solve", "open-rotation.bv", "-K", "3"], 0),
    (&["solve", "abelian.bv", "-K", "2"], 0),
    (&["solve", "stueckelberg.bv", "-K", "2"], 0),
    (&["solve", "shifted-so3.bv", "-K", "3"], 0),
    (&["solve", "scalar.bv", "-K", "2"], 2),
    (&["solve", "so3.bv", "--bounds", "jet=1,deg=3"], 0),
    (&["residual", "so3-fake.bv"], 1),
    (&["residual", "abelian.bv", "--stage", "1"], 0),
    (&["residual", "scalar.bv", "--stage", "1"], 1),
    (&["qme", "so3.bv"], 0),
    (&["qme", "zero.bv"], 0),
    (&["qme", "open-rotation.bv", "-e", "u[1]*ustar[1]"], 1),
    (&["qme", "abelian.bv"], 2),
    (&["extract", "so3.bv", "-n", "3"], 0),
    (&["extract", "shifted-so3.bv", "-n", "3"], 0),
    (&["check-linfty", "so3.bv", "-n", "4"], 0),
    (&["check-linfty", "zero.bv", "-n", "4"], 0),
    (&["check-linfty", "shifted-so3.bv", "-n", "4"], 0),
    (&["check-linfty", "open-rotation.bv", "-n", "4"], 1),
    (&["check-linfty", "so3-fake.bv", "-n", "3"], 2),
    (&["mc", "shifted-so3.bv", "--theta", "u[1]", "--theta", "u[2]"], 0),
    (&["mc", "so3.bv", "--theta", "C[1]"], 2),
    (&["solve", "missing.bv"], 2),
    (&["transmogrify", "so3.bv"], 2),
    (&["solve", "so3.bv", "--bounds", "jet=x"], 2),
];

/// Runs the built binary from the fixture directory.
pub fn run_cli(args: &[&str]) -> std::process::Output {
    std::process::Command::new(env!("CARGO_BIN_EXE_bvforge"))
        .args(args)
        .current_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
        .output()
        .expect("binary runs")
}
