//! Variational calculus on local functions: prolongation, total derivatives,
//! Euler-Lagrange derivatives, divergence detection, Noether identities and the
//! decomposition of gauge commutators.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::algebra::{graded_partial, q, Factors, Generator, GeneratorKind, LocalFunction, MultiIndex, Rational, Side};
use crate::linsolve::{LinearSystem, SparseRow};
use crate::model::ModelSpec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("base coordinate {0} cannot be prolonged")]
    BaseCoordinateProlongation(String),
    #[error("spatial index {index} outside 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("expected a function of base coordinates and fields only, found {0}")]
    NonFieldGeneratorPresent(String),
    #[error("mu is not antisymmetric at ({0})")]
    AntisymmetryViolation(String),
}

fn check_index(i: usize, dim: usize) -> Result<(), JetError> {
    if i == 0 || i > dim {
        Err(JetError::IndexOutOfRange { index: i, dim })
    } else {
        Ok(())
    }
}

pub fn prolong(g: &Generator, i: usize, dim: usize) -> Result<Generator, JetError> {
    if g.kind == GeneratorKind::BaseCoordinate {
        return Err(JetError::BaseCoordinateProlongation(g.to_string()));
    }
    check_index(i, dim)?;
    Ok(g.with_jet(g.jet.with(i as u16)))
}

/// `D_i f = df/dx^i + sum_z z_{Ii} df/dz_I`, over every non-base generator.
pub fn total_derivative(f: &LocalFunction, i: usize, dim: usize) -> Result<LocalFunction, JetError> {
    check_index(i, dim)?;
    Ok(total_derivative_unchecked(f, i as u16))
}

pub(crate) fn total_derivative_unchecked(f: &LocalFunction, i: u16) -> LocalFunction {
    let mut out = LocalFunction::zero();
    let x_i: &str = &i.to_string();
    for g in f.generators() {
        let d = graded_partial(f, &g, Side::Left);
        if g.kind == GeneratorKind::BaseCoordinate {
            if &*g.family == x_i {
                out += &d;
            }
        } else {
            let prolonged = LocalFunction::generator(g.with_jet(g.jet.with(i)));
            out += &(&prolonged * &d);
        }
    }
    out
}

/// `D_I f` for a multi-index `I`.
pub fn total_derivative_multi(f: &LocalFunction, jet: &MultiIndex) -> LocalFunction {
    jet.entries().iter().fold(f.clone(), |acc, &i| total_derivative_unchecked(&acc, i))
}

/// `sum_I (-D)_I (d f / d z_I)` over the jets of `root`'s family present in `f`.
pub fn variational_derivative(f: &LocalFunction, root: &Generator, side: Side) -> LocalFunction {
    let mut out = LocalFunction::zero();
    for g in f.generators() {
        if g.kind != root.kind || g.family != root.family {
            continue;
        }
        let d = graded_partial(f, &g, side);
        let term = total_derivative_multi(&d, &g.jet);
        if g.jet.order() % 2 == 1 {
            out -= &term;
        } else {
            out += &term;
        }
    }
    out
}

/// Euler-Lagrange derivative `E_a(f)`.
pub fn euler_lagrange(f: &LocalFunction, field: &str) -> LocalFunction {
    variational_derivative(f, &Generator::field(field), Side::Left)
}

fn require_fields_only(f: &LocalFunction) -> Result<(), JetError> {
    match f.generators().into_iter().find(|g| !matches!(g.kind, GeneratorKind::Field | GeneratorKind::BaseCoordinate)) {
        Some(g) => Err(JetError::NonFieldGeneratorPresent(g.to_string())),
        None => Ok(()),
    }
}

fn families(f: &LocalFunction) -> BTreeSet<Generator> {
    f.generators().into_iter().filter(|g| g.kind != GeneratorKind::BaseCoordinate).map(|g| g.root()).collect()
}

/// Whether `f` is a total divergence, decided by the Euler-Lagrange test.
///
/// With `dim == 0` there are no divergences besides zero, so only `0` passes.
pub fn is_total_divergence(f: &LocalFunction, dim: usize) -> Result<bool, JetError> {
    require_fields_only(f)?;
    Ok(vanishes_mod_divergence(f, dim))
}

/// Divergence test for arbitrary graded local functions: every variational
/// derivative (fields, antifields, ghosts, antighosts) vanishes.
pub fn vanishes_mod_divergence(f: &LocalFunction, dim: usize) -> bool {
    if dim == 0 {
        return f.is_zero();
    }
    families(f).iter().all(|root| variational_derivative(f, root, Side::Left).is_zero())
}

/// `L` and `K` define the same local functional.
pub fn functionals_equivalent(l: &LocalFunction, k: &LocalFunction, dim: usize) -> Result<bool, JetError> {
    require_fields_only(l)?;
    require_fields_only(k)?;
    Ok(vanishes_mod_divergence(&(l - k), dim))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NoetherReport {
    pub residuals: BTreeMap<String, LocalFunction>,
    pub all_pass: bool,
}

/// Noether identity for each gauge index. For `delta u^a = r^{aI}_alpha D_I eps^alpha`
/// the identity is `sum_{a,I} (-D)_I (r^{aI}_alpha E_a(L)) = 0`; it coincides with
/// `r^{aI} D_I E_a(L)` whenever the coefficients are constant and `|I|` is even.
pub fn check_noether(m: &ModelSpec) -> NoetherReport {
    let el: BTreeMap<&str, LocalFunction> =
        m.fields.iter().map(|a| (a.as_str(), euler_lagrange(&m.lagrangian, a))).collect();
    let mut residuals = BTreeMap::new();
    for alpha in &m.gauge {
        let mut res = LocalFunction::zero();
        for (key, r) in m.generators_of(alpha) {
            let Some(e) = el.get(key.field.as_str()) else { continue };
            let term = total_derivative_multi(&(r * e), &key.jet);
            if key.jet.order() % 2 == 1 {
                res -= &term;
            } else {
                res += &term;
            }
        }
        residuals.insert(alpha.clone(), res);
    }
    let all_pass = residuals.values().all(LocalFunction::is_zero);
    NoetherReport { residuals, all_pass }
}

/// Key `(b, J, a, I)` of a trivial-identity coefficient `mu^{bJ aI}`.
pub type TrivialKey = (String, MultiIndex, String, MultiIndex);

/// Evaluates `sum D_J E_b(L) mu^{bJaI} D_I E_a(L)`, which vanishes identically for
/// antisymmetric `mu`. Returns whether it does.
pub fn verify_trivial_identity(m: &ModelSpec, mu: &BTreeMap<TrivialKey, LocalFunction>) -> Result<bool, JetError> {
    for ((b, jb, a, ia), v) in mu {
        let partner = mu.get(&(a.clone(), ia.clone(), b.clone(), jb.clone())).cloned().unwrap_or_default();
        if partner != -v {
            return Err(JetError::AntisymmetryViolation(format!("{b}, {jb:?}, {a}, {ia:?}")));
        }
    }
    let mut sum = LocalFunction::zero();
    for ((b, jb, a, ia), v) in mu {
        let left = total_derivative_multi(&euler_lagrange(&m.lagrangian, b), jb);
        let right = total_derivative_multi(&euler_lagrange(&m.lagrangian, a), ia);
        sum += &(&(&left * v) * &right);
    }
    Ok(sum.is_zero())
}

/// Result of writing `[delta_alpha, delta_beta] u^a` as
/// `delta_{c(alpha,beta)} u^a + nu^{ab} E_b(L)` within bounded ansatz.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommutatorDecomposition {
    /// `c^gamma_{alpha beta}` for each gauge index `gamma`.
    pub c: BTreeMap<String, LocalFunction>,
    /// `nu^{ab}_{alpha beta}` keyed by `(a, b)`.
    pub nu: BTreeMap<(String, String), LocalFunction>,
    /// Unexplained part of the commutator, per field component.
    pub residual: BTreeMap<String, LocalFunction>,
    /// Dimension of the solution space of the homogeneous ansatz system.
    pub solution_dim: usize,
}

impl CommutatorDecomposition {
    pub fn residual_is_zero(&self) -> bool {
        self.residual.values().all(LocalFunction::is_zero)
    }
}

const PARAM_LEFT: &str = "#eps1";
const PARAM_RIGHT: &str = "#eps2";

/// `delta_eps u^a = sum_I r^{aI}_alpha D_I eps` for each field `a`.
fn gauge_variation(m: &ModelSpec, alpha: &str, param: &str) -> BTreeMap<String, LocalFunction> {
    let mut q: BTreeMap<String, LocalFunction> = m.fields.iter().map(|a| (a.clone(), LocalFunction::zero())).collect();
    let eps = Generator::field(param);
    for (key, r) in m.generators_of(alpha) {
        let d = LocalFunction::generator(eps.with_jet(key.jet.clone()));
        if let Some(slot) = q.get_mut(&key.field) {
            *slot += &(r * &d);
        }
    }
    q
}

/// Applies the evolutionary vector field with characteristic `q` to `f`.
pub(crate) fn evolutionary(q: &BTreeMap<String, LocalFunction>, f: &LocalFunction) -> LocalFunction {
    let mut out = LocalFunction::zero();
    for g in f.generators() {
        if g.kind != GeneratorKind::Field {
            continue;
        }
        let Some(qb) = q.get(&*g.family) else { continue };
        let d = graded_partial(f, &g, Side::Left);
        out += &(&total_derivative_multi(qb, &g.jet) * &d);
    }
    out
}

/// Monomials in fields (jet order `<= p`) and base coordinates of total degree `<= deg`,
/// in canonical order.
pub fn coefficient_monomials(m: &ModelSpec) -> Vec<LocalFunction> {
    let mut vars: Vec<Generator> = (1..=m.dim).map(Generator::base).collect();
    for jet in MultiIndex::all_up_to(m.dim, m.bounds.max_jet_order) {
        for a in &m.fields {
            vars.push(Generator::field(a).with_jet(jet.clone()));
        }
    }
    vars.sort();
    let mut out = Vec::new();
    let mut stack: Vec<(usize, Vec<(Generator, u32)>, usize)> = vec![(0, Vec::new(), 0)];
    while let Some((start, factors, deg)) = stack.pop() {
        out.push(LocalFunction::product(&factors, q(1)));
        if deg == m.bounds.max_poly_degree {
            continue;
        }
        for (k, v) in vars.iter().enumerate().skip(start) {
            let mut next = factors.clone();
            match next.last_mut() {
                Some((g, e)) if g == v => *e += 1,
                _ => next.push((v.clone(), 1)),
            }
            stack.push((k, next, deg + 1));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Decomposes the commutator of the gauge transformations `alpha`, `beta`.
///
/// Unknowns are ordered `c^gamma` (gauge order) before `nu^{ab}`; the particular
/// solution sets free unknowns to zero, so structure functions are preferred.
pub fn gauge_commutator(m: &ModelSpec, alpha: &str, beta: &str) -> CommutatorDecomposition {
    let q1 = gauge_variation(m, alpha, PARAM_LEFT);
    let q2 = gauge_variation(m, beta, PARAM_RIGHT);
    let lhs: BTreeMap<String, LocalFunction> =
        m.fields.iter().map(|a| (a.clone(), &evolutionary(&q1, &q2[a]) - &evolutionary(&q2, &q1[a]))).collect();

    let eps12 = LocalFunction::product(&[(Generator::field(PARAM_LEFT), 1), (Generator::field(PARAM_RIGHT), 1)], q(1));
    let basis = coefficient_monomials(m);
    let el: BTreeMap<&String, LocalFunction> = m.fields.iter().map(|a| (a, euler_lagrange(&m.lagrangian, a))).collect();

    // column images: one map field -> contribution per unknown
    let mut columns: Vec<BTreeMap<String, LocalFunction>> = Vec::new();
    for gamma in &m.gauge {
        for mono in &basis {
            let arg = mono * &eps12;
            let mut image = BTreeMap::new();
            for (key, r) in m.generators_of(gamma) {
                let contrib = r * &total_derivative_multi(&arg, &key.jet);
                *image.entry(key.field.clone()).or_insert_with(LocalFunction::zero) += &contrib;
            }
            columns.push(image);
        }
    }
    for a in &m.fields {
        for b in &m.fields {
            for mono in &basis {
                let mut image = BTreeMap::new();
                image.insert(a.clone(), &(mono * &eps12) * &el[b]);
                columns.push(image);
            }
        }
    }

    let mut rows: BTreeMap<(String, Factors), usize> = BTreeMap::new();
    let mut entries: Vec<SparseRow> = Vec::new();
    let mut row_of = |key: (String, Factors), entries: &mut Vec<SparseRow>| -> usize {
        *rows.entry(key).or_insert_with(|| {
            entries.push(SparseRow::new());
            entries.len() - 1
        })
    };
    for (col, image) in columns.iter().enumerate() {
        for (a, f) in image {
            for (factors, c) in f.terms() {
                let r = row_of((a.clone(), factors.clone()), &mut entries);
                entries[r].insert(col, c.clone());
            }
        }
    }
    let mut rhs = vec![Rational::from_integer(0.into()); entries.len()];
    for (a, f) in &lhs {
        for (factors, c) in f.terms() {
            let r = row_of((a.clone(), factors.clone()), &mut entries);
            if r >= rhs.len() {
                rhs.resize(r + 1, Rational::from_integer(0.into()));
            }
            rhs[r] = c.clone();
        }
    }
    let mut sys = LinearSystem::new(columns.len());
    for (row, b) in entries.into_iter().zip(rhs) {
        sys.push(row, b);
    }
    let sol = sys.solve();

    let mut c = BTreeMap::new();
    let mut nu = BTreeMap::new();
    let mut explained: BTreeMap<String, LocalFunction> = BTreeMap::new();
    let mut col = 0;
    for gamma in &m.gauge {
        let mut f = LocalFunction::zero();
        for mono in &basis {
            f += &mono.scale(&sol.values[col]);
            col += 1;
        }
        c.insert(gamma.clone(), f);
    }
    for a in &m.fields {
        for b in &m.fields {
            let mut f = LocalFunction::zero();
            for mono in &basis {
                f += &mono.scale(&sol.values[col]);
                col += 1;
            }
            nu.insert((a.clone(), b.clone()), f);
        }
    }
    for (k, image) in columns.iter().enumerate() {
        for (a, f) in image {
            *explained.entry(a.clone()).or_insert_with(LocalFunction::zero) += &f.scale(&sol.values[k]);
        }
    }
    let residual =
        lhs.iter().map(|(a, f)| (a.clone(), f - explained.get(a).unwrap_or(&LocalFunction::zero()))).collect();
    CommutatorDecomposition { c, nu, residual, solution_dim: sol.nullity }
}
