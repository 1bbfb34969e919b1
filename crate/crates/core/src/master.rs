//! Extended actions and the classical master equation.
//!
//! An action is stratified by antifield number (`u*` counts 1, `C*` counts 2).
//! Writing `(S, S)_k = 2 delta S_{k+1} + R_k`, where `delta` is the Koszul-Tate
//! part of `(S, .)`, the solver removes the lowest nonzero stratum `R_k` by adding a
//! correction `X` at antifield number `k + 1` with `delta X = -R_k / 2` modulo total
//! divergences, drawn from a bounded monomial ansatz.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{antifield_decompose, q, qq, Factors, Generator, GeneratorKind, LocalFunction, MultiIndex, Side};
use crate::bracket::{antibracket_variational, laplacian, pointwise, BracketError};
use crate::jet::{check_noether, coefficient_monomials, vanishes_mod_divergence, variational_derivative};
use crate::linsolve::{LinearSystem, SparseRow};
use crate::model::{ModelError, ModelSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MasterError {
    #[error("stage 2 requires structure functions")]
    MissingStructureFunctions,
    #[error("stage {0} does not exist; stages are 0, 1 and 2")]
    InvalidStage(u8),
    #[error("Noether identities fail for gauge indices {0:?}")]
    NoetherPreconditionFailed(Vec<String>),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bracket(#[from] BracketError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BVAction {
    pub total: LocalFunction,
    pub by_antifield: BTreeMap<u32, LocalFunction>,
    /// Every stratum of the master residual below this antifield number vanishes.
    pub solved_up_to: usize,
    /// Nonzero strata of `(S, S)` below `solved_up_to`, reduced modulo divergences.
    /// Empty for a solved action.
    pub residual: BTreeMap<u32, LocalFunction>,
    pub dim: usize,
}

impl BVAction {
    /// Wraps `total`. The master residual is computed, and `solved_up_to` is its
    /// lowest nonzero stratum; if `(S, S)` vanishes it is `2 * (max antifield number) + 1`,
    /// beyond which no stratum can occur.
    pub fn from_total(total: LocalFunction, dim: usize) -> Self {
        let by_antifield = antifield_decompose(&total);
        let residual = master_residual_of(&total, dim);
        let top = by_antifield.keys().next_back().copied().unwrap_or(0) as usize;
        let solved_up_to = residual.keys().next().map(|&k| k as usize).unwrap_or(2 * top + 1);
        BVAction { total, by_antifield, solved_up_to, residual: BTreeMap::new(), dim }
    }

    fn with_report(total: LocalFunction, dim: usize, solved_up_to: usize) -> Self {
        let by_antifield = antifield_decompose(&total);
        let residual =
            master_residual_of(&total, dim).into_iter().filter(|(k, _)| (*k as usize) < solved_up_to).collect();
        BVAction { total, by_antifield, solved_up_to, residual, dim }
    }

    pub fn stratum(&self, k: u32) -> LocalFunction {
        self.by_antifield.get(&k).cloned().unwrap_or_default()
    }
}

fn lf(g: Generator) -> LocalFunction {
    LocalFunction::generator(g)
}

/// Stage 0 is `L`; stage 1 adds `u*_a r^{aI}_alpha C^alpha_I`; stage 2 adds
/// `1/2 c^g_{ab} C*_g C^a C^b` and `-1/4 nu^{ab}_{al be} u*_a u*_b C^al C^be`.
pub fn build_stage_action(m: &ModelSpec, stage: u8) -> Result<BVAction, MasterError> {
    m.validate()?;
    if stage > 2 {
        return Err(MasterError::InvalidStage(stage));
    }
    if stage == 2 && m.structure.is_none() {
        return Err(MasterError::MissingStructureFunctions);
    }
    Ok(BVAction::from_total(stage_total(m, stage), m.dim))
}

fn stage_total(m: &ModelSpec, stage: u8) -> LocalFunction {
    let mut s = m.lagrangian.clone();
    if stage >= 1 {
        for (key, r) in &m.generators {
            let ghost = lf(Generator::ghost(&key.gauge).with_jet(key.jet.clone()));
            s += &(&(&lf(Generator::antifield(&key.field)) * r) * &ghost);
        }
    }
    if stage >= 2 {
        for (key, c) in m.structure.iter().flatten() {
            let t = &(&lf(Generator::antighost(&key.out)) * &lf(Generator::ghost(&key.left)))
                * &lf(Generator::ghost(&key.right));
            s += &(&t * c).scale(&qq(1, 2));
        }
        for (key, nu) in m.closure.iter().flatten() {
            let stars = &lf(Generator::antifield(&key.a)) * &lf(Generator::antifield(&key.b));
            let ghosts = &lf(Generator::ghost(&key.left)) * &lf(Generator::ghost(&key.right));
            s += &(&(&stars * &ghosts) * nu).scale(&qq(-1, 4));
        }
    }
    s
}

/// Koszul-Tate part of `(S, f)`: each antifield stratum `k` of `f` is mapped to the
/// stratum `k - 1` of its bracket with `S`.
pub fn kt_differential(s: &BVAction, f: &LocalFunction) -> LocalFunction {
    let low = &s.stratum(0) + &s.stratum(1);
    let mut out = LocalFunction::zero();
    for (k, piece) in antifield_decompose(f) {
        if k == 0 {
            continue;
        }
        let b = antibracket_variational(&low, &piece);
        if let Some(part) = antifield_decompose(&b).remove(&(k - 1)) {
            out += &part;
        }
    }
    out
}

fn master_residual_of(total: &LocalFunction, dim: usize) -> BTreeMap<u32, LocalFunction> {
    antifield_decompose(&antibracket_variational(total, total))
        .into_iter()
        .filter(|(_, f)| !vanishes_mod_divergence(f, dim))
        .collect()
}

/// `(S, S)` split by antifield number; strata that are total divergences are dropped.
pub fn master_residual(s: &BVAction) -> BTreeMap<u32, LocalFunction> {
    master_residual_of(&s.total, s.dim)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionRecord {
    /// Antifield number of the residual stratum `R_k`.
    pub antifield_number: u32,
    pub obstruction: LocalFunction,
    pub lifted: bool,
    /// Correction at antifield number `k + 1`, when found.
    pub correction: Option<LocalFunction>,
    pub ansatz_monomials: usize,
    pub solution_dim: usize,
    pub max_jet_order: usize,
    pub max_poly_degree: usize,
}

/// Solves `(S, S) = 0` through antifield number `K`, starting from the highest stage
/// the model supports. A stratum that cannot be lifted within the bounds stops the
/// iteration; `solved_up_to` is then that stratum.
pub fn solve_master(m: &ModelSpec, k_max: usize) -> Result<(BVAction, Vec<ObstructionRecord>), MasterError> {
    m.validate()?;
    let noether = check_noether(m);
    if !noether.all_pass {
        let failing = noether.residuals.iter().filter(|(_, r)| !r.is_zero()).map(|(a, _)| a.clone()).collect();
        return Err(MasterError::NoetherPreconditionFailed(failing));
    }
    let stage = if m.structure.is_some() {
        2
    } else if m.has_gauge_structure() {
        1
    } else {
        0
    };
    let mut total = stage_total(m, stage);
    let mut records = Vec::new();
    let mut solved = k_max;
    for k in 0..k_max as u32 {
        let residual = master_residual_of(&total, m.dim);
        let Some(r_k) = residual.get(&k) else { continue };
        let current = BVAction {
            by_antifield: antifield_decompose(&total),
            total: total.clone(),
            solved_up_to: 0,
            residual: BTreeMap::new(),
            dim: m.dim,
        };
        let ansatz = ansatz_monomials(m, k + 1);
        let target = r_k.scale(&qq(-1, 2));
        let (correction, nullity) = lift(&current, &ansatz, &target, m.dim);
        records.push(ObstructionRecord {
            antifield_number: k,
            obstruction: r_k.clone(),
            lifted: correction.is_some(),
            correction: correction.clone(),
            ansatz_monomials: ansatz.len(),
            solution_dim: nullity,
            max_jet_order: m.bounds.max_jet_order,
            max_poly_degree: m.bounds.max_poly_degree,
        });
        match correction {
            Some(x) => total += &x,
            None => {
                solved = k as usize;
                break;
            }
        }
    }
    Ok((BVAction::with_report(total, m.dim, solved), records))
}

/// Candidate corrections at antifield number `q_total` and ghost number zero:
/// antifields (each at most once), antighosts, exactly `q_total` distinct ghosts and
/// a field monomial within the model bounds.
pub fn ansatz_monomials(m: &ModelSpec, q_total: u32) -> Vec<LocalFunction> {
    let jets = MultiIndex::all_up_to(m.dim, m.bounds.max_jet_order);
    let mut conj: Vec<Generator> = Vec::new();
    for jet in &jets {
        for a in &m.fields {
            conj.push(Generator::antifield(a).with_jet(jet.clone()));
        }
        for alpha in &m.gauge {
            conj.push(Generator::antighost(alpha).with_jet(jet.clone()));
        }
    }
    conj.sort();
    let mut ghosts: Vec<Generator> = jets
        .iter()
        .flat_map(|jet| m.gauge.iter().map(move |alpha| Generator::ghost(alpha).with_jet(jet.clone())))
        .collect();
    ghosts.sort();

    let mut conj_parts = Vec::new();
    conj_combinations(&conj, 0, q_total, &mut Vec::new(), &mut conj_parts);
    let mut ghost_parts = Vec::new();
    subsets(&ghosts, 0, q_total as usize, &mut Vec::new(), &mut ghost_parts);
    let fields = coefficient_monomials(m);

    let mut seen: BTreeSet<Factors> = BTreeSet::new();
    let mut out = Vec::new();
    for c in &conj_parts {
        for g in &ghost_parts {
            let head = LocalFunction::product(&[c.clone(), g.clone()].concat(), q(1));
            if head.is_zero() {
                continue;
            }
            for f in &fields {
                let mono = &head * f;
                let Some(factors) = mono.terms().next().map(|(k, _)| k.clone()) else { continue };
                if seen.insert(factors.clone()) {
                    out.push(LocalFunction::product(&factors, q(1)));
                }
            }
        }
    }
    out
}

fn conj_combinations(
    vars: &[Generator],
    start: usize,
    remaining: u32,
    current: &mut Vec<(Generator, u32)>,
    out: &mut Vec<Vec<(Generator, u32)>>,
) {
    if remaining == 0 {
        out.push(current.clone());
        return;
    }
    for (i, v) in vars.iter().enumerate().skip(start) {
        let weight = v.bidegree().antighost;
        if weight > remaining {
            continue;
        }
        current.push((v.clone(), 1));
        let next = if v.is_odd() { i + 1 } else { i };
        conj_combinations(vars, next, remaining - weight, current, out);
        current.pop();
    }
}

fn subsets(
    vars: &[Generator],
    start: usize,
    remaining: usize,
    current: &mut Vec<(Generator, u32)>,
    out: &mut Vec<Vec<(Generator, u32)>>,
) {
    if remaining == 0 {
        out.push(current.clone());
        return;
    }
    for i in start..vars.len() {
        current.push((vars[i].clone(), 1));
        subsets(vars, i + 1, remaining - 1, current, out);
        current.pop();
    }
}

/// Solves `delta X = target` modulo divergences with `X` in the span of `ansatz`.
fn lift(s: &BVAction, ansatz: &[LocalFunction], target: &LocalFunction, dim: usize) -> (Option<LocalFunction>, usize) {
    let images: Vec<LocalFunction> = ansatz.iter().map(|x| kt_differential(s, x)).collect();
    let project =
        |f: &LocalFunction, roots: &BTreeSet<Generator>| -> Vec<((Generator, Factors), crate::algebra::Rational)> {
            if dim == 0 {
                let dummy = Generator::base(0);
                return f.terms().map(|(k, c)| ((dummy.clone(), k.clone()), c.clone())).collect();
            }
            let mut out = Vec::new();
            for z in roots {
                for (k, c) in variational_derivative(f, z, Side::Left).terms() {
                    out.push(((z.clone(), k.clone()), c.clone()));
                }
            }
            out
        };
    let roots: BTreeSet<Generator> = images
        .iter()
        .chain(std::iter::once(target))
        .flat_map(|f| f.generators())
        .filter(|g| g.kind != GeneratorKind::BaseCoordinate)
        .map(|g| g.root())
        .collect();

    let mut row_index: BTreeMap<(Generator, Factors), usize> = BTreeMap::new();
    let mut rows: Vec<SparseRow> = Vec::new();
    let mut index = |key: (Generator, Factors), rows: &mut Vec<SparseRow>| -> usize {
        *row_index.entry(key).or_insert_with(|| {
            rows.push(SparseRow::new());
            rows.len() - 1
        })
    };
    for (col, image) in images.iter().enumerate() {
        for (key, c) in project(image, &roots) {
            let r = index(key, &mut rows);
            rows[r].insert(col, c);
        }
    }
    let mut rhs = BTreeMap::new();
    for (key, c) in project(target, &roots) {
        let r = index(key, &mut rows);
        rhs.insert(r, c);
    }
    let mut system = LinearSystem::new(ansatz.len());
    for (r, row) in rows.into_iter().enumerate() {
        system.push(row, rhs.remove(&r).unwrap_or_else(|| q(0)));
    }
    let solution = system.solve();
    if !solution.consistent {
        return (None, solution.nullity);
    }
    let mut x = LocalFunction::zero();
    for (mono, v) in ansatz.iter().zip(&solution.values) {
        x += &mono.scale(v);
    }
    (Some(x), solution.nullity)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QmeReport {
    pub classical: LocalFunction,
    pub delta: LocalFunction,
    pub quantum_residual: LocalFunction,
}

impl QmeReport {
    pub fn satisfied(&self) -> bool {
        self.quantum_residual.is_zero()
    }
}

/// `(S, S)`, `Delta S` and `(S, S) - Delta S` on a finite model.
pub fn quantum_master_check(s: &BVAction) -> Result<QmeReport, MasterError> {
    if s.dim != 0 {
        return Err(BracketError::JetModelUnsupported(format!("dimension {}", s.dim)).into());
    }
    if let Some(g) = s.total.generators().into_iter().find(|g| !g.jet.is_empty()) {
        return Err(BracketError::JetModelUnsupported(g.to_string()).into());
    }
    let classical = pointwise(&s.total, &s.total);
    let delta = laplacian(&s.total);
    let quantum_residual = &classical - &delta;
    Ok(QmeReport { classical, delta, quantum_residual })
}
