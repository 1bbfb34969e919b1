//! Gauge-theory descriptions: field content, Lagrangian, gauge generators and
//! optional structure/closure functions.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::algebra::{Generator, GeneratorKind, LocalFunction, MultiIndex};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown field family `{0}`")]
    UnknownField(String),
    #[error("unknown gauge index `{0}`")]
    UnknownGauge(String),
    #[error("duplicate declaration of `{0}`")]
    Duplicate(String),
    #[error("{context}: generator {generator} is not allowed here")]
    ForbiddenGenerator { context: String, generator: String },
    #[error("{context}: jet order {order} exceeds the bound {bound}")]
    JetOrderExceeded { context: String, order: usize, bound: usize },
    #[error("{context}: spatial index {index} outside 1..={dim}")]
    IndexOutOfRange { context: String, index: usize, dim: usize },
    #[error("structure functions are not antisymmetric in ({left}, {right}) for output `{out}`")]
    StructureNotAntisymmetric { out: String, left: String, right: String },
    #[error("closure functions are not antisymmetric at ({a}, {b}; {left}, {right})")]
    ClosureNotAntisymmetric { a: String, b: String, left: String, right: String },
}

/// Key of a gauge-generator coefficient `r^{aI}_alpha`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GeneratorKey {
    pub field: String,
    pub gauge: String,
    pub jet: MultiIndex,
}

/// Key of a structure function `c^out_{left right}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StructureKey {
    pub out: String,
    pub left: String,
    pub right: String,
}

/// Key of a closure function `nu^{ab}_{left right}`: the commutator of two gauge
/// transformations acting on `u^a` contains `nu^{ab} E_b(L)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClosureKey {
    pub a: String,
    pub b: String,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bounds {
    pub max_jet_order: usize,
    pub max_poly_degree: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { max_jet_order: 2, max_poly_degree: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelSpec {
    pub dim: usize,
    pub fields: Vec<String>,
    pub gauge: Vec<String>,
    pub lagrangian: LocalFunction,
    pub generators: BTreeMap<GeneratorKey, LocalFunction>,
    pub structure: Option<BTreeMap<StructureKey, LocalFunction>>,
    pub closure: Option<BTreeMap<ClosureKey, LocalFunction>>,
    pub bounds: Bounds,
}

impl ModelSpec {
    pub fn new(dim: usize, fields: &[&str], gauge: &[&str], lagrangian: LocalFunction) -> Self {
        ModelSpec {
            dim,
            fields: fields.iter().map(|s| s.to_string()).collect(),
            gauge: gauge.iter().map(|s| s.to_string()).collect(),
            lagrangian,
            generators: BTreeMap::new(),
            structure: None,
            closure: None,
            bounds: Bounds::default(),
        }
    }

    pub fn with_bounds(mut self, max_jet_order: usize, max_poly_degree: usize) -> Self {
        self.bounds = Bounds { max_jet_order, max_poly_degree };
        self
    }

    /// Adds `coeff` to `r^{aI}_alpha`.
    pub fn with_generator(mut self, field: &str, gauge: &str, jet: &[u16], coeff: LocalFunction) -> Self {
        let key = GeneratorKey { field: field.into(), gauge: gauge.into(), jet: MultiIndex::new(jet.to_vec()) };
        let entry = self.generators.entry(key.clone()).or_default();
        *entry += &coeff;
        if entry.is_zero() {
            self.generators.remove(&key);
        }
        self
    }

    /// Sets `c^out_{left right}` and its antisymmetric partner. Declares the
    /// structure functions even when `coeff` is zero.
    pub fn with_structure(mut self, out: &str, left: &str, right: &str, coeff: LocalFunction) -> Self {
        let map = self.structure.get_or_insert_with(BTreeMap::new);
        let entries = [
            (StructureKey { out: out.into(), left: right.into(), right: left.into() }, -&coeff),
            (StructureKey { out: out.into(), left: left.into(), right: right.into() }, coeff),
        ];
        insert_nonzero(map, entries);
        self
    }

    /// Sets `nu^{ab}_{left right}` together with its three antisymmetric partners.
    pub fn with_closure(mut self, a: &str, b: &str, left: &str, right: &str, coeff: LocalFunction) -> Self {
        let map = self.closure.get_or_insert_with(BTreeMap::new);
        let key = |a: &str, b: &str, l: &str, r: &str| ClosureKey {
            a: a.into(),
            b: b.into(),
            left: l.into(),
            right: r.into(),
        };
        let entries = [
            (key(b, a, right, left), coeff.clone()),
            (key(b, a, left, right), -&coeff),
            (key(a, b, right, left), -&coeff),
            (key(a, b, left, right), coeff),
        ];
        insert_nonzero(map, entries);
        self
    }

    pub fn field_generators(&self) -> impl Iterator<Item = Generator> + '_ {
        self.fields.iter().map(|a| Generator::field(a))
    }

    /// `r^{aI}_alpha` entries for one gauge index.
    pub fn generators_of<'a>(
        &'a self,
        gauge: &'a str,
    ) -> impl Iterator<Item = (&'a GeneratorKey, &'a LocalFunction)> + 'a {
        self.generators.iter().filter(move |(k, _)| k.gauge == gauge)
    }

    pub fn has_gauge_structure(&self) -> bool {
        !self.gauge.is_empty() && self.generators.values().any(|r| !r.is_zero())
    }

    /// Checks the declared invariants. Coefficient functions may depend only on
    /// base coordinates and fields.
    pub fn validate(&self) -> Result<(), ModelError> {
        for names in [&self.fields, &self.gauge] {
            let mut seen = BTreeSet::new();
            for name in names {
                if !seen.insert(name) {
                    return Err(ModelError::Duplicate(name.clone()));
                }
            }
        }
        self.check_coefficient("lagrangian", &self.lagrangian)?;
        for (k, r) in &self.generators {
            self.require_field(&k.field)?;
            self.require_gauge(&k.gauge)?;
            self.check_jet(&format!("generator ({}, {})", k.field, k.gauge), &k.jet)?;
            self.check_coefficient("generator coefficient", r)?;
        }
        if let Some(c) = &self.structure {
            for (k, f) in c {
                self.require_gauge(&k.out)?;
                self.require_gauge(&k.left)?;
                self.require_gauge(&k.right)?;
                self.check_coefficient("structure function", f)?;
                let partner = StructureKey { out: k.out.clone(), left: k.right.clone(), right: k.left.clone() };
                let other = c.get(&partner).cloned().unwrap_or_default();
                if other != -f {
                    return Err(ModelError::StructureNotAntisymmetric {
                        out: k.out.clone(),
                        left: k.left.clone(),
                        right: k.right.clone(),
                    });
                }
            }
        }
        if let Some(nu) = &self.closure {
            for (k, f) in nu {
                self.require_field(&k.a)?;
                self.require_field(&k.b)?;
                self.require_gauge(&k.left)?;
                self.require_gauge(&k.right)?;
                self.check_coefficient("closure function", f)?;
                let swap_gauge =
                    ClosureKey { a: k.a.clone(), b: k.b.clone(), left: k.right.clone(), right: k.left.clone() };
                let swap_field =
                    ClosureKey { a: k.b.clone(), b: k.a.clone(), left: k.left.clone(), right: k.right.clone() };
                for partner in [swap_gauge, swap_field] {
                    if nu.get(&partner).cloned().unwrap_or_default() != -f {
                        return Err(ModelError::ClosureNotAntisymmetric {
                            a: k.a.clone(),
                            b: k.b.clone(),
                            left: k.left.clone(),
                            right: k.right.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn require_field(&self, a: &str) -> Result<(), ModelError> {
        if self.fields.iter().any(|f| f == a) {
            Ok(())
        } else {
            Err(ModelError::UnknownField(a.to_string()))
        }
    }

    fn require_gauge(&self, alpha: &str) -> Result<(), ModelError> {
        if self.gauge.iter().any(|g| g == alpha) {
            Ok(())
        } else {
            Err(ModelError::UnknownGauge(alpha.to_string()))
        }
    }

    fn check_jet(&self, context: &str, jet: &MultiIndex) -> Result<(), ModelError> {
        if jet.order() > self.bounds.max_jet_order {
            return Err(ModelError::JetOrderExceeded {
                context: context.to_string(),
                order: jet.order(),
                bound: self.bounds.max_jet_order,
            });
        }
        for &i in jet.entries() {
            if i == 0 || i as usize > self.dim {
                return Err(ModelError::IndexOutOfRange {
                    context: context.to_string(),
                    index: i as usize,
                    dim: self.dim,
                });
            }
        }
        Ok(())
    }

    fn check_coefficient(&self, context: &str, f: &LocalFunction) -> Result<(), ModelError> {
        for g in f.generators() {
            match g.kind {
                GeneratorKind::Field => {
                    self.require_field(&g.family)?;
                    self.check_jet(context, &g.jet)?;
                }
                GeneratorKind::BaseCoordinate => {
                    let i: usize = g.family.parse().unwrap_or(0);
                    if i == 0 || i > self.dim {
                        return Err(ModelError::IndexOutOfRange {
                            context: context.to_string(),
                            index: i,
                            dim: self.dim,
                        });
                    }
                }
                _ => {
                    return Err(ModelError::ForbiddenGenerator {
                        context: context.to_string(),
                        generator: g.to_string(),
                    })
                }
            }
        }
        Ok(())
    }
}

/// Inserts in order, so later entries win; zero values remove the key.
fn insert_nonzero<K: Ord>(map: &mut BTreeMap<K, LocalFunction>, entries: impl IntoIterator<Item = (K, LocalFunction)>) {
    for (k, v) in entries {
        if v.is_zero() {
            map.remove(&k);
        } else {
            map.insert(k, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::q;

    #[test]
    fn antisymmetric_partners_are_filled() {
        let m = ModelSpec::new(0, &[], &["1", "2", "3"], LocalFunction::zero()).with_structure(
            "3",
            "1",
            "2",
            LocalFunction::integer(1),
        );
        m.validate().unwrap();
        let c = m.structure.as_ref().unwrap();
        assert_eq!(
            c[&StructureKey { out: "3".into(), left: "2".into(), right: "1".into() }],
            LocalFunction::integer(-1)
        );
    }

    #[test]
    fn rejects_ghost_in_lagrangian() {
        let m = ModelSpec::new(0, &["1"], &["e"], LocalFunction::generator(Generator::ghost("e")));
        assert!(matches!(m.validate(), Err(ModelError::ForbiddenGenerator { .. })));
    }

    #[test]
    fn rejects_symmetric_structure() {
        let mut m = ModelSpec::new(0, &[], &["1", "2"], LocalFunction::zero());
        let mut c = BTreeMap::new();
        for (l, r) in [("1", "2"), ("2", "1")] {
            c.insert(StructureKey { out: "1".into(), left: l.into(), right: r.into() }, LocalFunction::constant(q(1)));
        }
        m.structure = Some(c);
        assert!(matches!(m.validate(), Err(ModelError::StructureNotAntisymmetric { .. })));
    }

    #[test]
    fn rejects_jet_beyond_bound() {
        let u111 = Generator::field("1").with_jet(MultiIndex::new(vec![1, 1, 1]));
        let m = ModelSpec::new(1, &["1"], &[], LocalFunction::generator(u111)).with_bounds(2, 2);
        assert!(matches!(m.validate(), Err(ModelError::JetOrderExceeded { .. })));
    }
}
