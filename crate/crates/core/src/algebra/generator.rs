//! Graded coordinates: base coordinates, fields, antifields, ghosts and antighosts,
//! each carrying a symmetric jet multi-index.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;
use std::sync::Arc;

/// Ghost degree `p` and antighost degree `q`; the total degree is `p - q`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bidegree {
    pub ghost: u32,
    pub antighost: u32,
}

impl Bidegree {
    pub const ZERO: Bidegree = Bidegree { ghost: 0, antighost: 0 };

    pub const fn new(ghost: u32, antighost: u32) -> Self {
        Bidegree { ghost, antighost }
    }

    /// Total degree, which is also the ghost number.
    pub fn total(self) -> i64 {
        self.ghost as i64 - self.antighost as i64
    }

    /// `true` when the total degree is odd. All Koszul signs are computed from this.
    pub fn is_odd(self) -> bool {
        self.total().rem_euclid(2) == 1
    }

    pub fn scale(self, k: u32) -> Self {
        Bidegree::new(self.ghost * k, self.antighost * k)
    }
}

impl Add for Bidegree {
    type Output = Bidegree;

    fn add(self, rhs: Bidegree) -> Bidegree {
        Bidegree::new(self.ghost + rhs.ghost, self.antighost + rhs.antighost)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.ghost, self.antighost)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GeneratorKind {
    BaseCoordinate,
    Field,
    Antifield,
    Ghost,
    Antighost,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 5] = [
        GeneratorKind::BaseCoordinate,
        GeneratorKind::Field,
        GeneratorKind::Antifield,
        GeneratorKind::Ghost,
        GeneratorKind::Antighost,
    ];

    pub fn bidegree(self) -> Bidegree {
        match self {
            GeneratorKind::BaseCoordinate | GeneratorKind::Field => Bidegree::new(0, 0),
            GeneratorKind::Antifield => Bidegree::new(0, 1),
            GeneratorKind::Ghost => Bidegree::new(1, 0),
            GeneratorKind::Antighost => Bidegree::new(0, 2),
        }
    }

    pub fn is_odd(self) -> bool {
        self.bidegree().is_odd()
    }

    /// Antifields and antighosts.
    pub fn is_conjugate(self) -> bool {
        matches!(self, GeneratorKind::Antifield | GeneratorKind::Antighost)
    }

    /// The partner under the antibracket pairing; base coordinates have none.
    pub fn conjugate(self) -> Option<GeneratorKind> {
        match self {
            GeneratorKind::BaseCoordinate => None,
            GeneratorKind::Field => Some(GeneratorKind::Antifield),
            GeneratorKind::Antifield => Some(GeneratorKind::Field),
            GeneratorKind::Ghost => Some(GeneratorKind::Antighost),
            GeneratorKind::Antighost => Some(GeneratorKind::Ghost),
        }
    }

    /// Atom name used by the expression grammar.
    pub fn atom_name(self) -> &'static str {
        match self {
            GeneratorKind::BaseCoordinate => "x",
            GeneratorKind::Field => "u",
            GeneratorKind::Antifield => "ustar",
            GeneratorKind::Ghost => "C",
            GeneratorKind::Antighost => "Cstar",
        }
    }

    pub fn from_atom_name(name: &str) -> Option<GeneratorKind> {
        GeneratorKind::ALL.into_iter().find(|k| k.atom_name() == name)
    }
}

/// Symmetric multi-index `I = i_1 ... i_r`, stored sorted.
///
/// Ordered by length first, then lexicographically.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u16>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn new(mut entries: Vec<u16>) -> Self {
        entries.sort_unstable();
        MultiIndex(entries)
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u16] {
        &self.0
    }

    /// `I` with `i` inserted at its sorted position.
    pub fn with(&self, i: u16) -> Self {
        let mut entries = self.0.clone();
        let at = entries.partition_point(|&e| e <= i);
        entries.insert(at, i);
        MultiIndex(entries)
    }

    /// All sorted multi-indices over `1..=dim` of order at most `max_order`,
    /// in the canonical multi-index order.
    pub fn all_up_to(dim: usize, max_order: usize) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::empty()];
        if dim == 0 {
            return out;
        }
        let mut layer = vec![MultiIndex::empty()];
        for _ in 0..max_order {
            let mut next = Vec::new();
            for idx in &layer {
                let start = idx.0.last().copied().unwrap_or(1);
                for i in start..=dim as u16 {
                    let mut e = idx.0.clone();
                    e.push(i);
                    next.push(MultiIndex(e));
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out.sort();
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A single graded coordinate. Equality and order are by (kind, family, jet).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub family: Arc<str>,
    pub jet: MultiIndex,
}

impl Generator {
    pub fn new(kind: GeneratorKind, family: &str, jet: MultiIndex) -> Self {
        let jet = if kind == GeneratorKind::BaseCoordinate { MultiIndex::empty() } else { jet };
        Generator { kind, family: Arc::from(family), jet }
    }

    pub fn base(i: usize) -> Self {
        Generator::new(GeneratorKind::BaseCoordinate, &i.to_string(), MultiIndex::empty())
    }

    pub fn field(a: &str) -> Self {
        Generator::new(GeneratorKind::Field, a, MultiIndex::empty())
    }

    pub fn antifield(a: &str) -> Self {
        Generator::new(GeneratorKind::Antifield, a, MultiIndex::empty())
    }

    pub fn ghost(alpha: &str) -> Self {
        Generator::new(GeneratorKind::Ghost, alpha, MultiIndex::empty())
    }

    pub fn antighost(alpha: &str) -> Self {
        Generator::new(GeneratorKind::Antighost, alpha, MultiIndex::empty())
    }

    pub fn with_jet(&self, jet: MultiIndex) -> Self {
        Generator::new(self.kind, &self.family, jet)
    }

    pub fn bidegree(&self) -> Bidegree {
        self.kind.bidegree()
    }

    pub fn is_odd(&self) -> bool {
        self.kind.is_odd()
    }

    /// The antibracket partner with the same family and jet index.
    pub fn conjugate(&self) -> Option<Generator> {
        self.kind.conjugate().map(|k| Generator { kind: k, family: self.family.clone(), jet: self.jet.clone() })
    }

    /// The undifferentiated member of this generator's family.
    pub fn root(&self) -> Generator {
        self.with_jet(MultiIndex::empty())
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}", self.kind.atom_name(), self.family)?;
        if !self.jet.is_empty() {
            write!(f, ";")?;
            for i in self.jet.entries() {
                write!(f, " {i}")?;
            }
        }
        write!(f, "]")
    }
}
