//! Seeded random polynomials for the property harnesses.

use rand::Rng;

use super::poly::factors_odd;
use super::{normalize, q, Generator, LocalFunction};

/// Shape of the random polynomials drawn by [`random_function`].
#[derive(Clone, Debug)]
pub struct SampleShape {
    pub max_terms: usize,
    pub max_generators: usize,
    pub coeff_bound: i64,
}

impl Default for SampleShape {
    fn default() -> Self {
        SampleShape { max_terms: 6, max_generators: 4, coeff_bound: 3 }
    }
}

/// Draws a polynomial over `pool`. With `parity = Some(p)` every term has parity `p`,
/// so the result is homogeneous for all sign rules.
pub fn random_function<R: Rng>(
    rng: &mut R,
    pool: &[Generator],
    shape: &SampleShape,
    parity: Option<bool>,
) -> LocalFunction {
    let mut f = LocalFunction::zero();
    if pool.is_empty() {
        return f;
    }
    let terms = rng.gen_range(0..=shape.max_terms);
    for _ in 0..terms {
        for _attempt in 0..16 {
            let n = rng.gen_range(0..=shape.max_generators);
            let factors: Vec<(Generator, u32)> =
                (0..n).map(|_| (pool[rng.gen_range(0..pool.len())].clone(), 1)).collect();
            let mut c = 0;
            while c == 0 {
                c = rng.gen_range(-shape.coeff_bound..=shape.coeff_bound);
            }
            let Some(m) = normalize(&factors, q(c)) else { continue };
            if parity.is_some_and(|p| factors_odd(&m.factors) != p) {
                continue;
            }
            f = &f + &LocalFunction::from_monomial(m);
            break;
        }
    }
    f
}
