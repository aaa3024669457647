//! Random points on strata for numeric cross-checks.

use alloc::collections::BTreeMap;

use rand::Rng;

use crate::legendre::stratum::{Sign, Stratum, TAU_EQ};
use crate::phase::SubstitutionGraph;
use crate::symexpr::{Symbols, Var};

/// Seeded generator used by every randomized check.
pub type SampleRng = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    use rand::SeedableRng;
    SampleRng::seed_from_u64(seed)
}

/// Draws a point of `stratum`: each symbol of `free` not solved by `graph`
/// is random (magnitude in `[0.25, 2]`, sign respecting single-symbol sign
/// conditions), solved symbols are completed from the graph, and `fixed`
/// values are taken as given. Returns `None` after 200 rejected draws.
pub fn sample_point(
    stratum: &Stratum,
    graph: &SubstitutionGraph,
    symbols: &Symbols,
    free: &[Var],
    fixed: &BTreeMap<Var, f64>,
    rng: &mut impl Rng,
) -> Option<BTreeMap<Var, f64>> {
    let sign_of = |v: Var| {
        stratum.signs.iter().find_map(|(e, s)| match e.as_monomial_ratio() {
            Some((c, n, d)) if d.is_one() && n.factors() == [(v, 1)] => {
                let flip = c < crate::symexpr::Rational::from_integer(0.into());
                Some(if flip { if *s == Sign::Positive { Sign::Negative } else { Sign::Positive } } else { *s })
            }
            _ => None,
        })
    };
    for _ in 0..200 {
        let mut point = fixed.clone();
        symbols.bind_algebraic(&mut point);
        for &v in free {
            if graph.solved(v) || point.contains_key(&v) {
                continue;
            }
            let mag: f64 = rng.gen_range(0.25..2.0);
            let value = match sign_of(v) {
                Some(Sign::Positive) => mag,
                Some(Sign::Negative) => -mag,
                None => {
                    if rng.gen_bool(0.5) {
                        mag
                    } else {
                        -mag
                    }
                }
            };
            point.insert(v, value);
        }
        for &(v, _) in graph.steps() {
            point.insert(v, 0.0);
        }
        if graph.complete_point(symbols, &mut point).is_err() {
            continue;
        }
        if stratum.contains(symbols, &point, TAU_EQ).unwrap_or(false) {
            return Some(point);
        }
    }
    None
}
