//! Seeded random formula generators for differential testing. One
//! produces small formulas mixing every atom kind and both term
//! functions, sized so the enumeration oracle stays cheap; the other
//! produces equality-only formulas over plain variables and constants,
//! the shape the dedicated equality solver accepts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{Alphabet, Atom, Formula, Literal, SolverConfig, StrTerm};

/// Size limits for generated formulas.
#[derive(Clone, Debug)]
pub struct GenParams {
    pub max_vars: usize,
    pub max_literals: usize,
    pub max_len: usize,
    pub alphabet: String,
}

impl Default for GenParams {
    fn default() -> GenParams {
        GenParams {
            max_vars: 3,
            max_literals: 6,
            max_len: 3,
            alphabet: "ab".to_string(),
        }
    }
}

const VAR_NAMES: [&str; 6] = ["x", "y", "z", "u", "v", "w"];

fn random_constant(rng: &mut impl Rng, alphabet: &Alphabet, max_len: usize) -> String {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| alphabet.char_at(rng.random_range(0..alphabet.len())))
        .collect()
}

fn random_term(
    rng: &mut impl Rng,
    vars: &[&str],
    alphabet: &Alphabet,
    l_max: usize,
    depth: usize,
) -> StrTerm {
    let compound_allowed = depth < 2;
    let roll = rng.random_range(0..8);
    match roll {
        0..4 => StrTerm::var(vars[rng.random_range(0..vars.len())]),
        4..6 => StrTerm::constant(random_constant(rng, alphabet, l_max)),
        6 if compound_allowed => {
            let i = rng.random_range(1..=l_max.max(1));
            let j = rng.random_range(i..=l_max.max(1));
            let inner = random_term(rng, vars, alphabet, l_max, depth + 1);
            StrTerm::extract(inner, i, j).unwrap()
        }
        _ if compound_allowed => StrTerm::concat(
            random_term(rng, vars, alphabet, l_max, depth + 1),
            random_term(rng, vars, alphabet, l_max, depth + 1),
        ),
        _ => StrTerm::var(vars[rng.random_range(0..vars.len())]),
    }
}

/// Random formula drawing on every atom kind, negation, extraction, and
/// concatenation, together with a config sized by `params`. Variable
/// bounds occasionally sit below the global cap.
pub fn random_mixed(rng: &mut impl Rng, params: &GenParams) -> (Formula, SolverConfig) {
    let alphabet = Alphabet::from_str_chars(&params.alphabet).unwrap();
    let l_max = rng.random_range(1..=params.max_len);
    let mut cfg = SolverConfig::new(alphabet.clone(), l_max);

    let var_count = rng.random_range(1..=params.max_vars.min(VAR_NAMES.len()));
    let vars = &VAR_NAMES[..var_count];
    for name in vars {
        if rng.random_bool(0.25) {
            cfg.set_var_bound(name, rng.random_range(0..=l_max)).unwrap();
        }
    }

    let literal_count = rng.random_range(1..=params.max_literals);
    let mut literals = Vec::with_capacity(literal_count);
    for _ in 0..literal_count {
        let a = random_term(rng, vars, &alphabet, l_max, 0);
        let b = random_term(rng, vars, &alphabet, l_max, 0);
        let atom = match rng.random_range(0..3) {
            0 => Atom::Eq(a, b),
            1 => Atom::Contains(a, b),
            _ => Atom::ContainsAt(a, rng.random_range(1..=l_max + 1), b),
        };
        let negated = rng.random_bool(0.4);
        literals.push(Literal { negated, atom });
    }
    (Formula::from_literals(literals), cfg)
}

/// One mixed formula drawn from a fresh seeded generator.
pub fn random_mixed_from_seed(seed: u64, params: &GenParams) -> (Formula, SolverConfig) {
    random_mixed(&mut ChaCha8Rng::seed_from_u64(seed), params)
}

/// Random conjunction of possibly negated equalities between variables
/// and constants, with uniform variable bounds. Formulas of this shape
/// stay inside the equality solver's applicable fragment unless its
/// greedy value search runs out of candidates.
pub fn random_equality(rng: &mut impl Rng, params: &GenParams) -> (Formula, SolverConfig) {
    let alphabet = Alphabet::from_str_chars(&params.alphabet).unwrap();
    let l_max = rng.random_range(1..=params.max_len);
    let cfg = SolverConfig::new(alphabet.clone(), l_max);

    let var_count = rng.random_range(1..=params.max_vars.min(VAR_NAMES.len()));
    let vars = &VAR_NAMES[..var_count];

    let literal_count = rng.random_range(1..=params.max_literals);
    let mut literals = Vec::with_capacity(literal_count);
    for _ in 0..literal_count {
        let left = StrTerm::var(vars[rng.random_range(0..vars.len())]);
        let right = if rng.random_bool(0.5) {
            StrTerm::var(vars[rng.random_range(0..vars.len())])
        } else {
            StrTerm::constant(random_constant(rng, &alphabet, l_max))
        };
        let negated = rng.random_bool(0.5);
        literals.push(Literal {
            negated,
            atom: Atom::Eq(left, right),
        });
    }
    (Formula::from_literals(literals), cfg)
}
