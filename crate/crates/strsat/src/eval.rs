//! Reference semantics: term evaluation under an assignment, formula
//! satisfaction, and model validation.
//!
//! Evaluation is strict about definedness. A term is UNDEFINED (`None`)
//! when an extraction reaches past the end of its subject or when a
//! concatenation would exceed the global length cap, and a formula is
//! satisfied only if every term of every literal evaluates defined,
//! regardless of the literal's polarity.

use std::fmt;

use crate::ast::{Assignment, Atom, Formula, SolverConfig, StrTerm};

/// Evaluates a term to a concrete string, or `None` when undefined.
/// Unbound variables also evaluate to `None`.
pub fn eval_term(t: &StrTerm, a: &Assignment, cfg: &SolverConfig) -> Option<String> {
    match t {
        StrTerm::Var(name) => a.get(name).map(|v| v.to_string()),
        StrTerm::Const(s) => Some(s.clone()),
        StrTerm::Extract(inner, i, j) => {
            let base: Vec<char> = eval_term(inner, a, cfg)?.chars().collect();
            if *j > base.len() {
                return None;
            }
            Some(base[i - 1..*j].iter().collect())
        }
        StrTerm::Concat(x, y) => {
            let left = eval_term(x, a, cfg)?;
            let right = eval_term(y, a, cfg)?;
            if left.chars().count() + right.chars().count() > cfg.l_max {
                return None;
            }
            Some(left + &right)
        }
    }
}

/// Does `needle` occur in `hay` starting at 1-based position `i`? An empty
/// needle occurs at every position `1..=|hay|+1`.
pub fn concrete_contains_at(hay: &str, i: usize, needle: &str) -> bool {
    let hay: Vec<char> = hay.chars().collect();
    let needle: Vec<char> = needle.chars().collect();
    if needle.is_empty() {
        return i >= 1 && i <= hay.len() + 1;
    }
    if i < 1 || hay.len() + 1 < i + needle.len() {
        return false;
    }
    hay[i - 1..i - 1 + needle.len()] == needle[..]
}

/// Does `needle` occur anywhere in `hay`?
pub fn concrete_contains(hay: &str, needle: &str) -> bool {
    let positions = hay.chars().count() + 1;
    (1..=positions).any(|i| concrete_contains_at(hay, i, needle))
}

/// Evaluates an atom, or `None` when either side is undefined.
pub fn eval_atom(atom: &Atom, a: &Assignment, cfg: &SolverConfig) -> Option<bool> {
    match atom {
        Atom::Eq(x, y) => {
            let x = eval_term(x, a, cfg)?;
            let y = eval_term(y, a, cfg)?;
            Some(x == y)
        }
        Atom::Contains(x, y) => {
            let x = eval_term(x, a, cfg)?;
            let y = eval_term(y, a, cfg)?;
            Some(concrete_contains(&x, &y))
        }
        Atom::ContainsAt(x, i, y) => {
            let x = eval_term(x, a, cfg)?;
            let y = eval_term(y, a, cfg)?;
            Some(concrete_contains_at(&x, *i, &y))
        }
    }
}

/// Is `f` satisfied by `a`? Every literal must have fully defined terms,
/// every positive atom must hold, and every negated atom must fail.
pub fn eval_formula(f: &Formula, a: &Assignment, cfg: &SolverConfig) -> bool {
    match f {
        Formula::Const(b) => *b,
        Formula::Conj(lits) => lits.iter().all(|lit| {
            eval_atom(&lit.atom, a, cfg).is_some_and(|holds| holds != lit.negated)
        }),
    }
}

/// Why an assignment fails model validation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModelViolation {
    MissingVariable {
        var: String,
    },
    BoundExceeded {
        var: String,
        len: usize,
        bound: usize,
    },
    CharOutsideAlphabet {
        var: String,
        ch: char,
    },
    CertificateTooLarge {
        total: usize,
        limit: usize,
    },
    UndefinedTerm {
        literal: String,
    },
    FalsifiedLiteral {
        literal: String,
    },
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelViolation::MissingVariable { var } => {
                write!(f, "variable {var} is not bound by the model")
            }
            ModelViolation::BoundExceeded { var, len, bound } => {
                write!(f, "value of {var} has length {len}, above its bound {bound}")
            }
            ModelViolation::CharOutsideAlphabet { var, ch } => {
                write!(f, "value of {var} contains {ch:?}, outside the alphabet")
            }
            ModelViolation::CertificateTooLarge { total, limit } => {
                write!(f, "model carries {total} characters, above the limit {limit}")
            }
            ModelViolation::UndefinedTerm { literal } => {
                write!(f, "a term of {literal} is undefined under the model")
            }
            ModelViolation::FalsifiedLiteral { literal } => {
                write!(f, "literal {literal} is falsified by the model")
            }
        }
    }
}

impl std::error::Error for ModelViolation {}

/// Checks that `a` is a genuine model of `f`: total over the formula's
/// variables, within per-variable bounds and the alphabet, no larger than
/// `l_max` characters per variable overall, and satisfying under
/// [`eval_formula`]. The size cap makes every accepted model a
/// polynomial-size certificate.
pub fn validate_model(
    f: &Formula,
    a: &Assignment,
    cfg: &SolverConfig,
) -> Result<(), ModelViolation> {
    let vars = f.variables();
    for var in &vars {
        if a.get(var).is_none() {
            return Err(ModelViolation::MissingVariable { var: var.clone() });
        }
    }
    for (var, value) in a.iter() {
        let len = value.chars().count();
        let bound = cfg.bound_of(var);
        if len > bound {
            return Err(ModelViolation::BoundExceeded {
                var: var.to_string(),
                len,
                bound,
            });
        }
        if let Some(ch) = value.chars().find(|&c| !cfg.alphabet.contains(c)) {
            return Err(ModelViolation::CharOutsideAlphabet {
                var: var.to_string(),
                ch,
            });
        }
    }
    let limit = cfg.l_max * vars.len();
    let total = a.total_chars();
    if total > limit {
        return Err(ModelViolation::CertificateTooLarge { total, limit });
    }
    for lit in f.literals() {
        match eval_atom(&lit.atom, a, cfg) {
            None => {
                return Err(ModelViolation::UndefinedTerm {
                    literal: lit.to_string(),
                })
            }
            Some(holds) if holds == lit.negated => {
                return Err(ModelViolation::FalsifiedLiteral {
                    literal: lit.to_string(),
                })
            }
            Some(_) => {}
        }
    }
    if f.is_trivially_false() {
        return Err(ModelViolation::FalsifiedLiteral {
            literal: "false".to_string(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Alphabet, Literal};

    fn cfg(alphabet: &str, l_max: usize) -> SolverConfig {
        SolverConfig::new(Alphabet::from_str_chars(alphabet).unwrap(), l_max)
    }

    fn var(n: &str) -> StrTerm {
        StrTerm::var(n)
    }

    fn cst(s: &str) -> StrTerm {
        StrTerm::constant(s)
    }

    #[test]
    fn extract_takes_one_based_inclusive_slices() {
        let cfg = cfg("abmoy", 8);
        let a = Assignment::new();
        let t = StrTerm::extract(cst("bombay"), 4, 6).unwrap();
        assert_eq!(eval_term(&t, &a, &cfg), Some("bay".to_string()));
        let t = StrTerm::extract(cst("bombay"), 1, 1).unwrap();
        assert_eq!(eval_term(&t, &a, &cfg), Some("b".to_string()));
    }

    #[test]
    fn extract_past_the_end_is_undefined() {
        let cfg = cfg("ab", 8);
        let a = Assignment::new();
        let t = StrTerm::extract(cst("ab"), 1, 3).unwrap();
        assert_eq!(eval_term(&t, &a, &cfg), None);
        let t = StrTerm::extract(cst(""), 1, 1).unwrap();
        assert_eq!(eval_term(&t, &a, &cfg), None);
    }

    #[test]
    fn concat_joins_and_respects_the_global_cap() {
        let cfg = cfg("abmoy", 8);
        let a = Assignment::new();
        let t = StrTerm::concat(cst("bom"), cst("bay"));
        assert_eq!(eval_term(&t, &a, &cfg), Some("bombay".to_string()));

        let tight = SolverConfig::new(cfg.alphabet.clone(), 5);
        assert_eq!(eval_term(&t, &a, &tight), None);
    }

    #[test]
    fn unbound_variables_are_undefined() {
        let cfg = cfg("ab", 3);
        let a = Assignment::new();
        assert_eq!(eval_term(&var("s"), &a, &cfg), None);
        let f = Formula::from_literals(vec![Literal::pos(Atom::Eq(var("s"), var("s")))]);
        assert!(!eval_formula(&f, &a, &cfg));
    }

    #[test]
    fn contains_at_matches_fixed_positions() {
        assert!(concrete_contains_at("bombay", 4, "bay"));
        assert!(!concrete_contains_at("bombay", 3, "bay"));
        assert!(concrete_contains_at("bombay", 1, "bombay"));
        assert!(!concrete_contains_at("bombay", 2, "bombay"));
    }

    #[test]
    fn empty_needle_occurs_at_every_position_up_to_len_plus_one() {
        for i in 1..=4 {
            assert!(concrete_contains_at("abc", i, ""));
        }
        assert!(!concrete_contains_at("abc", 5, ""));
        assert!(concrete_contains_at("", 1, ""));
        assert!(!concrete_contains_at("", 2, ""));
    }

    #[test]
    fn containment_axioms_hold_on_small_strings() {
        // Every string contains the empty string; the empty string
        // contains nothing but itself.
        let strings = ["", "a", "b", "ab", "ba", "aab"];
        for s in strings {
            assert!(concrete_contains(s, ""));
            if !s.is_empty() {
                assert!(!concrete_contains("", s));
            }
        }
        assert!(concrete_contains("bombay", "bay"));
        assert!(!concrete_contains("bombay", "yab"));
    }

    #[test]
    fn strict_semantics_rejects_undefined_terms_under_negation() {
        let cfg = cfg("ab", 8);
        let mut a = Assignment::new();
        a.set("s", "ab");
        // s[1:3] is undefined for |s| = 2, so even the negated literal
        // cannot be satisfied.
        let t = StrTerm::extract(var("s"), 1, 3).unwrap();
        let f = Formula::from_literals(vec![Literal::neg(Atom::Eq(t, cst("abb")))]);
        assert!(!eval_formula(&f, &a, &cfg));
    }

    #[test]
    fn eval_formula_checks_polarity_per_literal() {
        let cfg = cfg("abmoy", 8);
        let mut a = Assignment::new();
        a.set("s", "bombay");
        let f = Formula::from_literals(vec![
            Literal::pos(Atom::ContainsAt(var("s"), 4, cst("bay"))),
            Literal::neg(Atom::Eq(var("s"), cst("bay"))),
        ]);
        assert!(eval_formula(&f, &a, &cfg));

        let f = Formula::from_literals(vec![Literal::neg(Atom::ContainsAt(
            var("s"),
            4,
            cst("bay"),
        ))]);
        assert!(!eval_formula(&f, &a, &cfg));
    }

    #[test]
    fn validate_model_accepts_the_bombay_certificate() {
        let cfg = cfg("abmoy", 8);
        let f = Formula::from_literals(vec![Literal::pos(Atom::Eq(var("s"), cst("bombay")))]);
        let mut a = Assignment::new();
        a.set("s", "bombay");
        assert_eq!(validate_model(&f, &a, &cfg), Ok(()));
        assert_eq!(a.total_chars(), 6);
    }

    #[test]
    fn validate_model_reports_each_violation_kind() {
        let mut cfg = cfg("ab", 3);
        cfg.set_var_bound("s", 1).unwrap();
        let f = Formula::from_literals(vec![Literal::pos(Atom::Eq(var("s"), var("s")))]);

        let empty = Assignment::new();
        assert!(matches!(
            validate_model(&f, &empty, &cfg),
            Err(ModelViolation::MissingVariable { .. })
        ));

        let long = Assignment::from_pairs([("s", "ab")]);
        assert!(matches!(
            validate_model(&f, &long, &cfg),
            Err(ModelViolation::BoundExceeded { .. })
        ));

        let alien = Assignment::from_pairs([("s", "z")]);
        assert!(matches!(
            validate_model(&f, &alien, &cfg),
            Err(ModelViolation::CharOutsideAlphabet { .. })
        ));

        let f2 = Formula::from_literals(vec![Literal::neg(Atom::Eq(var("s"), cst("a")))]);
        let eq = Assignment::from_pairs([("s", "a")]);
        assert!(matches!(
            validate_model(&f2, &eq, &cfg),
            Err(ModelViolation::FalsifiedLiteral { .. })
        ));

        let f3 = Formula::from_literals(vec![Literal::pos(Atom::Eq(
            StrTerm::extract(var("s"), 1, 2).unwrap(),
            cst("ab"),
        ))]);
        let short = Assignment::from_pairs([("s", "a")]);
        assert!(matches!(
            validate_model(&f3, &short, &cfg),
            Err(ModelViolation::UndefinedTerm { .. })
        ));
    }

    #[test]
    fn certificate_size_is_capped_by_l_max_times_var_count() {
        let cfg = cfg("ab", 2);
        let f = Formula::from_literals(vec![Literal::pos(Atom::Eq(var("s"), var("t")))]);
        // Stray bindings count against the certificate budget.
        let mut a = Assignment::from_pairs([("s", "ab"), ("t", "ab")]);
        assert_eq!(validate_model(&f, &a, &cfg), Ok(()));
        a.set("u", "a");
        assert!(matches!(
            validate_model(&f, &a, &cfg),
            Err(ModelViolation::CertificateTooLarge { total: 5, limit: 4 })
        ));
    }
}
