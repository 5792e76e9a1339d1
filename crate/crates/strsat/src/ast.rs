//! Core types of the bounded string theory: alphabets, solver
//! configuration, terms, atoms, formulas, and assignments, plus the
//! structural rewrites (normalization, fragment classification, and
//! equality elimination).
//!
//! Indexing is 1-based throughout: `extract(t, i, j)` takes characters
//! `i..=j` of `t`, and `contains-at` positions start at 1.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Errors raised by constructors and structural rewrites in this module.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum AstError {
    #[error("alphabet must not be empty")]
    EmptyAlphabet,
    #[error("duplicate character {0:?} in alphabet")]
    DuplicateAlphabetChar(char),
    #[error("character {0:?} cannot appear in an alphabet")]
    UnsupportedAlphabetChar(char),
    #[error("extract indices must satisfy 1 <= i <= j, got [{0}:{1}]")]
    BadExtractIndices(usize, usize),
    #[error("contains-at position must be at least 1")]
    BadContainsAtPosition,
    #[error("bound {bound} for variable {var:?} exceeds the max length {l_max}")]
    BoundAboveMax {
        var: String,
        bound: usize,
        l_max: usize,
    },
    #[error("negation applied to a conjunction is outside the grammar")]
    NegatedConjunction,
    #[error("equality elimination requires a negation-free formula")]
    NegationInEqualityElimination,
}

/// Finite, ordered alphabet. The position of a character is its code in
/// the bit-level encoding, so iteration order is part of the contract.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    chars: Vec<char>,
}

impl Alphabet {
    /// Builds an alphabet from distinct characters. Quotes, newlines, and
    /// other control characters are rejected so that every alphabet can
    /// round-trip through the text format.
    pub fn new(chars: impl IntoIterator<Item = char>) -> Result<Self, AstError> {
        let mut out = Vec::new();
        for c in chars {
            if c == '"' || c.is_control() {
                return Err(AstError::UnsupportedAlphabetChar(c));
            }
            if out.contains(&c) {
                return Err(AstError::DuplicateAlphabetChar(c));
            }
            out.push(c);
        }
        if out.is_empty() {
            return Err(AstError::EmptyAlphabet);
        }
        Ok(Alphabet { chars: out })
    }

    /// Parses the usual shorthand where each character of `s` is one
    /// alphabet symbol.
    pub fn from_str_chars(s: &str) -> Result<Self, AstError> {
        Self::new(s.chars())
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.chars.contains(&c)
    }

    /// Code of `c`, i.e. its index in the alphabet order.
    pub fn code_of(&self, c: char) -> Option<usize> {
        self.chars.iter().position(|&x| x == c)
    }

    /// Character carrying code `code`.
    pub fn char_at(&self, code: usize) -> char {
        self.chars[code]
    }

    pub fn iter(&self) -> impl Iterator<Item = char> + '_ {
        self.chars.iter().copied()
    }

    /// Concatenation of all characters in code order.
    pub fn as_string(&self) -> String {
        self.chars.iter().collect()
    }
}

/// Global solving parameters: the alphabet, the global length cap, the
/// per-variable length bounds, the random seed, and the enumeration budget
/// used by the brute-force oracle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub alphabet: Alphabet,
    pub l_max: usize,
    var_bounds: BTreeMap<String, usize>,
    pub seed: u64,
    pub oracle_budget: u64,
}

/// Enumeration budget applied when none is given explicitly.
pub const DEFAULT_ORACLE_BUDGET: u64 = 1_000_000;

impl SolverConfig {
    pub fn new(alphabet: Alphabet, l_max: usize) -> Self {
        SolverConfig {
            alphabet,
            l_max,
            var_bounds: BTreeMap::new(),
            seed: 0,
            oracle_budget: DEFAULT_ORACLE_BUDGET,
        }
    }

    /// Effective length bound of a variable: its declared bound, or the
    /// global cap when none was declared.
    pub fn bound_of(&self, var: &str) -> usize {
        self.var_bounds.get(var).copied().unwrap_or(self.l_max)
    }

    /// Declares an explicit per-variable bound. Bounds above `l_max` are
    /// rejected rather than clamped.
    pub fn set_var_bound(&mut self, var: &str, bound: usize) -> Result<(), AstError> {
        if bound > self.l_max {
            return Err(AstError::BoundAboveMax {
                var: var.to_string(),
                bound,
                l_max: self.l_max,
            });
        }
        self.var_bounds.insert(var.to_string(), bound);
        Ok(())
    }

    /// Variables with an explicitly declared bound, in name order.
    pub fn declared_bounds(&self) -> impl Iterator<Item = (&str, usize)> {
        self.var_bounds.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// String term. `Extract` keeps 1-based inclusive indices with
/// `1 <= i <= j`; use [`StrTerm::extract`] to construct one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrTerm {
    Var(String),
    Const(String),
    Extract(Box<StrTerm>, usize, usize),
    Concat(Box<StrTerm>, Box<StrTerm>),
}

impl StrTerm {
    pub fn var(name: impl Into<String>) -> StrTerm {
        StrTerm::Var(name.into())
    }

    pub fn constant(value: impl Into<String>) -> StrTerm {
        StrTerm::Const(value.into())
    }

    pub fn concat(a: StrTerm, b: StrTerm) -> StrTerm {
        StrTerm::Concat(Box::new(a), Box::new(b))
    }

    pub fn extract(t: StrTerm, i: usize, j: usize) -> Result<StrTerm, AstError> {
        if i == 0 || i > j {
            return Err(AstError::BadExtractIndices(i, j));
        }
        Ok(StrTerm::Extract(Box::new(t), i, j))
    }

    /// Visits this term and all subterms, outermost first.
    pub fn for_each_subterm<'a>(&'a self, f: &mut impl FnMut(&'a StrTerm)) {
        f(self);
        match self {
            StrTerm::Var(_) | StrTerm::Const(_) => {}
            StrTerm::Extract(inner, _, _) => inner.for_each_subterm(f),
            StrTerm::Concat(a, b) => {
                a.for_each_subterm(f);
                b.for_each_subterm(f);
            }
        }
    }

    /// Appends variable names in first-occurrence order, skipping ones
    /// already present.
    fn collect_vars(&self, out: &mut Vec<String>) {
        self.for_each_subterm(&mut |t| {
            if let StrTerm::Var(name) = t {
                if !out.iter().any(|v| v == name) {
                    out.push(name.clone());
                }
            }
        });
    }
}

impl fmt::Display for StrTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StrTerm::Var(name) => write!(f, "{name}"),
            StrTerm::Const(s) => write!(f, "\"{s}\""),
            StrTerm::Extract(t, i, j) => write!(f, "(extract {t} {i} {j})"),
            StrTerm::Concat(a, b) => write!(f, "(concat {a} {b})"),
        }
    }
}

/// Theory atom. `Contains(a, b)` asks whether `b` occurs in `a` at some
/// position; `ContainsAt(a, i, b)` fixes the position to `i` (1-based).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Eq(StrTerm, StrTerm),
    Contains(StrTerm, StrTerm),
    ContainsAt(StrTerm, usize, StrTerm),
}

impl Atom {
    pub fn contains_at(a: StrTerm, i: usize, b: StrTerm) -> Result<Atom, AstError> {
        if i == 0 {
            return Err(AstError::BadContainsAtPosition);
        }
        Ok(Atom::ContainsAt(a, i, b))
    }

    /// The two term arguments of the atom.
    pub fn terms(&self) -> (&StrTerm, &StrTerm) {
        match self {
            Atom::Eq(a, b) | Atom::Contains(a, b) | Atom::ContainsAt(a, _, b) => (a, b),
        }
    }

    pub fn map_terms(&self, mut f: impl FnMut(&StrTerm) -> StrTerm) -> Atom {
        match self {
            Atom::Eq(a, b) => Atom::Eq(f(a), f(b)),
            Atom::Contains(a, b) => Atom::Contains(f(a), f(b)),
            Atom::ContainsAt(a, i, b) => Atom::ContainsAt(f(a), *i, f(b)),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Eq(a, b) => write!(f, "(= {a} {b})"),
            Atom::Contains(a, b) => write!(f, "(contains {a} {b})"),
            Atom::ContainsAt(a, i, b) => write!(f, "(contains-at {a} {i} {b})"),
        }
    }
}

/// Signed atom of a normalized conjunction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Literal {
    pub negated: bool,
    pub atom: Atom,
}

impl Literal {
    pub fn pos(atom: Atom) -> Literal {
        Literal {
            negated: false,
            atom,
        }
    }

    pub fn neg(atom: Atom) -> Literal {
        Literal {
            negated: true,
            atom,
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "(not {})", self.atom)
        } else {
            write!(f, "{}", self.atom)
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Const(true) => write!(f, "true"),
            Formula::Const(false) => write!(f, "false"),
            Formula::Conj(lits) => {
                if let [single] = lits.as_slice() {
                    return write!(f, "{single}");
                }
                write!(f, "(and")?;
                for lit in lits {
                    write!(f, " {lit}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Raw boolean expression as written in the surface syntax, before
/// normalization. `Not` over `And` is representable here but rejected by
/// [`normalize`], mirroring the grammar where negation applies only to
/// atoms and constants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoolExpr {
    True,
    False,
    Atom(Atom),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    /// Conjunction of a sequence of expressions; empty input is `true`.
    pub fn conjoin(exprs: impl IntoIterator<Item = BoolExpr>) -> BoolExpr {
        let mut it = exprs.into_iter();
        match it.next() {
            None => BoolExpr::True,
            Some(first) => it.fold(first, BoolExpr::and),
        }
    }
}

impl From<&Formula> for BoolExpr {
    fn from(f: &Formula) -> BoolExpr {
        match f {
            Formula::Const(true) => BoolExpr::True,
            Formula::Const(false) => BoolExpr::False,
            Formula::Conj(lits) => BoolExpr::conjoin(lits.iter().map(|lit| {
                let atom = BoolExpr::Atom(lit.atom.clone());
                if lit.negated {
                    BoolExpr::not(atom)
                } else {
                    atom
                }
            })),
        }
    }
}

/// Normalized formula: either a trivial constant or a non-empty
/// conjunction of signed atoms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Conj(Vec<Literal>),
}

impl Formula {
    /// Wraps a literal list, folding the empty conjunction to `true`.
    pub fn from_literals(lits: Vec<Literal>) -> Formula {
        if lits.is_empty() {
            Formula::Const(true)
        } else {
            Formula::Conj(lits)
        }
    }

    pub fn literals(&self) -> &[Literal] {
        match self {
            Formula::Const(_) => &[],
            Formula::Conj(lits) => lits,
        }
    }

    pub fn is_trivially_true(&self) -> bool {
        matches!(self, Formula::Const(true))
    }

    pub fn is_trivially_false(&self) -> bool {
        matches!(self, Formula::Const(false))
    }

    /// Variable names in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out = Vec::new();
        for lit in self.literals() {
            let (a, b) = lit.atom.terms();
            a.collect_vars(&mut out);
            b.collect_vars(&mut out);
        }
        out
    }
}

/// Rewrites a raw boolean expression into a [`Formula`]: negations are
/// pushed onto atoms, constants are folded, and conjuncts are collected in
/// order of appearance. Negation over a conjunction is rejected.
pub fn normalize(expr: &BoolExpr) -> Result<Formula, AstError> {
    enum Norm {
        Const(bool),
        Lits(Vec<Literal>),
    }

    fn go(expr: &BoolExpr, negated: bool) -> Result<Norm, AstError> {
        match expr {
            BoolExpr::True => Ok(Norm::Const(!negated)),
            BoolExpr::False => Ok(Norm::Const(negated)),
            BoolExpr::Atom(atom) => Ok(Norm::Lits(vec![Literal {
                negated,
                atom: atom.clone(),
            }])),
            BoolExpr::Not(inner) => go(inner, !negated),
            BoolExpr::And(a, b) => {
                if negated {
                    return Err(AstError::NegatedConjunction);
                }
                let left = go(a, false)?;
                let right = go(b, false)?;
                Ok(match (left, right) {
                    (Norm::Const(false), _) | (_, Norm::Const(false)) => Norm::Const(false),
                    (Norm::Const(true), other) | (other, Norm::Const(true)) => other,
                    (Norm::Lits(mut l), Norm::Lits(r)) => {
                        l.extend(r);
                        Norm::Lits(l)
                    }
                })
            }
        }
    }

    Ok(match go(expr, false)? {
        Norm::Const(b) => Formula::Const(b),
        Norm::Lits(lits) => Formula::from_literals(lits),
    })
}

/// Which predicates, term functions, and polarities occur in a formula.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FragmentLabel {
    pub equality: bool,
    pub containment: bool,
    pub containment_at: bool,
    pub concat: bool,
    pub extract: bool,
    pub has_negation: bool,
}

impl FragmentLabel {
    /// Canonical fragment name. A single feature is named by its bare
    /// letter; combinations are joined with `+`, where the index-carrying
    /// features render as `T-CONST` and `X-CONST` (positions and extract
    /// indices are always constants in this syntax).
    pub fn name(&self) -> String {
        let flags = [
            (self.equality, "E", "E"),
            (self.containment, "C", "C"),
            (self.containment_at, "T", "T-CONST"),
            (self.concat, "A", "A"),
            (self.extract, "X", "X-CONST"),
        ];
        let present: Vec<_> = flags.iter().filter(|(on, _, _)| *on).collect();
        match present.len() {
            0 => "EMPTY".to_string(),
            1 => present[0].1.to_string(),
            _ => present
                .iter()
                .map(|(_, _, long)| *long)
                .collect::<Vec<_>>()
                .join("+"),
        }
    }
}

/// Computes the [`FragmentLabel`] of a normalized formula.
pub fn classify_fragment(f: &Formula) -> FragmentLabel {
    let mut label = FragmentLabel {
        equality: false,
        containment: false,
        containment_at: false,
        concat: false,
        extract: false,
        has_negation: false,
    };
    for lit in f.literals() {
        label.has_negation |= lit.negated;
        match &lit.atom {
            Atom::Eq(..) => label.equality = true,
            Atom::Contains(..) => label.containment = true,
            Atom::ContainsAt(..) => label.containment_at = true,
        }
        let (a, b) = lit.atom.terms();
        for term in [a, b] {
            term.for_each_subterm(&mut |t| match t {
                StrTerm::Concat(..) => label.concat = true,
                StrTerm::Extract(..) => label.extract = true,
                _ => {}
            });
        }
    }
    label
}

/// Replaces every equality `a = b` in a negation-free formula by the pair
/// of containments `a contains b` and `b contains a`, in place. The model
/// set is preserved exactly because mutual containment coincides with
/// equality.
pub fn eliminate_equality(f: &Formula) -> Result<Formula, AstError> {
    match f {
        Formula::Const(b) => Ok(Formula::Const(*b)),
        Formula::Conj(lits) => {
            let mut out = Vec::with_capacity(lits.len());
            for lit in lits {
                if lit.negated {
                    return Err(AstError::NegationInEqualityElimination);
                }
                match &lit.atom {
                    Atom::Eq(a, b) => {
                        out.push(Literal::pos(Atom::Contains(a.clone(), b.clone())));
                        out.push(Literal::pos(Atom::Contains(b.clone(), a.clone())));
                    }
                    other => out.push(Literal::pos(other.clone())),
                }
            }
            Ok(Formula::from_literals(out))
        }
    }
}

/// Finite map from variable names to concrete strings, in insertion
/// order. Insertion order is preserved so models print in the order their
/// variables were introduced; use [`Assignment::sorted`] for canonical
/// comparisons.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment {
    entries: Vec<(String, String)>,
}

impl Assignment {
    pub fn new() -> Assignment {
        Assignment::default()
    }

    pub fn from_pairs<N, V>(pairs: impl IntoIterator<Item = (N, V)>) -> Assignment
    where
        N: Into<String>,
        V: Into<String>,
    {
        let mut a = Assignment::new();
        for (n, v) in pairs {
            a.set(n, v);
        }
        a
    }

    /// Binds `name`, replacing any earlier binding in place.
    pub fn set(&mut self, name: impl Into<String>, value: impl Into<String>) {
        let name = name.into();
        let value = value.into();
        if let Some(entry) = self.entries.iter_mut().find(|(n, _)| *n == name) {
            entry.1 = value;
        } else {
            self.entries.push((name, value));
        }
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(n, v)| (n.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Copy with entries sorted by variable name, for order-insensitive
    /// equality checks.
    pub fn sorted(&self) -> Assignment {
        let mut entries = self.entries.clone();
        entries.sort();
        Assignment { entries }
    }

    /// Total number of characters across all bound values.
    pub fn total_chars(&self) -> usize {
        self.entries.iter().map(|(_, v)| v.chars().count()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(n: &str) -> StrTerm {
        StrTerm::var(n)
    }

    fn cst(s: &str) -> StrTerm {
        StrTerm::constant(s)
    }

    #[test]
    fn alphabet_codes_follow_insertion_order() {
        let ab = Alphabet::from_str_chars("abmoy").unwrap();
        assert_eq!(ab.len(), 5);
        assert_eq!(ab.code_of('a'), Some(0));
        assert_eq!(ab.code_of('y'), Some(4));
        assert_eq!(ab.char_at(2), 'm');
        assert_eq!(ab.code_of('z'), None);
    }

    #[test]
    fn alphabet_rejects_duplicates_and_empties() {
        assert_eq!(
            Alphabet::from_str_chars("aa").unwrap_err(),
            AstError::DuplicateAlphabetChar('a')
        );
        assert_eq!(
            Alphabet::from_str_chars("").unwrap_err(),
            AstError::EmptyAlphabet
        );
        assert!(matches!(
            Alphabet::from_str_chars("a\"").unwrap_err(),
            AstError::UnsupportedAlphabetChar('"')
        ));
    }

    #[test]
    fn config_bounds_default_to_l_max_and_reject_excess() {
        let mut cfg = SolverConfig::new(Alphabet::from_str_chars("ab").unwrap(), 5);
        assert_eq!(cfg.bound_of("s"), 5);
        cfg.set_var_bound("s", 2).unwrap();
        assert_eq!(cfg.bound_of("s"), 2);
        assert!(matches!(
            cfg.set_var_bound("t", 6),
            Err(AstError::BoundAboveMax { .. })
        ));
    }

    #[test]
    fn extract_constructor_enforces_index_discipline() {
        assert!(StrTerm::extract(var("s"), 1, 1).is_ok());
        assert!(StrTerm::extract(var("s"), 2, 5).is_ok());
        assert_eq!(
            StrTerm::extract(var("s"), 0, 1).unwrap_err(),
            AstError::BadExtractIndices(0, 1)
        );
        assert_eq!(
            StrTerm::extract(var("s"), 3, 2).unwrap_err(),
            AstError::BadExtractIndices(3, 2)
        );
        assert_eq!(
            Atom::contains_at(var("s"), 0, var("t")).unwrap_err(),
            AstError::BadContainsAtPosition
        );
    }

    #[test]
    fn normalize_folds_constants_and_pushes_negation() {
        let atom = Atom::Contains(var("s"), var("t"));
        let expr = BoolExpr::and(BoolExpr::True, BoolExpr::Atom(atom.clone()));
        assert_eq!(
            normalize(&expr).unwrap(),
            Formula::Conj(vec![Literal::pos(atom.clone())])
        );

        let expr = BoolExpr::not(BoolExpr::not(BoolExpr::Atom(atom.clone())));
        assert_eq!(
            normalize(&expr).unwrap(),
            Formula::Conj(vec![Literal::pos(atom.clone())])
        );

        let expr = BoolExpr::and(BoolExpr::False, BoolExpr::Atom(atom.clone()));
        assert_eq!(normalize(&expr).unwrap(), Formula::Const(false));

        let expr = BoolExpr::not(BoolExpr::and(
            BoolExpr::Atom(atom.clone()),
            BoolExpr::Atom(atom),
        ));
        assert_eq!(normalize(&expr).unwrap_err(), AstError::NegatedConjunction);
    }

    #[test]
    fn normalize_keeps_literal_order() {
        let a1 = Atom::Eq(var("s"), cst("a"));
        let a2 = Atom::Contains(var("t"), var("s"));
        let expr = BoolExpr::and(
            BoolExpr::Atom(a1.clone()),
            BoolExpr::not(BoolExpr::Atom(a2.clone())),
        );
        assert_eq!(
            normalize(&expr).unwrap(),
            Formula::Conj(vec![Literal::pos(a1), Literal::neg(a2)])
        );
    }

    #[test]
    fn classify_names_match_feature_sets() {
        let eq = |a, b| Literal::pos(Atom::Eq(a, b));
        let neq = |a, b| Literal::neg(Atom::Eq(a, b));

        let f = Formula::from_literals(vec![eq(var("s"), cst("a")), neq(var("t"), var("s"))]);
        assert_eq!(classify_fragment(&f).name(), "E");
        assert!(classify_fragment(&f).has_negation);

        let f = Formula::from_literals(vec![Literal::pos(Atom::Contains(var("s"), var("t")))]);
        assert_eq!(classify_fragment(&f).name(), "C");

        let f = Formula::from_literals(vec![Literal::pos(Atom::ContainsAt(
            var("s"),
            1,
            var("t"),
        ))]);
        assert_eq!(classify_fragment(&f).name(), "T");

        let f = Formula::from_literals(vec![
            eq(var("s"), var("t")),
            Literal::pos(Atom::Contains(var("s"), var("t"))),
        ]);
        assert_eq!(classify_fragment(&f).name(), "E+C");

        let f = Formula::from_literals(vec![
            eq(var("s"), var("t")),
            Literal::pos(Atom::ContainsAt(var("s"), 2, var("t"))),
        ]);
        assert_eq!(classify_fragment(&f).name(), "E+T-CONST");

        let f = Formula::from_literals(vec![eq(StrTerm::concat(var("s"), var("t")), cst("a"))]);
        assert_eq!(classify_fragment(&f).name(), "E+A");

        let f = Formula::from_literals(vec![eq(
            StrTerm::extract(var("s"), 1, 1).unwrap(),
            cst("a"),
        )]);
        assert_eq!(classify_fragment(&f).name(), "E+X-CONST");

        assert_eq!(classify_fragment(&Formula::Const(true)).name(), "EMPTY");
    }

    #[test]
    fn eliminate_equality_rewrites_in_place() {
        let f = Formula::from_literals(vec![
            Literal::pos(Atom::Eq(var("s"), var("t"))),
            Literal::pos(Atom::Contains(var("u"), var("s"))),
        ]);
        let out = eliminate_equality(&f).unwrap();
        assert_eq!(
            out.literals(),
            &[
                Literal::pos(Atom::Contains(var("s"), var("t"))),
                Literal::pos(Atom::Contains(var("t"), var("s"))),
                Literal::pos(Atom::Contains(var("u"), var("s"))),
            ]
        );

        assert_eq!(
            eliminate_equality(&Formula::Const(true)).unwrap(),
            Formula::Const(true)
        );
        let neg = Formula::from_literals(vec![Literal::neg(Atom::Eq(var("s"), var("t")))]);
        assert_eq!(
            eliminate_equality(&neg).unwrap_err(),
            AstError::NegationInEqualityElimination
        );
    }

    #[test]
    fn formula_variables_in_first_occurrence_order() {
        let f = Formula::from_literals(vec![
            Literal::pos(Atom::Eq(
                StrTerm::concat(var("t"), var("s")),
                StrTerm::extract(var("u"), 1, 2).unwrap(),
            )),
            Literal::neg(Atom::Eq(var("s"), var("w"))),
        ]);
        assert_eq!(f.variables(), vec!["t", "s", "u", "w"]);
    }

    #[test]
    fn assignment_preserves_insertion_order_and_replaces() {
        let mut a = Assignment::new();
        a.set("t", "ab");
        a.set("s", "");
        a.set("t", "b");
        assert_eq!(a.get("t"), Some("b"));
        assert_eq!(a.get("s"), Some(""));
        assert_eq!(a.get("u"), None);
        let names: Vec<_> = a.iter().map(|(n, _)| n.to_string()).collect();
        assert_eq!(names, vec!["t", "s"]);
        assert_eq!(a.total_chars(), 1);

        let sorted: Vec<_> = a.sorted().iter().map(|(n, _)| n.to_string()).collect();
        assert_eq!(sorted, vec!["s", "t"]);
    }

    #[test]
    fn display_renders_s_expressions() {
        let t = StrTerm::concat(var("s"), StrTerm::extract(cst("ab"), 1, 2).unwrap());
        assert_eq!(t.to_string(), "(concat s (extract \"ab\" 1 2))");
        let lit = Literal::neg(Atom::ContainsAt(var("s"), 4, cst("bay")));
        assert_eq!(lit.to_string(), "(not (contains-at s 4 \"bay\"))");
    }
}
