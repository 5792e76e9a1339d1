//! Bit-blasting of string formulas to CNF.
//!
//! Every term gets a layout: an order-encoded length (monotone `len >= k`
//! indicators plus reified `len == k` indicators) and one binary-coded cell
//! per character position. Cells past the string's length are pinned to
//! code zero, so two equal-length strings are equal exactly when their cell
//! codes agree position by position and no length reasoning is needed for
//! cell comparisons.
//!
//! Terms whose value would be undefined under an assignment (an extraction
//! reaching past its subject, a concatenation longer than the global cap)
//! cannot occur in any satisfying assignment, so their definedness
//! conditions are asserted as hard clauses. Atoms are reified to a single
//! literal each and asserted with the literal's polarity.

use std::collections::BTreeMap;

use crate::ast::{Alphabet, Assignment, Atom, Formula, Literal, SolverConfig, StrTerm};
use crate::satcore::{Lit, Model, SatSolver};

/// CNF view of one string term.
#[derive(Clone, Debug)]
pub struct TermLayout {
    /// Maximum length the term can take.
    pub bound: usize,
    /// `len_ge[k]` holds iff the term is at least `k` long; entry 0 is the
    /// always-true literal.
    pub len_ge: Vec<Lit>,
    /// `len_eq[k]` holds iff the term is exactly `k` long.
    pub len_eq: Vec<Lit>,
    /// `cells[k]` is the binary code of character `k + 1`, least
    /// significant bit first.
    pub cells: Vec<Vec<Lit>>,
}

impl TermLayout {
    /// `len >= k` as a literal, false beyond the bound.
    pub fn len_ge_lit(&self, k: usize) -> Lit {
        if k <= self.bound {
            self.len_ge[k]
        } else {
            !self.len_ge[0]
        }
    }

    /// `len == k` as a literal, false beyond the bound.
    pub fn len_eq_lit(&self, k: usize) -> Lit {
        if k <= self.bound {
            self.len_eq[k]
        } else {
            !self.len_ge[0]
        }
    }

    /// All literals that determine the term's value, for model blocking.
    pub fn value_bits(&self) -> Vec<Lit> {
        let mut out: Vec<Lit> = self.len_ge[1..].to_vec();
        for cell in &self.cells {
            out.extend_from_slice(cell);
        }
        out
    }
}

/// Witness-position selectors of one positive containment literal. The
/// selectors are one-hot when the atom holds and all-false otherwise, so
/// forbidding selectors restricts where the needle may start.
#[derive(Clone, Debug)]
pub struct ContainsSelectors {
    /// Index of the literal in the conjunction.
    pub literal_index: usize,
    /// The haystack term.
    pub container: StrTerm,
    /// Bound of the haystack term; candidate positions run to `bound + 1`.
    pub container_bound: usize,
    /// Bound of the needle term.
    pub needle_bound: usize,
    /// `(position, selector)` pairs in position order.
    pub selectors: Vec<(usize, Lit)>,
}

/// Everything the callers need to interact with an encoded formula.
#[derive(Clone, Debug)]
pub struct EncodeResult {
    /// Literal asserted true at level zero; constants are phrased with it.
    pub true_lit: Lit,
    pub alphabet: Alphabet,
    /// Layout of every variable occurring in the formula, by name.
    pub var_layouts: BTreeMap<String, TermLayout>,
    /// Selector sets of the positive containment literals, in formula
    /// order.
    pub contains_selectors: Vec<ContainsSelectors>,
}

/// Bits per character cell.
fn code_bits(alphabet_len: usize) -> usize {
    if alphabet_len <= 1 {
        0
    } else {
        (usize::BITS - (alphabet_len - 1).leading_zeros()) as usize
    }
}

struct Encoder<'a> {
    solver: &'a mut SatSolver,
    cfg: &'a SolverConfig,
    bits: usize,
    true_lit: Lit,
    cache: BTreeMap<StrTerm, TermLayout>,
    contains_selectors: Vec<ContainsSelectors>,
}

impl<'a> Encoder<'a> {
    fn fresh(&mut self) -> Lit {
        Lit::positive(self.solver.new_var())
    }

    fn assert_clause(&mut self, lits: &[Lit]) {
        self.solver.add_clause(lits);
    }

    /// Conjunction of `lits` as a single literal, folding constants and
    /// duplicates.
    fn reify_and(&mut self, lits: &[Lit]) -> Lit {
        let mut kept: Vec<Lit> = Vec::with_capacity(lits.len());
        for &l in lits {
            if l == self.true_lit {
                continue;
            }
            if l == !self.true_lit || kept.contains(&!l) {
                return !self.true_lit;
            }
            if !kept.contains(&l) {
                kept.push(l);
            }
        }
        match kept.len() {
            0 => self.true_lit,
            1 => kept[0],
            _ => {
                let t = self.fresh();
                let mut reverse = vec![t];
                for &l in &kept {
                    self.assert_clause(&[!t, l]);
                    reverse.push(!l);
                }
                self.assert_clause(&reverse);
                t
            }
        }
    }

    fn reify_or(&mut self, lits: &[Lit]) -> Lit {
        let negated: Vec<Lit> = lits.iter().map(|&l| !l).collect();
        !self.reify_and(&negated)
    }

    /// `a <-> b` as a single literal.
    fn reify_bit_eq(&mut self, a: Lit, b: Lit) -> Lit {
        if a == self.true_lit {
            return b;
        }
        if a == !self.true_lit {
            return !b;
        }
        if b == self.true_lit {
            return a;
        }
        if b == !self.true_lit {
            return !a;
        }
        if a == b {
            return self.true_lit;
        }
        if a == !b {
            return !self.true_lit;
        }
        let t = self.fresh();
        self.assert_clause(&[!t, !a, b]);
        self.assert_clause(&[!t, a, !b]);
        self.assert_clause(&[t, !a, !b]);
        self.assert_clause(&[t, a, b]);
        t
    }

    /// Layout with all lengths up to `bound` possible and free cells.
    fn fresh_layout(&mut self, bound: usize) -> TermLayout {
        let true_lit = self.true_lit;
        let mut len_ge = Vec::with_capacity(bound + 1);
        len_ge.push(true_lit);
        for _ in 0..bound {
            let l = self.fresh();
            len_ge.push(l);
        }
        for k in 1..bound {
            self.assert_clause(&[!len_ge[k + 1], len_ge[k]]);
        }
        let mut len_eq = Vec::with_capacity(bound + 1);
        for k in 0..=bound {
            let ge_next = if k < bound {
                len_ge[k + 1]
            } else {
                !true_lit
            };
            let ge_here = len_ge[k];
            let eq = self.reify_and(&[ge_here, !ge_next]);
            len_eq.push(eq);
        }
        let mut cells = Vec::with_capacity(bound);
        for k in 0..bound {
            let cell: Vec<Lit> = (0..self.bits).map(|_| self.fresh()).collect();
            for code in self.cfg.alphabet.len()..(1usize << self.bits) {
                let block: Vec<Lit> = cell
                    .iter()
                    .enumerate()
                    .map(|(j, &bit)| if code >> j & 1 == 1 { !bit } else { bit })
                    .collect();
                self.assert_clause(&block);
            }
            for &bit in &cell {
                self.assert_clause(&[len_ge[k + 1], !bit]);
            }
            cells.push(cell);
        }
        TermLayout {
            bound,
            len_ge,
            len_eq,
            cells,
        }
    }

    /// Layout of a fixed-length term: all length indicators are constant.
    fn exact_layout(&self, len: usize, cells: Vec<Vec<Lit>>) -> TermLayout {
        let true_lit = self.true_lit;
        let len_eq = (0..=len)
            .map(|k| if k == len { true_lit } else { !true_lit })
            .collect();
        TermLayout {
            bound: len,
            len_ge: vec![true_lit; len + 1],
            len_eq,
            cells,
        }
    }

    fn const_layout(&mut self, value: &str) -> TermLayout {
        let true_lit = self.true_lit;
        let cells: Vec<Vec<Lit>> = value
            .chars()
            .map(|ch| {
                let code = self
                    .cfg
                    .alphabet
                    .code_of(ch)
                    .expect("constant character outside the alphabet");
                (0..self.bits)
                    .map(|j| if code >> j & 1 == 1 { true_lit } else { !true_lit })
                    .collect()
            })
            .collect();
        self.exact_layout(cells.len(), cells)
    }

    fn encode_term(&mut self, term: &StrTerm) -> TermLayout {
        if let Some(layout) = self.cache.get(term) {
            return layout.clone();
        }
        let layout = match term {
            StrTerm::Var(name) => self.fresh_layout(self.cfg.bound_of(name)),
            StrTerm::Const(value) => self.const_layout(value),
            StrTerm::Extract(inner, i, j) => {
                let parent = self.encode_term(inner);
                let defined = parent.len_ge_lit(*j);
                self.assert_clause(&[defined]);
                let len = j - i + 1;
                if *j <= parent.bound {
                    let cells = parent.cells[i - 1..*j].to_vec();
                    self.exact_layout(len, cells)
                } else {
                    // Already refuted above; any shape-compatible layout
                    // keeps the remaining encoding well formed.
                    self.fresh_layout(len)
                }
            }
            StrTerm::Concat(a, b) => {
                let la = self.encode_term(a);
                let lb = self.encode_term(b);
                self.concat_layout(&la, &lb)
            }
        };
        self.cache.insert(term.clone(), layout.clone());
        layout
    }

    fn concat_layout(&mut self, la: &TermLayout, lb: &TermLayout) -> TermLayout {
        let bound = (la.bound + lb.bound).min(self.cfg.l_max);
        let lc = self.fresh_layout(bound);
        for va in 0..=la.bound {
            for vb in 0..=lb.bound {
                let eq_a = la.len_eq[va];
                let eq_b = lb.len_eq[vb];
                if va + vb > bound {
                    self.assert_clause(&[!eq_a, !eq_b]);
                } else {
                    self.assert_clause(&[!eq_a, !eq_b, lc.len_eq[va + vb]]);
                }
            }
        }
        for k in 1..=la.bound.min(bound) {
            let active = la.len_ge[k];
            for j in 0..self.bits {
                let src = la.cells[k - 1][j];
                let dst = lc.cells[k - 1][j];
                self.assert_clause(&[!active, !src, dst]);
                self.assert_clause(&[!active, src, !dst]);
            }
        }
        for va in 0..=la.bound {
            let eq_a = la.len_eq[va];
            for k in 1..=lb.bound {
                let pos = va + k;
                if pos > bound {
                    break;
                }
                let active = lb.len_ge[k];
                for j in 0..self.bits {
                    let src = lb.cells[k - 1][j];
                    let dst = lc.cells[pos - 1][j];
                    self.assert_clause(&[!eq_a, !active, !src, dst]);
                    self.assert_clause(&[!eq_a, !active, src, !dst]);
                }
            }
        }
        lc
    }

    /// Literal holding iff the needle occurs in the haystack starting at
    /// position `i`.
    fn containment_at(&mut self, hay: &TermLayout, i: usize, needle: &TermLayout) -> Lit {
        let mut conj = Vec::new();
        for k in 0..=needle.bound {
            let ge_needle = needle.len_ge[k];
            let ge_hay = hay.len_ge_lit(i - 1 + k);
            let fits = self.reify_or(&[!ge_needle, ge_hay]);
            conj.push(fits);
            if k == 0 {
                continue;
            }
            let pos = i - 1 + k;
            if pos > hay.bound {
                continue;
            }
            let mut bit_eqs = Vec::with_capacity(self.bits);
            for j in 0..self.bits {
                let e = self.reify_bit_eq(needle.cells[k - 1][j], hay.cells[pos - 1][j]);
                bit_eqs.push(e);
            }
            let cells_match = self.reify_and(&bit_eqs);
            let matched = self.reify_or(&[!ge_needle, cells_match]);
            conj.push(matched);
        }
        self.reify_and(&conj)
    }

    fn reify_eq(&mut self, a: &StrTerm, b: &StrTerm) -> Lit {
        let la = self.encode_term(a);
        let lb = self.encode_term(b);
        let mut conj = Vec::new();
        for k in 1..=la.bound.max(lb.bound) {
            let e = self.reify_bit_eq(la.len_ge_lit(k), lb.len_ge_lit(k));
            conj.push(e);
        }
        for k in 1..=la.bound.min(lb.bound) {
            for j in 0..self.bits {
                let e = self.reify_bit_eq(la.cells[k - 1][j], lb.cells[k - 1][j]);
                conj.push(e);
            }
        }
        self.reify_and(&conj)
    }

    fn reify_contains_at(&mut self, a: &StrTerm, i: usize, b: &StrTerm) -> Lit {
        let la = self.encode_term(a);
        let lb = self.encode_term(b);
        self.containment_at(&la, i, &lb)
    }

    fn reify_contains(&mut self, literal_index: usize, a: &StrTerm, b: &StrTerm, positive: bool) -> Lit {
        let la = self.encode_term(a);
        let lb = self.encode_term(b);
        let guards: Vec<(usize, Lit)> = (1..=la.bound + 1)
            .map(|i| (i, self.containment_at(&la, i, &lb)))
            .collect();
        let t = self.fresh();
        let mut selectors = Vec::with_capacity(guards.len());
        for &(pos, guard) in &guards {
            let sel = self.fresh();
            self.assert_clause(&[!sel, guard]);
            self.assert_clause(&[!guard, t]);
            selectors.push((pos, sel));
        }
        for x in 0..selectors.len() {
            for y in x + 1..selectors.len() {
                self.assert_clause(&[!selectors[x].1, !selectors[y].1]);
            }
        }
        let mut witness = vec![!t];
        witness.extend(selectors.iter().map(|&(_, s)| s));
        self.assert_clause(&witness);
        if positive {
            self.contains_selectors.push(ContainsSelectors {
                literal_index,
                container: a.clone(),
                container_bound: la.bound,
                needle_bound: lb.bound,
                selectors,
            });
        }
        t
    }

    fn encode_literal(&mut self, index: usize, lit: &Literal) {
        let t = match &lit.atom {
            Atom::Eq(a, b) => self.reify_eq(a, b),
            Atom::Contains(a, b) => self.reify_contains(index, a, b, !lit.negated),
            Atom::ContainsAt(a, i, b) => self.reify_contains_at(a, *i, b),
        };
        let asserted = if lit.negated { !t } else { t };
        self.assert_clause(&[asserted]);
    }
}

/// Encodes `formula` into `solver` and returns the layout directory.
pub fn encode_formula(solver: &mut SatSolver, formula: &Formula, cfg: &SolverConfig) -> EncodeResult {
    let true_lit = Lit::positive(solver.new_var());
    solver.add_clause(&[true_lit]);
    let mut enc = Encoder {
        solver,
        cfg,
        bits: code_bits(cfg.alphabet.len()),
        true_lit,
        cache: BTreeMap::new(),
        contains_selectors: Vec::new(),
    };
    match formula {
        Formula::Const(true) => {}
        Formula::Const(false) => {
            enc.assert_clause(&[!true_lit]);
        }
        Formula::Conj(lits) => {
            for (index, lit) in lits.iter().enumerate() {
                enc.encode_literal(index, lit);
            }
        }
    }
    let mut var_layouts = BTreeMap::new();
    for (term, layout) in &enc.cache {
        if let StrTerm::Var(name) = term {
            var_layouts.insert(name.clone(), layout.clone());
        }
    }
    EncodeResult {
        true_lit,
        alphabet: cfg.alphabet.clone(),
        var_layouts,
        contains_selectors: enc.contains_selectors,
    }
}

/// Reads the string assignment back out of a propositional model,
/// checking the invariants the encoding promises: monotone length
/// indicators, in-alphabet codes, and zero padding past the end.
pub fn decode_model(result: &EncodeResult, model: &Model) -> Assignment {
    let mut assignment = Assignment::default();
    for (name, layout) in &result.var_layouts {
        let mut len = 0;
        for k in 1..=layout.bound {
            if model.lit_value(layout.len_ge[k]) {
                assert_eq!(len, k - 1, "length indicators must be monotone");
                len = k;
            }
        }
        let mut value = String::new();
        for (k, cell) in layout.cells.iter().enumerate() {
            let code = cell
                .iter()
                .enumerate()
                .fold(0usize, |acc, (j, &bit)| {
                    acc | usize::from(model.lit_value(bit)) << j
                });
            if k < len {
                assert!(
                    code < result.alphabet.len(),
                    "cell code must index into the alphabet"
                );
                value.push(result.alphabet.char_at(code));
            } else {
                assert_eq!(code, 0, "cells past the end must hold the padding code");
            }
        }
        assignment.set(name.clone(), value);
    }
    assignment
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Literal;
    use crate::eval::eval_formula;
    use crate::oracle::{enumerate_sat, OracleVerdict};

    fn cfg_ab(l_max: usize) -> SolverConfig {
        SolverConfig::new(Alphabet::from_str_chars("ab").unwrap(), l_max)
    }

    fn solve_formula(f: &Formula, cfg: &SolverConfig) -> Option<Assignment> {
        let mut solver = SatSolver::new();
        let enc = encode_formula(&mut solver, f, cfg);
        match solver.solve(&[]) {
            crate::satcore::SatVerdict::Sat(model) => Some(decode_model(&enc, &model)),
            crate::satcore::SatVerdict::Unsat(_) => None,
        }
    }

    fn var(name: &str) -> StrTerm {
        StrTerm::var(name)
    }

    fn cst(value: &str) -> StrTerm {
        StrTerm::constant(value)
    }

    #[test]
    fn code_bits_matches_alphabet_sizes() {
        assert_eq!(code_bits(1), 0);
        assert_eq!(code_bits(2), 1);
        assert_eq!(code_bits(3), 2);
        assert_eq!(code_bits(4), 2);
        assert_eq!(code_bits(5), 3);
    }

    #[test]
    fn equality_with_a_constant_pins_the_variable() {
        let cfg = cfg_ab(3);
        let f = Formula::from_literals(vec![Literal::pos(Atom::Eq(var("x"), cst("ab")))]);
        let model = solve_formula(&f, &cfg).expect("satisfiable");
        assert_eq!(model.get("x"), Some("ab"));
    }

    #[test]
    fn a_term_never_differs_from_itself() {
        let cfg = cfg_ab(2);
        let f = Formula::from_literals(vec![Literal::neg(Atom::Eq(var("x"), var("x")))]);
        assert!(solve_formula(&f, &cfg).is_none());
    }

    #[test]
    fn extraction_requires_the_subject_to_reach() {
        let cfg = cfg_ab(3);
        let f = Formula::from_literals(vec![Literal::pos(Atom::Eq(
            StrTerm::extract(var("x"), 2, 3).unwrap(),
            cst("bb"),
        ))]);
        let model = solve_formula(&f, &cfg).expect("satisfiable");
        let x = model.get("x").unwrap();
        assert_eq!(x.len(), 3);
        assert_eq!(&x[1..3], "bb");
        assert!(eval_formula(&f, &model, &cfg));
    }

    #[test]
    fn extraction_past_the_bound_is_unsatisfiable() {
        let mut cfg = cfg_ab(3);
        cfg.set_var_bound("x", 2).unwrap();
        let f = Formula::from_literals(vec![Literal::pos(Atom::Eq(
            StrTerm::extract(var("x"), 3, 3).unwrap(),
            cst("a"),
        ))]);
        assert!(solve_formula(&f, &cfg).is_none());
    }

    #[test]
    fn concatenation_respects_the_global_cap() {
        let cfg = cfg_ab(2);
        let overflowing = Formula::from_literals(vec![
            Literal::pos(Atom::Eq(var("x"), cst("ab"))),
            Literal::pos(Atom::Eq(var("y"), cst("a"))),
            Literal::pos(Atom::Eq(StrTerm::concat(var("x"), var("y")), var("z"))),
        ]);
        assert!(solve_formula(&overflowing, &cfg).is_none());

        let fitting = Formula::from_literals(vec![
            Literal::pos(Atom::Eq(var("x"), cst("ab"))),
            Literal::pos(Atom::Eq(var("y"), cst(""))),
            Literal::pos(Atom::Eq(StrTerm::concat(var("x"), var("y")), var("z"))),
        ]);
        let model = solve_formula(&fitting, &cfg).expect("satisfiable");
        assert_eq!(model.get("z"), Some("ab"));
    }

    #[test]
    fn every_string_contains_the_empty_string() {
        let cfg = cfg_ab(2);
        let f = Formula::from_literals(vec![Literal::neg(Atom::Contains(var("x"), cst("")))]);
        assert!(solve_formula(&f, &cfg).is_none());
    }

    #[test]
    fn positional_containment_of_the_empty_string_checks_the_position() {
        let cfg = cfg_ab(2);
        let f = Formula::from_literals(vec![Literal::neg(Atom::ContainsAt(
            var("x"),
            2,
            cst(""),
        ))]);
        let model = solve_formula(&f, &cfg).expect("satisfiable");
        assert_eq!(model.get("x"), Some(""));
    }

    #[test]
    fn mutual_containment_forces_equality() {
        let cfg = cfg_ab(2);
        let f = Formula::from_literals(vec![
            Literal::pos(Atom::Contains(var("x"), var("y"))),
            Literal::pos(Atom::Contains(var("y"), var("x"))),
            Literal::pos(Atom::Eq(var("x"), cst("ab"))),
        ]);
        let model = solve_formula(&f, &cfg).expect("satisfiable");
        assert_eq!(model.get("y"), Some("ab"));
    }

    #[test]
    fn positive_containment_exposes_one_selector_per_position() {
        let cfg = cfg_ab(3);
        let f = Formula::from_literals(vec![Literal::pos(Atom::Contains(var("x"), cst("b")))]);
        let mut solver = SatSolver::new();
        let enc = encode_formula(&mut solver, &f, &cfg);
        assert_eq!(enc.contains_selectors.len(), 1);
        let sels = &enc.contains_selectors[0];
        assert_eq!(sels.literal_index, 0);
        assert_eq!(sels.container_bound, 3);
        assert_eq!(
            sels.selectors.iter().map(|&(p, _)| p).collect::<Vec<_>>(),
            vec![1, 2, 3, 4]
        );
    }

    #[test]
    fn negative_containment_exposes_no_selectors() {
        let cfg = cfg_ab(2);
        let f = Formula::from_literals(vec![Literal::neg(Atom::Contains(var("x"), cst("b")))]);
        let mut solver = SatSolver::new();
        let enc = encode_formula(&mut solver, &f, &cfg);
        assert!(enc.contains_selectors.is_empty());
    }

    #[test]
    fn trivial_formulas_encode_to_trivial_instances() {
        let cfg = cfg_ab(2);
        assert!(solve_formula(&Formula::Const(true), &cfg).is_some());
        assert!(solve_formula(&Formula::Const(false), &cfg).is_none());
    }

    #[test]
    fn verdicts_and_models_agree_with_the_enumeration_oracle() {
        let cfg = cfg_ab(2);
        let formulas: Vec<Formula> = vec![
            Formula::from_literals(vec![Literal::pos(Atom::Eq(
                var("x"),
                StrTerm::concat(var("y"), cst("a")),
            ))]),
            Formula::from_literals(vec![
                Literal::neg(Atom::Eq(var("x"), var("y"))),
                Literal::pos(Atom::Contains(var("x"), var("y"))),
            ]),
            Formula::from_literals(vec![Literal::pos(Atom::ContainsAt(var("x"), 2, var("y")))]),
            Formula::from_literals(vec![Literal::neg(Atom::ContainsAt(var("x"), 2, var("y")))]),
            Formula::from_literals(vec![Literal::pos(Atom::Contains(
                StrTerm::concat(var("x"), var("y")),
                cst("ba"),
            ))]),
            Formula::from_literals(vec![Literal::pos(Atom::Eq(
                StrTerm::concat(var("x"), var("x")),
                StrTerm::concat(var("y"), cst("ab")),
            ))]),
            Formula::from_literals(vec![Literal::pos(Atom::Eq(
                StrTerm::extract(StrTerm::concat(var("x"), var("y")), 1, 2).unwrap(),
                var("x"),
            ))]),
            Formula::from_literals(vec![
                Literal::pos(Atom::Contains(var("x"), cst("b"))),
                Literal::neg(Atom::Contains(var("x"), cst("a"))),
                Literal::neg(Atom::Eq(var("x"), cst("b"))),
            ]),
        ];
        for (i, f) in formulas.iter().enumerate() {
            let solved = solve_formula(f, &cfg);
            let oracle = enumerate_sat(f, &cfg, false);
            match (&solved, &oracle.verdict) {
                (Some(model), OracleVerdict::Sat(_)) => {
                    assert!(eval_formula(f, model, &cfg), "formula {i}: bad model");
                }
                (None, OracleVerdict::Unsat) => {}
                other => panic!("formula {i}: solver and oracle disagree: {other:?}"),
            }
        }
    }
}
