//! Encoders from 3-CNF-SAT into the bounded string theory, one per target
//! fragment, with witness constructors in both directions and a harness
//! that measures whether each encoding is equisatisfiable with its source.
//!
//! Every encoding introduces a pair of string variables `s{k}`, `r{k}` per
//! Boolean variable `x_k`, valued so that exactly one of the pair holds
//! the distinguished letter `a`, plus one helper variable per clause. The
//! `T` encoding exists in two variants: `Verbatim` keeps the excluded
//! needle `bbbb` and omits nonemptiness constraints, `Repaired` shortens
//! the needle to `bbb` and adds them. The harness does not assume any
//! encoding is faithful in the backward direction; it reports what the
//! solvers actually find.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ast::{
    classify_fragment, Alphabet, Assignment, Atom, Formula, Literal, SolverConfig, StrTerm,
};
use crate::engine::{self, SolveOptions, Verdict};
use crate::textio::CnfInstance;

/// Target fragment of an encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionFragment {
    /// Equality and containment.
    Ec,
    /// Equality and containment at a constant position.
    EtConst,
    /// Equality and concatenation.
    Ea,
    /// Equality and extraction at constant indices.
    ExConst,
    /// Containment alone.
    C,
    /// Containment at a constant position alone.
    T,
}

impl ReductionFragment {
    pub const ALL: [ReductionFragment; 6] = [
        ReductionFragment::Ec,
        ReductionFragment::EtConst,
        ReductionFragment::Ea,
        ReductionFragment::ExConst,
        ReductionFragment::C,
        ReductionFragment::T,
    ];

    /// The [`classify_fragment`] name the encoding must land in.
    pub fn fragment_name(&self) -> &'static str {
        match self {
            ReductionFragment::Ec => "E+C",
            ReductionFragment::EtConst => "E+T-CONST",
            ReductionFragment::Ea => "E+A",
            ReductionFragment::ExConst => "E+X-CONST",
            ReductionFragment::C => "C",
            ReductionFragment::T => "T",
        }
    }
}

/// Variant selector; only the `T` encoding distinguishes the two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionMode {
    Verbatim,
    Repaired,
}

/// Helper variables introduced for one clause.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseVars {
    /// Container variable `V{c}` holding the clause's witness letters.
    pub container: Option<String>,
    /// Filler variable `p{c}` padding the concatenation encodings.
    pub filler: Option<String>,
}

#[derive(Clone, Debug)]
pub struct ReductionOutput {
    pub formula: Formula,
    pub config: SolverConfig,
    /// Per Boolean variable `x_k`, the pair `(s_k, r_k)`, index `k - 1`.
    pub var_map: Vec<(String, String)>,
    /// Per clause, the helper variables it received.
    pub clause_map: Vec<ClauseVars>,
    pub fragment: ReductionFragment,
    pub mode: ReductionMode,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("input must be 3-CNF: clause {index} has {width} literals")]
    NotThreeCnf { index: usize, width: usize },
    #[error("clause {index} uses variable {var}, outside the declared 1..={num_vars}")]
    VariableOutOfRange {
        index: usize,
        var: i32,
        num_vars: usize,
    },
    #[error("the Boolean assignment does not satisfy the source formula")]
    UnsatisfyingWitness,
}

/// Total assignment to Boolean variables `x_1..x_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolAssignment {
    values: Vec<bool>,
}

impl BoolAssignment {
    pub fn all_false(n: usize) -> BoolAssignment {
        BoolAssignment {
            values: vec![false; n],
        }
    }

    /// Assignment whose k-th variable takes bit `k - 1` of `bits`.
    pub fn from_bits(n: usize, bits: u64) -> BoolAssignment {
        BoolAssignment {
            values: (0..n).map(|k| bits >> k & 1 == 1).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value of `x_var`, 1-based.
    pub fn get(&self, var: usize) -> bool {
        self.values[var - 1]
    }

    pub fn set(&mut self, var: usize, value: bool) {
        self.values[var - 1] = value;
    }

    fn literal_holds(&self, lit: i32) -> bool {
        let value = self.get(lit.unsigned_abs() as usize);
        if lit > 0 {
            value
        } else {
            !value
        }
    }

    pub fn satisfies(&self, phi: &CnfInstance) -> bool {
        phi.clauses
            .iter()
            .all(|clause| clause.iter().any(|&lit| self.literal_holds(lit)))
    }
}

fn s_name(k: usize) -> String {
    format!("s{k}")
}

fn r_name(k: usize) -> String {
    format!("r{k}")
}

fn v_name(c: usize) -> String {
    format!("V{c}")
}

fn p_name(c: usize) -> String {
    format!("p{c}")
}

fn check_three_cnf(phi: &CnfInstance) -> Result<(), ReductionError> {
    for (i, clause) in phi.clauses.iter().enumerate() {
        if clause.len() != 3 {
            return Err(ReductionError::NotThreeCnf {
                index: i + 1,
                width: clause.len(),
            });
        }
        for &lit in clause {
            if lit == 0 || lit.unsigned_abs() as usize > phi.num_vars {
                return Err(ReductionError::VariableOutOfRange {
                    index: i + 1,
                    var: lit,
                    num_vars: phi.num_vars,
                });
            }
        }
    }
    Ok(())
}

/// The string variable standing for a source literal: `s{k}` for `x_k`,
/// `r{k}` for its negation.
fn literal_term(lit: i32) -> StrTerm {
    let k = lit.unsigned_abs() as usize;
    if lit > 0 {
        StrTerm::var(s_name(k))
    } else {
        StrTerm::var(r_name(k))
    }
}

/// Encodes a 3-CNF instance into the chosen fragment. The output formula
/// is satisfiable whenever the source is; whether the converse holds is a
/// property of the individual encoding, measured by [`verify_equisat`].
pub fn reduce(
    fragment: ReductionFragment,
    phi: &CnfInstance,
    mode: ReductionMode,
) -> Result<ReductionOutput, ReductionError> {
    check_three_cnf(phi)?;
    let n = phi.num_vars;
    let m = phi.clauses.len();
    let empty = StrTerm::constant("");

    let (alphabet, l_max) = match (fragment, mode) {
        (ReductionFragment::Ec, _) | (ReductionFragment::Ea, _) => ("a", 3),
        (ReductionFragment::T, ReductionMode::Verbatim) => ("ab", 4),
        _ => ("ab", 3),
    };
    let mut config = SolverConfig::new(Alphabet::from_str_chars(alphabet).unwrap(), l_max);

    let mut literals = Vec::new();
    let mut var_map = Vec::with_capacity(n);
    for k in 1..=n {
        let (s, r) = (s_name(k), r_name(k));
        config.set_var_bound(&s, 1).unwrap();
        config.set_var_bound(&r, 1).unwrap();
        let sv = StrTerm::var(&s);
        let rv = StrTerm::var(&r);
        match fragment {
            ReductionFragment::Ec => {
                literals.push(Literal::neg(Atom::Eq(sv, rv)));
            }
            ReductionFragment::EtConst | ReductionFragment::ExConst => {
                literals.push(Literal::neg(Atom::Eq(sv.clone(), empty.clone())));
                literals.push(Literal::neg(Atom::Eq(rv.clone(), empty.clone())));
                literals.push(Literal::neg(Atom::Eq(sv, rv)));
            }
            ReductionFragment::Ea => {
                literals.push(Literal::pos(Atom::Eq(
                    StrTerm::concat(sv, rv),
                    StrTerm::constant("a"),
                )));
            }
            ReductionFragment::C => {
                literals.push(Literal::neg(Atom::Contains(empty.clone(), sv.clone())));
                literals.push(Literal::neg(Atom::Contains(empty.clone(), rv.clone())));
                literals.push(Literal::neg(Atom::Contains(sv, rv)));
            }
            ReductionFragment::T => {
                if mode == ReductionMode::Repaired {
                    literals.push(Literal::neg(Atom::ContainsAt(empty.clone(), 1, sv.clone())));
                    literals.push(Literal::neg(Atom::ContainsAt(empty.clone(), 1, rv.clone())));
                }
                literals.push(Literal::neg(Atom::ContainsAt(sv, 1, rv)));
            }
        }
        var_map.push((s, r));
    }

    let mut clause_map = Vec::with_capacity(m);
    for (idx, clause) in phi.clauses.iter().enumerate() {
        let c = idx + 1;
        let psi: Vec<StrTerm> = clause.iter().map(|&lit| literal_term(lit)).collect();
        let vars = match fragment {
            ReductionFragment::Ec => {
                let v = v_name(c);
                config.set_var_bound(&v, 3).unwrap();
                let vt = StrTerm::var(&v);
                for term in psi {
                    literals.push(Literal::pos(Atom::Contains(vt.clone(), term)));
                }
                literals.push(Literal::neg(Atom::Eq(vt, empty.clone())));
                ClauseVars {
                    container: Some(v),
                    filler: None,
                }
            }
            ReductionFragment::EtConst => {
                let v = v_name(c);
                config.set_var_bound(&v, 3).unwrap();
                let vt = StrTerm::var(&v);
                for (pos, term) in psi.into_iter().enumerate() {
                    literals.push(Literal::pos(Atom::ContainsAt(vt.clone(), pos + 1, term)));
                }
                literals.push(Literal::neg(Atom::Eq(vt, StrTerm::constant("bbb"))));
                ClauseVars {
                    container: Some(v),
                    filler: None,
                }
            }
            ReductionFragment::Ea => {
                let p = p_name(c);
                config.set_var_bound(&p, 2).unwrap();
                let mut lhs = psi[0].clone();
                for term in &psi[1..] {
                    lhs = StrTerm::concat(lhs, term.clone());
                }
                lhs = StrTerm::concat(lhs, StrTerm::var(&p));
                literals.push(Literal::pos(Atom::Eq(lhs, StrTerm::constant("aaa"))));
                ClauseVars {
                    container: None,
                    filler: Some(p),
                }
            }
            ReductionFragment::ExConst => {
                let v = v_name(c);
                config.set_var_bound(&v, 3).unwrap();
                let vt = StrTerm::var(&v);
                for (pos, term) in psi.into_iter().enumerate() {
                    let cell = StrTerm::extract(vt.clone(), pos + 1, pos + 1).unwrap();
                    literals.push(Literal::pos(Atom::Eq(cell, term)));
                }
                literals.push(Literal::neg(Atom::Eq(vt, StrTerm::constant("bbb"))));
                ClauseVars {
                    container: Some(v),
                    filler: None,
                }
            }
            ReductionFragment::C => {
                let v = v_name(c);
                config.set_var_bound(&v, 3).unwrap();
                let vt = StrTerm::var(&v);
                for term in psi {
                    literals.push(Literal::pos(Atom::Contains(vt.clone(), term)));
                }
                literals.push(Literal::neg(Atom::Contains(
                    StrTerm::constant("bbb"),
                    vt,
                )));
                ClauseVars {
                    container: Some(v),
                    filler: None,
                }
            }
            ReductionFragment::T => {
                let v = v_name(c);
                config.set_var_bound(&v, 3).unwrap();
                let vt = StrTerm::var(&v);
                for (pos, term) in psi.into_iter().enumerate() {
                    literals.push(Literal::pos(Atom::ContainsAt(vt.clone(), pos + 1, term)));
                }
                let needle = match mode {
                    ReductionMode::Verbatim => "bbbb",
                    ReductionMode::Repaired => "bbb",
                };
                literals.push(Literal::neg(Atom::ContainsAt(
                    vt,
                    1,
                    StrTerm::constant(needle),
                )));
                ClauseVars {
                    container: Some(v),
                    filler: None,
                }
            }
        };
        clause_map.push(vars);
    }

    let expected = match (fragment, mode) {
        (ReductionFragment::Ec, _) => n + 4 * m,
        (ReductionFragment::Ea, _) => n + m,
        (ReductionFragment::T, ReductionMode::Verbatim) => n + 4 * m,
        _ => 3 * n + 4 * m,
    };
    assert_eq!(literals.len(), expected, "encoding size drifted");

    let formula = Formula::from_literals(literals);
    assert_eq!(formula.variables().len(), 2 * n + m, "variable count drifted");
    Ok(ReductionOutput {
        formula,
        config,
        var_map,
        clause_map,
        fragment,
        mode,
    })
}

/// String values standing for a Boolean value, per fragment convention.
/// The single-letter alphabets mark truth with `a` against the empty
/// string; the two-letter ones mark it with `a` against `b`.
fn variable_values(fragment: ReductionFragment, truth: bool) -> (&'static str, &'static str) {
    let pair = match fragment {
        ReductionFragment::Ec | ReductionFragment::Ea => ("a", ""),
        _ => ("a", "b"),
    };
    if truth {
        pair
    } else {
        (pair.1, pair.0)
    }
}

/// Builds the string model the encoding's satisfiability argument
/// constructs from a satisfying Boolean assignment. The result satisfies
/// `reduce(fragment, phi, mode).formula` for either mode.
pub fn witness_forward(
    fragment: ReductionFragment,
    phi: &CnfInstance,
    witness: &BoolAssignment,
) -> Result<Assignment, ReductionError> {
    check_three_cnf(phi)?;
    if !witness.satisfies(phi) {
        return Err(ReductionError::UnsatisfyingWitness);
    }

    let mut out = Assignment::new();
    for k in 1..=phi.num_vars {
        let (s, r) = variable_values(fragment, witness.get(k));
        out.set(s_name(k), s);
        out.set(r_name(k), r);
    }
    for (idx, clause) in phi.clauses.iter().enumerate() {
        let c = idx + 1;
        match fragment {
            ReductionFragment::Ec => {
                out.set(v_name(c), "a");
            }
            ReductionFragment::EtConst | ReductionFragment::ExConst | ReductionFragment::T => {
                let cells: String = clause
                    .iter()
                    .map(|&lit| if witness.literal_holds(lit) { 'a' } else { 'b' })
                    .collect();
                out.set(v_name(c), cells);
            }
            ReductionFragment::Ea => {
                let holding = clause
                    .iter()
                    .filter(|&&lit| witness.literal_holds(lit))
                    .count();
                out.set(p_name(c), "a".repeat(3 - holding));
            }
            ReductionFragment::C => {
                let any_false = clause.iter().any(|&lit| !witness.literal_holds(lit));
                out.set(v_name(c), if any_false { "ab" } else { "a" });
            }
        }
    }
    Ok(out)
}

/// Reads a Boolean assignment back out of a string model: `x_k` is true
/// exactly when `s_k` carries the letter `a`.
pub fn decode_bool(out: &ReductionOutput, model: &Assignment) -> BoolAssignment {
    let mut decoded = BoolAssignment::all_false(out.var_map.len());
    for (k, (s, _)) in out.var_map.iter().enumerate() {
        decoded.set(k + 1, model.get(s) == Some("a"));
    }
    decoded
}

/// Verdict comparison between a 3-CNF instance and its string encoding.
#[derive(Clone, Debug)]
pub struct EquisatReport {
    pub phi_sat: bool,
    pub psi_sat: bool,
    /// When the encoding is satisfiable: does the decoded Boolean
    /// assignment satisfy the source?
    pub decoded_ok: Option<bool>,
    /// String model witnessing a satisfiable encoding of an unsatisfiable
    /// source.
    pub string_counterexample: Option<Assignment>,
    /// Satisfying source assignment witnessing the opposite mismatch.
    pub bool_counterexample: Option<BoolAssignment>,
}

impl EquisatReport {
    pub fn equisatisfiable(&self) -> bool {
        self.phi_sat == self.psi_sat
    }
}

/// All satisfying assignments of a 3-CNF instance, found exhaustively.
/// Feasible only for small variable counts.
pub fn boolean_models(phi: &CnfInstance) -> Vec<BoolAssignment> {
    assert!(
        phi.num_vars <= 20,
        "exhaustive Boolean sweep capped at 20 variables"
    );
    let mut models = Vec::new();
    for bits in 0..1u64 << phi.num_vars {
        let candidate = BoolAssignment::from_bits(phi.num_vars, bits);
        if candidate.satisfies(phi) {
            models.push(candidate);
        }
    }
    models
}

/// Compares the source instance (exhaustive Boolean check) against its
/// encoding (string solver) and records any disagreement with a witness.
pub fn verify_equisat(
    fragment: ReductionFragment,
    phi: &CnfInstance,
    mode: ReductionMode,
) -> Result<EquisatReport, ReductionError> {
    let out = reduce(fragment, phi, mode)?;
    let first_bool = {
        let mut found = None;
        for bits in 0..1u64 << phi.num_vars.min(20) {
            let candidate = BoolAssignment::from_bits(phi.num_vars, bits);
            if candidate.satisfies(phi) {
                found = Some(candidate);
                break;
            }
        }
        found
    };
    let phi_sat = first_bool.is_some();

    let outcome = engine::solve(&out.formula, &out.config, &SolveOptions::default());
    let (psi_sat, decoded_ok, string_model) = match outcome.verdict {
        Verdict::Sat(model) => {
            let decoded = decode_bool(&out, &model);
            (true, Some(decoded.satisfies(phi)), Some(model))
        }
        Verdict::Unsat => (false, None, None),
    };

    Ok(EquisatReport {
        phi_sat,
        psi_sat,
        decoded_ok,
        string_counterexample: if psi_sat && !phi_sat {
            string_model
        } else {
            None
        },
        bool_counterexample: if phi_sat && !psi_sat { first_bool } else { None },
    })
}

/// Random 3-CNF instance with `m` clauses over `n >= 3` variables, each
/// clause three distinct variables with independent polarities. The same
/// seed always produces the same instance.
pub fn gen_random_3cnf(n: usize, m: usize, seed: u64) -> CnfInstance {
    assert!(n >= 3, "three distinct variables per clause need n >= 3");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::with_capacity(m);
    for _ in 0..m {
        let mut vars: Vec<usize> = Vec::with_capacity(3);
        while vars.len() < 3 {
            let v = rng.random_range(1..=n);
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let clause: Vec<i32> = vars
            .into_iter()
            .map(|v| {
                let lit = v as i32;
                if rng.random_bool(0.5) {
                    lit
                } else {
                    -lit
                }
            })
            .collect();
        clauses.push(clause);
    }
    CnfInstance {
        num_vars: n,
        clauses,
    }
}

/// The encoding lands in exactly the fragment it targets.
pub fn fragment_matches(out: &ReductionOutput) -> bool {
    classify_fragment(&out.formula).name() == out.fragment.fragment_name()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::eval_formula;
    use crate::oracle;

    fn unit_unsat() -> CnfInstance {
        CnfInstance {
            num_vars: 1,
            clauses: vec![vec![1, 1, 1], vec![-1, -1, -1]],
        }
    }

    fn unit_sat() -> CnfInstance {
        CnfInstance {
            num_vars: 1,
            clauses: vec![vec![1, 1, 1]],
        }
    }

    #[test]
    fn literal_and_variable_counts_are_exact() {
        let phi = gen_random_3cnf(4, 5, 11);
        let (n, m) = (4, 5);
        let cases = [
            (ReductionFragment::Ec, ReductionMode::Verbatim, n + 4 * m),
            (ReductionFragment::EtConst, ReductionMode::Verbatim, 3 * n + 4 * m),
            (ReductionFragment::Ea, ReductionMode::Verbatim, n + m),
            (ReductionFragment::ExConst, ReductionMode::Verbatim, 3 * n + 4 * m),
            (ReductionFragment::C, ReductionMode::Verbatim, 3 * n + 4 * m),
            (ReductionFragment::T, ReductionMode::Verbatim, n + 4 * m),
            (ReductionFragment::T, ReductionMode::Repaired, 3 * n + 4 * m),
        ];
        for (fragment, mode, expected) in cases {
            let out = reduce(fragment, &phi, mode).unwrap();
            assert_eq!(out.formula.literals().len(), expected, "{fragment:?}");
            assert_eq!(out.formula.variables().len(), 2 * n + m, "{fragment:?}");
        }
    }

    #[test]
    fn encodings_land_in_their_target_fragments() {
        let phi = gen_random_3cnf(3, 2, 5);
        for fragment in ReductionFragment::ALL {
            for mode in [ReductionMode::Verbatim, ReductionMode::Repaired] {
                let out = reduce(fragment, &phi, mode).unwrap();
                assert!(fragment_matches(&out), "{fragment:?} {mode:?}");
            }
        }
    }

    #[test]
    fn the_unit_clause_encodes_to_the_expected_containment_formula() {
        let out = reduce(ReductionFragment::Ec, &unit_sat(), ReductionMode::Verbatim).unwrap();
        let s = StrTerm::var("s1");
        let r = StrTerm::var("r1");
        let v = StrTerm::var("V1");
        let expected = Formula::from_literals(vec![
            Literal::neg(Atom::Eq(s.clone(), r)),
            Literal::pos(Atom::Contains(v.clone(), s.clone())),
            Literal::pos(Atom::Contains(v.clone(), s.clone())),
            Literal::pos(Atom::Contains(v.clone(), s)),
            Literal::neg(Atom::Eq(v, StrTerm::constant(""))),
        ]);
        assert_eq!(out.formula, expected);
        assert_eq!(out.config.bound_of("s1"), 1);
        assert_eq!(out.config.bound_of("V1"), 3);
    }

    #[test]
    fn the_unit_clause_encodes_to_the_expected_concatenation_equations() {
        let out = reduce(ReductionFragment::Ea, &unit_sat(), ReductionMode::Verbatim).unwrap();
        let s = StrTerm::var("s1");
        let r = StrTerm::var("r1");
        let p = StrTerm::var("p1");
        let chain = StrTerm::concat(
            StrTerm::concat(StrTerm::concat(s.clone(), s.clone()), s.clone()),
            p,
        );
        let expected = Formula::from_literals(vec![
            Literal::pos(Atom::Eq(StrTerm::concat(s, r), StrTerm::constant("a"))),
            Literal::pos(Atom::Eq(chain, StrTerm::constant("aaa"))),
        ]);
        assert_eq!(out.formula, expected);
        assert_eq!(out.clause_map[0].filler.as_deref(), Some("p1"));
    }

    #[test]
    fn forward_witnesses_satisfy_every_encoding() {
        let phi = gen_random_3cnf(4, 4, 23);
        let witnesses = boolean_models(&phi);
        assert!(!witnesses.is_empty());
        for witness in &witnesses {
            for fragment in ReductionFragment::ALL {
                for mode in [ReductionMode::Verbatim, ReductionMode::Repaired] {
                    let out = reduce(fragment, &phi, mode).unwrap();
                    let model = witness_forward(fragment, &phi, witness).unwrap();
                    assert!(
                        eval_formula(&out.formula, &model, &out.config),
                        "{fragment:?} {mode:?}"
                    );
                    assert_eq!(&decode_bool(&out, &model), witness);
                }
            }
        }
    }

    #[test]
    fn witness_values_follow_the_documented_conventions() {
        let phi = unit_sat();
        let mut witness = BoolAssignment::all_false(1);
        witness.set(1, true);

        let ea = witness_forward(ReductionFragment::Ea, &phi, &witness).unwrap();
        assert_eq!(ea.get("s1"), Some("a"));
        assert_eq!(ea.get("r1"), Some(""));
        assert_eq!(ea.get("p1"), Some(""));

        let et = witness_forward(ReductionFragment::EtConst, &phi, &witness).unwrap();
        assert_eq!(et.get("s1"), Some("a"));
        assert_eq!(et.get("r1"), Some("b"));
        assert_eq!(et.get("V1"), Some("aaa"));
    }

    #[test]
    fn unsatisfying_witnesses_are_rejected() {
        let phi = unit_sat();
        let witness = BoolAssignment::all_false(1);
        assert_eq!(
            witness_forward(ReductionFragment::Ec, &phi, &witness),
            Err(ReductionError::UnsatisfyingWitness)
        );
    }

    #[test]
    fn malformed_instances_are_rejected() {
        let wide = CnfInstance {
            num_vars: 2,
            clauses: vec![vec![1, 2]],
        };
        assert_eq!(
            reduce(ReductionFragment::Ec, &wide, ReductionMode::Verbatim)
                .err()
                .unwrap(),
            ReductionError::NotThreeCnf { index: 1, width: 2 }
        );
        let ranged = CnfInstance {
            num_vars: 1,
            clauses: vec![vec![1, 1, 2]],
        };
        assert!(matches!(
            reduce(ReductionFragment::Ec, &ranged, ReductionMode::Verbatim),
            Err(ReductionError::VariableOutOfRange { var: 2, .. })
        ));
    }

    #[test]
    fn contradictory_unit_clauses_measure_the_backward_direction() {
        let phi = unit_unsat();
        let mut faithful = Vec::new();
        let mut unfaithful = Vec::new();
        for fragment in ReductionFragment::ALL {
            let report = verify_equisat(fragment, &phi, ReductionMode::Verbatim).unwrap();
            assert!(!report.phi_sat);
            if report.psi_sat {
                assert!(report.string_counterexample.is_some());
                assert_eq!(report.decoded_ok, Some(false));
                unfaithful.push(fragment);
            } else {
                faithful.push(fragment);
            }
        }
        assert_eq!(
            unfaithful,
            vec![ReductionFragment::Ec, ReductionFragment::C, ReductionFragment::T]
        );
        assert_eq!(
            faithful,
            vec![
                ReductionFragment::EtConst,
                ReductionFragment::Ea,
                ReductionFragment::ExConst
            ]
        );
        let repaired = verify_equisat(ReductionFragment::T, &phi, ReductionMode::Repaired).unwrap();
        assert!(!repaired.psi_sat && repaired.equisatisfiable());
    }

    #[test]
    fn satisfiable_sources_yield_satisfiable_encodings_with_valid_decodings() {
        let phi = gen_random_3cnf(3, 3, 41);
        for fragment in ReductionFragment::ALL {
            for mode in [ReductionMode::Verbatim, ReductionMode::Repaired] {
                let report = verify_equisat(fragment, &phi, mode).unwrap();
                if report.phi_sat {
                    assert!(report.psi_sat, "{fragment:?} {mode:?}");
                    assert!(report.bool_counterexample.is_none());
                }
            }
        }
    }

    #[test]
    fn encodings_agree_with_the_enumeration_oracle_on_tiny_instances() {
        let phi = unit_unsat();
        for fragment in [ReductionFragment::EtConst, ReductionFragment::Ea] {
            let out = reduce(fragment, &phi, ReductionMode::Verbatim).unwrap();
            let res = oracle::enumerate_sat(&out.formula, &out.config, false);
            assert!(!res.verdict.is_sat(), "{fragment:?}");
        }
        let out = reduce(ReductionFragment::Ec, &phi, ReductionMode::Verbatim).unwrap();
        assert!(oracle::enumerate_sat(&out.formula, &out.config, false)
            .verdict
            .is_sat());
    }

    #[test]
    fn random_instances_are_seed_deterministic_with_distinct_variables() {
        let a = gen_random_3cnf(5, 8, 99);
        let b = gen_random_3cnf(5, 8, 99);
        assert_eq!(a.clauses, b.clauses);
        assert_eq!(a.num_vars, 5);
        for clause in &a.clauses {
            let mut vars: Vec<u32> = clause.iter().map(|l| l.unsigned_abs()).collect();
            vars.sort_unstable();
            vars.dedup();
            assert_eq!(vars.len(), 3);
        }
        let c = gen_random_3cnf(5, 8, 100);
        assert_ne!(a.clauses, c.clauses);
    }

    #[test]
    #[should_panic(expected = "n >= 3")]
    fn too_few_variables_panic() {
        gen_random_3cnf(2, 1, 0);
    }
}
