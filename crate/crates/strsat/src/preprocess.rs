//! Preprocessing ahead of bit-blasting: constant propagation through the
//! equality and positional-containment literals, a containment graph whose
//! cycles force term equalities, a dedicated solver for the pure equality
//! fragment, and a length abstraction that drives the staged search.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::{classify_fragment, Assignment, Atom, Formula, Literal, SolverConfig, StrTerm};
use crate::eval;
use crate::oracle;

/// Refutation found before any propositional reasoning.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("unsatisfiable during preprocessing: {reason}")]
pub struct EarlyUnsat {
    pub reason: String,
}

impl EarlyUnsat {
    fn new(reason: impl Into<String>) -> EarlyUnsat {
        EarlyUnsat {
            reason: reason.into(),
        }
    }
}

/// Union-find over the formula's variables. Each class tracks the
/// tightest length bound of its members, an exact value once one is
/// known, individual pinned character positions, and a length floor.
struct VarClasses {
    names: Vec<String>,
    index: BTreeMap<String, usize>,
    parent: Vec<usize>,
    bound: Vec<usize>,
    value: Vec<Option<String>>,
    pins: Vec<BTreeMap<usize, char>>,
    min_len: Vec<usize>,
}

impl VarClasses {
    fn new(vars: &[String], cfg: &SolverConfig) -> VarClasses {
        let mut index = BTreeMap::new();
        for (i, name) in vars.iter().enumerate() {
            index.insert(name.clone(), i);
        }
        VarClasses {
            names: vars.to_vec(),
            index,
            parent: (0..vars.len()).collect(),
            bound: vars.iter().map(|v| cfg.bound_of(v)).collect(),
            value: vec![None; vars.len()],
            pins: vec![BTreeMap::new(); vars.len()],
            min_len: vec![0; vars.len()],
        }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let root = self.find(self.parent[i]);
            self.parent[i] = root;
        }
        self.parent[i]
    }

    fn root_of(&mut self, name: &str) -> usize {
        let i = self.index[name];
        self.find(i)
    }

    fn check_class(&self, r: usize) -> Result<(), EarlyUnsat> {
        let name = &self.names[r];
        if self.min_len[r] > self.bound[r] {
            return Err(EarlyUnsat::new(format!(
                "variable {name} needs at least {} characters but is bounded by {}",
                self.min_len[r], self.bound[r]
            )));
        }
        if let Some(v) = &self.value[r] {
            let chars: Vec<char> = v.chars().collect();
            if chars.len() > self.bound[r] {
                return Err(EarlyUnsat::new(format!(
                    "variable {name} is pinned to {v:?} but bounded by {}",
                    self.bound[r]
                )));
            }
            if self.min_len[r] > chars.len() {
                return Err(EarlyUnsat::new(format!(
                    "variable {name} is pinned to {v:?} but needs at least {} characters",
                    self.min_len[r]
                )));
            }
            for (&pos, &ch) in &self.pins[r] {
                if pos > chars.len() || chars[pos - 1] != ch {
                    return Err(EarlyUnsat::new(format!(
                        "variable {name} is pinned to {v:?} but position {pos} must be {ch:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    fn pin_value(&mut self, name: &str, v: &str) -> Result<bool, EarlyUnsat> {
        let r = self.root_of(name);
        if let Some(existing) = &self.value[r] {
            if existing != v {
                return Err(EarlyUnsat::new(format!(
                    "variable {} cannot equal both {existing:?} and {v:?}",
                    self.names[r]
                )));
            }
            return Ok(false);
        }
        self.value[r] = Some(v.to_string());
        self.check_class(r)?;
        Ok(true)
    }

    fn pin_cell(&mut self, name: &str, pos: usize, ch: char) -> Result<bool, EarlyUnsat> {
        let r = self.root_of(name);
        if pos > self.bound[r] {
            return Err(EarlyUnsat::new(format!(
                "variable {} has no position {pos} within its bound {}",
                self.names[r], self.bound[r]
            )));
        }
        if let Some(v) = &self.value[r] {
            let chars: Vec<char> = v.chars().collect();
            if pos > chars.len() || chars[pos - 1] != ch {
                return Err(EarlyUnsat::new(format!(
                    "variable {} is pinned to {v:?} but position {pos} must be {ch:?}",
                    self.names[r]
                )));
            }
            return Ok(false);
        }
        match self.pins[r].get(&pos) {
            Some(&existing) if existing != ch => Err(EarlyUnsat::new(format!(
                "variable {} needs both {existing:?} and {ch:?} at position {pos}",
                self.names[r]
            ))),
            Some(_) => Ok(false),
            None => {
                self.pins[r].insert(pos, ch);
                Ok(true)
            }
        }
    }

    fn raise_min_len(&mut self, name: &str, n: usize) -> Result<bool, EarlyUnsat> {
        let r = self.root_of(name);
        if n <= self.min_len[r] {
            return Ok(false);
        }
        self.min_len[r] = n;
        self.check_class(r)?;
        Ok(true)
    }

    fn union(&mut self, a: &str, b: &str) -> Result<bool, EarlyUnsat> {
        let ra = self.root_of(a);
        let rb = self.root_of(b);
        if ra == rb {
            return Ok(false);
        }
        let keep = ra.min(rb);
        let drop = ra.max(rb);
        self.parent[drop] = keep;
        self.bound[keep] = self.bound[keep].min(self.bound[drop]);
        self.min_len[keep] = self.min_len[keep].max(self.min_len[drop]);
        let dropped_pins = std::mem::take(&mut self.pins[drop]);
        let dropped_value = self.value[drop].take();
        self.check_class(keep)?;
        let keep_name = self.names[keep].clone();
        for (pos, ch) in dropped_pins {
            self.pin_cell(&keep_name, pos, ch)?;
        }
        if let Some(v) = dropped_value {
            self.pin_value(&keep_name, &v)?;
        }
        Ok(true)
    }

    /// Promotes classes whose pins determine the whole string: the length
    /// floor equals the bound and every position up to it is pinned.
    fn promote(&mut self) -> Result<bool, EarlyUnsat> {
        let mut changed = false;
        for i in 0..self.names.len() {
            let r = self.find(i);
            if r != i || self.value[r].is_some() {
                continue;
            }
            if self.min_len[r] == self.bound[r] && self.pins[r].len() == self.bound[r] {
                let v: String = self.pins[r].values().collect();
                self.value[r] = Some(v);
                self.check_class(r)?;
                changed = true;
            }
        }
        Ok(changed)
    }

    /// Replacement for a variable occurrence: its class value if known,
    /// otherwise its class representative.
    fn substitution(&mut self, name: &str) -> Option<StrTerm> {
        let r = self.root_of(name);
        if let Some(v) = &self.value[r] {
            Some(StrTerm::Const(v.clone()))
        } else if self.names[r] != name {
            Some(StrTerm::Var(self.names[r].clone()))
        } else {
            None
        }
    }
}

/// Result of constant propagation: the reduced formula, the bindings and
/// merges needed to restore the original variables, and the solver
/// configuration with class bounds tightened.
#[derive(Clone, Debug)]
pub struct SimplifiedFormula {
    pub formula: Formula,
    pub bindings: BTreeMap<String, String>,
    pub merges: BTreeMap<String, String>,
    pub cfg: SolverConfig,
}

impl SimplifiedFormula {
    /// Extends a model of the simplified formula to the original
    /// variables: pinned variables take their binding, merged variables
    /// copy their representative, and variables that vanished entirely
    /// default to the empty string.
    pub fn reconstruct(&self, solved: &Assignment, original_vars: &[String]) -> Assignment {
        let mut out = Assignment::default();
        for var in original_vars {
            let value = if let Some(v) = self.bindings.get(var) {
                v.clone()
            } else if let Some(rep) = self.merges.get(var) {
                solved.get(rep).unwrap_or("").to_string()
            } else {
                solved.get(var).unwrap_or("").to_string()
            };
            out.set(var.clone(), value);
        }
        out
    }
}

/// Variables and constants always denote a string; compound terms carry
/// definedness conditions of their own.
fn is_total(t: &StrTerm) -> bool {
    matches!(t, StrTerm::Var(_) | StrTerm::Const(_))
}

/// Folds constant subterms, refuting outright when a ground term is
/// undefined for every assignment.
fn fold_term(t: &StrTerm, cfg: &SolverConfig) -> Result<StrTerm, EarlyUnsat> {
    Ok(match t {
        StrTerm::Var(_) | StrTerm::Const(_) => t.clone(),
        StrTerm::Extract(inner, i, j) => {
            let folded = fold_term(inner, cfg)?;
            if let StrTerm::Const(s) = &folded {
                let chars: Vec<char> = s.chars().collect();
                if *j > chars.len() {
                    return Err(EarlyUnsat::new(format!(
                        "extraction {i}..{j} reaches past the constant {s:?}"
                    )));
                }
                StrTerm::Const(chars[i - 1..*j].iter().collect())
            } else {
                StrTerm::Extract(Box::new(folded), *i, *j)
            }
        }
        StrTerm::Concat(a, b) => {
            let fa = fold_term(a, cfg)?;
            let fb = fold_term(b, cfg)?;
            if let (StrTerm::Const(sa), StrTerm::Const(sb)) = (&fa, &fb) {
                if sa.chars().count() + sb.chars().count() > cfg.l_max {
                    return Err(EarlyUnsat::new(format!(
                        "concatenation of {sa:?} and {sb:?} exceeds the global cap {}",
                        cfg.l_max
                    )));
                }
                StrTerm::Const(format!("{sa}{sb}"))
            } else {
                StrTerm::Concat(Box::new(fa), Box::new(fb))
            }
        }
    })
}

fn rewrite_term(t: &StrTerm, classes: &mut VarClasses) -> StrTerm {
    match t {
        StrTerm::Var(name) => classes.substitution(name).unwrap_or_else(|| t.clone()),
        StrTerm::Const(_) => t.clone(),
        StrTerm::Extract(inner, i, j) => {
            StrTerm::Extract(Box::new(rewrite_term(inner, classes)), *i, *j)
        }
        StrTerm::Concat(a, b) => StrTerm::Concat(
            Box::new(rewrite_term(a, classes)),
            Box::new(rewrite_term(b, classes)),
        ),
    }
}

enum LiteralFate {
    Keep(Literal),
    Drop,
}

/// Simplifies one literal after substitution and folding.
fn simplify_literal(lit: Literal, cfg: &SolverConfig) -> Result<LiteralFate, EarlyUnsat> {
    let (a, b) = lit.atom.terms();

    if a == b {
        let always = match &lit.atom {
            Atom::Eq(..) | Atom::Contains(..) => true,
            Atom::ContainsAt(_, i, _) => *i == 1,
        };
        // A total term always satisfies (or always falsifies) the atom;
        // for compound terms the polarity that can never hold is still a
        // refutation, while the other polarity keeps its definedness
        // conditions and stays.
        if always == lit.negated {
            return Err(EarlyUnsat::new(format!("literal {lit} can never hold")));
        }
        if is_total(a) {
            return Ok(LiteralFate::Drop);
        }
        return Ok(LiteralFate::Keep(lit));
    }

    if let (StrTerm::Const(_), StrTerm::Const(_)) = (a, b) {
        let empty = Assignment::default();
        let holds = eval::eval_atom(&lit.atom, &empty, cfg)
            .expect("ground atoms are total once folded");
        if holds != lit.negated {
            return Ok(LiteralFate::Drop);
        }
        return Err(EarlyUnsat::new(format!(
            "literal {lit} is falsified by its constants"
        )));
    }

    Ok(LiteralFate::Keep(lit))
}

/// Propagates variable pins and merges to a fixpoint, folding ground
/// terms and evaluating ground literals along the way.
pub fn propagate_constants(
    f: &Formula,
    cfg: &SolverConfig,
) -> Result<SimplifiedFormula, EarlyUnsat> {
    let trivial = |value: bool, cfg: &SolverConfig| SimplifiedFormula {
        formula: Formula::Const(value),
        bindings: BTreeMap::new(),
        merges: BTreeMap::new(),
        cfg: cfg.clone(),
    };
    let mut literals = match f {
        Formula::Const(false) => {
            return Err(EarlyUnsat::new("the formula is the constant false"))
        }
        Formula::Const(true) => return Ok(trivial(true, cfg)),
        Formula::Conj(lits) => lits.clone(),
    };

    let vars = f.variables();
    let mut classes = VarClasses::new(&vars, cfg);

    loop {
        let mut changed = false;
        for lit in &literals {
            if lit.negated {
                continue;
            }
            match &lit.atom {
                Atom::Eq(StrTerm::Var(x), StrTerm::Var(y)) => {
                    changed |= classes.union(x, y)?;
                }
                Atom::Eq(StrTerm::Var(x), StrTerm::Const(c))
                | Atom::Eq(StrTerm::Const(c), StrTerm::Var(x)) => {
                    changed |= classes.pin_value(x, c)?;
                }
                Atom::ContainsAt(StrTerm::Var(x), i, StrTerm::Const(c)) => {
                    for (k, ch) in c.chars().enumerate() {
                        changed |= classes.pin_cell(x, i + k, ch)?;
                    }
                    changed |= classes.raise_min_len(x, i - 1 + c.chars().count())?;
                }
                _ => {}
            }
        }
        changed |= classes.promote()?;

        let mut next = Vec::with_capacity(literals.len());
        for lit in &literals {
            let rewritten = lit.atom.map_terms(|t| rewrite_term(t, &mut classes));
            let folded = match &rewritten {
                Atom::Eq(a, b) => Atom::Eq(fold_term(a, cfg)?, fold_term(b, cfg)?),
                Atom::Contains(a, b) => Atom::Contains(fold_term(a, cfg)?, fold_term(b, cfg)?),
                Atom::ContainsAt(a, i, b) => {
                    Atom::ContainsAt(fold_term(a, cfg)?, *i, fold_term(b, cfg)?)
                }
            };
            let candidate = Literal {
                negated: lit.negated,
                atom: folded,
            };
            match simplify_literal(candidate, cfg)? {
                LiteralFate::Keep(l) => next.push(l),
                LiteralFate::Drop => changed = true,
            }
        }
        if next != literals {
            changed = true;
        }
        literals = next;
        if !changed {
            break;
        }
    }

    let mut out_cfg = cfg.clone();
    let mut bindings = BTreeMap::new();
    let mut merges = BTreeMap::new();
    for (i, var) in vars.iter().enumerate() {
        let r = classes.find(i);
        if let Some(v) = classes.value[r].clone() {
            bindings.insert(var.clone(), v);
        } else if r != i {
            merges.insert(var.clone(), classes.names[r].clone());
        } else {
            out_cfg
                .set_var_bound(var, classes.bound[r])
                .expect("class bounds stay within the global cap");
        }
    }

    Ok(SimplifiedFormula {
        formula: Formula::from_literals(literals),
        bindings,
        merges,
        cfg: out_cfg,
    })
}

/// Containment structure of a formula: one node per term mentioned by a
/// containment atom, one edge per positive containment, components folded
/// with Tarjan's algorithm, and reachability closed over the condensation.
#[derive(Clone, Debug)]
pub struct ContainmentGraph {
    terms: Vec<StrTerm>,
    component_of: Vec<usize>,
    components: Vec<Vec<usize>>,
    reach: Vec<Vec<bool>>,
}

struct TarjanState {
    index: Vec<Option<usize>>,
    lowlink: Vec<usize>,
    on_stack: Vec<bool>,
    stack: Vec<usize>,
    next_index: usize,
    component_of: Vec<usize>,
    components: Vec<Vec<usize>>,
}

fn tarjan_visit(v: usize, adj: &[Vec<usize>], st: &mut TarjanState) {
    st.index[v] = Some(st.next_index);
    st.lowlink[v] = st.next_index;
    st.next_index += 1;
    st.stack.push(v);
    st.on_stack[v] = true;
    for &w in &adj[v] {
        match st.index[w] {
            None => {
                tarjan_visit(w, adj, st);
                st.lowlink[v] = st.lowlink[v].min(st.lowlink[w]);
            }
            Some(wi) if st.on_stack[w] => {
                st.lowlink[v] = st.lowlink[v].min(wi);
            }
            Some(_) => {}
        }
    }
    if st.lowlink[v] == st.index[v].unwrap() {
        let id = st.components.len();
        let mut members = Vec::new();
        loop {
            let w = st.stack.pop().unwrap();
            st.on_stack[w] = false;
            st.component_of[w] = id;
            members.push(w);
            if w == v {
                break;
            }
        }
        members.sort_unstable();
        st.components.push(members);
    }
}

/// Builds the containment graph and refutes negative containments that
/// positive ones already force to hold.
pub fn build_containment_graph(f: &Formula) -> Result<ContainmentGraph, EarlyUnsat> {
    let lits: &[Literal] = match f {
        Formula::Const(_) => &[],
        Formula::Conj(lits) => lits,
    };

    let mut terms: Vec<StrTerm> = Vec::new();
    let node_of = |t: &StrTerm, terms: &mut Vec<StrTerm>| -> usize {
        if let Some(i) = terms.iter().position(|x| x == t) {
            i
        } else {
            terms.push(t.clone());
            terms.len() - 1
        }
    };
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut negatives: Vec<(usize, usize, String)> = Vec::new();
    for lit in lits {
        match &lit.atom {
            Atom::Contains(a, b) | Atom::ContainsAt(a, _, b) => {
                let na = node_of(a, &mut terms);
                let nb = node_of(b, &mut terms);
                if !lit.negated {
                    edges.insert((nb, na));
                } else if matches!(lit.atom, Atom::Contains(..)) {
                    negatives.push((na, nb, lit.to_string()));
                }
            }
            Atom::Eq(..) => {}
        }
    }

    let n = terms.len();
    let mut adj = vec![Vec::new(); n];
    for &(from, to) in &edges {
        adj[from].push(to);
    }
    let mut st = TarjanState {
        index: vec![None; n],
        lowlink: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        next_index: 0,
        component_of: vec![0; n],
        components: Vec::new(),
    };
    for v in 0..n {
        if st.index[v].is_none() {
            tarjan_visit(v, &adj, &mut st);
        }
    }

    let m = st.components.len();
    let mut reach = vec![vec![false; m]; m];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(from, to) in &edges {
        reach[st.component_of[from]][st.component_of[to]] = true;
    }
    for k in 0..m {
        let via = reach[k].clone();
        for row in reach.iter_mut() {
            if row[k] {
                for (j, &step) in via.iter().enumerate() {
                    if step {
                        row[j] = true;
                    }
                }
            }
        }
    }

    for (na, nb, text) in &negatives {
        if reach[st.component_of[*nb]][st.component_of[*na]] {
            return Err(EarlyUnsat::new(format!(
                "literal {text} contradicts the positive containment chain"
            )));
        }
    }

    Ok(ContainmentGraph {
        terms,
        component_of: st.component_of,
        components: st.components,
        reach,
    })
}

impl ContainmentGraph {
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Do the positive containments force `hay` to contain `needle`?
    pub fn forces_containment(&self, hay: &StrTerm, needle: &StrTerm) -> bool {
        let (Some(ih), Some(in_)) = (
            self.terms.iter().position(|t| t == hay),
            self.terms.iter().position(|t| t == needle),
        ) else {
            return false;
        };
        self.reach[self.component_of[in_]][self.component_of[ih]]
    }

    /// Terms on a containment cycle contain each other, hence are equal.
    /// Returned as positive equality literals chaining each component.
    pub fn implied_equalities(&self) -> Vec<Literal> {
        let mut out = Vec::new();
        for members in &self.components {
            for pair in members.windows(2) {
                out.push(Literal::pos(Atom::Eq(
                    self.terms[pair[0]].clone(),
                    self.terms[pair[1]].clone(),
                )));
            }
        }
        out
    }
}

/// Outcome of the dedicated equality-fragment solver.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqualitySolution {
    Sat(Assignment),
    Unsat,
    /// The fragment solver cannot decide this formula; fall back to the
    /// full encoding.
    Inapplicable(String),
}

/// Decides conjunctions of (dis)equalities between variables and
/// constants by congruence closure plus greedy coloring of the
/// disequality graph. Anything it cannot settle is reported as
/// inapplicable, never guessed.
pub fn solve_equality_fragment(f: &Formula, cfg: &SolverConfig) -> EqualitySolution {
    let lits = match f {
        Formula::Const(true) => return EqualitySolution::Sat(Assignment::default()),
        Formula::Const(false) => return EqualitySolution::Unsat,
        Formula::Conj(lits) => lits,
    };
    let label = classify_fragment(f);
    if label.containment || label.containment_at || label.concat || label.extract {
        return EqualitySolution::Inapplicable(
            "the formula is not in the pure equality fragment".to_string(),
        );
    }

    let vars = f.variables();
    let mut classes = VarClasses::new(&vars, cfg);

    for lit in lits.iter().filter(|l| !l.negated) {
        let result = match &lit.atom {
            Atom::Eq(StrTerm::Var(x), StrTerm::Var(y)) => classes.union(x, y),
            Atom::Eq(StrTerm::Var(x), StrTerm::Const(c))
            | Atom::Eq(StrTerm::Const(c), StrTerm::Var(x)) => classes.pin_value(x, c),
            Atom::Eq(StrTerm::Const(c), StrTerm::Const(d)) => {
                if c == d {
                    Ok(false)
                } else {
                    return EqualitySolution::Unsat;
                }
            }
            _ => {
                return EqualitySolution::Inapplicable(
                    "equality over compound terms is outside the fragment".to_string(),
                )
            }
        };
        if result.is_err() {
            return EqualitySolution::Unsat;
        }
    }

    let mut forbidden: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for lit in lits.iter().filter(|l| l.negated) {
        match &lit.atom {
            Atom::Eq(StrTerm::Var(x), StrTerm::Var(y)) => {
                let rx = classes.root_of(x);
                let ry = classes.root_of(y);
                if rx == ry {
                    return EqualitySolution::Unsat;
                }
                edges.insert((rx.min(ry), rx.max(ry)));
            }
            Atom::Eq(StrTerm::Var(x), StrTerm::Const(c))
            | Atom::Eq(StrTerm::Const(c), StrTerm::Var(x)) => {
                let r = classes.root_of(x);
                if let Some(v) = &classes.value[r] {
                    if v == c {
                        return EqualitySolution::Unsat;
                    }
                } else if c.chars().count() <= classes.bound[r] {
                    forbidden.entry(r).or_default().insert(c.clone());
                }
            }
            Atom::Eq(StrTerm::Const(c), StrTerm::Const(d)) => {
                if c == d {
                    return EqualitySolution::Unsat;
                }
            }
            _ => {
                return EqualitySolution::Inapplicable(
                    "equality over compound terms is outside the fragment".to_string(),
                )
            }
        }
    }

    // Disequalities with one pinned side become forbidden values; edges
    // between two pinned classes are checked outright.
    let mut free_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(ra, rb) in &edges {
        match (classes.value[ra].clone(), classes.value[rb].clone()) {
            (Some(va), Some(vb)) => {
                if va == vb {
                    return EqualitySolution::Unsat;
                }
            }
            (Some(va), None) => {
                if va.chars().count() <= classes.bound[rb] {
                    forbidden.entry(rb).or_default().insert(va);
                }
            }
            (None, Some(vb)) => {
                if vb.chars().count() <= classes.bound[ra] {
                    forbidden.entry(ra).or_default().insert(vb);
                }
            }
            (None, None) => {
                free_edges.insert((ra, rb));
            }
        }
    }

    // Connected components of the remaining disequality graph; uniform
    // bounds keep the greedy argument simple, anything else falls back.
    let roots: Vec<usize> = (0..vars.len()).filter(|&i| classes.find(i) == i).collect();
    let mut adjacent: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in &free_edges {
        adjacent.entry(a).or_default().push(b);
        adjacent.entry(b).or_default().push(a);
    }
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    for &r in &roots {
        if seen.contains(&r) || !adjacent.contains_key(&r) {
            continue;
        }
        let mut component = vec![r];
        seen.insert(r);
        let mut queue = vec![r];
        while let Some(v) = queue.pop() {
            for &w in adjacent.get(&v).into_iter().flatten() {
                if seen.insert(w) {
                    component.push(w);
                    queue.push(w);
                }
            }
        }
        let first_bound = classes.bound[component[0]];
        if component.iter().any(|&c| classes.bound[c] != first_bound) {
            return EqualitySolution::Inapplicable(
                "disequal variables with mixed bounds need the full encoding".to_string(),
            );
        }
    }

    // Greedy coloring in class order, smallest value first.
    let mut colors: BTreeMap<usize, String> = BTreeMap::new();
    for &r in &roots {
        if classes.value[r].is_some() {
            continue;
        }
        let constrained = adjacent.contains_key(&r) || forbidden.contains_key(&r);
        if !constrained {
            colors.insert(r, String::new());
            continue;
        }
        let blocked = forbidden.remove(&r).unwrap_or_default();
        let neighbors = adjacent.get(&r).cloned().unwrap_or_default();
        let choice = oracle::domain(cfg, classes.bound[r])
            .into_iter()
            .find(|v| {
                !blocked.contains(v)
                    && !neighbors
                        .iter()
                        .any(|w| colors.get(w).is_some_and(|c| c == v))
            });
        match choice {
            Some(v) => {
                colors.insert(r, v);
            }
            None => {
                return EqualitySolution::Inapplicable(
                    "greedy coloring ran out of candidate values".to_string(),
                )
            }
        }
    }

    let mut assignment = Assignment::default();
    for (i, name) in vars.iter().enumerate() {
        let r = classes.find(i);
        let value = classes.value[r]
            .clone()
            .or_else(|| colors.get(&r).cloned())
            .unwrap_or_default();
        assignment.set(name.clone(), value);
    }
    EqualitySolution::Sat(assignment)
}

/// Length constraint over term indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LengthConstraint {
    /// The term has exactly this length.
    Fixed(usize, usize),
    /// The two terms have equal lengths.
    Equal(usize, usize),
    /// `Sum(c, a, b)`: the length of `c` is the sum of the other two.
    Sum(usize, usize, usize),
    /// The term is at least this long.
    AtLeast(usize, usize),
    /// `GreaterEqual(a, b)`: `a` is at least as long as `b`.
    GreaterEqual(usize, usize),
    /// `ContainsAtLen(a, b, i)`: if `b` is nonempty, `a` extends to the
    /// end of `b` placed at position `i`; if empty, `a` reaches `i - 1`.
    ContainsAtLen(usize, usize, usize),
}

/// Length abstraction of a formula: every subterm gets an index (children
/// before parents), a length bound, and the constraints its literals
/// imply about lengths alone.
#[derive(Clone, Debug)]
pub struct LengthSystem {
    pub terms: Vec<StrTerm>,
    pub bounds: Vec<usize>,
    pub var_indices: BTreeMap<String, usize>,
    pub constraints: Vec<LengthConstraint>,
}

fn add_term(
    t: &StrTerm,
    cfg: &SolverConfig,
    terms: &mut Vec<StrTerm>,
    bounds: &mut Vec<usize>,
    index: &mut BTreeMap<StrTerm, usize>,
) -> usize {
    if let Some(&i) = index.get(t) {
        return i;
    }
    let bound = match t {
        StrTerm::Var(name) => cfg.bound_of(name),
        StrTerm::Const(s) => s.chars().count(),
        StrTerm::Extract(inner, i, j) => {
            add_term(inner, cfg, terms, bounds, index);
            j - i + 1
        }
        StrTerm::Concat(a, b) => {
            let ia = add_term(a, cfg, terms, bounds, index);
            let ib = add_term(b, cfg, terms, bounds, index);
            (bounds[ia] + bounds[ib]).min(cfg.l_max)
        }
    };
    let id = terms.len();
    terms.push(t.clone());
    bounds.push(bound);
    index.insert(t.clone(), id);
    id
}

/// Projects the formula onto lengths.
pub fn derive_length_constraints(f: &Formula, cfg: &SolverConfig) -> LengthSystem {
    let lits: &[Literal] = match f {
        Formula::Const(_) => &[],
        Formula::Conj(lits) => lits,
    };
    let mut terms = Vec::new();
    let mut bounds = Vec::new();
    let mut index = BTreeMap::new();
    let mut constraints = Vec::new();

    for lit in lits {
        let (a, b) = lit.atom.terms();
        let ia = add_term(a, cfg, &mut terms, &mut bounds, &mut index);
        let ib = add_term(b, cfg, &mut terms, &mut bounds, &mut index);
        match (&lit.atom, lit.negated) {
            (Atom::Eq(..), false) => constraints.push(LengthConstraint::Equal(ia, ib)),
            (Atom::Contains(..), false) => {
                constraints.push(LengthConstraint::GreaterEqual(ia, ib))
            }
            (Atom::ContainsAt(_, i, _), false) => {
                constraints.push(LengthConstraint::ContainsAtLen(ia, ib, *i))
            }
            (Atom::Eq(lhs, rhs), true) => {
                if matches!(rhs, StrTerm::Const(s) if s.is_empty()) {
                    constraints.push(LengthConstraint::AtLeast(ia, 1));
                }
                if matches!(lhs, StrTerm::Const(s) if s.is_empty()) {
                    constraints.push(LengthConstraint::AtLeast(ib, 1));
                }
            }
            _ => {}
        }
    }

    for (id, t) in terms.iter().enumerate() {
        match t {
            StrTerm::Var(_) => {}
            StrTerm::Const(s) => {
                constraints.push(LengthConstraint::Fixed(id, s.chars().count()))
            }
            StrTerm::Extract(inner, i, j) => {
                constraints.push(LengthConstraint::Fixed(id, j - i + 1));
                constraints.push(LengthConstraint::AtLeast(index[inner.as_ref()], *j));
            }
            StrTerm::Concat(a, b) => {
                constraints.push(LengthConstraint::Sum(
                    id,
                    index[a.as_ref()],
                    index[b.as_ref()],
                ));
            }
        }
    }

    let mut var_indices = BTreeMap::new();
    for (id, t) in terms.iter().enumerate() {
        if let StrTerm::Var(name) = t {
            var_indices.insert(name.clone(), id);
        }
    }

    LengthSystem {
        terms,
        bounds,
        var_indices,
        constraints,
    }
}

impl LengthSystem {
    /// Variable names in the projection order used by `solve_lengths`.
    pub fn var_names(&self) -> Vec<String> {
        self.var_indices.keys().cloned().collect()
    }

    /// Term lengths implied by a full variable assignment; `None` when a
    /// concatenation overflows its bound.
    fn fill(&self, var_len: &[Option<usize>]) -> Option<Vec<Option<usize>>> {
        let mut known: Vec<Option<usize>> = vec![None; self.terms.len()];
        for (id, t) in self.terms.iter().enumerate() {
            known[id] = match t {
                StrTerm::Var(_) => var_len[id],
                StrTerm::Const(s) => Some(s.chars().count()),
                StrTerm::Extract(_, i, j) => Some(j - i + 1),
                StrTerm::Concat(a, b) => {
                    let ia = self.term_index(a);
                    let ib = self.term_index(b);
                    match (known[ia], known[ib]) {
                        (Some(la), Some(lb)) => {
                            if la + lb > self.bounds[id] {
                                return None;
                            }
                            Some(la + lb)
                        }
                        _ => None,
                    }
                }
            };
        }
        Some(known)
    }

    fn term_index(&self, t: &StrTerm) -> usize {
        self.terms
            .iter()
            .position(|x| x == t)
            .expect("subterms are registered before their parents")
    }

    fn consistent(&self, known: &[Option<usize>]) -> bool {
        self.constraints.iter().all(|c| match *c {
            LengthConstraint::Fixed(t, n) => known[t].is_none_or(|l| l == n),
            LengthConstraint::Equal(a, b) => match (known[a], known[b]) {
                (Some(la), Some(lb)) => la == lb,
                _ => true,
            },
            LengthConstraint::Sum(c, a, b) => match (known[c], known[a], known[b]) {
                (Some(lc), Some(la), Some(lb)) => lc == la + lb,
                _ => true,
            },
            LengthConstraint::AtLeast(t, n) => known[t].is_none_or(|l| l >= n),
            LengthConstraint::GreaterEqual(a, b) => match (known[a], known[b]) {
                (Some(la), Some(lb)) => la >= lb,
                _ => true,
            },
            LengthConstraint::ContainsAtLen(a, b, i) => match (known[a], known[b]) {
                (Some(la), Some(lb)) => {
                    if lb >= 1 {
                        la >= lb + i - 1
                    } else {
                        la + 1 >= i
                    }
                }
                _ => true,
            },
        })
    }
}

struct Domains {
    lo: Vec<usize>,
    hi: Vec<usize>,
}

impl Domains {
    /// Narrows the domain of term `t`. `None` when it empties, `Some(true)`
    /// when it actually changed.
    fn shrink(&mut self, t: usize, new_lo: usize, new_hi: usize) -> Option<bool> {
        let mut local = false;
        if new_lo > self.lo[t] {
            self.lo[t] = new_lo;
            local = true;
        }
        if new_hi < self.hi[t] {
            self.hi[t] = new_hi;
            local = true;
        }
        if self.lo[t] > self.hi[t] {
            None
        } else {
            Some(local)
        }
    }
}

/// Interval domains per term, narrowed to a fixpoint. `None` when some
/// domain empties, i.e. no length assignment can exist at all.
fn propagate_intervals(sys: &LengthSystem) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = sys.terms.len();
    let mut d = Domains {
        lo: vec![0usize; n],
        hi: sys.bounds.clone(),
    };
    let mut changed = true;
    while changed {
        changed = false;
        for c in &sys.constraints {
            match *c {
                LengthConstraint::Fixed(t, len) => {
                    changed |= d.shrink(t, len, len)?;
                }
                LengthConstraint::Equal(a, b) => {
                    let l = d.lo[a].max(d.lo[b]);
                    let h = d.hi[a].min(d.hi[b]);
                    changed |= d.shrink(a, l, h)?;
                    changed |= d.shrink(b, l, h)?;
                }
                LengthConstraint::Sum(s, a, b) => {
                    changed |= d.shrink(s, d.lo[a] + d.lo[b], d.hi[a] + d.hi[b])?;
                    changed |= d.shrink(
                        a,
                        d.lo[s].saturating_sub(d.hi[b]),
                        d.hi[s].checked_sub(d.lo[b])?,
                    )?;
                    changed |= d.shrink(
                        b,
                        d.lo[s].saturating_sub(d.hi[a]),
                        d.hi[s].checked_sub(d.lo[a])?,
                    )?;
                }
                LengthConstraint::AtLeast(t, n) => {
                    changed |= d.shrink(t, n, d.hi[t])?;
                }
                LengthConstraint::GreaterEqual(a, b) => {
                    changed |= d.shrink(a, d.lo[b], d.hi[a])?;
                    changed |= d.shrink(b, d.lo[b], d.hi[a])?;
                }
                LengthConstraint::ContainsAtLen(a, b, i) => {
                    let floor = if d.lo[b] >= 1 { d.lo[b] + i - 1 } else { i - 1 };
                    changed |= d.shrink(a, floor, d.hi[a])?;
                    let cap = (d.hi[a] + 1).saturating_sub(i);
                    changed |= d.shrink(b, d.lo[b], cap)?;
                }
            }
        }
    }
    Some((d.lo, d.hi))
}

/// Finds a length assignment for the variables consistent with the
/// system, preferring longer strings, skipping `blocked` projections.
/// `None` means no assignment outside `blocked` exists; with an empty
/// block set that refutes the formula at the length level.
pub fn solve_lengths(
    sys: &LengthSystem,
    blocked: &BTreeSet<Vec<usize>>,
) -> Option<Vec<usize>> {
    let (lo, hi) = propagate_intervals(sys)?;
    let var_ids: Vec<usize> = sys.var_indices.values().copied().collect();

    fn dfs(
        sys: &LengthSystem,
        var_ids: &[usize],
        lo: &[usize],
        hi: &[usize],
        var_len: &mut Vec<Option<usize>>,
        depth: usize,
        blocked: &BTreeSet<Vec<usize>>,
    ) -> Option<Vec<usize>> {
        if depth == var_ids.len() {
            let projection: Vec<usize> =
                var_ids.iter().map(|&id| var_len[id].unwrap()).collect();
            if blocked.contains(&projection) {
                return None;
            }
            let known = sys.fill(var_len)?;
            if known.iter().any(|l| l.is_none()) || !sys.consistent(&known) {
                return None;
            }
            for (id, l) in known.iter().enumerate() {
                if l.unwrap() > sys.bounds[id] {
                    return None;
                }
            }
            return Some(projection);
        }
        let id = var_ids[depth];
        for candidate in (lo[id]..=hi[id]).rev() {
            var_len[id] = Some(candidate);
            if let Some(partial) = sys.fill(var_len) {
                if sys.consistent(&partial) {
                    if let Some(found) =
                        dfs(sys, var_ids, lo, hi, var_len, depth + 1, blocked)
                    {
                        return Some(found);
                    }
                }
            }
            var_len[id] = None;
        }
        None
    }

    let mut var_len = vec![None; sys.terms.len()];
    dfs(sys, &var_ids, &lo, &hi, &mut var_len, 0, blocked)
}
