//! Embedded CDCL SAT engine: two-literal watching, first-UIP clause
//! learning, activity-driven branching with phase saving, Luby restarts,
//! solving under assumptions with final-conflict cores, and a level-zero
//! simplifier.
//!
//! Everything is deterministic: branching breaks activity ties by variable
//! index and no randomness is used, so the same clause set and assumption
//! sequence always produce the same verdict and model.

use crate::textio::CnfInstance;

/// Propositional variable, indexed from 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Literal: a variable with a polarity, packed as `var << 1 | negated`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(u32);

impl Lit {
    pub fn positive(v: Var) -> Lit {
        Lit(v.0 << 1)
    }

    pub fn negative(v: Var) -> Lit {
        Lit(v.0 << 1 | 1)
    }

    pub fn new(v: Var, positive: bool) -> Lit {
        if positive {
            Lit::positive(v)
        } else {
            Lit::negative(v)
        }
    }

    pub fn var(self) -> Var {
        Var(self.0 >> 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    /// Index usable for watch lists.
    fn index(self) -> usize {
        self.0 as usize
    }

    /// DIMACS rendering: 1-based, negative when the literal is negated.
    pub fn to_dimacs(self) -> i32 {
        let v = (self.var().index() + 1) as i32;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }
}

impl std::ops::Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

/// Result of adding a clause. After `ConflictAtLevelZero` the solver is
/// permanently unsatisfiable; further adds and solves short-circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AddClause {
    Added,
    ConflictAtLevelZero,
}

/// Variable assignment extracted from a satisfying search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn var_value(&self, v: Var) -> bool {
        self.values[v.index()]
    }

    pub fn lit_value(&self, l: Lit) -> bool {
        self.var_value(l.var()) == l.is_positive()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Outcome of a [`SatSolver::solve`] call. The unsat payload is a subset
/// of the assumptions whose conjunction with the clause database is
/// contradictory; it is empty when the database alone is unsatisfiable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SatVerdict {
    Sat(Model),
    Unsat(Vec<Lit>),
}

impl SatVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, SatVerdict::Sat(_))
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolverStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub restarts: u64,
    pub learned: u64,
}

#[derive(Clone, Debug)]
struct Clause {
    lits: Vec<Lit>,
    learnt: bool,
}

#[derive(Clone, Copy, Debug)]
struct Watcher {
    clause: u32,
    blocker: Lit,
}

const VAR_DECAY: f64 = 0.95;
const RESTART_BASE: u64 = 128;

/// The CDCL solver.
#[derive(Clone, Debug)]
pub struct SatSolver {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<Option<bool>>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    activity: Vec<f64>,
    phase: Vec<bool>,
    seen: Vec<bool>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    var_inc: f64,
    ok: bool,
    stats: SolverStats,
}

impl Default for SatSolver {
    fn default() -> Self {
        Self::new()
    }
}

impl SatSolver {
    pub fn new() -> SatSolver {
        SatSolver {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            activity: Vec::new(),
            phase: Vec::new(),
            seen: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            var_inc: 1.0,
            ok: true,
            stats: SolverStats::default(),
        }
    }

    pub fn new_var(&mut self) -> Var {
        let v = Var(self.assigns.len() as u32);
        self.assigns.push(None);
        self.level.push(0);
        self.reason.push(None);
        self.activity.push(0.0);
        self.phase.push(false);
        self.seen.push(false);
        self.watches.push(Vec::new());
        self.watches.push(Vec::new());
        v
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    /// Stored problem clauses (level-zero units and learnt clauses are
    /// not counted).
    pub fn num_clauses(&self) -> usize {
        self.clauses.iter().filter(|c| !c.learnt).count()
    }

    /// Has the database been refuted outright at level zero?
    pub fn conflict_at_level_zero(&self) -> bool {
        !self.ok
    }

    pub fn stats(&self) -> &SolverStats {
        &self.stats
    }

    fn value(&self, l: Lit) -> Option<bool> {
        self.assigns[l.var().index()].map(|b| b == l.is_positive())
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    fn enqueue(&mut self, l: Lit, reason: Option<u32>) {
        debug_assert!(self.value(l).is_none());
        let v = l.var().index();
        self.assigns[v] = Some(l.is_positive());
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(l);
        self.stats.propagations += 1;
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let bound = self.trail_lim[level];
        for i in (bound..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            self.phase[v] = l.is_positive();
            self.assigns[v] = None;
            self.reason[v] = None;
        }
        self.trail.truncate(bound);
        self.trail_lim.truncate(level);
        self.qhead = bound;
    }

    fn bump_var(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    fn decay_activity(&mut self) {
        self.var_inc /= VAR_DECAY;
    }

    fn attach_clause(&mut self, lits: Vec<Lit>, learnt: bool) -> u32 {
        debug_assert!(lits.len() >= 2);
        let idx = self.clauses.len() as u32;
        let (w0, w1) = (lits[0], lits[1]);
        self.watches[(!w0).index()].push(Watcher {
            clause: idx,
            blocker: w1,
        });
        self.watches[(!w1).index()].push(Watcher {
            clause: idx,
            blocker: w0,
        });
        self.clauses.push(Clause { lits, learnt });
        idx
    }

    /// Adds a clause at level zero. Literals satisfied there subsume the
    /// clause, falsified ones are dropped, and tautologies are ignored; a
    /// clause left empty refutes the database permanently.
    pub fn add_clause(&mut self, lits: &[Lit]) -> AddClause {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return AddClause::ConflictAtLevelZero;
        }
        let mut sorted = lits.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for pair in sorted.windows(2) {
            if pair[0].var() == pair[1].var() {
                return AddClause::Added;
            }
        }
        let mut keep = Vec::with_capacity(sorted.len());
        for &l in &sorted {
            match self.value(l) {
                Some(true) => return AddClause::Added,
                Some(false) => {}
                None => keep.push(l),
            }
        }
        match keep.len() {
            0 => {
                self.ok = false;
                AddClause::ConflictAtLevelZero
            }
            1 => {
                self.enqueue(keep[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                    AddClause::ConflictAtLevelZero
                } else {
                    AddClause::Added
                }
            }
            _ => {
                self.attach_clause(keep, false);
                AddClause::Added
            }
        }
    }

    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            let false_lit = !p;
            let watchers = std::mem::take(&mut self.watches[p.index()]);
            let mut kept = Vec::with_capacity(watchers.len());
            let mut conflict = None;
            let mut wi = 0;
            'watchers: while wi < watchers.len() {
                let w = watchers[wi];
                wi += 1;
                if self.value(w.blocker) == Some(true) {
                    kept.push(w);
                    continue;
                }
                let ci = w.clause as usize;
                {
                    let c = &mut self.clauses[ci];
                    if c.lits[0] == false_lit {
                        c.lits.swap(0, 1);
                    }
                    debug_assert_eq!(c.lits[1], false_lit);
                }
                let first = self.clauses[ci].lits[0];
                if first != w.blocker && self.value(first) == Some(true) {
                    kept.push(Watcher {
                        clause: w.clause,
                        blocker: first,
                    });
                    continue;
                }
                let len = self.clauses[ci].lits.len();
                for k in 2..len {
                    let lk = self.clauses[ci].lits[k];
                    if self.value(lk) != Some(false) {
                        self.clauses[ci].lits.swap(1, k);
                        self.watches[(!lk).index()].push(Watcher {
                            clause: w.clause,
                            blocker: first,
                        });
                        continue 'watchers;
                    }
                }
                kept.push(Watcher {
                    clause: w.clause,
                    blocker: first,
                });
                if self.value(first) == Some(false) {
                    kept.extend_from_slice(&watchers[wi..]);
                    self.qhead = self.trail.len();
                    conflict = Some(w.clause);
                    break;
                }
                self.enqueue(first, Some(w.clause));
            }
            self.watches[p.index()] = kept;
            if conflict.is_some() {
                return conflict;
            }
        }
        None
    }

    /// First-UIP conflict analysis. Returns the learnt clause (asserting
    /// literal first, a deepest remaining literal second) and the level to
    /// backtrack to.
    fn analyze(&mut self, mut confl: u32) -> (Vec<Lit>, usize) {
        let current = self.decision_level() as u32;
        let mut learnt: Vec<Lit> = vec![Lit(0)];
        let mut counter = 0usize;
        let mut index = self.trail.len();
        let mut p: Option<Lit> = None;

        loop {
            let start = usize::from(p.is_some());
            for k in start..self.clauses[confl as usize].lits.len() {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var().index();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.bump_var(v);
                    if self.level[v] >= current {
                        counter += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var().index()] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[lit.var().index()] = false;
            counter -= 1;
            p = Some(lit);
            if counter == 0 {
                break;
            }
            confl = self.reason[lit.var().index()]
                .expect("implied literal inside a conflict must carry a reason");
        }
        learnt[0] = !p.expect("conflict analysis always resolves to a UIP");

        let backtrack = if learnt.len() == 1 {
            0
        } else {
            let mut deepest = 1;
            for i in 2..learnt.len() {
                if self.level[learnt[i].var().index()] > self.level[learnt[deepest].var().index()]
                {
                    deepest = i;
                }
            }
            learnt.swap(1, deepest);
            self.level[learnt[1].var().index()] as usize
        };
        for &l in &learnt[1..] {
            self.seen[l.var().index()] = false;
        }
        (learnt, backtrack)
    }

    /// Walks the implication trail backwards from a failing assumption and
    /// collects the assumptions it depends on.
    fn analyze_final(&mut self, p: Lit) -> Vec<Lit> {
        let mut core = vec![p];
        if self.decision_level() == 0 {
            return core;
        }
        self.seen[p.var().index()] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let l = self.trail[i];
            let v = l.var().index();
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => {
                    if self.level[v] > 0 {
                        core.push(l);
                    }
                }
                Some(c) => {
                    for k in 1..self.clauses[c as usize].lits.len() {
                        let q = self.clauses[c as usize].lits[k];
                        if self.level[q.var().index()] > 0 {
                            self.seen[q.var().index()] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[p.var().index()] = false;
        core
    }

    fn pick_branch_var(&self) -> Option<Var> {
        let mut best: Option<usize> = None;
        for v in 0..self.assigns.len() {
            if self.assigns[v].is_none() {
                match best {
                    Some(b) if self.activity[v] <= self.activity[b] => {}
                    _ => best = Some(v),
                }
            }
        }
        best.map(|v| Var(v as u32))
    }

    /// Decides satisfiability under the given assumptions. Learnt clauses
    /// are retained across calls, so incremental solving under changing
    /// assumptions reuses earlier work.
    pub fn solve(&mut self, assumptions: &[Lit]) -> SatVerdict {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return SatVerdict::Unsat(Vec::new());
        }
        let verdict = self.search(assumptions);
        self.cancel_until(0);
        if let SatVerdict::Sat(model) = &verdict {
            self.assert_model_satisfies_clauses(model);
        }
        verdict
    }

    fn search(&mut self, assumptions: &[Lit]) -> SatVerdict {
        let mut conflicts_since_restart: u64 = 0;
        let mut restart_seq: u64 = 0;
        let mut restart_limit = luby(restart_seq) * RESTART_BASE;

        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return SatVerdict::Unsat(Vec::new());
                }
                let (learnt, backtrack) = self.analyze(confl);
                self.cancel_until(backtrack);
                if learnt.len() == 1 {
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let idx = self.attach_clause(learnt, true);
                    self.stats.learned += 1;
                    self.enqueue(asserting, Some(idx));
                }
                self.decay_activity();
                continue;
            }

            if conflicts_since_restart >= restart_limit {
                conflicts_since_restart = 0;
                restart_seq += 1;
                restart_limit = luby(restart_seq) * RESTART_BASE;
                self.stats.restarts += 1;
                self.cancel_until(0);
                continue;
            }

            let mut deciding = true;
            while self.decision_level() < assumptions.len() {
                let a = assumptions[self.decision_level()];
                match self.value(a) {
                    Some(true) => self.new_decision_level(),
                    Some(false) => return SatVerdict::Unsat(self.analyze_final(a)),
                    None => {
                        self.new_decision_level();
                        self.enqueue(a, None);
                        deciding = false;
                        break;
                    }
                }
            }
            if !deciding {
                continue;
            }

            match self.pick_branch_var() {
                None => {
                    let values = self.assigns.iter().map(|v| v.unwrap_or(false)).collect();
                    return SatVerdict::Sat(Model { values });
                }
                Some(v) => {
                    self.stats.decisions += 1;
                    self.new_decision_level();
                    self.enqueue(Lit::new(v, self.phase[v.index()]), None);
                }
            }
        }
    }

    fn assert_model_satisfies_clauses(&self, model: &Model) {
        for clause in &self.clauses {
            if clause.learnt {
                continue;
            }
            assert!(
                clause.lits.iter().any(|&l| model.lit_value(l)),
                "satisfying assignment violates a stored clause"
            );
        }
    }

    /// Level-zero simplification: removes clauses satisfied at level zero
    /// and strips falsified literals from the rest. The verdict of every
    /// later `solve` is unchanged.
    pub fn simplify(&mut self) {
        debug_assert_eq!(self.decision_level(), 0);
        if !self.ok {
            return;
        }
        if self.propagate().is_some() {
            self.ok = false;
            return;
        }
        let old = std::mem::take(&mut self.clauses);
        for w in &mut self.watches {
            w.clear();
        }
        for clause in old {
            let mut lits = Vec::with_capacity(clause.lits.len());
            let mut satisfied = false;
            for &l in &clause.lits {
                match self.value(l) {
                    Some(true) => {
                        satisfied = true;
                        break;
                    }
                    Some(false) => {}
                    None => lits.push(l),
                }
            }
            if satisfied {
                continue;
            }
            match lits.len() {
                0 => {
                    self.ok = false;
                    return;
                }
                1 => {
                    if self.value(lits[0]).is_none() {
                        self.enqueue(lits[0], None);
                    }
                }
                _ => {
                    self.attach_clause(lits, clause.learnt);
                }
            }
        }
        if self.propagate().is_some() {
            self.ok = false;
        }
    }

    /// The current database as DIMACS-style clauses: level-zero units
    /// first, then the stored problem clauses. Learnt clauses are omitted.
    pub fn to_cnf_instance(&self) -> CnfInstance {
        let mut clauses = Vec::new();
        let bound = self
            .trail_lim
            .first()
            .copied()
            .unwrap_or(self.trail.len());
        for &l in &self.trail[..bound] {
            clauses.push(vec![l.to_dimacs()]);
        }
        for clause in &self.clauses {
            if !clause.learnt {
                clauses.push(clause.lits.iter().map(|l| l.to_dimacs()).collect());
            }
        }
        CnfInstance {
            num_vars: self.num_vars(),
            clauses,
        }
    }

    /// Literal for a 1-based DIMACS integer, allocating variables up to
    /// its magnitude as needed.
    pub fn lit_from_dimacs(&mut self, lit: i32) -> Lit {
        assert!(lit != 0, "DIMACS literal must be non-zero");
        let var_index = lit.unsigned_abs() as usize - 1;
        while self.num_vars() <= var_index {
            self.new_var();
        }
        Lit::new(Var(var_index as u32), lit > 0)
    }
}

fn luby(x: u64) -> u64 {
    let mut size: u64 = 1;
    let mut seq: u32 = 0;
    while size < x + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    let mut x = x;
    while size - 1 != x {
        size = (size - 1) / 2;
        seq -= 1;
        x %= size;
    }
    1u64 << seq
}
