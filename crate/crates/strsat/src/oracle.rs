//! Brute-force reference solver. Enumerates every assignment of strings
//! to the formula's variables within their bounds and evaluates each one,
//! so its verdicts are trusted in differential tests against the real
//! solver.

use crate::ast::{Assignment, Formula, SolverConfig};
use crate::eval::eval_formula;

/// Verdict of an enumeration run. `BudgetExceeded` means the assignment
/// space was too large to even start.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleVerdict {
    Sat(Assignment),
    Unsat,
    BudgetExceeded,
}

impl OracleVerdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, OracleVerdict::Sat(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleResult {
    pub verdict: OracleVerdict,
    /// Number of assignments actually evaluated.
    pub models_checked: u64,
    /// Total number of satisfying assignments; only present when counting
    /// was requested.
    pub model_count: Option<u64>,
}

/// All strings over the alphabet with length at most `bound`, shortest
/// first and in code order within each length.
pub fn domain(cfg: &SolverConfig, bound: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..bound {
        let mut next = Vec::new();
        for s in &layer {
            for c in cfg.alphabet.iter() {
                let mut t = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Number of strings with length at most `bound`, i.e. the geometric sum
/// over lengths `0..=bound`.
pub fn domain_size(alphabet_len: usize, bound: usize) -> u128 {
    let mut total: u128 = 0;
    let mut layer: u128 = 1;
    for _ in 0..=bound {
        total += layer;
        layer = layer.saturating_mul(alphabet_len as u128);
    }
    total
}

/// Exhaustively decides `f`. The enumeration order is the odometer over
/// per-variable domains (variables in first-occurrence order, the last
/// variable cycling fastest), which makes the first reported model stable.
/// With `count_all`, the sweep continues past the first model and reports
/// the total; the returned model is still the first one found.
pub fn enumerate_sat(f: &Formula, cfg: &SolverConfig, count_all: bool) -> OracleResult {
    let vars = f.variables();
    let domains: Vec<Vec<String>> = vars
        .iter()
        .map(|v| domain(cfg, cfg.bound_of(v)))
        .collect();

    let space: u128 = domains.iter().map(|d| d.len() as u128).product();
    if space > cfg.oracle_budget as u128 {
        return OracleResult {
            verdict: OracleVerdict::BudgetExceeded,
            models_checked: 0,
            model_count: None,
        };
    }

    let mut indices = vec![0usize; vars.len()];
    let mut checked: u64 = 0;
    let mut count: u64 = 0;
    let mut first: Option<Assignment> = None;
    'outer: loop {
        let mut a = Assignment::new();
        for (var, (domain, &idx)) in vars.iter().zip(domains.iter().zip(indices.iter())) {
            a.set(var.clone(), domain[idx].clone());
        }
        checked += 1;
        if eval_formula(f, &a, cfg) {
            count += 1;
            if first.is_none() {
                first = Some(a);
            }
            if !count_all {
                break;
            }
        }
        // Advance the odometer, last variable fastest.
        for pos in (0..vars.len()).rev() {
            indices[pos] += 1;
            if indices[pos] < domains[pos].len() {
                continue 'outer;
            }
            indices[pos] = 0;
        }
        break;
    }

    OracleResult {
        verdict: match first {
            Some(model) => OracleVerdict::Sat(model),
            None => OracleVerdict::Unsat,
        },
        models_checked: checked,
        model_count: if count_all { Some(count) } else { None },
    }
}
