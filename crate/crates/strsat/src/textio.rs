//! Text formats: the `.strf` constraint language, DIMACS CNF, and model
//! listings.
//!
//! A `.strf` document is a sequence of s-expression statements:
//!
//! ```text
//! (set-alphabet "ab")        ; at most once, before declarations
//! (set-max-len 3)            ; at most once, before declarations
//! (declare-str s 1)          ; bound optional, defaults to the max length
//! (assert (not (= s "")))
//! (check-sat)
//! (get-model)
//! ```
//!
//! `;` starts a comment running to the end of the line. Without the
//! directives the alphabet defaults to `"ab"` and the max length to 8.
//! Every parse error carries the 1-based line it was found on.

use std::fmt;

use thiserror::Error;

use crate::ast::{
    normalize, Alphabet, Assignment, AstError, Atom, BoolExpr, Formula, SolverConfig, StrTerm,
};

/// Alphabet assumed when a document has no `set-alphabet`.
pub const DEFAULT_ALPHABET: &str = "ab";
/// Max length assumed when a document has no `set-max-len`.
pub const DEFAULT_MAX_LEN: usize = 8;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct StrfError {
    pub line: usize,
    pub kind: StrfErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StrfErrorKind {
    #[error("unexpected end of input")]
    UnexpectedEof,
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unterminated string literal")]
    UnterminatedString,
    #[error("malformed number {0:?}")]
    BadNumber(String),
    #[error("unknown statement {0:?}")]
    UnknownStatement(String),
    #[error("duplicate directive {0}")]
    DuplicateDirective(String),
    #[error("directive {0} must precede all declarations and asserts")]
    DirectiveTooLate(String),
    #[error("variable {0:?} redeclared")]
    Redeclared(String),
    #[error("invalid variable name {0:?}")]
    BadVarName(String),
    #[error("undeclared variable {0:?}")]
    UndeclaredVariable(String),
    #[error("character {0:?} outside the alphabet")]
    CharOutsideAlphabet(char),
    #[error("contains-at position must be at least 1")]
    ContainsAtZero,
    #[error("extract indices must satisfy 1 <= i <= j, got [{0}:{1}]")]
    BadExtract(usize, usize),
    #[error(transparent)]
    Ast(AstError),
}

fn err<T>(line: usize, kind: StrfErrorKind) -> Result<T, StrfError> {
    Err(StrfError { line, kind })
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    LParen,
    RParen,
    Word(String),
    Str(String),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::LParen => write!(f, "'('"),
            Token::RParen => write!(f, "')'"),
            Token::Word(w) => write!(f, "{w:?}"),
            Token::Str(s) => write!(f, "\"{s}\""),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, StrfError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            '\n' => {
                line += 1;
                chars.next();
            }
            _ if c.is_whitespace() => {
                chars.next();
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                }
            }
            '(' => {
                out.push((Token::LParen, line));
                chars.next();
            }
            ')' => {
                out.push((Token::RParen, line));
                chars.next();
            }
            '"' => {
                chars.next();
                let mut s = String::new();
                loop {
                    match chars.next() {
                        None | Some('\n') => {
                            return err(line, StrfErrorKind::UnterminatedString)
                        }
                        Some('"') => break,
                        Some(c) => s.push(c),
                    }
                }
                out.push((Token::Str(s), line));
            }
            _ => {
                let mut w = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';') {
                        break;
                    }
                    w.push(c);
                    chars.next();
                }
                out.push((Token::Word(w), line));
            }
        }
    }
    Ok(out)
}

/// One `declare-str` statement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrfDecl {
    pub name: String,
    /// Explicit bound, if one was written.
    pub bound: Option<usize>,
    pub line: usize,
}

/// Parsed `.strf` document before formula normalization. Retains enough
/// surface structure for the CLI: declaration order, which directives were
/// explicit, and whether `check-sat`/`get-model` were requested.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrfDocument {
    pub alphabet: Alphabet,
    pub max_len: usize,
    pub alphabet_explicit: bool,
    pub max_len_explicit: bool,
    pub decls: Vec<StrfDecl>,
    pub asserts: Vec<(BoolExpr, usize)>,
    pub check_sat: bool,
    pub get_model: bool,
}

impl StrfDocument {
    /// Builds the solver configuration, optionally overriding the max
    /// length. Explicit per-variable bounds above the effective max are
    /// rejected with the declaration's line.
    pub fn build_config(&self, max_len_override: Option<usize>) -> Result<SolverConfig, StrfError> {
        let l_max = max_len_override.unwrap_or(self.max_len);
        let mut cfg = SolverConfig::new(self.alphabet.clone(), l_max);
        for decl in &self.decls {
            let bound = decl.bound.unwrap_or(l_max);
            cfg.set_var_bound(&decl.name, bound)
                .map_err(|e| StrfError {
                    line: decl.line,
                    kind: StrfErrorKind::Ast(e),
                })?;
        }
        Ok(cfg)
    }

    /// Conjoins and normalizes all asserts. Normalization failures are
    /// reported on the offending assert's line.
    pub fn build_formula(&self) -> Result<Formula, StrfError> {
        let mut literals = Vec::new();
        for (expr, line) in &self.asserts {
            match normalize(expr).map_err(|e| StrfError {
                line: *line,
                kind: StrfErrorKind::Ast(e),
            })? {
                Formula::Const(false) => return Ok(Formula::Const(false)),
                Formula::Const(true) => {}
                Formula::Conj(lits) => literals.extend(lits),
            }
        }
        Ok(Formula::from_literals(literals))
    }

    pub fn declared_names(&self) -> Vec<String> {
        self.decls.iter().map(|d| d.name.clone()).collect()
    }
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    last_line: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<(Token, usize), StrfError> {
        match self.tokens.get(self.pos) {
            Some((tok, line)) => {
                self.pos += 1;
                self.last_line = *line;
                Ok((tok.clone(), *line))
            }
            None => err(self.last_line, StrfErrorKind::UnexpectedEof),
        }
    }

    fn expect_lparen(&mut self) -> Result<usize, StrfError> {
        match self.next()? {
            (Token::LParen, line) => Ok(line),
            (tok, line) => err(
                line,
                StrfErrorKind::Unexpected {
                    expected: "'('".to_string(),
                    found: tok.to_string(),
                },
            ),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), StrfError> {
        match self.next()? {
            (Token::RParen, _) => Ok(()),
            (tok, line) => err(
                line,
                StrfErrorKind::Unexpected {
                    expected: "')'".to_string(),
                    found: tok.to_string(),
                },
            ),
        }
    }

    fn expect_word(&mut self) -> Result<(String, usize), StrfError> {
        match self.next()? {
            (Token::Word(w), line) => Ok((w, line)),
            (tok, line) => err(
                line,
                StrfErrorKind::Unexpected {
                    expected: "a symbol".to_string(),
                    found: tok.to_string(),
                },
            ),
        }
    }

    fn expect_nat(&mut self) -> Result<(usize, usize), StrfError> {
        let (word, line) = self.expect_word()?;
        match word.parse::<usize>() {
            Ok(n) if word.chars().all(|c| c.is_ascii_digit()) => Ok((n, line)),
            _ => err(line, StrfErrorKind::BadNumber(word)),
        }
    }

    fn expect_string(&mut self) -> Result<(String, usize), StrfError> {
        match self.next()? {
            (Token::Str(s), line) => Ok((s, line)),
            (tok, line) => err(
                line,
                StrfErrorKind::Unexpected {
                    expected: "a string literal".to_string(),
                    found: tok.to_string(),
                },
            ),
        }
    }
}

fn is_valid_var_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

struct DocBuilder {
    alphabet: Option<Alphabet>,
    max_len: Option<usize>,
    decls: Vec<StrfDecl>,
    asserts: Vec<(BoolExpr, usize)>,
    check_sat: bool,
    get_model: bool,
}

impl DocBuilder {
    fn alphabet_now(&self) -> Alphabet {
        self.alphabet
            .clone()
            .unwrap_or_else(|| Alphabet::from_str_chars(DEFAULT_ALPHABET).expect("default"))
    }

    fn body_started(&self) -> bool {
        !self.decls.is_empty() || !self.asserts.is_empty()
    }

    fn is_declared(&self, name: &str) -> bool {
        self.decls.iter().any(|d| d.name == name)
    }
}

fn parse_term(p: &mut Parser, doc: &DocBuilder) -> Result<StrTerm, StrfError> {
    match p.next()? {
        (Token::Word(w), line) => {
            if !doc.is_declared(&w) {
                return err(line, StrfErrorKind::UndeclaredVariable(w));
            }
            Ok(StrTerm::Var(w))
        }
        (Token::Str(s), line) => {
            let alphabet = doc.alphabet_now();
            if let Some(c) = s.chars().find(|&c| !alphabet.contains(c)) {
                return err(line, StrfErrorKind::CharOutsideAlphabet(c));
            }
            Ok(StrTerm::Const(s))
        }
        (Token::LParen, line) => {
            let (op, op_line) = p.expect_word()?;
            let term = match op.as_str() {
                "concat" => {
                    let a = parse_term(p, doc)?;
                    let b = parse_term(p, doc)?;
                    StrTerm::concat(a, b)
                }
                "extract" => {
                    let t = parse_term(p, doc)?;
                    let (i, _) = p.expect_nat()?;
                    let (j, j_line) = p.expect_nat()?;
                    StrTerm::extract(t, i, j)
                        .map_err(|_| StrfError {
                            line: j_line,
                            kind: StrfErrorKind::BadExtract(i, j),
                        })?
                }
                other => {
                    return err(
                        op_line,
                        StrfErrorKind::Unexpected {
                            expected: "concat or extract".to_string(),
                            found: format!("{other:?}"),
                        },
                    )
                }
            };
            p.expect_rparen()?;
            let _ = line;
            Ok(term)
        }
        (tok, line) => err(
            line,
            StrfErrorKind::Unexpected {
                expected: "a term".to_string(),
                found: tok.to_string(),
            },
        ),
    }
}

fn parse_bexpr(p: &mut Parser, doc: &DocBuilder) -> Result<BoolExpr, StrfError> {
    match p.next()? {
        (Token::Word(w), line) => match w.as_str() {
            "true" => Ok(BoolExpr::True),
            "false" => Ok(BoolExpr::False),
            other => err(
                line,
                StrfErrorKind::Unexpected {
                    expected: "a boolean expression".to_string(),
                    found: format!("{other:?}"),
                },
            ),
        },
        (Token::LParen, _) => {
            let (op, op_line) = p.expect_word()?;
            let expr = match op.as_str() {
                "not" => BoolExpr::not(parse_bexpr(p, doc)?),
                "and" => {
                    let mut parts = vec![parse_bexpr(p, doc)?, parse_bexpr(p, doc)?];
                    while !matches!(p.peek(), Some((Token::RParen, _))) {
                        parts.push(parse_bexpr(p, doc)?);
                    }
                    BoolExpr::conjoin(parts)
                }
                "=" => {
                    let a = parse_term(p, doc)?;
                    let b = parse_term(p, doc)?;
                    BoolExpr::Atom(Atom::Eq(a, b))
                }
                "contains" => {
                    let a = parse_term(p, doc)?;
                    let b = parse_term(p, doc)?;
                    BoolExpr::Atom(Atom::Contains(a, b))
                }
                "contains-at" => {
                    let a = parse_term(p, doc)?;
                    let (i, i_line) = p.expect_nat()?;
                    let b = parse_term(p, doc)?;
                    let atom = Atom::contains_at(a, i, b).map_err(|_| StrfError {
                        line: i_line,
                        kind: StrfErrorKind::ContainsAtZero,
                    })?;
                    BoolExpr::Atom(atom)
                }
                other => {
                    return err(
                        op_line,
                        StrfErrorKind::Unexpected {
                            expected: "not, and, =, contains, or contains-at".to_string(),
                            found: format!("{other:?}"),
                        },
                    )
                }
            };
            p.expect_rparen()?;
            Ok(expr)
        }
        (tok, line) => err(
            line,
            StrfErrorKind::Unexpected {
                expected: "a boolean expression".to_string(),
                found: tok.to_string(),
            },
        ),
    }
}

/// Parses a `.strf` document and returns it together with the normalized
/// formula and the solver configuration it induces.
pub fn parse_strf(text: &str) -> Result<(StrfDocument, Formula, SolverConfig), StrfError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        last_line: 1,
    };
    let mut doc = DocBuilder {
        alphabet: None,
        max_len: None,
        decls: Vec::new(),
        asserts: Vec::new(),
        check_sat: false,
        get_model: false,
    };

    while p.peek().is_some() {
        p.expect_lparen()?;
        let (stmt, line) = p.expect_word()?;
        match stmt.as_str() {
            "set-alphabet" => {
                if doc.alphabet.is_some() {
                    return err(line, StrfErrorKind::DuplicateDirective(stmt));
                }
                if doc.body_started() {
                    return err(line, StrfErrorKind::DirectiveTooLate(stmt));
                }
                let (chars, chars_line) = p.expect_string()?;
                let alphabet = Alphabet::from_str_chars(&chars).map_err(|e| StrfError {
                    line: chars_line,
                    kind: StrfErrorKind::Ast(e),
                })?;
                doc.alphabet = Some(alphabet);
            }
            "set-max-len" => {
                if doc.max_len.is_some() {
                    return err(line, StrfErrorKind::DuplicateDirective(stmt));
                }
                if doc.body_started() {
                    return err(line, StrfErrorKind::DirectiveTooLate(stmt));
                }
                let (n, _) = p.expect_nat()?;
                doc.max_len = Some(n);
            }
            "declare-str" => {
                let (name, name_line) = p.expect_word()?;
                if !is_valid_var_name(&name) {
                    return err(name_line, StrfErrorKind::BadVarName(name));
                }
                if doc.is_declared(&name) {
                    return err(name_line, StrfErrorKind::Redeclared(name));
                }
                let bound = if matches!(p.peek(), Some((Token::RParen, _))) {
                    None
                } else {
                    Some(p.expect_nat()?.0)
                };
                doc.decls.push(StrfDecl {
                    name,
                    bound,
                    line: name_line,
                });
            }
            "assert" => {
                let expr = parse_bexpr(&mut p, &doc)?;
                doc.asserts.push((expr, line));
            }
            "check-sat" => doc.check_sat = true,
            "get-model" => doc.get_model = true,
            other => return err(line, StrfErrorKind::UnknownStatement(other.to_string())),
        }
        p.expect_rparen()?;
    }

    let document = StrfDocument {
        alphabet: doc.alphabet_now(),
        max_len: doc.max_len.unwrap_or(DEFAULT_MAX_LEN),
        alphabet_explicit: doc.alphabet.is_some(),
        max_len_explicit: doc.max_len.is_some(),
        decls: doc.decls,
        asserts: doc.asserts,
        check_sat: doc.check_sat,
        get_model: doc.get_model,
    };
    let config = document.build_config(None)?;
    let formula = document.build_formula()?;
    Ok((document, formula, config))
}

/// Prints a formula and configuration as a parseable `.strf` document.
/// Declarations cover the formula's variables in first-occurrence order,
/// then any other configured variables in name order; every declaration
/// carries its bound explicitly so the document round-trips exactly.
pub fn print_strf(f: &Formula, cfg: &SolverConfig) -> String {
    let mut out = String::new();
    out.push_str(&format!("(set-alphabet \"{}\")\n", cfg.alphabet.as_string()));
    out.push_str(&format!("(set-max-len {})\n", cfg.l_max));
    let mut declared = Vec::new();
    for var in f.variables() {
        declared.push(var);
    }
    for (var, _) in cfg.declared_bounds() {
        if !declared.iter().any(|v| v == var) {
            declared.push(var.to_string());
        }
    }
    for var in &declared {
        out.push_str(&format!("(declare-str {var} {})\n", cfg.bound_of(var)));
    }
    match f {
        Formula::Const(true) => {}
        Formula::Const(false) => out.push_str("(assert false)\n"),
        Formula::Conj(lits) => {
            for lit in lits {
                out.push_str(&format!("(assert {lit})\n"));
            }
        }
    }
    out
}

/// Renders an assignment as `(define-str <name> "<value>")` lines, one
/// per variable, in the assignment's own order.
pub fn write_model(a: &Assignment) -> String {
    let mut out = String::new();
    for (name, value) in a.iter() {
        out.push_str(&format!("(define-str {name} \"{value}\")\n"));
    }
    out
}

/// Parses the output of [`write_model`].
pub fn parse_model(text: &str) -> Result<Assignment, StrfError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        last_line: 1,
    };
    let mut a = Assignment::new();
    while p.peek().is_some() {
        p.expect_lparen()?;
        let (stmt, line) = p.expect_word()?;
        if stmt != "define-str" {
            return err(line, StrfErrorKind::UnknownStatement(stmt));
        }
        let (name, _) = p.expect_word()?;
        let (value, _) = p.expect_string()?;
        a.set(name, value);
        p.expect_rparen()?;
    }
    Ok(a)
}

/// CNF formula in DIMACS conventions: variables are `1..=num_vars` and a
/// literal is a non-zero integer whose sign is its polarity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CnfInstance {
    pub num_vars: usize,
    pub clauses: Vec<Vec<i32>>,
}

impl CnfInstance {
    /// Is every clause exactly three literals wide? Repeated literals are
    /// allowed, so unit clauses can be written `x x x`.
    pub fn is_three_cnf(&self) -> bool {
        self.clauses.iter().all(|c| c.len() == 3)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("line {0}: missing or misplaced 'p cnf' header")]
    MissingHeader(usize),
    #[error("line {0}: malformed header")]
    BadHeader(usize),
    #[error("line {line}: literal {lit} out of range for {num_vars} variables")]
    LitOutOfRange {
        line: usize,
        lit: i64,
        num_vars: usize,
    },
    #[error("line {line}: unexpected token {token:?}")]
    BadToken { line: usize, token: String },
    #[error("final clause is not 0-terminated")]
    UnterminatedClause,
}

/// Parses DIMACS CNF text. Comment lines start with `c`; the `p cnf`
/// header must precede all clauses; clauses are 0-terminated and may span
/// lines. The clause count in the header is not enforced.
pub fn parse_dimacs(text: &str) -> Result<CnfInstance, DimacsError> {
    let mut num_vars: Option<usize> = None;
    let mut clauses: Vec<Vec<i32>> = Vec::new();
    let mut current: Vec<i32> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim();
        if line.is_empty() || line.starts_with('c') {
            continue;
        }
        if line.starts_with('p') {
            if num_vars.is_some() {
                return Err(DimacsError::BadHeader(line_no));
            }
            let mut parts = line.split_whitespace();
            let (p, kind) = (parts.next(), parts.next());
            let (n, m) = (parts.next(), parts.next());
            if p != Some("p") || kind != Some("cnf") || parts.next().is_some() {
                return Err(DimacsError::BadHeader(line_no));
            }
            let n: usize = n
                .and_then(|s| s.parse().ok())
                .ok_or(DimacsError::BadHeader(line_no))?;
            let _m: usize = m
                .and_then(|s| s.parse().ok())
                .ok_or(DimacsError::BadHeader(line_no))?;
            num_vars = Some(n);
            continue;
        }
        let Some(n) = num_vars else {
            return Err(DimacsError::MissingHeader(line_no));
        };
        for token in line.split_whitespace() {
            let lit: i64 = token.parse().map_err(|_| DimacsError::BadToken {
                line: line_no,
                token: token.to_string(),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if lit.unsigned_abs() > n as u64 {
                    return Err(DimacsError::LitOutOfRange {
                        line: line_no,
                        lit,
                        num_vars: n,
                    });
                }
                current.push(lit as i32);
            }
        }
    }
    if !current.is_empty() {
        return Err(DimacsError::UnterminatedClause);
    }
    match num_vars {
        Some(num_vars) => Ok(CnfInstance { num_vars, clauses }),
        None => Err(DimacsError::MissingHeader(text.lines().count().max(1))),
    }
}

/// Renders a CNF instance in DIMACS format.
pub fn write_dimacs(cnf: &CnfInstance) -> String {
    let mut out = format!("p cnf {} {}\n", cnf.num_vars, cnf.clauses.len());
    for clause in &cnf.clauses {
        for lit in clause {
            out.push_str(&format!("{lit} "));
        }
        out.push_str("0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::Literal;

    #[test]
    fn parses_the_full_statement_set() {
        let text = r#"
; containment at a fixed position
(set-alphabet "abmoy")
(set-max-len 6)
(declare-str s)
(declare-str t 3)
(assert (contains-at s 4 t))
(assert (not (= t "")))
(check-sat)
(get-model)
"#;
        let (doc, f, cfg) = parse_strf(text).unwrap();
        assert!(doc.check_sat && doc.get_model);
        assert!(doc.alphabet_explicit && doc.max_len_explicit);
        assert_eq!(doc.decls.len(), 2);
        assert_eq!(doc.decls[0].bound, None);
        assert_eq!(doc.decls[1].bound, Some(3));
        assert_eq!(cfg.l_max, 6);
        assert_eq!(cfg.bound_of("s"), 6);
        assert_eq!(cfg.bound_of("t"), 3);
        assert_eq!(
            f.literals(),
            &[
                Literal::pos(Atom::ContainsAt(StrTerm::var("s"), 4, StrTerm::var("t"))),
                Literal::neg(Atom::Eq(StrTerm::var("t"), StrTerm::constant(""))),
            ]
        );
    }

    #[test]
    fn defaults_apply_without_directives() {
        let (doc, f, cfg) = parse_strf("(declare-str s)(assert (= s s))").unwrap();
        assert_eq!(cfg.alphabet.as_string(), DEFAULT_ALPHABET);
        assert_eq!(cfg.l_max, DEFAULT_MAX_LEN);
        assert!(!doc.alphabet_explicit && !doc.max_len_explicit);
        assert!(!doc.check_sat);
        assert_eq!(f.literals().len(), 1);
    }

    #[test]
    fn empty_document_is_trivially_true() {
        let (_, f, _) = parse_strf("").unwrap();
        assert_eq!(f, Formula::Const(true));
    }

    fn kind_of(text: &str) -> (usize, StrfErrorKind) {
        let e = parse_strf(text).unwrap_err();
        (e.line, e.kind)
    }

    #[test]
    fn reports_undeclared_variables_with_lines() {
        let (line, kind) = kind_of("(declare-str s)\n(assert (= s t))");
        assert_eq!(line, 2);
        assert_eq!(kind, StrfErrorKind::UndeclaredVariable("t".to_string()));
    }

    #[test]
    fn reports_characters_outside_the_alphabet() {
        let (line, kind) = kind_of("(set-alphabet \"ab\")\n(declare-str s)\n(assert (= s \"xy\"))");
        assert_eq!(line, 3);
        assert_eq!(kind, StrfErrorKind::CharOutsideAlphabet('x'));
    }

    #[test]
    fn reports_contains_at_position_zero() {
        let (line, kind) = kind_of("(declare-str s)\n(assert (contains-at s 0 s))");
        assert_eq!(line, 2);
        assert_eq!(kind, StrfErrorKind::ContainsAtZero);
    }

    #[test]
    fn reports_bad_extract_indices() {
        let (_, kind) = kind_of("(declare-str s)\n(assert (= (extract s 0 1) s))");
        assert_eq!(kind, StrfErrorKind::BadExtract(0, 1));
        let (_, kind) = kind_of("(declare-str s)\n(assert (= (extract s 3 2) s))");
        assert_eq!(kind, StrfErrorKind::BadExtract(3, 2));
    }

    #[test]
    fn reports_duplicate_and_late_directives() {
        let (_, kind) = kind_of("(set-max-len 3)(set-max-len 4)");
        assert_eq!(
            kind,
            StrfErrorKind::DuplicateDirective("set-max-len".to_string())
        );
        let (_, kind) = kind_of("(declare-str s)(set-alphabet \"ab\")");
        assert_eq!(
            kind,
            StrfErrorKind::DirectiveTooLate("set-alphabet".to_string())
        );
        let (_, kind) = kind_of("(declare-str s)(declare-str s)");
        assert_eq!(kind, StrfErrorKind::Redeclared("s".to_string()));
    }

    #[test]
    fn rejects_bounds_above_the_max_length() {
        let e = parse_strf("(set-max-len 3)\n(declare-str s 4)").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(matches!(
            e.kind,
            StrfErrorKind::Ast(AstError::BoundAboveMax { .. })
        ));
    }

    #[test]
    fn surfaces_negated_conjunction_from_normalization() {
        let text = "(declare-str s)\n(assert (not (and (= s s) (= s s))))";
        let e = parse_strf(text).unwrap_err();
        assert_eq!(e.line, 2);
        assert_eq!(e.kind, StrfErrorKind::Ast(AstError::NegatedConjunction));
    }

    #[test]
    fn print_then_parse_round_trips() {
        let mut cfg = SolverConfig::new(Alphabet::from_str_chars("ab").unwrap(), 3);
        cfg.set_var_bound("s", 1).unwrap();
        cfg.set_var_bound("t", 3).unwrap();
        let f = Formula::from_literals(vec![
            Literal::pos(Atom::Contains(StrTerm::var("t"), StrTerm::var("s"))),
            Literal::neg(Atom::Eq(
                StrTerm::concat(StrTerm::var("s"), StrTerm::constant("b")),
                StrTerm::extract(StrTerm::var("t"), 1, 2).unwrap(),
            )),
        ]);
        let text = print_strf(&f, &cfg);
        let (_, f2, cfg2) = parse_strf(&text).unwrap();
        assert_eq!(f2, f);
        assert_eq!(cfg2.alphabet, cfg.alphabet);
        assert_eq!(cfg2.l_max, cfg.l_max);
        for var in ["s", "t"] {
            assert_eq!(cfg2.bound_of(var), cfg.bound_of(var));
        }
    }

    #[test]
    fn trivial_formulas_round_trip() {
        let cfg = SolverConfig::new(Alphabet::from_str_chars("ab").unwrap(), 2);
        let (_, f, _) = parse_strf(&print_strf(&Formula::Const(false), &cfg)).unwrap();
        assert_eq!(f, Formula::Const(false));
        let (_, f, _) = parse_strf(&print_strf(&Formula::Const(true), &cfg)).unwrap();
        assert_eq!(f, Formula::Const(true));
    }

    #[test]
    fn model_text_round_trips() {
        let a = Assignment::from_pairs([("s", "ab"), ("t", "")]);
        let text = write_model(&a);
        assert_eq!(text, "(define-str s \"ab\")\n(define-str t \"\")\n");
        assert_eq!(parse_model(&text).unwrap(), a);
    }

    #[test]
    fn dimacs_round_trips() {
        let text = "c example\np cnf 3 2\n1 -2 3 0\n-1 2 0\n";
        let cnf = parse_dimacs(text).unwrap();
        assert_eq!(cnf.num_vars, 3);
        assert_eq!(cnf.clauses, vec![vec![1, -2, 3], vec![-1, 2]]);
        assert!(!cnf.is_three_cnf());
        let again = parse_dimacs(&write_dimacs(&cnf)).unwrap();
        assert_eq!(again, cnf);
    }

    #[test]
    fn dimacs_clauses_may_span_lines() {
        let cnf = parse_dimacs("p cnf 2 1\n1\n-2\n0\n").unwrap();
        assert_eq!(cnf.clauses, vec![vec![1, -2]]);
    }

    #[test]
    fn dimacs_rejects_documented_errors() {
        assert_eq!(
            parse_dimacs("1 2 0\n").unwrap_err(),
            DimacsError::MissingHeader(1)
        );
        assert_eq!(
            parse_dimacs("p cnf 2 1\n1 3 0\n").unwrap_err(),
            DimacsError::LitOutOfRange {
                line: 2,
                lit: 3,
                num_vars: 2
            }
        );
        assert_eq!(
            parse_dimacs("p cnf 2 1\n1 2\n").unwrap_err(),
            DimacsError::UnterminatedClause
        );
        assert!(matches!(
            parse_dimacs("p cnf x 1\n").unwrap_err(),
            DimacsError::BadHeader(1)
        ));
    }
}
