//! Boolean formulas and their reduction to a leakage question.
//!
//! Deciding whether any single query of an interactive mechanism leaks is as
//! hard as SAT. The reduction: for a formula phi over variables `z1..zu`,
//! build the mechanism with secret bit x, one action per assignment b of the
//! variables, and output `x AND phi(b)`. Under the uniform prior on x, the
//! action for assignment b leaks (one full bit, for any reasonable measure)
//! exactly when `phi(b)` is true, and leaks nothing otherwise. So "does some
//! action leak?" decides satisfiability of phi.
//!
//! Formula syntax: variables `z1`, `z2`, ...; constants `true`/`false`;
//! negation `!`/`~`/`not`; conjunction `&`/`&&`/`and`; disjunction
//! `|`/`||`/`or`; parentheses. Precedence: negation, then conjunction, then
//! disjunction, all standard.

use std::collections::BTreeMap;

use crate::error::{QifError, Result};
use crate::mechanism::{ActionFile, Mechanism, MechanismFile};

/// Variable-count cap for the mechanism build: the action set has size
/// `2^u`, so this bounds the output at about a million actions.
pub const MAX_MECHANISM_VARIABLES: usize = 20;

/// A parsed boolean formula over variables `z1..zu`.
#[derive(Clone, Debug)]
pub struct BooleanFormula {
    text: String,
    vars: usize,
    ast: Node,
}

#[derive(Clone, Debug)]
enum Node {
    Const(bool),
    Var(usize),
    Not(Box<Node>),
    And(Box<Node>, Box<Node>),
    Or(Box<Node>, Box<Node>),
}

impl BooleanFormula {
    /// Parse formula text. The variable count is the highest index
    /// mentioned, so `z3 | z1` is a formula over `z1, z2, z3`.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut parser = Parser { tokens, pos: 0 };
        let ast = parser.or_expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(QifError::Parse(format!(
                "unexpected `{}` after end of formula",
                parser.tokens[parser.pos]
            )));
        }
        let mut vars = 0;
        max_var(&ast, &mut vars);
        Ok(Self {
            text: text.trim().to_string(),
            vars,
            ast,
        })
    }

    /// Original formula text, trimmed.
    pub fn text(&self) -> &str {
        &self.text
    }

    /// Number of variables, i.e. the highest `z` index mentioned.
    pub fn var_count(&self) -> usize {
        self.vars
    }

    /// Evaluate under an assignment; `assignment[i]` is the value of
    /// `z(i+1)`. Panics if the slice is shorter than `var_count`.
    pub fn eval(&self, assignment: &[bool]) -> bool {
        fn go(node: &Node, assignment: &[bool]) -> bool {
            match node {
                Node::Const(b) => *b,
                Node::Var(i) => assignment[*i],
                Node::Not(inner) => !go(inner, assignment),
                Node::And(l, r) => go(l, assignment) && go(r, assignment),
                Node::Or(l, r) => go(l, assignment) || go(r, assignment),
            }
        }
        assert!(assignment.len() >= self.vars, "assignment too short");
        go(&self.ast, assignment)
    }

    /// Reference satisfiability decision by trying all `2^u` assignments.
    ///
    /// This is the independent baseline the tests compare the leakage-based
    /// decision against; it is exponential by design and capped accordingly.
    pub fn is_satisfiable_brute_force(&self) -> Result<bool> {
        if self.vars > 26 {
            return Err(QifError::TooManyVariables {
                got: self.vars,
                limit: 26,
            });
        }
        let mut assignment = vec![false; self.vars];
        for code in 0u64..(1 << self.vars) {
            for (i, slot) in assignment.iter_mut().enumerate() {
                *slot = code >> (self.vars - 1 - i) & 1 == 1;
            }
            if self.eval(&assignment) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Build the mechanism whose single-action leakage decides
    /// satisfiability of this formula.
    ///
    /// Secrets and observations are the bit `x` in `{0, 1}`; each assignment
    /// `b` of the variables becomes one deterministic action named by its
    /// bit string (`z1` first), outputting `x AND phi(b)`. With no variables
    /// the single action is named by the empty string.
    pub fn to_mechanism(&self) -> Result<Mechanism> {
        if self.vars > MAX_MECHANISM_VARIABLES {
            return Err(QifError::TooManyVariables {
                got: self.vars,
                limit: MAX_MECHANISM_VARIABLES,
            });
        }
        let mut assignment = vec![false; self.vars];
        let mut actions = Vec::with_capacity(1 << self.vars);
        for code in 0u64..(1 << self.vars) {
            let mut name = String::with_capacity(self.vars);
            for (i, slot) in assignment.iter_mut().enumerate() {
                *slot = code >> (self.vars - 1 - i) & 1 == 1;
                name.push(if *slot { '1' } else { '0' });
            }
            let out_when_one = if self.eval(&assignment) { 1 } else { 0 };
            // Row for x = 0 always observes 0; row for x = 1 observes phi(b).
            let mut matrix = vec![vec![1.0, 0.0], vec![0.0; 2]];
            matrix[1][out_when_one] = 1.0;
            actions.push(ActionFile { name, matrix });
        }
        Mechanism::from_file(MechanismFile {
            secrets: vec!["0".to_string(), "1".to_string()],
            observations: vec!["0".to_string(), "1".to_string()],
            actions,
            prior: None,
            secret_values: None,
        })
    }
}

fn max_var(node: &Node, vars: &mut usize) {
    match node {
        Node::Const(_) => {}
        Node::Var(i) => *vars = (*vars).max(i + 1),
        Node::Not(inner) => max_var(inner, vars),
        Node::And(l, r) | Node::Or(l, r) => {
            max_var(l, vars);
            max_var(r, vars);
        }
    }
}

// --------------------------------------------------------------------------
// Lexer and recursive-descent parser
// --------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Var(usize),
    Const(bool),
    Not,
    And,
    Or,
    Open,
    Close,
}

impl std::fmt::Display for Token {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Token::Var(i) => write!(f, "z{}", i + 1),
            Token::Const(b) => write!(f, "{b}"),
            Token::Not => f.write_str("!"),
            Token::And => f.write_str("&"),
            Token::Or => f.write_str("|"),
            Token::Open => f.write_str("("),
            Token::Close => f.write_str(")"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                tokens.push(Token::Open);
                i += 1;
            }
            ')' => {
                tokens.push(Token::Close);
                i += 1;
            }
            '!' | '~' => {
                tokens.push(Token::Not);
                i += 1;
            }
            '&' => {
                tokens.push(Token::And);
                i += if chars.get(i + 1) == Some(&'&') { 2 } else { 1 };
            }
            '|' => {
                tokens.push(Token::Or);
                i += if chars.get(i + 1) == Some(&'|') { 2 } else { 1 };
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                tokens.push(keyword(&word)?);
            }
            other => {
                return Err(QifError::Parse(format!(
                    "unexpected character `{other}` in formula"
                )))
            }
        }
    }
    Ok(tokens)
}

fn keyword(word: &str) -> Result<Token> {
    match word {
        "and" | "AND" => return Ok(Token::And),
        "or" | "OR" => return Ok(Token::Or),
        "not" | "NOT" => return Ok(Token::Not),
        "true" | "TRUE" => return Ok(Token::Const(true)),
        "false" | "FALSE" => return Ok(Token::Const(false)),
        _ => {}
    }
    if let Some(digits) = word.strip_prefix('z') {
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            let index: usize = digits
                .parse()
                .map_err(|_| QifError::Parse(format!("variable index `{digits}` too large")))?;
            if index == 0 {
                return Err(QifError::Parse("variables are numbered from z1".to_string()));
            }
            return Ok(Token::Var(index - 1));
        }
    }
    Err(QifError::Parse(format!("unknown word `{word}` in formula")))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn or_expr(&mut self) -> Result<Node> {
        let mut node = self.and_expr()?;
        while self.eat(&Token::Or) {
            node = Node::Or(Box::new(node), Box::new(self.and_expr()?));
        }
        Ok(node)
    }

    fn and_expr(&mut self) -> Result<Node> {
        let mut node = self.unary()?;
        while self.eat(&Token::And) {
            node = Node::And(Box::new(node), Box::new(self.unary()?));
        }
        Ok(node)
    }

    fn unary(&mut self) -> Result<Node> {
        if self.eat(&Token::Not) {
            return Ok(Node::Not(Box::new(self.unary()?)));
        }
        match self.next()? {
            Token::Var(i) => Ok(Node::Var(i)),
            Token::Const(b) => Ok(Node::Const(b)),
            Token::Open => {
                let node = self.or_expr()?;
                if !self.eat(&Token::Close) {
                    return Err(QifError::Parse("missing `)`".to_string()));
                }
                Ok(node)
            }
            other => Err(QifError::Parse(format!("unexpected `{other}` in formula"))),
        }
    }

    fn next(&mut self) -> Result<Token> {
        let token = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or_else(|| QifError::Parse("formula ended unexpectedly".to_string()))?;
        self.pos += 1;
        Ok(token)
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.tokens.get(self.pos) == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }
}

/// Truth table of a formula as a map from action name (assignment bit
/// string) to formula value; handy for cross-checking the mechanism.
pub fn truth_table(formula: &BooleanFormula) -> BTreeMap<String, bool> {
    let vars = formula.var_count();
    let mut assignment = vec![false; vars];
    let mut table = BTreeMap::new();
    for code in 0u64..(1 << vars) {
        let mut name = String::with_capacity(vars);
        for (i, slot) in assignment.iter_mut().enumerate() {
            *slot = code >> (vars - 1 - i) & 1 == 1;
            name.push(if *slot { '1' } else { '0' });
        }
        table.insert(name, formula.eval(&assignment));
    }
    table
}
