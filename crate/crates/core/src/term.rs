//! Terms of the absolutely free algebra over a finite variable basis,
//! with substitution (endomorphism application), one-way matching, and
//! deterministic bounded enumeration.
//!
//! Terms refer to operation symbols by index into a fixed `Signature`.
//! Depth convention: variables have depth 0, and so do nullary applications;
//! otherwise depth is 1 + the maximum argument depth.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::signature::Signature;

/// Default ceiling on the number of terms an enumeration may produce.
pub const DEFAULT_TERM_CAP: usize = 100_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("term enumeration exceeded cap of {0} terms")]
    CapExceeded(usize),
    #[error("symbol index {op} out of range ({len} symbols)")]
    UnknownSymbol { op: usize, len: usize },
    #[error("symbol {symbol} expects {expected} arguments, found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token `{0}`")]
    UnexpectedToken(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("symbol `{symbol}` expects {expected} arguments, found {found}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("invalid variable `{0}`")]
    InvalidVariable(String),
    #[error("trailing input after term: `{0}`")]
    TrailingInput(String),
}

/// Size of the variable basis `x0 .. x{m-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Basis(usize);

impl Basis {
    pub fn new(size: usize) -> Basis {
        Basis(size)
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn vars(self) -> impl Iterator<Item = usize> {
        0..self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(usize),
    App(usize, Vec<Term>),
}

impl Term {
    pub fn var(v: usize) -> Term {
        Term::Var(v)
    }

    pub fn app(op: usize, args: Vec<Term>) -> Term {
        Term::App(op, args)
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    /// Head symbol index, if the term is an application.
    pub fn head(&self) -> Option<usize> {
        match self {
            Term::Var(_) => None,
            Term::App(op, _) => Some(*op),
        }
    }

    /// The set of variables occurring in the term.
    pub fn vars(&self) -> BTreeSet<usize> {
        fn collect(t: &Term, out: &mut BTreeSet<usize>) {
            match t {
                Term::Var(v) => {
                    out.insert(*v);
                }
                Term::App(_, args) => args.iter().for_each(|a| collect(a, out)),
            }
        }
        let mut out = BTreeSet::new();
        collect(self, &mut out);
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(_, args) => args.iter().map(Term::depth).max().map_or(0, |d| d + 1),
        }
    }

    /// Checks that every symbol index exists in `sig` and is applied at its
    /// declared arity.
    pub fn validate(&self, sig: &Signature) -> Result<(), TermError> {
        match self {
            Term::Var(_) => Ok(()),
            Term::App(op, args) => {
                if *op >= sig.len() {
                    return Err(TermError::UnknownSymbol { op: *op, len: sig.len() });
                }
                if args.len() != sig.arity(*op) {
                    return Err(TermError::ArityMismatch {
                        symbol: sig.name(*op).to_string(),
                        expected: sig.arity(*op),
                        found: args.len(),
                    });
                }
                args.iter().try_for_each(|a| a.validate(sig))
            }
        }
    }

    /// Renders the term in the parenthesized prefix syntax, resolving symbol
    /// names through `sig`. Inverse of [`Term::parse`] on every valid term.
    pub fn display<'a>(&'a self, sig: &'a Signature) -> TermDisplay<'a> {
        TermDisplay { term: self, sig }
    }

    /// Parses the prefix syntax: `(f x0 (g c))`, variables `x<i>`, nullary
    /// symbols bare. Atoms matching `x<digits>` always read as variables, so
    /// symbols with such names are unreachable from text.
    pub fn parse(input: &str, sig: &Signature) -> Result<Term, ParseError> {
        let tokens = tokenize(input);
        let mut pos = 0;
        let term = parse_expr(&tokens, &mut pos, sig)?;
        if pos != tokens.len() {
            return Err(ParseError::TrailingInput(tokens[pos..].join(" ")));
        }
        Ok(term)
    }
}

pub struct TermDisplay<'a> {
    term: &'a Term,
    sig: &'a Signature,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.term {
            Term::Var(v) => write!(f, "x{v}"),
            Term::App(op, args) if args.is_empty() => write!(f, "{}", self.sig.name(*op)),
            Term::App(op, args) => {
                write!(f, "({}", self.sig.name(*op))?;
                for a in args {
                    write!(f, " {}", a.display(self.sig))?;
                }
                write!(f, ")")
            }
        }
    }
}

fn tokenize(input: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut atom = String::new();
    for ch in input.chars() {
        match ch {
            '(' | ')' => {
                if !atom.is_empty() {
                    tokens.push(std::mem::take(&mut atom));
                }
                tokens.push(ch.to_string());
            }
            c if c.is_whitespace() => {
                if !atom.is_empty() {
                    tokens.push(std::mem::take(&mut atom));
                }
            }
            c => atom.push(c),
        }
    }
    if !atom.is_empty() {
        tokens.push(atom);
    }
    tokens
}

fn parse_atom(atom: &str, sig: &Signature, applied: usize) -> Result<TermHead, ParseError> {
    if let Some(digits) = atom.strip_prefix('x') {
        if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
            let v = digits
                .parse::<usize>()
                .map_err(|_| ParseError::InvalidVariable(atom.to_string()))?;
            return Ok(TermHead::Var(v));
        }
    }
    let op = sig
        .index_of(atom)
        .ok_or_else(|| ParseError::UnknownSymbol(atom.to_string()))?;
    if sig.arity(op) != applied {
        return Err(ParseError::ArityMismatch {
            symbol: atom.to_string(),
            expected: sig.arity(op),
            found: applied,
        });
    }
    Ok(TermHead::Op(op))
}

enum TermHead {
    Var(usize),
    Op(usize),
}

fn parse_expr(tokens: &[String], pos: &mut usize, sig: &Signature) -> Result<Term, ParseError> {
    let tok = tokens.get(*pos).ok_or(ParseError::UnexpectedEnd)?;
    *pos += 1;
    match tok.as_str() {
        ")" => Err(ParseError::UnexpectedToken(")".into())),
        "(" => {
            let head = tokens.get(*pos).ok_or(ParseError::UnexpectedEnd)?;
            if head == "(" || head == ")" {
                return Err(ParseError::UnexpectedToken(head.clone()));
            }
            *pos += 1;
            let name = head.clone();
            let mut args = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err(ParseError::UnexpectedEnd),
                    Some(t) if t == ")" => {
                        *pos += 1;
                        break;
                    }
                    Some(_) => args.push(parse_expr(tokens, pos, sig)?),
                }
            }
            match parse_atom(&name, sig, args.len())? {
                TermHead::Var(_) if args.is_empty() => {
                    // `(x0)` has no application to perform; reject for clarity
                    Err(ParseError::UnexpectedToken(name))
                }
                TermHead::Var(_) => Err(ParseError::UnexpectedToken(name)),
                TermHead::Op(op) => Ok(Term::App(op, args)),
            }
        }
        atom => match parse_atom(atom, sig, 0)? {
            TermHead::Var(v) => Ok(Term::Var(v)),
            TermHead::Op(op) => Ok(Term::App(op, Vec::new())),
        },
    }
}

/// A total map from basis variables to terms, i.e. an endomorphism of the
/// free algebra given by its values on generators. Variables outside the
/// stored range map to themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    images: Vec<Term>,
}

impl Substitution {
    pub fn identity(basis: Basis) -> Substitution {
        Substitution { images: basis.vars().map(Term::Var).collect() }
    }

    pub fn from_images(images: Vec<Term>) -> Substitution {
        Substitution { images }
    }

    pub fn image(&self, v: usize) -> Term {
        self.images.get(v).cloned().unwrap_or(Term::Var(v))
    }

    pub fn bind(&mut self, v: usize, t: Term) {
        if v >= self.images.len() {
            self.images.extend((self.images.len()..=v).map(Term::Var));
        }
        self.images[v] = t;
    }

    /// Homomorphic extension: replaces every variable by its image.
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.image(*v),
            Term::App(op, args) => {
                Term::App(*op, args.iter().map(|a| self.apply(a)).collect())
            }
        }
    }

    /// `self.compose(&inner)` is the substitution sending `x` to
    /// `self.apply(inner(x))`, so applying it equals applying `inner` then
    /// `self`.
    pub fn compose(&self, inner: &Substitution) -> Substitution {
        let n = self.images.len().max(inner.images.len());
        Substitution {
            images: (0..n).map(|v| self.apply(&inner.image(v))).collect(),
        }
    }

    /// True when every variable maps to itself.
    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(v, t)| *t == Term::Var(v))
    }
}

/// One-way matching: finds a substitution `s` with `s.apply(pattern) ==
/// target`, or `None`. Deterministic left-to-right walk; the result is the
/// identity outside the variables of `pattern`.
pub fn match_term(pattern: &Term, target: &Term, basis: Basis) -> Option<Substitution> {
    fn walk<'t>(p: &Term, t: &'t Term, bound: &mut Vec<Option<&'t Term>>) -> bool {
        match p {
            Term::Var(v) => {
                if *v >= bound.len() {
                    bound.resize(*v + 1, None);
                }
                match bound[*v] {
                    None => {
                        bound[*v] = Some(t);
                        true
                    }
                    Some(prev) => prev == t,
                }
            }
            Term::App(op, args) => match t {
                Term::App(top, targs) if top == op && targs.len() == args.len() => {
                    for (pa, ta) in args.iter().zip(targs) {
                        if !walk(pa, ta, bound) {
                            return false;
                        }
                    }
                    true
                }
                _ => false,
            },
        }
    }

    let mut bound: Vec<Option<&Term>> = vec![None; basis.size()];
    if !walk(pattern, target, &mut bound) {
        return None;
    }
    let mut sub = Substitution::identity(Basis::new(bound.len()));
    for (v, b) in bound.into_iter().enumerate() {
        if let Some(t) = b {
            sub.bind(v, t.clone());
        }
    }
    Some(sub)
}

/// All terms of depth at most `max_depth`, grouped by exact depth. Within a
/// level, variables come first (depth 0 only), then applications in symbol
/// order with argument tuples in lexicographic order over the shallower
/// terms, leftmost argument most significant.
pub fn enumerate_term_levels(
    sig: &Signature,
    basis: Basis,
    max_depth: usize,
    cap: usize,
) -> Result<Vec<Vec<Term>>, TermError> {
    let mut total = 0usize;
    let mut bump = |n: usize| -> Result<usize, TermError> {
        total += n;
        if total > cap {
            Err(TermError::CapExceeded(cap))
        } else {
            Ok(total)
        }
    };

    let mut level0: Vec<Term> = basis.vars().map(Term::Var).collect();
    for (op, sym) in sig.symbols().iter().enumerate() {
        if sym.arity == 0 {
            level0.push(Term::App(op, Vec::new()));
        }
    }
    bump(level0.len())?;

    let mut levels = vec![level0];
    let mut pool: Vec<Term> = levels[0].clone();
    for _ in 1..=max_depth {
        // Arguments come from `pool` (all shallower terms); at least one must
        // have exactly the previous depth, i.e. index >= new_offset.
        let new_offset = pool.len() - levels.last().unwrap().len();
        let mut level = Vec::new();
        for (op, sym) in sig.symbols().iter().enumerate() {
            let k = sym.arity;
            if k == 0 || pool.is_empty() {
                continue;
            }
            let mut idx = vec![0usize; k];
            'tuples: loop {
                if idx.iter().any(|&i| i >= new_offset) {
                    bump(1)?;
                    level.push(Term::App(
                        op,
                        idx.iter().map(|&i| pool[i].clone()).collect(),
                    ));
                }
                let mut p = k;
                loop {
                    if p == 0 {
                        break 'tuples;
                    }
                    p -= 1;
                    idx[p] += 1;
                    if idx[p] < pool.len() {
                        break;
                    }
                    idx[p] = 0;
                }
            }
        }
        pool.extend(level.iter().cloned());
        levels.push(level);
    }
    Ok(levels)
}

/// All terms of depth at most `max_depth`, ordered by depth and then as in
/// [`enumerate_term_levels`].
pub fn enumerate_terms(
    sig: &Signature,
    basis: Basis,
    max_depth: usize,
    cap: usize,
) -> Result<Vec<Term>, TermError> {
    Ok(enumerate_term_levels(sig, basis, max_depth, cap)?
        .into_iter()
        .flatten()
        .collect())
}

/// For a term genuinely depending on a variable outside `agree_on`, produces
/// two substitutions that agree on `agree_on` yet send the term to different
/// results. Returns `None` when the term's variables all lie in `agree_on`,
/// or when the free algebra has no second element to swap in (one variable,
/// empty signature).
pub fn dependence_witness(
    sig: &Signature,
    t: &Term,
    agree_on: &BTreeSet<usize>,
    basis: Basis,
) -> Option<(Substitution, Substitution)> {
    let vars = t.vars();
    let x = *vars.iter().find(|v| !agree_on.contains(v))?;
    let replacement = basis
        .vars()
        .find(|&v| v != x)
        .map(Term::Var)
        .or_else(|| {
            // No second variable: wrap in the first symbol instead, which is
            // never equal to a bare variable.
            (!sig.is_empty()).then(|| Term::App(0, vec![Term::Var(x); sig.arity(0)]))
        })?;
    let alpha = Substitution::identity(basis);
    let mut beta = alpha.clone();
    beta.bind(x, replacement);
    Some((alpha, beta))
}
