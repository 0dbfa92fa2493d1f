//! Finite algebras: a carrier `{0, .., n-1}` with one operation table per
//! signature symbol, plus term evaluation and homomorphism enumeration.
//!
//! Tables are flat vectors indexed by the argument tuple with the leftmost
//! argument most significant: `(a_0, .., a_{k-1})` lands at index
//! `sum a_j * n^(k-1-j)`. Every codec and table in the crate shares this
//! convention.

use std::collections::BTreeMap;

use serde::Deserialize;
use thiserror::Error;

use crate::clone::{OperationTable, MAX_TABLE_ENTRIES};
use crate::signature::Signature;
use crate::term::{Basis, Term, TermError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("carrier must be nonempty")]
    EmptyCarrier,
    #[error("missing table for symbol {0}")]
    MissingTable(String),
    #[error("table {0} does not name a signature symbol")]
    UnknownTable(String),
    #[error("table {symbol}: expected {expected} entries, found {found}")]
    TableLength {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("table {symbol}: entry {index} is {value}, outside carrier of size {carrier}")]
    EntryOutOfRange {
        symbol: String,
        index: usize,
        value: usize,
        carrier: usize,
    },
    #[error("table {0} would exceed {MAX_TABLE_ENTRIES} entries")]
    TableTooLarge(String),
    #[error("algebras have different signatures")]
    SignatureMismatch,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("variable x{0} has no assigned value")]
    UnassignedVariable(usize),
    #[error("assigned value {value} for x{var} outside carrier of size {carrier}")]
    ValueOutOfRange {
        var: usize,
        value: usize,
        carrier: usize,
    },
    #[error(transparent)]
    InvalidTerm(#[from] TermError),
    #[error("assignment space of {0} entries exceeds {MAX_TABLE_ENTRIES}")]
    TooManyAssignments(usize),
}

/// Expected flat length of a `k`-ary table over a carrier of size `n`, or
/// `None` past [`MAX_TABLE_ENTRIES`].
fn table_len(n: usize, k: usize) -> Option<usize> {
    let mut len = 1usize;
    for _ in 0..k {
        len = len.checked_mul(n)?;
        if len > MAX_TABLE_ENTRIES {
            return None;
        }
    }
    Some(len)
}

/// A total map from basis variables to carrier elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment(Vec<usize>);

impl Assignment {
    pub fn new(values: Vec<usize>) -> Assignment {
        Assignment(values)
    }

    pub fn get(&self, v: usize) -> Option<usize> {
        self.0.get(v).copied()
    }

    pub fn values(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(try_from = "RawAlgebra")]
pub struct FiniteAlgebra {
    signature: Signature,
    carrier: usize,
    tables: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct RawAlgebra {
    signature: Signature,
    carrier: usize,
    tables: BTreeMap<String, Vec<usize>>,
}

impl TryFrom<RawAlgebra> for FiniteAlgebra {
    type Error = AlgebraError;

    fn try_from(raw: RawAlgebra) -> Result<Self, AlgebraError> {
        FiniteAlgebra::new(raw.signature, raw.carrier, raw.tables)
    }
}

impl FiniteAlgebra {
    /// Builds an algebra from tables keyed by symbol name. Exactly one table
    /// per symbol, correct length, entries inside the carrier.
    pub fn new(
        signature: Signature,
        carrier: usize,
        mut tables: BTreeMap<String, Vec<usize>>,
    ) -> Result<Self, AlgebraError> {
        let mut ordered = Vec::with_capacity(signature.len());
        for sym in signature.symbols() {
            let table = tables
                .remove(&sym.name)
                .ok_or_else(|| AlgebraError::MissingTable(sym.name.clone()))?;
            ordered.push(table);
        }
        if let Some(extra) = tables.into_keys().next() {
            return Err(AlgebraError::UnknownTable(extra));
        }
        FiniteAlgebra::from_tables(signature, carrier, ordered)
    }

    /// Builds an algebra from tables in signature order.
    pub fn from_tables(
        signature: Signature,
        carrier: usize,
        tables: Vec<Vec<usize>>,
    ) -> Result<Self, AlgebraError> {
        if carrier == 0 {
            return Err(AlgebraError::EmptyCarrier);
        }
        if tables.len() != signature.len() {
            let name = signature
                .symbols()
                .get(tables.len())
                .map(|s| s.name.clone())
                .unwrap_or_else(|| "<extra>".to_string());
            return Err(AlgebraError::MissingTable(name));
        }
        for (op, table) in tables.iter().enumerate() {
            let symbol = signature.name(op).to_string();
            let expected = table_len(carrier, signature.arity(op))
                .ok_or_else(|| AlgebraError::TableTooLarge(symbol.clone()))?;
            if table.len() != expected {
                return Err(AlgebraError::TableLength {
                    symbol,
                    expected,
                    found: table.len(),
                });
            }
            if let Some((index, &value)) =
                table.iter().enumerate().find(|(_, &v)| v >= carrier)
            {
                return Err(AlgebraError::EntryOutOfRange { symbol, index, value, carrier });
            }
        }
        Ok(FiniteAlgebra { signature, carrier, tables })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn carrier(&self) -> usize {
        self.carrier
    }

    pub fn table(&self, op: usize) -> &[usize] {
        &self.tables[op]
    }

    /// Applies operation `op` to an argument tuple.
    pub fn op_value(&self, op: usize, args: &[usize]) -> usize {
        let idx = args.iter().fold(0, |acc, &a| acc * self.carrier + a);
        self.tables[op][idx]
    }

    /// Evaluates a term under an assignment by structural recursion; the
    /// unique homomorphic extension of the assignment.
    pub fn evaluate(&self, t: &Term, asg: &Assignment) -> Result<usize, EvalError> {
        match t {
            Term::Var(v) => {
                let value = asg.get(*v).ok_or(EvalError::UnassignedVariable(*v))?;
                if value >= self.carrier {
                    return Err(EvalError::ValueOutOfRange {
                        var: *v,
                        value,
                        carrier: self.carrier,
                    });
                }
                Ok(value)
            }
            Term::App(op, args) => {
                if *op >= self.signature.len() {
                    return Err(TermError::UnknownSymbol {
                        op: *op,
                        len: self.signature.len(),
                    }
                    .into());
                }
                if args.len() != self.signature.arity(*op) {
                    return Err(TermError::ArityMismatch {
                        symbol: self.signature.name(*op).to_string(),
                        expected: self.signature.arity(*op),
                        found: args.len(),
                    }
                    .into());
                }
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(self.evaluate(a, asg)?);
                }
                Ok(self.op_value(*op, &vals))
            }
        }
    }

    /// The `basis.size()`-ary operation a term induces on this algebra: its
    /// value on every assignment, in flat index order.
    pub fn term_operation_table(
        &self,
        t: &Term,
        basis: Basis,
    ) -> Result<OperationTable, EvalError> {
        let m = basis.size();
        let len = table_len(self.carrier, m)
            .ok_or(EvalError::TooManyAssignments(MAX_TABLE_ENTRIES))?;
        let mut values = Vec::with_capacity(len);
        let mut asg = vec![0usize; m];
        loop {
            values.push(self.evaluate(t, &Assignment::new(asg.clone()))?);
            let mut p = m;
            loop {
                if p == 0 {
                    return Ok(OperationTable::new(m, self.carrier, values)
                        .expect("evaluation output always forms a valid table"));
                }
                p -= 1;
                asg[p] += 1;
                if asg[p] < self.carrier {
                    break;
                }
                asg[p] = 0;
            }
        }
    }

    /// Streams every homomorphism from `self` to `cod` in lexicographic
    /// order of the underlying map `{0,..,n-1} -> {0,..,m-1}`.
    pub fn homomorphisms_to<'a>(
        &'a self,
        cod: &'a FiniteAlgebra,
    ) -> Result<Homomorphisms<'a>, AlgebraError> {
        if self.signature != cod.signature {
            return Err(AlgebraError::SignatureMismatch);
        }
        Ok(Homomorphisms::new(self, cod))
    }
}

/// Checks the defining equations of a homomorphism directly, table by table.
pub fn is_homomorphism(dom: &FiniteAlgebra, cod: &FiniteAlgebra, map: &[usize]) -> bool {
    if map.len() != dom.carrier() || map.iter().any(|&v| v >= cod.carrier()) {
        return false;
    }
    if dom.signature() != cod.signature() {
        return false;
    }
    for (op, sym) in dom.signature().symbols().iter().enumerate() {
        let mut args = vec![0usize; sym.arity];
        loop {
            let mapped: Vec<usize> = args.iter().map(|&a| map[a]).collect();
            if map[dom.op_value(op, &args)] != cod.op_value(op, &mapped) {
                return false;
            }
            let mut p = sym.arity;
            loop {
                if p == 0 {
                    break;
                }
                p -= 1;
                args[p] += 1;
                if args[p] < dom.carrier() {
                    break;
                }
                args[p] = 0;
            }
            if args.iter().all(|&a| a == 0) {
                break;
            }
        }
    }
    true
}

/// One table cell read as a constraint: `op(args) = result` in the domain,
/// so any homomorphism `h` must satisfy `op_cod(h(args)) = h(result)`.
struct Check {
    op: usize,
    args: Vec<usize>,
    result: usize,
}

/// Backtracking search over partial maps, extending `h(0), h(1), ..` in
/// order. Each constraint fires at the first point all its elements are
/// decided; constraints from low-arity symbols are queued first so forced
/// values (constants, then unary chains) prune immediately.
pub struct Homomorphisms<'a> {
    cod: &'a FiniteAlgebra,
    checks: Vec<Vec<Check>>,
    h: Vec<usize>,
    pos: usize,
    done: bool,
}

impl<'a> Homomorphisms<'a> {
    fn new(dom: &'a FiniteAlgebra, cod: &'a FiniteAlgebra) -> Self {
        let n = dom.carrier();
        let mut checks: Vec<Vec<Check>> = (0..n).map(|_| Vec::new()).collect();

        let mut ops: Vec<usize> = (0..dom.signature().len()).collect();
        ops.sort_by_key(|&op| dom.signature().arity(op));
        for op in ops {
            let k = dom.signature().arity(op);
            let mut args = vec![0usize; k];
            loop {
                let result = dom.op_value(op, &args);
                let trigger = args.iter().copied().max().unwrap_or(0).max(result);
                checks[trigger].push(Check { op, args: args.clone(), result });
                let mut p = k;
                loop {
                    if p == 0 {
                        break;
                    }
                    p -= 1;
                    args[p] += 1;
                    if args[p] < n {
                        break;
                    }
                    args[p] = 0;
                }
                if args.iter().all(|&a| a == 0) {
                    break;
                }
            }
        }

        Homomorphisms {
            cod,
            checks,
            h: vec![0; n],
            pos: 0,
            done: n == 0,
        }
    }

    fn consistent(&self, pos: usize) -> bool {
        self.checks[pos].iter().all(|c| {
            let idx = c
                .args
                .iter()
                .fold(0, |acc, &a| acc * self.cod.carrier() + self.h[a]);
            self.cod.table(c.op)[idx] == self.h[c.result]
        })
    }

    /// Moves to the next untried candidate value, backtracking as needed.
    fn advance(&mut self) {
        loop {
            if self.h[self.pos] + 1 < self.cod.carrier() {
                self.h[self.pos] += 1;
                return;
            }
            if self.pos == 0 {
                self.done = true;
                return;
            }
            self.pos -= 1;
        }
    }
}

impl Iterator for Homomorphisms<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        loop {
            if self.consistent(self.pos) {
                if self.pos + 1 == self.h.len() {
                    let out = self.h.clone();
                    self.advance();
                    return Some(out);
                }
                self.pos += 1;
                self.h[self.pos] = 0;
            } else {
                self.advance();
                if self.done {
                    return None;
                }
            }
        }
    }
}
