//! Non-commutative *-polynomials over named generators.
//!
//! A generator symbol is a lowercase letter (the algebra tag, `a` = first
//! free factor) followed by an index, e.g. `a1`, `b2`. Words are products of
//! symbols or their adjoints; see `docs/polynomial-grammar.md` for the text
//! format.

mod center;
mod parse;

pub use center::{center_decompose, CenteredFactor, CenteredWord, Decomposition, FactorExpr, StateFunctional};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, SpMat, C64, ONE, ZERO};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    /// Zero-based free-factor tag (`a` = 0, `b` = 1, ...).
    pub tag: usize,
    pub index: u32,
}

impl Symbol {
    pub fn new(tag: usize, index: u32) -> Self {
        assert!(tag < 26, "tags are single letters");
        Symbol { tag, index }
    }

    pub fn tag_char(&self) -> char {
        (b'a' + self.tag as u8) as char
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.tag_char(), self.index)
    }
}

impl FromStr for Symbol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let first = chars.next().ok_or(Error::Parse { pos: 0, msg: "empty symbol".into() })?;
        if !first.is_ascii_lowercase() {
            return Err(Error::Parse { pos: 0, msg: format!("bad symbol {s:?}") });
        }
        let index: u32 = chars
            .as_str()
            .parse()
            .map_err(|_| Error::Parse { pos: 1, msg: format!("bad symbol index in {s:?}") })?;
        Ok(Symbol::new((first as u8 - b'a') as usize, index))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub sym: Symbol,
    pub star: bool,
}

impl Letter {
    pub fn new(sym: Symbol, star: bool) -> Self {
        Letter { sym, star }
    }

    pub fn adjoint(self) -> Self {
        Letter { sym: self.sym, star: !self.star }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.sym, if self.star { "'" } else { "" })
    }
}

/// A monomial. Ordered by length first, then lexicographically on letters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn adjoint(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.adjoint()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "{}", parts.join("."))
    }
}

/// Finite linear combination of words with complex coefficients, kept in
/// canonical order with zero coefficients pruned.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NCPoly {
    terms: BTreeMap<Word, C64>,
}

impl NCPoly {
    pub fn zero() -> Self {
        NCPoly::default()
    }

    pub fn constant(c: C64) -> Self {
        NCPoly::term(c, Word::empty())
    }

    pub fn one() -> Self {
        NCPoly::constant(ONE)
    }

    pub fn var(sym: Symbol) -> Self {
        NCPoly::term(ONE, Word(vec![Letter::new(sym, false)]))
    }

    pub fn term(c: C64, w: Word) -> Self {
        let mut p = NCPoly::zero();
        p.add_term(c, w);
        p
    }

    pub fn monomial(letters: &[Letter]) -> Self {
        NCPoly::term(ONE, Word(letters.to_vec()))
    }

    pub fn add_term(&mut self, c: C64, w: Word) {
        match self.terms.entry(w) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if *e.get() == ZERO {
                    e.remove();
                }
            }
            Entry::Vacant(e) => {
                if c != ZERO {
                    e.insert(c);
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, &C64)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, w: &Word) -> C64 {
        self.terms.get(w).copied().unwrap_or(ZERO)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn symbols(&self) -> BTreeSet<Symbol> {
        self.terms.keys().flat_map(|w| w.0.iter().map(|l| l.sym)).collect()
    }

    pub fn tags(&self) -> BTreeSet<usize> {
        self.symbols().iter().map(|s| s.tag).collect()
    }

    pub fn scale(&self, c: C64) -> NCPoly {
        let mut out = NCPoly::zero();
        for (w, &v) in &self.terms {
            out.add_term(v * c, w.clone());
        }
        out
    }

    /// The *-operation: (c·w)* = c̄·w*, with w* the reversed word of adjoints.
    pub fn involution(&self) -> NCPoly {
        let mut out = NCPoly::zero();
        for (w, &v) in &self.terms {
            out.add_term(v.conj(), w.adjoint());
        }
        out
    }

    pub fn pow(&self, k: usize) -> NCPoly {
        let mut out = NCPoly::one();
        for _ in 0..k {
            out = &out * self;
        }
        out
    }
}

impl Add for &NCPoly {
    type Output = NCPoly;
    fn add(self, rhs: &NCPoly) -> NCPoly {
        let mut out = self.clone();
        for (w, &v) in &rhs.terms {
            out.add_term(v, w.clone());
        }
        out
    }
}

impl Sub for &NCPoly {
    type Output = NCPoly;
    fn sub(self, rhs: &NCPoly) -> NCPoly {
        self + &rhs.scale(-ONE)
    }
}

impl Mul for &NCPoly {
    type Output = NCPoly;
    fn mul(self, rhs: &NCPoly) -> NCPoly {
        let mut out = NCPoly::zero();
        for (w1, &v1) in &self.terms {
            for (w2, &v2) in &rhs.terms {
                out.add_term(v1 * v2, w1.concat(w2));
            }
        }
        out
    }
}

impl Neg for &NCPoly {
    type Output = NCPoly;
    fn neg(self) -> NCPoly {
        self.scale(-ONE)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $f:ident) => {
        impl $tr for NCPoly {
            type Output = NCPoly;
            fn $f(self, rhs: NCPoly) -> NCPoly {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

fn fmt_real(x: f64) -> String {
    format!("{x}")
}

impl fmt::Display for NCPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, &v)) in self.terms.iter().enumerate() {
            let (negative, coeff) = if v.im == 0.0 {
                (v.re < 0.0, if v.re.abs() == 1.0 { None } else { Some(fmt_real(v.re.abs())) })
            } else {
                (false, Some(format!("({},{})", fmt_real(v.re), fmt_real(v.im))))
            };
            if k == 0 {
                if negative {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if negative { " - " } else { " + " })?;
            }
            match (coeff, w.is_empty()) {
                (Some(c), true) => write!(f, "{c}")?,
                (None, true) => write!(f, "1")?,
                (Some(c), false) => write!(f, "{c}*{w}")?,
                (None, false) => write!(f, "{w}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for NCPoly {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse::parse_poly(s)
    }
}

impl Serialize for NCPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for NCPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The operations `eval` needs from a matrix type.
pub trait OperatorLike: Clone {
    fn identity(n: usize) -> Self;
    fn shape(&self) -> (usize, usize);
    fn op_mul(&self, rhs: &Self) -> Self;
    fn op_add(&self, rhs: &Self) -> Self;
    fn op_scale(&self, c: C64) -> Self;
    fn op_adjoint(&self) -> Self;
}

impl OperatorLike for CMat {
    fn identity(n: usize) -> Self {
        CMat::identity(n, n)
    }
    fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }
    fn op_mul(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn op_add(&self, rhs: &Self) -> Self {
        self + rhs
    }
    fn op_scale(&self, c: C64) -> Self {
        self * c
    }
    fn op_adjoint(&self) -> Self {
        self.adjoint()
    }
}

impl OperatorLike for SpMat {
    fn identity(n: usize) -> Self {
        linalg::sp_identity(n)
    }
    fn shape(&self) -> (usize, usize) {
        SpMat::shape(self)
    }
    fn op_mul(&self, rhs: &Self) -> Self {
        linalg::sp_mul(self, rhs)
    }
    fn op_add(&self, rhs: &Self) -> Self {
        linalg::sp_add(self, rhs)
    }
    fn op_scale(&self, c: C64) -> Self {
        linalg::sp_scale(self, c)
    }
    fn op_adjoint(&self) -> Self {
        linalg::sp_adjoint(self)
    }
}

/// Evaluate `p` on an operator tuple; the dimension is read off the
/// assignment.
pub fn eval<O: OperatorLike>(p: &NCPoly, assignment: &BTreeMap<Symbol, O>) -> Result<O> {
    let dim = match assignment.values().next() {
        Some(op) => op.shape().0,
        None => match p.symbols().into_iter().next() {
            Some(s) => return Err(Error::UnassignedSymbol(s.to_string())),
            None => return Err(Error::Invalid("cannot infer dimension from an empty assignment".into())),
        },
    };
    eval_dim(p, assignment, dim)
}

/// Evaluate `p` with an explicit dimension (needed for constants).
pub fn eval_dim<O: OperatorLike>(p: &NCPoly, assignment: &BTreeMap<Symbol, O>, dim: usize) -> Result<O> {
    for (s, op) in assignment {
        if op.shape() != (dim, dim) {
            return Err(Error::DimensionMismatch(format!(
                "{s} is {:?}, expected {dim}x{dim}",
                op.shape()
            )));
        }
    }
    let mut adjoints: BTreeMap<Symbol, O> = BTreeMap::new();
    for s in p.terms.keys().flat_map(|w| w.0.iter().filter(|l| l.star).map(|l| l.sym)) {
        if let std::collections::btree_map::Entry::Vacant(e) = adjoints.entry(s) {
            let op = assignment.get(&s).ok_or_else(|| Error::UnassignedSymbol(s.to_string()))?;
            e.insert(op.op_adjoint());
        }
    }
    let mut total: Option<O> = None;
    for (w, &coeff) in &p.terms {
        let mut acc: Option<O> = None;
        for l in &w.0 {
            let op = if l.star {
                &adjoints[&l.sym]
            } else {
                assignment.get(&l.sym).ok_or_else(|| Error::UnassignedSymbol(l.sym.to_string()))?
            };
            acc = Some(match acc {
                None => op.clone(),
                Some(a) => a.op_mul(op),
            });
        }
        let term = acc.unwrap_or_else(|| O::identity(dim)).op_scale(coeff);
        total = Some(match total {
            None => term,
            Some(t) => t.op_add(&term),
        });
    }
    Ok(total.unwrap_or_else(|| O::identity(dim).op_scale(ZERO)))
}
