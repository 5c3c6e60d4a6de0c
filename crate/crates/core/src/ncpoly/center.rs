use super::{Letter, NCPoly, OperatorLike, Symbol};
use crate::error::{Error, Result};
use crate::linalg::{vector_expectation, CMat, CVec, C64, ZERO};
use std::collections::BTreeMap;
use std::fmt;

/// A state on the matrix algebra of one free factor.
#[derive(Debug, Clone)]
pub enum StateFunctional {
    /// A ↦ ⟨Aξ, ξ⟩
    Vector(CVec),
    /// A ↦ tr(ρA)
    Density(CMat),
}

impl StateFunctional {
    pub fn dim(&self) -> usize {
        match self {
            StateFunctional::Vector(v) => v.len(),
            StateFunctional::Density(r) => r.nrows(),
        }
    }

    pub fn apply(&self, a: &CMat) -> C64 {
        match self {
            StateFunctional::Vector(v) => vector_expectation(a, v),
            StateFunctional::Density(r) => (r * a).trace(),
        }
    }
}

/// Symbolic record of how a centered factor was built.
#[derive(Debug, Clone, PartialEq)]
pub enum FactorExpr {
    Letter(Letter),
    Product(Vec<FactorExpr>),
    Centered(Box<FactorExpr>),
}

impl fmt::Display for FactorExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactorExpr::Letter(l) => write!(f, "{l}"),
            FactorExpr::Product(v) => {
                let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                write!(f, "({})", parts.join("."))
            }
            FactorExpr::Centered(e) => write!(f, "{e}°"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CenteredFactor {
    pub tag: usize,
    pub expr: FactorExpr,
    /// The centered element A° as a matrix on the factor's space.
    pub matrix: CMat,
    /// State value of `matrix`, zero up to rounding.
    pub state: C64,
}

#[derive(Debug, Clone)]
pub struct CenteredWord {
    pub scalar: C64,
    pub factors: Vec<CenteredFactor>,
}

impl CenteredWord {
    pub fn tags(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.tag).collect()
    }
}

impl fmt::Display for CenteredWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| x.expr.to_string()).collect();
        write!(f, "({})*[{}]", self.scalar, parts.join(", "))
    }
}

/// p = scalar·1 + Σ words, each word alternating in tags with centered factors.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub scalar: C64,
    pub words: Vec<CenteredWord>,
}

impl Decomposition {
    /// scalar·I + Σ_w c_w Π f(factor).
    pub fn recombine<O: OperatorLike>(
        &self,
        identity: &O,
        mut f: impl FnMut(&CenteredFactor) -> Result<O>,
    ) -> Result<O> {
        let mut total = identity.op_scale(self.scalar);
        for w in &self.words {
            let mut acc: Option<O> = None;
            for x in &w.factors {
                let m = f(x)?;
                acc = Some(match acc {
                    None => m,
                    Some(a) => a.op_mul(&m),
                });
            }
            if let Some(a) = acc {
                total = total.op_add(&a.op_scale(w.scalar));
            }
        }
        Ok(total)
    }

    pub fn max_factor_state(&self) -> f64 {
        self.words
            .iter()
            .flat_map(|w| w.factors.iter().map(|f| f.state.norm()))
            .fold(0.0, f64::max)
    }
}

struct Item {
    tag: usize,
    expr: FactorExpr,
    matrix: CMat,
}

/// Fuse same-tag runs, split each fused factor as τ(A)·1 + A°, and expand
/// until every surviving word alternates in tags with centered factors.
pub fn center_decompose(
    p: &NCPoly,
    assignment: &BTreeMap<Symbol, CMat>,
    states: &BTreeMap<usize, StateFunctional>,
) -> Result<Decomposition> {
    let mut out = Decomposition { scalar: ZERO, words: Vec::new() };
    for (w, &coeff) in p.terms() {
        let mut items = Vec::with_capacity(w.len());
        for l in &w.0 {
            let state = states.get(&l.sym.tag).ok_or(Error::MissingState(l.sym.tag))?;
            let m = assignment.get(&l.sym).ok_or_else(|| Error::UnassignedSymbol(l.sym.to_string()))?;
            if m.nrows() != state.dim() || m.ncols() != state.dim() {
                return Err(Error::DimensionMismatch(format!(
                    "{} is {}x{}, state on tag {} has dimension {}",
                    l.sym,
                    m.nrows(),
                    m.ncols(),
                    l.sym.tag,
                    state.dim()
                )));
            }
            let matrix = if l.star { m.adjoint() } else { m.clone() };
            items.push(Item { tag: l.sym.tag, expr: FactorExpr::Letter(*l), matrix });
        }
        expand(coeff, items, states, &mut out);
    }
    Ok(out)
}

fn fuse(items: Vec<Item>) -> Vec<Item> {
    let mut out: Vec<Item> = Vec::with_capacity(items.len());
    for it in items {
        match out.last_mut() {
            Some(last) if last.tag == it.tag => {
                last.matrix = &last.matrix * &it.matrix;
                let mut parts = match std::mem::replace(&mut last.expr, FactorExpr::Product(vec![])) {
                    FactorExpr::Product(v) => v,
                    e => vec![e],
                };
                match it.expr {
                    FactorExpr::Product(v) => parts.extend(v),
                    e => parts.push(e),
                }
                last.expr = FactorExpr::Product(parts);
            }
            _ => out.push(it),
        }
    }
    out
}

fn expand(coeff: C64, items: Vec<Item>, states: &BTreeMap<usize, StateFunctional>, out: &mut Decomposition) {
    let items = fuse(items);
    if items.is_empty() {
        out.scalar += coeff;
        return;
    }
    let n = items.len();
    let centered: Vec<(C64, Item)> = items
        .into_iter()
        .map(|it| {
            let st = &states[&it.tag];
            let mean = st.apply(&it.matrix);
            let mut m = it.matrix;
            for k in 0..m.nrows() {
                m[(k, k)] -= mean;
            }
            (mean, Item { tag: it.tag, expr: FactorExpr::Centered(Box::new(it.expr)), matrix: m })
        })
        .collect();
    let full = (1usize << n) - 1;
    for mask in 0..=full {
        let mut k = coeff;
        for (j, (mean, _)) in centered.iter().enumerate() {
            if mask & (1 << j) == 0 {
                k *= mean;
            }
        }
        if k == ZERO {
            continue;
        }
        let kept: Vec<Item> = centered
            .iter()
            .enumerate()
            .filter(|(j, _)| mask & (1 << j) != 0)
            .map(|(_, (_, it))| Item { tag: it.tag, expr: it.expr.clone(), matrix: it.matrix.clone() })
            .collect();
        if mask == full {
            let factors = kept
                .into_iter()
                .map(|it| {
                    let state = states[&it.tag].apply(&it.matrix);
                    CenteredFactor { tag: it.tag, expr: it.expr, matrix: it.matrix, state }
                })
                .collect();
            out.words.push(CenteredWord { scalar: k, factors });
        } else {
            expand(k, kept, states, out);
        }
    }
}
