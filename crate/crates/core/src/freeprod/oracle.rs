use super::{lift_word, ExactnessScenario, FreeOperator};
use crate::error::{Error, Result};
use crate::hilbert::FreeProductSpace;
use crate::linalg::{max_abs, CMat, CVec, C64, ONE, ZERO};
use rand::Rng;
use std::sync::Arc;

/// Left half of an ideal word: A₁B₁⋯AₙBₙ, or B₁A₂⋯AₙBₙ with A₁ dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeftForm {
    Full,
    OmitFirst,
}

/// Right half of an ideal word: B'ₘA'ₘ⋯B'₁A'₁, or B'ₘA'ₘ⋯A'₂B'₁ with A'₁ dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightForm {
    EndsWithA,
    EndsWithB,
}

/// (left half)·J·(right half) with centered A's in the first factor,
/// centered B's in the second, and J in the ideal.
#[derive(Debug, Clone)]
pub struct IdealWord {
    pub a: Vec<CMat>,
    pub b: Vec<CMat>,
    pub a_prime: Vec<CMat>,
    pub b_prime: Vec<CMat>,
    pub j: CMat,
    pub left: LeftForm,
    pub right: RightForm,
}

impl IdealWord {
    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn m(&self) -> usize {
        self.b_prime.len()
    }

    /// Letters left to right as (tag, matrix).
    pub fn factors(&self) -> Vec<(usize, CMat)> {
        let mut out = Vec::new();
        for k in 0..self.n() {
            if !(k == 0 && self.left == LeftForm::OmitFirst) {
                out.push((0, self.a[k].clone()));
            }
            out.push((1, self.b[k].clone()));
        }
        out.push((0, self.j.clone()));
        for k in (0..self.m()).rev() {
            out.push((1, self.b_prime[k].clone()));
            if !(k == 0 && self.right == RightForm::EndsWithB) {
                out.push((0, self.a_prime[k].clone()));
            }
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.factors().len()
    }

    pub fn operator(&self, space: &Arc<FreeProductSpace>) -> Result<FreeOperator> {
        lift_word(&self.factors(), space)
    }

    pub fn random<R: Rng>(
        scn: &ExactnessScenario,
        rng: &mut R,
        n: usize,
        m: usize,
        left: LeftForm,
        right: RightForm,
    ) -> Self {
        let ca = |rng: &mut R| scn.centered(0, &scn.random_a1(rng));
        let a: Vec<CMat> = (0..n).map(|_| ca(rng)).collect();
        let a_prime: Vec<CMat> = (0..m).map(|_| ca(rng)).collect();
        let b: Vec<CMat> = (0..n).map(|_| scn.centered(1, &scn.random_a2(rng))).collect();
        let b_prime: Vec<CMat> = (0..m).map(|_| scn.centered(1, &scn.random_a2(rng))).collect();
        IdealWord { a, b, a_prime, b_prime, j: scn.random_j(rng), left, right }
    }

    fn validate(&self, scn: &ExactnessScenario) -> Result<()> {
        if self.a.len() != self.b.len() || self.a_prime.len() != self.b_prime.len() {
            return Err(Error::MalformedWord("A and B lists must have equal length".into()));
        }
        if self.left == LeftForm::OmitFirst && self.n() == 0 {
            return Err(Error::MalformedWord("dropping A₁ needs n ≥ 1".into()));
        }
        if self.right == RightForm::EndsWithB && self.m() == 0 {
            return Err(Error::MalformedWord("dropping A'₁ needs m ≥ 1".into()));
        }
        let q = scn.q(&self.j)?;
        if max_abs(&q) > 1e-12 {
            return Err(Error::ScenarioMismatch("J is not in the ideal block".into()));
        }
        for (tag, m) in self.factors() {
            if m == self.j {
                continue;
            }
            let f = if tag == 0 { &scn.h1 } else { &scn.h2 };
            if m.shape() != (f.dim(), f.dim()) {
                return Err(Error::DimensionMismatch("letter does not act on its factor".into()));
            }
            let s = f.state(&m).norm();
            if s > 1e-10 {
                return Err(Error::NotCentered(s));
            }
        }
        Ok(())
    }
}

/// Image of one basis word under an ideal word, from the closed-form
/// description: the right half contracts a prefix of the input against
/// the A'ₖ*ξ₁ and B'ₖ*ξ₂, J acts on the next tensor factor, and the left
/// half prepends A_kξ₁, B_kξ₂. No operator products are formed.
pub fn ideal_word_action_oracle(
    scn: &ExactnessScenario,
    word: &IdealWord,
    space: &FreeProductSpace,
    pos: usize,
) -> Result<CVec> {
    word.validate(scn)?;
    if space.num_factors() != 2
        || space.factors()[0].dim() != scn.a + scn.b
        || space.factors()[1].dim() != scn.c
    {
        return Err(Error::ScenarioMismatch("space is not the scenario's free product".into()));
    }
    if pos >= space.dim() {
        return Err(Error::IndexOutOfRange { index: pos, max: space.dim() });
    }
    let mut out = CVec::zeros(space.dim());
    let f1 = &space.factors()[0];
    let f2 = &space.factors()[1];
    let rot = |tag: usize, m: &CMat| if tag == 0 { f1.to_rotated(m) } else { f2.to_rotated(m) };
    let w = space.word(pos);
    let m = word.m();

    // contraction of the right half, and the position where J lands
    let (coeff, j_at) = match word.right {
        RightForm::EndsWithA => {
            if w.tags.first() != Some(&0) || w.len() < 2 * m + 1 {
                return Ok(out);
            }
            let mut k = ONE;
            for i in 0..m {
                k *= rot(0, &word.a_prime[i])?[(0, w.idx[2 * i] + 1)];
                k *= rot(1, &word.b_prime[i])?[(0, w.idx[2 * i + 1] + 1)];
            }
            (k, 2 * m)
        }
        RightForm::EndsWithB => {
            if w.tags.first() != Some(&1) || w.len() < 2 * m {
                return Ok(out);
            }
            let mut k = ONE;
            for i in 0..m {
                k *= rot(1, &word.b_prime[i])?[(0, w.idx[2 * i] + 1)];
                if i > 0 {
                    k *= rot(0, &word.a_prime[i])?[(0, w.idx[2 * i - 1] + 1)];
                }
            }
            (k, 2 * m - 1)
        }
    };
    if coeff == ZERO {
        return Ok(out);
    }

    // factor vectors of the output word, most significant first
    let mut tags: Vec<usize> = Vec::new();
    let mut vecs: Vec<Vec<C64>> = Vec::new();
    let column = |m: &CMat, j: usize| (1..m.nrows()).map(|k| m[(k, j)]).collect::<Vec<_>>();
    for k in 0..word.n() {
        if !(k == 0 && word.left == LeftForm::OmitFirst) {
            tags.push(0);
            vecs.push(column(&rot(0, &word.a[k])?, 0));
        }
        tags.push(1);
        vecs.push(column(&rot(1, &word.b[k])?, 0));
    }
    tags.push(0);
    vecs.push(column(&rot(0, &word.j)?, w.idx[j_at] + 1));
    let rest_tags = &w.tags[j_at + 1..];
    let rest_idx = &w.idx[j_at + 1..];
    tags.extend_from_slice(rest_tags);
    if tags.len() > space.depth() {
        return Ok(out);
    }
    let block = match space.block_index(&tags) {
        Some(b) => &space.blocks()[b],
        None => return Ok(out),
    };
    let nhead = vecs.len();
    let mut rest_local = 0usize;
    let mut rest_size = 1usize;
    for (r, &i) in block.radices[nhead..].iter().zip(rest_idx) {
        rest_local = rest_local * r + i;
        rest_size *= r;
    }
    let mut head = vec![ONE];
    for v in &vecs {
        let mut next = Vec::with_capacity(head.len() * v.len());
        for &h in &head {
            for &x in v {
                next.push(h * x);
            }
        }
        head = next;
    }
    for (k, h) in head.into_iter().enumerate() {
        out[block.offset + k * rest_size + rest_local] = coeff * h;
    }
    Ok(out)
}
