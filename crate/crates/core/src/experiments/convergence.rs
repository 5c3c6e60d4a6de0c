use super::families::{hypothesis_gaps, FamilyKind, GeneratorFamily, Tuple};
use crate::error::{Error, Result};
use crate::freeprod::{eval_on_space, lift_left_operator};
use crate::hilbert::FreeProductSpace;
use crate::linalg::{self, CMat, CVec, SpMat, C64};
use crate::ncpoly::{NCPoly, Symbol};
use crate::norms::{op_norm, two_norm, NormMethod};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

pub const DEFAULT_POLYS: [&str; 5] = [
    "a1 + b1",
    "a1.b1 + b1'.a1'",
    "a1.b1.a2",
    "a2.b1.a1' - a1.a2 + 0.5*b1",
    "b1.a1.b1' + 2*a2'",
];

fn default_ks() -> Vec<usize> {
    vec![1, 2, 4, 8, 16, 32, 64]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Family for the a-generators.
    pub family: FamilyKind,
    /// Family for the b-generators; constant unless both factors vary.
    pub y_family: FamilyKind,
    pub d: usize,
    pub n: usize,
    pub d_b: usize,
    pub m: usize,
    pub ks: Vec<usize>,
    pub depth: usize,
    pub polys: Vec<String>,
    /// Final-gap tolerance.
    pub tol: f64,
    /// Relative tolerance passed to the norm solver.
    pub norm_tol: f64,
    pub degree_cap: usize,
    pub liminf_slack: f64,
    pub seed: u64,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig {
            family: FamilyKind::Block,
            y_family: FamilyKind::Constant,
            d: 3,
            n: 2,
            d_b: 3,
            m: 1,
            ks: default_ks(),
            depth: 5,
            polys: DEFAULT_POLYS.iter().map(|s| s.to_string()).collect(),
            tol: 1e-4,
            norm_tol: 1e-13,
            degree_cap: 3,
            liminf_slack: 1e-9,
            seed: 31,
        }
    }
}

impl ConvergenceConfig {
    pub fn pisier() -> Self {
        ConvergenceConfig { y_family: FamilyKind::Block, tol: 1e-5, ..Default::default() }
    }

    fn parsed_polys(&self) -> Result<Vec<NCPoly>> {
        let polys: Vec<NCPoly> = self.polys.iter().map(|s| s.parse()).collect::<Result<_>>()?;
        for (p, s) in polys.iter().zip(&self.polys) {
            if self.depth < p.degree() + 2 {
                return Err(Error::DepthMismatch(format!(
                    "depth {} is below deg + 2 = {} for {s}",
                    self.depth,
                    p.degree() + 2
                )));
            }
            for sym in p.symbols() {
                let limit = if sym.tag == 0 { self.n } else { self.m };
                if sym.tag > 1 || sym.index == 0 || sym.index as usize > limit {
                    return Err(Error::UnassignedSymbol(sym.to_string()));
                }
            }
        }
        Ok(polys)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormRow {
    pub poly: String,
    pub k: usize,
    pub epsilon: f64,
    pub depth: usize,
    pub margin: usize,
    pub dim: usize,
    pub norm: f64,
    pub limit_norm: f64,
    pub gap: f64,
    /// norm − limit_norm; the liminf inequality asks this to stay ≥ −slack.
    pub slack: f64,
    pub two_norm: f64,
    pub limit_two_norm: f64,
    pub method: NormMethod,
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisRow {
    pub k: usize,
    pub degree: usize,
    pub moment_gap: f64,
    pub norm_excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolySummary {
    pub poly: String,
    pub limit_norm: f64,
    pub final_gap: f64,
    pub tail_nonincreasing: bool,
    pub min_slack: f64,
    pub liminf_holds: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub config: ConvergenceConfig,
    pub rows: Vec<NormRow>,
    pub hypotheses: Vec<HypothesisRow>,
    pub summaries: Vec<PolySummary>,
    pub warnings: Vec<String>,
    pub pass: bool,
}

struct Model {
    space: Arc<FreeProductSpace>,
    assignment: BTreeMap<Symbol, CMat>,
}

fn model(x: &Tuple, y: &Tuple, depth: usize) -> Result<Model> {
    let space = Arc::new(FreeProductSpace::new(vec![x.pointed()?, y.pointed()?], depth)?);
    let mut assignment = BTreeMap::new();
    for (i, op) in x.ops.iter().enumerate() {
        assignment.insert(Symbol::new(0, i as u32 + 1), op.clone());
    }
    for (j, op) in y.ops.iter().enumerate() {
        assignment.insert(Symbol::new(1, j as u32 + 1), op.clone());
    }
    Ok(Model { space, assignment })
}

/// (‖p‖, ‖p ξ₀‖, method, dim) on the truncated model.
fn evaluate(p: &NCPoly, m: &Model, tol: f64) -> Result<(f64, f64, NormMethod, usize)> {
    let t = eval_on_space(p, &m.space, &m.assignment)?;
    let nr = op_norm(&t.matrix, tol)?;
    Ok((nr.value, two_norm(&t.matrix, &m.space.xi0()), nr.method, m.space.dim()))
}

fn nonincreasing_tail(gaps: &[f64]) -> bool {
    let tail = &gaps[gaps.len().saturating_sub(3)..];
    tail.windows(2).all(|w| w[1] <= w[0] + 1e-12)
}

fn run(name: &str, cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    if cfg.ks.is_empty() {
        return Err(Error::Invalid("no k values configured".into()));
    }
    let polys = cfg.parsed_polys()?;
    let xf = GeneratorFamily::new(cfg.family, cfg.d, cfg.n, cfg.seed)?;
    let yf = GeneratorFamily::new(cfg.y_family, cfg.d_b, cfg.m, cfg.seed.wrapping_add(1))?;
    let limit = model(xf.limit(), yf.limit(), cfg.depth)?;
    let limits: Vec<(f64, f64)> = polys
        .par_iter()
        .map(|p| evaluate(p, &limit, cfg.norm_tol).map(|(n, t, _, _)| (n, t)))
        .collect::<Result<_>>()?;

    let per_k: Vec<(Vec<NormRow>, HypothesisRow)> = cfg
        .ks
        .par_iter()
        .map(|&k| {
            let (xk, yk) = (xf.at(k), yf.at(k));
            let mk = model(&xk, &yk, cfg.depth)?;
            let mut rows = Vec::with_capacity(polys.len());
            for (i, p) in polys.iter().enumerate() {
                let (norm, tn, method, dim) = evaluate(p, &mk, cfg.norm_tol)?;
                let (ln, ltn) = limits[i];
                rows.push(NormRow {
                    poly: cfg.polys[i].clone(),
                    k,
                    epsilon: GeneratorFamily::epsilon(k),
                    depth: cfg.depth,
                    margin: 0,
                    dim,
                    norm,
                    limit_norm: ln,
                    gap: (norm - ln).abs(),
                    slack: norm - ln,
                    two_norm: tn,
                    limit_two_norm: ltn,
                    method,
                });
            }
            let (mx, nx) = hypothesis_gaps(&xk, xf.limit(), cfg.degree_cap);
            let (my, ny) = hypothesis_gaps(&yk, yf.limit(), cfg.degree_cap);
            let hyp = HypothesisRow { k, degree: cfg.degree_cap, moment_gap: mx.max(my), norm_excess: nx.max(ny) };
            Ok((rows, hyp))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut hypotheses = Vec::new();
    for (r, h) in per_k {
        rows.extend(r);
        hypotheses.push(h);
    }
    rows.sort_by_key(|r| (cfg.polys.iter().position(|p| *p == r.poly), r.k));

    let mut warnings = Vec::new();
    let moments: Vec<f64> = hypotheses.iter().map(|h| h.moment_gap).collect();
    let excess: Vec<f64> = hypotheses.iter().map(|h| h.norm_excess.max(0.0)).collect();
    if !moments.windows(2).all(|w| w[1] <= w[0] + 1e-12) {
        warnings.push(format!("moment hypothesis: gaps do not decrease at degree {}", cfg.degree_cap));
    }
    if !excess.windows(2).all(|w| w[1] <= w[0] + 1e-12) {
        warnings.push(format!("norm hypothesis: excess does not decrease at degree {}", cfg.degree_cap));
    }

    let mut summaries = Vec::with_capacity(polys.len());
    for (i, ps) in cfg.polys.iter().enumerate() {
        let mine: Vec<&NormRow> = rows.iter().filter(|r| r.poly == *ps).collect();
        let gaps: Vec<f64> = mine.iter().map(|r| r.gap).collect();
        let final_gap = *gaps.last().unwrap();
        let min_slack = mine.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
        let tail = nonincreasing_tail(&gaps);
        let liminf = min_slack >= -cfg.liminf_slack;
        summaries.push(PolySummary {
            poly: ps.clone(),
            limit_norm: limits[i].0,
            final_gap,
            tail_nonincreasing: tail,
            min_slack,
            liminf_holds: liminf,
            pass: final_gap <= cfg.tol && tail && liminf,
        });
    }
    let pass = summaries.iter().all(|s| s.pass);
    Ok(ConvergenceReport { experiment: name.into(), config: cfg.clone(), rows, hypotheses, summaries, warnings, pass })
}

/// ‖p(X⁽ᵏ⁾, Y)‖ against ‖p(X, Y)‖ over the configured k.
pub fn run_theorem31(cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    run("norm-convergence", cfg)
}

/// Both factors vary with k.
pub fn run_pisier_variant(cfg: &ConvergenceConfig) -> Result<ConvergenceReport> {
    run("two-family-convergence", cfg)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MomentConfig {
    pub family: FamilyKind,
    pub y_family: FamilyKind,
    pub d: usize,
    pub n: usize,
    pub d_b: usize,
    pub m: usize,
    pub ks: Vec<usize>,
    pub degree: usize,
    /// Extra polynomials tracked individually.
    pub words: Vec<String>,
    pub seed: u64,
}

impl Default for MomentConfig {
    fn default() -> Self {
        MomentConfig {
            family: FamilyKind::Leaky,
            y_family: FamilyKind::Constant,
            d: 3,
            n: 2,
            d_b: 3,
            m: 1,
            ks: default_ks(),
            degree: 3,
            words: vec!["a1.b1.a1".into()],
            seed: 31,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentRow {
    pub k: usize,
    pub epsilon: f64,
    pub depth: usize,
    pub margin: usize,
    /// max |(τₖ∗φ)(q) − (τ∗φ)(q)| over mixed monomials q of degree ≤ d
    pub max_gap: f64,
    pub scaled_gap: f64,
    pub word_gaps: Vec<f64>,
    /// largest |state| over the centered alternating samples (both sides)
    pub centered_max: f64,
    pub scalar_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub experiment: String,
    pub config: MomentConfig,
    pub monomials: usize,
    pub rows: Vec<MomentRow>,
    pub pass: bool,
}

/// Lifted letters (tag-0 ops, their adjoints, tag-1 ops, their adjoints).
fn lifted_letters(x: &Tuple, y: &Tuple, space: &Arc<FreeProductSpace>) -> Result<Vec<SpMat>> {
    let mut out = Vec::new();
    for (tag, t) in [(0usize, x), (1, y)] {
        for op in &t.ops {
            out.push(lift_left_operator(op, tag, space)?.matrix);
            out.push(lift_left_operator(&op.adjoint(), tag, space)?.matrix);
        }
    }
    Ok(out)
}

fn word_state(letters: &[SpMat], word: &[usize], xi0: &CVec) -> C64 {
    let mut v = xi0.clone();
    for &l in word.iter().rev() {
        v = linalg::sp_matvec(&letters[l], &v);
    }
    v[0]
}

fn centered_samples(t: &Tuple, tag: usize) -> Vec<(usize, CMat)> {
    t.ops
        .iter()
        .map(|op| {
            let s = linalg::vector_expectation(op, &t.xi);
            (tag, op - CMat::identity(t.dim(), t.dim()) * s)
        })
        .collect()
}

fn centered_max(x: &Tuple, y: &Tuple, space: &Arc<FreeProductSpace>) -> Result<f64> {
    let (ca, cb) = (centered_samples(x, 0), centered_samples(y, 1));
    let mut worst: f64 = 0.0;
    for a in &ca {
        for b in &cb {
            for w in [vec![a.clone(), b.clone()], vec![b.clone(), a.clone(), b.clone()], vec![a.clone(), b.clone(), a.clone()]] {
                let t = crate::freeprod::lift_word(&w, space)?;
                worst = worst.max(crate::freeprod::vector_state(&t).norm());
            }
        }
    }
    Ok(worst)
}

pub fn run_moment_convergence(cfg: &MomentConfig) -> Result<MomentReport> {
    let xf = GeneratorFamily::new(cfg.family, cfg.d, cfg.n, cfg.seed)?;
    let yf = GeneratorFamily::new(cfg.y_family, cfg.d_b, cfg.m, cfg.seed.wrapping_add(1))?;
    let words: Vec<NCPoly> = cfg.words.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    let depth = cfg.degree.max(words.iter().map(|w| w.degree()).max().unwrap_or(0)).max(1);
    let n_letters = 2 * (cfg.n + cfg.m);
    let monos = super::families::monomials(n_letters / 2, cfg.degree);
    let scalar: NCPoly = NCPoly::constant(C64::new(1.5, -0.5));

    let evaluate = |x: &Tuple, y: &Tuple| -> Result<(Vec<C64>, Vec<C64>, f64, C64)> {
        let m = model(x, y, depth)?;
        let letters = lifted_letters(x, y, &m.space)?;
        let xi0 = m.space.xi0();
        let vals = monos.iter().map(|w| word_state(&letters, w, &xi0)).collect();
        let wv = words
            .iter()
            .map(|p| eval_on_space(p, &m.space, &m.assignment).map(|t| crate::freeprod::vector_state(&t)))
            .collect::<Result<_>>()?;
        let sv = crate::freeprod::vector_state(&eval_on_space(&scalar, &m.space, &m.assignment)?);
        Ok((vals, wv, centered_max(x, y, &m.space)?, sv))
    };
    let (lim_vals, lim_words, lim_centered, lim_scalar) = evaluate(xf.limit(), yf.limit())?;
    let rows: Vec<MomentRow> = cfg
        .ks
        .par_iter()
        .map(|&k| {
            let (vals, wv, cm, sv) = evaluate(&xf.at(k), &yf.at(k))?;
            let max_gap = vals.iter().zip(&lim_vals).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            Ok(MomentRow {
                k,
                epsilon: GeneratorFamily::epsilon(k),
                depth,
                margin: 0,
                max_gap,
                scaled_gap: max_gap * k as f64,
                word_gaps: wv.iter().zip(&lim_words).map(|(a, b)| (a - b).norm()).collect(),
                centered_max: cm.max(lim_centered),
                scalar_gap: (sv - lim_scalar).norm(),
            })
        })
        .collect::<Result<_>>()?;
    let gaps: Vec<f64> = rows.iter().map(|r| r.max_gap).collect();
    let pass = nonincreasing_tail(&gaps)
        && rows.iter().all(|r| r.scalar_gap == 0.0 && r.centered_max <= 1e-12)
        && gaps.last().copied().unwrap_or(0.0) <= gaps.first().copied().unwrap_or(0.0);
    Ok(MomentReport { experiment: "moments".into(), config: cfg.clone(), monomials: monos.len(), rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: FamilyKind) -> ConvergenceConfig {
        ConvergenceConfig {
            family: kind,
            ks: vec![1, 4, 16, 64],
            depth: 4,
            polys: vec!["a1 + b1".into(), "a1.b1 + b1'.a1'".into()],
            ..Default::default()
        }
    }

    #[test]
    fn constant_family_has_zero_gap() {
        let r = run_theorem31(&small(FamilyKind::Constant)).unwrap();
        assert!(r.rows.iter().all(|row| row.gap <= 1e-12), "{:?}", r.rows);
        assert!(r.pass);
    }

    #[test]
    fn block_family_converges_from_above() {
        let r = run_theorem31(&small(FamilyKind::Block)).unwrap();
        for s in &r.summaries {
            assert!(s.pass, "{s:?}");
        }
        assert!(r.rows.iter().all(|row| row.slack >= -1e-9));
        assert!(r.hypotheses.iter().all(|h| h.moment_gap <= 1e-13));
    }

    #[test]
    fn depth_rule_is_enforced() {
        let cfg = ConvergenceConfig { depth: 3, ..small(FamilyKind::Block) };
        assert!(matches!(run_theorem31(&cfg), Err(Error::DepthMismatch(_))));
    }

    #[test]
    fn constant_second_family_matches_single_family_run() {
        let cfg = small(FamilyKind::Block);
        let a = run_theorem31(&cfg).unwrap();
        let b = run_pisier_variant(&cfg).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.norm.to_bits(), y.norm.to_bits());
        }
    }

    #[test]
    fn leaky_moments_converge() {
        let cfg = MomentConfig { ks: vec![1, 4, 16, 64], degree: 2, ..Default::default() };
        let r = run_moment_convergence(&cfg).unwrap();
        assert!(r.pass, "{:?}", r.rows);
        let first = &r.rows[0];
        let last = r.rows.last().unwrap();
        assert!(last.max_gap < first.max_gap / 10.0);
        assert!(last.scaled_gap <= 10.0 * first.scaled_gap);
    }
}
