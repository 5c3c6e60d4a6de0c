//! One line per acceptance criterion. Runs without the test harness so the
//! lines are always printed; exits nonzero if any criterion fails.

use freelab::cpmaps::{extend_state_preserving, free_product_ucp, random_compatible_case, UCPMap};
use freelab::experiments::{
    run_exactness_witness, run_moment_convergence, run_pisier_variant, run_theorem31, ConvergenceConfig,
    ExactnessConfig, ExactnessReport, MomentConfig,
};
use freelab::fock::{creation, semicircle_moments, FockSpace};
use freelab::freeprod::{lift_word, vector_state};
use freelab::hilbert::{alternating_sequences, FreeProductSpace, PointedSpace};
use freelab::io::to_json;
use freelab::linalg::{self, block_diag, random_complex_matrix, random_unit_vector, CMat, CVec};
use freelab::ncpoly::{Letter, NCPoly, Symbol, Word};
use freelab::norms::op_norm;
use freelab::pimsner::{verify_sstar_relations, PimsnerSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: usize, name: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = f();
    let el = t.elapsed();
    let in_time = budget.is_none_or(|b| el <= b);
    let pass = o.pass && in_time;
    let limit = budget.map_or(String::new(), |b| format!(" (limit {:.0} s)", b.as_secs_f64()));
    println!(
        "criterion {id:>2} {name}: {} | {} | {:.2} s{limit}",
        if pass { "PASS" } else { "FAIL" },
        o.detail,
        el.as_secs_f64()
    );
    pass
}

fn centered(rng: &mut ChaCha8Rng, f: &PointedSpace) -> CMat {
    let m = random_complex_matrix(rng, f.dim(), f.dim());
    let t = f.state(&m);
    m - CMat::identity(f.dim(), f.dim()) * t
}

fn freeness_moments() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut words = 0;
    for (seed, dims) in [(1u64, [2usize, 2]), (2, [2, 3])] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<PointedSpace> = dims.iter().map(|&d| PointedSpace::new(random_unit_vector(&mut rng, d)).unwrap()).collect();
        let space = Arc::new(FreeProductSpace::new(f.clone(), 6).unwrap());
        for len in 1..=6 {
            for tags in alternating_sequences(2, len) {
                for _ in 0..3 {
                    let w: Vec<(usize, CMat)> = tags.iter().map(|&t| (t, centered(&mut rng, &f[t]))).collect();
                    worst = worst.max(vector_state(&lift_word(&w, &space).unwrap()).norm());
                    words += 1;
                }
            }
        }
    }
    outcome(worst <= 1e-13, format!("max |state| {worst:.2e} <= 1e-13 over {words} words"))
}

fn semicircle() -> Outcome {
    let rows = semicircle_moments(10, 8).unwrap();
    let even: Vec<u64> = rows.iter().skip(2).step_by(2).map(|r| r.moment.round() as u64).collect();
    let worst = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    outcome(
        even == vec![1, 2, 5, 14, 42] && worst <= 1e-10,
        format!("even moments {even:?}, max residual {worst:.2e} <= 1e-10"),
    )
}

fn truncated_norms() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut last = 0.0;
    let mut monotone = true;
    for depth in [4usize, 8, 16, 32] {
        let fs = FockSpace::new(1, depth).unwrap();
        let l = creation(&fs, 1).unwrap();
        let v = op_norm(&linalg::sp_add(&l, &linalg::sp_adjoint(&l)), 1e-12).unwrap().value;
        worst = worst.max((v - 2.0 * (PI / (depth as f64 + 2.0)).cos()).abs());
        monotone &= v > last && v < 2.0;
        last = v;
    }
    outcome(worst <= 1e-8 && monotone, format!("max |norm - 2cos(pi/(D+2))| {worst:.2e} <= 1e-8, monotone {monotone}"))
}

fn sstar_relations() -> Outcome {
    let mut worst: f64 = 0.0;
    for (seed, d1, d2) in [(3u64, 2usize, 2usize), (4, 2, 3), (5, 3, 3)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<PointedSpace> = [d1, d2].iter().map(|&d| PointedSpace::new(random_unit_vector(&mut rng, d)).unwrap()).collect();
        let k = PimsnerSpace::new(f, 4).unwrap();
        let mut samples = Vec::new();
        for (tag, d) in [(0usize, d1), (1, d2)] {
            samples.push((tag, random_complex_matrix(&mut rng, d, d), random_complex_matrix(&mut rng, d, d)));
            samples.push((tag, CMat::identity(d, d), random_complex_matrix(&mut rng, d, d)));
        }
        worst = worst.max(verify_sstar_relations(&k, &samples).unwrap().max());
    }
    outcome(worst <= 1e-12, format!("max residual {worst:.2e} <= 1e-12, dims up to (3, 3), D = 4"))
}

fn checks(report: &ExactnessReport, names: &[&str]) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for n in names {
        let c = report.check(n).expect("check exists");
        pass &= c.pass;
        parts.push(format!("{n} {:.2e} vs {:.0e}", c.value, c.threshold));
    }
    outcome(pass, parts.join(", "))
}

fn ucp_extension() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (mut eig, mut restr, mut state): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..25 {
        let case = random_compatible_case(&mut rng, 4).unwrap();
        let ext = extend_state_preserving(&case.phi, &case.xi, &case.eta).unwrap();
        eig = eig.min(ext.report.choi_min_eigenvalue);
        restr = restr.max(ext.report.restriction_residual);
        state = state.max(ext.report.state_residual);
    }
    outcome(
        eig >= -1e-9 && restr <= 1e-9 && state <= 1e-9,
        format!("25 cases in M4: min Choi eig {eig:.2e}, restriction {restr:.2e}, state {state:.2e} (tol 1e-9)"),
    )
}

fn random_word(rng: &mut ChaCha8Rng, len: usize) -> NCPoly {
    let letters: Vec<Letter> = (0..len)
        .map(|_| Letter::new(Symbol::new(rng.random_range(0..2), rng.random_range(1..=2)), rng.random_bool(0.3)))
        .collect();
    NCPoly::term(linalg::c(1.0, 0.0), Word(letters))
}

fn ucp_multiplicativity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let dims = [2usize, 3];
    let src: Vec<PointedSpace> = dims.iter().map(|&d| PointedSpace::new(random_unit_vector(&mut rng, d)).unwrap()).collect();
    let mut asg = BTreeMap::new();
    for (tag, &d) in dims.iter().enumerate() {
        for idx in 1..=2 {
            asg.insert(Symbol::new(tag, idx), random_complex_matrix(&mut rng, d, d));
        }
    }
    let targets: Vec<PointedSpace> = src
        .iter()
        .map(|s| {
            let mut xi = CVec::zeros(2 * s.dim());
            xi.rows_mut(0, s.dim()).copy_from(s.xi());
            PointedSpace::new(xi).unwrap()
        })
        .collect();
    let maps: Vec<UCPMap> = src.iter().map(|s| UCPMap::from_fn(s.dim(), 2 * s.dim(), |t| block_diag(t, t)).unwrap()).collect();
    let target = Arc::new(FreeProductSpace::new(targets, 5).unwrap());
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let (l1, l2) = (rng.random_range(1..=2), rng.random_range(1..=2));
        let (w1, w2) = (random_word(&mut rng, l1), random_word(&mut rng, l2));
        let prod = &w1 * &w2;
        let f1 = free_product_ucp(&maps, &w1, &src, &asg, &target).unwrap();
        let f2 = free_product_ucp(&maps, &w2, &src, &asg, &target).unwrap();
        let f12 = free_product_ucp(&maps, &prod, &src, &asg, &target).unwrap();
        let mask = target.interior_mask(prod.degree());
        worst = worst.max(linalg::sp_residual_on_columns(&f12.matrix, &f1.mul(&f2).matrix, &mask));
    }
    outcome(worst <= 1e-10, format!("10 word pairs, max residual {worst:.2e} <= 1e-10 on interior columns"))
}

fn norm_convergence() -> Outcome {
    let r = run_theorem31(&ConvergenceConfig::default()).unwrap();
    let gap = r.summaries.iter().map(|s| s.final_gap).fold(0.0, f64::max);
    let slack = r.summaries.iter().map(|s| s.min_slack).fold(f64::INFINITY, f64::min);
    let tails = r.summaries.iter().all(|s| s.tail_nonincreasing);
    let pass = r.pass && gap <= 1e-4 && slack >= -1e-9 && tails;
    outcome(
        pass,
        format!(
            "{} polys, k up to 64, D = 5: max final gap {gap:.2e} <= 1e-4, tails non-increasing {tails}, min slack {slack:.2e} >= -1e-9",
            r.summaries.len()
        ),
    )
}

fn suite_json() -> String {
    let t31 = run_theorem31(&ConvergenceConfig::default()).unwrap();
    let pisier = run_pisier_variant(&ConvergenceConfig::pisier()).unwrap();
    let moments = run_moment_convergence(&MomentConfig::default()).unwrap();
    let exact = run_exactness_witness(&ExactnessConfig::default()).unwrap();
    [to_json(&t31).unwrap(), to_json(&pisier).unwrap(), to_json(&moments).unwrap(), to_json(&exact).unwrap()].join("\n")
}

fn determinism() -> Outcome {
    let a = suite_json();
    let b = suite_json();
    outcome(a == b, format!("two full-suite runs, {} bytes of JSON, identical {}", a.len(), a == b))
}

fn main() {
    let secs = |s: u64| Some(Duration::from_secs(s));
    let mut results = Vec::new();
    results.push(run(1, "freeness moments", secs(5), freeness_moments));
    results.push(run(2, "semicircle law", secs(1), semicircle));
    results.push(run(3, "truncated semicircle norms", secs(10), truncated_norms));
    results.push(run(4, "S* relations", None, sstar_relations));

    let t = Instant::now();
    let report = run_exactness_witness(&ExactnessConfig::default()).unwrap();
    let battery = t.elapsed();
    println!("exactness battery: {:.2} s, failed {:?}", battery.as_secs_f64(), report.failed);
    results.push(run(5, "Fejer band identity", None, || checks(&report, &["fejer-shift", "fejer-band"])));
    results.push(run(6, "corner embedding", None, || {
        let mut o = checks(&report, &["sigma-psi-identity"]);
        o.pass &= battery <= Duration::from_secs(30);
        o.detail += &format!(", battery {:.2} s (limit 30 s)", battery.as_secs_f64());
        o
    }));
    results.push(run(7, "commuting square", None, || checks(&report, &["commuting-square"])));
    results.push(run(8, "ideal behavior", None, || {
        checks(&report, &["pi-ideal-zero", "pi-ideal-word", "ideal-word-oracle"])
    }));
    results.push(run(9, "UCP extension", secs(10), ucp_extension));
    results.push(run(10, "free product of UCP maps", None, ucp_multiplicativity));
    results.push(run(11, "norm convergence experiment", secs(120), norm_convergence));
    results.push(run(12, "determinism", None, determinism));

    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
