use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use freelab::cpmaps::extend_state_preserving;
use freelab::experiments::{
    run_exactness_on, run_exactness_witness, run_moment_convergence, run_pisier_variant, run_theorem31,
    ConvergenceConfig, ExactnessConfig, MomentConfig,
};
use freelab::fock::semicircle_moments;
use freelab::freeprod::{compression_pi, eval_on_space, lift_left_operator, vector_state, ExactnessScenario};
use freelab::io::{self, ExtensionCaseJson, ModelJson, ScenarioJson, SparseJson, ValueJson};
use freelab::linalg;
use freelab::ncpoly::{eval_dim, NCPoly};
use freelab::norms::{op_norm, DEFAULT_TOL};
use freelab::pimsner::{fejer_weights, PimsnerSpace};
use serde::de::DeserializeOwned;
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

#[derive(Parser)]
#[command(name = "freelab", version, about = "Truncated free-product models and experiments")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Global {
    /// Truncation depth, overriding the config.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Pass tolerance, overriding the config.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Report file; `.csv` writes the row table, anything else JSON.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Extra CSV with the series behind the report.
    #[arg(long, global = true)]
    emit_plot: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Norm and moment convergence experiments.
    Converge {
        #[arg(value_enum)]
        which: Experiment,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Exactness witness battery.
    Exactness {
        #[command(subcommand)]
        cmd: ExactnessCmd,
    },
    /// Word list of a truncated free-product space.
    Space {
        #[command(subcommand)]
        cmd: SpaceCmd,
    },
    /// Operator norm of a polynomial on a model.
    Norm {
        #[arg(long)]
        poly: String,
        #[arg(long)]
        model: PathBuf,
    },
    /// Fejér weights 1 − |j|/(n+1).
    Fejer {
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
    Freeprod {
        #[command(subcommand)]
        cmd: FreeprodCmd,
    },
    Fock {
        #[command(subcommand)]
        cmd: FockCmd,
    },
    Pimsner {
        #[command(subcommand)]
        cmd: PimsnerCmd,
    },
    Cpmaps {
        #[command(subcommand)]
        cmd: CpmapsCmd,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Experiment {
    T31,
    Pisier,
    Moments,
}

#[derive(Subcommand)]
enum ExactnessCmd {
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum SpaceCmd {
    Dump {
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Subcommand)]
enum FreeprodCmd {
    /// Lift a factor matrix to the free-product space.
    Lift {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        tag: usize,
    },
    /// Vector state of a polynomial.
    Moment {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        poly: String,
    },
    /// Compression of a lifted first-factor matrix to the sub free product.
    Compress {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
    },
}

#[derive(Subcommand)]
enum FockCmd {
    /// Moments of ℓ + ℓ* up to order 2k against the Catalan numbers.
    Moments {
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
}

#[derive(Subcommand)]
enum PimsnerCmd {
    Check {
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Σ_n applied to S, S* or I, band by band.
    Fejer {
        #[arg(long, default_value = "S")]
        op: String,
        #[arg(long, default_value_t = 5)]
        n: usize,
    },
}

#[derive(Subcommand)]
enum CpmapsCmd {
    Extend {
        #[arg(long)]
        input: PathBuf,
    },
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    io::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_or_default<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        Some(p) => read_json(p),
        None => Ok(T::default()),
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Writes JSON to `--out` (or stdout). A `.csv` target gets `rows` instead.
fn emit<T: Serialize, R: Serialize>(g: &Global, report: &T, rows: &[R]) -> Result<()> {
    match &g.out {
        Some(p) if is_csv(p) => std::fs::write(p, io::to_csv(rows)?)?,
        Some(p) => std::fs::write(p, io::to_json(report)? + "\n")?,
        None => println!("{}", io::to_json(report)?),
    }
    Ok(())
}

fn emit_plot<R: Serialize>(g: &Global, rows: &[R]) -> Result<()> {
    if let Some(p) = &g.emit_plot {
        std::fs::write(p, io::to_csv(rows)?)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct GapPoint<'a> {
    poly: &'a str,
    k: usize,
    epsilon: f64,
    gap: f64,
}

#[derive(Serialize)]
struct MomentPoint {
    k: usize,
    epsilon: f64,
    depth: usize,
    margin: usize,
    max_gap: f64,
    scaled_gap: f64,
    centered_max: f64,
    scalar_gap: f64,
}

#[derive(Serialize)]
struct WordRow {
    pos: usize,
    len: usize,
    tags: String,
    idx: String,
}

#[derive(Serialize)]
struct SpaceDump {
    dim: usize,
    depth: usize,
    words: Vec<WordRow>,
}

#[derive(Serialize)]
struct WeightRow {
    band: isize,
    weight: f64,
}

#[derive(Serialize)]
struct BandRow {
    op: String,
    n: usize,
    band: isize,
    weight: f64,
    residual: f64,
}

#[derive(Serialize)]
struct ExtendOutput {
    choi: io::JsonMatrix,
    report: freelab::cpmaps::ExtensionReport,
}

fn join(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn converge(g: &Global, which: Experiment, config: &Option<PathBuf>) -> Result<bool> {
    match which {
        Experiment::T31 | Experiment::Pisier => {
            let mut cfg: ConvergenceConfig = match (config, which) {
                (Some(p), _) => read_json(p)?,
                (None, Experiment::Pisier) => ConvergenceConfig::pisier(),
                (None, _) => ConvergenceConfig::default(),
            };
            if let Some(d) = g.depth {
                cfg.depth = d;
            }
            if let Some(t) = g.tol {
                cfg.tol = t;
            }
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            let r = match which {
                Experiment::Pisier => run_pisier_variant(&cfg)?,
                _ => run_theorem31(&cfg)?,
            };
            for w in &r.warnings {
                eprintln!("warning: {w}");
            }
            emit(g, &r, &r.rows)?;
            let pts: Vec<GapPoint> =
                r.rows.iter().map(|x| GapPoint { poly: &x.poly, k: x.k, epsilon: x.epsilon, gap: x.gap }).collect();
            emit_plot(g, &pts)?;
            Ok(r.pass)
        }
        Experiment::Moments => {
            let mut cfg: MomentConfig = read_or_default(config)?;
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            let r = run_moment_convergence(&cfg)?;
            let pts: Vec<MomentPoint> = r
                .rows
                .iter()
                .map(|x| MomentPoint {
                    k: x.k,
                    epsilon: x.epsilon,
                    depth: x.depth,
                    margin: x.margin,
                    max_gap: x.max_gap,
                    scaled_gap: x.scaled_gap,
                    centered_max: x.centered_max,
                    scalar_gap: x.scalar_gap,
                })
                .collect();
            emit(g, &r, &pts)?;
            emit_plot(g, &pts)?;
            Ok(r.pass)
        }
    }
}

fn exactness_config(g: &Global, config: &Option<PathBuf>) -> Result<ExactnessConfig> {
    let mut cfg: ExactnessConfig = read_or_default(config)?;
    if let Some(d) = g.depth {
        cfg.depth = d;
    }
    if let Some(t) = g.tol {
        cfg.tol = t;
    }
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn load_model(g: &Global, path: &Path) -> Result<ModelJson> {
    let mut m: ModelJson = read_json(path)?;
    if let Some(d) = g.depth {
        m.depth = d;
    }
    Ok(m)
}

fn pimsner_fejer(g: &Global, op: &str, n: usize) -> Result<()> {
    let scn = ExactnessScenario::default_scenario();
    let depth = g.depth.unwrap_or(4);
    let k = PimsnerSpace::new(scn.full_factors(), depth)?;
    let s = k.s();
    let t = match op {
        "S" => s,
        "S*" => linalg::sp_adjoint(&s),
        "I" => linalg::sp_identity(k.dim()),
        _ => bail!("unknown operator {op:?}; expected S, S* or I"),
    };
    let band = k.band_of(&t).unwrap_or(0);
    let weight = fejer_weights(n).get(band.unsigned_abs()).copied().unwrap_or(0.0);
    let expect = linalg::sp_scale(&t, linalg::c(weight, 0.0));
    let residual = linalg::sp_max_abs(&linalg::sp_sub(&k.fejer_partial(&t, n), &expect));
    let rows = vec![BandRow { op: op.into(), n, band, weight, residual }];
    emit(g, &rows, &rows)
}

fn run(cli: Cli) -> Result<bool> {
    let g = &cli.global;
    match &cli.cmd {
        Cmd::Converge { which, config } => converge(g, *which, config),
        Cmd::Exactness { cmd: ExactnessCmd::Run { config } } => {
            let r = run_exactness_witness(&exactness_config(g, config)?)?;
            for f in &r.failed {
                eprintln!("failed: {f}");
            }
            emit(g, &r, &r.checks)?;
            Ok(r.pass)
        }
        Cmd::Space { cmd: SpaceCmd::Dump { model } } => {
            let sp = load_model(g, model)?.space()?;
            let words: Vec<WordRow> = (0..sp.dim())
                .map(|pos| {
                    let w = sp.word(pos);
                    WordRow { pos, len: w.len(), tags: join(&w.tags), idx: join(&w.idx) }
                })
                .collect();
            let dump = SpaceDump { dim: sp.dim(), depth: sp.depth(), words };
            emit(g, &dump, &dump.words)?;
            Ok(true)
        }
        Cmd::Norm { poly, model } => {
            let m = load_model(g, model)?;
            let p: NCPoly = poly.parse()?;
            let space = Arc::new(m.space()?);
            let asg = m.assignment()?;
            let mut lifted = BTreeMap::new();
            for s in p.symbols() {
                let a = asg.get(&s).with_context(|| format!("no matrix for {s}"))?;
                lifted.insert(s, lift_left_operator(a, s.tag, &space)?.matrix);
            }
            let t = eval_dim(&p, &lifted, space.dim())?;
            let r = op_norm(&t, g.tol.unwrap_or(DEFAULT_TOL))?;
            emit(g, &r, &[&r])?;
            Ok(true)
        }
        Cmd::Fejer { n } => {
            let w = fejer_weights(*n);
            let rows: Vec<WeightRow> =
                (-(*n as isize)..=*n as isize).map(|b| WeightRow { band: b, weight: w[b.unsigned_abs()] }).collect();
            emit(g, &rows, &rows)?;
            Ok(true)
        }
        Cmd::Freeprod { cmd } => {
            match cmd {
                FreeprodCmd::Lift { model, matrix, tag } => {
                    let space = Arc::new(load_model(g, model)?.space()?);
                    let a = io::matrix_from_json(&read_json(matrix)?)?;
                    let d = SparseJson::from_sparse(&lift_left_operator(&a, *tag, &space)?.matrix);
                    emit(g, &d, &d.entries)?;
                }
                FreeprodCmd::Moment { model, poly } => {
                    let m = load_model(g, model)?;
                    let space = Arc::new(m.space()?);
                    let t = eval_on_space(&poly.parse()?, &space, &m.assignment()?)?;
                    let v = ValueJson { value: io::complex_to_json(vector_state(&t)) };
                    emit(g, &v, &[&v])?;
                }
                FreeprodCmd::Compress { scenario, matrix } => {
                    let scn = read_json::<ScenarioJson>(scenario)?.to_scenario()?;
                    let sp = scn.spaces(g.depth.unwrap_or(4))?;
                    let a = io::matrix_from_json(&read_json(matrix)?)?;
                    let pi = compression_pi(&lift_left_operator(&a, 0, &sp.full)?, &sp)?;
                    let d = SparseJson::from_sparse(&pi.matrix);
                    emit(g, &d, &d.entries)?;
                }
            }
            Ok(true)
        }
        Cmd::Fock { cmd: FockCmd::Moments { k } } => {
            let rows = semicircle_moments(2 * k, g.depth.unwrap_or(2 * k))?;
            match &g.out {
                Some(p) if !is_csv(p) => std::fs::write(p, io::to_json(&rows)? + "\n")?,
                Some(p) => std::fs::write(p, io::to_csv(&rows)?)?,
                None => print!("{}", io::to_csv(&rows)?),
            }
            Ok(rows.iter().all(|r| r.error <= 1e-10))
        }
        Cmd::Pimsner { cmd } => match cmd {
            PimsnerCmd::Check { scenario } => {
                let scn = match scenario {
                    Some(p) => read_json::<ScenarioJson>(p)?.to_scenario()?,
                    None => ExactnessScenario::default_scenario(),
                };
                let r = run_exactness_on(&scn, &exactness_config(g, &None)?)?;
                emit(g, &r, &r.checks)?;
                Ok(r.pass)
            }
            PimsnerCmd::Fejer { op, n } => {
                pimsner_fejer(g, op, *n)?;
                Ok(true)
            }
        },
        Cmd::Cpmaps { cmd: CpmapsCmd::Extend { input } } => {
            let case = read_json::<ExtensionCaseJson>(input)?.to_case()?;
            let ext = extend_state_preserving(&case.phi, &case.xi, &case.eta)?;
            let tol = g.tol.unwrap_or(1e-9);
            let out = ExtendOutput { choi: io::matrix_to_json(ext.map.choi()), report: ext.report.clone() };
            emit(g, &out, &[&ext.report])?;
            Ok(ext.report.passes(tol))
        }
    }
}

fn main() -> std::process::ExitCode {
    match run(Cli::parse()) {
        Ok(true) => std::process::ExitCode::SUCCESS,
        Ok(false) => std::process::ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::from(2)
        }
    }
}
