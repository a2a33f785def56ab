//! Config-driven execution: builds domain objects from a parsed
//! [`ScenarioConfig`], runs the requested engine, and writes
//! machine-readable artifacts (a versioned JSON summary plus CSV traces).
//!
//! Failures are classified by phase so the CLI can exit distinctly:
//! parse errors (exit 2), validation errors (exit 3), and computation or
//! output errors (exit 4). Identical config and seed produce
//! byte-identical JSON summaries.

use crate::config::{
    Command, CommandParams, CoreSource, GeometryParams, LoopSource, ManybodyCase, NernstParams,
    ScenarioConfig,
};
use crate::emf::{
    berry_emf_flux_rule, berry_emf_line_form, faraday_emf_decomposed, faraday_emf_total,
    faraday_emf_total_extrapolated, MovingLoop,
};
use crate::error::Error;
use crate::field::{VortexConfig, VortexCore};
use crate::geometry::{Domain, Vec2};
use crate::manybody::{
    berry_connection_mb, factorization_check, mixture_connection, EnsembleEntry, Grid2,
    GridConnection, GridWaveFunction, MixtureEnsemble, MixtureMember,
};
use crate::nernst::{nernst_signal, run_ensemble, NernstEnsemble, NernstScenario};
use crate::topology::{verify_quantization, winding_number, PolyLoop};
use crate::units::{UnitMode, UnitSystem};
use num_complex::Complex64;
use serde::Serialize;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const SCHEMA_VERSION: u32 = 1;

/// Defaults for tolerances when the config gives none.
const DEFAULT_QUAD_TOL: f64 = 1e-9;
const DEFAULT_EMF_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Parse,
    Validation,
    Computation,
}

/// An execution failure tagged with the phase it occurred in.
#[derive(Debug)]
pub struct RunError {
    pub phase: Phase,
    pub source: Error,
}

impl RunError {
    fn parse(source: Error) -> Self {
        RunError {
            phase: Phase::Parse,
            source,
        }
    }

    fn validation(source: Error) -> Self {
        RunError {
            phase: Phase::Validation,
            source,
        }
    }

    fn computation(source: Error) -> Self {
        RunError {
            phase: Phase::Computation,
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.phase {
            Phase::Parse => 2,
            Phase::Validation => 3,
            Phase::Computation => 4,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let phase = match self.phase {
            Phase::Parse => "parse",
            Phase::Validation => "validation",
            Phase::Computation => "computation",
        };
        write!(f, "{phase} error: {}", self.source)
    }
}

impl std::error::Error for RunError {}

/// CLI flag overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub units: Option<UnitMode>,
}

/// Paths and the one-line human summary of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary_line: String,
    pub summary_path: PathBuf,
    pub artifacts: Vec<PathBuf>,
}

type RunResult<T> = std::result::Result<T, RunError>;

/// Executes the scenario at `config_path`. When `expected` is given (the
/// CLI subcommand), the config's `command` must match it.
pub fn run(config_path: &Path, expected: Option<Command>, ov: &Overrides) -> RunResult<RunOutcome> {
    let text = fs::read_to_string(config_path).map_err(|e| {
        RunError::parse(Error::Parse(format!(
            "cannot read config {}: {e}",
            config_path.display()
        )))
    })?;
    let mut cfg = ScenarioConfig::parse(&text).map_err(RunError::parse)?;
    if let Some(seed) = ov.seed {
        cfg.common.seed = Some(seed);
    }
    if let Some(workers) = ov.workers {
        cfg.common.workers = workers;
    }
    if let Some(out) = &ov.out {
        cfg.common.out = Some(out.clone());
    }
    if let Some(units) = ov.units {
        cfg.common.units = units;
    }
    if let Some(expected) = expected {
        if expected != cfg.command {
            return Err(RunError::validation(Error::InvalidConfig(format!(
                "config declares command `{}` but the `{}` subcommand was invoked",
                cfg.command.as_str(),
                expected.as_str()
            ))));
        }
    }
    let base_dir = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out_dir = cfg.common.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir)
        .map_err(|e| RunError::computation(Error::Io(format!("create {out_dir:?}: {e}"))))?;

    let units = UnitSystem::from_mode(cfg.common.units);
    match cfg.params.clone() {
        CommandParams::Winding(g) => run_winding(&cfg, &g, &base_dir, &out_dir),
        CommandParams::Quantize(g) => run_quantize(&cfg, &g, &base_dir, &out_dir),
        CommandParams::Faraday(p) => run_faraday(&cfg, &p, &base_dir, &out_dir),
        CommandParams::BerryEmf(p) => run_berry_emf(
            &cfg,
            &p.geometry,
            p.vx,
            p.vy,
            p.t0,
            p.dt,
            units,
            &base_dir,
            &out_dir,
        ),
        CommandParams::ManybodyCheck(p) => run_manybody(&cfg, &p, &base_dir, &out_dir),
        CommandParams::Nernst(p) => run_nernst_cmd(&cfg, &p, units, &out_dir),
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn classify_input(e: Error) -> RunError {
    // malformed referenced files are parse failures; invariant
    // violations are validation failures
    match e {
        Error::Parse(_) | Error::Io(_) => RunError::parse(e),
        other => RunError::validation(other),
    }
}

fn build_vortex_config(g: &GeometryParams, base: &Path) -> RunResult<VortexConfig> {
    let domain = Domain::new(g.lx, g.ly).map_err(RunError::validation)?;
    match &g.cores {
        CoreSource::Inline(cores) => VortexConfig::new(
            domain,
            cores
                .iter()
                .map(|&(x, y, w)| VortexCore::new(x, y, w))
                .collect(),
        )
        .map_err(RunError::validation),
        CoreSource::File(path) => {
            let loaded = VortexConfig::load(&resolve(base, path)).map_err(classify_input)?;
            if loaded.domain() != domain {
                return Err(RunError::validation(Error::InvalidConfig(format!(
                    "vortex file domain {} x {} does not match [domain] {} x {}",
                    loaded.domain().lx,
                    loaded.domain().ly,
                    domain.lx,
                    domain.ly
                ))));
            }
            Ok(loaded)
        }
    }
}

fn build_loop(src: &LoopSource, base: &Path) -> RunResult<PolyLoop> {
    match src {
        LoopSource::Inline(vertices) => {
            PolyLoop::new(vertices.iter().map(|&(x, y)| Vec2::new(x, y)).collect())
                .map_err(RunError::validation)
        }
        LoopSource::File(path) => PolyLoop::load(&resolve(base, path)).map_err(classify_input),
    }
}

fn write_summary<T: Serialize>(out_dir: &Path, summary: &T) -> RunResult<PathBuf> {
    let path = out_dir.join("summary.json");
    let mut bytes = serde_json::to_vec_pretty(summary)
        .map_err(|e| RunError::computation(Error::Io(e.to_string())))?;
    bytes.push(b'\n');
    fs::write(&path, bytes)
        .map_err(|e| RunError::computation(Error::Io(format!("write {path:?}: {e}"))))?;
    Ok(path)
}

// ---------------------------------------------------------------------
// winding / quantize
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct WindingSummary {
    schema_version: u32,
    command: &'static str,
    winding: i64,
    cores: usize,
}

fn run_winding(
    cfg: &ScenarioConfig,
    g: &GeometryParams,
    base: &Path,
    out_dir: &Path,
) -> RunResult<RunOutcome> {
    let vortices = build_vortex_config(g, base)?;
    let loop_ = build_loop(&g.loop_src, base)?;
    let winding = winding_number(&vortices, &loop_).map_err(RunError::computation)?;
    let summary = WindingSummary {
        schema_version: SCHEMA_VERSION,
        command: cfg.command.as_str(),
        winding,
        cores: vortices.cores().len(),
    };
    let summary_path = write_summary(out_dir, &summary)?;
    Ok(RunOutcome {
        summary_line: format!("winding = {winding} ({} cores)", vortices.cores().len()),
        summary_path,
        artifacts: Vec::new(),
    })
}

#[derive(Serialize)]
struct QuantizeSummary {
    schema_version: u32,
    command: &'static str,
    numeric_integral: f64,
    nearest_quantum: i64,
    deviation: f64,
    quantum_unit: f64,
    tol: f64,
}

fn run_quantize(
    cfg: &ScenarioConfig,
    g: &GeometryParams,
    base: &Path,
    out_dir: &Path,
) -> RunResult<RunOutcome> {
    let vortices = build_vortex_config(g, base)?;
    let loop_ = build_loop(&g.loop_src, base)?;
    let tol = cfg.common.tol.unwrap_or(DEFAULT_QUAD_TOL);
    let report = verify_quantization(&vortices, &loop_, tol).map_err(RunError::computation)?;
    let summary = QuantizeSummary {
        schema_version: SCHEMA_VERSION,
        command: cfg.command.as_str(),
        numeric_integral: report.numeric_integral,
        nearest_quantum: report.nearest_quantum,
        deviation: report.deviation,
        quantum_unit: report.quantum_unit,
        tol,
    };
    let summary_path = write_summary(out_dir, &summary)?;
    Ok(RunOutcome {
        summary_line: format!(
            "loop integral = {:.12e}, quantum = {} x pi, deviation = {:.3e}",
            report.numeric_integral, report.nearest_quantum, report.deviation
        ),
        summary_path,
        artifacts: Vec::new(),
    })
}

// ---------------------------------------------------------------------
// faraday
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct FaradaySummary {
    schema_version: u32,
    command: &'static str,
    emf_total: f64,
    emf_extrapolated: f64,
    extrapolation_error: f64,
    induction_term: f64,
    lorentz_term: f64,
    decomposition_sum: f64,
}

/// Writes the per-time-sample decomposition trace:
/// `t,emf_total,induction,lorentz`. An empty row set still writes the
/// header.
pub fn write_faraday_csv(path: &Path, rows: &[(f64, f64, f64, f64)]) -> crate::Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "t,emf_total,induction,lorentz")?;
    for (t, total, ind, lor) in rows {
        writeln!(f, "{t},{total},{ind},{lor}")?;
    }
    Ok(())
}

fn run_faraday(
    cfg: &ScenarioConfig,
    p: &crate::config::FaradayParams,
    base: &Path,
    out_dir: &Path,
) -> RunResult<RunOutcome> {
    let loop_ = build_loop(&p.loop_src, base)?;
    if p.dt.is_nan() || p.dt <= 0.0 {
        return Err(RunError::validation(Error::InvalidConfig(format!(
            "dt must be positive, got {}",
            p.dt
        ))));
    }
    let mloop = MovingLoop::new(loop_, Vec2::new(p.vx, p.vy));
    let tol = cfg.common.tol.unwrap_or(DEFAULT_QUAD_TOL);

    let total =
        faraday_emf_total(&p.field, &mloop, p.t0, p.dt, tol).map_err(RunError::computation)?;
    let (extrapolated, err_est) = faraday_emf_total_extrapolated(&p.field, &mloop, p.t0, p.dt, tol)
        .map_err(RunError::computation)?;
    let (induction, lorentz) =
        faraday_emf_decomposed(&p.field, &mloop, p.t0, tol).map_err(RunError::computation)?;

    let mut rows = Vec::with_capacity(p.samples);
    for i in 0..p.samples {
        let t = if p.samples == 1 {
            p.t0
        } else {
            p.t0 + (p.t1 - p.t0) * i as f64 / (p.samples - 1) as f64
        };
        let total_t =
            faraday_emf_total(&p.field, &mloop, t, p.dt, tol).map_err(RunError::computation)?;
        let (ind_t, lor_t) =
            faraday_emf_decomposed(&p.field, &mloop, t, tol).map_err(RunError::computation)?;
        rows.push((t, total_t, ind_t, lor_t));
    }
    let trace_path = out_dir.join("faraday_decomposition.csv");
    write_faraday_csv(&trace_path, &rows).map_err(RunError::computation)?;

    let summary = FaradaySummary {
        schema_version: SCHEMA_VERSION,
        command: cfg.command.as_str(),
        emf_total: total,
        emf_extrapolated: extrapolated,
        extrapolation_error: err_est,
        induction_term: induction,
        lorentz_term: lorentz,
        decomposition_sum: induction + lorentz,
    };
    let summary_path = write_summary(out_dir, &summary)?;
    Ok(RunOutcome {
        summary_line: format!(
            "EMF total = {total:.9e}, induction + lorentz = {:.9e}",
            induction + lorentz
        ),
        summary_path,
        artifacts: vec![trace_path],
    })
}

// ---------------------------------------------------------------------
// berry-emf
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct BerryEmfSummary {
    schema_version: u32,
    command: &'static str,
    flux_rule_emf: f64,
    line_form_emf: f64,
    engine_difference: f64,
    winding_before: i64,
    winding_after: i64,
    tol: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_berry_emf(
    cfg: &ScenarioConfig,
    g: &GeometryParams,
    vx: f64,
    vy: f64,
    t0: f64,
    dt: f64,
    units: UnitSystem,
    base: &Path,
    out_dir: &Path,
) -> RunResult<RunOutcome> {
    let vortices = build_vortex_config(g, base)?;
    let loop_ = build_loop(&g.loop_src, base)?;
    if dt.is_nan() || dt <= 0.0 {
        return Err(RunError::validation(Error::InvalidConfig(format!(
            "dt must be positive, got {dt}"
        ))));
    }
    let mloop = MovingLoop::new(loop_, Vec2::new(vx, vy));
    let tol = cfg.common.tol.unwrap_or(DEFAULT_EMF_TOL);
    let flux_rule = berry_emf_flux_rule(&vortices, &mloop, t0, dt, &units, tol)
        .map_err(RunError::computation)?;
    let line_form = berry_emf_line_form(&vortices, &mloop, t0, dt, &units, tol)
        .map_err(RunError::computation)?;
    let w_before = winding_number(&vortices, &mloop.at(t0)).map_err(RunError::computation)?;
    let w_after = winding_number(&vortices, &mloop.at(t0 + dt)).map_err(RunError::computation)?;
    let summary = BerryEmfSummary {
        schema_version: SCHEMA_VERSION,
        command: cfg.command.as_str(),
        flux_rule_emf: flux_rule,
        line_form_emf: line_form,
        engine_difference: (flux_rule - line_form).abs(),
        winding_before: w_before,
        winding_after: w_after,
        tol,
    };
    let summary_path = write_summary(out_dir, &summary)?;
    Ok(RunOutcome {
        summary_line: format!(
            "berry EMF = {flux_rule:.9e} (engines differ by {:.3e}, swept winding {})",
            (flux_rule - line_form).abs(),
            w_after - w_before
        ),
        summary_path,
        artifacts: Vec::new(),
    })
}

// ---------------------------------------------------------------------
// manybody-check
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct MixtureSummary {
    probabilities: Vec<f64>,
    max_error_vs_analytic: f64,
}

#[derive(Serialize)]
struct ManybodySummary {
    schema_version: u32,
    command: &'static str,
    case: String,
    nx: usize,
    ny: usize,
    h: f64,
    n_electrons: usize,
    max_connection_norm: f64,
    masked_nodes: usize,
    /// Max deviation from the analytic connection; absent for loaded
    /// files, which carry no oracle.
    #[serde(skip_serializing_if = "Option::is_none")]
    max_connection_error: Option<f64>,
    /// Residual after stripping the exact half-phase; absent for loaded
    /// files.
    #[serde(skip_serializing_if = "Option::is_none")]
    factorization_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mixture: Option<MixtureSummary>,
}

type AnalyticConnection = Box<dyn Fn(Vec2) -> Option<Vec2>>;

fn connection_error_vs(
    conn: &GridConnection,
    grid: Grid2,
    analytic: impl Fn(Vec2) -> Option<Vec2>,
) -> f64 {
    let mut max_err: f64 = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            if let (Some(v), Some(expected)) = (conn.get(i, j), analytic(grid.point(i, j))) {
                max_err = max_err.max((v - expected).norm());
            }
        }
    }
    max_err
}

fn run_manybody(
    cfg: &ScenarioConfig,
    p: &crate::config::ManybodyParams,
    base: &Path,
    out_dir: &Path,
) -> RunResult<RunOutcome> {
    // statically checkable invariants first
    if let Some(probs) = &p.mixture {
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&x| x < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(RunError::validation(Error::InvalidEnsemble(format!(
                "mixture probabilities must be nonnegative and sum to 1 within 1e-12, got sum {total}"
            ))));
        }
        if probs.len() != 2 {
            return Err(RunError::validation(Error::InvalidEnsemble(format!(
                "the built-in mixture has exactly 2 members, got {} probabilities",
                probs.len()
            ))));
        }
        if !matches!(p.case, ManybodyCase::PlaneWave { .. }) {
            return Err(RunError::validation(Error::InvalidEnsemble(
                "mixtures are defined for the plane-wave case only".into(),
            )));
        }
    }
    if let Some((nx, ny, _)) = p.grid {
        if nx > crate::manybody::GRID_CAP_ONE_ELECTRON
            || ny > crate::manybody::GRID_CAP_ONE_ELECTRON
        {
            return Err(RunError::validation(Error::GridTooLarge {
                nx,
                ny,
                cap: crate::manybody::GRID_CAP_ONE_ELECTRON,
                n_electrons: 1,
            }));
        }
    }
    let builtin_grid = match p.grid {
        Some((nx, ny, h)) => Some(Grid2::centered(nx, ny, h).map_err(RunError::validation)?),
        None => None,
    };

    // builtin cases carry an analytic oracle and an exact half-phase;
    // loaded files carry neither
    let (case_name, psi, analytic, half_phase): (
        String,
        GridWaveFunction,
        Option<AnalyticConnection>,
        Option<Vec<Complex64>>,
    ) = match &p.case {
        ManybodyCase::PlaneWave { kx, ky, sigma } => {
            let grid = builtin_grid.expect("grid required by the parser");
            let k = Vec2::new(*kx, *ky);
            let psi = GridWaveFunction::gaussian_plane_wave(grid, k, Vec2::ZERO, *sigma)
                .map_err(RunError::validation)?;
            let mut phase = Vec::with_capacity(grid.n_nodes());
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    // the current-carrying factor is exp(i k . r)
                    phase.push(Complex64::from_polar(1.0, k.dot(grid.point(i, j))));
                }
            }
            (
                format!("plane-wave k = ({kx}, {ky})"),
                psi,
                Some(Box::new(move |_| Some(k)) as AnalyticConnection),
                Some(phase),
            )
        }
        ManybodyCase::Vortex { sigma } => {
            let grid = builtin_grid.expect("grid required by the parser");
            let psi = GridWaveFunction::vortex_phase_state(grid, Vec2::ZERO, *sigma)
                .map_err(RunError::validation)?;
            let mut phase = Vec::with_capacity(grid.n_nodes());
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    let r = grid.point(i, j);
                    phase.push(Complex64::from_polar(1.0, -r.y.atan2(r.x)));
                }
            }
            let sigma = *sigma;
            (
                "vortex".to_string(),
                psi,
                Some(Box::new(move |r: Vec2| {
                    let r_sq = r.norm_sq();
                    // compare away from the core, where the closed form
                    // is well conditioned
                    if r_sq > (3.0 * sigma / 4.0).powi(2) {
                        Some(Vec2::new(r.y, -r.x) * (1.0 / r_sq))
                    } else {
                        None
                    }
                }) as AnalyticConnection),
                Some(phase),
            )
        }
        ManybodyCase::File { path } => {
            let resolved = resolve(base, path);
            let file = fs::File::open(&resolved).map_err(|e| {
                RunError::parse(Error::Parse(format!("cannot open {resolved:?}: {e}")))
            })?;
            let psi = GridWaveFunction::read_binary(std::io::BufReader::new(file))
                .map_err(classify_input)?;
            (format!("file {}", path.display()), psi, None, None)
        }
    };

    let grid = psi.grid();
    let conn = berry_connection_mb(&psi);
    let max_connection_norm = conn.max_norm();
    let masked_nodes = conn.masked_count();
    let max_connection_error = analytic
        .as_ref()
        .map(|a| connection_error_vs(&conn, grid, a));
    let factorization_residual = match &half_phase {
        Some(phase) => Some(
            factorization_check(&psi, phase)
                .map_err(RunError::computation)?
                .max_residual,
        ),
        None => None,
    };

    let mixture = match (&p.mixture, &p.case) {
        (Some(probs), ManybodyCase::PlaneWave { kx, ky, sigma }) => {
            let k = Vec2::new(*kx, *ky);
            let minus = GridWaveFunction::gaussian_plane_wave(grid, -1.0 * k, Vec2::ZERO, *sigma)
                .map_err(RunError::validation)?;
            let ens = MixtureEnsemble::new(vec![
                EnsembleEntry {
                    member: MixtureMember::State(psi.clone()),
                    probability: probs[0],
                    energy: None,
                },
                EnsembleEntry {
                    member: MixtureMember::State(minus),
                    probability: probs[1],
                    energy: None,
                },
            ])
            .map_err(RunError::validation)?;
            let mixed = mixture_connection(&ens).map_err(RunError::computation)?;
            let expected = (probs[0] - probs[1]) * k;
            let err = connection_error_vs(&mixed, grid, |_| Some(expected));
            Some(MixtureSummary {
                probabilities: probs.clone(),
                max_error_vs_analytic: err,
            })
        }
        _ => None,
    };

    let summary = ManybodySummary {
        schema_version: SCHEMA_VERSION,
        command: cfg.command.as_str(),
        case: case_name.clone(),
        nx: grid.nx,
        ny: grid.ny,
        h: grid.h,
        n_electrons: psi.n_electrons(),
        max_connection_norm,
        masked_nodes,
        max_connection_error,
        factorization_residual,
        mixture,
    };
    let summary_path = write_summary(out_dir, &summary)?;
    let summary_line = match (max_connection_error, factorization_residual) {
        (Some(err), Some(resid)) => format!(
            "{case_name}: max |A - analytic| = {err:.3e}, factorization residual = {resid:.3e}"
        ),
        _ => format!(
            "{case_name}: {} electron(s) on {}x{}, max |A| = {max_connection_norm:.6e}, \
             {masked_nodes} masked nodes",
            psi.n_electrons(),
            grid.nx,
            grid.ny
        ),
    };
    Ok(RunOutcome {
        summary_line,
        summary_path,
        artifacts: Vec::new(),
    })
}

// ---------------------------------------------------------------------
// nernst
// ---------------------------------------------------------------------

#[derive(Serialize)]
struct NernstSummary {
    schema_version: u32,
    command: &'static str,
    seed: u64,
    realizations: usize,
    steps: usize,
    workers: usize,
    e_y_measured: f64,
    e_y_stderr: f64,
    e_y_predicted: f64,
    e_n_measured: Option<f64>,
    e_n_predicted: Option<f64>,
    crossings_merons: u64,
    crossings_antimerons: u64,
}

/// Writes the per-step EMF trace of every realization:
/// `realization,step,time,emf`. An empty ensemble still writes the
/// header.
pub fn write_emf_trace_csv(path: &Path, ensemble: &NernstEnsemble) -> crate::Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "realization,step,time,emf")?;
    for (r, result) in ensemble.results.iter().enumerate() {
        for (k, emf) in result.emf_samples.iter().enumerate() {
            writeln!(f, "{r},{k},{},{emf}", k as f64 * result.dt_used)?;
        }
    }
    Ok(())
}

/// Writes an `E_y` versus density-difference sweep:
/// `density_diff,n_antimeron,e_y_measured,e_y_stderr,e_y_predicted`.
pub fn write_nernst_sweep_csv(
    path: &Path,
    rows: &[(f64, f64, f64, f64, f64)],
) -> crate::Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(
        f,
        "density_diff,n_antimeron,e_y_measured,e_y_stderr,e_y_predicted"
    )?;
    for (diff, n_a, e_y, stderr, pred) in rows {
        writeln!(f, "{diff},{n_a},{e_y},{stderr},{pred}")?;
    }
    Ok(())
}

fn build_scenario(p: &NernstParams, seed: u64, units: UnitSystem) -> crate::Result<NernstScenario> {
    NernstScenario::new(
        Domain::new(p.lx, p.ly)?,
        p.n_meron,
        p.n_antimeron,
        p.v0,
        p.dt,
        p.steps,
        p.temperature_gradient,
        seed,
        p.loop_width,
        units,
    )
}

fn run_nernst_cmd(
    cfg: &ScenarioConfig,
    p: &NernstParams,
    units: UnitSystem,
    out_dir: &Path,
) -> RunResult<RunOutcome> {
    // stochastic command: an explicit seed is mandatory, never wall-clock
    let seed = cfg.common.seed.ok_or_else(|| {
        RunError::validation(Error::InvalidConfig(
            "nernst requires an explicit seed (config `seed =` or --seed)".into(),
        ))
    })?;
    let scenario = build_scenario(p, seed, units).map_err(RunError::validation)?;
    if let Some(diffs) = &p.sweep_density_diff {
        for diff in diffs {
            if p.n_meron + diff < 0.0 {
                return Err(RunError::validation(Error::InvalidConfig(format!(
                    "sweep offset {diff} drives n_antimeron = {} negative",
                    p.n_meron + diff
                ))));
            }
        }
    }

    let ensemble = run_ensemble(&scenario, p.realizations, cfg.common.workers)
        .map_err(RunError::computation)?;
    let signal = if p.temperature_gradient > 0.0 {
        Some(nernst_signal(ensemble.e_y_mean, &scenario).map_err(RunError::computation)?)
    } else {
        None
    };

    let trace_path = out_dir.join("emf_trace.csv");
    write_emf_trace_csv(&trace_path, &ensemble).map_err(RunError::computation)?;
    let mut artifacts = vec![trace_path];

    if let Some(diffs) = &p.sweep_density_diff {
        let mut rows = Vec::with_capacity(diffs.len());
        for &diff in diffs {
            let swept = NernstParams {
                n_antimeron: p.n_meron + diff,
                sweep_density_diff: None,
                ..p.clone()
            };
            let sc = build_scenario(&swept, seed, units).map_err(RunError::validation)?;
            let ens = run_ensemble(&sc, p.realizations, cfg.common.workers)
                .map_err(RunError::computation)?;
            rows.push((
                diff,
                swept.n_antimeron,
                ens.e_y_mean,
                ens.e_y_stderr,
                ens.e_y_predicted,
            ));
        }
        let sweep_path = out_dir.join("nernst_sweep.csv");
        write_nernst_sweep_csv(&sweep_path, &rows).map_err(RunError::computation)?;
        artifacts.push(sweep_path);
    }

    let summary = NernstSummary {
        schema_version: SCHEMA_VERSION,
        command: cfg.command.as_str(),
        seed,
        realizations: p.realizations,
        steps: p.steps,
        workers: cfg.common.workers,
        e_y_measured: ensemble.e_y_mean,
        e_y_stderr: ensemble.e_y_stderr,
        e_y_predicted: ensemble.e_y_predicted,
        e_n_measured: signal.map(|s| s.measured),
        e_n_predicted: signal.map(|s| s.predicted),
        crossings_merons: ensemble.crossings.merons,
        crossings_antimerons: ensemble.crossings.antimerons,
    };
    let summary_path = write_summary(out_dir, &summary)?;
    Ok(RunOutcome {
        summary_line: format!(
            "E_y = {:.6} +- {:.6} (predicted {:.6}) over {} realizations",
            ensemble.e_y_mean, ensemble.e_y_stderr, ensemble.e_y_predicted, p.realizations
        ),
        summary_path,
        artifacts,
    })
}
