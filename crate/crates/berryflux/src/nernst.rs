//! Monte Carlo reproduction of the Nernst signal from a spin-vortex gas.
//!
//! A realization draws a static gas of meron (`w = +1`) and antimeron
//! (`w = -1`) cores from two independent homogeneous Poisson processes,
//! then drifts a full-height measurement loop across it. Per step, the
//! EMF is the quantized flux swept past the loop's trailing (left) edge:
//! the strip between consecutive left-edge positions carries winding sum
//! `w_strip`, and
//!
//! ```text
//! E_step = -(pi hbar / e) w_strip / dt
//! ```
//!
//! so every sample is an exact integer multiple of `pi hbar / (e dt)`.
//! The ensemble mean of `E_y = mean EMF / L_y` reproduces the
//! closed-form `h v0 (n_a - n_m) / (2 e)`, and the Nernst signal is that
//! field divided by the imposed temperature-gradient magnitude.
//!
//! A rigid loop gains cores through its leading edge and loses them
//! through its trailing edge, so differencing full-loop enclosures
//! telescopes to zero over any trajectory; the swept-strip census is the
//! discretization that actually measures the transported flux. The loop
//! width therefore never enters the EMF, only the requirement that the
//! loop stay inside the domain.
//!
//! Everything is seeded: a realization is a pure function of
//! `(scenario, seed, realization index)`, and ensemble aggregation is
//! performed in realization order regardless of the worker count.

use crate::error::{Error, Result};
use crate::field::{VortexConfig, VortexCore};
use crate::geometry::Domain;
use crate::topology::{enclosed_cores, PolyLoop};
use crate::units::UnitSystem;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Hard cap on the expected number of sampled cores.
pub const MAX_EXPECTED_CORES: f64 = 1e7;

/// Relative `dt` perturbation applied when a census step lands a core on
/// a strip boundary.
const DT_RETRY_FACTOR: f64 = 1e-3;

/// Exclusion-band fraction for sampled gases. The drift census is pure
/// point-in-polygon (no quadrature ever approaches a core), so the band
/// only guards true boundary coincidences. At the field-module default
/// of 1e-6 a realization of the stock scenario trips the band with
/// probability ~0.1 by chance alone, which the retry-once contract
/// cannot absorb across large ensembles.
pub const GAS_EPS_CORE_FRACTION: f64 = 1e-12;

/// Declarative description of one Nernst run.
#[derive(Debug, Clone, PartialEq)]
pub struct NernstScenario {
    pub domain: Domain,
    /// Mean areal density of `w = +1` cores (merons).
    pub n_meron: f64,
    /// Mean areal density of `w = -1` cores (antimerons).
    pub n_antimeron: f64,
    /// Drift speed of the loop along `+x`.
    pub v0: f64,
    /// Time step.
    pub dt: f64,
    pub n_steps: usize,
    /// Magnitude of the imposed temperature gradient `|dT/dx|`
    /// (reporting scalar; the drift speed is an input, not derived).
    pub temperature_gradient: f64,
    pub seed: u64,
    /// Width of the measurement loop; defaults to `Lx / 10`.
    pub loop_width: f64,
    pub units: UnitSystem,
}

impl NernstScenario {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        domain: Domain,
        n_meron: f64,
        n_antimeron: f64,
        v0: f64,
        dt: f64,
        n_steps: usize,
        temperature_gradient: f64,
        seed: u64,
        loop_width: Option<f64>,
        units: UnitSystem,
    ) -> Result<Self> {
        for (name, v) in [("n_meron", n_meron), ("n_antimeron", n_antimeron)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        if !v0.is_finite() || v0 <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "drift speed must be positive, got {v0}"
            )));
        }
        if !dt.is_finite() || dt <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if !temperature_gradient.is_finite() || temperature_gradient < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "temperature gradient must be finite and nonnegative, got {temperature_gradient}"
            )));
        }
        let loop_width = loop_width.unwrap_or(domain.lx / 10.0);
        if loop_width.is_nan() || loop_width <= 0.0 || loop_width >= domain.lx {
            return Err(Error::InvalidConfig(format!(
                "loop width {loop_width} must lie in (0, Lx)"
            )));
        }
        // the bound holds even for a run retried at the stretched dt
        let travel = dt * (1.0 + DT_RETRY_FACTOR) * v0 * n_steps as f64 + loop_width;
        if travel > domain.lx {
            return Err(Error::InvalidConfig(format!(
                "loop exits the domain: v0 dt n_steps + width = {travel} > Lx = {}",
                domain.lx
            )));
        }
        Ok(NernstScenario {
            domain,
            n_meron,
            n_antimeron,
            v0,
            dt,
            n_steps,
            temperature_gradient,
            seed,
            loop_width,
            units,
        })
    }

    /// Largest `dt` resolving individual crossing events: expected
    /// crossings per step at most 1/4.
    pub fn suggested_dt(n_max: f64, ly: f64, v0: f64) -> f64 {
        if n_max > 0.0 {
            1.0 / (4.0 * n_max * ly * v0)
        } else {
            0.0125
        }
    }

    /// The stock scenario used throughout the docs and the acceptance
    /// suite: 10 x 10 domain, densities (1, 2), unit drift, dt = 1/80,
    /// 700 steps, unit gradient, natural units.
    pub fn baseline(seed: u64) -> Self {
        NernstScenario::new(
            Domain::new(10.0, 10.0).unwrap(),
            1.0,
            2.0,
            1.0,
            0.0125,
            700,
            1.0,
            seed,
            None,
            UnitSystem::natural(),
        )
        .expect("baseline scenario is valid")
    }

    /// Closed-form prediction `E_y = h v0 (n_a - n_m) / (2 e)`.
    pub fn predicted_e_y(&self) -> f64 {
        self.units.h() * self.v0 * (self.n_antimeron - self.n_meron) / (2.0 * self.units.e)
    }
}

/// Numbers of merons and antimerons swept past the measurement edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CrossingCounts {
    pub merons: u64,
    pub antimerons: u64,
}

/// Per-realization output of [`run_nernst`].
#[derive(Debug, Clone, PartialEq)]
pub struct NernstResult {
    /// Per-step EMF samples; each is an exact multiple of
    /// `pi hbar / (e dt_used)`.
    pub emf_samples: Vec<f64>,
    /// Winding sum swept per step (the quantum count behind each sample).
    pub swept_windings: Vec<i64>,
    /// Step length actually used: the scenario `dt`, or `dt (1 + 1e-3)`
    /// when the run was retried after a boundary-ambiguous census.
    pub dt_used: f64,
    /// Transverse field `mean EMF / L_y`.
    pub e_y_mean: f64,
    /// Standard error of the per-step mean, divided by `L_y`.
    pub e_y_stderr: f64,
    /// Nernst signal `E_y / |dT/dx|`; `None` when the scenario gradient
    /// is zero.
    pub e_n: Option<f64>,
    pub crossings: CrossingCounts,
}

/// Measured and predicted Nernst signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NernstSignal {
    pub measured: f64,
    pub predicted: f64,
}

/// Draws a static vortex gas: two independent homogeneous Poisson point
/// processes with intensities `n_meron` (`w = +1`) and `n_antimeron`
/// (`w = -1`) on the open domain. Deterministic for a given RNG state.
///
/// Positions within `eps_core` of the `y = 0` or `y = Ly` edges are
/// resampled so the full-height census stays well defined, and exact
/// duplicates are resampled to keep cores distinct.
pub fn sample_vortex_gas(scenario: &NernstScenario, rng: &mut ChaCha8Rng) -> Result<VortexConfig> {
    let d = scenario.domain;
    let expected = (scenario.n_meron + scenario.n_antimeron) * d.area();
    if expected > MAX_EXPECTED_CORES {
        return Err(Error::ScenarioTooLarge {
            expected,
            limit: MAX_EXPECTED_CORES,
        });
    }
    let eps = GAS_EPS_CORE_FRACTION * d.min_side();
    let mut cores: Vec<VortexCore> = Vec::new();
    for (density, winding) in [(scenario.n_meron, 1i64), (scenario.n_antimeron, -1i64)] {
        let lambda = density * d.area();
        let count = if lambda > 0.0 {
            Poisson::new(lambda)
                .map_err(|e| Error::InvalidConfig(format!("bad Poisson intensity: {e}")))?
                .sample(rng) as usize
        } else {
            0
        };
        for _ in 0..count {
            loop {
                let x = rng.random_range(0.0..d.lx);
                let y = rng.random_range(0.0..d.ly);
                let p = crate::geometry::Vec2::new(x, y);
                let near_y_edge = y <= eps || y >= d.ly - eps;
                let duplicate = cores.iter().any(|c| c.position == p);
                if d.contains_strict(p) && !near_y_edge && !duplicate {
                    cores.push(VortexCore {
                        position: p,
                        winding,
                    });
                    break;
                }
            }
        }
    }
    VortexConfig::with_eps_core(d, cores, eps)
}

fn strip_census(config: &VortexConfig, x0: f64, x1: f64, ly: f64) -> Result<(i64, CrossingCounts)> {
    let strip = PolyLoop::rectangle(x0, 0.0, x1, ly)?;
    let inside = enclosed_cores(config, &strip)?;
    let mut counts = CrossingCounts::default();
    let mut w_sum = 0i64;
    for core in inside {
        w_sum += core.winding;
        if core.winding > 0 {
            counts.merons += 1;
        } else {
            counts.antimerons += 1;
        }
    }
    Ok((w_sum, counts))
}

fn drift_attempt(
    scenario: &NernstScenario,
    config: &VortexConfig,
    dt_used: f64,
) -> Result<NernstResult> {
    let ly = scenario.domain.ly;
    let emf_quantum = PI * scenario.units.hbar / scenario.units.e;
    let mut emf_samples = Vec::with_capacity(scenario.n_steps);
    let mut swept_windings = Vec::with_capacity(scenario.n_steps);
    let mut crossings = CrossingCounts::default();
    for k in 0..scenario.n_steps {
        let x0 = k as f64 * scenario.v0 * dt_used;
        let x1 = (k + 1) as f64 * scenario.v0 * dt_used;
        let (w_strip, counts) = strip_census(config, x0, x1, ly)?;
        emf_samples.push(-emf_quantum * w_strip as f64 / dt_used);
        swept_windings.push(w_strip);
        crossings.merons += counts.merons;
        crossings.antimerons += counts.antimerons;
    }
    let n = emf_samples.len();
    let mean = if n == 0 {
        0.0
    } else {
        emf_samples.iter().sum::<f64>() / n as f64
    };
    let stderr = if n < 2 {
        0.0
    } else {
        let var = emf_samples.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    let e_y_mean = mean / ly;
    let e_n = if scenario.temperature_gradient > 0.0 {
        Some(e_y_mean / scenario.temperature_gradient)
    } else {
        None
    };
    Ok(NernstResult {
        emf_samples,
        swept_windings,
        dt_used,
        e_y_mean,
        e_y_stderr: stderr / ly,
        e_n,
        crossings,
    })
}

/// Runs the drift over a fixed, externally supplied gas realization.
///
/// Step `k` sweeps the loop's left edge from `x_k` to `x_k + v0 dt`; the
/// EMF is `-(pi hbar / e) w_strip / dt` from the census of that strip.
/// A core within `eps_core` of a strip boundary makes that census
/// ambiguous; the whole trajectory is then retried once with the step
/// stretched to `dt (1 + 1e-3)`, which shifts the k-th strip edge by
/// `k v0 dt 1e-3` and clears the ambiguity band everywhere past the
/// first steps. A second ambiguity is an error. The per-step mean is
/// unbiased under either step length.
pub fn run_nernst_with_config(
    scenario: &NernstScenario,
    config: &VortexConfig,
) -> Result<NernstResult> {
    match drift_attempt(scenario, config, scenario.dt) {
        Err(Error::AmbiguousEnclosure { .. }) => {
            drift_attempt(scenario, config, scenario.dt * (1.0 + DT_RETRY_FACTOR))
        }
        other => other,
    }
}

/// One full realization: samples a gas from the scenario seed and runs
/// the drift over it.
pub fn run_nernst(scenario: &NernstScenario) -> Result<NernstResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let config = sample_vortex_gas(scenario, &mut rng)?;
    run_nernst_with_config(scenario, &config)
}

fn run_realization(scenario: &NernstScenario, index: u64) -> Result<NernstResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(index);
    let config = sample_vortex_gas(scenario, &mut rng)?;
    run_nernst_with_config(scenario, &config)
}

/// Ensemble statistics over independent realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct NernstEnsemble {
    pub results: Vec<NernstResult>,
    pub e_y_values: Vec<f64>,
    /// Mean of the per-realization `E_y` values.
    pub e_y_mean: f64,
    /// Standard error of that mean over realizations.
    pub e_y_stderr: f64,
    pub e_y_predicted: f64,
    pub crossings: CrossingCounts,
}

/// Runs `realizations` independent gases with RNG streams derived from
/// the scenario seed (stream `i` for realization `i`), on `workers`
/// threads. Aggregation is by realization index, so the output is
/// bit-identical for any worker count.
pub fn run_ensemble(
    scenario: &NernstScenario,
    realizations: usize,
    workers: usize,
) -> Result<NernstEnsemble> {
    let run_all = || -> Result<Vec<NernstResult>> {
        (0..realizations as u64)
            .into_par_iter()
            .map(|i| run_realization(scenario, i))
            .collect()
    };
    let results = if workers <= 1 {
        (0..realizations as u64)
            .map(|i| run_realization(scenario, i))
            .collect::<Result<Vec<_>>>()?
    } else {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("worker pool: {e}")))?
            .install(run_all)?
    };
    let e_y_values: Vec<f64> = results.iter().map(|r| r.e_y_mean).collect();
    let n = e_y_values.len();
    let mean = if n == 0 {
        0.0
    } else {
        e_y_values.iter().sum::<f64>() / n as f64
    };
    let stderr = if n < 2 {
        0.0
    } else {
        let var = e_y_values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    let mut crossings = CrossingCounts::default();
    for r in &results {
        crossings.merons += r.crossings.merons;
        crossings.antimerons += r.crossings.antimerons;
    }
    Ok(NernstEnsemble {
        e_y_values,
        e_y_mean: mean,
        e_y_stderr: stderr,
        e_y_predicted: scenario.predicted_e_y(),
        crossings,
        results,
    })
}

/// Nernst signal `e_N = E_y / |dT/dx|` from a measured transverse field,
/// together with the closed-form prediction
/// `h v0 (n_d - n_p) / (2 e |dT/dx|)`, identifying the antimeron density
/// with `n_d` and the meron density with `n_p`.
pub fn nernst_signal(e_y_mean: f64, scenario: &NernstScenario) -> Result<NernstSignal> {
    if scenario.temperature_gradient <= 0.0 {
        return Err(Error::InvalidGradient);
    }
    Ok(NernstSignal {
        measured: e_y_mean / scenario.temperature_gradient,
        predicted: scenario.predicted_e_y() / scenario.temperature_gradient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn scenario(n_m: f64, n_a: f64, seed: u64) -> NernstScenario {
        NernstScenario::new(
            Domain::new(10.0, 10.0).unwrap(),
            n_m,
            n_a,
            1.0,
            0.0125,
            240,
            1.0,
            seed,
            None,
            UnitSystem::natural(),
        )
        .unwrap()
    }

    #[test]
    fn empty_gas_for_zero_densities() {
        let sc = scenario(0.0, 0.0, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
        let cfg = sample_vortex_gas(&sc, &mut rng).unwrap();
        assert!(cfg.cores().is_empty());
        let res = run_nernst(&sc).unwrap();
        assert_eq!(res.e_y_mean, 0.0);
        assert!(res.emf_samples.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn sampled_windings_are_unit_and_labeled() {
        let sc = scenario(1.0, 2.0, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
        let cfg = sample_vortex_gas(&sc, &mut rng).unwrap();
        assert!(!cfg.cores().is_empty());
        assert!(cfg
            .cores()
            .iter()
            .all(|c| c.winding == 1 || c.winding == -1));
        // strictly inside, outside the y ambiguity band
        let eps = cfg.eps_core();
        for c in cfg.cores() {
            assert!(c.position.y > eps && c.position.y < 10.0 - eps);
            assert!(c.position.x > 0.0 && c.position.x < 10.0);
        }
    }

    #[test]
    fn poisson_count_statistics() {
        // lambda = n_m Lx Ly = 100; the mean of 1000 draws has standard
        // deviation sqrt(100/1000), so a 3-sigma window is +-0.95
        let sc = scenario(1.0, 0.0, 20260809);
        let mut total = 0usize;
        let draws = 1000;
        for i in 0..draws {
            let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
            rng.set_stream(i);
            total += sample_vortex_gas(&sc, &mut rng).unwrap().cores().len();
        }
        let mean = total as f64 / draws as f64;
        assert!(
            (mean - 100.0).abs() < 0.95,
            "sample mean {mean} outside 100 +- 0.95"
        );
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let sc = scenario(1.0, 2.0, 99);
        let mut r1 = ChaCha8Rng::seed_from_u64(sc.seed);
        let mut r2 = ChaCha8Rng::seed_from_u64(sc.seed);
        let a = sample_vortex_gas(&sc, &mut r1).unwrap();
        let b = sample_vortex_gas(&sc, &mut r2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scenario_too_large_rejected() {
        let sc = NernstScenario::new(
            Domain::new(10.0, 10.0).unwrap(),
            1e6,
            1e6,
            1.0,
            1e-9,
            1,
            1.0,
            0,
            None,
            UnitSystem::natural(),
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_vortex_gas(&sc, &mut rng).unwrap_err(),
            Error::ScenarioTooLarge { .. }
        ));
    }

    #[test]
    fn scenario_invariants_rejected() {
        let d = Domain::new(10.0, 10.0).unwrap();
        let u = UnitSystem::natural();
        // negative density
        assert!(NernstScenario::new(d, -1.0, 1.0, 1.0, 0.01, 10, 1.0, 0, None, u).is_err());
        // zero drift
        assert!(NernstScenario::new(d, 1.0, 1.0, 0.0, 0.01, 10, 1.0, 0, None, u).is_err());
        // loop exits the domain
        assert!(NernstScenario::new(d, 1.0, 1.0, 1.0, 0.1, 100, 1.0, 0, None, u).is_err());
        // oversized loop width
        assert!(NernstScenario::new(d, 1.0, 1.0, 1.0, 0.01, 10, 1.0, 0, Some(10.0), u).is_err());
    }

    #[test]
    fn single_species_events_share_one_sign() {
        let sc = scenario(0.0, 1.5, 5);
        let res = run_nernst(&sc).unwrap();
        assert!(res.crossings.antimerons > 0);
        assert_eq!(res.crossings.merons, 0);
        // every antimeron sweep pushes the EMF the same way: positive
        assert!(res.emf_samples.iter().all(|&e| e >= 0.0));
        assert!(res.emf_samples.iter().any(|&e| e > 0.0));
    }

    #[test]
    fn every_sample_is_quantized() {
        let sc = scenario(1.0, 2.0, 13);
        let res = run_nernst(&sc).unwrap();
        for (&emf, &w) in res.emf_samples.iter().zip(&res.swept_windings) {
            // census construction makes this exact
            assert_eq!(emf, -PI * w as f64 / res.dt_used);
        }
    }

    #[test]
    fn boundary_core_triggers_one_retry() {
        let d = Domain::new(10.0, 10.0).unwrap();
        let sc = NernstScenario::new(
            d,
            0.0,
            0.0,
            1.0,
            0.1,
            5,
            1.0,
            0,
            Some(1.0),
            UnitSystem::natural(),
        )
        .unwrap();
        // core exactly on the k = 2 strip edge of the unperturbed grid
        let cfg = VortexConfig::with_eps_core(d, vec![VortexCore::new(0.2, 5.0, 1)], 1e-5).unwrap();
        let res = run_nernst_with_config(&sc, &cfg).unwrap();
        assert_eq!(res.dt_used, 0.1 * 1.001);
        assert_eq!(res.crossings.merons, 1);

        // a second core sitting exactly on a perturbed-grid edge defeats
        // the retry as well
        let cfg = VortexConfig::with_eps_core(
            d,
            vec![
                VortexCore::new(0.2, 5.0, 1),
                VortexCore::new(3.0 * 0.1 * 1.001, 4.0, -1),
            ],
            1e-5,
        )
        .unwrap();
        assert!(matches!(
            run_nernst_with_config(&sc, &cfg).unwrap_err(),
            Error::AmbiguousEnclosure { .. }
        ));
    }

    #[test]
    fn mirrored_gas_negates_every_sample() {
        let sc = scenario(1.0, 2.0, 21);
        let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
        let cfg = sample_vortex_gas(&sc, &mut rng).unwrap();
        let fwd = run_nernst_with_config(&sc, &cfg).unwrap();
        let rev = run_nernst_with_config(&sc, &cfg.mirrored()).unwrap();
        assert_eq!(fwd.emf_samples.len(), rev.emf_samples.len());
        for (a, b) in fwd.emf_samples.iter().zip(&rev.emf_samples) {
            assert_eq!(*a, -*b);
        }
        assert_relative_eq!(fwd.e_y_mean, -rev.e_y_mean);
        assert_eq!(fwd.crossings.merons, rev.crossings.antimerons);
        assert_eq!(fwd.crossings.antimerons, rev.crossings.merons);
    }

    #[test]
    fn emf_is_independent_of_loop_width() {
        // the EMF counts only trailing-edge sweeps; two widths give
        // identical traces for the same gas
        let d = Domain::new(10.0, 10.0).unwrap();
        let u = UnitSystem::natural();
        let narrow =
            NernstScenario::new(d, 1.0, 2.0, 1.0, 0.0125, 240, 1.0, 3, Some(0.5), u).unwrap();
        let wide =
            NernstScenario::new(d, 1.0, 2.0, 1.0, 0.0125, 240, 1.0, 3, Some(4.0), u).unwrap();
        let a = run_nernst(&narrow).unwrap();
        let b = run_nernst(&wide).unwrap();
        assert_eq!(a.emf_samples, b.emf_samples);
    }

    #[test]
    fn ensemble_mean_matches_prediction_loosely() {
        // small smoke ensemble; the full 200-realization version lives in
        // the acceptance suite
        let sc = scenario(1.0, 2.0, 42);
        let ens = run_ensemble(&sc, 60, 1).unwrap();
        assert_relative_eq!(ens.e_y_predicted, PI);
        assert!(
            (ens.e_y_mean - PI).abs() < 4.0 * ens.e_y_stderr,
            "mean {} stderr {}",
            ens.e_y_mean,
            ens.e_y_stderr
        );
    }

    #[test]
    fn ensemble_is_reproducible_across_worker_counts() {
        let sc = scenario(1.0, 2.0, 8);
        let serial = run_ensemble(&sc, 12, 1).unwrap();
        let parallel = run_ensemble(&sc, 12, 4).unwrap();
        assert_eq!(serial.e_y_values, parallel.e_y_values);
        assert_eq!(serial.e_y_mean, parallel.e_y_mean);
    }

    #[test]
    fn signal_examples() {
        let sc = scenario(1.0, 2.0, 0);
        // E_y = 0 -> e_N = 0
        let s = nernst_signal(0.0, &sc).unwrap();
        assert_eq!(s.measured, 0.0);
        // natural units, v0 = 1, n_a - n_m = 1, |dT/dx| = 1:
        // prediction h/2e = pi
        assert_relative_eq!(s.predicted, PI);

        // doubling the gradient halves the signal
        let steep = NernstScenario {
            temperature_gradient: 2.0,
            ..sc.clone()
        };
        let s2 = nernst_signal(1.0, &steep).unwrap();
        let s1 = nernst_signal(1.0, &sc).unwrap();
        assert_relative_eq!(s2.measured, 0.5 * s1.measured);

        let flat = NernstScenario {
            temperature_gradient: 0.0,
            ..sc
        };
        assert!(matches!(
            nernst_signal(1.0, &flat).unwrap_err(),
            Error::InvalidGradient
        ));
    }

    #[test]
    fn density_swap_negates_the_mean() {
        // the exact per-realization statement is the label mirror
        // (above); the density swap holds at the ensemble level
        let fwd = scenario(0.5, 1.5, 31);
        let rev = scenario(1.5, 0.5, 31);
        let ef = run_ensemble(&fwd, 80, 1).unwrap();
        let er = run_ensemble(&rev, 80, 1).unwrap();
        assert_relative_eq!(ef.e_y_predicted, -er.e_y_predicted);
        let diff = ef.e_y_mean + er.e_y_mean;
        let sigma = (ef.e_y_stderr.powi(2) + er.e_y_stderr.powi(2)).sqrt();
        assert!(
            diff.abs() < 3.0 * sigma,
            "swap asymmetry {diff} vs 3 sigma {}",
            3.0 * sigma
        );
    }

    #[test]
    fn drift_scaling_is_linear() {
        let d = Domain::new(10.0, 10.0).unwrap();
        let u = UnitSystem::natural();
        let slow =
            NernstScenario::new(d, 0.5, 1.5, 0.5, 0.025, 240, 1.0, 77, Some(1.0), u).unwrap();
        let fast =
            NernstScenario::new(d, 0.5, 1.5, 1.0, 0.0125, 240, 1.0, 77, Some(1.0), u).unwrap();
        let es = run_ensemble(&slow, 80, 1).unwrap();
        let ef = run_ensemble(&fast, 80, 1).unwrap();
        let diff = ef.e_y_mean - 2.0 * es.e_y_mean;
        let sigma = (ef.e_y_stderr.powi(2) + 4.0 * es.e_y_stderr.powi(2)).sqrt();
        assert!(
            diff.abs() < 3.0 * sigma,
            "scaling violation: {diff} vs 3 sigma {}",
            3.0 * sigma
        );
    }

    #[test]
    fn empty_run_is_well_defined() {
        let sc = NernstScenario::new(
            Domain::new(10.0, 10.0).unwrap(),
            1.0,
            1.0,
            1.0,
            0.01,
            0,
            1.0,
            0,
            None,
            UnitSystem::natural(),
        )
        .unwrap();
        let res = run_nernst(&sc).unwrap();
        assert!(res.emf_samples.is_empty());
        assert_eq!(res.e_y_mean, 0.0);
        assert_eq!(res.e_y_stderr, 0.0);
    }
}
