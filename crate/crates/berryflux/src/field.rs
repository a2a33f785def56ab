//! Spin-vortex angular fields and the Berry-connection vector potential.
//!
//! A configuration of vortex cores with odd integer windings `w_j`
//! generates the multivalued angular field `chi = sum_j w_j theta_j`,
//! where `theta_j` is the polar angle around core `j`. The field is
//! represented only through its closed-form gradient
//!
//! ```text
//! grad chi(r) = sum_j w_j (-(y - y_j), x - x_j) / |r - r_j|^2
//! ```
//!
//! and its loop integrals; `chi` itself is never stored as a
//! single-valued scalar array. The Berry connection is the pointwise
//! scaling `A = -1/2 grad chi`. Both fields diverge at the cores, so
//! every core carries a hard exclusion disk of radius `eps_core`
//! (default `1e-6 * min(Lx, Ly)`): evaluation inside it is an error,
//! never a smoothed value.

use crate::error::{Error, Result};
use crate::geometry::{Domain, Vec2};
use crate::units::UnitSystem;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

/// Fraction of the shorter domain side used as the default core
/// exclusion radius.
pub const DEFAULT_EPS_CORE_FRACTION: f64 = 1e-6;

/// A single spin-vortex core: position and signed odd winding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VortexCore {
    pub position: Vec2,
    pub winding: i64,
}

impl VortexCore {
    pub fn new(x: f64, y: f64, winding: i64) -> Self {
        VortexCore {
            position: Vec2::new(x, y),
            winding,
        }
    }
}

/// Positions and windings of spin-vortex cores on a rectangular domain.
///
/// Invariants enforced at construction:
/// - every winding is an odd integer (generators in this crate emit only
///   `+1` and `-1`, but any odd value is admitted),
/// - all cores lie strictly inside the domain,
/// - no two cores coincide.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexConfig {
    domain: Domain,
    cores: Vec<VortexCore>,
    eps_core: f64,
}

impl VortexConfig {
    pub fn new(domain: Domain, cores: Vec<VortexCore>) -> Result<Self> {
        let eps = DEFAULT_EPS_CORE_FRACTION * domain.min_side();
        Self::with_eps_core(domain, cores, eps)
    }

    pub fn with_eps_core(domain: Domain, cores: Vec<VortexCore>, eps_core: f64) -> Result<Self> {
        if !eps_core.is_finite() || eps_core <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "eps_core must be finite and positive, got {eps_core}"
            )));
        }
        for (idx, core) in cores.iter().enumerate() {
            if core.winding % 2 == 0 {
                return Err(Error::InvalidConfig(format!(
                    "core {idx} has even winding {}; only odd windings are allowed",
                    core.winding
                )));
            }
            if !core.position.x.is_finite() || !core.position.y.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "core {idx} has a non-finite position {}",
                    core.position
                )));
            }
            if !domain.contains_strict(core.position) {
                return Err(Error::InvalidConfig(format!(
                    "core {idx} at {} is not strictly inside the {} x {} domain",
                    core.position, domain.lx, domain.ly
                )));
            }
        }
        for i in 0..cores.len() {
            for j in (i + 1)..cores.len() {
                if cores[i].position == cores[j].position {
                    return Err(Error::InvalidConfig(format!(
                        "cores {i} and {j} coincide at {}",
                        cores[i].position
                    )));
                }
            }
        }
        Ok(VortexConfig {
            domain,
            cores,
            eps_core,
        })
    }

    pub fn empty(domain: Domain) -> Self {
        VortexConfig {
            eps_core: DEFAULT_EPS_CORE_FRACTION * domain.min_side(),
            domain,
            cores: Vec::new(),
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn cores(&self) -> &[VortexCore] {
        &self.cores
    }

    pub fn eps_core(&self) -> f64 {
        self.eps_core
    }

    /// The same cores with every winding sign flipped.
    pub fn mirrored(&self) -> VortexConfig {
        VortexConfig {
            domain: self.domain,
            cores: self
                .cores
                .iter()
                .map(|c| VortexCore {
                    position: c.position,
                    winding: -c.winding,
                })
                .collect(),
            eps_core: self.eps_core,
        }
    }

    /// Concatenates the cores of two configurations on the same domain.
    pub fn union(&self, other: &VortexConfig) -> Result<VortexConfig> {
        if self.domain != other.domain {
            return Err(Error::InvalidConfig(
                "cannot union configurations on different domains".into(),
            ));
        }
        let mut cores = self.cores.clone();
        cores.extend_from_slice(&other.cores);
        VortexConfig::with_eps_core(self.domain, cores, self.eps_core.min(other.eps_core))
    }

    /// Parses the line-oriented text format: a `Lx Ly` header line, then
    /// one `x y w` triple per line. `#` starts a comment, blank lines are
    /// skipped.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut domain: Option<Domain> = None;
        let mut cores = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            let content = match line.split('#').next() {
                Some(c) => c.trim(),
                None => "",
            };
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if domain.is_none() {
                if fields.len() != 2 {
                    return Err(Error::Parse(format!(
                        "line {}: expected header `Lx Ly`, got `{content}`",
                        lineno + 1
                    )));
                }
                let lx = parse_f64(fields[0], lineno)?;
                let ly = parse_f64(fields[1], lineno)?;
                domain = Some(Domain::new(lx, ly)?);
            } else {
                if fields.len() != 3 {
                    return Err(Error::Parse(format!(
                        "line {}: expected `x y w`, got `{content}`",
                        lineno + 1
                    )));
                }
                let x = parse_f64(fields[0], lineno)?;
                let y = parse_f64(fields[1], lineno)?;
                let w: i64 = fields[2].parse().map_err(|_| {
                    Error::Parse(format!(
                        "line {}: winding `{}` is not an integer",
                        lineno + 1,
                        fields[2]
                    ))
                })?;
                cores.push(VortexCore::new(x, y, w));
            }
        }
        let domain =
            domain.ok_or_else(|| Error::Parse("missing `Lx Ly` header line".to_string()))?;
        VortexConfig::new(domain, cores)
    }

    pub fn to_writer<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# vortex configuration: `Lx Ly` header, then `x y w` per core"
        )?;
        writeln!(w, "{} {}", self.domain.lx, self.domain.ly)?;
        for core in &self.cores {
            writeln!(
                w,
                "{} {} {}",
                core.position.x, core.position.y, core.winding
            )?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_reader(std::io::BufReader::new(file))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        self.to_writer(&mut file)
    }
}

fn parse_f64(s: &str, lineno: usize) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::Parse(format!("line {}: `{s}` is not a number", lineno + 1)))
}

type VecEval = dyn Fn(Vec2) -> Result<Vec2> + Send + Sync;
type ScalarEval = dyn Fn(Vec2) -> Result<f64> + Send + Sync;

/// A vector field over the plane: an evaluator plus the list of points
/// where evaluation is undefined. Evaluation within `eps_core` of a
/// singular point is an error. Immutable and cheap to clone; safe to
/// evaluate from concurrent workers.
#[derive(Clone)]
pub struct VectorField2D {
    eval: Arc<VecEval>,
    singular_points: Arc<Vec<Vec2>>,
    eps_core: f64,
}

impl VectorField2D {
    pub fn analytic(eval: impl Fn(Vec2) -> Result<Vec2> + Send + Sync + 'static) -> Self {
        VectorField2D {
            eval: Arc::new(eval),
            singular_points: Arc::new(Vec::new()),
            eps_core: 0.0,
        }
    }

    pub fn with_singular_points(mut self, points: Vec<Vec2>, eps_core: f64) -> Self {
        self.singular_points = Arc::new(points);
        self.eps_core = eps_core;
        self
    }

    pub fn constant(v: Vec2) -> Self {
        Self::analytic(move |_| Ok(v))
    }

    pub fn zero() -> Self {
        Self::constant(Vec2::ZERO)
    }

    pub fn singular_points(&self) -> &[Vec2] {
        &self.singular_points
    }

    pub fn eps_core(&self) -> f64 {
        self.eps_core
    }

    /// Evaluates the field, refusing points inside any exclusion disk.
    pub fn evaluate(&self, p: Vec2) -> Result<Vec2> {
        for &s in self.singular_points.iter() {
            let d = p.distance(s);
            if d <= self.eps_core {
                return Err(Error::SingularEvaluation {
                    point: p,
                    singular: s,
                    eps: self.eps_core,
                });
            }
        }
        (self.eval)(p)
    }

    /// Pointwise scaling by a constant.
    pub fn scaled(&self, factor: f64) -> Self {
        let inner = self.clone();
        VectorField2D {
            eval: Arc::new(move |p| Ok(inner.evaluate(p)? * factor)),
            singular_points: Arc::clone(&self.singular_points),
            eps_core: self.eps_core,
        }
    }

    /// Pointwise sum; singular points of both operands are kept.
    pub fn add(&self, other: &VectorField2D) -> Self {
        let a = self.clone();
        let b = other.clone();
        let mut singular: Vec<Vec2> = self.singular_points.to_vec();
        singular.extend_from_slice(&other.singular_points);
        let eps = self.eps_core.max(other.eps_core);
        VectorField2D {
            eval: Arc::new(move |p| Ok(a.evaluate(p)? + b.evaluate(p)?)),
            singular_points: Arc::new(singular),
            eps_core: eps,
        }
    }
}

/// A scalar field over the plane, same evaluation contract as
/// [`VectorField2D`].
#[derive(Clone)]
pub struct ScalarField2D {
    eval: Arc<ScalarEval>,
    singular_points: Arc<Vec<Vec2>>,
    eps_core: f64,
}

impl ScalarField2D {
    pub fn analytic(eval: impl Fn(Vec2) -> Result<f64> + Send + Sync + 'static) -> Self {
        ScalarField2D {
            eval: Arc::new(eval),
            singular_points: Arc::new(Vec::new()),
            eps_core: 0.0,
        }
    }

    pub fn constant(v: f64) -> Self {
        Self::analytic(move |_| Ok(v))
    }

    pub fn evaluate(&self, p: Vec2) -> Result<f64> {
        for &s in self.singular_points.iter() {
            let d = p.distance(s);
            if d <= self.eps_core {
                return Err(Error::SingularEvaluation {
                    point: p,
                    singular: s,
                    eps: self.eps_core,
                });
            }
        }
        (self.eval)(p)
    }
}

/// Closed-form gradient of the total angular field `chi`:
/// `grad chi(r) = sum_j w_j (-(y - y_j), x - x_j) / |r - r_j|^2`.
///
/// The returned field is curl-free away from the cores and carries the
/// core positions as singular points.
pub fn chi_gradient(config: &VortexConfig) -> VectorField2D {
    let cores: Arc<Vec<VortexCore>> = Arc::new(config.cores.clone());
    let singular: Vec<Vec2> = cores.iter().map(|c| c.position).collect();
    let eps = config.eps_core;
    let cores_eval = Arc::clone(&cores);
    VectorField2D::analytic(move |p: Vec2| {
        let mut out = Vec2::ZERO;
        for core in cores_eval.iter() {
            let d = p - core.position;
            let r_sq = d.norm_sq();
            let w = core.winding as f64;
            out += Vec2::new(-d.y, d.x) * (w / r_sq);
        }
        Ok(out)
    })
    .with_singular_points(singular, eps)
}

/// Berry-connection vector potential of a spin-vortex configuration,
/// `A(r) = -1/2 grad chi(r)`, with the same singular points.
pub fn berry_connection_field(config: &VortexConfig) -> VectorField2D {
    chi_gradient(config).scaled(-0.5)
}

/// Velocity field `v(r) = (e / m_e) a_em(r) + (hbar / m_e) a_mb(r)`
/// combining the electromagnetic vector potential and the Berry
/// connection. Singular points of either operand propagate.
pub fn velocity_field(
    a_em: &VectorField2D,
    a_mb: &VectorField2D,
    units: &UnitSystem,
) -> VectorField2D {
    a_em.scaled(units.e / units.m_e)
        .add(&a_mb.scaled(units.hbar / units.m_e))
}

/// Current density `j(r) = -e rho(r) v(r)`. Evaluation fails with
/// [`Error::InvalidDensity`] wherever the density is negative.
pub fn current_density(
    rho: &ScalarField2D,
    v: &VectorField2D,
    units: &UnitSystem,
) -> VectorField2D {
    let rho = rho.clone();
    let vel = v.clone();
    let e = units.e;
    VectorField2D::analytic(move |p| {
        let r = rho.evaluate(p)?;
        if r < 0.0 {
            return Err(Error::InvalidDensity { rho: r, point: p });
        }
        Ok(vel.evaluate(p)? * (-e * r))
    })
    .with_singular_points(v.singular_points().to_vec(), v.eps_core())
}
