//! Loop geometry, line integrals, and topological quantization checks.
//!
//! Winding numbers are computed two ways that must agree:
//!
//! - an exact geometric census (point-in-polygon over the vortex cores),
//!   which is the ground truth, and
//! - adaptive quadrature of the loop integral, which validates that the
//!   field machinery actually reproduces the quantized values.
//!
//! Cores within `eps_core` of a loop edge make the census ambiguous and
//! are a hard error; quantized quantities jump there and a silent
//! tie-break would corrupt every statistic built on top.

use crate::error::{Error, Result};
use crate::field::{berry_connection_field, chi_gradient, VectorField2D, VortexConfig, VortexCore};
use crate::geometry::{point_segment_distance, segments_intersect, Vec2};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{BufRead, Write};
use std::path::Path;

/// Maximum bisection depth of the adaptive segment quadrature.
pub const MAX_QUAD_DEPTH: usize = 40;

/// An ordered, closed, simple polygon in the plane. The closing edge
/// from the last vertex back to the first is implied. Counterclockwise
/// vertex order is positive orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyLoop {
    vertices: Vec<Vec2>,
}

impl PolyLoop {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidLoop(format!(
                "need at least 3 vertices, got {}",
                vertices.len()
            )));
        }
        for (i, v) in vertices.iter().enumerate() {
            if !v.x.is_finite() || !v.y.is_finite() {
                return Err(Error::InvalidLoop(format!("vertex {i} is not finite")));
            }
        }
        let n = vertices.len();
        for i in 0..n {
            for j in (i + 1)..n {
                if vertices[i] == vertices[j] {
                    return Err(Error::InvalidLoop(format!(
                        "vertices {i} and {j} coincide at {}",
                        vertices[i]
                    )));
                }
            }
        }
        // non-adjacent edges must not touch (simple polygon)
        for i in 0..n {
            let (a1, a2) = (vertices[i], vertices[(i + 1) % n]);
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                let (b1, b2) = (vertices[j], vertices[(j + 1) % n]);
                if segments_intersect(a1, a2, b1, b2) {
                    return Err(Error::InvalidLoop(format!(
                        "edges {i} and {j} intersect; the polygon is not simple"
                    )));
                }
            }
        }
        let loop_ = PolyLoop { vertices };
        if loop_.signed_area() == 0.0 {
            return Err(Error::InvalidLoop("polygon has zero signed area".into()));
        }
        Ok(loop_)
    }

    /// Axis-aligned rectangle with counterclockwise orientation.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        PolyLoop::new(vec![
            Vec2::new(x0, y0),
            Vec2::new(x1, y0),
            Vec2::new(x1, y1),
            Vec2::new(x0, y1),
        ])
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    /// Edges including the implied closing one.
    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Shoelace signed area; positive for counterclockwise loops.
    pub fn signed_area(&self) -> f64 {
        self.edges().map(|(a, b)| a.cross(b)).sum::<f64>() * 0.5
    }

    /// `+1` for counterclockwise, `-1` for clockwise.
    pub fn orientation(&self) -> i64 {
        if self.signed_area() > 0.0 {
            1
        } else {
            -1
        }
    }

    pub fn perimeter(&self) -> f64 {
        self.edges().map(|(a, b)| a.distance(b)).sum()
    }

    pub fn reversed(&self) -> PolyLoop {
        let mut v = self.vertices.clone();
        v.reverse();
        PolyLoop { vertices: v }
    }

    pub fn translated(&self, d: Vec2) -> PolyLoop {
        PolyLoop {
            vertices: self.vertices.iter().map(|&v| v + d).collect(),
        }
    }

    /// Even-odd ray-casting point-in-polygon test. Points on the boundary
    /// are not meaningful here; callers that care use
    /// [`PolyLoop::boundary_distance`] to refuse the ambiguous band first.
    pub fn contains(&self, p: Vec2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x_cross {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Distance from `p` to the nearest point of the polygon boundary.
    pub fn boundary_distance(&self, p: Vec2) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }

    /// Parses an ordered `x y` vertex list, one vertex per line, with `#`
    /// comments and blank lines allowed.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut vertices = Vec::new();
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
            if fields.len() != 2 {
                return Err(Error::Parse(format!(
                    "line {}: expected `x y`, got `{content}`",
                    lineno + 1
                )));
            }
            let x: f64 = fields[0].parse().map_err(|_| {
                Error::Parse(format!(
                    "line {}: `{}` is not a number",
                    lineno + 1,
                    fields[0]
                ))
            })?;
            let y: f64 = fields[1].parse().map_err(|_| {
                Error::Parse(format!(
                    "line {}: `{}` is not a number",
                    lineno + 1,
                    fields[1]
                ))
            })?;
            vertices.push(Vec2::new(x, y));
        }
        PolyLoop::new(vertices)
    }

    pub fn to_writer<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# loop vertices: one `x y` per line, counterclockwise positive"
        )?;
        for v in &self.vertices {
            writeln!(w, "{} {}", v.x, v.y)?;
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

/// Numeric quantization check: the measured loop integral, the nearest
/// admissible quantum, and the residual deviation. The deviation is
/// always reported, never rounded away.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantizationReport {
    pub numeric_integral: f64,
    pub nearest_quantum: i64,
    pub deviation: f64,
    pub quantum_unit: f64,
}

/// Adaptive line integral of `field` along the closed polygon, with an
/// absolute error target `tol` distributed over the edges by length.
///
/// Refuses loops passing within `eps_core` of a singular point, and
/// reports [`Error::QuadratureFailure`] when an edge does not converge
/// within [`MAX_QUAD_DEPTH`] bisections. Deterministic for fixed inputs.
pub fn line_integral(field: &VectorField2D, loop_: &PolyLoop, tol: f64) -> Result<f64> {
    for &s in field.singular_points() {
        let d = loop_.boundary_distance(s);
        if d <= field.eps_core() {
            return Err(Error::SingularLoop {
                singular: s,
                distance: d,
                eps: field.eps_core(),
            });
        }
    }
    let total_len = loop_.perimeter();
    let mut acc = 0.0;
    for (a, b) in loop_.edges() {
        let seg_tol = tol * (a.distance(b) / total_len);
        acc += segment_integral(field, a, b, seg_tol)?;
    }
    Ok(acc)
}

/// Tangential component of the field along the segment, parametrized on
/// `[0, 1]` so that `integral f(t) dt = integral field . dr`.
fn segment_integrand(field: &VectorField2D, a: Vec2, b: Vec2, t: f64) -> Result<f64> {
    let d = b - a;
    Ok(field.evaluate(a + d * t)?.dot(d))
}

fn segment_integral(field: &VectorField2D, a: Vec2, b: Vec2, tol: f64) -> Result<f64> {
    let f0 = segment_integrand(field, a, b, 0.0)?;
    let fm = segment_integrand(field, a, b, 0.5)?;
    let f1 = segment_integrand(field, a, b, 1.0)?;
    let whole = (f0 + 4.0 * fm + f1) / 6.0;
    adaptive_simpson(field, a, b, 0.0, 1.0, f0, fm, f1, whole, tol, 0)
}

/// Recursive Simpson bisection with the standard 15x Richardson error
/// estimate; accepted intervals return the extrapolated value.
#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    field: &VectorField2D,
    a: Vec2,
    b: Vec2,
    t0: f64,
    t1: f64,
    f0: f64,
    fm: f64,
    f1: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let tm = 0.5 * (t0 + t1);
    let tl = 0.5 * (t0 + tm);
    let tr = 0.5 * (tm + t1);
    let fl = segment_integrand(field, a, b, tl)?;
    let fr = segment_integrand(field, a, b, tr)?;
    let h = t1 - t0;
    let left = (f0 + 4.0 * fl + fm) * h / 12.0;
    let right = (fm + 4.0 * fr + f1) * h / 12.0;
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol {
        return Ok(left + right + err / 15.0);
    }
    if depth >= MAX_QUAD_DEPTH {
        return Err(Error::QuadratureFailure {
            tol,
            max_depth: MAX_QUAD_DEPTH,
            a,
            b,
        });
    }
    let half_tol = 0.5 * tol;
    Ok(
        adaptive_simpson(field, a, b, t0, tm, f0, fl, fm, left, half_tol, depth + 1)?
            + adaptive_simpson(field, a, b, tm, t1, fm, fr, f1, right, half_tol, depth + 1)?,
    )
}

/// Cores of `config` strictly enclosed by the loop, determined by the
/// even-odd census. Cores within `eps_core` of the boundary are an
/// [`Error::AmbiguousEnclosure`].
pub fn enclosed_cores<'a>(
    config: &'a VortexConfig,
    loop_: &PolyLoop,
) -> Result<Vec<&'a VortexCore>> {
    let eps = config.eps_core();
    let mut inside = Vec::new();
    for core in config.cores() {
        let d = loop_.boundary_distance(core.position);
        if d <= eps {
            return Err(Error::AmbiguousEnclosure {
                core: core.position,
                distance: d,
                eps,
            });
        }
        if loop_.contains(core.position) {
            inside.push(core);
        }
    }
    Ok(inside)
}

/// Exact winding number `(1/2 pi) closed-integral grad chi . dr` by
/// geometric census: the orientation-signed sum of windings of the cores
/// strictly inside the polygon. No quadrature is involved.
pub fn winding_number(config: &VortexConfig, loop_: &PolyLoop) -> Result<i64> {
    let sum: i64 = enclosed_cores(config, loop_)?
        .iter()
        .map(|c| c.winding)
        .sum();
    Ok(loop_.orientation() * sum)
}

/// Verifies flux quantization of the Berry connection around `loop_`:
/// integrates `A = -1/2 grad chi` numerically and compares against the
/// census expectation `-pi * winding` (natural units, quantum unit pi).
pub fn verify_quantization(
    config: &VortexConfig,
    loop_: &PolyLoop,
    tol: f64,
) -> Result<QuantizationReport> {
    let winding = winding_number(config, loop_)?;
    let field = berry_connection_field(config);
    let numeric = line_integral(&field, loop_, tol)?;
    let nearest_quantum = -winding;
    let quantum_unit = PI;
    Ok(QuantizationReport {
        numeric_integral: numeric,
        nearest_quantum,
        deviation: (numeric - nearest_quantum as f64 * quantum_unit).abs(),
        quantum_unit,
    })
}

/// Quadrature-side winding number `(1/2 pi) closed-integral grad chi . dr`,
/// useful as the numeric counterpart of [`winding_number`].
pub fn winding_integral(config: &VortexConfig, loop_: &PolyLoop, tol: f64) -> Result<f64> {
    let field = chi_gradient(config);
    Ok(line_integral(&field, loop_, tol)? / (2.0 * PI))
}
