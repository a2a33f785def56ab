//! Berry connection evaluated directly from discretized few-electron
//! wave functions.
//!
//! For a normalized wave function sampled on a uniform grid, the
//! connection at a node is
//!
//! ```text
//! A(r) = Re{ sum_s1 integral dx2.. conj(Psi) (-i grad) Psi } / rho(r)
//! ```
//!
//! with the gradient a centered second-order finite difference
//! (one-sided at boundaries), the spin sum and remaining-coordinate
//! integrals done by direct summation over grid indices, and `rho` the
//! reduced density from the same summation. The physical prefactors
//! `1/(hbar rho) * (-i hbar grad)` cancel, so the ratio is
//! hbar-independent. Nodes where `rho` is at or below a floor
//! (default `1e-12 * max rho`) are masked and reported, never divided
//! through.
//!
//! Electron counts are capped at 2, on grids of at most 64x64 (one
//! electron) or 24x24 (two electrons): the integral cost scales as the
//! grid size to the power `2N`.

use crate::error::{Error, Result};
use crate::field::{ScalarField2D, VectorField2D};
use crate::geometry::Vec2;
use crate::units::UnitSystem;
use num_complex::Complex64;
use std::io::{Read, Write};
use std::sync::Arc;

/// Grid-size caps per electron count.
pub const GRID_CAP_ONE_ELECTRON: usize = 64;
pub const GRID_CAP_TWO_ELECTRONS: usize = 24;

/// Relative density floor below which connection nodes are masked.
pub const DEFAULT_RHO_FLOOR_REL: f64 = 1e-12;

/// Uniform rectangular mesh: `nx * ny` nodes with spacing `h`, node
/// `(i, j)` at `origin + (i h, j h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2 {
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub origin: Vec2,
}

impl Grid2 {
    pub fn new(nx: usize, ny: usize, h: f64, origin: Vec2) -> Result<Self> {
        if nx < 3 || ny < 3 {
            return Err(Error::InvalidWaveFunction(format!(
                "grid must be at least 3x3 for second-order stencils, got {nx}x{ny}"
            )));
        }
        if !h.is_finite() || h <= 0.0 {
            return Err(Error::InvalidWaveFunction(format!(
                "grid spacing must be finite and positive, got {h}"
            )));
        }
        Ok(Grid2 { nx, ny, h, origin })
    }

    /// Grid centered on the coordinate origin.
    pub fn centered(nx: usize, ny: usize, h: f64) -> Result<Self> {
        let origin = Vec2::new(-0.5 * (nx - 1) as f64 * h, -0.5 * (ny - 1) as f64 * h);
        Grid2::new(nx, ny, h, origin)
    }

    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        self.origin + Vec2::new(i as f64 * self.h, j as f64 * self.h)
    }

    /// Cell containing `p` plus fractional offsets, for interpolation.
    fn locate(&self, p: Vec2) -> Result<(usize, usize, f64, f64)> {
        let fx = (p.x - self.origin.x) / self.h;
        let fy = (p.y - self.origin.y) / self.h;
        if !(0.0..=(self.nx - 1) as f64).contains(&fx)
            || !(0.0..=(self.ny - 1) as f64).contains(&fy)
        {
            return Err(Error::Parse(format!(
                "point {p} lies outside the sampled grid"
            )));
        }
        let i = (fx.floor() as usize).min(self.nx - 2);
        let j = (fy.floor() as usize).min(self.ny - 2);
        Ok((i, j, fx - i as f64, fy - j as f64))
    }
}

fn bilinear(v00: f64, v10: f64, v01: f64, v11: f64, fx: f64, fy: f64) -> f64 {
    v00 * (1.0 - fx) * (1.0 - fy) + v10 * fx * (1.0 - fy) + v01 * (1.0 - fx) * fy + v11 * fx * fy
}

/// Real scalar samples on a [`Grid2`] (densities, temperatures, weights).
#[derive(Debug, Clone, PartialEq)]
pub struct GridScalar {
    pub grid: Grid2,
    values: Vec<f64>,
}

impl GridScalar {
    pub fn from_fn(grid: Grid2, f: impl Fn(Vec2) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.n_nodes());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.point(i, j)));
            }
        }
        GridScalar { grid, values }
    }

    pub fn constant(grid: Grid2, v: f64) -> Self {
        GridScalar {
            values: vec![v; grid.n_nodes()],
            grid,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Bilinear interpolation as a [`ScalarField2D`]; evaluation outside
    /// the sampled rectangle is an error.
    pub fn field(&self) -> ScalarField2D {
        let data = Arc::new(self.clone());
        ScalarField2D::analytic(move |p| {
            let (i, j, fx, fy) = data.grid.locate(p)?;
            let g = &data.grid;
            Ok(bilinear(
                data.values[g.idx(i, j)],
                data.values[g.idx(i + 1, j)],
                data.values[g.idx(i, j + 1)],
                data.values[g.idx(i + 1, j + 1)],
                fx,
                fy,
            ))
        })
    }
}

/// Complex amplitudes of an N-electron wave function (N = 1 or 2) on a
/// uniform grid, with a discrete spin label per electron.
///
/// Flattened layout: the composite index of electron `e` is
/// `c_e = (s_e * ny + j_e) * nx + i_e` (x fastest), and amplitudes are
/// stored as `amps[c_1]` for N = 1 and `amps[c_1 * M + c_2]` with
/// `M = spin_dim * nx * ny` for N = 2.
///
/// Construction normalizes to `sum |Psi|^2 h^(2N) = 1` and, for N = 2,
/// verifies antisymmetry under exchange of the combined
/// coordinate-and-spin indices on a deterministic sample of index pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct GridWaveFunction {
    grid: Grid2,
    n_electrons: usize,
    spin_dim: usize,
    amps: Vec<Complex64>,
}

impl GridWaveFunction {
    pub fn new(
        grid: Grid2,
        n_electrons: usize,
        spin_dim: usize,
        mut amps: Vec<Complex64>,
    ) -> Result<Self> {
        if !(1..=2).contains(&n_electrons) {
            return Err(Error::InvalidWaveFunction(format!(
                "electron count must be 1 or 2, got {n_electrons}"
            )));
        }
        if !(1..=2).contains(&spin_dim) {
            return Err(Error::InvalidWaveFunction(format!(
                "spin dimension must be 1 or 2, got {spin_dim}"
            )));
        }
        let cap = if n_electrons == 1 {
            GRID_CAP_ONE_ELECTRON
        } else {
            GRID_CAP_TWO_ELECTRONS
        };
        if grid.nx > cap || grid.ny > cap {
            return Err(Error::GridTooLarge {
                nx: grid.nx,
                ny: grid.ny,
                cap,
                n_electrons,
            });
        }
        let m = spin_dim * grid.n_nodes();
        let expected = m.pow(n_electrons as u32);
        if amps.len() != expected {
            return Err(Error::InvalidWaveFunction(format!(
                "expected {expected} amplitudes, got {}",
                amps.len()
            )));
        }
        let norm_sq: f64 =
            amps.iter().map(|a| a.norm_sqr()).sum::<f64>() * grid.h.powi(2 * n_electrons as i32);
        if !norm_sq.is_finite() || norm_sq <= 0.0 {
            return Err(Error::InvalidWaveFunction(
                "wave function has zero or non-finite norm".into(),
            ));
        }
        // already-normalized input (e.g. a reloaded file) is kept
        // bit-identical instead of being rescaled by 1 + O(eps)
        if (norm_sq - 1.0).abs() > 1e-12 {
            let scale = 1.0 / norm_sq.sqrt();
            for a in &mut amps {
                *a *= scale;
            }
        }
        let psi = GridWaveFunction {
            grid,
            n_electrons,
            spin_dim,
            amps,
        };
        if n_electrons == 2 {
            let defect = psi.antisymmetry_defect(512);
            let max_amp = psi.amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
            if defect > 1e-8 * max_amp {
                return Err(Error::InvalidWaveFunction(format!(
                    "two-electron amplitudes are not antisymmetric (sampled defect {defect:e})"
                )));
            }
        }
        Ok(psi)
    }

    /// One-electron state from a per-node, per-spin amplitude function.
    pub fn from_fn(
        grid: Grid2,
        spin_dim: usize,
        f: impl Fn(Vec2, usize) -> Complex64,
    ) -> Result<Self> {
        let mut amps = Vec::with_capacity(spin_dim * grid.n_nodes());
        for s in 0..spin_dim {
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    amps.push(f(grid.point(i, j), s));
                }
            }
        }
        GridWaveFunction::new(grid, 1, spin_dim, amps)
    }

    /// Two-electron state from an amplitude function of both combined
    /// coordinates; the function must be antisymmetric under exchange.
    pub fn from_fn2(
        grid: Grid2,
        spin_dim: usize,
        f: impl Fn(Vec2, usize, Vec2, usize) -> Complex64,
    ) -> Result<Self> {
        let m = spin_dim * grid.n_nodes();
        let mut amps = vec![Complex64::ZERO; m * m];
        for s1 in 0..spin_dim {
            for j1 in 0..grid.ny {
                for i1 in 0..grid.nx {
                    let c1 = (s1 * grid.ny + j1) * grid.nx + i1;
                    let r1 = grid.point(i1, j1);
                    for s2 in 0..spin_dim {
                        for j2 in 0..grid.ny {
                            for i2 in 0..grid.nx {
                                let c2 = (s2 * grid.ny + j2) * grid.nx + i2;
                                amps[c1 * m + c2] = f(r1, s1, grid.point(i2, j2), s2);
                            }
                        }
                    }
                }
            }
        }
        GridWaveFunction::new(grid, 2, spin_dim, amps)
    }

    /// Spinless Gaussian wave packet with a plane-wave phase
    /// `exp(i k . r)`; its Berry connection is the constant `k`.
    pub fn gaussian_plane_wave(grid: Grid2, k: Vec2, center: Vec2, sigma: f64) -> Result<Self> {
        Self::from_fn(grid, 1, |r, _| {
            let d = r - center;
            let envelope = (-d.norm_sq() / (2.0 * sigma * sigma)).exp();
            Complex64::from_polar(envelope, k.dot(r))
        })
    }

    /// Spinless state `Psi = exp(-i theta) |r - c|/sigma * gaussian`,
    /// i.e. the half-phase of a winding-2 angular field `chi = 2 theta`
    /// times a real envelope vanishing at the core. Its connection is
    /// `-grad theta`. Written as `((dx - i dy)/sigma) * gaussian`, which
    /// is smooth across the core.
    pub fn vortex_phase_state(grid: Grid2, center: Vec2, sigma: f64) -> Result<Self> {
        Self::from_fn(grid, 1, |r, _| {
            let d = r - center;
            let envelope = (-d.norm_sq() / (2.0 * sigma * sigma)).exp();
            Complex64::new(d.x / sigma, -d.y / sigma) * envelope
        })
    }

    /// Spinless two-electron Slater determinant of two orbitals.
    pub fn slater_state(
        grid: Grid2,
        orb_a: impl Fn(Vec2) -> Complex64,
        orb_b: impl Fn(Vec2) -> Complex64,
    ) -> Result<Self> {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_fn2(grid, 1, |r1, _, r2, _| {
            (orb_a(r1) * orb_b(r2) - orb_b(r1) * orb_a(r2)) * inv_sqrt2
        })
    }

    /// Spin-singlet two-electron state: symmetric orbital product times
    /// the antisymmetric spin pair.
    pub fn singlet_state(grid: Grid2, orb: impl Fn(Vec2) -> Complex64) -> Result<Self> {
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_fn2(grid, 2, |r1, s1, r2, s2| {
            let spin = match (s1, s2) {
                (0, 1) => inv_sqrt2,
                (1, 0) => -inv_sqrt2,
                _ => 0.0,
            };
            orb(r1) * orb(r2) * spin
        })
    }

    pub fn grid(&self) -> Grid2 {
        self.grid
    }

    pub fn n_electrons(&self) -> usize {
        self.n_electrons
    }

    pub fn spin_dim(&self) -> usize {
        self.spin_dim
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// `sum |Psi|^2 h^(2N)`; 1 up to round-off after construction.
    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>()
            * self.grid.h.powi(2 * self.n_electrons as i32)
    }

    /// Multiplies every amplitude by a constant phase factor.
    pub fn with_global_phase(&self, phase: Complex64) -> GridWaveFunction {
        let mut out = self.clone();
        for a in &mut out.amps {
            *a *= phase;
        }
        out
    }

    fn composite(&self) -> usize {
        self.spin_dim * self.grid.n_nodes()
    }

    /// Max |Psi(x1, x2) + Psi(x2, x1)| over a deterministic sample of
    /// index pairs (two-electron states only).
    pub fn antisymmetry_defect(&self, samples: usize) -> f64 {
        if self.n_electrons != 2 {
            return 0.0;
        }
        let m = self.composite();
        let mut worst: f64 = 0.0;
        let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
        for _ in 0..samples {
            // splitmix64 steps give a deterministic index sample
            state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            z ^= z >> 31;
            let c1 = (z % m as u64) as usize;
            let c2 = ((z >> 32) % m as u64) as usize;
            let defect = (self.amps[c1 * m + c2] + self.amps[c2 * m + c1]).norm();
            worst = worst.max(defect);
        }
        worst
    }

    /// Writes the documented binary tensor format: ASCII magic `GWF1`,
    /// then little-endian `u32` nx, ny, N, spin_dim, little-endian `f64`
    /// h, origin_x, origin_y, then one little-endian `(re, im)` `f64`
    /// pair per amplitude in the flattened layout above.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"GWF1")?;
        for v in [
            self.grid.nx as u32,
            self.grid.ny as u32,
            self.n_electrons as u32,
            self.spin_dim as u32,
        ] {
            w.write_all(&v.to_le_bytes())?;
        }
        for v in [self.grid.h, self.grid.origin.x, self.grid.origin.y] {
            w.write_all(&v.to_le_bytes())?;
        }
        for a in &self.amps {
            w.write_all(&a.re.to_le_bytes())?;
            w.write_all(&a.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"GWF1" {
            return Err(Error::Parse(
                "bad magic: not a GWF1 wave-function file".into(),
            ));
        }
        let mut header = [0u8; 16];
        r.read_exact(&mut header)?;
        let word = |i: usize| u32::from_le_bytes(header[4 * i..4 * (i + 1)].try_into().unwrap());
        let (nx, ny) = (word(0) as usize, word(1) as usize);
        let (n_electrons, spin_dim) = (word(2) as usize, word(3) as usize);
        let mut reals = [0u8; 24];
        r.read_exact(&mut reals)?;
        let real = |i: usize| f64::from_le_bytes(reals[8 * i..8 * (i + 1)].try_into().unwrap());
        let grid = Grid2::new(nx, ny, real(0), Vec2::new(real(1), real(2)))?;
        if !(1..=2).contains(&n_electrons) || !(1..=2).contains(&spin_dim) {
            return Err(Error::Parse(format!(
                "unsupported header: N = {n_electrons}, spin_dim = {spin_dim}"
            )));
        }
        let m = spin_dim * grid.n_nodes();
        let count = m.pow(n_electrons as u32);
        let mut amps = Vec::with_capacity(count);
        let mut pair = [0u8; 16];
        for _ in 0..count {
            r.read_exact(&mut pair)?;
            let re = f64::from_le_bytes(pair[0..8].try_into().unwrap());
            let im = f64::from_le_bytes(pair[8..16].try_into().unwrap());
            amps.push(Complex64::new(re, im));
        }
        GridWaveFunction::new(grid, n_electrons, spin_dim, amps)
    }
}

/// Berry connection and reduced density sampled on the wave function's
/// grid. Nodes with density at or below the floor are masked; masked
/// nodes have no connection value and are excluded from norms.
#[derive(Debug, Clone, PartialEq)]
pub struct GridConnection {
    pub grid: Grid2,
    values: Vec<Vec2>,
    density: Vec<f64>,
    masked: Vec<bool>,
    pub rho_floor: f64,
}

impl GridConnection {
    /// Connection value at a node, `None` where masked.
    pub fn get(&self, i: usize, j: usize) -> Option<Vec2> {
        let idx = self.grid.idx(i, j);
        if self.masked[idx] {
            None
        } else {
            Some(self.values[idx])
        }
    }

    pub fn density(&self, i: usize, j: usize) -> f64 {
        self.density[self.grid.idx(i, j)]
    }

    pub fn density_values(&self) -> &[f64] {
        &self.density
    }

    pub fn is_masked(&self, i: usize, j: usize) -> bool {
        self.masked[self.grid.idx(i, j)]
    }

    pub fn masked_count(&self) -> usize {
        self.masked.iter().filter(|&&m| m).count()
    }

    /// Largest |A| over unmasked nodes.
    pub fn max_norm(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.masked)
            .filter(|(_, &m)| !m)
            .map(|(v, _)| v.norm())
            .fold(0.0, f64::max)
    }

    /// Uniform synthetic connection, for mixture tests and demos.
    pub fn constant(grid: Grid2, v: Vec2) -> Self {
        let n = grid.n_nodes();
        GridConnection {
            grid,
            values: vec![v; n],
            density: vec![1.0 / (grid.h * grid.h * n as f64); n],
            masked: vec![false; n],
            rho_floor: 0.0,
        }
    }

    /// Bilinear interpolation as a [`VectorField2D`]; touching a masked
    /// node is a [`Error::DensityFloor`] error.
    pub fn field(&self) -> VectorField2D {
        let data = Arc::new(self.clone());
        VectorField2D::analytic(move |p| {
            let (i, j, fx, fy) = data.grid.locate(p)?;
            for (ci, cj) in [(i, j), (i + 1, j), (i, j + 1), (i + 1, j + 1)] {
                let idx = data.grid.idx(ci, cj);
                if data.masked[idx] {
                    return Err(Error::DensityFloor {
                        i: ci,
                        j: cj,
                        rho: data.density[idx],
                        floor: data.rho_floor,
                    });
                }
            }
            let g = &data.grid;
            let x = bilinear(
                data.values[g.idx(i, j)].x,
                data.values[g.idx(i + 1, j)].x,
                data.values[g.idx(i, j + 1)].x,
                data.values[g.idx(i + 1, j + 1)].x,
                fx,
                fy,
            );
            let y = bilinear(
                data.values[g.idx(i, j)].y,
                data.values[g.idx(i + 1, j)].y,
                data.values[g.idx(i, j + 1)].y,
                data.values[g.idx(i + 1, j + 1)].y,
                fx,
                fy,
            );
            Ok(Vec2::new(x, y))
        })
    }

    /// Centered finite-difference curl `d(A_y)/dx - d(A_x)/dy` at the
    /// grid nodes (one-sided at boundaries). Nodes whose stencil touches
    /// a masked node come out as NaN.
    pub fn curl_z(&self) -> GridScalar {
        let g = self.grid;
        let mut out = vec![f64::NAN; g.n_nodes()];
        let val = |i: usize, j: usize| -> Option<Vec2> { self.get(i, j) };
        for j in 0..g.ny {
            for i in 0..g.nx {
                let day_dx = stencil_1d(g.nx, i, |ii| val(ii, j).map(|v| v.y), g.h);
                let dax_dy = stencil_1d(g.ny, j, |jj| val(i, jj).map(|v| v.x), g.h);
                if let (Some(a), Some(b)) = (day_dx, dax_dy) {
                    out[g.idx(i, j)] = a - b;
                }
            }
        }
        GridScalar {
            grid: g,
            values: out,
        }
    }
}

/// Second-order 1D derivative along one axis: centered in the interior,
/// one-sided three-point at the ends. Returns None when a needed sample
/// is missing.
fn stencil_1d(n: usize, i: usize, f: impl Fn(usize) -> Option<f64>, h: f64) -> Option<f64> {
    if i == 0 {
        Some((-3.0 * f(0)? + 4.0 * f(1)? - f(2)?) / (2.0 * h))
    } else if i == n - 1 {
        Some((3.0 * f(n - 1)? - 4.0 * f(n - 2)? + f(n - 3)?) / (2.0 * h))
    } else {
        Some((f(i + 1)? - f(i - 1)?) / (2.0 * h))
    }
}

fn complex_stencil_1d(n: usize, i: usize, f: impl Fn(usize) -> Complex64, h: f64) -> Complex64 {
    if i == 0 {
        (-3.0 * f(0) + 4.0 * f(1) - f(2)) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * f(n - 1) - 4.0 * f(n - 2) + f(n - 3)) / (2.0 * h)
    } else {
        (f(i + 1) - f(i - 1)) / (2.0 * h)
    }
}

/// Berry connection of `psi` with the default density floor.
pub fn berry_connection_mb(psi: &GridWaveFunction) -> GridConnection {
    berry_connection_mb_with_floor(psi, DEFAULT_RHO_FLOOR_REL)
}

/// Berry connection of `psi`, masking nodes whose reduced density is at
/// or below `rho_floor_rel * max rho`.
pub fn berry_connection_mb_with_floor(
    psi: &GridWaveFunction,
    rho_floor_rel: f64,
) -> GridConnection {
    let g = psi.grid();
    let n = g.n_nodes();
    let mut density = vec![0.0; n];
    let mut current = vec![Vec2::ZERO; n];

    match psi.n_electrons() {
        1 => {
            let amp = |s: usize, i: usize, j: usize| psi.amps[(s * g.ny + j) * g.nx + i];
            for s in 0..psi.spin_dim() {
                for j in 0..g.ny {
                    for i in 0..g.nx {
                        let a = amp(s, i, j);
                        let dx = complex_stencil_1d(g.nx, i, |ii| amp(s, ii, j), g.h);
                        let dy = complex_stencil_1d(g.ny, j, |jj| amp(s, i, jj), g.h);
                        let idx = g.idx(i, j);
                        density[idx] += a.norm_sqr();
                        // Re[conj(psi) (-i) d psi] = Im[conj(psi) d psi]
                        current[idx] += Vec2::new((a.conj() * dx).im, (a.conj() * dy).im);
                    }
                }
            }
        }
        2 => {
            let m = psi.composite();
            let h_sq = g.h * g.h;
            let amp = |s1: usize, i1: usize, j1: usize, c2: usize| {
                psi.amps[((s1 * g.ny + j1) * g.nx + i1) * m + c2]
            };
            for s1 in 0..psi.spin_dim() {
                for j1 in 0..g.ny {
                    for i1 in 0..g.nx {
                        let idx = g.idx(i1, j1);
                        let mut rho = 0.0;
                        let mut cur = Vec2::ZERO;
                        for c2 in 0..m {
                            let a = amp(s1, i1, j1, c2);
                            let dx = complex_stencil_1d(g.nx, i1, |ii| amp(s1, ii, j1, c2), g.h);
                            let dy = complex_stencil_1d(g.ny, j1, |jj| amp(s1, i1, jj, c2), g.h);
                            rho += a.norm_sqr();
                            cur += Vec2::new((a.conj() * dx).im, (a.conj() * dy).im);
                        }
                        density[idx] += rho * h_sq;
                        current[idx] += cur * h_sq;
                    }
                }
            }
        }
        _ => unreachable!("electron count validated at construction"),
    }

    let rho_max = density.iter().cloned().fold(0.0, f64::max);
    let floor = rho_floor_rel * rho_max;
    let mut values = vec![Vec2::ZERO; n];
    let mut masked = vec![false; n];
    for idx in 0..n {
        if density[idx] <= floor {
            masked[idx] = true;
        } else {
            values[idx] = current[idx] * (1.0 / density[idx]);
        }
    }
    GridConnection {
        grid: g,
        values,
        density,
        masked,
        rho_floor: floor,
    }
}

/// Residual of the phase-factorization check: how currentless the
/// dressed state `Psi_0 = Psi * exp(+i/2 sum_j chi(r_j))` actually is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizationReport {
    /// Max `|A[Psi_0]|` over unmasked nodes.
    pub max_residual: f64,
    pub masked_nodes: usize,
    pub evaluated_nodes: usize,
}

/// Strips the supplied current-carrying phase from `psi` and reports the
/// residual connection of the remainder.
///
/// `half_phase` holds grid samples of `exp(-i chi / 2)` in node layout
/// `j * nx + i`; the check multiplies each electron coordinate by the
/// conjugate sample and evaluates `max |A[Psi_0]|`. An exact phase makes
/// the residual O(h^2); a wrong phase leaves the undressed connection.
pub fn factorization_check(
    psi: &GridWaveFunction,
    half_phase: &[Complex64],
) -> Result<FactorizationReport> {
    let g = psi.grid();
    if half_phase.len() != g.n_nodes() {
        return Err(Error::InvalidWaveFunction(format!(
            "expected {} phase samples, got {}",
            g.n_nodes(),
            half_phase.len()
        )));
    }
    // composite index -> spatial node, dropping the spin label
    let node_of = |c: usize| -> usize { c % g.n_nodes() };
    let mut amps = psi.amps.clone();
    match psi.n_electrons() {
        1 => {
            for (c, a) in amps.iter_mut().enumerate() {
                *a *= half_phase[node_of(c)].conj();
            }
        }
        2 => {
            let m = psi.composite();
            for c1 in 0..m {
                let p1 = half_phase[node_of(c1)].conj();
                for c2 in 0..m {
                    amps[c1 * m + c2] *= p1 * half_phase[node_of(c2)].conj();
                }
            }
        }
        _ => unreachable!(),
    }
    let dressed = GridWaveFunction::new(g, psi.n_electrons(), psi.spin_dim(), amps)?;
    let conn = berry_connection_mb(&dressed);
    Ok(FactorizationReport {
        max_residual: conn.max_norm(),
        masked_nodes: conn.masked_count(),
        evaluated_nodes: g.n_nodes() - conn.masked_count(),
    })
}

/// One member of a statistical mixture: either a wave function (its
/// connection is computed on demand) or a precomputed connection field.
#[derive(Debug, Clone)]
pub enum MixtureMember {
    State(GridWaveFunction),
    Connection(GridConnection),
}

impl MixtureMember {
    fn connection(&self) -> GridConnection {
        match self {
            MixtureMember::State(psi) => berry_connection_mb(psi),
            MixtureMember::Connection(c) => c.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EnsembleEntry {
    pub member: MixtureMember,
    pub probability: f64,
    pub energy: Option<f64>,
}

/// A probability mixture of states or connection fields.
/// Probabilities must be nonnegative and sum to 1 within 1e-12.
#[derive(Debug, Clone)]
pub struct MixtureEnsemble {
    entries: Vec<EnsembleEntry>,
}

impl MixtureEnsemble {
    pub fn new(entries: Vec<EnsembleEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidEnsemble("ensemble has no members".into()));
        }
        let mut total = 0.0;
        for (i, e) in entries.iter().enumerate() {
            if !e.probability.is_finite() || e.probability < 0.0 {
                return Err(Error::InvalidEnsemble(format!(
                    "probability {i} is {} (must be finite and >= 0)",
                    e.probability
                )));
            }
            total += e.probability;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidEnsemble(format!(
                "probabilities sum to {total}, expected 1 within 1e-12"
            )));
        }
        Ok(MixtureEnsemble { entries })
    }

    /// Thermal ensemble: probabilities are the Boltzmann weights of the
    /// member energies at the given uniform temperature.
    pub fn boltzmann(
        members: Vec<(MixtureMember, f64)>,
        temperature: f64,
        units: &UnitSystem,
    ) -> Result<Self> {
        let energies: Vec<f64> = members.iter().map(|(_, e)| *e).collect();
        let probabilities = boltzmann_weights(&energies, temperature, units)?;
        MixtureEnsemble::new(
            members
                .into_iter()
                .zip(probabilities)
                .map(|((member, energy), probability)| EnsembleEntry {
                    member,
                    probability,
                    energy: Some(energy),
                })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[EnsembleEntry] {
        &self.entries
    }
}

/// Probability-weighted pointwise sum of the member connections.
/// All members must share one grid; a node masked in any member is
/// masked in the mixture.
pub fn mixture_connection(ensemble: &MixtureEnsemble) -> Result<GridConnection> {
    let conns: Vec<GridConnection> = ensemble
        .entries
        .iter()
        .map(|e| e.member.connection())
        .collect();
    let probs: Vec<f64> = ensemble.entries.iter().map(|e| e.probability).collect();
    weighted_sum(&conns, |_, _, j_member| probs[j_member])
}

/// Mixture with position-dependent weights `w_j(r)`, one scalar grid per
/// member. At every node the weights must be nonnegative and sum to 1
/// within 1e-9. This is the mechanism by which a coordinate-dependent
/// distribution (for example Boltzmann factors in a temperature
/// gradient) makes the mixed connection rotational even when each
/// member connection is curl-free.
pub fn mixture_connection_weighted(
    members: &[GridConnection],
    weights: &[GridScalar],
) -> Result<GridConnection> {
    if members.len() != weights.len() {
        return Err(Error::InvalidEnsemble(format!(
            "{} members but {} weight fields",
            members.len(),
            weights.len()
        )));
    }
    if members.is_empty() {
        return Err(Error::InvalidEnsemble("ensemble has no members".into()));
    }
    let grid = members[0].grid;
    for w in weights {
        if w.grid != grid {
            return Err(Error::InvalidEnsemble(
                "weight fields must share the members' grid".into(),
            ));
        }
    }
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let total: f64 = weights.iter().map(|w| w.get(i, j)).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidEnsemble(format!(
                    "weights at node ({i}, {j}) sum to {total}"
                )));
            }
            for w in weights {
                if w.get(i, j) < 0.0 {
                    return Err(Error::InvalidEnsemble(format!(
                        "negative weight at node ({i}, {j})"
                    )));
                }
            }
        }
    }
    weighted_sum(members, |i, j, j_member| weights[j_member].get(i, j))
}

fn weighted_sum(
    members: &[GridConnection],
    weight: impl Fn(usize, usize, usize) -> f64,
) -> Result<GridConnection> {
    let grid = members[0].grid;
    for m in members {
        if m.grid != grid {
            return Err(Error::InvalidEnsemble(
                "all members must share one grid".into(),
            ));
        }
    }
    let n = grid.n_nodes();
    let mut values = vec![Vec2::ZERO; n];
    let mut density = vec![0.0; n];
    let mut masked = vec![false; n];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let idx = grid.idx(i, j);
            for (jm, m) in members.iter().enumerate() {
                let w = weight(i, j, jm);
                density[idx] += w * m.density[idx];
                match m.get(i, j) {
                    Some(v) => values[idx] += v * w,
                    None => masked[idx] = true,
                }
            }
        }
    }
    Ok(GridConnection {
        grid,
        values,
        density,
        masked,
        rho_floor: members.iter().map(|m| m.rho_floor).fold(0.0, f64::max),
    })
}

/// Boltzmann probabilities `p_j = exp(-E_j / k_B T) / Z` at a uniform
/// temperature, computed with max-subtraction for stability.
pub fn boltzmann_weights(
    energies: &[f64],
    temperature: f64,
    units: &UnitSystem,
) -> Result<Vec<f64>> {
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::InvalidTemperature(temperature));
    }
    let beta = 1.0 / (units.k_b * temperature);
    let xs: Vec<f64> = energies.iter().map(|e| -e * beta).collect();
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / z).collect())
}

/// Position-dependent Boltzmann probabilities `p_j(r)` for a temperature
/// field `T(r)`; any non-positive temperature node is an error.
pub fn boltzmann_weight_fields(
    energies: &[f64],
    temperature: &GridScalar,
    units: &UnitSystem,
) -> Result<Vec<GridScalar>> {
    let grid = temperature.grid;
    let mut fields: Vec<Vec<f64>> = vec![vec![0.0; grid.n_nodes()]; energies.len()];
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let p = boltzmann_weights(energies, temperature.get(i, j), units)?;
            for (f, &pj) in fields.iter_mut().zip(&p) {
                f[grid.idx(i, j)] = pj;
            }
        }
    }
    Ok(fields
        .into_iter()
        .map(|values| GridScalar { grid, values })
        .collect())
}
