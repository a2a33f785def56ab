//! Berry connection computed directly from discretized wave functions,
//! with a mesh-refinement table showing second-order convergence to the
//! analytic values, and the phase-factorization residual.
//!
//! ```bash
//! cargo run --release --example manybody_connection
//! ```

use berryflux::geometry::Vec2;
use berryflux::manybody::{
    berry_connection_mb, boltzmann_weights, factorization_check, Grid2, GridWaveFunction,
};
use berryflux::units::UnitSystem;
use num_complex::Complex64;

fn main() -> berryflux::Result<()> {
    let k = Vec2::new(1.3, -0.7);
    let sigma = 1.5;

    println!(
        "plane-wave packet exp(i k.r) g(r) with k = ({}, {}):",
        k.x, k.y
    );
    println!("the connection is the constant k, to O(h^2)");
    println!();
    println!(
        "{:>6} {:>8} {:>14} {:>8}",
        "nodes", "h", "max |A - k|", "ratio"
    );
    let mut prev: Option<f64> = None;
    for &(n, h) in &[(15usize, 0.5), (29, 0.25), (57, 0.125)] {
        let grid = Grid2::centered(n, n, h)?;
        let psi = GridWaveFunction::gaussian_plane_wave(grid, k, Vec2::ZERO, sigma)?;
        let conn = berry_connection_mb(&psi);
        let mut max_err: f64 = 0.0;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                if grid.point(i, j).norm() < 2.0 {
                    if let Some(v) = conn.get(i, j) {
                        max_err = max_err.max((v - k).norm());
                    }
                }
            }
        }
        match prev {
            Some(p) => println!("{n:>4}^2 {h:>8.3} {max_err:>14.6e} {:>8.2}", p / max_err),
            None => println!("{n:>4}^2 {h:>8.3} {max_err:>14.6e} {:>8}", "-"),
        }
        prev = Some(max_err);
    }

    println!();
    println!("vortex-phase state exp(-i theta) |r| g(r): A = -grad theta");
    let grid = Grid2::centered(57, 57, 0.125)?;
    let psi = GridWaveFunction::vortex_phase_state(grid, Vec2::ZERO, sigma)?;
    let conn = berry_connection_mb(&psi);
    let mut max_err: f64 = 0.0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let r = grid.point(i, j);
            if r.norm() > 1.0 && r.norm() < 2.0 {
                if let Some(v) = conn.get(i, j) {
                    let expected = Vec2::new(r.y, -r.x) * (1.0 / r.norm_sq());
                    max_err = max_err.max((v - expected).norm());
                }
            }
        }
    }
    println!("max |A + grad theta| over 1 < r < 2: {max_err:.6e}");

    // strip the current-carrying phase and measure what is left
    let mut exact = Vec::with_capacity(grid.n_nodes());
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let r = grid.point(i, j);
            exact.push(Complex64::from_polar(1.0, -r.y.atan2(r.x)));
        }
    }
    let report = factorization_check(&psi, &exact)?;
    println!(
        "factorization residual with the exact half-phase: {:.3e} ({} masked nodes)",
        report.max_residual, report.masked_nodes
    );
    let ones = vec![Complex64::ONE; grid.n_nodes()];
    let wrong = factorization_check(
        &GridWaveFunction::gaussian_plane_wave(grid, k, Vec2::ZERO, 4.0)?,
        &ones,
    )?;
    println!(
        "residual of a plane wave with the WRONG (trivial) phase: {:.4} ~ |k| = {:.4}",
        wrong.max_residual,
        k.norm()
    );

    println!();
    println!("Boltzmann weights for energies (0, 1) at k_B T = 1:");
    let p = boltzmann_weights(&[0.0, 1.0], 1.0, &UnitSystem::natural())?;
    println!("p = ({:.6}, {:.6})", p[0], p[1]);
    Ok(())
}
