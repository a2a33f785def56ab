//! The classical flux rule `-dPhi/dt` against its decomposition into an
//! induction term and a Lorentz term, for the analytic field families.
//!
//! ```bash
//! cargo run --release --example faraday_flux_rule
//! ```

use berryflux::emf::{
    faraday_emf_decomposed, faraday_emf_total, faraday_emf_total_extrapolated, BFieldModel,
    MovingLoop,
};
use berryflux::geometry::Vec2;
use berryflux::topology::PolyLoop;

fn main() -> berryflux::Result<()> {
    let tol = 1e-12;
    println!(
        "{:<26} {:>13} {:>13} {:>13} {:>13}",
        "field / circuit", "total", "induction", "lorentz", "ind + lor"
    );

    // B = beta t over a stationary unit square: EMF = -beta
    let beta = 0.8;
    let square = MovingLoop::new(PolyLoop::rectangle(0.0, 0.0, 1.0, 1.0)?, Vec2::ZERO);
    let b = BFieldModel::LinearT { beta };
    let total = faraday_emf_total(&b, &square, 0.4, 1e-3, tol)?;
    let (ind, lor) = faraday_emf_decomposed(&b, &square, 0.4, tol)?;
    println!(
        "{:<26} {total:>13.9} {ind:>13.9} {lor:>13.9} {:>13.9}",
        "beta t, stationary",
        ind + lor
    );

    // B = gamma x over a drifting rectangle: EMF = -gamma v0 L W
    let (gamma, v0) = (0.6, 1.2);
    let rect = MovingLoop::new(
        PolyLoop::rectangle(0.3, -0.1, 1.8, 0.7)?,
        Vec2::new(v0, 0.0),
    );
    let b = BFieldModel::LinearX { gamma };
    let total = faraday_emf_total(&b, &rect, 0.25, 1e-3, tol)?;
    let (ind, lor) = faraday_emf_decomposed(&b, &rect, 0.25, tol)?;
    println!(
        "{:<26} {total:>13.9} {ind:>13.9} {lor:>13.9} {:>13.9}",
        "gamma x, drifting",
        ind + lor
    );
    println!(
        "{:<26} {:>13.9}",
        "  hand-derived value",
        -gamma * v0 * 0.8 * 1.5
    );

    // static uniform field: everything cancels
    let b = BFieldModel::Uniform { b0: 2.5 };
    let drift = MovingLoop::new(
        PolyLoop::rectangle(0.0, 0.0, 1.0, 1.0)?,
        Vec2::new(0.7, -0.4),
    );
    let total = faraday_emf_total(&b, &drift, 0.1, 1e-3, tol)?;
    let (ind, lor) = faraday_emf_decomposed(&b, &drift, 0.1, tol)?;
    println!(
        "{:<26} {total:>13.9} {ind:>13.9} {lor:>13.9} {:>13.9}",
        "uniform static, drifting",
        ind + lor
    );

    // sinusoidal field: the forward difference carries an O(dt) bias, so
    // extrapolate it away before comparing
    let b = BFieldModel::Sinusoidal {
        amplitude: 0.9,
        kx: 1.7,
        ky: -0.6,
        omega: 2.3,
        phase: 0.4,
    };
    let mloop = MovingLoop::new(
        PolyLoop::rectangle(0.0, 0.0, 1.0, 1.0)?,
        Vec2::new(0.5, 0.2),
    );
    let (total, err_est) = faraday_emf_total_extrapolated(&b, &mloop, 0.3, 1e-4, tol)?;
    let (ind, lor) = faraday_emf_decomposed(&b, &mloop, 0.3, tol)?;
    println!(
        "{:<26} {total:>13.9} {ind:>13.9} {lor:>13.9} {:>13.9}",
        "sinusoidal, drifting",
        ind + lor
    );
    println!(
        "  extrapolated to dt -> 0 (correction estimate {err_est:.2e}); \
         gap to decomposition = {:.2e}",
        (total - (ind + lor)).abs()
    );
    Ok(())
}
