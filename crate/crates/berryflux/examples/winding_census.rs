//! Winding numbers of loops over a spin-vortex configuration: the exact
//! geometric census against adaptive quadrature of the loop integral.
//!
//! ```bash
//! cargo run --release --example winding_census
//! ```

use berryflux::field::{chi_gradient, VortexConfig, VortexCore};
use berryflux::geometry::{Domain, Vec2};
use berryflux::topology::{line_integral, winding_number, PolyLoop};
use std::f64::consts::PI;

fn main() -> berryflux::Result<()> {
    let domain = Domain::new(10.0, 10.0)?;
    let config = VortexConfig::new(
        domain,
        vec![
            VortexCore::new(3.0, 5.0, 1),
            VortexCore::new(5.0, 5.0, -1),
            VortexCore::new(7.0, 5.0, 1),
            VortexCore::new(5.0, 7.5, 1),
        ],
    )?;
    let gradient = chi_gradient(&config);

    println!("cores:");
    for core in config.cores() {
        println!("  w = {:+} at {}", core.winding, core.position);
    }
    println!();
    println!(
        "{:<38} {:>7} {:>14} {:>11}",
        "loop", "census", "integral/2pi", "deviation"
    );

    let loops: Vec<(&str, PolyLoop)> = vec![
        (
            "square around the first core",
            PolyLoop::rectangle(2.0, 4.0, 4.0, 6.0)?,
        ),
        (
            "square around the middle pair",
            PolyLoop::rectangle(2.0, 4.0, 6.0, 6.0)?,
        ),
        (
            "box around everything",
            PolyLoop::rectangle(1.0, 3.0, 9.0, 9.0)?,
        ),
        (
            "box around everything, reversed",
            PolyLoop::rectangle(1.0, 3.0, 9.0, 9.0)?.reversed(),
        ),
        ("empty corner", PolyLoop::rectangle(0.5, 0.5, 2.0, 2.0)?),
        (
            "hexagon around the top core",
            PolyLoop::new(
                (0..6)
                    .map(|k| {
                        let th = PI * k as f64 / 3.0;
                        Vec2::new(5.0 + 1.2 * th.cos(), 7.5 + 1.2 * th.sin())
                    })
                    .collect(),
            )?,
        ),
    ];

    for (name, loop_) in &loops {
        let census = winding_number(&config, loop_)?;
        let integral = line_integral(&gradient, loop_, 1e-10)? / (2.0 * PI);
        println!(
            "{name:<38} {census:>7} {integral:>14.9} {:>11.2e}",
            (integral - census as f64).abs()
        );
    }
    Ok(())
}
