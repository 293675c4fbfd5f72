//! Propagate Gaussian initial data under a harmonic-potential diffusion
//! equation and print one solution value (the README walkthrough).

use heatprop::coeffs::CoefficientSet;
use heatprop::{heat_kernel, InitialData, NumericParams, Propagator};

fn main() -> heatprop::Result<()> {
    // u_t = u_xx − x²·u (harmonic-potential diffusion), anchored at t₀ = 0.
    let cs = CoefficientSet::from_strs(["1", "1", "0", "0", "0", "0"], &[])?;
    let hk = heat_kernel(&cs, 0.0, 0.5, 1e-10, 1e-10)?;

    // Propagate Gaussian initial data to t = 0.5 and evaluate at x = 0.3.
    let prop = Propagator::new(hk, &NumericParams::default());
    let data = InitialData::from_fn(|y| (-y * y).exp());
    let u = prop.apply(&data, 0.3)?;
    println!("u(0.3, 0.5) = {u}");
    Ok(())
}
