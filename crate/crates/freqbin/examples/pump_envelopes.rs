//! Pair amplitudes from pump-pulse envelopes.
//!
//! A pump pulse α(t) with nonlinear coupling γ produces the dimensionless
//! pair amplitude β = −iγ ∫ α²(t) dt. This example computes β for a flat
//! pulse, a Gaussian, and a chirped Gaussian, checks the first two against
//! their closed forms, and feeds the result into a source to show the
//! per-pulse pair probability |β₁|² + |β₂|².

use freqbin::{compute_beta, single_pump_source, PumpEnvelope};
use num_complex::Complex64 as C64;

fn main() -> freqbin::Result<()> {
    let gamma = C64::new(0.015, 0.0);

    // Flat pulse: ∫α² = α₀²·(t1−t0), so β = −iγα₀²(t1−t0).
    let flat = PumpEnvelope::constant(gamma, C64::new(2.0, 0.0), 0.0, 1.5)?;
    let beta_flat = compute_beta(&flat)?;
    let expect_flat = -C64::i() * gamma * 4.0 * 1.5;
    println!(
        "flat pulse      β = {:+.9} {:+.9}i   (closed form {:+.9} {:+.9}i)",
        beta_flat.re, beta_flat.im, expect_flat.re, expect_flat.im
    );

    // Gaussian α₀·exp(−t²/2τ²): ∫α² = α₀²·τ·√π.
    let (alpha0, tau) = (1.8, 0.7);
    let gauss = PumpEnvelope::gaussian(gamma, alpha0, tau)?;
    let beta_gauss = compute_beta(&gauss)?;
    let expect_gauss = -C64::i() * gamma * alpha0 * alpha0 * tau * std::f64::consts::PI.sqrt();
    println!(
        "gaussian        β = {:+.9} {:+.9}i   (closed form {:+.9} {:+.9}i)",
        beta_gauss.re, beta_gauss.im, expect_gauss.re, expect_gauss.im
    );

    // Chirped Gaussian: a quadratic phase sweep rotates β and (slightly)
    // shrinks |∫α²| because the integrand no longer adds up in phase.
    let chirp = 0.4;
    let chirped = PumpEnvelope::new(gamma, -8.0 * tau, 8.0 * tau, move |t| {
        C64::from_polar(alpha0 * (-t * t / (2.0 * tau * tau)).exp(), chirp * t * t)
    })?;
    let beta_chirped = compute_beta(&chirped)?;
    println!(
        "chirped         β = {:+.9} {:+.9}i   |β| = {:.9} (unchirped {:.9})",
        beta_chirped.re,
        beta_chirped.im,
        beta_chirped.norm(),
        beta_gauss.norm()
    );

    // Two pump configurations drive the two pair processes of one source.
    let weaker = PumpEnvelope::gaussian(gamma, alpha0 * 0.7, tau)?;
    let source = single_pump_source(beta_gauss, compute_beta(&weaker)?)?;
    println!();
    println!("single-pump source from these pulses:");
    println!(
        "  pair probability per pulse: {:.9}",
        source.pair_probability()
    );
    Ok(())
}
