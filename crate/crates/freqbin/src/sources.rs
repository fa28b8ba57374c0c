//! Spontaneous four-wave-mixing pair sources.
//!
//! A source is described by a pair-generation operator C† = Σ_k β_k a†a†,
//! a sum of two-mode creation monomials weighted by dimensionless pair
//! amplitudes β_k. The single-pump scheme generates signal/idler pairs in
//! matching bins, (S0,I0) and (S1,I1); the dual-pump scheme generates them
//! in opposite bins, (S0,I1) and (S1,I0). In the low-gain regime the emitted
//! state is the exponential of C† truncated at one or two pairs.
//!
//! Each β is either supplied directly or computed from a pump-pulse
//! envelope as β = −iγ ∫ α²(t) dt.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{FockBasisState, ModeLabel, StateVector};

/// A pump pulse envelope α(t) on a finite window, with its nonlinear
/// coupling rate γ.
#[derive(Clone)]
pub struct PumpEnvelope {
    gamma: C64,
    t0: f64,
    t1: f64,
    amplitude: Arc<dyn Fn(f64) -> C64 + Send + Sync>,
}

impl fmt::Debug for PumpEnvelope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PumpEnvelope")
            .field("gamma", &self.gamma)
            .field("t0", &self.t0)
            .field("t1", &self.t1)
            .finish_non_exhaustive()
    }
}

impl PumpEnvelope {
    /// An arbitrary envelope α(t) on [t0, t1].
    pub fn new<F>(gamma: C64, t0: f64, t1: f64, amplitude: F) -> Result<Self>
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
            return Err(Error::Validation {
                stanza: "envelope".into(),
                msg: format!("time window [{t0}, {t1}] must be finite with t1 > t0"),
            });
        }
        Ok(PumpEnvelope {
            gamma,
            t0,
            t1,
            amplitude: Arc::new(amplitude),
        })
    }

    /// A flat pulse of complex amplitude α₀ on [t0, t1].
    pub fn constant(gamma: C64, alpha0: C64, t0: f64, t1: f64) -> Result<Self> {
        PumpEnvelope::new(gamma, t0, t1, move |_| alpha0)
    }

    /// A Gaussian pulse α₀·exp(−t²/2τ²), windowed to [−8τ, 8τ] where the
    /// truncated tails are far below double precision.
    pub fn gaussian(gamma: C64, alpha0: f64, tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau <= 0.0 {
            return Err(Error::Validation {
                stanza: "envelope".into(),
                msg: format!("gaussian width tau = {tau} must be finite and positive"),
            });
        }
        PumpEnvelope::new(gamma, -8.0 * tau, 8.0 * tau, move |t| {
            C64::new(alpha0 * (-t * t / (2.0 * tau * tau)).exp(), 0.0)
        })
    }

    pub fn gamma(&self) -> C64 {
        self.gamma
    }

    pub fn window(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn amplitude_at(&self, t: f64) -> C64 {
        (self.amplitude)(t)
    }
}

/// Pair amplitude from a pump envelope: β = −iγ ∫_{t0}^{t1} α²(t) dt.
///
/// The integral is evaluated by adaptive Simpson quadrature to an absolute
/// tolerance of 10⁻¹²·(t1−t0), so the returned β is accurate to
/// 10⁻¹²·|γ|·(t1−t0).
pub fn compute_beta(env: &PumpEnvelope) -> Result<C64> {
    let integrand = |t: f64| {
        let a = env.amplitude_at(t);
        a * a
    };
    let tol = 1e-12 * (env.t1 - env.t0);
    let integral = adaptive_simpson(&integrand, env.t0, env.t1, tol)?;
    Ok(-C64::i() * env.gamma * integral)
}

/// Budget for quadrature subdivision; generous for any smooth pulse shape.
const QUADRATURE_MAX_DEPTH: u32 = 48;
const QUADRATURE_MAX_EVALS: u32 = 4_000_000;

/// Adaptive Simpson integration of a complex integrand with Richardson
/// error control (accept when |S_fine − S_coarse| ≤ 15·tol).
fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    fn simpson(fa: C64, fm: C64, fb: C64, h: f64) -> C64 {
        (fa + fm * 4.0 + fb) * (h / 6.0)
    }

    struct Ctx<'a, F> {
        f: &'a F,
        evals: u32,
    }

    // The argument list is the full recursion state: interval ends, their
    // cached samples, the coarse estimate, and the error budget.
    #[allow(clippy::too_many_arguments)]
    fn recurse<F>(
        ctx: &mut Ctx<'_, F>,
        a: f64,
        b: f64,
        fa: C64,
        fm: C64,
        fb: C64,
        whole: C64,
        tol: f64,
        depth: u32,
    ) -> Result<C64>
    where
        F: Fn(f64) -> C64,
    {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        ctx.evals += 2;
        if ctx.evals > QUADRATURE_MAX_EVALS {
            return Err(Error::QuadratureFailure {
                detail: format!("evaluation budget exhausted on [{a}, {b}]"),
            });
        }
        let flm = (ctx.f)(lm);
        let frm = (ctx.f)(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let refined = left + right;
        if (refined - whole).norm() <= 15.0 * tol {
            // Richardson extrapolation: one order better than plain Simpson.
            return Ok(refined + (refined - whole) / 15.0);
        }
        if depth == 0 {
            return Err(Error::QuadratureFailure {
                detail: format!("tolerance {tol:e} not reached on [{a}, {b}]"),
            });
        }
        let l = recurse(ctx, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?;
        let r = recurse(ctx, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?;
        Ok(l + r)
    }

    let mut ctx = Ctx { f, evals: 3 };
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(&mut ctx, a, b, fa, fm, fb, whole, tol, QUADRATURE_MAX_DEPTH)
}

/// One term of a pair-generation operator: β · a†_first · a†_second.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairTerm {
    pub beta: C64,
    pub modes: (ModeLabel, ModeLabel),
}

impl PairTerm {
    pub fn new(beta: C64, first: ModeLabel, second: ModeLabel) -> Self {
        PairTerm {
            beta,
            modes: (first, second),
        }
    }
}

/// A pair source: the operator C† = Σ_k β_k a†a† plus a display label.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpec {
    label: String,
    terms: Vec<PairTerm>,
}

impl SourceSpec {
    /// Validate and build a source from explicit terms.
    ///
    /// Requires at least one term, distinct modes within each term, and
    /// Σ|β_k|² > 0. Pair amplitudes at or above 1 (outside the low-gain
    /// regime the truncation assumes) are accepted with a warning.
    pub fn new(label: impl Into<String>, terms: Vec<PairTerm>) -> Result<Self> {
        let label = label.into();
        if terms.is_empty() {
            return Err(Error::DegenerateSource);
        }
        for term in &terms {
            if term.modes.0 == term.modes.1 {
                return Err(Error::Validation {
                    stanza: label.clone(),
                    msg: format!("pair term addresses mode {} twice", term.modes.0),
                });
            }
        }
        let total: f64 = terms.iter().map(|t| t.beta.norm_sqr()).sum();
        if total <= 0.0 {
            return Err(Error::DegenerateSource);
        }
        for term in &terms {
            if term.beta.norm() >= 1.0 {
                log::warn!(
                    "source '{}': |β| = {:.3} is outside the low-gain regime; \
                     truncation at two pairs may be inaccurate",
                    label,
                    term.beta.norm()
                );
            }
        }
        Ok(SourceSpec { label, terms })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn terms(&self) -> &[PairTerm] {
        &self.terms
    }

    /// Σ|β_k|² — the per-pulse pair-generation probability to lowest order.
    pub fn pair_probability(&self) -> f64 {
        self.terms.iter().map(|t| t.beta.norm_sqr()).sum()
    }

    /// The same source with every mode relocated to `path`. Sources are
    /// built on placeholder path 0; device constructors move them to their
    /// emission waveguide with this.
    pub fn on_path(&self, path: u32) -> SourceSpec {
        SourceSpec {
            label: self.label.clone(),
            terms: self
                .terms
                .iter()
                .map(|t| PairTerm {
                    beta: t.beta,
                    modes: (t.modes.0.on_path(path), t.modes.1.on_path(path)),
                })
                .collect(),
        }
    }

    /// Apply C† = Σ_k β_k a†a† once.
    pub fn apply_pair_operator(&self, state: &StateVector) -> StateVector {
        let mut out = StateVector::zero();
        for term in &self.terms {
            let raised = state
                .apply_creation(term.modes.0)
                .apply_creation(term.modes.1);
            out = out.add_scaled(&raised, term.beta);
        }
        out
    }
}

/// Single-pump source: pairs in matching bins, C† = β₁a†_{S0}a†_{I0} +
/// β₂a†_{S1}a†_{I1}, on placeholder path 0.
pub fn single_pump_source(beta1: C64, beta2: C64) -> Result<SourceSpec> {
    if beta1.norm_sqr() + beta2.norm_sqr() <= 0.0 {
        return Err(Error::DegenerateSource);
    }
    SourceSpec::new(
        "single_pump",
        vec![
            PairTerm::new(beta1, ModeLabel::signal(0, 0), ModeLabel::idler(0, 0)),
            PairTerm::new(beta2, ModeLabel::signal(0, 1), ModeLabel::idler(0, 1)),
        ],
    )
}

/// Dual-pump source: pairs in opposite bins, C† = β₁a†_{S0}a†_{I1} +
/// β₂a†_{S1}a†_{I0}, on placeholder path 0.
pub fn dual_pump_source(beta1: C64, beta2: C64) -> Result<SourceSpec> {
    if beta1.norm_sqr() + beta2.norm_sqr() <= 0.0 {
        return Err(Error::DegenerateSource);
    }
    SourceSpec::new(
        "dual_pump",
        vec![
            PairTerm::new(beta1, ModeLabel::signal(0, 0), ModeLabel::idler(0, 1)),
            PairTerm::new(beta2, ModeLabel::signal(0, 1), ModeLabel::idler(0, 0)),
        ],
    )
}

/// Emitted state truncated at `max_pairs` pair-generation events:
/// Σ_{p=0}^{max_pairs} (1/p!) C†^p |vac⟩, with the vacuum amplitude set to
/// exactly 1. Not normalized.
///
/// `max_pairs` must be 1 or 2; six-photon and higher terms are outside the
/// regime this model is valid in.
pub fn emit_state(source: &SourceSpec, max_pairs: u32) -> StateVector {
    assert!(
        (1..=2).contains(&max_pairs),
        "max_pairs must be 1 or 2, got {max_pairs}"
    );
    let mut acc = StateVector::vacuum();
    let mut power = StateVector::vacuum();
    for p in 1..=max_pairs {
        power = source
            .apply_pair_operator(&power)
            .scaled(C64::new(1.0 / p as f64, 0.0));
        acc = acc.add_scaled(&power, C64::new(1.0, 0.0));
    }
    acc
}

/// Tensor product of states on disjoint mode sets: amplitudes multiply,
/// occupations merge. Overlapping supports are a circuit wiring error.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let support_a: BTreeSet<ModeLabel> = a
        .terms()
        .flat_map(|(ket, _)| ket.modes().map(|(m, _)| m).collect::<Vec<_>>())
        .collect();
    for (ket, _) in b.terms() {
        for (mode, _) in ket.modes() {
            if support_a.contains(&mode) {
                return Err(Error::ModeCollision {
                    mode: mode.to_string(),
                });
            }
        }
    }

    let mut product =
        StateVector::zero().with_prune_tolerance(a.prune_tolerance().max(b.prune_tolerance()));
    let mut terms = Vec::new();
    for (ket_a, amp_a) in a.terms() {
        for (ket_b, amp_b) in b.terms() {
            let merged = FockBasisState::from_occupations(ket_a.modes().chain(ket_b.modes()));
            terms.push((merged, amp_a * amp_b));
        }
    }
    product = product.add_scaled(&StateVector::from_terms(terms), C64::new(1.0, 0.0));
    if a.is_normalized() && b.is_normalized() {
        product = product.mark_normalized();
    }
    Ok(product)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::inner_product;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn beta_of_zero_pump_is_zero() {
        let env = PumpEnvelope::new(c(1.0, 0.0), 0.0, 1.0, |_| C64::default()).unwrap();
        assert_eq!(compute_beta(&env).unwrap(), C64::default());
    }

    #[test]
    fn beta_of_flat_pulse_matches_closed_form() {
        let gamma = c(2.5, 0.0);
        let alpha0 = c(0.2, 0.1);
        let t = 3.0;
        let env = PumpEnvelope::constant(gamma, alpha0, 0.0, t).unwrap();
        let beta = compute_beta(&env).unwrap();
        let expect = -C64::i() * gamma * alpha0 * alpha0 * t;
        assert_abs_diff_eq!(beta.re, expect.re, epsilon = 1e-11);
        assert_abs_diff_eq!(beta.im, expect.im, epsilon = 1e-11);
    }

    #[test]
    fn beta_of_gaussian_pulse_matches_closed_form() {
        // ∫ α₀² exp(−t²/τ²) dt = α₀²τ√π, with e⁻⁶⁴ truncation negligible.
        let gamma = c(1.0e6, 0.0);
        let alpha0 = 0.35;
        let tau = 0.8e-9;
        let env = PumpEnvelope::gaussian(gamma, alpha0, tau).unwrap();
        let beta = compute_beta(&env).unwrap();
        let expect = -C64::i() * gamma * alpha0 * alpha0 * tau * std::f64::consts::PI.sqrt();
        assert!(
            (beta - expect).norm() < 1e-9 * expect.norm(),
            "beta {beta} vs closed form {expect}"
        );
    }

    #[test]
    fn beta_scales_linearly_in_gamma_and_quadratically_in_amplitude() {
        let base = PumpEnvelope::gaussian(c(1.3, -0.4), 0.25, 1.0).unwrap();
        let beta = compute_beta(&base).unwrap();

        let double_gamma = PumpEnvelope::gaussian(c(2.6, -0.8), 0.25, 1.0).unwrap();
        let beta_g = compute_beta(&double_gamma).unwrap();
        assert!((beta_g - beta * 2.0).norm() < 1e-12 * beta.norm().max(1.0));

        let scale = 1.7;
        let scaled = PumpEnvelope::gaussian(c(1.3, -0.4), 0.25 * scale, 1.0).unwrap();
        let beta_s = compute_beta(&scaled).unwrap();
        assert!(
            (beta_s - beta * scale * scale).norm() < 1e-12 * beta_s.norm().max(1.0),
            "quadratic amplitude scaling violated"
        );
    }

    #[test]
    fn envelope_rejects_bad_windows() {
        assert!(PumpEnvelope::constant(c(1.0, 0.0), c(1.0, 0.0), 1.0, 1.0).is_err());
        assert!(PumpEnvelope::gaussian(c(1.0, 0.0), 0.4, 0.0).is_err());
    }

    #[test]
    fn single_pump_first_order_amplitudes() {
        let b1 = c(0.12, 0.0);
        let b2 = c(0.0, 0.07);
        let source = single_pump_source(b1, b2).unwrap();
        let state = emit_state(&source, 1);

        let vac = FockBasisState::vacuum();
        let pair0 = FockBasisState::from_occupations([
            (ModeLabel::signal(0, 0), 1),
            (ModeLabel::idler(0, 0), 1),
        ]);
        let pair1 = FockBasisState::from_occupations([
            (ModeLabel::signal(0, 1), 1),
            (ModeLabel::idler(0, 1), 1),
        ]);
        assert_eq!(state.term_count(), 3);
        assert_eq!(state.amplitude(&vac), c(1.0, 0.0));
        assert_eq!(state.amplitude(&pair0), b1);
        assert_eq!(state.amplitude(&pair1), b2);
        assert!(state.project_photon_number(4).is_zero());
    }

    #[test]
    fn dual_pump_pair_operator_square_amplitudes() {
        // C†² |vac⟩ = 2β₁²|2_{S0},2_{I1}⟩ + 2β₁β₂|1,1,1,1⟩ + 2β₂²|2_{S1},2_{I0}⟩:
        // the √2 ladder factors turn the operator coefficients (β₁², 2β₁β₂,
        // β₂²) into these occupation-basis amplitudes.
        let b1 = c(0.2, 0.03);
        let b2 = c(-0.05, 0.11);
        let source = dual_pump_source(b1, b2).unwrap();
        let square =
            source.apply_pair_operator(&source.apply_pair_operator(&StateVector::vacuum()));

        let double0 = FockBasisState::from_occupations([
            (ModeLabel::signal(0, 0), 2),
            (ModeLabel::idler(0, 1), 2),
        ]);
        let double1 = FockBasisState::from_occupations([
            (ModeLabel::signal(0, 1), 2),
            (ModeLabel::idler(0, 0), 2),
        ]);
        let cross = FockBasisState::from_occupations([
            (ModeLabel::signal(0, 0), 1),
            (ModeLabel::signal(0, 1), 1),
            (ModeLabel::idler(0, 0), 1),
            (ModeLabel::idler(0, 1), 1),
        ]);
        assert!((square.amplitude(&double0) - b1 * b1 * 2.0).norm() < 1e-15);
        assert!((square.amplitude(&double1) - b2 * b2 * 2.0).norm() < 1e-15);
        assert!((square.amplitude(&cross) - b1 * b2 * 2.0).norm() < 1e-15);

        // Squared norm of the four-photon emission: 4|β₁|⁴ + 4|β₂|⁴ + 4|β₁β₂|².
        let b1s = b1.norm_sqr();
        let b2s = b2.norm_sqr();
        assert_abs_diff_eq!(
            square.norm_sq(),
            4.0 * (b1s * b1s + b2s * b2s + b1s * b2s),
            epsilon = 1e-15
        );

        // emit_state carries the 1/2! of the exponential series, so its
        // four-photon part is exactly half the operator square.
        let emitted = emit_state(&source, 2).project_photon_number(4);
        assert!(emitted.max_amplitude_diff(&square.scaled(c(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn emission_truncates_at_requested_pair_count() {
        let source = single_pump_source(c(0.3, 0.0), c(0.2, 0.0)).unwrap();
        let one = emit_state(&source, 1);
        assert!(one.project_photon_number(4).is_zero());
        let two = emit_state(&source, 2);
        assert!(!two.project_photon_number(4).is_zero());
        assert!(two.project_photon_number(6).is_zero());
    }

    #[test]
    fn first_order_bell_states_for_matched_amplitudes() {
        let beta = 0.2;
        let phi = std::f64::consts::FRAC_PI_4;
        let phase = C64::from_polar(1.0, phi);
        let amp = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);

        // Single pump → (|00⟩ + e^{iφ}|11⟩)/√2 in matching-bin pairs.
        let source = single_pump_source(c(beta, 0.0), phase * beta).unwrap();
        let (two_photon, _) = emit_state(&source, 1)
            .project_photon_number(2)
            .normalize()
            .unwrap();
        let target = StateVector::from_terms([
            (
                FockBasisState::from_occupations([
                    (ModeLabel::signal(0, 0), 1),
                    (ModeLabel::idler(0, 0), 1),
                ]),
                amp,
            ),
            (
                FockBasisState::from_occupations([
                    (ModeLabel::signal(0, 1), 1),
                    (ModeLabel::idler(0, 1), 1),
                ]),
                amp * phase,
            ),
        ]);
        let overlap = inner_product(&target, &two_photon).norm_sqr();
        assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);

        // Dual pump → (|01⟩ + e^{iφ}|10⟩)/√2 in opposite-bin pairs.
        let source = dual_pump_source(c(beta, 0.0), phase * beta).unwrap();
        let (two_photon, _) = emit_state(&source, 1)
            .project_photon_number(2)
            .normalize()
            .unwrap();
        let target = StateVector::from_terms([
            (
                FockBasisState::from_occupations([
                    (ModeLabel::signal(0, 0), 1),
                    (ModeLabel::idler(0, 1), 1),
                ]),
                amp,
            ),
            (
                FockBasisState::from_occupations([
                    (ModeLabel::signal(0, 1), 1),
                    (ModeLabel::idler(0, 0), 1),
                ]),
                amp * phase,
            ),
        ]);
        let overlap = inner_product(&target, &two_photon).norm_sqr();
        assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_sources_are_rejected() {
        assert!(matches!(
            single_pump_source(C64::default(), C64::default()),
            Err(Error::DegenerateSource)
        ));
        assert!(matches!(
            SourceSpec::new("empty", vec![]),
            Err(Error::DegenerateSource)
        ));
        let same_mode = PairTerm::new(
            c(0.1, 0.0),
            ModeLabel::signal(0, 0),
            ModeLabel::signal(0, 0),
        );
        assert!(SourceSpec::new("doubled", vec![same_mode]).is_err());
    }

    #[test]
    fn tensor_product_merges_disjoint_supports() {
        let a = emit_state(&single_pump_source(c(0.1, 0.0), c(0.2, 0.0)).unwrap(), 1);
        let vac = StateVector::vacuum();
        let product = tensor_product(&vac, &a).unwrap();
        assert!(product.max_amplitude_diff(&a) < 1e-15);

        let b = emit_state(
            &single_pump_source(c(0.3, 0.0), c(0.4, 0.0))
                .unwrap()
                .on_path(4),
            1,
        );
        let product = tensor_product(&a, &b).unwrap();
        assert_abs_diff_eq!(
            product.norm_sq(),
            a.norm_sq() * b.norm_sq(),
            epsilon = 1e-14
        );
        // The four-term two-pair sector: one pair from each source.
        let four = product.project_photon_number(4);
        assert_eq!(four.term_count(), 4);

        // Same path on both factors collides.
        assert!(matches!(
            tensor_product(&a, &a),
            Err(Error::ModeCollision { .. })
        ));
    }

    // Random source terms over distinct mode pairs on a given path.
    fn arb_betas() -> impl Strategy<Value = (C64, C64)> {
        ((-0.5..0.5f64, -0.5..0.5f64), (-0.5..0.5f64, -0.5..0.5f64))
            .prop_map(|((a, b), (x, y))| (C64::new(a, b), C64::new(x, y)))
            .prop_filter("non-degenerate", |(b1, b2)| {
                b1.norm_sqr() + b2.norm_sqr() > 1e-6
            })
    }

    proptest! {
        // norm²(a ⊗ b) = norm²(a) · norm²(b) on disjoint paths.
        #[test]
        fn tensor_product_norm_is_multiplicative(
            (b1, b2) in arb_betas(),
            (b3, b4) in arb_betas(),
            dual in prop::bool::ANY,
        ) {
            let mk = |x, y| if dual { dual_pump_source(x, y) } else { single_pump_source(x, y) };
            let a = emit_state(&mk(b1, b2).unwrap(), 2);
            let b = emit_state(&mk(b3, b4).unwrap().on_path(1), 2);
            let product = tensor_product(&a, &b).unwrap();
            prop_assert!((product.norm_sq() - a.norm_sq() * b.norm_sq()).abs() < 1e-12);
        }

        // Truncated emission equals the explicit series |vac⟩ + C†|vac⟩ + C†²|vac⟩/2.
        #[test]
        fn emission_matches_explicit_series((b1, b2) in arb_betas()) {
            let source = dual_pump_source(b1, b2).unwrap();
            let vac = StateVector::vacuum();
            let first = source.apply_pair_operator(&vac);
            let second = source.apply_pair_operator(&first);
            let series = vac
                .add_scaled(&first, C64::new(1.0, 0.0))
                .add_scaled(&second, C64::new(0.5, 0.0));
            let emitted = emit_state(&source, 2);
            prop_assert!(emitted.max_amplitude_diff(&series) < 1e-14);
        }
    }
}
