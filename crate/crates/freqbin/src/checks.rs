//! Built-in verification suite behind the CLI's `--check` flag.
//!
//! Each check exercises one headline property of the simulator — the
//! balanced four-fold fraction, the heralded W fraction, agreement between
//! the closed-form fraction formulas and full simulation, the emission norm
//! identities, element conservation laws, double-pair exclusion, and rate
//! magnitudes — and reports pass/fail with the numbers it saw. The random
//! checks use a fixed seed, so the suite is deterministic.

use num_complex::Complex64 as C64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::circuits::{
    build_ghz_device, build_w_device, estimate_rates, ghz_fraction_formula, run,
    single_source_double_pair_probability, w_fraction_formula,
};
use crate::elements::{
    apply_adddrop_swap, apply_demux, apply_directional_coupler, CouplerParams, ModePredicate,
};
use crate::error::Result;
use crate::fock::{Colour, FockBasisState, ModeLabel, StateVector};
use crate::sources::{dual_pump_source, single_pump_source, tensor_product};

/// Result of one named check.
#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Run the whole suite; outcomes come back in a fixed order.
pub fn run_all() -> Vec<CheckOutcome> {
    vec![
        guarded("balanced_four_fold_fraction", balanced_four_fold_fraction),
        guarded("heralded_w_fraction", heralded_w_fraction),
        guarded(
            "fraction_formulas_match_simulation",
            fraction_formulas_match_simulation,
        ),
        guarded("emission_norm_identities", emission_norm_identities),
        guarded("element_conservation_laws", element_conservation_laws),
        guarded("double_pair_exclusion", double_pair_exclusion),
        guarded("rate_magnitudes", rate_magnitudes),
    ]
}

fn guarded(name: &'static str, body: fn() -> Result<Vec<String>>) -> CheckOutcome {
    match body() {
        Ok(issues) if issues.is_empty() => CheckOutcome {
            name,
            passed: true,
            detail: "ok".into(),
        },
        Ok(issues) => CheckOutcome {
            name,
            passed: false,
            detail: issues.join("; "),
        },
        Err(err) => CheckOutcome {
            name,
            passed: false,
            detail: format!("error: {err}"),
        },
    }
}

fn expect_close(issues: &mut Vec<String>, label: &str, got: f64, want: f64, tol: f64) {
    let difference = (got - want).abs();
    if difference.is_nan() || difference > tol {
        issues.push(format!("{label}: got {got}, want {want} (tol {tol:e})"));
    }
}

/// Equal pump amplitudes send exactly half of the four-photon coincidences
/// into the entangled pair of bin states, with unit fidelity and the
/// signal–idler–idler–signal colour order.
fn balanced_four_fold_fraction() -> Result<Vec<String>> {
    let mut issues = Vec::new();
    let beta = C64::new(0.3, 0.0);
    let result = run(&build_ghz_device([beta; 4])?)?;
    expect_close(
        &mut issues,
        "fraction",
        result.coincidence_fraction,
        0.5,
        1e-12,
    );
    expect_close(
        &mut issues,
        "fidelity",
        result.fidelity.unwrap_or(f64::NAN),
        1.0,
        1e-12,
    );
    let colours: String = result
        .colour_pattern
        .iter()
        .map(|c| c.to_string())
        .collect();
    if colours != "SIIS" {
        issues.push(format!("colour pattern: got {colours}, want SIIS"));
    }
    Ok(issues)
}

/// In the 2:1 pump configuration the heralded device turns 1/28 of its
/// four-photon sector into the balanced three-path single-photon state.
fn heralded_w_fraction() -> Result<Vec<String>> {
    let mut issues = Vec::new();
    let circuit = build_w_device(
        C64::new(0.2, 0.0),
        C64::new(0.1, 0.0),
        CouplerParams::fifty_fifty(),
        CouplerParams::fifty_fifty(),
    )?;
    let result = run(&circuit)?;
    expect_close(
        &mut issues,
        "fraction",
        result.coincidence_fraction,
        1.0 / 28.0,
        1e-12,
    );
    expect_close(
        &mut issues,
        "fidelity",
        result.fidelity.unwrap_or(f64::NAN),
        1.0,
        1e-12,
    );
    if result.herald_bins != vec![1] {
        issues.push(format!(
            "herald bins: got {:?}, want [1]",
            result.herald_bins
        ));
    }
    Ok(issues)
}

/// The closed-form coincidence fractions reproduce full simulation: the
/// heralded-device formula over a 5×5×4 grid of (|β₁|, |β₂|, relative
/// phase), and the four-fold formula along a matching diagonal.
fn fraction_formulas_match_simulation() -> Result<Vec<String>> {
    let mut issues = Vec::new();
    let magnitudes = log_grid(0.01, 0.3, 5);
    let phases = [
        0.0,
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::FRAC_PI_2,
        std::f64::consts::PI,
    ];
    for &m1 in &magnitudes {
        for &m2 in &magnitudes {
            for &phi in &phases {
                let beta1 = C64::from_polar(m1, phi);
                let beta2 = C64::new(m2, 0.0);
                let circuit = build_w_device(
                    beta1,
                    beta2,
                    CouplerParams::fifty_fifty(),
                    CouplerParams::fifty_fifty(),
                )?;
                let simulated = run(&circuit)?.coincidence_fraction;
                let formula = w_fraction_formula(beta1, beta2)?;
                expect_close(
                    &mut issues,
                    &format!("heralded fraction at |β₁|={m1}, |β₂|={m2}, φ={phi}"),
                    simulated,
                    formula,
                    1e-12,
                );
            }
        }
    }
    for &m in &magnitudes {
        for &phi in &phases {
            let betas = [
                C64::from_polar(m, phi),
                C64::new(0.8 * m, 0.0),
                C64::from_polar(1.2 * m, -0.5 * phi),
                C64::new(m, 0.0),
            ];
            let simulated = run(&build_ghz_device(betas)?)?.coincidence_fraction;
            let formula = ghz_fraction_formula(betas)?;
            expect_close(
                &mut issues,
                &format!("four-fold fraction at m={m}, φ={phi}"),
                simulated,
                formula,
                1e-12,
            );
        }
    }
    Ok(issues)
}

/// Norms of the four-photon emission brackets: applying the pair operator
/// twice on vacuum gives norm² = 4|β₁|⁴ + 4|β₂|⁴ + 4|β₁β₂|², and the
/// herald-filtered four-photon state of the W device carries
/// (16|β₂|⁴ + 8|β₁β₂|²)/16.
fn emission_norm_identities() -> Result<Vec<String>> {
    let mut issues = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_f0ca);
    for trial in 0..10 {
        let beta1 = random_beta(&mut rng);
        let beta2 = random_beta(&mut rng);
        let b1 = beta1.norm_sqr();
        let b2 = beta2.norm_sqr();

        let source = dual_pump_source(beta1, beta2)?;
        let squared =
            source.apply_pair_operator(&source.apply_pair_operator(&StateVector::vacuum()));
        let expected = 4.0 * b1 * b1 + 4.0 * b2 * b2 + 4.0 * b1 * b2;
        expect_close(
            &mut issues,
            &format!("double-pair norm² (trial {trial})"),
            squared.norm_sq(),
            expected,
            1e-12 * expected,
        );

        let circuit = build_w_device(
            beta1,
            beta2,
            CouplerParams::fifty_fifty(),
            CouplerParams::fifty_fifty(),
        )?;
        let (spec, path) = &circuit.sources()[0];
        let spec = spec.on_path(*path);
        let squared = spec.apply_pair_operator(&spec.apply_pair_operator(&StateVector::vacuum()));
        let evolved = circuit.apply_elements(&squared)?;
        let filtered = evolved.filter_kets(|ket| circuit.pattern().matches(ket));
        let expected = 16.0 * b2 * b2 + 8.0 * b1 * b2;
        expect_close(
            &mut issues,
            &format!("heralded bracket norm² (trial {trial})"),
            16.0 * filtered.norm_sq(),
            expected,
            1e-12 * expected,
        );
    }
    Ok(issues)
}

/// Demux, add–drop swap, and couplers preserve norm and the per-colour
/// photon budget; the swap is an involution; a balanced coupler cancels the
/// two-path coincidence amplitude (and a rotated one leaves cos 2θ of it).
fn element_conservation_laws() -> Result<Vec<String>> {
    let mut issues = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0xe1e_ca11);
    for trial in 0..100 {
        let state = random_two_source_state(&mut rng)?;
        let norm_label = |op: &str| format!("{op} norm (trial {trial})");

        let demuxed = apply_demux(&state, 0, 5, 6)?;
        expect_close(
            &mut issues,
            &norm_label("demux"),
            demuxed.norm_sq(),
            1.0,
            1e-12,
        );
        conservation(&mut issues, trial, "demux", &state, &demuxed);

        let pred = ModePredicate::colour_bin(Colour::Idler, 1);
        let swapped = apply_adddrop_swap(&state, 0, 3, pred);
        expect_close(
            &mut issues,
            &norm_label("swap"),
            swapped.norm_sq(),
            1.0,
            1e-12,
        );
        conservation(&mut issues, trial, "swap", &state, &swapped);
        let back = apply_adddrop_swap(&swapped, 0, 3, pred);
        let diff = back.max_amplitude_diff(&state);
        if diff > 1e-12 {
            issues.push(format!(
                "swap applied twice drifts by {diff:e} (trial {trial})"
            ));
        }

        let theta = rng.random_range(0.0..std::f64::consts::PI);
        let coupler = CouplerParams::from_theta(theta);
        let coupled = apply_directional_coupler(&state, 0, 3, coupler)?;
        expect_close(
            &mut issues,
            &norm_label("coupler"),
            coupled.norm_sq(),
            1.0,
            1e-12,
        );
        conservation(&mut issues, trial, "coupler", &state, &coupled);

        // Two indistinguishable photons entering a coupler on opposite
        // paths: the coincidence amplitude is T² + R² = cos 2θ.
        let mode_a = ModeLabel {
            path: 0,
            colour: Colour::Signal,
            bin: 0,
        };
        let mode_b = ModeLabel { path: 3, ..mode_a };
        let pair = StateVector::vacuum()
            .apply_creation(mode_a)
            .apply_creation(mode_b);
        let mixed = apply_directional_coupler(&pair, 0, 3, coupler)?;
        let coincidence = mixed.amplitude(&FockBasisState::from_occupations([
            (mode_a, 1),
            (mode_b, 1),
        ]));
        expect_close(
            &mut issues,
            &format!("coincidence amplitude at theta={theta} (trial {trial})"),
            (coincidence - C64::new((2.0 * theta).cos(), 0.0)).norm(),
            0.0,
            1e-12,
        );
    }
    Ok(issues)
}

/// Four-photon coincidences need one pair from each source: a double pair
/// from either single source alone never fires the pattern.
fn double_pair_exclusion() -> Result<Vec<String>> {
    let mut issues = Vec::new();
    let configurations: [[C64; 4]; 2] = [
        [C64::new(0.3, 0.0); 4],
        [
            C64::new(0.2, 0.0),
            C64::new(0.3, 0.0),
            C64::new(0.25, 0.0),
            C64::new(0.35, 0.0),
        ],
    ];
    for (which, betas) in configurations.iter().enumerate() {
        let circuit = build_ghz_device(*betas)?;
        for source_index in 0..circuit.sources().len() {
            let probability = single_source_double_pair_probability(&circuit, source_index)?;
            if probability != 0.0 {
                issues.push(format!(
                    "configuration {which}, source {source_index}: leakage {probability:e}"
                ));
            }
        }
    }
    Ok(issues)
}

/// Rate arithmetic lands in the right decade: pair probability 0.1 at 1 MHz
/// gives a 10 kHz four-photon stream, so kHz-scale entangled output at
/// fraction 1/2 and hundreds per second at 1/28.
fn rate_magnitudes() -> Result<Vec<String>> {
    let mut issues = Vec::new();
    let half = estimate_rates(0.1, 1e6, 0.5);
    expect_close(
        &mut issues,
        "four-photon rate",
        half.four_photon_rate,
        1e4,
        1e-9,
    );
    if !(1e3..=1e5).contains(&half.entangled_state_rate) {
        issues.push(format!(
            "entangled rate at fraction 1/2: {} outside [1e3, 1e5]",
            half.entangled_state_rate
        ));
    }
    let heralded = estimate_rates(0.1, 1e6, 1.0 / 28.0);
    if !(1e2..=1e4).contains(&heralded.entangled_state_rate) {
        issues.push(format!(
            "entangled rate at fraction 1/28: {} outside [1e2, 1e4]",
            heralded.entangled_state_rate
        ));
    }
    Ok(issues)
}

fn log_grid(low: f64, high: f64, points: usize) -> Vec<f64> {
    let step = (high / low).ln() / (points - 1) as f64;
    (0..points).map(|i| low * (step * i as f64).exp()).collect()
}

fn random_beta(rng: &mut ChaCha8Rng) -> C64 {
    C64::from_polar(
        rng.random_range(0.05..0.35),
        rng.random_range(0.0..std::f64::consts::TAU),
    )
}

/// A normalized two-source emission (paths 0 and 3, up to two pairs each) —
/// the kind of state every element in the four-photon devices actually
/// sees, occupied up to eight photons across eight modes.
fn random_two_source_state(rng: &mut ChaCha8Rng) -> Result<StateVector> {
    let emit = |rng: &mut ChaCha8Rng, path: u32| -> Result<StateVector> {
        let spec = single_pump_source(random_beta(rng), random_beta(rng))?.on_path(path);
        Ok(crate::sources::emit_state(&spec, 2))
    };
    let left = emit(rng, 0)?;
    let right = emit(rng, 3)?;
    let (state, _) = tensor_product(&left, &right)?.normalize()?;
    Ok(state)
}

/// Photon number per (colour, bin) is an invariant of every element here:
/// exactly on each basis ket (elements move photons between paths, never
/// between colours or bins), and hence for the expectation values too.
fn conservation(
    issues: &mut Vec<String>,
    trial: usize,
    op: &str,
    before: &StateVector,
    after: &StateVector,
) {
    let allowed: std::collections::BTreeSet<Vec<(Colour, u32, u32)>> =
        before.terms().map(|(ket, _)| signature(ket)).collect();
    for (ket, _) in after.terms() {
        if !allowed.contains(&signature(ket)) {
            issues.push(format!(
                "{op} broke colour/bin/photon conservation on ket {ket} (trial {trial})"
            ));
        }
    }
    for colour in [Colour::Signal, Colour::Idler] {
        for bin in [0, 1] {
            let b = expected_count(before, colour, bin);
            let a = expected_count(after, colour, bin);
            if (a - b).abs() > 1e-12 {
                issues.push(format!(
                    "{op} changes the {colour}{bin} photon budget by {:e} (trial {trial})",
                    a - b
                ));
            }
        }
    }
}

/// Path-blind photon content of a ket: occupation per (colour, bin).
fn signature(ket: &FockBasisState) -> Vec<(Colour, u32, u32)> {
    let mut counts: std::collections::BTreeMap<(Colour, u32), u32> = Default::default();
    for (mode, n) in ket.modes() {
        *counts.entry((mode.colour, mode.bin)).or_default() += n;
    }
    counts
        .into_iter()
        .map(|((colour, bin), n)| (colour, bin, n))
        .collect()
}

/// ⟨n⟩ for photons of one colour and bin, any path.
fn expected_count(state: &StateVector, colour: Colour, bin: u32) -> f64 {
    state
        .terms()
        .map(|(ket, amp)| {
            let count: u32 = ket
                .modes()
                .filter(|(mode, _)| mode.colour == colour && mode.bin == bin)
                .map(|(_, n)| n)
                .sum();
            amp.norm_sqr() * count as f64
        })
        .sum()
}

/// Render outcomes as PASS/FAIL lines; true when everything passed.
pub fn report(outcomes: &[CheckOutcome]) -> (String, bool) {
    let mut out = String::new();
    let mut all_passed = true;
    for outcome in outcomes {
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        all_passed &= outcome.passed;
        out.push_str(&format!(
            "{status}  {name}: {detail}\n",
            name = outcome.name,
            detail = outcome.detail
        ));
    }
    let summary = if all_passed {
        "all checks passed"
    } else {
        "CHECKS FAILED"
    };
    out.push_str(&format!(
        "{summary} ({}/{})\n",
        outcomes.iter().filter(|o| o.passed).count(),
        outcomes.len()
    ));
    (out, all_passed)
}
