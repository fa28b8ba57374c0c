//! The circuit-file format end to end: bundled fixtures parse, instantiate,
//! and simulate to their documented numbers; serialization round-trips; the
//! parser reports errors with line context; validation rejects bad optics.

use std::collections::BTreeMap;
use std::path::PathBuf;

use freqbin::circuit_file::{parse_value, CircuitFile, ParamValue};
use freqbin::circuits::{ghz_fraction_formula, run};
use freqbin::sources::{compute_beta, PumpEnvelope};
use freqbin::Error;
use num_complex::Complex64 as C64;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("circuits")
        .join(name)
}

fn no_overrides() -> BTreeMap<String, ParamValue> {
    BTreeMap::new()
}

#[test]
fn bundled_fixtures_simulate_to_their_documented_numbers() {
    let cases: [(&str, f64, Option<f64>); 6] = [
        ("ghz_equal.circuit", 0.5, Some(1.0)),
        (
            "ghz_asym.circuit",
            ghz_fraction_formula([
                C64::new(0.2, 0.0),
                C64::new(0.3, 0.0),
                C64::new(0.25, 0.0),
                C64::new(0.35, 0.0),
            ])
            .unwrap(),
            Some(1.0),
        ),
        ("w_canonical.circuit", 1.0 / 28.0, Some(1.0)),
        ("w_equal_betas.circuit", 0.125, Some(1.0)),
        ("bell_single_pump.circuit", 1.0, Some(1.0)),
        ("bell_dual_pump.circuit", 1.0, Some(1.0)),
    ];
    for (name, fraction, fidelity) in cases {
        let file = CircuitFile::load(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        let circuit = file.instantiate(&no_overrides()).unwrap();
        let result = run(&circuit).unwrap();
        assert!(
            (result.coincidence_fraction - fraction).abs() < 1e-12,
            "{name}: fraction {} != {fraction}",
            result.coincidence_fraction
        );
        assert_eq!(result.fidelity.is_some(), fidelity.is_some(), "{name}");
        if let Some(expected) = fidelity {
            assert!(
                (result.fidelity.unwrap() - expected).abs() < 1e-12,
                "{name}: fidelity {:?} != {expected}",
                result.fidelity
            );
        }
    }
}

#[test]
fn herald_report_matches_fixture_layout() {
    let file = CircuitFile::load(fixture("w_canonical.circuit")).unwrap();
    let circuit = file.instantiate(&no_overrides()).unwrap();
    let result = run(&circuit).unwrap();
    assert_eq!(circuit.herald_paths(), &[4]);
    assert_eq!(result.herald_bins, vec![1]);
}

#[test]
fn serialization_round_trips_to_the_same_circuit_and_text() {
    for name in [
        "ghz_equal.circuit",
        "ghz_asym.circuit",
        "w_canonical.circuit",
        "w_equal_betas.circuit",
        "bell_single_pump.circuit",
        "bell_dual_pump.circuit",
    ] {
        let original = CircuitFile::load(fixture(name)).unwrap();
        let text = original.serialize();
        let reparsed = CircuitFile::parse(&text, original.name())
            .unwrap_or_else(|e| panic!("{name} reparse: {e}"));
        assert_eq!(
            original.instantiate(&no_overrides()).unwrap(),
            reparsed.instantiate(&no_overrides()).unwrap(),
            "{name}: round-tripped circuit differs"
        );
        assert_eq!(
            text,
            reparsed.serialize(),
            "{name}: canonical form is not a fixed point"
        );
    }
}

#[test]
fn overrides_rebuild_the_circuit_with_new_values() {
    let file = CircuitFile::load(fixture("ghz_equal.circuit")).unwrap();
    let mut overrides = BTreeMap::new();
    overrides.insert("beta".into(), parse_value("0.25").unwrap());
    let circuit = file.instantiate(&overrides).unwrap();
    let expected = 2.0 * 0.25f64.powi(2); // two equal pair processes per source
    assert!((circuit.pair_probability() - expected).abs() < 1e-15);

    // Equal pump amplitudes keep the balanced fraction whatever their size.
    let result = run(&circuit).unwrap();
    assert!((result.coincidence_fraction - 0.5).abs() < 1e-12);
}

#[test]
fn envelope_values_integrate_the_pump_pulse() {
    let text = "\
device = custom
name = envelope-demo
logical = 1 2

params {
  drive = envelope { gamma = [0, 0.02], alpha0 = 1.1, tau = 0.8 }
}

source single_pump {
  path = 1
  beta1 = $drive
  beta2 = $drive
}

element demux {
  in = 1
  signal_out = 1
  idler_out = 2
}

detect {
  1: 1
  2: 1
  exclusive: true
}
";
    let file = CircuitFile::parse(text, "envelope-demo").unwrap();
    let circuit = file.instantiate(&no_overrides()).unwrap();

    let envelope = PumpEnvelope::gaussian(C64::new(0.0, 0.02), 1.1, 0.8).unwrap();
    let beta = compute_beta(&envelope).unwrap();
    let expected = 2.0 * beta.norm_sqr();
    assert!(
        (circuit.pair_probability() - expected).abs() < 1e-12,
        "pair probability {} != {expected}",
        circuit.pair_probability()
    );
}

#[test]
fn parse_errors_carry_line_context_and_are_collected() {
    let text = "\
device = ghz

params {
  beta = 0.1
  beta
}

junk
";
    let err = CircuitFile::parse(text, "broken").unwrap_err();
    let Error::Parse { line, msg } = &err else {
        panic!("expected a parse error, got {err}");
    };
    assert_eq!(*line, 5, "first offending line");
    assert!(msg.contains("line 5"), "message lists line 5: {msg}");
    assert!(msg.contains("line 8"), "message lists line 8 too: {msg}");
}

#[test]
fn validation_names_the_offending_stanza() {
    // A standard-layout device refuses custom plumbing.
    let text = "\
device = ghz

coupler {
  path_a = 1
  path_b = 2
}
";
    let err = CircuitFile::parse(text, "bad")
        .and_then(|f| f.instantiate(&no_overrides()))
        .unwrap_err();
    assert!(
        matches!(&err, Error::Validation { stanza, .. } if stanza.contains("coupler")),
        "error should name the stanza: {err}"
    );

    // Unknown devices are rejected outright.
    let err = CircuitFile::parse("device = bell\n", "bad").unwrap_err();
    assert!(format!("{err}").contains("bell"), "{err}");
}

#[test]
fn non_unitary_couplers_are_rejected_at_instantiation() {
    let text = "\
device = w

params {
  beta1 = 0.2
  beta2 = 0.1
  T1 = 0.70710678118654752
  R1 = 0.70710678118654752
}
";
    let file = CircuitFile::parse(text, "bad-coupler").unwrap();
    let err = file.instantiate(&no_overrides()).unwrap_err();
    assert!(
        matches!(err, Error::NonUnitaryCoupler { .. }),
        "expected a unitarity rejection, got {err}"
    );
}

#[test]
fn detect_stanza_requires_an_explicit_exclusivity_choice() {
    let text = "\
device = custom
name = no-exclusive
logical = 1 2

source single_pump {
  path = 1
  beta1 = 0.1
  beta2 = 0.1
}

element demux {
  in = 1
  signal_out = 1
  idler_out = 2
}

detect {
  1: 1
  2: 1
}
";
    let err = CircuitFile::parse(text, "no-exclusive")
        .and_then(|f| f.instantiate(&no_overrides()))
        .unwrap_err();
    assert!(
        format!("{err}").contains("exclusive"),
        "error should mention the missing flag: {err}"
    );
}

#[test]
fn unknown_override_names_are_refused() {
    let file = CircuitFile::load(fixture("w_canonical.circuit")).unwrap();
    assert!(file.accepts_parameter("beta1"));
    assert!(file.accepts_parameter("beta_ratio"));
    assert!(file.accepts_parameter("rep_rate"));
    assert!(!file.accepts_parameter("bogus"));

    let mut overrides = BTreeMap::new();
    overrides.insert("bogus".into(), parse_value("1").unwrap());
    let err = file.resolved_parameters(&overrides).unwrap_err();
    assert!(
        matches!(err, Error::UnknownParameter { .. }),
        "expected an unknown-parameter error, got {err}"
    );
}
