//! Result rendering: fixed-precision text reports and machine-readable
//! JSON documents.
//!
//! Text mode prints every number with twelve significant digits; structured
//! mode keeps full double precision (shortest round-trip formatting). Both
//! renderings are deterministic — map keys are sorted and nothing
//! time-dependent enters the payload — so identical runs produce byte-
//! identical output, which makes reports diffable and suitable for golden
//! files.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::circuit_file::ParamValue;
use crate::circuits::{Circuit, SimulationResult, SweepRow};
use crate::fock::Colour;
use crate::postselect::BinRegisterState;

/// Significant digits in text-mode numbers.
const TEXT_DIGITS: usize = 12;

/// Format with a fixed number of significant digits. Plain decimal notation
/// within a readable magnitude range, scientific notation outside it.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    // Let the exponential formatter do the rounding, then read the decimal
    // exponent back; this keeps borderline values like 0.99999… from
    // slipping into the wrong branch.
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci
        .split('e')
        .nth(1)
        .and_then(|e| e.parse().ok())
        .unwrap_or(0);
    if exp < -4 || exp >= digits as i32 {
        return sci;
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}

fn sig(x: f64) -> String {
    format_sig(x, TEXT_DIGITS)
}

/// "SIIS"-style colour sequence.
fn colour_string(pattern: &[Colour]) -> String {
    pattern.iter().map(|c| c.to_string()).collect()
}

fn param_json(value: &ParamValue) -> Value {
    match *value {
        ParamValue::Real(x) => json!(x),
        ParamValue::Complex(z) => json!({"re": z.re, "im": z.im}),
        ParamValue::Envelope { gamma, alpha0, tau } => json!({
            "gamma": {"re": gamma.re, "im": gamma.im},
            "alpha0": alpha0,
            "tau": tau,
        }),
    }
}

fn parameters_json(parameters: &BTreeMap<String, ParamValue>) -> Value {
    Value::Object(
        parameters
            .iter()
            .map(|(k, v)| (k.clone(), param_json(v)))
            .collect(),
    )
}

fn result_fields(result: &SimulationResult) -> Value {
    let bin_state: Value = Value::Object(
        result
            .bin_state
            .amplitudes()
            .map(|(bins, amp)| {
                (
                    BinRegisterState::bin_string(bins),
                    json!({"re": amp.re, "im": amp.im}),
                )
            })
            .collect(),
    );
    json!({
        "sector_photons": result.sector_photons,
        "sector_probability": result.sector_probability,
        "probability": result.detection_probability,
        "fraction_of_n_photon_sector": result.coincidence_fraction,
        "colour_pattern": colour_string(&result.colour_pattern),
        "herald_bins": result.herald_bins,
        "bin_state": bin_state,
        "fidelity": result.fidelity,
        "purity": result.purity,
        "rates": {
            "rep_rate": result.rates.rep_rate,
            "pair_prob_per_pulse": result.rates.pair_prob_per_pulse,
            "four_photon_rate": result.rates.four_photon_rate,
            "entangled_state_rate": result.rates.entangled_state_rate,
        },
    })
}

fn result_json(circuit: &Circuit, result: &SimulationResult) -> Value {
    let mut fields = result_fields(result);
    fields["herald_paths"] = json!(circuit.herald_paths());
    fields
}

/// Human-readable report for one simulation.
pub fn render_text(
    circuit: &Circuit,
    device: &str,
    parameters: &BTreeMap<String, ParamValue>,
    result: &SimulationResult,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("circuit: {} (device {device})\n", circuit.name()));
    if !parameters.is_empty() {
        out.push_str("parameters:\n");
        for (name, value) in parameters {
            out.push_str(&format!("  {name} = {value}\n"));
        }
    }
    let n = result.sector_photons;
    out.push_str(&format!("sector photons: {n}\n"));
    out.push_str(&format!(
        "sector probability: {}\n",
        sig(result.sector_probability)
    ));
    out.push_str(&format!(
        "probability: {}\n",
        sig(result.detection_probability)
    ));
    out.push_str(&format!(
        "fraction of {n}-photon sector: {}\n",
        sig(result.coincidence_fraction)
    ));
    out.push_str(&format!(
        "colour pattern: {}\n",
        colour_string(&result.colour_pattern)
    ));
    if result.herald_bins.is_empty() {
        out.push_str("herald: none\n");
    } else {
        out.push_str(&format!(
            "herald: bins {} on paths {}\n",
            BinRegisterState::bin_string(&result.herald_bins),
            join_paths(circuit.herald_paths()),
        ));
    }
    out.push_str("bin state:\n");
    for (bins, amp) in result.bin_state.amplitudes() {
        out.push_str(&format!(
            "  |{}>  {} {}i   p = {}\n",
            BinRegisterState::bin_string(bins),
            sig(amp.re),
            signed(amp.im),
            sig(amp.norm_sqr()),
        ));
    }
    match result.fidelity {
        Some(f) => out.push_str(&format!("fidelity: {}\n", sig(f))),
        None => out.push_str("fidelity: (no target)\n"),
    }
    out.push_str(&format!("purity: {}\n", sig(result.purity)));
    out.push_str("rates:\n");
    out.push_str(&format!("  rep rate: {} Hz\n", sig(result.rates.rep_rate)));
    out.push_str(&format!(
        "  pair probability per pulse: {}\n",
        sig(result.rates.pair_prob_per_pulse)
    ));
    out.push_str(&format!(
        "  {n}-photon rate: {} Hz\n",
        sig(result.rates.four_photon_rate)
    ));
    out.push_str(&format!(
        "  entangled-state rate: {} Hz\n",
        sig(result.rates.entangled_state_rate)
    ));
    out
}

fn signed(x: f64) -> String {
    if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
        format!("- {}", sig(-x))
    } else {
        format!("+ {}", sig(x))
    }
}

fn join_paths(paths: &[u32]) -> String {
    paths
        .iter()
        .map(|p| p.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// Machine-readable report for one simulation (pretty JSON, trailing
/// newline).
pub fn render_structured(
    circuit: &Circuit,
    device: &str,
    parameters: &BTreeMap<String, ParamValue>,
    result: &SimulationResult,
) -> String {
    let doc = json!({
        "format": "freqbin-result",
        "version": 1,
        "circuit": circuit.name(),
        "device": device,
        "parameters": parameters_json(parameters),
        "result": result_json(circuit, result),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json rendering is infallible");
    text.push('\n');
    text
}

/// Human-readable sweep table: one row per grid assignment with the headline
/// quantities, sized to its contents.
pub fn render_sweep_text(name: &str, device: &str, rows: &[SweepRow<ParamValue>]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "sweep: {name} (device {device}, {} rows)\n",
        rows.len()
    ));
    if rows.is_empty() {
        return out;
    }

    let axes: Vec<String> = rows[0]
        .assignment
        .iter()
        .map(|(name, _)| name.clone())
        .collect();
    let mut header: Vec<String> = axes.clone();
    header.extend(
        ["fraction", "probability", "fidelity", "status"]
            .iter()
            .map(|s| s.to_string()),
    );

    let mut table: Vec<Vec<String>> = vec![header];
    for row in rows {
        let mut cells: Vec<String> = row
            .assignment
            .iter()
            .map(|(_, value)| value.to_string())
            .collect();
        match &row.result {
            Ok(result) => {
                cells.push(sig(result.coincidence_fraction));
                cells.push(sig(result.detection_probability));
                cells.push(match result.fidelity {
                    Some(f) => sig(f),
                    None => "-".into(),
                });
                cells.push("ok".into());
            }
            Err(err) => {
                cells.extend(["-".into(), "-".into(), "-".into(), err.to_string()]);
            }
        }
        table.push(cells);
    }

    let columns = table[0].len();
    let widths: Vec<usize> = (0..columns)
        .map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0))
        .collect();
    for row in &table {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:<width$}", width = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}

/// Machine-readable sweep document.
pub fn render_sweep_structured(name: &str, device: &str, rows: &[SweepRow<ParamValue>]) -> String {
    let axes: Vec<String> = rows
        .first()
        .map(|row| row.assignment.iter().map(|(n, _)| n.clone()).collect())
        .unwrap_or_default();
    let rows_json: Vec<Value> = rows
        .iter()
        .map(|row| {
            let assignment = Value::Object(
                row.assignment
                    .iter()
                    .map(|(axis, value)| (axis.clone(), param_json(value)))
                    .collect(),
            );
            match &row.result {
                Ok(result) => json!({
                    "assignment": assignment,
                    "result": result_fields(result),
                }),
                Err(err) => json!({
                    "assignment": assignment,
                    "error": err.to_string(),
                }),
            }
        })
        .collect();
    let doc = json!({
        "format": "freqbin-sweep",
        "version": 1,
        "circuit": name,
        "device": device,
        "grid": axes,
        "rows": rows_json,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("json rendering is infallible");
    text.push('\n');
    text
}
