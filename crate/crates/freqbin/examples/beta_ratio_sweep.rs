//! Parameter sweep over the W-device pump balance, via the sweep driver and
//! via the circuit-file grid that backs `freqbin --grid`.
//!
//! The entangled-state yield of the heralded W source is a tug of war: the
//! herald needs a |β₂|⁴ double emission or a |β₁β₂| cross term, while the
//! total four-photon rate grows with both pumps. Sweeping the ratio
//! |β₁|/|β₂| maps out the trade-off and finds the canonical operating
//! points (1/4 at β₁ = 0, 1/8 balanced, 1/28 at ratio 2).

use freqbin::circuit_file::{parse_grid_axis, CircuitFile, ParamValue};
use freqbin::circuits::w_fraction_formula;
use freqbin::{run, sweep};
use num_complex::Complex64 as C64;

const CIRCUIT: &str = "\
device = w
name = ratio-demo

params {
  beta2 = 0.1
  beta_ratio = 2
}
";

fn main() -> freqbin::Result<()> {
    let file = CircuitFile::parse(CIRCUIT, "ratio-demo")?;
    let (axis, values) = parse_grid_axis("beta_ratio=0,0.5,1,2,4,8")?;
    let grid = vec![(axis, values)];

    let rows = sweep(&grid, |assignment| {
        let mut overrides = std::collections::BTreeMap::new();
        for (name, value) in assignment {
            overrides.insert(name.clone(), value.clone());
        }
        let circuit = file.instantiate(&overrides)?;
        run(&circuit)
    });

    println!("ratio    fraction        closed form     fidelity");
    for row in &rows {
        let ratio = match row.assignment[0].1 {
            ParamValue::Real(r) => r,
            _ => unreachable!("grid axes parse as reals"),
        };
        let result = row.result.as_ref().expect("sweep points are all valid");
        let reference = w_fraction_formula(C64::new(0.1 * ratio, 0.0), C64::new(0.1, 0.0))?;
        println!(
            "{:>5.2}    {:.10}    {:.10}    {:.10}",
            ratio,
            result.coincidence_fraction,
            reference,
            result.fidelity.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
