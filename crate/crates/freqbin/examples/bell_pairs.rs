//! Bell pairs from a single source and a colour demultiplexer.
//!
//! One pair source pumped in two frequency configurations feeds a demux that
//! sends signal photons to path 1 and idlers to path 2. Post-selecting on one
//! photon per path leaves a two-qubit frequency-bin state:
//!
//! - single pump:  (|00⟩ + e^{iφ}|11⟩)/√2   (pairs land in matching bins)
//! - dual pump:    (|01⟩ + e^{iφ}|10⟩)/√2   (pairs land in opposite bins)
//!
//! where φ is the relative phase between the two pump configurations,
//! set here through the phase of β₂.

use freqbin::{
    dual_pump_source, fidelity, run, single_pump_source, BinRegisterState, Circuit,
    DetectionPattern, Element,
};
use num_complex::Complex64 as C64;

fn bell_circuit(dual: bool, phase: f64) -> freqbin::Result<Circuit> {
    let beta1 = C64::new(0.2, 0.0);
    let beta2 = C64::from_polar(0.2, phase);
    let source = if dual {
        dual_pump_source(beta1, beta2)?
    } else {
        single_pump_source(beta1, beta2)?
    };
    let pattern = DetectionPattern::coincidence([1, 2])?;
    Circuit::new(
        if dual {
            "bell dual pump"
        } else {
            "bell single pump"
        },
        vec![(source, 1)],
        vec![Element::Demux {
            input: 1,
            signal_out: 1,
            idler_out: 2,
        }],
        pattern,
        vec![1, 2],
        vec![],
    )
}

fn bell_target(dual: bool, phase: f64) -> BinRegisterState {
    let one = C64::new(1.0, 0.0);
    let rotated = C64::from_polar(1.0, phase);
    let kets = if dual {
        vec![(vec![0, 1], one), (vec![1, 0], rotated)]
    } else {
        vec![(vec![0, 0], one), (vec![1, 1], rotated)]
    };
    BinRegisterState::normalized(vec![1, 2], kets).unwrap()
}

fn main() -> freqbin::Result<()> {
    println!("scheme        pump phase   bin state                    fidelity");
    for &dual in &[false, true] {
        for &phase in &[0.0, std::f64::consts::FRAC_PI_4, std::f64::consts::PI] {
            let circuit = bell_circuit(dual, phase)?;
            let result = run(&circuit)?;
            let fid = fidelity(&result.bin_state, &bell_target(dual, phase))?;
            let kets: Vec<String> = result
                .bin_state
                .amplitudes()
                .map(|(bins, amp)| {
                    format!(
                        "{:+.3}{:+.3}i |{}⟩",
                        amp.re,
                        amp.im,
                        BinRegisterState::bin_string(bins)
                    )
                })
                .collect();
            println!(
                "{:<12}  {:>10.4}   {:<27}  {:.12}",
                if dual { "dual pump" } else { "single pump" },
                phase,
                kets.join(" "),
                fid
            );
        }
    }
    Ok(())
}
