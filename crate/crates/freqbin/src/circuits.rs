//! Device topologies, the end-to-end simulation driver, closed-form
//! cross-checks, rate estimation, and parameter sweeps.
//!
//! A `Circuit` bundles pair sources placed on emission paths, an ordered
//! element list, a detection pattern, and the split of detected paths into
//! the logical register and heralds. `run` pushes the truncated emission
//! through the elements, post-selects on the pattern, factors the result
//! into a frequency-bin register, and reports probabilities, fidelity
//! against the circuit's target, and rate estimates.
//!
//! Two prebuilt devices cover the entanglement sources simulated here: a
//! four-photon GHZ source (two single-pump sources whose idlers in bin 1
//! are exchanged by an add-drop swap) and a heralded W source (one
//! dual-pump source whose signal and idler photons are each split on a
//! directional coupler, heralded by a signal photon in bin 1).

use std::collections::BTreeSet;

use num_complex::Complex64 as C64;

use crate::elements::{
    apply_adddrop_swap, apply_demux, apply_directional_coupler, CouplerParams, ModePredicate,
};
use crate::error::{Error, Result};
use crate::fock::{Colour, StateVector};
use crate::postselect::{
    factor_colour, fidelity, ghz_target, postselect, w_target, BinRegisterState, DetectionPattern,
};
use crate::sources::{
    dual_pump_source, emit_state, single_pump_source, tensor_product, SourceSpec,
};

/// Default pulse repetition rate for rate estimates (Hz).
pub const DEFAULT_REP_RATE: f64 = 1e6;

/// One circuit element in declaration order.
#[derive(Clone, Debug, PartialEq)]
pub enum Element {
    /// Route signal photons of `input` to `signal_out`, idlers to `idler_out`.
    Demux {
        input: u32,
        signal_out: u32,
        idler_out: u32,
    },
    /// Exchange `path_a` ↔ `path_b` for modes matching the predicate.
    AddDropSwap {
        path_a: u32,
        path_b: u32,
        pred: ModePredicate,
    },
    /// Mix `path_a` and `path_b` with a unitary coupler.
    Coupler {
        path_a: u32,
        path_b: u32,
        params: CouplerParams,
    },
    /// Transmit only photons matching the predicate on `path`. Realized as
    /// a detection-side constraint: it is folded into the circuit's pattern
    /// and acts as the identity during evolution.
    Filter { path: u32, pred: ModePredicate },
}

impl Element {
    /// Apply this element to a state.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        match *self {
            Element::Demux {
                input,
                signal_out,
                idler_out,
            } => apply_demux(state, input, signal_out, idler_out),
            Element::AddDropSwap {
                path_a,
                path_b,
                pred,
            } => Ok(apply_adddrop_swap(state, path_a, path_b, pred)),
            Element::Coupler {
                path_a,
                path_b,
                params,
            } => apply_directional_coupler(state, path_a, path_b, params),
            Element::Filter { .. } => Ok(state.clone()),
        }
    }

    /// Paths this element touches.
    pub fn paths(&self) -> Vec<u32> {
        match *self {
            Element::Demux {
                input,
                signal_out,
                idler_out,
            } => vec![input, signal_out, idler_out],
            Element::AddDropSwap { path_a, path_b, .. }
            | Element::Coupler { path_a, path_b, .. } => vec![path_a, path_b],
            Element::Filter { path, .. } => vec![path],
        }
    }
}

/// A complete device: sources on emission paths, elements in order, the
/// detection pattern, and the logical/herald path split.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    name: String,
    sources: Vec<(SourceSpec, u32)>,
    elements: Vec<Element>,
    pattern: DetectionPattern,
    logical_paths: Vec<u32>,
    herald_paths: Vec<u32>,
    target: Option<BinRegisterState>,
    max_pairs_override: Option<u32>,
    rep_rate: f64,
}

impl Circuit {
    /// Validate and assemble a circuit. Filter elements are folded into the
    /// detection pattern as per-path constraints.
    pub fn new(
        name: impl Into<String>,
        sources: Vec<(SourceSpec, u32)>,
        elements: Vec<Element>,
        pattern: DetectionPattern,
        logical_paths: Vec<u32>,
        herald_paths: Vec<u32>,
    ) -> Result<Self> {
        let name = name.into();
        if sources.is_empty() {
            return Err(Error::Validation {
                stanza: name,
                msg: "a circuit needs at least one source".into(),
            });
        }

        let logical_set: BTreeSet<u32> = logical_paths.iter().copied().collect();
        let herald_set: BTreeSet<u32> = herald_paths.iter().copied().collect();
        if logical_set.len() != logical_paths.len() {
            return Err(Error::Validation {
                stanza: name,
                msg: "logical paths repeat".into(),
            });
        }
        if let Some(path) = logical_set.intersection(&herald_set).next() {
            return Err(Error::Validation {
                stanza: name,
                msg: format!("path {path} is both logical and herald"),
            });
        }
        let detected: BTreeSet<u32> = pattern.paths().collect();
        let declared: BTreeSet<u32> = logical_set.union(&herald_set).copied().collect();
        if detected != declared {
            return Err(Error::Validation {
                stanza: name,
                msg: format!(
                    "logical+herald paths {declared:?} must equal the detected paths {detected:?}"
                ),
            });
        }

        // Every detected path must be reachable: mentioned by a source
        // emission or an element.
        let mut universe: BTreeSet<u32> = sources.iter().map(|(_, p)| *p).collect();
        for element in &elements {
            universe.extend(element.paths());
        }
        if let Some(path) = detected.difference(&universe).next() {
            return Err(Error::Validation {
                stanza: name,
                msg: format!("detected path {path} is not touched by any source or element"),
            });
        }

        // Fold filter elements into the pattern as herald constraints.
        let mut pattern = pattern;
        for element in &elements {
            if let Element::Filter { path, pred } = element {
                pattern = pattern.with_constraint(*path, *pred)?;
            }
        }

        Ok(Circuit {
            name,
            sources,
            elements,
            pattern,
            logical_paths,
            herald_paths,
            target: None,
            max_pairs_override: None,
            rep_rate: DEFAULT_REP_RATE,
        })
    }

    /// Set the target register for fidelity reporting.
    pub fn with_target(mut self, target: BinRegisterState) -> Self {
        self.target = Some(target);
        self
    }

    /// Rename the circuit (builders assign generic names).
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Override the per-source emission truncation (1 or 2 pairs).
    pub fn with_max_pairs(mut self, max_pairs: u32) -> Self {
        self.max_pairs_override = Some(max_pairs);
        self
    }

    /// Set the repetition rate used for rate estimates.
    pub fn with_rep_rate(mut self, rep_rate: f64) -> Self {
        self.rep_rate = rep_rate;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn sources(&self) -> &[(SourceSpec, u32)] {
        &self.sources
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn pattern(&self) -> &DetectionPattern {
        &self.pattern
    }

    pub fn logical_paths(&self) -> &[u32] {
        &self.logical_paths
    }

    pub fn herald_paths(&self) -> &[u32] {
        &self.herald_paths
    }

    pub fn target(&self) -> Option<&BinRegisterState> {
        self.target.as_ref()
    }

    pub fn rep_rate(&self) -> f64 {
        self.rep_rate
    }

    /// Per-source emission truncation: enough pairs to cover the detected
    /// photon count, capped at two pairs per source (the regime where the
    /// truncated emission model is valid).
    pub fn max_pairs(&self) -> u32 {
        if let Some(n) = self.max_pairs_override {
            return n;
        }
        let needed = self.pattern.total_photons();
        let per_source_capacity = 2 * self.sources.len() as u32;
        needed.div_ceil(per_source_capacity).clamp(1, 2)
    }

    /// Geometric mean of the per-source pair-generation probabilities
    /// Σ|β_k|² — the |β|² figure used in rate estimates.
    pub fn pair_probability(&self) -> f64 {
        let product: f64 = self
            .sources
            .iter()
            .map(|(spec, _)| spec.pair_probability())
            .product();
        product.powf(1.0 / self.sources.len() as f64)
    }

    /// Emit every source at the given truncation and tensor the results.
    pub fn emit(&self, max_pairs: u32) -> Result<StateVector> {
        let mut state = StateVector::vacuum();
        for (spec, path) in &self.sources {
            let emitted = emit_state(&spec.on_path(*path), max_pairs);
            state = tensor_product(&state, &emitted)?;
        }
        Ok(state)
    }

    /// Apply the element list in declaration order.
    pub fn apply_elements(&self, state: &StateVector) -> Result<StateVector> {
        let mut state = state.clone();
        for element in &self.elements {
            state = element.apply(&state)?;
        }
        Ok(state)
    }
}

/// Rate estimates for a detected-event stream.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateEstimate {
    /// Pulse repetition rate (Hz).
    pub rep_rate: f64,
    /// Pair-generation probability per pulse, |β|².
    pub pair_prob_per_pulse: f64,
    /// Rate of pulses yielding the detected photon-number sector (Hz);
    /// pair_prob² × rep_rate for the four-photon devices.
    pub four_photon_rate: f64,
    /// Rate of post-selected entangled states: fraction × four_photon_rate.
    pub entangled_state_rate: f64,
}

/// Leading-order rate estimate for four-photon coincidence devices: the
/// pair-of-pairs probability per pulse is pair_prob², and the entangled
/// output rate is the coincidence fraction of that.
///
/// Callers supply pair_prob ∈ (0,1) and rep_rate > 0; the arithmetic is a
/// literal product with no pulse-statistics corrections.
pub fn estimate_rates(pair_prob: f64, rep_rate: f64, fraction: f64) -> RateEstimate {
    rate_for_pairs(pair_prob, rep_rate, fraction, 2)
}

fn rate_for_pairs(pair_prob: f64, rep_rate: f64, fraction: f64, pairs: i32) -> RateEstimate {
    let sector_rate = pair_prob.powi(pairs) * rep_rate;
    RateEstimate {
        rep_rate,
        pair_prob_per_pulse: pair_prob,
        four_photon_rate: sector_rate,
        entangled_state_rate: fraction * sector_rate,
    }
}

/// Everything `run` reports about one simulation.
#[derive(Clone, Debug)]
pub struct SimulationResult {
    /// Photon count of the detected sector (4 for the GHZ/W devices).
    pub sector_photons: u32,
    /// Weight of that sector in the emitted state (per pulse).
    pub sector_probability: f64,
    /// Per-pulse probability that the detection pattern fires.
    pub detection_probability: f64,
    /// Probability of the pattern within the detected sector.
    pub coincidence_fraction: f64,
    /// The constant colour sequence across logical+herald paths.
    pub colour_pattern: Vec<Colour>,
    /// The post-selected frequency-bin register on the logical paths.
    pub bin_state: BinRegisterState,
    /// Herald-path bins (constant across all surviving kets).
    pub herald_bins: Vec<u32>,
    /// |⟨target|bin_state⟩|², when the circuit has a target.
    pub fidelity: Option<f64>,
    /// Purity of the bin register; 1.0 whenever colour factorization
    /// succeeds (a non-separable state fails the run instead).
    pub purity: f64,
    pub rates: RateEstimate,
}

/// Simulate a circuit end to end.
///
/// Pipeline: emit all sources (truncated per `Circuit::max_pairs`), tensor,
/// apply elements in order, project onto the pattern's photon count,
/// post-select, factor colour over logical+herald paths, split off the
/// herald bins, and score against the target.
pub fn run(circuit: &Circuit) -> Result<SimulationResult> {
    let sector_photons = circuit.pattern().total_photons();
    let emitted = circuit.emit(circuit.max_pairs())?;
    let total_norm_sq = emitted.norm_sq();
    let evolved = circuit.apply_elements(&emitted)?;

    let sector = evolved.project_photon_number(sector_photons);
    let sector_norm_sq = sector.norm_sq();
    let sector_probability = sector_norm_sq / total_norm_sq;
    let (sector, _) = sector.normalize()?;

    let (selected, coincidence_fraction) = postselect(&sector, circuit.pattern())?;

    let order: Vec<u32> = circuit
        .logical_paths()
        .iter()
        .chain(circuit.herald_paths().iter())
        .copied()
        .collect();
    let (full_register, colour_pattern) = factor_colour(&selected, &order)?;
    let (bin_state, herald_bins) = split_herald(&full_register, circuit.logical_paths().len())?;

    let fid = match circuit.target() {
        Some(target) => Some(fidelity(&bin_state, target)?),
        None => None,
    };

    let pairs = (sector_photons as i32 + 1) / 2;
    let rates = rate_for_pairs(
        circuit.pair_probability(),
        circuit.rep_rate(),
        coincidence_fraction,
        pairs,
    );

    Ok(SimulationResult {
        sector_photons,
        sector_probability,
        detection_probability: sector_probability * coincidence_fraction,
        coincidence_fraction,
        colour_pattern,
        bin_state,
        herald_bins,
        fidelity: fid,
        purity: 1.0,
        rates,
    })
}

/// Split a register over logical+herald paths into the logical register and
/// the constant herald bin suffix. The herald bins must be identical in
/// every ket (the detection constraints pin them); anything else means the
/// logical register cannot be separated from the herald.
fn split_herald(
    register: &BinRegisterState,
    logical_arity: usize,
) -> Result<(BinRegisterState, Vec<u32>)> {
    if register.arity() == logical_arity {
        return Ok((register.clone(), Vec::new()));
    }
    let mut herald_bins: Option<Vec<u32>> = None;
    let mut logical_amplitudes = Vec::new();
    for (bins, amp) in register.amplitudes() {
        let (logical, herald) = bins.split_at(logical_arity);
        match &herald_bins {
            None => herald_bins = Some(herald.to_vec()),
            Some(first) if first != herald => {
                return Err(Error::Validation {
                    stanza: "herald".into(),
                    msg: format!(
                        "herald bins vary across the post-selected state ({} vs {}); \
                         constrain the herald detection to a single bin",
                        BinRegisterState::bin_string(first),
                        BinRegisterState::bin_string(herald),
                    ),
                });
            }
            Some(_) => {}
        }
        logical_amplitudes.push((logical.to_vec(), amp));
    }
    let herald_bins = herald_bins.ok_or(Error::ZeroState { norm_sq: 0.0 })?;
    let logical = BinRegisterState::new(
        register.paths()[..logical_arity].to_vec(),
        logical_amplitudes,
    )?;
    Ok((logical, herald_bins))
}

/// The four-photon GHZ device: two single-pump sources on paths 1 and 4,
/// demuxed so signals stay on 1/4 and idlers land on 2/3, with the bin-1
/// idlers exchanged between paths 2 and 3. Four-fold coincidence across
/// paths 1–4 leaves 𝒩(β₁β₃|0000⟩ + β₂β₄|1111⟩) with colours S,I,I,S.
pub fn build_ghz_device(betas: [C64; 4]) -> Result<Circuit> {
    let [b1, b2, b3, b4] = betas;
    if (b1 * b3).norm_sqr() + (b2 * b4).norm_sqr() <= 0.0 {
        return Err(Error::DegenerateSource);
    }
    let first = single_pump_source(b1, b2)?;
    let second = single_pump_source(b3, b4)?;
    let elements = vec![
        Element::Demux {
            input: 1,
            signal_out: 1,
            idler_out: 2,
        },
        Element::Demux {
            input: 4,
            signal_out: 4,
            idler_out: 3,
        },
        Element::AddDropSwap {
            path_a: 2,
            path_b: 3,
            pred: ModePredicate::colour_bin(Colour::Idler, 1),
        },
    ];
    let pattern = DetectionPattern::coincidence([1, 2, 3, 4])?;
    let circuit = Circuit::new(
        "ghz",
        vec![(first, 1), (second, 4)],
        elements,
        pattern,
        vec![1, 2, 3, 4],
        vec![],
    )?;
    Ok(circuit.with_target(ghz_target(b1 * b3, b2 * b4)?))
}

/// The heralded W device: one dual-pump source, demuxed to signals on path
/// 4 and idlers on path 2; a coupler splits the idlers over paths (1,2) and
/// another splits the signals over paths (3,4). Coincidence across paths
/// 1–3 plus a herald signal photon in bin 1 on path 4 leaves
/// 𝒩″(4β₂²|001⟩ + 2β₁β₂|010⟩ + 2β₁β₂|100⟩) with colours I,I,S (herald S).
pub fn build_w_device(
    beta1: C64,
    beta2: C64,
    coupler1: CouplerParams,
    coupler2: CouplerParams,
) -> Result<Circuit> {
    let source = dual_pump_source(beta1, beta2)?;
    coupler1.validate()?;
    coupler2.validate()?;
    let elements = vec![
        Element::Demux {
            input: 2,
            signal_out: 4,
            idler_out: 2,
        },
        Element::Coupler {
            path_a: 1,
            path_b: 2,
            params: coupler1,
        },
        Element::Coupler {
            path_a: 3,
            path_b: 4,
            params: coupler2,
        },
    ];
    let pattern = DetectionPattern::coincidence([1, 2, 3, 4])?
        .with_constraint(4, ModePredicate::colour_bin(Colour::Signal, 1))?;
    let circuit = Circuit::new(
        "w",
        vec![(source, 2)],
        elements,
        pattern,
        vec![1, 2, 3],
        vec![4],
    )?;

    let heralded = beta2 * beta2 * 4.0;
    let split = beta1 * beta2 * 2.0;
    match w_target(heralded, split, split) {
        Ok(target) => Ok(circuit.with_target(target)),
        // β₂ = 0: the heralded branch is empty and there is no natural
        // target; the run will report the impossible pattern instead.
        Err(Error::ZeroState { .. }) => Ok(circuit),
        Err(e) => Err(e),
    }
}

/// Closed-form coincidence fraction of the GHZ device: the two surviving
/// branches over all four ways to pair one pair from each source,
/// (|β₁β₃|² + |β₂β₄|²) / (|β₁β₃|² + |β₂β₄|² + |β₁β₄|² + |β₂β₃|²).
pub fn ghz_fraction_formula(betas: [C64; 4]) -> Result<f64> {
    let [b1, b2, b3, b4] = betas;
    let p13 = (b1 * b3).norm_sqr();
    let p24 = (b2 * b4).norm_sqr();
    let p14 = (b1 * b4).norm_sqr();
    let p23 = (b2 * b3).norm_sqr();
    let total = p13 + p24 + p14 + p23;
    if total <= 0.0 {
        return Err(Error::DegenerateSource);
    }
    Ok((p13 + p24) / total)
}

/// Closed-form coincidence fraction of the W device with balanced couplers:
/// (1/8) · (2|β₂|⁴ + |β₁|²|β₂|²) / (|β₁|⁴ + |β₂|⁴ + |β₁|²|β₂|²).
pub fn w_fraction_formula(beta1: C64, beta2: C64) -> Result<f64> {
    let b1 = beta1.norm_sqr();
    let b2 = beta2.norm_sqr();
    let denominator = b1 * b1 + b2 * b2 + b1 * b2;
    if denominator <= 0.0 {
        return Err(Error::DegenerateSource);
    }
    Ok(0.125 * (2.0 * b2 * b2 + b1 * b2) / denominator)
}

/// Pattern-projection weight of the double-pair component of one source,
/// pushed through the circuit alone.
///
/// The returned value is the squared norm of the detection-pattern
/// projection of that component (normalized before evolution); a value of
/// exactly 0 means double pairs from this source can never fire the
/// coincidence pattern, whatever the other sources do.
pub fn single_source_double_pair_probability(
    circuit: &Circuit,
    source_index: usize,
) -> Result<f64> {
    let (spec, path) = &circuit.sources()[source_index];
    let four_photon = emit_state(&spec.on_path(*path), 2).project_photon_number(4);
    if four_photon.is_zero() {
        return Ok(0.0);
    }
    let (component, _) = four_photon.normalize()?;
    let evolved = circuit.apply_elements(&component)?;
    let pattern = circuit.pattern();
    Ok(evolved.filter_kets(|ket| pattern.matches(ket)).norm_sq())
}

/// One row of a parameter sweep: the assignment and its outcome. Failed
/// rows carry their error instead of aborting the sweep.
#[derive(Debug)]
pub struct SweepRow<V> {
    pub assignment: Vec<(String, V)>,
    pub result: Result<SimulationResult>,
}

/// Run the Cartesian product of parameter assignments. `grid` entries are
/// (name, values); the first name varies slowest. Each assignment is passed
/// to `eval`, which builds and runs the parameterized circuit.
pub fn sweep<V, F>(grid: &[(String, Vec<V>)], mut eval: F) -> Vec<SweepRow<V>>
where
    V: Clone,
    F: FnMut(&[(String, V)]) -> Result<SimulationResult>,
{
    let mut rows = Vec::new();
    let total: usize = grid.iter().map(|(_, vs)| vs.len().max(1)).product();
    for index in 0..total {
        let mut remainder = index;
        let mut assignment = Vec::with_capacity(grid.len());
        for (name, values) in grid.iter().rev() {
            let k = remainder % values.len().max(1);
            remainder /= values.len().max(1);
            assignment.push((name.clone(), values[k].clone()));
        }
        assignment.reverse();
        let result = eval(&assignment);
        rows.push(SweepRow { assignment, result });
    }
    rows
}
