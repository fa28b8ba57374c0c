//! Shared helpers for the integration suite, centred on a brute-force dense
//! oracle for circuit evolution.
//!
//! The oracle never touches the sparse operator algebra under test. It
//! models the passive circuit as a single-particle transfer matrix over an
//! explicit mode enumeration (composed with `ndarray`), writes the source
//! emission as a polynomial in creation operators, substitutes each
//! operator through the matrix, and expands the product over the complete
//! few-photon basis with its own √(n!) bookkeeping. Agreement with the
//! sparse pipeline is then a per-amplitude comparison.

use std::collections::{BTreeMap, BTreeSet};

use freqbin::{Circuit, Colour, Element, FockBasisState, ModeLabel, StateVector};
use ndarray::Array2;
use num_complex::Complex64 as C64;

/// One additive term of the emission polynomial: `coeff · Π_k a†_{ops[k]}`,
/// with operators identified by their index in the oracle's mode table.
#[derive(Clone, Debug)]
struct Monomial {
    coeff: C64,
    ops: Vec<usize>,
}

pub struct DenseOracle {
    modes: Vec<ModeLabel>,
    index: BTreeMap<ModeLabel, usize>,
    /// Cumulative single-particle matrix: an input-side operator a†_j turns
    /// into Σ_i transfer[(i, j)] · b†_i on the output side.
    transfer: Array2<C64>,
}

impl DenseOracle {
    /// Enumerate every (path, colour, bin ∈ {0, 1}) mode the circuit can
    /// reach and load its elements into one transfer matrix.
    pub fn for_circuit(circuit: &Circuit) -> Self {
        let mut paths: BTreeSet<u32> = circuit.sources().iter().map(|(_, p)| *p).collect();
        for element in circuit.elements() {
            paths.extend(element.paths());
        }
        let mut modes = Vec::new();
        for &path in &paths {
            for bin in 0..=1 {
                modes.push(ModeLabel::signal(path, bin));
                modes.push(ModeLabel::idler(path, bin));
            }
        }
        let index = modes
            .iter()
            .enumerate()
            .map(|(i, m)| (*m, i))
            .collect::<BTreeMap<_, _>>();
        let transfer = Array2::eye(modes.len());
        let mut oracle = DenseOracle {
            modes,
            index,
            transfer,
        };
        for element in circuit.elements() {
            oracle.push_element(element);
        }
        oracle
    }

    fn push_element(&mut self, element: &Element) {
        let n = self.modes.len();
        let mut m: Array2<C64> = Array2::eye(n);
        let swap = |m: &mut Array2<C64>, a: ModeLabel, b: ModeLabel| {
            if a == b {
                return;
            }
            let (i, j) = (self.index[&a], self.index[&b]);
            m[(i, i)] = C64::ZERO;
            m[(j, j)] = C64::ZERO;
            m[(i, j)] = C64::ONE;
            m[(j, i)] = C64::ONE;
        };
        match *element {
            Element::Demux {
                input,
                signal_out,
                idler_out,
            } => {
                for bin in 0..=1 {
                    swap(
                        &mut m,
                        ModeLabel::signal(input, bin),
                        ModeLabel::signal(signal_out, bin),
                    );
                    swap(
                        &mut m,
                        ModeLabel::idler(input, bin),
                        ModeLabel::idler(idler_out, bin),
                    );
                }
            }
            Element::AddDropSwap {
                path_a,
                path_b,
                pred,
            } => {
                for colour in [Colour::Signal, Colour::Idler] {
                    for bin in 0..=1 {
                        let a = ModeLabel {
                            path: path_a,
                            colour,
                            bin,
                        };
                        if pred.matches(a) {
                            swap(&mut m, a, a.on_path(path_b));
                        }
                    }
                }
            }
            Element::Coupler {
                path_a,
                path_b,
                params,
            } => {
                for colour in [Colour::Signal, Colour::Idler] {
                    for bin in 0..=1 {
                        let a = ModeLabel {
                            path: path_a,
                            colour,
                            bin,
                        };
                        let b = a.on_path(path_b);
                        let (i, j) = (self.index[&a], self.index[&b]);
                        m[(i, i)] = params.transmission;
                        m[(j, j)] = params.transmission;
                        m[(i, j)] = params.reflection;
                        m[(j, i)] = params.reflection;
                    }
                }
            }
            Element::Filter { .. } => {} // detection-side only; identity here
        }
        self.transfer = m.dot(&self.transfer);
    }

    /// All emission monomials of one source truncated at `max_pairs`,
    /// i.e. Σ_{p=0}^{max_pairs} (Σ_k β_k a†a†)^p / p! expanded in order.
    fn source_monomials(
        &self,
        terms: &[(C64, ModeLabel, ModeLabel)],
        max_pairs: u32,
    ) -> Vec<Monomial> {
        let mut monomials = vec![Monomial {
            coeff: C64::ONE,
            ops: Vec::new(),
        }];
        let mut power = monomials.clone();
        let mut factorial = 1.0;
        for p in 1..=max_pairs {
            factorial *= p as f64;
            let mut next_power = Vec::new();
            for partial in &power {
                for &(beta, first, second) in terms {
                    let mut ops = partial.ops.clone();
                    ops.push(self.index[&first]);
                    ops.push(self.index[&second]);
                    next_power.push(Monomial {
                        coeff: partial.coeff * beta,
                        ops,
                    });
                }
            }
            power = next_power;
            monomials.extend(power.iter().map(|m| Monomial {
                coeff: m.coeff / factorial,
                ops: m.ops.clone(),
            }));
        }
        monomials
    }

    /// Amplitudes of the evolved emission over the complete basis with at
    /// most `max_photons` photons. Monomials beyond that degree are never
    /// generated, so higher sectors are simply absent from the map.
    pub fn evolved_amplitudes(
        &self,
        circuit: &Circuit,
        max_pairs: u32,
        max_photons: usize,
    ) -> BTreeMap<FockBasisState, C64> {
        let mut combined = vec![Monomial {
            coeff: C64::ONE,
            ops: Vec::new(),
        }];
        for (spec, path) in circuit.sources() {
            let placed = spec.on_path(*path);
            let terms: Vec<(C64, ModeLabel, ModeLabel)> = placed
                .terms()
                .iter()
                .map(|t| (t.beta, t.modes.0, t.modes.1))
                .collect();
            let per_source = self.source_monomials(&terms, max_pairs);
            let mut next = Vec::new();
            for left in &combined {
                for right in &per_source {
                    if left.ops.len() + right.ops.len() > max_photons {
                        continue;
                    }
                    let mut ops = left.ops.clone();
                    ops.extend_from_slice(&right.ops);
                    next.push(Monomial {
                        coeff: left.coeff * right.coeff,
                        ops,
                    });
                }
            }
            combined = next;
        }

        let mut amplitudes = BTreeMap::new();
        let mut occupations = vec![0u32; self.modes.len()];
        for monomial in &combined {
            self.expand(
                monomial,
                0,
                monomial.coeff,
                &mut occupations,
                &mut amplitudes,
            );
        }
        amplitudes
    }

    /// Substitute operator `k` of the monomial through the transfer matrix
    /// and recurse; at the leaf, land `weight · Π √(n_m!)` on the ket.
    fn expand(
        &self,
        monomial: &Monomial,
        k: usize,
        weight: C64,
        occupations: &mut Vec<u32>,
        out: &mut BTreeMap<FockBasisState, C64>,
    ) {
        if k == monomial.ops.len() {
            let mut amplitude = weight;
            for &n in occupations.iter() {
                amplitude *= sqrt_factorial(n);
            }
            let ket = FockBasisState::from_occupations(
                occupations
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| **n > 0)
                    .map(|(i, n)| (self.modes[i], *n)),
            );
            *out.entry(ket).or_insert(C64::ZERO) += amplitude;
            return;
        }
        let column = monomial.ops[k];
        for row in 0..self.modes.len() {
            let entry = self.transfer[(row, column)];
            if entry.norm_sqr() == 0.0 {
                continue;
            }
            occupations[row] += 1;
            self.expand(monomial, k + 1, weight * entry, occupations, out);
            occupations[row] -= 1;
        }
    }
}

fn sqrt_factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product::<f64>().sqrt()
}

/// Count-based coincidence check, written against the raw ket rather than
/// `DetectionPattern::matches`: per-path totals must equal the requirement,
/// constrained paths must hold only matching photons, and (exclusively)
/// no photon may sit on an unlisted path.
pub fn fires_pattern(ket: &FockBasisState, circuit: &Circuit) -> bool {
    let pattern = circuit.pattern();
    let required: BTreeMap<u32, _> = pattern.requirements().collect();
    let mut seen: BTreeMap<u32, u32> = BTreeMap::new();
    for (mode, n) in ket.modes() {
        *seen.entry(mode.path).or_insert(0) += n;
        if let Some(req) = required.get(&mode.path) {
            if let Some(pred) = req.constraint {
                if !pred.matches(mode) {
                    return false;
                }
            }
        } else if pattern.exclusive() && n > 0 {
            return false;
        }
    }
    required
        .iter()
        .all(|(path, req)| seen.get(path).copied().unwrap_or(0) == req.count)
}

/// Assert the sparse state and the dense map agree per amplitude on every
/// ket of at most `max_photons` photons.
pub fn assert_amplitudes_match(
    label: &str,
    sparse: &StateVector,
    dense: &BTreeMap<FockBasisState, C64>,
    max_photons: u32,
    tolerance: f64,
) {
    let mut kets: BTreeSet<FockBasisState> = dense.keys().cloned().collect();
    for (ket, _) in sparse.terms() {
        if ket.total_photons() <= max_photons {
            kets.insert(ket.clone());
        }
    }
    assert!(!kets.is_empty(), "{label}: nothing to compare");
    for ket in &kets {
        let lhs = sparse.amplitude(ket);
        let rhs = dense.get(ket).copied().unwrap_or(C64::ZERO);
        assert!(
            (lhs - rhs).norm() <= tolerance,
            "{label}: amplitude mismatch on |{ket}⟩: sparse {lhs}, dense {rhs}"
        );
    }
}
