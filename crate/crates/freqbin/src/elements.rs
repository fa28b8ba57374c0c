//! Linear-optical circuit elements.
//!
//! Three element families act on states: a colour demultiplexer that routes
//! signal and idler photons from one waveguide onto separate paths, a
//! frequency-selective add-drop swap that exchanges two paths for modes
//! matching a predicate (the frequency-domain analogue of a polarizing
//! beamsplitter), and a two-path directional coupler with a unitary 2×2
//! transfer matrix. All three conserve photon number and never change a
//! photon's colour or bin — only path labels and amplitudes.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{Colour, FockBasisState, ModeLabel, StateVector};

/// Optional colour/bin constraint on a mode; path is never part of the
/// predicate. An empty predicate matches every mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ModePredicate {
    pub colour: Option<Colour>,
    pub bin: Option<u32>,
}

impl ModePredicate {
    /// Matches every mode.
    pub fn any() -> Self {
        ModePredicate::default()
    }

    pub fn colour(colour: Colour) -> Self {
        ModePredicate {
            colour: Some(colour),
            bin: None,
        }
    }

    pub fn bin(bin: u32) -> Self {
        ModePredicate {
            colour: None,
            bin: Some(bin),
        }
    }

    pub fn colour_bin(colour: Colour, bin: u32) -> Self {
        ModePredicate {
            colour: Some(colour),
            bin: Some(bin),
        }
    }

    pub fn matches(&self, mode: ModeLabel) -> bool {
        self.colour.is_none_or(|c| c == mode.colour) && self.bin.is_none_or(|b| b == mode.bin)
    }
}

impl std::fmt::Display for ModePredicate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match (self.colour, self.bin) {
            (None, None) => write!(f, "any"),
            (Some(c), None) => write!(f, "{c}"),
            (None, Some(b)) => write!(f, "bin {b}"),
            (Some(c), Some(b)) => write!(f, "{c}{b}"),
        }
    }
}

/// Transfer amplitudes of a directional coupler: the symmetric matrix
/// [[T, R], [R, T]] on the two path amplitudes.
///
/// Unitarity requires |T|² + |R|² = 1 and Re(T·conj(R)) = 0; a coupler with
/// both amplitudes real and non-zero is not a physical device. The default
/// 50-50 convention here is T = 1/√2, R = i/√2 — only |T| and |R| enter
/// post-selected probabilities, so the choice of the i's location is
/// unobservable in every reported quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplerParams {
    pub transmission: C64,
    pub reflection: C64,
}

/// Tolerance on the coupler unitarity conditions.
const UNITARITY_TOLERANCE: f64 = 1e-12;

impl CouplerParams {
    /// Validate unitarity and build.
    pub fn new(transmission: C64, reflection: C64) -> Result<Self> {
        let params = CouplerParams {
            transmission,
            reflection,
        };
        params.validate()?;
        Ok(params)
    }

    /// Balanced coupler: T = 1/√2, R = i/√2.
    pub fn fifty_fifty() -> Self {
        CouplerParams {
            transmission: C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            reflection: C64::new(0.0, std::f64::consts::FRAC_1_SQRT_2),
        }
    }

    /// Mixing-angle shorthand: T = cos θ, R = i·sin θ (unitary for every θ).
    pub fn from_theta(theta: f64) -> Self {
        CouplerParams {
            transmission: C64::new(theta.cos(), 0.0),
            reflection: C64::new(0.0, theta.sin()),
        }
    }

    /// Check |T|² + |R|² = 1 and T·conj(R) + R·conj(T) = 0.
    pub fn validate(&self) -> Result<()> {
        let t = self.transmission;
        let r = self.reflection;
        let energy = t.norm_sqr() + r.norm_sqr();
        if (energy - 1.0).abs() > UNITARITY_TOLERANCE {
            return Err(Error::NonUnitaryCoupler {
                detail: format!("|T|² + |R|² = {energy} ≠ 1"),
            });
        }
        let cross = t * r.conj() + r * t.conj();
        if cross.norm() > UNITARITY_TOLERANCE {
            return Err(Error::NonUnitaryCoupler {
                detail: format!(
                    "T·conj(R) + R·conj(T) = {} ≠ 0 (columns not orthogonal)",
                    cross.re
                ),
            });
        }
        Ok(())
    }
}

/// Route the signal and idler photons of `path_in` onto separate paths:
/// (path_in, S, b) → (path_signal, S, b) and (path_in, I, b) →
/// (path_idler, I, b). Amplitudes are unchanged.
///
/// Relabeling onto a path that already carries an identical occupied mode
/// is a wiring error and fails with `ModeCollision`.
pub fn apply_demux(
    state: &StateVector,
    path_in: u32,
    path_signal: u32,
    path_idler: u32,
) -> Result<StateVector> {
    assert_ne!(path_signal, path_idler, "demux outputs must differ");
    state.map_modes(|mode| {
        if mode.path != path_in {
            return mode;
        }
        match mode.colour {
            Colour::Signal => mode.on_path(path_signal),
            Colour::Idler => mode.on_path(path_idler),
        }
    })
}

/// Exchange paths a ↔ b for every mode matching `pred`; everything else is
/// untouched. A pure mode permutation with unit amplitude: applying the
/// same swap twice is the identity.
pub fn apply_adddrop_swap(
    state: &StateVector,
    path_a: u32,
    path_b: u32,
    pred: ModePredicate,
) -> StateVector {
    assert_ne!(path_a, path_b, "add-drop swap needs two distinct paths");
    state
        .map_modes(|mode| {
            if !pred.matches(mode) {
                mode
            } else if mode.path == path_a {
                mode.on_path(path_b)
            } else if mode.path == path_b {
                mode.on_path(path_a)
            } else {
                mode
            }
        })
        .expect("a path swap is a bijection on modes and cannot collide")
}

/// Mix paths a and b with the coupler matrix, per colour and bin:
/// a†_{(a,c,b)} → T·a†_{(a,c,b)} + R·a†_{(b,c,b)} and symmetrically
/// a†_{(b,c,b)} → R·a†_{(a,c,b)} + T·a†_{(b,c,b)}.
///
/// Each basis ket is re-expanded through its creation-operator monomial:
/// |…n_m…⟩ = Π (a†_m)^{n_m}/√(n_m!) |vac⟩ with the substitution applied to
/// every factor on the coupled paths. Norm is preserved to floating-point
/// accuracy because the matrix is unitary.
pub fn apply_directional_coupler(
    state: &StateVector,
    path_a: u32,
    path_b: u32,
    params: CouplerParams,
) -> Result<StateVector> {
    assert_ne!(path_a, path_b, "coupler needs two distinct paths");
    params.validate()?;
    let t = params.transmission;
    let r = params.reflection;

    let mut collected: Vec<(FockBasisState, C64)> = Vec::new();
    for (ket, amp) in state.terms() {
        let mut passive = Vec::new();
        let mut coupled = Vec::new();
        for (mode, n) in ket.modes() {
            if mode.path == path_a || mode.path == path_b {
                coupled.push((mode, n));
            } else {
                passive.push((mode, n));
            }
        }

        // Monomial prefactor: amplitude / Π √(n_m!) over the coupled modes.
        let mut prefactor = amp;
        for &(_, n) in &coupled {
            prefactor /= sqrt_factorial(n);
        }
        let mut expanded =
            StateVector::from_terms([(FockBasisState::from_occupations(passive), prefactor)]);
        for &(mode, n) in &coupled {
            let partner = mode.on_path(if mode.path == path_a { path_b } else { path_a });
            let substituted = [(t, mode), (r, partner)];
            for _ in 0..n {
                expanded = expanded.apply_creation_sum(&substituted);
            }
        }
        collected.extend(expanded.terms().map(|(k, a)| (k.clone(), a)));
    }

    let out = StateVector::from_terms(collected).with_prune_tolerance(state.prune_tolerance());
    Ok(if state.is_normalized() {
        out.mark_normalized()
    } else {
        out
    })
}

fn sqrt_factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product::<f64>().sqrt()
}
