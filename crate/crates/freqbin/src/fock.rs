//! Sparse bosonic Fock states over frequency-bin modes.
//!
//! A mode is identified by its waveguide path, its colour (signal or idler
//! relative to the pump), and its frequency bin. Basis kets are sparse
//! occupation maps over modes; states are sparse complex superpositions of
//! basis kets. All operator algebra used by the circuit elements reduces to
//! repeated application of creation operators, inner products, and
//! photon-number projections, so those live here.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Amplitudes at or below this magnitude are dropped from sparse states.
///
/// Well below the pair amplitudes the low-gain regime produces (|β| ~ 0.3,
/// post-selected amplitudes ~ 1/√3), well above double-precision noise.
pub const DEFAULT_PRUNE_TOLERANCE: f64 = 1e-14;

/// Tolerance for treating a state as normalized: |norm² − 1| < 2·10⁻¹².
const NORMALIZED_TOLERANCE: f64 = 1e-12;

/// Signal/idler label of a mode: whether the photon is red- or blue-shifted
/// with respect to the pump. Distinct from the logical frequency bin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Colour {
    Signal,
    Idler,
}

impl Colour {
    pub fn letter(self) -> char {
        match self {
            Colour::Signal => 'S',
            Colour::Idler => 'I',
        }
    }
}

impl fmt::Display for Colour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// A photonic mode: (path, colour, frequency bin).
///
/// Ordering is lexicographic on (path, colour, bin) and fixes the canonical
/// serialization of basis kets. Bins 0 and 1 cover the qubit encodings here;
/// larger bins are permitted for qudit extensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub path: u32,
    pub colour: Colour,
    pub bin: u32,
}

impl ModeLabel {
    pub const fn new(path: u32, colour: Colour, bin: u32) -> Self {
        ModeLabel { path, colour, bin }
    }

    pub const fn signal(path: u32, bin: u32) -> Self {
        ModeLabel::new(path, Colour::Signal, bin)
    }

    pub const fn idler(path: u32, bin: u32) -> Self {
        ModeLabel::new(path, Colour::Idler, bin)
    }

    /// Same mode relocated to another path.
    pub fn on_path(self, path: u32) -> Self {
        ModeLabel { path, ..self }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.path, self.colour, self.bin)
    }
}

/// One basis ket: a sparse map from modes to positive photon counts.
///
/// Entries with occupation zero are never stored, so equality and hashing on
/// the underlying ordered map coincide with equality of the canonical text
/// form (modes emitted in `ModeLabel` order).
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FockBasisState {
    occupations: BTreeMap<ModeLabel, u32>,
}

impl FockBasisState {
    /// The vacuum ket |vac⟩.
    pub fn vacuum() -> Self {
        FockBasisState::default()
    }

    /// Build from (mode, count) pairs; zero counts are dropped, repeated
    /// modes accumulate.
    pub fn from_occupations<I>(occupations: I) -> Self
    where
        I: IntoIterator<Item = (ModeLabel, u32)>,
    {
        let mut map = BTreeMap::new();
        for (mode, n) in occupations {
            if n > 0 {
                *map.entry(mode).or_insert(0) += n;
            }
        }
        FockBasisState { occupations: map }
    }

    pub fn is_vacuum(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn total_photons(&self) -> u32 {
        self.occupations.values().sum()
    }

    /// Photon count in `mode` (zero if absent).
    pub fn occupation(&self, mode: ModeLabel) -> u32 {
        self.occupations.get(&mode).copied().unwrap_or(0)
    }

    /// Photon count summed over all modes on `path`.
    pub fn photons_on_path(&self, path: u32) -> u32 {
        self.occupations
            .iter()
            .filter(|(m, _)| m.path == path)
            .map(|(_, n)| n)
            .sum()
    }

    pub fn modes(&self) -> impl Iterator<Item = (ModeLabel, u32)> + '_ {
        self.occupations.iter().map(|(m, n)| (*m, *n))
    }

    /// The ket with one more photon in `mode`, along with the new occupation.
    pub fn raised(&self, mode: ModeLabel) -> (Self, u32) {
        let mut occupations = self.occupations.clone();
        let n = occupations.entry(mode).or_insert(0);
        *n += 1;
        let new_n = *n;
        (FockBasisState { occupations }, new_n)
    }
}

impl fmt::Display for FockBasisState {
    /// Canonical text form: `path:colour:bin^n` fragments joined by `,` in
    /// mode order, e.g. `1:S:0^1,2:I:0^1`. The vacuum prints as `vac`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.occupations.is_empty() {
            return write!(f, "vac");
        }
        let mut first = true;
        for (mode, n) in &self.occupations {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{mode}^{n}")?;
            first = false;
        }
        Ok(())
    }
}

/// A sparse superposition of basis kets with complex amplitudes.
///
/// Superpositions may mix total photon numbers (the truncated source output
/// has zero-, two-, and four-photon parts). States are value-semantic:
/// every operation returns a new state.
#[derive(Clone, Debug)]
pub struct StateVector {
    terms: BTreeMap<FockBasisState, C64>,
    prune_tolerance: f64,
    normalized: bool,
}

impl StateVector {
    /// The vacuum state |vac⟩ with amplitude 1.
    pub fn vacuum() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(FockBasisState::vacuum(), C64::new(1.0, 0.0));
        StateVector {
            terms,
            prune_tolerance: DEFAULT_PRUNE_TOLERANCE,
            normalized: true,
        }
    }

    /// A single basis ket with unit amplitude.
    pub fn basis_ket(ket: FockBasisState) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(ket, C64::new(1.0, 0.0));
        StateVector {
            terms,
            prune_tolerance: DEFAULT_PRUNE_TOLERANCE,
            normalized: true,
        }
    }

    /// The zero vector (no terms).
    pub fn zero() -> Self {
        StateVector {
            terms: BTreeMap::new(),
            prune_tolerance: DEFAULT_PRUNE_TOLERANCE,
            normalized: false,
        }
    }

    /// Build from (ket, amplitude) pairs; repeated kets accumulate and
    /// sub-threshold amplitudes are pruned.
    pub fn from_terms<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (FockBasisState, C64)>,
    {
        let mut state = StateVector::zero();
        for (ket, amp) in terms {
            state.accumulate(ket, amp);
        }
        state.prune();
        state
    }

    pub fn prune_tolerance(&self) -> f64 {
        self.prune_tolerance
    }

    /// Override the pruning threshold (and re-prune).
    pub fn with_prune_tolerance(mut self, tolerance: f64) -> Self {
        self.prune_tolerance = tolerance.max(0.0);
        self.prune();
        self
    }

    /// Whether this state was produced by `normalize` (or is normalized by
    /// construction) and has not been rescaled since.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Set the normalized flag; callers must guarantee unit norm (used where
    /// norm preservation is a mathematical identity, e.g. tensor products of
    /// normalized factors).
    pub(crate) fn mark_normalized(mut self) -> Self {
        self.normalized = true;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&FockBasisState, C64)> + '_ {
        self.terms.iter().map(|(k, a)| (k, *a))
    }

    pub fn amplitude(&self, ket: &FockBasisState) -> C64 {
        self.terms.get(ket).copied().unwrap_or_default()
    }

    /// Σ |amplitude|².
    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    fn accumulate(&mut self, ket: FockBasisState, amp: C64) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(ket) {
            Entry::Vacant(e) => {
                e.insert(amp);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += amp;
            }
        }
    }

    fn prune(&mut self) {
        let tol = self.prune_tolerance;
        self.terms.retain(|_, a| a.norm() > tol);
    }

    /// Linear combination `self + c·other`. Clears the normalized flag.
    pub fn add_scaled(&self, other: &StateVector, c: C64) -> StateVector {
        let mut out = self.clone();
        out.prune_tolerance = self.prune_tolerance.max(other.prune_tolerance);
        out.normalized = false;
        for (ket, amp) in &other.terms {
            out.accumulate(ket.clone(), c * amp);
        }
        out.prune();
        out
    }

    /// Scalar multiple `c·self`. Clears the normalized flag.
    pub fn scaled(&self, c: C64) -> StateVector {
        let mut out = self.clone();
        out.normalized = false;
        for amp in out.terms.values_mut() {
            *amp *= c;
        }
        out.prune();
        out
    }

    /// Apply the creation operator a†_mode: each ket |…, n, …⟩ picks up one
    /// photon in `mode` and a factor √(n+1). Not renormalized.
    pub fn apply_creation(&self, mode: ModeLabel) -> StateVector {
        let mut out = StateVector::zero();
        out.prune_tolerance = self.prune_tolerance;
        for (ket, amp) in &self.terms {
            let (raised, new_n) = ket.raised(mode);
            out.accumulate(raised, amp * (new_n as f64).sqrt());
        }
        out.prune();
        out
    }

    /// Apply a superposition of creation operators, Σ_i c_i a†_{m_i}, once.
    pub fn apply_creation_sum(&self, operators: &[(C64, ModeLabel)]) -> StateVector {
        let mut out = StateVector::zero();
        out.prune_tolerance = self.prune_tolerance;
        for &(coeff, mode) in operators {
            if coeff.norm() == 0.0 {
                continue;
            }
            for (ket, amp) in &self.terms {
                let (raised, new_n) = ket.raised(mode);
                out.accumulate(raised, coeff * amp * (new_n as f64).sqrt());
            }
        }
        out.prune();
        out
    }

    /// Keep only basis kets with total photon number `n`; amplitudes
    /// unchanged, result not renormalized.
    pub fn project_photon_number(&self, n: u32) -> StateVector {
        let terms = self
            .terms
            .iter()
            .filter(|(ket, _)| ket.total_photons() == n)
            .map(|(k, a)| (k.clone(), *a))
            .collect();
        StateVector {
            terms,
            prune_tolerance: self.prune_tolerance,
            normalized: false,
        }
    }

    /// Keep only basis kets satisfying `keep`; result not renormalized.
    pub fn filter_kets<F>(&self, mut keep: F) -> StateVector
    where
        F: FnMut(&FockBasisState) -> bool,
    {
        let terms = self
            .terms
            .iter()
            .filter(|(ket, _)| keep(ket))
            .map(|(k, a)| (k.clone(), *a))
            .collect();
        StateVector {
            terms,
            prune_tolerance: self.prune_tolerance,
            normalized: false,
        }
    }

    /// Relabel every ket's modes through `relabel`, which must be injective
    /// on each ket's support; merging two occupied modes is a collision.
    pub fn map_modes<F>(&self, mut relabel: F) -> Result<StateVector>
    where
        F: FnMut(ModeLabel) -> ModeLabel,
    {
        let mut terms = BTreeMap::new();
        for (ket, amp) in &self.terms {
            let mut occupations = BTreeMap::new();
            for (mode, n) in ket.modes() {
                let target = relabel(mode);
                if occupations.insert(target, n).is_some() {
                    return Err(Error::ModeCollision {
                        mode: target.to_string(),
                    });
                }
            }
            terms.insert(FockBasisState { occupations }, *amp);
        }
        Ok(StateVector {
            terms,
            prune_tolerance: self.prune_tolerance,
            normalized: self.normalized,
        })
    }

    /// Return (self/norm, norm²); the output carries the normalized flag.
    ///
    /// Fails with `ZeroState` when norm² is at or below the squared prune
    /// tolerance, which signals post-selection on an impossible pattern
    /// upstream.
    pub fn normalize(&self) -> Result<(StateVector, f64)> {
        let norm_sq = self.norm_sq();
        if norm_sq <= self.prune_tolerance * self.prune_tolerance {
            return Err(Error::ZeroState { norm_sq });
        }
        let inv = 1.0 / norm_sq.sqrt();
        let mut out = self.scaled(C64::new(inv, 0.0));
        out.normalized = true;
        Ok((out, norm_sq))
    }

    /// Check the normalized flag, or fall back to measuring the norm.
    pub fn require_normalized(&self) -> Result<()> {
        if self.normalized {
            return Ok(());
        }
        let norm_sq = self.norm_sq();
        if (norm_sq - 1.0).abs() < NORMALIZED_TOLERANCE {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm_sq })
        }
    }

    /// Largest per-ket amplitude difference between two states, over the
    /// union of their supports.
    pub fn max_amplitude_diff(&self, other: &StateVector) -> f64 {
        let mut worst = 0.0_f64;
        for (ket, amp) in &self.terms {
            worst = worst.max((amp - other.amplitude(ket)).norm());
        }
        for (ket, amp) in &other.terms {
            if !self.terms.contains_key(ket) {
                worst = worst.max(amp.norm());
            }
        }
        worst
    }
}

/// ⟨a|b⟩ = Σ over shared kets of conj(amp_a)·amp_b.
pub fn inner_product(a: &StateVector, b: &StateVector) -> C64 {
    // Iterate the smaller map.
    let (small, large, conj_small) = if a.terms.len() <= b.terms.len() {
        (a, b, true)
    } else {
        (b, a, false)
    };
    let mut acc = C64::default();
    for (ket, amp) in &small.terms {
        let other = large.terms.get(ket).copied().unwrap_or_default();
        if conj_small {
            acc += amp.conj() * other;
        } else {
            acc += other.conj() * amp;
        }
    }
    acc
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (ket, amp) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "({:+.6}{:+.6}i)|{}⟩", amp.re, amp.im, ket)?;
            first = false;
        }
        Ok(())
    }
}
