//! Coincidence post-selection, colour factorization, and fidelity metrics.
//!
//! Detection is modeled as projection onto the basis kets compatible with a
//! coincidence pattern (so many photons per path, optionally constrained to
//! a colour/bin), followed by renormalization. The surviving state in every
//! scheme simulated here factorizes exactly into a frequency-bin register
//! and a constant colour pattern; `factor_colour` performs that
//! factorization and fails loudly when the factor does not exist, which is
//! the signature of a device that would yield a mixed bin register.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::elements::ModePredicate;
use crate::error::{Error, Result};
use crate::fock::{Colour, FockBasisState, StateVector};

/// Probability floor separating true zeros from accumulated round-off: the
/// square of the default amplitude prune tolerance.
pub const PROBABILITY_FLOOR: f64 = 1e-28;

/// Tolerance on register normalization checks.
const NORM_TOLERANCE: f64 = 1e-12;

/// Photon-count requirement for one detector path.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathRequirement {
    /// Photons the detector must see (≥ 1).
    pub count: u32,
    /// Constraint every photon on this path must satisfy (herald filters).
    pub constraint: Option<ModePredicate>,
}

/// A coincidence pattern: per-path photon counts, each optionally
/// constrained to a colour/bin, plus an exclusivity flag requiring all
/// unlisted paths to be empty.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionPattern {
    requirements: BTreeMap<u32, PathRequirement>,
    exclusive: bool,
}

impl DetectionPattern {
    pub fn new(
        requirements: impl IntoIterator<Item = (u32, PathRequirement)>,
        exclusive: bool,
    ) -> Result<Self> {
        let requirements: BTreeMap<u32, PathRequirement> = requirements.into_iter().collect();
        if requirements.is_empty() {
            return Err(Error::Validation {
                stanza: "detect".into(),
                msg: "a detection pattern needs at least one path".into(),
            });
        }
        if let Some((path, _)) = requirements.iter().find(|(_, r)| r.count == 0) {
            return Err(Error::Validation {
                stanza: "detect".into(),
                msg: format!("path {path} requires a positive photon count"),
            });
        }
        Ok(DetectionPattern {
            requirements,
            exclusive,
        })
    }

    /// One unconstrained photon in each listed path, nothing anywhere else.
    pub fn coincidence(paths: impl IntoIterator<Item = u32>) -> Result<Self> {
        DetectionPattern::new(
            paths.into_iter().map(|p| {
                (
                    p,
                    PathRequirement {
                        count: 1,
                        constraint: None,
                    },
                )
            }),
            true,
        )
    }

    /// Add or replace a colour/bin constraint on one listed path.
    pub fn with_constraint(mut self, path: u32, pred: ModePredicate) -> Result<Self> {
        match self.requirements.get_mut(&path) {
            Some(req) => {
                req.constraint = Some(pred);
                Ok(self)
            }
            None => Err(Error::Validation {
                stanza: "detect".into(),
                msg: format!("constraint on path {path}, which the pattern does not list"),
            }),
        }
    }

    pub fn exclusive(&self) -> bool {
        self.exclusive
    }

    pub fn paths(&self) -> impl Iterator<Item = u32> + '_ {
        self.requirements.keys().copied()
    }

    pub fn requirements(&self) -> impl Iterator<Item = (u32, PathRequirement)> + '_ {
        self.requirements.iter().map(|(p, r)| (*p, *r))
    }

    /// Total photon count the pattern detects.
    pub fn total_photons(&self) -> u32 {
        self.requirements.values().map(|r| r.count).sum()
    }

    /// Does `ket` satisfy every requirement (and exclusivity)?
    pub fn matches(&self, ket: &FockBasisState) -> bool {
        for (&path, req) in &self.requirements {
            if ket.photons_on_path(path) != req.count {
                return false;
            }
            if let Some(pred) = req.constraint {
                let ok = ket
                    .modes()
                    .filter(|(m, _)| m.path == path)
                    .all(|(m, _)| pred.matches(m));
                if !ok {
                    return false;
                }
            }
        }
        if self.exclusive {
            let listed_total: u32 = self.requirements.values().map(|r| r.count).sum();
            if ket.total_photons() != listed_total {
                return false;
            }
        }
        true
    }
}

impl fmt::Display for DetectionPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (path, req) in &self.requirements {
            if !first {
                write!(f, ", ")?;
            }
            write!(f, "{path}:{}", req.count)?;
            if let Some(pred) = req.constraint {
                write!(f, "@{pred}")?;
            }
            first = false;
        }
        if self.exclusive {
            write!(f, " (exclusive)")?;
        }
        Ok(())
    }
}

/// Project a normalized state onto the kets matching `pattern` and
/// renormalize. Returns the conditional state and the detection
/// probability (the squared norm of the unnormalized projection).
///
/// A probability below the floor of 10⁻²⁸ means the pattern cannot fire;
/// that is reported as `ImpossiblePattern` rather than returning a state
/// fabricated from round-off noise.
pub fn postselect(state: &StateVector, pattern: &DetectionPattern) -> Result<(StateVector, f64)> {
    state.require_normalized()?;
    let projected = state.filter_kets(|ket| pattern.matches(ket));
    let probability = projected.norm_sq();
    if probability < PROBABILITY_FLOOR {
        return Err(Error::ImpossiblePattern);
    }
    let (conditional, _) = projected.normalize()?;
    Ok((conditional, probability))
}

/// A pure state of the frequency-bin register carried by an ordered list of
/// paths: amplitudes over bin-strings, one bin per path.
#[derive(Clone, Debug, PartialEq)]
pub struct BinRegisterState {
    paths: Vec<u32>,
    amplitudes: BTreeMap<Vec<u32>, C64>,
}

impl BinRegisterState {
    /// Build and validate: every bin-string has one entry per path and the
    /// amplitudes are normalized.
    pub fn new(
        paths: Vec<u32>,
        amplitudes: impl IntoIterator<Item = (Vec<u32>, C64)>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (bins, amp) in amplitudes {
            if bins.len() != paths.len() {
                return Err(Error::ArityMismatch {
                    left: paths.len(),
                    right: bins.len(),
                });
            }
            *map.entry(bins).or_insert(C64::default()) += amp;
        }
        let norm_sq: f64 = map.values().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(BinRegisterState {
            paths,
            amplitudes: map,
        })
    }

    /// Build from unnormalized amplitudes by dividing out the norm.
    pub fn normalized(
        paths: Vec<u32>,
        amplitudes: impl IntoIterator<Item = (Vec<u32>, C64)>,
    ) -> Result<Self> {
        let collected: Vec<(Vec<u32>, C64)> = amplitudes.into_iter().collect();
        let norm_sq: f64 = collected.iter().map(|(_, a)| a.norm_sqr()).sum();
        if norm_sq < PROBABILITY_FLOOR {
            return Err(Error::ZeroState { norm_sq });
        }
        let inv = C64::new(1.0 / norm_sq.sqrt(), 0.0);
        BinRegisterState::new(
            paths,
            collected.into_iter().map(|(bins, a)| (bins, a * inv)),
        )
    }

    pub fn paths(&self) -> &[u32] {
        &self.paths
    }

    pub fn arity(&self) -> usize {
        self.paths.len()
    }

    pub fn amplitudes(&self) -> impl Iterator<Item = (&[u32], C64)> + '_ {
        self.amplitudes.iter().map(|(b, a)| (b.as_slice(), *a))
    }

    pub fn amplitude(&self, bins: &[u32]) -> C64 {
        self.amplitudes.get(bins).copied().unwrap_or_default()
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    /// Render a bin-string as digits, e.g. [0,0,1] → "001".
    pub fn bin_string(bins: &[u32]) -> String {
        bins.iter().map(|b| b.to_string()).collect()
    }
}

impl fmt::Display for BinRegisterState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (bins, amp) in &self.amplitudes {
            if !first {
                write!(f, " + ")?;
            }
            write!(
                f,
                "({:+.6}{:+.6}i)|{}⟩",
                amp.re,
                amp.im,
                BinRegisterState::bin_string(bins)
            )?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Factor a post-selected state as |bins⟩ ⊗ |colours⟩ over the given path
/// order, returning the bin register and the shared colour pattern.
///
/// Requires exactly one photon in each listed path and none elsewhere
/// (`OccupancyMismatch` otherwise). The colour sequence across paths must
/// be identical in every basis ket; if two kets disagree the bin register
/// would be mixed after discarding colour, and `NotColourSeparable` reports
/// the two offending patterns.
pub fn factor_colour(
    state: &StateVector,
    paths: &[u32],
) -> Result<(BinRegisterState, Vec<Colour>)> {
    state.require_normalized()?;
    let mut shared_colours: Option<Vec<Colour>> = None;
    let mut amplitudes = Vec::new();

    for (ket, amp) in state.terms() {
        if ket.total_photons() as usize != paths.len() {
            return Err(Error::OccupancyMismatch {
                ket: ket.to_string(),
            });
        }
        let mut bins = Vec::with_capacity(paths.len());
        let mut colours = Vec::with_capacity(paths.len());
        for &path in paths {
            let mut on_path = ket.modes().filter(|(m, _)| m.path == path);
            match (on_path.next(), on_path.next()) {
                (Some((mode, 1)), None) => {
                    bins.push(mode.bin);
                    colours.push(mode.colour);
                }
                _ => {
                    return Err(Error::OccupancyMismatch {
                        ket: ket.to_string(),
                    })
                }
            }
        }
        match &shared_colours {
            None => shared_colours = Some(colours),
            Some(first) if *first != colours => {
                let fmt_pattern =
                    |cs: &[Colour]| -> String { cs.iter().map(|c| c.letter()).collect() };
                return Err(Error::NotColourSeparable {
                    first: fmt_pattern(first),
                    second: fmt_pattern(&colours),
                });
            }
            Some(_) => {}
        }
        amplitudes.push((bins, amp));
    }

    let colours = shared_colours.ok_or(Error::ZeroState { norm_sq: 0.0 })?;
    let register = BinRegisterState::new(paths.to_vec(), amplitudes)?;
    Ok((register, colours))
}

/// |⟨target|state⟩|² for two bin registers of the same arity.
pub fn fidelity(state: &BinRegisterState, target: &BinRegisterState) -> Result<f64> {
    if state.arity() != target.arity() {
        return Err(Error::ArityMismatch {
            left: state.arity(),
            right: target.arity(),
        });
    }
    let mut overlap = C64::default();
    for (bins, amp) in target.amplitudes() {
        overlap += amp.conj() * state.amplitude(bins);
    }
    Ok(overlap.norm_sqr())
}

/// Normalized a|0…0⟩ + b|1…1⟩ on the standard four paths.
pub fn ghz_target(a: C64, b: C64) -> Result<BinRegisterState> {
    ghz_target_on(vec![1, 2, 3, 4], a, b)
}

/// GHZ form on an arbitrary path list (arity ≥ 2).
pub fn ghz_target_on(paths: Vec<u32>, a: C64, b: C64) -> Result<BinRegisterState> {
    let n = paths.len();
    BinRegisterState::normalized(paths, [(vec![0; n], a), (vec![1; n], b)])
}

/// Normalized a|001⟩ + b|010⟩ + c|100⟩ on the standard three logical paths.
pub fn w_target(a: C64, b: C64, c: C64) -> Result<BinRegisterState> {
    w_target_on(vec![1, 2, 3], a, b, c)
}

/// W form on an arbitrary three-path list.
pub fn w_target_on(paths: Vec<u32>, a: C64, b: C64, c: C64) -> Result<BinRegisterState> {
    if paths.len() != 3 {
        return Err(Error::ArityMismatch {
            left: 3,
            right: paths.len(),
        });
    }
    BinRegisterState::normalized(
        paths,
        [(vec![0, 0, 1], a), (vec![0, 1, 0], b), (vec![1, 0, 0], c)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{apply_adddrop_swap, apply_demux};
    use crate::fock::ModeLabel;
    use crate::sources::{emit_state, single_pump_source, tensor_product};
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// The four-path state just before detection in the two-source scheme:
    /// both sources emitted (one pair each), demuxed, idlers in bin 1
    /// swapped between the inner paths.
    fn pre_detection_state(b1: C64, b2: C64, b3: C64, b4: C64) -> StateVector {
        let first = single_pump_source(b1, b2).unwrap().on_path(1);
        let second = single_pump_source(b3, b4).unwrap().on_path(4);
        let product = tensor_product(&emit_state(&first, 1), &emit_state(&second, 1)).unwrap();
        let split = apply_demux(&product, 1, 1, 2).unwrap();
        let split = apply_demux(&split, 4, 4, 3).unwrap();
        apply_adddrop_swap(&split, 2, 3, ModePredicate::colour_bin(Colour::Idler, 1))
    }

    #[test]
    fn fourfold_coincidence_keeps_half_at_equal_amplitudes() {
        let b = c(0.1, 0.0);
        let state = pre_detection_state(b, b, b, b);
        let (sector, _) = state.project_photon_number(4).normalize().unwrap();
        let pattern = DetectionPattern::coincidence([1, 2, 3, 4]).unwrap();
        let (selected, probability) = postselect(&sector, &pattern).unwrap();
        assert_abs_diff_eq!(probability, 0.5, epsilon = 1e-12);
        assert_eq!(selected.term_count(), 2);
    }

    #[test]
    fn vacuum_never_fires_a_pattern() {
        let pattern = DetectionPattern::coincidence([1, 2]).unwrap();
        let err = postselect(&StateVector::vacuum(), &pattern).unwrap_err();
        assert!(matches!(err, Error::ImpossiblePattern));
    }

    #[test]
    fn exclusive_patterns_partition_the_sector() {
        // All ways to distribute 4 photons over paths 1–4, as exclusive
        // patterns, are mutually exclusive and complete: probabilities sum
        // to 1 on any normalized 4-photon state over those paths.
        let state = pre_detection_state(c(0.2, 0.1), c(-0.1, 0.2), c(0.15, 0.0), c(0.0, 0.12));
        let (sector, _) = state.project_photon_number(4).normalize().unwrap();

        let mut total = 0.0;
        for n1 in 0..=4u32 {
            for n2 in 0..=(4 - n1) {
                for n3 in 0..=(4 - n1 - n2) {
                    let n4 = 4 - n1 - n2 - n3;
                    let reqs = [(1u32, n1), (2, n2), (3, n3), (4, n4)]
                        .into_iter()
                        .filter(|&(_, n)| n > 0)
                        .map(|(p, n)| {
                            (
                                p,
                                PathRequirement {
                                    count: n,
                                    constraint: None,
                                },
                            )
                        });
                    let pattern = DetectionPattern::new(reqs, true).unwrap();
                    match postselect(&sector, &pattern) {
                        Ok((_, p)) => total += p,
                        Err(Error::ImpossiblePattern) => {}
                        Err(e) => panic!("unexpected error: {e}"),
                    }
                }
            }
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constraint_rejects_wrong_bin_photons() {
        // One photon on path 1, in bin 0; demand bin 1.
        let photon = StateVector::vacuum().apply_creation(ModeLabel::signal(1, 0));
        let pattern = DetectionPattern::coincidence([1])
            .unwrap()
            .with_constraint(1, ModePredicate::colour_bin(Colour::Signal, 1))
            .unwrap();
        assert!(matches!(
            postselect(&photon, &pattern),
            Err(Error::ImpossiblePattern)
        ));
        let relaxed = DetectionPattern::coincidence([1])
            .unwrap()
            .with_constraint(1, ModePredicate::colour(Colour::Signal))
            .unwrap();
        let (_, p) = postselect(&photon, &relaxed).unwrap();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn ghz_factorization_for_general_amplitudes() {
        let (b1, b2, b3, b4) = (c(0.2, 0.05), c(0.1, -0.1), c(0.15, 0.0), c(0.05, 0.2));
        let state = pre_detection_state(b1, b2, b3, b4);
        let (sector, _) = state.project_photon_number(4).normalize().unwrap();
        let pattern = DetectionPattern::coincidence([1, 2, 3, 4]).unwrap();
        let (selected, _) = postselect(&sector, &pattern).unwrap();
        let (register, colours) = factor_colour(&selected, &[1, 2, 3, 4]).unwrap();

        assert_eq!(
            colours,
            vec![Colour::Signal, Colour::Idler, Colour::Idler, Colour::Signal]
        );
        let target = ghz_target(b1 * b3, b2 * b4).unwrap();
        assert_abs_diff_eq!(fidelity(&register, &target).unwrap(), 1.0, epsilon = 1e-12);

        // Phase covariance: a phase on β₂ lands exactly on the |1111⟩ branch.
        let phase = C64::from_polar(1.0, 1.1);
        let rotated = pre_detection_state(b1, b2 * phase, b3, b4);
        let (sector, _) = rotated.project_photon_number(4).normalize().unwrap();
        let (selected, _) = postselect(&sector, &pattern).unwrap();
        let (register, _) = factor_colour(&selected, &[1, 2, 3, 4]).unwrap();
        let rotated_target = ghz_target(b1 * b3, b2 * phase * b4).unwrap();
        assert_abs_diff_eq!(
            fidelity(&register, &rotated_target).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn single_ket_factorization() {
        let ket = FockBasisState::from_occupations([
            (ModeLabel::signal(1, 0), 1),
            (ModeLabel::idler(2, 1), 1),
        ]);
        let state = StateVector::basis_ket(ket);
        let (register, colours) = factor_colour(&state, &[1, 2]).unwrap();
        assert_eq!(colours, vec![Colour::Signal, Colour::Idler]);
        assert_abs_diff_eq!(register.amplitude(&[0, 1]).norm_sqr(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn colour_mixture_is_detected() {
        // |S0⁽¹⁾ I0⁽²⁾⟩ + |I0⁽¹⁾ S0⁽²⁾⟩: same bins, different colour patterns.
        let amp = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let state = StateVector::from_terms([
            (
                FockBasisState::from_occupations([
                    (ModeLabel::signal(1, 0), 1),
                    (ModeLabel::idler(2, 0), 1),
                ]),
                amp,
            ),
            (
                FockBasisState::from_occupations([
                    (ModeLabel::idler(1, 0), 1),
                    (ModeLabel::signal(2, 0), 1),
                ]),
                amp,
            ),
        ]);
        let err = factor_colour(&state, &[1, 2]).unwrap_err();
        match err {
            Error::NotColourSeparable { first, second } => {
                assert_ne!(first, second);
            }
            other => panic!("expected colour separability failure, got {other}"),
        }
    }

    #[test]
    fn occupancy_violations_are_detected() {
        let bunched = StateVector::basis_ket(FockBasisState::from_occupations([(
            ModeLabel::signal(1, 0),
            2,
        )]));
        assert!(matches!(
            factor_colour(&bunched, &[1, 2]),
            Err(Error::OccupancyMismatch { .. })
        ));
    }

    #[test]
    fn fidelity_identities() {
        let target = ghz_target(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(fidelity(&target, &target).unwrap(), 1.0, epsilon = 1e-15);

        let zero_branch = ghz_target(c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(
            fidelity(&zero_branch, &target).unwrap(),
            0.5,
            epsilon = 1e-15
        );

        // Global phase on either argument is invisible.
        let phase = C64::from_polar(1.0, 0.9);
        let rotated = BinRegisterState::normalized(
            vec![1, 2, 3, 4],
            target.amplitudes().map(|(b, a)| (b.to_vec(), a * phase)),
        )
        .unwrap();
        assert_abs_diff_eq!(fidelity(&rotated, &target).unwrap(), 1.0, epsilon = 1e-12);

        let w = w_target(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert!(matches!(
            fidelity(&w, &target),
            Err(Error::ArityMismatch { left: 3, right: 4 })
        ));
    }

    #[test]
    fn target_constructors_normalize() {
        let ghz = ghz_target(c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(
            ghz.amplitude(&[0, 0, 0, 0]).re,
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );

        let w = w_target(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let third = 1.0 / 3.0f64.sqrt();
        for bins in [[0, 0, 1], [0, 1, 0], [1, 0, 0]] {
            assert_abs_diff_eq!(w.amplitude(&bins).re, third, epsilon = 1e-15);
        }

        assert!(matches!(
            ghz_target(C64::default(), C64::default()),
            Err(Error::ZeroState { .. })
        ));
    }
}
