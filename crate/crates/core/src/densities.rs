//! Spatially resolved outcome densities after the 50:50 beamsplitter.
//!
//! Every two-photon outcome density splits into a no-interference part `n`
//! and an interference part `kappa` scaled by the visibility:
//!
//! ```text
//! pc = (n - V kappa) / 2      pd = (n + V kappa) / 2      0 <= kappa <= n
//! ```
//!
//! | model             | n                                        | kappa                   |
//! |-------------------|------------------------------------------|-------------------------|
//! | thermal pair      | `q(x1) q(x2)`                            | `rho(x1, x2)^2`         |
//! | distinct emitters | `(q+(x1) q-(x2) + q-(x1) q+(x2)) / 2`    | `psi+ psi-(x1) psi+ psi-(x2)` |
//!
//! with `q± = psi±^2`. Both densities are over ordered coordinate pairs; the
//! double-event density merges the two output ports, each contributing `pd/2`.

use std::fmt;

use crate::jet::{Field, Jet};
use crate::model::{amplitude_jets, amplitudes, kernel, mixture, overlap_delta, SourceModel, SourceScene};

/// Detected two-photon outcome class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventKind {
    /// One photon in each output port.
    CrossCoincidence,
    /// Both photons in the same output port.
    Double,
}

impl EventKind {
    /// Single-letter code used in event files.
    pub fn code(&self) -> char {
        match self {
            EventKind::CrossCoincidence => 'C',
            EventKind::Double => 'D',
        }
    }

    pub fn from_code(c: &str) -> Option<Self> {
        match c {
            "C" => Some(EventKind::CrossCoincidence),
            "D" => Some(EventKind::Double),
            _ => None,
        }
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::CrossCoincidence => "cross-coincidence",
            EventKind::Double => "double",
        })
    }
}

/// No-interference and interference parts of one pair density.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PairTerms<T> {
    pub n: T,
    pub kappa: T,
    /// `n - kappa`, formed without cancellation.
    pub deficit: T,
}

/// [`PairTerms`] from the source amplitudes at both detection points.
///
/// For both models `n - kappa = c (psi+(x1) psi-(x2) - psi-(x1) psi+(x2))^2`
/// with `c = 1/4` (thermal pair) or `1/2` (distinct emitters), which keeps
/// the coincidence density nonnegative and exactly zero for coincident sources.
#[inline]
pub(crate) fn pair_terms<T: Field>(a1: [T; 2], a2: [T; 2], model: SourceModel) -> PairTerms<T> {
    let cross = a1[0] * a2[1] - a1[1] * a2[0];
    match model {
        SourceModel::ThermalPair => PairTerms {
            n: mixture(a1) * mixture(a2),
            kappa: kernel(a1, a2).square(),
            deficit: cross.square() * 0.25,
        },
        SourceModel::DistinctEmitters => PairTerms {
            n: (a1[0].square() * a2[1].square() + a1[1].square() * a2[0].square()) * 0.5,
            kappa: a1[0] * a1[1] * a2[0] * a2[1],
            deficit: cross.square() * 0.5,
        },
    }
}

/// `pc = ((1 - V) n + V (n - kappa)) / 2`, `pd = (n + V kappa) / 2`.
#[inline]
pub(crate) fn outcome<T: Field>(kind: EventKind, t: PairTerms<T>, visibility: f64) -> T {
    match kind {
        EventKind::CrossCoincidence => (t.n * (1.0 - visibility) + t.deficit * visibility) * 0.5,
        EventKind::Double => (t.n + t.kappa * visibility) * 0.5,
    }
}

/// Density of `kind` at `(x1, x2)`.
pub fn outcome_density(kind: EventKind, x1: f64, x2: f64, scene: &SourceScene, model: SourceModel) -> f64 {
    outcome(kind, pair_terms(amplitudes(x1, scene), amplitudes(x2, scene), model), scene.visibility())
}

/// Cross-coincidence density, one photon at `x1` in port 1 and one at `x2` in port 2.
pub fn pc_density(x1: f64, x2: f64, scene: &SourceScene, model: SourceModel) -> f64 {
    outcome_density(EventKind::CrossCoincidence, x1, x2, scene, model)
}

/// Double-event density, both photons in one port (either port).
pub fn pd_density(x1: f64, x2: f64, scene: &SourceScene, model: SourceModel) -> f64 {
    outcome_density(EventKind::Double, x1, x2, scene, model)
}

/// Probability that a pair produces a cross-coincidence.
pub fn total_coincidence_prob(scene: &SourceScene, model: SourceModel) -> f64 {
    let d2 = overlap_delta(scene).powi(2);
    let v = scene.visibility();
    match model {
        SourceModel::ThermalPair => 0.5 * (1.0 - v * 0.5 * (1.0 + d2)),
        SourceModel::DistinctEmitters => 0.5 * (1.0 - v * d2),
    }
}

/// `d P_c / d eps`.
pub(crate) fn total_coincidence_prob_deps(scene: &SourceScene, model: SourceModel) -> f64 {
    let s = scene.sigma();
    let d2 = overlap_delta(scene).powi(2);
    let dd2 = -scene.eps() / (2.0 * s * s) * d2;
    let v = scene.visibility();
    match model {
        SourceModel::ThermalPair => -0.25 * v * dd2,
        SourceModel::DistinctEmitters => -0.5 * v * dd2,
    }
}

/// Precomputed source amplitudes (with gradients) at one coordinate.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PointAmplitudes(pub [Jet; 2]);

impl PointAmplitudes {
    pub fn at(x: f64, scene: &SourceScene) -> Self {
        PointAmplitudes(amplitude_jets(x, scene))
    }
}

/// [`PairTerms`] as jets in `(x0, eps)`.
#[inline]
pub(crate) fn pair_term_jets(a1: &PointAmplitudes, a2: &PointAmplitudes, model: SourceModel) -> PairTerms<Jet> {
    pair_terms(a1.0, a2.0, model)
}

/// Both outcome densities of one scene, as a value type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeDensities {
    pub scene: SourceScene,
    pub model: SourceModel,
}

impl OutcomeDensities {
    pub fn new(scene: SourceScene, model: SourceModel) -> Self {
        OutcomeDensities { scene, model }
    }

    pub fn pc(&self, x1: f64, x2: f64) -> f64 {
        pc_density(x1, x2, &self.scene, self.model)
    }

    pub fn pd(&self, x1: f64, x2: f64) -> f64 {
        pd_density(x1, x2, &self.scene, self.model)
    }

    pub fn density(&self, kind: EventKind, x1: f64, x2: f64) -> f64 {
        outcome_density(kind, x1, x2, &self.scene, self.model)
    }

    pub fn total_coincidence(&self) -> f64 {
        total_coincidence_prob(&self.scene, self.model)
    }
}
