//! Per-photon Fisher information for direct imaging and the two-photon
//! strategies, quantum Fisher information references and Cramér-Rao bounds.
//!
//! Parameter order is always `(x0, eps)`. Two-photon information is computed
//! per detected pair and halved, so every matrix here is per detected photon.

mod sld;

use std::fmt;

use crate::densities::{outcome, pair_term_jets, total_coincidence_prob, total_coincidence_prob_deps, EventKind, PointAmplitudes};
use crate::error::{Error, Result};
use crate::estimator::Strategy;
use crate::model::{single_photon_density_jet, SourceModel, SourceScene};
use crate::quadrature::{composite_gauss_legendre, QuadratureSpec};

pub use sld::{qfi_numeric_sld, SldGrid};

/// Relative change tolerated when the node count is doubled.
pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parameter {
    Centroid,
    Separation,
}

impl Parameter {
    pub fn index(&self) -> usize {
        match self {
            Parameter::Centroid => 0,
            Parameter::Separation => 1,
        }
    }
}

impl fmt::Display for Parameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parameter::Centroid => "x0",
            Parameter::Separation => "eps",
        })
    }
}

/// Symmetric 2x2 information matrix over `(x0, eps)`, per detected photon.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FisherMatrix {
    entries: [[f64; 2]; 2],
}

impl FisherMatrix {
    pub fn new(x0_x0: f64, x0_eps: f64, eps_eps: f64) -> Self {
        FisherMatrix { entries: [[x0_x0, x0_eps], [x0_eps, eps_eps]] }
    }

    pub fn diagonal(x0_x0: f64, eps_eps: f64) -> Self {
        Self::new(x0_x0, 0.0, eps_eps)
    }

    /// Symmetrizes the input.
    pub fn from_array(m: [[f64; 2]; 2]) -> Self {
        Self::new(m[0][0], 0.5 * (m[0][1] + m[1][0]), m[1][1])
    }

    pub fn entry(&self, a: Parameter, b: Parameter) -> f64 {
        self.entries[a.index()][b.index()]
    }

    pub fn x0_x0(&self) -> f64 {
        self.entries[0][0]
    }

    pub fn x0_eps(&self) -> f64 {
        self.entries[0][1]
    }

    pub fn eps_eps(&self) -> f64 {
        self.entries[1][1]
    }

    pub fn as_array(&self) -> [[f64; 2]; 2] {
        self.entries
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.x0_x0() * s, self.x0_eps() * s, self.eps_eps() * s)
    }

    pub fn determinant(&self) -> f64 {
        self.x0_x0() * self.eps_eps() - self.x0_eps() * self.x0_eps()
    }

    pub fn is_positive_semidefinite(&self, tol: f64) -> bool {
        self.x0_x0() >= -tol && self.eps_eps() >= -tol && self.determinant() >= -tol
    }

    /// Largest absolute entry difference relative to each entry, with an
    /// absolute floor tied to the diagonal scale for entries that vanish.
    pub(crate) fn relative_change(&self, finer: &FisherMatrix) -> f64 {
        let scale = finer.x0_x0().abs().max(finer.eps_eps().abs());
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let (a, b) = (self.entries[i][j], finer.entries[i][j]);
                let denom = b.abs().max(1e-6 * scale).max(f64::MIN_POSITIVE);
                worst = worst.max((a - b).abs() / denom);
            }
        }
        worst
    }
}

/// A quadrature-evaluated matrix with its numerical diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherEvaluation {
    pub fisher: FisherMatrix,
    /// Probability mass of the integration points skipped by the density floor.
    pub skipped_mass: f64,
    /// Node count (per axis) of the reported, finer evaluation.
    pub nodes: usize,
    /// Relative change against the evaluation at half the nodes.
    pub relative_change: f64,
}

fn gate(coarse: (FisherMatrix, f64), fine: (FisherMatrix, f64), nodes: usize, quantity: &str) -> Result<FisherEvaluation> {
    let change = coarse.0.relative_change(&fine.0);
    if change.is_nan() || change > CONVERGENCE_TOLERANCE {
        return Err(Error::NumericFailure { quantity: quantity.to_string(), relative_change: change, nodes });
    }
    Ok(FisherEvaluation { fisher: fine.0, skipped_mass: fine.1, nodes, relative_change: change })
}

/// Direct imaging: information of one detected photon position under `q(x)`.
pub fn fi_direct_imaging(scene: &SourceScene, quad: &QuadratureSpec) -> Result<FisherMatrix> {
    fi_direct_imaging_detailed(scene, quad).map(|e| e.fisher)
}

pub fn fi_direct_imaging_detailed(scene: &SourceScene, quad: &QuadratureSpec) -> Result<FisherEvaluation> {
    quad.validate()?;
    let fine = quad.doubled();
    gate(direct_imaging_at(scene, quad), direct_imaging_at(scene, &fine), fine.nodes_1d, "direct-imaging FI")
}

fn direct_imaging_at(scene: &SourceScene, quad: &QuadratureSpec) -> (FisherMatrix, f64) {
    let (lo, hi) = scene.window(quad.half_width);
    let rule = composite_gauss_legendre(lo, hi, quad.nodes_1d);
    let mut m = [[0.0; 2]; 2];
    let mut skipped = 0.0;
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let q = single_photon_density_jet(x, scene);
        if q.v < quad.floor {
            skipped += w * q.v.max(0.0);
            continue;
        }
        accumulate(&mut m, w / q.v, &q.d);
    }
    (FisherMatrix::from_array(m), skipped)
}

#[inline]
fn accumulate(m: &mut [[f64; 2]; 2], scale: f64, d: &[f64; 2]) {
    m[0][0] += scale * d[0] * d[0];
    m[0][1] += scale * d[0] * d[1];
    m[1][1] += scale * d[1] * d[1];
    m[1][0] = m[0][1];
}

/// Two-photon interference with spatially resolved detection of both
/// cross-coincidences and double events.
pub fn fi_twophoton_spatial(scene: &SourceScene, model: SourceModel, quad: &QuadratureSpec) -> Result<FisherMatrix> {
    fi_twophoton_spatial_detailed(scene, model, quad).map(|e| e.fisher)
}

pub fn fi_twophoton_spatial_detailed(
    scene: &SourceScene,
    model: SourceModel,
    quad: &QuadratureSpec,
) -> Result<FisherEvaluation> {
    quad.validate()?;
    let fine = quad.doubled();
    gate(
        twophoton_spatial_at(scene, model, quad),
        twophoton_spatial_at(scene, model, &fine),
        fine.nodes_2d,
        "two-photon spatial FI",
    )
}

fn twophoton_spatial_at(scene: &SourceScene, model: SourceModel, quad: &QuadratureSpec) -> (FisherMatrix, f64) {
    let (lo, hi) = scene.window(quad.half_width);
    let rule = composite_gauss_legendre(lo, hi, quad.nodes_2d);
    let amps: Vec<PointAmplitudes> = rule.nodes.iter().map(|&x| PointAmplitudes::at(x, scene)).collect();
    let v = scene.visibility();
    let mut m = [[0.0; 2]; 2];
    let mut skipped = 0.0;
    // both densities are symmetric under x1 <-> x2
    for i in 0..amps.len() {
        for j in i..amps.len() {
            let w = rule.weights[i] * rule.weights[j] * if i == j { 1.0 } else { 2.0 };
            let terms = pair_term_jets(&amps[i], &amps[j], model);
            for kind in [EventKind::CrossCoincidence, EventKind::Double] {
                let p = outcome(kind, terms, v);
                if p.v < quad.floor {
                    skipped += w * p.v.max(0.0);
                    continue;
                }
                accumulate(&mut m, w / p.v, &p.d);
            }
        }
    }
    (FisherMatrix::from_array(m).scaled(0.5), skipped)
}

/// Two-photon interference when only the coincidence/double ratio is
/// observed. The outcome is a single Bernoulli trial per pair and carries no
/// centroid information.
pub fn fi_twophoton_binary(scene: &SourceScene, model: SourceModel) -> FisherMatrix {
    let p = total_coincidence_prob(scene, model);
    let dp = total_coincidence_prob_deps(scene, model);
    let f = if p <= 0.0 || p >= 1.0 {
        // P_c is even in eps, so it only touches 0 where its derivative vanishes too
        0.0
    } else {
        dp * dp / (2.0 * p * (1.0 - p))
    };
    FisherMatrix::diagonal(0.0, f)
}

/// Quantum Fisher information of the one-photon state, `diag(1 - eps^2/4, 1/4)`
/// in units of `sigma^-2`. The centroid entry is a small-separation expansion;
/// [`qfi_numeric_sld`] is authoritative at larger separations.
pub fn qfi_reference(scene: &SourceScene) -> FisherMatrix {
    let s2 = scene.sigma() * scene.sigma();
    let e2 = scene.eps() * scene.eps() / s2;
    FisherMatrix::diagonal((1.0 - 0.25 * e2) / s2, 0.25 / s2)
}

/// Classical information of `strategy` on `scene`.
pub fn fisher_for_strategy(
    strategy: Strategy,
    scene: &SourceScene,
    model: SourceModel,
    quad: &QuadratureSpec,
) -> Result<FisherMatrix> {
    match strategy {
        Strategy::DirectImaging => fi_direct_imaging(scene, quad),
        Strategy::TwoPhotonSpatial => fi_twophoton_spatial(scene, model, quad),
        Strategy::TwoPhotonBinary => Ok(fi_twophoton_binary(scene, model)),
    }
}

/// Cramér-Rao covariance bound `F^-1 / N`.
///
/// When `F` is singular, each parameter whose information vanishes is marked
/// non-identifiable and the others get scalar bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceBound {
    pub n_photons: u64,
    /// Full covariance bound when `F` is invertible.
    pub covariance: Option<[[f64; 2]; 2]>,
    x0: Option<f64>,
    eps: Option<f64>,
}

impl CovarianceBound {
    /// Variance bound for one parameter.
    pub fn variance(&self, p: Parameter) -> Result<f64> {
        match p {
            Parameter::Centroid => self.x0,
            Parameter::Separation => self.eps,
        }
        .ok_or(Error::NonIdentifiable(p))
    }

    pub fn is_identifiable(&self, p: Parameter) -> bool {
        self.variance(p).is_ok()
    }

    /// `1 / (N Var)` for one parameter, i.e. the per-photon precision bound;
    /// zero when the parameter is not identifiable.
    pub fn precision_per_photon(&self, p: Parameter) -> f64 {
        self.variance(p).map(|v| 1.0 / (v * self.n_photons as f64)).unwrap_or(0.0)
    }
}

pub fn crb(f: &FisherMatrix, n_photons: u64) -> Result<CovarianceBound> {
    if n_photons == 0 {
        return Err(Error::invalid("Cramér-Rao bound needs at least one photon"));
    }
    let n = n_photons as f64;
    let scale = f.x0_x0().abs().max(f.eps_eps().abs()).max(1.0);
    let singular = |x: f64| x <= 1e-14 * scale;
    let det = f.determinant();
    if !singular(f.x0_x0()) && !singular(f.eps_eps()) && det > 1e-12 * f.x0_x0() * f.eps_eps() {
        let cov = [[f.eps_eps() / det / n, -f.x0_eps() / det / n], [-f.x0_eps() / det / n, f.x0_x0() / det / n]];
        return Ok(CovarianceBound { n_photons, covariance: Some(cov), x0: Some(cov[0][0]), eps: Some(cov[1][1]) });
    }
    let scalar = |x: f64| if singular(x) { None } else { Some(1.0 / (x * n)) };
    Ok(CovarianceBound { n_photons, covariance: None, x0: scalar(f.x0_x0()), eps: scalar(f.eps_eps()) })
}

/// Per-photon precision bound `1 / (F^-1)_pp` (zero when not identifiable).
pub fn precision_bound(f: &FisherMatrix, p: Parameter) -> f64 {
    crb(f, 1).map(|b| b.precision_per_photon(p)).unwrap_or(0.0)
}
