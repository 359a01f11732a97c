//! Independent reference computations used to cross-check the closed-form
//! production paths. Nothing here is used by the library itself.

use crate::densities::{outcome_density, EventKind};
use crate::fisher::FisherMatrix;
use crate::model::{amplitudes, single_photon_density, SourceModel, SourceScene};
use crate::quadrature::{composite_gauss_legendre, gauss_legendre, QuadratureSpec};
use crate::sampler::{bin_events, DetectorSpec, EventRecord};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// 50:50 beamsplitter; rows are output ports, columns input ports.
const BEAMSPLITTER: [[f64; 2]; 2] = [
    [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
    [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
];

/// `(pc, pd)` at `(x1, x2)` by enumerating which source feeds each input
/// port, propagating the two-photon amplitudes through the beamsplitter and
/// mixing the fully indistinguishable (weight `V`) and fully distinguishable
/// (weight `1 - V`) outcome densities of every branch.
pub fn branch_enumeration(x1: f64, x2: f64, scene: &SourceScene, model: SourceModel) -> (f64, f64) {
    let u = BEAMSPLITTER;
    let f1 = amplitudes(x1, scene);
    let f2 = amplitudes(x2, scene);
    let v = scene.visibility();
    let mut pc = 0.0;
    let mut pd = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            let weight = match model {
                SourceModel::ThermalPair => 0.25,
                SourceModel::DistinctEmitters if a != b => 0.5,
                SourceModel::DistinctEmitters => 0.0,
            };
            // input port 0 carries source a, port 1 carries source b
            let phi_a = |x: usize| if x == 0 { f1[a] } else { f2[a] };
            let phi_b = |x: usize| if x == 0 { f1[b] } else { f2[b] };
            // photon at coordinate index 0 exits port k, photon at index 1 exits port l
            let coherent = |k: usize, l: usize| {
                let amp = u[k][0] * u[l][1] * phi_a(0) * phi_b(1) + u[l][0] * u[k][1] * phi_a(1) * phi_b(0);
                amp * amp
            };
            let incoherent = |k: usize, l: usize| {
                (u[k][0] * phi_a(0)).powi(2) * (u[l][1] * phi_b(1)).powi(2)
                    + (u[l][0] * phi_a(1)).powi(2) * (u[k][1] * phi_b(0)).powi(2)
            };
            let branch = |k: usize, l: usize| v * coherent(k, l) + (1.0 - v) * incoherent(k, l);
            pc += weight * branch(0, 1);
            // same-port detections over ordered coordinates count each unordered pair twice
            pd += weight * 0.5 * (branch(0, 0) + branch(1, 1));
        }
    }
    (pc, pd)
}

/// Richardson-extrapolated central difference of `f` at `t`.
fn richardson(f: impl Fn(f64) -> f64, t: f64, h: f64) -> f64 {
    let d = |h: f64| (f(t + h) - f(t - h)) / (2.0 * h);
    (4.0 * d(0.5 * h) - d(h)) / 3.0
}

fn shifted(scene: &SourceScene, dx0: f64, deps: f64) -> SourceScene {
    SourceScene::unchecked(scene.x0() + dx0, scene.eps() + deps, scene.visibility(), scene.sigma())
}

/// Direct-imaging information with parameter derivatives taken by finite
/// differences of `q` instead of analytically.
pub fn fi_direct_imaging_finite_difference(scene: &SourceScene, quad: &QuadratureSpec, step: f64) -> FisherMatrix {
    let (lo, hi) = scene.window(quad.half_width);
    let rule = composite_gauss_legendre(lo, hi, quad.nodes_1d);
    let mut m = [[0.0; 2]; 2];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let p = single_photon_density(x, scene);
        if p < quad.floor {
            continue;
        }
        let d0 = richardson(|t| single_photon_density(x, &shifted(scene, t, 0.0)), 0.0, step);
        let d1 = richardson(|t| single_photon_density(x, &shifted(scene, 0.0, t)), 0.0, step);
        add(&mut m, w / p, d0, d1);
    }
    FisherMatrix::from_array(m)
}

/// Two-photon spatial information with finite-difference derivatives.
pub fn fi_spatial_finite_difference(scene: &SourceScene, model: SourceModel, quad: &QuadratureSpec, step: f64) -> FisherMatrix {
    let (lo, hi) = scene.window(quad.half_width);
    let rule = composite_gauss_legendre(lo, hi, quad.nodes_2d);
    let mut m = [[0.0; 2]; 2];
    for (&a, &wa) in rule.nodes.iter().zip(&rule.weights) {
        for (&b, &wb) in rule.nodes.iter().zip(&rule.weights) {
            for kind in [EventKind::CrossCoincidence, EventKind::Double] {
                let p = outcome_density(kind, a, b, scene, model);
                if p < quad.floor {
                    continue;
                }
                let d0 = richardson(|t| outcome_density(kind, a, b, &shifted(scene, t, 0.0), model), 0.0, step);
                let d1 = richardson(|t| outcome_density(kind, a, b, &shifted(scene, 0.0, t), model), 0.0, step);
                add(&mut m, wa * wb / p, d0, d1);
            }
        }
    }
    FisherMatrix::from_array(m).scaled(0.5)
}

fn add(m: &mut [[f64; 2]; 2], s: f64, d0: f64, d1: f64) {
    m[0][0] += s * d0 * d0;
    m[0][1] += s * d0 * d1;
    m[1][0] += s * d0 * d1;
    m[1][1] += s * d1 * d1;
}

/// Pearson chi-square statistic of a sample against its model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoodnessOfFit {
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Compares sampled events with the binned outcome densities. Every
/// `(kind, pixel pair)` cell with expected count of at least `min_expected`
/// is its own category; the rest, including everything off the detector,
/// is pooled into one.
pub fn sampler_goodness_of_fit(
    events: &[EventRecord],
    scene: &SourceScene,
    model: SourceModel,
    detector: &DetectorSpec,
    min_expected: f64,
) -> GoodnessOfFit {
    let n = events.len() as f64;
    let binned = bin_events(events, detector);
    let cell = gauss_legendre(6);
    let bins = detector.bins();
    let w = detector.pixel_width;
    let edge = |i: usize| detector.lo + i as f64 * w;
    let mut chi_square = 0.0;
    let mut categories = 0usize;
    let mut pooled_expected = n;
    let mut pooled_observed = n;
    for (kind, hist) in [(EventKind::CrossCoincidence, &binned.coincidences), (EventKind::Double, &binned.doubles)] {
        for i in 0..bins {
            for j in 0..bins {
                let (a, b) = (edge(i), edge(j));
                let mut p = 0.0;
                for (&s, &ws) in cell.nodes.iter().zip(&cell.weights) {
                    for (&t, &wt) in cell.nodes.iter().zip(&cell.weights) {
                        let x1 = a + 0.5 * w * (s + 1.0);
                        let x2 = b + 0.5 * w * (t + 1.0);
                        p += ws * wt * outcome_density(kind, x1, x2, scene, model);
                    }
                }
                let expected = n * p * 0.25 * w * w;
                if expected >= min_expected {
                    let observed = hist.get(i, j) as f64;
                    chi_square += (observed - expected).powi(2) / expected;
                    categories += 1;
                    pooled_expected -= expected;
                    pooled_observed -= observed;
                }
            }
        }
    }
    if pooled_expected >= min_expected {
        chi_square += (pooled_observed - pooled_expected).powi(2) / pooled_expected;
        categories += 1;
    }
    let dof = categories.saturating_sub(1).max(1);
    let p_value = ChiSquared::new(dof as f64).map(|d| d.sf(chi_square)).unwrap_or(f64::NAN);
    GoodnessOfFit { chi_square, dof, p_value }
}
