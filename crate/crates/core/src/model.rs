//! Single-photon amplitude model: Gaussian transfer function, the equal
//! mixture of two displaced sources, their overlap and the one-photon
//! density-matrix kernel.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::jet::{Field, Jet};

/// Parameters of a two-point-source scene.
///
/// `x0` is the centroid and `eps` the separation, both in the same distance
/// unit as `sigma`. The visibility is the known degree of two-photon
/// indistinguishability and is ignored by single-photon quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceScene {
    x0: f64,
    eps: f64,
    visibility: f64,
    sigma: f64,
}

impl SourceScene {
    /// Scene with unit PSF width.
    pub fn new(x0: f64, eps: f64, visibility: f64) -> Result<Self> {
        Self::with_sigma(x0, eps, visibility, 1.0)
    }

    pub fn with_sigma(x0: f64, eps: f64, visibility: f64, sigma: f64) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::invalid(format!("centroid must be finite, got {x0}")));
        }
        if !(eps.is_finite() && eps >= 0.0) {
            return Err(Error::invalid(format!("separation must be finite and >= 0, got {eps}")));
        }
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::invalid(format!("visibility must lie in [0, 1], got {visibility}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::invalid(format!("sigma must be finite and > 0, got {sigma}")));
        }
        Ok(SourceScene { x0, eps, visibility, sigma })
    }

    /// Bypasses validation. Used by the likelihood, which explores signed
    /// separations; every density is even in `eps`.
    pub(crate) fn unchecked(x0: f64, eps: f64, visibility: f64, sigma: f64) -> Self {
        SourceScene { x0, eps, visibility, sigma }
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn visibility(&self) -> f64 {
        self.visibility
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn x_plus(&self) -> f64 {
        self.x0 + 0.5 * self.eps
    }

    pub fn x_minus(&self) -> f64 {
        self.x0 - 0.5 * self.eps
    }

    pub fn with_x0(self, x0: f64) -> Result<Self> {
        Self::with_sigma(x0, self.eps, self.visibility, self.sigma)
    }

    pub fn with_eps(self, eps: f64) -> Result<Self> {
        Self::with_sigma(self.x0, eps, self.visibility, self.sigma)
    }

    pub fn with_visibility(self, visibility: f64) -> Result<Self> {
        Self::with_sigma(self.x0, self.eps, visibility, self.sigma)
    }

    /// `(x0 - W, x0 + W)` with `W = half_width_sigmas * sigma + eps/2`.
    pub fn window(&self, half_width_sigmas: f64) -> (f64, f64) {
        let w = half_width_sigmas * self.sigma + 0.5 * self.eps.abs();
        (self.x0 - w, self.x0 + w)
    }
}

/// Which two-photon state enters the beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceModel {
    /// Both photons drawn independently from the one-photon mixture.
    ThermalPair,
    /// Exactly one photon from each source.
    DistinctEmitters,
}

impl SourceModel {
    pub fn name(&self) -> &'static str {
        match self {
            SourceModel::ThermalPair => "thermal-pair",
            SourceModel::DistinctEmitters => "distinct-emitters",
        }
    }
}

impl std::fmt::Display for SourceModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SourceModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thermal-pair" => Ok(SourceModel::ThermalPair),
            "distinct-emitters" => Ok(SourceModel::DistinctEmitters),
            other => Err(Error::invalid(format!(
                "unknown source model {other:?} (expected thermal-pair or distinct-emitters)"
            ))),
        }
    }
}

#[inline]
fn norm(sigma: f64) -> f64 {
    1.0 / (2.0 * PI * sigma * sigma).sqrt().sqrt()
}

/// Gaussian amplitude transfer function `(2 pi sigma^2)^(-1/4) exp(-(x-center)^2 / (4 sigma^2))`.
///
/// Its square is the normal density with standard deviation `sigma`.
pub fn psf_amplitude(x: f64, center: f64, sigma: f64) -> Result<f64> {
    if !(x.is_finite() && center.is_finite()) {
        return Err(Error::invalid("position and center must be finite"));
    }
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid(format!("sigma must be finite and > 0, got {sigma}")));
    }
    Ok(psf(x - center, sigma))
}

#[inline]
pub(crate) fn psf(dx: f64, sigma: f64) -> f64 {
    norm(sigma) * (-dx * dx / (4.0 * sigma * sigma)).exp()
}

/// Overlap `<x+|x->` of the two displaced amplitudes, `exp(-eps^2 / (8 sigma^2))`.
pub fn overlap_delta(scene: &SourceScene) -> f64 {
    let e = scene.eps / scene.sigma;
    (-e * e / 8.0).exp()
}

/// Direct-imaging density `q(x) = (psi(x - x+)^2 + psi(x - x-)^2) / 2`.
pub fn single_photon_density(x: f64, scene: &SourceScene) -> f64 {
    let [p, m] = amplitudes(x, scene);
    0.5 * (p * p + m * m)
}

/// Position kernel of the one-photon density matrix,
/// `rho(x1, x2) = (psi+(x1) psi+(x2) + psi-(x1) psi-(x2)) / 2`.
pub fn rho_kernel(x1: f64, x2: f64, scene: &SourceScene) -> f64 {
    let a = amplitudes(x1, scene);
    let b = amplitudes(x2, scene);
    kernel(a, b)
}

/// `[psi+(x), psi-(x)]`.
#[inline]
pub(crate) fn amplitudes(x: f64, scene: &SourceScene) -> [f64; 2] {
    let c = norm(scene.sigma);
    let k = -0.25 / (scene.sigma * scene.sigma);
    let (dp, dm) = (x - scene.x_plus(), x - scene.x_minus());
    [c * (k * dp * dp).exp(), c * (k * dm * dm).exp()]
}

/// `[psi+(x), psi-(x)]` with gradients in `(x0, eps)`.
///
/// `d psi±/d x± = (x - x±) / (2 sigma^2) psi±`, and `x± = x0 ± eps/2`.
#[inline]
pub(crate) fn amplitude_jets(x: f64, scene: &SourceScene) -> [Jet; 2] {
    let s2 = 2.0 * scene.sigma * scene.sigma;
    let [p, m] = amplitudes(x, scene);
    let sp = (x - scene.x_plus()) / s2 * p;
    let sm = (x - scene.x_minus()) / s2 * m;
    [Jet::new(p, sp, 0.5 * sp), Jet::new(m, sm, -0.5 * sm)]
}

#[inline]
pub(crate) fn mixture<T: Field>(a: [T; 2]) -> T {
    (a[0].square() + a[1].square()) * 0.5
}

#[inline]
pub(crate) fn kernel<T: Field>(a: [T; 2], b: [T; 2]) -> T {
    (a[0] * b[0] + a[1] * b[1]) * 0.5
}

/// Gradient of `q(x)` in `(x0, eps)`.
pub(crate) fn single_photon_density_jet(x: f64, scene: &SourceScene) -> Jet {
    mixture(amplitude_jets(x, scene))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{composite_gauss_legendre, composite_gauss_legendre_2d};
    use approx::assert_relative_eq;

    fn scene(eps: f64) -> SourceScene {
        SourceScene::new(0.0, eps, 1.0).unwrap()
    }

    #[test]
    fn amplitude_peak_value() {
        assert_relative_eq!(psf_amplitude(0.0, 0.0, 1.0).unwrap(), 0.631_618_7, epsilon = 1e-7);
        assert_relative_eq!(psf_amplitude(0.0, 0.0, 1.0).unwrap(), (2.0 * PI).powf(-0.25), epsilon = 1e-15);
    }

    #[test]
    fn amplitude_is_even_and_normalized() {
        for a in [0.1, 0.7, 2.5] {
            assert_eq!(psf_amplitude(1.3 + a, 1.3, 0.8).unwrap(), psf_amplitude(1.3 - a, 1.3, 0.8).unwrap());
        }
        let rule = composite_gauss_legendre(-10.0, 10.0, 256);
        let total = rule.integrate(|x| psf(x, 1.0).powi(2));
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn amplitude_rejects_bad_input() {
        assert!(psf_amplitude(f64::NAN, 0.0, 1.0).is_err());
        assert!(psf_amplitude(0.0, f64::INFINITY, 1.0).is_err());
        assert!(psf_amplitude(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn scene_validation() {
        assert!(SourceScene::new(0.0, -0.1, 1.0).is_err());
        assert!(SourceScene::new(0.0, 0.1, 1.1).is_err());
        assert!(SourceScene::new(f64::NAN, 0.1, 0.5).is_err());
        assert!(SourceScene::with_sigma(0.0, 0.1, 0.5, -1.0).is_err());
        assert!(SourceScene::new(0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn overlap_values() {
        assert_eq!(overlap_delta(&scene(0.0)), 1.0);
        assert_relative_eq!(overlap_delta(&scene(2.0 * 2f64.sqrt())), (-1.0f64).exp(), epsilon = 1e-15);
        let values: Vec<f64> = [0.0, 0.5, 1.0, 2.0, 4.0].iter().map(|&e| overlap_delta(&scene(e))).collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn overlap_matches_quadrature() {
        for i in 0..=16 {
            let s = scene(0.25 * i as f64);
            let (lo, hi) = s.window(10.0);
            let rule = composite_gauss_legendre(lo, hi, 256);
            let num = rule.integrate(|x| {
                let [p, m] = amplitudes(x, &s);
                p * m
            });
            assert!((num - overlap_delta(&s)).abs() < 1e-9, "eps={}", s.eps());
        }
    }

    #[test]
    fn density_values() {
        let s = scene(1.0);
        let phi = |z: f64| (-0.5 * z * z).exp() / (2.0 * PI).sqrt();
        assert_relative_eq!(single_photon_density(0.0, &s), 0.5 * (phi(0.5) + phi(-0.5)), epsilon = 1e-15);
        assert_relative_eq!(single_photon_density(0.0, &s), 0.352_065_3, epsilon = 1e-7);
        let s0 = SourceScene::new(0.4, 0.0, 1.0).unwrap();
        for x in [-1.0, 0.4, 2.0] {
            assert_relative_eq!(single_photon_density(x, &s0), phi(x - 0.4), epsilon = 1e-15);
        }
    }

    #[test]
    fn density_normalized_and_reflection_symmetric() {
        for i in 0..=8 {
            let s = SourceScene::new(1.5, 0.5 * i as f64, 1.0).unwrap();
            let rule = composite_gauss_legendre(s.x0() - 10.0, s.x0() + 10.0, 256);
            assert!((rule.integrate(|x| single_photon_density(x, &s)) - 1.0).abs() < 1e-8);
            for a in [0.3, 1.1, 3.7] {
                assert_relative_eq!(
                    single_photon_density(1.5 + a, &s),
                    single_photon_density(1.5 - a, &s),
                    max_relative = 1e-13
                );
            }
        }
    }

    #[test]
    fn kernel_diagonal_and_pure_limit() {
        let s = scene(1.3);
        for x in [-2.0, -0.3, 0.0, 0.9, 3.1] {
            assert_relative_eq!(rho_kernel(x, x, &s), single_photon_density(x, &s), max_relative = 1e-15);
        }
        let s0 = SourceScene::new(0.2, 0.0, 1.0).unwrap();
        for (a, b) in [(-1.0, 0.5), (0.3, 2.0)] {
            let expect = psf(a - 0.2, 1.0) * psf(b - 0.2, 1.0);
            assert_relative_eq!(rho_kernel(a, b, &s0), expect, max_relative = 1e-15);
        }
    }

    #[test]
    fn kernel_purity() {
        for i in 0..=8 {
            let s = scene(0.5 * i as f64);
            let (lo, hi) = s.window(10.0);
            let rule = composite_gauss_legendre_2d(lo, hi, 192);
            let purity = rule.integrate(|a, b| rho_kernel(a, b, &s).powi(2));
            let d = overlap_delta(&s);
            assert!((purity - 0.5 * (1.0 + d * d)).abs() < 1e-7, "eps={}", s.eps());
        }
        let d = overlap_delta(&scene(1.0));
        assert_relative_eq!(0.5 * (1.0 + d * d), 0.5 * (1.0 + (-0.25f64).exp()), epsilon = 1e-15);
        assert_relative_eq!(0.5 * (1.0 + d * d), 0.889_400_4, epsilon = 1e-7);
    }

    #[test]
    fn jets_match_finite_differences() {
        let s = SourceScene::new(0.3, 0.8, 1.0).unwrap();
        let h = 1e-6;
        for x in [-1.0, 0.1, 0.9, 2.4] {
            let j = single_photon_density_jet(x, &s);
            let up = SourceScene::new(0.3 + h, 0.8, 1.0).unwrap();
            let dn = SourceScene::new(0.3 - h, 0.8, 1.0).unwrap();
            let fd0 = (single_photon_density(x, &up) - single_photon_density(x, &dn)) / (2.0 * h);
            let up = SourceScene::new(0.3, 0.8 + h, 1.0).unwrap();
            let dn = SourceScene::new(0.3, 0.8 - h, 1.0).unwrap();
            let fd1 = (single_photon_density(x, &up) - single_photon_density(x, &dn)) / (2.0 * h);
            assert!((j.d[0] - fd0).abs() < 1e-8);
            assert!((j.d[1] - fd1).abs() < 1e-8);
        }
    }
}
