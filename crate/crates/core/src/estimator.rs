//! Maximum-likelihood estimation of `(x0, eps)` and batch precision studies.
//!
//! The visibility and PSF width are known constants during fitting. Fits run
//! over a signed separation internally (every density is even in `eps`) and
//! report its magnitude.

use std::fmt;
use std::io::{self, Write};

use statrs::function::factorial::ln_binomial;

use crate::densities::{outcome_density, total_coincidence_prob, EventKind};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fisher::{fisher_for_strategy, precision_bound, FisherMatrix, Parameter};
use crate::model::{single_photon_density, SourceModel, SourceScene};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::quadrature::QuadratureSpec;
use crate::sampler::{mix_seed, sample_events_with, sample_photons_with, sample_until_coincidences, EventRecord};

/// Measurement strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Single-photon positions in the image plane.
    DirectImaging,
    /// Two-photon interference, positions of both photons and outcome class.
    TwoPhotonSpatial,
    /// Two-photon interference, outcome class only.
    TwoPhotonBinary,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::DirectImaging, Strategy::TwoPhotonSpatial, Strategy::TwoPhotonBinary];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::DirectImaging => "direct-imaging",
            Strategy::TwoPhotonSpatial => "two-photon-spatial",
            Strategy::TwoPhotonBinary => "two-photon-binary",
        }
    }

    pub fn uses_pairs(&self) -> bool {
        !matches!(self, Strategy::DirectImaging)
    }

    pub fn estimates_centroid(&self) -> bool {
        !matches!(self, Strategy::TwoPhotonBinary)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown strategy {s:?}")))
    }
}

/// Data for one fit.
#[derive(Debug, Clone, PartialEq)]
pub enum Observations {
    /// Direct-imaging photon positions.
    Photons(Vec<f64>),
    /// Two-photon detection events.
    Pairs(Vec<EventRecord>),
}

impl Observations {
    pub fn len(&self) -> usize {
        match self {
            Observations::Photons(p) => p.len(),
            Observations::Pairs(e) => e.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn photon_count(&self) -> usize {
        match self {
            Observations::Photons(p) => p.len(),
            Observations::Pairs(e) => 2 * e.len(),
        }
    }

    pub fn coincidences(&self) -> usize {
        match self {
            Observations::Photons(_) => 0,
            Observations::Pairs(e) => e.iter().filter(|e| e.kind == EventKind::CrossCoincidence).count(),
        }
    }

    fn mean_position(&self) -> f64 {
        match self {
            Observations::Photons(p) => p.iter().sum::<f64>() / p.len() as f64,
            Observations::Pairs(e) => e.iter().map(|e| e.x1 + e.x2).sum::<f64>() / (2 * e.len()) as f64,
        }
    }
}

/// Model constants that are not estimated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnownConstants {
    pub visibility: f64,
    pub sigma: f64,
}

impl KnownConstants {
    pub fn of(scene: &SourceScene) -> Self {
        KnownConstants { visibility: scene.visibility(), sigma: scene.sigma() }
    }
}

fn check_compatible(obs: &Observations, strategy: Strategy) -> Result<()> {
    if obs.is_empty() {
        return Err(Error::invalid("log-likelihood needs at least one event"));
    }
    match (obs, strategy.uses_pairs()) {
        (Observations::Photons(_), true) => Err(Error::invalid(format!("{strategy} needs two-photon events"))),
        (Observations::Pairs(_), false) => Err(Error::invalid(format!("{strategy} needs single-photon positions"))),
        _ => Ok(()),
    }
}

/// Log-likelihood of `obs` at `(x0, eps)`; `eps` may be negative. Returns
/// `-inf` when some event has zero probability under the trial parameters.
pub fn log_likelihood(
    x0: f64,
    eps: f64,
    obs: &Observations,
    constants: KnownConstants,
    model: SourceModel,
    strategy: Strategy,
) -> Result<f64> {
    check_compatible(obs, strategy)?;
    if !(constants.sigma > 0.0 && (0.0..=1.0).contains(&constants.visibility)) {
        return Err(Error::invalid("known constants need sigma > 0 and visibility in [0, 1]"));
    }
    Ok(log_likelihood_unchecked(x0, eps, obs, constants, model, strategy))
}

fn log_likelihood_unchecked(
    x0: f64,
    eps: f64,
    obs: &Observations,
    c: KnownConstants,
    model: SourceModel,
    strategy: Strategy,
) -> f64 {
    let scene = SourceScene::unchecked(x0, eps, c.visibility, c.sigma);
    match (strategy, obs) {
        (Strategy::DirectImaging, Observations::Photons(p)) => p.iter().map(|&x| single_photon_density(x, &scene).ln()).sum(),
        (Strategy::TwoPhotonSpatial, Observations::Pairs(ev)) => {
            let mut total = 0.0;
            for e in ev {
                total += outcome_density(e.kind, e.x1, e.x2, &scene, model).ln();
                if total == f64::NEG_INFINITY {
                    break;
                }
            }
            total
        }
        (Strategy::TwoPhotonBinary, Observations::Pairs(ev)) => {
            let n = ev.len() as u64;
            let k = obs.coincidences() as u64;
            binomial_log_pmf(n, k, total_coincidence_prob(&scene, model))
        }
        _ => unreachable!("checked by check_compatible"),
    }
}

fn binomial_log_pmf(n: u64, k: u64, p: f64) -> f64 {
    let term = |count: u64, prob: f64| if count == 0 { 0.0 } else { count as f64 * prob.ln() };
    ln_binomial(n, k) + term(k, p) + term(n - k, 1.0 - p)
}

/// Search settings for [`mle_fit`], in units of sigma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSpec {
    /// Centroid grid spans the data mean `±` this.
    pub x0_half_range: f64,
    pub x0_steps: usize,
    /// Separation grid spans `[0, eps_grid_max]`.
    pub eps_grid_max: f64,
    pub eps_steps: usize,
    /// Hard upper bound on the separation.
    pub eps_max: f64,
    pub simplex: NelderMeadOptions,
}

impl Default for FitSpec {
    fn default() -> Self {
        FitSpec {
            x0_half_range: 2.0,
            x0_steps: 41,
            eps_grid_max: 4.0,
            eps_steps: 41,
            eps_max: 8.0,
            simplex: NelderMeadOptions { x_tolerance: 1e-6, max_iterations: 2000 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationResult {
    /// `None` for the binary strategy, which carries no centroid information.
    pub x0_hat: Option<f64>,
    pub eps_hat: f64,
    pub loglik: f64,
    pub converged: bool,
    /// The likelihood is maximal at zero separation.
    pub at_zero_boundary: bool,
    /// The separation hit `eps_max`.
    pub at_upper_boundary: bool,
    pub n_events: usize,
    pub strategy: Strategy,
    pub iterations: usize,
}

fn linspace(lo: f64, hi: f64, steps: usize) -> impl Iterator<Item = f64> {
    let h = if steps > 1 { (hi - lo) / (steps - 1) as f64 } else { 0.0 };
    (0..steps).map(move |i| lo + i as f64 * h)
}

/// Coarse grid search followed by simplex refinement.
pub fn mle_fit(
    obs: &Observations,
    constants: KnownConstants,
    model: SourceModel,
    strategy: Strategy,
    fit: &FitSpec,
) -> Result<EstimationResult> {
    check_compatible(obs, strategy)?;
    if fit.x0_steps < 2 || fit.eps_steps < 2 || !(fit.eps_max >= fit.eps_grid_max && fit.eps_grid_max > 0.0) {
        return Err(Error::invalid("fit grid needs >= 2 steps per axis and 0 < eps_grid_max <= eps_max"));
    }
    let s = constants.sigma;
    let eps_max = fit.eps_max * s;
    let ll = |x0: f64, e: f64| {
        if e.abs() > eps_max {
            f64::NEG_INFINITY
        } else {
            log_likelihood_unchecked(x0, e, obs, constants, model, strategy)
        }
    };
    let eps_step = fit.eps_grid_max * s / (fit.eps_steps - 1) as f64;
    let center = obs.mean_position();

    // (x0, eps) pairs; the binary strategy only searches eps
    let x0_grid: Vec<f64> = if strategy.estimates_centroid() {
        linspace(center - fit.x0_half_range * s, center + fit.x0_half_range * s, fit.x0_steps).collect()
    } else {
        vec![center]
    };
    let mut best = (center, 0.0, f64::NEG_INFINITY);
    for &x0 in &x0_grid {
        for e in linspace(0.0, fit.eps_grid_max * s, fit.eps_steps) {
            let v = ll(x0, e);
            if v > best.2 {
                best = (x0, e, v);
            }
        }
    }

    let n_events = obs.len();
    if best.2 == f64::NEG_INFINITY {
        return Ok(EstimationResult {
            x0_hat: strategy.estimates_centroid().then_some(center),
            eps_hat: 0.0,
            loglik: f64::NEG_INFINITY,
            converged: false,
            at_zero_boundary: false,
            at_upper_boundary: false,
            n_events,
            strategy,
            iterations: 0,
        });
    }

    let (x0_hat, e_hat, iterations, converged) = if strategy.estimates_centroid() {
        let x0_step = 2.0 * fit.x0_half_range * s / (fit.x0_steps - 1) as f64;
        let m = nelder_mead(|p| -ll(p[0], p[1]), &[best.0, best.1], &[x0_step, eps_step], &fit.simplex);
        (m.x[0], m.x[1].abs(), m.iterations, m.converged)
    } else {
        let m = nelder_mead(|p| -ll(center, p[0]), &[best.1], &[eps_step], &fit.simplex);
        (center, m.x[0].abs(), m.iterations, m.converged)
    };

    let mut eps_hat = e_hat;
    let mut loglik = ll(x0_hat, eps_hat);
    let at_zero = ll(x0_hat, 0.0);
    let at_zero_boundary = at_zero >= loglik - 1e-9;
    if at_zero_boundary {
        eps_hat = 0.0;
        loglik = at_zero.max(loglik);
    }
    let at_upper_boundary = eps_hat >= eps_max * (1.0 - 1e-6);
    Ok(EstimationResult {
        x0_hat: strategy.estimates_centroid().then_some(x0_hat),
        eps_hat,
        loglik,
        converged: converged && loglik.is_finite(),
        at_zero_boundary,
        at_upper_boundary,
        n_events,
        strategy,
        iterations,
    })
}

/// Monte Carlo precision study settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatchSpec {
    /// Photons per batch for direct imaging; pairs (or cross-coincidences,
    /// see `condition_on_coincidences`) per batch for two-photon strategies.
    pub batch_size: usize,
    pub n_batches: usize,
    pub seed: u64,
    /// Grow each two-photon batch until it holds `batch_size` cross-coincidences.
    pub condition_on_coincidences: bool,
    pub fit: FitSpec,
    pub quadrature: QuadratureSpec,
    pub exec: Exec,
}

impl BatchSpec {
    pub fn new(batch_size: usize, n_batches: usize, seed: u64) -> Self {
        BatchSpec {
            batch_size,
            n_batches,
            seed,
            condition_on_coincidences: false,
            fit: FitSpec::default(),
            quadrature: QuadratureSpec::default(),
            exec: Exec::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 100 {
            return Err(Error::invalid(format!("batch_size must be >= 100, got {}", self.batch_size)));
        }
        if self.n_batches < 10 {
            return Err(Error::invalid(format!("n_batches must be >= 10, got {}", self.n_batches)));
        }
        self.quadrature.validate()
    }

    /// Seed of batch `index`; independent of strategy so that strategies
    /// sharing a data type see the same datasets.
    pub fn batch_seed(&self, index: usize) -> u64 {
        mix_seed(self.seed, index as u64 + 1)
    }
}

/// A value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionReport {
    pub scene: SourceScene,
    pub model: SourceModel,
    pub strategy: Strategy,
    /// `1 / (N Var(eps_hat))` per photon.
    pub inv_var_eps: Estimate,
    /// `None` when the strategy carries no centroid information.
    pub inv_var_x0: Option<Estimate>,
    /// Batches that entered the statistics.
    pub n_batches: usize,
    /// Batches excluded because the fit did not converge.
    pub n_failed: usize,
    /// Retained batches whose separation estimate sits at zero.
    pub n_zero_boundary: usize,
    pub batch_size_events: usize,
    pub mean_photons_per_batch: f64,
    pub crb_prediction: FisherMatrix,
    pub mean_eps_hat: f64,
    pub mean_x0_hat: Option<f64>,
    pub fits: Vec<EstimationResult>,
}

fn variance(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// `1 / (mean(N) Var(theta))` with its leave-one-out jackknife error.
fn inverse_variance(theta: &[f64], photons: &[f64]) -> Estimate {
    let stat = |t: &[f64], n: &[f64]| 1.0 / (n.iter().sum::<f64>() / n.len() as f64 * variance(t));
    let value = stat(theta, photons);
    let k = theta.len();
    let loo: Vec<f64> = (0..k)
        .map(|i| {
            let t: Vec<f64> = theta.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
            let n: Vec<f64> = photons.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
            stat(&t, &n)
        })
        .collect();
    let mean = loo.iter().sum::<f64>() / k as f64;
    let se = ((k as f64 - 1.0) / k as f64 * loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>()).sqrt();
    Estimate { value, se }
}

fn simulate(scene: &SourceScene, model: SourceModel, strategy: Strategy, spec: &BatchSpec, seed: u64) -> Result<Observations> {
    if !strategy.uses_pairs() {
        return sample_photons_with(scene, spec.batch_size, seed, Exec::Sequential).map(Observations::Photons);
    }
    let events = if spec.condition_on_coincidences {
        sample_until_coincidences(scene, model, spec.batch_size, seed, Exec::Sequential)?
    } else {
        sample_events_with(scene, model, spec.batch_size, seed, Exec::Sequential)?
    };
    Ok(Observations::Pairs(events))
}

/// Simulates `n_batches` independent datasets, fits each and reports
/// per-photon inverse empirical variances next to the Fisher prediction.
pub fn batch_precision(scene: &SourceScene, model: SourceModel, strategy: Strategy, spec: &BatchSpec) -> Result<PrecisionReport> {
    spec.validate()?;
    let crb_prediction = fisher_for_strategy(strategy, scene, model, &spec.quadrature)?;
    let constants = KnownConstants::of(scene);
    let runs = spec.exec.try_map(spec.n_batches, |b| {
        let obs = simulate(scene, model, strategy, spec, spec.batch_seed(b))?;
        let fit = mle_fit(&obs, constants, model, strategy, &spec.fit)?;
        Ok::<_, Error>((fit, obs.photon_count() as f64))
    })?;

    let kept: Vec<_> = runs.iter().filter(|(f, _)| f.converged).collect();
    let n_failed = runs.len() - kept.len();
    if kept.len() < 2 {
        return Err(Error::invalid(format!("only {} of {} batch fits converged", kept.len(), runs.len())));
    }
    let eps: Vec<f64> = kept.iter().map(|(f, _)| f.eps_hat).collect();
    let photons: Vec<f64> = kept.iter().map(|&&(_, n)| n).collect();
    let x0: Option<Vec<f64>> = strategy
        .estimates_centroid()
        .then(|| kept.iter().map(|(f, _)| f.x0_hat.expect("centroid strategy")).collect());

    Ok(PrecisionReport {
        scene: *scene,
        model,
        strategy,
        inv_var_eps: inverse_variance(&eps, &photons),
        inv_var_x0: x0.as_deref().map(|x| inverse_variance(x, &photons)),
        n_batches: kept.len(),
        n_failed,
        n_zero_boundary: kept.iter().filter(|(f, _)| f.at_zero_boundary).count(),
        batch_size_events: spec.batch_size,
        mean_photons_per_batch: photons.iter().sum::<f64>() / photons.len() as f64,
        crb_prediction,
        mean_eps_hat: eps.iter().sum::<f64>() / eps.len() as f64,
        mean_x0_hat: x0.as_deref().map(|x| x.iter().sum::<f64>() / x.len() as f64),
        fits: runs.into_iter().map(|(f, _)| f).collect(),
    })
}

pub const PRECISION_CSV_HEADER: &str =
    "eps,strategy,inv_var_eps,inv_var_eps_se,inv_var_x0,inv_var_x0_se,crb_eps,crb_x0,n_batches,batch_size";

/// One CSV row (no newline) in [`PRECISION_CSV_HEADER`] order. `crb_*` are
/// per-photon precision bounds `1 / (F^-1)_pp`, on the same scale as the
/// inverse variances. Absent centroid estimates leave their cells empty.
pub fn precision_csv_row(r: &PrecisionReport) -> String {
    let (x0, x0_se) = match r.inv_var_x0 {
        Some(e) => (fmt_num(e.value), fmt_num(e.se)),
        None => (String::new(), String::new()),
    };
    format!(
        "{},{},{},{},{},{},{},{},{},{}",
        fmt_num(r.scene.eps()),
        r.strategy,
        fmt_num(r.inv_var_eps.value),
        fmt_num(r.inv_var_eps.se),
        x0,
        x0_se,
        fmt_num(precision_bound(&r.crb_prediction, Parameter::Separation)),
        fmt_num(precision_bound(&r.crb_prediction, Parameter::Centroid)),
        r.n_batches,
        r.batch_size_events,
    )
}

pub fn write_precision_csv<W: Write>(mut w: W, reports: &[PrecisionReport]) -> io::Result<()> {
    writeln!(w, "{PRECISION_CSV_HEADER}")?;
    for r in reports {
        writeln!(w, "{}", precision_csv_row(r))?;
    }
    Ok(())
}

/// Shortest exponent form that round-trips exactly; locale-independent.
pub fn fmt_num(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fisher::{crb, fi_direct_imaging, fi_twophoton_spatial};
    use crate::sampler::{sample_events, sample_photons};

    const TP: SourceModel = SourceModel::ThermalPair;

    fn consts(v: f64) -> KnownConstants {
        KnownConstants { visibility: v, sigma: 1.0 }
    }

    #[test]
    fn likelihood_translation_and_parity() {
        let s = SourceScene::new(0.2, 0.9, 0.8).unwrap();
        let ev = sample_events(&s, TP, 300, 1).unwrap();
        let shifted: Vec<_> = ev.iter().map(|e| EventRecord { x1: e.x1 + 1.5, x2: e.x2 + 1.5, ..*e }).collect();
        let (a, b) = (Observations::Pairs(ev), Observations::Pairs(shifted));
        for strategy in [Strategy::TwoPhotonSpatial, Strategy::TwoPhotonBinary] {
            let la = log_likelihood(0.1, 0.7, &a, consts(0.8), TP, strategy).unwrap();
            let lb = log_likelihood(1.6, 0.7, &b, consts(0.8), TP, strategy).unwrap();
            assert!((la - lb).abs() < 1e-9 * la.abs());
            let neg = log_likelihood(0.1, -0.7, &a, consts(0.8), TP, strategy).unwrap();
            assert!((la - neg).abs() < 1e-9 * la.abs());
        }
        let p = Observations::Photons(sample_photons(&s, 300, 2).unwrap());
        let la = log_likelihood(0.1, 0.7, &p, consts(0.8), TP, Strategy::DirectImaging).unwrap();
        let neg = log_likelihood(0.1, -0.7, &p, consts(0.8), TP, Strategy::DirectImaging).unwrap();
        assert!((la - neg).abs() < 1e-9 * la.abs());
    }

    #[test]
    fn binary_depends_only_on_counts() {
        let s = SourceScene::new(0.0, 0.9, 0.8).unwrap();
        let ev = sample_events(&s, TP, 200, 1).unwrap();
        let moved: Vec<_> = ev.iter().map(|e| EventRecord { x1: e.x1 * 3.0 - 1.0, x2: -e.x2, ..*e }).collect();
        let la = log_likelihood(0.0, 0.5, &Observations::Pairs(ev), consts(0.8), TP, Strategy::TwoPhotonBinary).unwrap();
        let lb = log_likelihood(4.0, 0.5, &Observations::Pairs(moved), consts(0.8), TP, Strategy::TwoPhotonBinary).unwrap();
        assert_eq!(la, lb);
    }

    #[test]
    fn likelihood_errors_and_infinities() {
        let empty = Observations::Pairs(vec![]);
        assert!(log_likelihood(0.0, 0.1, &empty, consts(1.0), TP, Strategy::TwoPhotonSpatial).is_err());
        let p = Observations::Photons(vec![0.1]);
        assert!(log_likelihood(0.0, 0.1, &p, consts(1.0), TP, Strategy::TwoPhotonSpatial).is_err());
        let c = Observations::Pairs(vec![EventRecord { kind: EventKind::CrossCoincidence, x1: 0.3, x2: -0.2 }]);
        assert_eq!(log_likelihood(0.0, 0.0, &c, consts(1.0), TP, Strategy::TwoPhotonSpatial).unwrap(), f64::NEG_INFINITY);
        assert_eq!(log_likelihood(0.0, 0.0, &c, consts(1.0), TP, Strategy::TwoPhotonBinary).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn direct_imaging_fit_within_crb() {
        let s = SourceScene::new(0.3, 1.0, 1.0).unwrap();
        let n = 100_000;
        let obs = Observations::Photons(sample_photons(&s, n, 7).unwrap());
        let fit = mle_fit(&obs, consts(1.0), TP, Strategy::DirectImaging, &FitSpec::default()).unwrap();
        assert!(fit.converged);
        let bound = crb(&fi_direct_imaging(&s, &QuadratureSpec::default()).unwrap(), n as u64).unwrap();
        let sd = |p| bound.variance(p).unwrap().sqrt();
        assert!((fit.x0_hat.unwrap() - 0.3).abs() < 5.0 * sd(Parameter::Centroid));
        assert!((fit.eps_hat - 1.0).abs() < 5.0 * sd(Parameter::Separation));
    }

    #[test]
    fn spatial_fit_within_crb() {
        let s = SourceScene::new(0.0, 0.5, 0.92).unwrap();
        let n = 20_000;
        let obs = Observations::Pairs(sample_events(&s, TP, n, 8).unwrap());
        let fit = mle_fit(&obs, consts(0.92), TP, Strategy::TwoPhotonSpatial, &FitSpec::default()).unwrap();
        assert!(fit.converged);
        let f = fi_twophoton_spatial(&s, TP, &QuadratureSpec::default()).unwrap();
        let bound = crb(&f, 2 * n as u64).unwrap();
        let sd = |p| bound.variance(p).unwrap().sqrt();
        assert!(fit.x0_hat.unwrap().abs() < 5.0 * sd(Parameter::Centroid));
        assert!((fit.eps_hat - 0.5).abs() < 5.0 * sd(Parameter::Separation));
    }

    #[test]
    fn binary_fit_inverts_coincidence_rate() {
        let s = SourceScene::new(0.0, 1.2, 0.9).unwrap();
        let obs = Observations::Pairs(sample_events(&s, TP, 5000, 4).unwrap());
        let fit = mle_fit(&obs, consts(0.9), TP, Strategy::TwoPhotonBinary, &FitSpec::default()).unwrap();
        assert!(fit.converged && fit.x0_hat.is_none());
        let frac = obs.coincidences() as f64 / obs.len() as f64;
        let fitted = total_coincidence_prob(&SourceScene::new(0.0, fit.eps_hat, 0.9).unwrap(), TP);
        assert!((fitted - frac).abs() < 1e-6);
    }

    #[test]
    fn degenerate_inputs_do_not_crash() {
        let same = vec![EventRecord { kind: EventKind::CrossCoincidence, x1: 0.5, x2: 0.5 }; 200];
        let fit = mle_fit(&Observations::Pairs(same), consts(1.0), TP, Strategy::TwoPhotonSpatial, &FitSpec::default()).unwrap();
        assert!(!fit.converged || fit.at_zero_boundary);
        let photons = Observations::Photons(vec![1.25; 200]);
        let fit = mle_fit(&photons, consts(1.0), TP, Strategy::DirectImaging, &FitSpec::default()).unwrap();
        assert!(!fit.converged || fit.at_zero_boundary);
        assert!(fit.eps_hat >= 0.0);
        let doubles = vec![EventRecord { kind: EventKind::Double, x1: 0.0, x2: 0.1 }; 200];
        let fit = mle_fit(&Observations::Pairs(doubles), consts(0.9), TP, Strategy::TwoPhotonBinary, &FitSpec::default()).unwrap();
        assert!(fit.at_zero_boundary);
    }

    #[test]
    fn batch_precision_binary_has_no_centroid() {
        let s = SourceScene::new(0.0, 0.8, 0.92).unwrap();
        let r = batch_precision(&s, TP, Strategy::TwoPhotonBinary, &BatchSpec::new(200, 10, 5)).unwrap();
        assert!(r.inv_var_x0.is_none() && r.mean_x0_hat.is_none());
        assert!(r.inv_var_eps.se > 0.0);
        let row = precision_csv_row(&r);
        assert_eq!(row.split(',').count(), 10);
        assert!(row.contains(",two-photon-binary,"));
        assert!(batch_precision(&s, TP, Strategy::TwoPhotonBinary, &BatchSpec::new(50, 10, 5)).is_err());
        assert!(batch_precision(&s, TP, Strategy::TwoPhotonBinary, &BatchSpec::new(200, 5, 5)).is_err());
    }

    #[test]
    fn batch_precision_is_schedule_independent() {
        let s = SourceScene::new(0.0, 0.5, 0.92).unwrap();
        let mut spec = BatchSpec::new(100, 10, 77);
        let a = batch_precision(&s, TP, Strategy::TwoPhotonSpatial, &spec).unwrap();
        spec.exec = Exec::Sequential;
        let b = batch_precision(&s, TP, Strategy::TwoPhotonSpatial, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn conditioned_batches_hold_fixed_coincidences() {
        let s = SourceScene::new(0.0, 1.0, 0.9).unwrap();
        let mut spec = BatchSpec::new(100, 10, 3);
        spec.condition_on_coincidences = true;
        let r = batch_precision(&s, TP, Strategy::TwoPhotonSpatial, &spec).unwrap();
        let pc = total_coincidence_prob(&s, TP);
        // roughly 2 * 100 / P_c photons per batch
        assert!((r.mean_photons_per_batch / (200.0 / pc) - 1.0).abs() < 0.2);
    }

    #[test]
    fn jackknife_of_known_sample() {
        let t = [1.0, 2.0, 3.0, 4.0];
        let n = [10.0; 4];
        let e = inverse_variance(&t, &n);
        assert!((e.value - 1.0 / (10.0 * 5.0 / 3.0)).abs() < 1e-15);
        assert!(e.se > 0.0);
    }
}
