//! Quantum Fisher information of the one-photon state by discretizing the
//! density-matrix kernel and solving for the symmetric logarithmic derivative.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::fisher::FisherMatrix;
use crate::model::{amplitude_jets, kernel, SourceScene};
use crate::quadrature::trapezoid;

/// Grid for [`qfi_numeric_sld`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SldGrid {
    pub points: usize,
    /// Half-width in units of sigma, measured from the outer source.
    pub half_width: f64,
    /// Eigenvalue pairs with `l_i + l_j` below `spectral_floor * max(l)` are dropped.
    pub spectral_floor: f64,
}

impl Default for SldGrid {
    fn default() -> Self {
        SldGrid { points: 400, half_width: 10.0, spectral_floor: 1e-12 }
    }
}

impl SldGrid {
    pub fn validate(&self) -> Result<()> {
        if self.points < 200 {
            return Err(Error::invalid(format!("SLD grid needs at least 200 points, got {}", self.points)));
        }
        if !(self.half_width.is_finite() && self.half_width >= 8.0) {
            return Err(Error::invalid(format!("SLD grid half_width must be >= 8 sigma, got {}", self.half_width)));
        }
        if !(self.spectral_floor > 0.0 && self.spectral_floor < 1e-3) {
            return Err(Error::invalid(format!("spectral floor must lie in (0, 1e-3), got {}", self.spectral_floor)));
        }
        Ok(())
    }
}

/// Smallest eigenvalue accepted before the discretized state is rejected.
const NEGATIVE_EIGENVALUE_LIMIT: f64 = -1e-10;

/// Quantum Fisher matrix per photon, `F_ab = Re Tr(rho L_a L_b)` with the
/// SLDs defined by `d_a rho = (rho L_a + L_a rho) / 2`.
///
/// The kernel is sampled on a trapezoid grid with square-root weights folded
/// into both indices, which makes the matrix a proper density operator on
/// the grid.
pub fn qfi_numeric_sld(scene: &SourceScene, grid: &SldGrid) -> Result<FisherMatrix> {
    grid.validate()?;
    let (lo, hi) = scene.window(grid.half_width);
    let rule = trapezoid(lo, hi, grid.points);
    let n = rule.len();
    let jets: Vec<_> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| {
            let s = w.sqrt();
            let [p, m] = amplitude_jets(x, scene);
            [p * s, m * s]
        })
        .collect();

    let mut rho = DMatrix::<f64>::zeros(n, n);
    let mut d_x0 = DMatrix::<f64>::zeros(n, n);
    let mut d_eps = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let k = kernel(jets[i], jets[j]);
            for (mat, val) in [(&mut rho, k.v), (&mut d_x0, k.d[0]), (&mut d_eps, k.d[1])] {
                mat[(i, j)] = val;
                mat[(j, i)] = val;
            }
        }
    }

    let trace = rho.trace();
    if (trace - 1.0).abs() > 1e-6 {
        return Err(Error::Discretization(format!("grid trace of rho is {trace}, expected 1")));
    }

    let eig = SymmetricEigen::try_new(rho, f64::EPSILON, 0)
        .ok_or_else(|| Error::Discretization("symmetric eigensolver did not converge".into()))?;
    let lambda = &eig.eigenvalues;
    let lmin = lambda.min();
    if lmin < NEGATIVE_EIGENVALUE_LIMIT {
        return Err(Error::Discretization(format!("negative eigenvalue {lmin:e} in discretized rho")));
    }
    let floor = grid.spectral_floor * lambda.max();
    let u = &eig.eigenvectors;

    let sld = |d: &DMatrix<f64>| {
        let mut l = u.transpose() * d * u;
        for i in 0..n {
            for j in 0..n {
                let s = lambda[i] + lambda[j];
                l[(i, j)] = if s > floor { 2.0 * l[(i, j)] / s } else { 0.0 };
            }
        }
        l
    };
    let l = [sld(&d_x0), sld(&d_eps)];

    // Tr(rho L_a L_b) in the eigenbasis of rho
    let mut f = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let mut t = 0.0;
            for i in 0..n {
                if lambda[i] <= 0.0 {
                    continue;
                }
                let row: f64 = (0..n).map(|j| l[a][(i, j)] * l[b][(j, i)]).sum();
                t += lambda[i] * row;
            }
            f[a][b] = t;
        }
    }
    Ok(FisherMatrix::from_array(f))
}
