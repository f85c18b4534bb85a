//! Damped Gauss–Newton (Levenberg–Marquardt) least squares.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub params: Vec<f64>,
    /// One-sigma errors from the linearized covariance; infinite (JSON
    /// `null`) when the covariance could not be formed.
    #[serde(with = "unbounded_as_null")]
    pub sigmas: Vec<f64>,
    /// Residual sum of squares (unweighted).
    pub rss: f64,
    pub converged: bool,
    pub n_iter: usize,
    pub n_points: usize,
}

impl FitResult {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.params[i])
    }

    pub fn sigma(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.sigmas[i])
    }

    /// Value of a parameter that the caller knows exists.
    pub fn p(&self, name: &str) -> f64 {
        self.get(name).unwrap_or_else(|| panic!("no fit parameter named {name}"))
    }

    pub fn s(&self, name: &str) -> f64 {
        self.sigma(name).unwrap_or_else(|| panic!("no fit parameter named {name}"))
    }
}

mod unbounded_as_null {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.is_finite().then_some(*x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let v = Vec::<Option<f64>>::deserialize(d)?;
        Ok(v.into_iter().map(|x| x.unwrap_or(f64::INFINITY)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    pub fn unbounded(p: usize) -> Self {
        Self { lower: vec![f64::NEG_INFINITY; p], upper: vec![f64::INFINITY; p] }
    }

    fn clamp(&self, p: &mut [f64]) {
        for ((v, lo), hi) in p.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Relative rss decrease below which an undamped step counts as converged.
    pub ftol: f64,
    /// Relative step size below which the iteration stops.
    pub xtol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_iter: 500, ftol: 1e-13, xtol: 1e-13 }
    }
}

const LAMBDA_START: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e30;
const CORRELATION_FLOOR: f64 = 1e-13;

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|v| v * v).sum()
}

struct Problem<'a, R> {
    residuals: &'a R,
    /// Typical magnitude of each parameter, taken from the initial guess.
    typical: Vec<f64>,
}

impl<R: Fn(&[f64]) -> Vec<f64>> Problem<'_, R> {
    fn jacobian(&self, p: &[f64], n: usize) -> DMatrix<f64> {
        let mut jac = DMatrix::zeros(n, p.len());
        let mut q = p.to_vec();
        for j in 0..p.len() {
            let h = 6e-6 * p[j].abs().max(self.typical[j]);
            q[j] = p[j] + h;
            let up = (self.residuals)(&q);
            q[j] = p[j] - h;
            let dn = (self.residuals)(&q);
            q[j] = p[j];
            for i in 0..n {
                jac[(i, j)] = (up[i] - dn[i]) / (2.0 * h);
            }
        }
        jac
    }
}

/// Minimizes `sum r_i(p)^2`. `residuals` must return the same length for
/// every parameter vector.
pub fn least_squares<R: Fn(&[f64]) -> Vec<f64>>(
    residuals: R,
    names: &[&str],
    init: &[f64],
    bounds: Option<&Bounds>,
    opts: &FitOptions,
) -> Result<FitResult> {
    let np = init.len();
    if names.len() != np {
        return Err(Error::Invalid("parameter names and initial values differ in length".into()));
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid(format!("non-finite initial parameters {init:?}")));
    }
    let bounds = bounds.cloned().unwrap_or_else(|| Bounds::unbounded(np));
    if bounds.lower.len() != np || bounds.upper.len() != np {
        return Err(Error::Invalid("bounds do not match the parameter count".into()));
    }

    let mut p = init.to_vec();
    bounds.clamp(&mut p);
    let mut r = residuals(&p);
    let n = r.len();
    if n <= np {
        return Err(Error::Invalid(format!("need more than {np} points, got {n}")));
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::Invalid("model is not finite at the initial parameters".into()));
    }
    let mut rss = sum_sq(&r);
    let rss0 = rss;

    let typical: Vec<f64> = init.iter().map(|v| if *v != 0.0 { v.abs() } else { 1.0 }).collect();
    let problem = Problem { residuals: &residuals, typical };

    let mut lambda = 0.0f64;
    let mut converged = false;
    // counts accepted updates; the final pass that finds no descent is free
    let mut n_iter = 0;
    for _ in 0..opts.max_iter {
        if rss == 0.0 {
            converged = true;
            break;
        }
        let jac = problem.jacobian(&p, n);
        let a = jac.tr_mul(&jac);
        let g = jac.tr_mul(&DVector::from_column_slice(&r));
        let diag: Vec<f64> = (0..np).map(|i| a[(i, i)]).collect();
        let floor = diag.iter().cloned().fold(0.0, f64::max) * 1e-15 + f64::MIN_POSITIVE;

        let mut accepted = None;
        while lambda <= LAMBDA_MAX {
            let mut m = a.clone();
            for i in 0..np {
                m[(i, i)] += lambda * diag[i].max(floor);
            }
            let step = m.cholesky().map(|c| c.solve(&(-&g)));
            if let Some(delta) = step.filter(|d| d.iter().all(|v| v.is_finite())) {
                let mut trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
                bounds.clamp(&mut trial);
                let rt = residuals(&trial);
                let rss_t = sum_sq(&rt);
                if rss_t.is_finite() && rss_t < rss {
                    accepted = Some((trial, rt, rss_t, lambda));
                    break;
                }
            }
            lambda = if lambda == 0.0 { LAMBDA_START } else { lambda * 10.0 };
        }

        let Some((trial, rt, rss_t, used)) = accepted else {
            // no descent direction left at machine precision
            converged = true;
            break;
        };
        n_iter += 1;
        let drop = rss - rss_t;
        let step_norm = trial.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let p_norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        let old = rss;
        p = trial;
        r = rt;
        rss = rss_t;
        lambda = if used < 1e-10 { 0.0 } else { used / 10.0 };
        // the last test catches exact data, where rss bottoms out at round-off
        if (drop <= opts.ftol * old && used <= 1e-2)
            || rss <= opts.ftol * opts.ftol * rss0
            || step_norm <= opts.xtol * (p_norm + opts.xtol) {
            converged = true;
            break;
        }
    }

    let sigmas = match covariance_diag(&problem.jacobian(&p, n), rss, n, np) {
        Some(v) => v,
        None if converged => {
            return Err(Error::DegenerateFit(format!(
                "normal matrix is singular at {}",
                names
                    .iter()
                    .zip(&p)
                    .map(|(k, v)| format!("{k}={v}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )))
        }
        None => vec![f64::INFINITY; np],
    };
    Ok(FitResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        params: p,
        sigmas,
        rss,
        converged,
        n_iter,
        n_points: n,
    })
}

/// `sqrt(diag(rss/(n-p) (J^T J)^-1))`, via the correlation form of `J^T J`
/// so that parameters of very different magnitude do not spoil the test
/// for singularity.
fn covariance_diag(jac: &DMatrix<f64>, rss: f64, n: usize, np: usize) -> Option<Vec<f64>> {
    let a = jac.tr_mul(jac);
    let d: Vec<f64> = (0..np).map(|i| a[(i, i)].sqrt()).collect();
    if d.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return None;
    }
    let corr = DMatrix::from_fn(np, np, |i, j| a[(i, j)] / (d[i] * d[j]));
    let eig = SymmetricEigen::new(corr);
    if eig.eigenvalues.min() <= CORRELATION_FLOOR {
        return None;
    }
    let inv = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v))
        * eig.eigenvectors.transpose();
    let scale = rss / (n - np) as f64;
    Some((0..np).map(|i| (scale * inv[(i, i)]).max(0.0).sqrt() / d[i]).collect())
}

/// Fits `y ~ model(x, p)` with unweighted residuals.
pub fn nlls_fit<M: Fn(f64, &[f64]) -> f64>(
    model: M,
    x: &[f64],
    y: &[f64],
    names: &[&str],
    init: &[f64],
    bounds: Option<&Bounds>,
) -> Result<FitResult> {
    check_trace(x, y)?;
    least_squares(
        |p| x.iter().zip(y).map(|(&xi, &yi)| model(xi, p) - yi).collect(),
        names,
        init,
        bounds,
        &FitOptions::default(),
    )
}

pub(crate) fn check_trace(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Invalid(format!("x has {} points but y has {}", x.len(), y.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Invalid("trace contains non-finite values".into()));
    }
    Ok(())
}
