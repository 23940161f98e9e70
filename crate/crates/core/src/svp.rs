//! Rank-constrained least squares by singular value projection.
//!
//! Minimizes `J(H) = ||Y_hat - H Phi||_F^2` subject to `rank(H) <= q`. Each
//! iteration takes a line-search step from the current rank-`q` point along
//! either the gradient or the Newton direction and projects the result back
//! onto the rank-`q` set by SVD truncation.
//!
//! All algebra stays in `K x M` matrix form. The vectorized operator
//! `Psi = Phi^T (x) I_K` acts as `vec(H) -> vec(H Phi)`, so
//! `Psi^H (Psi h - y) = vec((H Phi - Y) Phi^H)` and `Psi` is never formed.
//! Conjugate transposes replace the plain transposes of the real-valued
//! derivation, which makes the exact line search minimize the real cost.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, PseudoInverse};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SvpMode {
    /// Gradient direction with exact line search in every iteration (SVP-G).
    Gradient,
    /// Newton direction with unit step in every iteration (SVP-N).
    Newton,
    /// Newton in the first iteration, gradient afterwards (SVP-H).
    Hybrid,
}

impl SvpMode {
    pub fn label(self) -> &'static str {
        match self {
            SvpMode::Gradient => "SVP-G",
            SvpMode::Newton => "SVP-N",
            SvpMode::Hybrid => "SVP-H",
        }
    }

    fn uses_newton(self, iteration: usize) -> bool {
        match self {
            SvpMode::Gradient => false,
            SvpMode::Newton => true,
            SvpMode::Hybrid => iteration == 1,
        }
    }
}

impl fmt::Display for SvpMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SvpMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "SVP-G" | "GRADIENT" => Ok(SvpMode::Gradient),
            "SVP-N" | "NEWTON" => Ok(SvpMode::Newton),
            "SVP-H" | "HYBRID" => Ok(SvpMode::Hybrid),
            other => Err(Error::InvalidParameter(format!("unknown solver mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvpConfig {
    pub rank: usize,
    pub max_iters: usize,
    pub mode: SvpMode,
    /// Stop once `|J_prev - J| / max(J_prev, eps)` falls below this; 0 disables.
    pub rel_tol: f64,
}

impl SvpConfig {
    pub fn new(rank: usize, max_iters: usize, mode: SvpMode) -> Self {
        Self {
            rank,
            max_iters,
            mode,
            rel_tol: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rank == 0 {
            return Err(Error::InvalidParameter("projection rank must be at least 1".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("need at least one iteration".into()));
        }
        if !(self.rel_tol >= 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("rel_tol must be >= 0, got {}", self.rel_tol)));
        }
        Ok(())
    }
}

/// Why the iteration loop ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    /// The search direction vanished under the measurement operator.
    DegenerateDirection,
    RelativeTolerance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Last pre-projection iterate `H^(i)`.
    pub iterate: CMatrix,
    /// Last rank-`q` point `H_q^(i)`.
    pub projected: CMatrix,
    /// `J(H_q^(i))` for each completed iteration.
    pub cost_trace: Vec<f64>,
    /// `J(H^(i))` for each completed iteration.
    pub pre_projection_cost_trace: Vec<f64>,
    pub step_trace: Vec<f64>,
    pub iters_run: usize,
    pub stop_reason: StopReason,
    /// Numerical rank of `Phi`; below `M` the Newton solution is the minimum-norm one.
    /// `None` when no Newton step was taken.
    pub pilot_rank: Option<usize>,
}

impl SolverState {
    pub fn pilots_rank_deficient(&self) -> bool {
        matches!(self.pilot_rank, Some(r) if r < self.iterate.ncols())
    }
}

/// Snapshot handed to [`solve_with_observer`] after each iteration.
#[derive(Debug)]
pub struct IterationView<'a> {
    pub iteration: usize,
    pub iterate: &'a CMatrix,
    pub projected: &'a CMatrix,
    pub step: f64,
    pub cost: f64,
}

fn check_dims(h: &CMatrix, phi: &CMatrix, y_hat: &CMatrix) -> Result<()> {
    if h.ncols() != phi.nrows() {
        return Err(Error::dims("H columns vs Phi rows", phi.nrows(), h.ncols()));
    }
    if y_hat.shape() != (h.nrows(), phi.ncols()) {
        return Err(Error::dims(
            "Y_hat shape",
            format!("{}x{}", h.nrows(), phi.ncols()),
            format!("{}x{}", y_hat.nrows(), y_hat.ncols()),
        ));
    }
    Ok(())
}

/// `||Y_hat - H Phi||_F^2`.
pub fn cost(h: &CMatrix, phi: &CMatrix, y_hat: &CMatrix) -> Result<f64> {
    check_dims(h, phi, y_hat)?;
    Ok(linalg::frobenius_sq(&(h * phi - y_hat)))
}

/// `2 (H Phi - Y_hat) Phi^H`.
pub fn gradient(h: &CMatrix, phi: &CMatrix, y_hat: &CMatrix) -> Result<CMatrix> {
    check_dims(h, phi, y_hat)?;
    Ok(gradient_from_residual(&(h * phi - y_hat), phi))
}

fn gradient_from_residual(residual: &CMatrix, phi: &CMatrix) -> CMatrix {
    (residual * phi.adjoint()) * Complex64::from(2.0)
}

/// Unconstrained least-squares solution `Y_hat Phi^+`.
///
/// Equals `Y_hat Phi^H (Phi Phi^H)^-1` when `Phi` has full row rank; otherwise
/// the minimum-norm solution.
pub fn newton_solution(y_hat: &CMatrix, phi: &CMatrix) -> Result<CMatrix> {
    if y_hat.ncols() != phi.ncols() {
        return Err(Error::dims("Y_hat columns vs Phi columns", phi.ncols(), y_hat.ncols()));
    }
    Ok(y_hat * linalg::pseudo_inverse(phi)?.matrix)
}

/// Newton direction `(H Phi - Y_hat) Phi^+`, the matrix form of `(grad^2 J)^-1 grad J`.
pub fn newton_direction(h: &CMatrix, phi: &CMatrix, y_hat: &CMatrix) -> Result<CMatrix> {
    check_dims(h, phi, y_hat)?;
    let pinv = linalg::pseudo_inverse(phi)?;
    Ok((h * phi - y_hat) * pinv.matrix)
}

/// Best rank-`q` approximation of `H` from its truncated SVD.
pub fn svp(h: &CMatrix, q: usize) -> Result<CMatrix> {
    let max = h.nrows().min(h.ncols());
    if q == 0 {
        return Err(Error::InvalidParameter("projection rank must be at least 1".into()));
    }
    if q > max {
        return Err(Error::RankTooLarge { q, max });
    }
    if q == max {
        return Ok(h.clone());
    }
    let dec = linalg::svd(h, true)?;
    let u = dec.u.as_ref().expect("u requested");
    let v_t = dec.v_t.as_ref().expect("v_t requested");
    let mut left = u.columns(0, q).into_owned();
    for (r, mut col) in left.column_iter_mut().enumerate() {
        col *= Complex64::from(dec.singular_values[r]);
    }
    Ok(left * v_t.rows(0, q))
}

/// Exact minimizer of `t -> J(H + t D)` given `grad J(H)` and `D Phi`.
fn exact_step(grad: &CMatrix, direction: &CMatrix, direction_phi: &CMatrix, phi_norm: f64) -> Result<f64> {
    let curvature = linalg::frobenius_sq(direction_phi);
    let dphi_norm = curvature.sqrt();
    let d_norm = linalg::frobenius_sq(direction).sqrt();
    if d_norm == 0.0 || dphi_norm <= f64::EPSILON * d_norm * phi_norm {
        return Err(Error::DegenerateDirection { norm: dphi_norm });
    }
    Ok(-linalg::inner_re(grad, direction) / (2.0 * curvature))
}

/// Exact line-search step `-Re<grad J(H), D> / (2 ||D Phi||_F^2)` from `H` along `D`.
pub fn optimal_step(h: &CMatrix, direction: &CMatrix, phi: &CMatrix, y_hat: &CMatrix) -> Result<f64> {
    check_dims(h, phi, y_hat)?;
    if direction.shape() != h.shape() {
        return Err(Error::dims(
            "direction shape",
            format!("{}x{}", h.nrows(), h.ncols()),
            format!("{}x{}", direction.nrows(), direction.ncols()),
        ));
    }
    let grad = gradient(h, phi, y_hat)?;
    exact_step(&grad, direction, &(direction * phi), linalg::frobenius_sq(phi).sqrt())
}

pub fn solve(
    y_hat: &CMatrix,
    phi: &CMatrix,
    config: &SvpConfig,
    init: Option<&CMatrix>,
) -> Result<(CMatrix, SolverState)> {
    solve_with_observer(y_hat, phi, config, init, |_| {})
}

/// [`solve`], calling `observer` after every iteration.
///
/// The starting point defaults to the zero matrix.
pub fn solve_with_observer<F>(
    y_hat: &CMatrix,
    phi: &CMatrix,
    config: &SvpConfig,
    init: Option<&CMatrix>,
    mut observer: F,
) -> Result<(CMatrix, SolverState)>
where
    F: FnMut(&IterationView<'_>),
{
    config.validate()?;
    let (k, t) = y_hat.shape();
    let m = phi.nrows();
    if phi.ncols() != t {
        return Err(Error::dims("Y_hat columns vs Phi columns", phi.ncols(), t));
    }
    let max_rank = k.min(m);
    if config.rank > max_rank {
        return Err(Error::RankTooLarge {
            q: config.rank,
            max: max_rank,
        });
    }
    let start = match init {
        Some(h0) => {
            if h0.shape() != (k, m) {
                return Err(Error::dims("initial point shape", format!("{k}x{m}"), format!("{}x{}", h0.nrows(), h0.ncols())));
            }
            h0.clone()
        }
        None => CMatrix::zeros(k, m),
    };
    let at = |iteration: usize| {
        move |e: Error| match e {
            Error::NumericalFailure { reason, .. } => Error::NumericalFailure { iteration, reason },
            other => other,
        }
    };

    let phi_norm = linalg::frobenius_sq(phi).sqrt();
    let mut pinv: Option<PseudoInverse> = None;

    let mut iterate = start.clone();
    let mut projected = svp(&start, config.rank).map_err(at(0))?;
    let mut residual = &projected * phi - y_hat;
    let mut current_cost = linalg::frobenius_sq(&residual);

    let mut state = SolverState {
        iterate: CMatrix::zeros(0, 0),
        projected: CMatrix::zeros(0, 0),
        cost_trace: Vec::with_capacity(config.max_iters),
        pre_projection_cost_trace: Vec::with_capacity(config.max_iters),
        step_trace: Vec::with_capacity(config.max_iters),
        iters_run: 0,
        stop_reason: StopReason::MaxIterations,
        pilot_rank: None,
    };

    for i in 1..=config.max_iters {
        let (direction, step, direction_phi) = if config.mode.uses_newton(i) {
            if pinv.is_none() {
                let p = linalg::pseudo_inverse(phi).map_err(at(i))?;
                state.pilot_rank = Some(p.rank);
                pinv = Some(p);
            }
            let d = &residual * &pinv.as_ref().expect("computed above").matrix;
            let dphi = &d * phi;
            // the Newton step length on a quadratic is exactly -1
            (d, -1.0, dphi)
        } else {
            let g = gradient_from_residual(&residual, phi);
            let gphi = &g * phi;
            match exact_step(&g, &g, &gphi, phi_norm) {
                Ok(step) => (g, step, gphi),
                Err(Error::DegenerateDirection { .. }) => {
                    state.stop_reason = StopReason::DegenerateDirection;
                    break;
                }
                Err(e) => return Err(e),
            }
        };

        if !step.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: i,
                reason: format!("non-finite step size {step}"),
            });
        }
        let scale = Complex64::from(step);
        iterate = &projected + &direction * scale;
        if !linalg::all_finite(&iterate) {
            return Err(Error::NumericalFailure {
                iteration: i,
                reason: "non-finite iterate".into(),
            });
        }
        let pre_cost = linalg::frobenius_sq(&(&residual + &direction_phi * scale));

        projected = svp(&iterate, config.rank).map_err(at(i))?;
        residual = &projected * phi - y_hat;
        let previous_cost = current_cost;
        current_cost = linalg::frobenius_sq(&residual);
        if !current_cost.is_finite() {
            return Err(Error::NumericalFailure {
                iteration: i,
                reason: "non-finite cost".into(),
            });
        }

        state.cost_trace.push(current_cost);
        state.pre_projection_cost_trace.push(pre_cost);
        state.step_trace.push(step);
        state.iters_run = i;
        observer(&IterationView {
            iteration: i,
            iterate: &iterate,
            projected: &projected,
            step,
            cost: current_cost,
        });

        if config.rel_tol > 0.0 {
            let change = (previous_cost - current_cost).abs() / previous_cost.max(f64::EPSILON);
            if change < config.rel_tol {
                state.stop_reason = StopReason::RelativeTolerance;
                break;
            }
        }
    }

    state.iterate = iterate;
    state.projected = projected.clone();
    Ok((projected, state))
}
