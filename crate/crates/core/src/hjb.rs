//! Backward marches for the producers' value function.
//!
//! [`policy_evaluation`] solves the linear HJB under a fixed production
//! policy; [`best_response_solve`] solves the nonlinear HJB for a fixed price
//! path by global policy iteration (evaluate the whole field, then take the
//! greedy policy everywhere) until successive values agree.

use crate::error::{Error, Result};
use crate::grid::{FieldKind, GridSpec, SpaceTimeField, TimeSeries};
use crate::model::ModelParams;
use crate::operators::{fill_hjb_system, gradient_sharp, thomas_solve, BoundaryClosure, TridiagonalSystem};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ValueEvolution<T> {
    pub value: SpaceTimeField<T>,
}

/// One implicit step `U_{τ+1} → U_τ` under policy row `Q̄_τ` and price `P_τ`.
pub fn policy_eval_step<T: Scalar>(
    u_next: &[T],
    policy: &[T],
    price: T,
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) -> Result<Vec<T>> {
    let mut sys = empty_system(grid)?;
    let mut out = vec![T::zero(); grid.row_len()];
    step_into(&mut sys, u_next, policy, price, params, grid, &mut out)?;
    Ok(out)
}

fn empty_system<T: Scalar>(grid: &GridSpec<T>) -> Result<TridiagonalSystem<T>> {
    let n = grid.space_cells();
    TridiagonalSystem::new(
        vec![T::zero(); n - 1],
        vec![T::zero(); n],
        vec![T::zero(); n - 1],
        vec![T::zero(); n],
    )
}

fn step_into<T: Scalar>(
    sys: &mut TridiagonalSystem<T>,
    u_next: &[T],
    policy: &[T],
    price: T,
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
    out: &mut [T],
) -> Result<()> {
    fill_hjb_system(sys, u_next, policy, price, params, grid);
    let x = thomas_solve(sys)?;
    out[1..=grid.space_cells()].copy_from_slice(&x);
    BoundaryClosure::NeumannEqual.apply(out, params, grid);
    Ok(())
}

/// Full backward march `τ = N_T − 1, …, 0` from the terminal row.
pub fn policy_evaluation<T: Scalar>(
    policy: &SpaceTimeField<T>,
    prices: &TimeSeries<T>,
    terminal: &[T],
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) -> Result<ValueEvolution<T>> {
    if terminal.len() != grid.row_len() {
        return Err(Error::config(format!(
            "terminal value has {} nodes, grid rows have {}",
            terminal.len(),
            grid.row_len()
        )));
    }
    let mut value = SpaceTimeField::zeros(grid, FieldKind::ValueFunction);
    let mut last = terminal.to_vec();
    BoundaryClosure::NeumannEqual.apply(&mut last, params, grid);
    value.set_row(grid.time_steps(), &last);

    let mut sys = empty_system(grid)?;
    let mut next = last;
    let mut cur = vec![T::zero(); grid.row_len()];
    for tau in (0..grid.time_steps()).rev() {
        step_into(&mut sys, &next, policy.row(tau), prices.get(tau), params, grid, &mut cur)
            .map_err(|e| e.at_step(tau))?;
        if cur.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: tau });
        }
        value.set_row(tau, &cur);
        std::mem::swap(&mut next, &mut cur);
    }
    Ok(ValueEvolution { value })
}

/// Greedy policy `Q_{τ,i} = min{((P_τ − γ − (D♯U_τ)_i) / 2κ)₊, q_max}` for
/// `τ < N_T`, `i ∈ 1..=N_L`. Node 0 copies node 1 and row `N_T` copies row
/// `N_T − 1`; neither enters any coupled quantity.
pub fn greedy_policy<T: Scalar>(
    value: &SpaceTimeField<T>,
    prices: &TimeSeries<T>,
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) -> SpaceTimeField<T> {
    let n = grid.space_cells();
    let h = grid.h();
    let mut policy = SpaceTimeField::zeros(grid, FieldKind::Policy);
    for tau in 0..grid.time_steps() {
        let u = value.row(tau);
        let p = prices.get(tau);
        let row = policy.row_mut(tau);
        for i in 1..=n {
            row[i] = params.optimal_rate(p, gradient_sharp(u, i, h));
        }
        row[0] = row[1];
        row[n + 1] = row[n];
    }
    let tail = policy.row(grid.time_steps() - 1).to_vec();
    policy.set_row(grid.time_steps(), &tail);
    policy
}

/// Outcome of the inner best-response loop.
#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse<T> {
    pub value: ValueEvolution<T>,
    pub policy: SpaceTimeField<T>,
    pub iterations: usize,
    /// `‖V^{(k+1)} − V^{(k)}‖∞` at the last inner iteration.
    pub defect: T,
    /// Per-iteration defects, for logging.
    pub defects: Vec<T>,
    /// False when `max_inner` was reached before the tolerance.
    pub converged: bool,
}

/// Default inner tolerance `1e-9 · max(1, ‖u_T‖∞)`.
pub fn default_inner_tolerance<T: Scalar>(terminal: &[T]) -> T {
    let sup = terminal.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    T::of(1e-9) * sup.max(T::one())
}

pub const DEFAULT_MAX_INNER: usize = 200;

/// Value of the best response to a fixed price path, starting the inner
/// policy iteration from the zero policy.
pub fn best_response_solve<T: Scalar>(
    prices: &TimeSeries<T>,
    terminal: &[T],
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
    tol: T,
    max_inner: usize,
) -> Result<BestResponse<T>> {
    let start = SpaceTimeField::zeros(grid, FieldKind::Policy);
    best_response_from(&start, prices, terminal, params, grid, tol, max_inner)
}

/// As [`best_response_solve`], warm-started from `start`.
pub fn best_response_from<T: Scalar>(
    start: &SpaceTimeField<T>,
    prices: &TimeSeries<T>,
    terminal: &[T],
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
    tol: T,
    max_inner: usize,
) -> Result<BestResponse<T>> {
    if !(tol > T::zero()) {
        return Err(Error::config("best-response tolerance must be positive"));
    }
    let mut value = policy_evaluation(start, prices, terminal, params, grid)?;
    let mut policy = greedy_policy(&value.value, prices, params, grid);
    let mut defects = Vec::new();
    for k in 1..=max_inner.max(1) {
        let next = policy_evaluation(&policy, prices, terminal, params, grid)?;
        let defect = next.value.zip_map(&value.value, |a, b| a - b).sup_norm();
        defects.push(defect);
        value = next;
        policy = greedy_policy(&value.value, prices, params, grid);
        if defect <= tol {
            return Ok(BestResponse { value, policy, iterations: k, defect, defects, converged: true });
        }
    }
    let defect = *defects.last().expect("at least one inner iteration");
    Ok(BestResponse { value, policy, iterations: defects.len(), defect, defects, converged: false })
}
