//! Smoothed policy iteration.
//!
//! Each outer iteration `n`:
//! 1. marches the density forward under the averaged policy `Q̄^{(n)}`,
//! 2. prices aggregate production `ψ_τ = h Σ_i M_{τ+1,i} Q̄_{τ,i}`,
//! 3. evaluates `Q̄^{(n)}` backward (a linear HJB),
//! 4. takes the greedy policy `Q^{(n+1)}` against that value,
//! 5. averages `Q̄^{(n+1)} = (1 − ζ_n) Q̄^{(n)} + ζ_n Q^{(n+1)}` with
//!    `ζ_n = β / (n + β)`.
//!
//! The loop stops once `‖Q^{(n+1)} − Q̄^{(n)}‖_{ℓ²} ≤ ε`.

use crate::error::{Error, Result};
use crate::fpk::solve_forward;
use crate::grid::{l2_distance, space_integral, Alignment, FieldKind, GridSpec, SpaceTimeField, TimeSeries};
use crate::hjb::{best_response_from, default_inner_tolerance, greedy_policy, policy_evaluation, DEFAULT_MAX_INNER};
use crate::model::{evaluate_j, ModelParams, PriceModel};
use crate::scalar::Scalar;

/// Learning rates `ζ_n = β / (n + β)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearningSchedule {
    pub beta: u32,
}

impl LearningSchedule {
    pub fn new(beta: u32) -> Result<Self> {
        if beta == 0 {
            return Err(Error::config("learning-rate parameter beta must be a positive integer"));
        }
        Ok(Self { beta })
    }

    /// `ζ_n`; equals one at `n = 0`.
    pub fn rate<T: Scalar>(&self, n: usize) -> T {
        let beta = T::of(f64::from(self.beta));
        beta / (T::of_usize(n) + beta)
    }
}

impl Default for LearningSchedule {
    fn default() -> Self {
        Self { beta: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpiConfig<T> {
    /// Stopping tolerance on `‖Q^{(n+1)} − Q̄^{(n)}‖_{ℓ²}`.
    pub epsilon: T,
    pub max_iters: usize,
    /// Compute exploitability when `n % every == 0` and at the last
    /// iteration; zero disables it.
    pub exploitability_every: usize,
    pub schedule: LearningSchedule,
}

impl<T: Scalar> Default for SpiConfig<T> {
    fn default() -> Self {
        Self {
            epsilon: T::of(1e-4),
            max_iters: 2000,
            exploitability_every: 10,
            schedule: LearningSchedule::default(),
        }
    }
}

impl<T: Scalar> SpiConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > T::zero()) {
            return Err(Error::config("epsilon must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::config("max_iters must be at least 1"));
        }
        LearningSchedule::new(self.schedule.beta).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationDiagnostics<T> {
    pub iteration: usize,
    /// `‖Q^{(n+1)} − Q̄^{(n)}‖_{ℓ²}`.
    pub residual: T,
    /// `‖√M^{(n+1)} (Q^{(n+1)} − Q̄^{(n)})‖_{ℓ²}`, the square root of `a_n`.
    pub weighted_an: T,
    pub exploitability: Option<T>,
    /// `J(Q̄^{(n)}, M^{(n)})`.
    pub j_value: T,
    /// `h Σ_i M^{(n)}_{N_T,i}`.
    pub terminal_mass: T,
}

/// Converged (or last) iterate of the learning loop.
///
/// `value`, `density`, `price` and `production` are all generated by
/// `smoothed_policy`; `policy` is the greedy response to them.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumSolution<T> {
    pub grid: GridSpec<T>,
    pub value: SpaceTimeField<T>,
    pub density: SpaceTimeField<T>,
    pub policy: SpaceTimeField<T>,
    pub smoothed_policy: SpaceTimeField<T>,
    pub price: TimeSeries<T>,
    pub production: TimeSeries<T>,
    pub mass: TimeSeries<T>,
    pub history: Vec<IterationDiagnostics<T>>,
    pub converged: bool,
}

impl<T: Scalar> EquilibriumSolution<T> {
    pub fn iterations(&self) -> usize {
        self.history.len()
    }

    pub fn final_residual(&self) -> Option<T> {
        self.history.last().map(|d| d.residual)
    }
}

/// `ψ_τ = h Σ_i M_{τ+1,i} Q̄_{τ,i}` and `P_τ = P(t_τ, ψ_τ)` for `τ < N_T`.
pub fn price_update<T: Scalar>(
    density: &SpaceTimeField<T>,
    policy: &SpaceTimeField<T>,
    pm: &PriceModel<T>,
    grid: &GridSpec<T>,
) -> Result<(TimeSeries<T>, TimeSeries<T>)> {
    let mut work = vec![T::zero(); grid.row_len()];
    let mut prices = Vec::with_capacity(grid.time_steps());
    let mut production = Vec::with_capacity(grid.time_steps());
    for tau in 0..grid.time_steps() {
        let m = density.row(tau + 1);
        let q = policy.row(tau);
        for (w, (&a, &b)) in work.iter_mut().zip(m.iter().zip(q)) {
            *w = a * b;
        }
        // Round-off negatives in M can only produce tiny negative sums.
        let psi = space_integral(&work, grid).max(T::zero());
        prices.push(pm.price(grid.t(tau), psi)?);
        production.push(psi);
    }
    Ok((
        TimeSeries::new(grid, Alignment::Transition, prices)?,
        TimeSeries::new(grid, Alignment::Transition, production)?,
    ))
}

/// Greedy update against the evaluated value `U^{(n)}` and prices `P^{(n)}`.
pub fn policy_update<T: Scalar>(
    value: &SpaceTimeField<T>,
    prices: &TimeSeries<T>,
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) -> SpaceTimeField<T> {
    greedy_policy(value, prices, params, grid)
}

/// `Q̄^{(n+1)} = (1 − ζ_n) Q̄^{(n)} + ζ_n Q^{(n+1)}`.
pub fn policy_smoothing<T: Scalar>(
    averaged: &SpaceTimeField<T>,
    greedy: &SpaceTimeField<T>,
    n: usize,
    schedule: &LearningSchedule,
) -> SpaceTimeField<T> {
    let zeta: T = schedule.rate(n);
    if zeta == T::one() {
        return greedy.clone();
    }
    averaged.zip_map(greedy, |a, b| (T::one() - zeta) * a + zeta * b)
}

/// `a_n = Σ_{τ<N_T} Σ_{i≤N_L} M_{τ+1,i} (Q_{τ,i} − Q̄_{τ,i})² h Δt`.
pub fn compute_an<T: Scalar>(
    density_next: &SpaceTimeField<T>,
    greedy: &SpaceTimeField<T>,
    averaged: &SpaceTimeField<T>,
    grid: &GridSpec<T>,
) -> T {
    let n = grid.space_cells();
    let mut sum = T::zero();
    for tau in 0..grid.time_steps() {
        let m = density_next.row(tau + 1);
        let q = greedy.row(tau);
        let qb = averaged.row(tau);
        for i in 0..=n {
            let d = q[i] - qb[i];
            sum = sum + m[i] * d * d;
        }
    }
    sum * grid.h() * grid.dt()
}

/// `Γ = h Σ_i (V_{0,i} − U_{0,i}) M_{0,i}`.
pub fn compute_exploitability<T: Scalar>(
    value: &SpaceTimeField<T>,
    best: &SpaceTimeField<T>,
    m0: &[T],
    grid: &GridSpec<T>,
) -> T {
    let gain: Vec<T> = (0..grid.row_len())
        .map(|i| (best.get(0, i) - value.get(0, i)) * m0[i])
        .collect();
    space_integral(&gain, grid)
}

/// Runs smoothed policy iteration from the initial policy `q0`.
///
/// Non-convergence within `max_iters` is reported through
/// [`EquilibriumSolution::converged`]; numerical failures abort with the
/// iteration index attached.
pub fn spi_solve<T: Scalar>(
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
    m0: &[T],
    terminal: &[T],
    q0: &SpaceTimeField<T>,
    cfg: &SpiConfig<T>,
) -> Result<EquilibriumSolution<T>> {
    spi_solve_with(params, grid, m0, terminal, q0, cfg, |_| {})
}

/// [`spi_solve`] with a callback invoked after every iteration.
pub fn spi_solve_with<T: Scalar>(
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
    m0: &[T],
    terminal: &[T],
    q0: &SpaceTimeField<T>,
    cfg: &SpiConfig<T>,
    mut on_iteration: impl FnMut(&IterationDiagnostics<T>),
) -> Result<EquilibriumSolution<T>> {
    cfg.validate()?;
    if m0.len() != grid.row_len() || terminal.len() != grid.row_len() {
        return Err(Error::config("initial density and terminal value must span a grid row"));
    }
    let (lo, hi) = q0.min_max();
    if lo < T::zero() || hi > params.q_max() {
        return Err(Error::config(format!(
            "initial policy must lie in [0, {}], found [{lo}, {hi}]",
            params.q_max()
        )));
    }
    let inner_tol = default_inner_tolerance(terminal);

    let mut averaged = q0.clone();
    let mut evolution = solve_forward(m0, &averaged, params, grid).map_err(|e| e.at_iteration(0))?;
    let mut history = Vec::new();
    let mut n = 0;
    loop {
        let fail = |e: Error| e.at_iteration(n);
        let (prices, production) =
            price_update(&evolution.density, &averaged, &params.price, grid).map_err(fail)?;
        let value = policy_evaluation(&averaged, &prices, terminal, params, grid).map_err(fail)?;
        let greedy = policy_update(&value.value, &prices, params, grid);
        let residual = l2_distance(&greedy, &averaged);
        let done = residual <= cfg.epsilon || n + 1 >= cfg.max_iters;

        let exploitability = if cfg.exploitability_every > 0 && (n % cfg.exploitability_every == 0 || done) {
            let br = best_response_from(&greedy, &prices, terminal, params, grid, inner_tol, DEFAULT_MAX_INNER)
                .map_err(fail)?;
            Some(compute_exploitability(&value.value, &br.value.value, m0, grid))
        } else {
            None
        };

        let next_averaged = policy_smoothing(&averaged, &greedy, n, &cfg.schedule);
        let next_evolution = solve_forward(m0, &next_averaged, params, grid).map_err(|e| e.at_iteration(n + 1))?;
        let an = compute_an(&next_evolution.density, &greedy, &averaged, grid);

        let diag = IterationDiagnostics {
            iteration: n,
            residual,
            weighted_an: an.max(T::zero()).sqrt(),
            exploitability,
            j_value: evaluate_j(&averaged, &evolution.density, params, grid),
            terminal_mass: evolution.mass.get(grid.time_steps()),
        };
        on_iteration(&diag);
        history.push(diag);

        if done {
            return Ok(EquilibriumSolution {
                grid: *grid,
                value: value.value,
                density: evolution.density,
                policy: greedy,
                smoothed_policy: averaged,
                price: prices,
                production,
                mass: evolution.mass,
                history,
                converged: residual <= cfg.epsilon,
            });
        }
        averaged = next_averaged;
        evolution = next_evolution;
        n += 1;
    }
}

/// Constant initial policy on the whole grid.
pub fn constant_policy<T: Scalar>(grid: &GridSpec<T>, value: T) -> SpaceTimeField<T> {
    SpaceTimeField::filled(grid, FieldKind::Policy, value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fpk::{initial_density, BumpSpec};
    use crate::grid::build_grid;
    use crate::model::DiffusionProfile;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn test1_params(horizon: f64) -> ModelParams<f64> {
        let price = PriceModel::Ces { wealth: 3.0, growth: 0.01, elasticity: 1.2, substitution: 0.2 };
        ModelParams::new(0.0, 2.0, 5.0, DiffusionProfile::Constant { sigma: 0.1 }, price, horizon).unwrap()
    }

    #[test]
    fn learning_rates() {
        let s = LearningSchedule::new(2).unwrap();
        assert_eq!(s.rate::<f64>(0), 1.0);
        assert_eq!(s.rate::<f64>(2), 0.5);
        assert!(LearningSchedule::new(0).is_err());
        for n in 1..100 {
            let z: f64 = s.rate(n);
            assert!(z > 0.0 && z < 1.0);
        }
    }

    #[test]
    fn price_update_without_production() {
        let g = build_grid(6.0, 15.0, 10, 8).unwrap();
        let p = test1_params(15.0);
        let m = SpaceTimeField::filled(&g, FieldKind::Density, 0.3);
        let q = SpaceTimeField::zeros(&g, FieldKind::Policy);
        let (prices, psi) = price_update(&m, &q, &p.price, &g).unwrap();
        for tau in 0..8 {
            assert_eq!(psi.get(tau), 0.0);
            assert_eq!(prices.get(tau), p.price.price(g.t(tau), 0.0).unwrap());
        }
        assert_eq!(prices.alignment(), Alignment::Transition);
    }

    #[test]
    fn price_update_hand_sum_and_stagger() {
        // h = 1: ψ_0 = M_{1,1} Q̄_{0,1} = 2 · 0.5 = 1.
        let g = build_grid(2.0, 1.0, 2, 1).unwrap();
        let p = test1_params(1.0);
        let mut m = SpaceTimeField::zeros(&g, FieldKind::Density);
        m.set(1, 1, 2.0);
        m.set(0, 1, 100.0); // M_0 must not enter ψ_0.
        let mut q = SpaceTimeField::zeros(&g, FieldKind::Policy);
        q.set(0, 1, 0.5);
        let (prices, psi) = price_update(&m, &q, &p.price, &g).unwrap();
        assert_eq!(psi.get(0), 1.0);
        assert_eq!(prices.get(0), p.price.price(0.0, 1.0).unwrap());
    }

    #[test]
    fn price_update_unit_price() {
        // ψ_0 = 2.8 at t = 0 gives P = 1 for the test-1 CES model.
        let g = build_grid(2.0, 1.0, 2, 1).unwrap();
        let p = test1_params(1.0);
        let mut m = SpaceTimeField::zeros(&g, FieldKind::Density);
        m.set(1, 1, 2.8);
        let mut q = SpaceTimeField::zeros(&g, FieldKind::Policy);
        q.set(0, 1, 1.0);
        let (prices, _) = price_update(&m, &q, &p.price, &g).unwrap();
        assert!((prices.get(0) - 1.0).abs() <= 1e-14);
    }

    #[test]
    fn policy_update_formula() {
        // P = 12, γ = 2, κ = 5, D♯U = 4 → 0.6; cap large via a linear price.
        let g = build_grid(2.0, 1.0, 2, 1).unwrap();
        let price = PriceModel::Linear { wealth: 1.0, growth: 0.0, substitute_price: 30.0 };
        let p = ModelParams::new(0.0, 2.0, 5.0, DiffusionProfile::Constant { sigma: 0.1 }, price, 1.0).unwrap();
        let mut u = SpaceTimeField::zeros(&g, FieldKind::ValueFunction);
        u.set(0, 1, 4.0); // D♯U at i = 1 with h = 1.
        u.set(0, 2, 4.0);
        let prices = TimeSeries::new(&g, Alignment::Transition, vec![12.0]).unwrap();
        let q: SpaceTimeField<f64> = policy_update(&u, &prices, &p, &g);
        assert!((q.get(0, 1) - 0.6).abs() <= 1e-15);
        // Flat at i = 2: D♯U = 0 → (12 − 2)/10 = 1.
        assert!((q.get(0, 2) - 1.0).abs() <= 1e-15);
        assert_eq!(q.get(0, 0), q.get(0, 1));

        // Rent above the margin kills production.
        let prices = TimeSeries::new(&g, Alignment::Transition, vec![5.0]).unwrap();
        assert_eq!(policy_update(&u, &prices, &p, &g).get(0, 1), 0.0);

        // Margin of 2 C_P is clamped at the cap.
        let huge = TimeSeries::new(&g, Alignment::Transition, vec![2.0 + 4.0 + 2.0 * p.margin_cap()]).unwrap();
        assert_eq!(policy_update(&u, &huge, &p, &g).get(0, 1), p.q_max());
    }

    #[test]
    fn smoothing_examples() {
        let g = build_grid(2.0, 1.0, 2, 3).unwrap();
        let a = SpaceTimeField::filled(&g, FieldKind::Policy, 0.2);
        let b = SpaceTimeField::filled(&g, FieldKind::Policy, 0.6);
        let beta1 = LearningSchedule::new(1).unwrap();
        assert_eq!(policy_smoothing(&a, &b, 0, &beta1), b);
        let half: SpaceTimeField<f64> = policy_smoothing(&a, &b, 1, &beta1);
        assert!(half.values().iter().all(|&v| (v - 0.4).abs() <= 1e-15));
    }

    #[test]
    fn beta_one_is_running_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let g = build_grid(2.0, 1.0, 4, 3).unwrap();
        let beta1 = LearningSchedule::new(1).unwrap();
        let mut avg = SpaceTimeField::filled(&g, FieldKind::Policy, 0.9);
        let mut draws = Vec::new();
        for n in 0..30 {
            let q = SpaceTimeField::from_fn(&g, FieldKind::Policy, |_, _| rng.gen_range(0.0..1.0));
            avg = policy_smoothing(&avg, &q, n, &beta1);
            draws.push(q);
            let k = draws.len() as f64;
            for idx in 0..avg.values().len() {
                let mean: f64 = draws.iter().map(|d| d.values()[idx]).sum::<f64>() / k;
                assert!((avg.values()[idx] - mean).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn smoothing_stays_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let g = build_grid(2.0, 1.0, 6, 5).unwrap();
        let s = LearningSchedule::new(3).unwrap();
        let q_max = 0.77;
        let mut avg = SpaceTimeField::filled(&g, FieldKind::Policy, q_max);
        for n in 0..200 {
            let q = SpaceTimeField::from_fn(&g, FieldKind::Policy, |_, _| {
                if rng.gen_bool(0.3) { q_max } else { rng.gen_range(0.0..=q_max) }
            });
            avg = policy_smoothing(&avg, &q, n, &s);
            let (lo, hi) = avg.min_max();
            assert!(lo >= 0.0 && hi <= q_max);
        }
    }

    #[test]
    fn an_examples() {
        let g = build_grid(2.0, 1.0, 2, 1).unwrap();
        let q = SpaceTimeField::filled(&g, FieldKind::Policy, 0.7);
        let m = SpaceTimeField::filled(&g, FieldKind::Density, 1.3);
        assert_eq!(compute_an(&m, &q, &q, &g), 0.0);
        let zero_m = SpaceTimeField::zeros(&g, FieldKind::Density);
        let other = SpaceTimeField::filled(&g, FieldKind::Policy, 0.2);
        assert_eq!(compute_an(&zero_m, &q, &other, &g), 0.0);
        // One cell: M = 2, ΔQ = 0.5, h = Δt = 1.
        let mut m1 = SpaceTimeField::zeros(&g, FieldKind::Density);
        m1.set(1, 1, 2.0);
        let mut q1 = SpaceTimeField::zeros(&g, FieldKind::Policy);
        q1.set(0, 1, 0.5);
        let q0 = SpaceTimeField::zeros(&g, FieldKind::Policy);
        assert_eq!(compute_an(&m1, &q1, &q0, &g), 0.5);
    }

    #[test]
    fn exploitability_examples() {
        let g = build_grid(6.0, 1.0, 12, 2).unwrap();
        let p = test1_params(1.0);
        let m0 = initial_density(&BumpSpec { center: 3.0, rate: 0.2, floor: 0.7 }, &p, &g).unwrap();
        let u = SpaceTimeField::from_fn(&g, FieldKind::ValueFunction, |t, i| (t + i) as f64);
        assert_eq!(compute_exploitability(&u, &u, &m0, &g), 0.0);
        let v = u.map(|x| x + 1.0);
        assert!((compute_exploitability(&u, &v, &m0, &g) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn max_iters_one_reports_unconverged() {
        let g = build_grid(6.0, 15.0, 30, 40).unwrap();
        let p = test1_params(15.0);
        let m0 = initial_density(&BumpSpec { center: 3.0, rate: 0.2, floor: 0.7 }, &p, &g).unwrap();
        let cfg = SpiConfig { max_iters: 1, ..SpiConfig::default() };
        let sol = spi_solve(&p, &g, &m0, &vec![0.0; g.row_len()], &constant_policy(&g, 0.0), &cfg).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations(), 1);
        assert!(sol.history[0].exploitability.is_some());
    }

    #[test]
    fn rejects_out_of_range_initial_policy() {
        let g = build_grid(6.0, 15.0, 10, 10).unwrap();
        let p = test1_params(15.0);
        let m0 = initial_density(&BumpSpec { center: 3.0, rate: 0.2, floor: 0.7 }, &p, &g).unwrap();
        let q0 = constant_policy(&g, 2.0 * p.q_max());
        let res = spi_solve(&p, &g, &m0, &vec![0.0; g.row_len()], &q0, &SpiConfig::default());
        assert!(matches!(res, Err(Error::Config(_))));
    }
}
