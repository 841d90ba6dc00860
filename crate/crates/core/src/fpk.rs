//! Forward march of the reserve density under a fixed policy.

use crate::error::{Error, Result};
use crate::grid::{space_integral, Alignment, FieldKind, GridSpec, SpaceTimeField, TimeSeries};
use crate::model::ModelParams;
use crate::operators::{fill_fpk_system, thomas_solve, BoundaryClosure, TridiagonalSystem};
use crate::scalar::Scalar;

/// Truncated Gaussian bump `(e^{−rate (x − center)²} − floor)₊`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSpec<T> {
    pub center: T,
    pub rate: T,
    pub floor: T,
}

impl<T: Scalar> BumpSpec<T> {
    pub fn eval(&self, x: T) -> T {
        let d = x - self.center;
        ((-self.rate * d * d).exp() - self.floor).max(T::zero())
    }
}

/// Samples the bump on the grid, forces node 0 to zero and normalizes the
/// discrete mass `h Σ_{i=0}^{N_L} m_i` to one. The ghost follows the
/// flux-weighted closure.
pub fn initial_density<T: Scalar>(
    bump: &BumpSpec<T>,
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) -> Result<Vec<T>> {
    if !(bump.rate > T::zero()) {
        return Err(Error::config("initial bump rate must be positive"));
    }
    let mut row: Vec<T> = (0..grid.row_len()).map(|i| bump.eval(grid.x(i))).collect();
    row[0] = T::zero();
    let mass = space_integral(&row, grid);
    if !(mass > T::zero()) {
        return Err(Error::config(format!(
            "initial bump (center {}, rate {}, floor {}) has no mass on the grid",
            bump.center, bump.rate, bump.floor
        )));
    }
    for v in &mut row {
        *v = *v / mass;
    }
    BoundaryClosure::FluxWeighted.apply(&mut row, params, grid);
    Ok(row)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEvolution<T> {
    pub density: SpaceTimeField<T>,
    /// `h Σ_i M_{τ,i}` for `τ ∈ 0..=N_T`.
    pub mass: TimeSeries<T>,
}

impl<T: Scalar> DensityEvolution<T> {
    /// The density with round-off negatives clamped to zero, for export.
    pub fn clipped(&self) -> SpaceTimeField<T> {
        self.density.map(|v| v.max(T::zero()))
    }
}

/// One implicit step `M_τ → M_{τ+1}` under the policy row `Q̄_τ`.
pub fn fpk_step<T: Scalar>(
    m_prev: &[T],
    policy: &[T],
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) -> Result<Vec<T>> {
    let mut out = vec![T::zero(); grid.row_len()];
    let mut sys = TridiagonalSystem::new(
        vec![T::zero(); grid.space_cells() - 1],
        vec![T::zero(); grid.space_cells()],
        vec![T::zero(); grid.space_cells() - 1],
        vec![T::zero(); grid.space_cells()],
    )?;
    step_into(&mut sys, m_prev, policy, params, grid, &mut out)?;
    Ok(out)
}

fn step_into<T: Scalar>(
    sys: &mut TridiagonalSystem<T>,
    m_prev: &[T],
    policy: &[T],
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
    out: &mut [T],
) -> Result<()> {
    fill_fpk_system(sys, m_prev, policy, params, grid);
    let x = thomas_solve(sys)?;
    out[1..=grid.space_cells()].copy_from_slice(&x);
    BoundaryClosure::FluxWeighted.apply(out, params, grid);
    Ok(())
}

/// Marches `M_0` forward through `τ = 0, …, N_T − 1` under `Q̄`.
pub fn solve_forward<T: Scalar>(
    m0: &[T],
    policy: &SpaceTimeField<T>,
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) -> Result<DensityEvolution<T>> {
    if m0.len() != grid.row_len() {
        return Err(Error::config(format!(
            "initial density has {} nodes, grid rows have {}",
            m0.len(),
            grid.row_len()
        )));
    }
    let n = grid.space_cells();
    let mut density = SpaceTimeField::zeros(grid, FieldKind::Density);
    density.set_row(0, m0);
    let mut mass = Vec::with_capacity(grid.time_steps() + 1);
    mass.push(space_integral(m0, grid));

    let mut sys = TridiagonalSystem::new(
        vec![T::zero(); n - 1],
        vec![T::zero(); n],
        vec![T::zero(); n - 1],
        vec![T::zero(); n],
    )?;
    let mut prev = m0.to_vec();
    let mut next = vec![T::zero(); grid.row_len()];
    for tau in 0..grid.time_steps() {
        step_into(&mut sys, &prev, policy.row(tau), params, grid, &mut next)
            .map_err(|e| e.at_step(tau))?;
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: tau });
        }
        density.set_row(tau + 1, &next);
        mass.push(space_integral(&next, grid));
        std::mem::swap(&mut prev, &mut next);
    }
    Ok(DensityEvolution { density, mass: TimeSeries::new(grid, Alignment::Nodal, mass)? })
}
