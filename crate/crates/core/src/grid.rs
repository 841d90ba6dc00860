//! Space-time mesh and the fields that live on it.
//!
//! Space nodes are `x_i = i h` for `i ∈ {0, …, N_L + 1}`; node `N_L + 1` is a
//! ghost node used to impose the right boundary condition algebraically.
//! Time nodes are `t_τ = τ Δt` for `τ ∈ {0, …, N_T}`.
//!
//! Quadratures are rectangle rules over `i ∈ {0, …, N_L}` (ghost excluded).
//! Quantities that live on a time transition `τ → τ + 1` (policies, prices,
//! aggregate production) are [`Alignment::Transition`] and are indexed by
//! `τ ∈ {0, …, N_T − 1}`.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    length: T,
    horizon: T,
    space_cells: usize,
    time_steps: usize,
    h: T,
    dt: T,
}

/// Builds the uniform mesh with `h = L / N_L` and `Δt = T / N_T`.
pub fn build_grid<T: Scalar>(
    length: T,
    horizon: T,
    space_cells: usize,
    time_steps: usize,
) -> Result<GridSpec<T>> {
    GridSpec::new(length, horizon, space_cells, time_steps)
}

impl<T: Scalar> GridSpec<T> {
    pub fn new(length: T, horizon: T, space_cells: usize, time_steps: usize) -> Result<Self> {
        if !(length > T::zero() && length.is_finite()) {
            return Err(Error::config(format!("domain length must be positive, got {length}")));
        }
        if !(horizon > T::zero() && horizon.is_finite()) {
            return Err(Error::config(format!("horizon must be positive, got {horizon}")));
        }
        if space_cells < 2 {
            return Err(Error::config(format!("need at least 2 space cells, got {space_cells}")));
        }
        if time_steps < 1 {
            return Err(Error::config("need at least 1 time step"));
        }
        Ok(Self {
            length,
            horizon,
            space_cells,
            time_steps,
            h: length / T::of_usize(space_cells),
            dt: horizon / T::of_usize(time_steps),
        })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    /// `N_L`, the index of the last physical node.
    pub fn space_cells(&self) -> usize {
        self.space_cells
    }

    /// `N_T`, the index of the last time node.
    pub fn time_steps(&self) -> usize {
        self.time_steps
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    /// Nodes per time row including the ghost, `N_L + 2`.
    pub fn row_len(&self) -> usize {
        self.space_cells + 2
    }

    pub fn ghost(&self) -> usize {
        self.space_cells + 1
    }

    pub fn x(&self, i: usize) -> T {
        T::of_usize(i) * self.h
    }

    pub fn t(&self, tau: usize) -> T {
        T::of_usize(tau) * self.dt
    }

    /// Number of time indices a quantity with this alignment carries.
    pub fn time_len(&self, alignment: Alignment) -> usize {
        match alignment {
            Alignment::Nodal => self.time_steps + 1,
            Alignment::Transition => self.time_steps,
        }
    }
}

/// Which time indices a quantity is defined on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Alignment {
    /// `τ ∈ 0..=N_T`.
    Nodal,
    /// `τ ∈ 0..N_T`, one value per time transition.
    Transition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    ValueFunction,
    Density,
    Policy,
    Generic,
}

impl FieldKind {
    pub fn default_alignment(self) -> Alignment {
        match self {
            FieldKind::Policy => Alignment::Transition,
            _ => Alignment::Nodal,
        }
    }
}

/// A `(N_T + 1) × (N_L + 2)` array, row-major in time.
///
/// Policy fields are transition aligned: row `N_T` is storage only and is
/// kept equal to row `N_T − 1` by the solver.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField<T> {
    grid: GridSpec<T>,
    kind: FieldKind,
    alignment: Alignment,
    values: Vec<T>,
}

impl<T: Scalar> SpaceTimeField<T> {
    pub fn filled(grid: &GridSpec<T>, kind: FieldKind, value: T) -> Self {
        Self {
            grid: *grid,
            kind,
            alignment: kind.default_alignment(),
            values: vec![value; (grid.time_steps + 1) * grid.row_len()],
        }
    }

    pub fn zeros(grid: &GridSpec<T>, kind: FieldKind) -> Self {
        Self::filled(grid, kind, T::zero())
    }

    /// Builds a field by evaluating `f(τ, i)` at every stored node.
    pub fn from_fn(grid: &GridSpec<T>, kind: FieldKind, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut field = Self::zeros(grid, kind);
        let n = grid.row_len();
        for (k, v) in field.values.iter_mut().enumerate() {
            *v = f(k / n, k % n);
        }
        field
    }

    pub fn with_alignment(mut self, alignment: Alignment) -> Self {
        self.alignment = alignment;
        self
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn alignment(&self) -> Alignment {
        self.alignment
    }

    pub fn get(&self, tau: usize, i: usize) -> T {
        self.values[tau * self.grid.row_len() + i]
    }

    pub fn set(&mut self, tau: usize, i: usize, value: T) {
        let n = self.grid.row_len();
        self.values[tau * n + i] = value;
    }

    pub fn row(&self, tau: usize) -> &[T] {
        let n = self.grid.row_len();
        &self.values[tau * n..(tau + 1) * n]
    }

    pub fn row_mut(&mut self, tau: usize) -> &mut [T] {
        let n = self.grid.row_len();
        &mut self.values[tau * n..(tau + 1) * n]
    }

    pub fn set_row(&mut self, tau: usize, row: &[T]) {
        self.row_mut(tau).copy_from_slice(row);
    }

    /// Rows carried by the field's alignment.
    pub fn active_rows(&self) -> impl Iterator<Item = &[T]> {
        let n = self.grid.row_len();
        self.values
            .chunks_exact(n)
            .take(self.grid.time_len(self.alignment))
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Pointwise combination of two fields on the same grid; the result keeps
    /// `self`'s kind and alignment.
    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(T, T) -> T) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self { values, ..*self }
    }

    pub fn map(&self, mut f: impl FnMut(T) -> T) -> Self {
        let values = self.values.iter().map(|&a| f(a)).collect();
        Self { values, ..*self }
    }

    /// Minimum and maximum over active rows and physical nodes.
    pub fn min_max(&self) -> (T, T) {
        let n_phys = self.grid.space_cells + 1;
        self.active_rows()
            .flat_map(|r| r[..n_phys].iter().copied())
            .fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)))
    }

    /// Max-norm over active rows and physical nodes.
    pub fn sup_norm(&self) -> T {
        let (lo, hi) = self.min_max();
        lo.abs().max(hi.abs())
    }
}

/// One value per time index, with the alignment it lives on.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    dt: T,
    alignment: Alignment,
    values: Vec<T>,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn new(grid: &GridSpec<T>, alignment: Alignment, values: Vec<T>) -> Result<Self> {
        let expected = grid.time_len(alignment);
        if values.len() != expected {
            return Err(Error::config(format!(
                "time series of length {} does not match {:?} alignment ({expected})",
                values.len(),
                alignment
            )));
        }
        Ok(Self { dt: grid.dt(), alignment, values })
    }

    pub fn alignment(&self) -> Alignment {
        self.alignment
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, tau: usize) -> T {
        self.values[tau]
    }

    /// `(t_τ, value)` pairs.
    pub fn points(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(tau, &v)| (T::of_usize(tau) * self.dt, v))
    }
}

/// Rectangle rule `h Σ_{i=0}^{N_L} row_i`; the ghost node is excluded.
pub fn space_integral<T: Scalar>(row: &[T], grid: &GridSpec<T>) -> T {
    debug_assert!(row.len() > grid.space_cells());
    row[..=grid.space_cells()].iter().copied().sum::<T>() * grid.h()
}

/// Discrete ℓ² norm `(Σ_{τ,i} |f_{τ,i}|² h Δt)^{1/2}` over the field's active
/// rows and physical nodes `i ∈ 0..=N_L`.
pub fn l2_norm<T: Scalar>(field: &SpaceTimeField<T>) -> T {
    let grid = field.grid();
    l2_norm_rows(field.active_rows(), grid.space_cells() + 1, grid.h(), grid.dt())
}

/// ℓ² quadrature over the first `nodes` entries of each row.
pub fn l2_norm_rows<'a, T: Scalar>(
    rows: impl IntoIterator<Item = &'a [T]>,
    nodes: usize,
    h: T,
    dt: T,
) -> T {
    let sum: T = rows
        .into_iter()
        .flat_map(|r| r[..nodes].iter().map(|&v| v * v))
        .sum();
    (sum * h * dt).sqrt()
}

/// ℓ² distance between two fields on the same grid, using `a`'s alignment.
pub fn l2_distance<T: Scalar>(a: &SpaceTimeField<T>, b: &SpaceTimeField<T>) -> T {
    l2_norm(&a.zip_map(b, |x, y| x - y))
}
