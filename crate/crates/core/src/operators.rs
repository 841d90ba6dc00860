//! Discrete operators on one time row and the implicit systems built from them.
//!
//! Stencils act on rows of length `N_L + 2` (ghost included). The implicit
//! HJB and FPK steps are tridiagonal in the unknowns `i ∈ 1..=N_L`: node 0
//! is Dirichlet and the ghost is eliminated through the boundary closure.
//! The FPK matrix (without the `1/Δt` term) is the transpose of the HJB
//! matrix (without `1/Δt` and `λ`), which is what makes the scheme adjoint.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::model::ModelParams;
use crate::scalar::Scalar;

/// `(Δ♯φ)_i = (φ_{i−1} − 2φ_i + φ_{i+1}) / h²`, for `1 ≤ i ≤ N_L`.
#[inline]
pub fn laplacian_sharp<T: Scalar>(row: &[T], i: usize, h: T) -> T {
    (row[i - 1] - T::of(2.0) * row[i] + row[i + 1]) / (h * h)
}

/// `(D♯φ)_i = (φ_i − φ_{i−1}) / h`, for `1 ≤ i ≤ N_L`.
#[inline]
pub fn gradient_sharp<T: Scalar>(row: &[T], i: usize, h: T) -> T {
    (row[i] - row[i - 1]) / h
}

/// `div♯(φQ)_i` given the products `φ_i Q_i`: a forward difference for
/// `i < N_L` and the outflow-free closure `−φ_{N_L} Q_{N_L} / h` at `i = N_L`.
#[inline]
pub fn divergence_sharp<T: Scalar>(product: &[T], i: usize, h: T, space_cells: usize) -> T {
    if i < space_cells {
        (product[i + 1] - product[i]) / h
    } else {
        -product[space_cells] / h
    }
}

/// `(Δ♯σ²φ)_i = (σ²_{i−1}φ_{i−1} − 2σ²_iφ_i + σ²_{i+1}φ_{i+1}) / h²`.
#[inline]
pub fn weighted_laplacian_sharp<T: Scalar>(row: &[T], variance: &[T], i: usize, h: T) -> T {
    (variance[i - 1] * row[i - 1] - T::of(2.0) * variance[i] * row[i]
        + variance[i + 1] * row[i + 1])
        / (h * h)
}

/// `σ²(x_i)` for every node of a row, ghost included.
pub fn variance_row<T: Scalar>(params: &ModelParams<T>, grid: &GridSpec<T>) -> Vec<T> {
    (0..grid.row_len()).map(|i| params.variance(grid.x(i))).collect()
}

/// Boundary rules at `x = L`; `x = 0` is always homogeneous Dirichlet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryClosure {
    /// `φ_{N_L+1} = φ_{N_L}`, used for value functions.
    NeumannEqual,
    /// `σ²_{N_L} φ_{N_L} = σ²_{N_L+1} φ_{N_L+1}`, used for densities.
    FluxWeighted,
}

impl BoundaryClosure {
    /// Writes node 0 and the ghost node of `row` from its interior values.
    pub fn apply<T: Scalar>(self, row: &mut [T], params: &ModelParams<T>, grid: &GridSpec<T>) {
        let n = grid.space_cells();
        row[0] = T::zero();
        row[n + 1] = match self {
            BoundaryClosure::NeumannEqual => row[n],
            BoundaryClosure::FluxWeighted => {
                let inner = params.variance(grid.x(n));
                let ghost = params.variance(grid.x(n + 1));
                if ghost > T::zero() {
                    inner * row[n] / ghost
                } else {
                    row[n]
                }
            }
        };
    }
}

/// `A x = rhs` with `A` tridiagonal: `sub[k]` is `A[k+1][k]`, `sup[k]` is
/// `A[k][k+1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem<T> {
    pub sub: Vec<T>,
    pub diag: Vec<T>,
    pub sup: Vec<T>,
    pub rhs: Vec<T>,
}

impl<T: Scalar> TridiagonalSystem<T> {
    pub fn new(sub: Vec<T>, diag: Vec<T>, sup: Vec<T>, rhs: Vec<T>) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n || rhs.len() != n {
            return Err(Error::config(format!(
                "inconsistent tridiagonal shapes: sub {}, diag {n}, sup {}, rhs {}",
                sub.len(),
                sup.len(),
                rhs.len()
            )));
        }
        Ok(Self { sub, diag, sup, rhs })
    }

    fn with_dim(n: usize) -> Self {
        Self {
            sub: vec![T::zero(); n - 1],
            diag: vec![T::zero(); n],
            sup: vec![T::zero(); n - 1],
            rhs: vec![T::zero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `A x`.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut v = self.diag[k] * x[k];
                if k > 0 {
                    v = v + self.sub[k - 1] * x[k - 1];
                }
                if k + 1 < n {
                    v = v + self.sup[k] * x[k + 1];
                }
                v
            })
            .collect()
    }

    /// `‖A x − rhs‖∞`.
    pub fn residual(&self, x: &[T]) -> T {
        self.apply(x)
            .iter()
            .zip(&self.rhs)
            .fold(T::zero(), |acc, (&ax, &b)| acc.max((ax - b).abs()))
    }

    /// Strict diagonal dominance by rows.
    pub fn is_row_dominant(&self) -> bool {
        let n = self.dim();
        (0..n).all(|k| {
            let lower = if k > 0 { self.sub[k - 1].abs() } else { T::zero() };
            let upper = if k + 1 < n { self.sup[k].abs() } else { T::zero() };
            self.diag[k].abs() > lower + upper
        })
    }

    /// Strict diagonal dominance by columns.
    pub fn is_column_dominant(&self) -> bool {
        let n = self.dim();
        (0..n).all(|k| {
            let above = if k > 0 { self.sup[k - 1].abs() } else { T::zero() };
            let below = if k + 1 < n { self.sub[k].abs() } else { T::zero() };
            self.diag[k].abs() > above + below
        })
    }

    /// Positive diagonal and nonpositive off-diagonals.
    pub fn has_m_matrix_signs(&self) -> bool {
        self.diag.iter().all(|&d| d > T::zero())
            && self.sub.iter().chain(&self.sup).all(|&o| o <= T::zero())
    }

    pub fn solve(&self) -> Result<Vec<T>> {
        thomas_solve(self)
    }
}

/// Direct tridiagonal elimination (Thomas algorithm). Stable without
/// pivoting for matrices that are diagonally dominant by rows or by columns.
pub fn thomas_solve<T: Scalar>(sys: &TridiagonalSystem<T>) -> Result<Vec<T>> {
    let n = sys.dim();
    let mut c = vec![T::zero(); n];
    let mut x = vec![T::zero(); n];

    let mut pivot = sys.diag[0];
    if pivot == T::zero() || !pivot.is_finite() {
        return Err(Error::ZeroPivot { row: 0 });
    }
    if n > 1 {
        c[0] = sys.sup[0] / pivot;
    }
    x[0] = sys.rhs[0] / pivot;
    for k in 1..n {
        pivot = sys.diag[k] - sys.sub[k - 1] * c[k - 1];
        if pivot == T::zero() || !pivot.is_finite() {
            return Err(Error::ZeroPivot { row: k });
        }
        if k + 1 < n {
            c[k] = sys.sup[k] / pivot;
        }
        x[k] = (sys.rhs[k] - sys.sub[k - 1] * x[k - 1]) / pivot;
    }
    for k in (0..n - 1).rev() {
        x[k] = x[k] - c[k] * x[k + 1];
    }
    Ok(x)
}

/// Implicit policy-evaluation step for unknowns `U_{τ,1..=N_L}`:
///
/// `U_i (1/Δt + 2σ²_i/h² + λ + Q_i/h) − U_{i−1}(σ²_i/h² + Q_i/h) − U_{i+1} σ²_i/h²
///  = U_{τ+1,i}/Δt + Q_i (P − γ) − κ Q_i²`,
///
/// with `U_0 = 0` and the Neumann ghost folded into row `N_L`.
pub fn assemble_hjb_system<T: Scalar>(
    u_next: &[T],
    policy: &[T],
    price: T,
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) -> TridiagonalSystem<T> {
    let mut sys = TridiagonalSystem::with_dim(grid.space_cells());
    fill_hjb_system(&mut sys, u_next, policy, price, params, grid);
    sys
}

pub(crate) fn fill_hjb_system<T: Scalar>(
    sys: &mut TridiagonalSystem<T>,
    u_next: &[T],
    policy: &[T],
    price: T,
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) {
    let n = grid.space_cells();
    let h = grid.h();
    let inv_dt = grid.dt().recip();
    let inv_h2 = (h * h).recip();
    let margin = price - params.linear_cost;
    for i in 1..=n {
        let k = i - 1;
        let diffusion = params.variance(grid.x(i)) * inv_h2;
        let q = policy[i];
        let transport = q / h;
        let right = if i < n { diffusion } else { T::zero() };
        sys.diag[k] = inv_dt + diffusion + right + params.discount + transport;
        if k > 0 {
            sys.sub[k - 1] = -(diffusion + transport);
        }
        if i < n {
            sys.sup[k] = -diffusion;
        }
        sys.rhs[k] = u_next[i] * inv_dt + q * margin - params.quadratic_cost * q * q;
    }
}

/// Implicit Fokker-Planck step for unknowns `M_{τ+1,1..=N_L}`:
///
/// `M_i (1/Δt + 2σ²_i/h² + Q_i/h) − M_{i−1} σ²_{i−1}/h² − M_{i+1}(σ²_{i+1}/h² + Q_{i+1}/h)
///  = M_{τ,i}/Δt`,
///
/// with `M_0 = 0`; at `i = N_L` the flux-weighted ghost and the closing branch
/// of `div♯` give `M_{N_L}(1/Δt + σ²_{N_L}/h² + Q_{N_L}/h) − M_{N_L−1} σ²_{N_L−1}/h²`.
pub fn assemble_fpk_system<T: Scalar>(
    m_prev: &[T],
    policy: &[T],
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) -> TridiagonalSystem<T> {
    let mut sys = TridiagonalSystem::with_dim(grid.space_cells());
    fill_fpk_system(&mut sys, m_prev, policy, params, grid);
    sys
}

pub(crate) fn fill_fpk_system<T: Scalar>(
    sys: &mut TridiagonalSystem<T>,
    m_prev: &[T],
    policy: &[T],
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) {
    let n = grid.space_cells();
    let h = grid.h();
    let inv_dt = grid.dt().recip();
    let inv_h2 = (h * h).recip();
    for i in 1..=n {
        let k = i - 1;
        let diffusion = params.variance(grid.x(i)) * inv_h2;
        let right = if i < n { diffusion } else { T::zero() };
        sys.diag[k] = inv_dt + diffusion + right + policy[i] / h;
        if k > 0 {
            sys.sub[k - 1] = -params.variance(grid.x(i - 1)) * inv_h2;
        }
        if i < n {
            sys.sup[k] = -(params.variance(grid.x(i + 1)) * inv_h2 + policy[i + 1] / h);
        }
        sys.rhs[k] = m_prev[i] * inv_dt;
    }
}

/// `|h Σ_i (𝒜φ)_i m_i − h Σ_i φ_i (𝒜*m)_i|` over `i ∈ 1..=N_L`, where
/// `𝒜 = σ²Δ♯ − Q D♯` and `𝒜* = Δ♯σ² + div♯(Q ·)`.
///
/// `phi` must satisfy the value-function closure and `m` the density closure
/// (see [`BoundaryClosure::apply`]).
pub fn adjointness_defect<T: Scalar>(
    policy: &[T],
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
    phi: &[T],
    m: &[T],
) -> T {
    let n = grid.space_cells();
    let h = grid.h();
    let variance = variance_row(params, grid);
    let flux: Vec<T> = m.iter().zip(policy).map(|(&a, &q)| a * q).collect();
    let mut forward = T::zero();
    let mut adjoint = T::zero();
    for i in 1..=n {
        let a_phi = variance[i] * laplacian_sharp(phi, i, h) - policy[i] * gradient_sharp(phi, i, h);
        let a_star_m = weighted_laplacian_sharp(m, &variance, i, h) + divergence_sharp(&flux, i, h, n);
        forward = forward + a_phi * m[i];
        adjoint = adjoint + phi[i] * a_star_m;
    }
    (h * forward - h * adjoint).abs()
}
