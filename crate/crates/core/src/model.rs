//! Economic model: production costs, diffusion of reserves, price/demand
//! pairs and the producer's Hamiltonian.

use crate::error::{Error, Result};
use crate::grid::{space_integral, GridSpec, SpaceTimeField};
use crate::scalar::Scalar;

/// Volatility of the reserve process, `σ²(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionProfile<T> {
    /// Brownian reserves, `σ²(x) = σ²`.
    Constant { sigma: T },
    /// Geometric reserves, `σ²(x) = (σ x)²`. Degenerate at `x = 0`.
    Geometric { sigma: T },
}

impl<T: Scalar> DiffusionProfile<T> {
    pub fn sigma(&self) -> T {
        match *self {
            DiffusionProfile::Constant { sigma } | DiffusionProfile::Geometric { sigma } => sigma,
        }
    }

    #[inline]
    pub fn variance(&self, x: T) -> T {
        match *self {
            DiffusionProfile::Constant { sigma } => sigma * sigma,
            DiffusionProfile::Geometric { sigma } => {
                let s = sigma * x;
                s * s
            }
        }
    }

    /// Whether `σ²(x) ≥ σ₀² > 0` holds uniformly on the domain.
    pub fn is_non_degenerate(&self) -> bool {
        matches!(*self, DiffusionProfile::Constant { sigma } if sigma > T::zero())
    }
}

/// Inverse demand `P(t, a)` together with its demand `D(t, P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PriceModel<T> {
    /// `D(t,P) = E e^{ρt} (π_sub − P)`, `P(t,a) = π_sub − e^{−ρt} a / E`.
    Linear { wealth: T, growth: T, substitute_price: T },
    /// `D(t,P) = E e^{ρt} P^{−η} − δ`, `P(t,a) = (E e^{ρt} / (δ + a))^{1/η}`.
    Ces { wealth: T, growth: T, elasticity: T, substitution: T },
}

impl<T: Scalar> PriceModel<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PriceModel::Linear { wealth, growth, substitute_price } => {
                if !(wealth > T::zero()) {
                    return Err(Error::config("linear price: wealth factor must be positive"));
                }
                if !growth.is_finite() || !(substitute_price > T::zero()) {
                    return Err(Error::config("linear price: substitute price must be positive"));
                }
            }
            PriceModel::Ces { wealth, growth, elasticity, substitution } => {
                if !(wealth > T::zero()) {
                    return Err(Error::config("CES price: wealth factor must be positive"));
                }
                if !(elasticity > T::zero()) {
                    return Err(Error::config("CES price: elasticity must be positive"));
                }
                if !(substitution > T::zero()) {
                    return Err(Error::config("CES price: substitution level must be positive"));
                }
                if !growth.is_finite() {
                    return Err(Error::config("CES price: growth must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn growth(&self) -> T {
        match *self {
            PriceModel::Linear { growth, .. } | PriceModel::Ces { growth, .. } => growth,
        }
    }

    /// Market price at time `t` for aggregate production `a ≥ 0`.
    pub fn price(&self, t: T, a: T) -> Result<T> {
        if !(a >= T::zero()) {
            return Err(Error::domain(format!("aggregate production must be >= 0, got {a}")));
        }
        Ok(self.price_unchecked(t, a))
    }

    #[inline]
    pub(crate) fn price_unchecked(&self, t: T, a: T) -> T {
        match *self {
            PriceModel::Linear { wealth, growth, substitute_price } => {
                substitute_price - (-growth * t).exp() * a / wealth
            }
            PriceModel::Ces { wealth, growth, elasticity, substitution } => {
                ((wealth * (growth * t).exp()) / (substitution + a)).powf(elasticity.recip())
            }
        }
    }

    /// Quantity demanded at price `p`; the inverse of [`PriceModel::price`].
    pub fn demand(&self, t: T, p: T) -> Result<T> {
        match *self {
            PriceModel::Linear { wealth, growth, substitute_price } => {
                if !(p <= substitute_price) {
                    return Err(Error::domain(format!(
                        "linear demand needs P <= {substitute_price}, got {p}"
                    )));
                }
                Ok(wealth * (growth * t).exp() * (substitute_price - p))
            }
            PriceModel::Ces { wealth, growth, elasticity, substitution } => {
                if !(p > T::zero()) {
                    return Err(Error::domain(format!("CES demand needs P > 0, got {p}")));
                }
                Ok(wealth * (growth * t).exp() * p.powf(-elasticity) - substitution)
            }
        }
    }

    /// `C_P = max_{t ∈ [0, T]} P(t, 0) − γ`, the largest possible price margin.
    pub fn margin_cap(&self, horizon: T, gamma: T) -> Result<T> {
        // P(t, 0) is monotone in t, so the max sits at an end of the horizon.
        let t_star = if self.growth() >= T::zero() { horizon } else { T::zero() };
        let cap = match *self {
            PriceModel::Linear { substitute_price, .. } => substitute_price - gamma,
            PriceModel::Ces { .. } => self.price_unchecked(t_star, T::zero()) - gamma,
        };
        let floor = match *self {
            PriceModel::Linear { substitute_price, .. } => substitute_price,
            PriceModel::Ces { .. } => {
                let t_min = if self.growth() >= T::zero() { T::zero() } else { horizon };
                self.price_unchecked(t_min, T::zero())
            }
        };
        if !(cap > T::zero()) || !(floor > gamma) {
            return Err(Error::config(format!(
                "zero-production price must exceed the linear cost {gamma} on the whole horizon"
            )));
        }
        Ok(cap)
    }

    /// Antiderivative `Φ(t, a)` of the price in `a`, normalized by `Φ(t, 0) = 0`.
    pub fn potential(&self, t: T, a: T) -> Result<T> {
        if !(a >= T::zero()) {
            return Err(Error::domain(format!("aggregate production must be >= 0, got {a}")));
        }
        Ok(self.potential_unchecked(t, a))
    }

    pub(crate) fn potential_unchecked(&self, t: T, a: T) -> T {
        match *self {
            PriceModel::Linear { wealth, growth, substitute_price } => {
                substitute_price * a - (-growth * t).exp() * a * a / (T::of(2.0) * wealth)
            }
            PriceModel::Ces { wealth, growth, elasticity, substitution } => {
                let scale = wealth * (growth * t).exp();
                let expo = T::one() - elasticity.recip();
                if expo.abs() < T::of(1e-9) {
                    scale * ((substitution + a) / substitution).ln()
                } else {
                    scale.powf(elasticity.recip())
                        * ((substitution + a).powf(expo) - substitution.powf(expo))
                        / expo
                }
            }
        }
    }
}

/// Parameters of the producers' problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    /// Discount rate `λ ≥ 0`.
    pub discount: T,
    /// Linear production cost `γ > 0`.
    pub linear_cost: T,
    /// Quadratic production cost `κ > 0`.
    pub quadratic_cost: T,
    pub diffusion: DiffusionProfile<T>,
    pub price: PriceModel<T>,
    margin_cap: T,
    q_max: T,
}

impl<T: Scalar> ModelParams<T> {
    /// Validates the parameters and derives `C_P` and `q_max = C_P / (2κ)`
    /// over the horizon `[0, T]`.
    pub fn new(
        discount: T,
        linear_cost: T,
        quadratic_cost: T,
        diffusion: DiffusionProfile<T>,
        price: PriceModel<T>,
        horizon: T,
    ) -> Result<Self> {
        if !(discount >= T::zero() && discount.is_finite()) {
            return Err(Error::config(format!("discount rate must be >= 0, got {discount}")));
        }
        if !(linear_cost > T::zero() && linear_cost.is_finite()) {
            return Err(Error::config(format!("linear cost must be > 0, got {linear_cost}")));
        }
        if !(quadratic_cost > T::zero() && quadratic_cost.is_finite()) {
            return Err(Error::config(format!("quadratic cost must be > 0, got {quadratic_cost}")));
        }
        if !(diffusion.sigma() >= T::zero() && diffusion.sigma().is_finite()) {
            return Err(Error::config("volatility must be >= 0"));
        }
        price.validate()?;
        let margin_cap = price.margin_cap(horizon, linear_cost)?;
        Ok(Self {
            discount,
            linear_cost,
            quadratic_cost,
            diffusion,
            price,
            margin_cap,
            q_max: margin_cap / (T::of(2.0) * quadratic_cost),
        })
    }

    /// `C_P`.
    pub fn margin_cap(&self) -> T {
        self.margin_cap
    }

    /// Production cap `C_P / (2κ)`.
    pub fn q_max(&self) -> T {
        self.q_max
    }

    #[inline]
    pub fn variance(&self, x: T) -> T {
        self.diffusion.variance(x)
    }

    /// Production cost `γ q + κ q²`.
    #[inline]
    pub fn cost(&self, q: T) -> T {
        self.linear_cost * q + self.quadratic_cost * q * q
    }

    /// Optimal production for price `p` and Hotelling rent `rent = D♯u`.
    #[inline]
    pub fn optimal_rate(&self, p: T, rent: T) -> T {
        hamiltonian_argmax(rent - p + self.linear_cost, self.quadratic_cost, self.q_max)
    }
}

/// `argmax_{0 ≤ q ≤ q_max} {−qΛ − κq²} = clamp(−Λ / 2κ, 0, q_max)`.
#[inline]
pub fn hamiltonian_argmax<T: Scalar>(slope: T, kappa: T, q_max: T) -> T {
    (-slope / (T::of(2.0) * kappa)).max(T::zero()).min(q_max)
}

/// `H(Λ) = sup_{0 ≤ q ≤ q_max} {−qΛ − κq²}`.
#[inline]
pub fn hamiltonian_value<T: Scalar>(slope: T, kappa: T, q_max: T) -> T {
    let q = hamiltonian_argmax(slope, kappa, q_max);
    -q * slope - kappa * q * q
}

/// Discrete potential
/// `Σ_τ Δt e^{−λ t_τ} [Φ(t_τ, ψ_τ) − h Σ_i (γ Q_{τ,i} + κ Q²_{τ,i}) M_{τ+1,i}]`
/// with `ψ_τ = h Σ_i M_{τ+1,i} Q_{τ,i}`.
pub fn evaluate_j<T: Scalar>(
    policy: &SpaceTimeField<T>,
    density: &SpaceTimeField<T>,
    params: &ModelParams<T>,
    grid: &GridSpec<T>,
) -> T {
    let n = grid.space_cells();
    let mut total = T::zero();
    let mut work = vec![T::zero(); grid.row_len()];
    for tau in 0..grid.time_steps() {
        let q = policy.row(tau);
        let m = density.row(tau + 1);
        for i in 0..=n {
            work[i] = m[i] * q[i];
        }
        let psi = space_integral(&work, grid).max(T::zero());
        let cost = grid.h() * (0..=n).map(|i| params.cost(q[i]) * m[i]).sum::<T>();
        let t = grid.t(tau);
        let discount = (-params.discount * t).exp();
        total = total + grid.dt() * discount * (params.price.potential_unchecked(t, psi) - cost);
    }
    total
}
