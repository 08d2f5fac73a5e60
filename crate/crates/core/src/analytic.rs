//! Closed forms and numeric evaluators near the connectivity threshold.
//!
//! Quantities whose asymptotic statements hide a `Θ(1)` constant are
//! evaluated with that constant set to one and carry a `_shape` suffix: they
//! are meaningful through ratios across `n`, not as absolute bounds.

use std::f64::consts::{E, PI};

use serde::Serialize;

use crate::census::DEFAULT_TYPE_SPLIT_DIVISOR;
use crate::quad::adaptive_simpson;
use crate::{Error, Result};

/// Relative tolerance of the `I(β)` quadrature.
pub const QUAD_REL_TOL: f64 = 1e-10;
/// Refinement cap of the `I(β)` quadrature.
pub const QUAD_MAX_SPLITS: usize = 1_000_000;

/// `μ = n e^{-π r² n}`, the limiting mean number of isolated vertices.
pub fn mu_of(n: u64, r: f64) -> f64 {
    let n = n as f64;
    n * (-PI * r * r * n).exp()
}

/// Radius with `mu_of(n, r) = mu`, i.e. `sqrt((log n - log μ) / (π n))`.
pub fn r_of_mu(n: u64, mu: f64) -> Result<f64> {
    let nf = n as f64;
    if !(mu > 0.0 && mu <= nf) {
        return Err(Error::param("mu", format!("must lie in (0, n] = (0, {n}], got {mu}")));
    }
    Ok(((nf.ln() - mu.ln()).max(0.0) / (PI * nf)).sqrt())
}

/// `n`, `r` and `μ`, kept mutually consistent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThresholdParams {
    pub n: u64,
    pub r: f64,
    pub mu: f64,
}

impl ThresholdParams {
    pub fn from_radius(n: u64, r: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("n", "need n >= 2"));
        }
        if !(r >= 0.0) {
            return Err(Error::param("r", "radius must be non-negative"));
        }
        Ok(ThresholdParams { n, r, mu: mu_of(n, r) })
    }

    pub fn from_mu(n: u64, mu: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::param("n", "need n >= 2"));
        }
        Ok(ThresholdParams {
            n,
            r: r_of_mu(n, mu)?,
            mu,
        })
    }
}

/// Exact `E K₁ = n (1 - π r²)^{n-1}` on the torus.
pub fn expected_k1_exact(n: u64, r: f64) -> Result<f64> {
    let area = PI * r * r;
    if area >= 1.0 {
        return Err(Error::DiskCoversTorus { area });
    }
    Ok(n as f64 * ((n as f64 - 1.0) * (-area).ln_1p()).exp())
}

/// `ρ`, the reach of a cluster from its leftmost vertex, and the radius `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClusterGeometry {
    pub rho: f64,
    pub r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AreaBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Bounds on the area within `r` of a cluster of reach `ρ < r/2`:
/// `π r² (1 + ρ/(6r)) <= area <= min(π r² (1 + 5ρ/(2r)), 9π r²/4)`.
pub fn area_bounds(geom: ClusterGeometry) -> Result<AreaBounds> {
    let ClusterGeometry { rho, r } = geom;
    if !(r > 0.0) {
        return Err(Error::param("r", "radius must be positive"));
    }
    if !(rho >= 0.0 && rho < r / 2.0) {
        return Err(Error::param("rho", format!("need 0 <= rho < r/2, got rho={rho}, r={r}")));
    }
    let disk = PI * r * r;
    Ok(AreaBounds {
        lower: disk * (1.0 + rho / (6.0 * r)),
        upper: (disk * (1.0 + 2.5 * rho / r)).min(2.25 * disk),
    })
}

/// Parameters of `I(β) = ∫₀^{εr} πρ (πρ²/2)^{ℓ-2} n^{-1-βρ/r} dρ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IBetaParams {
    pub beta: f64,
    pub ell: u32,
    pub epsilon: f64,
    pub n: u64,
    pub r: f64,
}

impl IBetaParams {
    fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) {
            return Err(Error::param("beta", "must be positive"));
        }
        if self.ell < 2 {
            return Err(Error::param("ell", "must be at least 2"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon < 0.5) {
            return Err(Error::param("epsilon", "must lie in (0, 1/2)"));
        }
        if self.n < 2 {
            return Err(Error::param("n", "need n >= 2"));
        }
        if !(self.r > 0.0) {
            return Err(Error::param("r", "radius must be positive"));
        }
        Ok(())
    }

    /// `(2/n)(π r²/2)^{ℓ-1}`, the factor left after substituting `ρ = x r`.
    pub fn prefactor(&self) -> f64 {
        2.0 / self.n as f64 * (PI * self.r * self.r / 2.0).powi(self.ell as i32 - 1)
    }
}

/// `I(β)` by adaptive quadrature of `x^{2ℓ-3} n^{-βx}` over `[0, ε]`.
pub fn i_beta_quadrature(p: IBetaParams) -> Result<f64> {
    p.validate()?;
    let power = 2 * p.ell as i32 - 3;
    let rate = p.beta * (p.n as f64).ln();
    let integral = adaptive_simpson(
        |x| x.powi(power) * (-rate * x).exp(),
        0.0,
        p.epsilon,
        QUAD_REL_TOL,
        QUAD_MAX_SPLITS,
    )?;
    Ok(p.prefactor() * integral)
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Large-`n` form of `I(β)`: the `x` integral extended to infinity,
/// `(2/n)(π r²/2)^{ℓ-1} (2ℓ-3)! / (β log n)^{2ℓ-2}`.
pub fn i_beta_asymptotic(p: IBetaParams) -> Result<f64> {
    p.validate()?;
    if p.n < 3 {
        return Err(Error::param("n", "need n >= 3"));
    }
    let rate = p.beta * (p.n as f64).ln();
    Ok(p.prefactor() * factorial(2 * p.ell - 3) / rate.powi(2 * p.ell as i32 - 2))
}

/// Shape of the bound on the expected number of size-`k` clusters of
/// diameter at most `εr`, with the integral replaced by `ε` times the
/// maximum of its integrand:
/// `log n ((e/2) log n/(k-2))^{k-2} ε ((2k-3)/((e/6) log n))^{2k-3}`.
pub fn ek_shape(k: u32, n: u64, epsilon: f64) -> Result<f64> {
    if n < 3 {
        return Err(Error::param("n", "need n >= 3"));
    }
    ek_shape_at_log(k, (n as f64).ln(), epsilon)
}

/// [`ek_shape`] as a function of `log n`, for sizes beyond `u64`.
pub fn ek_shape_at_log(k: u32, log_n: f64, epsilon: f64) -> Result<f64> {
    if k < 3 {
        return Err(Error::param("k", "the bound shape needs k >= 3"));
    }
    if !(log_n >= 3f64.ln()) {
        return Err(Error::param("n", "need n >= 3"));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::param("epsilon", "must lie in (0, 1/2)"));
    }
    let l = log_n;
    let kf = f64::from(k);
    let growth = (E / 2.0 * l / (kf - 2.0)).powf(kf - 2.0);
    let peak = ((2.0 * kf - 3.0) / (E / 6.0 * l)).powf(2.0 * kf - 3.0);
    Ok(l * growth * epsilon * peak)
}

/// Chernoff tail `(e^δ / (1+δ)^{1+δ})^{EW}` in log-stable form.
pub fn chernoff_upper_tail(ew: f64, delta: f64) -> f64 {
    (ew * (delta - (1.0 + delta) * delta.ln_1p())).exp()
}

/// Occupancy bound for a box of four tessellation cells of side `y ≈ εr`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoxOccupancyBound {
    /// Cell side `1 / floor(1/(εr))`.
    pub y: f64,
    /// Mean box occupancy `(2y)² n`.
    pub ew: f64,
    /// `log n / (D · EW) - 1`.
    pub delta: f64,
    /// `Pr(W > log n / D)` bound; 1 when the bound is vacuous (`δ <= 0`).
    pub bound: f64,
    /// The same bound as the power `n^{-(log(1+δ) - δ/(1+δ))/D}`.
    pub bound_power_form: f64,
}

/// Chernoff bound on a box holding more than `log n / 37` points.
pub fn chernoff_box_bound(n: u64, r: f64, epsilon: f64) -> Result<BoxOccupancyBound> {
    chernoff_box_bound_with(n, r, epsilon, DEFAULT_TYPE_SPLIT_DIVISOR)
}

/// [`chernoff_box_bound`] with an explicit split divisor `D`.
pub fn chernoff_box_bound_with(n: u64, r: f64, epsilon: f64, divisor: f64) -> Result<BoxOccupancyBound> {
    if n < 2 {
        return Err(Error::param("n", "need n >= 2"));
    }
    let width = epsilon * r;
    if !(width > 0.0 && width < 1.0) {
        return Err(Error::param("epsilon", format!("need 0 < εr < 1, got {width}")));
    }
    let y = 1.0 / (1.0 / width).floor();
    let ew = (2.0 * y).powi(2) * n as f64;
    let l = (n as f64).ln();
    let delta = l / (divisor * ew) - 1.0;
    if delta <= 0.0 {
        return Ok(BoxOccupancyBound {
            y,
            ew,
            delta,
            bound: 1.0,
            bound_power_form: 1.0,
        });
    }
    let bound = chernoff_upper_tail(ew, delta);
    let bound_power_form = (-(delta.ln_1p() - delta / (1.0 + delta)) / divisor * l).exp();
    let rel = (bound - bound_power_form).abs() / bound.max(bound_power_form).max(f64::MIN_POSITIVE);
    if rel > 1e-12 && (bound - bound_power_form).abs() > f64::MIN_POSITIVE {
        return Err(Error::Invariant(format!(
            "Chernoff forms disagree: {bound:e} vs {bound_power_form:e}"
        )));
    }
    Ok(BoxOccupancyBound {
        y,
        ew,
        delta,
        bound,
        bound_power_form,
    })
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KPrimeBracket {
    pub lower_shape: f64,
    pub upper_shape: f64,
}

/// `n(n-1) C(n-2, ℓ-2) I(β)` at `β = 5/2` (lower) and `β = 1/6` (upper).
///
/// Meaningful in the regime `μ = Θ(1)`; the constants hidden in the two
/// directions are set to one.
pub fn k_prime_expectation_bracket(n: u64, r: f64, ell: u32, epsilon: f64) -> Result<KPrimeBracket> {
    if u64::from(ell) > n {
        return Err(Error::param("ell", format!("component size {ell} exceeds n = {n}")));
    }
    let choose = (n as f64) * (n as f64 - 1.0) * binomial(n - 2, u64::from(ell.max(2)) - 2);
    let at = |beta| {
        i_beta_quadrature(IBetaParams {
            beta,
            ell,
            epsilon,
            n,
            r,
        })
    };
    Ok(KPrimeBracket {
        lower_shape: choose * at(2.5)?,
        upper_shape: choose * at(1.0 / 6.0)?,
    })
}
