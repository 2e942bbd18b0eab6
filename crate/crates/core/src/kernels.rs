//! The one-dimensional kernel G_α obtained by averaging the interaction
//! kernel over the (N−2)-sphere, together with the derived constants and
//! transforms that drive the linearized analysis: b_α, g(ρ), g₀, and the
//! symbol h(b) = ∫(1−cos bτ)G_α(τ)dτ with its derivative.
//!
//! Everything here reduces to one of two building blocks and is exact up to
//! quadrature of smooth or endpoint-singular 1D integrals:
//!
//!   ∫_ℝ (1−cos wy)(1+y²)^{−m} dy   (cosine deficit against a power kernel)
//!   ∫_ℝ y·sin(by)(y²+c²)^{−m} dy   (its derivative in the frequency)
//!
//! Both have closed forms in terms of K_ν; the first needs a power-series
//! branch at small frequency where the closed form cancels catastrophically.

use crate::error::{Error, Result};
use crate::quad::{integrate_adaptive, integrate_de_dist, QuadSpec};
use crate::special::{bessel_k_any, gamma, gamma_any};
use serde::{Deserialize, Serialize};

/// Ambient dimension and fractional order. Every kernel, operator, and
/// branch computation is parametrized by one of these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "N")]
    pub n: u32,
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(n: u32, alpha: f64) -> Result<Self> {
        let p = ModelParams { n, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::DomainError(format!(
                "dimension must satisfy N >= 2, got {}",
                self.n
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::DomainError(format!(
                "fractional order must lie in (0,1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }

    /// The kernel decay exponent m = (N+α)/2.
    pub fn m_exponent(&self) -> f64 {
        0.5 * (self.n as f64 + self.alpha)
    }
}

/// Constants of the sphere average for N ≥ 3: every ∫_{S^{N−2}} F(σ₁) dσ
/// collapses to c_n·∫_{−1}^{1} (1−σ₁²)^{weight_exponent} F(σ₁) dσ₁ with
/// c_n = |S^{N−3}| and weight_exponent = (N−4)/2. (For N = 2 the sphere
/// S^0 is the two-point set and sums replace integrals.)
#[derive(Debug, Clone, Copy)]
pub struct SphereReduction {
    pub c_n: f64,
    pub weight_exponent: f64,
}

impl SphereReduction {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        if params.n < 3 {
            return Err(Error::DomainError(
                "the sphere reduction requires N >= 3".into(),
            ));
        }
        let nf = params.n as f64;
        let c_n = 2.0 * std::f64::consts::PI.powf(0.5 * (nf - 2.0)) / gamma(0.5 * (nf - 2.0))?;
        Ok(SphereReduction {
            c_n,
            weight_exponent: 0.5 * (nf - 4.0),
        })
    }
}

/// ∫_ℝ (τ²+c²)^{−m} dτ = c^{1−2m}·√π·Γ(m−1/2)/Γ(m).
pub fn tau_integral_closed(m: f64, c: f64) -> Result<f64> {
    if !(m > 0.5) {
        return Err(Error::DomainError(format!(
            "tau_integral_closed requires m > 1/2, got {m}"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::DomainError(format!(
            "tau_integral_closed requires c > 0, got {c}"
        )));
    }
    Ok(c.powf(1.0 - 2.0 * m) * std::f64::consts::PI.sqrt() * gamma(m - 0.5)? / gamma(m)?)
}

/// ∫_ℝ (1−cos τ)|τ|^{−2−α} dτ = 2·Γ(1−α)·sin(πα/2)/(α(1+α)).
///
/// This is the constant in the large-frequency law h(b) ~ g₀·C·b^{1+α}.
pub fn one_minus_cos_integral(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainError(format!(
            "fractional order must lie in (0,1), got {alpha}"
        )));
    }
    Ok(2.0 * gamma(1.0 - alpha)? * (std::f64::consts::FRAC_PI_2 * alpha).sin()
        / (alpha * (1.0 + alpha)))
}

// ---------------------------------------------------------------------------
// the two scalar transforms behind h and h'
// ---------------------------------------------------------------------------

/// ψ(m, w) = ∫_ℝ (1−cos(wy))·(1+y²)^{−m} dy for w ≥ 0, m > 1/2.
///
/// For w ≥ 1 the closed form T(m) − 2·(√π/Γ(m))·(w/2)^ν·K_ν(w) (ν = m−1/2)
/// is stable. For w < 1 both terms are O(1) while the value is O(w^min(2,2ν)),
/// so the difference cancels catastrophically; there the defining power
/// series is used instead:
///
///   ψ = A·(Σ₂ − Σ₁),  A = π^{3/2}/(Γ(m)·sin(νπ)),
///   Σ₁ = Σ_{k≥1} (w/2)^{2k}/(k!·Γ(k+1−ν)),
///   Σ₂ = Σ_{k≥0} (w/2)^{2k+2ν}/(k!·Γ(k+1+ν)).
fn psi(m: f64, w: f64) -> Result<f64> {
    debug_assert!(m > 0.5 && w >= 0.0);
    if w == 0.0 {
        return Ok(0.0);
    }
    let nu = m - 0.5;
    if w >= 1.0 {
        let t_full = tau_integral_closed(m, 1.0)?;
        let f = std::f64::consts::PI.sqrt() / gamma(m)?
            * (0.5 * w).powf(nu)
            * bessel_k_any(nu, w)?;
        return Ok(t_full - 2.0 * f);
    }

    let q = 0.25 * w * w; // (w/2)^2
    let a = std::f64::consts::PI.powf(1.5)
        / (gamma(m)? * (std::f64::consts::PI * nu).sin());

    // Σ₁, terms built by the Γ recurrence from Γ(2−ν) (negative arguments
    // are fine for non-integer ν).
    let mut sum1 = 0.0;
    let mut term = q / gamma_any(2.0 - nu);
    let mut k = 1.0;
    loop {
        sum1 += term;
        if term.abs() < 1e-20 * sum1.abs().max(1e-300) || k > 200.0 {
            break;
        }
        term *= q / ((k + 1.0) * (k + 1.0 - nu));
        k += 1.0;
    }

    // Σ₂ from Γ(1+ν).
    let mut sum2 = 0.0;
    let mut term2 = (0.5 * w).powf(2.0 * nu) / gamma_any(1.0 + nu);
    let mut k2 = 0.0;
    loop {
        sum2 += term2;
        if term2.abs() < 1e-20 * sum2.abs().max(1e-300) || k2 > 200.0 {
            break;
        }
        term2 *= q / ((k2 + 1.0) * (k2 + 1.0 + nu));
        k2 += 1.0;
    }

    Ok(a * (sum2 - sum1))
}

/// ∫_ℝ y·sin(by)·(y²+c²)^{−m} dy = 2c^{2−2m}·(√π/Γ(m))·(bc/2)^ν·K_{ν−1}(bc).
///
/// A pure product — no cancellation at any frequency, so no series branch.
/// K of negative order is reached through K_{−μ} = K_μ.
fn sine_moment(m: f64, b: f64, c: f64) -> Result<f64> {
    debug_assert!(m > 0.5 && b > 0.0 && c > 0.0);
    let nu = m - 0.5;
    let x = b * c;
    Ok(2.0 * c.powf(2.0 - 2.0 * m) * std::f64::consts::PI.sqrt() / gamma(m)?
        * (0.5 * x).powf(nu)
        * bessel_k_any((nu - 1.0).abs(), x)?)
}

// ---------------------------------------------------------------------------
// G_α and friends
// ---------------------------------------------------------------------------

/// The sphere-averaged kernel G_α(τ) (even, positive, singular at τ = 0).
///
/// N = 2: the sphere is two points, giving exactly
/// 2(|τ|^{−2−α} + (τ²+4)^{−(2+α)/2}).
/// N = 3: the substitution r = 1−cosθ removes the endpoint weight exactly,
/// leaving a smooth integral over θ ∈ [0, π].
/// N ≥ 4: the reduced form 2·C_N·∫_0^2 (r(2−r))^{(N−4)/2}(τ²+2r)^{−m} dr
/// with tanh-sinh quadrature at both (at worst algebraically singular)
/// endpoints.
pub fn g_alpha(tau: f64, params: &ModelParams, spec: &QuadSpec) -> Result<f64> {
    params.validate()?;
    if tau == 0.0 || !tau.is_finite() {
        return Err(Error::DomainError(
            "G_alpha is singular at tau = 0".into(),
        ));
    }
    let tau = tau.abs();
    let m = params.m_exponent();
    if params.n == 2 {
        return Ok(2.0 * (tau.powf(-2.0 - params.alpha) + (tau * tau + 4.0).powf(-m)));
    }
    let sphere = SphereReduction::new(params)?;
    if params.n == 3 {
        let v = integrate_adaptive(
            |theta: f64| {
                let s = (0.5 * theta).sin();
                (tau * tau + 4.0 * s * s).powf(-m)
            },
            0.0,
            std::f64::consts::PI,
            spec,
        )?;
        return Ok(2.0 * sphere.c_n * v);
    }
    let we = sphere.weight_exponent;
    let v = integrate_de_dist(
        |_r, dl, dr| (dl * dr).powf(we) * (tau * tau + 2.0 * dl).powf(-m),
        0.0,
        2.0,
        true,
        true,
        spec,
    )?;
    Ok(2.0 * sphere.c_n * v)
}

/// g(ρ) = 2·C_N·∫_0^{2/ρ} (t(2−ρt))^{(N−4)/2}·(1+2t)^{−m} dt for N ≥ 3;
/// the rescaling of G_α that satisfies G_α(τ) = |τ|^{−2−α}·g(τ²).
pub fn g_of_rho(rho: f64, params: &ModelParams, spec: &QuadSpec) -> Result<f64> {
    params.validate()?;
    if params.n < 3 {
        return Err(Error::DomainError("g(rho) requires N >= 3".into()));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::DomainError(format!(
            "g(rho) requires rho > 0, got {rho}"
        )));
    }
    let sphere = SphereReduction::new(params)?;
    let m = params.m_exponent();
    let we = sphere.weight_exponent;
    // 2−ρt = ρ·(2/ρ − t), so the right-endpoint factor is exact in the
    // distance coordinate.
    let v = integrate_de_dist(
        |t, dl, dr| (dl * rho * dr).powf(we) * (1.0 + 2.0 * t).powf(-m),
        0.0,
        2.0 / rho,
        true,
        true,
        spec,
    )?;
    Ok(2.0 * sphere.c_n * v)
}

/// g₀ = lim_{ρ→0⁺} g(ρ) = 2^{(N−2)/2}·C_N·∫_0^∞ t^{(N−4)/2}(1+2t)^{−m} dt,
/// which the beta integral collapses to C_N·Γ((N−2)/2)·Γ((2+α)/2)/Γ(m).
///
/// For N = 2 the corresponding limit of |τ|^{2+α}G_α(τ) is exactly 2.
pub fn g0_const(params: &ModelParams) -> Result<f64> {
    params.validate()?;
    if params.n == 2 {
        return Ok(2.0);
    }
    let sphere = SphereReduction::new(params)?;
    let nf = params.n as f64;
    let m = params.m_exponent();
    Ok(sphere.c_n * gamma(0.5 * (nf - 2.0))? * gamma(0.5 * (2.0 + params.alpha))? / gamma(m)?)
}

/// b_α = 2∫_ℝ∫_{S^{N−2}} (1−σ₁)·(τ²+2(1−σ₁))^{−m} dσ dτ.
///
/// The τ-integral is closed-form, leaving one σ₁ integral with algebraic
/// endpoint behavior (tanh-sinh, exact endpoint distances). For N = 2 the
/// two-point sphere leaves 4·∫(τ²+4)^{−m}dτ in closed form.
pub fn b_alpha_const(params: &ModelParams, spec: &QuadSpec) -> Result<f64> {
    params.validate()?;
    let m = params.m_exponent();
    if params.n == 2 {
        return Ok(4.0 * tau_integral_closed(m, 2.0)?);
    }
    let sphere = SphereReduction::new(params)?;
    let we = sphere.weight_exponent;
    let tau_const = std::f64::consts::PI.sqrt() * gamma(m - 0.5)? / gamma(m)?;
    // σ₁ ∈ [−1, 1]; dr = 1−σ₁ is the distance to the right endpoint, where
    // all the singular behavior sits: (1−σ₁²)^{we}·(1−σ₁)·(2(1−σ₁))^{(1−2m)/2}.
    let v = integrate_de_dist(
        |_s1, dl, dr| (dl * dr).powf(we) * dr * (2.0 * dr).powf(0.5 - m),
        -1.0,
        1.0,
        true,
        true,
        spec,
    )?;
    Ok(2.0 * sphere.c_n * tau_const * v)
}

/// h(b) = ∫_ℝ (1−cos(bτ))·G_α(τ) dτ, the symbol whose values at integer
/// multiples of the cylinder radius give the linearized spectrum.
///
/// Exchanging the τ-integral with the sphere average turns each radial slice
/// into ψ(m, b√(2r)) in closed/series form, leaving one endpoint-singular
/// r-integral — far cheaper and more accurate than iterated quadrature of
/// the oscillatory τ-integrand. h(0) = 0 is returned exactly.
pub fn h_of_b(b: f64, params: &ModelParams, spec: &QuadSpec) -> Result<f64> {
    params.validate()?;
    if !(b >= 0.0) || !b.is_finite() {
        return Err(Error::DomainError(format!(
            "h is defined for b >= 0, got {b}"
        )));
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    let m = params.m_exponent();
    if params.n == 2 {
        let i_alpha = one_minus_cos_integral(params.alpha)?;
        return Ok(2.0 * b.powf(1.0 + params.alpha) * i_alpha
            + 2.0 * 2.0_f64.powf(1.0 - 2.0 * m) * psi(m, 2.0 * b)?);
    }
    let sphere = SphereReduction::new(params)?;
    let we = sphere.weight_exponent;
    let v = integrate_de_dist(
        |_r, dl, dr| {
            let c = (2.0 * dl).sqrt();
            match psi(m, b * c) {
                Ok(p) => (dl * dr).powf(we) * c.powf(1.0 - 2.0 * m) * p,
                Err(_) => f64::NAN,
            }
        },
        0.0,
        2.0,
        true,
        true,
        spec,
    )?;
    Ok(2.0 * sphere.c_n * v)
}

/// h′(b) = ∫_ℝ τ·sin(τb)·G_α(τ) dτ > 0 for b > 0, computed like `h_of_b`
/// with the sine moment in place of the cosine deficit.
pub fn h_prime(b: f64, params: &ModelParams, spec: &QuadSpec) -> Result<f64> {
    params.validate()?;
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::DomainError(format!(
            "h' is defined for b > 0, got {b}"
        )));
    }
    let m = params.m_exponent();
    if params.n == 2 {
        let i_alpha = one_minus_cos_integral(params.alpha)?;
        return Ok(2.0 * (1.0 + params.alpha) * b.powf(params.alpha) * i_alpha
            + 2.0 * sine_moment(m, b, 2.0)?);
    }
    let sphere = SphereReduction::new(params)?;
    let we = sphere.weight_exponent;
    let v = integrate_de_dist(
        |_r, dl, dr| {
            let c = (2.0 * dl).sqrt();
            match sine_moment(m, b, c) {
                Ok(s) => (dl * dr).powf(we) * s,
                Err(_) => f64::NAN,
            }
        },
        0.0,
        2.0,
        true,
        true,
        spec,
    )?;
    Ok(2.0 * sphere.c_n * v)
}

/// h′(b) for N = 3 through the Bessel-kernel identity:
/// h′(b) = ∫_0^{2π} V_b(2|sin(θ/2)|) dθ with
/// V_b(ξ) = 4χ·b^{1+α/2}·ξ^{−α/2}·K_{α/2}(bξ), χ = 2^{−1−α/2}√π/Γ((3+α)/2).
///
/// An independent route to the same number as `h_prime` at N = 3; the
/// integrand is even about θ = π, so [0, π] is integrated and doubled, with
/// the ξ^{−α/2} endpoint singularity handled by tanh-sinh in exact distance
/// coordinates.
pub fn h_prime_bessel(b: f64, alpha: f64, spec: &QuadSpec) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainError(format!(
            "fractional order must lie in (0,1), got {alpha}"
        )));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::DomainError(format!(
            "h' is defined for b > 0, got {b}"
        )));
    }
    let chi = 2.0_f64.powf(-1.0 - 0.5 * alpha) * std::f64::consts::PI.sqrt()
        / gamma(0.5 * (3.0 + alpha))?;
    let scale = 4.0 * chi * b.powf(1.0 + 0.5 * alpha);
    let v = integrate_de_dist(
        |_theta, dl, _dr| {
            let xi = 2.0 * (0.5 * dl).sin();
            match bessel_k_any(0.5 * alpha, b * xi) {
                Ok(k) => xi.powf(-0.5 * alpha) * k,
                Err(_) => f64::NAN,
            }
        },
        0.0,
        std::f64::consts::PI,
        true,
        false,
        spec,
    )?;
    Ok(2.0 * scale * v)
}

/// The package of kernel constants attached to one (N, α): the zero-mode
/// constant b_α, the small-ρ limit g₀ of the rescaled kernel, and the
/// large-frequency constant lim h(b)/b^{1+α} = g₀·∫(1−cos τ)|τ|^{−2−α}dτ.
#[derive(Debug, Clone, Copy)]
pub struct KernelConstants {
    pub b_alpha: f64,
    pub g0: f64,
    pub h_limit_const: f64,
}

impl KernelConstants {
    pub fn new(params: &ModelParams, spec: &QuadSpec) -> Result<Self> {
        let b_alpha = b_alpha_const(params, spec)?;
        let g0 = g0_const(params)?;
        let h_limit_const = g0 * one_minus_cos_integral(params.alpha)?;
        Ok(KernelConstants {
            b_alpha,
            g0,
            h_limit_const,
        })
    }
}
