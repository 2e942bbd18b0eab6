//! Tracing the branch of periodic non-constant profiles that bifurcates
//! from the constant cylinder.
//!
//! The unknown at amplitude a is the pair (μ, v): the rescaled profile
//! w = μ + a(cos + v) must satisfy Φ(μ, a(cos+v)) = 0, where
//!
//!   Φ(μ, φ)(s) = μ^{1+α}·{ H(μ+φ)(s) − H(μ) }
//!
//! and H(μ) for the constant is closed-form. The correction v is even,
//! 2π-periodic and orthogonal to cos (its k = 1 coefficient is pinned to
//! zero — a is the amplitude, not an unknown), so the unknown vector is
//! x = (μ, v_0, v_2, …, v_K): K+1 scalars against the K+1 Galerkin
//! projections F_0..F_K of Φ onto cos(j·).
//!
//! Newton's method with a finite-difference Jacobian does the solving. Two
//! shortcuts keep it cheap without touching the converged answer: at the
//! first step from the bifurcation point (guess v = 0) the linearization is
//! diagonal in the cosine basis and its inverse is applied analytically;
//! afterwards the factored FD Jacobian is reused chord-style across
//! iterations and consecutive amplitude steps, with a fresh rebuild forced
//! when convergence drags. Continuation is natural in a (the branch is a
//! graph over the amplitude near the bifurcation — no folds, no arclength).

use crate::error::{Error, Result};
use crate::kernels::{h_prime, ModelParams};
use crate::linearized::{eigenvalue, find_mu_star, transversality};
use crate::nmc;
use crate::profile::Profile;
use crate::quad::QuadSpec;
use crate::workers::Workers;
use serde::{Deserialize, Serialize};

/// Knobs of the Galerkin–Newton continuation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BranchConfig {
    /// Highest retained cosine mode (≥ 8).
    #[serde(rename = "K")]
    pub k: usize,
    /// Collocation points on [0, π] (M+1 nodes, M ≥ 4K against aliasing).
    #[serde(rename = "M")]
    pub m: usize,
    pub a_step: f64,
    pub a_max: f64,
    /// Convergence threshold on the sup-norm of the Galerkin residual.
    pub newton_tol: f64,
    pub newton_max_iters: usize,
    /// Forward-difference step is fd_step·(1+|x_i|) per unknown.
    pub fd_step: f64,
}

impl Default for BranchConfig {
    fn default() -> Self {
        BranchConfig {
            k: 24,
            m: 128,
            a_step: 0.005,
            a_max: 0.06,
            newton_tol: 1e-10,
            newton_max_iters: 12,
            fd_step: 1e-6,
        }
    }
}

impl BranchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k < 8 {
            return Err(Error::InvalidInput(format!(
                "need at least 8 cosine modes, got K = {}",
                self.k
            )));
        }
        if self.m < 4 * self.k {
            return Err(Error::InvalidInput(format!(
                "M = {} collocation intervals under the anti-aliasing margin 4K = {}",
                self.m,
                4 * self.k
            )));
        }
        if !(self.a_step > 0.0) || !(self.a_max > 0.0) {
            return Err(Error::InvalidInput(
                "amplitude step and range must be positive".into(),
            ));
        }
        if !(self.newton_tol > 0.0) || !(self.fd_step > 0.0) {
            return Err(Error::InvalidInput(
                "newton_tol and fd_step must be positive".into(),
            ));
        }
        if self.newton_max_iters == 0 {
            return Err(Error::InvalidInput("newton_max_iters must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// One converged point of the branch.
#[derive(Debug, Clone, Serialize)]
pub struct BranchPoint {
    pub a: f64,
    /// μ(a), the rescaled radius.
    pub mu: f64,
    /// λ(a) = μ(a)/μ*.
    pub lambda: f64,
    /// Coefficients of v_a (k = 1 entry identically zero).
    pub v_coeffs: Vec<f64>,
    pub residual_sup: f64,
    pub newton_iters: usize,
}

impl BranchPoint {
    /// The 2π-periodic collocation profile w = μ + a(cos + v_a), the object
    /// the solver actually works on and the one written to profile files.
    pub fn collocation_profile(&self) -> Result<Profile> {
        let mut w = vec![0.0; self.v_coeffs.len().max(2)];
        for (k, &c) in self.v_coeffs.iter().enumerate() {
            w[k] = self.a * c;
        }
        w[0] += self.mu;
        w[1] += self.a;
        Profile::new(w)
    }
}

/// A traced branch: points ordered by amplitude (negative side reversed,
/// the analytic a = 0 point in the middle).
#[derive(Debug, Clone)]
pub struct BranchTrace {
    pub mu_star: f64,
    pub points: Vec<BranchPoint>,
    /// One entry per direction that was cut short (divergence or loss of
    /// positivity past the first step).
    pub warnings: Vec<String>,
}

/// Φ(μ, φ) at the collocation nodes s_i = iπ/M, i = 0..M.
pub fn phi_residual(
    mu: f64,
    phi: &Profile,
    m: usize,
    params: &ModelParams,
    spec: &QuadSpec,
    workers: &Workers,
) -> Result<Vec<f64>> {
    params.validate()?;
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::DomainError(format!("radius must be positive, got {mu}")));
    }
    if m == 0 {
        return Err(Error::InvalidInput("need at least one collocation interval".into()));
    }
    let mut w_coeffs = phi.coeffs.clone();
    w_coeffs[0] += mu;
    let w = Profile::new(w_coeffs)?;
    w.ensure_positive()?;
    let h_const = nmc::constant_nmc(mu, params, spec)?;
    let pref = mu.powf(1.0 + params.alpha);
    let vals = workers.map(m + 1, |i| -> Result<f64> {
        let s = i as f64 * std::f64::consts::PI / m as f64;
        Ok(pref * (nmc::evaluate(&w, s, params, spec)? - h_const))
    });
    vals.into_iter().collect()
}

/// Projection of samples at s_i = iπ/M onto cos(j·), j = 0..kmax: the Σ″
/// trapezoid form (halved end weights), normalized so that band-limited
/// data returns its own cosine coefficients.
fn dct_project(values: &[f64], kmax: usize) -> Vec<f64> {
    let m = values.len() - 1;
    let mut out = Vec::with_capacity(kmax + 1);
    for j in 0..=kmax {
        let endsign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let mut acc = 0.5 * (values[0] + endsign * values[m]);
        for (i, &v) in values.iter().enumerate().take(m).skip(1) {
            acc += v * ((j * i) as f64 * std::f64::consts::PI / m as f64).cos();
        }
        let norm = if j == 0 { 1.0 } else { 2.0 };
        out.push(norm * acc / m as f64);
    }
    out
}

/// Galerkin residual F_0..F_K of Φ(μ, a(cos + v)).
pub fn galerkin_residual(
    mu: f64,
    v_coeffs: &[f64],
    a: f64,
    config: &BranchConfig,
    params: &ModelParams,
    spec: &QuadSpec,
    workers: &Workers,
) -> Result<Vec<f64>> {
    let mut phi = vec![0.0; config.k + 1];
    for (k, &c) in v_coeffs.iter().enumerate().take(config.k + 1) {
        phi[k] = a * c;
    }
    phi[1] += a;
    let vals = phi_residual(mu, &Profile::new(phi)?, config.m, params, spec, workers)?;
    Ok(dct_project(&vals, config.k))
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Gaussian elimination with partial pivoting; consumes its inputs.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[piv][col].abs() < 1e-300 {
            return Err(Error::DomainError("singular Newton system".into()));
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Unknown vector layout: x[0] = μ, x[1] = v_0, x[j] = v_j for j = 2..K.
fn unpack(x: &[f64], k: usize) -> (f64, Vec<f64>) {
    let mut v = vec![0.0; k + 1];
    v[0] = x[1];
    for (j, vj) in v.iter_mut().enumerate().skip(2) {
        *vj = x[j];
    }
    (x[0], v)
}

fn residual_at(
    x: &[f64],
    a: f64,
    config: &BranchConfig,
    params: &ModelParams,
    spec: &QuadSpec,
    workers: &Workers,
) -> Result<Vec<f64>> {
    let (mu, v) = unpack(x, config.k);
    galerkin_residual(mu, &v, a, config, params, spec, workers)
}

fn fd_jacobian(
    x: &[f64],
    f0: &[f64],
    a: f64,
    config: &BranchConfig,
    params: &ModelParams,
    spec: &QuadSpec,
    workers: &Workers,
) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let mut jac = vec![vec![0.0; n]; n];
    for i in 0..n {
        let step = config.fd_step * (1.0 + x[i].abs());
        let mut xp = x.to_vec();
        xp[i] += step;
        let fp = residual_at(&xp, a, config, params, spec, workers)?;
        for j in 0..n {
            jac[j][i] = (fp[j] - f0[j]) / step;
        }
    }
    Ok(jac)
}

/// Solve one branch point by Newton iteration from `guess` = (μ, v-coeffs).
///
/// `jac` carries a factored-by-proxy Jacobian across calls (chord Newton):
/// pass `None` the first time; the solver fills and reuses it, rebuilding
/// when an inherited matrix stops making progress. The converged result
/// does not depend on the reuse policy — only the residual threshold and
/// the iteration cap decide acceptance.
#[allow(clippy::too_many_arguments)]
pub fn solve_branch_point(
    a: f64,
    guess: (f64, &[f64]),
    mu_star: f64,
    config: &BranchConfig,
    params: &ModelParams,
    spec: &QuadSpec,
    workers: &Workers,
    jac: &mut Option<Vec<Vec<f64>>>,
) -> Result<BranchPoint> {
    config.validate()?;
    params.validate()?;
    if a == 0.0 || !a.is_finite() {
        return Err(Error::InvalidInput(format!(
            "amplitude must be nonzero and finite, got {a} (the trivial point is analytic)"
        )));
    }
    let n = config.k + 1;
    let mut x = vec![0.0; n];
    x[0] = guess.0;
    x[1] = guess.1.first().copied().unwrap_or(0.0);
    for j in 2..n {
        x[j] = guess.1.get(j).copied().unwrap_or(0.0);
    }
    let from_trivial = guess.1.iter().all(|&c| c == 0.0);

    let mut res = residual_at(&x, a, config, params, spec, workers)?;
    let mut sup = sup_norm(&res);
    let mut iters = 0usize;
    let mut rebuilt = false;
    while sup >= config.newton_tol {
        if iters >= config.newton_max_iters {
            return Err(Error::NewtonDivergence {
                a,
                residual: sup,
                iters,
            });
        }
        let dx = if iters == 0 && from_trivial {
            // At v = 0 the linearization is diagonal: mode j responds with
            // a·λ_j(μ), and the j = 1 equation closes through μ with slope
            // a·h′(μ). Exact in the a → 0 limit — ideal for the first step
            // off the bifurcation point.
            let mu = x[0];
            let mut dx = vec![0.0; n];
            dx[0] = -res[1] / (a * h_prime(mu, params, spec)?);
            dx[1] = -res[0] / (a * eigenvalue(0, mu, params, spec)?);
            for (j, d) in dx.iter_mut().enumerate().skip(2) {
                *d = -res[j] / (a * eigenvalue(j as u32, mu, params, spec)?);
            }
            dx
        } else {
            // Force one fresh Jacobian if an inherited chord matrix has not
            // converged us within five corrections.
            if jac.is_none() || (iters >= 5 && !rebuilt) {
                *jac = Some(fd_jacobian(&x, &res, a, config, params, spec, workers)?);
                rebuilt = true;
            }
            let matrix = jac.as_ref().unwrap().clone();
            solve_dense(matrix, res.iter().map(|r| -r).collect())?
        };
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        iters += 1;
        res = residual_at(&x, a, config, params, spec, workers)?;
        sup = sup_norm(&res);
    }

    let (mu, v_coeffs) = unpack(&x, config.k);
    Ok(BranchPoint {
        a,
        mu,
        lambda: mu / mu_star,
        v_coeffs,
        residual_sup: sup,
        newton_iters: iters,
    })
}

/// Physical profile u_a(s) = R + (a/λ)(cos(λs) + v_a(λs)), R = μ(a)/λ(a).
pub fn reconstruct_profile(bp: &BranchPoint, s: f64) -> f64 {
    let t = bp.lambda * s;
    let mut osc = t.cos();
    for (k, &c) in bp.v_coeffs.iter().enumerate() {
        osc += c * (k as f64 * t).cos();
    }
    bp.mu / bp.lambda + (bp.a / bp.lambda) * osc
}

/// Step the amplitude from ±a_step to ±a_max, seeding each solve with the
/// previous point. A direction that diverges or loses positivity after its
/// first step is cut short with a warning; divergence at the very first
/// step is an error (the caller maps it to the continuation exit code).
pub fn trace_branch(
    config: &BranchConfig,
    params: &ModelParams,
    spec: &QuadSpec,
    workers: &Workers,
) -> Result<BranchTrace> {
    config.validate()?;
    params.validate()?;
    let mu_star = find_mu_star(params, spec)?;
    transversality(mu_star, params, spec)?;

    let n = config.k + 1;
    let steps = (config.a_max / config.a_step + 1e-9).floor() as usize;
    let mut sides: Vec<Vec<BranchPoint>> = Vec::new();
    let mut warnings = Vec::new();
    for sign in [1.0f64, -1.0] {
        let mut side = Vec::new();
        let mut guess_mu = mu_star;
        let mut guess_v = vec![0.0; n];
        let mut jac: Option<Vec<Vec<f64>>> = None;
        for i in 1..=steps {
            let a = sign * i as f64 * config.a_step;
            match solve_branch_point(
                a,
                (guess_mu, &guess_v),
                mu_star,
                config,
                params,
                spec,
                workers,
                &mut jac,
            ) {
                Ok(bp) => {
                    guess_mu = bp.mu;
                    guess_v.clone_from(&bp.v_coeffs);
                    side.push(bp);
                }
                Err(e)
                    if matches!(
                        e,
                        Error::NewtonDivergence { .. } | Error::PositivityViolation { .. }
                    ) =>
                {
                    if i == 1 {
                        return Err(e);
                    }
                    warnings.push(format!(
                        "direction sign(a) = {} stopped at step {i} (a = {a:.6}): {e}",
                        if sign > 0.0 { "+" } else { "-" }
                    ));
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        sides.push(side);
    }

    let (pos, neg) = (sides.remove(0), sides.remove(0));
    let mut points: Vec<BranchPoint> = neg.into_iter().rev().collect();
    points.push(BranchPoint {
        a: 0.0,
        mu: mu_star,
        lambda: 1.0,
        v_coeffs: vec![0.0; n],
        residual_sup: 0.0,
        newton_iters: 0,
    });
    points.extend(pos);
    Ok(BranchTrace {
        mu_star,
        points,
        warnings,
    })
}
