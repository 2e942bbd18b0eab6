//! Fractional mean curvature of periodic cylindrical graphs.
//!
//! For a positive, even, 2π-periodic radius profile u the surface
//! {(x, x′) : |x′| = u(x)} ⊂ ℝ^N has a fractional mean curvature H_α(u)(s)
//! given by a singular integral over the axis variable and the (N−2)-sphere.
//! Three independent evaluators are provided:
//!
//! * [`evaluate`] — the production path. The sphere integral is reduced to a
//!   chord-length variable p ∈ [0, 2] (outer integral, double-exponential
//!   nodes) and the axis integral (inner, in the original axis variable τ) is
//!   split into a Taylor-series core around the singularity, a fixed
//!   Gauss–Kronrod mid grid shared by all p nodes, and a closed lattice-sum
//!   treatment of the periodic far field. For N = 2 the sphere degenerates to
//!   two points and the p-integral collapses to p ∈ {0, 2}.
//! * [`evaluate_direct`] — same double integral in the opposite order (axis
//!   outer, sphere angle inner). Slower, structurally independent; used as
//!   an oracle.
//! * [`evaluate_shell`] — the profile-shell form built from the radial
//!   integral [`i_qp`]; coarser (three-digit) cross-check.
//!
//! All evaluators agree with the closed cylinder law H(κ) = κ^{−α} b_α / α.

use crate::error::{Error, Result};
use crate::kernels::{b_alpha_const, ModelParams, SphereReduction};
use crate::profile::Profile;
use crate::quad::{gk15_points, integrate_adaptive, integrate_de_dist, QuadSpec};
use crate::special::gamma;

use std::f64::consts::PI;

/// Half-width of the series window around the axis singularity. Inside it
/// the integrand's cancellations (u(s)−u(s−τ) ~ τ²) are evaluated from the
/// Taylor coefficients of u at s instead of by subtraction.
const TAYLOR_RANGE: f64 = 0.01;
/// Series order; (k·τ)^j/j! with k·τ ≤ 2 leaves the remainder below 1e−19.
const TAYLOR_ORDER: usize = 26;

/// B_{2r}/(2r)! for r = 1..7 — the Euler–Maclaurin correction coefficients.
const EM_COEF: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
];

// ---------------------------------------------------------------------------
// Pointwise chord-variable forms
// ---------------------------------------------------------------------------

/// Difference quotient Λ₀ = (u(s) − u(s−pt)) / (pt), continued by u′(s) when
/// |pt| is below the precision floor of the quotient.
pub fn lambda0(profile: &Profile, s: f64, t: f64, p: f64) -> f64 {
    let pt = p * t;
    if pt.abs() < 1e-8 {
        profile.eval_du(s)
    } else {
        (profile.eval_u(s) - profile.eval_u(s - pt)) / pt
    }
}

/// Λ = Λ₀ − u′(s − pt).
pub fn lambda_full(profile: &Profile, s: f64, t: f64, p: f64) -> f64 {
    lambda0(profile, s, t, p) - profile.eval_du(s - p * t)
}

/// Chord-variable kernel (t² + t²Λ₀² + u(s)·u(s−pt))^{−(N+α)/2}. Multiplied
/// by p^{−(N+α)} this is the axis-variable kernel at τ = pt.
pub fn kernel_k_alpha(profile: &Profile, s: f64, t: f64, p: f64, params: &ModelParams) -> f64 {
    let l0 = lambda0(profile, s, t, p);
    let m = params.m_exponent();
    (t * t * (1.0 + l0 * l0) + profile.eval_u(s) * profile.eval_u(s - p * t)).powf(-m)
}

// ---------------------------------------------------------------------------
// Lattice sums for the periodic far field
// ---------------------------------------------------------------------------

/// The pair of lattice-sum families
///   sa[i] = Σ_{j≥0} (z + P·j)^{−(2m+2i)},
///   sb[i] = Σ_{j≥0} (z + P·j)^{−(2m−1+2i)},   i = 0..=imax,
/// computed by a direct head (until the summand index is far past the largest
/// exponent) plus an Euler–Maclaurin tail. `m2` is 2m.
pub(crate) fn lattice_pair(m2: f64, imax: usize, z: f64, period: f64) -> (Vec<f64>, Vec<f64>) {
    let kmax = m2 + 2.0 * imax as f64;
    let head = (((6.0 * kmax - z) / period).ceil()).max(0.0) as usize;

    let mut sa = vec![0.0; imax + 1];
    let mut sb = vec![0.0; imax + 1];
    for j in 0..head {
        let zj = z + period * j as f64;
        let pb = zj.powf(1.0 - m2); // zj^{−(2m−1)}
        let pa = pb / zj;
        let r2 = 1.0 / (zj * zj);
        let mut fb = pb;
        let mut fa = pa;
        for i in 0..=imax {
            sb[i] += fb;
            sa[i] += fa;
            fb *= r2;
            fa *= r2;
        }
    }

    // Euler–Maclaurin from zp = z + P·head:
    //   Σ_{j≥0}(zp+Pj)^{−k} = zp^{1−k}/(P(k−1)) + zp^{−k}/2
    //                        + Σ_r B_{2r}/(2r)!·P^{2r−1}·(k)_{2r−1}·zp^{−k−2r+1}
    let zp = z + period * head as f64;
    let pb0 = zp.powf(1.0 - m2);
    let r2 = 1.0 / (zp * zp);
    let mut fb = pb0;
    for i in 0..=imax {
        let kb = m2 - 1.0 + 2.0 * i as f64;
        let fa = fb / zp;
        sb[i] += em_sum(kb, fb, zp, period);
        sa[i] += em_sum(kb + 1.0, fa, zp, period);
        fb *= r2;
    }
    (sa, sb)
}

/// Euler–Maclaurin value of Σ_{j≥0}(zp + P·j)^{−k}, given zk = zp^{−k}.
fn em_sum(k: f64, zk: f64, zp: f64, period: f64) -> f64 {
    let mut acc = zk * zp / (period * (k - 1.0)) + 0.5 * zk;
    let mut poch = k; // (k)_{2r−1}
    let mut zfac = zk / zp; // zp^{−k−2r+1}
    let mut pfac = period; // P^{2r−1}
    let p2 = period * period;
    let zr2 = 1.0 / (zp * zp);
    for (r, c) in EM_COEF.iter().enumerate() {
        let term = c * pfac * poch * zfac;
        acc += term;
        if term.abs() < 1e-16 * acc.abs() {
            break;
        }
        let rf = 2.0 * r as f64;
        poch *= (k + rf + 1.0) * (k + rf + 2.0);
        zfac *= zr2;
        pfac *= p2;
    }
    acc
}

fn pascal_triangle(n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1.0;
        for l in 1..=i {
            c[i][l] = c[i - 1][l - 1] + if l < i { c[i - 1][l] } else { 0.0 };
        }
    }
    c
}

// ---------------------------------------------------------------------------
// Sphere-angle integral shared by the oracle forms
// ---------------------------------------------------------------------------

/// ∫_0^π (sin θ)^{N−3} (b0 + b1 sin²(θ/2)) (c2 + 4·uf·sin²(θ/2))^{−m} dθ.
///
/// When c2 ≪ uf the kernel peaks at θ ≈ 0 on the scale √(c2/uf); the
/// double-exponential nodes of the flagged-left integral resolve that peak
/// without an explicit rescaling.
fn theta_integral(
    nm3: i32,
    m: f64,
    c2: f64,
    uf: f64,
    b0: f64,
    b1: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    let f = |th: f64| {
        let sh = (0.5 * th).sin();
        let s2 = sh * sh;
        th.sin().powi(nm3) * (b0 + b1 * s2) * (c2 + 4.0 * uf * s2).powf(-m)
    };
    if c2 >= 0.01 * uf {
        integrate_adaptive(f, 0.0, PI, spec)
    } else {
        integrate_de_dist(|_, dl, _| f(dl), 0.0, PI, true, false, spec)
    }
}

// ---------------------------------------------------------------------------
// The production engine
// ---------------------------------------------------------------------------

/// Precomputed per-(profile, point) data shared by every p node: Taylor
/// coefficients at s, the fixed mid-range axis grid, and the far-field tail
/// as a polynomial in p².
struct Engine<'a> {
    prof: &'a Profile,
    spec: QuadSpec,  // inner (tightened) tolerance
    omega: f64,      // u(x) = Σ c_k cos(k·ω·x); period 2π/ω
    period: f64,
    s: f64,
    us: f64,
    m: f64,
    nm2: i32,
    /// u(s−τ) = Σ_j tay[j]·τ^j.
    tay: [f64; TAYLOR_ORDER + 1],
    taylor_range: f64,
    r2: Vec<R2Node>,
    tail_c: Vec<f64>,
    t_split: f64,
    p_floor: f64,
}

struct R2Node {
    w: f64,
    tau2: f64,
    apart: f64, // A(τ) = u(s) − u(x) − τ·u′(x)
    a2: f64,    // (u(s) − u(x))²
    un2: f64,   // u(x)^{N−2}
    prod: f64,  // u(s)·u(x)
}

impl<'a> Engine<'a> {
    fn u_at(&self, x: f64) -> f64 {
        self.prof.eval_u(self.omega * x)
    }
    fn du_at(&self, x: f64) -> f64 {
        self.omega * self.prof.eval_du(self.omega * x)
    }

    fn new(
        prof: &'a Profile,
        omega: f64,
        s: f64,
        par: &ModelParams,
        spec: &QuadSpec,
    ) -> Result<Engine<'a>> {
        par.validate()?;
        spec.validate()?;
        prof.ensure_positive()?;
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidInput("frequency scale must be positive".into()));
        }
        let n = par.n;
        let nf = n as f64;
        let m = par.m_exponent();
        let period = 2.0 * PI / omega;

        let us = prof.eval_u(omega * s);
        let (umin, _) = prof.grid_min();
        let umax = prof.grid_max();

        // Taylor coefficients of τ ↦ u(s−τ).
        let mut tay = [0.0; TAYLOR_ORDER + 1];
        let mut fact = 1.0;
        let mut sign = 1.0;
        let mut wpow = 1.0;
        for (j, t) in tay.iter_mut().enumerate() {
            if j > 0 {
                fact *= j as f64;
                sign = -sign;
                wpow *= omega;
            }
            *t = sign * wpow * prof.deriv(omega * s, j as u32) / fact;
        }

        let k_eff = prof.effective_degree(1e-9) as f64;
        let freq = (k_eff * omega).max(1.0);
        let taylor_range = TAYLOR_RANGE.min(2.0 / freq);

        // Worst kernel offset D = (u(s)−u(x))² + p²·u(s)·u(x) over p ≤ 2.
        let drange = (us - umin).max(umax - us);
        let dmax = drange * drange + 4.0 * us * umax;
        let tmult = ((10.0 * dmax).sqrt() / period).ceil().max(2.0);
        let t_split = period * tmult;
        let ratio = dmax / (t_split * t_split);
        let imax = ((14.0 / -ratio.log10()).ceil() as usize).clamp(8, 18);

        let p_floor = 10.0_f64.powf(-280.0 / (nf + par.alpha));

        let mut eng = Engine {
            prof,
            spec: spec.scaled_tol(0.01),
            omega,
            period,
            s,
            us,
            m,
            nm2: (n - 2) as i32,
            tay,
            taylor_range,
            r2: Vec::new(),
            tail_c: vec![0.0; imax + 2],
            t_split,
            p_floor,
        };
        eng.build_mid_grid(freq);
        eng.build_tail(imax, freq);
        Ok(eng)
    }

    /// Fixed composite Gauss–Kronrod grid on taylor_range ≤ |τ| ≤ t_split:
    /// square-root-of-two geometric panels through the power-law zone, then
    /// uniform panels sized to the profile's bandwidth.
    fn build_mid_grid(&mut self, freq: f64) {
        let geo_end = 0.64_f64.min(self.t_split);
        let wu = 0.45_f64.min(6.0 / freq);
        let mut panels = Vec::new();
        let mut x = self.taylor_range;
        while x < geo_end {
            let x2 = (x * std::f64::consts::SQRT_2).min(geo_end);
            panels.push((x, x2));
            x = x2;
        }
        if geo_end < self.t_split {
            let count = ((self.t_split - geo_end) / wu).ceil().max(1.0);
            let w = (self.t_split - geo_end) / count;
            for i in 0..count as usize {
                panels.push((geo_end + w * i as f64, geo_end + w * (i + 1) as f64));
            }
        }
        for sign in [1.0, -1.0] {
            for &(a, b) in &panels {
                for (x, w) in gk15_points(a, b) {
                    let tau = sign * x;
                    let ux = self.u_at(self.s - tau);
                    let dux = self.du_at(self.s - tau);
                    let a1 = self.us - ux;
                    self.r2.push(R2Node {
                        w,
                        tau2: tau * tau,
                        apart: a1 - tau * dux,
                        a2: a1 * a1,
                        un2: ux.powi(self.nm2),
                        prod: self.us * ux,
                    });
                }
            }
        }
    }

    /// The |τ| ≥ t_split far field. Expanding (τ² + D)^{−m} in D/τ² and
    /// summing the period lattice exactly leaves one smooth integral over a
    /// single period in y = |τ| − t_split mod P; because D is a polynomial in
    /// p², so is the whole tail, and its coefficients are integrated once.
    fn build_tail(&mut self, imax: usize, freq: f64) {
        let pas = pascal_triangle(imax);
        let ny = ((self.period * freq / 6.0).ceil() as usize + 1).max(8);
        let wy = self.period / ny as f64;
        let m2 = 2.0 * self.m;
        for panel in 0..ny {
            let a = wy * panel as f64;
            for (y, w) in gk15_points(a, a + wy) {
                let (sa, sb) = lattice_pair(m2, imax, self.t_split + y, self.period);
                // x ≡ s−y (τ > 0 side) and x ≡ s+y (τ < 0 side).
                let um = self.u_at(self.s - y);
                let dum = self.du_at(self.s - y);
                let up = self.u_at(self.s + y);
                let dup = self.du_at(self.s + y);
                let (p1m, p1p) = (self.us - um, self.us - up);
                let (un2m, un2p) = (um.powi(self.nm2), up.powi(self.nm2));
                let (em, ep) = (self.us * um, self.us * up);
                let (qm, qp) = (p1m * p1m, p1p * p1p);

                let mut qm_pow = vec![1.0; imax + 1];
                let mut qp_pow = vec![1.0; imax + 1];
                let mut em_pow = vec![1.0; imax + 1];
                let mut ep_pow = vec![1.0; imax + 1];
                for i in 1..=imax {
                    qm_pow[i] = qm_pow[i - 1] * qm;
                    qp_pow[i] = qp_pow[i - 1] * qp;
                    em_pow[i] = em_pow[i - 1] * em;
                    ep_pow[i] = ep_pow[i - 1] * ep;
                }

                let mut wbin = 1.0; // binomial(−m, i)
                for i in 0..=imax {
                    for l in 0..=i {
                        let c = w * wbin * pas[i][l];
                        let bm = c * qm_pow[i - l] * em_pow[l] * un2m;
                        let bp = c * qp_pow[i - l] * ep_pow[l] * un2p;
                        self.tail_c[l] +=
                            (bm * p1m + bp * p1p) * sa[i] + (bp * dup - bm * dum) * sb[i];
                        self.tail_c[l + 1] -= 0.5 * self.us * (bm + bp) * sa[i];
                    }
                    wbin *= (-self.m - i as f64) / (i as f64 + 1.0);
                }
            }
        }
    }

    /// Integrand of the series core: bracket · u(x)^{N−2} · kernel, all four
    /// cancellation-prone quantities evaluated from the Taylor coefficients.
    fn core_integrand(&self, tau: f64, p2: f64) -> f64 {
        // rest = u(s−τ) − u(s); abig = A(τ) = Σ_{j≥2}(j−1)·tay[j]·τ^j.
        let mut rest = 0.0;
        let mut abig = 0.0;
        for j in (2..=TAYLOR_ORDER).rev() {
            rest = (rest + self.tay[j]) * tau;
            abig = (abig + (j as f64 - 1.0) * self.tay[j]) * tau;
        }
        rest = (rest + self.tay[1]) * tau;
        abig *= tau;
        let ux = self.us + rest;
        let bottom = tau * tau + rest * rest + p2 * self.us * ux;
        (abig - 0.5 * self.us * p2) * ux.powi(self.nm2) * bottom.powf(-self.m)
    }

    /// |τ| ≤ taylor_range, one sign of τ. The integrand peaks at the scale
    /// w = p·u(s) around the origin. Below w ≈ 1e−6 the node spacing can no
    /// longer track the peak to full tolerance, and the best estimate is
    /// accepted: the outer chord weight scales the whole core contribution by
    /// p^{N−2}, so those values enter with negligible weight. (p = 0 — the
    /// two-point sphere — has an integrable τ^{−α} singularity instead and
    /// must converge outright.)
    fn core_side(&self, sign: f64, p: f64) -> Result<f64> {
        let p2 = p * p;
        let r = integrate_de_dist(
            |_, dl, _| self.core_integrand(sign * dl, p2),
            0.0,
            self.taylor_range,
            true,
            false,
            &self.spec,
        );
        match r {
            Err(Error::NonConvergence { estimate, .. }) if p > 0.0 && p * self.us <= 1e-6 => {
                Ok(estimate)
            }
            other => other,
        }
    }

    fn core(&self, p: f64) -> Result<f64> {
        Ok(self.core_side(1.0, p)? + self.core_side(-1.0, p)?)
    }

    /// Full inner axis integral at chord variable p.
    fn inner(&self, p: f64) -> Result<f64> {
        let p2 = p * p;
        let mut acc = self.core(p)?;
        for nd in &self.r2 {
            acc += nd.w
                * (nd.apart - 0.5 * self.us * p2)
                * nd.un2
                * (nd.tau2 + nd.a2 + p2 * nd.prod).powf(-self.m);
        }
        let mut tail = 0.0;
        for &c in self.tail_c.iter().rev() {
            tail = tail * p2 + c;
        }
        Ok(acc + tail)
    }
}

// ---------------------------------------------------------------------------
// Public evaluators
// ---------------------------------------------------------------------------

/// Fractional mean curvature H_α(u)(s) — production path.
pub fn evaluate(profile: &Profile, s: f64, params: &ModelParams, spec: &QuadSpec) -> Result<f64> {
    evaluate_scaled(profile, 1.0, s, params, spec)
}

/// Same, for the dilated profile ū(x) = Σ c_k cos(k·ω·x) of period 2π/ω.
/// The public profiles are always 2π-periodic (ω = 1); the free frequency
/// exists to express dilation covariance exactly.
pub(crate) fn evaluate_scaled(
    profile: &Profile,
    omega: f64,
    s: f64,
    params: &ModelParams,
    spec: &QuadSpec,
) -> Result<f64> {
    let eng = Engine::new(profile, omega, s, params, spec)?;
    let alpha = params.alpha;
    if params.n == 2 {
        // Two-point sphere: the chord variable takes the values 0 and 2.
        let i0 = eng.inner(0.0)?;
        let i2 = eng.inner(2.0)?;
        return Ok(-(2.0 / alpha) * (i0 + i2));
    }
    let sph = SphereReduction::new(params)?;
    let we = sph.weight_exponent;
    let nm3 = (params.n - 3) as i32;
    let mut inner_err = None;
    let v = integrate_de_dist(
        |p, dl, dr| {
            if dl < eng.p_floor {
                return 0.0;
            }
            let wfac = (dr * (2.0 + p)).powf(we) * dl.powi(nm3);
            match eng.inner(dl) {
                Ok(i) => wfac * i,
                Err(e) => {
                    inner_err = Some(e);
                    f64::NAN
                }
            }
        },
        0.0,
        2.0,
        true,
        true,
        spec,
    );
    let v = match (v, inner_err) {
        (_, Some(e)) => return Err(e),
        (Ok(v), None) => v,
        (Err(e), None) => return Err(e),
    };
    let nf = params.n as i32;
    Ok(-(2.0 / alpha) * sph.c_n * 2.0_f64.powi(4 - nf) * v)
}

/// H_α(u)(s) with the integrals in the opposite order: axis variable outside,
/// sphere angle inside. Independent of the production path's grid sharing and
/// p-polynomial tail; used as a cross-validation oracle. N ≥ 3.
pub fn evaluate_direct(
    profile: &Profile,
    s: f64,
    params: &ModelParams,
    spec: &QuadSpec,
) -> Result<f64> {
    let sph = SphereReduction::new(params)?;
    let eng = Engine::new(profile, 1.0, s, params, spec)?;
    let nm3 = (params.n - 3) as i32;
    let ispec = spec.scaled_tol(0.1);

    // Sphere-angle integral at one signed τ.
    let g_tau = |tau: f64| -> Result<f64> {
        let (ux, a1, abig) = if tau.abs() < eng.taylor_range {
            let mut rest = 0.0;
            let mut abig = 0.0;
            for j in (2..=TAYLOR_ORDER).rev() {
                rest = (rest + eng.tay[j]) * tau;
                abig = (abig + (j as f64 - 1.0) * eng.tay[j]) * tau;
            }
            rest = (rest + eng.tay[1]) * tau;
            (eng.us + rest, -rest, abig * tau)
        } else {
            let ux = eng.u_at(s - tau);
            let dux = eng.du_at(s - tau);
            (ux, eng.us - ux, eng.us - ux - tau * dux)
        };
        let c2 = tau * tau + a1 * a1;
        let th = theta_integral(nm3, eng.m, c2, eng.us * ux, abig, -2.0 * eng.us, &ispec)?;
        Ok(sph.c_n * ux.powi(eng.nm2) * th)
    };

    let g_err: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let fold = |t: f64| match (g_tau(t), g_tau(-t)) {
        (Ok(a), Ok(b)) => a + b,
        (Err(e), _) | (_, Err(e)) => {
            *g_err.borrow_mut() = Some(e);
            f64::NAN
        }
    };

    // Below this τ the combined integrand is C·τ^{−α} with mass ≲ 1e−8 of
    // the total; skipping it avoids driving the angle kernel toward overflow.
    let tau_floor = 1e-26;
    let period = eng.period;
    // The head tolerance sits above the angle integrals' own noise floor.
    let head = integrate_de_dist(
        |_, dl, _| if dl < tau_floor { 0.0 } else { fold(dl) },
        0.0,
        period,
        true,
        false,
        &spec.scaled_tol(10.0),
    );
    if let Some(e) = g_err.borrow_mut().take() {
        return Err(e);
    }
    let mut total = head?;
    let cells = (eng.t_split / period).round() as usize;
    for j in 1..cells {
        let cell = integrate_adaptive(
            &fold,
            period * j as f64,
            period * (j + 1) as f64,
            &spec.scaled_tol(10.0),
        );
        if let Some(e) = g_err.borrow_mut().take() {
            return Err(e);
        }
        total += cell?;
    }
    total += direct_tail(&eng, &sph, nm3)?;
    Ok(-(2.0 / params.alpha) * total)
}

/// Far field of the axis-outer form: same lattice-sum identity as the
/// production tail, but the kernel offset D depends on the sphere angle, so
/// the angle quadrature stays explicit under the period integral.
fn direct_tail(eng: &Engine, sph: &SphereReduction, nm3: i32) -> Result<f64> {
    let imax = eng.tail_c.len() - 2;
    let k_eff = eng.prof.effective_degree(1e-9) as f64;
    let ny = ((eng.period * k_eff.max(1.0) / 6.0).ceil() as usize + 1).max(8);
    let wy = eng.period / ny as f64;
    let m2 = 2.0 * eng.m;

    // Fixed angle rule: the angle dependence is low-order (through 2 sin²(θ/2)).
    let mut theta_nodes = Vec::with_capacity(60);
    for panel in 0..4 {
        let a = PI * panel as f64 / 4.0;
        for (th, w) in gk15_points(a, a + PI / 4.0) {
            let sh = (0.5 * th).sin();
            theta_nodes.push((2.0 * sh * sh, w * th.sin().powi(nm3)));
        }
    }

    let mut acc = 0.0;
    for panel in 0..ny {
        let a = wy * panel as f64;
        for (y, w) in gk15_points(a, a + wy) {
            let (sa, sb) = lattice_pair(m2, imax, eng.t_split + y, eng.period);
            let um = eng.u_at(eng.s - y);
            let dum = eng.du_at(eng.s - y);
            let up = eng.u_at(eng.s + y);
            let dup = eng.du_at(eng.s + y);
            let (p1m, p1p) = (eng.us - um, eng.us - up);
            let (un2m, un2p) = (um.powi(eng.nm2), up.powi(eng.nm2));
            let mut ysum = 0.0;
            for &(r, wt) in &theta_nodes {
                let dm = p1m * p1m + 2.0 * eng.us * um * r;
                let dp = p1p * p1p + 2.0 * eng.us * up * r;
                let mut dm_pow = 1.0;
                let mut dp_pow = 1.0;
                let mut wbin = 1.0;
                let mut tsum = 0.0;
                for i in 0..=imax {
                    tsum += wbin
                        * (dm_pow * un2m * ((p1m - eng.us * r) * sa[i] - dum * sb[i])
                            + dp_pow * un2p * ((p1p - eng.us * r) * sa[i] + dup * sb[i]));
                    dm_pow *= dm;
                    dp_pow *= dp;
                    wbin *= (-eng.m - i as f64) / (i as f64 + 1.0);
                }
                ysum += wt * tsum;
            }
            acc += w * ysum;
        }
    }
    Ok(sph.c_n * acc)
}

/// The radial double integral I(q, p) = ∫_q^∞ ∫_sphere τ^{N−2}
/// (p² + 1 + τ² − 2σ₁τ)^{−(N+α)/2} dσ dτ, N ≥ 3. Finite for q > 1 or p ≠ 0;
/// at q ≤ 1, p = 0 the inner integral's singularity at τ = 1 is not
/// integrable and a domain error is returned.
pub fn i_qp(q: f64, p: f64, params: &ModelParams, spec: &QuadSpec) -> Result<f64> {
    params.validate()?;
    let sph = SphereReduction::new(params)?;
    if !(q >= 0.0) {
        return Err(Error::InvalidInput("q must be nonnegative".into()));
    }
    if q <= 1.0 && p.abs() < 1e-12 {
        return Err(Error::DomainError(
            "radial integral diverges at the sphere-touching point (q <= 1, p = 0)".into(),
        ));
    }
    let m = params.m_exponent();
    let nm2 = (params.n - 2) as i32;
    let nm3 = (params.n - 3) as i32;
    let ispec = spec.scaled_tol(0.1);
    let p2 = p * p;

    let mut th_err = None;
    let mut kern = |tau: f64, c2: f64| match theta_integral(nm3, m, c2, tau, 1.0, 0.0, &ispec) {
        Ok(v) => tau.powi(nm2) * v,
        Err(e) => {
            th_err = Some(e);
            f64::NAN
        }
    };

    let t_far = 60.0_f64.max(8.0 * (1.0 + p.abs()));
    let mut total = 0.0;
    if q < 1.0 {
        total += integrate_de_dist(
            |tau, _, dr| kern(tau, p2 + dr * dr),
            q,
            1.0,
            false,
            true,
            spec,
        )?;
        total += integrate_de_dist(
            |_, dl, _| kern(1.0 + dl, p2 + dl * dl),
            1.0,
            t_far,
            true,
            false,
            spec,
        )?;
    } else {
        let q1 = q - 1.0;
        total += integrate_de_dist(
            |_, dl, _| {
                let d = q1 + dl;
                kern(q + dl, p2 + d * d)
            },
            q,
            t_far,
            true,
            false,
            spec,
        )?;
    }
    if let Some(e) = th_err {
        return Err(e);
    }

    // Two-term analytic tail beyond t_far.
    let nf = params.n as f64;
    let w0 = PI.sqrt() * gamma(0.5 * (nf - 2.0))? / gamma(0.5 * (nf - 1.0))?;
    let alpha = params.alpha;
    let c2nd = m * (2.0 * (m + 1.0) / (nf - 1.0) - (p2 + 1.0));
    let tail = w0
        * (t_far.powf(-1.0 - alpha) / (1.0 + alpha)
            + c2nd * t_far.powf(-3.0 - alpha) / (3.0 + alpha));
    Ok(sph.c_n * (total + tail))
}

/// H_α(u)(s) assembled from the radial integral: the shell form. The two
/// radial integrals are combined before the axis integration — separately
/// each diverges at the origin — and the far field uses their common
/// |p|^{−1−α} law. Coarse (three-digit) oracle, N ≥ 3.
pub fn evaluate_shell(
    profile: &Profile,
    s: f64,
    params: &ModelParams,
    spec: &QuadSpec,
) -> Result<f64> {
    params.validate()?;
    profile.ensure_positive()?;
    if params.n < 3 {
        return Err(Error::DomainError("the shell form requires N >= 3".into()));
    }
    let us = profile.eval_u(s);
    let alpha = params.alpha;
    let ispec = spec.scaled_tol(100.0);

    let iq_err: std::cell::RefCell<Option<Error>> = std::cell::RefCell::new(None);
    let f_shift = |d: f64| {
        // Combined shell integrand at s̄ = s ± d, summed over both signs.
        let mut acc = 0.0;
        for sb in [s - d, s + d] {
            let pbar = (s - sb) / us;
            if pbar.abs() < 1e-20 {
                continue;
            }
            let q = profile.eval_u(sb) / us;
            match (i_qp(q, pbar, params, &ispec), i_qp(0.0, pbar, params, &ispec)) {
                (Ok(a), Ok(b)) => acc += 2.0 * a - b,
                (Err(e), _) | (_, Err(e)) => {
                    *iq_err.borrow_mut() = Some(e);
                    return f64::NAN;
                }
            }
        }
        acc
    };

    // The two radial integrals each blow up like d^{−1−α} as d → 0 while
    // their combination stays at C·d^{−α} + B, so below d_min the subtraction
    // drowns in the integrals' own quadrature error. Integrate [d_min, 2π]
    // directly and complete [0, d_min] from a two-point fit of that local
    // model — a per-mille-level correction for a per-mille-grade evaluator.
    let d_min = 1e-4;
    let period = 2.0 * PI;
    let head = integrate_adaptive(&f_shift, d_min, period, &spec.scaled_tol(1e5));
    if let Some(e) = iq_err.borrow_mut().take() {
        return Err(e);
    }
    let mut total = head?;
    let (f1, f2) = (f_shift(d_min), f_shift(8.0 * d_min));
    if let Some(e) = iq_err.borrow_mut().take() {
        return Err(e);
    }
    let (w1, w2) = (d_min.powf(-alpha), (8.0 * d_min).powf(-alpha));
    let c_fit = (f1 - f2) / (w1 - w2);
    let b_fit = f1 - c_fit * w1;
    total += c_fit * d_min.powf(1.0 - alpha) / (1.0 - alpha) + b_fit * d_min;

    let cells = 16usize;
    for j in 1..cells {
        let cell = integrate_adaptive(
            &f_shift,
            period * j as f64,
            period * (j + 1) as f64,
            &spec.scaled_tol(10.0),
        );
        if let Some(e) = iq_err.borrow_mut().take() {
            return Err(e);
        }
        total += cell?;
    }

    let nf = params.n as f64;
    let sphere_full = 2.0 * PI.powf(0.5 * (nf - 1.0)) / gamma(0.5 * (nf - 1.0))?;
    let k_m = gamma(0.5 * (nf - 1.0))? * gamma(0.5 * (1.0 + alpha))?
        / (2.0 * gamma(params.m_exponent())?);
    let r_far = period * cells as f64;
    let tail = 2.0 * sphere_full * k_m * r_far.powf(-alpha) / alpha;
    Ok(us.powf(-1.0 - alpha) * total + tail)
}

/// Closed cylinder law H(κ) = κ^{−α} b_α / α.
pub fn constant_nmc(kappa: f64, params: &ModelParams, spec: &QuadSpec) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidInput("radius must be positive".into()));
    }
    Ok(b_alpha_const(params, spec)? * kappa.powf(-params.alpha) / params.alpha)
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadSpec {
        QuadSpec::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn lambda0_recovers_derivative_at_tiny_chord() {
        let prof = Profile::new(vec![1.0, 0.1]).unwrap();
        let exact = prof.eval_du(0.7);
        assert_eq!(lambda0(&prof, 0.7, 1e-6, 1e-6), exact);
        let l = lambda0(&prof, 0.7, 0.5, 0.3);
        assert!((l - exact).abs() < 0.02);
    }

    #[test]
    fn chord_kernel_matches_axis_variables() {
        let prof = Profile::new(vec![1.0, 0.1]).unwrap();
        let par = ModelParams::new(3, 0.5).unwrap();
        let (s, t, p) = (0.4, 0.9, 0.7);
        let m = par.m_exponent();
        let tau = p * t;
        let a = prof.eval_u(s) - prof.eval_u(s - tau);
        let axis = (tau * tau + a * a + p * p * prof.eval_u(s) * prof.eval_u(s - tau)).powf(-m);
        let chord = p.powf(-2.0 * m) * kernel_k_alpha(&prof, s, t, p, &par);
        assert!(rel(axis, chord) < 1e-13);
    }

    #[test]
    fn constant_cylinder_matches_closed_form() {
        for &(n, alpha, kappa) in &[(2, 0.5, 1.0), (3, 0.5, 1.0), (3, 0.5, 2.0), (4, 0.3, 1.0)] {
            let par = ModelParams::new(n, alpha).unwrap();
            let prof = Profile::constant(kappa).unwrap();
            let h = evaluate(&prof, 0.3, &par, &spec()).unwrap();
            let closed = constant_nmc(kappa, &par, &spec()).unwrap();
            assert!(
                rel(h, closed) < 1e-7,
                "N={n} alpha={alpha} kappa={kappa}: {h} vs {closed}"
            );
        }
    }

    #[test]
    fn constant_identity_across_parameter_grid() {
        for n in [2u32, 3, 4, 5] {
            for &alpha in &[0.25, 0.5, 0.75] {
                let par = ModelParams::new(n, alpha).unwrap();
                let prof = Profile::constant(1.0).unwrap();
                let h = evaluate(&prof, 0.0, &par, &spec()).unwrap();
                let b = b_alpha_const(&par, &spec()).unwrap();
                assert!(
                    rel(alpha * h, b) < 1e-6,
                    "N={n} alpha={alpha}: {} vs {b}",
                    alpha * h
                );
            }
        }
    }

    #[test]
    fn reference_profile_values() {
        // Values frozen from an independent high-precision implementation.
        let cases: [(u32, f64, &[f64], f64, f64); 9] = [
            (3, 0.5, &[1.0, 0.05], 0.0, 25.877406407100912906),
            (3, 0.5, &[1.0, 0.05], 0.7, 25.881109863762961915),
            (3, 0.5, &[1.0, 0.05, 0.02], 0.3, 26.225520114091785195),
            (4, 0.3, &[1.0, 0.05], 0.7, 71.898893584729941506),
            (2, 0.5, &[1.0, 0.05], 0.0, 7.013216556690535319),
            (2, 0.5, &[1.0, 0.05], 0.7, 6.9572566474566756942),
            (2, 0.5, &[1.0, 0.05, 0.02], 0.3, 7.2869639897570597266),
            (5, 0.7, &[1.0, 0.05], 0.7, 81.097315577906801376),
            (3, 0.25, &[1.0, 0.05], 0.7, 48.238936156105791782),
        ];
        for (n, alpha, coeffs, s, want) in cases {
            let par = ModelParams::new(n, alpha).unwrap();
            let prof = Profile::new(coeffs.to_vec()).unwrap();
            let h = evaluate(&prof, s, &par, &spec()).unwrap();
            assert!(
                rel(h, want) < 1e-8,
                "N={n} alpha={alpha} s={s}: got {h}, want {want} (rel {:.2e})",
                rel(h, want)
            );
        }
    }

    #[test]
    fn evenness_and_periodicity() {
        let par = ModelParams::new(3, 0.5).unwrap();
        let prof = Profile::new(vec![1.0, 0.05, 0.02]).unwrap();
        let h1 = evaluate(&prof, 0.7, &par, &spec()).unwrap();
        let h2 = evaluate(&prof, -0.7, &par, &spec()).unwrap();
        let h3 = evaluate(&prof, 0.7 + 2.0 * PI, &par, &spec()).unwrap();
        assert!((h1 - h2).abs() < 1e-8 * (1.0 + h1.abs()));
        assert!((h1 - h3).abs() < 1e-8 * (1.0 + h1.abs()));
    }

    #[test]
    fn half_period_shift_consistency() {
        let par = ModelParams::new(3, 0.5).unwrap();
        let prof = Profile::new(vec![1.0, 0.05, 0.0, 0.01]).unwrap();
        let shifted = prof.shifted_half_period();
        let h1 = evaluate(&prof, 0.4, &par, &spec()).unwrap();
        let h2 = evaluate(&shifted, 0.4 + PI, &par, &spec()).unwrap();
        assert!((h1 - h2).abs() < 1e-8 * (1.0 + h1.abs()));
    }

    #[test]
    fn dilation_covariance() {
        // ū(x) = λ·u(x/λ) has H(ū)(λs) = λ^{−α}·H(u)(s).
        let lambda = 1.7;
        for &(n, alpha) in &[(3u32, 0.5), (2u32, 0.5)] {
            let par = ModelParams::new(n, alpha).unwrap();
            let prof = Profile::new(vec![1.0, 0.05]).unwrap();
            let dilated = prof.scaled(lambda);
            for &s in &[0.0, 0.7] {
                let base = evaluate(&prof, s, &par, &spec()).unwrap();
                let big =
                    evaluate_scaled(&dilated, 1.0 / lambda, lambda * s, &par, &spec()).unwrap();
                assert!(
                    rel(big, base * lambda.powf(-alpha)) < 1e-6,
                    "N={n} s={s}: {big} vs {}",
                    base * lambda.powf(-alpha)
                );
            }
        }
    }

    #[test]
    fn axis_outer_form_agrees() {
        let par = ModelParams::new(3, 0.5).unwrap();
        let prof = Profile::new(vec![1.0, 0.05, 0.0, 0.01]).unwrap();
        for &s in &[0.0, 1.0, PI] {
            let a = evaluate(&prof, s, &par, &spec()).unwrap();
            let b = evaluate_direct(&prof, s, &par, &spec()).unwrap();
            assert!(rel(a, b) < 1e-6, "s={s}: {a} vs {b} (rel {:.2e})", rel(a, b));
        }
        let par4 = ModelParams::new(4, 0.3).unwrap();
        let prof4 = Profile::new(vec![1.0, 0.05]).unwrap();
        let a = evaluate(&prof4, 0.3, &par4, &spec()).unwrap();
        let b = evaluate_direct(&prof4, 0.3, &par4, &spec()).unwrap();
        assert!(rel(a, b) < 1e-6);
    }

    #[test]
    fn axis_outer_constant_and_shift() {
        let par = ModelParams::new(3, 0.25).unwrap();
        let prof = Profile::constant(1.0).unwrap();
        let h = evaluate_direct(&prof, 0.0, &par, &spec()).unwrap();
        let closed = constant_nmc(1.0, &par, &spec()).unwrap();
        assert!(rel(h, closed) < 1e-6);

        let par3 = ModelParams::new(3, 0.5).unwrap();
        let prof3 = Profile::new(vec![1.0, 0.05, 0.0, 0.01]).unwrap();
        let shifted = prof3.shifted_half_period();
        let h1 = evaluate_direct(&prof3, 0.4, &par3, &spec()).unwrap();
        let h2 = evaluate_direct(&shifted, 0.4 + PI, &par3, &spec()).unwrap();
        assert!((h1 - h2).abs() < 1e-8 * (1.0 + h1.abs()));
    }

    #[test]
    fn radial_integral_reference_values() {
        let par3 = ModelParams::new(3, 0.5).unwrap();
        let par4 = ModelParams::new(4, 0.3).unwrap();
        let cases = [
            (&par3, 0.9, 1.3, 2.3886418905844629414),
            (&par3, 0.0, 1.3, 2.8260092617712595097),
            (&par3, 1.1, 0.2, 17.574669309391920215),
            (&par4, 0.95, 2.0, 2.8201907413317511596),
        ];
        for (par, q, p, want) in cases {
            let got = i_qp(q, p, par, &spec()).unwrap();
            assert!(
                rel(got, want) < 1e-7,
                "I({q},{p}) = {got}, want {want} (rel {:.2e})",
                rel(got, want)
            );
        }
    }

    #[test]
    fn radial_integral_monotone_and_even() {
        let par = ModelParams::new(3, 0.5).unwrap();
        let i1 = i_qp(0.5, 1.3, &par, &spec()).unwrap();
        let i2 = i_qp(1.0, 1.3, &par, &spec()).unwrap();
        let i3 = i_qp(1.5, 1.3, &par, &spec()).unwrap();
        assert!(i1 > i2 && i2 > i3);
        let j1 = i_qp(0.9, 0.5, &par, &spec()).unwrap();
        let j2 = i_qp(0.9, 1.0, &par, &spec()).unwrap();
        let j3 = i_qp(0.9, 2.0, &par, &spec()).unwrap();
        assert!(j1 > j2 && j2 > j3);
        let e1 = i_qp(0.9, -1.3, &par, &spec()).unwrap();
        let e2 = i_qp(0.9, 1.3, &par, &spec()).unwrap();
        assert!(rel(e1, e2) < 1e-12);
        assert!(i_qp(1.0, 0.0, &par, &spec()).is_err());
    }

    #[test]
    fn shell_form_constant_and_agreement() {
        let par = ModelParams::new(3, 0.5).unwrap();
        let prof = Profile::constant(1.0).unwrap();
        let h = evaluate_shell(&prof, 0.0, &par, &spec()).unwrap();
        let closed = constant_nmc(1.0, &par, &spec()).unwrap();
        assert!(rel(h, closed) < 1e-3, "{h} vs {closed}");

        let wavy = Profile::new(vec![1.0, 0.05]).unwrap();
        let a = evaluate_shell(&wavy, 0.0, &par, &spec()).unwrap();
        let b = evaluate(&wavy, 0.0, &par, &spec()).unwrap();
        assert!(rel(a, b) < 1e-3, "{a} vs {b}");
    }

    #[test]
    fn shell_form_even() {
        let par = ModelParams::new(3, 0.5).unwrap();
        let prof = Profile::new(vec![1.0, 0.05]).unwrap();
        let a = evaluate_shell(&prof, 0.5, &par, &spec()).unwrap();
        let b = evaluate_shell(&prof, -0.5, &par, &spec()).unwrap();
        assert!(rel(a, b) < 1e-10);
    }
}

