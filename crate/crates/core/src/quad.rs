//! One-dimensional quadrature: adaptive Gauss–Kronrod for smooth panels,
//! tanh-sinh (double-exponential) for algebraic endpoint singularities, and
//! a doubling scheme for even integrands on the whole line.
//!
//! All routines are pure functions of their inputs with fixed node sets and
//! fixed summation order, so results are bit-for-bit reproducible regardless
//! of the thread count of the surrounding code.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budgets shared by every integral in the crate.
///
/// `abs_tol`/`rel_tol` bound the target error of a single finite integral;
/// `max_subdivisions` caps Gauss–Kronrod bisection; `tail_rel_tol` controls
/// when half-line truncation stops; `de_levels` caps tanh-sinh refinement.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub tail_rel_tol: f64,
    pub de_levels: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 60,
            tail_rel_tol: 1e-10,
            de_levels: 10,
        }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.tail_rel_tol > 0.0) {
            return Err(Error::DomainError(
                "quadrature tolerances must be strictly positive".into(),
            ));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::DomainError(
                "max_subdivisions must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Same budgets, tighter tolerances; used where a caller needs extra
    /// headroom inside a larger computation (e.g. inner integrals).
    pub fn scaled_tol(&self, factor: f64) -> QuadSpec {
        QuadSpec {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }
}

// ---------------------------------------------------------------------------
// 15-point Gauss–Kronrod rule
// ---------------------------------------------------------------------------

const XGK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Scaled 15-point Kronrod abscissae and weights on [a, b], for callers that
/// build fixed composite rules and cache per-node data across many kernels.
pub(crate) fn gk15_points(a: f64, b: f64) -> [(f64, f64); 15] {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut out = [(0.0, 0.0); 15];
    for j in 0..7 {
        out[2 * j] = (center - half * XGK15[j], half * WGK15[j]);
        out[2 * j + 1] = (center + half * XGK15[j], half * WGK15[j]);
    }
    out[14] = (center, half * WGK15[7]);
    out
}

/// Error post-processing as done in QUADPACK: combine the raw Kronrod−Gauss
/// difference with the integrand's variation so the estimate stays meaningful
/// when the difference accidentally cancels.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

/// One application of the 7–15 Gauss–Kronrod pair on [a, b].
/// Returns (integral, error estimate, ∫|f|, ∫|f − mean|).
fn qk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let f_center = f(center);
    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];

    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK15[7];
    let mut res_abs = res_kronrod.abs();

    // Gauss points are the odd-indexed Kronrod abscissae.
    for j in 0..3 {
        let jtw = 2 * j + 1;
        let abscissa = half * XGK15[jtw];
        let fval1 = f(center - abscissa);
        let fval2 = f(center + abscissa);
        fv1[jtw] = fval1;
        fv2[jtw] = fval2;
        let fsum = fval1 + fval2;
        res_gauss += WG7[j] * fsum;
        res_kronrod += WGK15[jtw] * fsum;
        res_abs += WGK15[jtw] * (fval1.abs() + fval2.abs());
    }
    res_gauss += WG7[3] * f_center;

    for j in 0..4 {
        let jtwm1 = 2 * j;
        let abscissa = half * XGK15[jtwm1];
        let fval1 = f(center - abscissa);
        let fval2 = f(center + abscissa);
        fv1[jtwm1] = fval1;
        fv2[jtwm1] = fval2;
        res_kronrod += WGK15[jtwm1] * (fval1 + fval2);
        res_abs += WGK15[jtwm1] * (fval1.abs() + fval2.abs());
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK15[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK15[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let err = (res_kronrod - res_gauss) * half;
    (
        res_kronrod * half,
        rescale_error(err, res_abs * abs_half, res_asc * abs_half),
        res_abs * abs_half,
        res_asc * abs_half,
    )
}

/// Adaptive Gauss–Kronrod integration of `f` over the finite interval [a, b].
///
/// The worst panel (by error estimate) is bisected until the summed error
/// estimate meets `max(abs_tol, rel_tol·|I|)` or the subdivision budget runs
/// out, in which case the best estimate and its bound are reported in the
/// error. Endpoints are never evaluated.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadSpec,
) -> Result<f64> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::DomainError("integration bounds must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Err(Error::DomainError("integration bounds out of order".into()));
    }

    // Panels are kept in a plain vector; each refinement step scans for the
    // worst panel. max_subdivisions is small enough that the O(n²) scan is
    // irrelevant next to the integrand evaluations, and the scan order makes
    // tie-breaking deterministic (first worst wins).
    struct Panel {
        a: f64,
        b: f64,
        val: f64,
        err: f64,
    }

    let (val, err, _, _) = qk15(&mut f, a, b);
    if !val.is_finite() {
        return Err(Error::DomainError(
            "integrand returned a non-finite value".into(),
        ));
    }
    let mut panels = vec![Panel { a, b, val, err }];
    let mut val_sum = val;
    let mut err_sum = err;

    for _ in 0..spec.max_subdivisions {
        if err_sum <= spec.abs_tol.max(spec.rel_tol * val_sum.abs()) {
            return Ok(val_sum);
        }
        // Pick the panel with the largest error estimate.
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.err > panels[worst].err {
                worst = i;
            }
        }
        let Panel { a: pa, b: pb, val: pval, err: perr } = panels[worst];
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // Interval no longer splittable in f64; accept what we have.
            break;
        }
        let (v1, e1, _, _) = qk15(&mut f, pa, mid);
        let (v2, e2, _, _) = qk15(&mut f, mid, pb);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::DomainError(
                "integrand returned a non-finite value".into(),
            ));
        }
        panels[worst] = Panel { a: pa, b: mid, val: v1, err: e1 };
        panels.push(Panel { a: mid, b: pb, val: v2, err: e2 });
        val_sum += v1 + v2 - pval;
        err_sum += e1 + e2 - perr;
    }

    if err_sum <= spec.abs_tol.max(spec.rel_tol * val_sum.abs()) {
        return Ok(val_sum);
    }
    Err(Error::NonConvergence {
        estimate: val_sum,
        bound: err_sum,
    })
}

// ---------------------------------------------------------------------------
// tanh-sinh (double-exponential) quadrature
// ---------------------------------------------------------------------------

/// One abscissa of the tanh-sinh rule, stored in normalized coordinates.
/// With u = tanh((π/2)·sinh t), `dd = (1−u)/2` is the normalized distance
/// from the nearer endpoint, computed without cancellation so that points
/// exponentially close to an endpoint keep full precision; `w` is the
/// transformation weight.
struct DeNode {
    dd: f64,
    w: f64,
}

const DE_T_MAX: f64 = 6.0;
const DE_MAX_LEVELS: usize = 12;

fn de_node(t: f64) -> DeNode {
    let z = std::f64::consts::FRAC_PI_2 * t.sinh();
    let e2z = (-2.0 * z).exp();
    let dd = e2z / (1.0 + e2z);
    let w = std::f64::consts::FRAC_PI_2 * t.cosh() * 4.0 * e2z / ((1.0 + e2z) * (1.0 + e2z));
    DeNode { dd, w }
}

/// Node tables per refinement level: level 0 holds t = 0, 1, 2, …; level ℓ≥1
/// holds the odd multiples of 2^{−ℓ}. Built once, shared by every caller.
fn de_levels() -> &'static Vec<Vec<DeNode>> {
    static CACHE: OnceLock<Vec<Vec<DeNode>>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let mut levels = Vec::with_capacity(DE_MAX_LEVELS + 1);
        let mut level0 = Vec::new();
        let mut k = 0;
        loop {
            let t = k as f64;
            if t > DE_T_MAX {
                break;
            }
            let node = de_node(t);
            if node.w < 1e-320 && k > 0 {
                break;
            }
            level0.push(node);
            k += 1;
        }
        levels.push(level0);
        for level in 1..=DE_MAX_LEVELS {
            let h = 0.5_f64.powi(level as i32);
            let mut nodes = Vec::new();
            let mut j = 1_u64;
            loop {
                let t = j as f64 * h;
                if t > DE_T_MAX {
                    break;
                }
                let node = de_node(t);
                if node.w >= 1e-320 {
                    nodes.push(node);
                }
                j += 2;
            }
            levels.push(nodes);
        }
        levels
    })
}

/// tanh-sinh quadrature over [a, b] where the integrand receives, besides the
/// abscissa, its exact distances to both endpoints. Writing singular factors
/// in terms of those distances (e.g. `d_left^{-1/2}` instead of
/// `(x - a)^{-1/2}`) avoids the cancellation that otherwise caps attainable
/// accuracy near an endpoint.
///
/// `singular_left`/`singular_right` declare which endpoints may blow up:
/// non-finite integrand values are dropped there (the weights decay fast
/// enough that dropped nodes are below tolerance) and are an error elsewhere.
pub fn integrate_de_dist<G: FnMut(f64, f64, f64) -> f64>(
    mut g: G,
    a: f64,
    b: f64,
    singular_left: bool,
    singular_right: bool,
    spec: &QuadSpec,
) -> Result<f64> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::DomainError("integration bounds must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return Err(Error::DomainError("integration bounds out of order".into()));
    }

    let width = b - a;
    let half = 0.5 * width;
    let levels = de_levels();
    let max_level = spec.de_levels.min(DE_MAX_LEVELS);

    // Returns the weighted sum over one level's nodes, or an error if the
    // integrand is non-finite away from a declared singular endpoint.
    let mut level_sum = |nodes: &[DeNode], center_included: bool| -> Result<f64> {
        let mut sum = 0.0;
        for (i, node) in nodes.iter().enumerate() {
            if node.w == 0.0 || node.dd == 0.0 {
                continue;
            }
            let d = width * node.dd;
            if i == 0 && center_included {
                // t = 0: single midpoint evaluation.
                let v = g(a + half, half, half);
                if v.is_finite() {
                    sum += node.w * v;
                } else if !(singular_left || singular_right) {
                    return Err(Error::DomainError(
                        "integrand returned a non-finite value".into(),
                    ));
                }
                continue;
            }
            // Mirror pair: one point near each endpoint.
            let x_l = a + d;
            let v_l = g(x_l, d, width - d);
            if v_l.is_finite() {
                sum += node.w * v_l;
            } else if !singular_left {
                return Err(Error::DomainError(
                    "integrand returned a non-finite value near the left endpoint".into(),
                ));
            }
            let x_r = b - d;
            let v_r = g(x_r, width - d, d);
            if v_r.is_finite() {
                sum += node.w * v_r;
            } else if !singular_right {
                return Err(Error::DomainError(
                    "integrand returned a non-finite value near the right endpoint".into(),
                ));
            }
        }
        Ok(sum)
    };

    let mut h = 1.0;
    let mut integral = half * h * level_sum(&levels[0], true)?;
    let mut last_diff = f64::INFINITY;

    for level in 1..=max_level {
        h *= 0.5;
        let s = level_sum(&levels[level], false)?;
        let refined = 0.5 * integral + half * h * s;
        last_diff = (refined - integral).abs();
        integral = refined;
        if level >= 2 && last_diff <= spec.abs_tol.max(spec.rel_tol * integral.abs()) {
            return Ok(integral);
        }
    }

    Err(Error::NonConvergence {
        estimate: integral,
        bound: last_diff,
    })
}

/// tanh-sinh quadrature over [a, b] for a plain integrand `f(x)`.
///
/// The abscissa handed to `f` is reconstructed from the nearest endpoint, so
/// `f` sees arguments that approach a singular endpoint as closely as f64
/// permits. For full control of endpoint precision use [`integrate_de_dist`].
pub fn integrate_de<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    singular_left: bool,
    singular_right: bool,
    spec: &QuadSpec,
) -> Result<f64> {
    integrate_de_dist(
        |x, _dl, _dr| f(x),
        a,
        b,
        singular_left,
        singular_right,
        spec,
    )
}

// ---------------------------------------------------------------------------
// half-line integration of even integrands
// ---------------------------------------------------------------------------

/// ∫_ℝ f for even f, computed as 2∫_0^∞ by interval doubling: the head [0, 8]
/// is integrated with tanh-sinh (tolerating an integrable singularity at 0),
/// then [T, 2T] increments accumulate, starting at T = 8.
///
/// When the increments settle into a geometric decay, the remaining tail is
/// estimated from their ratio and added to the result; iteration stops when
/// that tail correction stabilizes the total to within `tail_rel_tol` (or
/// the raw increment itself drops below `tail_rel_tol·|accumulated|`).
/// Fails if T would exceed 2^30 without convergence.
pub fn integrate_halfline_even<F: FnMut(f64) -> f64>(mut f: F, spec: &QuadSpec) -> Result<f64> {
    spec.validate()?;
    let mut acc = integrate_de(&mut f, 0.0, 8.0, true, false, spec)?;
    let mut t = 8.0_f64;
    let mut prev_inc: Option<f64> = None;
    let mut prev_total = acc;

    while t <= (1u64 << 30) as f64 {
        let inc = integrate_adaptive(&mut f, t, 2.0 * t, spec)?;
        acc += inc;
        t *= 2.0;

        if inc.abs() <= spec.tail_rel_tol * acc.abs() {
            return Ok(2.0 * acc);
        }

        // Geometric tail extrapolation once two increments are available and
        // their ratio indicates convergent decay.
        let mut total = acc;
        if let Some(pinc) = prev_inc {
            let rho = inc.abs() / pinc.abs();
            if pinc != 0.0 && rho > 0.0 && rho < 0.95 {
                total += inc * rho / (1.0 - rho);
                if (total - prev_total).abs() <= spec.tail_rel_tol * total.abs() {
                    return Ok(2.0 * total);
                }
            }
        }
        prev_inc = Some(inc);
        prev_total = total;
    }

    Err(Error::NonConvergence {
        estimate: 2.0 * prev_total,
        bound: prev_inc.unwrap_or(f64::NAN).abs(),
    })
}
