//! Radius profiles of periodic cylindrical graphs: even, 2π-periodic
//! functions stored as cosine polynomials u(s) = Σ_k c_k cos(ks).
//!
//! Evaluation, derivatives of any order, and the half-period shift are all
//! exact operations on the coefficients; positivity is certified on a fixed
//! fine grid.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Grid used for positivity certification and coarse extrema scans.
pub const POSITIVITY_GRID: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    pub coeffs: Vec<f64>,
}

impl Profile {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput(
                "profile needs at least one cosine coefficient".into(),
            ));
        }
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite profile coefficient {bad}"
            )));
        }
        Ok(Profile { coeffs })
    }

    pub fn constant(kappa: f64) -> Result<Self> {
        Profile::new(vec![kappa])
    }

    /// u(s) = Σ c_k cos(ks).
    pub fn eval_u(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate() {
            acc += c * (k as f64 * s).cos();
        }
        acc
    }

    /// u′(s) = −Σ k·c_k sin(ks).
    pub fn eval_du(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            acc -= k as f64 * c * (k as f64 * s).sin();
        }
        acc
    }

    /// j-th derivative, exact: d^j/ds^j cos(ks) = k^j·cos(ks + jπ/2).
    pub fn deriv(&self, s: f64, order: u32) -> f64 {
        if order == 0 {
            return self.eval_u(s);
        }
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1) {
            let kf = k as f64;
            let phase = kf * s + order as f64 * std::f64::consts::FRAC_PI_2;
            acc += c * kf.powi(order as i32) * phase.cos();
        }
        acc
    }

    /// Minimum of u over the positivity grid, with its location.
    pub fn grid_min(&self) -> (f64, f64) {
        let mut min = f64::INFINITY;
        let mut at = 0.0;
        for i in 0..POSITIVITY_GRID {
            let s = 2.0 * std::f64::consts::PI * i as f64 / POSITIVITY_GRID as f64;
            let v = self.eval_u(s);
            if v < min {
                min = v;
                at = s;
            }
        }
        (min, at)
    }

    /// Maximum of u over the positivity grid.
    pub fn grid_max(&self) -> f64 {
        let mut max = f64::NEG_INFINITY;
        for i in 0..POSITIVITY_GRID {
            let s = 2.0 * std::f64::consts::PI * i as f64 / POSITIVITY_GRID as f64;
            max = max.max(self.eval_u(s));
        }
        max
    }

    /// Err unless min u > 0 on the certification grid.
    pub fn ensure_positive(&self) -> Result<()> {
        let (min, at) = self.grid_min();
        if min <= 0.0 {
            return Err(Error::PositivityViolation { min, at });
        }
        Ok(())
    }

    /// Index of the highest coefficient that matters at relative level
    /// `rel` (against the coefficient ℓ¹ mass); 0 for constants. Quadrature
    /// grids use this to match their resolution to the profile's bandwidth.
    pub fn effective_degree(&self, rel: f64) -> usize {
        let scale: f64 = self.coeffs.iter().map(|c| c.abs()).sum();
        if scale == 0.0 {
            return 0;
        }
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .find(|(_, c)| c.abs() > rel * scale)
            .map(|(k, _)| k)
            .unwrap_or(0)
    }

    /// The profile u(· − π), again a pure cosine polynomial:
    /// cos(k(s−π)) = (−1)^k cos(ks).
    pub fn shifted_half_period(&self) -> Profile {
        Profile {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| if k % 2 == 0 { c } else { -c })
                .collect(),
        }
    }

    /// Coefficients scaled by λ — the profile of the dilated graph.
    pub fn scaled(&self, lambda: f64) -> Profile {
        Profile {
            coeffs: self.coeffs.iter().map(|c| lambda * c).collect(),
        }
    }
}

/// On-disk form of a profile, bundling the model parameters with the
/// coefficients (and, for branch output, the amplitude and period scale).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProfileRecord {
    #[serde(rename = "N")]
    pub n: u32,
    pub alpha: f64,
    pub coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
}

impl ProfileRecord {
    pub fn profile(&self) -> Result<Profile> {
        Profile::new(self.coeffs.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_profile_evaluates_flat() {
        let p = Profile::constant(2.5).unwrap();
        for &s in &[0.0, 1.0, std::f64::consts::PI, 100.0] {
            assert_eq!(p.eval_u(s), 2.5);
            assert_eq!(p.eval_du(s), 0.0);
        }
    }

    #[test]
    fn even_profile_has_critical_point_at_zero() {
        let p = Profile::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(p.eval_du(0.0), 0.0);
    }

    #[test]
    fn direct_sum_spot() {
        let p = Profile::new(vec![1.0, 0.1]).unwrap();
        assert!((p.eval_u(std::f64::consts::PI) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let p = Profile::new(vec![1.0, 0.05, 0.0, 0.01]).unwrap();
        let s = 0.7;
        let h = 1e-5;
        let fd1 = (p.eval_u(s + h) - p.eval_u(s - h)) / (2.0 * h);
        assert!((p.eval_du(s) - fd1).abs() < 1e-9);
        assert!((p.deriv(s, 1) - fd1).abs() < 1e-9);
        let fd2 = (p.eval_u(s + h) - 2.0 * p.eval_u(s) + p.eval_u(s - h)) / (h * h);
        assert!((p.deriv(s, 2) - fd2).abs() < 1e-5);
        let fd3 = (p.deriv(s + h, 2) - p.deriv(s - h, 2)) / (2.0 * h);
        assert!((p.deriv(s, 3) - fd3).abs() < 1e-5);
    }

    #[test]
    fn positivity_check() {
        assert!(Profile::new(vec![1.0, 0.05]).unwrap().ensure_positive().is_ok());
        let bad = Profile::new(vec![0.1, 0.5]).unwrap();
        match bad.ensure_positive() {
            Err(Error::PositivityViolation { min, .. }) => assert!(min <= 0.0),
            other => panic!("expected positivity violation, got {other:?}"),
        }
    }

    #[test]
    fn half_period_shift_is_exact() {
        let p = Profile::new(vec![1.0, 0.05, 0.02, 0.01]).unwrap();
        let q = p.shifted_half_period();
        for &s in &[0.0, 0.3, 1.7, 4.0] {
            assert!(
                (q.eval_u(s) - p.eval_u(s - std::f64::consts::PI)).abs() < 1e-14
            );
        }
    }

    #[test]
    fn effective_degree_ignores_negligible_tail() {
        let p = Profile::new(vec![1.0, 0.05, 0.0, 1e-15]).unwrap();
        assert_eq!(p.effective_degree(1e-9), 1);
        assert_eq!(p.effective_degree(1e-16), 3);
        assert_eq!(Profile::constant(1.0).unwrap().effective_degree(1e-9), 0);
    }

    #[test]
    fn record_round_trip() {
        let rec = ProfileRecord {
            n: 3,
            alpha: 0.5,
            coeffs: vec![1.0, 0.05],
            a: Some(0.01),
            mu: None,
        };
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.contains("\"N\":3"));
        assert!(!json.contains("\"mu\""));
        let back: ProfileRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.coeffs, rec.coeffs);
        assert_eq!(back.a, Some(0.01));
    }
}
