// SPDX-License-Identifier: Apache-2.0

//! Scalar parameters of a wave packet space and its wave packet system.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of angular sectors at the coarsest scale. The construction is only
/// defined for this value.
pub const N_SECTORS: u32 = 10;

/// Largest scale accepted by [`SystemParams::validate`]. Index sets grow like
/// `4^j_max`, so anything beyond this is not a desk-scale computation.
pub const MAX_J: u32 = 16;

/// All scalar parameters of a wave packet space and system.
///
/// Serialised as a flat JSON object. The integrability exponents `p` and `q`
/// may be infinite; infinity is written as the string `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SystemParams {
    /// Radial anisotropy exponent: tiles at scale `j` are `2^(alpha j)` long.
    pub alpha: f64,
    /// Angular exponent: tiles at scale `j` are `2^(beta j)` wide.
    pub beta: f64,
    /// Smoothness exponent of the weight `2^(j s)`.
    pub s: f64,
    #[serde(with = "extended_real")]
    pub p: f64,
    #[serde(with = "extended_real")]
    pub q: f64,
    /// Overlap margin of the base rectangle, in `(0, 1/32)`.
    pub epsilon: f64,
    pub n_sectors: u32,
    /// Finest scale.
    pub j_max: u32,
    /// Step of the translation lattice.
    pub delta: f64,
    /// Truncation radius of the translation lattice, `|k|_inf <= k_radius`.
    pub k_radius: u32,
}

impl Default for SystemParams {
    fn default() -> Self {
        SystemParams {
            alpha: 0.5,
            beta: 0.5,
            s: 0.0,
            p: 2.0,
            q: 2.0,
            epsilon: 0.01,
            n_sectors: N_SECTORS,
            j_max: 2,
            delta: 0.25,
            k_radius: 2,
        }
    }
}

impl SystemParams {
    /// Checks the conditions under which the covering is defined:
    /// `0 <= beta <= alpha <= 1`, `0 < epsilon < 1/32`, ten sectors and a finite
    /// positive `j_max`.
    pub fn validate_covering(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return bad("alpha and beta must be finite".into());
        }
        if !(0.0 <= self.beta && self.beta <= self.alpha && self.alpha <= 1.0) {
            return bad(format!("need 0 <= beta <= alpha <= 1, got alpha = {}, beta = {}", self.alpha, self.beta));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0 / 32.0) {
            return bad(format!("epsilon must lie in (0, 1/32), got {}", self.epsilon));
        }
        if self.n_sectors != N_SECTORS {
            return bad(format!("n_sectors must be {N_SECTORS}, got {}", self.n_sectors));
        }
        if self.j_max == 0 || self.j_max > MAX_J {
            return bad(format!("j_max must lie in 1..={MAX_J}, got {}", self.j_max));
        }
        Ok(())
    }

    /// Checks everything required of a wave packet system: the covering
    /// conditions with the stricter `alpha < 1`, a positive finite lattice step,
    /// a finite weight exponent and positive integrability exponents.
    pub fn validate(&self) -> Result<()> {
        self.validate_covering()?;
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.alpha >= 1.0 {
            return bad(format!("alpha must be < 1 for a wave packet system, got {}", self.alpha));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta must be positive and finite, got {}", self.delta));
        }
        if !self.s.is_finite() {
            return bad("s must be finite".into());
        }
        if !(self.p > 0.0) || self.p.is_nan() {
            return bad(format!("p must lie in (0, inf], got {}", self.p));
        }
        if !(self.q > 0.0) || self.q.is_nan() {
            return bad(format!("q must lie in (0, inf], got {}", self.q));
        }
        Ok(())
    }

    /// Radius `2^j_max` of the disk the covering is certified on.
    pub fn inner_radius(&self) -> f64 {
        2f64.powi(self.j_max as i32)
    }

    /// Radius `2^j_max / cos(pi 2^((beta-1) j_max) / N)` bounding the covered set.
    pub fn outer_radius(&self) -> f64 {
        let j = self.j_max as f64;
        let half_sector = std::f64::consts::PI * 2f64.powf((self.beta - 1.0) * j) / self.n_sectors as f64;
        self.inner_radius() / half_sector.cos()
    }

    /// Side length `2 k_radius + 1` of the truncated translation lattice.
    pub fn lattice_side(&self) -> usize {
        2 * self.k_radius as usize + 1
    }
}

/// Serde helper for exponents in `(0, inf]`: infinity round-trips as `"inf"`.
pub mod extended_real {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.trim().to_ascii_lowercase().as_str() {
                "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
                other => other
                    .parse::<f64>()
                    .map_err(|_| de::Error::custom(format!("expected a number or \"inf\", got {t:?}"))),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SystemParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_inadmissible_values() {
        let base = SystemParams::default();
        let cases = [
            SystemParams { alpha: 0.3, beta: 0.5, ..base.clone() },
            SystemParams { alpha: 1.0, beta: 0.5, ..base.clone() },
            SystemParams { epsilon: 1.0 / 32.0, ..base.clone() },
            SystemParams { epsilon: 0.0, ..base.clone() },
            SystemParams { n_sectors: 12, ..base.clone() },
            SystemParams { j_max: 0, ..base.clone() },
            SystemParams { delta: 0.0, ..base.clone() },
            SystemParams { delta: -0.1, ..base.clone() },
            SystemParams { p: 0.0, ..base.clone() },
            SystemParams { q: f64::NAN, ..base.clone() },
        ];
        for c in cases {
            assert!(c.validate().is_err(), "{c:?} should be rejected");
        }
    }

    #[test]
    fn covering_allows_alpha_one() {
        let p = SystemParams { alpha: 1.0, beta: 1.0, ..Default::default() };
        p.validate_covering().unwrap();
        assert!(p.validate().is_err());
    }

    #[test]
    fn json_round_trip_with_infinite_exponent() {
        let p = SystemParams { p: f64::INFINITY, ..Default::default() };
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"p\":\"inf\""));
        let back: SystemParams = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        for key in ["alpha", "beta", "s", "q", "epsilon", "n_sectors", "j_max", "delta", "k_radius"] {
            assert!(text.contains(&format!("\"{key}\":")), "missing {key}");
        }
    }

    #[test]
    fn missing_fields_take_defaults() {
        let p: SystemParams = serde_json::from_str(r#"{"delta": 0.125, "q": "inf"}"#).unwrap();
        assert_eq!(p, SystemParams { delta: 0.125, q: f64::INFINITY, ..Default::default() });
    }

    #[test]
    fn outer_radius_exceeds_inner() {
        let p = SystemParams::default();
        assert_eq!(p.inner_radius(), 4.0);
        let expected = 4.0 / (std::f64::consts::PI * 0.5 / 10.0).cos();
        assert!((p.outer_radius() - expected).abs() < 1e-12);
    }
}
