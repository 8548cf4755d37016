//! Margin schedules over lexical concreteness.
//!
//! The adaptive schedule is a logistic (Fermi–Dirac) step in `c` bounded by
//! `[m_min, m_max]`, centred at the threshold `c_tilde` with steepness
//! `tau_m`. Concreteness is on the raw 1–5 rating scale and is not clamped.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simcore::PairedBatch;

/// Concreteness assigned to keywords missing from the ratings lexicon.
pub const MISSING_CONCRETENESS: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginMode {
    Adaptive,
    Inverse,
    Static(f64),
    Zero,
}

impl fmt::Display for MarginMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MarginMode::Adaptive => f.write_str("adaptive"),
            MarginMode::Inverse => f.write_str("inverse"),
            MarginMode::Static(m) => write!(f, "static:{m}"),
            MarginMode::Zero => f.write_str("zero"),
        }
    }
}

impl FromStr for MarginMode {
    type Err = Error;

    /// Accepts `adaptive`, `inverse`, `zero`, `static` (margin 1) and
    /// `static:<value>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "adaptive" => Ok(Self::Adaptive),
            "inverse" => Ok(Self::Inverse),
            "zero" | "none" => Ok(Self::Zero),
            "static" => Ok(Self::Static(1.0)),
            other => {
                let value = other
                    .strip_prefix("static:")
                    .or_else(|| other.strip_prefix("static="))
                    .ok_or_else(|| Error::InvalidConfig(format!("unknown margin mode `{other}`")))?;
                let m: f64 = value
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad static margin `{value}`")))?;
                if !m.is_finite() {
                    return Err(Error::InvalidConfig("static margin must be finite".into()));
                }
                Ok(Self::Static(m))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MarginConfig {
    pub m_min: f64,
    pub m_max: f64,
    pub c_tilde: f64,
    pub tau_m: f64,
    pub mode: MarginMode,
}

impl Default for MarginConfig {
    /// Bounds `[-2, 2]`, threshold 4, steepness 0.15, adaptive.
    fn default() -> Self {
        Self {
            m_min: -2.0,
            m_max: 2.0,
            c_tilde: 4.0,
            tau_m: 0.15,
            mode: MarginMode::Adaptive,
        }
    }
}

impl MarginConfig {
    pub fn with_mode(mode: MarginMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn zero() -> Self {
        Self::with_mode(MarginMode::Zero)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m_min.is_finite() && self.m_max.is_finite() && self.c_tilde.is_finite()) {
            return Err(Error::InvalidConfig("margin parameters must be finite".into()));
        }
        if self.m_min > self.m_max {
            return Err(Error::InvalidConfig(format!(
                "m_min ({}) exceeds m_max ({})",
                self.m_min, self.m_max
            )));
        }
        if !(self.tau_m > 0.0 && self.tau_m.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tau_m must be positive, got {}",
                self.tau_m
            )));
        }
        Ok(())
    }

    /// The configured schedule evaluated at one concreteness value.
    pub fn margin_at(&self, c: f64) -> f64 {
        match self.mode {
            MarginMode::Adaptive => adaptive_margin(c, self),
            MarginMode::Inverse => inverse_margin(c, self),
            MarginMode::Static(m) => m,
            MarginMode::Zero => 0.0,
        }
    }

    /// Per-row margins for a concreteness vector.
    pub fn margins_for(&self, concreteness: &[f64]) -> Vec<f64> {
        concreteness.iter().map(|&c| self.margin_at(c)).collect()
    }
}

/// `(m_max - m_min) / (1 + exp((c_tilde - c) / tau_m)) + m_min`
pub fn adaptive_margin(c: f64, cfg: &MarginConfig) -> f64 {
    (cfg.m_max - cfg.m_min) / (1.0 + ((cfg.c_tilde - c) / cfg.tau_m).exp()) + cfg.m_min
}

/// Reflected schedule: decreasing in `c`, high margin for abstract keywords.
pub fn inverse_margin(c: f64, cfg: &MarginConfig) -> f64 {
    (cfg.m_max - cfg.m_min) / (1.0 + ((c - cfg.c_tilde) / cfg.tau_m).exp()) + cfg.m_min
}

/// Margin for every batch row; mirrored concreteness gives mirrored margins.
pub fn margin_vector(batch: &PairedBatch, cfg: &MarginConfig) -> Vec<f64> {
    cfg.margins_for(batch.concreteness())
}

/// Maps an optional lexicon rating onto the value fed to the schedule.
pub fn concreteness_or_sentinel(rating: Option<f64>) -> f64 {
    rating.unwrap_or(MISSING_CONCRETENESS)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simcore::EmbeddingMatrix;
    use proptest::prelude::*;

    fn defaults(mode: MarginMode) -> MarginConfig {
        MarginConfig::with_mode(mode)
    }

    #[test]
    fn midpoint_is_zero_for_symmetric_bounds() {
        let cfg = defaults(MarginMode::Adaptive);
        assert_eq!(adaptive_margin(4.0, &cfg), 0.0);
        assert_eq!(inverse_margin(4.0, &cfg), 0.0);
    }

    #[test]
    fn one_steepness_step_above_threshold() {
        // 4 / (1 + e^-1) - 2, evaluated independently below.
        let expected = 4.0 / (1.0 + (-1.0f64).exp()) - 2.0;
        assert!((expected - 0.924_234_314_520_019_5).abs() < 1e-15);
        let cfg = defaults(MarginMode::Adaptive);
        assert!((adaptive_margin(4.15, &cfg) - 0.924_234).abs() < 1e-6);
        assert!((inverse_margin(4.15, &cfg) + 0.924_234).abs() < 1e-6);
    }

    #[test]
    fn saturates_at_the_bounds() {
        let cfg = defaults(MarginMode::Adaptive);
        assert!((adaptive_margin(1.0, &cfg) + 2.0).abs() < 1e-6);
        assert!((inverse_margin(100.0, &cfg) + 2.0).abs() < 1e-6);
        assert!((adaptive_margin(100.0, &cfg) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn static_and_zero_vectors() {
        let e = EmbeddingMatrix::from_rows(&[
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![1.0, -1.0],
        ])
        .unwrap();
        let batch = PairedBatch::new(e.clone(), e, 0.07, &[1.2, 4.9]).unwrap();
        let stat = margin_vector(&batch, &defaults(MarginMode::Static(1.0)));
        assert_eq!(stat, vec![1.0; 4]);
        let zero = margin_vector(&batch, &defaults(MarginMode::Zero));
        assert_eq!(zero, vec![0.0; 4]);
        let adaptive = margin_vector(&batch, &defaults(MarginMode::Adaptive));
        assert_eq!(adaptive[0], adaptive[2]);
        assert_eq!(adaptive[1], adaptive[3]);
    }

    #[test]
    fn degenerate_bounds_give_a_constant() {
        let cfg = MarginConfig {
            m_min: 0.7,
            m_max: 0.7,
            ..MarginConfig::default()
        };
        for c in [-3.0, 1.0, 4.0, 4.2, 50.0] {
            assert_eq!(adaptive_margin(c, &cfg), 0.7);
            assert_eq!(inverse_margin(c, &cfg), 0.7);
        }
    }

    #[test]
    fn validation() {
        assert!(MarginConfig::default().validate().is_ok());
        let bad = MarginConfig {
            m_min: 3.0,
            ..MarginConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = MarginConfig {
            tau_m: 0.0,
            ..MarginConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("adaptive".parse::<MarginMode>().unwrap(), MarginMode::Adaptive);
        assert_eq!("static".parse::<MarginMode>().unwrap(), MarginMode::Static(1.0));
        assert_eq!("static:2.5".parse::<MarginMode>().unwrap(), MarginMode::Static(2.5));
        assert_eq!("Zero".parse::<MarginMode>().unwrap(), MarginMode::Zero);
        assert!("bogus".parse::<MarginMode>().is_err());
        let back: MarginMode = MarginMode::Static(-0.5).to_string().parse().unwrap();
        assert_eq!(back, MarginMode::Static(-0.5));
    }

    #[test]
    fn sentinel_for_missing_ratings() {
        assert_eq!(concreteness_or_sentinel(None), 3.0);
        assert_eq!(concreteness_or_sentinel(Some(4.6)), 4.6);
    }

    proptest! {
        #[test]
        fn reflection_identity(c in -10.0f64..15.0) {
            let cfg = MarginConfig::default();
            let lhs = inverse_margin(c, &cfg);
            let rhs = adaptive_margin(2.0 * cfg.c_tilde - c, &cfg);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn strictly_inside_bounds(c in 3.0f64..5.0, lo in -3.0f64..0.0, width in 0.1f64..5.0) {
            let cfg = MarginConfig { m_min: lo, m_max: lo + width, ..MarginConfig::default() };
            let m = adaptive_margin(c, &cfg);
            prop_assert!(m > cfg.m_min && m < cfg.m_max);
            let m = inverse_margin(c, &cfg);
            prop_assert!(m > cfg.m_min && m < cfg.m_max);
        }

        #[test]
        fn monotone_on_sorted_grids(mut grid in proptest::collection::vec(3.0f64..5.0, 2..64)) {
            grid.sort_by(f64::total_cmp);
            grid.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
            let cfg = MarginConfig::default();
            for w in grid.windows(2) {
                prop_assert!(adaptive_margin(w[0], &cfg) < adaptive_margin(w[1], &cfg));
                prop_assert!(inverse_margin(w[0], &cfg) > inverse_margin(w[1], &cfg));
            }
        }
    }
}
