//! Piecewise-linear costs and the normalized weighted reward.

use crate::simulator::Metrics;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Inductance error under which R, SRF and area start earning credit.
pub const L_TOLERANCE: f64 = 0.05;

pub const DEFAULT_INVALID_PENALTY: f64 = -1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RewardError {
    #[error("cost weights sum to zero")]
    ZeroWeightSum,
    #[error("invalid target: {0}")]
    InvalidTarget(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    #[serde(rename = "L_T_h")]
    pub inductance: f64,
    #[serde(rename = "R_T_ohm")]
    pub resistance: f64,
    #[serde(rename = "SRF_T_hz")]
    pub srf: f64,
    #[serde(rename = "area_max_um2")]
    pub area_max: f64,
    /// (L, R, SRF, Area)
    pub weights: [f64; 4],
}

impl TargetSpec {
    pub fn new(inductance: f64, resistance: f64, srf: f64, area_max: f64) -> Self {
        TargetSpec {
            inductance,
            resistance,
            srf,
            area_max,
            weights: [1.0; 4],
        }
    }

    pub fn validate(&self) -> Result<(), RewardError> {
        let positive = [self.inductance, self.resistance, self.srf, self.area_max];
        if positive.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(RewardError::InvalidTarget("L, R, SRF and area_max must be positive".into()));
        }
        if self.weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(RewardError::InvalidTarget("weights must be nonnegative".into()));
        }
        if self.weights.iter().sum::<f64>() <= 0.0 {
            return Err(RewardError::ZeroWeightSum);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorTerms {
    pub e_l: f64,
    pub e_r: f64,
    pub e_srf: f64,
    pub e_area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Costs {
    pub l: f64,
    pub r: f64,
    pub srf: f64,
    pub area: f64,
}

impl Costs {
    pub fn as_array(&self) -> [f64; 4] {
        [self.l, self.r, self.srf, self.area]
    }
}

pub fn error_terms(m: &Metrics, t: &TargetSpec) -> ErrorTerms {
    ErrorTerms {
        e_l: (m.inductance / t.inductance - 1.0).abs(),
        e_r: m.resistance / t.resistance - 1.0,
        e_srf: 1.0 - m.srf / t.srf,
        e_area: m.area / t.area_max - 1.0,
    }
}

pub fn costs(e: &ErrorTerms) -> Costs {
    let l_ok = e.e_l < L_TOLERANCE;
    let l = if l_ok { e.e_l } else { 2.0 * e.e_l - L_TOLERANCE };
    let r = if e.e_r >= 0.0 {
        (2.0 * e.e_r).min(1.0)
    } else if l_ok {
        e.e_r
    } else {
        0.0
    };
    let srf = if e.e_srf >= 0.0 {
        (2.0 * e.e_srf).min(1.0)
    } else if l_ok {
        (2.0 * e.e_srf).max(-1.0)
    } else {
        0.0
    };
    let area = if l_ok { e.e_area } else { 0.0 };
    Costs { l, r, srf, area }
}

/// `1 - sum(w_i * C_i) / sum(w_i)`.
pub fn reward_from_costs(c: &Costs, weights: &[f64; 4]) -> Result<f64, RewardError> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(RewardError::ZeroWeightSum);
    }
    let weighted: f64 = c.as_array().iter().zip(weights).map(|(c, w)| c * w).sum();
    Ok(1.0 - weighted / total)
}

pub fn reward(m: &Metrics, t: &TargetSpec) -> Result<f64, RewardError> {
    reward_from_costs(&costs(&error_terms(m, t)), &t.weights)
}

/// Terminal reward for abandoned or invalid drawings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvalidPenalty(pub f64);

impl Default for InvalidPenalty {
    fn default() -> Self {
        InvalidPenalty(DEFAULT_INVALID_PENALTY)
    }
}

impl InvalidPenalty {
    pub fn value(&self) -> f64 {
        self.0
    }
}

pub fn invalid_penalty() -> f64 {
    InvalidPenalty::default().value()
}
