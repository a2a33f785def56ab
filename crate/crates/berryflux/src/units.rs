//! Unit systems.
//!
//! All quantization checks in this crate run in natural units
//! (hbar = e = m_e = k_B = 1), where the loop integral of the Berry
//! connection is an integer multiple of pi. SI constants are available
//! for reporting physical magnitudes.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitMode {
    Natural,
    Si,
}

/// Physical constants in the active unit mode. `h` is always derived as
/// `2 pi hbar`, so the pair is exactly consistent in both modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem {
    pub mode: UnitMode,
    pub hbar: f64,
    pub e: f64,
    pub m_e: f64,
    pub k_b: f64,
}

impl UnitSystem {
    pub fn natural() -> Self {
        UnitSystem {
            mode: UnitMode::Natural,
            hbar: 1.0,
            e: 1.0,
            m_e: 1.0,
            k_b: 1.0,
        }
    }

    /// 2018 CODATA / SI-definition values, with hbar primary.
    pub fn si() -> Self {
        UnitSystem {
            mode: UnitMode::Si,
            hbar: 1.054_571_817e-34,
            e: 1.602_176_634e-19,
            m_e: 9.109_383_701_5e-31,
            k_b: 1.380_649e-23,
        }
    }

    pub fn from_mode(mode: UnitMode) -> Self {
        match mode {
            UnitMode::Natural => Self::natural(),
            UnitMode::Si => Self::si(),
        }
    }

    /// Planck constant, exactly `2 pi hbar`.
    pub fn h(&self) -> f64 {
        TAU * self.hbar
    }
}
