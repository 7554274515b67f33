//! Load-dependent BS energy model and the sleep-mode floor.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, SimError};

/// Normalised per-step energy components of a terrestrial BS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnergyParams {
    /// Sleep-mode baseline.
    pub e0: f64,
    /// Baseband processing.
    pub e_bb: f64,
    /// RF chains.
    pub e_tran: f64,
    /// Power amplifier static part.
    pub e_pa: f64,
    /// Power amplifier efficiency.
    pub eta: f64,
    /// Maximum transmit power (normalised).
    pub p_tx_w: f64,
    /// Time-step duration (normalised).
    pub dt_s: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            e0: 0.2,
            e_bb: 0.15,
            e_tran: 0.15,
            e_pa: 0.2,
            eta: 0.3,
            p_tx_w: 0.3,
            dt_s: 1.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let comps = [self.e0, self.e_bb, self.e_tran, self.e_pa];
        if comps.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(invalid("energy components must be finite and >= 0"));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(invalid("PA efficiency must lie in (0, 1]"));
        }
        if !(self.dt_s > 0.0) || !(self.p_tx_w > 0.0) {
            return Err(invalid("dt_s and p_tx_w must be positive"));
        }
        Ok(())
    }

    /// Load-independent consumption of an active BS, `E0 + E_BB + E_Tran + E_PA`.
    pub fn active_static(&self) -> f64 {
        self.e0 + self.e_bb + self.e_tran + self.e_pa
    }

    /// Dynamic term at full load, `P_tx * dT / eta`.
    pub fn full_load_dynamic(&self) -> f64 {
        self.p_tx_w * self.dt_s / self.eta
    }

    /// Energy of an active BS at a given load fraction, without validation.
    #[inline]
    pub fn at_load(&self, load: f64) -> f64 {
        self.active_static() + self.full_load_dynamic() * load
    }
}

/// Energy of an active BS carrying `rate` out of `capacity`.
pub fn bs_energy(params: &EnergyParams, rate: f64, capacity: f64) -> Result<f64> {
    if !(capacity > 0.0) {
        return Err(invalid(format!("capacity must be positive, got {capacity}")));
    }
    if !(rate >= 0.0) {
        return Err(invalid(format!("rate must be non-negative, got {rate}")));
    }
    if rate > capacity {
        return Err(SimError::LoadExceedsCapacity { rate, capacity });
    }
    Ok(params.at_load(rate / capacity))
}

/// Energy of a sleeping BS.
pub fn sleep_energy(params: &EnergyParams) -> f64 {
    params.e0
}
