//! HAPS downlink link budget: free-space loss over the slant range, shadow
//! fading, clutter, building entry loss, SNR and Shannon rate.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Result, SimError};

/// Elevation buckets covered by the channel tables, in degrees.
pub const ELEVATION_BUCKETS: [f64; 9] = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0, 80.0, 90.0];

const DEFAULT_TABLES_JSON: &str = include_str!("../data/dense_urban_s_band.json");

/// A value per elevation bucket, split by LOS condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LosSplit {
    pub los: Vec<f64>,
    pub nlos: Vec<f64>,
}

/// Coefficients of the dual log-normal building entry loss model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BelCoeffs {
    pub r: f64,
    pub s: f64,
    pub t: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    #[serde(default = "BelCoeffs::default_c")]
    pub c: f64,
}

impl BelCoeffs {
    fn default_c() -> f64 {
        -3.0
    }

    /// Means and standard deviations `(mu1, sigma1, mu2, sigma2)` of the two
    /// log-normal components at frequency `f_c_ghz` and elevation `elevation_deg`.
    pub fn components(&self, f_c_ghz: f64, elevation_deg: f64) -> (f64, f64, f64, f64) {
        let lf = f_c_ghz.log10();
        let horizontal = self.r + self.s * lf + self.t * lf * lf;
        let elevation_term = 0.212 * elevation_deg.abs();
        (
            horizontal + elevation_term,
            self.u + self.v * lf,
            self.w + self.x * lf,
            self.y + self.z * lf,
        )
    }

    /// Entry loss for a standard-normal quantile `q`.
    pub fn loss_at_quantile(&self, f_c_ghz: f64, elevation_deg: f64, q: f64) -> f64 {
        let (mu1, s1, mu2, s2) = self.components(f_c_ghz, elevation_deg);
        let a = q * s1 + mu1;
        let b = q * s2 + mu2;
        10.0 * (10f64.powf(0.1 * a) + 10f64.powf(0.1 * b) + 10f64.powf(0.1 * self.c)).log10()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BelTables {
    pub traditional: BelCoeffs,
    pub thermally_efficient: BelCoeffs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuildingClass {
    Traditional,
    ThermallyEfficient,
}

/// Elevation-indexed propagation tables for one environment and band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTables {
    pub environment: String,
    pub band: String,
    pub los_prob: Vec<f64>,
    pub sf_sigma: LosSplit,
    pub clutter: LosSplit,
    pub bel: BelTables,
}

impl Default for ChannelTables {
    fn default() -> Self {
        Self::dense_urban_s_band()
    }
}

impl ChannelTables {
    /// The shipped dense-urban S-band dataset.
    pub fn dense_urban_s_band() -> Self {
        Self::from_json(DEFAULT_TABLES_JSON).expect("embedded channel tables are valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let tables: Self =
            serde_json::from_str(text).map_err(|e| SimError::Malformed(e.to_string()))?;
        tables.validate()?;
        Ok(tables)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialise")
    }

    pub fn validate(&self) -> Result<()> {
        let n = ELEVATION_BUCKETS.len();
        let columns = [
            ("los_prob", &self.los_prob),
            ("sf_sigma.los", &self.sf_sigma.los),
            ("sf_sigma.nlos", &self.sf_sigma.nlos),
            ("clutter.los", &self.clutter.los),
            ("clutter.nlos", &self.clutter.nlos),
        ];
        for (name, col) in columns {
            if col.len() != n {
                return Err(SimError::Malformed(format!(
                    "{name} must have {n} entries (10..90 deg), got {}",
                    col.len()
                )));
            }
            if col.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(SimError::Malformed(format!("{name} has negative or non-finite entries")));
            }
        }
        if self.los_prob.iter().any(|p| *p > 1.0) {
            return Err(SimError::Malformed("los_prob entries must be <= 1".into()));
        }
        Ok(())
    }

    pub fn bel_coeffs(&self, class: BuildingClass) -> &BelCoeffs {
        match class {
            BuildingClass::Traditional => &self.bel.traditional,
            BuildingClass::ThermallyEfficient => &self.bel.thermally_efficient,
        }
    }

    pub fn sf_sigma_db(&self, elevation_deg: f64, los: bool) -> Result<f64> {
        let i = bucket_index(elevation_deg)?;
        Ok(if los { self.sf_sigma.los[i] } else { self.sf_sigma.nlos[i] })
    }

    /// Clutter loss; zero on LOS links.
    pub fn clutter_db(&self, elevation_deg: f64, los: bool) -> Result<f64> {
        let i = bucket_index(elevation_deg)?;
        Ok(if los { 0.0 } else { self.clutter.nlos[i] })
    }
}

/// Index of the nearest 10-degree bucket; elevation must be in [10, 90].
pub fn bucket_index(elevation_deg: f64) -> Result<usize> {
    if !(10.0..=90.0).contains(&elevation_deg) {
        return Err(invalid(format!("elevation {elevation_deg} outside [10, 90] deg")));
    }
    Ok(((elevation_deg / 10.0).round() as usize).clamp(1, 9) - 1)
}

/// Radio parameters of the HAPS downlink.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LinkParams {
    pub p_tx_dbm: f64,
    pub g_element_dbi: f64,
    pub n_rows: u32,
    pub m_cols: u32,
    pub g_rx_dbi: f64,
    pub f_c_ghz: f64,
    pub haps_height_km: f64,
    pub noise_dbm: f64,
    pub bandwidth_hz: f64,
}

impl Default for LinkParams {
    fn default() -> Self {
        Self {
            p_tx_dbm: 43.0,
            g_element_dbi: 8.0,
            n_rows: 1,
            m_cols: 4,
            g_rx_dbi: 0.0,
            f_c_ghz: 2.0,
            haps_height_km: 20.0,
            noise_dbm: -100.96,
            bandwidth_hz: 20e6,
        }
    }
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 || self.m_cols == 0 {
            return Err(invalid("antenna array needs at least one row and one column"));
        }
        if !(self.bandwidth_hz > 0.0) || !(self.haps_height_km > 0.0) || !(self.f_c_ghz > 0.0) {
            return Err(invalid("bandwidth, HAPS height and carrier frequency must be positive"));
        }
        let db = [self.p_tx_dbm, self.g_element_dbi, self.g_rx_dbi, self.noise_dbm];
        if db.iter().any(|v| !v.is_finite()) {
            return Err(invalid("link powers and gains must be finite"));
        }
        Ok(())
    }
}

/// Which random loss terms enter the path loss. Disabling either is a
/// debugging mode for paired experiments, not a physical configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossSwitches {
    pub shadow_fading: bool,
    pub entry_loss: bool,
}

impl Default for LossSwitches {
    fn default() -> Self {
        Self { shadow_fading: true, entry_loss: true }
    }
}

/// Per-UE realisation of the random link features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UESample {
    pub los: bool,
    pub indoor: bool,
    /// Only meaningful for indoor UEs.
    pub traditional: bool,
    pub sf_draw: f64,
    /// Probability that the entry loss is not exceeded.
    pub bel_p: f64,
    pub elevation_deg: f64,
}

impl UESample {
    pub fn building_class(&self) -> BuildingClass {
        if self.traditional {
            BuildingClass::Traditional
        } else {
            BuildingClass::ThermallyEfficient
        }
    }
}

/// Free-space path loss in dB for `d_km` kilometres at `f_c_ghz` GHz.
pub fn fspl_db(d_km: f64, f_c_ghz: f64) -> Result<f64> {
    if !(d_km > 0.0) || !(f_c_ghz > 0.0) {
        return Err(invalid("distance and frequency must be positive"));
    }
    Ok(92.45 + 20.0 * f_c_ghz.log10() + 20.0 * d_km.log10())
}

pub fn slant_range_km(height_km: f64, elevation_deg: f64) -> Result<f64> {
    if !(elevation_deg > 0.0 && elevation_deg <= 90.0) {
        return Err(invalid(format!("elevation {elevation_deg} outside (0, 90] deg")));
    }
    if elevation_deg == 90.0 {
        return Ok(height_km);
    }
    Ok(height_km / elevation_deg.to_radians().sin())
}

/// Maximum gain of an `n_rows x m_cols` planar array.
pub fn tx_array_gain_dbi(g_element_dbi: f64, n_rows: u32, m_cols: u32) -> Result<f64> {
    let elements = n_rows as u64 * m_cols as u64;
    if elements == 0 {
        return Err(invalid("antenna array has zero elements"));
    }
    Ok(g_element_dbi + 10.0 * (elements as f64).log10())
}

pub fn los_probability(tables: &ChannelTables, elevation_deg: f64) -> Result<f64> {
    Ok(tables.los_prob[bucket_index(elevation_deg)?])
}

/// Entry loss in dB that is not exceeded with probability `p`.
pub fn building_entry_loss_db(
    coeffs: &BelCoeffs,
    f_c_ghz: f64,
    elevation_deg: f64,
    p: f64,
) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("entry-loss probability {p} outside (0, 1)")));
    }
    let q = Normal::standard().inverse_cdf(p);
    Ok(coeffs.loss_at_quantile(f_c_ghz, elevation_deg, q))
}

pub fn path_loss_db(tables: &ChannelTables, params: &LinkParams, ue: &UESample) -> Result<f64> {
    path_loss_db_with(tables, params, ue, LossSwitches::default())
}

/// Path loss with optional shadow fading / entry loss switches.
pub fn path_loss_db_with(
    tables: &ChannelTables,
    params: &LinkParams,
    ue: &UESample,
    switches: LossSwitches,
) -> Result<f64> {
    let d = slant_range_km(params.haps_height_km, ue.elevation_deg)?;
    let mut basic = fspl_db(d, params.f_c_ghz)? + tables.clutter_db(ue.elevation_deg, ue.los)?;
    if switches.shadow_fading {
        basic += ue.sf_draw * tables.sf_sigma_db(ue.elevation_deg, ue.los)?;
    }
    let entry = if ue.indoor && switches.entry_loss {
        building_entry_loss_db(
            tables.bel_coeffs(ue.building_class()),
            params.f_c_ghz,
            ue.elevation_deg,
            ue.bel_p,
        )?
    } else {
        0.0
    };
    Ok(basic + entry)
}

/// Received SNR in dB for a given total path loss.
pub fn snr_db(params: &LinkParams, pl_db: f64) -> f64 {
    let g_tx = params.g_element_dbi + 10.0 * ((params.n_rows * params.m_cols) as f64).log10();
    params.p_tx_dbm + g_tx + params.g_rx_dbi - pl_db - params.noise_dbm
}

/// Shannon rate over one carrier, in bit/s.
pub fn ue_rate_bps(params: &LinkParams, snr_db: f64) -> f64 {
    params.bandwidth_hz * (1.0 + 10f64.powf(snr_db / 10.0)).log2()
}
