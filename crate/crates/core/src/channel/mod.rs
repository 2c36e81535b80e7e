//! Path loss and received power for the satellite user link.
//!
//! Total loss is basic loss plus gas and scintillation attenuation; basic
//! loss is free-space loss plus shadow fading plus clutter loss. Clutter
//! loss is zero in LOS.

mod table;

pub use table::{ChannelRow, ChannelTable, RURAL_SBAND};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::SimError;
use crate::geometry::{self, GeoPosition, LosAnchor};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const BOLTZMANN: f64 = 1.380_649e-23;

pub fn fspl(d_m: f64, f_hz: f64) -> Result<f64, SimError> {
    if !(d_m > 0.0) {
        return Err(SimError::NonPositive {
            what: "distance",
            value: d_m,
        });
    }
    if !(f_hz > 0.0) {
        return Err(SimError::NonPositive {
            what: "carrier frequency",
            value: f_hz,
        });
    }
    Ok(20.0 * (4.0 * std::f64::consts::PI * d_m * f_hz / SPEED_OF_LIGHT).log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossBreakdown {
    pub fspl: f64,
    pub sf: f64,
    pub cl: f64,
    pub pl_basic: f64,
    pub pl_gas: f64,
    pub pl_scint: f64,
    pub pl_total: f64,
}

impl PathLossBreakdown {
    pub fn compose(fspl: f64, sf: f64, cl: f64, pl_gas: f64, pl_scint: f64) -> Self {
        let pl_basic = fspl + sf + cl;
        Self {
            fspl,
            sf,
            cl,
            pl_basic,
            pl_gas,
            pl_scint,
            pl_total: total_path_loss(pl_basic, pl_gas, pl_scint),
        }
    }
}

pub fn total_path_loss(pl_basic: f64, pl_gas: f64, pl_scint: f64) -> f64 {
    pl_basic + pl_gas + pl_scint
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudgetParams {
    pub eirp_dbm: f64,
    pub g_rx_dbi: f64,
    pub noise_figure_db: f64,
    pub bandwidth_hz: f64,
    pub temperature_k: f64,
}

impl LinkBudgetParams {
    /// Thermal noise kTB plus the receiver noise figure, in dBm.
    pub fn noise_dbm(&self) -> f64 {
        10.0 * (BOLTZMANN * self.temperature_k * self.bandwidth_hz * 1e3).log10()
            + self.noise_figure_db
    }
}

pub fn received_power(params: &LinkBudgetParams, pl_db: f64) -> f64 {
    params.eirp_dbm + params.g_rx_dbi - pl_db
}

/// Bernoulli threshold rule: a uniform draw below the LOS probability means LOS.
pub fn los_from_draw(uniform: f64, p_los: f64) -> bool {
    uniform < p_los
}

pub fn sample_los<R: Rng + ?Sized>(
    elevation_deg: f64,
    table: &ChannelTable,
    scenario: &str,
    rng: &mut R,
) -> Result<bool, SimError> {
    let row = table.lookup(scenario, elevation_deg)?;
    Ok(los_from_draw(rng.random::<f64>(), row.p_los))
}

pub fn sample_shadow_fading<R: Rng + ?Sized>(sigma_db: f64, rng: &mut R) -> f64 {
    if sigma_db <= 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma_db)
        .expect("finite positive sigma")
        .sample(rng)
}

/// Per UE–satellite link: geometry, LOS condition and the large-scale draws.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkState {
    pub los: bool,
    pub sf_db: f64,
    pub cl_db: f64,
    pub elevation_deg: f64,
    pub slant_m: f64,
    pub carrier_hz: f64,
    pub anchor: LosAnchor,
}

/// Streams used when (re)drawing a link's LOS condition and shadowing.
pub struct ChannelDraws<'a, R: Rng + ?Sized> {
    pub los: &'a mut R,
    pub sf: &'a mut R,
}

impl LinkState {
    pub fn new<R: Rng + ?Sized>(
        sat: &GeoPosition,
        ue: &GeoPosition,
        carrier_hz: f64,
        cube_side_m: f64,
        table: &ChannelTable,
        scenario: &str,
        draws: ChannelDraws<'_, R>,
    ) -> Result<Self, SimError> {
        let mut link = Self {
            los: true,
            sf_db: 0.0,
            cl_db: 0.0,
            elevation_deg: geometry::elevation_angle(sat, ue),
            slant_m: geometry::slant_range(sat, ue),
            carrier_hz,
            anchor: LosAnchor::new(sat, cube_side_m),
        };
        link.resample(sat, table, scenario, draws)?;
        Ok(link)
    }

    pub fn update_geometry(&mut self, sat: &GeoPosition, ue: &GeoPosition) {
        self.elevation_deg = geometry::elevation_angle(sat, ue);
        self.slant_m = geometry::slant_range(sat, ue);
    }

    /// New LOS draw, shadow fading and clutter loss at the current elevation;
    /// moves the anchor to `sat`.
    pub fn resample<R: Rng + ?Sized>(
        &mut self,
        sat: &GeoPosition,
        table: &ChannelTable,
        scenario: &str,
        draws: ChannelDraws<'_, R>,
    ) -> Result<(), SimError> {
        let row = *table.lookup(scenario, self.elevation_deg)?;
        self.los = los_from_draw(draws.los.random::<f64>(), row.p_los);
        if self.los {
            self.sf_db = sample_shadow_fading(row.sigma_sf_los, draws.sf);
            self.cl_db = 0.0;
        } else {
            self.sf_db = sample_shadow_fading(row.sigma_sf_nlos, draws.sf);
            self.cl_db = row.cl_db;
        }
        self.anchor.reset(sat);
        Ok(())
    }

    pub fn propagation_delay_s(&self) -> f64 {
        self.slant_m / SPEED_OF_LIGHT
    }

    pub fn basic_path_loss(&self) -> f64 {
        basic_path_loss(self)
    }

    pub fn breakdown(&self, pl_gas: f64, pl_scint: f64) -> PathLossBreakdown {
        let f = fspl(self.slant_m, self.carrier_hz).expect("link geometry has positive range");
        PathLossBreakdown::compose(f, self.sf_db, self.cl_db, pl_gas, pl_scint)
    }
}

pub fn basic_path_loss(link: &LinkState) -> f64 {
    fspl(link.slant_m, link.carrier_hz).expect("link geometry has positive range")
        + link.sf_db
        + link.cl_db
}
