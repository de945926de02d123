//! Statutory tax credits as LP cost coefficients.
//!
//! The carbon-sequestration credit pays per captured ton for a fixed window
//! of years; spreading its net present value over an asset life converts it
//! into an equivalent per-ton payment usable in a single-year stage
//! objective. Production and investment credits for clean generation apply
//! per MWh or as a capex reduction. The existing-nuclear credit is modelled
//! as a retirement prohibition and is enforced by the LP builder.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::system::{GeneratorCluster, TechClass, ValidatedSystem};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaxCreditSettings {
    /// Statutory $/tCO₂ for captured carbon.
    pub ccs_credit_per_ton: f64,
    /// Years the statutory credit is paid.
    pub ccs_credit_years: u32,
    /// Asset life the credit is annuitized over.
    pub ccs_asset_life_years: u32,
    /// Real discount rate per year.
    pub discount_rate: f64,
    /// $/MWh production credit for qualifying new clean clusters.
    pub ptc_per_mwh: f64,
    pub ptc_techs: Vec<TechClass>,
    /// Fractional capex reduction for qualifying new clusters.
    pub itc_fraction: f64,
    pub itc_techs: Vec<TechClass>,
    /// Nuclear retirement is blocked in stages anchored at or before this
    /// calendar year.
    pub nuclear_45u_through_year: i32,
}

impl Default for TaxCreditSettings {
    fn default() -> Self {
        TaxCreditSettings {
            ccs_credit_per_ton: 85.0,
            ccs_credit_years: 12,
            ccs_asset_life_years: 30,
            discount_rate: 0.035,
            ptc_per_mwh: 26.0,
            ptc_techs: alloc::vec![
                TechClass::OnshoreWind,
                TechClass::OffshoreWind,
                TechClass::SolarPv,
            ],
            itc_fraction: 0.30,
            itc_techs: alloc::vec![TechClass::Battery, TechClass::Electrolyzer],
            nuclear_45u_through_year: 2032,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CreditError {
    #[error("asset life {asset_life} shorter than credit window {credit_years}")]
    InvalidLife { credit_years: u32, asset_life: u32 },
    #[error("discount rate must be positive, got {0}")]
    BadRate(f64),
}

/// Present value of a $1/yr annuity over `n` years at rate `r`:
/// `(1 − (1+r)^−n) / r`.
pub fn annuity_factor(n: u32, r: f64) -> f64 {
    let mut growth = 1.0;
    for _ in 0..n {
        growth *= 1.0 + r;
    }
    (1.0 - 1.0 / growth) / r
}

/// Spreads a credit paid over `credit_years` across `asset_life` years with
/// equal net present value: `credit · A(credit_years, r) / A(asset_life, r)`.
pub fn annuitize_credit(
    credit: f64,
    credit_years: u32,
    asset_life: u32,
    discount_rate: f64,
) -> Result<f64, CreditError> {
    if discount_rate <= 0.0 {
        return Err(CreditError::BadRate(discount_rate));
    }
    if asset_life < credit_years {
        return Err(CreditError::InvalidLife {
            credit_years,
            asset_life,
        });
    }
    Ok(credit * annuity_factor(credit_years, discount_rate) / annuity_factor(asset_life, discount_rate))
}

/// Cost adjustments a cluster earns in one stage.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClusterCredits {
    /// $/MWh credit per fuel (captured-carbon credit depends on the fuel's
    /// heat rate and emission factor).
    pub per_mwh_by_fuel: BTreeMap<String, f64>,
    /// Fuel-independent $/MWh credit (production credit).
    pub per_mwh: f64,
    /// Multiplier on annuitized capex (1 − itc when qualifying).
    pub capex_multiplier: f64,
    /// Retirement is prohibited this stage.
    pub block_retirement: bool,
}

/// Computes the credits a cluster earns in the stage anchored at
/// `period_anchor_year`.
pub fn apply_credits(
    cluster: &GeneratorCluster,
    system: &ValidatedSystem,
    settings: &TaxCreditSettings,
    period_anchor_year: i32,
) -> ClusterCredits {
    let mut out = ClusterCredits {
        capex_multiplier: 1.0,
        ..ClusterCredits::default()
    };
    // captured-carbon credit on qualifying capture-equipped clusters
    if cluster.capture_rate > 0.0 {
        let q = annuitize_credit(
            settings.ccs_credit_per_ton,
            settings.ccs_credit_years,
            settings.ccs_asset_life_years.max(settings.ccs_credit_years),
            settings.discount_rate,
        )
        .unwrap_or(0.0);
        for fuel_id in &cluster.allowed_fuels {
            let Some(fidx) = system.fuel_idx(fuel_id) else {
                continue;
            };
            let ef = system.fuel(fidx).emission_factor;
            let hr = cluster.heat_rates.get(fuel_id).copied().unwrap_or(0.0);
            let credit = q * hr * ef * cluster.capture_rate;
            if credit != 0.0 {
                out.per_mwh_by_fuel.insert(fuel_id.clone(), credit);
            }
        }
    }
    // production / investment credits for new clean builds
    if cluster.is_new_build() {
        if settings.ptc_techs.contains(&cluster.tech_class) {
            out.per_mwh = settings.ptc_per_mwh;
        }
        if settings.itc_techs.contains(&cluster.tech_class) {
            out.capex_multiplier = 1.0 - settings.itc_fraction;
        }
    }
    if cluster.tech_class == TechClass::Nuclear
        && period_anchor_year <= settings.nuclear_45u_through_year
    {
        out.block_retirement = true;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statutory_credit_matches_published_equivalents() {
        // $85 over 12 years spread across a 30-year life at 3.5%
        let v30 = annuitize_credit(85.0, 12, 30, 0.035).unwrap();
        assert!((v30 - 45.0).abs() < 1.0, "30-year value {v30}");
        let v20 = annuitize_credit(85.0, 12, 20, 0.035).unwrap();
        assert!((v20 - 58.0).abs() < 1.0, "20-year value {v20}");
    }

    #[test]
    fn identity_when_life_equals_window() {
        for (x, n, r) in [(85.0, 12, 0.035), (10.0, 5, 0.2), (1.5, 40, 0.01)] {
            let v = annuitize_credit(x, n, n, r).unwrap();
            assert!((v - x).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_life_is_rejected() {
        assert!(matches!(
            annuitize_credit(85.0, 12, 10, 0.035),
            Err(CreditError::InvalidLife { .. })
        ));
    }
}
