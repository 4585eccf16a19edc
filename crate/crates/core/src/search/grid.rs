use serde::{Deserialize, Serialize};

use crate::arima::ArimaSpec;
use crate::data::{NightMode, STEPS_PER_DAY};
use crate::error::{Error, Result};
use crate::nnr::{Neighborhood, NnrSpec, WeightMode};
use crate::solar::SOLAR_CONSTANT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Persistence,
    Arima,
    Sarima,
    Nnr,
    Snnr,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Persistence,
        Method::Arima,
        Method::Sarima,
        Method::Nnr,
        Method::Snnr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Persistence => "persistence",
            Method::Arima => "arima",
            Method::Sarima => "sarima",
            Method::Nnr => "nnr",
            Method::Snnr => "snnr",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.as_str() == text)
    }

    pub fn is_seasonal(self) -> bool {
        matches!(self, Method::Sarima | Method::Snnr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preprocessing {
    Irradiance,
    Transmissivity,
}

impl Preprocessing {
    pub fn as_str(self) -> &'static str {
        match self {
            Preprocessing::Irradiance => "irradiance",
            Preprocessing::Transmissivity => "transmissivity",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "irradiance" => Some(Preprocessing::Irradiance),
            "transmissivity" => Some(Preprocessing::Transmissivity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Persistence,
    Arima(ArimaSpec),
    /// Distance thresholds are in transmissivity units; see
    /// [`HyperparameterPoint::effective_nnr`].
    Nnr(NnrSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DataSpec {
    pub preprocessing: Preprocessing,
    pub night_policy: NightMode,
    pub training_days: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperparameterPoint {
    pub method: Method,
    pub model: ModelSpec,
    pub data: DataSpec,
}

pub const TRAINING_DAYS: [usize; 7] = [1, 3, 7, 14, 21, 30, 60];
pub const SEASONAL_MIN_TRAINING_DAYS: usize = 14;
pub const EPSILON_THRESHOLDS: [f64; 5] = [0.01, 0.05, 0.1, 0.5, 1.0];
pub const SEASON: usize = STEPS_PER_DAY;

impl HyperparameterPoint {
    pub fn validate(&self) -> Result<()> {
        let consistent = matches!(
            (self.method, &self.model),
            (Method::Persistence, ModelSpec::Persistence)
                | (Method::Arima | Method::Sarima, ModelSpec::Arima(_))
                | (Method::Nnr | Method::Snnr, ModelSpec::Nnr(_))
        );
        if !consistent {
            return Err(Error::Config(format!(
                "{} point carries the wrong model kind",
                self.method.as_str()
            )));
        }
        if self.data.training_days == 0 {
            return Err(Error::Config("training_days must be positive".into()));
        }
        match &self.model {
            ModelSpec::Persistence => {}
            ModelSpec::Arima(spec) => {
                spec.validate()?;
                let seasonal = spec.season > 0;
                if seasonal != (self.method == Method::Sarima) {
                    return Err(Error::Config("season length does not match the method".into()));
                }
            }
            ModelSpec::Nnr(spec) => {
                spec.validate()?;
                if (spec.seasonal_p > 0) != (self.method == Method::Snnr) {
                    return Err(Error::Config("seasonal lags do not match the method".into()));
                }
            }
        }
        if self.method.is_seasonal() {
            if self.data.training_days < SEASONAL_MIN_TRAINING_DAYS {
                return Err(Error::Config(format!(
                    "seasonal models need at least {SEASONAL_MIN_TRAINING_DAYS} training days, got {}",
                    self.data.training_days
                )));
            }
            if self.data.night_policy == NightMode::SunAboveHorizon {
                return Err(Error::Config("seasonal models cannot drop night values".into()));
            }
        }
        Ok(())
    }

    /// NNR spec in the units of the series the model is trained on.
    pub fn effective_nnr(&self) -> Option<NnrSpec> {
        match self.model {
            ModelSpec::Nnr(mut spec) => {
                if let (Neighborhood::MaxDistance(eps), Preprocessing::Irradiance) =
                    (spec.neighborhood, self.data.preprocessing)
                {
                    spec.neighborhood = Neighborhood::MaxDistance(eps * SOLAR_CONSTANT);
                }
                Some(spec)
            }
            _ => None,
        }
    }
}

fn arima_structures() -> Vec<ModelSpec> {
    let mut out = Vec::with_capacity(363);
    for p in 0..=10 {
        for d in 0..=2 {
            for q in 0..=10 {
                out.push(ModelSpec::Arima(ArimaSpec::arima(p, d, q)));
            }
        }
    }
    out
}

fn sarima_structures() -> Vec<ModelSpec> {
    let mut out = Vec::with_capacity(576);
    for p in [0, 1, 3] {
        for d in 0..=1 {
            for q in [0, 1, 3] {
                for sp in 0..=3 {
                    for sd in 0..=1 {
                        for sq in 0..=3 {
                            out.push(ModelSpec::Arima(ArimaSpec::sarima((p, d, q), (sp, sd, sq), SEASON)));
                        }
                    }
                }
            }
        }
    }
    out
}

fn neighborhoods() -> impl Iterator<Item = Neighborhood> {
    (1..=20)
        .map(Neighborhood::FixedK)
        .chain(EPSILON_THRESHOLDS.into_iter().map(Neighborhood::MaxDistance))
}

fn nnr_structures(seasonal: bool) -> Vec<ModelSpec> {
    let (p_max, seasonal_range) = if seasonal { (11, 1..=7) } else { (20, 0..=0) };
    let mut out = Vec::new();
    for p in 1..=p_max {
        for sp in seasonal_range.clone() {
            for weight in [WeightMode::Uniform, WeightMode::InverseDistance] {
                for neighborhood in neighborhoods() {
                    let spec = NnrSpec::new(p, weight, neighborhood);
                    out.push(ModelSpec::Nnr(if seasonal { spec.seasonal(sp, SEASON) } else { spec }));
                }
            }
        }
    }
    out
}

/// Model structures of one method, before crossing with data choices.
pub fn model_structures(method: Method) -> Vec<ModelSpec> {
    match method {
        Method::Persistence => vec![ModelSpec::Persistence],
        Method::Arima => arima_structures(),
        Method::Sarima => sarima_structures(),
        Method::Nnr => nnr_structures(false),
        Method::Snnr => nnr_structures(true),
    }
}

/// Admissible data choices of one method.
pub fn data_choices(method: Method) -> Vec<DataSpec> {
    if method == Method::Persistence {
        return [Preprocessing::Irradiance, Preprocessing::Transmissivity]
            .into_iter()
            .map(|preprocessing| DataSpec {
                preprocessing,
                night_policy: NightMode::AllDayAndNight,
                training_days: 1,
            })
            .collect();
    }
    let policies: &[NightMode] = if method.is_seasonal() {
        &[NightMode::AllDayAndNight, NightMode::ClockWindow]
    } else {
        &[
            NightMode::AllDayAndNight,
            NightMode::ClockWindow,
            NightMode::SunAboveHorizon,
        ]
    };
    let mut out = Vec::new();
    for preprocessing in [Preprocessing::Irradiance, Preprocessing::Transmissivity] {
        for &night_policy in policies {
            for training_days in TRAINING_DAYS {
                if method.is_seasonal() && training_days < SEASONAL_MIN_TRAINING_DAYS {
                    continue;
                }
                out.push(DataSpec {
                    preprocessing,
                    night_policy,
                    training_days,
                });
            }
        }
    }
    out
}

/// Every method's model structures crossed with its data choices, in
/// canonical order.
pub fn enumerate_full_grid() -> Vec<HyperparameterPoint> {
    let mut out = Vec::new();
    for method in Method::ALL {
        let data = data_choices(method);
        for model in model_structures(method) {
            for d in &data {
                out.push(HyperparameterPoint {
                    method,
                    model,
                    data: *d,
                });
            }
        }
    }
    out
}

/// Seasonal NNR on 60 days of transmissivity including night, uniform
/// weights, `p` in 1..=11, `P` in 1..=7 and `k` in 10..=20.
pub fn enumerate_reduced_grid() -> Vec<HyperparameterPoint> {
    let data = DataSpec {
        preprocessing: Preprocessing::Transmissivity,
        night_policy: NightMode::AllDayAndNight,
        training_days: 60,
    };
    let mut out = Vec::with_capacity(847);
    for p in 1..=11 {
        for sp in 1..=7 {
            for k in 10..=20 {
                let spec = NnrSpec::new(p, WeightMode::Uniform, Neighborhood::FixedK(k)).seasonal(sp, SEASON);
                out.push(HyperparameterPoint {
                    method: Method::Snnr,
                    model: ModelSpec::Nnr(spec),
                    data,
                });
            }
        }
    }
    out
}

/// Persistence of transmissivity scaled back by the extraterrestrial
/// irradiance: the reference every model is compared against.
pub fn reference_point() -> HyperparameterPoint {
    HyperparameterPoint {
        method: Method::Persistence,
        model: ModelSpec::Persistence,
        data: DataSpec {
            preprocessing: Preprocessing::Transmissivity,
            night_policy: NightMode::AllDayAndNight,
            training_days: 1,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_counts() {
        assert_eq!(model_structures(Method::Arima).len(), 363);
        assert_eq!(model_structures(Method::Nnr).len(), 1000);
        assert_eq!(model_structures(Method::Sarima).len(), 576);
        assert_eq!(model_structures(Method::Snnr).len(), 3850);
        assert_eq!(enumerate_reduced_grid().len(), 847);
    }

    #[test]
    fn full_grid_points_are_admissible() {
        let grid = enumerate_full_grid();
        assert!(grid.iter().all(|p| p.validate().is_ok()));
        let expected = 2 + 363 * 42 + 576 * 16 + 1000 * 42 + 3850 * 16;
        assert_eq!(grid.len(), expected);
        assert!(grid
            .iter()
            .filter(|p| p.method.is_seasonal())
            .all(|p| p.data.training_days >= 14 && p.data.night_policy != NightMode::SunAboveHorizon));
    }

    #[test]
    fn reduced_grid_is_inside_full_grid() {
        let full = enumerate_full_grid();
        for point in enumerate_reduced_grid() {
            assert!(full.contains(&point));
        }
    }

    #[test]
    fn epsilon_scales_for_irradiance() {
        let mut point = enumerate_full_grid()
            .into_iter()
            .find(|p| matches!(p.model, ModelSpec::Nnr(s) if s.neighborhood == Neighborhood::MaxDistance(0.5)))
            .unwrap();
        point.data.preprocessing = Preprocessing::Irradiance;
        assert_eq!(
            point.effective_nnr().unwrap().neighborhood,
            Neighborhood::MaxDistance(680.4)
        );
        point.data.preprocessing = Preprocessing::Transmissivity;
        assert_eq!(
            point.effective_nnr().unwrap().neighborhood,
            Neighborhood::MaxDistance(0.5)
        );
    }

    #[test]
    fn seasonal_restrictions() {
        let mut point = enumerate_reduced_grid()[0];
        point.data.training_days = 7;
        assert!(point.validate().is_err());
        point.data.training_days = 14;
        point.data.night_policy = NightMode::SunAboveHorizon;
        assert!(point.validate().is_err());
    }
}
