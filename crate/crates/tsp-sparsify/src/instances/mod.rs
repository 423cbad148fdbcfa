//! Instance representation, distance conventions, TSPLIB I/O, and synthetic
//! generators.
//!
//! Coordinates are Cartesian for `EUC_2D`, `MAN_2D`, and `ATT`. For `GEO`
//! the x coordinate is latitude and y is longitude, both in the TSPLIB
//! DDD.MM convention: the integer part is whole degrees and the fractional
//! part is literal minutes (40.30 means 40 degrees 30 minutes).

mod distance;
mod generate;
mod tsplib;

pub use distance::{ddmm_to_degrees, edge_distance, DistanceMatrix};
pub use generate::{generate_instance, GeneratorConfig};
pub use tsplib::{parse_tsplib, write_tsplib};

use crate::error::{Error, Result};

/// The four supported TSPLIB edge weight types.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistanceType {
    Euc2d,
    Man2d,
    Att,
    Geo,
}

impl DistanceType {
    pub const ALL: [DistanceType; 4] = [
        DistanceType::Euc2d,
        DistanceType::Man2d,
        DistanceType::Att,
        DistanceType::Geo,
    ];

    /// The TSPLIB keyword for this type.
    pub fn keyword(self) -> &'static str {
        match self {
            DistanceType::Euc2d => "EUC_2D",
            DistanceType::Man2d => "MAN_2D",
            DistanceType::Att => "ATT",
            DistanceType::Geo => "GEO",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "EUC_2D" => Ok(DistanceType::Euc2d),
            "MAN_2D" => Ok(DistanceType::Man2d),
            "ATT" => Ok(DistanceType::Att),
            "GEO" => Ok(DistanceType::Geo),
            other => Err(Error::UnsupportedEdgeWeightType(other.to_string())),
        }
    }
}

impl std::fmt::Display for DistanceType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.keyword())
    }
}

/// The five spatial distributions of the synthetic benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DistributionFamily {
    Uniform,
    Clustered,
    GridJitter,
    OutlierMixture,
    Corridor,
}

impl DistributionFamily {
    pub const ALL: [DistributionFamily; 5] = [
        DistributionFamily::Uniform,
        DistributionFamily::Clustered,
        DistributionFamily::GridJitter,
        DistributionFamily::OutlierMixture,
        DistributionFamily::Corridor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DistributionFamily::Uniform => "uniform",
            DistributionFamily::Clustered => "clustered",
            DistributionFamily::GridJitter => "grid_jitter",
            DistributionFamily::OutlierMixture => "outlier_mixture",
            DistributionFamily::Corridor => "corridor",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(DistributionFamily::Uniform),
            "clustered" => Ok(DistributionFamily::Clustered),
            "grid_jitter" => Ok(DistributionFamily::GridJitter),
            "outlier_mixture" => Ok(DistributionFamily::OutlierMixture),
            "corridor" => Ok(DistributionFamily::Corridor),
            other => Err(Error::InvalidArgument(format!(
                "unknown distribution family: {other}"
            ))),
        }
    }
}

impl std::fmt::Display for DistributionFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A symmetric TSP instance: named city coordinates under one distance
/// convention, with optional generator provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct TspInstance {
    pub name: String,
    pub distance_type: DistanceType,
    pub coords: Vec<(f64, f64)>,
    pub family: Option<DistributionFamily>,
    pub seed: Option<u64>,
}

impl TspInstance {
    pub fn new(
        name: impl Into<String>,
        distance_type: DistanceType,
        coords: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let inst = Self {
            name: name.into(),
            distance_type,
            coords,
            family: None,
            seed: None,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    fn validate(&self) -> Result<()> {
        if self.coords.len() < 3 {
            return Err(Error::InvalidInstance(format!(
                "need at least 3 cities, got {}",
                self.coords.len()
            )));
        }
        for (idx, &(x, y)) in self.coords.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(Error::InvalidInstance(format!(
                    "non-finite coordinate at city {idx}"
                )));
            }
            if self.distance_type == DistanceType::Geo {
                let lat = ddmm_to_degrees(x);
                let lon = ddmm_to_degrees(y);
                if !(-90.0..=90.0).contains(&lat) {
                    return Err(Error::InvalidInstance(format!(
                        "city {idx}: latitude {lat} out of [-90, 90]"
                    )));
                }
                if !(-180.0..=180.0).contains(&lon) {
                    return Err(Error::InvalidInstance(format!(
                        "city {idx}: longitude {lon} out of [-180, 180]"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Distance between two cities. Panics on out-of-range or equal indices;
    /// use [`edge_distance`] for the checked form.
    pub fn distance(&self, i: usize, j: usize) -> i64 {
        edge_distance(self, i, j).expect("valid city indices")
    }

    pub fn distance_matrix(&self) -> DistanceMatrix {
        DistanceMatrix::from_instance(self)
    }
}
