//! Seeded synthetic instance generators for the five spatial distributions.
//!
//! Cartesian types sample inside the canonical box [0, 1e6]^2; the geographic
//! type samples latitude in [-80, 80] and longitude in [-180, 180] degrees
//! and then encodes DDD.MM. Coordinates are quantized to six decimals so a
//! written file parses back to bit-identical values.

use super::{DistanceType, DistributionFamily, TspInstance};
use crate::error::{Error, Result};
use crate::seeding::Prng;

/// Side of the canonical Cartesian box.
pub const BOX_SIDE: f64 = 1_000_000.0;

/// Generator knobs. Defaults match the benchmark configuration; every value
/// can be overridden from the config file or CLI flags.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    /// Number of Gaussian clusters for the clustered family.
    pub clusters: usize,
    /// Cluster standard deviation as a fraction of each dimension's range.
    pub cluster_sigma_frac: f64,
    /// Jitter amplitude as a fraction of the grid cell size (plus or minus).
    pub grid_jitter_frac: f64,
    /// Fraction of points drawn from the full box in the outlier mixture.
    pub outlier_frac: f64,
    /// Central core extent (fraction of each dimension) holding the rest.
    pub outlier_core_frac: f64,
    /// Corridor aspect ratio: the second dimension is the first divided by this.
    pub corridor_aspect: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            clusters: 5,
            cluster_sigma_frac: 0.05,
            grid_jitter_frac: 0.2,
            outlier_frac: 0.1,
            outlier_core_frac: 0.6,
            corridor_aspect: 10.0,
        }
    }
}

/// Sampling rectangle in generator space (degrees for GEO).
struct SampleBox {
    x: (f64, f64),
    y: (f64, f64),
}

fn base_box(dt: DistanceType) -> SampleBox {
    match dt {
        DistanceType::Geo => SampleBox {
            // x is latitude, y is longitude
            x: (-80.0, 80.0),
            y: (-180.0, 180.0),
        },
        _ => SampleBox {
            x: (0.0, BOX_SIDE),
            y: (0.0, BOX_SIDE),
        },
    }
}

/// Encodes fractional degrees as DDD.MM.
fn degrees_to_ddmm(deg: f64) -> f64 {
    let whole = deg.trunc();
    let minutes = (deg - whole).abs() * 60.0;
    whole + deg.signum() * minutes / 100.0
}

fn quantize(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    v.clamp(lo, hi)
}

fn sample_points(
    family: DistributionFamily,
    bbox: &SampleBox,
    n: usize,
    rng: &mut Prng,
    cfg: &GeneratorConfig,
) -> Vec<(f64, f64)> {
    let (x_lo, x_hi) = bbox.x;
    let (y_lo, y_hi) = bbox.y;
    let x_range = x_hi - x_lo;
    let y_range = y_hi - y_lo;
    let mut pts = Vec::with_capacity(n);
    match family {
        DistributionFamily::Uniform => {
            for _ in 0..n {
                pts.push((rng.range_f64(x_lo, x_hi), rng.range_f64(y_lo, y_hi)));
            }
        }
        DistributionFamily::Clustered => {
            let centers: Vec<(f64, f64)> = (0..cfg.clusters)
                .map(|_| (rng.range_f64(x_lo, x_hi), rng.range_f64(y_lo, y_hi)))
                .collect();
            let sx = cfg.cluster_sigma_frac * x_range;
            let sy = cfg.cluster_sigma_frac * y_range;
            for _ in 0..n {
                let (cx, cy) = centers[rng.below(centers.len())];
                let x = clamp(cx + sx * rng.normal(), x_lo, x_hi);
                let y = clamp(cy + sy * rng.normal(), y_lo, y_hi);
                pts.push((x, y));
            }
        }
        DistributionFamily::GridJitter => {
            let m = (n as f64).sqrt().ceil() as usize;
            let cell_x = x_range / m as f64;
            let cell_y = y_range / m as f64;
            for idx in 0..n {
                let row = idx / m;
                let col = idx % m;
                let cx = x_lo + (col as f64 + 0.5) * cell_x;
                let cy = y_lo + (row as f64 + 0.5) * cell_y;
                let jx = rng.range_f64(-cfg.grid_jitter_frac, cfg.grid_jitter_frac) * cell_x;
                let jy = rng.range_f64(-cfg.grid_jitter_frac, cfg.grid_jitter_frac) * cell_y;
                pts.push((clamp(cx + jx, x_lo, x_hi), clamp(cy + jy, y_lo, y_hi)));
            }
        }
        DistributionFamily::OutlierMixture => {
            let margin = (1.0 - cfg.outlier_core_frac) / 2.0;
            let core_x = (x_lo + margin * x_range, x_hi - margin * x_range);
            let core_y = (y_lo + margin * y_range, y_hi - margin * y_range);
            for _ in 0..n {
                if rng.unit_f64() < cfg.outlier_frac {
                    pts.push((rng.range_f64(x_lo, x_hi), rng.range_f64(y_lo, y_hi)));
                } else {
                    pts.push((
                        rng.range_f64(core_x.0, core_x.1),
                        rng.range_f64(core_y.0, core_y.1),
                    ));
                }
            }
        }
        DistributionFamily::Corridor => {
            // Full range along x; the y extent is the x range over the
            // aspect ratio, centered in the y range.
            let strip = x_range / cfg.corridor_aspect;
            let y_mid = (y_lo + y_hi) / 2.0;
            let s_lo = (y_mid - strip / 2.0).max(y_lo);
            let s_hi = (y_mid + strip / 2.0).min(y_hi);
            for _ in 0..n {
                pts.push((rng.range_f64(x_lo, x_hi), rng.range_f64(s_lo, s_hi)));
            }
        }
    }
    pts
}

/// Generates a deterministic synthetic instance.
pub fn generate_instance(
    family: DistributionFamily,
    dt: DistanceType,
    n: usize,
    seed: u64,
    cfg: &GeneratorConfig,
) -> Result<TspInstance> {
    if n < 3 {
        return Err(Error::InvalidInstance(format!(
            "need at least 3 cities, got {n}"
        )));
    }
    let mut rng = Prng::new(seed);
    let bbox = base_box(dt);
    let raw = sample_points(family, &bbox, n, &mut rng, cfg);
    let coords: Vec<(f64, f64)> = raw
        .into_iter()
        .map(|(x, y)| {
            if dt == DistanceType::Geo {
                (quantize(degrees_to_ddmm(x)), quantize(degrees_to_ddmm(y)))
            } else {
                (quantize(x), quantize(y))
            }
        })
        .collect();
    let name = format!("{}-{}-n{}-s{}", family.name(), dt.keyword(), n, seed);
    let mut inst = TspInstance::new(name, dt, coords)?;
    inst.family = Some(family);
    inst.seed = Some(seed);
    Ok(inst)
}
