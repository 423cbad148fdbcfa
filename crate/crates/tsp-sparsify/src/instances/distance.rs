//! The four distance conventions and the memoized distance matrix.

use super::{DistanceType, TspInstance};
use crate::error::{Error, Result};

/// Earth radius used by the GEO convention, in kilometers.
const GEO_RADIUS: f64 = 6378.388;

/// Nearest integer, rounding halves up.
fn nint(x: f64) -> i64 {
    (x + 0.5).floor() as i64
}

/// Decodes a DDD.MM coordinate to fractional degrees: the integer part is
/// whole degrees (truncated toward zero so the sign carries through) and the
/// fractional part is literal minutes.
pub fn ddmm_to_degrees(x: f64) -> f64 {
    let deg = x.trunc();
    let minutes = x - deg;
    deg + minutes * 100.0 / 60.0
}

fn ddmm_to_radians(x: f64) -> f64 {
    let deg = x.trunc();
    let minutes = x - deg;
    std::f64::consts::PI * (deg + 5.0 * minutes / 3.0) / 180.0
}

fn geo_distance(lat_i: f64, lon_i: f64, lat_j: f64, lon_j: f64) -> i64 {
    let (phi_i, lam_i) = (ddmm_to_radians(lat_i), ddmm_to_radians(lon_i));
    let (phi_j, lam_j) = (ddmm_to_radians(lat_j), ddmm_to_radians(lon_j));
    let q1 = (lam_i - lam_j).cos();
    let q2 = (phi_i - phi_j).cos();
    let q3 = (phi_i + phi_j).cos();
    let arg = (((1.0 + q1) * q2 - (1.0 - q1) * q3) / 2.0).clamp(-1.0, 1.0);
    (GEO_RADIUS * arg.acos() + 1.0).floor() as i64
}

/// Integer distance between cities `i` and `j` under the instance's
/// convention. Symmetric and deterministic.
pub fn edge_distance(inst: &TspInstance, i: usize, j: usize) -> Result<i64> {
    let n = inst.n();
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange(format!(
            "city index out of range: ({i}, {j}) with n = {n}"
        )));
    }
    if i == j {
        return Err(Error::InvalidArgument(format!(
            "edge distance requires distinct cities, got ({i}, {j})"
        )));
    }
    let (xi, yi) = inst.coords[i];
    let (xj, yj) = inst.coords[j];
    let dx = xi - xj;
    let dy = yi - yj;
    let d = match inst.distance_type {
        DistanceType::Euc2d => nint((dx * dx + dy * dy).sqrt()),
        DistanceType::Man2d => nint(dx.abs() + dy.abs()),
        DistanceType::Att => ((dx * dx + dy * dy) / 10.0).sqrt().ceil() as i64,
        DistanceType::Geo => geo_distance(xi, yi, xj, yj),
    };
    Ok(d)
}

/// Symmetric integer distance matrix with zero diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<i64>,
}

impl DistanceMatrix {
    pub fn from_instance(inst: &TspInstance) -> Self {
        let n = inst.n();
        let mut data = vec![0i64; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = edge_distance(inst, i, j).expect("validated instance");
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self { n, data }
    }

    /// Builds a matrix from raw entries. The input must be symmetric with a
    /// zero diagonal and nonnegative entries.
    pub fn from_raw(n: usize, data: Vec<i64>) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInstance(format!(
                "need at least 3 cities, got {n}"
            )));
        }
        if data.len() != n * n {
            return Err(Error::SizeMismatch(format!(
                "matrix data length {} != {}",
                data.len(),
                n * n
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0 {
                return Err(Error::InvalidInstance(format!("nonzero diagonal at {i}")));
            }
            for j in (i + 1)..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::InvalidInstance(format!(
                        "asymmetric entries at ({i}, {j})"
                    )));
                }
                if data[i * n + j] < 0 {
                    return Err(Error::InvalidInstance(format!(
                        "negative distance at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds a matrix by evaluating `f` on every unordered pair.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> i64) -> Result<Self> {
        let mut data = vec![0i64; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = f(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self::from_raw(n, data)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    /// Returns a copy with every entry multiplied by `c`.
    pub fn scaled(&self, c: i64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&d| d * c).collect(),
        }
    }

    /// Length of the closed tour visiting `order`.
    pub fn tour_length(&self, order: &[usize]) -> i64 {
        let n = order.len();
        (0..n)
            .map(|k| self.dist(order[k], order[(k + 1) % n]))
            .sum()
    }
}
