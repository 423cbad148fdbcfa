//! TSPLIB text format, restricted to coordinate-based symmetric instances
//! with the four supported edge weight types.

use super::{DistanceType, TspInstance};
use crate::error::{Error, Result};

/// Parses a TSPLIB instance.
///
/// Requires NAME, TYPE: TSP, DIMENSION, one of the four supported
/// EDGE_WEIGHT_TYPE values, and a NODE_COORD_SECTION with exactly DIMENSION
/// coordinate lines.
pub fn parse_tsplib(text: &str) -> Result<TspInstance> {
    let mut name: Option<String> = None;
    let mut dimension: Option<usize> = None;
    let mut edge_weight_type: Option<DistanceType> = None;
    let mut saw_type = false;
    let mut coords: Option<Vec<(f64, f64)>> = None;

    let mut lines = text.lines().enumerate();
    while let Some((lineno, raw)) = lines.next() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line == "EOF" {
            break;
        }
        if line == "NODE_COORD_SECTION" {
            let dim = dimension.ok_or_else(|| Error::Parse {
                line: lineno + 1,
                message: "NODE_COORD_SECTION before DIMENSION".to_string(),
            })?;
            let mut cs = Vec::with_capacity(dim);
            for _ in 0..dim {
                let (lineno, raw) = lines.next().ok_or_else(|| Error::Parse {
                    line: lineno + 1,
                    message: format!("expected {dim} coordinate lines, input ended early"),
                })?;
                let mut parts = raw.split_whitespace();
                let parse_f = |tok: Option<&str>, what: &str| -> Result<f64> {
                    tok.ok_or_else(|| Error::Parse {
                        line: lineno + 1,
                        message: format!("missing {what}"),
                    })?
                    .parse::<f64>()
                    .map_err(|_| Error::Parse {
                        line: lineno + 1,
                        message: format!("malformed {what}"),
                    })
                };
                let _id = parse_f(parts.next(), "node id")?;
                let x = parse_f(parts.next(), "x coordinate")?;
                let y = parse_f(parts.next(), "y coordinate")?;
                if parts.next().is_some() {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: "trailing tokens on coordinate line".to_string(),
                    });
                }
                cs.push((x, y));
            }
            coords = Some(cs);
            continue;
        }

        let (key, value) = match line.split_once(':') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    message: format!("expected `KEY : value`, got `{line}`"),
                })
            }
        };
        match key {
            "NAME" => name = Some(value.to_string()),
            "TYPE" => {
                if value != "TSP" {
                    return Err(Error::Parse {
                        line: lineno + 1,
                        message: format!("unsupported TYPE: {value}"),
                    });
                }
                saw_type = true;
            }
            "DIMENSION" => {
                dimension = Some(value.parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno + 1,
                    message: format!("malformed DIMENSION: {value}"),
                })?);
            }
            "EDGE_WEIGHT_TYPE" => edge_weight_type = Some(DistanceType::parse(value)?),
            // COMMENT and unimplemented-but-harmless keys are ignored.
            _ => {}
        }
    }

    let name = name.ok_or_else(|| Error::MissingField("NAME".to_string()))?;
    if !saw_type {
        return Err(Error::MissingField("TYPE".to_string()));
    }
    let dimension = dimension.ok_or_else(|| Error::MissingField("DIMENSION".to_string()))?;
    let distance_type =
        edge_weight_type.ok_or_else(|| Error::MissingField("EDGE_WEIGHT_TYPE".to_string()))?;
    let coords = coords.ok_or_else(|| Error::MissingField("NODE_COORD_SECTION".to_string()))?;
    if coords.len() != dimension {
        return Err(Error::SizeMismatch(format!(
            "DIMENSION is {dimension} but {} coordinates were read",
            coords.len()
        )));
    }
    TspInstance::new(name, distance_type, coords)
}

/// Writes an instance in the keyword order NAME, TYPE, DIMENSION,
/// EDGE_WEIGHT_TYPE, NODE_COORD_SECTION, EOF. Coordinates carry six decimal
/// places, which the round-trip contract relies on.
pub fn write_tsplib(inst: &TspInstance) -> String {
    let mut out = String::new();
    out.push_str(&format!("NAME : {}\n", inst.name));
    out.push_str("TYPE : TSP\n");
    out.push_str(&format!("DIMENSION : {}\n", inst.n()));
    out.push_str(&format!("EDGE_WEIGHT_TYPE : {}\n", inst.distance_type));
    out.push_str("NODE_COORD_SECTION\n");
    for (idx, &(x, y)) in inst.coords.iter().enumerate() {
        out.push_str(&format!("{} {:.6} {:.6}\n", idx + 1, x, y));
    }
    out.push_str("EOF\n");
    out
}
