//! Exhaustive and dynamic-programming exact solvers for small instances.

use super::Tour;
use crate::error::{Error, Result};
use crate::instances::DistanceMatrix;

/// Exhaustive search over all (n-1)!/2 distinct tours. Ties resolve to the
/// lexicographically smallest order starting at city 0.
pub fn brute_force(dm: &DistanceMatrix) -> Result<Tour> {
    let n = dm.n();
    if !(3..=10).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "brute force supports 3 <= n <= 10, got {n}"
        )));
    }
    let mut rest: Vec<usize> = (1..n).collect();
    let mut best_order: Option<Vec<usize>> = None;
    let mut best_len = i64::MAX;
    let mut current = Vec::with_capacity(n);
    current.push(0);
    // Lexicographic depth-first enumeration; the direction canonicalization
    // order[1] < order[n-1] visits each undirected tour exactly once.
    fn recurse(
        dm: &DistanceMatrix,
        current: &mut Vec<usize>,
        rest: &mut Vec<usize>,
        best_order: &mut Option<Vec<usize>>,
        best_len: &mut i64,
    ) {
        let n = dm.n();
        if rest.is_empty() {
            if current[1] > current[n - 1] {
                return; // reversed duplicate
            }
            let len = dm.tour_length(current);
            if len < *best_len {
                *best_len = len;
                *best_order = Some(current.clone());
            }
            return;
        }
        for idx in 0..rest.len() {
            let city = rest.remove(idx);
            current.push(city);
            recurse(dm, current, rest, best_order, best_len);
            current.pop();
            rest.insert(idx, city);
        }
    }
    recurse(dm, &mut current, &mut rest, &mut best_order, &mut best_len);
    Tour::from_order(best_order.expect("at least one tour"), dm, true)
}

/// Bitmask dynamic program over subsets. Exact up to the memory bound.
pub fn held_karp(dm: &DistanceMatrix) -> Result<Tour> {
    let n = dm.n();
    if !(3..=20).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "the subset DP supports 3 <= n <= 20, got {n}"
        )));
    }
    let m = n - 1; // cities 1..n, indexed 0..m
    let full: usize = (1 << m) - 1;
    const INF: u32 = u32::MAX / 2;
    // cost[mask * m + j]: cheapest path from city 0 through exactly the
    // cities of `mask`, ending at city j+1
    let mut cost = vec![INF; (full + 1) * m];
    let mut from = vec![u8::MAX; (full + 1) * m];
    for j in 0..m {
        cost[(1 << j) * m + j] = dm.dist(0, j + 1) as u32;
    }
    for mask in 1..=full {
        for j in 0..m {
            if mask & (1 << j) == 0 {
                continue;
            }
            let c = cost[mask * m + j];
            if c >= INF {
                continue;
            }
            let rest = full & !mask;
            let mut bits = rest;
            while bits != 0 {
                let k = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let next_mask = mask | (1 << k);
                let cand = c + dm.dist(j + 1, k + 1) as u32;
                if cand < cost[next_mask * m + k] {
                    cost[next_mask * m + k] = cand;
                    from[next_mask * m + k] = j as u8;
                }
            }
        }
    }
    let mut best_end = 0usize;
    let mut best = i64::MAX;
    for j in 0..m {
        let total = cost[full * m + j] as i64 + dm.dist(j + 1, 0);
        if total < best {
            best = total;
            best_end = j;
        }
    }
    let mut order = vec![0usize; n];
    let mut mask = full;
    let mut j = best_end;
    for slot in (1..n).rev() {
        order[slot] = j + 1;
        let prev = from[mask * m + j];
        mask &= !(1 << j);
        if mask == 0 {
            break;
        }
        j = prev as usize;
    }
    Tour::from_order(order, dm, true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};

    #[test]
    fn three_cities_have_one_tour() {
        let dm = DistanceMatrix::from_raw(3, vec![0, 5, 7, 5, 0, 3, 7, 3, 0]).unwrap();
        let t = brute_force(&dm).unwrap();
        assert_eq!(t.length, 15);
        assert!(t.proven_optimal);
        let t2 = held_karp(&dm).unwrap();
        assert_eq!(t2.length, 15);
    }

    #[test]
    fn unit_square_is_four() {
        let dm =
            DistanceMatrix::from_raw(4, vec![0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0])
                .unwrap();
        assert_eq!(brute_force(&dm).unwrap().length, 4);
        assert_eq!(held_karp(&dm).unwrap().length, 4);
    }

    #[test]
    fn dp_matches_exhaustive_on_random_instances() {
        let cfg = GeneratorConfig::default();
        for seed in 0..25u64 {
            let n = 5 + (seed as usize % 5);
            let dt = DistanceType::ALL[seed as usize % 4];
            let fam = DistributionFamily::ALL[seed as usize % 5];
            let inst = generate_instance(fam, dt, n, seed, &cfg).unwrap();
            let dm = inst.distance_matrix();
            let bf = brute_force(&dm).unwrap();
            let hk = held_karp(&dm).unwrap();
            assert_eq!(bf.length, hk.length, "seed {seed} n {n}");
        }
    }

    #[test]
    fn rejects_out_of_range_sizes() {
        let dm = DistanceMatrix::from_raw(3, vec![0, 1, 1, 1, 0, 1, 1, 1, 0]).unwrap();
        assert!(brute_force(&dm).is_ok());
        let cfg = GeneratorConfig::default();
        let inst = generate_instance(
            DistributionFamily::Uniform,
            DistanceType::Euc2d,
            11,
            1,
            &cfg,
        )
        .unwrap();
        assert!(brute_force(&inst.distance_matrix()).is_err());
    }

    #[test]
    fn dp_handles_sixteen_cities() {
        let cfg = GeneratorConfig::default();
        let inst = generate_instance(
            DistributionFamily::Uniform,
            DistanceType::Euc2d,
            16,
            3,
            &cfg,
        )
        .unwrap();
        let t = held_karp(&inst.distance_matrix()).unwrap();
        assert!(t.proven_optimal);
        assert_eq!(t.order.len(), 16);
    }
}
