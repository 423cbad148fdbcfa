use std::time::Instant;
use tsp_sparsify::candidates::{popmusic_candidates, PopmusicConfig};
use tsp_sparsify::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};
use tsp_sparsify::oracle::{branch_and_bound, BnbBudget};
use tsp_sparsify::bench::coverage_of;

fn main() {
    let gcfg = GeneratorConfig::default();
    let budget = BnbBudget { max_nodes: 3000, max_queue: 150_000 };
    for n in [50usize, 100] {
        for (starts, r) in [(16usize, 50usize), (16, 60), (20, 50)] {
            let mut cov_sum = 0.0; let mut epn_sum = 0.0; let mut cnt = 0.0; let mut worst: f64 = 1.0; let mut ms = 0.0;
            for fam in DistributionFamily::ALL {
                for seed in 0..4u64 {
                    let dt = DistanceType::ALL[seed as usize % 4];
                    let inst = generate_instance(fam, dt, n, 3000 + seed, &gcfg).unwrap();
                    let dm = inst.distance_matrix();
                    let out = branch_and_bound(&dm, &budget).unwrap();
                    if !out.tour.proven_optimal { continue; }
                    let t0 = Instant::now();
                    let p = popmusic_candidates(&dm, &PopmusicConfig { seed, starts, subpath_len: r, max_rounds: 60, ..PopmusicConfig::default() }).unwrap();
                    ms += t0.elapsed().as_secs_f64() * 1000.0;
                    let c = coverage_of(&p, &out.tour);
                    cov_sum += c; epn_sum += p.edges_per_node(); cnt += 1.0;
                    worst = worst.min(c);
                }
            }
            println!("n={n} starts={starts} r={r}: cov {:.4} (worst {:.3}) epn {:.2}, {:.1} ms", cov_sum/cnt, worst, epn_sum/cnt, ms/cnt);
        }
    }
}
