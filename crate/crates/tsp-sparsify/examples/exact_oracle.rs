//! Cross-checks the three exact solvers and shows branch-and-bound solving a
//! fifty-city instance with its root bound.

use tsp_sparsify::instances::{generate_instance, DistanceType, DistributionFamily, GeneratorConfig};
use tsp_sparsify::oracle::{branch_and_bound, brute_force, held_karp, BnbBudget};

fn main() -> tsp_sparsify::Result<()> {
    let cfg = GeneratorConfig::default();
    for seed in 0..5u64 {
        let inst = generate_instance(DistributionFamily::Uniform, DistanceType::Att, 9, seed, &cfg)?;
        let dm = inst.distance_matrix();
        let bf = brute_force(&dm)?;
        let dp = held_karp(&dm)?;
        let bb = branch_and_bound(&dm, &BnbBudget::default())?;
        assert_eq!(bf.length, dp.length);
        assert_eq!(dp.length, bb.tour.length);
        println!("n=9 seed {seed}: all three solvers agree on length {}", bf.length);
    }

    let inst = generate_instance(DistributionFamily::Clustered, DistanceType::Euc2d, 50, 3, &cfg)?;
    let out = branch_and_bound(&inst.distance_matrix(), &BnbBudget::default())?;
    println!(
        "n=50 clustered: optimal {} (proven {}), root bound {:.0}, {} nodes",
        out.tour.length, out.tour.proven_optimal, out.root_bound, out.nodes_evaluated
    );
    Ok(())
}
