//! Fluid behavior of the conditioned workload: the ensemble sup-norm of the
//! reflected netput collapses as n grows, ending below 0.05 at n = 10⁴
//! (exponential arrivals and services).

use transitory_sim_core::reflection::{netput_gamma_n, Reflect, ServiceModel};
use transitory_sim_core::samplers::sample_conditioned_renewal_rejection;
use transitory_sim_core::stream::RandomStream;
use transitory_sim_core::{InterarrivalModel, TimeHorizon};

fn sup_norm_p95(n: usize, rows: usize, seed: u64) -> f64 {
    let horizon = TimeHorizon::new(1.0).unwrap();
    let model = InterarrivalModel::exponential(n as f64).unwrap();
    let mut sups: Vec<f64> = (0..rows)
        .map(|r| {
            let mut rng = RandomStream::new(seed, r as u64).rng();
            let (row, _) =
                sample_conditioned_renewal_rejection(&model, n, horizon, &mut rng, 10_000_000)
                    .unwrap();
            let services = ServiceModel::Exponential.sample_vec(n, &mut rng);
            let phi = netput_gamma_n(&row, &services).unwrap().reflect();
            phi.post_jump_values()
                .iter()
                .fold(phi.initial_value(), |acc, &v| acc.max(v))
        })
        .collect();
    sups.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = ((0.95 * rows as f64).ceil() as usize).clamp(1, rows);
    sups[rank - 1]
}

#[test]
fn workload_sup_norm_decreases_along_n() {
    let rows = 150;
    let p95: Vec<f64> = [100usize, 1000, 10_000]
        .iter()
        .enumerate()
        .map(|(k, &n)| sup_norm_p95(n, rows, 7000 + k as u64))
        .collect();
    println!("workload sup-norm p95 along n: {p95:?}");
    assert!(p95[0] > p95[1] && p95[1] > p95[2], "{p95:?}");
    assert!(p95[2] < 0.05, "p95 at n=10^4 is {}", p95[2]);
}
