use kbasin::edmd::{self, Dictionary};
use kbasin::mak::{self, ReplicatorForm, ReplicatorParams};
use kbasin::sim::{self, IntegratorConfig};
use num_complex::Complex64;

fn roundtrip(model: &edmd::KoopmanModel, p: &[f64], eta: u32, floor: f64) -> f64 {
    let fwd = model.predict_forward_with(p, eta, 1.0).unwrap();
    let phi = model.eigenfunction_values(&fwd.state).unwrap();
    let mut acc = [Complex64::new(0.0, 0.0); 2];
    for (j, mu) in model.eigenvalues.iter().enumerate() {
        if mu.norm() > floor {
            let w = phi[j] * mu.powi(-(eta as i32));
            acc[0] += model.modes[(0, j)] * w;
            acc[1] += model.modes[(1, j)] * w;
        }
    }
    ((acc[0].re - p[0]).powi(2) + (acc[1].re - p[1]).powi(2)).sqrt()
}

fn main() {
    let params = ReplicatorParams::new(10.0, 0.1, 0.02).unwrap();
    let net = mak::build_replicator_network(&params, ReplicatorForm::ReducedTwoState).unwrap();
    let cfg = IntegratorConfig::default();
    let snaps = sim::generate_snapshots(&net, 100, 21, 0.125, &cfg, 210).unwrap();
    let model = edmd::fit(&snaps, &Dictionary::tensor_hermite(4, 2)).unwrap();

    // Round trips started from actual training states.
    for eta in 1u32..=4 {
        let mut errs: Vec<f64> = Vec::new();
        for c in (0..snaps.n_pairs()).step_by(20) {
            let p = [snaps.x[(0, c)], snaps.x[(1, c)]];
            errs.push(roundtrip(&model, &p, eta, 1e-3));
        }
        errs.sort_by(f64::total_cmp);
        let mean = errs.iter().sum::<f64>() / errs.len() as f64;
        println!(
            "training states eta {eta}: n {} mean {:.4} median {:.4} max {:.4}",
            errs.len(),
            mean,
            errs[errs.len() / 2],
            errs[errs.len() - 1]
        );
    }
}
