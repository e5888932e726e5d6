//! Infinite-data limit: EDMD with dense uniform sampling of the triangle.

use kbasin::edmd::{self, Dictionary};
use kbasin::mak::{self, ReplicatorForm, ReplicatorParams, State};
use kbasin::sim::{self, IntegratorConfig, SnapshotMeta, SnapshotSet};
use ndarray::Array2;

fn main() {
    let params = ReplicatorParams::new(10.0, 0.1, 0.02).unwrap();
    let net = mak::build_replicator_network(&params, ReplicatorForm::ReducedTwoState).unwrap();
    let cfg = IntegratorConfig::default();
    let target = (0.117070_f64 * 0.125).exp();

    for p_total in [2000usize, 20_000, 100_000] {
        let pts = sim::sample_unit_simplex(2, p_total, 123);
        let mut x = Array2::zeros((2, p_total));
        let mut y = Array2::zeros((2, p_total));
        for (c, pt) in pts.iter().enumerate() {
            let yv = sim::integrate(&net, pt, 0.125, &cfg).unwrap();
            x[(0, c)] = pt[0];
            x[(1, c)] = pt[1];
            y[(0, c)] = yv[0];
            y[(1, c)] = yv[1];
        }
        let snaps = SnapshotSet {
            x,
            y,
            dt: 0.125,
            run_ids: vec![0; p_total],
            pair_indices: (0..p_total as u32).collect(),
            meta: SnapshotMeta {
                dt: 0.125,
                seed: 123,
                n_runs: p_total,
                points_per_run: 2,
                integrator: cfg,
            },
        };
        let model = edmd::fit(&snaps, &Dictionary::tensor_hermite(4, 2)).unwrap();
        let max_mu = model.eigenvalues.iter().map(|m| m.norm()).fold(0.0_f64, f64::max);
        let closest = model
            .eigenvalues
            .iter()
            .map(|m| (m - target).norm())
            .fold(f64::INFINITY, f64::min);
        println!(
            "P = {p_total}: rank {} sigma [{:.1e}, {:.1e}] resid {:.1e} max|mu| {max_mu:.5} gap {closest:.2e}",
            model.diagnostics.rank_g,
            model.diagnostics.sigma_min,
            model.diagnostics.sigma_max,
            model.diagnostics.projection_residual
        );
        // Displacement of the flow map at the three equilibria.
        let eq = mak::analytic_equilibria(&params).unwrap();
        print!("  |F(x*)-x*|:");
        for e in eq.iter() {
            let p = model.predict_forward(&[e[0], e[1]], 1).unwrap();
            let d = ((p.state[0] - e[0]).powi(2) + (p.state[1] - e[1]).powi(2)).sqrt();
            print!(" {d:.2e}");
        }
        println!();
        let _ = State::new(vec![0.0]).ok();
    }
}
