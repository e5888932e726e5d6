//! Conditioning experiments for the reference fit.

use kbasin::edmd::{self, Dictionary};
use kbasin::mak::{self, ReplicatorForm, ReplicatorParams};
use kbasin::sim::{self, IntegratorConfig};

fn spectrum_summary(tag: &str, model: &edmd::KoopmanModel) {
    let target = (0.117070_f64 * 0.125).exp();
    let mut best = f64::INFINITY;
    let mut max_mag = 0.0_f64;
    for mu in &model.eigenvalues {
        best = best.min((mu.norm() - target).abs().min((mu - target).norm()));
        max_mag = max_mag.max(mu.norm());
    }
    println!(
        "{tag}: rank {} sigma [{:.2e}, {:.2e}] resid {:.2e} max|mu| {:.6} closest-to-target {:.2e}",
        model.diagnostics.rank_g,
        model.diagnostics.sigma_min,
        model.diagnostics.sigma_max,
        model.diagnostics.projection_residual,
        max_mag,
        best
    );
    let mut mags: Vec<(f64, f64, f64)> = model
        .eigenvalues
        .iter()
        .zip(model.eigenfunction_meta.iter())
        .map(|(m, meta)| (m.norm(), m.re, meta.variation))
        .collect();
    mags.sort_by(|a, b| b.0.total_cmp(&a.0));
    print!("   top:");
    for (mag, re, var) in mags.iter().take(6) {
        print!(" |mu|={mag:.4}(re {re:+.4}, var {var:.2e})");
    }
    println!();
}

fn main() {
    let params = ReplicatorParams::new(10.0, 0.1, 0.02).unwrap();
    let net = mak::build_replicator_network(&params, ReplicatorForm::ReducedTwoState).unwrap();
    let cfg = IntegratorConfig::default();

    for (runs, pts, seed) in [
        (100usize, 21usize, 42u64),
        (100, 21, 7),
        (100, 21, 1),
        (400, 21, 42),
        (100, 81, 42),
        (2000, 21, 42),
    ] {
        let snaps = sim::generate_snapshots(&net, runs, pts, 0.125, &cfg, seed).unwrap();
        let model = edmd::fit(&snaps, &Dictionary::tensor_hermite(4, 2)).unwrap();
        spectrum_summary(&format!("hermite4 {runs}x{pts} seed{seed}"), &model);
    }

    // Lower-degree dictionaries for comparison.
    for d in [2usize, 3] {
        let snaps = sim::generate_snapshots(&net, 100, 21, 0.125, &cfg, 42).unwrap();
        let model = edmd::fit(&snaps, &Dictionary::tensor_hermite(d, 2)).unwrap();
        spectrum_summary(&format!("hermite{d} 100x21 seed42"), &model);
    }
}
