//! Why does the corner equilibrium not survive the fixed-point search?

use kbasin::basin::nelder_mead::{minimize, NmOptions};
use kbasin::edmd::{self, Dictionary};
use kbasin::mak::{self, ReplicatorForm, ReplicatorParams};
use kbasin::sim::{self, IntegratorConfig};

fn main() {
    let params = ReplicatorParams::new(10.0, 0.1, 0.02).unwrap();
    let net = mak::build_replicator_network(&params, ReplicatorForm::ReducedTwoState).unwrap();
    let cfg = IntegratorConfig::default();
    let snaps = sim::generate_snapshots(&net, 100, 21, 0.125, &cfg, 7).unwrap();
    let model = edmd::fit(&snaps, &Dictionary::tensor_hermite(4, 2)).unwrap();

    let objective = |x: &[f64]| -> f64 {
        let p = model.predict_forward_with(x, 1, 1.0).unwrap();
        let mut acc = 0.0;
        for (a, b) in p.state.iter().zip(x.iter()) {
            acc += (a - b) * (a - b);
        }
        let mut excess = 0.0;
        let sum: f64 = x.iter().sum();
        for &v in x {
            if v < 0.0 {
                excess -= v;
            }
        }
        if sum > 1.0 {
            excess += sum - 1.0;
        }
        acc.sqrt() + 10.0 * excess
    };

    // Objective profile along the bottom edge.
    println!("objective along x2 = 0.002:");
    for i in 0..12 {
        let x1 = 0.75 + 0.025 * i as f64;
        println!("  x1 = {x1:.3}: {:.3e}", objective(&[x1, 0.002]));
    }
    println!("objective at node (1, 0): {:.3e}", objective(&[1.0, 0.0]));
    println!(
        "objective at saddle: {:.3e}",
        objective(&[0.9219, 0.013017])
    );

    // Nelder-Mead descents from starts near the corner.
    for start in [
        [0.95, 0.01],
        [0.98, 0.005],
        [0.99, 0.002],
        [0.96, 0.03],
        [0.93, 0.005],
    ] {
        let mut f = |x: &[f64]| objective(x);
        let r = minimize(&mut f, &start, &NmOptions::default());
        println!(
            "NM from {start:?} -> ({:+.5}, {:+.5}) f = {:.3e} iters {}",
            r.x[0], r.x[1], r.fval, r.iters
        );
    }
}
