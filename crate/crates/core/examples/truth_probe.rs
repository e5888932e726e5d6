//! Ground truth for the reference configuration: traces the saddle's stable
//! manifold by backward integration and reports the true margin, then checks
//! the fitted flow-map displacement at each analytic equilibrium.

use kbasin::edmd::{self, Dictionary};
use kbasin::mak::{self, ReplicatorForm, ReplicatorParams};
use kbasin::sim::{self, IntegratorConfig};

fn rk4_backward(
    net: &mak::StoichiometricNetwork,
    x0: [f64; 2],
    h: f64,
    max_steps: usize,
) -> Vec<[f64; 2]> {
    let mut out = vec![x0];
    let mut x = x0;
    let mut f = vec![0.0; 2];
    for _ in 0..max_steps {
        let mut stage = |p: [f64; 2]| -> [f64; 2] {
            net.rhs_into(&p, &mut f);
            [-f[0], -f[1]]
        };
        let k1 = stage(x);
        let k2 = stage([x[0] + 0.5 * h * k1[0], x[1] + 0.5 * h * k1[1]]);
        let k3 = stage([x[0] + 0.5 * h * k2[0], x[1] + 0.5 * h * k2[1]]);
        let k4 = stage([x[0] + h * k3[0], x[1] + h * k3[1]]);
        x = [
            x[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            x[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ];
        if x[0] < -0.02 || x[1] < -0.02 || x[0] + x[1] > 1.05 || x[0] > 1.05 {
            break;
        }
        out.push(x);
    }
    out
}

fn main() {
    let params = ReplicatorParams::new(10.0, 0.1, 0.02).unwrap();
    let net = mak::build_replicator_network(&params, ReplicatorForm::ReducedTwoState).unwrap();
    let eq = mak::analytic_equilibria(&params).unwrap();
    let saddle = [eq[1][0], eq[1][1]];
    let focus = [eq[2][0], eq[2][1]];

    // Stable eigenvector of the saddle Jacobian.
    let jac = net.jacobian(&saddle).unwrap();
    let eigs = mak::eig2(&jac);
    let lam_s = eigs[0].re.min(eigs[1].re);
    // (J - lam I) v = 0 -> v = (1, -(j00 - lam)/j01).
    let v = [1.0, -(jac[(0, 0)] - lam_s) / jac[(0, 1)]];
    let vn = (v[0] * v[0] + v[1] * v[1]).sqrt();
    let v = [v[0] / vn, v[1] / vn];
    println!("saddle {saddle:?}, stable eigenvalue {lam_s:.6}, direction {v:?}");

    let eps = 1e-5;
    let mut manifold: Vec<[f64; 2]> = Vec::new();
    for sgn in [-1.0, 1.0] {
        let start = [saddle[0] + sgn * eps * v[0], saddle[1] + sgn * eps * v[1]];
        let branch = rk4_backward(&net, start, 0.02, 2_000_000);
        println!(
            "branch sgn {sgn}: {} pts, end {:?}",
            branch.len(),
            branch.last().unwrap()
        );
        manifold.extend(branch);
    }
    let true_margin = manifold
        .iter()
        .map(|p| ((p[0] - focus[0]).powi(2) + (p[1] - focus[1]).powi(2)).sqrt())
        .fold(f64::INFINITY, f64::min);
    println!("true margin (min dist focus -> W^s): {true_margin:.4}");

    // Sample points of the manifold for later comparison.
    let stride = (manifold.len() / 40).max(1);
    for (i, p) in manifold.iter().enumerate() {
        if i % stride == 0 {
            println!("W^s {:.5} {:.5}", p[0], p[1]);
        }
    }

    // Fitted flow-map displacement at the equilibria per seed.
    let cfg = IntegratorConfig::default();
    for seed in [1u64, 4, 7, 42] {
        let snaps = sim::generate_snapshots(&net, 100, 21, 0.125, &cfg, seed).unwrap();
        let model = edmd::fit(&snaps, &Dictionary::tensor_hermite(4, 2)).unwrap();
        print!("seed {seed}: |F(x*) - x*| =");
        for e in &eq {
            let p = model.predict_forward(&[e[0], e[1]], 1).unwrap();
            let d = ((p.state[0] - e[0]).powi(2) + (p.state[1] - e[1]).powi(2)).sqrt();
            print!(" {d:.2e}");
        }
        println!();
    }
}
