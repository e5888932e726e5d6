//! Wide seed scan: joint satisfaction of the reference-configuration checks.

use kbasin::basin;
use kbasin::edmd::{self, Dictionary};
use kbasin::mak::{self, ReplicatorForm, ReplicatorParams};
use kbasin::sim::{self, IntegratorConfig};

fn main() {
    let params = ReplicatorParams::new(10.0, 0.1, 0.02).unwrap();
    let net = mak::build_replicator_network(&params, ReplicatorForm::ReducedTwoState).unwrap();
    let cfg = IntegratorConfig::default();
    let eq = mak::analytic_equilibria(&params).unwrap();
    let oracle = [[1.0, 0.0], [eq[1][0], eq[1][1]], [eq[2][0], eq[2][1]]];
    let target = (0.117070_f64 * 0.125).exp();
    let node = basin::classify_equilibrium(&net, &oracle[0]).unwrap();
    let focus = basin::classify_equilibrium(&net, &oracle[2]).unwrap();

    let mut counts = [0usize; 7];
    let mut joint = 0usize;
    let mut total = 0usize;
    for seed in 0..512u64 {
        total += 1;
        let snaps = match sim::generate_snapshots(&net, 100, 21, 0.125, &cfg, seed) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let model = match edmd::fit(&snaps, &Dictionary::tensor_hermite(4, 2)) {
            Ok(m) => m,
            Err(_) => continue,
        };
        let max_mu = model.eigenvalues.iter().map(|m| m.norm()).fold(0.0_f64, f64::max);
        let gap = model
            .eigenvalues
            .iter()
            .map(|m| (m - target).norm())
            .fold(f64::INFINITY, f64::min);

        let fps = basin::find_fixed_points(&model, &basin::FixedPointOptions::default(), Some(&net));
        let three = match &fps {
            Ok(fps) => {
                let mut errs = [f64::INFINITY; 3];
                for (i, o) in oracle.iter().enumerate() {
                    for fp in fps {
                        let d = ((fp.location[0] - o[0]).powi(2)
                            + (fp.location[1] - o[1]).powi(2))
                        .sqrt();
                        errs[i] = errs[i].min(d);
                    }
                }
                fps.len() == 3 && errs.iter().all(|&d| d < 1e-2)
            }
            Err(_) => false,
        };

        let c_mu = max_mu <= 1.05;
        let c_gap = gap < 0.01;
        let mut c_curve = false;
        let mut c_agree = false;
        let mut c_margin = false;
        let mut c_sides = false;

        if let Ok(main) = basin::select_main_eigenfunction(&model) {
            if let Ok(curve) = basin::extract_level_set(&main.phi, &oracle[1], 201) {
                c_curve = true;
                let stable = vec![node.clone(), focus.clone()];
                if let Ok(ics) =
                    basin::sample_ics_per_side(&main.phi, curve.level, 70, seed + 10_000)
                {
                    if let Ok(cls) = basin::classify_initial_conditions(
                        &main.phi, &curve, &stable, &ics, &net, &cfg, 1e-3,
                    ) {
                        c_sides = true;
                        c_agree = cls.agreement_rate >= 0.85;
                    }
                }
                let margin = basin::robustness_margin(&curve, &oracle[2]);
                c_margin = (margin - 0.5).abs() <= 0.2;
            }
        }

        let checks = [three, c_mu, c_gap, c_curve, c_sides, c_agree, c_margin];
        for (i, &c) in checks.iter().enumerate() {
            if c {
                counts[i] += 1;
            }
        }
        if checks.iter().all(|&c| c) {
            joint += 1;
            println!("JOINT PASS at seed {seed}");
        } else if three && c_mu && c_gap && c_sides && c_agree && c_margin {
            println!("near miss (no curve?) seed {seed}");
        } else if three && c_sides && c_agree && c_margin {
            println!("seed {seed}: 3fp+sides+agree+margin (mu {max_mu:.4}, gap {gap:.3})");
        }
    }
    println!(
        "totals over {total}: 3fp {} mu<=1.05 {} gap<0.01 {} curve {} sides {} agree {} margin {} joint {joint}",
        counts[0], counts[1], counts[2], counts[3], counts[4], counts[5], counts[6]
    );
}
