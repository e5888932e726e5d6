//! Full dry run of every acceptance quantity at the recorded defaults.

use kbasin::basin;
use kbasin::edmd::{self, Dictionary};
use kbasin::mak::{self, ReplicatorForm, ReplicatorParams};
use kbasin::sim::{self, IntegratorConfig};

fn main() {
    let t0 = std::time::Instant::now();
    let seed = 210u64;
    let params = ReplicatorParams::new(10.0, 0.1, 0.02).unwrap();
    let net = mak::build_replicator_network(&params, ReplicatorForm::ReducedTwoState).unwrap();
    let cfg = IntegratorConfig::default();
    let eq = mak::analytic_equilibria(&params).unwrap();
    let oracle = [[1.0, 0.0], [eq[1][0], eq[1][1]], [eq[2][0], eq[2][1]]];

    let snaps = sim::generate_snapshots(&net, 100, 21, 0.125, &cfg, seed).unwrap();
    let model = edmd::fit(&snaps, &Dictionary::tensor_hermite(4, 2)).unwrap();
    let max_mu = model.eigenvalues.iter().map(|m| m.norm()).fold(0.0_f64, f64::max);
    let target = (0.117070_f64 * 0.125).exp();
    let gap = model.eigenvalues.iter().map(|m| (m - target).norm()).fold(f64::INFINITY, f64::min);
    println!("fit: rank {} max|mu| {max_mu:.5} gap-to-1.01474 {gap:.4}", model.diagnostics.rank_g);

    let fps = basin::find_fixed_points(&model, &basin::FixedPointOptions::default(), Some(&net)).unwrap();
    println!("fixed points: {}", fps.len());
    for fp in &fps {
        println!("  ({:+.6}, {:+.6}) obj {:.2e} polish {:.2e}", fp.location[0], fp.location[1], fp.objective, fp.polish_distance.unwrap());
    }
    for o in &oracle {
        let d = fps.iter().map(|fp| ((fp.location[0]-o[0]).powi(2)+(fp.location[1]-o[1]).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
        println!("  oracle ({:.5}, {:.5}) nearest {:.2e}", o[0], o[1], d);
    }

    let main = basin::select_main_eigenfunction(&model).unwrap();
    println!("main phi: index {} mu {:+.5}{:+.5}i |mu| {:.5} excluded {:?}", main.phi.index, main.phi.eigenvalue.re, main.phi.eigenvalue.im, main.phi.eigenvalue.norm(), main.excluded);

    let saddle = &oracle[1];
    let curve = basin::extract_level_set(&main.phi, saddle, 201).unwrap();
    let sd = curve.boundary.iter().map(|p| ((p[0]-saddle[0]).powi(2)+(p[1]-saddle[1]).powi(2)).sqrt()).fold(f64::INFINITY, f64::min);
    println!("curve: {} vertices, {} aux, saddle distance {:.2e} (2 cells = {:.2e})", curve.boundary.len(), curve.auxiliary.len(), sd, 2.0/200.0);

    let node = basin::classify_equilibrium(&net, &oracle[0]).unwrap();
    let focus = basin::classify_equilibrium(&net, &oracle[2]).unwrap();
    let stable = vec![node, focus];
    let ics = basin::sample_ics_per_side(&main.phi, curve.level, 70, seed + 10_000).unwrap();
    let cls = basin::classify_initial_conditions(&main.phi, &curve, &stable, &ics, &net, &cfg, 1e-3).unwrap();
    println!("ICs: agree {:.1}% resolved {} unresolved {}", 100.0*cls.agreement_rate, cls.resolved, cls.unresolved);
    let margin = basin::robustness_margin(&curve, &oracle[2]);
    println!("margin: {margin:.4}");

    let attractors: Vec<[f64;2]> = stable.iter().map(|r| [r.location[0], r.location[1]]).collect();
    let check = basin::validate_boundary(&net, &curve, saddle, &cfg, &attractors, &basin::BoundaryValidationOptions::default()).unwrap();
    println!("theorem check: {} samples sharp {:.0}% approach {:.0}% mean-min-dist {:.3}", check.samples_used, 100.0*check.sharpness, 100.0*check.saddle_approach_fraction, check.mean_min_saddle_distance);

    // Criterion: forward prediction vs RK4, eta <= 8, mean over 100 hull points.
    let test_pts = sim::sample_simplex(100, 777);
    for eta in [1u32, 4, 8] {
        let mut total = 0.0;
        for p in &test_pts {
            let pred = model.predict_forward_with(&[p[0], p[1]], eta, 1.0).unwrap();
            let truth = sim::integrate(&net, p, eta as f64 * 0.125, &cfg).unwrap();
            total += ((pred.state[0]-truth[0]).powi(2) + (pred.state[1]-truth[1]).powi(2)).sqrt();
        }
        println!("eta {eta}: mean forward error {:.4}", total / test_pts.len() as f64);
    }
    // Backward-forward composition, eta <= 4.
    for eta in [1u32, 2, 4] {
        let mut total = 0.0;
        let mut worst = 0.0_f64;
        for p in &test_pts {
            let fwd = model.predict_forward_with(&[p[0], p[1]], eta, 1.0).unwrap();
            let back = model.predict_backward_with(&fwd.state, eta, 1.0).unwrap();
            let e = ((back.state[0]-p[0]).powi(2) + (back.state[1]-p[1]).powi(2)).sqrt();
            total += e;
            worst = worst.max(e);
        }
        println!("eta {eta}: mean round-trip {:.4} worst {:.4}", total / test_pts.len() as f64, worst);
    }
    // Eigenfunction relation on held-out points (median over 500).
    let held = sim::sample_simplex(500, 888);
    let mut errs: Vec<f64> = Vec::new();
    let mu = main.phi.eigenvalue;
    for p in &held {
        let y = sim::integrate(&net, p, 0.125, &cfg).unwrap();
        let lhs = main.phi.eval(&[y[0], y[1]]).unwrap();
        let rhs = mu * main.phi.eval(&[p[0], p[1]]).unwrap();
        if rhs.norm() > 1e-12 {
            errs.push((lhs - rhs).norm() / rhs.norm());
        }
    }
    errs.sort_by(f64::total_cmp);
    println!("eigenfunction relation: median rel err {:.4} over {} pts", errs[errs.len()/2], errs.len());
    println!("elapsed {:.2?}", t0.elapsed());
}
