//! Scratch probe of the full reference pipeline. Prints the spectral
//! summary, located fixed points, curve geometry, and agreement numbers.

use kbasin::basin;
use kbasin::edmd::{self, Dictionary};
use kbasin::mak::{self, ReplicatorForm, ReplicatorParams};
use kbasin::sim::{self, IntegratorConfig};

fn main() {
    let t0 = std::time::Instant::now();
    let params = ReplicatorParams::new(10.0, 0.1, 0.02).unwrap();
    let net = mak::build_replicator_network(&params, ReplicatorForm::ReducedTwoState).unwrap();
    let cfg = IntegratorConfig::default();
    let snaps = sim::generate_snapshots(&net, 100, 21, 0.125, &cfg, 42).unwrap();
    println!("pairs: {}", snaps.n_pairs());
    println!("max simplex violation: {:.3e}", snaps.max_simplex_violation());

    let dict = Dictionary::tensor_hermite(4, 2);
    let model = edmd::fit(&snaps, &dict).unwrap();
    println!(
        "rank(G) = {}, sigma in [{:.3e}, {:.3e}], projection residual {:.3e}",
        model.diagnostics.rank_g,
        model.diagnostics.sigma_min,
        model.diagnostics.sigma_max,
        model.diagnostics.projection_residual
    );
    println!("top eigenvalues by |mu|:");
    for (i, mu) in model.eigenvalues.iter().take(8).enumerate() {
        println!(
            "  {} mu = {:+.6} {:+.6}i  |mu| = {:.6}  variation = {:.3e}",
            i,
            mu.re,
            mu.im,
            mu.norm(),
            model.eigenfunction_meta[i].variation
        );
    }
    let unstable_target = (0.11707_f64 * 0.125).exp();
    println!("saddle unstable multiplier target: {:.6}", unstable_target);

    let fps = basin::find_fixed_points(&model, &basin::FixedPointOptions::default(), Some(&net))
        .unwrap();
    println!("fixed points ({}):", fps.len());
    for fp in &fps {
        println!(
            "  ({:+.6}, {:+.6}) objective {:.3e} polish {:?}",
            fp.location[0], fp.location[1], fp.objective, fp.polish_distance
        );
    }

    let mut reports = Vec::new();
    for fp in &fps {
        let rep = basin::classify_equilibrium(&net, &fp.location).unwrap();
        println!(
            "  class {:?} role {:?} eig ({:+.5}{:+.5}i, {:+.5}{:+.5}i)",
            rep.class,
            rep.role,
            rep.eigenvalue_re[0],
            rep.eigenvalue_im[0],
            rep.eigenvalue_re[1],
            rep.eigenvalue_im[1]
        );
        reports.push(rep);
    }

    let main = basin::select_main_eigenfunction(&model).unwrap();
    println!(
        "main eigenfunction index {} mu = {:+.6}{:+.6}i (excluded {:?})",
        main.phi.index, main.phi.eigenvalue.re, main.phi.eigenvalue.im, main.excluded
    );

    let saddle = reports
        .iter()
        .find(|r| r.class == basin::EquilibriumClass::Saddle)
        .unwrap()
        .location
        .clone();
    let curve = basin::extract_level_set(&main.phi, &saddle, 201).unwrap();
    println!(
        "curve: {} boundary vertices, {} auxiliary components, level {:+.6e}",
        curve.boundary.len(),
        curve.auxiliary.len(),
        curve.level
    );
    let first = curve.boundary.first().unwrap();
    let last = curve.boundary.last().unwrap();
    println!(
        "  endpoints ({:.4}, {:.4}) .. ({:.4}, {:.4})",
        first[0], first[1], last[0], last[1]
    );

    let stable: Vec<basin::EquilibriumReport> = reports
        .iter()
        .filter(|r| r.role == basin::EquilibriumRole::AsymptoticallyStable)
        .cloned()
        .collect();
    println!("stable equilibria: {}", stable.len());

    let ics = basin::sample_ics_per_side(&main.phi, curve.level, 70, 7).unwrap();
    let classification = basin::classify_initial_conditions(
        &main.phi, &curve, &stable, &ics, &net, &cfg, 1e-3,
    )
    .unwrap();
    println!(
        "ICs: {} resolved, {} unresolved, agreement {:.1}%",
        classification.resolved,
        classification.unresolved,
        100.0 * classification.agreement_rate
    );

    let focus_idx = stable
        .iter()
        .position(|r| r.class == basin::EquilibriumClass::StableFocus)
        .unwrap();
    let margin = basin::robustness_margin(&curve, &stable[focus_idx].location);
    println!("margin to focus: {:.4}", margin);

    let attractors: Vec<[f64; 2]> = stable
        .iter()
        .map(|r| [r.location[0], r.location[1]])
        .collect();
    let check = basin::validate_boundary(
        &net,
        &curve,
        &saddle,
        &cfg,
        &attractors,
        &basin::BoundaryValidationOptions::default(),
    )
    .unwrap();
    println!(
        "theorem check: {} samples, sharpness {:.1}%, saddle approach {:.1}% (mean min dist {:.4})",
        check.samples_used,
        100.0 * check.sharpness,
        100.0 * check.saddle_approach_fraction,
        check.mean_min_saddle_distance
    );
    println!("elapsed: {:.2?}", t0.elapsed());
}
