//! Attraction-region analysis on top of a fitted operator: locate fixed
//! points of the spectral flow reconstruction, classify equilibria through
//! the network Jacobian, extract the dominant-eigenfunction level set
//! through the saddle, classify initial conditions against forward
//! integration, and measure the robustness margin.

pub mod marching;
pub mod nelder_mead;

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::edmd::{Eigenfunction, EdmdError, KoopmanModel};
use crate::mak::{eig2, l2_norm, MakError, State, StoichiometricNetwork};
use crate::sim::{integrate, integrate_observed, IntegratorConfig, SimError};

#[derive(Debug, Error)]
pub enum BasinError {
    #[error("no fixed points found; the fitted flow map has no local minima below tolerance")]
    NoFixedPointsFound,
    #[error("state is not an equilibrium (rhs residual {residual:.3e})")]
    NotAnEquilibrium { residual: f64 },
    #[error("basin analysis requires a two-state system, got dimension {got}")]
    UnsupportedDimension { got: usize },
    #[error("every eigenfunction was excluded as constant-like")]
    AllExcluded,
    #[error("level {level:.6e} is outside the eigenfunction's range on the grid")]
    EmptyLevelSet { level: f64 },
    #[error(
        "no level-set component passes near the saddle (closest vertex at distance {distance:.3e})"
    )]
    SaddleNotOnCurve { distance: f64 },
    #[error("side assignment conflict: the stable equilibria do not straddle the curve")]
    SideAssignmentConflict,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Edmd(#[from] EdmdError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Mak(#[from] MakError),
}

/// A located fixed point of the reconstructed flow map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedPoint {
    pub location: Vec<f64>,
    /// `|| (M^eta ⊙ V) Phi(x)^T - x ||` at the minimum.
    pub objective: f64,
    /// Distance moved by Newton refinement against the true vector field,
    /// when a network was available. A fit-quality indicator.
    pub polish_distance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FixedPointOptions {
    pub eta: u32,
    pub starts: usize,
    pub seed: u64,
    pub merge_radius: f64,
    pub residual_tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            eta: 1,
            starts: 400,
            seed: 0,
            merge_radius: 1e-3,
            residual_tol: 1e-3,
        }
    }
}

/// Dense evaluation of the eta-step spectral flow map,
/// `x -> Re((M^eta ⊙ V) Phi(x)^T)`, folded into a single complex matrix.
struct FlowMap {
    coeff: Array2<Complex64>,
    dict: crate::edmd::Dictionary,
}

impl FlowMap {
    fn new(model: &KoopmanModel, eta: u32) -> Self {
        let n = model.state_dim();
        let nk = model.size();
        let mut coeff = Array2::zeros((n, nk));
        for k in 0..n {
            for i in 0..nk {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..nk {
                    acc += model.eigenvalues[j].powi(eta as i32)
                        * model.modes[(k, j)]
                        * model.xi[(i, j)];
                }
                coeff[(k, i)] = acc;
            }
        }
        FlowMap {
            coeff,
            dict: model.dictionary.clone(),
        }
    }

    fn apply(&self, x: &[f64], psi: &mut [f64], out: &mut [f64]) {
        self.dict.eval_into(x, psi).expect("dimension checked");
        for (k, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, &p) in psi.iter().enumerate() {
                acc += self.coeff[(k, i)].re * p;
            }
            *slot = acc;
        }
    }
}

fn simplex_excess(x: &[f64]) -> f64 {
    let mut excess = 0.0;
    let mut sum = 0.0;
    for &v in x {
        if v < 0.0 {
            excess -= v;
        }
        sum += v;
    }
    if sum > 1.0 {
        excess += sum - 1.0;
    }
    excess
}

/// Jittered-grid start points covering the unit simplex `{x >= 0, sum <= 1}`.
fn simplex_starts(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // The simplex fills 1/dim! of the cube; oversize the grid accordingly.
    let factorial: usize = (1..=dim).product();
    let per_axis = ((count * factorial) as f64)
        .powf(1.0 / dim as f64)
        .ceil() as usize
        + 1;
    let mut out = Vec::with_capacity(count);
    let mut idx = vec![0usize; dim];
    'outer: loop {
        let mut x = vec![0.0; dim];
        let mut ok = true;
        let mut sum = 0.0;
        for (a, &cell) in idx.iter().enumerate() {
            let jitter: f64 = rng.random::<f64>() - 0.5;
            let v = (cell as f64 + 0.5 + 0.8 * jitter) / per_axis as f64;
            x[a] = v;
            sum += v;
            if v < 0.0 {
                ok = false;
            }
        }
        if ok && sum <= 1.0 {
            out.push(x);
            if out.len() == count {
                break;
            }
        }
        // Mixed-radix increment.
        for a in (0..dim).rev() {
            idx[a] += 1;
            if idx[a] < per_axis {
                continue 'outer;
            }
            idx[a] = 0;
        }
        break;
    }
    out
}

/// Projects onto `{x >= 0, sum x <= 1}` so refinement cannot leave the
/// admissible domain (the washout root sits on its boundary).
fn project_simplex(x: &mut [f64]) {
    let mut sum = 0.0;
    for v in x.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
        sum += *v;
    }
    if sum > 1.0 {
        for v in x.iter_mut() {
            *v /= sum;
        }
    }
}

/// Damped Newton refinement of `x` against the true vector field, kept
/// inside the simplex. Returns the refined point and the distance moved.
fn polish_against_rhs(
    net: &StoichiometricNetwork,
    x0: &[f64],
) -> Result<(Vec<f64>, f64), BasinError> {
    let n = net.n_species();
    let mut x = x0.to_vec();
    let mut f = vec![0.0; n];
    net.rhs_into(&x, &mut f);
    let mut fnorm = l2_norm(&f);
    for _ in 0..60 {
        if fnorm < 1e-13 {
            break;
        }
        let jac = net.jacobian(&x)?;
        let Some(step) = solve_small(&jac, &f) else {
            break;
        };
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..25 {
            let mut trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(xi, si)| xi - lambda * si)
                .collect();
            project_simplex(&mut trial);
            let mut ft = vec![0.0; n];
            net.rhs_into(&trial, &mut ft);
            let fnt = l2_norm(&ft);
            if fnt < fnorm {
                x = trial;
                net.rhs_into(&x, &mut f);
                fnorm = fnt;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let dist = x
        .iter()
        .zip(x0.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    Ok((x, dist))
}

/// Gaussian elimination with partial pivoting for the small Newton systems.
fn solve_small(a: &Array2<f64>, b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m = a.clone();
    let mut rhs = b.to_vec();
    for col in 0..n {
        let mut pivot = col;
        for r in col + 1..n {
            if m[(r, col)].abs() > m[(pivot, col)].abs() {
                pivot = r;
            }
        }
        if m[(pivot, col)].abs() < 1e-300 {
            return None;
        }
        if pivot != col {
            for c in 0..n {
                let tmp = m[(col, c)];
                m[(col, c)] = m[(pivot, c)];
                m[(pivot, c)] = tmp;
            }
            rhs.swap(col, pivot);
        }
        for r in col + 1..n {
            let factor = m[(r, col)] / m[(col, col)];
            for c in col..n {
                m[(r, c)] -= factor * m[(col, c)];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in r + 1..n {
            acc -= m[(r, c)] * x[c];
        }
        x[r] = acc / m[(r, r)];
    }
    Some(x)
}

/// Multi-start derivative-free minimization of the fixed-point objective
/// over the unit simplex. Minima are merged within `merge_radius`, kept
/// below `residual_tol`, and polished against the true vector field when a
/// network is supplied.
pub fn find_fixed_points(
    model: &KoopmanModel,
    opts: &FixedPointOptions,
    net: Option<&StoichiometricNetwork>,
) -> Result<Vec<FixedPoint>, BasinError> {
    if opts.eta < 1 {
        return Err(BasinError::InvalidParameter("eta must be >= 1".into()));
    }
    let n = model.state_dim();
    if let Some(net) = net {
        if net.n_species() != n {
            return Err(BasinError::UnsupportedDimension {
                got: net.n_species(),
            });
        }
    }
    let flow = FlowMap::new(model, opts.eta);
    let nk = model.size();

    let mut psi = vec![0.0; nk];
    let mut pred = vec![0.0; n];
    let mut objective = |x: &[f64]| -> f64 {
        flow.apply(x, &mut psi, &mut pred);
        let mut acc = 0.0;
        for (p, xi) in pred.iter().zip(x.iter()) {
            acc += (p - xi) * (p - xi);
        }
        acc.sqrt() + 10.0 * simplex_excess(x)
    };

    let nm_opts = nelder_mead::NmOptions {
        scale: 0.05,
        max_iters: 400,
        f_tol: 1e-12,
        x_tol: 1e-10,
    };
    let mut candidates: Vec<(Vec<f64>, f64)> = Vec::new();
    for start in simplex_starts(n, opts.starts, opts.seed) {
        let result = nelder_mead::minimize(&mut objective, &start, &nm_opts);
        let mut x = result.x;
        // Round off descent noise just below the axes.
        for v in x.iter_mut() {
            if *v < 0.0 && *v > -1e-6 {
                *v = 0.0;
            }
        }
        if simplex_excess(&x) > 0.0 {
            continue;
        }
        let residual = objective(&x);
        if residual < opts.residual_tol {
            candidates.push((x, residual));
        }
    }
    if candidates.is_empty() {
        return Err(BasinError::NoFixedPointsFound);
    }

    let merged = merge_points(candidates, opts.merge_radius);

    let mut out: Vec<FixedPoint> = Vec::new();
    if let Some(net) = net {
        let polished: Vec<(Vec<f64>, f64)> = merged
            .iter()
            .map(|(x, _)| polish_against_rhs(net, x))
            .collect::<Result<Vec<_>, _>>()?;
        // Polishing can merge nearby minima into the same root.
        let mut seen: Vec<(Vec<f64>, f64, f64)> = Vec::new();
        for ((x, dist), (_, obj)) in polished.into_iter().zip(merged.iter()) {
            if !seen
                .iter()
                .any(|(sx, _, _)| distance(sx, &x) < opts.merge_radius)
            {
                seen.push((x, *obj, dist));
            }
        }
        for (x, obj, dist) in seen {
            out.push(FixedPoint {
                location: x,
                objective: obj,
                polish_distance: Some(dist),
            });
        }
    } else {
        for (x, obj) in merged {
            out.push(FixedPoint {
                location: x,
                objective: obj,
                polish_distance: None,
            });
        }
    }
    out.sort_by(|a, b| {
        a.location
            .iter()
            .zip(b.location.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Keeps the lowest-objective representative of every cluster.
fn merge_points(mut candidates: Vec<(Vec<f64>, f64)>, radius: f64) -> Vec<(Vec<f64>, f64)> {
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    let mut kept: Vec<(Vec<f64>, f64)> = Vec::new();
    for (x, fv) in candidates {
        if !kept.iter().any(|(kx, _)| distance(kx, &x) < radius) {
            kept.push((x, fv));
        }
    }
    kept
}

/// Linearization class of an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumClass {
    StableNode,
    StableFocus,
    UnstableNode,
    UnstableFocus,
    Saddle,
    /// Real part within the classification margin of zero; excluded from
    /// basin logic.
    CenterMarginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumRole {
    AsymptoticallyStable,
    Saddle,
    Other,
}

/// Real-part margin below which an eigenvalue counts as marginal.
pub const CLASS_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub location: Vec<f64>,
    pub objective_residual: Option<f64>,
    pub polish_distance: Option<f64>,
    pub eigenvalue_re: [f64; 2],
    pub eigenvalue_im: [f64; 2],
    pub class: EquilibriumClass,
    pub role: EquilibriumRole,
}

impl EquilibriumReport {
    pub fn eigenvalues(&self) -> [Complex64; 2] {
        [
            Complex64::new(self.eigenvalue_re[0], self.eigenvalue_im[0]),
            Complex64::new(self.eigenvalue_re[1], self.eigenvalue_im[1]),
        ]
    }
}

/// Classifies an equilibrium of a two-state network by the sign pattern and
/// discriminant of its Jacobian.
pub fn classify_equilibrium(
    net: &StoichiometricNetwork,
    x_eq: &[f64],
) -> Result<EquilibriumReport, BasinError> {
    if net.n_species() != 2 || x_eq.len() != 2 {
        return Err(BasinError::UnsupportedDimension {
            got: net.n_species().max(x_eq.len()),
        });
    }
    let mut f = vec![0.0; 2];
    net.rhs_into(x_eq, &mut f);
    let residual = l2_norm(&f);
    if residual >= 1e-6 {
        return Err(BasinError::NotAnEquilibrium { residual });
    }
    let jac = net.jacobian(x_eq)?;
    let eigs = eig2(&jac);
    let det = jac[(0, 0)] * jac[(1, 1)] - jac[(0, 1)] * jac[(1, 0)];
    let complex_pair = eigs[0].im != 0.0;
    let max_re = eigs[0].re.max(eigs[1].re);
    let min_re = eigs[0].re.min(eigs[1].re);

    let class = if det < 0.0 {
        EquilibriumClass::Saddle
    } else if max_re.abs() < CLASS_EPSILON || min_re.abs() < CLASS_EPSILON {
        EquilibriumClass::CenterMarginal
    } else if complex_pair {
        if max_re < -CLASS_EPSILON {
            EquilibriumClass::StableFocus
        } else {
            EquilibriumClass::UnstableFocus
        }
    } else if max_re < -CLASS_EPSILON {
        EquilibriumClass::StableNode
    } else if min_re > CLASS_EPSILON {
        EquilibriumClass::UnstableNode
    } else {
        EquilibriumClass::CenterMarginal
    };
    let role = match class {
        EquilibriumClass::StableNode | EquilibriumClass::StableFocus => {
            EquilibriumRole::AsymptoticallyStable
        }
        EquilibriumClass::Saddle => EquilibriumRole::Saddle,
        _ => EquilibriumRole::Other,
    };
    Ok(EquilibriumReport {
        location: x_eq.to_vec(),
        objective_residual: None,
        polish_distance: None,
        eigenvalue_re: [eigs[0].re, eigs[1].re],
        eigenvalue_im: [eigs[0].im, eigs[1].im],
        class,
        role,
    })
}

/// The selected dominant eigenfunction plus the indices excluded as
/// constant-like.
#[derive(Debug, Clone)]
pub struct MainEigenfunction {
    pub phi: Eigenfunction,
    pub excluded: Vec<usize>,
}

/// Fraction of the maximal variation below which an eigenfunction counts as
/// constant.
pub const VARIATION_FLOOR: f64 = 1e-6;

/// Picks the eigenfunction with the largest eigenvalue magnitude among those
/// that actually vary over the training data. The constant eigenfunction
/// (eigenvalue one) would otherwise always win.
pub fn select_main_eigenfunction(model: &KoopmanModel) -> Result<MainEigenfunction, BasinError> {
    let max_variation = model
        .eigenfunction_meta
        .iter()
        .map(|m| m.variation)
        .fold(0.0_f64, f64::max);
    let threshold = VARIATION_FLOOR * max_variation;
    let mut excluded = Vec::new();
    let mut chosen = None;
    for (idx, meta) in model.eigenfunction_meta.iter().enumerate() {
        if meta.variation <= threshold {
            excluded.push(idx);
        } else if chosen.is_none() {
            // Eigenvalues are already sorted by descending magnitude.
            chosen = Some(idx);
        }
    }
    let Some(idx) = chosen else {
        return Err(BasinError::AllExcluded);
    };
    Ok(MainEigenfunction {
        phi: model.eigenfunction(idx)?,
        excluded,
    })
}

/// Level set of the dominant eigenfunction through the saddle, as chained
/// polylines over the reduced simplex.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelSetCurve {
    pub eigenfunction_index: usize,
    pub level: f64,
    /// The connected component passing nearest the saddle.
    pub boundary: Vec<[f64; 2]>,
    /// Remaining components of the same level set.
    pub auxiliary: Vec<Vec<[f64; 2]>>,
    pub resolution: usize,
}

/// Real part of the (phase-normalized) eigenfunction on a uniform grid over
/// the unit square, with the simplex membership of each node.
pub fn eigenfunction_grid(
    phi: &Eigenfunction,
    resolution: usize,
) -> Result<(Vec<f64>, Array2<f64>, Array2<f64>, Array2<bool>), EdmdError> {
    let axis: Vec<f64> = (0..resolution)
        .map(|i| i as f64 / (resolution - 1) as f64)
        .collect();
    let mut re = Array2::zeros((resolution, resolution));
    let mut im = Array2::zeros((resolution, resolution));
    let mut ok = Array2::from_elem((resolution, resolution), false);
    for i in 0..resolution {
        for j in 0..resolution {
            let x = [axis[i], axis[j]];
            let v = phi.eval(&x)?;
            re[(i, j)] = v.re;
            im[(i, j)] = v.im;
            ok[(i, j)] = x[0] + x[1] <= 1.0 + 1e-12;
        }
    }
    Ok((axis, re, im, ok))
}

/// Marching-squares extraction of `{ Re phi = Re phi(saddle) }` over the
/// reduced simplex. The component passing nearest the saddle becomes the
/// boundary curve.
pub fn extract_level_set(
    phi: &Eigenfunction,
    saddle: &[f64],
    resolution: usize,
) -> Result<LevelSetCurve, BasinError> {
    if resolution < 32 {
        return Err(BasinError::InvalidParameter(format!(
            "grid resolution must be at least 32, got {resolution}"
        )));
    }
    let level = phi.eval(saddle)?.re;
    let (axis, re, _im, ok) = eigenfunction_grid(phi, resolution)?;

    // Range check over admissible nodes only.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for ((idx, &v), &good) in re.indexed_iter().zip(ok.iter()) {
        let _ = idx;
        if good {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !(level >= lo && level <= hi) {
        return Err(BasinError::EmptyLevelSet { level });
    }

    let lines = marching::contour_lines(&re, &ok, &axis, &axis, level);
    if lines.is_empty() {
        return Err(BasinError::EmptyLevelSet { level });
    }

    let dist_to_saddle = |line: &Vec<[f64; 2]>| -> f64 {
        line.iter()
            .map(|p| distance(p, saddle))
            .fold(f64::INFINITY, f64::min)
    };
    let mut best = 0;
    let mut best_dist = f64::INFINITY;
    for (i, line) in lines.iter().enumerate() {
        let d = dist_to_saddle(line);
        if d < best_dist {
            best_dist = d;
            best = i;
        }
    }
    let cell = 1.0 / (resolution - 1) as f64;
    if best_dist > 2.0 * cell {
        return Err(BasinError::SaddleNotOnCurve {
            distance: best_dist,
        });
    }

    let mut boundary = Vec::new();
    let mut auxiliary = Vec::new();
    for (i, line) in lines.into_iter().enumerate() {
        if i == best {
            boundary = line;
        } else {
            auxiliary.push(line);
        }
    }
    Ok(LevelSetCurve {
        eigenfunction_index: phi.index,
        level,
        boundary,
        auxiliary,
        resolution,
    })
}

/// One classified initial condition. `predicted` and `verified` index into
/// the stable-equilibria list handed to [`classify_initial_conditions`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcRecord {
    pub ic: [f64; 2],
    pub predicted: usize,
    pub verified: Option<usize>,
    pub agree: bool,
    pub boundary_ambiguous: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcClassification {
    pub records: Vec<IcRecord>,
    pub resolved: usize,
    pub unresolved: usize,
    pub agreements: usize,
    /// Agreements over resolved trajectories.
    pub agreement_rate: f64,
    /// Disagreements over resolved trajectories.
    pub misclassification_rate: f64,
    /// Side of the curve (positive = above the level) per stable
    /// equilibrium.
    pub stable_sides: Vec<bool>,
}

/// Splits initial conditions by the sign of `Re phi - level`, assigns each
/// side the stable equilibrium it contains, and verifies every prediction by
/// forward integration over the configured horizon (matching an equilibrium
/// within `match_tol`; trajectories matching none count as unresolved).
pub fn classify_initial_conditions(
    phi: &Eigenfunction,
    curve: &LevelSetCurve,
    stable: &[EquilibriumReport],
    ics: &[[f64; 2]],
    net: &StoichiometricNetwork,
    cfg: &IntegratorConfig,
    match_tol: f64,
) -> Result<IcClassification, BasinError> {
    if stable.len() != 2 {
        return Err(BasinError::SideAssignmentConflict);
    }
    let side_of = |x: &[f64]| -> Result<(bool, bool), BasinError> {
        let v = phi.eval(x)?.re - curve.level;
        let ambiguous = v.abs() < 1e-12;
        // Ties break to the positive side.
        Ok((v > 0.0 || ambiguous, ambiguous))
    };
    let (side_a, _) = side_of(&stable[0].location)?;
    let (side_b, _) = side_of(&stable[1].location)?;
    if side_a == side_b {
        return Err(BasinError::SideAssignmentConflict);
    }

    let mut records = Vec::with_capacity(ics.len());
    let mut resolved = 0usize;
    let mut agreements = 0usize;
    for ic in ics {
        let (side, ambiguous) = side_of(ic)?;
        let predicted = if side == side_a { 0 } else { 1 };
        let x0 = State::new(ic.to_vec())?;
        let end = integrate(net, &x0, cfg.horizon, cfg)?;
        let mut verified = None;
        for (i, eq) in stable.iter().enumerate() {
            if distance(&end, &eq.location) < match_tol {
                verified = Some(i);
                break;
            }
        }
        let agree = verified == Some(predicted);
        if verified.is_some() {
            resolved += 1;
            if agree {
                agreements += 1;
            }
        }
        records.push(IcRecord {
            ic: *ic,
            predicted,
            verified,
            agree,
            boundary_ambiguous: ambiguous,
        });
    }
    let unresolved = records.len() - resolved;
    let agreement_rate = if resolved > 0 {
        agreements as f64 / resolved as f64
    } else {
        0.0
    };
    Ok(IcClassification {
        records,
        resolved,
        unresolved,
        agreements,
        agreement_rate,
        misclassification_rate: 1.0 - agreement_rate,
        stable_sides: vec![side_a, side_b],
    })
}

/// Draws simplex samples until `per_side` land on each side of the curve.
pub fn sample_ics_per_side(
    phi: &Eigenfunction,
    level: f64,
    per_side: usize,
    seed: u64,
) -> Result<Vec<[f64; 2]>, BasinError> {
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let mut batch_seed = seed;
    let mut attempts = 0usize;
    while positive.len() < per_side || negative.len() < per_side {
        for s in crate::sim::sample_simplex(256, batch_seed) {
            let p = [s[0], s[1]];
            let v = phi.eval(&p)?.re - level;
            if v > 0.0 && positive.len() < per_side {
                positive.push(p);
            } else if v <= 0.0 && negative.len() < per_side {
                negative.push(p);
            }
            if positive.len() >= per_side && negative.len() >= per_side {
                break;
            }
        }
        batch_seed = batch_seed.wrapping_add(1);
        attempts += 256;
        if attempts > 1_000_000 {
            return Err(BasinError::InvalidParameter(
                "could not sample initial conditions on both sides of the curve".into(),
            ));
        }
    }
    let mut out = positive;
    out.extend(negative);
    Ok(out)
}

fn point_segment_distance(p: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let abx = b[0] - a[0];
    let aby = b[1] - a[1];
    let apx = p[0] - a[0];
    let apy = p[1] - a[1];
    let len2 = abx * abx + aby * aby;
    let t = if len2 > 0.0 {
        ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let cx = a[0] + t * abx - p[0];
    let cy = a[1] + t * aby - p[1];
    (cx * cx + cy * cy).sqrt()
}

/// Minimum Euclidean distance from the stable equilibrium to the boundary
/// polyline: a perturbation-tolerance measure for that equilibrium.
pub fn robustness_margin(curve: &LevelSetCurve, x_s: &[f64]) -> f64 {
    let pts = &curve.boundary;
    let p = [x_s[0], x_s[1]];
    if pts.len() == 1 {
        return distance(&pts[0], x_s);
    }
    let mut best = f64::INFINITY;
    for w in pts.windows(2) {
        best = best.min(point_segment_distance(&p, &w[0], &w[1]));
    }
    best
}

#[derive(Debug, Clone)]
pub struct BoundaryValidationOptions {
    pub delta: f64,
    pub samples: usize,
    pub approach_radius: f64,
}

impl Default for BoundaryValidationOptions {
    fn default() -> Self {
        BoundaryValidationOptions {
            delta: 1e-3,
            samples: 50,
            approach_radius: 0.05,
        }
    }
}

/// Diagnostic evidence that the extracted curve behaves like a stability
/// boundary: normal perturbations should land in different basins
/// (sharpness) and on-curve trajectories should pass near the saddle
/// (stable-manifold evidence). No hard threshold is applied.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub samples_used: usize,
    pub sharpness: f64,
    pub saddle_approach_fraction: f64,
    pub mean_min_saddle_distance: f64,
}

pub fn validate_boundary(
    net: &StoichiometricNetwork,
    curve: &LevelSetCurve,
    saddle: &[f64],
    cfg: &IntegratorConfig,
    attractors: &[[f64; 2]],
    opts: &BoundaryValidationOptions,
) -> Result<TheoremCheck, BasinError> {
    let pts = &curve.boundary;
    if pts.len() < 3 || attractors.is_empty() {
        return Ok(TheoremCheck {
            samples_used: 0,
            sharpness: 0.0,
            saddle_approach_fraction: 0.0,
            mean_min_saddle_distance: f64::NAN,
        });
    }
    let stride = (pts.len() / opts.samples).max(1);
    let nearest =
        |x: &[f64]| -> usize {
            let mut best = 0;
            let mut bd = f64::INFINITY;
            for (i, a) in attractors.iter().enumerate() {
                let d = distance(x, a);
                if d < bd {
                    bd = d;
                    best = i;
                }
            }
            best
        };

    let mut used = 0usize;
    let mut sharp = 0usize;
    let mut approached = 0usize;
    let mut min_dist_sum = 0.0;
    let mut idx = 1;
    while idx + 1 < pts.len() {
        let prev = pts[idx - 1];
        let here = pts[idx];
        let next = pts[idx + 1];
        let tx = next[0] - prev[0];
        let ty = next[1] - prev[1];
        let len = (tx * tx + ty * ty).sqrt();
        if len < 1e-12 {
            idx += stride;
            continue;
        }
        let n = [-ty / len, tx / len];
        let plus = [here[0] + opts.delta * n[0], here[1] + opts.delta * n[1]];
        let minus = [here[0] - opts.delta * n[0], here[1] - opts.delta * n[1]];
        let inside = |p: &[f64; 2]| p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0;
        if inside(&plus) && inside(&minus) {
            let end_plus = integrate(net, &State::new(plus.to_vec())?, cfg.horizon, cfg)?;
            let end_minus = integrate(net, &State::new(minus.to_vec())?, cfg.horizon, cfg)?;
            if nearest(&end_plus) != nearest(&end_minus) {
                sharp += 1;
            }

            let mut min_d = f64::INFINITY;
            integrate_observed(net, &State::new(here.to_vec())?, cfg.horizon, cfg, |x| {
                let d = distance(x, saddle);
                if d < min_d {
                    min_d = d;
                }
            })?;
            min_dist_sum += min_d;
            if min_d < opts.approach_radius {
                approached += 1;
            }
            used += 1;
        }
        idx += stride;
    }
    if used == 0 {
        return Ok(TheoremCheck {
            samples_used: 0,
            sharpness: 0.0,
            saddle_approach_fraction: 0.0,
            mean_min_saddle_distance: f64::NAN,
        });
    }
    Ok(TheoremCheck {
        samples_used: used,
        sharpness: sharp as f64 / used as f64,
        saddle_approach_fraction: approached as f64 / used as f64,
        mean_min_saddle_distance: min_dist_sum / used as f64,
    })
}

/// Full basin characterization, serialized as the primary report artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasinReport {
    pub equilibria: Vec<EquilibriumReport>,
    pub main_eigenfunction_index: usize,
    pub main_eigenvalue_re: f64,
    pub main_eigenvalue_im: f64,
    pub excluded_eigenfunctions: Vec<usize>,
    pub boundary: LevelSetCurve,
    pub classified: Vec<IcRecord>,
    pub agreement_rate: f64,
    pub misclassification_rate: f64,
    pub unresolved: usize,
    /// Index (into `equilibria`) of the equilibrium the margin refers to.
    pub margin_equilibrium: usize,
    pub margin: f64,
    pub theorem_check: TheoremCheck,
}
