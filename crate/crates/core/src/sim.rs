//! Trajectory generation: fixed-step RK4 integration of the mass-action
//! field, uniform simplex sampling, and snapshot-pair assembly for the
//! operator fit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mak::{MakError, State, StoichiometricNetwork};

/// Components in `[-NEGATIVE_CLAMP, 0)` are rounded to zero after each step;
/// anything below signals a genuine escape from the domain.
pub const NEGATIVE_CLAMP: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("time {t} is not an integer multiple of step {step}")]
    StepMisalignment { t: f64, step: f64 },
    #[error(
        "state escaped the nonnegative domain at component {index} (value {value:.3e}, t = {t}); \
         reduce the integration step"
    )]
    StateEscapedDomain { index: usize, value: f64, t: f64 },
    #[error("integration failure in run {run}, segment {segment}: {source}")]
    RunFailure {
        run: usize,
        segment: usize,
        source: Box<SimError>,
    },
    #[error(transparent)]
    Mak(#[from] MakError),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}: {message}")]
    CsvParse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

/// Fixed-step integrator settings. `step` must divide any requested horizon
/// and sampling interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub step: f64,
    pub horizon: f64,
    pub method: IntegratorMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorMethod {
    Rk4,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            // Delta-t / 8 for the reference sampling interval 0.125.
            step: 0.015625,
            horizon: 200.0,
            method: IntegratorMethod::Rk4,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "integrator step must be positive, got {}",
                self.step
            )));
        }
        if !(self.horizon > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "integrator horizon must be positive, got {}",
                self.horizon
            )));
        }
        Ok(())
    }

    /// Number of steps covering `t`, or an error when `t` is not aligned.
    pub fn steps_for(&self, t: f64) -> Result<usize, SimError> {
        if t < 0.0 {
            return Err(SimError::InvalidConfig(format!(
                "negative integration time {t}"
            )));
        }
        let ratio = t / self.step;
        let n = ratio.round();
        if (ratio - n).abs() > 1e-9 * ratio.abs().max(1.0) {
            return Err(SimError::StepMisalignment { t, step: self.step });
        }
        Ok(n as usize)
    }
}

fn rk4_step(net: &StoichiometricNetwork, x: &mut [f64], h: f64, scratch: &mut Rk4Scratch) {
    let n = x.len();
    net.rhs_into(x, &mut scratch.k1);
    for i in 0..n {
        scratch.tmp[i] = x[i] + 0.5 * h * scratch.k1[i];
    }
    net.rhs_into(&scratch.tmp, &mut scratch.k2);
    for i in 0..n {
        scratch.tmp[i] = x[i] + 0.5 * h * scratch.k2[i];
    }
    net.rhs_into(&scratch.tmp, &mut scratch.k3);
    for i in 0..n {
        scratch.tmp[i] = x[i] + h * scratch.k3[i];
    }
    net.rhs_into(&scratch.tmp, &mut scratch.k4);
    for i in 0..n {
        x[i] += h / 6.0
            * (scratch.k1[i] + 2.0 * scratch.k2[i] + 2.0 * scratch.k3[i] + scratch.k4[i]);
    }
}

struct Rk4Scratch {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    tmp: Vec<f64>,
}

impl Rk4Scratch {
    fn new(n: usize) -> Self {
        Rk4Scratch {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            tmp: vec![0.0; n],
        }
    }
}

/// RK4 approximation of the flow map over time `t`, observing every
/// intermediate state (including the initial one).
pub fn integrate_observed(
    net: &StoichiometricNetwork,
    x0: &State,
    t: f64,
    cfg: &IntegratorConfig,
    mut observe: impl FnMut(&[f64]),
) -> Result<State, SimError> {
    cfg.validate()?;
    if x0.dim() != net.n_species() {
        return Err(SimError::Mak(MakError::DimensionMismatch {
            expected: net.n_species(),
            got: x0.dim(),
        }));
    }
    let n_steps = cfg.steps_for(t)?;
    let mut x = x0.to_vec();
    let mut scratch = Rk4Scratch::new(x.len());
    observe(&x);
    for s in 0..n_steps {
        rk4_step(net, &mut x, cfg.step, &mut scratch);
        for (i, v) in x.iter_mut().enumerate() {
            if *v < 0.0 {
                if *v >= -NEGATIVE_CLAMP {
                    *v = 0.0;
                } else {
                    return Err(SimError::StateEscapedDomain {
                        index: i,
                        value: *v,
                        t: (s + 1) as f64 * cfg.step,
                    });
                }
            }
        }
        observe(&x);
    }
    Ok(State::new(x)?)
}

/// RK4 approximation of the flow map `F^t(x0)`.
pub fn integrate(
    net: &StoichiometricNetwork,
    x0: &State,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<State, SimError> {
    integrate_observed(net, x0, t, cfg, |_| {})
}

/// Uniform samples over `{x >= 0, sum x <= 1}` in `dim` coordinates, via the
/// exponential-spacings Dirichlet construction. Deterministic per seed.
pub fn sample_unit_simplex(dim: usize, count: usize, seed: u64) -> Vec<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        // dim + 1 exponential spacings; dropping the last coordinate of the
        // Dirichlet(1, .., 1) sample yields the uniform law on the corner
        // simplex.
        let mut e = vec![0.0_f64; dim + 1];
        let mut total = 0.0;
        for v in e.iter_mut() {
            let u: f64 = rng.random();
            *v = -(1.0 - u).ln();
            total += *v;
        }
        if total <= 0.0 {
            continue;
        }
        let mut x = vec![0.0_f64; dim];
        let mut partial = 0.0;
        for i in 0..dim {
            // Guarantee exact membership under floating point: each
            // coordinate is capped by the remaining budget.
            x[i] = (e[i] / total).min(1.0 - partial);
            partial += x[i];
        }
        out.push(State::new(x).expect("simplex sample is nonnegative"));
    }
    out
}

/// Uniform samples over the reduced two-state simplex.
pub fn sample_simplex(count: usize, seed: u64) -> Vec<State> {
    sample_unit_simplex(2, count, seed)
}

/// Provenance of a snapshot set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub dt: f64,
    pub seed: u64,
    pub n_runs: usize,
    pub points_per_run: usize,
    pub integrator: IntegratorConfig,
}

/// Paired snapshots `(x_p, y_p)` with `y_p = F^{dt}(x_p)`, stored
/// column-wise.
#[derive(Debug, Clone)]
pub struct SnapshotSet {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub dt: f64,
    pub run_ids: Vec<u32>,
    pub pair_indices: Vec<u32>,
    pub meta: SnapshotMeta,
}

impl SnapshotSet {
    pub fn n_pairs(&self) -> usize {
        self.x.ncols()
    }

    pub fn state_dim(&self) -> usize {
        self.x.nrows()
    }

    /// Largest simplex violation over all stored columns: negative
    /// components and sums beyond one.
    pub fn max_simplex_violation(&self) -> f64 {
        let mut worst = 0.0_f64;
        for m in [&self.x, &self.y] {
            for col in m.columns() {
                let mut sum = 0.0;
                for &v in col.iter() {
                    worst = worst.max(-v);
                    sum += v;
                }
                worst = worst.max(sum - 1.0);
            }
        }
        worst
    }
}

/// Integrates `n_runs` trajectories from seeded simplex samples and emits
/// every consecutive pair, `P = n_runs * (points_per_run - 1)`.
pub fn generate_snapshots(
    net: &StoichiometricNetwork,
    n_runs: usize,
    points_per_run: usize,
    dt: f64,
    cfg: &IntegratorConfig,
    seed: u64,
) -> Result<SnapshotSet, SimError> {
    if n_runs < 1 || points_per_run < 2 {
        return Err(SimError::InvalidConfig(format!(
            "need n_runs >= 1 and points_per_run >= 2, got {n_runs} and {points_per_run}"
        )));
    }
    cfg.validate()?;
    cfg.steps_for(dt)?;

    let n = net.n_species();
    let p_total = n_runs * (points_per_run - 1);
    let mut x = Array2::zeros((n, p_total));
    let mut y = Array2::zeros((n, p_total));
    let mut run_ids = Vec::with_capacity(p_total);
    let mut pair_indices = Vec::with_capacity(p_total);

    let initials = sample_unit_simplex(n, n_runs, seed);
    let mut col = 0;
    for (run, ic) in initials.iter().enumerate() {
        let mut current = ic.clone();
        for segment in 0..points_per_run - 1 {
            let next = integrate(net, &current, dt, cfg).map_err(|e| SimError::RunFailure {
                run,
                segment,
                source: Box::new(e),
            })?;
            for k in 0..n {
                x[(k, col)] = current[k];
                y[(k, col)] = next[k];
            }
            run_ids.push(run as u32);
            pair_indices.push(segment as u32);
            col += 1;
            current = next;
        }
    }

    Ok(SnapshotSet {
        x,
        y,
        dt,
        run_ids,
        pair_indices,
        meta: SnapshotMeta {
            dt,
            seed,
            n_runs,
            points_per_run,
            integrator: *cfg,
        },
    })
}

fn fmt_full(v: f64) -> String {
    // 17 significant digits: lossless round trip for f64.
    format!("{v:.16e}")
}

impl SnapshotSet {
    /// Writes the pairs as CSV (header `x1..xn,y1..yn,run_id,pair_index`)
    /// plus a JSON metadata sidecar at `<path>.meta.json`.
    pub fn write_csv(&self, path: &Path) -> Result<(), SimError> {
        let n = self.state_dim();
        let mut text = String::new();
        for k in 0..n {
            let _ = write!(text, "x{},", k + 1);
        }
        for k in 0..n {
            let _ = write!(text, "y{},", k + 1);
        }
        text.push_str("run_id,pair_index\n");
        for p in 0..self.n_pairs() {
            for k in 0..n {
                text.push_str(&fmt_full(self.x[(k, p)]));
                text.push(',');
            }
            for k in 0..n {
                text.push_str(&fmt_full(self.y[(k, p)]));
                text.push(',');
            }
            let _ = writeln!(text, "{},{}", self.run_ids[p], self.pair_indices[p]);
        }
        fs::write(path, text).map_err(|e| SimError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let meta_path = sidecar_path(path);
        let meta = serde_json::to_string_pretty(&self.meta).expect("meta serializes");
        fs::write(&meta_path, meta).map_err(|e| SimError::Io {
            path: meta_path.display().to_string(),
            message: e.to_string(),
        })?;
        Ok(())
    }

    /// Reads a snapshot CSV and its metadata sidecar.
    pub fn read_csv(path: &Path) -> Result<Self, SimError> {
        let text = fs::read_to_string(path).map_err(|e| SimError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let pstr = path.display().to_string();
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| SimError::CsvParse {
            path: pstr.clone(),
            line: 1,
            message: "empty file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').collect();
        if cols.len() < 4 || (cols.len() - 2) % 2 != 0 {
            return Err(SimError::CsvParse {
                path: pstr,
                line: 1,
                message: format!("malformed header with {} columns", cols.len()),
            });
        }
        let n = (cols.len() - 2) / 2;

        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        let mut run_ids = Vec::new();
        let mut pair_indices = Vec::new();
        for (idx, line) in lines {
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 2 * n + 2 {
                return Err(SimError::CsvParse {
                    path: pstr,
                    line: lineno,
                    message: format!("expected {} fields, got {}", 2 * n + 2, fields.len()),
                });
            }
            let parse_f = |s: &str, what: &str| -> Result<f64, SimError> {
                s.parse::<f64>().map_err(|_| SimError::CsvParse {
                    path: pstr.clone(),
                    line: lineno,
                    message: format!("bad {what} value '{s}'"),
                })
            };
            for k in 0..n {
                xs.push(parse_f(fields[k], "x")?);
            }
            for k in 0..n {
                ys.push(parse_f(fields[n + k], "y")?);
            }
            run_ids.push(fields[2 * n].parse::<u32>().map_err(|_| SimError::CsvParse {
                path: pstr.clone(),
                line: lineno,
                message: format!("bad run_id '{}'", fields[2 * n]),
            })?);
            pair_indices.push(fields[2 * n + 1].parse::<u32>().map_err(|_| {
                SimError::CsvParse {
                    path: pstr.clone(),
                    line: lineno,
                    message: format!("bad pair_index '{}'", fields[2 * n + 1]),
                }
            })?);
        }
        let p_total = run_ids.len();
        if p_total == 0 {
            return Err(SimError::CsvParse {
                path: pstr,
                line: 1,
                message: "no data rows".into(),
            });
        }

        let meta_path = sidecar_path(path);
        let meta_text = fs::read_to_string(&meta_path).map_err(|e| SimError::Io {
            path: meta_path.display().to_string(),
            message: e.to_string(),
        })?;
        let meta: SnapshotMeta =
            serde_json::from_str(&meta_text).map_err(|e| SimError::Io {
                path: meta_path.display().to_string(),
                message: format!("bad metadata: {e}"),
            })?;

        // Stored row-major per pair; transpose into column-per-pair.
        let mut x = Array2::zeros((n, p_total));
        let mut y = Array2::zeros((n, p_total));
        for p in 0..p_total {
            for k in 0..n {
                x[(k, p)] = xs[p * n + k];
                y[(k, p)] = ys[p * n + k];
            }
        }
        Ok(SnapshotSet {
            x,
            y,
            dt: meta.dt,
            run_ids,
            pair_indices,
            meta,
        })
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".meta.json");
    std::path::PathBuf::from(os)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mak::{build_replicator_network, ReplicatorForm, ReplicatorParams};
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;

    fn params() -> ReplicatorParams {
        ReplicatorParams::new(10.0, 0.1, 0.02).unwrap()
    }

    fn net2() -> crate::mak::StoichiometricNetwork {
        build_replicator_network(&params(), ReplicatorForm::ReducedTwoState).unwrap()
    }

    fn net3() -> crate::mak::StoichiometricNetwork {
        build_replicator_network(&params(), ReplicatorForm::ReducedThreeSpecies).unwrap()
    }

    #[test]
    fn equilibrium_is_flow_invariant() {
        let net = net3();
        let x0 = State::new(vec![1.0, 0.0, 0.0]).unwrap();
        let cfg = IntegratorConfig::default();
        let x = integrate(&net, &x0, 10.0, &cfg).unwrap();
        assert_eq!(x.as_ref(), x0.as_ref());
    }

    #[test]
    fn focus_equilibrium_stays_put() {
        let net = net2();
        let eq = crate::mak::analytic_equilibria(&params()).unwrap();
        let focus = State::new(vec![eq[2][0], eq[2][1]]).unwrap();
        let cfg = IntegratorConfig::default();
        let x = integrate(&net, &focus, 10.0, &cfg).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(x[k], focus[k], epsilon = 1e-6);
        }
    }

    #[test]
    fn long_horizon_converges_to_an_equilibrium() {
        let net = net2();
        let cfg = IntegratorConfig::default();
        let x0 = State::new(vec![0.5, 0.25]).unwrap();
        let x = integrate(&net, &x0, 100.0, &cfg).unwrap();
        let eq = crate::mak::analytic_equilibria(&params()).unwrap();
        let best = eq
            .iter()
            .map(|e| {
                let dx = x[0] - e[0];
                let dy = x[1] - e[1];
                (dx * dx + dy * dy).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-3, "closest equilibrium at distance {best}");
    }

    #[test]
    fn flow_composition_is_exact() {
        let net = net2();
        let cfg = IntegratorConfig::default();
        let x0 = State::new(vec![0.3, 0.2]).unwrap();
        let once = integrate(&net, &x0, 3.0, &cfg).unwrap();
        let part = integrate(&net, &x0, 1.25, &cfg).unwrap();
        let rest = integrate(&net, &part, 1.75, &cfg).unwrap();
        // Identical step sequence, so bitwise equality.
        assert_eq!(once.as_ref(), rest.as_ref());
    }

    #[test]
    fn rk4_is_fourth_order() {
        let net = net2();
        let x0 = State::new(vec![0.4, 0.3]).unwrap();
        let t = 1.0;
        let run = |h: f64| {
            let cfg = IntegratorConfig {
                step: h,
                ..Default::default()
            };
            integrate(&net, &x0, t, &cfg).unwrap()
        };
        let reference = run(0.1 / 16.0);
        let err = |x: &State| -> f64 {
            x.iter()
                .zip(reference.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        };
        let e1 = err(&run(0.1));
        let e2 = err(&run(0.05));
        assert!(
            e1 / e2 > 8.0,
            "step halving should shrink the error ~16x, got {}",
            e1 / e2
        );
    }

    #[test]
    fn misaligned_time_is_rejected() {
        let net = net2();
        let cfg = IntegratorConfig {
            step: 0.1,
            ..Default::default()
        };
        let x0 = State::new(vec![0.3, 0.2]).unwrap();
        assert!(matches!(
            integrate(&net, &x0, 0.25, &cfg),
            Err(SimError::StepMisalignment { .. })
        ));
    }

    #[test]
    fn domain_escape_is_detected() {
        // x' = -2 x^2 with an absurd step drives the state far negative.
        let a = Array2::from_shape_vec((1, 1), vec![2]).unwrap();
        let b = Array2::from_shape_vec((1, 1), vec![0]).unwrap();
        let net =
            crate::mak::StoichiometricNetwork::new(vec!["u".into()], a, b, vec![1.0]).unwrap();
        let cfg = IntegratorConfig {
            step: 3.0,
            ..Default::default()
        };
        let x0 = State::new(vec![1.0]).unwrap();
        assert!(matches!(
            integrate(&net, &x0, 3.0, &cfg),
            Err(SimError::StateEscapedDomain { .. })
        ));
    }

    #[test]
    fn simplex_sampling_is_uniform_and_exact() {
        let pts = sample_simplex(10_000, 99);
        let mut mean = [0.0_f64; 2];
        for p in &pts {
            assert!(p[0] >= 0.0 && p[1] >= 0.0 && p[0] + p[1] <= 1.0);
            mean[0] += p[0];
            mean[1] += p[1];
        }
        mean[0] /= pts.len() as f64;
        mean[1] /= pts.len() as f64;
        assert_abs_diff_eq!(mean[0], 1.0 / 3.0, epsilon = 0.01);
        assert_abs_diff_eq!(mean[1], 1.0 / 3.0, epsilon = 0.01);
    }

    #[test]
    fn simplex_sampling_is_deterministic() {
        let a = sample_simplex(5, 1234);
        let b = sample_simplex(5, 1234);
        for (p, q) in a.iter().zip(b.iter()) {
            assert_eq!(p.as_ref(), q.as_ref());
        }
        let c = sample_simplex(5, 1235);
        assert!(a.iter().zip(c.iter()).any(|(p, q)| p.as_ref() != q.as_ref()));
    }

    #[test]
    fn snapshot_counts_and_pairing() {
        let net = net2();
        let cfg = IntegratorConfig::default();
        let snaps = generate_snapshots(&net, 100, 21, 0.125, &cfg, 42).unwrap();
        assert_eq!(snaps.n_pairs(), 2000);
        assert!(snaps.max_simplex_violation() <= 1e-6);

        let single = generate_snapshots(&net, 1, 2, 0.125, &cfg, 42).unwrap();
        assert_eq!(single.n_pairs(), 1);
        let x0 = State::new(single.x.column(0).to_vec()).unwrap();
        let y = integrate(&net, &x0, 0.125, &cfg).unwrap();
        assert_eq!(single.y.column(0).to_vec(), y.to_vec());
    }

    #[test]
    fn snapshot_pairs_reintegrate_exactly() {
        let net = net2();
        let cfg = IntegratorConfig::default();
        let snaps = generate_snapshots(&net, 5, 4, 0.125, &cfg, 77).unwrap();
        for p in 0..snaps.n_pairs() {
            let x0 = State::new(snaps.x.column(p).to_vec()).unwrap();
            let y = integrate(&net, &x0, snaps.dt, &cfg).unwrap();
            assert_eq!(snaps.y.column(p).to_vec(), y.to_vec());
        }
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let net = net2();
        let cfg = IntegratorConfig::default();
        let snaps = generate_snapshots(&net, 3, 5, 0.125, &cfg, 7).unwrap();
        let dir = std::env::temp_dir().join(format!("kbasin-sim-test-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("snaps.csv");
        snaps.write_csv(&path).unwrap();
        let back = SnapshotSet::read_csv(&path).unwrap();
        assert_eq!(back.x, snaps.x);
        assert_eq!(back.y, snaps.y);
        assert_eq!(back.run_ids, snaps.run_ids);
        assert_eq!(back.pair_indices, snaps.pair_indices);
        assert_eq!(back.meta, snaps.meta);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn truncated_csv_reports_line_number() {
        let dir = std::env::temp_dir().join(format!("kbasin-sim-trunc-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.csv");
        fs::write(&path, "x1,x2,y1,y2,run_id,pair_index\n0.1,0.2,0.3\n").unwrap();
        match SnapshotSet::read_csv(&path) {
            Err(SimError::CsvParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn misaligned_dt_is_rejected_in_generation() {
        let net = net2();
        let cfg = IntegratorConfig {
            step: 0.12,
            ..Default::default()
        };
        assert!(matches!(
            generate_snapshots(&net, 1, 2, 0.125, &cfg, 1),
            Err(SimError::StepMisalignment { .. })
        ));
    }

    #[test]
    fn simplex_drift_stays_small_over_unit_time() {
        let net = net3();
        let cfg = IntegratorConfig::default();
        let x0 = State::new(vec![0.5, 0.3, 0.2]).unwrap();
        let x = integrate(&net, &x0, 1.0, &cfg).unwrap();
        let drift = (1.0 - x.iter().sum::<f64>()).abs();
        assert!(drift < 1e-6, "drift {drift}");
    }
}
