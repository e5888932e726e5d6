//! Extended dynamic mode decomposition: accumulate the Gram and cross
//! matrices from snapshot pairs, fit the finite-dimensional operator
//! `K = G^+ A`, decompose its spectrum, and reconstruct forward and backward
//! state evolution from eigenvalues, eigenfunctions, and modes.

pub mod dictionary;

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Inverse, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dictionary::Dictionary;

use crate::sim::SnapshotSet;

#[derive(Debug, Error)]
pub enum EdmdError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty snapshot set")]
    EmptySnapshotSet,
    #[error("eigenfunction index {index} out of range (dictionary size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("imaginary residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ImaginaryResidualExceeded { residual: f64, tol: f64 },
    #[error("degenerate spectrum: every mode fell below the backward-flow floor")]
    DegenerateSpectrum,
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl From<ndarray_linalg::error::LinalgError> for EdmdError {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        EdmdError::Linalg(e.to_string())
    }
}

/// Eigenvalue magnitudes below this floor are excluded from backward
/// reconstruction, where they would otherwise amplify without bound.
pub const MU_FLOOR: f64 = 1e-6;

/// Default bound on the imaginary part left over after mode recombination.
pub const DEFAULT_IMAG_TOL: f64 = 1e-6;

/// Which branch produced the weight matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightBranch {
    /// Every coordinate function is a dictionary member; the weights are an
    /// exact 0/1 selector.
    ExactSelector,
    /// Least-squares reconstruction of the states from the dictionary span.
    LeastSquares,
}

/// Weight matrix relating dictionary values to the full-state observable,
/// `g(x) = (Psi(x) B)^T`.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    pub matrix: Array2<f64>,
    pub branch: WeightBranch,
    /// Frobenius reconstruction residual over the training states.
    pub residual: f64,
}

/// Computes the weight matrix for a dictionary over training snapshots:
/// the exact selector when the coordinates are dictionary members, least
/// squares otherwise.
pub fn compute_weight_matrix(
    dict: &Dictionary,
    snapshots: &SnapshotSet,
) -> Result<WeightMatrix, EdmdError> {
    let psi_x = evaluate_rows(dict, &snapshots.x)?;
    weight_matrix_from_rows(dict, &psi_x, &snapshots.x)
}

fn weight_matrix_from_rows(
    dict: &Dictionary,
    psi_x: &Array2<f64>,
    x: &Array2<f64>,
) -> Result<WeightMatrix, EdmdError> {
    let n = dict.state_dim();
    let nk = dict.size();
    if let Some(coord_idx) = dict.coordinate_indices() {
        let mut b = Array2::zeros((nk, n));
        for (j, &i) in coord_idx.iter().enumerate() {
            b[(i, j)] = 1.0;
        }
        let residual = reconstruction_residual(psi_x, &b, x);
        return Ok(WeightMatrix {
            matrix: b,
            branch: WeightBranch::ExactSelector,
            residual,
        });
    }
    // min_B || Psi(X) B - X^T ||_F via the pseudoinverse.
    let (pinv, _) = pinv_svd(psi_x)?;
    let b = pinv.dot(&x.t());
    let residual = reconstruction_residual(psi_x, &b, x);
    Ok(WeightMatrix {
        matrix: b,
        branch: WeightBranch::LeastSquares,
        residual,
    })
}

fn reconstruction_residual(psi_x: &Array2<f64>, b: &Array2<f64>, x: &Array2<f64>) -> f64 {
    let recon = psi_x.dot(b);
    let diff = &recon - &x.t();
    diff.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Per-eigenfunction bookkeeping: the complex scale removed by
/// normalization, the variation of the eigenfunction over the training
/// data (standard deviation of its values; constants score zero), and how
/// much of the eigenvector lies in the subspace discarded by the Gram rank
/// cutoff (null-dominated modes carry no data support).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenfunctionMeta {
    pub scale_re: f64,
    pub scale_im: f64,
    pub variation: f64,
    pub max_abs_on_training: f64,
    pub null_fraction: f64,
}

/// Fit diagnostics recorded alongside the operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub n_pairs: usize,
    pub rank_g: usize,
    pub sigma_max: f64,
    pub sigma_min: f64,
    pub rank_cutoff: f64,
    /// Relative Frobenius residual of `Psi(X) K - Psi(Y)`.
    pub projection_residual: f64,
    /// Frobenius residual of the state reconstruction from the dictionary.
    pub reconstruction_residual: f64,
    pub weight_branch: WeightBranch,
}

/// A fitted Koopman-operator approximation.
///
/// Eigenpairs are sorted by descending eigenvalue magnitude (ties: descending
/// real part, then ascending imaginary part), and each right eigenvector is
/// scaled so its eigenfunction attains maximum modulus one with zero phase
/// over the training data.
#[derive(Debug, Clone)]
pub struct KoopmanModel {
    pub dictionary: Dictionary,
    pub dt: f64,
    pub k: Array2<f64>,
    pub gram: Array2<f64>,
    pub cross: Array2<f64>,
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors, one column per eigenpair.
    pub xi: Array2<Complex64>,
    /// Inverse of `xi`; its rows are the conjugated left eigenvectors.
    pub w_star: Array2<Complex64>,
    pub b_k: Array2<f64>,
    /// Koopman modes, one column per eigenpair.
    pub modes: Array2<Complex64>,
    pub eigenfunction_meta: Vec<EigenfunctionMeta>,
    pub diagnostics: FitDiagnostics,
}

/// Evaluates the dictionary on every column of `states`, one row per column.
pub fn evaluate_rows(dict: &Dictionary, states: &Array2<f64>) -> Result<Array2<f64>, EdmdError> {
    let p = states.ncols();
    let nk = dict.size();
    let mut rows = Array2::zeros((p, nk));
    let mut buf = vec![0.0; nk];
    let mut xbuf = vec![0.0; states.nrows()];
    for p_i in 0..p {
        for (k, v) in xbuf.iter_mut().enumerate() {
            *v = states[(k, p_i)];
        }
        dict.eval_into(&xbuf, &mut buf)?;
        for (j, &v) in buf.iter().enumerate() {
            rows[(p_i, j)] = v;
        }
    }
    Ok(rows)
}

/// `(1/P) sum_p a_p b_p^T` accumulated entry-wise over sorted addends, so the
/// result is independent of snapshot order down to the last bit.
fn accumulate_normalized(psi_a: &Array2<f64>, psi_b: &Array2<f64>) -> Array2<f64> {
    let p = psi_a.nrows();
    let nk = psi_a.ncols();
    let mut out = Array2::zeros((nk, nk));
    let mut buf = vec![0.0_f64; p];
    for i in 0..nk {
        for j in 0..nk {
            for q in 0..p {
                buf[q] = psi_a[(q, i)] * psi_b[(q, j)];
            }
            buf.sort_unstable_by(f64::total_cmp);
            let mut s = 0.0;
            for &v in buf.iter() {
                s += v;
            }
            out[(i, j)] = s / p as f64;
        }
    }
    out
}

struct PinvInfo {
    rank: usize,
    sigma_max: f64,
    sigma_min: f64,
    cutoff: f64,
    /// Left singular vectors of the directions below the cutoff.
    null_basis: Array2<f64>,
}

/// Moore-Penrose pseudoinverse by SVD with relative cutoff
/// `max(rows, cols) * eps * sigma_max`.
fn pinv_svd(m: &Array2<f64>) -> Result<(Array2<f64>, PinvInfo), EdmdError> {
    let (u, s, vt) = m.svd(true, true)?;
    let u = u.expect("svd requested u");
    let vt = vt.expect("svd requested vt");
    let sigma_max = s.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = m.nrows().max(m.ncols()) as f64 * f64::EPSILON * sigma_max;
    let rank = s.iter().filter(|&&v| v > cutoff).count();
    let sigma_min = s.iter().cloned().fold(f64::INFINITY, f64::min);

    // V * diag(1/s) * U^T over the leading min(rows, cols) directions,
    // dropping those below the cutoff.
    let kdim = s.len();
    let mut v_scaled = Array2::zeros((vt.ncols(), kdim));
    for i in 0..kdim {
        let inv = if s[i] > cutoff { 1.0 / s[i] } else { 0.0 };
        for r in 0..vt.ncols() {
            v_scaled[(r, i)] = vt[(i, r)] * inv;
        }
    }
    let u_thin = u.slice(ndarray::s![.., ..kdim]);
    let pinv = v_scaled.dot(&u_thin.t());

    let dropped: Vec<usize> = (0..kdim).filter(|&i| s[i] <= cutoff).collect();
    let mut null_basis = Array2::zeros((m.nrows(), dropped.len()));
    for (c, &i) in dropped.iter().enumerate() {
        for r in 0..m.nrows() {
            null_basis[(r, c)] = u[(r, i)];
        }
    }
    Ok((
        pinv,
        PinvInfo {
            rank,
            sigma_max,
            sigma_min,
            cutoff,
            null_basis,
        },
    ))
}

/// Normalizes eigenvector columns over training dictionary rows: scales each
/// column so the maximal-modulus eigenfunction value over the data is `1 + 0i`.
/// Returns the applied scales and the variation scores.
fn normalize_columns(
    psi_x: &Array2<f64>,
    xi: &mut Array2<Complex64>,
) -> Vec<EigenfunctionMeta> {
    let p = psi_x.nrows();
    let nk = xi.ncols();
    let mut meta = Vec::with_capacity(nk);
    for j in 0..nk {
        // phi_j over the training data.
        let mut values = vec![Complex64::new(0.0, 0.0); p];
        for (q, slot) in values.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..psi_x.ncols() {
                acc += psi_x[(q, i)] * xi[(i, j)];
            }
            *slot = acc;
        }
        let mut best = 0usize;
        let mut best_abs = 0.0_f64;
        for (q, v) in values.iter().enumerate() {
            let a = v.norm();
            if a > best_abs {
                best_abs = a;
                best = q;
            }
        }
        let scale = if best_abs > 1e-12 {
            values[best]
        } else {
            // Eigenvector invisible on the data; leave it untouched.
            Complex64::new(1.0, 0.0)
        };
        for i in 0..xi.nrows() {
            let v = xi[(i, j)] / scale;
            xi[(i, j)] = v;
        }
        let mut mean = Complex64::new(0.0, 0.0);
        for v in &values {
            mean += v / scale;
        }
        mean /= p as f64;
        let mut var = 0.0;
        for v in &values {
            var += (v / scale - mean).norm_sqr();
        }
        let variation = (var / p as f64).sqrt();
        meta.push(EigenfunctionMeta {
            scale_re: scale.re,
            scale_im: scale.im,
            variation,
            max_abs_on_training: best_abs,
            null_fraction: 0.0,
        });
    }
    meta
}

/// Fits the operator `K = G^+ A` from snapshot pairs projected on the
/// dictionary, then derives the spectral pieces used downstream.
pub fn fit(snapshots: &SnapshotSet, dict: &Dictionary) -> Result<KoopmanModel, EdmdError> {
    let p = snapshots.n_pairs();
    if p == 0 {
        return Err(EdmdError::EmptySnapshotSet);
    }
    if snapshots.state_dim() != dict.state_dim() {
        return Err(EdmdError::DimensionMismatch {
            expected: dict.state_dim(),
            got: snapshots.state_dim(),
        });
    }

    let psi_x = evaluate_rows(dict, &snapshots.x)?;
    let psi_y = evaluate_rows(dict, &snapshots.y)?;

    let gram = accumulate_normalized(&psi_x, &psi_x);
    let cross = accumulate_normalized(&psi_x, &psi_y);

    let (g_pinv, pinv_info) = pinv_svd(&gram)?;
    let k = g_pinv.dot(&cross);

    let (raw_vals, raw_vecs): (Array1<Complex64>, Array2<Complex64>) = k.eig()?;

    // Deterministic eigenpair order: |mu| desc, Re desc, Im asc.
    let nk = dict.size();
    let mut order: Vec<usize> = (0..nk).collect();
    order.sort_by(|&a, &b| {
        raw_vals[b]
            .norm()
            .total_cmp(&raw_vals[a].norm())
            .then(raw_vals[b].re.total_cmp(&raw_vals[a].re))
            .then(raw_vals[a].im.total_cmp(&raw_vals[b].im))
    });
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| raw_vals[i]).collect();
    let mut xi = Array2::zeros((nk, nk));
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..nk {
            xi[(r, dst)] = raw_vecs[(r, src)];
        }
    }

    let eigenfunction_meta = normalize_columns(&psi_x, &mut xi);

    let w_star = xi
        .inv()
        .map_err(|e| EdmdError::Linalg(format!("eigenvector basis is singular: {e}")))?;

    let weights = weight_matrix_from_rows(dict, &psi_x, &snapshots.x)?;
    let b_complex = weights.matrix.mapv(|v| Complex64::new(v, 0.0));
    let modes = w_star.dot(&b_complex).t().to_owned();

    // Residual of the projected one-step map.
    let pred = psi_x.dot(&k);
    let num = (&pred - &psi_y).iter().map(|v| v * v).sum::<f64>().sqrt();
    let den = psi_y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);

    let diagnostics = FitDiagnostics {
        n_pairs: p,
        rank_g,
        sigma_max,
        sigma_min,
        rank_cutoff,
        projection_residual: num / den,
        reconstruction_residual: weights.residual,
        weight_branch: weights.branch,
    };

    Ok(KoopmanModel {
        dictionary: dict.clone(),
        dt: snapshots.dt,
        k,
        gram,
        cross,
        eigenvalues,
        xi,
        w_star,
        b_k: weights.matrix,
        modes,
        eigenfunction_meta,
        diagnostics,
    })
}

/// A single Koopman eigenfunction `phi(x) = Psi(x) xi`.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    pub index: usize,
    pub eigenvalue: Complex64,
    pub coefficients: Vec<Complex64>,
    pub scale_applied: Complex64,
    pub variation: f64,
    dictionary: Dictionary,
}

impl Eigenfunction {
    pub fn eval(&self, x: &[f64]) -> Result<Complex64, EdmdError> {
        let psi = self.dictionary.eval(x)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, c) in psi.iter().zip(self.coefficients.iter()) {
            acc += p * c;
        }
        Ok(acc)
    }

    /// Re-normalizes over reference states: the maximal-modulus value
    /// becomes `1 + 0i`. Removes any complex scale on the coefficients.
    pub fn renormalized_over(&self, states: &[Vec<f64>]) -> Result<Eigenfunction, EdmdError> {
        let mut best = Complex64::new(1.0, 0.0);
        let mut best_abs = 0.0;
        for s in states {
            let v = self.eval(s)?;
            if v.norm() > best_abs {
                best_abs = v.norm();
                best = v;
            }
        }
        let scale = if best_abs > 1e-12 {
            best
        } else {
            Complex64::new(1.0, 0.0)
        };
        let mut out = self.clone();
        for c in out.coefficients.iter_mut() {
            *c /= scale;
        }
        out.scale_applied = self.scale_applied * scale;
        Ok(out)
    }
}

/// State reconstructed from the spectral expansion, with the imaginary
/// magnitude discarded by the final projection and any modes excluded from
/// the sum.
#[derive(Debug, Clone)]
pub struct Prediction {
    pub state: Vec<f64>,
    pub imag_residual: f64,
    pub excluded_modes: Vec<usize>,
}

impl KoopmanModel {
    pub fn state_dim(&self) -> usize {
        self.dictionary.state_dim()
    }

    pub fn size(&self) -> usize {
        self.dictionary.size()
    }

    /// `Phi(x) = Psi(x) Xi` as a complex row.
    pub fn eigenfunction_values(&self, x: &[f64]) -> Result<Vec<Complex64>, EdmdError> {
        let psi = self.dictionary.eval(x)?;
        let nk = self.size();
        let mut out = vec![Complex64::new(0.0, 0.0); nk];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..nk {
                acc += psi[i] * self.xi[(i, j)];
            }
            *slot = acc;
        }
        Ok(out)
    }

    pub fn eval_eigenfunction(&self, index: usize, x: &[f64]) -> Result<Complex64, EdmdError> {
        if index >= self.size() {
            return Err(EdmdError::IndexOutOfRange {
                index,
                size: self.size(),
            });
        }
        let psi = self.dictionary.eval(x)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &p) in psi.iter().enumerate() {
            acc += p * self.xi[(i, index)];
        }
        Ok(acc)
    }

    pub fn eigenfunction(&self, index: usize) -> Result<Eigenfunction, EdmdError> {
        if index >= self.size() {
            return Err(EdmdError::IndexOutOfRange {
                index,
                size: self.size(),
            });
        }
        Ok(Eigenfunction {
            index,
            eigenvalue: self.eigenvalues[index],
            coefficients: self.xi.column(index).to_vec(),
            scale_applied: Complex64::new(
                self.eigenfunction_meta[index].scale_re,
                self.eigenfunction_meta[index].scale_im,
            ),
            variation: self.eigenfunction_meta[index].variation,
            dictionary: self.dictionary.clone(),
        })
    }

    fn reconstruct(
        &self,
        x: &[f64],
        powers: &[Option<Complex64>],
        imag_tol: f64,
    ) -> Result<Prediction, EdmdError> {
        let phi = self.eigenfunction_values(x)?;
        let n = self.state_dim();
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        let mut excluded = Vec::new();
        for (j, pw) in powers.iter().enumerate() {
            match pw {
                Some(p) => {
                    let w = phi[j] * p;
                    for (k, slot) in acc.iter_mut().enumerate() {
                        *slot += self.modes[(k, j)] * w;
                    }
                }
                None => excluded.push(j),
            }
        }
        if excluded.len() == powers.len() {
            return Err(EdmdError::DegenerateSpectrum);
        }
        let imag_residual = acc.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if imag_residual > imag_tol {
            return Err(EdmdError::ImaginaryResidualExceeded {
                residual: imag_residual,
                tol: imag_tol,
            });
        }
        Ok(Prediction {
            state: acc.iter().map(|v| v.re).collect(),
            imag_residual,
            excluded_modes: excluded,
        })
    }

    /// `x(eta) = (M^eta ⊙ V) Phi(x0)^T`, projected back to the reals.
    pub fn predict_forward_with(
        &self,
        x0: &[f64],
        eta: u32,
        imag_tol: f64,
    ) -> Result<Prediction, EdmdError> {
        let powers: Vec<Option<Complex64>> = self
            .eigenvalues
            .iter()
            .map(|mu| Some(mu.powi(eta as i32)))
            .collect();
        self.reconstruct(x0, &powers, imag_tol)
    }

    pub fn predict_forward(&self, x0: &[f64], eta: u32) -> Result<Prediction, EdmdError> {
        self.predict_forward_with(x0, eta, DEFAULT_IMAG_TOL)
    }

    /// `x(-eta) = (M^{-eta} ⊙ V) Phi(x)^T`. Eigenvalues with magnitude below
    /// [`MU_FLOOR`] are excluded from the sum and reported.
    pub fn predict_backward_with(
        &self,
        x: &[f64],
        eta: u32,
        imag_tol: f64,
    ) -> Result<Prediction, EdmdError> {
        let powers: Vec<Option<Complex64>> = self
            .eigenvalues
            .iter()
            .map(|mu| {
                if mu.norm() > MU_FLOOR {
                    Some(mu.powi(-(eta as i32)))
                } else {
                    None
                }
            })
            .collect();
        self.reconstruct(x, &powers, imag_tol)
    }

    pub fn predict_backward(&self, x: &[f64], eta: u32) -> Result<Prediction, EdmdError> {
        self.predict_backward_with(x, eta, DEFAULT_IMAG_TOL)
    }

    pub fn save(&self, path: &Path) -> Result<(), EdmdError> {
        let artifact = ModelArtifact::from_model(self);
        let text = serde_json::to_string_pretty(&artifact).expect("model serializes");
        fs::write(path, text).map_err(|e| EdmdError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, EdmdError> {
        let text = fs::read_to_string(path).map_err(|e| EdmdError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let artifact: ModelArtifact =
            serde_json::from_str(&text).map_err(|e| EdmdError::Io {
                path: path.display().to_string(),
                message: format!("bad model artifact: {e}"),
            })?;
        artifact.into_model()
    }
}

/// Row-major real matrix for the on-disk artifact.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatF {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl MatF {
    fn from_array(a: &Array2<f64>) -> Self {
        MatF {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().cloned().collect(),
        }
    }

    fn to_array(&self) -> Result<Array2<f64>, EdmdError> {
        Array2::from_shape_vec((self.rows, self.cols), self.data.clone())
            .map_err(|e| EdmdError::Linalg(format!("bad matrix shape in artifact: {e}")))
    }
}

fn split_complex(a: &Array2<Complex64>) -> (MatF, MatF) {
    let re = a.mapv(|v| v.re);
    let im = a.mapv(|v| v.im);
    (MatF::from_array(&re), MatF::from_array(&im))
}

fn join_complex(re: &MatF, im: &MatF) -> Result<Array2<Complex64>, EdmdError> {
    let re = re.to_array()?;
    let im = im.to_array()?;
    if re.dim() != im.dim() {
        return Err(EdmdError::Linalg(
            "real/imaginary artifact shapes disagree".into(),
        ));
    }
    let mut out = Array2::zeros(re.dim());
    for ((idx, &r), &i) in re.indexed_iter().zip(im.iter()) {
        out[idx] = Complex64::new(r, i);
    }
    Ok(out)
}

/// On-disk model: real and imaginary parts stored as separate arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelArtifact {
    dictionary: Dictionary,
    dt: f64,
    k: MatF,
    gram: MatF,
    cross: MatF,
    eigenvalues_re: Vec<f64>,
    eigenvalues_im: Vec<f64>,
    xi_re: MatF,
    xi_im: MatF,
    w_star_re: MatF,
    w_star_im: MatF,
    b_k: MatF,
    modes_re: MatF,
    modes_im: MatF,
    eigenfunction_meta: Vec<EigenfunctionMeta>,
    diagnostics: FitDiagnostics,
}

impl ModelArtifact {
    fn from_model(m: &KoopmanModel) -> Self {
        let (xi_re, xi_im) = split_complex(&m.xi);
        let (w_star_re, w_star_im) = split_complex(&m.w_star);
        let (modes_re, modes_im) = split_complex(&m.modes);
        ModelArtifact {
            dictionary: m.dictionary.clone(),
            dt: m.dt,
            k: MatF::from_array(&m.k),
            gram: MatF::from_array(&m.gram),
            cross: MatF::from_array(&m.cross),
            eigenvalues_re: m.eigenvalues.iter().map(|v| v.re).collect(),
            eigenvalues_im: m.eigenvalues.iter().map(|v| v.im).collect(),
            xi_re,
            xi_im,
            w_star_re,
            w_star_im,
            b_k: MatF::from_array(&m.b_k),
            modes_re,
            modes_im,
            eigenfunction_meta: m.eigenfunction_meta.clone(),
            diagnostics: m.diagnostics.clone(),
        }
    }

    fn into_model(self) -> Result<KoopmanModel, EdmdError> {
        let eigenvalues = self
            .eigenvalues_re
            .iter()
            .zip(self.eigenvalues_im.iter())
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect();
        Ok(KoopmanModel {
            dictionary: self.dictionary,
            dt: self.dt,
            k: self.k.to_array()?,
            gram: self.gram.to_array()?,
            cross: self.cross.to_array()?,
            eigenvalues,
            xi: join_complex(&self.xi_re, &self.xi_im)?,
            w_star: join_complex(&self.w_star_re, &self.w_star_im)?,
            b_k: self.b_k.to_array()?,
            modes: join_complex(&self.modes_re, &self.modes_im)?,
            eigenfunction_meta: self.eigenfunction_meta,
            diagnostics: self.diagnostics,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{IntegratorConfig, SnapshotMeta, SnapshotSet};
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn meta_stub(dt: f64) -> SnapshotMeta {
        SnapshotMeta {
            dt,
            seed: 0,
            n_runs: 0,
            points_per_run: 0,
            integrator: IntegratorConfig::default(),
        }
    }

    /// Snapshot pairs from an explicit linear map `y = M x`.
    fn linear_snapshots(m: &Array2<f64>, points: &[Vec<f64>], dt: f64) -> SnapshotSet {
        let n = m.nrows();
        let p = points.len();
        let mut x = Array2::zeros((n, p));
        let mut y = Array2::zeros((n, p));
        for (c, pt) in points.iter().enumerate() {
            let v = ndarray::Array1::from_vec(pt.clone());
            let w = m.dot(&v);
            for k in 0..n {
                x[(k, c)] = v[k];
                y[(k, c)] = w[k];
            }
        }
        SnapshotSet {
            x,
            y,
            dt,
            run_ids: vec![0; p],
            pair_indices: (0..p as u32).collect(),
            meta: meta_stub(dt),
        }
    }

    fn scalar_contraction(a: f64) -> KoopmanModel {
        let m = Array2::from_shape_vec((1, 1), vec![a]).unwrap();
        let pts: Vec<Vec<f64>> = (1..=12).map(|i| vec![i as f64 / 12.0]).collect();
        let snaps = linear_snapshots(&m, &pts, 1.0);
        fit(&snaps, &Dictionary::monomial(1, 1)).unwrap()
    }

    #[test]
    fn scalar_linear_map_is_recovered_exactly() {
        let model = scalar_contraction(0.5);
        assert_abs_diff_eq!(model.k[(0, 0)], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(model.k[(0, 1)], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(model.k[(1, 0)], 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(model.k[(1, 1)], 0.5, epsilon = 1e-10);
        let mut mags: Vec<f64> = model.eigenvalues.iter().map(|v| v.norm()).collect();
        mags.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(mags[0], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(mags[1], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn identity_data_gives_identity_operator() {
        let m = Array2::eye(2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vec<f64>> = (0..200)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let snaps = linear_snapshots(&m, &pts, 1.0);
        let model = fit(&snaps, &Dictionary::tensor_hermite(2, 2)).unwrap();
        assert_eq!(model.diagnostics.rank_g, 9);
        for i in 0..9 {
            for j in 0..9 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(model.k[(i, j)], expected, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn empty_snapshots_are_rejected() {
        let snaps = SnapshotSet {
            x: Array2::zeros((1, 0)),
            y: Array2::zeros((1, 0)),
            dt: 1.0,
            run_ids: vec![],
            pair_indices: vec![],
            meta: meta_stub(1.0),
        };
        assert!(matches!(
            fit(&snaps, &Dictionary::monomial(1, 1)),
            Err(EdmdError::EmptySnapshotSet)
        ));
    }

    #[test]
    fn weight_matrix_selector_branch() {
        let m = Array2::eye(2);
        let pts: Vec<Vec<f64>> = vec![vec![0.1, 0.2], vec![0.3, 0.1], vec![0.2, 0.4]];
        let snaps = linear_snapshots(&m, &pts, 1.0);
        let w = compute_weight_matrix(&Dictionary::tensor_hermite(4, 2), &snaps).unwrap();
        assert_eq!(w.branch, WeightBranch::ExactSelector);
        assert_eq!(w.matrix[(5, 0)], 1.0);
        assert_eq!(w.matrix[(1, 1)], 1.0);
        assert_eq!(w.matrix.iter().filter(|&&v| v != 0.0).count(), 2);
        assert_abs_diff_eq!(w.residual, 0.0, epsilon = 1e-12);

        let w = compute_weight_matrix(&Dictionary::monomial(1, 2), &snaps).unwrap();
        assert_eq!(w.branch, WeightBranch::ExactSelector);
    }

    #[test]
    fn weight_matrix_least_squares_branch() {
        // Constants-only dictionary: best reconstruction is the mean, and the
        // squared residual over P points is the summed population variance.
        let m = Array2::eye(1);
        let pts: Vec<Vec<f64>> = vec![vec![0.2], vec![0.4], vec![0.9]];
        let snaps = linear_snapshots(&m, &pts, 1.0);
        let w = compute_weight_matrix(&Dictionary::monomial(0, 1), &snaps).unwrap();
        assert_eq!(w.branch, WeightBranch::LeastSquares);
        let mean = (0.2 + 0.4 + 0.9) / 3.0;
        assert_abs_diff_eq!(w.matrix[(0, 0)], mean, epsilon = 1e-12);
        let var: f64 = [0.2, 0.4, 0.9]
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum();
        assert_abs_diff_eq!(w.residual * w.residual, var, epsilon = 1e-12);
    }

    #[test]
    fn spectral_invariants_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = Array2::from_shape_vec((2, 2), vec![0.9, 0.1, -0.2, 0.7]).unwrap();
        let pts: Vec<Vec<f64>> = (0..300)
            .map(|_| vec![rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5])
            .collect();
        let snaps = linear_snapshots(&m, &pts, 1.0);
        let model = fit(&snaps, &Dictionary::tensor_hermite(3, 2)).unwrap();

        let nk = model.size();
        let k_norm = model.k.iter().map(|v| v * v).sum::<f64>().sqrt();
        // K xi = mu xi for every pair.
        for j in 0..nk {
            let mut worst = 0.0_f64;
            for r in 0..nk {
                let mut acc = Complex64::new(0.0, 0.0);
                for c in 0..nk {
                    acc += model.k[(r, c)] * model.xi[(c, j)];
                }
                worst = worst.max((acc - model.eigenvalues[j] * model.xi[(r, j)]).norm());
            }
            assert!(
                worst <= 1e-8 * k_norm.max(1.0),
                "eigenpair {j} residual {worst}"
            );
        }
        // W* Xi = I.
        let prod = model.w_star.dot(&model.xi);
        for r in 0..nk {
            for c in 0..nk {
                let expected = if r == c { 1.0 } else { 0.0 };
                assert!((prod[(r, c)] - expected).norm() < 1e-8);
            }
        }
        // Eigenpair order is by descending magnitude.
        for w in model.eigenvalues.windows(2) {
            assert!(w[0].norm() >= w[1].norm() - 1e-12);
        }
    }

    #[test]
    fn fit_is_permutation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let m = Array2::from_shape_vec((2, 2), vec![0.8, 0.0, 0.1, 0.6]).unwrap();
        let pts: Vec<Vec<f64>> = (0..100)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let snaps = linear_snapshots(&m, &pts, 1.0);
        let model = fit(&snaps, &Dictionary::tensor_hermite(2, 2)).unwrap();

        // Reverse the pair order.
        let p = snaps.n_pairs();
        let mut x = Array2::zeros((2, p));
        let mut y = Array2::zeros((2, p));
        for c in 0..p {
            for k in 0..2 {
                x[(k, c)] = snaps.x[(k, p - 1 - c)];
                y[(k, c)] = snaps.y[(k, p - 1 - c)];
            }
        }
        let shuffled = SnapshotSet {
            x,
            y,
            dt: snaps.dt,
            run_ids: snaps.run_ids.clone(),
            pair_indices: snaps.pair_indices.clone(),
            meta: snaps.meta.clone(),
        };
        let model2 = fit(&shuffled, &Dictionary::tensor_hermite(2, 2)).unwrap();
        assert_eq!(model.gram, model2.gram);
        assert_eq!(model.cross, model2.cross);
        assert_eq!(model.k, model2.k);
    }

    #[test]
    fn forward_prediction_reproduces_linear_powers() {
        let model = scalar_contraction(0.5);
        let pred = model.predict_forward(&[1.0], 3).unwrap();
        assert_abs_diff_eq!(pred.state[0], 0.125, epsilon = 1e-9);
        assert!(pred.imag_residual < 1e-12);
        // eta = 0 reconstructs the input.
        let pred = model.predict_forward(&[0.73], 0).unwrap();
        assert_abs_diff_eq!(pred.state[0], 0.73, epsilon = 1e-9);
        // Exactness holds out to eta = 20.
        let pred = model.predict_forward(&[1.0], 20).unwrap();
        assert_abs_diff_eq!(pred.state[0], 0.5_f64.powi(20), epsilon = 1e-12);
    }

    #[test]
    fn backward_prediction_inverts_the_flow() {
        let model = scalar_contraction(0.5);
        let pred = model.predict_backward(&[0.125], 3).unwrap();
        assert_abs_diff_eq!(pred.state[0], 1.0, epsilon = 1e-9);
        assert!(pred.excluded_modes.is_empty());
        let pred = model.predict_backward(&[0.42], 0).unwrap();
        assert_abs_diff_eq!(pred.state[0], 0.42, epsilon = 1e-9);
    }

    #[test]
    fn backward_prediction_excludes_collapsed_modes() {
        // y = 0 * x: one eigenvalue collapses to zero and must be dropped
        // from the backward sum.
        let model = scalar_contraction(0.0);
        let pred = model.predict_backward(&[0.3], 1).unwrap();
        assert_eq!(pred.excluded_modes.len(), 1);
    }

    #[test]
    fn eigenfunctions_of_a_linear_saddle() {
        let m = Array2::from_shape_vec((2, 2), vec![1.5, 0.0, 0.0, 0.5]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let pts: Vec<Vec<f64>> = (0..100)
            .map(|_| vec![2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0])
            .collect();
        let snaps = linear_snapshots(&m, &pts, 1.0);
        let model = fit(&snaps, &Dictionary::monomial(1, 2)).unwrap();

        // Eigenvalues {1.5, 1, 0.5} sorted by magnitude.
        assert_abs_diff_eq!(model.eigenvalues[0].re, 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(model.eigenvalues[1].re, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(model.eigenvalues[2].re, 0.5, epsilon = 1e-9);

        // The mu = 1.5 eigenfunction is proportional to x; normalization
        // makes it x / max|x| over the data.
        let phi = model.eigenfunction(0).unwrap();
        let a = phi.eval(&[0.5, 0.9]).unwrap();
        let b = phi.eval(&[0.25, -0.4]).unwrap();
        assert_abs_diff_eq!((a / b).re, 2.0, epsilon = 1e-8);
        assert_abs_diff_eq!((a / b).im, 0.0, epsilon = 1e-8);

        // Constant eigenfunction takes the same value everywhere.
        let c = model.eigenfunction(1).unwrap();
        let v1 = c.eval(&[0.1, 0.2]).unwrap();
        let v2 = c.eval(&[0.8, 0.3]).unwrap();
        assert!((v1 - v2).norm() < 1e-9);
        assert!(c.variation < 1e-9);

        assert!(model.eval_eigenfunction(99, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn koopman_relation_on_held_out_points() {
        let m = Array2::from_shape_vec((2, 2), vec![0.9, 0.05, -0.05, 0.8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let pts: Vec<Vec<f64>> = (0..400)
            .map(|_| vec![rng.random::<f64>(), rng.random::<f64>()])
            .collect();
        let snaps = linear_snapshots(&m, &pts, 1.0);
        let model = fit(&snaps, &Dictionary::tensor_hermite(2, 2)).unwrap();

        let phi = model.eigenfunction(1).unwrap();
        let mu = phi.eigenvalue;
        let mut errors: Vec<f64> = Vec::new();
        for _ in 0..200 {
            let x = vec![rng.random::<f64>(), rng.random::<f64>()];
            let y = m.dot(&ndarray::Array1::from_vec(x.clone()));
            let lhs = phi.eval(y.as_slice().unwrap()).unwrap();
            let rhs = mu * phi.eval(&x).unwrap();
            if rhs.norm() > 1e-9 {
                errors.push((lhs - rhs).norm() / rhs.norm());
            }
        }
        errors.sort_by(f64::total_cmp);
        let median = errors[errors.len() / 2];
        assert!(median < 0.05, "median relative error {median}");
    }

    #[test]
    fn renormalization_removes_complex_scales() {
        let model = scalar_contraction(0.5);
        let phi = model.eigenfunction(1).unwrap();
        let mut scaled = phi.clone();
        let c = Complex64::new(-3.0, 4.0);
        for v in scaled.coefficients.iter_mut() {
            *v *= c;
        }
        let pts: Vec<Vec<f64>> = (1..=12).map(|i| vec![i as f64 / 12.0]).collect();
        let back = scaled.renormalized_over(&pts).unwrap();
        for (a, b) in back.coefficients.iter().zip(phi.coefficients.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn model_artifact_round_trips() {
        let model = scalar_contraction(0.5);
        let dir = std::env::temp_dir().join(format!("kbasin-edmd-test-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("model.json");
        model.save(&path).unwrap();
        let back = KoopmanModel::load(&path).unwrap();
        assert_eq!(back.k, model.k);
        assert_eq!(back.xi, model.xi);
        assert_eq!(back.modes, model.modes);
        assert_eq!(back.eigenvalues, model.eigenvalues);
        assert_eq!(back.dt, model.dt);
        assert_eq!(back.diagnostics.rank_g, model.diagnostics.rank_g);
        let pred = back.predict_forward(&[1.0], 3).unwrap();
        assert_abs_diff_eq!(pred.state[0], 0.125, epsilon = 1e-9);
        fs::remove_dir_all(&dir).ok();
    }
}
