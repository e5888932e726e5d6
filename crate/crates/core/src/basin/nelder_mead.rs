//! Compact deterministic Nelder-Mead descent used by the multi-start
//! fixed-point search.

pub struct NmOptions {
    pub scale: f64,
    pub max_iters: usize,
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        NmOptions {
            scale: 0.05,
            max_iters: 400,
            f_tol: 1e-12,
            x_tol: 1e-10,
        }
    }
}

pub struct NmResult {
    pub x: Vec<f64>,
    pub fval: f64,
    pub iters: usize,
    pub evals: usize,
}

/// Standard reflection/expansion/contraction/shrink iteration with the
/// classic coefficients. Ties are broken by vertex index, so the descent is
/// fully deterministic.
pub fn minimize(f: &mut dyn FnMut(&[f64]) -> f64, x0: &[f64], opts: &NmOptions) -> NmResult {
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        f(x)
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += opts.scale;
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex
        .iter()
        .map(|v| eval(v, &mut evals))
        .collect();

    let mut iters = 0;
    while iters < opts.max_iters {
        iters += 1;
        // Order by function value; stable sort keeps determinism on ties.
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fvals[a].total_cmp(&fvals[b]));
        let reordered: Vec<Vec<f64>> = order.iter().map(|&i| simplex[i].clone()).collect();
        let refvals: Vec<f64> = order.iter().map(|&i| fvals[i]).collect();
        simplex = reordered;
        fvals = refvals;

        let spread = fvals[n] - fvals[0];
        let mut size = 0.0_f64;
        for v in &simplex[1..] {
            let d: f64 = v
                .iter()
                .zip(simplex[0].iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            size = size.max(d);
        }
        if spread < opts.f_tol && size < opts.x_tol {
            break;
        }

        let mut centroid = vec![0.0; n];
        for v in &simplex[..n] {
            for (c, &vi) in centroid.iter_mut().zip(v.iter()) {
                *c += vi;
            }
        }
        for c in centroid.iter_mut() {
            *c /= n as f64;
        }

        let worst = simplex[n].clone();
        let reflected: Vec<f64> = centroid
            .iter()
            .zip(worst.iter())
            .map(|(c, w)| c + alpha * (c - w))
            .collect();
        let fr = eval(&reflected, &mut evals);

        if fr < fvals[0] {
            let expanded: Vec<f64> = centroid
                .iter()
                .zip(worst.iter())
                .map(|(c, w)| c + gamma * (c - w))
                .collect();
            let fe = eval(&expanded, &mut evals);
            if fe < fr {
                simplex[n] = expanded;
                fvals[n] = fe;
            } else {
                simplex[n] = reflected;
                fvals[n] = fr;
            }
        } else if fr < fvals[n - 1] {
            simplex[n] = reflected;
            fvals[n] = fr;
        } else {
            let contracted: Vec<f64> = centroid
                .iter()
                .zip(worst.iter())
                .map(|(c, w)| c + rho * (w - c))
                .collect();
            let fc = eval(&contracted, &mut evals);
            if fc < fvals[n] {
                simplex[n] = contracted;
                fvals[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = simplex[0]
                        .iter()
                        .zip(simplex[i].iter())
                        .map(|(b, v)| b + sigma * (v - b))
                        .collect();
                    fvals[i] = eval(&shrunk, &mut evals);
                    simplex[i] = shrunk;
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if fvals[i] < fvals[best] {
            best = i;
        }
    }
    NmResult {
        x: simplex[best].clone(),
        fval: fvals[best],
        iters,
        evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_a_quadratic() {
        let mut f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.7).powi(2);
        let r = minimize(&mut f, &[0.0, 0.0], &NmOptions::default());
        assert!((r.x[0] - 0.3).abs() < 1e-6, "x0 = {}", r.x[0]);
        assert!((r.x[1] + 0.7).abs() < 1e-6, "x1 = {}", r.x[1]);
        assert!(r.fval < 1e-10);
    }

    #[test]
    fn is_deterministic() {
        let mut f = |x: &[f64]| x[0].powi(4) + (x[1] - 1.0).powi(2) + 0.1 * x[0];
        let a = minimize(&mut f, &[0.8, -0.3], &NmOptions::default());
        let b = minimize(&mut f, &[0.8, -0.3], &NmOptions::default());
        assert_eq!(a.x, b.x);
        assert_eq!(a.fval, b.fval);
    }

    #[test]
    fn handles_one_dimension() {
        let mut f = |x: &[f64]| (x[0] - 0.25).powi(2);
        let r = minimize(&mut f, &[0.9], &NmOptions::default());
        assert!((r.x[0] - 0.25).abs() < 1e-6);
    }
}
