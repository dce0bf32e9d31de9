//! Small dense minimizers for the likelihood fits: BFGS with backtracking
//! line search, and Nelder–Mead for when BFGS stalls.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Status {
    Converged,
    LineSearchFailed,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
    pub status: Status,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Minimizes `fg`, which returns the objective and writes the gradient.
/// Non-finite objective values are treated as infeasible and backtracked.
pub(crate) fn bfgs<F>(fg: F, x0: &[f64], tol: f64, max_iter: usize) -> Outcome
where
    F: Fn(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut f = fg(&x, &mut g);
    let mut h = identity(n);
    let mut trace = vec![f];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];

    for it in 0..max_iter {
        let gn = norm(&g);
        if gn <= tol {
            return Outcome {
                x,
                f,
                grad_norm: gn,
                iterations: it,
                trace,
                status: Status::Converged,
            };
        }
        let mut d: Vec<f64> = (0..n).map(|i| -dot(&h[i], &g)).collect();
        let mut slope = dot(&d, &g);
        if !(slope < 0.0) {
            h = identity(n);
            d = g.iter().map(|v| -v).collect();
            slope = -gn * gn;
        }
        // cap the step at one unit in any coordinate
        let dmax = d.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut alpha = if dmax > 1.0 { 1.0 / dmax } else { 1.0 };

        let noise = 1e-13 * (1.0 + f.abs());
        let mut accepted = None;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + alpha * d[i];
            }
            let f_new = fg(&x_new, &mut g_new);
            if f_new.is_finite() {
                let armijo = f_new <= f + 1e-4 * alpha * slope;
                // near the optimum f is flat to rounding; the gradient is not
                let flat = f_new <= f + noise && norm(&g_new) < gn;
                if armijo || flat {
                    accepted = Some(f_new);
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some(f_new) = accepted else {
            return Outcome {
                x,
                f,
                grad_norm: gn,
                iterations: it,
                trace,
                status: Status::LineSearchFailed,
            };
        };

        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if it == 0 {
                let scale = sy / dot(&y, &y);
                h = identity(n);
                for (i, row) in h.iter_mut().enumerate() {
                    row[i] = scale;
                }
            }
            update_inverse_hessian(&mut h, &s, &y, sy);
        }
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        f = f_new;
        trace.push(f);
    }
    let gn = norm(&g);
    let status = if gn <= tol {
        Status::Converged
    } else {
        Status::MaxIterations
    };
    Outcome {
        x,
        f,
        grad_norm: gn,
        iterations: max_iter,
        trace,
        status,
    }
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

/// H ← (I − ρ s yᵀ) H (I − ρ y sᵀ) + ρ s sᵀ.
fn update_inverse_hessian(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Derivative-free simplex search; returns the best vertex.
pub(crate) fn nelder_mead<F>(f: F, x0: &[f64], step: f64, max_iter: usize) -> (Vec<f64>, f64, usize)
where
    F: Fn(&[f64]) -> f64,
{
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_finite() { v } else { f64::INFINITY }
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((x0.to_vec(), eval(x0)));
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += step;
        let v = eval(&x);
        simplex.push((x, v));
    }
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (best, worst) = (simplex[0].1, simplex[n].1);
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
            })
            .fold(0.0f64, f64::max);
        if (worst - best).abs() <= 1e-15 * (1.0 + best.abs()) && size < 1e-9 {
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let toward = |t: f64| -> Vec<f64> {
            (0..n)
                .map(|j| centroid[j] + t * (simplex[n].0[j] - centroid[j]))
                .collect()
        };
        let xr = toward(-1.0);
        let fr = eval(&xr);
        if fr < best {
            let xe = toward(-2.0);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = toward(-0.5);
                let fc = eval(&xc);
                (xc, fc)
            } else {
                let xc = toward(0.5);
                let fc = eval(&xc);
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x_best = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for j in 0..n {
                        x[j] = x_best[j] + 0.5 * (x[j] - x_best[j]);
                    }
                    *v = eval(x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, v) = simplex.swap_remove(0);
    (x, v, iterations)
}
