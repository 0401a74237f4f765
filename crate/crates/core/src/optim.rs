//! Small quasi-Newton minimiser used by the likelihood fits.

/// Outcome of a minimisation.
#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub start_value: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub max_iterations: usize,
    /// Relative change in objective treated as convergence.
    pub tolerance: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-8,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, (lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(*lo, *hi);
    }
}

/// BFGS with Armijo backtracking and box constraints enforced by projection.
///
/// `objective` returns the value and gradient; a non-finite value is treated
/// as outside the domain and the step is shortened.
pub fn minimize<F>(mut objective: F, x0: &[f64], bounds: &[(f64, f64)], opts: Options) -> Minimum
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let dim = x0.len();
    let mut x = x0.to_vec();
    project(&mut x, bounds);
    let (mut fx, mut g) = objective(&x);
    let start_value = fx;
    let identity = |d: usize| {
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            h[i * d + i] = 1.0;
        }
        h
    };
    let mut h = identity(dim);
    let mut converged = false;
    let mut iterations = 0;
    let mut fresh = true;

    while iterations < opts.max_iterations {
        iterations += 1;
        if g.iter().all(|v| v.abs() < 1e-10) {
            converged = true;
            break;
        }
        let mut dir: Vec<f64> = (0..dim)
            .map(|i| -(0..dim).map(|j| h[i * dim + j] * g[j]).sum::<f64>())
            .collect();
        let mut slope = dot(&dir, &g);
        if slope >= 0.0 {
            h = identity(dim);
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&dir, &g);
            fresh = true;
        }

        let longest = dir.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut step = if fresh && longest > 1.0 {
            1.0 / longest
        } else {
            1.0
        };
        let mut accepted = None;
        for _ in 0..60 {
            let mut trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + step * d).collect();
            project(&mut trial, bounds);
            let (ft, gt) = objective(&trial);
            let moved: f64 = trial.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
            if ft.is_finite() && ft <= fx + 1e-4 * step * slope.min(0.0) {
                accepted = Some((trial, ft, gt));
                break;
            }
            if moved == 0.0 {
                break;
            }
            step *= 0.5;
        }

        let Some((xn, fnew, gn)) = accepted else {
            if fresh {
                // Steepest descent cannot improve: at a (possibly bounded) optimum.
                converged = g.iter().map(|v| v.abs()).fold(0.0, f64::max) < 1e-3 * (1.0 + fx.abs());
                break;
            }
            h = identity(dim);
            fresh = true;
            continue;
        };
        fresh = false;

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &yv);
        let change = (fx - fnew).abs();
        x = xn;
        g = gn;
        let previous = fx;
        fx = fnew;
        if change <= opts.tolerance * (previous.abs() + opts.tolerance) {
            converged = true;
            break;
        }
        if sy > 1e-12 {
            let hy: Vec<f64> = (0..dim)
                .map(|i| (0..dim).map(|j| h[i * dim + j] * yv[j]).sum())
                .collect();
            let yhy = dot(&yv, &hy);
            let rho = 1.0 / sy;
            for i in 0..dim {
                for j in 0..dim {
                    h[i * dim + j] += rho * ((1.0 + rho * yhy) * s[i] * s[j] - hy[i] * s[j] - s[i] * hy[j]);
                }
            }
        }
    }

    Minimum {
        x,
        value: fx,
        start_value,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |p: &[f64]| {
            let (a, b) = (p[0], p[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let ga = -2.0 * (1.0 - a) - 400.0 * a * (b - a * a);
            let gb = 200.0 * (b - a * a);
            (v, vec![ga, gb])
        };
        let inf = f64::INFINITY;
        let m = minimize(
            f,
            &[-1.2, 1.0],
            &[(-inf, inf), (-inf, inf)],
            Options {
                max_iterations: 2000,
                tolerance: 1e-14,
            },
        );
        assert!(
            (m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4,
            "{:?}",
            m
        );
        assert!(m.value <= m.start_value);
    }

    #[test]
    fn respects_bounds() {
        let f = |p: &[f64]| ((p[0] - 5.0).powi(2), vec![2.0 * (p[0] - 5.0)]);
        let m = minimize(f, &[0.0], &[(-1.0, 2.0)], Options::default());
        assert!((m.x[0] - 2.0).abs() < 1e-12);
    }
}
