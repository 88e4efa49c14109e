//! Bounded least squares: a Nelder–Mead simplex to get into the basin,
//! then Levenberg–Marquardt with central-difference Jacobians.
//!
//! Bounds are enforced by projecting every trial point onto the box.
//! Parameters carry a `scale` (roughly the expected uncertainty of the
//! starting value) that sets the simplex size and the differencing step, so
//! parameters of wildly different magnitude — a 6.7 GHz centre next to a
//! 200 kHz width — are handled on an equal footing.

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::FitResult;

/// One fitted parameter.
#[derive(Debug, Clone)]
pub struct Param<T> {
    pub name: String,
    pub initial: T,
    pub lower: T,
    pub upper: T,
    pub scale: T,
}

impl<T: Real> Param<T> {
    pub fn new(name: &str, initial: T, lower: T, upper: T, scale: T) -> Self {
        Self {
            name: name.to_string(),
            initial,
            lower,
            upper,
            scale,
        }
    }

    fn clamp(&self, v: T) -> T {
        v.max(self.lower).min(self.upper)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Options<T> {
    /// Residual evaluations allowed for the simplex stage (0 skips it).
    pub simplex_evals: usize,
    pub max_iterations: usize,
    /// Convergence: largest |cos| between the residual and a Jacobian column.
    pub gtol: T,
    /// Stop when the relative cost reduction falls below this.
    pub ftol: T,
    /// Stop when every step component is below `xtol` scale units.
    pub xtol: T,
    /// Central-difference step, in scale units.
    pub diff_step: T,
}

impl<T: Real> Default for Options<T> {
    fn default() -> Self {
        Self {
            simplex_evals: 200,
            max_iterations: 100,
            gtol: T::lit(1e-6),
            ftol: T::lit(1e-12),
            xtol: T::lit(1e-10),
            diff_step: T::lit(6e-6), // ≈ ε^(1/3)
        }
    }
}

fn cost<T: Real>(r: &[T]) -> T {
    r.iter().map(|&v| v * v).sum()
}

struct Evaluator<'a, T, F> {
    params: &'a [Param<T>],
    diff_step: T,
    residuals: F,
    evals: usize,
}

impl<T: Real, F: FnMut(&[T]) -> Result<Vec<T>>> Evaluator<'_, T, F> {
    fn eval(&mut self, p: &[T]) -> Result<Vec<T>> {
        self.evals += 1;
        let r = (self.residuals)(p)?;
        if r.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonConvergence("residuals became non-finite".into()));
        }
        Ok(r)
    }

    /// Cost at the projection of scaled coordinates `x`; failures cost +∞.
    fn scaled_cost(&mut self, x: &[T]) -> T {
        let p = self.unscale(x);
        self.eval(&p).map(|r| cost(&r)).unwrap_or(T::infinity())
    }

    fn unscale(&self, x: &[T]) -> Vec<T> {
        self.params
            .iter()
            .zip(x)
            .map(|(q, &xi)| q.clamp(xi * q.scale))
            .collect()
    }

    fn jacobian(&mut self, p: &[T]) -> Result<Vec<Vec<T>>> {
        // columns[k][i] = ∂r_i/∂p_k
        let step = self.diff_step;
        let mut columns = Vec::with_capacity(p.len());
        for (k, q) in self.params.iter().enumerate() {
            let h = step * q.scale;
            let mut hi = p.to_vec();
            let mut lo = p.to_vec();
            hi[k] = q.clamp(p[k] + h);
            lo[k] = q.clamp(p[k] - h);
            let width = hi[k] - lo[k];
            if width == T::zero() {
                return Err(Error::InvalidArgument(format!(
                    "parameter `{}` has an empty range",
                    q.name
                )));
            }
            let rh = self.eval(&hi)?;
            let rl = self.eval(&lo)?;
            columns.push(rh.iter().zip(&rl).map(|(&a, &b)| (a - b) / width).collect());
        }
        Ok(columns)
    }
}

/// Cholesky factor of a symmetric positive-definite matrix.
fn cholesky<T: Real>(a: &[Vec<T>]) -> Option<Vec<Vec<T>>> {
    let n = a.len();
    let mut l = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: T = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > T::zero()) {
                    return None;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve<T: Real>(l: &[Vec<T>], b: &[T]) -> Vec<T> {
    let n = b.len();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let s: T = (0..i).map(|k| l[i][k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s: T = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
        x[i] = (y[i] - s) / l[i][i];
    }
    x
}

/// Diagonal of `A⁻¹` for symmetric positive-definite `A`; `None` if singular.
fn inverse_diagonal<T: Real>(a: &[Vec<T>]) -> Option<Vec<T>> {
    let l = cholesky(a)?;
    let n = a.len();
    Some(
        (0..n)
            .map(|i| {
                let mut e = vec![T::zero(); n];
                e[i] = T::one();
                cholesky_solve(&l, &e)[i]
            })
            .collect(),
    )
}

fn simplex<T: Real, F: FnMut(&[T]) -> Result<Vec<T>>>(
    ev: &mut Evaluator<'_, T, F>,
    start: &[T],
    budget: usize,
) -> Vec<T> {
    let n = start.len();
    let x0: Vec<T> = ev
        .params
        .iter()
        .zip(start)
        .map(|(q, &p)| p / q.scale)
        .collect();
    let mut pts: Vec<(Vec<T>, T)> = Vec::with_capacity(n + 1);
    let f0 = ev.scaled_cost(&x0);
    pts.push((x0.clone(), f0));
    for i in 0..n {
        let mut x = x0.clone();
        x[i] = x[i] + T::one();
        let f = ev.scaled_cost(&x);
        pts.push((x, f));
    }
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let mut used = n + 1;
    while used < budget {
        pts.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = pts[0].1;
        let worst = pts[n].1;
        let size = pts[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&pts[0].0).map(|(&a, &b)| (a - b).abs()))
            .fold(T::zero(), T::max);
        if worst - best <= T::lit(1e-14) * best.abs() && size < T::lit(1e-6) {
            break;
        }
        let centroid: Vec<T> = (0..n)
            .map(|k| pts[..n].iter().map(|(x, _)| x[k]).sum::<T>() / T::from_usize_lossy(n))
            .collect();
        let along = |t: T| -> Vec<T> {
            centroid
                .iter()
                .zip(&pts[n].0)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };
        let xr = along(T::one());
        let fr = ev.scaled_cost(&xr);
        used += 1;
        if fr < best {
            let xe = along(two);
            let fe = ev.scaled_cost(&xe);
            used += 1;
            pts[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < pts[n - 1].1 {
            pts[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let x = along(half);
                let f = ev.scaled_cost(&x);
                (x, f)
            } else {
                let x = along(-half);
                let f = ev.scaled_cost(&x);
                (x, f)
            };
            used += 1;
            if fc < worst.min(fr) {
                pts[n] = (xc, fc);
            } else {
                let x_best = pts[0].0.clone();
                for (x, f) in pts.iter_mut().skip(1) {
                    for (xi, &bi) in x.iter_mut().zip(&x_best) {
                        *xi = bi + half * (*xi - bi);
                    }
                    *f = ev.scaled_cost(x);
                    used += 1;
                }
            }
        }
    }
    pts.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    ev.unscale(&pts[0].0)
}

/// Projected gradient cosine: components pinned at a bound and pushing
/// outward are ignored.
fn gradient_cosine<T: Real>(params: &[Param<T>], p: &[T], jac: &[Vec<T>], r: &[T]) -> T {
    let rn = cost(r).sqrt();
    if rn == T::zero() {
        return T::zero();
    }
    let mut worst = T::zero();
    for (k, col) in jac.iter().enumerate() {
        let g: T = col.iter().zip(r).map(|(&j, &ri)| j * ri).sum();
        let pinned_low = p[k] <= params[k].lower && g > T::zero();
        let pinned_high = p[k] >= params[k].upper && g < T::zero();
        if pinned_low || pinned_high {
            continue;
        }
        let cn = cost(col).sqrt();
        if cn > T::zero() {
            worst = worst.max(g.abs() / (cn * rn));
        }
    }
    worst
}

/// Minimises `Σ r_i(p)²` over the box given by `params`.
pub fn least_squares<T, F>(
    params: &[Param<T>],
    residuals: F,
    opts: Options<T>,
) -> Result<FitResult<T>>
where
    T: Real,
    F: FnMut(&[T]) -> Result<Vec<T>>,
{
    for q in params {
        if !(q.lower <= q.initial && q.initial <= q.upper && q.scale > T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "parameter `{}`: initial value {} outside [{}, {}] or non-positive scale",
                q.name, q.initial, q.lower, q.upper
            )));
        }
    }
    let mut ev = Evaluator {
        params,
        diff_step: opts.diff_step,
        residuals,
        evals: 0,
    };
    let start: Vec<T> = params.iter().map(|q| q.initial).collect();
    let mut r = ev.eval(&start)?;
    let m = r.len();
    let k = params.len();
    if m < k {
        return Err(Error::InsufficientData(format!(
            "{m} residuals for {k} parameters"
        )));
    }

    let mut p = if opts.simplex_evals > 0 {
        simplex(&mut ev, &start, opts.simplex_evals)
    } else {
        start
    };
    r = ev.eval(&p)?;
    let mut c = cost(&r);
    let mut jac = ev.jacobian(&p)?;
    let mut lambda = T::lit(1e-3);
    let mut iterations = 0;
    let mut small_steps = false;
    let mut stalled = false;

    while iterations < opts.max_iterations {
        if gradient_cosine(params, &p, &jac, &r) <= opts.gtol || c == T::zero() {
            break;
        }
        iterations += 1;
        let a: Vec<Vec<T>> = (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| jac[i].iter().zip(&jac[j]).map(|(&x, &y)| x * y).sum())
                    .collect()
            })
            .collect();
        let g: Vec<T> = jac
            .iter()
            .map(|col| col.iter().zip(&r).map(|(&x, &y)| x * y).sum())
            .collect();

        let mut accepted = false;
        while lambda < T::lit(1e20) {
            let mut damped = a.clone();
            for i in 0..k {
                let d = a[i][i].max(T::min_positive_value());
                damped[i][i] = a[i][i] + lambda * d;
            }
            let Some(l) = cholesky(&damped) else {
                lambda = lambda * T::lit(10.0);
                continue;
            };
            let neg_g: Vec<T> = g.iter().map(|&v| -v).collect();
            let delta = cholesky_solve(&l, &neg_g);
            let trial: Vec<T> = params
                .iter()
                .zip(&p)
                .zip(&delta)
                .map(|((q, &pi), &di)| q.clamp(pi + di))
                .collect();
            let tr = match ev.eval(&trial) {
                Ok(v) => v,
                Err(_) => {
                    lambda = lambda * T::lit(10.0);
                    continue;
                }
            };
            let tc = cost(&tr);
            if tc < c {
                let step_small = params
                    .iter()
                    .zip(trial.iter().zip(&p))
                    .all(|(q, (&a, &b))| ((a - b) / q.scale).abs() < opts.xtol);
                let reduction = (c - tc) / c;
                p = trial;
                r = tr;
                c = tc;
                lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                accepted = true;
                small_steps = step_small || reduction < opts.ftol;
                break;
            }
            lambda = lambda * T::lit(10.0);
        }
        if !accepted {
            // Not even a vanishing steepest-descent step lowers the cost:
            // the gradient is below what the cost can resolve.
            stalled = true;
            break;
        }
        jac = ev.jacobian(&p)?;
        if small_steps {
            break;
        }
    }

    let cosine = gradient_cosine(params, &p, &jac, &r);
    // As in MINPACK, a vanishing step or cost reduction also counts: once the
    // residuals reach rounding level the cosine is noise and cannot shrink.
    let converged = cosine <= opts.gtol || stalled || small_steps;

    let a: Vec<Vec<T>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| jac[i].iter().zip(&jac[j]).map(|(&x, &y)| x * y).sum())
                .collect()
        })
        .collect();
    let dof = m.saturating_sub(k).max(1);
    let s2 = c / T::from_usize_lossy(dof);
    let uncertainties = match inverse_diagonal(&a) {
        Some(d) => d.iter().map(|&v| (v.max(T::zero()) * s2).sqrt()).collect(),
        None => vec![T::infinity(); k],
    };
    let at_bound = params
        .iter()
        .zip(&p)
        .map(|(q, &v)| v <= q.lower || v >= q.upper)
        .collect();

    Ok(FitResult {
        names: params.iter().map(|q| q.name.clone()).collect(),
        values: p,
        uncertainties,
        rss: c,
        iterations,
        evaluations: ev.evals,
        converged,
        at_bound,
        lower_bound: vec![false; k],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_data() -> (Vec<f64>, Vec<f64>) {
        let x: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let y = x.iter().map(|&t| 3.0 * (-0.4 * t).exp() + 0.5).collect();
        (x, y)
    }

    #[test]
    fn exponential_decay() {
        let (x, y) = line_data();
        let params = [
            Param::new("a", 1.0, 0.0, 10.0, 1.0),
            Param::new("b", 1.0, 0.0, 5.0, 0.3),
            Param::new("c", 0.0, -5.0, 5.0, 0.3),
        ];
        let fit = least_squares(
            &params,
            |p| {
                Ok(x.iter()
                    .zip(&y)
                    .map(|(&t, &v)| p[0] * (-p[1] * t).exp() + p[2] - v)
                    .collect())
            },
            Options::default(),
        )
        .unwrap();
        assert!(fit.converged, "{fit:?}");
        for (got, want) in fit.values.iter().zip([3.0, 0.4, 0.5]) {
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
        assert!(fit.rss < 1e-20);
    }

    #[test]
    fn bound_is_respected() {
        // Minimum at p = -1, but the box stops at 0.
        let params = [Param::new("p", 2.0, 0.0, 5.0, 1.0)];
        let fit =
            least_squares(&params, |p| Ok(vec![p[0] + 1.0, 0.0]), Options::default()).unwrap();
        assert_eq!(fit.values[0], 0.0);
        assert!(fit.at_bound[0]);
        assert!(fit.converged);
    }

    #[test]
    fn rejects_bad_start() {
        let params = [Param::new("p", 7.0, 0.0, 5.0, 1.0)];
        assert!(least_squares(&params, |p| Ok(vec![p[0]]), Options::default()).is_err());
    }

    #[test]
    fn rosenbrock_from_far() {
        let params = [
            Param::new("x", -1.2_f64, -5.0, 5.0, 0.5),
            Param::new("y", 1.0, -5.0, 5.0, 0.5),
        ];
        let fit = least_squares(
            &params,
            |p| Ok(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]]),
            Options::default(),
        )
        .unwrap();
        assert!((fit.values[0] - 1.0).abs() < 1e-8 && (fit.values[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn cholesky_inverse() {
        let a = vec![vec![4.0_f64, 2.0], vec![2.0, 3.0]];
        let d = inverse_diagonal(&a).unwrap();
        // inverse = [[3, -2], [-2, 4]] / 8
        assert!((d[0] - 0.375).abs() < 1e-15 && (d[1] - 0.5).abs() < 1e-15);
        assert!(inverse_diagonal(&[vec![1.0_f64, 1.0], vec![1.0, 1.0]]).is_none());
    }
}
