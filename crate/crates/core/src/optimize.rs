//! BFGS quasi-Newton minimizer with a strong-Wolfe line search.

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    /// Stop once the gradient infinity-norm drops below this.
    pub grad_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            grad_tolerance: 1e-8,
            max_iterations: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_inf_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn inf_norm(g: &[f64]) -> f64 {
    g.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f`, which returns the value and writes the gradient into its
/// second argument. The returned value never exceeds `f(x0)`.
pub fn minimize<F>(mut f: F, x0: Vec<f64>, opts: BfgsOptions) -> Minimum
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let n = x0.len();
    let mut x = x0;
    let mut g = vec![0.0; n];
    let mut fx = f(&x, &mut g);
    if n == 0 {
        return Minimum {
            x,
            value: fx,
            grad_inf_norm: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    // Inverse Hessian approximation, row-major.
    let mut hinv = identity(n);
    let mut fresh = true;
    let mut iterations = 0;
    let mut stalls = 0;

    while iterations < opts.max_iterations {
        if inf_norm(&g) < opts.grad_tolerance {
            break;
        }
        iterations += 1;
        let mut d: Vec<f64> = (0..n)
            .map(|i| -dot(&hinv[i * n..(i + 1) * n], &g))
            .collect();
        let mut slope = dot(&d, &g);
        if slope >= 0.0 {
            hinv = identity(n);
            fresh = true;
            d = g.iter().map(|v| -v).collect();
            slope = dot(&d, &g);
        }
        let step0 = if fresh {
            (1.0 / inf_norm(&g)).min(1.0)
        } else {
            1.0
        };
        let Some((alpha, x_new, f_new, g_new)) = line_search(&mut f, &x, fx, &g, &d, slope, step0)
        else {
            if fresh {
                break;
            }
            hinv = identity(n);
            fresh = true;
            continue;
        };
        let s: Vec<f64> = d.iter().map(|v| v * alpha).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if f_new >= fx - 1e-16 * fx.abs().max(1.0) {
            stalls += 1;
        } else {
            stalls = 0;
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        if stalls > 20 {
            break;
        }
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if fresh {
                // Scale the initial inverse Hessian as in Nocedal & Wright (6.20).
                let scale = sy / dot(&y, &y);
                for v in hinv.iter_mut() {
                    *v *= scale;
                }
            }
            bfgs_update(&mut hinv, &s, &y, sy);
            fresh = false;
        }
    }
    let grad_inf_norm = inf_norm(&g);
    Minimum {
        x,
        value: fx,
        grad_inf_norm,
        iterations,
        converged: grad_inf_norm < opts.grad_tolerance,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], y)).collect();
    let yhy = dot(y, &hy);
    // H+ = H - rho (s hy^T + hy s^T) + (rho^2 yHy + rho) s s^T
    let c = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + c * s[i] * s[j];
        }
    }
}

type Trial = (f64, Vec<f64>, f64, Vec<f64>);

fn evaluate<F>(f: &mut F, x: &[f64], d: &[f64], alpha: f64) -> (Vec<f64>, f64, Vec<f64>)
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let xt: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
    let mut gt = vec![0.0; x.len()];
    let ft = f(&xt, &mut gt);
    (xt, ft, gt)
}

/// Strong Wolfe search (Nocedal & Wright, Alg. 3.5/3.6) with c1 = 1e-4,
/// c2 = 0.9. Returns `None` when no decrease could be found.
fn line_search<F>(
    f: &mut F,
    x: &[f64],
    f0: f64,
    _g0: &[f64],
    d: &[f64],
    slope0: f64,
    step0: f64,
) -> Option<Trial>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    let mut a_prev = 0.0;
    let mut f_prev = f0;
    let mut slope_prev = slope0;
    let mut a = step0;
    let mut best: Option<Trial> = None;

    let keep_best = |best: &mut Option<Trial>, a: f64, xt: &[f64], ft: f64, gt: &[f64]| {
        if ft < f0 && best.as_ref().is_none_or(|b| ft < b.2) {
            *best = Some((a, xt.to_vec(), ft, gt.to_vec()));
        }
    };

    for i in 0..30 {
        let (xt, ft, gt) = evaluate(f, x, d, a);
        if !ft.is_finite() {
            a *= 0.5;
            continue;
        }
        keep_best(&mut best, a, &xt, ft, &gt);
        let slope = dot(&gt, d);
        if ft > f0 + C1 * a * slope0 || (i > 0 && ft >= f_prev) {
            return zoom(
                f,
                x,
                f0,
                d,
                slope0,
                (a_prev, f_prev, slope_prev),
                (a, ft, slope),
            )
            .or(best);
        }
        if slope.abs() <= -C2 * slope0 {
            return Some((a, xt, ft, gt));
        }
        if slope >= 0.0 {
            return zoom(
                f,
                x,
                f0,
                d,
                slope0,
                (a, ft, slope),
                (a_prev, f_prev, slope_prev),
            )
            .or(best);
        }
        a_prev = a;
        f_prev = ft;
        slope_prev = slope;
        a *= 2.0;
    }
    best
}

fn zoom<F>(
    f: &mut F,
    x: &[f64],
    f0: f64,
    d: &[f64],
    slope0: f64,
    mut lo: (f64, f64, f64),
    mut hi: (f64, f64, f64),
) -> Option<Trial>
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    let mut best: Option<Trial> = None;
    for _ in 0..40 {
        // Safeguarded cubic interpolation, falling back to bisection.
        let a = interpolate(lo, hi);
        let (xt, ft, gt) = evaluate(f, x, d, a);
        if ft < f0 && best.as_ref().is_none_or(|b| ft < b.2) {
            best = Some((a, xt.clone(), ft, gt.clone()));
        }
        let slope = dot(&gt, d);
        if ft > f0 + C1 * a * slope0 || ft >= lo.1 {
            hi = (a, ft, slope);
        } else {
            if slope.abs() <= -C2 * slope0 {
                return Some((a, xt, ft, gt));
            }
            if slope * (hi.0 - lo.0) >= 0.0 {
                hi = lo;
            }
            lo = (a, ft, slope);
        }
        if (hi.0 - lo.0).abs() < 1e-16 * lo.0.abs().max(1e-16) {
            break;
        }
    }
    best
}

fn interpolate(lo: (f64, f64, f64), hi: (f64, f64, f64)) -> f64 {
    let (a0, f0, g0) = lo;
    let (a1, f1, g1) = hi;
    let d1 = g0 + g1 - 3.0 * (f0 - f1) / (a0 - a1);
    let disc = d1 * d1 - g0 * g1;
    let (left, right) = if a0 < a1 { (a0, a1) } else { (a1, a0) };
    let width = right - left;
    if disc >= 0.0 {
        let d2 = (a1 - a0).signum() * disc.sqrt();
        let a = a1 - (a1 - a0) * (g1 + d2 - d1) / (g1 - g0 + 2.0 * d2);
        if a.is_finite() && a > left + 0.1 * width && a < right - 0.1 * width {
            return a;
        }
    }
    0.5 * (a0 + a1)
}
