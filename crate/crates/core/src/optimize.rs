//! Scalar and small-dimensional optimizers: golden-section search for
//! concave maximization, bisection, and a derivative-free Nelder–Mead.

use crate::error::{LabError, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Result of a bracketed golden-section maximization.
#[derive(Debug, Clone, Copy)]
pub struct GoldenMax {
    pub argmax: f64,
    pub value: f64,
    pub evaluations: usize,
    /// Final bracket, `lo <= argmax <= hi`.
    pub lo: f64,
    pub hi: f64,
}

impl GoldenMax {
    /// True when the maximizer sits on the lower end of the initial bracket.
    pub fn at_lower(&self, initial_lo: f64, tol: f64) -> bool {
        (self.argmax - initial_lo).abs() <= 2.0 * tol
    }
}

/// Maximizes `f` on `[lo, hi]` by golden-section search until the bracket
/// is narrower than `tol`.
///
/// With `assert_concave`, every probe triple is checked for unimodality and a
/// violation larger than `slack * (1 + |f|)` aborts with
/// [`LabError::NotConcave`].
pub fn golden_max<F>(mut f: F, lo: f64, hi: f64, tol: f64, assert_concave: bool) -> Result<GoldenMax>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(LabError::BracketFailure {
            lo,
            hi,
            reason: "empty or non-finite bracket".into(),
        });
    }
    let slack = 1e-11;
    let (mut a, mut b) = (lo, hi);
    let fa_init = f(a)?;
    let fb_init = f(b)?;
    let mut fa = fa_init;
    let mut fb = fb_init;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    let mut evals = 4;
    let mut best = [(a, fa), (b, fb), (c, fc), (d, fd)]
        .into_iter()
        .fold((a, f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });

    while b - a > tol {
        if assert_concave {
            let scale = 1.0 + fc.abs().max(fd.abs());
            // an interior probe strictly below both of its neighbours breaks unimodality
            if fc < fa.min(fd) - slack * scale {
                return Err(LabError::NotConcave { at: c });
            }
            if fd < fc.min(fb) - slack * scale {
                return Err(LabError::NotConcave { at: d });
            }
        }
        if fc >= fd {
            b = d;
            fb = fd;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
            if fc > best.1 {
                best = (c, fc);
            }
        } else {
            a = c;
            fa = fc;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
            if fd > best.1 {
                best = (d, fd);
            }
        }
        evals += 1;
        if evals > 10_000 {
            break;
        }
    }
    Ok(GoldenMax {
        argmax: best.0,
        value: best.1,
        evaluations: evals,
        lo: a,
        hi: b,
    })
}

/// Bisection for a sign change of `f` on `[lo, hi]`; stops when the bracket
/// is narrower than `tol`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(LabError::BracketFailure {
            lo,
            hi,
            reason: format!("no sign change ({flo:e}, {fhi:e})"),
        });
    }
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outcome of a Nelder–Mead minimization.
#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
}

/// Minimizes `f` starting from the simplex `x0 + step * e_i`. Terminates when
/// the spread of simplex values and the simplex diameter both drop below
/// `tol`, or after `max_iter` iterations. `f` may return `+∞` to reject
/// infeasible points.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], step: f64, tol: f64, max_iter: usize) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut p = x0.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut iterations = 0;

    while iterations < max_iter {
        iterations += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = (values[n] - values[0]).abs();
        let diameter = simplex[1..]
            .iter()
            .map(|p| p.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (spread <= tol || !spread.is_finite() && values[0].is_finite() && diameter <= tol) && diameter <= tol {
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };

        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[n] {
            let p = along(-0.5);
            let v = f(&p);
            (p, v)
        } else {
            let p = along(0.5);
            let v = f(&p);
            (p, v)
        };
        if fc < values[n].min(fr) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        // shrink toward the best vertex
        for i in 1..=n {
            let p: Vec<f64> = simplex[i]
                .iter()
                .zip(&simplex[0])
                .map(|(x, b)| b + 0.5 * (x - b))
                .collect();
            values[i] = f(&p);
            simplex[i] = p;
        }
    }
    let best = (0..=n)
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap_or(0);
    NelderMeadResult {
        point: simplex[best].clone(),
        value: values[best],
        iterations,
    }
}
