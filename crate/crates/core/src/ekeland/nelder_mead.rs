//! Derivative-free local search with an extreme barrier: non-finite values
//! count as `+∞`, so constraints are expressed by returning `∞`.

use crate::space::Vector;

#[derive(Debug, Clone, Copy)]
pub struct NmOptions {
    /// Edge length of the initial simplex.
    pub scale: f64,
    pub max_evals: usize,
    /// Stop once the simplex diameter falls below this.
    pub xtol: f64,
    /// and the value spread below this.
    pub ftol: f64,
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vector,
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
}

fn barrier(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// Minimizes `f` from `x0`; `f(x0)` should be finite.
pub fn minimize(f: impl Fn(&Vector) -> f64, x0: &Vector, opts: NmOptions) -> NmResult {
    let k = x0.len();
    let eval = |x: &Vector| barrier(f(x));
    let f0 = eval(x0);
    if k == 0 {
        return NmResult {
            x: x0.clone(),
            f: f0,
            evals: 1,
            converged: true,
        };
    }
    // adaptive coefficients (Gao-Han) keep the method effective for larger k
    let kf = k as f64;
    let (alpha, gamma, rho, sigma) = if k <= 2 {
        (1.0, 2.0, 0.5, 0.5)
    } else {
        (1.0, 1.0 + 2.0 / kf, 0.75 - 1.0 / (2.0 * kf), 1.0 - 1.0 / kf)
    };
    let mut simplex: Vec<(Vector, f64)> = vec![(x0.clone(), f0)];
    for i in 0..k {
        let mut v = x0.clone();
        v[i] += opts.scale;
        let mut fv = eval(&v);
        if !fv.is_finite() {
            v[i] = x0[i] - opts.scale;
            fv = eval(&v);
        }
        simplex.push((v, fv));
    }
    let mut evals = 1 + simplex.len();
    let mut converged = false;
    let sort = |s: &mut Vec<(Vector, f64)>| s.sort_by(|a, b| a.1.total_cmp(&b.1));
    while evals < opts.max_evals {
        sort(&mut simplex);
        let best = simplex[0].1;
        let worst = simplex[k].1;
        let diam = simplex[1..]
            .iter()
            .map(|(v, _)| (v - &simplex[0].0).amax())
            .fold(0.0, f64::max);
        let spread = if worst.is_finite() { worst - best } else { f64::INFINITY };
        if diam <= opts.xtol && (spread <= opts.ftol || diam == 0.0) {
            converged = true;
            break;
        }
        let centroid = simplex[..k]
            .iter()
            .fold(Vector::zeros(k), |acc, (v, _)| acc + v)
            / kf;
        let toward = |t: f64| &centroid + (&simplex[k].0 - &centroid) * t;
        let xr = toward(-alpha);
        let fr = eval(&xr);
        evals += 1;
        if fr < simplex[0].1 {
            let xe = toward(-alpha * gamma);
            let fe = eval(&xe);
            evals += 1;
            simplex[k] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[k - 1].1 {
            simplex[k] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[k].1 {
            let xc = toward(-alpha * rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = toward(rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        evals += 1;
        if fc < simplex[k].1.min(fr) {
            simplex[k] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for entry in simplex.iter_mut().skip(1) {
            let v = &x_best + (&entry.0 - &x_best) * sigma;
            let fv = eval(&v);
            *entry = (v, fv);
        }
        evals += k;
    }
    sort(&mut simplex);
    let (x, f) = simplex.swap_remove(0);
    NmResult {
        x,
        f,
        evals,
        converged,
    }
}
