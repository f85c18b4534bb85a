//! Global minimization of 2pi-periodic scalar functions.

use std::f64::consts::TAU;

/// Golden-section search for a minimum of `f` inside `[a, b]`, stopping when
/// the bracket is narrower than `tol`. Returns `(x, f(x))`.
pub fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = f(x);
    // the midpoint can be marginally worse than the interior probes
    [(x, fx), (c, fc), (d, fd)]
        .into_iter()
        .fold((x, fx), |best, p| if p.1 < best.1 { p } else { best })
}

/// Global minimum over one period: uniform scan with `grid` points followed
/// by golden-section refinement of every discrete local minimum.
/// The returned phase lies in `[0, 2pi)`; among minima tied within
/// `1e-12` the smallest phase wins.
pub fn periodic_minimum<F: Fn(f64) -> f64>(f: F, grid: usize, tol: f64) -> (f64, f64) {
    let step = TAU / grid as f64;
    let values: Vec<f64> = (0..grid).map(|i| f(i as f64 * step)).collect();
    let mut best: Option<(f64, f64)> = None;
    for i in 0..grid {
        let prev = values[(i + grid - 1) % grid];
        let next = values[(i + 1) % grid];
        if values[i] > prev || values[i] > next {
            continue;
        }
        let centre = i as f64 * step;
        let (x, fx) = golden_section(&f, centre - step, centre + step, tol);
        let x = x.rem_euclid(TAU);
        best = Some(match best {
            None => (x, fx),
            Some((bx, bf)) => {
                if fx < bf - 1e-12 || ((fx - bf).abs() <= 1e-12 && x < bx) {
                    (x, fx)
                } else {
                    (bx, bf)
                }
            }
        });
    }
    // a constant function has every point as a local minimum, so `best`
    // is always populated
    best.unwrap_or((0.0, values[0]))
}
