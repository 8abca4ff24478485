//! Small special-function toolbox: gamma (via statrs' Lanczos implementation)
//! and Gauss-Legendre nodes computed by Newton iteration on the Legendre
//! recurrence.

/// Gamma function, accurate to ~1e-14 relative in the argument range used here.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Nodes and weights of the `order`-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration with the cos initial guess; converges to machine
/// precision in a handful of steps for the orders used here (<= 128).
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // P_n(x) and P_n'(x) by the three-term recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Integrate `f` over `[a, b]` with a single `order`-point Gauss-Legendre panel.
pub fn gl_panel(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64, nodes: &[f64], weights: &[f64]) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (&x, &w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Composite Gauss-Legendre integration of `f` over `[a, b]` with `panels`
/// equal panels of `order` points each.
pub fn gl_composite(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, order: usize, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut acc = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        acc += gl_panel(&mut f, lo, lo + width, &nodes, &weights);
    }
    acc
}

/// Panel boundaries geometrically graded toward both endpoints of `[a, b]`;
/// absorbs fractional-power endpoint behavior that defeats uniform panels.
pub fn graded_panels(a: f64, b: f64, levels: u32) -> Vec<(f64, f64)> {
    let len = b - a;
    let mut cuts = Vec::with_capacity(2 * levels as usize + 1);
    cuts.push(a);
    for k in (1..=levels).rev() {
        cuts.push(a + len * (0.5f64).powi(k as i32));
    }
    for k in 1..levels {
        cuts.push(b - len * (0.5f64).powi(k as i32 + 1));
    }
    cuts.push(b);
    cuts.windows(2).map(|p| (p[0], p[1])).collect()
}

/// Composite Gauss-Legendre with panels graded toward both endpoints.
pub fn gl_graded(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, order: usize, levels: u32) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let mut acc = 0.0;
    for (lo, hi) in graded_panels(a, b, levels) {
        acc += gl_panel(&mut f, lo, hi, &nodes, &weights);
    }
    acc
}
