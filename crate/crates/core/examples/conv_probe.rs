// scan the Fredholm matching residual g(q) - Gamma over q for both
// kernel orientations
fn norm_cdf(x: f64) -> f64 { 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) }

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1; p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 { break; }
        }
        nodes[i] = -x; nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w; weights[n - 1 - i] = w;
    }
    if n % 2 == 1 { nodes[n / 2] = 0.0; }
    (nodes, weights)
}

fn lu_solve(a: &mut [f64], b: &mut [f64], n: usize) {
    for col in 0..n {
        let mut pr = col;
        for row in col + 1..n { if a[row*n+col].abs() > a[pr*n+col].abs() { pr = row; } }
        if pr != col { for k in 0..n { a.swap(col*n+k, pr*n+k); } b.swap(col, pr); }
        let inv = 1.0 / a[col*n+col];
        for row in col + 1..n {
            let f = a[row*n+col] * inv;
            a[row*n+col] = 0.0;
            for k in col+1..n { a[row*n+k] -= f * a[col*n+k]; }
            b[row] -= f * b[col];
        }
    }
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row+1..n { s -= a[row*n+k] * b[k]; }
        b[row] = s / a[row*n+row];
    }
}

fn matching(gamma: f64, delta: f64, q: f64, transpose: bool) -> f64 {
    let n = 201;
    let theta = libm::exp(delta);
    let s2 = libm::expm1(2.0 * delta);
    let s = s2.sqrt();
    let (xi, wi) = gauss_legendre(n);
    let nodes: Vec<f64> = xi.iter().map(|&t| q * t).collect();
    let weights: Vec<f64> = wi.iter().map(|&w| q * w).collect();
    let kern = |x: f64, y: f64| {
        let d = if transpose { theta * x - y } else { theta * y - x };
        theta * libm::exp(-d * d / s2) / (core::f64::consts::PI.sqrt() * s)
    };
    let f = |x: f64| {
        let r2 = core::f64::consts::SQRT_2;
        x + gamma * (norm_cdf(-r2 * (theta * q - x) / s) - norm_cdf(-r2 * (theta * q + x) / s))
    };
    let mut a = vec![0.0; n * n];
    let mut g: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    for i in 0..n { for j in 0..n {
        let k = kern(nodes[i], nodes[j]) * weights[j];
        a[i*n+j] = if i == j { 1.0 - k } else { -k };
    }}
    lu_solve(&mut a, &mut g, n);
    let mut gq = f(q);
    for j in 0..n { gq += kern(q, nodes[j]) * weights[j] * g[j]; }
    gq - gamma
}

fn main() {
    println!("  q     phi(normal)   phi(transposed)");
    for i in 0..30 {
        let q = 0.02 + 0.05 * i as f64;
        println!("{:5.2}  {:+.6}  {:+.6}", q, matching(0.1, 1.0, q, false), matching(0.1, 1.0, q, true));
    }
}
