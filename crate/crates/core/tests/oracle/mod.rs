//! Reference implementations of the update rules, written with plain `f64`
//! loops and no crate code. Shared by the core integration tests and the
//! acceptance suite.

#![allow(dead_code)]

#[derive(Debug, Clone, Copy)]
pub struct RefHp {
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma: f64,
    pub eps: f64,
    /// 0: first moment only, 1: second only, 2: both.
    pub target: u8,
}

impl Default for RefHp {
    fn default() -> Self {
        RefHp {
            alpha: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            gamma: 0.95,
            eps: 1e-8,
            target: 0,
        }
    }
}

pub const NAMES: [&str; 8] = [
    "adam",
    "adamnorm",
    "diffgrad",
    "diffgradnorm",
    "radam",
    "radamnorm",
    "adabelief",
    "adabeliefnorm",
];

/// Parameter vectors after each step of optimizer `name`, starting at
/// `theta0` and fed the scripted `grads`.
pub fn trace(name: &str, hp: RefHp, theta0: &[f64], grads: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = theta0.len();
    let norm = name.ends_with("norm");
    let mut theta = theta0.to_vec();
    let mut m = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut e = 0.0;
    let mut g_prev = vec![0.0; n];
    let mut out = Vec::new();

    for (k, g) in grads.iter().enumerate() {
        let t = (k + 1) as i32;
        let mut s = g.clone();
        if norm {
            let g_norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            e = hp.gamma * e + (1.0 - hp.gamma) * g_norm;
            // a zero gradient stays zero rather than becoming 0 * inf
            if e > g_norm && g_norm > 0.0 {
                for i in 0..n {
                    s[i] = (e / g_norm) * g[i];
                }
            }
        }
        let m_in = if hp.target == 1 { g } else { &s };
        let v_in = if hp.target == 0 { g } else { &s };
        for i in 0..n {
            m[i] = hp.beta1 * m[i] + (1.0 - hp.beta1) * m_in[i];
        }
        if name.starts_with("adabelief") {
            for i in 0..n {
                v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * (v_in[i] - m[i]).powi(2);
            }
        } else {
            for i in 0..n {
                v[i] = hp.beta2 * v[i] + (1.0 - hp.beta2) * v_in[i] * v_in[i];
            }
        }
        let bc1 = 1.0 - hp.beta1.powi(t);
        let bc2 = 1.0 - hp.beta2.powi(t);

        if name.starts_with("radam") {
            let rho_inf = 2.0 / (1.0 - hp.beta2) - 1.0;
            let b2t = hp.beta2.powi(t);
            let rho_t = rho_inf - 2.0 * t as f64 * b2t / (1.0 - b2t);
            if rho_t >= 5.0 {
                let rho_u = (rho_t - 4.0) * (rho_t - 2.0) * rho_inf;
                let rho_d = (rho_inf - 4.0) * (rho_inf - 2.0) * rho_t;
                let rho = ((1.0 - hp.beta2) * rho_u / rho_d).sqrt();
                let alpha1 = rho * hp.alpha / bc1;
                for i in 0..n {
                    theta[i] -= alpha1 * m[i] / (v[i].sqrt() + hp.eps);
                }
            } else {
                let alpha2 = hp.alpha / bc1;
                for i in 0..n {
                    theta[i] -= alpha2 * m[i];
                }
            }
        } else {
            for i in 0..n {
                let xi = if name.starts_with("diffgrad") {
                    1.0 / (1.0 + (-(g[i] - g_prev[i]).abs()).exp())
                } else {
                    1.0
                };
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                theta[i] -= hp.alpha * xi * m_hat / (v_hat.sqrt() + hp.eps);
            }
        }
        g_prev = g.clone();
        out.push(theta.clone());
    }
    out
}

/// A scripted gradient stream whose norms rise then fall, so the norm
/// correction both idles and fires within the first steps.
pub fn scripted_stream() -> Vec<Vec<f64>> {
    vec![
        vec![0.3, -1.2, 0.5],
        vec![2.0, 0.4, -1.0],
        vec![-0.05, 0.02, 0.1],
        vec![0.6, -0.6, 0.0],
        vec![0.001, -0.002, 0.003],
        vec![-1.5, 2.5, 0.7],
        vec![0.2, 0.2, 0.2],
        vec![0.0, 0.0, 0.0],
        vec![-0.4, 0.9, -0.3],
        vec![0.05, -0.01, 0.0],
        vec![1.1, -0.2, 0.4],
        vec![0.01, 0.01, -0.01],
    ]
}

/// Mean softmax cross-entropy of a 2-layer ReLU MLP, computed loop by loop.
/// Weights are row-major: `w1` is `d x h`, `w2` is `h x c`.
pub fn mlp_loss(
    w1: &[f64],
    b1: &[f64],
    w2: &[f64],
    b2: &[f64],
    x: &[f64],
    y: &[usize],
    d: usize,
) -> f64 {
    let h = b1.len();
    let c = b2.len();
    let rows = y.len();
    let mut total = 0.0;
    for r in 0..rows {
        let mut a = vec![0.0; h];
        for j in 0..h {
            let mut z = b1[j];
            for k in 0..d {
                z += x[r * d + k] * w1[k * h + j];
            }
            a[j] = z.max(0.0);
        }
        let mut logits = vec![0.0; c];
        for o in 0..c {
            let mut z = b2[o];
            for j in 0..h {
                z += a[j] * w2[j * c + o];
            }
            logits[o] = z;
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
        total += lse - logits[y[r]];
    }
    total / rows as f64
}
