//! 4-3-1 perceptron with tanh units, trained on the mean squared error by
//! Polak–Ribière conjugate gradient with a backtracking line search.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Label;

pub const INPUTS: usize = 4;
pub const HIDDEN: usize = 3;
/// Flattened parameter count: hidden weights, hidden biases, output weights, output bias.
pub const N_PARAMS: usize = HIDDEN * INPUTS + HIDDEN + HIDDEN + 1;

const ARMIJO_C: f64 = 1e-4;
const SHRINK: f64 = 0.5;
const RESTART_EVERY: usize = 20;
const MAX_BACKTRACKS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub max_iters: usize,
    /// Stop once the gradient norm falls below this.
    pub tol: f64,
    pub seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            max_iters: 500,
            tol: 1e-6,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpModel {
    pub weights_hidden: [[f64; INPUTS]; HIDDEN],
    pub bias_hidden: [f64; HIDDEN],
    pub weights_output: [f64; HIDDEN],
    pub bias_output: f64,
}

impl MlpModel {
    pub fn zeros() -> Self {
        Self::from_params(&[0.0; N_PARAMS])
    }

    pub fn params(&self) -> [f64; N_PARAMS] {
        let mut p = [0.0; N_PARAMS];
        let mut k = 0;
        for row in &self.weights_hidden {
            for &w in row {
                p[k] = w;
                k += 1;
            }
        }
        for &b in self.bias_hidden.iter().chain(&self.weights_output) {
            p[k] = b;
            k += 1;
        }
        p[k] = self.bias_output;
        p
    }

    pub fn from_params(p: &[f64; N_PARAMS]) -> Self {
        let mut it = p.iter().copied();
        let mut next = || it.next().unwrap();
        let weights_hidden = std::array::from_fn(|_| std::array::from_fn(|_| next()));
        let bias_hidden = std::array::from_fn(|_| next());
        let weights_output = std::array::from_fn(|_| next());
        let bias_output = next();
        Self {
            weights_hidden,
            bias_hidden,
            weights_output,
            bias_output,
        }
    }

    fn hidden(&self, x: &[f64; INPUTS]) -> [f64; HIDDEN] {
        std::array::from_fn(|h| {
            let z: f64 = (0..INPUTS).map(|i| self.weights_hidden[h][i] * x[i]).sum::<f64>() + self.bias_hidden[h];
            z.tanh()
        })
    }

    /// Network output in (−1, 1).
    pub fn output(&self, x: &[f64; INPUTS]) -> f64 {
        let a = self.hidden(x);
        ((0..HIDDEN).map(|h| self.weights_output[h] * a[h]).sum::<f64>() + self.bias_output).tanh()
    }

    pub fn predict(&self, x: &[f64; INPUTS]) -> Label {
        Label::from_score(self.output(x))
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|v| v.is_finite())
    }
}

/// Mean squared error over the batch and its gradient in flattened order.
pub fn loss_and_gradient(params: &[f64; N_PARAMS], xs: &[[f64; INPUTS]], ys: &[f64]) -> (f64, [f64; N_PARAMS]) {
    let m = MlpModel::from_params(params);
    let n = xs.len() as f64;
    let mut loss = 0.0;
    let mut g = MlpModel::zeros();
    for (x, &y) in xs.iter().zip(ys) {
        let a = m.hidden(x);
        let out = ((0..HIDDEN).map(|h| m.weights_output[h] * a[h]).sum::<f64>() + m.bias_output).tanh();
        let err = out - y;
        loss += err * err;
        // d(err²)/d(pre-activation of the output)
        let delta = 2.0 * err * (1.0 - out * out);
        g.bias_output += delta;
        for h in 0..HIDDEN {
            g.weights_output[h] += delta * a[h];
            let dh = delta * m.weights_output[h] * (1.0 - a[h] * a[h]);
            g.bias_hidden[h] += dh;
            for i in 0..INPUTS {
                g.weights_hidden[h][i] += dh * x[i];
            }
        }
    }
    (loss / n, g.params().map(|v| v / n))
}

fn dot(a: &[f64; N_PARAMS], b: &[f64; N_PARAMS]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub losses: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Glorot-uniform hidden and output weights, zero biases.
pub fn initial_model(seed: u64) -> MlpModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lim_h = (6.0 / (INPUTS + HIDDEN) as f64).sqrt();
    let lim_o = (6.0 / (HIDDEN + 1) as f64).sqrt();
    let mut m = MlpModel::zeros();
    for row in m.weights_hidden.iter_mut() {
        for w in row.iter_mut() {
            *w = rng.random_range(-lim_h..lim_h);
        }
    }
    for w in m.weights_output.iter_mut() {
        *w = rng.random_range(-lim_o..lim_o);
    }
    m
}

fn canonical_order(xs: &[[f64; INPUTS]], labels: &[Label]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| {
        xs[a]
            .iter()
            .zip(&xs[b])
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(labels[a].cmp(&labels[b]))
    });
    idx
}

/// Full-batch training. Samples are put in a canonical order first, and the
/// initial output layer takes the sign of the first sample's target, so
/// sample order never matters and swapping every label mirrors the result.
pub fn mlp_train(xs: &[[f64; INPUTS]], labels: &[Label], cfg: &MlpConfig) -> Result<(MlpModel, TrainTrace)> {
    if xs.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            actual: labels.len(),
        });
    }
    for (class, code) in [(Label::Positive, 1), (Label::Negative, -1)] {
        if !labels.contains(&class) {
            return Err(Error::MissingClass(code));
        }
    }
    let order = canonical_order(xs, labels);
    let xs: Vec<[f64; INPUTS]> = order.iter().map(|&i| xs[i]).collect();
    let ys: Vec<f64> = order.iter().map(|&i| labels[i].as_f64()).collect();

    let mut init = initial_model(cfg.seed);
    init.weights_output = init.weights_output.map(|w| w * ys[0]);
    let mut w = init.params();
    let (mut f, mut g) = loss_and_gradient(&w, &xs, &ys);
    let mut d = g.map(|v| -v);
    let mut losses = vec![f];
    let mut iters = 0;
    while iters < cfg.max_iters && dot(&g, &g).sqrt() >= cfg.tol {
        if !f.is_finite() {
            return Err(Error::NonFiniteLoss(iters));
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            d = g.map(|v| -v);
            slope = -dot(&g, &g);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let trial: [f64; N_PARAMS] = std::array::from_fn(|k| w[k] + step * d[k]);
            let (ft, gt) = loss_and_gradient(&trial, &xs, &ys);
            if !ft.is_finite() {
                return Err(Error::NonFiniteLoss(iters));
            }
            if ft <= f + ARMIJO_C * step * slope {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= SHRINK;
        }
        let Some((wn, fnew, gn)) = accepted else {
            // no decrease representable along d: converged to precision
            break;
        };
        iters += 1;
        let beta = if iters % RESTART_EVERY == 0 {
            0.0
        } else {
            let y: [f64; N_PARAMS] = std::array::from_fn(|k| gn[k] - g[k]);
            (dot(&gn, &y) / dot(&g, &g)).max(0.0)
        };
        d = std::array::from_fn(|k| -gn[k] + beta * d[k]);
        w = wn;
        f = fnew;
        g = gn;
        losses.push(f);
    }
    let model = MlpModel::from_params(&w);
    Ok((
        model,
        TrainTrace {
            losses,
            iterations: iters,
            gradient_norm: dot(&g, &g).sqrt(),
        },
    ))
}
