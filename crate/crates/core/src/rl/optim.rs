//! AdamW with decoupled weight decay, plus the cosine learning-rate ramp.

use serde::{Deserialize, Serialize};

use super::net::{Gradients, QNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamWConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub weight_decay: f64,
}

impl Default for AdamWConfig {
    fn default() -> Self {
        Self {
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            weight_decay: 1e-2,
        }
    }
}

/// Per-parameter first/second moment estimates, in canonical layer order.
#[derive(Debug, Clone)]
pub struct AdamW {
    pub cfg: AdamWConfig,
    pub step: u64,
    m: Gradients,
    v: Gradients,
}

impl AdamW {
    pub fn new(net: &QNetwork, cfg: AdamWConfig) -> Self {
        Self {
            cfg,
            step: 0,
            m: net.zero_grads(),
            v: net.zero_grads(),
        }
    }

    /// One decoupled-weight-decay update at the given learning rate.
    pub fn update(&mut self, net: &mut QNetwork, grads: &Gradients, lr: f64) {
        self.step += 1;
        let b1 = self.cfg.beta1;
        let b2 = self.cfg.beta2;
        let bc1 = 1.0 - b1.powi(self.step as i32);
        let bc2 = 1.0 - b2.powi(self.step as i32);
        let decay = 1.0 - lr * self.cfg.weight_decay;
        let eps = self.cfg.epsilon;
        for ((layer, grad), (m, v)) in net
            .layers_mut()
            .into_iter()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            layer.w *= decay;
            layer.b *= decay;
            m.w.zip_mut_with(&grad.w, |m, &g| *m = b1 * *m + (1.0 - b1) * g);
            v.w.zip_mut_with(&grad.w, |v, &g| *v = b2 * *v + (1.0 - b2) * g * g);
            m.b.zip_mut_with(&grad.b, |m, &g| *m = b1 * *m + (1.0 - b1) * g);
            v.b.zip_mut_with(&grad.b, |v, &g| *v = b2 * *v + (1.0 - b2) * g * g);
            apply(&mut layer.w, &m.w, &v.w, lr, bc1, bc2, eps);
            apply1(&mut layer.b, &m.b, &v.b, lr, bc1, bc2, eps);
        }
    }

    pub fn moments(&self) -> (&Gradients, &Gradients) {
        (&self.m, &self.v)
    }

    pub fn restore_moments(&mut self, step: u64, m: Gradients, v: Gradients) {
        self.step = step;
        self.m = m;
        self.v = v;
    }
}

fn apply(
    p: &mut ndarray::Array2<f64>,
    m: &ndarray::Array2<f64>,
    v: &ndarray::Array2<f64>,
    lr: f64,
    bc1: f64,
    bc2: f64,
    eps: f64,
) {
    ndarray::Zip::from(p).and(m).and(v).for_each(|p, &m, &v| {
        *p -= lr * (m / bc1) / ((v / bc2).sqrt() + eps);
    });
}

fn apply1(
    p: &mut ndarray::Array1<f64>,
    m: &ndarray::Array1<f64>,
    v: &ndarray::Array1<f64>,
    lr: f64,
    bc1: f64,
    bc2: f64,
    eps: f64,
) {
    ndarray::Zip::from(p).and(m).and(v).for_each(|p, &m, &v| {
        *p -= lr * (m / bc1) / ((v / bc2).sqrt() + eps);
    });
}

/// Cosine annealing from the base rate to zero over `total` optimizer steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosineLr {
    pub base: f64,
    pub total: u64,
}

impl CosineLr {
    pub fn value(&self, step: u64) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        let frac = (step as f64 / self.total as f64).min(1.0);
        self.base * 0.5 * (1.0 + (std::f64::consts::PI * frac).cos())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rl::net::HeadSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cosine_ramp_endpoints_and_midpoint() {
        let lr = CosineLr {
            base: 5e-4,
            total: 1000,
        };
        assert_eq!(lr.value(0), 5e-4);
        assert!((lr.value(500) - 2.5e-4).abs() < 1e-18);
        assert!(lr.value(1000).abs() < 1e-19);
        assert_eq!(lr.value(2000), 0.0);
    }

    #[test]
    fn zero_gradients_change_parameters_only_through_decay() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut net = QNetwork::new(3, &[4], HeadSpec::Combinatorial { actions: 2 }, &mut rng);
        let before = net.layers()[0].w.clone();
        let grads = net.zero_grads();
        let mut opt = AdamW::new(&net, AdamWConfig::default());
        opt.update(&mut net, &grads, 5e-4);
        let after = &net.layers()[0].w;
        let decay = 1.0 - 5e-4 * 1e-2;
        for (b, a) in before.iter().zip(after.iter()) {
            assert!((b * decay - a).abs() < 1e-15);
        }
    }

    #[test]
    fn descends_a_simple_quadratic() {
        // Minimize mean (q(x) - 1)^2 on a fixed input; AdamW should push the
        // single output towards 1.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut net = QNetwork::new(2, &[4], HeadSpec::Combinatorial { actions: 1 }, &mut rng);
        let mut opt = AdamW::new(
            &net,
            AdamWConfig {
                weight_decay: 0.0,
                ..Default::default()
            },
        );
        let x = ndarray::arr2(&[[1.0, -0.5]]);
        let mut last = f64::INFINITY;
        for _ in 0..500 {
            let (q, cache) = net.forward_batch(&x).unwrap();
            let q = match q {
                crate::rl::net::QOut::Combinatorial(q) => q,
                _ => unreachable!(),
            };
            let err = q[[0, 0]] - 1.0;
            last = err * err;
            let dq = ndarray::arr2(&[[2.0 * err]]);
            let grads = net.backward(&cache, &crate::rl::net::QGrad::Combinatorial(dq));
            opt.update(&mut net, &grads, 1e-2);
        }
        assert!(last < 1e-4, "loss {last} did not shrink");
    }
}
