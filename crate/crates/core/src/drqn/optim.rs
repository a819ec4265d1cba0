use crate::error::{shape_err, Result};
use crate::recurrent::DressedModel;

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(shape_err(
                "adam",
                format!(
                    "{} params, {} grads, optimizer sized for {}",
                    params.len(),
                    grads.len(),
                    self.m.len()
                ),
            ));
        }
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

/// `target ← τ·policy + (1 − τ)·target`, elementwise.
pub fn soft_update_flat(target: &mut [f64], policy: &[f64], tau: f64) -> Result<()> {
    if target.len() != policy.len() {
        return Err(shape_err(
            "soft_update",
            format!("{} target vs {} policy parameters", target.len(), policy.len()),
        ));
    }
    for (t, &p) in target.iter_mut().zip(policy) {
        *t = tau * p + (1.0 - tau) * *t;
    }
    Ok(())
}

pub fn soft_update(target: &mut DressedModel, policy: &DressedModel, tau: f64) -> Result<()> {
    let mut flat = target.flat_params();
    soft_update_flat(&mut flat, &policy.flat_params(), tau)?;
    target.set_flat_params(&flat)
}
