use crate::energy::EnergyModel;
use crate::error::Result;
use crate::layout::{BBox, MIN_SIZE};

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(len: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            step: 0,
            m: vec![0.0; len],
            v: vec![0.0; len],
            lr,
            beta1,
            beta2,
            eps,
        }
    }

    /// One bias-corrected update of `params` in place.
    pub fn update(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        assert_eq!(grad.len(), self.m.len());
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for k in 0..params.len() {
            let g = grad[k];
            self.m[k] = self.beta1 * self.m[k] + (1.0 - self.beta1) * g;
            self.v[k] = self.beta2 * self.v[k] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[k] / c1;
            let v_hat = self.v[k] / c2;
            params[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Gradient steps on the continuous objective. Sizes are floored after
/// every step; the result is projected onto the canvas at the end.
/// `on_step` sees the boxes after each step.
pub fn stage_b(
    model: &EnergyModel<'_>,
    boxes: &[BBox],
    iters: usize,
    state: &mut AdamState,
    mut on_step: impl FnMut(usize, &[BBox]),
) -> Result<Vec<BBox>> {
    let mut params: Vec<f64> = boxes.iter().flat_map(|b| b.to_array()).collect();
    let mut cur = boxes.to_vec();
    for it in 0..iters {
        let grad: Vec<f64> = model.stage_b_gradient(&cur)?.into_iter().flatten().collect();
        state.update(&mut params, &grad);
        for (b, p) in cur.iter_mut().zip(params.chunks_exact_mut(4)) {
            p[2] = p[2].max(MIN_SIZE);
            p[3] = p[3].max(MIN_SIZE);
            *b = BBox::new(p[0], p[1], p[2], p[3]);
        }
        on_step(it, &cur);
    }
    Ok(cur.iter().map(BBox::clamped_to_canvas).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_step_moves_by_lr() {
        let mut s = AdamState::new(2, 0.01, 0.9, 0.999, 1e-8);
        let mut p = [1.0, 1.0];
        s.update(&mut p, &[3.0, -0.5]);
        assert!((p[0] - 0.99).abs() < 1e-9);
        assert!((p[1] - 1.01).abs() < 1e-9);
    }

    #[test]
    fn zero_gradient_is_exact_noop() {
        let mut s = AdamState::new(3, 0.01, 0.9, 0.999, 1e-8);
        let mut p = [0.1, 0.2, 0.3];
        for _ in 0..10 {
            s.update(&mut p, &[0.0; 3]);
        }
        assert_eq!(p, [0.1, 0.2, 0.3]);
        assert_eq!(s.step, 10);
    }

    #[test]
    fn minimizes_a_quadratic() {
        let mut s = AdamState::new(1, 0.05, 0.9, 0.999, 1e-8);
        let mut p = [2.0];
        for _ in 0..500 {
            let g = [2.0 * (p[0] - 0.5)];
            s.update(&mut p, &g);
        }
        assert!((p[0] - 0.5).abs() < 1e-2);
    }
}
