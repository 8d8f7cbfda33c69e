use serde::{Deserialize, Serialize};

use super::LearnerError;
use crate::order::Label;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticParams {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
}

impl Default for LogisticParams {
    fn default() -> Self {
        LogisticParams {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-3,
        }
    }
}

/// Binary logistic regression, `P(+1 | x) = sigmoid(w.x + b)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sign(y: Label) -> f64 {
    f64::from(y.sign())
}

fn dot(w: &[f64], x: &[f64]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Mean logistic loss plus `l2/2 * |w|^2` (the bias is not penalized).
pub fn loss(weights: &[f64], bias: f64, x: &[&[f64]], y: &[Label], l2: f64) -> f64 {
    let n = x.len() as f64;
    let data: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, &yi)| softplus(-sign(yi) * (dot(weights, xi) + bias)))
        .sum::<f64>()
        / n;
    data + 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>()
}

/// Gradient of [`loss`] with respect to `(weights, bias)`.
pub fn gradient(weights: &[f64], bias: f64, x: &[&[f64]], y: &[Label], l2: f64) -> (Vec<f64>, f64) {
    let n = x.len() as f64;
    let mut gw = vec![0.0; weights.len()];
    let mut gb = 0.0;
    for (xi, &yi) in x.iter().zip(y) {
        let s = sign(yi);
        // d/dz softplus(-s z) = -s * sigmoid(-s z)
        let coef = -s * sigmoid(-s * (dot(weights, xi) + bias));
        for (g, v) in gw.iter_mut().zip(xi.iter()) {
            *g += coef * v;
        }
        gb += coef;
    }
    for (g, w) in gw.iter_mut().zip(weights) {
        *g = *g / n + l2 * w;
    }
    (gw, gb / n)
}

impl LogisticModel {
    /// Full-batch gradient descent from zero.
    pub fn fit(x: &[&[f64]], y: &[Label], params: &LogisticParams) -> Result<Self, LearnerError> {
        let dim = super::check_data(x, y)?;
        let mut w = vec![0.0; dim];
        let mut b = 0.0;
        for _ in 0..params.epochs {
            let (gw, gb) = gradient(&w, b, x, y, params.l2);
            for (wi, g) in w.iter_mut().zip(&gw) {
                *wi -= params.learning_rate * g;
            }
            b -= params.learning_rate * gb;
        }
        Ok(LogisticModel { weights: w, bias: b })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<f64, LearnerError> {
        if x.len() != self.dim() {
            return Err(LearnerError::DimMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(self.proba(x))
    }

    /// `P(+1 | x)`; `x` must have the model's dimension.
    #[inline]
    pub fn proba(&self, x: &[f64]) -> f64 {
        sigmoid(dot(&self.weights, x) + self.bias)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_points_give_even_odds_at_origin() {
        let a = [1.0, 2.0];
        let b = [-1.0, -2.0];
        let m = LogisticModel::fit(&[&a, &b], &[Label::Positive, Label::Negative], &LogisticParams::default()).unwrap();
        assert!(m.bias.abs() < 1e-12);
        assert!((m.predict_proba(&[0.0, 0.0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hand_cases() {
        let zero = LogisticModel {
            weights: vec![0.0, 0.0],
            bias: 0.0,
        };
        assert_eq!(zero.predict_proba(&[3.0, -1.0]).unwrap(), 0.5);
        let unit = LogisticModel {
            weights: vec![1.0],
            bias: 0.0,
        };
        assert_eq!(unit.predict_proba(&[0.0]).unwrap(), 0.5);
        let saturated = LogisticModel {
            weights: vec![0.0],
            bias: 800.0,
        };
        assert_eq!(saturated.predict_proba(&[1.0]).unwrap(), 1.0);
        assert!(matches!(
            unit.predict_proba(&[1.0, 2.0]),
            Err(LearnerError::DimMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn separable_line_is_monotone() {
        let xs: Vec<[f64; 1]> = (-5..=5).filter(|&v| v != 0).map(|v| [v as f64]).collect();
        let rows: Vec<&[f64]> = xs.iter().map(|r| &r[..]).collect();
        let ys: Vec<Label> = xs.iter().map(|r| Label::from_membership(r[0] > 0.0)).collect();
        let m = LogisticModel::fit(&rows, &ys, &LogisticParams::default()).unwrap();
        let probs: Vec<f64> = (-50..=50).map(|v| m.proba(&[v as f64 / 10.0])).collect();
        assert!(probs.windows(2).all(|w| w[0] < w[1]));
        assert!(m.proba(&[3.0]) > 0.9);
    }

    #[test]
    fn single_class_leans_positive_everywhere() {
        let xs = [[0.3, -1.0], [1.5, 0.2], [-0.7, 0.9]];
        let rows: Vec<&[f64]> = xs.iter().map(|r| &r[..]).collect();
        let m = LogisticModel::fit(&rows, &[Label::Positive; 3], &LogisticParams::default()).unwrap();
        for x in [[0.0, 0.0], [5.0, 5.0], [-5.0, -5.0], [1.0, -3.0]] {
            assert!(m.proba(&x) > 0.5);
        }
    }

    #[test]
    fn zero_dimension_is_an_error() {
        let empty: [f64; 0] = [];
        assert!(matches!(
            LogisticModel::fit(&[&empty], &[Label::Positive], &LogisticParams::default()),
            Err(LearnerError::ZeroDim)
        ));
    }
}
