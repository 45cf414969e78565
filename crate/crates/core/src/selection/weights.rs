use serde::{Deserialize, Serialize};

use crate::error::{CegaError, Result};

/// Weights on the representativeness, uncertainty and diversity ranks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights(pub [f64; 3]);

impl Weights {
    /// Copy with the weights at `zeroed` indices set to 0.
    pub fn without(self, zeroed: &[usize]) -> Weights {
        let mut w = self.0;
        for &i in zeroed {
            w[i] = 0.0;
        }
        Weights(w)
    }
}

/// Cycle-dependent weights
///
/// ```text
/// ω₁(γ) = α₁ + Δ·e^{−λγ}
/// ω₂(γ) = α₂ + Δ·(1 − e^{−λγ})
/// ω₃(γ) = α₃·(1 − e^{−γ})
/// ```
///
/// Structure dominates early; the model-driven criteria take over as
/// queried labels accumulate. The weights are not normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightSchedule {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub delta: f64,
    pub lambda: f64,
}

impl Default for WeightSchedule {
    fn default() -> Self {
        WeightSchedule {
            alpha1: 0.2,
            alpha2: 0.2,
            alpha3: 0.2,
            delta: 0.6,
            lambda: 0.3,
        }
    }
}

impl WeightSchedule {
    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha1, self.alpha2, self.alpha3, self.delta, self.lambda];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(CegaError::Config("weight schedule values must be finite".into()));
        }
        if !(self.lambda > 0.0) {
            return Err(CegaError::Config("weight schedule lambda must be positive".into()));
        }
        Ok(())
    }
}

pub fn adaptive_weights(gamma: usize, sched: &WeightSchedule) -> Result<Weights> {
    if gamma == 0 {
        return Err(CegaError::Usage("cycle index starts at 1".into()));
    }
    let g = gamma as f64;
    let decay = (-sched.lambda * g).exp();
    Ok(Weights([
        sched.alpha1 + sched.delta * decay,
        sched.alpha2 + sched.delta * (1.0 - decay),
        sched.alpha3 * (1.0 - (-g).exp()),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_cycle() {
        let w = adaptive_weights(1, &WeightSchedule::default()).unwrap().0;
        assert!((w[0] - 0.644_491).abs() < 1e-6);
        assert!((w[0] - (0.2 + 0.6 * (-0.3f64).exp())).abs() < 1e-12);
        assert!((w[1] - (0.2 + 0.6 * (1.0 - (-0.3f64).exp()))).abs() < 1e-12);
        assert!((w[2] - 0.2 * (1.0 - (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn limit() {
        let w = adaptive_weights(100, &WeightSchedule::default()).unwrap().0;
        for (g, e) in w.iter().zip([0.2, 0.8, 0.2]) {
            assert!((g - e).abs() < 1e-6);
        }
    }

    #[test]
    fn no_gap_means_constant() {
        let s = WeightSchedule {
            delta: 0.0,
            ..Default::default()
        };
        for g in 1..20 {
            let w = adaptive_weights(g, &s).unwrap().0;
            assert_eq!((w[0], w[1]), (0.2, 0.2));
        }
        assert!(adaptive_weights(0, &s).is_err());
    }

    proptest! {
        #[test]
        fn monotone(delta in 0.01f64..2.0, lambda in 0.01f64..1.0, g in 1usize..30) {
            let s = WeightSchedule { delta, lambda, ..Default::default() };
            let a = adaptive_weights(g, &s).unwrap().0;
            let b = adaptive_weights(g + 1, &s).unwrap().0;
            prop_assert!(b[0] < a[0]);
            prop_assert!(b[1] > a[1]);
            prop_assert!(b[2] > a[2]);
        }
    }
}
