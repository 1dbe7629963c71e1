use std::f64::consts::PI;

use serde::Serialize;

use super::{point_regime, weights_of, BubbleSpec, Regime, Result};
use crate::fields::ProblemParams;

/// A closed-form leading term with an optional competing reading of the same estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Variant {
    pub primary: f64,
    pub alternate: Option<f64>,
}

impl Variant {
    fn single(primary: f64) -> Self {
        Self { primary, alternate: None }
    }

    fn add(self, other: Variant) -> Variant {
        let alternate = match (self.alternate, other.alternate) {
            (None, None) => None,
            (a, b) => Some(a.unwrap_or(self.primary) + b.unwrap_or(other.primary)),
        };
        Variant { primary: self.primary + other.primary, alternate }
    }
}

/// Leading-order values (no `O(1)` terms) of the energy parts of `Phi^lambda(zeta)`.
///
/// `q.alternate` carries the competing `<>`/`><` energy with a
/// `4 pi (1 + alpha_2)^2 log(1/t)` tail term; `j.alternate` uses
/// `2 (1 + alpha_1)(4 pi (2 + alpha_1) - rho_1)` for the `<<` energy slope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub q: Variant,
    pub int_phi: [f64; 2],
    pub log_integral: [f64; 2],
    pub j: Variant,
}

impl Prediction {
    const ZERO: Prediction = Prediction {
        q: Variant { primary: 0.0, alternate: None },
        int_phi: [0.0; 2],
        log_integral: [0.0; 2],
        j: Variant { primary: 0.0, alternate: None },
    };

    fn add(self, o: Prediction) -> Prediction {
        Prediction {
            q: self.q.add(o.q),
            int_phi: [self.int_phi[0] + o.int_phi[0], self.int_phi[1] + o.int_phi[1]],
            log_integral: [self.log_integral[0] + o.log_integral[0], self.log_integral[1] + o.log_integral[1]],
            j: self.j.add(o.j),
        }
    }
}

fn one_point(regime: Regime, [a, b]: [f64; 2], lambda: f64, t: f64, [r1, r2]: [f64; 2]) -> Prediction {
    if lambda <= 1.0 {
        return Prediction::ZERO;
    }
    let s = a + b;
    let l = lambda.ln();
    let pos = |x: f64| x.ln().max(0.0);
    let four_pi = 4.0 * PI;
    match regime {
        Regime::Low if t < 0.5 => Prediction {
            q: Variant::single(8.0 * PI * a * a * l),
            int_phi: [-4.0 * a * l, 0.0],
            log_integral: [-2.0 * a * l, 2.0 * a * l],
            j: Variant {
                primary: 2.0 * a * (four_pi * a - r1) * l,
                alternate: Some(2.0 * a * (four_pi * (1.0 + a) - r1) * l),
            },
        },
        Regime::Low => Prediction {
            q: Variant::single(8.0 * PI * b * b * l),
            int_phi: [0.0, -4.0 * b * l],
            log_integral: [2.0 * b * l, -2.0 * b * l],
            j: Variant {
                primary: 2.0 * b * (four_pi * b - r2) * l,
                alternate: Some(2.0 * b * (four_pi * (1.0 + b) - r2) * l),
            },
        },
        Regime::LowHigh => {
            let (lt, lmt) = (pos(lambda * t), lambda.min(1.0 / t).ln());
            let alt = if lambda * t >= 1.0 - 1e-12 {
                8.0 * PI * s * s * (lambda * t).ln() + 4.0 * PI * b * b * (1.0 / t).ln()
            } else {
                8.0 * PI * a * a * l
            };
            Prediction {
                q: Variant { primary: 8.0 * PI * (s * s * lt + a * a * lmt), alternate: Some(alt) },
                int_phi: [-4.0 * a * l - 4.0 * b * lt, -4.0 * s * lt],
                log_integral: [-2.0 * a * l - 2.0 * b * lt, 2.0 * a * lmt],
                j: Variant::single(2.0 * a * (four_pi * a - r1) * lmt + 2.0 * s * (four_pi * s - r2) * lt),
            }
        }
        Regime::HighLow => {
            let u = 1.0 - t;
            let (l1, lm1) = (pos(lambda * u), lambda.min(1.0 / u).ln());
            let alt = if lambda * u >= 1.0 - 1e-12 {
                8.0 * PI * s * s * (lambda * u).ln() + 4.0 * PI * a * a * (1.0 / u).ln()
            } else {
                8.0 * PI * b * b * l
            };
            Prediction {
                q: Variant { primary: 8.0 * PI * (s * s * l1 + b * b * lm1), alternate: Some(alt) },
                int_phi: [-4.0 * s * l1, -4.0 * b * l - 4.0 * a * l1],
                log_integral: [2.0 * b * lm1, -2.0 * b * l - 2.0 * a * l1],
                j: Variant::single(2.0 * s * (four_pi * s - r1) * l1 + 2.0 * b * (four_pi * b - r2) * lm1),
            }
        }
        Regime::High => {
            let (lt, l1) = (pos(lambda * t), pos(lambda * (1.0 - t)));
            let p1 = l + lt - l1;
            let p2 = l + l1 - lt;
            Prediction {
                q: Variant::single(8.0 * PI * s * s * l),
                int_phi: [-4.0 * s * l, -4.0 * s * l],
                log_integral: [-s * p1, -s * p2],
                j: Variant::single(s * (four_pi * s - r1) * p2 + s * (four_pi * s - r2) * p1),
            }
        }
        Regime::TwoPoint => unreachable!("one-point regimes only"),
    }
}

/// Closed-form leading terms for `spec`; the two-point map adds the
/// predictions of its two non-interacting halves.
pub fn predict(params: &ProblemParams, spec: &BubbleSpec) -> Result<Prediction> {
    let regime = spec.regime(params)?;
    let rho = params.rho;
    if regime != Regime::TwoPoint {
        return Ok(one_point(regime, weights_of(params, spec.x1)?, spec.lambda, spec.t, rho));
    }
    let first =
        one_point(point_regime(params, spec.x1)?, weights_of(params, spec.x1)?, spec.lambda * (1.0 - spec.t), 0.0, rho);
    let second =
        one_point(point_regime(params, spec.x2)?, weights_of(params, spec.x2)?, spec.lambda * spec.t, 1.0, rho);
    Ok(first.add(second))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slope(f: impl Fn(f64) -> f64) -> f64 {
        (f(2f64.powi(12)) - f(2f64.powi(6))) / (6.0 * 2f64.ln())
    }

    #[test]
    fn low_regime_slopes() {
        let p = one_point(Regime::Low, [1.0, 1.0], 100.0, 0.2, [1.0, 1.0]);
        let l = 100f64.ln();
        assert!((p.q.primary / l - 8.0 * PI).abs() < 1e-12);
        assert!((p.int_phi[0] / l + 4.0).abs() < 1e-12);
        assert!((p.log_integral[0] / l + 2.0).abs() < 1e-12 && (p.log_integral[1] / l - 2.0).abs() < 1e-12);
    }

    #[test]
    fn high_regime_q_slope() {
        let s = slope(|l| one_point(Regime::High, [0.75, 0.75], l, 0.5, [20.0, 20.0]).q.primary);
        assert!((s - 18.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn j_is_sum_of_parts() {
        // J = Q - sum rho_i (log int_i - int u_i) with int u_i = int phi_i - int phi_j / 2.
        let rho = [5.0, 30.0];
        for (regime, t) in [(Regime::Low, 0.3), (Regime::LowHigh, 0.1), (Regime::HighLow, 0.6), (Regime::High, 0.4)] {
            let p = one_point(regime, [0.6, 0.8], 1000.0, t, rho);
            let mean = [p.int_phi[0] - p.int_phi[1] / 2.0, p.int_phi[1] - p.int_phi[0] / 2.0];
            let j = p.q.primary - (0..2).map(|i| rho[i] * (p.log_integral[i] - mean[i])).sum::<f64>();
            assert!((j - p.j.primary).abs() < 1e-9 * j.abs().max(1.0), "{regime}: {j} vs {}", p.j.primary);
        }
    }

    #[test]
    fn variants_differ_on_unit_branch() {
        // lambda t = 1: 8 pi a^2 log lambda against 4 pi b^2 log lambda.
        let (a, b) = (0.75, 0.75);
        let s1 = slope(|l| one_point(Regime::LowHigh, [a, b], l, 1.0 / l, [1.0, 1.0]).q.primary);
        let s2 = slope(|l| one_point(Regime::LowHigh, [a, b], l, 1.0 / l, [1.0, 1.0]).q.alternate.unwrap());
        assert!((s1 - 8.0 * PI * a * a).abs() < 1e-9);
        assert!((s2 - 4.0 * PI * b * b).abs() < 1e-9);
    }
}
