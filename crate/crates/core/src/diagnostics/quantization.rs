use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, Result};

/// Where a blow-up happens: a regular point or a singular point with weights `(alpha_1, alpha_2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BlowUpLocation {
    Regular,
    Singular([f64; 2]),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuantizationVerdict {
    pub admissible: bool,
    /// Closest table entry.
    pub nearest: [f64; 2],
    pub distance: f64,
    /// `sigma_1^2 - sigma_1 sigma_2 + sigma_2^2`.
    pub local_identity_residual: f64,
}

pub fn regular_table() -> [[f64; 2]; 5] {
    let f = 4.0 * PI;
    [[f, 0.0], [0.0, f], [f, 2.0 * f], [2.0 * f, f], [2.0 * f, 2.0 * f]]
}

/// Admissible local masses at a singular point; reduces to [`regular_table`] at `alpha = 0`.
pub fn singular_table([a1, a2]: [f64; 2]) -> [[f64; 2]; 5] {
    let f = 4.0 * PI;
    let (m1, m2, s) = (f * (1.0 + a1), f * (1.0 + a2), f * (2.0 + a1 + a2));
    [[m1, 0.0], [0.0, m2], [m1, s], [s, m2], [s, s]]
}

/// Whether `sigma` is within `tol` (Euclidean) of an admissible blow-up mass pair.
///
/// Singular locations need `-1 < alpha_i <= 0`; `alpha = 0` is accepted as the
/// degenerate case that reproduces the regular table.
pub fn quantization_check(sigma: [f64; 2], location: BlowUpLocation, tol: f64) -> Result<QuantizationVerdict> {
    if !(sigma.iter().all(|s| s.is_finite() && *s >= 0.0)) {
        return Err(DiagnosticsError::Config(format!("sigma = {sigma:?} must be non-negative")));
    }
    if !(tol >= 0.0) {
        return Err(DiagnosticsError::Config(format!("tolerance {tol} must be non-negative")));
    }
    let table = match location {
        BlowUpLocation::Regular => regular_table(),
        BlowUpLocation::Singular(alpha) => {
            if alpha.iter().any(|a| !(*a > -1.0 && *a <= 0.0)) {
                return Err(DiagnosticsError::Config(format!("singular weights {alpha:?} must lie in (-1, 0]")));
            }
            singular_table(alpha)
        }
    };
    let dist = |e: &[f64; 2]| (sigma[0] - e[0]).hypot(sigma[1] - e[1]);
    let nearest = *table.iter().min_by(|a, b| dist(a).total_cmp(&dist(b))).expect("non-empty table");
    let distance = dist(&nearest);
    Ok(QuantizationVerdict {
        admissible: distance <= tol,
        nearest,
        distance,
        local_identity_residual: sigma[0] * sigma[0] - sigma[0] * sigma[1] + sigma[1] * sigma[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_pairs_admissible() {
        for e in regular_table() {
            assert!(quantization_check(e, BlowUpLocation::Regular, 0.0).unwrap().admissible);
        }
        let f = 4.0 * PI;
        let v = quantization_check([f, f], BlowUpLocation::Regular, 1e-6).unwrap();
        assert!(!v.admissible);
        assert!((v.distance - f).abs() < 1e-12);
    }

    #[test]
    fn singular_table_entries() {
        let f = 4.0 * PI;
        let v = quantization_check([f * 0.5, f * 1.25], BlowUpLocation::Singular([-0.5, -0.25]), 1e-9).unwrap();
        assert!(v.admissible);
        assert_eq!(singular_table([0.0, 0.0]), regular_table());
        assert!(quantization_check([1.0, 1.0], BlowUpLocation::Singular([0.5, 0.0]), 1.0).is_err());
    }

    #[test]
    fn zero_masses() {
        assert_eq!(quantization_check([0.0, 0.0], BlowUpLocation::Regular, 0.1).unwrap().local_identity_residual, 0.0);
    }
}
