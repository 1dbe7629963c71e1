use std::f64::consts::PI;

use serde::Serialize;

use super::AlphaPair;

const FOUR_PI: f64 = 4.0 * PI;

/// `rho1^2 - rho1 rho2 + rho2^2 - 4 pi (1 + a1) rho1 - 4 pi (1 + a2) rho2`.
pub fn disk_form(rho: [f64; 2], alpha: AlphaPair) -> f64 {
    let [r1, r2] = rho;
    r1 * r1 - r1 * r2 + r2 * r2 - FOUR_PI * (1.0 + alpha[0]) * r1 - FOUR_PI * (1.0 + alpha[1]) * r2
}

/// Non-existence on the disk with one origin singularity: the form is non-negative.
pub fn disk_nonexistence(rho: [f64; 2], alpha: AlphaPair) -> bool {
    disk_form(rho, alpha) >= 0.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SphereNonexistence {
    NonExistence,
    NoConclusion,
    NotApplicable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SphereVerdict {
    pub verdict: SphereNonexistence,
    /// The four forms, each expected `<= 0, >= 0, <= 0, >= 0` in the direct branch.
    pub forms: [f64; 4],
}

/// The four quadratic forms for antipodal points with weights `p1 = [a11, a21]`, `p2 = [a12, a22]`.
pub fn sphere_forms(rho: [f64; 2], p1: AlphaPair, p2: AlphaPair) -> [f64; 4] {
    let [r1, r2] = rho;
    let [a11, a21] = p1;
    let [a12, a22] = p2;
    let quad = r1 * r1 + r2 * r2 - r1 * r2;
    let diff = r1 * r1 - r2 * r2;
    [
        quad - FOUR_PI * (1.0 + a11) * r1 - FOUR_PI * (1.0 + a21) * r2,
        quad - FOUR_PI * (1.0 + a12) * r1 - FOUR_PI * (1.0 + a22) * r2,
        diff - FOUR_PI * (1.0 + a11) * r1 + FOUR_PI * (1.0 + a22) * r2,
        diff - FOUR_PI * (1.0 + a12) * r1 + FOUR_PI * (1.0 + a21) * r2,
    ]
}

/// Non-existence on the sphere with two antipodal singularities: the four
/// inequalities hold with at least one strict, or all four reversed ones do
/// (again with one strict).
pub fn sphere_nonexistence(rho: [f64; 2], p1: AlphaPair, p2: AlphaPair) -> SphereVerdict {
    let forms = sphere_forms(rho, p1, p2);
    if p1 == p2 {
        return SphereVerdict { verdict: SphereNonexistence::NotApplicable, forms };
    }
    // Orient so the direct branch reads "all <= 0".
    let oriented = [forms[0], -forms[1], forms[2], -forms[3]];
    let strict = oriented.iter().any(|&f| f != 0.0);
    let direct = oriented.iter().all(|&f| f <= 0.0);
    let reversed = oriented.iter().all(|&f| f >= 0.0);
    let verdict = if strict && (direct || reversed) {
        SphereNonexistence::NonExistence
    } else {
        SphereNonexistence::NoConclusion
    };
    SphereVerdict { verdict, forms }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI2: f64 = PI * PI;

    #[test]
    fn disk_examples() {
        assert!(disk_nonexistence([8.0 * PI, 8.0 * PI], [0.0, 0.0]));
        assert!(disk_form([8.0 * PI, 8.0 * PI], [0.0, 0.0]).abs() < 1e-9);
        assert!(!disk_nonexistence([2.0 * PI, 2.0 * PI], [0.0, 0.0]));
    }

    #[test]
    fn scalar_reduction() {
        let a = [-0.3, 0.1];
        let t = FOUR_PI * 0.7;
        assert!(!disk_nonexistence([t * (1.0 - 1e-9), 0.0], a));
        assert!(disk_nonexistence([t * (1.0 + 1e-9), 0.0], a));
    }

    #[test]
    fn sphere_example_forms() {
        let v = sphere_nonexistence([2.0 * PI, 2.0 * PI], [-0.5, -0.5], [0.0, 0.0]);
        let expected = [-4.0 * PI2, -12.0 * PI2, 4.0 * PI2, -4.0 * PI2];
        for (f, e) in v.forms.iter().zip(expected) {
            assert!((f - e).abs() < 1e-9, "{f} vs {e}");
        }
        assert_eq!(v.verdict, SphereNonexistence::NoConclusion);
    }

    #[test]
    fn equal_weights_not_applicable() {
        let v = sphere_nonexistence([1.0, 1.0], [0.1, 0.2], [0.1, 0.2]);
        assert_eq!(v.verdict, SphereNonexistence::NotApplicable);
    }
}
