use std::f64::consts::PI;

use serde::Serialize;

use super::{AlphaPair, RegionError, BOUNDARY_BAND};

const FOUR_PI: f64 = 4.0 * PI;

/// `rho_bar_i = 4 pi min{1, min_{m != m'} (2 + alpha_im + alpha_im')}`.
pub fn rho_bar(alphas: &[AlphaPair]) -> [f64; 2] {
    std::array::from_fn(|i| {
        let mut sorted: Vec<f64> = alphas.iter().map(|a| a[i]).collect();
        sorted.sort_by(f64::total_cmp);
        let pair = match sorted.as_slice() {
            [a, b, ..] => 2.0 + a + b,
            _ => f64::INFINITY,
        };
        FOUR_PI * pair.min(1.0)
    })
}

/// Upper end of the coercive range for component `i`: `4 pi min{1, 1 + min_m alpha_im}`.
pub fn coercive_bound(alphas: &[AlphaPair], i: usize) -> f64 {
    let min = alphas.iter().map(|a| a[i]).fold(0.0, f64::min);
    FOUR_PI * (1.0 + min).min(1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MCount {
    pub m: [usize; 3],
    /// Some `rho_i` lies within [`BOUNDARY_BAND`] of a threshold used in the count.
    pub on_threshold: bool,
}

/// Counts `(M1, M2, M3)` with strict threshold comparisons.
pub fn count_m(rho: [f64; 2], alphas: &[AlphaPair]) -> MCount {
    let mut m = [0usize; 3];
    let mut on_threshold = false;
    let mut below = |value: f64, threshold: f64| {
        on_threshold |= (value - threshold).abs() <= BOUNDARY_BAND;
        threshold < value
    };
    for a in alphas {
        let single = [below(rho[0], FOUR_PI * (1.0 + a[0])), below(rho[1], FOUR_PI * (1.0 + a[1]))];
        let pair = FOUR_PI * (2.0 + a[0] + a[1]);
        let under_pair = [!below(rho[0], pair), !below(rho[1], pair)];
        m[0] += usize::from(single[0]);
        m[1] += usize::from(single[1]);
        m[2] += usize::from(single[0] && single[1] && under_pair[0] && under_pair[1]);
    }
    MCount { m, on_threshold }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExistenceVerdict {
    ExistenceGuaranteed,
    NoInfo,
}

/// Existence verdict from the counts alone. The caller still has to check
/// `rho_i < rho_bar_i` and that `rho` avoids the compactness-failure set.
pub fn existence_verdict(m: [usize; 3]) -> Result<ExistenceVerdict, RegionError> {
    let [m1, m2, m3] = m;
    if m3 > m1.min(m2) {
        return Err(RegionError::InvalidCounts(m1, m2, m3));
    }
    let excluded = matches!((m1, m2, m3), (1, _, 0) | (_, 1, 0) | (2, 2, 1) | (2, 3, 2) | (3, 2, 2));
    Ok(if excluded { ExistenceVerdict::NoInfo } else { ExistenceVerdict::ExistenceGuaranteed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_bar_examples() {
        let r = rho_bar(&[[-0.5, 0.0], [-0.25, 0.0]]);
        assert!((r[0] - FOUR_PI).abs() < 1e-15);
        let r = rho_bar(&[[-0.9, 0.0], [-0.8, 0.0]]);
        assert!((r[0] - 1.2 * PI).abs() < 1e-12);
        assert_eq!(rho_bar(&[]), [FOUR_PI, FOUR_PI]);
    }

    #[test]
    fn count_examples() {
        let alphas = [[-0.9, 0.0], [-0.8, 0.0], [0.0, 0.0]];
        assert_eq!(count_m([PI, 0.1], &alphas).m[0], 2);
        assert_eq!(count_m([0.1, 0.1], &alphas).m, [0, 0, 0]);
        assert_eq!(count_m([3.0 * PI, 3.0 * PI], &[[-0.5, -0.5]]).m, [1, 1, 1]);
        assert!(count_m([2.0 * PI, 1.0], &[[-0.5, -0.5]]).on_threshold);
    }

    #[test]
    fn exclusion_list() {
        assert_eq!(existence_verdict([1, 5, 0]).unwrap(), ExistenceVerdict::NoInfo);
        assert_eq!(existence_verdict([2, 4, 2]).unwrap(), ExistenceVerdict::ExistenceGuaranteed);
        assert_eq!(existence_verdict([2, 2, 1]).unwrap(), ExistenceVerdict::NoInfo);
        assert_eq!(existence_verdict([0, 1, 0]).unwrap(), ExistenceVerdict::NoInfo);
        assert!(existence_verdict([1, 1, 2]).is_err());
    }
}
