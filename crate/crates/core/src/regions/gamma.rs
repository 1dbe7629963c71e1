use std::f64::consts::PI;

use serde::Serialize;

use super::{AlphaPair, RegionError, BOUNDARY_BAND};

const FOUR_PI: f64 = 4.0 * PI;
const MAX_VALUES: usize = 1 << 16;

/// The half-line `{coordinate = value, other coordinate >= start}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ray {
    pub value: f64,
    pub start: f64,
}

impl Ray {
    fn distance(&self, along: f64, across: f64) -> f64 {
        if across >= self.start {
            (along - self.value).abs()
        } else {
            (along - self.value).hypot(self.start - across)
        }
    }
}

/// Compactness-failure set as a union of vertical (`rho_1 = value`) and
/// horizontal (`rho_2 = value`) half-lines, enumerated up to a bound.
#[derive(Clone, Debug, Default)]
pub struct GammaSet {
    pub vertical: Vec<Ray>,
    pub horizontal: Vec<Ray>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaMembership {
    pub in_gamma: bool,
    pub distance: f64,
}

impl GammaSet {
    /// Enumerates every value `<= bound` (the zero value excluded). Distances are
    /// exact for points with both coordinates `<= bound - 2 pi`; the enumeration
    /// is padded by `2 pi` so callers can pass `bound = max rho`.
    pub fn enumerate(alphas: &[AlphaPair], bound: f64) -> Result<Self, RegionError> {
        let limit = bound + 2.0 * PI;
        let m = alphas.len();
        if m > 12 {
            return Err(RegionError::GammaTooLarge { bound, limit: MAX_VALUES });
        }
        let mut set = GammaSet::default();
        let mut produced = 0usize;
        for subset in 0u32..(1 << m) {
            let members = (0..m).filter(|&k| subset >> k & 1 == 1);
            let pair_sum: f64 = members.clone().map(|k| 2.0 + alphas[k][0] + alphas[k][1]).sum();
            let starts: [f64; 2] =
                std::array::from_fn(|i| members.clone().map(|k| FOUR_PI * (1.0 + alphas[k][1 - i])).sum());
            let rest: Vec<usize> = (0..m).filter(|&k| subset >> k & 1 == 0).collect();
            for extra in 0u32..(1 << rest.len()) {
                for i in 0..2 {
                    let single: f64 =
                        (0..rest.len()).filter(|&j| extra >> j & 1 == 1).map(|j| 1.0 + alphas[rest[j]][i]).sum();
                    let base = pair_sum + single;
                    let mut n = 0usize;
                    loop {
                        let value = FOUR_PI * (n as f64 + base);
                        if value > limit {
                            break;
                        }
                        if subset != 0 || extra != 0 || n != 0 {
                            produced += 1;
                            if produced > MAX_VALUES {
                                return Err(RegionError::GammaTooLarge { bound, limit: MAX_VALUES });
                            }
                            let ray = Ray { value, start: starts[i] };
                            if i == 0 {
                                set.vertical.push(ray);
                            } else {
                                set.horizontal.push(ray);
                            }
                        }
                        n += 1;
                    }
                }
            }
        }
        Ok(set)
    }

    pub fn distance(&self, rho: [f64; 2]) -> f64 {
        let v = self.vertical.iter().map(|r| r.distance(rho[0], rho[1]));
        let h = self.horizontal.iter().map(|r| r.distance(rho[1], rho[0]));
        v.chain(h).fold(f64::INFINITY, f64::min)
    }

    pub fn membership(&self, rho: [f64; 2]) -> GammaMembership {
        let distance = self.distance(rho);
        GammaMembership { in_gamma: distance <= BOUNDARY_BAND, distance }
    }
}

/// Membership of `rho` in the compactness-failure set and its Euclidean distance to it.
pub fn gamma_membership(rho: [f64; 2], alphas: &[AlphaPair], bound: f64) -> Result<GammaMembership, RegionError> {
    let bound = bound.max(rho[0]).max(rho[1]);
    Ok(GammaSet::enumerate(alphas, bound)?.membership(rho))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regular_grid_lines() {
        let m = gamma_membership([FOUR_PI, 7.0], &[], 20.0).unwrap();
        assert!(m.in_gamma && m.distance == 0.0);
        let m = gamma_membership([2.0 * PI, 2.0 * PI], &[], 10.0).unwrap();
        assert!((m.distance - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn small_rho_outside() {
        let alphas = [[-0.85, -0.3], [0.2, -0.89]];
        let m = gamma_membership([0.1, 0.1], &alphas, 1.0).unwrap();
        assert!(!m.in_gamma);
        // The nearest value is 4 pi (1 - 0.89) on the horizontal ray starting at 0.
        assert!((m.distance - (FOUR_PI * 0.11 - 0.1)).abs() < 1e-12);
    }

    #[test]
    fn half_line_start_matters() {
        // One point: M = {1} gives rho_1 = 4 pi (2 + a1 + a2) only for rho_2 >= 4 pi (1 + a2).
        let alphas = [[-0.5, -0.5]];
        let set = GammaSet::enumerate(&alphas, 12.0 * PI).unwrap();
        let ray = set.vertical.iter().find(|r| (r.value - FOUR_PI).abs() < 1e-12 && r.start > 0.0).unwrap();
        assert!((ray.start - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn guard() {
        let alphas = vec![[-0.99, -0.99]; 12];
        assert!(matches!(GammaSet::enumerate(&alphas, 400.0), Err(RegionError::GammaTooLarge { .. })));
    }
}
