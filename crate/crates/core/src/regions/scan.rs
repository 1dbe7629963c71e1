use std::collections::VecDeque;
use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    coercive_bound, count_m, disk_form, disk_nonexistence, existence_verdict, rho_bar, sphere_forms,
    sphere_nonexistence, Configuration, ExistenceVerdict, GammaSet, RegionError, SphereNonexistence, BOUNDARY_BAND,
};
use crate::mesh::SurfaceKind;
use crate::svg::{contour, Frame, Svg};

/// Cell-centred grid: cell `(i, j)` sits at `lo + (k + 1/2) (hi - lo) / steps`,
/// so no center lands on a grid-aligned threshold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanGrid {
    pub rho1: [f64; 2],
    pub rho2: [f64; 2],
    pub steps: [usize; 2],
}

impl ScanGrid {
    pub fn square(lo: f64, hi: f64, steps: usize) -> Self {
        Self { rho1: [lo, hi], rho2: [lo, hi], steps: [steps, steps] }
    }

    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        let c = |r: [f64; 2], k: usize, n: usize| r[0] + (k as f64 + 0.5) * (r[1] - r[0]) / n as f64;
        [c(self.rho1, i, self.steps[0]), c(self.rho2, j, self.steps[1])]
    }

    fn validate(&self) -> Result<(), RegionError> {
        for r in [self.rho1, self.rho2] {
            if !(r[0].is_finite() && r[1].is_finite() && 0.0 <= r[0] && r[0] < r[1]) {
                return Err(RegionError::BadRange { lo: r[0], hi: r[1] });
            }
        }
        let cells = self.steps[0] * self.steps[1];
        if cells < 4 {
            return Err(RegionError::GridTooCoarse(cells));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum RegionLabel {
    CoerciveMinimizer,
    JoinExistence,
    DiskNonexistence,
    SphereNonexistence,
    GammaBoundary,
    Unknown,
}

impl RegionLabel {
    pub fn name(self) -> &'static str {
        match self {
            RegionLabel::CoerciveMinimizer => "CoerciveMinimizer",
            RegionLabel::JoinExistence => "JoinExistence",
            RegionLabel::DiskNonexistence => "DiskNonexistence",
            RegionLabel::SphereNonexistence => "SphereNonexistence",
            RegionLabel::GammaBoundary => "GammaBoundary",
            RegionLabel::Unknown => "Unknown",
        }
    }

    pub fn is_nonexistence(self) -> bool {
        matches!(self, RegionLabel::DiskNonexistence | RegionLabel::SphereNonexistence)
    }

    pub fn is_existence(self) -> bool {
        matches!(self, RegionLabel::CoerciveMinimizer | RegionLabel::JoinExistence)
    }

    fn color(self) -> &'static str {
        match self {
            RegionLabel::CoerciveMinimizer => "#f39c12",
            RegionLabel::JoinExistence => "#27ae60",
            RegionLabel::DiskNonexistence | RegionLabel::SphereNonexistence => "#2e6fd8",
            RegionLabel::GammaBoundary => "#b0b0b0",
            RegionLabel::Unknown => "#ffffff",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionCell {
    pub rho: [f64; 2],
    pub label: RegionLabel,
    pub m: [usize; 3],
    pub gamma_distance: f64,
    /// An existence and a non-existence verdict both apply (should never happen).
    pub conflict: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegionMap {
    pub grid: ScanGrid,
    pub config: Configuration,
    /// Row-major with `rho1` varying fastest.
    pub cells: Vec<RegionCell>,
    pub nonexistence_components: usize,
    pub conflicts: usize,
}

impl RegionMap {
    pub fn cell(&self, i: usize, j: usize) -> &RegionCell {
        &self.cells[j * self.grid.steps[0] + i]
    }

    /// Cell whose centre is closest to `rho`.
    pub fn locate(&self, rho: [f64; 2]) -> &RegionCell {
        let g = &self.grid;
        let idx = |r: [f64; 2], x: f64, n: usize| {
            (((x - r[0]) / (r[1] - r[0]) * n as f64).floor().max(0.0) as usize).min(n - 1)
        };
        self.cell(idx(g.rho1, rho[0], g.steps[0]), idx(g.rho2, rho[1], g.steps[1]))
    }

    pub fn count(&self, label: RegionLabel) -> usize {
        self.cells.iter().filter(|c| c.label == label).count()
    }
}

fn label_cell(config: &Configuration, gamma: &GammaSet, rho: [f64; 2]) -> RegionCell {
    let counts = count_m(rho, &config.alphas);
    let gamma_distance = gamma.distance(rho);
    let near_gamma = gamma_distance <= BOUNDARY_BAND;
    let coercive = (0..2).all(|i| rho[i] < coercive_bound(&config.alphas, i));
    let bar = rho_bar(&config.alphas);
    let existence = config.kind == SurfaceKind::ClosedSphere
        && !counts.on_threshold
        && !near_gamma
        && rho[0] < bar[0]
        && rho[1] < bar[1]
        && existence_verdict(counts.m) == Ok(ExistenceVerdict::ExistenceGuaranteed);
    let nonexistence = match (config.kind, config.alphas.as_slice()) {
        _ if !config.constant_background => None,
        (SurfaceKind::UnitDisk, []) => disk_nonexistence(rho, [0.0, 0.0]).then_some(RegionLabel::DiskNonexistence),
        (SurfaceKind::UnitDisk, [a]) => disk_nonexistence(rho, *a).then_some(RegionLabel::DiskNonexistence),
        (SurfaceKind::ClosedSphere, [p1, p2]) if config.antipodal => (sphere_nonexistence(rho, *p1, *p2).verdict
            == SphereNonexistence::NonExistence)
            .then_some(RegionLabel::SphereNonexistence),
        _ => None,
    };
    let label = if near_gamma {
        RegionLabel::GammaBoundary
    } else if coercive {
        RegionLabel::CoerciveMinimizer
    } else if existence {
        RegionLabel::JoinExistence
    } else if let Some(l) = nonexistence {
        l
    } else {
        RegionLabel::Unknown
    };
    RegionCell { rho, label, m: counts.m, gamma_distance, conflict: (coercive || existence) && nonexistence.is_some() }
}

/// Labels every cell with the strongest applicable verdict, in the order
/// GammaBoundary, CoerciveMinimizer, JoinExistence, non-existence, Unknown.
/// Runs on the current rayon pool; the result does not depend on the thread count.
pub fn scan_regions(config: &Configuration, grid: ScanGrid) -> Result<RegionMap, RegionError> {
    grid.validate()?;
    let bound = grid.rho1[1].max(grid.rho2[1]);
    let gamma = GammaSet::enumerate(&config.alphas, bound)?;
    let [n1, n2] = grid.steps;
    let cells: Vec<RegionCell> =
        (0..n1 * n2).into_par_iter().map(|k| label_cell(config, &gamma, grid.center(k % n1, k / n1))).collect();
    let conflicts = cells.iter().filter(|c| c.conflict).count();
    let nonexistence_components = count_components(&cells, n1, n2, |c| c.label.is_nonexistence());
    Ok(RegionMap { grid, config: config.clone(), cells, nonexistence_components, conflicts })
}

fn count_components(cells: &[RegionCell], n1: usize, n2: usize, member: impl Fn(&RegionCell) -> bool) -> usize {
    let mut seen = vec![false; cells.len()];
    let mut components = 0;
    for start in 0..cells.len() {
        if seen[start] || !member(&cells[start]) {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(k) = queue.pop_front() {
            let (i, j) = (k % n1, k / n1);
            let neighbours = [
                (i > 0).then(|| k - 1),
                (i + 1 < n1).then(|| k + 1),
                (j > 0).then(|| k - n1),
                (j + 1 < n2).then(|| k + n1),
            ];
            for nb in neighbours.into_iter().flatten() {
                if !seen[nb] && member(&cells[nb]) {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
    }
    components
}

/// Region CSV: `rho1,rho2,label,M1,M2,M3,gamma_distance`.
pub fn write_region_csv(map: &RegionMap, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "rho1,rho2,label,M1,M2,M3,gamma_distance")?;
    for c in &map.cells {
        writeln!(
            out,
            "{:.16e},{:.16e},{},{},{},{},{:.16e}",
            c.rho[0],
            c.rho[1],
            c.label.name(),
            c.m[0],
            c.m[1],
            c.m[2],
            c.gamma_distance
        )?;
    }
    Ok(())
}

/// Colored raster with the non-existence boundary curves and the threshold lines overdrawn.
pub fn write_region_svg(map: &RegionMap) -> String {
    let g = &map.grid;
    let frame = Frame::new(g.rho1, g.rho2);
    let mut svg = Svg::new(frame);
    let (w1, w2) = ((g.rho1[1] - g.rho1[0]) / g.steps[0] as f64, (g.rho2[1] - g.rho2[0]) / g.steps[1] as f64);
    for c in &map.cells {
        if c.label != RegionLabel::Unknown {
            svg.rect(
                c.rho[0] - w1 / 2.0,
                c.rho[1] - w2 / 2.0,
                c.rho[0] + w1 / 2.0,
                c.rho[1] + w2 / 2.0,
                c.label.color(),
            );
        }
    }
    let cfg = &map.config;
    let mut curves: Vec<Box<dyn Fn(f64, f64) -> f64>> = Vec::new();
    match (cfg.kind, cfg.alphas.as_slice()) {
        (SurfaceKind::UnitDisk, []) => curves.push(Box::new(|a, b| disk_form([a, b], [0.0, 0.0]))),
        (SurfaceKind::UnitDisk, [al]) => {
            let al = *al;
            curves.push(Box::new(move |a, b| disk_form([a, b], al)));
        }
        (SurfaceKind::ClosedSphere, [p1, p2]) if cfg.antipodal => {
            for k in 0..4 {
                let (p1, p2) = (*p1, *p2);
                curves.push(Box::new(move |a, b| sphere_forms([a, b], p1, p2)[k]));
            }
        }
        _ => {}
    }
    for f in &curves {
        for seg in contour(&frame, 240, f) {
            svg.polyline(&seg, "black", 1.2, false);
        }
    }
    for a in &cfg.alphas {
        let t1 = 4.0 * PI * (1.0 + a[0]);
        let t2 = 4.0 * PI * (1.0 + a[1]);
        if g.rho1[0] < t1 && t1 < g.rho1[1] {
            svg.polyline(&[(t1, g.rho2[0]), (t1, g.rho2[1])], "#555555", 0.8, true);
        }
        if g.rho2[0] < t2 && t2 < g.rho2[1] {
            svg.polyline(&[(g.rho1[0], t2), (g.rho1[1], t2)], "#555555", 0.8, true);
        }
    }
    svg.axes("rho1", "rho2", 6);
    let f = *svg.frame();
    svg.text(
        f.margin + f.width / 2.0,
        f.margin - 20.0,
        13.0,
        "middle",
        &format!("non-existence components: {}", map.nonexistence_components),
    );
    svg.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_scan_matches_conic() {
        let cfg = Configuration::disk([0.0, 0.0]);
        let map = scan_regions(&cfg, ScanGrid::square(0.0, 12.0 * PI, 48)).unwrap();
        assert_eq!(map.conflicts, 0);
        for c in &map.cells {
            if c.label != RegionLabel::GammaBoundary && c.label != RegionLabel::CoerciveMinimizer {
                assert_eq!(c.label.is_nonexistence(), disk_form(c.rho, [0.0, 0.0]) >= 0.0);
            }
        }
        assert!(map.locate([8.0 * PI, 8.0 * PI]).label.is_nonexistence());
        assert!(!map.locate([2.0 * PI, 2.0 * PI]).label.is_nonexistence());
    }

    #[test]
    fn coercive_box() {
        let cfg = Configuration::antipodal_sphere([-0.5, -0.5], [0.0, 0.0]);
        let map = scan_regions(&cfg, ScanGrid::square(0.0, 12.0 * PI, 36)).unwrap();
        for c in &map.cells {
            if c.rho[0] < 2.0 * PI && c.rho[1] < 2.0 * PI {
                assert_eq!(c.label, RegionLabel::CoerciveMinimizer);
            }
        }
        assert!(map.count(RegionLabel::SphereNonexistence) >= 1);
    }

    #[test]
    fn coarse_grid_rejected() {
        let cfg = Configuration::disk([0.0, 0.0]);
        let grid = ScanGrid { rho1: [0.0, 1.0], rho2: [0.0, 1.0], steps: [1, 3] };
        assert_eq!(scan_regions(&cfg, grid).unwrap_err(), RegionError::GridTooCoarse(3));
    }
}
