use serde::Serialize;

use super::{count_m, AlphaPair, RegionError};

/// Combinatorial model of the punctured join: the complete bipartite graph on
/// the two barycenter point sets with the punctured diagonal edges removed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JoinGraph {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// Singular ids `m` whose edge `(p_m, p_m)` is removed.
    pub punctured: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct JoinBetti {
    pub reduced_b0: usize,
    pub b1: usize,
    /// `b1 - b0~ = (M1 - 1)(M2 - 1) - M3`.
    pub formula_holds: bool,
}

impl JoinGraph {
    /// Graph with abstract point labels: the first `M3` points are on both sides.
    pub fn from_counts(m: [usize; 3]) -> Result<Self, RegionError> {
        let [m1, m2, m3] = m;
        if m3 > m1.min(m2) {
            return Err(RegionError::InvalidCounts(m1, m2, m3));
        }
        if m1 == 0 || m2 == 0 {
            return Err(RegionError::EmptyJoinSide(m1, m2));
        }
        // Ids below M3 are shared; the rest get disjoint labels.
        let left = (0..m1).collect();
        let right = (0..m3).chain((m1..).take(m2 - m3)).collect();
        Ok(Self { left, right, punctured: (0..m3).collect() })
    }

    /// Graph of an actual configuration, with singular ids as labels.
    pub fn from_configuration(rho: [f64; 2], alphas: &[AlphaPair]) -> Self {
        use std::f64::consts::PI;
        let four_pi = 4.0 * PI;
        let side = |i: usize| -> Vec<usize> {
            (0..alphas.len()).filter(|&m| four_pi * (1.0 + alphas[m][i]) < rho[i]).collect()
        };
        let punctured = (0..alphas.len()).filter(|&m| count_m(rho, &alphas[m..=m]).m[2] == 1).collect();
        Self { left: side(0), right: side(1), punctured }
    }

    pub fn num_vertices(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left.iter().flat_map(move |&a| {
            self.right.iter().filter(move |&&b| !(a == b && self.punctured.contains(&a))).map(move |&b| (a, b))
        })
    }

    /// `(b0~, b1)` from union-find over the bipartite vertex set.
    pub fn betti(&self) -> (usize, usize) {
        let n = self.num_vertices();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let offset = self.left.len();
        let index_left = |a: usize| self.left.iter().position(|&x| x == a).expect("left id");
        let index_right = |b: usize| offset + self.right.iter().position(|&x| x == b).expect("right id");
        let mut edges = 0usize;
        let mut components = n;
        for (a, b) in self.edges() {
            edges += 1;
            let (ra, rb) = (find(&mut parent, index_left(a)), find(&mut parent, index_right(b)));
            if ra != rb {
                parent[ra] = rb;
                components -= 1;
            }
        }
        (components.saturating_sub(1), edges + components - n)
    }
}

/// Homology of the punctured join together with the Mayer-Vietoris cross-check.
pub fn join_betti(m: [usize; 3]) -> Result<JoinBetti, RegionError> {
    let graph = JoinGraph::from_counts(m)?;
    let (reduced_b0, b1) = graph.betti();
    let [m1, m2, m3] = m.map(|x| x as i64);
    let formula_holds = b1 as i64 - reduced_b0 as i64 == (m1 - 1) * (m2 - 1) - m3;
    Ok(JoinBetti { reduced_b0, b1, formula_holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(join_betti([2, 2, 1]).unwrap(), JoinBetti { reduced_b0: 0, b1: 0, formula_holds: true });
        assert_eq!(join_betti([2, 4, 2]).unwrap(), JoinBetti { reduced_b0: 0, b1: 1, formula_holds: true });
        assert_eq!(join_betti([1, 1, 1]).unwrap(), JoinBetti { reduced_b0: 1, b1: 0, formula_holds: true });
        assert!(join_betti([0, 2, 0]).is_err());
    }

    #[test]
    fn graph_sizes() {
        let g = JoinGraph::from_counts([2, 4, 2]).unwrap();
        assert_eq!(g.num_vertices(), 6);
        assert_eq!(g.edges().count(), 6);
    }

    #[test]
    fn configuration_graph() {
        use std::f64::consts::PI;
        let g = JoinGraph::from_configuration([3.0 * PI, 3.0 * PI], &[[-0.5, -0.5], [-0.5, -0.5]]);
        assert_eq!(g.left, vec![0, 1]);
        assert_eq!(g.punctured, vec![0, 1]);
        // Two disjoint edges remain.
        assert_eq!(g.betti(), (1, 0));
    }
}
