//! Effective resistance through a dense Laplacian pseudoinverse.

use nalgebra::DMatrix;

use crate::graph::Vertex;

/// Pseudoinverse blocks per connected component, for repeated queries.
#[derive(Debug, Clone)]
pub struct ResistanceOracle {
    component: Vec<usize>,
    position: Vec<usize>,
    inverses: Vec<DMatrix<f64>>,
}

impl ResistanceOracle {
    pub fn new(n: usize, edges: &[(Vertex, Vertex, f64)]) -> Self {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(u, v, _) in edges {
            let (a, b) = (find(&mut parent, u), find(&mut parent, v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        let mut component = vec![usize::MAX; n];
        let mut position = vec![0; n];
        let mut sizes: Vec<usize> = Vec::new();
        let mut root_id = vec![usize::MAX; n];
        for u in 0..n {
            let r = find(&mut parent, u);
            if root_id[r] == usize::MAX {
                root_id[r] = sizes.len();
                sizes.push(0);
            }
            let c = root_id[r];
            component[u] = c;
            position[u] = sizes[c];
            sizes[c] += 1;
        }
        // Solve with L + J/k, which is invertible on a connected component and
        // agrees with the pseudoinverse on vectors orthogonal to the ones.
        let mut laplacians: Vec<DMatrix<f64>> = sizes
            .iter()
            .map(|&k| DMatrix::from_element(k, k, 1.0 / k as f64))
            .collect();
        for &(u, v, w) in edges {
            if u == v {
                continue;
            }
            let m = &mut laplacians[component[u]];
            let (i, j) = (position[u], position[v]);
            m[(i, i)] += w;
            m[(j, j)] += w;
            m[(i, j)] -= w;
            m[(j, i)] -= w;
        }
        let inverses = laplacians
            .into_iter()
            .map(|m| match m.clone().cholesky() {
                Some(ch) => ch.inverse(),
                None => m.try_inverse().expect("shifted Laplacian of a component is invertible"),
            })
            .collect();
        Self {
            component,
            position,
            inverses,
        }
    }

    /// `f64::INFINITY` for vertices in different components.
    pub fn resistance(&self, u: Vertex, v: Vertex) -> f64 {
        if u == v {
            return 0.0;
        }
        if self.component[u] != self.component[v] {
            return f64::INFINITY;
        }
        let m = &self.inverses[self.component[u]];
        let (i, j) = (self.position[u], self.position[v]);
        (m[(i, i)] + m[(j, j)] - m[(i, j)] - m[(j, i)]).max(0.0)
    }
}

pub fn effective_resistance(n: usize, edges: &[(Vertex, Vertex, f64)], u: Vertex, v: Vertex) -> f64 {
    ResistanceOracle::new(n, edges).resistance(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(edges: &[(usize, usize)]) -> Vec<(usize, usize, f64)> {
        edges.iter().map(|&(u, v)| (u, v, 1.0)).collect()
    }

    #[test]
    fn series_and_parallel() {
        let path = unit(&[(0, 1), (1, 2)]);
        assert!((effective_resistance(3, &path, 0, 2) - 2.0).abs() < 1e-9);
        let tri = unit(&[(0, 1), (1, 2), (0, 2)]);
        let o = ResistanceOracle::new(3, &tri);
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            assert!((o.resistance(u, v) - 2.0 / 3.0).abs() < 1e-9);
        }
        let heavy = vec![(0, 1, 4.0)];
        assert!((effective_resistance(2, &heavy, 0, 1) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn disconnected_is_infinite() {
        let e = unit(&[(0, 1), (2, 3)]);
        let o = ResistanceOracle::new(5, &e);
        assert_eq!(o.resistance(0, 2), f64::INFINITY);
        assert_eq!(o.resistance(4, 0), f64::INFINITY);
        assert!((o.resistance(2, 3) - 1.0).abs() < 1e-9);
        assert_eq!(o.resistance(4, 4), 0.0);
    }

    #[test]
    fn complete_graph() {
        let n = 10;
        let mut e = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                e.push((u, v, 1.0));
            }
        }
        let o = ResistanceOracle::new(n, &e);
        assert!((o.resistance(3, 7) - 2.0 / n as f64).abs() < 1e-9);
    }

    #[test]
    fn degree_lower_bound_on_random_graphs() {
        use rand::Rng;
        let mut rng = crate::rng::rng_from(12);
        for _ in 0..200 {
            let n = rng.gen_range(2..=12);
            let mut e = Vec::new();
            let mut deg = vec![0usize; n];
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(0.4) {
                        e.push((u, v, 1.0));
                        deg[u] += 1;
                        deg[v] += 1;
                    }
                }
            }
            let o = ResistanceOracle::new(n, &e);
            for u in 0..n {
                for v in u + 1..n {
                    let r = o.resistance(u, v);
                    if r.is_finite() {
                        let bound = 0.5 * (1.0 / deg[u] as f64 + 1.0 / deg[v] as f64);
                        assert!(r >= bound - 1e-9, "R={r} bound={bound}");
                    }
                }
            }
        }
    }
}
