use std::collections::VecDeque;

use super::csr::CsrMatrix;
use crate::scalar::Scalar;

/// Reverse Cuthill–McKee ordering.
///
/// Each connected component starts from its minimum-degree vertex (lowest
/// index on ties); neighbours are queued by ascending degree, then index.
/// Every component's Cuthill–McKee sequence is reversed on its own, so
/// isolated vertices keep their natural order. Returns `perm` with
/// `perm[new] = old`.
pub fn rcm_ordering<T: Scalar>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.n();
    let degree = a.degrees();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    let mut visited = vec![false; n];
    let mut perm = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut nbrs: Vec<usize> = Vec::new();

    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        let comp_start = perm.len();
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            perm.push(v);
            nbrs.clear();
            nbrs.extend(a.row(v).0.iter().copied().filter(|&w| w != v && !visited[w]));
            nbrs.sort_by_key(|&w| (degree[w], w));
            for &w in &nbrs {
                visited[w] = true;
                queue.push_back(w);
            }
        }
        perm[comp_start..].reverse();
    }
    perm
}

/// Largest `|i − j|` over stored entries.
pub fn bandwidth<T: Scalar>(a: &CsrMatrix<T>) -> usize {
    (0..a.n())
        .flat_map(|i| a.row(i).0.iter().map(move |&j| i.abs_diff(j)))
        .max()
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::chol::SymbolicChol;

    fn laplace2d(nx: usize, ny: usize) -> CsrMatrix<f64> {
        let idx = |i: usize, j: usize| i + nx * j;
        let mut t = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                let p = idx(i, j);
                t.push((p, p, 4.0));
                if i + 1 < nx {
                    t.push((p, idx(i + 1, j), -1.0));
                    t.push((idx(i + 1, j), p, -1.0));
                }
                if j + 1 < ny {
                    t.push((p, idx(i, j + 1), -1.0));
                    t.push((idx(i, j + 1), p, -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(nx * ny, &t).unwrap()
    }

    fn is_permutation(p: &[usize]) -> bool {
        let mut seen = vec![false; p.len()];
        p.iter().all(|&v| v < p.len() && !std::mem::replace(&mut seen[v], true))
    }

    #[test]
    fn diagonal_gives_identity() {
        let a = CsrMatrix::<f64>::identity(6);
        assert_eq!(rcm_ordering(&a), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn path_graph_has_unit_bandwidth() {
        let mut t = Vec::new();
        for i in 0..4 {
            t.push((i, i, 2.0));
            if i + 1 < 4 {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(4, &t).unwrap();
        let p = rcm_ordering(&a);
        assert!(is_permutation(&p));
        assert_eq!(bandwidth(&a.permute(&p).unwrap()), 1);
    }

    #[test]
    fn rcm_does_not_increase_fill_on_laplace() {
        let a = laplace2d(5, 5);
        let p = rcm_ordering(&a);
        assert!(is_permutation(&p));
        let natural = SymbolicChol::analyze(&a).nnz();
        let rcm = SymbolicChol::analyze(&a.permute(&p).unwrap()).nnz();
        assert!(rcm <= natural, "rcm {rcm} > natural {natural}");
    }

    #[test]
    fn disconnected_components_are_all_ordered() {
        let t = vec![(0, 0, 1.0), (1, 1, 2.0), (1, 3, 1.0), (3, 1, 1.0), (2, 2, 1.0), (3, 3, 2.0)];
        let a = CsrMatrix::from_triplets(4, &t).unwrap();
        let p = rcm_ordering(&a);
        assert!(is_permutation(&p));
        assert_eq!(rcm_ordering(&a), p);
    }
}
