//! Numerical Jordan structure.
//!
//! Eigenvalues are clustered, and for each cluster the kernel-dimension
//! staircase `d_k = dim ker (A − λI)^k` gives the block sizes: the number of
//! blocks of size at least `k` is `d_k − d_{k−1}`. Chains are then built inside
//! the generalized eigenspace, longest first.

use nalgebra::DMatrix;

use crate::dense;
use crate::error::{Error, Result};
use crate::matrix::{
    eigenvalues, eigenvector, normalize_phase, CVector, ComplexMatrix, Tolerances, C64,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JordanBlockSpec {
    pub lambda: C64,
    pub size: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cluster {
    pub representative: C64,
    pub multiplicity: usize,
    pub members: Vec<usize>,
}

/// Kernel dimensions recorded for one eigenvalue cluster, kept so callers
/// can audit structure decisions made near exceptional points.
#[derive(Clone, Debug, PartialEq)]
pub struct Staircase {
    pub lambda: C64,
    pub multiplicity: usize,
    pub dims: Vec<usize>,
    /// Block sizes, descending.
    pub partition: Vec<usize>,
}

/// `A = Q⁻¹ J Q` with `J` block diagonal in Jordan form.
#[derive(Clone, Debug)]
pub struct JordanStructure {
    pub blocks: Vec<JordanBlockSpec>,
    pub q: ComplexMatrix,
    pub q_inv: ComplexMatrix,
    pub j: ComplexMatrix,
    pub staircases: Vec<Staircase>,
    pub cond_q: f64,
    /// Set when `cond(Q)` exceeds `1/rank_cut`.
    pub ill_conditioned: bool,
}

impl JordanStructure {
    pub fn block_offsets(&self) -> Vec<usize> {
        let mut off = 0;
        self.blocks
            .iter()
            .map(|b| {
                let o = off;
                off += b.size;
                o
            })
            .collect()
    }

    pub fn reconstruction_residual(&self, a: &ComplexMatrix) -> f64 {
        let recon = &(&self.q_inv * &self.j) * &self.q;
        (a - &recon).frobenius_norm()
    }
}

pub fn cluster_radius(values: &[C64], tol: &Tolerances) -> f64 {
    let max = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    tol.eig_cluster * (1.0 + max)
}

/// Single-linkage clustering with radius `eig_cluster·(1 + max|λ|)`.
/// Clusters are returned sorted by representative (real part, then
/// imaginary part).
pub fn cluster_eigenvalues(values: &[C64], tol: &Tolerances) -> Vec<Cluster> {
    let n = values.len();
    let radius = cluster_radius(values, tol);
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..n {
        for j in i + 1..n {
            if (values[i] - values[j]).norm() <= radius {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }
    let mut clusters: Vec<Cluster> = groups
        .into_iter()
        .map(|members| {
            let sum: C64 = members.iter().map(|&k| values[k]).sum();
            Cluster {
                representative: sum / members.len() as f64,
                multiplicity: members.len(),
                members,
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        a.representative
            .re
            .total_cmp(&b.representative.re)
            .then(a.representative.im.total_cmp(&b.representative.im))
    });
    clusters
}

/// Kernel dimension of `m` with an absolute singular-value cutoff.
fn nullity_abs(m: &DMatrix<C64>, cutoff: f64) -> Result<usize> {
    Ok(dense::singular_values(m)?
        .iter()
        .filter(|&&s| s <= cutoff)
        .count())
}

/// The `k` right singular vectors of `m` with the smallest singular values.
pub(crate) fn smallest_right_vectors(m: &DMatrix<C64>, k: usize) -> Result<Vec<CVector>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let svd = dense::svd(m)?;
    let n = svd.s.len();
    Ok((0..n)
        .rev()
        .take(k)
        .map(|i| svd.v.column(i).into_owned())
        .collect())
}

/// Kernel staircase of `A − λI` for a cluster of algebraic multiplicity `m`.
pub fn staircase(a: &ComplexMatrix, lambda: C64, m: usize, tol: &Tolerances) -> Result<Staircase> {
    let n = a.n();
    let b = a.shifted(lambda).into_dmatrix();
    // Powers of B are judged against max(‖B‖_F, ‖A‖_F)^k.
    let a_norm = a.frobenius_norm();
    let b_norm = b
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(a_norm)
        .max(f64::MIN_POSITIVE);
    let mut dims = vec![0usize];
    let mut power = DMatrix::<C64>::identity(n, n);
    let mut scale = 1.0;
    let fail = |dims: &[usize]| Error::StaircaseInconsistent {
        lambda: format!("{lambda}"),
        dims: dims[1..].to_vec(),
    };
    for _ in 0..m.max(1) {
        power = &power * &b;
        scale *= b_norm;
        let d = nullity_abs(&power, tol.rank_cut * scale)?;
        let prev = *dims.last().expect("nonempty");
        dims.push(d);
        if d > m || d < prev {
            return Err(fail(&dims));
        }
        if d == m {
            break;
        }
        if d == prev {
            return Err(fail(&dims));
        }
    }
    if *dims.last().expect("nonempty") != m {
        return Err(fail(&dims));
    }
    // Increments must be non-increasing for a valid Segre characteristic.
    let incr: Vec<usize> = dims.windows(2).map(|w| w[1] - w[0]).collect();
    if incr.windows(2).any(|w| w[1] > w[0]) {
        return Err(fail(&dims));
    }
    let mut partition = Vec::new();
    for (k, w) in incr.iter().enumerate() {
        let next = incr.get(k + 1).copied().unwrap_or(0);
        for _ in 0..(w - next) {
            partition.push(k + 1);
        }
    }
    partition.sort_unstable_by(|a, b| b.cmp(a));
    Ok(Staircase {
        lambda,
        multiplicity: m,
        dims: dims[1..].to_vec(),
        partition,
    })
}

/// `want` orthonormal combinations of `candidates` with the largest
/// components orthogonal to `basis`.
fn orthonormal_complement_basis(
    basis: &[CVector],
    candidates: &[CVector],
    want: usize,
) -> Result<Vec<CVector>> {
    if want == 0 {
        return Ok(Vec::new());
    }
    let q = orthonormalize(basis);
    let projected: Vec<CVector> = candidates
        .iter()
        .map(|c| {
            let mut v = c.clone();
            for _ in 0..2 {
                for u in &q {
                    let coef = u.dotc(&v);
                    v -= u * coef;
                }
            }
            v
        })
        .collect();
    let svd = dense::svd(&DMatrix::from_columns(&projected))?;
    let heads: Vec<CVector> = (0..want.min(svd.s.len()))
        .map(|k| {
            let mut h = CVector::zeros(candidates[0].len());
            for (j, c) in candidates.iter().enumerate() {
                h += c * svd.v[(j, k)];
            }
            h
        })
        .collect();
    Ok(orthonormalize(&heads))
}

/// Modified Gram-Schmidt, two passes; dependent vectors are dropped.
fn orthonormalize(vs: &[CVector]) -> Vec<CVector> {
    let mut out: Vec<CVector> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let coef = u.dotc(&w);
                w -= u * coef;
            }
        }
        let norm = w.norm();
        if norm > 1e-12 * v.norm().max(f64::MIN_POSITIVE) {
            out.push(w / C64::new(norm, 0.0));
        }
    }
    out
}

/// Jordan chains `[v_1, …, v_k]` for one cluster, with `(A − λI) v_1 ≈ 0` and
/// `(A − λI) v_j = v_{j−1}`. Chains are longest first.
fn cluster_chains(a: &ComplexMatrix, st: &Staircase) -> Result<Vec<Vec<CVector>>> {
    let n = a.n();
    let m = st.multiplicity;
    let lambda = st.lambda;
    if m == 1 {
        return Ok(vec![vec![eigenvector(a, lambda)?]]);
    }
    let b = a.shifted(lambda).into_dmatrix();
    let depth = st.dims.len();
    let b_pow = (0..depth).fold(DMatrix::<C64>::identity(n, n), |acc, _| &acc * &b);
    // Orthonormal basis W of the generalized eigenspace; work with the
    // compressed nilpotent N = W* B W.
    let w_basis = smallest_right_vectors(&b_pow, m)?;
    let w = DMatrix::from_columns(&w_basis);
    let nil = w.adjoint() * &b * &w;

    // ker N^k in compressed coordinates, dimension fixed by the staircase.
    let mut kernels: Vec<Vec<CVector>> = vec![Vec::new()];
    let mut nk = DMatrix::<C64>::identity(m, m);
    for k in 1..=depth {
        nk = &nk * &nil;
        kernels.push(smallest_right_vectors(&nk, st.dims[k - 1])?);
    }

    let mut chains: Vec<Vec<CVector>> = Vec::new();
    let count_at_least = |k: usize| -> usize {
        if k == 0 || k > depth {
            return 0;
        }
        st.dims[k - 1] - if k >= 2 { st.dims[k - 2] } else { 0 }
    };
    for k in (1..=depth).rev() {
        let new = count_at_least(k) - count_at_least(k + 1);
        if new == 0 {
            continue;
        }
        // Exclude ker N^{k-1} and the level-k vectors of existing chains.
        let mut exclude: Vec<CVector> = kernels[k - 1].clone();
        for chain in &chains {
            // chain heads have level chain.len(); the level-k vector is
            // N^{len-k} head
            let len = chain.len();
            let mut v = chain[len - 1].clone();
            for _ in 0..(len - k) {
                v = &nil * v;
            }
            exclude.push(v);
        }
        let heads = orthonormal_complement_basis(&exclude, &kernels[k], new)?;
        for head in heads {
            let head = normalize_phase(head);
            let mut chain = vec![head.clone(); k];
            let mut v = head;
            for slot in (0..k).rev() {
                chain[slot] = v.clone();
                v = &nil * v;
            }
            chains.push(chain);
        }
    }
    // Lift back to the full space. Using B on the lifted head keeps the chain
    // relations exact except at the bottom.
    Ok(chains
        .into_iter()
        .map(|chain| {
            let k = chain.len();
            let head = &w * &chain[k - 1];
            let mut out = vec![head.clone(); k];
            let mut v = head;
            for slot in (0..k).rev() {
                out[slot] = v.clone();
                v = &b * v;
            }
            out
        })
        .collect())
}

/// Numerical Jordan decomposition `A = Q⁻¹JQ`.
pub fn jordan_decompose(a: &ComplexMatrix, tol: &Tolerances) -> Result<JordanStructure> {
    tol.validate()?;
    let values = eigenvalues(a)?;
    let clusters = cluster_eigenvalues(&values, tol);
    let mut staircases = Vec::with_capacity(clusters.len());
    let mut pieces: Vec<(JordanBlockSpec, Vec<CVector>)> = Vec::new();
    for cl in &clusters {
        let st = staircase(a, cl.representative, cl.multiplicity, tol)?;
        for chain in cluster_chains(a, &st)? {
            pieces.push((
                JordanBlockSpec {
                    lambda: cl.representative,
                    size: chain.len(),
                },
                chain,
            ));
        }
        staircases.push(st);
    }
    // Deterministic order: (Re λ, Im λ, size) descending.
    pieces.sort_by(|(x, _), (y, _)| {
        y.lambda
            .re
            .total_cmp(&x.lambda.re)
            .then(y.lambda.im.total_cmp(&x.lambda.im))
            .then(y.size.cmp(&x.size))
    });
    let n = a.n();
    let mut cols = Vec::with_capacity(n);
    let mut j = ComplexMatrix::zeros(n);
    let mut off = 0;
    for (spec, chain) in &pieces {
        for (r, v) in chain.iter().enumerate() {
            cols.push(v.clone());
            j.set(off + r, off + r, spec.lambda);
            if r + 1 < spec.size {
                j.set(off + r, off + r + 1, C64::new(1.0, 0.0));
            }
        }
        off += spec.size;
    }
    let q_inv = ComplexMatrix::from_columns(&cols)?;
    let q = q_inv
        .inverse()
        .map_err(|_| Error::NumericalFailure("Jordan chain matrix is singular".into()))?;
    let cond_q = q_inv.condition_number();
    Ok(JordanStructure {
        blocks: pieces.into_iter().map(|(s, _)| s).collect(),
        q,
        q_inv,
        j,
        staircases,
        cond_q,
        ill_conditioned: !(cond_q <= 1.0 / tol.rank_cut),
    })
}

pub fn is_diagonalizable(a: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    let values = eigenvalues(a)?;
    for cl in cluster_eigenvalues(&values, tol) {
        let st = staircase(a, cl.representative, cl.multiplicity, tol)?;
        if st.partition.iter().any(|&s| s > 1) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Eigenvalue clusters with their Segre characteristics.
pub fn segre_characteristic(a: &ComplexMatrix, tol: &Tolerances) -> Result<Vec<Staircase>> {
    let values = eigenvalues(a)?;
    cluster_eigenvalues(&values, tol)
        .into_iter()
        .map(|cl| staircase(a, cl.representative, cl.multiplicity, tol))
        .collect()
}

/// Matches each item to a distinct item whose value is within `radius` of
/// `−conj(λ)` and whose partition agrees. Returns the mirror index of each
/// item, or `None` when no perfect matching is found.
pub(crate) fn mirror_matching(items: &[(C64, Vec<usize>)], radius: f64) -> Option<Vec<usize>> {
    let n = items.len();
    let mut mate: Vec<Option<usize>> = vec![None; n];
    // Self-mirrored (on-axis) items first, then nearest available partner.
    for i in 0..n {
        let (l, ref p) = items[i];
        if (l + l.conj()).norm() <= radius {
            let _ = p;
            mate[i] = Some(i);
        }
    }
    for i in 0..n {
        if mate[i].is_some() {
            continue;
        }
        let target = -items[i].0.conj();
        let best = (0..n)
            .filter(|&k| k != i && mate[k].is_none() && items[k].1 == items[i].1)
            .map(|k| (k, (items[k].0 - target).norm()))
            .filter(|&(_, d)| d <= radius)
            .min_by(|x, y| x.1.total_cmp(&y.1));
        let (k, _) = best?;
        mate[i] = Some(k);
        mate[k] = Some(i);
    }
    mate.into_iter().collect()
}

/// True iff `A` is similar to `−Ā`: clusters pair up under `λ ↦ −λ̄` with
/// matching Segre characteristics.
pub fn similar_to_neg_conj(a: &ComplexMatrix, tol: &Tolerances) -> Result<bool> {
    let values = eigenvalues(a)?;
    let radius = cluster_radius(&values, tol);
    let items: Vec<(C64, Vec<usize>)> = segre_characteristic(a, tol)?
        .into_iter()
        .map(|st| (st.lambda, st.partition))
        .collect();
    Ok(mirror_matching(&items, radius).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{file::env_from_pairs, presets};
    use crate::symmetry::h_to_a;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn ex1_h(a: f64, b: f64, cc: f64) -> ComplexMatrix {
        presets::example1()
            .instantiate(&env_from_pairs(&[("a", a), ("b", b), ("c", cc)]))
            .unwrap()
            .h
    }

    #[test]
    fn clustering_examples() {
        let cl = cluster_eigenvalues(&[c(1., 0.), c(1. + 1e-12, 0.), c(5., 0.)], &tol());
        let mult: Vec<usize> = cl.iter().map(|c| c.multiplicity).collect();
        assert_eq!(mult, vec![2, 1]);
        let cl = cluster_eigenvalues(&[c(0., 1.), c(0., -1.)], &tol());
        assert_eq!(cl.len(), 2);

        let h = ex1_h(1.0, 1.0, -1.0);
        let values = eigenvalues(&h).unwrap();
        let cl = cluster_eigenvalues(&values, &tol());
        assert_eq!(cl.len(), 3);
        let four = cl
            .iter()
            .find(|c| (c.representative - C64::new(4.0, 0.0)).norm() < 1e-6)
            .unwrap();
        assert_eq!(four.multiplicity, 2);
        assert!(cl
            .iter()
            .any(|c| (c.representative + C64::new(2.0, 0.0)).norm() < 1e-9));
        assert!(cl
            .iter()
            .any(|c| (c.representative + C64::new(4.0, 0.0)).norm() < 1e-9));
    }

    #[test]
    fn diagonal_decomposition() {
        let a = ComplexMatrix::from_diagonal(&[c(3., 0.), c(5., 0.)]);
        let js = jordan_decompose(&a, &tol()).unwrap();
        assert_eq!(js.blocks.len(), 2);
        assert!(js.blocks.iter().all(|b| b.size == 1));
        // ordering puts 5 first; Q is the swap
        let swap = ComplexMatrix::from_real_rows(&[&[0., 1.], &[1., 0.]]).unwrap();
        assert!((&js.q - &swap).frobenius_norm() < 1e-14);
    }

    #[test]
    fn nilpotent_block() {
        let a = ComplexMatrix::from_real_rows(&[&[0., 1.], &[0., 0.]]).unwrap();
        let js = jordan_decompose(&a, &tol()).unwrap();
        assert_eq!(
            js.blocks,
            vec![JordanBlockSpec {
                lambda: c(0., 0.),
                size: 2
            }]
        );
        assert!(js.reconstruction_residual(&a) < 1e-14);
    }

    #[test]
    fn example1_defective_ep() {
        let a = h_to_a(&ex1_h(1.0, 1.0, -1.0));
        let js = jordan_decompose(&a, &tol()).unwrap();
        let mut sizes: Vec<usize> = js.blocks.iter().map(|b| b.size).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2]);
        let big = js.blocks.iter().find(|b| b.size == 2).unwrap();
        assert!((big.lambda - c(0., -4.)).norm() < 1e-6);
        assert!(js.reconstruction_residual(&a) <= tol().residual * a.frobenius_norm());
        assert!(!is_diagonalizable(&ex1_h(1.0, 1.0, -1.0), &tol()).unwrap());
    }

    #[test]
    fn example1_diagonalizable_ep() {
        assert!(is_diagonalizable(&ex1_h(0.0, 0.0, -1.0), &tol()).unwrap());
        assert!(is_diagonalizable(&ComplexMatrix::identity(3), &tol()).unwrap());
    }

    #[test]
    fn neg_conj_similarity() {
        let f2 = presets::example2();
        let a = f2.instantiate(&Default::default()).unwrap().a;
        assert!(similar_to_neg_conj(&a, &tol()).unwrap());
        let d = ComplexMatrix::from_diagonal(&[c(1., 0.), c(2., 0.)]);
        assert!(!similar_to_neg_conj(&d, &tol()).unwrap());
        let d = ComplexMatrix::from_diagonal(&[c(1., 1.), c(-1., 1.)]);
        assert!(similar_to_neg_conj(&d, &tol()).unwrap());
    }

    #[test]
    fn mismatched_segre_is_not_similar() {
        // J(i) of size 2 at i and a simple eigenvalue at i: mirror of itself,
        // but λ = 1+i (size 2) against -1+i (two size-1 blocks) must fail.
        let mut a = ComplexMatrix::from_diagonal(&[c(1., 1.), c(1., 1.), c(-1., 1.), c(-1., 1.)]);
        a.set(0, 1, c(1., 0.));
        assert!(!similar_to_neg_conj(&a, &tol()).unwrap());
        a.set(2, 3, c(1., 0.));
        assert!(similar_to_neg_conj(&a, &tol()).unwrap());
    }

    #[test]
    fn staircase_reports_dims() {
        // J(0) of size 3 plus J(0) of size 1
        let mut a = ComplexMatrix::zeros(4);
        a.set(0, 1, c(1., 0.));
        a.set(1, 2, c(1., 0.));
        let st = staircase(&a, c(0., 0.), 4, &tol()).unwrap();
        assert_eq!(st.dims, vec![2, 3, 4]);
        assert_eq!(st.partition, vec![3, 1]);
        let js = jordan_decompose(&a, &tol()).unwrap();
        assert_eq!(
            js.blocks.iter().map(|b| b.size).collect::<Vec<_>>(),
            vec![3, 1]
        );
        assert!(js.reconstruction_residual(&a) < 1e-12);
    }
}
