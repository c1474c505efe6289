//! Reproducing-kernel machinery shared by the physics modules: Gram matrix
//! sections, positive-definiteness verification, overlap quotients under a
//! regularized constraint, and the recentering eigenproblem.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, sym_eigen};
use crate::C64;

/// Finite Gram section of a reproducing kernel over an ordered label set.
#[derive(Debug, Clone)]
pub struct GramMatrix<L> {
    pub labels: Vec<L>,
    pub entries: DMatrix<C64>,
}

/// Result of a positive-semidefiniteness check.
#[derive(Debug, Clone, Copy)]
pub struct PsdReport {
    /// Smallest eigenvalue of the Hermitian matrix.
    pub min_eig: f64,
    /// Spectral norm (largest |eigenvalue|).
    pub norm: f64,
    /// `min_eig >= -tol * max(1, norm)`.
    pub pass: bool,
}

/// Overlap quotients `<psi| e^{-H^2/lambda} |psi> / <psi|psi>` for trial
/// coefficient vectors over a fixed family of vectors.
#[derive(Debug, Clone)]
pub struct QuotientSet {
    pub coefficients: Vec<Vec<C64>>,
    pub numerators: Vec<f64>,
    pub denominators: Vec<f64>,
    pub values: Vec<f64>,
}

/// Unit vector maximizing the damped overlap quotient over the truncated
/// space, with the quotient it achieves.
#[derive(Debug, Clone)]
pub struct RecenteredFiducial {
    pub vector: DVector<f64>,
    pub quotient_achieved: f64,
    pub iterations: usize,
    /// Energy of the selected eigenvector (eigenvalue of `H`).
    pub energy: f64,
    /// Set when the maximizer is degenerate beyond the tie-break rule; holds
    /// the dimension of the degenerate cluster.
    pub degeneracy: Option<usize>,
}

/// Materialize the Gram section `K_jk = kernel(label_j, label_k)`.
///
/// The diagonal is computed from the kernel, not assumed; off-diagonal
/// entries are evaluated for `j <= k` and mirrored by conjugation so the
/// result is Hermitian as stored.
pub fn gram_matrix<L>(kernel: impl Fn(&L, &L) -> C64, labels: Vec<L>) -> Result<GramMatrix<L>> {
    if labels.is_empty() {
        return Err(Error::invalid("gram_matrix requires at least one label"));
    }
    let n = labels.len();
    let mut entries = DMatrix::<C64>::zeros(n, n);
    for j in 0..n {
        for k in j..n {
            let v = kernel(&labels[j], &labels[k]);
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::NonFiniteKernel { row: j, col: k });
            }
            entries[(j, k)] = v;
            entries[(k, j)] = v.conj();
        }
    }
    Ok(GramMatrix { labels, entries })
}

/// Check positive semidefiniteness of a Hermitian matrix within a relative
/// tolerance: pass iff `min_eig >= -tol * max(1, ||G||)`.
pub fn psd_check(entries: &DMatrix<C64>, tol: f64) -> Result<PsdReport> {
    let herm_err = linalg::hermiticity_error(entries);
    let scale = entries.camax().max(1.0);
    if herm_err > 1e-10 * scale {
        return Err(Error::invalid(format!(
            "psd_check requires a Hermitian matrix (asymmetry {herm_err:.3e})"
        )));
    }
    let eig = linalg::herm_eigen(entries)?;
    let min_eig = *eig.values.first().expect("psd_check on empty matrix");
    let norm = eig.values.iter().fold(0.0_f64, |acc, &v| acc.max(v.abs()));
    Ok(PsdReport {
        min_eig,
        norm,
        pass: min_eig >= -tol * norm.max(1.0),
    })
}

impl<L> GramMatrix<L> {
    pub fn psd_check(&self, tol: f64) -> Result<PsdReport> {
        psd_check(&self.entries, tol)
    }

    /// Max deviation of diagonal entries from one.
    pub fn diagonal_deviation(&self) -> f64 {
        (0..self.labels.len())
            .map(|j| (self.entries[(j, j)] - C64::new(1.0, 0.0)).norm())
            .fold(0.0, f64::max)
    }
}

/// Evaluate the constraint-damped quotient for each trial coefficient vector.
///
/// For a trial `{a_j}`, with `psi = sum_j a_j v_j`,
/// `value = <psi| e^{-H^2/lambda} |psi> / <psi|psi>`, computed through the
/// eigendecomposition of `H`. All-zero trials are rejected.
pub fn quotient_set(
    h: &DMatrix<f64>,
    vectors: &[DVector<C64>],
    lambda: f64,
    trials: &[Vec<C64>],
) -> Result<QuotientSet> {
    if lambda <= 0.0 {
        return Err(Error::invalid("quotient_set requires lambda > 0"));
    }
    if vectors.is_empty() {
        return Err(Error::invalid("quotient_set requires at least one vector"));
    }
    let dim = vectors[0].len();
    if h.nrows() != dim || vectors.iter().any(|v| v.len() != dim) {
        return Err(Error::invalid(
            "quotient_set vectors and operator must share one truncated space",
        ));
    }
    let eig = sym_eigen(h)?;
    let mut numerators = Vec::with_capacity(trials.len());
    let mut denominators = Vec::with_capacity(trials.len());
    let mut values = Vec::with_capacity(trials.len());
    for (t, coeffs) in trials.iter().enumerate() {
        if coeffs.len() != vectors.len() {
            return Err(Error::invalid(format!(
                "trial {t} has {} coefficients for {} vectors",
                coeffs.len(),
                vectors.len()
            )));
        }
        if coeffs.iter().all(|c| c.norm() == 0.0) {
            return Err(Error::invalid(format!(
                "trial {t} is the all-zero coefficient vector"
            )));
        }
        let mut psi = DVector::<C64>::zeros(dim);
        for (a, v) in coeffs.iter().zip(vectors) {
            psi += v * *a;
        }
        let den = linalg::inner(&psi, &psi).re;
        if den <= 0.0 {
            return Err(Error::invalid(format!(
                "trial {t} combines to the zero vector"
            )));
        }
        let damped = eig.apply_fn(|e| C64::new((-e * e / lambda).exp(), 0.0), &psi);
        let num = linalg::inner(&psi, &damped).re;
        numerators.push(num);
        denominators.push(den);
        values.push(num / den);
    }
    Ok(QuotientSet {
        coefficients: trials.to_vec(),
        numerators,
        denominators,
        values,
    })
}

/// Relative tolerance for clustering eigenvalues of `H^2` when detecting a
/// degenerate maximizer.
const DEGENERACY_RTOL: f64 = 1e-10;

/// Find the unit vector maximizing `<psi|e^{-H^2/lambda}|psi>` over the
/// truncated space: the eigenvector of `H^2` with the smallest eigenvalue.
///
/// Ties between `+E` and `-E` are broken toward the smaller eigenvalue of
/// `H`; remaining ties toward the lowest index in ascending spectral order.
/// The phase is fixed so the largest-modulus component is positive. The
/// result is independent of `lambda` whenever the smallest eigenvalue of
/// `H^2` is simple.
pub fn recenter(h: &DMatrix<f64>, lambda: f64) -> Result<RecenteredFiducial> {
    if lambda <= 0.0 {
        return Err(Error::invalid("recenter requires lambda > 0"));
    }
    let sym_err = linalg::symmetry_error(h);
    let scale = h.amax().max(1.0);
    if sym_err > 1e-12 * scale {
        return Err(Error::invalid(format!(
            "recenter requires a symmetric operator (asymmetry {sym_err:.3e})"
        )));
    }
    let eig = sym_eigen(h)?;
    let n = eig.dim();
    let sq: Vec<f64> = eig.values.iter().map(|e| e * e).collect();
    let sq_scale = sq.iter().fold(1.0_f64, |a, &b| a.max(b));
    let min_sq = sq.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let cluster: Vec<usize> = (0..n)
        .filter(|&k| sq[k] - min_sq <= DEGENERACY_RTOL * sq_scale)
        .collect();
    // ties toward the smallest H-eigenvalue; values are sorted ascending, so
    // the first cluster member already has the smallest energy
    let pick = cluster[0];
    let min_energy = eig.values[pick];
    let true_degeneracy = cluster
        .iter()
        .filter(|&&k| (eig.values[k] - min_energy).abs() <= DEGENERACY_RTOL * scale)
        .count();
    let degeneracy = (true_degeneracy > 1).then_some(true_degeneracy);

    let mut vector = DVector::<f64>::from_column_slice(eig.vectors.column(pick).as_slice());
    let norm = vector.norm();
    vector /= norm;
    // phase convention: largest-modulus component positive
    let mut arg = 0;
    for i in 1..n {
        if vector[i].abs() > vector[arg].abs() {
            arg = i;
        }
    }
    if vector[arg] < 0.0 {
        vector.neg_mut();
    }
    Ok(RecenteredFiducial {
        quotient_achieved: (-min_energy * min_energy / lambda).exp(),
        vector,
        iterations: 1,
        energy: min_energy,
        degeneracy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn gram_single_label_normalized() {
        let g = gram_matrix(|_: &f64, _: &f64| c(1.0, 0.0), vec![0.0]).unwrap();
        assert_eq!(g.entries.nrows(), 1);
        assert_eq!(g.entries[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn gram_two_identical_labels_degenerate() {
        let g = gram_matrix(|_: &f64, _: &f64| c(1.0, 0.0), vec![0.5, 0.5]).unwrap();
        let rep = g.psd_check(1e-12).unwrap();
        assert!(rep.pass);
        assert!(rep.min_eig.abs() < 1e-14);
    }

    #[test]
    fn gram_one_dof_overlap_matches_wavepacket_quadrature() {
        // independent oracle: quadrature of Gaussian wavepacket inner product
        let oracle = testutil::wavepacket_overlap(1.0, (0.0, 1.0), (0.0, 0.0));
        assert!((oracle.re - (-0.25_f64).exp()).abs() < 1e-9);
        let kern = |a: &(f64, f64), b: &(f64, f64)| {
            crate::oscillator::overlap_analytic(a.0, a.1, b.0, b.1, 1.0)
        };
        let g = gram_matrix(kern, vec![(0.0, 0.0), (0.0, 1.0)]).unwrap();
        assert!((g.entries[(0, 1)] - oracle).norm() < 1e-9);
        assert!(g.diagonal_deviation() < 1e-15);
    }

    #[test]
    fn gram_rejects_non_finite() {
        let err = gram_matrix(|a: &f64, b: &f64| c((a / b).ln(), 0.0), vec![1.0, 0.0]).unwrap_err();
        match err {
            Error::NonFiniteKernel { row, col } => {
                assert_eq!((row, col), (0, 1));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn psd_identity_and_all_ones() {
        let id = DMatrix::<C64>::identity(3, 3);
        let rep = psd_check(&id, 1e-12).unwrap();
        assert!(rep.pass);
        assert!((rep.min_eig - 1.0).abs() < 1e-14);

        let ones = DMatrix::<C64>::from_element(3, 3, c(1.0, 0.0));
        let rep = psd_check(&ones, 1e-12).unwrap();
        assert!(rep.pass);
        assert!(rep.min_eig.abs() < 1e-13);
        assert!((rep.norm - 3.0).abs() < 1e-12);
    }

    #[test]
    fn psd_detects_indefinite() {
        // eigenvalues 1 +- 1.5
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.5, 1.5, 1.0]);
        let rep = psd_check(&crate::linalg::to_complex(&m), 1e-10).unwrap();
        assert!(!rep.pass);
        assert!((rep.min_eig + 0.5).abs() < 1e-12);
    }

    #[test]
    fn quotient_null_vector_and_eigenvector() {
        // diagonal H with a null direction
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 2.0]));
        let e0 = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let e1 = DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let qs = quotient_set(
            &h,
            &[e0, e1],
            1.0,
            &[
                vec![c(1.0, 0.0), c(0.0, 0.0)],
                vec![c(0.0, 0.0), c(1.0, 0.0)],
            ],
        )
        .unwrap();
        assert!((qs.values[0] - 1.0).abs() < 1e-14);
        assert!((qs.values[1] - (-1.0_f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn quotient_two_term_spectral_sum() {
        // harmonic spectrum {0, 1, 2, ...}, psi = (|0> + |1>)/sqrt(2):
        // value = (1 + e^{-1})/2, frozen from the 2-term spectral sum
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 2.0, 3.0]));
        let mut psi = DVector::<C64>::zeros(4);
        psi[0] = c(1.0, 0.0);
        psi[1] = c(1.0, 0.0);
        let qs = quotient_set(&h, &[psi], 1.0, &[vec![c(1.0, 0.0)]]).unwrap();
        let expect = (1.0 + (-1.0_f64).exp()) / 2.0;
        assert!((qs.values[0] - expect).abs() < 1e-14);
        assert!((expect - 0.6839).abs() < 5e-5);
    }

    #[test]
    fn quotient_rejects_zero_trial() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0]));
        let v = DVector::from_vec(vec![c(1.0, 0.0)]);
        assert!(quotient_set(&h, &[v], 1.0, &[vec![c(0.0, 0.0)]]).is_err());
    }

    #[test]
    fn quotient_values_in_unit_interval() {
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, 0.0, 0.3, -2.0, 0.1, 0.0, 0.1, 0.5]);
        let vs: Vec<DVector<C64>> = (0..3)
            .map(|k| {
                DVector::from_fn(3, |i, _| {
                    c(
                        ((i + 2 * k) as f64 * 0.37).sin(),
                        (i as f64 - k as f64) * 0.11,
                    )
                })
            })
            .collect();
        let trials: Vec<Vec<C64>> = vec![
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
            vec![c(0.2, -0.4), c(0.9, 0.0), c(-0.3, 0.7)],
            vec![c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)],
        ];
        let qs = quotient_set(&h, &vs, 2.5, &trials).unwrap();
        for &v in &qs.values {
            assert!((0.0..=1.0 + 1e-12).contains(&v));
        }
    }

    #[test]
    fn recenter_diagonal_with_null_index() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0, 2.0]));
        let f = recenter(&h, 1.0).unwrap();
        assert!((f.vector[0].abs() - 1.0).abs() < 1e-14);
        assert!((f.quotient_achieved - 1.0).abs() < 1e-14);
        assert!(f.degeneracy.is_none());
    }

    #[test]
    fn recenter_prefers_smaller_energy_on_sign_tie() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![-1.0, 1.0, 3.0]));
        let f = recenter(&h, 1.0).unwrap();
        assert!((f.energy + 1.0).abs() < 1e-14);
        assert!((f.vector[0].abs() - 1.0).abs() < 1e-14);
        // +-1 are distinct eigenvalues of H, so no true degeneracy is flagged
        assert!(f.degeneracy.is_none());
    }

    #[test]
    fn recenter_flags_true_degeneracy() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![0.5, 0.5, 2.0]));
        let f = recenter(&h, 1.0).unwrap();
        assert_eq!(f.degeneracy, Some(2));
    }

    #[test]
    fn recenter_oscillator_ground_state_invariance() {
        // H normal-ordered in its own basis: diag(0, w, 2w, ...)
        let d = 12;
        let h = DMatrix::from_fn(d, d, |i, j| if i == j { 1.7 * i as f64 } else { 0.0 });
        let f = recenter(&h, 3.0).unwrap();
        assert!((f.vector[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn recenter_lambda_invariance_when_simple() {
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 0.4, 0.0, 0.4, 2.0, -0.2, 0.0, -0.2, 3.5]);
        let a = recenter(&h, 0.7).unwrap();
        let b = recenter(&h, 19.0).unwrap();
        assert!((&a.vector - &b.vector).amax() < 1e-13);
    }

    #[test]
    fn recenter_matches_squeezed_vacuum_expansion() {
        // fiducial width M = 1, target frequency w = 4, dimension 40; the
        // recentered fiducial is the Bogoliubov vacuum with tanh r = 3/5 and
        // overlap (2 sqrt(M w)/(M + w))^{1/2} against the original fiducial.
        let d = 40;
        let (m_width, w) = (1.0, 4.0);
        let (q, p) = crate::oscillator::ladder_qp(d, m_width);
        let h = 0.5 * ((&p * &p).map(|v| v.re) + w * w * (&q * &q));
        let f = recenter(&h, 1.0).unwrap();
        let expansion = testutil::squeezed_vacuum_coeffs(d, m_width, w);
        // dimension-40 truncation leaves a boundary layer in the top levels;
        // leading components agree to ~1e-8 and the whole vector to ~1e-6
        for (i, &want) in expansion.iter().enumerate().take(10) {
            assert!(
                (f.vector[i] - want).abs() < 2e-8,
                "component {i}: {} vs {want}",
                f.vector[i]
            );
        }
        let dist: f64 = (0..d)
            .map(|i| (f.vector[i] - expansion[i]).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(dist < 1e-5, "vector distance {dist:.3e}");
        // overlap against original fiducial, oracle frozen from the Gaussian
        // ground-state integral: 0.8944271909999159 = sqrt(0.8)
        let overlap_quad = testutil::gaussian_vacuum_overlap_quadrature(m_width, w);
        assert!((overlap_quad - 0.8944271909999159).abs() < 1e-10);
        assert!((f.vector[0] - overlap_quad).abs() < 1e-7);
    }

    #[test]
    fn recenter_invariant_under_basis_reordering() {
        // permuting the basis must permute the fiducial components
        let h = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.1, 0.3, 0.9, 0.0, 0.1, 0.0, 3.0]);
        let f = recenter(&h, 1.0).unwrap();
        let perm = [2usize, 0, 1];
        let hp = DMatrix::from_fn(3, 3, |i, j| h[(perm[i], perm[j])]);
        let fp = recenter(&hp, 1.0).unwrap();
        for (i, &src) in perm.iter().enumerate() {
            assert!((fp.vector[i] - f.vector[src]).abs() < 1e-12);
        }
    }
}
