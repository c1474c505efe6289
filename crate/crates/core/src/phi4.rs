//! Quartic scalar chains at desk scale: 1 to 4 sites with per-site truncated
//! bases in the width-`M` ultralocal representation, a matrix-free (or small
//! dense) Hamiltonian, an iterative ground-state solver seeded from the
//! fiducial, and the recentered interacting kernel.
//!
//! The chain uses unit lattice spacing and a periodic forward-difference
//! gradient,
//! `H = sum_x { pi_x^2/2 + (phi_{x+1} - phi_x)^2/2 + m0^2 phi_x^2/2 +
//! (dm^2/2) phi_x^2 + g phi_x^4 }`,
//! normal ordered with respect to the ultralocal fiducial.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{inner, sym_eigen};
use crate::oscillator::{displacement_matrix, ladder_qp, Label};
use crate::C64;

/// Densities above this total dimension use the matrix-free path.
pub const DENSE_LIMIT: usize = 4096;
/// Hard cap for the matrix-free path.
pub const MATRIX_FREE_LIMIT: usize = 1_000_000;

/// Cutoff-dependent bare-mass shift, supplied by the caller with a note on
/// where the value came from.
#[derive(Debug, Clone, PartialEq)]
pub struct MassCounterterm {
    pub value: f64,
    pub provenance: String,
}

/// Parameters of the quartic chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Phi4Spec {
    /// Number of chain sites, 1 to 4.
    pub sites: usize,
    /// Bare mass.
    pub m0: f64,
    /// Quartic coupling, nonnegative.
    pub g: f64,
    /// Ultralocal fiducial width.
    pub m_width: f64,
    /// Per-site truncation dimension.
    pub dim: usize,
    /// Optional mass counterterm (defaults to zero).
    pub counterterm: Option<MassCounterterm>,
}

impl Phi4Spec {
    pub fn total_dim(&self) -> usize {
        self.dim.pow(self.sites as u32)
    }

    fn dm2(&self) -> f64 {
        self.counterterm.as_ref().map_or(0.0, |c| c.value)
    }

    fn validate(&self) -> Result<()> {
        if !(1..=4).contains(&self.sites) {
            return Err(Error::invalid("phi4 chains support 1 to 4 sites"));
        }
        if self.m0 <= 0.0 {
            return Err(Error::invalid("bare mass must be positive"));
        }
        if self.g < 0.0 {
            return Err(Error::invalid("quartic coupling must be nonnegative"));
        }
        if self.m_width <= 0.0 {
            return Err(Error::invalid("fiducial width must be positive"));
        }
        if self.dim < 8 {
            return Err(Error::invalid("per-site dimension must be at least 8"));
        }
        if self.total_dim() > MATRIX_FREE_LIMIT {
            return Err(Error::invalid(format!(
                "total dimension {} exceeds the matrix-free limit {}; reduce the \
                 per-site dimension or the site count",
                self.total_dim(),
                MATRIX_FREE_LIMIT
            )));
        }
        Ok(())
    }
}

/// Assembled chain Hamiltonian: per-site operator blocks plus an optional
/// dense matrix when the product space is small enough.
#[derive(Debug, Clone)]
pub struct Phi4Operator {
    pub spec: Phi4Spec,
    pub total_dim: usize,
    /// Fiducial expectation of the raw Hamiltonian (the normal-ordering
    /// constant); the assembled operator has it subtracted.
    pub ordering_constant: f64,
    q_site: DMatrix<f64>,
    p2_site: DMatrix<f64>,
    q2_site: DMatrix<f64>,
    q4_site: DMatrix<f64>,
    dense: Option<DMatrix<f64>>,
}

/// `H = sum_x [p_x^2/2 + c2 q_x^2 + g q_x^4] - sum_x q_{x+1} q_x` with
/// `c2 = m0^2/2 + dm^2/2 + [sites >= 2]`, from expanding the periodic
/// forward-difference gradient.
pub fn phi4_hamiltonian(spec: &Phi4Spec) -> Result<Phi4Operator> {
    spec.validate()?;
    let d = spec.dim;
    let (q, p) = ladder_qp(d, spec.m_width);
    let p2 = (&p * &p).map(|v| v.re);
    let q2 = &q * &q;
    let q4 = &q2 * &q2;
    let mut op = Phi4Operator {
        total_dim: spec.total_dim(),
        ordering_constant: 0.0,
        q_site: q,
        p2_site: p2,
        q2_site: q2,
        q4_site: q4,
        dense: None,
        spec: spec.clone(),
    };
    // fiducial expectation of the raw H: index 0 is the product fiducial
    let mut fid = DVector::<f64>::zeros(op.total_dim);
    fid[0] = 1.0;
    let h_fid = op.apply_raw(&fid);
    op.ordering_constant = fid.dot(&h_fid);
    if op.total_dim <= DENSE_LIMIT {
        op.dense = Some(op.assemble_dense());
    }
    Ok(op)
}

impl Phi4Operator {
    fn site_coefficient(&self) -> f64 {
        let grad = if self.spec.sites >= 2 { 1.0 } else { 0.0 };
        0.5 * self.spec.m0 * self.spec.m0 + 0.5 * self.spec.dm2() + grad
    }

    /// Apply a per-site operator along one tensor axis of a real vector.
    fn apply_axis(&self, mat: &DMatrix<f64>, v: &DVector<f64>, site: usize) -> DVector<f64> {
        let d = self.spec.dim;
        let stride = d.pow(site as u32);
        let block = stride * d;
        let mut out = DVector::<f64>::zeros(v.len());
        for base in (0..v.len()).step_by(block) {
            for off in 0..stride {
                for i in 0..d {
                    let mut acc = 0.0;
                    for k in 0..d {
                        acc += mat[(i, k)] * v[base + off + k * stride];
                    }
                    out[base + off + i * stride] = acc;
                }
            }
        }
        out
    }

    fn apply_axis_complex(
        &self,
        mat: &DMatrix<C64>,
        v: &DVector<C64>,
        site: usize,
    ) -> DVector<C64> {
        let d = self.spec.dim;
        let stride = d.pow(site as u32);
        let block = stride * d;
        let mut out = DVector::<C64>::zeros(v.len());
        for base in (0..v.len()).step_by(block) {
            for off in 0..stride {
                for i in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..d {
                        acc += mat[(i, k)] * v[base + off + k * stride];
                    }
                    out[base + off + i * stride] = acc;
                }
            }
        }
        out
    }

    /// Raw (not normal-ordered) Hamiltonian application.
    fn apply_raw(&self, v: &DVector<f64>) -> DVector<f64> {
        let sites = self.spec.sites;
        let c2 = self.site_coefficient();
        let g = self.spec.g;
        let mut out = DVector::<f64>::zeros(v.len());
        for x in 0..sites {
            out += self.apply_axis(&self.p2_site, v, x).scale(0.5);
            out += self.apply_axis(&self.q2_site, v, x).scale(c2);
            if g != 0.0 {
                out += self.apply_axis(&self.q4_site, v, x).scale(g);
            }
        }
        if sites >= 2 {
            for x in 0..sites {
                let next = (x + 1) % sites;
                let qx = self.apply_axis(&self.q_site, v, x);
                out -= self.apply_axis(&self.q_site, &qx, next);
            }
        }
        out
    }

    /// Normal-ordered Hamiltonian application.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        self.apply_raw(v) - v.scale(self.ordering_constant)
    }

    /// Normal-ordered application on a complex vector.
    pub fn apply_complex(&self, v: &DVector<C64>) -> DVector<C64> {
        let re = DVector::from_fn(v.len(), |i, _| v[i].re);
        let im = DVector::from_fn(v.len(), |i, _| v[i].im);
        let hre = self.apply(&re);
        let him = self.apply(&im);
        DVector::from_fn(v.len(), |i, _| C64::new(hre[i], him[i]))
    }

    /// Dense normal-ordered matrix, available when `total_dim <= DENSE_LIMIT`.
    pub fn dense(&self) -> Option<&DMatrix<f64>> {
        self.dense.as_ref()
    }

    fn assemble_dense(&self) -> DMatrix<f64> {
        let n = self.total_dim;
        let mut h = DMatrix::<f64>::zeros(n, n);
        let mut basis = DVector::<f64>::zeros(n);
        for j in 0..n {
            basis.fill(0.0);
            basis[j] = 1.0;
            let col = self.apply(&basis);
            h.set_column(j, &col);
        }
        // symmetrize away the last bits of roundoff
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (h[(i, j)] + h[(j, i)]);
                h[(i, j)] = avg;
                h[(j, i)] = avg;
            }
        }
        h
    }

    /// Product fiducial vector.
    pub fn fiducial(&self) -> DVector<f64> {
        let mut v = DVector::<f64>::zeros(self.total_dim);
        v[0] = 1.0;
        v
    }

    /// `<v| phi_0^2 |v>` and `<v| phi_0^4 |v>` for a normalized real vector.
    pub fn phi_moments(&self, v: &DVector<f64>) -> (f64, f64) {
        let m2 = v.dot(&self.apply_axis(&self.q2_site, v, 0));
        let m4 = v.dot(&self.apply_axis(&self.q4_site, v, 0));
        (m2, m4)
    }

    /// Ground eigenpair by restarted Lanczos with full reorthogonalization,
    /// seeded deterministically from the product fiducial.
    pub fn ground_state_iterative(&self, tol: f64) -> Result<GroundState> {
        let apply = |v: &DVector<f64>| self.apply(v);
        lanczos_ground(apply, self.fiducial(), tol)
    }

    /// Kernel matrix `<D(l_j) v0 | e^{-i dt (H - E0)} | D(l_k) v0>` over
    /// per-site displacement labels.
    pub fn kernel_matrix(&self, labels: &[Vec<Label>], dt: f64) -> Result<Phi4Kernel> {
        self.kernel_matrix_impl(labels, dt, false)
    }

    pub(crate) fn kernel_matrix_impl(
        &self,
        labels: &[Vec<Label>],
        dt: f64,
        force_iterative: bool,
    ) -> Result<Phi4Kernel> {
        for (i, l) in labels.iter().enumerate() {
            if l.len() != self.spec.sites {
                return Err(Error::invalid(format!(
                    "label {i} has {} site entries for {} sites",
                    l.len(),
                    self.spec.sites
                )));
            }
        }
        // ground state: dense when available, otherwise iterative
        let (e0, ground) = match (&self.dense, force_iterative) {
            (Some(h), false) => {
                let eig = sym_eigen(h)?;
                let mut g = DVector::<f64>::from_column_slice(eig.vectors.column(0).as_slice());
                fix_sign(&mut g);
                (eig.values[0], g)
            }
            _ => {
                let gs = self.ground_state_iterative(1e-12)?;
                (gs.energy, gs.vector)
            }
        };
        let ground_c = DVector::from_fn(ground.len(), |i, _| C64::from(ground[i]));
        // displaced labels, site by site
        let mut displaced = Vec::with_capacity(labels.len());
        for l in labels {
            let mut v = ground_c.clone();
            for (site, &lab) in l.iter().enumerate() {
                if lab.p != 0.0 || lab.q != 0.0 {
                    let u = displacement_matrix(self.spec.dim, self.spec.m_width, lab)?;
                    v = self.apply_axis_complex(&u, &v, site);
                }
            }
            displaced.push(v);
        }
        let n = labels.len();
        let mut entries = DMatrix::<C64>::zeros(n, n);
        match (&self.dense, force_iterative) {
            (Some(h), false) => {
                let eig = sym_eigen(h)?;
                let coeffs: Vec<Vec<C64>> = displaced.iter().map(|v| eig.project(v)).collect();
                for j in 0..n {
                    for k in 0..n {
                        let mut acc = C64::new(0.0, 0.0);
                        for (m, &e) in eig.values.iter().enumerate() {
                            acc += coeffs[j][m].conj()
                                * C64::new(0.0, -dt * (e - e0)).exp()
                                * coeffs[k][m];
                        }
                        entries[(j, k)] = acc;
                    }
                }
            }
            _ => {
                let propagated: Vec<DVector<C64>> = displaced
                    .iter()
                    .map(|v| self.krylov_propagate(v, dt, e0))
                    .collect::<Result<Vec<_>>>()?;
                for j in 0..n {
                    for k in 0..n {
                        entries[(j, k)] = inner(&displaced[j], &propagated[k]);
                    }
                }
            }
        }
        Ok(Phi4Kernel { entries, e0 })
    }

    /// `e^{-i dt (H - e0)} psi` through a Krylov subspace.
    fn krylov_propagate(&self, psi: &DVector<C64>, dt: f64, e0: f64) -> Result<DVector<C64>> {
        if dt == 0.0 {
            return Ok(psi.clone());
        }
        const KRYLOV_DIM: usize = 90;
        let m = KRYLOV_DIM.min(self.total_dim);
        let norm0 = psi.norm();
        let mut basis: Vec<DVector<C64>> = vec![psi.unscale(norm0)];
        let mut alphas = Vec::with_capacity(m);
        let mut betas = Vec::with_capacity(m);
        for j in 0..m {
            let mut w = self.apply_complex(&basis[j]);
            let a = inner(&basis[j], &w).re;
            alphas.push(a);
            w -= &basis[j] * C64::from(a);
            if j > 0 {
                w -= &basis[j - 1] * C64::from(betas[j - 1]);
            }
            // full reorthogonalization keeps the small problem faithful
            for b in &basis {
                let c = inner(b, &w);
                w -= b * c;
            }
            let beta = w.norm();
            if beta < 1e-13 || j == m - 1 {
                break;
            }
            betas.push(beta);
            basis.push(w.unscale(beta));
        }
        let k = alphas.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i] - e0;
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = sym_eigen(&t)?;
        let mut small = DVector::<C64>::zeros(k);
        for col in 0..k {
            let amp: f64 = eig.vectors[(0, col)];
            let phase = C64::new(0.0, -dt * eig.values[col]).exp();
            for row in 0..k {
                small[row] += C64::from(eig.vectors[(row, col)]) * phase * amp;
            }
        }
        let mut out = DVector::<C64>::zeros(psi.len());
        for (j, b) in basis.iter().enumerate() {
            out += b * (small[j] * norm0);
        }
        Ok(out)
    }
}

/// Kernel matrix over displacement labels, with the ground energy used for
/// re-normal-ordering.
#[derive(Debug, Clone)]
pub struct Phi4Kernel {
    pub entries: DMatrix<C64>,
    pub e0: f64,
}

/// Ground eigenpair from the iterative solver.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn fix_sign(v: &mut DVector<f64>) {
    let mut arg = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[arg].abs() {
            arg = i;
        }
    }
    if v[arg] < 0.0 {
        v.neg_mut();
    }
}

const LANCZOS_BASIS: usize = 160;
const LANCZOS_RESTARTS: usize = 40;

/// Restarted Lanczos for the smallest eigenpair of a symmetric operator.
pub fn lanczos_ground(
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
    seed: DVector<f64>,
    tol: f64,
) -> Result<GroundState> {
    let dim = seed.len();
    let m = LANCZOS_BASIS.min(dim);
    let mut v0 = seed;
    let n0 = v0.norm();
    if n0 == 0.0 {
        return Err(Error::invalid("lanczos seed must be nonzero"));
    }
    v0 /= n0;
    let mut history = Vec::new();
    let mut iterations = 0;
    for _restart in 0..LANCZOS_RESTARTS {
        let mut basis: Vec<DVector<f64>> = vec![v0.clone()];
        let mut alphas = Vec::with_capacity(m);
        let mut betas = Vec::with_capacity(m);
        for j in 0..m {
            let mut w = apply(&basis[j]);
            iterations += 1;
            let a = basis[j].dot(&w);
            alphas.push(a);
            w -= &basis[j] * a;
            if j > 0 {
                w -= &basis[j - 1] * betas[j - 1];
            }
            for b in &basis {
                let c = b.dot(&w);
                w -= b * c;
            }
            let beta = w.norm();
            if beta < 1e-13 || j == m - 1 {
                break;
            }
            betas.push(beta);
            basis.push(w / beta);
        }
        let k = alphas.len();
        let mut t = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alphas[i];
            if i + 1 < k {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = sym_eigen(&t)?;
        let mut ritz = DVector::<f64>::zeros(dim);
        for (j, b) in basis.iter().enumerate() {
            ritz += b * eig.vectors[(j, 0)];
        }
        ritz /= ritz.norm();
        let theta = eig.values[0];
        let residual = (apply(&ritz) - &ritz * theta).norm();
        history.push(residual);
        if residual <= tol {
            fix_sign(&mut ritz);
            return Ok(GroundState {
                energy: theta,
                vector: ritz,
                residual,
                iterations,
            });
        }
        v0 = ritz;
    }
    Err(Error::NoConvergence {
        residual: *history.last().unwrap_or(&f64::NAN),
        iterations,
        history,
    })
}
