//! Small dense complex-matrix helpers shared by the dynamics and
//! benchmarking code: Hermitian eigendecomposition, eigenbasis matrix
//! exponentials, vectorization/Choi transforms and subspace projections.
//!
//! Hilbert spaces here are tiny (a 9- or 16-dimensional pair space, 81-dim
//! superoperators), so everything uses dense `nalgebra` matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// `i` as a `Complex64`.
pub const IM: C64 = C64::new(0.0, 1.0);

pub fn cplx(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Hermitian eigendecomposition, eigenvalues ascending.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors as the columns of
/// the returned matrix, ordered to match the eigenvalues.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let se = m.clone().symmetric_eigen();
    let n = se.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMat::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// exp(-i H t) for Hermitian `h`, computed in the eigenbasis.
///
/// Unitary to machine precision whenever the eigendecomposition is, which
/// is what keeps propagators unitary to well below 1e-9.
pub fn expm_i_hermitian(h: &CMat, t: f64) -> CMat {
    let (vals, vecs) = eigh(h);
    let phases: Vec<C64> = vals.iter().map(|&e| (-IM * cplx(e * t)).exp()).collect();
    let n = h.nrows();
    let mut out = CMat::zeros(n, n);
    for k in 0..n {
        let col = vecs.column(k);
        let phase = phases[k];
        // out += phase * |v_k><v_k|
        for i in 0..n {
            let vi = col[i] * phase;
            for j in 0..n {
                out[(i, j)] += vi * col[j].conj();
            }
        }
    }
    out
}

/// Maximum absolute entry of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Deviation from unitarity, max-abs of `U^† U - I`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let n = u.nrows();
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &CMat::identity(n, n))
}

/// Frobenius-normalized distance between `a` and `b` up to global phase.
pub fn dist_up_to_phase(a: &CMat, b: &CMat) -> f64 {
    let tr = (a.adjoint() * b).trace();
    let phase = if tr.norm() > 1e-300 { tr / cplx(tr.norm()) } else { cplx(1.0) };
    let bp = b.map(|x| x / phase);
    max_abs_diff(a, &bp)
}

/// Kronecker product.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Column-stacking vectorization index: `rho[(r, c)]` sits at `r + c * d`.
///
/// Superoperator of `rho -> A rho B`: `kron(B^T, A)` in this convention.
pub fn conjugation_superop(u: &CMat) -> CMat {
    kron(&u.conjugate(), u)
}

/// Reshuffle a superoperator (column-stacking convention) into its Choi
/// matrix: `C[(i*d + r, j*d + c)] = S[(r + c*d, i + j*d)]`.
pub fn superop_to_choi(s: &CMat) -> CMat {
    let d2 = s.nrows();
    let d = (d2 as f64).sqrt().round() as usize;
    assert_eq!(d * d, d2, "superoperator dimension must be a perfect square");
    let mut choi = CMat::zeros(d2, d2);
    for i in 0..d {
        for j in 0..d {
            for r in 0..d {
                for c in 0..d {
                    choi[(i * d + r, j * d + c)] = s[(r + c * d, i + j * d)];
                }
            }
        }
    }
    choi
}

/// Apply a superoperator to a density matrix.
pub fn apply_superop(s: &CMat, rho: &CMat) -> CMat {
    let d = rho.nrows();
    let v = CVec::from_iterator(d * d, (0..d * d).map(|k| rho[(k % d, k / d)]));
    let w = s * v;
    CMat::from_fn(d, d, |r, c| w[r + c * d])
}

/// Trace-preservation defect of a superoperator: max-abs deviation of the
/// trace of `S(E_ij)` from `delta_ij`.
pub fn trace_preservation_defect(s: &CMat) -> f64 {
    let d2 = s.nrows();
    let d = (d2 as f64).sqrt().round() as usize;
    let mut worst: f64 = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mut tr = C64::new(0.0, 0.0);
            for r in 0..d {
                tr += s[(r + r * d, i + j * d)];
            }
            let target = if i == j { cplx(1.0) } else { cplx(0.0) };
            worst = worst.max((tr - target).norm());
        }
    }
    worst
}

/// Most negative Choi eigenvalue of a superoperator (0 for an exactly
/// completely positive map). Used for CPTP physicality checks.
pub fn choi_negativity(s: &CMat) -> f64 {
    let choi = superop_to_choi(s);
    let herm = (&choi + choi.adjoint()) * cplx(0.5);
    let (vals, _) = eigh(&herm);
    vals.first().copied().unwrap_or(0.0).min(0.0)
}
