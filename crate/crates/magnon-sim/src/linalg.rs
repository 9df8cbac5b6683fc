//! Small dense complex-matrix helpers for the 2x2 and 4x4 matrices used
//! throughout the crate. Matrices are row-major `Vec<Complex64>` slices;
//! dimensions stay tiny, so everything is written directly against that
//! layout instead of pulling in a linear-algebra dependency.

use num_complex::Complex64 as C64;

pub(crate) fn mat_mul(dim: usize, a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            if aik.norm_sqr() == 0.0 {
                continue;
            }
            for j in 0..dim {
                out[i * dim + j] += aik * b[k * dim + j];
            }
        }
    }
    out
}

#[cfg(test)]
pub(crate) fn mat_adjoint(dim: usize, a: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            out[j * dim + i] = a[i * dim + j].conj();
        }
    }
    out
}

pub(crate) fn mat_conj(a: &[C64]) -> Vec<C64> {
    a.iter().map(|z| z.conj()).collect()
}

pub(crate) fn mat_trace(dim: usize, a: &[C64]) -> C64 {
    (0..dim).map(|i| a[i * dim + i]).sum()
}

/// Largest entrywise deviation from Hermiticity, `max |a_ij - conj(a_ji)|`.
pub(crate) fn hermiticity_defect(dim: usize, a: &[C64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in i..dim {
            let d = (a[i * dim + j] - a[j * dim + i].conj()).norm();
            worst = worst.max(d);
        }
    }
    worst
}

/// Eigenvalues of a complex Hermitian matrix by cyclic Jacobi rotations,
/// ascending order. Only the strictly Hermitian part of `a` is consulted.
pub(crate) fn hermitian_eigenvalues(dim: usize, a: &[C64]) -> Vec<f64> {
    hermitian_eigen(dim, a).0
}

/// Full eigendecomposition of a complex Hermitian matrix: ascending
/// eigenvalues and the unitary of eigenvectors stored column-major in a
/// row-major matrix (`v[i*dim + k]` is component `i` of eigenvector `k`).
///
/// Cyclic Jacobi converges quadratically and handles degenerate spectra
/// without special cases, which matters for rank-deficient density matrices.
pub(crate) fn hermitian_eigen(dim: usize, a: &[C64]) -> (Vec<f64>, Vec<C64>) {
    let mut m = a.to_vec();
    // Work on the exactly Hermitian average so rotations stay unitary.
    for i in 0..dim {
        for j in 0..dim {
            let h = (a[i * dim + j] + a[j * dim + i].conj()) * 0.5;
            m[i * dim + j] = h;
        }
    }
    let mut v = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        v[i * dim + i] = C64::new(1.0, 0.0);
    }

    let scale: f64 = m
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);

    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for i in 0..dim {
            for j in (i + 1)..dim {
                off += m[i * dim + j].norm_sqr();
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..dim {
            for q in (p + 1)..dim {
                let apq = m[p * dim + q];
                if apq.norm() <= 1e-300 {
                    continue;
                }
                let app = m[p * dim + p].re;
                let aqq = m[q * dim + q].re;
                let abs = apq.norm();
                let phase = apq / abs; // e^{i arg(apq)}
                                       // Rotation angle of the equivalent real 2x2 problem.
                let kappa = (aqq - app) / (2.0 * abs);
                let t = if kappa >= 0.0 {
                    1.0 / (kappa + (1.0 + kappa * kappa).sqrt())
                } else {
                    -1.0 / (-kappa + (1.0 + kappa * kappa).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Columns: col_p' = c*col_p - s*conj(phase)*col_q,
                //          col_q' = s*phase*col_p + c*col_q, applied as m <- R^dag m R.
                let rpp = C64::new(c, 0.0);
                let rpq = phase * s;
                let rqp = -phase.conj() * s;
                let rqq = C64::new(c, 0.0);
                // m <- R^dag * m (rows p, q).
                for j in 0..dim {
                    let mp = m[p * dim + j];
                    let mq = m[q * dim + j];
                    m[p * dim + j] = rpp.conj() * mp + rqp.conj() * mq;
                    m[q * dim + j] = rpq.conj() * mp + rqq.conj() * mq;
                }
                // m <- m * R (columns p, q).
                for i in 0..dim {
                    let mp = m[i * dim + p];
                    let mq = m[i * dim + q];
                    m[i * dim + p] = mp * rpp + mq * rqp;
                    m[i * dim + q] = mp * rpq + mq * rqq;
                }
                // v <- v * R.
                for i in 0..dim {
                    let vp = v[i * dim + p];
                    let vq = v[i * dim + q];
                    v[i * dim + p] = vp * rpp + vq * rqp;
                    v[i * dim + q] = vp * rpq + vq * rqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..dim).collect();
    let evals: Vec<f64> = (0..dim).map(|i| m[i * dim + i].re).collect();
    order.sort_by(|&i, &j| evals[i].total_cmp(&evals[j]));
    let sorted_vals: Vec<f64> = order.iter().map(|&i| evals[i]).collect();
    let mut sorted_vecs = vec![C64::new(0.0, 0.0); dim * dim];
    for (new_col, &old_col) in order.iter().enumerate() {
        for i in 0..dim {
            sorted_vecs[i * dim + new_col] = v[i * dim + old_col];
        }
    }
    (sorted_vals, sorted_vecs)
}

/// Principal square root of a Hermitian PSD matrix. Negative eigenvalues
/// from rounding are clamped to zero.
pub(crate) fn hermitian_sqrt(dim: usize, a: &[C64]) -> Vec<C64> {
    let (vals, vecs) = hermitian_eigen(dim, a);
    let mut out = vec![C64::new(0.0, 0.0); dim * dim];
    for k in 0..dim {
        let root = vals[k].max(0.0).sqrt();
        if root == 0.0 {
            continue;
        }
        for i in 0..dim {
            for j in 0..dim {
                out[i * dim + j] += vecs[i * dim + k] * vecs[j * dim + k].conj() * root;
            }
        }
    }
    out
}
