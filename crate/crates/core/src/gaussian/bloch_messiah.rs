//! Bloch–Messiah supermode decomposition of a lossless Green's function.
//!
//! Performed in the real quadrature basis (x = a + a†, p = i(a† − a)),
//! where the Green's function becomes a real symplectic matrix
//! `G' = O_out Σ O_inᵀ` with orthogonal symplectic `O` factors and
//! `Σ = diag(e^{r_i}, e^{-r_i})`. The paired eigenvectors of the symmetric
//! symplectic matrix `G'G'ᵀ` supply `O_out`; `O_in` follows by solving.


use crate::error::{Error, Result};
use crate::{C64, CMat, RMat};

use super::GreensFunction;

/// Result of decomposing a square lossless Green's function into
/// independent single-mode squeezers between two unitary mode bases:
/// `G = W_out · diag(squeezers r_i) · W_in†`.
#[derive(Debug, Clone)]
pub struct SupermodeDecomposition {
    /// Squeezing parameters, descending, all ≥ 0.
    pub squeezing_params: Vec<f64>,
    /// Unitary whose columns are the output supermode spectra.
    pub output_modes: CMat,
    /// Unitary whose columns are the input supermodes.
    pub input_modes: CMat,
}

const SYMPLECTIC_GATE: f64 = 1e-6;
const DEGENERACY_TOL: f64 = 1e-7;

impl SupermodeDecomposition {
    /// Rebuilds the Green's function:
    /// `C = W_out diag(cosh r) W_in†`, `S = W_out diag(sinh r) W_inᵀ`.
    pub fn reconstruct(&self) -> GreensFunction {
        let m = self.squeezing_params.len();
        let mut dc = CMat::zeros(m, m);
        let mut ds = CMat::zeros(m, m);
        for i in 0..m {
            dc[(i, i)] = C64::new(self.squeezing_params[i].cosh(), 0.0);
            ds[(i, i)] = C64::new(self.squeezing_params[i].sinh(), 0.0);
        }
        let c = &self.output_modes * &dc * self.input_modes.adjoint();
        let s = &self.output_modes * &ds * self.input_modes.transpose();
        GreensFunction::new(c, s).expect("square by construction")
    }

    /// Total mean photons generated from vacuum, `Σ sinh² r_i`.
    pub fn total_mean_photons(&self) -> f64 {
        self.squeezing_params
            .iter()
            .map(|r| r.sinh().powi(2))
            .sum()
    }
}

/// Converts an a-basis Green's function to the real quadrature basis.
fn quadrature_matrix(g: &GreensFunction) -> RMat {
    let m = g.modes_in();
    // G' = T G T⁻¹ with T = [[I, I], [-iI, iI]], T⁻¹ = ½[[I, iI], [I, -iI]].
    // Written out in blocks of C and S this gives:
    //   X-block structure: [[Re(C+S), -Im(C-S)], [Im(C+S), Re(C-S)]].
    let c = g.c();
    let s = g.s();
    let mut out = RMat::zeros(2 * m, 2 * m);
    for r in 0..m {
        for cc in 0..m {
            let cps = c[(r, cc)] + s[(r, cc)];
            let cms = c[(r, cc)] - s[(r, cc)];
            out[(r, cc)] = cps.re;
            out[(r, cc + m)] = -cms.im;
            out[(r + m, cc)] = cps.im;
            out[(r + m, cc + m)] = cms.re;
        }
    }
    out
}

/// Applies the symplectic form `J = [[0, I], [-I, 0]]` to a vector.
fn apply_j(v: &nalgebra::DVector<f64>, m: usize) -> nalgebra::DVector<f64> {
    let mut out = nalgebra::DVector::zeros(2 * m);
    for i in 0..m {
        out[i] = v[i + m];
        out[i + m] = -v[i];
    }
    out
}

/// Deterministic orthonormal basis of the column span of `cols`:
/// Gram-Schmidt over the columns of the subspace projector, in index order.
fn canonical_basis(cols: &[nalgebra::DVector<f64>]) -> Vec<nalgebra::DVector<f64>> {
    let dim = cols[0].len();
    let mut proj = RMat::zeros(dim, dim);
    for v in cols {
        proj += v * v.transpose();
    }
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(cols.len());
    for j in 0..dim {
        let mut v = proj.column(j).into_owned();
        for b in &basis {
            let d = b.dot(&v);
            v -= b * d;
        }
        let n = v.norm();
        if n > 1e-8 {
            basis.push(v / n);
        }
        if basis.len() == cols.len() {
            break;
        }
    }
    debug_assert_eq!(basis.len(), cols.len());
    basis
}

/// Flips the sign of `v` so its first component with magnitude above the
/// working tolerance is positive.
fn fix_sign(mut v: nalgebra::DVector<f64>) -> nalgebra::DVector<f64> {
    for i in 0..v.len() {
        if v[i].abs() > 1e-9 {
            if v[i] < 0.0 {
                v = -v;
            }
            break;
        }
    }
    v
}

/// Bloch–Messiah decomposition of a square, symplectic Green's function.
///
/// Rejects inputs whose symplectic residual exceeds 1e-6. Squeezing
/// parameters come out sorted descending; degenerate supermode subspaces are
/// resolved deterministically.
pub fn bloch_messiah(g: &GreensFunction) -> Result<SupermodeDecomposition> {
    let m = g.modes_in();
    if g.modes_out() != m {
        return Err(Error::DimensionMismatch(
            "Bloch-Messiah requires a square Green's function".into(),
        ));
    }
    let residual = g.symplectic_residual();
    if residual > SYMPLECTIC_GATE {
        return Err(Error::NotSymplectic {
            residual,
            tol: SYMPLECTIC_GATE,
        });
    }

    let gq = quadrature_matrix(g);
    let q = &gq * gq.transpose();
    let (eigenvalues, eigenvectors) = crate::linalg::symmetric_eigen(&q)?;

    // Keep the λ ≥ 1 half of the paired spectrum, sorted descending.
    let mut idx: Vec<usize> = (0..2 * m).collect();
    idx.sort_by(|&a, &b| {
        eigenvalues[b]
            .partial_cmp(&eigenvalues[a])
            .unwrap()
    });
    let top: Vec<usize> = idx[..m].to_vec();

    // Cluster degenerate eigenvalues and canonicalize each cluster basis.
    let mut out_cols: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(m);
    let mut s_values: Vec<f64> = Vec::with_capacity(m);
    let mut k = 0;
    while k < m {
        let lambda = eigenvalues[top[k]];
        let mut cluster = vec![eigenvectors.column(top[k]).into_owned()];
        let mut k2 = k + 1;
        while k2 < m
            && (eigenvalues[top[k2]] - lambda).abs() <= DEGENERACY_TOL * lambda.max(1.0)
        {
            cluster.push(eigenvectors.column(top[k2]).into_owned());
            k2 += 1;
        }
        // A λ ≈ 1 eigenspace also contains the J-partners; restrict to a
        // symplectically independent half.
        if (lambda - 1.0).abs() <= DEGENERACY_TOL {
            // Include the remaining unit eigenvalues from the lower half.
            for &j in &idx[m..] {
                if (eigenvalues[j] - 1.0).abs() <= DEGENERACY_TOL {
                    cluster.push(eigenvectors.column(j).into_owned());
                }
            }
            let full = canonical_basis(&cluster);
            let want = k2 - k;
            let mut picked: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(want);
            for cand in full {
                let mut v = cand;
                for p in &picked {
                    let d = p.dot(&v);
                    v -= p * d;
                    let jp = apply_j(p, m);
                    let dj = jp.dot(&v);
                    v -= jp * dj;
                }
                let n = v.norm();
                if n > 1e-6 {
                    picked.push(v / n);
                }
                if picked.len() == want {
                    break;
                }
            }
            if picked.len() != want {
                return Err(Error::NonConvergence(
                    "failed to build symplectic basis of unit eigenspace".into(),
                ));
            }
            for v in picked {
                out_cols.push(fix_sign(v));
                s_values.push(1.0);
            }
        } else {
            let basis = canonical_basis(&cluster);
            for v in basis {
                out_cols.push(fix_sign(v));
                s_values.push(lambda.max(1.0).sqrt());
            }
        }
        k = k2;
    }

    // Assemble O_out: columns [v_1..v_M, -J v_1 .. -J v_M].
    let mut o_out = RMat::zeros(2 * m, 2 * m);
    for (i, v) in out_cols.iter().enumerate() {
        o_out.set_column(i, v);
        o_out.set_column(i + m, &(-apply_j(v, m)));
    }

    // O_in from G' = O_out Σ O_inᵀ.
    let mut sigma_inv = RMat::zeros(2 * m, 2 * m);
    for i in 0..m {
        sigma_inv[(i, i)] = 1.0 / s_values[i];
        sigma_inv[(i + m, i + m)] = s_values[i];
    }
    let o_in = gq.transpose() * &o_out * sigma_inv;

    let to_unitary = |o: &RMat| {
        let mut w = CMat::zeros(m, m);
        for r in 0..m {
            for c in 0..m {
                // O = [[X, Y], [-Y, X]] ↦ W = X - iY.
                w[(r, c)] = C64::new(o[(r, c)], -o[(r, c + m)]);
            }
        }
        w
    };
    let output_modes = to_unitary(&o_out);
    let input_modes = to_unitary(&o_in);
    let squeezing_params = s_values.iter().map(|s| s.ln().max(0.0)).collect();

    Ok(SupermodeDecomposition {
        squeezing_params,
        output_modes,
        input_modes,
    })
}
