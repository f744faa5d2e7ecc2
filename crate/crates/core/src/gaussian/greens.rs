use crate::error::{Error, Result};
use crate::{C64, CMat};

/// Linear input→output map of a Gaussian process:
/// `a_out = C a_in + S a_in†`. `S` is nonzero only if the process squeezes.
#[derive(Debug, Clone, PartialEq)]
pub struct GreensFunction {
    c: CMat,
    s: CMat,
}

impl GreensFunction {
    pub fn new(c: CMat, s: CMat) -> Result<Self> {
        if c.shape() != s.shape() {
            return Err(Error::DimensionMismatch(format!(
                "C is {:?}, S is {:?}",
                c.shape(),
                s.shape()
            )));
        }
        Ok(Self { c, s })
    }

    pub fn identity(modes: usize) -> Self {
        Self {
            c: CMat::identity(modes, modes),
            s: CMat::zeros(modes, modes),
        }
    }

    /// Canonical single-mode squeezer: `C = cosh r`, `S = e^{iφ} sinh r`.
    pub fn squeezer(r: f64, phi: f64) -> Self {
        let c = CMat::from_element(1, 1, C64::new(r.cosh(), 0.0));
        let s = CMat::from_element(1, 1, C64::from_polar(r.sinh(), phi));
        Self { c, s }
    }

    /// Independent squeezers on each of `rs.len()` modes.
    pub fn squeezer_multi(rs: &[f64], phis: &[f64]) -> Result<Self> {
        if rs.len() != phis.len() {
            return Err(Error::DimensionMismatch(
                "squeezing and phase vectors differ in length".into(),
            ));
        }
        let m = rs.len();
        let mut c = CMat::zeros(m, m);
        let mut s = CMat::zeros(m, m);
        for i in 0..m {
            c[(i, i)] = C64::new(rs[i].cosh(), 0.0);
            s[(i, i)] = C64::from_polar(rs[i].sinh(), phis[i]);
        }
        Ok(Self { c, s })
    }

    /// Two-mode squeezer on modes (0, 1): `a_1 → cosh r a_1 + e^{iφ} sinh r a_2†`.
    pub fn two_mode_squeezer(r: f64, phi: f64) -> Self {
        let mut c = CMat::identity(2, 2).scale(r.cosh());
        c[(0, 1)] = C64::new(0.0, 0.0);
        c[(1, 0)] = C64::new(0.0, 0.0);
        c[(0, 0)] = C64::new(r.cosh(), 0.0);
        c[(1, 1)] = C64::new(r.cosh(), 0.0);
        let mut s = CMat::zeros(2, 2);
        s[(0, 1)] = C64::from_polar(r.sinh(), phi);
        s[(1, 0)] = C64::from_polar(r.sinh(), phi);
        Self { c, s }
    }

    /// Passive (particle-conserving) transformation from a unitary matrix.
    pub fn passive(u: CMat) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::DimensionMismatch("unitary must be square".into()));
        }
        let n = u.nrows();
        let res = (&u * u.adjoint() - CMat::identity(n, n)).norm();
        if res > 1e-8 {
            return Err(Error::NotUnitary {
                residual: res,
                tol: 1e-8,
            });
        }
        let s = CMat::zeros(n, n);
        Ok(Self { c: u, s })
    }

    /// Beamsplitter of angle θ (balanced at θ = π/4) between two modes of an
    /// M-mode system.
    pub fn beamsplitter(modes: usize, i: usize, j: usize, theta: f64) -> Result<Self> {
        if i >= modes || j >= modes || i == j {
            return Err(Error::InvalidArgument(format!(
                "invalid beamsplitter modes ({i}, {j}) for M = {modes}"
            )));
        }
        let mut c = CMat::identity(modes, modes);
        c[(i, i)] = C64::new(theta.cos(), 0.0);
        c[(j, j)] = C64::new(theta.cos(), 0.0);
        c[(i, j)] = C64::new(theta.sin(), 0.0);
        c[(j, i)] = C64::new(-theta.sin(), 0.0);
        Ok(Self {
            c,
            s: CMat::zeros(modes, modes),
        })
    }

    /// Per-mode phase rotations `a_i → e^{iθ_i} a_i`.
    pub fn phase_rotation(thetas: &[f64]) -> Self {
        let m = thetas.len();
        let mut c = CMat::zeros(m, m);
        for (i, &t) in thetas.iter().enumerate() {
            c[(i, i)] = C64::from_polar(1.0, t);
        }
        Self {
            c,
            s: CMat::zeros(m, m),
        }
    }

    /// Embeds a square Green's function acting on `targets` into an M-mode
    /// identity.
    pub fn embed(&self, modes: usize, targets: &[usize]) -> Result<Self> {
        let k = self.modes_in();
        if self.modes_out() != k {
            return Err(Error::DimensionMismatch(
                "only square Green's functions can be embedded".into(),
            ));
        }
        if targets.len() != k {
            return Err(Error::DimensionMismatch(format!(
                "{} target modes for a {k}-mode operation",
                targets.len()
            )));
        }
        let mut c = CMat::identity(modes, modes);
        let mut s = CMat::zeros(modes, modes);
        for (r, &tr) in targets.iter().enumerate() {
            for (cc, &tc) in targets.iter().enumerate() {
                c[(tr, tc)] = self.c[(r, cc)];
                s[(tr, tc)] = self.s[(r, cc)];
            }
            c[(tr, tr)] = self.c[(r, r)];
        }
        Ok(Self { c, s })
    }

    /// Composition `self ∘ other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.modes_in() != other.modes_out() {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}-in with {}-out",
                self.modes_in(),
                other.modes_out()
            )));
        }
        let c = &self.c * &other.c + &self.s * other.s.conjugate();
        let s = &self.c * &other.s + &self.s * other.c.conjugate();
        Ok(Self { c, s })
    }

    pub fn modes_in(&self) -> usize {
        self.c.ncols()
    }

    pub fn modes_out(&self) -> usize {
        self.c.nrows()
    }

    pub fn c(&self) -> &CMat {
        &self.c
    }

    pub fn s(&self) -> &CMat {
        &self.s
    }

    /// Full 2M_out×2M_in matrix `[[C, S], [S*, C*]]` acting on `[a, a†]`.
    pub fn full_matrix(&self) -> CMat {
        let (mo, mi) = (self.modes_out(), self.modes_in());
        let mut g = CMat::zeros(2 * mo, 2 * mi);
        g.view_mut((0, 0), (mo, mi)).copy_from(&self.c);
        g.view_mut((0, mi), (mo, mi)).copy_from(&self.s);
        g.view_mut((mo, 0), (mo, mi)).copy_from(&self.s.conjugate());
        g.view_mut((mo, mi), (mo, mi)).copy_from(&self.c.conjugate());
        g
    }

    /// Max-norm of the symplectic conditions `CC† − SS† − I` and
    /// `CSᵀ − SCᵀ`. Zero for any lossless Gaussian operation.
    pub fn symplectic_residual(&self) -> f64 {
        let n = self.modes_out();
        let a = &self.c * self.c.adjoint() - &self.s * self.s.adjoint() - CMat::identity(n, n);
        let b = &self.c * self.s.transpose() - &self.s * self.c.transpose();
        let max_abs = |m: &CMat| m.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        max_abs(&a).max(max_abs(&b))
    }
}
