//! Truncated Fock space and two-level (vibronic) operator algebra.
//!
//! Operators are dense complex matrices: the Liouvillian construction and the
//! singular value decompositions downstream dominate the cost and the spaces
//! stay small. The electronic basis is ordered (|1> ground, |2> excited) and
//! the full vibronic index is Fock-major within each electronic block, so a
//! `2N x 2N` operator splits into four `N x N` blocks with the ground-ground
//! block first.

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::{CMat, CVec};

/// Population allowed in the top two Fock levels before a state counts as
/// leaking into the truncation boundary.
pub const TRUNCATION_LEAK_LIMIT: f64 = 1e-8;

/// Truncated single-mode Fock space with levels `0..N-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    dim: usize,
}

impl FockSpace {
    pub fn new(dim: usize) -> Result<Self, Error> {
        if dim < 2 {
            return Err(Error::invalid("fock truncation", format!("N = {dim}, need N >= 2")));
        }
        Ok(FockSpace { dim })
    }

    /// Number of Fock levels kept.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the two-level ⊗ Fock product space.
    pub fn vibronic_dim(&self) -> usize {
        2 * self.dim
    }

    /// Annihilation operator: `<n-1| a |n> = √n`.
    pub fn annihilation(&self) -> CMat {
        let mut a = CMat::zeros(self.dim, self.dim);
        for n in 1..self.dim {
            a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        a
    }

    /// Creation operator `a†`.
    pub fn creation(&self) -> CMat {
        self.annihilation().adjoint()
    }

    /// Number operator `n̂ = a†a` (diagonal `0..N-1`).
    pub fn number(&self) -> CMat {
        self.diag_of_number(|n| n as f64).expect("finite by construction")
    }

    pub fn identity(&self) -> CMat {
        CMat::identity(self.dim, self.dim)
    }

    /// `a^s` with exact matrix elements `<n-s| a^s |n> = √(n!/(n-s)!)`.
    pub fn lowering_power(&self, s: u32) -> CMat {
        let mut out = CMat::zeros(self.dim, self.dim);
        let s = s as usize;
        for col in s..self.dim {
            let mut amp = 1.0;
            for i in 0..s {
                amp *= (col - i) as f64;
            }
            out[(col - s, col)] = C64::new(amp.sqrt(), 0.0);
        }
        out
    }

    /// Diagonal operator `f(n̂) = diag(f(0), ..., f(N-1))`.
    pub fn diag_of_number<F>(&self, f: F) -> Result<CMat, Error>
    where
        F: Fn(usize) -> f64,
    {
        let mut out = CMat::zeros(self.dim, self.dim);
        for n in 0..self.dim {
            let v = f(n);
            if !v.is_finite() {
                return Err(Error::NonFiniteDiagonal { level: n });
            }
            out[(n, n)] = C64::new(v, 0.0);
        }
        Ok(out)
    }

    /// Number state `|q>`.
    pub fn number_state(&self, q: usize) -> Result<PureVibrationalState, Error> {
        if q >= self.dim {
            return Err(Error::invalid(
                "number state",
                format!("q = {q} outside the truncation 0..{}", self.dim - 1),
            ));
        }
        let mut v = CVec::zeros(self.dim);
        v[q] = C64::new(1.0, 0.0);
        Ok(PureVibrationalState { coefficients: v })
    }

    /// Coherent state `|α>`, renormalized over the truncated levels.
    pub fn coherent_state(&self, alpha: C64) -> PureVibrationalState {
        let mut v = CVec::zeros(self.dim);
        let mut amp = C64::new(1.0, 0.0);
        v[0] = amp;
        for n in 1..self.dim {
            amp *= alpha / C64::new((n as f64).sqrt(), 0.0);
            v[n] = amp;
        }
        let norm = v.norm();
        PureVibrationalState { coefficients: v / C64::new(norm, 0.0) }
    }

    /// Thermal state with mean occupation `nbar`, renormalized over the kept
    /// levels. Errors when the geometric tail beyond the truncation carries
    /// more than `1e-8` of the weight.
    pub fn thermal_state(&self, nbar: f64) -> Result<DensityMatrix, Error> {
        if !(nbar >= 0.0) || !nbar.is_finite() {
            return Err(Error::invalid("thermal occupation", format!("nbar = {nbar}")));
        }
        if nbar == 0.0 {
            let mut m = CMat::zeros(self.dim, self.dim);
            m[(0, 0)] = C64::new(1.0, 0.0);
            return Ok(DensityMatrix { mat: m });
        }
        let r = nbar / (1.0 + nbar);
        let tail = r.powi(self.dim as i32);
        if tail >= TRUNCATION_LEAK_LIMIT {
            return Err(Error::ThermalTailTooHeavy { nbar, dim: self.dim, tail });
        }
        let mut m = CMat::zeros(self.dim, self.dim);
        let mut w = 1.0;
        let mut total = 0.0;
        for n in 0..self.dim {
            m[(n, n)] = C64::new(w, 0.0);
            total += w;
            w *= r;
        }
        Ok(DensityMatrix { mat: m / C64::new(total, 0.0) })
    }
}

/// Electronic levels: `|1>` is the ground state, `|2>` the excited state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Electronic {
    Ground,
    Excited,
}

impl Electronic {
    pub fn index(self) -> usize {
        match self {
            Electronic::Ground => 0,
            Electronic::Excited => 1,
        }
    }
}

/// Electronic flip operator `A_ab = |a><b|` as a 2x2 matrix.
pub fn flip(a: Electronic, b: Electronic) -> CMat {
    let mut m = CMat::zeros(2, 2);
    m[(a.index(), b.index())] = C64::new(1.0, 0.0);
    m
}

/// Kronecker product of a 2x2 electronic part with a vibrational part.
pub fn tensor_vibronic(electronic: &CMat, vibrational: &CMat) -> CMat {
    assert_eq!(electronic.nrows(), 2, "electronic part must be 2x2");
    assert_eq!(electronic.ncols(), 2, "electronic part must be 2x2");
    electronic.kronecker(vibrational)
}

/// `|e> ⊗ |ψ>` as a vibronic vector of length `2N`.
pub fn vibronic_pure(e: Electronic, psi: &CVec) -> CVec {
    let n = psi.len();
    let mut out = CVec::zeros(2 * n);
    let off = e.index() * n;
    out.rows_mut(off, n).copy_from(psi);
    out
}

/// Extract the `(row, col)` electronic block of a vibronic operator.
pub fn vibronic_block(m: &CMat, row: Electronic, col: Electronic) -> CMat {
    assert_eq!(m.nrows() % 2, 0, "vibronic operator must have even dimension");
    let n = m.nrows() / 2;
    m.view((row.index() * n, col.index() * n), (n, n)).into_owned()
}

/// Population in the top two Fock levels of a vibrational (`N`) or vibronic
/// (`2N`) density matrix; compare against [`TRUNCATION_LEAK_LIMIT`].
pub fn truncation_leak(rho: &CMat, space: &FockSpace) -> f64 {
    let n = space.dim();
    let top = |block_off: usize| -> f64 {
        rho[(block_off + n - 1, block_off + n - 1)].re + rho[(block_off + n - 2, block_off + n - 2)].re
    };
    if rho.nrows() == n {
        top(0)
    } else {
        assert_eq!(rho.nrows(), 2 * n, "expected N x N or 2N x 2N");
        top(0) + top(n)
    }
}

/// Normalized pure vibrational state.
#[derive(Debug, Clone, PartialEq)]
pub struct PureVibrationalState {
    coefficients: CVec,
}

impl PureVibrationalState {
    /// Wrap a coefficient vector, requiring unit norm to `1e-12`.
    pub fn new(coefficients: CVec) -> Result<Self, Error> {
        let norm = coefficients.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("pure state", format!("norm = {norm}, expected 1")));
        }
        Ok(PureVibrationalState { coefficients })
    }

    /// Normalize an arbitrary nonzero coefficient vector.
    pub fn normalized(coefficients: CVec) -> Result<Self, Error> {
        let norm = coefficients.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("pure state", format!("norm = {norm}")));
        }
        Ok(PureVibrationalState { coefficients: coefficients / C64::new(norm, 0.0) })
    }

    pub fn vector(&self) -> &CVec {
        &self.coefficients
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    /// `<n̂>` of the state.
    pub fn mean_phonon(&self) -> f64 {
        self.coefficients.iter().enumerate().map(|(n, c)| n as f64 * c.norm_sqr()).sum()
    }

    /// Projector `|ψ><ψ|` as a density matrix.
    pub fn density(&self) -> DensityMatrix {
        let v = &self.coefficients;
        DensityMatrix { mat: v * v.adjoint() }
    }
}

/// Validated density matrix (Hermitian, unit trace, positive semidefinite up
/// to `-1e-10` on the smallest eigenvalue).
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMat,
}

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self, Error> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch { expected: mat.nrows(), got: mat.ncols() });
        }
        let herm = (&mat - mat.adjoint()).norm() / 2.0;
        if herm > 1e-12 * mat.norm().max(1.0) {
            return Err(Error::invalid("density matrix", format!("Hermiticity defect {herm:.3e}")));
        }
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > 1e-12 || trace.im.abs() > 1e-12 {
            return Err(Error::invalid("density matrix", format!("trace = {trace}")));
        }
        let min_eig = min_eigenvalue(&mat);
        if min_eig < -1e-10 {
            return Err(Error::invalid(
                "density matrix",
                format!("minimum eigenvalue {min_eig:.3e}"),
            ));
        }
        Ok(DensityMatrix { mat })
    }

    /// Wrap without validation; for internal states that are corrected and
    /// checked elsewhere.
    pub(crate) fn new_unchecked(mat: CMat) -> Self {
        DensityMatrix { mat }
    }

    /// Pure-state density from any nonzero vector.
    pub fn from_pure(v: &CVec) -> Result<Self, Error> {
        let norm = v.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("pure state", format!("norm = {norm}")));
        }
        let u = v / C64::new(norm, 0.0);
        Ok(DensityMatrix { mat: &u * u.adjoint() })
    }

    pub fn matrix(&self) -> &CMat {
        &self.mat
    }

    pub fn into_matrix(self) -> CMat {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.mat)
    }
}

/// Smallest eigenvalue of a Hermitian matrix.
pub(crate) fn min_eigenvalue(m: &CMat) -> f64 {
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn annihilation_on_two_levels() {
        let sp = FockSpace::new(2).unwrap();
        let a = sp.annihilation();
        assert_eq!(a[(0, 1)], c(1.0, 0.0));
        assert_eq!(a.map(|z| z.norm_sqr()).sum(), 1.0);
        // a|0> = 0
        let vac = sp.number_state(0).unwrap();
        assert_eq!((&a * vac.vector()).norm(), 0.0);
    }

    #[test]
    fn number_operator_diagonal() {
        let sp = FockSpace::new(5).unwrap();
        let n_op = sp.creation() * sp.annihilation();
        for n in 0..5 {
            assert!((n_op[(n, n)] - c(n as f64, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn truncated_commutator_structure() {
        // [a, a†] = I - N |N-1><N-1| on the truncated space.
        let sp = FockSpace::new(6).unwrap();
        let a = sp.annihilation();
        let ad = sp.creation();
        let comm = &a * &ad - &ad * &a;
        let mut expect = sp.identity();
        expect[(5, 5)] = c(1.0 - 6.0, 0.0);
        assert!((comm - expect).norm() < 1e-14);
    }

    #[test]
    fn lowering_power_matches_repeated_multiplication() {
        let sp = FockSpace::new(8).unwrap();
        let a = sp.annihilation();
        let a3 = &a * &a * &a;
        assert!((sp.lowering_power(3) - a3).norm() < 1e-12);
        assert_eq!(sp.lowering_power(0), sp.identity());
    }

    #[test]
    fn diag_of_number_values() {
        let sp = FockSpace::new(3).unwrap();
        assert_eq!(sp.diag_of_number(|_| 1.0).unwrap(), sp.identity());
        let diag = sp.diag_of_number(|n| crate::laguerre::eval(n as u32, 0, 1.0)).unwrap();
        assert!((diag[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(diag[(1, 1)].re.abs() < 1e-14);
        assert!((diag[(2, 2)].re + 0.5).abs() < 1e-14);
    }

    #[test]
    fn diag_of_number_rejects_non_finite() {
        let sp = FockSpace::new(4).unwrap();
        let err = sp.diag_of_number(|n| if n == 2 { f64::NAN } else { 0.0 }).unwrap_err();
        assert!(matches!(err, Error::NonFiniteDiagonal { level: 2 }));
    }

    #[test]
    fn number_states_orthonormal() {
        let sp = FockSpace::new(4).unwrap();
        for q in 0..4 {
            let sq = sp.number_state(q).unwrap();
            assert!((sq.mean_phonon() - q as f64).abs() < 1e-14);
            for p in 0..4 {
                let spv = sp.number_state(p).unwrap();
                let overlap = sq.vector().dotc(spv.vector()).norm();
                assert!((overlap - if p == q { 1.0 } else { 0.0 }).abs() < 1e-14);
            }
        }
        assert!(sp.number_state(4).is_err());
    }

    #[test]
    fn thermal_state_limits() {
        let sp = FockSpace::new(30).unwrap();
        let cold = sp.thermal_state(0.0).unwrap();
        assert!((cold.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);

        let th = sp.thermal_state(0.5).unwrap();
        let r: f64 = 1.0 / 3.0;
        let expect = (1.0 - r) / (1.0 - r.powi(30));
        assert!((th.matrix()[(0, 0)].re - expect).abs() < 1e-14);
        assert!((th.matrix().trace().re - 1.0).abs() < 1e-14);

        // Tail too heavy for a small truncation.
        let tiny = FockSpace::new(8).unwrap();
        assert!(matches!(tiny.thermal_state(2.0), Err(Error::ThermalTailTooHeavy { .. })));
    }

    #[test]
    fn coherent_state_moments() {
        let sp = FockSpace::new(25).unwrap();
        let st = sp.coherent_state(c(1.0, 0.0));
        assert!((st.vector().norm() - 1.0).abs() < 1e-14);
        assert!((st.mean_phonon() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tensor_identities() {
        let sp = FockSpace::new(3).unwrap();
        let id2 = CMat::identity(2, 2);
        assert_eq!(tensor_vibronic(&id2, &sp.identity()), CMat::identity(6, 6));
        let a22 = flip(Electronic::Excited, Electronic::Excited);
        let tr = tensor_vibronic(&a22, &sp.identity()).trace();
        assert!((tr.re - 3.0).abs() < 1e-14);
    }

    #[test]
    fn vibronic_blocks_round_trip() {
        let sp = FockSpace::new(3).unwrap();
        let k = sp.annihilation();
        let h = tensor_vibronic(&flip(Electronic::Excited, Electronic::Ground), &k);
        assert_eq!(vibronic_block(&h, Electronic::Excited, Electronic::Ground), k);
        assert_eq!(
            vibronic_block(&h, Electronic::Ground, Electronic::Ground),
            CMat::zeros(3, 3)
        );
    }

    #[test]
    fn density_matrix_invariants() {
        let sp = FockSpace::new(12).unwrap();
        let rho = sp.thermal_state(0.2).unwrap();
        assert!(rho.min_eigenvalue() > -1e-14);
        let bad = CMat::identity(4, 4);
        assert!(DensityMatrix::new(bad).is_err());
    }

    #[test]
    fn truncation_leak_reports_top_levels() {
        let sp = FockSpace::new(4).unwrap();
        let top = sp.number_state(3).unwrap().density();
        assert!((truncation_leak(top.matrix(), &sp) - 1.0).abs() < 1e-14);
        let vac = sp.number_state(0).unwrap().density();
        assert_eq!(truncation_leak(vac.matrix(), &sp), 0.0);
    }

    proptest! {
        #[test]
        fn mixed_product_property(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut rand_mat = |r: usize, c: usize| {
                CMat::from_fn(r, c, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            };
            let (a, c_) = (rand_mat(2, 2), rand_mat(2, 2));
            let (b, d) = (rand_mat(3, 3), rand_mat(3, 3));
            let lhs = tensor_vibronic(&a, &b) * tensor_vibronic(&c_, &d);
            let rhs = tensor_vibronic(&(&a * &c_), &(&b * &d));
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn tensor_preserves_hermiticity(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut rand_herm = |n: usize| {
                let m = CMat::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                (&m + m.adjoint()) / C64::new(2.0, 0.0)
            };
            let (el, vib) = (rand_herm(2), rand_herm(4));
            let t = tensor_vibronic(&el, &vib);
            prop_assert!((&t - t.adjoint()).norm() < 1e-14);
        }
    }
}
