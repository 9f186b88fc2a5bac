//! Spontaneous-emission dissipator and master-equation right-hand side.
//!
//! The master equation is
//!
//! ```text
//! dρ/dt = -i[H, ρ] + (Γ/2) (2 A_12 ρ̃ A_21 - A_22 ρ - ρ A_22)
//! ```
//!
//! where the recoil average
//!
//! ```text
//! ρ̃ = (1/2) ∫_{-1}^{1} ds W(s) e^{i s η_E (a+a†)} ρ e^{-i s η_E (a+a†)}
//! ```
//!
//! accounts for the momentum kick of the emitted photon, weighted by the
//! angular distribution `W(s)` and evaluated by Gauss-Legendre quadrature.
//! `W` is normalized so that `(1/2)∫W = 1`, which is what makes the jump term
//! trace preserving.
//!
//! [`master_rhs`] and [`build_liouvillian`] take an arbitrary vibronic
//! Hamiltonian. [`MasterEq`] precomputes everything reusable (drive bands,
//! recoil eigenbasis, quadrature phases) and is the right-hand side used by
//! the integrator; there the same quadrature sum is applied in the eigenbasis
//! of `a + a†` as an elementwise phase average.

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::fock::{flip, tensor_vibronic, Electronic, FockSpace};
use crate::hamiltonian::{kernel_band, DriveConfig};
use crate::{CMat, CVec};

/// Hard cap on the vibronic dimension for dense superoperator assembly.
pub const LIOUVILLIAN_DIM_CAP: usize = 40;

/// Angular distribution of the emitted photon over `s = cos θ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngularKind {
    /// `W(s) = (3/4)(1 + s²)`, the dipole pattern.
    Dipole,
    /// `W(s) = 1`.
    Isotropic,
}

/// Spontaneous-emission channel: rate `Γ`, emission Lamb-Dicke parameter
/// `η_E`, angular pattern, and the Gauss-Legendre order for the recoil
/// average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionSpec {
    pub gamma: f64,
    pub eta_e: f64,
    pub angular: AngularKind,
    pub quadrature_order: usize,
}

impl EmissionSpec {
    pub fn new(
        gamma: f64,
        eta_e: f64,
        angular: AngularKind,
        quadrature_order: usize,
    ) -> Result<Self, Error> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::invalid("relaxation rate", format!("gamma = {gamma}")));
        }
        if !(eta_e >= 0.0) || !eta_e.is_finite() {
            return Err(Error::invalid("emission Lamb-Dicke parameter", format!("eta_e = {eta_e}")));
        }
        if quadrature_order < 2 {
            return Err(Error::invalid(
                "quadrature order",
                format!("{quadrature_order}, need at least 2"),
            ));
        }
        Ok(EmissionSpec { gamma, eta_e, angular, quadrature_order })
    }
}

/// `W(s)`, normalized so that `(1/2) ∫_{-1}^{1} W(s) ds = 1`.
pub fn angular_distribution(kind: AngularKind, s: f64) -> f64 {
    debug_assert!((-1.0..=1.0).contains(&s));
    match kind {
        AngularKind::Dipole => 0.75 * (1.0 + s * s),
        AngularKind::Isotropic => 1.0,
    }
}

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Standard initial guess for the i-th root of P_n, then Newton.
        let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..60 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Matrix exponential by scaling and squaring with a Taylor core; the norm is
/// brought below 1/2 first, so the series stays short and accurate.
fn expm(a: &CMat) -> CMat {
    let n = a.nrows();
    let norm = a.norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a / C64::new(2f64.powi(squarings as i32), 0.0);
    let mut result = CMat::identity(n, n);
    let mut term = CMat::identity(n, n);
    for k in 1..=24 {
        term = &term * &scaled / C64::new(f64::from(k), 0.0);
        result += &term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Recoil kick operator `e^{i β (a + a†)}` on the truncated space.
///
/// Computed as a matrix exponential of the truncated (Hermitian) generator,
/// so it is unitary by construction; truncation shows up only as deviation
/// from the closed-form displacement matrix elements near the boundary.
pub fn recoil_operator(beta: f64, space: &FockSpace) -> CMat {
    assert!(beta.is_finite());
    let x = space.annihilation() + space.creation();
    expm(&(x * C64::new(0.0, beta)))
}

/// Quadrature nodes and the combined coefficients `c_k = w_k W(s_k) / 2`.
fn quadrature_coefficients(spec: &EmissionSpec, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (nodes, weights) = gauss_legendre(order);
    let coeffs = nodes
        .iter()
        .zip(&weights)
        .map(|(&s, &w)| 0.5 * w * angular_distribution(spec.angular, s))
        .collect();
    (nodes, coeffs)
}

fn recoil_average_at_order(
    rho: &CMat,
    spec: &EmissionSpec,
    space: &FockSpace,
    order: usize,
) -> CMat {
    let n = space.dim();
    let (nodes, coeffs) = quadrature_coefficients(spec, order);
    let dim = rho.nrows();
    let mut out = CMat::zeros(dim, dim);
    for (&s, &c) in nodes.iter().zip(&coeffs) {
        let u = recoil_operator(s * spec.eta_e, space);
        let u_full = if dim == n {
            u
        } else {
            assert_eq!(dim, 2 * n, "state must be vibrational (N) or vibronic (2N)");
            tensor_vibronic(&CMat::identity(2, 2), &u)
        };
        out += (&u_full * rho * u_full.adjoint()) * C64::new(c, 0.0);
    }
    out
}

/// Angular recoil average `ρ̃` of a vibrational (`N x N`) or vibronic
/// (`2N x 2N`) density matrix.
///
/// The result is checked by doubling the quadrature order; if that moves the
/// answer by more than `1e-8` the average has not converged and the error
/// asks for a larger order.
pub fn recoil_average(rho: &CMat, spec: &EmissionSpec, space: &FockSpace) -> Result<CMat, Error> {
    if spec.eta_e == 0.0 {
        return Ok(rho.clone());
    }
    let base = recoil_average_at_order(rho, spec, space, spec.quadrature_order);
    let doubled = recoil_average_at_order(rho, spec, space, 2 * spec.quadrature_order);
    let delta = (&base - &doubled).norm();
    if delta > 1e-8 {
        return Err(Error::QuadratureNotConverged { order: spec.quadrature_order, delta });
    }
    Ok(base)
}

/// Master-equation right-hand side for an arbitrary vibronic Hamiltonian.
///
/// Returns `-i[H, ρ] + (Γ/2)(2 A_12 ρ̃ A_21 - A_22 ρ - ρ A_22)` with `ρ̃` the
/// recoil average of the full vibronic `ρ` (the kick acts on the vibrational
/// factor only).
pub fn master_rhs(
    rho: &CMat,
    h: &CMat,
    spec: &EmissionSpec,
    space: &FockSpace,
) -> Result<CMat, Error> {
    MasterEq::from_hamiltonian(h.clone(), spec, space).map(|eq| eq.rhs(rho))
}

/// Dense superoperator `L` with `L vec(ρ) = vec(master_rhs(ρ))` in
/// column-major vectorization; the null space of `L` carries the steady
/// states.
pub fn build_liouvillian(h: &CMat, spec: &EmissionSpec, space: &FockSpace) -> Result<CMat, Error> {
    let dim = space.vibronic_dim();
    if h.nrows() != dim || h.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: h.nrows() });
    }
    if dim > LIOUVILLIAN_DIM_CAP {
        return Err(Error::SuperoperatorTooLarge { dim, cap: LIOUVILLIAN_DIM_CAP });
    }
    let id = CMat::identity(dim, dim);
    let i = C64::new(0.0, 1.0);

    // vec(AρB) = (Bᵀ ⊗ A) vec(ρ), so -i[H, ρ] becomes -i(I ⊗ H - Hᵀ ⊗ I).
    let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * (-i);

    if spec.gamma > 0.0 {
        let g = C64::new(spec.gamma, 0.0);
        let a12 = flip(Electronic::Ground, Electronic::Excited);
        let a22 = flip(Electronic::Excited, Electronic::Excited);
        let a22_full = tensor_vibronic(&a22, &space.identity());
        l -= (id.kronecker(&a22_full) + a22_full.transpose().kronecker(&id)) * (g / 2.0);

        // Jump term: Γ Σ_k c_k conj(A_12 ⊗ U_k) ⊗ (A_12 ⊗ U_k).
        let (nodes, coeffs) = quadrature_coefficients(spec, spec.quadrature_order);
        for (&s, &c) in nodes.iter().zip(&coeffs) {
            let u = recoil_operator(s * spec.eta_e, space);
            let a = tensor_vibronic(&a12, &u);
            l += a.conjugate().kronecker(&a) * (g * C64::new(c, 0.0));
        }
    }
    Ok(l)
}

enum Coupling {
    /// Two-sideband drive stored as its nonzero bands:
    /// `band[r] = <r|K|r+s>` for each drive order `s`.
    Bands { j: usize, m: usize, band_j: Vec<C64>, band_m: Vec<C64> },
    /// Arbitrary dense Hamiltonian.
    Dense(CMat),
}

/// Precomputed master-equation right-hand side.
///
/// For drive configurations the commutator uses the band structure of the
/// kernel operator, and the recoil average is evaluated in the eigenbasis of
/// `a + a†`, where the whole quadrature sum collapses to one elementwise
/// phase matrix. Both shortcuts are exact reorganizations of [`master_rhs`]
/// and are cross-checked against it in the tests.
pub struct MasterEq {
    space: FockSpace,
    gamma: f64,
    quadrature_order: usize,
    coupling: Coupling,
    recoil: Option<RecoilAverager>,
    hamiltonian: CMat,
}

struct RecoilAverager {
    /// Eigenvectors of `a + a†` (columns) and their conjugate transpose.
    vecs: CMat,
    vecs_adj: CMat,
    /// Elementwise quadrature phases `Φ_ij = Σ_k c_k e^{i s_k η_E (d_i-d_j)}`
    /// at the configured order and at twice that order (convergence checks).
    phase: CMat,
    phase_doubled: CMat,
}

impl RecoilAverager {
    fn new(spec: &EmissionSpec, space: &FockSpace) -> Self {
        let x = space.annihilation() + space.creation();
        let eig = x.symmetric_eigen();
        let d = eig.eigenvalues;
        let vecs = eig.eigenvectors;
        let vecs_adj = vecs.adjoint();
        let build_phase = |order: usize| -> CMat {
            let (nodes, coeffs) = quadrature_coefficients(spec, order);
            let n = space.dim();
            CMat::from_fn(n, n, |i, j| {
                let diff = spec.eta_e * (d[i] - d[j]);
                nodes.iter().zip(&coeffs).map(|(&s, &c)| C64::from_polar(c, s * diff)).sum()
            })
        };
        let phase = build_phase(spec.quadrature_order);
        let phase_doubled = build_phase(2 * spec.quadrature_order);
        RecoilAverager { vecs, vecs_adj, phase, phase_doubled }
    }

    fn apply(&self, m: &CMat, doubled: bool) -> CMat {
        let phase = if doubled { &self.phase_doubled } else { &self.phase };
        let rotated = &self.vecs_adj * m * &self.vecs;
        let filtered = rotated.component_mul(phase);
        &self.vecs * filtered * &self.vecs_adj
    }
}

impl MasterEq {
    /// Right-hand side for a two-drive configuration.
    pub fn new(config: &DriveConfig, spec: &EmissionSpec, space: &FockSpace) -> Result<Self, Error> {
        let n = space.dim();
        if n <= config.drive_j.sideband as usize {
            return Err(Error::TruncationBelowSideband { dim: n, order: config.drive_j.sideband });
        }
        let hamiltonian = crate::hamiltonian::build_interaction_hamiltonian(config, space)?;
        let coupling = Coupling::Bands {
            j: config.drive_j.sideband as usize,
            m: config.drive_m.sideband as usize,
            band_j: kernel_band(&config.drive_j, space),
            band_m: kernel_band(&config.drive_m, space),
        };
        Ok(MasterEq {
            space: *space,
            gamma: spec.gamma,
            quadrature_order: spec.quadrature_order,
            recoil: Self::maybe_recoil(spec, space),
            coupling,
            hamiltonian,
        })
    }

    /// Right-hand side for an arbitrary vibronic Hamiltonian.
    pub fn from_hamiltonian(h: CMat, spec: &EmissionSpec, space: &FockSpace) -> Result<Self, Error> {
        let dim = space.vibronic_dim();
        if h.nrows() != dim || h.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: h.nrows() });
        }
        Ok(MasterEq {
            space: *space,
            gamma: spec.gamma,
            quadrature_order: spec.quadrature_order,
            recoil: Self::maybe_recoil(spec, space),
            coupling: Coupling::Dense(h.clone()),
            hamiltonian: h,
        })
    }

    fn maybe_recoil(spec: &EmissionSpec, space: &FockSpace) -> Option<RecoilAverager> {
        (spec.gamma > 0.0 && spec.eta_e > 0.0).then(|| RecoilAverager::new(spec, space))
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// The vibronic Hamiltonian this right-hand side integrates.
    pub fn hamiltonian(&self) -> &CMat {
        &self.hamiltonian
    }

    /// Verify on a concrete state that the configured quadrature order has
    /// converged (doubling it moves the jump term by less than `1e-8`).
    pub fn check_quadrature(&self, rho: &CMat) -> Result<(), Error> {
        let Some(recoil) = &self.recoil else { return Ok(()) };
        let n = self.space.dim();
        let ee = rho.view((n, n), (n, n)).into_owned();
        let delta = (recoil.apply(&ee, false) - recoil.apply(&ee, true)).norm();
        if delta > 1e-8 {
            return Err(Error::QuadratureNotConverged { order: self.quadrature_order, delta });
        }
        Ok(())
    }

    /// `dρ/dt` for a vibronic density matrix.
    pub fn rhs(&self, rho: &CMat) -> CMat {
        let n = self.space.dim();
        let dim = 2 * n;
        debug_assert_eq!(rho.nrows(), dim);
        let minus_i = C64::new(0.0, -1.0);
        let mut out = match &self.coupling {
            Coupling::Dense(h) => (h * rho - rho * h) * minus_i,
            Coupling::Bands { .. } => {
                // Block commutator with H = [[0, K†], [K, 0]]:
                //   [H,ρ]_gg = K†ρ_eg - ρ_ge K      [H,ρ]_ge = K†ρ_ee - ρ_gg K†
                //   [H,ρ]_eg = Kρ_gg - ρ_ee K       [H,ρ]_ee = Kρ_ge - ρ_eg K†
                let gg = rho.view((0, 0), (n, n)).into_owned();
                let ge = rho.view((0, n), (n, n)).into_owned();
                let eg = rho.view((n, 0), (n, n)).into_owned();
                let ee = rho.view((n, n), (n, n)).into_owned();
                let mut comm = CMat::zeros(dim, dim);
                comm.view_mut((0, 0), (n, n))
                    .copy_from(&((self.kdag_mul(&eg) - self.mul_k(&ge)) * minus_i));
                comm.view_mut((0, n), (n, n))
                    .copy_from(&((self.kdag_mul(&ee) - self.mul_kdag(&gg)) * minus_i));
                comm.view_mut((n, 0), (n, n))
                    .copy_from(&((self.k_mul(&gg) - self.mul_k(&ee)) * minus_i));
                comm.view_mut((n, n), (n, n))
                    .copy_from(&((self.k_mul(&ge) - self.mul_kdag(&eg)) * minus_i));
                comm
            }
        };

        if self.gamma > 0.0 {
            let half_g = C64::new(0.5 * self.gamma, 0.0);
            let g = C64::new(self.gamma, 0.0);
            let ee = rho.view((n, n), (n, n)).into_owned();
            // -(Γ/2)(A_22 ρ + ρ A_22): damps coherences at Γ/2, populations at Γ.
            out.view_mut((0, n), (n, n))
                .zip_apply(&rho.view((0, n), (n, n)), |o, r| *o -= r * half_g);
            out.view_mut((n, 0), (n, n))
                .zip_apply(&rho.view((n, 0), (n, n)), |o, r| *o -= r * half_g);
            out.view_mut((n, n), (n, n)).zip_apply(&ee, |o, r| *o -= r * g);
            // +Γ ρ̃_ee into the ground-ground block.
            let jump = match &self.recoil {
                Some(recoil) => recoil.apply(&ee, false),
                None => ee,
            };
            out.view_mut((0, 0), (n, n)).zip_apply(&jump, |o, r| *o += r * g);
        }
        out
    }

    // Banded products with K = Σ_s band_s shifted by its order s; all four
    // are O(N²) per band.

    /// `K · M`
    fn k_mul(&self, m: &CMat) -> CMat {
        let Coupling::Bands { j, m: mm, band_j, band_m } = &self.coupling else { unreachable!() };
        let n = self.space.dim();
        let mut out = CMat::zeros(n, n);
        for (s, band) in [(*j, band_j), (*mm, band_m)] {
            for c in 0..n {
                for r in 0..band.len() {
                    out[(r, c)] += band[r] * m[(r + s, c)];
                }
            }
        }
        out
    }

    /// `K† · M`
    fn kdag_mul(&self, m: &CMat) -> CMat {
        let Coupling::Bands { j, m: mm, band_j, band_m } = &self.coupling else { unreachable!() };
        let n = self.space.dim();
        let mut out = CMat::zeros(n, n);
        for (s, band) in [(*j, band_j), (*mm, band_m)] {
            for c in 0..n {
                for r in 0..band.len() {
                    out[(r + s, c)] += band[r].conj() * m[(r, c)];
                }
            }
        }
        out
    }

    /// `M · K`
    fn mul_k(&self, m: &CMat) -> CMat {
        let Coupling::Bands { j, m: mm, band_j, band_m } = &self.coupling else { unreachable!() };
        let n = self.space.dim();
        let mut out = CMat::zeros(n, n);
        for (s, band) in [(*j, band_j), (*mm, band_m)] {
            for (c, &amp) in band.iter().enumerate() {
                for r in 0..n {
                    out[(r, c + s)] += m[(r, c)] * amp;
                }
            }
        }
        out
    }

    /// `M · K†`
    fn mul_kdag(&self, m: &CMat) -> CMat {
        let Coupling::Bands { j, m: mm, band_j, band_m } = &self.coupling else { unreachable!() };
        let n = self.space.dim();
        let mut out = CMat::zeros(n, n);
        for (s, band) in [(*j, band_j), (*mm, band_m)] {
            for (c, &amp) in band.iter().enumerate() {
                let amp = amp.conj();
                for r in 0..n {
                    out[(r, c)] += m[(r, c + s)] * amp;
                }
            }
        }
        out
    }
}

/// Column-major vectorization matching [`build_liouvillian`].
pub fn vectorize(rho: &CMat) -> CVec {
    CVec::from_column_slice(rho.as_slice())
}

/// Inverse of [`vectorize`].
pub fn unvectorize(v: &CVec, dim: usize) -> CMat {
    assert_eq!(v.len(), dim * dim);
    CMat::from_column_slice(dim, dim, v.as_slice())
}
