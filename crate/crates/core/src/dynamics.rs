//! Master-equation time evolution, steady states, and state diagnostics.
//!
//! Evolution uses an embedded Dormand-Prince 5(4) pair with FSAL and
//! proportional step control, driving the [`MasterEq`] right-hand side as a
//! black box; the quadrature-averaged jump term makes the right-hand side
//! cheapest to treat that way. Steady states come from the singular value
//! decomposition of the vectorized Liouvillian, with the evolution endpoint
//! as the cross-check whenever the kernel is one dimensional.

use num_complex::Complex64 as C64;

use crate::dissipation::MasterEq;
use crate::error::Error;
use crate::fock::{min_eigenvalue, DensityMatrix, FockSpace};
use crate::{CMat, CVec};

/// Largest Fock truncation for which the dense null-space path is allowed
/// (superoperators up to 1024²).
pub const NULLSPACE_FOCK_CAP: usize = 16;

/// Integration controls. Times are in units of `1/Γ` for the conventional
/// `Γ = 1` normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionConfig {
    pub t_final: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Time between recorded snapshots.
    pub sample_stride: f64,
}

impl EvolutionConfig {
    pub fn new(
        t_final: f64,
        rel_tol: f64,
        abs_tol: f64,
        max_step: f64,
        sample_stride: f64,
    ) -> Result<Self, Error> {
        let cfg = EvolutionConfig { t_final, rel_tol, abs_tol, max_step, sample_stride };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::invalid("t_final", format!("{}", self.t_final)));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol <= 1e-3) {
            return Err(Error::invalid("rel_tol", format!("{}, need 0 < rel_tol <= 1e-3", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::invalid("abs_tol", format!("{}", self.abs_tol)));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::invalid("max_step", format!("{}", self.max_step)));
        }
        if !(self.sample_stride > 0.0) {
            return Err(Error::invalid("sample_stride", format!("{}", self.sample_stride)));
        }
        Ok(())
    }
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            t_final: 400.0,
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_step: 2.0,
            sample_stride: 2.0,
        }
    }
}

/// Observables recorded at one snapshot.
#[derive(Debug, Clone)]
pub struct ObservableRecord {
    pub time: f64,
    pub excited_population: f64,
    pub mean_phonon: f64,
    pub purity: f64,
    pub fluorescence: f64,
    pub fidelity_to_target: Option<f64>,
    pub fock_populations: Vec<f64>,
    pub min_eigenvalue: f64,
    /// Frobenius norm of the right-hand side at the snapshot; the steadiness
    /// witness used by the early-stop detector.
    pub rhs_norm: f64,
}

/// Recorded evolution.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<DensityMatrix>,
    pub records: Vec<ObservableRecord>,
    /// True when the steady-state detector stopped the run before `t_final`.
    pub converged_early: bool,
    /// Largest Hermiticity/trace correction applied at any snapshot.
    pub max_correction: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &DensityMatrix {
        self.snapshots.last().expect("trajectory has at least the initial snapshot")
    }

    pub fn final_record(&self) -> &ObservableRecord {
        self.records.last().expect("trajectory has at least the initial snapshot")
    }
}

/// Stop once `‖dρ/dt‖_F < 1e-10` and fluorescence `< 1e-8 Γ` hold for this
/// many consecutive samples.
const STEADY_SAMPLES: usize = 10;
const STEADY_RHS_NORM: f64 = 1e-10;
const STEADY_FLUORESCENCE: f64 = 1e-8;

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0];
const A6: [f64; 5] =
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0];
const B5: [f64; 6] =
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0];
// b5 - b4, applied to k1..k7 for the embedded error estimate.
const ERR: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

fn combination(y: &CMat, h: f64, ks: &[&CMat], coeffs: &[f64]) -> CMat {
    let mut out = y.clone();
    for (k, &c) in ks.iter().zip(coeffs) {
        if c != 0.0 {
            out.zip_apply(*k, |o, kv| *o += kv * C64::new(h * c, 0.0));
        }
    }
    out
}

/// Integrate the master equation from `rho0`.
///
/// Snapshots are taken every `sample_stride`: each recorded state is
/// re-Hermitized as `(ρ+ρ†)/2` and trace renormalized, the applied correction
/// is logged and must stay below `1e-8`, and integration continues from the
/// corrected state. `target`, when given, is a pure vibronic vector against
/// which a fidelity column is recorded. The run stops early once the
/// steady-state detector fires.
pub fn evolve(
    rho0: &DensityMatrix,
    eq: &MasterEq,
    cfg: &EvolutionConfig,
    target: Option<&CVec>,
) -> Result<Trajectory, Error> {
    cfg.validate()?;
    let dim = eq.space().vibronic_dim();
    if rho0.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rho0.dim() });
    }
    if let Some(t) = target {
        if t.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: t.len() });
        }
    }
    eq.check_quadrature(rho0.matrix())?;

    let gamma = eq.gamma();
    let mut rho = rho0.matrix().clone();
    let mut t = 0.0_f64;
    let mut dt = (0.01 * cfg.sample_stride).min(cfg.max_step).min(1e-2);
    let mut k1 = eq.rhs(&rho);

    let mut traj = Trajectory {
        times: Vec::new(),
        snapshots: Vec::new(),
        records: Vec::new(),
        converged_early: false,
        max_correction: 0.0,
        steps_accepted: 0,
        steps_rejected: 0,
    };
    let mut steady_run = 0_usize;

    // Record t = 0.
    record_sample(&mut traj, &mut rho, &k1, t, gamma, target, eq.space())?;
    if let Some(done) = update_steady(&mut steady_run, traj.records.last().unwrap(), gamma) {
        traj.converged_early = done;
    }

    let mut next_sample = cfg.sample_stride.min(cfg.t_final);
    'outer: while t < cfg.t_final {
        // Land exactly on the sample boundary.
        let dt_step = dt.min(cfg.max_step).min(next_sample - t);
        let h = dt_step;
        if h < 1e-13 * cfg.t_final.max(1.0) {
            return Err(Error::StepSizeUnderflow { time: t, dt: h });
        }

        let k2 = eq.rhs(&combination(&rho, h, &[&k1], &A2));
        let k3 = eq.rhs(&combination(&rho, h, &[&k1, &k2], &A3));
        let k4 = eq.rhs(&combination(&rho, h, &[&k1, &k2, &k3], &A4));
        let k5 = eq.rhs(&combination(&rho, h, &[&k1, &k2, &k3, &k4], &A5));
        let k6 = eq.rhs(&combination(&rho, h, &[&k1, &k2, &k3, &k4, &k5], &A6));
        let y5 = combination(&rho, h, &[&k1, &k2, &k3, &k4, &k5, &k6], &B5);
        let k7 = eq.rhs(&y5);

        // Weighted RMS of the embedded error against atol + rtol * |y|.
        let mut err_acc = 0.0_f64;
        let ks = [&k1, &k2, &k3, &k4, &k5, &k6, &k7];
        for idx in 0..rho.len() {
            let mut e = C64::new(0.0, 0.0);
            for (k, &c) in ks.iter().zip(&ERR) {
                if c != 0.0 {
                    e += k[idx] * C64::new(h * c, 0.0);
                }
            }
            let scale = cfg.abs_tol + cfg.rel_tol * rho[idx].norm().max(y5[idx].norm());
            let r = e.norm() / scale;
            err_acc += r * r;
        }
        let err = (err_acc / rho.len() as f64).sqrt();

        if err <= 1.0 {
            t += h;
            rho = y5;
            k1 = k7; // FSAL
            traj.steps_accepted += 1;

            let grow = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
            dt = (h * grow.clamp(0.2, 5.0)).min(cfg.max_step);

            if (t - next_sample).abs() <= 1e-12 * next_sample.max(1.0) {
                record_sample(&mut traj, &mut rho, &k1, t, gamma, target, eq.space())?;
                // The snapshot correction nudged rho; refresh the FSAL slope.
                k1 = eq.rhs(&rho);
                let rec = traj.records.last().unwrap();
                if let Some(done) = update_steady(&mut steady_run, rec, gamma) {
                    if done {
                        traj.converged_early = true;
                        break 'outer;
                    }
                }
                next_sample = (next_sample + cfg.sample_stride).min(cfg.t_final);
            }
        } else {
            traj.steps_rejected += 1;
            dt = h * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }

    Ok(traj)
}

fn record_sample(
    traj: &mut Trajectory,
    rho: &mut CMat,
    k1: &CMat,
    t: f64,
    gamma: f64,
    target: Option<&CVec>,
    space: &FockSpace,
) -> Result<(), Error> {
    // Re-Hermitize and renormalize the trace; log the applied correction.
    let herm = (rho.clone() + rho.adjoint()) / C64::new(2.0, 0.0);
    let herm_defect = (&herm - &*rho).norm();
    let trace = herm.trace().re;
    let trace_defect = (trace - 1.0).abs();
    let correction = herm_defect.max(trace_defect);
    if correction > 1e-8 {
        return Err(Error::AccuracyLoss { time: t, correction });
    }
    *rho = herm / C64::new(trace, 0.0);

    let min_eig = min_eigenvalue(rho);
    if min_eig < -1e-6 {
        return Err(Error::PositivityViolation { time: t, min_eig });
    }

    let record = ObservableRecord {
        time: t,
        excited_population: excited_population(rho),
        mean_phonon: mean_phonon(rho, space),
        purity: purity(rho),
        fluorescence: gamma * excited_population(rho),
        fidelity_to_target: target.map(|psi| fidelity_to_pure(rho, psi)),
        fock_populations: fock_populations(rho, space),
        min_eigenvalue: min_eig,
        rhs_norm: k1.norm(),
    };
    traj.max_correction = traj.max_correction.max(correction);
    traj.times.push(t);
    traj.snapshots.push(DensityMatrix::new_unchecked(rho.clone()));
    traj.records.push(record);
    Ok(())
}

fn update_steady(run: &mut usize, rec: &ObservableRecord, gamma: f64) -> Option<bool> {
    let fluor_limit = STEADY_FLUORESCENCE * gamma.max(f64::MIN_POSITIVE);
    if rec.rhs_norm < STEADY_RHS_NORM && rec.fluorescence < fluor_limit {
        *run += 1;
    } else {
        *run = 0;
    }
    Some(*run >= STEADY_SAMPLES)
}

/// Steady states extracted from the null space of a vectorized Liouvillian.
#[derive(Debug, Clone)]
pub struct SteadyStateReport {
    /// Kernel vectors reshaped to matrices, Hermitized, trace normalized
    /// where the trace is not degenerate (otherwise Frobenius normalized).
    pub states: Vec<DensityMatrix>,
    pub kernel_dim: usize,
    /// Singular values at the bottom of the spectrum (ascending, up to 8).
    pub smallest_singular_values: Vec<f64>,
    pub threshold: f64,
    /// Set when the whole spectrum collapses (e.g. `Γ = 0`, `H = 0`) and the
    /// kernel is the entire operator space.
    pub fully_degenerate: bool,
}

/// Extract the steady-state kernel of `l` by SVD.
///
/// The kernel dimension counts singular values below `1e-10 ‖L‖`. For a
/// unique steady state the reshaped vector is returned trace normalized; for
/// degenerate kernels (sideband spacing ≥ 2) all basis elements are returned
/// and the physically selected state depends on the initial condition, so no
/// selection is attempted here.
pub fn steady_state_nullspace(l: &CMat, space: &FockSpace) -> Result<SteadyStateReport, Error> {
    let dim = space.vibronic_dim();
    if l.nrows() != dim * dim || l.ncols() != dim * dim {
        return Err(Error::DimensionMismatch { expected: dim * dim, got: l.nrows() });
    }
    if space.dim() > NULLSPACE_FOCK_CAP {
        return Err(Error::SuperoperatorTooLarge { dim, cap: 2 * NULLSPACE_FOCK_CAP });
    }

    let svd = l.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let mut sigmas: Vec<(usize, f64)> = svd.singular_values.iter().copied().enumerate().collect();
    sigmas.sort_by(|a, b| a.1.total_cmp(&b.1));
    let sigma_max = sigmas.last().map(|x| x.1).unwrap_or(0.0);

    // Fully degenerate generator: every direction is steady.
    if sigma_max < 1e-300 {
        return Ok(SteadyStateReport {
            states: Vec::new(),
            kernel_dim: dim * dim,
            smallest_singular_values: sigmas.iter().take(8).map(|x| x.1).collect(),
            threshold: 0.0,
            fully_degenerate: true,
        });
    }

    let threshold = 1e-10 * sigma_max;
    let kernel: Vec<usize> =
        sigmas.iter().take_while(|(_, s)| *s < threshold).map(|(i, _)| *i).collect();
    if kernel.is_empty() {
        return Err(Error::NoSteadyState { smallest: sigmas[0].1, threshold });
    }

    let mut states = Vec::new();
    for &idx in kernel.iter().take(16) {
        let row = v_t.row(idx);
        let vec = CVec::from_iterator(dim * dim, row.iter().map(|z| z.conj()));
        let mat = crate::dissipation::unvectorize(&vec, dim);
        let herm = (&mat + mat.adjoint()) / C64::new(2.0, 0.0);
        let trace = herm.trace().re;
        let state = if trace.abs() > 1e-6 {
            herm / C64::new(trace, 0.0)
        } else {
            // Traceless kernel element (coherence between degenerate dark
            // states); keep it Frobenius normalized.
            let n = herm.norm();
            herm / C64::new(n, 0.0)
        };
        states.push(DensityMatrix::new_unchecked(state));
    }

    Ok(SteadyStateReport {
        states,
        kernel_dim: kernel.len(),
        smallest_singular_values: sigmas.iter().take(8).map(|x| x.1).collect(),
        threshold,
        fully_degenerate: false,
    })
}

/// Scattering rate `Γ <A_22>`; it vanishes exactly on a dark state.
pub fn fluorescence_rate(rho: &CMat, gamma: f64) -> f64 {
    gamma * excited_population(rho)
}

/// Population of the excited electronic level of a vibronic density matrix.
pub fn excited_population(rho: &CMat) -> f64 {
    let n = rho.nrows() / 2;
    (n..2 * n).map(|i| rho[(i, i)].re).sum()
}

/// `<n̂>` of a vibrational (`N`) or vibronic (`2N`) density matrix.
pub fn mean_phonon(rho: &CMat, space: &FockSpace) -> f64 {
    let n = space.dim();
    (0..rho.nrows()).map(|i| rho[(i, i)].re * (i % n) as f64).sum()
}

/// Fock populations, summed over the electronic label when vibronic.
pub fn fock_populations(rho: &CMat, space: &FockSpace) -> Vec<f64> {
    let n = space.dim();
    let mut pops = vec![0.0; n];
    for i in 0..rho.nrows() {
        pops[i % n] += rho[(i, i)].re;
    }
    pops
}

/// `tr ρ²` (assumes Hermitian input, for which it equals the squared
/// Frobenius norm).
pub fn purity(rho: &CMat) -> f64 {
    let f = rho.norm();
    f * f
}

/// `<ψ|ρ|ψ>` for a normalized pure target.
pub fn fidelity_to_pure(rho: &CMat, psi: &CVec) -> f64 {
    (psi.adjoint() * rho * psi)[(0, 0)].re
}

/// Uhlmann fidelity `F(ρ, σ) = (tr √(√ρ σ √ρ))²`; for a pure `σ = |ψ><ψ|`
/// this reduces to `<ψ|ρ|ψ>`.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, Error> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), got: sigma.dim() });
    }
    let sqrt_rho = hermitian_sqrt(rho.matrix());
    let inner = &sqrt_rho * sigma.matrix() * &sqrt_rho;
    let eigs = inner.symmetric_eigenvalues();
    // Drop eigenvalue noise before the square root amplifies it.
    let lmax = eigs.iter().copied().fold(0.0_f64, f64::max);
    let floor = lmax * 1e-14;
    let tr: f64 = eigs.iter().filter(|&&l| l > floor).map(|&l| l.sqrt()).sum();
    Ok((tr * tr).min(1.0))
}

fn hermitian_sqrt(m: &CMat) -> CMat {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut diag = CMat::zeros(n, n);
    for i in 0..n {
        diag[(i, i)] = C64::new(eig.eigenvalues[i].max(0.0).sqrt(), 0.0);
    }
    &eig.eigenvectors * diag * eig.eigenvectors.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dissipation::{build_liouvillian, AngularKind, EmissionSpec};
    use crate::fock::{vibronic_pure, Electronic};
    use crate::hamiltonian::{build_interaction_hamiltonian, DriveConfig, LaserDrive};

    fn spec(gamma: f64, eta_e: f64) -> EmissionSpec {
        EmissionSpec::new(gamma, eta_e, AngularKind::Dipole, 16).unwrap()
    }

    fn qubit_config(omega0: f64, omega1: f64, eta1: f64) -> DriveConfig {
        DriveConfig::new(
            LaserDrive::new(1, C64::new(omega1, 0.0), eta1).unwrap(),
            LaserDrive::new(0, C64::new(omega0, 0.0), 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn frozen_dynamics_stays_put() {
        // H = 0, Γ = 0: ρ(t) = ρ(0).
        let sp = FockSpace::new(12).unwrap();
        let s = EmissionSpec::new(0.0, 0.0, AngularKind::Dipole, 16).unwrap();
        let eq = MasterEq::from_hamiltonian(CMat::zeros(24, 24), &s, &sp).unwrap();
        let rho0 = sp.thermal_state(0.2).unwrap();
        let full = crate::fock::tensor_vibronic(
            &crate::fock::flip(Electronic::Ground, Electronic::Ground),
            rho0.matrix(),
        );
        let rho0 = DensityMatrix::new(full).unwrap();
        let cfg = EvolutionConfig::new(10.0, 1e-8, 1e-12, 1.0, 1.0).unwrap();
        let traj = evolve(&rho0, &eq, &cfg, None).unwrap();
        let diff = (traj.final_state().matrix() - rho0.matrix()).norm();
        assert!(diff < 1e-12);
    }

    #[test]
    fn spontaneous_decay_matches_exponential() {
        // H = 0, η_E = 0, start excited: <A22>(t) = e^{-Γt} within 1e-6.
        let sp = FockSpace::new(3).unwrap();
        let gamma = 1.3;
        let s = EmissionSpec::new(gamma, 0.0, AngularKind::Dipole, 16).unwrap();
        let eq = MasterEq::from_hamiltonian(CMat::zeros(6, 6), &s, &sp).unwrap();
        let psi = vibronic_pure(Electronic::Excited, sp.number_state(0).unwrap().vector());
        let rho0 = DensityMatrix::from_pure(&psi).unwrap();
        let cfg = EvolutionConfig::new(5.0, 1e-9, 1e-13, 0.5, 0.5).unwrap();
        let traj = evolve(&rho0, &eq, &cfg, None).unwrap();
        for rec in &traj.records {
            let expect = (-gamma * rec.time).exp();
            assert!(
                (rec.excited_population - expect).abs() < 1e-6,
                "t = {}: {} vs {}",
                rec.time,
                rec.excited_population,
                expect
            );
        }
    }

    #[test]
    fn fidelity_and_purity_basics() {
        let sp = FockSpace::new(4).unwrap();
        let zero = sp.number_state(0).unwrap();
        let one = sp.number_state(1).unwrap();
        let rho0 = zero.density();
        let rho1 = one.density();
        assert!((fidelity(&rho0, &rho0).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&rho0, &rho1).unwrap() < 1e-12);
        assert!((purity(rho0.matrix()) - 1.0).abs() < 1e-12);

        let mixed = DensityMatrix::new(CMat::identity(4, 4) / C64::new(4.0, 0.0)).unwrap();
        assert!((purity(mixed.matrix()) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn uhlmann_fidelity_agrees_with_pure_overlap() {
        let sp = FockSpace::new(20).unwrap();
        let rho = sp.thermal_state(0.4).unwrap();
        let psi = sp.coherent_state(C64::new(0.7, 0.1));
        let f_pure = fidelity_to_pure(rho.matrix(), psi.vector());
        let f_uhlmann = fidelity(&rho, &psi.density()).unwrap();
        assert!((f_pure - f_uhlmann).abs() < 1e-10);
    }

    #[test]
    fn fluorescence_of_basic_states() {
        let sp = FockSpace::new(3).unwrap();
        let ground = vibronic_pure(Electronic::Ground, sp.coherent_state(C64::new(0.5, 0.0)).vector());
        let rho = DensityMatrix::from_pure(&ground).unwrap();
        assert_eq!(fluorescence_rate(rho.matrix(), 1.0), 0.0);
        let excited = vibronic_pure(Electronic::Excited, sp.number_state(0).unwrap().vector());
        let rho = DensityMatrix::from_pure(&excited).unwrap();
        assert!((fluorescence_rate(rho.matrix(), 0.8) - 0.8).abs() < 1e-14);
    }

    #[test]
    fn observable_helpers() {
        let sp = FockSpace::new(4).unwrap();
        let psi = vibronic_pure(Electronic::Ground, sp.number_state(2).unwrap().vector());
        let rho = DensityMatrix::from_pure(&psi).unwrap();
        assert!((mean_phonon(rho.matrix(), &sp) - 2.0).abs() < 1e-14);
        let pops = fock_populations(rho.matrix(), &sp);
        assert!((pops[2] - 1.0).abs() < 1e-14);
        assert!(pops[0].abs() < 1e-14);
    }

    #[test]
    fn nullspace_finds_unique_qubit_steady_state() {
        // j=1, m=0, η_0 = 1 (low-pass cut at q = 1): kernel dimension 1 and
        // the state matches the analytic qubit exactly.
        let sp = FockSpace::new(12).unwrap();
        let cfg = qubit_config(0.2, 0.2, 0.5);
        let h = build_interaction_hamiltonian(&cfg, &sp).unwrap();
        let s = spec(1.0, 1.0);
        let l = build_liouvillian(&h, &s, &sp).unwrap();
        let report = steady_state_nullspace(&l, &sp).unwrap();
        assert_eq!(report.kernel_dim, 1);
        assert!(!report.fully_degenerate);

        let dark = crate::darkstate::dark_coefficients_adjacent(&cfg, &sp).unwrap();
        let target = vibronic_pure(Electronic::Ground, &dark.state().vector().clone());
        let fid = fidelity_to_pure(report.states[0].matrix(), &target);
        assert!(fid > 1.0 - 1e-8, "fidelity {fid}");
    }

    #[test]
    fn nullspace_degenerate_two_phonon_cooling() {
        // j=2 with the carrier off: |0> and |1> are both dark, so the kernel
        // of L is spanned by the four |a><b| combinations.
        let sp = FockSpace::new(8).unwrap();
        let cfg = DriveConfig::new(
            LaserDrive::new(2, C64::new(0.3, 0.0), 0.4).unwrap(),
            LaserDrive::new(0, C64::new(0.0, 0.0), 0.5).unwrap(),
        )
        .unwrap();
        let h = build_interaction_hamiltonian(&cfg, &sp).unwrap();
        let s = spec(1.0, 0.0);
        let l = build_liouvillian(&h, &s, &sp).unwrap();
        let report = steady_state_nullspace(&l, &sp).unwrap();
        assert_eq!(report.kernel_dim, 4);
    }

    #[test]
    fn nullspace_degenerate_branch_without_dynamics() {
        // Γ = 0, H = 0: L = 0, every matrix is steady.
        let sp = FockSpace::new(3).unwrap();
        let s = EmissionSpec::new(0.0, 0.0, AngularKind::Dipole, 16).unwrap();
        let l = build_liouvillian(&CMat::zeros(6, 6), &s, &sp).unwrap();
        let report = steady_state_nullspace(&l, &sp).unwrap();
        assert!(report.fully_degenerate);
        assert_eq!(report.kernel_dim, 36);
    }

    #[test]
    fn nullspace_respects_fock_cap() {
        let sp = FockSpace::new(17).unwrap();
        let l = CMat::zeros(34 * 34, 34 * 34);
        assert!(matches!(
            steady_state_nullspace(&l, &sp),
            Err(Error::SuperoperatorTooLarge { .. })
        ));
    }

    #[test]
    fn evolution_reaches_qubit_dark_state() {
        // Small-space smoke test of the full loop: thermal start, evolve,
        // compare against the analytic dark state and the null space.
        let sp = FockSpace::new(12).unwrap();
        let cfg = qubit_config(0.2, 0.2, 0.5);
        let s = spec(1.0, 1.0);
        let eq = MasterEq::new(&cfg, &s, &sp).unwrap();
        let rho_vib = sp.thermal_state(0.2).unwrap();
        let full = crate::fock::tensor_vibronic(
            &crate::fock::flip(Electronic::Ground, Electronic::Ground),
            rho_vib.matrix(),
        );
        let rho0 = DensityMatrix::new(full).unwrap();

        let dark = crate::darkstate::dark_coefficients_adjacent(&cfg, &sp).unwrap();
        let target = vibronic_pure(Electronic::Ground, &dark.state().vector().clone());

        let ecfg = EvolutionConfig::new(1200.0, 1e-8, 1e-12, 2.0, 2.0).unwrap();
        let traj = evolve(&rho0, &eq, &ecfg, Some(&target)).unwrap();
        let rec = traj.final_record();
        assert!(rec.fidelity_to_target.unwrap() > 0.999, "fidelity {:?}", rec.fidelity_to_target);
        assert!(rec.fluorescence < 1e-6);
        assert!(rec.purity > 0.999);
        assert!(traj.max_correction < 1e-8);
        // Positivity stayed under control along the way.
        for r in &traj.records {
            assert!(r.min_eigenvalue > -1e-8);
        }

        // Cross-validate with the null-space steady state.
        let l = build_liouvillian(eq.hamiltonian(), &s, &sp).unwrap();
        let report = steady_state_nullspace(&l, &sp).unwrap();
        assert_eq!(report.kernel_dim, 1);
        let f = fidelity(traj.final_state(), &report.states[0]).unwrap();
        assert!(f > 1.0 - 1e-6, "endpoint vs nullspace fidelity {f}");
    }
}
