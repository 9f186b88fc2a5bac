//! Interaction-picture Hamiltonian for a pair of lower-sideband drives.
//!
//! In the resolved-sideband limit each drive contributes a nonlinear coupling
//! `Ω_s f_s(n̂) a^s` with
//!
//! ```text
//! f_s(n) = e^{-η²/2} (n!/(n+s)!) L_n^(s)(η²)
//! ```
//!
//! and the full Hamiltonian (ħ = 1) is `H = A_21 ⊗ K + A_12 ⊗ K†` where
//! `K = Ω_j f_j(n̂) a^j + Ω_m f_m(n̂) a^m` acts on the vibration. A motional
//! state in the kernel of `K`, paired with the electronic ground state, is
//! annihilated by `H`: the ion stops scattering light and the dissipative
//! dynamics parks there.

use num_complex::Complex64 as C64;

use crate::error::Error;
use crate::fock::{flip, tensor_vibronic, Electronic, FockSpace};
use crate::{laguerre, CMat};

/// One sideband drive: order `s`, Rabi frequency `Ω_s` (units of the
/// reference rate), Lamb-Dicke parameter `η_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserDrive {
    pub sideband: u32,
    pub rabi: C64,
    pub lamb_dicke: f64,
}

impl LaserDrive {
    pub fn new(sideband: u32, rabi: C64, lamb_dicke: f64) -> Result<Self, Error> {
        if !(lamb_dicke > 0.0) || !lamb_dicke.is_finite() {
            return Err(Error::invalid("Lamb-Dicke parameter", format!("eta = {lamb_dicke}")));
        }
        if !rabi.re.is_finite() || !rabi.im.is_finite() {
            return Err(Error::invalid("Rabi frequency", format!("omega = {rabi}")));
        }
        Ok(LaserDrive { sideband, rabi, lamb_dicke })
    }
}

/// The two drives, with `drive_j` on the higher sideband (`j > m`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriveConfig {
    pub drive_j: LaserDrive,
    pub drive_m: LaserDrive,
}

impl DriveConfig {
    pub fn new(drive_j: LaserDrive, drive_m: LaserDrive) -> Result<Self, Error> {
        if drive_j.sideband <= drive_m.sideband {
            return Err(Error::invalid(
                "drive configuration",
                format!("need j > m, got j = {}, m = {}", drive_j.sideband, drive_m.sideband),
            ));
        }
        Ok(DriveConfig { drive_j, drive_m })
    }

    /// Number-state spacing `d = j - m` of the engineered superpositions.
    pub fn spacing(&self) -> u32 {
        self.drive_j.sideband - self.drive_m.sideband
    }
}

/// Scalar coupling `f_s(n) = e^{-η²/2} (n!/(n+s)!) L_n^(s)(η²)`.
///
/// The factorial ratio is accumulated multiplicatively as
/// `1/((n+1)...(n+s))`; full factorials would overflow long before the
/// truncations used here.
pub fn coupling_scalar(s: u32, eta: f64, n: usize) -> f64 {
    let x = eta * eta;
    let mut ratio = 1.0;
    for i in 1..=s as usize {
        ratio /= (n + i) as f64;
    }
    (-x / 2.0).exp() * ratio * laguerre::eval(n as u32, s, x)
}

/// Diagonal operator `f_s(n̂)` on the truncated space.
pub fn coupling_function(s: u32, eta: f64, space: &FockSpace) -> CMat {
    space
        .diag_of_number(|n| coupling_scalar(s, eta, n))
        .expect("coupling function is finite")
}

/// Band entries of one drive's term: `band[r] = <r| Ω f_s(n̂) a^s |r+s>`
/// for `r = 0..N-s`. The whole kernel operator is the sum of two such bands.
pub fn kernel_band(drive: &LaserDrive, space: &FockSpace) -> Vec<C64> {
    let s = drive.sideband as usize;
    let n = space.dim();
    let mut band = Vec::with_capacity(n.saturating_sub(s));
    for r in 0..n.saturating_sub(s) {
        let mut ladder = 1.0;
        for i in 1..=s {
            ladder *= (r + i) as f64;
        }
        let f = coupling_scalar(drive.sideband, drive.lamb_dicke, r);
        band.push(drive.rabi * C64::new(f * ladder.sqrt(), 0.0));
    }
    band
}

/// The vibrational operator `K = Ω_j f_j(n̂) a^j + Ω_m f_m(n̂) a^m` whose
/// kernel is the dark space.
pub fn vibrational_kernel_operator(config: &DriveConfig, space: &FockSpace) -> Result<CMat, Error> {
    if space.dim() <= config.drive_j.sideband as usize {
        return Err(Error::TruncationBelowSideband {
            dim: space.dim(),
            order: config.drive_j.sideband,
        });
    }
    let n = space.dim();
    let mut k = CMat::zeros(n, n);
    for drive in [&config.drive_j, &config.drive_m] {
        let s = drive.sideband as usize;
        for (r, amp) in kernel_band(drive, space).into_iter().enumerate() {
            k[(r, r + s)] += amp;
        }
    }
    Ok(k)
}

/// Full interaction Hamiltonian `H = A_21 ⊗ K + A_12 ⊗ K†` (Hermitian by
/// construction).
pub fn build_interaction_hamiltonian(
    config: &DriveConfig,
    space: &FockSpace,
) -> Result<CMat, Error> {
    let k = vibrational_kernel_operator(config, space)?;
    let a21 = flip(Electronic::Excited, Electronic::Ground);
    let a12 = flip(Electronic::Ground, Electronic::Excited);
    Ok(tensor_vibronic(&a21, &k) + tensor_vibronic(&a12, &k.adjoint()))
}
