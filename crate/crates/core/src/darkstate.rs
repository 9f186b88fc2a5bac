//! Analytic dark states, numerical dark-space bases, and the filter designer.
//!
//! For adjacent sideband orders (`j = m + 1`) the kernel equation of the
//! two-drive coupling reduces to a scalar recurrence linking consecutive Fock
//! amplitudes,
//!
//! ```text
//! C_{n+1} = -(Ω_m e^{-η_m²/2} / Ω_j e^{-η_j²/2}) √(n+1)
//!            · L_{n-m}^(m)(η_m²) / L_{n-m}^(j)(η_j²) · C_n ,
//! ```
//!
//! whose telescoped product is the closed-form coefficient formula. A zero of
//! the numerator Laguerre factor cuts the support from above (low-pass); a
//! zero of the denominator forces every amplitude below it to vanish and
//! restarts the chain above (high-pass); both together leave a band, and a
//! band of width one is a single number state. The designer inverts this:
//! given a requested filter window it places the Lamb-Dicke parameters on the
//! corresponding Laguerre zeros.
//!
//! For wider spacing (`d = j - m ≥ 2`) the kernel splits over residue classes
//! of `n mod d` and is computed numerically per class ([`dark_space_basis`]);
//! which dark state the dissipation selects then depends on the initial
//! condition, so that question is answered by `dynamics::evolve`, not here.

use num_complex::Complex64 as C64;

use crate::dissipation::{build_liouvillian, EmissionSpec, MasterEq};
use crate::dynamics::{
    evolve, fidelity_to_pure, steady_state_nullspace, EvolutionConfig, NULLSPACE_FOCK_CAP,
};
use crate::error::Error;
use crate::fock::{flip, tensor_vibronic, vibronic_pure, DensityMatrix, Electronic, FockSpace, PureVibrationalState};
use crate::hamiltonian::{vibrational_kernel_operator, DriveConfig, LaserDrive};
use crate::{laguerre, CMat, CVec};

/// Requested filter window in Fock space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterSpec {
    /// Support `|0> .. |q>` via `L_q(η_m²) = 0`.
    LowPass { q: u32 },
    /// Support `|p+1> .. |∞>` via `L_p^(1)(η_j²) = 0`.
    HighPass { p: u32 },
    /// Support `|p+1> .. |q>` via both conditions (`q > p`).
    BandPass { p: u32, q: u32 },
    /// Single `|q>`: a band of width one (`q ≥ 2`), plain sideband cooling
    /// for `q = 0`, impossible for `q = 1`.
    NumberState { q: u32 },
    /// Motional qubit `(|0> ± r|1>)/√(1+r²)` via `η_m = 1`; the amplitude
    /// ratio is set by the Rabi ratio.
    Qubit { ratio: f64, sign: QubitSign },
}

/// Sign of the `|1>` amplitude relative to `|0>` in the designed qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QubitSign {
    /// The natural sign for positive Rabi frequencies.
    #[default]
    Minus,
    Plus,
}

impl FilterSpec {
    pub fn validate(&self) -> Result<(), Error> {
        match *self {
            FilterSpec::LowPass { q } if q < 1 => {
                Err(Error::invalid("filter", "low-pass needs q >= 1".to_string()))
            }
            FilterSpec::HighPass { p } if p < 1 => {
                Err(Error::invalid("filter", "high-pass needs p >= 1".to_string()))
            }
            FilterSpec::BandPass { p, q } if p < 1 || q <= p => {
                Err(Error::invalid("filter", format!("band-pass needs q > p >= 1, got p={p}, q={q}")))
            }
            FilterSpec::Qubit { ratio, .. } if !(ratio > 0.0) || !ratio.is_finite() => {
                Err(Error::invalid("filter", format!("qubit amplitude ratio {ratio} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

/// Dark-state coefficients on the truncated space plus bookkeeping.
#[derive(Debug, Clone)]
pub struct DarkStateResult {
    /// Normalized coefficients, exactly zero outside the support.
    pub coefficients: CVec,
    pub support_min: usize,
    pub support_max: usize,
    /// True when the support is cut by the truncation rather than a zero.
    pub truncation_limited: bool,
    /// Normalization constant of the paper-convention amplitudes
    /// (`C_start = 1` at the bottom of the support).
    pub normalization: f64,
    /// Tail weight below `1e-10` (exact cuts always converge).
    pub converged: bool,
    pub warnings: Vec<String>,
}

impl DarkStateResult {
    pub fn state(&self) -> PureVibrationalState {
        PureVibrationalState::normalized(self.coefficients.clone())
            .expect("dark-state coefficients are normalized")
    }

    /// Weight in the top two truncation levels.
    pub fn tail_weight(&self) -> f64 {
        let n = self.coefficients.len();
        self.coefficients[n - 1].norm_sqr() + self.coefficients[n - 2].norm_sqr()
    }
}

/// Solve the adjacent-order (`j = m + 1`) kernel by the scalar recurrence.
///
/// The chain starts at `C_m = 1` (the levels below `m` are annihilated by
/// both drives and belong to separate trivial kernel directions) or at
/// `C_{p+1} = 1` when a denominator zero cuts the bottom. Amplitudes are
/// rescaled on the fly when they overflow; the reported normalization is the
/// paper-convention one.
pub fn dark_coefficients_adjacent(
    config: &DriveConfig,
    space: &FockSpace,
) -> Result<DarkStateResult, Error> {
    let j = config.drive_j.sideband;
    let m = config.drive_m.sideband;
    if j != m + 1 {
        return Err(Error::NonAdjacentOrders { j, m });
    }
    let n_dim = space.dim();
    if n_dim <= j as usize {
        return Err(Error::TruncationBelowSideband { dim: n_dim, order: j });
    }

    let xj = config.drive_j.lamb_dicke.powi(2);
    let xm = config.drive_m.lamb_dicke.powi(2);
    // Laguerre factors per recurrence row r = n - m, and their running scales
    // for the effective-zero test.
    let max_r = (n_dim - 1 - m as usize) as u32;
    let lj = laguerre::eval_all(max_r, j, xj);
    let lm = laguerre::eval_all(max_r, m, xm);
    let scale_j = lj.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let scale_m = lm.iter().fold(0.0_f64, |a, v| a.max(v.abs()));

    let ratio = config.drive_m.rabi * C64::new((-xm / 2.0).exp(), 0.0);
    let denom = config.drive_j.rabi * C64::new((-xj / 2.0).exp(), 0.0);
    if denom.norm() == 0.0 {
        return Err(Error::invalid("drive configuration", "the j drive must have a nonzero Rabi frequency".to_string()));
    }
    let omega_ratio = ratio / denom;

    let mut coeffs = CVec::zeros(n_dim);
    let mut start = m as usize;
    coeffs[start] = C64::new(1.0, 0.0);
    let mut warnings = Vec::new();
    let mut low_cut: Option<usize> = None;
    // log of the cumulative rescale factor taken out of the raw amplitudes
    let mut log_rescale = 0.0_f64;

    let mut n = start;
    while n + 1 < n_dim {
        let r = n - m as usize;
        let (ljr, lmr) = (lj[r], lm[r]);
        if ljr.abs() < laguerre::EFFECTIVE_ZERO * scale_j {
            // Denominator zero: every amplitude so far is forced to vanish
            // and the chain restarts above the cut.
            if coeffs.rows(start, n + 1 - start).iter().any(|c| c.norm() > 0.0) && start != n {
                warnings.push(format!(
                    "high-pass cut at n = {n} above an existing chain; the dark space is degenerate"
                ));
            }
            coeffs.fill(C64::new(0.0, 0.0));
            start = n + 1;
            coeffs[start] = C64::new(1.0, 0.0);
            log_rescale = 0.0;
            n += 1;
            continue;
        }
        if ljr.abs() < laguerre::NEAR_ZERO_WARN * scale_j {
            warnings.push(format!(
                "near-zero Laguerre divisor L_{r}^({j})({xj:.6}) = {ljr:.3e}; coefficients spike around n = {n}"
            ));
        }
        if lmr.abs() < laguerre::EFFECTIVE_ZERO * scale_m {
            // Numerator zero: exact low-pass cut.
            low_cut = Some(n);
            break;
        }
        let mult = -omega_ratio
            * C64::new(((n + 1) as f64).sqrt() * lmr / ljr, 0.0);
        coeffs[n + 1] = coeffs[n] * mult;
        if coeffs[n + 1].norm() > 1e150 {
            let s = coeffs[n + 1].norm();
            for c in coeffs.iter_mut() {
                *c /= C64::new(s, 0.0);
            }
            log_rescale += s.ln();
        }
        n += 1;
    }

    let support_max = match low_cut {
        Some(q) => q,
        None => n_dim - 1,
    };
    // The support may end earlier if the Rabi ratio is zero (single-drive
    // cooling); read it off the computed amplitudes.
    let support_max = (start..=support_max)
        .rev()
        .find(|&i| coeffs[i].norm() > 0.0)
        .unwrap_or(start);

    let norm_scaled = coeffs.norm();
    let normalization = {
        let ln_n0 = norm_scaled.ln() + log_rescale;
        ln_n0.exp()
    };
    let coefficients = coeffs / C64::new(norm_scaled, 0.0);

    let truncation_limited = low_cut.is_none() && support_max == n_dim - 1;
    let tail = coefficients[n_dim - 1].norm_sqr() + coefficients[n_dim - 2].norm_sqr();
    let converged = if truncation_limited { tail < 1e-10 } else { true };
    let mut warnings = warnings;
    if !converged {
        warnings.push(format!(
            "truncation-limited tail carries weight {tail:.3e} (limit 1e-10); increase the truncation"
        ));
    }

    Ok(DarkStateResult {
        coefficients,
        support_min: start,
        support_max,
        truncation_limited,
        normalization,
        converged,
        warnings,
    })
}

/// Orthonormal dark-space basis of the kernel operator, organized by residue
/// class of `n mod (j - m)`.
#[derive(Debug, Clone)]
pub struct DarkSpace {
    pub basis: Vec<CVec>,
    /// Residue class `n mod d` of each basis vector.
    pub residue_classes: Vec<usize>,
    pub dimension: usize,
    /// Largest singular value of the kernel operator and the kernel
    /// detection threshold `1e-10 ‖K‖`.
    pub sigma_max: f64,
    pub threshold: f64,
}

/// Numerical kernel of the two-drive coupling operator via per-class SVD.
///
/// Both drives lower `n mod d` by the same amount, so the kernel splits over
/// residue classes; each class is handled by its own (column-restricted)
/// singular value decomposition with the global threshold `1e-10 ‖K‖`.
pub fn dark_space_basis(config: &DriveConfig, space: &FockSpace) -> Result<DarkSpace, Error> {
    let k = vibrational_kernel_operator(config, space)?;
    let n = space.dim();
    let d = config.spacing() as usize;

    // Global norm for the threshold.
    let sigma_max = k.clone().svd(false, false).singular_values.max();
    let threshold = 1e-10 * sigma_max;

    let mut basis = Vec::new();
    let mut residue_classes = Vec::new();
    let mut smallest_rejected = f64::INFINITY;
    for class in 0..d {
        let cols: Vec<usize> = (class..n).step_by(d).collect();
        let mut sub = CMat::zeros(n, cols.len());
        for (ci, &c) in cols.iter().enumerate() {
            sub.column_mut(ci).copy_from(&k.column(c));
        }
        let svd = sub.svd(false, true);
        let v_t = svd.v_t.expect("requested V^H");
        let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
        order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
        for idx in order {
            let sigma = svd.singular_values[idx];
            if sigma < threshold {
                let mut v = CVec::zeros(n);
                for (ci, &c) in cols.iter().enumerate() {
                    v[c] = v_t[(idx, ci)].conj();
                }
                basis.push(v);
                residue_classes.push(class);
            } else {
                smallest_rejected = smallest_rejected.min(sigma);
                break;
            }
        }
    }
    if basis.is_empty() {
        return Err(Error::EmptyKernel { smallest: smallest_rejected, threshold });
    }
    let dimension = basis.len();
    Ok(DarkSpace { basis, residue_classes, dimension, sigma_max, threshold })
}

/// Free parameters of the designer: everything the filter conditions do not
/// pin down.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    /// Lamb-Dicke parameter for whichever drive is not fixed by a zero
    /// condition. Kept moderate so no stray Laguerre zero is hit.
    pub free_lamb_dicke: f64,
    /// `Ω_m / Ω_j` for the zone filters (the qubit computes its own).
    pub rabi_ratio: f64,
    /// Overall scale `Ω_j` of the returned configuration.
    pub omega_j: f64,
    /// Which zero of the low-pass condition polynomial to use (0 = smallest,
    /// the experimentally easiest).
    pub zero_choice_q: usize,
    /// Which zero of the high-pass condition polynomial to use.
    pub zero_choice_p: usize,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            free_lamb_dicke: 0.5,
            rabi_ratio: 1.0,
            omega_j: 0.2,
            zero_choice_q: 0,
            zero_choice_p: 0,
        }
    }
}

/// A designed drive configuration together with its predicted dark state.
#[derive(Debug, Clone)]
pub struct Design {
    pub filter: FilterSpec,
    pub config: DriveConfig,
    pub predicted: DarkStateResult,
}

/// Invert the filter conditions: produce the `j = 1, m = 0` drive pair whose
/// dark state realizes the requested window, plus the predicted state.
pub fn design_filter(
    filter: &FilterSpec,
    opts: &DesignOptions,
    space: &FockSpace,
) -> Result<Design, Error> {
    filter.validate()?;
    if !(opts.free_lamb_dicke > 0.0) || !(opts.omega_j > 0.0) || !(opts.rabi_ratio >= 0.0) {
        return Err(Error::invalid(
            "design options",
            format!(
                "free_lamb_dicke = {}, omega_j = {}, rabi_ratio = {}",
                opts.free_lamb_dicke, opts.omega_j, opts.rabi_ratio
            ),
        ));
    }

    let omega_j = C64::new(opts.omega_j, 0.0);
    let omega_m = C64::new(opts.rabi_ratio * opts.omega_j, 0.0);
    let make = |eta_j: f64, eta_m: f64, omega_m: C64| -> Result<DriveConfig, Error> {
        DriveConfig::new(LaserDrive::new(1, omega_j, eta_j)?, LaserDrive::new(0, omega_m, eta_m)?)
    };

    let config = match *filter {
        FilterSpec::LowPass { q } => {
            let eta_m = laguerre::ldp_for_zero(q, 0, opts.zero_choice_q)?;
            make(opts.free_lamb_dicke, eta_m, omega_m)?
        }
        FilterSpec::HighPass { p } => {
            let eta_j = laguerre::ldp_for_zero(p, 1, opts.zero_choice_p)?;
            make(eta_j, opts.free_lamb_dicke, omega_m)?
        }
        FilterSpec::BandPass { p, q } => {
            let eta_j = laguerre::ldp_for_zero(p, 1, opts.zero_choice_p)?;
            let eta_m = laguerre::ldp_for_zero(q, 0, opts.zero_choice_q)?;
            make(eta_j, eta_m, omega_m)?
        }
        FilterSpec::NumberState { q: 0 } => {
            // Plain sideband cooling: switch the carrier off; the kernel is
            // exactly |0>.
            make(opts.free_lamb_dicke, 1.0, C64::new(0.0, 0.0))?
        }
        FilterSpec::NumberState { q: 1 } => {
            return Err(Error::Undesignable(
                "number state |1> needs the p = 0 high-pass condition, but L_0^(1) is the \
                 constant 1 and has no zero"
                    .to_string(),
            ));
        }
        FilterSpec::NumberState { q } => {
            let eta_j = laguerre::ldp_for_zero(q - 1, 1, opts.zero_choice_p)?;
            let eta_m = laguerre::ldp_for_zero(q, 0, opts.zero_choice_q)?;
            make(eta_j, eta_m, omega_m)?
        }
        FilterSpec::Qubit { ratio, sign } => {
            // Support {0, 1} from L_1(1) = 0; the amplitude ratio fixes the
            // Rabi ratio through |C_1/C_0| = (Ω_m/Ω_j) e^{(η_j² - 1)/2}.
            let eta_j = opts.free_lamb_dicke;
            let magnitude = ratio * ((1.0 - eta_j * eta_j) / 2.0).exp();
            let signed = match sign {
                QubitSign::Minus => magnitude,
                QubitSign::Plus => -magnitude,
            };
            make(eta_j, 1.0, C64::new(signed * opts.omega_j, 0.0))?
        }
    };

    let predicted = dark_coefficients_adjacent(&config, space)?;
    Ok(Design { filter: *filter, config, predicted })
}

/// Options for closing the design loop with the simulator.
#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Mean occupation of the initial thermal motional state.
    pub nbar: f64,
    pub emission: EmissionSpec,
    pub evolution: EvolutionConfig,
}

/// Outcome of [`verify_design`].
#[derive(Debug, Clone)]
pub struct VerifyReport {
    /// Fidelity of the evolution endpoint against ground ⊗ predicted.
    pub evolution_fidelity: f64,
    pub final_fluorescence: f64,
    pub final_time: f64,
    pub converged_early: bool,
    /// Null-space results when the truncation admits the dense path.
    pub nullspace_fidelity: Option<f64>,
    pub kernel_dim: Option<usize>,
    pub warnings: Vec<String>,
}

/// Run the designed configuration through the master equation from a thermal
/// state and report how well it reaches the predicted dark state.
pub fn verify_design(
    design: &Design,
    opts: &VerifyOptions,
    space: &FockSpace,
) -> Result<VerifyReport, Error> {
    let thermal = space.thermal_state(opts.nbar)?;
    let ground = flip(Electronic::Ground, Electronic::Ground);
    let rho0 = DensityMatrix::new(tensor_vibronic(&ground, thermal.matrix()))?;
    let target = vibronic_pure(Electronic::Ground, design.predicted.state().vector());

    let eq = MasterEq::new(&design.config, &opts.emission, space)?;
    let traj = evolve(&rho0, &eq, &opts.evolution, Some(&target))?;
    let rec = traj.final_record();

    let mut nullspace_fidelity = None;
    let mut kernel_dim = None;
    if space.dim() <= NULLSPACE_FOCK_CAP {
        let l = build_liouvillian(eq.hamiltonian(), &opts.emission, space)?;
        let report = steady_state_nullspace(&l, space)?;
        kernel_dim = Some(report.kernel_dim);
        let best = report
            .states
            .iter()
            .map(|s| fidelity_to_pure(s.matrix(), &target))
            .fold(f64::NEG_INFINITY, f64::max);
        nullspace_fidelity = Some(best);
    }

    Ok(VerifyReport {
        evolution_fidelity: rec.fidelity_to_target.expect("target was supplied"),
        final_fluorescence: rec.fluorescence,
        final_time: rec.time,
        converged_early: traj.converged_early,
        nullspace_fidelity,
        kernel_dim,
        warnings: design.predicted.warnings.clone(),
    })
}
