//! The tangent-pulse protocol `H(t) = η₁Jx + η₂ tan(γt) Jz` under the
//! matching condition `η₁² = η₂² + γ²`.
//!
//! With the rotating frame `G(t) = e^{iφJz} e^{i(γt + π/2)Jy}`,
//! `φ = −arcsin(γ/η₁)`, the frame Hamiltonian collapses to
//! `−η₂ sec(γt) Jz`, so the exact propagator is
//!
//! ```text
//! U(t, t₀) = G(t) · e^{iΘ(t,t₀)Jz} · G†(t₀),   Θ(t,t₀) = η₂ ∫ sec(γs) ds
//! ```
//!
//! Energies are in units of `η₁` wherever output is normalized; the
//! functions here work in whatever units the drive was built with.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::oracle::DriveFunction;
use crate::scalar::{as_f64, lit, precision_tol, CVector, Real};
use crate::su2::{compose, Spin, SpinOperators, Unitary};

/// Distance kept from `|γt| = π/2`, where `tan` and `sec` diverge.
pub const DOMAIN_GUARD: f64 = 1e-9;
/// Relative tolerance on `η₁² = η₂² + γ²`.
pub const MATCHING_TOL: f64 = 1e-12;
/// Angle tolerance of the window consistency check `tan δ = √(1−(γ/η₁)²) tan δ₀`.
pub const WINDOW_TOL: f64 = 1e-12;
/// Row/column-sum tolerance of a transition matrix.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// How a raw tangent field `(η̃₁, 0, η̃₂ tan γt)` is brought onto the
/// matching condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchingRoute {
    /// Keep `η₂`, set `η₁ = √(η₂² + γ²)`.
    TuneX,
    /// Scale the whole field by `γ / √(η̃₁² − η̃₂²)`.
    RescaleAll,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentDrive<T> {
    eta1: T,
    eta2: T,
    gamma: T,
    phi: T,
}

fn positive<T: Real>(name: &'static str, value: T) -> Result<()> {
    if value > T::zero() && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: as_f64(value),
            reason: "must be positive and finite",
        })
    }
}

impl<T: Real> TangentDrive<T> {
    /// Builds a matched drive from a raw field and a sweep frequency.
    pub fn matched(eta1_raw: T, eta2_raw: T, gamma: T, route: MatchingRoute) -> Result<Self> {
        positive("eta1_raw", eta1_raw)?;
        positive("eta2_raw", eta2_raw)?;
        positive("gamma", gamma)?;
        let (eta1, eta2) = match route {
            MatchingRoute::TuneX => ((eta2_raw * eta2_raw + gamma * gamma).sqrt(), eta2_raw),
            MatchingRoute::RescaleAll => {
                if eta1_raw <= eta2_raw {
                    return Err(Error::Unmatched {
                        eta1_raw: as_f64(eta1_raw),
                        eta2_raw: as_f64(eta2_raw),
                    });
                }
                let scale = gamma / (eta1_raw * eta1_raw - eta2_raw * eta2_raw).sqrt();
                (eta1_raw * scale, eta2_raw * scale)
            }
        };
        Ok(Self::from_parts(eta1, eta2, gamma))
    }

    /// Matched drive with energy unit `eta1` and sweep ratio `γ/η₁ ∈ (0, 1)`.
    pub fn from_ratio(eta1: T, gamma_over_eta1: T) -> Result<Self> {
        positive("eta1", eta1)?;
        if !(gamma_over_eta1 > T::zero() && gamma_over_eta1 < T::one()) {
            return Err(Error::InvalidParameter {
                name: "gamma_over_eta1",
                value: as_f64(gamma_over_eta1),
                reason: "must lie strictly between 0 and 1",
            });
        }
        let gamma = eta1 * gamma_over_eta1;
        let eta2 = eta1 * (T::one() - gamma_over_eta1 * gamma_over_eta1).sqrt();
        Ok(Self::from_parts(eta1, eta2, gamma))
    }

    /// A drive that need not satisfy the matching condition. The closed
    /// forms in this module are then no longer exact solutions; this
    /// exists for negative controls against the numerical integrator.
    pub fn unmatched(eta1: T, eta2: T, gamma: T) -> Result<Self> {
        positive("eta1", eta1)?;
        positive("eta2", eta2)?;
        positive("gamma", gamma)?;
        if gamma >= eta1 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                value: as_f64(gamma),
                reason: "must be smaller than eta1",
            });
        }
        Ok(Self::from_parts(eta1, eta2, gamma))
    }

    fn from_parts(eta1: T, eta2: T, gamma: T) -> Self {
        TangentDrive {
            eta1,
            eta2,
            gamma,
            phi: -(gamma / eta1).asin(),
        }
    }

    pub fn eta1(&self) -> T {
        self.eta1
    }

    pub fn eta2(&self) -> T {
        self.eta2
    }

    pub fn gamma(&self) -> T {
        self.gamma
    }

    /// `φ = −arcsin(γ/η₁)`.
    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn gamma_over_eta1(&self) -> T {
        self.gamma / self.eta1
    }

    /// `(η₁² − η₂² − γ²) / η₁²`.
    pub fn matching_defect(&self) -> T {
        (self.eta1 * self.eta1 - self.eta2 * self.eta2 - self.gamma * self.gamma) / (self.eta1 * self.eta1)
    }

    pub fn is_matched(&self) -> bool {
        self.matching_defect().abs() <= precision_tol(MATCHING_TOL)
    }

    /// `π / (2γ)`, the half-width of the open domain.
    pub fn half_domain(&self) -> T {
        T::frac_pi_2() / self.gamma
    }

    /// Largest admissible `|t|` after the guard band.
    pub fn time_limit(&self) -> T {
        (T::frac_pi_2() - lit(DOMAIN_GUARD)) / self.gamma
    }

    pub fn check_time(&self, t: T) -> Result<()> {
        if (self.gamma * t).abs() < T::frac_pi_2() - lit(DOMAIN_GUARD) {
            Ok(())
        } else {
            Err(Error::FieldSingularity {
                t: as_f64(t),
                limit: as_f64(self.time_limit()),
            })
        }
    }

    /// `(Ωx, Ωy, Ωz) = (η₁, 0, η₂ tan γt)`.
    pub fn field_at(&self, t: T) -> Result<[T; 3]> {
        self.check_time(t)?;
        Ok([self.eta1, T::zero(), self.eta2 * (self.gamma * t).tan()])
    }

    /// `Θ(t₀, t) = η₂ ∫_{t₀}^{t} sec(γs) ds`, evaluated in closed form.
    pub fn theta(&self, t0: T, t: T) -> Result<T> {
        self.check_time(t0)?;
        self.check_time(t)?;
        let half = lit::<T>(0.5);
        let g = |s: T| (self.gamma * s * half + T::frac_pi_4()).tan().ln();
        Ok(self.eta2 / self.gamma * (g(t) - g(t0)))
    }

    /// `δ = arctan(√(1 − (γ/η₁)²) tan δ₀)` for `δ₀ ∈ (0, π/2)`.
    pub fn cutoff_error_relation(&self, delta0: T) -> Result<T> {
        if !(delta0 > T::zero() && delta0 < T::frac_pi_2()) {
            return Err(Error::InvalidParameter {
                name: "delta0",
                value: as_f64(delta0),
                reason: "must lie strictly between 0 and pi/2",
            });
        }
        let r = self.gamma_over_eta1();
        Ok(((T::one() - r * r).sqrt() * delta0.tan()).atan())
    }

    /// `H(t)` as coefficient functions for the numerical integrator.
    pub fn drive_function(&self) -> DriveFunction<'static, T> {
        let drive = *self;
        let limit = self.half_domain();
        DriveFunction::new(-limit, limit, move |t| {
            [drive.eta1, T::zero(), drive.eta2 * (drive.gamma * t).tan()]
        })
    }
}

/// Symmetric cutoff `t ∈ [−τ_c, τ_c]` of the tangent pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWindow<T> {
    tau_c: T,
    delta: T,
    delta0: T,
}

impl<T: Real> TruncationWindow<T> {
    /// Window from the maximal phase angle `γτ_c ∈ (0, π/2)`.
    pub fn from_gamma_tau_c(drive: &TangentDrive<T>, gamma_tau_c: T) -> Result<Self> {
        if !(gamma_tau_c > T::zero() && gamma_tau_c < T::frac_pi_2() - lit(DOMAIN_GUARD)) {
            return Err(Error::InvalidParameter {
                name: "gamma_tau_c",
                value: as_f64(gamma_tau_c),
                reason: "must lie in (0, pi/2) outside the guard band",
            });
        }
        let tau_c = gamma_tau_c / drive.gamma();
        let delta = T::frac_pi_2() - gamma_tau_c;
        let [omega_x, _, omega_z] = drive.field_at(tau_c)?;
        let delta0 = (omega_x / omega_z).atan();

        if drive.is_matched() {
            // Compared as angles: tan δ itself is ill-conditioned as δ → 0.
            let r = drive.gamma_over_eta1();
            let related = ((T::one() - r * r).sqrt() * delta0.tan()).atan();
            if (delta - related).abs() > precision_tol::<T>(WINDOW_TOL) {
                return Err(Error::InconsistentWindow {
                    delta: as_f64(delta),
                    related: as_f64(related),
                });
            }
        }
        Ok(TruncationWindow { tau_c, delta, delta0 })
    }

    /// Window from the phase deficit `δ = π/2 − γτ_c`.
    pub fn from_delta(drive: &TangentDrive<T>, delta: T) -> Result<Self> {
        Self::from_gamma_tau_c(drive, T::frac_pi_2() - delta)
    }

    /// Window from the field-vector deviation `δ₀` at the cutoff instants.
    pub fn from_delta0(drive: &TangentDrive<T>, delta0: T) -> Result<Self> {
        let delta = drive.cutoff_error_relation(delta0)?;
        Self::from_delta(drive, delta)
    }

    pub fn tau_c(&self) -> T {
        self.tau_c
    }

    pub fn delta(&self) -> T {
        self.delta
    }

    pub fn delta0(&self) -> T {
        self.delta0
    }
}

/// `|ψ_m(t)⟩ = e^{imΘ(t,t₀)} G(t) |m⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiabaticState<T: Real> {
    pub two_m: i32,
    pub amplitudes: CVector<T>,
    pub time: T,
}

impl<T: Real> DiabaticState<T> {
    pub fn populations(&self) -> Vec<T> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// `P[(m', m)] = |⟨m'|U|m⟩|²`, rows and columns in basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix<T: Real> {
    spin: Spin,
    probabilities: DMatrix<T>,
}

impl<T: Real> TransitionMatrix<T> {
    pub fn from_unitary(spin: Spin, u: &Unitary<T>) -> Self {
        assert_eq!(spin.dim(), u.dim());
        TransitionMatrix {
            spin,
            probabilities: u.matrix().map(|z| z.norm_sqr()),
        }
    }

    /// `δ_{m', −m}`.
    pub fn anti_identity(spin: Spin) -> Self {
        let n = spin.dim();
        TransitionMatrix {
            spin,
            probabilities: DMatrix::from_fn(n, n, |r, c| if r + c == n - 1 { T::one() } else { T::zero() }),
        }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn probabilities(&self) -> &DMatrix<T> {
        &self.probabilities
    }

    /// `P_{m'm}` addressed by `2m'` and `2m`.
    pub fn get(&self, two_m_to: i32, two_m_from: i32) -> Result<T> {
        Ok(self.probabilities[(self.spin.index_of(two_m_to)?, self.spin.index_of(two_m_from)?)])
    }

    /// Largest deviation of any row or column sum from one.
    pub fn stochasticity_defect(&self) -> T {
        let p = &self.probabilities;
        let rows = p.row_iter().map(|r| (r.sum() - T::one()).abs());
        let cols = p.column_iter().map(|c| (c.sum() - T::one()).abs());
        rows.chain(cols).fold(T::zero(), |a, b| a.max(b))
    }

    pub fn max_abs_diff(&self, other: &TransitionMatrix<T>) -> T {
        (&self.probabilities - &other.probabilities).amax()
    }
}

/// Spin-specific view of a drive; caches the operator matrices.
#[derive(Debug, Clone)]
pub struct TangentProtocol<T: Real> {
    drive: TangentDrive<T>,
    ops: SpinOperators<T>,
}

impl<T: Real> TangentProtocol<T> {
    pub fn new(drive: TangentDrive<T>, spin: Spin) -> Self {
        TangentProtocol {
            drive,
            ops: SpinOperators::new(spin),
        }
    }

    pub fn drive(&self) -> &TangentDrive<T> {
        &self.drive
    }

    pub fn spin(&self) -> Spin {
        self.ops.spin()
    }

    pub fn operators(&self) -> &SpinOperators<T> {
        &self.ops
    }

    /// Rotating-frame map `G(t) = e^{iφJz} e^{i(γt + π/2)Jy}`.
    pub fn frame(&self, t: T) -> Unitary<T> {
        let angle = self.drive.gamma * t + T::frac_pi_2();
        compose([&self.ops.z_phase(self.drive.phi), &self.ops.wigner_d(angle)]).expect("same spin")
    }

    pub fn hamiltonian(&self, t: T) -> Result<crate::scalar::CMatrix<T>> {
        let [x, y, z] = self.drive.field_at(t)?;
        Ok(self.ops.field(x, y, z))
    }

    pub fn propagator(&self, t0: T, t: T) -> Result<Unitary<T>> {
        let theta = self.drive.theta(t0, t)?;
        let g_t = self.frame(t);
        let g_t0 = self.frame(t0).adjoint();
        compose([&g_t, &self.ops.z_phase(theta), &g_t0])
    }

    pub fn diabatic_state(&self, two_m: i32, t0: T, t: T) -> Result<DiabaticState<T>> {
        let k = self.spin().index_of(two_m)?;
        let theta = self.drive.theta(t0, t)?;
        let m = lit::<T>(two_m as f64) * lit(0.5);
        let phase = crate::scalar::cis(m * theta);
        let g = self.frame(t);
        let amplitudes = g.matrix().column(k).map(|z| z * phase);
        Ok(DiabaticState {
            two_m,
            amplitudes,
            time: t,
        })
    }

    /// `E_m(t) = ⟨ψ_m(t)|H(t)|ψ_m(t)⟩`.
    pub fn diabatic_energy(&self, two_m: i32, t: T) -> Result<T> {
        let psi = self.diabatic_state(two_m, t, t)?.amplitudes;
        let h = self.hamiltonian(t)?;
        Ok((psi.adjoint() * h * &psi)[(0, 0)].re)
    }

    /// Eigenvalues of `H(t)`, descending.
    pub fn instantaneous_eigenvalues(&self, t: T) -> Result<Vec<T>> {
        let h = self.hamiltonian(t)?;
        let eig: SymmetricEigen<crate::scalar::Cplx<T>, nalgebra::Dyn> = SymmetricEigen::new(h);
        let mut values: Vec<T> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        Ok(values)
    }

    /// `−m η₁ sec(γt)`: the diabatic level of the `γ/η₁ → 0` limit, which is
    /// what the dashed reference curves of the level diagram show.
    pub fn adiabatic_reference_energy(&self, two_m: i32, t: T) -> Result<T> {
        self.spin().index_of(two_m)?;
        self.drive.check_time(t)?;
        let m = lit::<T>(two_m as f64) * lit(0.5);
        Ok(-m * self.drive.eta1 / (self.drive.gamma * t).cos())
    }

    /// `|⟨m'| e^{i(π−δ)Jy} e^{iΘ(τ_c)Jz} e^{−iδJy} |m⟩|²`.
    pub fn truncated_transition_matrix(&self, window: &TruncationWindow<T>) -> Result<TransitionMatrix<T>> {
        let theta = self.drive.theta(-window.tau_c, window.tau_c)?;
        let u = compose([
            &self.ops.wigner_d(T::pi() - window.delta),
            &self.ops.z_phase(theta),
            &self.ops.wigner_d(-window.delta),
        ])?;
        Ok(TransitionMatrix::from_unitary(self.spin(), &u))
    }
}

pub fn make_matched_drive<T: Real>(
    eta1_raw: T,
    eta2_raw: T,
    gamma: T,
    route: MatchingRoute,
) -> Result<TangentDrive<T>> {
    TangentDrive::matched(eta1_raw, eta2_raw, gamma, route)
}

pub fn propagator<T: Real>(drive: &TangentDrive<T>, spin: Spin, t0: T, t: T) -> Result<Unitary<T>> {
    TangentProtocol::new(*drive, spin).propagator(t0, t)
}

pub fn diabatic_state<T: Real>(
    drive: &TangentDrive<T>,
    spin: Spin,
    two_m: i32,
    t0: T,
    t: T,
) -> Result<DiabaticState<T>> {
    TangentProtocol::new(*drive, spin).diabatic_state(two_m, t0, t)
}

pub fn diabatic_energy<T: Real>(drive: &TangentDrive<T>, spin: Spin, two_m: i32, t: T) -> Result<T> {
    TangentProtocol::new(*drive, spin).diabatic_energy(two_m, t)
}

pub fn instantaneous_eigenvalues<T: Real>(drive: &TangentDrive<T>, spin: Spin, t: T) -> Result<Vec<T>> {
    TangentProtocol::new(*drive, spin).instantaneous_eigenvalues(t)
}

/// The ideal sweep `τ → π/(2γ)`: `P_{m'm} = δ_{m',−m}`, the `δ → 0` limit of
/// [`truncated_transition_matrix`]. Returned analytically because `Θ`
/// diverges in that limit while only contributing phases.
pub fn full_sweep_transfer<T: Real>(_drive: &TangentDrive<T>, spin: Spin) -> TransitionMatrix<T> {
    TransitionMatrix::anti_identity(spin)
}

pub fn truncated_transition_matrix<T: Real>(
    drive: &TangentDrive<T>,
    spin: Spin,
    window: &TruncationWindow<T>,
) -> Result<TransitionMatrix<T>> {
    TangentProtocol::new(*drive, spin).truncated_transition_matrix(window)
}

/// Two-level transfer probability `1 − cos²(Θ/2) sin²δ` of a truncated
/// sweep with accumulated phase `Θ` and end-point tilt `δ`.
pub fn two_level_transfer<T: Real>(theta: T, delta: T) -> T {
    let c = (theta * lit(0.5)).cos();
    let s = delta.sin();
    T::one() - c * c * s * s
}

/// `sin²δ`, the envelope of the two-level infidelity `1 − P_{−+}`.
pub fn infidelity_bound<T: Real>(delta: T) -> T {
    let s = delta.sin();
    s * s
}

/// Two-level `P_{−+}` of a truncated tangent sweep, in closed form.
pub fn two_level_truncated_transfer<T: Real>(drive: &TangentDrive<T>, window: &TruncationWindow<T>) -> Result<T> {
    let theta = drive.theta(-window.tau_c(), window.tau_c())?;
    Ok(two_level_transfer(theta, window.delta()))
}
