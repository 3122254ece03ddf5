//! Counter-diabatic reference protocol for the tangent field. An auxiliary
//! `Jy` field of strength `δ̇_cd(t)` keeps the state on the instantaneous
//! eigenstates of `H(t)`.
//!
//! Its propagator is `e^{iδ_cd(t)Jy} e^{iΘ_cd(t,t₀)Jz} e^{−iδ_cd(t₀)Jy}` with
//! `δ_cd(t) = π − arccos(Ωz/Ω)` and `Θ_cd = ∫ Ω`, `Ω = √(Ωx² + Ωz²)`.
//!
//! Sign: with `[Jx, Jy] = iJz` and the `e^{+iδJy}` frame above, the
//! auxiliary term that cancels the frame's inertial `δ̇_cd Jy` is
//! `−δ̇_cd Jy`, i.e. `H_cd = H − δ̇_cd Jy = H + (Ω × Ω̇)·J / Ω²`. The rate
//! [`CdDrive::cd_rate`] itself is the positive `δ̇_cd`.

use crate::error::Result;
use crate::oracle::DriveFunction;
use crate::protocol::{two_level_transfer, TangentDrive, TransitionMatrix, TruncationWindow};
use crate::quadrature;
use crate::scalar::{lit, Real};
use crate::su2::{compose, Spin, SpinOperators, Unitary};

/// Relative tolerance of the `Θ_cd` quadrature.
pub const THETA_CD_REL_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdDrive<T> {
    base: TangentDrive<T>,
}

impl<T: Real> CdDrive<T> {
    pub fn new(base: TangentDrive<T>) -> Self {
        CdDrive { base }
    }

    pub fn base(&self) -> &TangentDrive<T> {
        &self.base
    }

    /// `|Ω(t)|` of the base field.
    pub fn omega(&self, t: T) -> Result<T> {
        let [x, _, z] = self.base.field_at(t)?;
        Ok((x * x + z * z).sqrt())
    }

    /// `δ_cd(t) = π − arccos(Ωz/Ω)`, principal branch; increases from 0 to π
    /// across the domain and equals π/2 at `t = 0`.
    pub fn delta_cd(&self, t: T) -> Result<T> {
        let [x, _, z] = self.base.field_at(t)?;
        let omega = (x * x + z * z).sqrt();
        Ok(T::pi() - (z / omega).acos())
    }

    /// `δ̇_cd(t) = η₁η₂γ sec²(γt) / (η₁² + η₂² tan²(γt))`.
    pub fn cd_rate(&self, t: T) -> Result<T> {
        self.base.check_time(t)?;
        let (e1, e2, g) = (self.base.eta1(), self.base.eta2(), self.base.gamma());
        let c = (g * t).cos();
        let tn = (g * t).tan();
        Ok(e1 * e2 * g / (c * c * (e1 * e1 + e2 * e2 * tn * tn)))
    }

    /// `Θ_cd(t₀, t) = ∫_{t₀}^{t} Ω(s) ds` by adaptive quadrature.
    pub fn theta_cd(&self, t0: T, t: T) -> Result<T> {
        self.base.check_time(t0)?;
        self.base.check_time(t)?;
        let (e1, e2, g) = (self.base.eta1(), self.base.eta2(), self.base.gamma());
        let omega = |s: T| {
            let z = e2 * (g * s).tan();
            (e1 * e1 + z * z).sqrt()
        };
        quadrature::integrate(omega, t0, t, lit(THETA_CD_REL_TOL), T::zero())
    }

    /// `H_cd(t) = η₁Jx − δ̇_cd(t)Jy + η₂ tan(γt)Jz` as coefficient functions
    /// for the numerical integrator.
    pub fn drive_function(&self) -> DriveFunction<'static, T> {
        let base = self.base;
        let limit = base.half_domain();
        DriveFunction::new(-limit, limit, move |t: T| {
            let (e1, e2, g) = (base.eta1(), base.eta2(), base.gamma());
            let c = (g * t).cos();
            let tn = (g * t).tan();
            let rate = e1 * e2 * g / (c * c * (e1 * e1 + e2 * e2 * tn * tn));
            [e1, -rate, e2 * tn]
        })
    }
}

#[derive(Debug, Clone)]
pub struct CdProtocol<T: Real> {
    drive: CdDrive<T>,
    ops: SpinOperators<T>,
}

impl<T: Real> CdProtocol<T> {
    pub fn new(drive: CdDrive<T>, spin: Spin) -> Self {
        CdProtocol {
            drive,
            ops: SpinOperators::new(spin),
        }
    }

    pub fn drive(&self) -> &CdDrive<T> {
        &self.drive
    }

    pub fn spin(&self) -> Spin {
        self.ops.spin()
    }

    pub fn propagator(&self, t0: T, t: T) -> Result<Unitary<T>> {
        let d_t = self.drive.delta_cd(t)?;
        let d_t0 = self.drive.delta_cd(t0)?;
        let theta = self.drive.theta_cd(t0, t)?;
        compose([
            &self.ops.wigner_d(d_t),
            &self.ops.z_phase(theta),
            &self.ops.wigner_d(-d_t0),
        ])
    }

    /// `|⟨m'| e^{i(π−δ₀)Jy} e^{iΘ_cd(τ_c)Jz} e^{−iδ₀Jy} |m⟩|²`.
    pub fn truncated_transition(&self, window: &TruncationWindow<T>) -> Result<TransitionMatrix<T>> {
        let theta = self.drive.theta_cd(-window.tau_c(), window.tau_c())?;
        let d0 = window.delta0();
        let u = compose([
            &self.ops.wigner_d(T::pi() - d0),
            &self.ops.z_phase(theta),
            &self.ops.wigner_d(-d0),
        ])?;
        Ok(TransitionMatrix::from_unitary(self.spin(), &u))
    }
}

pub fn cd_rate<T: Real>(drive: &CdDrive<T>, t: T) -> Result<T> {
    drive.cd_rate(t)
}

pub fn cd_propagator<T: Real>(drive: &CdDrive<T>, spin: Spin, t0: T, t: T) -> Result<Unitary<T>> {
    CdProtocol::new(*drive, spin).propagator(t0, t)
}

pub fn cd_truncated_transition<T: Real>(
    drive: &CdDrive<T>,
    spin: Spin,
    window: &TruncationWindow<T>,
) -> Result<TransitionMatrix<T>> {
    CdProtocol::new(*drive, spin).truncated_transition(window)
}

/// Two-level `P^cd_{−+} = 1 − cos²(Θ_cd/2) sin²δ₀` in closed form.
pub fn two_level_cd_transfer<T: Real>(drive: &CdDrive<T>, window: &TruncationWindow<T>) -> Result<T> {
    let theta = drive.theta_cd(-window.tau_c(), window.tau_c())?;
    Ok(two_level_transfer(theta, window.delta0()))
}
