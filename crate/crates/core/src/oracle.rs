//! Independent numerical integrator for `i ∂ψ/∂t = H(t) ψ` with
//! `H(t) = cx(t) Jx + cy(t) Jy + cz(t) Jz`.
//!
//! Adaptive Dormand–Prince 5(4) with local extrapolation. The Hamiltonian
//! is rebuilt from the coefficient functions at every stage; nothing from
//! the analytic propagators is reused, so agreement between the two is a
//! genuine cross-check.

use crate::error::{Error, Result};
use crate::scalar::{as_f64, lit, vector_norm, CMatrix, CVector, Cplx, Real};
use crate::su2::{Spin, SpinOperators, Unitary};

pub const MIN_TOL: f64 = 1e-13;
pub const MAX_TOL: f64 = 1e-6;
/// Tolerance used by validation runs unless overridden.
pub const DEFAULT_TOL: f64 = 1e-10;
const MAX_STEPS: usize = 5_000_000;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
#[rustfmt::skip]
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights minus embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type Coefficients<'a, T> = dyn Fn(T) -> [T; 3] + Send + Sync + 'a;

/// Field coefficients `(cx, cy, cz)` of `H(t) = cx Jx + cy Jy + cz Jz` on an
/// open time interval.
pub struct DriveFunction<'a, T> {
    t_min: T,
    t_max: T,
    coeffs: Box<Coefficients<'a, T>>,
}

impl<'a, T: Real> DriveFunction<'a, T> {
    pub fn new<F>(t_min: T, t_max: T, coeffs: F) -> Self
    where
        F: Fn(T) -> [T; 3] + Send + Sync + 'a,
    {
        DriveFunction {
            t_min,
            t_max,
            coeffs: Box::new(coeffs),
        }
    }

    /// Time-independent field, defined for all `t`.
    pub fn constant(cx: T, cy: T, cz: T) -> Self {
        let inf = lit::<T>(f64::INFINITY);
        Self::new(-inf, inf, move |_| [cx, cy, cz])
    }

    pub fn domain(&self) -> (T, T) {
        (self.t_min, self.t_max)
    }

    pub fn coefficients(&self, t: T) -> [T; 3] {
        (self.coeffs)(t)
    }

    fn check(&self, t: T) -> Result<()> {
        if t > self.t_min && t < self.t_max {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                t: as_f64(t),
                min: as_f64(self.t_min),
                max: as_f64(self.t_max),
            })
        }
    }
}

impl<T> std::fmt::Debug for DriveFunction<'_, T>
where
    T: std::fmt::Debug,
{
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DriveFunction")
            .field("t_min", &self.t_min)
            .field("t_max", &self.t_max)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub struct IntegrationResult<T: Real> {
    pub final_state: CVector<T>,
    /// Filled by [`integrate_columns`]; columns are the evolved basis states.
    pub final_propagator: Option<Unitary<T>>,
    pub steps_taken: usize,
    pub rejected_steps: usize,
    /// Largest `|‖ψ‖ − 1|` seen at any accepted step.
    pub max_norm_drift: T,
}

fn check_tol<T: Real>(tol: T) -> Result<()> {
    if tol >= lit(MIN_TOL) && tol <= lit(MAX_TOL) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "tol",
            value: as_f64(tol),
            reason: "must lie in [1e-13, 1e-6]",
        })
    }
}

struct Rhs<'d, 'a, T: Real> {
    drive: &'d DriveFunction<'a, T>,
    ops: SpinOperators<T>,
}

impl<T: Real> Rhs<'_, '_, T> {
    /// `−i H(t) ψ`.
    fn eval(&self, t: T, psi: &CVector<T>) -> CVector<T> {
        let [x, y, z] = self.drive.coefficients(t);
        let h: CMatrix<T> = self.ops.field(x, y, z);
        let minus_i = Cplx::new(T::zero(), -T::one());
        (h * psi).map(|a| a * minus_i)
    }
}

/// Evolves `psi0` from `t0` to `t1`. Backward integration (`t1 < t0`) is
/// allowed.
pub fn integrate_state<T: Real>(
    drive: &DriveFunction<'_, T>,
    spin: Spin,
    psi0: &CVector<T>,
    t0: T,
    t1: T,
    tol: T,
) -> Result<IntegrationResult<T>> {
    check_tol(tol)?;
    drive.check(t0)?;
    drive.check(t1)?;
    if psi0.len() != spin.dim() {
        return Err(Error::DimensionMismatch {
            expected: spin.dim(),
            found: psi0.len(),
        });
    }
    let norm0 = vector_norm(psi0);
    if (norm0 - T::one()).abs() > lit::<T>(1e-10).max(T::default_epsilon() * lit(64.0)) {
        return Err(Error::InvalidParameter {
            name: "psi0",
            value: as_f64(norm0),
            reason: "initial state must have unit norm",
        });
    }
    let rhs = Rhs {
        drive,
        ops: SpinOperators::new(spin),
    };
    let mut out = IntegrationResult {
        final_state: psi0.clone(),
        final_propagator: None,
        steps_taken: 0,
        rejected_steps: 0,
        max_norm_drift: T::zero(),
    };
    if t0 == t1 {
        return Ok(out);
    }

    let span = t1 - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut y = psi0.clone();
    let mut k0 = rhs.eval(t, &y);
    // First guess from the field strength; the controller takes over at once.
    let scale = k0.iter().map(|z| z.norm_sqr()).fold(T::zero(), |a, b| a.max(b)).sqrt();
    let mut h = (span.abs() * lit(1e-3)).min(lit::<T>(0.01) / scale.max(lit(1e-12))) * dir;

    let a: Vec<Vec<T>> = A.iter().map(|row| row.iter().map(|&x| lit(x)).collect()).collect();
    let c: Vec<T> = C.iter().map(|&x| lit(x)).collect();
    let e: Vec<T> = E.iter().map(|&x| lit(x)).collect();
    let safety = lit::<T>(0.9);
    let (fac_min, fac_max) = (lit::<T>(0.2), lit::<T>(5.0));
    let fifth = lit::<T>(0.2);
    let tiny = T::default_epsilon() * lit(16.0);

    let mut k: Vec<CVector<T>> = Vec::with_capacity(7);
    loop {
        if (t1 - t) * dir <= T::zero() {
            break;
        }
        if (t + h - t1) * dir > T::zero() {
            h = t1 - t;
        }
        if h.abs() <= tiny * t.abs().max(T::one()) {
            return Err(Error::StepUnderflow {
                t: as_f64(t),
                h: as_f64(h),
            });
        }
        if out.steps_taken + out.rejected_steps >= MAX_STEPS {
            return Err(Error::TooManySteps {
                t: as_f64(t),
                max_steps: MAX_STEPS,
            });
        }

        k.clear();
        k.push(k0.clone());
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let w = a[s][j];
                if w != T::zero() {
                    ys.axpy(Cplx::new(h * w, T::zero()), kj, Cplx::new(T::one(), T::zero()));
                }
            }
            if s == 6 {
                // Stage 7 is evaluated at the 5th-order solution (FSAL).
                let ks = rhs.eval(t + h, &ys);
                k.push(ks);
                let err_vec = k
                    .iter()
                    .zip(e.iter())
                    .fold(CVector::<T>::zeros(y.len()), |acc, (kj, &ej)| acc + kj.map(|z| z * ej));
                let finite = ys.iter().all(|z| z.re.is_finite() && z.im.is_finite());
                let err = if finite {
                    err_vec
                        .iter()
                        .map(|z| z.norm_sqr().sqrt() * h.abs())
                        .fold(T::zero(), |m, v| m.max(v))
                        / tol
                } else {
                    lit(f64::INFINITY)
                };
                if err <= T::one() {
                    t += h;
                    y = ys;
                    k0 = k[6].clone();
                    out.steps_taken += 1;
                    let drift = (vector_norm(&y) - T::one()).abs();
                    out.max_norm_drift = out.max_norm_drift.max(drift);
                } else {
                    out.rejected_steps += 1;
                }
                let factor = if !err.is_finite() {
                    fac_min
                } else if err == T::zero() {
                    fac_max
                } else {
                    (safety * err.powf(-fifth)).max(fac_min).min(fac_max)
                };
                h *= factor;
                break;
            }
            let ks = rhs.eval(t + c[s] * h, &ys);
            k.push(ks);
        }
    }
    out.final_state = y;
    Ok(out)
}

/// Integrates every basis vector; the columns of `final_propagator` are the
/// evolved states, `final_state` is the last column, and step counts and
/// drift are aggregated over columns.
pub fn integrate_columns<T: Real>(
    drive: &DriveFunction<'_, T>,
    spin: Spin,
    t0: T,
    t1: T,
    tol: T,
) -> Result<IntegrationResult<T>> {
    let dim = spin.dim();
    let mut u = CMatrix::zeros(dim, dim);
    let mut last = None;
    let (mut steps, mut rejected, mut drift) = (0, 0, T::zero());
    for col in 0..dim {
        let psi0 = spin.basis_state(spin.two_m_at(col))?;
        let r = integrate_state(drive, spin, &psi0, t0, t1, tol)?;
        u.set_column(col, &r.final_state);
        steps += r.steps_taken;
        rejected += r.rejected_steps;
        drift = drift.max(r.max_norm_drift);
        last = Some(r.final_state);
    }
    Ok(IntegrationResult {
        final_state: last.expect("dim >= 1"),
        final_propagator: Some(Unitary::from_matrix_unchecked(u)),
        steps_taken: steps,
        rejected_steps: rejected,
        max_norm_drift: drift,
    })
}

/// Numerically integrated `U(t1, t0)`.
pub fn integrate_propagator<T: Real>(
    drive: &DriveFunction<'_, T>,
    spin: Spin,
    t0: T,
    t1: T,
    tol: T,
) -> Result<Unitary<T>> {
    Ok(integrate_columns(drive, spin, t0, t1, tol)?
        .final_propagator
        .expect("integrate_columns always fills the propagator"))
}
