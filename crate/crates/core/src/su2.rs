//! Angular-momentum matrix algebra for arbitrary half-integer `j`.
//!
//! Every matrix in the crate uses the same basis ordering: index `0` is
//! `m = +j`, index `k` is `m = j - k`, and the last index is `m = -j`. The
//! two-level states `|+>` and `|->` are therefore `(1, 0)` and `(0, 1)`.
//!
//! Rotations follow the `e^{+iφJy}` sign convention, so for `j = 1/2`
//!
//! ```text
//! d(φ) = [[ cos φ/2,  sin φ/2],
//!         [-sin φ/2,  cos φ/2]]
//! ```

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::{as_f64, cis, lit, max_abs_diff, re, CMatrix, CVector, Cplx, Real};

/// Elementwise tolerance on `[Ji, Jj] = i ε_ijk Jk`.
pub const COMMUTATOR_TOL: f64 = 1e-13;
/// Elementwise tolerance on `U†U = I` and on the Casimir identity.
pub const UNITARY_TOL: f64 = 1e-12;
/// Elementwise tolerance on rotation additivity and matrix-exponential agreement.
pub const ROTATION_TOL: f64 = 1e-11;

/// Angular momentum label, stored as `2j` so half-integers stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin {
    two_j: u32,
}

impl Spin {
    pub const HALF: Spin = Spin { two_j: 1 };
    pub const ONE: Spin = Spin { two_j: 2 };

    pub const fn new(two_j: u32) -> Self {
        Spin { two_j }
    }

    pub const fn two_j(self) -> u32 {
        self.two_j
    }

    pub const fn dim(self) -> usize {
        self.two_j as usize + 1
    }

    pub fn j<T: Real>(self) -> T {
        lit::<T>(self.two_j as f64) / lit(2.0)
    }

    /// `2m` values in basis order: `2j, 2j - 2, ..., -2j`.
    pub fn two_ms(self) -> impl DoubleEndedIterator<Item = i32> + ExactSizeIterator {
        let two_j = self.two_j as i32;
        (0..self.dim()).map(move |k| two_j - 2 * k as i32)
    }

    pub fn contains(self, two_m: i32) -> bool {
        two_m.unsigned_abs() <= self.two_j && (self.two_j as i32 - two_m) % 2 == 0
    }

    /// Basis index of the `J_z` eigenstate with quantum number `m = two_m / 2`.
    pub fn index_of(self, two_m: i32) -> Result<usize> {
        if self.contains(two_m) {
            Ok(((self.two_j as i32 - two_m) / 2) as usize)
        } else {
            Err(Error::InvalidMagneticNumber {
                two_m,
                two_j: self.two_j,
            })
        }
    }

    pub fn two_m_at(self, index: usize) -> i32 {
        self.two_j as i32 - 2 * index as i32
    }

    /// Unit vector `|m>`.
    pub fn basis_state<T: Real>(self, two_m: i32) -> Result<CVector<T>> {
        let k = self.index_of(two_m)?;
        let mut v = CVector::zeros(self.dim());
        v[k] = Cplx::new(T::one(), T::zero());
        Ok(v)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.two_j.is_multiple_of(2) {
            write!(f, "{}", self.two_j / 2)
        } else {
            write!(f, "{}/2", self.two_j)
        }
    }
}

/// Human-readable `m` label, e.g. `+1/2`, `0`, `-3/2`.
pub fn m_label(two_m: i32) -> String {
    let sign = match two_m.signum() {
        1 => "+",
        -1 => "-",
        _ => "",
    };
    let a = two_m.unsigned_abs();
    if a.is_multiple_of(2) {
        format!("{sign}{}", a / 2)
    } else {
        format!("{sign}{a}/2")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorLabel {
    Jx,
    Jy,
    Jz,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix<T: Real> {
    pub entries: CMatrix<T>,
    pub label: OperatorLabel,
}

impl<T: Real> OperatorMatrix<T> {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        max_abs_diff(&self.entries, &self.entries.adjoint()) <= tol
    }
}

/// Square unitary matrix acting on a spin multiplet.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary<T: Real> {
    entries: CMatrix<T>,
}

impl<T: Real> Unitary<T> {
    pub fn identity(dim: usize) -> Self {
        Unitary {
            entries: CMatrix::identity(dim, dim),
        }
    }

    /// Wraps `m` after checking `‖U†U − I‖_max ≤ tol`.
    pub fn from_matrix(m: CMatrix<T>, tol: T) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let u = Unitary { entries: m };
        let defect = u.unitarity_defect();
        if defect > tol {
            return Err(Error::NotUnitary {
                defect: as_f64(defect),
                tol: as_f64(tol),
            });
        }
        Ok(u)
    }

    /// Wraps a matrix produced by a construction that is unitary by
    /// design (products of exponentials, integrator output).
    pub(crate) fn from_matrix_unchecked(m: CMatrix<T>) -> Self {
        debug_assert!(m.is_square());
        Unitary { entries: m }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.entries
    }

    pub fn entry(&self, row: usize, col: usize) -> Cplx<T> {
        self.entries[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Unitary {
            entries: self.entries.adjoint(),
        }
    }

    pub fn apply(&self, psi: &CVector<T>) -> CVector<T> {
        &self.entries * psi
    }

    /// `‖U†U − I‖_max`.
    pub fn unitarity_defect(&self) -> T {
        let n = self.dim();
        max_abs_diff(&(self.entries.adjoint() * &self.entries), &CMatrix::identity(n, n))
    }

    /// Global-phase-insensitive similarity `|tr(U₁†U₂)| / dim`.
    pub fn fidelity(&self, other: &Unitary<T>) -> T {
        assert_eq!(self.dim(), other.dim(), "fidelity of unequal dimensions");
        let tr = (self.entries.adjoint() * &other.entries).trace();
        tr.norm_sqr().sqrt() / lit(self.dim() as f64)
    }
}

/// The three generators together with the eigendecomposition of `J_y`,
/// which every rotation `e^{iφJy}` reuses.
#[derive(Debug, Clone)]
pub struct SpinOperators<T: Real> {
    spin: Spin,
    pub jx: OperatorMatrix<T>,
    pub jy: OperatorMatrix<T>,
    pub jz: OperatorMatrix<T>,
    jy_vectors: CMatrix<T>,
    jy_values: Vec<T>,
}

impl<T: Real> SpinOperators<T> {
    pub fn new(spin: Spin) -> Self {
        let (jx, jy, jz) = build_operators(spin);
        let dim = spin.dim();
        let eig: SymmetricEigen<Cplx<T>, nalgebra::Dyn> = SymmetricEigen::new(jy.entries.clone());
        // The spectrum of Jy is exactly {j, j-1, ..., -j}; snapping removes
        // the eigensolver's rounding from the phases e^{iφm}.
        let two = lit::<T>(2.0);
        let jy_values = (0..dim)
            .map(|k| {
                let lambda: T = eig.eigenvalues[k];
                (lambda * two).round() / two
            })
            .collect();
        SpinOperators {
            spin,
            jx,
            jy,
            jz,
            jy_vectors: eig.eigenvectors,
            jy_values,
        }
    }

    pub fn spin(&self) -> Spin {
        self.spin
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// `e^{iφJy}`, real in this basis.
    pub fn wigner_d(&self, phi: T) -> Unitary<T> {
        let v = &self.jy_vectors;
        let dim = self.dim();
        let mut out = CMatrix::zeros(dim, dim);
        for (k, &lambda) in self.jy_values.iter().enumerate() {
            let phase = cis(phi * lambda);
            let col = v.column(k);
            for c in 0..dim {
                let w = phase * col[c].conj();
                for r in 0..dim {
                    out[(r, c)] += col[r] * w;
                }
            }
        }
        out.apply(|z| z.im = T::zero());
        Unitary::from_matrix_unchecked(out)
    }

    /// `e^{iθJz}`: diagonal with entries `e^{imθ}`, `m` descending.
    pub fn z_phase(&self, theta: T) -> Unitary<T> {
        z_phase(self.spin, theta)
    }

    /// `cx·Jx + cy·Jy + cz·Jz`.
    pub fn field(&self, cx: T, cy: T, cz: T) -> CMatrix<T> {
        self.jx.entries.map(|z| z * cx) + self.jy.entries.map(|z| z * cy) + self.jz.entries.map(|z| z * cz)
    }
}

/// Standard `Jx`, `Jy`, `Jz` in the descending-`m` basis.
pub fn build_operators<T: Real>(spin: Spin) -> (OperatorMatrix<T>, OperatorMatrix<T>, OperatorMatrix<T>) {
    let dim = spin.dim();
    let j = spin.j::<T>();
    let half = lit::<T>(0.5);
    // ⟨m+1|J+|m⟩ sits at (k-1, k) where index k carries m.
    let mut jplus = DMatrix::<T>::zeros(dim, dim);
    for k in 1..dim {
        let m = lit::<T>(spin.two_m_at(k) as f64) * half;
        jplus[(k - 1, k)] = (j * (j + T::one()) - m * (m + T::one())).sqrt();
    }
    let jminus = jplus.transpose();

    let jx = (&jplus + &jminus).map(|x| re(x * half));
    // (J+ − J−)/(2i) = −i(J+ − J−)/2
    let jy = (&jplus - &jminus).map(|x: T| Cplx::new(T::zero(), -x * half));
    let jz = CMatrix::from_fn(dim, dim, |r, c| {
        if r == c {
            re(lit::<T>(spin.two_m_at(r) as f64) * half)
        } else {
            Cplx::new(T::zero(), T::zero())
        }
    });
    (
        OperatorMatrix {
            entries: jx,
            label: OperatorLabel::Jx,
        },
        OperatorMatrix {
            entries: jy,
            label: OperatorLabel::Jy,
        },
        OperatorMatrix {
            entries: jz,
            label: OperatorLabel::Jz,
        },
    )
}

/// Wigner small-d matrix `D_{m'm}(φ) = ⟨m'|e^{iφJy}|m⟩`.
pub fn wigner_d<T: Real>(spin: Spin, phi: T) -> Unitary<T> {
    SpinOperators::new(spin).wigner_d(phi)
}

pub fn z_phase<T: Real>(spin: Spin, theta: T) -> Unitary<T> {
    let half = lit::<T>(0.5);
    let diag = CVector::from_iterator(
        spin.dim(),
        spin.two_ms().map(|two_m| cis(lit::<T>(two_m as f64) * half * theta)),
    );
    Unitary::from_matrix_unchecked(CMatrix::from_diagonal(&diag))
}

/// Ordered product `U₁·U₂·…·Uₙ`; the last factor acts first on a state.
pub fn compose<'a, T, I>(factors: I) -> Result<Unitary<T>>
where
    T: Real,
    I: IntoIterator<Item = &'a Unitary<T>>,
{
    let mut iter = factors.into_iter();
    let first = iter.next().ok_or(Error::EmptyProduct)?;
    let mut acc = first.entries.clone();
    for u in iter {
        if u.dim() != acc.nrows() {
            return Err(Error::DimensionMismatch {
                expected: acc.nrows(),
                found: u.dim(),
            });
        }
        acc *= &u.entries;
    }
    Ok(Unitary::from_matrix_unchecked(acc))
}
