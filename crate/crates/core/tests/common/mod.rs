//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex;
use tanpulse::scalar::CMatrix;

pub type C = Complex<f64>;

/// `e^A` by scaling and squaring a truncated Taylor series.
pub fn expm(a: &CMatrix<f64>) -> CMatrix<f64> {
    let n = a.nrows();
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(1e-300);
    let squarings = (norm / 0.25).log2().ceil().max(0.0) as i32;
    let scaled = a.map(|z| z / 2f64.powi(squarings));
    let mut term = CMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = &term * &scaled / C::new(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// `|⟨−| e^{i(π−a)Jy} e^{iΘJz} e^{−iaJy} |+⟩|²` from explicit 2×2 matrices.
pub fn two_level_product(theta: f64, a: f64) -> f64 {
    let rot = |phi: f64| {
        let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
        Matrix2::new(C::new(c, 0.0), C::new(s, 0.0), C::new(-s, 0.0), C::new(c, 0.0))
    };
    let phase = Matrix2::new(
        C::from_polar(1.0, theta / 2.0),
        C::new(0.0, 0.0),
        C::new(0.0, 0.0),
        C::from_polar(1.0, -theta / 2.0),
    );
    let u = rot(std::f64::consts::PI - a) * phase * rot(-a);
    let out = u * Vector2::new(C::new(1.0, 0.0), C::new(0.0, 0.0));
    out[1].norm_sqr()
}

/// Spin-1 rotation `e^{iφJy}` written out entry by entry.
#[rustfmt::skip]
pub fn spin_one_rotation(phi: f64) -> CMatrix<f64> {
    let (c, s) = (phi.cos(), phi.sin() / 2f64.sqrt());
    nalgebra::DMatrix::from_row_slice(3, 3, &[
        (1.0 + c) / 2.0, s, (1.0 - c) / 2.0,
        -s, c, s,
        (1.0 - c) / 2.0, -s, (1.0 + c) / 2.0,
    ])
    .map(|x| C::new(x, 0.0))
}

/// Spin-1/2 rotation `e^{iφJy}`.
pub fn spin_half_rotation(phi: f64) -> CMatrix<f64> {
    let (c, s) = ((phi / 2.0).cos(), (phi / 2.0).sin());
    nalgebra::DMatrix::from_row_slice(2, 2, &[c, s, -s, c]).map(|x| C::new(x, 0.0))
}
