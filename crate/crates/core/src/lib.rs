//! Exactly solvable tangent-pulse driving of a spin-j system.
//!
//! The numerical core is generic over the real scalar ([`scalar::Real`]);
//! the aliases below fix it to `f64`, which is what the experiments layer
//! and the `tanpulse` binary use.

pub mod counterdiabatic;
pub mod error;
pub mod experiments;
pub mod oracle;
pub mod protocol;
pub mod quadrature;
pub mod scalar;
pub mod su2;

pub use counterdiabatic::{CdDrive, CdProtocol};
pub use error::{Error, Result};
pub use protocol::{MatchingRoute, TangentDrive, TangentProtocol, TransitionMatrix, TruncationWindow};
pub use scalar::Real;
pub use su2::{Spin, SpinOperators, Unitary};

pub type TangentDrive64 = TangentDrive<f64>;
pub type TangentProtocol64 = TangentProtocol<f64>;
pub type TruncationWindow64 = TruncationWindow<f64>;
pub type TransitionMatrix64 = TransitionMatrix<f64>;
pub type CdDrive64 = CdDrive<f64>;
pub type CdProtocol64 = CdProtocol<f64>;
pub type Unitary64 = Unitary<f64>;
pub type SpinOperators64 = SpinOperators<f64>;
