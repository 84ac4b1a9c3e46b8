//! Quadrature on the real line and in the complex time plane.

pub mod gauss_kronrod;
pub mod halfline;
pub mod moments;
pub mod roots;
pub mod saddle;
pub mod steepest;

pub use gauss_kronrod::{Estimate, Tolerance};
pub use halfline::{integrate_halfline, integrate_halfline_n, ComplexValue, ContourMethod, ContourSpec, RotationSense};
pub use moments::{phase_moments, Moments};
pub use roots::{stationary_points, LaurentPhase};
pub use saddle::saddle_value;
pub use steepest::{descent_contour, integrate_along, integrate_moments, CubicPhase, DescentContour, Segment};
