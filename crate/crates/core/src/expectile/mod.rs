//! Expectile loss, its gradient, a reference expectile solver, the
//! asymmetry decay schedule and polynomial expectile regression.

mod decay;
mod loss;
mod polyfit;
mod solver;

pub use decay::{decay_step, gap_fraction, DecayKind, DecaySchedule};
pub use loss::{expectile_loss, expectile_loss_grad, tau_of, ExpectileParams};
pub use polyfit::{cubic_dataset, eval_polynomial, fit_polynomial_expectile, least_squares_polynomial, normalize_unit, unit_grid};
pub use solver::{first_order_residual, solve_expectile, SOLVER_TOLERANCE};
