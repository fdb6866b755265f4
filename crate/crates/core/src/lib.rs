//! Fault estimation for commensurate nonlinear fractional-order systems with a
//! step-by-step second-order (super-twisting) sliding mode observer.
//!
//! The crate is organized bottom-up:
//!
//! - [`fraccalc`]: Grünwald–Letnikov weights, derivatives and the explicit solver
//! - [`expr`]: the expression language for `f1`, `f2` and the fault signal
//! - [`plant`]: the observable-form plant and empirical signal bounds
//! - [`observer`]: the gated super-twisting observer
//! - [`sim`]: co-simulation and the CSV trajectory format
//! - [`analysis`]: gain conditions, the Lyapunov inequality check, metrics
//! - [`config`]: scenario files and the built-in example preset
//! - [`glcheck`]: analytic oracle suite for the GL engine
//! - [`svg`]: minimal line charts for trajectories
//! - [`cli`]: the `fracsmo` command-line front end

pub mod analysis;
pub mod cli;
pub mod config;
pub mod expr;
pub mod fraccalc;
pub mod glcheck;
pub mod observer;
pub mod plant;
pub mod sim;
pub mod svg;
