//! Parallel averaged Adam (PADAM) with baseline optimizers, a small dense
//! network with analytic gradients, and benchmark objectives.
//!
//! PADAM runs plain Adam and, alongside it, several exponential moving
//! averages ("channels") of the Adam iterate, each with its own weight
//! schedule. Every `n_T` steps each channel is scored on its own fresh
//! mini-batch and the best one becomes the reported iterate.
//!
//! ```
//! use padam::optim::{padam3_channels, padam_step, HyperParams, PadamState};
//!
//! let steps = 100;
//! let mut state = PadamState::new(vec![1.0, -1.0].into(), padam3_channels(steps).unwrap()).unwrap();
//! for _ in 0..steps {
//!     // gradient of |theta|^2 at the raw Adam iterate
//!     let grad: Vec<f64> = state.raw().iter().map(|t| 2.0 * t).collect();
//!     padam_step(&mut state, &grad, &HyperParams::default()).unwrap();
//! }
//! assert!(state.selected().squared_norm() < 2.0);
//! ```

pub mod error;
pub mod harness;
pub mod nn;
pub mod optim;
pub mod params;
pub mod prng;
pub mod problems;
pub mod selftest;

pub use error::{Error, Result};
pub use params::ParamVector;
pub use prng::{derive_stream, RngStream};
