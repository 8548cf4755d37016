//! Contrastive image/text objectives with concreteness-driven hard-negative margins.
//!
//! The crate is organised bottom-up:
//!
//! - [`simcore`]: embedding containers, the blocked `[anchors | hard negatives]`
//!   batch layout and temperature-scaled similarity matrices.
//! - [`margin`]: logistic (Fermi–Dirac) margin schedules over concreteness.
//! - [`cement`]: InfoNCE and the margin-injected Cement loss, with analytic
//!   gradients w.r.t. logits and embeddings.
//! - [`graddiag`]: positive-pull / hard-reject / easy-reject decomposition and
//!   batch-size sweeps over synthetic logits.
//! - [`harness`]: a toy compositional dataset and linear dual encoder trainer.

pub mod cement;
pub mod error;
pub mod graddiag;
pub mod harness;
pub mod margin;
pub mod simcore;

pub use error::{Error, Result};
