//! Hard-negative generation: prompt rendering, captioner and image-editor
//! clients, output validation and the concurrent pipeline.

mod client;
mod pipeline;
mod prompt;
mod validate;

pub use client::{
    first_line, CaptionClient, CaptionRequest, HttpClient, ImageClient, ImageRequest, MockClient,
};
pub use pipeline::{
    caption_negative, image_negative, run_pipeline, GenerationClientConfig, ImageParams,
    NegativeRecord, RunReport,
};
pub use prompt::{build_prompt, PromptTemplate, UNCONSTRAINED_BLOCK};
pub use validate::{
    validate_negative, word_edit_distance, words, NegativeStatus, RejectReason, ValidationLimits,
};
