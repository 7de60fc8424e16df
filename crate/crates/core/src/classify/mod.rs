//! Softmax classification head over frozen embeddings.
//!
//! Training uses AdamW with decoupled weight decay on the weight matrix,
//! early stopping on validation loss, and seeded random search over the
//! learning rate, batch size and epoch count.

mod head;
mod search;
mod split;

pub use head::{
    argmax_rows, cross_entropy, gradients, predict_scores, softmax, train_head, Gradients, HeadFile, LinearHead, TrainConfig,
    TrialResult,
};
pub use search::{random_search, SearchOutcome, SearchSpace, DEFAULT_TRIALS};
pub use split::{stratified_split, Split};
