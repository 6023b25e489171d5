//! Evolutionary top-N document retrieval over sentence-embedding populations.
//!
//! A corpus of precomputed embeddings is used directly as the initial
//! population of a genetic algorithm ([`ga`]) or a DE/rand/1/bin differential
//! evolution ([`de`]). Fitness is the mean absolute coordinate difference to the
//! query embedding ([`similarity`]), lower being better. Evolved populations are
//! projected back onto corpus documents and turned into ranked result lists
//! ([`assembly`]), which can be scored with P@n / AP / MAP ([`metrics`]).
//!
//! The numeric core is generic over the embedding scalar (`f32` or `f64`) via
//! [`Scalar`]; the aliases at the crate root fix the common choices.

pub mod assembly;
pub mod de;
pub mod error;
pub mod ga;
pub mod io;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod similarity;
pub mod trace;

pub use error::{Error, Result};
pub use model::{
    validate_corpus, Corpus, Document, EmbeddingVector, ListOrder, Query, RelevanceJudgments,
    ResultEntry, ResultList, Violation,
};
pub use scalar::Scalar;
pub use similarity::{manhattan_similarity, rank_exhaustive, SimilarityScore};
pub use trace::{Algorithm, EngineConfig, GenerationRecord, RunTrace};

/// Single-precision embedding, the on-disk storage precision.
pub type Embedding32 = EmbeddingVector<f32>;
/// Double-precision embedding.
pub type Embedding64 = EmbeddingVector<f64>;
pub type Document32 = Document<f32>;
pub type Document64 = Document<f64>;
pub type Corpus32 = Corpus<f32>;
pub type Corpus64 = Corpus<f64>;
pub type Query32 = Query<f32>;
pub type Query64 = Query<f64>;
pub type RunTrace32 = RunTrace<f32>;
pub type RunTrace64 = RunTrace<f64>;
