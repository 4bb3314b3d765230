//! Training, evaluation and comparison orchestration.
