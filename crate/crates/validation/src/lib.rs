//! Acceptance harness for the library and the `hyperkappa` binary.
//!
//! Everything lives in `tests/acceptance.rs`; run it with
//! `cargo test -p hyperkappa-validation --test acceptance`.
