//! Benchmark crate; see benches/main.rs. Run with `cargo bench -p kemweb-bench`.
