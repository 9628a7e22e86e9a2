//! Holds the `acceptance` test target. Run it with `cargo test -p dqs-suite --test acceptance`.
