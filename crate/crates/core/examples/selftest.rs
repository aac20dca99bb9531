//! Runs the built-in verification checks and prints the result table.
//!
//! `cargo run --release --example selftest`

use vqra::selftest::run_selftest;

fn main() {
    let report = run_selftest(None);
    print!("{}", report.table());
    if !report.all_passed() {
        std::process::exit(1);
    }
}
