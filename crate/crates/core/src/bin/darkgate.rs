// Copyright 2026 darkgate Contributors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(darkgate::cli::main_with_args());
}
