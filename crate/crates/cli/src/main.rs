// Copyright 2026 The gainloss Authors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    std::process::exit(gainloss_cli::run(std::env::args_os()));
}
