// Copyright 2026 The sgeval Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgeval/cli.hpp"

int main(int argc, char** argv) { return sgeval::cli::main(argc, argv); }
