// Copyright 2026 The ffsal Authors
// SPDX-License-Identifier: Apache-2.0

#include "ffsal/cli.hpp"

int main(int argc, char** argv) { return ffsal::cli_main(argc, argv); }
