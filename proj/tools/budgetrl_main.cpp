// Copyright 2026 the budgetrl authors
// SPDX-License-Identifier: Apache-2.0
#include "budgetrl/cli.hpp"

int main(int argc, char** argv) {
    return budgetrl::run_cli({argv + 1, argv + argc});
}
