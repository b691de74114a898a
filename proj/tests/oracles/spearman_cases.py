#!/usr/bin/env python3
# Copyright 2026 The progbench Authors
# SPDX-License-Identifier: Apache-2.0
"""Random tied inputs with Spearman values from scipy (percent units).
Cases with zero rank variance on either side carry null."""

import json
import math
import random
from pathlib import Path

from scipy.stats import spearmanr

OUT = Path(__file__).resolve().parent.parent / "fixtures" / "spearman_tied.json"


def main():
    rng = random.Random(20260101)
    cases = []
    while len(cases) < 500:
        n = rng.randint(2, 12)
        levels = rng.randint(1, 5)
        x = [float(rng.randint(0, levels)) * 12.5 for _ in range(n)]
        y = [float(rng.randint(0, 4 * levels)) * 5.0 for _ in range(n)]
        if len(set(x)) == 1 or len(set(y)) == 1:
            rho = None
        else:
            rho = 100.0 * float(spearmanr(x, y).statistic)
            assert not math.isnan(rho)
        cases.append({"x": x, "y": y, "rho": rho})
    worked = 100.0 * float(spearmanr([50, 50, 80], [10, 30, 60]).statistic)
    OUT.write_text(json.dumps({"worked_example": worked, "cases": cases}) + "\n")


if __name__ == "__main__":
    main()
