#!/usr/bin/env python3
"""
Recompute the reference values used by the test-suite from first principles.

Nothing here imports pcls: every anchor is evaluated with plain math so it can
serve as an independent oracle for the library.

Usage:
    python scripts/derive_anchors.py
    python scripts/derive_anchors.py --json
"""

import argparse
import json
import math


def psi_1(v):
    return math.exp(0.1 * v)


def psi_2(v):
    return 0.5 + 0.5 * math.exp(0.2 * v)


def gamma_1(tau):
    return math.exp(-abs(tau))


def xp_same_block(a_t, a_u, a_block, g):
    return 2.0 * a_t * a_u / (a_block * (a_t + a_u)) * g


def xp_cross_block(a_t, a_u, a_m, a_n, g):
    return a_t * a_u / (a_m * a_n) * g


def derive() -> dict:
    # Default model: lengths [1, 2], sigma = [1, 2], rho = 0.5
    sigma, rho = (1.0, 2.0), 0.5
    gamma_12 = sigma[0] * sigma[1] * rho

    ls_cross = psi_1(1.0 + 1.5) * gamma_1(1.0 - 1.5)
    ls_first = psi_1(0.5 + 0.5) * gamma_1(0.0)
    xp_cross = xp_cross_block(0.5, 1.0, 1.0, 2.0, gamma_12)
    xp_first = xp_same_block(0.5, 0.5, 1.0, sigma[0] ** 2)

    return {
        "psi_mixture_at_1": psi_2(1.0),
        "example_2_1_at_2": (1.0 + 4.0) * math.exp(2.0),
        "ls_cov(1.0, 1.5)": ls_cross,
        "ls_cov(0.5, 0.5)": ls_first,
        "ls_cov(2.0, 2.0)": psi_1(4.0) * gamma_1(0.0) + psi_2(4.0) * math.cos(0.0),
        "ls_cov(2.0, 2.0), local clock": psi_1(4.0) * gamma_1(0.0) + psi_2(4.0 - 2.0) * math.cos(0.0),
        "xp_cov(2.0, 2.0)": xp_same_block(1.0, 1.0, 2.0, sigma[1] ** 2),
        "xp_cov(0.5, 2.0)": xp_cross,
        "total_cov(1.0, 1.5)": ls_cross + xp_cross_block(1.0, 0.5, 1.0, 2.0, gamma_12),
        "total_cov(0.5, 0.5)": ls_first + xp_first,
        "factor_ratio(0.2, 0.8 / 0.4, 0.6)": gamma_1(-0.6) / gamma_1(-0.2),
        "F_mass(1, 2, lambda=1, t=0.9, u=1.1)": psi_1(0.9 + 1.1) * 0.5,
        "interval_measure_cov(|A|=1, |B|=4)": 2.0 * 1.0 * 4.0 / (4.0 * 5.0),
        "interval_correlation(0.25, 1.0)": 2.0 * math.sqrt(0.25 * 1.0) / 1.25,
    }


def main():
    parser = argparse.ArgumentParser(description="Print the reference values of the test-suite")
    parser.add_argument("--json", action="store_true", help="Print as JSON")
    args = parser.parse_args()

    anchors = derive()
    if args.json:
        print(json.dumps(anchors, indent=2))
        return
    width = max(len(name) for name in anchors)
    for name, value in anchors.items():
        print(f"{name:<{width}}  {value:.6f}")


if __name__ == "__main__":
    main()
