"""Reference P-values for the five built-in tests, computed with scipy.

Mirrors the formulas, parameter tables and truncated summation bounds of the
NIST STS 2.1.2 C sources (frequency.c, blockFrequency.c, runs.c,
longestRunOfOnes.c, cusum.c). Used once to freeze the values checked in
tests/sts_oracle.rs.

    python3 sts_oracle.py data_0.txt data_1.txt ...
"""

import math
import sys

import numpy as np
from scipy.special import erfc, gammaincc
from scipy.stats import norm


def load(path):
    with open(path) as f:
        text = "".join(f.read().split())
    return np.frombuffer(text.encode(), dtype=np.uint8) - ord("0")


def frequency(e):
    n = len(e)
    s = abs(int(2 * e.sum()) - n) / math.sqrt(n)
    return erfc(s / math.sqrt(2))


def block_frequency(e, m):
    n = len(e)
    blocks = n // m
    pi = e[: blocks * m].reshape(blocks, m).sum(axis=1) / m
    chi2 = 4.0 * m * ((pi - 0.5) ** 2).sum()
    return gammaincc(blocks / 2.0, chi2 / 2.0)


def runs(e):
    n = len(e)
    pi = e.sum() / n
    if abs(pi - 0.5) > 2.0 / math.sqrt(n):
        return 0.0
    v = 1 + int((e[1:] != e[:-1]).sum())
    return erfc(abs(v - 2.0 * n * pi * (1 - pi)) / (2.0 * math.sqrt(2.0 * n) * pi * (1 - pi)))


def longest_run(e):
    n = len(e)
    if n < 6272:
        k, m, v = 3, 8, [1, 2, 3, 4]
        pi = [0.21484375, 0.3671875, 0.23046875, 0.1875]
    elif n < 750000:
        k, m, v = 5, 128, [4, 5, 6, 7, 8, 9]
        pi = [0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847]
    else:
        k, m, v = 6, 10000, [10, 11, 12, 13, 14, 15, 16]
        pi = [0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727]
    blocks = n // m
    nu = [0] * (k + 1)
    for i in range(blocks):
        best = run = 0
        for b in e[i * m : (i + 1) * m]:
            run = run + 1 if b else 0
            best = max(best, run)
        if best < v[0]:
            nu[0] += 1
        for j in range(k + 1):
            if best == v[j]:
                nu[j] += 1
        if best > v[k]:
            nu[k] += 1
    chi2 = sum((nu[i] - blocks * pi[i]) ** 2 / (blocks * pi[i]) for i in range(k + 1))
    return gammaincc(k / 2.0, chi2 / 2.0)


def c_div(a, b):
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def cusum(e, reverse):
    n = len(e)
    x = 2 * e.astype(np.int64) - 1
    if reverse:
        x = x[::-1]
    z = int(np.abs(np.cumsum(x)).max())
    sq = math.sqrt(n)
    s1 = 0.0
    for k in range(c_div(c_div(-n, z) + 1, 4), c_div(c_div(n, z) - 1, 4) + 1):
        s1 += norm.cdf((4 * k + 1) * z / sq) - norm.cdf((4 * k - 1) * z / sq)
    s2 = 0.0
    for k in range(c_div(c_div(-n, z) - 3, 4), c_div(c_div(n, z) - 1, 4) + 1):
        s2 += norm.cdf((4 * k + 3) * z / sq) - norm.cdf((4 * k + 1) * z / sq)
    return 1.0 - s1 + s2


if __name__ == "__main__":
    for path in sys.argv[1:]:
        e = load(path)
        print(
            f"{path} n={len(e)} monobit={frequency(e):.12f} block128={block_frequency(e, 128):.12f} "
            f"runs={runs(e):.12f} longest={longest_run(e):.12f} "
            f"cusum_f={cusum(e, False):.12f} cusum_b={cusum(e, True):.12f}"
        )
