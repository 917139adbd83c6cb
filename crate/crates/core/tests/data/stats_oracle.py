"""Freeze Pearson/Spearman reference values computed in 60-digit arithmetic.

    python3 stats_oracle.py > stats_oracle.json

p-values are two-sided t-test values, written as the regularized incomplete
beta I_{1-r^2}(df/2, 1/2) with df = n - 2.
"""
import json
import random

import mpmath as mp

mp.mp.dps = 60


def pearson(x, y):
    n = len(x)
    xs = [mp.mpf(v) for v in x]
    ys = [mp.mpf(v) for v in y]
    mx = mp.fsum(xs) / n
    my = mp.fsum(ys) / n
    sxy = mp.fsum((a - mx) * (b - my) for a, b in zip(xs, ys))
    sxx = mp.fsum((a - mx) ** 2 for a in xs)
    syy = mp.fsum((b - my) ** 2 for b in ys)
    r = sxy / mp.sqrt(sxx * syy)
    df = n - 2
    one_minus = 1 - r * r
    p = mp.mpf(0) if one_minus <= 0 else mp.betainc(mp.mpf(df) / 2, mp.mpf(1) / 2, 0, one_minus, regularized=True)
    return r, p


def ranks(v):
    order = sorted(range(len(v)), key=lambda i: v[i])
    out = [0] * len(v)
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        avg = mp.mpf(i + j) / 2 + 1
        for k in range(i, j + 1):
            out[order[k]] = avg
        i = j + 1
    return out


def dataset(rng, k):
    n = rng.randint(5, 200)
    rho = rng.uniform(-0.95, 0.95)
    x = [rng.gauss(0, 1) for _ in range(n)]
    y = [rho * a + (1 - rho * rho) ** 0.5 * rng.gauss(0, 1) for a in x]
    if k % 3 == 1:
        # Likert-like values with many ties.
        x = [float(min(5, max(1, round(3 + 1.2 * a)))) for a in x]
        y = [float(min(5, max(1, round(3 + 1.2 * b)))) for b in y]
        if len(set(x)) < 2 or len(set(y)) < 2:
            return dataset(rng, k + 3)
    elif k % 3 == 2:
        x = [round(3 + a, 3) for a in x]
        y = [round(3 + b, 3) for b in y]
    return x, y


def main():
    rng = random.Random(20240614)
    sets = [([1.0, 2.0, 3.0, 4.0, 5.0], [2.0, 1.0, 4.0, 3.0, 5.0])]
    k = 0
    while len(sets) < 50:
        sets.append(dataset(rng, k))
        k += 1
    out = []
    for x, y in sets:
        r, p = pearson(x, y)
        rho, sp = pearson(ranks(x), ranks(y))
        out.append(
            {
                "x": x,
                "y": y,
                "pearson_r": mp.nstr(r, 25),
                "pearson_p": mp.nstr(p, 25),
                "spearman_rho": mp.nstr(rho, 25),
                "spearman_p": mp.nstr(sp, 25),
            }
        )
    print(json.dumps(out, indent=1))


if __name__ == "__main__":
    main()
