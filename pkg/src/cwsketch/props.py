"""Statistical checks of the CWS properties, run by ``cwsketch props``."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from .sets import SparseWeightedSet
from .sketchers import cws_draw, sketch
from .variates import Role, VariateScheme

ALPHA = 0.01


@dataclass(frozen=True)
class PropResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def check_uniform01(seed: int, n: int = 10**6) -> PropResult:
    scheme = VariateScheme(seed, 1000)
    u = scheme.uniform(np.arange(n // 1000)[:, None], np.arange(1000)[None, :], Role.BETA1).ravel()
    ks = stats.kstest(u, "uniform")
    return PropResult("uniform01 ~ U(0,1)", ks.pvalue > ALPHA, f"KS D={ks.statistic:.5f} p={ks.pvalue:.3f}")


def check_gamma_moments(seed: int, n: int = 10**6) -> PropResult:
    scheme = VariateScheme(seed, 1000)
    r = scheme.gamma(np.arange(n // 1000)[:, None], np.arange(1000)[None, :], Role.R1).ravel()
    mean, var = r.mean(), r.var(ddof=1)
    ok = abs(mean - 2) <= 0.01 and abs(var - 2) <= 0.03
    return PropResult("gamma21 moments", ok, f"mean={mean:.4f} var={var:.4f} (want 2+-0.01, 2+-0.03)")


def check_uniform_power(seed: int, n: int = 10**6) -> PropResult:
    scheme = VariateScheme(seed, 1000)
    e, d = np.arange(n // 1000)[:, None], np.arange(1000)[None, :]
    m = np.exp(-scheme.gamma(e, d, Role.R1)) ** scheme.uniform(e, d, Role.BETA1)
    ks = stats.kstest(m.ravel(), "uniform")
    return PropResult("exp(-r)^b ~ U(0,1)", ks.pvalue > ALPHA, f"KS D={ks.statistic:.5f} p={ks.pvalue:.3f}")


def check_role_independence(seed: int, n: int = 10**5) -> PropResult:
    scheme = VariateScheme(seed, 100)
    e, d = np.arange(n // 100)[:, None], np.arange(100)[None, :]
    worst = 0.0
    roles = [Role.BETA1, Role.BETA2, Role.U, Role.V]
    for i, a in enumerate(roles):
        for b in roles[i + 1:]:
            rho = np.corrcoef(scheme.uniform(e, d, a).ravel(), scheme.uniform(e, d, b).ravel())[0, 1]
            worst = max(worst, abs(rho))
    return PropResult("cross-role independence", worst <= 0.01, f"max |corr|={worst:.4f} (<= 0.01)")


def check_selection(seed: int, algorithm: str = "i2cws", n: int = 10**5) -> PropResult:
    S = SparseWeightedSet.from_mapping({1: 0.5, 2: 1.0, 3: 1.5, 4: 2.0, 5: 5.0})
    fp = sketch(S, VariateScheme(seed, n), algorithm)
    counts = np.array([np.count_nonzero(fp.k == k) for k in S.ids])
    expected = n * S.weights / S.weights.sum()
    chi = stats.chisquare(counts, expected)
    return PropResult(f"{algorithm} Pr[k*=k] ~ S_k/sum S", chi.pvalue > ALPHA,
                      f"chi2={chi.statistic:.2f} p={chi.pvalue:.3f}")


def check_y_uniform(seed: int, weight: float = 3.7, n: int = 10**5) -> PropResult:
    S = SparseWeightedSet.from_mapping({0: weight})
    y = cws_draw(S, VariateScheme(seed, n), "i2cws", np.arange(n)).y
    ks = stats.kstest(y, "uniform", args=(0, weight))
    return PropResult(f"i2cws y ~ U(0,{weight}]", ks.pvalue > ALPHA, f"KS D={ks.statistic:.5f} p={ks.pvalue:.3f}")


def random_shrunk_pair(rng: np.random.Generator, universe: int = 1000):
    """A random S and a T with T_k <= S_k: each weight kept, shrunk or dropped."""
    n = int(rng.integers(1, 16))
    ids = rng.choice(universe, size=n, replace=False)
    w = np.exp(rng.normal(0.0, 1.5, n))
    mode = rng.random(n)
    t = np.where(mode < 0.3, w, np.where(mode < 0.8, w * rng.random(n), 0.0))
    if not (t > 0).any():
        t[0] = w[0]
    return SparseWeightedSet(ids, w), SparseWeightedSet(ids, t)


def consistency_violations(algorithm: str, seed: int, pairs: int = 1000, D: int = 32) -> tuple[int, int]:
    """(checked samples, violations) over random shrunk pairs sharing one scheme."""
    rng = np.random.default_rng(seed)
    scheme = VariateScheme(seed, D)
    checked = violations = 0
    for _ in range(pairs):
        S, T = random_shrunk_pair(rng)
        fs, ft = sketch(S, scheme, algorithm), sketch(T, scheme, algorithm)
        ys = fs.y.view(np.float64)
        t_of = dict(zip(T.ids.tolist(), T.weights.tolist()))
        for d in range(D):
            t_k = t_of.get(int(fs.k[d]))
            if t_k is not None and ys[d] <= t_k:
                checked += 1
                if not (ft.k[d] == fs.k[d] and ft.y[d] == fs.y[d]):
                    violations += 1
    return checked, violations


def check_consistency(seed: int, algorithm: str) -> PropResult:
    checked, bad = consistency_violations(algorithm, seed)
    return PropResult(f"{algorithm} consistency", bad == 0, f"{bad} violations in {checked} checked samples")


def check_exponential_race(seed: int, n: int = 10**5) -> PropResult:
    details, ok = [], True
    for w in (0.1, 1.0, 10.0):
        draw = cws_draw(SparseWeightedSet.from_mapping({0: w}), VariateScheme(seed, n), "i2cws", np.arange(n))
        a = np.exp(draw.ln_a[0])
        ks = stats.kstest(a, "expon", args=(0, 1 / w))
        ok &= ks.pvalue > ALPHA
        details.append(f"S={w:g}: p={ks.pvalue:.3f}")
    return PropResult("i2cws a ~ Exp(S)", ok, ", ".join(details))


def joint_tail_frequency(algorithm: str, seed: int, weight: float = 1.0, n: int = 10**5) -> float:
    """Frequency of {y/S < 0.1 and S/z < 0.1} on a singleton."""
    S = SparseWeightedSet.from_mapping({0: weight})
    draw = cws_draw(S, VariateScheme(seed, n), algorithm, np.arange(n))
    s_over_z = weight * np.exp(-draw.ln_z[0])
    return float(np.mean((draw.y / weight < 0.1) & (s_over_z < 0.1)))


def check_independence(seed: int) -> list[PropResult]:
    f2 = joint_tail_frequency("i2cws", seed)
    f1 = joint_tail_frequency("icws", seed)
    return [
        PropResult("i2cws joint tail = 0.01", abs(f2 - 0.01) <= 0.002, f"freq={f2:.5f} (0.01 +- 0.002)"),
        PropResult("icws joint tail departs from 0.01", abs(f1 - 0.01) > 0.002, f"freq={f1:.5f} (want |freq-0.01| > 0.002)"),
    ]


def check_index_stream(seed: int) -> PropResult:
    rng = np.random.default_rng(seed)
    scheme = VariateScheme(seed, 64)
    same = True
    for _ in range(200):
        S, _ = random_shrunk_pair(rng)
        same &= np.array_equal(sketch(S, scheme, "li2015").k, sketch(S, scheme, "icws").k)
    return PropResult("li2015 k* == icws k*", bool(same), "200 random sets x 64 samples")


def check_monotone_a(seed: int) -> PropResult:
    rng = np.random.default_rng(seed)
    scheme = VariateScheme(seed, 64)
    bad = 0
    for _ in range(200):
        S, _ = random_shrunk_pair(rng)
        j = int(rng.integers(len(S)))
        grown = S.weights.copy()
        grown[j] *= 1.0 + 10.0 * rng.random()
        before = cws_draw(S, scheme, "i2cws", np.arange(64)).ln_a[j]
        after = cws_draw(SparseWeightedSet(S.ids, grown), scheme, "i2cws", np.arange(64)).ln_a[j]
        bad += int(np.count_nonzero(after > before))
    return PropResult("i2cws a_k non-increasing in S_k", bad == 0, f"{bad} increases")


def time_per_cell(S: SparseWeightedSet, scheme: VariateScheme, repeats: int = 7) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        sketch(S, scheme, "i2cws")
        best = min(best, time.perf_counter() - t0)
    return best / (len(S) * scheme.D)


def check_constant_time(seed: int, n: int = 1000, D: int = 256) -> PropResult:
    rng = np.random.default_rng(seed)
    S = SparseWeightedSet(np.arange(n), 1.0 - rng.random(n))
    scheme = VariateScheme(seed, D)
    base = time_per_cell(S, scheme)
    big = time_per_cell(S.scaled(1e6), scheme)
    ratio = big / base
    return PropResult("i2cws time independent of weight scale", ratio <= 1.5,
                      f"x1e6 / x1 per-cell time ratio = {ratio:.3f} (<= 1.5)")


def run_all(seed: int = 1, emit: Callable[[str], None] = print) -> list[PropResult]:
    results: list[PropResult] = []

    def add(res):
        for r in res if isinstance(res, list) else [res]:
            results.append(r)
            emit(r.line())

    add(check_uniform01(seed))
    add(check_gamma_moments(seed))
    add(check_uniform_power(seed))
    add(check_role_independence(seed))
    add(check_selection(seed, "i2cws"))
    add(check_selection(seed, "icws"))
    add(check_y_uniform(seed))
    for algorithm in ("i2cws", "icws", "ccws"):
        add(check_consistency(seed, algorithm))
    add(check_exponential_race(seed))
    add(check_independence(seed))
    add(check_index_stream(seed))
    add(check_monotone_a(seed))
    add(check_constant_time(seed))
    return results
