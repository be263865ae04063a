"""One-dimensional Gaussian mixtures: EM fitting, BIC model selection, interval mass."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np

VARIANCE_FLOOR = 1e-4
MAX_COMPONENTS = 10
DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 300

_LOG_2PI = math.log(2.0 * math.pi)
_MIN_WEIGHT = 1e-12


class InvalidOrder(ValueError):
    """Requested component count is not in ``1..len(samples)``."""


@dataclass(frozen=True)
class GaussianComponent:
    weight: float
    mean: float
    variance: float

    def __post_init__(self):
        if not self.weight > 0:
            raise ValueError(f"component weight must be positive, got {self.weight}")
        if not self.variance > 0:
            raise ValueError(f"component variance must be positive, got {self.variance}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    def cdf(self, x: float) -> float:
        if x == math.inf:
            return 1.0
        if x == -math.inf:
            return 0.0
        return 0.5 * math.erfc(-(x - self.mean) / (self.std * math.sqrt(2.0)))


@dataclass(frozen=True)
class GaussianMixture:
    components: tuple[GaussianComponent, ...]
    sample_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if not 1 <= len(self.components) <= MAX_COMPONENTS:
            raise ValueError(f"mixture needs 1..{MAX_COMPONENTS} components, got {len(self.components)}")
        total = sum(c.weight for c in self.components)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"mixture weights sum to {total}, expected 1")

    def __len__(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([c.weight for c in self.components])

    @property
    def means(self) -> np.ndarray:
        return np.array([c.mean for c in self.components])

    @property
    def variances(self) -> np.ndarray:
        return np.array([c.variance for c in self.components])

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)[..., None]
        var = self.variances
        dens = self.weights * np.exp(-0.5 * (x - self.means) ** 2 / var) / np.sqrt(2.0 * np.pi * var)
        return dens.sum(axis=-1)

    def log_likelihood(self, samples: Sequence[float]) -> float:
        x = np.asarray(samples, dtype=float)
        return float(_log_likelihood(x, self.weights, self.means, self.variances))

    def to_dict(self) -> dict:
        return {
            "components": [{"w": c.weight, "mu": c.mean, "var": c.variance} for c in self.components],
            "n": self.sample_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GaussianMixture":
        comps = tuple(GaussianComponent(float(c["w"]), float(c["mu"]), float(c["var"])) for c in data["components"])
        return cls(comps, int(data["n"]))


def mass(model: GaussianMixture, lo: float = -math.inf, hi: float = math.inf,
         subset: Iterable[int] | None = None) -> float:
    """Probability mass of the (optionally component-filtered) mixture on ``[lo, hi]``."""
    if lo > hi:
        raise ValueError(f"lo={lo} exceeds hi={hi}")
    indices = range(len(model.components)) if subset is None else subset
    total = 0.0
    for i in indices:
        c = model.components[i]
        total += c.weight * (c.cdf(hi) - c.cdf(lo))
    return min(max(total, 0.0), 1.0)


def bic(model: GaussianMixture, samples: Sequence[float]) -> float:
    """Bayesian information criterion ``k ln(n) - 2 ln L`` with ``k = 3N - 1``."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise ValueError("bic needs at least one sample")
    k = 3 * len(model.components) - 1
    return k * math.log(x.size) - 2.0 * model.log_likelihood(x)


def fit_em(samples: Sequence[float], n_components: int, seed: int = 0, tol: float = DEFAULT_TOL,
           max_iter: int = DEFAULT_MAX_ITER, variance_floor: float = VARIANCE_FLOOR,
           history: list | None = None) -> GaussianMixture:
    """Fit an ``n_components`` mixture by EM from a k-means++ style start.

    The result depends only on the sample order and ``seed``. If ``history`` is
    given, the log-likelihood at each EM iteration is appended to it.
    """
    x = np.ascontiguousarray(samples, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("fit_em needs a non-empty 1-D sample list")
    if not 1 <= n_components <= x.size:
        raise InvalidOrder(f"n_components={n_components} outside 1..{x.size}")
    w, mu, var, trace, n_trace = _fit(x, n_components, seed, tol, max_iter, variance_floor)
    if history is not None:
        history.extend(trace[:n_trace].tolist())
    return _as_mixture(w, mu, var, x.size)


def fit_best(samples: Sequence[float], seed: int = 0, max_components: int = MAX_COMPONENTS,
             tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
             variance_floor: float = VARIANCE_FLOOR) -> GaussianMixture:
    """Fit N = 1..min(max_components, n) and keep the BIC minimiser (ties go to smaller N)."""
    x = np.ascontiguousarray(samples, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("fit_best needs a non-empty 1-D sample list")
    top = min(max_components, x.size)
    w, mu, var = _fit_best(x, top, seed, tol, max_iter, variance_floor)
    return _as_mixture(w, mu, var, x.size)


def _as_mixture(w, mu, var, n) -> GaussianMixture:
    order = np.argsort(mu, kind="stable")
    weights = [float(x) for x in w[order]]
    # normalise in python floats so the dataclass check sees the exact sum
    total = math.fsum(weights)
    return GaussianMixture(tuple(GaussianComponent(wi / total, float(mu[j]), float(var[j]))
                                 for wi, j in zip(weights, order)), int(n))


# --- numba kernels ---------------------------------------------------------

@numba.njit(cache=True)
def _log_likelihood(x, w, mu, var):
    n = x.size
    k = w.size
    ll = 0.0
    row = np.empty(k)
    for i in range(n):
        top = -np.inf
        for j in range(k):
            d = x[i] - mu[j]
            row[j] = math.log(w[j]) - 0.5 * (_LOG_2PI + math.log(var[j])) - 0.5 * d * d / var[j]
            if row[j] > top:
                top = row[j]
        s = 0.0
        for j in range(k):
            s += math.exp(row[j] - top)
        ll += top + math.log(s)
    return ll


@numba.njit(cache=True)
def _kmeanspp(x, k):
    n = x.size
    centers = np.empty(k)
    centers[0] = x[np.random.randint(n)]
    d2 = np.empty(n)
    for i in range(n):
        d2[i] = (x[i] - centers[0]) ** 2
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            idx = np.random.randint(n)
        else:
            r = np.random.random() * total
            acc = 0.0
            idx = n - 1
            for i in range(n):
                acc += d2[i]
                if acc >= r and d2[i] > 0.0:
                    idx = i
                    break
        centers[c] = x[idx]
        for i in range(n):
            d = (x[i] - centers[c]) ** 2
            if d < d2[i]:
                d2[i] = d
    return centers


@numba.njit(cache=True)
def _init_params(x, k, floor):
    n = x.size
    centers = _kmeanspp(x, k)
    label = np.empty(n, dtype=np.int64)
    for i in range(n):
        best = 0
        bd = abs(x[i] - centers[0])
        for j in range(1, k):
            d = abs(x[i] - centers[j])
            if d < bd:
                bd = d
                best = j
        label[i] = best
    overall = max(x.var(), floor)
    w = np.empty(k)
    mu = np.empty(k)
    var = np.empty(k)
    for j in range(k):
        cnt = 0
        s = 0.0
        for i in range(n):
            if label[i] == j:
                cnt += 1
                s += x[i]
        if cnt == 0:
            w[j] = 0.5 / n
            mu[j] = centers[j]
            var[j] = overall
        else:
            m = s / cnt
            ss = 0.0
            for i in range(n):
                if label[i] == j:
                    ss += (x[i] - m) ** 2
            w[j] = cnt / n
            mu[j] = m
            var[j] = max(ss / cnt, floor) if cnt > 1 else overall
    w /= w.sum()
    return w, mu, var


@numba.njit(cache=True)
def _em(x, w, mu, var, tol, max_iter, floor, trace):
    n = x.size
    k = w.size
    resp = np.empty((n, k))
    const = np.empty(k)
    half_prec = np.empty(k)
    n_trace = 0
    prev = -np.inf
    for it in range(max_iter + 1):
        for j in range(k):
            const[j] = math.log(w[j]) - 0.5 * (_LOG_2PI + math.log(var[j]))
            half_prec[j] = 0.5 / var[j]
        ll = 0.0
        for i in range(n):
            top = -np.inf
            xi = x[i]
            for j in range(k):
                d = xi - mu[j]
                v = const[j] - half_prec[j] * d * d
                resp[i, j] = v
                if v > top:
                    top = v
            s = 0.0
            for j in range(k):
                diff = resp[i, j] - top
                # exp(-745) underflows to zero anyway
                e = math.exp(diff) if diff > -745.0 else 0.0
                resp[i, j] = e
                s += e
            inv = 1.0 / s
            for j in range(k):
                resp[i, j] *= inv
            ll += top + math.log(s)
        trace[n_trace] = ll
        n_trace += 1
        if it == max_iter or (it > 0 and ll - prev < tol):
            break
        prev = ll
        for j in range(k):
            nk = 0.0
            sx = 0.0
            for i in range(n):
                nk += resp[i, j]
                sx += resp[i, j] * x[i]
            if nk <= 1e-300:
                w[j] = _MIN_WEIGHT
                continue
            m = sx / nk
            sv = 0.0
            for i in range(n):
                d = x[i] - m
                sv += resp[i, j] * d * d
            w[j] = max(nk / n, _MIN_WEIGHT)
            mu[j] = m
            var[j] = max(sv / nk, floor)
        w /= w.sum()
    return n_trace


@numba.njit(cache=True)
def _fit(x, k, seed, tol, max_iter, floor):
    np.random.seed(seed)
    w, mu, var = _init_params(x, k, floor)
    trace = np.empty(max_iter + 1)
    n_trace = _em(x, w, mu, var, tol, max_iter, floor, trace)
    return w, mu, var, trace, n_trace


@numba.njit(cache=True)
def _fit_best(x, top, seed, tol, max_iter, floor):
    n = x.size
    best_bic = np.inf
    best_w = np.empty(0)
    best_mu = np.empty(0)
    best_var = np.empty(0)
    for k in range(1, top + 1):
        w, mu, var, trace, n_trace = _fit(x, k, seed, tol, max_iter, floor)
        ll = _log_likelihood(x, w / w.sum(), mu, var)
        b = (3 * k - 1) * math.log(n) - 2.0 * ll
        if b < best_bic:
            best_bic = b
            best_w = w
            best_mu = mu
            best_var = var
    return best_w, best_mu, best_var
