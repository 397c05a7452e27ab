"""Linear-Gaussian structural equation models.

Each vertex is a linear function of its parents plus independent Gaussian
noise. The treatment can instead be generated as ``1{index + noise > t}``
(``treatment_mechanism="threshold"``), which is what counterfactual sampling
needs; the downstream equations stay linear in the treatment.

Random numbers come from :func:`numpy.random.default_rng` (PCG64) seeded
with the caller's integer. Noise is drawn as one ``(n, p)`` standard-normal
block, columns in the model's topological order, so a dataset is fully
determined by ``(model, n, seed)``.
"""

from __future__ import annotations

import csv
import hashlib
import math
from dataclasses import dataclass, field
from os import PathLike
from typing import Iterable, Mapping, NamedTuple

import numpy as np
from scipy.stats import norm

from .cgio import CgDocument, dump_cg
from .graph import Dag, canonical

__all__ = [
    "SemError",
    "SingularCovarianceError",
    "InsufficientSampleError",
    "LinearSem",
    "Covariance",
    "Dataset",
    "CounterfactualSample",
    "exact_covariance",
    "partial_correlation",
    "ExactGaussianOracle",
    "FisherZOracle",
    "sample",
    "sample_counterfactual",
    "fisher_z_statistic",
    "fisher_z_test",
    "ate_standardization",
    "read_csv",
]


class SemError(ValueError):
    pass


class SingularCovarianceError(SemError):
    pass


class InsufficientSampleError(SemError):
    pass


@dataclass(frozen=True, eq=False)
class LinearSem:
    dag: Dag
    coef: Mapping[tuple[str, str], float]
    noise_var: Mapping[str, float]
    treatment_mechanism: str = "linear"
    threshold: float = 0.0

    def __post_init__(self):
        coef = {tuple(k): float(v) for k, v in self.coef.items()}
        if set(coef) != set(self.dag.edges):
            missing = sorted(set(self.dag.edges) - set(coef))
            extra = sorted(set(coef) - set(self.dag.edges))
            raise SemError(f"coefficients must match edges (missing={missing}, extra={extra})")
        noise = {k: float(v) for k, v in self.noise_var.items()}
        if set(noise) != set(self.dag.vertices):
            raise SemError("noise variances missing for: " + ", ".join(canonical(self.dag.vertices - set(noise))))
        if any(not v > 0 for v in noise.values()):
            raise SemError("noise variances must be positive")
        if self.treatment_mechanism not in ("linear", "threshold"):
            raise SemError(f"unknown treatment mechanism {self.treatment_mechanism!r}")
        object.__setattr__(self, "coef", coef)
        object.__setattr__(self, "noise_var", noise)

    @classmethod
    def from_document(cls, doc: CgDocument, **kw) -> "LinearSem":
        return cls(doc.dag, doc.coef, doc.noise, **kw)

    @property
    def order(self) -> tuple[str, ...]:
        return self.dag.topological_order()

    def coef_matrix(self) -> np.ndarray:
        """``B[i, j]`` is the coefficient of edge ``order[i] -> order[j]``."""
        idx = {v: i for i, v in enumerate(self.order)}
        b = np.zeros((len(idx), len(idx)))
        for (src, dst), c in self.coef.items():
            b[idx[src], idx[dst]] = c
        return b

    @property
    def ident(self) -> str:
        text = dump_cg(self.dag, self.coef, self.noise_var)
        text += f"mechanism {self.treatment_mechanism} {self.threshold!r}\n"
        return hashlib.sha1(text.encode()).hexdigest()[:12]


class Covariance(NamedTuple):
    names: tuple[str, ...]
    matrix: np.ndarray

    def index(self, names: Iterable[str]) -> list[int]:
        pos = {v: i for i, v in enumerate(self.names)}
        return [pos[v] for v in names]

    def entry(self, x: str, y: str) -> float:
        i, j = self.index([x, y])
        return float(self.matrix[i, j])


def exact_covariance(m: LinearSem) -> Covariance:
    """Population covariance of a linear-Gaussian SEM, in topological order."""
    if m.treatment_mechanism != "linear":
        raise SemError("exact covariance needs a linear treatment mechanism")
    b = m.coef_matrix()
    p = b.shape[0]
    # x = B^T x + e  =>  x = (I - B^T)^{-1} e
    t = np.linalg.inv(np.eye(p) - b.T)
    omega = np.diag([m.noise_var[v] for v in m.order])
    sigma = t @ omega @ t.T
    return Covariance(m.order, (sigma + sigma.T) / 2)


def partial_correlation(sigma: Covariance, x: str, y: str, given: Iterable[str] = ()) -> float:
    given = list(given)
    if x == y or x in given or y in given:
        raise SemError("x, y and the conditioning set must be disjoint")
    idx = sigma.index([x, y, *given])
    sub = sigma.matrix[np.ix_(idx, idx)]
    try:
        prec = np.linalg.inv(sub)
    except np.linalg.LinAlgError:
        raise SingularCovarianceError("covariance submatrix is singular") from None
    if not np.all(np.isfinite(prec)) or np.linalg.cond(sub) > 1e12:
        raise SingularCovarianceError("covariance submatrix is singular")
    r = -prec[0, 1] / math.sqrt(prec[0, 0] * prec[1, 1])
    return float(min(1.0, max(-1.0, r)))


def _pairs(x: Iterable[str], y: Iterable[str]):
    return [(a, b) for a in canonical(x) for b in canonical(y)]


class ExactGaussianOracle:
    """Independent iff every pairwise partial correlation is below ``tol`` in magnitude.

    Pairwise testing is exact for set-valued queries because Gaussian
    distributions satisfy composition.
    """

    concurrent_safe = True

    def __init__(self, m: LinearSem, tol: float = 1e-9):
        if not tol > 0:
            raise SemError("tol must be positive")
        self.sem = m
        self.tol = tol
        self.sigma = exact_covariance(m)
        self.treatment = m.dag.treatment
        self.outcome = m.dag.outcome

    def query(self, x, y, given=()) -> bool:
        given = canonical(given)
        return all(abs(partial_correlation(self.sigma, a, b, given)) < self.tol for a, b in _pairs(x, y))


@dataclass(frozen=True, eq=False)
class Dataset:
    columns: tuple[str, ...]
    values: np.ndarray
    seed: int | None = None
    sem_id: str | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.columns):
            raise SemError("values must be an (n, len(columns)) array")
        if len(set(self.columns)) != len(self.columns):
            raise SemError("duplicate column names")
        if np.isnan(values).any():
            raise SemError("dataset contains missing values")
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            return self.values[:, self.columns.index(name)]
        except ValueError:
            raise SemError(f"dataset has no column {name!r}") from None

    def select(self, names: Iterable[str]) -> np.ndarray:
        return np.column_stack([self.column(v) for v in names]) if names else np.empty((self.n, 0))

    def to_csv(self, path: str | PathLike) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(self.columns)
            w.writerows([repr(float(v)) for v in row] for row in self.values)


def read_csv(path: str | PathLike) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SemError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    try:
        values = np.array([[float(v) for v in row] for row in body], dtype=float)
    except ValueError as exc:
        raise SemError(f"{path}: {exc}") from None
    if any(len(r) != len(header) for r in body):
        raise SemError(f"{path}: ragged rows")
    return Dataset(tuple(h.strip() for h in header), values.reshape(len(body), len(header)))


def _simulate(m: LinearSem, noise: np.ndarray, force: float | None = None) -> dict[str, np.ndarray]:
    out: dict[str, np.ndarray] = {}
    a = m.dag.treatment
    for j, v in enumerate(m.order):
        val = noise[:, j].copy()
        for p in m.dag._parents[v]:
            val += m.coef[(p, v)] * out[p]
        if v == a:
            if force is not None:
                val = np.full(noise.shape[0], float(force))
            elif m.treatment_mechanism == "threshold":
                val = (val > m.threshold).astype(float)
        out[v] = val
    return out


def _noise(m: LinearSem, n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise SemError("n must be at least 1")
    rng = np.random.default_rng(seed)
    scale = np.sqrt([m.noise_var[v] for v in m.order])
    return rng.standard_normal((n, len(scale))) * scale


def sample(m: LinearSem, n: int, seed: int, include_latent: bool = False) -> Dataset:
    """Draw ``n`` i.i.d. rows. Latent columns are dropped unless ``include_latent``."""
    vals = _simulate(m, _noise(m, n, seed))
    cols = canonical(m.dag.vertices if include_latent else m.dag.observed)
    return Dataset(tuple(cols), np.column_stack([vals[c] for c in cols]), seed, m.ident)


@dataclass(frozen=True, eq=False)
class CounterfactualSample:
    """Factual and both potential worlds generated from one noise draw per row."""

    treatment: str
    outcome: str
    factual: Mapping[str, np.ndarray]
    potential: Mapping[int, Mapping[str, np.ndarray]] = field(repr=False)

    @property
    def a(self) -> np.ndarray:
        return self.factual[self.treatment]

    @property
    def y(self) -> np.ndarray:
        return self.factual[self.outcome]

    @property
    def y0(self) -> np.ndarray:
        return self.potential[0][self.outcome]

    @property
    def y1(self) -> np.ndarray:
        return self.potential[1][self.outcome]

    def consistent(self) -> bool:
        return bool(np.array_equal(self.y, np.where(self.a == 1, self.y1, self.y0)))


def sample_counterfactual(m: LinearSem, n: int, seed: int) -> CounterfactualSample:
    if m.treatment_mechanism != "threshold":
        raise SemError("counterfactual sampling needs a binary (threshold) treatment mechanism")
    noise = _noise(m, n, seed)
    return CounterfactualSample(
        treatment=m.dag.treatment,
        outcome=m.dag.outcome,
        factual=_simulate(m, noise),
        potential={0: _simulate(m, noise, force=0.0), 1: _simulate(m, noise, force=1.0)},
    )


def _sample_covariance(d: Dataset) -> Covariance:
    sd = d.values.std(axis=0)
    const = [c for c, s in zip(d.columns, sd) if s == 0]
    if const:
        raise SemError("constant column(s): " + ", ".join(const))
    return Covariance(d.columns, np.cov(d.values, rowvar=False))


def fisher_z_statistic(r: float, n: int, k: int) -> float:
    if n - k - 3 <= 0:
        raise InsufficientSampleError(f"need n > |given| + 3 (n={n}, |given|={k})")
    if abs(r) >= 1:
        return math.inf
    return abs(math.atanh(r)) * math.sqrt(n - k - 3)


def fisher_z_test(d: Dataset, x: str, y: str, given: Iterable[str] = (), alpha: float = 0.05) -> bool:
    """Fisher z test of zero partial correlation; ``True`` means independent."""
    if not 0 < alpha < 1:
        raise SemError("alpha must lie in (0, 1)")
    given = canonical(given)
    if d.n <= len(given) + 3:
        raise InsufficientSampleError(f"need n > |given| + 3 (n={d.n}, |given|={len(given)})")
    d.select([x, y, *given])  # raises on unknown columns
    r = partial_correlation(_sample_covariance(d), x, y, given)
    return fisher_z_statistic(r, d.n, len(given)) <= norm.ppf(1 - alpha / 2)


class FisherZOracle:
    """Fisher z tests on a dataset; set-valued queries are tested pairwise."""

    concurrent_safe = True

    def __init__(self, d: Dataset, treatment: str = "A", outcome: str = "Y", alpha: float = 0.05):
        if not 0 < alpha < 1:
            raise SemError("alpha must lie in (0, 1)")
        d.column(treatment)
        d.column(outcome)
        self.data = d
        self.alpha = alpha
        self.treatment = treatment
        self.outcome = outcome
        self.sigma = _sample_covariance(d)
        self.critical = float(norm.ppf(1 - alpha / 2))

    def query(self, x, y, given=()) -> bool:
        given = canonical(given)
        for a, b in _pairs(x, y):
            r = partial_correlation(self.sigma, a, b, given)
            if fisher_z_statistic(r, self.data.n, len(given)) > self.critical:
                return False
        return True


def ate_standardization(d: Dataset, c: Iterable[str], treatment: str = "A", outcome: str = "Y") -> float:
    """Back-door adjusted effect of a unit change in the treatment.

    Fits ``outcome ~ 1 + treatment + c`` by least squares and returns the
    treatment coefficient; in a linear SEM this is the standardization
    formula evaluated exactly in expectation.
    """
    c = canonical(c)
    if treatment in c or outcome in c:
        raise SemError("adjustment set may not contain the treatment or outcome")
    x = np.column_stack([np.ones(d.n), d.column(treatment), d.select(c)])
    yv = d.column(outcome)
    if np.linalg.matrix_rank(x) < x.shape[1]:
        raise SemError("collinear design matrix")
    beta, *_ = np.linalg.lstsq(x, yv, rcond=None)
    return float(beta[1])
