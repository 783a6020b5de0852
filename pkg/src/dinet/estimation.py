"""Directed information estimation for multivariate time series.

Directed information from a set of source processes to a target, causally
conditioned on a third set, measures how much the sources' past improves
one-step prediction of the target beyond the target's own past and the
conditioning processes' past.  All values returned by this module are
per-time-step rates in natural log units (nats).

Three routes to a value are provided:

* :func:`estimate_di_gaussian` fits two one-step least squares predictors
  (with and without the source processes' lags) and reports the log ratio
  of their residual standard deviations.
* :func:`estimate_di_discrete` is the plug-in conditional mutual
  information over lagged windows for finite-alphabet data.
* :func:`exact_di_gaussian` computes the exact value for a known linear
  network model from its stationary covariance, with no data involved.

The estimators and the exact oracle share a conventions contract: order-1
models, least squares fits without intercepts (processes are zero mean),
and identical values under the chain rule decomposition used by the
greedy structure searches.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import (
    EstimationError,
    NonStationaryModelError,
    PanelFormatError,
    ValidationError,
)
from .structures import DirectedInfoCache, _check_process

LYAPUNOV_TOL = 1e-12
RIDGE_SCALE = 1e-10


@dataclass(frozen=True)
class TimeSeriesPanel:
    """An ``m x n`` block of observations: one row per process.

    ``kind`` is ``"real"`` for continuous data or ``"discrete"`` for
    finite-alphabet data with integer symbols ``0 .. alphabet_size - 1``.
    The underlying array is frozen read-only.
    """

    data: np.ndarray
    kind: str = "real"
    alphabet_size: int | None = None

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=float)
        if arr.ndim != 2:
            raise ValidationError(f"panel data must be 2-D, got {arr.ndim}-D")
        if arr.shape[1] < 2:
            raise ValidationError("panel needs at least two time steps")
        if self.kind == "real":
            if not np.all(np.isfinite(arr)):
                raise ValidationError("panel contains non-finite values")
            object.__setattr__(self, "alphabet_size", None)
        elif self.kind == "discrete":
            if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
                raise ValidationError("discrete panel symbols must be integers")
            arr = arr.astype(np.int64)
            if np.any(arr < 0):
                raise ValidationError("discrete panel symbols must be >= 0")
            size = self.alphabet_size
            if size is None:
                size = int(arr.max()) + 1
            if np.any(arr >= size):
                raise ValidationError(
                    f"discrete panel symbol out of range 0..{size - 1}"
                )
            object.__setattr__(self, "alphabet_size", int(size))
        else:
            raise ValidationError(f"unknown panel kind {self.kind!r}")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @property
    def m(self) -> int:
        return self.data.shape[0]

    @property
    def n(self) -> int:
        return self.data.shape[1]

    def row(self, i: int) -> np.ndarray:
        _check_process(i, self.m)
        return self.data[i - 1]


@dataclass(frozen=True)
class EstimatorConfig:
    """Estimator settings shared across calls.

    ``markov_order`` is the number of lags included per process.  Values
    are computed in nats regardless of ``log_base``; the command line layer
    divides by ``ln 2`` for display when ``log_base`` is ``"bits"``.
    ``state_space_cap`` bounds the joint cell count the discrete estimator
    will attempt.
    """

    markov_order: int = 1
    estimator: str = "gaussian"
    log_base: str = "nats"
    state_space_cap: int = 1_000_000

    def __post_init__(self) -> None:
        if self.markov_order < 1:
            raise ValidationError("markov_order must be >= 1")
        if self.estimator not in ("gaussian", "discrete"):
            raise ValidationError(f"unknown estimator {self.estimator!r}")
        if self.log_base not in ("nats", "bits"):
            raise ValidationError(f"unknown log_base {self.log_base!r}")
        if self.state_space_cap < 1:
            raise ValidationError("state_space_cap must be positive")


@dataclass(frozen=True)
class LinearNetworkModel:
    """A first-order linear network: ``X[i,t] = sum_j C[j,i] X[j,t-1] + N[i,t]``.

    ``coefficients[j-1, i-1]`` is the weight of edge ``j -> i``, matching
    the edge orientation used everywhere else in the package.  Noise is
    independent zero-mean Gaussian with per-process variances.
    """

    coefficients: np.ndarray
    noise_variances: np.ndarray

    def __post_init__(self) -> None:
        c = np.array(self.coefficients, dtype=float)
        q = np.array(self.noise_variances, dtype=float)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValidationError(f"coefficients must be square, got {c.shape}")
        if q.shape != (c.shape[0],):
            raise ValidationError("noise_variances must have one entry per process")
        if not np.all(np.isfinite(c)):
            raise ValidationError("coefficients must be finite")
        if not np.all(q > 0):
            raise ValidationError("noise variances must be positive")
        c.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "coefficients", c)
        object.__setattr__(self, "noise_variances", q)

    @property
    def m(self) -> int:
        return self.coefficients.shape[0]

    def dynamics_matrix(self) -> np.ndarray:
        """Row-acts-on-state form: ``X[t] = A @ X[t-1] + N[t]``."""
        return self.coefficients.T

    def spectral_radius(self) -> float:
        return float(np.max(np.abs(np.linalg.eigvals(self.coefficients))))

    def true_parent_set(self, i: int) -> tuple[int, ...]:
        """Processes with a nonzero coefficient into ``i``, excluding ``i``."""
        _check_process(i, self.m)
        col = self.coefficients[:, i - 1]
        return tuple(j for j in range(1, self.m + 1) if j != i and col[j - 1] != 0.0)


def stationary_covariance(model: LinearNetworkModel) -> np.ndarray:
    """Stationary covariance by fixed-point iteration.

    Starting from the noise covariance, applies ``S <- A S A' + Q`` until
    the largest absolute update falls below ``1e-12``.  Convergence is
    linear at rate equal to the squared spectral radius, so the model must
    be stable.
    """
    rho = model.spectral_radius()
    if rho >= 1.0:
        raise NonStationaryModelError(
            f"model is not stationary: spectral radius {rho:.6f} >= 1"
        )
    a = model.dynamics_matrix()
    q = np.diag(model.noise_variances)
    sigma = q.copy()
    for _ in range(1_000_000):
        nxt = a @ sigma @ a.T + q
        delta = float(np.max(np.abs(nxt - sigma)))
        sigma = nxt
        if delta < LYAPUNOV_TOL:
            return sigma
    raise EstimationError("covariance fixed-point iteration did not converge")


def _check_query(
    m: int, target: int, addition: Iterable[int], conditioning: Iterable[int]
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    _check_process(target, m, "target")
    add = tuple(sorted(addition))
    cond = tuple(sorted(conditioning))
    for j in add:
        _check_process(j, m, "addition process")
    for j in cond:
        _check_process(j, m, "conditioning process")
    if len(set(add)) != len(add) or len(set(cond)) != len(cond):
        raise ValidationError("addition and conditioning must not repeat processes")
    if set(add) & set(cond):
        raise ValidationError("addition and conditioning sets must be disjoint")
    if target in add or target in cond:
        raise ValidationError("target cannot appear in addition or conditioning")
    return add, cond


def _conditional_variance(
    sigma: np.ndarray, lagged_cross: np.ndarray, target: int, regressors: Sequence[int]
) -> float:
    """Variance of ``X[target, t]`` given ``X[s, t-1]`` for ``s`` in regressors.

    ``lagged_cross[i, j] = Cov(X[i, t], X[j, t-1])``.  Uses the Gaussian
    projection formula with a small ridge retry on near-singular blocks.
    """
    ti = target - 1
    idx = [s - 1 for s in regressors]
    marginal = float(sigma[ti, ti])
    if not idx:
        return marginal
    g = sigma[np.ix_(idx, idx)]
    c = lagged_cross[ti, idx]
    try:
        sol = np.linalg.solve(g, c)
    except np.linalg.LinAlgError:
        ridge = RIDGE_SCALE * float(np.trace(g))
        try:
            sol = np.linalg.solve(g + ridge * np.eye(len(idx)), c)
        except np.linalg.LinAlgError as exc:
            raise EstimationError(
                "regularization failure: lagged covariance block is singular"
            ) from exc
    return marginal - float(c @ sol)


def exact_di_gaussian(
    model: LinearNetworkModel,
    target: int,
    addition: Iterable[int],
    conditioning: Iterable[int] = (),
) -> float:
    """Exact per-step directed information for a known linear model.

    Computes one-step prediction error variances of the target given lag-1
    values of (target + conditioning) versus (target + conditioning +
    addition) by Gaussian projection against the stationary covariance,
    and returns half the log variance ratio.
    """
    add, cond = _check_query(model.m, target, addition, conditioning)
    if not add:
        return 0.0
    sigma = stationary_covariance(model)
    lagged = model.dynamics_matrix() @ sigma
    return _exact_from_covariance(sigma, lagged, target, add, cond)


def _exact_from_covariance(
    sigma: np.ndarray,
    lagged: np.ndarray,
    target: int,
    add: tuple[int, ...],
    cond: tuple[int, ...],
) -> float:
    reduced = sorted({target, *cond})
    full = sorted({target, *cond, *add})
    v_reduced = _conditional_variance(sigma, lagged, target, reduced)
    v_full = _conditional_variance(sigma, lagged, target, full)
    if v_full <= 0 or v_reduced <= 0:
        raise EstimationError(
            "regularization failure: nonpositive conditional variance"
        )
    value = 0.5 * (np.log(v_reduced) - np.log(v_full))
    if value < -1e-9:
        raise EstimationError(
            f"conditional variance increased when adding regressors ({value:.3e})"
        )
    return max(0.0, float(value))


def _lag_design(
    panel: TimeSeriesPanel, processes: Sequence[int], order: int
) -> np.ndarray:
    """Columns: for each process in order given, its lags 1..order."""
    n = panel.n
    cols = []
    for s in processes:
        series = panel.data[s - 1].astype(float)
        for lag in range(1, order + 1):
            cols.append(series[order - lag: n - lag])
    if not cols:
        return np.empty((n - order, 0))
    return np.column_stack(cols)


def _residual_ss(design: np.ndarray, y: np.ndarray) -> float:
    if design.shape[1] == 0:
        return float(y @ y)
    if design.shape[0] <= design.shape[1]:
        raise EstimationError(
            f"insufficient samples: {design.shape[0]} rows for "
            f"{design.shape[1]} regressors"
        )
    beta, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
    if rank < design.shape[1]:
        raise EstimationError(
            "singular design: regressor columns are linearly dependent"
        )
    resid = y - design @ beta
    return float(resid @ resid)


def estimate_di_gaussian(
    panel: TimeSeriesPanel,
    target: int,
    addition: Iterable[int],
    conditioning: Iterable[int] = (),
    config: EstimatorConfig | None = None,
) -> float:
    """Least squares directed information estimate, in nats per step.

    Fits the target's next value on lagged values of (target +
    conditioning), then again with the addition processes' lags included,
    both without intercepts over the same rows, and returns the log ratio
    of residual standard deviations.  Adding regressors can never raise
    the in-sample residual sum of squares, so the estimate is nonnegative
    by construction.
    """
    config = config or EstimatorConfig()
    add, cond = _check_query(panel.m, target, addition, conditioning)
    if not add:
        return 0.0
    order = config.markov_order
    if panel.n <= order:
        raise EstimationError(
            f"insufficient samples: need more than {order} steps, have {panel.n}"
        )
    y = panel.data[target - 1].astype(float)[order:]
    reduced = sorted({target, *cond})
    full = sorted({target, *cond, *add})
    ss_reduced = _residual_ss(_lag_design(panel, reduced, order), y)
    ss_full = _residual_ss(_lag_design(panel, full, order), y)
    if ss_full <= 0.0:
        if ss_reduced <= 0.0:
            return 0.0
        raise EstimationError(
            "zero residual variance: target is a deterministic function of lags"
        )
    return max(0.0, 0.5 * float(np.log(ss_reduced / ss_full)))


def _encode_windows(
    panel: TimeSeriesPanel, processes: Sequence[int], order: int
) -> tuple[np.ndarray, int]:
    """Integer codes of the lagged windows of the given processes."""
    size = panel.alphabet_size or 1
    n = panel.n
    codes = np.zeros(n - order, dtype=np.int64)
    span = 1
    for s in processes:
        series = panel.data[s - 1].astype(np.int64)
        for lag in range(1, order + 1):
            codes = codes * size + series[order - lag: n - lag]
            span *= size
    return codes, span


def estimate_di_discrete(
    panel: TimeSeriesPanel,
    target: int,
    addition: Iterable[int],
    conditioning: Iterable[int] = (),
    config: EstimatorConfig | None = None,
) -> float:
    """Plug-in directed information estimate for finite-alphabet panels.

    Empirical joint frequencies over order-``l`` lagged windows feed the
    conditional mutual information between the addition windows and the
    target's next symbol given the (target + conditioning) windows, with
    maximum likelihood (unsmoothed) probabilities.
    """
    config = config or EstimatorConfig()
    if panel.kind != "discrete":
        raise ValidationError("discrete estimator requires a finite-alphabet panel")
    add, cond = _check_query(panel.m, target, addition, conditioning)
    if not add:
        return 0.0
    order = config.markov_order
    if panel.n <= order:
        raise EstimationError(
            f"insufficient samples: need more than {order} steps, have {panel.n}"
        )
    size = panel.alphabet_size or 1
    dims = order * (1 + len(cond) + len(add)) + 1
    cells = size**dims
    if cells > config.state_space_cap:
        raise EstimationError(
            f"state space too large: {cells} cells exceed cap "
            f"{config.state_space_cap}"
        )

    context = sorted({target, *cond})
    w, _ = _encode_windows(panel, context, order)
    a, span_a = _encode_windows(panel, sorted(add), order)
    y = panel.data[target - 1].astype(np.int64)[order:]

    n_rows = len(y)
    wa = w * span_a + a
    wy = w * size + y
    way = wa * size + y

    w_vals, w_cnt = np.unique(w, return_counts=True)
    wa_vals, wa_cnt = np.unique(wa, return_counts=True)
    wy_vals, wy_cnt = np.unique(wy, return_counts=True)
    vals, cnt = np.unique(way, return_counts=True)

    # decompose each observed joint cell back into its marginal codes;
    # every marginal code is present by construction, so searchsorted is
    # an exact lookup
    cell_wa, cell_y = np.divmod(vals, size)
    cell_w = cell_wa // span_a
    cell_wy = cell_w * size + cell_y
    n_w = w_cnt[np.searchsorted(w_vals, cell_w)]
    n_wa = wa_cnt[np.searchsorted(wa_vals, cell_wa)]
    n_wy = wy_cnt[np.searchsorted(wy_vals, cell_wy)]
    total = float(
        np.sum(cnt * (np.log(cnt) + np.log(n_w) - np.log(n_wa) - np.log(n_wy)))
    )
    return max(0.0, total / n_rows)


def estimate_di(
    panel: TimeSeriesPanel,
    target: int,
    addition: Iterable[int],
    conditioning: Iterable[int] = (),
    config: EstimatorConfig | None = None,
) -> float:
    """Dispatch to the estimator named in the config."""
    config = config or EstimatorConfig()
    fn = estimate_di_gaussian if config.estimator == "gaussian" else estimate_di_discrete
    return fn(panel, target, addition, conditioning, config)


def di_chain_rule(increments: Iterable[float]) -> float:
    """Total directed information from a sequence of conditional increments.

    Expanding a set one process at a time, each step conditioned on the
    processes already added, telescopes to the full-set value; the order
    of expansion does not change the sum.
    """
    return float(sum(increments))


class DIEvaluator:
    """Memoized access to directed information values.

    Wraps a raw ``(target, addition, conditioning) -> value`` function and
    caches every result, so repeated queries (common in greedy searches
    and bound measurements) are free.  Construct via :meth:`from_model`
    for exact values or :meth:`from_panel` for estimates.
    """

    def __init__(
        self,
        fn: Callable[[int, tuple[int, ...], tuple[int, ...]], float],
        m: int,
    ) -> None:
        if m < 1:
            raise ValidationError("m must be >= 1")
        self._fn = fn
        self.m = m
        self._memo: dict[tuple[int, tuple[int, ...], tuple[int, ...]], float] = {}
        self.calls = 0

    def increment(
        self,
        target: int,
        addition: Iterable[int],
        conditioning: Iterable[int] = (),
    ) -> float:
        add, cond = _check_query(self.m, target, addition, conditioning)
        key = (target, add, cond)
        if key not in self._memo:
            self.calls += 1
            self._memo[key] = float(self._fn(target, add, cond))
        return self._memo[key]

    def set_value(self, target: int, members: Iterable[int]) -> float:
        """Directed information from a whole parent set to the target."""
        return self.increment(target, members, ())

    @classmethod
    def from_model(cls, model: LinearNetworkModel) -> "DIEvaluator":
        sigma = stationary_covariance(model)
        lagged = model.dynamics_matrix() @ sigma

        def fn(target: int, add: tuple[int, ...], cond: tuple[int, ...]) -> float:
            if not add:
                return 0.0
            return _exact_from_covariance(sigma, lagged, target, add, cond)

        return cls(fn, model.m)

    @classmethod
    def from_panel(
        cls, panel: TimeSeriesPanel, config: EstimatorConfig | None = None
    ) -> "DIEvaluator":
        config = config or EstimatorConfig()

        def fn(target: int, add: tuple[int, ...], cond: tuple[int, ...]) -> float:
            return estimate_di(panel, target, add, cond, config)

        return cls(fn, panel.m)


def build_cache(evaluator: DIEvaluator, m: int, K: int) -> DirectedInfoCache:
    """Directed information values for every size-``K`` parent set.

    Populates all ``m * C(m-1, K)`` entries deterministically in
    (target, set) order.
    """
    if m != evaluator.m:
        raise ValidationError(f"evaluator has m={evaluator.m}, asked for m={m}")
    cache = DirectedInfoCache(m, K)
    for target in range(1, m + 1):
        others = [j for j in range(1, m + 1) if j != target]
        for members in combinations(others, K):
            cache.put(target, members, evaluator.set_value(target, members))
    return cache


def read_panel_csv(
    path: str, kind: str = "real", alphabet_size: int | None = None
) -> TimeSeriesPanel:
    """Load a panel from CSV: one row per time step, one column per process.

    A single leading header row is tolerated and skipped.  Any later parse
    failure raises :class:`PanelFormatError` naming the 1-based file row.
    """
    import csv

    rows: list[list[float]] = []
    width: int | None = None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        for lineno, record in enumerate(reader, start=1):
            if not record or all(not cell.strip() for cell in record):
                continue
            try:
                values = [float(cell) for cell in record]
            except ValueError as exc:
                if lineno == 1 and not rows:
                    continue  # header row
                raise PanelFormatError(f"row {lineno}: {exc}") from None
            if width is None:
                width = len(values)
            elif len(values) != width:
                raise PanelFormatError(
                    f"row {lineno}: expected {width} columns, got {len(values)}"
                )
            rows.append(values)
    if not rows:
        raise PanelFormatError("no data rows found")
    data = np.array(rows).T
    if kind == "discrete":
        as_int = data.astype(int)
        if np.any(as_int != data):
            raise PanelFormatError("discrete panel contains non-integer values")
        data = as_int
    return TimeSeriesPanel(data, kind=kind, alphabet_size=alphabet_size)


def write_panel_csv(panel: TimeSeriesPanel, path: str, header: bool = True) -> None:
    """Write a panel as CSV, one row per time step."""
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(",".join(f"x{i}" for i in range(1, panel.m + 1)) + "\n")
        for t in range(panel.n):
            if panel.kind == "discrete":
                cells = (str(int(panel.data[i, t])) for i in range(panel.m))
            else:
                cells = (format(panel.data[i, t], ".12g") for i in range(panel.m))
            fh.write(",".join(cells) + "\n")
