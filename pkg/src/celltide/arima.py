"""ARIMA(p,d,q) baseline forecaster.

Fitting works on the d-differenced, mean-centered series in two steps:
Hannan-Rissanen (long-AR least squares, then regression on lagged values and
lagged residuals) for starting coefficients, then Nelder-Mead refinement of
the conditional sum of squared innovations with zero pre-sample residuals.
Forecasts are one-step conditional expectations rolled over true history.
"""

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from . import modelio

MAX_ORDER = 5


class ArimaFitError(RuntimeError):
    """Estimation failed; message advises what to change."""


@dataclass
class ArimaModel:
    p: int
    d: int
    q: int
    phi: np.ndarray     # AR coefficients, length p
    theta: np.ndarray   # MA coefficients, length q
    mu: float           # mean of the d-differenced training series
    sigma2: float       # innovation variance from the CSS at the optimum
    heads: np.ndarray   # first values of each differencing level of the training series

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=np.float64)
        self.theta = np.asarray(self.theta, dtype=np.float64)
        self.heads = np.asarray(self.heads, dtype=np.float64)


def difference(series, d: int) -> np.ndarray:
    series = np.asarray(series, dtype=np.float64)
    if len(series) <= d:
        raise ValueError(f"series of length {len(series)} too short to difference {d} times")
    for _ in range(d):
        series = np.diff(series)
    return series


def diff_heads(series, d: int) -> np.ndarray:
    """First element of each differencing level, the state `integrate` needs."""
    series = np.asarray(series, dtype=np.float64)
    heads = []
    for _ in range(d):
        heads.append(series[0])
        series = np.diff(series)
    return np.array(heads)


def integrate(diffed, heads, d: int) -> np.ndarray:
    """Invert `difference`; exact telescoping reconstruction from stored heads."""
    out = np.asarray(diffed, dtype=np.float64)
    heads = np.asarray(heads, dtype=np.float64)
    if len(heads) != d:
        raise ValueError(f"need {d} head values, got {len(heads)}")
    for k in range(d - 1, -1, -1):
        acc = np.empty(len(out) + 1)
        acc[0] = heads[k]
        for i, v in enumerate(out):
            acc[i + 1] = acc[i] + v
        out = acc
    return out


def _stationary(coeffs: np.ndarray) -> bool:
    """True when 1 - c1 z - ... - ck z^k has all roots outside the unit circle."""
    if len(coeffs) == 0:
        return True
    poly = np.concatenate(([1.0], -np.asarray(coeffs)))
    roots = np.roots(poly[::-1])  # roots of c_k + ... + 1*z^k? see note below
    # np.roots wants descending powers; reverse so index 0 is z^k coefficient
    return bool(len(roots) == 0 or np.min(np.abs(roots)) > 1.0 + 1e-9)


def _invertible(theta: np.ndarray) -> bool:
    """True when 1 + t1 z + ... + tq z^q has all roots outside the unit circle."""
    if len(theta) == 0:
        return True
    poly = np.concatenate(([1.0], np.asarray(theta)))
    roots = np.roots(poly[::-1])
    return bool(len(roots) == 0 or np.min(np.abs(roots)) > 1.0 + 1e-9)


def residuals(y: np.ndarray, phi: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Innovations of a centered ARMA series, conditioning on the first p values
    and zero pre-sample residuals. Length is len(y) - p."""
    y = np.asarray(y, dtype=np.float64)
    p, n = len(phi), len(y)
    if n <= p:
        raise ValueError(f"need more than {p} observations, got {n}")
    u = y[p:].copy()
    for i, ph in enumerate(phi, start=1):
        u -= ph * y[p - i:n - i]
    if len(theta):
        u = lfilter([1.0], np.concatenate(([1.0], theta)), u)
    return u


def css(y: np.ndarray, phi, theta) -> float:
    """Conditional sum of squared innovations."""
    e = residuals(y, np.asarray(phi, float), np.asarray(theta, float))
    return float(e @ e)


def hannan_rissanen(y: np.ndarray, p: int, q: int):
    """Starting (phi, theta) for a centered series via the two-stage regression."""
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    m = min(20, max(n // 10, p + q + 1))  # long-AR order for the residual proxy
    if n <= m + max(p, q):
        raise ArimaFitError("series too short for Hannan-Rissanen initialization")

    def lag_matrix(x, lags, start, stop):
        return np.column_stack([x[start - k:stop - k] for k in range(1, lags + 1)])

    x_long = lag_matrix(y, m, m, n)
    beta, _, rank, _ = np.linalg.lstsq(x_long, y[m:], rcond=None)
    if rank < m:
        raise ArimaFitError("singular least squares in long-AR step; try lower orders")
    e_proxy = np.concatenate([np.zeros(m), y[m:] - x_long @ beta])

    start = m + max(p, q)
    cols = []
    if p:
        cols.append(lag_matrix(y, p, start, n))
    if q:
        cols.append(lag_matrix(e_proxy, q, start, n))
    x2 = np.hstack(cols)
    coef, _, rank, _ = np.linalg.lstsq(x2, y[start:], rcond=None)
    if rank < p + q:
        raise ArimaFitError("singular least squares in ARMA regression; try lower orders")
    return coef[:p], coef[p:]


def fit(series, p: int, d: int, q: int) -> ArimaModel:
    """Estimate an ARIMA(p,d,q) model on a training series."""
    series = np.asarray(series, dtype=np.float64)
    for name, v in (("p", p), ("d", d), ("q", q)):
        if not (0 <= v <= MAX_ORDER):
            raise ValueError(f"order {name}={v} outside 0..{MAX_ORDER}")
    if len(series) < 10 * (p + q + 1) + d:
        raise ValueError(
            f"need at least {10 * (p + q + 1) + d} observations for orders "
            f"({p},{d},{q}), got {len(series)}")
    w = difference(series, d)
    mu = float(np.mean(w))
    y = w - mu
    n_eff = len(y) - p

    if p + q == 0:
        sigma2 = float(y @ y) / n_eff
        return ArimaModel(p, d, q, np.empty(0), np.empty(0), mu, sigma2,
                          diff_heads(series, d))

    phi0, theta0 = hannan_rissanen(y, p, q)
    x0 = np.concatenate([phi0, theta0])
    if not (_stationary(phi0) and _invertible(theta0)):
        x0 = np.zeros_like(x0)  # HR start outside the valid region; restart at white noise

    def objective(x):
        phi, theta = x[:p], x[p:]
        if not (_stationary(phi) and _invertible(theta)):
            return 1e12 * (1.0 + float(np.abs(x).sum()))
        return css(y, phi, theta)

    res = minimize(objective, x0, method="Nelder-Mead",
                   options={"fatol": 1e-8, "xatol": 1e-8, "maxiter": 2000, "maxfev": 4000})
    phi, theta = res.x[:p], res.x[p:]
    if not (_stationary(phi) and _invertible(theta)):
        raise ArimaFitError(
            f"optimum for orders ({p},{d},{q}) is non-stationary or non-invertible; "
            "try different orders")
    sigma2 = css(y, phi, theta) / n_eff
    return ArimaModel(p, d, q, phi, theta, mu, sigma2, diff_heads(series, d))


def forecast_one(model: ArimaModel, history) -> float:
    """One-step-ahead conditional expectation given true history."""
    history = np.asarray(history, dtype=np.float64)
    if len(history) < model.p + model.d:
        raise ValueError(
            f"history of length {len(history)} too short for orders "
            f"(p={model.p}, d={model.d})")
    z = history
    lasts = 0.0
    for _ in range(model.d):
        lasts += z[-1]
        z = np.diff(z)
    y = z - model.mu
    pred = model.mu
    for i, ph in enumerate(model.phi, start=1):
        pred += ph * y[-i]
    if model.q and len(y) > model.p:
        e = residuals(y, model.phi, model.theta)
        for j, th in enumerate(model.theta, start=1):
            if j <= len(e):
                pred += th * e[-j]
    return float(pred + lasts)


def rolling_forecast(model: ArimaModel, series, test_range) -> np.ndarray:
    """One-step forecasts for every slot in [start, stop), each conditioned on
    the true series up to the previous slot. No refitting."""
    series = np.asarray(series, dtype=np.float64)
    start, stop = test_range
    if not (0 <= start < stop <= len(series)):
        raise ValueError(f"test range [{start}, {stop}) outside series of length {len(series)}")
    return np.array([forecast_one(model, series[:t]) for t in range(start, stop)])


def aic(model: ArimaModel, n_eff: int) -> float:
    return n_eff * np.log(model.sigma2) + 2.0 * (model.p + model.q + 1)


def auto_order(series, max_p: int = 3, max_q: int = 3, max_d: int = 1):
    """Grid-search (p, d, q) by AIC; ties prefer fewer AR+MA terms, then lower d."""
    series = np.asarray(series, dtype=np.float64)
    if len(series) < 200:
        raise ValueError("need at least 200 observations for order selection")
    candidates = []
    for d, p, q in itertools.product(range(max_d + 1), range(max_p + 1), range(max_q + 1)):
        try:
            model = fit(series, p, d, q)
        except (ArimaFitError, ValueError):
            continue
        if model.sigma2 <= 0:
            continue
        n_eff = len(series) - d - p
        candidates.append((aic(model, n_eff), p + q, d, p, q))
    if not candidates:
        raise ArimaFitError("no ARIMA order in the search grid could be fitted")
    _, _, d, p, q = min(candidates)
    return p, d, q


def serialize(model: ArimaModel) -> str:
    return modelio.dumps({
        "type": "arima",
        "p": model.p, "d": model.d, "q": model.q,
        "phi": model.phi, "theta": model.theta,
        "mu": model.mu, "sigma2": model.sigma2,
        "heads": model.heads,
    })


def deserialize(text: str) -> ArimaModel:
    obj = modelio.loads(text)
    modelio.check_type_tag(obj, "arima")
    p = int(modelio.require(obj, "p"))
    d = int(modelio.require(obj, "d"))
    q = int(modelio.require(obj, "q"))
    return ArimaModel(
        p, d, q,
        modelio.require_array(obj, "phi", (p,)),
        modelio.require_array(obj, "theta", (q,)),
        float(modelio.require(obj, "mu")),
        float(modelio.require(obj, "sigma2")),
        modelio.require_array(obj, "heads", (d,)))
