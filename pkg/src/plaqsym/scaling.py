"""Finite-size scaling: crossings, data collapse, dynamic scaling and boundary CFT fits."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

GOLDEN = (math.sqrt(5) - 1) / 2


def _as_curves(data) -> dict:
    """Normalize ``{L: (x, y[, se])}`` to sorted float arrays with an se column."""
    out = {}
    for L, arrs in data.items():
        x, y = (np.asarray(a, dtype=float) for a in arrs[:2])
        se = np.asarray(arrs[2], dtype=float) if len(arrs) > 2 and arrs[2] is not None else np.zeros_like(y)
        order = np.argsort(x)
        out[L] = (x[order], y[order], se[order])
    return out


def _resample(curves: dict, rng: np.random.Generator) -> dict:
    return {L: (x, y + rng.standard_normal(y.size) * se, se) for L, (x, y, se) in curves.items()}


# crossing


def _pair_crossings(xa, ya, xb, yb) -> np.ndarray:
    lo, hi = max(xa[0], xb[0]), min(xa[-1], xb[-1])
    grid = np.union1d(xa, xb)
    grid = grid[(grid >= lo) & (grid <= hi)]
    if grid.size < 2:
        return np.empty(0)
    d = np.interp(grid, xb, yb) - np.interp(grid, xa, ya)
    roots = list(grid[d == 0])
    s = np.sign(d)
    for k in np.flatnonzero(s[:-1] * s[1:] < 0):
        x0, x1, d0, d1 = grid[k], grid[k + 1], d[k], d[k + 1]
        roots.append(x0 - d0 * (x1 - x0) / (d1 - d0))
    return np.unique(np.array(roots, dtype=float))


def _pick(roots: np.ndarray, center: float) -> float:
    return float(roots[np.argmin(np.abs(roots - center))])


@dataclass(frozen=True)
class Crossing:
    p_c: float
    err: float
    pairs: dict = field(default_factory=dict)  # (La, Lb) -> crossing


def estimate_crossing(curves, n_boot: int = 200, seed: int = 0) -> Crossing:
    """Crossing point of observable-vs-p curves of different sizes.

    Each pair of sizes contributes the root of the difference of their
    linear interpolants (closest to the middle of the common range when
    there are several). Pair estimates are averaged with inverse-variance
    weights; variances and the final error come from a parametric bootstrap
    over the standard errors (no error without them).

    Args:
        curves: ``{L: (p, mean, se)}``; ``se`` may be omitted.
    Returns:
        Crossing with the combined estimate and per-pair crossings.
    """
    curves = _as_curves(curves)
    if len(curves) < 2:
        raise ValueError("need at least two sizes")
    sizes = sorted(curves)
    pairs = list(itertools.combinations(sizes, 2))
    centers = {}
    for a, b in pairs:
        lo, hi = max(curves[a][0][0], curves[b][0][0]), min(curves[a][0][-1], curves[b][0][-1])
        centers[(a, b)] = 0.5 * (lo + hi)

    def pair_values(cv):
        vals = {}
        for a, b in pairs:
            r = _pair_crossings(cv[a][0], cv[a][1], cv[b][0], cv[b][1])
            if r.size:
                vals[(a, b)] = _pick(r, centers[(a, b)])
        return vals

    base = pair_values(curves)
    if not base:
        raise ValueError("curves never cross in the sampled range")
    has_err = any(np.any(se > 0) for _, _, se in curves.values())
    if not has_err or n_boot < 2:
        return Crossing(float(np.mean(list(base.values()))), 0.0, base)
    rng = np.random.default_rng(seed)
    boots = [pair_values(_resample(curves, rng)) for _ in range(n_boot)]
    var = {}
    for k in base:
        s = [b[k] for b in boots if k in b]
        var[k] = np.var(s, ddof=1) if len(s) > 1 else np.inf
    floor = max(min((v for v in var.values() if v > 0), default=1e-12), 1e-12)
    w = {k: 1.0 / max(var[k], floor) for k in base}

    def combine(vals):
        keys = [k for k in vals if k in w]
        if not keys:
            return np.nan
        ws = np.array([w[k] for k in keys])
        return float(np.dot(ws, [vals[k] for k in keys]) / ws.sum())

    p_c = combine(base)
    spread = np.array([combine(b) for b in boots])
    spread = spread[np.isfinite(spread)]
    return Crossing(p_c, float(np.std(spread, ddof=1)) if spread.size > 1 else 0.0, base)


# collapse


def collapse_quality(xs: dict, ys: dict) -> float:
    """Spread of scaled curves around each other.

    Every point is compared with a straight line fitted through the points of
    all other sizes that bracket it in x; the mean squared residual is divided
    by the variance of all y, which makes the value invariant under affine
    maps of the observable. Returns ``inf`` when no point overlaps another size.
    """
    sizes = list(xs)
    allx = {L: np.asarray(xs[L], float) for L in sizes}
    ally = {L: np.asarray(ys[L], float) for L in sizes}
    yall = np.concatenate([ally[L] for L in sizes])
    var = np.var(yall)
    if var <= 0:
        return 0.0
    orders = {L: np.argsort(allx[L]) for L in sizes}
    sx = {L: allx[L][orders[L]] for L in sizes}
    sy = {L: ally[L][orders[L]] for L in sizes}
    res = []
    for L in sizes:
        for x0, y0 in zip(sx[L], sy[L]):
            px, py = [], []
            for M in sizes:
                if M == L:
                    continue
                xm = sx[M]
                if x0 < xm[0] or x0 > xm[-1]:
                    continue
                j = int(np.searchsorted(xm, x0))
                j = min(max(j, 1), xm.size - 1)
                px += [xm[j - 1], xm[j]]
                py += [sy[M][j - 1], sy[M][j]]
            if len(px) < 2:
                continue
            px, py = np.array(px) - x0, np.array(py)
            if np.ptp(px) == 0:
                pred = py.mean()
            else:
                a = np.vstack([np.ones_like(px), px]).T
                pred = np.linalg.lstsq(a, py, rcond=None)[0][0]
            res.append((y0 - pred) ** 2)
    if not res:
        return math.inf
    return float(np.mean(res) / var)


def _golden(f, lo, hi, tol):
    a, b = lo, hi
    c, d = b - GOLDEN * (b - a), a + GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2


def _line_search(f, lo, hi, tol, n_grid=17):
    """Grid scan for the best bracket, then golden section inside it."""
    grid = np.linspace(lo, hi, n_grid)
    vals = [f(g) for g in grid]
    k = int(np.argmin(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, n_grid - 1)]
    x = _golden(f, a, b, tol)
    return (x, f(x)) if f(x) <= vals[k] else (float(grid[k]), vals[k])


def _coordinate_descent(f, x0, bounds, tol=1e-4, max_iter=30):
    x = list(x0)
    best = f(x)
    for it in range(1, max_iter + 1):
        prev = list(x)
        for k, (lo, hi) in enumerate(bounds):
            def fk(v, k=k):
                y = list(x)
                y[k] = v
                return f(y)

            x[k], best = _line_search(fk, lo, hi, tol)
        if max(abs(a - b) for a, b in zip(x, prev)) < tol:
            return x, best, True, it
    return x, best, False, max_iter


@dataclass(frozen=True)
class CollapseFit:
    p_c: float
    p_c_err: float
    nu: float
    nu_err: float
    quality: float
    converged: bool
    scaled: dict = field(repr=False, default_factory=dict)  # L -> (x, y, se)


def scaled_points(curves: dict, p_c: float, nu: float) -> dict:
    return {L: ((x - p_c) * L ** (1 / nu), y, se) for L, (x, y, se) in curves.items()}


def fit_collapse(data, p0: float, nu0: float, p_window: float = 0.1, nu_bounds=None, n_boot: int = 20, seed: int = 0) -> CollapseFit:
    """Fit ``y = f((p - p_c) L^(1/nu))`` by minimizing `collapse_quality`.

    Coordinate descent with golden-section line searches over
    ``p_c in [p0 - p_window, p0 + p_window]`` and ``nu in nu_bounds``
    (default ``[nu0 / 3, 3 nu0]``). Errors are the spread of refits on
    parametric resamples of the data within their standard errors.
    """
    curves = _as_curves(data)
    if len(curves) < 3:
        raise ValueError("collapse needs at least three sizes")
    bounds = [(p0 - p_window, p0 + p_window), tuple(nu_bounds or (nu0 / 3, nu0 * 3))]

    def fit(cv, start):
        def obj(v):
            sc = scaled_points(cv, v[0], v[1])
            return collapse_quality({L: s[0] for L, s in sc.items()}, {L: s[1] for L, s in sc.items()})

        return _coordinate_descent(obj, start, bounds)

    (p_c, nu), q, ok, _ = fit(curves, [p0, nu0])
    has_err = any(np.any(se > 0) for _, _, se in curves.values())
    p_err = nu_err = 0.0
    if has_err and n_boot >= 2:
        rng = np.random.default_rng(seed)
        est = np.array([fit(_resample(curves, rng), [p_c, nu])[0] for _ in range(n_boot)])
        p_err, nu_err = (float(v) for v in est.std(axis=0, ddof=1))
    return CollapseFit(float(p_c), p_err, float(nu), nu_err, float(q), ok, scaled_points(curves, p_c, nu))


# dynamic scaling


@dataclass(frozen=True)
class DynamicCollapse:
    z: float
    z_err: float
    h0: float
    h0_err: float
    h1: float
    h1_err: float
    early: tuple[float, float]
    late: tuple[float, float]
    quality: float
    early_slope: float
    prefactor: float
    scaled: dict = field(repr=False, default_factory=dict)  # L -> (theta, y, se)


def _linfit(x, y, w=None):
    """Weighted least squares line; returns (intercept, slope, se_intercept, se_slope)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    w = np.ones_like(x) if w is None else np.asarray(w, float)
    a = np.vstack([np.ones_like(x), x]).T * np.sqrt(w)[:, None]
    coef, *_ = np.linalg.lstsq(a, y * np.sqrt(w), rcond=None)
    dof = max(x.size - 2, 1)
    resid = (y - coef[0] - coef[1] * x) * np.sqrt(w)
    cov = np.linalg.pinv(a.T @ a) * (resid @ resid) / dof
    return float(coef[0]), float(coef[1]), float(math.sqrt(max(cov[0, 0], 0))), float(math.sqrt(max(cov[1, 1], 0)))


def fit_dynamic_collapse(
    data,
    z: float | None = None,
    z_bounds=(0.5, 2.5),
    early: float = 0.3,
    late: float = 1.5,
    prefactor: float = math.pi,
) -> DynamicCollapse:
    """Collapse ``y(L, L_tau) = h(L_tau / L^z)`` and fit both ends of h.

    Early window ``theta < early``: ``y = prefactor * h0 * theta^(-1/z)``
    with the exponent fixed by z (the free slope is reported too).
    Late window ``theta > late``: ``log y = a - 2 pi h1 theta``.
    ``z`` is fitted by collapsing ``log y`` against ``log theta`` unless given.

    Args:
        data: ``{L: (L_tau, mean, se)}``.
    """
    curves = _as_curves(data)
    if early >= late:
        raise ValueError("early and late windows overlap")
    pos = {L: (x[y > 0], y[y > 0], se[y > 0]) for L, (x, y, se) in curves.items()}

    def theta(zz):
        return {L: x / L**zz for L, (x, _, _) in pos.items()}

    def obj(zz):
        th = theta(zz)
        return collapse_quality({L: np.log(t) for L, t in th.items()}, {L: np.log(pos[L][1]) for L in pos})

    z_err = 0.0
    if z is None:
        if len(pos) < 2:
            raise ValueError("fitting z needs at least two sizes")
        z, _ = _line_search(obj, *z_bounds, tol=1e-4, n_grid=41)
        # curvature of the objective gives a rough width
        h = 0.02
        f0, fp, fm = obj(z), obj(z + h), obj(z - h)
        curv = (fp + fm - 2 * f0) / h**2
        z_err = float(math.sqrt(2 * f0 / curv)) if curv > 0 and f0 > 0 else 0.0
    quality = obj(z) if len(pos) > 1 else 0.0
    th = theta(z)
    t_all = np.concatenate([th[L] for L in pos])
    y_all = np.concatenate([pos[L][1] for L in pos])
    s_all = np.concatenate([pos[L][2] for L in pos])
    w_all = np.where(s_all > 0, (y_all / np.where(s_all > 0, s_all, 1)) ** 2, 1.0)

    e = t_all < early
    l = t_all > late
    if e.sum() < 2 or l.sum() < 2:
        raise ValueError("each window needs at least two points")
    logamp = np.log(y_all[e]) + np.log(t_all[e]) / z
    we = w_all[e]
    amp = float(np.average(logamp, weights=we))
    amp_se = float(math.sqrt(np.average((logamp - amp) ** 2, weights=we) / max(e.sum() - 1, 1)))
    h0 = math.exp(amp) / prefactor
    _, early_slope, _, _ = _linfit(np.log(t_all[e]), np.log(y_all[e]), we)
    _, slope, _, slope_se = _linfit(t_all[l], np.log(y_all[l]), w_all[l])
    h1 = -slope / (2 * math.pi)
    scaled = {L: (th[L], pos[L][1], pos[L][2]) for L in pos}
    return DynamicCollapse(
        float(z), z_err, h0, h0 * amp_se, h1, slope_se / (2 * math.pi),
        (0.0, early), (late, math.inf), float(quality), early_slope, prefactor, scaled,
    )


# boundary CFT forms


def chord(d, L):
    return (L / math.pi) * np.sin(math.pi * np.abs(np.asarray(d, float)) / L)


def cross_ratio(x1, x2, x3, x4, L) -> float:
    """``x12 x34 / (x13 x24)`` with chord distances on a ring of length L."""
    x13, x24 = chord(x1 - x3, L), chord(x2 - x4, L)
    if np.isclose(x13, 0) or np.isclose(x24, 0):
        raise ValueError("coincident points: cross ratio undefined")
    return float(chord(x1 - x2, L) * chord(x3 - x4, L) / (x13 * x24))


@dataclass(frozen=True)
class LogSinFit:
    c: float
    b: float
    c_err: float
    form: str
    base: float


def fit_log_sin(l_a, y, L, form: str = "sin", base: float = math.e, se=None) -> LogSinFit:
    """Least squares for ``y = c log_base(sin(pi l_A / L)) + b``.

    ``form='chord'`` uses ``log((L/pi) sin(pi l_A / L))`` instead; only b changes.
    """
    l_a, y = np.asarray(l_a, float), np.asarray(y, float)
    if l_a.size < 3:
        raise ValueError("need at least three points")
    if np.any((l_a <= 0) | (l_a >= L)):
        raise ValueError("l_A must lie strictly between 0 and L")
    arg = np.sin(math.pi * l_a / L)
    if form == "chord":
        arg = arg * L / math.pi
    elif form != "sin":
        raise ValueError(f"unknown form {form!r}")
    x = np.log(arg) / math.log(base)
    w = None if se is None else 1.0 / np.maximum(np.asarray(se, float), 1e-12) ** 2
    b, c, _, c_err = _linfit(x, y, w)
    return LogSinFit(c, b, c_err, form, base)


@dataclass(frozen=True)
class PowerTail:
    delta: float
    delta_err: float
    log_amplitude: float


def fit_power_tail(chi, y, chi_max: float | None = None, se=None) -> PowerTail:
    """Slope of ``log y`` against ``log chi`` (points with ``chi <= chi_max``).

    With ``se`` the points are weighted by ``(y / se)^2``, the inverse
    variance of ``log y``.
    """
    chi, y = np.asarray(chi, float), np.asarray(y, float)
    se = None if se is None else np.asarray(se, float)
    if chi_max is not None:
        keep = chi <= chi_max
        chi, y = chi[keep], y[keep]
        se = None if se is None else se[keep]
    if chi.size < 2:
        raise ValueError("need at least two points in the window")
    if np.any(chi <= 0) or np.any(y <= 0):
        raise ValueError("nonpositive values in the fit window")
    w = None if se is None else (y / np.maximum(se, 1e-12)) ** 2
    a, s, _, s_err = _linfit(np.log(chi), np.log(y), w)
    return PowerTail(s, s_err, a)
