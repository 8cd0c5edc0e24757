"""Student-t distribution via the regularized incomplete beta function.

Self-contained (``math`` only) so that p-values and interval half-widths do
not depend on an external statistics library.
"""

import math

from .errors import DomainError

MAX_ITER = 300
EPS = 1e-14
TINY = 1e-300


def _betacf(a, b, x, max_iter):
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < TINY:
        d = TINY
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < TINY:
            d = TINY
        c = 1.0 + aa / c
        if abs(c) < TINY:
            c = TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _iter_cap(a, b):
    # convergence needs O(sqrt(max(a, b))) terms; 300 covers df up to ~10^4
    return max(MAX_ITER, int(20 * math.sqrt(max(a, b))))


def _stirling_tail(z):
    z2 = z * z
    return (1.0 / 12.0 - (1.0 / 360.0 - 1.0 / (1260.0 * z2)) / z2) / z


def _lgamma_ratio(z, b):
    """log Gamma(z + b) - log Gamma(z) for large z without cancellation."""
    return (
        (z - 0.5) * math.log1p(b / z)
        + b * math.log(z + b)
        - b
        + _stirling_tail(z + b)
        - _stirling_tail(z)
    )


def _lbeta(a, b):
    big, small = (a, b) if a >= b else (b, a)
    if big > 1e3:
        return math.lgamma(small) - _lgamma_ratio(big, small)
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def betainc(a, b, x, xc=None):
    """Regularized incomplete beta I_x(a, b).

    ``xc`` may carry 1 - x computed without cancellation; it is used when the
    symmetry switch evaluates the complementary fraction.
    """
    if a <= 0 or b <= 0:
        raise DomainError("betainc requires a > 0 and b > 0")
    if xc is None:
        xc = 1.0 - x
    if x <= 0.0:
        return 0.0
    if xc <= 0.0:
        return 1.0
    log_x = math.log1p(-xc) if xc < 0.5 else math.log(x)
    log_xc = math.log1p(-x) if x < 0.5 else math.log(xc)
    log_front = a * log_x + b * log_xc - _lbeta(a, b)
    front = math.exp(log_front)
    cap = _iter_cap(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x, cap) / a
    return 1.0 - front * _betacf(b, a, xc, cap) / b


def _check_df(df):
    if df <= 0 or not math.isfinite(df):
        raise DomainError(f"degrees of freedom must be positive, got {df!r}")


def t_tail(x, df):
    """Upper tail P(T > x) for x >= 0 (and the mirrored value for x < 0)."""
    _check_df(df)
    if math.isinf(x):
        return 0.0 if x > 0 else 1.0
    x2 = x * x
    # I_{df/(df+x^2)}(df/2, 1/2), both arguments passed to avoid cancellation
    denom = df + x2
    half = 0.5 * betainc(0.5 * df, 0.5, df / denom, x2 / denom)
    return half if x >= 0 else 1.0 - half


def t_cdf(x, df):
    """P(T <= x) for Student-t with ``df`` degrees of freedom."""
    _check_df(df)
    if math.isnan(x):
        return math.nan
    if x == 0:
        return 0.5
    if x < 0:
        return t_tail(-x, df)
    return 1.0 - t_tail(x, df)


def t_pdf(x, df):
    _check_df(df)
    half = 0.5 * df
    ratio = _lgamma_ratio(half, 0.5) if half > 1e3 else math.lgamma(half + 0.5) - math.lgamma(half)
    log_c = ratio - 0.5 * math.log(df * math.pi)
    return math.exp(log_c - 0.5 * (df + 1) * math.log1p(x * x / df))


def t_quantile(p, df):
    """Inverse of :func:`t_cdf`.

    The search works on the smaller tail so that probabilities near 1 keep
    their precision: bracket by doubling, then Newton steps safeguarded by
    bisection.
    """
    _check_df(df)
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie strictly between 0 and 1, got {p!r}")
    if p == 0.5:
        return 0.0
    target = p if p < 0.5 else 1.0 - p
    lo, hi = 0.0, 1.0
    while t_tail(hi, df) > target:
        lo, hi = hi, hi * 2.0
        if hi > 1e300:
            break
    t = 0.5 * (lo + hi)
    for _ in range(200):
        f = t_tail(t, df) - target
        if f > 0:
            lo = t
        else:
            hi = t
        dens = t_pdf(t, df)
        step = f / dens if dens > 0 else math.inf
        new = t + step
        if not lo < new < hi:
            new = 0.5 * (lo + hi)
        if abs(new - t) <= 4e-16 * max(1.0, abs(t)):
            t = new
            break
        t = new
    return -t if p < 0.5 else t
