"""PSLQ integer relation detection (Ferguson-Bailey, one level, gamma = 2/sqrt 3)."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from mpmath import mp, mpf

from .mpfloat import MPReal, PrecisionContext, PrecisionError, to_mpf

__all__ = ["PSLQResult", "pslq", "required_digits", "DEFAULT_MAX_HEIGHT"]

DEFAULT_MAX_HEIGHT = 10**9
# a relation is accepted when |m . x| < 10^-(target - RESIDUAL_SLACK)
RESIDUAL_SLACK = 10


@dataclass(frozen=True)
class PSLQResult:
    relation: tuple[int, ...] | None
    norm_bound: float  # every relation has Euclidean norm >= this
    iterations: int

    @property
    def found(self) -> bool:
        return self.relation is not None


def required_digits(n: int, max_height: int) -> int:
    return math.ceil(15 + n * math.log10(max(max_height, 2)))


def _nint(v: mpf) -> int:
    return int(mp.nint(v))


def _primitive(m: Sequence[int]) -> tuple[int, ...]:
    g = 0
    for v in m:
        g = math.gcd(g, v)
    m = [v // g for v in m]
    first = next(v for v in m if v)
    if first < 0:
        m = [-v for v in m]
    return tuple(m)


def pslq(xs: Sequence, ctx: PrecisionContext, max_height: int = DEFAULT_MAX_HEIGHT, max_iter: int | None = None) -> PSLQResult:
    """Find integers m, max|m_i| <= max_height, with sum m_i x_i ~ 0.

    ``xs`` are trusted to ``ctx.target_digits`` digits; iteration runs at
    ``ctx.working``.  Returns a result with ``relation=None`` and the
    exclusion bound when no relation of height <= max_height exists.
    Raises PrecisionError when the digits cannot support the search.
    """
    n = len(xs)
    if n < 2:
        raise ValueError("pslq needs at least two numbers")
    need = required_digits(n, max_height)
    if ctx.target_digits < need:
        raise PrecisionError(
            f"{n} numbers at height {max_height} need >= {need} digits, have {ctx.target_digits}"
        )
    dps = ctx.working
    max_iter = max_iter or 200 * n * n + 100 * ctx.target_digits
    with mp.workdps(dps):
        x = [to_mpf(v, dps) for v in xs]
        tol = mpf(10) ** (-(ctx.target_digits - RESIDUAL_SLACK))
        xnorm = mp.sqrt(mp.fsum(v * v for v in x))
        if xnorm == 0:
            raise ValueError("pslq input vector is zero")
        for i, v in enumerate(x):
            if abs(v) < tol * xnorm:
                rel = [0] * n
                rel[i] = 1
                return PSLQResult(tuple(rel), 0.0, 0)
        x = [v / xnorm for v in x]
        gamma = mp.sqrt(mpf(4) / 3)

        s = [mpf(0)] * n
        for k in range(n):
            s[k] = mp.sqrt(mp.fsum(x[j] ** 2 for j in range(k, n)))
        H = [[mpf(0)] * (n - 1) for _ in range(n)]
        for i in range(n):
            for j in range(min(i, n - 2) + 1):
                if i == j:
                    H[i][j] = s[i + 1] / s[i]
                elif j < i:
                    H[i][j] = -x[i] * x[j] / (s[j] * s[j + 1])
        A = [[int(i == j) for j in range(n)] for i in range(n)]
        B = [[int(i == j) for j in range(n)] for i in range(n)]
        y = list(x)

        def reduce_rows(start: int):
            for i in range(start, n):
                for j in range(min(i - 1, n - 2), -1, -1):
                    if H[j][j] == 0:
                        continue
                    t = _nint(H[i][j] / H[j][j])
                    if t == 0:
                        continue
                    y[j] += t * y[i]
                    for k in range(j + 1):
                        H[i][k] -= t * H[j][k]
                    for k in range(n):
                        A[i][k] -= t * A[j][k]
                        B[k][j] += t * B[k][i]

        reduce_rows(1)
        bound = mpf(0)
        for it in range(1, max_iter + 1):
            # choose the row maximizing gamma^j |H_jj|
            best, m = mpf(-1), 0
            gp = gamma
            for j in range(n - 1):
                v = gp * abs(H[j][j])
                if v > best:
                    best, m = v, j
                gp *= gamma
            y[m], y[m + 1] = y[m + 1], y[m]
            A[m], A[m + 1] = A[m + 1], A[m]
            H[m], H[m + 1] = H[m + 1], H[m]
            for row in B:
                row[m], row[m + 1] = row[m + 1], row[m]
            if m < n - 2:
                t0 = mp.sqrt(H[m][m] ** 2 + H[m][m + 1] ** 2)
                if t0 == 0:
                    raise PrecisionError("PSLQ breakdown: zero corner in H")
                t1, t2 = H[m][m] / t0, H[m][m + 1] / t0
                for i in range(m, n):
                    t3, t4 = H[i][m], H[i][m + 1]
                    H[i][m] = t1 * t3 + t2 * t4
                    H[i][m + 1] = -t2 * t3 + t1 * t4
            reduce_rows(m + 1)

            # relation check: smallest |y_j| picks column j of B
            jmin = min(range(n), key=lambda j: abs(y[j]))
            if abs(y[jmin]) < tol:
                rel = [B[k][jmin] for k in range(n)]
                if max(abs(v) for v in rel) <= max_height and any(rel):
                    resid = abs(mp.fsum(r * v for r, v in zip(rel, x))) * xnorm
                    if resid < tol * max(1, max(abs(v) for v in rel)):
                        return PSLQResult(_primitive(rel), float(bound), it)
                raise PrecisionError("PSLQ reached working precision without a certified relation")

            hmax = max(abs(H[j][j]) for j in range(n - 1))
            if hmax == 0:
                raise PrecisionError("PSLQ breakdown: H collapsed")
            bound = 1 / hmax
            if bound > max_height * math.sqrt(n):
                # any relation m has |m|_2 >= bound, so max|m_i| >= bound / sqrt(n) > max_height
                return PSLQResult(None, float(bound), it)
            amax = max(abs(v) for row in A for v in row)
            if amax > mpf(10) ** (ctx.target_digits - RESIDUAL_SLACK):
                raise PrecisionError("PSLQ integer matrix outgrew the available precision")
    raise PrecisionError(f"PSLQ did not settle within {max_iter} iterations")
