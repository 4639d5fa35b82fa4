"""Realizing truncated Taylor series as conservative multiparametric systems.

A series vanishing at the origin is first realized verbatim by a
shift-register system: one register per multi-index below the degree,
forward shifts between them, and readout weights carrying the series
coefficients with a multinomial normalization that compensates for the
number of monomial words reaching each register.  Feeding that system
through the decomposition and dilation pipeline then produces a
conservative system with the same transfer function, certified by the
dilation's defect report.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np

from .agler import construct_pencil_decomposition, epsilon_bounds
from .dilation import DilationResult, build_dilation
from .krein import CanonicalSymmetry, opnorm
from .systems import MultiparametricSystem, pad_io, system_operators
from .transfer import (
    TruncatedOperatorSeries,
    eval_series,
    eval_transfer,
    multi_indices,
)

MAX_DEFAULT_REGISTER_DEGREE = 6

#: widest complex dtype on this platform, for the coefficient match report
_WIDE = getattr(np, "complex256", np.complex128)


def _coefficient_probe(system: MultiparametricSystem, degree: int):
    """Taylor coefficients of the transfer function in extended precision.

    The dilated state is large and its blocks are not small, so the
    float64 coefficient recursion carries evaluation roundoff well above
    the construction error of the system itself.  Running the recursion
    on the B-columns in the widest available float measures the system,
    not the evaluator.  Returns {t: ndarray} in complex128.
    """
    n = system.n
    a = [m.astype(_WIDE) for m in system.a]
    b = [m.astype(_WIDE) for m in system.b]
    c = [m.astype(_WIDE) for m in system.c]
    zero = (0,) * n

    def bump(t, k):
        return t[:k] + (t[k] + 1,) + t[k + 1 :]

    # w[k][s] = P_s B_k with P_0 = I, P_s = sum_l A_l P_{s - e_l}
    w = [{zero: b[k]} for k in range(n)]
    for level in range(1, max(degree - 1, 0)):
        for s in multi_indices(n, level):
            for k in range(n):
                acc = None
                for l in range(n):
                    if s[l] == 0:
                        continue
                    prev = w[k].get(s[:l] + (s[l] - 1,) + s[l + 1 :])
                    if prev is None:
                        continue
                    term = a[l] @ prev
                    acc = term if acc is None else acc + term
                if acc is not None:
                    w[k][s] = acc

    out = {}
    for k in range(n):
        out[bump(zero, k)] = system.d[k].astype(np.complex128)
    for level in range(2, degree + 1):
        for t in multi_indices(n, level):
            acc = None
            for j in range(n):
                if t[j] == 0:
                    continue
                tj = t[:j] + (t[j] - 1,) + t[j + 1 :]
                for k in range(n):
                    if tj[k] == 0:
                        continue
                    ws = w[k].get(tj[:k] + (tj[k] - 1,) + tj[k + 1 :])
                    if ws is None:
                        continue
                    term = c[j] @ ws
                    acc = term if acc is None else acc + term
            if acc is not None:
                out[t] = acc.astype(np.complex128)
    return out


def _word_normalization(t):
    """prod_j t_j! / |t|!, the reciprocal of the monomial word count."""
    num = 1
    for tj in t:
        num *= factorial(tj)
    return num / factorial(sum(t))


def shift_register_realization(
    theta: TruncatedOperatorSeries, d: int | None = None, allow_large_degree: bool = False
) -> MultiparametricSystem:
    """Realize a series vanishing at 0 exactly through degree ``d``.

    The state is one register per multi-index s with 1 <= |s| <= d - 1,
    each a copy of the input space.  A_k shifts register s to s + e_k,
    B_k injects the input into register e_k, C_k reads register s with
    the weight theta_hat_{s + e_k} * prod(t_j!) / |t|!, and
    D_k = theta_hat_{e_k}.  Every monomial word from the input to an
    output of total index t contributes the same normalized weight, and
    there are |t|!/prod(t_j!) such words, so the Taylor coefficients of
    the result reproduce the series exactly.
    """
    if d is None:
        d = theta.degree
    if d < 1:
        raise ValueError("realization degree must be at least 1")
    n = theta.n
    zero = (0,) * n
    dy, du = theta.shape
    if np.any(theta.coefficient(zero)):
        raise ValueError("series must vanish at 0")
    for t, m in theta.coefficients.items():
        if sum(t) > d and np.any(m):
            raise ValueError(
                f"series has a nonzero coefficient at {t} beyond degree {d}; "
                "raise the realization degree instead of truncating silently"
            )
    if n >= 3 and d > MAX_DEFAULT_REGISTER_DEGREE and not allow_large_degree:
        raise ValueError(
            f"degree {d} with {n} directions exceeds the register cap "
            f"{MAX_DEFAULT_REGISTER_DEGREE}; pass allow_large_degree=True to override"
        )

    registers = [t for level in range(1, d) for t in multi_indices(n, level)]
    offset = {t: i * du for i, t in enumerate(registers)}
    dx = du * len(registers)

    def shifted(t, k):
        return t[:k] + (t[k] + 1,) + t[k + 1 :]

    a, b, c, dd = [], [], [], []
    for k in range(n):
        ak = np.zeros((dx, dx), dtype=np.complex128)
        bk = np.zeros((dx, du), dtype=np.complex128)
        ck = np.zeros((dy, dx), dtype=np.complex128)
        for s in registers:
            tgt = shifted(s, k)
            if sum(tgt) <= d - 1:
                ak[offset[tgt] : offset[tgt] + du, offset[s] : offset[s] + du] = np.eye(du)
            ck[:, offset[s] : offset[s] + du] = _word_normalization(tgt) * theta.coefficient(tgt)
        if d > 1:
            ek = shifted(zero, k)
            bk[offset[ek] : offset[ek] + du] = np.eye(du)
        a.append(ak)
        b.append(bk)
        c.append(ck)
        dd.append(theta.coefficient(shifted(zero, k)))
    return MultiparametricSystem(n=n, a=tuple(a), b=tuple(b), c=tuple(c), d=tuple(dd))


@dataclass(frozen=True)
class RealizationResult:
    """Conservative realization of a series plus its match evidence."""

    system: MultiparametricSystem
    j: CanonicalSymmetry
    dilation: DilationResult
    coefficient_residuals: dict
    sample_residual: float
    radius: float
    output_dim: int
    input_dim: int

    def max_coefficient_residual(self) -> float:
        return max(self.coefficient_residuals.values(), default=0.0)

    def corner_transfer(self, z) -> np.ndarray:
        """Transfer of the realized system restricted to the original channels."""
        return eval_transfer(self.system, z)[: self.output_dim, : self.input_dim]


def jconservative_realization(
    theta: TruncatedOperatorSeries,
    d: int | None = None,
    tol: float = 1e-6,
    dec_degree: int | None = None,
    radius: float = 0.5,
    epsilon: float | None = None,
    samples: int = 50,
    seed: int = 0,
    allow_large_degree: bool = False,
) -> RealizationResult:
    """Realize a series as the corner transfer of a conservative system.

    Composes the shift-register realization, channel padding, a feasible
    scale from epsilon_bounds, the certified decomposition at
    ``dec_degree`` (default max(20, d + 4); the realized transfer tail
    decays like radius^(dec_degree + 1)), and the dilation build.  The
    result's Taylor coefficients reproduce the input through degree ``d``
    exactly up to roundoff, and its values match the truncated series on
    the certified polydisk within the reported sample residual.
    """
    if d is None:
        d = theta.degree
    alpha = shift_register_realization(theta, d, allow_large_degree=allow_large_degree)
    padded = pad_io(alpha)
    g = system_operators(padded)
    if epsilon is None:
        _, upper = epsilon_bounds(g)
        epsilon = max(1.0, upper)
    if dec_degree is None:
        dec_degree = max(20, d + 4)
    dec = construct_pencil_decomposition(g, epsilon, dec_degree, radius=radius)
    dil = build_dilation(padded, dec, tol=tol, seed=seed)

    dy, du = theta.shape
    m = max(du, dy)
    realized = _coefficient_probe(dil.alpha_tilde, d)
    zero_block = np.zeros((m, m), dtype=np.complex128)
    residuals = {}
    for level in range(1, d + 1):
        for t in multi_indices(theta.n, level):
            target = np.zeros((m, m), dtype=np.complex128)
            target[:dy, :du] = theta.coefficient(t)
            residuals[t] = float(opnorm(realized.get(t, zero_block) - target))

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        z = radius / np.sqrt(2) * (
            rng.uniform(-1, 1, theta.n) + 1j * rng.uniform(-1, 1, theta.n)
        )
        want = eval_series(theta, z).value
        got = eval_transfer(dil.alpha_tilde, z)[:dy, :du]
        worst = max(worst, float(opnorm(got - want)))

    return RealizationResult(
        system=dil.alpha_tilde,
        j=dil.j,
        dilation=dil,
        coefficient_residuals=residuals,
        sample_residual=worst,
        radius=radius,
        output_dim=dy,
        input_dim=du,
    )
