"""Finite-dimensional Krein-space linear algebra.

A Krein space here is C^n equipped with the indefinite inner product
[x, y] = <J x, y>, where the canonical symmetry J is hermitian and
involutive (J = J* = J^-1).  The module provides the primitives the
rest of the package leans on: unitarity defects between two such
metrics, Gram regularization of subspaces, J-orthogonal projections,
and extension of a J-isometry defined on a subspace to a J-unitary
operator on the whole space.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space

__all__ = [
    "CanonicalSymmetry",
    "KreinSubspace",
    "DegenerateSubspaceError",
    "SignatureMismatchError",
    "signature",
    "j_unitarity_defect",
    "j_orthogonal_projection",
    "regularize_subspace",
    "j_companion_basis",
    "extend_j_isometry",
    "hermitian_sqrt",
    "random_j_unitary",
]

#: relative singular-value / eigenvalue threshold used for rank decisions
RANK_RTOL = 1e-10

#: relative Gram-eigenvalue threshold below which a direction counts as neutral
NEUTRAL_RTOL = 1e-8

#: tolerance on J = J* = J^-1 at construction time
INVOLUTION_TOL = 1e-12


def _as_complex(a) -> np.ndarray:
    return np.asarray(a, dtype=np.complex128)


def opnorm(a) -> float:
    """Spectral norm, with the empty matrix mapped to 0."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


class DegenerateSubspaceError(ValueError):
    """Raised when a subspace Gram matrix has a (numerically) neutral vector."""


class SignatureMismatchError(ValueError):
    """A J-unitary map between the two sides cannot exist at these signatures.

    Attributes record the minimal ambient padding (extra positive /
    negative directions per side) that would equalize the signatures.
    """

    def __init__(self, msg, *, pad_dom=(0, 0), pad_ran=(0, 0)):
        super().__init__(msg)
        self.pad_dom = tuple(pad_dom)
        self.pad_ran = tuple(pad_ran)


def signature(h, tol: float | None = None) -> tuple[int, int, int]:
    """Counts (p, q, z) of eigenvalues of a hermitian matrix above tol,
    below -tol, and within [-tol, tol]."""
    h = _as_complex(h)
    if h.shape[0] != h.shape[1]:
        raise ValueError("signature expects a square matrix")
    if h.size == 0:
        return (0, 0, 0)
    if opnorm(h - h.conj().T) > 1e-10 * max(1.0, opnorm(h)):
        raise ValueError("matrix is not hermitian")
    w = np.linalg.eigvalsh(h)
    if tol is None:
        tol = RANK_RTOL * max(1.0, float(np.max(np.abs(w))))
    p = int(np.sum(w > tol))
    q = int(np.sum(w < -tol))
    return (p, q, h.shape[0] - p - q)


@dataclass(frozen=True, eq=False)
class CanonicalSymmetry:
    """Hermitian involution J defining the metric [x, y] = <J x, y>."""

    matrix: np.ndarray

    def __post_init__(self):
        m = _as_complex(self.matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("canonical symmetry must be square")
        if m.size:
            scale = max(1.0, opnorm(m))
            if opnorm(m - m.conj().T) > INVOLUTION_TOL * scale:
                raise ValueError("canonical symmetry must be hermitian")
            if opnorm(m @ m - np.eye(m.shape[0])) > INVOLUTION_TOL * scale:
                raise ValueError("canonical symmetry must be involutive")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def signature(self) -> tuple[int, int]:
        p, q, _ = signature(self.matrix, tol=0.5)
        return (p, q)

    @classmethod
    def identity(cls, n: int) -> "CanonicalSymmetry":
        return cls(np.eye(n, dtype=np.complex128))

    @classmethod
    def from_signs(cls, signs) -> "CanonicalSymmetry":
        signs = np.asarray(signs, dtype=float)
        if signs.size and not np.all(np.abs(signs) == 1.0):
            raise ValueError("signs must be +1 or -1")
        return cls(np.diag(signs.astype(np.complex128)))

    @classmethod
    def direct_sum(cls, *parts: "CanonicalSymmetry") -> "CanonicalSymmetry":
        mats = [p.matrix for p in parts]
        n = sum(m.shape[0] for m in mats)
        out = np.zeros((n, n), dtype=np.complex128)
        k = 0
        for m in mats:
            out[k : k + m.shape[0], k : k + m.shape[0]] = m
            k += m.shape[0]
        return cls(out)

    def apply(self, x) -> np.ndarray:
        return self.matrix @ _as_complex(x)


@dataclass
class KreinSubspace:
    """Subspace of (C^n, J) given by a basis matrix plus its indefinite Gram.

    ``basis`` has the (full column rank) basis vectors as columns and
    ``gram`` is basis* J basis for the ambient symmetry the subspace
    was cut from.
    """

    basis: np.ndarray
    gram: np.ndarray = field(default=None)

    def __post_init__(self):
        self.basis = _as_complex(self.basis)
        if self.basis.ndim != 2:
            raise ValueError("basis must be a 2d array")
        if self.gram is not None:
            self.gram = _as_complex(self.gram)

    @classmethod
    def from_basis(cls, basis, j: CanonicalSymmetry) -> "KreinSubspace":
        basis = _as_complex(basis)
        return cls(basis=basis, gram=basis.conj().T @ j.matrix @ basis)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def is_regular(self, tol: float = RANK_RTOL) -> bool:
        if self.dim == 0:
            return True
        w = np.linalg.eigvalsh(self.gram)
        return bool(np.min(np.abs(w)) > tol * max(1.0, float(np.max(np.abs(w)))))


def j_unitarity_defect(g, j_in: CanonicalSymmetry, j_out: CanonicalSymmetry) -> tuple[float, float]:
    """Operator-norm defects (d1, d2) of G*J_out G = J_in and G J_in G* = J_out."""
    g = _as_complex(g)
    if g.shape != (j_out.dim, j_in.dim):
        raise ValueError(
            f"operator shape {g.shape} does not match symmetries ({j_out.dim}, {j_in.dim})"
        )
    d1 = opnorm(g.conj().T @ j_out.matrix @ g - j_in.matrix)
    d2 = opnorm(g @ j_in.matrix @ g.conj().T - j_out.matrix)
    return (d1, d2)


def j_orthogonal_projection(h, f0, j_m: CanonicalSymmetry, tol: float = 1e-8) -> np.ndarray:
    """J-orthogonal projection of h onto the orthogonal complement of ran(f0).

    Requires f0 to be J-semiunitary, f0* J f0 = I.  The projected vector
    h0 = h - J f0 f0* h satisfies f0* h0 = 0 and J(h - h0) is orthogonal
    to every vector annihilated by f0*.
    """
    h = _as_complex(h)
    f0 = _as_complex(f0)
    m = f0.shape[1]
    defect = opnorm(f0.conj().T @ j_m.matrix @ f0 - np.eye(m))
    if defect > tol:
        raise ValueError(f"f0 is not J-semiunitary (defect {defect:.3e} > {tol:.1e})")
    return h - j_m.matrix @ (f0 @ (f0.conj().T @ h))


def regularize_subspace(
    subspace: KreinSubspace, j: CanonicalSymmetry, tol: float = RANK_RTOL
) -> tuple[np.ndarray, CanonicalSymmetry]:
    """Rescale a basis of a regular subspace so its Gram becomes diag(+-1).

    The Gram basis* J basis is diagonalized; eigenvalues within
    ``tol`` (relative) of zero flag a degenerate subspace and raise.
    Eigenvectors are scaled by |eig|^(-1/2), ordered positive first, so
    the returned basis B satisfies B* J B = J0 with J0 = diag(+1..,-1..).
    """
    basis = subspace.basis
    if basis.shape[1] == 0:
        return basis.copy(), CanonicalSymmetry(np.zeros((0, 0), dtype=np.complex128))
    gram = basis.conj().T @ j.matrix @ basis
    w, v = np.linalg.eigh(gram)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.min(np.abs(w)) <= tol * scale:
        raise DegenerateSubspaceError(
            f"subspace Gram has a near-neutral direction (|eig| <= {tol * scale:.3e})"
        )
    order = np.argsort(-w)  # positive eigenvalues first, deterministic
    w = w[order]
    v = v[:, order]
    new_basis = basis @ (v / np.sqrt(np.abs(w)))
    j0 = CanonicalSymmetry.from_signs(np.sign(w))
    return new_basis, j0


def j_companion_basis(basis, j: CanonicalSymmetry, rtol: float = RANK_RTOL) -> np.ndarray:
    """Orthonormal basis of the J-orthogonal companion {h : basis* J h = 0}."""
    basis = _as_complex(basis)
    if basis.shape[1] == 0:
        return np.eye(basis.shape[0], dtype=np.complex128)
    return null_space(basis.conj().T @ j.matrix, rcond=rtol).astype(np.complex128)


def _padded_signatures(sig_dom, sig_ran):
    p1, q1 = sig_dom
    p2, q2 = sig_ran
    pad_dom = (max(p2 - p1, 0), max(q2 - q1, 0))
    pad_ran = (max(p1 - p2, 0), max(q1 - q2, 0))
    return pad_dom, pad_ran


def _neutral_duals(reg_basis, neutral, j: CanonicalSymmetry):
    """Partners g_i with [h_i, g_j] = delta_ij, [g_i, g_j] = 0, [g, reg] = 0.

    The partners live in the J-orthogonal companion of the regular part,
    where the pairing against the neutral vectors is automatically
    nondegenerate.
    """
    w = j_companion_basis(reg_basis, j)
    pairing = neutral.conj().T @ j.matrix @ w
    raw = w @ np.linalg.pinv(pairing)
    skew = raw.conj().T @ j.matrix @ raw
    return raw - 0.5 * neutral @ skew


def extend_j_isometry(
    dom: KreinSubspace,
    j_dom: CanonicalSymmetry,
    ran: KreinSubspace,
    j_ran: CanonicalSymmetry,
    u: np.ndarray,
    tol: float = 1e-8,
) -> tuple[int, CanonicalSymmetry, np.ndarray]:
    """Extend a J-isometry U : dom -> ran to a J-unitary on the full spaces.

    Parameters
    ----------
    dom, ran : KreinSubspace
        Regular subspaces of the ambient Krein spaces carrying ``j_dom``
        and ``j_ran``.  Must have equal dimension.
    u : ndarray
        Images of the columns of ``dom.basis`` expressed in ambient
        coordinates of the range space; column i is U(dom.basis[:, i]).
    tol : float
        Acceptance threshold on the isometry defect of ``u``.

    Returns
    -------
    (k2_dim, j2, u_full) where ``u_full`` maps the ``j_dom`` space to the
    ``j_ran`` space, is (j_dom, j_ran)-unitary, and restricts to ``u`` on
    ``dom``.  In finite dimensions a successful extension never needs an
    auxiliary space, so ``k2_dim`` is 0 and ``j2`` is empty; the value is
    kept in the interface for callers that track the padded layout.

    Degenerate subspaces are handled: a neutral direction of ``dom``
    maps to a neutral direction of ``ran`` (their Grams agree), and both
    are completed to hyperbolic pairs with dual partners before the
    companion coupling, so the extension exists whenever the ambient
    signatures allow one.

    Raises
    ------
    SignatureMismatchError
        If the ambient dimensions or companion signatures differ.  The
        exception carries the minimal per-side (positive, negative)
        ambient padding that would balance the two sides.
    DegenerateSubspaceError
        If a companion subspace is numerically degenerate.
    """
    u = _as_complex(u)
    if dom.dim != ran.dim:
        raise ValueError(f"dom and ran dimensions differ: {dom.dim} vs {ran.dim}")
    if u.shape != (ran.ambient_dim, dom.dim):
        raise ValueError("u must hold ambient-range images of the dom basis columns")

    gram_u = u.conj().T @ j_ran.matrix @ u
    iso_defect = opnorm(gram_u - dom.gram)
    if iso_defect > tol:
        raise ValueError(f"u is not J-isometric on dom (defect {iso_defect:.3e})")

    if dom.dim:
        w, v = np.linalg.eigh(dom.gram)
        scale = max(1.0, float(np.max(np.abs(w))))
        neutral_mask = np.abs(w) <= NEUTRAL_RTOL * scale
        if np.any(neutral_mask):
            reg_d = dom.basis @ v[:, ~neutral_mask]
            neut_d = dom.basis @ v[:, neutral_mask]
            reg_r = u @ v[:, ~neutral_mask]
            neut_r = u @ v[:, neutral_mask]
            duals_d = _neutral_duals(reg_d, neut_d, j_dom)
            duals_r = _neutral_duals(reg_r, neut_r, j_ran)
            dom = KreinSubspace.from_basis(np.hstack([dom.basis, duals_d]), j_dom)
            u = np.hstack([u, duals_r])
            ran = KreinSubspace.from_basis(u, j_ran)
            gram_u = u.conj().T @ j_ran.matrix @ u

    if dom.ambient_dim != ran.ambient_dim:
        d = abs(dom.ambient_dim - ran.ambient_dim)
        side = "domain" if dom.ambient_dim < ran.ambient_dim else "range"
        raise SignatureMismatchError(
            f"ambient dimensions differ ({dom.ambient_dim} vs {ran.ambient_dim}); "
            f"requires ambient padding of the {side} side by {d}",
            pad_dom=(max(ran.ambient_dim - dom.ambient_dim, 0), 0),
            pad_ran=(max(dom.ambient_dim - ran.ambient_dim, 0), 0),
        )

    comp_dom = j_companion_basis(dom.basis, j_dom)
    comp_ran = j_companion_basis(ran.basis, j_ran)
    wd, j0d = regularize_subspace(KreinSubspace.from_basis(comp_dom, j_dom), j_dom)
    wr, j0r = regularize_subspace(KreinSubspace.from_basis(comp_ran, j_ran), j_ran)
    sig_d = j0d.signature
    sig_r = j0r.signature
    if sig_d != sig_r:
        pad_dom, pad_ran = _padded_signatures(sig_d, sig_r)
        raise SignatureMismatchError(
            f"companion signatures differ: {sig_d} vs {sig_r}; requires ambient padding "
            f"dom+={pad_dom}, ran+={pad_ran}",
            pad_dom=pad_dom,
            pad_ran=pad_ran,
        )

    # With matching companion signatures the extension exists already on
    # the given spaces: send companion basis to companion basis.  Both
    # regularized Grams are diag(+1..,-1..) in the same order, so the
    # identity coupling is J-unitary between them.
    s_dom = np.hstack([dom.basis, wd])
    s_ran = np.hstack([u, wr])
    u_full = s_ran @ np.linalg.solve(s_dom, np.eye(s_dom.shape[0], dtype=np.complex128))
    j2 = CanonicalSymmetry(np.zeros((0, 0), dtype=np.complex128))
    return 0, j2, u_full


def hermitian_sqrt(h, neg_tol: float = 1e-10) -> np.ndarray:
    """Positive-semidefinite square root via eigendecomposition.

    Eigenvalues in [-neg_tol, 0) are clamped to zero; anything below
    -neg_tol (relative to the largest eigenvalue) raises.
    """
    h = _as_complex(h)
    if h.size == 0:
        return h.copy()
    w, v = np.linalg.eigh(h)
    scale = max(1.0, float(np.max(np.abs(w))))
    if np.min(w) < -neg_tol * scale:
        raise ValueError(f"matrix is not positive semidefinite (min eig {np.min(w):.3e})")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def random_j_unitary(
    j_in: CanonicalSymmetry,
    j_out: CanonicalSymmetry,
    rng: np.random.Generator,
    n_hyperbolic: int = 4,
    max_rapidity: float = 0.8,
) -> np.ndarray:
    """Random (j_in, j_out)-unitary built from block unitaries and
    elementary hyperbolic rotations.  Signatures must agree."""
    if j_in.signature != j_out.signature:
        raise SignatureMismatchError(
            f"signatures differ: {j_in.signature} vs {j_out.signature}",
            pad_dom=_padded_signatures(j_in.signature, j_out.signature)[0],
            pad_ran=_padded_signatures(j_in.signature, j_out.signature)[1],
        )
    p, q = j_in.signature
    n = j_in.dim

    def sorted_eigenbasis(j):
        w, v = np.linalg.eigh(j.matrix)
        order = np.argsort(-w)
        return v[:, order]

    s_in = sorted_eigenbasis(j_in)
    s_out = sorted_eigenbasis(j_out)

    def haar_unitary(k):
        if k == 0:
            return np.zeros((0, 0), dtype=np.complex128)
        z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
        qmat, r = np.linalg.qr(z)
        return qmat * (np.diagonal(r) / np.abs(np.diagonal(r)))

    core = np.zeros((n, n), dtype=np.complex128)
    core[:p, :p] = haar_unitary(p)
    core[p:, p:] = haar_unitary(q)
    for _ in range(n_hyperbolic if (p and q) else 0):
        i = rng.integers(0, p)
        j = p + rng.integers(0, q)
        t = rng.uniform(0.0, max_rapidity)
        phi = rng.uniform(0.0, 2 * np.pi)
        h = np.eye(n, dtype=np.complex128)
        h[i, i] = np.cosh(t)
        h[j, j] = np.cosh(t)
        h[i, j] = np.exp(1j * phi) * np.sinh(t)
        h[j, i] = np.exp(-1j * phi) * np.sinh(t)
        core = h @ core
    return s_out @ core @ s_in.conj().T
