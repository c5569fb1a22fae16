"""Left null vector, spectral gap and M-matrix diagnostics of a Laplacian."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DegenerateGapError, NoRootError, SingularSolveError
from .graph import Connectivity, Laplacian

NULL_RESIDUAL_TOL = 1e-10
ZERO_MODE_ANGLE = 1e-6


@dataclass(frozen=True, eq=False)
class SpectralData:
    """Certificate inputs derived from a Laplacian.

    ``lambda2`` is ``inf`` when the root component is a single vertex; the
    dispersion on the root is then identically zero and ``degenerate_root``
    is set.
    """

    xi: np.ndarray
    lambda2: float
    max_xi: float
    root_support: np.ndarray
    degenerate_root: bool = False
    null_residual: float = 0.0

    def fingerprint_bytes(self) -> bytes:
        return np.ascontiguousarray(self.xi, dtype=np.float64).tobytes()


def jacobi_eigh(a, tol: float = 1e-13, max_sweeps: int = 60):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Rotations are applied in round-robin order, n//2 disjoint pairs at a
    time, so each round vectorises over numpy.  Iterates until the
    off-diagonal Frobenius norm drops to ``tol * ||a||_F``.

    Returns ``(eigenvalues, eigenvectors)`` sorted ascending; eigenvectors
    are columns.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if not np.allclose(a, a.T, rtol=0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise ValueError("matrix must be symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0:
        return np.diag(a).copy(), v

    players = list(range(n + n % 2))
    m = len(players)
    for _ in range(max_sweeps):
        # direct sum; total minus diagonal cancels catastrophically near convergence
        off = np.linalg.norm(a[~np.eye(n, dtype=bool)])
        if off <= tol * scale:
            break
        for _ in range(m - 1):
            pairs = [(players[i], players[m - 1 - i]) for i in range(m // 2)]
            pairs = [(min(p, q), max(p, q)) for p, q in pairs if p < n and q < n]
            p = np.array([pq[0] for pq in pairs])
            q = np.array([pq[1] for pq in pairs])
            apq = a[p, q]
            keep = apq != 0
            if np.any(keep):
                p, q, apq = p[keep], q[keep], apq[keep]
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                big = np.abs(theta) > 1e150
                th = np.where(big, 1.0, theta)
                t = np.sign(th) / (np.abs(th) + np.sqrt(th * th + 1.0))
                t = np.where(big, 0.5 / np.where(big, theta, 1.0), t)
                t[theta == 0] = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c[:, None] * ap - s[:, None] * aq
                a[q, :] = s[:, None] * ap + c[:, None] * aq
                a[p, q] = 0.0
                a[q, p] = 0.0

                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
            players = [players[0], players[-1]] + players[1:-1]
    else:
        raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")

    w = np.diag(a).copy()
    idx = np.argsort(w, kind="stable")
    return w[idx], v[:, idx]


def _require_root(lap: Laplacian) -> None:
    if lap.classification is Connectivity.NO_ROOT:
        raise NoRootError("left null vector is not unique: graph has no spanning tree")


def left_null_vector(lap: Laplacian) -> np.ndarray:
    """Nonnegative ``xi`` with ``xi @ L = 0`` and ``sum(xi) = 1``.

    Solved on the root block only (the last equation of the transposed
    system is replaced by the normalisation) and zero-extended.
    """
    _require_root(lap)
    root = lap.root_block
    block = lap.entries[np.ix_(root, root)]
    p = len(root)
    system = block.T.copy()
    system[-1, :] = 1.0
    rhs = np.zeros(p)
    rhs[-1] = 1.0
    try:
        xi_root = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSolveError(f"root block null space solve failed: {exc}") from exc

    xi = np.zeros(lap.n)
    xi[root] = xi_root
    norm_l = np.abs(lap.entries).sum(axis=1).max()
    resid = np.abs(xi @ lap.entries).max()
    if not np.isfinite(resid) or resid > NULL_RESIDUAL_TOL * max(norm_l, 1e-300):
        raise SingularSolveError(f"null vector residual {resid:.3e} exceeds tolerance")
    # clean sign noise; a negative entry beyond roundoff would be a real failure
    if np.any(xi_root < -1e-12):
        raise SingularSolveError("null vector has negative entries on the root block")
    return xi


def gap_matrix(lap: Laplacian, xi: np.ndarray) -> np.ndarray:
    """Root-block symmetric form ``Xi L11 + L11^T Xi``."""
    root = lap.root_block
    block = lap.entries[np.ix_(root, root)]
    weighted = xi[root][:, None] * block
    return weighted + weighted.T


def lambda2(lap: Laplacian, xi: np.ndarray) -> float:
    """Smallest positive eigenvalue of the root-block form ``Xi L11 + L11^T Xi``.

    The structural zero is identified by its eigenvector lying along the
    all-ones vector; any second eigenvalue below the zero threshold means
    the root block is not irreducible.  Returns ``inf`` for a single-vertex
    root.
    """
    _require_root(lap)
    p = len(lap.root_block)
    if p == 1:
        return math.inf
    m = gap_matrix(lap, xi)
    evals, evecs = jacobi_eigh(m)
    tau0 = p * np.abs(m).sum(axis=1).max() * 1e-12

    ones = np.ones(p) / math.sqrt(p)
    cosines = np.clip(np.abs(ones @ evecs), 0.0, 1.0)
    zero_idx = int(np.argmax(cosines))
    angle = math.acos(cosines[zero_idx])
    if angle >= ZERO_MODE_ANGLE or abs(evals[zero_idx]) > tau0:
        raise DegenerateGapError(
            f"no eigenvector along the ones vector (angle {angle:.2e}, eigenvalue {evals[zero_idx]:.2e})")
    rest = np.delete(evals, zero_idx)
    if np.any(rest <= tau0):
        raise DegenerateGapError("more than one eigenvalue at zero; root block is not irreducible")
    return float(rest.min())


def spectral_data(lap: Laplacian) -> SpectralData:
    xi = left_null_vector(lap)
    lam = lambda2(lap, xi)
    resid = float(np.abs(xi @ lap.entries).max())
    return SpectralData(
        xi=xi,
        lambda2=lam,
        max_xi=float(xi.max()),
        root_support=np.sort(lap.root_block),
        degenerate_root=math.isinf(lam),
        null_residual=resid,
    )


def general_eigenvalues(m) -> np.ndarray:
    """All eigenvalues of a dense square matrix.

    Delegates to LAPACK's Hessenberg + shifted QR (``numpy.linalg.eig``) and
    checks each eigenpair residual against ``1e-9 * ||m||_F``.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("matrix must be square")
    if n > 512:
        raise ValueError("dense eigen-solver limited to n <= 512")
    try:
        w, vecs = np.linalg.eig(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    fro = np.linalg.norm(m)
    resid = np.linalg.norm(m @ vecs - vecs * w, axis=0)
    if np.any(resid > 1e-9 * max(fro, 1e-300)):
        raise ConvergenceError(f"eigenpair residual {resid.max():.2e} above tolerance")
    return w


@dataclass(frozen=True)
class MmatrixDiagnostic:
    """Decay data for one non-root diagonal block.

    ``bound_k`` bounds ``||exp(-L_kk t)|| <= K exp(-abscissa t)``; it is the
    eigenvector condition number, or ``None`` when the block is numerically
    defective.
    """

    block_index: int
    vertices: tuple
    abscissa: float
    bound_k: float | None
    diagonalizable: bool


def block_diagnostic(block: np.ndarray, index: int = 2, vertices=()) -> MmatrixDiagnostic:
    w = general_eigenvalues(block)
    _, vecs = np.linalg.eig(block)
    cond = np.linalg.cond(vecs)
    ok = bool(np.isfinite(cond) and cond < 1e12)
    return MmatrixDiagnostic(index, tuple(int(v) for v in vertices), float(w.real.min()),
                             float(cond) if ok else None, ok)


def mmatrix_diagnostics(lap: Laplacian) -> list:
    """Spectral abscissa and K bound of each non-root block (1-based block index >= 2)."""
    if lap.classification is not Connectivity.SPANNING_TREE:
        if lap.classification is Connectivity.NO_ROOT:
            raise NoRootError("graph has no spanning tree")
        return []
    out = []
    for k, rows in enumerate(lap.blocks()[1:], start=2):
        out.append(block_diagnostic(lap.entries[np.ix_(rows, rows)], k, lap.labels[rows]))
    return out
