"""Frequency-domain certification of the damped plate surrogate.

The second-order system is linearized as E z' = A z with E = blockdiag(K, M)
and A = [[0, K], [-K, -D]], so the first-order norm sqrt(z' E z) is exactly
the discrete energy norm.  The module computes the pencil spectrum, the
resolvent norm along the imaginary axis in that norm, and log-log fits of

* the upper envelope of the resolvent sweep (growth exponent), and
* the weakly damped eigenvalue branch (distance to the axis vs frequency),

which are the one-sided quantities the decay theory constrains.  Sweep
points are embarrassingly parallel; the worker count is capped by the
PLATE_DECAY_THREADS environment variable.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import (InsufficientDataError, InvalidArgumentError, SolverError)

_DENSE_LIMIT = 4096  # first-order dofs beyond which dense solves are refused


@dataclass
class SpectrumReport:
    """Eigenvalues, axis-distance flags, sweep data and fitted exponents."""

    eigenvalues: np.ndarray = None
    spectral_abscissa: float = None
    zero_in_resolvent: bool = None
    sweep: np.ndarray = None          # rows (omega, resolvent norm)
    theta_hat: float = None
    theta_r_squared: float = None
    branch_slope: float = None
    branch_r_squared: float = None
    band: tuple = None

    def to_dict(self):
        out = {}
        if self.eigenvalues is not None:
            out["n_eigenvalues"] = int(len(self.eigenvalues))
            out["spectral_abscissa"] = float(self.spectral_abscissa)
            out["zero_in_resolvent"] = bool(self.zero_in_resolvent)
        for name in ("theta_hat", "theta_r_squared", "branch_slope",
                     "branch_r_squared"):
            val = getattr(self, name)
            if val is not None:
                out[name] = float(val)
        if self.band is not None:
            out["band"] = [float(self.band[0]), float(self.band[1])]
        return out


def first_order_matrices(system):
    """E = blockdiag(K, M) and A = [[0, K], [-K, -D]] as sparse matrices."""
    K, M, D = system.K, system.M, system.D
    n = K.shape[0]
    E = sp.block_diag([K, M], format="csr")
    Z = sp.csr_matrix((n, n))
    A = sp.bmat([[Z, K], [-K, -D]], format="csr")
    return E, A


def _threads():
    env = os.environ.get("PLATE_DECAY_THREADS")
    cpu = os.cpu_count() or 1
    if env:
        try:
            return max(1, min(int(env), cpu))
        except ValueError:
            return cpu
    return cpu


def pencil_eigenvalues(system, count="all", shift=None):
    """Eigenvalues of the first-order generator (roots of the damped pencil).

    ``count = 'all'`` performs a dense QZ solve (refused above 4096
    first-order dofs); an integer count uses sparse shift-invert iteration
    around ``shift`` (default near the origin).
    """
    E, A = first_order_matrices(system)
    n2 = E.shape[0]
    if count == "all":
        if n2 > _DENSE_LIMIT:
            raise InvalidArgumentError(
                f"dense eigensolve refused for {n2} first-order dofs; "
                "request a count with shift-invert instead",
                invariant="dense-limit")
        # Solve in energy coordinates: L^{-1} A L^{-T} is similar to the
        # generator and dissipative in the Euclidean product, so the
        # balanced standard eigensolve keeps Re(lambda) <= 0 where the badly
        # scaled QZ pencil (stiffness vs mass blocks) loses that structure.
        lam = np.linalg.eigvals(_operator(system).G)
    else:
        from scipy.sparse.linalg import eigs
        k = int(count)
        if not 0 < k < n2 - 1:
            raise InvalidArgumentError("count out of range", invariant="count")
        target = shift if shift is not None else 1e-3 + 1e-3j
        try:
            lam = eigs(A, k=k, M=E, sigma=target, which="LM",
                       return_eigenvectors=False)
        except Exception as exc:
            raise SolverError(f"shift-invert eigensolve failed: {exc}",
                              invariant="eigensolver") from exc
    lam = np.asarray(lam)
    lam = lam[np.lexsort((lam.real, lam.imag))]
    report = SpectrumReport(
        eigenvalues=lam,
        spectral_abscissa=float(np.max(lam.real)),
        zero_in_resolvent=bool(np.min(np.abs(lam)) > 0.0),
    )
    return report


class _EnergyResolvent:
    """Similarity-transformed generator for energy-norm resolvent evaluation.

    With E = L L', the energy-norm resolvent norm of the generator equals
    the 2-norm of (i omega I - Ltilde)^{-1} where Ltilde = L^{-1} A L^{-T}.
    A complex Schur form of Ltilde turns each sweep point into triangular
    solves (inverse iteration on the smallest singular value).
    """

    def __init__(self, system):
        E, A = first_order_matrices(system)
        n2 = E.shape[0]
        if n2 > _DENSE_LIMIT:
            raise InvalidArgumentError(
                f"dense resolvent path refused for {n2} first-order dofs",
                invariant="dense-limit")
        n = system.K.shape[0]
        try:
            LK = sla.cholesky(system.K.toarray(), lower=True)
            LM = sla.cholesky(system.M.toarray(), lower=True)
        except np.linalg.LinAlgError as exc:
            raise SolverError(
                "energy factorization failed: K or M not positive definite",
                invariant="energy-pd") from exc
        L = np.zeros((n2, n2))
        L[:n, :n] = LK
        L[n:, n:] = LM
        G = sla.solve_triangular(L, A.toarray(), lower=True)
        G = sla.solve_triangular(L, G.T, lower=True).T
        self.G = G
        self.n2 = n2
        self._schur = None

    def schur(self):
        if self._schur is None:
            self._schur = sla.schur(self.G.astype(complex), output="complex")[0]
        return self._schur

    def norm_svd(self, omega):
        S = 1j * omega * np.eye(self.n2) - self.G
        svals = np.linalg.svd(S, compute_uv=False)
        smin, smax = svals[-1], svals[0]
        if smin <= 1e3 * np.finfo(float).eps * smax:
            return np.inf
        return 1.0 / smin

    def norm_schur(self, omega, tol=1e-10, max_iter=200):
        T = self.schur()
        Adiag = 1j * omega * np.eye(self.n2) - T
        dmin = np.min(np.abs(np.diag(Adiag)))
        if dmin <= 1e3 * np.finfo(float).eps * np.max(np.abs(np.diag(Adiag))):
            return np.inf
        rng = np.random.default_rng(12345)
        x = rng.standard_normal(self.n2) + 1j * rng.standard_normal(self.n2)
        x /= np.linalg.norm(x)
        prev = 0.0
        for _ in range(max_iter):
            y = sla.solve_triangular(Adiag.conj().T, x, lower=True)
            z = sla.solve_triangular(Adiag, y, lower=False)
            nz = np.linalg.norm(z)
            est = np.sqrt(nz)  # ||z|| -> 1/sigma_min^2 at convergence
            x = z / nz
            if abs(est - prev) <= tol * max(est, 1.0):
                return float(est)
            prev = est
        return self.norm_svd(omega)


def _operator(system):
    cache = getattr(system, "_energy_resolvent", None)
    if cache is None:
        cache = _EnergyResolvent(system)
        system._energy_resolvent = cache
    return cache


def resolvent_norm(system, omega):
    """Energy-norm resolvent norm ||(i omega - generator)^{-1}|| at one omega."""
    return float(_operator(system).norm_svd(float(omega)))


def resolvent_sweep(system, omegas):
    """Resolvent norms at many frequencies; returns rows (omega, norm).

    Uses the Schur-triangular inverse-iteration path (SVD fallback) and runs
    points concurrently, reassembled in input order.
    """
    op = _operator(system)
    omegas = np.asarray(omegas, dtype=float)
    if op.n2 > 900:
        op.schur()  # factor once before fanning out
        fn = op.norm_schur
    else:
        fn = op.norm_svd
    results = np.empty(len(omegas))
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        for i, val in enumerate(pool.map(fn, omegas)):
            results[i] = val
    return np.stack([omegas, results], axis=1)


# ---------------------------------------------------------------------------
# fits
# ---------------------------------------------------------------------------

def _lsq_line(x, y):
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), r2


def _local_maxima(values):
    """Indices of local maxima (ties included); boundaries compare one side."""
    n = len(values)
    idx = []
    for i in range(n):
        left_ok = i == 0 or values[i] >= values[i - 1]
        right_ok = i == n - 1 or values[i] >= values[i + 1]
        if left_ok and right_ok:
            idx.append(i)
    return np.array(idx, dtype=int)


def _monotone_front(x, y, increasing):
    """Keep the points forming the monotone envelope of (x, y), x sorted.

    ``increasing`` keeps running maxima left to right; otherwise running
    maxima scanning from the right (a decreasing upper envelope).
    """
    keep = []
    if increasing:
        run = -np.inf
        for i in range(len(x)):
            if y[i] > run:
                keep.append(i)
                run = y[i]
    else:
        run = -np.inf
        for i in range(len(x) - 1, -1, -1):
            if y[i] > run:
                keep.append(i)
                run = y[i]
        keep.reverse()
    return np.array(keep, dtype=int)


def growth_fit(sweep, band, n_bins=24):
    """Slope of log(resolvent norm) vs log(omega) on the sweep's upper envelope.

    The resolvent oscillates between eigenvalue branches, so the fit keeps
    local maxima, reduces them to per-frequency-bin peaks, and follows the
    monotone front in the direction of the overall trend; raw in-band points
    are used when the band is too sparse for an envelope (e.g. clean
    synthetic power laws).
    """
    sweep = np.asarray(sweep, dtype=float)
    lo, hi = float(band[0]), float(band[1])
    if not hi > lo:
        raise InvalidArgumentError("empty frequency band", invariant="band")
    mask = (sweep[:, 0] >= lo) & (sweep[:, 0] <= hi) & np.isfinite(sweep[:, 1])
    pts = sweep[mask]
    if len(pts) < 10:
        raise InvalidArgumentError(
            f"need at least 10 sweep points in band, found {len(pts)}",
            invariant="band-points")
    pts = pts[np.argsort(pts[:, 0])]
    env = _local_maxima(pts[:, 1])
    if len(env) < 3:
        env = np.arange(len(pts))
    w, val = pts[env, 0], pts[env, 1]
    edges = np.logspace(np.log10(w[0]), np.log10(w[-1]),
                        min(n_bins, len(w)) + 1)
    edges[-1] *= 1.0 + 1e-12
    xs, ys = [], []
    for b in range(len(edges) - 1):
        m = (w >= edges[b]) & (w < edges[b + 1])
        if np.any(m):
            i = np.argmax(val[m])
            xs.append(w[m][i])
            ys.append(val[m][i])
    lx, ly = np.log(np.array(xs)), np.log(np.array(ys))
    slope0, _ = _lsq_line(lx, ly)
    front = _monotone_front(lx, ly, increasing=slope0 > 0)
    if len(front) >= 3:
        lx, ly = lx[front], ly[front]
    slope, r2 = _lsq_line(lx, ly)
    return slope, r2


def damping_branch_fit(report, band, n_bins=24):
    """Slope of log(-Re) vs log|Im| along the weakly damped eigenvalue branch.

    Per frequency bin the eigenvalue closest to the imaginary axis is kept,
    then the monotone front of those minima (the branch envelope; raw bin
    minima when the front is too short, e.g. flat synthetic branches).
    A slope of -2 matches quadratic approach to the axis.
    """
    if report.eigenvalues is None:
        raise InvalidArgumentError("report has no eigenvalues",
                                   invariant="eigenvalues")
    lo, hi = float(band[0]), float(band[1])
    if not hi > lo:
        raise InvalidArgumentError("empty frequency band", invariant="band")
    lam = report.eigenvalues
    lam = lam[(lam.imag > 0) & (lam.real < 0)]
    freq = lam.imag
    sel = (freq >= lo) & (freq <= hi)
    lam = lam[sel]
    if len(lam) < 10:
        raise InsufficientDataError(
            f"need at least 10 branch eigenvalues in band, found {len(lam)}",
            invariant="branch-points")
    freq = lam.imag
    decay = -lam.real
    edges = np.logspace(np.log10(freq.min()), np.log10(freq.max()),
                        min(n_bins, len(lam)) + 1)
    edges[-1] *= 1.0 + 1e-12
    xs, ys = [], []
    for b in range(len(edges) - 1):
        mask = (freq >= edges[b]) & (freq < edges[b + 1])
        if not np.any(mask):
            continue
        i = np.argmin(decay[mask])
        xs.append(freq[mask][i])
        ys.append(decay[mask][i])
    if len(xs) < 3:
        raise InsufficientDataError("too few branch bins", invariant="branch-bins")
    lx = np.log(np.array(xs))
    ly = np.log(np.array(ys))
    slope0, _ = _lsq_line(lx, ly)
    # lower envelope of the bin minima, in the direction of the trend
    front = _monotone_front(lx, -ly, increasing=slope0 <= 0)
    if len(front) >= 3:
        lx, ly = lx[front], ly[front]
    slope, r2 = _lsq_line(lx, ly)
    return slope, r2


def suggest_sweep_omegas(report, band, n_grid=40, n_peaks=60):
    """Frequencies for a resolvent sweep: log grid plus eigenvalue peaks.

    Resolvent peaks are only a few linewidths wide, so a bare log grid
    misses them; adding the imaginary parts of the weakly damped in-band
    eigenvalues puts sample points on the envelope itself.
    """
    if report.eigenvalues is None:
        raise InvalidArgumentError("report has no eigenvalues",
                                   invariant="eigenvalues")
    lo, hi = float(band[0]), float(band[1])
    if not hi > lo:
        raise InvalidArgumentError("empty frequency band", invariant="band")
    grid = np.logspace(np.log10(lo), np.log10(hi), n_grid)
    lam = report.eigenvalues
    lam = lam[(lam.imag >= lo) & (lam.imag <= hi) & (lam.real < 0)]
    if len(lam):
        order = np.argsort(-lam.real)  # smallest -Re first: closest to axis
        peaks = lam.imag[order][:n_peaks]
        grid = np.concatenate([grid, peaks])
    return np.unique(grid)


def resolved_band(report, skip=10, top_fraction=2.0 / 3.0):
    """Deterministic frequency band for fits: from the ``skip``-th smallest
    eigenfrequency to ``top_fraction`` of the largest resolved one."""
    if report.eigenvalues is None:
        raise InvalidArgumentError("report has no eigenvalues",
                                   invariant="eigenvalues")
    freqs = np.sort(report.eigenvalues.imag[report.eigenvalues.imag > 1e-9])
    if len(freqs) < skip + 2:
        raise InsufficientDataError("too few eigenfrequencies for a band",
                                    invariant="band-data")
    return float(freqs[skip - 1]), float(top_fraction * freqs[-1])
