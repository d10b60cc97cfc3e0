"""Direct 2-D discretization of the surface Laplacian on a truncated strip.

After the unitary gauge transformation psi -> h^{1/2} psi the quadratic
form of the Laplace-Beltrami operator on the strip (-L, L) x S^1 reads

    Q(psi) = Int (1/h^2) |d_x psi - a psi - b (d_t psi - c psi)|^2
           + Int           |d_t psi - c psi|^2

with
    a = (d_x h^2) / (4 h^2),   c = (d_t h^2) / (4 h^2),
    b = f' xi_1' + g' xi_2',   h^2 = 1 + (f' xi_2' - g' xi_1')^2.

Being a sum of squares the form is manifestly nonnegative, and the
discretization below preserves that: each grid cell contributes the
squared residuals of the two first-order expressions, evaluated with
bilinear (Q1) shape functions at a 2 x 2 Gauss rule.  A single-point
(midpoint) rule would leave a spurious checkerboard near-null mode --
the classical hourglass instability of under-integrated quadratics --
so the 2 x 2 rule is not optional.

Boundary conditions: Dirichlet at x = +-L (which over-estimates the
true eigenvalues, so bound states found here are genuine), periodic
in t.  The mass matrix is lumped: after dividing the assembled form
matrix by the cell area hx*ht the eigenvalues of the resulting sparse
symmetric matrix approximate the spectrum of the operator.

Floating-point determinism: matrix entries are accumulated by sorting
the coordinate triplets (row, col, value) before summation, so the
assembled matrix is bitwise independent of assembly order and exactly
symmetric.  The Lanczos driver uses fixed starting data and pairwise
numpy reductions under a single BLAS thread, so repeated runs give
identical eigenvalues to the last bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg
from threadpoolctl import threadpool_limits

from .errors import ConvergenceError, InvalidArgumentError
from .geometry import CrossSection, ReferenceProfile

__all__ = [
    "StripGrid",
    "StripForm",
    "EigenResult",
    "assemble_form",
    "lowest_eigs",
    "dense_eigs",
    "extrapolated_lowest",
    "find_bound_states",
]

# 2x2 Gauss-Legendre nodes, stored as signed offsets +-u from the cell
# center.  Both stay strictly inside the cell, so coefficient singular
# points on grid lines (e.g. a sign-broken slope at x = 0) are never
# sampled.  Shape weights are built as 0.5 -+ u, which makes the swap
# u -> -u exchange them bitwise; this is what lets the assembled matrix
# commute exactly with the x-mirror permutation on even-symmetric
# coefficient fields.
_GAUSS = (-0.5 / np.sqrt(3.0), 0.5 / np.sqrt(3.0))


@dataclass(frozen=True)
class StripGrid:
    """Tensor grid on (-L, L) x [0, 1): n_x interior x-nodes, n_t t-nodes."""

    L: float
    n_x: int
    n_t: int

    def __post_init__(self) -> None:
        if self.L <= 0.0:
            raise InvalidArgumentError("strip half-length must be positive")
        if self.n_x < 32 or self.n_t < 32:
            raise InvalidArgumentError(
                "grid too coarse: need n_x >= 32 and n_t >= 32"
            )
        if self.n_x % 2 == 0:
            raise InvalidArgumentError(
                "n_x must be odd so that x = 0 is a grid node"
            )

    @property
    def hx(self) -> float:
        return 2.0 * self.L / (self.n_x + 1)

    @property
    def ht(self) -> float:
        return 1.0 / self.n_t

    @property
    def n_dof(self) -> int:
        return self.n_x * self.n_t

    def x_nodes(self) -> np.ndarray:
        """Interior x-nodes (Dirichlet ends excluded)."""
        return -self.L + self.hx * np.arange(1, self.n_x + 1)

    def t_nodes(self) -> np.ndarray:
        return self.ht * np.arange(self.n_t)

    def node_index(self, ix: int, jt: int) -> int:
        """Flat index of interior node (ix = 1..n_x, jt mod n_t)."""
        return (ix - 1) * self.n_t + (jt % self.n_t)


@dataclass
class StripForm:
    """Assembled quadratic form on a strip grid.

    ``form`` carries the quadrature weights, i.e. psi @ form @ psi
    approximates Q(psi).  The (mass-lumped) operator matrix is
    form / (hx * ht).
    """

    form: scipy.sparse.csr_matrix
    grid: StripGrid
    description: str = ""

    @property
    def cell_area(self) -> float:
        return self.grid.hx * self.grid.ht

    @property
    def operator(self) -> scipy.sparse.csr_matrix:
        return self.form / self.cell_area

    def is_exactly_symmetric(self) -> bool:
        return (self.form != self.form.T).nnz == 0

    def norm_squared(self, psi: np.ndarray) -> float:
        """Quadrature of Int |psi|^2 for a flat node vector."""
        return self.cell_area * float(np.sum(psi * psi))

    def form_value(self, psi: np.ndarray, phi: np.ndarray | None = None) -> float:
        if phi is None:
            phi = psi
        return float(np.sum(psi * (self.form @ phi)))

    def to_coordinate_text(self, path: str) -> None:
        """Dump the form matrix as 'row col value' lines (row-major)."""
        coo = self.form.tocoo()
        order = np.lexsort((coo.col, coo.row))
        with open(path, "w") as fh:
            fh.write(f"# {self.form.shape[0]} {self.form.shape[1]} {coo.nnz}\n")
            for r, c, v in zip(coo.row[order], coo.col[order], coo.data[order]):
                fh.write(f"{r} {c} {v!r}\n")


def _canonical_coo_sum(rows, cols, vals, n):
    """Sum duplicate COO entries in a canonical order.

    Sorting by (row, col, value) before reduction makes the result
    independent of the order in which cell contributions were emitted,
    which in turn makes the assembled matrix exactly symmetric and
    exactly invariant under relabelings that permute identical entries
    (e.g. the mirror x -> -x on a symmetric profile).
    """
    order = np.lexsort((vals, cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    key = rows.astype(np.int64) * n + cols
    boundaries = np.flatnonzero(np.diff(key)) + 1
    starts = np.concatenate(([0], boundaries))
    summed = np.add.reduceat(vals, starts)
    return rows[starts], cols[starts], summed


def assemble_form(
    cs: CrossSection,
    profile: ReferenceProfile,
    grid: StripGrid,
    description: str = "",
) -> StripForm:
    """Assemble the gauge-transformed Laplacian form on the strip grid.

    Per cell, bilinear shape functions are sampled at the four Gauss
    points; the two residuals

        v1 = (d_x psi - a psi - b (d_t psi - c psi)) / h
        v2 =  d_t psi - c psi

    are formed from the four nodal values, and the cell contributes
    (hx*ht/4) * sum over Gauss points of (v1 v1^T + v2 v2^T).
    """
    hx, ht = grid.hx, grid.ht
    nxc = grid.n_x + 1          # x-cells
    ntc = grid.n_t              # t-cells (periodic)
    ix = np.arange(nxc)
    jt = np.arange(ntc)

    # corner -> flat node index, -1 for the Dirichlet wall nodes
    def corner_index(dx: int, dt: int) -> np.ndarray:
        node_x = ix[:, None] + dx                      # 0 .. n_x+1
        node_t = (jt[None, :] + dt) % grid.n_t
        idx = (node_x - 1) * grid.n_t + node_t
        idx = np.where((node_x == 0) | (node_x == grid.n_x + 1), -1, idx)
        return np.broadcast_to(idx, (nxc, ntc))

    gidx = [corner_index(dx, dt) for (dx, dt) in ((0, 0), (1, 0), (0, 1), (1, 1))]

    # Per-cell contributions are accumulated per x-Gauss-point and the
    # two partials combined with a single commutative add at the end:
    # the x-mirror exchanges the two x-Gauss points, and a + b == b + a
    # bitwise while (a + b) + c need not equal (c + a) + b.
    partials = []
    weight = hx * ht / 4.0
    for ux in _GAUSS:
        part = np.zeros((4, 4, nxc, ntc))
        wx0, wx1 = 0.5 - ux, 0.5 + ux
        x_g = -grid.L + (ix + (0.5 + ux)) * hx
        fp, gp = profile.fp(x_g), profile.gp(x_g)
        fpp, gpp = profile.fpp(x_g), profile.gpp(x_g)
        for ut in _GAUSS:
            wt0, wt1 = 0.5 - ut, 0.5 + ut
            t_g = (jt + (0.5 + ut)) * ht
            xi1p, xi2p = cs.tangent_at(t_g)
            xi1pp, xi2pp = cs.tangent_dt_at(t_g)
            u = fp[:, None] * xi2p[None, :] - gp[:, None] * xi1p[None, :]
            h2 = 1.0 + u * u
            dt_h2 = 2.0 * u * (fp[:, None] * xi2pp[None, :]
                               - gp[:, None] * xi1pp[None, :])
            dx_h2 = 2.0 * u * (fpp[:, None] * xi2p[None, :]
                               - gpp[:, None] * xi1p[None, :])
            a = dx_h2 / (4.0 * h2)
            c = dt_h2 / (4.0 * h2)
            b = fp[:, None] * xi1p[None, :] + gp[:, None] * xi2p[None, :]
            inv_h = 1.0 / np.sqrt(h2)

            # bilinear shapes at the Gauss point; corner order (dx, dt)
            # as above.  Written in terms of 0.5 -+ u so that the
            # reflected Gauss point yields the exact same floats with
            # corners exchanged.
            w = np.array([wx0 * wt0, wx1 * wt0, wx0 * wt1, wx1 * wt1])
            gx = np.array([-wt0, wt0, -wt1, wt1]) / hx
            gt = np.array([-wx0, -wx1, wx0, wx1]) / ht

            v1 = np.empty((4, nxc, ntc))
            v2 = np.empty((4, nxc, ntc))
            for k in range(4):
                dtk = gt[k] - c * w[k]
                v2[k] = dtk
                v1[k] = (gx[k] - a * w[k] - b * dtk) * inv_h
            for k in range(4):
                for l in range(4):
                    part[k, l] += weight * (v1[k] * v1[l] + v2[k] * v2[l])
        partials.append(part)
    local = partials[0] + partials[1]

    rows_list, cols_list, vals_list = [], [], []
    for k in range(4):
        for l in range(4):
            r = gidx[k].ravel()
            c = gidx[l].ravel()
            v = local[k, l].ravel()
            keep = (r >= 0) & (c >= 0)
            rows_list.append(r[keep])
            cols_list.append(c[keep])
            vals_list.append(v[keep])
    rows = np.concatenate(rows_list)
    cols = np.concatenate(cols_list)
    vals = np.concatenate(vals_list)

    n = grid.n_dof
    ur, uc, uv = _canonical_coo_sum(rows, cols, vals, n)
    form = scipy.sparse.csr_matrix((uv, (ur, uc)), shape=(n, n))
    return StripForm(form=form, grid=grid, description=description)


@dataclass
class EigenResult:
    """Lowest eigenvalues of a strip operator, with convergence data."""

    eigenvalues: np.ndarray
    residual_norms: np.ndarray
    iterations: int
    convergence_record: list = field(default_factory=list)
    below_threshold: list = field(default_factory=list)
    confirmed: list = field(default_factory=list)


def _lanczos_shift_invert(A, k, sigma, tol, maxiter):
    """Shift-inverted Lanczos with full reorthogonalization.

    Deterministic by construction: the start vector is the normalized
    all-ones vector, every inner product is a pairwise numpy sum, and
    BLAS runs single-threaded, so the reduction order never depends on
    the machine's thread count.
    """
    n = A.shape[0]
    op = scipy.sparse.linalg.splu((A - sigma * scipy.sparse.identity(n)).tocsc())

    V = np.zeros((maxiter + 1, n))
    alphas: list[float] = []
    betas: list[float] = []
    v = np.ones(n) / np.sqrt(n)
    V[0] = v
    scale = max(1.0, float(np.max(np.abs(A.diagonal()))))

    best = None
    for m in range(1, maxiter + 1):
        w = op.solve(V[m - 1])
        alpha = float(np.sum(w * V[m - 1]))
        alphas.append(alpha)
        w -= alpha * V[m - 1]
        if m > 1:
            w -= betas[-1] * V[m - 2]
        # two rounds of classical Gram-Schmidt against the whole basis
        for _ in range(2):
            proj = np.einsum("ij,j->i", V[:m], w)
            w -= V[:m].T @ proj
        beta = float(np.sqrt(np.sum(w * w)))
        if beta < 1e-14:
            # invariant subspace found; the Krylov space is exact
            m_eff = m
            theta, S = scipy.linalg.eigh_tridiagonal(
                np.asarray(alphas), np.asarray(betas[: m_eff - 1])
            )
            best = (theta, S, m_eff, 0.0)
            break
        betas.append(beta)
        V[m] = w / beta

        if m >= k and (m % 5 == 0 or m == maxiter):
            theta, S = scipy.linalg.eigh_tridiagonal(
                np.asarray(alphas), np.asarray(betas[:-1])
            )
            # largest theta of (A - sigma)^-1 <-> smallest eigenvalues of A
            sel = np.argsort(theta)[::-1][:k]
            lam = sigma + 1.0 / theta[sel]
            res = np.empty(k)
            for i, j in enumerate(sel):
                y = V[:m].T @ S[:, j]
                y /= np.sqrt(np.sum(y * y))
                r = A @ y - lam[i] * y
                res[i] = np.sqrt(np.sum(r * r))
            best = (theta, S, m, res)
            if np.all(res <= tol * scale):
                break
    else:
        m = maxiter

    if best is None:
        raise ConvergenceError(
            "Lanczos produced no Ritz estimates", residuals=[]
        )
    theta, S, m_eff, res = best
    sel = np.argsort(theta)[::-1][: min(k, theta.size)]
    lam = sigma + 1.0 / theta[sel]
    order = np.argsort(lam)
    lam = lam[order]
    vecs = np.empty((len(sel), n))
    resid = np.empty(len(sel))
    for i, j in enumerate(np.asarray(sel)[order]):
        y = V[:m_eff].T @ S[:, j]
        y /= np.sqrt(np.sum(y * y))
        r = A @ y - lam[i] * y
        resid[i] = np.sqrt(np.sum(r * r))
        vecs[i] = y
    if not np.all(resid <= tol * scale):
        raise ConvergenceError(
            f"Lanczos did not converge in {m_eff} iterations "
            f"(worst residual {np.max(resid):.3e}, budget {tol * scale:.3e})",
            residuals=list(resid),
        )
    return lam, vecs, resid, m_eff


def lowest_eigs(
    strip: StripForm,
    k: int = 5,
    tol: float = 1e-9,
    sigma: float | None = None,
    maxiter: int = 400,
) -> EigenResult:
    """Lowest k eigenvalues of the strip operator.

    The operator is positive semidefinite, so any negative shift lies
    strictly below the spectrum and shift-inversion is safe.
    """
    if k < 1:
        raise InvalidArgumentError("need k >= 1 eigenvalues")
    A = strip.operator.tocsr()
    if sigma is None:
        sigma = -0.5
    if sigma >= 0.0:
        raise InvalidArgumentError(
            "shift must be negative (below the spectrum of a PSD operator)"
        )
    with threadpool_limits(limits=1):
        lam, _vecs, resid, iters = _lanczos_shift_invert(
            A, k, sigma, tol, maxiter
        )
    return EigenResult(
        eigenvalues=lam,
        residual_norms=resid,
        iterations=iters,
        convergence_record=[{
            "n_dof": strip.grid.n_dof,
            "iterations": iters,
            "worst_residual": float(np.max(resid)),
        }],
    )


def dense_eigs(strip: StripForm, k: int = 5) -> np.ndarray:
    """Dense reference eigenvalues; only for small test problems."""
    n = strip.grid.n_dof
    if n > 4100:
        raise InvalidArgumentError(
            f"dense oracle limited to 4100 unknowns, got {n}"
        )
    A = strip.operator.toarray()
    return scipy.linalg.eigh(A, eigvals_only=True,
                             subset_by_index=(0, k - 1))


def _richardson_factor(fine: StripGrid, coarse: StripGrid) -> float:
    """Error-cancellation factor r^2 - 1 for a second-order scheme.

    r is the smaller of the mesh-refinement ratios over the directions
    that actually refined; for exact grid halving this is the classical
    factor 3.  Directions pinned by the coarse-grid floors contribute no
    cancellable difference and are excluded; if neither direction
    refined there is nothing to extrapolate and we raise.
    """
    rx = (fine.n_x + 1) / (coarse.n_x + 1)
    rt = fine.n_t / coarse.n_t
    ratios = [r for r in (rx, rt) if r > 1.001]
    if not ratios:
        raise InvalidArgumentError(
            "coarse grid does not refine in any direction"
        )
    r = min(ratios)
    return r * r - 1.0


def extrapolated_lowest(
    cs: CrossSection,
    profile: ReferenceProfile,
    grid: StripGrid,
    k: int = 1,
    tol: float = 1e-9,
):
    """Richardson-extrapolated lowest eigenvalues of the strip operator.

    Solves on the given grid and on the grid with both mesh widths
    doubled; since the scheme is second order in both directions, the
    combination  lam_f + (lam_f - lam_c)/3  cancels the leading error,
    and |lam_f - lam_c|/3 estimates the remaining discretization error.
    Returns (values, error_estimates).
    """
    coarse_grid = StripGrid(L=grid.L, n_x=max(33, (grid.n_x // 2) | 1),
                            n_t=max(32, grid.n_t // 2))
    fine = lowest_eigs(assemble_form(cs, profile, grid), k=k, tol=tol)
    coarse = lowest_eigs(assemble_form(cs, profile, coarse_grid), k=k, tol=tol)
    lam_f = fine.eigenvalues
    lam_c = coarse.eigenvalues
    factor = _richardson_factor(grid, coarse_grid)
    return lam_f + (lam_f - lam_c) / factor, np.abs(lam_f - lam_c) / factor


def find_bound_states(
    cs: CrossSection,
    profile: ReferenceProfile,
    threshold: float,
    L_schedule,
    n_x_schedule,
    n_t: int = 64,
    k: int = 5,
    tol: float = 1e-9,
) -> EigenResult:
    """Search for eigenvalues below the essential-spectrum threshold.

    Solves on a schedule of growing truncated strips, estimates the
    discretization error of the final solve by grid halving (Richardson
    factor 1/3 for the second-order scheme) and the truncation error by
    comparison with the previous strip.  An eigenvalue is reported as
    below threshold when it clears both error margins; it is confirmed
    when the previous strip already showed it below threshold with a
    stable gap.
    """
    L_schedule = list(L_schedule)
    n_x_schedule = list(n_x_schedule)
    if len(n_x_schedule) < len(L_schedule):
        n_x_schedule += [n_x_schedule[-1]] * (len(L_schedule) - len(n_x_schedule))

    record = []
    results = []
    for L, n_x in zip(L_schedule, n_x_schedule):
        grid = StripGrid(L=L, n_x=n_x, n_t=n_t)
        strip = assemble_form(cs, profile, grid)
        res = lowest_eigs(strip, k=k, tol=tol)
        results.append(res)
        record.append({
            "L": L, "n_x": n_x, "n_t": n_t,
            "eigenvalues": [float(v) for v in res.eigenvalues],
            "iterations": res.iterations,
        })

    final_L, final_nx = L_schedule[-1], n_x_schedule[-1]
    fine_grid = StripGrid(L=final_L, n_x=final_nx, n_t=n_t)
    coarse_grid = StripGrid(L=final_L, n_x=max(33, (final_nx // 2) | 1),
                            n_t=max(32, n_t // 2))
    coarse = lowest_eigs(assemble_form(cs, profile, coarse_grid), k=k, tol=tol)
    lam = results[-1].eigenvalues
    disc = np.abs(lam - coarse.eigenvalues) / _richardson_factor(
        fine_grid, coarse_grid)
    if len(results) >= 2:
        trunc = np.abs(lam - results[-2].eigenvalues)
    else:
        trunc = np.full_like(lam, np.inf)
    margins = np.maximum(disc, trunc)
    record.append({
        "error_margins": [float(v) for v in margins],
        "discretization": [float(v) for v in disc],
        "truncation": [float(v) for v in trunc],
    })

    below = []
    confirmed = []
    for i, (val, margin) in enumerate(zip(lam, margins)):
        gap = threshold - val
        if gap > margin:
            below.append((float(val), float(gap), float(margin)))
            if len(results) >= 2:
                prev = results[-2].eigenvalues[i]
                prev_gap = threshold - prev
                if prev_gap > margin and abs(gap - prev_gap) <= max(
                    margin, 0.1 * abs(gap)
                ):
                    confirmed.append((float(val), float(gap)))

    out = results[-1]
    out.convergence_record = record
    out.below_threshold = below
    out.confirmed = confirmed
    return out
