"""Small dense cone-program solver.

Programs have the standard form::

    min / max   sum_b <C_b, X_b>
    subject to  sum_b <A_kb, X_b> = b_k        k = 1..m
                X_b PSD (real symmetric) or X_b >= 0 (componentwise)

and are solved with an infeasible-start primal-dual interior-point method
(HKM search direction, Mehrotra predictor-corrector, dense Schur complement).
The dual of the minimisation form is::

    max  b^T y   subject to   C_b - sum_k y_k A_kb = Z_b  in the cone.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionError, ResourceCapError, SolverError

PSD = "psd"
NONNEG = "nonneg"

GAP_TOL = 1e-8
FEAS_TOL = 1e-8
MAX_ITERS = 200
PSD_CAP = 256
DIVERGENCE = 1e10


@dataclass(frozen=True)
class Block:
    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in (PSD, NONNEG):
            raise ValueError(f"unknown block kind {self.kind!r}")
        if self.size < 1:
            raise ValueError("block size must be positive")

    @property
    def shape(self):
        return (self.size, self.size) if self.kind == PSD else (self.size,)


class ConeProgram:
    """A linear objective and equality rows over PSD and nonnegative blocks.

    Coefficients for a PSD block are real symmetric matrices (paired with the
    variable through the trace inner product); for a nonnegative block they
    are vectors.
    """

    def __init__(self, sense="min"):
        if sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        self.sense = sense
        self.blocks = []
        self._objective = []
        self._rows = []
        self._rhs = []

    def add_block(self, kind, size):
        self.blocks.append(Block(kind, int(size)))
        self._objective.append(np.zeros(self.blocks[-1].shape))
        return len(self.blocks) - 1

    def _coeff(self, block, coeff):
        shape = self.blocks[block].shape
        c = np.asarray(coeff, dtype=float)
        if c.shape != shape:
            raise DimensionError(f"coefficient shape {c.shape} does not match block {shape}")
        if len(shape) == 2 and np.max(np.abs(c - c.T), initial=0.0) > 1e-14:
            raise ValueError("PSD-block coefficients must be symmetric")
        return c

    def set_objective(self, block, coeff):
        self._objective[block] = self._coeff(block, coeff)

    def add_equality(self, terms, rhs):
        """Add ``sum_b <terms[b], X_b> = rhs``; returns the row index."""
        self._rows.append({b: self._coeff(b, c) for b, c in terms.items()})
        self._rhs.append(float(rhs))
        return len(self._rows) - 1

    @property
    def n_rows(self):
        return len(self._rows)

    def objective(self, block):
        return self._objective[block]

    def row_matrix(self, block):
        """All equality coefficients of ``block`` stacked along axis 0."""
        shape = self.blocks[block].shape
        out = np.zeros((len(self._rows),) + shape)
        for k, row in enumerate(self._rows):
            if block in row:
                out[k] = row[block]
        return out

    @property
    def rhs(self):
        return np.array(self._rhs)

    def evaluate(self, point):
        """Objective value at ``point`` (a list of block values)."""
        return float(sum(np.sum(c * x) for c, x in zip(self._objective, point)))

    def residual(self, point):
        """Equality residuals ``b - A(point)``."""
        ax = np.zeros(self.n_rows)
        for b in range(len(self.blocks)):
            a = self.row_matrix(b)
            ax += a.reshape(self.n_rows, -1) @ np.ravel(point[b])
        return self.rhs - ax


@dataclass
class ConeSolution:
    """Primal/dual pair returned by :func:`solve`.

    ``primal_value`` is the objective of ``primal_point`` in the program's own
    sense; ``dual_value`` is the dual objective. ``dual_point`` holds the
    equality multipliers ``y`` and ``dual_slack`` the cone slacks.
    """

    status: str
    primal_value: float
    dual_value: float
    primal_point: list
    dual_point: np.ndarray
    dual_slack: list
    gap: float
    iterations: int
    primal_residual: float
    dual_residual: float
    dropped_rows: tuple = field(default=())


@dataclass
class _Data:
    psd: list          # (block index, C, A[m, n, n])
    lin: list          # (block index, c, A[m, n])
    b: np.ndarray


def _presolve(prog):
    m = prog.n_rows
    if m == 0:
        return np.arange(0), ()
    flat = np.hstack([prog.row_matrix(k).reshape(m, -1) for k in range(len(prog.blocks))])
    scale = np.linalg.norm(flat, axis=1)
    scale[scale == 0] = 1.0
    _, r, piv = scipy.linalg.qr((flat / scale[:, None]).T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > 1e-10 * max(diag[0], 1.0))) if diag.size else 0
    keep = np.sort(piv[:rank])
    drop = tuple(int(k) for k in np.sort(piv[rank:]))
    if drop:
        b = prog.rhs
        coef, *_ = np.linalg.lstsq(flat[keep].T, flat[list(drop)].T, rcond=None)
        mismatch = np.abs(coef.T @ b[keep] - b[list(drop)])
        if np.max(mismatch) > 1e-9 * (1 + np.linalg.norm(b)):
            raise SolverError("equality constraints are inconsistent (infeasible)")
    return keep, drop


def _max_step(x, dx):
    """Largest alpha with x + alpha*dx in the cone (inf if unbounded)."""
    if x.ndim == 1:
        neg = dx < 0
        return np.min(-x[neg] / dx[neg]) if np.any(neg) else np.inf
    lchol = np.linalg.cholesky(x)
    linv = scipy.linalg.solve_triangular(lchol, np.eye(len(x)), lower=True)
    w = linv @ dx @ linv.T
    lmin = np.linalg.eigvalsh((w + w.T) / 2)[0]
    return -1.0 / lmin if lmin < 0 else np.inf


def _inner(a, b):
    return float(np.sum(a * b))


def solve(prog, gap_tol=GAP_TOL, feas_tol=FEAS_TOL, max_iters=MAX_ITERS,
          psd_cap=PSD_CAP, check=True):
    """Solve ``prog`` to a primal-dual certificate.

    On ``status == "optimal"`` the returned pair satisfies
    ``|primal - dual| <= gap_tol * (1 + |primal|)`` and relative residuals
    below ``feas_tol``. With ``check`` set, any other status raises
    :class:`SolverError` carrying the partial solution.
    """
    for blk in prog.blocks:
        if blk.kind == PSD and blk.size > psd_cap:
            raise ResourceCapError(f"PSD block of size {blk.size} exceeds cap {psd_cap}")
    if not prog.blocks:
        raise DimensionError("program has no variable blocks")

    keep, dropped = _presolve(prog)
    sign = 1.0 if prog.sense == "min" else -1.0
    data = _Data([], [], prog.rhs[keep])
    for k, blk in enumerate(prog.blocks):
        c = sign * prog.objective(k)
        a = prog.row_matrix(k)[keep]
        (data.psd if blk.kind == PSD else data.lin).append((k, c, a))

    sol = _ipm(data, gap_tol, feas_tol, max_iters)
    x_blocks, y, z_blocks, status, iters, pres, dres = sol

    primal = [None] * len(prog.blocks)
    slack = [None] * len(prog.blocks)
    for (k, _, _), xv, zv in zip(data.psd + data.lin, x_blocks, z_blocks):
        primal[k] = xv
        slack[k] = zv
    y_full = np.zeros(prog.n_rows)
    y_full[keep] = sign * y
    pobj = prog.evaluate(primal)
    dobj = float(prog.rhs @ y_full)
    out = ConeSolution(
        status=status,
        primal_value=pobj,
        dual_value=dobj,
        primal_point=primal,
        dual_point=y_full,
        dual_slack=slack,
        gap=abs(pobj - dobj),
        iterations=iters,
        primal_residual=pres,
        dual_residual=dres,
        dropped_rows=dropped,
    )
    if check and status != "optimal":
        raise SolverError(f"solver stopped with status {status!r} after {iters} iterations",
                          solution=out)
    return out


def _ipm(data, gap_tol, feas_tol, max_iters):
    b = data.b
    m = len(b)
    psd_a = [a.reshape(m, a.shape[1] * a.shape[2]) for _, _, a in data.psd]
    lin_a = [a for _, _, a in data.lin]
    cs = [c for _, c, _ in data.psd] + [c for _, c, _ in data.lin]
    n_psd = len(data.psd)
    nu = sum(c.shape[0] for c in cs)
    norm_b = np.linalg.norm(b)
    norm_c = np.sqrt(sum(np.sum(c * c) for c in cs))

    def op_a(xs):
        out = np.zeros(m)
        for a, x in zip(psd_a, xs[:n_psd]):
            out += a @ x.ravel()
        for a, x in zip(lin_a, xs[n_psd:]):
            out += a @ x
        return out

    def op_at(y):
        res = [(y @ a).reshape(c.shape) for a, c in zip(psd_a, cs[:n_psd])]
        res += [y @ a for a in lin_a]
        return res

    # starting point scaled to the data
    xs, zs = [], []
    for (_, c, a) in data.psd + data.lin:
        n = c.shape[0]
        anorm = np.linalg.norm(a.reshape(m, int(np.prod(a.shape[1:]))), axis=1)
        fac = n if c.ndim == 2 else np.sqrt(n)
        xi = max(10.0, np.sqrt(n), fac * np.max((1 + np.abs(b)) / (1 + anorm), initial=0.0))
        eta = max(10.0, np.sqrt(n), np.max(anorm, initial=0.0), np.linalg.norm(c))
        xs.append(xi * (np.eye(n) if c.ndim == 2 else np.ones(n)))
        zs.append(eta * (np.eye(n) if c.ndim == 2 else np.ones(n)))
    y = np.zeros(m)

    status = "max_iters"
    it = 0
    pres = dres = np.inf
    for it in range(max_iters + 1):
        rp = b - op_a(xs)
        aty = op_at(y)
        rd = [c - z - t for c, z, t in zip(cs, zs, aty)]
        pobj = sum(_inner(c, x) for c, x in zip(cs, xs))
        dobj = float(b @ y)
        mu = sum(_inner(x, z) for x, z in zip(xs, zs)) / nu
        pres = np.linalg.norm(rp) / (1 + norm_b)
        dres = np.sqrt(sum(_inner(r, r) for r in rd)) / (1 + norm_c)
        if abs(pobj - dobj) <= gap_tol * (1 + abs(pobj)) and pres <= feas_tol and dres <= feas_tol:
            status = "optimal"
            break
        big = max([np.max(np.abs(v)) for v in xs + zs] + [np.max(np.abs(y), initial=0.0)])
        if big > DIVERGENCE:
            status = "infeasible"
            break
        if it == max_iters:
            break

        zinvs = []
        for z in zs[:n_psd]:
            zc = scipy.linalg.cho_factor(z, lower=True)
            zinvs.append(scipy.linalg.cho_solve(zc, np.eye(len(z))))
        schur = np.zeros((m, m))
        for a, x, zi in zip(psd_a, xs[:n_psd], zinvs):
            n = x.shape[0]
            am = a.reshape(m, n, n)
            g = np.matmul(np.matmul(x, am), zi)
            schur += a @ g.reshape(m, n * n).T
        for a, x, z in zip(lin_a, xs[n_psd:], zs[n_psd:]):
            schur += (a * (x / z)) @ a.T
        schur = (schur + schur.T) / 2
        try:
            factor = scipy.linalg.cho_factor(schur, lower=True)
        except np.linalg.LinAlgError:
            ridge = 1e-13 * max(np.max(np.diag(schur)), 1.0)
            factor = scipy.linalg.cho_factor(schur + ridge * np.eye(m), lower=True)

        def direction(rc):
            # rc: complementarity targets, one per block
            rhs = rp.copy()
            rhs -= op_a(rc)
            xrz = [x @ r @ zi for x, r, zi in zip(xs[:n_psd], rd[:n_psd], zinvs)]
            xrz += [x * r / z for x, r, z in zip(xs[n_psd:], rd[n_psd:], zs[n_psd:])]
            rhs += op_a(xrz)
            dy = scipy.linalg.cho_solve(factor, rhs)
            dz = [r - t for r, t in zip(rd, op_at(dy))]
            dx = []
            for k, (x, r, d) in enumerate(zip(xs, rc, dz)):
                if k < n_psd:
                    v = r - x @ d @ zinvs[k]
                    dx.append((v + v.T) / 2)
                else:
                    dx.append(r - x * d / zs[k])
            return dx, dy, dz

        def steps(dx, dz):
            ap = min([1.0] + [_max_step(x, d) for x, d in zip(xs, dx)])
            ad = min([1.0] + [_max_step(z, d) for z, d in zip(zs, dz)])
            return ap, ad

        # predictor
        dx, dy, dz = direction([-x for x in xs])
        ap, ad = steps(dx, dz)
        mu_aff = sum(_inner(x + ap * u, z + ad * v)
                     for x, u, z, v in zip(xs, dx, zs, dz)) / nu
        sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3)) if mu > 0 else 0.0

        # corrector
        rc = []
        for k, (x, u, v) in enumerate(zip(xs, dx, dz)):
            if k < n_psd:
                zi = zinvs[k]
                rc.append(sigma * mu * zi - x - u @ v @ zi)
            else:
                rc.append(sigma * mu / zs[k] - x - u * v / zs[k])
        dx, dy, dz = direction(rc)
        ap, ad = steps(dx, dz)
        tau = 0.98 if max(pres, dres) > feas_tol else 0.995
        ap = min(1.0, tau * ap)
        ad = min(1.0, tau * ad)
        xs = [x + ap * u for x, u in zip(xs, dx)]
        zs = [z + ad * v for z, v in zip(zs, dz)]
        y = y + ad * dy
        xs[:n_psd] = [(x + x.T) / 2 for x in xs[:n_psd]]
        zs[:n_psd] = [(z + z.T) / 2 for z in zs[:n_psd]]

    return xs, y, zs, status, it, float(pres), float(dres)


@dataclass(frozen=True)
class EpigraphFragment:
    """PSD block ``W = [[A, M], [M^T, B]]`` whose objective is ``(Tr A + Tr B) / 2``.

    Minimising that objective over ``W >= 0`` with the off-diagonal block
    pinned to ``M`` yields the trace norm of ``M``.
    """

    m_dim: int

    @property
    def block_size(self):
        return 2 * self.m_dim

    def objective(self):
        return np.eye(self.block_size) / 2

    def entry(self, i, j):
        """Coefficient picking out ``M[i, j]`` from ``W``."""
        e = np.zeros((self.block_size, self.block_size))
        e[i, self.m_dim + j] = 0.5
        e[self.m_dim + j, i] = 0.5
        return e

    def attach(self, prog):
        blk = prog.add_block(PSD, self.block_size)
        prog.set_objective(blk, self.objective())
        return blk


def trace_norm_epigraph(m_dim):
    if m_dim < 1:
        raise ValueError("m_dim must be at least 1")
    return EpigraphFragment(int(m_dim))


def realify(m):
    """Real symmetric embedding ``[[Re, -Im], [Im, Re]]`` of a complex matrix.

    Singular values are duplicated, so trace norms double.
    """
    m = np.asarray(m, dtype=complex)
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


def trace_norm_program(m):
    """Cone program whose optimal value is the trace norm of the real matrix ``m``."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError("expected a square matrix")
    frag = trace_norm_epigraph(m.shape[0])
    prog = ConeProgram("min")
    blk = frag.attach(prog)
    for i in range(m.shape[0]):
        for j in range(m.shape[0]):
            prog.add_equality({blk: frag.entry(i, j)}, m[i, j])
    return prog
